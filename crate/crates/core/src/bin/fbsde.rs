fn main() {
    std::process::exit(fbsde::cli::run(std::env::args_os()));
}
