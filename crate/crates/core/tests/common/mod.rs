#![allow(dead_code)]

use std::sync::Arc;

use fbsde::{build_grid, hermite_rule, CubicSpline, FbsdeProblem, SchemeParams, SpatialGrid, TimeMesh};

/// Reference errors for example1, rows N = 8..128, columns (err_y, err_z)
/// for α = 1/4, 1/2, 3/4, 1.
pub const EXAMPLE1_REF_ERRORS: [[(f64, f64); 4]; 5] = [
    [(1.3590e-04, 2.4418e-05), (1.2017e-04, 1.0366e-04), (1.0258e-04, 1.9060e-04), (8.2793e-05, 2.8535e-04)],
    [(3.4884e-05, 4.9078e-06), (3.0986e-05, 2.6713e-05), (2.6797e-05, 4.9519e-05), (2.2350e-05, 7.3383e-05)],
    [(8.8581e-06, 1.1203e-06), (7.8802e-06, 6.8085e-06), (6.8659e-06, 1.2627e-05), (5.8187e-06, 1.8580e-05)],
    [(2.2179e-06, 2.3749e-07), (1.9729e-06, 1.6882e-06), (1.7234e-06, 3.1556e-06), (1.4697e-06, 4.6399e-06)],
    [(5.5778e-07, 5.2154e-08), (4.9651e-07, 4.1841e-07), (4.3466e-07, 7.8672e-07), (3.7230e-07, 1.1572e-06)],
];
pub const EXAMPLE1_REF_CR: [(f64, f64); 4] = [(1.9833, 2.2111), (1.9811, 1.9889), (1.9724, 1.9813), (1.9520, 1.9875)];
/// Reference rates (CR_y, CR_z) per α; example2 with a = −0.5, x0 = 1.
pub const EXAMPLE2_REF_CR: [(f64, f64); 4] = [(1.9888, 2.2225), (1.9873, 1.9903), (1.9795, 1.9820), (1.9603, 1.9880)];
/// example2 with a = −1, x0 = 1.5.
pub const EXAMPLE2_SHIFTED_REF_CR: [(f64, f64); 4] = [(1.9897, 2.0935), (1.9777, 1.9822), (1.9671, 1.9785), (1.9567, 1.9851)];

pub const ALPHAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const STEPS: [usize; 5] = [8, 16, 32, 64, 128];

/// Least-squares slope of ln e against ln h, written out independently
/// of the library.
pub fn slope(hs: &[f64], es: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (h, e) in hs.iter().zip(es) {
        let (x, y) = (h.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Crank–Nicolson reference: for each step, with `E` the frozen-coefficient
/// Gauss–Hermite expectation over a full step `h` from `(t_i, x)`,
///
/// ```text
/// y_p = E[Y + h f],          z_p = E[(Y + h f) ΔW] / h
/// y   = h/2 f(t_i, y_p, z_p) + E[Y + h/2 f]
/// z   = 2/h E[Y ΔW] + E[f ΔW] − E[Z]
/// ```
///
/// on the same grid and spline family the solver uses.
pub fn crank_nicolson(problem: &FbsdeProblem, params: &SchemeParams, steps: usize) -> (f64, f64) {
    let mesh = TimeMesh::new(steps, problem.terminal_time, 1.0).unwrap();
    let rule = hermite_rule(params.quadrature_order).unwrap();
    let grid: Arc<SpatialGrid> = Arc::new(build_grid(problem, params, &mesh, &rule).unwrap());
    let xs = grid.points().to_vec();
    let h = mesh.step_size();
    let norm = std::f64::consts::PI.sqrt();

    let mut ys: Vec<f64> = xs.iter().map(|&x| problem.terminal_y(x)).collect();
    let mut zs: Vec<f64> = xs.iter().map(|&x| problem.terminal_z(x)).collect();
    for i in (0..steps).rev() {
        let (t_i, t_next) = (mesh.time(i), mesh.time(i + 1));
        let ys_spline = CubicSpline::fit(&xs, &ys).unwrap();
        let zs_spline = CubicSpline::fit(&xs, &zs).unwrap();
        let mut new_y = Vec::with_capacity(xs.len());
        let mut new_z = Vec::with_capacity(xs.len());
        for &x in &xs {
            let b = problem.drift(t_i, x);
            let s = problem.diffusion(t_i, x);
            let dw_scale = (2.0 * h).sqrt();
            let (mut e_yf, mut e_yf_w, mut e_half, mut e_y_w, mut e_f_w, mut e_z) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
                let dw = dw_scale * xi;
                let xp = x + b * h + s * dw;
                let y = ys_spline.eval(xp).unwrap();
                let z = zs_spline.eval(xp).unwrap();
                let f = problem.generator(t_next, y, z);
                e_yf += w * (y + h * f);
                e_yf_w += w * (y + h * f) * dw;
                e_half += w * (y + 0.5 * h * f);
                e_y_w += w * y * dw;
                e_f_w += w * f * dw;
                e_z += w * z;
            }
            let (y_p, z_p) = (e_yf / norm, e_yf_w / norm / h);
            new_y.push(0.5 * h * problem.generator(t_i, y_p, z_p) + e_half / norm);
            new_z.push(2.0 / h * e_y_w / norm + e_f_w / norm - e_z / norm);
        }
        ys = new_y;
        zs = new_z;
    }
    let c = grid.center_index();
    (ys[c], zs[c])
}
