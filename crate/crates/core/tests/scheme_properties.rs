mod common;

use std::sync::Arc;

use common::*;
use fbsde::problems::{example1, example2};
use fbsde::scheme::{predictor, StepContext};
use fbsde::{
    build_grid, deviation, field_from_functions, hermite_rule, run_convergence_study, solve, solve_perturbed,
    PerturbationSpec, SchemeParams, TimeMesh,
};

#[test]
fn predictor_local_error_is_second_order() {
    let p = example1();
    for alpha in [0.25, 0.5, 1.0] {
        let params = SchemeParams::with_alpha(alpha);
        let rule = hermite_rule(12).unwrap();
        let (mut hs, mut errs) = (Vec::new(), Vec::new());
        for n in [8usize, 16, 32, 64] {
            let mesh = TimeMesh::new(n, 1.0, alpha).unwrap();
            let grid = Arc::new(build_grid(&p, &params, &mesh, &rule).unwrap());
            let t1 = mesh.time(1);
            let next =
                field_from_functions(grid, t1, |x| p.exact_y(t1, x).unwrap(), |x| p.exact_z(t1, x).unwrap()).unwrap();
            let ctx = StepContext { problem: &p, mesh: &mesh, rule: &rule };
            let (y, _) = predictor(&next, p.x0, 0, &ctx).unwrap();
            hs.push(mesh.step_size());
            errs.push((y - p.exact_y(mesh.intermediate_time(0), p.x0).unwrap()).abs());
        }
        let s = slope(&hs, &errs);
        assert!((1.8..=2.3).contains(&s), "alpha {alpha}: slope {s}");
    }
}

#[test]
fn crank_nicolson_limit() {
    let params = SchemeParams::with_alpha(1.0);
    for p in [example1(), example2(-0.5, 1.0)] {
        for n in [4, 8] {
            let r = solve(&p, &params, n, false).unwrap();
            let (y, z) = crank_nicolson(&p, &params, n);
            assert!((r.y0 - y).abs() <= 1e-12 && (r.z0 - z).abs() <= 1e-12, "{} N={n}", p.name);
        }
    }
}

#[test]
fn example2_shifted_start_rates() {
    let p = example2(-1.0, 1.5);
    assert!((p.exact_z(0.0, 1.5).unwrap() + 0.25).abs() < 1e-15);
    for (a, alpha) in ALPHAS.iter().enumerate() {
        let rep = run_convergence_study(&p, &SchemeParams::with_alpha(*alpha), &STEPS).unwrap();
        let (cy, cz) = (rep.cr_y.unwrap(), rep.cr_z.unwrap());
        assert!((cy - EXAMPLE2_SHIFTED_REF_CR[a].0).abs() <= 0.15, "alpha {alpha}: {cy}");
        assert!((cz - EXAMPLE2_SHIFTED_REF_CR[a].1).abs() <= 0.15, "alpha {alpha}: {cz}");
        assert!(rep.rows.last().unwrap().err_y < 5e-6);
    }
}

#[test]
fn stability_functional_does_not_grow_under_refinement() {
    let p = example1();
    let params = SchemeParams::with_alpha(0.5);
    let dev = |n: usize| {
        let base = solve(&p, &params, n, true).unwrap();
        let pert = solve_perturbed(&p, &params, n, &PerturbationSpec::constant_generator(1e-3)).unwrap();
        deviation(&base, &pert).unwrap().dev
    };
    let (coarse, fine) = (dev(8), dev(64));
    let ratio = coarse.max(fine) / coarse.min(fine);
    assert!(ratio <= 2.0, "dev(8) = {coarse}, dev(64) = {fine}");
}

#[test]
fn core_launches_stay_on_grid() {
    for p in [example1(), example2(-0.5, 1.0), example2(-1.0, 1.5)] {
        for alpha in ALPHAS {
            for n in [8, 128] {
                let r = solve(&p, &SchemeParams::with_alpha(alpha), n, false).unwrap();
                assert_eq!(r.diagnostics.core_out_of_domain, 0, "{} alpha {alpha} N {n}", p.name);
            }
        }
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let p = example2(-0.5, 1.0);
    let params = SchemeParams::with_alpha(0.75);
    let a = solve(&p, &params, 16, true).unwrap();
    let b = solve(&p, &params, 16, true).unwrap();
    assert_eq!((a.y0.to_bits(), a.z0.to_bits()), (b.y0.to_bits(), b.z0.to_bits()));
    for (fa, fb) in a.fields.unwrap().iter().zip(b.fields.unwrap().iter()) {
        assert_eq!(fa.y_values(), fb.y_values());
        assert_eq!(fa.z_values(), fb.z_values());
    }
}
