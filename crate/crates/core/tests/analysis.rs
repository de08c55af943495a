use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use biharm_core::analysis::{
    analytic_inf_check, boundary_wirtinger, dilatation_scan, heinz_check, jacobian_sandwich,
    lipschitz_scan, lipschitz_scan_detailed, log_log_slope, origin_decay_profile, sample_pairs,
    solver_scan_radius, GridDims, LipschitzOptions,
};
use biharm_core::constants::certify_bilipschitz;
use biharm_core::fields::{make_case, BoundaryFunction, CaseDefinition, CaseParams};
use biharm_core::solver::QuadratureSpec;
use biharm_core::{DiskPoint, Error};
use num_complex::Complex64;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn case(name: &str) -> CaseDefinition {
    make_case(name, &CaseParams::default()).unwrap()
}

/// The quartic-bump data without its closed form, so scans use the solver.
fn quartic_bump_without_oracle() -> CaseDefinition {
    let c = case("example-4.2");
    CaseDefinition::from_parts("bump-solver", c.fstar, c.phi, c.g, c.exact_k).unwrap()
}

#[test]
fn dilatation_reports_are_consistent() {
    let grid = GridDims { n_r: 16, n_theta: 32 };
    for c in [case("example-4.2"), case("example-4.1"), case("constant-source")] {
        let r = dilatation_scan(&c, grid, &q()).unwrap();
        let b = r.beltrami_sup;
        assert!(b < 1.0);
        assert!((r.k_sup - (1.0 + b) / (1.0 - b)).abs() <= 1e-9, "{}", c.name);
        assert!((r.k_sup - c.exact_k.unwrap()).abs() <= 1e-6, "{}: {}", c.name, r.k_sup);
    }
    let e1 = case("example-4.1");
    let w = e1.oracle().unwrap().wirtinger(Complex64::new(0.0, 0.0));
    assert_eq!(w.lambda(), 0.0);
}

#[test]
fn solver_backed_dilatation() {
    let c = quartic_bump_without_oracle();
    let r = dilatation_scan(&c, GridDims { n_r: 4, n_theta: 8 }, &q()).unwrap();
    assert!(!r.from_oracle);
    let o = case("example-4.2");
    let rmax = solver_scan_radius();
    let w = o.oracle().unwrap().wirtinger(Complex64::new(rmax, 0.0));
    assert!((r.k_sup - w.norm() / w.lambda()).abs() < 1e-6, "{}", r.k_sup);
}

#[test]
fn identity_scan_is_degenerate_at_one() {
    let id = case("identity");
    let (report, ratios) = lipschitz_scan_detailed(&id, &LipschitzOptions::new(10_000, 3), &q()).unwrap();
    assert!(ratios.iter().all(|r| (r - 1.0).abs() < 1e-9));
    assert!((report.min_ratio - 1.0).abs() < 1e-9 && (report.max_ratio - 1.0).abs() < 1e-9);
    assert!(lipschitz_scan(&id, 999, 3, &q()).is_err());
}

#[test]
fn sampled_pairs_stay_in_the_disk() {
    let opts = LipschitzOptions::new(20_000, 17);
    let pairs = sample_pairs(&opts);
    assert_eq!(pairs.len(), 20_000);
    assert!(pairs.iter().all(|(a, b)| a.norm() < 1.0 && b.norm() < 1.0 && a != b));
    assert_eq!(pairs, sample_pairs(&opts));
    assert_ne!(pairs, sample_pairs(&LipschitzOptions::new(20_000, 18)));
}

#[test]
fn lipschitz_containment_for_quartic_bump() {
    let c = case("example-4.2");
    let (certified, k) = certify_bilipschitz(&c).unwrap();
    assert!(certified && k.c1 > 0.0);
    let report = lipschitz_scan(&c, 100_000, 42, &q()).unwrap();
    assert!(k.c1 - 1e-9 <= report.min_ratio, "{} < C1 = {}", report.min_ratio, k.c1);
    assert!(report.min_ratio <= report.max_ratio);
    assert!(report.max_ratio <= k.c2_upper + 1e-9, "{} > C2 = {}", report.max_ratio, k.c2_upper);
}

#[test]
fn power_stretch_is_not_co_lipschitz() {
    let c = case("example-4.1");
    let opts = LipschitzOptions::new(10_000, 42).near_origin(0.2);
    let (report, _) = lipschitz_scan_detailed(&c, &opts, &q()).unwrap();
    assert!(report.min_ratio <= 1e-3, "min_ratio = {}", report.min_ratio);
    for gamma in [3.5, 4.0, 6.0] {
        let c = make_case("example-4.1", &CaseParams { gamma, ..CaseParams::default() }).unwrap();
        let radii: Vec<f64> = (0..9).map(|i| 0.5 * 10f64.powf(-0.25 * i as f64)).collect();
        let profile = origin_decay_profile(&c, &radii, 2000, 5, &q()).unwrap();
        let slope = log_log_slope(&profile);
        assert!((slope - gamma).abs() <= 0.2, "gamma {gamma}: slope {slope}");
    }
}

#[test]
fn boundary_jacobian_sandwich() {
    let c = case("example-4.2");
    for k in 0..16 {
        let theta = TAU * k as f64 / 16.0;
        let s = jacobian_sandwich(&c, theta, &q()).unwrap();
        assert!(s.valid);
        assert!(s.lower <= s.j_boundary && s.j_boundary <= s.upper, "{s:?}");
        let from_formulas = boundary_wirtinger(&c, theta, &q()).unwrap().jacobian();
        assert!((from_formulas - s.j_boundary).abs() < 1e-9);
    }
    let s = jacobian_sandwich(&c, 0.0, &q()).unwrap();
    // |f_z|² - |f_z̄|² on the circle with f_z = 199/200, f_z̄ = -1/200
    assert!((s.j_boundary - 0.99).abs() <= 1e-9);
    assert!((s.eta_prime - 1.0).abs() < 1e-9 && (s.chord_integral - 1.0).abs() < 1e-9);

    let id = case("identity");
    let s = jacobian_sandwich(&id, 1.0, &q()).unwrap();
    // zero norms collapse the two bounds onto the Jacobian
    assert!((s.j_boundary - 1.0).abs() < 1e-12);
    assert!((s.lower - 1.0).abs() < 1e-9 && (s.upper - 1.0).abs() < 1e-9);
}

#[test]
fn heinz_inequality_on_grid() {
    let mut min_margin = f64::INFINITY;
    for i in 0..20 {
        let a = DiskPoint::from_polar(0.95 * i as f64 / 20.0, 0.3 * i as f64).unwrap();
        for j in 0..20 {
            let z = DiskPoint::from_polar(0.95 * j as f64 / 20.0, 1.7 * j as f64).unwrap();
            let h = heinz_check(a, z);
            assert!(h.holds);
            min_margin = min_margin.min(h.lhs - h.rhs);
        }
    }
    assert!(min_margin > 0.0);
    let h = heinz_check(DiskPoint::origin(), DiskPoint::from_polar(0.5, 1.0).unwrap());
    assert!((h.rhs - 1.0 / (PI * PI)).abs() < 1e-15);
    assert!((h.lhs - 1.0).abs() < 1e-15);
}

#[test]
fn harmonic_part_homeomorphism_check() {
    let grid = GridDims { n_r: 16, n_theta: 32 };
    assert!((analytic_inf_check(&case("example-4.2"), grid).unwrap() - 1.0).abs() < 1e-15);
    let folded = BoundaryFunction::fourier(BTreeMap::from([(-1, Complex64::new(1.0, 0.0))])).unwrap();
    let c = CaseDefinition::from_parts("reflection", folded, BoundaryFunction::constant(0.0.into()),
        biharm_core::fields::SourceFunction::constant(0.0.into()), None).unwrap();
    assert!(matches!(analytic_inf_check(&c, grid), Err(Error::NotHomeomorphic { .. })));
}

#[test]
fn scans_are_deterministic() {
    let c = case("example-4.2");
    let a = lipschitz_scan(&c, 20_000, 9, &q()).unwrap();
    let b = lipschitz_scan(&c, 20_000, 9, &q()).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let grid = GridDims { n_r: 32, n_theta: 64 };
    assert_eq!(dilatation_scan(&c, grid, &q()).unwrap(), dilatation_scan(&c, grid, &q()).unwrap());
}
