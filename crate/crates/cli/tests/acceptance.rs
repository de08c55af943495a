//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! visible.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2, TAU};
use std::process::{Command, ExitCode};
use std::time::Instant;

use biharm_core::analysis::{
    dilatation_scan, heinz_check, jacobian_sandwich, lipschitz_scan, lipschitz_scan_detailed,
    GridDims, LipschitzOptions,
};
use biharm_core::constants::{
    a1, a2, certify_bilipschitz, compute_constants, h_eval, h_max, sqrt_1_plus_pi2_over_6,
    sqrt_pi2_over_3_minus_1,
};
use biharm_core::fields::{make_case, oracle_wirtinger, BoundaryFunction, CaseDefinition, CaseParams, SourceFunction};
use biharm_core::kernels::moment_series;
use biharm_core::solver::{
    bilaplacian_grid, g1_wirtinger, g1_wirtinger_boundary, g2_wirtinger, g2_wirtinger_boundary,
    green_mean, laplacian_field, solve, QuadratureSpec,
};
use biharm_core::DiskPoint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn case(name: &str) -> Result<CaseDefinition, String> {
    make_case(name, &CaseParams::default()).map_err(|e| e.to_string())
}

fn pt(z: Complex64) -> Result<DiskPoint, String> {
    DiskPoint::new(z).map_err(|e| e.to_string())
}

fn s<E: ToString>(e: E) -> String {
    e.to_string()
}

/// Plain trapezoid mean of `|1 - z e^{iθ}|^{-2α}` over `n` nodes.
fn trapezoid_moment(z: Complex64, alpha: f64, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            (c(1.0) - z * Complex64::from_polar(1.0, t)).norm().powf(-2.0 * alpha)
        })
        .sum::<f64>()
        / n as f64
}

fn kernel_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 2.0, 2.5, 3.0] {
        for z in [c(0.0), c(0.3), Complex64::from_polar(0.7, FRAC_PI_4)] {
            let series = moment_series(pt(z)?, alpha).map_err(s)?;
            worst = worst.max((trapezoid_moment(z, alpha, 2048) - series).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max |quadrature - series| = {worst:.3e} (tol 1e-10)")))
}

fn green_mean_identity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, tol) in [(0.0, 1e-9), (0.6, 1e-9), (0.99, 1e-7)] {
        let err = (green_mean(pt(c(r))?, &q()) - (1.0 - r * r) / 4.0).abs();
        ok &= err <= tol;
        parts.push(format!("|z|={r}: {err:.2e}"));
    }
    Ok((ok, parts.join(", ")))
}

fn representation_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["example-4.2", "example-4.1"] {
        let cs = case(name)?;
        for i in 1..=32 {
            let r = 0.95 * i as f64 / 32.0;
            for j in 0..64 {
                let z = pt(Complex64::from_polar(r, TAU * j as f64 / 64.0))?;
                let sample = solve(&cs, z, &q()).map_err(s)?;
                let oracle = sample.oracle.ok_or("missing oracle")?;
                worst = worst.max((sample.value - oracle).norm());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max |solve - oracle| = {worst:.3e} over 2 cases x 32x64 (tol 1e-6)")))
}

fn pde_verification() -> Outcome {
    let cs = case("example-4.2")?;
    let samples = bilaplacian_grid(&cs, 2f64.powi(-7), 0.9, &q()).map_err(s)?;
    let bilap = samples
        .iter()
        .map(|b| (b.bilaplacian - c(-8.0 / 25.0)).norm())
        .fold(0.0, f64::max);
    let mut lap: f64 = 0.0;
    for k in 0..64 {
        let z = pt(Complex64::from_polar(0.999, TAU * k as f64 / 64.0))?;
        lap = lap.max((laplacian_field(&cs, z, &q()).map_err(s)? - c(-3.0 / 50.0)).norm());
    }
    Ok((
        !samples.is_empty() && bilap <= 1e-3 && lap <= 2e-3,
        format!(
            "bi-Laplacian err {bilap:.3e} at {} nodes (tol 1e-3); Laplacian err at r=0.999 {lap:.3e} (tol 2e-3)",
            samples.len()
        ),
    ))
}

fn unit_constants() -> Outcome {
    let k = compute_constants(1.0, 0.0, 0.0).map_err(s)?;
    let devs = [k.mu1 - 1.0, k.m1 - 1.0, k.m2 - 1.0, k.n1, k.n2];
    let worst = devs.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-12, format!("max deviation of (mu1, M1, M2, N1, N2) = {worst:.2e}")))
}

fn quartic_bump_certificate() -> Outcome {
    let k = 100.0 / 99.0;
    let (a1k, a2k) = (a1(k), a2(k));
    let cs = case("example-4.2")?;
    let (certified, _) = certify_bilipschitz(&cs).map_err(s)?;
    let norms_ok = cs.g_norm < a1k && cs.phi_norm < a2k;
    Ok((
        a1k > 0.63 && a2k > 0.16 && certified && norms_ok,
        format!("a1 = {a1k:.6}, a2 = {a2k:.6}, ‖g‖ = {}, ‖φ‖ = {}, certified = {certified}", cs.g_norm, cs.phi_norm),
    ))
}

fn containment() -> Outcome {
    let cs = case("example-4.2")?;
    let (_, k) = certify_bilipschitz(&cs).map_err(s)?;
    let r = lipschitz_scan(&cs, 100_000, 42, &q()).map_err(s)?;
    Ok((
        k.c1 > 0.0 && k.c1 <= r.min_ratio && r.min_ratio <= r.max_ratio && r.max_ratio <= k.c2_upper,
        format!("C1 = {:.6} <= min {:.6} <= max {:.6} <= C2 = {:.6}", k.c1, r.min_ratio, r.max_ratio, k.c2_upper),
    ))
}

fn power_stretch_failure() -> Outcome {
    let cs = case("example-4.1")?;
    let dil = dilatation_scan(&cs, GridDims { n_r: 32, n_theta: 64 }, &q()).map_err(s)?;
    let k_err = (dil.k_sup - 5.0).abs();
    let lambda0 = oracle_wirtinger(&cs, DiskPoint::origin()).map_err(s)?.lambda();
    let opts = LipschitzOptions::new(10_000, 42).near_origin(0.2);
    let (r, _) = lipschitz_scan_detailed(&cs, &opts, &q()).map_err(s)?;
    Ok((
        k_err <= 1e-6 && lambda0 == 0.0 && r.min_ratio <= 1e-3,
        format!("K = {:.9} (|K-5| = {k_err:.1e}), λ(D_f(0)) = {lambda0}, near-origin min ratio = {:.3e}", dil.k_sup, r.min_ratio),
    ))
}

fn unit_boundary_functions() -> Result<Vec<BoundaryFunction>, String> {
    let mixed = BTreeMap::from([(0, c(0.3)), (-2, c(0.5)), (3, Complex64::new(0.0, 0.2))]);
    let norm = BoundaryFunction::fourier(mixed.clone()).map_err(s)?.sup_norm();
    Ok(vec![
        BoundaryFunction::constant(c(1.0)),
        BoundaryFunction::rotation_power(c(1.0), 1).map_err(s)?,
        BoundaryFunction::rotation_power(Complex64::new(0.0, 1.0), -3).map_err(s)?,
        BoundaryFunction::fourier(mixed.into_iter().map(|(k, v)| (k, v / norm)).collect()).map_err(s)?,
    ])
}

fn unit_sources() -> Result<Vec<SourceFunction>, String> {
    Ok(vec![
        SourceFunction::constant(c(1.0)),
        SourceFunction::radial_monomial(c(1.0), 1.0, 1).map_err(s)?,
        SourceFunction::radial_monomial(Complex64::new(0.0, 1.0), 0.0, -2).map_err(s)?,
        SourceFunction::radial_monomial(c(1.0), 0.0, 1).map_err(s)?,
    ])
}

fn derivative_bounds() -> Outcome {
    // h on [0, 1) sampled independently of the library's own maximiser
    let scanned = (0..100_000)
        .map(|i| h_eval(i as f64 / 100_000.0).unwrap_or(f64::NAN))
        .fold(f64::NEG_INFINITY, f64::max);
    let hm = h_max();
    let h_ok = (hm - 0.5).abs() <= 1e-12 && (scanned - hm).abs() <= 1e-12;

    let (s3, s6) = (sqrt_pi2_over_3_minus_1(), sqrt_1_plus_pi2_over_6());
    let phis = unit_boundary_functions()?;
    let gs = unit_sources()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut margins = [f64::INFINITY; 4];
    for i in 0..1000 {
        let r = (1.0 - 1e-3) * rng.random::<f64>().sqrt();
        let z = pt(Complex64::from_polar(r, TAU * rng.random::<f64>()))?;
        let w1 = g1_wirtinger(&phis[i % phis.len()], z, &q()).map_err(s)?;
        let b1 = 0.25 * (hm + s3 * r);
        margins[0] = margins[0].min(b1 - w1.d_z.norm().max(w1.d_zbar.norm()));
        let w2 = g2_wirtinger(&gs[i % gs.len()], z, &q()).map_err(s)?;
        let b2 = 1.0 / 16.0 + (1.0 - r * r).sqrt() / 60.0 + SQRT_2 * s6 * r / 32.0;
        margins[1] = margins[1].min(b2 - w2.d_z.norm().max(w2.d_zbar.norm()));
    }
    let (b1, b2) = (0.25 * s3, (1.0 + SQRT_2 * s6) / 32.0);
    for k in 0..64 {
        let t = TAU * k as f64 / 64.0;
        for phi in &phis {
            let w = g1_wirtinger_boundary(phi, t, &q()).map_err(s)?;
            margins[2] = margins[2].min(b1 - w.d_z.norm().max(w.d_zbar.norm()));
        }
        for g in &gs {
            let w = g2_wirtinger_boundary(g, t, &q()).map_err(s)?;
            margins[3] = margins[3].min(b2 - w.d_z.norm().max(w.d_zbar.norm()));
        }
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        h_ok && worst >= -1e-8,
        format!(
            "h_max = {hm} (scan {scanned}); margins G1 {:.2e}, G2 {:.2e}, G1 edge {:.2e}, G2 edge {:.2e}",
            margins[0], margins[1], margins[2], margins[3]
        ),
    ))
}

fn jacobian_sandwich_check() -> Outcome {
    let cs = case("example-4.2")?;
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for k in 0..16 {
        let r = jacobian_sandwich(&cs, TAU * k as f64 / 16.0, &q()).map_err(s)?;
        ok &= r.valid && r.lower <= r.j_boundary && r.j_boundary <= r.upper;
        worst = worst.min(r.j_boundary - r.lower).min(r.upper - r.j_boundary);
    }
    let at0 = jacobian_sandwich(&cs, 0.0, &q()).map_err(s)?;
    let err0 = (at0.j_boundary - 0.99).abs();
    ok &= err0 <= 1e-9 && at0.lower <= at0.j_boundary && at0.j_boundary <= at0.upper;
    Ok((
        ok,
        format!(
            "min slack over 16 angles {worst:.3e}; J(θ=0) = {:.9} in [{:.6}, {:.6}]",
            at0.j_boundary, at0.lower, at0.upper
        ),
    ))
}

fn heinz() -> Outcome {
    let mut min_margin = f64::INFINITY;
    for i in 0..20 {
        let a = DiskPoint::from_polar(0.95 * i as f64 / 20.0, 0.3 * i as f64).map_err(s)?;
        for j in 0..20 {
            let z = DiskPoint::from_polar(0.95 * j as f64 / 20.0, 1.7 * j as f64).map_err(s)?;
            let h = heinz_check(a, z);
            min_margin = min_margin.min(if h.holds { h.lhs - h.rhs } else { f64::NEG_INFINITY });
        }
    }
    let h0 = heinz_check(DiskPoint::origin(), DiskPoint::from_polar(0.5, 1.0).map_err(s)?);
    let rhs_err = (h0.rhs - 1.0 / (PI * PI)).abs();
    Ok((
        min_margin > 0.0 && rhs_err <= 1e-15,
        format!("min margin on 20x20 grid {min_margin:.4e}; |rhs(a=0) - 1/π²| = {rhs_err:.1e}"),
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_biharm"))
        .args(args)
        .output()
        .map_err(s)?;
    if !out.status.success() {
        return Err(format!("biharm {} exited with {}", args.join(" "), out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["scan", "--case", "example-4.2", "--pairs", "100000", "--seed", "42"],
        &["scan", "--case", "example-4.1", "--pairs", "10000", "--seed", "7", "--near-origin", "0.2", "--format", "csv"],
        &["verify", "--case", "example-4.2", "--pairs", "10000", "--seed", "42"],
    ];
    let mut ok = true;
    let mut sizes = Vec::new();
    for args in runs {
        let a = run_cli(args)?;
        let b = run_cli(args)?;
        ok &= !a.is_empty() && a == b;
        sizes.push(format!("{} {}: {} bytes", args[0], args[2], a.len()));
    }
    Ok((ok, format!("identical reports ({})", sizes.join("; "))))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("kernel series oracle", kernel_oracle),
        ("green-mean identity", green_mean_identity),
        ("representation fidelity", representation_fidelity),
        ("PDE verification", pde_verification),
        ("constants at K = 1", unit_constants),
        ("quartic-bump certificate", quartic_bump_certificate),
        ("Lipschitz containment", containment),
        ("power-stretch failure mode", power_stretch_failure),
        ("derivative bounds", derivative_bounds),
        ("boundary Jacobian sandwich", jacobian_sandwich_check),
        ("Heinz inequality", heinz),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {title}: {detail} [{:.1} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
