use std::f64::consts::{SQRT_2, TAU};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use biharm_core::analysis::{
    analytic_inf_check, dilatation_scan, heinz_check, jacobian_sandwich, lipschitz_scan_detailed,
    GridDims, LipschitzOptions,
};
use biharm_core::constants::{
    compute_constants, h_max, sqrt_1_plus_pi2_over_6, sqrt_pi2_over_3_minus_1, BiLipschitzConstants,
};
use biharm_core::kernels::{log_ratio, moment_series, poisson};
use biharm_core::solver::quadrature::periodic_mean;
use biharm_core::solver::{
    g1_apply, g1_wirtinger, g1_wirtinger_boundary, g2_apply, g2_wirtinger, g2_wirtinger_boundary,
    green_mean, laplacian_field, numeric_wirtinger, solve as solve_at, QuadratureSpec, SolutionSample,
    INTERIOR_LIMIT,
};
use biharm_core::{DiskPoint, Error};

use crate::report::{checks_table, emit, fmt_f64, json_bytes, Check, ReportDocument, Table};
use crate::{CliError, ConstantsArgs, Format, Grid, Output, ScanArgs, SelftestArgs, SolveArgs, VerifyArgs};

type CmdResult = Result<bool, CliError>;

fn grid_dims(g: Grid) -> GridDims {
    GridDims {
        n_r: g.n_r,
        n_theta: g.n_theta,
    }
}

fn point(z: Complex64) -> DiskPoint {
    DiskPoint::new(z).expect("grid points lie inside the disk")
}

fn finish(doc: ReportDocument, output: &Output, table: Option<Table>) -> CmdResult {
    let bytes = match (output.format, table) {
        (Format::Csv, Some(t)) => t.to_bytes().map_err(CliError::failed)?,
        (Format::Csv, None) => checks_table(&doc.checks).to_bytes().map_err(CliError::failed)?,
        (Format::Json, _) => json_bytes(&doc).map_err(CliError::failed)?,
    };
    emit(output.out.as_deref(), &bytes).map_err(CliError::failed)?;
    Ok(doc.passed)
}

fn emit_table(path: Option<&Path>, table: &Table) -> Result<(), CliError> {
    if let Some(p) = path {
        emit(Some(p), &table.to_bytes().map_err(CliError::failed)?).map_err(CliError::failed)?;
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

pub fn constants(a: &ConstantsArgs) -> CmdResult {
    if !(a.k >= 1.0 && a.k.is_finite()) {
        return Err(CliError::Usage(format!("--k must be finite and >= 1, got {}", a.k)));
    }
    if !(a.phi_norm >= 0.0 && a.g_norm >= 0.0) {
        return Err(CliError::Usage("norms must be >= 0".into()));
    }
    let c = compute_constants(a.k, a.phi_norm, a.g_norm).map_err(CliError::usage)?;
    let certified = a.g_norm <= c.a1 && a.phi_norm <= c.a2;
    let checks = constant_invariants(&c);
    let table_value = serde_json::to_value(c).map_err(CliError::failed)?;
    let mut table = Table::new(&["name", "value"]);
    if let Value::Object(map) = &table_value {
        for (k, v) in map {
            let cell = v.as_f64().map(fmt_f64).unwrap_or_default();
            table.push(vec![k.clone(), cell]);
        }
    }
    table.push(vec!["certified".into(), certified.to_string()]);
    let doc = ReportDocument::new(
        "constants",
        json!({"K": a.k, "phi_norm": a.phi_norm, "g_norm": a.g_norm}),
        json!({"constants": table_value, "certified": certified}),
        checks,
    );
    finish(doc, &a.output, Some(table))
}

fn constant_invariants(c: &BiLipschitzConstants) -> Vec<Check> {
    vec![
        Check::at_least("Q_at_least_1", c.q, 1.0),
        Check::at_least("C2_upper_at_least_1", c.c2_upper, 1.0),
        Check::at_least("N1_nonnegative", c.n1, 0.0),
        Check::at_least("N2_nonnegative", c.n2, 0.0),
    ]
}

struct FieldRow {
    r: f64,
    theta: f64,
    sample: Result<SolutionSample, Error>,
    laplacian: Option<Result<Complex64, Error>>,
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    let case = a.case.load()?;
    check_positive("--tol", a.tol)?;
    if !(a.r_max > 0.0 && a.r_max <= INTERIOR_LIMIT) {
        return Err(CliError::Usage(format!("--r-max must lie in (0, {INTERIOR_LIMIT}]")));
    }
    let q = QuadratureSpec::default();
    let dims = grid_dims(a.grid);
    let rows: Vec<FieldRow> = dims
        .points(a.r_max)
        .into_par_iter()
        .enumerate()
        .map(|(idx, z)| {
            let r = a.r_max * (idx / dims.n_theta + 1) as f64 / dims.n_r as f64;
            let theta = TAU * (idx % dims.n_theta) as f64 / dims.n_theta as f64;
            let p = point(z);
            FieldRow {
                r,
                theta,
                sample: solve_at(&case, p, &q),
                laplacian: a.laplacian.then(|| laplacian_field(&case, p, &q)),
            }
        })
        .collect();

    let oracle = case.oracle.as_ref();
    let mut header = vec![
        "r", "theta", "re_f", "im_f", "re_poisson", "im_poisson", "re_g1", "im_g1", "re_g2", "im_g2",
    ];
    if a.laplacian {
        header.extend(["re_laplacian", "im_laplacian"]);
    }
    if oracle.is_some() {
        header.push("abs_err_vs_oracle");
        if a.laplacian {
            header.push("laplacian_err_vs_oracle");
        }
    }
    let mut table = Table::new(&header);
    let mut failures = Vec::new();
    let mut max_err = 0.0f64;
    let mut max_lap_err = 0.0f64;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    for row in &rows {
        let z = Complex64::from_polar(row.r, row.theta);
        let mut cells = vec![fmt_f64(row.r), fmt_f64(row.theta)];
        let mut push = |c: Complex64| cells.extend([fmt_f64(c.re), fmt_f64(c.im)]);
        let value = match &row.sample {
            Ok(s) => {
                push(s.value);
                push(s.parts.poisson_part);
                push(s.parts.g1_part);
                push(s.parts.g2_part);
                s.value
            }
            Err(e) => {
                (0..4).for_each(|_| push(nan));
                failures.push(json!({"r": row.r, "theta": row.theta, "error": e.to_string()}));
                nan
            }
        };
        let lap = match &row.laplacian {
            Some(Ok(l)) => {
                push(*l);
                Some(*l)
            }
            Some(Err(e)) => {
                push(nan);
                failures.push(json!({"r": row.r, "theta": row.theta, "error": e.to_string()}));
                None
            }
            None => None,
        };
        if let Some(o) = oracle {
            let err = (value - o.evaluate(z)).norm();
            max_err = max_err.max(if err.is_nan() { f64::INFINITY } else { err });
            cells.push(fmt_f64(err));
            if a.laplacian {
                let lerr = lap.map_or(f64::NAN, |l| (l - o.laplacian(z)).norm());
                max_lap_err = max_lap_err.max(if lerr.is_nan() { f64::INFINITY } else { lerr });
                cells.push(fmt_f64(lerr));
            }
        }
        table.push(cells);
    }

    let mut checks = vec![Check::at_most("quadrature_failures", failures.len() as f64, 0.0)];
    if oracle.is_some() {
        checks.push(Check::at_most("representation_vs_oracle", max_err, a.tol));
        if a.laplacian {
            checks.push(Check::at_most("laplacian_vs_oracle", max_lap_err, a.tol));
        }
    }
    let doc = ReportDocument::new(
        "solve",
        json!({"case": a.case.describe(), "grid": a.grid.to_string(), "r_max": a.r_max,
               "laplacian": a.laplacian, "tol": a.tol}),
        json!({"points": rows.len(), "has_oracle": oracle.is_some(),
               "max_abs_err_vs_oracle": oracle.map(|_| max_err),
               "failures": failures}),
        checks,
    );
    if a.output.format == Format::Json {
        emit_table(a.field_out.as_deref(), &table)?;
    }
    finish(doc, &a.output, Some(table))
}

/// Kernel checks shared by `selftest` and `verify`.
fn kernel_checks(series_tol: f64) -> Vec<Check> {
    let zs = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::from_polar(0.7, std::f64::consts::FRAC_PI_4),
    ];
    let mut worst_series = 0.0f64;
    for alpha in [1.0, 2.0, 2.5, 3.0] {
        for &z in &zs {
            let quad = periodic_mean(2048, |t| (1.0 - z * Complex64::from_polar(1.0, t)).norm_sqr().powf(-alpha));
            let series = moment_series(point(z), alpha).unwrap_or(f64::NAN);
            worst_series = worst_series.max((quad - series).abs());
        }
    }
    let q = QuadratureSpec::default();
    let gm = |r: f64| (green_mean(DiskPoint::from_polar(r, 0.0).expect("inside"), &q) - (1.0 - r * r) / 4.0).abs();
    let mut worst_ring = 0.0f64;
    for i in 0..360 {
        let r = 0.45 + 0.1 * (i % 11) as f64 / 10.0;
        let w = Complex64::from_polar(r, TAU * i as f64 / 360.0);
        let v = log_ratio(w).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let direct = (1.0 - w).ln() / w;
        let series = -(1..200).map(|n| w.powi(n - 1) / n as f64).sum::<Complex64>();
        worst_ring = worst_ring.max((v - direct).norm()).max((v - series).norm());
    }
    let z = DiskPoint::from_polar(0.7, 0.0).expect("inside");
    let poisson_mass = periodic_mean(512, |t| poisson(z, t));
    vec![
        Check::at_most("moment_series_vs_quadrature", worst_series, series_tol),
        Check::at_most("green_mean_interior", gm(0.0).max(gm(0.6)), 1e-9),
        Check::at_most("green_mean_near_boundary", gm(0.99), 1e-7),
        Check::at_most("log_ratio_ring", worst_ring, 1e-12),
        Check::at_most("poisson_unit_mass", (poisson_mass - 1.0).abs(), 1e-12),
    ]
}

pub fn selftest(a: &SelftestArgs) -> CmdResult {
    check_positive("--tol", a.tol)?;
    let checks = kernel_checks(a.tol);
    let doc = ReportDocument::new("selftest", json!({"tol": a.tol}), json!({}), checks);
    finish(doc, &a.output, None)
}

/// Worst value of `f` over points, propagating the first error.
fn worst_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64, Error> + Sync + Send) -> Result<f64, Error> {
    let values: Vec<f64> = items.par_iter().map(f).collect::<Result<_, _>>()?;
    Ok(values.into_iter().fold(f64::NEG_INFINITY, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) }))
}

/// A check whose computation failed.
fn errored(name: &str, e: &Error) -> Check {
    Check::at_most(name, f64::INFINITY, 0.0).with_note(e.to_string())
}

fn check_or_error(name: &str, r: Result<f64, Error>, threshold: f64) -> Check {
    match r {
        Ok(v) => Check::at_most(name, v, threshold),
        Err(e) => errored(name, &e),
    }
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let case = a.case.load()?;
    check_positive("--tol", a.tol)?;
    if a.pairs < 1000 {
        return Err(CliError::Usage(format!("--pairs must be at least 1000, got {}", a.pairs)));
    }
    let q = QuadratureSpec::default();
    let dims = grid_dims(a.grid);
    let mut checks = kernel_checks(1e-10);
    let mut results = serde_json::Map::new();

    // representation and Laplacian
    let rep_points = dims.points(0.95);
    let int_points = dims.points(INTERIOR_LIMIT);
    if let Some(o) = &case.oracle {
        let r = worst_over(&rep_points, |&z| Ok((solve_at(&case, point(z), &q)?.value - o.evaluate(z)).norm()));
        checks.push(check_or_error("representation_vs_oracle", r, a.tol));
        let edge: Vec<Complex64> = (0..64).map(|j| Complex64::from_polar(0.999, TAU * j as f64 / 64.0)).collect();
        let r = worst_over(&edge, |&z| Ok((laplacian_field(&case, point(z), &q)? - o.laplacian(z)).norm()));
        checks.push(check_or_error("laplacian_near_boundary", r, 2e-3));
    }
    let lap_bound = case.phi_norm + case.g_norm / 4.0 + 1e-6;
    let r = worst_over(&int_points, |&z| Ok(laplacian_field(&case, point(z), &q)?.norm()));
    checks.push(check_or_error("laplacian_global_bound", r, lap_bound));

    // derivative bounds on the grid and on the circle
    let (s3, s6, hm) = (sqrt_pi2_over_3_minus_1(), sqrt_1_plus_pi2_over_6(), h_max());
    let largest = |w: biharm_core::solver::WirtingerPair| w.d_z.norm().max(w.d_zbar.norm());
    let r = worst_over(&int_points, |&z| {
        let bound = case.phi_norm / 4.0 * (hm + s3 * z.norm());
        Ok(largest(g1_wirtinger(&case.phi, point(z), &q)?) - bound)
    });
    checks.push(check_or_error("g1_interior_bound_excess", r, 1e-9));
    let r = worst_over(&int_points, |&z| {
        let m = z.norm();
        let bound = case.g_norm * (1.0 / 16.0 + (1.0 - m * m).sqrt() / 60.0 + SQRT_2 * s6 * m / 32.0);
        Ok(largest(g2_wirtinger(&case.g, point(z), &q)?) - bound)
    });
    checks.push(check_or_error("g2_interior_bound_excess", r, 1e-8));
    let angles: Vec<f64> = (0..64).map(|j| TAU * j as f64 / 64.0).collect();
    let r = worst_over(&angles, |&t| Ok(largest(g1_wirtinger_boundary(&case.phi, t, &q)?) - case.phi_norm / 4.0 * s3));
    checks.push(check_or_error("g1_boundary_bound_excess", r, 1e-8));
    let b2 = case.g_norm / 32.0 * (1.0 + SQRT_2 * s6);
    let r = worst_over(&angles, |&t| Ok(largest(g2_wirtinger_boundary(&case.g, t, &q)?) - b2));
    checks.push(check_or_error("g2_boundary_bound_excess", r, 1e-8));

    // analytic derivatives against difference quotients
    let probes: Vec<Complex64> = (0..8).map(|j| Complex64::from_polar(0.1 + 0.1 * j as f64, 0.7 * j as f64 + 0.2)).collect();
    let r = worst_over(&probes, |&z| {
        let p = point(z);
        let fd1 = numeric_wirtinger(|x| g1_apply(&case.phi, point(x), &q).unwrap_or(Complex64::new(f64::NAN, 0.0)), p, 1e-5)?;
        let an1 = g1_wirtinger(&case.phi, p, &q)?;
        let fd2 = numeric_wirtinger(|x| g2_apply(&case.g, point(x), &q).unwrap_or(Complex64::new(f64::NAN, 0.0)), p, 1e-5)?;
        let an2 = g2_wirtinger(&case.g, p, &q)?;
        let d1 = (fd1.d_z - an1.d_z).norm().max((fd1.d_zbar - an1.d_zbar).norm());
        let d2 = (fd2.d_z - an2.d_z).norm().max((fd2.d_zbar - an2.d_zbar).norm());
        Ok(d1.max(d2) / (1.0 + case.phi_norm + case.g_norm))
    });
    checks.push(check_or_error("derivative_consistency", r, 1e-6));

    // homeomorphism of the harmonic part
    match analytic_inf_check(&case, dims) {
        Ok(v) => checks.push(Check::at_least("harmonic_part_inf_dz", v, f64::MIN_POSITIVE)),
        Err(e) => checks.push(errored("harmonic_part_inf_dz", &e)),
    }

    // dilatation
    let k_used = match dilatation_scan(&case, dims, &q) {
        Ok(rep) => {
            let k_sup = rep.k_sup;
            if let Some(k) = case.exact_k {
                let c = if rep.from_oracle {
                    Check::at_most("dilatation_vs_exact_K", (k_sup - k).abs(), 1e-6)
                } else {
                    Check::at_most("dilatation_below_exact_K", k_sup - k, 1e-6)
                };
                checks.push(c);
            }
            results.insert("dilatation".into(), serde_json::to_value(&rep).map_err(CliError::failed)?);
            Some(case.exact_k.unwrap_or(k_sup))
        }
        Err(e) => {
            checks.push(errored("dilatation_scan", &e));
            case.exact_k
        }
    };
    results.insert(
        "K_source".into(),
        json!(if case.exact_k.is_some() { "exact" } else { "measured" }),
    );

    // boundary Jacobian sandwich
    let sandwich: Result<Vec<_>, Error> = (0..16)
        .map(|j| jacobian_sandwich(&case, TAU * j as f64 / 16.0, &q))
        .collect();
    match sandwich {
        Ok(s) if s.iter().all(|r| r.valid) => {
            let excess = s
                .iter()
                .map(|r| (r.lower - r.j_boundary).max(r.j_boundary - r.upper))
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::at_most("boundary_jacobian_sandwich_excess", excess, 1e-9));
            results.insert("sandwich".into(), serde_json::to_value(&s).map_err(CliError::failed)?);
        }
        Ok(_) => results.insert("sandwich".into(), json!("skipped: boundary trace leaves the circle")).map_or((), |_| ()),
        Err(e) => checks.push(errored("boundary_jacobian_sandwich_excess", &e)),
    }

    // Heinz-type lower bound
    let mut heinz = f64::INFINITY;
    for i in 0..20 {
        let av = DiskPoint::from_polar(0.95 * i as f64 / 20.0, 0.3 * i as f64).expect("inside");
        for j in 0..20 {
            let zv = DiskPoint::from_polar(0.95 * j as f64 / 20.0, 1.7 * j as f64).expect("inside");
            let h = heinz_check(av, zv);
            heinz = heinz.min(h.lhs - h.rhs);
        }
    }
    checks.push(Check::at_least("heinz_margin", heinz, f64::MIN_POSITIVE));

    // bi-Lipschitz containment
    if let Some(k) = k_used {
        let constants = compute_constants(k, case.phi_norm, case.g_norm).map_err(CliError::failed)?;
        let certified = case.g_norm <= constants.a1 && case.phi_norm <= constants.a2;
        let opts = LipschitzOptions::new(a.pairs, a.seed);
        match lipschitz_scan_detailed(&case, &opts, &q) {
            Ok((scan, _)) => {
                checks.push(Check::at_most("lipschitz_upper_containment", scan.max_ratio, constants.c2_upper + 1e-9));
                if constants.c1 > 0.0 {
                    checks.push(Check::at_least("co_lipschitz_containment", scan.min_ratio, constants.c1 - 1e-9));
                } else {
                    // the bound is void, so a vanishing ratio is the predicted outcome
                    let near = lipschitz_scan_detailed(&case, &opts.near_origin(0.2), &q);
                    let min_ratio = near.map(|(r, _)| r.min_ratio.min(scan.min_ratio)).unwrap_or(scan.min_ratio);
                    results.insert("near_origin_min_ratio".into(), json!(min_ratio));
                    checks.push(
                        Check::at_least("co_lipschitz_certified", constants.c1, f64::MIN_POSITIVE)
                            .with_note(format!("C1 <= 0, co-Lipschitz not certified; minimum ratio {min_ratio:e}"))
                            .expected_to_fail(),
                    );
                }
                results.insert("lipschitz".into(), serde_json::to_value(&scan).map_err(CliError::failed)?);
            }
            Err(e) => checks.push(errored("lipschitz_scan", &e)),
        }
        results.insert("constants".into(), serde_json::to_value(constants).map_err(CliError::failed)?);
        results.insert("certified".into(), json!(certified));
    }

    let doc = ReportDocument::new(
        "verify",
        json!({"case": a.case.describe(), "name": case.name, "grid": a.grid.to_string(),
               "pairs": a.pairs, "seed": a.seed, "tol": a.tol,
               "phi_norm": case.phi_norm, "g_norm": case.g_norm, "exact_K": case.exact_k}),
        Value::Object(results),
        checks,
    );
    finish(doc, &a.output, None)
}

/// Counts of `log10(ratio)` in bins of width `w` centred at multiples of `w`.
fn histogram(ratios: &[f64], w: f64) -> Table {
    let idx: Vec<i64> = ratios.iter().map(|r| (r.log10() / w).round() as i64).collect();
    let mut t = Table::new(&["log10_ratio_lo", "log10_ratio_hi", "ratio_center", "count"]);
    let (Some(&lo), Some(&hi)) = (idx.iter().min(), idx.iter().max()) else {
        return t;
    };
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for i in &idx {
        counts[(i - lo) as usize] += 1;
    }
    for (k, c) in counts.into_iter().enumerate() {
        let i = lo + k as i64;
        let centre = i as f64 * w;
        // edges from integers so neighbouring bins share them exactly
        t.push(vec![
            fmt_f64((2 * i - 1) as f64 * 0.5 * w),
            fmt_f64((2 * i + 1) as f64 * 0.5 * w),
            fmt_f64(10f64.powf(centre)),
            c.to_string(),
        ]);
    }
    t
}

pub fn scan(a: &ScanArgs) -> CmdResult {
    let case = a.case.load()?;
    if a.pairs < 1000 {
        return Err(CliError::Usage(format!("--pairs must be at least 1000, got {}", a.pairs)));
    }
    check_positive("--bin-width", a.bin_width)?;
    let mut opts = LipschitzOptions::new(a.pairs, a.seed);
    if let Some(r) = a.near_origin {
        if !(r > 0.0 && r <= INTERIOR_LIMIT) {
            return Err(CliError::Usage(format!("--near-origin must lie in (0, {INTERIOR_LIMIT}]")));
        }
        opts = opts.near_origin(r);
    }
    let (report, ratios) = lipschitz_scan_detailed(&case, &opts, &QuadratureSpec::default())
        .map_err(CliError::failed)?;
    let table = histogram(&ratios, a.bin_width);
    let non_finite = ratios.iter().filter(|r| !(r.is_finite() && **r > 0.0)).count();
    let checks = vec![Check::at_most("non_finite_or_zero_ratios", non_finite as f64, 0.0)];
    let doc = ReportDocument::new(
        "scan",
        json!({"case": a.case.describe(), "pairs": a.pairs, "seed": a.seed,
               "near_origin": a.near_origin, "bin_width": a.bin_width}),
        json!({"report": report, "options": opts, "histogram_bins": table.rows.len()}),
        checks,
    );
    if a.output.format == Format::Json {
        emit_table(a.hist_out.as_deref(), &table)?;
    }
    finish(doc, &a.output, Some(table))
}
