//! Quasiconformality and Lipschitz diagnostics of a solution: dilatation
//! scans, seeded bi-Lipschitz pair scans, the boundary Jacobian sandwich and
//! the Heinz-type lower bound.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::boundary_derivative_bound;
use crate::error::{Error, Result};
use crate::fields::CaseDefinition;
use crate::kernels::{ComplexValue, DiskPoint};
use crate::solver::{
    g1_wirtinger_boundary, g2_wirtinger_boundary, numeric_wirtinger, poisson_extension_wirtinger,
    solve, QuadratureSpec, WirtingerPair, INTERIOR_LIMIT,
};

/// Finite-difference step used for solver-backed derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Polar grid dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for GridDims {
    fn default() -> Self {
        Self {
            n_r: 128,
            n_theta: 256,
        }
    }
}

impl GridDims {
    /// Points `r_i e^{iθ_j}` with `r_i = r_max·i/n_r`, `i = 1..=n_r`, and
    /// `θ_j = 2πj/n_theta`, in row-major (radius, angle) order.
    pub fn points(&self, r_max: f64) -> Vec<ComplexValue> {
        (1..=self.n_r)
            .flat_map(|i| {
                let r = r_max * i as f64 / self.n_r as f64;
                (0..self.n_theta)
                    .map(move |j| Complex64::from_polar(r, TAU * j as f64 / self.n_theta as f64))
            })
            .collect()
    }
}

/// Largest radius of solver-backed scans; leaves room for the difference
/// stencil inside the interior limit.
pub fn solver_scan_radius() -> f64 {
    INTERIOR_LIMIT - 2.0 * DEFAULT_FD_STEP
}

/// Outcome of a dilatation scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationReport {
    /// `sup ‖D_f‖/λ(D_f)` over the non-degenerate grid points.
    pub k_sup: f64,
    /// Location of `k_sup`; lies on the circle when an oracle scan reaches it.
    pub arg_sup: ComplexValue,
    pub grid: GridDims,
    /// `sup |f_z̄|/|f_z|`.
    pub beltrami_sup: f64,
    /// Grid points with `λ(D_f) = 0`, excluded from the sup.
    pub degenerate_points: Vec<ComplexValue>,
    /// Whether closed-form derivatives were used.
    pub from_oracle: bool,
}

fn pick_max(values: &[(f64, usize)]) -> Option<(f64, usize)> {
    // strict comparison keeps the lowest index on ties
    values
        .iter()
        .copied()
        .fold(None, |acc, x| match acc {
            Some(a) if x.0 <= a.0 => Some(a),
            _ => Some(x),
        })
}

/// Derivatives of a case at an interior point: closed form when available,
/// otherwise finite differences of the solver.
pub fn case_wirtinger(case: &CaseDefinition, z: ComplexValue, q: &QuadratureSpec) -> Result<WirtingerPair> {
    match &case.oracle {
        Some(o) => Ok(o.wirtinger(z)),
        None => {
            let err = RefCell::new(None);
            let w = numeric_wirtinger(
                |p| match DiskPoint::new(p).and_then(|p| solve(case, p, q)) {
                    Ok(s) => s.value,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        Complex64::new(f64::NAN, f64::NAN)
                    }
                },
                DiskPoint::new(z)?,
                DEFAULT_FD_STEP,
            );
            // the closure above cannot return early; surface its first error
            match err.into_inner() {
                Some(e) => Err(e),
                None => w,
            }
        }
    }
}

/// Evaluates the case: closed form when available, otherwise the solver.
pub fn case_value(case: &CaseDefinition, z: ComplexValue, q: &QuadratureSpec) -> Result<ComplexValue> {
    match &case.oracle {
        Some(o) => Ok(o.evaluate(z)),
        None => Ok(solve(case, DiskPoint::new(z)?, q)?.value),
    }
}

/// `sup ‖D_f‖/λ(D_f)` over a polar grid. Oracle scans reach `r = 1`;
/// solver-backed scans stop at [`solver_scan_radius`].
pub fn dilatation_scan(
    case: &CaseDefinition,
    grid: GridDims,
    q: &QuadratureSpec,
) -> Result<DilatationReport> {
    if grid.n_r == 0 || grid.n_theta == 0 {
        return Err(Error::Domain("empty dilatation grid".into()));
    }
    let from_oracle = case.oracle.is_some();
    let r_max = if from_oracle { 1.0 } else { solver_scan_radius() };
    let points = grid.points(r_max);
    let derivs: Vec<WirtingerPair> = points
        .par_iter()
        .map(|&z| case_wirtinger(case, z, q))
        .collect::<Result<_>>()?;
    let mut degenerate_points = Vec::new();
    let mut ks = Vec::with_capacity(points.len());
    let mut mus = Vec::with_capacity(points.len());
    for (i, (w, z)) in derivs.iter().zip(&points).enumerate() {
        let lambda = w.lambda();
        if lambda == 0.0 {
            degenerate_points.push(*z);
            continue;
        }
        ks.push((w.norm() / lambda, i));
        mus.push((w.d_zbar.norm() / w.d_z.norm(), i));
    }
    let (k_sup, idx) = pick_max(&ks).ok_or_else(|| {
        Error::Domain("every grid point is degenerate (lambda = 0)".into())
    })?;
    let (beltrami_sup, _) = pick_max(&mus).expect("non-empty with ks");
    Ok(DilatationReport {
        k_sup,
        arg_sup: points[idx],
        grid,
        beltrami_sup,
        degenerate_points,
        from_oracle,
    })
}

/// Sampling plan of a Lipschitz scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzOptions {
    pub n_pairs: usize,
    pub seed: u64,
    /// Radius of the sampling disk.
    pub radius: f64,
    /// Share of near-diagonal pairs.
    pub near_fraction: f64,
    pub min_separation: f64,
    pub max_separation: f64,
}

impl LipschitzOptions {
    pub fn new(n_pairs: usize, seed: u64) -> Self {
        Self {
            n_pairs,
            seed,
            radius: 1.0 - 1e-3,
            near_fraction: 0.3,
            min_separation: 1e-6,
            max_separation: 1e-2,
        }
    }

    /// Restricts sampling to the disk of radius `radius`.
    pub fn near_origin(mut self, radius: f64) -> Self {
        self.radius = radius;
        self.max_separation = self.max_separation.min(0.5 * radius);
        self.min_separation = self.min_separation.min(0.1 * self.max_separation);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_pairs < 1000 {
            return Err(Error::Domain(format!(
                "n_pairs = {} must be at least 1000",
                self.n_pairs
            )));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0 - 1e-3) {
            return Err(Error::Domain(format!("sampling radius {} out of range", self.radius)));
        }
        if !(0.0..=1.0).contains(&self.near_fraction)
            || !(self.min_separation > 0.0 && self.min_separation <= self.max_separation)
            || self.max_separation >= self.radius
        {
            return Err(Error::Domain("inconsistent pair-sampling options".into()));
        }
        Ok(())
    }
}

/// Outcome of a seeded Lipschitz scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub argmin_pair: (ComplexValue, ComplexValue),
    pub argmax_pair: (ComplexValue, ComplexValue),
    pub n_pairs: usize,
    pub seed: u64,
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> ComplexValue {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

/// Deterministic pair sample: the first `(1 - near_fraction)·n` pairs are
/// independent uniform points, the rest are near-diagonal with log-uniform
/// separation.
pub fn sample_pairs(opts: &LipschitzOptions) -> Vec<(ComplexValue, ComplexValue)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n_near = (opts.near_fraction * opts.n_pairs as f64).round() as usize;
    let n_uniform = opts.n_pairs - n_near;
    let mut pairs = Vec::with_capacity(opts.n_pairs);
    while pairs.len() < n_uniform {
        let a = uniform_in_disk(&mut rng, opts.radius);
        let b = uniform_in_disk(&mut rng, opts.radius);
        if (a - b).norm() > 0.0 {
            pairs.push((a, b));
        }
    }
    let (lo, hi) = (opts.min_separation.ln(), opts.max_separation.ln());
    for _ in 0..n_near {
        let d = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let a = uniform_in_disk(&mut rng, opts.radius - d);
        let b = a + Complex64::from_polar(d, TAU * rng.random::<f64>());
        pairs.push((a, b));
    }
    pairs
}

/// Ratios `|f(z1) - f(z2)| / |z1 - z2|` for the sampled pairs.
pub fn pair_ratios(
    case: &CaseDefinition,
    pairs: &[(ComplexValue, ComplexValue)],
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let fa = case_value(case, a, q)?;
            let fb = case_value(case, b, q)?;
            Ok((fa - fb).norm() / (a - b).norm())
        })
        .collect()
}

/// Scan report together with every ratio (for histograms).
pub fn lipschitz_scan_detailed(
    case: &CaseDefinition,
    opts: &LipschitzOptions,
    q: &QuadratureSpec,
) -> Result<(LipschitzReport, Vec<f64>)> {
    opts.validate()?;
    let pairs = sample_pairs(opts);
    let ratios = pair_ratios(case, &pairs, q)?;
    let mut imin = 0;
    let mut imax = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r < ratios[imin] {
            imin = i;
        }
        if r > ratios[imax] {
            imax = i;
        }
    }
    let report = LipschitzReport {
        min_ratio: ratios[imin],
        max_ratio: ratios[imax],
        argmin_pair: pairs[imin],
        argmax_pair: pairs[imax],
        n_pairs: opts.n_pairs,
        seed: opts.seed,
    };
    Ok((report, ratios))
}

/// Seeded scan with the default sampling plan.
pub fn lipschitz_scan(
    case: &CaseDefinition,
    n_pairs: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<LipschitzReport> {
    Ok(lipschitz_scan_detailed(case, &LipschitzOptions::new(n_pairs, seed), q)?.0)
}

/// Minimum ratio among pairs with `z1` on the circle `|z| = r` and `z2` in
/// the disk `|z| < r`, for each radius in `radii`.
pub fn origin_decay_profile(
    case: &CaseDefinition,
    radii: &[f64],
    pairs_per_radius: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r <= INTERIOR_LIMIT) {
                return Err(Error::Domain(format!("profile radius {r} out of range")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<_> = (0..pairs_per_radius)
                .map(|_| {
                    let a = Complex64::from_polar(r, TAU * rng.random::<f64>());
                    let mut b = uniform_in_disk(&mut rng, r);
                    while b == a {
                        b = uniform_in_disk(&mut rng, r);
                    }
                    (a, b)
                })
                .collect();
            let ratios = pair_ratios(case, &pairs, q)?;
            Ok((r, ratios.into_iter().fold(f64::INFINITY, f64::min)))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy, sxx, sxy) = points.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(x, y)| {
        let (lx, ly) = (x.ln(), y.ln());
        (acc.0 + lx, acc.1 + ly, acc.2 + lx * lx, acc.3 + lx * ly)
    });
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Boundary Jacobian and its two-sided bound at one angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianSandwichReport {
    pub theta: f64,
    pub j_boundary: f64,
    pub lower: f64,
    pub upper: f64,
    pub eta_prime: f64,
    /// `(1/2π) ∫ |f(e^{it}) - f(e^{iθ})|² / |e^{it} - e^{iθ}|² dt`.
    pub chord_integral: f64,
    /// False when the boundary trace leaves the circle, so the bound's
    /// hypotheses fail.
    pub valid: bool,
}

/// Nodes of the singular boundary integral.
pub const SANDWICH_NODES: usize = 4096;

/// Step of the difference quotient for `η'`.
pub const ETA_STEP: f64 = 1e-4;

/// `J_f(e^{iθ})` against `η'(θ)[I ∓ μ8]`, with `η` the unwrapped argument of
/// the boundary trace and `I` the chord integral.
pub fn jacobian_sandwich(
    case: &CaseDefinition,
    theta: f64,
    q: &QuadratureSpec,
) -> Result<JacobianSandwichReport> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("angle {theta} is not finite")));
    }
    let trace = |t: f64| case.fstar.eval(t);
    let base = trace(theta);
    if base.norm() == 0.0 {
        return Err(Error::NonDiffeomorphic { theta, eta_prime: 0.0 });
    }
    // arguments relative to f(e^{iθ}) stay near 0, so no 2π jumps occur
    let eta = |t: f64| (trace(t) / base).arg();
    let h = ETA_STEP;
    let eta_prime =
        (-eta(theta + 2.0 * h) + 8.0 * eta(theta + h) - 8.0 * eta(theta - h) + eta(theta - 2.0 * h))
            / (12.0 * h);
    if !(eta_prime > 0.0) {
        return Err(Error::NonDiffeomorphic { theta, eta_prime });
    }

    let n = SANDWICH_NODES;
    let mut sum = eta_prime * eta_prime;
    for j in 1..n {
        let t = theta + TAU * j as f64 / n as f64;
        let chord = 2.0 * (0.5 * (t - theta)).sin();
        sum += (trace(t) - base).norm_sqr() / (chord * chord);
    }
    let chord_integral = sum / n as f64;

    let d = match &case.oracle {
        Some(o) => o.wirtinger(Complex64::from_polar(1.0, theta)),
        None => boundary_wirtinger(case, theta, q)?,
    };
    let j_boundary = d.jacobian();
    let mu8 = boundary_derivative_bound(case.phi_norm, case.g_norm);
    let valid = (0..64).all(|j| (trace(TAU * j as f64 / 64.0).norm() - 1.0).abs() < 1e-9);
    Ok(JacobianSandwichReport {
        theta,
        j_boundary,
        lower: eta_prime * (chord_integral - mu8),
        upper: eta_prime * (chord_integral + mu8),
        eta_prime,
        chord_integral,
        valid,
    })
}

/// `D_f(e^{iθ})` from the boundary formulas of the three parts.
pub fn boundary_wirtinger(case: &CaseDefinition, theta: f64, q: &QuadratureSpec) -> Result<WirtingerPair> {
    let e = Complex64::from_polar(1.0, theta);
    let mut d_z = Complex64::new(0.0, 0.0);
    let mut d_zbar = Complex64::new(0.0, 0.0);
    for (k, c) in case.fstar.fourier_modes() {
        if k > 0 {
            d_z += c * k as f64 * e.powi(k as i32 - 1);
        } else if k < 0 {
            d_zbar += c * (-k) as f64 * e.conj().powi((-k) as i32 - 1);
        }
    }
    let p = WirtingerPair::new(d_z, d_zbar);
    Ok(p + g1_wirtinger_boundary(&case.phi, theta, q)? - g2_wirtinger_boundary(&case.g, theta, q)?)
}

/// Both sides of the Heinz-type bound at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeinzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// For the disk automorphism `f(w) = (w - a)/(1 - ā w)`, which vanishes at
/// `a`: `lhs = |f_z|² + |f_z̄|²` at `z` and `rhs = (1-|a|)²/(π²(1+|a|)²)`.
pub fn heinz_check(a: DiskPoint, z: DiskPoint) -> HeinzCheck {
    let (av, zv) = (a.value(), z.value());
    let one_minus = 1.0 - av.norm_sqr();
    let denom = (1.0 - av.conj() * zv).norm_sqr();
    // f_z̄ = 0 for a holomorphic map
    let lhs = one_minus * one_minus / (denom * denom);
    let ma = a.modulus();
    let rhs = ((1.0 - ma) / (PI * (1.0 + ma))).powi(2);
    HeinzCheck {
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

/// `inf |∂_z P[f*]|` over the grid `r_i = (1 - 10⁻³)·i/n_r`, `i = 0..n_r`.
pub fn analytic_inf_check(case: &CaseDefinition, grid: GridDims) -> Result<f64> {
    if grid.n_r == 0 || grid.n_theta == 0 {
        return Err(Error::Domain("empty grid".into()));
    }
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(grid.points(INTERIOR_LIMIT));
    let mut best = (f64::INFINITY, points[0]);
    for z in points {
        let v = poisson_extension_wirtinger(&case.fstar, DiskPoint::new(z)?).d_z.norm();
        if v < best.0 {
            best = (v, z);
        }
    }
    if !(best.0 > 0.0) {
        return Err(Error::NotHomeomorphic {
            inf_dz: best.0,
            re: best.1.re,
            im: best.1.im,
        });
    }
    Ok(best.0)
}
