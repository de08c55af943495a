//! Evaluation of `f = P[f*] + G1[φ] - G2[g]`, its Laplacian, and the
//! Wirtinger derivatives of the two potentials inside the disk and on the
//! circle.

pub mod quadrature;

use std::f64::consts::{FRAC_1_PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{BoundaryFunction, CaseDefinition, SourceFunction};
use crate::kernels::{
    green_from_parts, log_ratio_derivative_raw, log_ratio_derivative_split, log_ratio_raw,
    log_ratio_split, poisson_raw, ComplexValue, DiskPoint,
};
use quadrature::{
    circle_nodes, disk_angle_nodes, periodic_mean, BoundaryDiskRule, CPair, DiskNode, DiskRule,
    QuadValue, PANEL_ORDER,
};
pub use quadrature::QuadratureSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest modulus accepted by the interior operations.
pub const INTERIOR_LIMIT: f64 = 1.0 - 1e-3;

/// The pair `(f_z, f_z̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerPair {
    pub d_z: ComplexValue,
    pub d_zbar: ComplexValue,
}

impl WirtingerPair {
    pub fn new(d_z: ComplexValue, d_zbar: ComplexValue) -> Self {
        Self { d_z, d_zbar }
    }

    /// Operator norm `|f_z| + |f_z̄|`.
    pub fn norm(&self) -> f64 {
        self.d_z.norm() + self.d_zbar.norm()
    }

    /// Minimal stretch `||f_z| - |f_z̄||`.
    pub fn lambda(&self) -> f64 {
        (self.d_z.norm() - self.d_zbar.norm()).abs()
    }

    /// `|f_z|² - |f_z̄|²`.
    pub fn jacobian(&self) -> f64 {
        self.d_z.norm_sqr() - self.d_zbar.norm_sqr()
    }
}

impl std::ops::Sub for WirtingerPair {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.d_z - rhs.d_z, self.d_zbar - rhs.d_zbar)
    }
}

impl std::ops::Add for WirtingerPair {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.d_z + rhs.d_z, self.d_zbar + rhs.d_zbar)
    }
}

/// The three terms of the representation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionParts {
    pub poisson_part: ComplexValue,
    pub g1_part: ComplexValue,
    pub g2_part: ComplexValue,
}

/// `value = poisson_part + g1_part - g2_part`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub point: DiskPoint,
    pub value: ComplexValue,
    pub parts: SolutionParts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<ComplexValue>,
}

fn require_interior(z: DiskPoint) -> Result<()> {
    // slack absorbs rounding of points built from polar coordinates
    if z.modulus() > INTERIOR_LIMIT + 1e-12 {
        return Err(Error::Domain(format!(
            "|z| = {} exceeds the interior limit {INTERIOR_LIMIT}",
            z.modulus()
        )));
    }
    Ok(())
}

fn scale_of<T: QuadValue>(v: &T) -> f64 {
    v.magnitude().max(1.0)
}

fn diff<T: QuadValue>(a: T, b: T) -> f64 {
    let mut d = a;
    d += b * -1.0;
    d.magnitude()
}

/// Periodic mean `(1/2π)∫ f dθ` with node doubling until the embedded
/// half-rule agrees to `tol`.
fn circle_mean<T: QuadValue>(
    q: &QuadratureSpec,
    tol: f64,
    modulus: f64,
    bandwidth: usize,
    f: impl Fn(f64) -> T,
) -> Result<T> {
    let mut n = circle_nodes(q.n_theta, modulus, bandwidth);
    let mut last_change = f64::INFINITY;
    for _ in 0..=q.max_refine {
        let full = periodic_mean(n, &f);
        let half = periodic_mean(n / 2, |t| f(t));
        last_change = diff(full, half);
        if last_change <= tol * scale_of(&full) {
            return Ok(full);
        }
        n *= 2;
    }
    Err(Error::QuadratureBudget {
        tol,
        refinements: q.max_refine,
        change: last_change,
    })
}

/// `∫_𝔻 f dσ` about an interior point with angular doubling and one extra
/// radial level per refinement.
fn disk_integral<T: QuadValue>(
    q: &QuadratureSpec,
    z: ComplexValue,
    f: impl Fn(&DiskNode) -> T,
) -> Result<T> {
    let mut n = disk_angle_nodes(q.n_theta, z.norm());
    let mut panels = q.radial_panels();
    let tol = q.adaptive_tol;
    let mut last_change = f64::INFINITY;
    for _ in 0..=q.max_refine {
        let rule = DiskRule::new(n, panels, PANEL_ORDER);
        let (full, half) = rule.integrate_embedded(z, &f);
        last_change = diff(full, half);
        if last_change <= tol * scale_of(&full) {
            return Ok(full);
        }
        n *= 2;
        panels += 1;
    }
    Err(Error::QuadratureBudget {
        tol,
        refinements: q.max_refine,
        change: last_change,
    })
}

fn boundary_rule(q: &QuadratureSpec) -> BoundaryDiskRule {
    // rays from a boundary point shrink to zero length at both tangent
    // directions; the angular panels are graded there too
    BoundaryDiskRule::new(q.radial_panels() + 4, PANEL_ORDER)
}

/// Harmonic extension of `f*` by the periodic trapezoid rule.
pub fn poisson_extension(
    fstar: &BoundaryFunction,
    z: DiskPoint,
    q: &QuadratureSpec,
) -> Result<ComplexValue> {
    let zv = z.value();
    circle_mean(q, 0.1 * q.adaptive_tol, z.modulus(), fstar.bandwidth(), |t| {
        fstar.eval(t) * poisson_raw(zv, t)
    })
}

/// Harmonic extension by exact summation `Σ c_k z^k + Σ c_{-k} z̄^k`.
pub fn poisson_extension_exact(fstar: &BoundaryFunction, z: DiskPoint) -> ComplexValue {
    let zv = z.value();
    fstar
        .fourier_modes()
        .into_iter()
        .map(|(k, c)| {
            if k >= 0 {
                c * zv.powi(k as i32)
            } else {
                c * zv.conj().powi((-k) as i32)
            }
        })
        .sum()
}

/// Wirtinger derivatives of the harmonic extension of `f*`.
pub fn poisson_extension_wirtinger(fstar: &BoundaryFunction, z: DiskPoint) -> WirtingerPair {
    let zv = z.value();
    let mut d_z = ZERO;
    let mut d_zbar = ZERO;
    for (k, c) in fstar.fourier_modes() {
        if k > 0 {
            d_z += c * k as f64 * zv.powi(k as i32 - 1);
        } else if k < 0 {
            d_zbar += c * (-k) as f64 * zv.conj().powi((-k) as i32 - 1);
        }
    }
    WirtingerPair::new(d_z, d_zbar)
}

/// `1 + L(w) + L(w̄)` with `L(w) = log(1-w)/w`.
#[inline]
fn bracket(w: ComplexValue) -> f64 {
    1.0 + 2.0 * log_ratio_raw(w).re
}

/// `G1[φ](z)` by the periodic rule.
pub fn g1_apply(phi: &BoundaryFunction, z: DiskPoint, q: &QuadratureSpec) -> Result<ComplexValue> {
    let zv = z.value();
    let modes = phi.fourier_modes();
    if modes.is_empty() {
        return Ok(ZERO);
    }
    let mean = circle_mean(q, 0.1 * q.adaptive_tol, z.modulus(), phi.bandwidth(), |t| {
        let w = zv * Complex64::from_polar(1.0, -t);
        phi.eval(t) * bracket(w)
    })?;
    Ok(mean * (0.25 * (1.0 - zv.norm_sqr())))
}

/// `G1[φ](z)` from the Fourier coefficients of `φ`.
pub fn g1_apply_exact(phi: &BoundaryFunction, z: DiskPoint) -> ComplexValue {
    let zv = z.value();
    let mut acc = ZERO;
    for (k, c) in phi.fourier_modes() {
        acc -= match k {
            0 => c,
            k if k > 0 => c * zv.powi(k as i32) / (k as f64 + 1.0),
            k => c * zv.conj().powi((-k) as i32) / (1.0 - k as f64),
        };
    }
    acc * (0.25 * (1.0 - zv.norm_sqr()))
}

/// Interior Wirtinger derivatives of `G1[φ]` as `I1 + I2` and the mirror pair.
pub fn g1_wirtinger(
    phi: &BoundaryFunction,
    z: DiskPoint,
    q: &QuadratureSpec,
) -> Result<WirtingerPair> {
    let zv = z.value();
    if phi.fourier_modes().is_empty() {
        return Ok(WirtingerPair::new(ZERO, ZERO));
    }
    // (mean of e^{-iθ}L'(w)φ, mean of e^{iθ}L'(w̄)φ, mean of bracket·φ)
    let sums = circle_mean(q, 0.1 * q.adaptive_tol, z.modulus(), phi.bandwidth() + 1, |t| {
        let e = Complex64::from_polar(1.0, -t);
        let w = zv * e;
        let lp = log_ratio_derivative_raw(w);
        let p = phi.eval(t);
        Triple(e * lp * p, e.conj() * lp.conj() * p, p * bracket(w))
    })?;
    let outer = 0.25 * (1.0 - zv.norm_sqr());
    let d_z = sums.0 * outer - zv.conj() * sums.2 * 0.25;
    let d_zbar = sums.1 * outer - zv * sums.2 * 0.25;
    Ok(WirtingerPair::new(d_z, d_zbar))
}

#[derive(Debug, Clone, Copy, Default)]
struct Triple(Complex64, Complex64, Complex64);

impl std::ops::AddAssign for Triple {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
        self.1 += rhs.1;
        self.2 += rhs.2;
    }
}

impl std::ops::Mul<f64> for Triple {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        Triple(self.0 * rhs, self.1 * rhs, self.2 * rhs)
    }
}

impl QuadValue for Triple {
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.norm()).max(self.2.norm())
    }
}

/// Fourier coefficients `φ̂_k`, `|k| < n/2`, of `φ` from `n` samples.
fn sampled_coefficients(phi: &BoundaryFunction, n: usize) -> Vec<(i64, Complex64)> {
    let mut buf: Vec<Complex64> = (0..n).map(|j| phi.eval(TAU * j as f64 / n as f64)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = (n / 2) as i64;
    (-half + 1..half)
        .map(|k| {
            let idx = k.rem_euclid(n as i64) as usize;
            (k, buf[idx] / n as f64)
        })
        .filter(|(_, c)| c.norm() > 0.0)
        .collect()
}

/// Boundary values of the Wirtinger derivatives of `G1[φ]` at `e^{it}`.
///
/// The log-singular bracket has Fourier coefficients `-1` (mode 0) and
/// `-1/(|m|+1)` (mode `m ≠ 0`); the convolution with `φ` is evaluated by
/// product integration against the FFT coefficients of `φ`.
pub fn g1_wirtinger_boundary(
    phi: &BoundaryFunction,
    t: f64,
    q: &QuadratureSpec,
) -> Result<WirtingerPair> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("boundary angle {t} is not finite")));
    }
    let n = q.n_theta.max(4 * phi.bandwidth() + 8).next_power_of_two();
    let conv: Complex64 = sampled_coefficients(phi, n)
        .into_iter()
        .map(|(k, c)| {
            let b = -1.0 / (k.unsigned_abs() as f64 + 1.0);
            c * b * Complex64::from_polar(1.0, k as f64 * t)
        })
        .sum();
    let e = Complex64::from_polar(1.0, t);
    Ok(WirtingerPair::new(
        -e.conj() * conv * 0.25,
        -e * conv * 0.25,
    ))
}

/// `(1 - |ζ|², w = z ζ̄, 1 - w)` formed from `ζ - z` without cancellation.
#[inline]
fn node_terms(z: ComplexValue, z_abs2: f64, node: &DiskNode) -> (f64, ComplexValue, ComplexValue) {
    let outer = 1.0 - z_abs2;
    let one_minus_zeta = outer - 2.0 * (z.conj() * node.delta).re - node.dist2;
    let one_minus_w = outer - z * node.delta.conj();
    (one_minus_zeta, z * node.zeta.conj(), one_minus_w)
}

/// Integrand of `G2[g]` without the `1/16π` factor.
#[inline]
fn g2_kernel(z: ComplexValue, z_abs2: f64, node: &DiskNode) -> f64 {
    let (one_minus_zeta, w, one_minus_w) = node_terms(z, z_abs2, node);
    let green = green_from_parts(z_abs2, 1.0 - one_minus_zeta, node.dist2);
    2.0 * node.dist2 * green
        + (1.0 - z_abs2) * one_minus_zeta * 2.0 * log_ratio_split(w, one_minus_w).re
}

/// `G2[g](z)` by the polar rule about `z`.
pub fn g2_apply(g: &SourceFunction, z: DiskPoint, q: &QuadratureSpec) -> Result<ComplexValue> {
    if g.is_zero() {
        return Ok(ZERO);
    }
    let zv = z.value();
    let z_abs2 = zv.norm_sqr();
    let total = disk_integral(q, zv, |node| g.eval_raw(node.zeta) * g2_kernel(zv, z_abs2, node))?;
    Ok(total * (FRAC_1_PI / 16.0))
}

/// `(1/2π) ∫_𝔻 G(z, ζ) g(ζ) dσ(ζ)`.
pub fn green_potential(
    g: &SourceFunction,
    z: DiskPoint,
    q: &QuadratureSpec,
) -> Result<ComplexValue> {
    if g.is_zero() {
        return Ok(ZERO);
    }
    let zv = z.value();
    let z_abs2 = zv.norm_sqr();
    let total = disk_integral(q, zv, |node| {
        g.eval_raw(node.zeta) * green_from_parts(z_abs2, node.zeta.norm_sqr(), node.dist2)
    })?;
    Ok(total * (0.5 * FRAC_1_PI))
}

/// `(1/2π) ∫_𝔻 G(z, ζ) dσ(ζ)`; equals `(1 - |z|²)/4`.
pub fn green_mean(z: DiskPoint, q: &QuadratureSpec) -> f64 {
    let zv = z.value();
    let z_abs2 = zv.norm_sqr();
    let f = |node: &DiskNode| green_from_parts(z_abs2, node.zeta.norm_sqr(), node.dist2);
    match disk_integral(q, zv, f) {
        Ok(v) => v * 0.5 * FRAC_1_PI,
        // budget exhausted: return the finest available estimate
        Err(_) => {
            let n = disk_angle_nodes(q.n_theta, zv.norm()) << q.max_refine;
            let rule = DiskRule::new(n, q.radial_panels() + q.max_refine, PANEL_ORDER);
            rule.integrate(zv, f) * 0.5 * FRAC_1_PI
        }
    }
}

/// Interior Wirtinger derivatives of `G2[g]` as `I3 + I4 + I5 + I6` and the
/// mirror decomposition.
pub fn g2_wirtinger(g: &SourceFunction, z: DiskPoint, q: &QuadratureSpec) -> Result<WirtingerPair> {
    if g.is_zero() {
        return Ok(WirtingerPair::new(ZERO, ZERO));
    }
    let zv = z.value();
    let z_abs2 = zv.norm_sqr();
    let outer = 1.0 - z_abs2;
    let total = disk_integral(q, zv, |node| {
        let zeta = node.zeta;
        let (one_minus_zeta, w, one_minus_w) = node_terms(zv, z_abs2, node);
        let green = green_from_parts(z_abs2, 1.0 - one_minus_zeta, node.dist2);
        let lr = log_ratio_split(w, one_minus_w);
        let lp = log_ratio_derivative_split(w, one_minus_w);
        let gv = g.eval_raw(zeta);
        // I3 and I4 carry 1/8π, I5 and I6 carry 1/16π: doubled to a common 1/16π
        let i3 = -node.delta.conj() * green * 2.0;
        let i4 = -node.dist2 * zeta.conj() / one_minus_w + node.delta.conj();
        let i5 = -zv.conj() * one_minus_zeta * 2.0 * lr.re;
        let i6 = outer * one_minus_zeta * zeta.conj() * lp;
        let j3 = -node.delta * green * 2.0;
        let j4 = -node.dist2 * zeta / one_minus_w.conj() + node.delta;
        let j5 = -zv * one_minus_zeta * 2.0 * lr.re;
        let j6 = outer * one_minus_zeta * zeta * lp.conj();
        CPair((i3 + i4 + i5 + i6) * gv, (j3 + j4 + j5 + j6) * gv)
    })?;
    let s = FRAC_1_PI / 16.0;
    Ok(WirtingerPair::new(total.0 * s, total.1 * s))
}

/// Boundary values of the Wirtinger derivatives of `G2[g]` at `e^{it}`, from
/// the surviving `I4` and `I5` terms.
pub fn g2_wirtinger_boundary(
    g: &SourceFunction,
    t: f64,
    q: &QuadratureSpec,
) -> Result<WirtingerPair> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("boundary angle {t} is not finite")));
    }
    if g.is_zero() {
        return Ok(WirtingerPair::new(ZERO, ZERO));
    }
    let z = Complex64::from_polar(1.0, t);
    let rule = boundary_rule(q);
    let total = rule.integrate(t, |node| {
        let zeta = node.zeta;
        let (one_minus_zeta, w, one_minus_w) = node_terms(z, 1.0, node);
        let gv = g.eval_raw(zeta);
        // |ζ - z|² ∂G/∂z at |z| = 1, and its mirror
        let k_z = zeta.conj() * node.delta * z.conj() * 0.5 + node.delta.conj() * 0.5;
        let k_zbar = zeta * node.delta.conj() * z * 0.5 + node.delta * 0.5;
        let b = one_minus_zeta * 2.0 * log_ratio_split(w, one_minus_w).re;
        // 1/8π for the kernel term, 1/16π for the log term
        CPair(
            (k_z * 2.0 - z.conj() * b) * gv,
            (k_zbar * 2.0 - z * b) * gv,
        )
    });
    let s = FRAC_1_PI / 16.0;
    Ok(WirtingerPair::new(total.0 * s, total.1 * s))
}

/// Evaluates the representation at an interior point.
pub fn solve(case: &CaseDefinition, z: DiskPoint, q: &QuadratureSpec) -> Result<SolutionSample> {
    q.validate()?;
    require_interior(z)?;
    let poisson_part = poisson_extension_exact(&case.fstar, z);
    let g1_part = g1_apply(&case.phi, z, q)?;
    let g2_part = g2_apply(&case.g, z, q)?;
    Ok(SolutionSample {
        point: z,
        value: poisson_part + g1_part - g2_part,
        parts: SolutionParts {
            poisson_part,
            g1_part,
            g2_part,
        },
        oracle: case.oracle.map(|o| o.evaluate(z.value())),
    })
}

/// Wirtinger derivatives of the solution assembled from the analytic
/// derivative formulas of each part.
pub fn solution_wirtinger(
    case: &CaseDefinition,
    z: DiskPoint,
    q: &QuadratureSpec,
) -> Result<WirtingerPair> {
    q.validate()?;
    require_interior(z)?;
    let p = poisson_extension_wirtinger(&case.fstar, z);
    let g1 = g1_wirtinger(&case.phi, z, q)?;
    let g2 = g2_wirtinger(&case.g, z, q)?;
    Ok(p + g1 - g2)
}

/// `Δf = P[φ] - (1/2π) ∫ G g dσ`.
pub fn laplacian_field(
    case: &CaseDefinition,
    z: DiskPoint,
    q: &QuadratureSpec,
) -> Result<ComplexValue> {
    q.validate()?;
    require_interior(z)?;
    Ok(poisson_extension_exact(&case.phi, z) - green_potential(&case.g, z, q)?)
}

/// Central-difference Wirtinger derivatives with one Richardson step.
pub fn numeric_wirtinger(
    f: impl Fn(ComplexValue) -> ComplexValue,
    z: DiskPoint,
    h: f64,
) -> Result<WirtingerPair> {
    if !(1e-7..=1e-3).contains(&h) || z.modulus() + h >= 1.0 {
        return Err(Error::StepOutsideDisk {
            h,
            modulus: z.modulus(),
        });
    }
    let zv = z.value();
    let central = |step: f64| {
        let dx = (f(zv + step) - f(zv - step)) / (2.0 * step);
        let iy = Complex64::new(0.0, step);
        let dy = (f(zv + iy) - f(zv - iy)) / (2.0 * step);
        (dx, dy)
    };
    let (dx1, dy1) = central(h);
    let (dx2, dy2) = central(0.5 * h);
    let dx = (dx2 * 4.0 - dx1) / 3.0;
    let dy = (dy2 * 4.0 - dy1) / 3.0;
    let i = Complex64::new(0.0, 1.0);
    Ok(WirtingerPair::new((dx - i * dy) * 0.5, (dx + i * dy) * 0.5))
}

/// Thirteen-point bi-Laplacian stencil at `z` with spacing `h`.
pub fn bilaplacian_13pt(f: impl Fn(ComplexValue) -> ComplexValue, z: ComplexValue, h: f64) -> ComplexValue {
    let at = |i: i32, j: i32| f(z + Complex64::new(i as f64 * h, j as f64 * h));
    let sum = at(0, 0) * 20.0
        - (at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1)) * 8.0
        + (at(1, 1) + at(1, -1) + at(-1, 1) + at(-1, -1)) * 2.0
        + at(2, 0)
        + at(-2, 0)
        + at(0, 2)
        + at(0, -2);
    sum / h.powi(4)
}

/// One node of a bi-Laplacian grid check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilaplacianSample {
    pub point: ComplexValue,
    pub bilaplacian: ComplexValue,
    pub source: ComplexValue,
}

/// Applies the thirteen-point stencil to `solve` on the Cartesian grid of
/// spacing `h` restricted to `|z| ≤ radius`. Each grid value is computed once.
pub fn bilaplacian_grid(
    case: &CaseDefinition,
    h: f64,
    radius: f64,
    q: &QuadratureSpec,
) -> Result<Vec<BilaplacianSample>> {
    q.validate()?;
    if !(h > 0.0) || radius + 2.0 * h * std::f64::consts::SQRT_2 > INTERIOR_LIMIT {
        return Err(Error::Domain(format!(
            "grid radius {radius} with spacing {h} leaves the interior"
        )));
    }
    let m = (radius / h).floor() as i64 + 2;
    let width = (2 * m + 1) as usize;
    let outer = radius + 2.0 * h * std::f64::consts::SQRT_2;
    let indices: Vec<(i64, i64)> = (-m..=m).flat_map(|i| (-m..=m).map(move |j| (i, j))).collect();
    let values: Vec<Option<ComplexValue>> = indices
        .par_iter()
        .map(|&(i, j)| {
            let zv = Complex64::new(i as f64 * h, j as f64 * h);
            if zv.norm() > outer {
                return Ok(None);
            }
            solve(case, DiskPoint::new(zv)?, q).map(|s| Some(s.value))
        })
        .collect::<Result<_>>()?;
    let get = |i: i64, j: i64| values[((i + m) as usize) * width + (j + m) as usize];
    let mut out = Vec::new();
    for &(i, j) in &indices {
        let zv = Complex64::new(i as f64 * h, j as f64 * h);
        if zv.norm() > radius {
            continue;
        }
        let lookup = |w: ComplexValue| {
            let di = ((w.re - zv.re) / h).round() as i64;
            let dj = ((w.im - zv.im) / h).round() as i64;
            get(i + di, j + dj).expect("stencil node inside the evaluated disk")
        };
        let bilaplacian = bilaplacian_13pt(lookup, zv, h);
        out.push(BilaplacianSample {
            point: zv,
            bilaplacian,
            source: case.g.eval_raw(zv),
        });
    }
    Ok(out)
}
