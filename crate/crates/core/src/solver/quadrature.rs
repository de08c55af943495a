//! Quadrature rules: Gauss–Legendre panels, the periodic trapezoid rule, and
//! the polar disk rule centred at the evaluation point.
//!
//! Disk integrals are taken in polar coordinates about the evaluation point
//! `z`: `ζ = z + R(θ) s e^{iθ}` with `R(θ)` the distance from `z` to the
//! circle in direction `θ`, so `dσ = R² s ds dθ`. The only non-smooth factors
//! of the integrands (`log|ζ - z|` and powers of `|ζ - z|`) then live at
//! `s = 0`, where the radial panels are graded dyadically. `R(θ)` is analytic
//! and periodic, so the angular trapezoid rule converges geometrically.

use std::f64::consts::{PI, TAU};
use std::ops::{AddAssign, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretisation parameters shared by the circle and disk integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Periodic nodes on circles (lower bound; raised automatically near 𝕋).
    pub n_theta: usize,
    /// Radial nodes per ray, spread over dyadically graded panels.
    pub n_r: usize,
    /// Relative change between successive refinements accepted as converged.
    pub adaptive_tol: f64,
    /// Refinement budget before a quadrature-budget error is raised.
    pub max_refine: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_theta: 128,
            n_r: 48,
            adaptive_tol: 1e-8,
            max_refine: 6,
        }
    }
}

/// Gauss–Legendre order used on every radial panel.
pub const PANEL_ORDER: usize = 12;

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 64 || self.n_theta % 2 != 0 {
            return Err(Error::InvalidQuadrature(format!(
                "n_theta = {} must be even and >= 64",
                self.n_theta
            )));
        }
        if self.n_r < 32 {
            return Err(Error::InvalidQuadrature(format!(
                "n_r = {} must be >= 32",
                self.n_r
            )));
        }
        if !(self.adaptive_tol > 0.0 && self.adaptive_tol <= 1e-4) {
            return Err(Error::InvalidQuadrature(format!(
                "adaptive_tol = {:e} must lie in (0, 1e-4]",
                self.adaptive_tol
            )));
        }
        Ok(())
    }

    /// Number of graded radial panels implied by `n_r`.
    pub fn radial_panels(&self) -> usize {
        (self.n_r / PANEL_ORDER).max(3)
    }
}

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Default + AddAssign + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Two complex values integrated together (e.g. both Wirtinger derivatives).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CPair(pub Complex64, pub Complex64);

impl AddAssign for CPair {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
        self.1 += rhs.1;
    }
}

impl Mul<f64> for CPair {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        CPair(self.0 * rhs, self.1 * rhs)
    }
}

impl QuadValue for CPair {
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.norm())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule on `[0, 1]` with panels `[0, 2^-L], [2^-L, 2^-L+1],
/// …, [1/2, 1]`, graded toward the endpoint 0. The first panel uses the
/// substitution `s = h u³`, which turns `s^k log s` into `u^{3k+2} log u`.
pub fn graded_unit_rule(panels: usize, order: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(order);
    let mut out = Vec::with_capacity(panels * order);
    let levels = panels.max(1) - 1;
    let first = 0.5f64.powi(levels as i32);
    out.extend(
        gl.on_interval(0.0, 1.0)
            .map(|(u, w)| (first * u * u * u, w * 3.0 * first * u * u)),
    );
    let mut a = first;
    for j in (0..levels).rev() {
        let b = 0.5f64.powi(j as i32);
        out.extend(gl.on_interval(a, b));
        a = b;
    }
    out
}

/// Periodic trapezoid mean `(1/2π) ∫ f(θ) dθ` on `n` equispaced nodes.
pub fn periodic_mean<T: QuadValue>(n: usize, mut f: impl FnMut(f64) -> T) -> T {
    let mut acc = T::default();
    for j in 0..n {
        acc += f(TAU * j as f64 / n as f64);
    }
    acc * (1.0 / n as f64)
}

/// Trapezoid node count for circle integrals of kernels whose Fourier modes
/// decay like `|z|^k`, for boundary data of bandwidth `bandwidth`.
pub fn circle_nodes(min_nodes: usize, modulus: f64, bandwidth: usize) -> usize {
    let decay = if modulus < 1e-3 {
        0
    } else {
        (-40.0 / modulus.ln()).ceil() as usize
    };
    let n = min_nodes.max(decay + 2 * bandwidth + 8);
    n + n % 2
}

/// Angular node count for the disk rule about `z`: the trapezoid error
/// decays like `exp(-n·a)` with `a` the analyticity half-width of `R(θ)`.
pub fn disk_angle_nodes(min_nodes: usize, modulus: f64) -> usize {
    let m = modulus.min(1.0 - 1e-15);
    let width = if m < 1e-3 {
        f64::INFINITY
    } else {
        ((1.0 - m * m).sqrt() / m).asinh()
    };
    let need = if width.is_finite() {
        (38.0 / width).ceil() as usize
    } else {
        0
    };
    let n = min_nodes.max(need);
    // round up to a multiple of 4 so halving keeps an even rule
    n.div_ceil(4) * 4
}

/// Geometry of one quadrature node of a disk rule centred at `z`.
#[derive(Debug, Clone, Copy)]
pub struct DiskNode {
    /// The integration point ζ.
    pub zeta: Complex64,
    /// `ζ - z`.
    pub delta: Complex64,
    /// `|ζ - z|²`.
    pub dist2: f64,
    /// `log |ζ - z|`.
    pub log_dist: f64,
}

/// Polar rule about an interior point; nodes in `s` and `θ` are fixed, only
/// the ray lengths depend on `z`.
#[derive(Debug, Clone)]
pub struct DiskRule {
    radial: Vec<(f64, f64, f64)>,
    angles: Vec<(f64, f64)>,
}

impl DiskRule {
    pub fn new(n_theta: usize, panels: usize, order: usize) -> Self {
        let radial = graded_unit_rule(panels, order)
            .into_iter()
            .map(|(s, w)| (s, w * s, s.ln()))
            .collect();
        let angles = (0..n_theta)
            .map(|j| {
                let t = TAU * j as f64 / n_theta as f64;
                (t.cos(), t.sin())
            })
            .collect();
        Self { radial, angles }
    }

    pub fn n_theta(&self) -> usize {
        self.angles.len()
    }

    /// `∫_𝔻 f(ζ) dσ(ζ)` for an interior `z`.
    pub fn integrate<T: QuadValue>(&self, z: Complex64, f: impl FnMut(&DiskNode) -> T) -> T {
        self.integrate_embedded(z, f).0
    }

    /// Full rule and the embedded rule on every other angle; their difference
    /// bounds the angular error of the coarse rule.
    pub fn integrate_embedded<T: QuadValue>(
        &self,
        z: Complex64,
        mut f: impl FnMut(&DiskNode) -> T,
    ) -> (T, T) {
        let one_minus = 1.0 - z.norm_sqr();
        let dtheta = TAU / self.angles.len() as f64;
        let mut total = T::default();
        let mut even = T::default();
        for (j, &(c, s)) in self.angles.iter().enumerate() {
            let b = z.re * c + z.im * s;
            let root = (b * b + one_minus).sqrt();
            let ray = if b > 0.0 {
                one_minus / (b + root)
            } else {
                root - b
            };
            let log_ray = ray.ln();
            let dir = Complex64::new(c, s);
            let mut line = T::default();
            for &(sn, w, log_s) in &self.radial {
                let rho = ray * sn;
                let delta = dir * rho;
                let node = DiskNode {
                    zeta: z + delta,
                    delta,
                    dist2: rho * rho,
                    log_dist: log_ray + log_s,
                };
                line += f(&node) * w;
            }
            let contribution = line * (ray * ray);
            total += contribution;
            if j % 2 == 0 {
                even += contribution;
            }
        }
        (total * dtheta, even * (2.0 * dtheta))
    }
}

/// Polar rule about a boundary point `e^{iα}`: directions fill the half-plane
/// `θ - α ∈ (π/2, 3π/2)` with ray length `-2 cos(θ - α)`. Both the angular and
/// the radial variables are graded toward their singular endpoints.
#[derive(Debug, Clone)]
pub struct BoundaryDiskRule {
    radial: Vec<(f64, f64, f64)>,
    angular: Vec<(f64, f64)>,
}

impl BoundaryDiskRule {
    pub fn new(panels: usize, order: usize) -> Self {
        let radial = graded_unit_rule(panels, order)
            .into_iter()
            .map(|(s, w)| (s, w * s, s.ln()))
            .collect();
        // offsets u ∈ (0, π), graded toward both ends; θ - α = π/2 + u
        let half = graded_unit_rule(panels, order);
        let mut angular = Vec::with_capacity(2 * half.len());
        for &(x, w) in &half {
            angular.push((0.5 * PI * x, 0.5 * PI * w));
            angular.push((PI - 0.5 * PI * x, 0.5 * PI * w));
        }
        Self { radial, angular }
    }

    /// `∫_𝔻 f(ζ) dσ(ζ)` with the polar centre on the circle at angle `alpha`.
    pub fn integrate<T: QuadValue>(&self, alpha: f64, mut f: impl FnMut(&DiskNode) -> T) -> T {
        let z = Complex64::from_polar(1.0, alpha);
        let mut total = T::default();
        for &(u, wu) in &self.angular {
            let phase = 0.5 * PI + u;
            // -2cos(π/2 + u) = 2 sin u
            let ray = 2.0 * u.sin();
            if ray <= 0.0 {
                continue;
            }
            let log_ray = ray.ln();
            let dir = Complex64::from_polar(1.0, alpha + phase);
            let mut line = T::default();
            for &(sn, w, log_s) in &self.radial {
                let rho = ray * sn;
                let delta = dir * rho;
                let node = DiskNode {
                    zeta: z + delta,
                    delta,
                    dist2: rho * rho,
                    log_dist: log_ray + log_s,
                };
                line += f(&node) * w;
            }
            total += line * (ray * ray * wu);
        }
        total
    }
}
