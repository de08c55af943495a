//! Elementary kernels of the disk: Green function, Poisson kernel, the
//! log-ratio `log(1 - w) / w` and the Gamma-ratio moment series.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plane coordinates. Plain alias: all arithmetic comes from `num_complex`.
pub type ComplexValue = Complex64;

/// Points closer than this are treated as coincident by [`green`].
pub const COINCIDENT_THRESHOLD: f64 = 1e-14;

/// Switchover radius between the power series and the direct logarithm in
/// [`log_ratio`].
pub const LOG_RATIO_SWITCH: f64 = 0.5;

const MOMENT_REL_TOL: f64 = 1e-14;
const MOMENT_MIN_TERMS: usize = 16;
const MOMENT_MAX_TERMS: usize = 1_000_000;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexValue", into = "ComplexValue")]
pub struct DiskPoint(ComplexValue);

impl DiskPoint {
    pub fn new(z: ComplexValue) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() >= 1.0 {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        Ok(Self(z))
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self> {
        Self::new(ComplexValue::new(x, y))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(ComplexValue::from_polar(r, theta))
    }

    pub fn origin() -> Self {
        Self(ComplexValue::new(0.0, 0.0))
    }

    #[inline]
    pub fn value(self) -> ComplexValue {
        self.0
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<ComplexValue> for DiskPoint {
    type Error = Error;

    fn try_from(z: ComplexValue) -> Result<Self> {
        Self::new(z)
    }
}

impl From<DiskPoint> for ComplexValue {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// A point `e^{i angle}` of the unit circle, angle kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    angle: f64,
}

impl CirclePoint {
    pub fn new(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::Domain(format!("non-finite angle {angle}")));
        }
        let mut a = angle.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if a >= TAU {
            a = 0.0;
        }
        Ok(Self { angle: a })
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.angle
    }

    #[inline]
    pub fn value(self) -> ComplexValue {
        ComplexValue::from_polar(1.0, self.angle)
    }
}

/// Green function `log |(1 - z conj(ζ)) / (z - ζ)|` of the unit disk.
///
/// Evaluated as `½ log1p((1-|z|²)(1-|ζ|²) / |z-ζ|²)`, which is the same
/// quantity written so that it keeps full relative accuracy near the circle.
pub fn green(z: DiskPoint, zeta: DiskPoint) -> Result<f64> {
    let d2 = (z.0 - zeta.0).norm_sqr();
    let sep = d2.sqrt();
    if sep < COINCIDENT_THRESHOLD {
        return Err(Error::CoincidentPoints { separation: sep });
    }
    Ok(green_from_parts(z.0.norm_sqr(), zeta.0.norm_sqr(), d2))
}

#[inline]
pub(crate) fn green_from_parts(z_abs2: f64, zeta_abs2: f64, dist2: f64) -> f64 {
    0.5 * ((1.0 - z_abs2) * (1.0 - zeta_abs2) / dist2).ln_1p()
}

/// Poisson kernel `(1 - |z|²) / |1 - z e^{-it}|²`.
pub fn poisson(z: DiskPoint, t: f64) -> f64 {
    poisson_raw(z.0, t)
}

#[inline]
pub(crate) fn poisson_raw(z: ComplexValue, t: f64) -> f64 {
    let e = ComplexValue::from_polar(1.0, -t);
    (1.0 - z.norm_sqr()) / (ComplexValue::new(1.0, 0.0) - z * e).norm_sqr()
}

/// `log(1 - w) / w` on the principal branch, with the removable point
/// `w = 0` filled by `-1`.
pub fn log_ratio(w: ComplexValue) -> Result<ComplexValue> {
    check_inside(w)?;
    Ok(log_ratio_raw(w))
}

/// Derivative of [`log_ratio`]: `-1/(w(1-w)) - log(1-w)/w²`, i.e.
/// `-Σ_{n≥2} (n-1)/n · w^{n-2}`.
pub fn log_ratio_derivative(w: ComplexValue) -> Result<ComplexValue> {
    check_inside(w)?;
    Ok(log_ratio_derivative_raw(w))
}

fn check_inside(w: ComplexValue) -> Result<()> {
    if !(w.re.is_finite() && w.im.is_finite()) || w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "log-ratio argument |w| = {} must be < 1",
            w.norm()
        )));
    }
    Ok(())
}

/// Number of power-series terms needed for `|w|^n / n` to drop below
/// double-precision resolution.
#[inline]
fn series_terms(abs_w: f64) -> usize {
    if abs_w < 1e-300 {
        return 1;
    }
    let n = (-39.0 / abs_w.ln()).ceil();
    (n as usize).clamp(1, 64)
}

/// Unchecked log-ratio. Also valid on the circle away from `w = 1`, which the
/// boundary derivative formulas rely on.
#[inline]
pub(crate) fn log_ratio_raw(w: ComplexValue) -> ComplexValue {
    let a = w.norm();
    if a <= LOG_RATIO_SWITCH {
        let n = series_terms(a);
        // -Σ_{k=1}^{n} w^{k-1}/k by Horner
        let mut acc = ComplexValue::new(1.0 / n as f64, 0.0);
        for k in (1..n).rev() {
            acc = acc * w + 1.0 / k as f64;
        }
        -acc
    } else {
        (ComplexValue::new(1.0, 0.0) - w).ln() / w
    }
}

/// `log_ratio_raw` with `1 - w` supplied by the caller, for arguments near 1
/// where forming `1 - w` would cancel.
#[inline]
pub(crate) fn log_ratio_split(w: ComplexValue, one_minus_w: ComplexValue) -> ComplexValue {
    if w.norm() <= LOG_RATIO_SWITCH {
        log_ratio_raw(w)
    } else {
        one_minus_w.ln() / w
    }
}

/// `log_ratio_derivative_raw` with `1 - w` supplied by the caller.
#[inline]
pub(crate) fn log_ratio_derivative_split(w: ComplexValue, one_minus_w: ComplexValue) -> ComplexValue {
    if w.norm() <= LOG_RATIO_SWITCH {
        log_ratio_derivative_raw(w)
    } else {
        -(one_minus_w.ln() / w + 1.0 / one_minus_w) / w
    }
}

#[inline]
pub(crate) fn log_ratio_derivative_raw(w: ComplexValue) -> ComplexValue {
    let a = w.norm();
    if a <= LOG_RATIO_SWITCH {
        let n = series_terms(a) + 1;
        // -Σ_{k=2}^{n+1} (k-1)/k · w^{k-2}
        let mut acc = ComplexValue::new(n as f64 / (n + 1) as f64, 0.0);
        for k in (2..=n).rev() {
            acc = acc * w + (k - 1) as f64 / k as f64;
        }
        -acc
    } else {
        let one = ComplexValue::new(1.0, 0.0);
        -one / (w * (one - w)) - (one - w).ln() / (w * w)
    }
}

/// `Σ_{n≥0} (Γ(n+α) / (n! Γ(α)))² |z|^{2n}`, the closed form of the circle
/// mean of `|1 - z e^{iθ}|^{-2α}`.
///
/// Coefficients are built by the ratio `c_{n+1} = c_n (n+α)/(n+1)`, never
/// from Gamma values directly.
pub fn moment_series(z: DiskPoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    let x = z.0.norm_sqr();
    if x == 0.0 {
        return Ok(1.0);
    }
    let mut coeff = 1.0_f64;
    let mut power = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 0..MOMENT_MAX_TERMS {
        let step = (n as f64 + alpha) / (n as f64 + 1.0);
        coeff *= step;
        power *= x;
        let term = coeff * coeff * power;
        sum += term;
        if n + 1 >= MOMENT_MIN_TERMS {
            // successive term ratios are bounded by rho from here on
            let next = (n as f64 + 1.0 + alpha) / (n as f64 + 2.0);
            let rho = (next * next * x).max(x);
            if rho < 1.0 && term * rho / (1.0 - rho) < MOMENT_REL_TOL * sum {
                return Ok(sum);
            }
        }
    }
    Err(Error::SeriesBudget {
        terms: MOMENT_MAX_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(c(re, im)).unwrap()
    }

    #[test]
    fn green_at_origin_is_log_inverse_radius() {
        let g = green(DiskPoint::origin(), dp(0.5, 0.0)).unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn green_is_symmetric_for_the_listed_pair() {
        let a = green(dp(0.3, 0.0), dp(0.0, 0.5)).unwrap();
        let b = green(dp(0.0, 0.5), dp(0.3, 0.0)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn green_near_circle_matches_direct_formula() {
        let z = DiskPoint::from_polar(0.99, FRAC_PI_3).unwrap();
        let zeta = dp(0.2, 0.0);
        let direct = ((c(1.0, 0.0) - z.value() * zeta.value().conj()).norm()
            / (z.value() - zeta.value()).norm())
        .ln();
        assert!((green(z, zeta).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn green_rejects_coincident_points() {
        let z = dp(0.1, 0.2);
        assert!(matches!(
            green(z, z),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn green_decays_toward_the_circle() {
        let zeta = dp(0.3, 0.0);
        for &theta in &[0.0, 1.0, 2.5, 4.0] {
            let mut prev = f64::INFINITY;
            for k in 1..=6 {
                let r = 1.0 - 10f64.powi(-k);
                let g = green(DiskPoint::from_polar(r, theta).unwrap(), zeta).unwrap();
                assert!(g < prev);
                prev = g;
            }
            let g = green(DiskPoint::from_polar(1.0 - 1e-6, theta).unwrap(), zeta).unwrap();
            assert!(g > 0.0 && g < 1e-5, "theta={theta} g={g}");
        }
    }

    #[test]
    fn poisson_values() {
        assert_eq!(poisson(DiskPoint::origin(), 1.234), 1.0);
        assert!((poisson(dp(0.5, 0.0), 0.0) - 3.0).abs() < 1e-15);
        let z = dp(0.7, 0.0);
        let n = 512;
        let mean: f64 = (0..n)
            .map(|j| poisson(z, TAU * j as f64 / n as f64))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_ratio_values() {
        assert_eq!(log_ratio(c(0.0, 0.0)).unwrap(), c(-1.0, 0.0));
        let v = log_ratio(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.5f64.ln() / 0.5).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
        assert!(log_ratio(c(1.0, 0.0)).is_err());
        assert!(log_ratio(c(0.0, -1.2)).is_err());
    }

    #[test]
    fn log_ratio_seam_is_continuous() {
        let lo = log_ratio(c(0.49999, 0.0)).unwrap();
        let hi = log_ratio(c(0.50001, 0.0)).unwrap();
        // the function itself moves by ~|L'| * 2e-5 across the pair
        let slope = log_ratio_derivative(c(0.5, 0.0)).unwrap();
        let predicted = lo + slope * 2e-5;
        assert!((hi - predicted).norm() < 1e-9);
    }

    #[test]
    fn log_ratio_branches_agree_on_ring() {
        let one = c(1.0, 0.0);
        let mut worst = 0.0f64;
        for i in 0..360 {
            let r = 0.45 + 0.1 * (i % 36) as f64 / 35.0;
            let w = ComplexValue::from_polar(r, TAU * i as f64 / 360.0);
            let direct = (one - w).ln() / w;
            worst = worst.max((log_ratio(w).unwrap() - direct).norm());
        }
        assert!(worst <= 1e-12, "worst = {worst:e}");
    }

    #[test]
    fn log_ratio_derivative_matches_difference_quotient() {
        for &w in &[c(0.1, 0.2), c(-0.4, 0.1), c(0.6, -0.3), c(0.0, 0.8)] {
            let h = 1e-6;
            let fd = (log_ratio(w + h).unwrap() - log_ratio(w - h).unwrap()) / (2.0 * h);
            assert!((fd - log_ratio_derivative(w).unwrap()).norm() < 1e-8);
        }
        assert!((log_ratio_derivative(c(0.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn moment_series_closed_forms() {
        assert_eq!(moment_series(DiskPoint::origin(), 2.7).unwrap(), 1.0);
        let z = dp(0.5, 0.0);
        assert!((moment_series(z, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-13);
        let x: f64 = 0.25;
        let closed = (1.0 + x) / (1.0 - x).powi(3);
        assert!((moment_series(z, 2.0).unwrap() - closed).abs() < 1e-13);
        assert!((closed - 2.962963).abs() < 1e-6);
        assert!(moment_series(z, 0.0).is_err());
        assert!(moment_series(z, -1.0).is_err());
    }

    #[test]
    fn moment_series_matches_periodic_rule() {
        let n = 2048;
        for &alpha in &[1.0, 2.0, 2.5, 3.0] {
            for z in [
                DiskPoint::origin(),
                dp(0.3, 0.0),
                DiskPoint::from_polar(0.7, FRAC_PI_4).unwrap(),
            ] {
                let quad: f64 = (0..n)
                    .map(|j| {
                        let e = ComplexValue::from_polar(1.0, TAU * j as f64 / n as f64);
                        (c(1.0, 0.0) - z.value() * e).norm().powf(-2.0 * alpha)
                    })
                    .sum::<f64>()
                    / n as f64;
                let series = moment_series(z, alpha).unwrap();
                assert!((quad - series).abs() < 1e-10, "alpha={alpha} z={z:?}");
            }
        }
    }

    #[test]
    fn circle_point_is_canonical() {
        assert!((CirclePoint::new(-PI / 2.0).unwrap().angle() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(CirclePoint::new(TAU).unwrap().angle(), 0.0);
        assert!(CirclePoint::new(f64::NAN).is_err());
    }

    #[test]
    fn disk_point_rejects_boundary() {
        assert!(DiskPoint::from_xy(1.0, 0.0).is_err());
        assert!(DiskPoint::from_xy(0.6, 0.8).is_err());
        assert!(DiskPoint::from_xy(f64::NAN, 0.0).is_err());
    }
}
