//! The explicit constants of the bi-Lipschitz estimate for given
//! `(K, ‖φ‖∞, ‖g‖∞)`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{golden_max, CaseDefinition};
use crate::solver::quadrature::GaussLegendre;

/// `√(π²/3 - 1)`.
pub fn sqrt_pi2_over_3_minus_1() -> f64 {
    (PI * PI / 3.0 - 1.0).sqrt()
}

/// `√(1 + π²/6)`.
pub fn sqrt_1_plus_pi2_over_6() -> f64 {
    (1.0 + PI * PI / 6.0).sqrt()
}

/// Upper estimate `16^{1-1/K} min{(23/8)^{1-1/K}, (1 + 2^{3-2K})^{1/K}}` of
/// the Hölder constant of normalised K-quasiconformal self-maps.
pub fn mori_q(k: f64) -> Result<f64> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::Domain(format!("K = {k} must be finite and >= 1")));
    }
    let e = 1.0 - 1.0 / k;
    let a = (23.0f64 / 8.0).powf(e);
    let b = (1.0 + 2f64.powf(3.0 - 2.0 * k)).powf(1.0 / k);
    Ok(16f64.powf(e) * a.min(b))
}

/// `h(x) = (1 - x) (Σ_{n≥2} ((n-1)/n)² x^{n-2})^{1/2}` on `[0, 1)`.
pub fn h_eval(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("h is defined on [0, 1), got {x}")));
    }
    Ok((1.0 - x) * h_series(x).sqrt())
}

fn h_series(x: f64) -> f64 {
    // terms are bounded by x^{n-2}, so the tail after n is at most x^{n-1}/(1-x)
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut n = 2u64;
    loop {
        let r = (n - 1) as f64 / n as f64;
        sum += r * r * power;
        power *= x;
        if power / (1.0 - x) < 1e-14 * sum {
            return sum;
        }
        n += 1;
    }
}

/// Upper end of the `h_max` search interval.
pub const H_SCAN_END: f64 = 1.0 - 1e-6;

/// Grid size of the `h_max` scan.
pub const H_SCAN_POINTS: usize = 10_000;

/// Maximum of `h` on `[0, 1)` by a dense scan followed by golden-section
/// refinement around the best sample. Computed once per process.
pub fn h_max() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| h_argmax().1)
}

/// `(argmax, max)` of `h` on `[0, H_SCAN_END]`.
pub fn h_argmax() -> (f64, f64) {
    let step = H_SCAN_END / H_SCAN_POINTS as f64;
    let h = |x: f64| h_eval(x.clamp(0.0, H_SCAN_END)).unwrap_or(f64::NEG_INFINITY);
    let (best_x, best) = (0..=H_SCAN_POINTS)
        .map(|i| {
            let x = step * i as f64;
            (x, h(x))
        })
        .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let lo = (best_x - step).max(0.0);
    let hi = (best_x + step).min(H_SCAN_END);
    let (x, v) = golden_max(h, lo, hi);
    if v > best {
        (x, v)
    } else {
        (best_x, best)
    }
}

const CPI_LEVELS: i32 = 40;
const CPI_ORDER: usize = 16;

fn cpi_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(CPI_ORDER))
}

/// `∫_0^ℓ x^s m(x) dx` for `s > -1` and smooth `m`. The innermost dyadic
/// panel `[0, a]` is mapped by `x = a v^{1/(1+s)}`, which absorbs `x^s dx`
/// into the constant `a^{1+s}/(1+s) dv`; the other panels are graded toward 0.
fn endpoint_power_integral(s: f64, len: f64, m: impl Fn(f64) -> f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let gl = cpi_rule();
    let a = len * 0.5f64.powi(CPI_LEVELS);
    let q = 1.0 / (1.0 + s);
    let inner: f64 = gl.on_interval(0.0, 1.0).map(|(v, w)| w * m(a * v.powf(q))).sum();
    let mut total = a.powf(1.0 + s) / (1.0 + s) * inner;
    let mut lo = a;
    for j in (0..CPI_LEVELS).rev() {
        let hi = len * 0.5f64.powi(j);
        total += gl
            .on_interval(lo, hi)
            .map(|(x, w)| w * x.powf(s) * m(x))
            .sum::<f64>();
        lo = hi;
    }
    total
}

/// `∫_0^ℓ (2 sin(x/2))^s dx` for `0 ≤ ℓ ≤ 2π`.
fn chord_power_integral(s: f64, len: f64) -> f64 {
    let m = |x: f64| {
        if x == 0.0 {
            1.0
        } else {
            (2.0 * (0.5 * x).sin() / x).powf(s)
        }
    };
    if len <= PI {
        endpoint_power_integral(s, len, m)
    } else {
        // the chord is symmetric about x = π
        2.0 * endpoint_power_integral(s, PI, m) - endpoint_power_integral(s, TAU - len, m)
    }
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > -1.0 && s.is_finite()) {
        return Err(Error::Domain(format!(
            "circle power integral diverges for s = {s} <= -1"
        )));
    }
    Ok(())
}

/// `(1/2π) ∫_0^{2π} |1 - e^{it}|^s dt`.
pub fn circle_power_integral(s: f64) -> Result<f64> {
    check_exponent(s)?;
    Ok(chord_power_integral(s, PI) / PI)
}

/// `(1/2π) ∫_0^{2π} |e^{it} - e^{iθ}|^s dt`, integrated over `[0, 2π]` split
/// at `t = θ`; independent of `θ` up to rounding.
pub fn circle_power_integral_shifted(s: f64, theta: f64) -> Result<f64> {
    check_exponent(s)?;
    let theta = theta.rem_euclid(TAU);
    Ok((chord_power_integral(s, theta) + chord_power_integral(s, TAU - theta)) / TAU)
}

/// `μ8 = (‖φ‖/2)√(π²/3-1) + (‖g‖/16)(1 + √2 √(1+π²/6))`, the bound on
/// `‖D G1[φ]‖ + ‖D G2[g]‖` on the circle.
pub fn boundary_derivative_bound(phi_norm: f64, g_norm: f64) -> f64 {
    0.5 * phi_norm * sqrt_pi2_over_3_minus_1()
        + g_norm / 16.0 * (1.0 + SQRT_2 * sqrt_1_plus_pi2_over_6())
}

/// The full constant table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiLipschitzConstants {
    #[serde(rename = "K")]
    pub k: f64,
    pub phi_norm: f64,
    pub g_norm: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub h_max: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    /// Present only when `(K - 1) μ1 / K < 1`.
    pub mu5: Option<f64>,
    pub mu6: f64,
    pub mu7: f64,
    pub mu7_prime: f64,
    pub mu7_dprime: f64,
    pub mu8: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    /// Upper bound for the Lipschitz constant.
    #[serde(rename = "C2_upper")]
    pub c2_upper: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `a1(K)`: admissible `‖g‖∞` for the bi-Lipschitz certificate.
pub fn a1(k: f64) -> f64 {
    60.0 / ((25.0 + 61.0 * k * k) * 46f64.powf(2.0 * (k - 1.0)))
}

/// `a2(K)`: admissible `‖φ‖∞` for the bi-Lipschitz certificate.
pub fn a2(k: f64) -> f64 {
    25.0 / ((38.0 + 101.0 * k * k) * 46f64.powf(2.0 * (k - 1.0)))
}

/// Evaluates every constant for `(K, ‖φ‖∞, ‖g‖∞)`.
pub fn compute_constants(k: f64, phi_norm: f64, g_norm: f64) -> Result<BiLipschitzConstants> {
    if !(phi_norm >= 0.0 && phi_norm.is_finite() && g_norm >= 0.0 && g_norm.is_finite()) {
        return Err(Error::Domain(format!(
            "norms must be finite and >= 0, got ({phi_norm}, {g_norm})"
        )));
    }
    let q = mori_q(k)?;
    let h = h_max();
    let s3 = sqrt_pi2_over_3_minus_1();
    let s6 = sqrt_1_plus_pi2_over_6();
    let k2 = k * k;

    let mu1 = k * q.powf(1.0 / k + 1.0) * circle_power_integral(-1.0 + 1.0 / k2)?;
    let mu8 = boundary_derivative_bound(phi_norm, g_norm);
    let mu3 = k * mu8;
    let mu4 = 0.5 * phi_norm * (h + 2.0 * s3) + g_norm * (53.0 / 240.0 + SQRT_2 * s6 / 8.0);
    let mu2 = mu3 + mu4;
    let denom = 1.0 - mu1 * (1.0 - 1.0 / k);
    // (K-1)μ1/K < 1 exactly when the denominator is positive
    let mu5 = (denom > 0.0).then(|| (mu1 / k + mu2) / denom);
    let mu6 = (mu1 + mu2).powf(k);
    let c2_upper = mu5.map_or(mu6, |m5| m5.min(mu6));

    let circle = circle_power_integral(2.0 * k - 2.0)?;
    let mu7_prime = q.powf(-2.0 * k) * circle;
    let mu7_dprime = 0.5 - phi_norm / 8.0 - 3.0 * g_norm / 128.0;
    let mu7 = mu7_prime.max(mu7_dprime);

    let c1 = mu7 / k2
        - 0.5 * phi_norm * (h + s3)
        - (1.0 + 1.0 / k2) * mu8
        - g_norm * (19.0 / 120.0 + SQRT_2 * s6 / 16.0);

    let m1 = q.powf(-2.0 * k) * circle / k2;
    let n1 = 0.5 * phi_norm * (h + (2.0 + 1.0 / k2) * s3)
        + g_norm
            * (1.0 / (16.0 * k2) + 53.0 / 240.0 + SQRT_2 * (1.0 + 2.0 * k2) * s6 / (16.0 * k2));

    let m2_prime = mu1.powf(k);
    let n2_prime = mu6 - m2_prime;
    let (m2, n2) = match mu5 {
        Some(_) => {
            let m2_dprime = mu1 / (k - mu1 * (k - 1.0));
            let n2_dprime = mu2 / denom;
            (m2_prime.max(m2_dprime), n2_prime.max(n2_dprime))
        }
        None => (m2_prime, n2_prime),
    };

    Ok(BiLipschitzConstants {
        k,
        phi_norm,
        g_norm,
        q,
        h_max: h,
        mu1,
        mu2,
        mu3,
        mu4,
        mu5,
        mu6,
        mu7,
        mu7_prime,
        mu7_dprime,
        mu8,
        m1,
        m2,
        n1,
        n2,
        c1,
        c2_upper,
        a1: a1(k),
        a2: a2(k),
    })
}

/// Bi-Lipschitz certificate: `‖g‖∞ ≤ a1(K)` and `‖φ‖∞ ≤ a2(K)`.
pub fn certify_bilipschitz(case: &CaseDefinition) -> Result<(bool, BiLipschitzConstants)> {
    let k = case
        .exact_k
        .ok_or_else(|| Error::MissingExactK(case.name.clone()))?;
    let constants = compute_constants(k, case.phi_norm, case.g_norm)?;
    let certified = case.g_norm <= constants.a1 && case.phi_norm <= constants.a2;
    Ok((certified, constants))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_case, CaseParams};

    #[test]
    fn mori_q_values() {
        assert_eq!(mori_q(1.0).unwrap(), 1.0);
        let expect = 4.0 * 1.5f64.sqrt();
        assert!((mori_q(2.0).unwrap() - expect).abs() < 1e-12);
        let k = 100.0 / 99.0;
        let v = mori_q(k).unwrap();
        assert!(v > 1.0 && v < 1.1);
        assert!(mori_q(1.0).unwrap() < v && v < mori_q(1.02).unwrap());
        assert!(mori_q(0.5).is_err());
    }

    #[test]
    fn h_values() {
        assert_eq!(h_eval(0.0).unwrap(), 0.5);
        for i in 0..1000 {
            let x = i as f64 / 1000.0;
            assert!(h_eval(x).unwrap() <= (1.0 - x).sqrt() + 1e-15);
        }
        assert!(h_eval(1.0).is_err());
        assert!(h_eval(-0.1).is_err());
        let (x, v) = h_argmax();
        assert_eq!(x, 0.0);
        assert_eq!(v, 0.5);
        assert_eq!(h_max(), 0.5);
    }

    #[test]
    fn circle_integral_values() {
        assert!((circle_power_integral(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((circle_power_integral(2.0).unwrap() - 2.0).abs() < 1e-13);
        // |1 - e^{it}|^4 = 16 sin^4(t/2), mean 6
        assert!((circle_power_integral(4.0).unwrap() - 6.0).abs() < 1e-12);
        assert!(circle_power_integral(-1.0).is_err());
        let a = circle_power_integral(-0.5).unwrap();
        for th in [0.0, 0.3, 2.0, 6.0] {
            assert!((circle_power_integral_shifted(-0.5, th).unwrap() - a).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_at_k_one() {
        let c = compute_constants(1.0, 0.0, 0.0).unwrap();
        assert!((c.mu1 - 1.0).abs() < 1e-12);
        assert!((c.m1 - 1.0).abs() < 1e-12);
        assert!((c.m2 - 1.0).abs() < 1e-12);
        assert_eq!(c.n1, 0.0);
        assert!(c.n2.abs() < 1e-12);
        assert!((c.c1 - 1.0).abs() < 1e-12);
        assert!((c.a1 - 60.0 / 86.0).abs() < 1e-15);
        assert!((c.a2 - 25.0 / 139.0).abs() < 1e-15);
    }

    #[test]
    fn certificates() {
        let e2 = make_case("example-4.2", &CaseParams::default()).unwrap();
        let (ok, c) = certify_bilipschitz(&e2).unwrap();
        assert!(ok && c.a1 > 0.63 && c.a2 > 0.16 && c.c1 > 0.0);
        let e1 = make_case("example-4.1", &CaseParams::default()).unwrap();
        assert!(!certify_bilipschitz(&e1).unwrap().0);
        let id = make_case("identity", &CaseParams::default()).unwrap();
        assert!(certify_bilipschitz(&id).unwrap().0);
        let mut nok = e2.clone();
        nok.exact_k = None;
        assert!(matches!(certify_bilipschitz(&nok), Err(Error::MissingExactK(_))));
    }
}
