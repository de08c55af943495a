//! Boundary data `f*`, `φ`, source data `g`, and the catalog of named cases
//! with their closed-form solutions.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::{ComplexValue, DiskPoint};
use crate::solver::WirtingerPair;

/// Largest Fourier index accepted in a [`BoundaryFunction::Fourier`].
pub const MAX_FOURIER_INDEX: i64 = 4096;

const NORM_SAMPLES: usize = 4096;

/// JSON form of a complex number: `{"re": x, "im": y}` or a bare real.
mod cx {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        Real(f64),
        Parts(Parts),
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        Parts { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        Ok(match Input::deserialize(d)? {
            Input::Real(x) => Complex64::new(x, 0.0),
            Input::Parts(p) => Complex64::new(p.re, p.im),
        })
    }

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    pub struct Wrapped(#[serde(with = "self")] pub Complex64);

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(
            m: &BTreeMap<i64, Complex64>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let w: BTreeMap<i64, Wrapped> = m.iter().map(|(k, v)| (*k, Wrapped(*v))).collect();
            w.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<BTreeMap<i64, Complex64>, D::Error> {
            // keys arrive as strings once a tagged enum has buffered the map
            let w = BTreeMap::<String, Wrapped>::deserialize(d)?;
            w.into_iter()
                .map(|(k, v)| {
                    k.trim()
                        .parse::<i64>()
                        .map(|k| (k, v.0))
                        .map_err(|_| serde::de::Error::custom(format!("invalid Fourier index '{k}'")))
                })
                .collect()
        }
    }
}

/// A continuous function on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryFunction {
    Constant {
        #[serde(with = "cx")]
        c: ComplexValue,
    },
    /// `Σ_k coeffs[k] e^{ikt}`.
    Fourier {
        #[serde(with = "cx::map")]
        coeffs: BTreeMap<i64, ComplexValue>,
    },
    /// `β e^{ikt}` with `|β| = 1`.
    RotationPower {
        #[serde(with = "cx")]
        beta: ComplexValue,
        k: i64,
    },
}

impl BoundaryFunction {
    pub fn constant(c: ComplexValue) -> Self {
        Self::Constant { c }
    }

    pub fn rotation_power(beta: ComplexValue, k: i64) -> Result<Self> {
        let f = Self::RotationPower { beta, k };
        f.validate()?;
        Ok(f)
    }

    pub fn fourier(coeffs: BTreeMap<i64, ComplexValue>) -> Result<Self> {
        let f = Self::Fourier { coeffs };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: &ComplexValue| z.re.is_finite() && z.im.is_finite();
        match self {
            Self::Constant { c } if !finite(c) => {
                Err(Error::InvalidFunction("non-finite constant".into()))
            }
            Self::Fourier { coeffs } => {
                for (k, v) in coeffs {
                    if k.abs() > MAX_FOURIER_INDEX {
                        return Err(Error::InvalidFunction(format!(
                            "Fourier index {k} exceeds {MAX_FOURIER_INDEX}"
                        )));
                    }
                    if !finite(v) {
                        return Err(Error::InvalidFunction(format!(
                            "non-finite Fourier coefficient at k = {k}"
                        )));
                    }
                }
                Ok(())
            }
            Self::RotationPower { beta, k } => {
                if !finite(beta) || (beta.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidFunction(format!(
                        "rotation factor must be unimodular, |beta| = {}",
                        beta.norm()
                    )));
                }
                if k.abs() > MAX_FOURIER_INDEX {
                    return Err(Error::InvalidFunction(format!("power {k} too large")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Value at `e^{it}`.
    pub fn eval(&self, t: f64) -> ComplexValue {
        match self {
            Self::Constant { c } => *c,
            Self::Fourier { coeffs } => coeffs
                .iter()
                .map(|(&k, &c)| c * Complex64::from_polar(1.0, k as f64 * t))
                .sum(),
            Self::RotationPower { beta, k } => beta * Complex64::from_polar(1.0, *k as f64 * t),
        }
    }

    /// Non-zero Fourier modes `(k, c_k)`; every variant is a trigonometric
    /// polynomial.
    pub fn fourier_modes(&self) -> Vec<(i64, ComplexValue)> {
        match self {
            Self::Constant { c } => vec![(0, *c)],
            Self::Fourier { coeffs } => coeffs
                .iter()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(&k, &c)| (k, c))
                .collect(),
            Self::RotationPower { beta, k } => vec![(*k, *beta)],
        }
    }

    /// Largest `|k|` carried by the function.
    pub fn bandwidth(&self) -> usize {
        self.fourier_modes()
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `sup |f|` on the circle: exact for constants and rotations, otherwise
    /// dense sampling plus golden-section refinement around the best sample.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant { c } => c.norm(),
            Self::RotationPower { beta, .. } => beta.norm(),
            Self::Fourier { .. } => {
                let h = TAU / NORM_SAMPLES as f64;
                let f = |t: f64| self.eval(t).norm();
                let (best_t, best) = (0..NORM_SAMPLES)
                    .map(|j| {
                        let t = h * j as f64;
                        (t, f(t))
                    })
                    .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                let (_, refined) = golden_max(f, best_t - h, best_t + h);
                best.max(refined)
            }
        }
    }
}

/// A continuous function on the closed disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceFunction {
    Constant {
        #[serde(with = "cx")]
        c: ComplexValue,
    },
    /// `c |z|^p z^q`, where `z^q` means `conj(z)^{-q}` for `q < 0`; `p` may be
    /// negative as long as `p + |q| > 0`.
    RadialMonomial {
        #[serde(with = "cx")]
        c: ComplexValue,
        p: f64,
        q: i32,
    },
}

impl SourceFunction {
    pub fn constant(c: ComplexValue) -> Self {
        Self::Constant { c }
    }

    pub fn radial_monomial(c: ComplexValue, p: f64, q: i32) -> Result<Self> {
        let f = Self::RadialMonomial { c, p, q };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { c } if !(c.re.is_finite() && c.im.is_finite()) => {
                Err(Error::InvalidFunction("non-finite constant".into()))
            }
            Self::RadialMonomial { c, p, q } => {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::InvalidFunction("non-finite coefficient".into()));
                }
                // |g| = |c| |z|^{p+|q|}: continuity at 0 needs p + |q| > 0
                // unless g is the constant c (p = q = 0)
                let growth = p + q.unsigned_abs() as f64;
                if !p.is_finite() || !(growth > 0.0 || (*p == 0.0 && *q == 0)) {
                    return Err(Error::InvalidFunction(format!(
                        "c |z|^{p} z^{q} is not continuous at the origin"
                    )));
                }
                if q.abs() > 64 {
                    return Err(Error::InvalidFunction(format!("angular power {q} too large")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Value at a point of the closed disk.
    pub fn eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "source evaluated at |z| = {} outside the closed disk",
                z.norm()
            )));
        }
        Ok(self.eval_raw(z))
    }

    #[inline]
    pub(crate) fn eval_raw(&self, z: ComplexValue) -> ComplexValue {
        match self {
            Self::Constant { c } => *c,
            Self::RadialMonomial { c, p, q } => {
                let r2 = z.norm_sqr();
                if r2 == 0.0 {
                    return if *p == 0.0 && *q == 0 { *c } else { Complex64::new(0.0, 0.0) };
                }
                let radial = if *p == 0.0 { 1.0 } else { r2.powf(0.5 * p) };
                let angular = if *q >= 0 { z.powi(*q) } else { z.conj().powi(-q) };
                c * radial * angular
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Constant { c } | Self::RadialMonomial { c, .. } => c.norm_sqr() == 0.0,
        }
    }

    /// `sup |g|` on the closed disk. `|g|` depends on `|z|` only, so the
    /// search runs over radii: dense samples, then golden-section refinement.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant { c } => c.norm(),
            Self::RadialMonomial { .. } => {
                let h = 1.0 / NORM_SAMPLES as f64;
                let f = |r: f64| self.eval_raw(Complex64::new(r.clamp(0.0, 1.0), 0.0)).norm();
                let (best_r, best) = (0..=NORM_SAMPLES)
                    .map(|j| {
                        let r = h * j as f64;
                        (r, f(r))
                    })
                    .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                let (_, refined) = golden_max(f, (best_r - h).max(0.0), (best_r + h).min(1.0));
                best.max(refined)
            }
        }
    }
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Closed-form solutions of catalog cases, valid on the closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionOracle {
    /// `f(z) = z`.
    Identity,
    /// `f(z) = β |z|^γ z`.
    PowerStretch {
        #[serde(with = "cx")]
        beta: ComplexValue,
        gamma: f64,
    },
    /// `f(z) = z + m (|z|² - |z|⁴)`.
    QuarticBump { m: f64 },
    /// `f(z) = z - c (1 - |z|²) / 4`.
    ConstantLaplacian {
        #[serde(with = "cx")]
        c: ComplexValue,
    },
}

impl SolutionOracle {
    pub fn evaluate(&self, z: ComplexValue) -> ComplexValue {
        let r2 = z.norm_sqr();
        match *self {
            Self::Identity => z,
            Self::PowerStretch { beta, gamma } => beta * r2.powf(0.5 * gamma) * z,
            Self::QuarticBump { m } => z + m * (r2 - r2 * r2),
            Self::ConstantLaplacian { c } => z - c * (1.0 - r2) / 4.0,
        }
    }

    /// Exact `(f_z, f_z̄)`.
    pub fn wirtinger(&self, z: ComplexValue) -> WirtingerPair {
        let r2 = z.norm_sqr();
        let (dz, dzb) = match *self {
            Self::Identity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Self::PowerStretch { beta, gamma } => {
                if r2 == 0.0 {
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
                } else {
                    let rg = r2.powf(0.5 * gamma);
                    (
                        beta * (0.5 * gamma + 1.0) * rg,
                        beta * (0.5 * gamma) * (rg / r2) * z * z,
                    )
                }
            }
            Self::QuarticBump { m } => {
                let w = 1.0 - 2.0 * r2;
                (1.0 + m * w * z.conj(), m * w * z)
            }
            Self::ConstantLaplacian { c } => (1.0 + c * z.conj() / 4.0, c * z / 4.0),
        };
        WirtingerPair::new(dz, dzb)
    }

    /// Exact `Δf = 4 f_{z z̄}`.
    pub fn laplacian(&self, z: ComplexValue) -> ComplexValue {
        let r2 = z.norm_sqr();
        match *self {
            Self::Identity => Complex64::new(0.0, 0.0),
            Self::PowerStretch { beta, gamma } => {
                if r2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    beta * gamma * (gamma + 2.0) * r2.powf(0.5 * gamma - 1.0) * z
                }
            }
            Self::QuarticBump { m } => Complex64::new(m * (4.0 - 16.0 * r2), 0.0),
            Self::ConstantLaplacian { c } => c,
        }
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDefinition {
    pub name: String,
    pub fstar: BoundaryFunction,
    pub phi: BoundaryFunction,
    pub g: SourceFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<SolutionOracle>,
    #[serde(default, rename = "exact_K", skip_serializing_if = "Option::is_none")]
    pub exact_k: Option<f64>,
    pub phi_norm: f64,
    pub g_norm: f64,
}

/// On-disk case description; norms are computed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFile {
    pub name: String,
    pub fstar: BoundaryFunction,
    pub phi: BoundaryFunction,
    pub g: SourceFunction,
    #[serde(default, rename = "exact_K", skip_serializing_if = "Option::is_none")]
    pub exact_k: Option<f64>,
}

impl CaseDefinition {
    /// Builds a case from user data, computing the sup norms.
    pub fn from_parts(
        name: impl Into<String>,
        fstar: BoundaryFunction,
        phi: BoundaryFunction,
        g: SourceFunction,
        exact_k: Option<f64>,
    ) -> Result<Self> {
        fstar.validate()?;
        phi.validate()?;
        g.validate()?;
        if let Some(k) = exact_k {
            if !(k >= 1.0 && k.is_finite()) {
                return Err(Error::InvalidCaseParameter(format!("exact_K = {k} must be >= 1")));
            }
        }
        let phi_norm = phi.sup_norm();
        let g_norm = g.sup_norm();
        Ok(Self {
            name: name.into(),
            fstar,
            phi,
            g,
            oracle: None,
            exact_k,
            phi_norm,
            g_norm,
        })
    }

    pub fn from_file(file: CaseFile) -> Result<Self> {
        Self::from_parts(file.name, file.fstar, file.phi, file.g, file.exact_k)
    }

    pub fn oracle(&self) -> Result<&SolutionOracle> {
        self.oracle.as_ref().ok_or_else(|| Error::NoOracle(self.name.clone()))
    }
}

/// Parameters of the named catalog cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    /// Exponent of the power-stretch example (must exceed 3).
    pub gamma: f64,
    /// Unimodular rotation factor of the power-stretch example.
    pub beta: ComplexValue,
    /// Boundary Laplacian of the constant-source case.
    pub c: ComplexValue,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            gamma: 4.0,
            beta: Complex64::new(1.0, 0.0),
            c: Complex64::new(0.1, 0.0),
        }
    }
}

impl CaseParams {
    /// Parses `key=value` pairs separated by commas. Keys: `gamma`,
    /// `beta_arg` (β = e^{i·beta_arg}), `c`, `c_im`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidCaseParameter(format!("expected key=value, got '{item}'")))?;
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidCaseParameter(format!("'{value}' is not a number"))
            })?;
            match key.trim() {
                "gamma" => p.gamma = v,
                "beta_arg" => p.beta = Complex64::from_polar(1.0, v),
                "c" => p.c.re = v,
                "c_im" => p.c.im = v,
                other => {
                    return Err(Error::InvalidCaseParameter(format!("unknown key '{other}'")))
                }
            }
        }
        Ok(p)
    }
}

/// Names accepted by [`make_case`].
pub const CASE_NAMES: [&str; 4] = ["example-4.1", "example-4.2", "identity", "constant-source"];

/// Builds a named catalog case.
pub fn make_case(name: &str, params: &CaseParams) -> Result<CaseDefinition> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match name {
        "example-4.1" => {
            let (gamma, beta) = (params.gamma, params.beta);
            if !(gamma > 3.0 && gamma.is_finite()) {
                return Err(Error::InvalidCaseParameter(format!("gamma = {gamma} must exceed 3")));
            }
            let fstar = BoundaryFunction::rotation_power(beta, 1)?;
            let phi_scale = gamma * (2.0 + gamma);
            let mut coeffs = BTreeMap::new();
            coeffs.insert(1, beta * phi_scale);
            let phi = BoundaryFunction::fourier(coeffs)?;
            // |z|^{γ-2}/conj(z) = |z|^{γ-4} z
            let g_scale = gamma * gamma * (gamma * gamma - 4.0);
            let g = SourceFunction::radial_monomial(beta * g_scale, gamma - 4.0, 1)?;
            Ok(CaseDefinition {
                name: name.into(),
                fstar,
                phi,
                g,
                oracle: Some(SolutionOracle::PowerStretch { beta, gamma }),
                exact_k: Some(1.0 + gamma),
                phi_norm: phi_scale,
                g_norm: g_scale,
            })
        }
        "example-4.2" => Ok(CaseDefinition {
            name: name.into(),
            fstar: BoundaryFunction::rotation_power(one, 1)?,
            phi: BoundaryFunction::constant(Complex64::new(-3.0 / 50.0, 0.0)),
            g: SourceFunction::constant(Complex64::new(-8.0 / 25.0, 0.0)),
            oracle: Some(SolutionOracle::QuarticBump { m: 1.0 / 200.0 }),
            exact_k: Some(100.0 / 99.0),
            phi_norm: 3.0 / 50.0,
            g_norm: 8.0 / 25.0,
        }),
        "identity" => Ok(CaseDefinition {
            name: name.into(),
            fstar: BoundaryFunction::rotation_power(one, 1)?,
            phi: BoundaryFunction::constant(zero),
            g: SourceFunction::constant(zero),
            oracle: Some(SolutionOracle::Identity),
            exact_k: Some(1.0),
            phi_norm: 0.0,
            g_norm: 0.0,
        }),
        "constant-source" => {
            let c = params.c;
            let a = c.norm();
            // sup of (|f_z|+|f_z̄|)/(|f_z|-|f_z̄|) is reached on the circle
            let exact_k = if a < 2.0 { Some(1.0 / (1.0 - 0.5 * a)) } else { None };
            Ok(CaseDefinition {
                name: name.into(),
                fstar: BoundaryFunction::rotation_power(one, 1)?,
                phi: BoundaryFunction::constant(c),
                g: SourceFunction::constant(zero),
                oracle: Some(SolutionOracle::ConstantLaplacian { c }),
                exact_k,
                phi_norm: a,
                g_norm: 0.0,
            })
        }
        other => Err(Error::UnknownCase(other.to_string())),
    }
}

/// Parses `name` or `name:key=value,...` and builds the case.
pub fn case_from_spec(spec: &str) -> Result<CaseDefinition> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), CaseParams::parse(p)?),
        None => (spec.trim(), CaseParams::default()),
    };
    make_case(name, &params)
}

/// Closed-form `(f_z, f_z̄)` of a catalog case.
pub fn oracle_wirtinger(case: &CaseDefinition, z: DiskPoint) -> Result<WirtingerPair> {
    Ok(case.oracle()?.wirtinger(z.value()))
}

/// Pointwise boundary value.
pub fn eval_boundary(b: &BoundaryFunction, t: f64) -> ComplexValue {
    b.eval(t)
}

/// Pointwise source value on the closed disk.
pub fn eval_source(s: &SourceFunction, z: ComplexValue) -> Result<ComplexValue> {
    s.eval(z)
}
