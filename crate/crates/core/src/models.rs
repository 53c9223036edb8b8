//! Kinetic energies T(p), central potentials V(r) and the auxiliary power
//! law P(r) = sgn(λ) r^λ.
//!
//! Every model carries its value together with exact first and second
//! derivatives: catalog entries are hand-coded, expression models are
//! differentiated symbolically. Construction verifies the first derivative
//! against central finite differences and checks that it is positive on the
//! working domain.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{self, EvalError, Expr};
use crate::numeric::log_space;

/// Default working interval for momenta and radii.
pub const DEFAULT_DOMAIN: Domain = Domain { lo: 1e-8, hi: 1e8 };

const CONSISTENCY_SAMPLES: usize = 50;
const CONSISTENCY_REL_TOL: f64 = 1e-6;

/// A positive interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl Default for Domain {
    fn default() -> Self {
        DEFAULT_DOMAIN
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite.into())
    }
}

/// Closed-form or symbolic one-variable function with two derivatives.
#[derive(Debug, Clone)]
enum Form {
    /// x²/(2m)
    Quadratic { mass: f64 },
    /// σ √(x² + m²)
    Relativistic { mass: f64, count: f64 },
    /// σ m exp(x²/(2m²))
    Gaussian { sigma: f64, mass: f64 },
    /// exp(k x²)
    ExpQuadratic { k: f64 },
    /// sgn(λ) a x^λ
    Power { strength: f64, exponent: f64 },
    Symbolic { f: Expr, df: Expr, d2f: Expr },
    Scaled(f64, Box<Form>),
    Sum(Box<Form>, Box<Form>),
}

impl Form {
    fn eval(&self, x: f64) -> Result<[f64; 3]> {
        let out = match self {
            Form::Quadratic { mass } => [x * x / (2.0 * mass), x / mass, 1.0 / mass],
            Form::Relativistic { mass, count } => {
                let e = x.hypot(*mass);
                if e == 0.0 {
                    return Err(EvalError::DivisionByZero.into());
                }
                [count * e, count * x / e, count * mass * mass / (e * e * e)]
            }
            Form::Gaussian { sigma, mass } => {
                let m2 = mass * mass;
                let g = sigma * mass * (x * x / (2.0 * m2)).exp();
                [g, g * x / m2, g * (1.0 / m2 + x * x / (m2 * m2))]
            }
            Form::ExpQuadratic { k } => {
                let g = (k * x * x).exp();
                [g, 2.0 * k * x * g, g * (2.0 * k + 4.0 * k * k * x * x)]
            }
            Form::Power { strength, exponent } => {
                let l = *exponent;
                let v = strength * x.powf(l);
                [l.signum() * v, l.abs() * v / x, l.abs() * (l - 1.0) * v / (x * x)]
            }
            Form::Symbolic { f, df, d2f } => [f.eval(x)?, df.eval(x)?, d2f.eval(x)?],
            Form::Scaled(c, inner) => inner.eval(x)?.map(|v| c * v),
            Form::Sum(a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            }
        };
        for v in out {
            finite(v)?;
        }
        Ok(out)
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?[0])
    }

    /// `Some((c, offset))` when the form is exactly `c x² + offset`.
    fn quadratic_part(&self) -> Option<(f64, f64)> {
        match self {
            Form::Quadratic { mass } => Some((0.5 / mass, 0.0)),
            Form::Power { strength, exponent } if *exponent == 2.0 => Some((*strength, 0.0)),
            Form::Scaled(c, inner) => inner.quadratic_part().map(|(q, o)| (c * q, c * o)),
            Form::Sum(a, b) => {
                let (qa, oa) = a.quadratic_part()?;
                let (qb, ob) = b.quadratic_part()?;
                Some((qa + qb, oa + ob))
            }
            Form::Symbolic { .. } => {
                // f'/(2x) constant and f'' = 2c at a spread of points
                let xs = [0.37, 1.0, 2.9, 11.0];
                let c = self.eval(1.0).ok()?[1] / 2.0;
                for x in xs {
                    let [_, d1, d2] = self.eval(x).ok()?;
                    let tol = 1e-12 * c.abs().max(1e-300);
                    if (d1 / (2.0 * x) - c).abs() > tol || (d2 / 2.0 - c).abs() > tol {
                        return None;
                    }
                }
                let offset = self.value(1.0).ok()? - c;
                Some((c, offset))
            }
            _ => None,
        }
    }
}

/// Shared body of kinetic and potential models.
#[derive(Debug, Clone)]
struct Profile {
    form: Form,
    domain: Domain,
    tag: String,
}

impl Profile {
    fn checked(form: Form, domain: Domain, tag: String, what: &str) -> Result<Self> {
        let profile = Self { form, domain, tag };
        profile.verify(what)?;
        Ok(profile)
    }

    /// Derivative consistency and positivity on log-spaced samples. Samples
    /// where the model overflows are skipped.
    fn verify(&self, what: &str) -> Result<()> {
        let eps = f64::EPSILON;
        let mut usable = 0;
        for x in log_space(self.domain.lo, self.domain.hi, CONSISTENCY_SAMPLES) {
            let h = 1e-6 * x;
            let (Ok([f, df, _]), Ok(fp), Ok(fm)) = (
                self.form.eval(x),
                self.form.value(x + h),
                self.form.value(x - h),
            ) else {
                continue;
            };
            usable += 1;
            let numeric = (fp - fm) / (2.0 * h);
            let rounding = 8.0 * eps * f.abs().max(fp.abs()) / h;
            if (numeric - df).abs() > CONSISTENCY_REL_TOL * df.abs() + rounding {
                return Err(Error::InconsistentDerivative {
                    what: format!("{what} '{}'", self.tag),
                    x,
                    analytic: df,
                    numeric,
                });
            }
            if df <= 0.0 {
                return Err(Error::NonPositiveDerivative {
                    what: format!("{what} '{}'", self.tag),
                    x,
                    value: df,
                });
            }
        }
        if usable == 0 {
            return Err(Error::OutOfDomain(format!(
                "{what} '{}' cannot be evaluated anywhere on [{}, {}]",
                self.tag, self.domain.lo, self.domain.hi
            )));
        }
        Ok(())
    }
}

fn symbolic(source: &str, variable: &str, constants: &[(&str, f64)]) -> Result<Form> {
    let f = expr::parse_with_constants(source, variable, constants)?;
    let df = f.derivative();
    let d2f = df.derivative();
    Ok(Form::Symbolic { f, df, d2f })
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason: "must be positive",
        })
    }
}

macro_rules! model_common {
    ($ty:ident, $what:literal, $var:literal) => {
        impl $ty {
            pub fn tag(&self) -> &str {
                &self.0.tag
            }

            pub fn domain(&self) -> Domain {
                self.0.domain
            }

            /// Same model restricted to another working interval.
            pub fn with_domain(&self, domain: Domain) -> Result<Self> {
                Profile::checked(self.0.form.clone(), domain, self.0.tag.clone(), $what).map($ty)
            }

            /// The model multiplied by a positive constant.
            pub fn scaled(&self, factor: f64) -> Result<Self> {
                positive("scale", factor)?;
                Profile::checked(
                    Form::Scaled(factor, Box::new(self.0.form.clone())),
                    self.0.domain,
                    format!("{factor}*({})", self.0.tag),
                    $what,
                )
                .map($ty)
            }

            /// Builds the model from an expression in the variable
            #[doc = concat!("`", $var, "`")]
            /// with optional named constants.
            pub fn from_expr(source: &str, constants: &[(&str, f64)]) -> Result<Self> {
                Profile::checked(
                    symbolic(source, $var, constants)?,
                    DEFAULT_DOMAIN,
                    source.trim().to_string(),
                    $what,
                )
                .map($ty)
            }

            pub fn value(&self, x: f64) -> Result<f64> {
                self.0.form.value(x)
            }

            pub fn derivative(&self, x: f64) -> Result<f64> {
                Ok(self.0.form.eval(x)?[1])
            }

            pub fn second_derivative(&self, x: f64) -> Result<f64> {
                Ok(self.0.form.eval(x)?[2])
            }

            /// `[f, f', f'']` in one evaluation.
            pub fn eval_all(&self, x: f64) -> Result<[f64; 3]> {
                self.0.form.eval(x)
            }

            /// `Some((c, offset))` when the model is exactly `c x² + offset`.
            pub fn quadratic_part(&self) -> Option<(f64, f64)> {
                self.0.form.quadratic_part()
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.tag)
            }
        }
    };
}

/// A dispersion relation T(p) with its derivatives.
#[derive(Debug, Clone)]
pub struct KineticModel(Profile);

/// A central potential V(r) with its derivatives.
#[derive(Debug, Clone)]
pub struct PotentialModel(Profile);

model_common!(KineticModel, "kinetic model", "p");
model_common!(PotentialModel, "potential model", "r");

impl KineticModel {
    fn catalog(form: Form, tag: String) -> Result<Self> {
        Profile::checked(form, DEFAULT_DOMAIN, tag, "kinetic model").map(KineticModel)
    }

    /// p²/(2m)
    pub fn quadratic(mass: f64) -> Result<Self> {
        let mass = positive("m", mass)?;
        Self::catalog(Form::Quadratic { mass }, format!("quadratic m={mass}"))
    }

    /// σ √(p² + m²); `mass` may be zero.
    pub fn relativistic(mass: f64, count: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m".into(),
                value: mass,
                reason: "must be non-negative",
            });
        }
        let count = positive("count", count)?;
        Self::catalog(
            Form::Relativistic { mass, count },
            format!("relativistic m={mass} count={count}"),
        )
    }

    /// σ p
    pub fn ultrarelativistic(count: f64) -> Result<Self> {
        let count = positive("count", count)?;
        Self::catalog(
            Form::Relativistic { mass: 0.0, count },
            format!("ultrarelativistic count={count}"),
        )
    }

    /// σ m exp(p²/(2m²))
    pub fn gaussian(sigma: f64, mass: f64) -> Result<Self> {
        let sigma = positive("sigma", sigma)?;
        let mass = positive("m", mass)?;
        Self::catalog(
            Form::Gaussian { sigma, mass },
            format!("gaussian sigma={sigma} m={mass}"),
        )
    }

    /// exp(k p²), the dimensionless Gaussian dispersion.
    pub fn exp_quadratic(k: f64) -> Result<Self> {
        let k = positive("k", k)?;
        Self::catalog(Form::ExpQuadratic { k }, format!("toy k={k}"))
    }

    /// `T1 + T2` for two-body systems sharing one momentum modulus.
    pub fn sum(a: &KineticModel, b: &KineticModel) -> Result<Self> {
        let domain = Domain::new(a.0.domain.lo.max(b.0.domain.lo), a.0.domain.hi.min(b.0.domain.hi))?;
        Profile::checked(
            Form::Sum(Box::new(a.0.form.clone()), Box::new(b.0.form.clone())),
            domain,
            format!("({}) + ({})", a.0.tag, b.0.tag),
            "kinetic model",
        )
        .map(KineticModel)
    }
}

impl PotentialModel {
    fn catalog(form: Form, tag: String) -> Result<Self> {
        Profile::checked(form, DEFAULT_DOMAIN, tag, "potential model").map(PotentialModel)
    }

    /// sgn(λ) a r^λ
    pub fn power(strength: f64, exponent: f64) -> Result<Self> {
        let strength = positive("a", strength)?;
        if exponent == 0.0 || !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda".into(),
                value: exponent,
                reason: "must be finite and non-zero",
            });
        }
        Self::catalog(
            Form::Power { strength, exponent },
            format!("power a={strength} lambda={exponent}"),
        )
    }

    /// −e²/r
    pub fn coulomb(e2: f64) -> Result<Self> {
        let e2 = positive("e2", e2)?;
        Self::catalog(
            Form::Power {
                strength: e2,
                exponent: -1.0,
            },
            format!("coulomb e2={e2}"),
        )
    }

    /// a r
    pub fn linear(a: f64) -> Result<Self> {
        let a = positive("a", a)?;
        Self::catalog(
            Form::Power {
                strength: a,
                exponent: 1.0,
            },
            format!("linear a={a}"),
        )
    }

    /// a r²
    pub fn harmonic(a: f64) -> Result<Self> {
        let a = positive("a", a)?;
        Self::catalog(
            Form::Power {
                strength: a,
                exponent: 2.0,
            },
            format!("harmonic a={a}"),
        )
    }

    /// `Some((a, λ))` when the potential is exactly sgn(λ) a r^λ.
    pub fn as_power_law(&self) -> Option<(f64, f64)> {
        match &self.0.form {
            Form::Power { strength, exponent } => Some((*strength, *exponent)),
            Form::Scaled(c, inner) => match &**inner {
                Form::Power { strength, exponent } => Some((c * strength, *exponent)),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Kinetic catalog lookup with positional parameters.
///
/// | name | parameters |
/// |---|---|
/// | `quadratic` | m |
/// | `relativistic` | m, count |
/// | `ultrarelativistic` | count |
/// | `gaussian` | sigma, m |
/// | `toy` | k |
///
/// Missing trailing parameters default to 1 (m = 1 also for `relativistic`).
pub fn catalog_kinetic(name: &str, params: &[f64]) -> Result<KineticModel> {
    let arity = kinetic_keys(name)?.len();
    let p = fill_params(name, params, arity)?;
    match name {
        "quadratic" => KineticModel::quadratic(p[0]),
        "relativistic" => KineticModel::relativistic(p[0], p[1]),
        "ultrarelativistic" => KineticModel::ultrarelativistic(p[0]),
        "gaussian" => KineticModel::gaussian(p[0], p[1]),
        "toy" => KineticModel::exp_quadratic(p[0]),
        _ => unreachable!("validated by kinetic_keys"),
    }
}

/// Potential catalog lookup with positional parameters.
///
/// | name | parameters |
/// |---|---|
/// | `power` | a, lambda |
/// | `coulomb` | e2 |
/// | `linear` | a |
/// | `harmonic` | a |
pub fn catalog_potential(name: &str, params: &[f64]) -> Result<PotentialModel> {
    let arity = potential_keys(name)?.len();
    let p = fill_params(name, params, arity)?;
    match name {
        "power" => PotentialModel::power(p[0], p[1]),
        "coulomb" => PotentialModel::coulomb(p[0]),
        "linear" => PotentialModel::linear(p[0]),
        "harmonic" => PotentialModel::harmonic(p[0]),
        _ => unreachable!("validated by potential_keys"),
    }
}

fn kinetic_keys(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "quadratic" => &["m"],
        "relativistic" => &["m", "count"],
        "ultrarelativistic" => &["count"],
        "gaussian" => &["sigma", "m"],
        "toy" => &["k"],
        _ => return Err(Error::UnknownModel(name.to_string())),
    })
}

fn potential_keys(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "power" => &["a", "lambda"],
        "coulomb" => &["e2"],
        "linear" | "harmonic" => &["a"],
        _ => return Err(Error::UnknownModel(name.to_string())),
    })
}

fn fill_params(name: &str, params: &[f64], arity: usize) -> Result<Vec<f64>> {
    if params.len() > arity {
        return Err(Error::InvalidParameter {
            name: format!("{name}[{}]", arity),
            value: params[arity],
            reason: "too many parameters",
        });
    }
    let mut out = vec![1.0; arity];
    out[..params.len()].copy_from_slice(params);
    Ok(out)
}

/// Parses `"name key=value ..."`, e.g. `"gaussian sigma=2 m=1"`.
pub fn parse_kinetic_spec(spec: &str) -> Result<KineticModel> {
    let (name, params) = parse_spec(spec, kinetic_keys)?;
    catalog_kinetic(&name, &params)
}

/// Parses `"name key=value ..."`, e.g. `"coulomb e2=1"`.
pub fn parse_potential_spec(spec: &str) -> Result<PotentialModel> {
    let (name, params) = parse_spec(spec, potential_keys)?;
    catalog_potential(&name, &params)
}

fn parse_spec(
    spec: &str,
    keys_for: fn(&str) -> Result<&'static [&'static str]>,
) -> Result<(String, Vec<f64>)> {
    let mut words = spec.split_whitespace();
    let name = words
        .next()
        .ok_or_else(|| Error::Config("empty model specification".into()))?
        .to_string();
    let keys = keys_for(&name)?;
    let mut values: Vec<Option<f64>> = vec![None; keys.len()];
    for word in words {
        let (key, raw) = word
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{word}'")))?;
        // `sigma` is accepted as an alias for the particle count
        let key = if key == "sigma" && !keys.contains(&"sigma") {
            "count"
        } else {
            key
        };
        let slot = keys
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::UnknownParameter {
                model: name.clone(),
                key: key.to_string(),
            })?;
        let value = raw
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("'{raw}' is not a number (key {key})")))?;
        values[slot] = Some(value);
    }
    Ok((name, values.into_iter().map(|v| v.unwrap_or(1.0)).collect()))
}

/// The auxiliary potential P(r) = sgn(λ) r^λ with −2 < λ ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryPowerLaw {
    lambda: f64,
}

impl AuxiliaryPowerLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > -2.0) || lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidLambda(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sign(&self) -> f64 {
        self.lambda.signum()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.sign() * r.powf(self.lambda)
    }

    /// |λ| r^(λ−1), positive for all admissible λ.
    pub fn derivative(&self, r: f64) -> f64 {
        self.lambda.abs() * r.powf(self.lambda - 1.0)
    }

    /// P⁻¹(y) = (sgn(λ) y)^(1/λ), defined for sgn(λ) y > 0.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let s = self.sign() * y;
        if !(s > 0.0) {
            return Err(Error::OutOfDomain(format!(
                "{y} is outside the range of P for lambda = {}",
                self.lambda
            )));
        }
        finite(s.powf(1.0 / self.lambda))
    }
}
