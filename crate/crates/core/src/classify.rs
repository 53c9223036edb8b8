//! Variational character of the envelope energy.
//!
//! With `T(x) = h(x²)` and `V(x) = g(P(x))`, convex `h` and `g` put the
//! tangent Hamiltonian below `H` (lower bound); concave ones put it above
//! (upper bound). Affine transforms are neutral, and both affine means the
//! tangent construction reproduces `H` itself.

use std::fmt;

use crate::error::{Error, Result};
use crate::models::{AuxiliaryPowerLaw, Domain, KineticModel, PotentialModel};
use crate::numeric::log_space;

pub const CLASSIFY_SAMPLES: usize = 400;
const REL_STEP: f64 = 1e-4;
const TOLERANCE: f64 = 1e-9;
const MIN_USABLE_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundClass {
    Lower,
    Upper,
    Exact,
    Indeterminate,
}

impl BoundClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundClass::Lower => "lower",
            BoundClass::Upper => "upper",
            BoundClass::Exact => "exact",
            BoundClass::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for BoundClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    H,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Convex,
    Concave,
    Affine,
    Mixed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Convex => "convex",
            Verdict::Concave => "concave",
            Verdict::Affine => "affine",
            Verdict::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub function: Transform,
    pub verdict: Verdict,
    pub samples: usize,
    /// Largest normalized second difference contradicting the verdict (for
    /// `Affine`, the largest of either sign).
    pub max_violation: f64,
}

/// Momentum and radius intervals over which h and g are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDomain {
    pub momentum: Domain,
    pub radius: Domain,
}

impl SampleDomain {
    pub fn of_models(t: &KineticModel, v: &PotentialModel) -> Self {
        Self {
            momentum: t.domain(),
            radius: v.domain(),
        }
    }
}

/// h(s) = T(√s).
pub fn h_of(t: &KineticModel, s: f64) -> Result<f64> {
    let p = s.sqrt();
    if !(s > 0.0) || !t.domain().contains(p) {
        return Err(Error::OutOfDomain(format!(
            "sqrt({s}) is outside the kinetic working domain"
        )));
    }
    t.value(p)
}

/// g(y) = V(P⁻¹(y)).
pub fn g_of(v: &PotentialModel, aux: &AuxiliaryPowerLaw, y: f64) -> Result<f64> {
    let r = aux.inverse(y)?;
    if !v.domain().contains(r) {
        return Err(Error::OutOfDomain(format!(
            "P^-1({y}) = {r} is outside the potential working domain"
        )));
    }
    v.value(r)
}

fn check_sampleable(d: &Domain) -> Result<()> {
    if d.hi / d.lo < 1.0 + 1e-2 {
        return Err(Error::OutOfDomain(format!(
            "interval [{}, {}] too narrow to sample",
            d.lo, d.hi
        )));
    }
    Ok(())
}

fn report<F>(function: Transform, points: impl Iterator<Item = f64>, f: F) -> Result<ConvexityReport>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut samples = 0;
    let (mut pos, mut neg) = (0.0f64, 0.0f64);
    for x in points {
        let step = REL_STEP * x.abs();
        let (Ok(fm), Ok(f0), Ok(fp)) = (f(x - step), f(x), f(x + step)) else {
            continue;
        };
        let d = (fp - 2.0 * f0 + fm) / f0.abs().max(1.0);
        if !d.is_finite() {
            continue;
        }
        samples += 1;
        pos = pos.max(d);
        neg = neg.max(-d);
    }
    if samples < MIN_USABLE_SAMPLES {
        return Err(Error::OutOfDomain(format!(
            "only {samples} usable samples for convexity test"
        )));
    }
    let (verdict, max_violation) = match (pos > TOLERANCE, neg > TOLERANCE) {
        (false, false) => (Verdict::Affine, pos.max(neg)),
        (true, false) => (Verdict::Convex, neg),
        (false, true) => (Verdict::Concave, pos),
        (true, true) => (Verdict::Mixed, pos.min(neg)),
    };
    Ok(ConvexityReport {
        function,
        verdict,
        samples,
        max_violation,
    })
}

/// Convexity of h over squared momenta in `momentum`.
pub fn convexity_of_h(t: &KineticModel, momentum: &Domain) -> Result<ConvexityReport> {
    check_sampleable(momentum)?;
    // keep the stencil inside the domain
    let lo = (momentum.lo * momentum.lo) * (1.0 + 2.0 * REL_STEP);
    let hi = (momentum.hi * momentum.hi) * (1.0 - 2.0 * REL_STEP);
    let points = log_space(lo, hi, CLASSIFY_SAMPLES);
    report(Transform::H, points.into_iter(), |s| h_of(t, s))
}

/// Convexity of g over P(r) for r in `radius`.
pub fn convexity_of_g(
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    radius: &Domain,
) -> Result<ConvexityReport> {
    check_sampleable(radius)?;
    // shrink so that P⁻¹ of the stencil stays in the domain
    let margin = (1.0 + 4.0 * REL_STEP).powf(1.0 / aux.lambda().abs());
    let lo = radius.lo * margin;
    let hi = radius.hi / margin;
    if !(hi > lo) {
        return Err(Error::OutOfDomain("radius interval too narrow".into()));
    }
    let points = log_space(lo, hi, CLASSIFY_SAMPLES);
    report(Transform::G, points.into_iter().map(|r| aux.value(r)), |y| {
        g_of(v, aux, y)
    })
}

/// Bound class from the two convexity verdicts.
pub fn combine(h: Verdict, g: Verdict) -> BoundClass {
    use Verdict::*;
    match (h, g) {
        (Affine, Affine) => BoundClass::Exact,
        (Convex | Affine, Convex | Affine) => BoundClass::Lower,
        (Concave | Affine, Concave | Affine) => BoundClass::Upper,
        _ => BoundClass::Indeterminate,
    }
}

/// Both reports and the resulting class.
pub fn classify_with_reports(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    domain: &SampleDomain,
) -> Result<(BoundClass, ConvexityReport, ConvexityReport)> {
    let h = convexity_of_h(t, &domain.momentum)?;
    let g = convexity_of_g(v, aux, &domain.radius)?;
    Ok((combine(h.verdict, g.verdict), h, g))
}

pub fn classify_bound(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    domain: &SampleDomain,
) -> Result<BoundClass> {
    classify_with_reports(t, v, aux, domain).map(|(class, _, _)| class)
}
