//! Global quantum number Q of the power-law problem `p²/(2ν) + ρ sgn(λ) r^λ`.

use std::fmt;

use crate::error::{Error, Result};
use crate::models::{AuxiliaryPowerLaw, KineticModel, PotentialModel};
use crate::oracle::{self, OracleConfig};
use crate::special::airy_zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    ExactCoulomb,
    ExactHarmonic,
    AiryLinear,
    Numeric,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ExactCoulomb => "exact-coulomb",
            Provenance::ExactHarmonic => "exact-harmonic",
            Provenance::AiryLinear => "airy-linear",
            Provenance::Numeric => "numeric",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    pub n: u32,
    pub l: u32,
    pub q: f64,
    pub provenance: Provenance,
}

impl QuantumState {
    /// A state with a caller-supplied Q (semiclassical values, scans).
    pub fn with_q(n: u32, l: u32, q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "Q".into(),
                value: q,
                reason: "must be positive",
            });
        }
        Ok(Self {
            n,
            l,
            q,
            provenance: Provenance::Numeric,
        })
    }
}

/// Q for the exactly solvable families: Coulomb (λ = −1), harmonic (λ = 2)
/// and linear with l = 0 (λ = 1, from the Airy zeros). `None` otherwise.
///
/// For the linear case `p² /(2ν) + ρ r` has eigenvalues
/// `−α_n (ρ²/(2ν))^(1/3)`, and matching the power-law formula gives
/// `Q = 2 (−α_n/3)^(3/2)`.
pub fn q_exact(lambda: f64, n: u32, l: u32) -> Option<QuantumState> {
    let (q, provenance) = if lambda == -1.0 {
        ((n + l + 1) as f64, Provenance::ExactCoulomb)
    } else if lambda == 2.0 {
        (2.0 * n as f64 + l as f64 + 1.5, Provenance::ExactHarmonic)
    } else if lambda == 1.0 && l == 0 {
        let alpha = airy_zero(n as usize).ok()?.alpha;
        (2.0 * (-alpha / 3.0).powf(1.5), Provenance::AiryLinear)
    } else {
        return None;
    };
    Some(QuantumState { n, l, q, provenance })
}

/// Inverts the power-law energy at ν = ρ = 1.
pub fn q_from_epsilon(lambda: f64, epsilon: f64) -> Result<f64> {
    let aux = AuxiliaryPowerLaw::new(lambda)?;
    let l = aux.lambda();
    let base = 2.0 * l * epsilon / ((l + 2.0) * l.abs().powf(2.0 / (l + 2.0)));
    if !(base > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "energy {epsilon} is not attainable for lambda = {lambda}"
        )));
    }
    Ok(base.powf((l + 2.0) / (2.0 * l)))
}

/// Q obtained by solving `p²/2 + sgn(λ) r^λ` with the oracle and inverting
/// the power-law formula.
pub fn q_numeric(lambda: f64, n: u32, l: u32, cfg: &OracleConfig) -> Result<QuantumState> {
    AuxiliaryPowerLaw::new(lambda)?;
    let t = KineticModel::quadratic(1.0)?;
    let v = PotentialModel::power(1.0, lambda)?;
    // only the states up to n: higher ones need not fit on the grid
    let cfg = OracleConfig {
        states: n as usize + 1,
        ..cfg.clone()
    };
    let spectrum = oracle::solve(&t, &v, l, &cfg)?;
    spectrum.require_converged(cfg.tolerance)?;
    let q = q_from_epsilon(lambda, spectrum.eigenvalues[n as usize])?;
    Ok(QuantumState {
        n,
        l,
        q,
        provenance: Provenance::Numeric,
    })
}

/// q_exact when available, q_numeric otherwise.
pub fn resolve(lambda: f64, n: u32, l: u32, cfg: &OracleConfig) -> Result<QuantumState> {
    match q_exact(lambda, n, l) {
        Some(s) => Ok(s),
        None => q_numeric(lambda, n, l, cfg),
    }
}
