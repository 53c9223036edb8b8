//! Classical reading of the envelope equations: circular orbits of one or
//! two particles bound by `V(r)`, with angular momentum `r0 p0 = l + 1/2`.

use crate::envelope::{solve_stationary, EnvelopeOptions};
use crate::error::{Error, Result};
use crate::models::{KineticModel, PotentialModel};

/// p / T'(p), the mass for which p = m v with v = T'(p).
pub fn effective_mass(t: &KineticModel, p: f64) -> Result<f64> {
    let d = t.derivative(p)?;
    if d <= 0.0 {
        return Err(Error::NonPositiveDerivative {
            what: format!("kinetic model '{t}'"),
            x: p,
            value: d,
        });
    }
    Ok(p / d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleOrbit {
    /// distance to the centre of rotation
    pub radius: f64,
    pub speed: f64,
    pub effective_mass: f64,
    /// centripetal force p0 v / radius
    pub force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSolution {
    pub l: u32,
    pub q: f64,
    pub r0: f64,
    pub p0: f64,
    pub energy: f64,
    /// V'(r0)
    pub force: f64,
    pub first: ParticleOrbit,
    /// `None` for a single particle around a fixed centre.
    pub second: Option<ParticleOrbit>,
    pub residual: f64,
}

fn particle(t: &KineticModel, p0: f64, r0: f64, total_speed: f64) -> Result<ParticleOrbit> {
    let speed = t.derivative(p0)?;
    let radius = r0 * speed / total_speed;
    Ok(ParticleOrbit {
        radius,
        speed,
        effective_mass: effective_mass(t, p0)?,
        force: p0 * speed / radius,
    })
}

/// Circular orbit with `T = T1 + T2`, `Q = l + 1/2`. Both particles share
/// the momentum modulus p0 and the angular velocity, so the separation
/// splits as `r_i = r0 T_i'(p0) / T'(p0)`.
pub fn solve_orbit(
    t1: &KineticModel,
    t2: Option<&KineticModel>,
    v: &PotentialModel,
    l: u32,
) -> Result<OrbitSolution> {
    let total = match t2 {
        Some(t2) => KineticModel::sum(t1, t2)?,
        None => t1.clone(),
    };
    let q = l as f64 + 0.5;
    let st = solve_stationary(&total, v, q, &EnvelopeOptions::default())?;
    let total_speed = total.derivative(st.p0)?;
    Ok(OrbitSolution {
        l,
        q,
        r0: st.r0,
        p0: st.p0,
        energy: st.energy,
        force: v.derivative(st.r0)?,
        first: particle(t1, st.p0, st.r0, total_speed)?,
        second: t2.map(|t2| particle(t2, st.p0, st.r0, total_speed)).transpose()?,
        residual: st.residual,
    })
}
