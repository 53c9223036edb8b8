//! Shared fixtures for the benchmarks.

use kinbound::models::{AuxiliaryPowerLaw, KineticModel, PotentialModel};
use kinbound::qnumbers::QuantumState;
use kinbound::toy::toy_models;

/// Toy model at k with the harmonic auxiliary potential and Q for (n, l).
pub fn toy_problem(k: f64, n: u32, l: u32) -> (KineticModel, PotentialModel, AuxiliaryPowerLaw, QuantumState) {
    let (t, v) = toy_models(k).expect("valid k");
    let aux = AuxiliaryPowerLaw::new(2.0).expect("valid lambda");
    let state = kinbound::qnumbers::q_exact(2.0, n, l).expect("closed-form Q");
    (t, v, aux, state)
}
