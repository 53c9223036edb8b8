//! The envelope (auxiliary-field) approximation for `H = T(p) + V(r)`.
//!
//! `H` is replaced by the tangent Hamiltonian
//!
//! ```text
//! T̃ = p²/(2ν) + T(J(ν)) − J(ν)²/(2ν)
//! Ṽ = ρ P(r) + V(I(ρ)) − ρ P(I(ρ))
//! ```
//!
//! with `K = V'/P'`, `L = p/T'`, `I = K⁻¹`, `J = L⁻¹` and the power law
//! `P(r) = sgn(λ) r^λ`. Its eigenvalue `E(ν, ρ)` is made stationary in both
//! parameters. At the stationary point the problem collapses to
//!
//! ```text
//! E  = T(p0) + V(r0)
//! p0 = Q / r0
//! p0 T'(p0) = r0 V'(r0)
//! ```
//!
//! which [`solve_envelope`] solves as a single scalar root-find in `r0`.

use crate::classify::{classify_bound, SampleDomain};
use crate::error::{Error, Result};
use crate::models::{AuxiliaryPowerLaw, Domain, KineticModel, PotentialModel};
use crate::numeric::{bisect, log_space, sign_changes, Bracket};
use crate::qnumbers::QuantumState;

pub use crate::classify::BoundClass;

const SCAN_POINTS: usize = 200;
const BISECTION_REL_TOL: f64 = 1e-13;
const NEWTON_STEPS: usize = 3;
const RESIDUAL_TOL: f64 = 1e-10;
const DEGENERACY_SAMPLES: usize = 64;
const DEGENERACY_REL_TOL: f64 = 1e-12;
/// Relative distance from the fixed parameter tolerated for a degenerate map.
const DEGENERATE_PARAM_TOL: f64 = 1e-9;

/// Which root of the virial equation to keep when several exist.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RootSelection {
    /// More than one root is an error.
    #[default]
    Unique,
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    pub root_selection: RootSelection,
    pub scan_points: usize,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            root_selection: RootSelection::Unique,
            scan_points: SCAN_POINTS,
        }
    }
}

/// Solution of the reduced system for one global quantum number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationary {
    pub q: f64,
    pub r0: f64,
    pub p0: f64,
    pub energy: f64,
    /// |p0 T'(p0) − r0 V'(r0)|
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSolution {
    pub state: QuantumState,
    pub r0: f64,
    pub p0: f64,
    /// p0 / T'(p0)
    pub nu0: f64,
    /// V'(r0) / (|λ| r0^(λ−1))
    pub rho0: f64,
    pub energy: f64,
    pub residual: f64,
    pub bound: BoundClass,
}

/// p T'(p) − r V'(r) with p = Q/r, and its r-derivative.
fn virial_mismatch(t: &KineticModel, v: &PotentialModel, q: f64, r: f64) -> Result<(f64, f64)> {
    let p = q / r;
    let [_, dt, d2t] = t.eval_all(p)?;
    let [_, dv, d2v] = v.eval_all(r)?;
    let f = p * dt - r * dv;
    let df = -(q / (r * r)) * (dt + p * d2t) - dv - r * d2v;
    Ok((f, df))
}

/// Radii for which both r and Q/r lie in the working domains.
fn radius_window(t: &KineticModel, v: &PotentialModel, q: f64) -> Result<Domain> {
    let (pd, rd) = (t.domain(), v.domain());
    Domain::new(rd.lo.max(q / pd.hi), rd.hi.min(q / pd.lo))
        .map_err(|_| Error::NoSolution(format!("no radius keeps r and {q}/r inside the working domains")))
}

/// Solves `p0 = Q/r0`, `p0 T'(p0) = r0 V'(r0)` and returns the energy
/// `T(p0) + V(r0)`.
pub fn solve_stationary(
    t: &KineticModel,
    v: &PotentialModel,
    q: f64,
    options: &EnvelopeOptions,
) -> Result<Stationary> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "Q".into(),
            value: q,
            reason: "must be positive",
        });
    }
    let window = radius_window(t, v, q)?;
    let grid = log_space(window.lo, window.hi, options.scan_points.max(2));
    let f = |r: f64| virial_mismatch(t, v, q, r).map(|(f, _)| f);
    let brackets = sign_changes(&grid, f);

    let bracket: Bracket = match (brackets.len(), options.root_selection) {
        (0, _) => {
            return Err(Error::NoSolution(format!(
                "p T'(p) - r V'(r) keeps one sign on r in [{}, {}] for Q = {q}",
                window.lo, window.hi
            )))
        }
        (1, _) => brackets[0],
        (_, RootSelection::Unique) => {
            let roots = brackets
                .iter()
                .map(|b| bisect(*b, BISECTION_REL_TOL, f))
                .collect::<Result<Vec<_>>>()?;
            return Err(Error::Ambiguous { roots });
        }
        (_, RootSelection::Smallest) => brackets[0],
        (_, RootSelection::Largest) => brackets[brackets.len() - 1],
    };

    let mut r0 = bisect(bracket, BISECTION_REL_TOL, f)?;
    let (lo, hi) = (bracket.lo, bracket.hi);
    let (mut fr, mut dfr) = virial_mismatch(t, v, q, r0)?;
    for _ in 0..NEWTON_STEPS {
        if fr == 0.0 || dfr == 0.0 {
            break;
        }
        let next = r0 - fr / dfr;
        if !(next >= lo && next <= hi) {
            break;
        }
        let (fn_, dfn) = virial_mismatch(t, v, q, next)?;
        if fn_.abs() > fr.abs() {
            break;
        }
        r0 = next;
        fr = fn_;
        dfr = dfn;
    }

    let p0 = q / r0;
    let scale = (r0 * v.derivative(r0)?).abs().max(1.0);
    let residual = fr.abs();
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::NotConverged(format!(
            "virial residual {residual} exceeds {} at r0 = {r0}",
            RESIDUAL_TOL * scale
        )));
    }
    Ok(Stationary {
        q,
        r0,
        p0,
        energy: t.value(p0)? + v.value(r0)?,
        residual,
    })
}

/// Envelope approximation for one state, with its bound classification over
/// the models' working domains.
pub fn solve_envelope(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    state: QuantumState,
) -> Result<EnvelopeSolution> {
    solve_envelope_with(t, v, aux, state, &EnvelopeOptions::default())
}

pub fn solve_envelope_with(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    state: QuantumState,
    options: &EnvelopeOptions,
) -> Result<EnvelopeSolution> {
    let st = solve_stationary(t, v, state.q, options)?;
    let bound = classify_bound(t, v, aux, &SampleDomain::of_models(t, v))
        .unwrap_or(BoundClass::Indeterminate);
    Ok(EnvelopeSolution {
        state,
        r0: st.r0,
        p0: st.p0,
        nu0: map_l(t, st.p0)?,
        rho0: map_k(v, aux, st.r0)?,
        energy: st.energy,
        residual: st.residual,
        bound,
    })
}

/// K(r) = V'(r) / P'(r)
pub fn map_k(v: &PotentialModel, aux: &AuxiliaryPowerLaw, r: f64) -> Result<f64> {
    Ok(v.derivative(r)? / aux.derivative(r))
}

/// L(p) = p / T'(p)
pub fn map_l(t: &KineticModel, p: f64) -> Result<f64> {
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

/// `Some(c)` when `f` is constant (to 1e-12 relative) across the domain.
fn constant_value(domain: &Domain, f: impl Fn(f64) -> Result<f64>) -> Option<f64> {
    let values: Vec<f64> = log_space(domain.lo, domain.hi, DEGENERACY_SAMPLES)
        .into_iter()
        .filter_map(|x| f(x).ok())
        .collect();
    let first = *values.first()?;
    let (min, max) = values
        .iter()
        .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let scale = min.abs().max(max.abs());
    (max - min <= DEGENERACY_REL_TOL * scale).then_some(first)
}

/// `Some(c)` when K ≡ c, i.e. V = c P + const.
pub fn potential_map_constant(v: &PotentialModel, aux: &AuxiliaryPowerLaw) -> Option<f64> {
    constant_value(&v.domain(), |r| map_k(v, aux, r))
}

/// `Some(m)` when L ≡ m, i.e. T = p²/(2m) + const.
pub fn kinetic_map_constant(t: &KineticModel) -> Option<f64> {
    constant_value(&t.domain(), |p| map_l(t, p))
}

fn invert(
    map: &'static str,
    domain: &Domain,
    target: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    if let Some(c) = constant_value(domain, &f) {
        return Err(Error::DegenerateMap { map, value: c });
    }
    let grid = log_space(domain.lo, domain.hi, SCAN_POINTS);
    let g = |x: f64| f(x).map(|y| y - target);
    let brackets = sign_changes(&grid, g);
    match brackets.len() {
        0 => Err(Error::OutOfDomain(format!(
            "{target} is outside the range of {map} on [{}, {}]",
            domain.lo, domain.hi
        ))),
        1 => bisect(brackets[0], 1e-15, g),
        _ => {
            let roots = brackets
                .iter()
                .map(|b| bisect(*b, 1e-15, g))
                .collect::<Result<Vec<_>>>()?;
            Err(Error::Ambiguous { roots })
        }
    }
}

/// I(ρ) = K⁻¹(ρ)
pub fn map_i(v: &PotentialModel, aux: &AuxiliaryPowerLaw, rho: f64) -> Result<f64> {
    invert("K", &v.domain(), rho, |r| map_k(v, aux, r))
}

/// J(ν) = L⁻¹(ν)
pub fn map_j(t: &KineticModel, nu: f64) -> Result<f64> {
    invert("L", &t.domain(), nu, |p| map_l(t, p))
}

/// Eigenvalue of p²/(2ν) + ρ sgn(λ) r^λ for the global quantum number Q:
/// ε = (λ+2)/(2λ) · (|λ|ρ)^(2/(λ+2)) · (Q²/ν)^(λ/(λ+2)).
pub fn epsilon_power_law(nu: f64, rho: f64, aux: &AuxiliaryPowerLaw, q: f64) -> f64 {
    let l = aux.lambda();
    (l + 2.0) / (2.0 * l) * (l.abs() * rho).powf(2.0 / (l + 2.0)) * (q * q / nu).powf(l / (l + 2.0))
}

fn check_fixed(map: &'static str, fixed: f64, given: f64) -> Result<()> {
    if (given - fixed).abs() > DEGENERATE_PARAM_TOL * fixed.abs() {
        return Err(Error::DegenerateMap { map, value: fixed });
    }
    Ok(())
}

/// T(J(ν)) − J(ν)²/(2ν). For quadratic T the parameter is pinned to the
/// mass and the offset is T(p) − p²/(2m) at any p.
fn kinetic_shift(t: &KineticModel, nu: f64) -> Result<f64> {
    if let Some(m) = kinetic_map_constant(t) {
        check_fixed("L", m, nu)?;
        let p = t.domain().clamp(1.0);
        return Ok(t.value(p)? - p * p / (2.0 * m));
    }
    let p = map_j(t, nu)?;
    Ok(t.value(p)? - p * p / (2.0 * nu))
}

/// V(I(ρ)) − ρ P(I(ρ)), with the same pinning when V = c P + const.
fn potential_shift(v: &PotentialModel, aux: &AuxiliaryPowerLaw, rho: f64) -> Result<f64> {
    if let Some(c) = potential_map_constant(v, aux) {
        check_fixed("K", c, rho)?;
        let r = v.domain().clamp(1.0);
        return Ok(v.value(r)? - c * aux.value(r));
    }
    let r = map_i(v, aux, rho)?;
    Ok(v.value(r)? - rho * aux.value(r))
}

/// Eigenvalue E(ν, ρ) of the tangent Hamiltonian.
pub fn energy_surface(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    q: f64,
    nu: f64,
    rho: f64,
) -> Result<f64> {
    Ok(kinetic_shift(t, nu)? + potential_shift(v, aux, rho)? + epsilon_power_law(nu, rho, aux, q))
}

/// T̃(p) for parameter ν; equal to T itself when T is quadratic.
pub fn tilde_t(t: &KineticModel, nu: f64, p: f64) -> Result<f64> {
    if kinetic_map_constant(t).is_some() {
        return t.value(p);
    }
    Ok(p * p / (2.0 * nu) + kinetic_shift(t, nu)?)
}

/// Ṽ(r) for parameter ρ; equal to V itself when V = c P + const.
pub fn tilde_v(v: &PotentialModel, aux: &AuxiliaryPowerLaw, rho: f64, r: f64) -> Result<f64> {
    if potential_map_constant(v, aux).is_some() {
        return v.value(r);
    }
    Ok(rho * aux.value(r) + potential_shift(v, aux, rho)?)
}

/// Values `(p0², r0^λ)` that ⟨p²⟩ and ⟨r^λ⟩ take on the eigenstate of
/// p²/(2ν0) + ρ0 P(r).
pub fn hellmann_feynman_targets(sol: &EnvelopeSolution, aux: &AuxiliaryPowerLaw) -> (f64, f64) {
    (sol.p0 * sol.p0, sol.r0.powf(aux.lambda()))
}

/// Normalized central-difference gradient of the energy surface at
/// (ν0, ρ0): |∂E/∂ν| ν0/|E| and |∂E/∂ρ| ρ0/|E|. A component is `None` when
/// its map is degenerate and the parameter is pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    pub surface_energy: f64,
    pub d_nu: Option<f64>,
    pub d_rho: Option<f64>,
}

impl StationarityReport {
    pub fn max_component(&self) -> f64 {
        self.d_nu.unwrap_or(0.0).max(self.d_rho.unwrap_or(0.0))
    }
}

pub fn stationarity(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    sol: &EnvelopeSolution,
    rel_step: f64,
) -> Result<StationarityReport> {
    stationarity_at(t, v, aux, sol.state.q, sol.nu0, sol.rho0, rel_step)
}

/// As [`stationarity`] at an arbitrary point of the surface.
pub fn stationarity_at(
    t: &KineticModel,
    v: &PotentialModel,
    aux: &AuxiliaryPowerLaw,
    q: f64,
    nu: f64,
    rho: f64,
    rel_step: f64,
) -> Result<StationarityReport> {
    let e0 = energy_surface(t, v, aux, q, nu, rho)?;
    let norm = e0.abs().max(f64::MIN_POSITIVE);
    let d_nu = if kinetic_map_constant(t).is_none() {
        let h = rel_step * nu;
        let ep = energy_surface(t, v, aux, q, nu + h, rho)?;
        let em = energy_surface(t, v, aux, q, nu - h, rho)?;
        Some(((ep - em) / (2.0 * h)).abs() * nu / norm)
    } else {
        None
    };
    let d_rho = if potential_map_constant(v, aux).is_none() {
        let h = rel_step * rho;
        let ep = energy_surface(t, v, aux, q, nu, rho + h)?;
        let em = energy_surface(t, v, aux, q, nu, rho - h)?;
        Some(((ep - em) / (2.0 * h)).abs() * rho / norm)
    } else {
        None
    };
    Ok(StationarityReport {
        surface_energy: e0,
        d_nu,
        d_rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_space;
    use crate::qnumbers::{Provenance, QuantumState};

    fn state(q: f64) -> QuantumState {
        QuantumState {
            n: 0,
            l: 0,
            q,
            provenance: Provenance::Numeric,
        }
    }

    fn aux(l: f64) -> AuxiliaryPowerLaw {
        AuxiliaryPowerLaw::new(l).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// W0 by bisection, independent of `special`.
    fn w0(z: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, z.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < z {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn hydrogen_ground_state_is_exact() {
        let t = KineticModel::quadratic(1.0).unwrap();
        let v = PotentialModel::coulomb(1.0).unwrap();
        let sol = solve_envelope(&t, &v, &aux(-1.0), state(1.0)).unwrap();
        assert!(rel(sol.r0, 1.0) < 1e-14);
        assert!(rel(sol.p0, 1.0) < 1e-14);
        assert!(rel(sol.energy, -0.5) < 1e-14);
        assert_eq!(sol.bound, BoundClass::Exact);
        assert!(rel(sol.nu0, 1.0) < 1e-14 && rel(sol.rho0, 1.0) < 1e-14);
    }

    #[test]
    fn oscillator_is_exact() {
        let t = KineticModel::quadratic(1.0).unwrap();
        let v = PotentialModel::harmonic(1.0).unwrap();
        let sol = solve_envelope(&t, &v, &aux(2.0), state(1.5)).unwrap();
        assert!(rel(sol.energy, 2f64.sqrt() * 1.5) < 1e-14);
    }

    #[test]
    fn toy_model_matches_lambert_closed_form() {
        let t = KineticModel::exp_quadratic(1.0).unwrap();
        let v = PotentialModel::harmonic(1.0).unwrap();
        let sol = solve_envelope(&t, &v, &aux(2.0), state(1.5)).unwrap();
        let w = w0(0.75);
        let expected = (2.0 * w).exp() * (1.0 + 2.0 * w);
        assert!((expected - 4.953586893).abs() < 1e-9);
        assert!(rel(sol.energy, expected) < 1e-12);
        assert_eq!(sol.bound, BoundClass::Lower);

        let (p2, r2) = hellmann_feynman_targets(&sol, &aux(2.0));
        assert!(rel(p2, 2.0 * w) < 1e-12);
        assert!((p2 - 0.9383004214).abs() < 1e-9);
        assert!(rel(r2, 2.25 / (2.0 * w)) < 1e-12);
        assert!((r2 - 2.3979526692).abs() < 1e-9);
    }

    #[test]
    fn solution_invariants() {
        let cases = [
            (KineticModel::exp_quadratic(0.3).unwrap(), PotentialModel::harmonic(2.0).unwrap(), 2.0, 2.5),
            (KineticModel::ultrarelativistic(1.0).unwrap(), PotentialModel::linear(1.0).unwrap(), 1.0, 1.376),
            (KineticModel::relativistic(0.5, 2.0).unwrap(), PotentialModel::coulomb(0.3).unwrap(), -1.0, 2.0),
            (KineticModel::gaussian(1.0, 2.0).unwrap(), PotentialModel::power(1.0, 0.5).unwrap(), 0.5, 3.0),
        ];
        for (t, v, l, q) in cases {
            let a = aux(l);
            let sol = solve_envelope(&t, &v, &a, state(q)).unwrap();
            assert!(sol.r0 > 0.0 && sol.p0 > 0.0 && sol.nu0 > 0.0 && sol.rho0 > 0.0);
            assert!(rel(sol.r0 * sol.p0, q) <= 1e-12);
            let scale = (sol.r0 * v.derivative(sol.r0).unwrap()).abs().max(1.0);
            let virial = sol.p0 * t.derivative(sol.p0).unwrap() - sol.r0 * v.derivative(sol.r0).unwrap();
            assert!(virial.abs() <= 1e-10 * scale);
            assert_eq!(sol.energy, t.value(sol.p0).unwrap() + v.value(sol.r0).unwrap());
            // compact form equals the full surface at the stationary point
            let surface = energy_surface(&t, &v, &a, q, sol.nu0, sol.rho0).unwrap();
            assert!(rel(surface, sol.energy) < 1e-10, "T={t} V={v}: {surface} vs {}", sol.energy);
            let report = stationarity(&t, &v, &a, &sol, 1e-5).unwrap();
            assert!(report.max_component() <= 1e-6, "T={t} V={v}: {report:?}");
        }
    }

    #[test]
    fn method_is_exact_when_tangents_coincide_with_h() {
        // T = p²/(2m), V = c P: E = ε(m, c, Q)
        for (l, c, m, q) in [(-1.0, 0.7, 1.3, 2.0), (2.0, 1.7, 0.4, 3.5), (1.0, 2.0, 0.5, 1.2), (0.5, 1.0, 2.0, 2.2)] {
            let a = aux(l);
            let t = KineticModel::quadratic(m).unwrap();
            let v = PotentialModel::power(c, l).unwrap();
            let sol = solve_envelope(&t, &v, &a, state(q)).unwrap();
            assert!(rel(sol.energy, epsilon_power_law(m, c, &a, q)) < 1e-12, "lambda={l}");
            assert_eq!(sol.bound, BoundClass::Exact);
        }
    }

    #[test]
    fn maps_and_their_inverses() {
        let k = 1.0;
        let t = KineticModel::exp_quadratic(k).unwrap();
        for q in [0.1, 0.7, 1.9] {
            let l = map_l(&t, q).unwrap();
            assert!(rel(l, (-k * q * q).exp() / (2.0 * k)) < 1e-14);
        }
        for nu in [0.05, 0.2, 0.45] {
            let expected = (-(2.0 * k * nu).ln() / k).sqrt();
            assert!(rel(map_j(&t, nu).unwrap(), expected) < 1e-12);
        }
        assert!(matches!(map_j(&t, 0.6), Err(Error::OutOfDomain(_))));

        let v = PotentialModel::linear(1.0).unwrap();
        let a = aux(2.0);
        // K(r) = 1/(2r)
        assert!(rel(map_k(&v, &a, 4.0).unwrap(), 0.125) < 1e-15);
        assert!(rel(map_i(&v, &a, 0.125).unwrap(), 4.0) < 1e-12);
    }

    #[test]
    fn degenerate_maps_are_reported() {
        let coul = PotentialModel::coulomb(1.0).unwrap();
        assert!(rel(map_k(&coul, &aux(-1.0), 3.0).unwrap(), 1.0) < 1e-15);
        assert!(matches!(
            map_i(&coul, &aux(-1.0), 1.0),
            Err(Error::DegenerateMap { map: "K", .. })
        ));
        let quad = KineticModel::quadratic(2.0).unwrap();
        assert!(matches!(
            map_j(&quad, 2.0),
            Err(Error::DegenerateMap { map: "L", value }) if rel(value, 2.0) < 1e-12
        ));
        // off the pinned value the surface does not exist
        let t = KineticModel::ultrarelativistic(1.0).unwrap();
        assert!(matches!(
            energy_surface(&t, &coul, &aux(-1.0), 1.0, 1.0, 1.1),
            Err(Error::DegenerateMap { .. })
        ));
    }

    #[test]
    fn epsilon_power_law_examples() {
        for q in [0.5, 1.5, 4.0] {
            assert!(rel(epsilon_power_law(0.5, 1.0, &aux(2.0), q), 2.0 * q) < 1e-15);
            assert!(rel(epsilon_power_law(1.0, 1.0, &aux(-1.0), q), -0.5 / (q * q)) < 1e-15);
        }
        let alpha0 = -2.338_107_410_459_767;
        let q = 2.0 * (-alpha0 / 3.0f64).powf(1.5);
        assert!(rel(epsilon_power_law(0.5, 1.0, &aux(1.0), q), -alpha0) < 1e-14);
    }

    #[test]
    fn off_stationary_points_have_a_gradient() {
        let t = KineticModel::exp_quadratic(1.0).unwrap();
        let v = PotentialModel::harmonic(1.0).unwrap();
        let a = aux(2.0);
        let sol = solve_envelope(&t, &v, &a, state(1.5)).unwrap();
        let off = stationarity_at(&t, &v, &a, 1.5, 1.1 * sol.nu0, sol.rho0, 1e-5).unwrap();
        assert!(off.d_nu.unwrap() > 1e-3);
        // convex h: every tangent lies below T, so the stationary point is a
        // maximum of the surface along ν
        assert!(off.surface_energy < sol.energy);
        let below = energy_surface(&t, &v, &a, 1.5, 0.9 * sol.nu0, sol.rho0).unwrap();
        assert!(below < sol.energy);
    }

    #[test]
    fn tangency_at_the_contact_point() {
        let t = KineticModel::exp_quadratic(1.0).unwrap();
        let v = PotentialModel::harmonic(1.0).unwrap();
        let a = aux(2.0);
        let sol = solve_envelope(&t, &v, &a, state(1.5)).unwrap();
        let contact = map_j(&t, sol.nu0).unwrap();
        assert!(rel(contact, sol.p0) < 1e-10);
        assert!(rel(tilde_t(&t, sol.nu0, contact).unwrap(), t.value(contact).unwrap()) < 1e-14);
        for p in log_space(1e-3, 5.0, 100) {
            assert!(tilde_t(&t, sol.nu0, p).unwrap() <= t.value(p).unwrap() + 1e-9);
        }

        // V = r with P = r²: g = √y is concave, tangents lie above
        let lin = PotentialModel::linear(1.0).unwrap();
        let u = KineticModel::quadratic(1.0).unwrap();
        let sol = solve_envelope(&u, &lin, &a, state(1.5)).unwrap();
        for r in log_space(1e-3, 50.0, 100) {
            assert!(tilde_v(&lin, &a, sol.rho0, r).unwrap() >= lin.value(r).unwrap() - 1e-9);
        }
        assert!(rel(tilde_v(&lin, &a, sol.rho0, sol.r0).unwrap(), sol.r0) < 1e-10);
    }

    #[test]
    fn no_sign_change_means_no_solution() {
        // p T'(p) = p² and r V'(r) = r² with p = Q/r cross exactly once;
        // restricting the radius domain away from that crossing removes it
        let t = KineticModel::quadratic(0.5).unwrap();
        let v = PotentialModel::harmonic(1.0)
            .unwrap()
            .with_domain(Domain::new(10.0, 100.0).unwrap())
            .unwrap();
        assert!(matches!(
            solve_stationary(&t, &v, 1.5, &EnvelopeOptions::default()),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn multiple_roots_need_a_selection() {
        // T' = 1 - 2(p-3)exp(-(p-3)²) dips enough that p³ T'(p) = 2 Q² has
        // three roots for Q = 3: p ≈ 2.145, 3.255, 4.018
        let t = KineticModel::from_expr("p + exp(-(p-3)^2)", &[]).unwrap();
        let v = PotentialModel::harmonic(1.0).unwrap();
        let fine = EnvelopeOptions {
            scan_points: 2000,
            ..Default::default()
        };
        let Err(Error::Ambiguous { roots }) = solve_stationary(&t, &v, 3.0, &fine) else {
            panic!("expected three roots")
        };
        let momenta: Vec<f64> = roots.iter().rev().map(|r| 3.0 / r).collect();
        for (p, expected) in momenta.iter().zip([2.145, 3.255, 4.018]) {
            assert!((p - expected).abs() < 2e-3, "{momenta:?}");
        }
        for (selection, r) in [(RootSelection::Smallest, roots[0]), (RootSelection::Largest, roots[2])] {
            let opts = EnvelopeOptions {
                root_selection: selection,
                ..fine
            };
            let st = solve_stationary(&t, &v, 3.0, &opts).unwrap();
            assert!(rel(st.r0, r) < 1e-10);
            assert!(st.residual <= 1e-10 * (st.r0 * v.derivative(st.r0).unwrap()).max(1.0));
        }
    }
}
