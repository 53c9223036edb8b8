//! Gaussian kinetic energy `T(p) = σ m exp(p²/(2m²))` in a harmonic well
//! `V(r) = a r²`.
//!
//! With `x = r √(a/(σm))` and `q = p √(σm/a)` the Hamiltonian in units of
//! `σm` becomes `exp(k q²) + x²`, `[x, q] = i`, and depends only on
//! `k = a/(2σm³)`.

use crate::error::{Error, Result};
use crate::models::{KineticModel, PotentialModel};
use crate::special::lambert_w0;

/// The (n, l) states shown for the toy model, with Q = 2n + l + 3/2.
pub const FIGURE_STATES: [(u32, u32); 3] = [(0, 0), (0, 1), (1, 0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub sigma: f64,
    pub m: f64,
    pub a: f64,
    pub k: f64,
}

impl ToyParams {
    /// Physical energy E = σ m ε.
    pub fn energy(&self, epsilon: f64) -> f64 {
        self.sigma * self.m * epsilon
    }

    /// The reduced pair `(exp(k q²), x²)`.
    pub fn reduced_models(&self) -> Result<(KineticModel, PotentialModel)> {
        toy_models(self.k)
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name: name.into(),
            value,
            reason: "must be positive",
        })
    }
}

/// k = a / (2 σ m³)
pub fn reduce(sigma: f64, m: f64, a: f64) -> Result<ToyParams> {
    let sigma = positive("sigma", sigma)?;
    let m = positive("m", m)?;
    let a = positive("a", a)?;
    Ok(ToyParams {
        sigma,
        m,
        a,
        k: a / (2.0 * sigma * m.powi(3)),
    })
}

pub fn toy_models(k: f64) -> Result<(KineticModel, PotentialModel)> {
    Ok((KineticModel::exp_quadratic(k)?, PotentialModel::harmonic(1.0)?))
}

/// Closed-form envelope energy `exp(2W) (1 + 2W)` with `W = W0(√k Q / 2)`.
pub fn epsilon_app(k: f64, q: f64) -> Result<f64> {
    positive("k", k)?;
    positive("Q", q)?;
    let w = lambert_w0(0.5 * k.sqrt() * q)?;
    Ok((2.0 * w).exp() * (1.0 + 2.0 * w))
}

/// Harmonic approximation `1 + 2√k Q` from `exp(k q²) ≈ 1 + k q²`.
pub fn epsilon_ho(k: f64, q: f64) -> Result<f64> {
    positive("k", k)?;
    positive("Q", q)?;
    Ok(1.0 + 2.0 * k.sqrt() * q)
}

/// Hellmann–Feynman targets `(p0², r0²)` of the closed form:
/// `p0² = 2W/k` and `r0² = Q²/p0²`.
pub fn contact_point(k: f64, q: f64) -> Result<(f64, f64)> {
    positive("k", k)?;
    positive("Q", q)?;
    let w = lambert_w0(0.5 * k.sqrt() * q)?;
    let p2 = 2.0 * w / k;
    Ok((p2, q * q / p2))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// W0 by bisection on w e^w = z.
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
    fn reduction_examples() {
        assert_eq!(reduce(2.0, 1.0, 4.0).unwrap().k, 1.0);
        assert_eq!(reduce(1.0, 2.0, 1.0).unwrap().k, 1.0 / 16.0);
        assert!(reduce(0.0, 1.0, 1.0).is_err());
        let p = reduce(2.0, 3.0, 1.0).unwrap();
        assert_eq!(p.energy(1.5), 9.0);
    }

    #[test]
    fn equal_k_gives_equal_reduced_problems() {
        let a = reduce(2.0, 1.0, 4.0).unwrap();
        let b = reduce(0.25, 2.0, 4.0).unwrap();
        assert_eq!(a.k, b.k);
        let (ta, _) = a.reduced_models().unwrap();
        let (tb, _) = b.reduced_models().unwrap();
        for q in [0.1, 0.5, 1.3] {
            assert_eq!(ta.value(q).unwrap(), tb.value(q).unwrap());
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((epsilon_app(1e-14, 1.5).unwrap() - 1.0).abs() < 1e-6);
        let w = w0(0.75);
        let expected = (2.0 * w).exp() * (1.0 + 2.0 * w);
        assert!((epsilon_app(1.0, 1.5).unwrap() - expected).abs() < 1e-12);
        assert!((epsilon_app(1.0, 1.5).unwrap() - 4.953586893131873).abs() < 1e-12);
        let w = w0(1.5);
        let expected = (2.0 * w).exp() * (1.0 + 2.0 * w);
        assert!((epsilon_app(4.0, 1.5).unwrap() - expected).abs() < 1e-11);
        assert!((epsilon_app(4.0, 1.5).unwrap() - 10.469995993236339).abs() < 1e-11);
    }

    #[test]
    fn harmonic_limit() {
        assert!((epsilon_ho(0.01, 1.5).unwrap() - 1.3).abs() < 1e-15);
        assert_eq!(epsilon_ho(1.0, 1.5).unwrap(), 4.0);
        // ε_app − ε_ho = O(k)
        for k in [1e-4, 1e-3, 3e-3, 1e-2] {
            let d = epsilon_app(k, 1.5).unwrap() - epsilon_ho(k, 1.5).unwrap();
            assert!(d.abs() / k < 5.0, "k={k}: {d}");
        }
    }

    #[test]
    fn monotone_in_k_and_q() {
        let ks = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0];
        let qs = [0.5, 1.5, 2.5, 3.5, 7.0];
        for &q in &qs {
            for pair in ks.windows(2) {
                assert!(epsilon_app(pair[1], q).unwrap() > epsilon_app(pair[0], q).unwrap());
            }
        }
        for &k in &ks {
            for pair in qs.windows(2) {
                assert!(epsilon_app(k, pair[1]).unwrap() > epsilon_app(k, pair[0]).unwrap());
            }
        }
    }

    #[test]
    fn contact_point_example() {
        let (p2, r2) = contact_point(1.0, 1.5).unwrap();
        assert!((p2 - 2.0 * w0(0.75)).abs() < 1e-13);
        assert!((p2 - 0.938300421389976).abs() < 1e-12);
        assert!((r2 - 2.397952669217501).abs() < 1e-12);
    }
}
