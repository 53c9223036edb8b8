//! Reference eigensolvers for radial problems `T(p) + V(r)`.
//!
//! Three backends:
//!
//! * momentum grid, for `V = a r² + v0`: in momentum space `r²` acts as
//!   `−Δ_p`, so `−a u″ + [a l(l+1)/q² + T(q)] u = (E − v0) u`;
//! * position grid, for `T = c p² + t0`: the usual radial equation;
//! * oscillator basis, for anything else.
//!
//! Grids use 3-point differences with Dirichlet ends and Sturm bisection on
//! the tridiagonal matrix. Each grid run is repeated with the spacing halved
//! twice and Richardson-extrapolated. The basis backend builds a dense
//! matrix in radial oscillator functions and diagonalizes it with cyclic
//! Jacobi rotations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{AuxiliaryPowerLaw, KineticModel, PotentialModel};
use crate::numeric::{composite_gauss_legendre, log_space};

/// Cap on the confining term; the grid stops where it is reached.
pub const POTENTIAL_CAP: f64 = 1e12;
pub const MAX_GRID_EXTENT: f64 = 40.0;
pub const DEFAULT_GRID_SIZE: usize = 4000;
pub const DEFAULT_BASIS_SIZE: usize = 80;
pub const MIN_SIZE: usize = 16;
const SCALE_SCAN: usize = 16;
/// Relative eigenvector amplitude allowed in the outer 2% of a grid.
const TAIL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Pick from the model shapes: position grid for quadratic T, momentum
    /// grid for quadratic V, oscillator basis otherwise.
    #[default]
    Auto,
    MomentumGrid,
    PositionGrid,
    OscillatorBasis,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Auto => "auto",
            Backend::MomentumGrid => "momentum-grid",
            Backend::PositionGrid => "position-grid",
            Backend::OscillatorBasis => "oscillator-basis",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Backend::Auto),
            "momentum-grid" => Ok(Backend::MomentumGrid),
            "position-grid" => Ok(Backend::PositionGrid),
            "oscillator-basis" => Ok(Backend::OscillatorBasis),
            other => Err(Error::Config(format!("unknown oracle backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub backend: Backend,
    /// Grid points or basis dimension; `None` uses the backend default.
    pub size: Option<usize>,
    /// Grid extent or basis scale b; `None` chooses automatically.
    pub cutoff: Option<f64>,
    /// Eigenvalues per partial wave.
    pub states: usize,
    /// Largest convergence estimate accepted by [`OracleSpectrum::require_converged`].
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            size: None,
            cutoff: None,
            states: 3,
            tolerance: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.size {
            if n < MIN_SIZE {
                return Err(Error::Config(format!("oracle size {n} is below {MIN_SIZE}")));
            }
        }
        if let Some(c) = self.cutoff {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("oracle cutoff {c} must be positive")));
            }
        }
        if self.states == 0 {
            return Err(Error::Config("oracle must compute at least one state".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("oracle tolerance must be positive".into()));
        }
        Ok(())
    }

    fn size_or(&self, default: usize) -> usize {
        self.size.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub l: u32,
    pub eigenvalues: Vec<f64>,
    /// max over states of |ΔE| / max(|E|, 1) under a doubling of the size.
    pub convergence_estimate: f64,
    pub backend_used: Backend,
    pub size: usize,
    /// Grid extent or basis scale actually used.
    pub cutoff: f64,
}

impl OracleSpectrum {
    pub fn require_converged(&self, tolerance: f64) -> Result<()> {
        if self.convergence_estimate <= tolerance {
            Ok(())
        } else {
            Err(Error::NotConverged(format!(
                "{} spectrum for l = {} changes by {:e} under size doubling (limit {:e})",
                self.backend_used, self.l, self.convergence_estimate, tolerance
            )))
        }
    }

    pub fn ground(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Solves `T + V` for partial wave `l` with the configured backend.
pub fn solve(t: &KineticModel, v: &PotentialModel, l: u32, cfg: &OracleConfig) -> Result<OracleSpectrum> {
    cfg.validate()?;
    let unsupported = |b: Backend, what: &str| {
        Error::Unsupported(format!("backend {b} needs {what}"))
    };
    match cfg.backend {
        Backend::MomentumGrid => {
            let (a, v0) = v
                .quadratic_part()
                .ok_or_else(|| unsupported(Backend::MomentumGrid, "a potential a r² + const"))?;
            let w = |q: f64| Ok(t.value(q)? + v0);
            grid_spectrum(a, &w, l, cfg, Backend::MomentumGrid)
        }
        Backend::PositionGrid => {
            let (c, t0) = t
                .quadratic_part()
                .ok_or_else(|| unsupported(Backend::PositionGrid, "a kinetic energy c p² + const"))?;
            let w = |r: f64| Ok(v.value(r)? + t0);
            grid_spectrum(c, &w, l, cfg, Backend::PositionGrid)
        }
        Backend::OscillatorBasis => solve_oscillator_basis(t, v, l, cfg),
        Backend::Auto => {
            let backend = if t.quadratic_part().is_some() {
                Backend::PositionGrid
            } else if v.quadratic_part().is_some() {
                Backend::MomentumGrid
            } else {
                Backend::OscillatorBasis
            };
            solve(t, v, l, &OracleConfig { backend, ..cfg.clone() })
        }
    }
}

/// Spectrum of `T(p) + a r²` (a = 1 by default) on the momentum grid.
pub fn solve_momentum_grid(
    t: &KineticModel,
    harmonic_strength: Option<f64>,
    l: u32,
    cfg: &OracleConfig,
) -> Result<OracleSpectrum> {
    cfg.validate()?;
    let a = harmonic_strength.unwrap_or(1.0);
    positive_strength(a)?;
    grid_spectrum(a, &|q| t.value(q), l, cfg, Backend::MomentumGrid)
}

/// Spectrum of `p²/(2m) + V(r)` (m = 1 by default) on the position grid.
pub fn solve_position_grid(
    v: &PotentialModel,
    mass: Option<f64>,
    l: u32,
    cfg: &OracleConfig,
) -> Result<OracleSpectrum> {
    cfg.validate()?;
    let m = mass.unwrap_or(1.0);
    positive_strength(m)?;
    grid_spectrum(0.5 / m, &|r| v.value(r), l, cfg, Backend::PositionGrid)
}

fn positive_strength(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "strength".into(),
            value: x,
            reason: "must be positive",
        })
    }
}

// ---------------------------------------------------------------------------
// finite-difference grids

type Radial<'a> = &'a dyn Fn(f64) -> Result<f64>;

/// Symmetric tridiagonal matrix with a constant off-diagonal.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt() * self.off.abs().max(1.0);
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The lowest `k` eigenvalues by bisection.
    fn lowest(&self, k: usize) -> Vec<f64> {
        let lo0 = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * self.off.abs();
        (0..k)
            .map(|j| {
                let mut lo = lo0;
                let mut step = 1.0f64.max(lo0.abs());
                let mut hi = lo + step;
                while self.count_below(hi) <= j {
                    lo = hi;
                    step *= 2.0;
                    hi = lo + step;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * mid.abs() {
                        break;
                    }
                    if self.count_below(mid) <= j {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Normalized eigenvector for an accurate eigenvalue, by inverse
    /// iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = lambda - 1e-10 * lambda.abs().max(1.0);
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut x = vec![1.0; n];
        let mut c = vec![0.0; n];
        for _ in 0..3 {
            // Thomas algorithm on (A - shift) y = x
            let mut denom = self.diag[0] - shift;
            if denom == 0.0 {
                denom = tiny;
            }
            c[0] = self.off / denom;
            x[0] /= denom;
            for i in 1..n {
                let mut d = self.diag[i] - shift - self.off * c[i - 1];
                if d == 0.0 {
                    d = tiny;
                }
                c[i] = self.off / d;
                x[i] = (x[i] - self.off * x[i - 1]) / d;
            }
            for i in (0..n - 1).rev() {
                x[i] -= c[i] * x[i + 1];
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

/// Matrix of `−c u″ + [c l(l+1)/x² + W(x)] u` on `intervals` equal steps of
/// `(0, extent]` and the interior nodes.
fn fd_matrix(c: f64, w: Radial, l: u32, extent: f64, intervals: usize) -> Result<(Tridiagonal, Vec<f64>)> {
    let h = extent / intervals as f64;
    let centrifugal = c * (l * (l + 1)) as f64;
    let xs: Vec<f64> = (1..intervals).map(|i| i as f64 * h).collect();
    let diag = xs
        .iter()
        .map(|&x| {
            let wx = w(x)?;
            if !wx.is_finite() {
                return Err(Error::OutOfDomain(format!("potential term is not finite at {x}")));
            }
            Ok(2.0 * c / (h * h) + centrifugal / (x * x) + wx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Tridiagonal { diag, off: -c / (h * h) }, xs))
}

/// Lowest `states` raw finite-difference eigenvalues.
pub fn fd_eigenvalues(
    c: f64,
    w: Radial,
    l: u32,
    extent: f64,
    intervals: usize,
    states: usize,
) -> Result<Vec<f64>> {
    let (tri, _) = fd_matrix(c, w, l, extent, intervals)?;
    Ok(tri.lowest(states))
}

/// Largest x ≤ 40 with W(x) ≤ the potential cap.
fn grid_extent(w: Radial) -> f64 {
    let below = |x: f64| matches!(w(x), Ok(y) if y <= POTENTIAL_CAP);
    if below(MAX_GRID_EXTENT) {
        return MAX_GRID_EXTENT;
    }
    let (mut lo, mut hi) = (1e-3, MAX_GRID_EXTENT);
    if !below(lo) {
        return lo;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid
        } else {
            hi = mid
        }
    }
    lo
}

fn check_confined(tri: &Tridiagonal, energies: &[f64], extent: f64) -> Result<Vec<Vec<f64>>> {
    let n = tri.diag.len();
    let tail_start = n - (n / 50).max(1);
    energies
        .iter()
        .map(|&e| {
            let u = tri.eigenvector(e);
            let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tail = u[tail_start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if tail > TAIL_TOL * peak {
                return Err(Error::CutoffTooSmall {
                    cutoff: extent,
                    energy: e,
                });
            }
            Ok(u)
        })
        .collect()
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn grid_spectrum(c: f64, w: Radial, l: u32, cfg: &OracleConfig, backend: Backend) -> Result<OracleSpectrum> {
    let size = cfg.size_or(DEFAULT_GRID_SIZE);
    let extent = cfg.cutoff.unwrap_or_else(|| grid_extent(w));
    let intervals = size + 1;
    let mut raw = Vec::with_capacity(3);
    for level in 0..3 {
        let (tri, _) = fd_matrix(c, w, l, extent, intervals << level)?;
        let e = tri.lowest(cfg.states);
        if level == 2 {
            check_confined(&tri, &e, extent)?;
        }
        raw.push(e);
    }
    let richardson = |coarse: &[f64], fine: &[f64]| -> Vec<f64> {
        coarse.iter().zip(fine).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
    };
    let r1 = richardson(&raw[0], &raw[1]);
    let r2 = richardson(&raw[1], &raw[2]);
    let spectrum = OracleSpectrum {
        l,
        convergence_estimate: relative_change(&r1, &r2),
        eigenvalues: r2,
        backend_used: backend,
        size,
        cutoff: extent,
    };
    check_ordering(&spectrum)?;
    Ok(spectrum)
}

fn check_ordering(s: &OracleSpectrum) -> Result<()> {
    if s.eigenvalues.iter().all(|e| e.is_finite()) && s.eigenvalues.windows(2).all(|w| w[1] > w[0]) {
        Ok(())
    } else {
        Err(Error::NotConverged(format!(
            "{} eigenvalues are not strictly increasing: {:?}",
            s.backend_used, s.eigenvalues
        )))
    }
}

// ---------------------------------------------------------------------------
// expectation values

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    PSquared,
    RPowLambda,
}

/// Eigenvalue n of the grid problem and the means of `observables` on its
/// eigenvector, each Richardson-extrapolated from the two finer spacings.
fn grid_state(
    c: f64,
    w: Radial,
    l: u32,
    n: u32,
    cfg: &OracleConfig,
    observables: &[Radial],
) -> Result<(f64, Vec<f64>)> {
    let extent = cfg.cutoff.unwrap_or_else(|| grid_extent(w));
    let intervals = cfg.size_or(DEFAULT_GRID_SIZE) + 1;
    let k = n as usize;
    let mut samples = Vec::with_capacity(2);
    for level in 1..3 {
        let (tri, xs) = fd_matrix(c, w, l, extent, intervals << level)?;
        let e = tri.lowest(k + 1);
        let u = check_confined(&tri, &e[k..], extent)?.remove(0);
        let means = observables
            .iter()
            .map(|f| {
                u.iter()
                    .zip(&xs)
                    .map(|(u, &x)| Ok(u * u * f(x)?))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<Vec<_>>>()?;
        samples.push((e[k], means));
    }
    let extrapolate = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    let energy = extrapolate(samples[0].0, samples[1].0);
    let means = samples[0]
        .1
        .iter()
        .zip(&samples[1].1)
        .map(|(&a, &b)| extrapolate(a, b))
        .collect();
    Ok((energy, means))
}

/// ⟨p²⟩ or ⟨r^λ⟩ in state (n, l) of `p²/(2ν) + ρ sgn(λ) r^λ`.
///
/// Solved on the position grid; ⟨p²⟩ follows from the eigenvalue as
/// `2ν (E − ρ⟨P⟩)`.
pub fn expectation(
    observable: Observable,
    nu: f64,
    rho: f64,
    aux: &AuxiliaryPowerLaw,
    n: u32,
    l: u32,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate()?;
    positive_strength(nu)?;
    positive_strength(rho)?;
    let w = |r: f64| Ok(rho * aux.value(r));
    let p = |r: f64| Ok(aux.value(r));
    let (energy, means) = grid_state(0.5 / nu, &w, l, n, cfg, &[&p])?;
    Ok(match observable {
        Observable::RPowLambda => aux.sign() * means[0],
        Observable::PSquared => 2.0 * nu * (energy - rho * means[0]),
    })
}

// ---------------------------------------------------------------------------
// oscillator basis

/// Radial oscillator functions in `t = r²/b²`, orthonormal in dt:
/// `φ_n(t) = sqrt(n!/Γ(n+α+1)) t^(α/2) e^(−t/2) L_n^α(t)`, α = l + 1/2.
/// Returns `table[n][node]`.
fn oscillator_table(dim: usize, l: u32, ts: &[f64]) -> Vec<Vec<f64>> {
    let alpha = l as f64 + 0.5;
    // ln Γ(l + 3/2) = ln(√π/2) + Σ_{j=1..l} ln(j + 1/2)
    let ln_gamma = (std::f64::consts::PI.sqrt() / 2.0).ln()
        + (1..=l).map(|j| (j as f64 + 0.5).ln()).sum::<f64>();
    let mut table = vec![vec![0.0; ts.len()]; dim];
    for (j, &t) in ts.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = (0.5 * alpha * t.ln() - 0.5 * t - 0.5 * ln_gamma).exp();
        table[0][j] = cur;
        for n in 1..dim {
            let nf = n as f64;
            let next = ((2.0 * nf - 1.0 + alpha - t) * cur
                - ((nf - 1.0) * (nf - 1.0 + alpha)).sqrt() * prev)
                / (nf * (nf + alpha)).sqrt();
            prev = cur;
            cur = next;
            table[n][j] = cur;
        }
    }
    table
}

struct Basis {
    dim: usize,
    scale: f64,
    /// quadrature nodes in s = sqrt(t), with weights including dt = 2s ds
    s: Vec<f64>,
    w: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

impl Basis {
    fn new(dim: usize, l: u32, scale: f64) -> Self {
        let t_max = 1.3 * (4.0 * dim as f64 + 2.0 * l as f64 + 3.0) + 50.0;
        let rule = composite_gauss_legendre(0.0, t_max.sqrt(), dim + 20, 20);
        let s: Vec<f64> = rule.iter().map(|p| p.0).collect();
        let w: Vec<f64> = rule.iter().map(|p| 2.0 * p.0 * p.1).collect();
        let ts: Vec<f64> = s.iter().map(|x| x * x).collect();
        let phi = oscillator_table(dim, l, &ts);
        Self { dim, scale, s, w, phi }
    }

    /// Σ_nodes w φ_n φ_m f, with f sampled once per node.
    fn gram(&self, f: &[f64], out: &mut [f64], sign_alternates: bool) {
        let d = self.dim;
        let weighted: Vec<f64> = self.w.iter().zip(f).map(|(w, f)| w * f).collect();
        for n in 0..d {
            for m in n..d {
                let v: f64 = self.phi[n]
                    .iter()
                    .zip(&self.phi[m])
                    .zip(&weighted)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                let v = if sign_alternates && (n + m) % 2 == 1 { -v } else { v };
                out[n * d + m] += v;
                if m != n {
                    out[m * d + n] += v;
                }
            }
        }
    }

    fn sample(&self, what: &str, f: impl Fn(f64) -> Result<f64>, x_of_s: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let values = self
            .s
            .iter()
            .map(|&s| f(x_of_s(s)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Quadrature(format!("{what} cannot be sampled: {e}")))?;
        // each integrand must have died out, relative to its peak, at the end
        // of the rule
        let last = self.s.len() - 1;
        let tail = (0..self.dim)
            .map(|n| {
                let weight = |j: usize| self.phi[n][j].powi(2) * values[j].abs();
                let peak = (0..=last).map(weight).fold(0.0f64, f64::max);
                weight(last) / peak
            })
            .fold(0.0f64, f64::max);
        if !tail.is_finite() || tail > 1e-12 {
            return Err(Error::Quadrature(format!(
                "{what} grows faster than the basis decays at scale b = {} (relative tail weight {tail:e})",
                self.scale
            )));
        }
        Ok(values)
    }

    fn hamiltonian(&self, t: &KineticModel, v: &PotentialModel) -> Result<Vec<f64>> {
        let b = self.scale;
        let mut h = vec![0.0; self.dim * self.dim];
        let tv = self.sample("kinetic energy", |p| t.value(p), |s| s / b)?;
        self.gram(&tv, &mut h, true);
        let vv = self.sample("potential", |r| v.value(r), |s| b * s)?;
        self.gram(&vv, &mut h, false);
        Ok(h)
    }

    /// ⟨f(p)⟩ and ⟨g(r)⟩ on a state given by its coefficients.
    fn state_density(&self, c: &[f64], momentum: bool) -> Vec<f64> {
        (0..self.s.len())
            .map(|j| {
                let amp: f64 = (0..self.dim)
                    .map(|n| {
                        let sign = if momentum && n % 2 == 1 { -1.0 } else { 1.0 };
                        sign * c[n] * self.phi[n][j]
                    })
                    .sum();
                amp * amp * self.w[j]
            })
            .collect()
    }
}

/// Eigenvalues ascending with eigenvectors `vecs[k]`, by cyclic Jacobi.
fn jacobi(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].powi(2))
            .sum();
        if off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    (values, vectors)
}

struct BasisRun {
    basis: Basis,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    /// rounding floor of the eigenvalues, from the largest matrix element
    precision: f64,
}

fn basis_run(t: &KineticModel, v: &PotentialModel, l: u32, dim: usize, scale: f64) -> Result<BasisRun> {
    let basis = Basis::new(dim, l, scale);
    let h = basis.hamiltonian(t, v)?;
    let norm = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (values, vectors) = jacobi(h, dim);
    Ok(BasisRun {
        basis,
        values,
        vectors,
        precision: 16.0 * dim as f64 * f64::EPSILON * norm,
    })
}

/// ⟨0|H|0⟩ for the lowest oscillator function at scale b.
fn single_function_energy(t: &KineticModel, v: &PotentialModel, l: u32, b: f64) -> Option<f64> {
    basis_run(t, v, l, 1, b).ok().map(|r| r.values[0])
}

/// Basis scale: rough minimum of the one-function energy, refined by the
/// lowest eigenvalue over 16 log-spaced scales within a factor 3.
fn choose_scale(t: &KineticModel, v: &PotentialModel, l: u32, dim: usize) -> Result<f64> {
    let rough = log_space(1e-3, 1e3, 121)
        .into_iter()
        .filter_map(|b| single_function_energy(t, v, l, b).map(|e| (b, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Quadrature("no basis scale gives finite matrix elements".into()))?
        .0;
    let scan_dim = dim.clamp(MIN_SIZE, 24);
    log_space(rough / 3.0, rough * 3.0, SCALE_SCAN)
        .into_iter()
        .filter_map(|b| basis_run(t, v, l, scan_dim, b).ok().map(|r| (b, r.values[0])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(b, _)| b)
        .ok_or_else(|| Error::Quadrature("every scanned basis scale failed".into()))
}

/// Spectrum of `T + V` in the radial oscillator basis.
///
/// The matrix is built at the configured dimension and at twice it. The
/// reported eigenvalues come from the larger run; the estimate is their
/// change between the two, or the rounding floor set by the largest matrix
/// element if that is worse.
pub fn solve_oscillator_basis(
    t: &KineticModel,
    v: &PotentialModel,
    l: u32,
    cfg: &OracleConfig,
) -> Result<OracleSpectrum> {
    cfg.validate()?;
    let dim = cfg.size_or(DEFAULT_BASIS_SIZE);
    if cfg.states > dim {
        return Err(Error::Config(format!("{} states requested from a basis of {dim}", cfg.states)));
    }
    let scale = match cfg.cutoff {
        Some(b) => b,
        None => choose_scale(t, v, l, dim)?,
    };
    let coarse = basis_run(t, v, l, dim, scale)?;
    let fine = basis_run(t, v, l, 2 * dim, scale)?;
    let k = cfg.states;
    let floor = fine.precision / fine.values[0].abs().max(1.0);
    let spectrum = OracleSpectrum {
        l,
        convergence_estimate: relative_change(&coarse.values[..k], &fine.values[..k]).max(floor),
        eigenvalues: fine.values[..k].to_vec(),
        backend_used: Backend::OscillatorBasis,
        size: dim,
        cutoff: scale,
    };
    check_ordering(&spectrum)?;
    Ok(spectrum)
}

/// `|⟨p T'(p)⟩ − ⟨r V'(r)⟩|` on eigenstate (n, l) of `T + V`.
///
/// On a grid the quadratic side follows from the eigenvalue: for
/// `T = c p² + t0`, `⟨p T'⟩ = 2(E − ⟨V⟩ − t0)`, and symmetrically for a
/// quadratic V. The basis evaluates both sides by quadrature.
pub fn virial_residual(t: &KineticModel, v: &PotentialModel, n: u32, l: u32, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.backend {
        Backend::PositionGrid => {
            let (c, t0) = t
                .quadratic_part()
                .ok_or_else(|| Error::Unsupported("position grid needs a kinetic energy c p² + const".into()))?;
            let w = |r: f64| Ok(v.value(r)? + t0);
            let vr = |r: f64| v.value(r);
            let rdv = |r: f64| Ok(r * v.derivative(r)?);
            let (e, m) = grid_state(c, &w, l, n, cfg, &[&vr, &rdv])?;
            Ok((2.0 * (e - m[0] - t0) - m[1]).abs())
        }
        Backend::MomentumGrid => {
            let (a, v0) = v
                .quadratic_part()
                .ok_or_else(|| Error::Unsupported("momentum grid needs a potential a r² + const".into()))?;
            let w = |q: f64| Ok(t.value(q)? + v0);
            let tq = |q: f64| t.value(q);
            let qdt = |q: f64| Ok(q * t.derivative(q)?);
            let (e, m) = grid_state(a, &w, l, n, cfg, &[&tq, &qdt])?;
            Ok((m[1] - 2.0 * (e - m[0] - v0)).abs())
        }
        Backend::OscillatorBasis => basis_virial_residual(t, v, n, l, cfg),
        Backend::Auto => {
            let backend = if t.quadratic_part().is_some() {
                Backend::PositionGrid
            } else if v.quadratic_part().is_some() {
                Backend::MomentumGrid
            } else {
                Backend::OscillatorBasis
            };
            virial_residual(t, v, n, l, &OracleConfig { backend, ..cfg.clone() })
        }
    }
}

fn basis_virial_residual(t: &KineticModel, v: &PotentialModel, n: u32, l: u32, cfg: &OracleConfig) -> Result<f64> {
    let dim = cfg.size_or(DEFAULT_BASIS_SIZE);
    if n as usize >= dim {
        return Err(Error::Config(format!("state {n} requested from a basis of {dim}")));
    }
    let scale = match cfg.cutoff {
        Some(b) => b,
        None => choose_scale(t, v, l, dim)?,
    };
    let run = basis_run(t, v, l, dim, scale)?;
    let c = &run.vectors[n as usize];
    let basis = &run.basis;
    let pt = basis.sample("p T'(p)", |p| Ok(p * t.derivative(p)?), |s| s / scale)?;
    let rv = basis.sample("r V'(r)", |r| Ok(r * v.derivative(r)?), |s| scale * s)?;
    let mean = |density: Vec<f64>, f: &[f64]| -> f64 { density.iter().zip(f).map(|(d, f)| d * f).sum() };
    let kinetic = mean(basis.state_density(c, true), &pt);
    let potential = mean(basis.state_density(c, false), &rv);
    Ok((kinetic - potential).abs())
}
