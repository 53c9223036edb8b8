//! Acceptance criteria 1–11. Each prints one PASS/FAIL line with the
//! measured value and its pinned tolerance; the test fails if any does.

use std::time::{Duration, Instant};

use kinbound::classify::{classify_bound, BoundClass, SampleDomain};
use kinbound::envelope::{solve_envelope, stationarity};
use kinbound::models::{AuxiliaryPowerLaw, KineticModel, PotentialModel};
use kinbound::oracle::{self, expectation, Observable, OracleConfig, OracleSpectrum};
use kinbound::qnumbers::{q_exact, q_numeric, QuantumState};
use kinbound::special::{airy_zero, lambert_w0};
use kinbound::toy::{epsilon_app, epsilon_ho, toy_models};

struct Report {
    failures: Vec<usize>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String, elapsed: Duration) {
        println!(
            "criterion {id:>2}: {} ({detail}; {:.3} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            self.failures.push(id);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn aux(l: f64) -> AuxiliaryPowerLaw {
    AuxiliaryPowerLaw::new(l).unwrap()
}

fn harmonic_state(n: u32, l: u32) -> QuantumState {
    q_exact(2.0, n, l).unwrap()
}

/// Toy spectrum for states (0,0), (0,1), (1,0) at coupling k, from the
/// momentum grid: l = 0 gives n = 0, 1 and l = 1 gives n = 0.
fn toy_numeric(k: f64) -> ([f64; 3], f64) {
    let (t, _) = toy_models(k).unwrap();
    let cfg = OracleConfig::default();
    let s0 = oracle::solve_momentum_grid(&t, None, 0, &OracleConfig { states: 2, ..cfg.clone() }).unwrap();
    let s1 = oracle::solve_momentum_grid(&t, None, 1, &OracleConfig { states: 1, ..cfg }).unwrap();
    let conv = s0.convergence_estimate.max(s1.convergence_estimate);
    ([s0.eigenvalues[0], s1.eigenvalues[0], s0.eigenvalues[1]], conv)
}

const FIGURE_Q: [f64; 3] = [1.5, 2.5, 3.5];

fn exact_families(r: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (m, e2) in [(1.0, 1.0), (2.0, 0.5)] {
        let t = KineticModel::quadratic(m).unwrap();
        let v = PotentialModel::coulomb(e2).unwrap();
        for n in 0..=3 {
            for l in 0..=3 {
                let s = q_exact(-1.0, n, l).unwrap();
                let e = solve_envelope(&t, &v, &aux(-1.0), s).unwrap().energy;
                worst = worst.max(rel(e, -m * e2 * e2 / (2.0 * s.q * s.q)));
            }
        }
    }
    for (m, a) in [(1.0, 1.0), (0.5, 3.0)] {
        let t = KineticModel::quadratic(m).unwrap();
        let v = PotentialModel::harmonic(a).unwrap();
        for n in 0..=3 {
            for l in 0..=3 {
                let s = harmonic_state(n, l);
                let e = solve_envelope(&t, &v, &aux(2.0), s).unwrap().energy;
                worst = worst.max(rel(e, (2.0 * a / m).sqrt() * s.q));
            }
        }
    }
    let elapsed = start.elapsed();
    r.record(
        1,
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max rel error {worst:.2e} <= 1e-12, runtime < 1 s"),
        elapsed,
    );
}

fn toy_closed_form(r: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in [0.01, 0.1, 1.0, 10.0] {
        let (t, v) = toy_models(k).unwrap();
        for q in FIGURE_Q {
            let s = QuantumState::with_q(0, 0, q).unwrap();
            let e = solve_envelope(&t, &v, &aux(2.0), s).unwrap().energy;
            worst = worst.max(rel(e, epsilon_app(k, q).unwrap()));
        }
    }
    let elapsed = start.elapsed();
    r.record(
        2,
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max rel error {worst:.2e} <= 1e-10, runtime < 1 s"),
        elapsed,
    );
}

fn lower_bound_and_ordering(r: &mut Report) {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst_conv: f64 = 0.0;
    let mut gaps = Vec::new();
    let mut ordering_ok = true;
    let mut ordering_margin = f64::INFINITY;
    for k in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let (num, conv) = toy_numeric(k);
        worst_conv = worst_conv.max(conv);
        ok &= conv <= 1e-6;
        for (i, q) in FIGURE_Q.into_iter().enumerate() {
            let app = epsilon_app(k, q).unwrap();
            let ho = epsilon_ho(k, q).unwrap();
            worst_violation = worst_violation.max(app - num[i]);
            ok &= app <= num[i] + 1e-6;
            gaps.push((num[i] - app) / num[i]);
            if k >= 1.0 {
                let margin = (num[i] - ho).abs() - (num[i] - app).abs();
                ordering_margin = ordering_margin.min(margin);
                ordering_ok &= margin > 0.0;
            }
        }
    }
    let (gmin, gmax) = gaps
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &g| (a.min(g), b.max(g)));
    let elapsed = start.elapsed();
    r.record(
        3,
        ok && elapsed < Duration::from_secs(30),
        format!(
            "max(eps_app - eps_num) = {worst_violation:.3e} <= 1e-6, max convergence {worst_conv:.1e} <= 1e-6, relative gap {:.2}%..{:.2}%, runtime < 30 s",
            100.0 * gmin,
            100.0 * gmax
        ),
        elapsed,
    );
    r.record(
        4,
        ordering_ok,
        format!("min(|num - ho| - |num - app|) over k in {{1, 2, 4}} = {ordering_margin:.4e} > 0"),
        elapsed,
    );
}

fn small_k(r: &mut Report) {
    let start = Instant::now();
    let k = 0.01;
    let (num, conv) = toy_numeric(k);
    let deviation = (num[0] - (1.0 + 2.0 * k.sqrt() * 1.5)).abs();
    r.record(
        5,
        deviation <= 5.0 * k && conv <= 1e-6,
        format!("|eps_num - (1 + 2 sqrt(k) Q)| = {deviation:.3e} <= {:.2e} at k = 0.01", 5.0 * k),
        start.elapsed(),
    );
}

fn stationarity_check(r: &mut Report) {
    let start = Instant::now();
    let (toy_t, toy_v) = toy_models(1.0).unwrap();
    let cases = [
        ("toy k=1", toy_t, toy_v),
        ("T=p, V=r^2", KineticModel::ultrarelativistic(1.0).unwrap(), PotentialModel::harmonic(1.0).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, t, v) in &cases {
        let sol = solve_envelope(t, v, &aux(2.0), harmonic_state(0, 0)).unwrap();
        let rep = stationarity(t, v, &aux(2.0), &sol, 1e-5).unwrap();
        worst = worst.max(rep.max_component());
        let fmt = |c: Option<f64>| c.map_or("pinned".to_string(), |x| format!("{x:.1e}"));
        notes.push(format!("{name}: d_nu {} d_rho {}", fmt(rep.d_nu), fmt(rep.d_rho)));
    }
    r.record(
        6,
        worst <= 1e-6,
        format!("max normalized gradient {worst:.2e} <= 1e-6 [{}]", notes.join("; ")),
        start.elapsed(),
    );
}

fn hellmann_feynman(r: &mut Report) {
    let start = Instant::now();
    let (toy_t, toy_v) = toy_models(1.0).unwrap();
    let cases = [
        ("toy k=1", toy_t, toy_v),
        ("oscillator", KineticModel::quadratic(1.0).unwrap(), PotentialModel::harmonic(1.0).unwrap()),
    ];
    let cfg = OracleConfig::default();
    let a = aux(2.0);
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, t, v) in &cases {
        let sol = solve_envelope(t, v, &a, harmonic_state(0, 0)).unwrap();
        let p2 = expectation(Observable::PSquared, sol.nu0, sol.rho0, &a, 0, 0, &cfg).unwrap();
        let rl = expectation(Observable::RPowLambda, sol.nu0, sol.rho0, &a, 0, 0, &cfg).unwrap();
        let (e1, e2) = (rel(p2, sol.p0 * sol.p0), rel(rl, sol.r0 * sol.r0));
        worst = worst.max(e1).max(e2);
        notes.push(format!("{name}: <p^2> {p2:.9} vs {:.9}, <r^2> {rl:.9} vs {:.9}", sol.p0 * sol.p0, sol.r0 * sol.r0));
    }
    r.record(
        7,
        worst <= 1e-5,
        format!("max rel error {worst:.2e} <= 1e-5 [{}]", notes.join("; ")),
        start.elapsed(),
    );
}

/// Ai'' = x Ai integrated by RK4 from x = 6 towards negative x, starting on
/// the decaying branch; returns the first two sign changes refined by
/// bisection on the step length.
fn airy_zeros_by_integration() -> [f64; 2] {
    fn step(x: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let f = |x: f64, y: [f64; 2]| [y[1], x * y[0]];
        let k1 = f(x, y);
        let k2 = f(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }
    let h = -1e-4;
    let mut x = 6.0f64;
    // Ai'/Ai ≈ −√x − 1/(4x) on the decaying branch
    let mut y = [1.0, -x.sqrt() - 0.25 / x];
    let mut zeros = Vec::new();
    while zeros.len() < 2 {
        let next = step(x, y, h);
        if next[0].signum() != y[0].signum() {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if step(x, y, mid)[0].signum() == y[0].signum() {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            zeros.push(x + 0.5 * (lo + hi));
        }
        y = next;
        x += h;
    }
    [zeros[0], zeros[1]]
}

fn special_functions(r: &mut Report) {
    let start = Instant::now();
    let mut worst_w: f64 = 0.0;
    let lo = -(-1.0f64).exp();
    for i in 0..1000 {
        // dense near the branch point and out to 1e6
        let u = i as f64 / 999.0;
        let z = if i < 500 { lo + (1.0 - lo) * (2.0 * u).powi(3) } else { 10f64.powf(6.0 * (2.0 * u - 1.0)) };
        let w = lambert_w0(z).unwrap();
        worst_w = worst_w.max((w * w.exp() - z).abs() / (1.0 + z.abs()));
    }
    let reference = airy_zeros_by_integration();
    let worst_a = (0..2)
        .map(|n| (airy_zero(n).unwrap().alpha - reference[n]).abs())
        .fold(0.0, f64::max);
    r.record(
        8,
        worst_w <= 1e-12 && worst_a <= 1e-8,
        format!("max |W e^W - z|/(1+|z|) = {worst_w:.1e} <= 1e-12; max |alpha_n - ODE| = {worst_a:.1e} <= 1e-8"),
        start.elapsed(),
    );
}

fn linear_q(r: &mut Report) {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut worst: f64 = 0.0;
    let mut printed_exponent: f64 = 0.0;
    for n in 0..3 {
        let exact = q_exact(1.0, n, 0).unwrap().q;
        let numeric = q_numeric(1.0, n, 0, &cfg).unwrap().q;
        worst = worst.max(rel(numeric, exact));
        let alpha = airy_zero(n as usize).unwrap().alpha;
        printed_exponent = printed_exponent.max(rel(2.0 * (-alpha / 3.0).powf(2.0 / 3.0), numeric));
    }
    r.record(
        9,
        worst <= 1e-5,
        format!("max rel |q_exact - q_numeric| = {worst:.2e} <= 1e-5; the 2/3 exponent would be off by {:.1}%", 100.0 * printed_exponent),
        start.elapsed(),
    );
}

fn bound_table(r: &mut Report) {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let rows: Vec<(&str, KineticModel, PotentialModel, f64, BoundClass)> = vec![
        ("exp(q^2), r^2", KineticModel::exp_quadratic(1.0).unwrap(), PotentialModel::harmonic(1.0).unwrap(), 2.0, BoundClass::Lower),
        ("p^2/2m, -1/r", KineticModel::quadratic(1.0).unwrap(), PotentialModel::coulomb(1.0).unwrap(), -1.0, BoundClass::Exact),
        ("p^2/2m, r^2", KineticModel::quadratic(0.5).unwrap(), PotentialModel::harmonic(2.0).unwrap(), 2.0, BoundClass::Exact),
        ("p, r^2", KineticModel::ultrarelativistic(1.0).unwrap(), PotentialModel::harmonic(1.0).unwrap(), 2.0, BoundClass::Upper),
        ("p, r", KineticModel::ultrarelativistic(1.0).unwrap(), PotentialModel::linear(1.0).unwrap(), 1.0, BoundClass::Upper),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, t, v, lambda, expected) in &rows {
        let a = aux(*lambda);
        let class = classify_bound(t, v, &a, &SampleDomain::of_models(t, v)).unwrap();
        let state = q_exact(*lambda, 0, 0).unwrap();
        let env = solve_envelope(t, v, &a, state).unwrap().energy;
        let spectrum: OracleSpectrum = oracle::solve(t, v, 0, &OracleConfig { states: 1, ..cfg.clone() }).unwrap();
        let num = spectrum.ground();
        let tol = (spectrum.convergence_estimate * num.abs().max(1.0)).max(1e-6);
        let consistent = match class {
            BoundClass::Lower => env <= num + tol,
            BoundClass::Upper => env >= num - tol,
            BoundClass::Exact => (env - num).abs() <= tol,
            BoundClass::Indeterminate => false,
        };
        ok &= class == *expected && consistent;
        notes.push(format!(
            "{name}: {class} (E_env {env:.7}, E_num {num:.7} by {}, tol {tol:.1e})",
            spectrum.backend_used
        ));
    }
    r.record(10, ok, notes.join("; "), start.elapsed());
}

fn main() {
    let start = Instant::now();
    let mut r = Report { failures: Vec::new() };
    exact_families(&mut r);
    toy_closed_form(&mut r);
    lower_bound_and_ordering(&mut r);
    small_k(&mut r);
    stationarity_check(&mut r);
    hellmann_feynman(&mut r);
    special_functions(&mut r);
    linear_q(&mut r);
    bound_table(&mut r);
    let elapsed = start.elapsed();
    // the whole workspace suite is timed from outside; this bounds the
    // acceptance share of it
    r.record(
        11,
        elapsed < Duration::from_secs(60),
        "acceptance suite runtime < 60 s".into(),
        elapsed,
    );
    if !r.failures.is_empty() {
        eprintln!("failed criteria: {:?}", r.failures);
        std::process::exit(1);
    }
}
