use rayon::prelude::*;

use kinbound::classify::{classify_with_reports, BoundClass, ConvexityReport, SampleDomain};
use kinbound::envelope::{
    hellmann_feynman_targets, solve_envelope, stationarity, tilde_t, tilde_v, EnvelopeSolution,
};
use kinbound::models::{AuxiliaryPowerLaw, KineticModel, PotentialModel};
use kinbound::oracle::{self, expectation, virial_residual, Observable, OracleConfig};
use kinbound::qnumbers::{q_exact, resolve};
use kinbound::semiclassical::{solve_orbit, ParticleOrbit};
use kinbound::toy::{epsilon_app, epsilon_ho, toy_models};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt_g, Table};

const STATIONARITY_STEP: f64 = 1e-5;
const STATIONARITY_TOL: f64 = 1e-6;
const VIRIAL_TOL: f64 = 1e-8;
const TANGENCY_TOL: f64 = 1e-8;
const HF_TOL: f64 = 1e-5;
const ORACLE_VIRIAL_TOL: f64 = 1e-5;

struct Problem {
    t: KineticModel,
    v: PotentialModel,
    aux: AuxiliaryPowerLaw,
}

fn problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let t = cfg.kinetic_model()?;
    let v = cfg.potential_model()?;
    let aux = cfg.aux(&v)?;
    Ok(Problem { t, v, aux })
}

fn envelopes(cfg: &RunConfig, p: &Problem) -> Result<Vec<EnvelopeSolution>, CliError> {
    cfg.states
        .iter()
        .map(|&(n, l)| {
            let state = resolve(p.aux.lambda(), n, l, &cfg.oracle)?;
            Ok(solve_envelope(&p.t, &p.v, &p.aux, state)?)
        })
        .collect()
}

pub fn solve(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = problem(cfg)?;
    let mut table = Table::new(&["n", "l", "Q", "provenance", "r0", "p0", "nu0", "rho0", "E", "bound", "residual"]);
    for sol in envelopes(cfg, &p)? {
        table.push(vec![
            sol.state.n.to_string(),
            sol.state.l.to_string(),
            fmt_g(sol.state.q),
            sol.state.provenance.to_string(),
            fmt_g(sol.r0),
            fmt_g(sol.p0),
            fmt_g(sol.nu0),
            fmt_g(sol.rho0),
            fmt_g(sol.energy),
            sol.bound.to_string(),
            fmt_g(sol.residual),
        ]);
    }
    Ok(table)
}

pub fn classify(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = problem(cfg)?;
    let (class, h, g) = classify_with_reports(&p.t, &p.v, &p.aux, &SampleDomain::of_models(&p.t, &p.v))?;
    let mut table = Table::new(&["function", "verdict", "samples", "max_violation"]);
    let row = |name: &str, r: &ConvexityReport| {
        vec![name.to_string(), r.verdict.to_string(), r.samples.to_string(), fmt_g(r.max_violation)]
    };
    table.push(row("h", &h));
    table.push(row("g", &g));
    table.push(vec!["bound".into(), class.to_string(), String::new(), String::new()]);
    Ok(table)
}

fn consistent(bound: BoundClass, envelope: f64, numeric: f64, tol: f64) -> bool {
    match bound {
        BoundClass::Lower => envelope <= numeric + tol,
        BoundClass::Upper => envelope >= numeric - tol,
        BoundClass::Exact => (envelope - numeric).abs() <= tol,
        BoundClass::Indeterminate => true,
    }
}

/// Oracle run for partial wave l with enough states to reach n.
fn oracle_level(p: &Problem, n: u32, l: u32, cfg: &OracleConfig) -> Result<(f64, oracle::OracleSpectrum), CliError> {
    let cfg = OracleConfig {
        states: cfg.states.max(n as usize + 1),
        ..cfg.clone()
    };
    let spectrum = oracle::solve(&p.t, &p.v, l, &cfg)?;
    spectrum.require_converged(cfg.tolerance)?;
    Ok((spectrum.eigenvalues[n as usize], spectrum))
}

pub fn oracle(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = problem(cfg)?;
    let mut table = Table::new(&[
        "n", "l", "E_envelope", "E_oracle", "difference", "bound", "consistent", "backend", "convergence",
    ]);
    for sol in envelopes(cfg, &p)? {
        let (numeric, spectrum) = oracle_level(&p, sol.state.n, sol.state.l, &cfg.oracle)?;
        let tol = (spectrum.convergence_estimate * numeric.abs().max(1.0)).max(cfg.oracle.tolerance);
        table.push(vec![
            sol.state.n.to_string(),
            sol.state.l.to_string(),
            fmt_g(sol.energy),
            fmt_g(numeric),
            fmt_g(sol.energy - numeric),
            sol.bound.to_string(),
            consistent(sol.bound, sol.energy, numeric, tol).to_string(),
            spectrum.backend_used.to_string(),
            fmt_g(spectrum.convergence_estimate),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy)]
pub struct FigureGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl FigureGrid {
    fn ks(&self) -> Result<Vec<f64>, CliError> {
        if !(self.k_min > 0.0 && self.k_max >= self.k_min && self.k_max.is_finite()) {
            return Err(CliError::config(format!(
                "k range [{}, {}] must be positive and ordered",
                self.k_min, self.k_max
            )));
        }
        match self.points {
            0 => Err(CliError::config("points must be at least 1")),
            1 => Ok(vec![self.k_min]),
            n => Ok((0..n)
                .map(|i| self.k_min + (self.k_max - self.k_min) * i as f64 / (n - 1) as f64)
                .collect()),
        }
    }
}

fn figure_row(k: f64, n: u32, l: u32, oracle_cfg: &OracleConfig) -> Vec<String> {
    let state = format!("({n},{l})");
    let analytic = || -> Result<(f64, f64), CliError> {
        let q = q_exact(2.0, n, l).expect("harmonic Q is closed form").q;
        Ok((epsilon_app(k, q)?, epsilon_ho(k, q)?))
    };
    let (app, ho) = match analytic() {
        Ok(v) => v,
        Err(e) => {
            return vec![fmt_g(k), state, String::new(), String::new(), String::new(), String::new(), String::new(), format!("failed: {e}")];
        }
    };
    let numeric = || -> Result<(f64, f64), CliError> {
        let (t, v) = toy_models(k)?;
        let p = Problem {
            t,
            v,
            aux: AuxiliaryPowerLaw::new(2.0)?,
        };
        let (e, spectrum) = oracle_level(&p, n, l, oracle_cfg)?;
        Ok((e, spectrum.convergence_estimate))
    };
    match numeric() {
        Ok((num, conv)) => vec![
            fmt_g(k),
            state,
            fmt_g(app),
            fmt_g(ho),
            fmt_g(num),
            fmt_g((num - app) / num),
            fmt_g(conv),
            "ok".into(),
        ],
        Err(e) => vec![fmt_g(k), state, fmt_g(app), fmt_g(ho), String::new(), String::new(), String::new(), format!("failed: {e}")],
    }
}

pub fn toy_figure2(cfg: &RunConfig, grid: FigureGrid) -> Result<Table, CliError> {
    let jobs: Vec<(f64, u32, u32)> = grid
        .ks()?
        .into_iter()
        .flat_map(|k| kinbound::toy::FIGURE_STATES.iter().map(move |&(n, l)| (k, n, l)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(k, n, l)| figure_row(k, n, l, &cfg.oracle))
        .collect();
    let mut table = Table::new(&[
        "k", "state", "epsilon_app", "epsilon_ho", "epsilon_numeric", "gap", "convergence", "status",
    ]);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

pub fn orbit(cfg: &RunConfig, ls: &[u32]) -> Result<Table, CliError> {
    let t1 = cfg.kinetic_model()?;
    let t2 = cfg.second_kinetic_model()?;
    let v = cfg.potential_model()?;
    let mut table = Table::new(&[
        "l", "Q", "r0", "p0", "E", "force", "r1", "v1", "m1", "F1", "r2", "v2", "m2", "F2", "residual",
    ]);
    let particle = |o: Option<&ParticleOrbit>| match o {
        Some(o) => vec![fmt_g(o.radius), fmt_g(o.speed), fmt_g(o.effective_mass), fmt_g(o.force)],
        None => vec![String::new(); 4],
    };
    for &l in ls {
        let s = solve_orbit(&t1, t2.as_ref(), &v, l)?;
        let mut row = vec![l.to_string(), fmt_g(s.q), fmt_g(s.r0), fmt_g(s.p0), fmt_g(s.energy), fmt_g(s.force)];
        row.extend(particle(Some(&s.first)));
        row.extend(particle(s.second.as_ref()));
        row.push(fmt_g(s.residual));
        table.push(row);
    }
    Ok(table)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Runs every invariant on every state; returns the report and the number
/// of failures.
pub fn check(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let p = problem(cfg)?;
    let mut table = Table::new(&["n", "l", "check", "residual", "tolerance", "status"]);
    let mut failures = 0;
    for sol in envelopes(cfg, &p)? {
        let (n, l) = (sol.state.n, sol.state.l);
        let mut push = |name: &str, residual: Result<Option<f64>, CliError>, tol: f64| {
            let (value, ok) = match residual {
                Ok(Some(r)) => (fmt_g(r), r <= tol),
                Ok(None) => ("pinned".to_string(), true),
                Err(e) => (format!("error: {e}"), false),
            };
            failures += usize::from(!ok);
            table.push(vec![
                n.to_string(),
                l.to_string(),
                name.to_string(),
                value,
                fmt_g(tol),
                if ok { "pass" } else { "fail" }.to_string(),
            ]);
        };

        let scale = (sol.r0 * p.v.derivative(sol.r0)?).abs().max(1.0);
        push("envelope virial", Ok(Some(sol.residual / scale)), VIRIAL_TOL);

        let rep = stationarity(&p.t, &p.v, &p.aux, &sol, STATIONARITY_STEP);
        let (d_nu, d_rho) = match rep {
            Ok(r) => (Ok(r.d_nu), Ok(r.d_rho)),
            Err(e) => (Err(CliError::from(e.clone())), Err(CliError::from(e))),
        };
        push("stationarity d_nu", d_nu, STATIONARITY_TOL);
        push("stationarity d_rho", d_rho, STATIONARITY_TOL);

        let tangent_t = tilde_t(&p.t, sol.nu0, sol.p0)
            .and_then(|x| Ok(rel(x, p.t.value(sol.p0)?)))
            .map(Some)
            .map_err(CliError::from);
        push("tangency T", tangent_t, TANGENCY_TOL);
        let tangent_v = tilde_v(&p.v, &p.aux, sol.rho0, sol.r0)
            .and_then(|x| Ok(rel(x, p.v.value(sol.r0)?)))
            .map(Some)
            .map_err(CliError::from);
        push("tangency V", tangent_v, TANGENCY_TOL);

        let (p2_target, rl_target) = hellmann_feynman_targets(&sol, &p.aux);
        let hf = |obs, target: f64| {
            expectation(obs, sol.nu0, sol.rho0, &p.aux, n, l, &cfg.oracle)
                .map(|x| Some((x - target).abs() / target.abs()))
                .map_err(CliError::from)
        };
        push("hellmann-feynman <p^2>", hf(Observable::PSquared, p2_target), HF_TOL);
        push("hellmann-feynman <r^lambda>", hf(Observable::RPowLambda, rl_target), HF_TOL);

        let oracle_virial = virial_residual(&p.t, &p.v, n, l, &cfg.oracle)
            .map(|r| Some(r / sol.energy.abs().max(1.0)))
            .map_err(CliError::from);
        push("oracle virial", oracle_virial, ORACLE_VIRIAL_TOL);
    }
    Ok((table, failures))
}
