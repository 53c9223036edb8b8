//! Run configuration: a TOML file whose keys can all be overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use kinbound::models::{parse_kinetic_spec, parse_potential_spec, AuxiliaryPowerLaw, KineticModel, PotentialModel};
use kinbound::oracle::{Backend, OracleConfig};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Catalog kinetic energy, e.g. "toy k=1" or "relativistic m=1 count=2"
    #[arg(long)]
    pub kinetic: Option<String>,
    /// Kinetic energy as an expression in p
    #[arg(long, conflicts_with = "kinetic")]
    pub kinetic_expr: Option<String>,
    /// Catalog potential, e.g. "coulomb e2=1" or "power a=1 lambda=0.5"
    #[arg(long)]
    pub potential: Option<String>,
    /// Potential as an expression in r
    #[arg(long, conflicts_with = "potential")]
    pub potential_expr: Option<String>,
    /// Exponent of the auxiliary power law (defaults to the potential's own
    /// exponent for power-law potentials)
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// States as "n,l;n,l;..."
    #[arg(long)]
    pub states: Option<String>,
    /// Named constant for expressions, NAME=VALUE (repeatable)
    #[arg(long = "constant", value_name = "NAME=VALUE")]
    pub constants: Vec<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OracleArgs {
    /// auto, momentum-grid, position-grid or oscillator-basis
    #[arg(long)]
    pub backend: Option<String>,
    /// Grid points or basis dimension
    #[arg(long)]
    pub size: Option<usize>,
    /// Grid extent or basis scale
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Eigenvalues per partial wave
    #[arg(long)]
    pub oracle_states: Option<usize>,
    /// Largest accepted convergence estimate
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StatesValue {
    Text(String),
    Pairs(Vec<[u32; 2]>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSection {
    backend: Option<String>,
    size: Option<usize>,
    cutoff: Option<f64>,
    states: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FigureSection {
    k_min: Option<f64>,
    k_max: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kinetic: Option<String>,
    kinetic_expr: Option<String>,
    kinetic2: Option<String>,
    kinetic2_expr: Option<String>,
    potential: Option<String>,
    potential_expr: Option<String>,
    lambda: Option<f64>,
    states: Option<StatesValue>,
    #[serde(default)]
    constants: BTreeMap<String, f64>,
    out: Option<PathBuf>,
    #[serde(default)]
    oracle: OracleSection,
    #[serde(default)]
    figure: FigureSection,
}

/// Everything a command may need, after merging file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kinetic: Option<Source>,
    pub kinetic2: Option<Source>,
    pub potential: Option<Source>,
    pub lambda: Option<f64>,
    pub states: Vec<(u32, u32)>,
    pub constants: Vec<(String, f64)>,
    pub oracle: OracleConfig,
    pub out: Option<PathBuf>,
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Catalog(String),
    Expr(String),
}

fn source(catalog: Option<String>, expr: Option<String>) -> Result<Option<Source>, CliError> {
    match (catalog, expr) {
        (Some(_), Some(_)) => Err(CliError::config("give either a catalog model or an expression, not both")),
        (Some(c), None) => Ok(Some(Source::Catalog(c))),
        (None, Some(e)) => Ok(Some(Source::Expr(e))),
        (None, None) => Ok(None),
    }
}

pub fn parse_states(text: &str) -> Result<Vec<(u32, u32)>, CliError> {
    let states = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (n, l) = pair
                .split_once(',')
                .ok_or_else(|| CliError::config(format!("state '{pair}' is not 'n,l'")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| CliError::config(format!("'{x}' in state '{pair}' is not a non-negative integer")))
            };
            Ok((parse(n)?, parse(l)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if states.is_empty() {
        return Err(CliError::config("the state list is empty"));
    }
    Ok(states)
}

fn parse_constant(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("constant '{text}' is not NAME=VALUE")))?;
    let value = value
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("constant '{text}' has a non-numeric value")))?;
    Ok((name.trim().to_string(), value))
}

impl RunConfig {
    pub fn load(
        path: Option<&Path>,
        model: &ModelArgs,
        oracle: &OracleArgs,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let file: FileConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };

        // flags replace the file's choice of source entirely
        let kinetic = if model.kinetic.is_some() || model.kinetic_expr.is_some() {
            source(model.kinetic.clone(), model.kinetic_expr.clone())?
        } else {
            source(file.kinetic, file.kinetic_expr)?
        };
        let potential = if model.potential.is_some() || model.potential_expr.is_some() {
            source(model.potential.clone(), model.potential_expr.clone())?
        } else {
            source(file.potential, file.potential_expr)?
        };
        let states = match (&model.states, file.states) {
            (Some(text), _) => parse_states(text)?,
            (None, Some(StatesValue::Text(text))) => parse_states(&text)?,
            (None, Some(StatesValue::Pairs(p))) if !p.is_empty() => p.into_iter().map(|[n, l]| (n, l)).collect(),
            (None, Some(StatesValue::Pairs(_))) => return Err(CliError::config("the state list is empty")),
            (None, None) => vec![(0, 0)],
        };
        let mut constants: BTreeMap<String, f64> = file.constants;
        for c in &model.constants {
            let (name, value) = parse_constant(c)?;
            constants.insert(name, value);
        }

        let mut cfg = OracleConfig::default();
        if let Some(b) = oracle.backend.as_ref().or(file.oracle.backend.as_ref()) {
            cfg.backend = b.parse::<Backend>().map_err(CliError::config)?;
        }
        cfg.size = oracle.size.or(file.oracle.size);
        cfg.cutoff = oracle.cutoff.or(file.oracle.cutoff);
        if let Some(s) = oracle.oracle_states.or(file.oracle.states) {
            cfg.states = s;
        }
        if let Some(t) = oracle.tolerance.or(file.oracle.tolerance) {
            cfg.tolerance = t;
        }
        cfg.validate().map_err(CliError::config)?;

        let lambda = model.lambda.or(file.lambda);
        if let Some(l) = lambda {
            AuxiliaryPowerLaw::new(l).map_err(CliError::config)?;
        }

        Ok(Self {
            kinetic,
            kinetic2: source(file.kinetic2, file.kinetic2_expr)?,
            potential,
            lambda,
            states,
            constants: constants.into_iter().collect(),
            oracle: cfg,
            out: out.or(file.out),
            k_min: file.figure.k_min.unwrap_or(0.05),
            k_max: file.figure.k_max.unwrap_or(4.0),
            points: file.figure.points.unwrap_or(40),
        })
    }

    fn constant_refs(&self) -> Vec<(&str, f64)> {
        self.constants.iter().map(|(n, v)| (n.as_str(), *v)).collect()
    }

    fn build_kinetic(&self, src: &Source) -> Result<KineticModel, CliError> {
        match src {
            Source::Catalog(spec) => parse_kinetic_spec(spec),
            Source::Expr(e) => KineticModel::from_expr(e, &self.constant_refs()),
        }
        .map_err(CliError::config)
    }

    pub fn kinetic_model(&self) -> Result<KineticModel, CliError> {
        let src = self
            .kinetic
            .as_ref()
            .ok_or_else(|| CliError::config("no kinetic energy given (--kinetic or --kinetic-expr)"))?;
        self.build_kinetic(src)
    }

    pub fn second_kinetic_model(&self) -> Result<Option<KineticModel>, CliError> {
        self.kinetic2.as_ref().map(|s| self.build_kinetic(s)).transpose()
    }

    pub fn potential_model(&self) -> Result<PotentialModel, CliError> {
        let src = self
            .potential
            .as_ref()
            .ok_or_else(|| CliError::config("no potential given (--potential or --potential-expr)"))?;
        match src {
            Source::Catalog(spec) => parse_potential_spec(spec),
            Source::Expr(e) => PotentialModel::from_expr(e, &self.constant_refs()),
        }
        .map_err(CliError::config)
    }

    /// The configured λ, or the exponent of a power-law potential.
    pub fn aux(&self, v: &PotentialModel) -> Result<AuxiliaryPowerLaw, CliError> {
        let lambda = match (self.lambda, v.as_power_law()) {
            (Some(l), _) => l,
            (None, Some((_, l))) => l,
            (None, None) => return Err(CliError::config("lambda is required for a potential that is not a power law")),
        };
        AuxiliaryPowerLaw::new(lambda).map_err(CliError::config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_lists() {
        assert_eq!(parse_states("0,0;0,1; 1,0").unwrap(), vec![(0, 0), (0, 1), (1, 0)]);
        assert!(parse_states("").is_err());
        assert!(parse_states("0;1").is_err());
        assert!(parse_states("-1,0").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = std::env::temp_dir().join(format!("kinbound-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(
            &path,
            "kinetic = \"toy k=1\"\npotential = \"harmonic a=1\"\nlambda = 2\nstates = [[0, 0], [1, 0]]\n[oracle]\nsize = 500\n",
        )
        .unwrap();
        let model = ModelArgs {
            kinetic: Some("quadratic m=1".into()),
            ..Default::default()
        };
        let oracle = OracleArgs {
            size: Some(800),
            ..Default::default()
        };
        let cfg = RunConfig::load(Some(&path), &model, &oracle, None).unwrap();
        assert_eq!(cfg.kinetic, Some(Source::Catalog("quadratic m=1".into())));
        assert_eq!(cfg.potential, Some(Source::Catalog("harmonic a=1".into())));
        assert_eq!(cfg.states, vec![(0, 0), (1, 0)]);
        assert_eq!(cfg.oracle.size, Some(800));
        assert_eq!(cfg.lambda, Some(2.0));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_lambda_is_a_config_error() {
        let model = ModelArgs {
            lambda: Some(-2.0),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::load(None, &model, &OracleArgs::default(), None),
            Err(CliError::Config(_))
        ));
    }
}
