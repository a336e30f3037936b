//! Run configuration: command-line flags over TOML file values over defaults.

use std::path::{Path, PathBuf};

use robust_mdp::{Method, NormPair, UncertaintyKind};
use serde::{Deserialize, Serialize};

use crate::cli::SolverArgs;
use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "RMDP_OUT_DIR";

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_BRANCH: f64 = 0.5;
pub const DEFAULT_MEMORY: usize = 5;
pub const DEFAULT_SWEEP_CAP: usize = 10_000;

/// Keys accepted in a TOML config file. All optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub method: Option<String>,
    pub norm_pair: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub epsilon: Option<f64>,
    pub memory: Option<usize>,
    pub max_epochs: Option<usize>,
    pub max_wall_seconds: Option<f64>,
    pub gap_check_period: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sizes: Option<Vec<usize>>,
    pub methods: Option<Vec<String>>,
    pub seeds: Option<Vec<u64>>,
    pub kind: Option<String>,
    pub n_branch: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        path.map(Self::load).transpose().map(Option::unwrap_or_default)
    }
}

/// Fully resolved settings for one solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub method: Method,
    pub epsilon: f64,
    /// FOM-VI only.
    pub norm_pair: Option<NormPair>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub gap_check_period: Option<usize>,
    /// Anderson VI only.
    pub memory: Option<usize>,
    pub max_epochs: Option<usize>,
    pub max_wall_seconds: Option<f64>,
    pub out_dir: PathBuf,
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("unknown method '{s}'")))
}

pub fn parse_norm(s: &str) -> Result<NormPair, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("unknown norm pair '{s}' (expected l1 or l2)")))
}

pub fn parse_kind(s: &str) -> Result<UncertaintyKind, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("unknown uncertainty kind '{s}' (expected ellipsoidal or kl)")))
}

pub fn resolve_out_dir(cli: Option<&Path>, file: &FileConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| file.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

impl RunConfig {
    /// Resolves one method's settings. With `strict`, method-specific knobs
    /// given for another method are rejected; sweeps pass `false` and apply
    /// each knob where it makes sense.
    pub fn resolve(method: Method, args: &SolverArgs, file: &FileConfig, strict: bool) -> Result<Self, CliError> {
        let epsilon = args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(CliError::Usage(format!("epsilon must be positive (got {epsilon})")));
        }
        let norm = args.norm_pair.clone().or_else(|| file.norm_pair.clone());
        let p = args.p.or(file.p);
        let q = args.q.or(file.q);
        let period = args.gap_check_period.or(file.gap_check_period);
        let memory = args.memory.or(file.memory);
        if strict && method != Method::FomVi && (norm.is_some() || p.is_some() || q.is_some() || period.is_some()) {
            return Err(CliError::Usage(format!("norm pair, p, q and gap_check_period apply to fom_vi only, not {method}")));
        }
        if strict && method != Method::AndersonVi && memory.is_some() {
            return Err(CliError::Usage(format!("memory applies to anderson_vi only, not {method}")));
        }
        let max_epochs = args.max_epochs.or(file.max_epochs);
        if max_epochs == Some(0) {
            return Err(CliError::Usage("max_epochs must be positive".into()));
        }
        let max_wall_seconds = args.max_wall_seconds.or(file.max_wall_seconds);
        if max_wall_seconds.is_some_and(|w| !(w > 0.0)) {
            return Err(CliError::Usage("max_wall_seconds must be positive".into()));
        }
        let out_dir = resolve_out_dir(args.out_dir.as_deref(), file);
        let mut config = RunConfig {
            method,
            epsilon,
            norm_pair: None,
            p: None,
            q: None,
            gap_check_period: None,
            memory: None,
            max_epochs,
            max_wall_seconds,
            out_dir,
        };
        match method {
            Method::FomVi => {
                config.norm_pair = Some(norm.as_deref().map(parse_norm).transpose()?.unwrap_or(NormPair::L2L2));
                config.p = Some(p.unwrap_or(2));
                config.q = Some(q.unwrap_or(2));
                let period = period.unwrap_or(5);
                if period == 0 {
                    return Err(CliError::Usage("gap_check_period must be positive".into()));
                }
                config.gap_check_period = Some(period);
            }
            Method::AndersonVi => {
                let m = memory.unwrap_or(DEFAULT_MEMORY);
                if m == 0 {
                    return Err(CliError::Usage("memory must be at least 1".into()));
                }
                config.memory = Some(m);
            }
            _ => {}
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file: FileConfig = toml::from_str("epsilon = 0.5\np = 1\nq = 3").unwrap();
        let args = SolverArgs { p: Some(0), ..Default::default() };
        let c = RunConfig::resolve(Method::FomVi, &args, &file, true).unwrap();
        assert_eq!((c.epsilon, c.p, c.q), (0.5, Some(0), Some(3)));
        assert_eq!(c.norm_pair, Some(NormPair::L2L2));
        let c = RunConfig::resolve(Method::FomVi, &SolverArgs::default(), &FileConfig::default(), true).unwrap();
        assert_eq!((c.epsilon, c.p, c.q, c.gap_check_period), (0.1, Some(2), Some(2), Some(5)));
    }

    #[test]
    fn method_specific_knobs_are_checked() {
        let args = SolverArgs { norm_pair: Some("l1".into()), ..Default::default() };
        assert!(matches!(RunConfig::resolve(Method::Vi, &args, &FileConfig::default(), true), Err(CliError::Usage(_))));
        assert!(RunConfig::resolve(Method::Vi, &args, &FileConfig::default(), false).is_ok());
        let args = SolverArgs { memory: Some(3), ..Default::default() };
        assert!(RunConfig::resolve(Method::GsVi, &args, &FileConfig::default(), true).is_err());
        assert_eq!(RunConfig::resolve(Method::AndersonVi, &args, &FileConfig::default(), true).unwrap().memory, Some(3));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for eps in [0.0, -1.0, f64::NAN] {
            let args = SolverArgs { epsilon: Some(eps), ..Default::default() };
            assert!(matches!(RunConfig::resolve(Method::Vi, &args, &FileConfig::default(), true), Err(CliError::Usage(_))));
        }
        assert!(toml::from_str::<FileConfig>("unknown_key = 1").is_err());
    }
}
