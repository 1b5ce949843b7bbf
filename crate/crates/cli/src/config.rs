//! Experiment configuration: parsing, file resolution and defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use valab_core::faces::MeasureMethod;
use valab_core::geometry::{FamilySpec, PolytopeSpec};
use valab_core::kernels::KernelSpec;
use valab_core::valuation::ExtrapolationMode;

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_OUT: &str = "valab-out";

/// A polytope given inline or as a path (relative to the config file).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PolytopeSource {
    File { file: PathBuf },
    Inline(PolytopeSpec),
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact arcs when the exterior angles live on circles, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// √(2d+1) P_d(⟨axis, v⟩).
    Zonal { degree: usize, axis: [f64; 3] },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CosineConfig {
    #[serde(default = "default_degree")]
    pub max_degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
}

fn default_degree() -> usize {
    8
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSource>,
    /// Face dimension for `faces`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preimage_degree: Option<usize>,
    #[serde(default)]
    pub extrapolation: ExtrapolationMode,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosine: Option<CosineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Usage("the config file is empty".into()));
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads the file, applies overrides, inlines polytope files and fills
    /// defaults, so that the result alone reproduces the run.
    pub fn load(path: &Path, command: &str, ov: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve(command, base, ov)?;
        Ok(cfg)
    }

    pub fn resolve(&mut self, command: &str, base: &Path, ov: &Overrides) -> Result<(), CliError> {
        match &self.command {
            Some(c) if c != command => {
                return Err(CliError::Config(format!("config is for `{c}` but `{command}` was run")));
            }
            _ => self.command = Some(command.to_string()),
        }
        if let Some(PolytopeSource::File { file }) = &self.polytope {
            let p = if file.is_absolute() { file.clone() } else { base.join(file) };
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Config(format!("polytope file {}: {e}", p.display())))?;
            let spec: PolytopeSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("polytope file {}: {e}", p.display())))?;
            self.polytope = Some(PolytopeSource::Inline(spec));
        }
        if ov.seed.is_some() {
            self.seed = ov.seed;
        }
        if ov.samples.is_some() {
            self.samples = ov.samples;
        }
        if ov.out.is_some() {
            self.out = ov.out.clone();
        }
        if self.out.is_none() {
            self.out = Some(PathBuf::from(DEFAULT_OUT));
        }
        if self.samples == Some(0) {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(())
    }

    pub fn polytope_spec(&self) -> Result<&PolytopeSpec, CliError> {
        match &self.polytope {
            Some(PolytopeSource::Inline(s)) => Ok(s),
            Some(PolytopeSource::File { .. }) => Err(CliError::Config("polytope file was not resolved".into())),
            None => Err(CliError::Config("missing `polytope`".into())),
        }
    }

    pub fn kernel_spec(&self) -> Result<&KernelSpec, CliError> {
        self.kernel.as_ref().ok_or_else(|| CliError::Config("missing `kernel`".into()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// The measure method for faces of dimension k in R^n.
    pub fn measure_method(&self, n: usize, k: usize) -> MeasureMethod {
        let mc = MeasureMethod::MonteCarlo {
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: self.seed.unwrap_or(0),
        };
        match self.method {
            MethodChoice::Exact => MeasureMethod::Exact,
            MethodChoice::MonteCarlo => mc,
            MethodChoice::Auto if n.saturating_sub(k) <= 2 => MeasureMethod::Exact,
            MethodChoice::Auto => mc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_a_usage_error() {
        assert!(matches!(ExperimentConfig::parse("  \n"), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(ExperimentConfig::parse(r#"{"polytop": {"simplex": 3}}"#), Err(CliError::Config(_))));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"command":"phi","polytope":{"box":[1,2,3]},"kernel":{"kind":"constant","params":{"n":3,"k":1}},
            "method":"monte_carlo","samples":1000,"seed":4,"out":"x"}"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn overrides_win_and_auto_method_depends_on_codimension() {
        let mut cfg = ExperimentConfig::parse(r#"{"seed": 1, "samples": 10}"#).unwrap();
        let ov = Overrides { seed: Some(9), samples: None, out: Some("o".into()) };
        cfg.resolve("phi", Path::new("."), &ov).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.samples, Some(10));
        assert_eq!(cfg.measure_method(3, 1), MeasureMethod::Exact);
        assert_eq!(cfg.measure_method(4, 1), MeasureMethod::MonteCarlo { samples: 10, seed: 9 });
    }

    #[test]
    fn command_mismatch() {
        let mut cfg = ExperimentConfig::parse(r#"{"command": "faces"}"#).unwrap();
        assert!(cfg.resolve("phi", Path::new("."), &Overrides::default()).is_err());
    }
}
