use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_GRID: usize = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config file {path}: {source}")]
    Malformed {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid value for `{field}`: {reason}")]
    OutOfRange { field: &'static str, reason: String },
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Relative singular-value cutoff for Kirillov form ranks.
    pub rank_tol: f64,
    /// Largest accepted distance of a topological integral from an integer.
    pub residual_tol: f64,
    /// Adaptive Simpson tolerance for 1D winding numbers.
    pub quadrature_tol: f64,
    pub grid2d: usize,
    pub grid3d: usize,
    /// Scale of the half-line compactification.
    pub truncation: f64,
    pub samples: usize,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            rank_tol: 1e-8,
            residual_tol: 0.05,
            quadrature_tol: 1e-8,
            grid2d: 512,
            grid3d: 128,
            truncation: 8.0,
            samples: 10_000,
            output: None,
        }
    }
}

/// Flag values; `None` keeps the file or default value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rank_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub quadrature_tol: Option<f64>,
    pub grid2d: Option<usize>,
    pub grid3d: Option<usize>,
    pub truncation: Option<f64>,
    pub samples: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Ok(RunConfig::default());
        }
        serde_json::from_str(text).map_err(|source| ConfigError::Malformed {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Defaults, then the file, then the flags.
    pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.to_path_buf(),
                    source,
                })?;
                RunConfig::from_json(&text, path)?
            }
            None => RunConfig::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.rank_tol {
            self.rank_tol = v;
        }
        if let Some(v) = o.residual_tol {
            self.residual_tol = v;
        }
        if let Some(v) = o.quadrature_tol {
            self.quadrature_tol = v;
        }
        if let Some(v) = o.grid2d {
            self.grid2d = v;
        }
        if let Some(v) = o.grid3d {
            self.grid3d = v;
        }
        if let Some(v) = o.truncation {
            self.truncation = v;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        if let Some(v) = &o.output {
            self.output = Some(v.clone());
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    field,
                    reason: format!("must be a positive number (got {v})"),
                })
            }
        };
        positive("rank_tol", self.rank_tol)?;
        positive("residual_tol", self.residual_tol)?;
        positive("quadrature_tol", self.quadrature_tol)?;
        positive("truncation", self.truncation)?;
        if self.residual_tol >= 0.5 {
            return Err(ConfigError::OutOfRange {
                field: "residual_tol",
                reason: format!(
                    "must be below 0.5 for rounding to be meaningful (got {})",
                    self.residual_tol
                ),
            });
        }
        for (field, v) in [("grid2d", self.grid2d), ("grid3d", self.grid3d)] {
            if v < MIN_GRID {
                return Err(ConfigError::OutOfRange {
                    field,
                    reason: format!("minimum {MIN_GRID} (got {v})"),
                });
            }
        }
        if self.samples == 0 {
            return Err(ConfigError::OutOfRange {
                field: "samples",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg = RunConfig::from_json(text, Path::new("test.json"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn empty_input_gives_defaults() {
        assert_eq!(parse("").unwrap(), RunConfig::default());
        assert_eq!(parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = parse(r#"{"seed": 7, "grid2d": 64}"#).unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.grid2d, 64);
    }

    #[test]
    fn small_grids_are_rejected() {
        let err = parse(r#"{"grid3d": 8}"#).unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::OutOfRange {
                    field: "grid3d",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn bad_input_is_named() {
        assert!(matches!(
            parse("{seed: 1"),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(matches!(
            parse(r#"{"sead": 1}"#),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(matches!(
            parse(r#"{"rank_tol": -1.0}"#),
            Err(ConfigError::OutOfRange {
                field: "rank_tol",
                ..
            })
        ));
        assert!(matches!(
            parse(r#"{"samples": 0}"#),
            Err(ConfigError::OutOfRange {
                field: "samples",
                ..
            })
        ));
    }
}
