//! JSON experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypspace::{GeometryError, Isometry, Mobius, Model, ModelParams};
use crate::matprod::{self, MatrixError, MatrixMeasure};
use crate::walk::{FiniteMeasure, WalkError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Drift,
    Tail,
    BoundsTable,
    Poisson,
    Matrix,
    Frostman,
    Tits,
    Continuity,
    Spectral,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Drift,
        ExperimentKind::Tail,
        ExperimentKind::BoundsTable,
        ExperimentKind::Poisson,
        ExperimentKind::Matrix,
        ExperimentKind::Frostman,
        ExperimentKind::Tits,
        ExperimentKind::Continuity,
        ExperimentKind::Spectral,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).expect("unit variant").as_str().expect("string tag").to_owned()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordAtom {
    pub word: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixAtom {
    /// Row-major entries.
    pub matrix: Vec<Vec<f64>>,
    pub weight: f64,
}

/// A probability measure, given by atoms appropriate to the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Uniform on the free generators and their inverses.
    Srw { rank: u8 },
    /// Tree words such as `"aB"`.
    Words { rank: u8, atoms: Vec<WordAtom> },
    /// `2 × 2` matrices acting on the plane by Möbius maps.
    Mobius { atoms: Vec<MatrixAtom> },
    /// `d × d` invertible matrices for matrix-product experiments.
    Matrices { atoms: Vec<MatrixAtom> },
    /// The two-atom example `diag(2, ½)`, `rot(π/7)·diag(2, ½)`.
    StandardMatrix,
    /// Another JSON file containing a measure spec.
    File { path: PathBuf },
}

/// A parsed measure.
#[derive(Clone, Debug)]
pub enum Measure {
    Group(FiniteMeasure),
    Matrix(MatrixMeasure),
}

impl MeasureSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Measure, ConfigError> {
        Ok(match self {
            MeasureSpec::Srw { rank } => Measure::Group(FiniteMeasure::srw(*rank)?),
            MeasureSpec::Words { rank, atoms } => {
                let mut out = Vec::with_capacity(atoms.len());
                for a in atoms {
                    out.push((Isometry::parse_word(&a.word, *rank)?, a.weight));
                }
                Measure::Group(FiniteMeasure::new(out)?)
            }
            MeasureSpec::Mobius { atoms } => {
                let mut out = Vec::with_capacity(atoms.len());
                for a in atoms {
                    let m = &a.matrix;
                    if m.len() != 2 || m.iter().any(|r| r.len() != 2) {
                        return invalid("Möbius atoms must be 2×2 matrices");
                    }
                    out.push((Isometry::Plane(Mobius::new(m[0][0], m[0][1], m[1][0], m[1][1])?), a.weight));
                }
                Measure::Group(FiniteMeasure::new(out)?)
            }
            MeasureSpec::Matrices { atoms } => {
                let rows: Vec<_> = atoms.iter().map(|a| (a.matrix.clone(), a.weight)).collect();
                Measure::Matrix(MatrixMeasure::from_rows(&rows)?)
            }
            MeasureSpec::StandardMatrix => Measure::Matrix(matprod::standard_example()),
            MeasureSpec::File { path } => {
                let full = base_dir.join(path);
                let text = read(&full)?;
                let spec: MeasureSpec = parse(&text, &full)?;
                spec.build(full.parent().unwrap_or(base_dir))?
            }
        })
    }
}

/// Options of a single run. Fields not used by the chosen kind are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Master seed; `--seed` overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Model of the measure; inferred from the measure when absent.
    #[serde(default)]
    pub model: Option<Model>,
    /// Hyperbolicity constant for the plane model.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    /// Mix the measure with `r·δ_e`.
    #[serde(default)]
    pub laziness: Option<f64>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
    /// Drift or Lyapunov exponent; estimated when absent.
    #[serde(default)]
    pub ell: Option<f64>,
    /// The constant `𝔠`; estimated when absent.
    #[serde(default)]
    pub c: Option<f64>,
    /// Samples used to estimate `𝔠` or boundary frequencies.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Upper bounds on `‖λ_G(μ)‖₂` (one per table column for bounds-table).
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Displacement bound `κ` for bounds-table.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Laziness grid for Frostman and drift lower bounds.
    #[serde(default)]
    pub r_grid: Vec<f64>,
    /// Random chains for the Poisson experiment.
    #[serde(default)]
    pub chains: Option<usize>,
    #[serde(default)]
    pub states: Option<usize>,
    /// An explicit chain: transition rows and observable.
    #[serde(default)]
    pub chain: Option<ChainSpec>,
    /// Word length for the relation search in tits runs.
    #[serde(default)]
    pub oracle_len: Option<usize>,
    /// Horizon for return probabilities.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Free-pair power for the uniform Tits spectral bound.
    #[serde(default)]
    pub free_pair_power: Option<u32>,
    /// Largest cylinder length in Frostman runs.
    #[serde(default)]
    pub m_max: Option<usize>,
    /// Family for continuity scans: word atoms whose weights are
    /// `(1 − p)·base + p·perturbation` for `p` in `p_grid`.
    #[serde(default)]
    pub perturbation: Option<MeasureSpec>,
    #[serde(default)]
    pub p_grid: Vec<f64>,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub rows: Vec<Vec<f64>>,
    pub observable: Vec<f64>,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: None,
            model: None,
            delta: None,
            measure: None,
            laziness: None,
            n_grid: Vec::new(),
            t_grid: Vec::new(),
            trials: None,
            ell: None,
            c: None,
            samples: None,
            lambdas: Vec::new(),
            kappa: None,
            r_grid: Vec::new(),
            chains: None,
            states: None,
            chain: None,
            oracle_len: None,
            n_max: None,
            free_pair_power: None,
            m_max: None,
            perturbation: None,
            p_grid: Vec::new(),
            out: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let mut cfg: ExperimentConfig = parse(&text, path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        parse(text, Path::new("<inline>"))
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| ConfigError::Invalid("a seed is required (config field or --seed)".into()))
    }

    pub fn trials_or(&self, default: usize) -> Result<usize, ConfigError> {
        match self.trials {
            Some(0) => invalid("trials must be positive"),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }

    pub fn require_n_grid(&self) -> Result<&[usize], ConfigError> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return invalid("n_grid must be nonempty with positive entries");
        }
        Ok(&self.n_grid)
    }

    pub fn require_t_grid(&self) -> Result<&[f64], ConfigError> {
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return invalid("t_grid must be nonempty with finite nonnegative entries");
        }
        Ok(&self.t_grid)
    }

    pub fn measure(&self) -> Result<Measure, ConfigError> {
        let Some(spec) = &self.measure else {
            return invalid("a measure is required for this experiment");
        };
        let m = spec.build(&self.base_dir)?;
        Ok(match (m, self.laziness) {
            (Measure::Group(mu), Some(r)) => Measure::Group(mu.lazy(r)?),
            (Measure::Matrix(_), Some(_)) => return invalid("laziness applies to group measures only"),
            (m, None) => m,
        })
    }

    pub fn group_measure(&self) -> Result<FiniteMeasure, ConfigError> {
        match self.measure()? {
            Measure::Group(mu) => Ok(mu),
            Measure::Matrix(_) => invalid("this experiment needs a tree or plane measure"),
        }
    }

    pub fn matrix_measure(&self) -> Result<MatrixMeasure, ConfigError> {
        match &self.measure {
            None => Ok(matprod::standard_example()),
            Some(_) => match self.measure()? {
                Measure::Matrix(mu) => Ok(mu),
                Measure::Group(_) => invalid("this experiment needs a matrix measure"),
            },
        }
    }

    /// Model parameters, from the config or the measure.
    pub fn params(&self, model: Model) -> Result<ModelParams, ConfigError> {
        if let Some(m) = self.model {
            if m != model {
                return invalid(format!("config model {m:?} does not match the measure model {model:?}"));
            }
        }
        let p = match (model, self.delta) {
            (Model::Plane, Some(d)) => ModelParams::plane(d)?,
            (Model::Tree { .. }, Some(d)) if d != 0.0 => return invalid("trees are 0-hyperbolic"),
            (m, _) => ModelParams::for_model(m)?,
        };
        Ok(p)
    }
}
