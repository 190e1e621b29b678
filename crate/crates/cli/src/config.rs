//! Run configuration (JSON, schema version 1).

use std::path::{Path, PathBuf};

use balayage_core::experiments::ScanOptions;
use balayage_core::instances::{Instance, InstanceSpec};
use balayage_core::io::Document;
use balayage_core::{KernelMatrix, Measure, SupportSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Where the kernel and charge come from. Exactly one source per config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    Spec(InstanceSpec),
    /// A kernel file (header-free CSV, or a JSON document with `entries`)
    /// and the charge weights over the same nodes.
    Matrix { path: PathBuf, omega: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSpec {
    /// Every generated node (every index for a raw matrix).
    All,
    Indices(Vec<usize>),
    /// Half-open node index range.
    Range { start: usize, end: usize },
    /// Nodes of shells `from..to` of a shell union.
    Shells { from: usize, to: usize },
}

/// Expected outcomes checked by `verify`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub zero_balayage: bool,
    pub balayage_mass: Option<f64>,
    pub capacity: Option<f64>,
    /// Relative tolerance for the numeric expectations.
    #[serde(default = "default_rel")]
    pub relative: f64,
}

fn default_rel() -> f64 {
    0.02
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub instance: Option<InstanceSource>,
    #[serde(default)]
    pub set: Option<SetSpec>,
    /// Nested sets for `converge-up`, `converge-down` and Gauss chain
    /// diagnostics.
    #[serde(default)]
    pub chain: Option<Vec<SetSpec>>,
    /// Growing truncations for the solvability scan.
    #[serde(default)]
    pub family: Option<Vec<InstanceSpec>>,
    #[serde(default)]
    pub scan: Option<ScanOptions>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// `false` declares the truncation regime for `solvability`.
    #[serde(default = "yes")]
    pub capacity_finite: bool,
    /// Rescale ω so that its pseudo-balayage onto the set has unit mass.
    #[serde(default)]
    pub unit_balayage_mass: bool,
    #[serde(default)]
    pub expect: Option<Expectations>,
}

fn yes() -> bool {
    true
}

/// A parsed config with its hash and base directory.
pub struct Loaded {
    pub config: RunConfig,
    pub sha256: String,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = parse(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        config,
        sha256: hex::encode(Sha256::digest(&bytes)),
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// Parses and validates, reporting the JSON path of the offending field.
pub fn parse(bytes: &[u8]) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        format!("at `{path}`: {}", e.into_inner())
    })?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "at `schema_version`: unsupported version {}, expected {SCHEMA_VERSION}",
            config.schema_version
        ));
    }
    if let Some(t) = config.tol {
        if !(t > 0.0) {
            return Err(format!("at `tol`: must be positive, got {t}"));
        }
    }
    Ok(config)
}

/// Kernel, charge and (for generated instances) the instance itself.
pub struct Problem {
    pub kernel: KernelMatrix,
    pub omega: Measure,
    pub instance: Option<Instance>,
}

impl Problem {
    pub fn node_count(&self) -> usize {
        self.instance.as_ref().map_or(self.kernel.size(), |i| i.node_count)
    }

    pub fn set(&self, spec: &SetSpec) -> Result<SupportSet, CliError> {
        let m = self.kernel.size();
        let set = match spec {
            SetSpec::All => SupportSet::range(0..self.node_count(), m),
            SetSpec::Indices(idx) => SupportSet::new(idx.clone(), m),
            SetSpec::Range { start, end } => {
                if end > &self.node_count() {
                    return Err(CliError::Config(format!("set range end {end} exceeds node count {}", self.node_count())));
                }
                SupportSet::range(*start..*end, m)
            }
            SetSpec::Shells { from, to } => match &self.instance {
                Some(inst) => inst.shell_set(*from..*to),
                None => return Err(CliError::Config("shell sets need a generated instance".into())),
            },
        };
        set.map_err(|e| CliError::Config(e.to_string()))
    }
}

impl Loaded {
    pub fn problem(&self) -> Result<Problem, CliError> {
        match &self.config.instance {
            None => Err(CliError::Config("at `instance`: missing instance source".into())),
            Some(InstanceSource::Spec(spec)) => {
                let inst = Instance::build(spec)?;
                Ok(Problem {
                    kernel: inst.kernel.clone(),
                    omega: inst.omega.clone(),
                    instance: Some(inst),
                })
            }
            Some(InstanceSource::Matrix { path, omega }) => {
                let full = self.base.join(path);
                let kernel = if full.extension().is_some_and(|e| e == "json") {
                    Document::read_path(&full)?.kernel()?
                } else {
                    KernelMatrix::from_csv_path(&full)?
                };
                if omega.len() != kernel.size() {
                    return Err(CliError::Config(format!(
                        "at `instance.matrix.omega`: {} weights for a {}-node kernel",
                        omega.len(),
                        kernel.size()
                    )));
                }
                Ok(Problem {
                    kernel,
                    omega: Measure::new(omega.clone()),
                    instance: None,
                })
            }
        }
    }

    pub fn tol(&self, flag: Option<f64>) -> f64 {
        flag.or(self.config.tol).unwrap_or(balayage_core::tolerances::SOLVER_KKT)
    }
}
