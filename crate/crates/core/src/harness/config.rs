use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::halfline::QuadratureRule;

/// Time grid used for every test function in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_points: usize,
    pub t_max: f64,
    pub rule: QuadratureRule,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_points: 1024, t_max: 40.0, rule: QuadratureRule::Gregory }
    }
}

/// Spatial box of the Fock components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    /// Per-axis node counts for degrees `1..=max_degree`.
    pub nodes_per_axis: Vec<usize>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig { half_width: 12.0, nodes_per_axis: vec![512, 64, 32] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSelection {
    #[default]
    Standard,
    AtomsOnly,
}

/// Parameters of `polycalc demo gaussian`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    /// Time slices of the raw semigroup.
    pub times: Vec<f64>,
    /// Decay rate `a` of the symbol `p_1 = e^{-a t}`.
    pub rate: f64,
    /// Variance `s` of the initial `y_n = prod_j e^{-xi_j^2 / (2 s)}`.
    pub variance: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { times: vec![0.0, 0.2, 0.4, 0.6, 0.8], rate: 1.0, variance: 1.0 }
    }
}

/// A distribution given by corpus name or by file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Named(String),
    File { file: PathBuf },
}

/// A polynomial symbol: `power_test(phi, N)` for a corpus function, or a manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Power { phi: String },
    File { file: PathBuf },
}

/// Generator system for `polycalc calc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    /// Second derivatives on every coordinate of every component.
    Gaussian,
    /// Flat list of scalar generators `[re, im]`, chunked into blocks 1, 2, 3, ...
    Scalar(Vec<[f64; 2]>),
}

/// Initial state for `polycalc calc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Gaussian { variance: f64, y0: f64 },
    File { file: PathBuf },
}

/// The `(F, p, A, y)` quadruple evaluated by `polycalc calc`, plus an
/// optional operator shift applied to the symbol first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalcConfig {
    pub f: DistSpec,
    pub p: PolySpec,
    pub system: SystemSpec,
    pub state: StateSpec,
    pub shift: f64,
}

impl Default for CalcConfig {
    fn default() -> Self {
        CalcConfig {
            f: DistSpec::Named("delta_1".into()),
            p: PolySpec::Power { phi: "t2_exp".into() },
            system: SystemSpec::Gaussian,
            state: StateSpec::Gaussian { variance: 4.0, y0: 1.0 },
            shift: 0.0,
        }
    }
}

/// Everything a run needs. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub grid: GridConfig,
    pub max_degree: usize,
    pub space: SpaceConfig,
    /// Overrides keyed by check name or check group.
    pub tolerances: BTreeMap<String, f64>,
    pub corpus: CorpusSelection,
    pub output_dir: Option<PathBuf>,
    pub demo: DemoConfig,
    pub calc: CalcConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            grid: GridConfig::default(),
            max_degree: 3,
            space: SpaceConfig::default(),
            tolerances: BTreeMap::new(),
            corpus: CorpusSelection::default(),
            output_dir: None,
            demo: DemoConfig::default(),
            calc: CalcConfig::default(),
        }
    }
}

fn bad(msg: String) -> Error {
    Error::Configuration(msg)
}

impl SuiteConfig {
    /// Parses and validates a JSON config. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn from_file(path: &Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = SuiteConfig::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<SuiteConfig> {
        let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let DistSpec::File { file } = &mut self.calc.f {
            fix(file);
        }
        if let PolySpec::File { file } = &mut self.calc.p {
            fix(file);
        }
        if let StateSpec::File { file } = &mut self.calc.state {
            fix(file);
        }
    }

    /// Range checks; also rejects tolerance overrides naming no known check.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(16..=65_536).contains(&g.n_points) {
            return Err(bad(format!("grid.n_points must be in [16, 65536], got {}", g.n_points)));
        }
        if !(g.t_max > 0.0 && g.t_max <= 1e4) {
            return Err(bad(format!("grid.t_max must be in (0, 1e4], got {}", g.t_max)));
        }
        if !(1..=3).contains(&self.max_degree) {
            return Err(bad(format!("max_degree must be in [1, 3], got {}", self.max_degree)));
        }
        let s = &self.space;
        if !(s.half_width > 0.0 && s.half_width <= 1e3) {
            return Err(bad(format!("space.L must be in (0, 1e3], got {}", s.half_width)));
        }
        if s.nodes_per_axis.len() < self.max_degree {
            return Err(bad(format!(
                "space.nodes_per_axis needs {} entries, got {}",
                self.max_degree,
                s.nodes_per_axis.len()
            )));
        }
        for (k, &m) in s.nodes_per_axis.iter().enumerate() {
            let n = k as u32 + 1;
            if !(4..=4096).contains(&m) || (m as u64).pow(n) > 1 << 22 {
                return Err(bad(format!("space.nodes_per_axis[{k}] = {m} is out of range")));
            }
        }
        let known = super::suite::known_names();
        for (key, &tol) in &self.tolerances {
            if !known.iter().any(|k| k == key) {
                return Err(bad(format!("tolerance override for unknown check or group '{key}'")));
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(bad(format!("tolerance for '{key}' must be positive, got {tol}")));
            }
        }
        let d = &self.demo;
        if d.times.is_empty() || d.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(bad("demo.times must be a non-empty list of finite t >= 0".into()));
        }
        if !(d.rate > 0.0 && d.rate.is_finite()) || !(d.variance > 0.0 && d.variance.is_finite()) {
            return Err(bad("demo.rate and demo.variance must be positive".into()));
        }
        if !(self.calc.shift >= 0.0 && self.calc.shift.is_finite()) {
            return Err(bad(format!("calc.shift must be finite and >= 0, got {}", self.calc.shift)));
        }
        if let StateSpec::Gaussian { variance, .. } = self.calc.state {
            if !(variance > 0.0 && variance.is_finite()) {
                return Err(bad("calc.state.variance must be positive".into()));
            }
        }
        Ok(())
    }

    /// Per-axis node counts actually used (the first `max_degree` entries).
    pub fn nodes_per_axis(&self) -> Vec<usize> {
        self.space.nodes_per_axis[..self.max_degree].to_vec()
    }

    /// Hex SHA-256 of the canonical JSON form (defaults filled in, output
    /// location excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
