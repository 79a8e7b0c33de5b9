//! Scenario files.
//!
//! A scenario is a TOML document. Top-level keys:
//!
//! ```toml
//! task = "solve"                  # solve | verify | efficiency | table | sensitivity (optional)
//! model = "michaelis-menten"      # michaelis-menten | emax | exponential
//! method = "mle"                  # mle | lse
//! output = "design.json"          # optional, --output wins
//! design_space = { lower = 0.0, upper = 80.0 }
//!
//! [prior]                         # either a grid ...
//! intervals = [[8.0, 24.0], [1.75, 5.25]]
//! nu = 11
//! # ... or explicit atoms
//! # atoms = [{ theta = [16.0, 3.5], weight = 1.0 }]
//! # rho_atoms = [{ rho_sq = 0.25, weight = 0.5 }, { rho_sq = 4.0, weight = 0.5 }]
//!
//! [error]                         # rho_sq, or both variances
//! rho_sq = 1.0
//!
//! [design]                        # verify, sensitivity
//! points = [5.82, 80.0]           # weights default to equal
//!
//! [[candidates]]                  # efficiency
//! points = [0.0, 17.5, 35.0]
//!
//! [reference]                     # efficiency, optional (default: solver design)
//! points = [0.0, 11.59, 35.0]
//!
//! [verify]                        # verify, sensitivity
//! grid_size = 2001
//! tolerance = 1e-6
//!
//! [table]
//! id = 1
//!
//! [optimizer]                     # particle swarm overrides
//! particles = 40
//! iterations = 500
//! seed = 1729
//! ```

use std::fmt;
use std::path::PathBuf;

use eivdesign::equivalence::{DEFAULT_GRID_SIZE, DEFAULT_TOL};
use eivdesign::{
    uniform_grid_prior, Design, DesignSpace, DiscretePrior, ErrorSpec, EstimationMethod, ModelKind,
    ParamVector, RatioPrior, SwarmConfig,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Solve,
    Verify,
    Efficiency,
    Table,
    Sensitivity,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Verify => "verify",
            Task::Efficiency => "efficiency",
            Task::Table => "table",
            Task::Sensitivity => "sensitivity",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<EstimationMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSpecInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default)]
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_atoms: Option<Vec<RatioAtomSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub theta: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioAtomSpec {
    pub rho_sq: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpecInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eta_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eps_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub id: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cognitive: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A rejected scenario, with the dotted path of the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Checked<T> = std::result::Result<T, ConfigError>;

impl Scenario {
    pub fn parse(text: &str) -> Checked<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| field_at(text, s.start))
                .unwrap_or_default();
            ConfigError::new(field, e.message())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Picks the task from the verb and the file; they must agree.
    pub fn resolve_task(&self, verb: Task) -> Checked<Task> {
        match self.task {
            Some(t) if t != verb => Err(ConfigError::new(
                "task",
                format!("file asks for `{t}` but the command is `{verb}`"),
            )),
            _ => Ok(verb),
        }
    }

    pub fn model(&self) -> Checked<ModelKind> {
        self.model
            .ok_or_else(|| ConfigError::new("model", "missing"))
    }

    pub fn method(&self) -> Checked<EstimationMethod> {
        self.method
            .ok_or_else(|| ConfigError::new("method", "missing"))
    }

    pub fn space(&self) -> Checked<DesignSpace> {
        let s = self
            .design_space
            .ok_or_else(|| ConfigError::new("design_space", "missing"))?;
        DesignSpace::new(s.lower, s.upper).map_err(|e| ConfigError::new("design_space", e))
    }

    /// Upper end of a space that starts at zero, as the solvers require.
    pub fn x_upper(&self) -> Checked<f64> {
        let s = self.space()?;
        if s.lower != 0.0 {
            return Err(ConfigError::new(
                "design_space.lower",
                "solvers need lower = 0",
            ));
        }
        Ok(s.upper)
    }

    pub fn prior(&self) -> Checked<DiscretePrior> {
        let model = self.model()?;
        let p = self
            .prior
            .as_ref()
            .ok_or_else(|| ConfigError::new("prior", "missing"))?;
        let prior = match (&p.intervals, &p.atoms) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "prior",
                    "give either intervals or atoms, not both",
                ))
            }
            (Some(iv), None) => {
                let nu =
                    p.nu.ok_or_else(|| ConfigError::new("prior.nu", "missing"))?;
                uniform_grid_prior(iv, nu).map_err(|e| ConfigError::new("prior.intervals", e))?
            }
            (None, Some(atoms)) => {
                if p.nu.is_some() {
                    return Err(ConfigError::new("prior.nu", "only used with intervals"));
                }
                let mut parsed = Vec::with_capacity(atoms.len());
                for (i, a) in atoms.iter().enumerate() {
                    let theta = ParamVector::new(&a.theta)
                        .map_err(|e| ConfigError::new(format!("prior.atoms[{i}].theta"), e))?;
                    parsed.push((theta, a.weight));
                }
                DiscretePrior::new(parsed).map_err(|e| ConfigError::new("prior.atoms.weight", e))?
            }
            (None, None) => return Err(ConfigError::new("prior", "needs intervals or atoms")),
        };
        prior
            .check_model(model)
            .map_err(|e| ConfigError::new("prior", e))?;
        Ok(prior)
    }

    /// The ratio prior (a point mass unless `prior.rho_atoms` is given) and
    /// `σ²_η`.
    pub fn ratios(&self) -> Checked<(RatioPrior, f64)> {
        let rho_atoms = self.prior.as_ref().and_then(|p| p.rho_atoms.as_ref());
        if let Some(atoms) = rho_atoms {
            if self.error.is_some() {
                return Err(ConfigError::new(
                    "error",
                    "not allowed together with prior.rho_atoms",
                ));
            }
            let r = RatioPrior::new(atoms.iter().map(|a| (a.rho_sq, a.weight)).collect())
                .map_err(|e| ConfigError::new("prior.rho_atoms", e))?;
            return Ok((r, 1.0));
        }
        let err = self.error_spec()?;
        let r = RatioPrior::point(err.rho_sq()).map_err(|e| ConfigError::new("error", e))?;
        Ok((r, err.sigma_eta_sq))
    }

    /// The single error specification; fails under a ratio prior.
    pub fn error_spec(&self) -> Checked<ErrorSpec> {
        let e = self
            .error
            .ok_or_else(|| ConfigError::new("error", "missing"))?;
        let spec = match (e.rho_sq, e.sigma_eta_sq, e.sigma_eps_sq) {
            (Some(r), None, None) => ErrorSpec::from_ratio(r),
            (None, Some(a), Some(b)) => ErrorSpec::new(a, b),
            _ => {
                return Err(ConfigError::new(
                    "error",
                    "give rho_sq, or both sigma_eta_sq and sigma_eps_sq",
                ))
            }
        };
        spec.map_err(|err| ConfigError::new("error", err))
    }

    pub fn swarm(&self, seed: Option<u64>) -> Checked<SwarmConfig> {
        let mut cfg = SwarmConfig::new(Vec::new());
        if let Some(o) = &self.optimizer {
            cfg.particles = o.particles.unwrap_or(cfg.particles);
            cfg.iterations = o.iterations.unwrap_or(cfg.iterations);
            cfg.inertia = o.inertia.unwrap_or(cfg.inertia);
            cfg.cognitive = o.cognitive.unwrap_or(cfg.cognitive);
            cfg.social = o.social.unwrap_or(cfg.social);
            cfg.seed = o.seed.unwrap_or(cfg.seed);
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let mut probe = cfg.clone();
        probe.bounds = vec![(0.0, 1.0)];
        probe
            .validate()
            .map_err(|e| ConfigError::new("optimizer", e))?;
        Ok(cfg)
    }

    pub fn grid_size(&self) -> Checked<usize> {
        let n = self
            .verify
            .and_then(|v| v.grid_size)
            .unwrap_or(DEFAULT_GRID_SIZE);
        if n < 2 {
            return Err(ConfigError::new(
                "verify.grid_size",
                "need at least 2 points",
            ));
        }
        Ok(n)
    }

    pub fn tolerance(&self) -> Checked<f64> {
        let t = self.verify.and_then(|v| v.tolerance).unwrap_or(DEFAULT_TOL);
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ConfigError::new(
                "verify.tolerance",
                "must be a finite number ≥ 0",
            ));
        }
        Ok(t)
    }

    pub fn design(&self) -> Checked<Design> {
        let d = self
            .design
            .as_ref()
            .ok_or_else(|| ConfigError::new("design", "missing"))?;
        self.build_design(d, "design")
    }

    pub fn candidates(&self) -> Checked<Vec<Design>> {
        if self.candidates.is_empty() {
            return Err(ConfigError::new("candidates", "need at least one design"));
        }
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, d)| self.build_design(d, &format!("candidates[{i}]")))
            .collect()
    }

    pub fn reference(&self) -> Checked<Option<Design>> {
        self.reference
            .as_ref()
            .map(|d| self.build_design(d, "reference"))
            .transpose()
    }

    pub fn table_id(&self) -> Checked<u8> {
        let id = self
            .table
            .ok_or_else(|| ConfigError::new("table.id", "missing"))?
            .id;
        if !(1..=4).contains(&id) {
            return Err(ConfigError::new("table.id", format!("{id} not in 1..=4")));
        }
        Ok(id)
    }

    fn build_design(&self, d: &DesignSpec, field: &str) -> Checked<Design> {
        let design = match &d.weights {
            Some(w) => Design::from_unsorted(&d.points, w),
            None => Design::equal_weights(d.points.clone()),
        }
        .map_err(|e| ConfigError::new(field, e))?;
        design
            .check_within(&self.space()?)
            .map_err(|e| ConfigError::new(format!("{field}.points"), e))?;
        Ok(design)
    }
}

/// Dotted key path of the table or key enclosing byte `offset`.
fn field_at(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let mut table = String::new();
    for line in before.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
    }
    let line = text[before.rfind('\n').map_or(0, |i| i + 1)..]
        .lines()
        .next()
        .unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    let key = if line.contains('=') && !key.starts_with('[') {
        key
    } else {
        ""
    };
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key.to_string(),
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}
