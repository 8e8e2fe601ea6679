//! TOML run configuration.

use std::collections::BTreeMap;
use std::fmt;

use fermigap::fock::{FactorKind, MonomialTerm};
use fermigap::lattice::{Boundary, Lattice};
use fermigap::single_particle::{assemble_t, DisorderSpec, HoppingSpec, SingleParticleModel};
use fermigap::transform::InteractionSet;
use fermigap::C64;
use serde::{Deserialize, Serialize};

/// Suites in execution order.
pub const SUITES: [&str; 11] = [
    "geometry",
    "single-particle",
    "car",
    "majorana",
    "doubling",
    "transform",
    "flow",
    "assembly",
    "localization",
    "gap",
    "lr",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dims: Vec<usize>,
    pub boundary: Vec<Boundary>,
}

/// A product of ladder or Majorana factors, written as space-separated tokens:
/// `a+3` creates on site 3, `a3` annihilates, `c3` and `d3` are the Majorana operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    /// `[re, im]`.
    pub coefficient: [f64; 2],
    pub factors: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub monomials: Vec<MonomialConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// Leading sites of the chain used for the doubled many-body stages.
    pub sites: usize,
    pub s_max: f64,
    pub steps: usize,
    pub substeps: usize,
    pub gamma_factor: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { sites: 2, s_max: 0.05, steps: 40, substeps: 1, gamma_factor: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapCurveConfig {
    pub s_max: f64,
    pub steps: usize,
}

impl Default for GapCurveConfig {
    fn default() -> Self {
        Self { s_max: 0.2, steps: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LrConfig {
    pub t_max: f64,
    pub steps: usize,
    pub theta: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self { t_max: 4.0, steps: 80, theta: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub hopping: HoppingSpec,
    #[serde(default)]
    pub fermi_energy: f64,
    #[serde(default)]
    pub disorder: Option<DisorderSpec>,
    #[serde(default)]
    pub interaction: Vec<TermConfig>,
    #[serde(default = "default_k_h")]
    pub k_h: f64,
    /// Coefficient cutoff of the η transformation.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Leading sites used for the two-copy doubling identity and the transformation oracle.
    #[serde(default = "default_window")]
    pub window_sites: usize,
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub gap_curve: GapCurveConfig,
    #[serde(default)]
    pub lr: LrConfig,
    /// Per-check tolerance overrides keyed by check id.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Suites to run; empty means all.
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_k_h() -> f64 {
    2.0
}

fn default_epsilon() -> f64 {
    fermigap::transform::DEFAULT_EPSILON
}

fn default_window() -> usize {
    2
}

fn default_max_sites() -> usize {
    fermigap::doubled::DEFAULT_MAX_SITES
}

fn n_pair(x: usize, y: usize, u: f64) -> TermConfig {
    TermConfig { monomials: vec![MonomialConfig { coefficient: [u, 0.0], factors: format!("a+{x} a{x} a+{y} a{y}") }] }
}

impl Default for RunConfig {
    /// Six-site dimerized chain (hoppings −1, −0.3) with unit nearest-neighbour density-density interaction.
    fn default() -> Self {
        let entries = (0..5)
            .map(|x| fermigap::single_particle::Entry {
                i: x,
                j: x + 1,
                amplitude: C64::from(if x % 2 == 0 { -1.0 } else { -0.3 }),
            })
            .collect();
        Self {
            seed: 0,
            lattice: LatticeConfig { dims: vec![6], boundary: vec![Boundary::Open] },
            hopping: HoppingSpec { bonds: Vec::new(), entries },
            fermi_energy: 0.0,
            disorder: None,
            interaction: (0..5).map(|x| n_pair(x, x + 1, 1.0)).collect(),
            k_h: default_k_h(),
            epsilon: default_epsilon(),
            window_sites: default_window(),
            max_sites: default_max_sites(),
            flow: FlowConfig::default(),
            gap_curve: GapCurveConfig::default(),
            lr: LrConfig::default(),
            tolerances: BTreeMap::new(),
            suites: Vec::new(),
            output_dir: None,
        }
    }
}

pub fn parse_factors(text: &str) -> Result<Vec<(usize, FactorKind)>, String> {
    text.split_whitespace()
        .map(|tok| {
            let (kind, rest) = if let Some(r) = tok.strip_prefix("a+") {
                (FactorKind::Create, r)
            } else if let Some(r) = tok.strip_prefix('a') {
                (FactorKind::Annihilate, r)
            } else if let Some(r) = tok.strip_prefix('c') {
                (FactorKind::MajoranaC, r)
            } else if let Some(r) = tok.strip_prefix('d') {
                (FactorKind::MajoranaD, r)
            } else {
                return Err(format!("unknown factor '{tok}'"));
            };
            rest.parse::<usize>().map(|site| (site, kind)).map_err(|_| format!("bad site in factor '{tok}'"))
        })
        .collect()
}

pub fn format_factors(factors: &[(usize, FactorKind)]) -> String {
    let toks: Vec<String> = factors
        .iter()
        .map(|&(site, kind)| match kind {
            FactorKind::Create => format!("a+{site}"),
            FactorKind::Annihilate => format!("a{site}"),
            FactorKind::MajoranaC => format!("c{site}"),
            FactorKind::MajoranaD => format!("d{site}"),
        })
        .collect();
    toks.join(" ")
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn lattice(&self) -> Result<Lattice, ConfigError> {
        Lattice::new(&self.lattice.dims, &self.lattice.boundary).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn model(&self) -> Result<SingleParticleModel, ConfigError> {
        assemble_t(&self.lattice()?, &self.hopping, self.fermi_energy, self.disorder)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn interaction(&self) -> Result<InteractionSet, ConfigError> {
        let n = self.lattice()?.len();
        let mut terms = Vec::new();
        for (k, term) in self.interaction.iter().enumerate() {
            let mut monomials = Vec::new();
            for m in &term.monomials {
                let factors = parse_factors(&m.factors).map_err(|e| ConfigError::Invalid(format!("interaction term {k}: {e}")))?;
                monomials.push(MonomialTerm::new(C64::new(m.coefficient[0], m.coefficient[1]), factors));
            }
            terms.push(monomials);
        }
        InteractionSet::new(n, terms).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Suites selected by the config, in execution order.
    pub fn selected_suites(&self) -> Vec<&'static str> {
        SUITES.iter().copied().filter(|s| self.suites.is_empty() || self.suites.iter().any(|x| x == s)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError::Invalid("seed must fit in a signed 64-bit TOML integer".into()));
        }
        let lattice = self.lattice()?;
        let n = lattice.len();
        self.model()?;
        self.interaction()?;
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(ConfigError::Invalid(format!("unknown suite '{s}' (known: {})", SUITES.join(", "))));
            }
        }
        let positive = [
            ("flow.steps", self.flow.steps),
            ("flow.substeps", self.flow.substeps),
            ("gap_curve.steps", self.gap_curve.steps),
            ("lr.steps", self.lr.steps),
            ("window_sites", self.window_sites),
            ("flow.sites", self.flow.sites),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        let finite_positive =
            [("flow.s_max", self.flow.s_max), ("gap_curve.s_max", self.gap_curve.s_max), ("lr.t_max", self.lr.t_max)];
        for (name, v) in finite_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be finite and positive")));
            }
        }
        if !(self.flow.gamma_factor > 0.0 && self.flow.gamma_factor < 1.0) {
            return Err(ConfigError::Invalid("flow.gamma_factor must lie in (0, 1)".into()));
        }
        if !(self.lr.theta > 0.0 && self.lr.theta < 1.0) {
            return Err(ConfigError::Invalid("lr.theta must lie in (0, 1)".into()));
        }
        if !(self.k_h > 1.0) {
            return Err(ConfigError::Invalid("k_h must exceed 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(ConfigError::Invalid("epsilon must be non-negative".into()));
        }
        if self.window_sites > 3 {
            return Err(ConfigError::Invalid("window_sites above 3 exceeds the two-copy space budget".into()));
        }
        if self.flow.sites > 3 {
            return Err(ConfigError::Invalid("flow.sites above 3 exceeds the doubled-space budget".into()));
        }
        if self.window_sites > n || self.flow.sites > n {
            return Err(ConfigError::Invalid(format!("window sizes must not exceed the {n} lattice sites")));
        }
        if lattice.spatial_dim() > 1 && (self.window_sites != n || self.flow.sites != n) {
            return Err(ConfigError::Invalid("site windows are only supported on one-dimensional lattices".into()));
        }
        for (id, tol) in &self.tolerances {
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(ConfigError::Invalid(format!("tolerance for {id} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml())
    }
}
