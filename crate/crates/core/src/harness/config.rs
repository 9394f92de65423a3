//! Declarative experiment configuration (TOML).
//!
//! One flat file describes the problem, the cycle, the fault models with
//! optional per-site overrides, the protection parameters and the sweep /
//! level-set / bound settings. Unknown keys are rejected.

use serde::Deserialize;

use crate::cycle::{CycleConfig, ProtectionConfig, Site, SiteModels, DEFAULT_MAGNITUDE_THRESHOLD};
use crate::error::{Error, Result};
use crate::fault::FaultModel;
use crate::grid::ProblemSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads for sweeps; defaults to the number of cores.
    pub workers: Option<usize>,
    pub problem: ProblemSection,
    #[serde(default)]
    pub cycle: CycleSection,
    #[serde(default)]
    pub faults: FaultsSection,
    #[serde(default)]
    pub protection: ProtectionConfig,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub levelset: LevelsetSection,
    #[serde(default)]
    pub bound: BoundSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub dimension: usize,
    pub levels: usize,
    #[serde(default = "default_coarsest_cells")]
    pub coarsest_cells: usize,
}

fn default_coarsest_cells() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    #[serde(default = "one")]
    pub nu1: usize,
    #[serde(default = "one")]
    pub nu2: usize,
    /// 1 = V-cycle, 2 = W-cycle.
    #[serde(default = "two")]
    pub gamma: usize,
    pub theta: Option<f64>,
    #[serde(default)]
    pub coarsest_level: usize,
    #[serde(default = "default_threshold")]
    pub magnitude_threshold: f64,
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn default_threshold() -> f64 {
    DEFAULT_MAGNITUDE_THRESHOLD
}

impl Default for CycleSection {
    fn default() -> Self {
        CycleSection {
            nu1: 1,
            nu2: 1,
            gamma: 2,
            theta: None,
            coarsest_level: 0,
            magnitude_threshold: DEFAULT_MAGNITUDE_THRESHOLD,
        }
    }
}

/// Default model applied at every site, with optional per-site overrides.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultsSection {
    #[serde(default)]
    pub model: FaultModel,
    #[serde(default)]
    pub sites: SiteOverrides,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteOverrides {
    pub pre_smooth: Option<FaultModel>,
    pub residual: Option<FaultModel>,
    pub restriction: Option<FaultModel>,
    pub prolongation: Option<FaultModel>,
    pub post_smooth: Option<FaultModel>,
}

impl FaultsSection {
    pub fn site_models(&self) -> SiteModels {
        let mut m = SiteModels::uniform(self.model);
        if let Some(v) = self.sites.pre_smooth {
            m.pre_smooth = v;
        }
        if let Some(v) = self.sites.residual {
            m.residual = v;
        }
        if let Some(v) = self.sites.restriction {
            m.restriction = v;
        }
        if let Some(v) = self.sites.prolongation {
            m.prolongation = v;
        }
        if let Some(v) = self.sites.post_smooth {
            m.post_smooth = v;
        }
        m
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_rel_tolerance")]
    pub rel_tolerance: f64,
    /// "random" manufactures b = A x* from a seeded random x*; "zero" uses
    /// b = 0 (immediate convergence).
    #[serde(default)]
    pub rhs: RhsKind,
}

fn default_max_iterations() -> usize {
    200
}
fn default_rel_tolerance() -> f64 {
    1e-10
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            max_iterations: default_max_iterations(),
            rel_tolerance: default_rel_tolerance(),
            rhs: RhsKind::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    #[default]
    Random,
    Zero,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Fault rates; defaults to 8 log-spaced points in [1e-4, 0.6].
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Level counts L; each point builds its own hierarchy.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub replications: usize,
    /// Cycle variants compared on identical axes; defaults to a single
    /// variant named "default" with no overrides.
    #[serde(default, rename = "variant")]
    pub variants: Vec<SweepVariant>,
}

pub fn default_eps() -> Vec<f64> {
    let (lo, hi, count) = (1e-4f64, 0.6f64, 8usize);
    let ratio = (hi / lo).powf(1.0 / (count as f64 - 1.0));
    (0..count).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn default_levels() -> Vec<usize> {
    (5..=9).collect()
}
fn default_iterations() -> usize {
    crate::analysis::DEFAULT_LYAPUNOV_ITERATIONS
}
fn default_burn_in() -> usize {
    crate::analysis::DEFAULT_BURN_IN
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps: default_eps(),
            levels: default_levels(),
            iterations: default_iterations(),
            burn_in: default_burn_in(),
            replications: 1,
            variants: Vec::new(),
        }
    }
}

/// One labelled cycle variant of a sweep (protection settings only; the
/// fault axes stay identical so variants are directly comparable).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepVariant {
    pub label: String,
    /// Replace the prolongation model by `none` (X_P = I).
    #[serde(default)]
    pub protect_prolongation: bool,
    pub detect_replicas: Option<u32>,
    pub prolong_replicas: Option<u32>,
    pub prolong_accept: Option<u32>,
}

impl SweepVariant {
    pub fn plain(label: &str) -> Self {
        SweepVariant {
            label: label.to_string(),
            protect_prolongation: false,
            detect_replicas: None,
            prolong_replicas: None,
            prolong_accept: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsetSection {
    /// Contraction-factor level to trace in the eps-n plane.
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_target_tol")]
    pub tol: f64,
    #[serde(default = "default_eps_hi")]
    pub eps_hi: f64,
    #[serde(default = "default_max_bisections")]
    pub max_bisections: usize,
}

fn default_target() -> f64 {
    0.57
}
fn default_target_tol() -> f64 {
    0.005
}
fn default_eps_hi() -> f64 {
    0.6
}
fn default_max_bisections() -> usize {
    30
}

impl Default for LevelsetSection {
    fn default() -> Self {
        LevelsetSection {
            target: default_target(),
            tol: default_target_tol(),
            eps_hi: default_eps_hi(),
            max_bisections: default_max_bisections(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    /// Monte-Carlo samples for the tensor expectation (0 disables).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Lyapunov iterations for the in-report estimate.
    #[serde(default = "default_bound_iterations")]
    pub lyapunov_iterations: usize,
    /// Inputs to the recursion bound; both must be present to evaluate it.
    pub xi: Option<f64>,
    pub c_star: Option<f64>,
}

fn default_samples() -> usize {
    100_000
}
fn default_bound_iterations() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        ProblemSpec {
            dimension: self.problem.dimension,
            levels: self.problem.levels,
            coarsest_cells: self.problem.coarsest_cells,
        }
    }

    /// Spec for a specific level count (sweeps vary L).
    pub fn problem_spec_for(&self, levels: usize) -> ProblemSpec {
        ProblemSpec {
            levels,
            ..self.problem_spec()
        }
    }

    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            nu1: self.cycle.nu1,
            nu2: self.cycle.nu2,
            gamma: self.cycle.gamma,
            theta: self.cycle.theta,
            sites: self.faults.site_models(),
            protection: self.protection,
            magnitude_threshold: self.cycle.magnitude_threshold,
            coarsest_level: self.cycle.coarsest_level,
        }
    }

    /// Cycle config for one sweep point: every faulty site's rate replaced
    /// by `eps`, then the variant's protection overrides applied.
    pub fn cycle_config_at(&self, eps: f64, variant: &SweepVariant) -> CycleConfig {
        let mut cfg = self.cycle_config();
        cfg.sites = with_rate(&cfg.sites, eps);
        if let Some(k) = variant.detect_replicas {
            cfg.protection.detect_replicas = k;
        }
        if let Some(k) = variant.prolong_replicas {
            cfg.protection.prolong_replicas = k;
        }
        if let Some(k) = variant.prolong_accept {
            cfg.protection.prolong_accept = k;
        }
        if variant.protect_prolongation {
            cfg.sites.prolongation = FaultModel::None;
        }
        cfg
    }

    pub fn variants(&self) -> Vec<SweepVariant> {
        if self.sweep.variants.is_empty() {
            vec![SweepVariant::plain("default")]
        } else {
            self.sweep.variants.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem_spec().validate()?;
        self.cycle_config().validate()?;
        for &e in &self.sweep.eps {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!("sweep eps {e} outside [0, 1]")));
            }
        }
        if self.sweep.levels.is_empty() {
            return Err(Error::Config("sweep.levels must not be empty".into()));
        }
        if self.sweep.replications < 1 {
            return Err(Error::Config("sweep.replications must be >= 1".into()));
        }
        if self.sweep.iterations < 1 {
            return Err(Error::Config("sweep.iterations must be >= 1".into()));
        }
        let mut labels: Vec<&str> = Vec::new();
        for v in &self.sweep.variants {
            if labels.contains(&v.label.as_str()) {
                return Err(Error::Config(format!("duplicate variant label {}", v.label)));
            }
            labels.push(&v.label);
        }
        if !(0.0 < self.levelset.target && self.levelset.target < 1.0) {
            return Err(Error::Config("levelset.target must lie in (0, 1)".into()));
        }
        if self.levelset.eps_hi <= 0.0 || self.levelset.eps_hi > 1.0 {
            return Err(Error::Config("levelset.eps_hi must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Replace the rate of every non-none site model, keeping kind and shape
/// parameters.
pub fn with_rate(sites: &SiteModels, eps: f64) -> SiteModels {
    let map = |m: &FaultModel| -> FaultModel {
        match *m {
            FaultModel::None => FaultModel::None,
            FaultModel::Componentwise { .. } => FaultModel::Componentwise { rate: eps },
            FaultModel::Blockwise { block_size, .. } => FaultModel::Blockwise {
                rate: eps,
                block_size,
            },
            FaultModel::Silent { magnitude, .. } => FaultModel::Silent {
                rate: eps,
                magnitude,
            },
            FaultModel::Bitflip { .. } => FaultModel::Bitflip { rate: eps },
        }
    };
    let mut out = *sites;
    for site in Site::ALL {
        let m = map(out.get(site));
        match site {
            Site::PreSmooth => out.pre_smooth = m,
            Site::Residual => out.residual = m,
            Site::Restriction => out.restriction = m,
            Site::Prolongation => out.prolongation = m,
            Site::PostSmooth => out.post_smooth = m,
        }
    }
    out
}
