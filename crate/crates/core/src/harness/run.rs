//! Experiment drivers: single solves with residual histories, Lyapunov
//! sweeps over (L, eps, variant) grids, level-set extraction in the eps-n
//! plane, and bound reports. Sweep points run in parallel; every point owns
//! a seed derived from (base seed, level, eps, variant, replication) so
//! results are independent of scheduling and replayable row by row.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    assemble_iteration_matrix, energy_norms, estimate_lyapunov, expected_tensor_two_grid,
    wcycle_bound, BoundMethod, BoundReport,
};
use crate::cycle::{CycleConfig, CycleRunner, SiteModels, SiteOutcomeCounters};
use crate::error::{Error, Result};
use crate::fault::RngStream;
use crate::grid::{build_hierarchy, GridHierarchy};
use crate::linalg::{norm2, spectral_norm, spectral_radius_dense};

use super::config::{ExperimentConfig, RhsKind, SweepVariant};

/// Residual history of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    /// (iteration, Euclidean residual norm), iteration 0 is the start.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
    pub diverged: bool,
    pub seed: u64,
}

impl SolveResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,residual\n");
        for &(k, r) in &self.history {
            out.push_str(&format!("{k},{r}\n"));
        }
        out
    }
}

/// Run repeated cycles from x0 = 0 and record the residual per iteration.
/// Stops at the relative tolerance, at the iteration cap, or on divergence
/// (residual exceeding 1e12 x initial).
pub fn run_solve(config: &ExperimentConfig) -> Result<SolveResult> {
    let spec = config.problem_spec();
    let hierarchy = build_hierarchy(&spec)?;
    let cycle_cfg = config.cycle_config();
    let top = hierarchy.top_level();
    let n = hierarchy.n(top);
    let seed = config.seed;

    let b = match config.solve.rhs {
        RhsKind::Zero => vec![0.0; n],
        RhsKind::Random => {
            let mut rng = RngStream::new(RngStream::derive_seed(seed, &[0xB0B]));
            let xstar: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            hierarchy.a(top).spmv(&xstar)?
        }
    };
    let b_norm = norm2(&b);
    let mut runner = CycleRunner::new(&hierarchy, &cycle_cfg, seed)?;
    let mut x = vec![0.0; n];
    let mut history = vec![(0usize, b_norm)];
    let mut converged = b_norm == 0.0;
    let mut diverged = false;
    if !converged {
        for k in 1..=config.solve.max_iterations {
            x = runner.cycle(&b, x)?;
            let ax = hierarchy.a(top).spmv(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let rn = norm2(&r);
            history.push((k, rn));
            if rn <= config.solve.rel_tolerance * b_norm {
                converged = true;
                break;
            }
            if rn > 1e12 * b_norm {
                diverged = true;
                break;
            }
        }
    }
    Ok(SolveResult {
        history,
        converged,
        diverged,
        seed,
    })
}

/// One row of a Lyapunov sweep: a (level, eps, variant) point aggregated
/// over its replications.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub level: usize,
    pub n: usize,
    pub eps: f64,
    pub label: String,
    /// Mean estimate over replications (NaN when every replication failed).
    pub rho: f64,
    /// Standard error over replications; absent for fewer than 2.
    pub std_err: Option<f64>,
    pub replications: usize,
    /// Base seed of the point; replication seeds derive from it.
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub correct: u64,
    pub mitigated: u64,
    pub undetected: u64,
    pub collapsed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,n,eps,label,rho,std_err,replications,seed,iterations,burn_in,correct,mitigated,undetected,collapsed,error\n",
        );
        for r in &self.rows {
            let std_err = r.std_err.map(|s| s.to_string()).unwrap_or_default();
            let error = r.error.clone().unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.level,
                r.n,
                r.eps,
                r.label,
                r.rho,
                std_err,
                r.replications,
                r.seed,
                r.iterations,
                r.burn_in,
                r.correct,
                r.mitigated,
                r.undetected,
                r.collapsed,
                error
            ));
        }
        out
    }

    /// Rows of one variant as (n, eps, rho) fit points.
    pub fn points_for(&self, label: &str) -> Vec<(f64, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.label == label && r.error.is_none())
            .map(|r| (r.n as f64, r.eps, r.rho))
            .collect()
    }
}

/// Deterministic per-point seed: mixes the base seed with the point's
/// coordinates, never with scheduling order.
pub fn point_seed(base: u64, level: usize, eps: f64, variant_index: usize, replication: usize) -> u64 {
    RngStream::derive_seed(
        base,
        &[
            0x50_1E7,
            level as u64,
            eps.to_bits(),
            variant_index as u64,
            replication as u64,
        ],
    )
}

struct PointOutcome {
    rho_sum: f64,
    rhos: Vec<f64>,
    counters: SiteOutcomeCounters,
    collapsed: bool,
    error: Option<String>,
}

fn run_point(
    hierarchy: &GridHierarchy,
    config: &ExperimentConfig,
    eps: f64,
    variant: &SweepVariant,
    variant_index: usize,
) -> PointOutcome {
    let mut out = PointOutcome {
        rho_sum: 0.0,
        rhos: Vec::new(),
        counters: SiteOutcomeCounters::default(),
        collapsed: false,
        error: None,
    };
    let cycle_cfg = config.cycle_config_at(eps, variant);
    for rep in 0..config.sweep.replications {
        let seed = point_seed(config.seed, hierarchy.spec.levels, eps, variant_index, rep);
        match estimate_lyapunov(
            hierarchy,
            &cycle_cfg,
            config.sweep.iterations,
            config.sweep.burn_in,
            seed,
        ) {
            Ok((est, counters)) => {
                out.rho_sum += est.value;
                out.rhos.push(est.value);
                out.collapsed |= est.collapsed;
                out.counters.merge(&counters);
            }
            Err(e) => {
                out.error = Some(e.to_string());
                break;
            }
        }
    }
    out
}

/// Run the full (level x eps x variant) grid. Hierarchies are built once
/// per level; points of a level run in parallel. Rows are ordered by
/// (level, eps index, variant index) regardless of completion order.
pub fn run_lyapunov_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let variants = config.variants();
    let mut rows = Vec::new();
    for &level in &config.sweep.levels {
        let spec = config.problem_spec_for(level);
        let hierarchy = build_hierarchy(&spec)?;
        let points: Vec<(usize, usize)> = (0..config.sweep.eps.len())
            .flat_map(|ei| (0..variants.len()).map(move |vi| (ei, vi)))
            .collect();
        let outcomes: Vec<PointOutcome> = points
            .par_iter()
            .map(|&(ei, vi)| {
                run_point(&hierarchy, config, config.sweep.eps[ei], &variants[vi], vi)
            })
            .collect();
        for (&(ei, vi), outcome) in points.iter().zip(outcomes) {
            let eps = config.sweep.eps[ei];
            let reps = outcome.rhos.len();
            let rho = if reps > 0 {
                outcome.rho_sum / reps as f64
            } else {
                f64::NAN
            };
            let std_err = if reps >= 2 {
                let mean = rho;
                let var = outcome
                    .rhos
                    .iter()
                    .map(|r| (r - mean) * (r - mean))
                    .sum::<f64>()
                    / (reps as f64 - 1.0);
                Some((var / reps as f64).sqrt())
            } else {
                None
            };
            let totals = outcome.counters.grand_total();
            rows.push(SweepRow {
                level,
                n: hierarchy.n(hierarchy.top_level()),
                eps,
                label: variants[vi].label.clone(),
                rho,
                std_err,
                replications: reps,
                seed: point_seed(config.seed, level, eps, vi, 0),
                iterations: config.sweep.iterations,
                burn_in: config.sweep.burn_in,
                correct: totals.correct,
                mitigated: totals.mitigated,
                undetected: totals.undetected,
                collapsed: outcome.collapsed,
                error: outcome.error,
            });
        }
    }
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelsetStatus {
    /// A crossing eps* with rho(eps*) within tolerance of the target.
    Found,
    /// Even the largest tested rate stays below the target.
    Unbounded,
    /// The fault-free rate already exceeds the target.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelsetRow {
    pub level: usize,
    pub n: usize,
    pub label: String,
    pub status: LevelsetStatus,
    pub eps_star: Option<f64>,
    pub rho_at_star: Option<f64>,
    /// Final bisection bracket and the estimates at its ends.
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelsetResult {
    pub rows: Vec<LevelsetRow>,
    pub target: f64,
}

impl LevelsetResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,n,label,status,eps_star,rho_at_star,bracket_lo,bracket_hi,rho_lo,rho_hi,seed\n",
        );
        for r in &self.rows {
            let status = match r.status {
                LevelsetStatus::Found => "found",
                LevelsetStatus::Unbounded => "unbounded",
                LevelsetStatus::Degenerate => "degenerate",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.level,
                r.n,
                r.label,
                status,
                r.eps_star.map(|v| v.to_string()).unwrap_or_default(),
                r.rho_at_star.map(|v| v.to_string()).unwrap_or_default(),
                r.bracket_lo,
                r.bracket_hi,
                r.rho_lo,
                r.rho_hi,
                r.seed
            ));
        }
        out
    }
}

/// Trace the curve rho(eps, n) = target by bisection on eps at every swept
/// level. Relies on rho being nondecreasing in eps near the crossing; the
/// returned eps* always satisfies the recorded bracket condition.
pub fn run_levelset(config: &ExperimentConfig) -> Result<LevelsetResult> {
    config.validate()?;
    let variants = config.variants();
    let target = config.levelset.target;
    let tol = config.levelset.tol;
    let mut rows = Vec::new();
    for &level in &config.sweep.levels {
        let spec = config.problem_spec_for(level);
        let hierarchy = build_hierarchy(&spec)?;
        let outcomes: Vec<Result<LevelsetRow>> = variants
            .par_iter()
            .enumerate()
            .map(|(vi, variant)| {
                let eval = |eps: f64| -> Result<f64> {
                    let cfg = config.cycle_config_at(eps, variant);
                    let mut sum = 0.0;
                    for rep in 0..config.sweep.replications {
                        let seed = point_seed(config.seed, level, eps, vi, rep);
                        let (est, _) = estimate_lyapunov(
                            &hierarchy,
                            &cfg,
                            config.sweep.iterations,
                            config.sweep.burn_in,
                            seed,
                        )?;
                        sum += est.value;
                    }
                    Ok(sum / config.sweep.replications as f64)
                };
                let n = hierarchy.n(hierarchy.top_level());
                let seed = point_seed(config.seed, level, 0.0, vi, 0);
                let mut lo = 0.0f64;
                let mut hi = config.levelset.eps_hi;
                let mut rho_lo = eval(lo)?;
                let mut rho_hi = eval(hi)?;
                if rho_lo > target {
                    return Ok(LevelsetRow {
                        level,
                        n,
                        label: variant.label.clone(),
                        status: LevelsetStatus::Degenerate,
                        eps_star: Some(0.0),
                        rho_at_star: Some(rho_lo),
                        bracket_lo: lo,
                        bracket_hi: hi,
                        rho_lo,
                        rho_hi,
                        seed,
                    });
                }
                if rho_hi < target {
                    return Ok(LevelsetRow {
                        level,
                        n,
                        label: variant.label.clone(),
                        status: LevelsetStatus::Unbounded,
                        eps_star: None,
                        rho_at_star: None,
                        bracket_lo: lo,
                        bracket_hi: hi,
                        rho_lo,
                        rho_hi,
                        seed,
                    });
                }
                let mut eps_star = 0.5 * (lo + hi);
                let mut rho_star = rho_hi;
                for _ in 0..config.levelset.max_bisections {
                    let mid = 0.5 * (lo + hi);
                    let rho_mid = eval(mid)?;
                    eps_star = mid;
                    rho_star = rho_mid;
                    if (rho_mid - target).abs() <= tol {
                        break;
                    }
                    if rho_mid < target {
                        lo = mid;
                        rho_lo = rho_mid;
                    } else {
                        hi = mid;
                        rho_hi = rho_mid;
                    }
                    if (hi - lo) < 1e-5 {
                        break;
                    }
                }
                Ok(LevelsetRow {
                    level,
                    n,
                    label: variant.label.clone(),
                    status: LevelsetStatus::Found,
                    eps_star: Some(eps_star),
                    rho_at_star: Some(rho_star),
                    bracket_lo: lo,
                    bracket_hi: hi,
                    rho_lo,
                    rho_hi,
                    seed,
                })
            })
            .collect();
        for outcome in outcomes {
            rows.push(outcome?);
        }
    }
    Ok(LevelsetResult { rows, target })
}

/// Bound report for the configured instance: replica-trick bounds (closed
/// form where the models allow, Monte Carlo when samples > 0), the
/// deterministic two-grid quantities, a Lyapunov estimate, and the W-cycle
/// recursion bound when its inputs are configured.
pub fn run_bound(config: &ExperimentConfig) -> Result<BoundReport> {
    config.validate()?;
    let spec = config.problem_spec();
    let hierarchy = build_hierarchy(&spec)?;
    let cycle_cfg = config.cycle_config();
    let mut report = BoundReport {
        n: hierarchy.n(hierarchy.top_level()),
        seed: config.seed,
        ..BoundReport::default()
    };

    match crate::analysis::replica_bound_two_grid(
        &hierarchy,
        &cycle_cfg,
        BoundMethod::ClosedForm,
        config.seed,
    ) {
        Ok(b) => report.replica_bound_closed_form = Some(b),
        Err(Error::UnsupportedModel { .. }) => {}
        Err(e) => return Err(e),
    }
    if config.bound.samples > 0 {
        let tensor = expected_tensor_two_grid(
            &hierarchy,
            &cycle_cfg,
            BoundMethod::MonteCarlo {
                samples: config.bound.samples,
            },
            config.seed,
        )?;
        let rho = spectral_radius_dense(&tensor.matrix, 1e-10)?;
        report.replica_bound_monte_carlo = Some(rho.sqrt());
        report.monte_carlo_samples = Some(config.bound.samples);
    }

    // deterministic two-grid quantities of the fault-free instance
    let clean_cfg = CycleConfig {
        sites: SiteModels::default(),
        ..cycle_cfg
    };
    let e_tg = assemble_iteration_matrix(&hierarchy, &clean_cfg, hierarchy.top_level())?;
    report.two_grid_spectral_radius = Some(spectral_radius_dense(&e_tg, 1e-9)?);
    report.two_grid_norm = Some(spectral_norm(&e_tg, 1e-9)?);
    let a = hierarchy.a(hierarchy.top_level()).to_dense();
    let (energy, double) = energy_norms(&e_tg, &a, &a)?;
    report.two_grid_energy_norm = Some(energy);
    report.two_grid_double_energy_norm = Some(double);

    let (est, _) = estimate_lyapunov(
        &hierarchy,
        &cycle_cfg,
        config.bound.lyapunov_iterations,
        crate::analysis::DEFAULT_BURN_IN,
        config.seed,
    )?;
    report.lyapunov_estimate = Some(est.value);
    report.lyapunov_std_error = Some(est.std_error());
    report.lyapunov_iterations = Some(est.iterations);

    if let (Some(xi), Some(c_star)) = (config.bound.xi, config.bound.c_star) {
        report.wcycle_bound = Some(wcycle_bound(xi, c_star, cycle_cfg.gamma)?);
        report.wcycle_xi = Some(xi);
        report.wcycle_c_star = Some(c_star);
        report.wcycle_gamma = Some(cycle_cfg.gamma);
    }
    Ok(report)
}

/// Per-level operator statistics for the `hierarchy` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct HierarchyInfo {
    pub dimension: usize,
    pub levels: usize,
    pub coarsest_cells: usize,
    pub theta: f64,
    pub level_stats: Vec<LevelStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub nodes_per_side: usize,
    pub unknowns: usize,
    pub nonzeros: usize,
    pub stencil_scale: f64,
    pub max_galerkin_rel_error: f64,
    pub exactly_symmetric: bool,
}

pub fn hierarchy_info(config: &ExperimentConfig) -> Result<HierarchyInfo> {
    let spec = config.problem_spec();
    let hierarchy = build_hierarchy(&spec)?;
    let mut level_stats = Vec::new();
    let mut rng = RngStream::new(RngStream::derive_seed(config.seed, &[0x1F0]));
    for l in 0..=spec.levels {
        let a = hierarchy.a(l);
        // probe the Galerkin relation with a handful of random vectors
        let mut max_rel = 0.0f64;
        if l < spec.levels {
            for _ in 0..5 {
                let x: Vec<f64> = (0..hierarchy.n(l)).map(|_| rng.next_normal()).collect();
                let direct = a.spmv(&x)?;
                let px = hierarchy.p(l).spmv(&x)?;
                let apx = hierarchy.a(l + 1).spmv(&px)?;
                let rapx = hierarchy.r(l).spmv(&apx)?;
                let diff: Vec<f64> = direct.iter().zip(&rapx).map(|(a, b)| a - b).collect();
                max_rel = max_rel.max(norm2(&diff) / norm2(&direct).max(1e-300));
            }
        }
        level_stats.push(LevelStats {
            level: l,
            nodes_per_side: spec.nodes_per_side(l),
            unknowns: hierarchy.n(l),
            nonzeros: a.nnz(),
            stencil_scale: hierarchy.stencil_scale(l),
            max_galerkin_rel_error: max_rel,
            exactly_symmetric: a.asymmetry() == 0.0,
        });
    }
    Ok(HierarchyInfo {
        dimension: spec.dimension,
        levels: spec.levels,
        coarsest_cells: spec.coarsest_cells,
        theta: hierarchy.theta,
        level_stats,
    })
}
