//! Convergence analysis: renormalized-iteration estimates of the Lyapunov
//! spectral radius, deterministic iteration matrices by the level
//! recursion, the tensor-expectation (replica) bound for the two-grid
//! method, energy norms, the W-cycle recursion bound and scaling-exponent
//! fits.

use serde::Serialize;

use crate::cycle::{CycleConfig, CycleRunner, Site, SiteOutcomeCounters};
use crate::error::{Error, Result};
use crate::fault::{FaultModel, RngStream};
use crate::grid::GridHierarchy;
use crate::linalg::{
    kron, norm2, scale, spectral_norm, spectral_radius_dense, sqrt_power, DenseMatrix,
};

pub const DEFAULT_LYAPUNOV_ITERATIONS: usize = 1000;
/// First factors discarded to let the iterate align with the dominant
/// directions before the geometric mean starts counting.
pub const DEFAULT_BURN_IN: usize = 50;

/// Geometric-mean contraction estimate of one run.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// exp(mean of log factors) over the counted iterations.
    pub value: f64,
    /// Counted iterations (after burn-in).
    pub iterations: usize,
    pub burn_in: usize,
    /// Per-iteration contraction factors, one per counted iteration.
    pub factors: Vec<f64>,
    pub seed: u64,
    /// The iterate collapsed to exactly zero at least once (total
    /// mitigation); the affected factors carry the smallest positive float.
    pub collapsed: bool,
}

impl LyapunovEstimate {
    /// Standard error of the estimate propagated from the scatter of the
    /// log factors; zero for a deterministic run.
    pub fn std_error(&self) -> f64 {
        let n = self.factors.len();
        if n < 2 {
            return 0.0;
        }
        let logs: Vec<f64> = self.factors.iter().map(|f| f.ln()).collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n as f64 - 1.0);
        self.value * (var / n as f64).sqrt()
    }
}

/// Geometric-mean contraction factor of an arbitrary map under the
/// renormalized-iteration protocol: start from a seeded random unit vector,
/// apply the map, record the norm, renormalize.
pub fn lyapunov_of_map<F>(
    mut step: F,
    n: usize,
    iterations: usize,
    burn_in: usize,
    seed: u64,
) -> LyapunovEstimate
where
    F: FnMut(Vec<f64>) -> Vec<f64>,
{
    let mut init_rng = RngStream::new(RngStream::derive_seed(seed, &[0x1417]));
    let mut x: Vec<f64> = (0..n).map(|_| init_rng.next_normal()).collect();
    let nx = norm2(&x);
    scale(1.0 / nx, &mut x);

    let mut factors = Vec::with_capacity(iterations);
    let mut collapsed = false;
    for k in 0..burn_in + iterations {
        x = step(x);
        let f = norm2(&x);
        let factor = if f == 0.0 {
            collapsed = true;
            // restart from a fresh direction so the run can continue
            let mut rng = RngStream::new(RngStream::derive_seed(seed, &[0x1418, k as u64]));
            x = (0..n).map(|_| rng.next_normal()).collect();
            let nx = norm2(&x);
            scale(1.0 / nx, &mut x);
            f64::MIN_POSITIVE
        } else {
            scale(1.0 / f, &mut x);
            f
        };
        if k >= burn_in {
            factors.push(factor);
        }
    }
    let mean_log = factors.iter().map(|f| f.ln()).sum::<f64>() / factors.len().max(1) as f64;
    LyapunovEstimate {
        value: mean_log.exp(),
        iterations: factors.len(),
        burn_in,
        factors,
        seed,
        collapsed,
    }
}

/// Lyapunov spectral-radius estimate of the fault-prone cycle: zero right
/// hand side, seeded random unit start, `iterations` counted factors after
/// `burn_in` discarded ones. Also returns the run's fault-event counters.
pub fn estimate_lyapunov(
    hierarchy: &GridHierarchy,
    config: &CycleConfig,
    iterations: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(LyapunovEstimate, SiteOutcomeCounters)> {
    if iterations < 1 {
        return Err(Error::InvalidSpec("need at least one iteration".into()));
    }
    let mut runner = CycleRunner::new(hierarchy, config, seed)?;
    let top = hierarchy.top_level();
    let n = hierarchy.n(top);
    let b = vec![0.0; n];
    let est = lyapunov_of_map(|x| runner.mg(top, &b, x), n, iterations, burn_in, seed);
    Ok((est, runner.counters))
}

/// Deterministic iteration matrix by the level recursion
/// E_0 = 0,
/// E_l = S^nu2 [I - P (I - E_{l-1}^gamma) A_{l-1}^{-1} R A_l] S^nu1,
/// with S = I - theta D^{-1} A. Requires a fault-free configuration.
pub fn assemble_iteration_matrix(
    hierarchy: &GridHierarchy,
    config: &CycleConfig,
    level: usize,
) -> Result<DenseMatrix> {
    config.validate()?;
    if !config.sites.all_none() {
        return Err(Error::InvalidSpec(
            "iteration matrix assembly needs all fault models set to none".into(),
        ));
    }
    if level > hierarchy.top_level() || level < config.coarsest_level {
        return Err(Error::InvalidSpec(format!(
            "level {level} outside [{}, {}]",
            config.coarsest_level,
            hierarchy.top_level()
        )));
    }
    let nmax = hierarchy.n(level);
    if nmax > 4096 {
        return Err(Error::SizeGuard {
            context: "assemble_iteration_matrix",
            requested: nmax,
            limit: 4096,
        });
    }
    let theta = config.theta.unwrap_or(hierarchy.theta);
    let n0 = hierarchy.n(config.coarsest_level);
    let mut e = DenseMatrix::zeros(n0, n0);
    for l in config.coarsest_level + 1..=level {
        let n = hierarchy.n(l);
        let a = hierarchy.a(l).to_dense();
        let diag = hierarchy.jacobi_diag(l);
        // S = I - theta D^-1 A
        let mut s = DenseMatrix::identity(n);
        for r in 0..n {
            let w = theta / diag[r];
            for c in 0..n {
                s.set(r, c, s.get(r, c) - w * a.get(r, c));
            }
        }
        let p = hierarchy.p(l - 1).to_dense();
        let r = hierarchy.r(l - 1).to_dense();
        let ac_inv = hierarchy.a(l - 1).to_dense().inverse_spd()?;
        let nc = hierarchy.n(l - 1);
        let correction = DenseMatrix::identity(nc).sub(&e.pow(config.gamma)?)?;
        let cgc = DenseMatrix::identity(n).sub(
            &p.matmul(&correction)?
                .matmul(&ac_inv)?
                .matmul(&r)?
                .matmul(&a)?,
        )?;
        e = s.pow(config.nu2)?.matmul(&cgc)?.matmul(&s.pow(config.nu1)?)?;
    }
    Ok(e)
}

/// How the tensor expectation E[E (x) E] is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    /// Exact assembly from site independence and Bernoulli pair moments.
    ClosedForm,
    /// Empirical average of sampled E (x) E realizations.
    MonteCarlo { samples: usize },
}

/// Tensor expectation with optional entrywise standard errors (Monte Carlo
/// only).
#[derive(Debug, Clone)]
pub struct TensorExpectation {
    pub matrix: DenseMatrix,
    pub std_error: Option<DenseMatrix>,
}

const TWO_GRID_MAX_N: usize = 64;

fn two_grid_dims(hierarchy: &GridHierarchy, config: &CycleConfig) -> Result<(usize, usize)> {
    if hierarchy.top_level() != config.coarsest_level + 1 {
        return Err(Error::InvalidSpec(format!(
            "two-grid analysis needs exactly one level above the coarsest (top {}, coarsest {})",
            hierarchy.top_level(),
            config.coarsest_level
        )));
    }
    let n = hierarchy.n(hierarchy.top_level());
    if n > TWO_GRID_MAX_N {
        return Err(Error::SizeGuard {
            context: "replica_bound_two_grid",
            requested: n,
            limit: TWO_GRID_MAX_N,
        });
    }
    Ok((n, hierarchy.n(config.coarsest_level)))
}

/// Effective per-unit zero rate of a site's output after detection, plus
/// the unit (block) size. Closed form covers the zeroing models only.
fn site_effective_rate(
    config: &CycleConfig,
    site: Site,
    context: &'static str,
) -> Result<(f64, usize)> {
    let model = config.sites.get(site);
    let (replicas, accept) = config.site_rule(site);
    match *model {
        FaultModel::None => Ok((0.0, 1)),
        FaultModel::Componentwise { rate } => {
            Ok((crate::cycle::effective_zero_rate(rate, replicas, accept), 1))
        }
        FaultModel::Blockwise { rate, block_size } => Ok((
            crate::cycle::effective_zero_rate(rate, replicas, accept),
            block_size,
        )),
        ref other => Err(Error::UnsupportedModel {
            context,
            kind: other.kind_name(),
        }),
    }
}

/// Diagonal of E[X (x) X] for an effective zeroing mask: pair moments are
/// (1 - eps) when the two indices share a fault unit and (1 - eps)^2
/// otherwise.
fn pair_moment_weights(n: usize, rate: f64, block: usize) -> Vec<f64> {
    let keep = 1.0 - rate;
    let mut w = vec![keep * keep; n * n];
    for i in 0..n {
        for j in 0..n {
            if i / block == j / block {
                w[i * n + j] = keep;
            }
        }
    }
    w
}

fn scale_rows(m: &DenseMatrix, weights: &[f64]) -> DenseMatrix {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        let w = weights[r];
        for c in 0..m.ncols() {
            out.set(r, c, w * m.get(r, c));
        }
    }
    out
}

/// E[S (x) S] for one smoothing step whose mask has the given moments:
/// I - e (K (x) I + I (x) K) + W (K (x) K), K = theta D^-1 A.
fn smoother_tensor_expectation(k: &DenseMatrix, rate: f64, block: usize) -> Result<DenseMatrix> {
    let n = k.nrows();
    let id = DenseMatrix::identity(n);
    let e = 1.0 - rate;
    let ki = kron(k, &id)?;
    let ik = kron(&id, k)?;
    let kk = kron(k, k)?;
    let weights = pair_moment_weights(n, rate, block);
    let out = DenseMatrix::identity(n * n)
        .sub(&ki.scaled(e))?
        .sub(&ik.scaled(e))?;
    out.add(&scale_rows(&kk, &weights))
}

/// Exact E[E_TG (x) E_TG] for zeroing fault models, using independence of
/// the five sites and Bernoulli pair moments within each site.
fn closed_form_tensor(hierarchy: &GridHierarchy, config: &CycleConfig) -> Result<DenseMatrix> {
    let (n, nc) = two_grid_dims(hierarchy, config)?;
    let top = hierarchy.top_level();
    let parts = two_grid_parts(hierarchy, config)?;
    let a = &parts.a;
    let k = &parts.k;

    let (rate_pre, block_pre) = site_effective_rate(config, Site::PreSmooth, "closed-form bound")?;
    let (rate_post, block_post) =
        site_effective_rate(config, Site::PostSmooth, "closed-form bound")?;
    let (rate_rho, block_rho) = site_effective_rate(config, Site::Residual, "closed-form bound")?;
    let (rate_r, block_r) = site_effective_rate(config, Site::Restriction, "closed-form bound")?;
    let (rate_p, block_p) =
        site_effective_rate(config, Site::Prolongation, "closed-form bound")?;

    let es2_pre = smoother_tensor_expectation(k, rate_pre, block_pre)?;
    let es2_post = smoother_tensor_expectation(k, rate_post, block_post)?;

    // T = X_P (P A_c^-1) X_R R X_rho A
    let g = &parts.g;
    let r = &parts.r;
    let e_t = g
        .matmul(r)?
        .matmul(a)?
        .scaled((1.0 - rate_p) * (1.0 - rate_r) * (1.0 - rate_rho));

    let aa = kron(a, a)?;
    let m1 = scale_rows(&aa, &pair_moment_weights(n, rate_rho, block_rho));
    let hh = kron(r, r)?; // nc^2 x n^2
    let m2 = hh.matmul(&m1)?;
    let m3 = scale_rows(&m2, &pair_moment_weights(nc, rate_r, block_r));
    let gg = kron(g, g)?; // n^2 x nc^2
    let m4 = gg.matmul(&m3)?;
    let e_tt = scale_rows(&m4, &pair_moment_weights(n, rate_p, block_p));

    let id = DenseMatrix::identity(n);
    let eti = kron(&e_t, &id)?;
    let iet = kron(&id, &e_t)?;
    let em2 = DenseMatrix::identity(n * n)
        .sub(&eti)?
        .sub(&iet)?
        .add(&e_tt)?;

    let _ = top;
    es2_post
        .pow(config.nu2)?
        .matmul(&em2)?
        .matmul(&es2_pre.pow(config.nu1)?)
}

/// Sample one effective multiplier vector for a site. For silent faults
/// under K >= 2 detection any corruption is mitigated almost surely, so
/// the multiplier degenerates to a zeroing mask at the detector's rate.
fn sample_effective_multipliers(
    config: &CycleConfig,
    site: Site,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let model = config.sites.get(site);
    let (replicas, accept) = config.site_rule(site);
    let mut m = vec![1.0; n];
    match *model {
        FaultModel::None => {}
        FaultModel::Componentwise { rate } => {
            let q = crate::cycle::effective_zero_rate(rate, replicas, accept);
            for v in m.iter_mut() {
                if rng.bernoulli(q) {
                    *v = 0.0;
                }
            }
        }
        FaultModel::Blockwise { rate, block_size } => {
            let q = crate::cycle::effective_zero_rate(rate, replicas, accept);
            let mut start = 0;
            while start < n {
                let end = (start + block_size).min(n);
                if rng.bernoulli(q) {
                    m[start..end].iter_mut().for_each(|v| *v = 0.0);
                }
                start = end;
            }
        }
        FaultModel::Silent { rate, magnitude } => {
            if replicas == 1 {
                for v in m.iter_mut() {
                    if rng.bernoulli(rate) {
                        *v = 1.0 + magnitude.sample(rng);
                    }
                }
            } else {
                let q = 1.0 - (1.0 - rate).powi(replicas as i32);
                for v in m.iter_mut() {
                    if rng.bernoulli(q) {
                        *v = 0.0;
                    }
                }
            }
        }
        FaultModel::Bitflip { .. } => {
            // a bit flip is not a multiplier: the corrupted value depends
            // on the data, so no random iteration matrix exists
            return Err(Error::UnsupportedModel {
                context: "tensor Monte Carlo",
                kind: "bitflip",
            });
        }
    }
    Ok(m)
}

struct TwoGridParts {
    a: DenseMatrix,
    k: DenseMatrix,
    g: DenseMatrix, // P A_c^-1
    r: DenseMatrix,
}

fn two_grid_parts(hierarchy: &GridHierarchy, config: &CycleConfig) -> Result<TwoGridParts> {
    let top = hierarchy.top_level();
    let theta = config.theta.unwrap_or(hierarchy.theta);
    let a = hierarchy.a(top).to_dense();
    let diag = hierarchy.jacobi_diag(top);
    let mut k = a.clone();
    for r in 0..a.nrows() {
        let w = theta / diag[r];
        for c in 0..a.ncols() {
            k.set(r, c, w * a.get(r, c));
        }
    }
    let g = hierarchy
        .p(top - 1)
        .to_dense()
        .matmul(&hierarchy.a(top - 1).to_dense().inverse_spd()?)?;
    Ok(TwoGridParts {
        a,
        k,
        g,
        r: hierarchy.r(top - 1).to_dense(),
    })
}

/// One sampled realization of the fault-prone two-grid iteration matrix.
fn sample_two_grid_matrix(
    config: &CycleConfig,
    parts: &TwoGridParts,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    let n = parts.a.nrows();
    let nc = parts.g.ncols();
    let mrho = sample_effective_multipliers(config, Site::Residual, n, rng)?;
    let mr = sample_effective_multipliers(config, Site::Restriction, nc, rng)?;
    let mp = sample_effective_multipliers(config, Site::Prolongation, n, rng)?;
    let t = scale_rows(
        &parts
            .g
            .matmul(&scale_rows(&parts.r, &mr))?
            .matmul(&scale_rows(&parts.a, &mrho))?,
        &mp,
    );
    let mut e = DenseMatrix::identity(n).sub(&t)?;
    for _ in 0..config.nu1 {
        let ms = sample_effective_multipliers(config, Site::PreSmooth, n, rng)?;
        let s = DenseMatrix::identity(n).sub(&scale_rows(&parts.k, &ms))?;
        e = e.matmul(&s)?;
    }
    for _ in 0..config.nu2 {
        let ms = sample_effective_multipliers(config, Site::PostSmooth, n, rng)?;
        let s = DenseMatrix::identity(n).sub(&scale_rows(&parts.k, &ms))?;
        e = s.matmul(&e)?;
    }
    Ok(e)
}

/// E[E_TG (x) E_TG] by the requested method.
pub fn expected_tensor_two_grid(
    hierarchy: &GridHierarchy,
    config: &CycleConfig,
    method: BoundMethod,
    seed: u64,
) -> Result<TensorExpectation> {
    config.validate()?;
    let (n, _) = two_grid_dims(hierarchy, config)?;
    match method {
        BoundMethod::ClosedForm => Ok(TensorExpectation {
            matrix: closed_form_tensor(hierarchy, config)?,
            std_error: None,
        }),
        BoundMethod::MonteCarlo { samples } => {
            if samples < 2 {
                return Err(Error::InvalidSpec("Monte Carlo needs >= 2 samples".into()));
            }
            let parts = two_grid_parts(hierarchy, config)?;
            let nn = n * n;
            let mut mean = vec![0.0f64; nn * nn];
            let mut m2 = vec![0.0f64; nn * nn];
            let mut rng = RngStream::new(RngStream::derive_seed(seed, &[0x7E4503]));
            for s in 0..samples {
                let e = sample_two_grid_matrix(config, &parts, &mut rng)?;
                let ee = kron(&e, &e)?;
                let inv = 1.0 / (s as f64 + 1.0);
                for (i, &v) in ee.values().iter().enumerate() {
                    let delta = v - mean[i];
                    mean[i] += delta * inv;
                    m2[i] += delta * (v - mean[i]);
                }
            }
            let denom = (samples as f64) * (samples as f64 - 1.0);
            let se: Vec<f64> = m2.iter().map(|&v| (v / denom).sqrt()).collect();
            Ok(TensorExpectation {
                matrix: DenseMatrix::from_rows(nn, nn, mean)?,
                std_error: Some(DenseMatrix::from_rows(nn, nn, se)?),
            })
        }
    }
}

/// The replica-trick bound sqrt(rho(E[E_TG (x) E_TG])) on the Lyapunov
/// spectral radius of the fault-prone two-grid method.
pub fn replica_bound_two_grid(
    hierarchy: &GridHierarchy,
    config: &CycleConfig,
    method: BoundMethod,
    seed: u64,
) -> Result<f64> {
    let tensor = expected_tensor_two_grid(hierarchy, config, method, seed)?;
    let rho = spectral_radius_dense(&tensor.matrix, 1e-10)?;
    Ok(rho.sqrt())
}

/// Energy norm ||A_row^(1/2) Z A_col^(-1/2)||_2 and double energy norm
/// ||A_row Z A_col^(-1)||_2.
pub fn energy_norms(
    z: &DenseMatrix,
    a_row: &DenseMatrix,
    a_col: &DenseMatrix,
) -> Result<(f64, f64)> {
    if a_row.nrows() != z.nrows() || a_col.nrows() != z.ncols() {
        return Err(Error::DimensionMismatch {
            context: "energy_norms",
            expected: z.nrows(),
            got: a_row.nrows(),
        });
    }
    let s_row = sqrt_power(a_row, 0.5)?;
    let s_col_inv = sqrt_power(a_col, -0.5)?;
    let energy = spectral_norm(&s_row.matmul(z)?.matmul(&s_col_inv)?, 1e-10)?;
    let a_col_inv = a_col.inverse_spd()?;
    let double = spectral_norm(&a_row.matmul(z)?.matmul(&a_col_inv)?, 1e-10)?;
    Ok((energy, double))
}

/// W-cycle bound of the recursion eta_l <= xi + C* eta_{l-1}^gamma:
/// gamma/(gamma-1) xi in general, sharpened to 2 xi / (1 + sqrt(1 - 4 C* xi))
/// for gamma = 2. Hypothesis violations are rejected by name.
pub fn wcycle_bound(xi: f64, c_star: f64, gamma: usize) -> Result<f64> {
    if gamma < 2 {
        return Err(Error::HypothesisViolation(format!(
            "gamma >= 2 required, got {gamma}"
        )));
    }
    if xi.is_nan() || xi < 0.0 {
        return Err(Error::HypothesisViolation(format!(
            "xi >= 0 required, got {xi}"
        )));
    }
    let cg = c_star * gamma as f64;
    if cg.is_nan() || cg <= 1.0 {
        return Err(Error::HypothesisViolation(format!(
            "C* gamma > 1 required, got C* gamma = {cg}"
        )));
    }
    let g = gamma as f64;
    let xi_max = (g - 1.0) / g * (c_star * g).powf(-1.0 / (g - 1.0));
    if xi > xi_max {
        return Err(Error::HypothesisViolation(format!(
            "xi <= (gamma-1)/gamma (C* gamma)^(-1/(gamma-1)) required: {xi} > {xi_max}"
        )));
    }
    if gamma == 2 {
        Ok(2.0 * xi / (1.0 + (1.0 - 4.0 * c_star * xi).sqrt()))
    } else {
        Ok(g / (g - 1.0) * xi)
    }
}

/// Which coordinate of a sweep varies in a scaling fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ProblemSize,
    FaultRate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Indices of points dropped for nonpositive excess over the baseline.
    pub excluded: Vec<usize>,
    pub used: usize,
}

/// Least-squares slope of log(rho - rho0) against log n (or log eps) over
/// sweep points (n, eps, rho). Points at or below the baseline are
/// excluded and flagged.
pub fn fit_scaling_exponent(
    points: &[(f64, f64, f64)],
    baseline: f64,
    axis: SweepAxis,
) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::InvalidSpec(format!(
            "scaling fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    let fixed_ok = match axis {
        SweepAxis::ProblemSize => points.windows(2).all(|w| w[0].1 == w[1].1),
        SweepAxis::FaultRate => points.windows(2).all(|w| w[0].0 == w[1].0),
    };
    if !fixed_ok {
        return Err(Error::InvalidSpec(
            "the non-swept coordinate must be fixed across points".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (i, &(n, eps, rho)) in points.iter().enumerate() {
        let excess = rho - baseline;
        if excess <= 0.0 {
            excluded.push(i);
            continue;
        }
        let x = match axis {
            SweepAxis::ProblemSize => n,
            SweepAxis::FaultRate => eps,
        };
        xs.push(x.ln());
        ys.push(excess.ln());
    }
    if xs.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "scaling fit has {} usable points after exclusions; need >= 2",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSpec("swept coordinate does not vary".into()));
    }
    let slope = sxy / sxx;
    Ok(ExponentFit {
        slope,
        intercept: my - slope * mx,
        excluded,
        used: xs.len(),
    })
}

/// Bundle of deterministic norms, tensor bounds and the Monte-Carlo rate
/// estimate for one instance.
#[derive(Debug, Clone, Serialize, Default)]
pub struct BoundReport {
    pub n: usize,
    pub replica_bound_closed_form: Option<f64>,
    pub replica_bound_monte_carlo: Option<f64>,
    pub monte_carlo_samples: Option<usize>,
    pub two_grid_spectral_radius: Option<f64>,
    pub two_grid_norm: Option<f64>,
    pub two_grid_energy_norm: Option<f64>,
    pub two_grid_double_energy_norm: Option<f64>,
    pub lyapunov_estimate: Option<f64>,
    pub lyapunov_std_error: Option<f64>,
    pub lyapunov_iterations: Option<usize>,
    pub wcycle_bound: Option<f64>,
    pub wcycle_xi: Option<f64>,
    pub wcycle_c_star: Option<f64>,
    pub wcycle_gamma: Option<usize>,
    pub seed: u64,
}
