//! The fault-prone multigrid cycle.
//!
//! Faults strike the *outputs* of five operations: the pre- and
//! post-smoother updates, the fine residual, the restricted right-hand side
//! and the prolonged correction. Every site value passes through a replica
//! detector: K replicas must agree bitwise (and stay below the magnitude
//! threshold) or the value is zeroed, the laissez-faire mitigation. The
//! prolongation site may instead accept as soon as k_P of up to K_P
//! replicas agree, trading replication cost against undetected-corruption
//! probability. K = 1 everywhere degenerates to plain fault injection with
//! the magnitude guard.
//!
//! Zeroing models (componentwise, blockwise) go through an exact
//! outcome-level trinomial sampler instead of materializing replicas; the
//! two paths have identical output distributions and the literal one is
//! kept (and cross-checked in tests) for silent and bit-flip faults, whose
//! corrupted values depend on the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::{flip_bit, FaultModel, RngStream, StreamKey};
use crate::grid::GridHierarchy;
use crate::linalg::CholeskyFactor;

/// The five fault sites of one cycle level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    PreSmooth,
    Residual,
    Restriction,
    Prolongation,
    PostSmooth,
}

impl Site {
    pub const ALL: [Site; 5] = [
        Site::PreSmooth,
        Site::Residual,
        Site::Restriction,
        Site::Prolongation,
        Site::PostSmooth,
    ];

    pub fn index(self) -> usize {
        match self {
            Site::PreSmooth => 0,
            Site::Residual => 1,
            Site::Restriction => 2,
            Site::Prolongation => 3,
            Site::PostSmooth => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Site::PreSmooth => "pre_smooth",
            Site::Residual => "residual",
            Site::Restriction => "restriction",
            Site::Prolongation => "prolongation",
            Site::PostSmooth => "post_smooth",
        }
    }
}

/// Per-site fault models.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SiteModels {
    pub pre_smooth: FaultModel,
    pub residual: FaultModel,
    pub restriction: FaultModel,
    pub prolongation: FaultModel,
    pub post_smooth: FaultModel,
}

impl SiteModels {
    /// The same model at every site.
    pub fn uniform(model: FaultModel) -> Self {
        SiteModels {
            pre_smooth: model,
            residual: model,
            restriction: model,
            prolongation: model,
            post_smooth: model,
        }
    }

    /// Same model everywhere except a fault-free (protected) prolongation.
    pub fn uniform_protected_prolongation(model: FaultModel) -> Self {
        SiteModels {
            prolongation: FaultModel::None,
            ..Self::uniform(model)
        }
    }

    pub fn get(&self, site: Site) -> &FaultModel {
        match site {
            Site::PreSmooth => &self.pre_smooth,
            Site::Residual => &self.residual,
            Site::Restriction => &self.restriction,
            Site::Prolongation => &self.prolongation,
            Site::PostSmooth => &self.post_smooth,
        }
    }

    pub fn all_none(&self) -> bool {
        Site::ALL.iter().all(|&s| self.get(s).is_none())
    }

    pub fn validate(&self) -> Result<()> {
        for site in Site::ALL {
            self.get(site).validate()?;
        }
        Ok(())
    }
}

/// Replica counts: K for detection at every site, and the k_P-of-K_P rule
/// for the prolongation. All set to 1 means plain fault injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectionConfig {
    pub detect_replicas: u32,
    pub prolong_replicas: u32,
    pub prolong_accept: u32,
}

impl Default for ProtectionConfig {
    fn default() -> Self {
        ProtectionConfig {
            detect_replicas: 1,
            prolong_replicas: 1,
            prolong_accept: 1,
        }
    }
}

impl ProtectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.detect_replicas < 1 {
            return Err(Error::InvalidSpec("detect_replicas must be >= 1".into()));
        }
        if self.prolong_accept < 1 || self.prolong_accept > self.prolong_replicas {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= prolong_accept ({}) <= prolong_replicas ({})",
                self.prolong_accept, self.prolong_replicas
            )));
        }
        if self.detect_replicas > 16 || self.prolong_replicas > 16 {
            return Err(Error::InvalidSpec(
                "replica counts above 16 are not supported".into(),
            ));
        }
        Ok(())
    }
}

pub const DEFAULT_MAGNITUDE_THRESHOLD: f64 = 1e16;

/// Everything that parameterizes one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    /// Pre-smoothing steps.
    pub nu1: usize,
    /// Post-smoothing steps.
    pub nu2: usize,
    /// Coarse-grid correction calls: 1 = V-cycle, 2 = W-cycle.
    pub gamma: usize,
    /// Jacobi damping; `None` picks the hierarchy's dimension default.
    pub theta: Option<f64>,
    pub sites: SiteModels,
    pub protection: ProtectionConfig,
    /// Replica values at or above this magnitude are never accepted.
    pub magnitude_threshold: f64,
    /// Level at which the recursion switches to the exact dense solve.
    pub coarsest_level: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            nu1: 1,
            nu2: 1,
            gamma: 2,
            theta: None,
            sites: SiteModels::default(),
            protection: ProtectionConfig::default(),
            magnitude_threshold: DEFAULT_MAGNITUDE_THRESHOLD,
            coarsest_level: 0,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu1 + self.nu2 < 1 {
            return Err(Error::InvalidSpec("need nu1 + nu2 >= 1".into()));
        }
        if self.gamma < 1 {
            return Err(Error::InvalidSpec("gamma must be >= 1".into()));
        }
        if self.magnitude_threshold.is_nan() || self.magnitude_threshold <= 0.0 {
            return Err(Error::InvalidSpec(
                "magnitude threshold must be positive".into(),
            ));
        }
        self.sites.validate()?;
        self.protection.validate()
    }

    pub(crate) fn site_rule(&self, site: Site) -> (u32, u32) {
        match site {
            Site::Prolongation => (
                self.protection.prolong_replicas,
                self.protection.prolong_accept,
            ),
            _ => (
                self.protection.detect_replicas,
                self.protection.detect_replicas,
            ),
        }
    }
}

/// Outcome of one component's pass through detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The true value was returned.
    Correct,
    /// Disagreement (or the magnitude guard) zeroed the component.
    Mitigated,
    /// A corrupted value was accepted.
    Undetected,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounters {
    pub correct: u64,
    pub mitigated: u64,
    pub undetected: u64,
}

impl OutcomeCounters {
    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Correct => self.correct += 1,
            Outcome::Mitigated => self.mitigated += 1,
            Outcome::Undetected => self.undetected += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.correct + self.mitigated + self.undetected
    }

    pub fn merge(&mut self, other: &OutcomeCounters) {
        self.correct += other.correct;
        self.mitigated += other.mitigated;
        self.undetected += other.undetected;
    }
}

/// Per-site event counters of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SiteOutcomeCounters {
    counts: [OutcomeCounters; 5],
}

impl SiteOutcomeCounters {
    pub fn site(&self, site: Site) -> &OutcomeCounters {
        &self.counts[site.index()]
    }

    pub fn record(&mut self, site: Site, outcome: Outcome) {
        self.counts[site.index()].record(outcome);
    }

    fn record_bulk(&mut self, site: Site, correct: u64, mitigated: u64, undetected: u64) {
        let c = &mut self.counts[site.index()];
        c.correct += correct;
        c.mitigated += mitigated;
        c.undetected += undetected;
    }

    pub fn merge(&mut self, other: &SiteOutcomeCounters) {
        for i in 0..5 {
            self.counts[i].merge(&other.counts[i]);
        }
    }

    pub fn grand_total(&self) -> OutcomeCounters {
        let mut t = OutcomeCounters::default();
        for c in &self.counts {
            t.merge(c);
        }
        t
    }
}

/// Sequential k-of-K agreement rule on materialized replica values.
/// Agreement means bitwise equality; a value is accepted the moment
/// `accept` replicas carry it and it clears the magnitude guard.
fn adjudicate(values: &[f64], true_value: f64, accept: u32, threshold: f64) -> (f64, Outcome) {
    let mut seen: [(u64, u32); 16] = [(0, 0); 16];
    let mut distinct = 0usize;
    for &v in values {
        let bits = v.to_bits();
        let mut count = 0;
        let mut found = false;
        for slot in seen.iter_mut().take(distinct) {
            if slot.0 == bits {
                slot.1 += 1;
                count = slot.1;
                found = true;
                break;
            }
        }
        if !found {
            seen[distinct] = (bits, 1);
            count = 1;
            distinct += 1;
        }
        if count >= accept && v.abs() < threshold {
            let outcome = if bits == true_value.to_bits() {
                Outcome::Correct
            } else {
                Outcome::Undetected
            };
            return (v, outcome);
        }
    }
    (0.0, Outcome::Mitigated)
}

/// Detection of faults using `k` replicas with laissez-faire mitigation:
/// `compute` produces one fault realization per call; the value is accepted
/// only on unanimous bitwise agreement below the magnitude threshold.
pub fn replicate_detect<F>(
    mut compute: F,
    true_value: f64,
    k: u32,
    threshold: f64,
    rng: &mut RngStream,
) -> (f64, Outcome)
where
    F: FnMut(&mut RngStream) -> f64,
{
    let k = k.clamp(1, 16);
    let mut values = [0.0f64; 16];
    for slot in values.iter_mut().take(k as usize) {
        *slot = compute(rng);
    }
    adjudicate(&values[..k as usize], true_value, k, threshold)
}

/// Protection of the fault-prone prolongation: per component, replicas of
/// (X P e) are generated up to `k_p_total` and the first value reaching
/// `k_p` bitwise matches below the threshold is accepted; otherwise the
/// component is zeroed. Returns the accepted update and the event counters.
pub fn protect_prolongation(
    e_coarse: &[f64],
    p: &crate::linalg::SparseMatrix,
    model: &FaultModel,
    k_p_total: u32,
    k_p: u32,
    threshold: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, OutcomeCounters)> {
    if k_p < 1 || k_p > k_p_total || k_p_total > 16 {
        return Err(Error::InvalidSpec(format!(
            "need 1 <= k_p ({k_p}) <= K_p ({k_p_total}) <= 16"
        )));
    }
    let clean = p.spmv(e_coarse)?;
    let mut counters = OutcomeCounters::default();
    let mut out = vec![0.0; clean.len()];
    let mut values = [0.0f64; 16];
    for (i, &u) in clean.iter().enumerate() {
        for slot in values.iter_mut().take(k_p_total as usize) {
            *slot = corrupt_value(u, model, rng);
        }
        let (v, outcome) = adjudicate(&values[..k_p_total as usize], u, k_p, threshold);
        out[i] = v;
        counters.record(outcome);
    }
    Ok((out, counters))
}

/// One fault realization of a single component value.
pub fn corrupt_value(u: f64, model: &FaultModel, rng: &mut RngStream) -> f64 {
    match *model {
        FaultModel::None => u,
        FaultModel::Componentwise { rate } | FaultModel::Blockwise { rate, .. } => {
            if rng.bernoulli(rate) {
                0.0
            } else {
                u
            }
        }
        FaultModel::Silent { rate, magnitude } => {
            if rng.bernoulli(rate) {
                u * (1.0 + magnitude.sample(rng))
            } else {
                u
            }
        }
        FaultModel::Bitflip { rate } => {
            if rng.bernoulli(rate) {
                flip_bit(u, rng.below(64) as u32)
            } else {
                u
            }
        }
    }
}

/// Exact (C, M, U) probabilities of the sequential k-of-K agreement rule
/// for zeroing faults on a nonzero in-range true value, by enumeration of
/// all ordered replica corruption patterns.
pub fn detection_trinomial(rate: f64, replicas: u32, accept: u32) -> (f64, f64, f64) {
    debug_assert!(replicas >= 1 && accept >= 1 && accept <= replicas && replicas <= 20);
    let k = replicas;
    let (mut pc, mut pm, mut pu) = (0.0, 0.0, 0.0);
    for pattern in 0u32..(1 << k) {
        let zeros = pattern.count_ones();
        let prob = rate.powi(zeros as i32) * (1.0 - rate).powi((k - zeros) as i32);
        if prob == 0.0 {
            continue;
        }
        // walk the replicas in order; clean and zero counts race to `accept`
        let mut nclean = 0u32;
        let mut nzero = 0u32;
        let mut outcome = Outcome::Mitigated;
        for j in 0..k {
            if pattern & (1 << j) != 0 {
                nzero += 1;
                if nzero >= accept {
                    outcome = Outcome::Undetected; // agreement on a zeroed value
                    break;
                }
            } else {
                nclean += 1;
                if nclean >= accept {
                    outcome = Outcome::Correct;
                    break;
                }
            }
        }
        match outcome {
            Outcome::Correct => pc += prob,
            Outcome::Mitigated => pm += prob,
            Outcome::Undetected => pu += prob,
        }
    }
    (pc, pm, pu)
}

/// Sample a (C, M, U) outcome directly from the closed-form trinomial the
/// replica agreement rule implies for zeroing models. Statistically
/// equivalent to literal replication; used to accelerate large sweeps.
pub fn event_level_fast_path(
    model: &FaultModel,
    replicas: u32,
    accept: u32,
    rng: &mut RngStream,
) -> Result<Outcome> {
    match model {
        FaultModel::Componentwise { rate } | FaultModel::Blockwise { rate, .. } => {
            let (pc, pm, _pu) = detection_trinomial(*rate, replicas, accept);
            let r = rng.next_f64();
            Ok(if r < pc {
                Outcome::Correct
            } else if r < pc + pm {
                Outcome::Mitigated
            } else {
                Outcome::Undetected
            })
        }
        other => Err(Error::UnsupportedModel {
            context: "event_level_fast_path",
            kind: other.kind_name(),
        }),
    }
}

/// Probability that a component of a zeroing-fault site is *not* returned
/// as its true value under the given replica rule, i.e. the Bernoulli rate
/// of the site's effective output mask.
pub fn effective_zero_rate(rate: f64, replicas: u32, accept: u32) -> f64 {
    let (pc, _, _) = detection_trinomial(rate, replicas, accept);
    1.0 - pc
}

/// Drives fault-prone cycles over a fixed hierarchy/config/seed triple.
/// A monotone event counter keys every site application into its own
/// random stream, so repeated visits to a level (W-cycle branches,
/// several smoothing steps) see independent fault realizations while the
/// whole run stays bit-reproducible.
pub struct CycleRunner<'a> {
    hierarchy: &'a GridHierarchy,
    config: CycleConfig,
    seed: u64,
    event: u64,
    theta: f64,
    inv_diag_theta: Vec<Vec<f64>>,
    coarse_chol: CholeskyFactor,
    trinomials: [Option<(f64, f64, f64)>; 5],
    pub counters: SiteOutcomeCounters,
}

impl<'a> CycleRunner<'a> {
    pub fn new(hierarchy: &'a GridHierarchy, config: &CycleConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if config.coarsest_level >= hierarchy.top_level() {
            return Err(Error::InvalidSpec(format!(
                "coarsest_level {} must lie below the top level {}",
                config.coarsest_level,
                hierarchy.top_level()
            )));
        }
        let theta = config.theta.unwrap_or(hierarchy.theta);
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidSpec(format!("damping {theta} outside (0, 1]")));
        }
        let mut inv_diag_theta = Vec::with_capacity(hierarchy.top_level() + 1);
        for l in 0..=hierarchy.top_level() {
            inv_diag_theta.push(
                hierarchy
                    .jacobi_diag(l)
                    .iter()
                    .map(|&d| theta / d)
                    .collect(),
            );
        }
        let coarse_chol = hierarchy.factor_level(config.coarsest_level)?;
        let mut trinomials = [None; 5];
        for site in Site::ALL {
            let model = config.sites.get(site);
            if let FaultModel::Componentwise { rate } | FaultModel::Blockwise { rate, .. } = model {
                let (k, a) = config.site_rule(site);
                trinomials[site.index()] = Some(detection_trinomial(*rate, k, a));
            }
        }
        Ok(CycleRunner {
            hierarchy,
            config: *config,
            seed,
            event: 0,
            theta,
            inv_diag_theta,
            coarse_chol,
            trinomials,
            counters: SiteOutcomeCounters::default(),
        })
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        self.hierarchy
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.event = 0;
        self.counters = SiteOutcomeCounters::default();
    }

    /// One multigrid cycle on the finest level.
    pub fn cycle(&mut self, b: &[f64], x: Vec<f64>) -> Result<Vec<f64>> {
        let top = self.hierarchy.top_level();
        if b.len() != self.hierarchy.n(top) || x.len() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "cycle",
                expected: self.hierarchy.n(top),
                got: b.len().min(x.len()),
            });
        }
        Ok(self.mg(top, b, x))
    }

    /// The recursive fault-prone cycle on an arbitrary level.
    pub fn mg(&mut self, level: usize, b: &[f64], mut x: Vec<f64>) -> Vec<f64> {
        if level == self.config.coarsest_level {
            // exact solve on the coarsest grid, never fault-prone
            let mut sol = b.to_vec();
            self.coarse_chol.solve_into(&mut sol);
            return sol;
        }
        for _ in 0..self.config.nu1 {
            x = self.smooth(level, b, x, Site::PreSmooth);
        }
        let r = self.residual(level, b, &x);
        let r = self.apply_site(Site::Residual, level, r);
        let d = self
            .hierarchy
            .r(level - 1)
            .spmv(&r)
            .expect("restriction dimensions fixed by hierarchy");
        let d = self.apply_site(Site::Restriction, level - 1, d);
        let mut e = vec![0.0; self.hierarchy.n(level - 1)];
        for _ in 0..self.config.gamma {
            e = self.mg(level - 1, &d, e);
        }
        let p = self
            .hierarchy
            .p(level - 1)
            .spmv(&e)
            .expect("prolongation dimensions fixed by hierarchy");
        let p = self.apply_site(Site::Prolongation, level, p);
        for i in 0..x.len() {
            x[i] += p[i];
        }
        for _ in 0..self.config.nu2 {
            x = self.smooth(level, b, x, Site::PostSmooth);
        }
        x
    }

    /// One damped-Jacobi step whose update passes through the site's fault
    /// and detection pipeline: x + faulty(theta D^-1 (b - A x)).
    pub fn smooth(&mut self, level: usize, b: &[f64], mut x: Vec<f64>, site: Site) -> Vec<f64> {
        let u = self.jacobi_update(level, b, &x);
        let u = self.apply_site(site, level, u);
        for i in 0..x.len() {
            x[i] += u[i];
        }
        x
    }

    fn jacobi_update(&self, level: usize, b: &[f64], x: &[f64]) -> Vec<f64> {
        let a = self.hierarchy.a(level);
        let w = &self.inv_diag_theta[level];
        let n = x.len();
        let mut u = vec![0.0; n];
        // u_i = theta / d_i * (b_i - sum_j a_ij x_j), fixed traversal order
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut s = b[i];
            for (&c, &v) in cols.iter().zip(vals) {
                s -= v * x[c];
            }
            u[i] = w[i] * s;
        }
        u
    }

    fn residual(&self, level: usize, b: &[f64], x: &[f64]) -> Vec<f64> {
        let a = self.hierarchy.a(level);
        let n = x.len();
        let mut r = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut s = b[i];
            for (&c, &v) in cols.iter().zip(vals) {
                s -= v * x[c];
            }
            r[i] = s;
        }
        r
    }

    fn stream(&self, site: Site, level: usize, event: u64, replica: u32) -> RngStream {
        RngStream::keyed(
            self.seed,
            StreamKey {
                site: site.index() as u8,
                level: level as u8,
                iteration: event,
                replica,
            },
        )
    }

    /// Pass a site's output vector through fault injection + detection.
    fn apply_site(&mut self, site: Site, level: usize, u: Vec<f64>) -> Vec<f64> {
        let event = self.event;
        self.event += 1;
        let model = *self.config.sites.get(site);
        if model.is_none() {
            return u; // fault-free site: no stream is consulted
        }
        let (replicas, accept) = self.config.site_rule(site);
        match model {
            FaultModel::None => unreachable!(),
            FaultModel::Componentwise { .. } => self.zeroing_site(site, level, event, u, None),
            FaultModel::Blockwise { block_size, .. } => {
                self.zeroing_site(site, level, event, u, Some(block_size))
            }
            FaultModel::Silent { .. } | FaultModel::Bitflip { .. } => {
                self.literal_site(site, level, event, u, &model, replicas, accept)
            }
        }
    }

    /// Outcome-level path for zeroing models: per component (or block) the
    /// exact trinomial decides C/M/U; C keeps the clean value subject to
    /// the magnitude guard, M and U zero it.
    fn zeroing_site(
        &mut self,
        site: Site,
        level: usize,
        event: u64,
        mut u: Vec<f64>,
        block_size: Option<usize>,
    ) -> Vec<f64> {
        let threshold = self.config.magnitude_threshold;
        let (pc, pm, pu) = self.trinomials[site.index()].expect("precomputed for zeroing models");
        let q = 1.0 - pc;
        let n = u.len();
        let bs = block_size.unwrap_or(1);
        let units = n.div_ceil(bs);
        let (mut c_cnt, mut m_cnt, mut u_cnt) = (0u64, 0u64, 0u64);

        let mut hit_units: Vec<(usize, bool)> = Vec::new(); // (unit, is_undetected)
        if q > 0.0 {
            let mut rng = self.stream(site, level, event, 0);
            let mut pos = 0usize;
            loop {
                let skip = rng.geometric(q);
                if skip as u128 + pos as u128 >= units as u128 {
                    break;
                }
                pos += skip as usize;
                let undetected = rng.bernoulli(pu / (pm + pu));
                hit_units.push((pos, undetected));
                pos += 1;
                if pos >= units {
                    break;
                }
            }
        }

        let mut hit_iter = hit_units.iter().peekable();
        for unit in 0..units {
            let lo = unit * bs;
            let hi = ((unit + 1) * bs).min(n);
            match hit_iter.peek() {
                Some(&&(h, undetected)) if h == unit => {
                    hit_iter.next();
                    for v in u[lo..hi].iter_mut() {
                        if *v == 0.0 {
                            // every replica agrees on 0 == true value
                            c_cnt += 1;
                        } else if undetected {
                            u_cnt += 1;
                            *v = 0.0;
                        } else {
                            m_cnt += 1;
                            *v = 0.0;
                        }
                    }
                }
                _ => {
                    // clean agreement; only the magnitude guard can zero it
                    for v in u[lo..hi].iter_mut() {
                        if v.abs() < threshold {
                            c_cnt += 1;
                        } else {
                            m_cnt += 1;
                            *v = 0.0;
                        }
                    }
                }
            }
        }
        self.counters.record_bulk(site, c_cnt, m_cnt, u_cnt);
        u
    }

    /// Literal replica simulation for value-dependent corruption (silent
    /// multiplicative upsets, bit flips). Per replica the corrupted
    /// component set is skip-sampled; values are materialized and run
    /// through the sequential agreement rule.
    #[allow(clippy::too_many_arguments)]
    fn literal_site(
        &mut self,
        site: Site,
        level: usize,
        event: u64,
        u: Vec<f64>,
        model: &FaultModel,
        replicas: u32,
        accept: u32,
    ) -> Vec<f64> {
        let threshold = self.config.magnitude_threshold;
        let rate = model.rate();
        let n = u.len();
        let mut plans: Vec<Vec<(usize, f64)>> = Vec::with_capacity(replicas as usize);
        for j in 0..replicas {
            let mut rng = self.stream(site, level, event, j);
            let mut plan = Vec::new();
            if rate > 0.0 {
                let mut pos = 0usize;
                loop {
                    let skip = rng.geometric(rate);
                    if skip as u128 + pos as u128 >= n as u128 {
                        break;
                    }
                    pos += skip as usize;
                    let corrupted = match *model {
                        FaultModel::Silent { magnitude, .. } => {
                            u[pos] * (1.0 + magnitude.sample(&mut rng))
                        }
                        FaultModel::Bitflip { .. } => flip_bit(u[pos], rng.below(64) as u32),
                        _ => 0.0,
                    };
                    plan.push((pos, corrupted));
                    pos += 1;
                    if pos >= n {
                        break;
                    }
                }
            }
            plans.push(plan);
        }

        let mut out = u;
        let (mut c_cnt, mut m_cnt, mut u_cnt) = (0u64, 0u64, 0u64);
        let mut heads = vec![0usize; plans.len()];
        let mut values = [0.0f64; 16];
        let mut touched = vec![];
        loop {
            let mut next: Option<usize> = None;
            for (j, plan) in plans.iter().enumerate() {
                if let Some(&(i, _)) = plan.get(heads[j]) {
                    next = Some(next.map_or(i, |m: usize| m.min(i)));
                }
            }
            let Some(i) = next else { break };
            let true_value = out[i];
            for (j, plan) in plans.iter().enumerate() {
                values[j] = match plan.get(heads[j]) {
                    Some(&(pi, cv)) if pi == i => {
                        heads[j] += 1;
                        cv
                    }
                    _ => true_value,
                };
            }
            let (v, outcome) =
                adjudicate(&values[..replicas as usize], true_value, accept, threshold);
            out[i] = v;
            match outcome {
                Outcome::Correct => c_cnt += 1,
                Outcome::Mitigated => m_cnt += 1,
                Outcome::Undetected => u_cnt += 1,
            }
            touched.push(i);
        }
        // untouched components carry unanimous clean replicas: accepted
        // unless the magnitude guard fires
        let mut guard_m = 0u64;
        let mut t_iter = touched.iter().peekable();
        for (i, v) in out.iter_mut().enumerate() {
            if let Some(&&t) = t_iter.peek() {
                if t == i {
                    t_iter.next();
                    continue;
                }
            }
            if v.abs() >= threshold {
                *v = 0.0;
                guard_m += 1;
            }
        }
        let clean_c = n as u64 - touched.len() as u64 - guard_m;
        self.counters
            .record_bulk(site, c_cnt + clean_c, m_cnt + guard_m, u_cnt);
        out
    }
}

/// Plain multigrid with no fault plumbing at all, sharing nothing with the
/// fault path except the hierarchy. The fault-prone engine at rate zero
/// must match it bitwise.
pub struct ReferenceCycle<'a> {
    hierarchy: &'a GridHierarchy,
    nu1: usize,
    nu2: usize,
    gamma: usize,
    coarsest_level: usize,
    inv_diag_theta: Vec<Vec<f64>>,
    coarse_chol: CholeskyFactor,
}

impl<'a> ReferenceCycle<'a> {
    pub fn new(hierarchy: &'a GridHierarchy, config: &CycleConfig) -> Result<Self> {
        config.validate()?;
        let theta = config.theta.unwrap_or(hierarchy.theta);
        let mut inv_diag_theta = Vec::new();
        for l in 0..=hierarchy.top_level() {
            inv_diag_theta.push(
                hierarchy
                    .jacobi_diag(l)
                    .iter()
                    .map(|&d| theta / d)
                    .collect(),
            );
        }
        Ok(ReferenceCycle {
            hierarchy,
            nu1: config.nu1,
            nu2: config.nu2,
            gamma: config.gamma,
            coarsest_level: config.coarsest_level,
            inv_diag_theta,
            coarse_chol: hierarchy.factor_level(config.coarsest_level)?,
        })
    }

    pub fn cycle(&self, b: &[f64], x: Vec<f64>) -> Vec<f64> {
        self.mg(self.hierarchy.top_level(), b, x)
    }

    pub fn mg(&self, level: usize, b: &[f64], mut x: Vec<f64>) -> Vec<f64> {
        if level == self.coarsest_level {
            let mut sol = b.to_vec();
            self.coarse_chol.solve_into(&mut sol);
            return sol;
        }
        let a = self.hierarchy.a(level);
        let w = &self.inv_diag_theta[level];
        let n = x.len();
        for _ in 0..self.nu1 {
            let mut u = vec![0.0; n];
            for i in 0..n {
                let (cols, vals) = a.row(i);
                let mut s = b[i];
                for (&c, &v) in cols.iter().zip(vals) {
                    s -= v * x[c];
                }
                u[i] = w[i] * s;
            }
            for i in 0..n {
                x[i] += u[i];
            }
        }
        let mut r = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut s = b[i];
            for (&c, &v) in cols.iter().zip(vals) {
                s -= v * x[c];
            }
            r[i] = s;
        }
        let d = self.hierarchy.r(level - 1).spmv(&r).expect("sized");
        let mut e = vec![0.0; self.hierarchy.n(level - 1)];
        for _ in 0..self.gamma {
            e = self.mg(level - 1, &d, e);
        }
        let p = self.hierarchy.p(level - 1).spmv(&e).expect("sized");
        for i in 0..n {
            x[i] += p[i];
        }
        for _ in 0..self.nu2 {
            let mut u = vec![0.0; n];
            for i in 0..n {
                let (cols, vals) = a.row(i);
                let mut s = b[i];
                for (&c, &v) in cols.iter().zip(vals) {
                    s -= v * x[c];
                }
                u[i] = w[i] * s;
            }
            for i in 0..n {
                x[i] += u[i];
            }
        }
        x
    }
}
