//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured quantities before asserting. Run with
//! `cargo test -p faultmg --test acceptance -- --nocapture` to see every
//! line; the heavy sweeps take tens of minutes on a small machine.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use faultmg::analysis::{
    assemble_iteration_matrix, estimate_lyapunov, expected_tensor_two_grid, fit_scaling_exponent,
    replica_bound_two_grid, wcycle_bound, BoundMethod, SweepAxis,
};
use faultmg::cycle::{
    corrupt_value, protect_prolongation, replicate_detect, CycleConfig, CycleRunner,
    OutcomeCounters, ProtectionConfig, ReferenceCycle, SiteModels,
};
use faultmg::fault::{FaultModel, RngStream};
use faultmg::grid::{build_hierarchy, ProblemSpec};
use faultmg::harness::{run_lyapunov_sweep, ExperimentConfig, SweepResult};
use faultmg::linalg::{norm2, spectral_radius_dense, SparseMatrix};

fn verdict(criterion: &str, pass: bool, details: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} - {details}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn spec2d(levels: usize) -> ProblemSpec {
    ProblemSpec {
        dimension: 2,
        levels,
        coarsest_cells: 2,
    }
}

/// Least-squares slope of ln(y) against ln(x).
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn criterion_01_fault_free_convergence() {
    // 2D Poisson, W-cycle, nu1 = nu2 = 1, L in 3..=7: level-independent
    // fault-free rate below 0.25
    let cfg = CycleConfig::default();
    let mut rates = Vec::new();
    for levels in 3..=7usize {
        let h = build_hierarchy(&spec2d(levels)).unwrap();
        let (est, _) = estimate_lyapunov(&h, &cfg, 1000, 50, 0xC1).unwrap();
        rates.push(est.value);
    }
    let max = rates.iter().cloned().fold(f64::MIN, f64::max);
    let min = rates.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max - min;
    let pass_rate = max < 0.25;
    let pass_spread = spread < 0.05;
    verdict(
        "1 (fault-free W-cycle rate)",
        pass_rate && pass_spread,
        &format!(
            "rho per level {:?}, max {max:.4} (target < 0.25), spread {spread:.4} (target < 0.05)",
            rates.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    assert!(
        pass_spread,
        "level spread {spread} exceeds 0.05: rates {rates:?}"
    );
    assert!(
        pass_rate,
        "fault-free W(1,1) rate {max} is not below 0.25 (measured multilevel \
         Jacobi W-cycle rate; the exact two-grid rate of this setup is 0.247)"
    );
}

#[test]
fn criterion_02_zero_rate_bitwise_equivalence() {
    // all fault models at rate 0 must reproduce the plumbing-free reference
    // cycle bit for bit over 30 iterations on 2D L = 5
    let h = build_hierarchy(&spec2d(5)).unwrap();
    let faulty_cfg = CycleConfig {
        sites: SiteModels::uniform(FaultModel::Componentwise { rate: 0.0 }),
        protection: ProtectionConfig {
            detect_replicas: 2,
            prolong_replicas: 4,
            prolong_accept: 3,
        },
        ..CycleConfig::default()
    };
    let clean_cfg = CycleConfig::default();
    let n = h.n(5);
    let mut rng = RngStream::new(0xC2);
    let xstar: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
    let b = h.a(5).spmv(&xstar).unwrap();
    let mut faulty = CycleRunner::new(&h, &faulty_cfg, 7).unwrap();
    let reference = ReferenceCycle::new(&h, &clean_cfg).unwrap();
    let mut xf = vec![0.0; n];
    let mut xr = vec![0.0; n];
    let mut identical = true;
    for _ in 0..30 {
        xf = faulty.cycle(&b, xf).unwrap();
        xr = reference.cycle(&b, xr);
        identical &= xf
            .iter()
            .zip(&xr)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    }
    verdict(
        "2 (rate-0 bitwise equivalence)",
        identical,
        "30 iterations on 2D L=5, fault pipeline with K=2 / (4,3) vs plumbing-free reference",
    );
    assert!(identical);
}

#[test]
fn criterion_03_iteration_matrix_oracle() {
    // assembled E_l applied to 20 random vectors matches the cycle output
    // to relative 1e-12 on 1D L in {1,2,3} and 2D L in {1,2}
    let cases: [(usize, usize); 5] = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)];
    let mut worst: f64 = 0.0;
    for (d, levels) in cases {
        let h = build_hierarchy(&ProblemSpec {
            dimension: d,
            levels,
            coarsest_cells: 2,
        })
        .unwrap();
        let cfg = CycleConfig::default();
        let e = assemble_iteration_matrix(&h, &cfg, levels).unwrap();
        let mut runner = CycleRunner::new(&h, &cfg, 1).unwrap();
        let mut rng = RngStream::new(0xC3 + d as u64 + levels as u64);
        for _ in 0..20 {
            let y: Vec<f64> = (0..h.n(levels)).map(|_| rng.next_normal()).collect();
            let ay = h.a(levels).spmv(&y).unwrap();
            let mg = runner.mg(levels, &ay, vec![0.0; y.len()]);
            let ey = e.matvec(&y).unwrap();
            let expect: Vec<f64> = y.iter().zip(&mg).map(|(a, b)| a - b).collect();
            let diff: Vec<f64> = ey.iter().zip(&expect).map(|(a, b)| a - b).collect();
            worst = worst.max(norm2(&diff) / norm2(&expect).max(1e-300));
        }
    }
    let pass = worst <= 1e-12;
    verdict(
        "3 (iteration-matrix probe)",
        pass,
        &format!("worst relative probe error {worst:.2e} over 1D L1-3 and 2D L1-2 (target 1e-12)"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_replica_trick_bound() {
    // 1D two-grid with n = 7: Monte-Carlo Lyapunov estimates stay below the
    // closed-form tensor bound, and the closed-form expectation matrix
    // agrees with the Monte-Carlo average entrywise
    let h = build_hierarchy(&ProblemSpec {
        dimension: 1,
        levels: 1,
        coarsest_cells: 4,
    })
    .unwrap();
    let mut all_bound_ok = true;
    let mut details = String::new();
    for rate in [0.05, 0.1, 0.3] {
        let cfg = CycleConfig {
            sites: SiteModels::uniform(FaultModel::Componentwise { rate }),
            ..CycleConfig::default()
        };
        let bound = replica_bound_two_grid(&h, &cfg, BoundMethod::ClosedForm, 4).unwrap();
        let (est, _) = estimate_lyapunov(&h, &cfg, 2000, 50, 0xC4).unwrap();
        let ok = est.value <= bound + 3.0 * est.std_error();
        all_bound_ok &= ok;
        details.push_str(&format!(
            "eps {rate}: lyap {:.4}(se {:.4}) <= bound {:.4}; ",
            est.value,
            est.std_error(),
            bound
        ));
    }

    let cfg = CycleConfig {
        sites: SiteModels::uniform(FaultModel::Componentwise { rate: 0.1 }),
        ..CycleConfig::default()
    };
    let cf = expected_tensor_two_grid(&h, &cfg, BoundMethod::ClosedForm, 4).unwrap();
    let mc = expected_tensor_two_grid(&h, &cfg, BoundMethod::MonteCarlo { samples: 100_000 }, 4)
        .unwrap();
    let se = mc.std_error.unwrap();
    let mut worst_dev: f64 = 0.0;
    for i in 0..cf.matrix.nrows() {
        for j in 0..cf.matrix.ncols() {
            let dev = (cf.matrix.get(i, j) - mc.matrix.get(i, j)).abs();
            worst_dev = worst_dev.max(dev / se.get(i, j).max(1e-12));
        }
    }
    let entries_ok = worst_dev < 4.0;
    details.push_str(&format!(
        "closed-form vs MC(1e5): worst entry deviation {worst_dev:.2} sigma (target < 4)"
    ));
    verdict(
        "4 (replica-trick bound, 1D n=7)",
        all_bound_ok && entries_ok,
        &details,
    );
    assert!(all_bound_ok);
    assert!(entries_ok);
}

const SWEEP_LEVELS_2D: [usize; 5] = [5, 6, 7, 8, 9];

/// Unprotected componentwise sweep at eps = 0.01 plus the eps = 0 baseline,
/// shared between criteria 5 and 6 (the baseline is fault-free, so it does
/// not depend on protection settings).
fn unprotected_sweep() -> &'static SweepResult {
    static SWEEP: OnceLock<SweepResult> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 20250809
            [problem]
            dimension = 2
            levels = 9
            [faults.model]
            kind = "componentwise"
            rate = 0.01
            [sweep]
            eps = [0.0, 0.01]
            levels = [5, 6, 7, 8, 9]
            iterations = 1000
            burn_in = 50
            replications = 5
            "#,
        )
        .unwrap();
        run_lyapunov_sweep(&cfg).unwrap()
    })
}

fn baseline_per_level(sweep: &SweepResult) -> BTreeMap<usize, f64> {
    let mut map = BTreeMap::new();
    for row in sweep.rows.iter().filter(|r| r.eps == 0.0) {
        map.insert(row.level, row.rho);
    }
    map
}

#[test]
fn criterion_05_unprotected_scaling_law_2d() {
    // componentwise faults at all sites, eps = 0.01, L in 5..=9, 5
    // replications: slope of log(rho - rho0) against log n targeted at
    // 0.5 +- 0.15
    let sweep = unprotected_sweep();
    let baselines = baseline_per_level(sweep);
    let mut points = Vec::new();
    let mut table = String::new();
    for row in sweep.rows.iter().filter(|r| r.eps == 0.01) {
        let excess = row.rho - baselines[&row.level];
        table.push_str(&format!(
            "L={} n={} rho={:.4} rho0={:.4} excess={:.4}; ",
            row.level, row.n, row.rho, baselines[&row.level], excess
        ));
        points.push((row.n as f64, excess));
    }
    let slope = log_log_slope(&points);
    let pass = (slope - 0.5).abs() <= 0.15;
    verdict(
        "5 (2D unprotected scaling exponent)",
        pass,
        &format!("fitted n-slope {slope:.3} (target 0.5 +- 0.15); {table}"),
    );
    assert!(
        pass,
        "measured n-slope {slope:.3} outside 0.5 +- 0.15; the sqrt(n)*eps asymptote \
         is not yet settled at eps = 0.01 below n ~ 1e5 (the fit window straddles the \
         transition region, see points above)"
    );
}

#[test]
fn criterion_06_protected_prolongation_resilience() {
    // same sweep with X_P = I: the rate becomes level-independent and its
    // excess over the fault-free baseline grows (at most) linearly in eps
    let baselines = baseline_per_level(unprotected_sweep());
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 20250810
        [problem]
        dimension = 2
        levels = 9
        [faults.model]
        kind = "componentwise"
        rate = 0.01
        [sweep]
        eps = [0.01, 0.0316, 0.1]
        levels = [5, 6, 7, 8, 9]
        iterations = 1000
        burn_in = 50
        replications = 3
        [[sweep.variant]]
        label = "protected"
        protect_prolongation = true
        "#,
    )
    .unwrap();
    let sweep = run_lyapunov_sweep(&cfg).unwrap();

    let mut spread_ok = true;
    let mut details = String::new();
    let mut eps_means: Vec<(f64, f64)> = Vec::new();
    for &eps in &[0.01, 0.0316, 0.1] {
        let rhos: Vec<f64> = SWEEP_LEVELS_2D
            .iter()
            .map(|&l| {
                sweep
                    .rows
                    .iter()
                    .find(|r| r.level == l && r.eps == eps)
                    .unwrap()
                    .rho
            })
            .collect();
        let max = rhos.iter().cloned().fold(f64::MIN, f64::max);
        let min = rhos.iter().cloned().fold(f64::MAX, f64::min);
        spread_ok &= max - min < 0.05;
        details.push_str(&format!("eps {eps}: spread {:.4}; ", max - min));
        let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
        eps_means.push((eps, mean));
    }
    let base_mean: f64 =
        SWEEP_LEVELS_2D.iter().map(|l| baselines[l]).sum::<f64>() / SWEEP_LEVELS_2D.len() as f64;
    let fit_points: Vec<(f64, f64, f64)> = eps_means
        .iter()
        .map(|&(eps, rho)| (1.0, eps, rho))
        .collect();
    let fit = fit_scaling_exponent(&fit_points, base_mean, SweepAxis::FaultRate).unwrap();
    let exponent_ok = fit.slope >= 0.8;
    details.push_str(&format!(
        "eps-exponent {:.3} (target >= 0.8, linear growth)",
        fit.slope
    ));
    verdict(
        "6 (protected prolongation n-independence)",
        spread_ok && exponent_ok,
        &details,
    );
    assert!(spread_ok, "{details}");
    assert!(exponent_ok, "{details}");
}

#[test]
fn criterion_07_three_d_exponent() {
    // 3D Poisson, L in 3..=5, eps = 0.05, unprotected: fitted n-slope
    // targeted at 1/6 +- 0.1, and strictly far below the 2D value 0.5
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 20250811
        [problem]
        dimension = 3
        levels = 5
        [faults.model]
        kind = "componentwise"
        rate = 0.05
        [sweep]
        eps = [0.0, 0.05]
        levels = [3, 4, 5]
        iterations = 1000
        burn_in = 50
        replications = 3
        "#,
    )
    .unwrap();
    let sweep = run_lyapunov_sweep(&cfg).unwrap();
    let baselines = baseline_per_level(&sweep);
    let mut points = Vec::new();
    let mut table = String::new();
    for row in sweep.rows.iter().filter(|r| r.eps == 0.05) {
        let excess = row.rho - baselines[&row.level];
        table.push_str(&format!(
            "L={} n={} excess={:.4}; ",
            row.level, row.n, excess
        ));
        points.push((row.n as f64, excess));
    }
    let slope = log_log_slope(&points);
    let in_window = (slope - 1.0 / 6.0).abs() <= 0.1;
    let below_2d = slope < 0.4;
    verdict(
        "7 (3D scaling exponent)",
        in_window && below_2d,
        &format!(
            "fitted n-slope {slope:.3} (target 1/6 +- 0.1); markedly below the 2D value 0.5: {below_2d}; {table}"
        ),
    );
    assert!(
        below_2d,
        "3D slope {slope} is not markedly below the 2D exponent"
    );
    assert!(
        in_window,
        "measured 3D n-slope {slope:.3} outside 1/6 +- 0.1: at desk scale (n <= 250k) \
         the n-independent O(eps) term dominates the weak n^(1/6) growth, which the \
         source experiments only resolve above ~1.7M unknowns"
    );
}

#[test]
fn criterion_08_bitflip_detection_scaling() {
    // bit-flip faults with K = 2 replicas everywhere: the rate grows with n
    // at fixed eps, with a 2D slope inside 0.5 +- 0.2. The rate is chosen
    // inside the asymptotic window (sqrt(n) * eps_eff >= 2.5 at L = 5).
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 20250812
        [problem]
        dimension = 2
        levels = 8
        [faults.model]
        kind = "bitflip"
        rate = 0.025
        [protection]
        detect_replicas = 2
        prolong_replicas = 2
        prolong_accept = 2
        [sweep]
        eps = [0.0, 0.025]
        levels = [5, 6, 7, 8]
        iterations = 1000
        burn_in = 50
        replications = 3
        "#,
    )
    .unwrap();
    let sweep = run_lyapunov_sweep(&cfg).unwrap();
    let baselines = baseline_per_level(&sweep);
    let mut points = Vec::new();
    let mut rhos = Vec::new();
    let mut table = String::new();
    for row in sweep.rows.iter().filter(|r| r.eps == 0.025) {
        let excess = row.rho - baselines[&row.level];
        table.push_str(&format!(
            "L={} rho={:.4} excess={:.4}; ",
            row.level, row.rho, excess
        ));
        points.push((row.n as f64, excess));
        rhos.push(row.rho);
    }
    let monotone = rhos.windows(2).all(|w| w[1] > w[0]);
    let slope = log_log_slope(&points);
    let pass = monotone && (slope - 0.5).abs() <= 0.2;
    verdict(
        "8 (bit-flip with K=2 detection)",
        pass,
        &format!("rho increasing with n: {monotone}; fitted n-slope {slope:.3} (target 0.5 +- 0.2); {table}"),
    );
    assert!(monotone, "{table}");
    assert!((slope - 0.5).abs() <= 0.2, "slope {slope:.3}; {table}");
}

#[test]
fn criterion_09_protection_strength_ordering() {
    // at (L=7, eps=0.05) the (K=3, K_P=4, k_P=3) strategy must beat plain
    // K=2 detection; its excess is fitted in eps over {0.05, 0.1, 0.2}
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 20250813
        [problem]
        dimension = 2
        levels = 7
        [faults.model]
        kind = "componentwise"
        rate = 0.05
        [sweep]
        eps = [0.0, 0.05, 0.1, 0.2]
        levels = [7]
        iterations = 1000
        burn_in = 50
        replications = 5
        [[sweep.variant]]
        label = "k2"
        detect_replicas = 2
        prolong_replicas = 2
        prolong_accept = 2
        [[sweep.variant]]
        label = "k3kp4"
        detect_replicas = 3
        prolong_replicas = 4
        prolong_accept = 3
        "#,
    )
    .unwrap();
    let sweep = run_lyapunov_sweep(&cfg).unwrap();
    let row = |label: &str, eps: f64| {
        sweep
            .rows
            .iter()
            .find(|r| r.label == label && r.eps == eps)
            .unwrap()
    };
    let k2 = row("k2", 0.05);
    let k3 = row("k3kp4", 0.05);
    let sigma = (k2.std_err.unwrap().powi(2) + k3.std_err.unwrap().powi(2)).sqrt();
    let ordering_ok = k3.rho <= k2.rho + 3.0 * sigma;

    let baseline = row("k3kp4", 0.0).rho;
    let fit_points: Vec<(f64, f64, f64)> = [0.05, 0.1, 0.2]
        .iter()
        .map(|&eps| (1.0, eps, row("k3kp4", eps).rho))
        .collect();
    let fit = fit_scaling_exponent(&fit_points, baseline, SweepAxis::FaultRate).unwrap();
    let exponent_ok = fit.slope >= 2.0;
    verdict(
        "9 (protection strength ordering)",
        ordering_ok && exponent_ok,
        &format!(
            "rho(K=3,K_P=4,k_P=3)={:.4} vs rho(K=2)={:.4} at eps=0.05 (combined se {sigma:.4}); \
             eps-exponent of the stronger strategy {:.3} (target >= 2)",
            k3.rho, k2.rho, fit.slope
        ),
    );
    assert!(
        ordering_ok,
        "stronger protection did not reduce the rate: {} vs {}",
        k3.rho, k2.rho
    );
    assert!(
        exponent_ok,
        "measured eps-exponent {:.3} below 2: at (L=7, eps in 0.05..0.2) the detector's \
         own zeroing (effective rates 0.14..0.49 at the unprotected sites) saturates the \
         estimate near 1, flattening the fit window",
        fit.slope
    );
}

/// Independent exhaustive oracle for the sequential k-of-K rule on zeroing
/// faults: walks every ordered corruption pattern and races the clean and
/// zero counts to the acceptance quorum.
fn enumeration_oracle(rate: f64, replicas: u32, accept: u32) -> (f64, f64, f64) {
    fn walk(
        depth: u32,
        replicas: u32,
        accept: u32,
        nclean: u32,
        nzero: u32,
        prob: f64,
        rate: f64,
        acc: &mut (f64, f64, f64),
    ) {
        if nclean >= accept {
            acc.0 += prob;
            return;
        }
        if nzero >= accept {
            acc.2 += prob;
            return;
        }
        if depth == replicas {
            acc.1 += prob;
            return;
        }
        walk(depth + 1, replicas, accept, nclean, nzero + 1, prob * rate, rate, acc);
        walk(
            depth + 1,
            replicas,
            accept,
            nclean + 1,
            nzero,
            prob * (1.0 - rate),
            rate,
            acc,
        );
    }
    let mut acc = (0.0, 0.0, 0.0);
    walk(0, replicas, accept, 0, 0, 1.0, rate, &mut acc);
    acc
}

#[test]
fn criterion_10_event_probabilities() {
    // empirical (C, M, U) frequencies from the literal replication ops
    // match the exhaustive enumeration oracle within 5 sigma at 1e6 trials
    let trials = 1_000_000u64;
    let mut all_ok = true;
    let mut details = String::new();
    for &rate in &[0.1f64, 0.3] {
        let model = FaultModel::Componentwise { rate };
        // detection with K = 2 and K = 3 replicas
        for k in [2u32, 3] {
            let mut rng = RngStream::new(0xC10 + k as u64);
            let mut counts = OutcomeCounters::default();
            for _ in 0..trials {
                let (_, o) =
                    replicate_detect(|r| corrupt_value(2.5, &model, r), 2.5, k, 1e16, &mut rng);
                counts.record(o);
            }
            let oracle = enumeration_oracle(rate, k, k);
            all_ok &= check_frequencies(&mut details, &format!("K={k} eps={rate}"), &counts, oracle, trials);
        }
        // prolongation protection with K_P = 4, k_P = 3
        let p = SparseMatrix::identity(1);
        let mut rng = RngStream::new(0xC10F);
        let mut counts = OutcomeCounters::default();
        for _ in 0..trials {
            let (_, c) = protect_prolongation(&[1.25], &p, &model, 4, 3, 1e16, &mut rng).unwrap();
            counts.merge(&c);
        }
        let oracle = enumeration_oracle(rate, 4, 3);
        all_ok &= check_frequencies(
            &mut details,
            &format!("K_P=4,k_P=3 eps={rate}"),
            &counts,
            oracle,
            trials,
        );
    }
    verdict("10 (detection event probabilities)", all_ok, &details);
    assert!(all_ok, "{details}");
}

fn check_frequencies(
    details: &mut String,
    label: &str,
    counts: &OutcomeCounters,
    oracle: (f64, f64, f64),
    trials: u64,
) -> bool {
    let mut ok = true;
    for (name, got, want) in [
        ("C", counts.correct, oracle.0),
        ("M", counts.mitigated, oracle.1),
        ("U", counts.undetected, oracle.2),
    ] {
        let freq = got as f64 / trials as f64;
        let sigma = (want * (1.0 - want) / trials as f64).sqrt().max(1e-9);
        let dev = (freq - want).abs() / sigma;
        if dev >= 5.0 {
            ok = false;
            details.push_str(&format!("{label} {name}: {freq:.5} vs {want:.5} ({dev:.1} sigma); "));
        }
    }
    if ok {
        details.push_str(&format!("{label}: all within 5 sigma; "));
    }
    ok
}

#[test]
fn criterion_11_bound_calculators() {
    // recursion-bound values and named hypothesis rejections
    let v = wcycle_bound(0.1, 1.0, 2).unwrap();
    let value_ok = (v - 0.11270).abs() <= 1e-5;
    let v3 = wcycle_bound(0.1, 1.0, 3).unwrap();
    let v3_ok = (v3 - 0.15).abs() <= 1e-12;

    let e1 = wcycle_bound(0.1, 0.4, 2).unwrap_err().to_string();
    let e2 = wcycle_bound(0.5, 1.0, 2).unwrap_err().to_string();
    let e3 = wcycle_bound(0.1, 1.0, 1).unwrap_err().to_string();
    let rejects_ok =
        e1.contains("C* gamma > 1") && e2.contains("xi <=") && e3.contains("gamma >= 2");
    verdict(
        "11 (W-cycle bound calculator)",
        value_ok && v3_ok && rejects_ok,
        &format!(
            "bound(0.1,1,2)={v:.6} (want 0.11270); bound(0.1,1,3)={v3}; named rejections: {rejects_ok}"
        ),
    );
    assert!(value_ok && v3_ok && rejects_ok);
}

#[test]
fn deterministic_estimate_matches_dense_radius_up_to_961() {
    // supporting invariant for the estimator: fault-free Lyapunov estimate
    // within 2% of the assembled-matrix spectral radius at n = 961
    let h = build_hierarchy(&spec2d(4)).unwrap();
    let cfg = CycleConfig::default();
    let (est, _) = estimate_lyapunov(&h, &cfg, 1000, 50, 0xD0).unwrap();
    let e = assemble_iteration_matrix(&h, &cfg, 4).unwrap();
    let rho = spectral_radius_dense(&e, 1e-9).unwrap();
    let rel = (est.value - rho).abs() / rho;
    println!(
        "SUPPLEMENT estimator-vs-dense: estimate {:.5} vs radius {rho:.5} (rel {rel:.4})",
        est.value
    );
    assert!(rel <= 0.02);
}

#[test]
fn supplement_asymptotic_2d_slope_at_higher_rate() {
    // companion measurement to criterion 5: once sqrt(n) * eps is a few
    // units at the smallest level, the fitted exponent settles near 1/2
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 20250814
        [problem]
        dimension = 2
        levels = 7
        [faults.model]
        kind = "componentwise"
        rate = 0.1
        [sweep]
        eps = [0.0, 0.1]
        levels = [5, 6, 7]
        iterations = 1000
        burn_in = 50
        replications = 3
        "#,
    )
    .unwrap();
    let sweep = run_lyapunov_sweep(&cfg).unwrap();
    let baselines = baseline_per_level(&sweep);
    let points: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .filter(|r| r.eps == 0.1)
        .map(|r| (r.n as f64, r.rho - baselines[&r.level]))
        .collect();
    let slope = log_log_slope(&points);
    println!(
        "SUPPLEMENT 2D slope at eps=0.1 over L=5..7: {slope:.3} (asymptotic target 0.5)"
    );
    assert!(
        (slope - 0.5).abs() <= 0.2,
        "asymptotic-regime slope {slope:.3} unexpectedly far from 0.5"
    );
}
