//! Acceptance suite: every reproduction target and property gate runs here,
//! one test per criterion, each printing a single PASS/FAIL line (run with
//! `cargo test --test acceptance -- --nocapture` to see them).
//!
//! C1  tail table reproduction, logistic-location observed row
//! C2  Fisher-norm failure signature, logistic-scale
//! C3  locally optimal stage-1 sizes against tabulated references
//! C4  exponential-scale tail table at n = 2000
//! C5  CDF-distance ordering and decay (ordinal)
//! C6  large-n2 convergence ladder and chi-squared limit
//! C7  standard-normal limits under random norms at n = 4000
//! C8  oracle equivalences (grid MLE, finite differences, MC integration)
//!
//! C9 (byte-identical CSVs across worker counts) lives with the CLI crate's
//! integration tests, next to the code that writes files.

use twostage::analysis::{iad_vs_std_normal, ks_test, tail_probabilities};
use twostage::design::{
    adaptive_dose, design_fisher_info, fisher_info_with_nodes, optimal_n1, DesignConfig, N1Policy,
    FISHER_NODES,
};
use twostage::information::{observed_info, InfoMeasureKind};
use twostage::likelihood::{full_mle, log_likelihood, score, TwoStageSample};
use twostage::models::{DoseInterval, MeanModel, ModelFamily};
use twostage::montecarlo::{run_experiment, run_ladder, RunOptions};
use twostage::numeric::special::{chi2_1_cdf, normal_cdf};
use twostage::rng::CounterRng;

const INTERVAL: DoseInterval = DoseInterval { a: 0.25, b: 4.0 };
const SEED: u64 = 20240801;
const LEVELS: [f64; 4] = [0.005, 0.025, 0.05, 0.10];

fn model(family: ModelFamily) -> MeanModel {
    MeanModel::for_interval(family, INTERVAL).unwrap()
}

fn config(n1: usize, n: usize) -> DesignConfig {
    DesignConfig {
        x1: 2.0,
        interval: INTERVAL,
        n1: N1Policy::Fixed(n1),
        n,
        sigma: 0.5,
        theta_true: 1.0,
    }
}

fn report(criterion: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        println!("ACCEPTANCE {criterion} PASS: {detail}");
    } else {
        println!("ACCEPTANCE {criterion} FAIL: {}", failures.join("; "));
    }
    assert!(failures.is_empty(), "ACCEPTANCE {criterion} FAIL: {}", failures.join("; "));
}

#[test]
fn c1_logistic_location_observed_row() {
    let start = std::time::Instant::now();
    let m = model(ModelFamily::LogisticLocation);
    let out = run_experiment(&m, &config(30, 100), 10_000, SEED, &RunOptions::default()).unwrap();
    let summary = tail_probabilities(&out.results, InfoMeasureKind::Observed, &LEVELS).unwrap();
    // Reference left/right tails for the observed-information row at
    // n1/n = 30/100, tolerance +-0.010 per cell.
    let reference = [(0.004, 0.006), (0.023, 0.030), (0.049, 0.055), (0.098, 0.106)];
    let mut failures = Vec::new();
    for (i, &(left, right)) in reference.iter().enumerate() {
        if (summary.left[i] - left).abs() > 0.010 {
            failures.push(format!(
                "left tail at {}: got {:.4}, reference {left:.3} (+-0.010)",
                LEVELS[i], summary.left[i]
            ));
        }
        if (summary.right[i] - right).abs() > 0.010 {
            failures.push(format!(
                "right tail at {}: got {:.4}, reference {right:.3} (+-0.010)",
                LEVELS[i], summary.right[i]
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 120 {
        failures.push(format!("runtime {elapsed:?} exceeded the 2 minute target"));
    }
    report(
        "C1",
        &failures,
        &format!(
            "observed row {:?} within +-0.010 of reference, {:.1?}",
            summary
                .left
                .iter()
                .zip(&summary.right)
                .map(|(l, r)| format!("{l:.3}/{r:.3}"))
                .collect::<Vec<_>>(),
            elapsed
        ),
    );
}

#[test]
fn c2_logistic_scale_fisher_failure_signature() {
    let m = model(ModelFamily::LogisticScale);
    let out = run_experiment(&m, &config(30, 400), 10_000, SEED, &RunOptions::default()).unwrap();
    let fisher = tail_probabilities(&out.results, InfoMeasureKind::ExpectedFisher, &LEVELS).unwrap();
    let observed = tail_probabilities(&out.results, InfoMeasureKind::Observed, &LEVELS).unwrap();
    let fisher_right = fisher.right[1];
    let observed_right = observed.right[1];

    let mut failures = Vec::new();
    if (fisher_right - 0.156).abs() > 0.03 {
        // The tabulated 0.156 is not the Fisher-information tail of this
        // process: with the design information pinned by the integration
        // oracles of C8 (and equal to the simulated mean observed
        // information), the Fisher-normed right tail at 0.025 is ~0.06.
        // Recorded as a reference defect; the assertion is kept as stated.
        failures.push(format!(
            "fisher right tail at 0.025: got {fisher_right:.4}, reference 0.156 (+-0.03)"
        ));
    }
    if observed_right > 0.03 {
        failures.push(format!(
            "observed right tail at 0.025: got {observed_right:.4}, required <= 0.03"
        ));
    }
    if fisher_right <= observed_right {
        failures.push(format!(
            "inversion missing: fisher right {fisher_right:.4} must exceed observed right {observed_right:.4}"
        ));
    }
    report(
        "C2",
        &failures,
        &format!("fisher right {fisher_right:.3} vs observed right {observed_right:.3} at 0.025"),
    );
}

#[test]
fn c3_locally_optimal_stage1_sizes() {
    // (family, n, reference, absolute tolerance)
    let cases = [
        (ModelFamily::LogisticLocation, 100usize, 17usize, 2.0),
        (ModelFamily::LogisticLocation, 200, 23, 2.0),
        (ModelFamily::LogisticLocation, 400, 30, 2.0),
        (ModelFamily::ExponentialScale, 500, 60, 6.0),
        (ModelFamily::ExponentialScale, 1000, 86, 8.6),
        (ModelFamily::ExponentialScale, 2000, 122, 12.2),
        (ModelFamily::LogisticScale, 400, 174, 17.4),
    ];
    let mut failures = Vec::new();
    let mut got_all = Vec::new();
    for &(family, n, reference, tol) in &cases {
        let m = model(family);
        let cfg = DesignConfig { n1: N1Policy::Optimal, ..config(1, n) };
        let search = optimal_n1(&m, &cfg, 1.0, FISHER_NODES).unwrap();
        got_all.push(format!("{}({n})={}", m.family.label(), search.n1_star));
        if (search.n1_star as f64 - reference as f64).abs() > tol {
            // The references are not the argmax of the design information:
            // the information curve here is verified against the C8
            // integration oracle and against the simulated mean observed
            // information at the true parameter. Kept as stated; see the
            // PASS/FAIL line for the computed values.
            failures.push(format!(
                "{} n={n}: argmax {} vs reference {reference} (tol {tol})",
                m.family.label(),
                search.n1_star
            ));
        }
    }
    report("C3", &failures, &got_all.join(", "));
}

#[test]
fn c4_exponential_scale_table_at_n2000() {
    let m = model(ModelFamily::ExponentialScale);
    let out = run_experiment(&m, &config(30, 2000), 10_000, SEED, &RunOptions::default()).unwrap();
    let mut failures = Vec::new();
    for kind in [
        InfoMeasureKind::Observed,
        InfoMeasureKind::IncrementalObservedSubject,
        InfoMeasureKind::IncrementalExpected,
    ] {
        let s = tail_probabilities(&out.results, kind, &LEVELS).unwrap();
        for (i, &alpha) in LEVELS.iter().enumerate() {
            for (side, value) in [("left", s.left[i]), ("right", s.right[i])] {
                if (value - alpha).abs() > 0.008 {
                    failures.push(format!(
                        "{} {side} tail at {alpha}: {value:.4} deviates more than 0.008 from nominal",
                        kind.label()
                    ));
                }
            }
        }
    }
    let fisher = tail_probabilities(&out.results, InfoMeasureKind::ExpectedFisher, &LEVELS).unwrap();
    let offset = (fisher.right[1] - 0.025).abs();
    if offset < 0.02 {
        // Reference right tail is 0.059 (offset 0.034); with the true design
        // information of this process the offset is ~0.015. Reference
        // defect, assertion kept as stated.
        failures.push(format!(
            "fisher right tail at 0.025 off nominal by {offset:.4}, required >= 0.02"
        ));
    }
    report(
        "C4",
        &failures,
        &format!("random norms within +-0.008 of nominal, fisher right offset {offset:.3}"),
    );
}

#[test]
fn c5_cdf_distance_ordering_and_decay() {
    let m = model(ModelFamily::LogisticLocation);
    let kinds = [
        InfoMeasureKind::ExpectedFisher,
        InfoMeasureKind::Observed,
        InfoMeasureKind::IncrementalObservedSubject,
        InfoMeasureKind::IncrementalExpected,
    ];
    // 240k replications push the empirical-CDF noise floor of the distance
    // (~1.29/sqrt(R)) well below the decay signal between n=100 and n=6000,
    // including for the Fisher norm whose starting distance is the smallest.
    let reps = 240_000;
    let seeds: Vec<u64> = (0..5).map(|k| SEED + 1000 * k).collect();
    let mut iad = std::collections::BTreeMap::new(); // (n, kind index, seed index) -> iad

    for &n in &[100usize, 6000] {
        let cfg = DesignConfig { n1: N1Policy::Optimal, ..config(1, n) };
        let n1_star = optimal_n1(&m, &cfg, 1.0, FISHER_NODES).unwrap().n1_star;
        let cfg = DesignConfig { n1: N1Policy::Fixed(n1_star), ..cfg };
        for (s, &seed) in seeds.iter().enumerate() {
            let out = run_experiment(&m, &cfg, reps, seed, &RunOptions::default()).unwrap();
            for (k, &kind) in kinds.iter().enumerate() {
                let values: Vec<f64> =
                    out.results.iter().filter_map(|r| r.stats[kind]).collect();
                iad.insert((n, k, s), iad_vs_std_normal(&values));
            }
        }
    }

    // Paired mean and its standard error across the seed replicates.
    let paired = |diffs: &[f64]| {
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
            / (diffs.len() - 1) as f64;
        (mean, (var / diffs.len() as f64).sqrt())
    };

    let mut failures = Vec::new();

    // Observed information beats the expected information at n = 100.
    // With the true design information as the Fisher norm this ordering
    // reverses (the Fisher distance is ~0.004, the observed ~0.010, because
    // at n1* the dose distribution pins the limiting scale while the
    // observed norm carries small-sample noise); the reference ordering
    // reflects a Fisher scalar that is not the information of this process.
    // Assertion kept as stated.
    let diffs: Vec<f64> = (0..seeds.len())
        .map(|s| iad[&(100, 0, s)] - iad[&(100, 1, s)])
        .collect();
    let (mean, se) = paired(&diffs);
    if mean <= 2.0 * se {
        failures.push(format!(
            "iad(observed) < iad(fisher) at n=100 not established: diff {mean:.5} se {se:.5}"
        ));
    }

    // Every norm's distance decays from n = 100 to n = 6000.
    for (k, &kind) in kinds.iter().enumerate() {
        let diffs: Vec<f64> = (0..seeds.len())
            .map(|s| iad[&(100, k, s)] - iad[&(6000, k, s)])
            .collect();
        let (mean, se) = paired(&diffs);
        if mean <= 2.0 * se {
            failures.push(format!(
                "iad decay for {} not established: diff {mean:.5} se {se:.5}",
                kind.label()
            ));
        }
    }

    let summary: Vec<String> = kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            let at = |n: usize| {
                (0..seeds.len()).map(|s| iad[&(n, k, s)]).sum::<f64>() / seeds.len() as f64
            };
            format!("{}: {:.4}->{:.4}", kind.label(), at(100), at(6000))
        })
        .collect();
    report("C5", &failures, &summary.join(", "));
}

#[test]
fn c6_convergence_ladder_and_chi_squared_limit() {
    let m = model(ModelFamily::LogisticLocation);
    let base = config(5, 105);
    let rungs = [100usize, 1_000, 10_000, 100_000];
    let points = run_ladder(&m, &base, 5, &rungs, 2_000, SEED, &RunOptions::default()).unwrap();

    let mut failures = Vec::new();
    for kind in [
        InfoMeasureKind::Observed,
        InfoMeasureKind::IncrementalObservedSubject,
        InfoMeasureKind::IncrementalExpected,
    ] {
        let devs: Vec<f64> = points.iter().map(|p| p.mean_abs_dev[kind]).collect();
        if !devs.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!("{} ladder not decreasing: {devs:?}", kind.label()));
        }
    }
    let top = points.last().unwrap();
    let (d, p) = ks_test(&top.jd_over_u2, chi2_1_cdf);
    if p <= 0.01 {
        failures.push(format!(
            "stage-wise ratio at n2={} rejected against chi-squared(1): D={d:.4} p={p:.4}",
            top.n2
        ));
    }
    let obs: Vec<String> = points
        .iter()
        .map(|pt| format!("{:.4}", pt.mean_abs_dev[InfoMeasureKind::Observed]))
        .collect();
    report(
        "C6",
        &failures,
        &format!("observed-ladder {} , KS vs chi2(1) p={p:.3}", obs.join(" > ")),
    );
}

#[test]
fn c7_standard_normal_limits_at_n4000() {
    let m = model(ModelFamily::LogisticLocation);
    let out = run_experiment(&m, &config(30, 4000), 200_000, SEED, &RunOptions::default()).unwrap();

    let mut failures = Vec::new();
    let mut detail = Vec::new();
    for kind in [
        InfoMeasureKind::Observed,
        InfoMeasureKind::IncrementalObservedSubject,
        InfoMeasureKind::IncrementalExpected,
    ] {
        let values: Vec<f64> = out.results.iter().filter_map(|r| r.stats[kind]).collect();
        let (d, p) = ks_test(&values, normal_cdf);
        detail.push(format!("{} p={p:.3}", kind.label()));
        if p <= 0.01 {
            failures.push(format!(
                "{} norming rejected against N(0,1): D={d:.5} p={p:.4}",
                kind.label()
            ));
        }
    }
    let values: Vec<f64> = out
        .results
        .iter()
        .filter_map(|r| r.stats[InfoMeasureKind::ExpectedFisher])
        .collect();
    let (d, p) = ks_test(&values, normal_cdf);
    detail.push(format!("fisher p={p:.1e}"));
    if p > 0.01 {
        // The mixture is real but feeble at this configuration: the stage-1
        // size 30 pins the dose so well that the limiting scale varies only
        // a few percent (population KS distance ~0.0015, below the 0.01
        // critical value for any practical replication count). Detecting it
        // would need millions of replications. Assertion kept as stated.
        failures.push(format!(
            "fisher norming not rejected against N(0,1): D={d:.5} p={p:.4} (mixture limit expected)"
        ));
    }
    report("C7", &failures, &detail.join(", "));
}

#[test]
fn c8_oracle_equivalences() {
    let mut failures = Vec::new();

    // (a) full_mle against a 1e6-point grid scan on 1000 random small samples.
    {
        let worst = std::sync::Mutex::new((0.0f64, String::new()));
        let total = 1000usize;
        let threads = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(4).min(16);
        let chunk = total.div_ceil(threads);
        std::thread::scope(|scope| {
            for t in 0..threads {
                let worst = &worst;
                scope.spawn(move || {
                    let from = t * chunk;
                    let to = ((t + 1) * chunk).min(total);
                    for i in from..to {
                        let family = ModelFamily::ALL[i % 4];
                        let m = model(family);
                        let mut rng = CounterRng::new(0xC8_000 + i as u64);
                        let theta = rng.next_range(0.2, 3.5);
                        let x1 = rng.next_range(0.25, 4.0);
                        let x2 = rng.next_range(0.25, 4.0);
                        let n1 = 1 + (rng.next_uniform() * 5.0) as usize;
                        let n2 = 1 + (rng.next_uniform() * 5.0) as usize;
                        let y1: Vec<f64> =
                            (0..n1).map(|_| rng.next_normal(m.eta(x1, theta), 0.5)).collect();
                        let y2: Vec<f64> =
                            (0..n2).map(|_| rng.next_normal(m.eta(x2, theta), 0.5)).collect();
                        let sample = TwoStageSample::new(x1, x2, y1, y2, 0.5).unwrap();
                        let hat = full_mle(&m, &sample);
                        let grid = 1_000_000usize;
                        let mut best_t = m.theta_lo;
                        let mut best = f64::NEG_INFINITY;
                        for g in 0..=grid {
                            let t = m.theta_lo
                                + (m.theta_hi - m.theta_lo) * g as f64 / grid as f64;
                            let v = log_likelihood(&m, &sample, t);
                            if v > best {
                                best = v;
                                best_t = t;
                            }
                        }
                        let err = (hat - best_t).abs();
                        let mut w = worst.lock().unwrap();
                        if err > w.0 {
                            *w = (err, format!("{} sample {i}", family.label()));
                        }
                    }
                });
            }
        });
        let (err, whom) = worst.into_inner().unwrap();
        if err > 1e-5 {
            failures.push(format!("full_mle grid-oracle gap {err:.2e} at {whom} (tol 1e-5)"));
        }
    }

    // (b) observed information against -dS/dtheta on 1000 random points.
    {
        let h = 1e-6;
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let family = ModelFamily::ALL[i % 4];
            let m = model(family);
            let mut rng = CounterRng::new(0xC8_100 + i as u64);
            let theta0 = rng.next_range(0.3, 3.5);
            let x1 = rng.next_range(0.25, 4.0);
            let x2 = rng.next_range(0.25, 4.0);
            let y1: Vec<f64> = (0..3).map(|_| rng.next_normal(m.eta(x1, theta0), 0.5)).collect();
            let y2: Vec<f64> = (0..5).map(|_| rng.next_normal(m.eta(x2, theta0), 0.5)).collect();
            let sample = TwoStageSample::new(x1, x2, y1, y2, 0.5).unwrap();
            let theta = rng.next_range(0.05, 3.95);
            let fd = -(score(&m, &sample, theta + h) - score(&m, &sample, theta - h)) / (2.0 * h);
            let j = observed_info(&m, &sample, theta);
            worst = worst.max((j - fd).abs() / (1.0 + j.abs()));
        }
        if worst > 1e-5 {
            failures.push(format!("observed vs -dS/dtheta relative gap {worst:.2e} (tol 1e-5)"));
        }
    }

    // (c) design information against a 1e6-draw MC integration oracle.
    for family in ModelFamily::ALL {
        let m = model(family);
        let cfg = config(30, 500);
        let info = design_fisher_info(&m, &cfg, 30, 1.0).unwrap();
        let reps = 1_000_000usize;
        let mut rng = CounterRng::new(0xC8_200 + family as u64);
        let mu = m.eta(2.0, 1.0);
        let sd = 0.5 / 30f64.sqrt();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let ybar = rng.next_normal(mu, sd);
            let v = m.deta(adaptive_dose(&m, 2.0, ybar, INTERVAL), 1.0).powi(2);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / reps as f64;
        let var = (sumsq / reps as f64 - mean * mean).max(0.0);
        let mc_total = 30.0 * m.deta(2.0, 1.0).powi(2) / 0.25 + 470.0 * mean / 0.25;
        let se = 470.0 * (var / reps as f64).sqrt() / 0.25;
        // Round-off floor covers the constant-dose family whose MC spread is
        // exactly zero.
        let tol = 3.0 * se + 1e-9 * mc_total.abs();
        if (info.total - mc_total).abs() > tol {
            failures.push(format!(
                "{}: quadrature {:.6} vs MC oracle {:.6} (3se = {:.2e})",
                family.label(),
                info.total,
                mc_total,
                3.0 * se
            ));
        }
    }

    // Node-count stability rides along with the oracle check.
    {
        let m = model(ModelFamily::LogisticScale);
        let a = fisher_info_with_nodes(&m, 2.0, INTERVAL, 30, 370, 0.5, 1.0, 201).unwrap();
        let b = fisher_info_with_nodes(&m, 2.0, INTERVAL, 30, 370, 0.5, 1.0, 401).unwrap();
        if (a.total - b.total).abs() > 1e-8 * a.total {
            failures.push("node-count doubling moved the logistic-scale total".into());
        }
    }

    report("C8", &failures, "grid MLE, -dS/dtheta, and MC integration oracles all agree");
}
