//! Replication engine.
//!
//! Each replication draws stage-1 responses, selects the adaptive dose from
//! the stage-1 mean, draws stage-2 responses, computes the full-data MLE,
//! and evaluates every information measure at it. The normalized statistic
//! for measure m is T = m^{1/2} (θ̂ - θ_true); the expected (Fisher) norm is
//! the deterministic design information, shared by all replications of a
//! scenario, while the other norms are random.
//!
//! Replications are addressed by `(master seed, replication index)` and every
//! response by `(…, stage, subject)`, so the run decomposes into independent
//! substreams: results are bit-identical for any worker count, and any single
//! replication can be reconstructed in isolation.

use crate::design::{adaptive_dose, design_fisher_info, optimal_n1, DesignConfig, FisherBreakdown, N1Policy, FISHER_NODES};
use crate::error::Result;
use crate::information::{
    incremental_expected_info, incremental_observed_stage, incremental_observed_subject, observed_info,
    InfoMeasureKind, MeasureMap,
};
use crate::likelihood::{full_mle, TwoStageSample};
use crate::models::MeanModel;
use crate::rng::standard_normal;

/// Execution knobs. `threads = None` falls back to the `THREADS` environment
/// variable and then to the machine's parallelism; the choice never affects
/// results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    /// Evaluate the Fisher norm at each replication's θ̂ instead of at the
    /// true θ. Much slower (one quadrature per replication) and off by
    /// default.
    pub fisher_at_estimate: bool,
}

/// Resolved worker count.
pub fn worker_threads(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
        .min(256)
}

/// One replication's estimates and normalized statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: u64,
    /// Stage-1 estimate θ̂_{n₁}.
    pub theta1_hat: f64,
    /// Realized second-stage dose.
    pub x2_hat: f64,
    /// Stage mean responses; with the doses they are sufficient for every
    /// stage-level quantity, so diagnostics can re-evaluate measures at any
    /// parameter value after the fact.
    pub ybar1: f64,
    pub ybar2: f64,
    /// Full-data estimate θ̂_n.
    pub theta_hat: f64,
    /// Value of each information measure (Fisher at the scenario's norm).
    pub norms: MeasureMap<f64>,
    /// T = norm^{1/2} (θ̂ - θ), present exactly when the norm is positive.
    pub stats: MeasureMap<Option<f64>>,
    /// θ̂_n landed on a truncation boundary.
    pub boundary_mle: bool,
}

impl ReplicationResult {
    pub fn degenerate(&self, kind: InfoMeasureKind) -> bool {
        self.stats[kind].is_none()
    }
}

/// Echo of the settings that produced a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub family: &'static str,
    pub x1: f64,
    pub a: f64,
    pub b: f64,
    pub theta_true: f64,
    pub sigma: f64,
    pub n: usize,
    pub n1_used: usize,
    /// Set when the stage-1 size came from the optimality search.
    pub n1_star: Option<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub version: &'static str,
}

/// A full run: manifest, the deterministic design information, and one
/// result per replication in index order.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub manifest: RunManifest,
    pub fisher: FisherBreakdown,
    pub results: Vec<ReplicationResult>,
}

impl ExperimentOutput {
    pub fn degenerate_count(&self, kind: InfoMeasureKind) -> usize {
        self.results.iter().filter(|r| r.degenerate(kind)).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.results.iter().filter(|r| r.boundary_mle).count()
    }
}

/// Everything a worker needs to run replications without touching shared
/// state.
struct Scenario {
    model: MeanModel,
    x1: f64,
    interval: crate::models::DoseInterval,
    n1: usize,
    n2: usize,
    sigma: f64,
    theta_true: f64,
    master_seed: u64,
    /// Precomputed Fisher norm; `None` re-evaluates at each θ̂.
    fisher_norm: Option<f64>,
}

/// Generate and analyze a single replication.
fn replicate(scn: &Scenario, rep: u64) -> ReplicationResult {
    let model = &scn.model;
    let mu1 = model.eta(scn.x1, scn.theta_true);
    let mut y1 = Vec::with_capacity(scn.n1);
    for subject in 0..scn.n1 {
        y1.push(mu1 + scn.sigma * standard_normal(scn.master_seed, rep, 1, subject as u64));
    }
    let ybar1 = crate::numeric::sum::pairwise_mean(&y1);
    let theta1_hat = model.stage1_mle(scn.x1, ybar1);
    let x2_hat = adaptive_dose(model, scn.x1, ybar1, scn.interval);

    let mu2 = model.eta(x2_hat, scn.theta_true);
    let mut y2 = Vec::with_capacity(scn.n2);
    for subject in 0..scn.n2 {
        y2.push(mu2 + scn.sigma * standard_normal(scn.master_seed, rep, 2, subject as u64));
    }

    let sample = TwoStageSample::new(scn.x1, x2_hat, y1, y2, scn.sigma)
        .expect("scenario guarantees nonempty stages and positive sigma");
    let (ybar1, ybar2) = (sample.ybar1(), sample.ybar2());
    let theta_hat = full_mle(model, &sample);
    let boundary_mle = theta_hat == model.theta_lo || theta_hat == model.theta_hi;

    let fisher = match scn.fisher_norm {
        Some(v) => v,
        None => design_fisher_info(
            model,
            &DesignConfig {
                x1: scn.x1,
                interval: scn.interval,
                n1: N1Policy::Fixed(scn.n1),
                n: scn.n1 + scn.n2,
                sigma: scn.sigma,
                theta_true: scn.theta_true,
            },
            scn.n1,
            theta_hat,
        )
        .map(|b| b.total)
        .unwrap_or(f64::NAN),
    };

    let mut norms = MeasureMap::filled(0.0);
    norms.set(InfoMeasureKind::ExpectedFisher, fisher);
    norms.set(InfoMeasureKind::Observed, observed_info(model, &sample, theta_hat));
    norms.set(
        InfoMeasureKind::IncrementalObservedSubject,
        incremental_observed_subject(model, &sample, theta_hat),
    );
    norms.set(
        InfoMeasureKind::IncrementalObservedStage,
        incremental_observed_stage(model, &sample, theta_hat),
    );
    norms.set(
        InfoMeasureKind::IncrementalExpected,
        incremental_expected_info(model, &sample, theta_hat),
    );

    let err = theta_hat - scn.theta_true;
    let mut stats = MeasureMap::filled(None);
    for kind in InfoMeasureKind::ALL {
        let norm = norms[kind];
        // Non-positive norms leave the square-root norming undefined; the
        // replication is flagged degenerate for that measure and excluded
        // from aggregation, never dropped from the output.
        if norm > 0.0 && norm.is_finite() {
            stats.set(kind, Some(norm.sqrt() * err));
        }
    }

    ReplicationResult { rep, theta1_hat, x2_hat, ybar1, ybar2, theta_hat, norms, stats, boundary_mle }
}

/// Run `replications` independent replications of a scenario.
///
/// The output is a pure function of `(model, config, replications,
/// master_seed)` and the Fisher-norm mode; worker count only changes the
/// wall-clock time.
pub fn run_experiment(
    model: &MeanModel,
    config: &DesignConfig,
    replications: usize,
    master_seed: u64,
    options: &RunOptions,
) -> Result<ExperimentOutput> {
    config.validate(model)?;
    let (n1, n1_star) = match config.n1 {
        N1Policy::Fixed(k) => (k, None),
        N1Policy::Optimal => {
            let search = optimal_n1(model, config, config.theta_true, FISHER_NODES)?;
            (search.n1_star, Some(search.n1_star))
        }
    };

    let fisher = design_fisher_info(model, config, n1, config.theta_true)?;
    let scenario = Scenario {
        model: *model,
        x1: config.x1,
        interval: config.interval,
        n1,
        n2: config.n - n1,
        sigma: config.sigma,
        theta_true: config.theta_true,
        master_seed,
        fisher_norm: if options.fisher_at_estimate { None } else { Some(fisher.total) },
    };

    let threads = worker_threads(options.threads).min(replications.max(1));
    let mut results = Vec::with_capacity(replications);
    if threads <= 1 {
        for rep in 0..replications as u64 {
            results.push(replicate(&scenario, rep));
        }
    } else {
        let chunk = replications.div_ceil(threads);
        let mut partials: Vec<Vec<ReplicationResult>> = Vec::with_capacity(threads);
        std::thread::scope(|scope| {
            let scenario = &scenario;
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let from = t * chunk;
                    let to = ((t + 1) * chunk).min(replications);
                    scope.spawn(move || {
                        (from..to).map(|rep| replicate(scenario, rep as u64)).collect::<Vec<_>>()
                    })
                })
                .collect();
            for handle in handles {
                partials.push(handle.join().expect("replication worker panicked"));
            }
        });
        for part in partials {
            results.extend(part);
        }
    }

    let manifest = RunManifest {
        family: model.family.label(),
        x1: config.x1,
        a: config.interval.a,
        b: config.interval.b,
        theta_true: config.theta_true,
        sigma: config.sigma,
        n: config.n,
        n1_used: n1,
        n1_star,
        replications,
        master_seed,
        version: env!("CARGO_PKG_VERSION"),
    };
    Ok(ExperimentOutput { manifest, fisher, results })
}

/// Convenience wrapper for `simulate_one`-style use: replication `rep` of a
/// scenario, with the Fisher norm computed on the fly.
pub fn simulate_one(
    model: &MeanModel,
    config: &DesignConfig,
    n1: usize,
    master_seed: u64,
    rep: u64,
) -> Result<ReplicationResult> {
    let fisher = design_fisher_info(model, config, n1, config.theta_true)?;
    let scenario = Scenario {
        model: *model,
        x1: config.x1,
        interval: config.interval,
        n1,
        n2: config.n - n1,
        sigma: config.sigma,
        theta_true: config.theta_true,
        master_seed,
        fisher_norm: Some(fisher.total),
    };
    Ok(replicate(&scenario, rep))
}

/// One rung of the large-n₂ convergence ladder.
#[derive(Debug, Clone)]
pub struct LadderPoint {
    pub n2: usize,
    /// Monte Carlo mean of |n⁻¹·norm(θ̂) - U⁻²| for the measures that
    /// converge in probability to U⁻².
    pub mean_abs_dev: MeasureMap<f64>,
    /// Per-replication ratios n⁻¹ J^D(θ_true) / U⁻², whose limit is χ²(1).
    ///
    /// The stage-wise quadratic variation must be taken at the true
    /// parameter here: at the full-data MLE the score is zero, so the two
    /// stage increments cancel exactly (D₂(θ̂) = -D₁(θ̂)) and n⁻¹J^D(θ̂ₙ)
    /// collapses to zero instead of the chi-squared mixture.
    pub jd_over_u2: Vec<f64>,
    pub degenerate_u2: usize,
}

/// Fix n₁ and sweep n₂ upward, recording how fast each random norm closes in
/// on the limiting scale U⁻² = η̇(x̂₂, θ)²/σ².
pub fn run_ladder(
    model: &MeanModel,
    base: &DesignConfig,
    n1: usize,
    n2_values: &[usize],
    replications: usize,
    master_seed: u64,
    options: &RunOptions,
) -> Result<Vec<LadderPoint>> {
    let mut points = Vec::with_capacity(n2_values.len());
    for (i, &n2) in n2_values.iter().enumerate() {
        let config = DesignConfig {
            n1: N1Policy::Fixed(n1),
            n: n1 + n2,
            ..*base
        };
        let out = run_experiment(model, &config, replications, master_seed.wrapping_add(i as u64), options)?;
        let n = (n1 + n2) as f64;
        let mut dev_obs = Vec::with_capacity(replications);
        let mut dev_sub = Vec::with_capacity(replications);
        let mut dev_exp = Vec::with_capacity(replications);
        let mut jd_ratio = Vec::with_capacity(replications);
        let mut degenerate_u2 = 0usize;
        for r in &out.results {
            let u2 = crate::information::limit_scale(model, r.x2_hat, config.theta_true, config.sigma);
            if u2.degenerate || u2.u_inv_sq <= 0.0 {
                degenerate_u2 += 1;
                continue;
            }
            dev_obs.push((r.norms[InfoMeasureKind::Observed] / n - u2.u_inv_sq).abs());
            dev_sub.push((r.norms[InfoMeasureKind::IncrementalObservedSubject] / n - u2.u_inv_sq).abs());
            dev_exp.push((r.norms[InfoMeasureKind::IncrementalExpected] / n - u2.u_inv_sq).abs());
            let at_truth = TwoStageSample::from_means(
                config.x1, r.x2_hat, r.ybar1, n1, r.ybar2, n2, config.sigma,
            )
            .expect("ladder stages are nonempty");
            let jd = incremental_observed_stage(model, &at_truth, config.theta_true);
            jd_ratio.push(jd / n / u2.u_inv_sq);
        }
        let mut mean_abs_dev = MeasureMap::filled(f64::NAN);
        mean_abs_dev.set(InfoMeasureKind::Observed, crate::numeric::sum::pairwise_mean(&dev_obs));
        mean_abs_dev.set(
            InfoMeasureKind::IncrementalObservedSubject,
            crate::numeric::sum::pairwise_mean(&dev_sub),
        );
        mean_abs_dev.set(InfoMeasureKind::IncrementalExpected, crate::numeric::sum::pairwise_mean(&dev_exp));
        points.push(LadderPoint { n2, mean_abs_dev, jd_over_u2: jd_ratio, degenerate_u2 });
    }
    Ok(points)
}
