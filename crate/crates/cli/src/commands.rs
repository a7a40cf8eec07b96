//! The four batch commands: `table`, `figure`, `diagnose`, `n1star`.
//!
//! Each command validates every scenario before any computation, computes a
//! scenario's outputs fully in memory, and only then writes files, so an
//! invalid configuration never leaves partial artifacts behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use twostage::analysis::{cdf_distances, ks_test, t60_reference, tail_probabilities};
use twostage::design::{optimal_n1, DesignConfig, N1Policy, FISHER_NODES};
use twostage::information::InfoMeasureKind;
use twostage::models::{DoseInterval, MeanModel};
use twostage::montecarlo::{run_experiment, run_ladder, ExperimentOutput, RunOptions};
use twostage::numeric::special::chi2_1_cdf;

use crate::config::{spec_hash, ExperimentSpec, Overrides};
use crate::error::{CliError, Result};
use crate::report::{csv_field, g6, provenance};

/// Measures reported in tail tables and figure curves, in output order.
/// The stage-wise incremental observed measure does not normalize the MLE;
/// it appears only in raw dumps and diagnostics.
const TABLE_MEASURES: [InfoMeasureKind; 4] = [
    InfoMeasureKind::ExpectedFisher,
    InfoMeasureKind::Observed,
    InfoMeasureKind::IncrementalObservedSubject,
    InfoMeasureKind::IncrementalExpected,
];

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn design_config(spec: &ExperimentSpec, n: usize) -> Result<(MeanModel, DesignConfig)> {
    let interval = DoseInterval::new(spec.a, spec.b)?;
    let model = MeanModel::for_interval(spec.family, interval)?;
    let config = DesignConfig {
        x1: spec.x1,
        interval,
        n1: spec.n1,
        n,
        sigma: spec.sigma,
        theta_true: spec.theta,
    };
    config.validate(&model)?;
    Ok((model, config))
}

fn run_options(overrides: &Overrides) -> RunOptions {
    RunOptions { threads: overrides.threads, ..Default::default() }
}

/// A file to be written, fully rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

fn write_all(artifacts: &[Artifact]) -> Result<()> {
    for artifact in artifacts {
        if let Some(parent) = artifact.path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&artifact.path, &artifact.contents)?;
    }
    Ok(())
}

/// `table`: one tail-probability CSV per (scenario, n), plus a manifest.
pub fn run_table(specs: &[ExperimentSpec], overrides: &Overrides, out_dir: &Path) -> Result<Vec<Artifact>> {
    let mut artifacts = Vec::new();
    for raw in specs {
        let spec = raw.apply(overrides);
        let hash = spec_hash(&spec);
        let mut manifest = manifest_header(&spec, hash);
        for &n in &spec.n_list {
            let (model, config) = design_config(&spec, n)?;
            let out = run_experiment(&model, &config, spec.reps, spec.seed, &run_options(overrides))?;

            let mut csv = provenance(spec.seed, hash, VERSION);
            csv.push_str("measure,nominal,left_tail,right_tail,excluded_count,n1_used,R,seed\n");
            for kind in TABLE_MEASURES {
                let summary = tail_probabilities(&out.results, kind, &spec.levels)?;
                for (i, &alpha) in spec.levels.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{}",
                        csv_field(kind.label()),
                        g6(alpha),
                        g6(summary.left[i]),
                        g6(summary.right[i]),
                        summary.excluded,
                        out.manifest.n1_used,
                        spec.reps,
                        spec.seed
                    );
                }
            }
            artifacts.push(Artifact {
                path: out_dir.join(format!("{}_n{}_table.csv", spec.name, n)),
                contents: csv,
            });
            if overrides.dump_raw {
                artifacts.push(Artifact {
                    path: out_dir.join(format!("{}_n{}_raw.csv", spec.name, n)),
                    contents: raw_dump(&out, spec.seed, hash),
                });
            }
            append_run_summary(&mut manifest, n, &out);
        }
        artifacts.push(Artifact {
            path: out_dir.join(format!("{}_manifest.txt", spec.name)),
            contents: manifest,
        });
    }
    write_all(&artifacts)?;
    Ok(artifacts)
}

/// `figure`: one CSV per scenario with the integrated absolute CDF
/// difference of every measure across the n grid.
pub fn run_figure(specs: &[ExperimentSpec], overrides: &Overrides, out_dir: &Path) -> Result<Vec<Artifact>> {
    let t60 = t60_reference();
    let mut artifacts = Vec::new();
    for raw in specs {
        let spec = raw.apply(overrides);
        let hash = spec_hash(&spec);
        let mut csv = provenance(spec.seed, hash, VERSION);
        csv.push_str(
            "n,n1_star,iad_expected_fisher,iad_observed,iad_incremental_observed_subject,iad_incremental_expected,t60_reference\n",
        );
        let mut manifest = manifest_header(&spec, hash);
        for &n in &spec.n_list {
            let (model, config) = design_config(&spec, n)?;
            let out = run_experiment(&model, &config, spec.reps, spec.seed, &run_options(overrides))?;
            let mut row = format!("{},{}", n, out.manifest.n1_used);
            for distance in cdf_distances(&out.results, &TABLE_MEASURES)? {
                let _ = write!(row, ",{}", g6(distance.iad));
            }
            let _ = writeln!(csv, "{row},{}", g6(t60));
            if overrides.dump_raw {
                artifacts.push(Artifact {
                    path: out_dir.join(format!("{}_n{}_raw.csv", spec.name, n)),
                    contents: raw_dump(&out, spec.seed, hash),
                });
            }
            append_run_summary(&mut manifest, n, &out);
        }
        artifacts.push(Artifact { path: out_dir.join(format!("{}_figure.csv", spec.name)), contents: csv });
        artifacts.push(Artifact {
            path: out_dir.join(format!("{}_manifest.txt", spec.name)),
            contents: manifest,
        });
    }
    write_all(&artifacts)?;
    Ok(artifacts)
}

/// `diagnose`: the large-n₂ convergence ladder and the chi-squared check of
/// the stage-wise incremental observed information.
pub fn run_diagnostics(specs: &[ExperimentSpec], overrides: &Overrides, out_dir: &Path) -> Result<Vec<Artifact>> {
    let mut artifacts = Vec::new();
    for raw in specs {
        let spec = raw.apply(overrides);
        let hash = spec_hash(&spec);
        let (model, _) = design_config(&spec, spec.ladder_n1 + spec.ladder_n2[0])?;
        let base = DesignConfig {
            x1: spec.x1,
            interval: DoseInterval::new(spec.a, spec.b)?,
            n1: N1Policy::Fixed(spec.ladder_n1),
            n: spec.ladder_n1 + spec.ladder_n2[0],
            sigma: spec.sigma,
            theta_true: spec.theta,
        };
        let points = run_ladder(
            &model,
            &base,
            spec.ladder_n1,
            &spec.ladder_n2,
            spec.reps,
            spec.seed,
            &run_options(overrides),
        )?;

        let mut report = provenance(spec.seed, hash, VERSION);
        let _ = writeln!(report, "diagnostics for scenario [{}]", spec.name);
        let _ = writeln!(
            report,
            "model={} x1={} interval=[{}, {}] theta={} sigma={} n1={} reps={}",
            spec.family.label(),
            g6(spec.x1),
            g6(spec.a),
            g6(spec.b),
            g6(spec.theta),
            g6(spec.sigma),
            spec.ladder_n1,
            spec.reps
        );
        report.push('\n');
        if spec.reps < 100 {
            let _ = writeln!(
                report,
                "WARNING: insufficient replications (reps={} < 100); ladder means and the KS check are unreliable\n",
                spec.reps
            );
        }
        let _ = writeln!(report, "mean |norm(theta_hat)/n - U^-2| by stage-2 size:");
        let _ = writeln!(report, "{:>10}  {:>14}  {:>14}  {:>14}  {:>10}", "n2", "observed", "inc_subject", "inc_expected", "degen_u2");
        for point in &points {
            let _ = writeln!(
                report,
                "{:>10}  {:>14}  {:>14}  {:>14}  {:>10}",
                point.n2,
                g6(point.mean_abs_dev[InfoMeasureKind::Observed]),
                g6(point.mean_abs_dev[InfoMeasureKind::IncrementalObservedSubject]),
                g6(point.mean_abs_dev[InfoMeasureKind::IncrementalExpected]),
                point.degenerate_u2
            );
        }
        report.push('\n');
        for kind in [
            InfoMeasureKind::Observed,
            InfoMeasureKind::IncrementalObservedSubject,
            InfoMeasureKind::IncrementalExpected,
        ] {
            let decreasing = points
                .windows(2)
                .all(|w| w[1].mean_abs_dev[kind] < w[0].mean_abs_dev[kind]);
            let _ = writeln!(
                report,
                "{}: ladder {}",
                kind.label(),
                if decreasing { "monotone decreasing: PASS" } else { "not monotone: FAIL" }
            );
        }
        let top = points.last().expect("ladder has at least one rung");
        if top.jd_over_u2.len() >= 10 {
            let (d, p) = ks_test(&top.jd_over_u2, chi2_1_cdf);
            let _ = writeln!(
                report,
                "incremental_observed_stage(theta_true)/(n U^-2) at n2={}: KS vs chi-squared(1) D={} p={} -> {}",
                top.n2,
                g6(d),
                g6(p),
                if p > 0.01 { "PASS" } else { "FAIL" }
            );
        } else {
            let _ = writeln!(report, "incremental_observed_stage: too few replications for the KS check");
        }
        artifacts.push(Artifact {
            path: out_dir.join(format!("{}_diagnostics.txt", spec.name)),
            contents: report,
        });
    }
    write_all(&artifacts)?;
    Ok(artifacts)
}

/// `n1star`: the optimal stage-1 size search trace, printed and optionally
/// written as CSV.
pub fn run_n1star(
    specs: &[ExperimentSpec],
    overrides: &Overrides,
    out_dir: Option<&Path>,
) -> Result<(String, Vec<Artifact>)> {
    let mut stdout = String::new();
    let mut artifacts = Vec::new();
    for raw in specs {
        let spec = raw.apply(overrides);
        let hash = spec_hash(&spec);
        for &n in &spec.n_list {
            let (model, config) = design_config(&spec, n)?;
            let search = optimal_n1(&model, &config, spec.theta, FISHER_NODES)?;
            let _ = writeln!(
                stdout,
                "[{}] model={} n={}: n1* = {}",
                spec.name,
                spec.family.label(),
                n,
                search.n1_star
            );
            for &(n1, total) in &search.trace {
                let marker = if n1 == search.n1_star { "  <- max" } else { "" };
                let _ = writeln!(stdout, "  n1={n1:>5}  information={}{}", g6(total), marker);
            }
            if let Some(dir) = out_dir {
                let mut csv = provenance(spec.seed, hash, VERSION);
                csv.push_str("n1,information,is_optimal\n");
                for &(n1, total) in &search.trace {
                    let _ = writeln!(csv, "{n1},{},{}", g6(total), u8::from(n1 == search.n1_star));
                }
                artifacts.push(Artifact {
                    path: dir.join(format!("{}_n{}_n1star.csv", spec.name, n)),
                    contents: csv,
                });
            }
        }
    }
    write_all(&artifacts)?;
    Ok((stdout, artifacts))
}

fn manifest_header(spec: &ExperimentSpec, hash: u64) -> String {
    let mut m = provenance(spec.seed, hash, VERSION);
    let _ = writeln!(m, "scenario = {}", spec.name);
    let _ = writeln!(m, "model = {}", spec.family.label());
    let _ = writeln!(m, "x1 = {}", g6(spec.x1));
    let _ = writeln!(m, "interval = [{}, {}]", g6(spec.a), g6(spec.b));
    let _ = writeln!(m, "theta_true = {}", g6(spec.theta));
    let _ = writeln!(m, "sigma = {}", g6(spec.sigma));
    let _ = writeln!(m, "n = {:?}", spec.n_list);
    let _ = writeln!(
        m,
        "n1 = {}",
        match spec.n1 {
            N1Policy::Fixed(k) => k.to_string(),
            N1Policy::Optimal => "optimal".to_string(),
        }
    );
    let _ = writeln!(m, "reps = {}", spec.reps);
    let _ = writeln!(m, "seed = {}", spec.seed);
    let _ = writeln!(m, "levels = {:?}", spec.levels);
    m.push('\n');
    m
}

fn append_run_summary(manifest: &mut String, n: usize, out: &ExperimentOutput) {
    let _ = write!(manifest, "run n={n}: n1_used={}", out.manifest.n1_used);
    if let Some(star) = out.manifest.n1_star {
        let _ = write!(manifest, " n1_star={star}");
    }
    let _ = write!(
        manifest,
        " fisher_total={} boundary_mle={}",
        g6(out.fisher.total),
        out.boundary_count()
    );
    for kind in InfoMeasureKind::ALL {
        let excluded = out.degenerate_count(kind);
        if excluded > 0 {
            let _ = write!(manifest, " degenerate_{}={excluded}", kind.label());
        }
    }
    manifest.push('\n');
}

fn raw_dump(out: &ExperimentOutput, seed: u64, hash: u64) -> String {
    let mut csv = provenance(seed, hash, VERSION);
    csv.push_str("rep,theta1_hat,x2_hat,theta_hat,boundary_mle");
    for kind in InfoMeasureKind::ALL {
        let _ = write!(csv, ",norm_{}", kind.label());
    }
    for kind in InfoMeasureKind::ALL {
        let _ = write!(csv, ",stat_{}", kind.label());
    }
    csv.push('\n');
    for r in &out.results {
        let _ = write!(
            csv,
            "{},{},{},{},{}",
            r.rep,
            r.theta1_hat,
            r.x2_hat,
            r.theta_hat,
            u8::from(r.boundary_mle)
        );
        for kind in InfoMeasureKind::ALL {
            let _ = write!(csv, ",{}", r.norms[kind]);
        }
        for kind in InfoMeasureKind::ALL {
            match r.stats[kind] {
                Some(t) => {
                    let _ = write!(csv, ",{t}");
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    csv
}

/// Shared entry used by `main` and the integration tests.
pub fn dispatch(verb: &str, specs: &[ExperimentSpec], overrides: &Overrides, out_dir: Option<&Path>) -> Result<String> {
    match verb {
        "table" => {
            let dir = require_out(out_dir)?;
            run_table(specs, overrides, dir)?;
            Ok(String::new())
        }
        "figure" => {
            let dir = require_out(out_dir)?;
            run_figure(specs, overrides, dir)?;
            Ok(String::new())
        }
        "diagnose" => {
            let dir = require_out(out_dir)?;
            run_diagnostics(specs, overrides, dir)?;
            Ok(String::new())
        }
        "n1star" => {
            let (stdout, _) = run_n1star(specs, overrides, out_dir)?;
            Ok(stdout)
        }
        other => Err(CliError::Config(format!(
            "unknown command '{other}' (expected table, figure, diagnose, or n1star)"
        ))),
    }
}

fn require_out(out_dir: Option<&Path>) -> Result<&Path> {
    out_dir.ok_or_else(|| CliError::Config("--out DIR is required for this command".into()))
}
