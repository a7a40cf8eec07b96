//! Experiment configuration files.
//!
//! Flat UTF-8 text, `key = value` pairs grouped into `[name]` sections, one
//! section per scenario. `#` starts a comment. Lists are comma-separated.
//! Example:
//!
//! ```text
//! [table1]
//! model = logistic_location
//! n = 100, 200, 400
//! n1 = 30            # or: optimal
//! reps = 10000
//! seed = 20240801
//! ```
//!
//! Dose and error settings default to the standard study configuration
//! (x1 = 2, doses in [0.25, 4], theta = 1, sigma = 0.5) and can be
//! overridden per scenario.

use crate::error::{CliError, Result};
use twostage::design::N1Policy;
use twostage::models::ModelFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub family: ModelFamily,
    pub x1: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub sigma: f64,
    pub n_list: Vec<usize>,
    pub n1: N1Policy,
    pub reps: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    /// Stage-1 size held fixed by the `diagnose` command.
    pub ladder_n1: usize,
    /// Stage-2 sizes swept by the `diagnose` command.
    pub ladder_n2: Vec<usize>,
}

/// Command-line overrides applied uniformly to every scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub threads: Option<usize>,
    pub dump_raw: bool,
}

impl ExperimentSpec {
    fn with_defaults(name: String) -> PartialSpec {
        PartialSpec {
            name,
            family: None,
            x1: 2.0,
            a: 0.25,
            b: 4.0,
            theta: 1.0,
            sigma: 0.5,
            n_list: Vec::new(),
            n1: None,
            reps: None,
            seed: None,
            levels: vec![0.005, 0.025, 0.05, 0.10],
            ladder_n1: 5,
            ladder_n2: vec![100, 1_000, 10_000, 100_000],
        }
    }

    pub fn apply(&self, overrides: &Overrides) -> ExperimentSpec {
        let mut spec = self.clone();
        if let Some(seed) = overrides.seed {
            spec.seed = seed;
        }
        if let Some(reps) = overrides.reps {
            spec.reps = reps;
        }
        spec
    }
}

struct PartialSpec {
    name: String,
    family: Option<ModelFamily>,
    x1: f64,
    a: f64,
    b: f64,
    theta: f64,
    sigma: f64,
    n_list: Vec<usize>,
    n1: Option<N1Policy>,
    reps: Option<usize>,
    seed: Option<u64>,
    levels: Vec<f64>,
    ladder_n1: usize,
    ladder_n2: Vec<usize>,
}

impl PartialSpec {
    fn finish(self) -> Result<ExperimentSpec> {
        let fail = |msg: String| Err(CliError::Config(msg));
        let Some(family) = self.family else {
            return fail(format!("scenario [{}]: missing required key 'model'", self.name));
        };
        let Some(n1) = self.n1 else {
            return fail(format!("scenario [{}]: missing required key 'n1'", self.name));
        };
        let Some(reps) = self.reps else {
            return fail(format!("scenario [{}]: missing required key 'reps'", self.name));
        };
        let Some(seed) = self.seed else {
            return fail(format!("scenario [{}]: missing required key 'seed'", self.name));
        };
        let spec = ExperimentSpec {
            name: self.name,
            family,
            x1: self.x1,
            a: self.a,
            b: self.b,
            theta: self.theta,
            sigma: self.sigma,
            n_list: self.n_list,
            n1,
            reps,
            seed,
            levels: self.levels,
            ladder_n1: self.ladder_n1,
            ladder_n2: self.ladder_n2,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(format!("scenario [{}]: {msg}", self.name)));
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return fail(format!("dose interval requires a < b, got [{}, {}]", self.a, self.b));
        }
        if self.a <= 0.0 {
            return fail(format!("dose lower bound a must be positive, got {}", self.a));
        }
        if self.x1 < self.a || self.x1 > self.b {
            return fail(format!("x1 = {} must lie in [{}, {}]", self.x1, self.a, self.b));
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return fail(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.theta <= 0.0 || self.theta >= 1.0 / self.a {
            return fail(format!("theta = {} must lie in (0, {})", self.theta, 1.0 / self.a));
        }
        if self.n_list.is_empty() {
            return fail("n list must not be empty".into());
        }
        for &n in &self.n_list {
            if n < 2 {
                return fail(format!("n must be at least 2, got {n}"));
            }
            if let N1Policy::Fixed(n1) = self.n1 {
                if n1 < 1 {
                    return fail("n1 must be >= 1".into());
                }
                if n1 >= n {
                    return fail("n1 must be < n".into());
                }
            }
        }
        if self.reps < 1 {
            return fail("reps must be >= 1".into());
        }
        if self.levels.is_empty() {
            return fail("levels must not be empty".into());
        }
        for &alpha in &self.levels {
            if !(alpha > 0.0 && alpha < 0.5) {
                return fail(format!("nominal level {alpha} must lie in (0, 0.5)"));
            }
        }
        if self.ladder_n1 < 1 || self.ladder_n2.iter().any(|&n2| n2 < 1) {
            return fail("ladder sizes must be >= 1".into());
        }
        Ok(())
    }
}

/// Parse a config file into its scenarios, in file order.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>> {
    let mut specs = Vec::new();
    let mut current: Option<PartialSpec> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(CliError::Config(format!("line {}: unterminated section header", lineno + 1)));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(CliError::Config(format!(
                    "line {}: section name must be nonempty alphanumeric/_/-, got '{name}'",
                    lineno + 1
                )));
            }
            if let Some(done) = current.take() {
                specs.push(done.finish()?);
            }
            current = Some(ExperimentSpec::with_defaults(name.to_string()));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(spec) = current.as_mut() else {
            return Err(CliError::Config(format!(
                "line {}: key '{key}' appears before any [scenario] section",
                lineno + 1
            )));
        };
        apply_key(spec, key, value, lineno + 1)?;
    }
    if let Some(done) = current.take() {
        specs.push(done.finish()?);
    }
    if specs.is_empty() {
        return Err(CliError::Config("config declares no scenarios".into()));
    }
    Ok(specs)
}

fn apply_key(spec: &mut PartialSpec, key: &str, value: &str, lineno: usize) -> Result<()> {
    let bad = |msg: String| Err(CliError::Config(format!("line {lineno}: {msg}")));
    match key {
        "model" => match ModelFamily::parse(value) {
            Some(family) => spec.family = Some(family),
            None => {
                return bad(format!(
                    "unknown model '{value}' (expected one of logistic_location, logistic_scale, exponential_location, exponential_scale)"
                ))
            }
        },
        "x1" => spec.x1 = parse_f64(value, key, lineno)?,
        "a" => spec.a = parse_f64(value, key, lineno)?,
        "b" => spec.b = parse_f64(value, key, lineno)?,
        "theta" => spec.theta = parse_f64(value, key, lineno)?,
        "sigma" => spec.sigma = parse_f64(value, key, lineno)?,
        "n" => spec.n_list = parse_list(value, key, lineno)?,
        "n1" => {
            spec.n1 = Some(if value == "optimal" {
                N1Policy::Optimal
            } else {
                N1Policy::Fixed(parse_usize(value, key, lineno)?)
            })
        }
        "reps" => spec.reps = Some(parse_usize(value, key, lineno)?),
        "seed" => {
            spec.seed = Some(
                value
                    .parse::<u64>()
                    .map_err(|_| CliError::Config(format!("line {lineno}: seed must be a u64, got '{value}'")))?,
            )
        }
        "levels" => {
            let mut levels = Vec::new();
            for part in value.split(',') {
                levels.push(parse_f64(part.trim(), key, lineno)?);
            }
            spec.levels = levels;
        }
        "ladder_n1" => spec.ladder_n1 = parse_usize(value, key, lineno)?,
        "ladder_n2" => spec.ladder_n2 = parse_list(value, key, lineno)?,
        other => return bad(format!("unknown key '{other}'")),
    }
    Ok(())
}

fn parse_f64(value: &str, key: &str, lineno: usize) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("line {lineno}: key '{key}' expects a number, got '{value}'")))
}

fn parse_usize(value: &str, key: &str, lineno: usize) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| CliError::Config(format!("line {lineno}: key '{key}' expects a positive integer, got '{value}'")))
}

fn parse_list(value: &str, key: &str, lineno: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in value.split(',') {
        out.push(parse_usize(part.trim(), key, lineno)?);
    }
    Ok(out)
}

/// Stable 64-bit hash of a scenario's canonical description, embedded in
/// every output file so artifacts can be traced to their settings.
pub fn spec_hash(spec: &ExperimentSpec) -> u64 {
    let canonical = format!(
        "name={};model={};x1={};a={};b={};theta={};sigma={};n={:?};n1={:?};reps={};seed={};levels={:?};ladder_n1={};ladder_n2={:?}",
        spec.name,
        spec.family.label(),
        spec.x1,
        spec.a,
        spec.b,
        spec.theta,
        spec.sigma,
        spec.n_list,
        spec.n1,
        spec.reps,
        spec.seed,
        spec.levels,
        spec.ladder_n1,
        spec.ladder_n2,
    );
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for byte in canonical.as_bytes() {
        h = twostage::rng::mix64(h ^ u64::from(*byte));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# comment
[t1]
model = logistic_location
n = 100, 200
n1 = 30
reps = 50
seed = 7

[t2]
model = exponential_scale
n = 60
n1 = optimal
reps = 10
seed = 8
levels = 0.05, 0.1
";

    #[test]
    fn parses_sections_with_defaults() {
        let specs = parse_config(GOOD).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].name, "t1");
        assert_eq!(specs[0].x1, 2.0);
        assert_eq!(specs[0].n_list, vec![100, 200]);
        assert_eq!(specs[0].n1, N1Policy::Fixed(30));
        assert_eq!(specs[1].n1, N1Policy::Optimal);
        assert_eq!(specs[1].levels, vec![0.05, 0.1]);
    }

    #[test]
    fn rejects_n1_not_below_n() {
        let text = "[x]\nmodel = logistic_location\nn = 30\nn1 = 30\nreps = 5\nseed = 1\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("n1 must be < n"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn rejects_unknown_keys_and_models() {
        let err = parse_config("[x]\nmodle = logistic_location\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        let err = parse_config("[x]\nmodel = logstic\n").unwrap_err();
        assert!(err.to_string().contains("unknown model"));
    }

    #[test]
    fn missing_required_keys_are_named() {
        let err = parse_config("[x]\nmodel = logistic_location\nn = 10\nn1 = 2\nreps = 5\n").unwrap_err();
        assert!(err.to_string().contains("'seed'"));
    }

    #[test]
    fn hash_tracks_content() {
        let specs = parse_config(GOOD).unwrap();
        assert_ne!(spec_hash(&specs[0]), spec_hash(&specs[1]));
        let again = parse_config(GOOD).unwrap();
        assert_eq!(spec_hash(&specs[0]), spec_hash(&again[0]));
    }

    #[test]
    fn overrides_apply() {
        let specs = parse_config(GOOD).unwrap();
        let o = Overrides { seed: Some(99), reps: Some(3), threads: None, dump_raw: false };
        let s = specs[0].apply(&o);
        assert_eq!(s.seed, 99);
        assert_eq!(s.reps, 3);
    }
}
