//! Two-stage log-likelihood, score, and full-data maximum likelihood.
//!
//! With independent normal errors the data enter the likelihood only through
//! the stage mean responses, so the proportional log-likelihood is
//!
//! ```text
//! ℓ(θ) = -(n₁ / 2σ²) [ȳ₁ - η(x₁, θ)]² - (n₂ / 2σ²) [ȳ₂ - η(x₂, θ)]²
//! ```
//!
//! with additive constants dropped, and the score is
//!
//! ```text
//! S(θ) = (n₁/σ²) [ȳ₁ - η(x₁, θ)] η̇(x₁, θ) + (n₂/σ²) [ȳ₂ - η(x₂, θ)] η̇(x₂, θ).
//! ```
//!
//! The full-data MLE maximizes ℓ over the truncated parameter interval. The
//! sum of the two stage terms can be multimodal in θ, so the maximizer
//! brackets the global maximum on a uniform grid before refining with
//! golden-section search.

use crate::error::{Error, Result};
use crate::models::MeanModel;
use crate::numeric::optimize::golden_max;
use crate::numeric::sum::pairwise_mean;

/// Responses from both stages of one experiment, with the realized
/// second-stage dose.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageSample {
    x1: f64,
    x2: f64,
    y1: Vec<f64>,
    y2: Vec<f64>,
    ybar1: f64,
    ybar2: f64,
    sigma: f64,
}

impl TwoStageSample {
    pub fn new(x1: f64, x2: f64, y1: Vec<f64>, y2: Vec<f64>, sigma: f64) -> Result<Self> {
        if y1.is_empty() || y2.is_empty() {
            return Err(Error::InvalidConfig(
                "each stage needs at least one response".into(),
            ));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
        }
        let ybar1 = pairwise_mean(&y1);
        let ybar2 = pairwise_mean(&y2);
        Ok(Self { x1, x2, y1, y2, ybar1, ybar2, sigma })
    }

    /// Build a sample directly from stage summaries. Useful when per-subject
    /// responses are irrelevant; the stage means are replicated uniformly and
    /// stored exactly, with no recomputation round-off.
    pub fn from_means(x1: f64, x2: f64, ybar1: f64, n1: usize, ybar2: f64, n2: usize, sigma: f64) -> Result<Self> {
        let mut sample = Self::new(x1, x2, vec![ybar1; n1], vec![ybar2; n2], sigma)?;
        sample.ybar1 = ybar1;
        sample.ybar2 = ybar2;
        Ok(sample)
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn y1(&self) -> &[f64] {
        &self.y1
    }
    pub fn y2(&self) -> &[f64] {
        &self.y2
    }
    pub fn n1(&self) -> usize {
        self.y1.len()
    }
    pub fn n2(&self) -> usize {
        self.y2.len()
    }
    pub fn n(&self) -> usize {
        self.y1.len() + self.y2.len()
    }
    pub fn ybar1(&self) -> f64 {
        self.ybar1
    }
    pub fn ybar2(&self) -> f64 {
        self.ybar2
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Proportional two-stage log-likelihood at θ.
pub fn log_likelihood(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s2 = sample.sigma * sample.sigma;
    let r1 = sample.ybar1 - model.eta(sample.x1, theta);
    let r2 = sample.ybar2 - model.eta(sample.x2, theta);
    -(sample.n1() as f64) / (2.0 * s2) * r1 * r1 - (sample.n2() as f64) / (2.0 * s2) * r2 * r2
}

/// Score function S(θ) = dℓ/dθ.
pub fn score(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s2 = sample.sigma * sample.sigma;
    let r1 = sample.ybar1 - model.eta(sample.x1, theta);
    let r2 = sample.ybar2 - model.eta(sample.x2, theta);
    sample.n1() as f64 / s2 * r1 * model.deta(sample.x1, theta)
        + sample.n2() as f64 / s2 * r2 * model.deta(sample.x2, theta)
}

/// Grid size used to bracket the global maximum before refinement.
const MLE_GRID: usize = 512;
/// Absolute tolerance of the golden-section refinement.
const MLE_TOL: f64 = 1e-8;

/// Full-data maximum likelihood estimate over `[theta_lo, theta_hi]`.
///
/// A 512-point uniform grid brackets the global maximum, golden-section
/// search refines it, and the truncation boundaries are always among the
/// candidates, so a boundary solution is returned exactly. Flat stretches
/// resolve to the smallest maximizing θ.
pub fn full_mle(model: &MeanModel, sample: &TwoStageSample) -> f64 {
    let (lo, hi) = (model.theta_lo, model.theta_hi);
    let objective = |theta: f64| log_likelihood(model, sample, theta);

    let step = (hi - lo) / (MLE_GRID - 1) as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..MLE_GRID {
        let theta = if i + 1 == MLE_GRID { hi } else { lo + i as f64 * step };
        let v = objective(theta);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let bracket_lo = if best_i == 0 { lo } else { lo + (best_i - 1) as f64 * step };
    let bracket_hi = if best_i + 1 >= MLE_GRID { hi } else { lo + (best_i + 1) as f64 * step };
    let (mut theta_hat, mut value) = golden_max(objective, bracket_lo, bracket_hi.min(hi), MLE_TOL);

    // Interior solutions get a safeguarded Newton polish on the score, which
    // takes the golden-section tolerance down to machine precision. Matters
    // when sigma is tiny and the normings blow residual argument error up.
    if theta_hat > lo && theta_hat < hi {
        let mut x = theta_hat;
        let mut s_abs = score(model, sample, x).abs();
        for _ in 0..8 {
            let s = score(model, sample, x);
            let curv = score_derivative(model, sample, x);
            // Newton needs local concavity of the log-likelihood.
            if curv.is_nan() || curv >= 0.0 {
                break;
            }
            let next = (x - s / curv).clamp(bracket_lo, bracket_hi.min(hi));
            let next_abs = score(model, sample, next).abs();
            if next_abs >= s_abs || !next.is_finite() {
                break;
            }
            x = next;
            s_abs = next_abs;
        }
        let polished = objective(x);
        if polished >= value {
            theta_hat = x;
            value = polished;
        }
    }

    // Keep exact boundary hits distinguishable from near-boundary interior
    // solutions.
    let at_lo = objective(lo);
    let at_hi = objective(hi);
    let mut arg = theta_hat;
    let mut val = value;
    if at_hi > val {
        arg = hi;
        val = at_hi;
    }
    if at_lo >= val {
        arg = lo;
    }
    arg
}

/// dS/dθ, the negative observed information, from the model derivatives.
fn score_derivative(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s2 = sample.sigma * sample.sigma;
    let stage = |n: f64, x: f64, ybar: f64| {
        let r = ybar - model.eta(x, theta);
        n / s2 * (r * model.ddeta(x, theta) - model.deta(x, theta).powi(2))
    };
    stage(sample.n1() as f64, sample.x1, sample.ybar1)
        + stage(sample.n2() as f64, sample.x2, sample.ybar2)
}
