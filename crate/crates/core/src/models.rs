//! Dose-response mean-function families.
//!
//! All four families share one interface: the mean η(x, θ), its first and
//! second derivatives in θ, a closed-form stage-1 maximum likelihood estimate
//! from the stage-1 mean response, and the dose that maximizes the squared
//! derivative [η̇(x, θ)]² over a dose interval. Everything downstream (the
//! likelihood, the information measures, the adaptive design) is written
//! against this interface and never matches on the family again.
//!
//! The parameter is one-dimensional and restricted to a finite search
//! interval `[theta_lo, theta_hi]`; estimates falling outside are truncated
//! to the boundary, matching the piecewise estimator definitions of the
//! scale and location models.

use crate::error::{Error, Result};
use crate::numeric::optimize::grid_then_golden_max;

/// The four mean-function families.
///
/// * `LogisticLocation`:    η = (1 + e^{x-θ})⁻¹
/// * `LogisticScale`:       η = (1 + e^{θx})⁻¹
/// * `ExponentialLocation`: η = e^{-x+θ}
/// * `ExponentialScale`:    η = e^{-θx}
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    LogisticLocation,
    LogisticScale,
    ExponentialLocation,
    ExponentialScale,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::LogisticLocation,
        ModelFamily::LogisticScale,
        ModelFamily::ExponentialLocation,
        ModelFamily::ExponentialScale,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelFamily::LogisticLocation => "logistic_location",
            ModelFamily::LogisticScale => "logistic_scale",
            ModelFamily::ExponentialLocation => "exponential_location",
            ModelFamily::ExponentialScale => "exponential_scale",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.label() == s)
    }
}

/// A dose interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoseInterval {
    pub a: f64,
    pub b: f64,
}

impl DoseInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidConfig(format!(
                "dose interval requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.min(self.b).max(self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

/// A mean-function family together with its parameter search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanModel {
    pub family: ModelFamily,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

/// Grid size seeding the logistic-scale dose maximization.
const DOSE_GRID: usize = 64;
/// Absolute tolerance of the numeric dose maximization.
const DOSE_TOL: f64 = 1e-8;

impl MeanModel {
    pub fn new(family: ModelFamily, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !(theta_lo.is_finite() && theta_hi.is_finite() && theta_lo < theta_hi) {
            return Err(Error::InvalidConfig(format!(
                "parameter interval requires finite theta_lo < theta_hi, got [{theta_lo}, {theta_hi}]"
            )));
        }
        Ok(Self { family, theta_lo, theta_hi })
    }

    /// The conventional truncation θ ∈ (0, 1/a) tied to a dose interval.
    /// Requires `a > 0` so the upper bound is finite.
    pub fn for_interval(family: ModelFamily, interval: DoseInterval) -> Result<Self> {
        if interval.a <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dose lower bound must be positive to form the parameter interval (0, 1/a], got a = {}",
                interval.a
            )));
        }
        Self::new(family, 0.0, 1.0 / interval.a)
    }

    /// Mean response η(x, θ).
    pub fn eta(&self, x: f64, theta: f64) -> f64 {
        match self.family {
            ModelFamily::LogisticLocation => 1.0 / (1.0 + (x - theta).exp()),
            ModelFamily::LogisticScale => 1.0 / (1.0 + (theta * x).exp()),
            ModelFamily::ExponentialLocation => (theta - x).exp(),
            ModelFamily::ExponentialScale => (-theta * x).exp(),
        }
    }

    /// First derivative η̇ = dη/dθ.
    pub fn deta(&self, x: f64, theta: f64) -> f64 {
        match self.family {
            ModelFamily::LogisticLocation => {
                let e = (x - theta).exp();
                let d = 1.0 + e;
                e / (d * d)
            }
            ModelFamily::LogisticScale => {
                let e = (theta * x).exp();
                let d = 1.0 + e;
                -x * e / (d * d)
            }
            ModelFamily::ExponentialLocation => (theta - x).exp(),
            ModelFamily::ExponentialScale => -x * (-theta * x).exp(),
        }
    }

    /// Second derivative η̈ = d²η/dθ².
    pub fn ddeta(&self, x: f64, theta: f64) -> f64 {
        match self.family {
            ModelFamily::LogisticLocation => {
                let e = (x - theta).exp();
                let d = 1.0 + e;
                e * (e - 1.0) / (d * d * d)
            }
            ModelFamily::LogisticScale => {
                let e = (theta * x).exp();
                let d = 1.0 + e;
                x * x * e * (e - 1.0) / (d * d * d)
            }
            ModelFamily::ExponentialLocation => (theta - x).exp(),
            ModelFamily::ExponentialScale => x * x * (-theta * x).exp(),
        }
    }

    /// Stage-1 maximum likelihood estimate from the stage-1 mean response.
    ///
    /// Each family inverts η(x₁, ·) in closed form; mean responses outside
    /// the attainable range are mapped to the nearer truncation boundary, so
    /// the result always lies in `[theta_lo, theta_hi]` and no input raises
    /// an error.
    pub fn stage1_mle(&self, x1: f64, ybar1: f64) -> f64 {
        let raw = match self.family {
            // η increasing in θ; η = y  <=>  θ = x₁ + logit(y).
            ModelFamily::LogisticLocation => {
                if ybar1 <= 0.0 {
                    f64::NEG_INFINITY
                } else if ybar1 >= 1.0 {
                    f64::INFINITY
                } else {
                    x1 + logit(ybar1)
                }
            }
            // η decreasing in θ; θ = -logit(y) / x₁.
            ModelFamily::LogisticScale => {
                if ybar1 <= 0.0 {
                    f64::INFINITY
                } else if ybar1 >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    -logit(ybar1) / x1
                }
            }
            // η increasing in θ; θ = x₁ + log y.
            ModelFamily::ExponentialLocation => {
                if ybar1 <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x1 + ybar1.ln()
                }
            }
            // η decreasing in θ; θ = -log y / x₁.
            ModelFamily::ExponentialScale => {
                if ybar1 <= 0.0 {
                    f64::INFINITY
                } else {
                    -ybar1.ln() / x1
                }
            }
        };
        raw.min(self.theta_hi).max(self.theta_lo)
    }

    /// The dose maximizing [η̇(x, θ)]² over `interval`.
    ///
    /// Closed form except for the logistic-scale family, whose stationarity
    /// condition has no analytic solution; there a coarse grid scan seeds a
    /// golden-section refinement. Ties resolve to the smallest dose.
    pub fn optimal_dose(&self, theta: f64, interval: DoseInterval) -> f64 {
        match self.family {
            ModelFamily::LogisticLocation => interval.clamp(theta),
            ModelFamily::ExponentialLocation => interval.a,
            ModelFamily::ExponentialScale => {
                if theta <= 0.0 {
                    interval.b
                } else {
                    interval.clamp(1.0 / theta)
                }
            }
            ModelFamily::LogisticScale => {
                let objective = |x: f64| {
                    let d = self.deta(x, theta);
                    d * d
                };
                let (x, _) = grid_then_golden_max(objective, interval.a, interval.b, DOSE_GRID, DOSE_TOL);
                x
            }
        }
    }
}

#[inline]
fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
