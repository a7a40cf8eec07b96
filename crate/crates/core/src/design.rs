//! The adaptive design: second-stage dose selection, the design's expected
//! (Fisher) information, and the locally optimal stage-1 sample size.
//!
//! The second-stage dose is x̂₂ = clamp(x₂*(θ̂_{n₁}), a, b), where θ̂_{n₁} is
//! the closed-form stage-1 estimate and x₂*(θ) maximizes [η̇(x, θ)]². The
//! Fisher information of the design averages the stage-2 information over
//! the distribution of x̂₂ under ȳ₁ ~ N(η(x₁, θ), σ²/n₁):
//!
//! ```text
//! i(ξ_A, θ) = n₁ η̇(x₁,θ)²/σ²
//!           + n₂/σ² · { π_a η̇(a,θ)² + π_b η̇(b,θ)² + E[η̇(x̂₂,θ)² ; x̂₂ interior] }
//! ```
//!
//! Both the stage-1 truncation and the dose clamping are monotone in ȳ₁, so
//! the sample space of ȳ₁ splits at exact thresholds into boundary regions
//! (with closed-form normal masses), point atoms of θ̂_{n₁} whose dose falls
//! strictly inside (a, b), and a smooth interior segment handled by
//! Gauss-Legendre quadrature with the normal density weight explicit.
//! Splitting at the thresholds keeps kinks out of the integrand.

use crate::error::{Error, Result};
use crate::models::{DoseInterval, MeanModel, ModelFamily};
use crate::numeric::optimize::bisect_switch;
use crate::numeric::quadrature::GaussLegendre;
use crate::numeric::special::{normal_cdf, normal_pdf};

/// Stage-1 allocation: an explicit size or the locally optimal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum N1Policy {
    Fixed(usize),
    Optimal,
}

/// Settings of one two-stage design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    pub x1: f64,
    pub interval: DoseInterval,
    pub n1: N1Policy,
    pub n: usize,
    pub sigma: f64,
    pub theta_true: f64,
}

impl DesignConfig {
    pub fn validate(&self, model: &MeanModel) -> Result<()> {
        if !self.interval.contains(self.x1) {
            return Err(Error::InvalidConfig(format!(
                "x1 = {} must lie in the dose interval [{}, {}]",
                self.x1, self.interval.a, self.interval.b
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        if let N1Policy::Fixed(n1) = self.n1 {
            if n1 < 1 {
                return Err(Error::InvalidConfig("n1 must be >= 1".into()));
            }
            if n1 >= self.n {
                return Err(Error::InvalidConfig("n1 must be < n".into()));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.theta_true < model.theta_lo || self.theta_true > model.theta_hi {
            return Err(Error::InvalidConfig(format!(
                "theta_true = {} outside the parameter interval [{}, {}]",
                self.theta_true, model.theta_lo, model.theta_hi
            )));
        }
        Ok(())
    }
}

/// The realized second-stage dose for a stage-1 mean response.
pub fn adaptive_dose(model: &MeanModel, x1: f64, ybar1: f64, interval: DoseInterval) -> f64 {
    let theta1 = model.stage1_mle(x1, ybar1);
    interval.clamp(model.optimal_dose(theta1, interval))
}

/// Decomposition of the design Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherBreakdown {
    /// Total information n·(average per-subject information), i(ξ_A, θ).
    pub total: f64,
    /// Probability that x̂₂ = a.
    pub boundary_a_mass: f64,
    /// Probability that x̂₂ = b.
    pub boundary_b_mass: f64,
    /// E[η̇(x̂₂, θ)²; x̂₂ strictly inside (a, b)], including any point atoms
    /// of θ̂_{n₁} whose dose is interior.
    pub interior_integral: f64,
    /// Probability that x̂₂ is strictly inside (a, b), with the smooth part
    /// evaluated by the same quadrature rule as the integral.
    pub interior_mass: f64,
}

/// Default quadrature size for the interior segment.
pub const FISHER_NODES: usize = 201;
/// Relative accuracy demanded of the quadrature.
const FISHER_REL_TOL: f64 = 1e-6;
/// Standardized ȳ₁ beyond this contributes less than 1e-16 of mass.
const Z_CLIP: f64 = 8.5;

#[derive(Debug, Clone, Copy, PartialEq)]
enum SegmentKind {
    BoundaryA,
    BoundaryB,
    Interior,
}

/// θ̂-intervals, ascending, on which the clamped optimal dose sits at a, at
/// b, or strictly between. Zero-width segments at the truncation boundaries
/// carry the corresponding point atom.
fn dose_segments(model: &MeanModel, interval: DoseInterval) -> Vec<(SegmentKind, f64, f64)> {
    let (lo, hi) = (model.theta_lo, model.theta_hi);
    let (a, b) = (interval.a, interval.b);
    let mut segs = Vec::new();
    let mut push = |kind, from: f64, to: f64| {
        if from <= to {
            segs.push((kind, from, to));
        }
    };
    match model.family {
        // x₂*(θ) = θ: dose a for θ <= a, dose b for θ >= b.
        ModelFamily::LogisticLocation => {
            if a >= lo {
                push(SegmentKind::BoundaryA, lo, a.min(hi));
            }
            if a.max(lo) < b.min(hi) {
                push(SegmentKind::Interior, a.max(lo), b.min(hi));
            }
            if b <= hi {
                push(SegmentKind::BoundaryB, b.max(lo), hi);
            }
        }
        // The squared derivative decreases in x, so the dose is always a.
        ModelFamily::ExponentialLocation => push(SegmentKind::BoundaryA, lo, hi),
        // x₂*(θ) = 1/θ: dose b for θ <= 1/b, dose a for θ >= 1/a.
        ModelFamily::ExponentialScale => {
            let (tb, ta) = (1.0 / b, 1.0 / a);
            if tb >= lo {
                push(SegmentKind::BoundaryB, lo, tb.min(hi));
            }
            if tb.max(lo) < ta.min(hi) {
                push(SegmentKind::Interior, tb.max(lo), ta.min(hi));
            }
            if ta <= hi {
                push(SegmentKind::BoundaryA, ta.max(lo), hi);
            }
        }
        // No closed form; the dose map is decreasing in θ, so locate where
        // the clamp disengages by bisection on the numeric maximizer.
        ModelFamily::LogisticScale => {
            let h = |t: f64| model.optimal_dose(t, interval);
            let tol = 1e-11 * (hi - lo);
            let tb = if h(lo) < b {
                lo
            } else if h(hi) >= b {
                hi
            } else {
                bisect_switch(|t| h(t) < b, lo, hi, tol)
            };
            let ta = if h(hi) > a {
                hi
            } else if h(lo) <= a {
                lo
            } else {
                bisect_switch(|t| h(t) <= a, lo, hi, tol)
            };
            if tb > lo || h(lo) == b {
                push(SegmentKind::BoundaryB, lo, tb);
            }
            if tb < ta {
                push(SegmentKind::Interior, tb, ta);
            }
            if ta < hi || h(hi) == a {
                push(SegmentKind::BoundaryA, ta, hi);
            }
        }
    }
    segs
}

/// Design Fisher information for explicit stage sizes.
///
/// `n2 = 0` is allowed and reduces to the stage-1 information, which is the
/// natural limiting check. Fails if two quadrature resolutions disagree
/// beyond the relative tolerance.
#[allow(clippy::too_many_arguments)]
pub fn fisher_info_with_nodes(
    model: &MeanModel,
    x1: f64,
    interval: DoseInterval,
    n1: usize,
    n2: usize,
    sigma: f64,
    theta: f64,
    nodes: usize,
) -> Result<FisherBreakdown> {
    assert!(n1 >= 1, "stage 1 needs at least one subject");
    let rule = GaussLegendre::new(nodes);
    let rule_check = GaussLegendre::new(nodes / 2 + 1);
    let s2 = sigma * sigma;
    let mu = model.eta(x1, theta);
    let sd = sigma / (n1 as f64).sqrt();

    // P(θ̂_{n₁} <= c) through the ȳ₁ threshold η(x₁, c); the truncation makes
    // the map total, and atoms at the parameter bounds come along for free.
    let increasing = matches!(
        model.family,
        ModelFamily::LogisticLocation | ModelFamily::ExponentialLocation
    );
    let cum_at = |c: f64| -> f64 {
        let z = (model.eta(x1, c) - mu) / sd;
        if increasing {
            normal_cdf(z)
        } else {
            1.0 - normal_cdf(z)
        }
    };

    let deta_sq = |x: f64| model.deta(x, theta).powi(2);
    let segs = dose_segments(model, interval);
    debug_assert!(!segs.is_empty());

    let mut cum = 0.0;
    let mut pi_a = 0.0;
    let mut pi_b = 0.0;
    let mut boundary_expect = 0.0;
    let mut interior_expect = 0.0;
    let mut interior_mass = 0.0;
    let mut smooth = 0.0;
    let mut smooth_check = 0.0;

    for (idx, &(kind, t_from, t_to)) in segs.iter().enumerate() {
        let first = idx == 0;
        let last = idx + 1 == segs.len();
        let cum_end = if last { 1.0 } else { cum_at(t_to) };
        let mass = (cum_end - cum).max(0.0);
        match kind {
            SegmentKind::BoundaryA => {
                pi_a += mass;
                boundary_expect += mass * deta_sq(interval.a);
            }
            SegmentKind::BoundaryB => {
                pi_b += mass;
                boundary_expect += mass * deta_sq(interval.b);
            }
            SegmentKind::Interior => {
                // Point atoms of the truncated stage-1 estimate sit beyond
                // the ȳ₁ thresholds of the parameter bounds; they only reach
                // this segment when their dose is interior.
                if first {
                    let atom_lo = cum_at(model.theta_lo);
                    interior_expect += atom_lo * deta_sq(model.optimal_dose(model.theta_lo, interval));
                    interior_mass += atom_lo;
                }
                if last {
                    let atom_hi = 1.0 - cum_at(model.theta_hi);
                    interior_expect += atom_hi * deta_sq(model.optimal_dose(model.theta_hi, interval));
                    interior_mass += atom_hi;
                }
                let piece = interior_expect_piece(
                    model, x1, interval, theta, mu, sd, t_from, t_to, &rule, &mut interior_mass,
                );
                let mut scratch = 0.0;
                smooth_check += interior_expect_piece(
                    model, x1, interval, theta, mu, sd, t_from, t_to, &rule_check, &mut scratch,
                );
                smooth += piece;
                interior_expect += piece;
            }
        }
        cum = cum_end;
    }

    let stage1 = n1 as f64 * deta_sq(x1) / s2;
    let stage2_expect = boundary_expect + interior_expect;
    let total = stage1 + n2 as f64 * stage2_expect / s2;

    // Two quadrature resolutions must agree on the smooth part.
    let scale = total.abs().max(1e-300);
    let estimate = (smooth - smooth_check).abs() * n2.max(1) as f64 / s2 / scale;
    if estimate > FISHER_REL_TOL {
        return Err(Error::QuadratureTolerance { tol: FISHER_REL_TOL, estimate });
    }

    Ok(FisherBreakdown {
        total,
        boundary_a_mass: pi_a,
        boundary_b_mass: pi_b,
        interior_integral: interior_expect,
        interior_mass,
    })
}

/// Smooth interior contribution over the open θ̂-interval `(t_from, t_to)`.
#[allow(clippy::too_many_arguments)]
fn interior_expect_piece(
    model: &MeanModel,
    x1: f64,
    interval: DoseInterval,
    theta: f64,
    mu: f64,
    sd: f64,
    t_from: f64,
    t_to: f64,
    rule: &GaussLegendre,
    mass_acc: &mut f64,
) -> f64 {
    let y_from = model.eta(x1, t_from);
    let y_to = model.eta(x1, t_to);
    let (y_lo, y_hi) = if y_from <= y_to { (y_from, y_to) } else { (y_to, y_from) };
    let z_lo = ((y_lo - mu) / sd).max(-Z_CLIP);
    let z_hi = ((y_hi - mu) / sd).min(Z_CLIP);
    if z_lo >= z_hi {
        return 0.0;
    }
    *mass_acc += rule.integrate(z_lo, z_hi, normal_pdf);
    rule.integrate(z_lo, z_hi, |z| {
        let ybar = mu + sd * z;
        let dose = adaptive_dose(model, x1, ybar, interval);
        model.deta(dose, theta).powi(2) * normal_pdf(z)
    })
}

/// Design Fisher information at the config's stage sizes.
pub fn design_fisher_info(model: &MeanModel, config: &DesignConfig, n1: usize, theta: f64) -> Result<FisherBreakdown> {
    fisher_info_with_nodes(
        model,
        config.x1,
        config.interval,
        n1,
        config.n.saturating_sub(n1),
        config.sigma,
        theta,
        FISHER_NODES,
    )
}

/// Result of the exhaustive stage-1 size search.
#[derive(Debug, Clone)]
pub struct N1Search {
    pub n1_star: usize,
    /// Total information at every candidate, for audit and trace output.
    pub trace: Vec<(usize, f64)>,
}

/// Locally optimal stage-1 sample size: the argmax of the design information
/// over n₁ ∈ {1, …, n−1}, evaluated at `theta` (normally the true value).
///
/// n₁ = n is excluded since it leaves no adaptive stage. Ties resolve to the
/// smallest n₁, so the result does not depend on evaluation order.
pub fn optimal_n1(model: &MeanModel, config: &DesignConfig, theta: f64, nodes: usize) -> Result<N1Search> {
    let mut trace = Vec::with_capacity(config.n - 1);
    let mut best_n1 = 1usize;
    let mut best = f64::NEG_INFINITY;
    for n1 in 1..config.n {
        let info = fisher_info_with_nodes(
            model,
            config.x1,
            config.interval,
            n1,
            config.n - n1,
            config.sigma,
            theta,
            nodes,
        )?;
        trace.push((n1, info.total));
        if info.total > best {
            best = info.total;
            best_n1 = n1;
        }
    }
    Ok(N1Search { n1_star: best_n1, trace })
}
