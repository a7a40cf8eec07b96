//! Random information measures for the two-stage design.
//!
//! Four data-dependent normings of the MLE are computed from a sample at a
//! caller-supplied parameter value, alongside the deterministic expected
//! (Fisher) information handled by the design module:
//!
//! * observed information j(θ), the negative derivative of the score;
//! * subject-wise incremental observed information J^𝒟(θ), the sum of
//!   squared subject-level score increments (the quadratic variation of the
//!   score martingale);
//! * stage-wise incremental observed information J^D(θ), the same sum taken
//!   over the two stage-level increments;
//! * incremental expected information I(θ), the sum of conditional
//!   expectations of the squared increments (the quadratic characteristic),
//!   identical whether the increments are taken per subject or per stage.
//!
//! The caller decides where to evaluate: the random norms at the full-data
//! MLE, or anything else. The limiting scale these norms recover is
//! U⁻² = [η̇(x₂, θ)]²/σ².

use crate::likelihood::TwoStageSample;
use crate::models::MeanModel;
use crate::numeric::sum::pairwise_sum;

/// The five information measures used to normalize the MLE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InfoMeasureKind {
    /// Expected (Fisher) information of the adaptive design, i(ξ_A, θ).
    ExpectedFisher,
    /// Observed information j(θ).
    Observed,
    /// Subject-wise incremental observed information J^𝒟(θ).
    IncrementalObservedSubject,
    /// Stage-wise incremental observed information J^D(θ). Converges to a
    /// chi-squared mixture rather than U⁻², so it does not normalize the MLE;
    /// it is carried as a diagnostic.
    IncrementalObservedStage,
    /// Incremental expected information I^𝒟(θ) = I^D(θ).
    IncrementalExpected,
}

impl InfoMeasureKind {
    pub const ALL: [InfoMeasureKind; 5] = [
        InfoMeasureKind::ExpectedFisher,
        InfoMeasureKind::Observed,
        InfoMeasureKind::IncrementalObservedSubject,
        InfoMeasureKind::IncrementalObservedStage,
        InfoMeasureKind::IncrementalExpected,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InfoMeasureKind::ExpectedFisher => "expected_fisher",
            InfoMeasureKind::Observed => "observed",
            InfoMeasureKind::IncrementalObservedSubject => "incremental_observed_subject",
            InfoMeasureKind::IncrementalObservedStage => "incremental_observed_stage",
            InfoMeasureKind::IncrementalExpected => "incremental_expected",
        }
    }

    /// Whether the measure yields a standard normal limit for the normalized
    /// MLE. False only for the stage-wise incremental observed information.
    pub fn normalizing(self) -> bool {
        !matches!(self, InfoMeasureKind::IncrementalObservedStage)
    }

    fn index(self) -> usize {
        match self {
            InfoMeasureKind::ExpectedFisher => 0,
            InfoMeasureKind::Observed => 1,
            InfoMeasureKind::IncrementalObservedSubject => 2,
            InfoMeasureKind::IncrementalObservedStage => 3,
            InfoMeasureKind::IncrementalExpected => 4,
        }
    }
}

/// A value per information measure, indexable by [`InfoMeasureKind`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureMap<T>([T; 5]);

impl<T: Copy> MeasureMap<T> {
    pub fn filled(value: T) -> Self {
        Self([value; 5])
    }

    pub fn set(&mut self, kind: InfoMeasureKind, value: T) {
        self.0[kind.index()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (InfoMeasureKind, T)> + '_ {
        InfoMeasureKind::ALL.iter().map(|&k| (k, self.0[k.index()]))
    }
}

impl<T> std::ops::Index<InfoMeasureKind> for MeasureMap<T> {
    type Output = T;
    fn index(&self, kind: InfoMeasureKind) -> &T {
        &self.0[kind.index()]
    }
}

/// Observed information
/// j(θ) = Σᵢ (nᵢ/σ²) η̇ᵢ² - (nᵢ/σ²) [ȳᵢ - ηᵢ] η̈ᵢ, evaluated at (xᵢ, θ).
///
/// The residual correction terms can push the value negative in small
/// samples; callers treating j as a norm must handle that case.
pub fn observed_info(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s2 = sample.sigma() * sample.sigma();
    let (n1, n2) = (sample.n1() as f64, sample.n2() as f64);
    let d1 = model.deta(sample.x1(), theta);
    let d2 = model.deta(sample.x2(), theta);
    let r1 = sample.ybar1() - model.eta(sample.x1(), theta);
    let r2 = sample.ybar2() - model.eta(sample.x2(), theta);
    n1 / s2 * d1 * d1 - n1 / s2 * r1 * model.ddeta(sample.x1(), theta) + n2 / s2 * d2 * d2
        - n2 / s2 * r2 * model.ddeta(sample.x2(), theta)
}

/// Subject-wise incremental observed information
/// J^𝒟(θ) = Σᵢ [yᵢ - η]² η̇² / σ⁴, summed over every subject in both stages.
pub fn incremental_observed_subject(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s4 = (sample.sigma() * sample.sigma()).powi(2);
    let stage = |x: f64, ys: &[f64]| {
        let eta = model.eta(x, theta);
        let d2 = model.deta(x, theta).powi(2);
        let terms: Vec<f64> = ys.iter().map(|y| (y - eta) * (y - eta) * d2).collect();
        pairwise_sum(&terms)
    };
    (stage(sample.x1(), sample.y1()) + stage(sample.x2(), sample.y2())) / s4
}

/// Stage-wise incremental observed information
/// J^D(θ) = n₁² [ȳ₁ - η₁]² η̇₁²/σ⁴ + n₂² [ȳ₂ - η₂]² η̇₂²/σ⁴.
pub fn incremental_observed_stage(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s4 = (sample.sigma() * sample.sigma()).powi(2);
    let (n1, n2) = (sample.n1() as f64, sample.n2() as f64);
    let r1 = sample.ybar1() - model.eta(sample.x1(), theta);
    let r2 = sample.ybar2() - model.eta(sample.x2(), theta);
    let d1 = model.deta(sample.x1(), theta);
    let d2 = model.deta(sample.x2(), theta);
    (n1 * n1 * r1 * r1 * d1 * d1 + n2 * n2 * r2 * r2 * d2 * d2) / s4
}

/// Incremental expected information
/// I^𝒟(θ) = I^D(θ) = (n₁/σ²) η̇₁² + (n₂/σ²) η̇₂².
///
/// The subject-wise and stage-wise decompositions collapse to the same
/// closed form because every subject in a stage shares its dose; the test
/// suite evaluates both accumulation paths to confirm.
pub fn incremental_expected_info(model: &MeanModel, sample: &TwoStageSample, theta: f64) -> f64 {
    let s2 = sample.sigma() * sample.sigma();
    let d1 = model.deta(sample.x1(), theta);
    let d2 = model.deta(sample.x2(), theta);
    sample.n1() as f64 / s2 * d1 * d1 + sample.n2() as f64 / s2 * d2 * d2
}

/// The limiting scale U⁻² = [η̇(x₂, θ)]²/σ² that the random norms recover
/// per unit of sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitScale {
    pub u_inv_sq: f64,
    /// Set when η̇(x₂, θ) = 0, where the limit theory does not apply. The
    /// value is still reported.
    pub degenerate: bool,
}

pub fn limit_scale(model: &MeanModel, x2: f64, theta: f64, sigma: f64) -> LimitScale {
    let d = model.deta(x2, theta);
    LimitScale { u_inv_sq: d * d / (sigma * sigma), degenerate: d == 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{score, TwoStageSample};
    use crate::models::{DoseInterval, MeanModel, ModelFamily};
    use crate::numeric::sum::compensated_sum;
    use crate::rng::CounterRng;

    const INTERVAL: DoseInterval = DoseInterval { a: 0.25, b: 4.0 };

    fn model(family: ModelFamily) -> MeanModel {
        MeanModel::for_interval(family, INTERVAL).unwrap()
    }

    fn random_sample(m: &MeanModel, rng: &mut CounterRng, n1: usize, n2: usize) -> TwoStageSample {
        let theta = rng.next_range(0.3, 3.5);
        let x1 = rng.next_range(INTERVAL.a, INTERVAL.b);
        let x2 = rng.next_range(INTERVAL.a, INTERVAL.b);
        let y1: Vec<f64> = (0..n1).map(|_| rng.next_normal(m.eta(x1, theta), 0.5)).collect();
        let y2: Vec<f64> = (0..n2).map(|_| rng.next_normal(m.eta(x2, theta), 0.5)).collect();
        TwoStageSample::new(x1, x2, y1, y2, 0.5).unwrap()
    }

    #[test]
    fn zero_residuals_collapse_observed_to_incremental_expected() {
        for family in ModelFamily::ALL {
            let m = model(family);
            let theta = 1.2;
            let s = TwoStageSample::from_means(2.0, 0.7, m.eta(2.0, theta), 4, m.eta(0.7, theta), 9, 0.5).unwrap();
            let j = observed_info(&m, &s, theta);
            let i = incremental_expected_info(&m, &s, theta);
            assert!((j - i).abs() <= 1e-14 * (1.0 + i.abs()));
            assert_eq!(incremental_observed_subject(&m, &s, theta), 0.0);
            assert_eq!(incremental_observed_stage(&m, &s, theta), 0.0);
        }
    }

    #[test]
    fn observed_matches_negative_score_derivative() {
        let h = 1e-6;
        for family in ModelFamily::ALL {
            let m = model(family);
            let mut rng = CounterRng::new(610 + family as u64);
            for _ in 0..1000 {
                let s = random_sample(&m, &mut rng, 3, 5);
                let theta = rng.next_range(0.05, 3.95);
                let fd = -(score(&m, &s, theta + h) - score(&m, &s, theta - h)) / (2.0 * h);
                let j = observed_info(&m, &s, theta);
                assert!(
                    (j - fd).abs() <= 1e-5 * (1.0 + j.abs()),
                    "{}: observed {j} vs -dS/dθ {fd}",
                    family.label()
                );
            }
        }
    }

    #[test]
    fn exponential_location_observed_by_symbolic_substitution() {
        // For η = η̇ = η̈ = e^{θ-x}: j = Σ (nᵢ/σ²) ηᵢ (ηᵢ - ȳᵢ + ηᵢ).
        let m = model(ModelFamily::ExponentialLocation);
        let s = TwoStageSample::from_means(2.0, 0.25, 0.37, 6, 2.1, 11, 0.5).unwrap();
        let theta = 0.9;
        let e1 = (theta - 2.0f64).exp();
        let e2 = (theta - 0.25f64).exp();
        let expect = 6.0 / 0.25 * (e1 * e1 - (0.37 - e1) * e1) + 11.0 / 0.25 * (e2 * e2 - (2.1 - e2) * e2);
        let got = observed_info(&m, &s, theta);
        assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn single_subject_stages_make_subject_and_stage_increments_agree() {
        for family in ModelFamily::ALL {
            let m = model(family);
            let mut rng = CounterRng::new(333 + family as u64);
            for _ in 0..200 {
                let s = random_sample(&m, &mut rng, 1, 1);
                let theta = rng.next_range(0.1, 3.9);
                let a = incremental_observed_subject(&m, &s, theta);
                let b = incremental_observed_stage(&m, &s, theta);
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn subject_sum_matches_compensated_oracle() {
        let m = model(ModelFamily::LogisticScale);
        let mut rng = CounterRng::new(5511);
        for _ in 0..20 {
            let s = random_sample(&m, &mut rng, 1000, 3000);
            let theta = rng.next_range(0.2, 3.7);
            let got = incremental_observed_subject(&m, &s, theta);
            let s4 = 0.0625;
            let mut terms = Vec::with_capacity(s.n());
            let (e1, d1) = (m.eta(s.x1(), theta), m.deta(s.x1(), theta));
            for y in s.y1() {
                terms.push((y - e1) * (y - e1) * d1 * d1 / s4);
            }
            let (e2, d2) = (m.eta(s.x2(), theta), m.deta(s.x2(), theta));
            for y in s.y2() {
                terms.push((y - e2) * (y - e2) * d2 * d2 / s4);
            }
            let oracle = compensated_sum(&terms);
            assert!((got - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        }
    }

    #[test]
    fn stage_increments_match_direct_two_term_expansion() {
        let m = model(ModelFamily::ExponentialScale);
        let mut rng = CounterRng::new(8112);
        for _ in 0..200 {
            let s = random_sample(&m, &mut rng, 4, 7);
            let theta = rng.next_range(0.1, 3.9);
            let d1 = m.deta(s.x1(), theta);
            let d2 = m.deta(s.x2(), theta);
            let expect = (16.0 * (s.ybar1() - m.eta(s.x1(), theta)).powi(2) * d1 * d1
                + 49.0 * (s.ybar2() - m.eta(s.x2(), theta)).powi(2) * d2 * d2)
                / 0.0625;
            let got = incremental_observed_stage(&m, &s, theta);
            assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn incremental_expected_scalar_example() {
        // exponential-scale, x₁=2, x₂=1, n₁=30, n₂=470, σ=0.5, θ=1:
        // (30·4e⁻⁴ + 470·e⁻²) / 0.25, from η̇ = -x e^{-θx}.
        let m = model(ModelFamily::ExponentialScale);
        let s = TwoStageSample::from_means(2.0, 1.0, 0.2, 30, 0.2, 470, 0.5).unwrap();
        let expect = (30.0 * 4.0 * (-4.0f64).exp() + 470.0 * (-2.0f64).exp()) / 0.25;
        let got = incremental_expected_info(&m, &s, 1.0);
        assert!((got - expect).abs() <= 1e-12 * expect);
        assert!((expect - 263.221_839_151_424_27).abs() < 1e-10);
    }

    #[test]
    fn incremental_expected_ignores_responses_and_unit_stages() {
        let m = model(ModelFamily::LogisticLocation);
        let a = TwoStageSample::from_means(2.0, 1.0, 0.9, 3, -0.4, 8, 0.5).unwrap();
        let b = TwoStageSample::from_means(2.0, 1.0, 0.1, 3, 0.6, 8, 0.5).unwrap();
        assert_eq!(incremental_expected_info(&m, &a, 1.5), incremental_expected_info(&m, &b, 1.5));

        let unit = TwoStageSample::from_means(2.0, 1.0, 0.4, 1, 0.5, 1, 0.5).unwrap();
        let d1 = m.deta(2.0, 1.5);
        let d2 = m.deta(1.0, 1.5);
        let expect = (d1 * d1 + d2 * d2) / 0.25;
        assert!((incremental_expected_info(&m, &unit, 1.5) - expect).abs() < 1e-14);
    }

    #[test]
    fn incremental_expected_subject_and_stage_paths_agree() {
        // Accumulate E[𝒟ᵢ²] subject by subject and compare with the
        // stage-level closed form.
        for family in ModelFamily::ALL {
            let m = model(family);
            let mut rng = CounterRng::new(9000 + family as u64);
            for _ in 0..100 {
                let s = random_sample(&m, &mut rng, 7, 13);
                let theta = rng.next_range(0.1, 3.9);
                let s2 = 0.25;
                let mut subjectwise = 0.0;
                for _ in 0..s.n1() {
                    subjectwise += m.deta(s.x1(), theta).powi(2) / s2;
                }
                for _ in 0..s.n2() {
                    subjectwise += m.deta(s.x2(), theta).powi(2) / s2;
                }
                let stagewise = incremental_expected_info(&m, &s, theta);
                assert!((subjectwise - stagewise).abs() <= 1e-12 * (1.0 + stagewise.abs()));
            }
        }
    }

    #[test]
    fn nonnegative_measures_stay_nonnegative() {
        for family in ModelFamily::ALL {
            let m = model(family);
            let mut rng = CounterRng::new(4242 + family as u64);
            for _ in 0..300 {
                let s = random_sample(&m, &mut rng, 2, 3);
                let theta = rng.next_range(0.0, 4.0);
                assert!(incremental_observed_subject(&m, &s, theta) >= 0.0);
                assert!(incremental_observed_stage(&m, &s, theta) >= 0.0);
                assert!(incremental_expected_info(&m, &s, theta) >= 0.0);
            }
        }
    }

    #[test]
    fn limit_scale_values_and_degeneracy() {
        let es = model(ModelFamily::ExponentialScale);
        let ls = limit_scale(&es, 1.0, 1.0, 0.5);
        assert!(!ls.degenerate);
        assert!((ls.u_inv_sq - (-2.0f64).exp() / 0.25).abs() < 1e-14);
        assert!((ls.u_inv_sq - 0.541_341_132_946_450_8).abs() < 1e-12);

        let ll = model(ModelFamily::LogisticLocation);
        let at_theta = limit_scale(&ll, 1.7, 1.7, 0.5);
        assert_eq!(at_theta.u_inv_sq, 0.25);

        // η̇(0, θ) = 0 for the scale families.
        let degenerate = limit_scale(&es, 0.0, 1.0, 0.5);
        assert!(degenerate.degenerate);
        assert_eq!(degenerate.u_inv_sq, 0.0);
    }

    #[test]
    fn measure_map_roundtrip() {
        let mut map = MeasureMap::filled(0.0f64);
        map.set(InfoMeasureKind::Observed, 2.0);
        assert_eq!(map[InfoMeasureKind::Observed], 2.0);
        assert_eq!(map[InfoMeasureKind::ExpectedFisher], 0.0);
        assert_eq!(map.iter().count(), 5);
        assert!(!InfoMeasureKind::IncrementalObservedStage.normalizing());
        assert!(InfoMeasureKind::Observed.normalizing());
    }
}
