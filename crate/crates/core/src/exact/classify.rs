use serde::Serialize;

use crate::error::{invalid, Result};
use crate::radius::{criterion_ratio_with_mean, RadiusModel};
use crate::renewal::{ck_from_qstar, mean_series, QSequence, MEAN_HORIZON, MEAN_TOL};
use crate::scalar::Scalar;

/// Margin around 1 within which the ratio window counts as undecided.
const RATIO_MARGIN: f64 = 1e-9;
/// Allowed growth of `C_k / k` across the window before it counts as unbounded.
const CK_GROWTH: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Infinite mean inter-arrival time: no percolation, a theorem.
    ExtinctInfiniteMean,
    /// `n (1 - alpha_n) / E T` stays below 1 on the window.
    ExtinctEvidence,
    /// Ratio stays above 1 and `C_k / k` looks bounded on the window.
    SurviveEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExtinctInfiniteMean => "extinct-infinite-mean",
            Self::ExtinctEvidence => "extinct-evidence",
            Self::SurviveEvidence => "survive-evidence",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// Finite-horizon diagnosis of the phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnosis<T> {
    pub horizon: usize,
    /// Partial (or converged) value of `E T`.
    pub mean: T,
    pub mean_converged: bool,
    /// Range of `n (1 - alpha_n) / E T` over `n` in `[N/2, N]`.
    pub ratio_min: Option<T>,
    pub ratio_max: Option<T>,
    /// `C_k / k` at `k = N/2` and `k = N`.
    pub ck_ratio_mid: T,
    pub ck_ratio_end: T,
    pub verdict: Verdict,
    /// False only for a verdict that is a theorem rather than evidence.
    pub finite_horizon_evidence: bool,
}

pub fn classify<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<Diagnosis<T>> {
    if horizon < 2 {
        return Err(invalid("horizon", "must be at least 2"));
    }
    let series = mean_series(spec, MEAN_HORIZON, T::lit(MEAN_TOL));
    let mid = horizon / 2;
    let qstar = spec.q_star_prefix(2 * horizon);
    let ck_ratio_mid = ck_from_qstar(&qstar, mid) / T::from_usize_lossy(mid);
    let ck_ratio_end = ck_from_qstar(&qstar, horizon) / T::from_usize_lossy(horizon);

    let mut diagnosis = Diagnosis {
        horizon,
        mean: series.mean,
        mean_converged: series.converged,
        ratio_min: None,
        ratio_max: None,
        ck_ratio_mid,
        ck_ratio_end,
        verdict: Verdict::Inconclusive,
        finite_horizon_evidence: true,
    };
    if !series.converged {
        if series.divergence_evidence() {
            diagnosis.verdict = Verdict::ExtinctInfiniteMean;
            diagnosis.finite_horizon_evidence = false;
        }
        return Ok(diagnosis);
    }
    let (lo, hi) = (mid..=horizon)
        .map(|n| criterion_ratio_with_mean(model, series.mean, n))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    diagnosis.ratio_min = Some(lo);
    diagnosis.ratio_max = Some(hi);
    let margin = T::lit(RATIO_MARGIN);
    diagnosis.verdict = if hi < T::one() - margin {
        Verdict::ExtinctEvidence
    } else if lo > T::one() + margin && ck_ratio_end <= T::lit(CK_GROWTH) * ck_ratio_mid {
        Verdict::SurviveEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(diagnosis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::mean_interarrival;

    #[test]
    fn constant_with_weak_radius_is_extinct() {
        let d = classify(
            &QSequence::<f64>::constant(0.5).unwrap(),
            &RadiusModel::power_tail(0.5, 1.0, 1).unwrap(),
            10_000,
        )
        .unwrap();
        assert_eq!(d.verdict, Verdict::ExtinctEvidence);
        assert!((d.ratio_max.unwrap() - 0.25).abs() < 1e-12);
        assert!(d.finite_horizon_evidence);
    }

    #[test]
    fn divergent_mean_is_a_theorem() {
        let spec = QSequence::table(vec![0.9, 1.0]).unwrap();
        let d = classify(&spec, &RadiusModel::power_tail(3.0, 1.0, 1).unwrap(), 1_000).unwrap();
        assert_eq!(d.verdict, Verdict::ExtinctInfiniteMean);
        assert!(!d.finite_horizon_evidence);
    }

    #[test]
    fn poly_monotone_survives() {
        let spec = QSequence::<f64>::poly_monotone(0.25, 2).unwrap();
        let mean = mean_interarrival(&spec).unwrap();
        let model = RadiusModel::power_tail(1.5 * mean, 1.0, 1).unwrap();
        let d = classify(&spec, &model, 10_000).unwrap();
        assert_eq!(d.verdict, Verdict::SurviveEvidence);
        assert!((d.ratio_min.unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn ratio_at_one_is_inconclusive() {
        let d = classify(
            &QSequence::constant(0.5).unwrap(),
            &RadiusModel::power_tail(2.0, 1.0, 1).unwrap(),
            1_000,
        )
        .unwrap();
        assert_eq!(d.verdict, Verdict::Inconclusive);
    }
}
