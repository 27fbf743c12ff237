//! Radius laws: the CDF `alpha_n = P(R <= n)`, tail diagnostics and
//! inverse-CDF sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::renewal::{mean_interarrival, QSequence};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusFamily<T> {
    /// `P(R > n) = r^n`.
    GeometricTail { r: T },
    /// `1 - alpha_n = min(1, c / n^gamma)` for `n >= n0`, and `1` below `n0`.
    #[serde(rename = "power_tail")]
    PowerTail {
        c: T,
        gamma: T,
        #[serde(default = "default_n0")]
        n0: usize,
    },
    /// `P(R = n) = p[n]`.
    Table { p: Vec<T> },
    /// Defective law with all mass at infinity (`alpha_n = 0` for every `n`).
    Infinite,
}

fn default_n0() -> usize {
    1
}

/// A validated radius law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RadiusFamily<T>",
    into = "RadiusFamily<T>",
    bound(
        serialize = "T: Scalar + Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct RadiusModel<T> {
    family: RadiusFamily<T>,
    cdf: Vec<T>,
}

impl<T: Scalar> TryFrom<RadiusFamily<T>> for RadiusModel<T> {
    type Error = Error;

    fn try_from(family: RadiusFamily<T>) -> Result<Self> {
        RadiusModel::new(family)
    }
}

impl<T: Scalar> From<RadiusModel<T>> for RadiusFamily<T> {
    fn from(model: RadiusModel<T>) -> Self {
        model.family
    }
}

/// A sampled radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Radius {
    Finite(u64),
    Infinite,
}

impl Radius {
    /// Rightmost site covered by an interval opened at `site`.
    pub fn reach_from(self, site: u64) -> u64 {
        match self {
            Radius::Finite(r) => site.saturating_add(r),
            Radius::Infinite => u64::MAX,
        }
    }

    pub fn covers_gap(self, gap: u64) -> bool {
        match self {
            Radius::Finite(r) => r >= gap,
            Radius::Infinite => true,
        }
    }
}

/// Finite-horizon reading of `sum_k (1 - alpha_k)`. Evidence, never proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailDiagnosis {
    SummableEvidence,
    DivergentEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum<T> {
    /// `sum_{k=0}^{N} (1 - alpha_k)`.
    pub partial: T,
    pub horizon: usize,
    /// Local power-law decay exponent of `1 - alpha_k` over `[N/2, N]`.
    pub local_exponent: Option<T>,
    pub diagnosis: TailDiagnosis,
}

const CAP: u64 = 1 << 62;

impl<T: Scalar> RadiusModel<T> {
    pub fn new(family: RadiusFamily<T>) -> Result<Self> {
        let mut cdf = Vec::new();
        match &family {
            RadiusFamily::GeometricTail { r } => {
                if !(r.is_finite() && *r >= T::zero() && *r < T::one()) {
                    return Err(invalid("r", format!("{r} must lie in [0, 1)")));
                }
            }
            RadiusFamily::PowerTail { c, gamma, .. } => {
                if !(c.is_finite() && *c > T::zero()) {
                    return Err(invalid("c", format!("{c} must be positive")));
                }
                if !(gamma.is_finite() && *gamma > T::zero()) {
                    return Err(invalid("gamma", format!("{gamma} must be positive")));
                }
            }
            RadiusFamily::Table { p } => {
                if p.is_empty() {
                    return Err(invalid("p", "table must be non-empty"));
                }
                let mut acc = T::zero();
                for &v in p {
                    if !(v.is_finite() && v >= T::zero()) {
                        return Err(invalid("p", format!("{v} is not a probability")));
                    }
                    acc += v;
                    cdf.push(acc.min(T::one()));
                }
                let tol = T::lit(1e-9).max(T::epsilon() * T::lit(128.0));
                if (acc - T::one()).abs() > tol {
                    return Err(invalid("p", format!("table sums to {acc}, not 1")));
                }
                let last = cdf.len() - 1;
                cdf[last] = T::one();
            }
            RadiusFamily::Infinite => {}
        }
        Ok(Self { family, cdf })
    }

    pub fn geometric_tail(r: T) -> Result<Self> {
        Self::new(RadiusFamily::GeometricTail { r })
    }

    pub fn power_tail(c: T, gamma: T, n0: usize) -> Result<Self> {
        Self::new(RadiusFamily::PowerTail { c, gamma, n0 })
    }

    /// `p[n] = P(R = n)`.
    pub fn table(p: Vec<T>) -> Result<Self> {
        Self::new(RadiusFamily::Table { p })
    }

    /// The defective law `R = infinity` almost surely.
    pub fn infinite() -> Self {
        Self {
            family: RadiusFamily::Infinite,
            cdf: Vec::new(),
        }
    }

    /// Table law from an explicit CDF prefix; `alpha_n = 1` past the end.
    pub fn from_alpha_prefix(alpha: &[T]) -> Result<Self> {
        let mut p = Vec::with_capacity(alpha.len() + 1);
        let mut prev = T::zero();
        for &a in alpha {
            p.push((a - prev).max(T::zero()));
            prev = a;
        }
        p.push(T::one() - prev);
        Self::table(p)
    }

    pub fn family(&self) -> &RadiusFamily<T> {
        &self.family
    }

    pub fn is_defective(&self) -> bool {
        matches!(self.family, RadiusFamily::Infinite)
    }

    /// `1 - alpha_n`, evaluated without cancellation.
    pub fn tail(&self, n: usize) -> T {
        match &self.family {
            RadiusFamily::GeometricTail { r } => r.powf(T::from_usize_lossy(n)),
            RadiusFamily::PowerTail { c, gamma, n0 } => {
                if n < *n0 || n == 0 {
                    T::one()
                } else {
                    (*c / T::from_usize_lossy(n).powf(*gamma)).min(T::one())
                }
            }
            RadiusFamily::Table { .. } => match self.cdf.get(n) {
                Some(&a) => T::one() - a,
                None => T::zero(),
            },
            RadiusFamily::Infinite => T::one(),
        }
    }

    /// `alpha_n = P(R <= n)`.
    pub fn alpha(&self, n: usize) -> T {
        match &self.family {
            RadiusFamily::Table { .. } => self.cdf.get(n).copied().unwrap_or(T::one()),
            _ => T::one() - self.tail(n),
        }
    }

    /// `ln alpha_n`, or `None` when `alpha_n = 0`.
    pub fn log_alpha(&self, n: usize) -> Option<T> {
        let t = self.tail(n);
        if t >= T::one() {
            None
        } else {
            Some((-t).ln_1p())
        }
    }

    /// `alpha_0..alpha_{n-1}`.
    pub fn alpha_prefix(&self, n: usize) -> Vec<T> {
        (0..n).map(|i| self.alpha(i)).collect()
    }

    /// `P(R = n)` for a proper law.
    pub fn pmf(&self, n: usize) -> T {
        if n == 0 {
            self.alpha(0)
        } else {
            (self.alpha(n) - self.alpha(n - 1)).max(T::zero())
        }
    }

    /// Largest value in the support when the law has bounded support.
    pub fn support_bound(&self) -> Option<usize> {
        match &self.family {
            RadiusFamily::Table { p } => Some(p.iter().rposition(|&v| v > T::zero()).unwrap_or(0)),
            RadiusFamily::GeometricTail { r } if *r == T::zero() => Some(1),
            _ => None,
        }
    }

    /// Inverse-CDF draw `min { n : u < alpha_n }` for `u` in `[0, 1)`.
    ///
    /// Monotone in `u`, so shared uniforms realise stochastic dominance pathwise.
    pub fn sample_from_uniform(&self, u: f64) -> Radius {
        match &self.family {
            RadiusFamily::Infinite => Radius::Infinite,
            RadiusFamily::Table { .. } => {
                let idx = self
                    .cdf
                    .iter()
                    .position(|&a| u < a.as_f64())
                    .unwrap_or(self.cdf.len() - 1);
                Radius::Finite(idx as u64)
            }
            RadiusFamily::GeometricTail { r } => {
                let r = r.as_f64();
                if r == 0.0 {
                    return Radius::Finite(1);
                }
                let x = (-u).ln_1p() / r.ln();
                self.fix_up(u, x.floor() + 1.0)
            }
            RadiusFamily::PowerTail { c, gamma, n0 } => {
                let (c, gamma) = (c.as_f64(), gamma.as_f64());
                let x = (c / (1.0 - u)).powf(1.0 / gamma);
                let start = (*n0).max(1) as f64;
                self.fix_up(u, (x.floor() + 1.0).max(start))
            }
        }
    }

    fn fix_up(&self, u: f64, candidate: f64) -> Radius {
        if !(candidate < CAP as f64) {
            return Radius::Finite(CAP);
        }
        let mut n = candidate.max(0.0) as u64;
        while n > 0 && u < self.alpha((n - 1) as usize).as_f64() {
            n -= 1;
        }
        while !(u < self.alpha(n as usize).as_f64()) {
            n += 1;
            if n >= CAP {
                break;
            }
        }
        Radius::Finite(n)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Radius {
        self.sample_from_uniform(rng.gen())
    }
}

/// Partial sum of `1 - alpha_k` with a heuristic summability diagnosis.
pub fn tail_sum<T: Scalar>(model: &RadiusModel<T>, horizon: usize) -> Result<TailSum<T>> {
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let partial = (0..=horizon).map(|k| model.tail(k)).sum::<T>();
    let last = model.tail(horizon);
    let mid = model.tail(horizon / 2);
    let (local_exponent, diagnosis) = if last == T::zero() {
        (None, TailDiagnosis::SummableEvidence)
    } else if horizon < 4 || mid == T::zero() {
        (None, TailDiagnosis::Inconclusive)
    } else {
        let span = (T::from_usize_lossy(horizon) / T::from_usize_lossy(horizon / 2)).ln();
        let s = (mid / last).ln() / span;
        let d = if s > T::lit(1.1) {
            TailDiagnosis::SummableEvidence
        } else if s <= T::one() + T::lit(1e-6) {
            TailDiagnosis::DivergentEvidence
        } else {
            TailDiagnosis::Inconclusive
        };
        (Some(s), d)
    };
    Ok(TailSum {
        partial,
        horizon,
        local_exponent,
        diagnosis,
    })
}

/// `n (1 - alpha_n) / E T`, the quantity whose tail is compared with 1.
pub fn criterion_ratio<T: Scalar>(
    model: &RadiusModel<T>,
    spec: &QSequence<T>,
    n: usize,
) -> Result<T> {
    let mean = mean_interarrival(spec)?;
    Ok(criterion_ratio_with_mean(model, mean, n))
}

pub fn criterion_ratio_with_mean<T: Scalar>(model: &RadiusModel<T>, mean: T, n: usize) -> T {
    T::from_usize_lossy(n) * model.tail(n) / mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn alpha_examples() {
        let g = RadiusModel::geometric_tail(0.9).unwrap();
        assert!(close(g.alpha(2), 0.19, 1e-15));
        let p = RadiusModel::power_tail(3.0, 1.0, 1).unwrap();
        assert_eq!(p.alpha(3), 0.0);
        assert!(close(p.alpha(6), 0.5, 1e-15));
        let t = RadiusModel::table(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(t.alpha(0), 0.0);
        assert_eq!(t.alpha(1), 0.5);
        assert_eq!(t.alpha(2), 1.0);
        assert_eq!(t.alpha(50), 1.0);
        assert_eq!(RadiusModel::<f64>::infinite().alpha(10), 0.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(RadiusModel::geometric_tail(1.0).is_err());
        assert!(RadiusModel::power_tail(0.0, 1.0, 1).is_err());
        assert!(RadiusModel::power_tail(1.0, -1.0, 1).is_err());
        assert!(RadiusModel::table(vec![0.5, 0.4]).is_err());
        assert!(RadiusModel::table(vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn alpha_nondecreasing_scan() {
        let models = vec![
            RadiusModel::geometric_tail(0.9).unwrap(),
            RadiusModel::geometric_tail(0.0).unwrap(),
            RadiusModel::power_tail(3.0, 1.0, 1).unwrap(),
            RadiusModel::power_tail(0.5, 0.7, 4).unwrap(),
            RadiusModel::table(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            RadiusModel::infinite(),
        ];
        for m in &models {
            let mut prev = m.alpha(0);
            for n in 0..10_000 {
                let a = m.alpha(n);
                assert!((0.0..=1.0).contains(&a));
                assert!(a >= prev);
                prev = a;
            }
        }
    }

    #[test]
    fn tail_sum_examples() {
        let g = tail_sum(&RadiusModel::geometric_tail(0.9).unwrap(), 400).unwrap();
        assert!(close(g.partial, 10.0, 1e-9));
        assert_eq!(g.diagnosis, TailDiagnosis::SummableEvidence);
        let p = tail_sum(&RadiusModel::power_tail(3.0, 1.0, 1).unwrap(), 100_000).unwrap();
        assert_eq!(p.diagnosis, TailDiagnosis::DivergentEvidence);
        assert!(p.partial > 3.0 * (100_000f64).ln() - 3.0);
        let t = tail_sum(&RadiusModel::table(vec![0.0, 0.5, 0.5]).unwrap(), 10).unwrap();
        assert_eq!(t.partial, 1.5);
        assert_eq!(t.diagnosis, TailDiagnosis::SummableEvidence);
    }

    #[test]
    fn tail_sum_nondecreasing_in_horizon() {
        let m = RadiusModel::power_tail(2.0, 1.3, 2).unwrap();
        let mut prev = 0.0;
        for n in 1..300 {
            let s = tail_sum(&m, n).unwrap().partial;
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn criterion_ratio_examples() {
        let spec = QSequence::constant(0.5).unwrap();
        let n = 1_000_000;
        let r = criterion_ratio(&RadiusModel::power_tail(3.0, 1.0, 1).unwrap(), &spec, n).unwrap();
        assert!(close(r, 1.5, 1e-9));
        let r = criterion_ratio(&RadiusModel::power_tail(0.5, 1.0, 1).unwrap(), &spec, n).unwrap();
        assert!(close(r, 0.25, 1e-9));
        let r = criterion_ratio(&RadiusModel::geometric_tail(0.9).unwrap(), &spec, 2000).unwrap();
        assert!(r < 1e-80);
        let divergent = QSequence::poly_monotone(2.0, 2).unwrap();
        assert!(matches!(
            criterion_ratio(&RadiusModel::geometric_tail(0.9).unwrap(), &divergent, 10),
            Err(Error::InfiniteMean { .. })
        ));
    }

    #[test]
    fn sampling_is_inverse_cdf() {
        let models = vec![
            RadiusModel::geometric_tail(0.9).unwrap(),
            RadiusModel::power_tail(3.0, 1.0, 1).unwrap(),
            RadiusModel::power_tail(0.5, 2.0, 3).unwrap(),
            RadiusModel::table(vec![0.2, 0.0, 0.5, 0.3]).unwrap(),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for m in &models {
            for _ in 0..2000 {
                let u: f64 = rng.gen();
                let Radius::Finite(r) = m.sample_from_uniform(u) else {
                    panic!("finite law sampled infinity")
                };
                let r = r as usize;
                assert!(u < m.alpha(r));
                assert!(r == 0 || u >= m.alpha(r - 1));
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let one = RadiusModel::table(vec![0.0, 1.0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(one.sample(&mut rng), Radius::Finite(1));
        }
        assert_eq!(
            RadiusModel::<f64>::infinite().sample(&mut rng),
            Radius::Infinite
        );
        let g = RadiusModel::geometric_tail(0.9).unwrap();
        let a: Vec<_> = (0..50)
            .map(|_| g.sample(&mut ChaCha12Rng::seed_from_u64(8)))
            .collect();
        let b: Vec<_> = (0..50)
            .map(|_| g.sample(&mut ChaCha12Rng::seed_from_u64(8)))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_is_monotone_in_u() {
        let m = RadiusModel::power_tail(3.0, 1.0, 1).unwrap();
        let mut prev = Radius::Finite(0);
        for i in 0..5000 {
            let u = i as f64 / 5000.0;
            let r = m.sample_from_uniform(u);
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn json_fragments() {
        let m: RadiusModel<f64> =
            serde_json::from_str(r#"{"family":"geometric_tail","r":0.9}"#).unwrap();
        assert!(close(m.alpha(2), 0.19, 1e-15));
        let m: RadiusModel<f64> =
            serde_json::from_str(r#"{"family":"power_tail","c":3,"gamma":1,"n0":1}"#).unwrap();
        assert!(close(m.alpha(6), 0.5, 1e-15));
        let m: RadiusModel<f64> =
            serde_json::from_str(r#"{"family":"table","p":[0,0.5,0.5]}"#).unwrap();
        assert_eq!(m.support_bound(), Some(2));
        let m: RadiusModel<f64> = serde_json::from_str(r#"{"family":"infinite"}"#).unwrap();
        assert!(m.is_defective());
        assert!(
            serde_json::from_str::<RadiusModel<f64>>(r#"{"family":"table","p":[0.3]}"#).is_err()
        );
    }
}
