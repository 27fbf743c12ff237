//! Renewal laws built from the house-of-cards chain.
//!
//! The chain `zeta` starts at 0, moves from height `s` to `s + 1` with
//! probability `q_s` and collapses to 0 otherwise. Its zero set is the
//! undelayed renewal sequence `xi`. Everything downstream (inter-arrival law,
//! renewal probabilities, running maxima and the coupling constants `C_k`) is
//! a function of the sequence `q_0, q_1, ...` described by a [`QSequence`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Default hard horizon used when only the mean inter-arrival time is needed.
pub const MEAN_HORIZON: usize = 1_000_000;
/// Default term tolerance for the mean inter-arrival series.
pub const MEAN_TOL: f64 = 1e-16;

/// Parametric families of failure probabilities `q_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound(deserialize = "T: Deserialize<'de>")
)]
pub enum QFamily<T> {
    /// `q_i = q` for all `i` (i.i.d. Bernoulli(1 - q) marks after site 0).
    Constant { q: T },
    /// `q_0 = q0`, `q_i = q1` for `i >= 1`: a two-state Markov chain.
    Markov { q0: T, q1: T },
    /// `q_i = 1 - i^(-beta)` for `i >= i0`, held at `q_{i0}` below `i0`.
    #[serde(rename = "poly_monotone")]
    PolyMonotone { beta: T, i0: usize },
    /// Explicit prefix `q_0..q_m` continued by `tail`.
    Table {
        q: Vec<T>,
        #[serde(default)]
        tail: TableTail<T>,
    },
}

/// How a [`QFamily::Table`] continues past its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableTail<T> {
    Rule(TailRule),
    /// Indices past the table are evaluated by another family (absolute index).
    Formula(Box<QFamily<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    RepeatLast,
}

impl<T> Default for TableTail<T> {
    fn default() -> Self {
        TableTail::Rule(TailRule::RepeatLast)
    }
}

/// A validated renewal-law specification.
///
/// `q_at` is clamped to `[0, 1 - 1e-12]` so that no state is absorbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "QFamily<T>",
    into = "QFamily<T>",
    bound(
        serialize = "T: Scalar + Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct QSequence<T> {
    family: QFamily<T>,
}

impl<T: Scalar> TryFrom<QFamily<T>> for QSequence<T> {
    type Error = Error;

    fn try_from(family: QFamily<T>) -> Result<Self> {
        QSequence::new(family)
    }
}

impl<T: Scalar> From<QSequence<T>> for QFamily<T> {
    fn from(seq: QSequence<T>) -> Self {
        seq.family
    }
}

fn check_prob<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is not a probability")))
    }
}

fn validate<T: Scalar>(family: &QFamily<T>) -> Result<()> {
    match family {
        QFamily::Constant { q } => check_prob("q", *q),
        QFamily::Markov { q0, q1 } => {
            check_prob("q0", *q0)?;
            check_prob("q1", *q1)
        }
        QFamily::PolyMonotone { beta, i0 } => {
            if !(beta.is_finite() && *beta > T::zero()) {
                return Err(invalid("beta", format!("{beta} must be positive")));
            }
            if *i0 < 2 {
                return Err(invalid("i0", "must be at least 2"));
            }
            Ok(())
        }
        QFamily::Table { q, tail } => {
            if q.is_empty() {
                return Err(invalid("q", "table must be non-empty"));
            }
            for &v in q {
                check_prob("q", v)?;
            }
            match tail {
                TableTail::Rule(_) => Ok(()),
                TableTail::Formula(inner) => validate(inner),
            }
        }
    }
}

fn raw_q<T: Scalar>(family: &QFamily<T>, i: usize) -> T {
    match family {
        QFamily::Constant { q } => *q,
        QFamily::Markov { q0, q1 } => {
            if i == 0 {
                *q0
            } else {
                *q1
            }
        }
        QFamily::PolyMonotone { beta, i0 } => {
            let idx = T::from_usize_lossy(i.max(*i0));
            T::one() - idx.powf(-*beta)
        }
        QFamily::Table { q, tail } => match q.get(i) {
            Some(v) => *v,
            None => match tail {
                TableTail::Rule(TailRule::RepeatLast) => *q.last().expect("validated non-empty"),
                TableTail::Formula(inner) => raw_q(inner, i),
            },
        },
    }
}

impl<T: Scalar> QSequence<T> {
    pub fn new(family: QFamily<T>) -> Result<Self> {
        validate(&family)?;
        Ok(Self { family })
    }

    pub fn constant(q: T) -> Result<Self> {
        Self::new(QFamily::Constant { q })
    }

    pub fn markov(q0: T, q1: T) -> Result<Self> {
        Self::new(QFamily::Markov { q0, q1 })
    }

    pub fn poly_monotone(beta: T, i0: usize) -> Result<Self> {
        Self::new(QFamily::PolyMonotone { beta, i0 })
    }

    /// Table continued by repeating its last entry.
    pub fn table(q: Vec<T>) -> Result<Self> {
        Self::new(QFamily::Table {
            q,
            tail: TableTail::default(),
        })
    }

    pub fn family(&self) -> &QFamily<T> {
        &self.family
    }

    /// `q_i`, clamped to `[0, 1 - 1e-12]`.
    pub fn q_at(&self, i: usize) -> T {
        let q = raw_q(&self.family, i);
        q.max(T::zero()).min(T::q_cap())
    }

    /// `q_0..q_{n-1}`.
    pub fn q_prefix(&self, n: usize) -> Vec<T> {
        (0..n).map(|i| self.q_at(i)).collect()
    }

    /// Running maximum `q*_i = max_{m <= i} q_m`.
    pub fn q_star(&self, i: usize) -> T {
        (0..=i).map(|m| self.q_at(m)).fold(T::zero(), T::max)
    }

    /// `q*_0..q*_{n-1}`.
    pub fn q_star_prefix(&self, n: usize) -> Vec<T> {
        let mut running = T::zero();
        (0..n)
            .map(|i| {
                running = running.max(self.q_at(i));
                running
            })
            .collect()
    }

    /// Constant `q` when the law is i.i.d., i.e. `xi_1, xi_2, ...` independent.
    pub fn iid_q(&self) -> Option<T> {
        match &self.family {
            QFamily::Constant { .. } => Some(self.q_at(0)),
            QFamily::Markov { .. } if self.q_at(0) == self.q_at(1) => Some(self.q_at(0)),
            _ => None,
        }
    }

    /// First index `i < n` with `q_i > q_{i+1}`, if any.
    pub fn first_decrease(&self, n: usize) -> Option<usize> {
        let mut prev = self.q_at(0);
        for i in 1..=n {
            let cur = self.q_at(i);
            if cur < prev {
                return Some(i - 1);
            }
            prev = cur;
        }
        None
    }
}

/// Truncated law of the inter-arrival time `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterArrivalSummary<T> {
    /// `P(T = n)` for `n = 1..=horizon` (index 0 holds `n = 1`).
    pub pmf_prefix: Vec<T>,
    /// `E T`, or a lower bound when `converged` is false.
    pub mean: T,
    pub converged: bool,
    pub horizon: usize,
    /// Last series term `prod_{i<n} q_i` that was added to the mean.
    pub last_term: T,
    /// Number of series terms added.
    pub terms: usize,
}

impl<T: Scalar> InterArrivalSummary<T> {
    /// `P(T = n)` for `1 <= n <= horizon`.
    pub fn pmf(&self, n: usize) -> T {
        self.pmf_prefix[n - 1]
    }

    /// See [`MeanSeries::divergence_evidence`].
    pub fn divergence_evidence(&self) -> bool {
        MeanSeries {
            mean: self.mean,
            converged: self.converged,
            last_term: self.last_term,
            terms: self.terms,
        }
        .divergence_evidence()
    }
}

/// Partial sums of `E T = 1 + sum_{n>=1} prod_{i<n} q_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSeries<T> {
    pub mean: T,
    pub converged: bool,
    /// Last term `prod_{i<n} q_i` added to the sum.
    pub last_term: T,
    /// Number of terms added.
    pub terms: usize,
}

impl<T: Scalar> MeanSeries<T> {
    /// Finite-horizon evidence that `E T = infinity`.
    ///
    /// Terms are nonincreasing, so the last half of the partial sum is at least
    /// `terms / 2 * last_term`; above one the partial sums still grow linearly.
    pub fn divergence_evidence(&self) -> bool {
        !self.converged && T::from_usize_lossy(self.terms) * self.last_term >= T::lit(2.0)
    }
}

/// Sums the mean series until a term drops below `tol` or `horizon` terms are added.
pub fn mean_series<T: Scalar>(spec: &QSequence<T>, horizon: usize, tol: T) -> MeanSeries<T> {
    let mut term = T::one();
    let mut mean = T::one();
    let mut terms = 0;
    let mut converged = false;
    for i in 0..horizon {
        term *= spec.q_at(i);
        mean += term;
        terms = i + 1;
        if term < tol {
            converged = true;
            break;
        }
    }
    MeanSeries {
        mean,
        converged,
        last_term: term,
        terms,
    }
}

/// Inter-arrival pmf and mean.
///
/// The mean is `1 + sum_{n>=1} prod_{i<n} q_i`, accumulated until a term drops
/// below `tol` or `horizon` terms have been added.
pub fn interarrival<T: Scalar>(
    spec: &QSequence<T>,
    horizon: usize,
    tol: T,
) -> Result<InterArrivalSummary<T>> {
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    let mut pmf_prefix = Vec::with_capacity(horizon);
    let mut survival = T::one();
    for n in 1..=horizon {
        let q = spec.q_at(n - 1);
        pmf_prefix.push((T::one() - q) * survival);
        survival *= q;
    }
    let series = mean_series(spec, horizon, tol);
    Ok(InterArrivalSummary {
        pmf_prefix,
        mean: series.mean,
        converged: series.converged,
        horizon,
        last_term: series.last_term,
        terms: series.terms,
    })
}

/// `E T` with default tolerances; errors when the series does not converge.
pub fn mean_interarrival<T: Scalar>(spec: &QSequence<T>) -> Result<T> {
    mean_interarrival_with(spec, MEAN_HORIZON, T::lit(MEAN_TOL))
}

pub fn mean_interarrival_with<T: Scalar>(spec: &QSequence<T>, horizon: usize, tol: T) -> Result<T> {
    let series = mean_series(spec, horizon, tol);
    if series.converged {
        Ok(series.mean)
    } else {
        Err(Error::InfiniteMean { horizon })
    }
}

/// `P(T = n)` for `n = 1..=horizon`, cut where the survival product underflows.
pub(crate) fn interarrival_pmf<T: Scalar>(spec: &QSequence<T>, horizon: usize) -> Vec<T> {
    let mut pmf = Vec::new();
    let mut survival = T::one();
    for n in 1..=horizon {
        let q = spec.q_at(n - 1);
        pmf.push((T::one() - q) * survival);
        survival *= q;
        if survival == T::zero() {
            break;
        }
    }
    pmf
}

/// Renewal probabilities `u_n = P(xi_n = 1 | xi_0 = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalProbTable<T> {
    pub u: Vec<T>,
}

/// Renewal convolution `u_n = sum_{k=1}^n P(T = k) u_{n-k}`, `u_0 = 1`.
pub fn renewal_probabilities<T: Scalar>(
    spec: &QSequence<T>,
    horizon: usize,
) -> RenewalProbTable<T> {
    let pmf = interarrival_pmf(spec, horizon);
    RenewalProbTable {
        u: renewal_convolve(&pmf, horizon),
    }
}

/// Solves the renewal equation for an arbitrary (possibly defective) pmf
/// given as `pmf[k-1] = f_k`.
pub(crate) fn renewal_convolve<T: Scalar>(pmf: &[T], horizon: usize) -> Vec<T> {
    let mut u = Vec::with_capacity(horizon + 1);
    u.push(T::one());
    for n in 1..=horizon {
        let kmax = n.min(pmf.len());
        let mut acc = T::zero();
        for k in 1..=kmax {
            acc += pmf[k - 1] * u[n - k];
        }
        u.push(acc.min(T::one()).max(T::zero()));
    }
    u
}

/// Closed form of `P(xi_i = 1 | xi_0 = 1)` for the two-state Markov law.
///
/// `u_i = (1 - q1)/(1 - q1 + q0) + q0/(1 - q1 + q0) * (q1 - q0)^i`.
pub fn markov_renewal_closed<T: Scalar>(q0: T, q1: T, i: usize) -> Result<T> {
    check_prob("q0", q0)?;
    check_prob("q1", q1)?;
    if q0 >= T::one() || q1 >= T::one() {
        return Err(invalid("q", "Markov closed form needs q0, q1 < 1"));
    }
    let denom = T::one() - q1 + q0;
    let stationary = (T::one() - q1) / denom;
    let lambda = q1 - q0;
    Ok(stationary + q0 / denom * lambda.powi(i as i32))
}

/// Coupling constants `C_k = (sum_{j=1}^k prod_{i=k}^{k+j-1} q*_i)^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkSequence<T> {
    /// `C_1..C_kmax` (index 0 holds `C_1`).
    pub c: Vec<T>,
    /// `C_k / k`, the quantity that must stay bounded for the survival criterion.
    pub ratio: Vec<T>,
}

impl<T: Scalar> CkSequence<T> {
    /// `C_k` for `1 <= k <= kmax`.
    pub fn get(&self, k: usize) -> T {
        self.c[k - 1]
    }
}

/// `C_k` from a running-max prefix covering at least indices `k..2k-1`.
///
/// The inner products are nonincreasing in `j`; summation stops once the
/// remaining terms cannot change the sum in floating point.
pub fn ck_from_qstar<T: Scalar>(qstar: &[T], k: usize) -> T {
    assert!(
        k >= 1 && qstar.len() + 1 >= 2 * k,
        "q* prefix too short for C_{k}"
    );
    let cutoff = T::epsilon() * T::lit(0.25);
    let mut prod = T::one();
    let mut sum = T::zero();
    for j in 1..=k {
        prod *= qstar[k + j - 1];
        sum += prod;
        let remaining = T::from_usize_lossy(k - j);
        if prod == T::zero() || prod * remaining <= cutoff * sum {
            break;
        }
    }
    sum * sum
}

pub fn ck_sequence<T: Scalar>(spec: &QSequence<T>, kmax: usize) -> Result<CkSequence<T>> {
    if kmax < 1 {
        return Err(invalid("kmax", "must be at least 1"));
    }
    let qstar = spec.q_star_prefix(2 * kmax);
    let c: Vec<T> = (1..=kmax).map(|k| ck_from_qstar(&qstar, k)).collect();
    let ratio = c
        .iter()
        .enumerate()
        .map(|(i, &ck)| ck / T::from_usize_lossy(i + 1))
        .collect();
    Ok(CkSequence { c, ratio })
}

/// A sampled renewal path together with its house-of-cards companion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinaryPath {
    pub xi: Vec<bool>,
    pub zeta: Vec<usize>,
}

impl BinaryPath {
    pub fn renewals(&self) -> usize {
        self.xi.iter().filter(|&&b| b).count()
    }
}

/// One step of the house-of-cards chain driven by a uniform `u` in `[0, 1)`.
#[inline]
pub fn advance(state: usize, u: f64, q_state: f64) -> usize {
    if u < q_state {
        state + 1
    } else {
        0
    }
}

/// Samples `xi_0..xi_horizon` with `xi_0 = 1`, one uniform per step.
pub fn sample_path<T: Scalar, R: Rng + ?Sized>(
    spec: &QSequence<T>,
    horizon: usize,
    rng: &mut R,
) -> BinaryPath {
    let mut xi = Vec::with_capacity(horizon + 1);
    let mut zeta = Vec::with_capacity(horizon + 1);
    let mut state = 0;
    xi.push(true);
    zeta.push(0);
    for _ in 0..horizon {
        let u: f64 = rng.gen();
        state = advance(state, u, spec.q_at(state).as_f64());
        xi.push(state == 0);
        zeta.push(state);
    }
    BinaryPath { xi, zeta }
}
