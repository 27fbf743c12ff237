use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{substream, Role, SimReport, SimTarget};
use crate::error::{invalid, Result};
use crate::renewal::{advance, QSequence};
use crate::scalar::Scalar;

/// House-of-cards chains started at different heights and driven by one
/// shared uniform per step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingState {
    pub zeta: Vec<usize>,
}

impl CouplingState {
    pub fn new(delays: &[usize]) -> Self {
        Self {
            zeta: delays.to_vec(),
        }
    }

    /// `zeta <- (zeta + 1) 1{u < q_zeta}` for every chain.
    pub fn step(&mut self, u: f64, q: impl Fn(usize) -> f64) {
        for z in &mut self.zeta {
            *z = advance(*z, u, q(*z));
        }
    }

    pub fn all_renewed(&self) -> bool {
        self.zeta.iter().all(|&z| z == 0)
    }

    pub fn coalesced(&self) -> bool {
        self.zeta.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub delays: Vec<usize>,
    pub horizon: usize,
    /// `P(tau_{0,l} >= j)` for each `l = delays[i]`, `i >= 1`.
    pub tau: Vec<SimReport>,
    /// `P(T >= j)` with `T` the first time all chains renew together.
    pub t_all: SimReport,
    /// `k = max(delays)`, the index of the coupling constant to compare with.
    pub k: usize,
    /// `(sum_{j=1}^k P(T >= j))^2`.
    pub ck_empirical: f64,
    /// `(sum_{j=1}^k P(T >= j + 1))^2`, the quantity bounded by `C_k`.
    pub ck_empirical_shifted: f64,
    /// Delta-method standard error of `ck_empirical_shifted`.
    pub ck_shifted_std_error: f64,
    /// Replicates where chains separated after renewing together; always 0.
    pub coalescence_violations: u64,
}

#[derive(Clone)]
struct Tally {
    tau: Vec<Vec<u64>>,
    t_all: Vec<u64>,
    shifted_sum: f64,
    shifted_sq: f64,
    violations: u64,
}

impl Tally {
    fn new(pairs: usize, horizon: usize) -> Self {
        Self {
            tau: vec![vec![0; horizon]; pairs],
            t_all: vec![0; horizon],
            shifted_sum: 0.0,
            shifted_sq: 0.0,
            violations: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.tau.iter_mut().zip(other.tau) {
            super::add_counts_into(a, &b);
        }
        super::add_counts_into(&mut self.t_all, &other.t_all);
        self.shifted_sum += other.shifted_sum;
        self.shifted_sq += other.shifted_sq;
        self.violations += other.violations;
        self
    }
}

/// Counts `{X >= j}` for `j = 1..=horizon` given the first hitting time `x`
/// (`None` when beyond the horizon).
fn survive(counts: &mut [u64], x: Option<usize>) {
    let upto = x.unwrap_or(counts.len()).min(counts.len());
    for c in &mut counts[..upto] {
        *c += 1;
    }
}

/// Runs coupled chains started at heights `delays` under shared uniforms.
///
/// `tau_{0,l}` is the first `j >= 1` at which the chains started at
/// `delays[0]` and `l` both sit at 0; `T` is the first such time for all
/// chains together. The horizon must exceed every delay.
pub fn simulate_coupling<T: Scalar>(
    spec: &QSequence<T>,
    delays: &[usize],
    horizon: usize,
    reps: u64,
    seed: u64,
) -> Result<CouplingReport> {
    if delays.is_empty() {
        return Err(invalid("delays", "must be nonempty"));
    }
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    if reps < 1 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let k = delays.iter().copied().max().unwrap_or(0);
    if horizon <= k {
        return Err(invalid(
            "horizon",
            format!("must exceed the largest delay {k}"),
        ));
    }
    let top = k + horizon + 1;
    let q: Vec<f64> = spec.q_prefix(top).into_iter().map(Scalar::as_f64).collect();
    let pairs = delays.len() - 1;

    let tally = (0..reps)
        .into_par_iter()
        .fold(
            || Tally::new(pairs, horizon),
            |mut acc, rep| {
                let mut rng = substream(seed, rep, Role::Marks);
                let mut state = CouplingState::new(delays);
                let mut tau: Vec<Option<usize>> = vec![None; pairs];
                let mut t_all = None;
                for j in 1..=horizon {
                    state.step(rng.gen(), |z| q[z]);
                    if state.zeta[0] == 0 {
                        for (i, t) in tau.iter_mut().enumerate() {
                            if t.is_none() && state.zeta[i + 1] == 0 {
                                *t = Some(j);
                            }
                        }
                    }
                    if t_all.is_some() && !state.coalesced() {
                        acc.violations += 1;
                    }
                    if t_all.is_none() && state.all_renewed() {
                        t_all = Some(j);
                    }
                }
                for (counts, &t) in acc.tau.iter_mut().zip(&tau) {
                    survive(counts, t);
                }
                survive(&mut acc.t_all, t_all);
                // #{j in 1..=k : T >= j + 1}
                let x = t_all.map_or(k, |t| (t - 1).min(k)) as f64;
                acc.shifted_sum += x;
                acc.shifted_sq += x * x;
                acc
            },
        )
        .reduce(|| Tally::new(pairs, horizon), Tally::merge);

    let tau = tally
        .tau
        .iter()
        .zip(&delays[1..])
        .map(|(counts, &delay)| {
            SimReport::from_counts(SimTarget::Tau { delay, horizon }, seed, reps, 1, counts)
        })
        .collect();
    let t_all = SimReport::from_counts(SimTarget::Tk { k, horizon }, seed, reps, 1, &tally.t_all);
    let n = reps as f64;
    let sum_plain: f64 = t_all.points.iter().take(k).map(|p| p.estimate).sum();
    let mean = tally.shifted_sum / n;
    let var = (tally.shifted_sq / n - mean * mean).max(0.0);
    let se_mean = (var / n).sqrt();
    Ok(CouplingReport {
        delays: delays.to_vec(),
        horizon,
        tau,
        t_all,
        k,
        ck_empirical: sum_plain * sum_plain,
        ck_empirical_shifted: mean * mean,
        ck_shifted_std_error: 2.0 * mean * se_mean,
        coalescence_violations: tally.violations,
    })
}
