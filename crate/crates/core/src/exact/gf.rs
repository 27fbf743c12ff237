use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::radius::RadiusModel;
use crate::renewal::{renewal_convolve, QSequence};
use crate::scalar::Scalar;

/// Partial generating-function series `S_0..S_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GfTable<T> {
    /// `S_n` for `n = 0..=horizon`, with `S_0 = 1`.
    pub s: Vec<T>,
    pub horizon: usize,
    /// `sum_{n=1}^{N} S_n`.
    pub partial_sum: T,
}

impl<T: Scalar> GfTable<T> {
    pub fn last(&self) -> T {
        self.s[self.horizon]
    }
}

/// Forward recursion over the house-of-cards state.
///
/// Masses are keyed by the time of the last renewal, so the state of an entry
/// is `i - r`. A step sends `w (1 - q_state) alpha_i` to a new renewal and keeps
/// `w q_state` in place; `S_{i+1}` is the total mass. Leading entries that have
/// underflowed to exactly zero stay zero and are dropped.
pub fn gf_partial<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<GfTable<T>> {
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let qs = spec.q_prefix(horizon);
    let mut mass: VecDeque<T> = VecDeque::with_capacity(1024);
    mass.push_back(T::one());
    // last-renewal time of mass[0]
    let mut first = 0usize;
    let mut s = Vec::with_capacity(horizon + 1);
    s.push(T::one());
    for i in 0..horizon {
        let mut renew = T::zero();
        let mut stay = T::zero();
        for (offset, w) in mass.iter_mut().enumerate() {
            let state = i - (first + offset);
            let q = qs[state];
            renew += *w * (T::one() - q);
            *w *= q;
            stay += *w;
        }
        let fresh = renew * model.alpha(i);
        mass.push_back(fresh);
        while mass.len() > 1 && mass[0] == T::zero() {
            mass.pop_front();
            first += 1;
        }
        let prev = s[i];
        s.push((stay + fresh).min(prev));
    }
    let partial_sum = s[1..].iter().copied().sum();
    Ok(GfTable {
        s,
        horizon,
        partial_sum,
    })
}

/// Inter-arrival law and occupancy of the dual renewal process `Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualLaw<T> {
    /// `f_k = P(T_Y = k)` for `k = 1..=N` (index 0 holds `k = 1`).
    pub f: Vec<T>,
    /// `v_n = P(Y_n = 1)` for `n = 0..=v_horizon`.
    pub v: Vec<T>,
    /// `1 + sum_{n=1}^N S_n`, a lower bound on `E T_Y`.
    pub mean_partial: T,
}

/// Dual law over the full horizon of `gf`.
pub fn dual_law<T: Scalar>(
    gf: &GfTable<T>,
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
) -> Result<DualLaw<T>> {
    dual_law_to(gf, spec, model, gf.horizon)
}

/// Dual law with the occupancy sequence truncated at `v_horizon <= N`.
///
/// `f_k = S_{k-1} - S_k`; `v` solves the renewal equation with pmf `f`, which
/// costs `O(v_horizon * N)`.
pub fn dual_law_to<T: Scalar>(
    gf: &GfTable<T>,
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    v_horizon: usize,
) -> Result<DualLaw<T>> {
    let f: Vec<T> =
        gf.s.windows(2)
            .map(|w| (w[0] - w[1]).max(T::zero()))
            .collect();
    let closed = (T::one() - spec.q_at(0)) * (T::one() - model.alpha(0));
    let tol = T::consistency_tol();
    if (f[0] - closed).abs() > tol {
        return Err(Error::Inconsistent {
            what: "P(T_Y = 1) against (1 - q_0)(1 - alpha_0)",
            lhs: f[0].as_f64(),
            rhs: closed.as_f64(),
            tol: tol.as_f64(),
        });
    }
    let v_horizon = v_horizon.min(gf.horizon);
    let v = renewal_convolve(&f, v_horizon);
    Ok(DualLaw {
        f,
        v,
        mean_partial: T::one() + gf.partial_sum,
    })
}
