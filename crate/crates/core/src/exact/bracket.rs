use serde::Serialize;

use super::bounds::{concentration_terms, iid_terms};
use super::gf::GfTable;
use crate::error::{invalid, Result};
use crate::radius::RadiusModel;
use crate::renewal::QSequence;
use crate::scalar::Scalar;

/// Secondary horizon (as a multiple of `N`) for summing concentration terms.
pub const SECONDARY_HORIZON_FACTOR: usize = 4;

/// How the tail `sum_{n>N} S_n` is bounded for the lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    Concentration,
    GeometricExtrapolation,
    None,
}

/// Interval `[lo, hi]` containing the percolation probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationBracket<T> {
    pub lo: T,
    pub hi: T,
    pub horizon: usize,
    /// Method that produced `lo`; differs from the request after a fallback.
    pub tail_method: TailMethod,
    /// Upper estimate of `sum_{n>N} S_n`, `None` when no finite one exists.
    pub tail_upper: Option<T>,
    /// True iff `lo` rests on a rigorous tail bound.
    pub certified: bool,
    pub warnings: Vec<String>,
}

impl<T: Scalar> PercolationBracket<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, p: T) -> bool {
        self.lo <= p && p <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketOptions {
    pub tail: TailMethod,
    /// Concentration terms are summed up to `factor * N`.
    pub secondary_factor: usize,
}

impl Default for BracketOptions {
    fn default() -> Self {
        Self {
            tail: TailMethod::Concentration,
            secondary_factor: SECONDARY_HORIZON_FACTOR,
        }
    }
}

/// Conservative extrapolation of `sum_{n>N} t_n` from the last decade of a
/// nonincreasing sequence `terms[0..=N]`.
///
/// Fits both a geometric rate and a local power law over `[N/10, N]` and
/// returns the larger tail. Returns `None` when the local power exponent is at
/// most one, i.e. the terms do not look summable.
pub fn extrapolate_tail<T: Scalar>(terms: &[T]) -> Option<T> {
    let n = terms.len().checked_sub(1)?;
    let last = terms[n];
    if last == T::zero() {
        return Some(T::zero());
    }
    let start = (n / 10).max(1);
    if start >= n {
        return None;
    }
    let first = terms[start];
    let span = T::from_usize_lossy(n - start);
    let exponent = (first / last).ln() / (T::from_usize_lossy(n) / T::from_usize_lossy(start)).ln();
    if !(exponent > T::one()) {
        return None;
    }
    let power = last * T::from_usize_lossy(n) / (exponent - T::one());
    let rate = (last / first).powf(T::one() / span);
    let geometric = if rate < T::one() {
        last * rate / (T::one() - rate)
    } else {
        T::infinity()
    };
    let tail = power.max(geometric);
    tail.is_finite().then_some(tail)
}

struct Endpoint<T> {
    lo: T,
    tail_upper: Option<T>,
    method: TailMethod,
    certified: bool,
}

fn from_tail<T: Scalar>(
    partial: T,
    tail: Option<T>,
    method: TailMethod,
    certified: bool,
) -> Endpoint<T> {
    match tail {
        Some(t) => Endpoint {
            lo: T::one() / (T::one() + partial + t),
            tail_upper: Some(t),
            method,
            certified,
        },
        None => Endpoint {
            lo: T::zero(),
            tail_upper: None,
            method,
            certified: false,
        },
    }
}

fn extrapolated<T: Scalar>(terms: &[T], partial: T, warnings: &mut Vec<String>) -> Endpoint<T> {
    let tail = extrapolate_tail(terms);
    if tail.is_none() {
        warnings.push("terms do not decay at the horizon; lower endpoint set to 0".into());
    }
    from_tail(partial, tail, TailMethod::GeometricExtrapolation, false)
}

/// Concentration tail `sum_{N<n<=M} B_n` plus an extrapolated remainder past `M`.
///
/// Returns the tail and whether it is rigorous (remainder exactly zero).
pub(crate) fn concentration_tail<T: Scalar>(
    b: &[T],
    horizon: usize,
    warnings: &mut Vec<String>,
) -> Option<(T, bool)> {
    let secondary = b.len() - 1;
    let inner: T = b[horizon + 1..].iter().copied().sum();
    let last = b[secondary];
    if last == T::zero() {
        return Some((inner, true));
    }
    let window = &b[secondary / 2..];
    let peak = window.iter().copied().fold(T::zero(), T::max);
    if last >= window[0] || !inner.is_finite() {
        warnings.push("concentration terms do not decay; lower endpoint set to 0".into());
        return None;
    }
    let span = (T::from_usize_lossy(secondary) / T::from_usize_lossy(secondary / 2)).ln();
    let exponent = (window[0] / last).ln() / span;
    if !(exponent > T::one()) || peak > window[0] {
        warnings.push("concentration terms do not decay summably; lower endpoint set to 0".into());
        return None;
    }
    let remainder = last * T::from_usize_lossy(secondary) / (exponent - T::one());
    warnings.push(format!(
        "concentration remainder beyond secondary horizon {secondary} extrapolated (power {:.3})",
        exponent.as_f64()
    ));
    Some((inner + remainder, false))
}

/// Two-sided bracket on `P(A) = (1 + sum_n S_n)^{-1}` from `S_1..S_N`.
pub fn percolation_probability<T: Scalar>(
    gf: &GfTable<T>,
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    tail: TailMethod,
) -> Result<PercolationBracket<T>> {
    percolation_probability_with(
        gf,
        spec,
        model,
        BracketOptions {
            tail,
            ..BracketOptions::default()
        },
    )
}

pub fn percolation_probability_with<T: Scalar>(
    gf: &GfTable<T>,
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    opts: BracketOptions,
) -> Result<PercolationBracket<T>> {
    if opts.secondary_factor < 1 {
        return Err(invalid("secondary_factor", "must be at least 1"));
    }
    let n = gf.horizon;
    let partial = gf.partial_sum;
    let hi = T::one() / (T::one() + partial);
    let mut warnings = Vec::new();
    // S is nonincreasing and nonnegative, so S_N = 0 ends the series exactly.
    let end = if gf.last() == T::zero() {
        Endpoint {
            lo: hi,
            tail_upper: Some(T::zero()),
            method: opts.tail,
            certified: true,
        }
    } else {
        match opts.tail {
            TailMethod::None => from_tail(partial, None, TailMethod::None, false),
            TailMethod::GeometricExtrapolation => extrapolated(&gf.s, partial, &mut warnings),
            TailMethod::Concentration => {
                if model.is_defective() {
                    warnings.push(
                        "concentration bound undefined for infinite radius; extrapolating".into(),
                    );
                    extrapolated(&gf.s, partial, &mut warnings)
                } else {
                    let conc = concentration_terms(spec, model, n * opts.secondary_factor)?;
                    match concentration_tail(&conc.b, n, &mut warnings) {
                        Some((t, rigorous)) => {
                            from_tail(partial, Some(t), TailMethod::Concentration, rigorous)
                        }
                        None => from_tail(partial, None, TailMethod::Concentration, false),
                    }
                }
            }
        }
    };
    Ok(PercolationBracket {
        lo: end.lo.min(hi),
        hi,
        horizon: n,
        tail_method: end.method,
        tail_upper: end.tail_upper,
        certified: end.certified,
        warnings,
    })
}

/// Closed form for i.i.d. marks with `P(xi_i = 1) = p`:
/// `S_n = prod_{i<n} [1 - p (1 - alpha_i)]`.
pub fn iid_closed_form<T: Scalar>(
    p: T,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<PercolationBracket<T>> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(invalid("p", format!("{p} must lie in (0, 1]")));
    }
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let terms = iid_terms(p, model, horizon);
    let partial: T = terms[1..].iter().copied().sum();
    let hi = T::one() / (T::one() + partial);
    let mut warnings = Vec::new();
    let end = extrapolated(&terms, partial, &mut warnings);
    let certified = end.tail_upper == Some(T::zero());
    Ok(PercolationBracket {
        lo: end.lo.min(hi),
        hi,
        horizon,
        tail_method: TailMethod::GeometricExtrapolation,
        tail_upper: end.tail_upper,
        certified,
        warnings,
    })
}
