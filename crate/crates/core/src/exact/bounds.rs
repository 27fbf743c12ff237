use serde::Serialize;

use super::bracket::{concentration_tail, iid_closed_form, PercolationBracket};
use crate::error::{invalid, Error, Result};
use crate::radius::RadiusModel;
use crate::renewal::{ck_from_qstar, renewal_probabilities, QSequence};
use crate::scalar::{LogProduct, Scalar};

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    Ok(())
}

fn products<T: Scalar>(
    horizon: usize,
    mut factor: impl FnMut(usize, &mut LogProduct<T>),
) -> Vec<T> {
    let mut acc = LogProduct::one();
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(T::one());
    for i in 0..horizon {
        factor(i, &mut acc);
        out.push(acc.value());
    }
    out
}

/// `J_n = prod_{i<n} alpha_i^{u_{i+1}}`, a lower bound on `S_n`.
pub fn jensen_terms<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Vec<T> {
    let u = renewal_probabilities(spec, horizon).u;
    products(horizon, |i, acc| acc.mul_pow(model.alpha(i), u[i + 1]))
}

/// `F_n = prod_{i<n} [1 - u_{i+1} (1 - alpha_i)]`, a lower bound on `S_n` for
/// nondecreasing `q`.
pub fn fkg_terms<T: Scalar>(spec: &QSequence<T>, model: &RadiusModel<T>, horizon: usize) -> Vec<T> {
    let u = renewal_probabilities(spec, horizon).u;
    products(horizon, |i, acc| {
        acc.mul(T::one() - u[i + 1] * model.tail(i))
    })
}

/// `prod_{i<n} [1 - p (1 - alpha_i)]`, equal to `S_n` for i.i.d. marks.
pub fn iid_terms<T: Scalar>(p: T, model: &RadiusModel<T>, horizon: usize) -> Vec<T> {
    products(horizon, |i, acc| acc.mul(T::one() - p * model.tail(i)))
}

/// FKG upper bound `(1 + sum_{n<=N} F_n)^{-1}` on `P(A)`.
pub fn fkg_upper<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<T> {
    check_horizon(horizon)?;
    if let Some(index) = spec.first_decrease(horizon) {
        return Err(Error::NotMonotone {
            index,
            next: index + 1,
        });
    }
    let terms = fkg_terms(spec, model, horizon);
    Ok(reciprocal(&terms))
}

fn reciprocal<T: Scalar>(terms: &[T]) -> T {
    T::one() / (T::one() + terms[1..].iter().copied().sum::<T>())
}

/// Upper bounds `B_n >= S_n` from the concentration inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationTerms<T> {
    /// `B_0..B_M` with `B_0 = 1`.
    pub b: Vec<T>,
    /// Variance constant `K_n` used for `B_n` (index 0 unused).
    pub k: Vec<T>,
}

/// Fenwick tree of `(sum u X, sum X^2, sum u^2)` over sites ranked by `kappa = u / (2X)`.
struct Fenwick<T> {
    sums: Vec<[T; 3]>,
}

impl<T: Scalar> Fenwick<T> {
    fn new(n: usize) -> Self {
        Self {
            sums: vec![[T::zero(); 3]; n + 1],
        }
    }

    fn add(&mut self, rank: usize, v: [T; 3]) {
        let mut i = rank + 1;
        while i < self.sums.len() {
            for (acc, x) in self.sums[i].iter_mut().zip(v) {
                *acc += x;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Sums over ranks `< rank`.
    fn prefix(&self, rank: usize) -> [T; 3] {
        let mut out = [T::zero(); 3];
        let mut i = rank;
        while i > 0 {
            for (acc, x) in out.iter_mut().zip(self.sums[i]) {
                *acc += x;
            }
            i -= i & i.wrapping_neg();
        }
        out
    }
}

/// `B_n = min_x exp(-sum_{i<n} u_{i+1} x_i + K_n sum_{i<n} x_i^2)` over
/// `0 <= x_i <= -ln alpha_i`, with `K_n = max(C_n, (1 + sqrt C_n)^2 / 8)`.
///
/// Replacing `alpha_i` by `e^{-x_i} >= alpha_i` can only raise `S_n`, so every
/// admissible `x` yields a valid bound; the minimiser is
/// `x_i = min(-ln alpha_i, u_{i+1} / (2 K_n))`. Sites with `alpha_i = 0` are
/// always capped. The minimisation runs in `O(M log M)`.
pub fn concentration_terms<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<ConcentrationTerms<T>> {
    check_horizon(horizon)?;
    let u = renewal_probabilities(spec, horizon).u;
    let qstar = spec.q_star_prefix(2 * horizon);
    let quarter = T::lit(0.25);

    // site i: (u_{i+1}, X_i) with X_i = None for alpha_i = 0
    let sites: Vec<(T, Option<T>)> = (0..horizon)
        .map(|i| (u[i + 1], model.log_alpha(i).map(|l| -l)))
        .collect();
    let mut keyed: Vec<(T, usize)> = sites
        .iter()
        .enumerate()
        .filter_map(|(i, &(ui, x))| match x {
            Some(x) if x > T::zero() && ui > T::zero() => Some((ui / (x + x), i)),
            _ => None,
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite kappa"));
    let mut rank = vec![usize::MAX; horizon];
    for (r, &(_, i)) in keyed.iter().enumerate() {
        rank[i] = r;
    }
    let kappas: Vec<T> = keyed.iter().map(|&(k, _)| k).collect();

    let mut tree = Fenwick::new(kappas.len());
    // sum of u^2 over sites with alpha_i = 0, which are always capped
    let mut uu_unbounded = T::zero();

    let mut b = Vec::with_capacity(horizon + 1);
    let mut k = Vec::with_capacity(horizon + 1);
    b.push(T::one());
    k.push(T::zero());
    for n in 1..=horizon {
        let i = n - 1;
        let (ui, x) = sites[i];
        match x {
            None => uu_unbounded += ui * ui,
            Some(x) if rank[i] != usize::MAX => tree.add(rank[i], [ui * x, x * x, ui * ui]),
            Some(_) => {}
        }
        let c = ck_from_qstar(&qstar, n);
        let root = T::one() + c.sqrt();
        let kn = c.max(root * root / T::lit(8.0));
        // ranks with kappa < K_n are capped at u / (2K)
        let split = kappas.partition_point(|&kap| kap < kn);
        let [ux_capped, xx_capped, uu_capped] = tree.prefix(split);
        let [ux_all, xx_all, _] = tree.prefix(kappas.len());
        let ux_free = ux_all - ux_capped;
        let xx_free = xx_all - xx_capped;
        let exponent = -(uu_capped + uu_unbounded) * quarter / kn - ux_free + kn * xx_free;
        b.push(exponent.min(T::zero()).exp());
        k.push(kn);
    }
    Ok(ConcentrationTerms { b, k })
}

/// Closed-form bounds evaluated to the same horizon as the bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport<T> {
    pub horizon: usize,
    /// `(1 + sum_{n<=N} J_n)^{-1}`; always at least the bracket's `hi`.
    pub jensen_upper: T,
    /// Present only for nondecreasing `q`.
    pub fkg_upper: Option<T>,
    /// `(1 + sum_n B_n)^{-1}`; absent for an infinite radius or nondecaying terms.
    pub concentration_lower: Option<T>,
    /// True iff `concentration_lower` needs no extrapolated remainder.
    pub concentration_certified: bool,
    pub concentration_note: Option<String>,
    /// Exact i.i.d. bracket when the marks are independent.
    pub iid_closed: Option<PercolationBracket<T>>,
}

pub fn bounds_report<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    horizon: usize,
) -> Result<BoundsReport<T>> {
    check_horizon(horizon)?;
    let jensen_upper = reciprocal(&jensen_terms(spec, model, horizon));
    let fkg = match fkg_upper(spec, model, horizon) {
        Ok(v) => Some(v),
        Err(Error::NotMonotone { .. }) => None,
        Err(e) => return Err(e),
    };
    let (concentration_lower, concentration_certified, concentration_note) = if model.is_defective()
    {
        (
            None,
            false,
            Some("log alpha undefined for infinite radius; bound skipped".to_string()),
        )
    } else {
        let conc = concentration_terms(spec, model, horizon * super::SECONDARY_HORIZON_FACTOR)?;
        let head: T = conc.b[1..=horizon].iter().copied().sum();
        let mut notes = Vec::new();
        match concentration_tail(&conc.b, horizon, &mut notes) {
            Some((tail, rigorous)) => (
                Some(T::one() / (T::one() + head + tail)),
                rigorous,
                (!notes.is_empty()).then(|| notes.join("; ")),
            ),
            None => (Some(T::zero()), false, Some(notes.join("; "))),
        }
    };
    let iid_closed = match spec.iid_q() {
        Some(q) if q < T::one() => Some(iid_closed_form(T::one() - q, model, horizon)?),
        _ => None,
    };
    Ok(BoundsReport {
        horizon,
        jensen_upper,
        fkg_upper: fkg,
        concentration_lower,
        concentration_certified,
        concentration_note,
        iid_closed,
    })
}
