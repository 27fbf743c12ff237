//! Exhaustive enumeration on tiny instances.
//!
//! Ground truth for the dynamic programs and the simulator. Nothing here calls
//! into `exact`: path probabilities, coverage and propagation are recomputed
//! from the model definitions.

use crate::error::{invalid, Error, Result};
use crate::radius::RadiusModel;
use crate::renewal::QSequence;
use crate::scalar::Scalar;

/// Default limit on weighted terms visited by one enumeration.
pub const ENUMERATION_CAP: u128 = 100_000_000;

pub const MAX_GF_SITES: usize = 12;
pub const MAX_CONNECTIVITY_SITES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TinyConfig<T> {
    pub spec: QSequence<T>,
    pub model: RadiusModel<T>,
    pub n: usize,
    pub cap: u128,
}

impl<T: Scalar> TinyConfig<T> {
    pub fn new(spec: QSequence<T>, model: RadiusModel<T>, n: usize) -> Self {
        Self {
            spec,
            model,
            n,
            cap: ENUMERATION_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    fn check(&self, requested: u128) -> Result<()> {
        if requested > self.cap {
            return Err(Error::EnumerationCap {
                requested,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Radius values enumerated at a site whose interval matters up to `limit`:
    /// `0..limit` individually and `limit` standing for `R >= limit`.
    fn radius_choices(&self, limit: usize) -> Vec<(usize, T)> {
        let top = match self.model.support_bound() {
            Some(m) => m.min(limit),
            None => limit,
        };
        let mut out: Vec<(usize, T)> = (0..top).map(|r| (r, self.model.pmf(r))).collect();
        let rest = if top == 0 {
            T::one()
        } else {
            self.model.tail(top - 1)
        };
        out.push((top, rest));
        out.retain(|&(_, p)| p > T::zero());
        out
    }
}

/// `P(xi_1 = x_1, ..., xi_k = x_k | xi_0 = 1)` by walking the house-of-cards chain.
pub fn path_probability<T: Scalar>(spec: &QSequence<T>, x: &[bool]) -> T {
    let mut height = 0usize;
    let mut p = T::one();
    for &mark in x {
        let q = spec.q_at(height);
        if mark {
            p *= T::one() - q;
            height = 0;
        } else {
            p *= q;
            height += 1;
        }
    }
    p
}

fn bits(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| v >> i & 1 == 1).collect()
}

/// `S_0..S_n` as the generating function of `(xi_1, ..., xi_n)` at `(alpha_0, ..., alpha_{n-1})`.
pub fn enumerate_gf<T: Scalar>(cfg: &TinyConfig<T>) -> Result<Vec<T>> {
    let n = cfg.n;
    if n > MAX_GF_SITES {
        return Err(invalid(
            "n",
            format!("{n} exceeds {MAX_GF_SITES} for generating-function enumeration"),
        ));
    }
    cfg.check(1u128 << n)?;
    let mut s = vec![T::zero(); n + 1];
    for v in 0..1u64 << n {
        let x = bits(v, n);
        let weight = path_probability(&cfg.spec, &x);
        s[0] += weight;
        let mut prod = weight;
        for (i, &mark) in x.iter().enumerate() {
            if mark {
                prod *= cfg.model.alpha(i);
            }
            s[i + 1] += prod;
        }
    }
    Ok(s)
}

/// Visits every radius assignment, one choice list per marked site.
fn for_each_radii<T: Scalar>(choices: &[Vec<(usize, T)>], f: &mut impl FnMut(&[usize], T)) {
    fn go<T: Scalar>(
        choices: &[Vec<(usize, T)>],
        depth: usize,
        radii: &mut Vec<usize>,
        weight: T,
        f: &mut impl FnMut(&[usize], T),
    ) {
        if depth == choices.len() {
            f(radii, weight);
            return;
        }
        for &(r, p) in &choices[depth] {
            radii.push(r);
            go(choices, depth + 1, radii, weight * p, f);
            radii.pop();
        }
    }
    go(
        choices,
        0,
        &mut Vec::with_capacity(choices.len()),
        T::one(),
        f,
    );
}

fn weighted_terms<T: Scalar>(
    cfg: &TinyConfig<T>,
    limit: impl Fn(usize) -> usize,
    sites: std::ops::Range<usize>,
) -> u128 {
    let first = sites.start;
    sites
        .map(|l| {
            let c = cfg.radius_choices(limit(l)).len() as u128;
            if l == 0 && first == 0 {
                c
            } else {
                c + 1
            }
        })
        .product()
}

fn check_connectivity_size<T: Scalar>(cfg: &TinyConfig<T>) -> Result<()> {
    if cfg.n > MAX_CONNECTIVITY_SITES {
        return Err(invalid(
            "n",
            format!(
                "{} exceeds {MAX_CONNECTIVITY_SITES} for connectivity enumeration",
                cfg.n
            ),
        ));
    }
    Ok(())
}

/// `P(0 <-> n)`: `xi_n = 1` and every site of `1..=n` lies in an interval
/// `{l + 1, ..., l + R_l}` opened at a marked `l < n`.
pub fn enumerate_connectivity<T: Scalar>(cfg: &TinyConfig<T>) -> Result<T> {
    check_connectivity_size(cfg)?;
    let n = cfg.n;
    if n == 0 {
        return Ok(T::one());
    }
    cfg.check(weighted_terms(cfg, |l| n - l, 0..n))?;
    let mut total = T::zero();
    // xi_1..xi_{n-1} free, xi_n = 1
    for v in 0..1u64 << (n - 1) {
        let mut x = bits(v, n - 1);
        x.push(true);
        let weight = path_probability(&cfg.spec, &x);
        if weight == T::zero() {
            continue;
        }
        let marked: Vec<usize> = std::iter::once(0)
            .chain((1..n).filter(|&l| x[l - 1]))
            .collect();
        let choices: Vec<_> = marked.iter().map(|&l| cfg.radius_choices(n - l)).collect();
        let mut covered = vec![false; n + 1];
        for_each_radii(&choices, &mut |radii, p| {
            covered.iter_mut().for_each(|c| *c = false);
            for (&l, &r) in marked.iter().zip(radii) {
                for c in &mut covered[l + 1..=(l + r).min(n)] {
                    *c = true;
                }
            }
            if covered[1..].iter().all(|&c| c) {
                total += weight * p;
            }
        });
    }
    Ok(total)
}

/// `P(Y_n = 1)` for the dual process: marked site `k` is informed when
/// `{k - R_k, ..., k - 1}` contains an informed site.
pub fn enumerate_dual<T: Scalar>(cfg: &TinyConfig<T>) -> Result<T> {
    check_connectivity_size(cfg)?;
    let n = cfg.n;
    if n == 0 {
        return Ok(T::one());
    }
    cfg.check(weighted_terms(cfg, |k| k, 1..n + 1))?;
    let mut total = T::zero();
    for v in 0..1u64 << (n - 1) {
        let mut x = bits(v, n - 1);
        x.push(true);
        let weight = path_probability(&cfg.spec, &x);
        if weight == T::zero() {
            continue;
        }
        let marked: Vec<usize> = (1..=n).filter(|&k| x[k - 1]).collect();
        let choices: Vec<_> = marked.iter().map(|&k| cfg.radius_choices(k)).collect();
        let mut informed = vec![false; n + 1];
        for_each_radii(&choices, &mut |radii, p| {
            informed.iter_mut().for_each(|c| *c = false);
            informed[0] = true;
            for (&k, &r) in marked.iter().zip(radii) {
                informed[k] = informed[k - r..k].iter().any(|&b| b);
            }
            if informed[n] {
                total += weight * p;
            }
        });
    }
    Ok(total)
}
