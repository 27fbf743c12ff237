use rand::Rng;
use rayon::prelude::*;

use super::{add_counts, substream, Role, SimReport, SimTarget};
use crate::error::{invalid, Result};
use crate::radius::{Radius, RadiusModel};
use crate::renewal::{advance, QSequence};
use crate::scalar::Scalar;

/// One replicate: marks `xi_0..xi_n` and radii at marked sites (`None` elsewhere).
struct Sample {
    xi: Vec<bool>,
    radius: Vec<Option<Radius>>,
}

fn draw<T: Scalar>(q: &[f64], model: &RadiusModel<T>, n: usize, seed: u64, rep: u64) -> Sample {
    let mut marks = substream(seed, rep, Role::Marks);
    let mut radii = substream(seed, rep, Role::Radii);
    let mut xi = Vec::with_capacity(n + 1);
    let mut radius = Vec::with_capacity(n + 1);
    let mut state = 0usize;
    for site in 0..=n {
        if site > 0 {
            state = advance(state, marks.gen(), q[state]);
        }
        let marked = state == 0;
        xi.push(marked);
        radius.push(marked.then(|| model.sample_from_uniform(radii.gen())));
    }
    Sample { xi, radius }
}

fn run<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    n: usize,
    reps: u64,
    seed: u64,
    score: impl Fn(&Sample, &mut [u64]) + Sync,
) -> Result<Vec<u64>> {
    if reps < 1 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let q: Vec<f64> = spec
        .q_prefix(n + 1)
        .into_iter()
        .map(Scalar::as_f64)
        .collect();
    Ok((0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut acc, rep| {
                let sample = draw(&q, model, n, seed, rep);
                score(&sample, &mut acc);
                acc
            },
        )
        .reduce(|| vec![0u64; n + 1], add_counts))
}

/// `[0 <-> k for k in 0..=n]`: `xi_k = 1` and the running reach
/// `max { l + R_l : l < s, xi_l = 1 }` is at least `s` for every `1 <= s <= k`.
fn connected(s: &Sample, n: usize) -> Vec<bool> {
    let mut out = vec![false; n + 1];
    out[0] = true;
    let mut reach = 0u64;
    for k in 1..=n {
        if let Some(r) = s.radius[k - 1] {
            reach = reach.max(r.reach_from(k as u64 - 1));
        }
        if reach < k as u64 {
            break;
        }
        out[k] = s.xi[k];
    }
    out
}

/// `[Y_k = 1 for k in 0..=n]`: a marked site is informed when its radius
/// reaches back to the last informed site.
fn informed(s: &Sample, n: usize) -> Vec<bool> {
    let mut out = vec![false; n + 1];
    out[0] = true;
    let mut last = 0usize;
    for k in 1..=n {
        if let Some(r) = s.radius[k] {
            if r.covers_gap((k - last) as u64) {
                last = k;
                out[k] = true;
            }
        }
    }
    out
}

fn tally(flags: Vec<bool>, acc: &mut [u64]) {
    for (a, f) in acc.iter_mut().zip(flags) {
        *a += u64::from(f);
    }
}

/// Connectivity outcomes of replicate `rep`, as used by [`simulate_connectivity`].
pub fn connectivity_replicate<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    n: usize,
    seed: u64,
    rep: u64,
) -> Vec<bool> {
    let q: Vec<f64> = spec
        .q_prefix(n + 1)
        .into_iter()
        .map(Scalar::as_f64)
        .collect();
    connected(&draw(&q, model, n, seed, rep), n)
}

/// Estimates `P(0 <-> k)` for every `k <= n` in a single pass per replicate.
pub fn simulate_connectivity<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<SimReport> {
    let counts = run(spec, model, n, reps, seed, |s, acc| {
        tally(connected(s, n), acc)
    })?;
    Ok(SimReport::from_counts(
        SimTarget::Connectivity { n },
        seed,
        reps,
        0,
        &counts,
    ))
}

/// Estimates `P(Y_k = 1)` for every `k <= n` in a single pass per replicate.
pub fn simulate_dual<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<SimReport> {
    let counts = run(spec, model, n, reps, seed, |s, acc| {
        tally(informed(s, n), acc)
    })?;
    Ok(SimReport::from_counts(
        SimTarget::Dual { n },
        seed,
        reps,
        0,
        &counts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_never_connects() {
        let spec = QSequence::constant(0.3).unwrap();
        let model = RadiusModel::table(vec![1.0]).unwrap();
        let c = simulate_connectivity(&spec, &model, 5, 2_000, 1).unwrap();
        let d = simulate_dual(&spec, &model, 5, 2_000, 1).unwrap();
        for k in 1..=5 {
            assert_eq!(c.at(k).unwrap().successes, 0);
            assert_eq!(d.at(k).unwrap().successes, 0);
        }
        assert_eq!(d.at(0).unwrap().estimate, 1.0);
    }

    #[test]
    fn first_site_closed_form() {
        let spec = QSequence::constant(0.5).unwrap();
        let model = RadiusModel::geometric_tail(0.5).unwrap();
        let r = simulate_connectivity(&spec, &model, 1, 20_000, 11).unwrap();
        let p = r.at(1).unwrap();
        assert!(p.wilson_lo <= 0.5 && 0.5 <= p.wilson_hi);
    }

    #[test]
    fn reports_are_reproducible() {
        let spec = QSequence::markov(0.3, 0.6).unwrap();
        let model = RadiusModel::table(vec![0.0, 0.5, 0.5]).unwrap();
        let a = simulate_connectivity(&spec, &model, 6, 5_000, 42).unwrap();
        let b = simulate_connectivity(&spec, &model, 6, 5_000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_connectivity(&spec, &model, 6, 5_000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn larger_radii_dominate_pathwise() {
        let spec = QSequence::markov(0.4, 0.7).unwrap();
        let small = RadiusModel::geometric_tail(0.4).unwrap();
        let large = RadiusModel::geometric_tail(0.7).unwrap();
        for rep in 0..500 {
            let a = connectivity_replicate(&spec, &small, 12, 9, rep);
            let b = connectivity_replicate(&spec, &large, 12, 9, rep);
            assert!(a.iter().zip(&b).all(|(&x, &y)| !x || y));
        }
    }

    #[test]
    fn infinite_radius_connects_whenever_marked() {
        let spec = QSequence::constant(0.5).unwrap();
        let model = RadiusModel::infinite();
        let c = simulate_connectivity(&spec, &model, 10, 1_000, 5).unwrap();
        let d = simulate_dual(&spec, &model, 10, 1_000, 5).unwrap();
        for k in 0..=10 {
            assert_eq!(c.at(k).unwrap().successes, d.at(k).unwrap().successes);
        }
    }
}
