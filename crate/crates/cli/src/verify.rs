//! Cross-checks on tiny instances: exhaustive oracle, forward dynamic
//! program, dual law and both simulators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use renewal_percolation::oracle::{enumerate_connectivity, enumerate_dual, TinyConfig};
use renewal_percolation::{
    dual_law, forward_connectivity, gf_partial, simulate_connectivity, simulate_dual, QSequence,
    RadiusModel,
};
use serde::Serialize;

use crate::CliError;

/// Tolerance between exact routes.
pub const EXACT_TOL: f64 = 1e-12;
/// Allowed Monte Carlo deviation in standard errors of the exact value.
pub const MC_SIGMAS: f64 = 4.0;

/// One randomized tiny instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub q: QSequence<f64>,
    pub radius: RadiusModel<f64>,
    pub n: usize,
}

fn q_value<R: Rng>(rng: &mut R) -> f64 {
    // four decimals
    (rng.gen_range(0.0..0.95f64) * 1e4).round() / 1e4
}

/// Draws a random mark law, a radius table on `0..=max_support` and a site
/// index in `1..=max_n`.
pub fn random_instance<R: Rng>(rng: &mut R, max_support: usize, max_n: usize) -> Instance {
    let q = match rng.gen_range(0..4) {
        0 => QSequence::constant(q_value(rng)),
        1 => QSequence::markov(q_value(rng), q_value(rng)),
        2 => QSequence::poly_monotone(
            (rng.gen_range(0.05..0.6f64) * 1e4).round() / 1e4,
            rng.gen_range(2..6),
        ),
        _ => {
            let len = rng.gen_range(1..=6);
            QSequence::table((0..len).map(|_| q_value(rng)).collect())
        }
    }
    .expect("generated q is valid");
    let radius = loop {
        let len = rng.gen_range(1..=max_support + 1);
        let w: Vec<f64> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 1e-3 {
            break RadiusModel::table(w.iter().map(|x| x / total).collect())
                .expect("normalized table");
        }
    };
    Instance {
        q,
        radius,
        n: rng.gen_range(1..=max_n),
    }
}

/// `count` instances from a fixed battery seed.
pub fn battery(seed: u64, count: usize, max_support: usize, max_n: usize) -> Vec<Instance> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(&mut rng, max_support, max_n))
        .collect()
}

/// Results of all five routes on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: usize,
    pub n: usize,
    pub oracle_connectivity: f64,
    pub oracle_dual: f64,
    pub forward_dp: f64,
    pub dual_dp: f64,
    pub mc_connectivity: f64,
    pub mc_dual: f64,
    /// Largest pairwise gap among the four exact routes.
    pub exact_discrepancy: f64,
    /// `|mc - exact| / se(exact)`, 0 when both are exact.
    pub mc_connectivity_z: f64,
    pub mc_dual_z: f64,
    pub pass: bool,
    pub q: String,
    pub radius: String,
}

impl Check {
    /// The failing comparison, if any.
    pub fn failure(&self) -> Option<String> {
        if self.pass {
            return None;
        }
        let mut parts = Vec::new();
        if self.exact_discrepancy > EXACT_TOL {
            parts.push(format!(
                "exact routes disagree by {:.3e} (oracle {}, dual oracle {}, forward {}, dual law {})",
                self.exact_discrepancy, self.oracle_connectivity, self.oracle_dual, self.forward_dp, self.dual_dp
            ));
        }
        if self.mc_connectivity_z > MC_SIGMAS {
            parts.push(format!(
                "connectivity simulation {} vs exact {} ({:.2} se)",
                self.mc_connectivity, self.oracle_connectivity, self.mc_connectivity_z
            ));
        }
        if self.mc_dual_z > MC_SIGMAS {
            parts.push(format!(
                "dual simulation {} vs exact {} ({:.2} se)",
                self.mc_dual, self.oracle_dual, self.mc_dual_z
            ));
        }
        Some(format!(
            "config {} (n={}, q={}, radius={}): {}",
            self.id,
            self.n,
            self.q,
            self.radius,
            parts.join("; ")
        ))
    }
}

fn z_score(estimate: f64, exact: f64, reps: u64) -> f64 {
    let gap = (estimate - exact).abs();
    let se = (exact * (1.0 - exact) / reps as f64).max(0.0).sqrt();
    if gap <= EXACT_TOL {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        gap / se
    }
}

pub fn check_instance(id: usize, inst: &Instance, reps: u64, seed: u64) -> Result<Check, CliError> {
    let tiny = TinyConfig::new(inst.q.clone(), inst.radius.clone(), inst.n);
    let oracle_connectivity = enumerate_connectivity(&tiny)?;
    let oracle_dual = enumerate_dual(&tiny)?;
    let forward_dp = forward_connectivity(&inst.q, &inst.radius, inst.n)?;
    let gf = gf_partial(&inst.q, &inst.radius, inst.n)?;
    let dual_dp = dual_law(&gf, &inst.q, &inst.radius)?.v[inst.n];
    let exact = [oracle_connectivity, oracle_dual, forward_dp, dual_dp];
    let hi = exact.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = exact.iter().copied().fold(f64::INFINITY, f64::min);
    let exact_discrepancy = hi - lo;

    let mc_connectivity = simulate_connectivity(&inst.q, &inst.radius, inst.n, reps, seed)?
        .at(inst.n)
        .expect("point n present")
        .estimate;
    let mc_dual = simulate_dual(&inst.q, &inst.radius, inst.n, reps, seed)?
        .at(inst.n)
        .expect("point n present")
        .estimate;
    let mc_connectivity_z = z_score(mc_connectivity, oracle_connectivity, reps);
    let mc_dual_z = z_score(mc_dual, oracle_dual, reps);
    let pass =
        exact_discrepancy <= EXACT_TOL && mc_connectivity_z <= MC_SIGMAS && mc_dual_z <= MC_SIGMAS;
    Ok(Check {
        id,
        n: inst.n,
        oracle_connectivity,
        oracle_dual,
        forward_dp,
        dual_dp,
        mc_connectivity,
        mc_dual,
        exact_discrepancy,
        mc_connectivity_z,
        mc_dual_z,
        pass,
        q: serde_json::to_string(&inst.q)?,
        radius: serde_json::to_string(&inst.radius)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_reproducible() {
        assert_eq!(battery(3, 10, 4, 8), battery(3, 10, 4, 8));
        for inst in battery(3, 50, 4, 8) {
            assert!((1..=8).contains(&inst.n));
            assert!(inst.radius.support_bound().unwrap() <= 4);
        }
    }

    #[test]
    fn anchored_instance_passes() {
        let inst = Instance {
            q: QSequence::markov(0.3, 0.6).unwrap(),
            radius: RadiusModel::table(vec![0.0, 0.5, 0.5]).unwrap(),
            n: 2,
        };
        let c = check_instance(0, &inst, 20_000, 1).unwrap();
        assert!(c.pass, "{:?}", c.failure());
        assert!((c.forward_dp - 0.55).abs() < 1e-12);
    }

    #[test]
    fn z_score_handles_degenerate_values() {
        assert_eq!(z_score(0.0, 0.0, 100), 0.0);
        assert_eq!(z_score(0.01, 0.0, 100), f64::INFINITY);
        assert!((z_score(0.6, 0.5, 100) - 2.0).abs() < 1e-12);
    }
}
