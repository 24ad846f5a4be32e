//! Lemma-level inequalities as oracles, seeded randomized suites, and the
//! orbit-visit checker.

mod oracles;
mod visits;

pub use oracles::{oracle_abel, oracle_lacunary_asymptotic, oracle_power_sum_bound, AsymptoticProbe, ProbeSequence};
pub use visits::{check_visit, check_visits, negative_control, VISIT_SAMPLES};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::PrefixSet;
use crate::error::Result;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_SUITE_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub holds: bool,
    /// `lhs - rhs`.
    pub margin: f64,
    /// Description of the instance when the inequality fails.
    pub witness: Option<String>,
}

/// Summary of a seeded randomized suite. Instance `i` draws from the ChaCha8
/// stream `i` of the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub master_seed: u64,
    pub instances: usize,
    pub violations: usize,
    pub min_margin: f64,
    pub first_violation: Option<(usize, String)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn instance_rng(master_seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(i as u64);
    rng
}

fn run_suite(
    name: &str,
    master_seed: u64,
    instances: usize,
    one: impl Fn(&mut ChaCha8Rng) -> Result<OracleVerdict> + Sync,
) -> Result<SuiteReport> {
    let verdicts = (0..instances)
        .into_par_iter()
        .map(|i| one(&mut instance_rng(master_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let first_violation = verdicts
        .iter()
        .enumerate()
        .find(|(_, v)| !v.holds)
        .map(|(i, v)| (i, v.witness.clone().unwrap_or_default()));
    Ok(SuiteReport {
        name: name.to_string(),
        master_seed,
        instances,
        violations: verdicts.iter().filter(|v| !v.holds).count(),
        min_margin: verdicts.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min),
        first_violation,
    })
}

/// Random `A ⊂ {1..N}`, `N <= 10^4`, `gamma in [-0.9, 3]`.
pub fn power_sum_suite(master_seed: u64, instances: usize) -> Result<SuiteReport> {
    run_suite("power_sum_bound", master_seed, instances, |rng| {
        let n = rng.gen_range(1..=10_000u64);
        let p = rng.gen_range(0.0..=1.0);
        let set = PrefixSet::from_predicate(n, |_| rng.gen_bool(p));
        let gamma = rng.gen_range(-0.9..=3.0);
        oracle_power_sum_bound(&set, n, gamma)
    })
}

/// Random nonnegative `u`, nonincreasing `v`, length `<= 2000`.
pub fn abel_suite(master_seed: u64, instances: usize) -> Result<SuiteReport> {
    run_suite("abel_transform", master_seed, instances, |rng| {
        let len = rng.gen_range(2..=2000usize);
        let u: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..10.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let count = rng.gen_range(2..=len.min(40));
        let mut idx = rand::seq::index::sample(rng, len, count).into_vec();
        idx.iter_mut().for_each(|i| *i += 1);
        idx.sort_unstable();
        let l = rng.gen_range(1..count);
        oracle_abel(&u, &v, &idx, l)
    })
}

/// Ratios of the lacunary probe at `r = 1 - 2^{-j}`.
pub fn lacunary_ratios(probe: &AsymptoticProbe, js: &[u32]) -> Result<Vec<(u32, f64)>> {
    js.iter()
        .map(|&j| Ok((j, oracle_lacunary_asymptotic(probe, 1.0 - (-(j as f64)).exp2())?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_reproducible() {
        let a = power_sum_suite(DEFAULT_SEED, DEFAULT_SUITE_SIZE).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.instances, 1000);
        let b = abel_suite(DEFAULT_SEED, DEFAULT_SUITE_SIZE).unwrap();
        assert!(b.passed(), "{b:?}");
        assert_eq!(abel_suite(DEFAULT_SEED, 50).unwrap(), abel_suite(DEFAULT_SEED, 50).unwrap());
        assert_ne!(abel_suite(1, 50).unwrap().min_margin, abel_suite(2, 50).unwrap().min_margin);
    }
}
