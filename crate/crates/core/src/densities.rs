//! Weighted densities for the weights `beta^gamma = (e^{n^gamma})`.
//!
//! All sums are carried in log scale; `e^{n^gamma}` overflows an `f64` near
//! `n = 710` when `gamma = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms per parallel chunk in [`beta_partial_sum`].
const CHUNK: u64 = 1 << 16;
/// Rescale threshold for streaming sums.
const RESCALE: f64 = 600.0;

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSum {
    offset: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            offset: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if self.scaled == 0.0 {
            self.offset = x;
            self.scaled = 1.0;
        } else if x > self.offset + RESCALE {
            self.scaled = self.scaled * (self.offset - x).exp() + 1.0;
            self.offset = x;
        } else {
            self.scaled += (x - self.offset).exp();
        }
    }

    pub fn merge(self, other: LogSum) -> LogSum {
        if other.scaled == 0.0 {
            return self;
        }
        if self.scaled == 0.0 {
            return other;
        }
        let (hi, lo) = if self.offset >= other.offset {
            (self, other)
        } else {
            (other, self)
        };
        LogSum {
            offset: hi.offset,
            scaled: hi.scaled + lo.scaled * (lo.offset - hi.offset).exp(),
        }
    }

    /// `log` of the accumulated sum; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.offset + self.scaled.ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    gamma: f64,
}

impl DensitySpec {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(DensitySpec { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `log beta^gamma_k = k^gamma`.
    #[inline]
    pub fn log_weight(&self, k: u64) -> f64 {
        log_weight(k, self.gamma)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::domain(format!("gamma must lie in [0, 1], got {gamma}")))
    }
}

#[inline]
fn log_weight(k: u64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else if gamma == 1.0 {
        k as f64
    } else {
        (k as f64).powf(gamma)
    }
}

/// Finite set of positive integers up to a horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixSet {
    members: Vec<u64>,
    horizon: u64,
}

impl PrefixSet {
    /// Sorts and deduplicates `members`; all must lie in `[1, horizon]`.
    pub fn new(mut members: Vec<u64>, horizon: u64) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m == 0 || m > horizon) {
            return Err(Error::domain(format!(
                "set member {bad} outside [1, {horizon}]"
            )));
        }
        Ok(PrefixSet { members, horizon })
    }

    pub fn from_predicate(horizon: u64, mut pred: impl FnMut(u64) -> bool) -> Self {
        PrefixSet {
            members: (1..=horizon).filter(|&k| pred(k)).collect(),
            horizon,
        }
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: u64) -> bool {
        self.members.binary_search(&k).is_ok()
    }
}

/// `log sum_{k=1}^n e^{k^gamma}`, summed in fixed chunks merged in order.
pub fn beta_partial_sum(n: u64, gamma: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("partial sum length must be at least 1"));
    }
    check_gamma(gamma)?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<LogSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = LogSum::new();
            for k in c * CHUNK + 1..=((c + 1) * CHUNK).min(n) {
                acc.add(log_weight(k, gamma));
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(LogSum::new(), LogSum::merge).value())
}

/// `log` of the integral-comparison asymptote `(n^{1-gamma}/gamma) e^{n^gamma}`.
pub fn beta_partial_sum_asymptote(n: u64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!(
            "the partial-sum asymptote needs 0 < gamma < 1, got {gamma}"
        )));
    }
    let x = n as f64;
    Ok((1.0 - gamma) * x.ln() - gamma.ln() + x.powf(gamma))
}

/// One prefix ratio with its log-scale numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: u64,
    pub gamma: f64,
    pub ratio: f64,
    pub log_numerator: f64,
    pub log_denominator: f64,
}

/// Prefix ratios of `set` at each checkpoint in one streaming pass.
pub fn density_profile(set: &PrefixSet, gamma: f64, checkpoints: &[u64]) -> Result<Vec<DensityPoint>> {
    check_gamma(gamma)?;
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i]);
    if let Some(&i) = order.first() {
        if checkpoints[i] == 0 {
            return Err(Error::domain("density checkpoint must be at least 1"));
        }
    }
    if let Some(&i) = order.last() {
        if checkpoints[i] > set.horizon {
            return Err(Error::domain(format!(
                "checkpoint {} exceeds the set horizon {}",
                checkpoints[i], set.horizon
            )));
        }
    }
    let mut out = vec![None; checkpoints.len()];
    let mut num = LogSum::new();
    let mut den = LogSum::new();
    let mut members = set.members.iter().peekable();
    let mut k = 0u64;
    for i in order {
        let target = checkpoints[i];
        while k < target {
            k += 1;
            let w = log_weight(k, gamma);
            den.add(w);
            if members.peek() == Some(&&k) {
                num.add(w);
                members.next();
            }
        }
        let (ln, ld) = (num.value(), den.value());
        out[i] = Some(DensityPoint {
            n: target,
            gamma,
            ratio: (ln - ld).exp().min(1.0),
            log_numerator: ln,
            log_denominator: ld,
        });
    }
    Ok(out.into_iter().map(|p| p.expect("every checkpoint visited")).collect())
}

/// `sum_{k <= n, k in E} e^{k^gamma} / sum_{k <= n} e^{k^gamma}`.
pub fn prefix_density(set: &PrefixSet, gamma: f64, n: u64) -> Result<f64> {
    Ok(density_profile(set, gamma, &[n])?[0].ratio)
}

/// `N = 2^j` for `j_min <= j` with `2^j <= horizon`.
pub fn dyadic_checkpoints(j_min: u32, horizon: u64) -> Vec<u64> {
    (j_min..64)
        .map(|j| 1u64 << j)
        .take_while(|&n| n <= horizon)
        .collect()
}

/// Maximum prefix ratio along `N = 2^j`, `j >= j_min`: the finite surrogate
/// of the upper density reported by the tools.
pub fn dyadic_upper_density(set: &PrefixSet, gamma: f64, j_min: u32) -> Result<f64> {
    let checkpoints = dyadic_checkpoints(j_min, set.horizon);
    if checkpoints.is_empty() {
        return Err(Error::domain(format!(
            "no dyadic checkpoint 2^j with j >= {j_min} below horizon {}",
            set.horizon
        )));
    }
    Ok(density_profile(set, gamma, &checkpoints)?
        .iter()
        .map(|p| p.ratio)
        .fold(0.0, f64::max))
}

/// Precomputed log weights and log prefix sums for one `gamma`.
#[derive(Debug, Clone)]
pub struct BetaWeights {
    gamma: f64,
    log_weights: Vec<f64>,
    log_prefix: Vec<f64>,
}

impl BetaWeights {
    pub fn new(gamma: f64, horizon: u64) -> Result<Self> {
        check_gamma(gamma)?;
        let log_weights: Vec<f64> = (1..=horizon).map(|k| log_weight(k, gamma)).collect();
        let mut acc = LogSum::new();
        let log_prefix = log_weights
            .iter()
            .map(|&w| {
                acc.add(w);
                acc.value()
            })
            .collect();
        Ok(BetaWeights {
            gamma,
            log_weights,
            log_prefix,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> u64 {
        self.log_weights.len() as u64
    }

    /// `max_{from <= N <= to}` of the prefix ratio of `set`.
    ///
    /// Between members the numerator is constant and the denominator grows,
    /// so only `from` and the members in range need evaluating.
    pub fn sup_ratio(&self, set: &PrefixSet, from: u64, to: u64) -> Result<f64> {
        if from == 0 || from > to || to > self.horizon() || to > set.horizon {
            return Err(Error::domain(format!(
                "ratio window [{from}, {to}] is not inside [1, {}]",
                self.horizon().min(set.horizon)
            )));
        }
        let mut num = LogSum::new();
        let mut best = f64::NEG_INFINITY;
        let mut checked_from = false;
        for &m in set.members.iter().take_while(|&&m| m <= to) {
            if !checked_from && m > from {
                best = best.max(num.value() - self.log_prefix[from as usize - 1]);
                checked_from = true;
            }
            num.add(self.log_weights[m as usize - 1]);
            if m >= from {
                checked_from = true;
                best = best.max(num.value() - self.log_prefix[m as usize - 1]);
            }
        }
        if !checked_from {
            best = best.max(num.value() - self.log_prefix[from as usize - 1]);
        }
        Ok(best.exp().min(1.0))
    }
}

/// `N ∩ ⋃_{n > floor(1/gamma)} [2^n - floor(2^{n(1-gamma)}), 2^n]` up to `horizon`.
pub fn separating_set(gamma: f64, horizon: u64) -> Result<PrefixSet> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!(
            "separating set needs 0 < gamma <= 1, got {gamma}"
        )));
    }
    let mut members = Vec::new();
    let first = if gamma == 1.0 { 1 } else { (1.0 / gamma).floor() as u32 + 1 };
    for n in first..64 {
        let top = 1u64 << n;
        if top > horizon {
            break;
        }
        let width = (n as f64 * (1.0 - gamma)).exp2().floor() as u64;
        let width = if gamma == 1.0 { 0 } else { width };
        members.extend(top.saturating_sub(width).max(1)..=top);
    }
    PrefixSet::new(members, horizon)
}

/// `sum_{k <= 2^{n-1}} e^{k^t} / sum_{k <= 2^n} e^{k^t}`.
pub fn dyadic_collapse_ratio(n: u32, t: f64) -> Result<f64> {
    if n == 0 || n > 40 {
        return Err(Error::domain(format!("dyadic exponent n must lie in [1, 40], got {n}")));
    }
    let half = beta_partial_sum(1 << (n - 1), t)?;
    let full = beta_partial_sum(1 << n, t)?;
    Ok((half - full).exp())
}

/// Asymptote `2^{-(1-t)} e^{-2^{nt}(1-2^{-t})}` of [`dyadic_collapse_ratio`].
pub fn dyadic_collapse_asymptote(n: u32, t: f64) -> f64 {
    (-(1.0 - t)).exp2() * (-(n as f64 * t).exp2() * (1.0 - (-t).exp2())).exp()
}

/// CSV with header `N,gamma,ratio,log_numerator,log_denominator`.
pub fn profile_csv(points: &[DensityPoint]) -> String {
    let mut out = String::from("N,gamma,ratio,log_numerator,log_denominator\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.n,
            crate::fmt_f64(p.gamma),
            crate::fmt_f64(p.ratio),
            crate::fmt_f64(p.log_numerator),
            crate::fmt_f64(p.log_denominator)
        ));
    }
    out
}
