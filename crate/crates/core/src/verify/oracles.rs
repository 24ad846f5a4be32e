use serde::{Deserialize, Serialize};

use super::OracleVerdict;
use crate::constructor::USchedule;
use crate::densities::PrefixSet;
use crate::error::{Error, Result};

/// Relative slack for floating-point evaluation of both sides.
const REL_TOL: f64 = 1e-12;

fn verdict(lhs: f64, rhs: f64, scale: f64, witness: impl FnOnce() -> String) -> OracleVerdict {
    let margin = lhs - rhs;
    let holds = margin >= -REL_TOL * scale.max(1.0);
    OracleVerdict {
        holds,
        margin,
        witness: (!holds).then(witness),
    }
}

/// `sum_{k in A} (k+1)^gamma` against `((#A+1)^{gamma+1} - 1)/(gamma+1)`
/// for `gamma >= 0` and
/// `(N+2)^{gamma+1}/(gamma+1) (1 - (1 - #A/(N+2))^{gamma+1})` for `gamma < 0`.
pub fn oracle_power_sum_bound(set: &PrefixSet, n: u64, gamma: f64) -> Result<OracleVerdict> {
    if gamma == -1.0 || !gamma.is_finite() {
        return Err(Error::domain(format!("power-sum bound needs a finite gamma != -1, got {gamma}")));
    }
    if let Some(&m) = set.members().last() {
        if m > n {
            return Err(Error::domain(format!("set member {m} exceeds N = {n}")));
        }
    }
    let lhs: f64 = set.members().iter().map(|&k| ((k + 1) as f64).powf(gamma)).sum();
    let card = set.len() as f64;
    let g1 = gamma + 1.0;
    let rhs = if gamma >= 0.0 {
        ((card + 1.0).powf(g1) - 1.0) / g1
    } else {
        let n2 = n as f64 + 2.0;
        n2.powf(g1) / g1 * (1.0 - (1.0 - card / n2).powf(g1))
    };
    Ok(verdict(lhs, rhs, lhs.abs().max(rhs.abs()), || {
        format!("N={n}, gamma={gamma}, #A={}, lhs={lhs}, rhs={rhs}", set.len())
    }))
}

/// `sum_{k=1+N_0}^{N_l} u_k v_k >= S_{N_l} v_{N_l} - S_{N_0} v_{N_0}
///  + sum_{j=1}^{l} S_{N_{j-1}} (v_{N_{j-1}} - v_{N_j})`, `S_N = sum_{k<=N} u_k`.
///
/// Sequences are 1-indexed: `u[0]` is `u_1`. Requires `1 <= N_0`.
pub fn oracle_abel(u: &[f64], v: &[f64], subseq: &[usize], l: usize) -> Result<OracleVerdict> {
    if u.len() != v.len() {
        return Err(Error::domain("u and v must have the same length"));
    }
    if u.iter().chain(v).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::domain("u and v must be finite and nonnegative"));
    }
    if let Some(i) = v.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::domain(format!("v increases at index {}", i + 2)));
    }
    if l == 0 || l >= subseq.len() {
        return Err(Error::domain(format!(
            "l = {l} needs 1 <= l < number of subsequence indices ({})",
            subseq.len()
        )));
    }
    let idx = &subseq[..=l];
    if idx[0] == 0 || idx.windows(2).any(|w| w[1] <= w[0]) || idx[l] > u.len() {
        return Err(Error::domain(
            "subsequence must be strictly increasing within [1, length]",
        ));
    }
    let mut prefix = vec![0.0; u.len() + 1];
    for k in 1..=u.len() {
        prefix[k] = prefix[k - 1] + u[k - 1];
    }
    let s = |n: usize| prefix[n];
    let vv = |n: usize| v[n - 1];

    let lhs: f64 = (idx[0] + 1..=idx[l]).map(|k| u[k - 1] * v[k - 1]).sum();
    let mut rhs = s(idx[l]) * vv(idx[l]) - s(idx[0]) * vv(idx[0]);
    for j in 1..=l {
        rhs += s(idx[j - 1]) * (vv(idx[j - 1]) - vv(idx[j]));
    }
    let scale = s(idx[l]) * vv(1);
    Ok(verdict(lhs, rhs, scale, || {
        format!("length={}, l={l}, N={:?}, lhs={lhs}, rhs={rhs}", u.len(), idx)
    }))
}

/// Coefficient sequence `a` of a lacunary probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeSequence {
    /// `a_n = c` for all `n`.
    Constant(f64),
    /// `a_n` given for a prefix, zero afterwards.
    Prefix(Vec<f64>),
}

impl ProbeSequence {
    fn get(&self, n: u32) -> f64 {
        match self {
            ProbeSequence::Constant(c) => *c,
            ProbeSequence::Prefix(a) => a.get(n as usize).copied().unwrap_or(0.0),
        }
    }
}

/// `sum_n a_n r^{w_n}` with `w_n = 2^{u_n}`, compared with
/// `theta_a(h^{-1}(1/(1-r)))` where `h(x) = 2^{u(x)}` interpolates `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticProbe {
    pub a: ProbeSequence,
    pub u: USchedule,
}

impl AsymptoticProbe {
    pub fn new(a: ProbeSequence, u: USchedule) -> Result<Self> {
        let ok = match &a {
            ProbeSequence::Constant(c) => c.is_finite() && *c >= 0.0,
            ProbeSequence::Prefix(v) => v.iter().all(|x| x.is_finite() && *x >= 0.0),
        };
        if !ok {
            return Err(Error::domain("probe coefficients must be finite and nonnegative"));
        }
        u.validate()?;
        Ok(AsymptoticProbe { a, u })
    }

    /// `a = 1`, `u_n = n^2`.
    pub fn squares() -> Self {
        AsymptoticProbe {
            a: ProbeSequence::Constant(1.0),
            u: USchedule::Squares,
        }
    }

    /// `log2 w_n = u_n`.
    pub fn log2_w(&self, n: u32) -> Result<f64> {
        Ok(self.u.u(n)? as f64)
    }

    /// `h^{-1}(y) = u^{-1}(log2 y)`.
    pub fn h_inverse(&self, y: f64) -> f64 {
        self.u.h_inv(y.log2())
    }

    /// `theta_a(x) = sum_{n <= x} a_n`.
    pub fn theta(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (0..=x.floor() as u32).map(|n| self.a.get(n)).sum()
    }

    /// `w_{n+1}/w_n >= 4` for `3 <= n < count`.
    fn check_ratios(&self, count: u32) -> Result<()> {
        for n in 3..count {
            let gap = self.log2_w(n + 1)? - self.log2_w(n)?;
            if gap < 2.0 {
                return Err(Error::domain(format!(
                    "w_{}/w_{} = 2^{gap} is below 4; the schedule is not lacunary enough",
                    n + 1,
                    n
                )));
            }
        }
        Ok(())
    }
}

/// Ratio of `sum_n a_n r^{w_n}` to `theta_a(h^{-1}(1/(1-r)))`.
///
/// Terms are summed until `r^{w_n} < 1e-300`, with `r^{w_n}` evaluated as
/// `exp(w_n log r)`.
pub fn oracle_lacunary_asymptotic(probe: &AsymptoticProbe, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1), got {r}")));
    }
    let min_r = 1.0 - (-probe.log2_w(3)?).exp2();
    if r < min_r {
        return Err(Error::domain(format!("radius {r} is below 1 - 2^-u_3 = {min_r}")));
    }
    let log_r = (-(1.0 - r)).ln_1p();
    let cutoff = 1e-300f64.ln();
    let mut sum = 0.0;
    let mut n = 0u32;
    loop {
        let x = probe.log2_w(n)?.exp2() * log_r;
        if x < cutoff {
            break;
        }
        sum += probe.a.get(n) * x.exp();
        n += 1;
    }
    probe.check_ratios(n.max(4) + 1)?;
    let theta = probe.theta(probe.h_inverse(1.0 / (1.0 - r)));
    if theta == 0.0 {
        return Err(Error::domain("theta_a vanishes at this radius"));
    }
    Ok(sum / theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sum_examples() {
        let all = PrefixSet::from_predicate(100, |_| true);
        let v = oracle_power_sum_bound(&all, 100, 1.0).unwrap();
        assert!(v.holds);
        assert!((v.margin - 50.0).abs() < 1e-9, "5150 - 5100 = {}", v.margin);
        let empty = PrefixSet::new(vec![], 10).unwrap();
        let v = oracle_power_sum_bound(&empty, 10, 0.5).unwrap();
        assert!(v.holds && v.margin == 0.0 && v.witness.is_none());
        assert!(oracle_power_sum_bound(&all, 100, -1.0).is_err());
        assert!(oracle_power_sum_bound(&all, 50, 0.5).is_err());
    }

    #[test]
    fn power_sum_negative_gamma_is_tight_for_top_segment() {
        // A = {N-m+1..N} makes the sum the right Riemann sum of the integral
        let set = PrefixSet::new((91..=100).collect(), 100).unwrap();
        let v = oracle_power_sum_bound(&set, 100, -0.5).unwrap();
        assert!(v.holds && v.margin > 0.0 && v.margin < 0.01, "{v:?}");
    }

    #[test]
    fn abel_examples() {
        let ones = vec![1.0; 50];
        let v = oracle_abel(&ones, &ones, &[3, 10, 20, 49], 3).unwrap();
        assert!(v.holds);
        assert!(v.margin.abs() < 1e-12);
        let u: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let dec: Vec<f64> = (0..40).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert!(oracle_abel(&u, &dec, &[2, 30], 1).unwrap().holds);
        let inc: Vec<f64> = (0..40).map(|i| i as f64).collect();
        assert!(oracle_abel(&u, &inc, &[2, 30], 1).is_err());
        assert!(oracle_abel(&u, &dec, &[0, 30], 1).is_err());
        assert!(oracle_abel(&u, &dec, &[2, 30], 2).is_err());
    }

    #[test]
    fn lacunary_examples() {
        let p = AsymptoticProbe::squares();
        let r = 1.0 - (-36f64).exp2();
        // h^{-1}(2^36) = 6, theta = 7
        assert_eq!(p.h_inverse(1.0 / (1.0 - r)), 6.0);
        assert_eq!(p.theta(6.0), 7.0);
        let ratio = oracle_lacunary_asymptotic(&p, r).unwrap();
        assert!((0.8..=1.2).contains(&ratio), "{ratio}");

        let single = AsymptoticProbe::new(ProbeSequence::Prefix(vec![1.0]), USchedule::Squares).unwrap();
        for j in [10, 20, 30] {
            let r = 1.0 - (-(j as f64)).exp2();
            let ratio = oracle_lacunary_asymptotic(&single, r).unwrap();
            assert!((ratio - r).abs() < 1e-15, "r^{{w_0}} = r");
        }

        let linear = AsymptoticProbe::new(
            ProbeSequence::Constant(1.0),
            USchedule::Explicit((0..64).collect()),
        )
        .unwrap();
        let err = oracle_lacunary_asymptotic(&linear, 1.0 - 1e-6).unwrap_err();
        assert!(err.to_string().contains("w_4/w_3"), "{err}");
    }

    #[test]
    fn lacunary_ratios_approach_one() {
        let p = AsymptoticProbe::squares();
        let dist: Vec<f64> = [16, 25, 36]
            .iter()
            .map(|&j| {
                let r = oracle_lacunary_asymptotic(&p, 1.0 - (-(j as f64)).exp2()).unwrap();
                assert!((0.75..=1.25).contains(&r), "j={j}: {r}");
                (r - 1.0).abs()
            })
            .collect();
        assert!(dist.windows(2).all(|w| w[1] <= w[0]), "{dist:?}");
    }
}
