use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlockLedger, BlockRecord, ConstructionSpec, Regime, Schedule, SkipReason, VisitReport};
use crate::error::{Error, Result};
use crate::polybank::{rudin_shapiro, tilde_q, vdlp_star, TargetEntry, TargetEnumeration};
use crate::series::CoefficientSeries;

/// Largest gate accepted before it is treated as unreachable.
const GATE_CAP: f64 = (1u64 << 62) as f64;

fn pow2(e: u32) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockIndices {
    pub lo: u64,
    pub hi: u64,
    /// `k` with `n in A_k`, i.e. the 2-adic valuation of an even `n > 0`.
    pub k: Option<usize>,
}

/// `I_n` (or `I_n^{(u)}`) and the target index assigned to block `n`.
pub fn block_indices(n: u32, spec: &ConstructionSpec) -> Result<BlockIndices> {
    let (lo, hi) = match &spec.schedule {
        Schedule::Dyadic => (pow2(n), pow2(n + 1).saturating_sub(1)),
        Schedule::U { u } => (pow2(u.u(n)?), pow2(u.u(n + 1)?).saturating_sub(1)),
    };
    let k = (n > 0 && n % 2 == 0).then(|| n.trailing_zeros() as usize);
    Ok(BlockIndices { lo, hi, k })
}

/// The gate `alpha_k` (Rudin–Shapiro) or `alpha*_k` (star):
/// `1 + floor(max(F, d + max(3, 3 + alpha) l^2 + alpha^+ l log(1 + d)))`
/// with `F = l^2 (1+d)^{2 alpha^+}`, resp. `l^q (1+d)^{q alpha^+}`. A star
/// regime with `q = inf` (`p = 1`) uses the Rudin–Shapiro `F`.
pub fn alpha_gate(l: u64, d: usize, alpha: f64, regime: Regime) -> Result<u64> {
    if l == 0 {
        return Err(Error::domain("target bound l must be at least 1"));
    }
    let (lf, df, ap) = (l as f64, d as f64, alpha.max(0.0));
    let first = match regime.conjugate() {
        Some(q) if q.is_finite() => lf.powf(q) * (1.0 + df).powf(q * ap),
        _ => lf * lf * (1.0 + df).powf(2.0 * ap),
    };
    let second = df + 3f64.max(3.0 + alpha) * lf * lf + ap * lf * df.ln_1p();
    let value = 1.0 + first.max(second).floor();
    if !(value < GATE_CAP) {
        return Err(Error::domain(format!(
            "gate for l={l}, d={d}, alpha={alpha} is {value}, beyond 2^62"
        )));
    }
    Ok(value as u64)
}

/// Gate used for target `entry` under `spec`.
///
/// For the `u` schedule with `p = 1` the gate is also raised to exceed
/// `1 + 2^{h(l_k)}`, i.e. `h^{-1}(log2 alpha*_k) > l_k`.
fn gate_for(spec: &ConstructionSpec, entry: &TargetEntry) -> Result<u64> {
    let gate = alpha_gate(entry.l(), entry.degree(), spec.alpha, spec.regime)?;
    match (&spec.schedule, spec.regime) {
        (Schedule::U { u }, Regime::Star { p }) if p == 1.0 => {
            let floor = u32::try_from(entry.l())
                .ok()
                .and_then(|l| u.u(l).ok())
                .map(|e| pow2(e).saturating_add(2))
                .unwrap_or(u64::MAX);
            Ok(gate.max(floor))
        }
        _ => Ok(gate),
    }
}

/// `2^{n-1}` (dyadic) or `2^{u_{n-1}}`: what the gate is compared against.
fn gate_base(n: u32, spec: &ConstructionSpec) -> Result<u64> {
    match &spec.schedule {
        Schedule::Dyadic => Ok(pow2(n - 1)),
        Schedule::U { u } => Ok(pow2(u.u(n - 1)?)),
    }
}

/// `floor(2^{e (1-gamma)} / gate)` with `e = n` or `u_n`.
fn budget(n: u32, spec: &ConstructionSpec, gate: u64) -> Result<u64> {
    let e = match &spec.schedule {
        Schedule::Dyadic => n,
        Schedule::U { u } => u.u(n)?,
    };
    if spec.gamma == 0.0 {
        return Ok(pow2(e) / gate);
    }
    let b = (e as f64 * (1.0 - spec.gamma)).exp2() / gate as f64;
    Ok(b.floor().min(u64::MAX as f64) as u64)
}

/// Family coefficients for the regime: Rudin–Shapiro signs or the star profile.
fn family(regime: Regime, len: u64) -> Result<Vec<f64>> {
    let len = usize::try_from(len).map_err(|_| Error::domain(format!("budget {len} too large")))?;
    Ok(match regime {
        Regime::Rs => rudin_shapiro(len)?.signs().iter().map(|&s| s as f64).collect(),
        Regime::Star { .. } => vdlp_star(len)?.coefficients().to_vec(),
    })
}

/// A built (or skipped) block; coefficient `i` sits at index `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub record: BlockRecord,
    pub offset: u64,
    pub coefficients: Vec<Complex64>,
}

impl Block {
    /// The block as a dense series of degree `offset + len - 1`.
    pub fn series(&self) -> CoefficientSeries {
        let mut c = vec![Complex64::new(0.0, 0.0); self.offset as usize];
        c.extend_from_slice(&self.coefficients);
        if c.is_empty() {
            return CoefficientSeries::zeros(0);
        }
        CoefficientSeries::new(c).expect("block coefficients are finite")
    }
}

/// Block `n`: zero for odd `n`, `n = 0`, a closed gate or an empty budget;
/// otherwise `(j+1)^{-alpha} c_{j - base}` on `j in [base, top]`, where
/// `c` are the coefficients of `p_B(z^{alpha_k}) q~_k(z)`.
///
/// A block whose top index passes `spec.max_degree` is returned empty with
/// reason [`SkipReason::Truncated`].
pub fn build_block(n: u32, spec: &ConstructionSpec, targets: &TargetEnumeration) -> Result<Block> {
    let idx = block_indices(n, spec)?;
    let mut record = BlockRecord {
        n,
        k: idx.k,
        gate: None,
        budget: 0,
        interval: (idx.lo, idx.hi),
        support: None,
        skip: SkipReason::None,
    };
    let skipped = |record: BlockRecord| Block {
        record,
        offset: idx.lo,
        coefficients: Vec::new(),
    };
    let Some(k) = idx.k else {
        record.skip = if n == 0 { SkipReason::Unassigned } else { SkipReason::Odd };
        return Ok(skipped(record));
    };
    let entry = targets.get(k).ok_or(Error::MissingTarget {
        n,
        k,
        available: targets.len(),
    })?;
    let gate = gate_for(spec, entry)?;
    record.gate = Some(gate);
    if gate_base(n, spec)? < gate {
        record.skip = SkipReason::Gate;
        return Ok(skipped(record));
    }
    let b = budget(n, spec, gate)?;
    record.budget = b;
    if b == 0 {
        record.skip = SkipReason::EmptyBudget;
        return Ok(skipped(record));
    }
    let d = entry.degree() as u64;
    let top = (b - 1)
        .checked_mul(gate)
        .and_then(|x| x.checked_add(d))
        .and_then(|x| x.checked_add(idx.lo))
        .unwrap_or(u64::MAX);
    if top > idx.hi {
        return Err(Error::BlockOverflow {
            n,
            k,
            budget: b,
            top,
            interval_end: idx.hi,
        });
    }
    if top > spec.max_degree as u64 {
        record.skip = SkipReason::Truncated;
        return Ok(skipped(record));
    }

    let fam = family(spec.regime, b)?;
    let qt = tilde_q(entry.series(), spec.alpha);
    let len = (top - idx.lo + 1) as usize;
    let mut c = vec![Complex64::new(0.0, 0.0); len];
    for (m, &pm) in fam.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        let at = m * gate as usize;
        for (j, &qj) in qt.coefficients().iter().enumerate() {
            c[at + j] += qj * pm;
        }
    }
    if spec.alpha != 0.0 {
        for (t, ct) in c.iter_mut().enumerate() {
            *ct *= ((idx.lo + t as u64 + 1) as f64).powf(-spec.alpha);
        }
    }
    record.support = Some((idx.lo, top));
    Ok(Block {
        record,
        offset: idx.lo,
        coefficients: c,
    })
}

/// The truncated function, its ledger, and the last index up to which its
/// coefficients agree with the untruncated construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub spec: ConstructionSpec,
    pub series: CoefficientSeries,
    pub ledger: BlockLedger,
    pub exact_through: u64,
}

impl Construction {
    /// Smallest `k` with a nonzero target and at least one built block.
    pub fn first_admissible_target(&self, targets: &TargetEnumeration) -> Option<usize> {
        self.ledger
            .built()
            .filter_map(|r| r.k)
            .filter(|&k| targets.get(k).is_some_and(|e| !e.is_zero()))
            .min()
    }

    /// Top index of the last built block.
    pub fn last_built_top(&self) -> Option<u64> {
        self.ledger.built().filter_map(|r| r.support).map(|s| s.1).max()
    }
}

/// `f = sum_n P_n` for every `n` whose interval starts at or below
/// `spec.max_degree`, blocks built in parallel and placed in index order.
pub fn construct(spec: &ConstructionSpec, targets: &TargetEnumeration) -> Result<Construction> {
    spec.validate()?;
    let max = spec.max_degree as u64;
    let mut ns = Vec::new();
    for n in 0u32..64 {
        if block_indices(n, spec)?.lo > max {
            break;
        }
        ns.push(n);
    }
    let blocks = ns
        .par_iter()
        .map(|&n| build_block(n, spec, targets))
        .collect::<Result<Vec<_>>>()?;

    let mut coefficients = vec![Complex64::new(0.0, 0.0); spec.max_degree + 1];
    let mut exact_through = max;
    let mut records = Vec::with_capacity(blocks.len());
    for block in blocks {
        match block.record.skip {
            SkipReason::None => {
                let at = block.offset as usize;
                coefficients[at..at + block.coefficients.len()].copy_from_slice(&block.coefficients);
            }
            SkipReason::Truncated => exact_through = exact_through.min(block.offset - 1),
            _ => {}
        }
        records.push(block.record);
    }
    Ok(Construction {
        spec: spec.clone(),
        series: CoefficientSeries::new(coefficients)?,
        ledger: BlockLedger::new(records)?,
        exact_through,
    })
}

/// `T_k`: indices `base + alpha_k m` over the built blocks of target `k`
/// where the family coefficient `m` equals `+1`.
pub fn visit_set(
    spec: &ConstructionSpec,
    targets: &TargetEnumeration,
    k: usize,
    ledger: &BlockLedger,
) -> Result<VisitReport> {
    let entry = targets.get(k).ok_or_else(|| {
        Error::domain(format!("target k={k} is not in the enumeration of {} entries", targets.len()))
    })?;
    let mut visits = Vec::new();
    for r in ledger.for_target(k).filter(|r| r.is_built()) {
        let gate = r.gate.expect("built blocks record their gate");
        let fam = family(spec.regime, r.budget)?;
        let base = r.interval.0;
        visits.extend(
            fam.iter()
                .enumerate()
                .filter(|(_, &c)| c == 1.0)
                .map(|(m, _)| base + gate * m as u64)
                .filter(|&s| s <= spec.max_degree as u64),
        );
    }
    visits.sort_unstable();
    Ok(VisitReport {
        k,
        l: entry.l(),
        radius: 1.0 - 1.0 / entry.l() as f64,
        visits,
        checks: Vec::new(),
        density_estimate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::USchedule;
    use crate::polybank::{enumerate_targets, GaussianRational};

    fn fixture_targets() -> TargetEnumeration {
        // k=1: zero with l=1; k=2: the constant 1 with l=1, so alpha_2 = 4
        TargetEnumeration::from_entries(vec![
            TargetEntry::new(1, vec![GaussianRational::ZERO], 1).unwrap(),
            TargetEntry::new(2, vec![GaussianRational::new(1, 0, 1).unwrap()], 1).unwrap(),
        ])
        .unwrap()
    }

    fn spec(alpha: f64, gamma: f64, max_degree: usize) -> ConstructionSpec {
        ConstructionSpec::new(alpha, gamma, Regime::Rs, Schedule::Dyadic, max_degree).unwrap()
    }

    fn u_spec(alpha: f64, regime: Regime) -> ConstructionSpec {
        ConstructionSpec::new(
            alpha,
            0.0,
            regime,
            Schedule::U { u: USchedule::Squares },
            1 << 20,
        )
        .unwrap()
    }

    #[test]
    fn gate_examples() {
        assert_eq!(alpha_gate(2, 1, 0.0, Regime::Rs).unwrap(), 14);
        assert_eq!(alpha_gate(2, 1, 0.0, Regime::Star { p: 1.5 }).unwrap(), 14);
        assert_eq!(alpha_gate(1, 0, 0.0, Regime::Rs).unwrap(), 4);
        // p = 1: q = inf falls back to l^2
        assert_eq!(alpha_gate(2, 1, 0.0, Regime::Star { p: 1.0 }).unwrap(), 14);
        assert!(alpha_gate(0, 0, 0.0, Regime::Rs).is_err());
        // l=3, d=2, alpha=1: max(9 * 9, 2 + 36 + 3 ln 3) = 81
        assert_eq!(alpha_gate(3, 2, 1.0, Regime::Rs).unwrap(), 82);
    }

    #[test]
    fn index_examples() {
        let s = spec(0.0, 0.5, 1 << 10);
        assert_eq!(block_indices(3, &s).unwrap(), BlockIndices { lo: 8, hi: 15, k: None });
        assert_eq!(block_indices(12, &s).unwrap().k, Some(2));
        assert_eq!(block_indices(0, &s).unwrap().k, None);
        let u = u_spec(0.0, Regime::Rs);
        assert_eq!(block_indices(2, &u).unwrap(), BlockIndices { lo: 16, hi: 511, k: Some(1) });
    }

    #[test]
    fn smallest_admissible_block_fixture() {
        let t = fixture_targets();
        let s = spec(0.0, 0.5, 31);
        let block = build_block(4, &s, &t).unwrap();
        assert_eq!(block.record.gate, Some(4));
        assert_eq!(block.record.budget, 1);
        assert_eq!(block.record.support, Some((16, 16)));
        assert_eq!(block.coefficients, vec![Complex64::new(1.0, 0.0)]);
        let c = construct(&s, &t).unwrap();
        let nonzero: Vec<usize> = c
            .series
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(j, _)| j)
            .collect();
        assert_eq!(nonzero, vec![16]);
        let report = visit_set(&s, &t, 2, &c.ledger).unwrap();
        assert_eq!(report.visits, vec![16]);
        assert_eq!(report.radius, 0.0);
    }

    #[test]
    fn skips_are_recorded() {
        let t = fixture_targets();
        let s = spec(0.0, 0.5, 31);
        assert_eq!(build_block(3, &s, &t).unwrap().record.skip, SkipReason::Odd);
        assert_eq!(build_block(0, &s, &t).unwrap().record.skip, SkipReason::Unassigned);
        // n = 2 has k = 1, gate 4 > 2^1
        assert_eq!(build_block(2, &s, &t).unwrap().record.skip, SkipReason::Gate);
        let missing = build_block(8, &s, &t).unwrap_err();
        assert!(matches!(missing, Error::MissingTarget { k: 3, .. }), "{missing}");
    }

    #[test]
    fn nothing_fits_below_first_block() {
        let t = fixture_targets();
        let c = construct(&spec(0.0, 0.5, 15), &t).unwrap();
        assert!(c.series.coefficients().iter().all(|a| a.norm() == 0.0));
        assert_eq!(c.ledger.built().count(), 0);
        assert_eq!(c.ledger.records().len(), 4);
    }

    #[test]
    fn default_targets_dyadic_ledger() {
        let t = enumerate_targets(64).unwrap();
        let c = construct(&spec(0.0, 0.5, 1 << 20), &t).unwrap();
        let built: Vec<(u32, usize, u64)> = c
            .ledger
            .built()
            .map(|r| (r.n, r.k.unwrap(), r.budget))
            .collect();
        // k=2 (target -1, l=3) has alpha_2 = 28: n=12 gets floor(64/28) = 2
        assert!(built.contains(&(12, 2, 2)), "{built:?}");
        assert_eq!(c.exact_through, (1 << 20) - 1);
        assert_eq!(c.first_admissible_target(&t), Some(2));
        let v = visit_set(&c.spec, &t, 2, &c.ledger).unwrap();
        assert_eq!(v.visits, vec![4096, 4124]);
    }

    #[test]
    fn supports_disjoint_and_envelope_bound() {
        let t = enumerate_targets(64).unwrap();
        for (alpha, gamma) in [(0.0, 0.0), (0.3, 0.2), (-0.5, 0.0), (1.0, 0.5)] {
            let s = spec(alpha, gamma, 1 << 18);
            let c = construct(&s, &t).unwrap();
            c.ledger.check_supports().unwrap();
            for r in c.ledger.built() {
                let (lo, hi) = r.support.unwrap();
                let l1 = t.get(r.k.unwrap()).unwrap().l1_norm();
                let dmax = t.get(r.k.unwrap()).unwrap().degree() as f64;
                for j in lo..=hi {
                    let a = c.series.coefficient(j as usize).norm();
                    // (j+1)^{-alpha} |c_j| with |c_j| <= (1+d)^{alpha^+} ||q||_1
                    let bound = ((j + 1) as f64).powf(-alpha) * (1.0 + dmax).powf(alpha.max(0.0)) * l1;
                    assert!(a <= bound * (1.0 + 1e-12), "j={j}: {a} > {bound}");
                }
            }
        }
    }

    #[test]
    fn gate_monotone_along_each_target() {
        let t = enumerate_targets(64).unwrap();
        let c = construct(&spec(0.0, 0.0, 1 << 20), &t).unwrap();
        for k in 1..=4 {
            let passes: Vec<bool> = c
                .ledger
                .for_target(k)
                .map(|r| r.skip != SkipReason::Gate)
                .collect();
            for w in passes.windows(2) {
                assert!(!w[0] || w[1], "k={k}: {passes:?}");
            }
        }
    }

    #[test]
    fn u_schedule_blocks() {
        let t = enumerate_targets(64).unwrap();
        let c = construct(&u_spec(0.5, Regime::Rs), &t).unwrap();
        let built: Vec<_> = c.ledger.built().collect();
        assert_eq!(built.len(), 1);
        assert_eq!(built[0].n, 4);
        assert_eq!(built[0].gate, Some(32));
        assert_eq!(built[0].budget, 2048);
        // p = 1 raises alpha*_k above 2^{u_{l_k}}
        let star = u_spec(0.0, Regime::Star { p: 1.0 });
        let g = gate_for(&star, t.get(2).unwrap()).unwrap();
        assert!(g >= (1 << 9) + 2, "{g}");
    }

    #[test]
    fn deterministic() {
        let t = enumerate_targets(64).unwrap();
        let s = spec(0.25, 0.3, 1 << 16);
        assert_eq!(construct(&s, &t).unwrap(), construct(&s, &t).unwrap());
    }

    #[test]
    fn block_series_places_offset() {
        let t = fixture_targets();
        let b = build_block(4, &spec(0.0, 0.5, 31), &t).unwrap();
        let s = b.series();
        assert_eq!(s.max_degree(), 16);
        assert_eq!(s.coefficient(16), Complex64::new(1.0, 0.0));
    }
}
