//! Block constructions of `f_alpha`, `f*_alpha` and the `u`-scheduled
//! variants, with their ledgers and visit sets.

mod blocks;
mod schedule;

pub use blocks::{
    alpha_gate, block_indices, build_block, construct, visit_set, Block, BlockIndices, Construction,
};
pub use schedule::USchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::Exponent;

/// Default truncation degree for both schedules.
pub const DEFAULT_MAX_DEGREE: usize = 1 << 20;

/// Which polynomial family fills the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    /// Rudin–Shapiro blocks, for `p >= 2`.
    Rs,
    /// de la Vallée-Poussin blocks, for `1 <= p < 2`.
    Star { p: f64 },
}

impl Regime {
    pub fn star(p: f64) -> Result<Self> {
        if (1.0..2.0).contains(&p) {
            Ok(Regime::Star { p })
        } else {
            Err(Error::domain(format!("the star regime needs 1 <= p < 2, got {p}")))
        }
    }

    /// Conjugate exponent of the star regime; `None` for Rudin–Shapiro.
    pub fn conjugate(&self) -> Option<f64> {
        match *self {
            Regime::Rs => None,
            Regime::Star { p } => Some(Exponent::Finite(p).conjugate()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Rs => "rs",
            Regime::Star { .. } => "star",
        }
    }
}

/// Placement of the blocks: `I_n = [2^n, 2^{n+1})` or `[2^{u_n}, 2^{u_{n+1}})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Dyadic,
    U { u: USchedule },
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Dyadic => "dyadic",
            Schedule::U { .. } => "u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub schedule: Schedule,
    pub max_degree: usize,
}

impl ConstructionSpec {
    pub fn new(alpha: f64, gamma: f64, regime: Regime, schedule: Schedule, max_degree: usize) -> Result<Self> {
        let spec = ConstructionSpec {
            alpha,
            gamma,
            regime,
            schedule,
            max_degree,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Dyadic Rudin–Shapiro construction truncated at [`DEFAULT_MAX_DEGREE`].
    pub fn dyadic_rs(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, gamma, Regime::Rs, Schedule::Dyadic, DEFAULT_MAX_DEGREE)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::domain(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if let Regime::Star { p } = self.regime {
            Regime::star(p)?;
        }
        if self.max_degree < 4 {
            return Err(Error::domain(format!(
                "max_degree must be at least 4, got {}",
                self.max_degree
            )));
        }
        if let Schedule::U { u } = &self.schedule {
            u.validate()?;
        }
        Ok(())
    }
}

/// Why a block contributes nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Built and kept.
    None,
    Odd,
    /// `n = 0` belongs to no `A_k`.
    Unassigned,
    /// The gate `2^{n-1} >= alpha_k` (resp. `2^{u_{n-1}}`) fails.
    Gate,
    /// The gate passes but the budget rounds down to zero.
    EmptyBudget,
    /// Built, but its support passes `max_degree`; dropped.
    Truncated,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::None => "none",
            SkipReason::Odd => "odd",
            SkipReason::Unassigned => "unassigned",
            SkipReason::Gate => "gate",
            SkipReason::EmptyBudget => "empty_budget",
            SkipReason::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub n: u32,
    pub k: Option<usize>,
    /// `alpha_k` (or `alpha*_k`) for the target of this block.
    pub gate: Option<u64>,
    pub budget: u64,
    /// The interval `I_n` (or `I_n^{(u)}`).
    pub interval: (u64, u64),
    /// First and last index carrying a coefficient, for built blocks.
    pub support: Option<(u64, u64)>,
    pub skip: SkipReason,
}

impl BlockRecord {
    pub fn is_built(&self) -> bool {
        self.skip == SkipReason::None
    }
}

/// One record per block index `n` up to the truncation cut.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockLedger {
    records: Vec<BlockRecord>,
}

impl BlockLedger {
    pub fn new(records: Vec<BlockRecord>) -> Result<Self> {
        let ledger = BlockLedger { records };
        ledger.check_supports()?;
        Ok(ledger)
    }

    pub fn records(&self) -> &[BlockRecord] {
        &self.records
    }

    pub fn built(&self) -> impl Iterator<Item = &BlockRecord> {
        self.records.iter().filter(|r| r.is_built())
    }

    pub fn for_target(&self, k: usize) -> impl Iterator<Item = &BlockRecord> {
        self.records.iter().filter(move |r| r.k == Some(k))
    }

    /// Supports lie inside their intervals and are pairwise disjoint.
    pub fn check_supports(&self) -> Result<()> {
        let mut last_top: Option<u64> = None;
        for r in &self.records {
            let Some((lo, hi)) = r.support else { continue };
            if lo < r.interval.0 || hi > r.interval.1 || lo > hi {
                return Err(Error::domain(format!(
                    "block n={} support [{lo}, {hi}] is not inside [{}, {}]",
                    r.n, r.interval.0, r.interval.1
                )));
            }
            if let Some(top) = last_top {
                if lo <= top {
                    return Err(Error::domain(format!(
                        "block n={} support starts at {lo}, overlapping an earlier block ending at {top}",
                        r.n
                    )));
                }
            }
            last_top = Some(hi);
        }
        Ok(())
    }

    /// CSV with header `n,k,gate,budget,lo,hi,skip_reason`. `lo,hi` is the
    /// support of a built block and the interval `I_n` otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,gate,budget,lo,hi,skip_reason\n");
        for r in &self.records {
            let (lo, hi) = r.support.unwrap_or(r.interval);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                r.gate.map(|g| g.to_string()).unwrap_or_default(),
                r.budget,
                lo,
                hi,
                r.skip.as_str()
            ));
        }
        out
    }
}

/// One checked visit: sampled error plus the truncation-tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitCheck {
    pub s: u64,
    pub sampled: f64,
    pub tail_bound: f64,
    /// `sampled + tail_bound`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitReport {
    pub k: usize,
    pub l: u64,
    /// `1 - 1/l_k`.
    pub radius: f64,
    pub visits: Vec<u64>,
    /// Filled by [`crate::verify::check_visits`].
    pub checks: Vec<VisitCheck>,
    /// Largest `beta^gamma` prefix ratio of the visit set up to the last built
    /// block; filled by [`crate::verify::check_visits`].
    pub density_estimate: Option<f64>,
}
