//! Runners for the reproduction checklist. Each returns an [`Outcome`] with
//! its measurements; tolerances are the constants below.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constructor::{construct, visit_set, ConstructionSpec, Regime, Schedule, USchedule, DEFAULT_MAX_DEGREE};
use crate::densities::{density_profile, dyadic_checkpoints, separating_set, PrefixSet};
use crate::error::{Error, Result};
use crate::means::{
    circle_samples, critical_exponent, default_radii, fit_growth_exponent, least_squares, mean_p, mean_p_sampled,
    means_table, Exponent,
};
use crate::polybank::{enumerate_targets, rudin_shapiro, vdlp_star, TargetEnumeration};
use crate::series::{CoefficientSeries, ShiftParams};
use crate::verify::{
    abel_suite, check_visits, lacunary_ratios, negative_control, power_sum_suite, AsymptoticProbe,
    DEFAULT_SUITE_SIZE,
};

pub const RS_FACTOR: f64 = 5.0;
pub const RS_LOG2_RANGE: (u32, u32) = (2, 14);
pub const STAR_FACTOR: f64 = 3.0;
pub const STAR_RANGE: (usize, usize) = (4, 1 << 12);
pub const STAR_EXPONENTS: [f64; 3] = [1.0, 1.5, 2.0];
/// Quadrature oversampling for the star norms (the floor is 4).
pub const STAR_OVERSAMPLING: usize = 8;
pub const TELESCOPE_TOL: f64 = 1e-12;
pub const TELESCOPE_ALPHAS: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
pub const TELESCOPE_MAX_POWER: usize = 32;
pub const PARSEVAL_TOL: f64 = 1e-8;
pub const PARSEVAL_RADII: [f64; 2] = [0.3, 0.9];
pub const RANDOM_SERIES: usize = 100;
pub const RANDOM_MAX_DEGREE: usize = 512;
pub const DENSITY_GAMMAS: [f64; 3] = [0.3, 0.5, 0.8];
pub const DENSITY_LOG2_HORIZON: u32 = 22;
/// Dyadic checkpoints `2^j`, `j >= DENSITY_LOG2_FROM`, for the decrease check.
pub const DENSITY_LOG2_FROM: u32 = 10;
pub const DENSITY_TOL: f64 = 0.05;
pub const ZERO_DENSITY_MAX: f64 = 0.05;
pub const SLOPE_GAMMA05: (f64, f64) = (0.25, 0.08);
pub const SLOPE_GAMMA0: (f64, f64) = (0.5, 0.1);
pub const CRITICAL_SLOPE: (f64, f64) = (0.5, 0.25);
pub const VISIT_ERROR_FACTOR: f64 = 10.0;
pub const NEGATIVE_CONTROL_FACTOR: f64 = 0.5;
pub const VISIT_DENSITY_MIN: f64 = 0.05;
pub const LACUNARY_BAND: (f64, f64) = (0.75, 1.25);
pub const LACUNARY_JS: [u32; 3] = [16, 25, 36];
pub const DEFAULT_TARGETS: usize = 64;

/// One checklist item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    RsBound,
    StarBound,
    ShiftTelescoping,
    Parseval,
    DensitySeparation,
    GrowthGamma05,
    GrowthGamma0,
    CriticalSlowGrowth,
    OrbitVisits,
    LemmaOracles,
    Determinism,
}

impl Criterion {
    pub const ALL: [Criterion; 11] = [
        Criterion::RsBound,
        Criterion::StarBound,
        Criterion::ShiftTelescoping,
        Criterion::Parseval,
        Criterion::DensitySeparation,
        Criterion::GrowthGamma05,
        Criterion::GrowthGamma0,
        Criterion::CriticalSlowGrowth,
        Criterion::OrbitVisits,
        Criterion::LemmaOracles,
        Criterion::Determinism,
    ];

    /// Checklist number; both growth runs belong to item 6.
    pub fn number(self) -> u32 {
        match self {
            Criterion::RsBound => 1,
            Criterion::StarBound => 2,
            Criterion::ShiftTelescoping => 3,
            Criterion::Parseval => 4,
            Criterion::DensitySeparation => 5,
            Criterion::GrowthGamma05 | Criterion::GrowthGamma0 => 6,
            Criterion::CriticalSlowGrowth => 7,
            Criterion::OrbitVisits => 8,
            Criterion::LemmaOracles => 9,
            Criterion::Determinism => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::RsBound => "rs-bound",
            Criterion::StarBound => "star-bound",
            Criterion::ShiftTelescoping => "shift-telescoping",
            Criterion::Parseval => "parseval",
            Criterion::DensitySeparation => "density-separation",
            Criterion::GrowthGamma05 => "growth-gamma05-p2",
            Criterion::GrowthGamma0 => "growth-gamma0-p2",
            Criterion::CriticalSlowGrowth => "critical-slow-growth",
            Criterion::OrbitVisits => "orbit-visits",
            Criterion::LemmaOracles => "lemma-oracles",
            Criterion::Determinism => "determinism",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Criterion::ALL.iter().map(|c| c.name()).collect();
                Error::domain(format!("unknown criterion '{name}'; expected one of {}", names.join(", ")))
            })
    }

    pub fn run(self, seed: u64) -> Result<Outcome> {
        match self {
            Criterion::RsBound => rs_bound(),
            Criterion::StarBound => star_bound(),
            Criterion::ShiftTelescoping => shift_telescoping(seed),
            Criterion::Parseval => parseval(seed),
            Criterion::DensitySeparation => density_separation(),
            Criterion::GrowthGamma05 => growth_slope(0.5, SLOPE_GAMMA05, self),
            Criterion::GrowthGamma0 => growth_slope(0.0, SLOPE_GAMMA0, self),
            Criterion::CriticalSlowGrowth => critical_slow_growth(),
            Criterion::OrbitVisits => orbit_visits(),
            Criterion::LemmaOracles => lemma_oracles(seed),
            Criterion::Determinism => determinism(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub number: u32,
    pub name: String,
    pub passed: bool,
    pub measurements: BTreeMap<String, Value>,
}

impl Outcome {
    fn new(criterion: Criterion, passed: bool, measurements: BTreeMap<String, Value>) -> Self {
        Outcome {
            number: criterion.number(),
            name: criterion.name().to_string(),
            passed,
            measurements,
        }
    }

    /// `PASS`/`FAIL` line with the criterion number and name.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<22} {}",
            self.number,
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
}

impl ReproReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            context: "serializing repro report".into(),
            source,
        })
    }
}

/// Runs the given criteria in order.
pub fn run(criteria: &[Criterion], seed: u64) -> Result<ReproReport> {
    let outcomes = criteria.iter().map(|c| c.run(seed)).collect::<Result<Vec<_>>>()?;
    Ok(ReproReport { seed, outcomes })
}

macro_rules! measurements {
    ($($key:expr => $value:expr),* $(,)?) => {{
        let mut m = BTreeMap::new();
        $(m.insert($key.to_string(), json!($value));)*
        m
    }};
}

fn sup_norm(coefficients: &[Complex64], samples: usize) -> f64 {
    circle_samples(coefficients, 1.0, samples)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Sampled `||p_N||_inf <= 5 sqrt(N)` on `8N` points for `N = 2^2..2^14`.
pub fn rs_bound() -> Result<Outcome> {
    let (lo, hi) = RS_LOG2_RANGE;
    let ratios = (lo..=hi)
        .into_par_iter()
        .map(|e| {
            let n = 1usize << e;
            let p = rudin_shapiro(n)?;
            Ok((n, sup_norm(p.to_series().coefficients(), 8 * n) / (n as f64).sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Outcome::new(
        Criterion::RsBound,
        worst <= RS_FACTOR,
        measurements! {
            "max_sup_over_sqrt_n" => worst,
            "bound" => RS_FACTOR,
            "lengths" => ratios.iter().map(|r| r.0).collect::<Vec<_>>(),
        },
    ))
}

/// `||p*_N||_p <= 3 N^{1/q}` for all `N` in `4..=4096`, `p in {1, 1.5, 2}`,
/// and at least `floor(N/4)` coefficients equal to `+1`.
pub fn star_bound() -> Result<Outcome> {
    let (lo, hi) = STAR_RANGE;
    let per_n = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let star = vdlp_star(n)?;
            let series = star.to_series();
            let size = (STAR_OVERSAMPLING * n).next_power_of_two();
            let mut worst = 0.0f64;
            for p in STAR_EXPONENTS {
                let e = Exponent::Finite(p);
                let value = if p == 2.0 {
                    crate::means::poly_norm(&series, e)?
                } else {
                    let samples = circle_samples(series.coefficients(), 1.0, size);
                    let mean = samples.iter().map(|z| z.norm().powf(p)).sum::<f64>() / size as f64;
                    mean.powf(1.0 / p)
                };
                let q = e.conjugate();
                let bound = STAR_FACTOR * if q.is_infinite() { 1.0 } else { (n as f64).powf(1.0 / q) };
                worst = worst.max(value / bound);
            }
            Ok((worst, star.plus_count() >= n / 4))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_n.iter().map(|r| r.0).fold(0.0, f64::max);
    let counts_ok = per_n.iter().all(|r| r.1);
    Ok(Outcome::new(
        Criterion::StarBound,
        worst <= 1.0 && counts_ok,
        measurements! {
            "max_norm_over_bound" => worst,
            "plus_counts_ok" => counts_ok,
            "lengths" => format!("{lo}..={hi}"),
            "quadrature_oversampling" => STAR_OVERSAMPLING,
        },
    ))
}

fn random_series(rng: &mut ChaCha8Rng, max_degree: usize) -> CoefficientSeries {
    let d = rng.gen_range(0..=max_degree);
    CoefficientSeries::new(
        (0..=d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .expect("finite coefficients")
}

/// Closed-form `T^n` against `n` single steps.
pub fn shift_telescoping(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(CoefficientSeries, usize)> = (0..RANDOM_SERIES)
        .map(|_| {
            let s = random_series(&mut rng, 64);
            let n = rng.gen_range(0..=TELESCOPE_MAX_POWER);
            (s, n)
        })
        .collect();
    let mut worst = 0.0f64;
    for (s, n) in &cases {
        for alpha in TELESCOPE_ALPHAS {
            let params = ShiftParams::new(alpha)?;
            let closed = s.apply_shift_power(*n, params);
            let mut iter = s.clone();
            for _ in 0..*n {
                iter = iter.apply_shift(params);
            }
            for (a, b) in closed.coefficients().iter().zip(iter.coefficients()) {
                let scale = a.norm().max(b.norm());
                if scale > 0.0 {
                    worst = worst.max((a - b).norm() / scale);
                }
            }
        }
    }
    Ok(Outcome::new(
        Criterion::ShiftTelescoping,
        worst <= TELESCOPE_TOL,
        measurements! {
            "max_relative_error" => worst,
            "tolerance" => TELESCOPE_TOL,
            "series" => RANDOM_SERIES,
        },
    ))
}

/// Coefficient-side `M_2` against FFT quadrature.
pub fn parseval(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a55);
    let mut worst = 0.0f64;
    for _ in 0..RANDOM_SERIES {
        let s = random_series(&mut rng, RANDOM_MAX_DEGREE);
        let two = Exponent::Finite(2.0);
        for r in PARSEVAL_RADII {
            let exact = mean_p(&s, two, r, 0)?;
            let sampled = mean_p_sampled(&s, two, r, two.default_quadrature(s.max_degree()))?;
            worst = worst.max((exact - sampled).abs());
        }
    }
    Ok(Outcome::new(
        Criterion::Parseval,
        worst <= PARSEVAL_TOL,
        measurements! {
            "max_abs_difference" => worst,
            "tolerance" => PARSEVAL_TOL,
        },
    ))
}

/// `E_gamma` has `beta^gamma` prefix ratio near `1 - e^{-gamma}` at `2^22`
/// and vanishing, decreasing `beta^{gamma/2}` ratios.
pub fn density_separation() -> Result<Outcome> {
    let horizon = 1u64 << DENSITY_LOG2_HORIZON;
    let checkpoints = dyadic_checkpoints(DENSITY_LOG2_FROM, horizon);
    let rows = DENSITY_GAMMAS
        .par_iter()
        .map(|&g| {
            let set = separating_set(g, horizon)?;
            let own = density_profile(&set, g, &[horizon])?[0].ratio;
            let half = density_profile(&set, g / 2.0, &checkpoints)?;
            let ratios: Vec<f64> = half.iter().map(|p| p.ratio).collect();
            Ok((g, own, ratios))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut passed = true;
    let mut m = BTreeMap::new();
    for (g, own, ratios) in &rows {
        let limit = 1.0 - (-g).exp();
        let last = *ratios.last().expect("nonempty checkpoints");
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        passed &= (own - limit).abs() <= DENSITY_TOL && last <= ZERO_DENSITY_MAX && decreasing;
        m.insert(
            format!("gamma_{g}"),
            json!({
                "ratio_at_horizon": own,
                "limit": limit,
                "half_gamma_ratio_at_horizon": last,
                "half_gamma_dyadic_ratios": ratios,
                "half_gamma_decreasing": decreasing,
            }),
        );
    }
    m.insert("horizon".into(), json!(horizon));
    Ok(Outcome::new(Criterion::DensitySeparation, passed, m))
}

fn default_targets() -> Result<TargetEnumeration> {
    enumerate_targets(DEFAULT_TARGETS)
}

/// Fitted `M_2` growth slope of the dyadic Rudin–Shapiro construction.
pub fn growth_slope(gamma: f64, expected: (f64, f64), criterion: Criterion) -> Result<Outcome> {
    let spec = ConstructionSpec::dyadic_rs(0.0, gamma)?;
    let c = construct(&spec, &default_targets()?)?;
    let two = Exponent::Finite(2.0);
    let table = means_table(&c.series, &[two], &default_radii(spec.max_degree))?;
    let fit = fit_growth_exponent(&table, two)?;
    let predicted = critical_exponent(two, gamma)? - spec.alpha;
    Ok(Outcome::new(
        criterion,
        (fit.slope - expected.0).abs() <= expected.1,
        measurements! {
            "slope" => fit.slope,
            "intercept" => fit.intercept,
            "residual_rms" => fit.residual_rms,
            "r_window" => [fit.r_window.0, fit.r_window.1],
            "predicted" => predicted,
            "expected" => expected.0,
            "tolerance" => expected.1,
            "built_blocks" => c.ledger.built().map(|r| json!({"n": r.n, "k": r.k, "budget": r.budget})).collect::<Vec<_>>(),
        },
    ))
}

/// `u_n = n^2`, `alpha = 1/2`: `M_2(f, 1 - 2^{-j})` nondecreasing beyond the
/// first built block and growing like `j^{1/2}`.
pub fn critical_slow_growth() -> Result<Outcome> {
    let two = Exponent::Finite(2.0);
    let alpha = critical_exponent(two, 0.0)?;
    let spec = ConstructionSpec::new(
        alpha,
        0.0,
        Regime::Rs,
        Schedule::U { u: USchedule::Squares },
        DEFAULT_MAX_DEGREE,
    )?;
    let c = construct(&spec, &default_targets()?)?;
    let radii = default_radii(spec.max_degree);
    let first_block_exp = c
        .ledger
        .built()
        .next()
        .map(|r| r.interval.0.trailing_zeros())
        .ok_or_else(|| Error::domain("no block is built below max_degree"))?;
    let rows: Vec<(u32, f64)> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok(((i + 1) as u32, mean_p(&c.series, two, r, 0)?)))
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<(u32, f64)> = rows.iter().copied().filter(|(j, _)| *j >= first_block_exp).collect();
    let nondecreasing = tail.windows(2).all(|w| w[1].1 >= w[0].1);
    let points: Vec<(f64, f64)> = tail.iter().map(|&(j, v)| ((j as f64).ln(), v.ln())).collect();
    let slope = if points.len() >= 2 { least_squares(&points).0 } else { f64::NAN };
    Ok(Outcome::new(
        Criterion::CriticalSlowGrowth,
        nondecreasing && (slope - CRITICAL_SLOPE.0).abs() <= CRITICAL_SLOPE.1,
        measurements! {
            "alpha" => alpha,
            "first_block_log2" => first_block_exp,
            "nondecreasing" => nondecreasing,
            "log_j_slope" => slope,
            "expected" => CRITICAL_SLOPE.0,
            "tolerance" => CRITICAL_SLOPE.1,
            "m2_by_j" => rows.iter().map(|&(j, v)| json!([j, v])).collect::<Vec<_>>(),
            "built_blocks" => c.ledger.built().count(),
        },
    ))
}

/// Visits of the first admissible target of the default `gamma = 1/2`
/// construction.
pub fn orbit_visits() -> Result<Outcome> {
    let spec = ConstructionSpec::dyadic_rs(0.0, 0.5)?;
    let targets = default_targets()?;
    let c = construct(&spec, &targets)?;
    let k = c
        .first_admissible_target(&targets)
        .ok_or_else(|| Error::domain("no admissible target below max_degree"))?;
    let report = check_visits(&c, &targets, k)?;
    let l = report.l as f64;
    let worst = report.checks.iter().map(|v| v.error).fold(0.0, f64::max);
    let neg = negative_control(&c, &targets, k)?;
    let neg_error = neg.map(|v| v.error).unwrap_or(f64::NAN);
    let density = report.density_estimate.unwrap_or(0.0);
    let errors_ok = !report.visits.is_empty() && worst <= VISIT_ERROR_FACTOR / l;
    let neg_ok = neg_error > NEGATIVE_CONTROL_FACTOR / l;
    let density_ok = density >= VISIT_DENSITY_MIN;
    let u_density = u_schedule_visit_density()?;
    Ok(Outcome::new(
        Criterion::OrbitVisits,
        errors_ok && neg_ok && density_ok,
        measurements! {
            "k" => k,
            "l_k" => report.l,
            "visits" => report.visits,
            "max_error" => worst,
            "max_tail_bound" => report.checks.iter().map(|v| v.tail_bound).fold(0.0, f64::max),
            "error_bound" => VISIT_ERROR_FACTOR / l,
            "negative_control_error" => neg_error,
            "negative_control_bound" => NEGATIVE_CONTROL_FACTOR / l,
            "density" => density,
            "density_min" => VISIT_DENSITY_MIN,
            "errors_ok" => errors_ok,
            "negative_control_ok" => neg_ok,
            "density_ok" => density_ok,
            "u_schedule_natural_density" => u_density,
        },
    ))
}

/// Largest natural-density prefix ratio of the visit set of the first
/// admissible target under `u_n = n^2`, `alpha = 1/2` (reported only).
fn u_schedule_visit_density() -> Result<f64> {
    let spec = ConstructionSpec::new(
        0.5,
        0.0,
        Regime::Rs,
        Schedule::U { u: USchedule::Squares },
        DEFAULT_MAX_DEGREE,
    )?;
    let targets = default_targets()?;
    let c = construct(&spec, &targets)?;
    let Some(k) = c.first_admissible_target(&targets) else {
        return Ok(0.0);
    };
    let visits = visit_set(&spec, &targets, k, &c.ledger)?.visits;
    let Some(&top) = visits.last() else {
        return Ok(0.0);
    };
    let set = PrefixSet::new(visits.clone(), top)?;
    Ok(density_profile(&set, 0.0, &visits)?
        .iter()
        .map(|p| p.ratio)
        .fold(0.0, f64::max))
}

/// Power-sum and Abel suites plus the lacunary ratios.
pub fn lemma_oracles(seed: u64) -> Result<Outcome> {
    let power = power_sum_suite(seed, DEFAULT_SUITE_SIZE)?;
    let abel = abel_suite(seed, DEFAULT_SUITE_SIZE)?;
    let ratios = lacunary_ratios(&AsymptoticProbe::squares(), &LACUNARY_JS)?;
    let in_band = ratios
        .iter()
        .all(|&(_, r)| (LACUNARY_BAND.0..=LACUNARY_BAND.1).contains(&r));
    let approaching = ratios
        .windows(2)
        .all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
    Ok(Outcome::new(
        Criterion::LemmaOracles,
        power.passed() && abel.passed() && in_band && approaching,
        measurements! {
            "power_sum" => power,
            "abel" => abel,
            "lacunary_ratios" => ratios,
            "lacunary_in_band" => in_band,
            "lacunary_approaching_one" => approaching,
        },
    ))
}

/// The report of every other criterion, produced twice, is byte-identical.
pub fn determinism(seed: u64) -> Result<Outcome> {
    let others: Vec<Criterion> = Criterion::ALL
        .into_iter()
        .filter(|&c| c != Criterion::Determinism)
        .collect();
    let first = run(&others, seed)?.to_json()?;
    let second = run(&others, seed)?.to_json()?;
    Ok(Outcome::new(
        Criterion::Determinism,
        first == second,
        measurements! {
            "report_bytes" => first.len(),
            "identical" => first == second,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(Criterion::from_name(c.name()).unwrap(), c);
        }
        assert!(Criterion::from_name("nope").is_err());
        assert_eq!(Criterion::GrowthGamma05.number(), 6);
    }

    #[test]
    fn outcome_line_format() {
        let o = Outcome::new(Criterion::Parseval, true, BTreeMap::new());
        assert_eq!(o.line(), "criterion  4 parseval               PASS");
    }
}
