use num_complex::Complex64;
use rayon::prelude::*;

use crate::constructor::{visit_set, Construction, VisitCheck, VisitReport};
use crate::densities::{density_profile, PrefixSet};
use crate::error::{Error, Result};
use crate::means::circle_samples;
use crate::polybank::TargetEnumeration;
use crate::series::telescoped_weight;

/// Circle samples used by the visit checker.
pub const VISIT_SAMPLES: usize = 4096;
/// Window cut: coefficients beyond `rho^j < e^{-WINDOW_LOG}` go to the tail.
const WINDOW_LOG: f64 = 750.0;

/// Bound on `sum_{i >= i0} sqrt(i) (i-s+1)^{-alpha} rho^{i-s}`.
///
/// Every built coefficient obeys `|a_i| <= (i+1)^{-alpha} sqrt(i)` because
/// the gates force `l_k (1+d_k)^{alpha^+} < sqrt(alpha_k) <= sqrt(i)`; the
/// shift weight turns `(i+1)^{-alpha}` into `(i-s+1)^{-alpha}`. Consecutive
/// terms shrink by at most the ratio `R` at `i0`, so the sum is at most
/// `t(i0) / (1 - R)`.
fn tail_bound(i0: u64, s: u64, alpha: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let d = (i0 - s) as f64;
    let log_first = 0.5 * (i0 as f64).ln() - alpha * (d + 1.0).ln() + d * rho.ln();
    let ratio = rho * (1.0 + 1.0 / i0 as f64).sqrt() * (1.0 + 1.0 / (d + 1.0)).powf((-alpha).max(0.0));
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    log_first.exp() / (1.0 - ratio)
}

/// `sup_{|z| = 1 - 1/l_k} |T_alpha^s f(z) - q_k(z)|` on [`VISIT_SAMPLES`]
/// points, plus the bound on what truncation and windowing leave out.
pub fn check_visit(construction: &Construction, targets: &TargetEnumeration, k: usize, s: u64) -> Result<VisitCheck> {
    let f = &construction.series;
    let spec = &construction.spec;
    if s > f.max_degree() as u64 {
        return Err(Error::domain(format!(
            "visit time {s} exceeds max_degree {}",
            f.max_degree()
        )));
    }
    if s > construction.exact_through {
        return Err(Error::domain(format!(
            "visit time {s} lies past the exactly built prefix ending at {}",
            construction.exact_through
        )));
    }
    let entry = targets
        .get(k)
        .ok_or_else(|| Error::domain(format!("target k={k} is not enumerated")))?;
    let rho = 1.0 - 1.0 / entry.l() as f64;
    let window = if rho == 0.0 {
        0
    } else {
        (WINDOW_LOG / -rho.ln()).ceil() as u64
    };
    let last = (f.max_degree() as u64 - s).min(window);
    let mut g: Vec<Complex64> = (0..=last)
        .map(|j| {
            let a = f.coefficient((j + s) as usize);
            if a.re == 0.0 && a.im == 0.0 {
                a
            } else {
                a * telescoped_weight(j, s, spec.alpha)
            }
        })
        .collect();
    let q = entry.series().coefficients();
    if g.len() < q.len() {
        g.resize(q.len(), Complex64::new(0.0, 0.0));
    }
    for (gj, qj) in g.iter_mut().zip(q) {
        *gj -= qj;
    }
    let sampled = circle_samples(&g, rho, VISIT_SAMPLES)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let i0 = construction.exact_through.min(s + last) + 1;
    let tail = tail_bound(i0, s, spec.alpha, rho);
    Ok(VisitCheck {
        s,
        sampled,
        tail_bound: tail,
        error: sampled + tail,
    })
}

/// Visit set of target `k`, every visit checked, and the largest
/// `beta^gamma` prefix ratio of the visit set (attained at a visit, since
/// the ratio only grows at members).
pub fn check_visits(construction: &Construction, targets: &TargetEnumeration, k: usize) -> Result<VisitReport> {
    let mut report = visit_set(&construction.spec, targets, k, &construction.ledger)?;
    report.checks = report
        .visits
        .par_iter()
        .map(|&s| check_visit(construction, targets, k, s))
        .collect::<Result<Vec<_>>>()?;
    report.density_estimate = Some(match report.visits.last() {
        None => 0.0,
        Some(&top) => {
            let set = PrefixSet::new(report.visits.clone(), top)?;
            density_profile(&set, construction.spec.gamma, &report.visits)?
                .iter()
                .map(|p| p.ratio)
                .fold(0.0, f64::max)
        }
    });
    Ok(report)
}

/// The index right after the first visit of `k`: inside the same block
/// interval but not a visit, so its error should be large.
pub fn negative_control(construction: &Construction, targets: &TargetEnumeration, k: usize) -> Result<Option<VisitCheck>> {
    let report = visit_set(&construction.spec, targets, k, &construction.ledger)?;
    let Some(&first) = report.visits.first() else {
        return Ok(None);
    };
    let s = first + 1;
    let inside = construction
        .ledger
        .for_target(k)
        .any(|r| r.is_built() && r.interval.0 <= first && s <= r.interval.1);
    if !inside || report.visits.binary_search(&s).is_ok() || s > construction.exact_through {
        return Ok(None);
    }
    check_visit(construction, targets, k, s).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::{construct, ConstructionSpec, Regime, Schedule};
    use crate::polybank::{enumerate_targets, GaussianRational, TargetEntry};
    use crate::series::CoefficientSeries;

    fn fixture() -> (Construction, TargetEnumeration) {
        let t = TargetEnumeration::from_entries(vec![
            TargetEntry::new(1, vec![GaussianRational::ZERO], 1).unwrap(),
            TargetEntry::new(2, vec![GaussianRational::new(1, 0, 1).unwrap()], 1).unwrap(),
        ])
        .unwrap();
        let spec = ConstructionSpec::new(0.0, 0.5, Regime::Rs, Schedule::Dyadic, 31).unwrap();
        (construct(&spec, &t).unwrap(), t)
    }

    #[test]
    fn fixture_visit_and_negative_control() {
        let (c, t) = fixture();
        let v = check_visit(&c, &t, 2, 16).unwrap();
        assert_eq!(v.error, 0.0);
        assert!(v.error <= 2.0 / 1.0);
        let neg = negative_control(&c, &t, 2).unwrap().unwrap();
        assert_eq!(neg.s, 17);
        assert!((neg.error - 1.0).abs() < 1e-15 && neg.error > 0.5);
        let report = check_visits(&c, &t, 2).unwrap();
        assert_eq!(report.visits, vec![16]);
        assert!(report.density_estimate.unwrap() > 0.1);
    }

    #[test]
    fn target_embedded_at_zero_shift() {
        let t = enumerate_targets(8).unwrap();
        let spec = ConstructionSpec::new(0.7, 0.0, Regime::Rs, Schedule::Dyadic, 64).unwrap();
        let q = t.get(5).unwrap().series().resized(64);
        let c = Construction {
            spec,
            series: q,
            ledger: Default::default(),
            exact_through: 64,
        };
        let v = check_visit(&c, &t, 5, 0).unwrap();
        assert!(v.sampled < 1e-15, "{v:?}");
    }

    #[test]
    fn refuses_out_of_range() {
        let (c, t) = fixture();
        assert!(check_visit(&c, &t, 2, 32).is_err());
        assert!(check_visit(&c, &t, 9, 16).is_err());
    }

    #[test]
    fn tail_bound_matches_direct_sum() {
        for &(i0, s, alpha, rho) in &[(100u64, 10u64, 0.0f64, 0.9f64), (500, 400, -0.5, 0.95), (50, 49, 1.0, 0.5)] {
            let direct: f64 = (i0..i0 + 20_000)
                .map(|i| {
                    (i as f64).sqrt() * ((i - s + 1) as f64).powf(-alpha) * rho.powi((i - s) as i32)
                })
                .sum();
            let b = tail_bound(i0, s, alpha, rho);
            assert!(b >= direct * (1.0 - 1e-12), "{b} < {direct}");
            assert!(b <= 3.0 * direct, "{b} vs {direct}");
        }
        assert_eq!(tail_bound(10, 5, 0.0, 0.0), 0.0);
    }

    #[test]
    fn window_matches_full_shift() {
        let t = enumerate_targets(64).unwrap();
        let spec = ConstructionSpec::dyadic_rs(0.0, 0.0).unwrap();
        let spec = ConstructionSpec { max_degree: 1 << 14, ..spec };
        let c = construct(&spec, &t).unwrap();
        let k = c.first_admissible_target(&t).unwrap();
        let report = check_visits(&c, &t, k).unwrap();
        let s = report.visits[0];
        let full = c.series.apply_shift_power(s as usize, crate::ShiftParams::new(0.0).unwrap());
        let diff = &full + &CoefficientSeries::new(
            t.get(k).unwrap().series().coefficients().iter().map(|z| -z).collect(),
        )
        .unwrap();
        let rho = report.radius;
        let direct = circle_samples(diff.coefficients(), rho, VISIT_SAMPLES)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!((direct - report.checks[0].sampled).abs() < 1e-12);
    }
}
