use num_complex::Complex64;
use tsl::constructor::{build_block, construct, block_indices, ConstructionSpec, Regime, Schedule, SkipReason, USchedule};
use tsl::means::{default_radii, mean_p, mean_p_sampled, Exponent};
use tsl::polybank::{enumerate_targets, TargetEnumeration};
use tsl::CoefficientSeries;

const BLOCK_RADII: [f64; 3] = [0.5, 0.9, 0.99];
const BLOCK_C: f64 = 50.0;

fn targets() -> TargetEnumeration {
    enumerate_targets(64).unwrap()
}

/// `log M_p(P, r)` for a block at `offset`, factoring out `r^offset` so the
/// value survives where `r^offset` underflows.
fn log_block_mean(offset: u64, coefficients: &[Complex64], p: Exponent, r: f64) -> f64 {
    let shifted = CoefficientSeries::new(coefficients.to_vec()).unwrap();
    let size = if p == Exponent::Finite(2.0) { 0 } else { p.default_quadrature(shifted.max_degree()) };
    offset as f64 * r.ln() + mean_p(&shifted, p, r, size).unwrap().ln()
}

/// Largest `log M_p(P_n, r) - log(scale_n r^{2^{e_n}})` over the built blocks.
fn worst_block_constant(spec: &ConstructionSpec, p: Exponent, log2_scale: impl Fn(u32) -> f64) -> (f64, usize) {
    let t = targets();
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for n in 0..64 {
        let idx = block_indices(n, spec).unwrap();
        if idx.lo > spec.max_degree as u64 {
            break;
        }
        let block = build_block(n, spec, &t).unwrap();
        if block.record.skip != SkipReason::None || block.coefficients.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        count += 1;
        for r in BLOCK_RADII {
            let bound = log2_scale(n) * std::f64::consts::LN_2 + idx.lo as f64 * r.ln();
            worst = worst.max(log_block_mean(block.offset, &block.coefficients, p, r) - bound);
        }
    }
    (worst.exp(), count)
}

#[test]
fn block_norm_bound_rs() {
    for (alpha, gamma) in [(0.0, 0.0), (0.0, 0.5), (0.3, 0.2), (-0.3, 0.0)] {
        let spec = ConstructionSpec {
            max_degree: 1 << 18,
            ..ConstructionSpec::dyadic_rs(alpha, gamma).unwrap()
        };
        let (c, blocks) = worst_block_constant(&spec, Exponent::Finite(2.0), |n| {
            n as f64 * ((1.0 - gamma) / 2.0 - alpha)
        });
        assert!(blocks >= 2, "alpha {alpha} gamma {gamma}: {blocks} blocks");
        assert!(c <= BLOCK_C, "alpha {alpha} gamma {gamma}: C = {c}");
    }
}

#[test]
fn block_norm_bound_star() {
    for (p, alpha, gamma, log2_degree) in [(1.5, 0.0, 0.0, 16), (1.75, 0.1, 0.3, 18), (1.25, 0.0, 0.0, 18)] {
        let regime = Regime::star(p).unwrap();
        let q = regime.conjugate().unwrap();
        let spec = ConstructionSpec::new(alpha, gamma, regime, Schedule::Dyadic, 1 << log2_degree).unwrap();
        let (c, blocks) = worst_block_constant(&spec, Exponent::Finite(p), |n| {
            n as f64 * ((1.0 - gamma) / q - alpha)
        });
        assert!(blocks >= 2, "p {p}: {blocks} blocks");
        assert!(c <= BLOCK_C, "p {p} alpha {alpha} gamma {gamma}: C = {c}");
    }
}

#[test]
fn block_norm_bound_u_schedule() {
    let spec = ConstructionSpec::new(0.5, 0.0, Regime::Rs, Schedule::U { u: USchedule::Squares }, 1 << 20).unwrap();
    let (c, blocks) = worst_block_constant(&spec, Exponent::Finite(2.0), |_| 0.0);
    assert_eq!(blocks, 1);
    assert!(c <= BLOCK_C, "C = {c}");
}

#[test]
fn quadrature_doubling_on_constructions() {
    let t = targets();
    let corpus = [
        ConstructionSpec::new(0.0, 0.0, Regime::Rs, Schedule::Dyadic, 1 << 14).unwrap(),
        ConstructionSpec::new(0.25, 0.5, Regime::Rs, Schedule::Dyadic, 1 << 14).unwrap(),
        ConstructionSpec::new(0.0, 0.0, Regime::star(1.5).unwrap(), Schedule::Dyadic, 1 << 14).unwrap(),
    ];
    for spec in corpus {
        let f = construct(&spec, &t).unwrap().series;
        for p in [1.0, 1.5, 3.0, 4.0] {
            let p = Exponent::Finite(p);
            let size = p.default_quadrature(f.max_degree());
            for r in default_radii(spec.max_degree) {
                let a = mean_p_sampled(&f, p, r, size).unwrap();
                let b = mean_p_sampled(&f, p, r, 2 * size).unwrap();
                let rel = if a == 0.0 { (a - b).abs() } else { (a - b).abs() / a };
                assert!(rel < 1e-6, "{spec:?} p {p} r {r}: {a} vs {b}");
            }
        }
    }
}
