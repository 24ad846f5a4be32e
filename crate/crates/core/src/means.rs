//! Integral means `M_p(f, r)`, polynomial norms and radial growth fits.
//!
//! Circle samples come from one inverse FFT of the dilated coefficient
//! vector `a_j r^j`. For `p = 2` the mean is taken from the coefficients
//! directly (Parseval). For other finite `p` and for `p = inf` the value is
//! a sampled estimate; `inf` is a lower estimate of the true supremum.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::CoefficientSeries;

/// Oversampling factor for finite `p != 2`.
pub const OVERSAMPLING: usize = 4;
/// Oversampling factor for the sampled supremum.
pub const SUP_OVERSAMPLING: usize = 8;

/// An exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::domain(format!("exponent p must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`; `q = inf` when `p = 1`.
    pub fn conjugate(self) -> f64 {
        match self {
            Exponent::Infinity => 1.0,
            Exponent::Finite(p) if p == 1.0 => f64::INFINITY,
            Exponent::Finite(p) => p / (p - 1.0),
        }
    }

    fn is_parseval(self) -> bool {
        self == Exponent::Finite(2.0)
    }

    /// Smallest accepted quadrature size for a series of this maximal degree.
    pub fn quadrature_floor(self, max_degree: usize) -> usize {
        match self {
            Exponent::Infinity => SUP_OVERSAMPLING * (max_degree + 1),
            _ => OVERSAMPLING * (max_degree + 1),
        }
    }

    /// Default quadrature size: the floor rounded up to a power of two, with
    /// the sup oversampling also for `p = 1`, where `|f|` has kinks at zeros
    /// of `f` close to the circle.
    pub fn default_quadrature(self, max_degree: usize) -> usize {
        match self {
            Exponent::Finite(p) if p == 1.0 => (SUP_OVERSAMPLING * (max_degree + 1)).next_power_of_two(),
            _ => self.quadrature_floor(max_degree).next_power_of_two(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("cannot parse exponent '{other}'")))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `r^j`, with `0^0 = 1`.
#[inline]
pub(crate) fn radius_power(r: f64, j: usize) -> f64 {
    if r == 1.0 || j == 0 {
        1.0
    } else if r == 0.0 {
        0.0
    } else {
        (j as f64 * r.ln()).exp()
    }
}

/// Values of `sum a_j (r e^{i t})^j` at `t = 2 pi m / size`, `m = 0..size`.
///
/// Coefficients past `size` are folded onto their residue class, which is
/// exact for equispaced samples.
pub fn circle_samples(coefficients: &[Complex64], r: f64, size: usize) -> Vec<Complex64> {
    assert!(size > 0, "circle sample count must be positive");
    let mut buffer = vec![Complex64::new(0.0, 0.0); size];
    for (j, &a) in coefficients.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let w = radius_power(r, j);
        if w == 0.0 {
            if r < 1.0 && j > 0 {
                break;
            }
            continue;
        }
        buffer[j % size] += a * w;
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(size);
    fft.process(&mut buffer);
    buffer
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must lie in (0, 1), got {r}")))
    }
}

fn parseval(series: &CoefficientSeries, r: f64) -> f64 {
    series
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, a)| a.norm_sqr() * radius_power(r, 2 * j))
        .sum::<f64>()
        .sqrt()
}

fn sampled_mean(series: &CoefficientSeries, p: Exponent, r: f64, size: usize) -> Result<f64> {
    let floor = p.quadrature_floor(series.max_degree());
    if size < floor {
        return Err(Error::QuadratureTooSmall {
            given: size,
            required: floor,
        });
    }
    let samples = circle_samples(series.coefficients(), r, size);
    Ok(match p {
        Exponent::Infinity => samples.iter().map(|z| z.norm()).fold(0.0, f64::max),
        Exponent::Finite(p) => {
            // scale by the sup to keep |f|^p representable
            let top = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if top == 0.0 {
                return Ok(0.0);
            }
            let mean = samples.iter().map(|z| (z.norm() / top).powf(p)).sum::<f64>() / size as f64;
            top * mean.powf(1.0 / p)
        }
    })
}

/// `M_p(f, r)` for `0 < r < 1`.
///
/// `p = 2` is computed exactly from the coefficients and ignores
/// `quadrature_size`. Other exponents require at least
/// [`Exponent::quadrature_floor`] samples.
pub fn mean_p(series: &CoefficientSeries, p: Exponent, r: f64, quadrature_size: usize) -> Result<f64> {
    check_radius(r)?;
    if p.is_parseval() {
        return Ok(parseval(series, r));
    }
    sampled_mean(series, p, r, quadrature_size)
}

/// `M_p(f, r)` always by circle sampling, including `p = 2`.
pub fn mean_p_sampled(
    series: &CoefficientSeries,
    p: Exponent,
    r: f64,
    quadrature_size: usize,
) -> Result<f64> {
    check_radius(r)?;
    sampled_mean(series, p, r, quadrature_size)
}

/// `||P||_p` on the unit circle, with the default quadrature size.
pub fn poly_norm(series: &CoefficientSeries, p: Exponent) -> Result<f64> {
    if p.is_parseval() {
        return Ok(parseval(series, 1.0));
    }
    sampled_mean(series, p, 1.0, p.default_quadrature(series.max_degree()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeansRow {
    pub p: Exponent,
    pub r: f64,
    pub value: f64,
    pub quadrature_size: usize,
}

/// Rows of `(p, r, M_p(f, r))` sorted by `(p, r)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialMeansTable {
    rows: Vec<MeansRow>,
}

impl RadialMeansTable {
    pub fn from_rows(mut rows: Vec<MeansRow>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|row| !(row.value.is_finite() && row.value >= 0.0)) {
            return Err(Error::domain(format!(
                "mean value {} at p = {}, r = {} is not a finite nonnegative number",
                bad.value, bad.p, bad.r
            )));
        }
        rows.sort_by(|a, b| a.p.value().total_cmp(&b.p.value()).then(a.r.total_cmp(&b.r)));
        Ok(RadialMeansTable { rows })
    }

    pub fn rows(&self) -> &[MeansRow] {
        &self.rows
    }

    pub fn rows_for(&self, p: Exponent) -> impl Iterator<Item = &MeansRow> {
        self.rows.iter().filter(move |row| row.p == p)
    }

    /// Inverse of [`RadialMeansTable::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("p,r,value,quadrature_size") => {}
            other => {
                return Err(Error::domain(format!(
                    "means CSV must start with header p,r,value,quadrature_size, found {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::domain(format!("means CSV line {}: cannot parse '{line}'", i + 2));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [p, r, value, size] = fields[..] else {
                return Err(bad());
            };
            rows.push(MeansRow {
                p: p.parse().map_err(|_| bad())?,
                r: r.parse().map_err(|_| bad())?,
                value: value.parse().map_err(|_| bad())?,
                quadrature_size: size.parse().map_err(|_| bad())?,
            });
        }
        Self::from_rows(rows)
    }

    /// CSV with header `p,r,value,quadrature_size`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,r,value,quadrature_size\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::fmt_exponent(row.p),
                crate::fmt_f64(row.r),
                crate::fmt_f64(row.value),
                row.quadrature_size
            ));
        }
        out
    }
}

/// Radii `1 - 2^{-j}` for `j = 1..=floor(log2 max_degree) - 1`.
pub fn default_radii(max_degree: usize) -> Vec<f64> {
    let top = (max_degree.max(1) as f64).log2().floor() as i32 - 1;
    (1..=top).map(|j| 1.0 - 2f64.powi(-j)).collect()
}

/// Radii `1 - 2^{-j}` for `j = 1..=count`.
pub fn dyadic_radii(count: u32) -> Vec<f64> {
    (1..=count as i32).map(|j| 1.0 - 2f64.powi(-j)).collect()
}

/// `M_p(f, r)` on the grid `p_list x radii`, rows computed in parallel.
pub fn means_table(series: &CoefficientSeries, p_list: &[Exponent], radii: &[f64]) -> Result<RadialMeansTable> {
    if p_list.is_empty() || radii.is_empty() {
        return Err(Error::domain("means table needs at least one exponent and one radius"));
    }
    let grid: Vec<(Exponent, f64)> = p_list
        .iter()
        .flat_map(|&p| radii.iter().map(move |&r| (p, r)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(p, r)| {
            let size = if p.is_parseval() {
                0
            } else {
                p.default_quadrature(series.max_degree())
            };
            mean_p(series, p, r, size).map(|value| MeansRow {
                p,
                r,
                value,
                quadrature_size: size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RadialMeansTable::from_rows(rows)
}

/// Least-squares fit of `log M_p` against `log(1/(1-r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub r_window: (f64, f64),
}

/// Straight-line least squares; returns `(slope, intercept, residual_rms)`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fits the radial growth exponent at `p` over the upper half of the radii.
pub fn fit_growth_exponent(table: &RadialMeansTable, p: Exponent) -> Result<GrowthFit> {
    let rows: Vec<&MeansRow> = table.rows_for(p).collect();
    let mut distinct: Vec<f64> = rows.iter().map(|row| row.r).collect();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::domain(format!(
            "growth fit at p = {p} needs at least 4 distinct radii, found {}",
            distinct.len()
        )));
    }
    let upper = &rows[rows.len() / 2..];
    if let Some(row) = upper.iter().find(|row| row.value <= 0.0) {
        return Err(Error::domain(format!(
            "growth fit at p = {p} hit a zero mean at r = {}",
            row.r
        )));
    }
    let points: Vec<(f64, f64)> = upper
        .iter()
        .map(|row| (-(-row.r).ln_1p(), row.value.ln()))
        .collect();
    let (slope, intercept, residual_rms) = least_squares(&points);
    Ok(GrowthFit {
        slope,
        intercept,
        residual_rms,
        r_window: (upper[0].r, upper[upper.len() - 1].r),
    })
}

/// `(1 - gamma) / max(2, q)`, with `q = inf` (hence 0) when `p = 1`.
pub fn critical_exponent(p: Exponent, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let q = p.conjugate();
    Ok((1.0 - gamma) / q.max(2.0))
}

/// Growth exponent of `M_p(f, r)` in powers of `1/(1-r)` expected from the
/// construction: `critical - alpha` below the critical exponent, 0 at or
/// above it.
pub fn predicted_growth(p: Exponent, gamma: f64, alpha: f64) -> Result<f64> {
    Ok((critical_exponent(p, gamma)? - alpha).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(re: &[f64]) -> CoefficientSeries {
        CoefficientSeries::from_real(re).unwrap()
    }

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn constants_and_monomials() {
        let c = CoefficientSeries::constant(Complex64::new(3.0, 4.0));
        for e in [p(1.0), p(1.5), p(2.0), Exponent::Infinity] {
            let v = mean_p(&c, e, 0.37, e.default_quadrature(0)).unwrap();
            assert!((v - 5.0).abs() < 1e-12, "{e}: {v}");
        }
        let one_plus_z = series(&[1.0, 1.0]);
        assert!((mean_p(&one_plus_z, p(2.0), 0.5, 0).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
        let z3 = series(&[0.0, 0.0, 0.0, 1.0]);
        let sup = mean_p(&z3, Exponent::Infinity, 0.9, 64).unwrap();
        assert!((sup - 0.729).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let s = series(&[1.0, 2.0, 3.0]);
        assert!(mean_p(&s, p(2.0), 1.0, 0).is_err());
        assert!(mean_p(&s, p(2.0), 0.0, 0).is_err());
        match mean_p(&s, p(1.5), 0.5, 8) {
            Err(Error::QuadratureTooSmall { required, .. }) => assert_eq!(required, 12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Exponent::new(0.5).is_err());
        assert!(means_table(&s, &[p(2.0)], &[]).is_err());
    }

    #[test]
    fn norms() {
        let one = series(&[1.0]);
        for e in [p(1.0), p(3.0), Exponent::Infinity] {
            assert!((poly_norm(&one, e).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_parsing_and_conjugates() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1.5".parse::<Exponent>().unwrap(), p(1.5));
        assert!("x".parse::<Exponent>().is_err());
        assert_eq!(p(1.0).conjugate(), f64::INFINITY);
        assert_eq!(p(2.0).conjugate(), 2.0);
        assert_eq!(Exponent::Infinity.conjugate(), 1.0);
    }

    #[test]
    fn critical_exponent_values() {
        assert_eq!(critical_exponent(p(2.0), 0.0).unwrap(), 0.5);
        assert_eq!(critical_exponent(p(1.0), 0.3).unwrap(), 0.0);
        assert!((critical_exponent(p(4.0), 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(critical_exponent(Exponent::Infinity, 0.0).unwrap(), 0.5);
        assert!(critical_exponent(p(2.0), 1.5).is_err());
    }

    #[test]
    fn table_shape_and_grid() {
        let s = series(&[1.0, 1.0]);
        let t = means_table(&s, &[p(2.0)], &[0.5]).unwrap();
        assert_eq!(t.rows().len(), 1);
        assert!((t.rows()[0].value - 1.25f64.sqrt()).abs() < 1e-15);
        let radii = default_radii(1 << 20);
        assert_eq!(radii.len(), 19);
        assert_eq!(radii[0], 0.5);
        assert_eq!(radii[18], 1.0 - 2f64.powi(-19));
    }

    fn synthetic(values: impl Fn(f64) -> f64) -> RadialMeansTable {
        let rows = dyadic_radii(16)
            .into_iter()
            .map(|r| MeansRow {
                p: p(2.0),
                r,
                value: values(r),
                quadrature_size: 0,
            })
            .collect();
        RadialMeansTable::from_rows(rows).unwrap()
    }

    #[test]
    fn fit_exact_power_law_and_constant() {
        let fit = fit_growth_exponent(&synthetic(|r| (1.0 - r).powf(-0.3)), p(2.0)).unwrap();
        assert!((fit.slope - 0.3).abs() < 1e-10, "{fit:?}");
        assert!(fit.residual_rms < 1e-10);
        let flat = fit_growth_exponent(&synthetic(|_| 2.5), p(2.0)).unwrap();
        assert!(flat.slope.abs() < 1e-10);
        let short = RadialMeansTable::from_rows(synthetic(|_| 1.0).rows()[..3].to_vec()).unwrap();
        assert!(fit_growth_exponent(&short, p(2.0)).is_err());
    }

    fn random_series(rng: &mut ChaCha8Rng, max_degree: usize) -> CoefficientSeries {
        let d = rng.gen_range(0..=max_degree);
        CoefficientSeries::new(
            (0..=d)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parseval_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = random_series(&mut rng, 512);
            for r in [0.3, 0.9] {
                let exact = mean_p(&s, p(2.0), r, 0).unwrap();
                let sampled = mean_p_sampled(&s, p(2.0), r, p(2.0).default_quadrature(s.max_degree())).unwrap();
                assert!((exact - sampled).abs() <= 1e-8, "{exact} vs {sampled}");
            }
        }
    }

    #[test]
    fn quadrature_doubling_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = random_series(&mut rng, 256);
            for e in [p(1.5), p(3.0), p(4.0)] {
                for r in [0.3, 0.5] {
                    let n = e.default_quadrature(s.max_degree());
                    let a = mean_p(&s, e, r, n).unwrap();
                    let b = mean_p(&s, e, r, 2 * n).unwrap();
                    assert!((a - b).abs() <= 1e-6 * a.max(b), "{e} r={r}: {a} vs {b}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, .. ProptestConfig::default() })]

        #[test]
        fn monotone_in_radius(seed: u64, r1 in 0.05f64..0.95, dr in 0.0f64..0.04) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_series(&mut rng, 64);
            let r2 = r1 + dr;
            for e in [p(1.0), p(2.0), p(2.5), Exponent::Infinity] {
                let n = e.default_quadrature(s.max_degree());
                let lo = mean_p(&s, e, r1, n).unwrap();
                let hi = mean_p(&s, e, r2, n).unwrap();
                prop_assert!(lo <= hi + 1e-9, "{} {} {}", e, lo, hi);
            }
        }

        #[test]
        fn monotone_in_exponent(seed: u64, r in 0.05f64..0.99) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_series(&mut rng, 64);
            let exps = [p(1.0), p(1.5), p(2.0), p(3.0), Exponent::Infinity];
            let n = Exponent::Infinity.default_quadrature(s.max_degree());
            let values: Vec<f64> = exps.iter().map(|&e| mean_p(&s, e, r, n).unwrap()).collect();
            for w in values.windows(2) {
                prop_assert!(w[0] <= w[1] * (1.0 + 1e-6), "{:?}", values);
            }
        }
    }
}
