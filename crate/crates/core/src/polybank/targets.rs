use std::collections::{BTreeSet, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::CoefficientSeries;

/// Exact Gaussian rational `(a + b i) / c` in lowest terms with `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn gcd(mut x: i64, mut y: i64) -> i64 {
    x = x.abs();
    y = y.abs();
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

impl GaussianRational {
    pub const ZERO: GaussianRational = GaussianRational { a: 0, b: 0, c: 1 };

    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::domain("Gaussian rational with zero denominator"));
        }
        let sign = c.signum();
        let g = gcd(gcd(a, b), c);
        Ok(GaussianRational {
            a: sign * a / g,
            b: sign * b / g,
            c: c.abs() / g,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.a as f64 / self.c as f64, self.b as f64 / self.c as f64)
    }

    pub fn modulus(self) -> f64 {
        (self.a as f64).hypot(self.b as f64) / self.c as f64
    }

    /// Ordering key inside one height: denominator, then taxicab size of the
    /// numerator, then the numerator itself.
    fn enumeration_key(self) -> (i64, i64, i64, i64) {
        (self.c, self.a.abs() + self.b.abs(), self.a, self.b)
    }
}

/// One enumerated target `q_k` with its bound `l_k >= ||q_k||_1` and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetEntry {
    k: usize,
    exact: Vec<GaussianRational>,
    l: u64,
    series: CoefficientSeries,
}

impl TargetEntry {
    /// Builds an entry, trimming trailing zeros and checking `||q||_1 <= l`.
    pub fn new(k: usize, mut exact: Vec<GaussianRational>, l: u64) -> Result<Self> {
        while exact.len() > 1 && exact.last().is_some_and(|g| g.is_zero()) {
            exact.pop();
        }
        if exact.is_empty() {
            exact.push(GaussianRational::ZERO);
        }
        let l1: f64 = exact.iter().map(|g| g.modulus()).sum();
        if l1 > l as f64 {
            return Err(Error::domain(format!(
                "target {k} has l1 norm {l1} above its bound l = {l}"
            )));
        }
        let series = CoefficientSeries::new(exact.iter().map(|g| g.to_complex()).collect())?;
        Ok(TargetEntry { k, exact, l, series })
    }

    /// 1-based position in the enumeration.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    /// Exact degree (0 for constants, including the zero polynomial).
    pub fn degree(&self) -> usize {
        self.exact.len() - 1
    }

    pub fn exact_coefficients(&self) -> &[GaussianRational] {
        &self.exact
    }

    pub fn series(&self) -> &CoefficientSeries {
        &self.series
    }

    pub fn l1_norm(&self) -> f64 {
        self.exact.iter().map(|g| g.modulus()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.exact.iter().all(|g| g.is_zero())
    }
}

/// Dense sequence of target polynomials, indexed from 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetEnumeration {
    entries: Vec<TargetEntry>,
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    k: usize,
    degree: usize,
    l_k: u64,
    coefficients: Vec<[i64; 3]>,
}

impl TargetEnumeration {
    pub fn from_entries(entries: Vec<TargetEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.k != i + 1 {
                return Err(Error::domain(format!(
                    "target at position {} carries index k = {}",
                    i + 1,
                    e.k
                )));
            }
        }
        Ok(TargetEnumeration { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `k` (1-based).
    pub fn get(&self, k: usize) -> Option<&TargetEntry> {
        k.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn entries(&self) -> &[TargetEntry] {
        &self.entries
    }

    /// Serializes to the `targets.json` layout.
    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<TargetJson> = self
            .entries
            .iter()
            .map(|e| TargetJson {
                k: e.k,
                degree: e.degree(),
                l_k: e.l,
                coefficients: e.exact.iter().map(|g| [g.a, g.b, g.c]).collect(),
            })
            .collect();
        serde_json::to_string_pretty(&rows).map_err(|source| Error::Json {
            context: "serializing targets".into(),
            source,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<TargetJson> = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing targets".into(),
            source,
        })?;
        let mut entries = Vec::with_capacity(rows.len());
        for row in rows {
            let exact = row
                .coefficients
                .iter()
                .map(|&[a, b, c]| GaussianRational::new(a, b, c))
                .collect::<Result<Vec<_>>>()?;
            let entry = TargetEntry::new(row.k, exact, row.l_k)?;
            if entry.degree() != row.degree {
                return Err(Error::domain(format!(
                    "target {} declares degree {} but has exact degree {}",
                    row.k,
                    row.degree,
                    entry.degree()
                )));
            }
            entries.push(entry);
        }
        Self::from_entries(entries)
    }
}

/// Reduced coefficient values of height `h`, in enumeration order (zero first).
fn alphabet(h: i64) -> Vec<GaussianRational> {
    let mut seen = BTreeSet::new();
    for c in 1..=h {
        for a in -h..=h {
            for b in -h..=h {
                let g = GaussianRational::new(a, b, c).expect("c >= 1");
                seen.insert((g.enumeration_key(), g));
            }
        }
    }
    seen.into_iter().map(|(_, g)| g).collect()
}

/// The first `count` targets of the diagonal enumeration.
///
/// Stages run over `s = d + H = 1, 2, ...`, degree ascending inside a stage.
/// Each stage lists coefficient tuples `(b_0, ..., b_d)` drawn from the
/// height-`H` alphabet in lexicographic order (`b_0` most significant) and
/// keeps the polynomials not seen before. The bound is
/// `l_k = k + ceil(||q_k||_1)`.
pub fn enumerate_targets(count: usize) -> Result<TargetEnumeration> {
    if count == 0 {
        return Err(Error::domain("target count must be at least 1"));
    }
    let mut seen: HashSet<Vec<GaussianRational>> = HashSet::new();
    let mut entries = Vec::with_capacity(count);

    'stages: for stage in 1i64.. {
        for degree in 0..stage {
            let height = stage - degree;
            let letters = alphabet(height);
            let width = degree as usize + 1;
            let mut odometer = vec![0usize; width];
            loop {
                let mut poly: Vec<GaussianRational> = odometer.iter().map(|&i| letters[i]).collect();
                while poly.len() > 1 && poly.last().is_some_and(|g| g.is_zero()) {
                    poly.pop();
                }
                if seen.insert(poly.clone()) {
                    let k = entries.len() + 1;
                    let l1: f64 = poly.iter().map(|g| g.modulus()).sum();
                    let l = k as u64 + l1.ceil() as u64;
                    entries.push(TargetEntry::new(k, poly, l)?);
                    if entries.len() == count {
                        break 'stages;
                    }
                }
                // advance, last coefficient fastest
                let mut pos = width;
                let exhausted = loop {
                    if pos == 0 {
                        break true;
                    }
                    pos -= 1;
                    odometer[pos] += 1;
                    if odometer[pos] < letters.len() {
                        break false;
                    }
                    odometer[pos] = 0;
                };
                if exhausted {
                    break;
                }
            }
        }
    }
    TargetEnumeration::from_entries(entries)
}

/// `sum (j+1)^alpha b_j z^j` for `q = sum b_j z^j`.
pub fn tilde_q(q: &CoefficientSeries, alpha: f64) -> CoefficientSeries {
    let coefficients = q
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, &b)| b * ((j + 1) as f64).powf(alpha))
        .collect();
    CoefficientSeries::new(coefficients).expect("scaling keeps a nonempty finite series")
}
