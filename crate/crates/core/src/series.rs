//! Truncated Taylor series and the weighted Taylor shift.
//!
//! A [`CoefficientSeries`] stores `a_0, ..., a_D` densely; index `j` holds
//! the coefficient of `z^j`. Trailing zeros are kept so that the length
//! always equals `max_degree + 1`.

use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Finite truncated Taylor series at 0 with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    coefficients: Vec<Complex64>,
}

/// Exponent of the weight sequence `w_n = (1 + 1/n)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParams {
    alpha: f64,
}

impl ShiftParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(ShiftParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// The shift weight `w_n(alpha) = (1 + 1/n)^alpha`, defined for `n >= 1`.
pub fn weight(n: u64, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("weight index n must be at least 1"));
    }
    Ok((1.0 + 1.0 / n as f64).powf(alpha))
}

/// Product `w_{j+1} w_{j+2} ... w_{j+n}`, telescoped to `((j+n+1)/(j+1))^alpha`.
#[inline]
pub(crate) fn telescoped_weight(j: u64, n: u64, alpha: f64) -> f64 {
    if alpha == 0.0 || n == 0 {
        return 1.0;
    }
    ((j + n + 1) as f64 / (j + 1) as f64).powf(alpha)
}

impl CoefficientSeries {
    /// Wraps a coefficient vector. Rejects empty input and non-finite values.
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::domain("a series needs at least one coefficient"));
        }
        if let Some(j) = coefficients
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::domain(format!("coefficient {j} is not finite")));
        }
        Ok(CoefficientSeries { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The zero series of the given maximal degree.
    pub fn zeros(max_degree: usize) -> Self {
        CoefficientSeries {
            coefficients: vec![Complex64::new(0.0, 0.0); max_degree + 1],
        }
    }

    pub fn constant(c: Complex64) -> Self {
        CoefficientSeries {
            coefficients: vec![c],
        }
    }

    pub fn max_degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    /// Coefficient of `z^j`, zero beyond the truncation.
    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.coefficients
            .get(j)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Index of the highest nonzero coefficient, `None` for the zero series.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| c.norm_sqr() != 0.0)
    }

    /// The series truncated (or zero-extended) to the given maximal degree.
    pub fn resized(&self, max_degree: usize) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients.resize(max_degree + 1, Complex64::new(0.0, 0.0));
        CoefficientSeries { coefficients }
    }

    /// Horner evaluation of `sum a_j z^j`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// One application of `T_alpha`: coefficient `j` becomes `a_{j+1} w_{j+1}`.
    pub fn apply_shift(&self, params: ShiftParams) -> Self {
        if self.coefficients.len() == 1 {
            return Self::zeros(0);
        }
        let alpha = params.alpha();
        let coefficients = self.coefficients[1..]
            .iter()
            .enumerate()
            .map(|(j, &a)| a * (1.0 + 1.0 / (j + 1) as f64).powf(alpha))
            .collect();
        CoefficientSeries { coefficients }
    }

    /// `T_alpha^n` in closed form. Coefficient `j` of the result is
    /// `a_{j+n} ((j+n+1)/(j+1))^alpha`.
    pub fn apply_shift_power(&self, n: usize, params: ShiftParams) -> Self {
        if n == 0 {
            return self.clone();
        }
        if n > self.max_degree() {
            return Self::zeros(0);
        }
        let alpha = params.alpha();
        let coefficients = self.coefficients[n..]
            .iter()
            .enumerate()
            .map(|(j, &a)| a * telescoped_weight(j as u64, n as u64, alpha))
            .collect();
        CoefficientSeries { coefficients }
    }
}

impl Add for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn add(self, rhs: &CoefficientSeries) -> CoefficientSeries {
        let len = self.coefficients.len().max(rhs.coefficients.len());
        let coefficients = (0..len)
            .map(|j| self.coefficient(j) + rhs.coefficient(j))
            .collect();
        CoefficientSeries { coefficients }
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    max_degree: usize,
    coefficients: Vec<[f64; 2]>,
}

impl Serialize for CoefficientSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            max_degree: self.max_degree(),
            coefficients: self.coefficients.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefficientSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SeriesJson::deserialize(deserializer)?;
        if raw.coefficients.len() != raw.max_degree + 1 {
            return Err(D::Error::custom(format!(
                "max_degree {} does not match {} coefficients",
                raw.max_degree,
                raw.coefficients.len()
            )));
        }
        let coefficients = raw
            .coefficients
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        CoefficientSeries::new(coefficients).map_err(D::Error::custom)
    }
}
