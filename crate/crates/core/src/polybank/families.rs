
use crate::error::{Error, Result};
use crate::series::CoefficientSeries;

/// A polynomial with every coefficient equal to +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPolynomial {
    signs: Vec<i8>,
}

impl SignedPolynomial {
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn plus_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s == 1).count()
    }

    pub fn to_series(&self) -> CoefficientSeries {
        CoefficientSeries::from_real(&self.signs.iter().map(|&s| s as f64).collect::<Vec<_>>())
            .expect("signs are finite and nonempty")
    }
}

/// A real polynomial with coefficients bounded by 1 in modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct StarPolynomial {
    coefficients: Vec<f64>,
}

impl StarPolynomial {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Number of coefficients exactly equal to +1.
    pub fn plus_count(&self) -> usize {
        self.coefficients.iter().filter(|&&x| x == 1.0).count()
    }

    pub fn to_series(&self) -> CoefficientSeries {
        CoefficientSeries::from_real(&self.coefficients).expect("profile is finite and nonempty")
    }
}

/// First `n` coefficients of the Rudin–Shapiro polynomial of length
/// `2^ceil(log2 n)`, built by the pair recursion
/// `P' = P + x^len Q`, `Q' = P - x^len Q` from `P = Q = 1`.
pub fn rudin_shapiro(n: usize) -> Result<SignedPolynomial> {
    if n == 0 {
        return Err(Error::domain("Rudin-Shapiro length must be at least 1"));
    }
    let mut p: Vec<i8> = vec![1];
    let mut q: Vec<i8> = vec![1];
    while p.len() < n {
        let mut next_p = Vec::with_capacity(2 * p.len());
        let mut next_q = Vec::with_capacity(2 * p.len());
        next_p.extend_from_slice(&p);
        next_p.extend_from_slice(&q);
        next_q.extend_from_slice(&p);
        next_q.extend(q.iter().map(|&s| -s));
        p = next_p;
        q = next_q;
    }
    p.truncate(n);
    Ok(SignedPolynomial { signs: p })
}

/// Shifted de la Vallée-Poussin profile of length `n`.
///
/// With `m = max(1, floor((n+1)/4))` the kernel `2K_{2m} - K_m` is moved to
/// be centred at index `2m`: coefficient `j` equals 1 when `|j - 2m| <= m`,
/// `2 - |j - 2m|/m` when `m < |j - 2m| < 2m`, and 0 otherwise. Indices past
/// `n - 1` are dropped.
pub fn vdlp_star(n: usize) -> Result<StarPolynomial> {
    if n == 0 {
        return Err(Error::domain("star polynomial length must be at least 1"));
    }
    let m = ((n + 1) / 4).max(1);
    let centre = 2 * m;
    let coefficients = (0..n)
        .map(|j| {
            let dist = j.abs_diff(centre);
            if dist <= m {
                1.0
            } else if dist < 2 * m {
                2.0 - dist as f64 / m as f64
            } else {
                0.0
            }
        })
        .collect();
    Ok(StarPolynomial { coefficients })
}
