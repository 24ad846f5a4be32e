use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent schedule `u_n = h(n)` with `u_{n+1} - u_n -> inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum USchedule {
    /// `u_n = n^2`.
    Squares,
    /// A finite prefix `u_0, u_1, ...`; gaps extrapolate linearly in `h`.
    Explicit(Vec<u32>),
}

impl USchedule {
    pub fn validate(&self) -> Result<()> {
        let USchedule::Explicit(u) = self else {
            return Ok(());
        };
        if u.len() < 3 {
            return Err(Error::domain("explicit u schedule needs at least 3 terms"));
        }
        for n in 1..u.len() {
            if u[n] <= u[n - 1] {
                return Err(Error::domain(format!(
                    "u schedule must increase strictly: u_{} = {} <= u_{} = {}",
                    n,
                    u[n],
                    n - 1,
                    u[n - 1]
                )));
            }
        }
        // gaps nondecreasing beyond the first one
        for n in 2..u.len() - 1 {
            if u[n + 1] - u[n] < u[n] - u[n - 1] {
                return Err(Error::domain(format!(
                    "u schedule gaps must be nondecreasing from n = 1 on; gap at n = {n} shrinks"
                )));
            }
        }
        Ok(())
    }

    pub fn u(&self, n: u32) -> Result<u32> {
        match self {
            USchedule::Squares => n
                .checked_mul(n)
                .ok_or_else(|| Error::domain(format!("u_{n} = n^2 overflows"))),
            USchedule::Explicit(u) => u.get(n as usize).copied().ok_or_else(|| {
                Error::domain(format!("explicit u schedule has {} terms, u_{n} requested", u.len()))
            }),
        }
    }

    /// Continuous increasing interpolant with `h(n) = u_n`.
    pub fn h(&self, x: f64) -> f64 {
        match self {
            USchedule::Squares => x * x,
            USchedule::Explicit(u) => {
                let last = u.len() - 1;
                let i = (x.floor().max(0.0) as usize).min(last - 1);
                let slope = u[i + 1] as f64 - u[i] as f64;
                u[i] as f64 + slope * (x - i as f64)
            }
        }
    }

    /// Inverse of [`USchedule::h`].
    pub fn h_inv(&self, y: f64) -> f64 {
        match self {
            USchedule::Squares => y.max(0.0).sqrt(),
            USchedule::Explicit(u) => {
                let last = u.len() - 1;
                let i = match u.iter().position(|&v| v as f64 > y) {
                    Some(0) => 0,
                    Some(p) => (p - 1).min(last - 1),
                    None => last - 1,
                };
                let slope = u[i + 1] as f64 - u[i] as f64;
                i as f64 + (y - u[i] as f64) / slope
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares() {
        let s = USchedule::Squares;
        assert_eq!(s.u(6).unwrap(), 36);
        assert_eq!(s.h_inv(36.0), 6.0);
        assert_eq!(s.h(2.5), 6.25);
    }

    #[test]
    fn explicit_interpolation_inverts() {
        let s = USchedule::Explicit(vec![0, 1, 3, 6, 10]);
        s.validate().unwrap();
        for x in [0.0, 0.5, 1.0, 2.7, 3.9, 5.5] {
            assert!((s.h_inv(s.h(x)) - x).abs() < 1e-12, "{x}");
        }
        assert_eq!(s.h(3.0), 6.0);
        assert!(s.u(5).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(USchedule::Explicit(vec![0, 2, 1]).validate().is_err());
        assert!(USchedule::Explicit(vec![0, 1, 4, 6]).validate().is_err());
        assert!(USchedule::Explicit(vec![0, 1]).validate().is_err());
        assert!(USchedule::Explicit(vec![0, 5, 6, 8]).validate().is_ok());
    }
}
