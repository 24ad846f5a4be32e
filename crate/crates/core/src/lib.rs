//! Weighted Taylor shifts `T_alpha` and explicit truncated constructions of
//! upper-frequently hypercyclic functions, with numerical checks of their
//! norm bounds, weighted densities, radial growth and orbit visits.

pub mod cli;
pub mod constructor;
pub mod densities;
pub mod error;
pub mod means;
pub mod polybank;
pub mod repro;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use means::Exponent;
pub use series::{CoefficientSeries, ShiftParams};

/// Floats in CSV output: 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn fmt_exponent(p: Exponent) -> String {
    match p {
        Exponent::Infinity => "inf".to_string(),
        Exponent::Finite(v) => fmt_f64(v),
    }
}
