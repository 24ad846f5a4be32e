//! The two polynomial families used to build blocks (flat ±1 Rudin–Shapiro
//! polynomials and bounded de la Vallée-Poussin profiles) and the
//! enumeration of Gaussian-rational target polynomials.

mod families;
mod targets;

pub use families::{rudin_shapiro, vdlp_star, SignedPolynomial, StarPolynomial};
pub use targets::{enumerate_targets, tilde_q, GaussianRational, TargetEntry, TargetEnumeration};
