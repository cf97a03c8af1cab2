//! Explicit surrogates for the extremal functions: a `C^{2,ε}` bump sum on
//! the line, the polynomial `H(s, z)`, the series `ψ`, `f = exp(-βψ)`, and a
//! one-variable outer function with prescribed boundary modulus.

mod bump;
mod outer;
mod psi;

pub use bump::BumpFunction;
pub use outer::{outer_surrogate, OuterWeight};
pub use psi::{dist_to_ms, f_exp, local_covering_sum, psi_derivative_bound, surrogate_h, DerivativeReport, PsiSeries};
