//! Higher derivatives and inverse gradients of spectral functions of
//! symmetric 3×3 tensors.
//!
//! For `A = Σ αᵢ Aᵢ` and a scalar function `f`, the n-th derivative of
//! `f(A) = Σ f(αᵢ) Aᵢ` is
//!
//! ```text
//! (1/n!) ∇⁽ⁿ⁾f(A) = Σ f[α_{i₁}, …, α_{iₙ₊₁}] A_{i₁} ⊠ … ⊠ A_{iₙ₊₁}
//! ```
//!
//! with `f[…]` the confluent divided difference of `f` and `⊠` the box
//! product `(A ⊠ B) X = A X Bᵗ`.

pub mod cli;
pub mod coefficients;
pub mod derivatives;
pub mod error;
pub mod inverse;
pub mod multilinear;
pub mod oracle;
pub mod scalar;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use multilinear::{BoxProduct, BoxSum, FourthTensor};
pub use scalar::{seth_hill, ScalarFn, StrainMeasureFn};
pub use spectral::{apply_fn, decompose, Spectrum, DEFAULT_CLUSTER_TOL};
pub use tensor::{Mat3, SymTensor};
