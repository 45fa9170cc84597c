//! Truncated holomorphic bases, Gram matrices and Bergman kernels.
//!
//! For a basis `e_1..e_N` and a measure `e^{-phi} dV` the Gram matrix is
//! `G_ij = <e_i, e_j> = sum_k w_k e^{-phi(x_k)} e_i(x_k) conj(e_j(x_k))`.
//! A function `f = sum_i c_i e_i` has `||f||^2 = sum_ij c_i conj(c_j) G_ij`
//! and the kernel of the span is `K(z, w) = e(w)^H G^{-1} e(z)`.

mod basis;
mod gram;
mod kernel;
mod minnorm;

pub use basis::{monomial_basis, Basis, MixedBasis, MonomialBasis};
pub use gram::{compute_gram, gram_with_density, gram_with_node_density, GramMatrix, EIGEN_FLOOR};
pub use kernel::{kernel_diag, kernel_diag_rayleigh, kernel_eval, reproducing_check};
pub use minnorm::{min_norm_element, norm_sq, Functional};
