//! Dense-matrix numerics shared by the solvers and the attention blocks.

mod matrix;
mod norm;
mod qr;
mod subspace;
mod svd;

pub use matrix::Matrix;
pub(crate) use matrix::{dot, norm};
pub use norm::{layer_norm, row_softmax, DEFAULT_LAYER_NORM_EPS};
pub use qr::{qr_orthonormalize, RANK_TOL};
pub use subspace::{principal_angles, subspace_cosine};
pub use svd::{top_singular_triplets, SingularTriplets, SVD_MAX_ITERS, SVD_TOL};
