//! Partial least squares, its reformulation as an orthogonality-constrained
//! regression solved by Riemannian gradient descent, and the single-head
//! attention blocks it can be expressed with.
//!
//! * [`matcore`]: dense matrices, row softmax, layer norm, QR and a power
//!   iteration SVD.
//! * [`pls`]: the cross-covariance (SVD) fit, scores, inner relation and
//!   prediction.
//! * [`descent`]: the reconstruction-augmented loss, its gradients and the
//!   Stiefel-manifold optimizer.
//! * [`attention`]: projections, self/cross attention, encoder block, FFN and
//!   the bridge from a fitted model.
//! * [`dataio`]: CSV ingestion, centering and model files.
//!
//! ```
//! use plsattn::{dataio::Dataset, matcore::Matrix, pls};
//!
//! let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])?;
//! let y = Matrix::from_rows(&[[2.0], [1.0], [3.0], [5.0]])?;
//! let ds = Dataset::centered(x.clone(), y)?;
//! let model = pls::fit_cross_covariance(&ds, 1)?;
//! let yhat = model.predict(&x)?;
//! assert_eq!(yhat.shape(), (4, 1));
//! # Ok::<(), plsattn::Error>(())
//! ```

pub mod attention;
pub mod cli;
pub mod dataio;
pub mod descent;
mod error;
pub mod matcore;
pub mod pls;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/matrices.md")]
    struct Matrices;
    #[doc = include_str!("../../../book/src/pls.md")]
    struct Pls;
    #[doc = include_str!("../../../book/src/descent.md")]
    struct Descent;
    #[doc = include_str!("../../../book/src/attention.md")]
    struct Attention;
    #[doc = include_str!("../../../book/src/bridge.md")]
    struct Bridge;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
