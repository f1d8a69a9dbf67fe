//! PLS as a regression: orthonormal loadings `P`, `Q` and an inner relation
//! `D` are found by minimizing
//!
//! ```text
//! L(P, Q, D; α, β) = ½ [ ‖XPD − YQ‖² + α‖XPPᵀ − X‖² + β‖YQQᵀ − Y‖² ]
//! ```
//!
//! subject to `PᵀP = I` and `QᵀQ = I`, using Riemannian gradient descent on
//! the Stiefel manifold with a QR retraction. Norms are Frobenius; stacking
//! the observations row-wise makes the sum over observation pairs implicit.

mod equivalence;
pub mod gradcheck;
mod loss;
mod optimizer;

pub use equivalence::{mse_equivalence_check, mse_equivalence_over, EquivalenceReport};
pub use loss::{euclidean_gradients, loss_eval, loss_terms, project_tangent, Gradients, LossTerms};
pub use optimizer::{fit_descent, DescentTrace, StopReason, TraceRow};

use crate::error::{Error, Result};
use crate::pls::DMode;

/// Weights of the reconstruction penalties on X and Y.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl LossConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let cfg = LossConfig { alpha, beta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Starting point for the loadings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// QR of seeded Gaussian matrices, with `D = 0`.
    #[default]
    Random,
    /// The cross-covariance solution, including its fitted `D`.
    WarmStart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Initial trial step of every line search.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once the norm of the Riemannian gradient drops to this.
    pub grad_tol: f64,
    /// Step shrink factor of the backtracking line search.
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    pub d_mode: DMode,
    pub seed: u64,
    pub init: Init,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_size: 1e-2,
            max_iters: 5_000,
            grad_tol: 1e-8,
            backtrack_factor: 0.5,
            max_halvings: 60,
            d_mode: DMode::Diagonal,
            seed: 42,
            init: Init::Random,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Config(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::Config(format!(
                "gradient tolerance must be positive, got {}",
                self.grad_tol
            )));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Config(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        Ok(())
    }
}
