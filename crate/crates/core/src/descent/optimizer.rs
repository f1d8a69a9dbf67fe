use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataio::Dataset;
use crate::descent::{
    euclidean_gradients, loss_eval, project_tangent, Init, LossConfig, OptimizerConfig,
};
use crate::error::{Error, Result};
use crate::matcore::{qr_orthonormalize, Matrix};
use crate::pls::{fit_cross_covariance, InnerRelation, PlsModel, Solver};

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step size within the allowed halvings decreased the loss.
    Stalled,
}

/// State recorded at one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    /// Norm of the Riemannian gradient (tangent-projected for P and Q).
    pub grad_norm: f64,
    /// `max(‖PᵀP − I‖_F, ‖QᵀQ − I‖_F)`.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentTrace {
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    pub p_drift: f64,
    pub q_drift: f64,
}

impl DescentTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.loss).collect()
    }

    /// Accepted steps.
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn final_loss(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.loss)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.grad_norm)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].loss <= w[0].loss)
    }

    /// CSV with header `iteration,loss,grad_norm,drift`, values at full
    /// precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,loss,grad_norm,drift\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?}",
                r.iteration, r.loss, r.grad_norm, r.drift
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Trial steps may grow to this multiple of the configured step size.
const MAX_STEP_GROWTH: f64 = 100.0;

struct Iterate {
    p: Matrix,
    q: Matrix,
    d: InnerRelation,
    loss: f64,
}

fn drift(m: &Matrix) -> f64 {
    m.orthonormality_error()
}

/// Minimizes the reconstruction-augmented loss over orthonormal `P`, `Q`
/// and an unconstrained (diagonal or general) `D`.
///
/// Each iteration projects the Euclidean gradients of `P` and `Q` onto the
/// tangent space of the Stiefel manifold, then backtracks until the
/// retracted trial point does not increase the loss. The first trial step is
/// `step_size`; later ones start at twice the last accepted step, capped at
/// `100 · step_size`. The recorded loss sequence is non-increasing.
pub fn fit_descent(
    ds: &Dataset,
    l: usize,
    loss_cfg: &LossConfig,
    opt_cfg: &OptimizerConfig,
) -> Result<(PlsModel, DescentTrace)> {
    loss_cfg.validate()?;
    opt_cfg.validate()?;
    ds.ensure_centered()?;
    let (x, y) = (ds.x(), ds.y());
    let (m, p_dim) = (ds.m(), ds.p());
    if l == 0 || l > m.min(p_dim) {
        return Err(Error::dim(format!(
            "cannot fit {l} components with m={m}, p={p_dim}"
        )));
    }

    let (p0, q0, d0) = match opt_cfg.init {
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opt_cfg.seed);
            let p0 = qr_orthonormalize(&Matrix::random_normal(m, l, &mut rng))?;
            let q0 = qr_orthonormalize(&Matrix::random_normal(p_dim, l, &mut rng))?;
            (p0, q0, InnerRelation::zeros(l, opt_cfg.d_mode))
        }
        Init::WarmStart => {
            let classical = fit_cross_covariance(ds, l)?;
            let d = classical.inner().with_mode(opt_cfg.d_mode);
            (classical.p().clone(), classical.q().clone(), d)
        }
    };
    let loss0 = loss_eval(x, y, &p0, &q0, &d0, loss_cfg)?;
    let mut cur = Iterate {
        p: p0,
        q: q0,
        d: d0,
        loss: loss0,
    };
    let mut rows = Vec::new();
    let diverged = |iteration: usize, rows: &Vec<TraceRow>, cur: &Iterate| Error::Divergence {
        iteration,
        trace: Box::new(DescentTrace {
            rows: rows.clone(),
            stop: StopReason::Stalled,
            p_drift: drift(&cur.p),
            q_drift: drift(&cur.q),
        }),
    };
    if !cur.loss.is_finite() {
        return Err(diverged(0, &rows, &cur));
    }

    let mut stop = StopReason::MaxIterations;
    let mut last_step = opt_cfg.step_size;
    for iteration in 0..=opt_cfg.max_iters {
        let g = euclidean_gradients(x, y, &cur.p, &cur.q, &cur.d, loss_cfg)?;
        let xi_p = project_tangent(&cur.p, &g.p);
        let xi_q = project_tangent(&cur.q, &g.q);
        let grad_norm = (xi_p.frobenius_sq() + xi_q.frobenius_sq() + g.d.norm_sq()).sqrt();
        if !grad_norm.is_finite() {
            return Err(diverged(iteration, &rows, &cur));
        }
        rows.push(TraceRow {
            iteration,
            loss: cur.loss,
            grad_norm,
            drift: drift(&cur.p).max(drift(&cur.q)),
        });
        log::trace!("iter {iteration}: loss {:e}, |grad| {grad_norm:e}", cur.loss);

        if grad_norm <= opt_cfg.grad_tol {
            stop = StopReason::Converged;
            break;
        }
        if iteration == opt_cfg.max_iters {
            break;
        }

        let mut step = (2.0 * last_step).min(opt_cfg.step_size * MAX_STEP_GROWTH);
        let mut accepted = None;
        for _ in 0..=opt_cfg.max_halvings {
            let p = qr_orthonormalize(&cur.p.add_scaled(-step, &xi_p))?;
            let q = qr_orthonormalize(&cur.q.add_scaled(-step, &xi_q))?;
            let d = cur.d.add_scaled(-step, &g.d);
            let loss = loss_eval(x, y, &p, &q, &d, loss_cfg)?;
            if loss.is_nan() {
                return Err(diverged(iteration + 1, &rows, &cur));
            }
            if loss <= cur.loss {
                last_step = step;
                accepted = Some(Iterate { p, q, d, loss });
                break;
            }
            step *= opt_cfg.backtrack_factor;
        }
        match accepted {
            Some(next) => cur = next,
            None => {
                log::debug!("line search stalled at iteration {iteration}");
                stop = StopReason::Stalled;
                break;
            }
        }
    }

    let trace = DescentTrace {
        rows,
        stop,
        p_drift: drift(&cur.p),
        q_drift: drift(&cur.q),
    };
    let model = PlsModel::new(
        cur.p,
        cur.q,
        cur.d,
        ds.x_mean().to_vec(),
        ds.y_mean().to_vec(),
        Solver::Descent,
    )?;
    Ok((model, trace))
}
