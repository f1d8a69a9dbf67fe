use crate::descent::LossConfig;
use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::pls::InnerRelation;

/// The three halves-of-squared-norms making up the loss, unweighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    /// `½‖XPD − YQ‖²`
    pub regression: f64,
    /// `½‖XPPᵀ − X‖²`
    pub x_reconstruction: f64,
    /// `½‖YQQᵀ − Y‖²`
    pub y_reconstruction: f64,
}

impl LossTerms {
    pub fn total(&self, cfg: &LossConfig) -> f64 {
        let mut total = self.regression;
        // skip zero weights so an infinite reconstruction error cannot leak in as NaN
        if cfg.alpha != 0.0 {
            total += cfg.alpha * self.x_reconstruction;
        }
        if cfg.beta != 0.0 {
            total += cfg.beta * self.y_reconstruction;
        }
        total
    }
}

/// Euclidean partial derivatives of the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub p: Matrix,
    pub q: Matrix,
    /// Restricted to the diagonal when the relation is diagonal.
    pub d: InnerRelation,
}

fn check_shapes(x: &Matrix, y: &Matrix, p: &Matrix, q: &Matrix, d: &InnerRelation) -> Result<()> {
    let l = p.cols();
    let ok = x.rows() == y.rows()
        && p.rows() == x.cols()
        && q.rows() == y.cols()
        && q.cols() == l
        && d.dim() == l
        && match d {
            InnerRelation::General(dm) => dm.cols() == l,
            InnerRelation::Diagonal(_) => true,
        };
    if !ok {
        return Err(Error::dim(format!(
            "inconsistent shapes: X {:?}, Y {:?}, P {:?}, Q {:?}, D of size {}",
            x.shape(),
            y.shape(),
            p.shape(),
            q.shape(),
            d.dim()
        )));
    }
    Ok(())
}

pub fn loss_terms(
    x: &Matrix,
    y: &Matrix,
    p: &Matrix,
    q: &Matrix,
    d: &InnerRelation,
) -> Result<LossTerms> {
    check_shapes(x, y, p, q, d)?;
    let xp = x.dot(p);
    let yq = y.dot(q);
    let residual = d.apply(&xp).sub(&yq);
    let x_err = xp.dot_t(p).sub(x);
    let y_err = yq.dot_t(q).sub(y);
    Ok(LossTerms {
        regression: 0.5 * residual.frobenius_sq(),
        x_reconstruction: 0.5 * x_err.frobenius_sq(),
        y_reconstruction: 0.5 * y_err.frobenius_sq(),
    })
}

/// `½[‖XPD − YQ‖² + α‖XPPᵀ − X‖² + β‖YQQᵀ − Y‖²]`.
pub fn loss_eval(
    x: &Matrix,
    y: &Matrix,
    p: &Matrix,
    q: &Matrix,
    d: &InnerRelation,
    cfg: &LossConfig,
) -> Result<f64> {
    Ok(loss_terms(x, y, p, q, d)?.total(cfg))
}

/// Closed-form Euclidean gradients. With `R = XPD − YQ`, `E = XPPᵀ − X` and
/// `F = YQQᵀ − Y`:
///
/// ```text
/// ∂L/∂P = XᵀR Dᵀ + α (XᵀE P + EᵀX P)
/// ∂L/∂Q = −YᵀR   + β (YᵀF Q + FᵀY Q)
/// ∂L/∂D = PᵀXᵀR
/// ```
pub fn euclidean_gradients(
    x: &Matrix,
    y: &Matrix,
    p: &Matrix,
    q: &Matrix,
    d: &InnerRelation,
    cfg: &LossConfig,
) -> Result<Gradients> {
    check_shapes(x, y, p, q, d)?;
    let xp = x.dot(p);
    let yq = y.dot(q);
    let residual = d.apply(&xp).sub(&yq);
    let xt_res = x.t_dot(&residual);

    let mut g_p = xt_res.dot_t(&d.to_matrix());
    if cfg.alpha != 0.0 {
        let e = xp.dot_t(p).sub(x);
        let sym_part = x.t_dot(&e).dot(p).add(&e.t_dot(&xp));
        g_p = g_p.add_scaled(cfg.alpha, &sym_part);
    }

    let mut g_q = y.t_dot(&residual).scale(-1.0);
    if cfg.beta != 0.0 {
        let f = yq.dot_t(q).sub(y);
        let sym_part = y.t_dot(&f).dot(q).add(&f.t_dot(&yq));
        g_q = g_q.add_scaled(cfg.beta, &sym_part);
    }

    let g_d_full = p.t_dot(&xt_res);
    let g_d = match d {
        InnerRelation::Diagonal(_) => InnerRelation::Diagonal(g_d_full.diag()),
        InnerRelation::General(_) => InnerRelation::General(g_d_full),
    };
    Ok(Gradients {
        p: g_p,
        q: g_q,
        d: g_d,
    })
}

/// Projection onto the tangent space of the Stiefel manifold at `point`:
/// `G − point · sym(pointᵀ G)`.
pub fn project_tangent(point: &Matrix, g: &Matrix) -> Matrix {
    g.sub(&point.dot(&point.t_dot(g).sym()))
}
