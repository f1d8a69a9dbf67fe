//! Single-head attention blocks and the bridge from a fitted PLS model.
//!
//! All blocks are forward-only. Scores are scaled by `1/√l` where `l` is the
//! projection width (columns of `W_Q`).

use crate::error::{Error, Result};
use crate::matcore::{layer_norm, row_softmax, Matrix};
use crate::pls::PlsModel;

/// Query, key and value projections.
///
/// `W_K` and `W_V` act on the key/value source and share its width;
/// `W_Q` acts on the query source, which is the same matrix for
/// self-attention but the target for cross-attention.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    w_q: Matrix,
    w_k: Matrix,
    w_v: Matrix,
}

impl AttentionParams {
    pub fn new(w_q: Matrix, w_k: Matrix, w_v: Matrix) -> Result<Self> {
        let l = w_q.cols();
        if l == 0 || w_k.cols() != l || w_v.cols() != l {
            return Err(Error::dim(format!(
                "projection widths differ or are zero: W_Q {}, W_K {}, W_V {}",
                w_q.cols(),
                w_k.cols(),
                w_v.cols()
            )));
        }
        if w_k.rows() != w_v.rows() {
            return Err(Error::dim(format!(
                "W_K has {} rows but W_V has {}",
                w_k.rows(),
                w_v.rows()
            )));
        }
        Ok(AttentionParams { w_q, w_k, w_v })
    }

    /// All three projections zero, `source_dim × l`.
    pub fn zeros(source_dim: usize, l: usize) -> Self {
        AttentionParams {
            w_q: Matrix::zeros(source_dim, l),
            w_k: Matrix::zeros(source_dim, l),
            w_v: Matrix::zeros(source_dim, l),
        }
    }

    pub fn w_q(&self) -> &Matrix {
        &self.w_q
    }

    pub fn w_k(&self) -> &Matrix {
        &self.w_k
    }

    pub fn w_v(&self) -> &Matrix {
        &self.w_v
    }

    /// Projection width `l`.
    pub fn width(&self) -> usize {
        self.w_q.cols()
    }

    fn check_query(&self, src: &Matrix) -> Result<()> {
        if src.cols() != self.w_q.rows() {
            return Err(Error::dim(format!(
                "query source has {} columns, W_Q has {} rows",
                src.cols(),
                self.w_q.rows()
            )));
        }
        Ok(())
    }

    fn check_key(&self, src: &Matrix) -> Result<()> {
        if src.cols() != self.w_k.rows() {
            return Err(Error::dim(format!(
                "key/value source has {} columns, W_K has {} rows",
                src.cols(),
                self.w_k.rows()
            )));
        }
        Ok(())
    }
}

/// Weights of the position-wise feed-forward layer
/// `max(0, X W₁ + b₁) W₂ + b₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
}

impl FfnParams {
    pub fn new(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>) -> Result<Self> {
        if b1.len() != w1.cols() || w2.rows() != w1.cols() || b2.len() != w2.cols() {
            return Err(Error::dim(format!(
                "FFN shapes disagree: W1 {:?}, b1 {}, W2 {:?}, b2 {}",
                w1.shape(),
                b1.len(),
                w2.shape(),
                b2.len()
            )));
        }
        Ok(FfnParams { w1, b1, w2, b2 })
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w2.cols()
    }
}

/// How the linearized block mixes value rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mixing {
    /// No mixing: the output is `XW_V`.
    Identity,
    /// Raw scaled scores `QKᵀ/√l` used as mixing weights, no softmax.
    Unnormalized,
}

/// `(XW_Q, XW_K, XW_V)`.
pub fn project_qkv(x: &Matrix, params: &AttentionParams) -> Result<(Matrix, Matrix, Matrix)> {
    params.check_query(x)?;
    params.check_key(x)?;
    Ok((x.dot(&params.w_q), x.dot(&params.w_k), x.dot(&params.w_v)))
}

fn scaled_scores(q: &Matrix, k: &Matrix) -> Matrix {
    q.dot_t(k).scale(1.0 / (q.cols() as f64).sqrt())
}

/// Pre-softmax scores `XW_Q (XW_K)ᵀ / √l`, n×n.
pub fn attention_scores(x: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    let (q, k, _) = project_qkv(x, params)?;
    Ok(scaled_scores(&q, &k))
}

/// Row-stochastic mixing matrix `softmax(QKᵀ/√l)`.
pub fn attention_weights(x: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    row_softmax(&attention_scores(x, params)?)
}

/// `softmax(XW_Q W_Kᵀ Xᵀ / √l) X W_V`.
pub fn self_attention(x: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    let (q, k, v) = project_qkv(x, params)?;
    Ok(row_softmax(&scaled_scores(&q, &k))?.dot(&v))
}

/// Self-attention with the softmax removed (`Unnormalized`) or the mixing
/// matrix replaced by the identity (`Identity`). Either way the map is linear
/// in the values.
pub fn linear_attention(x: &Matrix, params: &AttentionParams, mixing: Mixing) -> Result<Matrix> {
    let (q, k, v) = project_qkv(x, params)?;
    Ok(match mixing {
        Mixing::Identity => v,
        Mixing::Unnormalized => scaled_scores(&q, &k).dot(&v),
    })
}

/// `LayerNorm(self_attention(X) + X)`. The residual requires `l = m`.
pub fn encoder_block(x: &Matrix, params: &AttentionParams, epsilon: f64) -> Result<Matrix> {
    if params.width() != x.cols() {
        return Err(Error::dim(format!(
            "encoder residual needs the attention width to equal the input width: l = {} but m = {}",
            params.width(),
            x.cols()
        )));
    }
    let attended = self_attention(x, params)?;
    layer_norm(&attended.add(x), epsilon)
}

/// Source-target attention `softmax(Y W_Q W_Kᵀ X_fᵀ / √l) X_f W_V`: queries
/// from `y`, keys and values from the encoded source `x_f`. The output has
/// one row per query.
pub fn cross_attention(x_f: &Matrix, y: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    params.check_query(y)?;
    params.check_key(x_f)?;
    let q = y.dot(&params.w_q);
    let k = x_f.dot(&params.w_k);
    let v = x_f.dot(&params.w_v);
    Ok(row_softmax(&scaled_scores(&q, &k))?.dot(&v))
}

/// Mixing matrix of [`cross_attention`], one row per query.
pub fn cross_attention_weights(x_f: &Matrix, y: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    params.check_query(y)?;
    params.check_key(x_f)?;
    row_softmax(&scaled_scores(&y.dot(&params.w_q), &x_f.dot(&params.w_k)))
}

pub fn ffn(x: &Matrix, params: &FfnParams) -> Result<Matrix> {
    if x.cols() != params.input_dim() {
        return Err(Error::dim(format!(
            "FFN input has {} columns, W1 has {} rows",
            x.cols(),
            params.input_dim()
        )));
    }
    let hidden = x.dot(&params.w1).add_row(&params.b1).map(|v| v.max(0.0));
    Ok(hidden.dot(&params.w2).add_row(&params.b2))
}

/// A fitted PLS model expressed as an identity-mixing linear attention
/// block whose value projection carries the whole regression map.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBridge {
    pub params: AttentionParams,
    pub mixing: Mixing,
    pub x_mean: Vec<f64>,
    pub y_mean: Vec<f64>,
}

impl AttentionBridge {
    /// Centers `x`, runs the attention block and adds the response mean back.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.x_mean.len() {
            return Err(Error::dim(format!(
                "bridge expects {} columns, got {}",
                self.x_mean.len(),
                x.cols()
            )));
        }
        let centered = x.sub_row(&self.x_mean);
        Ok(linear_attention(&centered, &self.params, self.mixing)?.add_row(&self.y_mean))
    }
}

/// `W_V = P·D·Qᵀ` with identity mixing; `W_Q` and `W_K` are zero.
pub fn pls_to_attention(model: &PlsModel) -> AttentionBridge {
    let w_v = model.coefficients();
    let (m, p) = w_v.shape();
    AttentionBridge {
        params: AttentionParams {
            w_q: Matrix::zeros(m, p),
            w_k: Matrix::zeros(m, p),
            w_v,
        },
        mixing: Mixing::Identity,
        x_mean: model.x_mean().to_vec(),
        y_mean: model.y_mean().to_vec(),
    }
}
