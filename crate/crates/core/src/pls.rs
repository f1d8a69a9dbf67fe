//! Partial least squares by the cross-covariance route.
//!
//! With X (n×m) and Y (n×p) column-centered, the loadings maximizing
//! `Tr[(XP)ᵀ YQ]` over orthonormal `P`, `Q` are the leading singular vectors
//! of `C = XᵀY`. Scores are `T = XP`, `U = YQ`, and each response score is
//! regressed on its predictor score to obtain the diagonal inner relation
//! `U ≈ T·diag(D)`. Prediction is then `Ŷ = (X − x̄) P diag(D) Qᵀ + ȳ`.

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::matcore::{top_singular_triplets, Matrix};

/// Loadings must satisfy `‖PᵀP − I‖_F` at or below this to form a model.
pub const LOADING_ORTHO_TOL: f64 = 1e-8;

/// Which fitting route produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Svd,
    Descent,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Svd => "svd",
            Solver::Descent => "descent",
        }
    }
}

/// Shape of the inner relation between predictor and response scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DMode {
    #[default]
    Diagonal,
    General,
}

impl DMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DMode::Diagonal => "diagonal",
            DMode::General => "general",
        }
    }
}

/// The map `D` in `U ≈ T·D`.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerRelation {
    /// Diagonal entries only.
    Diagonal(Vec<f64>),
    /// Full `l×l` matrix.
    General(Matrix),
}

impl InnerRelation {
    pub fn zeros(l: usize, mode: DMode) -> Self {
        match mode {
            DMode::Diagonal => InnerRelation::Diagonal(vec![0.0; l]),
            DMode::General => InnerRelation::General(Matrix::zeros(l, l)),
        }
    }

    pub fn mode(&self) -> DMode {
        match self {
            InnerRelation::Diagonal(_) => DMode::Diagonal,
            InnerRelation::General(_) => DMode::General,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InnerRelation::Diagonal(d) => d.len(),
            InnerRelation::General(d) => d.rows(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        match self {
            InnerRelation::Diagonal(d) => Matrix::from_diag(d),
            InnerRelation::General(d) => d.clone(),
        }
    }

    /// Re-expresses the relation in another mode; general→diagonal drops the
    /// off-diagonal entries.
    pub fn with_mode(&self, mode: DMode) -> Self {
        match (self, mode) {
            (InnerRelation::Diagonal(d), DMode::General) => {
                InnerRelation::General(Matrix::from_diag(d))
            }
            (InnerRelation::General(d), DMode::Diagonal) => InnerRelation::Diagonal(d.diag()),
            _ => self.clone(),
        }
    }

    /// `T · D`.
    pub fn apply(&self, t: &Matrix) -> Matrix {
        match self {
            InnerRelation::Diagonal(d) => t.scale_cols(d),
            InnerRelation::General(d) => t.dot(d),
        }
    }

    /// Entries as a flat vector (the free parameters of this mode).
    pub fn params(&self) -> &[f64] {
        match self {
            InnerRelation::Diagonal(d) => d,
            InnerRelation::General(d) => d.as_slice(),
        }
    }

    pub(crate) fn add_scaled(&self, s: f64, rhs: &InnerRelation) -> InnerRelation {
        match (self, rhs) {
            (InnerRelation::Diagonal(a), InnerRelation::Diagonal(b)) => {
                InnerRelation::Diagonal(a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            }
            (InnerRelation::General(a), InnerRelation::General(b)) => {
                InnerRelation::General(a.add_scaled(s, b))
            }
            _ => panic!("inner relation modes differ"),
        }
    }

    pub(crate) fn norm_sq(&self) -> f64 {
        self.params().iter().map(|v| v * v).sum()
    }
}

/// A fitted model: loadings, inner relation and the training means that act
/// as the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct PlsModel {
    p: Matrix,
    q: Matrix,
    inner: InnerRelation,
    x_mean: Vec<f64>,
    y_mean: Vec<f64>,
    solver: Solver,
}

impl PlsModel {
    pub fn new(
        p: Matrix,
        q: Matrix,
        inner: InnerRelation,
        x_mean: Vec<f64>,
        y_mean: Vec<f64>,
        solver: Solver,
    ) -> Result<Self> {
        let l = p.cols();
        if q.cols() != l || inner.dim() != l {
            return Err(Error::dim(format!(
                "component counts disagree: P has {l}, Q has {}, D has {}",
                q.cols(),
                inner.dim()
            )));
        }
        if let InnerRelation::General(d) = &inner {
            if d.cols() != l {
                return Err(Error::dim("general D must be square"));
            }
        }
        if x_mean.len() != p.rows() || y_mean.len() != q.rows() {
            return Err(Error::dim(format!(
                "means have lengths {}/{} but loadings have {}/{} rows",
                x_mean.len(),
                y_mean.len(),
                p.rows(),
                q.rows()
            )));
        }
        if l == 0 || l > p.rows().min(q.rows()) {
            return Err(Error::dim(format!(
                "{l} components for {} predictors and {} responses",
                p.rows(),
                q.rows()
            )));
        }
        if !inner.params().iter().chain(&x_mean).chain(&y_mean).all(|v| v.is_finite()) {
            return Err(Error::Degenerate("model contains non-finite values".into()));
        }
        for (name, mat) in [("P", &p), ("Q", &q)] {
            let err = mat.orthonormality_error();
            if !(err <= LOADING_ORTHO_TOL) {
                return Err(Error::Degenerate(format!(
                    "{name} columns are not orthonormal (‖{name}ᵀ{name} − I‖ = {err:e})"
                )));
            }
        }
        Ok(PlsModel {
            p,
            q,
            inner,
            x_mean,
            y_mean,
            solver,
        })
    }

    /// Predictor loadings, m×l.
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    /// Response loadings, p×l.
    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn inner(&self) -> &InnerRelation {
        &self.inner
    }

    pub fn x_mean(&self) -> &[f64] {
        &self.x_mean
    }

    pub fn y_mean(&self) -> &[f64] {
        &self.y_mean
    }

    pub fn solver(&self) -> Solver {
        self.solver
    }

    pub fn components(&self) -> usize {
        self.p.cols()
    }

    pub fn n_predictors(&self) -> usize {
        self.p.rows()
    }

    pub fn n_responses(&self) -> usize {
        self.q.rows()
    }

    /// Regression coefficients `P D Qᵀ` (m×p) acting on centered predictors.
    pub fn coefficients(&self) -> Matrix {
        self.inner.apply(&self.p).dot_t(&self.q)
    }

    pub fn scores(&self, x: &Matrix, y: &Matrix) -> Result<(Matrix, Matrix)> {
        scores(self, x, y)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        predict(self, x)
    }
}

fn check_cols(what: &str, mat: &Matrix, expected: usize) -> Result<()> {
    if mat.cols() != expected {
        return Err(Error::dim(format!(
            "{what} has {} columns, model expects {expected}",
            mat.cols()
        )));
    }
    Ok(())
}

/// Fits loadings from the leading singular vectors of `XᵀY` on a centered
/// dataset, then the diagonal inner relation from the resulting scores.
pub fn fit_cross_covariance(ds: &Dataset, l: usize) -> Result<PlsModel> {
    ds.ensure_centered()?;
    let (n, m, p) = (ds.n(), ds.m(), ds.p());
    if l == 0 || l > m.min(p) || l > n {
        return Err(Error::dim(format!(
            "cannot extract {l} components from n={n}, m={m}, p={p}"
        )));
    }
    let cross = ds.x().t_dot(ds.y());
    let svd = top_singular_triplets(&cross, l)?;
    if svd.degenerate {
        log::warn!("cross-covariance has rank below {l}; trailing loadings are arbitrary");
    }
    let (t, u) = (ds.x().dot(&svd.u), ds.y().dot(&svd.v));
    let d = fit_diagonal(&t, &u)?;
    PlsModel::new(
        svd.u,
        svd.v,
        InnerRelation::Diagonal(d),
        ds.x_mean().to_vec(),
        ds.y_mean().to_vec(),
        Solver::Svd,
    )
}

/// `T = (X − x̄)P` and `U = (Y − ȳ)Q`.
pub fn scores(model: &PlsModel, x: &Matrix, y: &Matrix) -> Result<(Matrix, Matrix)> {
    check_cols("X", x, model.n_predictors())?;
    check_cols("Y", y, model.n_responses())?;
    let t = x.sub_row(&model.x_mean).dot(&model.p);
    let u = y.sub_row(&model.y_mean).dot(&model.q);
    Ok((t, u))
}

/// Per-component least-squares slopes `D_k = (t_k·u_k)/(t_k·t_k)`.
pub fn fit_diagonal(t: &Matrix, u: &Matrix) -> Result<Vec<f64>> {
    if t.shape() != u.shape() {
        return Err(Error::dim(format!(
            "score shapes differ: T is {:?}, U is {:?}",
            t.shape(),
            u.shape()
        )));
    }
    (0..t.cols())
        .map(|k| {
            let (tk, uk) = (t.col(k), u.col(k));
            let tt: f64 = tk.iter().map(|v| v * v).sum();
            if tt == 0.0 {
                return Err(Error::Degenerate(format!(
                    "predictor score column {k} has zero variance"
                )));
            }
            Ok(tk.iter().zip(&uk).map(|(a, b)| a * b).sum::<f64>() / tt)
        })
        .collect()
}

/// `Ŷ = (X − x̄) P D Qᵀ + ȳ`.
pub fn predict(model: &PlsModel, x: &Matrix) -> Result<Matrix> {
    check_cols("X", x, model.n_predictors())?;
    let t = x.sub_row(&model.x_mean).dot(&model.p);
    Ok(model.inner.apply(&t).dot_t(&model.q).add_row(&model.y_mean))
}

/// `Tr[(XP)ᵀ YQ]`, the quantity the loadings maximize.
pub fn cross_covariance_objective(x: &Matrix, y: &Matrix, p: &Matrix, q: &Matrix) -> Result<f64> {
    let xp = x.try_dot(p)?;
    let yq = y.try_dot(q)?;
    if xp.shape() != yq.shape() {
        return Err(Error::dim("score shapes differ"));
    }
    Ok(xp.inner(&yq))
}

/// Root-mean-square error over all cells.
pub fn rmse(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "rmse of {:?} against {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = (a.rows() * a.cols()).max(1) as f64;
    Ok((a.sub(b).frobenius_sq() / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_slope() {
        let x = Matrix::col_vector(&[1.0, 2.0, 3.0, 4.0]);
        let y = Matrix::col_vector(&[2.0, 4.5, 5.5, 8.0]);
        let ds = Dataset::centered(x.clone(), y).unwrap();
        let model = fit_cross_covariance(&ds, 1).unwrap();
        assert!(model.p().max_abs_diff(&Matrix::col_vector(&[1.0])) < 1e-15);
        assert!(model.q().max_abs_diff(&Matrix::col_vector(&[1.0])) < 1e-15);
        let (xc, yc) = (ds.x().col(0), ds.y().col(0));
        let slope = xc.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>()
            / xc.iter().map(|a| a * a).sum::<f64>();
        let InnerRelation::Diagonal(d) = model.inner() else {
            panic!("svd fit yields a diagonal relation")
        };
        assert!((d[0] - slope).abs() < 1e-14);

        let yhat = model.predict(&Matrix::col_vector(&[10.0])).unwrap();
        assert!((yhat[(0, 0)] - (ds.y_mean()[0] + slope * (10.0 - ds.x_mean()[0]))).abs() < 1e-12);
    }

    #[test]
    fn mean_input_predicts_intercept() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [3.0, 1.0], [2.0, 2.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 2.0], [0.5, 1.0], [4.0, 0.0], [3.0, 3.0]]).unwrap();
        let ds = Dataset::centered(x, y).unwrap();
        let model = fit_cross_covariance(&ds, 2).unwrap();
        let xs = Matrix::from_fn(3, 2, |_, j| ds.x_mean()[j]);
        let yhat = model.predict(&xs).unwrap();
        for r in yhat.row_iter() {
            for (a, b) in r.iter().zip(ds.y_mean()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fit_diagonal_examples() {
        let t = Matrix::from_rows(&[[1.0, 2.0], [-1.0, 0.5], [3.0, 1.0]]).unwrap();
        assert_eq!(fit_diagonal(&t, &t.scale(2.0)).unwrap(), vec![2.0, 2.0]);

        let t = Matrix::from_rows(&[[1.0], [1.0]]).unwrap();
        let u = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert_eq!(fit_diagonal(&t, &u).unwrap(), vec![0.0]);

        let t = Matrix::from_rows(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        let err = fit_diagonal(&t, &t).unwrap_err();
        assert!(matches!(&err, Error::Degenerate(msg) if msg.contains("column 1")));
    }

    #[test]
    fn scores_with_identity_loadings() {
        let ds = Dataset::centered(
            Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [-4.0, -1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]).unwrap(),
        )
        .unwrap();
        let model = PlsModel::new(
            Matrix::identity(2),
            Matrix::identity(2),
            InnerRelation::Diagonal(vec![1.0, 1.0]),
            ds.x_mean().to_vec(),
            ds.y_mean().to_vec(),
            Solver::Svd,
        )
        .unwrap();
        let (xs, ys) = ds.uncentered();
        let (t, u) = model.scores(&xs, &ys).unwrap();
        assert!(t.max_abs_diff(ds.x()) < 1e-15);
        assert!(u.max_abs_diff(ds.y()) < 1e-15);
        assert!(model.scores(&ys.leading_cols(1), &ys).is_err());
    }

    #[test]
    fn first_loading_scores_to_unit_vector() {
        let ds = Dataset::centered(
            Matrix::from_rows(&[[1.0, 2.0, 0.0], [3.0, -1.0, 1.0], [-4.0, -1.0, 2.0], [0.0, 0.0, -3.0]])
                .unwrap(),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0], [2.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let model = fit_cross_covariance(&ds, 2).unwrap();
        let row: Vec<f64> = model.p().col(0).iter().zip(model.x_mean()).map(|(p, m)| p + m).collect();
        let (t, _) = model
            .scores(&Matrix::row_vector(&row), &Matrix::row_vector(model.y_mean()))
            .unwrap();
        assert!((t[(0, 0)] - 1.0).abs() < 1e-12 && t[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn rejects_uncentered_and_oversized() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let raw = Dataset::new(x.clone(), y.clone()).unwrap();
        assert!(matches!(fit_cross_covariance(&raw, 1), Err(Error::Centering(_))));
        let ds = raw.center();
        assert!(matches!(fit_cross_covariance(&ds, 2), Err(Error::Dimension(_))));
        assert!(matches!(fit_cross_covariance(&ds, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn model_rejects_non_orthonormal_loadings() {
        let err = PlsModel::new(
            Matrix::col_vector(&[1.0, 1.0]),
            Matrix::col_vector(&[1.0]),
            InnerRelation::Diagonal(vec![1.0]),
            vec![0.0, 0.0],
            vec![0.0],
            Solver::Svd,
        );
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }
}
