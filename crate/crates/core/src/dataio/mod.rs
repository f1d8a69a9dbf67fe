//! Data ingestion, centering and model persistence.

mod csv_io;
pub mod hexfloat;
mod model_io;

pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to};
pub use model_io::{load_model, model_from_json, model_to_json, save_model, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// Column means at or below this (relative to the column scale) count as zero.
pub const CENTERING_TOL: f64 = 1e-10;

/// How floats are written to text files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FloatFormat {
    /// Shortest decimal text that parses back to the same value.
    #[default]
    Decimal,
    /// C99-style hexadecimal float literals, e.g. `0x1.8p+1`.
    Hex,
}

/// Paired predictor and response observations, together with the column
/// means that were removed from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Matrix,
    x_mean: Vec<f64>,
    y_mean: Vec<f64>,
    centered: bool,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::dim(format!(
                "X has {} rows but Y has {}",
                x.rows(),
                y.rows()
            )));
        }
        if x.rows() == 0 {
            return Err(Error::dim("dataset needs at least one observation"));
        }
        let x_mean = vec![0.0; x.cols()];
        let y_mean = vec![0.0; y.cols()];
        Ok(Dataset {
            x,
            y,
            x_mean,
            y_mean,
            centered: false,
        })
    }

    /// Shorthand for `Dataset::new(x, y)?.center()`.
    pub fn centered(x: Matrix, y: Matrix) -> Result<Self> {
        Ok(Dataset::new(x, y)?.center())
    }

    /// Subtracts the column means of X and Y and records them. Centering an
    /// already centered dataset leaves it untouched.
    pub fn center(self) -> Self {
        if self.centered {
            return self;
        }
        let x_mean = self.x.col_means();
        let y_mean = self.y.col_means();
        Dataset {
            x: self.x.sub_row(&x_mean),
            y: self.y.sub_row(&y_mean),
            x_mean,
            y_mean,
            centered: true,
        }
    }

    /// The original observations, with the stored means added back.
    pub fn uncentered(&self) -> (Matrix, Matrix) {
        (self.x.add_row(&self.x_mean), self.y.add_row(&self.y_mean))
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn x_mean(&self) -> &[f64] {
        &self.x_mean
    }

    pub fn y_mean(&self) -> &[f64] {
        &self.y_mean
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn m(&self) -> usize {
        self.x.cols()
    }

    pub fn p(&self) -> usize {
        self.y.cols()
    }

    /// Fails unless every column of X and Y has (numerically) zero mean.
    pub fn ensure_centered(&self) -> Result<()> {
        for (name, mat) in [("X", &self.x), ("Y", &self.y)] {
            let means = mat.col_means();
            for (j, mean) in means.iter().enumerate() {
                let scale = mat.col(j).iter().fold(1.0f64, |s, v| s.max(v.abs()));
                if mean.abs() > CENTERING_TOL * scale {
                    return Err(Error::Centering(format!(
                        "column {j} of {name} has mean {mean:e}; center the dataset first"
                    )));
                }
            }
        }
        Ok(())
    }
}
