use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::hexfloat::{format_hex, parse_hex};
use crate::dataio::FloatFormat;
use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::pls::{InnerRelation, PlsModel, Solver};

pub const FORMAT_VERSION: u64 = 1;

/// A float stored either as a JSON number or as a hex-float string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Decimal(f64),
    Hex(String),
}

impl Num {
    fn encode(v: f64, format: FloatFormat) -> Num {
        match format {
            FloatFormat::Decimal => Num::Decimal(v),
            FloatFormat::Hex => Num::Hex(format_hex(v)),
        }
    }

    fn decode(&self, field: &str) -> Result<f64> {
        let v = match self {
            Num::Decimal(v) => Some(*v),
            Num::Hex(s) => parse_hex(s),
        };
        v.filter(|v| v.is_finite()).ok_or_else(|| {
            Error::ModelFormat(format!("field `{field}` holds an invalid number: {self:?}"))
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DField {
    Vector(Vec<Num>),
    Matrix(Vec<Vec<Num>>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u64,
    l: usize,
    m: usize,
    p: usize,
    #[serde(rename = "P")]
    p_load: Vec<Vec<Num>>,
    #[serde(rename = "Q")]
    q_load: Vec<Vec<Num>>,
    #[serde(rename = "D")]
    d: DField,
    d_mode: String,
    x_mean: Vec<Num>,
    y_mean: Vec<Num>,
    solver: String,
}

fn encode_vec(v: &[f64], format: FloatFormat) -> Vec<Num> {
    v.iter().map(|&x| Num::encode(x, format)).collect()
}

fn encode_mat(m: &Matrix, format: FloatFormat) -> Vec<Vec<Num>> {
    m.row_iter().map(|r| encode_vec(r, format)).collect()
}

fn decode_vec(v: &[Num], field: &str, len: usize) -> Result<Vec<f64>> {
    if v.len() != len {
        return Err(Error::ModelFormat(format!(
            "field `{field}` has {} entries, expected {len}",
            v.len()
        )));
    }
    v.iter().map(|x| x.decode(field)).collect()
}

fn decode_mat(rows: &[Vec<Num>], field: &str, shape: (usize, usize)) -> Result<Matrix> {
    if rows.len() != shape.0 {
        return Err(Error::ModelFormat(format!(
            "field `{field}` has {} rows, expected {}",
            rows.len(),
            shape.0
        )));
    }
    let mut data = Vec::with_capacity(shape.0 * shape.1);
    for r in rows {
        data.extend(decode_vec(r, field, shape.1)?);
    }
    Matrix::new(shape.0, shape.1, data)
}

/// Serializes a model as a single JSON document.
pub fn model_to_json(model: &PlsModel, format: FloatFormat) -> String {
    let d = match model.inner() {
        InnerRelation::Diagonal(d) => DField::Vector(encode_vec(d, format)),
        InnerRelation::General(d) => DField::Matrix(encode_mat(d, format)),
    };
    let doc = ModelDoc {
        format_version: FORMAT_VERSION,
        l: model.components(),
        m: model.n_predictors(),
        p: model.n_responses(),
        p_load: encode_mat(model.p(), format),
        q_load: encode_mat(model.q(), format),
        d,
        d_mode: model.inner().mode().as_str().to_string(),
        x_mean: encode_vec(model.x_mean(), format),
        y_mean: encode_vec(model.y_mean(), format),
        solver: model.solver().as_str().to_string(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

pub fn model_from_json(text: &str) -> Result<PlsModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::ModelFormat("missing field `format_version`".into()))?
        .as_u64()
        .ok_or_else(|| Error::ModelFormat("`format_version` must be an unsigned integer".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let doc: ModelDoc =
        serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;

    let (l, m, p) = (doc.l, doc.m, doc.p);
    let p_load = decode_mat(&doc.p_load, "P", (m, l))?;
    let q_load = decode_mat(&doc.q_load, "Q", (p, l))?;
    let inner = match (doc.d_mode.as_str(), &doc.d) {
        ("diagonal", DField::Vector(d)) => InnerRelation::Diagonal(decode_vec(d, "D", l)?),
        ("general", DField::Matrix(d)) => InnerRelation::General(decode_mat(d, "D", (l, l))?),
        (mode @ ("diagonal" | "general"), _) => {
            return Err(Error::ModelFormat(format!(
                "field `D` does not match d_mode {mode:?}"
            )))
        }
        (other, _) => return Err(Error::ModelFormat(format!("unknown d_mode {other:?}"))),
    };
    let solver = match doc.solver.as_str() {
        "svd" => Solver::Svd,
        "descent" => Solver::Descent,
        other => return Err(Error::ModelFormat(format!("unknown solver {other:?}"))),
    };
    let x_mean = decode_vec(&doc.x_mean, "x_mean", m)?;
    let y_mean = decode_vec(&doc.y_mean, "y_mean", p)?;
    PlsModel::new(p_load, q_load, inner, x_mean, y_mean, solver)
}

pub fn save_model(model: &PlsModel, path: impl AsRef<Path>, format: FloatFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model, format) + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PlsModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_json(&text)
}
