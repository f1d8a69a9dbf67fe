use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dataio::hexfloat::{format_hex, parse_hex};
use crate::dataio::FloatFormat;
use crate::error::{Error, Result};
use crate::matcore::Matrix;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a rectangular numeric CSV file. Cells may be decimal or hex-float
/// literals.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_csv(file, has_header)
}

pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut cols = None;
    let mut rows = 0usize;
    let mut data = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => Error::Parse {
                    line,
                    message: format!("expected {expected_len} fields, found {len}"),
                },
                _ => Error::Parse {
                    line,
                    message: e.to_string(),
                },
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", cols.unwrap(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .or_else(|| parse_hex(cell))
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row: line,
                    col: j + 1,
                    message: format!("{cell:?} is not a finite number"),
                })?;
            data.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Matrix::new(rows, cols.unwrap_or(0), data)
}

pub(crate) fn format_value(v: f64, format: FloatFormat) -> String {
    match format {
        // Debug prints the shortest string that parses back to `v`
        FloatFormat::Decimal => format!("{v:?}"),
        FloatFormat::Hex => format_hex(v),
    }
}

pub fn write_csv_to<W: Write>(mut w: W, m: &Matrix, format: FloatFormat) -> std::io::Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| format_value(v, format)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn write_csv(path: impl AsRef<Path>, m: &Matrix, format: FloatFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_csv_to(BufWriter::new(file), m, format).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_body() {
        let m = read_csv("1,2\n3,4\n".as_bytes(), false).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
    }

    #[test]
    fn header_skipped() {
        let m = read_csv("a,b\n1,2\n".as_bytes(), true).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0]]).unwrap());
    }

    #[test]
    fn ragged_row_reports_line() {
        match read_csv("1,2\n3\n".as_bytes(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        match read_csv("1,2\n3,x\n".as_bytes(), false) {
            Err(Error::ParseCell { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("expected cell error, got {other:?}"),
        }
        assert!(read_csv("1,nan\n".as_bytes(), false).is_err());
    }

    #[test]
    fn empty_input() {
        assert!(read_csv("".as_bytes(), false).is_err());
        assert!(read_csv("a,b\n".as_bytes(), true).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        any::<f64>().prop_filter("finite", |v| v.is_finite())
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            (rows, cols, data) in (1usize..5, 1usize..5)
                .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(finite(), r * c))),
            hex in any::<bool>(),
        ) {
            let m = Matrix::new(rows, cols, data).unwrap();
            let format = if hex { FloatFormat::Hex } else { FloatFormat::Decimal };
            let mut buf = Vec::new();
            write_csv_to(&mut buf, &m, format).unwrap();
            let back = read_csv(buf.as_slice(), false).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
