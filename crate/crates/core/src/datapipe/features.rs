use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Node features, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    x: DMatrix<f64>,
    names: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "feature matrix needs at least one column".into(),
            ));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            let (r, c) = (k % x.nrows(), k / x.nrows());
            return Err(Error::NonFinite(format!("feature ({r}, {c})")));
        }
        Ok(Self { x, names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.x.ncols(),
                got: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Columns `cols` in the given order.
    pub fn columns(&self, cols: &[usize]) -> Result<DMatrix<f64>> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.d()) {
            return Err(Error::InvalidArgument(format!(
                "column {c} out of range for width {}",
                self.d()
            )));
        }
        Ok(DMatrix::from_fn(self.n(), cols.len(), |i, j| {
            self.x[(i, cols[j])]
        }))
    }

    /// Stacks the rows of several matrices of equal width.
    pub fn concat_rows(parts: &[FeatureMatrix]) -> Result<Self> {
        let d = parts.first().map_or(0, FeatureMatrix::d);
        if parts.iter().any(|p| p.d() != d) {
            return Err(Error::InvalidArgument(
                "cannot stack feature matrices of different widths".into(),
            ));
        }
        let n = parts.iter().map(FeatureMatrix::n).sum();
        let mut x = DMatrix::zeros(n, d);
        let mut at = 0;
        for p in parts {
            x.rows_mut(at, p.n()).copy_from(&p.x);
            at += p.n();
        }
        Self::new(x)
    }
}

fn parse_cell(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("'{}' is not a number: {e}", s.trim()),
    })
}

/// Comma-separated numeric table. A first row that does not parse as numbers
/// is taken as a header of column names.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if k == 0 && rec.iter().any(|s| s.parse::<f64>().is_err()) {
            names = Some(rec.iter().map(str::to_owned).collect::<Vec<_>>());
            continue;
        }
        let row = rec
            .iter()
            .map(|s| parse_cell(path, line, s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "no data rows".into(),
        });
    }
    let fm = FeatureMatrix::from_rows(&rows)?;
    match names {
        Some(n) => fm.with_names(n),
        None => Ok(fm),
    }
}

/// Single-column integer class ids; a non-numeric first line is skipped as a header.
pub fn load_class_csv(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cell = line.split(',').next_back().unwrap_or(line).trim();
        match cell.parse::<i64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && k == 0 => {}
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: k + 1,
                    msg: format!("'{cell}' is not an integer class id: {e}"),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "r,g,b\n1,2,3\n4,5,6.5\n").unwrap();
        let fm = load_features_csv(&a).unwrap();
        assert_eq!(fm.n(), 2);
        assert_eq!(fm.names().unwrap(), ["r", "g", "b"]);
        assert_eq!(fm.matrix()[(1, 2)], 6.5);

        let b = dir.path().join("b.csv");
        std::fs::write(&b, "1, 2\n3, 4\n").unwrap();
        let fm = load_features_csv(&b).unwrap();
        assert!(fm.names().is_none());
        assert_eq!(fm.matrix()[(1, 0)], 3.0);

        let c = dir.path().join("c.csv");
        std::fs::write(&c, "1,2\n3,x\n").unwrap();
        assert!(matches!(
            load_features_csv(&c),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load_features_csv(dir.path().join("none.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, -2.5e-300, 7.0]);
        write_matrix_csv(&p, &m).unwrap();
        assert_eq!(load_features_csv(&p).unwrap().matrix(), &m);
    }

    #[test]
    fn class_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.csv");
        std::fs::write(&p, "class\n1\n2\n0\n\n3\n").unwrap();
        assert_eq!(load_class_csv(&p).unwrap(), vec![1, 2, 0, 3]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(FeatureMatrix::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(FeatureMatrix::from_rows(&[vec![]]).is_err());
    }
}
