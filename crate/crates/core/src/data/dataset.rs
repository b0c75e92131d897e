use std::path::Path;

use crate::error::{contract, Error, Result};
use crate::math::Matrix;

/// Feature and target matrices with column names. Rows are aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub targets: Matrix,
    pub feature_names: Vec<String>,
    pub target_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        targets: Matrix,
        feature_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Result<Self> {
        contract!(
            features.rows() == targets.rows(),
            "feature rows ({}) and target rows ({}) differ",
            features.rows(),
            targets.rows()
        );
        contract!(
            feature_names.len() == features.cols() && target_names.len() == targets.cols(),
            "column names do not match matrix widths"
        );
        Ok(Self {
            features,
            targets,
            feature_names,
            target_names,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.cols()
    }

    pub fn x(&self, n: usize) -> &[f64] {
        self.features.row(n)
    }

    pub fn y(&self, n: usize) -> &[f64] {
        self.targets.row(n)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let pick = |m: &Matrix| {
            let mut out = Matrix::zeros(indices.len(), m.cols());
            for (dst, &src) in indices.iter().enumerate() {
                out.row_mut(dst).copy_from_slice(m.row(src));
            }
            out
        };
        Self {
            features: pick(&self.features),
            targets: pick(&self.targets),
            feature_names: self.feature_names.clone(),
            target_names: self.target_names.clone(),
        }
    }

    /// Rows repeated back to back, `copies` times.
    pub fn repeated(&self, copies: usize) -> Self {
        let idx: Vec<usize> = (0..copies).flat_map(|_| 0..self.len()).collect();
        self.select_rows(&idx)
    }
}

/// Reads a comma-separated file with a header row. Columns listed in
/// `target_columns` become targets; every other column is a feature, in file
/// order.
pub fn load_csv(path: impl AsRef<Path>, target_columns: &[String]) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    if target_columns.is_empty() {
        return Err(Error::Config("no target columns given".into()));
    }
    let mut target_idx = Vec::with_capacity(target_columns.len());
    for name in target_columns {
        match header.iter().position(|h| h == name) {
            Some(i) => target_idx.push(i),
            None => {
                return Err(Error::Config(format!(
                    "target column '{name}' not found in {}",
                    path.display()
                )))
            }
        }
    }
    let feature_idx: Vec<usize> = (0..header.len()).filter(|i| !target_idx.contains(i)).collect();

    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        // header is line 1
        let row = r + 2;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let parse = |i: usize| -> Result<f64> {
            let cell = &record[i];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row,
                    column: header[i].clone(),
                    message: format!("'{cell}' is not a finite number"),
                }),
            }
        };
        for &i in &feature_idx {
            features.push(parse(i)?);
        }
        for &i in &target_idx {
            targets.push(parse(i)?);
        }
        n_rows += 1;
    }

    Dataset::new(
        Matrix::from_vec(n_rows, feature_idx.len(), features)?,
        Matrix::from_vec(n_rows, target_idx.len(), targets)?,
        feature_idx.iter().map(|&i| header[i].clone()).collect(),
        target_columns.to_vec(),
    )
}

/// Reads only the named columns, in the given order; other columns are
/// ignored. Rows are `N x feature_names.len()`.
pub fn load_features(path: impl AsRef<Path>, feature_names: &[String]) -> Result<Matrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let idx = feature_names
        .iter()
        .map(|name| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                Error::Config(format!("feature column '{name}' not found in {}", path.display()))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut values = Vec::new();
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for &i in &idx {
            let cell = record.get(i).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: r + 2,
                        column: header[i].clone(),
                        message: format!("'{cell}' is not a finite number"),
                    })
                }
            }
        }
        n_rows += 1;
    }
    Matrix::from_vec(n_rows, idx.len(), values)
}

/// Writes features then targets, full round-trip precision.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(dataset.feature_names.iter().chain(&dataset.target_names))?;
    for n in 0..dataset.len() {
        w.write_record(dataset.x(n).iter().chain(dataset.y(n)).map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
