use crate::error::{Error, Result};
use crate::stats;

use super::LabeledMatrix;

/// Default lower bound on a column's sample variance.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;

/// Degrees of freedom removed by every variance estimate in the crate.
pub const DDOF: usize = 1;

/// A column removed during standardization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: String,
}

/// Column-standardized matrix plus the statistics needed to apply the
/// same transform to new data.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    pub matrix: LabeledMatrix,
    pub dropped_columns: Vec<DroppedColumn>,
    pub ddof: usize,
    /// Training mean of each retained column.
    pub means: Vec<f64>,
    /// Training standard deviation of each retained column.
    pub std_devs: Vec<f64>,
}

impl StandardizedMatrix {
    /// Standardizes `m` with the stored training statistics, matching
    /// columns by name. Extra columns in `m` are ignored.
    pub fn transform(&self, m: &LabeledMatrix) -> Result<LabeledMatrix> {
        let index: std::collections::HashMap<&str, usize> = m
            .variable_names()
            .iter()
            .enumerate()
            .map(|(j, name)| (name.as_str(), j))
            .collect();
        let mut cols = Vec::with_capacity(self.matrix.ncols());
        for name in self.matrix.variable_names() {
            match index.get(name.as_str()) {
                Some(&j) => cols.push(j),
                None => return Err(Error::Dimension(format!("variable {name:?} missing from new data"))),
            }
        }
        let selected = m.select_columns(&cols);
        let (mut values, ids, names) = selected.into_parts();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            let (mu, sd) = (self.means[j], self.std_devs[j]);
            col.iter_mut().for_each(|v| *v = (*v - mu) / sd);
        }
        LabeledMatrix::new(values, ids, names)
    }
}

/// Centers every column and scales it to unit sample variance (ddof = 1).
///
/// Columns whose variance falls below `variance_floor` are dropped and
/// recorded; if nothing survives the call fails.
pub fn standardize(m: &LabeledMatrix, variance_floor: f64) -> Result<StandardizedMatrix> {
    let n = m.nrows();
    if n < 2 {
        return Err(Error::Value(format!("standardization needs n >= 2, got n={n}")));
    }
    let mut keep = Vec::new();
    let mut means = Vec::new();
    let mut std_devs = Vec::new();
    let mut dropped_columns = Vec::new();
    for (j, name) in m.variable_names().iter().enumerate() {
        let col = m.column(j);
        let mu = stats::mean(col);
        let var = stats::variance(col, DDOF);
        if var < variance_floor {
            let constant = col.iter().all(|v| *v == col[0]);
            dropped_columns.push(DroppedColumn {
                name: name.clone(),
                reason: if constant { "zero variance".into() } else { "variance below floor".into() },
            });
            continue;
        }
        keep.push(j);
        means.push(mu);
        std_devs.push(var.sqrt());
    }
    if keep.is_empty() {
        return Err(Error::Value("every column was dropped by the variance floor".into()));
    }
    let (mut values, ids, names) = m.select_columns(&keep).into_parts();
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let (mu, sd) = (means[j], std_devs[j]);
        col.iter_mut().for_each(|v| *v = (*v - mu) / sd);
    }
    Ok(StandardizedMatrix {
        matrix: LabeledMatrix::new(values, ids, names)?,
        dropped_columns,
        ddof: DDOF,
        means,
        std_devs,
    })
}
