//! Canonical loadings, loading-based variable selection and variate-space
//! sample coordinates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::LabeledMatrix;
use crate::model::CanonicalModel;

/// Sample Pearson correlation, clipped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Dimension("pearson needs at least two observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("pearson correlation of a constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Which data view a loadings matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Gene,
    Image,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Gene => "gene",
            Modality::Image => "image",
        }
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gene" => Ok(Modality::Gene),
            "image" => Ok(Modality::Image),
            other => Err(Error::Value(format!("unknown modality {other:?}"))),
        }
    }
}

/// Correlation of each original variable with each canonical variate.
///
/// `None` marks a variable whose correlation is undefined (constant column
/// or constant variate).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingsMatrix {
    pub variables: Vec<String>,
    /// `values[j][i]`: variable `j`, variate `i`.
    pub values: Vec<Vec<Option<f64>>>,
    pub modality: Modality,
}

impl LoadingsMatrix {
    pub fn n_variates(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn get(&self, variable: usize, variate: usize) -> Option<f64> {
        self.values[variable][variate]
    }
}

/// Loadings of every column of `data` on every column of `variates`.
pub fn compute_loadings(data: &LabeledMatrix, variates: &DMatrix<f64>, modality: Modality) -> Result<LoadingsMatrix> {
    if data.nrows() != variates.nrows() {
        return Err(Error::Dimension(format!(
            "data has {} rows, variates have {}",
            data.nrows(),
            variates.nrows()
        )));
    }
    let n = variates.nrows();
    let var_cols: Vec<&[f64]> = (0..variates.ncols())
        .map(|i| &variates.as_slice()[i * n..(i + 1) * n])
        .collect();
    let values = (0..data.ncols())
        .map(|j| {
            let col = data.column(j);
            var_cols.iter().map(|v| pearson(col, v).ok()).collect()
        })
        .collect();
    Ok(LoadingsMatrix {
        variables: data.variable_names().to_vec(),
        values,
        modality,
    })
}

/// How a loading is compared with the selection threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionPolicy {
    /// `loading > threshold`
    #[default]
    Signed,
    /// `|loading| > threshold`
    Absolute,
}

impl SelectionPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionPolicy::Signed => "signed",
            SelectionPolicy::Absolute => "absolute",
        }
    }

    fn admits(self, loading: f64, threshold: f64) -> bool {
        match self {
            SelectionPolicy::Signed => loading > threshold,
            SelectionPolicy::Absolute => loading.abs() > threshold,
        }
    }
}

impl std::str::FromStr for SelectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(SelectionPolicy::Signed),
            "absolute" => Ok(SelectionPolicy::Absolute),
            other => Err(Error::Value(format!("unknown selection policy {other:?}"))),
        }
    }
}

/// Variables passing the loading threshold, per variate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// `selected[i]` lists variable names for variate `i + 1`, in row order.
    pub selected: Vec<Vec<String>>,
    pub threshold: f64,
    pub policy: SelectionPolicy,
}

/// Selects variables whose loading strictly exceeds `threshold`.
pub fn select_by_loading(l: &LoadingsMatrix, threshold: f64, policy: SelectionPolicy) -> Result<SelectionResult> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Value(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let selected = (0..l.n_variates())
        .map(|i| {
            l.variables
                .iter()
                .zip(&l.values)
                .filter(|(_, row)| row[i].is_some_and(|v| policy.admits(v, threshold)))
                .map(|(name, _)| name.clone())
                .collect()
        })
        .collect();
    Ok(SelectionResult {
        selected,
        threshold,
        policy,
    })
}

/// One sample's coordinates in a variate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub sample_id: String,
    /// x-side variate score
    pub u: f64,
    /// y-side variate score
    pub v: f64,
    pub label: Option<String>,
}

/// Sample coordinates on component `component` (1-based).
pub fn variate_scatter(model: &CanonicalModel, component: usize, labels: Option<&[String]>) -> Result<Vec<ScatterPoint>> {
    let k = model.n_components();
    if component == 0 || component > k {
        return Err(Error::Index { index: component, len: k });
    }
    let ids = model.sample_ids();
    if let Some(labels) = labels {
        if labels.len() != ids.len() {
            return Err(Error::Dimension(format!("{} labels for {} samples", labels.len(), ids.len())));
        }
    }
    let (xv, yv) = (model.x_variates(), model.y_variates());
    Ok(ids
        .iter()
        .enumerate()
        .map(|(r, id)| ScatterPoint {
            sample_id: id.clone(),
            u: xv[(r, component - 1)],
            v: yv[(r, component - 1)],
            label: labels.map(|l| l[r].clone()),
        })
        .collect())
}
