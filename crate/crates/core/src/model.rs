//! Fitted canonical models and their JSON document form.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scca::{InitMethod, PenaltySpec, SccaFitConfig};

/// Which solver produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Dense,
    Sparse,
}

/// Per-component record of a sparse fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub nonzero_x: usize,
    pub nonzero_y: usize,
}

/// Settings and diagnostics attached to a sparse fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFitInfo {
    pub penalty: PenaltySpec,
    pub config: SccaFitConfig,
    pub components: Vec<ComponentDiagnostics>,
}

/// Weights, correlations and variate scores for `k` canonical components.
///
/// Column `i` of each weight matrix holds component `i`; correlations are
/// non-increasing for dense fits.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalModel {
    pub(crate) x_weights: DMatrix<f64>,
    pub(crate) y_weights: DMatrix<f64>,
    pub(crate) correlations: Vec<f64>,
    pub(crate) x_variates: DMatrix<f64>,
    pub(crate) y_variates: DMatrix<f64>,
    pub(crate) component_scales: Vec<f64>,
    pub(crate) method: FitMethod,
    pub(crate) sample_ids: Vec<String>,
    pub(crate) x_names: Vec<String>,
    pub(crate) y_names: Vec<String>,
    pub(crate) ridge: f64,
    pub(crate) sparse: Option<SparseFitInfo>,
    pub(crate) notices: Vec<String>,
}

impl CanonicalModel {
    pub fn x_weights(&self) -> &DMatrix<f64> {
        &self.x_weights
    }

    pub fn y_weights(&self) -> &DMatrix<f64> {
        &self.y_weights
    }

    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    /// `X * x_weights`, one column per component.
    pub fn x_variates(&self) -> &DMatrix<f64> {
        &self.x_variates
    }

    /// `Y * y_weights`, one column per component.
    pub fn y_variates(&self) -> &DMatrix<f64> {
        &self.y_variates
    }

    /// Rank-one scales `d` removed by deflation; zero for dense fits.
    pub fn component_scales(&self) -> &[f64] {
        &self.component_scales
    }

    pub fn method(&self) -> FitMethod {
        self.method
    }

    pub fn n_components(&self) -> usize {
        self.correlations.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn y_names(&self) -> &[String] {
        &self.y_names
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn sparse_info(&self) -> Option<&SparseFitInfo> {
        self.sparse.as_ref()
    }

    /// Messages about early stops or other non-fatal events during fitting.
    pub fn notices(&self) -> &[String] {
        &self.notices
    }

    /// Negates the weights and variates of component `i` (0-based).
    pub fn flip_component(&mut self, i: usize) {
        self.x_weights.column_mut(i).neg_mut();
        self.y_weights.column_mut(i).neg_mut();
        self.x_variates.column_mut(i).neg_mut();
        self.y_variates.column_mut(i).neg_mut();
    }

    pub fn to_document(&self) -> ModelDocument {
        let k = self.n_components();
        let (dense, sparse) = match (&self.method, &self.sparse) {
            (FitMethod::Sparse, Some(info)) => {
                let components = (0..k)
                    .map(|i| SparseComponent {
                        x: sparse_pairs(self.x_weights.column(i).as_slice()),
                        y: sparse_pairs(self.y_weights.column(i).as_slice()),
                        scale: self.component_scales[i],
                        iterations: info.components[i].iterations,
                        converged: info.components[i].converged,
                    })
                    .collect();
                let sparse = SparseWeights {
                    factor_x: info.penalty.factor_x(),
                    factor_y: info.penalty.factor_y(),
                    bound_x: info.penalty.bound_x(),
                    bound_y: info.penalty.bound_y(),
                    components,
                };
                (None, Some(sparse))
            }
            _ => (
                Some(DenseWeights {
                    x_weights: row_major(&self.x_weights),
                    y_weights: row_major(&self.y_weights),
                }),
                None,
            ),
        };
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            method: self.method,
            n: self.sample_ids.len(),
            p: self.x_names.len(),
            q: self.y_names.len(),
            k,
            x_names: self.x_names.clone(),
            y_names: self.y_names.clone(),
            correlations: self.correlations.clone(),
            dense,
            sparse,
            metadata: FitMetadata {
                ridge: (self.method == FitMethod::Dense).then_some(self.ridge),
                tolerance: self.sparse.as_ref().map(|s| s.config.tolerance),
                max_iterations: self.sparse.as_ref().map(|s| s.config.max_iterations),
                init: self.sparse.as_ref().map(|s| s.config.init),
                seed: self.sparse.as_ref().map(|s| s.config.seed),
                notices: self.notices.clone(),
            },
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn sparse_pairs(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, w)| (i, *w))
        .collect()
}

pub const MODEL_FORMAT: &str = "cmcca-model";
pub const MODEL_VERSION: u32 = 1;

/// Serialized form of a [`CanonicalModel`] (variate scores are not stored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub method: FitMethod,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
    pub correlations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dense: Option<DenseWeights>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sparse: Option<SparseWeights>,
    pub metadata: FitMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseWeights {
    /// `p` rows of `k` entries.
    pub x_weights: Vec<Vec<f64>>,
    /// `q` rows of `k` entries.
    pub y_weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseWeights {
    pub factor_x: f64,
    pub factor_y: f64,
    pub bound_x: f64,
    pub bound_y: f64,
    pub components: Vec<SparseComponent>,
}

/// Nonzero weights as `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseComponent {
    pub x: Vec<(usize, f64)>,
    pub y: Vec<(usize, f64)>,
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ridge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub init: Option<InitMethod>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub notices: Vec<String>,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Serialization(format!("not a model document: format {:?}", doc.format)));
        }
        Ok(doc)
    }

    /// Dense `p x k` and `q x k` weight matrices.
    pub fn weights(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (p, q, k) = (self.p, self.q, self.k);
        let mut xw = DMatrix::zeros(p, k);
        let mut yw = DMatrix::zeros(q, k);
        if let Some(dense) = &self.dense {
            fill_rows(&mut xw, &dense.x_weights)?;
            fill_rows(&mut yw, &dense.y_weights)?;
        } else if let Some(sparse) = &self.sparse {
            if sparse.components.len() != k {
                return Err(Error::Serialization("component count mismatch".into()));
            }
            for (i, c) in sparse.components.iter().enumerate() {
                for &(j, w) in &c.x {
                    *xw.get_mut((j, i)).ok_or(Error::Index { index: j, len: p })? = w;
                }
                for &(j, w) in &c.y {
                    *yw.get_mut((j, i)).ok_or(Error::Index { index: j, len: q })? = w;
                }
            }
        } else {
            return Err(Error::Serialization("model document carries no weights".into()));
        }
        Ok((xw, yw))
    }
}

fn fill_rows(m: &mut DMatrix<f64>, rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() != m.nrows() || rows.iter().any(|r| r.len() != m.ncols()) {
        return Err(Error::Serialization("weight array has the wrong shape".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(())
}
