use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

use super::LabeledMatrix;

/// Minimum number of shared samples for a paired analysis.
pub const MIN_SAMPLES: usize = 3;

/// Sample identifiers discarded while pairing two matrices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentReport {
    pub dropped_from_x: Vec<String>,
    pub dropped_from_y: Vec<String>,
}

/// Two matrices over the same samples, in the same row order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    x: LabeledMatrix,
    y: LabeledMatrix,
    alignment: AlignmentReport,
}

impl PairedDataset {
    /// Pairs matrices whose sample ids already agree element-wise.
    pub fn new(x: LabeledMatrix, y: LabeledMatrix) -> Result<Self> {
        if x.sample_ids() != y.sample_ids() {
            return Err(Error::Dimension(
                "x and y sample ids differ; use align_samples to pair them".into(),
            ));
        }
        if x.nrows() < MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                found: x.nrows(),
                required: MIN_SAMPLES,
            });
        }
        Ok(Self {
            x,
            y,
            alignment: AlignmentReport::default(),
        })
    }

    pub fn x(&self) -> &LabeledMatrix {
        &self.x
    }

    pub fn y(&self) -> &LabeledMatrix {
        &self.y
    }

    pub fn sample_ids(&self) -> &[String] {
        self.x.sample_ids()
    }

    pub fn alignment(&self) -> &AlignmentReport {
        &self.alignment
    }

    /// Number of samples `n`.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of x variables `p`.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Number of y variables `q`.
    pub fn q(&self) -> usize {
        self.y.ncols()
    }

    pub fn into_parts(self) -> (LabeledMatrix, LabeledMatrix) {
        (self.x, self.y)
    }
}

/// Restricts both matrices to their shared samples, ordered as in `x`.
pub fn align_samples(x: &LabeledMatrix, y: &LabeledMatrix) -> Result<PairedDataset> {
    let y_index: HashMap<&str, usize> = y
        .sample_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut x_rows = Vec::new();
    let mut y_rows = Vec::new();
    let mut report = AlignmentReport::default();
    for (i, id) in x.sample_ids().iter().enumerate() {
        match y_index.get(id.as_str()) {
            Some(&j) => {
                x_rows.push(i);
                y_rows.push(j);
            }
            None => report.dropped_from_x.push(id.clone()),
        }
    }
    let shared: HashSet<&str> = x.sample_ids().iter().map(String::as_str).collect();
    report.dropped_from_y = y
        .sample_ids()
        .iter()
        .filter(|id| !shared.contains(id.as_str()))
        .cloned()
        .collect();

    if x_rows.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: x_rows.len(),
            required: MIN_SAMPLES,
        });
    }
    let identity = |rows: &[usize], len: usize| rows.len() == len && rows.iter().enumerate().all(|(i, &r)| i == r);
    let x_sel = if identity(&x_rows, x.nrows()) { x.clone() } else { x.select_rows(&x_rows) };
    let y_sel = if identity(&y_rows, y.nrows()) { y.clone() } else { y.select_rows(&y_rows) };
    Ok(PairedDataset {
        x: x_sel,
        y: y_sel,
        alignment: report,
    })
}
