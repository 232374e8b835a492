//! Sequential Wilks' lambda significance test with Bartlett's chi-square
//! approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CanonicalModel, FitMethod};
use crate::special::chi_square_sf;

/// Test of the null hypothesis that components `i..k` all have zero
/// canonical correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilksRow {
    /// 1-based component index.
    pub component: usize,
    pub correlation: f64,
    pub wilks_lambda: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: u32,
    pub p_value: f64,
    /// Set when a correlation of one drove lambda to zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub rows: Vec<WilksRow>,
}

/// Runs the test for every fitted component of a dense model.
pub fn wilks_test(model: &CanonicalModel, n: usize, p: usize, q: usize) -> Result<SignificanceReport> {
    if model.method() != FitMethod::Dense {
        return Err(Error::Precondition("Wilks' lambda applies to dense CCA fits only".into()));
    }
    if n <= p + q {
        return Err(Error::Precondition(format!("Wilks' test needs n > p + q; got n={n}, p={p}, q={q}")));
    }
    wilks_from_correlations(model.correlations(), n, p, q)
}

/// [`wilks_test`] on a bare list of canonical correlations.
pub fn wilks_from_correlations(correlations: &[f64], n: usize, p: usize, q: usize) -> Result<SignificanceReport> {
    let k = correlations.len();
    if k > p.min(q) {
        return Err(Error::Dimension(format!("{k} correlations for p={p}, q={q}")));
    }
    let bartlett = n as f64 - 1.0 - (p + q + 1) as f64 / 2.0;
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let lambda: f64 = correlations[i..].iter().map(|r| 1.0 - r * r).product();
        let df = ((p - i) * (q - i)) as u32;
        let (chi_square, p_value, degenerate) = if lambda <= 0.0 {
            (f64::INFINITY, 0.0, true)
        } else {
            let chi = (-bartlett * lambda.ln()).max(0.0);
            (chi, chi_square_sf(chi, df)?, false)
        };
        rows.push(WilksRow {
            component: i + 1,
            correlation: correlations[i],
            wilks_lambda: lambda.max(0.0),
            chi_square,
            degrees_of_freedom: df,
            p_value,
            degenerate,
        });
    }
    Ok(SignificanceReport { rows })
}
