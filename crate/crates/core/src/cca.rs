//! Classical canonical correlation analysis.
//!
//! Weights maximize `a' X'Y b` subject to `a' X'X a = b' Y'Y b = 1` on
//! column-standardized data. The solver whitens both blocks with the
//! inverse square roots of their (optionally ridged) Gram matrices and takes
//! the SVD of the whitened cross-product: if `M = Wx X'Y Wy = U S V'` then
//! `a_i = Wx u_i`, `b_i = Wy v_i` and `rho_i = s_i`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ingest::PairedDataset;
use crate::model::{CanonicalModel, FitMethod};
use crate::vecops;

/// Relative eigenvalue floor used when inverting a Gram matrix.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Fits `k` dense canonical components.
///
/// Expects column-centered (normally standardized) inputs with more samples
/// than variables on either side.
pub fn fit_cca(d: &PairedDataset, k: usize, ridge: f64) -> Result<CanonicalModel> {
    let (n, p, q) = (d.n(), d.p(), d.q());
    if n <= p.max(q) {
        return Err(Error::Dimension(format!(
            "dense CCA needs n > max(p, q); got n={n}, p={p}, q={q}. Use sparse CCA for this shape"
        )));
    }
    if k == 0 || k > p.min(q) {
        return Err(Error::Dimension(format!("k={k} must lie in 1..={}", p.min(q))));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::Value(format!("ridge must be a finite non-negative number, got {ridge}")));
    }
    let x = d.x().values();
    let y = d.y().values();

    let wx = inverse_sqrt(gram(x, ridge), ridge, "x")?;
    let wy = inverse_sqrt(gram(y, ridge), ridge, "y")?;
    let whitened = &wx * x.tr_mul(y) * &wy;
    let svd = whitened.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    let mut components: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..svd.singular_values.len())
        .map(|i| {
            let mut a: Vec<f64> = (&wx * u.column(i)).iter().copied().collect();
            let mut b: Vec<f64> = (&wy * v_t.row(i).transpose()).iter().copied().collect();
            canonicalize_signs(&mut a, &mut b);
            (svd.singular_values[i], a, b)
        })
        .collect();
    components.sort_by(|l, r| {
        r.0.partial_cmp(&l.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| lexicographic(&r.1, &l.1))
    });
    components.truncate(k);

    let mut x_weights = DMatrix::zeros(p, k);
    let mut y_weights = DMatrix::zeros(q, k);
    let mut correlations = Vec::with_capacity(k);
    for (i, (s, a, b)) in components.into_iter().enumerate() {
        x_weights.column_mut(i).copy_from_slice(&a);
        y_weights.column_mut(i).copy_from_slice(&b);
        correlations.push(s.clamp(0.0, 1.0));
    }
    let x_variates = x * &x_weights;
    let y_variates = y * &y_weights;
    Ok(CanonicalModel {
        x_weights,
        y_weights,
        correlations,
        x_variates,
        y_variates,
        component_scales: vec![0.0; k],
        method: FitMethod::Dense,
        sample_ids: d.sample_ids().to_vec(),
        x_names: d.x().variable_names().to_vec(),
        y_names: d.y().variable_names().to_vec(),
        ridge,
        sparse: None,
        notices: Vec::new(),
    })
}

fn gram(m: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let mut g = m.tr_mul(m);
    for i in 0..g.nrows() {
        g[(i, i)] += ridge;
    }
    // symmetrize against rounding in the product
    let gt = g.transpose();
    (g + gt) * 0.5
}

/// `C^{-1/2}` via a symmetric eigendecomposition, flooring eigenvalues at
/// `max(lambda) * EIGEN_FLOOR`. Without a ridge a floored eigenvalue means
/// the Gram matrix is singular.
fn inverse_sqrt(c: DMatrix<f64>, ridge: f64, side: &str) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) {
        return Err(Error::Singularity(format!("{side} Gram matrix is zero")));
    }
    let floor = max * EIGEN_FLOOR;
    let min = eig.eigenvalues.min();
    if ridge == 0.0 && min <= floor {
        return Err(Error::Singularity(format!(
            "{side} Gram matrix is singular (eigenvalue {min:e} vs largest {max:e}); set a positive ridge"
        )));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.max(floor).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose())
}

/// Flips `(a, b)` so the largest-magnitude entry of `a` is positive.
pub(crate) fn canonicalize_signs(a: &mut [f64], b: &mut [f64]) {
    if let Some(i) = vecops::argmax_abs(a) {
        if a[i] < 0.0 {
            vecops::scale(a, -1.0);
            vecops::scale(b, -1.0);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Variate scores of new (already standardized) data.
pub fn project(model: &CanonicalModel, x_new: &DMatrix<f64>, y_new: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (p, q) = (model.x_weights.nrows(), model.y_weights.nrows());
    if x_new.ncols() != p || y_new.ncols() != q {
        return Err(Error::Dimension(format!(
            "expected {p} x columns and {q} y columns, got {} and {}",
            x_new.ncols(),
            y_new.ncols()
        )));
    }
    Ok((x_new * &model.x_weights, y_new * &model.y_weights))
}
