use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::vecops::{axpy, dot};

/// Columns per parallel task in the transposed products.
const PAR_MIN_COLUMNS: usize = 256;

/// The `p x q` cross-product matrix `Z = X'Y` seen as a linear operator.
pub trait CrossOperator: Sync {
    /// `(p, q)`
    fn shape(&self) -> (usize, usize);

    /// `Z * beta`, length `p`.
    fn apply(&self, beta: &[f64]) -> Vec<f64>;

    /// `Z' * alpha`, length `q`.
    fn apply_transpose(&self, alpha: &[f64]) -> Vec<f64>;

    /// `Z'Z * v`, length `q`.
    fn normal_apply(&self, v: &[f64]) -> Vec<f64> {
        self.apply_transpose(&self.apply(v))
    }
}

impl CrossOperator for DMatrix<f64> {
    fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    fn apply(&self, beta: &[f64]) -> Vec<f64> {
        (self * DVector::from_column_slice(beta)).as_slice().to_vec()
    }

    fn apply_transpose(&self, alpha: &[f64]) -> Vec<f64> {
        self.tr_mul(&DVector::from_column_slice(alpha)).as_slice().to_vec()
    }
}

/// Returns `z - d * alpha * beta'`.
pub fn deflate(z: &DMatrix<f64>, alpha: &[f64], beta: &[f64], d: f64) -> DMatrix<f64> {
    let mut out = z.clone();
    if d != 0.0 {
        let a = DVector::from_column_slice(alpha);
        let b = DVector::from_column_slice(beta);
        out.ger(-d, &a, &b, 1.0);
    }
    out
}

struct Deflation {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    scale: f64,
    /// `X * alpha`, in the row order of `X`.
    x_alpha: Vec<f64>,
}

/// Cross-product operator backed by the data matrices, never forming `Z`.
///
/// Products cost `O(n (p + q))` instead of `O(p q)`, and are cheaper still
/// for sparse arguments. Rank-one deflations are carried implicitly, and the
/// rows of `X` may be permuted (for permutation tests) without copying.
pub struct DataCross<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DMatrix<f64>,
    /// Row `r` of the permuted `X` is row `perm[r]` of `X`.
    perm: Option<Vec<usize>>,
    /// `X X'`, used to run power iterations in sample space.
    x_gram: Option<Arc<DMatrix<f64>>>,
    deflations: Vec<Deflation>,
    /// `alpha_i' alpha_j` for the stored deflations, row-major.
    alpha_gram: Vec<f64>,
}

impl<'a> DataCross<'a> {
    pub fn new(x: &'a DMatrix<f64>, y: &'a DMatrix<f64>) -> Self {
        assert_eq!(x.nrows(), y.nrows(), "x and y must have the same number of rows");
        Self {
            x,
            y,
            perm: None,
            x_gram: None,
            deflations: Vec::new(),
            alpha_gram: Vec::new(),
        }
    }

    /// Operator for `(P X)' Y`, where row `r` of `P X` is row `perm[r]` of `X`.
    pub fn with_permutation(mut self, perm: Vec<usize>) -> Self {
        assert_eq!(perm.len(), self.x.nrows());
        self.perm = Some(perm);
        self
    }

    /// Attaches `X X'` (see [`sample_gram`]).
    pub fn with_gram(mut self, gram: Arc<DMatrix<f64>>) -> Self {
        assert_eq!(gram.nrows(), self.x.nrows());
        self.x_gram = Some(gram);
        self
    }

    /// Whether precomputing `X X'` pays off for this shape.
    pub fn gram_is_worthwhile(x: &DMatrix<f64>) -> bool {
        x.ncols() >= 2 * x.nrows()
    }

    pub fn n_deflations(&self) -> usize {
        self.deflations.len()
    }

    /// Replaces `Z` by `Z - d * alpha * beta'`.
    pub fn deflate(&mut self, alpha: &[f64], beta: &[f64], d: f64) {
        let x_alpha = x_times(self.x, alpha);
        let m = self.deflations.len();
        let mut gram = vec![0.0; (m + 1) * (m + 1)];
        for i in 0..m {
            for j in 0..m {
                gram[i * (m + 1) + j] = self.alpha_gram[i * m + j];
            }
            let g = dot(&self.deflations[i].alpha, alpha);
            gram[i * (m + 1) + m] = g;
            gram[m * (m + 1) + i] = g;
        }
        gram[m * (m + 1) + m] = dot(alpha, alpha);
        self.alpha_gram = gram;
        self.deflations.push(Deflation {
            alpha: alpha.to_vec(),
            beta: beta.to_vec(),
            scale: d,
            x_alpha,
        });
    }

    /// Scores of the (permuted) x block, in the row order of `Y`.
    pub fn x_scores(&self, alpha: &[f64]) -> Vec<f64> {
        self.gather(x_times(self.x, alpha))
    }

    pub fn y_scores(&self, beta: &[f64]) -> Vec<f64> {
        x_times(self.y, beta)
    }

    /// Maps a vector indexed like the rows of `P X` to one indexed like `X`.
    fn scatter(&self, s: Vec<f64>) -> Vec<f64> {
        match &self.perm {
            None => s,
            Some(perm) => {
                let mut out = vec![0.0; s.len()];
                for (r, &src) in perm.iter().enumerate() {
                    out[src] = s[r];
                }
                out
            }
        }
    }

    /// Inverse of [`Self::scatter`].
    fn gather(&self, t: Vec<f64>) -> Vec<f64> {
        match &self.perm {
            None => t,
            Some(perm) => perm.iter().map(|&src| t[src]).collect(),
        }
    }
}

impl CrossOperator for DataCross<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.x.ncols(), self.y.ncols())
    }

    fn apply(&self, beta: &[f64]) -> Vec<f64> {
        let s = self.scatter(x_times(self.y, beta));
        let mut out = xt_times(self.x, &s);
        for defl in &self.deflations {
            let c = defl.scale * dot(&defl.beta, beta);
            if c != 0.0 {
                axpy(-c, &defl.alpha, &mut out);
            }
        }
        out
    }

    fn apply_transpose(&self, alpha: &[f64]) -> Vec<f64> {
        let t = self.gather(x_times(self.x, alpha));
        let mut out = xt_times(self.y, &t);
        for defl in &self.deflations {
            let c = defl.scale * dot(&defl.alpha, alpha);
            if c != 0.0 {
                axpy(-c, &defl.beta, &mut out);
            }
        }
        out
    }

    fn normal_apply(&self, v: &[f64]) -> Vec<f64> {
        let Some(gram) = &self.x_gram else {
            return self.apply_transpose(&self.apply(v));
        };
        let m = self.deflations.len();
        // w = Z v = X' s - sum_i alpha_i d_i (beta_i' v); we only need X w and A' w.
        let s = self.scatter(x_times(self.y, v));
        let dt: Vec<f64> = self.deflations.iter().map(|f| f.scale * dot(&f.beta, v)).collect();
        let mut xw = (gram.as_ref() * DVector::from_column_slice(&s)).as_slice().to_vec();
        for (f, c) in self.deflations.iter().zip(&dt) {
            axpy(-c, &f.x_alpha, &mut xw);
        }
        let aw: Vec<f64> = (0..m)
            .map(|i| {
                let cross: f64 = (0..m).map(|j| self.alpha_gram[i * m + j] * dt[j]).sum();
                dot(&self.deflations[i].x_alpha, &s) - cross
            })
            .collect();
        let mut out = xt_times(self.y, &self.gather(xw));
        for (f, a) in self.deflations.iter().zip(&aw) {
            axpy(-f.scale * a, &f.beta, &mut out);
        }
        out
    }
}

/// `X X'` for a column-major `n x p` matrix.
pub fn sample_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    let g = x * x.transpose();
    let gt = g.transpose();
    (g + gt) * 0.5
}

/// `M w`, skipping zero entries of `w`.
fn x_times(m: &DMatrix<f64>, w: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; n];
    for (j, col) in m.as_slice().chunks_exact(n.max(1)).enumerate() {
        if w[j] != 0.0 {
            axpy(w[j], col, &mut out);
        }
    }
    out
}

/// `M' s`.
fn xt_times(m: &DMatrix<f64>, s: &[f64]) -> Vec<f64> {
    let n = m.nrows().max(1);
    let data = m.as_slice();
    if m.ncols() >= 2 * PAR_MIN_COLUMNS {
        let mut out = Vec::with_capacity(m.ncols());
        data.par_chunks_exact(n)
            .with_min_len(PAR_MIN_COLUMNS)
            .map(|col| dot(col, s))
            .collect_into_vec(&mut out);
        out
    } else {
        data.chunks_exact(n).map(|col| dot(col, s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1;
        DMatrix::from_fn(n, p, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn matches_explicit_cross_product() {
        let x = matrix(7, 30, 1);
        let y = matrix(7, 5, 2);
        let z = x.tr_mul(&y);
        let beta = [0.3, 0.0, -1.0, 0.5, 0.0];
        let alpha: Vec<f64> = (0..30).map(|i| if i % 3 == 0 { 0.1 * i as f64 } else { 0.0 }).collect();

        let mut op = DataCross::new(&x, &y);
        assert!(close(&op.apply(&beta), &z.apply(&beta), 1e-12));
        assert!(close(&op.apply_transpose(&alpha), &z.apply_transpose(&alpha), 1e-12));

        let z1 = deflate(&z, &alpha, &beta, 0.7);
        op.deflate(&alpha, &beta, 0.7);
        let beta2 = [1.0, 2.0, 0.0, -0.5, 0.25];
        let alpha2: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let z2 = deflate(&z1, &alpha2, &beta2, -0.3);
        op.deflate(&alpha2, &beta2, -0.3);

        assert!(close(&op.apply(&beta), &z2.apply(&beta), 1e-12));
        assert!(close(&op.apply_transpose(&alpha), &z2.apply_transpose(&alpha), 1e-12));
        assert!(close(&op.normal_apply(&beta), &z2.normal_apply(&beta), 1e-12));

        let gram = Arc::new(sample_gram(&x));
        let mut with_gram = DataCross::new(&x, &y).with_gram(gram);
        with_gram.deflate(&alpha, &beta, 0.7);
        with_gram.deflate(&alpha2, &beta2, -0.3);
        assert!(close(&with_gram.normal_apply(&beta), &z2.normal_apply(&beta), 1e-11));
    }

    #[test]
    fn permuted_rows() {
        let x = matrix(6, 4, 3);
        let y = matrix(6, 3, 4);
        let perm = vec![2, 0, 5, 1, 4, 3];
        let px = x.select_rows(perm.iter());
        let z = px.tr_mul(&y);
        let gram = Arc::new(sample_gram(&x));
        let mut op = DataCross::new(&x, &y).with_permutation(perm.clone()).with_gram(gram);
        let beta = [0.2, -0.7, 1.1];
        let alpha = [1.0, 0.0, -2.0, 0.5];
        assert!(close(&op.apply(&beta), &z.apply(&beta), 1e-12));
        assert!(close(&op.apply_transpose(&alpha), &z.apply_transpose(&alpha), 1e-12));
        let zd = deflate(&z, &alpha, &beta, 0.4);
        op.deflate(&alpha, &beta, 0.4);
        assert!(close(&op.normal_apply(&beta), &zd.normal_apply(&beta), 1e-11));
        let scores = op.x_scores(&alpha);
        let direct = &px * DVector::from_column_slice(&alpha);
        assert!(close(&scores, direct.as_slice(), 1e-12));
    }

    #[test]
    fn deflation_cases() {
        let z = matrix(3, 3, 9);
        assert_eq!(deflate(&z, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.0), z);

        let a = [0.6, 0.0, 0.8];
        let b = [0.0, 1.0, 0.0];
        let d = 2.5;
        let rank_one = DMatrix::from_fn(3, 3, |i, j| d * a[i] * b[j]);
        assert!(deflate(&rank_one, &a, &b, d).amax() < 1e-12);
    }
}
