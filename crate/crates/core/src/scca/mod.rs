//! Sparse CCA as a penalized rank-one decomposition of `Z = X'Y`.
//!
//! Each component solves
//!
//! ```text
//! max a' Z b   s.t.  |a|_2 <= 1, |b|_2 <= 1, |a|_1 <= c_x, |b|_1 <= c_y
//! ```
//!
//! by alternating the closed-form partial maximizers (soft-threshold, then
//! L2-normalize), and further components come from rank-one deflation
//! `Z <- Z - d a b'`. No orthogonality is imposed between components.

mod operator;
mod permutation;

use serde::{Deserialize, Serialize};

use crate::cca::canonicalize_signs;
use crate::error::{Error, Result};
use crate::ingest::PairedDataset;
use crate::interpret::pearson;
use crate::model::{CanonicalModel, ComponentDiagnostics, FitMethod, SparseFitInfo};
use crate::vecops::{count_nonzero, dot, max_abs, max_abs_diff, norm1, norm2, scale};

pub use operator::{deflate, sample_gram, CrossOperator, DataCross};
pub use permutation::{permutation_test, PermutationReport};

/// Cap on threshold bisection steps (it normally stops at machine precision).
const BISECTION_STEPS: usize = 200;
/// Power-iteration tolerance and cap for the SVD initialization.
pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITERATIONS: usize = 1000;
/// Components whose scale falls below this fraction of the first one are
/// treated as exhausting the cross-product.
const RANK_TOLERANCE: f64 = 1e-10;

/// L1 bounds on the two weight vectors.
///
/// A factor `f` maps to the bound `c = f * sqrt(dim)`, clamped to
/// `[1, sqrt(dim)]`; `f = 1` leaves the L1 constraint inactive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    factor_x: f64,
    factor_y: f64,
    bound_x: f64,
    bound_y: f64,
}

impl PenaltySpec {
    pub fn new(factor_x: f64, factor_y: f64, p: usize, q: usize) -> Result<Self> {
        for (name, f) in [("x", factor_x), ("y", factor_y)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Value(format!("penalty factor for {name} must lie in (0, 1], got {f}")));
            }
        }
        if p == 0 || q == 0 {
            return Err(Error::Dimension("penalties need p, q >= 1".into()));
        }
        let bound = |f: f64, dim: usize| {
            let root = (dim as f64).sqrt();
            (f * root).clamp(1.0, root)
        };
        Ok(Self {
            factor_x,
            factor_y,
            bound_x: bound(factor_x, p),
            bound_y: bound(factor_y, q),
        })
    }

    pub fn factor_x(&self) -> f64 {
        self.factor_x
    }

    pub fn factor_y(&self) -> f64 {
        self.factor_y
    }

    /// `c_x`
    pub fn bound_x(&self) -> f64 {
        self.bound_x
    }

    /// `c_y`
    pub fn bound_y(&self) -> f64 {
        self.bound_y
    }
}

/// How the first `b` of every component is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    /// Leading right singular vector of `Z` by power iteration on `Z'Z`.
    #[default]
    Svd,
    /// Normalized first row of `Z`.
    FirstColumn,
}

impl std::str::FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(InitMethod::Svd),
            "first-column" => Ok(InitMethod::FirstColumn),
            other => Err(Error::Value(format!("unknown init method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SccaFitConfig {
    pub components: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: InitMethod,
    pub seed: u64,
}

impl Default for SccaFitConfig {
    fn default() -> Self {
        Self {
            components: 1,
            tolerance: 1e-6,
            max_iterations: 200,
            init: InitMethod::Svd,
            seed: 0,
        }
    }
}

impl SccaFitConfig {
    fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::Value("at least one component is required".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Value(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Value("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `sign(z_i) * max(|z_i| - delta, 0)`
pub fn soft_threshold(z: &[f64], delta: f64) -> Vec<f64> {
    z.iter()
        .map(|&v| {
            let m = v.abs() - delta;
            if m > 0.0 {
                m.copysign(v)
            } else {
                0.0
            }
        })
        .collect()
}

fn l1_over_l2(v: &[f64]) -> f64 {
    let n2 = norm2(v);
    if n2 == 0.0 {
        0.0
    } else {
        norm1(v) / n2
    }
}

/// Maximizer of `w'z` over `|w|_2 <= 1, |w|_1 <= c`: the soft-thresholded
/// `z`, normalized, with the smallest threshold meeting the L1 bound.
pub fn update_weight(z: &[f64], c: f64) -> Result<Vec<f64>> {
    let nz = norm2(z);
    if nz == 0.0 || !nz.is_finite() {
        return Err(Error::DegenerateInput("cannot normalize a zero or non-finite vector".into()));
    }
    if norm1(z) / nz <= c {
        return Ok(z.iter().map(|v| v / nz).collect());
    }
    let (mut lo, mut hi) = (0.0, max_abs(z));
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if l1_over_l2(&soft_threshold(z, mid)) > c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = soft_threshold(z, hi);
    let nw = norm2(&w);
    if nw == 0.0 {
        // tied maxima with c = 1: no feasible threshold, keep the first
        let i = z.iter().position(|v| v.abs() == max_abs(z)).expect("non-empty");
        let mut e = vec![0.0; z.len()];
        e[i] = z[i].signum();
        return Ok(e);
    }
    scale(&mut w, 1.0 / nw);
    Ok(w)
}

/// Rank-one solution of one penalized decomposition step.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneFit {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `alpha' Z beta`
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each full alternating sweep.
    pub objective_trace: Vec<f64>,
}

/// A fitted sparse component, with its correlation on the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFit {
    pub rank_one: RankOneFit,
    /// Pearson correlation of `X alpha` and `Y beta`.
    pub correlation: f64,
}

/// Leading right singular vector of the operator, or `None` when it is
/// (numerically) zero.
pub fn leading_right_singular_vector<C: CrossOperator + ?Sized>(cross: &C) -> Option<Vec<f64>> {
    let (_, q) = cross.shape();
    let starts: [Box<dyn Fn(usize) -> f64>; 3] = [
        Box::new(|_| 1.0),
        Box::new(|j| if j % 2 == 0 { 1.0 } else { -1.0 }),
        Box::new(|j| if j == 0 { 1.0 } else { 0.0 }),
    ];
    for start in &starts {
        let mut v: Vec<f64> = (0..q).map(start).collect();
        let nv = norm2(&v);
        scale(&mut v, 1.0 / nv);
        let mut w = cross.normal_apply(&v);
        let mut nw = norm2(&w);
        if nw == 0.0 || !nw.is_finite() {
            continue;
        }
        for _ in 0..POWER_MAX_ITERATIONS {
            scale(&mut w, 1.0 / nw);
            let change = max_abs_diff(&w, &v);
            v = w;
            if change < POWER_TOLERANCE {
                break;
            }
            w = cross.normal_apply(&v);
            nw = norm2(&w);
            if nw == 0.0 || !nw.is_finite() {
                return None;
            }
        }
        return Some(v);
    }
    None
}

fn initial_beta<C: CrossOperator + ?Sized>(cross: &C, init: InitMethod) -> Result<Vec<f64>> {
    let (p, _) = cross.shape();
    if init == InitMethod::FirstColumn {
        let mut e = vec![0.0; p];
        e[0] = 1.0;
        let mut b = cross.apply_transpose(&e);
        let nb = norm2(&b);
        if nb > 0.0 && nb.is_finite() {
            scale(&mut b, 1.0 / nb);
            return Ok(b);
        }
    }
    leading_right_singular_vector(cross)
        .ok_or_else(|| Error::DegenerateInput("cross-product matrix is zero".into()))
}

/// Alternating maximization for one component of an arbitrary cross-product
/// operator. Signs are canonicalized so that alpha's largest entry is
/// positive.
pub fn solve_rank_one<C: CrossOperator + ?Sized>(cross: &C, pen: &PenaltySpec, cfg: &SccaFitConfig) -> Result<RankOneFit> {
    cfg.validate()?;
    let (p, q) = cross.shape();
    if p == 0 || q == 0 {
        return Err(Error::Dimension("empty cross-product".into()));
    }
    let mut beta = initial_beta(cross, cfg.init)?;
    let mut alpha = vec![0.0; p];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let zb = cross.apply(&beta);
        let alpha_next = update_weight(&zb, pen.bound_x)?;
        let za = cross.apply_transpose(&alpha_next);
        let beta_next = update_weight(&za, pen.bound_y)?;
        trace.push(dot(&za, &beta_next));
        let change = max_abs_diff(&alpha_next, &alpha).max(max_abs_diff(&beta_next, &beta));
        alpha = alpha_next;
        beta = beta_next;
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    canonicalize_signs(&mut alpha, &mut beta);
    let scale = dot(&alpha, &cross.apply(&beta));
    Ok(RankOneFit {
        alpha,
        beta,
        scale,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// One sparse component of `cross` (normally `X'Y`, possibly deflated),
/// with the correlation of its variates on `x` and `y`.
pub fn fit_scca_component<C: CrossOperator + ?Sized>(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DMatrix<f64>,
    cross: &C,
    pen: &PenaltySpec,
    cfg: &SccaFitConfig,
) -> Result<ComponentFit> {
    if cross.shape() != (x.ncols(), y.ncols()) {
        return Err(Error::Dimension(format!(
            "cross-product is {:?}, data give ({}, {})",
            cross.shape(),
            x.ncols(),
            y.ncols()
        )));
    }
    let rank_one = solve_rank_one(cross, pen, cfg)?;
    let xa = x * nalgebra::DVector::from_column_slice(&rank_one.alpha);
    let yb = y * nalgebra::DVector::from_column_slice(&rank_one.beta);
    let correlation = pearson(xa.as_slice(), yb.as_slice()).unwrap_or(0.0);
    Ok(ComponentFit { rank_one, correlation })
}

/// Fits up to `cfg.components` sparse components with deflation between
/// them. Fewer components are returned (with a notice) when the deflated
/// cross-product is exhausted.
pub fn fit_scca(d: &PairedDataset, pen: &PenaltySpec, cfg: &SccaFitConfig) -> Result<CanonicalModel> {
    cfg.validate()?;
    let (x, y) = (d.x().values(), d.y().values());
    if pen_shape_mismatch(pen, d) {
        return Err(Error::Dimension("penalty bounds exceed sqrt of the data dimensions".into()));
    }
    let mut op = DataCross::new(x, y);
    if DataCross::gram_is_worthwhile(x) && cfg.init == InitMethod::Svd {
        op = op.with_gram(std::sync::Arc::new(sample_gram(x)));
    }

    let mut fits: Vec<(RankOneFit, f64)> = Vec::new();
    let mut notices = Vec::new();
    for k in 0..cfg.components {
        let fit = match solve_rank_one(&op, pen, cfg) {
            Ok(fit) => fit,
            Err(Error::DegenerateInput(msg)) => {
                notices.push(format!("stopped after {k} components: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let first = fits.first().map_or(fit.scale, |f| f.0.scale);
        if !(fit.scale > RANK_TOLERANCE * first.abs()) || fit.scale <= 0.0 {
            notices.push(format!("stopped after {k} components: deflated cross-product is exhausted"));
            break;
        }
        if !fit.converged {
            notices.push(format!(
                "component {} did not converge within {} iterations",
                k + 1,
                cfg.max_iterations
            ));
        }
        let correlation = pearson(&op.x_scores(&fit.alpha), &op.y_scores(&fit.beta)).unwrap_or(0.0);
        op.deflate(&fit.alpha, &fit.beta, fit.scale);
        fits.push((fit, correlation));
    }
    if fits.is_empty() {
        return Err(Error::DegenerateInput("no sparse component could be fitted".into()));
    }

    let k = fits.len();
    let (p, q) = (d.p(), d.q());
    let mut x_weights = nalgebra::DMatrix::zeros(p, k);
    let mut y_weights = nalgebra::DMatrix::zeros(q, k);
    let mut correlations = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    let mut diagnostics = Vec::with_capacity(k);
    for (i, (fit, r)) in fits.into_iter().enumerate() {
        x_weights.column_mut(i).copy_from_slice(&fit.alpha);
        y_weights.column_mut(i).copy_from_slice(&fit.beta);
        correlations.push(r);
        scales.push(fit.scale);
        diagnostics.push(ComponentDiagnostics {
            iterations: fit.iterations,
            converged: fit.converged,
            nonzero_x: count_nonzero(&fit.alpha),
            nonzero_y: count_nonzero(&fit.beta),
        });
    }
    let x_variates = x * &x_weights;
    let y_variates = y * &y_weights;
    Ok(CanonicalModel {
        x_weights,
        y_weights,
        correlations,
        x_variates,
        y_variates,
        component_scales: scales,
        method: FitMethod::Sparse,
        sample_ids: d.sample_ids().to_vec(),
        x_names: d.x().variable_names().to_vec(),
        y_names: d.y().variable_names().to_vec(),
        ridge: 0.0,
        sparse: Some(SparseFitInfo {
            penalty: *pen,
            config: *cfg,
            components: diagnostics,
        }),
        notices,
    })
}

fn pen_shape_mismatch(pen: &PenaltySpec, d: &PairedDataset) -> bool {
    let tol = 1e-12;
    pen.bound_x > (d.p() as f64).sqrt() + tol || pen.bound_y > (d.q() as f64).sqrt() + tol
}
