//! Paired datasets with planted sparse cross-modal factors, and scoring of
//! fitted models against the planted truth.
//!
//! Each factor `m` contributes `strength_m * u_m * w_xm'` to `X` and
//! `strength_m * u_m * w_ym'` to `Y`, where `u_m` is a standard-normal latent
//! score per sample; both blocks then get independent `N(0, noise_sd^2)`
//! noise.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{LabeledMatrix, PairedDataset};
use crate::interpret::pearson;
use crate::model::CanonicalModel;
use crate::rng::{self, Purpose};
use crate::vecops::{dot, norm2};

/// One planted factor with sparse unit weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFactor {
    pub support_x: Vec<usize>,
    /// Weights on `support_x`, same order.
    pub weights_x: Vec<f64>,
    pub support_y: Vec<usize>,
    pub weights_y: Vec<f64>,
    pub strength: f64,
}

impl PlantedFactor {
    pub fn dense_x(&self, p: usize) -> Vec<f64> {
        densify(&self.support_x, &self.weights_x, p)
    }

    pub fn dense_y(&self, q: usize) -> Vec<f64> {
        densify(&self.support_y, &self.weights_y, q)
    }
}

fn densify(support: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (&i, &w) in support.iter().zip(weights) {
        v[i] = w;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub factors: Vec<PlantedFactor>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl PlantedSpec {
    /// `count` factors, each with `sparsity` active variables per side drawn
    /// without replacement, equal weight magnitudes `1/sqrt(sparsity)` and
    /// random signs.
    #[allow(clippy::too_many_arguments)]
    pub fn with_random_factors(
        n: usize,
        p: usize,
        q: usize,
        count: usize,
        sparsity: usize,
        strength: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        if count > 0 && (sparsity == 0 || sparsity > p || sparsity > q) {
            return Err(Error::Value(format!("sparsity {sparsity} must lie in 1..=min(p, q) = {}", p.min(q))));
        }
        let factors = (0..count)
            .map(|m| {
                let mut rng = rng::stream(seed, Purpose::Design, m as u64);
                let mut draw = |dim: usize| {
                    let mut support = index::sample(&mut rng, dim, sparsity).into_vec();
                    support.sort_unstable();
                    let mag = 1.0 / (sparsity as f64).sqrt();
                    let weights = support
                        .iter()
                        .map(|_| if rng.random::<bool>() { mag } else { -mag })
                        .collect();
                    (support, weights)
                };
                let (support_x, weights_x) = draw(p);
                let (support_y, weights_y) = draw(q);
                PlantedFactor {
                    support_x,
                    weights_x,
                    support_y,
                    weights_y,
                    strength,
                }
            })
            .collect();
        let spec = Self {
            n,
            p,
            q,
            factors,
            noise_sd,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < crate::ingest::MIN_SAMPLES || self.p == 0 || self.q == 0 {
            return Err(Error::Value(format!(
                "need n >= {}, p >= 1, q >= 1; got n={}, p={}, q={}",
                crate::ingest::MIN_SAMPLES,
                self.n,
                self.p,
                self.q
            )));
        }
        if !(self.noise_sd > 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::Value(format!("noise_sd must be positive, got {}", self.noise_sd)));
        }
        for (m, f) in self.factors.iter().enumerate() {
            if !(f.strength > 0.0) || !f.strength.is_finite() {
                return Err(Error::Value(format!("factor {m}: strength must be positive")));
            }
            for (side, support, weights, dim) in [
                ("x", &f.support_x, &f.weights_x, self.p),
                ("y", &f.support_y, &f.weights_y, self.q),
            ] {
                if support.len() != weights.len() || support.is_empty() {
                    return Err(Error::Value(format!("factor {m}: malformed {side} weights")));
                }
                if support.iter().any(|&i| i >= dim) {
                    return Err(Error::Value(format!("factor {m}: {side} support out of bounds")));
                }
                if support.iter().collect::<HashSet<_>>().len() != support.len() {
                    return Err(Error::Value(format!("factor {m}: repeated {side} support index")));
                }
                if (norm2(weights) - 1.0).abs() > 1e-9 {
                    return Err(Error::Value(format!("factor {m}: {side} weights are not unit length")));
                }
            }
        }
        Ok(())
    }
}

/// Planted factors as realized in a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFactor {
    pub support_x: Vec<usize>,
    pub weights_x: Vec<f64>,
    pub support_y: Vec<usize>,
    pub weights_y: Vec<f64>,
    pub strength: f64,
    /// Sample correlation of `X w_x` and `Y w_y` on the generated data.
    pub sample_correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub noise_sd: f64,
    pub seed: u64,
    pub factors: Vec<TruthFactor>,
    /// Pairs of factor indices whose supports share a variable on either side.
    pub overlapping_supports: Vec<(usize, usize)>,
}

fn labels(prefix: &str, count: usize) -> Vec<String> {
    let width = count.to_string().len();
    (1..=count).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn normal_block(seed: u64, purpose: Purpose, n: usize, dim: usize, sd: f64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, purpose, 0);
    // column-major fill: column j is drawn after columns 0..j
    let data: Vec<f64> = (0..n * dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    DMatrix::from_vec(n, dim, data)
}

/// Draws a dataset from the planted model. Identical specs give
/// bit-identical output.
pub fn generate_planted(spec: &PlantedSpec) -> Result<(PairedDataset, GroundTruth)> {
    spec.validate()?;
    let (n, p, q) = (spec.n, spec.p, spec.q);
    let mut x = normal_block(spec.seed, Purpose::NoiseX, n, p, spec.noise_sd);
    let mut y = normal_block(spec.seed, Purpose::NoiseY, n, q, spec.noise_sd);
    for (m, f) in spec.factors.iter().enumerate() {
        let mut rng = rng::stream(spec.seed, Purpose::Latents, m as u64);
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for (&j, &w) in f.support_x.iter().zip(&f.weights_x) {
            for (i, ui) in u.iter().enumerate() {
                x[(i, j)] += f.strength * ui * w;
            }
        }
        for (&j, &w) in f.support_y.iter().zip(&f.weights_y) {
            for (i, ui) in u.iter().enumerate() {
                y[(i, j)] += f.strength * ui * w;
            }
        }
    }

    let factors = spec
        .factors
        .iter()
        .map(|f| {
            let xs = &x * nalgebra::DVector::from_vec(f.dense_x(p));
            let ys = &y * nalgebra::DVector::from_vec(f.dense_y(q));
            TruthFactor {
                support_x: f.support_x.clone(),
                weights_x: f.weights_x.clone(),
                support_y: f.support_y.clone(),
                weights_y: f.weights_y.clone(),
                strength: f.strength,
                sample_correlation: pearson(xs.as_slice(), ys.as_slice()).unwrap_or(0.0),
            }
        })
        .collect();
    let mut overlapping_supports = Vec::new();
    for a in 0..spec.factors.len() {
        for b in a + 1..spec.factors.len() {
            let (fa, fb) = (&spec.factors[a], &spec.factors[b]);
            let shares = |s: &[usize], t: &[usize]| s.iter().any(|i| t.contains(i));
            if shares(&fa.support_x, &fb.support_x) || shares(&fa.support_y, &fb.support_y) {
                overlapping_supports.push((a, b));
            }
        }
    }

    let ids = labels("s", n);
    let xm = LabeledMatrix::new(x, ids.clone(), labels("gene", p))?;
    let ym = LabeledMatrix::new(y, ids, labels("feat", q))?;
    let truth = GroundTruth {
        n,
        p,
        q,
        noise_sd: spec.noise_sd,
        seed: spec.seed,
        factors,
        overlapping_supports,
    };
    Ok((PairedDataset::new(xm, ym)?, truth))
}

/// Support recovery of one planted factor by one fitted component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorMatch {
    pub factor: usize,
    pub component: usize,
    pub precision_x: f64,
    pub recall_x: f64,
    pub f1_x: f64,
    pub precision_y: f64,
    pub recall_y: f64,
    pub f1_y: f64,
    /// `|cos|` between planted and fitted weights.
    pub cosine_x: f64,
    pub cosine_y: f64,
    /// `|fitted correlation - planted sample correlation|`
    pub correlation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub matches: Vec<FactorMatch>,
    pub unmatched_factors: Vec<usize>,
}

fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm2(a), norm2(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot(a, b) / (na * nb)).abs().min(1.0)
    }
}

fn support_scores(truth: &[usize], fitted: &[f64]) -> (f64, f64, f64) {
    let truth: HashSet<usize> = truth.iter().copied().collect();
    let predicted: Vec<usize> = fitted.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
    let hits = predicted.iter().filter(|i| truth.contains(i)).count() as f64;
    let precision = if predicted.is_empty() { 0.0 } else { hits / predicted.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { hits / truth.len() as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    (precision, recall, f1)
}

/// Scores a fitted model against the planted factors.
pub fn score_recovery(truth: &GroundTruth, model: &CanonicalModel) -> Result<RecoveryMetrics> {
    score_weights(truth, model.x_weights(), model.y_weights(), model.correlations())
}

/// [`score_recovery`] on bare weight matrices (`p x k`, `q x k`).
///
/// Factors and components are paired greedily by the mean of the two
/// `|cos|` similarities, largest first; ties go to the lower factor index.
pub fn score_weights(
    truth: &GroundTruth,
    x_weights: &DMatrix<f64>,
    y_weights: &DMatrix<f64>,
    correlations: &[f64],
) -> Result<RecoveryMetrics> {
    let (p, q) = (truth.p, truth.q);
    if x_weights.nrows() != p || y_weights.nrows() != q || x_weights.ncols() != y_weights.ncols() {
        return Err(Error::Dimension(format!(
            "model weights are {}x{} and {}x{}, truth has p={p}, q={q}",
            x_weights.nrows(),
            x_weights.ncols(),
            y_weights.nrows(),
            y_weights.ncols()
        )));
    }
    let k = x_weights.ncols();
    let dense: Vec<(Vec<f64>, Vec<f64>)> = truth
        .factors
        .iter()
        .map(|f| (densify(&f.support_x, &f.weights_x, p), densify(&f.support_y, &f.weights_y, q)))
        .collect();
    let mut candidates = Vec::new();
    for (m, (wx, wy)) in dense.iter().enumerate() {
        for c in 0..k {
            let cx = abs_cosine(wx, x_weights.column(c).as_slice());
            let cy = abs_cosine(wy, y_weights.column(c).as_slice());
            candidates.push((0.5 * (cx + cy), m, c, cx, cy));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_factors = HashSet::new();
    let mut used_components = HashSet::new();
    let mut matches = Vec::new();
    for (_, m, c, cx, cy) in candidates {
        if used_factors.contains(&m) || used_components.contains(&c) {
            continue;
        }
        used_factors.insert(m);
        used_components.insert(c);
        let f = &truth.factors[m];
        let (precision_x, recall_x, f1_x) = support_scores(&f.support_x, x_weights.column(c).as_slice());
        let (precision_y, recall_y, f1_y) = support_scores(&f.support_y, y_weights.column(c).as_slice());
        matches.push(FactorMatch {
            factor: m,
            component: c,
            precision_x,
            recall_x,
            f1_x,
            precision_y,
            recall_y,
            f1_y,
            cosine_x: cx,
            cosine_y: cy,
            correlation_error: correlations.get(c).map_or(f64::NAN, |r| (r - f.sample_correlation).abs()),
        });
    }
    matches.sort_by_key(|mt| mt.factor);
    let unmatched_factors = (0..truth.factors.len()).filter(|m| !used_factors.contains(m)).collect();
    Ok(RecoveryMetrics { matches, unmatched_factors })
}
