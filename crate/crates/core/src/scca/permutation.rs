use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PairedDataset;
use crate::interpret::pearson;
use crate::rng::{self, Purpose};

use super::{sample_gram, solve_rank_one, CrossOperator, DataCross, InitMethod, PenaltySpec, SccaFitConfig};

/// First-component correlation against its row-permutation null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub observed: f64,
    /// One statistic per replicate, in replicate order.
    pub permuted: Vec<f64>,
    /// `(1 + #{permuted >= observed}) / (nperm + 1)`
    pub p_value: f64,
    pub seed: u64,
}

fn first_correlation(op: &DataCross<'_>, pen: &PenaltySpec, cfg: &SccaFitConfig) -> Result<f64> {
    match solve_rank_one(op, pen, cfg) {
        Ok(fit) => Ok(pearson(&op.x_scores(&fit.alpha), &op.y_scores(&fit.beta)).unwrap_or(0.0)),
        Err(Error::DegenerateInput(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Permutation test of the first sparse component.
///
/// Replicate `r` shuffles the rows of `X` with the stream
/// `(seed, Permutation, r)` and refits component one; replicates run in
/// parallel and the report does not depend on scheduling.
pub fn permutation_test(
    d: &PairedDataset,
    pen: &PenaltySpec,
    cfg: &SccaFitConfig,
    nperm: usize,
    seed: u64,
) -> Result<PermutationReport> {
    if nperm == 0 {
        return Err(Error::Precondition("a permutation test needs at least one permutation".into()));
    }
    let (x, y) = (d.x().values(), d.y().values());
    let gram = (DataCross::gram_is_worthwhile(x) && cfg.init == InitMethod::Svd).then(|| Arc::new(sample_gram(x)));
    let build = |perm: Option<Vec<usize>>| {
        let mut op = DataCross::new(x, y);
        if let Some(perm) = perm {
            op = op.with_permutation(perm);
        }
        if let Some(g) = &gram {
            op = op.with_gram(Arc::clone(g));
        }
        op
    };
    debug_assert_eq!(build(None).shape(), (d.p(), d.q()));

    let observed = first_correlation(&build(None), pen, cfg)?;
    let permuted = (0..nperm)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, Purpose::Permutation, r as u64);
            let mut perm: Vec<usize> = (0..d.n()).collect();
            perm.shuffle(&mut rng);
            first_correlation(&build(Some(perm)), pen, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    let exceed = permuted.iter().filter(|&&s| s >= observed).count();
    Ok(PermutationReport {
        observed,
        p_value: (1 + exceed) as f64 / (nperm + 1) as f64,
        permuted,
        seed,
    })
}
