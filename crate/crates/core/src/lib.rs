//! Cross-modal canonical correlation analysis.
//!
//! The crate pairs two views of the same samples (typically gene expression
//! and image-derived features) and finds linear combinations of each view
//! that are maximally correlated:
//!
//! * [`cca`] fits classical CCA by whitening and SVD, and [`wilks`] tests
//!   the canonical correlations sequentially;
//! * [`scca`] fits sparse CCA as a penalized rank-one decomposition of
//!   `X'Y`, usable when there are far more variables than samples, with a
//!   permutation test for the first component;
//! * [`interpret`] turns fits into canonical loadings, thresholded variable
//!   lists and variate-space sample coordinates;
//! * [`enrich`] tests selected gene lists against pathway gene sets;
//! * [`ingest`] loads, pairs, standardizes and summarizes the inputs, and
//!   [`synth`] generates planted benchmarks with known answers.
//!
//! ```
//! use cmcca::prelude::*;
//!
//! let spec = PlantedSpec::with_random_factors(120, 15, 10, 1, 3, 4.0, 1.0, 7)?;
//! let (raw, _truth) = generate_planted(&spec)?;
//! let x = standardize(raw.x(), DEFAULT_VARIANCE_FLOOR)?.matrix;
//! let y = standardize(raw.y(), DEFAULT_VARIANCE_FLOOR)?.matrix;
//! let data = PairedDataset::new(x, y)?;
//!
//! let model = fit_cca(&data, 2, 0.0)?;
//! assert!(model.correlations()[0] > 0.8);
//! # Ok::<(), cmcca::Error>(())
//! ```

pub mod cca;
pub mod enrich;
mod error;
pub mod ingest;
pub mod interpret;
pub mod model;
pub mod rng;
pub mod scca;
pub mod special;
pub mod stats;
pub mod synth;
mod vecops;
pub mod wilks;

pub use error::{Error, Result};

/// The items most programs need.
pub mod prelude {
    pub use crate::cca::{fit_cca, project};
    pub use crate::enrich::{enrich, hypergeom_tail, load_gmt, EnrichOptions, EnrichmentTable, GeneSetCollection};
    pub use crate::ingest::{
        align_samples, load_matrix, standardize, summarize_cell_features, write_matrix, LabeledMatrix, PairedDataset,
        StandardizedMatrix, TableFormat, DEFAULT_VARIANCE_FLOOR,
    };
    pub use crate::interpret::{
        compute_loadings, pearson, select_by_loading, variate_scatter, LoadingsMatrix, Modality, SelectionPolicy,
    };
    pub use crate::model::{CanonicalModel, FitMethod, ModelDocument};
    pub use crate::scca::{fit_scca, permutation_test, InitMethod, PenaltySpec, SccaFitConfig};
    pub use crate::synth::{generate_planted, score_recovery, GroundTruth, PlantedSpec};
    pub use crate::wilks::{wilks_test, SignificanceReport};
    pub use crate::Error;
}

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/data.md")]
    struct Data;
    #[doc = include_str!("../../../book/src/dense-cca.md")]
    struct DenseCca;
    #[doc = include_str!("../../../book/src/sparse-cca.md")]
    struct SparseCca;
    #[doc = include_str!("../../../book/src/interpretation.md")]
    struct Interpretation;
    #[doc = include_str!("../../../book/src/enrichment.md")]
    struct Enrichment;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
