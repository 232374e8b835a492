use std::collections::HashMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use cmcca::ingest::{format_number, DEFAULT_VARIANCE_FLOOR};
use cmcca::scca::{fit_scca, permutation_test, InitMethod, PenaltySpec, SccaFitConfig};
use cmcca::synth::{score_recovery, GroundTruth};

use super::common::{self, load_paired};
use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

#[derive(Debug, Args)]
pub struct SccaArgs {
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// L1 bound on the x weights as a fraction of sqrt(p) [default: 0.1]
    #[arg(long)]
    pub penalty_x: Option<f64>,
    /// L1 bound on the y weights as a fraction of sqrt(q) [default: 0.1]
    #[arg(long)]
    pub penalty_y: Option<f64>,
    /// Number of sparse components [default: 10]
    #[arg(long)]
    pub k: Option<usize>,
    /// Permutations for the component-one test, 0 to skip [default: 99]
    #[arg(long)]
    pub permutations: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Convergence tolerance on weight changes [default: 1e-6]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// [default: 200]
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// `svd` or `first-column` [default: svd]
    #[arg(long)]
    pub init: Option<InitMethod>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Ground-truth JSON from `simulate`; adds recovery.json
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub variance_floor: Option<f64>,
    #[arg(long)]
    pub svg: bool,
}

pub fn run(args: SccaArgs, mut cfg: Resolver) -> CliResult<()> {
    let x: PathBuf = cfg.required("x", args.x)?;
    let y: PathBuf = cfg.required("y", args.y)?;
    let penalty_x = cfg.get("penalty_x", args.penalty_x, 0.1)?;
    let penalty_y = cfg.get("penalty_y", args.penalty_y, 0.1)?;
    let k = cfg.get("k", args.k, 10)?;
    let permutations = cfg.get("permutations", args.permutations, 99)?;
    let seed = cfg.get("seed", args.seed, 0)?;
    let defaults = SccaFitConfig::default();
    let tolerance = cfg.get("tolerance", args.tolerance, defaults.tolerance)?;
    let max_iterations = cfg.get("max_iterations", args.max_iterations, defaults.max_iterations)?;
    let init = cfg.get("init", args.init, defaults.init)?;
    let out_dir: PathBuf = cfg.required("out_dir", args.out_dir)?;
    let labels: Option<PathBuf> = cfg.optional("labels", args.labels)?;
    let categories: Option<PathBuf> = cfg.optional("categories", args.categories)?;
    let truth: Option<PathBuf> = cfg.optional("truth", args.truth)?;
    let variance_floor = cfg.get("variance_floor", args.variance_floor, DEFAULT_VARIANCE_FLOOR)?;
    let svg = cfg.get("svg", args.svg.then_some(true), false)?;
    let config = cfg.finish()?;
    if k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    let fit_cfg = SccaFitConfig {
        components: k,
        tolerance,
        max_iterations,
        init,
        seed,
    };

    let mut run = Run::new("scca", &out_dir)?;
    let data = load_paired(&mut run, &x, &y, variance_floor)?;
    let pen = PenaltySpec::new(penalty_x, penalty_y, data.p(), data.q())?;
    let model = fit_scca(&data, &pen, &fit_cfg)?;
    for notice in model.notices() {
        run.warn(notice.clone());
    }
    let doc = model.to_document().to_json()?;
    run.write("model.json", (doc + "\n").as_bytes())?;
    run.write("correlations.tsv", common::correlations_tsv(&model).as_bytes())?;

    let info = model.sparse_info().expect("sparse fit carries diagnostics");
    let mut s = String::from("component\tnonzero_x\tnonzero_y\tcorrelation\tscale\titerations\tconverged\n");
    for (i, c) in info.components.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            c.nonzero_x,
            c.nonzero_y,
            format_number(model.correlations()[i]),
            format_number(model.component_scales()[i]),
            c.iterations,
            c.converged
        );
    }
    run.write("sparsity.tsv", s.as_bytes())?;

    let cats: Option<HashMap<String, String>> = match &categories {
        Some(path) => Some(common::read_pairs(&mut run, path)?.into_iter().collect()),
        None => None,
    };
    common::write_loadings(&mut run, &data, &model, cats.as_ref(), svg)?;
    let labels = match &labels {
        Some(path) => Some(common::sample_labels(&mut run, path, &model)?),
        None => None,
    };
    run.write("scatter.tsv", common::scatter_tsv(&model, 1, labels.as_deref())?.as_bytes())?;

    if permutations > 0 {
        let report = permutation_test(&data, &pen, &fit_cfg, permutations, seed)?;
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        run.write("permutation.json", (text + "\n").as_bytes())?;
    }
    if let Some(path) = &truth {
        run.input(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let truth: GroundTruth = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: not a ground-truth document: {e}", path.display())))?;
        let metrics = score_recovery(&truth, &model)?;
        let text = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
        run.write("recovery.json", (text + "\n").as_bytes())?;
    }
    run.finish(config, Some(seed))
}
