use std::path::PathBuf;

use clap::Args;
use cmcca::ingest::{write_matrix_to, TableFormat};
use cmcca::synth::{generate_planted, PlantedSpec};

use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Samples [default: 200]
    #[arg(long)]
    pub n: Option<usize>,
    /// x-side variables [default: 300]
    #[arg(long)]
    pub p: Option<usize>,
    /// y-side variables [default: 100]
    #[arg(long)]
    pub q: Option<usize>,
    /// Planted factors [default: 1]
    #[arg(long)]
    pub factors: Option<usize>,
    /// Active variables per side per factor [default: 10]
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// [default: 5]
    #[arg(long)]
    pub strength: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: SimulateArgs, mut cfg: Resolver) -> CliResult<()> {
    let n = cfg.get("n", args.n, 200)?;
    let p = cfg.get("p", args.p, 300)?;
    let q = cfg.get("q", args.q, 100)?;
    let factors = cfg.get("factors", args.factors, 1)?;
    let sparsity = cfg.get("sparsity", args.sparsity, 10)?;
    let strength = cfg.get("strength", args.strength, 5.0)?;
    let noise_sd = cfg.get("noise_sd", args.noise_sd, 1.0)?;
    let seed = cfg.get("seed", args.seed, 0)?;
    let out_dir: PathBuf = cfg.required("out_dir", args.out_dir)?;
    let config = cfg.finish()?;

    let spec = PlantedSpec::with_random_factors(n, p, q, factors, sparsity, strength, noise_sd, seed)?;
    let mut run = Run::new("simulate", &out_dir)?;
    let (data, truth) = generate_planted(&spec)?;
    if !truth.overlapping_supports.is_empty() {
        run.warn(format!("{} factor pairs share support variables", truth.overlapping_supports.len()));
    }
    for (name, m) in [("x.tsv", data.x()), ("y.tsv", data.y())] {
        let mut bytes = Vec::new();
        write_matrix_to(m, &mut bytes, TableFormat::Tsv).map_err(|e| CliError::io(&out_dir, e))?;
        run.write(name, &bytes)?;
    }
    let text = serde_json::to_string_pretty(&truth).expect("truth serializes");
    run.write("truth.json", (text + "\n").as_bytes())?;
    run.finish(config, Some(seed))
}
