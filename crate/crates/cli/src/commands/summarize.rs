use std::path::PathBuf;

use clap::Args;
use cmcca::ingest::{load_cell_table, summarize_cell_features, write_matrix_to, TableFormat, DEFAULT_PERCENTILE_STEP};

use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Per-cell feature table (`sample_id<TAB>cell_id<TAB>features...`)
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Percentile spacing in percent [default: 10]
    #[arg(long)]
    pub percentile_step: Option<u32>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: SummarizeArgs, mut cfg: Resolver) -> CliResult<()> {
    let cells: PathBuf = cfg.required("cells", args.cells)?;
    let step = cfg.get("percentile_step", args.percentile_step, DEFAULT_PERCENTILE_STEP)?;
    let out_dir: PathBuf = cfg.required("out_dir", args.out_dir)?;
    let config = cfg.finish()?;

    let mut run = Run::new("summarize", &out_dir)?;
    run.input(&cells)?;
    let table = load_cell_table(&cells, TableFormat::from_path(&cells))?;
    let features = summarize_cell_features(&table, step)?;
    let mut bytes = Vec::new();
    write_matrix_to(&features, &mut bytes, TableFormat::Tsv).map_err(|e| CliError::io(&out_dir, e))?;
    run.write("features.tsv", &bytes)?;
    run.finish(config, None)
}
