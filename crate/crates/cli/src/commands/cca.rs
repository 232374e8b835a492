use std::collections::HashMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use cmcca::cca::fit_cca;
use cmcca::ingest::{format_number, DEFAULT_VARIANCE_FLOOR};
use cmcca::wilks::wilks_test;

use super::common::{self, load_paired};
use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;

#[derive(Debug, Args)]
pub struct CcaArgs {
    /// Expression matrix (samples x genes)
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Image feature matrix (samples x features)
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Number of canonical components [default: 1]
    #[arg(long)]
    pub k: Option<usize>,
    /// Ridge added to both covariance diagonals [default: 0]
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Per-sample labels (`sample_id<TAB>label`) for the scatter output
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Variable categories (`variable<TAB>category`) for the loadings output
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Component shown in scatter.tsv [default: 1]
    #[arg(long)]
    pub scatter_component: Option<usize>,
    /// Columns with variance at or below this are dropped [default: 1e-12]
    #[arg(long)]
    pub variance_floor: Option<f64>,
    /// Also write SVG heatmaps of the loadings
    #[arg(long)]
    pub svg: bool,
}

pub fn run(args: CcaArgs, mut cfg: Resolver) -> CliResult<()> {
    let x: PathBuf = cfg.required("x", args.x)?;
    let y: PathBuf = cfg.required("y", args.y)?;
    let k = cfg.get("k", args.k, 1)?;
    let ridge = cfg.get("ridge", args.ridge, 0.0)?;
    let out_dir: PathBuf = cfg.required("out_dir", args.out_dir)?;
    let labels: Option<PathBuf> = cfg.optional("labels", args.labels)?;
    let categories: Option<PathBuf> = cfg.optional("categories", args.categories)?;
    let scatter_component = cfg.get("scatter_component", args.scatter_component, 1)?;
    let variance_floor = cfg.get("variance_floor", args.variance_floor, DEFAULT_VARIANCE_FLOOR)?;
    let svg = cfg.get("svg", args.svg.then_some(true), false)?;
    let config = cfg.finish()?;
    if k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }

    let mut run = Run::new("cca", &out_dir)?;
    let data = load_paired(&mut run, &x, &y, variance_floor)?;
    let full = data.p().min(data.q());
    if k > full {
        return Err(CliError::usage(format!("--k {k} exceeds min(p, q) = {full}")));
    }
    if scatter_component == 0 || scatter_component > k {
        return Err(CliError::usage(format!("--scatter-component must lie in 1..={k}")));
    }
    let model = fit_cca(&data, k, ridge)?;
    for notice in model.notices() {
        run.warn(notice.clone());
    }
    let doc = model.to_document().to_json()?;
    run.write("model.json", (doc + "\n").as_bytes())?;
    run.write("correlations.tsv", common::correlations_tsv(&model).as_bytes())?;

    // the sequential test needs every canonical correlation, not only k
    let (n, p, q) = (data.n(), data.p(), data.q());
    let all = if k == full { model.clone() } else { fit_cca(&data, full, ridge)? };
    match wilks_test(&all, n, p, q) {
        Ok(report) => {
            let mut s =
                String::from("component\tcorrelation\twilks_lambda\tchi_square\tdegrees_of_freedom\tp_value\tdegenerate\n");
            for r in report.rows.iter().take(k) {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.component,
                    format_number(r.correlation),
                    format_number(r.wilks_lambda),
                    format_number(r.chi_square),
                    r.degrees_of_freedom,
                    format_number(r.p_value),
                    r.degenerate
                );
            }
            run.write("wilks.tsv", s.as_bytes())?;
        }
        Err(e @ cmcca::Error::Precondition(_)) => run.warn(format!("Wilks test skipped: {e}")),
        Err(e) => return Err(e.into()),
    }

    let cats: Option<HashMap<String, String>> = match &categories {
        Some(path) => Some(common::read_pairs(&mut run, path)?.into_iter().collect()),
        None => None,
    };
    common::write_loadings(&mut run, &data, &model, cats.as_ref(), svg)?;
    let labels = match &labels {
        Some(path) => Some(common::sample_labels(&mut run, path, &model)?),
        None => None,
    };
    run.write(
        "scatter.tsv",
        common::scatter_tsv(&model, scatter_component, labels.as_deref())?.as_bytes(),
    )?;
    run.finish(config, None)
}
