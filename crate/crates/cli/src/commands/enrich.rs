use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use cmcca::enrich::{enrich, load_gmt, EnrichOptions};
use cmcca::ingest::format_number;
use cmcca::interpret::{select_by_loading, SelectionPolicy};

use super::common;
use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::svg;

#[derive(Debug, Args)]
pub struct EnrichArgs {
    /// Gene loadings TSV written by `cca` or `scca`
    #[arg(long)]
    pub loadings: Option<PathBuf>,
    /// Genes are selected when their loading exceeds this [default: 0.35]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// `signed` or `absolute` comparison with the threshold [default: signed]
    #[arg(long)]
    pub policy: Option<SelectionPolicy>,
    /// Gene sets in GMT format
    #[arg(long)]
    pub gmt: Option<PathBuf>,
    /// `matrix` (every gene in the loadings file) or a file with one gene
    /// per line [default: matrix]
    #[arg(long)]
    pub universe: Option<String>,
    /// Report EASE scores instead of plain hypergeometric tails
    #[arg(long)]
    pub ease: bool,
    /// Also write the variate x pathway -log10(p) matrix
    #[arg(long)]
    pub heatmap: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub svg: bool,
}

pub fn run(args: EnrichArgs, mut cfg: Resolver) -> CliResult<()> {
    let loadings_path: PathBuf = cfg.required("loadings", args.loadings)?;
    let threshold = cfg.get("threshold", args.threshold, 0.35)?;
    let policy = cfg.get("policy", args.policy, SelectionPolicy::Signed)?;
    let gmt: PathBuf = cfg.required("gmt", args.gmt)?;
    let universe_arg = cfg.get("universe", args.universe, "matrix".to_string())?;
    let ease = cfg.get("ease", args.ease.then_some(true), false)?;
    let heatmap = cfg.get("heatmap", args.heatmap.then_some(true), false)?;
    let out_dir: PathBuf = cfg.required("out_dir", args.out_dir)?;
    let svg_out = cfg.get("svg", args.svg.then_some(true), false)?;
    let config = cfg.finish()?;

    let mut run = Run::new("enrich", &out_dir)?;
    run.input(&loadings_path)?;
    let text = std::fs::read_to_string(&loadings_path).map_err(|e| CliError::io(&loadings_path, e))?;
    let loadings = common::parse_loadings(&loadings_path, &text)?;
    run.input(&gmt)?;
    let sets = load_gmt(&gmt)?;
    let universe: Vec<String> = if universe_arg == "matrix" {
        loadings.variables.clone()
    } else {
        let path = PathBuf::from(&universe_arg);
        run.input(&path)?;
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
    };

    let selection = select_by_loading(&loadings, threshold, policy)?;
    if selection.selected.iter().all(Vec::is_empty) {
        run.warn(format!("no gene has a loading above {threshold}; the table is empty"));
    }
    let table = enrich(&selection, &sets, &universe, EnrichOptions { ease })?;

    let mut s = String::from(
        "variate\tpathway\toverlap\tselected\tpathway_size\tuniverse\tp_value\tneg_log10_p\toverlap_percent\tbh_p\tcomputed_flag\n",
    );
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.variate,
            r.pathway,
            r.overlap,
            r.selected,
            r.pathway_size,
            r.universe,
            format_number(r.p_value),
            format_number(r.neg_log10_p),
            format_number(r.overlap_percent),
            format_number(r.bh_p),
            u8::from(r.computed)
        );
    }
    run.write("enrichment.tsv", s.as_bytes())?;

    if heatmap || svg_out {
        // not-computed cells are 0, as are variates with nothing selected
        let names: Vec<String> = sets.sets().iter().map(|g| g.name.clone()).collect();
        let k = loadings.n_variates();
        let mut grid = vec![vec![Some(0.0); names.len()]; k];
        for r in &table.rows {
            let c = names.iter().position(|n| *n == r.pathway).expect("row names a known pathway");
            grid[r.variate - 1][c] = Some(if r.computed { r.neg_log10_p } else { 0.0 });
        }
        let rows: Vec<String> = (1..=k).map(|i| format!("variate_{i}")).collect();
        if heatmap {
            let mut s = String::from("variate");
            for n in &names {
                let _ = write!(s, "\t{n}");
            }
            s.push('\n');
            for (row, values) in rows.iter().zip(&grid) {
                s.push_str(row);
                for v in values {
                    let _ = write!(s, "\t{}", format_number(v.unwrap_or(0.0)));
                }
                s.push('\n');
            }
            run.write("heatmap.tsv", s.as_bytes())?;
        }
        if svg_out {
            let picture = svg::heatmap(&rows, &names, &grid, svg::Scale::Sequential);
            run.write("heatmap.svg", picture.as_bytes())?;
        }
    }
    run.finish(config, None)
}
