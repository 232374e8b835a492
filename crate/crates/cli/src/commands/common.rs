use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use cmcca::ingest::{align_samples, format_number, load_matrix, standardize, PairedDataset, TableFormat};
use cmcca::interpret::{compute_loadings, variate_scatter, LoadingsMatrix, Modality};
use cmcca::model::CanonicalModel;

use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::svg;

/// Loads, aligns and standardizes the two views.
pub fn load_paired(run: &mut Run, x: &Path, y: &Path, variance_floor: f64) -> CliResult<PairedDataset> {
    run.input(x)?;
    run.input(y)?;
    let xm = load_matrix(x, TableFormat::from_path(x))?;
    let ym = load_matrix(y, TableFormat::from_path(y))?;
    let raw = align_samples(&xm, &ym)?;
    let report = raw.alignment();
    if !report.dropped_from_x.is_empty() || !report.dropped_from_y.is_empty() {
        run.warn(format!(
            "{} samples only in --x and {} only in --y were dropped",
            report.dropped_from_x.len(),
            report.dropped_from_y.len()
        ));
    }
    let sx = standardize(raw.x(), variance_floor)?;
    let sy = standardize(raw.y(), variance_floor)?;
    for (side, s) in [("x", &sx), ("y", &sy)] {
        for d in &s.dropped_columns {
            run.warn(format!("{side} column {:?} dropped: {}", d.name, d.reason));
        }
    }
    Ok(PairedDataset::new(sx.matrix, sy.matrix)?)
}

/// Two-column TSV with a header line, as an ordered list of pairs.
pub fn read_pairs(run: &mut Run, path: &Path) -> CliResult<Vec<(String, String)>> {
    run.input(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(a), Some(b)) => out.push((a.to_string(), b.to_string())),
            _ => return Err(CliError::usage(format!("{}: line {} needs two fields", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn correlations_tsv(model: &CanonicalModel) -> String {
    let mut s = String::from("component\tcorrelation\n");
    for (i, r) in model.correlations().iter().enumerate() {
        let _ = writeln!(s, "{}\t{}", i + 1, format_number(*r));
    }
    s
}

fn option_number(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_number)
}

pub fn loadings_tsv(l: &LoadingsMatrix, categories: Option<&HashMap<String, String>>) -> String {
    let mut s = String::from("variable");
    for i in 1..=l.n_variates() {
        let _ = write!(s, "\tvariate_{i}");
    }
    if categories.is_some() {
        s.push_str("\tmodality\tcategory");
    }
    s.push('\n');
    for (name, row) in l.variables.iter().zip(&l.values) {
        s.push_str(name);
        for v in row {
            s.push('\t');
            s.push_str(&option_number(*v));
        }
        if let Some(cats) = categories {
            let _ = write!(s, "\t{}\t{}", l.modality.as_str(), cats.get(name).map_or("", String::as_str));
        }
        s.push('\n');
    }
    s
}

/// Parses the loadings TSV written by [`loadings_tsv`].
pub fn parse_loadings(path: &Path, text: &str) -> CliResult<LoadingsMatrix> {
    let bad = |msg: String| CliError::usage(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty loadings file".into()))?.split('\t').collect();
    if header.first() != Some(&"variable") {
        return Err(bad("first header field must be \"variable\"".into()));
    }
    let variate_cols: Vec<usize> = (1..header.len()).filter(|&c| header[c].starts_with("variate_")).collect();
    let modality_col = header.iter().position(|h| *h == "modality");
    let mut modality = Modality::Gene;
    let mut variables = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != header.len() {
            return Err(bad(format!("line {} has {} fields, header has {}", i + 2, fields.len(), header.len())));
        }
        let row = variate_cols
            .iter()
            .map(|&c| match fields[c] {
                "NA" => Ok(None),
                f => f
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(format!("line {}: bad number {f:?}", i + 2))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if let Some(c) = modality_col {
            modality = fields[c].parse().map_err(|e: cmcca::Error| bad(e.to_string()))?;
        }
        variables.push(fields[0].to_string());
        values.push(row);
    }
    Ok(LoadingsMatrix {
        variables,
        values,
        modality,
    })
}

pub fn scatter_tsv(model: &CanonicalModel, component: usize, labels: Option<&[String]>) -> CliResult<String> {
    let points = variate_scatter(model, component, labels)?;
    let mut s = String::from("sample_id\tu\tv\tlabel\n");
    for p in points {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            p.sample_id,
            format_number(p.u),
            format_number(p.v),
            p.label.unwrap_or_default()
        );
    }
    Ok(s)
}

/// Label per model sample, in model order.
pub fn sample_labels(run: &mut Run, path: &Path, model: &CanonicalModel) -> CliResult<Vec<String>> {
    let map: HashMap<String, String> = read_pairs(run, path)?.into_iter().collect();
    model
        .sample_ids()
        .iter()
        .map(|id| {
            map.get(id)
                .cloned()
                .ok_or_else(|| CliError::usage(format!("{}: no label for sample {id:?}", path.display())))
        })
        .collect()
}

/// Writes loadings (and optional SVG heatmaps) for both views.
pub fn write_loadings(
    run: &mut Run,
    data: &PairedDataset,
    model: &CanonicalModel,
    categories: Option<&HashMap<String, String>>,
    svg_out: bool,
) -> CliResult<()> {
    let sides = [
        ("loadings_x", data.x(), model.x_variates(), Modality::Gene),
        ("loadings_y", data.y(), model.y_variates(), Modality::Image),
    ];
    for (stem, matrix, variates, modality) in sides {
        let l = compute_loadings(matrix, variates, modality)?;
        run.write(&format!("{stem}.tsv"), loadings_tsv(&l, categories).as_bytes())?;
        if svg_out {
            let cols: Vec<String> = (1..=l.n_variates()).map(|i| format!("variate_{i}")).collect();
            let picture = svg::heatmap(&l.variables, &cols, &l.values, svg::Scale::Diverging);
            run.write(&format!("{stem}.svg"), picture.as_bytes())?;
        }
    }
    Ok(())
}
