use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats;

use super::{LabeledMatrix, TableFormat, SAMPLE_ID_HEADER};

/// Header text of the cell identifier column.
pub const CELL_ID_HEADER: &str = "cell_id";

/// Spacing (in percent) of the summary percentiles.
pub const DEFAULT_PERCENTILE_STEP: u32 = 10;

/// One segmented cell and its measured features.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub sample_id: String,
    pub cell_id: String,
    pub values: Vec<f64>,
}

/// Per-cell measurements, every cell carrying every feature.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFeatureTable {
    rows: Vec<CellRecord>,
    feature_names: Vec<String>,
}

impl CellFeatureTable {
    pub fn new(feature_names: Vec<String>, rows: Vec<CellRecord>) -> Result<Self> {
        let mut names = HashSet::new();
        for name in &feature_names {
            if !names.insert(name.as_str()) {
                return Err(Error::Duplicate { what: "feature name", name: name.clone() });
            }
        }
        let mut cells = HashSet::new();
        for row in &rows {
            if row.values.len() != feature_names.len() {
                return Err(Error::Value(format!(
                    "cell {}/{} has {} values for {} features",
                    row.sample_id,
                    row.cell_id,
                    row.values.len(),
                    feature_names.len()
                )));
            }
            if row.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Value(format!(
                    "cell {}/{} has a non-finite value",
                    row.sample_id, row.cell_id
                )));
            }
            if !cells.insert((row.sample_id.as_str(), row.cell_id.as_str())) {
                return Err(Error::Duplicate {
                    what: "cell id",
                    name: format!("{}/{}", row.sample_id, row.cell_id),
                });
            }
        }
        Ok(Self { rows, feature_names })
    }

    pub fn rows(&self) -> &[CellRecord] {
        &self.rows
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }
}

/// Reads a per-cell table: `sample_id`, `cell_id`, then one column per
/// feature. Empty cells are rejected rather than imputed.
pub fn load_cell_table(path: impl AsRef<Path>, format: TableFormat) -> Result<CellFeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cell_table(file, format)
}

pub fn read_cell_table<R: std::io::Read>(reader: R, format: TableFormat) -> Result<CellFeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Format(e.to_string()))?,
        None => return Err(Error::Format("missing header line".into())),
    };
    if header.get(0) != Some(SAMPLE_ID_HEADER) || header.get(1) != Some(CELL_ID_HEADER) {
        return Err(Error::Format(format!(
            "header must start with `{SAMPLE_ID_HEADER}` and `{CELL_ID_HEADER}`"
        )));
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
    let width = feature_names.len() + 2;
    let mut rows = Vec::new();
    for (idx, rec) in records.enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != width {
            return Err(Error::Format(format!(
                "line {line} has {} fields, header has {width}",
                rec.len()
            )));
        }
        let mut values = Vec::with_capacity(feature_names.len());
        for (j, cell) in rec.iter().skip(2).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(Error::Value(format!("missing value at line {line}, field {}", j + 3)));
            }
            values.push(cell.parse().map_err(|_| Error::Parse {
                row: line,
                col: j + 3,
                message: format!("not a number: {cell:?}"),
            })?);
        }
        rows.push(CellRecord {
            sample_id: rec[0].to_owned(),
            cell_id: rec[1].to_owned(),
            values,
        });
    }
    CellFeatureTable::new(feature_names, rows)
}

/// Percentile levels (in percent) strictly between 0 and 100.
pub fn percentile_levels(step: u32) -> Vec<u32> {
    (1..).map(|i| i * step).take_while(|&p| p < 100).collect()
}

/// Collapses per-cell measurements to one row per sample.
///
/// For every feature `f` the output carries `f_mean`, `f_std` (ddof = 1,
/// zero for a single cell) and `f_pXX` for each interior percentile level.
/// Samples appear in order of first occurrence in the table.
pub fn summarize_cell_features(t: &CellFeatureTable, percentile_step: u32) -> Result<LabeledMatrix> {
    if t.rows.is_empty() {
        return Err(Error::Value("cell table has no rows".into()));
    }
    if percentile_step == 0 || percentile_step >= 100 {
        return Err(Error::Value(format!("percentile step must be in 1..100, got {percentile_step}")));
    }
    let levels = percentile_levels(percentile_step);

    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, row) in t.rows.iter().enumerate() {
        groups
            .entry(row.sample_id.as_str())
            .or_insert_with(|| {
                order.push(row.sample_id.as_str());
                Vec::new()
            })
            .push(i);
    }

    let width = 2 + levels.len();
    let per_sample: Vec<Vec<f64>> = order
        .par_iter()
        .map(|sample| {
            let cells = &groups[sample];
            let mut out = Vec::with_capacity(width * t.feature_names.len());
            let mut buf = Vec::with_capacity(cells.len());
            for f in 0..t.feature_names.len() {
                buf.clear();
                buf.extend(cells.iter().map(|&i| t.rows[i].values[f]));
                out.push(stats::mean(&buf));
                out.push(if buf.len() > 1 { stats::variance(&buf, 1).sqrt() } else { 0.0 });
                buf.sort_by(f64::total_cmp);
                out.extend(levels.iter().map(|&p| stats::percentile_sorted(&buf, f64::from(p) / 100.0)));
            }
            out
        })
        .collect();

    let mut names = Vec::with_capacity(width * t.feature_names.len());
    for f in &t.feature_names {
        names.push(format!("{f}_mean"));
        names.push(format!("{f}_std"));
        names.extend(levels.iter().map(|p| format!("{f}_p{p}")));
    }
    let flat: Vec<f64> = per_sample.into_iter().flatten().collect();
    let values = DMatrix::from_row_slice(order.len(), names.len(), &flat);
    LabeledMatrix::new(values, order.into_iter().map(str::to_owned).collect(), names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, &[f64])], features: &[&str]) -> CellFeatureTable {
        CellFeatureTable::new(
            features.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|(s, c, v)| CellRecord {
                    sample_id: s.to_string(),
                    cell_id: c.to_string(),
                    values: v.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_cells_collapse() {
        let t = table(&[("s", "1", &[2.5]), ("s", "2", &[2.5]), ("s", "3", &[2.5])], &["area"]);
        let m = summarize_cell_features(&t, 10).unwrap();
        assert_eq!(m.ncols(), 11);
        let row: Vec<f64> = (0..11).map(|j| m.values()[(0, j)]).collect();
        assert_eq!(row[0], 2.5);
        assert_eq!(row[1], 0.0);
        assert!(row[2..].iter().all(|v| *v == 2.5));
        assert_eq!(m.variable_names()[0], "area_mean");
        assert_eq!(m.variable_names()[1], "area_std");
        assert_eq!(m.variable_names()[2], "area_p10");
        assert_eq!(m.variable_names()[10], "area_p90");
    }

    #[test]
    fn ramp_median() {
        let values: Vec<[f64; 1]> = (1..=10).map(|v| [f64::from(v)]).collect();
        let ids: Vec<String> = (1..=10).map(|i| i.to_string()).collect();
        let rows: Vec<(&str, &str, &[f64])> =
            values.iter().zip(&ids).map(|(v, id)| ("s", id.as_str(), &v[..])).collect();
        let m = summarize_cell_features(&table(&rows, &["f"]), 10).unwrap();
        let p50 = m.variable_names().iter().position(|n| n == "f_p50").unwrap();
        assert_eq!(m.values()[(0, p50)], 5.5);
    }

    #[test]
    fn samples_are_independent() {
        let t = table(
            &[("a", "1", &[1.0]), ("b", "1", &[100.0]), ("a", "2", &[3.0]), ("b", "2", &[300.0])],
            &["f"],
        );
        let m = summarize_cell_features(&t, 10).unwrap();
        assert_eq!(m.sample_ids(), ["a", "b"]);
        assert_eq!(m.values()[(0, 0)], 2.0);
        assert_eq!(m.values()[(1, 0)], 200.0);
    }

    #[test]
    fn empty_table_rejected() {
        let t = CellFeatureTable::new(vec!["f".into()], vec![]).unwrap();
        assert!(matches!(summarize_cell_features(&t, 10), Err(Error::Value(_))));
    }

    #[test]
    fn missing_cell_rejected() {
        let text = "sample_id\tcell_id\tf\tg\ns1\tc1\t1\t\n";
        let err = read_cell_table(text.as_bytes(), TableFormat::Tsv).unwrap_err();
        assert!(matches!(err, Error::Value(_)), "{err}");
    }

    #[test]
    fn parses_table() {
        let text = "sample_id\tcell_id\tf\tg\ns1\tc1\t1\t2\ns1\tc2\t3\t4\n";
        let t = read_cell_table(text.as_bytes(), TableFormat::Tsv).unwrap();
        assert_eq!(t.feature_names(), ["f", "g"]);
        assert_eq!(t.rows()[1].values, [3.0, 4.0]);
    }
}
