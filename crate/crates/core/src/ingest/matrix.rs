use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Header text of the sample identifier column.
pub const SAMPLE_ID_HEADER: &str = "sample_id";

/// Delimiter flavour of a tabular file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Tsv,
    Csv,
}

impl TableFormat {
    /// `.csv` files are comma separated; everything else is treated as TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TableFormat::Csv,
            _ => TableFormat::Tsv,
        }
    }

    pub fn delimiter(self) -> u8 {
        match self {
            TableFormat::Tsv => b'\t',
            TableFormat::Csv => b',',
        }
    }
}

/// A dense samples-by-variables matrix with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    values: DMatrix<f64>,
    sample_ids: Vec<String>,
    variable_names: Vec<String>,
}

impl LabeledMatrix {
    /// Builds a matrix, checking label counts, label uniqueness and
    /// finiteness of every entry.
    pub fn new(
        values: DMatrix<f64>,
        sample_ids: Vec<String>,
        variable_names: Vec<String>,
    ) -> Result<Self> {
        if values.nrows() != sample_ids.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} sample ids",
                values.nrows(),
                sample_ids.len()
            )));
        }
        if values.ncols() != variable_names.len() {
            return Err(Error::Dimension(format!(
                "{} columns but {} variable names",
                values.ncols(),
                variable_names.len()
            )));
        }
        check_unique("sample id", &sample_ids)?;
        check_unique("variable name", &variable_names)?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::Value(format!(
                "non-finite entry at sample {:?}, variable {:?}",
                sample_ids[row], variable_names[col]
            )));
        }
        Ok(Self {
            values,
            sample_ids,
            variable_names,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Column `j` as a contiguous slice (storage is column-major).
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.nrows();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Vec<String>, Vec<String>) {
        (self.values, self.sample_ids, self.variable_names)
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> LabeledMatrix {
        let values = self.values.select_rows(rows.iter());
        let sample_ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        LabeledMatrix {
            values,
            sample_ids,
            variable_names: self.variable_names.clone(),
        }
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> LabeledMatrix {
        let values = self.values.select_columns(cols.iter());
        let variable_names = cols
            .iter()
            .map(|&c| self.variable_names[c].clone())
            .collect();
        LabeledMatrix {
            values,
            sample_ids: self.sample_ids.clone(),
            variable_names,
        }
    }
}

fn check_unique(what: &'static str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::Duplicate {
                what,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

/// Reads a `sample_id`-keyed matrix file.
///
/// Parse errors report the 1-based line number of the file and the 1-based
/// field number within the line.
pub fn load_matrix(path: impl AsRef<Path>, format: TableFormat) -> Result<LabeledMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(file, format)
}

/// [`load_matrix`] over any reader.
pub fn read_matrix<R: std::io::Read>(reader: R, format: TableFormat) -> Result<LabeledMatrix> {
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
    if header.get(0) != Some(SAMPLE_ID_HEADER) {
        return Err(Error::Format(format!(
            "first header cell must be `{SAMPLE_ID_HEADER}`, found {:?}",
            header.get(0).unwrap_or("")
        )));
    }
    let variable_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    check_unique("variable name", &variable_names)?;
    let p = variable_names.len();

    let mut sample_ids = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    for (idx, rec) in records.enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != p + 1 {
            return Err(Error::Format(format!(
                "line {line} has {} fields, header has {}",
                rec.len(),
                p + 1
            )));
        }
        sample_ids.push(rec[0].to_owned());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: line,
                col: j + 2,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Value(format!(
                    "non-finite value {cell:?} at line {line}, field {}",
                    j + 2
                )));
            }
            data.push(v);
        }
    }
    if sample_ids.is_empty() {
        return Err(Error::Value("n=0: the file has no data rows".into()));
    }
    let values = DMatrix::from_row_slice(sample_ids.len(), p, &data);
    LabeledMatrix::new(values, sample_ids, variable_names)
}

/// Writes a matrix in canonical form: one header line, `\n` line endings,
/// every number printed by [`format_number`].
pub fn write_matrix(m: &LabeledMatrix, path: impl AsRef<Path>, format: TableFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_to(m, &mut out, format).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// [`write_matrix`] over any writer.
pub fn write_matrix_to<W: Write>(m: &LabeledMatrix, out: &mut W, format: TableFormat) -> std::io::Result<()> {
    let sep = format.delimiter() as char;
    write!(out, "{SAMPLE_ID_HEADER}")?;
    for name in m.variable_names() {
        write!(out, "{sep}{name}")?;
    }
    writeln!(out)?;
    for (i, id) in m.sample_ids().iter().enumerate() {
        write!(out, "{id}")?;
        for j in 0..m.ncols() {
            write!(out, "{sep}{}", format_number(m.values[(i, j)]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Formats a float with 17 significant digits, trailing zeros removed
/// (the C `%.17g` conversion). Every finite value round-trips exactly.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
