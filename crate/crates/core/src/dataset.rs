//! Numeric matrices from delimited text, plus the bundled reference datasets.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// An `n x d` table of finite reals, rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
    column_names: Option<Vec<String>>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn from_row_major(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoRows);
        }
        if d == 0 {
            return Err(Error::NoNumericColumns);
        }
        if values.len() != n * d {
            return Err(Error::invalid(
                "values",
                format!("expected {} values for {n}x{d}, got {}", n * d, values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DataMatrix {
            values,
            n,
            d,
            column_names: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::invalid(
                    "rows",
                    format!("row {i} has {} columns, expected {d}", row.len()),
                ));
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(values, n, d)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::invalid(
                "column_names",
                format!("{} names for {} columns", names.len(), self.d),
            ));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }

    /// Writes the matrix as delimited text with a header row.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so `load` of the output reproduces the matrix exactly.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = String::new();
        let names: Vec<String> = match &self.column_names {
            Some(names) => names.clone(),
            None => (1..=self.d).map(|j| format!("V{j}")).collect(),
        };
        let sep = delimiter.to_string();
        out.push_str(&names.join(&sep));
        out.push('\n');
        for row in self.rows() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(delimiter);
                }
                write!(out, "{v}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonNumericPolicy {
    #[default]
    DropColumn,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub delimiter: char,
    /// `None` auto-detects a header row.
    pub has_header: Option<bool>,
    pub non_numeric_policy: NonNumericPolicy,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: ',',
            has_header: None,
            non_numeric_policy: NonNumericPolicy::DropColumn,
        }
    }
}

impl IngestOptions {
    fn delimiter_byte(&self) -> Result<u8> {
        let c = self.delimiter;
        if c.is_ascii() && (c.is_ascii_graphic() || c == ' ' || c == '\t') {
            Ok(c as u8)
        } else {
            Err(Error::InvalidDelimiter(c))
        }
    }
}

/// A loaded matrix together with the names of the columns that were dropped.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub matrix: DataMatrix,
    pub dropped_columns: Vec<String>,
}

pub fn load_matrix(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<DataMatrix> {
    ingest_file(path, opts).map(|i| i.matrix)
}

pub fn ingest_file(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    ingest_reader(BufReader::new(file), opts)
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "na" | "N/A" | "null" | "NULL" | "?")
}

fn parse_number(field: &str) -> Option<f64> {
    // Rust accepts "inf"/"NaN"; treat those as text, not numbers.
    let v: f64 = field.parse().ok()?;
    v.is_finite().then_some(v)
}

fn looks_non_finite(field: &str) -> bool {
    field.parse::<f64>().is_ok_and(|v| !v.is_finite())
}

/// Parses delimited text into a numeric matrix.
pub fn ingest_reader<R: Read>(reader: R, opts: &IngestOptions) -> Result<Ingested> {
    let delimiter = opts.delimiter_byte()?;
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(i + 1, |p| p.line() as usize),
            column: "-".into(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if records.is_empty() {
        return Err(Error::NoRows);
    }

    let has_header = opts
        .has_header
        .unwrap_or_else(|| detect_header(&records));
    let (header, body) = if has_header {
        let (first, rest) = records.split_first().expect("non-empty");
        (Some(first.1.clone()), rest)
    } else {
        (None, &records[..])
    };
    if body.is_empty() {
        return Err(Error::NoRows);
    }

    let width = header
        .as_ref()
        .map_or_else(|| body[0].1.len(), Vec::len);
    for (line, fields) in body {
        if fields.len() != width {
            return Err(Error::Parse {
                row: *line,
                column: "-".into(),
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
    }
    let names: Vec<String> = match header {
        Some(h) => h,
        None => (1..=width).map(|j| format!("V{j}")).collect(),
    };

    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let mut numeric = true;
        let mut any_value = false;
        for (line, fields) in body {
            let f = fields[j].as_str();
            if is_missing(f) {
                continue;
            }
            if looks_non_finite(f) {
                return Err(Error::Parse {
                    row: *line,
                    column: name.clone(),
                    message: format!("non-finite value `{f}`"),
                });
            }
            if parse_number(f).is_none() {
                numeric = false;
                break;
            }
            any_value = true;
        }
        if numeric && any_value {
            keep.push(j);
        } else {
            match opts.non_numeric_policy {
                NonNumericPolicy::Error => return Err(Error::NonNumericColumn(name.clone())),
                NonNumericPolicy::DropColumn => dropped.push(name.clone()),
            }
        }
    }
    if keep.is_empty() {
        return Err(Error::NoNumericColumns);
    }

    let mut values = Vec::with_capacity(body.len() * keep.len());
    for (line, fields) in body {
        for &j in &keep {
            let f = fields[j].as_str();
            if is_missing(f) {
                return Err(Error::MissingValue {
                    row: *line,
                    column: names[j].clone(),
                });
            }
            values.push(parse_number(f).expect("column classified numeric"));
        }
    }
    let matrix = DataMatrix::from_row_major(values, body.len(), keep.len())?
        .with_column_names(keep.iter().map(|&j| names[j].clone()).collect())?;
    Ok(Ingested {
        matrix,
        dropped_columns: dropped,
    })
}

// A first row is a header when some field is text while the data below it
// in that column is numeric, or when it is the only row and has text.
fn detect_header(records: &[(usize, Vec<String>)]) -> bool {
    let first = &records[0].1;
    let textual = |f: &str| !is_missing(f) && parse_number(f).is_none();
    if !first.iter().any(|f| textual(f)) {
        return false;
    }
    match records.get(1) {
        None => true,
        Some((_, second)) => first.iter().enumerate().any(|(j, f)| {
            textual(f)
                && second
                    .get(j)
                    .is_some_and(|s| !is_missing(s) && parse_number(s).is_some())
        }) || first.iter().all(|f| textual(f)),
    }
}

/// Shape metadata of a bundled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundledInfo {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    pub description: &'static str,
}

/// The nine real datasets, in table order.
pub const BUNDLED: [BundledInfo; 9] = [
    BundledInfo { name: "iris", n: 150, d: 4, description: "sepal and petal measurements of three iris species" },
    BundledInfo { name: "swiss", n: 47, d: 6, description: "fertility and socio-economic indicators, Swiss provinces c. 1888" },
    BundledInfo { name: "faithful", n: 272, d: 2, description: "Old Faithful eruption duration and waiting time" },
    BundledInfo { name: "rivers", n: 141, d: 1, description: "lengths (miles) of major North American rivers" },
    BundledInfo { name: "trees", n: 31, d: 3, description: "girth, height and volume of black cherry trees" },
    BundledInfo { name: "USJudgeRatings", n: 43, d: 12, description: "lawyers' ratings of US superior court judges" },
    BundledInfo { name: "USArrests", n: 50, d: 4, description: "violent crime rates by US state, 1973" },
    BundledInfo { name: "attitude", n: 30, d: 7, description: "clerical employee survey, aggregated by department" },
    BundledInfo { name: "cars", n: 50, d: 2, description: "speed and stopping distance of cars, 1920s" },
];

fn bundled_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "iris" => include_str!("../data/iris.csv"),
        "swiss" => include_str!("../data/swiss.csv"),
        "faithful" => include_str!("../data/faithful.csv"),
        "rivers" => include_str!("../data/rivers.csv"),
        "trees" => include_str!("../data/trees.csv"),
        "USJudgeRatings" => include_str!("../data/USJudgeRatings.csv"),
        "USArrests" => include_str!("../data/USArrests.csv"),
        "attitude" => include_str!("../data/attitude.csv"),
        "cars" => include_str!("../data/cars.csv"),
        _ => return None,
    })
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|b| b.name)
}

/// Loads one of the bundled datasets by its exact (case-sensitive) name.
pub fn bundled_dataset(name: &str) -> Result<DataMatrix> {
    let text = bundled_text(name).ok_or_else(|| Error::UnknownDataset {
        name: name.to_owned(),
        valid: bundled_names().map(str::to_owned).collect(),
    })?;
    let opts = IngestOptions {
        has_header: Some(true),
        ..IngestOptions::default()
    };
    ingest_reader(text.as_bytes(), &opts).map(|i| i.matrix)
}
