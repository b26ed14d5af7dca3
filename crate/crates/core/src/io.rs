//! CSV ingestion and export.
//!
//! Signals are stored one channel per column with an optional header row.
//! Datasets always carry a header: the feature names followed by `label`.
//! Reals are written in their shortest round-trip form, which never needs
//! more than 17 significant digits and parses back to the identical `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::signal::{LabeledDataset, MultiChannelRecord, Signal};

/// Which column of a signal CSV to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(0)
    }
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    /// All-digit strings select by zero-based index, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

/// Shortest decimal representation that parses back to exactly `x`.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish(path: &Path, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    write_atomic(path, &bytes)
}

/// Raw table: optional header plus string cells with their 1-based line numbers.
struct Table {
    header: Option<Vec<String>>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path, mode: HeaderMode) -> Result<Table> {
    let mut rows = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        rows.push((line, rec.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let has_header = match mode {
        HeaderMode::Required => true,
        HeaderMode::Detect => rows
            .first()
            .is_some_and(|(_, r)| r.iter().any(|c| c.parse::<f64>().is_err())),
    };
    let header = if has_header && !rows.is_empty() {
        Some(rows.remove(0).1)
    } else {
        None
    };
    if header.is_none() && matches!(mode, HeaderMode::Required) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "missing header row".into(),
        });
    }
    Ok(Table { header, rows })
}

#[derive(Clone, Copy)]
enum HeaderMode {
    Detect,
    Required,
}

fn resolve_column(path: &Path, table: &Table, column: &ColumnSelector) -> Result<(usize, String)> {
    match column {
        ColumnSelector::Index(i) => {
            let name = table
                .header
                .as_ref()
                .and_then(|h| h.get(*i).cloned())
                .unwrap_or_else(|| i.to_string());
            Ok((*i, name))
        }
        ColumnSelector::Name(n) => {
            let header = table.header.as_ref().ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("column {n:?} requested but the file has no header"),
            })?;
            let i = header.iter().position(|h| h == n).ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("no column named {n:?}"),
            })?;
            Ok((i, n.clone()))
        }
    }
}

fn parse_column(path: &Path, table: &Table, idx: usize, name: &str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let cell = row.get(idx).ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!("row {line} has no column {name}"),
        })?;
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row: *line,
            column: name.to_string(),
            value: cell.clone(),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("column {name} is empty"),
        });
    }
    Ok(out)
}

/// Reads one column of a signal CSV. Row numbers in errors are 1-based file lines.
pub fn read_signal_csv(path: &Path, column: &ColumnSelector, sample_rate_hz: f64) -> Result<Signal> {
    let table = read_table(path, HeaderMode::Detect)?;
    let (idx, name) = resolve_column(path, &table, column)?;
    let samples = parse_column(path, &table, idx, &name)?;
    Signal::new(samples, sample_rate_hz).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads every column of a CSV as one channel of a record.
pub fn read_record_csv(path: &Path, sample_rate_hz: f64) -> Result<MultiChannelRecord> {
    let table = read_table(path, HeaderMode::Detect)?;
    let width = table
        .header
        .as_ref()
        .map(Vec::len)
        .or_else(|| table.rows.first().map(|(_, r)| r.len()))
        .unwrap_or(0);
    let mut channels = Vec::with_capacity(width);
    let mut names = Vec::with_capacity(width);
    for i in 0..width {
        let (idx, name) = resolve_column(path, &table, &ColumnSelector::Index(i))?;
        channels.push(Signal::new(parse_column(path, &table, idx, &name)?, sample_rate_hz)?);
        names.push(name);
    }
    MultiChannelRecord::new(channels, names, Default::default())
}

/// Writes a single-channel signal; `header` adds a named header row.
pub fn write_signal_csv(signal: &Signal, path: &Path, header: Option<&str>) -> Result<()> {
    let mut w = csv_writer();
    let err = |e| Error::csv(path, e);
    if let Some(h) = header {
        w.write_record([h]).map_err(err)?;
    }
    for &x in signal.samples() {
        w.write_record([fmt_real(x)]).map_err(err)?;
    }
    finish(path, w)
}

/// Header is `feature_names..., label`; labels are written as class names.
pub fn write_dataset_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    let mut w = csv_writer();
    let err = |e| Error::csv(path, e);
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push("label");
    w.write_record(&header).map_err(err)?;
    for (row, &label) in dataset.features().iter().zip(dataset.labels()) {
        let mut rec: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        rec.push(dataset.class_names()[label].clone());
        w.write_record(&rec).map_err(err)?;
    }
    finish(path, w)
}

/// Reads a dataset written by [`write_dataset_csv`]. Class indices follow the
/// order in which class names first appear; pass `class_order` to pin it.
pub fn read_dataset_csv(path: &Path, class_order: Option<&[String]>) -> Result<LabeledDataset> {
    let table = read_table(path, HeaderMode::Required)?;
    let header = table.header.clone().unwrap_or_default();
    if header.last().map(String::as_str) != Some("label") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "last header column must be \"label\"".into(),
        });
    }
    let dim = header.len() - 1;
    let mut class_names: Vec<String> = class_order.map(<[String]>::to_vec).unwrap_or_default();
    let mut features = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        if row.len() != dim + 1 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("row {line} has {} cells, expected {}", row.len(), dim + 1),
            });
        }
        let mut values = Vec::with_capacity(dim);
        for (j, cell) in row[..dim].iter().enumerate() {
            values.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: *line,
                column: header[j].clone(),
                value: cell.clone(),
            })?);
        }
        let name = &row[dim];
        let label = match class_names.iter().position(|c| c == name) {
            Some(i) => i,
            None if class_order.is_some() => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    message: format!("row {line}: unknown class {name:?}"),
                })
            }
            None => {
                class_names.push(name.clone());
                class_names.len() - 1
            }
        };
        features.push(values);
        labels.push(label);
    }
    LabeledDataset::new(features, labels, class_names, header[..dim].to_vec()).map_err(|e| {
        Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    })
}
