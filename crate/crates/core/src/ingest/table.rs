use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt_f64;

/// Minimum number of timepoints accepted at ingestion.
pub const MIN_TIMEPOINTS: usize = 3;

/// Supported on-disk formats for time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
}

/// Multi-channel time series of one subject: `T` timepoints by `n` named channels.
///
/// Samples are stored row-major (one row per timepoint). Construction
/// validates that names are unique, the shape is consistent and every value
/// is finite; tables are immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    subject_id: String,
    group_label: Option<String>,
    channel_names: Vec<String>,
    samples: Vec<f64>,
    timepoints: usize,
}

impl TimeSeriesTable {
    pub fn new(
        subject_id: impl Into<String>,
        channel_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        let n = channel_names.len();
        if n == 0 {
            return Err(Error::Schema(format!("{subject_id}: table has no channels")));
        }
        let mut seen = HashSet::with_capacity(n);
        for name in &channel_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("{subject_id}: duplicate channel name {name:?}")));
            }
        }
        if rows.len() < MIN_TIMEPOINTS {
            return Err(Error::InsufficientData(format!(
                "{subject_id}: {} timepoints, need at least {MIN_TIMEPOINTS}",
                rows.len()
            )));
        }
        let mut samples = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Schema(format!(
                    "{subject_id}: row {} has {} values, header has {n}",
                    r + 1,
                    row.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{subject_id}: non-finite value at row {}, channel {:?}",
                    r + 1,
                    channel_names[c]
                )));
            }
            samples.extend_from_slice(row);
        }
        Ok(Self {
            subject_id,
            group_label: None,
            channel_names,
            samples,
            timepoints: rows.len(),
        })
    }

    pub fn with_group(mut self, label: impl Into<String>) -> Self {
        self.group_label = Some(label.into());
        self
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn group_label(&self) -> Option<&str> {
        self.group_label.as_deref()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn timepoints(&self) -> usize {
        self.timepoints
    }

    pub fn channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn value(&self, t: usize, channel: usize) -> f64 {
        self.samples[t * self.channels() + channel]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.channels();
        &self.samples[t * n..(t + 1) * n]
    }

    pub fn column(&self, channel: usize) -> Vec<f64> {
        (0..self.timepoints).map(|t| self.value(t, channel)).collect()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|c| c == name)
    }

    /// New table holding the named channels, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.channel_index(n).ok_or_else(|| {
                    Error::Schema(format!("{}: no channel named {n:?}", self.subject_id))
                })
            })
            .collect::<Result<_>>()?;
        let rows = (0..self.timepoints)
            .map(|t| idx.iter().map(|&c| self.value(t, c)).collect())
            .collect();
        let mut out = Self::new(self.subject_id.clone(), names.to_vec(), rows)?;
        out.group_label = self.group_label.clone();
        Ok(out)
    }

    /// Serialize to the time-series CSV layout (header + one row per timepoint).
    pub fn to_csv_string(&self) -> String {
        let mut out = self.channel_names.join(",");
        out.push('\n');
        for t in 0..self.timepoints {
            let row: Vec<String> = self.row(t).iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Load one subject's time series. The subject id is the file stem.
pub fn load_timeseries(path: &Path, format: TableFormat) -> Result<TimeSeriesTable> {
    match format {
        TableFormat::Csv => load_csv(path),
    }
}

fn load_csv(path: &Path) -> Result<TimeSeriesTable> {
    let subject_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&subject_id, &text, path)
}

pub(crate) fn parse_csv(subject_id: &str, text: &str, path: &Path) -> Result<TimeSeriesTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::format(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        let mut row = Vec::with_capacity(record.len());
        for (c, cell) in record.iter().enumerate() {
            let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            match parsed {
                Some(v) => row.push(v),
                None => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        row: r + 2,
                        column: header.get(c).cloned().unwrap_or_else(|| format!("#{}", c + 1)),
                        value: cell.to_owned(),
                    })
                }
            }
        }
        rows.push(row);
    }
    TimeSeriesTable::new(subject_id, header, rows).map_err(|e| match e {
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Zero-mean, unit-variance copy of a signal. Constant signals are only centered.
pub fn zscore(signal: &[f64]) -> Vec<f64> {
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let var = signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        signal.iter().map(|v| (v - mean) / sd).collect()
    } else {
        signal.iter().map(|v| v - mean).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str) -> Result<TimeSeriesTable> {
        parse_csv("s", text, &PathBuf::from("s.csv"))
    }

    #[test]
    fn parses_small_table() {
        let t = parse("a,b\n1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(t.timepoints(), 3);
        assert_eq!(t.channels(), 2);
        assert_eq!(t.column(1), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn accepts_scientific_notation() {
        let t = parse("a\n1e-3\n2.5E2\n-3\n").unwrap();
        assert_eq!(t.column(0), vec![1e-3, 250.0, -3.0]);
    }

    #[test]
    fn nan_cell_is_a_parse_error() {
        let err = parse("a,b\n1,2\n3,NaN\n5,6\n").unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn garbage_cell_is_a_parse_error() {
        assert!(matches!(parse("a\n1\nx\n3\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicate_header_is_schema_error() {
        assert!(matches!(parse("a,a\n1,2\n3,4\n5,6\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(parse("a\n1\n2\n"), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn select_preserves_requested_order() {
        let t = parse("a,b,c\n1,2,3\n4,5,6\n7,8,9\n").unwrap();
        let s = t.select(&["c".into(), "a".into()]).unwrap();
        assert_eq!(s.channel_names(), &["c".to_string(), "a".to_string()]);
        assert_eq!(s.row(1), &[6.0, 4.0]);
    }

    #[test]
    fn zscore_has_zero_mean_unit_variance() {
        let z = zscore(&[1.0, 2.0, 3.0, 4.0]);
        let mean: f64 = z.iter().sum::<f64>() / 4.0;
        let var: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }
}
