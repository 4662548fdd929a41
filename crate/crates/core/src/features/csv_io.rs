use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Label;

use super::{column_names, ExtractedRecord, FEATURE_COUNT};

/// Writes the `f01..f43,label` CSV (label `-1` when unknown). Values use
/// the shortest decimal form that reads back to the same `f64`.
pub fn write_feature_csv<I>(records: I, path: &Path) -> Result<usize>
where
    I: IntoIterator<Item = Result<ExtractedRecord>>,
{
    let mut out = BufWriter::new(File::create(path)?);
    let n = write_feature_rows(records, &mut out)?;
    out.flush()?;
    Ok(n)
}

pub(crate) fn write_feature_rows<I, W>(records: I, out: &mut W) -> Result<usize>
where
    I: IntoIterator<Item = Result<ExtractedRecord>>,
    W: Write,
{
    let mut header = column_names().join(",");
    header.push_str(",label\n");
    out.write_all(header.as_bytes())?;
    let mut rows = 0;
    let mut line = String::new();
    for rec in records {
        let rec = rec?;
        if rec.features.len() != FEATURE_COUNT {
            return Err(Error::DimensionMismatch { expected: FEATURE_COUNT, got: rec.features.len() });
        }
        line.clear();
        for v in &rec.features {
            use std::fmt::Write as _;
            let _ = write!(line, "{v},");
        }
        line.push_str(match rec.label {
            None => "-1",
            Some(Label::Normal) => "0",
            Some(Label::Attack) => "1",
        });
        line.push('\n');
        out.write_all(line.as_bytes())?;
        rows += 1;
    }
    Ok(rows)
}

/// Rows of a feature CSV plus its column names (label column excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub records: Vec<ExtractedRecord>,
}

/// Reads any CSV whose last column is `label` (`-1`, `0` or `1`) and whose
/// other columns are numeric features.
pub fn read_feature_csv(path: &Path) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path)?;
    let headers = rdr.headers()?.clone();
    let Some((last, cols)) = headers.iter().collect::<Vec<_>>().split_last().map(|(l, c)| (l.to_string(), c.to_vec()))
    else {
        return Err(Error::FeatureCsv("empty header".into()));
    };
    if last != "label" || cols.is_empty() {
        return Err(Error::FeatureCsv("expected feature columns followed by a `label` column".into()));
    }
    let columns: Vec<String> = cols.iter().map(|s| s.to_string()).collect();
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let mut features = Vec::with_capacity(columns.len());
        for v in row.iter().take(columns.len()) {
            let x: f64 = v.parse().map_err(|_| Error::FeatureCsv(format!("line {line}: bad value {v:?}")))?;
            if !x.is_finite() {
                return Err(Error::FeatureCsv(format!("line {line}: non-finite value")));
            }
            features.push(x);
        }
        let label = match &row[columns.len()] {
            "-1" => None,
            s => Some(
                s.parse::<i64>()
                    .map_err(|_| Error::FeatureCsv(format!("line {line}: bad label {s:?}")))
                    .and_then(Label::from_external)?,
            ),
        };
        records.push(ExtractedRecord::new(features, label));
    }
    Ok(FeatureTable { columns, records })
}
