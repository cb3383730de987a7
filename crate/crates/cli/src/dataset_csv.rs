//! Dataset CSV files.
//!
//! ```text
//! # generator=two_class_usage seed=42 kind=classification
//! x0,x1,target
//! 0.0132,0.0871,0
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so save/load is
//! lossless. Lines end in LF. Classification targets are `0` or `1`.

use std::fs;
use std::io::Write;
use std::path::Path;

use eqnn::data::{Dataset, DatasetKind, Provenance, Sample, Target};

use crate::write_atomic;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid dataset: {0}")]
    Invalid(#[from] eqnn::Error),
}

fn parse_err(line: u64, message: impl Into<String>) -> CsvError {
    CsvError::Parse {
        line,
        message: message.into(),
    }
}

pub fn to_csv_string(dataset: &Dataset) -> String {
    let mut out = Vec::new();
    let p = dataset.provenance();
    writeln!(
        out,
        "# generator={} seed={} kind={}",
        p.generator,
        p.seed,
        dataset.kind().as_str()
    )
    .unwrap();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<String> = (0..dataset.n_features()).map(|i| format!("x{i}")).collect();
    header.push("target".into());
    w.write_record(&header).unwrap();
    for s in dataset.samples() {
        let mut row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
        row.push(match s.target {
            Target::Value(y) => y.to_string(),
            Target::Label(l) => l.to_string(),
        });
        w.write_record(&row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<(), CsvError> {
    write_atomic(path, to_csv_string(dataset).as_bytes()).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_csv(path: &Path) -> Result<Dataset, CsvError> {
    let text = fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text)
}

fn parse_provenance(line: &str) -> Result<(Provenance, DatasetKind), CsvError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "expected a '# generator=… seed=… kind=…' header"))?;
    let (mut generator, mut seed, mut kind) = (None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("header field '{field}' is not key=value")))?;
        match key {
            "generator" => generator = Some(value.to_string()),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| parse_err(1, format!("bad seed '{value}': {e}")))?,
                )
            }
            "kind" => {
                kind = Some(
                    DatasetKind::parse(value)
                        .ok_or_else(|| parse_err(1, format!("unknown kind '{value}'")))?,
                )
            }
            _ => return Err(parse_err(1, format!("unknown header field '{key}'"))),
        }
    }
    match (generator, seed, kind) {
        (Some(generator), Some(seed), Some(kind)) => Ok((Provenance { generator, seed }, kind)),
        _ => Err(parse_err(1, "header must set generator, seed and kind")),
    }
}

pub fn parse_csv(text: &str) -> Result<Dataset, CsvError> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let (provenance, kind) = parse_provenance(first.trim_end_matches('\r'))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(rest.as_bytes());
    let columns = reader
        .headers()
        .map_err(|e| parse_err(2, e.to_string()))?
        .len();
    if columns < 2 {
        return Err(parse_err(2, "need at least one feature column and a target column"));
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() + 1);
            parse_err(line, e.to_string())
        })?;
        // +1 for the provenance line stripped above
        let line = record.position().map_or(0, |p| p.line() + 1);
        if record.len() != columns {
            return Err(parse_err(
                line,
                format!("expected {columns} columns, found {}", record.len()),
            ));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("bad number '{s}': {e}")))
        };
        let features = record
            .iter()
            .take(columns - 1)
            .map(num)
            .collect::<Result<Vec<_>, _>>()?;
        let raw = record.get(columns - 1).unwrap_or_default().trim();
        let target = match kind {
            DatasetKind::Regression => Target::Value(num(raw)?),
            DatasetKind::Classification => match raw {
                "0" => Target::Label(0),
                "1" => Target::Label(1),
                _ => return Err(parse_err(line, format!("class label must be 0 or 1, got '{raw}'"))),
            },
        };
        samples.push(Sample { features, target });
    }
    Ok(Dataset::new(kind, samples, provenance)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use eqnn::data::{gen_sigmoid, gen_two_class_usage};

    #[test]
    fn header_records_provenance() {
        let d = gen_two_class_usage(3, 42).unwrap();
        let text = to_csv_string(&d);
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("# generator=two_class_usage seed=42 kind=classification")
        );
        assert_eq!(lines.next(), Some("x0,x1,target"));
        assert!(!text.contains('\r'));
        assert_eq!(parse_csv(&text).unwrap(), d);
    }

    #[test]
    fn regression_round_trip_is_lossless() {
        let d = gen_sigmoid(50, 3).unwrap();
        assert_eq!(parse_csv(&to_csv_string(&d)).unwrap(), d);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let text = "# generator=manual seed=0 kind=regression\nx0,target\n0.1,0.1\n0.2\n";
        match parse_csv(text) {
            Err(CsvError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_are_reported() {
        let bad_num = "# generator=manual seed=0 kind=regression\nx0,target\nabc,0.1\n";
        assert!(matches!(parse_csv(bad_num), Err(CsvError::Parse { line: 3, .. })));
        let bad_label = "# generator=manual seed=0 kind=classification\nx0,target\n0.5,2\n";
        assert!(matches!(parse_csv(bad_label), Err(CsvError::Parse { line: 3, .. })));
        assert!(matches!(parse_csv("x0,target\n1,1\n"), Err(CsvError::Parse { line: 1, .. })));
        let no_kind = "# generator=manual seed=0\nx0,target\n";
        assert!(matches!(parse_csv(no_kind), Err(CsvError::Parse { line: 1, .. })));
    }
}
