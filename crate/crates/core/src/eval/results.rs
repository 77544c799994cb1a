//! Results and temporal-series CSV files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::EvalReport;
use crate::{Error, Result};

pub const RESULTS_HEADER: &str = "dataset,method,seed,samples,accuracy,drifts,wall_time_s";
pub const TEMPORAL_HEADER: &str = "index,accuracy,lambda,active,reserve";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub samples: u64,
    /// Fraction in [0, 1].
    pub accuracy: f64,
    pub drifts: u64,
    pub wall_time_s: f64,
}

/// `out/r.csv` -> `out/r_temporal.csv`.
pub fn temporal_path(results: &Path) -> PathBuf {
    let stem = results
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    results.with_file_name(format!("{stem}_temporal.csv"))
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_results_to<W: Write>(mut out: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{},{:.3}",
            quote(&r.dataset),
            quote(&r.method),
            r.seed,
            r.samples,
            r.accuracy,
            r.drifts,
            r.wall_time_s
        )?;
    }
    out.flush()
}

pub fn write_temporal_to<W: Write>(mut out: W, report: &EvalReport) -> std::io::Result<()> {
    writeln!(out, "{TEMPORAL_HEADER}")?;
    for p in &report.temporal {
        let lambda = p.lambda.map(|l| format!("{l:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{:.6},{},{},{}",
            p.index, p.accuracy, lambda, p.active, p.reserve
        )?;
    }
    out.flush()
}

/// Writes the results file and, when `report` is given, its temporal sibling.
pub fn write_results(path: &Path, rows: &[ResultRow], report: Option<&EvalReport>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_to(BufWriter::new(file), rows).map_err(|e| Error::io(path, e))?;
    if let Some(report) = report {
        let tpath = temporal_path(path);
        let file = File::create(&tpath).map_err(|e| Error::io(&tpath, e))?;
        write_temporal_to(BufWriter::new(file), report).map_err(|e| Error::io(&tpath, e))?;
    }
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_results_from(file)
}

/// Parses a results CSV. Accuracy may be a fraction or a percentage;
/// values above 1 are divided by 100.
pub fn read_results_from<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(::csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse { line, message };
        if !saw_header {
            let got: Vec<&str> = record.iter().collect();
            let want: Vec<&str> = RESULTS_HEADER.split(',').collect();
            if got != want {
                return Err(err(format!("expected header {RESULTS_HEADER:?}")));
            }
            saw_header = true;
            continue;
        }
        if record.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", record.len())));
        }
        let field = |i: usize| &record[i];
        let int = |i: usize, name: &str| {
            field(i)
                .parse::<u64>()
                .map_err(|_| err(format!("{name}: not an integer: {:?}", field(i))))
        };
        let real = |i: usize, name: &str| {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| err(format!("{name}: not a non-negative number: {:?}", field(i))))
        };
        let mut accuracy = real(4, "accuracy")?;
        if accuracy > 1.0 {
            accuracy /= 100.0;
        }
        if accuracy > 1.0 {
            return Err(err(format!("accuracy out of range: {:?}", field(4))));
        }
        if field(0).is_empty() || field(1).is_empty() {
            return Err(err("empty dataset or method".into()));
        }
        rows.push(ResultRow {
            dataset: field(0).to_string(),
            method: field(1).to_string(),
            seed: int(2, "seed")?,
            samples: int(3, "samples")?,
            accuracy,
            drifts: int(5, "drifts")?,
            wall_time_s: real(6, "wall_time_s")?,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "empty results file".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dataset: &str, acc: f64) -> ResultRow {
        ResultRow {
            dataset: dataset.into(),
            method: "DynED".into(),
            seed: 1,
            samples: 1_000,
            accuracy: acc,
            drifts: 2,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn write_then_read() {
        let rows = vec![row("sea-abrupt-012", 0.912345), row("a,b", 0.5)];
        let mut buf = Vec::new();
        write_results_to(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dataset,method,seed,samples,accuracy,drifts,wall_time_s\n"));
        assert!(text.contains("sea-abrupt-012,DynED,1,1000,0.912345,2,0.000\n"));
        assert_eq!(read_results_from(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn percentages_are_scaled() {
        let text = format!("{RESULTS_HEADER}\nelec,KUE,0,0,88.5,0,0\n");
        let rows = read_results_from(text.as_bytes()).unwrap();
        assert!((rows[0].accuracy - 0.885).abs() < 1e-12);
    }

    #[test]
    fn errors_name_the_line() {
        assert!(matches!(read_results_from("a,b\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(read_results_from("".as_bytes()).is_err());
        let text = format!("{RESULTS_HEADER}\nx,y,1,1,0.5,0,0\nx,y,one,1,0.5,0,0\n");
        assert!(matches!(read_results_from(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let text = format!("{RESULTS_HEADER}\nx,y,1,1,0.5\n");
        assert!(matches!(read_results_from(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let text = format!("{RESULTS_HEADER}\nx,y,1,1,250,0,0\n");
        assert!(read_results_from(text.as_bytes()).is_err());
    }

    #[test]
    fn temporal_sibling() {
        assert_eq!(temporal_path(Path::new("out/r.csv")), PathBuf::from("out/r_temporal.csv"));
        let report = EvalReport {
            temporal: vec![super::super::TemporalPoint {
                index: 1_250,
                accuracy: 0.5,
                lambda: Some(0.6),
                active: 5,
                reserve: 3,
            }],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_temporal_to(&mut buf, &report).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,accuracy,lambda,active,reserve\n1250,0.500000,0.600000,5,3\n"
        );
    }
}
