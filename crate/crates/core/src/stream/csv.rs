//! CSV dataset ingestion. The whole file is parsed up front so malformed
//! rows surface as errors before any instance is emitted.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{Instance, StreamSchema, StreamSource};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    /// Column name; requires a header line.
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub schema_hint: Option<StreamSchema>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            has_header: false,
            schema_hint: None,
        }
    }
}

pub struct CsvSource {
    schema: StreamSchema,
    instances: Vec<Instance>,
    class_names: Vec<String>,
    position: usize,
}

impl CsvSource {
    /// Original label strings, indexed by class id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

impl StreamSource for CsvSource {
    fn schema(&self) -> StreamSchema {
        self.schema
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let inst = self.instances.get(self.position)?.clone();
        self.position += 1;
        Some(inst)
    }
}

pub fn csv_open(path: impl AsRef<Path>, options: &CsvOptions) -> Result<CsvSource> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv_from_reader(file, options)
}

pub fn csv_from_reader<R: Read>(reader: R, options: &CsvOptions) -> Result<CsvSource> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut label_index: Option<usize> = None;
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut instances = Vec::new();
    let mut header_pending = options.has_header;
    let mut record = ::csv::StringRecord::new();

    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        if header_pending {
            header_pending = false;
            width = Some(record.len());
            label_index = Some(resolve_label(&options.label_column, Some(&record), record.len())?);
            continue;
        }

        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                line,
                message: format!("expected {w} columns, found {}", record.len()),
            });
        }
        if w < 2 {
            return Err(Error::Parse {
                line,
                message: "need at least one feature column and a label column".into(),
            });
        }
        let label_at = match label_index {
            Some(i) => i,
            None => *label_index.insert(resolve_label(&options.label_column, None, w)?),
        };
        if label_at >= w {
            return Err(Error::config(format!(
                "label column {label_at} out of range for {w} columns"
            )));
        }

        let mut features = Vec::with_capacity(w - 1);
        let mut label = 0;
        for (col, field) in record.iter().enumerate() {
            if col == label_at {
                let next = class_ids.len();
                label = *class_ids.entry(field.to_string()).or_insert_with(|| {
                    class_names.push(field.to_string());
                    next
                });
            } else {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {col}: non-numeric feature {field:?}"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("column {col}: non-finite feature {field:?}"),
                    });
                }
                features.push(value);
            }
        }
        instances.push(Instance::new(features, label));
    }

    let observed_features = width.map(|w| w.saturating_sub(1));
    let schema = match options.schema_hint {
        Some(hint) => {
            if let Some(n) = observed_features {
                if !instances.is_empty() && n != hint.n_features() {
                    return Err(Error::config(format!(
                        "schema hint expects {} features, file has {n}",
                        hint.n_features()
                    )));
                }
            }
            if class_names.len() > hint.n_classes() {
                return Err(Error::config(format!(
                    "schema hint allows {} classes, file has {}",
                    hint.n_classes(),
                    class_names.len()
                )));
            }
            hint
        }
        None => StreamSchema::new(
            observed_features.filter(|&n| n > 0).unwrap_or(1),
            class_names.len().max(2),
        )?,
    };

    Ok(CsvSource {
        schema,
        instances,
        class_names,
        position: 0,
    })
}

fn resolve_label(
    column: &LabelColumn,
    header: Option<&::csv::StringRecord>,
    width: usize,
) -> Result<usize> {
    match column {
        LabelColumn::Index(i) => Ok(*i),
        LabelColumn::Last => Ok(width.saturating_sub(1)),
        LabelColumn::Name(name) => {
            let header = header.ok_or_else(|| {
                Error::config(format!("label column {name:?} given by name but file has no header"))
            })?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::config(format!("unknown label column {name:?}")))
        }
    }
}
