//! Experiment configuration: `key = value` files and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::diversity::MeasureKind;
use crate::ensemble::HyperParams;
use crate::stream::LabelColumn;
use crate::{Error, Result};

pub const DEFAULT_WARMUP: usize = 250;
pub const DEFAULT_REPORT_INTERVAL: usize = 1_000;
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// Every key accepted in a config file; the same names are CLI flags.
pub const CONFIG_KEYS: &[&str] = &[
    "generator",
    "dataset",
    "label-column",
    "header",
    "samples",
    "seed",
    "out",
    "method",
    "measure",
    "warmup",
    "report-interval",
    "no-timing",
    "theta",
    "lambda",
    "delta-lambda",
    "win-size",
    "init-c",
    "init-s",
    "pool-size",
    "add-size",
    "cls-size",
    "slc-size",
    "error-size",
    "grace-period",
    "split-confidence",
    "tie-threshold",
    "max-depth",
    "adwin-delta",
];

/// Ordered `key -> value` settings. Later insertions override earlier ones.
pub type Settings = BTreeMap<String, String>;

/// Parses a line-oriented `key = value` file. Blank lines and lines
/// starting with `#` are skipped; a bare `key` means `key = true`.
pub fn parse_config(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, "true"),
        };
        if key.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "missing key".into(),
            });
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key {key:?}"),
            });
        }
        out.insert(key.to_string(), value.to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Generator {
        name: String,
        samples: u64,
    },
    Csv {
        path: PathBuf,
        label_column: LabelColumn,
        header: bool,
    },
}

impl DatasetSpec {
    /// Name written to the `dataset` column of result files.
    pub fn label(&self) -> String {
        match self {
            DatasetSpec::Generator { name, .. } => name.clone(),
            DatasetSpec::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    DynEd,
    /// A single Hoeffding tree under the same protocol.
    HoeffdingTree,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dyned" => Ok(Method::DynEd),
            "ht" | "hoeffding-tree" => Ok(Method::HoeffdingTree),
            _ => Err(Error::config(format!("unknown method {s:?} (expected dyned or ht)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DynEd => "dyned",
            Method::HoeffdingTree => "ht",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub seed: u64,
    pub method: Method,
    pub params: HyperParams,
    pub warmup: usize,
    pub report_interval: usize,
    pub output: Option<PathBuf>,
    /// When false the `wall_time_s` column is written as zero so result
    /// files are byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn for_generator(name: &str, samples: u64, seed: u64) -> Self {
        Self {
            dataset: DatasetSpec::Generator {
                name: name.to_string(),
                samples,
            },
            seed,
            method: Method::DynEd,
            params: HyperParams::default(),
            warmup: DEFAULT_WARMUP,
            report_interval: DEFAULT_REPORT_INTERVAL,
            output: None,
            record_timing: true,
        }
    }

    /// Method column value, e.g. `DynED`, `DynED-CP` or `HT`.
    pub fn method_label(&self) -> String {
        match self.method {
            Method::HoeffdingTree => "HT".to_string(),
            Method::DynEd => match self.params.measure {
                MeasureKind::DoubleFault => "DynED".to_string(),
                other => format!("DynED-{other}"),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.report_interval == 0 {
            return Err(Error::config("report interval must be positive"));
        }
        if self.method == Method::DynEd && self.warmup < self.params.init_samples {
            return Err(Error::config(format!(
                "warm-up {} shorter than init_s {}",
                self.warmup, self.params.init_samples
            )));
        }
        Ok(())
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        for key in settings.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::config(format!("unknown setting {key:?}")));
            }
        }
        let get = |k: &str| settings.get(k).map(String::as_str);
        let samples = parse_or(get("samples"), "samples", DEFAULT_SAMPLES)?;
        let dataset = match (get("generator"), get("dataset")) {
            (Some(_), Some(_)) => {
                return Err(Error::config("give either a generator or a dataset, not both"))
            }
            (None, None) => return Err(Error::config("no generator or dataset given")),
            (Some(name), None) => DatasetSpec::Generator {
                name: name.to_string(),
                samples,
            },
            (None, Some(path)) => DatasetSpec::Csv {
                path: PathBuf::from(path),
                label_column: get("label-column")
                    .map(|s| s.parse().unwrap())
                    .unwrap_or(LabelColumn::Last),
                header: parse_or(get("header"), "header", false)?,
            },
        };

        let d = HyperParams::default();
        let mut params = HyperParams {
            theta: parse_or(get("theta"), "theta", d.theta)?,
            lambda0: parse_or(get("lambda"), "lambda", d.lambda0)?,
            delta_lambda: parse_or(get("delta-lambda"), "delta-lambda", d.delta_lambda)?,
            window_size: parse_or(get("win-size"), "win-size", d.window_size)?,
            init_components: parse_or(get("init-c"), "init-c", d.init_components)?,
            init_samples: parse_or(get("init-s"), "init-s", d.init_samples)?,
            pool_size: parse_or(get("pool-size"), "pool-size", d.pool_size)?,
            add_size: parse_or(get("add-size"), "add-size", d.add_size)?,
            per_cluster: parse_or(get("cls-size"), "cls-size", d.per_cluster)?,
            active_size: parse_or(get("slc-size"), "slc-size", d.active_size)?,
            oracle_size: parse_or(get("error-size"), "error-size", d.oracle_size)?,
            measure: match get("measure") {
                Some(m) => m.parse()?,
                None => d.measure,
            },
            tree: d.tree,
            adwin_delta: parse_or(get("adwin-delta"), "adwin-delta", d.adwin_delta)?,
        };
        params.tree.grace_period = parse_or(get("grace-period"), "grace-period", d.tree.grace_period)?;
        params.tree.split_confidence =
            parse_or(get("split-confidence"), "split-confidence", d.tree.split_confidence)?;
        params.tree.tie_threshold = parse_or(get("tie-threshold"), "tie-threshold", d.tree.tie_threshold)?;
        if let Some(depth) = get("max-depth") {
            params.tree.max_depth = Some(parse_value(depth, "max-depth")?);
        }

        let config = Self {
            dataset,
            seed: parse_or(get("seed"), "seed", 1)?,
            method: match get("method") {
                Some(m) => m.parse()?,
                None => Method::DynEd,
            },
            params,
            warmup: parse_or(get("warmup"), "warmup", DEFAULT_WARMUP)?,
            report_interval: parse_or(get("report-interval"), "report-interval", DEFAULT_REPORT_INTERVAL)?,
            output: get("out").map(PathBuf::from),
            record_timing: !parse_or(get("no-timing"), "no-timing", false)?,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_value<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn parse_or<T: FromStr>(value: Option<&str>, key: &str, default: T) -> Result<T> {
    value.map_or(Ok(default), |v| parse_value(v, key))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_flags() {
        let s = parse_config("# experiment\n\ngenerator = sea-abrupt-012\nseed=7\nno-timing\n").unwrap();
        assert_eq!(s["generator"], "sea-abrupt-012");
        assert_eq!(s["seed"], "7");
        assert_eq!(s["no-timing"], "true");
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse_config("seed = 1\nbogus = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(parse_config(" = 3").is_err());
    }

    #[test]
    fn settings_build_a_config() {
        let s = parse_config("generator = led-drift\nsamples = 5000\nlambda = 0.4\nmeasure = cp\n").unwrap();
        let c = ExperimentConfig::from_settings(&s).unwrap();
        assert_eq!(
            c.dataset,
            DatasetSpec::Generator { name: "led-drift".into(), samples: 5_000 }
        );
        assert_eq!(c.params.lambda0, 0.4);
        assert_eq!(c.params.measure, MeasureKind::Correlation);
        assert_eq!(c.warmup, 250);
        assert_eq!(c.method_label(), "DynED-CP");
        assert!(c.record_timing);
    }

    #[test]
    fn exactly_one_dataset() {
        let mut s = Settings::new();
        assert!(ExperimentConfig::from_settings(&s).is_err());
        s.insert("generator".into(), "sea-0".into());
        s.insert("dataset".into(), "x.csv".into());
        assert!(ExperimentConfig::from_settings(&s).is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        for (k, v) in [("seed", "x"), ("lambda", "2"), ("warmup", "10"), ("method", "svm")] {
            let mut s = Settings::new();
            s.insert("generator".into(), "sea-0".into());
            s.insert(k.into(), v.into());
            assert!(
                matches!(ExperimentConfig::from_settings(&s), Err(Error::Config(_))),
                "{k}={v}"
            );
        }
    }

    #[test]
    fn csv_dataset_label_is_file_stem() {
        let mut s = Settings::new();
        s.insert("dataset".into(), "/data/elec.csv".into());
        s.insert("label-column".into(), "class".into());
        s.insert("header".into(), "true".into());
        let c = ExperimentConfig::from_settings(&s).unwrap();
        assert_eq!(c.dataset.label(), "elec");
        assert!(matches!(
            c.dataset,
            DatasetSpec::Csv { label_column: LabelColumn::Name(_), header: true, .. }
        ));
    }
}
