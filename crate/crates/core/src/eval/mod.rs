//! Interleaved test-then-train evaluation, result files and rank statistics.

mod config;
mod results;
mod stats;

use std::time::Instant;

pub use config::{
    parse_config, DatasetSpec, ExperimentConfig, Method, Settings, CONFIG_KEYS, DEFAULT_REPORT_INTERVAL,
    DEFAULT_SAMPLES, DEFAULT_WARMUP,
};
pub use results::{
    read_results, read_results_from, temporal_path, write_results, write_results_to, write_temporal_to,
    ResultRow, RESULTS_HEADER, TEMPORAL_HEADER,
};
pub use stats::{average_ranks, friedman_nemenyi, nemenyi_q, rank_row, rank_table, FriedmanNemenyi, RankTable};

use crate::ensemble::{DynEd, Event};
use crate::stream::{csv_open, named_stream, CsvOptions, Instance, StreamSource};
use crate::tree::HoeffdingTree;
use crate::{Error, Result};

/// Anything that can be evaluated prequentially.
pub trait Learner {
    fn predict(&self, features: &[f64]) -> Result<usize>;
    fn learn(&mut self, instance: &Instance) -> Result<()>;
}

impl Learner for HoeffdingTree {
    fn predict(&self, features: &[f64]) -> Result<usize> {
        HoeffdingTree::predict(self, features)
    }

    fn learn(&mut self, instance: &Instance) -> Result<()> {
        HoeffdingTree::learn(self, instance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalPoint {
    /// Stream position (1-based count of consumed samples) at the end of the window.
    pub index: u64,
    pub accuracy: f64,
    pub lambda: Option<f64>,
    pub active: usize,
    pub reserve: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub correct: u64,
    pub scored: u64,
    pub total: u64,
    pub temporal: Vec<TemporalPoint>,
    /// Stream positions (0-based) at which drift was signalled.
    pub drift_events: Vec<u64>,
    pub selection_events: Vec<(u64, f64)>,
    /// `(index, active, active + reserve)` after each selection.
    pub component_counts: Vec<(u64, usize, usize)>,
    pub wall_time: f64,
}

/// Opens the stream described by a dataset spec.
pub fn open_source(spec: &DatasetSpec, seed: u64) -> Result<Box<dyn StreamSource>> {
    match spec {
        DatasetSpec::Generator { name, samples } => named_stream(name, *samples, seed),
        DatasetSpec::Csv {
            path,
            label_column,
            header,
        } => {
            let options = CsvOptions {
                label_column: label_column.clone(),
                has_header: *header,
                schema_hint: None,
            };
            Ok(Box::new(csv_open(path, &options)?))
        }
    }
}

struct Tally {
    interval: u64,
    correct: u64,
    scored: u64,
    window_correct: u64,
    window_len: u64,
}

impl Tally {
    /// Scores one prediction; returns the window accuracy when a window closes.
    fn score(&mut self, correct: bool) -> Option<f64> {
        self.scored += 1;
        self.window_len += 1;
        if correct {
            self.correct += 1;
            self.window_correct += 1;
        }
        if self.window_len < self.interval {
            return None;
        }
        let acc = self.window_correct as f64 / self.window_len as f64;
        self.window_correct = 0;
        self.window_len = 0;
        Some(acc)
    }
}

fn read_warmup(source: &mut dyn StreamSource, warmup: usize) -> Result<Vec<Instance>> {
    let schema = source.schema();
    let mut out = Vec::with_capacity(warmup);
    while out.len() < warmup {
        match source.next_instance() {
            Some(inst) => {
                schema.check(&inst)?;
                out.push(inst);
            }
            None => {
                return Err(Error::config(format!(
                    "stream ended after {} samples, warm-up needs {warmup}",
                    out.len()
                )))
            }
        }
    }
    Ok(out)
}

/// Runs the configured method over `source`.
///
/// The first `config.warmup` samples build and train the model and are not
/// scored. Every later sample is predicted, scored and then learned.
pub fn run_prequential(source: &mut dyn StreamSource, config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let started = Instant::now();
    let warmup = read_warmup(source, config.warmup)?;
    let schema = source.schema();
    let mut report = match config.method {
        config::Method::HoeffdingTree => {
            let mut tree = HoeffdingTree::new(config.params.tree, schema)?;
            score_learner(&mut tree, &warmup, source, config.report_interval)?
        }
        config::Method::DynEd => run_dyned(source, config, &warmup)?,
    };
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Generic prequential loop: trains on `warmup`, then tests and trains on
/// the rest of `source`.
pub fn score_learner<L: Learner + ?Sized>(
    learner: &mut L,
    warmup: &[Instance],
    source: &mut dyn StreamSource,
    report_interval: usize,
) -> Result<EvalReport> {
    for inst in warmup {
        learner.learn(inst)?;
    }
    let mut tally = Tally {
        interval: report_interval.max(1) as u64,
        correct: 0,
        scored: 0,
        window_correct: 0,
        window_len: 0,
    };
    let mut report = EvalReport::default();
    let mut position = warmup.len() as u64;
    while let Some(inst) = source.next_instance() {
        let correct = learner.predict(&inst.features)? == inst.label;
        learner.learn(&inst)?;
        position += 1;
        if let Some(accuracy) = tally.score(correct) {
            report.temporal.push(TemporalPoint {
                index: position,
                accuracy,
                lambda: None,
                active: 1,
                reserve: 0,
            });
        }
    }
    finish(&mut report, &tally, position);
    Ok(report)
}

fn finish(report: &mut EvalReport, tally: &Tally, total: u64) {
    report.correct = tally.correct;
    report.scored = tally.scored;
    report.total = total;
    report.overall_accuracy = if tally.scored == 0 {
        0.0
    } else {
        tally.correct as f64 / tally.scored as f64
    };
}

fn run_dyned(source: &mut dyn StreamSource, config: &ExperimentConfig, warmup: &[Instance]) -> Result<EvalReport> {
    let params = &config.params;
    let mut model = DynEd::new(*params, source.schema(), warmup)?;
    // Event indices count samples fed to `step`; the construction samples precede them.
    let offset = params.init_samples as u64;
    let mut report = EvalReport::default();
    let record = |report: &mut EvalReport, events: &[Event]| {
        for event in events {
            match event {
                Event::Drift { index } => report.drift_events.push(index + offset),
                Event::Selection {
                    index,
                    lambda,
                    active,
                    reserve,
                    ..
                } => {
                    report.selection_events.push((index + offset, *lambda));
                    report
                        .component_counts
                        .push((index + offset, active.len(), active.len() + reserve));
                }
                _ => {}
            }
        }
    };
    for inst in &warmup[params.init_samples..] {
        let outcome = model.step(inst)?;
        record(&mut report, &outcome.events);
    }
    model.reset_accuracy();

    let mut tally = Tally {
        interval: config.report_interval as u64,
        correct: 0,
        scored: 0,
        window_correct: 0,
        window_len: 0,
    };
    let mut position = warmup.len() as u64;
    while let Some(inst) = source.next_instance() {
        let outcome = model.step(&inst)?;
        position += 1;
        record(&mut report, &outcome.events);
        if let Some(accuracy) = tally.score(outcome.prediction == inst.label) {
            report.temporal.push(TemporalPoint {
                index: position,
                accuracy,
                lambda: Some(model.lambda()),
                active: model.active().len(),
                reserve: model.reserve().len(),
            });
        }
    }
    finish(&mut report, &tally, position);
    Ok(report)
}

/// Opens the configured dataset and runs it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    let mut source = open_source(&config.dataset, config.seed)?;
    run_prequential(source.as_mut(), config)
}

/// Result-file row for a finished run.
pub fn result_row(config: &ExperimentConfig, report: &EvalReport) -> ResultRow {
    ResultRow {
        dataset: config.dataset.label(),
        method: config.method_label(),
        seed: config.seed,
        samples: report.total,
        accuracy: report.overall_accuracy,
        drifts: report.drift_events.len() as u64,
        wall_time_s: if config.record_timing { report.wall_time } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{StreamSchema, Limited};

    struct Fixed {
        schema: StreamSchema,
        n: u64,
        left: u64,
    }

    impl Fixed {
        fn new(n: u64) -> Self {
            Self {
                schema: StreamSchema::new(1, 2).unwrap(),
                n,
                left: n,
            }
        }
    }

    impl StreamSource for Fixed {
        fn schema(&self) -> StreamSchema {
            self.schema
        }

        fn next_instance(&mut self) -> Option<Instance> {
            if self.left == 0 {
                return None;
            }
            self.left -= 1;
            let i = self.n - self.left;
            Some(Instance::new(vec![i as f64], (i % 2) as usize))
        }
    }

    struct Oracle;

    impl Learner for Oracle {
        fn predict(&self, features: &[f64]) -> Result<usize> {
            Ok(features[0] as usize % 2)
        }

        fn learn(&mut self, _: &Instance) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn perfect_predictor_scores_one() {
        let mut src = Fixed::new(1_000);
        let warm = crate::stream::take_instances(&mut src, 250);
        let r = score_learner(&mut Oracle, &warm, &mut src, 100).unwrap();
        assert_eq!(r.scored, 750);
        assert_eq!(r.correct, 750);
        assert_eq!(r.overall_accuracy, 1.0);
        assert_eq!(r.temporal.len(), 7);
        assert!(r.temporal.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn warmup_excluded_from_scoring() {
        let mut cfg = ExperimentConfig::for_generator("sea-0", 1_000, 3);
        cfg.report_interval = 100;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.scored, 750);
        assert_eq!(r.total, 1_000);
        assert_eq!(r.temporal.len(), 7);
        assert_eq!(r.correct as f64 / r.scored as f64, r.overall_accuracy);
    }

    #[test]
    fn short_stream_is_config_error() {
        let mut src = Limited::new(Fixed::new(100), 100);
        let cfg = ExperimentConfig::for_generator("sea-0", 100, 1);
        assert!(matches!(run_prequential(&mut src, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn tree_baseline_runs() {
        let mut cfg = ExperimentConfig::for_generator("sea-0", 3_000, 1);
        cfg.method = Method::HoeffdingTree;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.scored, 2_750);
        assert!(r.overall_accuracy > 0.8);
        assert_eq!(result_row(&cfg, &r).method, "HT");
    }

    #[test]
    fn timing_can_be_suppressed() {
        let mut cfg = ExperimentConfig::for_generator("sea-0", 600, 1);
        cfg.record_timing = false;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(result_row(&cfg, &r).wall_time_s, 0.0);
    }
}
