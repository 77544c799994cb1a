//! The per-sample ensemble loop: majority-vote prediction, window and
//! detector updates, training of the active set, spawning on drift, the
//! lambda update and periodic re-selection.

use std::collections::VecDeque;

use crate::adwin::{Adwin, DEFAULT_DELTA};
use crate::diversity::MeasureKind;
use crate::selection::{select_components, ComponentId, ComponentRecord, SelectionParams, SelectionStats};
use crate::stream::{Instance, StreamSchema};
use crate::tree::{HoeffdingTree, HtParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Samples between selection checks (`theta`).
    pub theta: u64,
    pub lambda0: f64,
    pub delta_lambda: f64,
    pub window_size: usize,
    pub init_components: usize,
    pub init_samples: usize,
    pub pool_size: usize,
    pub add_size: usize,
    pub per_cluster: usize,
    pub active_size: usize,
    pub oracle_size: usize,
    pub measure: MeasureKind,
    pub tree: HtParams,
    pub adwin_delta: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            theta: 100,
            lambda0: 0.6,
            delta_lambda: 0.1,
            window_size: 500,
            init_components: 5,
            init_samples: 50,
            pool_size: 500,
            add_size: 5,
            per_cluster: 10,
            active_size: 10,
            oracle_size: 50,
            measure: MeasureKind::DoubleFault,
            tree: HtParams::default(),
            adwin_delta: DEFAULT_DELTA,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("theta", self.theta as usize),
            ("win_s", self.window_size),
            ("init_c", self.init_components),
            ("init_s", self.init_samples),
            ("pool_s", self.pool_size),
            ("add_s", self.add_size),
            ("cls_s", self.per_cluster),
            ("slc_s", self.active_size),
            ("error_s", self.oracle_size),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, v)| *v == 0) {
            return Err(Error::config(format!("{name} must be positive")));
        }
        if !(0.0..=1.0).contains(&self.lambda0) {
            return Err(Error::config(format!("lambda0 {} outside [0, 1]", self.lambda0)));
        }
        if !(self.delta_lambda > 0.0 && self.delta_lambda <= 1.0) {
            return Err(Error::config(format!(
                "delta lambda {} outside (0, 1]",
                self.delta_lambda
            )));
        }
        self.tree.validate()
    }

    fn selection(&self, lambda: f64) -> SelectionParams {
        SelectionParams {
            lambda,
            pool_size: self.pool_size,
            per_cluster: self.per_cluster,
            active_size: self.active_size,
            oracle_size: self.oracle_size,
            measure: self.measure,
        }
    }
}

/// FIFO buffer of the most recent labelled instances.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    buf: VecDeque<Instance>,
    capacity: usize,
}

impl SlidingWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            buf: VecDeque::with_capacity(capacity + 1),
            capacity,
        }
    }

    pub fn push(&mut self, instance: Instance) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(instance);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Instance> {
        self.buf.iter()
    }

    pub fn as_slice(&mut self) -> &[Instance] {
        self.buf.make_contiguous()
    }
}

/// Most frequent class; ties go to the lowest class index.
pub fn majority_vote(votes: &[usize]) -> Result<usize> {
    let Some(&max) = votes.iter().max() else {
        return Err(Error::contract("majority vote over no votes"));
    };
    let mut counts = vec![0usize; max + 1];
    for &v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for (class, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = class;
        }
    }
    Ok(best)
}

/// `(acc_now - acc_then) / lookback`
pub fn accuracy_intensity(acc_now: f64, acc_then: f64, lookback: u64) -> Result<f64> {
    if lookback == 0 {
        return Err(Error::contract("accuracy intensity needs a lookback of at least 1"));
    }
    Ok((acc_now - acc_then) / lookback as f64)
}

/// Steps lambda up on a non-negative intensity and down otherwise,
/// saturating at 0 and 1. Results are snapped to a 1e-9 grid so that
/// repeated steps of 0.1 land exactly on the bounds.
pub fn update_lambda(lambda: f64, intensity: f64, delta: f64) -> f64 {
    let next = if intensity >= 0.0 {
        lambda + delta
    } else {
        lambda - delta
    };
    ((next * 1e9).round() / 1e9).clamp(0.0, 1.0)
}

/// Tracks the ensemble's running prequential accuracy and moves lambda by
/// the sign of its change over the last `theta` steps.
#[derive(Debug, Clone)]
pub struct LambdaController {
    lambda: f64,
    delta: f64,
    theta: u64,
    correct: u64,
    total: u64,
    /// Running accuracy after each of the last `theta + 1` steps.
    history: VecDeque<f64>,
}

impl LambdaController {
    pub fn new(lambda0: f64, delta: f64, theta: u64) -> Self {
        Self {
            lambda: lambda0,
            delta,
            theta,
            correct: 0,
            total: 0,
            history: VecDeque::with_capacity(theta as usize + 2),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn running_accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn record(&mut self, correct: bool) {
        self.total += 1;
        self.correct += u64::from(correct);
        if self.history.len() as u64 > self.theta {
            self.history.pop_front();
        }
        self.history.push_back(self.running_accuracy());
    }

    /// Restarts the accuracy bookkeeping, keeping lambda.
    pub fn reset_accuracy(&mut self) {
        self.correct = 0;
        self.total = 0;
        self.history.clear();
    }

    /// Intensity over the available lookback (at most `theta` steps); zero
    /// when fewer than two accuracy samples exist.
    pub fn intensity(&self) -> f64 {
        let lookback = self.history.len().saturating_sub(1) as u64;
        match (self.history.front(), self.history.back()) {
            (Some(&then), Some(&now)) if lookback > 0 => {
                accuracy_intensity(now, then, lookback).unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }

    /// Applies one lambda update. Returns `(intensity, new lambda)`.
    pub fn update(&mut self) -> (f64, f64) {
        let intensity = self.intensity();
        self.lambda = update_lambda(self.lambda, intensity, self.delta);
        (intensity, self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Drift {
        index: u64,
    },
    Spawn {
        index: u64,
        ids: Vec<ComponentId>,
    },
    /// Drift fired with an empty window; nothing was spawned.
    SpawnSkipped {
        index: u64,
    },
    Lambda {
        index: u64,
        intensity: f64,
        from: f64,
        to: f64,
    },
    Selection {
        index: u64,
        lambda: f64,
        active: Vec<ComponentId>,
        reserve: usize,
        pruned: Vec<ComponentId>,
        stats: SelectionStats,
    },
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub prediction: usize,
    pub events: Vec<Event>,
}

pub struct DynEd {
    params: HyperParams,
    schema: StreamSchema,
    active: Vec<ComponentRecord>,
    reserve: Vec<ComponentRecord>,
    controller: LambdaController,
    window: SlidingWindow,
    detector: Adwin,
    samples_seen: u64,
    since_selection: u64,
    next_id: ComponentId,
}

impl DynEd {
    /// Builds `init_components` trees, each trained on the first
    /// `init_samples` instances of `warmup`, all active.
    pub fn new(params: HyperParams, schema: StreamSchema, warmup: &[Instance]) -> Result<Self> {
        params.validate()?;
        if warmup.len() < params.init_samples {
            return Err(Error::config(format!(
                "warm-up has {} instances, {} required",
                warmup.len(),
                params.init_samples
            )));
        }
        let initial = &warmup[..params.init_samples];
        let mut tree = HoeffdingTree::new(params.tree, schema)?;
        for inst in initial {
            tree.learn(inst)?;
        }
        let mut window = SlidingWindow::new(params.window_size);
        initial.iter().cloned().for_each(|i| window.push(i));

        let active = (0..params.init_components as u64)
            .map(|id| ComponentRecord::new(id, tree.clone(), params.oracle_size, 0))
            .collect();
        Ok(Self {
            controller: LambdaController::new(params.lambda0, params.delta_lambda, params.theta),
            detector: Adwin::new(params.adwin_delta)?,
            next_id: params.init_components as u64,
            params,
            schema,
            active,
            reserve: Vec::new(),
            window,
            samples_seen: 0,
            since_selection: 0,
        })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn schema(&self) -> StreamSchema {
        self.schema
    }

    pub fn lambda(&self) -> f64 {
        self.controller.lambda()
    }

    pub fn active(&self) -> &[ComponentRecord] {
        &self.active
    }

    pub fn reserve(&self) -> &[ComponentRecord] {
        &self.reserve
    }

    pub fn window(&self) -> &SlidingWindow {
        &self.window
    }

    pub fn detector(&self) -> &Adwin {
        &self.detector
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn running_accuracy(&self) -> f64 {
        self.controller.running_accuracy()
    }

    /// Restarts the running-accuracy history used for the lambda update,
    /// e.g. at the end of an evaluation warm-up.
    pub fn reset_accuracy(&mut self) {
        self.controller.reset_accuracy();
    }

    /// Majority vote of the active components.
    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        self.schema.check_features(features)?;
        self.vote(features)
    }

    fn vote(&self, features: &[f64]) -> Result<usize> {
        let votes: Vec<usize> = self
            .active
            .iter()
            .map(|c| c.model.predict_unchecked(features))
            .collect();
        majority_vote(&votes)
    }

    /// Processes one labelled instance: predict, then learn.
    pub fn step(&mut self, instance: &Instance) -> Result<StepOutcome> {
        self.schema.check(instance)?;
        let index = self.samples_seen;
        let mut events = Vec::new();

        let prediction = self.vote(&instance.features)?;
        let correct = prediction == instance.label;
        self.controller.record(correct);

        self.window.push(instance.clone());

        let drift = self.detector.add(if correct { 1.0 } else { 0.0 })?;

        for c in &mut self.active {
            c.model.learn_unchecked(instance);
        }

        let mut added = false;
        if drift {
            events.push(Event::Drift { index });
            match self.spawn_components(index) {
                Some(ids) => {
                    added = true;
                    events.push(Event::Spawn { index, ids });
                }
                None => events.push(Event::SpawnSkipped { index }),
            }
        }

        self.samples_seen += 1;
        self.since_selection += 1;

        if self.since_selection >= self.params.theta || added {
            let from = self.controller.lambda();
            let (intensity, to) = self.controller.update();
            events.push(Event::Lambda {
                index,
                intensity,
                from,
                to,
            });
            events.push(self.reselect(index, to)?);
            self.since_selection = 0;
        }

        Ok(StepOutcome { prediction, events })
    }

    /// Trains `add_size` fresh trees on the window (oldest first) and puts
    /// them in the reserve pool. Their initial accuracy is the prequential
    /// accuracy of that replay. Returns `None` when the window is empty.
    pub fn spawn_components(&mut self, index: u64) -> Option<Vec<ComponentId>> {
        if self.window.is_empty() {
            log::warn!("drift at {index} with an empty window; no components spawned");
            return None;
        }
        let mut tree = HoeffdingTree::new(self.params.tree, self.schema).ok()?;
        let mut correct = 0usize;
        for inst in self.window.iter() {
            correct += usize::from(tree.predict_unchecked(&inst.features) == inst.label);
            tree.learn_unchecked(inst);
        }
        let accuracy = correct as f64 / self.window.len() as f64;
        let mut ids = Vec::with_capacity(self.params.add_size);
        for _ in 0..self.params.add_size {
            let id = self.next_id;
            self.next_id += 1;
            let mut record = ComponentRecord::new(id, tree.clone(), self.params.oracle_size, index);
            record.accuracy = accuracy;
            self.reserve.push(record);
            ids.push(id);
        }
        Some(ids)
    }

    fn reselect(&mut self, index: u64, lambda: f64) -> Result<Event> {
        let pool = std::mem::take(&mut self.reserve);
        let active = std::mem::take(&mut self.active);
        let params = self.params.selection(lambda);
        let selection = select_components(pool, active, self.window.as_slice(), &params)?;
        let event = Event::Selection {
            index,
            lambda,
            active: selection.active.iter().map(|c| c.id).collect(),
            reserve: selection.reserve.len(),
            pruned: selection.pruned,
            stats: selection.stats,
        };
        self.active = selection.active;
        self.reserve = selection.reserve;
        Ok(event)
    }
}
