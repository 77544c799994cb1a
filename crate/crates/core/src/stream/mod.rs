//! Stream abstraction, synthetic drifting generators and CSV ingestion.

mod csv;
mod datasets;
mod drift;
mod generators;

pub use self::csv::{csv_from_reader, csv_open, CsvOptions, CsvSource, LabelColumn};
pub use datasets::{named_stream, NAMED_DATASETS};
pub use drift::{drift_compose, logistic_mix, DriftKind, DriftSchedule, DriftStream};
pub use generators::{
    agrawal_generate, agrawal_label, hyperplane_generate, hyperplane_label, led_encode,
    led_generate, mixed_generate, mixed_label, sea_generate, sea_label, AgrawalGenerator,
    HyperplaneGenerator, LedGenerator, MixedGenerator, SeaGenerator, LED_SEGMENTS,
    SEA_THRESHOLDS,
};

use crate::{Error, Result};

/// One labelled stream sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSchema {
    n_features: usize,
    n_classes: usize,
}

impl StreamSchema {
    pub fn new(n_features: usize, n_classes: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::config("schema needs at least one feature"));
        }
        if n_classes < 2 {
            return Err(Error::config(format!(
                "schema needs at least two classes, got {n_classes}"
            )));
        }
        Ok(Self {
            n_features,
            n_classes,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Checks that `instance` conforms to this schema.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        self.check_features(&instance.features)?;
        if instance.label >= self.n_classes {
            return Err(Error::contract(format!(
                "label {} outside 0..{}",
                instance.label, self.n_classes
            )));
        }
        Ok(())
    }

    pub fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::contract(format!(
                "expected {} features, got {}",
                self.n_features,
                features.len()
            )));
        }
        Ok(())
    }
}

/// A sequential, single-consumer producer of instances.
///
/// Sources built from the same parameters and seed yield identical
/// sequences, and `schema()` never changes over a source's lifetime.
pub trait StreamSource: Send {
    fn schema(&self) -> StreamSchema;

    /// Next instance, or `None` once the source is exhausted.
    fn next_instance(&mut self) -> Option<Instance>;
}

impl<S: StreamSource + ?Sized> StreamSource for Box<S> {
    fn schema(&self) -> StreamSchema {
        (**self).schema()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        (**self).next_instance()
    }
}

/// Caps a source at a fixed number of instances.
pub struct Limited<S> {
    inner: S,
    remaining: u64,
}

impl<S: StreamSource> Limited<S> {
    pub fn new(inner: S, limit: u64) -> Self {
        Self {
            inner,
            remaining: limit,
        }
    }
}

impl<S: StreamSource> StreamSource for Limited<S> {
    fn schema(&self) -> StreamSchema {
        self.inner.schema()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.inner.next_instance()
    }
}

/// Pulls up to `n` instances from `source`.
pub fn take_instances(source: &mut dyn StreamSource, n: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        match source.next_instance() {
            Some(inst) => out.push(inst),
            None => break,
        }
    }
    out
}

/// Derives the seed of the `index`-th sub-source from a parent seed.
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
