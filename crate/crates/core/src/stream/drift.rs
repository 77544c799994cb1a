//! Concept-drift composition over a sequence of concept sources.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Instance, StreamSchema, StreamSource};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    Abrupt,
    Gradual,
}

/// Ordered concepts and the sample indices at which each successor takes
/// over. `positions[j]` is the switch from concept `j` to concept `j + 1`.
pub struct DriftSchedule {
    concepts: Vec<Box<dyn StreamSource>>,
    positions: Vec<u64>,
    widths: Vec<u64>,
    kind: DriftKind,
}

impl DriftSchedule {
    pub fn new(
        concepts: Vec<Box<dyn StreamSource>>,
        positions: Vec<u64>,
        widths: Vec<u64>,
        kind: DriftKind,
    ) -> Result<Self> {
        if concepts.is_empty() {
            return Err(Error::config("drift schedule needs at least one concept"));
        }
        if positions.len() + 1 != concepts.len() {
            return Err(Error::config(format!(
                "{} concepts need {} switch positions, got {}",
                concepts.len(),
                concepts.len() - 1,
                positions.len()
            )));
        }
        if widths.len() != positions.len() {
            return Err(Error::config("one width per switch position required"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("switch positions must be strictly increasing"));
        }
        match kind {
            DriftKind::Abrupt if widths.iter().any(|&w| w != 0) => {
                return Err(Error::config("abrupt drift requires zero widths"));
            }
            DriftKind::Gradual if widths.contains(&0) => {
                return Err(Error::config("gradual drift requires positive widths"));
            }
            _ => {}
        }
        let schema = concepts[0].schema();
        if concepts.iter().any(|c| c.schema() != schema) {
            return Err(Error::config("all concepts must share one schema"));
        }
        Ok(Self {
            concepts,
            positions,
            widths,
            kind,
        })
    }

    /// Abrupt schedule with no transition width.
    pub fn abrupt(concepts: Vec<Box<dyn StreamSource>>, positions: Vec<u64>) -> Result<Self> {
        let widths = vec![0; positions.len()];
        Self::new(concepts, positions, widths, DriftKind::Abrupt)
    }

    /// Gradual schedule using one width for every switch.
    pub fn gradual(
        concepts: Vec<Box<dyn StreamSource>>,
        positions: Vec<u64>,
        width: u64,
    ) -> Result<Self> {
        let widths = vec![width; positions.len()];
        Self::new(concepts, positions, widths, DriftKind::Gradual)
    }

    pub fn kind(&self) -> DriftKind {
        self.kind
    }
}

/// Probability of drawing from the later concept at index `t` for a
/// switch centred at `position` with transition `width`.
pub fn logistic_mix(t: u64, position: u64, width: u64) -> f64 {
    if width == 0 {
        return if t >= position { 1.0 } else { 0.0 };
    }
    let x = -4.0 * (t as f64 - position as f64) / width as f64;
    1.0 / (1.0 + x.exp())
}

pub struct DriftStream {
    schedule: DriftSchedule,
    rng: ChaCha8Rng,
    index: u64,
    last_concept: usize,
}

pub fn drift_compose(schedule: DriftSchedule, seed: u64) -> DriftStream {
    DriftStream {
        schedule,
        rng: ChaCha8Rng::seed_from_u64(seed),
        index: 0,
        last_concept: 0,
    }
}

impl DriftStream {
    /// Concept that produced the most recently emitted instance.
    pub fn last_concept(&self) -> usize {
        self.last_concept
    }

    fn pick_concept(&mut self) -> usize {
        let t = self.index;
        let s = &self.schedule;
        // Later switches take precedence, as in nested drift streams.
        for j in (0..s.positions.len()).rev() {
            let p = logistic_mix(t, s.positions[j], s.widths[j]);
            let take = match s.kind {
                DriftKind::Abrupt => p >= 1.0,
                DriftKind::Gradual => self.rng.gen::<f64>() < p,
            };
            if take {
                return j + 1;
            }
        }
        0
    }
}

impl StreamSource for DriftStream {
    fn schema(&self) -> StreamSchema {
        self.schedule.concepts[0].schema()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let concept = self.pick_concept();
        let inst = self.schedule.concepts[concept].next_instance()?;
        self.last_concept = concept;
        self.index += 1;
        Some(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{sea_generate, take_instances, Limited};

    fn sea(f: usize, seed: u64) -> Box<dyn StreamSource> {
        Box::new(sea_generate(f, 0.0, seed).unwrap())
    }

    #[test]
    fn abrupt_boundary_is_exact() {
        let schedule = DriftSchedule::abrupt(vec![sea(0, 1), sea(2, 2)], vec![10]).unwrap();
        let mut stream = drift_compose(schedule, 0);
        for t in 0..20 {
            stream.next_instance().unwrap();
            let expected = usize::from(t >= 10);
            assert_eq!(stream.last_concept(), expected, "index {t}");
        }
    }

    #[test]
    fn logistic_midpoint_is_half() {
        assert_eq!(logistic_mix(500, 500, 100), 0.5);
        assert!(logistic_mix(400, 500, 100) < 0.5);
        assert!(logistic_mix(600, 500, 100) > 0.5);
        assert_eq!(logistic_mix(9, 10, 0), 0.0);
        assert_eq!(logistic_mix(10, 10, 0), 1.0);
    }

    #[test]
    fn gradual_mixing_is_monotone() {
        let schedule =
            DriftSchedule::gradual(vec![sea(0, 1), sea(1, 2)], vec![5_000], 2_000).unwrap();
        let mut stream = drift_compose(schedule, 9);
        let mut fractions = Vec::new();
        for _ in 0..10 {
            let mut later = 0;
            for _ in 0..1_000 {
                stream.next_instance().unwrap();
                later += stream.last_concept();
            }
            fractions.push(later as f64 / 1_000.0);
        }
        assert!(fractions.windows(2).all(|w| w[0] <= w[1] + 0.02), "{fractions:?}");
        assert!(fractions[0] < 0.05 && fractions[9] > 0.95);
        // the window straddling the centre sees both concepts about equally
        let centre = (fractions[4] + fractions[5]) / 2.0;
        assert!((centre - 0.5).abs() < 0.1, "{centre}");
    }

    #[test]
    fn schedule_validation() {
        assert!(DriftSchedule::abrupt(vec![], vec![]).is_err());
        assert!(DriftSchedule::abrupt(vec![sea(0, 1), sea(1, 1)], vec![]).is_err());
        assert!(
            DriftSchedule::abrupt(vec![sea(0, 1), sea(1, 1), sea(2, 1)], vec![10, 10]).is_err()
        );
        assert!(DriftSchedule::new(
            vec![sea(0, 1), sea(1, 1)],
            vec![10],
            vec![5],
            DriftKind::Abrupt
        )
        .is_err());
        assert!(DriftSchedule::gradual(vec![sea(0, 1), sea(1, 1)], vec![10], 0).is_err());
    }

    #[test]
    fn exhausted_concept_ends_stream() {
        let short: Box<dyn StreamSource> = Box::new(Limited::new(sea_generate(0, 0.0, 1).unwrap(), 5));
        let schedule = DriftSchedule::abrupt(vec![short, sea(1, 2)], vec![100]).unwrap();
        let mut stream = drift_compose(schedule, 0);
        assert_eq!(take_instances(&mut stream, 50).len(), 5);
    }

    #[test]
    fn composed_stream_is_deterministic() {
        let build = || {
            let s = DriftSchedule::gradual(vec![sea(0, 1), sea(1, 2), sea(2, 3)], vec![300, 600], 100)
                .unwrap();
            drift_compose(s, 42)
        };
        let (mut a, mut b) = (build(), build());
        assert_eq!(take_instances(&mut a, 1_000), take_instances(&mut b, 1_000));
    }
}
