//! Named benchmark streams built from the synthetic generators.

use super::{
    agrawal_generate, derive_seed, drift_compose, hyperplane_generate, led_generate,
    mixed_generate, sea_generate, DriftSchedule, Limited, StreamSource,
};
use crate::{Error, Result};

const SEA_NOISE: f64 = 0.09;
const GRADUAL_WIDTH: u64 = 10_000;
const HYPERPLANE_FEATURES: usize = 10;
const HYPERPLANE_DRIFT: f64 = 0.001;

/// Composite datasets accepted by [`named_stream`]. Single concepts are
/// also available as `sea-<0..3>`, `agrawal-<0..9>`, `led-<0..7>` and
/// `mixed-<0|1>`.
pub const NAMED_DATASETS: &[&str] = &[
    "sea-abrupt-012",
    "sea-abrupt-123",
    "sea-gradual-012",
    "sea-gradual-123",
    "agrawal-4567",
    "led-drift",
    "mixed-12",
    "hyperplane",
];

/// Evenly spaced switch positions splitting `n` samples into `parts`.
fn equal_parts(n: u64, parts: u64) -> Vec<u64> {
    (1..parts).map(|i| i * n / parts).collect()
}

type ConceptFactory = dyn Fn(usize, u64) -> Result<Box<dyn StreamSource>>;

fn compose(
    functions: &[usize],
    n_samples: u64,
    seed: u64,
    gradual: bool,
    factory: &ConceptFactory,
) -> Result<Box<dyn StreamSource>> {
    let concepts = functions
        .iter()
        .enumerate()
        .map(|(i, &f)| factory(f, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let positions = equal_parts(n_samples, functions.len() as u64);
    if positions.windows(2).any(|w| w[0] >= w[1]) || positions.first() == Some(&0) {
        return Err(Error::config(format!(
            "{n_samples} samples too few for {} concepts",
            functions.len()
        )));
    }
    let schedule = if gradual {
        DriftSchedule::gradual(concepts, positions, GRADUAL_WIDTH)?
    } else {
        DriftSchedule::abrupt(concepts, positions)?
    };
    let stream = drift_compose(schedule, derive_seed(seed, 1_000));
    Ok(Box::new(Limited::new(stream, n_samples)))
}

fn sea_concept(f: usize, seed: u64) -> Result<Box<dyn StreamSource>> {
    Ok(Box::new(sea_generate(f, SEA_NOISE, seed)?))
}

fn agrawal_concept(f: usize, seed: u64) -> Result<Box<dyn StreamSource>> {
    Ok(Box::new(agrawal_generate(f, seed)?))
}

fn led_concept(drift: usize, seed: u64) -> Result<Box<dyn StreamSource>> {
    Ok(Box::new(led_generate(drift, 0.0, seed)?))
}

fn mixed_concept(f: usize, seed: u64) -> Result<Box<dyn StreamSource>> {
    Ok(Box::new(mixed_generate(f, seed)?))
}

/// Builds a named stream capped at `n_samples` instances.
///
/// SEA datasets use 9% label noise and switch at equal partitions of the
/// stream; gradual variants use a logistic transition of 10,000 samples.
/// `led-drift` switches once, mid-stream, from the plain encoding to one
/// with all seven features drifted.
pub fn named_stream(name: &str, n_samples: u64, seed: u64) -> Result<Box<dyn StreamSource>> {
    match name {
        "sea-abrupt-012" => compose(&[0, 1, 2], n_samples, seed, false, &sea_concept),
        "sea-abrupt-123" => compose(&[1, 2, 3], n_samples, seed, false, &sea_concept),
        "sea-gradual-012" => compose(&[0, 1, 2], n_samples, seed, true, &sea_concept),
        "sea-gradual-123" => compose(&[1, 2, 3], n_samples, seed, true, &sea_concept),
        "agrawal-4567" => compose(&[4, 5, 6, 7], n_samples, seed, true, &agrawal_concept),
        "led-drift" => compose(&[0, 7], n_samples, seed, false, &led_concept),
        "mixed-12" => compose(&[0, 1, 0], n_samples, seed, false, &mixed_concept),
        "hyperplane" => {
            let g = hyperplane_generate(HYPERPLANE_FEATURES, HYPERPLANE_DRIFT, seed)?;
            Ok(Box::new(Limited::new(g, n_samples)))
        }
        _ => single_concept(name, n_samples, seed),
    }
}

fn single_concept(name: &str, n_samples: u64, seed: u64) -> Result<Box<dyn StreamSource>> {
    let unknown = || {
        Error::config(format!(
            "unknown generator {name:?}; expected one of {} or <sea|agrawal|led|mixed>-<id>",
            NAMED_DATASETS.join(", ")
        ))
    };
    let (family, id) = name.rsplit_once('-').ok_or_else(unknown)?;
    let id: usize = id.parse().map_err(|_| unknown())?;
    let source = match family {
        "sea" => sea_concept(id, seed)?,
        "agrawal" => agrawal_concept(id, seed)?,
        "led" => led_concept(id, seed)?,
        "mixed" => mixed_concept(id, seed)?,
        _ => return Err(unknown()),
    };
    Ok(Box::new(Limited::new(source, n_samples)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{sea_label, take_instances};

    #[test]
    fn sea_abrupt_012_switches_at_thirds() {
        assert_eq!(equal_parts(100_000, 3), vec![33_333, 66_666]);
        // With the noise removed from the picture, compare each sample's
        // label against the three concept rules.
        let mut s = named_stream("sea-abrupt-012", 100_000, 3).unwrap();
        let all = take_instances(&mut s, 200_000);
        assert_eq!(all.len(), 100_000);
        let agree = |range: std::ops::Range<usize>, f: usize| {
            let n = range.len() as f64;
            all[range]
                .iter()
                .filter(|i| i.label == sea_label(f, &i.features))
                .count() as f64
                / n
        };
        assert!(agree(0..33_333, 0) > 0.88);
        assert!(agree(33_333..66_666, 1) > 0.88);
        assert!(agree(66_666..100_000, 2) > 0.88);
    }

    #[test]
    fn every_named_dataset_builds() {
        for name in NAMED_DATASETS {
            let mut s = named_stream(name, 1_000, 1).unwrap();
            let schema = s.schema();
            let got = take_instances(&mut s, 2_000);
            assert_eq!(got.len(), 1_000, "{name}");
            assert!(got.iter().all(|i| i.label < schema.n_classes()));
            assert!(got.iter().all(|i| i.features.len() == schema.n_features()));
        }
        for name in ["sea-3", "agrawal-9", "led-7", "mixed-1"] {
            assert!(named_stream(name, 10, 1).is_ok(), "{name}");
        }
    }

    #[test]
    fn unknown_names_are_config_errors() {
        for name in ["nope", "sea-9", "agrawal-x", "mixed-2", "foo-1"] {
            assert!(matches!(named_stream(name, 10, 1), Err(Error::Config(_))), "{name}");
        }
    }

    #[test]
    fn named_streams_are_deterministic() {
        let mut a = named_stream("agrawal-4567", 5_000, 7).unwrap();
        let mut b = named_stream("agrawal-4567", 5_000, 7).unwrap();
        assert_eq!(take_instances(&mut a, 5_000), take_instances(&mut b, 5_000));
    }
}
