//! Synthetic concept generators: SEA, Agrawal, LED, Mixed and rotating
//! hyperplane. Each generator emits a single stationary concept (the
//! hyperplane excepted, whose weights drift by construction); drift between
//! concepts is composed in [`super::drift`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Instance, StreamSchema, StreamSource};
use crate::{Error, Result};

/// Decision thresholds on `f1 + f2` for the four SEA concepts.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

/// Noise-free SEA rule: class 1 iff `f1 + f2 <= threshold`.
pub fn sea_label(function_id: usize, features: &[f64]) -> usize {
    usize::from(features[0] + features[1] <= SEA_THRESHOLDS[function_id])
}

pub struct SeaGenerator {
    function_id: usize,
    noise_fraction: f64,
    rng: ChaCha8Rng,
}

pub fn sea_generate(function_id: usize, noise_fraction: f64, seed: u64) -> Result<SeaGenerator> {
    if function_id >= SEA_THRESHOLDS.len() {
        return Err(Error::config(format!(
            "SEA function id {function_id} outside 0..4"
        )));
    }
    check_fraction("SEA noise", noise_fraction)?;
    Ok(SeaGenerator {
        function_id,
        noise_fraction,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl StreamSource for SeaGenerator {
    fn schema(&self) -> StreamSchema {
        StreamSchema::new(3, 2).unwrap()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let features: Vec<f64> = (0..3).map(|_| self.rng.gen::<f64>() * 10.0).collect();
        let mut label = sea_label(self.function_id, &features);
        if self.noise_fraction > 0.0 && self.rng.gen::<f64>() < self.noise_fraction {
            label = 1 - label;
        }
        Some(Instance::new(features, label))
    }
}

/// Agrawal loan-application generator.
///
/// Feature order: salary, commission, age, education level, car make,
/// zipcode, house value, house years, loan. Class 0 is "group A".
pub struct AgrawalGenerator {
    function_id: usize,
    rng: ChaCha8Rng,
}

pub fn agrawal_generate(function_id: usize, seed: u64) -> Result<AgrawalGenerator> {
    if function_id >= 10 {
        return Err(Error::config(format!(
            "Agrawal function id {function_id} outside 0..10"
        )));
    }
    Ok(AgrawalGenerator {
        function_id,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    lo <= x && x <= hi
}

/// Evaluates Agrawal classification function `function_id` (0-based) on a
/// nine-feature record. Returns 0 for group A, 1 otherwise.
pub fn agrawal_label(function_id: usize, f: &[f64]) -> usize {
    let (salary, commission, age, elevel) = (f[0], f[1], f[2], f[3]);
    let (hvalue, hyears, loan) = (f[6], f[7], f[8]);
    let group_a = match function_id {
        0 => !(40.0..60.0).contains(&age),
        1 => {
            if age < 40.0 {
                within(salary, 50_000.0, 100_000.0)
            } else if age < 60.0 {
                within(salary, 75_000.0, 125_000.0)
            } else {
                within(salary, 25_000.0, 75_000.0)
            }
        }
        2 => {
            if age < 40.0 {
                elevel == 0.0 || elevel == 1.0
            } else if age < 60.0 {
                (1.0..=3.0).contains(&elevel)
            } else {
                (2.0..=4.0).contains(&elevel)
            }
        }
        3 => {
            if age < 40.0 {
                if elevel <= 1.0 {
                    within(salary, 25_000.0, 75_000.0)
                } else {
                    within(salary, 50_000.0, 100_000.0)
                }
            } else if age < 60.0 {
                if (1.0..=3.0).contains(&elevel) {
                    within(salary, 50_000.0, 100_000.0)
                } else {
                    within(salary, 75_000.0, 125_000.0)
                }
            } else if (2.0..=4.0).contains(&elevel) {
                within(salary, 50_000.0, 100_000.0)
            } else {
                within(salary, 25_000.0, 75_000.0)
            }
        }
        4 => {
            if age < 40.0 {
                if within(salary, 50_000.0, 100_000.0) {
                    within(loan, 100_000.0, 300_000.0)
                } else {
                    within(loan, 200_000.0, 400_000.0)
                }
            } else if age < 60.0 {
                if within(salary, 75_000.0, 125_000.0) {
                    within(loan, 200_000.0, 400_000.0)
                } else {
                    within(loan, 300_000.0, 500_000.0)
                }
            } else if within(salary, 25_000.0, 75_000.0) {
                within(loan, 300_000.0, 500_000.0)
            } else {
                within(loan, 100_000.0, 300_000.0)
            }
        }
        5 => {
            let total = salary + commission;
            if age < 40.0 {
                within(total, 50_000.0, 100_000.0)
            } else if age < 60.0 {
                within(total, 75_000.0, 125_000.0)
            } else {
                within(total, 25_000.0, 75_000.0)
            }
        }
        6 => {
            let disposable = 2.0 * (salary + commission) / 3.0 - loan / 5.0 - 20_000.0;
            disposable > 1.0
        }
        7 => {
            let disposable = 2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel - 20_000.0;
            disposable > 1.0
        }
        8 => {
            let disposable =
                2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel - loan / 5.0 - 10_000.0;
            disposable > 1.0
        }
        9 => {
            let equity = if hyears >= 20.0 {
                hvalue * (hyears - 20.0) / 10.0
            } else {
                0.0
            };
            let disposable =
                2.0 * (salary + commission) / 3.0 - 5_000.0 * elevel + equity / 5.0 - 10_000.0;
            disposable > 1.0
        }
        _ => unreachable!("function id validated at construction"),
    };
    usize::from(!group_a)
}

impl StreamSource for AgrawalGenerator {
    fn schema(&self) -> StreamSchema {
        StreamSchema::new(9, 2).unwrap()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let rng = &mut self.rng;
        let salary = 20_000.0 + 130_000.0 * rng.gen::<f64>();
        let commission = if salary >= 75_000.0 {
            0.0
        } else {
            10_000.0 + 65_000.0 * rng.gen::<f64>()
        };
        let age = rng.gen_range(20..=80) as f64;
        let elevel = rng.gen_range(0..=4) as f64;
        let car = rng.gen_range(1..=20) as f64;
        let zipcode = rng.gen_range(0..=8) as f64;
        let hvalue = (9.0 - zipcode) * 100_000.0 * (0.5 + rng.gen::<f64>());
        let hyears = rng.gen_range(1..=30) as f64;
        let loan = 500_000.0 * rng.gen::<f64>();
        let features = vec![
            salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan,
        ];
        let label = agrawal_label(self.function_id, &features);
        Some(Instance::new(features, label))
    }
}

/// Seven-segment encodings of the digits 0-9, segments in order a..g
/// (top, upper right, lower right, bottom, lower left, upper left, middle).
pub const LED_SEGMENTS: [[u8; 7]; 10] = [
    [1, 1, 1, 1, 1, 1, 0],
    [0, 1, 1, 0, 0, 0, 0],
    [1, 1, 0, 1, 1, 0, 1],
    [1, 1, 1, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [1, 0, 1, 1, 0, 1, 1],
    [1, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 0, 0, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 0, 1, 1],
];

/// Drifting feature `i` trades places with feature `(i + 3) % 7`.
fn led_partner(i: usize) -> usize {
    (i + 3) % 7
}

/// Noise-free feature vector for `digit` with the first `n_drift_features`
/// features swapped with their partners.
pub fn led_encode(digit: usize, n_drift_features: usize) -> [f64; 7] {
    let mut out = LED_SEGMENTS[digit].map(f64::from);
    for i in 0..n_drift_features {
        out.swap(i, led_partner(i));
    }
    out
}

pub struct LedGenerator {
    n_drift_features: usize,
    noise_fraction: f64,
    rng: ChaCha8Rng,
}

pub fn led_generate(n_drift_features: usize, noise_fraction: f64, seed: u64) -> Result<LedGenerator> {
    if n_drift_features > 7 {
        return Err(Error::config(format!(
            "LED drifting feature count {n_drift_features} exceeds 7"
        )));
    }
    check_fraction("LED noise", noise_fraction)?;
    Ok(LedGenerator {
        n_drift_features,
        noise_fraction,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl StreamSource for LedGenerator {
    fn schema(&self) -> StreamSchema {
        StreamSchema::new(7, 10).unwrap()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let digit = self.rng.gen_range(0..10);
        let mut features = led_encode(digit, self.n_drift_features).to_vec();
        if self.noise_fraction > 0.0 {
            for f in &mut features {
                if self.rng.gen::<f64>() < self.noise_fraction {
                    *f = 1.0 - *f;
                }
            }
        }
        Some(Instance::new(features, digit))
    }
}

/// Mixed rule over features `(v, w, x, z)`: positive iff at least two of
/// `v`, `w`, `z < 0.5 + 0.3 sin(3 pi x)` hold. Function 1 inverts the label.
pub fn mixed_label(function_id: usize, f: &[f64]) -> usize {
    let (v, w, x, z) = (f[0] == 1.0, f[1] == 1.0, f[2], f[3]);
    let below = z < 0.5 + 0.3 * (3.0 * std::f64::consts::PI * x).sin();
    let votes = usize::from(v) + usize::from(w) + usize::from(below);
    let positive = votes >= 2;
    usize::from(positive != (function_id == 1))
}

pub struct MixedGenerator {
    function_id: usize,
    rng: ChaCha8Rng,
}

pub fn mixed_generate(function_id: usize, seed: u64) -> Result<MixedGenerator> {
    if function_id > 1 {
        return Err(Error::config(format!(
            "Mixed function id {function_id} outside 0..2"
        )));
    }
    Ok(MixedGenerator {
        function_id,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl StreamSource for MixedGenerator {
    fn schema(&self) -> StreamSchema {
        StreamSchema::new(4, 2).unwrap()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let v = f64::from(u8::from(self.rng.gen::<bool>()));
        let w = f64::from(u8::from(self.rng.gen::<bool>()));
        let x = self.rng.gen::<f64>();
        let z = self.rng.gen::<f64>();
        let features = vec![v, w, x, z];
        let label = mixed_label(self.function_id, &features);
        Some(Instance::new(features, label))
    }
}

/// Class 1 iff `sum(w_i x_i) >= threshold`.
pub fn hyperplane_label(weights: &[f64], threshold: f64, features: &[f64]) -> usize {
    let dot: f64 = weights.iter().zip(features).map(|(w, x)| w * x).sum();
    usize::from(dot >= threshold)
}

/// Rotating hyperplane. The threshold is half the weight sum, which keeps
/// the classes balanced in expectation for uniform features.
pub struct HyperplaneGenerator {
    weights: Vec<f64>,
    directions: Vec<f64>,
    drift_magnitude: f64,
    rng: ChaCha8Rng,
}

pub fn hyperplane_generate(
    n_features: usize,
    drift_magnitude: f64,
    seed: u64,
) -> Result<HyperplaneGenerator> {
    if n_features < 2 {
        return Err(Error::config(format!(
            "hyperplane needs at least 2 features, got {n_features}"
        )));
    }
    if !drift_magnitude.is_finite() {
        return Err(Error::config("hyperplane drift magnitude must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..n_features).map(|_| rng.gen::<f64>()).collect();
    let directions = (0..n_features)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    Ok(HyperplaneGenerator {
        weights,
        directions,
        drift_magnitude,
        rng,
    })
}

impl HyperplaneGenerator {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl StreamSource for HyperplaneGenerator {
    fn schema(&self) -> StreamSchema {
        StreamSchema::new(self.weights.len(), 2).unwrap()
    }

    fn next_instance(&mut self) -> Option<Instance> {
        let features: Vec<f64> = (0..self.weights.len())
            .map(|_| self.rng.gen::<f64>())
            .collect();
        let threshold = 0.5 * self.weights.iter().sum::<f64>();
        let label = hyperplane_label(&self.weights, threshold, &features);
        if self.drift_magnitude != 0.0 {
            for (w, d) in self.weights.iter_mut().zip(&self.directions) {
                *w += d * self.drift_magnitude;
            }
        }
        Some(Instance::new(features, label))
    }
}

fn check_fraction(what: &str, value: f64) -> Result<()> {
    if !(0.0..1.0).contains(&value) {
        return Err(Error::config(format!("{what} {value} outside [0, 1)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::take_instances;

    #[test]
    fn sea_threshold_rule() {
        assert_eq!(sea_label(0, &[3.0, 4.0, 5.0]), 1);
        assert_eq!(sea_label(2, &[3.0, 4.1, 0.0]), 0);
        // boundary is inclusive
        assert_eq!(sea_label(1, &[4.5, 4.5, 9.9]), 1);
        assert_eq!(sea_label(3, &[5.0, 4.6, 0.0]), 0);
    }

    #[test]
    fn sea_rejects_bad_parameters() {
        assert!(sea_generate(4, 0.0, 1).is_err());
        assert!(sea_generate(0, 1.0, 1).is_err());
        assert!(sea_generate(0, -0.1, 1).is_err());
    }

    #[test]
    fn sea_noiseless_labels_follow_rule() {
        let mut g = sea_generate(3, 0.0, 11).unwrap();
        for inst in take_instances(&mut g, 2_000) {
            assert!(inst.features.iter().all(|&x| (0.0..10.0).contains(&x)));
            assert_eq!(inst.label, sea_label(3, &inst.features));
        }
    }

    #[test]
    fn sea_noise_rate_is_close_to_requested() {
        let mut g = sea_generate(0, 0.1, 5).unwrap();
        let n = 20_000;
        let flipped = take_instances(&mut g, n)
            .iter()
            .filter(|i| i.label != sea_label(0, &i.features))
            .count();
        let rate = flipped as f64 / n as f64;
        assert!((rate - 0.1).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn agrawal_function_zero_age_bands() {
        let mut record = [50_000.0, 20_000.0, 35.0, 1.0, 3.0, 2.0, 300_000.0, 10.0, 1e5];
        assert_eq!(agrawal_label(0, &record), 0);
        record[2] = 45.0;
        assert_eq!(agrawal_label(0, &record), 1);
        record[2] = 60.0;
        assert_eq!(agrawal_label(0, &record), 0);
    }

    #[test]
    fn agrawal_function_six_disposable_income() {
        // 2*(60k+15k)/3 - 100k/5 - 20k = 50k - 20k - 20k = 10k > 1
        let record = [60_000.0, 15_000.0, 30.0, 0.0, 1.0, 0.0, 1e5, 5.0, 100_000.0];
        assert_eq!(agrawal_label(6, &record), 0);
        let mut poor = record;
        poor[8] = 400_000.0;
        assert_eq!(agrawal_label(6, &poor), 1);
    }

    #[test]
    fn agrawal_feature_domains() {
        let mut g = agrawal_generate(4, 9).unwrap();
        for inst in take_instances(&mut g, 5_000) {
            let f = &inst.features;
            assert!((20_000.0..150_000.0).contains(&f[0]));
            if f[0] >= 75_000.0 {
                assert_eq!(f[1], 0.0);
            }
            assert!((20.0..=80.0).contains(&f[2]));
            assert!((0.0..=4.0).contains(&f[3]));
            assert!((1.0..=20.0).contains(&f[4]));
            assert!((0.0..=8.0).contains(&f[5]));
            assert!((1.0..=30.0).contains(&f[7]));
            assert!((0.0..500_000.0).contains(&f[8]));
        }
        assert!(agrawal_generate(10, 0).is_err());
    }

    #[test]
    fn led_digit_seven_segments() {
        assert_eq!(led_encode(7, 0), [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn led_encodings_stay_injective_under_drift() {
        for drift in 0..=7 {
            let codes: Vec<[u64; 7]> = (0..10)
                .map(|d| led_encode(d, drift).map(|x| x as u64))
                .collect();
            for a in 0..10 {
                for b in a + 1..10 {
                    assert_ne!(codes[a], codes[b], "drift {drift}: {a} vs {b}");
                }
            }
        }
        let changed = (0..10).any(|d| led_encode(d, 7) != led_encode(d, 0));
        assert!(changed);
    }

    #[test]
    fn led_every_digit_appears() {
        let mut g = led_generate(0, 0.0, 2).unwrap();
        let mut seen = [0usize; 10];
        for inst in take_instances(&mut g, 10_000) {
            seen[inst.label] += 1;
            assert_eq!(inst.features, led_encode(inst.label, 0).to_vec());
        }
        assert!(seen.iter().all(|&c| c > 0));
        assert!(led_generate(8, 0.0, 0).is_err());
    }

    #[test]
    fn mixed_function_one_inverts() {
        let mut a = mixed_generate(0, 4).unwrap();
        let mut b = mixed_generate(1, 4).unwrap();
        for _ in 0..2_000 {
            let (x, y) = (a.next_instance().unwrap(), b.next_instance().unwrap());
            assert_eq!(x.features, y.features);
            assert_eq!(x.label, 1 - y.label);
            assert!(x.features[0] == 0.0 || x.features[0] == 1.0);
            assert!(x.features[1] == 0.0 || x.features[1] == 1.0);
        }
        assert!(mixed_generate(2, 0).is_err());
    }

    #[test]
    fn mixed_rule_by_hand() {
        // v and w both true: positive regardless of the curve
        assert_eq!(mixed_label(0, &[1.0, 1.0, 0.5, 0.99]), 1);
        // only v true, z = 0.9 above the curve at x = 0 (0.5): negative
        assert_eq!(mixed_label(0, &[1.0, 0.0, 0.0, 0.9]), 0);
        // only v true, z = 0.1 below the curve: positive
        assert_eq!(mixed_label(0, &[1.0, 0.0, 0.0, 0.1]), 1);
    }

    #[test]
    fn hyperplane_linear_rule() {
        assert_eq!(hyperplane_label(&[1.0, 1.0], 1.0, &[0.9, 0.4]), 1);
        assert_eq!(hyperplane_label(&[1.0, 1.0], 1.0, &[0.3, 0.4]), 0);
    }

    #[test]
    fn hyperplane_static_weights_without_drift() {
        let mut g = hyperplane_generate(4, 0.0, 8).unwrap();
        let before = g.weights().to_vec();
        take_instances(&mut g, 1_000);
        assert_eq!(g.weights(), &before[..]);

        let mut d = hyperplane_generate(4, 0.01, 8).unwrap();
        take_instances(&mut d, 10);
        assert_ne!(d.weights(), &before[..]);
        assert!(hyperplane_generate(1, 0.0, 0).is_err());
    }

    #[test]
    fn hyperplane_class_balance() {
        let mut g = hyperplane_generate(10, 0.0, 21).unwrap();
        let n = 100_000;
        let ones: usize = take_instances(&mut g, n).iter().map(|i| i.label).sum();
        let frac = ones as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 0.03, "fraction {frac}");
    }

    #[test]
    fn generators_are_deterministic() {
        let mut a = sea_generate(1, 0.0, 77).unwrap();
        let mut b = sea_generate(1, 0.0, 77).unwrap();
        assert_eq!(take_instances(&mut a, 1_000), take_instances(&mut b, 1_000));
        let mut a = agrawal_generate(2, 77).unwrap();
        let mut b = agrawal_generate(2, 77).unwrap();
        assert_eq!(take_instances(&mut a, 1_000), take_instances(&mut b, 1_000));
        let mut a = mixed_generate(0, 77).unwrap();
        let mut b = mixed_generate(0, 77).unwrap();
        assert_eq!(take_instances(&mut a, 1_000), take_instances(&mut b, 1_000));
    }

    #[test]
    fn agrawal_binary_labels() {
        let mut g = agrawal_generate(0, 3).unwrap();
        let mut seen = [false; 2];
        for inst in take_instances(&mut g, 10_000) {
            seen[inst.label] = true;
        }
        assert_eq!(seen, [true, true]);
    }
}
