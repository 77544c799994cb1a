//! Pairwise diversity measures over oracle (correct/incorrect) outputs and
//! their mapping to similarities in `[0, 1]`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub const DEFAULT_ORACLE_CAPACITY: usize = 50;

/// Ring of the most recent correctness bits of one component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVector {
    bits: VecDeque<bool>,
    capacity: usize,
}

impl OracleVector {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "oracle capacity must be positive");
        Self {
            bits: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn from_bits(capacity: usize, bits: impl IntoIterator<Item = bool>) -> Self {
        let mut v = Self::new(capacity);
        bits.into_iter().for_each(|b| v.push(b));
        v
    }

    pub fn push(&mut self, correct: bool) {
        if self.bits.len() == self.capacity {
            self.bits.pop_front();
        }
        self.bits.push_back(correct);
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        self.bits.iter().copied()
    }
}

/// Joint correctness counts of a component pair: `n11` both correct, `n10`
/// only the first correct, `n01` only the second, `n00` both wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JointCounts {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl JointCounts {
    pub fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        Self { n11, n10, n01, n00 }
    }

    pub fn n(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    fn require_nonempty(&self) -> Result<f64> {
        match self.n() {
            0 => Err(Error::UndefinedSimilarity("no overlapping oracle outputs".into())),
            n => Ok(n as f64),
        }
    }

    fn identical(&self) -> bool {
        self.n10 == 0 && self.n01 == 0
    }
}

/// Counts over the aligned overlap of the most recent `min(|a|, |b|)`
/// entries.
pub fn joint_counts(a: &OracleVector, b: &OracleVector) -> Result<JointCounts> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedSimilarity("empty oracle vector".into()));
    }
    let mut c = JointCounts::default();
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match (x, y) {
            (true, true) => c.n11 += 1,
            (true, false) => c.n10 += 1,
            (false, true) => c.n01 += 1,
            (false, false) => c.n00 += 1,
        }
    }
    Ok(c)
}

/// Double fault: share of samples both components got wrong.
pub fn df_measure(c: &JointCounts) -> Result<f64> {
    let n = c.require_nonempty()?;
    Ok(c.n00 as f64 / n)
}

/// Disagreement: share of samples where exactly one is correct.
pub fn dm_measure(c: &JointCounts) -> Result<f64> {
    let n = c.require_nonempty()?;
    Ok((c.n10 + c.n01) as f64 / n)
}

fn degenerate(c: &JointCounts) -> f64 {
    if c.identical() {
        1.0
    } else {
        0.0
    }
}

pub fn q_statistic(c: &JointCounts) -> Result<f64> {
    c.require_nonempty()?;
    let agree = (c.n11 * c.n00) as f64;
    let disagree = (c.n01 * c.n10) as f64;
    let den = agree + disagree;
    if den == 0.0 {
        return Ok(degenerate(c));
    }
    Ok((agree - disagree) / den)
}

/// Correlation coefficient of the two oracle outputs.
pub fn cp_measure(c: &JointCounts) -> Result<f64> {
    c.require_nonempty()?;
    let (n11, n10, n01, n00) = (c.n11 as f64, c.n10 as f64, c.n01 as f64, c.n00 as f64);
    let den = ((n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00)).sqrt();
    if den == 0.0 {
        return Ok(degenerate(c));
    }
    Ok(((n11 * n00 - n01 * n10) / den).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeasureKind {
    #[default]
    DoubleFault,
    Disagreement,
    QStatistic,
    Correlation,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [
        MeasureKind::DoubleFault,
        MeasureKind::Disagreement,
        MeasureKind::QStatistic,
        MeasureKind::Correlation,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            MeasureKind::DoubleFault => "DF",
            MeasureKind::Disagreement => "DM",
            MeasureKind::QStatistic => "Q",
            MeasureKind::Correlation => "CP",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DF" => Ok(MeasureKind::DoubleFault),
            "DM" => Ok(MeasureKind::Disagreement),
            "Q" => Ok(MeasureKind::QStatistic),
            "CP" => Ok(MeasureKind::Correlation),
            _ => Err(Error::config(format!(
                "unknown diversity measure {s:?} (expected DF, DM, Q or CP)"
            ))),
        }
    }
}

/// Maps a diversity measure onto a similarity in `[0, 1]`; higher means
/// more redundant.
pub fn similarity(kind: MeasureKind, c: &JointCounts) -> Result<f64> {
    Ok(match kind {
        MeasureKind::DoubleFault => df_measure(c)?,
        MeasureKind::Disagreement => 1.0 - dm_measure(c)?,
        MeasureKind::QStatistic => (q_statistic(c)? + 1.0) / 2.0,
        MeasureKind::Correlation => (cp_measure(c)? + 1.0) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(bits: &[u8]) -> OracleVector {
        OracleVector::from_bits(50, bits.iter().map(|&b| b == 1))
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut v = OracleVector::new(3);
        for b in [true, false, true, true] {
            v.push(b);
        }
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![false, true, true]);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn joint_counts_by_hand() {
        let c = joint_counts(&ov(&[1, 1, 0, 0]), &ov(&[1, 0, 0, 1])).unwrap();
        assert_eq!(c, JointCounts::new(1, 1, 1, 1));
        let c = joint_counts(&ov(&[1, 1, 1, 1, 1]), &ov(&[0, 0, 0, 0, 0])).unwrap();
        assert_eq!(c, JointCounts::new(0, 5, 0, 0));
        let c = joint_counts(&ov(&[1, 0, 1]), &ov(&[1, 0, 1])).unwrap();
        assert_eq!((c.n10, c.n01), (0, 0));
    }

    #[test]
    fn joint_counts_align_recent_suffix() {
        // b is shorter: only the last two entries of a are compared
        let c = joint_counts(&ov(&[0, 0, 1, 0]), &ov(&[1, 0])).unwrap();
        assert_eq!(c, JointCounts::new(1, 0, 0, 1));
    }

    #[test]
    fn empty_oracle_is_undefined() {
        assert!(matches!(
            joint_counts(&ov(&[]), &ov(&[1])),
            Err(Error::UndefinedSimilarity(_))
        ));
        let zero = JointCounts::default();
        assert!(df_measure(&zero).is_err());
        assert!(dm_measure(&zero).is_err());
        assert!(q_statistic(&zero).is_err());
        assert!(cp_measure(&zero).is_err());
    }

    #[test]
    fn measures_on_uniform_table() {
        let c = JointCounts::new(1, 1, 1, 1);
        assert_eq!(df_measure(&c).unwrap(), 0.25);
        assert_eq!(dm_measure(&c).unwrap(), 0.5);
        assert_eq!(q_statistic(&c).unwrap(), 0.0);
        assert_eq!(cp_measure(&c).unwrap(), 0.0);
        assert_eq!(similarity(MeasureKind::DoubleFault, &c).unwrap(), 0.25);
    }

    #[test]
    fn measures_on_extreme_tables() {
        assert_eq!(df_measure(&JointCounts::new(4, 0, 0, 0)).unwrap(), 0.0);
        assert_eq!(df_measure(&JointCounts::new(0, 0, 0, 4)).unwrap(), 1.0);
        assert_eq!(dm_measure(&JointCounts::new(2, 0, 0, 2)).unwrap(), 0.0);
        assert_eq!(dm_measure(&JointCounts::new(0, 2, 2, 0)).unwrap(), 1.0);
        assert_eq!(cp_measure(&JointCounts::new(2, 0, 0, 2)).unwrap(), 1.0);
        assert_eq!(cp_measure(&JointCounts::new(0, 2, 2, 0)).unwrap(), -1.0);
        // identical all-correct vectors: zero denominators, identical rule
        let same = JointCounts::new(5, 0, 0, 0);
        assert_eq!(q_statistic(&same).unwrap(), 1.0);
        assert_eq!(cp_measure(&same).unwrap(), 1.0);
        // zero denominator without identical behaviour
        assert_eq!(q_statistic(&JointCounts::new(0, 5, 0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn similarity_mappings() {
        let same = JointCounts::new(2, 0, 0, 2);
        assert_eq!(similarity(MeasureKind::Disagreement, &same).unwrap(), 1.0);
        assert_eq!(similarity(MeasureKind::QStatistic, &same).unwrap(), 1.0);
        assert_eq!(similarity(MeasureKind::Correlation, &same).unwrap(), 1.0);
        let opposite = JointCounts::new(0, 2, 2, 0);
        assert_eq!(similarity(MeasureKind::Correlation, &opposite).unwrap(), 0.0);
        assert_eq!(similarity(MeasureKind::Disagreement, &opposite).unwrap(), 0.0);
    }

    #[test]
    fn independent_oracles_have_neutral_q() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let n = 200_000;
        let a = OracleVector::from_bits(n, (0..n).map(|_| rng.gen::<f64>() < 0.7));
        let b = OracleVector::from_bits(n, (0..n).map(|_| rng.gen::<f64>() < 0.6));
        let c = joint_counts(&a, &b).unwrap();
        assert!(q_statistic(&c).unwrap().abs() < 0.02);
        assert!((similarity(MeasureKind::QStatistic, &c).unwrap() - 0.5).abs() < 0.01);
        assert!(cp_measure(&c).unwrap().abs() < 0.01);
    }

    #[test]
    fn measure_names_round_trip() {
        for kind in MeasureKind::ALL {
            assert_eq!(kind.short_name().parse::<MeasureKind>().unwrap(), kind);
        }
        assert!("xx".parse::<MeasureKind>().is_err());
    }
}
