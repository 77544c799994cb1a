//! ADWIN change detector over a stream of values in `[0, 1]`.
//!
//! The window is stored as an exponential histogram: row `i` holds buckets
//! summarising `2^i` consecutive values, at most `max_buckets` per row after
//! compression. After every insertion each bucket boundary is tested as a
//! split `W = W0 . W1`; while some split has
//! `|mean(W0) - mean(W1)| >= sqrt(ln(4 / delta') / 2m)` with
//! `m = 1 / (1/|W0| + 1/|W1|)` and `delta' = delta / |W|`, the oldest bucket
//! is dropped.

use std::collections::VecDeque;

use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.002;
pub const DEFAULT_MAX_BUCKETS: usize = 5;

#[derive(Debug, Clone, Copy)]
struct Bucket {
    sum: f64,
    size: u64,
}

#[derive(Debug, Clone)]
pub struct Adwin {
    delta: f64,
    max_buckets: usize,
    /// `rows[i]` holds buckets of size `2^i`, oldest at the front.
    rows: Vec<VecDeque<Bucket>>,
    width: u64,
    total: f64,
    detections: u64,
}

impl Default for Adwin {
    fn default() -> Self {
        Self::new(DEFAULT_DELTA).unwrap()
    }
}

impl Adwin {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_max_buckets(delta, DEFAULT_MAX_BUCKETS)
    }

    pub fn with_max_buckets(delta: f64, max_buckets: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config(format!("ADWIN delta {delta} outside (0, 1)")));
        }
        if max_buckets < 2 {
            return Err(Error::config("ADWIN needs at least 2 buckets per row"));
        }
        Ok(Self {
            delta,
            max_buckets,
            rows: Vec::new(),
            width: 0,
            total: 0.0,
            detections: 0,
        })
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.total / self.width as f64
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_buckets(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    pub fn detections(&self) -> u64 {
        self.detections
    }

    /// Inserts `value` and reports whether the window was cut.
    pub fn add(&mut self, value: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::contract(format!("ADWIN input {value} outside [0, 1]")));
        }
        self.insert(value);
        let mut cut = false;
        while self.find_cut() {
            self.drop_oldest();
            cut = true;
        }
        if cut {
            self.detections += 1;
        }
        Ok(cut)
    }

    fn insert(&mut self, value: f64) {
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_back(Bucket { sum: value, size: 1 });
        self.width += 1;
        self.total += value;

        let mut i = 0;
        while i < self.rows.len() && self.rows[i].len() > self.max_buckets {
            let a = self.rows[i].pop_front().unwrap();
            let b = self.rows[i].pop_front().unwrap();
            if i + 1 == self.rows.len() {
                self.rows.push(VecDeque::new());
            }
            self.rows[i + 1].push_back(Bucket {
                sum: a.sum + b.sum,
                size: a.size + b.size,
            });
            i += 1;
        }
    }

    fn drop_oldest(&mut self) {
        while let Some(last) = self.rows.last() {
            if last.is_empty() {
                self.rows.pop();
            } else {
                break;
            }
        }
        let Some(row) = self.rows.last_mut() else {
            return;
        };
        let b = row.pop_front().unwrap();
        self.width -= b.size;
        self.total -= b.sum;
        if row.is_empty() {
            self.rows.pop();
        }
    }

    fn find_cut(&self) -> bool {
        if self.width < 2 {
            return false;
        }
        let width = self.width as f64;
        let ln_term = (4.0 * width / self.delta).ln();
        let mut n0 = 0u64;
        let mut s0 = 0.0;
        for row in self.rows.iter().rev() {
            for b in row {
                n0 += b.size;
                s0 += b.sum;
                let n1 = self.width - n0;
                if n1 == 0 {
                    return false;
                }
                let (a, c) = (n0 as f64, n1 as f64);
                let diff = (s0 / a - (self.total - s0) / c).abs();
                let m = 1.0 / (1.0 / a + 1.0 / c);
                let eps = (ln_term / (2.0 * m)).sqrt();
                if diff >= eps {
                    return true;
                }
            }
        }
        false
    }
}
