use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement histogram keyed by basis index (qubit 0 = least significant
/// bit).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRecord", into = "CountsRecord")]
pub struct Counts {
    width: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
}

#[derive(Serialize, Deserialize)]
struct CountsRecord {
    width: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl From<Counts> for CountsRecord {
    fn from(c: Counts) -> Self {
        CountsRecord {
            width: c.width,
            shots: c.shots,
            counts: c.counts.iter().map(|(&k, &v)| (c.bitstring(k), v)).collect(),
        }
    }
}

impl TryFrom<CountsRecord> for Counts {
    type Error = Error;

    fn try_from(r: CountsRecord) -> Result<Self> {
        let mut c = Counts::new(r.width);
        for (k, v) in r.counts {
            c.add(c.parse_bitstring(&k)?, v);
        }
        if c.shots != r.shots {
            return Err(Error::Mismatch(format!("counts sum to {} but shots = {}", c.shots, r.shots)));
        }
        Ok(c)
    }
}

impl Counts {
    pub fn new(width: usize) -> Counts {
        assert!(width <= 63, "counts support at most 63 qubits");
        Counts { width, counts: BTreeMap::new(), shots: 0 }
    }

    pub fn from_pairs(width: usize, pairs: impl IntoIterator<Item = (u64, u64)>) -> Counts {
        let mut c = Counts::new(width);
        for (k, v) in pairs {
            c.add(k, v);
        }
        c
    }

    /// Parse `{"0010": 50, ...}`-style bitstring pairs.
    pub fn from_bitstrings<'a>(width: usize, pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Counts> {
        let mut c = Counts::new(width);
        for (s, v) in pairs {
            let k = c.parse_bitstring(s)?;
            c.add(k, v);
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn add(&mut self, index: u64, n: u64) {
        assert!(index < (1u64 << self.width), "outcome {index} exceeds width {}", self.width);
        if n > 0 {
            *self.counts.entry(index).or_insert(0) += n;
            self.shots += n;
        }
    }

    pub fn merge(&mut self, other: &Counts) {
        assert_eq!(self.width, other.width);
        for (&k, &v) in &other.counts {
            self.add(k, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Most significant qubit first, qubit 0 rightmost.
    pub fn bitstring(&self, index: u64) -> String {
        (0..self.width).rev().map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn parse_bitstring(&self, s: &str) -> Result<u64> {
        if s.len() != self.width || !s.chars().all(|ch| ch == '0' || ch == '1') {
            return Err(Error::Parse { line: 0, msg: format!("bad bitstring '{s}' for width {}", self.width) });
        }
        Ok(u64::from_str_radix(s, 2).unwrap_or(0))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.width];
        if self.shots > 0 {
            for (&k, &n) in &self.counts {
                v[k as usize] = n as f64 / self.shots as f64;
            }
        }
        v
    }
}
