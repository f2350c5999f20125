use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome bits in register order; character `i` is the `i`-th reported qubit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    /// Little-endian: bit `i` of `value` becomes position `i`.
    pub fn from_index(value: usize, len: usize) -> Self {
        Self((0..len).map(|i| value >> i & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_u8(&self) -> Vec<u8> {
        self.0.iter().map(|&b| b as u8).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A probability map over fixed-width bitstrings. Missing keys have
/// probability zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Distribution {
    width: usize,
    probs: BTreeMap<BitString, f64>,
}

impl Distribution {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            probs: BTreeMap::new(),
        }
    }

    pub fn point(bits: BitString) -> Self {
        let mut d = Self::new(bits.len());
        d.probs.insert(bits, 1.0);
        d
    }

    pub fn from_pairs(width: usize, pairs: impl IntoIterator<Item = (BitString, f64)>) -> Result<Self> {
        let mut d = Self::new(width);
        for (k, p) in pairs {
            d.add(k, p)?;
        }
        Ok(d)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Accumulates `p` onto `bits`.
    pub fn add(&mut self, bits: BitString, p: f64) -> Result<()> {
        if bits.len() != self.width {
            return Err(Error::InputShape(format!(
                "outcome {bits} has width {}, distribution has {}",
                bits.len(),
                self.width
            )));
        }
        if !(p >= 0.0) {
            return Err(Error::Argument(format!("negative probability {p} for {bits}")));
        }
        *self.probs.entry(bits).or_insert(0.0) += p;
        Ok(())
    }

    pub fn prob(&self, bits: &BitString) -> f64 {
        self.probs.get(bits).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, f64)> {
        self.probs.iter().map(|(k, &v)| (k, v))
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::DegeneratePostselection);
        }
        Ok(Self {
            width: self.width,
            probs: self.probs.iter().map(|(k, v)| (k.clone(), v / t)).collect(),
        })
    }

    /// Marginal over the listed positions, in that order.
    pub fn marginal(&self, positions: &[usize]) -> Result<Self> {
        if let Some(&p) = positions.iter().find(|&&p| p >= self.width) {
            return Err(Error::Argument(format!("position {p} outside width {}", self.width)));
        }
        let mut out = Self::new(positions.len());
        for (k, p) in self.iter() {
            out.add(BitString(positions.iter().map(|&i| k.0[i]).collect()), p)?;
        }
        Ok(out)
    }

    /// CSV with header `bitstring,probability`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitstring,probability\n");
        for (k, p) in self.iter() {
            s.push_str(&format!("{k},{p:.16e}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "bitstring,probability" => {}
            _ => return Err(Error::Parse("missing `bitstring,probability` header".into())),
        }
        let mut rows = Vec::new();
        for line in lines {
            let (k, p) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad CSV row {line:?}")))?;
            let bits: BitString = k.trim().parse()?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad probability {p:?}")))?;
            rows.push((bits, p));
        }
        let width = rows.first().map(|(k, _)| k.len()).unwrap_or(0);
        Self::from_pairs(width, rows)
    }
}
