//! Degree-3 multilinear polynomials over GF(2) without a constant term.
//!
//! Variables are 0-based in the API. The text format is 1-based:
//!
//! ```text
//! n 3
//! L 1
//! Q 1 2
//! C 1 2 3
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default upper bound on `n` for exhaustive gap enumeration.
pub const DEFAULT_GAP_LIMIT: usize = 24;

/// Hard ceiling imposed by the 64-bit input masks used during enumeration.
const MAX_VARIABLES: usize = 63;

/// A degree-3 polynomial `f: {0,1}^n -> {0,1}` with `f(0^n) = 0`.
///
/// Monomials are stored as sorted index tuples in three tiers, so equality and
/// serialization are canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyF2Deg3 {
    n: usize,
    linear: BTreeSet<usize>,
    quadratic: BTreeSet<[usize; 2]>,
    cubic: BTreeSet<[usize; 3]>,
}

/// One monomial of a [`PolyF2Deg3`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    Linear(usize),
    Quadratic([usize; 2]),
    Cubic([usize; 3]),
}

impl Monomial {
    pub fn variables(&self) -> &[usize] {
        match self {
            Monomial::Linear(i) => std::slice::from_ref(i),
            Monomial::Quadratic(v) => v,
            Monomial::Cubic(v) => v,
        }
    }

    pub fn degree(&self) -> usize {
        self.variables().len()
    }
}

impl PolyF2Deg3 {
    /// The zero polynomial on `n` variables.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> impl Iterator<Item = usize> + '_ {
        self.linear.iter().copied()
    }

    pub fn quadratic(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.quadratic.iter().copied()
    }

    pub fn cubic(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.cubic.iter().copied()
    }

    /// All monomials in canonical order: linear, then quadratic, then cubic.
    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.linear
            .iter()
            .map(|&i| Monomial::Linear(i))
            .chain(self.quadratic.iter().map(|&q| Monomial::Quadratic(q)))
            .chain(self.cubic.iter().map(|&c| Monomial::Cubic(c)))
    }

    pub fn monomial_count(&self) -> usize {
        self.linear.len() + self.quadratic.len() + self.cubic.len()
    }

    /// Adds `monomial` over GF(2): inserting a monomial already present
    /// cancels it.
    pub fn toggle(&mut self, monomial: &[usize]) -> Result<()> {
        let mut vars = monomial.to_vec();
        vars.sort_unstable();
        if vars.iter().any(|&v| v >= self.n) {
            return Err(Error::Argument(format!(
                "monomial {monomial:?} references a variable outside 0..{}",
                self.n
            )));
        }
        if vars.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!(
                "monomial {monomial:?} repeats a variable"
            )));
        }
        fn flip<T: Ord>(set: &mut BTreeSet<T>, item: T) {
            if !set.remove(&item) {
                set.insert(item);
            }
        }
        match vars.as_slice() {
            [a] => flip(&mut self.linear, *a),
            [a, b] => flip(&mut self.quadratic, [*a, *b]),
            [a, b, c] => flip(&mut self.cubic, [*a, *b, *c]),
            _ => {
                return Err(Error::Argument(format!(
                    "monomial degree must be 1, 2 or 3, got {}",
                    vars.len()
                )))
            }
        }
        Ok(())
    }

    /// Builder-style [`toggle`](Self::toggle).
    pub fn with(mut self, monomial: &[usize]) -> Result<Self> {
        self.toggle(monomial)?;
        Ok(self)
    }

    /// Evaluates `f(x)`.
    pub fn eval(&self, x: &[bool]) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::InputShape(format!(
                "expected {} input bits, got {}",
                self.n,
                x.len()
            )));
        }
        let mut acc = false;
        for m in self.monomials() {
            acc ^= m.variables().iter().all(|&v| x[v]);
        }
        Ok(acc)
    }

    /// `gap(f) = |f^-1(0)| - |f^-1(1)|` with the default enumeration limit.
    pub fn gap(&self) -> Result<i64> {
        self.gap_with_limit(DEFAULT_GAP_LIMIT)
    }

    /// Exact gap by Gray-code enumeration.
    ///
    /// Each step flips one variable and re-evaluates only the monomials that
    /// contain it.
    pub fn gap_with_limit(&self, limit: usize) -> Result<i64> {
        let limit = limit.min(MAX_VARIABLES);
        if self.n > limit {
            return Err(Error::ResourceLimit {
                what: "polynomial variable count",
                actual: self.n,
                limit,
            });
        }
        // partners[v]: for each monomial containing v, the mask of its other
        // variables. Flipping v toggles f by the number of partners fully set.
        let mut partners: Vec<Vec<u64>> = vec![Vec::new(); self.n];
        for m in self.monomials() {
            let vars = m.variables();
            for &v in vars {
                let mask = vars
                    .iter()
                    .filter(|&&u| u != v)
                    .fold(0u64, |acc, &u| acc | (1 << u));
                partners[v].push(mask);
            }
        }

        let mut x = 0u64;
        let mut value = false;
        let mut gap: i64 = 1;
        let total = 1u64 << self.n;
        for step in 1..total {
            let v = step.trailing_zeros() as usize;
            let toggles = partners[v].iter().filter(|&&p| x & p == p).count();
            value ^= toggles & 1 == 1;
            x ^= 1 << v;
            gap += if value { -1 } else { 1 };
        }
        Ok(gap)
    }

    /// Uniformly random polynomial from the family: every candidate monomial
    /// is included by an independent fair coin.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("variable count must be positive".into()));
        }
        let mut f = Self::zero(n);
        for m in candidate_monomials(n) {
            if rng.gen::<bool>() {
                f.toggle(m.variables())?;
            }
        }
        Ok(f)
    }

    /// Every polynomial on `n` variables, indexed by a bitmask over
    /// [`candidate_monomials`].
    pub fn all(n: usize) -> Result<Vec<Self>> {
        let candidates: Vec<_> = candidate_monomials(n).collect();
        if candidates.len() > 20 {
            return Err(Error::ResourceLimit {
                what: "candidate monomial count for exhaustive listing",
                actual: candidates.len(),
                limit: 20,
            });
        }
        let mut out = Vec::with_capacity(1 << candidates.len());
        for mask in 0u32..(1 << candidates.len()) {
            let mut f = Self::zero(n);
            for (bit, m) in candidates.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    f.toggle(m.variables())?;
                }
            }
            out.push(f);
        }
        Ok(out)
    }
}

/// The `C(n,1) + C(n,2) + C(n,3)` monomials a polynomial may contain, in
/// canonical order.
pub fn candidate_monomials(n: usize) -> impl Iterator<Item = Monomial> {
    let linear = (0..n).map(Monomial::Linear);
    let quadratic = (0..n).flat_map(move |i| (i + 1..n).map(move |j| Monomial::Quadratic([i, j])));
    let cubic = (0..n).flat_map(move |i| {
        (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| Monomial::Cubic([i, j, k])))
    });
    linear.chain(quadratic).chain(cubic)
}

/// `gap^2 >= 2^(n-1)`, i.e. `gap^2 / 2^(2n) >= 1 / 2^(n+1)`.
pub fn is_anticoncentrated(n: usize, gap: i64) -> bool {
    let sq = (gap as i128) * (gap as i128);
    sq >= 1i128 << (n - 1)
}

/// Fraction of `samples` random polynomials on `n` variables whose squared
/// normalized gap reaches `1/2^(n+1)`.
pub fn anticoncentration_fraction(n: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Argument("sample count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys = (0..samples)
        .map(|_| PolyF2Deg3::random_with(n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let hits = polys
        .par_iter()
        .map(|f| f.gap().map(|g| is_anticoncentrated(n, g) as usize))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(hits as f64 / samples as f64)
}

/// Same fraction over the full polynomial population (small `n` only).
pub fn anticoncentration_exhaustive(n: usize) -> Result<f64> {
    let all = PolyF2Deg3::all(n)?;
    let hits = all
        .iter()
        .map(|f| f.gap().map(|g| is_anticoncentrated(n, g) as usize))
        .sum::<Result<usize>>()?;
    Ok(hits as f64 / all.len() as f64)
}

impl fmt::Display for PolyF2Deg3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        for i in &self.linear {
            writeln!(f, "L {}", i + 1)?;
        }
        for [a, b] in &self.quadratic {
            writeln!(f, "Q {} {}", a + 1, b + 1)?;
        }
        for [a, b, c] in &self.cubic {
            writeln!(f, "C {} {} {}", a + 1, b + 1, c + 1)?;
        }
        Ok(())
    }
}

impl FromStr for PolyF2Deg3 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut poly: Option<PolyF2Deg3> = None;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let tag = tokens.next().unwrap_or_default();
            let nums = tokens
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("line {}: bad integer {t:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let expected = match tag {
                "n" => 1,
                "L" => 1,
                "Q" => 2,
                "C" => 3,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown record {other:?}",
                        lineno + 1
                    )))
                }
            };
            if nums.len() != expected {
                return Err(Error::Parse(format!(
                    "line {}: {tag} takes {expected} integer(s)",
                    lineno + 1
                )));
            }
            if tag == "n" {
                if poly.is_some() {
                    return Err(Error::Parse(format!("line {}: duplicate header", lineno + 1)));
                }
                if nums[0] == 0 {
                    return Err(Error::Parse("variable count must be positive".into()));
                }
                poly = Some(PolyF2Deg3::zero(nums[0]));
                continue;
            }
            let p = poly
                .as_mut()
                .ok_or_else(|| Error::Parse("monomial before `n` header".into()))?;
            if nums.contains(&0) {
                return Err(Error::Parse(format!(
                    "line {}: indices are 1-based",
                    lineno + 1
                )));
            }
            let vars: Vec<usize> = nums.iter().map(|i| i - 1).collect();
            let mut sorted = vars.clone();
            sorted.sort_unstable();
            let already = match sorted.as_slice() {
                [a] => p.linear.contains(a),
                [a, b] => p.quadratic.contains(&[*a, *b]),
                [a, b, c] => p.cubic.contains(&[*a, *b, *c]),
                _ => false,
            };
            if already {
                return Err(Error::Parse(format!(
                    "line {}: duplicate monomial",
                    lineno + 1
                )));
            }
            p.toggle(&vars)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        poly.ok_or_else(|| Error::Parse("missing `n` header".into()))
    }
}
