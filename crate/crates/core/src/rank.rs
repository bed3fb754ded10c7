//! Vertex ranks and their quantization into layers.
//!
//! A [`RankOracle`] evaluates `rank(v)` on demand from a seed, so explorers
//! only ever pay for the vertices they touch. Ranks are 64-bit fixed-point
//! values in `[0, 1)`; comparisons are exact integer comparisons, and
//! [`Rank::as_f64`] is only a view.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{vertex_out_of_range, Error, Result};
use crate::graph::Vertex;
use crate::seed::mix2;

/// A rank as the fixed-point fraction `value / 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rank(pub u64);

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

impl Rank {
    /// Nearest representable rank at or below `x`; `x >= 1` saturates to the
    /// largest rank.
    pub fn from_f64(x: f64) -> Result<Rank> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Input(format!("rank {x} outside [0,1]")));
        }
        if x >= 1.0 {
            return Ok(Rank(u64::MAX));
        }
        Ok(Rank((x * TWO_POW_64) as u64))
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_64
    }
}

/// Anything that assigns a rank to every vertex of `0..n`.
///
/// `rank_of` does not bounds-check; callers validate vertices against the
/// graph and the graph against `n()` first.
pub trait Ranking: Sync {
    fn n(&self) -> usize;
    fn rank_of(&self, v: Vertex) -> Rank;
}

/// How ranks are generated from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankMode {
    /// Independent uniform 64-bit ranks from a keyed mix of `(seed, v)`.
    Full,
    /// `k`-wise independent ranks: a random degree-`(k-1)` polynomial over a
    /// prime field evaluated at `v`.
    KWise { k: usize },
}

impl Default for RankMode {
    fn default() -> Self {
        RankMode::Full
    }
}

/// Default independence for `kwise` without an explicit `k`.
pub const DEFAULT_KWISE_K: usize = 4;

impl fmt::Display for RankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankMode::Full => f.write_str("full"),
            RankMode::KWise { k } => write!(f, "kwise:{k}"),
        }
    }
}

impl FromStr for RankMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "full" => Ok(RankMode::Full),
            "kwise" => Ok(RankMode::KWise { k: DEFAULT_KWISE_K }),
            other => {
                let k = other
                    .strip_prefix("kwise:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| format!("unknown rank mode {other:?} (expected `full` or `kwise:<k>`)"))?;
                if k == 0 {
                    return Err("kwise needs k >= 1".into());
                }
                Ok(RankMode::KWise { k })
            }
        }
    }
}

impl Serialize for RankMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RankMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
enum Source {
    Full { key: u64 },
    KWise { coeffs: Vec<u64>, prime: u64 },
    Table(Arc<[Rank]>),
}

/// Seeded, on-demand rank assignment over the vertex domain `0..n`.
#[derive(Debug, Clone)]
pub struct RankOracle {
    seed: u64,
    n: usize,
    source: Source,
}

impl RankOracle {
    pub fn new(seed: u64, mode: RankMode, n: usize) -> Result<RankOracle> {
        let source = match mode {
            RankMode::Full => Source::Full { key: seed },
            RankMode::KWise { k } => {
                if k == 0 {
                    return Err(Error::Parameter("kwise needs k >= 1".into()));
                }
                let prime = next_prime_above(n.max(1 << 31) as u64);
                // Rejection keeps the coefficients exactly uniform on [0, p).
                let zone = u64::MAX - u64::MAX % prime;
                let mut counter = 0u64;
                let coeffs = (0..k)
                    .map(|_| loop {
                        let x = mix2(seed, counter);
                        counter += 1;
                        if x < zone {
                            break x % prime;
                        }
                    })
                    .collect();
                Source::KWise { coeffs, prime }
            }
        };
        Ok(RankOracle { seed, n, source })
    }

    pub fn full(seed: u64, n: usize) -> RankOracle {
        RankOracle { seed, n, source: Source::Full { key: seed } }
    }

    /// Fixed ranks, one per vertex. Every value must lie in `[0, 1]`.
    pub fn from_ranks(ranks: &[f64]) -> Result<RankOracle> {
        let table = ranks.iter().map(|&x| Rank::from_f64(x)).collect::<Result<Vec<_>>>()?;
        Ok(RankOracle { seed: 0, n: ranks.len(), source: Source::Table(table.into()) })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The generating mode, or `None` for explicit rank tables.
    pub fn mode(&self) -> Option<RankMode> {
        match &self.source {
            Source::Full { .. } => Some(RankMode::Full),
            Source::KWise { coeffs, .. } => Some(RankMode::KWise { k: coeffs.len() }),
            Source::Table(_) => None,
        }
    }

    /// The field prime in `kwise` mode.
    pub fn prime(&self) -> Option<u64> {
        match self.source {
            Source::KWise { prime, .. } => Some(prime),
            _ => None,
        }
    }

    /// `r(v)` as a real in `[0, 1]`.
    pub fn rank(&self, v: Vertex) -> Result<f64> {
        self.rank_key(v).map(Rank::as_f64)
    }

    pub fn rank_key(&self, v: Vertex) -> Result<Rank> {
        if v >= self.n {
            return Err(vertex_out_of_range(v, self.n));
        }
        Ok(self.rank_of(v))
    }

    /// `f(v)`: the layer of `v`'s rank.
    pub fn layer(&self, q: Quantizer, v: Vertex) -> Result<u32> {
        self.rank_key(v).map(|r| q.layer_of(r))
    }

    /// Evaluates every rank once.
    pub fn materialize(&self) -> RankTable {
        RankTable((0..self.n).map(|v| self.rank_of(v)).collect())
    }
}

impl Ranking for RankOracle {
    #[inline]
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn rank_of(&self, v: Vertex) -> Rank {
        match &self.source {
            Source::Full { key } => Rank(mix2(*key, v as u64)),
            Source::KWise { coeffs, prime } => {
                let p = *prime as u128;
                let x = v as u128 % p;
                let h = coeffs.iter().rev().fold(0u128, |acc, &a| (acc * x + a as u128) % p);
                Rank(((h << 64) / p) as u64)
            }
            Source::Table(t) => t[v],
        }
    }
}

/// Precomputed ranks for all vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable(pub Vec<Rank>);

impl Ranking for RankTable {
    #[inline]
    fn n(&self) -> usize {
        self.0.len()
    }

    #[inline]
    fn rank_of(&self, v: Vertex) -> Rank {
        self.0[v]
    }
}

/// Partition of `[0, 1]` into `L` equal segments `I_1..I_L`, with
/// `I_l = [(l-1)/L, l/L)` and the last segment closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quantizer {
    l: u32,
}

impl Quantizer {
    pub fn new(l: usize) -> Result<Quantizer> {
        if l == 0 || l > u32::MAX as usize {
            return Err(Error::Parameter(format!("layer count must be in 1..=2^32-1, got {l}")));
        }
        Ok(Quantizer { l: l as u32 })
    }

    /// Quantizer with `L = 4(d+1)` layers.
    pub fn for_degree(d: usize) -> Quantizer {
        Quantizer { l: default_l(d) as u32 }
    }

    #[inline]
    pub fn layers(self) -> u32 {
        self.l
    }

    /// Layer in `1..=L` of `x ∈ [0, 1]`.
    pub fn quantize(self, x: f64) -> Result<u32> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Input(format!("cannot quantize {x}: outside [0,1]")));
        }
        Ok(self.quantize_unchecked(x))
    }

    #[inline]
    fn quantize_unchecked(self, x: f64) -> u32 {
        ((x * self.l as f64).floor() as u32 + 1).min(self.l)
    }

    /// Layer of a rank; equal to `quantize(rank.as_f64())`.
    #[inline]
    pub fn layer_of(self, r: Rank) -> u32 {
        self.quantize_unchecked(r.as_f64())
    }
}

pub fn quantize(q: Quantizer, x: f64) -> Result<u32> {
    q.quantize(x)
}

/// `L = 4(d+1)`.
pub fn default_l(d: usize) -> usize {
    4 * (d + 1)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; these bases are exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime_above(x: u64) -> u64 {
    let mut c = x + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}
