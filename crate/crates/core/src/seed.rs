//! Seed handling: 64-bit mixing, child-seed derivation and parsing of
//! decimal / `0x` hexadecimal seed strings.

use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. A bijection on `u64` with full avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed mix of two words; used as a counter-mode PRF `(key, counter) -> u64`.
#[inline]
pub fn mix2(key: u64, counter: u64) -> u64 {
    let k = mix64(key ^ GOLDEN_GAMMA);
    let x = mix64(counter.wrapping_add(GOLDEN_GAMMA) ^ k);
    mix64(x ^ k.rotate_left(29))
}

/// Seed of the `index`-th independent child stream of `base`.
///
/// Trial `i` of an experiment draws everything from `child_seed(base, i)`, so
/// no trial ever reads another trial's stream.
#[inline]
pub fn child_seed(base: u64, index: u64) -> u64 {
    mix2(base ^ 0x5eed_c41d_0000_0000, index)
}

/// A 64-bit seed. Parses from decimal or `0x`-prefixed hexadecimal and
/// (de)serializes from either a JSON number or such a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse::<u64>(),
        };
        parsed
            .map(Seed)
            .map_err(|e| format!("invalid seed {s:?}: {e}"))
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = Seed;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a u64 or a decimal/0x-hex string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Seed, E> {
                Ok(Seed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Seed, E> {
                u64::try_from(v)
                    .map(Seed)
                    .map_err(|_| E::custom("seed must be non-negative"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Seed, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(Visitor)
    }
}
