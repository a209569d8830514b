//! Seeded Toeplitz hashing over GF(2).
//!
//! A seed of `d + k − 1` bits defines the `k × d` Toeplitz matrix
//! `T[i][j] = s[i − j + d − 1]`; the hash of a `d`-bit input is `T·x`. The
//! family is linear and 2-universal: for `x ≠ x′` exactly a `2^{-k}`
//! fraction of seeds collide. It serves both privacy amplification and the
//! random-binning encoders.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::{StreamId, StreamRng};

/// Largest accepted input length in bits.
pub const MAX_DOMAIN_BITS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashSpec {
    domain_bits: usize,
    range_bits: usize,
}

impl HashSpec {
    pub fn new(domain_bits: usize, range_bits: usize) -> Result<Self> {
        if domain_bits == 0 || domain_bits > MAX_DOMAIN_BITS {
            return Err(Error::usage(format!(
                "hash domain of {domain_bits} bits outside 1..={MAX_DOMAIN_BITS}"
            )));
        }
        if range_bits > MAX_DOMAIN_BITS {
            return Err(Error::usage(format!("hash range of {range_bits} bits")));
        }
        Ok(Self {
            domain_bits,
            range_bits,
        })
    }

    pub fn domain_bits(&self) -> usize {
        self.domain_bits
    }

    pub fn range_bits(&self) -> usize {
        self.range_bits
    }

    /// `d + k − 1`; a zero-bit range needs no seed at all.
    pub fn seed_bits(&self) -> usize {
        if self.range_bits == 0 {
            0
        } else {
            self.domain_bits + self.range_bits - 1
        }
    }

    /// More output than input bits cannot extract randomness.
    pub fn expands(&self) -> bool {
        self.range_bits > self.domain_bits
    }
}

/// Where a seed came from, enough to redraw it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub stream: StreamId,
    pub counter: u128,
}

#[derive(Clone, PartialEq, Eq)]
pub struct HashSeed {
    spec: HashSpec,
    bits: Bits,
    provenance: Option<SeedProvenance>,
    rows: Vec<Bits>,
}

impl fmt::Debug for HashSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HashSeed")
            .field("spec", &self.spec)
            .field("seed", &self.to_string())
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl HashSeed {
    pub fn from_bits(spec: HashSpec, bits: Bits) -> Result<Self> {
        if bits.len() != spec.seed_bits() {
            return Err(Error::usage(format!(
                "seed of {} bits for a spec needing {}",
                bits.len(),
                spec.seed_bits()
            )));
        }
        let d = spec.domain_bits;
        let rows = (0..spec.range_bits)
            .map(|i| {
                let mut row = Bits::zeros(d);
                for j in 0..d {
                    if bits.get(i + d - 1 - j) {
                        row.set(j, true);
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            spec,
            bits,
            provenance: None,
            rows,
        })
    }

    /// Seed packed into an integer, bit `0` of the seed being the most
    /// significant; used by exhaustive sweeps over all seeds.
    pub fn from_index(spec: HashSpec, index: u64) -> Result<Self> {
        if spec.seed_bits() > 64 {
            return Err(Error::usage("seed index form needs at most 64 seed bits"));
        }
        Self::from_bits(spec, Bits::from_u64(index, spec.seed_bits()))
    }

    /// The `d × d` identity matrix: only `s[d−1]` is set.
    pub fn identity(domain_bits: usize) -> Result<Self> {
        let spec = HashSpec::new(domain_bits, domain_bits)?;
        let mut bits = Bits::zeros(spec.seed_bits());
        bits.set(domain_bits - 1, true);
        Self::from_bits(spec, bits)
    }

    /// Redraw a seed from its provenance.
    pub fn replay(spec: HashSpec, provenance: SeedProvenance) -> Self {
        let mut rng = StreamRng::open(provenance.stream, provenance.counter);
        draw_seed(&mut rng, spec)
    }

    pub fn spec(&self) -> HashSpec {
        self.spec
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn provenance(&self) -> Option<SeedProvenance> {
        self.provenance
    }
}

/// Draw uniformly random seed bits for `spec`.
pub fn draw_seed(rng: &mut StreamRng, spec: HashSpec) -> HashSeed {
    let provenance = SeedProvenance {
        stream: rng.id(),
        counter: rng.counter(),
    };
    let n = spec.seed_bits();
    let mut bits = Bits::zeros(n);
    let mut word = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        bits.set(i, (word >> (63 - i % 64)) & 1 == 1);
    }
    let mut seed = HashSeed::from_bits(spec, bits).expect("seed length matches spec");
    seed.provenance = Some(provenance);
    seed
}

/// `T·x` over GF(2), `k` output bits.
pub fn hash_eval(seed: &HashSeed, input: &Bits) -> Result<Bits> {
    if input.len() != seed.spec.domain_bits {
        return Err(Error::usage(format!(
            "hash input of {} bits, expected {}",
            input.len(),
            seed.spec.domain_bits
        )));
    }
    let mut out = Bits::zeros(seed.spec.range_bits);
    for (i, row) in seed.rows.iter().enumerate() {
        if row.dot(input) {
            out.set(i, true);
        }
    }
    Ok(out)
}

/// Hash value as an index in `[0, 2^k)`, for `k ≤ 64`.
pub fn hash_index(seed: &HashSeed, input: &Bits) -> Result<u64> {
    hash_eval(seed, input)?
        .to_u64()
        .ok_or_else(|| Error::usage("hash index needs at most 64 output bits"))
}

const SEED_PREFIX: &str = "tpl1:";

impl fmt::Display for HashSeed {
    /// `tpl1:<d>,<k>:<hex>`, the seed bits packed big-endian.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{SEED_PREFIX}{},{}:{}",
            self.spec.domain_bits,
            self.spec.range_bits,
            self.bits.to_hex()
        )
    }
}

impl FromStr for HashSeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix(SEED_PREFIX)
            .ok_or_else(|| Error::usage(format!("seed must start with {SEED_PREFIX:?}")))?;
        let (header, payload) = rest
            .split_once(':')
            .ok_or_else(|| Error::usage("seed missing ':' after header"))?;
        let (d, k) = header
            .split_once(',')
            .ok_or_else(|| Error::usage("seed header must be 'd,k'"))?;
        let parse = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::usage(format!("bad seed header field {v:?}")))
        };
        let spec = HashSpec::new(parse(d)?, parse(k)?)?;
        let bytes = hex::decode(payload).map_err(|e| Error::usage(format!("seed hex: {e}")))?;
        HashSeed::from_bits(spec, Bits::from_bytes(&bytes, spec.seed_bits())?)
    }
}

impl Serialize for HashSeed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Bits per symbol when packing blocks over an alphabet of `alphabet`
/// letters: `⌈log₂ |X|⌉`, and one bit for a single-letter alphabet so the
/// hash domain is never empty.
pub fn symbol_width(alphabet: usize) -> usize {
    assert!(alphabet > 0);
    (usize::BITS - (alphabet - 1).leading_zeros()).max(1) as usize
}

/// Fixed-width big-endian packing of a symbol sequence; injective.
pub fn encode_symbol_block(symbols: &[usize], alphabet: usize) -> Result<Bits> {
    if alphabet == 0 {
        return Err(Error::usage("empty alphabet"));
    }
    let w = symbol_width(alphabet);
    let mut out = Bits::zeros(w * symbols.len());
    for (pos, &s) in symbols.iter().enumerate() {
        if s >= alphabet {
            return Err(Error::usage(format!(
                "symbol {s} at position {pos} outside alphabet of size {alphabet}"
            )));
        }
        for b in 0..w {
            out.set(pos * w + b, (s >> (w - 1 - b)) & 1 == 1);
        }
    }
    Ok(out)
}

/// Inverse of [`encode_symbol_block`].
pub fn decode_symbol_block(bits: &Bits, alphabet: usize) -> Result<Vec<usize>> {
    let w = symbol_width(alphabet);
    if !bits.len().is_multiple_of(w) {
        return Err(Error::usage("bit length is not a multiple of the symbol width"));
    }
    (0..bits.len() / w)
        .map(|pos| {
            let s = (0..w).fold(0usize, |acc, b| (acc << 1) | bits.get(pos * w + b) as usize);
            if s >= alphabet {
                Err(Error::usage(format!("decoded symbol {s} outside alphabet")))
            } else {
                Ok(s)
            }
        })
        .collect()
}
