//! Counter-based randomness with named, reproducible streams.
//!
//! Every random quantity in a session comes from a ChaCha20 stream keyed by
//! `(master seed, session index)` and selected by a stream number, so any
//! draw can be replayed from its [`StreamId`] and word counter regardless of
//! how many other sessions ran before it.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Purpose of a stream; the discriminant is the ChaCha stream number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamKind {
    Source = 1,
    Binning = 2,
    Seed = 3,
    Hybrid = 4,
}

/// Fully qualified stream: master seed, session, kind and sub-stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub master: u64,
    pub session: u64,
    pub kind: StreamKind,
    pub sub: u32,
}

impl StreamId {
    fn chacha_stream(&self) -> u64 {
        ((self.kind as u64) << 32) | self.sub as u64
    }
}

/// Per-session handle handing out independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRng {
    pub master: u64,
    pub session: u64,
}

impl SessionRng {
    pub fn new(master: u64, session: u64) -> Self {
        Self { master, session }
    }

    pub fn stream(&self, kind: StreamKind) -> StreamRng {
        self.sub_stream(kind, 0)
    }

    pub fn sub_stream(&self, kind: StreamKind, sub: u32) -> StreamRng {
        StreamRng::open(
            StreamId {
                master: self.master,
                session: self.session,
                kind,
                sub,
            },
            0,
        )
    }
}

/// A positioned ChaCha20 stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    id: StreamId,
    rng: ChaCha20Rng,
}

impl StreamRng {
    /// Open `id` positioned at 32-bit word `counter`.
    pub fn open(id: StreamId, counter: u128) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&id.master.to_le_bytes());
        key[8..16].copy_from_slice(&id.session.to_le_bytes());
        key[16..28].copy_from_slice(b"skago-rng-v1");
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(id.chacha_stream());
        rng.set_word_pos(counter);
        Self { id, rng }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Current position in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
