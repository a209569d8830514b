//! Protocol sessions: interactive slicing (`P1`), the one-way protocol on
//! the spectrum of `P_X` with optional 1-bit feedback (`P2`), and hybrid
//! randomization between two configurations.

mod montecarlo;
mod params;
mod session;

pub use montecarlo::{monte_carlo, monte_carlo_hybrid, monte_carlo_traced, McReport};
pub use params::{params_from_theorem4, Theorem4Params};
pub use session::{hybrid_run, recompute_ky, Code, Protocol};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::reconciliation::{SliceSpec, DEFAULT_DECODE_CAP};
use crate::rng::StreamId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Interactive slicing of `h(x|y)` with ACK/NACK rounds.
    P1,
    /// One-way slicing of `−log p(x)`; high secrecy.
    P2Secrecy,
    /// `P2` plus a feedback bit that replaces the key by a constant when
    /// the decoding-error event is flagged; high reliability.
    P2Reliability,
}

impl Variant {
    pub fn is_p2(self) -> bool {
        !matches!(self, Variant::P1)
    }

    pub fn feedback(self) -> bool {
        matches!(self, Variant::P2Reliability)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub slices: SliceSpec,
    pub gamma: f64,
    pub lambda: f64,
    pub key_bits: usize,
    pub variant: Variant,
    pub decode_cap: usize,
}

impl SessionConfig {
    pub fn new(slices: SliceSpec, gamma: f64, lambda: f64, key_bits: usize, variant: Variant) -> Result<Self> {
        let c = Self {
            slices,
            gamma,
            lambda,
            key_bits,
            variant,
            decode_cap: DEFAULT_DECODE_CAP,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_decode_cap(mut self, cap: usize) -> Self {
        self.decode_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::usage(format!("γ must be positive, got {}", self.gamma)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::usage(format!("λ must be nonnegative, got {}", self.lambda)));
        }
        if self.variant.is_p2() && self.lambda > self.slices.lambda_min() + 1e-12 {
            return Err(Error::usage(format!(
                "λ = {} exceeds λ_min = {} for the one-way protocol",
                self.lambda,
                self.slices.lambda_min()
            )));
        }
        if self.decode_cap == 0 {
            return Err(Error::usage("decode cap must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    XToY,
    YToX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageKind {
    Bin,
    Ack,
    Nack,
    Seed,
    SliceIndex,
    FeedbackBit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub round: usize,
    pub dir: Direction,
    pub kind: MessageKind,
    pub payload: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub messages: Vec<Message>,
    /// Stream the reconciliation code was drawn from, when drawn from a
    /// session generator.
    pub code_stream: Option<StreamId>,
    /// `Some(true)` when a hybrid run picked its first configuration.
    pub hybrid_first: Option<bool>,
}

impl Transcript {
    pub(crate) fn push(&mut self, round: usize, dir: Direction, kind: MessageKind, payload: Bits) {
        self.messages.push(Message {
            round,
            dir,
            kind,
            payload,
        });
    }

    /// Bits physically sent, ACK/NACK and seed included.
    pub fn physical_bits(&self) -> usize {
        self.messages.iter().map(|m| m.payload.len()).sum()
    }

    /// `log₂` of the number of values the reconciliation transcript can
    /// take: bin, slice-index and feedback bits plus `log₂ j` for a stopped
    /// ACK/NACK sequence ending at round `j`, or `log₂(L+1)` when it ran out.
    /// The privacy-amplification seed is excluded.
    pub fn log_cardinality(&self, slice_count: usize) -> f64 {
        let payload: usize = self
            .messages
            .iter()
            .filter(|m| matches!(m.kind, MessageKind::Bin | MessageKind::SliceIndex | MessageKind::FeedbackBit))
            .map(|m| m.payload.len())
            .sum();
        let answers: Vec<_> = self
            .messages
            .iter()
            .filter(|m| matches!(m.kind, MessageKind::Ack | MessageKind::Nack))
            .collect();
        let stop = match answers.last() {
            None => 0.0,
            Some(m) if m.kind == MessageKind::Ack => (answers.len() as f64).log2(),
            Some(_) => ((slice_count + 1) as f64).log2(),
        };
        payload as f64 + stop
    }

    /// ACK/NACK sequence is `NACK*` followed by at most one ACK.
    pub fn answers_well_formed(&self) -> bool {
        let kinds: Vec<_> = self
            .messages
            .iter()
            .filter(|m| matches!(m.kind, MessageKind::Ack | MessageKind::Nack))
            .map(|m| m.kind)
            .collect();
        kinds.iter().rev().skip(1).all(|k| *k == MessageKind::Nack)
    }

    pub fn ends_with_seed(&self) -> bool {
        self.messages.last().is_some_and(|m| m.kind == MessageKind::Seed)
    }

    /// One JSON object per message.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let line = serde_json::json!({
                "round": m.round,
                "dir": m.dir,
                "kind": m.kind,
                "bits": m.payload.len(),
                "payload-hex": m.payload.to_hex(),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortCause {
    None,
    /// Observation outside the essential spectrum.
    T0,
    /// All rounds answered NACK without an ambiguous round.
    NoAck,
    /// Some round had several matching candidates and none was accepted.
    DecodeAmbiguity,
    /// One-way decoding found no candidate.
    NoCandidate,
    /// Candidate enumeration exceeded the decode cap.
    DecodeCap,
    /// One-way protocol: slice index with probability below `1/L²`.
    RareSlice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub key_x: Option<Bits>,
    pub key_y: Option<Bits>,
    /// Round of the ACK, or the last round reached.
    pub stop_round: usize,
    pub transcript: Transcript,
    pub abort: AbortCause,
    /// Second party's estimate of `X`.
    pub x_hat: Option<Vec<usize>>,
    /// Slice of the observation: of `h(x|y)` for `P1`, of `−log p(x)` for `P2`.
    pub slice: usize,
    /// Feedback bit raised: both keys replaced by the constant key.
    pub constant_key: bool,
}

impl SessionOutcome {
    pub fn agreed(&self) -> bool {
        matches!((&self.key_x, &self.key_y), (Some(a), Some(b)) if a == b)
    }

    /// Trace lines followed by one summary record.
    pub fn to_jsonl(&self, config_hash: &str) -> String {
        let mut out = self.transcript.to_jsonl();
        let summary = serde_json::json!({
            "summary": true,
            "key-x": self.key_x.as_ref().map(|k| k.to_hex()),
            "key-y": self.key_y.as_ref().map(|k| k.to_hex()),
            "abort": self.abort,
            "stop-round": self.stop_round,
            "config-hash": config_hash,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}
