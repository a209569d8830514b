use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hashing::{draw_seed, encode_symbol_block, hash_eval, symbol_width, HashSeed, HashSpec};
use crate::prob::JointPmf;
use crate::reconciliation::{
    slice_of, sw_decode, sw_decode_mismatched, sw_encode, x_slice_of, BinStack, Decoded,
};
use crate::rng::{SessionRng, StreamId, StreamKind, StreamRng};
use crate::source::{Block, SourceModel};
use crate::spectrum::{block_spectrum, DensityKind, BOUNDARY_SNAP, DEFAULT_ATOM_CAP};

use super::{AbortCause, Direction, MessageKind, SessionConfig, SessionOutcome, Transcript};

/// Shared reconciliation code of one session.
#[derive(Debug, Clone)]
pub enum Code {
    /// One seed per round of the interactive protocol.
    Incremental(BinStack),
    /// One-way protocol: a seed for each slice that may be used, indexed
    /// from slice 1.
    PerSlice(Vec<Option<HashSeed>>),
}

/// A configured protocol over a source; runs sessions.
#[derive(Debug, Clone)]
pub struct Protocol {
    source: SourceModel,
    config: SessionConfig,
    alphabet: usize,
    domain_bits: usize,
    /// One-way protocol: `P_J(j)` for `j = 0..=L`.
    slice_probs: Vec<f64>,
    /// One-way protocol: single-letter `P_XY` for the decoder.
    decoder_model: Option<JointPmf>,
}

fn bit(v: bool) -> Bits {
    Bits::from_u64(v as u64, 1)
}

impl Protocol {
    pub fn new(source: SourceModel, config: SessionConfig) -> Result<Self> {
        config.validate()?;
        let (nx, _, _) = source.alphabet_sizes();
        let domain_bits = symbol_width(nx) * source.n();
        HashSpec::new(domain_bits, config.key_bits)?;
        let mut slice_probs = Vec::new();
        let mut decoder_model = None;
        if config.variant.is_p2() {
            if !source.z_is_constant() {
                return Err(Error::usage(
                    "the one-way protocol requires a constant eavesdropper observation",
                ));
            }
            let base = source
                .base()
                .ok_or_else(|| Error::usage("the one-way protocol requires an IID source"))?;
            let spectrum = block_spectrum(base, DensityKind::SelfInfo, source.n(), DEFAULT_ATOM_CAP)?;
            let s = &config.slices;
            let mut probs = vec![0.0; s.count() + 1];
            for (j, p) in probs.iter_mut().enumerate().skip(1) {
                *p = spectrum.prob_in(s.lambda(j), s.lambda(j) + s.delta());
            }
            probs[0] = (1.0 - probs.iter().sum::<f64>()).max(0.0);
            slice_probs = probs;
            let (nx, ny, _) = base.sizes();
            decoder_model = Some(JointPmf::from_xy(nx, ny, base.marginal_xy().table().to_vec())?);
        }
        Ok(Self {
            source,
            config,
            alphabet: nx,
            domain_bits,
            slice_probs,
            decoder_model,
        })
    }

    pub fn source(&self) -> &SourceModel {
        &self.source
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    /// Hash input length: packed block bits.
    pub fn domain_bits(&self) -> usize {
        self.domain_bits
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// One-way protocol: `P_J(j)`, `j = 0..=L`; empty for `P1`.
    pub fn slice_probs(&self) -> &[f64] {
        &self.slice_probs
    }

    /// One-way protocol: `j > 0` and `P_J(j) ≥ 1/L²`.
    pub fn is_good_slice(&self, j: usize) -> bool {
        let l = self.config.slices.count() as f64;
        j > 0 && self.slice_probs.get(j).is_some_and(|&p| p >= 1.0 / (l * l))
    }

    /// One-way protocol bin width for slice `j`: `⌈λ_j − λ⌉`.
    pub fn slice_bin_bits(&self, j: usize) -> usize {
        (self.config.slices.lambda(j) - self.config.lambda).ceil().max(0.0) as usize
    }

    /// One-way protocol: the single-letter `P_XY` used by the decoder.
    pub fn decoder_model(&self) -> Option<&JointPmf> {
        self.decoder_model.as_ref()
    }

    pub fn key_spec(&self) -> HashSpec {
        HashSpec::new(self.domain_bits, self.config.key_bits).expect("checked at construction")
    }

    /// Width of the published slice index, `⌈log₂(L+1)⌉`.
    pub fn slice_index_bits(&self) -> usize {
        let l = self.config.slices.count() + 1;
        (usize::BITS - (l - 1).leading_zeros()) as usize
    }

    /// Seed of slice `j` in the one-way code, drawn from its own sub-stream.
    pub fn draw_slice_seed(&self, rng: &SessionRng, j: usize) -> Result<HashSeed> {
        let spec = HashSpec::new(self.domain_bits, self.slice_bin_bits(j))?;
        Ok(draw_seed(&mut rng.sub_stream(StreamKind::Binning, j as u32), spec))
    }

    /// Full reconciliation code: every round for `P1`, every good slice for `P2`.
    pub fn draw_code(&self, rng: &SessionRng) -> Result<Code> {
        if self.config.variant.is_p2() {
            let seeds = (1..=self.config.slices.count())
                .map(|j| {
                    if self.is_good_slice(j) {
                        self.draw_slice_seed(rng, j).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Code::PerSlice(seeds))
        } else {
            let mut stream = rng.stream(StreamKind::Binning);
            Ok(Code::Incremental(BinStack::draw(
                &mut stream,
                &self.config.slices,
                self.config.gamma,
                self.domain_bits,
            )?))
        }
    }

    pub fn draw_pa_seed(&self, rng: &SessionRng) -> HashSeed {
        draw_seed(&mut rng.stream(StreamKind::Seed), self.key_spec())
    }

    /// Run one session with randomness from `rng`.
    pub fn run(&self, block: &Block, rng: &SessionRng) -> Result<SessionOutcome> {
        let pa = self.draw_pa_seed(rng);
        let code = if self.config.variant.is_p2() {
            // only the realized slice's seed is ever used
            let j = x_slice_of(&self.source, &self.config.slices, &block.x)?;
            let mut seeds = vec![None; self.config.slices.count()];
            if self.is_good_slice(j) {
                seeds[j - 1] = Some(self.draw_slice_seed(rng, j)?);
            }
            Code::PerSlice(seeds)
        } else {
            self.draw_code(rng)?
        };
        let mut out = self.run_with(block, &code, &pa)?;
        out.transcript.code_stream = Some(rng.stream(StreamKind::Binning).id());
        Ok(out)
    }

    /// Run one session with an explicit code and privacy-amplification seed.
    pub fn run_with(&self, block: &Block, code: &Code, pa: &HashSeed) -> Result<SessionOutcome> {
        if pa.spec() != self.key_spec() {
            return Err(Error::usage("privacy-amplification seed does not match the key spec"));
        }
        match code {
            Code::Incremental(stack) if !self.config.variant.is_p2() => self.run_p1(block, stack, pa),
            Code::PerSlice(seeds) if self.config.variant.is_p2() => self.run_p2(block, seeds, pa),
            _ => Err(Error::usage("code does not match the protocol variant")),
        }
    }

    fn run_p1(&self, block: &Block, stack: &BinStack, pa: &HashSeed) -> Result<SessionOutcome> {
        let slices = &self.config.slices;
        let x_bits = encode_symbol_block(&block.x, self.alphabet)?;
        let slice = slice_of(&self.source, slices, &block.x, &block.y)?;
        let mut transcript = Transcript::default();
        let mut bins = Vec::with_capacity(slices.count());
        let mut ambiguous = false;
        for l in 1..=slices.count() {
            let b = stack.encode(l, &x_bits)?;
            transcript.push(l, Direction::XToY, MessageKind::Bin, b.clone());
            bins.push(b);
            match sw_decode(&self.source, &block.y, &bins, l, slices, stack, self.config.decode_cap) {
                Ok(Decoded::Unique(x_hat)) => {
                    transcript.push(l, Direction::YToX, MessageKind::Ack, bit(true));
                    transcript.push(l, Direction::XToY, MessageKind::Seed, pa.bits().clone());
                    let key_y = hash_eval(pa, &encode_symbol_block(&x_hat, self.alphabet)?)?;
                    return Ok(SessionOutcome {
                        key_x: Some(hash_eval(pa, &x_bits)?),
                        key_y: Some(key_y),
                        stop_round: l,
                        transcript,
                        abort: AbortCause::None,
                        x_hat: Some(x_hat),
                        slice,
                        constant_key: false,
                    });
                }
                Ok(Decoded::Ambiguous(_)) => ambiguous = true,
                Ok(Decoded::NoMatch) => {}
                Err(Error::Resource { .. }) => {
                    transcript.push(l, Direction::YToX, MessageKind::Nack, bit(false));
                    return Ok(aborted(transcript, l, AbortCause::DecodeCap, slice));
                }
                Err(e) => return Err(e),
            }
            transcript.push(l, Direction::YToX, MessageKind::Nack, bit(false));
        }
        let cause = if slice == 0 {
            AbortCause::T0
        } else if ambiguous {
            AbortCause::DecodeAmbiguity
        } else {
            AbortCause::NoAck
        };
        Ok(aborted(transcript, slices.count(), cause, slice))
    }

    fn run_p2(&self, block: &Block, seeds: &[Option<HashSeed>], pa: &HashSeed) -> Result<SessionOutcome> {
        let slices = &self.config.slices;
        let x_bits = encode_symbol_block(&block.x, self.alphabet)?;
        let j = x_slice_of(&self.source, slices, &block.x)?;
        let mut transcript = Transcript::default();
        transcript.push(
            1,
            Direction::XToY,
            MessageKind::SliceIndex,
            Bits::from_u64(j as u64, self.slice_index_bits()),
        );
        if !self.is_good_slice(j) {
            let cause = if j == 0 { AbortCause::T0 } else { AbortCause::RareSlice };
            return Ok(aborted(transcript, 1, cause, j));
        }
        let seed = seeds
            .get(j - 1)
            .and_then(|s| s.as_ref())
            .ok_or_else(|| Error::usage(format!("code has no seed for slice {j}")))?;
        let bin = sw_encode(seed, &x_bits)?;
        transcript.push(1, Direction::XToY, MessageKind::Bin, bin.clone());
        let log_m = self.slice_bin_bits(j) as f64;
        let q = self.decoder_model.as_ref().expect("set for the one-way protocol");
        let (x_hat, cause) =
            match sw_decode_mismatched(q, &block.y, &bin, seed, log_m, self.config.gamma, self.config.decode_cap) {
                Ok(Decoded::Unique(x)) => (Some(x), AbortCause::None),
                Ok(Decoded::Ambiguous(_)) => (None, AbortCause::DecodeAmbiguity),
                Ok(Decoded::NoMatch) => (None, AbortCause::NoCandidate),
                Err(Error::Resource { .. }) => (None, AbortCause::DecodeCap),
                Err(e) => return Err(e),
            };
        let mut constant_key = false;
        if self.config.variant.feedback() {
            constant_key = match &x_hat {
                Some(x) => {
                    self.source.cond_log_likelihood(x, &block.y)? + BOUNDARY_SNAP >= log_m - self.config.gamma
                }
                None => true,
            };
            transcript.push(1, Direction::YToX, MessageKind::FeedbackBit, bit(constant_key));
        }
        transcript.push(1, Direction::XToY, MessageKind::Seed, pa.bits().clone());
        let (key_x, key_y, abort) = if constant_key {
            let k = Bits::zeros(self.config.key_bits);
            (Some(k.clone()), Some(k), AbortCause::None)
        } else {
            let key_y = match &x_hat {
                Some(x) => Some(hash_eval(pa, &encode_symbol_block(x, self.alphabet)?)?),
                None => None,
            };
            (Some(hash_eval(pa, &x_bits)?), key_y, cause)
        };
        Ok(SessionOutcome {
            key_x,
            key_y,
            stop_round: 1,
            transcript,
            abort,
            x_hat,
            slice: j,
            constant_key,
        })
    }
}

fn aborted(transcript: Transcript, stop_round: usize, abort: AbortCause, slice: usize) -> SessionOutcome {
    SessionOutcome {
        key_x: None,
        key_y: None,
        stop_round,
        transcript,
        abort,
        x_hat: None,
        slice,
        constant_key: false,
    }
}

/// Run `first` with probability `θ`, else `second`; the choice is drawn
/// from the session's hybrid stream and recorded in the transcript.
pub fn hybrid_run(
    first: &Protocol,
    second: &Protocol,
    theta: f64,
    block: &Block,
    rng: &SessionRng,
) -> Result<SessionOutcome> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::usage(format!("θ = {theta} outside [0, 1]")));
    }
    let pick_first = rng.stream(StreamKind::Hybrid).bernoulli(theta);
    let mut out = if pick_first { first.run(block, rng)? } else { second.run(block, rng)? };
    out.transcript.hybrid_first = Some(pick_first);
    Ok(out)
}

/// Recompute the second party's key from `Y`, the public transcript and the
/// public code stream alone.
pub fn recompute_ky(protocol: &Protocol, y: &[usize], transcript: &Transcript) -> Result<Option<Bits>> {
    let stream = transcript
        .code_stream
        .ok_or_else(|| Error::usage("transcript does not name its code stream"))?;
    let seed_msg = match transcript.messages.iter().find(|m| m.kind == MessageKind::Seed) {
        Some(m) => m,
        None => return Ok(None),
    };
    let pa = HashSeed::from_bits(protocol.key_spec(), seed_msg.payload.clone())?;
    let config = protocol.config();
    let x_hat = if config.variant.is_p2() {
        let j = transcript
            .messages
            .iter()
            .find(|m| m.kind == MessageKind::SliceIndex)
            .and_then(|m| m.payload.to_u64())
            .ok_or_else(|| Error::usage("transcript lacks a slice index"))? as usize;
        if let Some(fb) = transcript.messages.iter().find(|m| m.kind == MessageKind::FeedbackBit) {
            if fb.payload.get(0) {
                return Ok(Some(Bits::zeros(config.key_bits)));
            }
        }
        let spec = HashSpec::new(protocol.domain_bits(), protocol.slice_bin_bits(j))?;
        let seed = draw_seed(
            &mut StreamRng::open(StreamId { sub: j as u32, ..stream }, 0),
            spec,
        );
        let bin = transcript
            .messages
            .iter()
            .find(|m| m.kind == MessageKind::Bin)
            .ok_or_else(|| Error::usage("transcript lacks a bin"))?;
        sw_decode_mismatched(
            protocol.decoder_model.as_ref().expect("one-way protocol"),
            y,
            &bin.payload,
            &seed,
            protocol.slice_bin_bits(j) as f64,
            config.gamma,
            config.decode_cap,
        )?
        .unique()
    } else {
        let stack = BinStack::draw(
            &mut StreamRng::open(stream, 0),
            &config.slices,
            config.gamma,
            protocol.domain_bits(),
        )?;
        let bins: Vec<Bits> = transcript
            .messages
            .iter()
            .filter(|m| m.kind == MessageKind::Bin)
            .map(|m| m.payload.clone())
            .collect();
        let round = transcript
            .messages
            .iter()
            .find(|m| m.kind == MessageKind::Ack)
            .map(|m| m.round)
            .ok_or_else(|| Error::usage("seed published without an ACK"))?;
        sw_decode(protocol.source(), y, &bins, round, &config.slices, &stack, config.decode_cap)?.unique()
    };
    match x_hat {
        Some(x) => Ok(Some(hash_eval(&pa, &encode_symbol_block(&x, protocol.alphabet())?)?)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{example1_pmf, JointPmf};
    use crate::protocol::Variant;
    use crate::reconciliation::SliceSpec;

    fn equal_bits(n: usize) -> SourceModel {
        SourceModel::iid(JointPmf::from_xy(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap(), n).unwrap()
    }

    #[test]
    fn perfectly_correlated_always_agrees() {
        let src = equal_bits(10);
        let cfg = SessionConfig::new(SliceSpec::new(0.0, 1.0, 1.0).unwrap(), 3.0, 0.0, 6, Variant::P1).unwrap();
        let p = Protocol::new(src.clone(), cfg).unwrap();
        for s in 0..200 {
            let rng = SessionRng::new(5, s);
            let block = src.sample(&mut rng.stream(StreamKind::Source));
            let out = p.run(&block, &rng).unwrap();
            assert!(out.agreed());
            assert_eq!(out.stop_round, 1);
            assert_eq!(out.abort, AbortCause::None);
            assert!(out.transcript.ends_with_seed());
            assert_eq!(out.key_x.as_ref().unwrap().len(), 6);
        }
    }

    #[test]
    fn outside_spectrum_aborts_t0() {
        let indep = JointPmf::from_xy(2, 2, vec![0.25; 4]).unwrap();
        let src = SourceModel::iid(indep, 4).unwrap();
        // every h(x|y) equals 4, below λ_min
        let cfg = SessionConfig::new(SliceSpec::new(10.0, 12.0, 1.0).unwrap(), 2.0, 0.0, 2, Variant::P1).unwrap();
        let p = Protocol::new(src.clone(), cfg).unwrap();
        let rng = SessionRng::new(1, 0);
        let block = src.sample(&mut rng.stream(StreamKind::Source));
        let out = p.run(&block, &rng).unwrap();
        assert_eq!(out.abort, AbortCause::T0);
        assert!(out.key_x.is_none() && out.key_y.is_none());
        assert!(out.transcript.answers_well_formed());
        assert!((out.transcript.log_cardinality(2) - (out.transcript.physical_bits() as f64 - 2.0 + 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn transcripts_are_deterministic_and_recomputable() {
        let src = SourceModel::iid(example1_pmf(0.25, 0.125).unwrap(), 8).unwrap();
        let cfg = SessionConfig::new(SliceSpec::new(0.0, 12.0, 1.5).unwrap(), 4.0, 0.0, 3, Variant::P1).unwrap();
        let p = Protocol::new(src.clone(), cfg).unwrap();
        for s in 0..100 {
            let rng = SessionRng::new(99, s);
            let block = src.sample(&mut rng.stream(StreamKind::Source));
            let a = p.run(&block, &rng).unwrap();
            let b = p.run(&block, &rng).unwrap();
            assert_eq!(a, b);
            assert!(a.transcript.answers_well_formed());
            if a.abort == AbortCause::None {
                assert_eq!(recompute_ky(&p, &block.y, &a.transcript).unwrap(), a.key_y);
                if a.x_hat.as_deref() == Some(&block.x[..]) {
                    assert_eq!(a.stop_round, a.slice);
                }
            }
        }
    }

    #[test]
    fn p2_uniform_source_reliable() {
        // X = Y uniform over 2 bits per letter: single slice, exact decoding
        let table: Vec<f64> = (0..16).map(|i| if i % 5 == 0 { 0.25 } else { 0.0 }).collect();
        let src = SourceModel::iid(JointPmf::from_xy(4, 4, table).unwrap(), 3).unwrap();
        // 2-bit bins leave room for γ = 1 below log M
        let slices = SliceSpec::new(5.5, 6.5, 1.0).unwrap();
        for variant in [Variant::P2Secrecy, Variant::P2Reliability] {
            let cfg = SessionConfig::new(slices, 1.0, 4.0, 4, variant).unwrap();
            let p = Protocol::new(src.clone(), cfg).unwrap();
            assert!(p.is_good_slice(1));
            for s in 0..50 {
                let rng = SessionRng::new(2, s);
                let block = src.sample(&mut rng.stream(StreamKind::Source));
                let out = p.run(&block, &rng).unwrap();
                assert!(out.agreed(), "{out:?}");
                assert!(!out.constant_key);
                assert_eq!(recompute_ky(&p, &block.y, &out.transcript).unwrap(), out.key_y);
            }
        }
    }

    #[test]
    fn p2_rejects_nonconstant_z_and_large_lambda() {
        let src = SourceModel::iid(example1_pmf(0.25, 0.125).unwrap(), 3).unwrap();
        let slices = SliceSpec::new(1.0, 4.0, 1.0).unwrap();
        let cfg = SessionConfig::new(slices, 1.0, 0.5, 1, Variant::P2Secrecy).unwrap();
        assert!(matches!(Protocol::new(src, cfg), Err(Error::Usage(_))));
        assert!(SessionConfig::new(slices, 1.0, 1.5, 1, Variant::P2Secrecy).is_err());
    }

    #[test]
    fn hybrid_extremes_and_fraction() {
        let src = equal_bits(4);
        let cfg = SessionConfig::new(SliceSpec::new(0.0, 1.0, 1.0).unwrap(), 3.0, 0.0, 2, Variant::P1).unwrap();
        let p = Protocol::new(src.clone(), cfg).unwrap();
        let mut firsts = 0;
        let trials = 10_000;
        for s in 0..trials {
            let rng = SessionRng::new(7, s);
            let block = src.sample(&mut rng.stream(StreamKind::Source));
            if s < 50 {
                assert_eq!(hybrid_run(&p, &p, 1.0, &block, &rng).unwrap().transcript.hybrid_first, Some(true));
                assert_eq!(hybrid_run(&p, &p, 0.0, &block, &rng).unwrap().transcript.hybrid_first, Some(false));
            }
            if hybrid_run(&p, &p, 0.5, &block, &rng).unwrap().transcript.hybrid_first == Some(true) {
                firsts += 1;
            }
        }
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((firsts as f64 / trials as f64 - 0.5).abs() < 3.0 * sigma);
        let rng = SessionRng::new(7, 0);
        let block = src.sample(&mut rng.stream(StreamKind::Source));
        assert!(hybrid_run(&p, &p, 1.5, &block, &rng).is_err());
    }
}
