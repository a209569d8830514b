//! Spectrum slices, incremental random binning and unique-candidate
//! decoding.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hashing::{draw_seed, encode_symbol_block, hash_eval, HashSeed, HashSpec};
use crate::prob::JointPmf;
use crate::rng::StreamRng;
use crate::source::{iid_candidates, in_window, SourceModel};
use crate::spectrum::BOUNDARY_SNAP;

/// Default cap on decoder candidate sets.
pub const DEFAULT_DECODE_CAP: usize = 1 << 24;

/// `L` slices of width `Δ` covering `[λ_min, λ_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    lambda_min: f64,
    lambda_max: f64,
    delta: f64,
    count: usize,
}

impl SliceSpec {
    /// `L = ⌈(λ_max − λ_min)/Δ⌉` (at least 1); `λ_max` is moved up to
    /// `λ_min + LΔ`.
    pub fn new(lambda_min: f64, lambda_max: f64, delta: f64) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && delta.is_finite()) {
            return Err(Error::usage("slice bounds must be finite"));
        }
        if delta <= 0.0 {
            return Err(Error::usage("slice width must be positive"));
        }
        if lambda_max < lambda_min {
            return Err(Error::usage("λ_max below λ_min"));
        }
        let count = (((lambda_max - lambda_min) / delta) - BOUNDARY_SNAP).ceil().max(1.0) as usize;
        Ok(Self {
            lambda_min,
            lambda_max: lambda_min + count as f64 * delta,
            delta,
            count,
        })
    }

    /// Exactly `count` slices starting at `lambda_min`.
    pub fn with_count(lambda_min: f64, delta: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::usage("at least one slice"));
        }
        Self::new(lambda_min, lambda_min + count as f64 * delta, delta)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `L`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Lower edge `λ_j = λ_min + (j−1)Δ` of slice `j ≥ 1`.
    pub fn lambda(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        self.lambda_min + (j - 1) as f64 * self.delta
    }

    /// Slice index of a density value; 0 outside `[λ_min, λ_max)`.
    pub fn index_of(&self, h: f64) -> usize {
        if !in_window(h, self.lambda_min, self.lambda_max) {
            return 0;
        }
        let j = ((h + BOUNDARY_SNAP - self.lambda_min) / self.delta).floor() as usize + 1;
        j.clamp(1, self.count)
    }
}

/// Slice of `−log P(xⁿ|yⁿ)`.
pub fn slice_of(source: &SourceModel, spec: &SliceSpec, x: &[usize], y: &[usize]) -> Result<usize> {
    Ok(spec.index_of(source.cond_log_likelihood(x, y)?))
}

/// Slice of `−log P(xⁿ)`.
pub fn x_slice_of(source: &SourceModel, spec: &SliceSpec, x: &[usize]) -> Result<usize> {
    Ok(spec.index_of(source.self_information(x)?))
}

/// Per-round bin widths and hash seeds.
#[derive(Debug, Clone)]
pub struct BinStack {
    bits: Vec<usize>,
    seeds: Vec<HashSeed>,
    target: Vec<f64>,
}

impl BinStack {
    /// `log M_1 = ⌈λ_1 + Δ + γ⌉`, `log M_j = ⌈Δ⌉` afterwards.
    pub fn bit_counts(slices: &SliceSpec, gamma: f64) -> Vec<usize> {
        let first = (slices.lambda(1) + slices.delta + gamma).ceil().max(0.0) as usize;
        let rest = slices.delta.ceil() as usize;
        std::iter::once(first)
            .chain(std::iter::repeat_n(rest, slices.count - 1))
            .collect()
    }

    /// Draw one seed per round for inputs of `domain_bits` bits.
    pub fn draw(rng: &mut StreamRng, slices: &SliceSpec, gamma: f64, domain_bits: usize) -> Result<Self> {
        let bits = Self::bit_counts(slices, gamma);
        let seeds = bits
            .iter()
            .map(|&k| HashSpec::new(domain_bits, k).map(|spec| draw_seed(rng, spec)))
            .collect::<Result<Vec<_>>>()?;
        let target = (1..=slices.count)
            .map(|l| slices.lambda(l) + slices.delta + gamma)
            .collect();
        Ok(Self { bits, seeds, target })
    }

    /// Stack from explicit seeds, one per round, with the widths of
    /// [`BinStack::bit_counts`].
    pub fn from_seeds(slices: &SliceSpec, gamma: f64, seeds: Vec<HashSeed>) -> Result<Self> {
        let bits = Self::bit_counts(slices, gamma);
        if seeds.len() != bits.len() || seeds.iter().zip(&bits).any(|(s, &b)| s.spec().range_bits() != b) {
            return Err(Error::usage("seeds do not match the per-round bin widths"));
        }
        let target = (1..=slices.count)
            .map(|l| slices.lambda(l) + slices.delta + gamma)
            .collect();
        Ok(Self { bits, seeds, target })
    }

    pub fn rounds(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self, round: usize) -> usize {
        self.bits[round - 1]
    }

    pub fn seed(&self, round: usize) -> &HashSeed {
        &self.seeds[round - 1]
    }

    /// `Σ_{j≤l} log M_j`.
    pub fn cumulative_bits(&self, l: usize) -> usize {
        self.bits[..l].iter().sum()
    }

    /// Cumulative bits minus `λ_l + Δ + γ`; nonnegative and at most `l`.
    pub fn cumulative_slack(&self, l: usize) -> f64 {
        self.cumulative_bits(l) as f64 - self.target[l - 1]
    }

    /// Bin index of round `round` for the packed block.
    pub fn encode(&self, round: usize, x_bits: &Bits) -> Result<Bits> {
        sw_encode(self.seed(round), x_bits)
    }
}

/// Bin index of a packed block: the seed's hash over `⌈log₂ M⌉` bits.
pub fn sw_encode(seed: &HashSeed, x_bits: &Bits) -> Result<Bits> {
    hash_eval(seed, x_bits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoded {
    Unique(Vec<usize>),
    NoMatch,
    Ambiguous(usize),
}

impl Decoded {
    pub fn unique(self) -> Option<Vec<usize>> {
        match self {
            Decoded::Unique(x) => Some(x),
            _ => None,
        }
    }
}

fn unique_match(
    candidates: Vec<Vec<usize>>,
    alphabet: usize,
    matches: impl Fn(&Bits) -> Result<bool>,
) -> Result<Decoded> {
    let mut hit = None;
    let mut count = 0usize;
    for x in candidates {
        if matches(&encode_symbol_block(&x, alphabet)?)? {
            count += 1;
            if hit.is_none() {
                hit = Some(x);
            }
        }
    }
    Ok(match count {
        0 => Decoded::NoMatch,
        1 => Decoded::Unique(hit.expect("one match")),
        k => Decoded::Ambiguous(k),
    })
}

/// The unique `x` with `(x, y) ∈ T_l` whose bins agree with `bins[..l]`.
/// The candidate set is scanned in full.
pub fn sw_decode(
    source: &SourceModel,
    y: &[usize],
    bins: &[Bits],
    l: usize,
    slices: &SliceSpec,
    stack: &BinStack,
    cap: usize,
) -> Result<Decoded> {
    if l == 0 || l > slices.count() || bins.len() < l {
        return Err(Error::usage(format!("decode round {l} with {} bins", bins.len())));
    }
    let lo = slices.lambda(l);
    let candidates = source.candidates(y, lo, lo + slices.delta(), cap)?;
    let (nx, _, _) = source.alphabet_sizes();
    unique_match(candidates, nx, |xb| {
        for (j, bin) in bins.iter().enumerate().take(l) {
            if &stack.encode(j + 1, xb)? != bin {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// Unique `x` in `{x : −log Q(x|y) < log M − γ}` whose bin equals `bin`,
/// `Q` an IID single-letter model.
pub fn sw_decode_mismatched(
    q: &JointPmf,
    y: &[usize],
    bin: &Bits,
    seed: &HashSeed,
    log_m: f64,
    gamma: f64,
    cap: usize,
) -> Result<Decoded> {
    let candidates = iid_candidates(q, y, f64::NEG_INFINITY, log_m - gamma, cap)?;
    let (nx, _, _) = q.sizes();
    unique_match(candidates, nx, |xb| Ok(&sw_encode(seed, xb)? == bin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{block_digits, example1_pmf};
    use crate::rng::{SessionRng, StreamKind};
    use rand::RngCore;

    #[test]
    fn slice_examples() {
        let s = SliceSpec::new(1.0, 3.0, 0.5).unwrap();
        assert_eq!(s.count(), 4);
        assert_eq!(s.index_of(1.7), 2);
        assert_eq!(s.index_of(3.0), 0);
        assert_eq!(s.index_of(1.0), 1);
        assert_eq!(s.index_of(0.99), 0);
        assert_eq!(s.index_of(2.999), 4);
    }

    #[test]
    fn slice_count_rounds_up() {
        let s = SliceSpec::new(0.0, 1.2, 0.5).unwrap();
        assert_eq!(s.count(), 3);
        assert!((s.lambda_max() - 1.5).abs() < 1e-15);
        assert_eq!(SliceSpec::new(2.0, 2.0, 1.0).unwrap().count(), 1);
        assert!(SliceSpec::new(2.0, 1.0, 1.0).is_err());
        assert!(SliceSpec::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn slices_partition_support() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let n = 5;
        let src = SourceModel::iid(p, n).unwrap();
        let s = SliceSpec::new(0.5, 6.0, 0.75).unwrap();
        let mut per_slice = vec![0usize; s.count() + 1];
        for xi in 0..32 {
            for yi in 0..32 {
                let (x, y) = (block_digits(xi, 2, n), block_digits(yi, 2, n));
                let j = slice_of(&src, &s, &x, &y).unwrap();
                per_slice[j] += 1;
                if j > 0 {
                    let h = src.cond_log_likelihood(&x, &y).unwrap();
                    assert!(s.lambda(j) <= h + BOUNDARY_SNAP && h < s.lambda(j) + s.delta());
                }
            }
        }
        assert_eq!(per_slice.iter().sum::<usize>(), 1024);
    }

    #[test]
    fn candidate_set_size_bound() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let n = 6;
        let src = SourceModel::iid(p, n).unwrap();
        let s = SliceSpec::new(0.0, 14.0, 1.0).unwrap();
        for yi in 0..64 {
            let y = block_digits(yi, 2, n);
            for j in 1..=s.count() {
                let c = src.candidates(&y, s.lambda(j), s.lambda(j) + 1.0, 1 << 20).unwrap();
                assert!((c.len() as f64) <= (s.lambda(j) + s.delta()).exp2());
            }
        }
    }

    #[test]
    fn x_slices() {
        let uniform = JointPmf::from_xy(8, 1, vec![0.125; 8]).unwrap();
        let src = SourceModel::iid(uniform, 1).unwrap();
        let s = SliceSpec::new(2.0, 5.0, 0.5).unwrap();
        let j0 = x_slice_of(&src, &s, &[0]).unwrap();
        assert!(j0 > 0);
        for x in 1..8 {
            assert_eq!(x_slice_of(&src, &s, &[x]).unwrap(), j0);
        }
        let point = JointPmf::from_xy(2, 1, vec![1.0, 0.0]).unwrap();
        let src = SourceModel::iid(point, 1).unwrap();
        assert_eq!(x_slice_of(&src, &SliceSpec::new(0.5, 2.0, 0.5).unwrap(), &[0]).unwrap(), 0);
    }

    #[test]
    fn x_slice_histogram_geometric() {
        let probs: Vec<f64> = (0..12).map(|k| 0.5f64.powi(k + 1)).collect();
        let tail = 1.0 - probs.iter().sum::<f64>();
        let mut p = probs.clone();
        p.push(tail);
        let pmf = JointPmf::from_xy(13, 1, p.clone()).unwrap();
        let src = SourceModel::iid(pmf, 1).unwrap();
        let s = SliceSpec::new(1.5, 9.5, 2.0).unwrap();
        let mut hist = vec![0.0; s.count() + 1];
        for x in 0..13 {
            hist[x_slice_of(&src, &s, &[x]).unwrap()] += p[x];
        }
        // −log p(x) = x + 1 for x < 12 and 12 for the tail cell
        let mut oracle = vec![0.0; s.count() + 1];
        for x in 0..13 {
            let h = if x < 12 { (x + 1) as f64 } else { 12.0 };
            let j = if !(1.5..9.5).contains(&h) { 0 } else { ((h - 1.5) / 2.0) as usize + 1 };
            oracle[j] += p[x];
        }
        for (a, b) in hist.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bin_stack_widths() {
        let s = SliceSpec::new(2.3, 6.3, 1.0).unwrap();
        assert_eq!(BinStack::bit_counts(&s, 3.0), vec![7, 1, 1, 1]);
        let s = SliceSpec::new(0.0, 3.0, 0.4).unwrap();
        let mut rng = SessionRng::new(1, 1).stream(StreamKind::Binning);
        let stack = BinStack::draw(&mut rng, &s, 2.5, 16).unwrap();
        assert_eq!(stack.bits(1), 3);
        for l in 1..=s.count() {
            let slack = stack.cumulative_slack(l);
            assert!(slack >= -1e-12 && slack <= l as f64, "l={l} slack={slack}");
        }
        let negative = SliceSpec::new(-10.0, -8.0, 1.0).unwrap();
        assert_eq!(BinStack::bit_counts(&negative, 1.0)[0], 0);
    }

    #[test]
    fn one_bin_always_zero() {
        let spec = HashSpec::new(10, 0).unwrap();
        let seed = draw_seed(&mut SessionRng::new(2, 0).stream(StreamKind::Binning), spec);
        let b = sw_encode(&seed, &Bits::from_u64(0x2f1, 10)).unwrap();
        assert!(b.is_empty());
        let spec = HashSpec::new(10, 4).unwrap();
        let seed = draw_seed(&mut SessionRng::new(2, 0).stream(StreamKind::Binning), spec);
        let x = Bits::from_u64(0x2f1, 10);
        assert_eq!(sw_encode(&seed, &x).unwrap(), sw_encode(&seed, &x).unwrap());
    }

    #[test]
    fn bin_histogram_uniform() {
        let mut rng = SessionRng::new(31, 0).stream(StreamKind::Binning);
        let seed = draw_seed(&mut rng, HashSpec::new(24, 3).unwrap());
        let mut counts = [0f64; 8];
        let draws = 100_000;
        for _ in 0..draws {
            let x = Bits::from_u64(rng.next_u64() & 0xff_ffff, 24);
            counts[hash_eval(&seed, &x).unwrap().to_u64().unwrap() as usize] += 1.0;
        }
        let e = draws as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
        // 95% quantile of chi-square with 7 degrees of freedom
        assert!(chi2 < 14.067, "chi2 = {chi2}");
    }

    #[test]
    fn perfectly_correlated_decodes_at_round_one() {
        let p = JointPmf::from_xy(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let src = SourceModel::iid(p, 8).unwrap();
        let s = SliceSpec::new(0.0, 1.0, 1.0).unwrap();
        let mut rng = SessionRng::new(3, 0).stream(StreamKind::Binning);
        let stack = BinStack::draw(&mut rng, &s, 3.0, 8).unwrap();
        let x = vec![1, 0, 0, 1, 1, 1, 0, 1];
        let bins = vec![stack.encode(1, &encode_symbol_block(&x, 2).unwrap()).unwrap()];
        let d = sw_decode(&src, &x, &bins, 1, &s, &stack, DEFAULT_DECODE_CAP).unwrap();
        assert_eq!(d, Decoded::Unique(x));
    }

    #[test]
    fn colliding_candidates_are_ambiguous() {
        let p = JointPmf::from_xy(2, 1, vec![0.5, 0.5]).unwrap();
        let src = SourceModel::iid(p, 2).unwrap();
        // λ_1 + Δ + γ ≤ 0 gives zero-bit bins, so all four candidates collide
        let s = SliceSpec::new(2.0, 3.0, 1.0).unwrap();
        let mut rng = SessionRng::new(3, 0).stream(StreamKind::Binning);
        let stack = BinStack::draw(&mut rng, &s, -3.0, 2).unwrap();
        assert_eq!(stack.bits(1), 0);
        let bins = vec![Bits::zeros(0)];
        let d = sw_decode(&src, &[0, 0], &bins, 1, &s, &stack, 16).unwrap();
        assert_eq!(d, Decoded::Ambiguous(4));
    }

    #[test]
    fn mismatched_decoder_edges() {
        let p = example1_pmf(0.25, 0.125).unwrap();
        let q = JointPmf::from_xy(2, 2, p.marginal_xy().table().to_vec()).unwrap();
        let mut rng = SessionRng::new(8, 0).stream(StreamKind::Binning);
        let seed = draw_seed(&mut rng, HashSpec::new(6, 20).unwrap());
        let x = vec![0, 1, 1, 0, 0, 1];
        let y = vec![0, 1, 0, 0, 0, 1];
        let bin = sw_encode(&seed, &encode_symbol_block(&x, 2).unwrap()).unwrap();
        let d = sw_decode_mismatched(&q, &y, &bin, &seed, 20.0, 1.0, 1 << 10).unwrap();
        assert_eq!(d, Decoded::Unique(x.clone()));
        // threshold at or below the smallest density leaves no candidates
        let min_h = 6.0 * -(0.875f64).log2();
        let d = sw_decode_mismatched(&q, &y, &bin, &seed, min_h, 0.0, 1 << 10).unwrap();
        assert_eq!(d, Decoded::NoMatch);
    }
}
