//! Exhaustive evaluation of protocol reliability and secrecy on small
//! instances.
//!
//! Every source block is enumerated. Code and privacy-amplification seeds
//! are enumerated when they fit in [`ENUMERATE_SEED_BITS`] bits altogether,
//! and sampled otherwise.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hashing::{encode_symbol_block, hash_index, symbol_width, HashSeed, HashSpec};
use crate::numeric::NeumaierSum;
use crate::prob::{block_digits, block_index, JointPmf, PairPmf, Pmf, min_entropy_cond};
use crate::protocol::{Code, Protocol};
use crate::reconciliation::BinStack;
use crate::rng::SessionRng;
use crate::source::iid_candidates;

pub const DEFAULT_WORK_CAP: u128 = 1 << 34;
pub const ENUMERATE_SEED_BITS: usize = 20;
pub const MIN_SEED_SAMPLES: usize = 10_000;
/// Largest block table enumerated.
pub const BLOCK_TABLE_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactOptions {
    /// Cap on source cells times seed draws.
    pub work_cap: u128,
    /// Seed draws when the seed space is not enumerated; at least
    /// [`MIN_SEED_SAMPLES`].
    pub samples: usize,
    pub master: u64,
    pub enumerate_bits: usize,
    /// Visit source cells in reverse order (order-independence checks).
    pub reverse_order: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            work_cap: DEFAULT_WORK_CAP,
            samples: MIN_SEED_SAMPLES,
            master: 0,
            enumerate_bits: ENUMERATE_SEED_BITS,
            reverse_order: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "count")]
pub enum SeedMode {
    Enumerated(u64),
    Sampled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceDiagnostic {
    pub slice: usize,
    pub mass: f64,
    /// Probability of landing in this slice and not agreeing.
    pub failure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactEval {
    /// `1 − P[K_x = K_y]`, aborts counted as failures.
    pub eps: f64,
    /// `d(P_{K_x F Z S}, P_unif × P_{F Z S})`, aborted sessions holding a
    /// uniform key.
    pub delta: f64,
    /// `d(P_{K_x K_y F Z S}, P_unif⁽²⁾ × P_{F Z S})` with `⊥` for missing
    /// keys.
    pub combined: f64,
    /// Standard errors; zero when seeds were enumerated.
    pub eps_se: f64,
    pub delta_se: f64,
    pub combined_se: f64,
    pub seed_mode: SeedMode,
    pub randomness_bits: usize,
    pub abort_mass: f64,
    pub constant_key_mass: f64,
    pub slices: Vec<SliceDiagnostic>,
}

/// Upper end of the reported quantity, `value + 3 se`.
impl ExactEval {
    pub fn eps_upper(&self) -> f64 {
        self.eps + 3.0 * self.eps_se
    }

    pub fn delta_upper(&self) -> f64 {
        self.delta + 3.0 * self.delta_se
    }
}

struct Cell {
    x: usize,
    y: usize,
    pxy: f64,
    zs: Vec<(usize, f64)>,
}

#[derive(Clone, Copy)]
struct CellOutcome {
    f: u32,
    kx: Option<u64>,
    ky: Option<u64>,
    abort: bool,
    constant: bool,
}

struct Instance<'a> {
    protocol: &'a Protocol,
    cells: Vec<Cell>,
    /// Positions of `x` values with positive mass, indexed by block index.
    x_pos: Vec<usize>,
    x_bits: Vec<Bits>,
    y_pos: Vec<usize>,
    ys: usize,
    /// `P1`: slice of `(x, y)`; `P2`: slice of `x`. Per cell.
    cell_slice: Vec<usize>,
    /// `P2`: slice of each `x` position.
    x_slice: Vec<usize>,
    /// Candidate `x` positions per `(y position, round or slice − 1)`;
    /// `None` when the decode cap was hit.
    candidates: Vec<Option<Vec<usize>>>,
    nz: usize,
    keys: usize,
}

const NONE: usize = usize::MAX;

impl<'a> Instance<'a> {
    fn new(protocol: &'a Protocol, reverse: bool) -> Result<Self> {
        let source = protocol.source();
        let config = protocol.config();
        if config.key_bits > 16 {
            return Err(Error::resource(
                "key alphabet",
                1u128 << config.key_bits.min(127),
                1 << 16,
                "use at most 16 key bits for exact evaluation",
            ));
        }
        let (nx, ny, _) = source.alphabet_sizes();
        let n = source.n();
        let block = source.block_pmf(BLOCK_TABLE_CAP)?;
        let (bx, by, bz) = block.sizes();
        let mut cells = Vec::new();
        for x in 0..bx {
            for y in 0..by {
                let zs: Vec<(usize, f64)> = (0..bz)
                    .filter_map(|z| {
                        let p = block.prob(x, y, z);
                        (p > 0.0).then_some((z, p))
                    })
                    .collect();
                if !zs.is_empty() {
                    let pxy = NeumaierSum::total(zs.iter().map(|c| c.1));
                    cells.push(Cell { x, y, pxy, zs });
                }
            }
        }
        if reverse {
            cells.reverse();
            cells.iter_mut().for_each(|c| c.zs.reverse());
        }
        let mut x_pos = vec![NONE; bx];
        let mut x_bits = Vec::new();
        let mut y_pos = vec![NONE; by];
        let mut ys = 0;
        for c in &cells {
            if x_pos[c.x] == NONE {
                x_pos[c.x] = x_bits.len();
                x_bits.push(encode_symbol_block(&block_digits(c.x, nx, n), nx)?);
            }
            if y_pos[c.y] == NONE {
                y_pos[c.y] = ys;
                ys += 1;
            }
        }
        let slices = &config.slices;
        let l = slices.count();
        let mut x_slice = vec![0; x_bits.len()];
        let mut cell_slice = Vec::with_capacity(cells.len());
        let mut candidates = vec![None; ys * l];
        let mut y_digits = vec![Vec::new(); ys];
        for c in &cells {
            y_digits[y_pos[c.y]] = block_digits(c.y, ny, n);
        }
        let to_pos = |list: Vec<Vec<usize>>| -> Vec<usize> {
            list.iter().map(|d| x_pos[block_index(d, nx)]).filter(|&p| p != NONE).collect()
        };
        if config.variant.is_p2() {
            for c in &cells {
                let xd = block_digits(c.x, nx, n);
                let j = slices.index_of(source.self_information(&xd)?);
                x_slice[x_pos[c.x]] = j;
                cell_slice.push(j);
            }
            let q = protocol.decoder_model().expect("one-way protocol");
            for (yp, yd) in y_digits.iter().enumerate() {
                for j in 1..=l {
                    if !protocol.is_good_slice(j) {
                        continue;
                    }
                    let hi = protocol.slice_bin_bits(j) as f64 - config.gamma;
                    candidates[yp * l + j - 1] = match iid_candidates(q, yd, f64::NEG_INFINITY, hi, config.decode_cap) {
                        Ok(list) => Some(to_pos(list)),
                        Err(Error::Resource { .. }) => None,
                        Err(e) => return Err(e),
                    };
                }
            }
        } else {
            for c in &cells {
                let xd = block_digits(c.x, nx, n);
                cell_slice.push(slices.index_of(source.cond_log_likelihood(&xd, &y_digits[y_pos[c.y]])?));
            }
            for (yp, yd) in y_digits.iter().enumerate() {
                for r in 1..=l {
                    let lo = slices.lambda(r);
                    candidates[yp * l + r - 1] = match source.candidates(yd, lo, lo + slices.delta(), config.decode_cap) {
                        Ok(list) => Some(to_pos(list)),
                        Err(Error::Resource { .. }) => None,
                        Err(e) => return Err(e),
                    };
                }
            }
        }
        Ok(Self {
            protocol,
            cells,
            x_pos,
            x_bits,
            y_pos,
            ys,
            cell_slice,
            x_slice,
            candidates,
            nz: bz,
            keys: 1 << config.key_bits,
        })
    }

    fn keys_for(&self, pa: &HashSeed) -> Result<Vec<u64>> {
        self.x_bits.iter().map(|b| hash_index(pa, b)).collect()
    }

    fn outcomes_p1(&self, stack: &BinStack, pa: &HashSeed) -> Result<Vec<CellOutcome>> {
        let l = stack.rounds();
        let mut bins = Vec::with_capacity(self.x_bits.len() * l);
        for xb in &self.x_bits {
            for r in 1..=l {
                bins.push(hash_index(stack.seed(r), xb)?);
            }
        }
        let keys = self.keys_for(pa)?;
        let prefix = |xp: usize, r: usize| &bins[xp * l..xp * l + r];
        // (count, decoded position) per signature, per (y, round)
        let mut maps: Vec<Option<HashMap<&[u64], (u32, usize)>>> = Vec::with_capacity(self.ys * l);
        for yp in 0..self.ys {
            for r in 1..=l {
                maps.push(self.candidates[yp * l + r - 1].as_ref().map(|cands| {
                    let mut m: HashMap<&[u64], (u32, usize)> = HashMap::with_capacity(cands.len());
                    for &xp in cands {
                        let e = m.entry(prefix(xp, r)).or_insert((0, xp));
                        e.0 += 1;
                    }
                    m
                }));
            }
        }
        let mut interned: HashMap<(usize, bool, &[u64]), u32> = HashMap::new();
        let mut out = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let (xp, yp) = (self.x_pos[c.x], self.y_pos[c.y]);
            let mut stop = l;
            let mut decoded = None;
            for r in 1..=l {
                match &maps[yp * l + r - 1] {
                    // decode cap: NACK and abort
                    None => {
                        stop = r;
                        break;
                    }
                    Some(m) => {
                        if let Some(&(1, xh)) = m.get(prefix(xp, r)) {
                            stop = r;
                            decoded = Some(xh);
                            break;
                        }
                    }
                }
            }
            let next = interned.len() as u32;
            let f = *interned.entry((stop, decoded.is_some(), prefix(xp, stop))).or_insert(next);
            out.push(match decoded {
                Some(xh) => CellOutcome {
                    f,
                    kx: Some(keys[xp]),
                    ky: Some(keys[xh]),
                    abort: false,
                    constant: false,
                },
                None => CellOutcome {
                    f,
                    kx: None,
                    ky: None,
                    abort: true,
                    constant: false,
                },
            });
        }
        Ok(out)
    }

    fn outcomes_p2(&self, seeds: &[Option<HashSeed>], pa: &HashSeed) -> Result<Vec<CellOutcome>> {
        let config = self.protocol.config();
        let l = config.slices.count();
        let feedback = config.variant.feedback();
        let keys = self.keys_for(pa)?;
        let mut bins = vec![u64::MAX; self.x_bits.len()];
        for (xp, xb) in self.x_bits.iter().enumerate() {
            let j = self.x_slice[xp];
            if self.protocol.is_good_slice(j) {
                let seed = seeds[j - 1].as_ref().ok_or_else(|| Error::usage(format!("no seed for slice {j}")))?;
                bins[xp] = hash_index(seed, xb)?;
            }
        }
        let mut maps: Vec<Option<HashMap<u64, (u32, usize)>>> = Vec::with_capacity(self.ys * l);
        for yp in 0..self.ys {
            for j in 1..=l {
                maps.push(self.candidates[yp * l + j - 1].as_ref().map(|cands| {
                    let seed = seeds[j - 1].as_ref().expect("good slice has a seed");
                    let mut m = HashMap::with_capacity(cands.len());
                    for &xp in cands {
                        let b = hash_index(seed, &self.x_bits[xp]).expect("domain checked");
                        let e = m.entry(b).or_insert((0u32, xp));
                        e.0 += 1;
                    }
                    m
                }));
            }
        }
        let mut interned: HashMap<(usize, u64, bool), u32> = HashMap::new();
        let mut out = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let (xp, yp) = (self.x_pos[c.x], self.y_pos[c.y]);
            let j = self.x_slice[xp];
            let next = interned.len() as u32;
            if !self.protocol.is_good_slice(j) {
                let f = *interned.entry((j, u64::MAX, false)).or_insert(next);
                out.push(CellOutcome {
                    f,
                    kx: None,
                    ky: None,
                    abort: true,
                    constant: false,
                });
                continue;
            }
            let decoded = match &maps[yp * l + j - 1] {
                Some(m) => match m.get(&bins[xp]) {
                    Some(&(1, xh)) => Some(xh),
                    _ => None,
                },
                None => None,
            };
            let flag = feedback && decoded.is_none();
            let f = *interned.entry((j, bins[xp], flag)).or_insert(next);
            out.push(if flag {
                CellOutcome {
                    f,
                    kx: Some(0),
                    ky: Some(0),
                    abort: false,
                    constant: true,
                }
            } else {
                CellOutcome {
                    f,
                    kx: Some(keys[xp]),
                    ky: decoded.map(|xh| keys[xh]),
                    abort: false,
                    constant: false,
                }
            });
        }
        Ok(out)
    }

    /// Reliability, secrecy and combined distance for one seed draw.
    fn score(&self, outcomes: &[CellOutcome]) -> Sample {
        let k = self.keys;
        let slices = self.protocol.config().slices.count();
        let mut slice_fail = vec![0.0; slices + 1];
        let mut eps = NeumaierSum::default();
        let mut abort_mass = NeumaierSum::default();
        let mut constant_mass = NeumaierSum::default();
        for (i, (c, o)) in self.cells.iter().zip(outcomes).enumerate() {
            let agreed = matches!((o.kx, o.ky), (Some(a), Some(b)) if a == b);
            if !agreed {
                eps.add(c.pxy);
                slice_fail[self.cell_slice[i]] += c.pxy;
            }
            if o.abort {
                abort_mass.add(c.pxy);
            }
            if o.constant {
                constant_mass.add(c.pxy);
            }
        }
        // bucket cells by transcript
        let groups = outcomes.iter().map(|o| o.f).max().map_or(0, |m| m as usize + 1);
        let mut start = vec![0usize; groups + 1];
        for o in outcomes {
            start[o.f as usize + 1] += 1;
        }
        for g in 0..groups {
            start[g + 1] += start[g];
        }
        let mut fill = start.clone();
        let mut order = vec![0usize; outcomes.len()];
        for (i, o) in outcomes.iter().enumerate() {
            order[fill[o.f as usize]] = i;
            fill[o.f as usize] += 1;
        }
        let bot = k; // index of ⊥ for K_y
        let mut zmass = vec![0.0; self.nz];
        let mut sec = vec![0.0; self.nz * k];
        let mut comb = vec![0.0; self.nz * k * (k + 1)];
        let mut touched_z = Vec::new();
        let mut touched_sec = Vec::new();
        let mut touched_comb = Vec::new();
        let mut delta = NeumaierSum::default();
        let mut combined = NeumaierSum::default();
        for g in 0..groups {
            let members = &order[start[g]..start[g + 1]];
            if members.is_empty() {
                continue;
            }
            if outcomes[members[0]].abort {
                // both keys missing: the combined distance takes the full mass
                for &i in members {
                    combined.add(self.cells[i].pxy);
                }
                continue;
            }
            for &i in members {
                let o = outcomes[i];
                let kx = o.kx.expect("non-abort has a key") as usize;
                let ky = o.ky.map_or(bot, |v| v as usize);
                for &(z, p) in &self.cells[i].zs {
                    if zmass[z] == 0.0 {
                        touched_z.push(z);
                    }
                    zmass[z] += p;
                    let s = z * k + kx;
                    if sec[s] == 0.0 {
                        touched_sec.push(s);
                    }
                    sec[s] += p;
                    let t = (z * k + kx) * (k + 1) + ky;
                    if comb[t] == 0.0 {
                        touched_comb.push(t);
                    }
                    comb[t] += p;
                }
            }
            let inv_k = 1.0 / k as f64;
            let mut per_z_sec: HashMap<usize, usize> = HashMap::new();
            for &s in &touched_sec {
                let z = s / k;
                delta.add(0.5 * (sec[s] - zmass[z] * inv_k).abs());
                *per_z_sec.entry(z).or_insert(0) += 1;
            }
            let mut per_z_diag: HashMap<usize, usize> = HashMap::new();
            for &t in &touched_comb {
                let z = t / (k * (k + 1));
                let rem = t % (k * (k + 1));
                let (a, b) = (rem / (k + 1), rem % (k + 1));
                let target = if a == b { zmass[z] * inv_k } else { 0.0 };
                combined.add(0.5 * (comb[t] - target).abs());
                if a == b {
                    *per_z_diag.entry(z).or_insert(0) += 1;
                }
            }
            for &z in &touched_z {
                let m = zmass[z] * inv_k;
                let missing_sec = k - per_z_sec.get(&z).copied().unwrap_or(0);
                let missing_diag = k - per_z_diag.get(&z).copied().unwrap_or(0);
                delta.add(0.5 * m * missing_sec as f64);
                combined.add(0.5 * m * missing_diag as f64);
            }
            for &z in &touched_z {
                zmass[z] = 0.0;
            }
            for &s in &touched_sec {
                sec[s] = 0.0;
            }
            for &t in &touched_comb {
                comb[t] = 0.0;
            }
            touched_z.clear();
            touched_sec.clear();
            touched_comb.clear();
        }
        Sample {
            eps: eps.value(),
            delta: delta.value(),
            combined: combined.value(),
            abort: abort_mass.value(),
            constant: constant_mass.value(),
            slice_fail,
        }
    }
}

struct Sample {
    eps: f64,
    delta: f64,
    combined: f64,
    abort: f64,
    constant: f64,
    slice_fail: Vec<f64>,
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: NeumaierSum,
    sq: NeumaierSum,
}

impl Moments {
    fn add(&mut self, v: f64) {
        self.n += 1;
        self.sum.add(v);
        self.sq.add(v * v);
    }

    fn mean(&self) -> f64 {
        self.sum.value() / self.n as f64
    }

    fn se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sq.value() - self.sum.value().powi(2) / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Seed specs of the code, in enumeration order.
fn code_specs(protocol: &Protocol) -> Result<Vec<HashSpec>> {
    let config = protocol.config();
    let d = protocol.domain_bits();
    if config.variant.is_p2() {
        (1..=config.slices.count())
            .filter(|&j| protocol.is_good_slice(j))
            .map(|j| HashSpec::new(d, protocol.slice_bin_bits(j)))
            .collect()
    } else {
        BinStack::bit_counts(&config.slices, config.gamma)
            .into_iter()
            .map(|b| HashSpec::new(d, b))
            .collect()
    }
}

fn code_from_seeds(protocol: &Protocol, mut seeds: Vec<HashSeed>) -> Result<Code> {
    let config = protocol.config();
    if config.variant.is_p2() {
        let mut it = seeds.drain(..);
        Ok(Code::PerSlice(
            (1..=config.slices.count())
                .map(|j| if protocol.is_good_slice(j) { it.next() } else { None })
                .collect(),
        ))
    } else {
        Ok(Code::Incremental(BinStack::from_seeds(&config.slices, config.gamma, seeds)?))
    }
}

/// Exact reliability and secrecy of `protocol` over its source.
pub fn exact_protocol_eval(protocol: &Protocol, opts: &ExactOptions) -> Result<ExactEval> {
    let specs = code_specs(protocol)?;
    let pa_spec = protocol.key_spec();
    if specs.iter().chain([&pa_spec]).any(|s| s.range_bits() > 64) {
        return Err(Error::usage("exact evaluation needs bins and keys of at most 64 bits"));
    }
    let bits: usize = specs.iter().map(|s| s.seed_bits()).sum::<usize>() + pa_spec.seed_bits();
    let enumerate = bits <= opts.enumerate_bits.min(40);
    let draws: u64 = if enumerate { 1 << bits } else { opts.samples.max(MIN_SEED_SAMPLES) as u64 };
    let inst = Instance::new(protocol, opts.reverse_order)?;
    let source_cells: u128 = inst.cells.iter().map(|c| c.zs.len() as u128).sum();
    let work = source_cells * draws as u128;
    if work > opts.work_cap {
        return Err(Error::resource(
            "exact evaluation work",
            work,
            opts.work_cap,
            "reduce the blocklength or key bits, or raise --cap",
        ));
    }
    let slices = protocol.config().slices.count();
    let (mut e, mut d, mut c) = (Moments::default(), Moments::default(), Moments::default());
    let (mut abort, mut constant) = (NeumaierSum::default(), NeumaierSum::default());
    let mut slice_fail = vec![NeumaierSum::default(); slices + 1];
    for t in 0..draws {
        let (code, pa) = if enumerate {
            let mut rest = t;
            let mut take = |spec: HashSpec| -> Result<HashSeed> {
                let w = spec.seed_bits();
                let part = rest & ((1u64 << w) - 1);
                rest >>= w;
                HashSeed::from_index(spec, part)
            };
            let pa = take(pa_spec)?;
            let seeds = specs.iter().map(|s| take(*s)).collect::<Result<Vec<_>>>()?;
            (code_from_seeds(protocol, seeds)?, pa)
        } else {
            let rng = SessionRng::new(opts.master, t);
            (protocol.draw_code(&rng)?, protocol.draw_pa_seed(&rng))
        };
        let outcomes = match &code {
            Code::Incremental(stack) => inst.outcomes_p1(stack, &pa)?,
            Code::PerSlice(seeds) => inst.outcomes_p2(seeds, &pa)?,
        };
        let s = inst.score(&outcomes);
        e.add(s.eps);
        d.add(s.delta);
        c.add(s.combined);
        abort.add(s.abort);
        constant.add(s.constant);
        for (acc, v) in slice_fail.iter_mut().zip(&s.slice_fail) {
            acc.add(*v);
        }
    }
    let n = draws as f64;
    let mut slice_mass = vec![NeumaierSum::default(); slices + 1];
    for (i, cell) in inst.cells.iter().enumerate() {
        slice_mass[inst.cell_slice[i]].add(cell.pxy);
    }
    let se = |m: &Moments| if enumerate { 0.0 } else { m.se() };
    Ok(ExactEval {
        eps: e.mean().clamp(0.0, 1.0),
        delta: d.mean().clamp(0.0, 1.0),
        combined: c.mean().clamp(0.0, 1.0),
        eps_se: se(&e),
        delta_se: se(&d),
        combined_se: se(&c),
        seed_mode: if enumerate { SeedMode::Enumerated(draws) } else { SeedMode::Sampled(draws) },
        randomness_bits: bits,
        abort_mass: abort.value() / n,
        constant_key_mass: constant.value() / n,
        slices: (0..=slices)
            .map(|j| SliceDiagnostic {
                slice: j,
                mass: slice_mass[j].value(),
                failure: slice_fail[j].value() / n,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeftoverHashReport {
    /// `d(P_{K V Z S}, P_unif × P_{V Z} × P_S)`.
    pub distance: f64,
    /// `½ √(|K| |V| 2^{−H_min})`.
    pub bound: f64,
    /// `H_min(P_XZ | Q_Z)` at the maximizing `Q_Z`.
    pub min_entropy: f64,
    pub seeds: u64,
}

/// Exhaustive leftover-hash check: `p` is a joint pmf over `(X, V, Z)`,
/// `X` hashed to `key_bits` bits by every Toeplitz seed.
pub fn leftover_hash_distance(p: &JointPmf, key_bits: usize, work_cap: u128) -> Result<LeftoverHashReport> {
    let (nx, nv, nz) = p.sizes();
    let d = symbol_width(nx);
    let spec = HashSpec::new(d, key_bits)?;
    if spec.seed_bits() > 40 || key_bits > 16 {
        return Err(Error::resource("seed space", 1u128 << spec.seed_bits().min(127), 1 << 40, "use fewer bits"));
    }
    let seeds = 1u64 << spec.seed_bits();
    let work = seeds as u128 * (nx * nv * nz) as u128;
    if work > work_cap {
        return Err(Error::resource("leftover-hash enumeration", work, work_cap, "shrink the alphabets or key"));
    }
    let k = 1usize << key_bits;
    let x_bits: Vec<Bits> = (0..nx).map(|x| Bits::from_u64(x as u64, d)).collect();
    let mut pvz = vec![0.0; nv * nz];
    for (_, v, z, m) in p.support() {
        pvz[v * nz + z] += m;
    }
    let mut total = NeumaierSum::default();
    let mut table = vec![0.0; nv * nz * k];
    for s in 0..seeds {
        let seed = HashSeed::from_index(spec, s)?;
        let keys: Vec<usize> = x_bits.iter().map(|b| hash_index(&seed, b).map(|v| v as usize)).collect::<Result<_>>()?;
        table.iter_mut().for_each(|v| *v = 0.0);
        for (x, v, z, m) in p.support() {
            table[(v * nz + z) * k + keys[x]] += m;
        }
        let mut dist = NeumaierSum::default();
        for (i, &mass) in pvz.iter().enumerate() {
            for key in 0..k {
                dist.add((table[i * k + key] - mass / k as f64).abs());
            }
        }
        total.add(0.5 * dist.value());
    }
    // Q_Z(z) ∝ max_x p(x, z) maximizes the conditional min-entropy
    let mut pxz = vec![0.0; nx * nz];
    for (x, _, z, m) in p.support() {
        pxz[x * nz + z] += m;
    }
    let best: Vec<f64> = (0..nz).map(|z| (0..nx).map(|x| pxz[x * nz + z]).fold(0.0, f64::max)).collect();
    let norm: f64 = best.iter().sum();
    let q = Pmf::new(best.iter().map(|b| b / norm).collect())?;
    let h = min_entropy_cond(&PairPmf::new(nx, nz, pxz)?, &q)?;
    Ok(LeftoverHashReport {
        distance: total.value() / seeds as f64,
        bound: 0.5 * ((k * nv) as f64 * (-h).exp2()).sqrt(),
        min_entropy: h,
        seeds,
    })
}
