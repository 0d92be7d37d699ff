//! Slotted broadcast simulation of one spatio-temporal slot and header-length
//! accounting for several header schemes.
//!
//! Nodes sit uniformly in the unit square; two nodes hear each other when
//! closer than a radius tuned so the graph has diameter 10 and minimum
//! degree at least 3. `g` random nodes each own one source packet. A node
//! that receives an innovative packet in slot `s` schedules `⌊d⌋` coded
//! broadcasts for slot `s + 1`, plus one more with probability `d − ⌊d⌋`.
//! The sink never forwards. Each broadcast is a uniform non-zero GF(2)
//! combination of the sender's buffer. The MAC is ideal: every neighbor
//! receives every broadcast.
//!
//! The simulation tracks global coefficient vectors (which sources a packet
//! mixes). Header lengths are derived from those vectors afterwards, so the
//! dynamics do not depend on the header scheme.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{expected_branches, expected_error_bound, PmfSource};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, IncrementalBasis};

pub const TARGET_DIAMETER: usize = 10;
pub const MIN_DEGREE: usize = 3;
const MAX_PLACEMENTS: usize = 20_000;
const MAX_HASH_LEN: usize = 256;
const MAX_BLOCK_LEN: usize = 1 << 16;

// independent RNG streams derived from one seed
const STREAM_TOPOLOGY: u64 = 1;
const STREAM_DYNAMICS: u64 = 2;
const STREAM_INDICES: u64 = 3;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random geometric graph; the sink is the last node.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub positions: Vec<(f64, f64)>,
    pub radius: f64,
    pub adjacency: Vec<Vec<usize>>,
    pub sink: usize,
}

impl Topology {
    /// Number of non-sink nodes.
    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Longest shortest path, `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        diameter(&self.adjacency)
    }
}

fn bfs_ecc(adj: &[Vec<usize>], src: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) -> Option<usize> {
    dist.fill(usize::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    let mut seen = 1;
    let mut far = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                far = far.max(dist[v]);
                seen += 1;
                queue.push_back(v);
            }
        }
    }
    (seen == adj.len()).then_some(far)
}

fn diameter(adj: &[Vec<usize>]) -> Option<usize> {
    let mut dist = vec![0; adj.len()];
    let mut queue = VecDeque::with_capacity(adj.len());
    let mut best = 0;
    for s in 0..adj.len() {
        best = best.max(bfs_ecc(adj, s, &mut dist, &mut queue)?);
    }
    Some(best)
}

fn adjacency_of(n: usize, pairs: &[(f64, usize, usize)], edges: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(_, i, j) in &pairs[..edges] {
        adj[i].push(j);
        adj[j].push(i);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    adj
}

/// Places nodes and picks the largest radius whose graph has diameter
/// exactly [`TARGET_DIAMETER`]; placements whose graph at that radius has a
/// node of degree below [`MIN_DEGREE`] are discarded and redrawn.
pub fn generate_topology(n: usize, seed: u64) -> Result<Topology> {
    if n < 20 {
        return Err(Error::InvalidConfig(format!("need at least 20 nodes, got {n}")));
    }
    let mut rng = rng_for(seed, STREAM_TOPOLOGY);
    let total = n + 1;
    for _ in 0..MAX_PLACEMENTS {
        let positions: Vec<(f64, f64)> = (0..total).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let mut pairs = Vec::with_capacity(total * (total - 1) / 2);
        for i in 0..total {
            for j in i + 1..total {
                let (dx, dy) = (positions[i].0 - positions[j].0, positions[i].1 - positions[j].1);
                pairs.push(((dx * dx + dy * dy).sqrt(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // smallest edge count whose graph is connected with diameter below target
        let short = |k: usize| diameter(&adjacency_of(total, &pairs, k)).is_some_and(|d| d < TARGET_DIAMETER);
        let (mut lo, mut hi) = (0, pairs.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if short(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == 0 || lo == pairs.len() && !short(lo) {
            continue;
        }
        let edges = lo - 1;
        let adjacency = adjacency_of(total, &pairs, edges);
        if diameter(&adjacency) != Some(TARGET_DIAMETER) || adjacency.iter().any(|a| a.len() < MIN_DEGREE) {
            continue;
        }
        let radius = if edges == 0 {
            pairs[0].0 / 2.0
        } else {
            (pairs[edges - 1].0 + pairs[edges].0) / 2.0
        };
        return Ok(Topology {
            positions,
            radius,
            adjacency,
            sink: n,
        });
    }
    Err(Error::TopologyGeneration {
        attempts: MAX_PLACEMENTS,
    })
}

/// How packet headers are represented.
#[derive(Clone, Debug, PartialEq)]
pub enum HeaderScheme {
    /// One coordinate per potential source: `N` bits.
    PlainNc,
    /// List of the identifiers of the mixed packets.
    Cope,
    /// Random-index header with given block lengths; the hash is sized for `p_c`.
    NecorpiaFixed { lengths: Vec<usize> },
    /// Random-index header with equal blocks sized for a branch budget.
    NecorpiaAdaptive { n_v: usize, nb_max: f64 },
}

impl HeaderScheme {
    pub fn name(&self) -> String {
        match self {
            Self::PlainNc => "plain_nc".into(),
            Self::Cope => "cope".into(),
            Self::NecorpiaFixed { lengths } => format!(
                "necorpia_fixed_{}",
                lengths.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
            ),
            Self::NecorpiaAdaptive { n_v, .. } => format!("necorpia_adaptive_nv{n_v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Number of non-sink nodes.
    pub n: usize,
    /// Number of sources.
    pub g: usize,
    pub forwarding_factor: f64,
    /// Target collision or decoding-failure probability for header sizing.
    pub p_c: f64,
    pub scheme: HeaderScheme,
    /// Buffer size per node; `None` keeps every innovative vector.
    pub buffer_size: Option<usize>,
    pub seed: u64,
    /// Defaults to 50 × the graph diameter.
    pub slot_limit: Option<usize>,
    /// Bound on active sources used to size COPE identifiers; defaults to `N`.
    pub cope_g_max: Option<usize>,
}

impl SimConfig {
    pub fn new(n: usize, g: usize, seed: u64) -> Self {
        Self {
            n,
            g,
            forwarding_factor: 1.5,
            p_c: 1e-6,
            scheme: HeaderScheme::PlainNc,
            buffer_size: None,
            seed,
            slot_limit: None,
            cope_g_max: None,
        }
    }

    fn validate(&self, topo: &Topology) -> Result<()> {
        if self.g == 0 || self.g > self.n {
            return Err(Error::InvalidConfig(format!("need 1 <= g <= N, got g = {} and N = {}", self.g, self.n)));
        }
        if topo.n() != self.n {
            return Err(Error::InvalidConfig("topology size differs from N".into()));
        }
        if !(self.forwarding_factor >= 0.0 && self.forwarding_factor.is_finite()) {
            return Err(Error::InvalidConfig("forwarding factor must be finite and non-negative".into()));
        }
        if !(self.p_c > 0.0 && self.p_c < 1.0) {
            return Err(Error::InvalidConfig("p_c must lie in (0, 1)".into()));
        }
        if self.buffer_size == Some(0) {
            return Err(Error::InvalidConfig("buffer size must be positive".into()));
        }
        Ok(())
    }
}

/// Average header length of a scheme, raw and entropy coded.
#[derive(Clone, Debug, PartialEq)]
pub struct HeaderBits {
    pub raw: f64,
    pub entropy_coded: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub slots_elapsed: usize,
    pub total_transmissions: usize,
    /// Global coefficient vector (length `g`) of every broadcast, in order.
    pub transmissions: Vec<BitVec>,
    /// Canonical header indices drawn by each source, for random-index schemes.
    pub source_indices: Vec<Vec<usize>>,
    pub decoded: bool,
    pub sink_rank: usize,
    pub header_bits: HeaderBits,
}

impl SimResult {
    pub fn nonzero_counts(&self) -> Vec<usize> {
        self.transmissions.iter().map(BitVec::count_ones).collect()
    }
}

struct Node {
    basis: IncrementalBasis,
    buffer: VecDeque<BitVec>,
}

/// Simulates one slot until the sink has rank `g`.
pub fn run_sts(topo: &Topology, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate(topo)?;
    let g = cfg.g;
    let limit = cfg
        .slot_limit
        .unwrap_or(50 * topo.diameter().unwrap_or(TARGET_DIAMETER));
    let mut rng = rng_for(cfg.seed, STREAM_DYNAMICS);
    let sources = sample(&mut rng, cfg.n, g).into_vec();

    let total = topo.positions.len();
    let mut nodes: Vec<Node> = (0..total)
        .map(|_| Node {
            basis: IncrementalBasis::new(g),
            buffer: VecDeque::new(),
        })
        .collect();
    let d_floor = cfg.forwarding_factor.floor();
    let d_frac = cfg.forwarding_factor - d_floor;
    let d_floor = d_floor as usize;
    let mut pending = vec![0usize; total];
    let schedule = |rng: &mut ChaCha8Rng| d_floor + usize::from(d_frac > 0.0 && rng.random_bool(d_frac));

    for (i, &s) in sources.iter().enumerate() {
        let v = BitVec::unit(g, i);
        nodes[s].basis.insert(&v);
        nodes[s].buffer.push_back(v);
        pending[s] += schedule(&mut rng);
    }

    let mut transmissions = Vec::new();
    let mut slot = 0;
    let decoded = loop {
        if nodes[topo.sink].basis.rank() == g {
            break true;
        }
        if slot >= limit {
            return Err(Error::NonTermination(format!(
                "sink rank {} of {g} after {limit} slots",
                nodes[topo.sink].basis.rank()
            )));
        }
        if pending.iter().all(|&p| p == 0) {
            return Err(Error::NonTermination(format!(
                "forwarding died out in slot {slot} with sink rank {} of {g}",
                nodes[topo.sink].basis.rank()
            )));
        }
        let mut sent: Vec<(usize, BitVec)> = Vec::new();
        for (u, count) in pending.iter_mut().enumerate() {
            for _ in 0..std::mem::take(count) {
                sent.push((u, random_combination(&nodes[u].buffer, g, &mut rng)));
            }
        }
        for (u, packet) in sent {
            for &v in &topo.adjacency[u] {
                let node = &mut nodes[v];
                if node.basis.insert(&packet) {
                    if v == topo.sink {
                        continue;
                    }
                    node.buffer.push_back(packet.clone());
                    if let Some(cap) = cfg.buffer_size {
                        while node.buffer.len() > cap {
                            node.buffer.pop_front();
                        }
                    }
                    pending[v] += schedule(&mut rng);
                }
            }
            transmissions.push(packet);
        }
        slot += 1;
    };

    let mut idx_rng = rng_for(cfg.seed, STREAM_INDICES);
    let (source_indices, header_bits) = match &cfg.scheme {
        HeaderScheme::PlainNc => (Vec::new(), plain_nc_bits(cfg.n, &transmissions)),
        HeaderScheme::Cope => {
            let avg = mean(transmissions.iter().map(|t| t.count_ones() as f64));
            let bits = cope_header_bits(cfg.cope_g_max.unwrap_or(cfg.n), cfg.p_c, avg);
            (Vec::new(), HeaderBits { raw: bits, entropy_coded: bits })
        }
        HeaderScheme::NecorpiaFixed { .. } | HeaderScheme::NecorpiaAdaptive { .. } => {
            let sizing = necorpia_sizing(&cfg.scheme, g, cfg.p_c)?;
            let idx: Vec<Vec<usize>> = (0..g)
                .map(|_| sizing.lengths.iter().map(|&l| idx_rng.random_range(0..l)).collect())
                .collect();
            let bits = necorpia_bits(&sizing, &idx, &transmissions);
            (idx, bits)
        }
    };
    Ok(SimResult {
        slots_elapsed: slot,
        total_transmissions: transmissions.len(),
        transmissions,
        source_indices,
        decoded,
        sink_rank: nodes[topo.sink].basis.rank(),
        header_bits,
    })
}

/// Uniform non-zero subset sum of the buffered vectors.
fn random_combination<R: Rng + ?Sized>(buffer: &VecDeque<BitVec>, g: usize, rng: &mut R) -> BitVec {
    debug_assert!(!buffer.is_empty());
    loop {
        let mut out = BitVec::zeros(g);
        let mut any = false;
        for b in buffer {
            if rng.random::<bool>() {
                out.xor_assign(b);
                any = true;
            }
        }
        if any && !out.is_zero() {
            return out;
        }
    }
}

fn mean<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in it {
        s += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Empirical law of the number of sources mixed per broadcast, pooled over
/// runs. Index `k` holds the share of broadcasts mixing `k` sources.
pub fn nonzero_coefficient_distribution(results: &[SimResult]) -> Vec<f64> {
    let g = results.iter().flat_map(|r| r.transmissions.first()).map(BitVec::len).max().unwrap_or(0);
    let mut counts = vec![0u64; g + 1];
    for r in results {
        for t in &r.transmissions {
            counts[t.count_ones()] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return counts.iter().map(|_| 0.0).collect();
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Mean of a distribution indexed by value.
pub fn distribution_mean(dist: &[f64]) -> f64 {
    dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

/// Smallest identifier length `b` with `C(g_max, 2)·2^{−b} ≤ p_c`.
pub fn cope_identifier_bits(g_max: usize, p_c: f64) -> usize {
    let pairs = (g_max * g_max.saturating_sub(1) / 2) as f64;
    if pairs <= p_c {
        return 0;
    }
    (pairs / p_c).log2().ceil() as usize
}

/// Average identifier-list header: mean mixed-packet count times the
/// identifier length. Coefficients are implicit over GF(2).
pub fn cope_header_bits(g_max: usize, p_c: f64, mean_nonzero: f64) -> f64 {
    mean_nonzero * cope_identifier_bits(g_max, p_c) as f64
}

pub fn plain_nc_header_bits(n: usize) -> usize {
    n
}

/// `log2 C(l, k) + log2(l + 1)`: enumerative code for a weight-`k` vector of
/// length `l`, with the weight itself sent in `log2(l + 1)` bits.
pub fn entropy_coded_bits(l: usize, k: usize) -> f64 {
    log2_binomial(l, k) + ((l + 1) as f64).log2()
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}

/// Mean entropy-coded length of a sample of header vectors.
pub fn mean_entropy_coded_bits(headers: &[BitVec]) -> f64 {
    mean(headers.iter().map(|h| entropy_coded_bits(h.len(), h.count_ones())))
}

fn plain_nc_bits(n: usize, transmissions: &[BitVec]) -> HeaderBits {
    HeaderBits {
        raw: plain_nc_header_bits(n) as f64,
        entropy_coded: mean(transmissions.iter().map(|t| entropy_coded_bits(n, t.count_ones()))),
    }
}

/// Block lengths and hash length of a random-index header.
#[derive(Clone, Debug, PartialEq)]
pub struct NecorpiaSizing {
    pub lengths: Vec<usize>,
    pub hash_len: usize,
}

impl NecorpiaSizing {
    pub fn total_bits(&self) -> usize {
        self.lengths.iter().sum::<usize>() + self.hash_len
    }
}

/// Smallest equal block length from which on `E[N_b(n_v+1)] ≤ nb_max`
/// holds for every longer block. Very short blocks can dip under the budget
/// because ranks are capped by the block length; those dips are skipped.
pub fn adaptive_block_length(g: usize, n_v: usize, nb_max: f64) -> Result<usize> {
    if !(1..=2).contains(&n_v) {
        return Err(Error::AnalyticUnavailable(n_v));
    }
    let within = |l: usize| -> Result<bool> {
        Ok(expected_branches(g, &vec![l; n_v], 2, &PmfSource::Analytic)?.terminal <= nb_max)
    };
    let mut hi = g.max(1);
    while !within(hi)? {
        hi *= 2;
        if hi > MAX_BLOCK_LEN {
            return Err(Error::InvalidConfig(format!(
                "no block length up to {MAX_BLOCK_LEN} meets the branch budget"
            )));
        }
    }
    let mut l = hi;
    while l > 1 && within(l - 1)? {
        l -= 1;
    }
    Ok(l)
}

/// Smallest hash length with `E[P_e] ≤ p_c` for the given blocks.
pub fn hash_length_for(g: usize, lengths: &[usize], p_c: f64) -> Result<usize> {
    for lh in 0..=MAX_HASH_LEN {
        if expected_error_bound(g, lengths, 2, lh, &PmfSource::Analytic)? <= p_c {
            return Ok(lh);
        }
    }
    Err(Error::InvalidConfig(format!("no hash up to {MAX_HASH_LEN} bits meets p_c = {p_c}")))
}

/// Header geometry for a random-index scheme at `g` active sources.
pub fn necorpia_sizing(scheme: &HeaderScheme, g: usize, p_c: f64) -> Result<NecorpiaSizing> {
    let lengths = match scheme {
        HeaderScheme::NecorpiaFixed { lengths } => lengths.clone(),
        HeaderScheme::NecorpiaAdaptive { n_v, nb_max } => vec![adaptive_block_length(g, *n_v, *nb_max)?; *n_v],
        _ => return Err(Error::InvalidConfig("not a random-index scheme".into())),
    };
    let hash_len = hash_length_for(g, &lengths, p_c)?;
    Ok(NecorpiaSizing { lengths, hash_len })
}

/// Raw and entropy-coded header lengths of the broadcasts when every source
/// carries the given canonical indices. The hash is never compressed.
fn necorpia_bits(sizing: &NecorpiaSizing, indices: &[Vec<usize>], transmissions: &[BitVec]) -> HeaderBits {
    let coded = transmissions.iter().map(|t| {
        let mut bits = sizing.hash_len as f64;
        for (l, &len) in sizing.lengths.iter().enumerate() {
            let mut block = BitVec::zeros(len);
            for s in t.ones() {
                block.toggle(indices[s][l]);
            }
            bits += entropy_coded_bits(len, block.count_ones());
        }
        bits
    });
    HeaderBits {
        raw: sizing.total_bits() as f64,
        entropy_coded: mean(coded),
    }
}

/// One row of a header comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct HeaderRow {
    pub g: usize,
    pub scheme: String,
    pub avg_header_bits: f64,
    pub avg_header_bits_entropy_coded: f64,
}

/// Parameters of [`header_comparison_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub gs: Vec<usize>,
    pub schemes: Vec<HeaderScheme>,
    pub topologies: usize,
    pub seed: u64,
    pub p_c: f64,
    pub forwarding_factor: f64,
    pub buffer_size: Option<usize>,
    /// Defaults to `n`.
    pub cope_g_max: Option<usize>,
    /// Redraws allowed per topology when forwarding dies out.
    pub max_redraws: usize,
}

impl SweepConfig {
    pub fn new(n: usize, gs: Vec<usize>, schemes: Vec<HeaderScheme>, seed: u64) -> Self {
        Self {
            n,
            gs,
            schemes,
            topologies: 10,
            seed,
            p_c: 1e-6,
            forwarding_factor: 1.5,
            buffer_size: None,
            cope_g_max: None,
            max_redraws: 100,
        }
    }
}

/// Per-`g` summary of the simulated runs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficRow {
    pub g: usize,
    /// Mean number of sources mixed per broadcast, pooled over topologies.
    pub avg_nonzero: f64,
    pub transmissions: usize,
    /// Runs discarded because forwarding died out before the sink decoded.
    pub stalled: usize,
}

/// Output of [`header_comparison_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<HeaderRow>,
    pub traffic: Vec<TrafficRow>,
}

/// For every `g`, simulates one decoded slot on each of `topologies`
/// networks, pools the broadcasts, and reports the average header length of
/// every scheme. Runs that stall are redrawn with a fresh seed and counted.
pub fn header_comparison_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    let topos = (0..cfg.topologies)
        .map(|t| generate_topology(cfg.n, derive_seed(cfg.seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut traffic = Vec::new();
    for &g in &cfg.gs {
        let mut runs = Vec::with_capacity(cfg.topologies);
        let mut stalled = 0;
        for (t, topo) in topos.iter().enumerate() {
            let base = derive_seed(cfg.seed ^ 0x5eed, (g as u64) << 32 | t as u64);
            let mut attempt = 0;
            let run = loop {
                let mut sim = SimConfig::new(cfg.n, g, derive_seed(base, attempt as u64));
                sim.p_c = cfg.p_c;
                sim.forwarding_factor = cfg.forwarding_factor;
                sim.buffer_size = cfg.buffer_size;
                match run_sts(topo, &sim) {
                    Ok(r) => break r,
                    Err(Error::NonTermination(msg)) => {
                        stalled += 1;
                        attempt += 1;
                        if attempt > cfg.max_redraws {
                            return Err(Error::NonTermination(msg));
                        }
                    }
                    Err(e) => return Err(e),
                }
            };
            runs.push(run);
        }
        let all: Vec<BitVec> = runs.iter().flat_map(|r| r.transmissions.iter().cloned()).collect();
        let avg_nonzero = distribution_mean(&nonzero_coefficient_distribution(&runs));
        traffic.push(TrafficRow {
            g,
            avg_nonzero,
            transmissions: all.len(),
            stalled,
        });
        for scheme in &cfg.schemes {
            let bits = match scheme {
                HeaderScheme::PlainNc => plain_nc_bits(cfg.n, &all),
                HeaderScheme::Cope => {
                    let b = cope_header_bits(cfg.cope_g_max.unwrap_or(cfg.n), cfg.p_c, avg_nonzero);
                    HeaderBits {
                        raw: b,
                        entropy_coded: b,
                    }
                }
                _ => {
                    let sizing = necorpia_sizing(scheme, g, cfg.p_c)?;
                    let mut coded = 0.0;
                    for (t, r) in runs.iter().enumerate() {
                        let mut rng = rng_for(derive_seed(cfg.seed ^ 0x1d, (g as u64) << 32 | t as u64), STREAM_INDICES);
                        let idx: Vec<Vec<usize>> = (0..g)
                            .map(|_| sizing.lengths.iter().map(|&l| rng.random_range(0..l)).collect())
                            .collect();
                        coded += necorpia_bits(&sizing, &idx, &r.transmissions).entropy_coded * r.transmissions.len() as f64;
                    }
                    HeaderBits {
                        raw: sizing.total_bits() as f64,
                        entropy_coded: if all.is_empty() { 0.0 } else { coded / all.len() as f64 },
                    }
                }
            };
            rows.push(HeaderRow {
                g,
                scheme: scheme.name(),
                avg_header_bits: bits.raw,
                avg_header_bits_entropy_coded: bits.entropy_coded,
            });
        }
    }
    Ok(SweepResult { rows, traffic })
}

/// Mixes a base seed with an index into a new seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
