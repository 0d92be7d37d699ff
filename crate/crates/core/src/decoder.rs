//! Recovering source packets from a full-rank received matrix without
//! knowing the mixing coefficients.
//!
//! The received `g × L_x` matrix `Y` is put in block echelon form `T·Y`.
//! A row vector `w = (w_1, …, w_nv, w_{nv+1})` applied to `T·Y` gives a
//! source packet only if every header block of `w·T·Y` is a unit vector and
//! the payload hash is consistent. Each `w_ℓ` for `ℓ ≤ n_v` is either zero or
//! a unit vector (exactly a unit vector for `ℓ = 1`), which turns the search
//! into a shallow tree explored depth first; the last part `w_{nv+1}` is
//! enumerated exhaustively and filtered by the hash.
//!
//! Two ways of expanding a node are provided: [`Variant::Sle`] scans the rows
//! of the diagonal block for every candidate unit vector, [`Variant::Lut`]
//! answers the same question with precomputed tables. Both visit the same
//! tree.
//!
//! Operation counts are kept in symbol operations: comparing or adding two
//! vectors of `n` bits counts `n`, flipping one bit counts 1.

use crate::error::{Error, Result};
use crate::gf2::{block_rref, BinaryMatrix, BitVec, EchelonDecomposition};
use crate::packet::{check_hash, HeaderConfig, SourcePacket, Sts};

/// Largest `ρ_{nv+1}` the terminal enumeration accepts.
pub const MAX_TERMINAL_RANK: usize = 40;

/// Largest generation the brute-force decoder enumerates.
pub const MAX_BRUTE_FORCE_G: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Sle,
    Lut,
}

/// A header-level part `w_ℓ`: `None` is the zero vector, `Some(k)` the unit
/// vector with its one at row `k` of the diagonal block.
pub type Choice = Option<usize>;

/// One admissible value of `w_ℓ` and the header index it produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelSolution {
    pub w: Choice,
    /// 0-based position of the single one in block `ℓ` of `w·T·Y`.
    pub j: usize,
}

/// `w = (w_1, …, w_{nv+1})` with `w_ℓ` of length `ρ_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnmixingVector {
    pub parts: Vec<BitVec>,
}

impl UnmixingVector {
    fn from_choices(choices: &[Choice], ranks: &[usize], last: BitVec) -> Self {
        let mut parts: Vec<BitVec> = choices
            .iter()
            .zip(ranks)
            .map(|(c, &r)| match c {
                None => BitVec::zeros(r),
                Some(k) => BitVec::unit(r, *k),
            })
            .collect();
        parts.push(last);
        Self { parts }
    }

    /// The parts concatenated into one vector of length `g`.
    pub fn concat(&self) -> BitVec {
        BitVec::concat(self.parts.iter())
    }
}

/// Counters collected during one decode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// `ρ_1, …, ρ_{nv+1}`.
    pub rank_profile: Vec<usize>,
    /// Nodes reached at levels `1..=n_v`, then terminal candidates evaluated.
    pub branches_per_level: Vec<u64>,
    /// Number of complete unmixing vectors whose hash was checked.
    pub terminal_candidates: u64,
    /// Symbol operations spent by the tree search and table construction.
    pub gf2_ops: u64,
    /// Symbol operations spent by the Gaussian fast path.
    pub fast_path_ops: u64,
    pub used_fast_path: bool,
}

/// Decoded packets. Every entry has unit header blocks and a consistent
/// hash; entries that are not among the transmitted packets are phantoms
/// and are left for the caller to weed out.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub recovered: Vec<SourcePacket>,
    pub unmixing_vectors: Vec<UnmixingVector>,
    pub stats: DecodeStats,
}

impl DecodeResult {
    /// Recovered packets in sorted order, convenient for set comparisons.
    pub fn sorted_packets(&self) -> Vec<SourcePacket> {
        let mut v = self.recovered.clone();
        v.sort();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Try plain Gaussian elimination on a collision-free header block first.
    pub fast_path: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self { fast_path: true }
    }
}

/// Look-up table for one diagonal block `B_ℓℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTable {
    width: usize,
    pivots: Vec<usize>,
    /// Distinct de-pivoted rows `ū = u − e_γ(u)`, in first-seen order.
    depivoted: Vec<BitVec>,
    /// For each entry of `depivoted`, the rows `k` of `B_ℓℓ` mapping to it.
    classes: Vec<Vec<usize>>,
}

impl LevelTable {
    /// Builds the table from the rows of an RREF block, counting operations.
    pub fn build(rows: &[BitVec], width: usize, ops: &mut u64) -> Self {
        let l = width as u64;
        let mut pivots = Vec::with_capacity(rows.len());
        let mut depivoted: Vec<BitVec> = Vec::new();
        for u in rows {
            let p = u.first_one().expect("rows of an echelon block are non-zero");
            *ops += l + 1;
            let mut bar = u.clone();
            bar.toggle(p);
            let mut seen = false;
            for d in &depivoted {
                *ops += l;
                if *d == bar {
                    seen = true;
                    break;
                }
            }
            if !seen {
                depivoted.push(bar);
            }
            pivots.push(p);
        }
        let mut classes = vec![Vec::new(); depivoted.len()];
        for (k, u) in rows.iter().enumerate() {
            *ops += l + 1;
            let mut bar = u.clone();
            bar.toggle(pivots[k]);
            for (c, d) in depivoted.iter().enumerate() {
                *ops += l;
                if *d == bar {
                    classes[c].push(k);
                    break;
                }
            }
        }
        Self {
            width,
            pivots,
            depivoted,
            classes,
        }
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// The set `Π_ℓ` of de-pivoted rows.
    pub fn depivoted(&self) -> &[BitVec] {
        &self.depivoted
    }

    /// Rows `k` whose de-pivoted form equals `v`.
    pub fn candidates(&self, v: &BitVec) -> Option<&[usize]> {
        self.depivoted
            .iter()
            .position(|d| d == v)
            .map(|c| self.classes[c].as_slice())
    }

    /// All admissible `w_ℓ` for the partial sum `v = Σ_{i<ℓ} w_i B_iℓ`.
    pub fn solve(&self, v: &BitVec, allow_zero: bool, ops: &mut u64) -> Vec<LevelSolution> {
        let l = self.width as u64;
        let mut out = Vec::new();
        if allow_zero {
            *ops += l;
            if v.count_ones() == 1 {
                out.push(LevelSolution {
                    w: None,
                    j: v.first_one().expect("weight one"),
                });
            }
        }
        for (c, d) in self.depivoted.iter().enumerate() {
            *ops += l;
            if d == v {
                out.extend(self.classes[c].iter().map(|&k| LevelSolution {
                    w: Some(k),
                    j: self.pivots[k],
                }));
                break;
            }
        }
        out
    }
}

/// Tables for every header level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupTables {
    pub levels: Vec<LevelTable>,
}

/// Builds the look-up tables for all diagonal blocks of `decomp`.
pub fn build_tables(decomp: &EchelonDecomposition) -> LookupTables {
    let mut ops = 0;
    build_tables_counted(decomp, &mut ops)
}

fn build_tables_counted(decomp: &EchelonDecomposition, ops: &mut u64) -> LookupTables {
    let levels = (0..decomp.n_v())
        .map(|l| LevelTable::build(&decomp.b(l, l).row_vectors(), decomp.widths()[l], ops))
        .collect();
    LookupTables { levels }
}

/// Row-scan solver for one diagonal block: for every unit vector `e_j`,
/// looks for a row of `B_ℓℓ` equal to `v + e_j`.
pub fn solve_block_sle(rows: &[BitVec], v: &BitVec, allow_zero: bool, ops: &mut u64) -> Vec<LevelSolution> {
    let width = v.len();
    let l = width as u64;
    let mut out = Vec::new();
    if allow_zero {
        *ops += l;
        if v.count_ones() == 1 {
            out.push(LevelSolution {
                w: None,
                j: v.first_one().expect("weight one"),
            });
        }
    }
    let mut t = v.clone();
    for j in 0..width {
        t.toggle(j);
        if allow_zero {
            *ops += 1;
        }
        for (k, u) in rows.iter().enumerate() {
            *ops += l;
            if *u == t {
                out.push(LevelSolution { w: Some(k), j });
                break;
            }
        }
        t.toggle(j);
    }
    out.sort();
    out
}

/// Rows of every block, extracted once per decode.
struct Prepared {
    nv: usize,
    widths: Vec<usize>,
    ranks: Vec<usize>,
    /// `b_rows[i][l]`: rows of `B_il` for `i ≤ l`.
    b_rows: Vec<Vec<Vec<BitVec>>>,
    /// `c_rows[i]`: rows of `C_i` for `i ≤ n_v`.
    c_rows: Vec<Vec<BitVec>>,
}

impl Prepared {
    fn new(decomp: &EchelonDecomposition) -> Self {
        let nv = decomp.n_v();
        let b_rows = (0..nv)
            .map(|i| {
                (0..nv)
                    .map(|l| if i <= l { decomp.b(i, l).row_vectors() } else { Vec::new() })
                    .collect()
            })
            .collect();
        let c_rows = (0..=nv).map(|i| decomp.c(i).row_vectors()).collect();
        Self {
            nv,
            widths: decomp.widths().to_vec(),
            ranks: decomp.ranks().to_vec(),
            b_rows,
            c_rows,
        }
    }

    /// `v = Σ_{i<l} w_i B_il`.
    fn partial_sum(&self, prefix: &[Choice], l: usize, ops: &mut u64) -> BitVec {
        let mut v = BitVec::zeros(self.widths[l]);
        for (i, c) in prefix.iter().enumerate() {
            if let Some(k) = c {
                v.xor_assign(&self.b_rows[i][l][*k]);
                *ops += self.widths[l] as u64;
            }
        }
        v
    }

    fn solve_level(
        &self,
        prefix: &[Choice],
        l: usize,
        variant: Variant,
        tables: Option<&LookupTables>,
        ops: &mut u64,
    ) -> Vec<LevelSolution> {
        let v = if l == 0 {
            BitVec::zeros(self.widths[0])
        } else {
            self.partial_sum(prefix, l, ops)
        };
        match variant {
            Variant::Sle => solve_block_sle(&self.b_rows[l][l], &v, l > 0, ops),
            Variant::Lut => tables.expect("tables built for the LUT variant").levels[l].solve(&v, l > 0, ops),
        }
    }
}

fn check_prefix(decomp: &EchelonDecomposition, prefix: &[Choice], l: usize) -> Result<()> {
    if l >= decomp.n_v() || prefix.len() != l {
        return Err(Error::Shape(format!(
            "level {l} with a prefix of {} parts for {} header blocks",
            prefix.len(),
            decomp.n_v()
        )));
    }
    for (i, c) in prefix.iter().enumerate() {
        if let Some(k) = c {
            if *k >= decomp.ranks()[i] {
                return Err(Error::Shape(format!("choice {k} exceeds rank of level {i}")));
            }
        }
    }
    Ok(())
}

/// Admissible `w_ℓ` at 0-based level `l` given `w_1..w_{l}` (row-scan solver).
pub fn solve_level_sle(decomp: &EchelonDecomposition, prefix: &[Choice], l: usize) -> Result<Vec<LevelSolution>> {
    check_prefix(decomp, prefix, l)?;
    let mut ops = 0;
    Ok(Prepared::new(decomp).solve_level(prefix, l, Variant::Sle, None, &mut ops))
}

/// Same contract as [`solve_level_sle`], answered from look-up tables.
pub fn solve_level_lut(
    decomp: &EchelonDecomposition,
    tables: &LookupTables,
    prefix: &[Choice],
    l: usize,
) -> Result<Vec<LevelSolution>> {
    check_prefix(decomp, prefix, l)?;
    let mut ops = 0;
    Ok(Prepared::new(decomp).solve_level(prefix, l, Variant::Lut, Some(tables), &mut ops))
}

struct Terminal {
    unmixing: UnmixingVector,
    tail: BitVec,
}

/// Enumerates every `w_{nv+1}` for a complete header prefix and keeps the
/// hash-consistent ones. Counts candidates and operations.
fn expand_terminal_counted(
    prep: &Prepared,
    prefix: &[Choice],
    hash_len: usize,
    ops: &mut u64,
    evaluated: &mut u64,
) -> Vec<Terminal> {
    let nv = prep.nv;
    let rho = prep.ranks[nv];
    let lp = prep.widths[nv];
    let mut tail = BitVec::zeros(lp);
    for (i, c) in prefix.iter().enumerate() {
        if let Some(k) = c {
            tail.xor_assign(&prep.c_rows[i][*k]);
            *ops += lp as u64;
        }
    }
    let mut out = Vec::new();
    let mut last = BitVec::zeros(rho);
    let total: u64 = 1 << rho;
    for t in 0..total {
        if t > 0 {
            let bit = t.trailing_zeros() as usize;
            last.toggle(bit);
            tail.xor_assign(&prep.c_rows[nv][bit]);
            *ops += lp as u64;
        }
        *ops += lp as u64;
        *evaluated += 1;
        if check_hash(&tail, hash_len) {
            out.push(Terminal {
                unmixing: UnmixingVector::from_choices(prefix, &prep.ranks[..nv], last.clone()),
                tail: tail.clone(),
            });
        }
    }
    out
}

/// All hash-consistent completions of a header prefix `w_1..w_nv`.
pub fn expand_terminal(
    decomp: &EchelonDecomposition,
    cfg: &HeaderConfig,
    prefix: &[Choice],
) -> Result<Vec<UnmixingVector>> {
    if prefix.len() != decomp.n_v() {
        return Err(Error::Shape("terminal expansion needs a choice for every header block".into()));
    }
    let rho = decomp.ranks()[decomp.n_v()];
    if rho > MAX_TERMINAL_RANK {
        return Err(Error::TooLarge(format!("payload-level rank {rho}")));
    }
    let prep = Prepared::new(decomp);
    let (mut ops, mut evaluated) = (0, 0);
    Ok(expand_terminal_counted(&prep, prefix, cfg.hash_len, &mut ops, &mut evaluated)
        .into_iter()
        .map(|t| t.unmixing)
        .collect())
}

/// Plain Gaussian elimination when some header block of `T·Y` has rank `g`,
/// i.e. all sources picked distinct indices in that block.
pub fn try_gaussian(decomp: &EchelonDecomposition, cfg: &HeaderConfig, sts: Sts) -> Option<DecodeResult> {
    let g = decomp.rank();
    let nv = decomp.n_v();
    let ty = decomp.reduced();
    let mut ops = 0u64;
    let block = if decomp.ranks()[0] == g {
        Some(0)
    } else {
        (1..nv).find(|&l| {
            let cols = ty.column_slice(decomp.column_range(l));
            let r = cols.rref();
            ops += (r.row_ops * cols.cols()) as u64;
            r.rank() == g
        })
    };
    let block = block?;
    let rows = if block == 0 {
        ty.row_vectors()
    } else {
        let r = ty.column_slice(decomp.column_range(block)).rref_with_transform();
        let t = r.transform.expect("transform requested");
        ops += (r.row_ops * (cols_of(decomp, block) + g)) as u64;
        let x = t.mul(ty).expect("square transform");
        let nnz: usize = (0..g).map(|i| t.row(i).count_ones()).sum();
        ops += (nnz * ty.cols()) as u64;
        x.row_vectors()
    };
    let mut recovered = Vec::with_capacity(g);
    let mut unmixing_vectors = Vec::with_capacity(g);
    for (i, row) in rows.iter().enumerate() {
        let p = SourcePacket::parse(row, cfg, sts).ok()?;
        ops += cfg.tail_len() as u64;
        if !p.has_valid_hash() {
            return None;
        }
        recovered.push(p);
        unmixing_vectors.push(UnmixingVector {
            parts: vec![BitVec::unit(g, i)],
        });
    }
    let mut branches = vec![0; nv + 1];
    branches[nv] = g as u64;
    Some(DecodeResult {
        recovered,
        unmixing_vectors,
        stats: DecodeStats {
            rank_profile: decomp.ranks().to_vec(),
            branches_per_level: branches,
            terminal_candidates: g as u64,
            gf2_ops: 0,
            fast_path_ops: ops,
            used_fast_path: true,
        },
    })
}

fn cols_of(decomp: &EchelonDecomposition, block: usize) -> usize {
    decomp.widths()[block]
}

fn validate_input(y: &BinaryMatrix, cfg: &HeaderConfig) -> Result<()> {
    cfg.validate()?;
    if y.cols() != cfg.packet_len() {
        return Err(Error::Shape(format!(
            "received matrix has {} columns, packet length is {}",
            y.cols(),
            cfg.packet_len()
        )));
    }
    Ok(())
}

/// Tree decoder with the fast path enabled.
pub fn derpia(y: &BinaryMatrix, cfg: &HeaderConfig, sts: Sts, variant: Variant) -> Result<DecodeResult> {
    derpia_with(y, cfg, sts, variant, DecodeOptions::default())
}

/// Tree decoder. `y` must have full row rank.
pub fn derpia_with(
    y: &BinaryMatrix,
    cfg: &HeaderConfig,
    sts: Sts,
    variant: Variant,
    options: DecodeOptions,
) -> Result<DecodeResult> {
    validate_input(y, cfg)?;
    let decomp = block_rref(y, &cfg.block_lengths, cfg.tail_len())?;
    let g = y.rows();
    if decomp.rank() != g {
        return Err(Error::InsufficientRank {
            rank: decomp.rank(),
            needed: g,
        });
    }
    derpia_on(&decomp, cfg, sts, variant, options)
}

/// Tree decoder on an existing decomposition of a full-rank matrix.
pub fn derpia_on(
    decomp: &EchelonDecomposition,
    cfg: &HeaderConfig,
    sts: Sts,
    variant: Variant,
    options: DecodeOptions,
) -> Result<DecodeResult> {
    let nv = decomp.n_v();
    if nv != cfg.n_v() {
        return Err(Error::Shape("decomposition and configuration disagree on n_v".into()));
    }
    if options.fast_path && decomp.rank() > 0 {
        if let Some(r) = try_gaussian(decomp, cfg, sts) {
            return Ok(r);
        }
    }
    let rho_last = decomp.ranks()[nv];
    if rho_last > MAX_TERMINAL_RANK {
        return Err(Error::TooLarge(format!("payload-level rank {rho_last}")));
    }
    let prep = Prepared::new(decomp);
    let mut search = Search {
        prep: &prep,
        cfg,
        sts,
        variant,
        tables: None,
        stats: DecodeStats {
            rank_profile: decomp.ranks().to_vec(),
            branches_per_level: vec![0; nv + 1],
            ..DecodeStats::default()
        },
        recovered: Vec::new(),
        unmixing: Vec::new(),
        choices: Vec::with_capacity(nv),
        indices: Vec::with_capacity(nv),
    };
    if variant == Variant::Lut {
        let mut ops = 0;
        search.tables = Some(build_tables_counted(decomp, &mut ops));
        search.stats.gf2_ops += ops;
    }
    if decomp.rank() > 0 {
        search.descend(0);
    }
    search.stats.branches_per_level[nv] = search.stats.terminal_candidates;
    Ok(DecodeResult {
        recovered: search.recovered,
        unmixing_vectors: search.unmixing,
        stats: search.stats,
    })
}

struct Search<'a> {
    prep: &'a Prepared,
    cfg: &'a HeaderConfig,
    sts: Sts,
    variant: Variant,
    tables: Option<LookupTables>,
    stats: DecodeStats,
    recovered: Vec<SourcePacket>,
    unmixing: Vec<UnmixingVector>,
    choices: Vec<Choice>,
    indices: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, l: usize) {
        if l == self.prep.nv {
            let mut evaluated = 0;
            let found = expand_terminal_counted(
                self.prep,
                &self.choices,
                self.cfg.hash_len,
                &mut self.stats.gf2_ops,
                &mut evaluated,
            );
            self.stats.terminal_candidates += evaluated;
            for t in found {
                let payload = t.tail.slice(0..self.cfg.payload_len);
                let hash = t.tail.slice(self.cfg.payload_len..t.tail.len());
                self.recovered.push(SourcePacket {
                    sts: self.sts,
                    indices: self.indices.clone(),
                    payload,
                    hash,
                });
                self.unmixing.push(t.unmixing);
            }
            return;
        }
        let sols = self.prep.solve_level(
            &self.choices,
            l,
            self.variant,
            self.tables.as_ref(),
            &mut self.stats.gf2_ops,
        );
        for s in sols {
            self.stats.branches_per_level[l] += 1;
            self.choices.push(s.w);
            self.indices.push(s.j);
            self.descend(l + 1);
            self.choices.pop();
            self.indices.pop();
        }
    }
}

/// Ground truth by exhaustion: every non-zero combination of the rows of a
/// basis of `y` whose header blocks are unit vectors and whose hash checks.
pub fn brute_force_decode(y: &BinaryMatrix, cfg: &HeaderConfig, sts: Sts) -> Result<DecodeResult> {
    validate_input(y, cfg)?;
    let g = y.rows();
    if g > MAX_BRUTE_FORCE_G {
        return Err(Error::TooLarge(format!("brute force limited to g <= {MAX_BRUTE_FORCE_G}, got {g}")));
    }
    let rref = y.rref();
    if rref.rank() != g {
        return Err(Error::InsufficientRank {
            rank: rref.rank(),
            needed: g,
        });
    }
    let basis = rref.matrix.row_vectors();
    let mut acc = BitVec::zeros(cfg.packet_len());
    let mut w = BitVec::zeros(g);
    let mut recovered = Vec::new();
    let mut unmixing_vectors = Vec::new();
    let mut evaluated = 0u64;
    for t in 1u64..(1 << g) {
        let bit = t.trailing_zeros() as usize;
        w.toggle(bit);
        acc.xor_assign(&basis[bit]);
        evaluated += 1;
        let Ok(p) = SourcePacket::parse(&acc, cfg, sts) else {
            continue;
        };
        if p.has_valid_hash() {
            recovered.push(p);
            unmixing_vectors.push(UnmixingVector { parts: vec![w.clone()] });
        }
    }
    Ok(DecodeResult {
        recovered,
        unmixing_vectors,
        stats: DecodeStats {
            terminal_candidates: evaluated,
            ..DecodeStats::default()
        },
    })
}
