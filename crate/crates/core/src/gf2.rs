//! Bit-packed vectors and matrices over GF(2).
//!
//! Storage is row-major with 64-bit words. Bit `i` of a row lives in word
//! `i / 64` at position `i % 64` (least significant first). Bits past the
//! logical length of a row are always zero, so word-wise equality and
//! popcounts are exact.
//!
//! The byte serialization ([`BitVec::to_bytes`]) is a separate, documented
//! wire order: bit `i` goes to byte `i / 8` at mask `0x80 >> (i % 8)`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The canonical vector `e_i` of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Wraps raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * WORD_BITS + t)
                }
            })
        })
    }

    /// `self += other` over GF(2). Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND, i.e. the GF(2) dot product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// Reads up to 64 bits starting at `offset`; bits past the end read as zero.
    #[inline]
    pub fn word_at(&self, offset: usize) -> u64 {
        if offset >= self.len {
            return 0;
        }
        let k = offset / WORD_BITS;
        let s = offset % WORD_BITS;
        let lo = self.words[k] >> s;
        if s == 0 {
            lo
        } else {
            let hi = self.words.get(k + 1).copied().unwrap_or(0);
            lo | (hi << (WORD_BITS - s))
        }
    }

    pub fn slice(&self, range: Range<usize>) -> BitVec {
        assert!(range.start <= range.end && range.end <= self.len, "slice out of range");
        let len = range.end - range.start;
        let words = (0..words_for(len))
            .map(|k| self.word_at(range.start + k * WORD_BITS))
            .collect();
        BitVec::from_words(len, words)
    }

    /// Appends the bits of `other`.
    pub fn extend(&mut self, other: &BitVec) {
        let old = self.len;
        self.len += other.len;
        self.words.resize(words_for(self.len), 0);
        let s = old % WORD_BITS;
        let base = old / WORD_BITS;
        for (k, &w) in other.words.iter().enumerate() {
            self.words[base + k] |= w << s;
            if s != 0 && base + k + 1 < self.words.len() {
                self.words[base + k + 1] |= w >> (WORD_BITS - s);
            }
        }
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitVec>>(parts: I) -> BitVec {
        let mut out = BitVec::zeros(0);
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Big-endian bit order within bytes; the final byte is zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in self.ones() {
            out[i / 8] |= 0x80 >> (i % 8);
        }
        out
    }

    /// Inverse of [`BitVec::to_bytes`]. Padding bits must be zero.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitVec> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "expected {} bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut v = BitVec::zeros(len);
        for (k, &byte) in bytes.iter().enumerate() {
            for b in 0..8 {
                if byte & (0x80 >> b) != 0 {
                    let i = k * 8 + b;
                    if i >= len {
                        return Err(Error::Format("non-zero padding bits".into()));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}]({self})", self.len)
    }
}

/// Parses `0`/`1` characters; `_`, `|` and whitespace are ignored as separators.
impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | '|' => {}
                c if c.is_whitespace() => {}
                c => return Err(Error::Format(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(BitVec::from_bools(bits))
    }
}

/// A dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form of a matrix.
#[derive(Clone, Debug)]
pub struct Rref {
    /// Same shape as the input; the first `pivots.len()` rows are non-zero.
    pub matrix: BinaryMatrix,
    /// Pivot column of each non-zero row, strictly increasing.
    pub pivots: Vec<usize>,
    /// `transform · input == matrix` when requested.
    pub transform: Option<BinaryMatrix>,
    /// Number of row additions performed.
    pub row_ops: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks rows; an empty slice gives a `0 × cols` matrix only through
    /// [`BinaryMatrix::zeros`], so here `cols` is taken from the first row.
    pub fn from_rows(rows: &[BitVec]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        Self::from_rows_with_cols(rows, cols)
    }

    pub fn from_rows_with_cols(rows: &[BitVec], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let r = BitVec::random(cols, rng);
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVec> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    /// `row[dst] += row[src]`.
    #[inline]
    pub fn xor_rows(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s], &mut lo[dst * s..(dst + 1) * s])
        };
        for (d, w) in b.iter_mut().zip(a) {
            *d ^= w;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = BitVec::from_words(self.cols, self.row_words(i).to_vec());
            for k in lhs.ones() {
                let src = other.row_words(k);
                for (d, w) in out.row_words_mut(i).iter_mut().zip(src) {
                    *d ^= w;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.rows {
            return Err(Error::Shape(format!(
                "cannot multiply vector of length {} by {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.cols);
        for k in v.ones() {
            out.xor_assign(&self.row(k));
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Columns `range` of every row.
    pub fn column_slice(&self, range: Range<usize>) -> BinaryMatrix {
        assert!(range.end <= self.cols, "column range out of bounds");
        let rows: Vec<BitVec> = (0..self.rows).map(|r| self.row(r).slice(range.clone())).collect();
        BinaryMatrix::from_rows_with_cols(&rows, range.end - range.start).expect("uniform widths")
    }

    /// Rows `range` of the matrix.
    pub fn row_slice(&self, range: Range<usize>) -> BinaryMatrix {
        assert!(range.end <= self.rows, "row range out of bounds");
        BinaryMatrix {
            rows: range.end - range.start,
            cols: self.cols,
            stride: self.stride,
            data: self.data[range.start * self.stride..range.end * self.stride].to_vec(),
        }
    }

    pub fn hstack(parts: &[&BinaryMatrix]) -> Result<BinaryMatrix> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::Shape("hstack of matrices with different row counts".into()));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let out: Vec<BitVec> = (0..rows)
            .map(|r| BitVec::concat(parts.iter().map(|m| m.row(r)).collect::<Vec<_>>().iter()))
            .collect();
        BinaryMatrix::from_rows_with_cols(&out, cols)
    }

    pub fn vstack(parts: &[&BinaryMatrix]) -> Result<BinaryMatrix> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(Error::Shape("vstack of matrices with different column counts".into()));
        }
        let mut out = BinaryMatrix::zeros(parts.iter().map(|m| m.rows).sum(), cols);
        let mut at = 0;
        for m in parts {
            out.data[at * out.stride..(at + m.rows) * out.stride].copy_from_slice(&m.data);
            at += m.rows;
        }
        Ok(out)
    }

    /// Reduced row echelon form. Pivots are chosen scanning columns left to
    /// right and, within a column, rows top to bottom.
    pub fn rref(&self) -> Rref {
        self.rref_impl(false)
    }

    /// Like [`BinaryMatrix::rref`], also returning `T` with `T · self == rref`.
    pub fn rref_with_transform(&self) -> Rref {
        self.rref_impl(true)
    }

    fn rref_impl(&self, with_transform: bool) -> Rref {
        let mut m = self.clone();
        let mut t = with_transform.then(|| BinaryMatrix::identity(self.rows));
        let mut pivots = Vec::new();
        let mut row_ops = 0;
        let mut next = 0;
        for c in 0..self.cols {
            if next == m.rows {
                break;
            }
            let Some(p) = (next..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(p, next);
            if let Some(t) = t.as_mut() {
                t.swap_rows(p, next);
            }
            for r in 0..m.rows {
                if r != next && m.get(r, c) {
                    m.xor_rows(next, r);
                    row_ops += 1;
                    if let Some(t) = t.as_mut() {
                        t.xor_rows(next, r);
                    }
                }
            }
            pivots.push(c);
            next += 1;
        }
        Rref {
            matrix: m,
            pivots,
            transform: t,
            row_ops,
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(p, rank);
            for r in rank + 1..m.rows {
                if m.get(r, c) {
                    m.xor_rows(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Picks `g` linearly independent rows, scanning from the top and keeping
    /// each row that is independent of those already kept.
    pub fn select_full_rank_rows(&self, g: usize) -> Result<BinaryMatrix> {
        let mut basis = IncrementalBasis::new(self.cols);
        let mut kept = Vec::with_capacity(g);
        for r in 0..self.rows {
            if kept.len() == g {
                break;
            }
            let row = self.row(r);
            if basis.insert(&row) {
                kept.push(row);
            }
        }
        if kept.len() < g {
            return Err(Error::InsufficientRank {
                rank: self.rank(),
                needed: g,
            });
        }
        BinaryMatrix::from_rows_with_cols(&kept, self.cols)
    }

    /// ASCII dump, one row per line.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            s.push_str(&self.row(r).to_string());
            s.push('\n');
        }
        s
    }

    /// Parses an ASCII grid of `0`/`1`, one row per non-empty line.
    pub fn from_ascii(text: &str) -> Result<BinaryMatrix> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(BitVec::from_str)
            .collect::<Result<Vec<_>>>()?;
        BinaryMatrix::from_rows(&rows)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.to_ascii())
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

/// Row-echelon basis that grows one vector at a time; used for innovation
/// tests and greedy row selection.
#[derive(Clone, Debug)]
pub struct IncrementalBasis {
    len: usize,
    /// (pivot, vector) with the pivot being the lowest set bit.
    rows: Vec<(usize, BitVec)>,
}

impl IncrementalBasis {
    pub fn new(len: usize) -> Self {
        Self { len, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.len
    }

    /// Reduces `v` against the basis.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (p, b) in &self.rows {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if it is not in the span; returns whether the rank grew.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.len, "basis vector length mismatch");
        let r = self.reduce(v);
        match r.first_one() {
            None => false,
            Some(p) => {
                // keep earlier rows reduced at the new pivot so `reduce` stays one pass
                for (_, b) in self.rows.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&r);
                    }
                }
                self.rows.push((p, r));
                true
            }
        }
    }
}

/// Block-structured echelon form `T·Y` of a received matrix whose columns are
/// split into header blocks of widths `L_1..L_nv` followed by a payload block.
///
/// Block `(i, l)` holds the rows whose pivot falls in block `i` restricted to
/// the columns of block `l`. Diagonal blocks are in RREF; blocks below the
/// diagonal are zero.
#[derive(Clone, Debug)]
pub struct EchelonDecomposition {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    reduced: BinaryMatrix,
    ranks: Vec<usize>,
    row_starts: Vec<usize>,
    pivot_cols: Vec<Vec<usize>>,
    blocks_b: Vec<Vec<BinaryMatrix>>,
    blocks_c: Vec<BinaryMatrix>,
    transform: Option<BinaryMatrix>,
    row_ops: usize,
}

/// Computes the block echelon decomposition of `y` for header widths
/// `header_widths` and a trailing payload of `payload_width` columns.
pub fn block_rref(
    y: &BinaryMatrix,
    header_widths: &[usize],
    payload_width: usize,
) -> Result<EchelonDecomposition> {
    block_rref_impl(y, header_widths, payload_width, false)
}

/// [`block_rref`] that also materializes the transform `T`.
pub fn block_rref_with_transform(
    y: &BinaryMatrix,
    header_widths: &[usize],
    payload_width: usize,
) -> Result<EchelonDecomposition> {
    block_rref_impl(y, header_widths, payload_width, true)
}

fn block_rref_impl(
    y: &BinaryMatrix,
    header_widths: &[usize],
    payload_width: usize,
    with_transform: bool,
) -> Result<EchelonDecomposition> {
    let total: usize = header_widths.iter().sum::<usize>() + payload_width;
    if total != y.cols() {
        return Err(Error::Shape(format!(
            "block widths sum to {total} but the matrix has {} columns",
            y.cols()
        )));
    }
    let mut widths = header_widths.to_vec();
    widths.push(payload_width);
    let mut offsets = Vec::with_capacity(widths.len() + 1);
    let mut acc = 0;
    for w in &widths {
        offsets.push(acc);
        acc += w;
    }
    offsets.push(acc);

    let rref = y.rref_impl(with_transform);
    let rank = rref.rank();
    let reduced = rref.matrix.row_slice(0..rank);
    let nblocks = widths.len();

    let mut ranks = vec![0; nblocks];
    let mut pivot_cols = vec![Vec::new(); nblocks];
    for &p in &rref.pivots {
        let b = (0..nblocks).find(|&b| p < offsets[b + 1]).expect("pivot inside matrix");
        ranks[b] += 1;
        pivot_cols[b].push(p - offsets[b]);
    }
    let mut row_starts = Vec::with_capacity(nblocks + 1);
    let mut acc = 0;
    for r in &ranks {
        row_starts.push(acc);
        acc += r;
    }
    row_starts.push(acc);

    let nv = header_widths.len();
    let mut blocks_b = Vec::with_capacity(nv);
    for i in 0..nv {
        let rows = reduced.row_slice(row_starts[i]..row_starts[i + 1]);
        blocks_b.push(
            (0..nv)
                .map(|l| rows.column_slice(offsets[l]..offsets[l + 1]))
                .collect::<Vec<_>>(),
        );
    }
    let blocks_c = (0..nblocks)
        .map(|i| {
            reduced
                .row_slice(row_starts[i]..row_starts[i + 1])
                .column_slice(offsets[nv]..offsets[nv + 1])
        })
        .collect();

    Ok(EchelonDecomposition {
        widths,
        offsets,
        reduced,
        ranks,
        row_starts,
        pivot_cols,
        blocks_b,
        blocks_c,
        transform: rref.transform,
        row_ops: rref.row_ops,
    })
}

impl EchelonDecomposition {
    /// Number of header blocks.
    pub fn n_v(&self) -> usize {
        self.widths.len() - 1
    }

    /// `ρ_1..ρ_nv, ρ_{nv+1}`.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self) -> usize {
        self.reduced.rows()
    }

    /// Widths `L_1..L_nv, L_p`.
    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn column_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn row_range(&self, level: usize) -> Range<usize> {
        self.row_starts[level]..self.row_starts[level + 1]
    }

    /// `B_{il}` (0-based, `i, l < n_v`); zero for `i > l`.
    pub fn b(&self, i: usize, l: usize) -> &BinaryMatrix {
        &self.blocks_b[i][l]
    }

    /// `C_i` for `i` in `0..=n_v`.
    pub fn c(&self, i: usize) -> &BinaryMatrix {
        &self.blocks_c[i]
    }

    /// Pivot columns of diagonal block `l`, relative to the block start.
    pub fn pivot_cols(&self, l: usize) -> &[usize] {
        &self.pivot_cols[l]
    }

    /// The stacked non-zero rows of `T·Y`.
    pub fn reduced(&self) -> &BinaryMatrix {
        &self.reduced
    }

    /// Reassembles the block grid row-wise.
    pub fn to_matrix(&self) -> BinaryMatrix {
        let nv = self.n_v();
        let level_rows: Vec<BinaryMatrix> = (0..=nv)
            .map(|i| {
                let mut parts: Vec<&BinaryMatrix> = Vec::new();
                let zero_blocks: Vec<BinaryMatrix> = (0..nv)
                    .map(|l| BinaryMatrix::zeros(self.ranks[i], self.widths[l]))
                    .collect();
                for l in 0..nv {
                    parts.push(if i < nv { &self.blocks_b[i][l] } else { &zero_blocks[l] });
                }
                parts.push(&self.blocks_c[i]);
                BinaryMatrix::hstack(&parts).expect("consistent block rows")
            })
            .collect();
        let refs: Vec<&BinaryMatrix> = level_rows.iter().collect();
        BinaryMatrix::vstack(&refs).expect("consistent block columns")
    }

    /// Row additions spent by the elimination.
    pub fn row_ops(&self) -> usize {
        self.row_ops
    }

    /// `T`, when the decomposition was built with [`block_rref_with_transform`].
    pub fn transform(&self) -> Option<&BinaryMatrix> {
        self.transform.as_ref()
    }
}
