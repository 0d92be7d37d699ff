//! Rank distributions, branch counts, error probability and cost models.
//!
//! With `g` sources drawing uniform indices into a block of `L` positions,
//! the rank of the first header block equals the number of occupied boxes in
//! a balls-into-boxes experiment. Its law `f(g, L, k)` is computed with the
//! occupancy recurrence
//!
//! ```text
//! p(n+1, k) = p(n, k)·k/L + p(n, k−1)·(L−k+1)/L
//! ```
//!
//! in double precision. For two header blocks the joint law of the ranks is
//! approximated by treating the pair of indices as one draw into `L_1·L_2`
//! boxes; that approximation ignores rank loss caused by cycles and degrades
//! as `g` grows. No closed form is offered for three or more blocks: callers
//! supply a histogram of observed rank profiles instead.
//!
//! Cost models count symbol operations per decoded generation and are
//! generic over the scalar so they can be evaluated exactly in integers.

use std::collections::BTreeMap;

use num_traits::{FromPrimitive, Num};
use rand::Rng;

use crate::decoder::Variant;
use crate::error::{Error, Result};
use crate::gf2::{block_rref, BinaryMatrix, BitVec};

/// `f(g, L, k)` for `k = 0..=min(g, L)`.
pub fn occupancy_pmf(g: usize, l: usize) -> Vec<f64> {
    assert!(l >= 1, "at least one box is required");
    let kmax = g.min(l);
    let mut p = vec![0.0; kmax + 1];
    p[0] = 1.0;
    let lf = l as f64;
    for n in 0..g {
        let top = (n + 1).min(kmax);
        for k in (1..=top).rev() {
            p[k] = p[k] * k as f64 / lf + p[k - 1] * (l - k + 1) as f64 / lf;
        }
        p[0] = 0.0;
    }
    p
}

/// Law of `ρ_2 = g − ρ_1` for one header block, indexed by `ρ_2 = 0..=g`.
pub fn rho2_pmf_nv1(g: usize, l1: usize) -> Vec<f64> {
    let f = occupancy_pmf(g, l1);
    let mut out = vec![0.0; g + 1];
    for (k, &p) in f.iter().enumerate() {
        out[g - k] = p;
    }
    out
}

/// `P(ρ_2 > k)` for `k = 0..=g`, one header block.
pub fn rho2_ccdf_nv1(g: usize, l1: usize) -> Vec<f64> {
    ccdf(&rho2_pmf_nv1(g, l1))
}

/// `out[k] = Σ_{i>k} pmf[i]`, accumulated from the tail.
pub fn ccdf(pmf: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for k in (0..pmf.len()).rev() {
        out[k] = acc;
        acc += pmf[k];
    }
    out
}

/// Approximate joint law of `(ρ_1, ρ_2, ρ_3)` for two header blocks.
///
/// `ρ_1` follows `f(g, L_1, ·)` exactly. `ρ_1 + ρ_2` is modelled as the
/// number of distinct index pairs, `f(g, L_1·L_2, ·)`, conditioned on being at
/// least `ρ_1`. The conditioning renormalizes each `ρ_1` slice so the table
/// sums to one.
pub fn joint_rank_pmf_nv2(g: usize, l1: usize, l2: usize) -> Vec<(RankProfile, f64)> {
    let f1 = occupancy_pmf(g, l1);
    let f12 = occupancy_pmf(g, l1 * l2);
    let tail = {
        let mut t = vec![0.0; f12.len() + 1];
        for m in (0..f12.len()).rev() {
            t[m] = t[m + 1] + f12[m];
        }
        t
    };
    let mut out = Vec::new();
    for (k1, &p1) in f1.iter().enumerate() {
        if p1 == 0.0 || k1 >= tail.len() || tail[k1] <= 0.0 {
            continue;
        }
        for m in k1..f12.len() {
            let p = p1 * f12[m] / tail[k1];
            if p > 0.0 {
                out.push((RankProfile::new(vec![k1, m - k1, g - m]), p));
            }
        }
    }
    out
}

/// `f(g, Π L_ℓ, g)`: probability that all index tuples differ, an upper
/// bound on the probability that the headers alone have rank `g`.
pub fn full_rank_upper_bound(g: usize, lengths: &[usize]) -> f64 {
    let boxes = lengths.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l));
    match boxes {
        Some(b) if b < g => 0.0,
        Some(b) => occupancy_pmf(g, b)[g],
        // more boxes than fit in usize: product form directly
        None => {
            let b: f64 = lengths.iter().map(|&l| l as f64).product();
            (0..g).map(|i| 1.0 - i as f64 / b).product()
        }
    }
}

/// `(ρ_1, …, ρ_{nv+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankProfile {
    pub rhos: Vec<usize>,
}

impl RankProfile {
    pub fn new(rhos: Vec<usize>) -> Self {
        Self { rhos }
    }

    pub fn g(&self) -> usize {
        self.rhos.iter().sum()
    }

    pub fn n_v(&self) -> usize {
        self.rhos.len() - 1
    }

    /// Checks `ρ_ℓ ≤ min(g, L_ℓ)` and the number of levels.
    pub fn validate(&self, lengths: &[usize]) -> Result<()> {
        if self.rhos.len() != lengths.len() + 1 {
            return Err(Error::Shape(format!(
                "{} ranks for {} header blocks",
                self.rhos.len(),
                lengths.len()
            )));
        }
        let g = self.g();
        for (l, (&r, &len)) in self.rhos.iter().zip(lengths).enumerate() {
            if r > g.min(len) {
                return Err(Error::Shape(format!("rank {r} at level {l} exceeds min(g, L)")));
            }
        }
        Ok(())
    }
}

/// Constants of the cost model: matrix products cost `K_m·n·m·p`, RREF of a
/// `g × L` matrix `K_R·g²·L`, a checksum over `n` symbols `K_c·n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostConstants<T = f64> {
    pub k_m: T,
    pub k_r: T,
    pub k_c: T,
}

impl Default for CostConstants<f64> {
    fn default() -> Self {
        Self {
            k_m: 2.0,
            k_r: 3.0,
            k_c: 3.0,
        }
    }
}

/// Scalars usable in the cost and branch formulas.
pub trait Scalar: Num + Copy + FromPrimitive + PartialOrd {}
impl<T: Num + Copy + FromPrimitive + PartialOrd> Scalar for T {}

fn s<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("value representable in the scalar type")
}

/// Upper bounds on the number of branches per level.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchBound<T = f64> {
    /// `N_b(1..=n_v)`.
    pub per_level: Vec<T>,
    /// `N_b(n_v + 1)`.
    pub terminal: T,
    pub total: T,
}

/// `N_b(ℓ) = ρ_1·Π_{i=2..ℓ}(ρ_i + 1)`, terminal level times `q^{ρ_{nv+1}}`.
pub fn branch_bound<T: Scalar>(profile: &RankProfile, q: usize) -> BranchBound<T> {
    let nv = profile.n_v();
    let mut per_level = Vec::with_capacity(nv);
    let mut n: T = s(profile.rhos[0]);
    per_level.push(n);
    for &r in &profile.rhos[1..nv] {
        n = n * s(r + 1);
        per_level.push(n);
    }
    let terminal = n * num_traits::pow(s::<T>(q), profile.rhos[nv]);
    let total = per_level.iter().fold(terminal, |acc, &x| acc + x);
    BranchBound {
        per_level,
        terminal,
        total,
    }
}

/// `N_b(ℓ)` with `N_b(0) = 1`.
fn nb_before<T: Scalar>(bound: &BranchBound<T>, level: usize) -> T {
    if level == 0 {
        T::one()
    } else {
        bound.per_level[level - 1]
    }
}

/// Per-branch cost of the terminal level.
fn terminal_cost<T: Scalar>(profile: &RankProfile, l_p: usize, g: usize, q: usize, c: &CostConstants<T>) -> T {
    let nv = profile.n_v();
    let rho = profile.rhos[nv];
    let lp: T = s(l_p);
    c.k_m * s(g) * lp
        + s::<T>(nv.saturating_sub(1)) * lp
        + num_traits::pow(s::<T>(q), rho) * (c.k_m * s(rho) * lp + lp + c.k_c * lp)
}

/// Worst-case operation count of the row-scan tree decoder.
pub fn cost_sle<T: Scalar>(
    profile: &RankProfile,
    lengths: &[usize],
    l_p: usize,
    g: usize,
    q: usize,
    c: &CostConstants<T>,
) -> T {
    let nv = profile.n_v();
    let bound = branch_bound::<T>(profile, q);
    let r = &profile.rhos;
    let mut total = s::<T>(lengths[0]) * s(r[0]) * s(lengths[0]);
    let mut before = r[0];
    for l in 1..nv {
        let len: T = s(lengths[l]);
        let k = c.k_m * len * s(before) + len * (s::<T>(l + 1) + s::<T>(r[l] + 1) * len);
        total = total + nb_before(&bound, l) * k;
        before += r[l];
    }
    total + nb_before(&bound, nv) * terminal_cost(profile, l_p, g, q, c)
}

/// Worst-case operation count of the table-driven tree decoder.
pub fn cost_lut<T: Scalar>(
    profile: &RankProfile,
    lengths: &[usize],
    l_p: usize,
    g: usize,
    q: usize,
    c: &CostConstants<T>,
) -> T {
    let nv = profile.n_v();
    let bound = branch_bound::<T>(profile, q);
    let r = &profile.rhos;
    let two: T = s(2);
    let mut total = T::zero();
    let mut before = 0;
    for l in 0..nv {
        let len: T = s(lengths[l]);
        let rho: T = s(r[l]);
        let lu1 = rho + len * rho * (rho + T::one()) / two;
        let lu2 = rho * (len + T::one() + rho * len);
        let lu3 = c.k_m * len * s(before) + len * (s::<T>(l + 1) + rho);
        total = total + lu1 + lu2 + nb_before(&bound, l) * lu3;
        before += r[l];
    }
    total + nb_before(&bound, nv) * terminal_cost(profile, l_p, g, q, c)
}

/// One RREF of a `g × L_x` matrix.
pub fn cost_plain_nc<T: Scalar>(g: usize, packet_len: usize, c: &CostConstants<T>) -> T {
    c.k_r * s(g) * s(g) * s(packet_len)
}

/// Histogram of observed rank profiles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProfileHistogram {
    counts: BTreeMap<RankProfile, u64>,
    total: u64,
}

impl ProfileHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, profile: RankProfile) {
        *self.counts.entry(profile).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<RankProfile, u64> {
        &self.counts
    }

    /// Relative frequencies.
    pub fn pmf(&self) -> Vec<(RankProfile, f64)> {
        self.counts
            .iter()
            .map(|(p, &c)| (p.clone(), c as f64 / self.total as f64))
            .collect()
    }

    /// Frequencies of `ρ_level`, indexed `0..=g`.
    pub fn marginal(&self, level: usize, g: usize) -> Vec<f64> {
        let mut out = vec![0.0; g + 1];
        for (p, &c) in &self.counts {
            out[p.rhos[level]] += c as f64 / self.total as f64;
        }
        out
    }
}

/// Draws `trials` generations of `g` sources with random indices and
/// distinct identifier payloads and records the rank profile of each.
///
/// The profile depends only on the row space of `X`, so the mixing matrix
/// is not applied.
pub fn sample_profiles<R: Rng + ?Sized>(g: usize, lengths: &[usize], trials: usize, rng: &mut R) -> ProfileHistogram {
    let mut h = ProfileHistogram::new();
    let width: usize = lengths.iter().sum::<usize>() + g;
    for _ in 0..trials {
        let rows: Vec<BitVec> = (0..g)
            .map(|i| {
                let mut parts: Vec<BitVec> = lengths.iter().map(|&l| BitVec::unit(l, rng.random_range(0..l))).collect();
                parts.push(BitVec::unit(g, i));
                BitVec::concat(parts.iter())
            })
            .collect();
        let x = BinaryMatrix::from_rows_with_cols(&rows, width).expect("uniform rows");
        let d = block_rref(&x, lengths, g).expect("widths match");
        h.add(RankProfile::new(d.ranks().to_vec()));
    }
    h
}

/// Where the rank-profile law comes from.
#[derive(Clone, Debug)]
pub enum PmfSource<'a> {
    /// Closed forms; available for one and two header blocks.
    Analytic,
    /// Observed profiles.
    Empirical(&'a ProfileHistogram),
}

/// The rank-profile law for `g` and `lengths` from `source`.
pub fn profile_pmf(g: usize, lengths: &[usize], source: &PmfSource<'_>) -> Result<Vec<(RankProfile, f64)>> {
    match source {
        PmfSource::Empirical(h) => {
            if h.total() == 0 {
                return Err(Error::InvalidConfig("empty profile histogram".into()));
            }
            Ok(h.pmf())
        }
        PmfSource::Analytic => match lengths.len() {
            1 => Ok(occupancy_pmf(g, lengths[0])
                .into_iter()
                .enumerate()
                .filter(|(_, p)| *p > 0.0)
                .map(|(k, p)| (RankProfile::new(vec![k, g - k]), p))
                .collect()),
            2 => Ok(joint_rank_pmf_nv2(g, lengths[0], lengths[1])),
            n => Err(Error::AnalyticUnavailable(n)),
        },
    }
}

fn expect<F: Fn(&RankProfile) -> f64>(pmf: &[(RankProfile, f64)], f: F) -> f64 {
    pmf.iter().map(|(r, p)| p * f(r)).sum()
}

/// Expected branch bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchExpectation {
    pub per_level: Vec<f64>,
    pub terminal: f64,
    pub total: f64,
}

/// `E[N_b(ℓ)]`, `E[N_b(n_v+1)]` and `E[N_b]` under the given law.
pub fn expected_branches(g: usize, lengths: &[usize], q: usize, source: &PmfSource<'_>) -> Result<BranchExpectation> {
    let pmf = profile_pmf(g, lengths, source)?;
    let nv = lengths.len();
    let bounds: Vec<(BranchBound<f64>, f64)> = pmf.iter().map(|(r, p)| (branch_bound(r, q), *p)).collect();
    let per_level = (0..nv)
        .map(|l| bounds.iter().map(|(b, p)| p * b.per_level[l]).sum())
        .collect();
    Ok(BranchExpectation {
        per_level,
        terminal: bounds.iter().map(|(b, p)| p * b.terminal).sum(),
        total: bounds.iter().map(|(b, p)| p * b.total).sum(),
    })
}

/// `P_e = 1 − (1 − q^{−L_h})^{n_w − g}`, zero when `n_w ≤ g`.
pub fn decoding_error_prob(n_w: f64, g: usize, q: usize, hash_len: usize) -> f64 {
    let extra = n_w - g as f64;
    if extra <= 0.0 {
        return 0.0;
    }
    let p = (q as f64).powi(-(hash_len as i32));
    -(extra * (-p).ln_1p()).exp_m1()
}

/// `E[P_e]` with `n_w` replaced by its bound `N_b(n_v + 1)`.
pub fn expected_error_bound(
    g: usize,
    lengths: &[usize],
    q: usize,
    hash_len: usize,
    source: &PmfSource<'_>,
) -> Result<f64> {
    let pmf = profile_pmf(g, lengths, source)?;
    Ok(expect(&pmf, |r| {
        decoding_error_prob(branch_bound::<f64>(r, q).terminal, g, q, hash_len)
    }))
}

/// `E[A_variant] / A_NC` where `A_variant = A_NC + E[K_variant]`.
pub fn expected_cost_ratio(
    g: usize,
    lengths: &[usize],
    packet_len: usize,
    q: usize,
    variant: Variant,
    source: &PmfSource<'_>,
    c: &CostConstants<f64>,
) -> Result<f64> {
    let header: usize = lengths.iter().sum();
    if packet_len < header {
        return Err(Error::InvalidConfig("packet shorter than its header".into()));
    }
    let l_p = packet_len - header;
    let pmf = profile_pmf(g, lengths, source)?;
    let extra = expect(&pmf, |r| match variant {
        Variant::Sle => cost_sle(r, lengths, l_p, g, q, c),
        Variant::Lut => cost_lut(r, lengths, l_p, g, q, c),
    });
    let nc = cost_plain_nc(g, packet_len, c);
    Ok((nc + extra) / nc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exact occupancy law by enumerating all `L^g` index sequences.
    fn brute_occupancy(g: usize, l: usize) -> Vec<f64> {
        let mut counts = vec![0u64; g.min(l) + 1];
        let total = l.pow(g as u32);
        for code in 0..total {
            let mut seen = vec![false; l];
            let mut c = code;
            for _ in 0..g {
                seen[c % l] = true;
                c /= l;
            }
            counts[seen.iter().filter(|&&b| b).count()] += 1;
        }
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    #[test]
    fn occupancy_small_cases() {
        assert_eq!(occupancy_pmf(1, 7), vec![0.0, 1.0]);
        assert_eq!(occupancy_pmf(2, 2), vec![0.0, 0.5, 0.5]);
        assert_eq!(occupancy_pmf(0, 3), vec![1.0]);
        for (g, l) in [(3, 3), (4, 2), (5, 4), (6, 3)] {
            let a = occupancy_pmf(g, l);
            let b = brute_occupancy(g, l);
            for (x, y) in a.iter().zip(&b) {
                assert_relative_eq!(x, y, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn occupancy_sums_to_one() {
        for (g, l) in [(5, 100), (30, 100), (80, 2500), (200, 50), (70, 100)] {
            let s: f64 = occupancy_pmf(g, l).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "g={g} L={l} sum={s}");
        }
    }

    #[test]
    fn ccdf_at_zero() {
        let (g, l) = (20, 100);
        let c = rho2_ccdf_nv1(g, l);
        assert_eq!(c[0], 1.0 - occupancy_pmf(g, l)[g]);
        assert!(c.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(c[g], 0.0);
    }

    #[test]
    fn joint_pmf_marginal_is_exact() {
        for g in [5, 30, 40, 80] {
            let joint = joint_rank_pmf_nv2(g, 50, 50);
            let sum: f64 = joint.iter().map(|(_, p)| p).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let f = occupancy_pmf(g, 50);
            let mut m = vec![0.0; f.len()];
            for (r, p) in &joint {
                assert_eq!(r.g(), g);
                m[r.rhos[0]] += p;
            }
            for (a, b) in m.iter().zip(&f) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn full_rank_bound_matches_product() {
        let direct: f64 = (0..10).map(|i| 1.0 - i as f64 / 2500.0).product();
        assert_relative_eq!(full_rank_upper_bound(10, &[50, 50]), direct, max_relative = 1e-12);
        assert_eq!(full_rank_upper_bound(5, &[2, 2]), 0.0);
    }

    #[test]
    fn branch_bound_forms() {
        let b = branch_bound::<u64>(&RankProfile::new(vec![7, 0]), 2);
        assert_eq!(b.total, 14);
        let b = branch_bound::<u64>(&RankProfile::new(vec![4, 3, 2]), 2);
        assert_eq!(b.per_level, vec![4, 16]);
        assert_eq!(b.total, 4 + 4 * 4 + 4 * 4 * 4);
        let b = branch_bound::<u64>(&RankProfile::new(vec![0, 2, 3]), 2);
        assert_eq!(b.total, 0);
    }

    #[test]
    fn single_source_expectation() {
        let e = expected_branches(1, &[100], 2, &PmfSource::Analytic).unwrap();
        assert_relative_eq!(e.total, 2.0);
        let e = expected_branches(1, &[50, 50], 2, &PmfSource::Analytic).unwrap();
        assert_relative_eq!(e.total, 3.0);
    }

    #[test]
    fn analytic_law_unavailable_for_three_blocks() {
        assert_eq!(
            expected_branches(5, &[10, 10, 10], 2, &PmfSource::Analytic),
            Err(Error::AnalyticUnavailable(3))
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = sample_profiles(5, &[10, 10, 10], 100, &mut rng);
        assert!(expected_branches(5, &[10, 10, 10], 2, &PmfSource::Empirical(&h)).is_ok());
    }

    #[test]
    fn error_probability_edges() {
        assert_eq!(decoding_error_prob(10.0, 10, 2, 16), 0.0);
        assert_relative_eq!(decoding_error_prob(11.0, 10, 2, 16), 2f64.powi(-16), max_relative = 1e-12);
        assert_eq!(decoding_error_prob(1e30, 1, 2, 0), 1.0);
    }

    #[test]
    fn cost_with_no_first_level_rank() {
        let p = RankProfile::new(vec![0, 3]);
        let c = CostConstants::<u64> { k_m: 2, k_r: 3, k_c: 3 };
        assert_eq!(cost_sle(&p, &[100], 1948, 3, 2, &c), 0);
    }

    #[test]
    fn sle_closed_form_one_block() {
        let c = CostConstants::<u128> { k_m: 2, k_r: 3, k_c: 3 };
        let (g, l1, lp) = (9usize, 40usize, 300usize);
        for r1 in 0..=g {
            let r2 = g - r1;
            let p = RankProfile::new(vec![r1, r2]);
            let (r1, r2, l1u, lpu) = (r1 as u128, r2 as u128, l1 as u128, lp as u128);
            let closed = r1 * l1u * l1u + r1 * lpu * (2 * g as u128 + (1u128 << r2) * (2 * r2 + 1 + 3));
            assert_eq!(cost_sle(&p, &[l1], lp, g, 2, &c), closed);
        }
    }

    #[test]
    fn profile_sampler_rank_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = sample_profiles(12, &[8, 8], 200, &mut rng);
        assert_eq!(h.total(), 200);
        for (p, _) in h.pmf() {
            assert_eq!(p.g(), 12);
            p.validate(&[8, 8]).unwrap();
        }
    }
}
