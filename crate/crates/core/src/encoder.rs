//! Source-side index assignment and network-side recombination.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVec};
use crate::packet::{HeaderConfig, SourcePacket, Sts};

const MAX_PAYLOAD_DRAWS: usize = 1000;

/// Draws a uniform canonical index in every header block.
pub fn random_source<R: Rng + ?Sized>(
    cfg: &HeaderConfig,
    sts: Sts,
    payload: BitVec,
    rng: &mut R,
) -> Result<SourcePacket> {
    let indices = cfg.block_lengths.iter().map(|&l| rng.random_range(0..l)).collect();
    SourcePacket::new(cfg, sts, indices, payload)
}

/// GF(2) combination `Σ coeffs[i]·packets[i]`.
pub fn mix(packets: &[BitVec], coeffs: &BitVec) -> Result<BitVec> {
    if coeffs.len() != packets.len() {
        return Err(Error::Shape(format!(
            "{} coefficients for {} packets",
            coeffs.len(),
            packets.len()
        )));
    }
    let len = packets.first().map_or(0, BitVec::len);
    if packets.iter().any(|p| p.len() != len) {
        return Err(Error::Shape("packets have different lengths".into()));
    }
    let mut out = BitVec::zeros(len);
    for i in coeffs.ones() {
        out.xor_assign(&packets[i]);
    }
    Ok(out)
}

/// Uniform invertible `g × g` matrix by rejection; also returns the number
/// of draws it took.
pub fn random_full_rank_matrix_counted<R: Rng + ?Sized>(g: usize, rng: &mut R) -> (BinaryMatrix, usize) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let a = BinaryMatrix::random(g, g, rng);
        if a.rank() == g {
            return (a, attempts);
        }
    }
}

pub fn random_full_rank_matrix<R: Rng + ?Sized>(g: usize, rng: &mut R) -> BinaryMatrix {
    random_full_rank_matrix_counted(g, rng).0
}

/// The `g` packets of one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generation {
    pub cfg: HeaderConfig,
    pub sts: Sts,
    pub sources: Vec<SourcePacket>,
}

impl Generation {
    pub fn new(cfg: HeaderConfig, sts: Sts, sources: Vec<SourcePacket>) -> Result<Self> {
        if sources.iter().any(|p| p.sts != sts) {
            return Err(Error::InvalidConfig("all packets of a generation share one slot".into()));
        }
        Ok(Self { cfg, sts, sources })
    }

    /// `g` sources with random indices and random payloads. Payloads are
    /// redrawn until `X` has full rank `g`.
    pub fn random<R: Rng + ?Sized>(cfg: &HeaderConfig, sts: Sts, g: usize, rng: &mut R) -> Result<Self> {
        let indices: Vec<Vec<usize>> = (0..g)
            .map(|_| cfg.block_lengths.iter().map(|&l| rng.random_range(0..l)).collect())
            .collect();
        for _ in 0..MAX_PAYLOAD_DRAWS {
            let sources = indices
                .iter()
                .map(|idx| SourcePacket::new(cfg, sts, idx.clone(), BitVec::random(cfg.payload_len, rng)))
                .collect::<Result<Vec<_>>>()?;
            let generation = Self::new(cfg.clone(), sts, sources)?;
            if generation.matrix()?.rank() == g {
                return Ok(generation);
            }
        }
        Err(Error::InsufficientRank {
            rank: 0,
            needed: g,
        })
    }

    /// `g` sources with random indices whose payloads are distinct
    /// identifiers: source `i` carries `e_i` in the first `g` payload bits.
    pub fn with_identifier_payloads<R: Rng + ?Sized>(
        cfg: &HeaderConfig,
        sts: Sts,
        g: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if cfg.payload_len < g {
            return Err(Error::InvalidConfig(format!(
                "payload of {} bits cannot hold {g} identifiers",
                cfg.payload_len
            )));
        }
        let sources = (0..g)
            .map(|i| random_source(cfg, sts, BitVec::unit(cfg.payload_len, i), rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cfg.clone(), sts, sources)
    }

    pub fn g(&self) -> usize {
        self.sources.len()
    }

    /// `X`, one flattened packet per row.
    pub fn matrix(&self) -> Result<BinaryMatrix> {
        let rows = self
            .sources
            .iter()
            .map(|p| p.flatten(&self.cfg))
            .collect::<Result<Vec<_>>>()?;
        BinaryMatrix::from_rows_with_cols(&rows, self.cfg.packet_len())
    }

    /// `Y = A·X` for a fresh uniform invertible `A`.
    pub fn receive<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BinaryMatrix> {
        let a = random_full_rank_matrix(self.g(), rng);
        a.mul(&self.matrix()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_box_always_index_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = HeaderConfig::new(vec![1], 8, 0).unwrap();
        for _ in 0..20 {
            let p = random_source(&cfg, Sts::default(), BitVec::zeros(8), &mut rng).unwrap();
            assert_eq!(p.indices, vec![0]);
        }
    }

    #[test]
    fn seeded_indices_reproducible() {
        let cfg = HeaderConfig::new(vec![100, 50], 8, 8).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_source(&cfg, Sts::default(), BitVec::zeros(8), &mut rng).unwrap().indices
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn mix_with_unit_coefficients_selects() {
        let ps: Vec<BitVec> = ["1100", "0110", "0011"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(mix(&ps, &BitVec::unit(3, 1)).unwrap(), ps[1]);
        assert_eq!(mix(&ps, &"111".parse().unwrap()).unwrap(), "1001".parse().unwrap());
        assert!(mix(&ps, &BitVec::unit(2, 0)).is_err());
    }

    #[test]
    fn full_rank_matrix_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(random_full_rank_matrix(1, &mut rng), BinaryMatrix::identity(1));
        for g in 1..20 {
            assert_eq!(random_full_rank_matrix(g, &mut rng).rank(), g);
        }
    }

    #[test]
    fn full_rank_times_full_rank_keeps_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = HeaderConfig::new(vec![5, 5], 40, 16).unwrap();
        for g in [1, 4, 12] {
            let generation = Generation::random(&cfg, Sts::default(), g, &mut rng).unwrap();
            assert_eq!(generation.receive(&mut rng).unwrap().rank(), g);
        }
    }

    #[test]
    fn identifier_payloads_give_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = HeaderConfig::new(vec![3], 10, 0).unwrap();
        let generation = Generation::with_identifier_payloads(&cfg, Sts::default(), 10, &mut rng).unwrap();
        assert_eq!(generation.matrix().unwrap().rank(), 10);
        assert!(Generation::with_identifier_payloads(&cfg, Sts::default(), 11, &mut rng).is_err());
    }
}
