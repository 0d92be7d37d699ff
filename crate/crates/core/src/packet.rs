//! Packet layout: `x = (v_1, …, v_nv, π, h)`.
//!
//! Each `v_ℓ` is a header block of `L_ℓ` bits. A freshly generated source
//! packet carries a canonical vector `e_j` in every block; coded packets carry
//! GF(2) mixtures. `π` is the payload and `h` a truncated hash of `π`.
//!
//! Wire format: the body is serialized with [`BitVec::to_bytes`], i.e. header
//! blocks first, then payload, then hash, bit `i` stored in byte `i / 8` at
//! mask `0x80 >> (i % 8)`. The slot identifier travels out of band and is
//! never mixed.
//!
//! Indices are 0-based in this crate: `indices[ℓ] = j` means block `ℓ` holds
//! the unit vector with its single one at position `j`.

use std::hash::Hasher;

use siphasher::sip::SipHasher13;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

const HASH_KEY: (u64, u64) = (0x6e65_636f_7270_6961, 0x7061_796c_6f61_6468);

/// Geometry shared by every packet of a deployment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeaderConfig {
    /// `L_1..L_nv` in bits.
    pub block_lengths: Vec<usize>,
    /// `L_π` in bits.
    pub payload_len: usize,
    /// `L_h` in bits.
    pub hash_len: usize,
}

impl HeaderConfig {
    pub fn new(block_lengths: Vec<usize>, payload_len: usize, hash_len: usize) -> Result<Self> {
        let cfg = Self {
            block_lengths,
            payload_len,
            hash_len,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_lengths.is_empty() {
            return Err(Error::InvalidConfig("at least one header block is required".into()));
        }
        if let Some(i) = self.block_lengths.iter().position(|&l| l == 0) {
            return Err(Error::InvalidConfig(format!("header block {i} has zero length")));
        }
        Ok(())
    }

    pub fn n_v(&self) -> usize {
        self.block_lengths.len()
    }

    /// `Σ L_ℓ`.
    pub fn header_len(&self) -> usize {
        self.block_lengths.iter().sum()
    }

    /// `L_p = L_π + L_h`.
    pub fn tail_len(&self) -> usize {
        self.payload_len + self.hash_len
    }

    /// `L_x`.
    pub fn packet_len(&self) -> usize {
        self.header_len() + self.tail_len()
    }

    /// Bit offset of header block `l`.
    pub fn block_offset(&self, l: usize) -> usize {
        self.block_lengths[..l].iter().sum()
    }
}

/// Spatio-temporal slot `(r, t)`: sink index and slot index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sts {
    pub sink: u32,
    pub slot: u32,
}

/// A packet as generated by a source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourcePacket {
    pub sts: Sts,
    /// 0-based canonical index chosen in each header block.
    pub indices: Vec<usize>,
    pub payload: BitVec,
    pub hash: BitVec,
}

impl SourcePacket {
    /// Builds a packet and fills in its hash.
    pub fn new(cfg: &HeaderConfig, sts: Sts, indices: Vec<usize>, payload: BitVec) -> Result<Self> {
        if payload.len() != cfg.payload_len {
            return Err(Error::Shape(format!(
                "payload has {} bits, expected {}",
                payload.len(),
                cfg.payload_len
            )));
        }
        let hash = hash_payload(&payload, cfg.hash_len);
        let p = Self {
            sts,
            indices,
            payload,
            hash,
        };
        p.check_shape(cfg)?;
        Ok(p)
    }

    fn check_shape(&self, cfg: &HeaderConfig) -> Result<()> {
        if self.indices.len() != cfg.n_v() {
            return Err(Error::Format(format!(
                "{} indices for {} header blocks",
                self.indices.len(),
                cfg.n_v()
            )));
        }
        for (l, (&j, &len)) in self.indices.iter().zip(&cfg.block_lengths).enumerate() {
            if j >= len {
                return Err(Error::Format(format!("index {j} out of range for block {l} of length {len}")));
            }
        }
        if self.payload.len() != cfg.payload_len || self.hash.len() != cfg.hash_len {
            return Err(Error::Format("payload or hash length does not match the configuration".into()));
        }
        Ok(())
    }

    /// The flat vector `(e_{j_1}, …, e_{j_nv}, π, h)` of length `L_x`.
    pub fn flatten(&self, cfg: &HeaderConfig) -> Result<BitVec> {
        self.check_shape(cfg)?;
        let mut out = BitVec::zeros(0);
        for (&j, &len) in self.indices.iter().zip(&cfg.block_lengths) {
            out.extend(&BitVec::unit(len, j));
        }
        out.extend(&self.payload);
        out.extend(&self.hash);
        Ok(out)
    }

    /// Inverse of [`SourcePacket::flatten`]. The hash field is taken as is;
    /// use [`check_hash`] to validate it.
    pub fn parse(v: &BitVec, cfg: &HeaderConfig, sts: Sts) -> Result<Self> {
        if v.len() != cfg.packet_len() {
            return Err(Error::Shape(format!(
                "vector has {} bits, packet length is {}",
                v.len(),
                cfg.packet_len()
            )));
        }
        let mut indices = Vec::with_capacity(cfg.n_v());
        let mut at = 0;
        for (block, &len) in cfg.block_lengths.iter().enumerate() {
            let sub = v.slice(at..at + len);
            let ones = sub.count_ones();
            if ones != 1 {
                return Err(Error::NotSourcePacket { block, ones });
            }
            indices.push(sub.first_one().expect("one set bit"));
            at += len;
        }
        let payload = v.slice(at..at + cfg.payload_len);
        at += cfg.payload_len;
        let hash = v.slice(at..at + cfg.hash_len);
        Ok(Self {
            sts,
            indices,
            payload,
            hash,
        })
    }

    pub fn has_valid_hash(&self) -> bool {
        hash_payload(&self.payload, self.hash.len()) == self.hash
    }
}

/// A mixture of source packets of one slot, as seen on the air.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodedPacket {
    pub sts: Sts,
    pub body: BitVec,
}

impl CodedPacket {
    pub fn new(cfg: &HeaderConfig, sts: Sts, body: BitVec) -> Result<Self> {
        if body.len() != cfg.packet_len() {
            return Err(Error::Shape(format!(
                "body has {} bits, packet length is {}",
                body.len(),
                cfg.packet_len()
            )));
        }
        Ok(Self { sts, body })
    }

    pub fn from_source(p: &SourcePacket, cfg: &HeaderConfig) -> Result<Self> {
        Ok(Self {
            sts: p.sts,
            body: p.flatten(cfg)?,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.body.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8], cfg: &HeaderConfig, sts: Sts) -> Result<Self> {
        Self::new(cfg, sts, BitVec::from_bytes(bytes, cfg.packet_len())?)
    }
}

/// Truncated keyed hash of a payload.
///
/// SipHash-1-3 with a fixed key over the bit length and the packed payload
/// words. Outputs longer than 64 bits concatenate independent blocks keyed by
/// a block counter.
pub fn hash_payload(payload: &BitVec, hash_len: usize) -> BitVec {
    let blocks = hash_len.div_ceil(64);
    let words: Vec<u64> = (0..blocks as u64)
        .map(|b| {
            let mut h = SipHasher13::new_with_keys(HASH_KEY.0 ^ b, HASH_KEY.1);
            h.write_u64(payload.len() as u64);
            for w in payload.words() {
                h.write_u64(*w);
            }
            h.finish()
        })
        .collect();
    BitVec::from_words(hash_len, words)
}

/// `true` when the trailing `hash_len` bits of `tail` are the hash of the
/// leading bits.
pub fn check_hash(tail: &BitVec, hash_len: usize) -> bool {
    assert!(hash_len <= tail.len(), "hash longer than the candidate");
    let split = tail.len() - hash_len;
    hash_payload(&tail.slice(0..split), hash_len) == tail.slice(split..tail.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg33() -> HeaderConfig {
        HeaderConfig::new(vec![3, 3], 3, 8).unwrap()
    }

    #[test]
    fn lengths() {
        let c = HeaderConfig::new(vec![50, 50], 1916, 32).unwrap();
        assert_eq!(c.packet_len(), 2048);
        assert_eq!(c.tail_len(), 1948);
        assert_eq!(c.block_offset(1), 50);
        assert!(HeaderConfig::new(vec![], 8, 8).is_err());
        assert!(HeaderConfig::new(vec![4, 0], 8, 8).is_err());
    }

    #[test]
    fn flatten_layout() {
        let c = cfg33();
        let p = SourcePacket::new(&c, Sts::default(), vec![0, 1], "101".parse().unwrap()).unwrap();
        let h = hash_payload(&"101".parse().unwrap(), 8);
        let expect: BitVec = format!("100010101{h}").parse().unwrap();
        assert_eq!(p.flatten(&c).unwrap(), expect);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let c = cfg33();
        let err = SourcePacket::new(&c, Sts::default(), vec![3, 0], "101".parse().unwrap());
        assert!(matches!(err, Err(Error::Format(_))));
    }

    #[test]
    fn parse_rejects_mixtures() {
        let c = cfg33();
        let v: BitVec = "110010101".parse::<BitVec>().unwrap();
        let mut body = v.clone();
        body.extend(&BitVec::zeros(8));
        assert_eq!(
            SourcePacket::parse(&body, &c, Sts::default()),
            Err(Error::NotSourcePacket { block: 0, ones: 2 })
        );
        let mut zero = BitVec::zeros(6);
        zero.extend(&BitVec::zeros(11));
        assert_eq!(
            SourcePacket::parse(&zero, &c, Sts::default()),
            Err(Error::NotSourcePacket { block: 0, ones: 0 })
        );
    }

    #[test]
    fn hash_basics() {
        let p: BitVec = "1100101".parse().unwrap();
        assert!(hash_payload(&p, 0).is_empty());
        assert_eq!(hash_payload(&p, 16), hash_payload(&p, 16));
        assert_eq!(hash_payload(&p, 100).len(), 100);
        // prefix consistency across output lengths
        assert_eq!(hash_payload(&p, 100).slice(0..16), hash_payload(&p, 16));
        // trailing zero bits change the length, hence the hash
        let mut q = p.clone();
        q.extend(&BitVec::zeros(1));
        assert_ne!(hash_payload(&p, 32), hash_payload(&q, 32));
    }

    #[test]
    fn check_hash_on_valid_and_corrupted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = HeaderConfig::new(vec![10], 64, 16).unwrap();
        let p = SourcePacket::new(&c, Sts::default(), vec![4], BitVec::random(64, &mut rng)).unwrap();
        let body = p.flatten(&c).unwrap();
        let mut tail = body.slice(10..body.len());
        assert!(check_hash(&tail, 16));
        tail.toggle(3);
        assert!(!check_hash(&tail, 16));
        assert!(check_hash(&tail, 0));
    }

    #[test]
    fn bytes_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = HeaderConfig::new(vec![7, 5], 29, 16).unwrap();
        let p = SourcePacket::new(&c, Sts { sink: 1, slot: 9 }, vec![6, 0], BitVec::random(29, &mut rng))
            .unwrap();
        let cp = CodedPacket::from_source(&p, &c).unwrap();
        let bytes = cp.to_bytes();
        assert_eq!(bytes.len(), 57usize.div_ceil(8));
        // first block e_6 of length 7: bits 0..7 => 0000001, then e_0 of block 2
        assert_eq!(bytes[0], 0b0000_0011);
        let back = CodedPacket::from_bytes(&bytes, &c, cp.sts).unwrap();
        assert_eq!(back, cp);
        assert_eq!(SourcePacket::parse(&back.body, &c, cp.sts).unwrap(), p);
    }

    #[test]
    fn sum_of_distinct_packets_is_not_a_source_packet() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = HeaderConfig::new(vec![4, 4], 16, 8).unwrap();
        for _ in 0..200 {
            let a: Vec<usize> = (0..2).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<usize> = (0..2).map(|_| rng.random_range(0..4)).collect();
            if a == b {
                continue;
            }
            let pa = SourcePacket::new(&c, Sts::default(), a, BitVec::random(16, &mut rng)).unwrap();
            let pb = SourcePacket::new(&c, Sts::default(), b, BitVec::random(16, &mut rng)).unwrap();
            let sum = pa.flatten(&c).unwrap().xor(&pb.flatten(&c).unwrap());
            assert!(matches!(
                SourcePacket::parse(&sum, &c, Sts::default()),
                Err(Error::NotSourcePacket { .. })
            ));
        }
    }
}
