//! Statistical checks of the hash, the index draw and full-rank sampling.

use necorpia::encoder::{random_full_rank_matrix_counted, random_source};
use necorpia::packet::hash_payload;
use necorpia::{BitVec, HeaderConfig, Sts};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn within_3_sigma(count: f64, n: f64, p: f64) -> bool {
    (count - n * p).abs() <= 3.0 * (n * p * (1.0 - p)).sqrt()
}

#[test]
fn hash_collision_rate_matches_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    for lh in [16usize, 8] {
        let mut hits = 0;
        for _ in 0..n {
            let a = BitVec::random(96, &mut rng);
            let b = BitVec::random(96, &mut rng);
            if a != b && hash_payload(&a, lh) == hash_payload(&b, lh) {
                hits += 1;
            }
        }
        assert!(within_3_sigma(hits as f64, n as f64, 2f64.powi(-(lh as i32))), "Lh={lh}: {hits}");
    }
}

#[test]
fn indices_are_uniform() {
    let cfg = HeaderConfig::new(vec![100, 7], 8, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 100_000;
    let mut counts = [vec![0u64; 100], vec![0u64; 7]];
    for _ in 0..n {
        let p = random_source(&cfg, Sts::default(), BitVec::zeros(8), &mut rng).unwrap();
        counts[0][p.indices[0]] += 1;
        counts[1][p.indices[1]] += 1;
    }
    for c in &counts {
        let e = n as f64 / c.len() as f64;
        let chi2: f64 = c.iter().map(|&x| (x as f64 - e).powi(2) / e).sum();
        let dof = (c.len() - 1) as f64;
        // mean dof, standard deviation sqrt(2 dof)
        assert!(chi2 < dof + 5.0 * (2.0 * dof).sqrt(), "chi2 {chi2} with {dof} dof");
    }
}

#[test]
fn full_rank_acceptance_rate() {
    // probability that a uniform 8x8 binary matrix is invertible
    let p: f64 = (1..=8).map(|i| 1.0 - 2f64.powi(-i)).product();
    assert!((p - 0.2899).abs() < 1e-4);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let trials = 20_000;
    let draws: usize = (0..trials).map(|_| random_full_rank_matrix_counted(8, &mut rng).1).sum();
    let accepted = trials as f64;
    assert!(within_3_sigma(accepted, draws as f64, p), "{accepted} of {draws}");
}

proptest! {
    #[test]
    fn coded_packet_bytes_roundtrip(seed in any::<u64>(), l1 in 1usize..60, l2 in 1usize..60, payload in 1usize..100, lh in 0usize..70) {
        let cfg = HeaderConfig::new(vec![l1, l2], payload, lh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_source(&cfg, Sts { sink: 3, slot: 9 }, BitVec::random(payload, &mut rng), &mut rng).unwrap();
        let coded = necorpia::CodedPacket::from_source(&p, &cfg).unwrap();
        let back = necorpia::CodedPacket::from_bytes(&coded.to_bytes(), &cfg, p.sts).unwrap();
        prop_assert_eq!(&back, &coded);
        let parsed = necorpia::SourcePacket::parse(&back.body, &cfg, p.sts).unwrap();
        prop_assert_eq!(parsed, p);
    }
}
