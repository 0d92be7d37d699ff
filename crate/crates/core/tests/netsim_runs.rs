//! Network simulation invariants.

use necorpia::gf2::IncrementalBasis;
use necorpia::netsim::{
    derive_seed, generate_topology, nonzero_coefficient_distribution, run_sts, HeaderScheme, SimConfig,
};
use necorpia::Error;

#[test]
fn topologies_satisfy_constraints() {
    for s in 0..5 {
        let t = generate_topology(100, derive_seed(21, s)).unwrap();
        assert_eq!(t.diameter(), Some(10));
        assert!(t.min_degree() >= 3);
        assert_eq!(t.positions.len(), 101);
    }
}

#[test]
fn sink_decodes_and_nothing_is_created() {
    let topo = generate_topology(100, 5).unwrap();
    let mut done = 0;
    for seed in 0..20 {
        let cfg = SimConfig::new(100, 15, seed);
        let r = match run_sts(&topo, &cfg) {
            Ok(r) => r,
            Err(Error::NonTermination(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        done += 1;
        assert!(r.decoded);
        assert_eq!(r.sink_rank, 15);
        // every broadcast is a combination of the sources and never empty
        let mut span = IncrementalBasis::new(15);
        for t in &r.transmissions {
            assert_eq!(t.len(), 15);
            assert!(!t.is_zero());
            span.insert(t);
        }
        assert_eq!(span.rank(), 15);
        assert!(r.transmissions.iter().any(|t| t.count_ones() == 1));
    }
    assert!(done >= 15, "only {done} of 20 runs decoded");
}

#[test]
fn mixing_grows_with_sources() {
    let topo = generate_topology(100, 8).unwrap();
    let mean_for = |g: usize| {
        let runs: Vec<_> = (0..10).filter_map(|s| run_sts(&topo, &SimConfig::new(100, g, s)).ok()).collect();
        let d = nonzero_coefficient_distribution(&runs);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        d.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>()
    };
    let (a, b, c) = (mean_for(5), mean_for(20), mean_for(40));
    assert!(a < b && b < c, "{a} {b} {c}");
}

#[test]
fn buffer_limit_is_respected_and_still_decodes() {
    let topo = generate_topology(100, 4).unwrap();
    let ok = (0..20).any(|s| {
        let mut cfg = SimConfig::new(100, 10, s);
        cfg.buffer_size = Some(4);
        run_sts(&topo, &cfg).is_ok()
    });
    assert!(ok);
}

#[test]
fn runs_are_reproducible_and_scheme_independent() {
    let topo = generate_topology(100, 6).unwrap();
    let mut base = SimConfig::new(100, 20, 3);
    let a = run_sts(&topo, &base);
    base.scheme = HeaderScheme::NecorpiaAdaptive { n_v: 2, nb_max: 1000.0 };
    let b = run_sts(&topo, &base);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            assert_eq!(a.transmissions, b.transmissions);
            assert_eq!(a.slots_elapsed, b.slots_elapsed);
            assert_eq!(b.header_bits.raw, 46.0);
        }
        (Err(a), Err(b)) => assert_eq!(a, b),
        _ => panic!("schemes changed the dynamics"),
    }
}
