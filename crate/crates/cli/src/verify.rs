//! `verify`: quick self-checks of the decoder and the occupancy law.

use necorpia::analytics::{branch_bound, occupancy_pmf, sample_profiles};
use necorpia::decoder::{brute_force_decode, derpia, Variant};
use necorpia::encoder::Generation;
use necorpia::netsim::derive_seed;
use necorpia::{HeaderConfig, Sts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{resolve_seed, VerifyArgs};
use crate::{CliError, CliResult};

/// Result of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn run(a: &VerifyArgs) -> CliResult<()> {
    let seed = resolve_seed(a.seed);
    let checks = vec![
        oracle_equivalence(a.trials, derive_seed(seed, 1))?,
        occupancy_agreement(100, &[5, 10, 20, 30], a.mc_trials, derive_seed(seed, 2)),
    ];
    let mut failed = Vec::new();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed.push(c.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// Random small instance with short headers and hashes, so that collisions
/// and phantoms are frequent.
pub fn random_instance<R: Rng>(rng: &mut R) -> necorpia::Result<(Generation, necorpia::BinaryMatrix)> {
    let g = rng.random_range(1..=12);
    let nv = rng.random_range(1..=3);
    let lengths = (0..nv).map(|_| rng.random_range(1..=8)).collect();
    let cfg = HeaderConfig::new(lengths, rng.random_range(16..=40), rng.random_range(2..=10))?;
    let generation = Generation::random(&cfg, Sts::default(), g, rng)?;
    let y = generation.receive(rng)?;
    Ok((generation, y))
}

/// Both tree decoders and exhaustive search return the same packet set,
/// which contains every source, and branch counts respect their bounds.
pub fn oracle_equivalence(trials: usize, seed: u64) -> CliResult<Check> {
    let failures: Vec<String> = (0..trials)
        .into_par_iter()
        .map(|i| -> CliResult<Option<String>> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let (generation, y) = random_instance(&mut rng)?;
            let cfg = &generation.cfg;
            let sle = derpia(&y, cfg, Sts::default(), Variant::Sle)?;
            let lut = derpia(&y, cfg, Sts::default(), Variant::Lut)?;
            let brute = brute_force_decode(&y, cfg, Sts::default())?;
            let reference = brute.sorted_packets();
            if sle.sorted_packets() != reference || lut.sorted_packets() != reference {
                return Ok(Some(format!("instance {i}: decoders disagree")));
            }
            if generation.sources.iter().any(|p| !reference.contains(p)) {
                return Ok(Some(format!("instance {i}: a source packet was lost")));
            }
            for r in [&sle, &lut] {
                if r.stats.used_fast_path {
                    continue;
                }
                let bound = branch_bound::<f64>(&necorpia::analytics::RankProfile::new(r.stats.rank_profile.clone()), 2);
                let nv = cfg.n_v();
                let within = (0..nv).all(|l| r.stats.branches_per_level[l] as f64 <= bound.per_level[l])
                    && r.stats.terminal_candidates as f64 <= bound.terminal;
                if !within {
                    return Ok(Some(format!("instance {i}: branch bound exceeded")));
                }
            }
            Ok(None)
        })
        .collect::<CliResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Check {
        name: "decoder oracle equivalence".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{trials} instances agree")
        } else {
            failures.join("; ")
        },
    })
}

/// Largest deviation of the observed `ρ_1` frequencies from the occupancy
/// law, in units of the binomial standard deviation of each bin. Bins whose
/// expected count is below one use the band `p + 3σ + 1/n` instead of a
/// z-score so that empty tails do not dominate.
pub fn occupancy_max_z(g: usize, l: usize, trials: usize, seed: u64) -> (f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hist = sample_profiles(g, &[l], trials, &mut rng);
    let emp = hist.marginal(0, g);
    let pmf = occupancy_pmf(g, l);
    let n = trials as f64;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 0..=g {
        let p = pmf.get(k).copied().unwrap_or(0.0);
        let sigma = (p * (1.0 - p) / n).sqrt();
        let dev = (emp[k] - p).abs();
        if dev > 3.0 * sigma + 1.0 / n {
            ok = false;
        }
        if sigma > 0.0 {
            worst = worst.max(dev / sigma);
        }
    }
    (worst, ok)
}

pub fn occupancy_agreement(l: usize, gs: &[usize], trials: usize, seed: u64) -> Check {
    let results: Vec<(usize, f64, bool)> = gs
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let (z, ok) = occupancy_max_z(g, l, trials, derive_seed(seed, i as u64));
            (g, z, ok)
        })
        .collect();
    Check {
        name: format!("occupancy law at L = {l}"),
        passed: results.iter().all(|r| r.2),
        detail: results
            .iter()
            .map(|(g, z, _)| format!("g={g} max|z|={z:.2}"))
            .collect::<Vec<_>>()
            .join(", "),
    }
}
