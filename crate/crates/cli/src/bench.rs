//! `bench`: instrumented decoder operation counts against the cost formulas.
//!
//! `bench.csv`: `g, variant, trials, ratio_analytic, ratio_formula_observed,
//! ratio_instrumented, max_ops_over_formula, violations`. Ratios are
//! `(A_NC + K) / A_NC` with `K` the expected formula cost under the
//! closed-form law, the mean formula cost of the observed profiles, and the
//! mean counted operations. Wall-clock timings go to stdout only.

use std::time::{Duration, Instant};

use necorpia::analytics::{cost_lut, cost_plain_nc, cost_sle, expected_cost_ratio, CostConstants, PmfSource, RankProfile};
use necorpia::decoder::{derpia_with, DecodeOptions, Variant};
use necorpia::encoder::Generation;
use necorpia::netsim::derive_seed;
use necorpia::{HeaderConfig, Sts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{resolve_seed, BenchArgs};
use crate::table::{float, write};
use crate::{usage, CliError, CliResult};

const VARIANTS: [(Variant, &str); 2] = [(Variant::Sle, "sle"), (Variant::Lut, "lut")];

#[derive(Default)]
struct Tally {
    formula: f64,
    ops: f64,
    max_fraction: f64,
    violations: usize,
    elapsed: Duration,
}

pub fn run(a: &BenchArgs) -> CliResult<()> {
    let lengths = a.header.block_lengths()?;
    let header: usize = lengths.iter().sum();
    if a.packet_len <= header + a.header.hash_len {
        return usage("--Lx must exceed the header and hash lengths");
    }
    if a.grid.trials == 0 {
        return usage("--trials must be positive");
    }
    let default_g: &[usize] = if lengths.len() == 1 { &[5, 10, 15, 20, 25] } else { &[10, 20, 30, 40, 50] };
    let gs = a.grid.gs(default_g)?;
    let seed = resolve_seed(a.grid.seed);
    let cfg = HeaderConfig::new(lengths.clone(), a.packet_len - header - a.header.hash_len, a.header.hash_len)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let points = gs
        .par_iter()
        .enumerate()
        .map(|(i, &g)| bench_point(g, &cfg, a, derive_seed(seed, i as u64)))
        .collect::<CliResult<Vec<_>>>()?;

    let c = CostConstants::default();
    let mut rows = Vec::new();
    for (&g, tallies) in gs.iter().zip(&points) {
        let nc = cost_plain_nc(g, a.packet_len, &c);
        let trials = a.grid.trials as f64;
        for ((variant, name), t) in VARIANTS.iter().zip(tallies) {
            let analytic = if lengths.len() <= 2 {
                float(expected_cost_ratio(g, &lengths, a.packet_len, 2, *variant, &PmfSource::Analytic, &c)?)?
            } else {
                String::new()
            };
            rows.push(vec![
                g.to_string(),
                name.to_string(),
                a.grid.trials.to_string(),
                analytic,
                float((nc + t.formula / trials) / nc)?,
                float((nc + t.ops / trials) / nc)?,
                float(t.max_fraction)?,
                t.violations.to_string(),
            ]);
            println!(
                "g = {g} {name}: mean decode time {:.3} ms",
                t.elapsed.as_secs_f64() * 1e3 / trials
            );
        }
    }
    write(
        &a.grid.out,
        "bench.csv",
        &[
            "g",
            "variant",
            "trials",
            "ratio_analytic",
            "ratio_formula_observed",
            "ratio_instrumented",
            "max_ops_over_formula",
            "violations",
        ],
        &rows,
    )?;
    Ok(())
}

fn bench_point(g: usize, cfg: &HeaderConfig, a: &BenchArgs, seed: u64) -> CliResult<[Tally; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = CostConstants::default();
    let l_p = cfg.tail_len();
    let mut tallies = [Tally::default(), Tally::default()];
    let options = DecodeOptions { fast_path: false };
    for _ in 0..a.grid.trials {
        let generation = Generation::random(cfg, Sts::default(), g, &mut rng)?;
        let y = generation.receive(&mut rng)?;
        for ((variant, _), t) in VARIANTS.iter().zip(tallies.iter_mut()) {
            let start = Instant::now();
            let r = derpia_with(&y, cfg, Sts::default(), *variant, options)?;
            t.elapsed += start.elapsed();
            let profile = RankProfile::new(r.stats.rank_profile.clone());
            let formula = match variant {
                Variant::Sle => cost_sle(&profile, &cfg.block_lengths, l_p, g, 2, &c),
                Variant::Lut => cost_lut(&profile, &cfg.block_lengths, l_p, g, 2, &c),
            };
            let ops = r.stats.gf2_ops as f64;
            t.formula += formula;
            t.ops += ops;
            if formula > 0.0 {
                t.max_fraction = t.max_fraction.max(ops / formula);
            }
            if ops > formula {
                t.violations += 1;
            }
        }
    }
    Ok(tallies)
}
