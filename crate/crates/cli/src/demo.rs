//! `demo`: one generation through encoder, network and decoder.

use std::collections::BTreeSet;

use necorpia::decoder::{derpia_with, DecodeOptions};
use necorpia::encoder::Generation;
use necorpia::{HeaderConfig, Sts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{resolve_seed, DemoArgs, VariantArg};
use crate::{usage, CliError, CliResult};

pub fn run(a: &DemoArgs) -> CliResult<()> {
    if a.g == 0 {
        return usage("--g must be at least 1: an empty generation has nothing to decode");
    }
    if a.payload == 0 {
        return usage("--payload must be positive");
    }
    let lengths = a.header.block_lengths()?;
    let cfg = HeaderConfig::new(lengths.clone(), a.payload, a.header.hash_len).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = resolve_seed(a.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sts = Sts::default();
    let generation = Generation::random(&cfg, sts, a.g, &mut rng)?;
    let y = generation.receive(&mut rng)?;
    let options = DecodeOptions {
        fast_path: !a.no_fast_path,
    };
    let result = derpia_with(&y, &cfg, sts, a.variant.into(), options)?;

    let truth: BTreeSet<_> = generation.sources.iter().cloned().collect();
    let found: BTreeSet<_> = result.recovered.iter().cloned().collect();
    let true_found = truth.intersection(&found).count();
    let phantoms = found.difference(&truth).count();
    let s = &result.stats;
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    println!("blocks: {}  hash bits: {}  payload bits: {}", join(&lengths), cfg.hash_len, cfg.payload_len);
    println!("sources: {}", a.g);
    println!(
        "variant: {}",
        match a.variant {
            VariantArg::Sle => "sle",
            VariantArg::Lut => "lut",
        }
    );
    println!("rank profile: {}", join(&s.rank_profile));
    println!("fast path: {}", if s.used_fast_path { "yes" } else { "no" });
    println!(
        "branches per level: {}",
        s.branches_per_level.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    );
    println!("terminal candidates: {}", s.terminal_candidates);
    println!("tree operations: {}", s.gf2_ops);
    println!("fast path operations: {}", s.fast_path_ops);
    println!("recovered: {} ({true_found} of {} sources, {phantoms} phantoms)", found.len(), a.g);
    for p in &result.sorted_packets() {
        let tag = if truth.contains(p) { ' ' } else { '*' };
        println!(
            "{tag} indices {:<12} payload {}",
            join(&p.indices),
            hex_prefix(&p.payload.to_bytes(), 8)
        );
    }
    if true_found != a.g {
        return Err(CliError::Internal(anyhow::anyhow!(
            "decoder missed {} source packets",
            a.g - true_found
        )));
    }
    Ok(())
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    let mut s: String = bytes.iter().take(n).map(|b| format!("{b:02x}")).collect();
    if bytes.len() > n {
        s.push_str("..");
    }
    s
}
