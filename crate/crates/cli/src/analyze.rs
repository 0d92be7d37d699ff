//! `analyze`: rank-profile laws and the quantities derived from them.
//!
//! `rank_pmf.csv`: `g, rho_1, …, rho_{nv+1}, analytic, empirical`.
//! `expectations.csv`: `g, source, e_nb_terminal, e_nb_total, error_bound,
//! ratio_sle, ratio_lut` with one row per pmf source (`analytic`, `empirical`).

use std::collections::BTreeMap;

use necorpia::analytics::{
    expected_branches, expected_cost_ratio, expected_error_bound, profile_pmf, sample_profiles, CostConstants,
    PmfSource, RankProfile,
};
use necorpia::decoder::Variant;
use necorpia::netsim::derive_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{resolve_seed, AnalyzeArgs};
use crate::table::{float, write};
use crate::{usage, CliResult};

const DEFAULT_G: &[usize] = &[5, 10, 20, 30];

struct Point {
    pmf_rows: Vec<Vec<String>>,
    expectation_rows: Vec<Vec<String>>,
}

pub fn run(a: &AnalyzeArgs) -> CliResult<()> {
    let lengths = a.header.block_lengths()?;
    if lengths.len() > 2 {
        return usage("closed-form laws exist for one or two header blocks only");
    }
    if a.grid.trials == 0 {
        return usage("--trials must be positive");
    }
    let header: usize = lengths.iter().sum();
    if a.packet_len <= header + a.header.hash_len {
        return usage("--Lx must exceed the header and hash lengths");
    }
    let gs = a.grid.gs(DEFAULT_G)?;
    let seed = resolve_seed(a.grid.seed);
    let points = gs
        .par_iter()
        .enumerate()
        .map(|(i, &g)| point(g, &lengths, a, derive_seed(seed, i as u64)))
        .collect::<CliResult<Vec<_>>>()?;

    let mut header_cols = vec!["g".to_string()];
    header_cols.extend((1..=lengths.len() + 1).map(|l| format!("rho_{l}")));
    header_cols.extend(["analytic".to_string(), "empirical".to_string()]);
    let cols: Vec<&str> = header_cols.iter().map(String::as_str).collect();
    let pmf_rows: Vec<Vec<String>> = points.iter().flat_map(|p| p.pmf_rows.iter().cloned()).collect();
    write(&a.grid.out, "rank_pmf.csv", &cols, &pmf_rows)?;
    let rows: Vec<Vec<String>> = points.iter().flat_map(|p| p.expectation_rows.iter().cloned()).collect();
    write(
        &a.grid.out,
        "expectations.csv",
        &["g", "source", "e_nb_terminal", "e_nb_total", "error_bound", "ratio_sle", "ratio_lut"],
        &rows,
    )?;
    Ok(())
}

fn point(g: usize, lengths: &[usize], a: &AnalyzeArgs, seed: u64) -> CliResult<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hist = sample_profiles(g, lengths, a.grid.trials, &mut rng);
    let mut merged: BTreeMap<RankProfile, (f64, f64)> = BTreeMap::new();
    for (r, p) in profile_pmf(g, lengths, &PmfSource::Analytic)? {
        merged.entry(r).or_default().0 += p;
    }
    for (r, p) in hist.pmf() {
        merged.entry(r).or_default().1 += p;
    }
    let pmf_rows = merged
        .into_iter()
        .map(|(r, (an, em))| {
            let mut row = vec![g.to_string()];
            row.extend(r.rhos.iter().map(usize::to_string));
            row.push(float(an)?);
            row.push(float(em)?);
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let c = CostConstants::default();
    let mut expectation_rows = Vec::new();
    for (name, source) in [("analytic", PmfSource::Analytic), ("empirical", PmfSource::Empirical(&hist))] {
        let e = expected_branches(g, lengths, 2, &source)?;
        let pe = expected_error_bound(g, lengths, 2, a.header.hash_len, &source)?;
        let sle = expected_cost_ratio(g, lengths, a.packet_len, 2, Variant::Sle, &source, &c)?;
        let lut = expected_cost_ratio(g, lengths, a.packet_len, 2, Variant::Lut, &source, &c)?;
        expectation_rows.push(vec![
            g.to_string(),
            name.to_string(),
            float(e.terminal)?,
            float(e.total)?,
            float(pe)?,
            float(sle)?,
            float(lut)?,
        ]);
    }
    Ok(Point {
        pmf_rows,
        expectation_rows,
    })
}
