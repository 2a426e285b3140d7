//! `qfrag shots-sweep` — measure mean error vs shot count over a corpus and
//! pick the knee of the fitted curve.

use qfrag_core::learn::{pick_best_exponent, shots_sweep};

use crate::common::{out_path, write_text};
use crate::error::CliError;
use crate::{Ctx, SweepArgs};

use super::resolve_corpus;

/// Parse an exponent list: `a..=b` (inclusive), `a..b` (exclusive), or a
/// comma-separated list `a,b,c`.
fn parse_exponents(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = |why: &str| CliError::Parse(format!("invalid --exponents '{text}': {why}"));
    let parse_u32 =
        |s: &str| s.trim().parse::<u32>().map_err(|_| bad("expected an integer"));
    let range = if let Some((a, b)) = text.split_once("..=") {
        let (a, b) = (parse_u32(a)?, parse_u32(b)?);
        (a..=b).collect::<Vec<u32>>()
    } else if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse_u32(a)?, parse_u32(b)?);
        (a..b).collect()
    } else {
        text.split(',').map(parse_u32).collect::<Result<_, _>>()?
    };
    if range.is_empty() {
        return Err(bad("empty exponent set"));
    }
    if range.iter().any(|&e| e == 0 || e > 62) {
        return Err(bad("exponents must be in 1..=62"));
    }
    Ok(range)
}

pub fn run(args: SweepArgs, ctx: &Ctx) -> Result<(), CliError> {
    let exponents = parse_exponents(&args.exponents)?;
    let corpus = resolve_corpus(&args.source, ctx.seed, false)?;

    let points = shots_sweep(&corpus, &ctx.noise, &exponents)?;
    let best = pick_best_exponent(&points, args.degree)?;

    let mut csv = String::from("exponent,shots,mean_error\n");
    println!("{:>8} {:>12} {:>12}", "exponent", "shots", "mean_error");
    for p in &points {
        let shots = 1u64 << p.exponent;
        csv.push_str(&format!("{},{},{}\n", p.exponent, shots, p.mean_error));
        println!("{:>8} {:>12} {:>12.4}", p.exponent, shots, p.mean_error);
    }
    println!(
        "best exponent {} (2^{} = {} shots) by a degree-{} fit over {} circuits",
        best,
        best,
        1u64 << best,
        args.degree,
        corpus.len()
    );

    if let Some(dir) = &ctx.out_dir {
        let csv_path = out_path(dir, "sweep.csv")?;
        write_text(&csv_path, &csv)?;
        eprintln!("wrote {}", csv_path.display());
    }
    Ok(())
}
