//! `qfrag dataset` — measure a corpus into labelled training rows.

use qfrag_core::learn::{build_dataset, dataset_to_csv};

use crate::commands::resolve_corpus;
use crate::common::write_text;
use crate::error::CliError;
use crate::{Ctx, DatasetArgs};

pub fn run(args: DatasetArgs, ctx: &Ctx) -> Result<(), CliError> {
    let corpus = resolve_corpus(&args.source, ctx.seed, false)?;
    let rows = build_dataset::<f64>(&corpus, &ctx.noise, ctx.shots)?;
    write_text(&args.out, &dataset_to_csv(&rows))?;
    println!(
        "dataset: {} rows at {} shots -> {}",
        rows.len(),
        ctx.shots,
        args.out.display()
    );
    Ok(())
}
