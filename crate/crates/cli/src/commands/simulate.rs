//! `qfrag simulate` — execute one circuit, print its distribution.

use qfrag_core::sim::{simulate_with_mode, CutBoundarySpec, SimOptions};

use crate::common::{distribution_csv, exec_mode, load_circuit, out_path, resolve_backend, write_text};
use crate::error::CliError;
use crate::{Ctx, SimulateArgs};

pub fn run(args: SimulateArgs, ctx: &Ctx) -> Result<(), CliError> {
    let circuit = load_circuit(&args.circuit)?;
    let backend = resolve_backend(args.backend)?;
    let mode = exec_mode(backend, ctx.shots, &ctx.noise);
    let dist = simulate_with_mode::<f64>(
        &circuit,
        &CutBoundarySpec::none(),
        &mode,
        &SimOptions::default(),
    )?;
    let csv = distribution_csv(&dist);
    print!("{csv}");
    if let Some(dir) = &ctx.out_dir {
        let path = out_path(dir, "distribution.csv")?;
        write_text(&path, &csv)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
