//! `qfrag predict` — apply a trained model to one circuit.

use crate::common::{load_circuit, load_model_file};
use crate::error::CliError;
use crate::{Ctx, PredictArgs};

pub fn run(args: PredictArgs, _ctx: &Ctx) -> Result<(), CliError> {
    let model = load_model_file(&args.model)?;
    let circuit = load_circuit(&args.circuit)?;
    let predicted = model.predict_error(&circuit).map_err(CliError::from)?;
    // Bare value on stdout so scripts can consume it directly.
    println!("{predicted}");
    Ok(())
}
