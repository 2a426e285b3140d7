//! `qfrag train` — fit a regression model on a dataset CSV.

use qfrag_core::learn::{
    fit_forest, fit_lasso, fit_linear, fit_svr, grid_search, read_dataset_csv, save_model,
    train_test_split, DatasetRow, ForestConfig, GridSpec, ModelParams, SvrParams, TrainedModel,
};
use qfrag_core::metrics::model_scorecard;

use crate::error::CliError;
use crate::{Ctx, FamilyArg, GridArg, TrainArgs};

/// Fits the requested family on `rows` with the (possibly grid-chosen)
/// hyperparameters.
fn fit(
    rows: &[DatasetRow<f64>],
    args: &TrainArgs,
    c: f64,
    gamma: f64,
    seed: u64,
) -> Result<ModelParams<f64>, CliError> {
    Ok(match args.model {
        FamilyArg::Linear => ModelParams::Linear(fit_linear(rows, args.degree)?),
        FamilyArg::Lasso => {
            let fit = fit_lasso(rows, args.strength, args.degree)?;
            if !fit.converged {
                eprintln!(
                    "note: lasso stopped at the sweep cap (gap {:.3e} after {} sweeps)",
                    fit.duality_gap, fit.sweeps
                );
            }
            ModelParams::Lasso(fit.model)
        }
        FamilyArg::Forest => ModelParams::Forest(fit_forest(
            rows,
            &ForestConfig {
                n_trees: args.trees,
                seed,
                ..ForestConfig::default()
            },
        )?),
        FamilyArg::Svr => {
            let params = SvrParams {
                c,
                gamma,
                epsilon: args.epsilon,
                ..SvrParams::default()
            };
            let fit = fit_svr(rows, &params)?;
            if !fit.converged {
                eprintln!(
                    "note: SVR stopped at the iteration cap (KKT violation {:.3e})",
                    fit.kkt_violation
                );
            }
            ModelParams::Svr(fit.model)
        }
    })
}

pub fn run(args: TrainArgs, ctx: &Ctx) -> Result<(), CliError> {
    let rows = read_dataset_csv::<f64>(&args.data)?;
    let (train_rows, test_rows) = train_test_split(&rows, args.train_fraction, ctx.seed)?;

    // Hyperparameter search happens on the training split only.
    let (mut c, mut gamma) = (args.c, args.gamma);
    if args.grid == GridArg::CoarseFine {
        if args.model == FamilyArg::Svr {
            let spec = GridSpec {
                folds: args.folds,
                ..GridSpec::default()
            };
            let found = grid_search(&train_rows, &spec, args.epsilon, ctx.seed)?;
            c = found.c;
            gamma = found.gamma;
            println!(
                "grid search: C = {c}, gamma = {gamma} (cv RMSE {:.4}, {} cells)",
                found.rmse,
                found.evaluated.len()
            );
        } else {
            eprintln!("note: --grid coarse-fine only tunes SVR; ignored for this family");
        }
    }

    // Score a split-trained model on the held-out rows, then refit on every
    // row for the persisted model.
    let split_model = TrainedModel::new(fit(&train_rows, &args, c, gamma, ctx.seed)?);
    let actual: Vec<f64> = test_rows.iter().map(|r| r.label).collect();
    let predicted: Vec<f64> = test_rows
        .iter()
        .map(|r| split_model.predict(&r.features).clamp(0.0, 100.0))
        .collect();
    let card = model_scorecard(&actual, &predicted, qfrag_core::circuit::FEATURE_LEN)?;

    let final_model = TrainedModel::new(fit(&rows, &args, c, gamma, ctx.seed)?);
    save_model(&args.out, &final_model)?;

    println!(
        "trained {} on {} rows ({} fit / {} held out)",
        final_model.params.family(),
        rows.len(),
        train_rows.len(),
        test_rows.len()
    );
    println!(
        "held-out: R^2 = {:.4}, RMSE = {:.4}, mean |err| = {:.4}",
        card.r_squared, card.rmse, card.mean_error
    );
    println!("saved model -> {}", args.out.display());
    Ok(())
}
