//! `qfrag bench` — compare full noisy execution against cut-and-reconstruct
//! over a corpus, reporting the error reduction per circuit.

use std::collections::BTreeSet;

use qfrag_core::fragment::fragment_recursively;
use qfrag_core::learn::MemoizedPredictor;
use qfrag_core::metrics::error_report;
use qfrag_core::reconstruct::fold_tree;
use qfrag_core::sim::{mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, ExecMode, SimOptions};

use crate::common::{load_model_file, out_path, write_text};
use crate::error::CliError;
use crate::{BenchArgs, Ctx};

use super::resolve_corpus;

struct BenchRow {
    name: String,
    n_qubits: usize,
    gates: usize,
    leaves: usize,
    full_mean_error: f64,
    recon_mean_error: f64,
    full_fidelity: f64,
    recon_fidelity: f64,
    /// `None` when the full-circuit error is zero (nothing to reduce).
    reduction_pct: Option<f64>,
}

pub fn run(args: BenchArgs, ctx: &Ctx) -> Result<(), CliError> {
    let corpus = resolve_corpus(&args.source, ctx.seed, true)?;
    let model = load_model_file(&args.model)?;
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();

    let mut rows: Vec<BenchRow> = Vec::with_capacity(corpus.len());
    for (i, circuit) in corpus.iter().enumerate() {
        let ideal = simulate_ideal::<f64>(circuit, &boundary, &opts)?;

        // Independent noise streams for the whole-circuit run and the
        // reconstruction so neither borrows the other's luck.
        let full_noise = ctx.noise.clone().with_seed(mix_seed(ctx.noise.seed, 2 * i as u64));
        let full = simulate_noisy::<f64>(circuit, &full_noise, ctx.shots, &boundary, &opts)?;
        let err_full = error_report(&ideal, &full, None)?;

        let mut predictor = MemoizedPredictor::new(&model);
        let tree = fragment_recursively(
            circuit,
            &mut predictor,
            args.threshold,
            args.k,
            args.max_depth,
        )?;
        let recon_noise = ctx
            .noise
            .clone()
            .with_seed(mix_seed(ctx.noise.seed, 2 * i as u64 + 1));
        let mode = ExecMode::Shots {
            shots: ctx.shots,
            noise: recon_noise,
        };
        let fold = fold_tree(&tree, &mode, &opts)?;
        let err_rec = error_report(&ideal, &fold.distribution, None)?;

        let reduction_pct = if err_full.mean_error > 0.0 {
            Some((err_full.mean_error - err_rec.mean_error) / err_full.mean_error * 100.0)
        } else {
            None
        };
        rows.push(BenchRow {
            name: circuit
                .name
                .clone()
                .unwrap_or_else(|| format!("circuit-{i:03}")),
            n_qubits: circuit.n_qubits(),
            gates: circuit.unitary_gate_count(),
            leaves: tree.n_leaves(),
            full_mean_error: err_full.mean_error,
            recon_mean_error: err_rec.mean_error,
            full_fidelity: err_full.hellinger_fidelity,
            recon_fidelity: err_rec.hellinger_fidelity,
            reduction_pct,
        });
    }

    let mut csv = String::from(
        "name,n_qubits,gates,leaves,full_mean_error,recon_mean_error,full_fidelity,recon_fidelity,reduction_pct\n",
    );
    println!(
        "{:<12} {:>6} {:>5} {:>6} {:>10} {:>10} {:>12}",
        "name", "qubits", "gates", "leaves", "full_err", "recon_err", "reduction"
    );
    for r in &rows {
        let red = r
            .reduction_pct
            .map(|p| format!("{p:.2}"))
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.n_qubits,
            r.gates,
            r.leaves,
            r.full_mean_error,
            r.recon_mean_error,
            r.full_fidelity,
            r.recon_fidelity,
            red
        ));
        println!(
            "{:<12} {:>6} {:>5} {:>6} {:>10.4} {:>10.4} {:>12}",
            r.name,
            r.n_qubits,
            r.gates,
            r.leaves,
            r.full_mean_error,
            r.recon_mean_error,
            r.reduction_pct
                .map(|p| format!("{p:.2}%"))
                .unwrap_or_else(|| "n/a".to_string())
        );
    }

    let defined: Vec<f64> = rows.iter().filter_map(|r| r.reduction_pct).collect();
    if defined.is_empty() {
        println!("no circuit had a nonzero full-execution error; reduction undefined");
    } else {
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        let improved = defined.iter().filter(|&&p| p > 0.0).count();
        println!(
            "mean error reduction {:.2}% over {} circuits; reconstruction beat full execution on {}/{}",
            mean,
            defined.len(),
            improved,
            defined.len()
        );
    }

    let dir = ctx.out_dir_or_default();
    let csv_path = out_path(&dir, "bench.csv")?;
    write_text(&csv_path, &csv)?;
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}
