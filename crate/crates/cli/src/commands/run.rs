//! `qfrag run` — the full pipeline: predict, cut, execute, reconstruct,
//! report.
//!
//! Deterministic results land in `plan.json`, `distribution.csv`, and
//! `report.json`; wall-clock numbers are quarantined in `timings.json` so
//! repeated runs with the same seed stay byte-identical.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use qfrag_core::fragment::{fragment_recursively, FragmentationTree, NodeKind};
use qfrag_core::learn::MemoizedPredictor;
use qfrag_core::metrics::{mean_abs_error, ErrorReport};
use qfrag_core::reconstruct::fold_tree;
use qfrag_core::sim::{mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, SimOptions};
use qfrag_core::NoiseModel64;

use crate::common::{
    bitstring, distribution_csv, exec_mode, load_circuit, load_model_file, out_path,
    resolve_backend, to_json_pretty, write_text, BackendArg,
};
use crate::error::CliError;
use crate::{Ctx, RunArgs};

#[derive(Serialize)]
struct CircuitInfo {
    name: Option<String>,
    n_qubits: usize,
    unitary_gates: usize,
    depth: usize,
}

#[derive(Serialize)]
struct NoiseInfo {
    p1: f64,
    p2: f64,
    p_idle: f64,
    p_ro: f64,
    seed: u64,
}

#[derive(Serialize)]
struct ConfigInfo {
    backend: &'static str,
    threshold: f64,
    k: usize,
    max_depth: usize,
    shots: usize,
    seed: u64,
    noise: NoiseInfo,
}

#[derive(Serialize)]
struct NodeInfo {
    id: usize,
    depth: usize,
    kind: &'static str,
    n_qubits: usize,
    gates: usize,
    predicted_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cut_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
}

#[derive(Serialize)]
struct LeafInfo {
    id: usize,
    name: Option<String>,
    n_qubits: usize,
    gates: usize,
    predicted_error: f64,
    /// Standalone noisy-vs-ideal error of this leaf circuit (sampled mode
    /// only; null under the exact backend).
    measured_error: Option<f64>,
}

#[derive(Serialize)]
struct TreeInfo {
    nodes: usize,
    leaves: usize,
    depth: usize,
    unsplittable_leaves: usize,
    root_predicted_error: f64,
    predictor_cache_entries: usize,
    node_summaries: Vec<NodeInfo>,
}

#[derive(Serialize)]
struct ReconInfo {
    runs_executed: usize,
    max_fragment_qubits: usize,
    clipped_mass: f64,
    renormalizations: usize,
    ran_unsplittable: bool,
}

#[derive(Serialize)]
struct OutcomeInfo {
    bitstring: String,
    probability: f64,
}

#[derive(Serialize)]
struct RunReport {
    format_version: u32,
    circuit: CircuitInfo,
    config: ConfigInfo,
    tree: TreeInfo,
    leaves: Vec<LeafInfo>,
    reconstruction: ReconInfo,
    /// Reconstruction quality against exact simulation of the root circuit,
    /// when that reference is computable.
    reference: Option<ErrorReport<f64>>,
    top_outcomes: Vec<OutcomeInfo>,
}

#[derive(Serialize)]
struct Timings {
    started_unix_ms: u128,
    load_s: f64,
    fragment_s: f64,
    execute_s: f64,
    total_s: f64,
}

fn node_summaries(tree: &FragmentationTree<f64>) -> Vec<NodeInfo> {
    tree.nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| {
            let (kind, cut_label, distance) = match &node.kind {
                NodeKind::Leaf { unsplittable } => {
                    (if *unsplittable { "unsplittable-leaf" } else { "leaf" }, None, None)
                }
                NodeKind::Split { cut, .. } => {
                    ("split", Some(cut.candidate.label()), Some(cut.distance))
                }
            };
            NodeInfo {
                id,
                depth: node.depth,
                kind,
                n_qubits: node.circuit.n_qubits(),
                gates: node.circuit.unitary_gate_count(),
                predicted_error: node.predicted_error,
                cut_label,
                distance,
            }
        })
        .collect()
}

/// Standalone measured error per leaf (noisy backend only): the leaf
/// executed under its own derived noise stream against its exact
/// distribution — the per-fragment analogue of the full-circuit error.
fn leaf_infos(
    tree: &FragmentationTree<f64>,
    backend: BackendArg,
    shots: usize,
    noise: &NoiseModel64,
) -> Vec<LeafInfo> {
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();
    // A stream separate from the fold's own per-run seeds.
    let leaf_base = mix_seed(noise.seed, u64::from_le_bytes(*b"leafmeas"));
    tree.leaf_ids()
        .into_iter()
        .map(|id| {
            let node = tree.node(id);
            let measured_error = if backend == BackendArg::NoisyShots {
                simulate_ideal::<f64>(&node.circuit, &boundary, &opts)
                    .ok()
                    .and_then(|ideal| {
                        let leaf_noise = noise.clone().with_seed(mix_seed(leaf_base, id as u64));
                        simulate_noisy::<f64>(&node.circuit, &leaf_noise, shots, &boundary, &opts)
                            .ok()
                            .and_then(|noisy| mean_abs_error(&ideal, &noisy, None).ok())
                    })
            } else {
                None
            };
            LeafInfo {
                id,
                name: node.circuit.name.clone(),
                n_qubits: node.circuit.n_qubits(),
                gates: node.circuit.unitary_gate_count(),
                predicted_error: node.predicted_error,
                measured_error,
            }
        })
        .collect()
}

pub fn run(args: RunArgs, ctx: &Ctx) -> Result<(), CliError> {
    let started_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let t_total = Instant::now();

    let circuit = load_circuit(&args.circuit)?;
    let model = load_model_file(&args.model)?;
    let backend = resolve_backend(args.backend)?;
    let load_s = t_total.elapsed().as_secs_f64();

    let t_fragment = Instant::now();
    let mut predictor = MemoizedPredictor::new(&model);
    let tree = fragment_recursively(
        &circuit,
        &mut predictor,
        args.threshold,
        args.k,
        args.max_depth,
    )?;
    let fragment_s = t_fragment.elapsed().as_secs_f64();

    let t_execute = Instant::now();
    let mode = exec_mode(backend, ctx.shots, &ctx.noise);
    let fold = fold_tree(&tree, &mode, &SimOptions::default())?;
    let execute_s = t_execute.elapsed().as_secs_f64();

    let unsplittable_leaves = tree
        .nodes()
        .iter()
        .filter(|n| n.is_unsplittable())
        .count();
    if fold.ran_unsplittable {
        eprintln!(
            "warning: {unsplittable_leaves} leaf circuit(s) still predicted above the threshold and were executed whole"
        );
    }

    let mut top: Vec<(u64, f64)> = fold.distribution.iter().collect();
    top.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let top_outcomes = top
        .iter()
        .take(8)
        .map(|&(k, p)| OutcomeInfo {
            bitstring: bitstring(k, fold.distribution.n_bits()),
            probability: p,
        })
        .collect();

    let report = RunReport {
        format_version: 1,
        circuit: CircuitInfo {
            name: circuit.name.clone(),
            n_qubits: circuit.n_qubits(),
            unitary_gates: circuit.unitary_gate_count(),
            depth: circuit.depth(),
        },
        config: ConfigInfo {
            backend: backend.name(),
            threshold: args.threshold,
            k: args.k,
            max_depth: args.max_depth,
            shots: ctx.shots,
            seed: ctx.seed,
            noise: NoiseInfo {
                p1: ctx.noise.p1,
                p2: ctx.noise.p2,
                p_idle: ctx.noise.p_idle,
                p_ro: ctx.noise.p_ro,
                seed: ctx.noise.seed,
            },
        },
        tree: TreeInfo {
            nodes: tree.len(),
            leaves: tree.n_leaves(),
            depth: tree.depth(),
            unsplittable_leaves,
            root_predicted_error: tree.root().predicted_error,
            predictor_cache_entries: predictor.cached_len(),
            node_summaries: node_summaries(&tree),
        },
        leaves: leaf_infos(&tree, backend, ctx.shots, &ctx.noise),
        reconstruction: ReconInfo {
            runs_executed: fold.runs_executed,
            max_fragment_qubits: fold.max_fragment_qubits,
            clipped_mass: fold.clipped_mass,
            renormalizations: fold.renormalizations,
            ran_unsplittable: fold.ran_unsplittable,
        },
        reference: fold.reference.clone(),
        top_outcomes,
    };

    let dir = ctx.out_dir_or_default();
    let plan_path = out_path(&dir, "plan.json")?;
    write_text(&plan_path, &to_json_pretty(&tree.to_plan())?)?;
    let dist_path = out_path(&dir, "distribution.csv")?;
    write_text(&dist_path, &distribution_csv(&fold.distribution))?;
    let report_path = out_path(&dir, "report.json")?;
    write_text(&report_path, &to_json_pretty(&report)?)?;
    let timings = Timings {
        started_unix_ms,
        load_s,
        fragment_s,
        execute_s,
        total_s: t_total.elapsed().as_secs_f64(),
    };
    let timings_path = out_path(&dir, "timings.json")?;
    write_text(&timings_path, &to_json_pretty(&timings)?)?;

    println!(
        "predicted root error {:.3}% (threshold {}%) -> {} nodes, {} leaves, depth {}",
        report.tree.root_predicted_error,
        args.threshold,
        tree.len(),
        tree.n_leaves(),
        tree.depth()
    );
    println!(
        "executed {} fragment runs (widest {} qubits) on the {} backend",
        fold.runs_executed, fold.max_fragment_qubits, backend.name()
    );
    if let Some(r) = &fold.reference {
        println!(
            "vs exact reference: mean |err| {:.4}%, Hellinger fidelity {:.4}",
            r.mean_error, r.hellinger_fidelity
        );
    }
    println!("outputs -> {}", dir.display());
    Ok(())
}
