//! `qfrag cut` — plan recursive wire cuts without executing anything.

use qfrag_core::fragment::{fragment_recursively, FragmentationTree, NodeKind};
use qfrag_core::learn::MemoizedPredictor;

use crate::common::{load_circuit, load_model_file, out_path, to_json_pretty, write_text};
use crate::error::CliError;
use crate::{Ctx, CutArgs};

/// One line per tree node, indented by depth.
pub fn render_tree(tree: &FragmentationTree<f64>) -> String {
    let mut out = String::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        let indent = "  ".repeat(node.depth);
        let name = node.circuit.name.as_deref().unwrap_or("-");
        let head = format!(
            "{indent}[{id}] {name}: {} qubits, {} gates, predicted {:.3}%",
            node.circuit.n_qubits(),
            node.circuit.unitary_gate_count(),
            node.predicted_error
        );
        out.push_str(&head);
        match &node.kind {
            NodeKind::Leaf { unsplittable } => {
                out.push_str(if *unsplittable {
                    " — leaf (unsplittable: still above threshold)\n"
                } else {
                    " — leaf\n"
                });
            }
            NodeKind::Split { cut, .. } => {
                out.push_str(&format!(
                    " — split {} (fragment errors {:.3} / {:.3}, distance {:.3})\n",
                    cut.candidate.label(),
                    cut.e_p1,
                    cut.e_p2,
                    cut.distance
                ));
            }
        }
    }
    out
}

pub fn run(args: CutArgs, ctx: &Ctx) -> Result<(), CliError> {
    let circuit = load_circuit(&args.circuit)?;
    let model = load_model_file(&args.model)?;
    let mut predictor = MemoizedPredictor::new(&model);
    let tree = fragment_recursively(
        &circuit,
        &mut predictor,
        args.threshold,
        args.k,
        args.max_depth,
    )?;

    let plan_path = match &args.plan_out {
        Some(p) => p.clone(),
        None => out_path(&ctx.out_dir_or_default(), "plan.json")?,
    };
    write_text(&plan_path, &to_json_pretty(&tree.to_plan())?)?;

    print!("{}", render_tree(&tree));
    println!(
        "{} nodes, {} leaves, depth {}, {} distinct fragment shapes predicted",
        tree.len(),
        tree.n_leaves(),
        tree.depth(),
        predictor.cached_len()
    );
    println!("plan -> {}", plan_path.display());
    Ok(())
}
