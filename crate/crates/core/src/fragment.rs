//! Cut enumeration under the cut-size budget K, error-balanced binary cut
//! selection, and the recursive threshold-driven fragmentation tree.
//!
//! A circuit is modeled as its gate DAG: unitary gates are vertices and two
//! gates share an edge when they act consecutively on the same wire. A cut
//! candidate severs wire segments so the DAG falls apart into exactly two
//! weakly connected components with every severed wire flowing from the
//! earlier fragment (upstream) into the later one (downstream). Each severed
//! live wire costs one unit of the budget K; an already-disconnected gate
//! group can instead be peeled off through a single pristine cut point
//! (position −1) on one of its wires, which severs no entanglement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{emit_qasm, Gate, QuantumCircuit, WireCutPoint};
use crate::learn::{ErrorPredictor, LearnError};
use crate::real::{real, Real};

/// Default cut-size budget: at most two severed wires per cut.
pub const DEFAULT_MAX_CUT: usize = 2;

/// Default recursion bound for [`fragment_recursively`]. Reconstruction cost
/// grows geometrically with nesting depth, so the tree is kept shallow.
pub const DEFAULT_MAX_DEPTH: usize = 8;

/// On-disk fragmentation-plan format version.
pub const PLAN_FORMAT_VERSION: u32 = 1;

/// Errors from cut selection and tree construction.
#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("threshold must lie in (0, 100], got {0}")]
    InvalidThreshold(f64),
    #[error("no cut candidates to select from")]
    NoCandidates,
    #[error(transparent)]
    Predictor(#[from] LearnError),
}

/// Wire renaming tables for one cut: original wire index → fragment-local
/// wire index, one table per fragment. A wire appears in both tables exactly
/// when it is severed by an interior cut point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMaps {
    pub upstream: BTreeMap<usize, usize>,
    pub downstream: BTreeMap<usize, usize>,
}

/// One valid bipartition of a circuit.
///
/// `upstream` holds the gates feeding the cut, `downstream` the gates fed by
/// it; both are rebuilt on compact local wire registers described by
/// `wire_maps`. `d` is the larger fragment width (wires, cut wires included):
/// the qubit count a simulator needs for the worse fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutCandidate {
    pub cut_points: Vec<WireCutPoint>,
    pub upstream: QuantumCircuit,
    pub downstream: QuantumCircuit,
    pub wire_maps: WireMaps,
    pub d: usize,
}

impl CutCandidate {
    /// Original wires severed by interior points, sorted. These are the wires
    /// that carry quantum state across the cut; pristine points contribute
    /// nothing here.
    pub fn interior_cut_wires(&self) -> Vec<usize> {
        self.cut_points
            .iter()
            .filter(|p| !p.is_pristine())
            .map(|p| p.qubit)
            .collect()
    }

    /// Original qubits the upstream fragment touches.
    pub fn upstream_qubits(&self) -> BTreeSet<usize> {
        self.wire_maps.upstream.keys().copied().collect()
    }

    /// Original qubits the downstream fragment touches.
    pub fn downstream_qubits(&self) -> BTreeSet<usize> {
        self.wire_maps.downstream.keys().copied().collect()
    }

    /// Qubit-set notation for reports, e.g. `{q0,q1,q2};{q2,q3,q4}`.
    pub fn label(&self) -> String {
        let side = |qs: &BTreeSet<usize>| {
            let names: Vec<String> = qs.iter().map(|q| format!("q{q}")).collect();
            format!("{{{}}}", names.join(","))
        };
        format!(
            "{};{}",
            side(&self.upstream_qubits()),
            side(&self.downstream_qubits())
        )
    }
}

/// A candidate together with the predicted error of each fragment and their
/// absolute difference, the quantity the selector minimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCut<T> {
    pub candidate: CutCandidate,
    pub e_p1: T,
    pub e_p2: T,
    pub distance: T,
}

// ---------------------------------------------------------------------------
// Cut enumeration.

/// Union-find over gate vertices.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Static view of a pseudo-op-free circuit used while testing candidates.
struct CutContext<'a> {
    gates: &'a [Gate],
    /// Ordered gate indices per touched wire.
    on_wire: BTreeMap<usize, Vec<usize>>,
}

impl<'a> CutContext<'a> {
    fn new(gates: &'a [Gate]) -> Self {
        let mut on_wire: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, g) in gates.iter().enumerate() {
            for &q in &g.qubits {
                on_wire.entry(q).or_default().push(i);
            }
        }
        CutContext { gates, on_wire }
    }

    /// Every place a cut point may sit: one pristine point per touched wire
    /// plus every interior position, sorted by `(qubit, position)`.
    fn point_pool(&self) -> Vec<WireCutPoint> {
        let mut pool = Vec::new();
        for (&q, chain) in &self.on_wire {
            pool.push(WireCutPoint::pristine(q));
            for &g in chain.iter().take(chain.len() - 1) {
                pool.push(WireCutPoint::interior(q, g));
            }
        }
        pool
    }

    /// Tests one point set. Returns the (upstream, downstream) gate indices
    /// when the set is a valid cut, `None` otherwise.
    ///
    /// Valid means: severing the interior points' wire segments leaves
    /// exactly two weakly connected components; every severed segment leaves
    /// the component holding the gate before it and enters the other one (no
    /// cyclic dependence); pristine points pull the component holding their
    /// wire downstream; and no point is redundant (a pristine point whose
    /// component is already pulled downstream by another point adds nothing
    /// and is rejected so candidate lists stay free of duplicates).
    fn bipartition(&self, points: &[WireCutPoint]) -> Option<(Vec<usize>, Vec<usize>)> {
        // A pristine point never separates anything by itself, so it is
        // redundant the moment any other point is present (the other point
        // already seeds the sole downstream component).
        if points.len() > 1 && points.iter().any(|p| p.is_pristine()) {
            return None;
        }

        // Severed segments are keyed by wire as well: two gates can share
        // several wires, and cutting one of those parallel segments must not
        // sever the others.
        let mut severed: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        for p in points {
            if let Some(pos) = p.gate_position() {
                let chain = self.on_wire.get(&p.qubit)?;
                let at = chain.iter().position(|&g| g == pos)?;
                let next = *chain.get(at + 1)?;
                severed.insert((p.qubit, pos, next));
            } else if !self.on_wire.contains_key(&p.qubit) {
                return None; // pristine point on an untouched wire
            }
        }

        let mut dsu = Dsu::new(self.gates.len());
        for (&q, chain) in &self.on_wire {
            for pair in chain.windows(2) {
                if !severed.contains(&(q, pair[0], pair[1])) {
                    dsu.union(pair[0], pair[1]);
                }
            }
        }

        let roots: BTreeSet<usize> = (0..self.gates.len()).map(|g| dsu.find(g)).collect();
        if roots.len() != 2 {
            return None;
        }

        let mut down_seeds = BTreeSet::new();
        let mut up_seeds = BTreeSet::new();
        for p in points {
            if let Some(pos) = p.gate_position() {
                let chain = &self.on_wire[&p.qubit];
                let at = chain.iter().position(|&g| g == pos).expect("checked above");
                up_seeds.insert(dsu.find(pos));
                down_seeds.insert(dsu.find(chain[at + 1]));
            } else {
                down_seeds.insert(dsu.find(self.on_wire[&p.qubit][0]));
            }
        }
        // Every severed segment must flow into the same component, and none
        // may loop back out of it.
        if down_seeds.len() != 1 || !up_seeds.is_disjoint(&down_seeds) {
            return None;
        }
        let down_root = *down_seeds.iter().next().expect("one seed");
        let up_root = *roots.iter().find(|&&r| r != down_root).expect("two roots");
        if !up_seeds.is_empty() && up_seeds != BTreeSet::from([up_root]) {
            return None;
        }

        let mut upstream = Vec::new();
        let mut downstream = Vec::new();
        for g in 0..self.gates.len() {
            if dsu.find(g) == up_root {
                upstream.push(g);
            } else {
                downstream.push(g);
            }
        }
        Some((upstream, downstream))
    }

    /// Rebuilds one side of a bipartition on a compact wire register.
    fn materialize_side(
        &self,
        gate_ids: &[usize],
        name: String,
    ) -> (QuantumCircuit, BTreeMap<usize, usize>) {
        let wires: BTreeSet<usize> = gate_ids
            .iter()
            .flat_map(|&g| self.gates[g].qubits.iter().copied())
            .collect();
        let map: BTreeMap<usize, usize> = wires.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let gates = gate_ids
            .iter()
            .map(|&g| {
                let src = &self.gates[g];
                Gate::new(
                    src.kind,
                    src.qubits.iter().map(|q| map[q]).collect(),
                    src.params.clone(),
                )
                .expect("remapped gate stays well-formed")
            })
            .collect();
        let mut circuit = QuantumCircuit::from_gates(wires.len(), gates)
            .expect("fragment wires are compact by construction");
        circuit.name = Some(name);
        (circuit, map)
    }
}

/// Lists every valid cut of at most `k` points, materialized into fragment
/// circuits, in lexicographic order of their cut-point sets. Candidates that
/// would produce an identical gate bipartition (several pristine points can
/// address the same disconnected group) are reported once, under their
/// lexicographically first point set. Returns an empty list when the circuit
/// admits no valid cut.
pub fn enumerate_cuts(circuit: &QuantumCircuit, k: usize) -> Vec<CutCandidate> {
    assert!(k >= 1, "cut-size budget K must be at least 1");
    let clean = circuit.strip_pseudo();
    let gates = clean.gates();
    if gates.is_empty() {
        return Vec::new();
    }
    let ctx = CutContext::new(gates);
    let pool = ctx.point_pool();
    let base = circuit.name.clone().unwrap_or_else(|| "fragment".to_string());

    let mut out = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut current: Vec<WireCutPoint> = Vec::new();
    subsets_lex(&pool, k, 0, &mut current, &mut |points| {
        let Some((up_ids, down_ids)) = ctx.bipartition(points) else {
            return;
        };
        if !seen.insert(up_ids.clone()) {
            return;
        }
        let (upstream, up_map) = ctx.materialize_side(&up_ids, format!("{base}.1"));
        let (downstream, down_map) = ctx.materialize_side(&down_ids, format!("{base}.2"));
        let d = upstream.n_qubits().max(downstream.n_qubits());
        out.push(CutCandidate {
            cut_points: points.to_vec(),
            upstream,
            downstream,
            wire_maps: WireMaps {
                upstream: up_map,
                downstream: down_map,
            },
            d,
        });
    });
    out
}

/// Visits every nonempty subset of `pool` with at most `k` elements, in
/// lexicographic order of the index vectors (depth-first, extending to the
/// right), which is lexicographic order of the point vectors because the
/// pool is sorted.
fn subsets_lex(
    pool: &[WireCutPoint],
    k: usize,
    start: usize,
    current: &mut Vec<WireCutPoint>,
    visit: &mut impl FnMut(&[WireCutPoint]),
) {
    for i in start..pool.len() {
        current.push(pool[i]);
        visit(current);
        if current.len() < k {
            subsets_lex(pool, k, i + 1, current, visit);
        }
        current.pop();
    }
}

// ---------------------------------------------------------------------------
// Cut selection.

/// Predicts both fragments of every candidate and records the absolute
/// difference of the two predictions.
pub fn score_cuts<T, P>(
    candidates: &[CutCandidate],
    predictor: &mut P,
) -> Result<Vec<ScoredCut<T>>, FragmentError>
where
    T: Real,
    P: ErrorPredictor<T> + ?Sized,
{
    candidates
        .iter()
        .map(|c| {
            let e_p1 = predictor.predict_error(&c.upstream)?;
            let e_p2 = predictor.predict_error(&c.downstream)?;
            Ok(ScoredCut {
                candidate: c.clone(),
                e_p1,
                e_p2,
                distance: (e_p1 - e_p2).abs(),
            })
        })
        .collect()
}

/// Index of the best cut among the scored candidates: minimum distance, ties
/// broken by the lower max fragment error, then by the lower index.
fn best_scored_index<T: Real>(scored: &[ScoredCut<T>]) -> Option<usize> {
    let worse_error = |s: &ScoredCut<T>| s.e_p1.max(s.e_p2);
    let mut best: Option<usize> = None;
    for (i, s) in scored.iter().enumerate() {
        let better = match best {
            None => true,
            Some(j) => {
                s.distance < scored[j].distance
                    || (s.distance == scored[j].distance
                        && worse_error(s) < worse_error(&scored[j]))
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Picks the candidate whose fragments have the most balanced predicted
/// errors: minimum |e_p1 − e_p2|, ties broken by the lower max(e_p1, e_p2),
/// then by the lower candidate index. Returns the index into `candidates`.
pub fn select_cut<T, P>(
    candidates: &[CutCandidate],
    predictor: &mut P,
) -> Result<usize, FragmentError>
where
    T: Real,
    P: ErrorPredictor<T> + ?Sized,
{
    let scored = score_cuts(candidates, predictor)?;
    best_scored_index(&scored).ok_or(FragmentError::NoCandidates)
}

// ---------------------------------------------------------------------------
// Recursive fragmentation.

/// What a tree node is: a terminal fragment or a split into two children.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind<T> {
    /// Terminal fragment. `unsplittable` is set when the node still exceeds
    /// the threshold but no valid cut exists within budget or the depth
    /// limit was reached — it is never silently accepted as good.
    Leaf { unsplittable: bool },
    /// Fragmented node: `cut` is the chosen scored candidate and the two
    /// indices point at the child nodes holding its fragments.
    Split {
        cut: ScoredCut<T>,
        upstream: usize,
        downstream: usize,
    },
}

/// One node of a [`FragmentationTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct FragNode<T> {
    pub circuit: QuantumCircuit,
    pub predicted_error: T,
    pub depth: usize,
    pub kind: NodeKind<T>,
}

impl<T> FragNode<T> {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn is_unsplittable(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { unsplittable: true })
    }
}

/// Binary fragmentation tree stored as an arena; node 0 is the root, and
/// every internal node's children hold exactly its chosen cut's fragments.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentationTree<T> {
    nodes: Vec<FragNode<T>>,
}

/// Arena index of the root node.
pub const ROOT_NODE: usize = 0;

impl<T: Real> FragmentationTree<T> {
    pub fn nodes(&self) -> &[FragNode<T>] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &FragNode<T> {
        &self.nodes[id]
    }

    pub fn root(&self) -> &FragNode<T> {
        &self.nodes[ROOT_NODE]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Arena indices of all terminal fragments, in arena order.
    pub fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_leaf())
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Depth of the deepest node.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// True when any terminal fragment still exceeds the threshold.
    pub fn has_unsplittable_leaves(&self) -> bool {
        self.nodes.iter().any(|n| n.is_unsplittable())
    }

    /// Serializable mirror of the tree (always double precision).
    pub fn to_plan(&self) -> PlanDoc {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let (kind, unsplittable, cut, children) = match &n.kind {
                    NodeKind::Leaf { unsplittable } => {
                        ("leaf".to_string(), Some(*unsplittable), None, None)
                    }
                    NodeKind::Split {
                        cut,
                        upstream,
                        downstream,
                    } => (
                        "split".to_string(),
                        None,
                        Some(PlanCut {
                            cut_points: cut.candidate.cut_points.clone(),
                            wire_maps: cut.candidate.wire_maps.clone(),
                            upstream_qubits: cut.candidate.upstream_qubits().into_iter().collect(),
                            downstream_qubits: cut
                                .candidate
                                .downstream_qubits()
                                .into_iter()
                                .collect(),
                            label: cut.candidate.label(),
                            d: cut.candidate.d,
                            e_p1: cut.e_p1.to_f64().unwrap_or(f64::NAN),
                            e_p2: cut.e_p2.to_f64().unwrap_or(f64::NAN),
                            distance: cut.distance.to_f64().unwrap_or(f64::NAN),
                        }),
                        Some([*upstream, *downstream]),
                    ),
                };
                PlanNode {
                    id: 0, // filled below
                    depth: n.depth,
                    name: n.circuit.name.clone(),
                    n_qubits: n.circuit.n_qubits(),
                    qasm: emit_qasm(&n.circuit),
                    predicted_error: n.predicted_error.to_f64().unwrap_or(f64::NAN),
                    kind,
                    unsplittable,
                    cut,
                    children,
                }
            })
            .enumerate()
            .map(|(id, mut node)| {
                node.id = id;
                node
            })
            .collect();
        PlanDoc {
            format_version: PLAN_FORMAT_VERSION,
            nodes,
        }
    }
}

/// Serializable fragmentation plan: every node with its fragment circuit
/// inlined as QASM, the chosen cut points, and the predicted errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub format_version: u32,
    pub nodes: Vec<PlanNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    pub id: usize,
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub qasm: String,
    pub predicted_error: f64,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unsplittable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut: Option<PlanCut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub children: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCut {
    pub cut_points: Vec<WireCutPoint>,
    pub wire_maps: WireMaps,
    pub upstream_qubits: Vec<usize>,
    pub downstream_qubits: Vec<usize>,
    pub label: String,
    pub d: usize,
    pub e_p1: f64,
    pub e_p2: f64,
    pub distance: f64,
}

/// Recursively fragments a circuit until every terminal fragment's predicted
/// error is at or below `threshold` (a percentage in (0, 100]) or no further
/// progress is possible.
///
/// The root's error is predicted first; a node at or below the threshold
/// becomes a plain leaf. Otherwise the best cut among [`enumerate_cuts`] is
/// chosen via the balanced-error rule and both fragments recurse, reusing
/// the scored predictions as the children's predicted errors. A node that
/// exceeds the threshold but has no valid cut, or sits at `max_depth`,
/// becomes a leaf explicitly flagged unsplittable.
pub fn fragment_recursively<T, P>(
    circuit: &QuantumCircuit,
    predictor: &mut P,
    threshold: T,
    k: usize,
    max_depth: usize,
) -> Result<FragmentationTree<T>, FragmentError>
where
    T: Real,
    P: ErrorPredictor<T> + ?Sized,
{
    if !(threshold > T::zero() && threshold <= real::<T>(100.0)) {
        return Err(FragmentError::InvalidThreshold(
            threshold.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let mut nodes = Vec::new();
    let predicted = predictor.predict_error(circuit)?;
    grow(
        &mut nodes, circuit, predicted, 0, predictor, threshold, k, max_depth,
    )?;
    Ok(FragmentationTree { nodes })
}

#[allow(clippy::too_many_arguments)]
fn grow<T, P>(
    nodes: &mut Vec<FragNode<T>>,
    circuit: &QuantumCircuit,
    predicted: T,
    depth: usize,
    predictor: &mut P,
    threshold: T,
    k: usize,
    max_depth: usize,
) -> Result<usize, FragmentError>
where
    T: Real,
    P: ErrorPredictor<T> + ?Sized,
{
    let id = nodes.len();
    nodes.push(FragNode {
        circuit: circuit.clone(),
        predicted_error: predicted,
        depth,
        kind: NodeKind::Leaf {
            unsplittable: false,
        },
    });
    if predicted <= threshold {
        return Ok(id);
    }
    if depth >= max_depth {
        nodes[id].kind = NodeKind::Leaf { unsplittable: true };
        return Ok(id);
    }
    let candidates = enumerate_cuts(circuit, k);
    if candidates.is_empty() {
        nodes[id].kind = NodeKind::Leaf { unsplittable: true };
        return Ok(id);
    }
    let mut scored = score_cuts(&candidates, predictor)?;
    let best = best_scored_index(&scored).expect("nonempty candidate list");
    let chosen = scored.swap_remove(best);
    let upstream = grow(
        nodes,
        &chosen.candidate.upstream,
        chosen.e_p1,
        depth + 1,
        predictor,
        threshold,
        k,
        max_depth,
    )?;
    let downstream = grow(
        nodes,
        &chosen.candidate.downstream,
        chosen.e_p2,
        depth + 1,
        predictor,
        threshold,
        k,
        max_depth,
    )?;
    nodes[id].kind = NodeKind::Split {
        cut: chosen,
        upstream,
        downstream,
    };
    Ok(id)
}
