//! Classical reconstruction of a cut circuit's output distribution.
//!
//! A severed wire is bridged classically through the Pauli eigenbasis: the
//! identity
//!
//! ```text
//! ρ = ½[Tr(Iρ)+Tr(Zρ)−Tr(Xρ)−Tr(Yρ)]·|0⟩⟨0|
//!   + ½[Tr(Iρ)−Tr(Zρ)−Tr(Xρ)−Tr(Yρ)]·|1⟩⟨1|
//!   + Tr(Xρ)·|+⟩⟨+| + Tr(Yρ)·|+i⟩⟨+i|
//! ```
//!
//! lets the upstream fragment report trace terms (measured in the Z, X and Y
//! bases) and the downstream fragment run once per eigenstate preparation
//! (|0⟩, |1⟩, |+⟩, |+i⟩). Expanding the bracketed weights gives ten
//! (observable, preparation, coefficient) terms per severed wire; several
//! wires multiply out term-by-term. Summing coefficient × signed upstream
//! marginal × downstream distribution over all terms reproduces the uncut
//! circuit's joint output distribution exactly in the no-noise limit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::QuantumCircuit;
use crate::fragment::{CutCandidate, FragmentationTree, NodeKind, ROOT_NODE};
use crate::metrics::{error_report, ErrorReport, MetricsError};
use crate::real::{real, Real};
use crate::sim::{
    mix_seed, simulate_ideal, simulate_with_mode, CutBoundarySpec, ExecMode, InitState,
    MeasureBasis, OutcomeDistribution, SimError, SimOptions, SplitDistribution,
};

/// Negative reconstructed probabilities are clipped to zero; masses below
/// this threshold are expected numerical dust, larger ones indicate shot
/// noise (reported either way via `clipped_mass`).
pub const CLIP_REPORT_TOLERANCE: f64 = 1e-9;

/// The reconstructed distribution is renormalized when its total mass
/// deviates from one by more than this.
pub const RENORM_TOLERANCE: f64 = 1e-9;

/// Reconstruction failures.
#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("fragment runs do not match the cut: {0}")]
    RunMismatch(String),
}

/// Single-wire observable whose expectation the upstream fragment reports.
/// `I` needs no run of its own: it is the unsigned marginal of the Z run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliObservable {
    I,
    Z,
    X,
    Y,
}

impl PauliObservable {
    /// The measurement basis whose run supplies this observable's marginal.
    pub fn basis(self) -> MeasureBasis {
        match self {
            PauliObservable::I | PauliObservable::Z => MeasureBasis::Z,
            PauliObservable::X => MeasureBasis::X,
            PauliObservable::Y => MeasureBasis::Y,
        }
    }

    /// Whether outcome bits flip the sign of the marginal ((−1)^bit); the
    /// identity observable sums its marginal unsigned.
    pub fn signed(self) -> bool {
        !matches!(self, PauliObservable::I)
    }
}

/// The ten (observable, preparation, coefficient) terms that bridge one
/// severed wire, obtained by expanding the eigenbasis identity above.
pub const SINGLE_WIRE_TERMS: [(PauliObservable, InitState, f64); 10] = [
    (PauliObservable::I, InitState::Zero, 0.5),
    (PauliObservable::Z, InitState::Zero, 0.5),
    (PauliObservable::X, InitState::Zero, -0.5),
    (PauliObservable::Y, InitState::Zero, -0.5),
    (PauliObservable::I, InitState::One, 0.5),
    (PauliObservable::Z, InitState::One, -0.5),
    (PauliObservable::X, InitState::One, -0.5),
    (PauliObservable::Y, InitState::One, -0.5),
    (PauliObservable::X, InitState::Plus, 1.0),
    (PauliObservable::Y, InitState::PlusI, 1.0),
];

/// One reconstruction term over every severed wire of a cut: position `j` of
/// each vector addresses the j-th severed wire in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term<T> {
    pub observables: Vec<PauliObservable>,
    pub inits: Vec<InitState>,
    pub coefficient: T,
}

/// The full term table for a cut of `n_wires` severed wires: the n-fold
/// product of the single-wire terms, 10^n entries in lexicographic order of
/// the single-wire indices. Zero severed wires yield the single trivial term
/// (coefficient one), which makes disconnected fragments combine as a plain
/// tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct TermTable<T> {
    n_wires: usize,
    terms: Vec<Term<T>>,
}

impl<T: Real> TermTable<T> {
    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Builds the term table for `n_wires` severed wires (10^n terms — keep cuts
/// small; the default budget K ≤ 2 gives at most 100).
pub fn build_term_table<T: Real>(n_wires: usize) -> TermTable<T> {
    let mut terms = vec![Term {
        observables: Vec::new(),
        inits: Vec::new(),
        coefficient: T::one(),
    }];
    for _ in 0..n_wires {
        let mut next = Vec::with_capacity(terms.len() * SINGLE_WIRE_TERMS.len());
        for t in &terms {
            for &(obs, init, c) in &SINGLE_WIRE_TERMS {
                let mut observables = t.observables.clone();
                let mut inits = t.inits.clone();
                observables.push(obs);
                inits.push(init);
                next.push(Term {
                    observables,
                    inits,
                    coefficient: t.coefficient * real::<T>(c),
                });
            }
        }
        terms = next;
    }
    TermTable { n_wires, terms }
}

/// Product of (−1)^bit over the signed observables: bit `j` of `cut_key` is
/// the measured value of the j-th severed wire.
fn term_sign<T: Real>(observables: &[PauliObservable], cut_key: u64) -> T {
    let mut sign = T::one();
    for (j, obs) in observables.iter().enumerate() {
        if obs.signed() && (cut_key >> j) & 1 == 1 {
            sign = -sign;
        }
    }
    sign
}

// ---------------------------------------------------------------------------
// Fragment execution.

/// Executions of one fragment under every boundary combination its severed
/// wires require: each preparation assignment of the incoming wires crossed
/// with each basis assignment of the outgoing wires — 4^in × 3^out runs
/// (3^out for a pure upstream fragment, 4^in for a pure downstream one).
#[derive(Debug, Clone)]
pub struct FragmentRunSet<T> {
    incoming: Vec<usize>,
    outgoing: Vec<usize>,
    runs: BTreeMap<(Vec<InitState>, Vec<MeasureBasis>), SplitDistribution<T>>,
}

impl<T: Real> FragmentRunSet<T> {
    /// Fragment-local wires re-initialized at the start (ascending).
    pub fn incoming(&self) -> &[usize] {
        &self.incoming
    }

    /// Fragment-local wires basis-measured at the end (ascending).
    pub fn outgoing(&self) -> &[usize] {
        &self.outgoing
    }

    pub fn n_runs(&self) -> usize {
        self.runs.len()
    }

    /// The run executed under the given boundary assignment (`inits` aligned
    /// with `incoming`, `bases` with `outgoing`).
    pub fn run(&self, inits: &[InitState], bases: &[MeasureBasis]) -> Option<&SplitDistribution<T>> {
        self.runs.get(&(inits.to_vec(), bases.to_vec()))
    }
}

/// Every assignment of `values` to `len` slots, in lexicographic order.
fn assignments<V: Copy>(values: &[V], len: usize) -> Vec<Vec<V>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for stem in &out {
            for &v in values {
                let mut a = stem.clone();
                a.push(v);
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// In shot mode, gives every run its own derived noise stream so boundary
/// variants sample independently while staying reproducible.
fn per_run_mode<T: Real>(mode: &ExecMode<T>, ordinal: u64) -> ExecMode<T> {
    match mode {
        ExecMode::Exact => ExecMode::Exact,
        ExecMode::Shots { shots, noise } => ExecMode::Shots {
            shots: *shots,
            noise: noise.clone().with_seed(mix_seed(noise.seed, ordinal)),
        },
    }
}

/// Runs `circuit` under every boundary combination for the given incoming
/// (re-initialized) and outgoing (basis-measured) fragment-local wires.
/// Results are keyed by the boundary assignment, with each joint
/// distribution split into (ordinary output bits, severed-wire bits).
pub fn execute_fragment_runs<T: Real>(
    circuit: &QuantumCircuit,
    incoming: &[usize],
    outgoing: &[usize],
    mode: &ExecMode<T>,
    opts: &SimOptions,
) -> Result<FragmentRunSet<T>, ReconstructError> {
    let mut incoming = incoming.to_vec();
    incoming.sort_unstable();
    incoming.dedup();
    let mut outgoing = outgoing.to_vec();
    outgoing.sort_unstable();
    outgoing.dedup();

    let init_values = [InitState::Zero, InitState::One, InitState::Plus, InitState::PlusI];
    let basis_values = [MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y];
    let mut runs = BTreeMap::new();
    let mut ordinal = 0u64;
    for init_combo in assignments(&init_values, incoming.len()) {
        for basis_combo in assignments(&basis_values, outgoing.len()) {
            let boundary = CutBoundarySpec {
                init_states: incoming.iter().copied().zip(init_combo.iter().copied()).collect(),
                measure_bases: outgoing.iter().copied().zip(basis_combo.iter().copied()).collect(),
            };
            let run_mode = per_run_mode(mode, ordinal);
            ordinal += 1;
            let joint = simulate_with_mode(circuit, &boundary, &run_mode, opts)?;
            let split = SplitDistribution::from_joint(&joint, &outgoing);
            runs.insert((init_combo.clone(), basis_combo), split);
        }
    }
    Ok(FragmentRunSet { incoming, outgoing, runs })
}

// ---------------------------------------------------------------------------
// Combination.

/// A reconstructed distribution plus bookkeeping about the repairs applied
/// to it: the total negative mass clipped away and whether the result needed
/// renormalizing (exact-mode reconstructions need neither beyond numerical
/// dust; shot-mode ones usually need both).
#[derive(Debug, Clone)]
pub struct CombineOutcome<T> {
    pub distribution: OutcomeDistribution<T>,
    pub clipped_mass: T,
    pub renormalized: bool,
}

/// Bit-placement plan for merging fragment outcome keys into a parent key.
struct Placement {
    /// For bit `j` of a fragment outcome key: the parent wire it lands on.
    targets: Vec<usize>,
}

impl Placement {
    /// `locals`: fragment-local wires in key-bit order; `to_parent` maps a
    /// fragment-local wire back to its parent wire.
    fn new(locals: &[usize], to_parent: &BTreeMap<usize, usize>) -> Self {
        Placement {
            targets: locals.iter().map(|l| to_parent[l]).collect(),
        }
    }

    fn place(&self, key: u64) -> u64 {
        self.targets
            .iter()
            .enumerate()
            .map(|(j, &w)| ((key >> j) & 1) << w)
            .sum()
    }
}

fn invert(map: &BTreeMap<usize, usize>) -> BTreeMap<usize, usize> {
    map.iter().map(|(&orig, &local)| (local, orig)).collect()
}

/// Raw signed reconstruction: Σ_terms coefficient × signed upstream marginal
/// × downstream probability, accumulated per parent outcome key. Exposed to
/// tests to check linearity before clipping hides it.
pub(crate) fn combine_terms<T: Real>(
    candidate: &CutCandidate,
    upstream: &FragmentRunSet<T>,
    downstream: &FragmentRunSet<T>,
    table: &TermTable<T>,
) -> Result<BTreeMap<u64, T>, ReconstructError> {
    let cut_wires = candidate.interior_cut_wires();
    if table.n_wires() != cut_wires.len() {
        return Err(ReconstructError::RunMismatch(format!(
            "term table covers {} wires, cut severs {}",
            table.n_wires(),
            cut_wires.len()
        )));
    }
    let up_locals: Vec<usize> = cut_wires
        .iter()
        .map(|q| candidate.wire_maps.upstream[q])
        .collect();
    let down_locals: Vec<usize> = cut_wires
        .iter()
        .map(|q| candidate.wire_maps.downstream[q])
        .collect();
    if upstream.outgoing() != up_locals.as_slice() || downstream.incoming() != down_locals.as_slice()
    {
        return Err(ReconstructError::RunMismatch(
            "run sets were executed for different severed wires".to_string(),
        ));
    }

    let up_inverse = invert(&candidate.wire_maps.upstream);
    let down_inverse = invert(&candidate.wire_maps.downstream);

    let mut acc: BTreeMap<u64, T> = BTreeMap::new();
    let mut placements: Option<(Placement, Placement)> = None;
    for term in table.terms() {
        let bases: Vec<MeasureBasis> = term.observables.iter().map(|o| o.basis()).collect();
        let up_run = upstream.run(&[], &bases).ok_or_else(|| {
            ReconstructError::RunMismatch(format!("missing upstream run for bases {bases:?}"))
        })?;
        let down_run = downstream.run(&term.inits, &[]).ok_or_else(|| {
            ReconstructError::RunMismatch(format!(
                "missing downstream run for preparations {:?}",
                term.inits
            ))
        })?;
        // Upstream output wires never overlap downstream wires (the severed
        // wires are marginalized out here), so each parent bit has exactly
        // one source.
        let (up_place, down_place) = placements.get_or_insert_with(|| {
            (
                Placement::new(&up_run.output_wires, &up_inverse),
                Placement::new(&down_run.output_wires, &down_inverse),
            )
        });

        // Signed marginal over the severed-wire bits of the upstream run.
        let mut marginal: BTreeMap<u64, T> = BTreeMap::new();
        for (&(out_key, cut_key), &p) in &up_run.probs {
            *marginal.entry(out_key).or_insert_with(T::zero) +=
                term_sign::<T>(&term.observables, cut_key) * p;
        }

        for (&out_key, &m) in &marginal {
            if m == T::zero() {
                continue;
            }
            let up_bits = up_place.place(out_key);
            let weight = term.coefficient * m;
            for (&(down_key, _), &q) in &down_run.probs {
                let key = up_bits | down_place.place(down_key);
                *acc.entry(key).or_insert_with(T::zero) += weight * q;
            }
        }
    }
    Ok(acc)
}

/// Clips negative entries (tracking the removed mass) and renormalizes when
/// the total deviates from one by more than [`RENORM_TOLERANCE`].
fn repair<T: Real>(n_bits: usize, raw: BTreeMap<u64, T>) -> CombineOutcome<T> {
    let mut clipped_mass = T::zero();
    let mut kept: Vec<(u64, T)> = Vec::with_capacity(raw.len());
    for (k, p) in raw {
        if p < T::zero() {
            clipped_mass += -p;
        } else {
            kept.push((k, p));
        }
    }
    let sum: T = kept.iter().map(|&(_, p)| p).sum();
    let renormalized = (sum - T::one()).abs() > real::<T>(RENORM_TOLERANCE);
    if renormalized && sum > T::zero() {
        for (_, p) in &mut kept {
            *p /= sum;
        }
    }
    CombineOutcome {
        distribution: OutcomeDistribution::from_probs(n_bits, kept),
        clipped_mass,
        renormalized,
    }
}

/// Combines the two fragments' run sets into the reconstructed distribution
/// over the `n_wires`-wide parent circuit, applying the term table, clipping
/// negative estimates, and renormalizing when shot noise moved the total.
pub fn combine<T: Real>(
    candidate: &CutCandidate,
    n_wires: usize,
    upstream: &FragmentRunSet<T>,
    downstream: &FragmentRunSet<T>,
    table: &TermTable<T>,
) -> Result<CombineOutcome<T>, ReconstructError> {
    let raw = combine_terms(candidate, upstream, downstream, table)?;
    Ok(repair(n_wires, raw))
}

/// Executes both fragments of one cut and combines them: the whole
/// reconstruction pipeline for a single bipartition.
pub fn reconstruct_candidate<T: Real>(
    candidate: &CutCandidate,
    n_wires: usize,
    mode: &ExecMode<T>,
    opts: &SimOptions,
) -> Result<CombineOutcome<T>, ReconstructError> {
    let cut_wires = candidate.interior_cut_wires();
    let up_locals: Vec<usize> = cut_wires
        .iter()
        .map(|q| candidate.wire_maps.upstream[q])
        .collect();
    let down_locals: Vec<usize> = cut_wires
        .iter()
        .map(|q| candidate.wire_maps.downstream[q])
        .collect();
    // Give the two fragments disjoint noise streams.
    let upstream = execute_fragment_runs(
        &candidate.upstream,
        &[],
        &up_locals,
        &per_run_mode(mode, 1),
        opts,
    )?;
    let downstream = execute_fragment_runs(
        &candidate.downstream,
        &down_locals,
        &[],
        &per_run_mode(mode, 2),
        opts,
    )?;
    let table = build_term_table::<T>(cut_wires.len());
    combine(candidate, n_wires, &upstream, &downstream, &table)
}

// ---------------------------------------------------------------------------
// Tree folding.

/// Result of folding a fragmentation tree back together.
#[derive(Debug, Clone)]
pub struct FoldOutcome<T> {
    /// Reconstructed distribution over the root circuit's wires.
    pub distribution: OutcomeDistribution<T>,
    /// Total negative mass clipped across all internal combinations.
    pub clipped_mass: T,
    /// How many internal combinations needed renormalizing.
    pub renormalizations: usize,
    /// True when a leaf that still exceeded the threshold (flagged
    /// unsplittable) had to be executed as-is.
    pub ran_unsplittable: bool,
    /// Distinct fragment executions performed (cache hits excluded).
    pub runs_executed: usize,
    /// Widest fragment actually executed.
    pub max_fragment_qubits: usize,
    /// Reconstruction quality against exact simulation of the root circuit,
    /// when the root is small enough to simulate directly.
    pub reference: Option<ErrorReport<T>>,
}

/// Boundary assignment encoded for cache keys.
type BoundaryKey = (Vec<(usize, u8)>, Vec<(usize, u8)>);

fn boundary_key(
    inits: &BTreeMap<usize, InitState>,
    bases: &BTreeMap<usize, MeasureBasis>,
) -> BoundaryKey {
    let init_code = |v: InitState| match v {
        InitState::Zero => 0u8,
        InitState::One => 1,
        InitState::Plus => 2,
        InitState::PlusI => 3,
    };
    let basis_code = |b: MeasureBasis| match b {
        MeasureBasis::Z => 0u8,
        MeasureBasis::X => 1,
        MeasureBasis::Y => 2,
    };
    (
        inits.iter().map(|(&w, &v)| (w, init_code(v))).collect(),
        bases.iter().map(|(&w, &b)| (w, basis_code(b))).collect(),
    )
}

struct FoldCtx<'a, T> {
    mode: &'a ExecMode<T>,
    opts: &'a SimOptions,
    cache: BTreeMap<(usize, BoundaryKey), OutcomeDistribution<T>>,
    tables: BTreeMap<usize, TermTable<T>>,
    clipped_mass: T,
    renormalizations: usize,
    ran_unsplittable: bool,
    runs_executed: usize,
    max_fragment_qubits: usize,
}

impl<T: Real> FoldCtx<'_, T> {
    fn table(&mut self, n: usize) -> &TermTable<T> {
        self.tables.entry(n).or_insert_with(|| build_term_table(n))
    }
}

/// Folds a fragmentation tree bottom-up into the reconstructed distribution
/// of the root circuit.
///
/// Leaves execute under the boundary conditions imposed by their ancestors'
/// reconstruction terms; every split node sums its term table over both
/// children and repairs the result (clip, renormalize) before handing it
/// up. Unsplittable leaves are executed like any other — the outcome merely
/// flags that they were present. Identical (node, boundary) executions are
/// computed once; in shot mode each distinct execution draws its own derived
/// noise stream.
pub fn fold_tree<T: Real>(
    tree: &FragmentationTree<T>,
    mode: &ExecMode<T>,
    opts: &SimOptions,
) -> Result<FoldOutcome<T>, ReconstructError> {
    let mut ctx = FoldCtx {
        mode,
        opts,
        cache: BTreeMap::new(),
        tables: BTreeMap::new(),
        clipped_mass: T::zero(),
        renormalizations: 0,
        ran_unsplittable: false,
        runs_executed: 0,
        max_fragment_qubits: 0,
    };
    let distribution = fold_node(tree, ROOT_NODE, &BTreeMap::new(), &BTreeMap::new(), &mut ctx)?;
    // Quality reference: exact simulation of the whole root circuit, when it
    // fits the simulator (the very reason to cut is that it may not).
    let reference =
        match simulate_ideal::<T>(&tree.root().circuit, &CutBoundarySpec::none(), opts) {
            Ok(ideal) => Some(error_report(&ideal, &distribution, None)?),
            Err(_) => None,
        };
    Ok(FoldOutcome {
        distribution,
        clipped_mass: ctx.clipped_mass,
        renormalizations: ctx.renormalizations,
        ran_unsplittable: ctx.ran_unsplittable,
        runs_executed: ctx.runs_executed,
        max_fragment_qubits: ctx.max_fragment_qubits,
        reference,
    })
}

fn fold_node<T: Real>(
    tree: &FragmentationTree<T>,
    id: usize,
    inits: &BTreeMap<usize, InitState>,
    bases: &BTreeMap<usize, MeasureBasis>,
    ctx: &mut FoldCtx<'_, T>,
) -> Result<OutcomeDistribution<T>, ReconstructError> {
    let key = (id, boundary_key(inits, bases));
    if let Some(hit) = ctx.cache.get(&key) {
        return Ok(hit.clone());
    }
    let node = tree.node(id);
    let result = match &node.kind {
        NodeKind::Leaf { unsplittable } => {
            if *unsplittable {
                ctx.ran_unsplittable = true;
            }
            let boundary = CutBoundarySpec {
                init_states: inits.clone(),
                measure_bases: bases.clone(),
            };
            let run_mode = per_run_mode(ctx.mode, ctx.runs_executed as u64);
            ctx.runs_executed += 1;
            ctx.max_fragment_qubits = ctx.max_fragment_qubits.max(node.circuit.n_qubits());
            simulate_with_mode(&node.circuit, &boundary, &run_mode, ctx.opts)?
        }
        NodeKind::Split {
            cut,
            upstream,
            downstream,
        } => {
            let cand = &cut.candidate;
            let cut_wires = cand.interior_cut_wires();
            let up_map = &cand.wire_maps.upstream;
            let down_map = &cand.wire_maps.downstream;

            // Route the boundary imposed on this node to the child that owns
            // each wire's relevant end: preparations act at a wire's start
            // (upstream owns the start of a severed wire), basis rotations at
            // its end (downstream owns it).
            let mut up_inits = BTreeMap::new();
            let mut down_inits = BTreeMap::new();
            for (&w, &v) in inits {
                if let Some(&l) = up_map.get(&w) {
                    up_inits.insert(l, v);
                } else {
                    down_inits.insert(down_map[&w], v);
                }
            }
            let mut up_bases = BTreeMap::new();
            let mut down_bases = BTreeMap::new();
            for (&w, &b) in bases {
                if cut_wires.contains(&w) || !up_map.contains_key(&w) {
                    down_bases.insert(down_map[&w], b);
                } else {
                    up_bases.insert(up_map[&w], b);
                }
            }

            let up_cut_locals: Vec<usize> = cut_wires.iter().map(|q| up_map[q]).collect();
            let down_cut_locals: Vec<usize> = cut_wires.iter().map(|q| down_map[q]).collect();
            let up_inverse = invert(up_map);
            let down_inverse = invert(down_map);

            let table = ctx.table(cut_wires.len()).clone();
            let mut acc: BTreeMap<u64, T> = BTreeMap::new();
            let mut placements: Option<(Placement, Placement)> = None;
            for term in table.terms() {
                let mut term_up_bases = up_bases.clone();
                let mut term_down_inits = down_inits.clone();
                for (j, &l) in up_cut_locals.iter().enumerate() {
                    term_up_bases.insert(l, term.observables[j].basis());
                }
                for (j, &l) in down_cut_locals.iter().enumerate() {
                    term_down_inits.insert(l, term.inits[j]);
                }
                let up_joint = fold_node(tree, *upstream, &up_inits, &term_up_bases, ctx)?;
                let down_joint = fold_node(tree, *downstream, &term_down_inits, &down_bases, ctx)?;

                let up_split = SplitDistribution::from_joint(&up_joint, &up_cut_locals);
                let (up_place, down_place) = placements.get_or_insert_with(|| {
                    let down_all: Vec<usize> = (0..down_joint.n_bits()).collect();
                    (
                        Placement::new(&up_split.output_wires, &up_inverse),
                        Placement::new(&down_all, &down_inverse),
                    )
                });

                let mut marginal: BTreeMap<u64, T> = BTreeMap::new();
                for (&(out_key, cut_key), &p) in &up_split.probs {
                    *marginal.entry(out_key).or_insert_with(T::zero) +=
                        term_sign::<T>(&term.observables, cut_key) * p;
                }
                for (&out_key, &m) in &marginal {
                    if m == T::zero() {
                        continue;
                    }
                    let up_bits = up_place.place(out_key);
                    let weight = term.coefficient * m;
                    for (down_key, q) in down_joint.iter() {
                        let key = up_bits | down_place.place(down_key);
                        *acc.entry(key).or_insert_with(T::zero) += weight * q;
                    }
                }
            }

            let repaired = repair(node.circuit.n_qubits(), acc);
            ctx.clipped_mass += repaired.clipped_mass;
            if repaired.renormalized {
                ctx.renormalizations += 1;
            }
            repaired.distribution
        }
    };
    ctx.cache.insert(key, result.clone());
    Ok(result)
}
