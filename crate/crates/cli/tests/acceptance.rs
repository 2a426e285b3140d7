//! Acceptance gate: ten end-to-end checks, one test per check.
//!
//! Each test prints one machine-greppable `ACCEPTANCE NN PASS` line when it
//! succeeds; a failing assertion carries the matching `ACCEPTANCE NN FAIL`
//! line in its panic message. Every check that depends on a numeric claim
//! verifies it against an independent oracle implemented here in test code
//! (normal equations by Gauss-Jordan, a dense projected-gradient QP solver,
//! exhaustive grid argmin, exact-simulation references).

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::Instant;

use qfrag_core::circuit::{emit_qasm, QuantumCircuit, WireCutPoint};
use qfrag_core::fragment::{enumerate_cuts, fragment_recursively, score_cuts, NodeKind};
use qfrag_core::learn::{
    build_dataset, cross_validated_rmse, fit_lasso, fit_linear, fit_svr, grid_search,
    kfold_indices, monomial_exponents, pick_best_exponent, save_model, to_xy, train_test_split,
    DatasetRow, ErrorPredictor, GridSpec, LearnError, ModelParams, SvrParams, SweepPoint,
    TrainedModel,
};
use qfrag_core::metrics::{error_report, mean_abs_error, r_squared};
use qfrag_core::reconstruct::{fold_tree, reconstruct_candidate};
use qfrag_core::sim::{
    mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, ExecMode, OutcomeDistribution,
    SimOptions,
};
use qfrag_core::circuit::FeatureVector;
use qfrag_core::synth::{random_corpus, random_cuttable_corpus};
use qfrag_core::NoiseModel64;

/// Prints the per-criterion PASS line.
fn pass(n: u32, detail: String) {
    println!("ACCEPTANCE {n:02} PASS — {detail}");
}

macro_rules! gate {
    ($n:expr, $cond:expr, $($why:tt)+) => {
        assert!($cond, "ACCEPTANCE {:02} FAIL — {}", $n, format!($($why)+));
    };
}

// ---------------------------------------------------------------------------
// Shared test scaffolding.

/// Deterministic xorshift64* generator so the fixtures need no external RNG.
struct XorShift(u64);

impl XorShift {
    fn new(seed: u64) -> Self {
        XorShift(seed.max(1))
    }
    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Predictor stub that reports the same error for every circuit.
struct ConstantPredictor(f64);

impl ErrorPredictor<f64> for ConstantPredictor {
    fn predict_error(&mut self, _: &QuantumCircuit) -> Result<f64, LearnError> {
        Ok(self.0)
    }
}

/// Predictor stub keyed by unitary gate count, with optional parity
/// defaults for counts not explicitly listed.
struct ByGateCount {
    special: BTreeMap<usize, f64>,
    odd_default: Option<f64>,
    even_default: Option<f64>,
}

impl ErrorPredictor<f64> for ByGateCount {
    fn predict_error(&mut self, c: &QuantumCircuit) -> Result<f64, LearnError> {
        let g = c.unitary_gate_count();
        if let Some(&v) = self.special.get(&g) {
            return Ok(v);
        }
        let fallback = if g % 2 == 1 {
            self.odd_default
        } else {
            self.even_default
        };
        Ok(fallback.unwrap_or_else(|| panic!("no stubbed prediction for a {g}-gate fragment")))
    }
}

/// Synthetic labelled rows with integer features shaped like real circuit
/// features and a smooth deterministic label.
fn synthetic_rows(count: usize, seed: u64, nonlinear: bool) -> Vec<DatasetRow<f64>> {
    let mut rng = XorShift::new(seed);
    (0..count)
        .map(|i| {
            let n_qubits = 2 + rng.below(5);
            let depth = 1 + rng.below(14);
            let mut gate_counts = [0usize; 17];
            for c in gate_counts.iter_mut() {
                *c = rng.below(5);
            }
            let features = FeatureVector {
                n_qubits,
                depth,
                gate_counts,
            };
            let x: Vec<f64> = features.to_floats();
            let mut label = 1.5 + 0.7 * x[0] + 0.32 * x[1];
            for (j, &v) in x[2..].iter().enumerate() {
                label += (0.05 + 0.013 * j as f64) * v;
            }
            if nonlinear {
                label += 1.8 * (0.45 * x[1]).sin() + 0.09 * x[0] * x[1];
            }
            label += 0.25 * ((i as f64) * 0.713).sin();
            DatasetRow {
                features,
                label,
            }
        })
        .collect()
}

/// Finds the enumerated candidate matching a declared cut-point set.
fn declared_candidate<'a>(
    cands: &'a [qfrag_core::fragment::CutCandidate],
    declared: &[WireCutPoint],
) -> Option<&'a qfrag_core::fragment::CutCandidate> {
    let want: BTreeSet<WireCutPoint> = declared.iter().copied().collect();
    cands
        .iter()
        .find(|c| c.cut_points.iter().copied().collect::<BTreeSet<_>>() == want)
}

// ---------------------------------------------------------------------------
// 1. Reconstruction exactness: the central correctness oracle.

#[test]
fn acceptance_01_reconstruction_exactness() {
    const N: u32 = 1;
    let started = Instant::now();
    let corpus = random_cuttable_corpus(100, 3..=6, 8..=14, 0xACC0_0001);
    gate!(N, corpus.len() >= 100, "corpus too small: {}", corpus.len());
    let opts = SimOptions::default();
    let mode = ExecMode::<f64>::Exact;
    let boundary = CutBoundarySpec::none();

    let mut worst_single = 0.0f64;
    let mut worst_nested = 0.0f64;
    let mut two_level_trees = 0usize;
    for (circuit, declared) in &corpus {
        let ideal = simulate_ideal::<f64>(circuit, &boundary, &opts).unwrap();

        // Single split at the declared cut.
        let cands = enumerate_cuts(circuit, 2);
        let cand = declared_candidate(&cands, declared).unwrap_or_else(|| {
            panic!(
                "ACCEPTANCE {N:02} FAIL — declared cut of {:?} missing from enumeration",
                circuit.name
            )
        });
        let single = reconstruct_candidate(cand, circuit.n_qubits(), &mode, &opts).unwrap();
        let tv = single.distribution.total_variation(&ideal).unwrap();
        worst_single = worst_single.max(tv);

        // Nested splits: force every node to split (prediction far above the
        // threshold) down to two levels, then fold the tree back up.
        let mut always_split = ConstantPredictor(100.0);
        let tree = fragment_recursively(circuit, &mut always_split, 50.0, 2, 2).unwrap();
        if tree.depth() == 2 {
            two_level_trees += 1;
        }
        let fold = fold_tree(&tree, &mode, &opts).unwrap();
        let tv_nested = fold.distribution.total_variation(&ideal).unwrap();
        worst_nested = worst_nested.max(tv_nested);
    }

    gate!(
        N,
        worst_single <= 1e-9,
        "worst single-split total variation {worst_single:.3e} above 1e-9"
    );
    gate!(
        N,
        worst_nested <= 1e-9,
        "worst nested-fold total variation {worst_nested:.3e} above 1e-9"
    );
    gate!(
        N,
        two_level_trees >= 20,
        "only {two_level_trees}/100 circuits produced a two-level tree; nesting under-exercised"
    );
    let secs = started.elapsed().as_secs_f64();
    gate!(N, secs < 120.0, "took {secs:.1}s, budget 120s");
    pass(
        N,
        format!(
            "100 circuits reconstruct exactly (worst single {worst_single:.2e}, worst nested {worst_nested:.2e}, {two_level_trees} two-level trees, {secs:.1}s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Coefficient-of-determination convention on the single-point worked
// example.

#[test]
fn acceptance_02_r_squared_worked_example() {
    const N: u32 = 2;
    let r2 = r_squared(&[64.343f64], &[59.210]).unwrap();
    gate!(
        N,
        (r2 - 0.993).abs() <= 0.001,
        "r_squared([64.343],[59.210]) = {r2:.6}, expected 0.993 ± 0.001"
    );
    pass(N, format!("r_squared([64.343],[59.210]) = {r2:.6}"));
}

// ---------------------------------------------------------------------------
// 3. Cut selection on the five stubbed fragment-error pairs.

#[test]
fn acceptance_03_select_cut_fixture() {
    const N: u32 = 3;
    // An 11-gate single-wire chain enumerates ten single-cut candidates with
    // upstream gate counts 1..=10; the first five stand in for the five
    // candidate rows of the fixture.
    let gates: Vec<qfrag_core::circuit::Gate> =
        (0..11).map(|_| qfrag_core::circuit::Gate::h(0)).collect();
    let chain = QuantumCircuit::from_gates(1, gates).unwrap();
    let cands = enumerate_cuts(&chain, 1);
    gate!(N, cands.len() == 10, "expected 10 candidates, got {}", cands.len());
    let five = &cands[..5];
    for (i, c) in five.iter().enumerate() {
        gate!(
            N,
            c.upstream.unitary_gate_count() == i + 1
                && c.downstream.unitary_gate_count() == 10 - i,
            "candidate {i} has unexpected fragment sizes"
        );
    }

    // The five scored pairs; row 2 is the most balanced at |10.05 − 25.99|.
    let special: BTreeMap<usize, f64> = [
        (1, 2.54),
        (10, 46.112),
        (2, 7.51),
        (9, 43.89),
        (3, 10.05),
        (8, 25.99),
        (4, 2.444),
        (7, 46.858),
        (5, 2.444),
        (6, 46.58),
    ]
    .into_iter()
    .collect();
    let mut stub = ByGateCount {
        special,
        odd_default: None,
        even_default: None,
    };
    let scored = score_cuts::<f64, _>(five, &mut stub).unwrap();
    let expected: [(f64, f64); 5] = [
        (2.54, 46.112),
        (7.51, 43.89),
        (10.05, 25.99),
        (2.444, 46.858),
        (2.444, 46.58),
    ];
    for (s, (e1, e2)) in scored.iter().zip(expected) {
        gate!(
            N,
            s.e_p1 == e1 && s.e_p2 == e2,
            "scored pair ({}, {}) does not match fixture ({e1}, {e2})",
            s.e_p1,
            s.e_p2
        );
    }
    let best = (0..scored.len())
        .min_by(|&a, &b| scored[a].distance.partial_cmp(&scored[b].distance).unwrap())
        .unwrap();
    gate!(N, best == 2, "minimum-distance row is {best}, expected 2");
    let chosen = qfrag_core::fragment::select_cut::<f64, _>(five, &mut stub).unwrap();
    gate!(N, chosen == 2, "select_cut chose row {chosen}, expected 2");
    let d = scored[2].distance;
    gate!(
        N,
        (d - 15.94).abs() <= 0.001,
        "selected distance {d:.4}, expected 15.94 ± 0.001"
    );
    pass(N, format!("select_cut picks row 2 with distance {d:.4}"));
}

// ---------------------------------------------------------------------------
// 4. Pipeline structure under the five-qubit stub predictions.

#[test]
fn acceptance_04_single_split_tree_structure() {
    const N: u32 = 4;
    // A 5-qubit, 13-gate circuit with a guaranteed valid cut. An odd total
    // means every bipartition pairs an odd fragment with an even one, so
    // parity defaults keep every non-designated pair at distance > 15.94 and
    // the designated (10.05, 25.99) pair always wins.
    let (circuit, declared) = random_cuttable_corpus(1, 5..=5, 13..=13, 0xACC0_0004)
        .pop()
        .unwrap();
    gate!(N, circuit.unitary_gate_count() == 13, "fixture must have 13 gates");
    let cands = enumerate_cuts(&circuit, 2);
    let target = declared_candidate(&cands, &declared).unwrap();
    let up = target.upstream.unitary_gate_count();
    let down = target.downstream.unitary_gate_count();

    let mut special = BTreeMap::new();
    special.insert(13, 59.210); // the whole circuit
    special.insert(up, 10.05);
    special.insert(down, 25.99);
    let (odd_default, even_default) = if up % 2 == 1 {
        (Some(5.0), Some(45.0))
    } else {
        (Some(45.0), Some(5.0))
    };
    let mut stub = ByGateCount {
        special,
        odd_default,
        even_default,
    };

    let tree = fragment_recursively(&circuit, &mut stub, 50.0, 2, 8).unwrap();
    gate!(
        N,
        tree.len() == 3 && tree.n_leaves() == 2 && tree.depth() == 1,
        "expected one split with two leaves, got {} nodes / {} leaves / depth {}",
        tree.len(),
        tree.n_leaves(),
        tree.depth()
    );
    gate!(
        N,
        tree.root().predicted_error == 59.210,
        "root prediction {} ≠ 59.210",
        tree.root().predicted_error
    );
    let NodeKind::Split { cut, upstream, downstream } = &tree.root().kind else {
        panic!("ACCEPTANCE {N:02} FAIL — root is not a split");
    };
    let mut child_preds = [
        tree.node(*upstream).predicted_error,
        tree.node(*downstream).predicted_error,
    ];
    child_preds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    gate!(
        N,
        child_preds == [10.05, 25.99],
        "leaf predictions {child_preds:?} ≠ [10.05, 25.99]"
    );
    gate!(
        N,
        (cut.distance - 15.94).abs() <= 1e-9,
        "chosen cut distance {} ≠ 15.94",
        cut.distance
    );
    gate!(
        N,
        !tree.node(*upstream).is_unsplittable() && !tree.node(*downstream).is_unsplittable(),
        "leaves below threshold must not be flagged unsplittable"
    );
    pass(
        N,
        format!(
            "59.210 root splits once into ({}, {}) leaves at threshold 50",
            child_preds[0], child_preds[1]
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. Regression implementations against independent numeric oracles.

/// Solves `A x = b` by Gauss-Jordan elimination with partial pivoting.
fn gauss_jordan_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let norm = a[col][col];
        assert!(norm.abs() > 1e-12, "oracle system is singular");
        for v in a[col].iter_mut() {
            *v /= norm;
        }
        b[col] /= norm;
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..n {
                let upd = a[col][k];
                a[row][k] -= factor * upd;
            }
            b[row] -= factor * b[col];
        }
    }
    b
}

/// Ordinary-least-squares oracle: raw normal equations over the monomial
/// design (intercept column first), solved by Gauss-Jordan.
fn ols_oracle(rows: &[DatasetRow<f64>], degree: u32) -> (Vec<f64>, f64) {
    let (xs, ys) = to_xy::<f64>(rows);
    let monomials = monomial_exponents(xs[0].len(), degree);
    let design: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mut row = vec![1.0];
            row.extend(monomials.iter().map(|mono| {
                mono.iter()
                    .enumerate()
                    .map(|(j, &e)| x[j].powi(e as i32))
                    .product::<f64>()
            }));
            row
        })
        .collect();
    let p = design[0].len();
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for r in 0..design.len() {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += design[r][i] * design[r][j];
            }
            b[i] += design[r][i] * ys[r];
        }
    }
    let beta = gauss_jordan_solve(a, b);
    (beta[1..].to_vec(), beta[0])
}

/// Dense QP oracle for the epsilon-tube kernel dual: projected gradient
/// descent over (alpha, alpha*) in [0, C]^{2n} with the balance constraint
/// enforced by exact bisection projection.
fn svr_dual_oracle(kernel: &[Vec<f64>], ys: &[f64], c: f64, eps: f64) -> f64 {
    let n = ys.len();
    let m = 2 * n;
    let lipschitz = 2.0
        * kernel
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
        + 1e-9;
    let step = 1.0 / lipschitz;

    let project = |v: &[f64]| -> Vec<f64> {
        let eval = |lam: f64| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                s += (v[i] - lam).clamp(0.0, c) - (v[n + i] + lam).clamp(0.0, c);
            }
            s
        };
        let bound = 2.0 * c + v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        let mut z = vec![0.0; m];
        for i in 0..n {
            z[i] = (v[i] - lam).clamp(0.0, c);
            z[n + i] = (v[n + i] + lam).clamp(0.0, c);
        }
        z
    };

    // Objective ½ dᵀKd + ε·Σz − yᵀd with d = α − α*, plus its gradient.
    let objective = |z: &[f64]| -> (f64, Vec<f64>) {
        let d: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let kd: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| kernel[i][j] * d[j]).sum())
            .collect();
        let f = 0.5 * d.iter().zip(&kd).map(|(a, b)| a * b).sum::<f64>()
            + eps * z.iter().sum::<f64>()
            - ys.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        let mut g = vec![0.0; m];
        for i in 0..n {
            g[i] = kd[i] + eps - ys[i];
            g[n + i] = -kd[i] + eps + ys[i];
        }
        (f, g)
    };

    let mut z = vec![0.0; m];
    let (mut f_cur, mut g) = objective(&z);
    let mut since_improvement = 0usize;
    for _ in 0..120_000 {
        let moved: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
        let z_next = project(&moved);
        let (f_next, g_next) = objective(&z_next);
        if f_cur - f_next < 1e-13 {
            since_improvement += 1;
            if since_improvement > 500 {
                break;
            }
        } else {
            since_improvement = 0;
        }
        if f_next < f_cur {
            f_cur = f_next;
            z = z_next;
            g = g_next;
        }
    }
    f_cur
}

#[test]
fn acceptance_05_regression_oracles() {
    const N: u32 = 5;
    let started = Instant::now();

    // (a) Least squares vs. the normal-equation oracle.
    let rows = synthetic_rows(48, 0xACC0_0051, false);
    let linear = fit_linear(&rows, 1).unwrap();
    let (oracle_w, oracle_b) = ols_oracle(&rows, 1);
    gate!(
        N,
        linear.weights.len() == oracle_w.len(),
        "coefficient count mismatch"
    );
    let mut worst_ols = (linear.intercept - oracle_b).abs();
    for (w, o) in linear.weights.iter().zip(&oracle_w) {
        worst_ols = worst_ols.max((w - o).abs());
    }
    gate!(
        N,
        worst_ols <= 1e-8,
        "least-squares vs normal-equation oracle: worst coefficient gap {worst_ols:.2e} > 1e-8"
    );

    // (b) Lasso at zero strength reduces to least squares.
    let lasso = fit_lasso(&rows, 0.0, 1).unwrap();
    let mut worst_lasso = (lasso.model.intercept - linear.intercept).abs();
    for (w, o) in lasso.model.weights.iter().zip(&linear.weights) {
        worst_lasso = worst_lasso.max((w - o).abs());
    }
    gate!(
        N,
        worst_lasso <= 1e-6,
        "lasso(0) vs least squares: worst coefficient gap {worst_lasso:.2e} > 1e-6"
    );

    // (c) Kernel-regression dual objective vs. the dense QP oracle.
    let svr_rows = synthetic_rows(24, 0xACC0_0052, true);
    let params = SvrParams {
        c: 2.0,
        gamma: 0.05,
        epsilon: 0.1,
        tol: 1e-8,
        max_iter: 2_000_000,
    };
    let fit = fit_svr(&svr_rows, &params).unwrap();
    gate!(N, fit.converged, "solver did not converge on the oracle dataset");
    // The oracle re-derives the standardized inputs and the Gram matrix.
    let (xs, ys) = to_xy::<f64>(&svr_rows);
    let dims = xs[0].len();
    let n = xs.len();
    let mut means = vec![0.0; dims];
    let mut sds = vec![0.0; dims];
    for j in 0..dims {
        let col: Vec<f64> = xs.iter().map(|x| x[j]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.max(0.0).sqrt();
        means[j] = mean;
        sds[j] = if sd <= 64.0 * f64::EPSILON * (1.0 + mean.abs()) {
            1.0
        } else {
            sd
        };
    }
    let zs: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            x.iter()
                .enumerate()
                .map(|(j, v)| (v - means[j]) / sds[j])
                .collect()
        })
        .collect();
    let mut kernel = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let sq: f64 = zs[i]
                .iter()
                .zip(&zs[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            kernel[i][j] = (-params.gamma * sq).exp();
        }
    }
    let oracle_obj = svr_dual_oracle(&kernel, &ys, params.c, params.epsilon);
    let gap = (fit.dual_objective - oracle_obj).abs();
    gate!(
        N,
        gap <= 1e-3,
        "dual objective {:.6} vs QP oracle {:.6}: gap {gap:.2e} > 1e-3",
        fit.dual_objective,
        oracle_obj
    );

    // (d) Two-stage grid search equals the exhaustive argmin on the same
    // folds (independent scan order and selection logic).
    let grid_rows = synthetic_rows(24, 0xACC0_0053, true);
    let spec = GridSpec {
        coarse_c: vec![0.5, 2.0, 8.0],
        coarse_gamma: vec![0.05, 0.2],
        fine_c: vec![1.0, 3.0],
        fine_gamma: vec![0.1, 0.4],
        folds: 4,
    };
    let seed = 99;
    let found = grid_search(&grid_rows, &spec, 0.1, seed).unwrap();
    let (gxs, gys) = to_xy::<f64>(&grid_rows);
    let folds = kfold_indices(gxs.len(), spec.folds, seed);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for &c in spec.coarse_c.iter() {
        for &g in spec.coarse_gamma.iter() {
            cells.push((c, g));
        }
    }
    for &c in spec.fine_c.iter() {
        for &g in spec.fine_gamma.iter() {
            cells.push((c, g));
        }
    }
    // Scan in reversed order so the oracle's walk differs from the search's.
    let mut best: Option<(f64, f64, f64)> = None;
    for &(c, g) in cells.iter().rev() {
        let p = SvrParams {
            c,
            gamma: g,
            epsilon: 0.1,
            ..SvrParams::default()
        };
        let rmse = cross_validated_rmse(&gxs, &gys, &p, &folds).unwrap();
        let better = match best {
            None => true,
            Some((bc, bg, br)) => {
                rmse < br || (rmse == br && (c, g) < (bc, bg))
            }
        };
        if better {
            best = Some((c, g, rmse));
        }
    }
    let (oc, og, ormse) = best.unwrap();
    gate!(
        N,
        found.c == oc && found.gamma == og && (found.rmse - ormse).abs() <= 1e-12,
        "grid search picked (C={}, gamma={}, rmse={:.6}); exhaustive argmin says (C={oc}, gamma={og}, rmse={ormse:.6})",
        found.c,
        found.gamma,
        found.rmse
    );

    let secs = started.elapsed().as_secs_f64();
    gate!(N, secs < 60.0, "took {secs:.1}s, budget 60s");
    pass(
        N,
        format!(
            "least-squares gap {worst_ols:.1e}, lasso(0) gap {worst_lasso:.1e}, dual-objective gap {gap:.1e}, grid argmin (C={oc}, gamma={og}) agrees ({secs:.1}s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Predictive quality of the tuned kernel model on synthetic noisy data.

#[test]
fn acceptance_06_svr_predictive_quality() {
    const N: u32 = 6;
    let corpus = random_corpus(72, 2..=5, 4..=18, 0xACC0_0006);
    gate!(N, corpus.len() >= 60, "corpus too small");
    let noise = NoiseModel64::default();
    let rows = build_dataset(&corpus, &noise, 256).unwrap();
    let (train, test) = train_test_split(&rows, 0.8, 0xACC0_0006).unwrap();

    let grid = grid_search(&train, &GridSpec::default(), 0.1, 0xACC0_0006).unwrap();
    let svr = fit_svr(
        &train,
        &SvrParams {
            c: grid.c,
            gamma: grid.gamma,
            epsilon: 0.1,
            ..SvrParams::default()
        },
    )
    .unwrap();
    let linear = fit_linear(&train, 1).unwrap();

    let actual: Vec<f64> = test.iter().map(|r| r.label).collect();
    let svr_pred: Vec<f64> = test
        .iter()
        .map(|r| svr.model.predict(&r.features.to_floats()))
        .collect();
    let lin_pred: Vec<f64> = test
        .iter()
        .map(|r| linear.predict(&r.features.to_floats()))
        .collect();
    let r2_svr = r_squared(&actual, &svr_pred).unwrap();
    let r2_lin = r_squared(&actual, &lin_pred).unwrap();

    gate!(
        N,
        r2_svr >= 0.7,
        "tuned kernel model test R² {r2_svr:.4} < 0.7 (grid chose C={}, gamma={})",
        grid.c,
        grid.gamma
    );
    gate!(
        N,
        r2_svr > r2_lin,
        "kernel model R² {r2_svr:.4} does not beat linear R² {r2_lin:.4}"
    );
    pass(
        N,
        format!(
            "test R²: kernel {r2_svr:.4} > linear {r2_lin:.4} (C={}, gamma={}, {} train / {} test)",
            grid.c,
            grid.gamma,
            train.len(),
            test.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. Cutting reduces noise on most circuits under the default noise model.

#[test]
fn acceptance_07_noise_reduction_direction() {
    const N: u32 = 7;
    let started = Instant::now();
    let corpus = random_cuttable_corpus(20, 4..=6, 12..=18, 0xACC0_0007);
    gate!(N, corpus.len() >= 20, "corpus too small");
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();
    let base = NoiseModel64::default();
    let shots = 10_000;

    let mut reduced = 0usize;
    let mut total_delta = 0.0f64;
    for (i, (circuit, declared)) in corpus.iter().enumerate() {
        let ideal = simulate_ideal::<f64>(circuit, &boundary, &opts).unwrap();

        let full_noise = base.clone().with_seed(mix_seed(base.seed, 2 * i as u64));
        let full = simulate_noisy::<f64>(circuit, &full_noise, shots, &boundary, &opts).unwrap();
        let e_full = mean_abs_error(&ideal, &full, None).unwrap();

        let cands = enumerate_cuts(circuit, 2);
        let cand = declared_candidate(&cands, declared).unwrap();
        let recon_noise = base.clone().with_seed(mix_seed(base.seed, 2 * i as u64 + 1));
        let mode = ExecMode::Shots {
            shots,
            noise: recon_noise,
        };
        let recon = reconstruct_candidate(cand, circuit.n_qubits(), &mode, &opts).unwrap();
        let e_recon = mean_abs_error(&ideal, &recon.distribution, None).unwrap();

        if e_recon <= e_full {
            reduced += 1;
        }
        total_delta += e_full - e_recon;
    }
    let mean_delta = total_delta / corpus.len() as f64;

    gate!(
        N,
        reduced * 10 >= corpus.len() * 7,
        "reconstruction beat full execution on only {reduced}/{} circuits (need ≥ 70%)",
        corpus.len()
    );
    gate!(
        N,
        mean_delta > 0.0,
        "mean error reduction {mean_delta:.4} is not positive"
    );
    let secs = started.elapsed().as_secs_f64();
    gate!(N, secs < 600.0, "took {secs:.1}s, budget 600s");
    pass(
        N,
        format!(
            "cutting reduced error on {reduced}/{} circuits, mean reduction {mean_delta:.4} percentage points ({secs:.1}s)",
            corpus.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Metric identities, asserted exactly.

#[test]
fn acceptance_08_metric_identities() {
    const N: u32 = 8;
    let a = OutcomeDistribution::<f64>::from_probs(2, [(0b00, 0.5), (0b11, 0.5)]);
    let b = OutcomeDistribution::<f64>::from_probs(2, [(0b01, 0.5), (0b10, 0.5)]);
    let c = OutcomeDistribution::<f64>::from_probs(2, [(0b00, 0.25), (0b11, 0.75)]);

    let same = error_report(&a, &a.clone(), None).unwrap();
    gate!(
        N,
        same.hellinger_fidelity == 1.0,
        "fidelity of identical distributions is {}, not exactly 1",
        same.hellinger_fidelity
    );
    gate!(
        N,
        same.mean_error == 0.0 && same.rms_error == 0.0,
        "errors of identical distributions are ({}, {}), not exactly 0",
        same.mean_error,
        same.rms_error
    );

    let disjoint = error_report(&a, &b, None).unwrap();
    gate!(
        N,
        disjoint.hellinger_fidelity == 0.0,
        "fidelity of disjoint distributions is {}, not exactly 0",
        disjoint.hellinger_fidelity
    );

    let ab = error_report(&a, &c, None).unwrap();
    let ba = error_report(&c, &a, None).unwrap();
    gate!(
        N,
        ab.hellinger_fidelity == ba.hellinger_fidelity,
        "fidelity is asymmetric: {} vs {}",
        ab.hellinger_fidelity,
        ba.hellinger_fidelity
    );
    gate!(
        N,
        ab.mean_error > 0.0 && ab.rms_error > 0.0,
        "unequal distributions must have strictly positive errors"
    );

    // Restricting the comparison to states where the distributions agree
    // zeroes both errors: they are zero iff equal on the compared set.
    let d = OutcomeDistribution::<f64>::from_probs(2, [(0b00, 0.5), (0b10, 0.5)]);
    let marked: BTreeSet<u64> = [0b00u64].into_iter().collect();
    let on_marked = error_report(&a, &d, Some(&marked)).unwrap();
    gate!(
        N,
        on_marked.mean_error == 0.0 && on_marked.rms_error == 0.0,
        "distributions equal on the compared set must report exactly zero error"
    );
    pass(
        N,
        "fidelity 1 on identical, 0 on disjoint, symmetric; errors zero iff equal on the compared set".to_string(),
    );
}

// ---------------------------------------------------------------------------
// 9. Shot-budget sweep picks the known minimum of a synthetic curve.

#[test]
fn acceptance_09_shot_sweep_minimum() {
    const N: u32 = 9;
    // Convex synthetic error curve with its minimum at exponent 7.
    let points: Vec<SweepPoint<f64>> = (1..=13)
        .map(|e| SweepPoint {
            exponent: e,
            mean_error: 2.0 + 0.45 * ((e as f64) - 7.0).powi(2),
        })
        .collect();
    let best = pick_best_exponent(&points, 3).unwrap();
    gate!(N, best == 7, "picked exponent {best}, expected 7");
    pass(N, format!("synthetic curve minimum recovered at exponent {best}"));
}

// ---------------------------------------------------------------------------
// 10. Determinism of the full pipeline run.

#[test]
fn acceptance_10_run_determinism() {
    const N: u32 = 10;
    let dir = tempfile::tempdir().unwrap();
    let qasm_path = dir.path().join("fixture.qasm");
    let model_path = dir.path().join("model.json");

    let (circuit, _) = random_cuttable_corpus(1, 5..=5, 12..=12, 0xACC0_0010)
        .pop()
        .unwrap();
    std::fs::write(&qasm_path, emit_qasm(&circuit)).unwrap();

    // A deterministic linear model whose predictions grow with circuit size,
    // so the run performs at least one real split.
    let rows = synthetic_rows(48, 0xACC0_0011, false);
    let scaled: Vec<DatasetRow<f64>> = rows
        .into_iter()
        .map(|mut r| {
            r.label = 3.0 * (r.features.depth as f64) + (r.features.n_qubits as f64);
            r
        })
        .collect();
    let linear = fit_linear(&scaled, 1).unwrap();
    let model = TrainedModel::new(ModelParams::Linear(linear));
    save_model(&model_path, &model).unwrap();

    let invoke = |out: &str| {
        let out_dir = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_qfrag"))
            .args([
                "--seed",
                "5",
                "--shots",
                "2048",
                "--out-dir",
                out_dir.to_str().unwrap(),
                "run",
                "--circuit",
                qasm_path.to_str().unwrap(),
                "--model",
                model_path.to_str().unwrap(),
                "--threshold",
                "12",
            ])
            .status()
            .unwrap();
        assert!(
            status.success(),
            "ACCEPTANCE {N:02} FAIL — run exited with {status}"
        );
        out_dir
    };
    let first = invoke("first");
    let second = invoke("second");

    for file in ["plan.json", "report.json", "distribution.csv"] {
        let x = std::fs::read(first.join(file)).unwrap();
        let y = std::fs::read(second.join(file)).unwrap();
        gate!(
            N,
            x == y,
            "{file} differs between two identically seeded runs"
        );
        gate!(N, !x.is_empty(), "{file} is empty");
    }
    gate!(
        N,
        first.join("timings.json").exists(),
        "timings.json missing (wall-clock data must be quarantined there)"
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(first.join("report.json")).unwrap()).unwrap();
    gate!(
        N,
        report["tree"]["nodes"].as_u64().unwrap() >= 3,
        "fixture run should have split at least once"
    );
    pass(
        N,
        format!(
            "plan.json, report.json, distribution.csv byte-identical across seeded runs ({} tree nodes)",
            report["tree"]["nodes"]
        ),
    );
}
