//! Temporary diagnostic (deleted before commit): criterion-7 win rate under a
//! common compared set, with and without idle noise.

use qfrag_core::fragment::enumerate_cuts;
use qfrag_core::metrics::mean_abs_error;
use qfrag_core::reconstruct::reconstruct_candidate;
use qfrag_core::sim::{
    mix_seed, simulate_ideal, simulate_noisy, CutBoundarySpec, ExecMode, SimOptions,
};
use qfrag_core::synth::random_cuttable_corpus;
use qfrag_core::NoiseModel64;
use std::collections::BTreeSet;

#[test]
fn fair_metric_win_rates() {
    let corpus = random_cuttable_corpus(20, 4..=6, 12..=18, 0xACC0_0007);
    let opts = SimOptions::default();
    let boundary = CutBoundarySpec::none();
    let shots = 10_000;

    for p_idle in [0.0, 0.002, 0.004] {
        let base = NoiseModel64 {
            p_idle,
            ..NoiseModel64::default()
        };
        let mut wins = 0usize;
        let mut deltas = Vec::new();
        for (i, (circuit, declared)) in corpus.iter().enumerate() {
            let ideal = simulate_ideal::<f64>(circuit, &boundary, &opts).unwrap();
            let full_noise = base.clone().with_seed(mix_seed(base.seed, 2 * i as u64));
            let full =
                simulate_noisy::<f64>(circuit, &full_noise, shots, &boundary, &opts).unwrap();

            let cands = enumerate_cuts(circuit, 2);
            let want: BTreeSet<_> = declared.iter().copied().collect();
            let cand = cands
                .iter()
                .find(|c| c.cut_points.iter().copied().collect::<BTreeSet<_>>() == want)
                .unwrap();
            let recon_noise = base.clone().with_seed(mix_seed(base.seed, 2 * i as u64 + 1));
            let mode = ExecMode::Shots {
                shots,
                noise: recon_noise,
            };
            let recon = reconstruct_candidate(cand, circuit.n_qubits(), &mode, &opts).unwrap();

            let mut common: BTreeSet<u64> = BTreeSet::new();
            common.extend(ideal.iter().map(|(k, _)| k));
            common.extend(full.iter().map(|(k, _)| k));
            common.extend(recon.distribution.iter().map(|(k, _)| k));
            let e_full = mean_abs_error(&ideal, &full, Some(&common)).unwrap();
            let e_rec = mean_abs_error(&ideal, &recon.distribution, Some(&common)).unwrap();
            if e_rec <= e_full {
                wins += 1;
            }
            deltas.push(e_full - e_rec);
            println!(
                "  p_idle={p_idle}: {} n={} k={} | full {e_full:.3} rec {e_rec:.3} | {}",
                circuit.name.as_deref().unwrap_or("?"),
                circuit.n_qubits(),
                cand.interior_cut_wires().len(),
                if e_rec <= e_full { "WIN" } else { "lose" }
            );
        }
        let mean_delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
        println!(
            "=== p_idle={p_idle}: wins {}/{} mean_delta {mean_delta:.3} ===",
            wins,
            corpus.len()
        );
    }
}
