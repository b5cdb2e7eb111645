//! Cross-module property tests: oracle equivalence for episodic retrieval
//! and monotone safety of rule reconciliation.

use la_core::agent::reconcile;
use la_core::memory::{CapSpec, EpisodeRecord, EpisodeStore, FiredEffect, RuleEffect};
use la_core::situation::Direction;
use la_core::types::{LinkAction, STATE_DIM};
use proptest::prelude::*;

fn record(features: [f64; STATE_DIM], tti: u64) -> EpisodeRecord {
    EpisodeRecord {
        state_vector: features,
        action: LinkAction::new((tti % 29) as u8, 1 + (tti % 2) as u8),
        outcome_reward: 0.0,
        windowed_bler_after: 0.0,
        timestamp_tti: tti,
    }
}

/// Brute-force reference: standardize independently, sort the whole store.
fn brute_force_knn(
    records: &[EpisodeRecord],
    query: &[f64; STATE_DIM],
    k: usize,
) -> Vec<u64> {
    let n = records.len() as f64;
    let mut scales = [1.0f64; STATE_DIM];
    if records.len() >= 2 {
        for i in 0..STATE_DIM {
            let mean: f64 = records.iter().map(|r| r.state_vector[i]).sum::<f64>() / n;
            let var: f64 = records
                .iter()
                .map(|r| {
                    let d = r.state_vector[i] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let std = var.max(0.0).sqrt();
            if std > 1e-9 {
                scales[i] = std;
            }
        }
    }
    let mut scored: Vec<(f64, u64)> = records
        .iter()
        .map(|r| {
            let mut d2 = 0.0;
            for i in 0..STATE_DIM {
                let d = (query[i] - r.state_vector[i]) / scales[i];
                d2 += d * d;
            }
            (d2, r.timestamp_tti)
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)));
    scored.into_iter().take(k).map(|(_, t)| t).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn retrieval_agrees_with_exhaustive_scan(
        raw in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, STATE_DIM), 2..120),
        query in prop::collection::vec(-2.0f64..2.0, STATE_DIM),
        k in 1usize..12,
    ) {
        let mut store = EpisodeStore::new(1000);
        let mut records = Vec::new();
        for (t, feats) in raw.iter().enumerate() {
            let mut arr = [0.0; STATE_DIM];
            arr.copy_from_slice(feats);
            let r = record(arr, t as u64);
            store.store(r.clone());
            records.push(r);
        }
        let mut q = [0.0; STATE_DIM];
        q.copy_from_slice(&query);
        let got: Vec<u64> = store
            .retrieve_similar(&q, k)
            .into_iter()
            .map(|r| r.timestamp_tti)
            .collect();
        let want = brute_force_knn(&records, &q, k);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn reconcile_never_raises_mcs_above_proposal(
        proposal_mcs in 0u8..29,
        proposal_rank in 1u8..3,
        current_mcs in 0u8..29,
        current_rank in 1u8..3,
        effect_picks in prop::collection::vec(0usize..6, 0..6),
        cap in 0u8..29,
        minus in 0u8..4,
    ) {
        let effects: Vec<FiredEffect> = effect_picks
            .iter()
            .map(|i| {
                let effect = match i {
                    0 => RuleEffect::ForceMcsDecrement,
                    1 => RuleEffect::CapMcs(CapSpec::Absolute(cap)),
                    2 => RuleEffect::CapMcs(CapSpec::CurrentMinus(minus)),
                    3 => RuleEffect::ForceRank(1),
                    4 => RuleEffect::VetoGoal(Direction::Raise),
                    _ => RuleEffect::VetoGoal(Direction::Lower),
                };
                FiredEffect { rule_id: "p".into(), effect }
            })
            .collect();
        let proposal = LinkAction::new(proposal_mcs, proposal_rank);
        let current = LinkAction::new(current_mcs, current_rank);
        let out = reconcile(proposal, &effects, current, 28);
        prop_assert!(out.mcs_index() <= proposal.mcs_index());
        prop_assert!(out.rank() >= 1 && out.rank() <= 2);
        prop_assert!(out.mcs_index() <= 28);
    }
}

/// The spec-scale oracle check: 10k records, exact agreement.
#[test]
fn retrieval_matches_oracle_at_10k_records() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let mut store = EpisodeStore::new(100_000);
    let mut records = Vec::new();
    for t in 0..10_000u64 {
        let mut feats = [0.0; STATE_DIM];
        for f in feats.iter_mut() {
            *f = rng.random_range(-1.0..1.5);
        }
        let r = record(feats, t);
        store.store(r.clone());
        records.push(r);
    }
    for probe in 0..20 {
        let mut q = [0.0; STATE_DIM];
        for f in q.iter_mut() {
            *f = rng.random_range(-1.0..1.5);
        }
        let got: Vec<u64> = store
            .retrieve_similar(&q, 8)
            .into_iter()
            .map(|r| r.timestamp_tti)
            .collect();
        let want = brute_force_knn(&records, &q, 8);
        assert_eq!(got, want, "probe {probe}");
    }
}
