//! Value learning: the Q-network with replay and a target copy, plus the
//! imitation-trained candidate ranker.

mod features;
mod nn;
mod replay;
mod reward;

pub use features::{
    action_id, action_parts, apply_delta, encode_state, nearest_grid_id, FeatureInputs,
    StateVector, ACTION_COUNT, ACTION_DELTAS,
};
pub use nn::{softmax, ForwardCache, Gradients, Mlp};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{reward, RewardScale};

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::types::STATE_DIM;

/// Q-network hidden widths.
pub const Q_HIDDEN: [usize; 2] = [64, 64];

/// Ranker hidden width.
pub const RANKER_HIDDEN: usize = 32;

/// Default replay capacity.
pub const REPLAY_CAPACITY: usize = 10_000;

/// Default batch size for updates.
pub const BATCH_SIZE: usize = 64;

/// Target network refresh period, in updates.
pub const TARGET_SYNC_EVERY: u64 = 500;

/// Discount factor.
pub const GAMMA: f64 = 0.9;

/// SGD learning rate.
pub const LEARNING_RATE: f64 = 1e-3;

/// Exploration schedule bounds: 1.0 decaying to 0.05 over 20k steps.
pub const EPSILON_START: f64 = 1.0;
pub const EPSILON_END: f64 = 0.05;
pub const EPSILON_DECAY_STEPS: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LearnerError {
    #[error("network shape {got_in}->{got_out} does not match expected {want_in}->{want_out}")]
    ShapeMismatch {
        got_in: usize,
        got_out: usize,
        want_in: usize,
        want_out: usize,
    },
    #[error("empty batch")]
    EmptyBatch,
}

/// Linear epsilon decay over environment steps.
pub fn epsilon_schedule(env_step: u64) -> f64 {
    let frac = (env_step as f64 / EPSILON_DECAY_STEPS as f64).min(1.0);
    EPSILON_START + (EPSILON_END - EPSILON_START) * frac
}

/// The standard Q-network shape.
pub fn q_network_dims() -> [usize; 4] {
    [STATE_DIM, Q_HIDDEN[0], Q_HIDDEN[1], ACTION_COUNT]
}

/// The standard ranker shape.
pub fn ranker_dims() -> [usize; 3] {
    [STATE_DIM, RANKER_HIDDEN, ACTION_COUNT]
}

/// Q-learner: online network, frozen target, squared-error Bellman updates.
#[derive(Debug, Clone)]
pub struct QLearner {
    net: Mlp,
    target: Mlp,
    pub gamma: f64,
    pub learning_rate: f64,
    pub sync_every: u64,
    updates: u64,
}

impl QLearner {
    /// Fresh seeded learner with the standard shape.
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        let net = Mlp::new(&q_network_dims(), rng);
        Self::from_network(net).expect("standard dims")
    }

    /// Wrap an existing network (e.g. loaded from a checkpoint).
    pub fn from_network(net: Mlp) -> Result<Self, LearnerError> {
        if net.input_dim() != STATE_DIM || net.output_dim() != ACTION_COUNT {
            return Err(LearnerError::ShapeMismatch {
                got_in: net.input_dim(),
                got_out: net.output_dim(),
                want_in: STATE_DIM,
                want_out: ACTION_COUNT,
            });
        }
        let target = net.clone();
        Ok(Self {
            net,
            target,
            gamma: GAMMA,
            learning_rate: LEARNING_RATE,
            sync_every: TARGET_SYNC_EVERY,
            updates: 0,
        })
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Q-values of every grid action in `state`.
    pub fn q_values(&self, state: &StateVector) -> [f64; ACTION_COUNT] {
        let out = self.net.forward(&state.0);
        let mut q = [0.0; ACTION_COUNT];
        q.copy_from_slice(&out);
        q
    }

    /// One squared-error gradient step on a batch.
    ///
    /// Targets are `r + gamma * max_a' Q_target(s', a')`, or `r` alone on
    /// terminal transitions. The target network is refreshed from the online
    /// one every `sync_every` updates. Returns the mean batch loss.
    pub fn q_update(&mut self, batch: &[&Transition]) -> Result<f64, LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyBatch);
        }
        let inv = 1.0 / batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.net);
        let mut loss = 0.0;
        for t in batch {
            let (cache, q) = self.net.forward_cached(&t.state.0);
            let y = if t.done {
                t.reward
            } else {
                let tq = self.target.forward(&t.next_state.0);
                let best = tq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                t.reward + self.gamma * best
            };
            let err = q[t.action] - y;
            loss += err * err * inv;
            let mut d_out = [0.0; ACTION_COUNT];
            d_out[t.action] = 2.0 * err * inv;
            self.net.backward(&cache, &d_out, &mut grads);
        }
        self.net.apply_gradients(&grads, self.learning_rate);
        self.updates += 1;
        if self.updates % self.sync_every == 0 {
            self.target.copy_from(&self.net);
        }
        Ok(loss)
    }
}

/// Imitation-trained candidate ranker: a small softmax network that orders
/// proposals by how likely the logged policy was to pick them. Advisory
/// only; it never overrides goal selection.
#[derive(Debug, Clone)]
pub struct CandidateRanker {
    net: Mlp,
    trained: bool,
}

impl CandidateRanker {
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        Self {
            net: Mlp::new(&ranker_dims(), rng),
            trained: false,
        }
    }

    pub fn from_network(net: Mlp, trained: bool) -> Result<Self, LearnerError> {
        if net.input_dim() != STATE_DIM || net.output_dim() != ACTION_COUNT {
            return Err(LearnerError::ShapeMismatch {
                got_in: net.input_dim(),
                got_out: net.output_dim(),
                want_in: STATE_DIM,
                want_out: ACTION_COUNT,
            });
        }
        Ok(Self { net, trained })
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn mark_trained(&mut self) {
        self.trained = true;
    }

    /// Class probabilities over the action grid.
    pub fn probabilities(&self, state: &StateVector) -> [f64; ACTION_COUNT] {
        let p = softmax(&self.net.forward(&state.0));
        let mut out = [0.0; ACTION_COUNT];
        out.copy_from_slice(&p);
        out
    }

    /// Order candidates by descending imitation probability (stable); an
    /// untrained ranker preserves input order.
    pub fn rank_candidates<T>(
        &self,
        state: &StateVector,
        candidates: &mut Vec<T>,
        grid_id: impl Fn(&T) -> usize,
    ) {
        if !self.trained || candidates.len() < 2 {
            return;
        }
        let probs = self.probabilities(state);
        candidates.sort_by(|a, b| {
            probs[grid_id(b)]
                .partial_cmp(&probs[grid_id(a)])
                .expect("finite probabilities")
        });
    }

    /// One cross-entropy step on (state, chosen grid action) pairs. Returns
    /// mean loss.
    pub fn imitation_update(
        &mut self,
        batch: &[(&StateVector, usize)],
        learning_rate: f64,
    ) -> Result<f64, LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyBatch);
        }
        let inv = 1.0 / batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.net);
        let mut loss = 0.0;
        for (state, label) in batch {
            let (cache, logits) = self.net.forward_cached(&state.0);
            let probs = softmax(&logits);
            loss -= libm::log(probs[*label].max(1e-300)) * inv;
            let mut d_out: Vec<f64> = probs.iter().map(|p| p * inv).collect();
            d_out[*label] -= inv;
            self.net.backward(&cache, &d_out, &mut grads);
        }
        self.net.apply_gradients(&grads, learning_rate);
        Ok(loss)
    }

    /// Fraction of held-out pairs whose top-1 prediction matches the label.
    pub fn top1_agreement(&self, pairs: &[(&StateVector, usize)]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let hits = pairs
            .iter()
            .filter(|(s, label)| {
                let p = self.probabilities(s);
                let best = p
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                best == *label
            })
            .count();
        hits as f64 / pairs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn state(fill: f64) -> StateVector {
        let mut s = [fill; STATE_DIM];
        s[15] = 1.0;
        StateVector(s)
    }

    fn transition(a: usize, r: f64, done: bool) -> Transition {
        Transition {
            state: state(0.1),
            action: a,
            reward: r,
            next_state: state(0.2),
            done,
        }
    }

    /// Zero all weights and pin per-action output biases, so Q(s, a) equals
    /// the bias regardless of input.
    fn pin_outputs(net: &mut Mlp, values: &[f64; ACTION_COUNT]) {
        for l in 0..net.dims().len() - 1 {
            for w in net.layer_weights_mut(l).iter_mut() {
                *w = 0.0;
            }
            for b in net.layer_biases_mut(l).iter_mut() {
                *b = 0.0;
            }
        }
        let last = net.dims().len() - 2;
        net.layer_biases_mut(last).copy_from_slice(values);
    }

    #[test]
    fn epsilon_decays_linearly_to_floor() {
        assert_eq!(epsilon_schedule(0), 1.0);
        assert!((epsilon_schedule(10_000) - 0.525).abs() < 1e-9);
        assert!((epsilon_schedule(20_000) - 0.05).abs() < 1e-9);
        assert!((epsilon_schedule(1_000_000) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn zero_gamma_targets_are_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ql = QLearner::new(&mut rng);
        ql.gamma = 0.0;
        let mut vals = [0.0; ACTION_COUNT];
        vals[3] = 0.7;
        pin_outputs(&mut ql.net, &vals);
        ql.target.copy_from(&ql.net);
        let t = transition(3, 0.2, false);
        let loss = ql.q_update(&[&t]).unwrap();
        // y = r = 0.2, Q = 0.7 -> loss 0.25
        assert!((loss - 0.25).abs() < 1e-12);
    }

    #[test]
    fn terminal_transitions_skip_bootstrap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ql = QLearner::new(&mut rng);
        let mut vals = [5.0; ACTION_COUNT];
        vals[0] = 0.5;
        pin_outputs(&mut ql.net, &vals);
        ql.target.copy_from(&ql.net);
        let t = transition(0, 0.5, true);
        // y = r = 0.5 despite max target Q = 5.
        let loss = ql.q_update(&[&t]).unwrap();
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn hand_computed_bellman_target() {
        // Q(s,a) = 0.5, max target Q = 1.0, r = 0.2, gamma = 0.9:
        // y = 1.1, loss = 0.36.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ql = QLearner::new(&mut rng);
        let mut net_vals = [0.0; ACTION_COUNT];
        net_vals[2] = 0.5;
        pin_outputs(&mut ql.net, &net_vals);
        let mut tgt_vals = [0.0; ACTION_COUNT];
        tgt_vals[7] = 1.0;
        pin_outputs(&mut ql.target, &tgt_vals);
        let t = transition(2, 0.2, false);
        let loss = ql.q_update(&[&t]).unwrap();
        assert!((loss - 0.36).abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn target_net_syncs_on_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ql = QLearner::new(&mut rng);
        ql.sync_every = 10;
        let t = transition(1, 1.0, false);
        for _ in 0..9 {
            ql.q_update(&[&t]).unwrap();
        }
        assert_ne!(ql.target, ql.net);
        ql.q_update(&[&t]).unwrap();
        assert_eq!(ql.target, ql.net);
    }

    #[test]
    fn empty_batch_and_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ql = QLearner::new(&mut rng);
        assert_eq!(ql.q_update(&[]), Err(LearnerError::EmptyBatch));
        let bad = Mlp::new(&[4, 8, 3], &mut rng);
        assert!(matches!(
            QLearner::from_network(bad),
            Err(LearnerError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn untrained_ranker_preserves_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ranker = CandidateRanker::new(&mut rng);
        let mut cands: Vec<usize> = (0..ACTION_COUNT).rev().collect();
        let orig = cands.clone();
        ranker.rank_candidates(&state(0.3), &mut cands, |c| *c);
        assert_eq!(cands, orig);
    }

    #[test]
    fn hand_set_logits_sort_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ranker = CandidateRanker::new(&mut rng);
        let mut vals = [0.0; ACTION_COUNT];
        vals[0] = 2.0;
        vals[1] = 1.0;
        pin_outputs(&mut ranker.net, &vals);
        ranker.mark_trained();
        let mut cands: Vec<usize> = alloc::vec![5, 1, 0];
        ranker.rank_candidates(&state(0.3), &mut cands, |c| *c);
        assert_eq!(cands, alloc::vec![0, 1, 5]);
    }

    #[test]
    fn imitation_learns_a_separable_labeling() {
        // Label = 0 when feature 0 is negative, else 1; easily separable.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ranker = CandidateRanker::new(&mut rng);
        let mut states = Vec::new();
        for i in 0..400 {
            let v = if i % 2 == 0 { -0.8 } else { 0.8 };
            let mut s = state(0.0);
            s.0[0] = v + 0.05 * rng.random_range(-1.0..1.0);
            states.push((s, usize::from(i % 2 == 1)));
        }
        for _ in 0..300 {
            let batch: Vec<(&StateVector, usize)> =
                states.iter().map(|(s, l)| (s, *l)).collect();
            ranker.imitation_update(&batch, 0.05).unwrap();
        }
        ranker.mark_trained();
        let pairs: Vec<(&StateVector, usize)> = states.iter().map(|(s, l)| (s, *l)).collect();
        assert!(ranker.top1_agreement(&pairs) > 0.95);
    }

    #[test]
    fn q_values_are_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ql = QLearner::new(&mut rng);
        let s = state(0.4);
        assert_eq!(ql.q_values(&s), ql.q_values(&s));
    }
}
