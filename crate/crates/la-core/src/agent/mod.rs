//! The cognitive core: a workflow coordinator dispatching the proactive
//! runtime (self-monitoring, meta-goal synthesis) and the reactive runtime
//! (perceive, recall, forecast, propose, evaluate, reconcile, act).

mod directive;
mod goals;

pub use directive::{parse_directive, Directive, DirectiveError};
pub use goals::{GoalKind, GoalOrigin, MetaGoal, Objective, TechnicalGoal};

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::learner::{
    apply_delta, encode_state, nearest_grid_id, CandidateRanker, FeatureInputs, QLearner,
    RewardScale, StateVector, ACTION_COUNT, ACTION_DELTAS,
};
use crate::linksim::{
    bler_with_slope, dequantize_cqi, GridConfig, McsTable, Observation, TransmissionOutcome,
};
use crate::memory::{CapSpec, EpisodeRecord, EpisodeStore, FiredEffect, RuleContext, RuleEffect, RuleSet};
use crate::olla::{inner_loop_select, outer_loop_update, OllaParams, OllaState};
use crate::situation::{
    Direction, Situation, SituationParams, SituationSummary, FORECAST_HORIZON,
};
use crate::types::{LinkAction, Mode};
use crate::LinkController;

/// Internal deviation events that can wake the proactive runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationKind {
    BlerAboveTarget,
    ThroughputBelowReference,
}

/// What woke the proactive runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Trigger {
    Directive(Directive),
    Event(DeviationKind),
    PeriodicReview,
}

/// One coordinator dispatch.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Proactive(Trigger),
    Reactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("no candidates to select from")]
    EmptyCandidates,
}

/// Agent tuning knobs.
#[derive(Debug, Clone)]
pub struct AgentConfig {
    /// Neighbors recalled per reactive cycle.
    pub k_neighbors: usize,
    /// Candidate list cap after ranking.
    pub candidate_cap: usize,
    /// Episodic store capacity used at runtime. The store type itself
    /// defaults to 100k; per-TTI retrieval keeps the working set smaller.
    pub store_capacity: usize,
    /// Store one episode every this many TTIs.
    pub store_every_ttis: u64,
    /// Proactive periodic review interval, TTIs.
    pub periodic_review_ttis: u64,
    /// Consecutive over-target TTIs before an event trigger fires.
    pub event_streak_ttis: u64,
    /// Step size of the model-mismatch calibrator, dB per unit surprise.
    pub bias_eta_db: f64,
    pub bias_clamp_db: f64,
    /// Exploration probability (zero for evaluation).
    pub explore_epsilon: f64,
    /// Seed for the exploration stream.
    pub seed: u64,
    pub situation: SituationParams,
    pub olla: OllaParams,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 8,
            candidate_cap: 12,
            store_capacity: 4096,
            store_every_ttis: 16,
            periodic_review_ttis: 2000,
            event_streak_ttis: 500,
            bias_eta_db: 2.0,
            bias_clamp_db: 10.0,
            explore_epsilon: 0.0,
            seed: 0,
            situation: SituationParams::default(),
            olla: OllaParams::default(),
        }
    }
}

/// Generate the candidate set: the relative action grid around the current
/// action (URLLC restricted to rank 1), merged with distinct recalled
/// neighbor actions, pre-ranked by the candidate ranker, deduplicated and
/// capped.
pub fn generate_candidates(
    mode: Mode,
    current: LinkAction,
    neighbor_actions: &[LinkAction],
    table: &McsTable,
    ranker: &CandidateRanker,
    state: &StateVector,
    cap: usize,
) -> Vec<TechnicalGoal> {
    let ranks: &[u8] = match mode {
        Mode::Embb => &[1, 2],
        Mode::Urllc => &[1],
    };
    let mut actions: Vec<LinkAction> = Vec::new();
    for delta in ACTION_DELTAS {
        for &rank in ranks {
            let a = LinkAction::new(
                apply_delta(current.mcs_index(), delta, table.top_index()),
                rank,
            );
            if !actions.contains(&a) {
                actions.push(a);
            }
        }
    }
    for n in neighbor_actions {
        if n.mcs_index() <= table.top_index() && !actions.contains(n) {
            actions.push(*n);
        }
    }
    let mut cands: Vec<TechnicalGoal> = actions
        .into_iter()
        .map(|a| classify_goal(current, a, table))
        .collect();
    ranker.rank_candidates(state, &mut cands, |c| {
        nearest_grid_id(current, c.resulting_action)
    });
    cands.truncate(cap);
    cands
}

fn classify_goal(current: LinkAction, action: LinkAction, table: &McsTable) -> TechnicalGoal {
    let mcs_delta = i16::from(action.mcs_index()) - i16::from(current.mcs_index());
    let rank_delta = i16::from(action.rank()) - i16::from(current.rank());
    let kind = if rank_delta != 0 {
        GoalKind::AdjustRank
    } else {
        let cur_mod = table
            .entry(current.mcs_index())
            .map(|e| e.modulation_order)
            .unwrap_or(0);
        let new_mod = table
            .entry(action.mcs_index())
            .map(|e| e.modulation_order)
            .unwrap_or(0);
        if new_mod != cur_mod {
            GoalKind::AdjustModulation
        } else {
            GoalKind::AdjustCodeRate
        }
    };
    let delta = if rank_delta != 0 && mcs_delta == 0 {
        rank_delta as i8
    } else {
        mcs_delta.clamp(-128, 127) as i8
    };
    TechnicalGoal {
        kind,
        delta,
        resulting_action: action,
        score: 0.0,
    }
}

/// Greedy goal selection: the candidate whose grid action has the highest
/// Q-value, ties broken toward the smaller MCS move, then the lower rank.
pub fn select_goal(
    candidates: &[TechnicalGoal],
    q_values: &[f64; ACTION_COUNT],
    current: LinkAction,
) -> Result<TechnicalGoal, AgentError> {
    let mut best: Option<(f64, i16, u8, &TechnicalGoal)> = None;
    for c in candidates {
        let score = q_values[nearest_grid_id(current, c.resulting_action)];
        let move_size =
            (i16::from(c.resulting_action.mcs_index()) - i16::from(current.mcs_index())).abs();
        let rank = c.resulting_action.rank();
        let better = match &best {
            None => true,
            Some((bs, bm, br, _)) => {
                score > *bs
                    || (score == *bs && (move_size < *bm || (move_size == *bm && rank < *br)))
            }
        };
        if better {
            best = Some((score, move_size, rank, c));
        }
    }
    best.map(|(score, _, _, c)| TechnicalGoal {
        score,
        ..c.clone()
    })
    .ok_or(AgentError::EmptyCandidates)
}

/// Apply fired rule effects to a proposed action, in priority order.
///
/// Safety is monotone: no effect ever raises the MCS above the proposal.
/// A forced decrement lands one index below the *current* action whenever
/// the proposal does not already sit below it.
pub fn reconcile(
    proposal: LinkAction,
    effects: &[FiredEffect],
    current: LinkAction,
    top_index: u8,
) -> LinkAction {
    let mut out = proposal;
    for fired in effects {
        match &fired.effect {
            RuleEffect::ForceMcsDecrement => {
                if out.mcs_index() >= current.mcs_index() {
                    out = out.with_mcs(current.mcs_index().saturating_sub(1));
                }
            }
            RuleEffect::CapMcs(CapSpec::Absolute(n)) => {
                out = out.with_mcs(out.mcs_index().min(*n));
            }
            RuleEffect::CapMcs(CapSpec::CurrentMinus(k)) => {
                out = out.with_mcs(out.mcs_index().min(current.mcs_index().saturating_sub(*k)));
            }
            RuleEffect::ForceRank(r) => {
                out = out.with_rank(*r);
            }
            RuleEffect::VetoGoal(Direction::Raise) => {
                if out.mcs_index() > current.mcs_index() {
                    out = out.with_mcs(current.mcs_index());
                }
            }
            // Vetoes of other directions and mode forcing do not touch the
            // action; the coordinator handles them.
            RuleEffect::VetoGoal(_) | RuleEffect::ForceMode(_) => {}
        }
    }
    LinkAction::new(out.mcs_index().min(top_index), out.rank())
}

/// The link adaptation agent.
pub struct LaAgent {
    cfg: AgentConfig,
    table: McsTable,
    grid: GridConfig,
    reward_scale: RewardScale,
    mode: Mode,
    active_target: f64,
    meta_goal: MetaGoal,
    current_action: LinkAction,
    situation: Situation,
    store: EpisodeStore,
    rules: RuleSet,
    qlearner: QLearner,
    ranker: CandidateRanker,
    fallback_olla: OllaState,
    /// OLLA-equivalent mismatch offset: positive when the link runs worse
    /// than CQI implies. Calibrated from ACK/NACK surprise.
    bias_db: f64,
    inbox: VecDeque<Directive>,
    directive_errors: u64,
    paused: bool,
    now_tti: u64,
    mode_switch_tti: u64,
    last_ack: bool,
    last_cqi: u8,
    last_reward: Option<f64>,
    last_state: Option<StateVector>,
    last_grid_id: usize,
    bler_streak: u64,
    event_armed: bool,
    pending_event: Option<DeviationKind>,
    tpt_reference_bits: f64,
    goal_feasible: bool,
    explore_rng: ChaCha8Rng,
    actions_this_tti: u32,
}

impl LaAgent {
    pub fn new(
        cfg: AgentConfig,
        table: McsTable,
        grid: GridConfig,
        initial_mode: Mode,
        qlearner: QLearner,
        ranker: CandidateRanker,
    ) -> Self {
        let situation = Situation::new(cfg.situation.clone());
        let store = EpisodeStore::new(cfg.store_capacity);
        let fallback_olla = OllaState::new(
            cfg.olla.step_up_db,
            initial_mode.bler_target(),
            cfg.olla.offset_clamp_db,
        );
        let reward_scale = RewardScale::from_table(&table, &grid);
        let explore_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_a9e4_7000_0001);
        Self {
            meta_goal: MetaGoal::for_mode(initial_mode, GoalOrigin::PeriodicReview),
            active_target: initial_mode.bler_target(),
            current_action: LinkAction::new(0, default_rank(initial_mode)),
            situation,
            store,
            rules: RuleSet::builtin(),
            qlearner,
            ranker,
            fallback_olla,
            bias_db: 0.0,
            inbox: VecDeque::new(),
            directive_errors: 0,
            paused: false,
            now_tti: 0,
            mode_switch_tti: 0,
            last_ack: true,
            last_cqi: 0,
            last_reward: None,
            last_state: None,
            last_grid_id: 0,
            bler_streak: 0,
            event_armed: true,
            pending_event: None,
            tpt_reference_bits: 0.0,
            goal_feasible: true,
            explore_rng,
            actions_this_tti: 0,
            reward_scale,
            mode: initial_mode,
            table,
            grid,
            cfg,
        }
    }

    /// Fresh seeded networks; convenient for tests and training bootstrap.
    pub fn with_fresh_networks(
        cfg: AgentConfig,
        table: McsTable,
        grid: GridConfig,
        initial_mode: Mode,
        net_seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(net_seed);
        let qlearner = QLearner::new(&mut rng);
        let ranker = CandidateRanker::new(&mut rng);
        Self::new(cfg, table, grid, initial_mode, qlearner, ranker)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn meta_goal(&self) -> &MetaGoal {
        &self.meta_goal
    }

    pub fn current_action(&self) -> LinkAction {
        self.current_action
    }

    pub fn active_target(&self) -> f64 {
        self.active_target
    }

    pub fn windowed_bler(&self) -> f64 {
        self.situation.windowed_bler()
    }

    pub fn directive_errors(&self) -> u64 {
        self.directive_errors
    }

    pub fn bias_db(&self) -> f64 {
        self.bias_db
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn store_len(&self) -> usize {
        self.store.len()
    }

    pub fn qlearner(&self) -> &QLearner {
        &self.qlearner
    }

    pub fn qlearner_mut(&mut self) -> &mut QLearner {
        &mut self.qlearner
    }

    pub fn ranker(&self) -> &CandidateRanker {
        &self.ranker
    }

    pub fn reward_scale(&self) -> &RewardScale {
        &self.reward_scale
    }

    /// Exploration probability used by the reactive cycle (training only).
    pub fn set_exploration(&mut self, epsilon: f64) {
        self.cfg.explore_epsilon = epsilon;
    }

    /// (encoded state, executed grid action id) of the latest decision, once
    /// past cold start.
    pub fn last_decision(&self) -> Option<(StateVector, usize)> {
        self.last_state.map(|s| (s, self.last_grid_id))
    }

    /// Reward computed for the latest observed outcome.
    pub fn last_reward(&self) -> Option<f64> {
        self.last_reward
    }

    /// Plan this TTI's dispatches: pause/resume apply immediately, every
    /// pending trigger gets a proactive pass (directives in arrival order,
    /// then deviation events, then the periodic review), and exactly one
    /// reactive pass closes the tick. While paused nothing runs.
    pub fn plan_tick(&mut self, now_tti: u64) -> Vec<Invocation> {
        self.now_tti = now_tti;
        let mut triggers: Vec<Trigger> = Vec::new();
        while let Some(d) = self.inbox.pop_front() {
            match d {
                Directive::Pause => self.paused = true,
                Directive::Resume => self.paused = false,
                other => triggers.push(Trigger::Directive(other)),
            }
        }
        if self.paused {
            return Vec::new();
        }
        if let Some(ev) = self.pending_event.take() {
            triggers.push(Trigger::Event(ev));
        }
        if now_tti > 0 && now_tti % self.cfg.periodic_review_ttis == 0 {
            triggers.push(Trigger::PeriodicReview);
        }
        let mut invocations: Vec<Invocation> =
            triggers.into_iter().map(Invocation::Proactive).collect();
        invocations.push(Invocation::Reactive);
        invocations
    }

    /// Proactive runtime pass: deviation check, need synthesis, meta-goal
    /// construction, feasibility check, hand-off.
    pub fn proactive_cycle(&mut self, trigger: &Trigger) -> MetaGoal {
        // Self-monitoring against operational targets.
        let windowed = self.situation.windowed_bler();
        let _bler_deviation = self.situation.is_warm() && windowed > self.active_target;
        let _tpt_deviation = self.situation.is_warm()
            && self.situation.window().mean_delivered_bits() < 0.5 * self.tpt_reference_bits;

        let origin = match trigger {
            Trigger::Directive(d) => {
                match d {
                    Directive::Mode(kind) => self.switch_mode(*kind),
                    Directive::BlerBound(p) => {
                        // Validated at submit time; only ever tightens.
                        self.active_target = *p;
                    }
                    Directive::Pause | Directive::Resume => {}
                }
                GoalOrigin::Directive
            }
            Trigger::Event(_) => GoalOrigin::EventTrigger,
            Trigger::PeriodicReview => GoalOrigin::PeriodicReview,
        };
        let goal = MetaGoal::for_mode(self.mode, origin);
        // Feasibility: can any table action satisfy the bound under the
        // current forecast? If not, the reactive stage resolves to the
        // bound-nearest alternative by cost-benefit (minimal Q-gap).
        self.goal_feasible = self.bound_feasible();
        self.meta_goal = goal.clone();
        goal
    }

    /// Reactive runtime pass: summarize, recall, forecast, propose,
    /// evaluate, reconcile, act.
    pub fn reactive_cycle(&mut self, obs: &Observation) -> LinkAction {
        self.last_cqi = obs.cqi;
        let slope = self.grid.bler_slope_db;
        let current_entry = self
            .table
            .entry(self.current_action.mcs_index())
            .expect("current action within table");

        let action = match self.situation.summarize(self.active_target, current_entry, slope) {
            Err(_) => {
                // Cold start: fall back to the embedded OLLA choice, still
                // passed through the rule base on a partial summary.
                let cqi_sinr = dequantize_cqi(obs.cqi);
                let idx = inner_loop_select(
                    cqi_sinr,
                    self.fallback_olla.offset_db,
                    &self.table,
                    self.mode.bler_target(),
                    slope,
                );
                let proposal = LinkAction::new(idx, default_rank(self.mode));
                let partial = self.partial_summary();
                let fired = self.rules.evaluate(&RuleContext {
                    summary: &partial,
                    mode: self.mode,
                    current: self.current_action,
                    proposed: proposal,
                });
                self.apply_mode_effects(&fired);
                self.last_state = None;
                reconcile(proposal, &fired, self.current_action, self.table.top_index())
            }
            Ok(summary) => {
                let sinr_forecast = self
                    .situation
                    .forecast_sinr()
                    .expect("warm window has a forecast");
                let state = self.encode(obs, &summary);
                let neighbors = self.store.retrieve_similar(&state.0, self.cfg.k_neighbors);
                let neighbor_actions: Vec<LinkAction> =
                    neighbors.iter().map(|r| r.action).collect();
                let candidates = generate_candidates(
                    self.mode,
                    self.current_action,
                    &neighbor_actions,
                    &self.table,
                    &self.ranker,
                    &state,
                    self.cfg.candidate_cap,
                );
                let q = self.qlearner.q_values(&state);

                let explore = self.cfg.explore_epsilon > 0.0
                    && self.explore_rng.random::<f64>() < self.cfg.explore_epsilon;
                let chosen = if explore {
                    let i = self.explore_rng.random_range(0..candidates.len());
                    candidates[i].clone()
                } else {
                    self.validated_selection(&candidates, &q, &sinr_forecast)
                };

                let fired = self.rules.evaluate(&RuleContext {
                    summary: &summary,
                    mode: self.mode,
                    current: self.current_action,
                    proposed: chosen.resulting_action,
                });
                self.apply_mode_effects(&fired);
                let action = reconcile(
                    chosen.resulting_action,
                    &fired,
                    self.current_action,
                    self.table.top_index(),
                );
                self.last_state = Some(state);
                action
            }
        };

        self.last_grid_id = nearest_grid_id(self.current_action, action);
        self.current_action = action;
        self.actions_this_tti += 1;
        action
    }

    /// Greedy selection with closed-loop validation: the best-scoring
    /// candidate whose forecast BLER violates the bound is flagged and the
    /// selection re-evaluated without it; if every candidate violates, fall
    /// back to the lowest-forecast-BLER alternative, ties broken by the
    /// smallest Q-gap to the unconstrained best.
    fn validated_selection(
        &self,
        candidates: &[TechnicalGoal],
        q: &[f64; ACTION_COUNT],
        sinr_forecast: &[f64; FORECAST_HORIZON],
    ) -> TechnicalGoal {
        let mut remaining: Vec<TechnicalGoal> = candidates.to_vec();
        let unconstrained_best = select_goal(candidates, q, self.current_action)
            .expect("candidate grid is never empty");
        while !remaining.is_empty() {
            let best = select_goal(&remaining, q, self.current_action)
                .expect("non-empty remaining set");
            if !self.candidate_violates(best.resulting_action, sinr_forecast) {
                return best;
            }
            remaining.retain(|c| c.resulting_action != best.resulting_action);
        }
        // Bound infeasible under the forecast: nearest alternative by
        // predicted BLER, then minimal |Q - Q_best|.
        let mut fallback: Option<(f64, f64, TechnicalGoal)> = None;
        for c in candidates {
            let worst = self.worst_forecast_bler(c.resulting_action, sinr_forecast);
            let score = q[nearest_grid_id(self.current_action, c.resulting_action)];
            let gap = (unconstrained_best.score - score).abs();
            let better = match &fallback {
                None => true,
                Some((bw, bg, _)) => worst < *bw || (worst == *bw && gap < *bg),
            };
            if better {
                fallback = Some((worst, gap, TechnicalGoal { score, ..c.clone() }));
            }
        }
        fallback.expect("candidates non-empty").2
    }

    fn worst_forecast_bler(
        &self,
        action: LinkAction,
        sinr_forecast: &[f64; FORECAST_HORIZON],
    ) -> f64 {
        let entry = self.table.entry(action.mcs_index()).expect("valid index");
        // The ingested series is corrected for the rank in use, so shift by
        // the penalty difference for the candidate's rank.
        let adj = self.grid.rank_penalty(self.current_action.rank())
            - self.grid.rank_penalty(action.rank());
        sinr_forecast
            .iter()
            .map(|s| bler_with_slope(entry, s + adj, self.grid.bler_slope_db))
            .fold(0.0, f64::max)
    }

    fn candidate_violates(
        &self,
        action: LinkAction,
        sinr_forecast: &[f64; FORECAST_HORIZON],
    ) -> bool {
        self.worst_forecast_bler(action, sinr_forecast) > self.active_target
    }

    /// Can any table action satisfy the active bound under the forecast?
    fn bound_feasible(&self) -> bool {
        match self.situation.forecast_sinr() {
            Err(_) => true,
            Ok(f) => !self.candidate_violates(LinkAction::new(0, 1), &f),
        }
    }

    fn apply_mode_effects(&mut self, fired: &[FiredEffect]) {
        for f in fired {
            if let RuleEffect::ForceMode(mode) = f.effect {
                self.switch_mode(mode);
            }
        }
    }

    fn switch_mode(&mut self, mode: Mode) {
        if mode != self.mode {
            self.mode = mode;
            self.mode_switch_tti = self.now_tti;
            self.active_target = mode.bler_target();
            self.fallback_olla.retarget(mode.bler_target());
            self.bler_streak = 0;
            self.event_armed = true;
        }
    }

    fn encode(&self, obs: &Observation, summary: &SituationSummary) -> StateVector {
        encode_state(&FeatureInputs {
            filtered_sinr_db: summary.filtered_sinr_db,
            sinr_trend_db_per_tti: summary.sinr_trend_db_per_tti,
            cqi: obs.cqi,
            windowed_bler: summary.windowed_bler,
            bler_forecast: summary.bler_forecast,
            current: self.current_action,
            mode: self.mode,
            ttis_since_mode_switch: self.now_tti.saturating_sub(self.mode_switch_tti),
            last_ack: self.last_ack,
            olla_equiv_offset_db: self.bias_db,
        })
    }

    /// Summary substitute while the window is cold: the live windowed BLER
    /// repeated across the forecast horizon.
    fn partial_summary(&self) -> SituationSummary {
        let windowed = self.situation.windowed_bler();
        let trend = self.situation.trend_db_per_tti();
        let vulnerability = windowed > self.active_target;
        SituationSummary {
            filtered_sinr_db: self.situation.filtered_sinr_db(),
            sinr_trend_db_per_tti: trend,
            windowed_bler: windowed,
            bler_forecast: [windowed; FORECAST_HORIZON],
            vulnerability,
            suggested_direction: if vulnerability {
                Direction::Lower
            } else {
                Direction::Hold
            },
        }
    }
}

fn default_rank(mode: Mode) -> u8 {
    match mode {
        Mode::Embb => 2,
        Mode::Urllc => 1,
    }
}

impl LinkController for LaAgent {
    /// Coordinator tick: proactive passes for every pending trigger, then
    /// one reactive pass. Emits exactly one action per TTI (the held action
    /// while paused).
    fn decide(&mut self, obs: &Observation) -> LinkAction {
        self.actions_this_tti = 0;
        let plan = self.plan_tick(obs.tti);
        if plan.is_empty() {
            // Paused: hold.
            self.last_state = None;
            return self.current_action;
        }
        let mut action = self.current_action;
        for invocation in plan {
            match invocation {
                Invocation::Proactive(trigger) => {
                    self.proactive_cycle(&trigger);
                }
                Invocation::Reactive => {
                    action = self.reactive_cycle(obs);
                }
            }
        }
        debug_assert_eq!(self.actions_this_tti, 1);
        action
    }

    fn observe(&mut self, outcome: &TransmissionOutcome) {
        self.last_ack = outcome.ack;
        // Bias calibration: surprise between the realized error and the
        // corrected model prediction drives the offset toward the point
        // where predictions match reality, whatever the policy.
        let raw_sinr = dequantize_cqi(self.last_cqi);
        let corrected = raw_sinr - self.bias_db - self.grid.rank_penalty(outcome.rank);
        if let Some(entry) = self.table.entry(outcome.mcs_index) {
            let predicted = bler_with_slope(entry, corrected, self.grid.bler_slope_db);
            let realized = if outcome.ack { 0.0 } else { 1.0 };
            self.bias_db = (self.bias_db + self.cfg.bias_eta_db * (realized - predicted))
                .clamp(-self.cfg.bias_clamp_db, self.cfg.bias_clamp_db);
        }
        self.situation
            .ingest(corrected, outcome.ack, outcome.delivered_bits);
        outer_loop_update(&mut self.fallback_olla, outcome.ack);
        // Moving throughput reference for proactive deviation checks.
        self.tpt_reference_bits =
            0.9995 * self.tpt_reference_bits + 0.0005 * outcome.delivered_bits as f64;

        let windowed = self.situation.windowed_bler();
        if self.situation.is_warm() && windowed > self.active_target {
            self.bler_streak += 1;
            if self.bler_streak >= self.cfg.event_streak_ttis && self.event_armed {
                self.pending_event = Some(DeviationKind::BlerAboveTarget);
                self.event_armed = false;
            }
        } else {
            self.bler_streak = 0;
            self.event_armed = true;
        }

        let r = crate::learner::reward(
            self.mode,
            outcome,
            windowed,
            &self.table,
            &self.reward_scale,
        );
        self.last_reward = Some(r);

        if self.situation.is_warm()
            && self.now_tti % self.cfg.store_every_ttis == 0
        {
            if let Some(state) = self.last_state {
                self.store.store(EpisodeRecord {
                    state_vector: state.0,
                    action: self.current_action,
                    outcome_reward: r,
                    windowed_bler_after: windowed,
                    timestamp_tti: self.now_tti,
                });
            }
        }
    }

    fn submit_directive(&mut self, raw: &str) -> Result<(), DirectiveError> {
        match parse_directive(raw) {
            Ok(Directive::BlerBound(p)) if p > self.mode.bler_target() => {
                self.directive_errors += 1;
                Err(DirectiveError {
                    raw: alloc::string::ToString::to_string(raw),
                    reason: alloc::format!(
                        "bound {p} would loosen the {} target {}",
                        self.mode.name(),
                        self.mode.bler_target()
                    ),
                })
            }
            Ok(d) => {
                self.inbox.push_back(d);
                Ok(())
            }
            Err(e) => {
                self.directive_errors += 1;
                Err(e)
            }
        }
    }
}

#[cfg(test)]
mod tests;
