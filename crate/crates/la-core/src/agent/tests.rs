use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::learner::action_id;
use crate::linksim::{ChannelState, LinkSim};
use crate::memory::RuleSet;

fn test_agent(mode: Mode) -> LaAgent {
    LaAgent::with_fresh_networks(
        AgentConfig::default(),
        McsTable::standard(),
        GridConfig::default(),
        mode,
        7,
    )
}

fn obs(tti: u64, cqi: u8, mode: Mode) -> Observation {
    Observation {
        tti,
        cqi,
        ack_history_bit: true,
        delivered_bits: 0,
        mode_flag: mode,
    }
}

/// Drive agent and simulator together for `ttis`, returning emitted actions.
fn run_loop(agent: &mut LaAgent, sim: &mut LinkSim, ttis: u64) -> Vec<LinkAction> {
    let mut actions = Vec::new();
    for t in 0..ttis {
        let o = obs(t, sim.cqi().unwrap_or(0), agent.mode());
        let a = agent.decide(&o);
        let out = sim.transmit(a, t).unwrap();
        agent.observe(&out);
        sim.advance();
        actions.push(a);
    }
    actions
}

fn sim(mean: f64, seed: u64) -> LinkSim {
    LinkSim::new(
        ChannelState::new(mean, 0.995, 2.0, -2.0, seed),
        McsTable::standard(),
        GridConfig::default(),
    )
}

mod coordinator {
    use super::*;

    #[test]
    fn no_triggers_plans_reactive_only() {
        let mut a = test_agent(Mode::Embb);
        assert_eq!(a.plan_tick(5), vec![Invocation::Reactive]);
    }

    #[test]
    fn directive_plans_proactive_then_reactive_and_switches_mode() {
        let mut a = test_agent(Mode::Embb);
        a.submit_directive("mode urllc").unwrap();
        let plan = a.plan_tick(5);
        assert_eq!(
            plan,
            vec![
                Invocation::Proactive(Trigger::Directive(Directive::Mode(Mode::Urllc))),
                Invocation::Reactive
            ]
        );
        // Execute through decide: mode must be URLLC before the reactive pass.
        let mut b = test_agent(Mode::Embb);
        b.submit_directive("mode urllc").unwrap();
        let action = b.decide(&obs(1, 8, Mode::Embb));
        assert_eq!(b.mode(), Mode::Urllc);
        assert_eq!(action.rank(), 1);
        assert_eq!(b.meta_goal().origin, GoalOrigin::Directive);
    }

    #[test]
    fn two_directives_processed_in_arrival_order() {
        let mut a = test_agent(Mode::Embb);
        a.submit_directive("mode urllc").unwrap();
        a.submit_directive("mode embb").unwrap();
        let plan = a.plan_tick(1);
        assert_eq!(
            plan,
            vec![
                Invocation::Proactive(Trigger::Directive(Directive::Mode(Mode::Urllc))),
                Invocation::Proactive(Trigger::Directive(Directive::Mode(Mode::Embb))),
                Invocation::Reactive
            ]
        );
        let mut b = test_agent(Mode::Embb);
        b.submit_directive("mode urllc").unwrap();
        b.submit_directive("mode embb").unwrap();
        b.decide(&obs(1, 8, Mode::Embb));
        assert_eq!(b.mode(), Mode::Embb);
    }

    #[test]
    fn malformed_directives_counted_and_skipped() {
        let mut a = test_agent(Mode::Embb);
        assert!(a.submit_directive("mode sideways").is_err());
        assert!(a.submit_directive("launch").is_err());
        assert_eq!(a.directive_errors(), 2);
        assert_eq!(a.plan_tick(1), vec![Invocation::Reactive]);
    }

    #[test]
    fn loosening_bler_bound_is_rejected() {
        let mut a = test_agent(Mode::Urllc);
        assert!(a.submit_directive("bler_bound 0.01").is_err());
        assert!(a.submit_directive("bler_bound 0.0005").is_ok());
        a.decide(&obs(1, 8, Mode::Urllc));
        assert_eq!(a.active_target(), 0.0005);
    }

    #[test]
    fn periodic_review_every_2000_ttis() {
        let mut a = test_agent(Mode::Embb);
        assert_eq!(a.plan_tick(1999), vec![Invocation::Reactive]);
        assert_eq!(
            a.plan_tick(2000),
            vec![
                Invocation::Proactive(Trigger::PeriodicReview),
                Invocation::Reactive
            ]
        );
        assert_eq!(a.plan_tick(0), vec![Invocation::Reactive]);
    }

    #[test]
    fn pause_holds_action_and_resume_releases() {
        let mut a = test_agent(Mode::Embb);
        let mut s = sim(20.0, 3);
        run_loop(&mut a, &mut s, 10);
        let held = a.current_action();
        a.submit_directive("pause").unwrap();
        for t in 10..20 {
            let act = a.decide(&obs(t, s.cqi().unwrap_or(0), a.mode()));
            assert_eq!(act, held);
            let out = s.transmit(act, t).unwrap();
            agent_observe_paused(&mut a, &out);
            s.advance();
        }
        a.submit_directive("resume").unwrap();
        assert_eq!(a.plan_tick(20), vec![Invocation::Reactive]);
    }

    fn agent_observe_paused(a: &mut LaAgent, out: &TransmissionOutcome) {
        a.observe(out);
    }

    #[test]
    fn one_action_per_tti_and_deterministic_stream() {
        let actions_a = {
            let mut a = test_agent(Mode::Embb);
            let mut s = sim(24.0, 5);
            run_loop(&mut a, &mut s, 2000)
        };
        let actions_b = {
            let mut a = test_agent(Mode::Embb);
            let mut s = sim(24.0, 5);
            run_loop(&mut a, &mut s, 2000)
        };
        assert_eq!(actions_a.len(), 2000);
        assert_eq!(actions_a, actions_b);
    }
}

mod proactive {
    use super::*;

    #[test]
    fn urllc_directive_yields_latency_goal() {
        let mut a = test_agent(Mode::Embb);
        let goal =
            a.proactive_cycle(&Trigger::Directive(Directive::Mode(Mode::Urllc)));
        assert_eq!(goal.mode, Mode::Urllc);
        assert_eq!(goal.objective, Objective::MinLatency);
        assert_eq!(goal.bler_bound, 0.001);
        assert_eq!(goal.origin, GoalOrigin::Directive);
        assert!(goal.invariant_holds());
    }

    #[test]
    fn sustained_bler_breach_fires_event_trigger() {
        let mut a = test_agent(Mode::Embb);
        let mut s = sim(20.0, 9);
        // Warm up cleanly first.
        run_loop(&mut a, &mut s, 150);
        // Force a long breach: feed synthetic all-NACK outcomes.
        let nack = TransmissionOutcome {
            tti: 0,
            ack: false,
            tbs_bits: 1000,
            delivered_bits: 0,
            bler_prob: 0.9,
            mcs_index: a.current_action().mcs_index(),
            rank: a.current_action().rank(),
        };
        let mut fired = None;
        for t in 150..1500 {
            let _ = a.decide(&obs(t, 8, Mode::Embb));
            a.observe(&nack);
            if let Some(Invocation::Proactive(Trigger::Event(ev))) =
                a.plan_tick(t + 1).into_iter().next()
            {
                fired = Some((t, ev));
                break;
            }
        }
        let (_, ev) = fired.expect("event trigger must fire after 500-TTI breach");
        assert_eq!(ev, DeviationKind::BlerAboveTarget);
        let goal = a.proactive_cycle(&Trigger::Event(ev));
        assert_eq!(goal.origin, GoalOrigin::EventTrigger);
        assert_eq!(goal.bler_bound, 0.10);
    }

    #[test]
    fn periodic_review_without_deviation_is_idempotent() {
        let mut a = test_agent(Mode::Embb);
        let g1 = a.proactive_cycle(&Trigger::PeriodicReview);
        let g2 = a.proactive_cycle(&Trigger::PeriodicReview);
        assert_eq!(g1, g2);
        assert_eq!(a.meta_goal(), &g2);
    }
}

mod reactive {
    use super::*;

    #[test]
    fn cold_start_emits_fallback_olla_choice() {
        let mut a = test_agent(Mode::Embb);
        let mut s = sim(20.0, 11);
        // TTI 50 is inside the 100-TTI cold start window.
        let actions = run_loop(&mut a, &mut s, 51);
        let tti: u64 = 50;
        let o = obs(tti, s.cqi().unwrap_or(0), Mode::Embb);
        // Recompute the expected fallback with an identical shadow state:
        // replay the loop to grab the agent's fallback offset indirectly by
        // confirming the emitted action equals the inner-loop pick at that
        // offset. With no NACK-free guarantee we assert through a fresh
        // agent driven the same way.
        let mut b = test_agent(Mode::Embb);
        let mut s2 = sim(20.0, 11);
        let actions_b = run_loop(&mut b, &mut s2, 51);
        assert_eq!(actions[tti as usize], actions_b[tti as usize]);
        // And the emitted rank follows the eMBB default.
        assert_eq!(actions[tti as usize].rank(), 2);
        let _ = o;
    }

    #[test]
    fn cold_start_action_matches_inner_loop_select_exactly() {
        // All-ACK channel keeps the fallback offset drifting only by the
        // ACK step; replicate it and compare against the op output.
        let mut a = test_agent(Mode::Embb);
        let mut shadow = OllaState::new(
            AgentConfig::default().olla.step_up_db,
            Mode::Embb.bler_target(),
            AgentConfig::default().olla.offset_clamp_db,
        );
        let mut s = sim(30.0, 13); // high SINR: ACKs essentially certain
        for t in 0..50u64 {
            let cqi = s.cqi().unwrap_or(0);
            let a_act = a.decide(&obs(t, cqi, Mode::Embb));
            let want_idx = inner_loop_select(
                dequantize_cqi(cqi),
                shadow.offset_db,
                &McsTable::standard(),
                0.10,
                0.5,
            );
            assert_eq!(a_act.mcs_index(), want_idx, "tti {t}");
            let out = s.transmit(a_act, t).unwrap();
            a.observe(&out);
            outer_loop_update(&mut shadow, out.ack);
            s.advance();
        }
    }

    #[test]
    fn vulnerability_never_raises_mcs() {
        let mut a = test_agent(Mode::Embb);
        let mut s = sim(22.0, 17);
        run_loop(&mut a, &mut s, 150);
        let current = a.current_action();
        // Craft a vulnerable summary by slamming the channel downward hard;
        // the emitted action must not exceed the current MCS.
        s.channel_mut().shift_mean(2.0);
        for t in 150..170 {
            let o = obs(t, s.cqi().unwrap_or(0), Mode::Embb);
            let act = a.decide(&o);
            assert!(
                act.mcs_index() <= current.mcs_index().max(a.current_action().mcs_index()),
                "raised into a collapse at tti {t}"
            );
            let out = s.transmit(act, t).unwrap();
            a.observe(&out);
            s.advance();
        }
    }

    #[test]
    fn urllc_run_keeps_rank_one_and_decrements_on_breach() {
        let mut a = test_agent(Mode::Urllc);
        let mut s = sim(24.0, 19);
        let mut prev_mcs = a.current_action().mcs_index();
        let mut prev_wbler = 0.0;
        for t in 0..4000u64 {
            let o = obs(t, s.cqi().unwrap_or(0), Mode::Urllc);
            let act = a.decide(&o);
            assert_eq!(act.rank(), 1, "tti {t}: URLLC must stay rank 1");
            if prev_wbler > 0.001 && prev_mcs > 0 {
                assert!(
                    act.mcs_index() < prev_mcs,
                    "tti {t}: breach (wbler {prev_wbler}) must force decrement"
                );
            }
            let out = s.transmit(act, t).unwrap();
            a.observe(&out);
            s.advance();
            prev_mcs = act.mcs_index();
            prev_wbler = a.windowed_bler();
        }
    }
}

mod candidates {
    use super::*;
    use crate::learner::CandidateRanker;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ranker() -> CandidateRanker {
        CandidateRanker::new(&mut ChaCha8Rng::seed_from_u64(1))
    }

    fn state() -> StateVector {
        StateVector([0.1; crate::types::STATE_DIM])
    }

    #[test]
    fn mid_table_embb_yields_ten_candidates() {
        let c = generate_candidates(
            Mode::Embb,
            LinkAction::new(10, 1),
            &[],
            &McsTable::standard(),
            &ranker(),
            &state(),
            12,
        );
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn bottom_of_table_clips_deltas() {
        let c = generate_candidates(
            Mode::Urllc,
            LinkAction::new(0, 1),
            &[],
            &McsTable::standard(),
            &ranker(),
            &state(),
            12,
        );
        // Deltas -2/-1 clip onto 0: three distinct MCS survive, rank pinned.
        assert_eq!(c.len(), 3);
        let mcs: Vec<u8> = c.iter().map(|g| g.resulting_action.mcs_index()).collect();
        assert!(mcs.contains(&0) && mcs.contains(&1) && mcs.contains(&2));
    }

    #[test]
    fn neighbor_actions_join_the_set() {
        let c = generate_candidates(
            Mode::Embb,
            LinkAction::new(10, 1),
            &[LinkAction::new(14, 2)],
            &McsTable::standard(),
            &ranker(),
            &state(),
            12,
        );
        assert_eq!(c.len(), 11);
        assert!(c
            .iter()
            .any(|g| g.resulting_action == LinkAction::new(14, 2)));
    }

    #[test]
    fn candidate_cap_enforced() {
        let neighbors: Vec<LinkAction> =
            (15..25).map(|m| LinkAction::new(m, 1)).collect();
        let c = generate_candidates(
            Mode::Embb,
            LinkAction::new(10, 1),
            &neighbors,
            &McsTable::standard(),
            &ranker(),
            &state(),
            12,
        );
        assert_eq!(c.len(), 12);
    }

    #[test]
    fn goal_kinds_follow_table_structure() {
        let table = McsTable::standard();
        // 9 -> 11 crosses the QPSK/16QAM boundary.
        let g = classify_goal(LinkAction::new(9, 1), LinkAction::new(11, 1), &table);
        assert_eq!(g.kind, GoalKind::AdjustModulation);
        let g2 = classify_goal(LinkAction::new(20, 1), LinkAction::new(21, 1), &table);
        assert_eq!(g2.kind, GoalKind::AdjustCodeRate);
        let g3 = classify_goal(LinkAction::new(20, 1), LinkAction::new(20, 2), &table);
        assert_eq!(g3.kind, GoalKind::AdjustRank);
        assert_eq!(g3.delta, 1);
    }
}

mod selection {
    use super::*;

    fn goal(mcs: u8, rank: u8) -> TechnicalGoal {
        classify_goal(LinkAction::new(10, 1), LinkAction::new(mcs, rank), &McsTable::standard())
    }

    #[test]
    fn single_candidate_wins() {
        let q = [0.0; ACTION_COUNT];
        let g = select_goal(&[goal(11, 1)], &q, LinkAction::new(10, 1)).unwrap();
        assert_eq!(g.resulting_action, LinkAction::new(11, 1));
    }

    #[test]
    fn empty_candidates_error() {
        let q = [0.0; ACTION_COUNT];
        assert_eq!(
            select_goal(&[], &q, LinkAction::new(10, 1)),
            Err(AgentError::EmptyCandidates)
        );
    }

    #[test]
    fn equal_q_prefers_smaller_move_then_lower_rank() {
        let q = [1.0; ACTION_COUNT];
        let g = select_goal(
            &[goal(12, 1), goal(11, 1)],
            &q,
            LinkAction::new(10, 1),
        )
        .unwrap();
        assert_eq!(g.resulting_action.mcs_index(), 11);
        let g2 = select_goal(
            &[goal(11, 2), goal(11, 1)],
            &q,
            LinkAction::new(10, 1),
        )
        .unwrap();
        assert_eq!(g2.resulting_action.rank(), 1);
    }

    #[test]
    fn hand_set_q_argmax() {
        let mut q = [0.0; ACTION_COUNT];
        q[action_id(-1, 1)] = 1.0;
        q[action_id(0, 1)] = 2.0;
        q[action_id(1, 1)] = 0.5;
        let g = select_goal(
            &[goal(9, 1), goal(10, 1), goal(11, 1)],
            &q,
            LinkAction::new(10, 1),
        )
        .unwrap();
        assert_eq!(g.resulting_action.mcs_index(), 10);
        assert_eq!(g.score, 2.0);
    }
}

mod reconciliation {
    use super::*;
    use crate::situation::FORECAST_HORIZON;

    fn summary(wbler: f64, vulnerability: bool) -> SituationSummary {
        SituationSummary {
            filtered_sinr_db: 20.0,
            sinr_trend_db_per_tti: 0.0,
            windowed_bler: wbler,
            bler_forecast: [if vulnerability { 1.0 } else { 0.0 }; FORECAST_HORIZON],
            vulnerability,
            suggested_direction: Direction::Hold,
        }
    }

    fn fired(summary: &SituationSummary, mode: Mode, current: LinkAction, proposed: LinkAction) -> Vec<FiredEffect> {
        RuleSet::builtin().evaluate(&RuleContext {
            summary,
            mode,
            current,
            proposed,
        })
    }

    #[test]
    fn urllc_breach_decrements_below_current() {
        let s = summary(0.002, false);
        let current = LinkAction::new(10, 1);
        let proposed = LinkAction::new(11, 2);
        let effects = fired(&s, Mode::Urllc, current, proposed);
        let out = reconcile(proposed, &effects, current, 28);
        assert_eq!(out, LinkAction::new(9, 1));
    }

    #[test]
    fn clean_embb_is_identity() {
        let s = summary(0.01, false);
        let current = LinkAction::new(10, 2);
        let proposed = LinkAction::new(12, 2);
        let effects = fired(&s, Mode::Embb, current, proposed);
        assert!(effects.is_empty());
        assert_eq!(reconcile(proposed, &effects, current, 28), proposed);
    }

    #[test]
    fn decrement_saturates_at_zero() {
        let s = summary(0.002, false);
        let current = LinkAction::new(0, 1);
        let proposed = LinkAction::new(0, 1);
        let effects = fired(&s, Mode::Urllc, current, proposed);
        let out = reconcile(proposed, &effects, current, 28);
        assert_eq!(out.mcs_index(), 0);
    }

    #[test]
    fn embb_overload_caps_below_current() {
        let s = summary(0.15, false);
        let current = LinkAction::new(14, 2);
        let proposed = LinkAction::new(16, 2);
        let effects = fired(&s, Mode::Embb, current, proposed);
        let out = reconcile(proposed, &effects, current, 28);
        assert_eq!(out.mcs_index(), 13);
    }

    #[test]
    fn veto_raise_holds_current() {
        let s = summary(0.0, true);
        let current = LinkAction::new(10, 2);
        let proposed = LinkAction::new(12, 2);
        let effects = fired(&s, Mode::Embb, current, proposed);
        let out = reconcile(proposed, &effects, current, 28);
        assert_eq!(out.mcs_index(), 10);
    }
}
