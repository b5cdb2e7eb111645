//! Drive one scenario TTI by TTI and aggregate KPIs.

use std::collections::VecDeque;
use std::time::Instant;

use la_core::agent::LaAgent;
use la_core::linksim::{ChannelState, LinkSim, McsTable, Observation};
use la_core::olla::OllaController;
use la_core::types::Mode;
use la_core::LinkController;

use crate::checkpoint::Checkpoint;
use crate::error::BenchError;
use crate::kpi::{KpiSample, RunSummary};
use crate::latency::latency_probe;
use crate::scenario::{ControllerKind, Scenario};

/// KPI window length in milliseconds.
pub const KPI_WINDOW_MS: f64 = 100.0;

/// Runner-side rolling BLER window, matching the agent's history length.
const BLER_WINDOW_TTIS: usize = 100;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Record per-decision wall-clock timings.
    pub timing: bool,
    /// Record the per-TTI rolling windowed BLER (memory heavy; used by the
    /// adaptation-speed analysis).
    pub trace_windowed_bler: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub samples: Vec<KpiSample>,
    pub summary: RunSummary,
    /// Per-decision latencies in milliseconds, when timing was enabled.
    pub decision_latencies_ms: Option<Vec<f64>>,
    /// Rolling 100-TTI windowed BLER per TTI, when tracing was enabled.
    pub windowed_bler_trace: Option<Vec<f32>>,
}

/// Execute a scenario deterministically.
pub fn run_scenario(
    scenario: &Scenario,
    checkpoint: Option<&Checkpoint>,
    opts: &RunOptions,
) -> Result<RunResult, BenchError> {
    let table = McsTable::standard();
    let channel = ChannelState::new(
        scenario.channel.mean_sinr_db,
        scenario.channel.correlation,
        scenario.channel.volatility_db,
        scenario.channel.impairment_offset_db,
        scenario.seed,
    );
    let mut sim = LinkSim::new(channel, table.clone(), scenario.grid.clone());

    let mut controller: Box<dyn LinkController> = match scenario.controller {
        ControllerKind::Olla => Box::new(OllaController::new(
            scenario.olla.clone(),
            scenario.initial_mode,
            table.clone(),
        )),
        ControllerKind::Agent => {
            let ck = checkpoint.ok_or_else(|| {
                BenchError::CheckpointMissing("<agent run without checkpoint>".into())
            })?;
            let (qlearner, ranker) = ck.instantiate()?;
            Box::new(LaAgent::new(
                scenario.agent.clone(),
                table.clone(),
                scenario.grid.clone(),
                scenario.initial_mode,
                qlearner,
                ranker,
            ))
        }
    };

    let total_ttis = scenario.total_ttis();
    let window_ttis = (KPI_WINDOW_MS / scenario.grid.tti_ms).round() as u64;
    if window_ttis == 0 {
        return Err(BenchError::InvalidScenario(
            "KPI window shorter than one TTI".into(),
        ));
    }

    let mut samples = Vec::with_capacity((total_ttis / window_ttis) as usize);
    let mut latencies: Vec<f64> = Vec::new();
    if opts.timing {
        latencies.reserve(total_ttis as usize);
    }
    let mut bler_trace: Vec<f32> = Vec::new();
    if opts.trace_windowed_bler {
        bler_trace.reserve(total_ttis as usize);
    }

    // Rolling audit window (independent re-derivation of the agent's view).
    let mut ack_window: VecDeque<bool> = VecDeque::with_capacity(BLER_WINDOW_TTIS + 1);
    let mut window_nacks: u64 = 0;

    let mut mode = scenario.initial_mode;
    let mut next_event = 0usize;
    let mut next_segment = 0usize;
    let mut segment_active: Option<usize> = None;

    let mut last_ack = true;
    let mut last_delivered = 0u64;
    let mut prev_mcs = 0u8;
    let mut have_prev_action = false;

    // Window accumulators.
    let mut win_bits = 0u64;
    let mut win_nacks = 0u64;
    let mut win_blocks = 0u64;
    let mut win_mcs_sum = 0u64;
    let mut win_rank_sum = 0u64;

    // Totals.
    let mut total_bits = 0u64;
    let mut total_nacks = 0u64;
    let mut rank_violations = 0u64;
    let mut decrement_violations = 0u64;

    for tti in 0..total_ttis {
        let t_ms = tti as f64 * scenario.grid.tti_ms;

        // Timed directives.
        while next_event < scenario.events.len() && scenario.events[next_event].t_ms <= t_ms {
            let ev = &scenario.events[next_event];
            match la_core::agent::parse_directive(&ev.directive) {
                Ok(la_core::agent::Directive::Mode(m)) => mode = m,
                Ok(_) => {}
                Err(e) => log::warn!("skipping bad directive at {} ms: {e}", ev.t_ms),
            }
            if let Err(e) = controller.submit_directive(&ev.directive) {
                log::warn!("controller rejected directive at {} ms: {e}", ev.t_ms);
            }
            next_event += 1;
        }

        // Abrupt mean-SINR profile segments.
        let t_s = t_ms / 1000.0;
        if let Some(idx) = segment_active {
            if t_s >= scenario.sinr_profile[idx].end_s {
                sim.channel_mut().shift_mean(scenario.channel.mean_sinr_db);
                segment_active = None;
            }
        }
        if segment_active.is_none()
            && next_segment < scenario.sinr_profile.len()
            && t_s >= scenario.sinr_profile[next_segment].start_s
        {
            sim.channel_mut()
                .shift_mean(scenario.sinr_profile[next_segment].mean_sinr_db);
            segment_active = Some(next_segment);
            next_segment += 1;
        }

        let windowed_bler_now = if ack_window.is_empty() {
            0.0
        } else {
            window_nacks as f64 / ack_window.len() as f64
        };

        let obs = Observation {
            tti,
            cqi: sim.cqi().unwrap_or(0),
            ack_history_bit: last_ack,
            delivered_bits: last_delivered,
            mode_flag: mode,
        };

        let action = if opts.timing {
            let t0 = Instant::now();
            let a = controller.decide(&obs);
            latencies.push(t0.elapsed().as_secs_f64() * 1e3);
            a
        } else {
            controller.decide(&obs)
        };

        // URLLC safety audit, derived independently of the agent internals.
        if mode == Mode::Urllc {
            if action.rank() != 1 {
                rank_violations += 1;
            }
            if windowed_bler_now > 0.001 && have_prev_action && prev_mcs > 0 {
                if action.mcs_index() >= prev_mcs {
                    decrement_violations += 1;
                }
            }
        }

        let outcome = sim
            .transmit(action, tti)
            .map_err(|e| BenchError::Sim(e.to_string()))?;
        controller.observe(&outcome);
        sim.advance();

        // Rolling audit window update.
        ack_window.push_back(outcome.ack);
        if !outcome.ack {
            window_nacks += 1;
        }
        while ack_window.len() > BLER_WINDOW_TTIS {
            if !ack_window.pop_front().unwrap() {
                window_nacks -= 1;
            }
        }
        if opts.trace_windowed_bler {
            bler_trace.push((window_nacks as f64 / ack_window.len() as f64) as f32);
        }

        last_ack = outcome.ack;
        last_delivered = outcome.delivered_bits;
        prev_mcs = action.mcs_index();
        have_prev_action = true;

        win_bits += outcome.delivered_bits;
        win_blocks += 1;
        if !outcome.ack {
            win_nacks += 1;
        }
        win_mcs_sum += u64::from(action.mcs_index());
        win_rank_sum += u64::from(action.rank());

        total_bits += outcome.delivered_bits;
        if !outcome.ack {
            total_nacks += 1;
        }

        if (tti + 1) % window_ttis == 0 {
            let sample_idx = (tti + 1) / window_ttis - 1;
            samples.push(KpiSample {
                sample_idx,
                t_ms: ((tti + 1) as f64 * scenario.grid.tti_ms).round() as u64,
                dl_tpt_mbps: win_bits as f64 / (KPI_WINDOW_MS * 1e3),
                bler: win_nacks as f64 / win_blocks as f64,
                mcs_mean: win_mcs_sum as f64 / win_blocks as f64,
                rank_mean: win_rank_sum as f64 / win_blocks as f64,
                mode,
            });
            win_bits = 0;
            win_nacks = 0;
            win_blocks = 0;
            win_mcs_sum = 0;
            win_rank_sum = 0;
        }
    }

    let mean_tpt = if samples.is_empty() {
        0.0
    } else {
        samples.iter().map(|s| s.dl_tpt_mbps).sum::<f64>() / samples.len() as f64
    };
    let (latency_p50_ms, latency_p99_ms) = if opts.timing {
        let rep = latency_probe(&latencies)?;
        (Some(rep.p50_ms), Some(rep.p99_ms))
    } else {
        (None, None)
    };
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        controller: match scenario.controller {
            ControllerKind::Olla => "olla".into(),
            ControllerKind::Agent => "agent".into(),
        },
        samples: samples.len(),
        duration_s: scenario.duration_s,
        mean_dl_tpt_mbps: mean_tpt,
        mean_bler: total_nacks as f64 / total_ttis.max(1) as f64,
        total_delivered_bits: total_bits,
        total_transport_blocks: total_ttis,
        total_nacks,
        urllc_rank_violations: rank_violations,
        urllc_decrement_violations: decrement_violations,
        latency_p50_ms,
        latency_p99_ms,
    };

    Ok(RunResult {
        samples,
        summary,
        decision_latencies_ms: opts.timing.then_some(latencies),
        windowed_bler_trace: opts.trace_windowed_bler.then_some(bler_trace),
    })
}
