//! Scenario files: human-writable TOML describing channel, grid, controller
//! and the event timeline of one run.

use std::fs;
use std::path::Path;

use la_core::agent::AgentConfig;
use la_core::linksim::GridConfig;
use la_core::olla::OllaParams;
use la_core::situation::SituationParams;
use la_core::types::Mode;
use serde::Deserialize;

use crate::error::BenchError;

/// Which controller drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Olla,
    Agent,
}

/// A timed operator directive.
#[derive(Debug, Clone, Deserialize)]
pub struct TimedEvent {
    pub t_ms: f64,
    pub directive: String,
}

/// A mean-SINR override over a time range (abrupt at the boundaries).
#[derive(Debug, Clone, Deserialize)]
pub struct SinrSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub mean_sinr_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    mean_sinr_db: f64,
    #[serde(default = "default_correlation")]
    correlation: f64,
    #[serde(default = "default_volatility")]
    volatility_db: f64,
    #[serde(default)]
    impairment_offset_db: f64,
}

fn default_correlation() -> f64 {
    0.995
}

fn default_volatility() -> f64 {
    2.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    prb_count: Option<u32>,
    data_re_per_prb: Option<u32>,
    tti_ms: Option<f64>,
    feedback_delay_ttis: Option<usize>,
    bler_slope_db: Option<f64>,
    rank_penalty_db: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OllaSection {
    step_up_db: Option<f64>,
    offset_clamp_db: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentSection {
    kalman_q: Option<f64>,
    kalman_r: Option<f64>,
    ridge_lambda: Option<f64>,
    ar_forget: Option<f64>,
    median_prefilter: Option<bool>,
    k_neighbors: Option<usize>,
    candidate_cap: Option<usize>,
    store_capacity: Option<usize>,
    store_every_ttis: Option<u64>,
    periodic_review_ttis: Option<u64>,
    event_streak_ttis: Option<u64>,
    bias_eta_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default = "default_seed")]
    seed: u64,
    duration_s: f64,
    controller: ControllerKind,
    #[serde(default = "default_mode")]
    initial_mode: String,
    channel: ChannelSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    olla: OllaSection,
    #[serde(default)]
    agent: AgentSection,
    #[serde(default)]
    events: Vec<TimedEvent>,
    #[serde(default)]
    sinr_profile: Vec<SinrSegment>,
}

fn default_seed() -> u64 {
    1
}

fn default_mode() -> String {
    "embb".into()
}

/// Channel process parameters.
#[derive(Debug, Clone)]
pub struct ChannelParams {
    pub mean_sinr_db: f64,
    pub correlation: f64,
    pub volatility_db: f64,
    pub impairment_offset_db: f64,
}

/// A fully validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub duration_s: f64,
    pub controller: ControllerKind,
    pub initial_mode: Mode,
    pub channel: ChannelParams,
    pub grid: GridConfig,
    pub olla: OllaParams,
    pub agent: AgentConfig,
    /// Events sorted by time.
    pub events: Vec<TimedEvent>,
    /// Non-overlapping segments sorted by start.
    pub sinr_profile: Vec<SinrSegment>,
}

impl Scenario {
    /// Parse and validate a scenario from TOML text.
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| BenchError::InvalidScenario(e.to_string()))?;
        Self::from_file_struct(file)
    }

    /// Load from disk.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| {
            BenchError::InvalidScenario(format!("{}: {e}", path.display()))
        })?;
        let mut s = Self::from_toml(&text)?;
        if s.name.is_empty() {
            s.name = path
                .file_stem()
                .map(|x| x.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into());
        }
        Ok(s)
    }

    fn from_file_struct(file: ScenarioFile) -> Result<Self, BenchError> {
        if !(file.duration_s > 0.0) {
            return Err(BenchError::InvalidScenario(
                "duration_s must be positive".into(),
            ));
        }
        let initial_mode = match file.initial_mode.as_str() {
            "embb" => Mode::Embb,
            "urllc" => Mode::Urllc,
            other => {
                return Err(BenchError::InvalidScenario(format!(
                    "unknown initial_mode `{other}`"
                )))
            }
        };
        let mut events = file.events;
        if events.windows(2).any(|w| w[1].t_ms < w[0].t_ms) {
            return Err(BenchError::InvalidScenario(
                "events must be sorted by t_ms".into(),
            ));
        }
        for e in &events {
            la_core::agent::parse_directive(&e.directive)
                .map_err(|err| BenchError::InvalidScenario(err.to_string()))?;
        }
        events.sort_by(|a, b| a.t_ms.partial_cmp(&b.t_ms).unwrap());

        let mut profile = file.sinr_profile;
        profile.sort_by(|a, b| a.start_s.partial_cmp(&b.start_s).unwrap());
        for seg in &profile {
            if seg.end_s <= seg.start_s {
                return Err(BenchError::InvalidScenario(format!(
                    "sinr_profile segment [{}, {}) is empty",
                    seg.start_s, seg.end_s
                )));
            }
        }
        if profile
            .windows(2)
            .any(|w| w[1].start_s < w[0].end_s)
        {
            return Err(BenchError::InvalidScenario(
                "sinr_profile segments overlap".into(),
            ));
        }

        let mut grid = GridConfig::default();
        if let Some(v) = file.grid.prb_count {
            grid.prb_count = v;
        }
        if let Some(v) = file.grid.data_re_per_prb {
            grid.data_re_per_prb = v;
        }
        if let Some(v) = file.grid.tti_ms {
            grid.tti_ms = v;
        }
        if let Some(v) = file.grid.feedback_delay_ttis {
            grid.feedback_delay_ttis = v;
        }
        if let Some(v) = file.grid.bler_slope_db {
            grid.bler_slope_db = v;
        }
        if let Some(v) = file.grid.rank_penalty_db {
            grid.rank_penalty_db = v;
        }

        let mut olla = OllaParams {
            bler_slope_db: grid.bler_slope_db,
            ..OllaParams::default()
        };
        if let Some(v) = file.olla.step_up_db {
            olla.step_up_db = v;
        }
        if let Some(v) = file.olla.offset_clamp_db {
            olla.offset_clamp_db = v;
        }

        let mut situation = SituationParams::default();
        if let Some(v) = file.agent.kalman_q {
            situation.kalman_q = v;
        }
        if let Some(v) = file.agent.kalman_r {
            situation.kalman_r = v;
        }
        if let Some(v) = file.agent.ridge_lambda {
            situation.ridge_lambda = v;
        }
        if let Some(v) = file.agent.ar_forget {
            situation.ar_forget = v;
        }
        if let Some(v) = file.agent.median_prefilter {
            situation.median_prefilter = v;
        }
        let mut agent = AgentConfig {
            situation,
            olla: olla.clone(),
            seed: file.seed,
            ..AgentConfig::default()
        };
        if let Some(v) = file.agent.k_neighbors {
            agent.k_neighbors = v;
        }
        if let Some(v) = file.agent.candidate_cap {
            agent.candidate_cap = v;
        }
        if let Some(v) = file.agent.store_capacity {
            agent.store_capacity = v;
        }
        if let Some(v) = file.agent.store_every_ttis {
            agent.store_every_ttis = v;
        }
        if let Some(v) = file.agent.periodic_review_ttis {
            agent.periodic_review_ttis = v;
        }
        if let Some(v) = file.agent.event_streak_ttis {
            agent.event_streak_ttis = v;
        }
        if let Some(v) = file.agent.bias_eta_db {
            agent.bias_eta_db = v;
        }

        Ok(Scenario {
            name: file.name,
            seed: file.seed,
            duration_s: file.duration_s,
            controller: file.controller,
            initial_mode,
            channel: ChannelParams {
                mean_sinr_db: file.channel.mean_sinr_db,
                correlation: file.channel.correlation,
                volatility_db: file.channel.volatility_db,
                impairment_offset_db: file.channel.impairment_offset_db,
            },
            grid,
            olla,
            agent,
            events,
            sinr_profile: profile,
        })
    }

    /// Total simulated TTIs.
    pub fn total_ttis(&self) -> u64 {
        (self.duration_s * 1000.0 / self.grid.tti_ms).round() as u64
    }

    /// Copy with a different seed (sweeps, multi-seed acceptance).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        s.agent.seed = seed;
        s
    }
}
