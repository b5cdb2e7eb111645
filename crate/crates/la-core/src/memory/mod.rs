//! Long-term memory: episodic experience store with nearest-neighbor
//! retrieval, plus the deterministic rule base. The static MCS property
//! table lives in [`crate::linksim`].

mod rules;
mod store;

pub use rules::{
    CapSpec, FiredEffect, Rule, RuleContext, RuleEffect, RuleParseError, RuleSet, DEFAULT_RULES,
};
pub use store::{EpisodeRecord, EpisodeStore, STORE_CAPACITY};
