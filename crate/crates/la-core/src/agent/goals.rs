//! The goal hierarchy: abstract meta-goals refined into technical goals
//! that terminate in a link action.

use crate::types::{LinkAction, Mode};

/// Strategic objective attached to a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaxThroughput,
    MinLatency,
}

/// What put a meta-goal on the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalOrigin {
    Directive,
    EventTrigger,
    PeriodicReview,
}

/// Abstract operational objective emitted by the proactive runtime.
///
/// The constructor ties objective and BLER bound to the mode: URLLC is
/// latency-first under a 0.1% bound, eMBB is throughput-first under 10%.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaGoal {
    pub mode: Mode,
    pub objective: Objective,
    pub bler_bound: f64,
    pub origin: GoalOrigin,
}

impl MetaGoal {
    pub fn for_mode(mode: Mode, origin: GoalOrigin) -> Self {
        let objective = match mode {
            Mode::Embb => Objective::MaxThroughput,
            Mode::Urllc => Objective::MinLatency,
        };
        Self {
            mode,
            objective,
            bler_bound: mode.bler_target(),
            origin,
        }
    }

    /// The mode/objective/bound coupling the constructor guarantees.
    pub fn invariant_holds(&self) -> bool {
        match self.mode {
            Mode::Embb => {
                self.objective == Objective::MaxThroughput && self.bler_bound == 0.10
            }
            Mode::Urllc => {
                self.objective == Objective::MinLatency && self.bler_bound == 0.001
            }
        }
    }
}

/// Family of a candidate adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalKind {
    AdjustModulation,
    AdjustCodeRate,
    AdjustRank,
}

/// A concrete candidate: the action it resolves to plus its evaluation
/// score (a Q-value filled in at selection time).
#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalGoal {
    pub kind: GoalKind,
    /// MCS-index step, or the rank step for pure rank changes.
    pub delta: i8,
    pub resulting_action: LinkAction,
    pub score: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_goal_invariants_by_construction() {
        let e = MetaGoal::for_mode(Mode::Embb, GoalOrigin::PeriodicReview);
        assert!(e.invariant_holds());
        assert_eq!(e.objective, Objective::MaxThroughput);
        assert_eq!(e.bler_bound, 0.10);
        let u = MetaGoal::for_mode(Mode::Urllc, GoalOrigin::Directive);
        assert!(u.invariant_holds());
        assert_eq!(u.objective, Objective::MinLatency);
        assert_eq!(u.bler_bound, 0.001);
    }
}
