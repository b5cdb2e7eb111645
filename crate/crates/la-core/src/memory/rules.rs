//! Deterministic rule base for mode safety and protocol compliance.
//!
//! Rules are totally ordered by priority (then id) and evaluated against the
//! current situation summary, active mode and the proposed action. The base
//! is loadable from a small line-oriented text form; the shipped defaults
//! are embedded.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::situation::{Direction, SituationSummary};
use crate::types::{LinkAction, Mode};

/// Shipped rule base.
///
/// r1: in URLLC, any windowed BLER above the 0.1% bound forces an MCS
///     decrement below the current action.
/// r2: URLLC transmits single-layer for latency.
/// r3: in eMBB, windowed BLER above the 10% bound caps MCS below current.
/// r4: a vulnerable forecast vetoes rate raises.
pub const DEFAULT_RULES: &str = "\
rule r1 priority 0 when mode == urllc and windowed_bler > 0.001 then force_mcs_decrement
rule r2 priority 1 when mode == urllc then force_rank 1
rule r3 priority 2 when mode == embb and windowed_bler > 0.10 then cap_mcs current-1
rule r4 priority 3 when vulnerability == true then veto_goal raise
";

/// What a fired rule does to the pending action or goal.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleEffect {
    ForceMode(Mode),
    CapMcs(CapSpec),
    ForceMcsDecrement,
    ForceRank(u8),
    VetoGoal(Direction),
}

/// Cap argument: absolute index or relative to the current action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapSpec {
    Absolute(u8),
    CurrentMinus(u8),
}

/// Everything a guard can look at.
#[derive(Debug, Clone)]
pub struct RuleContext<'a> {
    pub summary: &'a SituationSummary,
    pub mode: Mode,
    pub current: LinkAction,
    pub proposed: LinkAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
enum FieldValue {
    Num(f64),
    Mode(Mode),
    Bool(bool),
    Direction(Direction),
}

#[derive(Debug, Clone, PartialEq)]
struct Condition {
    field: String,
    op: CmpOp,
    value: FieldValue,
}

/// One guarded effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    pub priority: i32,
    conditions: Vec<Condition>,
    pub effect: RuleEffect,
}

/// An effect that fired, tagged with its source rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FiredEffect {
    pub rule_id: String,
    pub effect: RuleEffect,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rule parse error on line {line}: {message}")]
pub struct RuleParseError {
    pub line: usize,
    pub message: String,
}

/// Immutable, priority-ordered rule base.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    /// Parse the text form. Rules are sorted by (priority, id) at load so
    /// insertion order never matters.
    pub fn parse(text: &str) -> Result<Self, RuleParseError> {
        let mut rules = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            rules.push(parse_rule_line(line, lineno + 1)?);
        }
        let mut set = Self { rules };
        set.rules
            .sort_by(|a, b| a.priority.cmp(&b.priority).then(a.id.cmp(&b.id)));
        Ok(set)
    }

    /// The embedded default base.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_RULES).expect("default rules parse")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// All firing effects, in priority order.
    pub fn evaluate(&self, ctx: &RuleContext<'_>) -> Vec<FiredEffect> {
        self.rules
            .iter()
            .filter(|r| r.conditions.iter().all(|c| eval_condition(c, ctx)))
            .map(|r| FiredEffect {
                rule_id: r.id.clone(),
                effect: r.effect.clone(),
            })
            .collect()
    }
}

fn eval_condition(cond: &Condition, ctx: &RuleContext<'_>) -> bool {
    let actual = match cond.field.as_str() {
        "mode" => FieldValue::Mode(ctx.mode),
        "windowed_bler" => FieldValue::Num(ctx.summary.windowed_bler),
        "vulnerability" => FieldValue::Bool(ctx.summary.vulnerability),
        "filtered_sinr" => FieldValue::Num(ctx.summary.filtered_sinr_db),
        "sinr_trend" => FieldValue::Num(ctx.summary.sinr_trend_db_per_tti),
        "suggested_direction" => FieldValue::Direction(ctx.summary.suggested_direction),
        "current_mcs" => FieldValue::Num(f64::from(ctx.current.mcs_index())),
        "current_rank" => FieldValue::Num(f64::from(ctx.current.rank())),
        "proposed_mcs" => FieldValue::Num(f64::from(ctx.proposed.mcs_index())),
        "proposed_rank" => FieldValue::Num(f64::from(ctx.proposed.rank())),
        _ => return false,
    };
    match (&actual, &cond.value) {
        (FieldValue::Num(a), FieldValue::Num(b)) => match cond.op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Gt => a > b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Le => a <= b,
        },
        (a, b) => match cond.op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => false,
        },
    }
}

fn parse_rule_line(line: &str, lineno: usize) -> Result<Rule, RuleParseError> {
    let err = |message: String| RuleParseError {
        line: lineno,
        message,
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    // rule <id> priority <n> when <cond> [and <cond>]* then <effect>
    if tokens.len() < 4 || tokens[0] != "rule" || tokens[2] != "priority" {
        return Err(err("expected `rule <id> priority <n> ...`".to_string()));
    }
    let id = tokens[1].to_string();
    let priority: i32 = tokens[3]
        .parse()
        .map_err(|_| err(format!("bad priority `{}`", tokens[3])))?;

    let then_pos = tokens
        .iter()
        .position(|t| *t == "then")
        .ok_or_else(|| err("missing `then`".to_string()))?;

    let mut conditions = Vec::new();
    if tokens.len() > 4 && tokens[4] == "when" {
        let cond_tokens = &tokens[5..then_pos];
        for chunk in cond_tokens.split(|t| *t == "and") {
            if chunk.len() != 3 {
                return Err(err(format!("bad condition `{}`", chunk.join(" "))));
            }
            conditions.push(parse_condition(chunk[0], chunk[1], chunk[2], lineno)?);
        }
    } else if then_pos != 4 {
        return Err(err("expected `when` or `then` after priority".to_string()));
    }

    let effect_tokens = &tokens[then_pos + 1..];
    let effect = parse_effect(effect_tokens, lineno)?;
    Ok(Rule {
        id,
        priority,
        conditions,
        effect,
    })
}

fn parse_condition(
    field: &str,
    op: &str,
    value: &str,
    lineno: usize,
) -> Result<Condition, RuleParseError> {
    let err = |message: String| RuleParseError {
        line: lineno,
        message,
    };
    const FIELDS: [&str; 10] = [
        "mode",
        "windowed_bler",
        "vulnerability",
        "filtered_sinr",
        "sinr_trend",
        "suggested_direction",
        "current_mcs",
        "current_rank",
        "proposed_mcs",
        "proposed_rank",
    ];
    if !FIELDS.contains(&field) {
        return Err(err(format!("unknown field `{field}`")));
    }
    let op = match op {
        "==" => CmpOp::Eq,
        "!=" => CmpOp::Ne,
        ">" => CmpOp::Gt,
        "<" => CmpOp::Lt,
        ">=" => CmpOp::Ge,
        "<=" => CmpOp::Le,
        other => return Err(err(format!("unknown operator `{other}`"))),
    };
    let value = match value {
        "embb" => FieldValue::Mode(Mode::Embb),
        "urllc" => FieldValue::Mode(Mode::Urllc),
        "true" => FieldValue::Bool(true),
        "false" => FieldValue::Bool(false),
        "raise" => FieldValue::Direction(Direction::Raise),
        "hold" => FieldValue::Direction(Direction::Hold),
        "lower" => FieldValue::Direction(Direction::Lower),
        num => FieldValue::Num(
            num.parse::<f64>()
                .map_err(|_| err(format!("bad value `{num}`")))?,
        ),
    };
    Ok(Condition {
        field: field.to_string(),
        op,
        value,
    })
}

fn parse_effect(tokens: &[&str], lineno: usize) -> Result<RuleEffect, RuleParseError> {
    let err = |message: String| RuleParseError {
        line: lineno,
        message,
    };
    match tokens {
        ["force_mcs_decrement"] => Ok(RuleEffect::ForceMcsDecrement),
        ["force_rank", r] => {
            let rank: u8 = r.parse().map_err(|_| err(format!("bad rank `{r}`")))?;
            if !(1..=2).contains(&rank) {
                return Err(err(format!("rank `{rank}` out of range")));
            }
            Ok(RuleEffect::ForceRank(rank))
        }
        ["force_mode", m] => match *m {
            "embb" => Ok(RuleEffect::ForceMode(Mode::Embb)),
            "urllc" => Ok(RuleEffect::ForceMode(Mode::Urllc)),
            other => Err(err(format!("bad mode `{other}`"))),
        },
        ["cap_mcs", spec] => {
            if let Some(rest) = spec.strip_prefix("current-") {
                let k: u8 = rest
                    .parse()
                    .map_err(|_| err(format!("bad cap `{spec}`")))?;
                Ok(RuleEffect::CapMcs(CapSpec::CurrentMinus(k)))
            } else {
                let n: u8 = spec
                    .parse()
                    .map_err(|_| err(format!("bad cap `{spec}`")))?;
                Ok(RuleEffect::CapMcs(CapSpec::Absolute(n)))
            }
        }
        ["veto_goal", d] => match *d {
            "raise" => Ok(RuleEffect::VetoGoal(Direction::Raise)),
            "hold" => Ok(RuleEffect::VetoGoal(Direction::Hold)),
            "lower" => Ok(RuleEffect::VetoGoal(Direction::Lower)),
            other => Err(err(format!("bad direction `{other}`"))),
        },
        other => Err(err(format!("unknown effect `{}`", other.join(" ")))),
    }
}
