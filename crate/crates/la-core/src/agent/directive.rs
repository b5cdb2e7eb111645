//! Closed directive grammar for operator input.
//!
//! Accepted forms: `mode embb`, `mode urllc`, `bler_bound <p>`, `pause`,
//! `resume`.

use alloc::string::{String, ToString};

use crate::types::Mode;

/// A parsed operator directive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    Mode(Mode),
    /// Tighten the enforced BLER bound (never above the mode's own target).
    BlerBound(f64),
    Pause,
    Resume,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed directive `{raw}`: {reason}")]
pub struct DirectiveError {
    pub raw: String,
    pub reason: String,
}

impl DirectiveError {
    fn new(raw: &str, reason: &str) -> Self {
        Self {
            raw: raw.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Parse one directive line.
pub fn parse_directive(raw: &str) -> Result<Directive, DirectiveError> {
    let tokens: alloc::vec::Vec<&str> = raw.split_whitespace().collect();
    match tokens.as_slice() {
        ["mode", "embb"] => Ok(Directive::Mode(Mode::Embb)),
        ["mode", "urllc"] => Ok(Directive::Mode(Mode::Urllc)),
        ["mode", other] => Err(DirectiveError::new(raw, &alloc::format!("unknown mode `{other}`"))),
        ["bler_bound", value] => {
            let p: f64 = value
                .parse()
                .map_err(|_| DirectiveError::new(raw, "bound is not a number"))?;
            if !(p > 0.0 && p < 1.0) {
                return Err(DirectiveError::new(raw, "bound must lie in (0, 1)"));
            }
            Ok(Directive::BlerBound(p))
        }
        ["pause"] => Ok(Directive::Pause),
        ["resume"] => Ok(Directive::Resume),
        [] => Err(DirectiveError::new(raw, "empty directive")),
        _ => Err(DirectiveError::new(raw, "unknown directive")),
    }
}
