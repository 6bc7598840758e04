//! Timed environment events for the simulator.
//!
//! One event per line, `t=<seconds> <event>`; `#` starts a comment.
//!
//! ```text
//! t=10 set battery 19
//! t=20 set gps nofix
//! t=25 set gps fix 1.2
//! t=30 inject wind 3.0 -1.5
//! t=40 mode RTL
//! ```
//!
//! The `set` / `inject` prefixes are optional.

use thiserror::Error;

use super::{SimParams, VehicleState};
use crate::catalog::FlightMode;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioAction {
    Battery(f64),
    Gps { fix: bool, hdop: Option<f64> },
    Hdop(f64),
    Wind { north: f64, east: f64 },
    Mode(FlightMode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioEvent {
    pub at_s: f64,
    pub action: ScenarioAction,
}

pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioEvent>, ScenarioError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |reason: String| ScenarioError::Parse { line, reason };
        let mut words = content.split_whitespace();
        let at_s = words
            .next()
            .and_then(|w| w.strip_prefix("t="))
            .ok_or_else(|| err("expected t=<seconds>".into()))?
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t >= 0.0)
            .ok_or_else(|| err("bad time".into()))?;
        let mut rest: Vec<&str> = words.collect();
        if matches!(rest.first(), Some(&"set") | Some(&"inject")) {
            rest.remove(0);
        }
        let num = |s: Option<&&str>, what: &str| -> Result<f64, ScenarioError> {
            s.and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("expected number for {what}")))
        };
        let action = match rest.first().copied() {
            Some("battery") => {
                let pct = num(rest.get(1), "battery")?;
                if !(0.0..=100.0).contains(&pct) {
                    return Err(err(format!("battery {pct} outside 0..100")));
                }
                ScenarioAction::Battery(pct)
            }
            Some("gps") => {
                let fix = match rest.get(1).copied() {
                    Some("fix") => true,
                    Some("nofix") => false,
                    _ => return Err(err("expected gps fix|nofix".into())),
                };
                let hdop = rest.get(2).map(|_| num(rest.get(2), "hdop")).transpose()?;
                ScenarioAction::Gps { fix, hdop }
            }
            Some("hdop") => ScenarioAction::Hdop(num(rest.get(1), "hdop")?),
            Some("wind") => ScenarioAction::Wind {
                north: num(rest.get(1), "wind north")?,
                east: num(rest.get(2), "wind east")?,
            },
            Some("mode") => {
                let name = rest
                    .get(1)
                    .ok_or_else(|| err("expected mode name".into()))?;
                ScenarioAction::Mode(
                    FlightMode::from_name(name)
                        .ok_or_else(|| err(format!("unknown mode {name}")))?,
                )
            }
            Some(other) => return Err(err(format!("unknown event {other}"))),
            None => return Err(err("missing event".into())),
        };
        events.push(ScenarioEvent { at_s, action });
    }
    events.sort_by(|a, b| a.at_s.total_cmp(&b.at_s));
    Ok(events)
}

/// Applies parsed events as simulated time passes.
#[derive(Debug, Clone, Default)]
pub struct ScenarioScript {
    events: Vec<ScenarioEvent>,
    next: usize,
}

impl ScenarioScript {
    pub fn new(events: Vec<ScenarioEvent>) -> Self {
        Self { events, next: 0 }
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        parse_scenario(text).map(Self::new)
    }

    pub fn is_done(&self) -> bool {
        self.next >= self.events.len()
    }

    /// Applies every event due at or before `t_s`; returns those applied.
    pub fn apply_due(
        &mut self,
        t_s: f64,
        state: &mut VehicleState,
        params: &SimParams,
    ) -> Vec<ScenarioEvent> {
        let mut applied = Vec::new();
        while let Some(ev) = self.events.get(self.next).copied() {
            if ev.at_s > t_s {
                break;
            }
            self.next += 1;
            match ev.action {
                ScenarioAction::Battery(pct) => {
                    state.battery_pct = pct;
                    state.failsafe_check(params);
                }
                ScenarioAction::Gps { fix, hdop } => {
                    state.gps_fix_3d = fix;
                    if let Some(h) = hdop {
                        state.hdop = h;
                    }
                }
                ScenarioAction::Hdop(h) => state.hdop = h,
                ScenarioAction::Wind { north, east } => state.wind = (north, east),
                ScenarioAction::Mode(m) => {
                    state.set_mode(m);
                }
            }
            applied.push(ev);
        }
        applied
    }
}
