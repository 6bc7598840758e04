//! Scripted attacks against a vehicle/GCS pair and defense scoring.
//!
//! Every scenario flies the same mission: upload home plus four waypoints,
//! arm, take off to 10 m, switch to AUTO, and amend the last waypoint at
//! t = 35 s. The attack starts at `attack_start` (30 s by default).

mod adversary;
pub mod mission;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::FlightMode;
use crate::gcs::{Alert, RuleId};
use crate::session::{Session, SessionConfig};
use crate::signing::SecretKey;
use crate::transport::{LinkError, SimLinkConfig};
use crate::vehicle::{GeoPoint, VehicleEvent};

pub use adversary::{Adversary, AdversaryParams};
pub use mission::{MissionPlan, Operator, Phase};

#[derive(Debug, Error)]
pub enum ThreatError {
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error(transparent)]
    Link(#[from] LinkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attack {
    Eavesdrop,
    Replay,
    Tamper,
    SpoofPosition,
    InjectCommand,
    Flood,
}

impl Attack {
    pub const ALL: [Attack; 6] = [
        Attack::Eavesdrop,
        Attack::Replay,
        Attack::Tamper,
        Attack::SpoofPosition,
        Attack::InjectCommand,
        Attack::Flood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attack::Eavesdrop => "eavesdrop",
            Attack::Replay => "replay",
            Attack::Tamper => "tamper",
            Attack::SpoofPosition => "spoof-position",
            Attack::InjectCommand => "inject-command",
            Attack::Flood => "flood",
        }
    }

    pub fn default_target(self) -> Target {
        match self {
            Attack::SpoofPosition => Target::Gcs,
            _ => Target::Vehicle,
        }
    }

    /// Whether message signing is expected to stop this attack.
    pub fn expected_defended(self, signing: bool) -> bool {
        match self {
            Attack::Replay | Attack::Tamper | Attack::InjectCommand | Attack::SpoofPosition => {
                signing
            }
            Attack::Eavesdrop | Attack::Flood => false,
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attack {
    type Err = ThreatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "eavesdrop" => Attack::Eavesdrop,
            "replay" => Attack::Replay,
            "tamper" => Attack::Tamper,
            "spoof-position" | "spoofposition" | "spoof" => Attack::SpoofPosition,
            "inject-command" | "injectcommand" | "inject" => Attack::InjectCommand,
            "flood" => Attack::Flood,
            _ => return Err(ThreatError::ScenarioInvalid(format!("unknown attack {s}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Vehicle,
    Gcs,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Vehicle => "vehicle",
            Target::Gcs => "gcs",
        })
    }
}

/// Which captured frame a replay re-sends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReplayFrame {
    /// The home mission item (seq 0), which restarts the stored mission.
    Mission,
    Arm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackScenario {
    pub attack: Attack,
    pub target: Target,
    pub link: SimLinkConfig,
    pub signing: bool,
    pub duration_s: f64,
    pub attack_start_s: f64,
    pub seed: u64,
    pub flood_rate_per_s: f64,
    pub replay_frame: ReplayFrame,
    pub home: GeoPoint,
}

impl AttackScenario {
    pub fn new(attack: Attack, signing: bool, seed: u64) -> Self {
        Self {
            attack,
            target: attack.default_target(),
            link: SimLinkConfig::radio(seed),
            signing,
            duration_s: 150.0,
            attack_start_s: 30.0,
            seed,
            flood_rate_per_s: 1000.0,
            replay_frame: ReplayFrame::Mission,
            home: GeoPoint::new(24.68773, 46.72185, 612.0),
        }
    }

    pub fn validate(&self) -> Result<(), ThreatError> {
        let bad = |m: String| Err(ThreatError::ScenarioInvalid(m));
        match (self.attack, self.target) {
            (Attack::Replay | Attack::Tamper | Attack::InjectCommand, Target::Gcs) => {
                return bad(format!("{} only targets the vehicle", self.attack))
            }
            (Attack::SpoofPosition, Target::Vehicle) => {
                return bad("spoof-position only targets the gcs".into())
            }
            _ => {}
        }
        if self.attack == Attack::Flood && self.target == Target::Gcs {
            return bad("flood is modeled on the uplink only; use target=vehicle".into());
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration {} must be positive", self.duration_s));
        }
        if !(self.attack_start_s >= 0.0 && self.attack_start_s < self.duration_s) {
            return bad(format!(
                "attack_start {} must lie inside the duration {}",
                self.attack_start_s, self.duration_s
            ));
        }
        if self.attack == Attack::Flood
            && !(self.flood_rate_per_s > 0.0 && self.flood_rate_per_s.is_finite())
        {
            return bad("flood_rate must be positive".into());
        }
        self.link
            .validate()
            .map_err(|e| ThreatError::ScenarioInvalid(e.to_string()))
    }

    /// Parses `key=value` lines; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ThreatError> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ThreatError::ScenarioInvalid(format!("line {}: expected key=value", i + 1))
            })?;
            kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let attack: Attack = kv
            .remove("attack")
            .ok_or_else(|| ThreatError::ScenarioInvalid("missing attack".into()))?
            .parse()?;
        let seed = take_num(&mut kv, "seed")?.map_or(1, |v: f64| v as u64);
        let mut sc = AttackScenario::new(attack, false, seed);
        if let Some(t) = kv.remove("target") {
            sc.target = match t.to_ascii_lowercase().as_str() {
                "vehicle" => Target::Vehicle,
                "gcs" => Target::Gcs,
                _ => return Err(ThreatError::ScenarioInvalid(format!("unknown target {t}"))),
            };
        }
        if let Some(s) = kv.remove("signing") {
            sc.signing = match s.to_ascii_lowercase().as_str() {
                "on" | "true" | "1" | "yes" => true,
                "off" | "false" | "0" | "no" => false,
                _ => {
                    return Err(ThreatError::ScenarioInvalid(format!(
                        "bad signing value {s}"
                    )))
                }
            };
        }
        if let Some(r) = kv.remove("replay_frame") {
            sc.replay_frame = match r.to_ascii_lowercase().as_str() {
                "mission" | "waypoint" => ReplayFrame::Mission,
                "arm" => ReplayFrame::Arm,
                _ => {
                    return Err(ThreatError::ScenarioInvalid(format!(
                        "bad replay_frame {r}"
                    )))
                }
            };
        }
        if let Some(v) = take_num(&mut kv, "duration")? {
            sc.duration_s = v;
        }
        if let Some(v) = take_num(&mut kv, "attack_start")? {
            sc.attack_start_s = v;
        }
        if let Some(v) = take_num(&mut kv, "flood_rate")? {
            sc.flood_rate_per_s = v;
        }
        if let Some(v) = take_num(&mut kv, "drop")? {
            sc.link.drop_probability = v;
        }
        if let Some(v) = take_num(&mut kv, "corrupt")? {
            sc.link.corrupt_probability = v;
        }
        if let Some(v) = take_num(&mut kv, "delay_ms")? {
            if v < 0.0 {
                return Err(ThreatError::ScenarioInvalid("delay_ms must be >= 0".into()));
            }
            sc.link.delay = Duration::from_secs_f64(v / 1000.0);
        }
        if let Some(v) = take_num(&mut kv, "capacity")? {
            sc.link.capacity_bytes_per_sec = if v <= 0.0 { None } else { Some(v as u32) };
        }
        if let Some(k) = kv.keys().next() {
            return Err(ThreatError::ScenarioInvalid(format!("unknown key {k}")));
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.link.rng_seed = seed;
        self
    }
}

fn take_num(kv: &mut BTreeMap<String, String>, key: &str) -> Result<Option<f64>, ThreatError> {
    kv.remove(key)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| ThreatError::ScenarioInvalid(format!("{key}: not a number: {v}")))
        })
        .transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionResult {
    Completed,
    Diverted,
    Crashed,
    TimedOut,
}

impl fmt::Display for MissionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissionResult::Completed => "completed",
            MissionResult::Diverted => "diverted",
            MissionResult::Crashed => "crashed",
            MissionResult::TimedOut => "timed_out",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub attack: Attack,
    pub target: Target,
    pub signing: bool,
    pub seed: u64,
    pub frames_injected: u64,
    pub frames_accepted_by_victim: u64,
    pub alerts_raised: usize,
    pub alerts_by_rule: BTreeMap<String, usize>,
    pub mission_outcome: MissionResult,
    pub waypoints_reached: Vec<u16>,
    pub decoded_fraction: Option<f64>,
    pub defended: bool,
    pub expected_defended: bool,
    pub matches_expectation: bool,
    #[serde(skip)]
    pub alerts: Vec<Alert>,
    #[serde(skip)]
    pub timeline: Vec<String>,
}

impl AttackReport {
    pub fn count_alerts(&self, rule: RuleId) -> usize {
        self.alerts.iter().filter(|a| a.rule == rule).count()
    }

    /// Stable `key: value` lines.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(": ");
            s.push_str(&v);
            s.push('\n');
        };
        line("attack", self.attack.to_string());
        line("target", self.target.to_string());
        line("signing", if self.signing { "on" } else { "off" }.into());
        line("seed", self.seed.to_string());
        line("frames_injected", self.frames_injected.to_string());
        line(
            "frames_accepted_by_victim",
            self.frames_accepted_by_victim.to_string(),
        );
        line("alerts_raised", self.alerts_raised.to_string());
        for (rule, n) in &self.alerts_by_rule {
            line(&format!("alerts.{rule}"), n.to_string());
        }
        line("mission_outcome", self.mission_outcome.to_string());
        line(
            "waypoints_reached",
            self.waypoints_reached
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        if let Some(f) = self.decoded_fraction {
            line("decoded_fraction", format!("{f:.3}"));
        }
        line("defended", self.defended.to_string());
        line("expected_defended", self.expected_defended.to_string());
        line(
            "verdict",
            if self.matches_expectation {
                "PASS"
            } else {
                "FAIL"
            }
            .into(),
        );
        s
    }
}

fn score_outcome(session: &Session, plan: &MissionPlan, auto_entered: bool) -> MissionResult {
    let state = &session.vehicle.state;
    if state.collided() {
        return MissionResult::Crashed;
    }
    let mission_altered = state.mission.len() != plan.items.len()
        || state.mission.iter().any(|i| !plan.is_legitimate(i));
    let mut in_auto = false;
    let mut left_auto = false;
    for e in &state.log {
        if let VehicleEvent::ModeChanged { from, to } = e.event {
            if to == FlightMode::Auto {
                in_auto = true;
            } else if from == FlightMode::Auto && in_auto {
                left_auto = true;
            }
        }
    }
    let reached = state.reached_waypoints();
    let completed_in_order = reached == (1..plan.items.len() as u16).collect::<Vec<_>>();
    if completed_in_order && !left_auto && !mission_altered && auto_entered {
        MissionResult::Completed
    } else if left_auto || mission_altered {
        MissionResult::Diverted
    } else {
        MissionResult::TimedOut
    }
}

/// Runs one scenario to completion.
pub fn run_scenario(sc: &AttackScenario) -> Result<AttackReport, ThreatError> {
    sc.validate()?;
    let key = sc.signing.then(|| {
        use rand::SeedableRng;
        SecretKey::generate(&mut rand_chacha::ChaCha8Rng::seed_from_u64(
            sc.seed ^ 0x005E_C2E7,
        ))
    });
    let cfg = SessionConfig {
        link: sc.link.clone(),
        key,
        home: sc.home,
        ..SessionConfig::default()
    };
    let mut session = Session::new(cfg)?;
    let start = session.now_us();
    let params = AdversaryParams {
        attack: sc.attack,
        epoch_us: start,
        start_us: start + (sc.attack_start_s * 1e6) as u64,
        flood_rate_per_s: sc.flood_rate_per_s,
        replay_frame: sc.replay_frame,
        spoof_rate_hz: 4.0,
    };
    let mut adversary = Adversary::new(params, sc.seed, Arc::new(session.clock().clone()));
    let mut operator = Operator::new(MissionPlan::standard(sc.home, sc.seed));

    let end = start + (sc.duration_s * 1e6) as u64;
    while session.now_us() < end {
        operator.drive(&mut session);
        session.step(&mut adversary);
    }

    let tally = session.tally();
    let (accepted, alerts) = match sc.target {
        Target::Vehicle => (tally.accepted_by_vehicle, session.vehicle.alerts().to_vec()),
        Target::Gcs => (tally.accepted_by_gcs, session.gcs.alerts().to_vec()),
    };
    let auto_entered = operator.phase == Phase::Flying;
    let outcome = score_outcome(&session, &operator.plan, auto_entered);
    let decoded_fraction = (sc.attack == Attack::Eavesdrop).then(|| adversary.decoded_fraction());
    let defended = match sc.attack {
        Attack::Eavesdrop => decoded_fraction == Some(0.0),
        _ => accepted == 0 && outcome == MissionResult::Completed,
    };
    let expected_defended = sc.attack.expected_defended(sc.signing);
    let mut alerts_by_rule = BTreeMap::new();
    for a in &alerts {
        *alerts_by_rule.entry(a.rule.to_string()).or_insert(0) += 1;
    }
    let mut timeline: Vec<String> = operator.notes.clone();
    timeline.extend(adversary.log.iter().cloned());
    timeline.extend(
        session
            .vehicle
            .state
            .log
            .iter()
            .map(|e| format!("t={:.2} vehicle {}", e.t_s, e.event)),
    );
    let stamp = |line: &String| {
        line.strip_prefix("t=")
            .and_then(|r| r.split(' ').next())
            .and_then(|t| t.parse::<f64>().ok())
            .unwrap_or(f64::MAX)
    };
    timeline.sort_by(|a, b| stamp(a).total_cmp(&stamp(b)));
    Ok(AttackReport {
        attack: sc.attack,
        target: sc.target,
        signing: sc.signing,
        seed: sc.seed,
        frames_injected: tally.injected,
        frames_accepted_by_victim: accepted,
        alerts_raised: alerts.len(),
        alerts_by_rule,
        mission_outcome: outcome,
        waypoints_reached: session.vehicle.state.reached_waypoints(),
        decoded_fraction,
        defended,
        expected_defended,
        matches_expectation: defended == expected_defended,
        alerts,
        timeline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixCell {
    pub attack: Attack,
    pub signing: bool,
    pub defended: bool,
    pub expected_defended: bool,
    pub report: AttackReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix {
    pub seed: u64,
    pub cells: Vec<MatrixCell>,
}

impl ScoreMatrix {
    pub fn all_match(&self) -> bool {
        self.cells.iter().all(|c| c.defended == c.expected_defended)
    }

    pub fn cell(&self, attack: Attack, signing: bool) -> Option<&MatrixCell> {
        self.cells
            .iter()
            .find(|c| c.attack == attack && c.signing == signing)
    }

    pub fn render_text(&self) -> String {
        let word = |d: bool| if d { "defended" } else { "not-defended" };
        let mut s = format!("matrix seed: {}\n", self.seed);
        s.push_str(&format!(
            "{:<16} {:<14} {:<14} {}\n",
            "attack", "signing=off", "signing=on", "verdict"
        ));
        for attack in Attack::ALL {
            let off = self.cell(attack, false);
            let on = self.cell(attack, true);
            let ok = [off, on]
                .iter()
                .flatten()
                .all(|c| c.defended == c.expected_defended);
            s.push_str(&format!(
                "{:<16} {:<14} {:<14} {}\n",
                attack.name(),
                off.map_or("-", |c| word(c.defended)),
                on.map_or("-", |c| word(c.defended)),
                if ok { "PASS" } else { "FAIL" }
            ));
        }
        s.push_str(&format!(
            "matrix: {}\n",
            if self.all_match() { "PASS" } else { "FAIL" }
        ));
        s
    }
}

/// Runs every given scenario and scores it against the expected table.
pub fn score_matrix(scenarios: &[AttackScenario]) -> Result<ScoreMatrix, ThreatError> {
    let mut cells = Vec::new();
    for sc in scenarios {
        let report = run_scenario(sc)?;
        cells.push(MatrixCell {
            attack: sc.attack,
            signing: sc.signing,
            defended: report.defended,
            expected_defended: report.expected_defended,
            report,
        });
    }
    Ok(ScoreMatrix {
        seed: scenarios.first().map_or(0, |s| s.seed),
        cells,
    })
}

/// The 6 attacks x {signing off, on} grid at `seed`.
pub fn full_grid(seed: u64) -> Vec<AttackScenario> {
    Attack::ALL
        .iter()
        .flat_map(|&a| [false, true].map(|signing| AttackScenario::new(a, signing, seed)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_scenario_file() {
        let sc = AttackScenario::parse(
            "attack=inject_command\nsigning=on\nseed=7\n# note\nduration=90\nattack_start=20\ndrop=0.01\n",
        )
        .unwrap();
        assert_eq!(sc.attack, Attack::InjectCommand);
        assert!(sc.signing);
        assert_eq!(sc.seed, 7);
        assert_eq!(sc.duration_s, 90.0);
        assert_eq!(sc.link.drop_probability, 0.01);
    }

    #[test]
    fn invalid_scenarios() {
        for text in [
            "attack=inject\ntarget=gcs\n",
            "attack=spoof\ntarget=vehicle\n",
            "attack=replay\nduration=10\nattack_start=20\n",
            "attack=flood\nflood_rate=0\n",
            "attack=teleport\n",
            "attack=replay\nbogus=1\n",
            "attack=replay\ndrop=2\n",
            "signing=on\n",
        ] {
            assert!(
                matches!(
                    AttackScenario::parse(text),
                    Err(ThreatError::ScenarioInvalid(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn clean_mission_completes() {
        // Eavesdropping changes nothing on the wire.
        let r = run_scenario(&AttackScenario::new(Attack::Eavesdrop, false, 3)).unwrap();
        assert_eq!(
            r.mission_outcome,
            MissionResult::Completed,
            "{:#?}",
            r.timeline
        );
        assert_eq!(r.waypoints_reached, vec![1, 2, 3, 4]);
        assert_eq!(r.decoded_fraction, Some(1.0));
        assert_eq!(r.frames_injected, 0);
        assert_eq!(r.alerts_raised, 0, "{:?}", r.alerts);
    }
}
