//! Rule-based link anomaly detection.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::signing::RejectReason;
use crate::transport::LinkStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleId {
    HeartbeatGap,
    SeqLossSpike,
    TimestampAnomaly,
    FloodRate,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleId::HeartbeatGap => "heartbeat-gap",
            RuleId::SeqLossSpike => "seq-loss-spike",
            RuleId::TimestampAnomaly => "timestamp-anomaly",
            RuleId::FloodRate => "flood-rate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorConfig {
    pub heartbeat_period_s: f64,
    /// HeartbeatGap fires when silence exceeds this many periods.
    pub heartbeat_gap_factor: f64,
    pub loss_window_s: f64,
    pub loss_threshold: f64,
    /// Minimum expected frames in the window before loss is judged.
    pub loss_min_expected: u64,
    pub flood_window_s: f64,
    pub flood_rate_per_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            heartbeat_period_s: 1.0,
            heartbeat_gap_factor: 3.0,
            loss_window_s: 10.0,
            loss_threshold: 0.25,
            loss_min_expected: 20,
            flood_window_s: 1.0,
            flood_rate_per_s: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alert {
    pub rule: RuleId,
    pub at_us: u64,
    /// Observed value: seconds of silence, drop ratio, frames per second,
    /// or rejection count.
    pub value: f64,
    pub threshold: f64,
    pub window_s: f64,
    pub count: u64,
    pub detail: String,
}

impl fmt::Display for Alert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alert rule={} t={:.3} value={:.3} threshold={:.3} window={:.1} count={}",
            self.rule,
            self.at_us as f64 / 1e6,
            self.value,
            self.threshold,
            self.window_s,
            self.count
        )?;
        if !self.detail.is_empty() {
            write!(f, " detail={}", self.detail)?;
        }
        Ok(())
    }
}

/// What the detector needs to know about the remote end.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeerStatus {
    pub last_heartbeat_us: Option<u64>,
    pub stats: LinkStats,
}

#[derive(Debug, Clone)]
pub struct Detector {
    cfg: DetectorConfig,
    arrivals: VecDeque<u64>,
    rejections: Vec<(u64, RejectReason)>,
    loss_samples: VecDeque<(u64, u64, u64)>,
    gap_latched: Option<u64>,
    loss_latched: bool,
    flood_latched: bool,
}

impl Detector {
    pub fn new(cfg: DetectorConfig) -> Self {
        Self {
            cfg,
            arrivals: VecDeque::new(),
            rejections: Vec::new(),
            loss_samples: VecDeque::new(),
            gap_latched: None,
            loss_latched: false,
            flood_latched: false,
        }
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    /// Any frame arriving on the link, valid or not.
    pub fn observe_frame(&mut self, now_us: u64) {
        self.arrivals.push_back(now_us);
    }

    /// Unsigned frames refused by a signing endpoint are not anomalies of
    /// their own; only frames that carried a signature are recorded.
    pub fn observe_rejection(&mut self, now_us: u64, reason: RejectReason) {
        if reason != RejectReason::Unsigned {
            self.rejections.push((now_us, reason));
        }
    }

    /// Evaluates every rule at `now_us`.
    pub fn step(&mut self, peer: &PeerStatus, now_us: u64) -> Vec<Alert> {
        let mut alerts = Vec::new();
        let cfg = self.cfg.clone();

        for (at_us, reason) in self.rejections.drain(..) {
            alerts.push(Alert {
                rule: RuleId::TimestampAnomaly,
                at_us,
                value: 1.0,
                threshold: 0.0,
                window_s: 0.0,
                count: 1,
                detail: reason.to_string(),
            });
        }

        if let Some(last) = peer.last_heartbeat_us {
            let gap_s = now_us.saturating_sub(last) as f64 / 1e6;
            let limit = cfg.heartbeat_period_s * cfg.heartbeat_gap_factor;
            if gap_s > limit && self.gap_latched != Some(last) {
                self.gap_latched = Some(last);
                alerts.push(Alert {
                    rule: RuleId::HeartbeatGap,
                    at_us: now_us,
                    value: gap_s,
                    threshold: limit,
                    window_s: limit,
                    count: 0,
                    detail: format!("last={:.3}", last as f64 / 1e6),
                });
            }
        }

        let window_us = (cfg.flood_window_s * 1e6) as u64;
        while self
            .arrivals
            .front()
            .is_some_and(|&t| t + window_us <= now_us)
        {
            self.arrivals.pop_front();
        }
        let rate = self.arrivals.len() as f64 / cfg.flood_window_s;
        if rate > cfg.flood_rate_per_s {
            if !self.flood_latched {
                self.flood_latched = true;
                alerts.push(Alert {
                    rule: RuleId::FloodRate,
                    at_us: now_us,
                    value: rate,
                    threshold: cfg.flood_rate_per_s,
                    window_s: cfg.flood_window_s,
                    count: self.arrivals.len() as u64,
                    detail: String::new(),
                });
            }
        } else {
            self.flood_latched = false;
        }

        let loss_window_us = (cfg.loss_window_s * 1e6) as u64;
        self.loss_samples
            .push_back((now_us, peer.stats.received, peer.stats.lost));
        while self
            .loss_samples
            .front()
            .is_some_and(|&(t, _, _)| t + loss_window_us < now_us)
        {
            self.loss_samples.pop_front();
        }
        let (_, r0, l0) = *self.loss_samples.front().expect("just pushed");
        let received = peer.stats.received.saturating_sub(r0);
        let lost = peer.stats.lost.saturating_sub(l0);
        let expected = received + lost;
        let ratio = if expected == 0 {
            0.0
        } else {
            lost as f64 / expected as f64
        };
        if expected >= cfg.loss_min_expected && ratio > cfg.loss_threshold {
            if !self.loss_latched {
                self.loss_latched = true;
                alerts.push(Alert {
                    rule: RuleId::SeqLossSpike,
                    at_us: now_us,
                    value: ratio,
                    threshold: cfg.loss_threshold,
                    window_s: cfg.loss_window_s,
                    count: lost,
                    detail: format!("expected={expected}"),
                });
            }
        } else if ratio <= cfg.loss_threshold {
            self.loss_latched = false;
        }
        alerts
    }
}

/// Functional form of [`Detector::step`].
pub fn detector_step(detector: &mut Detector, peer: &PeerStatus, now_us: u64) -> Vec<Alert> {
    detector.step(peer, now_us)
}
