//! Loss accounting from the 8-bit sequence counter.

/// Gaps at or above this are read as reordering, not loss.
pub const REORDER_THRESHOLD: u8 = 128;

/// Per-sender sequence-gap statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LinkStats {
    pub last_seq: Option<u8>,
    pub received: u64,
    pub lost: u64,
}

impl LinkStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, seq: u8) {
        if let Some(last) = self.last_seq {
            let gap = seq.wrapping_sub(last).wrapping_sub(1);
            if gap < REORDER_THRESHOLD {
                self.lost += u64::from(gap);
            }
        }
        self.received += 1;
        self.last_seq = Some(seq);
    }

    pub fn expected(&self) -> u64 {
        self.received + self.lost
    }

    /// `lost / (lost + received)`, 0 before anything arrives.
    pub fn drop_ratio(&self) -> f64 {
        match self.expected() {
            0 => 0.0,
            n => self.lost as f64 / n as f64,
        }
    }
}

/// Functional form of [`LinkStats::update`].
pub fn stats_update(mut stats: LinkStats, seq: u8) -> LinkStats {
    stats.update(seq);
    stats
}
