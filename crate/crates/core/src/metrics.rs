//! Move-event accounting and the rearrangement time model.
//!
//! Every planner emits a [`MoveLog`]; all counters are derived from it by
//! [`tally`]. `C` and `R` count tweezer ramp events (not atoms), `D` sums the
//! carrying sweeps of the tweezer array in units of the trap spacing.

use serde::{Deserialize, Serialize};

use crate::lattice::{Heading, Site};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Compression,
    Postprocess,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    /// Ramp up the tweezers sitting at `sites`, all at once.
    Capture { sites: Vec<Site> },
    /// Move every held atom `steps` traps along `heading`.
    Travel { heading: Heading, steps: usize },
    /// Drop the held atoms currently at `sites`. `ramp` is false for drops
    /// folded into an uninterrupted sweep, which cost no separate ramp.
    Release { sites: Vec<Site>, ramp: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub op: usize,
    pub stage: Stage,
    pub event: Event,
}

/// Ordered event stream of one planning run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveLog {
    entries: Vec<LogEntry>,
    ops: usize,
}

impl MoveLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of operations (captures followed by travel and releases).
    pub fn op_count(&self) -> usize {
        self.ops
    }

    /// Opens a new operation and returns its id.
    pub fn begin_op(&mut self) -> usize {
        self.ops += 1;
        self.ops - 1
    }

    pub fn push(&mut self, op: usize, stage: Stage, event: Event) {
        debug_assert!(op < self.ops);
        if let Event::Travel { steps, .. } = event {
            debug_assert!(steps >= 1);
        }
        self.entries.push(LogEntry { op, stage, event });
    }

    /// Concatenates `other` after `self`, renumbering its op ids.
    pub fn extend(&mut self, other: MoveLog) {
        let base = self.ops;
        self.entries.extend(other.entries.into_iter().map(|mut e| {
            e.op += base;
            e
        }));
        self.ops += other.ops;
    }
}

/// Ramp and distance counters, split by stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub c_para: u64,
    pub r_para: u64,
    pub d_para: u64,
    pub c_post: u64,
    pub r_post: u64,
    pub d_post: u64,
    /// Sum of per-atom carried distances (diagnostic; not used in `T`).
    pub d_atoms: u64,
}

impl Metrics {
    #[inline]
    pub fn c(&self) -> u64 {
        self.c_para + self.c_post
    }

    #[inline]
    pub fn r(&self) -> u64 {
        self.r_para + self.r_post
    }

    #[inline]
    pub fn d(&self) -> u64 {
        self.d_para + self.d_post
    }

    /// Effective moves, `(C + R) / 2`.
    #[inline]
    pub fn m(&self) -> f64 {
        (self.c() + self.r()) as f64 / 2.0
    }

    #[inline]
    pub fn m_para(&self) -> f64 {
        (self.c_para + self.r_para) as f64 / 2.0
    }

    #[inline]
    pub fn m_post(&self) -> f64 {
        (self.c_post + self.r_post) as f64 / 2.0
    }
}

impl std::ops::Add for Metrics {
    type Output = Metrics;

    fn add(self, o: Metrics) -> Metrics {
        Metrics {
            c_para: self.c_para + o.c_para,
            r_para: self.r_para + o.r_para,
            d_para: self.d_para + o.d_para,
            c_post: self.c_post + o.c_post,
            r_post: self.r_post + o.r_post,
            d_post: self.d_post + o.d_post,
            d_atoms: self.d_atoms + o.d_atoms,
        }
    }
}

pub fn tally(log: &MoveLog) -> Metrics {
    let mut m = Metrics::default();
    // Carried distance since the current op's capture, for d_atoms.
    let mut op = usize::MAX;
    let mut carried = 0u64;
    for e in log.entries() {
        if e.op != op {
            op = e.op;
            carried = 0;
        }
        let (c, r, d) = match e.stage {
            Stage::Compression => (&mut m.c_para, &mut m.r_para, &mut m.d_para),
            Stage::Postprocess => (&mut m.c_post, &mut m.r_post, &mut m.d_post),
        };
        match &e.event {
            Event::Capture { .. } => *c += 1,
            Event::Travel { steps, .. } => {
                *d += *steps as u64;
                carried += *steps as u64;
            }
            Event::Release { sites, ramp } => {
                if *ramp {
                    *r += 1;
                }
                m.d_atoms += sites.len() as u64 * carried;
            }
        }
    }
    m
}

/// Ramp time and per-step travel time, in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    /// Capture/release ramp duration, μs.
    pub t1_us: f64,
    /// Trap spacing, μm.
    pub spacing_um: f64,
    /// Tweezer speed, μm/ms.
    pub speed_um_per_ms: f64,
}

impl Default for TimeModel {
    fn default() -> Self {
        Self {
            t1_us: 30.0,
            spacing_um: 2.0,
            speed_um_per_ms: 100.0,
        }
    }
}

impl TimeModel {
    pub fn new(t1_us: f64, spacing_um: f64, speed_um_per_ms: f64) -> Option<Self> {
        let ok = [t1_us, spacing_um, speed_um_per_ms]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        ok.then_some(Self {
            t1_us,
            spacing_um,
            speed_um_per_ms,
        })
    }

    /// Time to move between adjacent traps, `l / v`, in μs.
    #[inline]
    pub fn t2_us(&self) -> f64 {
        self.spacing_um / self.speed_um_per_ms * 1000.0
    }
}

/// Total rearrangement time `T = (C + R)·t₁ + D·t₂`, μs.
#[inline]
pub fn time_of(m: &Metrics, tm: &TimeModel) -> f64 {
    ramp_and_sweep_time(m.c() + m.r(), m.d(), tm)
}

/// `T` from raw ramp and step counts; shared with schedule export so both
/// evaluate the same floating-point expression.
#[inline]
pub fn ramp_and_sweep_time(ramps: u64, steps: u64, tm: &TimeModel) -> f64 {
    ramps as f64 * tm.t1_us + steps as f64 * tm.t2_us()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_op(log: &mut MoveLog, stage: Stage, lengths: &[usize]) {
        let op = log.begin_op();
        let sites: Vec<Site> = (0..lengths.len()).map(|c| Site::new(0, c)).collect();
        log.push(op, stage, Event::Capture { sites });
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut at = 0;
        for l in sorted {
            log.push(op, stage, Event::Travel { heading: Heading::Down, steps: l - at });
            at = l;
            let n = lengths.iter().filter(|&&x| x == l).count();
            let sites = (0..n).map(|c| Site::new(l, c)).collect();
            log.push(op, stage, Event::Release { sites, ramp: true });
        }
    }

    #[test]
    fn effective_moves() {
        let m = Metrics {
            c_para: 4,
            r_para: 8,
            c_post: 6,
            r_post: 6,
            ..Default::default()
        };
        assert_eq!(m.m(), 12.0);
    }

    #[test]
    fn full_parallel_op_counting() {
        let mut log = MoveLog::new();
        one_op(&mut log, Stage::Compression, &[1, 2, 2, 3]);
        let m = tally(&log);
        assert_eq!((m.c(), m.r(), m.d()), (1, 3, 3));
        assert_eq!(m.d_atoms, 8);
        assert_eq!((m.c_post, m.r_post, m.d_post), (0, 0, 0));
    }

    #[test]
    fn empty_log() {
        assert_eq!(tally(&MoveLog::new()), Metrics::default());
    }

    #[test]
    fn tally_is_additive() {
        let mut a = MoveLog::new();
        one_op(&mut a, Stage::Compression, &[1, 2, 2, 3]);
        let mut b = MoveLog::new();
        one_op(&mut b, Stage::Postprocess, &[4]);
        one_op(&mut b, Stage::Compression, &[2, 5]);
        let (ma, mb) = (tally(&a), tally(&b));
        a.extend(b);
        assert_eq!(tally(&a), ma + mb);
    }

    #[test]
    fn time_examples() {
        let tm = TimeModel::new(30.0, 2.0, 100.0).unwrap();
        assert_eq!(tm.t2_us(), 20.0);
        let m = Metrics {
            c_para: 10,
            r_para: 14,
            d_para: 100,
            ..Default::default()
        };
        assert_eq!(time_of(&m, &tm), 2720.0);
        assert_eq!(time_of(&Metrics::default(), &tm), 0.0);
        let unit = TimeModel::new(1.0, 1.0, 1000.0).unwrap();
        let m = Metrics {
            c_post: 1,
            r_post: 1,
            d_post: 1,
            ..Default::default()
        };
        assert_eq!(time_of(&m, &unit), 3.0);
        assert!(TimeModel::new(0.0, 2.0, 100.0).is_none());
    }

    #[test]
    fn time_is_monotone() {
        let tm = TimeModel::default();
        let base = Metrics {
            c_para: 3,
            r_para: 4,
            d_para: 5,
            ..Default::default()
        };
        let t0 = time_of(&base, &tm);
        for bump in [
            Metrics { c_post: 1, ..Default::default() },
            Metrics { r_post: 1, ..Default::default() },
            Metrics { d_post: 1, ..Default::default() },
        ] {
            assert!(time_of(&(base + bump), &tm) >= t0);
        }
    }
}
