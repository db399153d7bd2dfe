//! Parallel compression stage.
//!
//! Rings are visited once each, from ring 1 outward. On every side of the
//! current ring, atoms whose straight inward line reaches an empty target trap
//! are captured by one row of tweezers and carried inward together; each atom
//! is dropped at the deepest empty target trap its line reaches. Sides run
//! one after another in counterclockwise order and each sees the drops of the
//! previous one.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{layer_of, max_layer, ring_sides, GridSpec, Side, Site};
use crate::loading::Occupancy;
use crate::metrics::{Event, MoveLog, Stage};

/// How the atoms found on one side are batched into tweezer operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    /// One operation per side; the bus stops at every distinct path length.
    Full,
    /// One operation per distinct path length on a side.
    Partial,
    /// One operation per atom.
    Single,
}

impl std::fmt::Display for Parallelism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parallelism::Full => "full",
            Parallelism::Partial => "partial",
            Parallelism::Single => "single",
        })
    }
}

impl std::str::FromStr for Parallelism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Parallelism::Full),
            "partial" => Ok(Parallelism::Partial),
            "single" => Ok(Parallelism::Single),
            other => Err(Error::Parse(format!("protocol `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Protocol {
    pub parallelism: Parallelism,
    /// Count a single release per operation, as if the tweezer row dropped
    /// atoms without stopping.
    pub continuous_release: bool,
}

impl Protocol {
    pub const FULL: Protocol = Protocol::new(Parallelism::Full);
    pub const PARTIAL: Protocol = Protocol::new(Parallelism::Partial);
    pub const SINGLE: Protocol = Protocol::new(Parallelism::Single);

    pub const fn new(parallelism: Parallelism) -> Self {
        Self {
            parallelism,
            continuous_release: false,
        }
    }

    pub const fn with_continuous_release(mut self, on: bool) -> Self {
        self.continuous_release = on;
        self
    }
}

impl Default for Protocol {
    fn default() -> Self {
        Self::FULL
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.parallelism)?;
        if self.continuous_release {
            f.write_str("+cr")?;
        }
        Ok(())
    }
}

/// One atom's straight inward move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub source: Site,
    pub dest: Site,
    pub length: usize,
}

/// One capture, a sweep inward, and one or more releases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferOp {
    pub layer: usize,
    pub side: Side,
    /// In side-traversal order.
    pub assignments: Vec<Assignment>,
}

impl TransferOp {
    pub fn distinct_lengths(&self) -> BTreeSet<usize> {
        self.assignments.iter().map(|a| a.length).collect()
    }

    /// The sweep length of the tweezer row: its longest assignment.
    pub fn bus_distance(&self) -> usize {
        self.assignments.iter().map(|a| a.length).max().unwrap_or(0)
    }

    pub fn captures(&self) -> usize {
        1
    }

    pub fn releases(&self, continuous_release: bool) -> usize {
        if continuous_release {
            1
        } else {
            self.distinct_lengths().len()
        }
    }

    /// Appends capture, sweep and release events to `log`.
    pub fn log_into(&self, log: &mut MoveLog, continuous_release: bool) {
        let op = log.begin_op();
        let heading = self.side.inward();
        let sources = self.assignments.iter().map(|a| a.source).collect();
        log.push(op, Stage::Compression, Event::Capture { sites: sources });
        let mut travelled = 0;
        for (i, length) in self.distinct_lengths().into_iter().enumerate() {
            log.push(
                op,
                Stage::Compression,
                Event::Travel {
                    heading,
                    steps: length - travelled,
                },
            );
            travelled = length;
            let sites = self
                .assignments
                .iter()
                .filter(|a| a.length == length)
                .map(|a| a.dest)
                .collect();
            let ramp = !continuous_release || i == 0;
            log.push(op, Stage::Compression, Event::Release { sites, ramp });
        }
    }
}

/// Movable atoms on `side` of ring `k`.
///
/// From each filled trap on the side, the scan walks inward over sites of
/// rings below `k` and stops at the first filled trap or at the end of the
/// interior. The atom is movable when that clear stretch contains an empty
/// target trap; it is sent to the deepest one.
pub fn find_movable(occ: &Occupancy, spec: &GridSpec, k: usize, side: Side) -> Vec<Assignment> {
    let Ok(ring) = ring_sides(k, spec) else {
        return Vec::new();
    };
    let (h, w) = (occ.height(), occ.width());
    let heading = side.inward();
    ring.side(side)
        .iter()
        .filter(|&&s| occ.is_filled(s))
        .filter_map(|&source| {
            let mut at = source;
            let mut steps = 0;
            let mut best = None;
            while let Some(next) = at.step(heading, h, w) {
                if layer_of(next, spec) >= k || occ.is_filled(next) {
                    break;
                }
                steps += 1;
                at = next;
                if spec.is_target(at) {
                    best = Some((at, steps));
                }
            }
            best.map(|(dest, length)| Assignment {
                source,
                dest,
                length,
            })
        })
        .collect()
}

/// Batches one side's assignments according to `parallelism`.
pub fn plan_side(
    layer: usize,
    side: Side,
    assignments: Vec<Assignment>,
    parallelism: Parallelism,
) -> Vec<TransferOp> {
    if assignments.is_empty() {
        return Vec::new();
    }
    let op = |assignments| TransferOp {
        layer,
        side,
        assignments,
    };
    match parallelism {
        Parallelism::Full => vec![op(assignments)],
        Parallelism::Partial => {
            let lengths: BTreeSet<usize> = assignments.iter().map(|a| a.length).collect();
            lengths
                .into_iter()
                .map(|l| op(assignments.iter().filter(|a| a.length == l).copied().collect()))
                .collect()
        }
        Parallelism::Single => assignments.into_iter().map(|a| op(vec![a])).collect(),
    }
}

/// Moves every atom of `op`. The paths of one op lie on distinct parallel
/// lines, so applying them one by one equals moving them together.
pub fn apply_transfer(occ: &mut Occupancy, op: &TransferOp) -> Result<()> {
    for a in &op.assignments {
        let heading = op.side.inward();
        let mut at = a.source;
        for _ in 0..a.length {
            at = at
                .step(heading, occ.height(), occ.width())
                .ok_or(Error::OutOfBounds(at))?;
            if occ.is_filled(at) {
                return Err(Error::PathBlocked {
                    from: a.source,
                    to: a.dest,
                    at,
                });
            }
        }
        if at != a.dest || !occ.is_filled(a.source) {
            return Err(Error::PathBlocked {
                from: a.source,
                to: a.dest,
                at,
            });
        }
        occ.set(a.source, false);
        occ.set(a.dest, true);
    }
    Ok(())
}

/// Runs the compression stage in place, appending to `log`.
pub fn compress(occ: &mut Occupancy, spec: &GridSpec, protocol: Protocol, log: &mut MoveLog) {
    for k in 1..=max_layer(spec) {
        for side in Side::ORDER {
            let found = find_movable(occ, spec, k, side);
            for op in plan_side(k, side, found, protocol.parallelism) {
                apply_transfer(occ, &op).expect("planned transfer must be clear");
                op.log_into(log, protocol.continuous_release);
            }
        }
    }
}

pub fn run_compression(occ: &Occupancy, spec: &GridSpec, protocol: Protocol) -> (Occupancy, MoveLog) {
    let mut occ = occ.clone();
    let mut log = MoveLog::new();
    compress(&mut occ, spec, protocol, &mut log);
    (occ, log)
}
