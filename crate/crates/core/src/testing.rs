//! Fixed boards shared by unit tests, integration tests and the golden files.

use crate::lattice::GridSpec;
use crate::loading::Occupancy;

/// 6×6 board where the whole grid is the target. The central 2×2 block holds
/// a single atom at (2,2); the top side of ring 1 holds atoms at (1,2) and
/// (1,3).
pub const HAND_TRACE: &str = "\
110101
001100
001001
010000
100110
011011
";

pub fn hand_trace_board() -> Occupancy {
    Occupancy::from_snapshot(HAND_TRACE).expect("fixture parses")
}

pub fn hand_trace_spec() -> GridSpec {
    GridSpec::new(6, 6, 0.5).expect("fixture spec")
}
