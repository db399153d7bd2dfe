//! Text rendering of boards.

use crate::lattice::{GridSpec, Site};
use crate::loading::Occupancy;

pub const FILLED: char = '●';
pub const EMPTY: char = '○';

/// One character per trap, rows separated by newlines (no trailing newline).
///
/// When the target block is smaller than the grid, target rows carry `[` and
/// `]` around the target columns and the other rows are padded with spaces in
/// the same positions, so columns stay aligned.
pub fn render_board(occ: &Occupancy, spec: &GridSpec) -> String {
    let bracket = spec.target_side() < occ.width().min(occ.height());
    let (lo, hi) = (spec.offset(), spec.offset() + spec.target_side());
    let mut lines = Vec::with_capacity(occ.height());
    for r in 0..occ.height() {
        let in_target = (lo..hi).contains(&r);
        let mut line = String::with_capacity(occ.width() * 3 + 2);
        for c in 0..occ.width() {
            if bracket && c == lo {
                line.push(if in_target { '[' } else { ' ' });
            }
            line.push(if occ.is_filled(Site::new(r, c)) { FILLED } else { EMPTY });
            if bracket && c + 1 == hi {
                line.push(if in_target { ']' } else { ' ' });
            }
        }
        lines.push(line);
    }
    lines.join("\n")
}
