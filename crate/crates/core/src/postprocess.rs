//! Postprocess stage: fill leftover target vacancies one at a time with the
//! nearest reservoir atom, using a single tweezer.

use crate::lattice::{layer_of, GridSpec, Site};
use crate::loading::Occupancy;
use crate::metrics::{Event, MoveLog, Stage};
use crate::paths::{distance_field, one_turn_path, shortest_clear_path, Path};

/// One single-atom move into a target vacancy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillMove {
    pub source: Site,
    pub dest: Site,
    pub path: Path,
}

impl FillMove {
    #[inline]
    pub fn length(&self) -> usize {
        self.path.len()
    }

    pub fn log_into(&self, log: &mut MoveLog) {
        let op = log.begin_op();
        log.push(op, Stage::Postprocess, Event::Capture { sites: vec![self.source] });
        for seg in self.path.segments() {
            log.push(
                op,
                Stage::Postprocess,
                Event::Travel {
                    heading: seg.heading,
                    steps: seg.steps,
                },
            );
        }
        log.push(
            op,
            Stage::Postprocess,
            Event::Release {
                sites: vec![self.dest],
                ramp: true,
            },
        );
    }
}

/// Empty target traps, innermost ring first, then by row and column.
pub fn remaining_vacancies(occ: &Occupancy, spec: &GridSpec) -> Vec<Site> {
    let mut out: Vec<Site> = spec.target_sites().filter(|&s| !occ.is_filled(s)).collect();
    out.sort_by_key(|&s| (layer_of(s, spec), s.row, s.col));
    out
}

/// Picks the reservoir atom for `vacancy`.
///
/// Candidates are the filled traps outside the target, in order of Manhattan
/// distance, then row, then column; the first with a clear one-turn path
/// wins. When none has one, the candidate with the shortest clear path of
/// any shape wins, with the same tie-break.
pub fn select_source(occ: &Occupancy, spec: &GridSpec, vacancy: Site) -> Option<(Site, Path)> {
    let mut candidates: Vec<Site> = occ.filled_sites().filter(|&s| !spec.is_target(s)).collect();
    if candidates.is_empty() {
        return None;
    }
    candidates.sort_by_key(|&s| (s.manhattan(vacancy), s.row, s.col));
    if let Some(found) = candidates
        .iter()
        .find_map(|&s| one_turn_path(occ, s, vacancy).map(|p| (s, p)))
    {
        return Some(found);
    }

    // Distances from the vacancy through empty traps; an atom is reachable in
    // one step more than its nearest reached neighbor.
    let dist = distance_field(occ, vacancy);
    let (h, w) = (occ.height(), occ.width());
    let reach = |s: Site| {
        crate::lattice::Heading::ALL
            .iter()
            .filter_map(|&hd| s.step(hd, h, w))
            .map(|n| dist[n.row * w + n.col])
            .min()
            .filter(|&d| d != usize::MAX)
            .map(|d| d + 1)
    };
    let best = candidates
        .iter()
        .filter_map(|&s| reach(s).map(|d| (d, s.row, s.col, s)))
        .min()?;
    let source = best.3;
    let path = shortest_clear_path(occ, source, vacancy)?;
    debug_assert_eq!(path.len(), best.0);
    Some((source, path))
}

/// Runs the postprocess in place. Returns the vacancies no atom could reach.
pub fn postprocess(occ: &mut Occupancy, spec: &GridSpec, log: &mut MoveLog) -> Vec<Site> {
    let mut unfilled = Vec::new();
    for vacancy in remaining_vacancies(occ, spec) {
        match select_source(occ, spec, vacancy) {
            Some((source, path)) => {
                debug_assert!(path.is_clear(occ));
                occ.set(source, false);
                occ.set(vacancy, true);
                FillMove {
                    source,
                    dest: vacancy,
                    path,
                }
                .log_into(log);
            }
            None => unfilled.push(vacancy),
        }
    }
    unfilled
}

pub fn run_postprocess(occ: &Occupancy, spec: &GridSpec) -> (Occupancy, MoveLog, Vec<Site>) {
    let mut occ = occ.clone();
    let mut log = MoveLog::new();
    let unfilled = postprocess(&mut occ, spec, &mut log);
    (occ, log, unfilled)
}
