//! Collision-free lattice paths.
//!
//! A path runs along lines joining adjacent traps. Every site it visits after
//! its origin must be empty at execution time; the origin holds the atom being
//! moved.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{Heading, Site};
use crate::loading::Occupancy;

/// Ordered lattice walk where consecutive waypoints are neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    waypoints: Vec<Site>,
}

/// A straight run of a [`Path`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub heading: Heading,
    pub steps: usize,
}

impl Path {
    /// Builds a path from waypoints, checking that consecutive sites are
    /// lattice neighbors.
    pub fn from_waypoints(waypoints: Vec<Site>) -> Option<Self> {
        let ok = !waypoints.is_empty()
            && waypoints.windows(2).all(|w| w[0].manhattan(w[1]) == 1);
        ok.then_some(Self { waypoints })
    }

    /// Concatenated straight runs through the given corner points.
    fn through(corners: &[Site]) -> Self {
        let mut waypoints = vec![corners[0]];
        for pair in corners.windows(2) {
            let (mut at, to) = (pair[0], pair[1]);
            if at == to {
                continue;
            }
            let h = Heading::between(at, to).expect("corners must be collinear");
            while at != to {
                at = step_unbounded(at, h);
                waypoints.push(at);
            }
        }
        Self { waypoints }
    }

    #[inline]
    pub fn waypoints(&self) -> &[Site] {
        &self.waypoints
    }

    #[inline]
    pub fn from(&self) -> Site {
        self.waypoints[0]
    }

    #[inline]
    pub fn to(&self) -> Site {
        *self.waypoints.last().unwrap()
    }

    /// Number of unit steps.
    #[inline]
    pub fn len(&self) -> usize {
        self.waypoints.len() - 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Run-length encoding into straight segments.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out: Vec<Segment> = Vec::new();
        for w in self.waypoints.windows(2) {
            let h = Heading::between(w[0], w[1]).expect("waypoints are neighbors");
            match out.last_mut() {
                Some(seg) if seg.heading == h => seg.steps += 1,
                _ => out.push(Segment { heading: h, steps: 1 }),
            }
        }
        out
    }

    /// Whether every site after the origin is empty in `occ`.
    pub fn is_clear(&self, occ: &Occupancy) -> bool {
        self.waypoints[1..]
            .iter()
            .all(|&s| occ.contains(s) && !occ.is_filled(s))
    }
}

#[inline]
fn step_unbounded(s: Site, h: Heading) -> Site {
    match h {
        Heading::Up => Site::new(s.row - 1, s.col),
        Heading::Left => Site::new(s.row, s.col - 1),
        Heading::Down => Site::new(s.row + 1, s.col),
        Heading::Right => Site::new(s.row, s.col + 1),
    }
}

/// First filled site strictly after `from` on the straight run to `to`
/// (inclusive of `to`).
fn first_blocker(occ: &Occupancy, from: Site, to: Site) -> Option<Site> {
    let h = Heading::between(from, to)?;
    let mut at = from;
    while at != to {
        at = step_unbounded(at, h);
        if occ.is_filled(at) {
            return Some(at);
        }
    }
    None
}

/// True iff every site between `from` and `to`, and `to` itself, is empty.
pub fn straight_clear(occ: &Occupancy, from: Site, to: Site) -> Result<bool> {
    for s in [from, to] {
        if !occ.contains(s) {
            return Err(Error::OutOfBounds(s));
        }
    }
    if Heading::between(from, to).is_none() {
        return Err(Error::NotCollinear(from, to));
    }
    Ok(first_blocker(occ, from, to).is_none())
}

/// Tries the row-first L-path (vertical leg first, corner at
/// `(to.row, from.col)`) and then the column-first one. Collinear endpoints
/// give a single straight segment.
pub fn one_turn_path(occ: &Occupancy, from: Site, to: Site) -> Option<Path> {
    if !occ.contains(from) || !occ.contains(to) || from == to {
        return None;
    }
    if from.row == to.row || from.col == to.col {
        return first_blocker(occ, from, to)
            .is_none()
            .then(|| Path::through(&[from, to]));
    }
    let corners = [Site::new(to.row, from.col), Site::new(from.row, to.col)];
    corners.into_iter().find_map(|corner| {
        let clear = !occ.is_filled(corner)
            && first_blocker(occ, from, corner).is_none()
            && first_blocker(occ, corner, to).is_none();
        clear.then(|| Path::through(&[from, corner, to]))
    })
}

/// Breadth-first search through non-filled sites. Neighbors are expanded in
/// the order up, left, down, right, so ties resolve deterministically.
pub fn shortest_clear_path(occ: &Occupancy, from: Site, to: Site) -> Option<Path> {
    if !occ.contains(from) || !occ.contains(to) || occ.is_filled(to) {
        return None;
    }
    if from == to {
        return Path::from_waypoints(vec![from]);
    }
    let (h, w) = (occ.height(), occ.width());
    let idx = |s: Site| s.row * w + s.col;
    let mut parent = vec![usize::MAX; h * w];
    parent[idx(from)] = idx(from);
    let mut queue = VecDeque::from([from]);
    while let Some(at) = queue.pop_front() {
        for heading in Heading::ALL {
            let Some(next) = at.step(heading, h, w) else { continue };
            if parent[idx(next)] != usize::MAX || occ.is_filled(next) {
                continue;
            }
            parent[idx(next)] = idx(at);
            if next == to {
                let mut rev = vec![to];
                let mut cur = idx(to);
                while cur != idx(from) {
                    cur = parent[cur];
                    rev.push(Site::new(cur / w, cur % w));
                }
                rev.reverse();
                return Some(Path { waypoints: rev });
            }
            queue.push_back(next);
        }
    }
    None
}

/// BFS distance field from `origin` through non-filled sites (the origin
/// itself is always traversable). Unreached sites hold `usize::MAX`.
pub fn distance_field(occ: &Occupancy, origin: Site) -> Vec<usize> {
    let (h, w) = (occ.height(), occ.width());
    let mut dist = vec![usize::MAX; h * w];
    dist[origin.row * w + origin.col] = 0;
    let mut queue = VecDeque::from([origin]);
    while let Some(at) = queue.pop_front() {
        let d = dist[at.row * w + at.col];
        for heading in Heading::ALL {
            let Some(next) = at.step(heading, h, w) else { continue };
            let i = next.row * w + next.col;
            if dist[i] != usize::MAX || occ.is_filled(next) {
                continue;
            }
            dist[i] = d + 1;
            queue.push_back(next);
        }
    }
    dist
}
