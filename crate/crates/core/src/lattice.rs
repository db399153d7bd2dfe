//! Square-lattice geometry: sites, the centered target block, and the
//! concentric ring decomposition that compression sweeps over.
//!
//! Rings are centered on the target block rather than on the full grid, so
//! the target boundary always coincides with a ring boundary. Writing
//! `c2 = 2·offset + L − 1` for twice the target center, a site belongs to
//! ring `⌊max(|2·row − c2|, |2·col − c2|) / 2⌋`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A trap position. Distances are in units of the trap spacing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    #[inline]
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    #[inline]
    pub fn manhattan(self, other: Site) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// One lattice step in `heading`, or `None` when it would leave the
    /// `height × width` grid.
    #[inline]
    pub fn step(self, heading: Heading, height: usize, width: usize) -> Option<Site> {
        let Site { row, col } = self;
        match heading {
            Heading::Up => row.checked_sub(1).map(|r| Site::new(r, col)),
            Heading::Left => col.checked_sub(1).map(|c| Site::new(row, c)),
            Heading::Down => (row + 1 < height).then(|| Site::new(row + 1, col)),
            Heading::Right => (col + 1 < width).then(|| Site::new(row, col + 1)),
        }
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Unit lattice direction in row-down screen coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heading {
    Up,
    Left,
    Down,
    Right,
}

impl Heading {
    /// Neighbor expansion order used wherever a deterministic tie-break is needed.
    pub const ALL: [Heading; 4] = [Heading::Up, Heading::Left, Heading::Down, Heading::Right];

    /// Direction from `from` to `to` when they differ along exactly one axis.
    pub fn between(from: Site, to: Site) -> Option<Heading> {
        match (from.row.cmp(&to.row), from.col.cmp(&to.col)) {
            (std::cmp::Ordering::Greater, std::cmp::Ordering::Equal) => Some(Heading::Up),
            (std::cmp::Ordering::Less, std::cmp::Ordering::Equal) => Some(Heading::Down),
            (std::cmp::Ordering::Equal, std::cmp::Ordering::Greater) => Some(Heading::Left),
            (std::cmp::Ordering::Equal, std::cmp::Ordering::Less) => Some(Heading::Right),
            _ => None,
        }
    }
}

/// How the initial array side length is chosen relative to the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReservoirMode {
    /// `L′ = ⌈L/√p + 1⌉`: enough reservoir atoms for most instances.
    Default,
    /// `L′ = ⌈√(3/p)·L⌉`: reservoir large enough that the postprocess stage
    /// becomes negligible.
    Saturated,
    /// Caller-chosen `L′`.
    Explicit(usize),
}

impl std::fmt::Display for ReservoirMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReservoirMode::Default => f.write_str("default"),
            ReservoirMode::Saturated => f.write_str("saturated"),
            ReservoirMode::Explicit(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for ReservoirMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "default" => Ok(ReservoirMode::Default),
            "saturated" => Ok(ReservoirMode::Saturated),
            other => other
                .parse()
                .map(ReservoirMode::Explicit)
                .map_err(|_| Error::Parse(format!("reservoir mode `{other}`"))),
        }
    }
}

/// Grid geometry: an `L′ × L′` array holding a centered `L × L` target block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    target_side: usize,
    grid_side: usize,
    fill: f64,
    offset: usize,
}

impl GridSpec {
    /// Builds a spec from an explicit geometry. `fill` may be zero here, which
    /// is useful for boards read from files or deliberately empty loads.
    pub fn new(target_side: usize, grid_side: usize, fill: f64) -> Result<Self> {
        if target_side == 0 {
            return Err(Error::InvalidSpec("target side must be at least 1".into()));
        }
        if grid_side < target_side {
            return Err(Error::InvalidSpec(format!(
                "grid side {grid_side} is smaller than target side {target_side}"
            )));
        }
        if !(0.0..=1.0).contains(&fill) {
            return Err(Error::InvalidSpec(format!("filling fraction {fill} outside [0, 1]")));
        }
        Ok(Self {
            target_side,
            grid_side,
            fill,
            offset: (grid_side - target_side) / 2,
        })
    }

    #[inline]
    pub fn target_side(&self) -> usize {
        self.target_side
    }

    #[inline]
    pub fn grid_side(&self) -> usize {
        self.grid_side
    }

    #[inline]
    pub fn fill(&self) -> f64 {
        self.fill
    }

    #[inline]
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Number of target sites, `N = L²`.
    #[inline]
    pub fn n_targets(&self) -> usize {
        self.target_side * self.target_side
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.grid_side * self.grid_side
    }

    #[inline]
    pub fn contains(&self, site: Site) -> bool {
        site.row < self.grid_side && site.col < self.grid_side
    }

    #[inline]
    pub fn is_target(&self, site: Site) -> bool {
        let end = self.offset + self.target_side;
        (self.offset..end).contains(&site.row) && (self.offset..end).contains(&site.col)
    }

    /// Twice the target-center coordinate on either axis.
    #[inline]
    fn center2(&self) -> usize {
        2 * self.offset + self.target_side - 1
    }

    /// Row/column bounds `(lo, hi)` of ring `k`. These may fall outside the
    /// grid; `lo` is signed for that reason.
    #[inline]
    fn ring_bounds(&self, k: usize) -> (isize, isize) {
        let c2 = self.center2() as isize;
        let k = k as isize;
        (c2.div_euclid(2) - k, (c2 + 1).div_euclid(2) + k)
    }

    /// Highest ring index present in the target block.
    #[inline]
    pub fn target_layers(&self) -> usize {
        (self.target_side - 1) / 2
    }

    /// Every target site in row-major order.
    pub fn target_sites(&self) -> impl Iterator<Item = Site> + '_ {
        let range = self.offset..self.offset + self.target_side;
        range
            .clone()
            .flat_map(move |r| range.clone().map(move |c| Site::new(r, c)))
    }
}

fn ceil_to_usize(x: f64) -> usize {
    // Guard against representation error pushing exact integers upward.
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// Builds the grid spec for an `L × L` target loaded at filling fraction `p`.
pub fn make_spec(target_side: usize, fill: f64, mode: ReservoirMode) -> Result<GridSpec> {
    if target_side == 0 {
        return Err(Error::InvalidSpec("target side must be at least 1".into()));
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::InvalidSpec(format!("filling fraction {fill} outside (0, 1]")));
    }
    let l = target_side as f64;
    let grid_side = match mode {
        ReservoirMode::Default => ceil_to_usize(l / fill.sqrt() + 1.0),
        ReservoirMode::Saturated => ceil_to_usize((3.0 / fill).sqrt() * l),
        ReservoirMode::Explicit(side) => side,
    };
    GridSpec::new(target_side, grid_side, fill)
}

/// Ring index of `site`.
#[inline]
pub fn layer_of(site: Site, spec: &GridSpec) -> usize {
    let c2 = spec.center2() as isize;
    let dr = (2 * site.row as isize - c2).unsigned_abs();
    let dc = (2 * site.col as isize - c2).unsigned_abs();
    dr.max(dc) / 2
}

/// Largest ring index that intersects the grid.
pub fn max_layer(spec: &GridSpec) -> usize {
    let last = spec.grid_side - 1;
    [(0, 0), (0, last), (last, 0), (last, last)]
        .into_iter()
        .map(|(r, c)| layer_of(Site::new(r, c), spec))
        .max()
        .unwrap_or(0)
}

/// One side of a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Left,
    Bottom,
    Right,
}

impl Side {
    /// Processing order: a counterclockwise cycle starting at the top.
    pub const ORDER: [Side; 4] = [Side::Top, Side::Left, Side::Bottom, Side::Right];

    /// Direction pointing from this side toward the ring interior.
    #[inline]
    pub fn inward(self) -> Heading {
        match self {
            Side::Top => Heading::Down,
            Side::Left => Heading::Right,
            Side::Bottom => Heading::Up,
            Side::Right => Heading::Left,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// The four sides of ring `k ≥ 1`, each clipped to the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerRing {
    pub index: usize,
    /// Indexed by [`Side::index`].
    pub sides: [Vec<Site>; 4],
}

impl LayerRing {
    #[inline]
    pub fn side(&self, side: Side) -> &[Site] {
        &self.sides[side.index()]
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.sides.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.sides.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sides of ring `k`, traversed counterclockwise. Each side starts at (and
/// owns) its leading corner:
///
/// * top: row `lo`, columns `hi` down to `lo + 1`
/// * left: column `lo`, rows `lo` up to `hi − 1`
/// * bottom: row `hi`, columns `lo` up to `hi − 1`
/// * right: column `hi`, rows `hi` down to `lo + 1`
pub fn ring_sides(k: usize, spec: &GridSpec) -> Result<LayerRing> {
    if k == 0 {
        return Err(Error::CentralLayer);
    }
    let (lo, hi) = spec.ring_bounds(k);
    let n = spec.grid_side as isize;
    let keep = |r: isize, c: isize| {
        ((0..n).contains(&r) && (0..n).contains(&c)).then(|| Site::new(r as usize, c as usize))
    };
    let top = (lo + 1..=hi).rev().filter_map(|c| keep(lo, c)).collect();
    let left = (lo..hi).filter_map(|r| keep(r, lo)).collect();
    let bottom = (lo..hi).filter_map(|c| keep(hi, c)).collect();
    let right = (lo + 1..=hi).rev().filter_map(|r| keep(r, hi)).collect();
    Ok(LayerRing {
        index: k,
        sides: [top, left, bottom, right],
    })
}

/// Sites of the central ring (a single site for odd `L`, a 2×2 block for
/// even `L`).
pub fn central_block(spec: &GridSpec) -> Vec<Site> {
    let (lo, hi) = spec.ring_bounds(0);
    let mut out = Vec::with_capacity(4);
    for r in lo..=hi {
        for c in lo..=hi {
            out.push(Site::new(r as usize, c as usize));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent ring oracle: grow squares around the target center one
    /// ring at a time and report the first one whose perimeter holds `site`.
    fn ring_oracle(site: Site, spec: &GridSpec) -> usize {
        let l = spec.target_side() as isize;
        let off = spec.offset() as isize;
        // Innermost square: 1×1 for odd L, 2×2 for even L.
        let (mut top, mut bot) = if l % 2 == 1 {
            (off + l / 2, off + l / 2)
        } else {
            (off + l / 2 - 1, off + l / 2)
        };
        let (r, c) = (site.row as isize, site.col as isize);
        for k in 0.. {
            let inside = (top..=bot).contains(&r) && (top..=bot).contains(&c);
            if inside {
                return k;
            }
            top -= 1;
            bot += 1;
        }
        unreachable!()
    }

    fn spec(l: usize, lp: usize) -> GridSpec {
        GridSpec::new(l, lp, 0.5).unwrap()
    }

    #[test]
    fn make_spec_reservoir_sizes() {
        let s = make_spec(14, 0.5, ReservoirMode::Default).unwrap();
        assert_eq!(s.grid_side(), 21);
        assert_eq!(s.offset(), 3);
        let s = make_spec(14, 0.5, ReservoirMode::Saturated).unwrap();
        assert_eq!(s.grid_side(), 35);
        let s = make_spec(1, 1.0, ReservoirMode::Default).unwrap();
        assert_eq!((s.grid_side(), s.offset()), (2, 0));
    }

    #[test]
    fn make_spec_rejects_bad_input() {
        assert!(make_spec(5, 0.0, ReservoirMode::Default).is_err());
        assert!(make_spec(5, 1.5, ReservoirMode::Default).is_err());
        assert!(make_spec(5, 0.5, ReservoirMode::Explicit(4)).is_err());
        assert!(make_spec(0, 0.5, ReservoirMode::Default).is_err());
    }

    #[test]
    fn layer_examples() {
        let s5 = spec(5, 5);
        assert_eq!(layer_of(Site::new(2, 2), &s5), 0);
        assert_eq!(layer_of(Site::new(0, 4), &s5), ring_oracle(Site::new(0, 4), &s5));
        assert_eq!(layer_of(Site::new(0, 4), &s5), 2);
        let s6 = spec(6, 6);
        assert_eq!(layer_of(Site::new(2, 3), &s6), 0);
        assert_eq!(layer_of(Site::new(1, 2), &s6), 1);
    }

    #[test]
    fn layer_matches_oracle_everywhere() {
        for l in 1..=9 {
            for lp in l..=l + 7 {
                let s = spec(l, lp);
                for r in 0..lp {
                    for c in 0..lp {
                        let site = Site::new(r, c);
                        assert_eq!(layer_of(site, &s), ring_oracle(site, &s), "{l} {lp} {site}");
                    }
                }
            }
        }
    }

    #[test]
    fn ring_examples() {
        // L=6: ring 1 is the boundary of rows/cols 1..=4, which has 12 sites.
        let s6 = spec(6, 6);
        let ring = ring_sides(1, &s6).unwrap();
        assert_eq!(ring.len(), 12);
        assert!(ring.sides.iter().all(|s| s.len() == 3));
        assert!(ring.sites().all(|s| s.row.min(s.col) >= 1 && s.row.max(s.col) <= 4));
        assert_eq!(ring.side(Side::Top), &[Site::new(1, 4), Site::new(1, 3), Site::new(1, 2)]);

        let s5 = spec(5, 5);
        let ring = ring_sides(2, &s5).unwrap();
        assert_eq!(ring.len(), 16);
        assert!(ring.sides.iter().all(|s| s.len() == 4));
        assert!(ring.sites().all(|s| s.row == 0 || s.col == 0 || s.row == 4 || s.col == 4));

        assert!(matches!(ring_sides(0, &s5), Err(Error::CentralLayer)));
    }

    #[test]
    fn ring_off_grid_is_empty() {
        let ring = ring_sides(7, &spec(5, 5)).unwrap();
        assert!(ring.is_empty());
    }

    #[test]
    fn max_layer_examples() {
        assert_eq!(max_layer(&spec(6, 6)), 2);
        assert_eq!(max_layer(&spec(5, 5)), 2);
        assert_eq!(max_layer(&spec(1, 1)), 0);
        assert_eq!(max_layer(&spec(14, 21)), 10);
    }

    #[test]
    fn target_boundary_is_ring_boundary() {
        for l in 1..=12 {
            let s = spec(l, l + 5);
            for r in 0..s.grid_side() {
                for c in 0..s.grid_side() {
                    let site = Site::new(r, c);
                    assert_eq!(s.is_target(site), layer_of(site, &s) <= s.target_layers());
                }
            }
        }
    }
}
