//! Trap occupancy and stochastic single-atom loading.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Site};
use crate::rng::Xoshiro256;

/// Dense filled/empty state of every trap, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Occupancy {
    width: usize,
    height: usize,
    filled: Vec<bool>,
}

impl Occupancy {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            filled: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            filled: vec![true; width * height],
        }
    }

    /// Square board with the given sites filled.
    pub fn from_sites(side: usize, sites: &[Site]) -> Self {
        let mut occ = Self::empty(side, side);
        for &s in sites {
            occ.set(s, true);
        }
        occ
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn contains(&self, site: Site) -> bool {
        site.row < self.height && site.col < self.width
    }

    #[inline]
    fn idx(&self, site: Site) -> usize {
        debug_assert!(self.contains(site), "{site} outside {}x{}", self.height, self.width);
        site.row * self.width + site.col
    }

    #[inline]
    pub fn is_filled(&self, site: Site) -> bool {
        self.filled[self.idx(site)]
    }

    #[inline]
    pub fn set(&mut self, site: Site, value: bool) {
        let i = self.idx(site);
        self.filled[i] = value;
    }

    pub fn atom_count(&self) -> usize {
        self.filled.iter().filter(|&&f| f).count()
    }

    pub fn filled_sites(&self) -> impl Iterator<Item = Site> + '_ {
        let w = self.width;
        self.filled
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(move |(i, _)| Site::new(i / w, i % w))
    }

    /// Whether the board has the `L′ × L′` shape of `spec`.
    pub fn matches(&self, spec: &GridSpec) -> bool {
        self.width == spec.grid_side() && self.height == spec.grid_side()
    }

    /// Number of empty target traps.
    pub fn target_vacancies(&self, spec: &GridSpec) -> usize {
        spec.target_sites().filter(|&s| !self.is_filled(s)).count()
    }

    /// Snapshot text: one line per row of `'1'`/`'0'`, each newline-terminated.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.filled.chunks(self.width.max(1)).take(self.height) {
            for &f in row {
                out.push(if f { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the snapshot format written by [`Occupancy::to_snapshot`].
    /// Blank trailing lines are ignored; every row must have the same width.
    pub fn from_snapshot(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut filled = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Board(format!(
                    "row {i} has {} cells, expected {width}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                filled.push(match ch {
                    '1' => true,
                    '0' => false,
                    other => return Err(Error::Board(format!("unexpected character {other:?} in row {i}"))),
                });
            }
        }
        Ok(Self { width, height, filled })
    }

    /// Compact debug picture using `#`/`.`.
    pub fn ascii(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let _ = out.write_char(if self.is_filled(Site::new(r, c)) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Fills each trap of the `L′ × L′` grid independently with probability `p`,
/// drawing one uniform per trap in row-major order.
pub fn load_stochastic(spec: &GridSpec, seed: u64) -> Occupancy {
    let side = spec.grid_side();
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let p = spec.fill();
    let filled = (0..side * side).map(|_| rng.bernoulli(p)).collect();
    Occupancy {
        width: side,
        height: side,
        filled,
    }
}

/// Expected reservoir-to-target ratio `p·L′²/L²`.
pub fn reservoir_ratio(spec: &GridSpec) -> f64 {
    spec.fill() * spec.n_sites() as f64 / spec.n_targets() as f64
}

/// Realized ratio: loaded atoms per target site.
pub fn realized_ratio(occ: &Occupancy, spec: &GridSpec) -> f64 {
    occ.atom_count() as f64 / spec.n_targets() as f64
}
