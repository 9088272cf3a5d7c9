//! Axis-aligned lattice grids in the complex plane.

use alloc::collections::VecDeque;

use faer::c64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, RngStream};

/// Relative distance (in units of ω) within which a point counts as lying on a line.
pub const ON_LINE_TOL: f64 = 1e-14;

/// Largest supported number of boxes per side.
pub const MAX_SIDE: u64 = 1 << 52;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Lines `Re(z) = h`.
    Vertical,
    /// Lines `Im(z) = h`.
    Horizontal,
}

/// Side of a grid line: `Left` is `Re(z) < h` (or `Im(z) < h`), `Right` is `> h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// An `s1 × s2` lattice of boxes of side `omega` with lower-left corner `re0 + i·im0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub re0: f64,
    pub im0: f64,
    pub omega: f64,
    pub s1: u64,
    pub s2: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLine {
    pub orientation: Orientation,
    pub coordinate: f64,
    pub index: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoxLocation {
    /// Box `(i, j)`: column `i` along the real axis, row `j` along the imaginary axis.
    Inside(u64, u64),
    Outside,
    OnGridLine,
}

impl Grid {
    pub fn new(z0: c64, omega: f64, s1: u64, s2: u64) -> Result<Grid> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidOmega(omega));
        }
        if s1 == 0 || s2 == 0 || s1 > MAX_SIDE || s2 > MAX_SIDE {
            return Err(Error::InvalidParameter(alloc::format!(
                "grid must have between 1 and 2^52 boxes per side, got {s1}x{s2}"
            )));
        }
        Ok(Grid { re0: z0.re, im0: z0.im, omega, s1, s2 })
    }

    pub fn z0(&self) -> c64 {
        c64::new(self.re0, self.im0)
    }

    pub fn side(&self, orientation: Orientation) -> u64 {
        match orientation {
            Orientation::Vertical => self.s1,
            Orientation::Horizontal => self.s2,
        }
    }

    fn origin(&self, orientation: Orientation) -> f64 {
        match orientation {
            Orientation::Vertical => self.re0,
            Orientation::Horizontal => self.im0,
        }
    }

    /// Line `index` of the given orientation, `0 ≤ index ≤ s`.
    pub fn line(&self, orientation: Orientation, index: u64) -> Result<GridLine> {
        if index > self.side(orientation) {
            return Err(Error::InvalidParameter(alloc::format!(
                "line index {index} exceeds grid side {}",
                self.side(orientation)
            )));
        }
        Ok(GridLine {
            orientation,
            coordinate: self.origin(orientation) + index as f64 * self.omega,
            index,
        })
    }

    /// `ζ = 2(⌊log₂ max(s1, s2)⌋ + 1)`.
    pub fn zeta(&self) -> u32 {
        2 * (self.s1.max(self.s2).ilog2() + 1)
    }

    /// Maximum number of lines probed per orientation, `ζ/2`.
    pub fn search_budget(&self) -> usize {
        (self.zeta() / 2) as usize
    }

    pub fn box_center(&self, i: u64, j: u64) -> c64 {
        c64::new(
            self.re0 + (i as f64 + 0.5) * self.omega,
            self.im0 + (j as f64 + 0.5) * self.omega,
        )
    }

    pub fn box_of(&self, z: c64) -> BoxLocation {
        let x = (z.re - self.re0) / self.omega;
        let y = (z.im - self.im0) / self.omega;
        let (s1, s2) = (self.s1 as f64, self.s2 as f64);
        if !x.is_finite() || !y.is_finite() {
            return BoxLocation::Outside;
        }
        if x < -ON_LINE_TOL || y < -ON_LINE_TOL || x > s1 + ON_LINE_TOL || y > s2 + ON_LINE_TOL {
            return BoxLocation::Outside;
        }
        if (x - x.round()).abs() <= ON_LINE_TOL || (y - y.round()).abs() <= ON_LINE_TOL {
            return BoxLocation::OnGridLine;
        }
        BoxLocation::Inside(x.floor() as u64, y.floor() as u64)
    }

    /// Whether `z` lies in the closed square covered by the grid.
    pub fn covers(&self, z: c64) -> bool {
        z.re >= self.re0
            && z.im >= self.im0
            && z.re <= self.re0 + self.s1 as f64 * self.omega
            && z.im <= self.im0 + self.s2 as f64 * self.omega
    }
}

/// Random grid of spacing `omega` whose lower-left corner is uniform in the
/// `omega`-square at `−4 − 4i`, with `⌈8/ω⌉` boxes per side.
pub fn random_grid(omega: f64, rng: &RngStream) -> Result<Grid> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidOmega(omega));
    }
    let side = (8.0 / omega).ceil();
    if side > MAX_SIDE as f64 {
        return Err(Error::InvalidOmega(omega));
    }
    let u = rng.uniforms(2);
    let z0 = c64::new(-4.0 + omega * u[0], -4.0 + omega * u[1]);
    Grid::new(z0, omega, side as u64, side as u64)
}

/// Interior lines in binary-search order: the median first, then the
/// medians of the two halves, breadth first.
pub fn search_order(g: &Grid, orientation: Orientation) -> SearchOrder {
    let s = g.side(orientation);
    let mut pending = VecDeque::new();
    if s >= 2 {
        pending.push_back((1, s - 1));
    }
    SearchOrder { grid: *g, orientation, pending }
}

#[derive(Clone, Debug)]
pub struct SearchOrder {
    grid: Grid,
    orientation: Orientation,
    pending: VecDeque<(u64, u64)>,
}

impl Iterator for SearchOrder {
    type Item = GridLine;

    fn next(&mut self) -> Option<GridLine> {
        let (lo, hi) = self.pending.pop_front()?;
        let mid = lo + (hi - lo) / 2;
        if mid > lo {
            self.pending.push_back((lo, mid - 1));
        }
        if mid < hi {
            self.pending.push_back((mid + 1, hi));
        }
        self.grid.line(self.orientation, mid).ok()
    }
}

/// The part of `g` on one side of an interior line.
pub fn half_grid(g: &Grid, line: &GridLine, side: Side) -> Result<Grid> {
    let s = g.side(line.orientation);
    if line.index > s {
        return Err(Error::InvalidParameter(alloc::format!(
            "line index {} exceeds grid side {s}",
            line.index
        )));
    }
    if line.index == 0 || line.index == s {
        return Err(Error::EmptyHalf { index: line.index });
    }
    let expected = g.line(line.orientation, line.index)?.coordinate;
    if (expected - line.coordinate).abs() > ON_LINE_TOL * g.omega * (1.0 + s as f64) {
        return Err(Error::InvalidParameter("line does not belong to the grid".into()));
    }
    let mut out = *g;
    match (line.orientation, side) {
        (Orientation::Vertical, Side::Left) => out.s1 = line.index,
        (Orientation::Vertical, Side::Right) => {
            out.re0 = line.coordinate;
            out.s1 = s - line.index;
        }
        (Orientation::Horizontal, Side::Left) => out.s2 = line.index,
        (Orientation::Horizontal, Side::Right) => {
            out.im0 = line.coordinate;
            out.s2 = s - line.index;
        }
    }
    Ok(out)
}
