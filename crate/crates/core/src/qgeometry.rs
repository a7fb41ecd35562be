//! Overlap of anchored boxes `[0,x] x [0,y]` with the half-planes `u + v >= r`
//! and the per-cell overlap functions `q_i`.
//!
//! Which of the box corners `B = (x,0)`, `C = (x,y)`, `D = (0,y)` lie strictly
//! above the line decides the area formula; the origin never does.

use crate::error::{invalid, Result};
use crate::partition::{CellIndex, GeneratingSet};

/// The half-plane `{(u,v) : u + v - r >= 0}` with `0 < r < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    r: f64,
}

/// Which of the box corners B, C, D lie strictly inside the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexCase {
    Empty,
    OnlyC,
    CD,
    BC,
    BCD,
}

impl HalfPlane {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 2.0) {
            return invalid(format!("half-plane offset {r} outside (0, 2)"));
        }
        Ok(Self { r })
    }

    pub fn r(self) -> f64 {
        self.r
    }

    /// Signed offset `x + y - r`.
    #[inline]
    pub fn offset(self, x: f64, y: f64) -> f64 {
        g5(self.r, x, y)
    }

    #[inline]
    pub fn classify(self, x: f64, y: f64) -> VertexCase {
        classify(self.r, x, y)
    }

    #[inline]
    pub fn intersection_volume(self, x: f64, y: f64) -> f64 {
        intersection_volume(self.r, x, y)
    }
}

/// `x + y - r`.
#[inline]
pub fn g5(r: f64, x: f64, y: f64) -> f64 {
    x + y - r
}

pub fn classify(r: f64, x: f64, y: f64) -> VertexCase {
    if g5(r, x, y) <= 0.0 {
        return VertexCase::Empty;
    }
    match (g5(r, x, 0.0) > 0.0, g5(r, 0.0, y) > 0.0) {
        (true, true) => VertexCase::BCD,
        (true, false) => VertexCase::BC,
        (false, true) => VertexCase::CD,
        (false, false) => VertexCase::OnlyC,
    }
}

/// Area of `[0,x] x [0,y]` intersected with `u + v >= r`.
///
/// The triangle cut off at corner C, minus the parts that stick out past the
/// bottom edge (when B is inside) and the left edge (when D is inside).
pub fn intersection_volume(r: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let corner = g5(r, x, y);
    let past_bottom = g5(r, x, 0.0);
    let past_left = g5(r, 0.0, y);
    let twice = match classify(r, x, y) {
        VertexCase::Empty => return 0.0,
        VertexCase::OnlyC => corner * corner,
        VertexCase::BC => corner * corner - past_bottom * past_bottom,
        VertexCase::CD => corner * corner - past_left * past_left,
        VertexCase::BCD => corner * corner - past_bottom * past_bottom - past_left * past_left,
    };
    (twice / 2.0).clamp(0.0, x * y)
}

/// The overlap functions `q_i(x,y) = N |Omega_i ∩ [0,x) x [0,y)|` of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct QProfile {
    gs: GeneratingSet,
}

impl QProfile {
    pub fn new(gs: GeneratingSet) -> Self {
        Self { gs }
    }

    pub fn for_cells(n: usize) -> Result<Self> {
        GeneratingSet::new(n).map(Self::new)
    }

    pub fn n(&self) -> usize {
        self.gs.n()
    }

    pub fn generating_set(&self) -> &GeneratingSet {
        &self.gs
    }

    /// `V_j = |[0,x] x [0,y] ∩ {u + v >= r_j}|` for `0 <= j <= N`, with
    /// `V_0 = xy` and `V_N = 0`.
    fn volume_above(&self, j: usize, x: f64, y: f64) -> f64 {
        let n = self.gs.n();
        if j == 0 {
            x * y
        } else if j >= n {
            0.0
        } else {
            intersection_volume(self.gs.r(j), x, y)
        }
    }

    /// `q_i(x,y) = N (V_{i-1} - V_i)`.
    pub fn q(&self, i: CellIndex, x: f64, y: f64) -> f64 {
        let i = i.get();
        let nf = self.gs.n() as f64;
        let diff = self.volume_above(i - 1, x, y) - self.volume_above(i, x, y);
        (nf * diff).clamp(0.0, 1.0)
    }

    /// All of `q_1 .. q_N` at `(x,y)`, sharing each `V_j` between neighbours.
    pub fn q_all(&self, x: f64, y: f64, out: &mut Vec<f64>) {
        let n = self.gs.n();
        let nf = n as f64;
        out.clear();
        let mut prev = self.volume_above(0, x, y);
        for j in 1..=n {
            let next = self.volume_above(j, x, y);
            out.push((nf * (prev - next)).clamp(0.0, 1.0));
            prev = next;
        }
    }

    /// `sum_i q_i (1 - q_i)` at `(x,y)`, visiting only the strips with
    /// `r_{i-1} < x + y`; the remaining `q_i` are identically zero there.
    pub fn variance_sum(&self, x: f64, y: f64) -> f64 {
        let n = self.gs.n();
        let nf = n as f64;
        let s = x + y;
        let touched = self.gs.breakpoints().partition_point(|&r| r < s) + 1;
        let mut total = 0.0;
        let mut prev = self.volume_above(0, x, y);
        for j in 1..=touched.min(n) {
            let next = self.volume_above(j, x, y);
            let q = (nf * (prev - next)).clamp(0.0, 1.0);
            total += q * (1.0 - q);
            prev = next;
        }
        total
    }

    /// Reference version of [`Self::variance_sum`] that evaluates every strip.
    pub fn variance_sum_naive(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for i in 1..=self.gs.n() {
            let q = self.q(CellIndex::new_unchecked(i), x, y);
            total += q * (1.0 - q);
        }
        total
    }
}
