//! Halton integration nodes and the L2-discrepancy of finite point sets.

use num_integer::Integer;

use crate::error::{invalid, Result};
use crate::numeric::NeumaierSum;
use crate::partition::Point2;

/// Van der Corput radical inverse: the base-`base` digits of `k` mirrored
/// about the radix point. `k = 0` maps to `0`.
pub fn radical_inverse(base: u32, mut k: u64) -> Result<f64> {
    if base < 2 {
        return invalid(format!("radical inverse base must be >= 2, got {base}"));
    }
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let mut scale = inv;
    let mut value = 0.0;
    while k > 0 {
        value += (k % b) as f64 * scale;
        k /= b;
        scale *= inv;
    }
    Ok(value)
}

/// Two-dimensional Halton node set `h = start, start+1, ..., start+count-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaltonConfig {
    bases: (u32, u32),
    start_index: u64,
    count: usize,
}

impl HaltonConfig {
    pub fn new(bases: (u32, u32), start_index: u64, count: usize) -> Result<Self> {
        let (b1, b2) = bases;
        if b1 < 2 || b2 < 2 {
            return invalid(format!("Halton bases must be >= 2, got {bases:?}"));
        }
        if b1.gcd(&b2) != 1 {
            return invalid(format!("Halton bases {bases:?} are not coprime"));
        }
        if start_index == 0 {
            return invalid("Halton start index must be >= 1");
        }
        if count == 0 {
            return invalid("Halton node count must be >= 1");
        }
        Ok(Self {
            bases,
            start_index,
            count,
        })
    }

    /// Bases (2, 3) starting at index 1.
    pub fn standard(count: usize) -> Result<Self> {
        Self::new((2, 3), 1, count)
    }

    pub fn bases(&self) -> (u32, u32) {
        self.bases
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Point2>,
}

impl PointSet {
    pub fn new(points: Vec<Point2>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl From<Vec<Point2>> for PointSet {
    fn from(points: Vec<Point2>) -> Self {
        Self { points }
    }
}

pub fn halton(config: &HaltonConfig) -> PointSet {
    let (b1, b2) = config.bases;
    let points = (0..config.count as u64)
        .map(|offset| {
            let h = config.start_index + offset;
            // bases were validated at construction
            let x = radical_inverse(b1, h).expect("valid base");
            let y = radical_inverse(b2, h).expect("valid base");
            Point2::new_unchecked(x, y)
        })
        .collect();
    PointSet { points }
}

/// Squared L2-discrepancy via Warnock's pairwise formula (d = 2):
///
/// `1/9 - (2/N) sum_i prod_k (1 - x_ik^2)/2 + (1/N^2) sum_{i,j} prod_k (1 - max(x_ik, x_jk))`.
pub fn l2_discrepancy_sq(ps: &PointSet) -> Result<f64> {
    if ps.is_empty() {
        return invalid("L2-discrepancy of an empty point set is undefined");
    }
    let n = ps.len() as f64;
    let pts = &ps.points;

    let mut single = NeumaierSum::new();
    for p in pts {
        single.add((1.0 - p.x * p.x) * (1.0 - p.y * p.y) / 4.0);
    }

    // diagonal terms once, off-diagonal pairs twice
    let mut pairs = NeumaierSum::new();
    for (i, p) in pts.iter().enumerate() {
        pairs.add((1.0 - p.x) * (1.0 - p.y));
        for q in &pts[i + 1..] {
            pairs.add(2.0 * (1.0 - p.x.max(q.x)) * (1.0 - p.y.max(q.y)));
        }
    }

    let value = 1.0 / 9.0 - 2.0 / n * single.value() + pairs.value() / (n * n);
    Ok(value.max(0.0))
}

/// Midpoint-rule evaluation of the defining integral
/// `∫ (#(P ∩ [0,x)) / N - x_1 x_2)^2 dx` on a `grid x grid` lattice of anchors.
///
/// Counts come from a 2-D prefix sum over a histogram of the points, so the
/// cost is `O(grid^2 + N)` rather than `O(grid^2 N)`.
pub fn brute_force_l2_sq(ps: &PointSet, grid: usize) -> Result<f64> {
    if ps.is_empty() {
        return invalid("L2-discrepancy of an empty point set is undefined");
    }
    if grid < 10 {
        return invalid(format!("quadrature grid must be >= 10, got {grid}"));
    }
    let g = grid as f64;
    let anchors: Vec<f64> = (0..grid).map(|a| (a as f64 + 0.5) / g).collect();
    // a point with coordinate t is counted by anchors strictly greater than t
    let first_anchor_above = |t: f64| anchors.partition_point(|&a| a <= t);

    let stride = grid + 1;
    let mut hist = vec![0u32; stride * stride];
    for p in &ps.points {
        let (ix, iy) = (first_anchor_above(p.x), first_anchor_above(p.y));
        hist[ix * stride + iy] += 1;
    }
    // in-place 2-D inclusive prefix sum
    for ix in 0..stride {
        for iy in 0..stride {
            let mut v = hist[ix * stride + iy];
            if ix > 0 {
                v += hist[(ix - 1) * stride + iy];
            }
            if iy > 0 {
                v += hist[ix * stride + iy - 1];
            }
            if ix > 0 && iy > 0 {
                v -= hist[(ix - 1) * stride + iy - 1];
            }
            hist[ix * stride + iy] = v;
        }
    }

    let n = ps.len() as f64;
    let mut acc = NeumaierSum::new();
    for (a, &ax) in anchors.iter().enumerate() {
        for (b, &ay) in anchors.iter().enumerate() {
            let count = f64::from(hist[a * stride + b]);
            let d = count / n - ax * ay;
            acc.add(d * d);
        }
    }
    Ok(acc.value() / (g * g))
}
