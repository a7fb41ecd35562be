//! Equi-volume partitions of the unit square and stratified sampling from them.
//!
//! The diagonal-orthogonal partition cuts `[0,1]^2` with lines `x + y = r_i`,
//! `0 < r_1 < ... < r_{N-1} < 2`, placed so that every strip has area `1/N`.
//! Vertical strips and classical jittered (grid) sampling are provided as
//! baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};

/// A point of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return invalid(format!("point ({x}, {y}) is outside the unit square"));
        }
        Ok(Self { x, y })
    }

    /// Construct without the range check. Callers guarantee `x, y` in `[0,1]`.
    pub(crate) const fn new_unchecked(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// One-based index of a partition cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CellIndex(usize);

impl CellIndex {
    pub fn new(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i > n {
            return invalid(format!("cell index {i} outside 1..={n}"));
        }
        Ok(Self(i))
    }

    pub(crate) const fn new_unchecked(i: usize) -> Self {
        Self(i)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// The breakpoints `r_1 < ... < r_{N-1}` of the diagonal-orthogonal partition.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingSet {
    n: usize,
    breakpoints: Vec<f64>,
}

/// Area of `{(u,v) in [0,1]^2 : u + v < r}`.
pub(crate) fn area_below(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if r <= 1.0 {
        r * r / 2.0
    } else if r < 2.0 {
        let t = 2.0 - r;
        1.0 - t * t / 2.0
    } else {
        1.0
    }
}

impl GeneratingSet {
    /// Breakpoints for `n` cells: `sqrt(2i/n)` up to the anti-diagonal and
    /// `2 - sqrt(2(n-i)/n)` beyond it.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("a generating set needs n >= 2 cells, got {n}"));
        }
        let nf = n as f64;
        let breakpoints = (1..n)
            .map(|i| {
                if 2 * i <= n {
                    (2.0 * i as f64 / nf).sqrt()
                } else {
                    2.0 - (2.0 * (n - i) as f64 / nf).sqrt()
                }
            })
            .collect();
        Ok(Self { n, breakpoints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `r_i` with the conventions `r_0 = 0` and `r_N = 2`.
    pub fn r(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i >= self.n => 2.0,
            i => self.breakpoints[i - 1],
        }
    }

    /// Cell containing `p`: the unique `i` with `r_{i-1} <= x + y < r_i`.
    /// The corner `(1,1)` belongs to the last cell.
    pub fn cell_of(&self, p: Point2) -> CellIndex {
        let s = p.x + p.y;
        let below = self.breakpoints.partition_point(|&r| r <= s);
        CellIndex(below + 1)
    }

    /// Area of cell `i`, computed from the two bounding triangles.
    pub fn cell_area(&self, i: CellIndex) -> f64 {
        area_below(self.r(i.0)) - area_below(self.r(i.0 - 1))
    }

    /// Uniform point in cell `i`.
    ///
    /// `x + y` is drawn by inverting the (triangular) distribution of the sum over
    /// the strip, then the point is placed uniformly on the segment of that
    /// anti-diagonal lying inside the square.
    fn sample_cell<R: Rng>(&self, i: usize, rng: &mut R) -> Point2 {
        let nf = self.n as f64;
        for _ in 0..MAX_BOUNDARY_RETRIES {
            let u: f64 = rng.gen();
            let lower_mass = (i - 1) as f64 + u;
            let s = if 2.0 * lower_mass <= nf {
                (2.0 * lower_mass / nf).sqrt()
            } else {
                2.0 - (2.0 * (nf - lower_mass) / nf).sqrt()
            };
            let lo = (s - 1.0).max(0.0);
            let hi = s.min(1.0);
            let x = lo + rng.gen::<f64>() * (hi - lo);
            let y = (s - x).clamp(0.0, 1.0);
            let p = Point2::new_unchecked(x.clamp(0.0, 1.0), y);
            // rounding can push x + y across a breakpoint; redraw in that case
            if self.cell_of(p).0 == i {
                return p;
            }
        }
        panic!(
            "failed to place a point inside cell {i} of {} after {MAX_BOUNDARY_RETRIES} draws",
            self.n
        );
    }
}

const MAX_BOUNDARY_RETRIES: usize = 1_000;

/// One point per partition cell, with the cell each point was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedSample {
    pub points: Vec<Point2>,
    pub cells: Vec<CellIndex>,
    pub seed: u64,
}

impl StratifiedSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Independent RNG stream for one cell of one replicate.
///
/// The ChaCha key carries `(seed, replicate)` and the stream id carries the
/// cell, so every draw is a pure function of those three values.
pub(crate) fn cell_rng(seed: u64, replicate: u64, cell: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(cell as u64);
    rng
}

/// The partition families supported for sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Stratification {
    /// Strips orthogonal to the main diagonal.
    Diagonal(GeneratingSet),
    /// `n` vertical strips of width `1/n`.
    Vertical { n: usize },
    /// `m x m` axis-aligned subsquares.
    Jittered { m: usize },
}

impl Stratification {
    pub fn diagonal(n: usize) -> Result<Self> {
        GeneratingSet::new(n).map(Self::Diagonal)
    }

    pub fn vertical(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("vertical partition needs n >= 1");
        }
        Ok(Self::Vertical { n })
    }

    pub fn jittered(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("jittered partition needs m >= 1");
        }
        Ok(Self::Jittered { m })
    }

    /// Jittered sampling from a total point count, which must be a perfect square.
    pub fn jittered_from_count(n: usize) -> Result<Self> {
        let m = (n as f64).sqrt().round() as usize;
        if m == 0 || m * m != n {
            return invalid(format!(
                "jittered sampling needs a square point count, got {n}"
            ));
        }
        Self::jittered(m)
    }

    /// Number of cells (= points per sample).
    pub fn cells(&self) -> usize {
        match self {
            Self::Diagonal(gs) => gs.n(),
            Self::Vertical { n } => *n,
            Self::Jittered { m } => m * m,
        }
    }

    pub fn cell_of(&self, p: Point2) -> CellIndex {
        match self {
            Self::Diagonal(gs) => gs.cell_of(p),
            Self::Vertical { n } => CellIndex(strip_index(p.x, *n) + 1),
            Self::Jittered { m } => CellIndex(strip_index(p.x, *m) * m + strip_index(p.y, *m) + 1),
        }
    }

    /// Stratified sample for `seed` (replicate 0).
    pub fn sample(&self, seed: u64) -> StratifiedSample {
        self.sample_replicate(seed, 0)
    }

    /// Stratified sample for replicate `replicate` of a run seeded with `seed`.
    pub fn sample_replicate(&self, seed: u64, replicate: u64) -> StratifiedSample {
        let count = self.cells();
        let mut points = Vec::with_capacity(count);
        for i in 1..=count {
            let mut rng = cell_rng(seed, replicate, i);
            let p = match self {
                Self::Diagonal(gs) => gs.sample_cell(i, &mut rng),
                Self::Vertical { n } => {
                    let nf = *n as f64;
                    let x = (((i - 1) as f64 + rng.gen::<f64>()) / nf).min(1.0);
                    Point2::new_unchecked(x, rng.gen())
                }
                Self::Jittered { m } => {
                    let mf = *m as f64;
                    let (a, b) = ((i - 1) / m, (i - 1) % m);
                    let x = ((a as f64 + rng.gen::<f64>()) / mf).min(1.0);
                    let y = ((b as f64 + rng.gen::<f64>()) / mf).min(1.0);
                    Point2::new_unchecked(x, y)
                }
            };
            points.push(p);
        }
        StratifiedSample {
            points,
            cells: (1..=count).map(CellIndex).collect(),
            seed,
        }
    }
}

/// Zero-based index of the width-`1/n` interval containing `t`, with `t = 1`
/// folded into the last interval.
fn strip_index(t: f64, n: usize) -> usize {
    ((t * n as f64).floor() as usize).min(n - 1)
}

/// `generating_set(n)` as a free function.
pub fn generating_set(n: usize) -> Result<GeneratingSet> {
    GeneratingSet::new(n)
}

/// One uniform point per diagonal-orthogonal cell.
pub fn sample_stratified(gs: &GeneratingSet, seed: u64) -> StratifiedSample {
    Stratification::Diagonal(gs.clone()).sample(seed)
}

pub fn sample_vertical(n: usize, seed: u64) -> Result<StratifiedSample> {
    Ok(Stratification::vertical(n)?.sample(seed))
}

/// Classical jittered sample with `m * m` points.
pub fn sample_jittered(m: usize, seed: u64) -> Result<StratifiedSample> {
    Ok(Stratification::jittered(m)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn four_cell_breakpoints() {
        let gs = GeneratingSet::new(4).unwrap();
        let r = gs.breakpoints();
        assert_eq!(r.len(), 3);
        assert!(close(r[0], 0.5f64.sqrt(), 1e-15));
        assert_eq!(r[1], 1.0);
        assert!(close(r[2], 2.0 - 0.5f64.sqrt(), 1e-15));
        assert!(close(r[0], std::f64::consts::FRAC_1_SQRT_2, 1e-10));
        assert!(close(r[2], 1.2928932188, 1e-10));
    }

    #[test]
    fn two_cells_split_on_anti_diagonal() {
        assert_eq!(GeneratingSet::new(2).unwrap().breakpoints(), &[1.0]);
    }

    #[test]
    fn six_cell_breakpoints() {
        let gs = GeneratingSet::new(6).unwrap();
        let r = gs.breakpoints();
        // substituted by hand: sqrt(1/3), sqrt(2/3), 1, 2 - sqrt(2/3), 2 - sqrt(1/3)
        let expected = [
            (1.0f64 / 3.0).sqrt(),
            (2.0f64 / 3.0).sqrt(),
            1.0,
            2.0 - (2.0f64 / 3.0).sqrt(),
            2.0 - (1.0f64 / 3.0).sqrt(),
        ];
        for (a, b) in r.iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        for i in 1..6 {
            assert!(close(gs.r(i) + gs.r(6 - i), 2.0, 1e-15));
        }
    }

    #[test]
    fn odd_n_has_no_unit_breakpoint() {
        for n in [3usize, 5, 7, 101] {
            let gs = GeneratingSet::new(n).unwrap();
            assert!(gs.breakpoints().iter().all(|&r| r != 1.0));
        }
        for n in [2usize, 4, 6, 100] {
            let gs = GeneratingSet::new(n).unwrap();
            assert!(gs.breakpoints().contains(&1.0));
        }
    }

    #[test]
    fn rejects_fewer_than_two_cells() {
        assert!(matches!(
            GeneratingSet::new(1),
            Err(crate::Error::InvalidArgument(_))
        ));
        assert!(GeneratingSet::new(0).is_err());
    }

    #[test]
    fn cell_of_examples() {
        let gs4 = GeneratingSet::new(4).unwrap();
        assert_eq!(gs4.cell_of(Point2::new(0.4, 0.8).unwrap()).get(), 3);
        let gs2 = GeneratingSet::new(2).unwrap();
        assert_eq!(gs2.cell_of(Point2::new(0.0, 0.0).unwrap()).get(), 1);
        let gs6 = GeneratingSet::new(6).unwrap();
        assert_eq!(gs6.cell_of(Point2::new(0.5, 0.5).unwrap()).get(), 4);
        assert_eq!(gs6.cell_of(Point2::new(1.0, 1.0).unwrap()).get(), 6);
    }

    #[test]
    fn cell_area_examples() {
        let gs4 = GeneratingSet::new(4).unwrap();
        assert!(close(gs4.cell_area(CellIndex(1)), 0.25, 1e-15));
        let gs6 = GeneratingSet::new(6).unwrap();
        assert!(close(gs6.cell_area(CellIndex(4)), 1.0 / 6.0, 1e-15));
        let gs2 = GeneratingSet::new(2).unwrap();
        assert!(close(gs2.cell_area(CellIndex(2)), 0.5, 1e-15));
    }

    #[test]
    fn equivolume_up_to_ten_thousand_cells() {
        for n in (2..=10_000usize).step_by(997).chain([10_000]) {
            let gs = GeneratingSet::new(n).unwrap();
            let mut total = 0.0;
            for i in 1..=n {
                let a = gs.cell_area(CellIndex(i));
                assert!(close(a, 1.0 / n as f64, 1e-12), "n={n} i={i} area={a}");
                total += a;
            }
            assert!(close(total, 1.0, 1e-12));
            for i in 1..n {
                assert!(close(gs.r(i) + gs.r(n - i), 2.0, 1e-12));
            }
        }
    }

    #[test]
    fn point_and_cell_validation() {
        assert!(Point2::new(1.0, 0.0).is_ok());
        assert!(Point2::new(1.0 + 1e-12, 0.5).is_err());
        assert!(Point2::new(f64::NAN, 0.5).is_err());
        assert!(CellIndex::new(0, 4).is_err());
        assert!(CellIndex::new(5, 4).is_err());
        assert_eq!(CellIndex::new(4, 4).unwrap().get(), 4);
    }

    #[test]
    fn two_cell_sample_membership() {
        let gs = GeneratingSet::new(2).unwrap();
        for seed in 0..50 {
            let s = sample_stratified(&gs, seed);
            assert_eq!(s.len(), 2);
            assert!(s.points[0].x + s.points[0].y < 1.0);
            assert!(s.points[1].x + s.points[1].y >= 1.0);
        }
    }

    #[test]
    fn six_cell_sample_enumerates_cells() {
        let gs = GeneratingSet::new(6).unwrap();
        let s = sample_stratified(&gs, 7);
        let cells: Vec<usize> = s.cells.iter().map(|c| c.get()).collect();
        assert_eq!(cells, vec![1, 2, 3, 4, 5, 6]);
        for (p, c) in s.points.iter().zip(&s.cells) {
            assert_eq!(gs.cell_of(*p), *c);
        }
    }

    #[test]
    fn lower_left_quadrant_count_has_mean_area_times_n() {
        // E[#points in [0,1/2]^2] = sum_i N |cell_i ∩ box| = N/4
        let gs = GeneratingSet::new(100).unwrap();
        let strat = Stratification::Diagonal(gs);
        let reps = 10_000u64;
        let counts: Vec<f64> = (0..reps)
            .map(|r| {
                strat
                    .sample_replicate(2024, r)
                    .points
                    .iter()
                    .filter(|p| p.x < 0.5 && p.y < 0.5)
                    .count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!((mean - 25.0).abs() <= 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn vertical_and_jittered_strata() {
        let one = sample_vertical(1, 3).unwrap();
        assert_eq!(one.len(), 1);
        let v = sample_vertical(4, 11).unwrap();
        for (k, p) in v.points.iter().enumerate() {
            assert!(p.x >= k as f64 / 4.0 && p.x <= (k + 1) as f64 / 4.0);
        }
        let j = sample_jittered(2, 5).unwrap();
        assert_eq!(j.len(), 4);
        let mut quadrants: Vec<(bool, bool)> =
            j.points.iter().map(|p| (p.x >= 0.5, p.y >= 0.5)).collect();
        quadrants.sort();
        assert_eq!(
            quadrants,
            vec![(false, false), (false, true), (true, false), (true, true)]
        );
        assert!(sample_vertical(0, 1).is_err());
        assert!(sample_jittered(0, 1).is_err());
        assert!(Stratification::jittered_from_count(5).is_err());
        assert_eq!(
            Stratification::jittered_from_count(9).unwrap(),
            Stratification::Jittered { m: 3 }
        );
    }

    #[test]
    fn identical_seeds_identical_samples() {
        let gs = GeneratingSet::new(37).unwrap();
        assert_eq!(sample_stratified(&gs, 99), sample_stratified(&gs, 99));
        assert_ne!(sample_stratified(&gs, 99), sample_stratified(&gs, 100));
    }

    proptest! {
        #[test]
        fn sampled_points_round_trip_through_cell_of(n in 2usize..300, seed in any::<u64>()) {
            let strat = Stratification::diagonal(n).unwrap();
            let s = strat.sample(seed);
            for (p, c) in s.points.iter().zip(&s.cells) {
                prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
                prop_assert_eq!(strat.cell_of(*p), *c);
            }
        }

        #[test]
        fn baseline_strata_round_trip(n in 1usize..50, seed in any::<u64>()) {
            for strat in [Stratification::vertical(n).unwrap(), Stratification::jittered(n).unwrap()] {
                let s = strat.sample(seed);
                for (p, c) in s.points.iter().zip(&s.cells) {
                    prop_assert_eq!(strat.cell_of(*p), *c);
                }
            }
        }
    }
}
