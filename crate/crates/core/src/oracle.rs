//! Midpoint-rule quadrature of `q_i^2` over the unit square.
//!
//! This evaluates `Q_i` straight from the box/strip geometry in
//! [`crate::qgeometry`], independently of the closed forms in
//! [`crate::exactform`], and is what those closed forms are checked against.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numeric::compensated_sum;
use crate::partition::CellIndex;
use crate::qgeometry::QProfile;

/// `∫∫ q_i^2` for every `i = 1..=N` on a `grid x grid` midpoint lattice.
pub fn q_squared_quadrature_all(n: usize, grid: usize) -> Result<Vec<f64>> {
    if grid == 0 {
        return invalid("quadrature grid must be >= 1");
    }
    let profile = QProfile::for_cells(n)?;
    let g = grid as f64;
    // one row of x per task; rows are reduced in order afterwards
    let rows: Vec<Vec<f64>> = (0..grid)
        .into_par_iter()
        .map(|a| {
            let x = (a as f64 + 0.5) / g;
            let mut row = vec![0.0; n];
            let mut q = Vec::with_capacity(n);
            for b in 0..grid {
                let y = (b as f64 + 0.5) / g;
                profile.q_all(x, y, &mut q);
                for (acc, v) in row.iter_mut().zip(&q) {
                    *acc += v * v;
                }
            }
            row
        })
        .collect();
    let cells = g * g;
    Ok((0..n)
        .map(|i| compensated_sum(rows.iter().map(|r| r[i])) / cells)
        .collect())
}

/// `∫∫ q_i^2` for a single strip.
pub fn q_squared_quadrature(n: usize, i: usize, grid: usize) -> Result<f64> {
    if grid == 0 {
        return invalid("quadrature grid must be >= 1");
    }
    let profile = QProfile::for_cells(n)?;
    let cell = CellIndex::new(i, n)?;
    let g = grid as f64;
    let rows: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|a| {
            let x = (a as f64 + 0.5) / g;
            (0..grid)
                .map(|b| {
                    let q = profile.q(cell, x, (b as f64 + 0.5) / g);
                    q * q
                })
                .sum()
        })
        .collect();
    Ok(compensated_sum(rows) / (g * g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_batched_agree() {
        let all = q_squared_quadrature_all(6, 200).unwrap();
        for i in 1..=6 {
            let one = q_squared_quadrature(6, i, 200).unwrap();
            assert!((all[i - 1] - one).abs() < 1e-13);
        }
    }

    #[test]
    fn two_cells_by_hand() {
        // N = 2: Q_1 = 1 - 14/15 + 1/5 = 4/15 and Q_2 = 1/30
        let all = q_squared_quadrature_all(2, 1000).unwrap();
        assert!((all[0] - 4.0 / 15.0).abs() < 1e-6);
        assert!((all[1] - 1.0 / 30.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(q_squared_quadrature(4, 5, 10).is_err());
        assert!(q_squared_quadrature(1, 1, 10).is_err());
        assert!(q_squared_quadrature_all(4, 0).is_err());
    }
}
