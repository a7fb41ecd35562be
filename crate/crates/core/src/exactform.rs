//! Closed-form expected L2-discrepancy for an even number of diagonal strips.
//!
//! With `Q_i = ∫∫ q_i^2`, the expectation is `1/(4N) - (1/N^2) sum_i Q_i`.
//! `Q_i` has four closed forms depending on where strip `i` sits: the corner
//! cell at the origin, the corner cell at `(1,1)`, strips above the
//! anti-diagonal (`N/2 < i < N`) and strips below it (`2 <= i <= N/2`).

use crate::error::{invalid, unsupported, Result};
use crate::estimators::{DiscrepancyEstimate, EstimateMeta, Method};
use crate::numeric::compensated_sum;

/// Square root that treats rounding-level negative radicands as zero.
fn sqrt_clamped(v: f64) -> f64 {
    debug_assert!(v >= -1e-12, "negative radicand {v}");
    v.max(0.0).sqrt()
}

fn require_even(n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("N must be >= 2, got {n}"));
    }
    if n % 2 == 1 {
        return unsupported(format!("closed forms cover even N only, got {n}"));
    }
    Ok(())
}

/// `Q_1 = 1 - 14 sqrt(2) / (15 sqrt(N)) + 2 / (5N)`.
pub fn q1_exact(n: usize) -> Result<f64> {
    require_even(n)?;
    let nf = n as f64;
    Ok(1.0 - 14.0 * std::f64::consts::SQRT_2 / (15.0 * nf.sqrt()) + 2.0 / (5.0 * nf))
}

/// `Q_N = 1 / (15N)`.
pub fn qn_exact(n: usize) -> Result<f64> {
    require_even(n)?;
    Ok(1.0 / (15.0 * n as f64))
}

/// `Q_i` for strips strictly above the anti-diagonal, `N/2 < i < N`.
pub fn q_mid_exact(n: usize, i: usize) -> Result<f64> {
    require_even(n)?;
    if !(2 * i > n && i < n) {
        return invalid(format!(
            "upper-strip formula needs N/2 < i < N, got i={i}, N={n}"
        ));
    }
    let nf = n as f64;
    let i = i as f64;
    let root = sqrt_clamped(1.0 - i / nf) * sqrt_clamped((nf - i + 1.0) / nf);
    let cubic = 4.0 * i * i * i;
    let quadratic = i * i * (4.0 * nf * root - 12.0 * nf - 2.0);
    let linear = i * (-8.0 * nf * nf * root + 12.0 * nf * nf + 4.0 * nf - 3.0);
    let constant = 4.0 * nf * nf * nf * root - 4.0 * nf * nf * nf - 2.0 * nf * nf + 3.0 * nf + 1.0;
    Ok((cubic + quadratic + linear + constant) / (15.0 * nf))
}

/// `Q_i` for strips at or below the anti-diagonal, `2 <= i <= N/2`.
pub fn q_low_exact(n: usize, i: usize) -> Result<f64> {
    require_even(n)?;
    if !(2..=n / 2).contains(&i) {
        return invalid(format!(
            "lower-strip formula needs 2 <= i <= N/2, got i={i}, N={n}"
        ));
    }
    let nf = n as f64;
    let fi = i as f64;
    let root_2n = (2.0 * nf).sqrt();
    let a = root_2n * sqrt_clamped(fi - 1.0);
    let b = sqrt_clamped(((i - 1) * i) as f64);
    let c = root_2n * fi.sqrt();
    let cubic = -4.0 * fi * fi * fi;
    let quadratic = fi * fi * (-16.0 * a + 4.0 * b + 16.0 * c + 10.0);
    let linear = fi * (32.0 * a - 8.0 * b - 40.0 * c + 5.0);
    let constant = -16.0 * a + 4.0 * b + 10.0 * c + 15.0 * nf - 5.0;
    Ok((cubic + quadratic + linear + constant) / (15.0 * nf))
}

/// `Q_i` from whichever closed form covers index `i`.
pub fn q_exact(n: usize, i: usize) -> Result<f64> {
    require_even(n)?;
    match i {
        0 => invalid("cell indices start at 1"),
        1 => q1_exact(n),
        i if i == n => qn_exact(n),
        i if i > n => invalid(format!("cell index {i} exceeds N={n}")),
        i if 2 * i <= n => q_low_exact(n, i),
        i => q_mid_exact(n, i),
    }
}

/// `Q_1 .. Q_N` for one even `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n: usize,
    q_values: Vec<f64>,
}

impl QTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.q_values
    }

    /// `Q_i`, one-based.
    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|k| self.q_values.get(k).copied())
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.q_values.iter().copied())
    }

    /// `sum_{i=2}^{N-1} Q_i`.
    pub fn interior_total(&self) -> f64 {
        compensated_sum(self.q_values[1..self.n - 1].iter().copied())
    }
}

/// For `N = 2` the table is just `(Q_1, Q_2)`.
pub fn q_table(n: usize) -> Result<QTable> {
    require_even(n)?;
    let q_values = (1..=n).map(|i| q_exact(n, i)).collect::<Result<Vec<_>>>()?;
    Ok(QTable { n, q_values })
}

/// `E[L2^2] = 1/(4N) - (1/N^2) sum_i Q_i`.
pub fn exact_expected_l2_sq(n: usize) -> Result<DiscrepancyEstimate> {
    let table = q_table(n)?;
    let nf = n as f64;
    let value = 1.0 / (4.0 * nf) - table.total() / (nf * nf);
    Ok(DiscrepancyEstimate {
        value,
        method: Method::Exact,
        std_error: None,
        meta: EstimateMeta {
            n,
            samples: None,
            seed: None,
        },
    })
}

/// Leading-order behaviour `5 / (72N)`.
pub fn asymptotic_expected_l2_sq(n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("N must be >= 1");
    }
    Ok(5.0 / (72.0 * n as f64))
}
