//! Numerical checks of the large-`N` analysis of `sum_{i=2}^{N-1} Q_i`.
//!
//! The interior sum is regrouped into pairs `g(i) = Q_i + Q_{N+1-i}` and split
//! by powers of `i` into four series `S_3 .. S_0`. Those series are approximated
//! with Euler–Maclaurin closed forms for `sum i^k sqrt(i-1)` and `sum i^k`, and
//! the leading orders cancel down to `13N/72 + O(sqrt N)`. Everything here
//! compares the closed forms with direct summation and measures error orders
//! by log-log regression over octaves of `n`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exactform::q_table;
use crate::numeric::{compensated_sum, loglog_slope, DoubleDouble};

/// Largest `n` accepted by the direct sums.
pub const MAX_DIRECT_N: usize = 1 << 20;

/// Exponents for which the `sum i^k sqrt(i-1)` closed form is stated.
pub const LEMMA_SUM_EXPONENTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

/// Exponents for which the generalised harmonic closed form is supported.
pub const HARMONIC_EXPONENTS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// `2k` when `k` is a non-negative half-integer.
fn twice(k: f64) -> Option<u32> {
    let t = 2.0 * k;
    (t >= 0.0 && t.fract() == 0.0 && t <= 64.0).then_some(t as u32)
}

fn require_even_n(n: usize, min: usize) -> Result<()> {
    if n < min || n % 2 == 1 {
        return invalid(format!("n must be even and >= {min}, got {n}"));
    }
    if n > MAX_DIRECT_N {
        return invalid(format!("n capped at {MAX_DIRECT_N}, got {n}"));
    }
    Ok(())
}

/// Direct `sum_{i=2}^{n/2} i^k sqrt(i-1)` with compensated accumulation.
pub fn sum_ik_sqrt(n: usize, k: f64) -> Result<f64> {
    require_even_n(n, 4)?;
    if k.is_nan() || k < 0.0 {
        return invalid(format!("exponent must be >= 0, got {k}"));
    }
    Ok(compensated_sum((2..=n / 2).map(|i| {
        let fi = i as f64;
        fi.powf(k) * (fi - 1.0).sqrt()
    })))
}

/// Euler–Maclaurin approximant of `sum_{i=2}^{n/2} i^k sqrt(i-1)`, as
/// stated, including its constant terms.
pub fn lemma_sum_closed_form(n: usize, k: f64) -> Result<f64> {
    require_even_n(n, 4)?;
    if !LEMMA_SUM_EXPONENTS.contains(&k) {
        return invalid(format!(
            "sum closed form stated for k in {LEMMA_SUM_EXPONENTS:?}, got {k}"
        ));
    }
    let nf = n as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    if k == 0.5 {
        let bracket =
            sqrt2 * (6.0 * nf * nf - 10.0 * nf - 2.0) / ((nf - 2.0).sqrt() * nf.sqrt()) + 21.0;
        return Ok(nf * nf / 8.0 - nf / 4.0 + bracket / (24.0 * sqrt2)
            - (nf / 4.0).ln() / 8.0
            - 1.0);
    }
    let two = 2f64;
    let t1 = -two.powf(-k - 2.5) * (4f64.powf(k) - 2.0 * nf.powf(k - 0.5)) / (1.0 - 2.0 * k);
    let t2 = -(two.powf(0.5 - k) * nf.powf(k + 0.5) - two.powf(k + 1.5)) / (2.0 * (2.0 * k + 1.0));
    let t3 = two.powf(-k - 0.5) * (nf.powf(k + 1.5) - two.powf(2.0 * k + 3.0)) / (2.0 * k + 3.0);
    let inner = sqrt2 * (2.0 * k * (nf - 2.0) + nf * (6.0 * nf - 11.0)) * nf.powf(k - 1.0)
        / (nf - 2.0).sqrt();
    let t4 = two.powf(-k - 3.0) / 3.0 * (inner + 11.0 * 4f64.powf(k) - 4f64.powf(k) * k);
    Ok(t1 + t2 + t3 + t4)
}

/// Error exponent claimed for [`lemma_sum_closed_form`]: `-1` for `k = 1/2`,
/// otherwise `k - 3/2`.
pub fn lemma_sum_claimed_order(k: f64) -> f64 {
    if k == 0.5 {
        -1.0
    } else {
        k - 1.5
    }
}

/// `zeta(-k)` for the supported exponents, to double-double precision.
pub fn zeta_negative(k: f64) -> Option<DoubleDouble> {
    let z = match twice(k)? {
        1 => DoubleDouble::new(-0.20788622497735457, 7.168711399310433e-19),
        2 => DoubleDouble::new(-0.08333333333333333, -4.625929269271485e-18),
        3 => DoubleDouble::new(-0.025485201889833036, 1.6009083677411215e-19),
        4 => DoubleDouble::ZERO,
        5 => DoubleDouble::new(0.008516928777850331, -4.775355252931205e-19),
        6 => DoubleDouble::new(0.008333333333333333, 1.1564823173178714e-19),
        _ => return None,
    };
    Some(z)
}

/// `n^(e/2)` in double-double for `e >= -1`.
fn pow_half(n: usize, twice_e: i32) -> DoubleDouble {
    let nf = n as f64;
    if twice_e == -1 {
        return DoubleDouble::sqrt_f64(nf) / nf;
    }
    assert!(twice_e >= 0, "unsupported exponent {twice_e}/2");
    let mut acc = if twice_e % 2 == 1 {
        DoubleDouble::sqrt_f64(nf)
    } else {
        DoubleDouble::from_f64(1.0)
    };
    for _ in 0..twice_e / 2 {
        acc = acc * nf;
    }
    acc
}

/// `sum_{i=1}^n i^k` in double-double.
pub fn harmonic_direct(n: usize, k: f64) -> Result<DoubleDouble> {
    let t = twice(k).ok_or_else(|| {
        crate::Error::InvalidArgument(format!("k must be a half-integer, got {k}"))
    })?;
    if n > MAX_DIRECT_N {
        return invalid(format!("n capped at {MAX_DIRECT_N}, got {n}"));
    }
    Ok((1..=n).map(|i| pow_half(i, t as i32)).sum())
}

fn harmonic_closed_form_dd(n: usize, k: f64) -> Result<DoubleDouble> {
    if !HARMONIC_EXPONENTS.contains(&k) {
        return invalid(format!(
            "harmonic closed form supported for k in {HARMONIC_EXPONENTS:?}, got {k}"
        ));
    }
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let t = twice(k).expect("listed exponents are half-integers") as i32;
    let zeta = zeta_negative(k).expect("listed exponents have zeta values");
    Ok(
        zeta + pow_half(n, t + 2) / (k + 1.0)
            + pow_half(n, t) / 2.0
            + pow_half(n, t - 2) * k / 12.0,
    )
}

/// `zeta(-k) + n^(k+1)/(k+1) + n^k/2 + k n^(k-1)/12`.
pub fn harmonic_closed_form(n: usize, k: f64) -> Result<f64> {
    harmonic_closed_form_dd(n, k).map(DoubleDouble::to_f64)
}

/// Claimed error exponent `k - 2` of [`harmonic_closed_form`].
pub fn harmonic_claimed_order(k: f64) -> f64 {
    k - 2.0
}

/// `g(i) = Q_i + Q_{N+1-i}` from its simplified closed form, `2 <= i <= N/2`.
pub fn g_pair(n: usize, i: usize) -> Result<f64> {
    require_even_n(n, 4)?;
    if !(2..=n / 2).contains(&i) {
        return invalid(format!("g(i) needs 2 <= i <= N/2, got i={i}, N={n}"));
    }
    let nf = n as f64;
    let fi = i as f64;
    let s2 = std::f64::consts::SQRT_2;
    let a = ((fi - 1.0) / nf).sqrt();
    let b = (fi / nf).sqrt();
    let cubic = -8.0 * fi * fi * fi;
    let quadratic = fi * fi * (-16.0 * s2 * nf * a + 8.0 * nf * a * b + 16.0 * s2 * nf * b + 20.0);
    let linear = fi * (32.0 * s2 * nf * a - 16.0 * nf * a * b - 40.0 * s2 * nf * b);
    let constant = -16.0 * s2 * nf * a + 8.0 * nf * a * b + 10.0 * s2 * nf * b + 15.0 * nf - 5.0;
    Ok((cubic + quadratic + linear + constant) / (15.0 * nf))
}

/// The four series whose sum is `sum_{i=2}^{N-1} Q_i`, grouped by power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SSums {
    pub s3: f64,
    pub s2: f64,
    pub s1: f64,
    pub s0: f64,
}

impl SSums {
    pub fn total(&self) -> f64 {
        compensated_sum([self.s3, self.s2, self.s1, self.s0])
    }
}

pub fn s_sums(n: usize) -> Result<SSums> {
    require_even_n(n, 4)?;
    let nf = n as f64;
    let s2c = std::f64::consts::SQRT_2;
    let terms = || {
        (2..=n / 2).map(move |i| {
            let fi = i as f64;
            (fi, ((fi - 1.0) / nf).sqrt(), (fi / nf).sqrt())
        })
    };
    let d = 15.0 * nf;
    Ok(SSums {
        s3: compensated_sum(terms().map(|(i, _, _)| -8.0 * i * i * i / d)),
        s2: compensated_sum(terms().map(|(i, a, b)| {
            i * i * (-16.0 * s2c * nf * a + 8.0 * nf * a * b + 16.0 * s2c * nf * b + 20.0) / d
        })),
        s1: compensated_sum(terms().map(|(i, a, b)| {
            i * (32.0 * s2c * nf * a - 16.0 * nf * a * b - 40.0 * s2c * nf * b) / d
        })),
        s0: compensated_sum(terms().map(|(_, a, b)| {
            (-16.0 * s2c * nf * a + 8.0 * nf * a * b + 10.0 * s2c * nf * b + 15.0 * nf - 5.0) / d
        })),
    })
}

/// `S_3 = -N^3/120 - N^2/30 - N/30 + 8/(15N)`.
pub fn s3_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    -nf * nf * nf / 120.0 - nf * nf / 30.0 - nf / 30.0 + 8.0 / (15.0 * nf)
}

/// A direct sum compared against its closed-form approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumCheckReport {
    pub n: usize,
    pub direct: f64,
    pub closed_form: f64,
    pub abs_error: f64,
    /// Exponent of `n` claimed for the error term.
    pub claimed_order: f64,
}

/// `sum_{i=2}^{N-1} Q_i` against its leading term `13N/72`.
pub fn collapse_check(n: usize) -> Result<SumCheckReport> {
    require_even_n(n, 2)?;
    let direct = q_table(n)?.interior_total();
    let closed_form = 13.0 * n as f64 / 72.0;
    Ok(SumCheckReport {
        n,
        direct,
        closed_form,
        abs_error: (direct - closed_form).abs(),
        claimed_order: 0.5,
    })
}

/// Outcome of regressing `ln|error|` on `ln n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub label: String,
    pub claimed_order: f64,
    /// `None` when every error is at rounding level (the closed form is exact).
    pub fitted_order: Option<f64>,
    /// `(n, |error|)` pairs the fit was made from.
    pub errors: Vec<(usize, f64)>,
}

impl OrderFit {
    fn from_errors(
        label: String,
        claimed_order: f64,
        errors: Vec<(usize, f64)>,
        floor: f64,
    ) -> Self {
        let exact = errors.iter().all(|&(_, e)| e <= floor);
        let fitted_order = if exact {
            None
        } else {
            let pts: Vec<(f64, f64)> = errors
                .iter()
                .map(|&(n, e)| (n as f64, e.max(floor)))
                .collect();
            loglog_slope(&pts)
        };
        Self {
            label,
            claimed_order,
            fitted_order,
            errors,
        }
    }

    /// Whether the measured error grows no faster than `n^(claimed + slack)`.
    pub fn consistent_with_claim(&self, slack: f64) -> bool {
        self.fitted_order
            .is_none_or(|p| p <= self.claimed_order + slack)
    }

    /// Whether the measured exponent lies within `±slack` of the claim.
    pub fn matches_claim(&self, slack: f64) -> bool {
        self.fitted_order
            .is_some_and(|p| (p - self.claimed_order).abs() <= slack)
    }
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn octaves(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

/// Error order of the `sum i^k sqrt(i-1)` closed form over `ns`.
pub fn lemma_sum_order(k: f64, ns: &[usize]) -> Result<OrderFit> {
    let errors = ns
        .iter()
        .map(|&n| Ok((n, (sum_ik_sqrt(n, k)? - lemma_sum_closed_form(n, k)?).abs())))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderFit::from_errors(
        format!("lemma_sum k={k}"),
        lemma_sum_claimed_order(k),
        errors,
        0.0,
    ))
}

/// Error order of the generalised harmonic closed form over `ns`, in
/// double-double so that sub-ulp errors remain measurable.
pub fn harmonic_order(k: f64, ns: &[usize]) -> Result<OrderFit> {
    let errors = ns
        .iter()
        .map(|&n| {
            let diff = harmonic_direct(n, k)? - harmonic_closed_form_dd(n, k)?;
            Ok((n, diff.abs().to_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    // anything below ~1e-28 relative to the leading term is double-double rounding
    let scale = ns
        .iter()
        .map(|&n| (n as f64).powf(k + 1.0))
        .fold(0.0, f64::max);
    Ok(OrderFit::from_errors(
        format!("harmonic k={k}"),
        harmonic_claimed_order(k),
        errors,
        1e-28 * scale,
    ))
}

/// Error order of `|sum Q_i - 13N/72|` over `ns`.
pub fn collapse_order(ns: &[usize]) -> Result<OrderFit> {
    let errors = ns
        .iter()
        .map(|&n| collapse_check(n).map(|r| (n, r.abs_error)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderFit::from_errors(
        "collapse 13N/72".into(),
        0.5,
        errors,
        0.0,
    ))
}

/// Constant-level offset of the `sum i^k sqrt(i-1)` closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetEstimate {
    pub k: f64,
    /// Limit of `direct - closed` as `n -> inf`, fitted with the model `C + a n^p`
    /// where `p` is the claimed error order.
    pub measured_constant: f64,
    /// Exponent of `|direct - closed - C|`, i.e. the error order once the
    /// constant is accounted for.
    pub residual_order: Option<f64>,
}

/// Fit `direct - closed = C + a n^p` (with `p` the claimed, negative, order)
/// by least squares and report `C` and the decay of the remainder.
pub fn lemma_sum_offset(k: f64, ns: &[usize]) -> Result<OffsetEstimate> {
    let p = lemma_sum_claimed_order(k);
    if p >= 0.0 {
        return invalid(format!(
            "offset model needs a decaying claimed order, k={k} claims {p}"
        ));
    }
    let signed = ns
        .iter()
        .map(|&n| Ok((n as f64, sum_ik_sqrt(n, k)? - lemma_sum_closed_form(n, k)?)))
        .collect::<Result<Vec<_>>>()?;
    // normal equations for the basis {1, n^p}
    let m = signed.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, e) in &signed {
        let x = n.powf(p);
        sx += x;
        sxx += x * x;
        sy += e;
        sxy += x * e;
    }
    let det = m * sxx - sx * sx;
    let constant = (sxx * sy - sx * sxy) / det;
    let residual: Vec<(f64, f64)> = signed
        .iter()
        .map(|&(n, e)| (n, (e - constant).abs()))
        .collect();
    Ok(OffsetEstimate {
        k,
        measured_constant: constant,
        residual_order: loglog_slope(&residual),
    })
}
