//! Estimators of the expected squared L2-discrepancy of stratified samples,
//! plus the closed-form baselines they are compared against.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lowdisc::{halton, l2_discrepancy_sq, HaltonConfig, PointSet};
use crate::numeric::compensated_sum;
use crate::partition::{GeneratingSet, Stratification};
use crate::qgeometry::QProfile;

/// Number of Halton nodes used when none is specified.
pub const DEFAULT_NODE_COUNT: usize = 40_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Qmc,
    Mc,
    #[serde(rename = "baseline")]
    ClosedFormBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateMeta {
    /// Number of points per stratified sample.
    pub n: usize,
    /// Integration nodes (QMC) or replicates (MC).
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// A value of `E[L2^2]`. `std_error` is set for Monte Carlo estimates only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyEstimate {
    pub value: f64,
    pub method: Method,
    pub std_error: Option<f64>,
    pub meta: EstimateMeta,
}

impl DiscrepancyEstimate {
    fn baseline(n: usize, value: f64) -> Self {
        Self {
            value,
            method: Method::ClosedFormBaseline,
            std_error: None,
            meta: EstimateMeta {
                n,
                samples: None,
                seed: None,
            },
        }
    }

    /// Whether `target` lies within `k` standard errors of an MC estimate.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        self.std_error
            .is_some_and(|se| (self.value - target).abs() <= k * se)
    }
}

/// Quadrature of `(1/N^2) sum_i ∫ q_i (1 - q_i)` over the given nodes.
///
/// Works for odd `N` as well, although only even `N` has reference values.
pub fn qmc_expected_l2_sq(n: usize, nodes: &PointSet) -> Result<DiscrepancyEstimate> {
    if nodes.is_empty() {
        return invalid("QMC estimate needs at least one node");
    }
    let profile = QProfile::new(GeneratingSet::new(n)?);
    let per_node: Vec<f64> = nodes
        .points
        .par_iter()
        .map(|p| profile.variance_sum(p.x, p.y))
        .collect();
    let m = nodes.len() as f64;
    let nf = n as f64;
    let value = compensated_sum(per_node) / m / (nf * nf);
    Ok(DiscrepancyEstimate {
        value,
        method: Method::Qmc,
        std_error: None,
        meta: EstimateMeta {
            n,
            samples: Some(nodes.len()),
            seed: None,
        },
    })
}

/// [`qmc_expected_l2_sq`] on the first `m_nodes` Halton points in bases 2 and 3.
pub fn qmc_halton(n: usize, m_nodes: usize) -> Result<DiscrepancyEstimate> {
    let nodes = halton(&HaltonConfig::standard(m_nodes)?);
    qmc_expected_l2_sq(n, &nodes)
}

/// Mean Warnock discrepancy over independent diagonal-strip samples.
pub fn mc_expected_l2_sq(n: usize, replicates: usize, seed: u64) -> Result<DiscrepancyEstimate> {
    mc_expected_l2_sq_for(&Stratification::diagonal(n)?, replicates, seed)
}

/// Mean Warnock discrepancy over `replicates` independent samples from `strat`,
/// with the standard error from the unbiased sample variance.
pub fn mc_expected_l2_sq_for(
    strat: &Stratification,
    replicates: usize,
    seed: u64,
) -> Result<DiscrepancyEstimate> {
    if replicates < 2 {
        return invalid(format!(
            "Monte Carlo needs at least 2 replicates, got {replicates}"
        ));
    }
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let sample = strat.sample_replicate(seed, r);
            l2_discrepancy_sq(&PointSet::new(sample.points)).expect("sample is non-empty")
        })
        .collect();
    let count = replicates as f64;
    let mean = compensated_sum(values.iter().copied()) / count;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (count - 1.0);
    Ok(DiscrepancyEstimate {
        value: mean,
        method: Method::Mc,
        std_error: Some((var / count).sqrt()),
        meta: EstimateMeta {
            n: strat.cells(),
            samples: Some(replicates),
            seed: Some(seed),
        },
    })
}

/// `E[L2^2]` of `n` i.i.d. uniform points: `5 / (36n)`.
pub fn random_baseline(n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    Ok(5.0 / (36.0 * n as f64))
}

/// Vertical strips: `(3n + 2) / (36 n^2)`.
pub fn vertical_baseline(n: usize) -> Result<f64> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let nf = n as f64;
    Ok((3.0 * nf + 2.0) / (36.0 * nf * nf))
}

/// Jittered sampling on an `m x m` grid: `m^-4 [(m/2)^2 - (m/2 - 1/6)^2]`.
pub fn jittered_baseline(m: usize) -> Result<f64> {
    if m == 0 {
        return invalid("m must be >= 1");
    }
    let mf = m as f64;
    let half = mf / 2.0;
    let shifted = half - 1.0 / 6.0;
    Ok((half * half - shifted * shifted) / mf.powi(4))
}

/// Closed-form expectation for a baseline stratification.
pub fn baseline_estimate(strat: &Stratification) -> Result<Option<DiscrepancyEstimate>> {
    Ok(match strat {
        Stratification::Diagonal(_) => None,
        Stratification::Vertical { n } => {
            Some(DiscrepancyEstimate::baseline(*n, vertical_baseline(*n)?))
        }
        Stratification::Jittered { m } => {
            Some(DiscrepancyEstimate::baseline(m * m, jittered_baseline(*m)?))
        }
    })
}

/// `random_baseline(n) / est.value`.
pub fn ratio_to_random(n: usize, est: &DiscrepancyEstimate) -> Result<f64> {
    if est.value.is_nan() || est.value <= 0.0 {
        return invalid(format!(
            "ratio needs a positive estimate, got {}",
            est.value
        ));
    }
    Ok(random_baseline(n)? / est.value)
}
