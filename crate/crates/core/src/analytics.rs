//! Rank-based tail statistics of frequency deviations.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RunOutput;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("at least {needed} samples required, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {0} is not finite")]
    NonFinite(usize),
}

/// Empirical complementary cumulative distribution.
///
/// The `i`-th smallest of `M` samples (1-based) is assigned
/// `R_i = 1 - (i - 1) / (M - 1)`; tied samples keep distinct ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve<S> {
    sorted: Vec<S>,
}

impl<S: Scalar> CcdfCurve<S> {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.sorted
    }

    /// `R` of the point at 0-based rank `index`.
    pub fn r_at(&self, index: usize) -> S {
        let last = S::lit((self.sorted.len() - 1) as f64);
        S::one() - S::lit(index as f64) / last
    }

    pub fn points(&self) -> impl Iterator<Item = (S, S)> + '_ {
        self.sorted.iter().enumerate().map(|(i, &x)| (x, self.r_at(i)))
    }

    /// At most `max_points` points, log-spaced in rank from both ends so the
    /// body and the tail stay resolved. Always includes the first and last point.
    pub fn decimated(&self, max_points: usize) -> Vec<(S, S)> {
        let m = self.sorted.len();
        if m <= max_points {
            return self.points().collect();
        }
        let per_side = (max_points / 2).max(1);
        let span = (m as f64).ln();
        let mut ranks: Vec<usize> = Vec::with_capacity(2 * per_side + 2);
        for k in 0..per_side {
            let offset = (span * k as f64 / (per_side - 1).max(1) as f64).exp() as usize - 1;
            let offset = offset.min(m - 1);
            ranks.push(offset);
            ranks.push(m - 1 - offset);
        }
        ranks.push(0);
        ranks.push(m - 1);
        ranks.sort_unstable();
        ranks.dedup();
        ranks.truncate(max_points);
        if *ranks.last().unwrap() != m - 1 {
            *ranks.last_mut().unwrap() = m - 1;
        }
        ranks.into_iter().map(|i| (self.sorted[i], self.r_at(i))).collect()
    }
}

fn ascending<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

pub fn ccdf<S: Scalar>(samples: &[S]) -> Result<CcdfCurve<S>, AnalyticsError> {
    if samples.len() < 2 {
        return Err(AnalyticsError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(AnalyticsError::NonFinite(i));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(ascending);
    Ok(CcdfCurve { sorted })
}

/// Population variance, computed in one streaming pass.
pub fn variance<S: Scalar>(samples: &[S]) -> S {
    let mut mean = S::zero();
    let mut m2 = S::zero();
    for (k, &x) in samples.iter().enumerate() {
        let n = S::lit((k + 1) as f64);
        let delta = x - mean;
        mean = mean + delta / n;
        m2 = m2 + delta * (x - mean);
    }
    if samples.is_empty() {
        S::zero()
    } else {
        m2 / S::lit(samples.len() as f64)
    }
}

/// Step-function reading of the curve: `R` at the largest sample not above `x`,
/// 1 below the smallest sample.
pub fn exceedance<S: Scalar>(curve: &CcdfCurve<S>, x: S) -> S {
    let below_or_at = curve.sorted.partition_point(|&v| v <= x);
    if below_or_at == 0 {
        S::one()
    } else {
        curve.r_at(below_or_at - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Number of post-transient samples.
    pub samples: usize,
    pub sigma2_omega: f64,
    /// Time-averaged pending tasks per device, in units of P0.
    pub mean_pending_per_device: f64,
    /// Same, per basic-DDC device. Absent when there are none.
    pub mean_pending_ddc: Option<f64>,
    /// Same, per communicating device. Absent when there are none.
    pub mean_pending_ceddc: Option<f64>,
    pub max_abs_deviation: f64,
    pub r_epsilon: f64,
    pub r_epsilon1: f64,
    pub r_0_1: f64,
}

pub fn summarize<S: Scalar>(output: &RunOutput<S>) -> Result<RunSummary, AnalyticsError> {
    let deviations = output.deviations();
    let curve = ccdf(&deviations)?;
    let start = output.first_statistic_index();
    let series = &output.series;
    let m = (series.len() - start) as f64;
    let rated = output.config.fleet.rated_power;
    let mean_of = |column: &[u32], size: usize| -> Option<f64> {
        (size > 0).then(|| {
            let sum: u64 = column[start..].iter().map(|&c| c as u64).sum();
            sum as f64 / m / size as f64 * rated
        })
    };
    let pending_total: Vec<u32> = series.pending_consuming[start..]
        .iter()
        .zip(&series.pending_saving[start..])
        .map(|(a, b)| a + b)
        .collect();
    let n = output.config.fleet.devices;
    let ddc = output.config.ddc;
    let r = |x: f64| exceedance(&curve, S::lit(x)).to_f64_lossy();
    Ok(RunSummary {
        samples: deviations.len(),
        sigma2_omega: variance(output.statistic_omega()).to_f64_lossy(),
        mean_pending_per_device: pending_total.iter().map(|&c| c as u64).sum::<u64>() as f64
            / m
            / n as f64
            * rated,
        mean_pending_ddc: mean_of(&series.pending_ddc, output.subpopulations.ddc),
        mean_pending_ceddc: mean_of(&series.pending_ceddc, output.subpopulations.ceddc),
        max_abs_deviation: curve.values().last().copied().unwrap_or_default().to_f64_lossy(),
        r_epsilon: r(ddc.epsilon),
        r_epsilon1: r(ddc.epsilon1),
        r_0_1: r(0.1),
    })
}
