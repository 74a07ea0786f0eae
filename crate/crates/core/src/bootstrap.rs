//! Bootstrap Hausman-type test for daily co-jump significance.
//!
//! Under the null of no discontinuities, realized covariance and the JWC
//! estimator agree. The statistic `(QV - IC) / QV` of the observed day is
//! standardized with its bootstrap distribution over jump-free Gaussian days
//! that share the day's continuous covariance.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::jwc::{JwcConfig, ScaleTerms, TwoScaleTransform};

/// Bound applied to the correlation fed to the null simulator.
pub const RHO_CLAMP: f64 = 0.999;

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub alpha: f64,
    pub jwc: JwcConfig,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replications: 999,
            alpha: 0.05,
            jwc: JwcConfig::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "bootstrap replications must be at least {MIN_REPLICATIONS}, got {}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Two-sided standard normal critical value `phi_{1 - alpha/2}`.
pub fn critical_value(alpha: f64) -> f64 {
    standard_normal().inverse_cdf(1.0 - alpha / 2.0)
}

fn standard_normal() -> Normal {
    Normal::standard()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    NoDiscontinuity,
    CoJump,
    DisjointOnly,
    /// The statistic could not be standardized (zero QV or degenerate
    /// bootstrap spread).
    Inconclusive,
}

impl Classification {
    /// Rejection with a common jump index is a co-jump; rejection without
    /// one is attributed to disjoint jumps.
    pub fn from_test(rejected: bool, common_jump: bool) -> Self {
        match (rejected, common_jump) {
            (false, _) => Classification::NoDiscontinuity,
            (true, true) => Classification::CoJump,
            (true, false) => Classification::DisjointOnly,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NoDiscontinuity => "no_discontinuity",
            Classification::CoJump => "co_jump",
            Classification::DisjointOnly => "disjoint_only",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_discontinuity" => Ok(Classification::NoDiscontinuity),
            "co_jump" => Ok(Classification::CoJump),
            "disjoint_only" => Ok(Classification::DisjointOnly),
            "inconclusive" => Ok(Classification::Inconclusive),
            other => Err(Error::InvalidInput(format!("unknown classification '{other}'"))),
        }
    }
}

/// Outcome of the daily test for one pair. `z` and `p_value` are NaN when
/// the test is inconclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub z: f64,
    pub p_value: f64,
    pub rejected: bool,
    pub mean_z_star: f64,
    pub var_z_star: f64,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub classification: Classification,
}

impl TestOutcome {
    pub fn is_inconclusive(&self) -> bool {
        self.classification == Classification::Inconclusive
    }

    fn inconclusive(config: &BootstrapConfig, seed: u64, mean: f64, var: f64) -> Self {
        TestOutcome {
            z: f64::NAN,
            p_value: f64::NAN,
            rejected: false,
            mean_z_star: mean,
            var_z_star: var,
            replications: config.replications,
            alpha: config.alpha,
            seed,
            classification: Classification::Inconclusive,
        }
    }
}

/// Observed day quantities the test needs for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDayStats {
    /// Number of intraday returns.
    pub len: usize,
    /// Realized covariance of the raw returns.
    pub qv: f64,
    /// JWC integrated covariance entries `IC_11`, `IC_22`, `IC_12`.
    pub ic_11: f64,
    pub ic_22: f64,
    pub ic_12: f64,
    /// Whether jump detection found a common jump index.
    pub common_jump: bool,
}

impl PairDayStats {
    /// Correlation implied by the IC entries, clamped to [`RHO_CLAMP`].
    pub fn null_correlation(&self) -> f64 {
        let denom = (self.ic_11 * self.ic_22).sqrt();
        if denom > 0.0 && self.ic_12.is_finite() {
            (self.ic_12 / denom).clamp(-RHO_CLAMP, RHO_CLAMP)
        } else {
            0.0
        }
    }
}

/// Draws one jump-free Gaussian return pair with daily variances `ic_11`,
/// `ic_22` and correlation `rho`.
pub fn simulate_null_day_with(
    ic_11: f64,
    ic_22: f64,
    rho: f64,
    len: usize,
    rng: &mut impl rand::Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("correlation {rho} outside [-1, 1]")));
    }
    if !(ic_11 >= 0.0 && ic_22 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "null variances must be non-negative, got {ic_11} and {ic_22}"
        )));
    }
    let s1 = (ic_11 / len as f64).sqrt();
    let s2 = (ic_22 / len as f64).sqrt();
    let orth = (1.0 - rho * rho).sqrt();
    let mut first = Vec::with_capacity(len);
    let mut second = Vec::with_capacity(len);
    for _ in 0..len {
        let e1: f64 = StandardNormal.sample(rng);
        let e2: f64 = StandardNormal.sample(rng);
        first.push(s1 * e1);
        second.push(s2 * (rho * e1 + orth * e2));
    }
    Ok((first, second))
}

/// [`simulate_null_day_with`] on a ChaCha8 stream seeded from `seed`.
pub fn simulate_null_day(ic_11: f64, ic_22: f64, rho: f64, len: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    simulate_null_day_with(ic_11, ic_22, rho, len, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Generator for replication `b` of a test seeded with `seed`. Each
/// replication owns a separate ChaCha stream, so results do not depend on
/// scheduling.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Child seed for a keyed sub-task, mixed with SplitMix64 finalizers.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    keys.iter().fold(mix(master), |acc, &k| mix(acc ^ mix(k)))
}

/// `(QV - IC) / QV` of one jump-free replication.
fn replication_statistic(stats: &PairDayStats, rho: f64, config: &BootstrapConfig, seed: u64, b: usize) -> Result<f64> {
    let mut rng = replication_rng(seed, b);
    let (x, y) = simulate_null_day_with(stats.ic_11, stats.ic_22, rho, stats.len, &mut rng)?;
    let qv: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let tx = TwoScaleTransform::from_config(&x, &config.jwc)?;
    let ty = TwoScaleTransform::from_config(&y, &config.jwc)?;
    let ic = ScaleTerms::new(&tx, &ty)?.estimate(config.jwc.c_n, config.jwc.fast_spacing);
    Ok((qv - ic) / qv)
}

/// Bootstrap Hausman-type test for one day and pair.
pub fn bootstrap_statistic(stats: &PairDayStats, config: &BootstrapConfig, seed: u64) -> Result<TestOutcome> {
    config.validate()?;
    config.jwc.validate(stats.len)?;
    if stats.qv == 0.0 || !stats.qv.is_finite() {
        return Ok(TestOutcome::inconclusive(config, seed, f64::NAN, f64::NAN));
    }
    let rho = stats.null_correlation();
    let draws = (0..config.replications)
        .into_par_iter()
        .map(|b| replication_statistic(stats, rho, config, seed, b))
        .collect::<Result<Vec<f64>>>()?;
    if draws.iter().any(|v| !v.is_finite()) {
        return Ok(TestOutcome::inconclusive(config, seed, f64::NAN, f64::NAN));
    }
    let count = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / count;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    if !(var > 0.0) {
        return Ok(TestOutcome::inconclusive(config, seed, mean, var));
    }
    let observed = (stats.qv - stats.ic_12) / stats.qv;
    let z = (observed - mean) / var.sqrt();
    if !z.is_finite() {
        return Ok(TestOutcome::inconclusive(config, seed, mean, var));
    }
    let p_value = (2.0 * standard_normal().sf(z.abs())).min(1.0);
    let rejected = z.abs() > critical_value(config.alpha);
    Ok(TestOutcome {
        z,
        p_value,
        rejected,
        mean_z_star: mean,
        var_z_star: var,
        replications: config.replications,
        alpha: config.alpha,
        seed,
        classification: Classification::from_test(rejected, stats.common_jump),
    })
}

/// Final continuous covariance entry for a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcStar {
    pub value: f64,
    /// Set when the test was inconclusive and `IC_jwc` was kept.
    pub inconclusive: bool,
}

/// Keeps `QV` unless the test rejects (`|Z| > phi_{1-alpha/2}`), in which
/// case the jump-robust `IC_jwc` is used.
pub fn select_ic_star(test: &TestOutcome, qv: f64, ic_jwc: f64) -> IcStar {
    if test.is_inconclusive() {
        return IcStar {
            value: ic_jwc,
            inconclusive: true,
        };
    }
    let value = if test.z.abs() <= critical_value(test.alpha) { qv } else { ic_jwc };
    IcStar {
        value,
        inconclusive: false,
    }
}
