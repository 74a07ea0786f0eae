//! Jump localization by thresholding level-1 wavelet coefficients, jump
//! adjustment of returns, realized covariance and co-jump variation.

use crate::error::{ensure_same_len, Error, Result};
use crate::modwt::{level1_coefficients, Boundary, FilterPair};

/// Consistency constant of the median absolute deviation for Gaussian data.
pub const MAD_CONSTANT: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// Set when every coefficient is zero and the threshold collapses to 0.
    pub degenerate: bool,
}

/// Universal threshold `sqrt(2) * median|W| * sqrt(2 ln N) / 0.6745` over the
/// day's level-1 coefficients.
pub fn universal_threshold(coeffs: &[f64]) -> Result<Threshold> {
    let n = coeffs.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, required: 2 });
    }
    let mut abs: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
    if abs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite wavelet coefficient".into()));
    }
    abs.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    };
    let value = std::f64::consts::SQRT_2 * median * (2.0 * (n as f64).ln()).sqrt() / MAD_CONSTANT;
    Ok(Threshold {
        value,
        degenerate: abs[n - 1] == 0.0,
    })
}

/// Detected jumps of one instrument on one day.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpSeries {
    jump_sizes: Vec<f64>,
    jump_indices: Vec<usize>,
    threshold: f64,
    degenerate: bool,
}

impl JumpSeries {
    /// A series of length `len` without jumps.
    pub fn empty(len: usize, threshold: f64) -> Self {
        JumpSeries {
            jump_sizes: vec![0.0; len],
            jump_indices: Vec::new(),
            threshold,
            degenerate: false,
        }
    }

    /// Builds a series from explicit `(index, size)` pairs; zero sizes are
    /// ignored.
    pub fn from_jumps(len: usize, jumps: &[(usize, f64)]) -> Result<Self> {
        let mut series = JumpSeries::empty(len, 0.0);
        for &(index, size) in jumps {
            if index >= len {
                return Err(Error::InvalidInput(format!("jump index {index} outside 0..{len}")));
            }
            series.jump_sizes[index] = size;
        }
        series.reindex();
        Ok(series)
    }

    fn reindex(&mut self) {
        self.jump_indices = (0..self.jump_sizes.len())
            .filter(|&i| self.jump_sizes[i] != 0.0)
            .collect();
    }

    pub fn len(&self) -> usize {
        self.jump_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_sizes.is_empty()
    }

    /// Jump size per interval, zero where no jump was flagged.
    pub fn sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    /// Sorted flagged indices.
    pub fn indices(&self) -> &[usize] {
        &self.jump_indices
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// True when the day's threshold was degenerate and detection skipped.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn has_jumps(&self) -> bool {
        !self.jump_indices.is_empty()
    }

    /// Sum of squared jump sizes (diagonal of the co-jump matrix).
    pub fn squared_variation(&self) -> f64 {
        self.jump_indices.iter().map(|&i| self.jump_sizes[i].powi(2)).sum()
    }
}

/// Flags index `i` iff `|W1[i]| > threshold` and records the raw return there.
///
/// A flagged interval whose return is exactly zero carries no jump and is not
/// recorded.
pub fn detect_jumps(returns: &[f64], coeffs: &[f64], threshold: f64) -> Result<JumpSeries> {
    ensure_same_len(returns.len(), coeffs.len())?;
    let mut series = JumpSeries::empty(returns.len(), threshold);
    for (i, (&r, &w)) in returns.iter().zip(coeffs).enumerate() {
        if w.abs() > threshold {
            series.jump_sizes[i] = r;
        }
    }
    series.reindex();
    Ok(series)
}

/// Settings for level-1 jump localization.
#[derive(Debug, Clone, Copy)]
pub struct DetectionConfig {
    pub filters: &'static FilterPair,
    pub boundary: Boundary,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            filters: FilterPair::haar(),
            boundary: Boundary::Reflecting,
        }
    }
}

/// Coefficients, threshold and jumps in one pass. A degenerate threshold
/// yields an empty series with the degenerate flag set.
pub fn locate_jumps(returns: &[f64], config: &DetectionConfig) -> Result<JumpSeries> {
    let coeffs = level1_coefficients(returns, config.filters, config.boundary)?;
    let threshold = universal_threshold(&coeffs)?;
    if threshold.degenerate {
        let mut series = JumpSeries::empty(returns.len(), 0.0);
        series.degenerate = true;
        return Ok(series);
    }
    detect_jumps(returns, &coeffs, threshold.value)
}

/// Jump-adjusted returns; flagged intervals become exactly zero.
pub fn adjust_returns(returns: &[f64], jumps: &JumpSeries) -> Result<Vec<f64>> {
    ensure_same_len(returns.len(), jumps.len())?;
    Ok(returns
        .iter()
        .zip(jumps.sizes())
        .map(|(r, j)| if *j != 0.0 { 0.0 } else { *r })
        .collect())
}

/// `sum_i x_i y_i`.
pub fn realized_covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    ensure_same_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// A simultaneous jump of two instruments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoJumpEvent {
    pub index: usize,
    pub size_1: f64,
    pub size_2: f64,
}

impl CoJumpEvent {
    pub fn product(&self) -> f64 {
        self.size_1 * self.size_2
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoJumps {
    /// Co-jump variation `sum_i dJ_1(i) dJ_2(i)`.
    pub value: f64,
    pub events: Vec<CoJumpEvent>,
}

/// Co-jump variation over the intersection of the two jump index sets.
pub fn cojump_variation(first: &JumpSeries, second: &JumpSeries) -> Result<CoJumps> {
    ensure_same_len(first.len(), second.len())?;
    let (a, b) = (first.indices(), second.indices());
    let (mut i, mut j) = (0, 0);
    let mut out = CoJumps::default();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let index = a[i];
                let event = CoJumpEvent {
                    index,
                    size_1: first.sizes()[index],
                    size_2: second.sizes()[index],
                };
                out.value += event.product();
                out.events.push(event);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

/// Indices at which every series jumps.
pub fn common_jump_indices(series: &[&JumpSeries]) -> Vec<usize> {
    let Some((first, rest)) = series.split_first() else {
        return Vec::new();
    };
    first
        .indices()
        .iter()
        .copied()
        .filter(|&i| rest.iter().all(|s| s.sizes().get(i).is_some_and(|v| *v != 0.0)))
        .collect()
}

/// Symmetric d x d co-jump variation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoJumpMatrix {
    values: Vec<Vec<f64>>,
}

impl CoJumpMatrix {
    pub fn from_series(series: &[JumpSeries]) -> Result<Self> {
        let d = series.len();
        let mut values = vec![vec![0.0; d]; d];
        for a in 0..d {
            values[a][a] = series[a].squared_variation();
            for b in a + 1..d {
                let cj = cojump_variation(&series[a], &series[b])?.value;
                values[a][b] = cj;
                values[b][a] = cj;
            }
        }
        Ok(CoJumpMatrix { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }
}
