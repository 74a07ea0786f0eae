//! Jump wavelet covariance (JWC) estimator of integrated covariance.
//!
//! Per wavelet scale, a subsampled ("slow", spacing `G`) wavelet realized
//! covariance is combined with the full-grid ("fast") one:
//!
//! ```text
//! IC = sum_{j=1}^{J+1} c_N * ( IC_G(j) - (nbar_G / n_S) * IC_WRC(j) )
//! nbar_G = (N - G + 1) / G,   n_S = (N - S + 1) / S
//! ```
//!
//! Scale `J + 1` is the scaling-coefficient product. Because the MODWT
//! preserves energy, summing a covariance over all `J + 1` scales reproduces
//! the realized covariance of the transformed series exactly.

use crate::error::{ensure_same_len, Error, Result};
use crate::modwt::{max_levels, modwt_forward, Boundary, FilterPair, WaveletDecomposition};

/// How the slow subsample spacing `G` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlowSpacing {
    /// `max(2, round(N^(2/3)))`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct JwcConfig {
    /// Small-sample constant `c_N`.
    pub c_n: f64,
    /// Fast subsample spacing `S`.
    pub fast_spacing: usize,
    pub slow_spacing: SlowSpacing,
    /// Decomposition depth `J`; `None` picks [`default_levels`].
    pub levels: Option<usize>,
    pub filters: &'static FilterPair,
    pub boundary: Boundary,
}

impl Default for JwcConfig {
    fn default() -> Self {
        JwcConfig {
            c_n: 1.0,
            fast_spacing: 1,
            slow_spacing: SlowSpacing::Auto,
            levels: None,
            filters: FilterPair::d4(),
            boundary: Boundary::Reflecting,
        }
    }
}

/// Default depth: 4 for `N >= 256`, otherwise `floor(log2 N) - 2`, never
/// below 1.
pub fn default_levels(n: usize) -> usize {
    if n >= 256 {
        4
    } else {
        let log2 = (usize::BITS - 1 - n.max(1).leading_zeros()) as usize;
        log2.saturating_sub(2).max(1)
    }
}

pub fn default_slow_spacing(n: usize) -> usize {
    ((n as f64).powf(2.0 / 3.0).round() as usize).max(2)
}

impl JwcConfig {
    pub fn with_slow_spacing(mut self, g: usize) -> Self {
        self.slow_spacing = SlowSpacing::Fixed(g);
        self
    }

    pub fn slow_spacing_for(&self, n: usize) -> usize {
        match self.slow_spacing {
            SlowSpacing::Auto => default_slow_spacing(n),
            SlowSpacing::Fixed(g) => g,
        }
    }

    pub fn levels_for(&self, n: usize) -> usize {
        self.levels.unwrap_or_else(|| {
            default_levels(n).min(max_levels(n, self.filters, self.boundary).max(1))
        })
    }

    /// Checks `1 <= S < G <= N`, a positive finite `c_N` and an admissible
    /// depth for a day of `n` intervals.
    pub fn validate(&self, n: usize) -> Result<()> {
        let g = self.slow_spacing_for(n);
        let s = self.fast_spacing;
        if !(1 <= s && s < g && g <= n) {
            return Err(Error::InvalidConfig(format!(
                "subsample spacings must satisfy 1 <= S < G <= N (S = {s}, G = {g}, N = {n})"
            )));
        }
        if !(self.c_n.is_finite() && self.c_n > 0.0) {
            return Err(Error::InvalidConfig(format!("c_N must be positive, got {}", self.c_n)));
        }
        let levels = self.levels_for(n);
        let max = max_levels(n, self.filters, self.boundary);
        if levels == 0 || levels > max {
            return Err(Error::InvalidLevel { levels, max });
        }
        Ok(())
    }
}

/// Aggregates `returns` onto the spacing-`spacing` grid anchored at `offset`.
///
/// Blocks are `[0, offset)`, `[offset, offset + G)`, ... with partial blocks
/// at both ends kept, so each return enters exactly one sparse return.
pub fn sparse_returns(returns: &[f64], spacing: usize, offset: usize) -> Vec<f64> {
    let n = returns.len();
    let mut out = Vec::with_capacity(n / spacing.max(1) + 2);
    if offset > 0 {
        out.push(returns[..offset.min(n)].iter().sum());
    }
    let mut start = offset;
    while start < n {
        let end = (start + spacing).min(n);
        out.push(returns[start..end].iter().sum());
        start = end;
    }
    out
}

/// MODWT of a day's jump-adjusted returns on the full grid and on each of
/// the `G` sparse grids.
#[derive(Debug, Clone)]
pub struct TwoScaleTransform {
    levels: usize,
    slow_spacing: usize,
    full: WaveletDecomposition,
    sparse: Vec<WaveletDecomposition>,
}

impl TwoScaleTransform {
    pub fn new(
        returns: &[f64],
        levels: usize,
        slow_spacing: usize,
        filters: &FilterPair,
        boundary: Boundary,
    ) -> Result<Self> {
        if slow_spacing == 0 || slow_spacing > returns.len() {
            return Err(Error::InvalidConfig(format!(
                "slow spacing {slow_spacing} outside 1..={}",
                returns.len()
            )));
        }
        let full = modwt_forward(returns, filters, levels, boundary)?;
        let sparse = (0..slow_spacing)
            .map(|offset| {
                let series = sparse_returns(returns, slow_spacing, offset);
                if series.len() < 2 {
                    return Err(Error::SeriesTooShort {
                        len: series.len(),
                        required: 2,
                    });
                }
                let depth = levels.min(max_levels(series.len(), filters, boundary)).max(1);
                modwt_forward(&series, filters, depth, boundary)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TwoScaleTransform {
            levels,
            slow_spacing,
            full,
            sparse,
        })
    }

    pub fn from_config(returns: &[f64], config: &JwcConfig) -> Result<Self> {
        let n = returns.len();
        config.validate(n)?;
        Self::new(
            returns,
            config.levels_for(n),
            config.slow_spacing_for(n),
            config.filters,
            config.boundary,
        )
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn slow_spacing(&self) -> usize {
        self.slow_spacing
    }

    pub fn full(&self) -> &WaveletDecomposition {
        &self.full
    }
}

/// `sum_k W_k^1 W_k^2` for two coefficient vectors of one scale.
pub fn wavelet_rc_scale(first: &[f64], second: &[f64]) -> Result<f64> {
    ensure_same_len(first.len(), second.len())?;
    Ok(first.iter().zip(second).map(|(a, b)| a * b).sum())
}

/// Per-scale covariances of two decompositions over the full (extended)
/// coefficient vectors, normalized by the boundary extension factor.
///
/// The result has `slots + 1` entries: wavelet scales `1..=slots` followed by
/// the scaling term. Scales deeper than the decompositions' own depth are
/// zero; their variation is carried by the scaling term.
pub fn scale_covariances(
    first: &WaveletDecomposition,
    second: &WaveletDecomposition,
    slots: usize,
) -> Result<Vec<f64>> {
    ensure_same_len(first.len(), second.len())?;
    if first.levels() != second.levels() || first.boundary() != second.boundary() {
        return Err(Error::InvalidInput("decompositions differ in depth or boundary".into()));
    }
    if first.levels() > slots {
        return Err(Error::InvalidLevel {
            levels: first.levels(),
            max: slots,
        });
    }
    let factor = first.boundary().extension_factor() as f64;
    let mut out = vec![0.0; slots + 1];
    for (j, slot) in out.iter_mut().enumerate().take(first.levels()) {
        *slot = wavelet_rc_scale(first.wavelet_extended(j + 1), second.wavelet_extended(j + 1))? / factor;
    }
    out[slots] = wavelet_rc_scale(first.scaling_extended(), second.scaling_extended())? / factor;
    Ok(out)
}

/// Per-scale ingredients of the estimator for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTerms {
    /// Full-grid wavelet realized covariance, `J + 1` entries.
    pub full: Vec<f64>,
    /// Average over offsets of the sparse-grid covariance, `J + 1` entries.
    pub subsampled: Vec<f64>,
    pub len: usize,
    pub slow_spacing: usize,
}

impl ScaleTerms {
    pub fn new(first: &TwoScaleTransform, second: &TwoScaleTransform) -> Result<Self> {
        ensure_same_len(first.len(), second.len())?;
        if first.slow_spacing != second.slow_spacing || first.levels != second.levels {
            return Err(Error::InvalidInput("transforms built with different settings".into()));
        }
        let slots = first.levels;
        let full = scale_covariances(&first.full, &second.full, slots)?;
        let mut subsampled = vec![0.0; slots + 1];
        for (a, b) in first.sparse.iter().zip(&second.sparse) {
            for (acc, v) in subsampled.iter_mut().zip(scale_covariances(a, b, slots)?) {
                *acc += v;
            }
        }
        let g = first.slow_spacing as f64;
        subsampled.iter_mut().for_each(|v| *v /= g);
        Ok(ScaleTerms {
            full,
            subsampled,
            len: first.len(),
            slow_spacing: first.slow_spacing,
        })
    }

    /// `c_N * (IC_G(j) - nbar_G / n_S * IC_WRC(j))` for every scale.
    pub fn bracket(&self, c_n: f64, fast_spacing: usize) -> Vec<f64> {
        let n = self.len as f64;
        let g = self.slow_spacing as f64;
        let s = fast_spacing as f64;
        let nbar_g = (n - g + 1.0) / g;
        let n_s = (n - s + 1.0) / s;
        let ratio = nbar_g / n_s;
        self.subsampled
            .iter()
            .zip(&self.full)
            .map(|(slow, fast)| c_n * (slow - ratio * fast))
            .collect()
    }

    pub fn estimate(&self, c_n: f64, fast_spacing: usize) -> f64 {
        self.bracket(c_n, fast_spacing).iter().sum()
    }
}

/// Subsampled wavelet realized covariance `IC_G(j)` for every scale.
pub fn wavelet_rc_subsampled(
    first: &[f64],
    second: &[f64],
    levels: usize,
    slow_spacing: usize,
    filters: &FilterPair,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    ensure_same_len(first.len(), second.len())?;
    let a = TwoScaleTransform::new(first, levels, slow_spacing, filters, boundary)?;
    let b = TwoScaleTransform::new(second, levels, slow_spacing, filters, boundary)?;
    Ok(ScaleTerms::new(&a, &b)?.subsampled)
}

/// JWC estimate for one pair of jump-adjusted return series.
pub fn jwc_pair(first: &TwoScaleTransform, second: &TwoScaleTransform, config: &JwcConfig) -> Result<f64> {
    Ok(ScaleTerms::new(first, second)?.estimate(config.c_n, config.fast_spacing))
}

/// Symmetric integrated covariance matrix with non-negative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct IcMatrix {
    values: Vec<Vec<f64>>,
    floored: Vec<bool>,
}

impl IcMatrix {
    pub fn from_values(mut values: Vec<Vec<f64>>) -> Result<Self> {
        let d = values.len();
        if values.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidInput("IC matrix must be square".into()));
        }
        let mut floored = vec![false; d];
        for a in 0..d {
            if values[a][a] < 0.0 {
                values[a][a] = 0.0;
                floored[a] = true;
            }
            for b in a + 1..d {
                let v = values[a][b];
                values[b][a] = v;
            }
        }
        Ok(IcMatrix { values, floored })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    /// Whether diagonal entry `a` was negative and floored at zero.
    pub fn was_floored(&self, a: usize) -> bool {
        self.floored[a]
    }

    pub fn correlation(&self, a: usize, b: usize) -> Option<Correlation> {
        correlation(self.get(a, b), self.get(a, a), self.get(b, b))
    }
}

/// JWC integrated covariance matrix of `d` jump-adjusted return series.
pub fn jwc_integrated_covariance(adjusted: &[Vec<f64>], config: &JwcConfig) -> Result<IcMatrix> {
    let Some(first) = adjusted.first() else {
        return IcMatrix::from_values(Vec::new());
    };
    for series in adjusted {
        ensure_same_len(first.len(), series.len())?;
    }
    let transforms = adjusted
        .iter()
        .map(|r| TwoScaleTransform::from_config(r, config))
        .collect::<Result<Vec<_>>>()?;
    ic_from_transforms(&transforms, config)
}

pub fn ic_from_transforms(transforms: &[TwoScaleTransform], config: &JwcConfig) -> Result<IcMatrix> {
    let d = transforms.len();
    let mut values = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            values[a][b] = jwc_pair(&transforms[a], &transforms[b], config)?;
        }
    }
    IcMatrix::from_values(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    /// Set when the raw ratio fell outside `[-1, 1]`.
    pub clamped: bool,
}

/// `cov / sqrt(var_a var_b)` clamped to `[-1, 1]`; `None` when either
/// variance is not positive.
pub fn correlation(cov: f64, var_a: f64, var_b: f64) -> Option<Correlation> {
    if !(var_a > 0.0 && var_b > 0.0) || !cov.is_finite() {
        return None;
    }
    let raw = cov / (var_a * var_b).sqrt();
    let value = raw.clamp(-1.0, 1.0);
    Some(Correlation {
        value,
        clamped: value != raw,
    })
}

/// Correlation from an IC matrix entry.
pub fn continuous_correlation(ic: &IcMatrix, a: usize, b: usize) -> Option<Correlation> {
    ic.correlation(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_returns(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-0.001..0.001)).collect()
    }

    #[test]
    fn defaults() {
        assert_eq!(default_levels(540), 4);
        assert_eq!(default_levels(256), 4);
        assert_eq!(default_levels(108), 4);
        assert_eq!(default_levels(64), 4);
        assert_eq!(default_levels(32), 3);
        assert_eq!(default_levels(4), 1);
        assert_eq!(default_slow_spacing(540), 66);
        assert_eq!(default_slow_spacing(108), 23);
        assert_eq!(default_slow_spacing(2), 2);
    }

    #[test]
    fn sparse_grid_keeps_every_return() {
        let r: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(sparse_returns(&r, 3, 0), vec![6.0, 15.0, 24.0, 10.0]);
        assert_eq!(sparse_returns(&r, 3, 2), vec![3.0, 12.0, 21.0, 19.0]);
        assert_eq!(sparse_returns(&r, 1, 0), r);
    }

    #[test]
    fn scale_rc_examples() {
        let w = [0.5, -1.0, 2.0];
        assert_eq!(wavelet_rc_scale(&w, &w).unwrap(), 5.25);
        assert_eq!(wavelet_rc_scale(&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0]).unwrap(), 0.0);
        assert!(wavelet_rc_scale(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn haar_level_one_by_hand() {
        // Circular Haar level 1: W_t = (x_t - x_{t-1}) / 2.
        let x = [1.0, 3.0, -2.0, 4.0];
        let y = [2.0, -1.0, 1.0, 0.0];
        let wx = [(1.0 - 4.0) / 2.0, 1.0, -2.5, 3.0];
        let wy = [1.0, -1.5, 1.0, -0.5];
        let by_hand: f64 = wx.iter().zip(&wy).map(|(a, b)| a * b).sum();
        let dx = modwt_forward(&x, FilterPair::haar(), 1, Boundary::Circular).unwrap();
        let dy = modwt_forward(&y, FilterPair::haar(), 1, Boundary::Circular).unwrap();
        assert_eq!(dx.wavelet(1), &wx);
        let covs = scale_covariances(&dx, &dy, 1).unwrap();
        assert_relative_eq!(covs[0], by_hand, max_relative = 1e-15);
    }

    #[test]
    fn unit_spacing_subsample_equals_full_grid() {
        let x = random_returns(128, 1);
        let y = random_returns(128, 2);
        let tx = TwoScaleTransform::new(&x, 4, 1, FilterPair::d4(), Boundary::Reflecting).unwrap();
        let ty = TwoScaleTransform::new(&y, 4, 1, FilterPair::d4(), Boundary::Reflecting).unwrap();
        let terms = ScaleTerms::new(&tx, &ty).unwrap();
        assert_eq!(terms.subsampled, terms.full);
        // G = S = 1: nbar_G = n_S = N, every bracket is exactly zero.
        assert!(terms.bracket(1.0, 1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_returns_give_zero_matrix() {
        let zeros = vec![vec![0.0; 540]; 3];
        let ic = jwc_integrated_covariance(&zeros, &JwcConfig::default()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(ic.get(a, b), 0.0);
            }
        }
        let sub = wavelet_rc_subsampled(&zeros[0], &zeros[1], 4, 10, FilterPair::d4(), Boundary::Reflecting).unwrap();
        assert!(sub.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scale_additivity_on_full_and_sparse_grids() {
        let x = random_returns(540, 3);
        let y = random_returns(540, 4);
        for boundary in [Boundary::Circular, Boundary::Reflecting] {
            let tx = TwoScaleTransform::new(&x, 4, 66, FilterPair::d4(), boundary).unwrap();
            let ty = TwoScaleTransform::new(&y, 4, 66, FilterPair::d4(), boundary).unwrap();
            let terms = ScaleTerms::new(&tx, &ty).unwrap();
            let rc: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert_relative_eq!(terms.full.iter().sum::<f64>(), rc, max_relative = 1e-10);
            let sparse_rc: f64 = (0..66)
                .map(|g| {
                    let a = sparse_returns(&x, 66, g);
                    let b = sparse_returns(&y, 66, g);
                    a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>()
                })
                .sum::<f64>()
                / 66.0;
            assert_relative_eq!(terms.subsampled.iter().sum::<f64>(), sparse_rc, max_relative = 1e-10);
        }
    }

    #[test]
    fn config_validation() {
        assert!(JwcConfig::default().validate(540).is_ok());
        let bad = JwcConfig::default().with_slow_spacing(1);
        assert!(matches!(bad.validate(540), Err(Error::InvalidConfig(_))));
        let too_big = JwcConfig::default().with_slow_spacing(600);
        assert!(too_big.validate(540).is_err());
        let deep = JwcConfig {
            levels: Some(12),
            ..JwcConfig::default()
        };
        assert!(matches!(deep.validate(540), Err(Error::InvalidLevel { .. })));
        let neg = JwcConfig {
            c_n: -1.0,
            ..JwcConfig::default()
        };
        assert!(neg.validate(540).is_err());
    }

    #[test]
    fn correlation_rules() {
        let ic = IcMatrix::from_values(vec![vec![4.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(continuous_correlation(&ic, 0, 1).unwrap().value, 0.5);
        assert_eq!(continuous_correlation(&ic, 0, 0).unwrap().value, 1.0);
        let noisy = correlation(1.03, 1.0, 1.0).unwrap();
        assert_eq!(noisy.value, 1.0);
        assert!(noisy.clamped);
        assert!(correlation(0.1, 0.0, 1.0).is_none());
    }

    #[test]
    fn negative_diagonal_is_floored() {
        let ic = IcMatrix::from_values(vec![vec![-1.0, 0.5], vec![0.0, 2.0]]).unwrap();
        assert_eq!(ic.get(0, 0), 0.0);
        assert!(ic.was_floored(0));
        assert!(!ic.was_floored(1));
        assert_eq!(ic.get(1, 0), 0.5);
        assert!(ic.correlation(0, 1).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bilinear_in_each_instrument(seed in 0u64..1000, scale in 0.1f64..10.0) {
            let x = random_returns(200, seed);
            let y = random_returns(200, seed + 1);
            let config = JwcConfig::default();
            let base = jwc_integrated_covariance(&[x.clone(), y.clone()], &config).unwrap();
            let scaled_x: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let scaled = jwc_integrated_covariance(&[scaled_x, y], &config).unwrap();
            prop_assert!((scaled.get(0, 1) - scale * base.get(0, 1)).abs() <= 1e-10 * base.get(0, 1).abs().max(1e-12));
            prop_assert!((scaled.get(1, 1) - base.get(1, 1)).abs() <= 1e-18);
            if !base.was_floored(0) {
                prop_assert!((scaled.get(0, 0) - scale * scale * base.get(0, 0)).abs() <= 1e-9 * base.get(0, 0).abs().max(1e-12));
            }
        }

        #[test]
        fn diagonal_is_non_negative(seed in 0u64..1000) {
            let data: Vec<Vec<f64>> = (0..3).map(|k| random_returns(64, seed * 3 + k)).collect();
            let ic = jwc_integrated_covariance(&data, &JwcConfig::default().with_slow_spacing(4)).unwrap();
            for a in 0..3 {
                prop_assert!(ic.get(a, a) >= 0.0);
                for b in 0..3 {
                    prop_assert_eq!(ic.get(a, b), ic.get(b, a));
                }
            }
        }
    }
}
