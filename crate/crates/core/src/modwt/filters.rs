use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Tolerance for the filter-bank identities checked at construction.
pub const FILTER_TOLERANCE: f64 = 1e-12;

/// A MODWT-scaled wavelet/scaling filter pair.
///
/// Both filters are normalized so that the wavelet filter sums to zero, the
/// scaling filter sums to one and each has squared norm one half. The wavelet
/// filter is the quadrature mirror of the scaling filter,
/// `h[l] = (-1)^l g[L-1-l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    name: String,
    wavelet: Vec<f64>,
    scaling: Vec<f64>,
    alignment_shift: isize,
}

static HAAR: LazyLock<FilterPair> = LazyLock::new(|| {
    FilterPair::from_scaling("haar", vec![0.5, 0.5]).expect("haar filter identities")
});

static D4: LazyLock<FilterPair> = LazyLock::new(|| {
    let s3 = 3.0_f64.sqrt();
    // Extremal-phase Daubechies D(4), DWT coefficients divided by sqrt(2).
    let scaling = vec![1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3]
        .into_iter()
        .map(|c| c / 8.0)
        .collect();
    FilterPair::from_scaling("d4", scaling).expect("d4 filter identities")
});

impl FilterPair {
    /// Builds a pair from MODWT scaling coefficients, deriving the wavelet
    /// filter and validating every identity of the filter bank.
    pub fn from_scaling(name: impl Into<String>, scaling: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if scaling.len() < 2 || scaling.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "filter {name} must have even width >= 2, got {}",
                scaling.len()
            )));
        }
        let width = scaling.len();
        let wavelet = (0..width)
            .map(|l| {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                sign * scaling[width - 1 - l]
            })
            .collect();
        let mut pair = FilterPair {
            name,
            wavelet,
            scaling,
            alignment_shift: 0,
        };
        pair.check_identities()?;
        pair.alignment_shift = pair.calibrate_shift(1);
        Ok(pair)
    }

    pub fn haar() -> &'static FilterPair {
        &HAAR
    }

    pub fn d4() -> &'static FilterPair {
        &D4
    }

    pub fn by_name(name: &str) -> Result<&'static FilterPair> {
        match name.to_ascii_lowercase().as_str() {
            "haar" | "d2" => Ok(Self::haar()),
            "d4" | "db2" => Ok(Self::d4()),
            other => Err(Error::InvalidConfig(format!("unknown wavelet filter '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wavelet(&self) -> &[f64] {
        &self.wavelet
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    /// Filter width `L`.
    pub fn width(&self) -> usize {
        self.scaling.len()
    }

    /// Width of the dilated level-`level` filter, `2^(j-1) (L - 1) + 1`.
    pub fn level_width(&self, level: usize) -> usize {
        (1usize << (level - 1)) * (self.width() - 1) + 1
    }

    /// Circular advance that moves the level-1 response to a single return
    /// onto the index of that return. See [`FilterPair::calibrate_shift`].
    pub fn alignment_shift(&self) -> isize {
        self.alignment_shift
    }

    /// Verifies the MODWT filter-bank identities to [`FILTER_TOLERANCE`].
    pub fn check_identities(&self) -> Result<()> {
        let h = &self.wavelet;
        let g = &self.scaling;
        let fail = |identity: &'static str, deviation: f64| Error::FilterIdentity {
            name: self.name.clone(),
            identity,
            deviation,
        };

        let sum_h: f64 = h.iter().sum();
        if sum_h.abs() > FILTER_TOLERANCE {
            return Err(fail("sum(h) = 0", sum_h));
        }
        let sum_g: f64 = g.iter().sum();
        if (sum_g - 1.0).abs() > FILTER_TOLERANCE {
            return Err(fail("sum(g) = 1", sum_g - 1.0));
        }
        let norm_h: f64 = h.iter().map(|v| v * v).sum();
        if (norm_h - 0.5).abs() > FILTER_TOLERANCE {
            return Err(fail("sum(h^2) = 1/2", norm_h - 0.5));
        }
        let norm_g: f64 = g.iter().map(|v| v * v).sum();
        if (norm_g - 0.5).abs() > FILTER_TOLERANCE {
            return Err(fail("sum(g^2) = 1/2", norm_g - 0.5));
        }
        for shift in (2..h.len()).step_by(2) {
            let dot_h: f64 = (0..h.len() - shift).map(|l| h[l] * h[l + shift]).sum();
            if dot_h.abs() > FILTER_TOLERANCE {
                return Err(fail("even-shift orthogonality of h", dot_h));
            }
            let dot_g: f64 = (0..g.len() - shift).map(|l| g[l] * g[l + shift]).sum();
            if dot_g.abs() > FILTER_TOLERANCE {
                return Err(fail("even-shift orthogonality of g", dot_g));
            }
        }
        let cross: f64 = (0..h.len()).map(|l| h[l] * g[l]).sum();
        if cross.abs() > FILTER_TOLERANCE {
            return Err(fail("h orthogonal to g", cross));
        }
        Ok(())
    }

    /// Impulse-response calibration of the phase offset at `level`.
    ///
    /// A unit return at index `k` is a unit step in the log-price path at
    /// path index `k + 1`. The returned shift is the offset between that
    /// path index and the argmax of `|W_j|` (first maximum on ties).
    pub fn calibrate_shift(&self, level: usize) -> isize {
        let width = self.level_width(level);
        let n = 4 * width + 8;
        let step_at = 2 * width;
        let mut path = vec![0.0; n];
        for p in path.iter_mut().skip(step_at) {
            *p = 1.0;
        }
        let mut scaling = path.clone();
        let mut coeffs = vec![0.0; n];
        for j in 1..=level {
            let stride = 1usize << (j - 1);
            circular_filter(&scaling, &self.wavelet, stride, &mut coeffs);
            if j < level {
                let mut next = vec![0.0; n];
                circular_filter(&scaling, &self.scaling, stride, &mut next);
                scaling = next;
            }
        }
        // Only look right of the step; the circular wrap creates a second
        // (downward) step at index 0.
        let window = step_at - width..step_at + width;
        let mut best = window.start;
        for t in window {
            if coeffs[t].abs() > coeffs[best].abs() + 1e-15 {
                best = t;
            }
        }
        best as isize - step_at as isize
    }
}

/// `out[t] = sum_l filter[l] * input[(t - stride*l) mod n]`.
pub(crate) fn circular_filter(input: &[f64], filter: &[f64], stride: usize, out: &mut [f64]) {
    let n = input.len();
    debug_assert_eq!(out.len(), n);
    out.iter_mut().for_each(|v| *v = 0.0);
    for (l, &c) in filter.iter().enumerate() {
        let offset = (stride * l) % n;
        // t >= offset reads input[t - offset]; t < offset wraps around.
        let (head, tail) = out.split_at_mut(offset);
        for (o, x) in tail.iter_mut().zip(&input[..n - offset]) {
            *o += c * x;
        }
        for (o, x) in head.iter_mut().zip(&input[n - offset..]) {
            *o += c * x;
        }
    }
}

/// Boundary treatment applied before circular filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Treat the series as periodic.
    Circular,
    /// Filter the even reflection `x_0..x_{N-1}, x_{N-1}..x_0` of length 2N.
    #[default]
    Reflecting,
}

impl Boundary {
    /// Ratio of filtered length to series length.
    pub fn extension_factor(self) -> usize {
        match self {
            Boundary::Circular => 1,
            Boundary::Reflecting => 2,
        }
    }

    pub(crate) fn extend(self, x: &[f64]) -> Vec<f64> {
        match self {
            Boundary::Circular => x.to_vec(),
            Boundary::Reflecting => x.iter().chain(x.iter().rev()).copied().collect(),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Circular => "circular",
            Boundary::Reflecting => "reflecting",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circular" | "periodic" => Ok(Boundary::Circular),
            "reflecting" | "reflection" => Ok(Boundary::Reflecting),
            other => Err(Error::InvalidConfig(format!("unknown boundary '{other}'"))),
        }
    }
}
