//! Maximal overlap discrete wavelet transform (pyramid algorithm).
//!
//! Coefficients are never decimated: every level keeps one coefficient per
//! (possibly boundary-extended) observation. With [`Boundary::Reflecting`] the
//! transform runs on the length-2N even reflection of the input. Accessors
//! expose the first N coefficients; the full extended vectors remain available
//! because the energy and covariance decompositions are exact only over them.

mod filters;

use std::io::Write;

pub use filters::{Boundary, FilterPair, FILTER_TOLERANCE};

use crate::error::{Error, Result};
use filters::circular_filter;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    len: usize,
    boundary: Boundary,
    /// Level j is stored at index j - 1, each vector of the filtered length.
    wavelet: Vec<Vec<f64>>,
    scaling: Vec<f64>,
    alignment_shift: Vec<isize>,
}

impl WaveletDecomposition {
    /// Number of observations in the untransformed series.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Decomposition depth `J`.
    pub fn levels(&self) -> usize {
        self.wavelet.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// First N wavelet coefficients at level `level` (1-based).
    pub fn wavelet(&self, level: usize) -> &[f64] {
        &self.wavelet[level - 1][..self.len]
    }

    /// First N scaling coefficients at the deepest level.
    pub fn scaling(&self) -> &[f64] {
        &self.scaling[..self.len]
    }

    /// All wavelet coefficients at `level`, including the reflected half.
    pub fn wavelet_extended(&self, level: usize) -> &[f64] {
        &self.wavelet[level - 1]
    }

    pub fn scaling_extended(&self) -> &[f64] {
        &self.scaling
    }

    /// Phase offset of each level, index j - 1 for level j.
    pub fn alignment_shift(&self) -> &[isize] {
        &self.alignment_shift
    }

    /// `sum_t W_{j,t}^2` for each level followed by `sum_t V_{J,t}^2`,
    /// normalized by the boundary extension factor.
    pub fn scale_energies(&self) -> Vec<f64> {
        let factor = self.boundary.extension_factor() as f64;
        self.wavelet
            .iter()
            .chain(std::iter::once(&self.scaling))
            .map(|v| v.iter().map(|c| c * c).sum::<f64>() / factor)
            .collect()
    }

    /// Total energy of the decomposition; equals `sum_t x_t^2`.
    pub fn energy(&self) -> f64 {
        self.scale_energies().iter().sum()
    }

    /// Writes `level,index,value` rows; the scaling vector is level `J + 1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::csv("<coefficient dump>", e);
        writer.write_record(["level", "index", "value"]).map_err(to_err)?;
        let rows = (1..=self.levels())
            .map(|j| (j, self.wavelet(j)))
            .chain(std::iter::once((self.levels() + 1, self.scaling())));
        for (level, values) in rows {
            for (index, value) in values.iter().enumerate() {
                writer
                    .write_record([level.to_string(), index.to_string(), value.to_string()])
                    .map_err(to_err)?;
            }
        }
        writer.flush().map_err(|e| Error::io("<coefficient dump>", e))?;
        Ok(())
    }
}

/// Largest admissible depth for a series of length `len`.
pub fn max_levels(len: usize, filters: &FilterPair, boundary: Boundary) -> usize {
    if len < 2 {
        return 0;
    }
    let filtered = len * boundary.extension_factor();
    let by_length = usize::BITS as usize - 1 - len.leading_zeros() as usize;
    (1..=by_length)
        .take_while(|&j| filters.level_width(j) <= filtered)
        .last()
        .unwrap_or(0)
}

/// Forward MODWT to depth `levels` via the pyramid algorithm.
pub fn modwt_forward(
    x: &[f64],
    filters: &FilterPair,
    levels: usize,
    boundary: Boundary,
) -> Result<WaveletDecomposition> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, required: 2 });
    }
    let by_length = usize::BITS as usize - 1 - n.leading_zeros() as usize;
    if levels == 0 || levels > by_length {
        return Err(Error::InvalidLevel {
            levels,
            max: by_length,
        });
    }
    let factor = boundary.extension_factor();
    let needed = filters.level_width(levels);
    if needed > n * factor {
        return Err(Error::SeriesTooShort {
            len: n,
            required: needed.div_ceil(factor),
        });
    }

    let mut scaling = boundary.extend(x);
    let filtered = scaling.len();
    let mut wavelet = Vec::with_capacity(levels);
    let mut next = vec![0.0; filtered];
    for j in 1..=levels {
        let stride = 1usize << (j - 1);
        let mut w = vec![0.0; filtered];
        circular_filter(&scaling, filters.wavelet(), stride, &mut w);
        circular_filter(&scaling, filters.scaling(), stride, &mut next);
        std::mem::swap(&mut scaling, &mut next);
        wavelet.push(w);
    }

    let alignment_shift = (1..=levels)
        .map(|j| {
            if j == 1 {
                filters.alignment_shift()
            } else {
                filters.calibrate_shift(j)
            }
        })
        .collect();

    Ok(WaveletDecomposition {
        len: n,
        boundary,
        wavelet,
        scaling,
        alignment_shift,
    })
}

/// Level-1 wavelet coefficients of the log-price path implied by `returns`,
/// aligned so that index `i` corresponds to return `i`.
///
/// The path is `p_0 = 0, p_{i+1} = p_i + r_i` (length N + 1). A jump in return
/// `i` is a level shift of the path at `i + 1`; after the filter's alignment
/// shift the largest coefficient magnitude sits at index `i`.
pub fn level1_coefficients(
    returns: &[f64],
    filters: &FilterPair,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    let n = returns.len();
    if n < filters.width() {
        return Err(Error::SeriesTooShort {
            len: n,
            required: filters.width(),
        });
    }
    let mut path = Vec::with_capacity(n + 1);
    let mut level = 0.0;
    path.push(level);
    for r in returns {
        level += r;
        path.push(level);
    }
    let extended = boundary.extend(&path);
    let filtered = extended.len();
    let mut coeffs = vec![0.0; filtered];
    circular_filter(&extended, filters.wavelet(), 1, &mut coeffs);

    let shift = filters.alignment_shift();
    let aligned = (0..n)
        .map(|i| {
            let idx = (i as isize + 1 + shift).rem_euclid(filtered as isize) as usize;
            coeffs[idx]
        })
        .collect();
    Ok(aligned)
}
