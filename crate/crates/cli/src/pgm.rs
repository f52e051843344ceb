//! Binary greyscale (P5) export of `n x n` rasters.
//!
//! A value `v` becomes `round(255 (v - lo) / (hi - lo))` clamped to
//! `0..=255`; when `hi == lo` every pixel is 0. Image rows run from the
//! largest `y` at the top to the smallest at the bottom and columns from the
//! smallest `x` on the left, so the picture shows the domain as drawn in the
//! plane: pixel `(row, col)` holds raster entry `[col * n + (n - 1 - row)]`.

use anyhow::{bail, Result};

/// Smallest and largest finite value.
pub fn value_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

pub fn encode(values: &[f64], n: usize, lo: f64, hi: f64) -> Result<Vec<u8>> {
    if values.len() != n * n {
        bail!("{} values do not form a {n} x {n} raster", values.len());
    }
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        bail!("invalid grey range [{lo}, {hi}]");
    }
    let header = format!("P5\n{n} {n}\n255\n");
    let mut out = Vec::with_capacity(header.len() + n * n);
    out.extend_from_slice(header.as_bytes());
    let span = hi - lo;
    for row in 0..n {
        let j = n - 1 - row;
        for i in 0..n {
            let v = values[i * n + j];
            let grey = if span > 0.0 {
                (255.0 * (v - lo) / span).round().clamp(0.0, 255.0)
            } else {
                0.0
            };
            out.push(grey as u8);
        }
    }
    Ok(out)
}
