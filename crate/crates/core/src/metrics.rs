//! Reconstruction quality metrics on `n x n` rasters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dynamic range used by [`ssim`] unless told otherwise.
pub const DEFAULT_SSIM_RANGE: f64 = 1.5;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn side_of(len: usize) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || n == 0 {
        return Err(Error::Shape(format!(
            "{len} values do not form a square raster"
        )));
    }
    Ok(n)
}

fn same_shape(a: &[f64], b: &[f64]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "rasters of {} and {} values",
            a.len(),
            b.len()
        )));
    }
    side_of(a.len())
}

/// `||recon - truth||_2 / ||truth||_2`.
pub fn relative_l2(recon: &[f64], truth: &[f64]) -> Result<f64> {
    same_shape(recon, truth)?;
    let den = truth.iter().map(|t| t * t).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "relative error against a zero image".into(),
        ));
    }
    let num = recon
        .iter()
        .zip(truth)
        .map(|(r, t)| (r - t) * (r - t))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (t, w) in taps.iter_mut().enumerate() {
        let x = t as f64 - half;
        *w = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = taps.iter().sum();
    taps.map(|w| w / total)
}

/// Half-sample symmetric reflection of an out-of-range index
/// (`d c b a | a b c d | d c b a`).
fn reflect(mut i: isize, n: isize) -> usize {
    let period = 2 * n;
    i = i.rem_euclid(period);
    if i >= n {
        i = period - 1 - i;
    }
    i as usize
}

/// Separable Gaussian filter with reflected borders.
fn blur(img: &[f64], n: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let ni = n as isize;
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            tmp[i * n + j] = taps
                .iter()
                .enumerate()
                .map(|(t, w)| w * img[reflect(i as isize + t as isize - half, ni) * n + j])
                .sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = taps
                .iter()
                .enumerate()
                .map(|(t, w)| w * tmp[i * n + reflect(j as isize + t as isize - half, ni)])
                .sum();
        }
    }
    out
}

/// Mean structural similarity with an 11 x 11 Gaussian window (sigma 1.5),
/// `C1 = (0.01 L)^2`, `C2 = (0.03 L)^2` and reflected borders.
pub fn ssim(a: &[f64], b: &[f64], range: f64) -> Result<f64> {
    let n = same_shape(a, b)?;
    if !(range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dynamic range must be positive, got {range}"
        )));
    }
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let taps = gaussian_taps();
    let sq = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p * q).collect() };
    let mu_a = blur(a, n, &taps);
    let mu_b = blur(b, n, &taps);
    let aa = blur(&sq(a, a), n, &taps);
    let bb = blur(&sq(b, b), n, &taps);
    let ab = blur(&sq(a, b), n, &taps);
    let total: f64 = (0..n * n)
        .map(|m| {
            let (ma, mb) = (mu_a[m], mu_b[m]);
            let va = aa[m] - ma * ma;
            let vb = bb[m] - mb * mb;
            let cov = ab[m] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / (n * n) as f64)
}

/// Anisotropic total variation with forward differences, divided by `n^2`.
pub fn total_variation(a: &[f64]) -> Result<f64> {
    let n = side_of(a.len())?;
    let mut tv = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a[i * n + j];
            if i + 1 < n {
                tv += (a[(i + 1) * n + j] - v).abs();
            }
            if j + 1 < n {
                tv += (a[i * n + j + 1] - v).abs();
            }
        }
    }
    Ok(tv / (n * n) as f64)
}

/// One line of an evaluation report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: u64,
    pub delta: f64,
    pub n_inc: usize,
    pub rel_l2: f64,
    pub ssim: f64,
    #[serde(rename = "L")]
    pub range: f64,
}

impl EvalRecord {
    pub fn score(
        sample_id: u64,
        delta: f64,
        n_inc: usize,
        recon: &[f64],
        truth: &[f64],
        range: f64,
    ) -> Result<Self> {
        Ok(Self {
            sample_id,
            delta,
            n_inc,
            rel_l2: relative_l2(recon, truth)?,
            ssim: ssim(recon, truth, range)?,
            range,
        })
    }
}
