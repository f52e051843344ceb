//! Direct sampling index functions.
//!
//! `Phi(x) = |<u^s, G(x, .)>_{L^2(S)}|` with `<f, g> = \int f conj(g)`,
//! discretized by the trapezoid rule on the equally spaced receivers.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{
    far_directions, far_field, scattered_at_points, solve_forward, ExperimentConfig, FieldRecord,
};
use crate::geometry::Point;
use crate::linalg::{singular_values, ComplexMatrix};
use crate::scene::{ContrastGrid, DOMAIN_HALF_WIDTH};
use crate::special::{green_far_unchecked, green_of_kr};

/// Stacked index maps, one `n x n` channel per incidence.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexTensor {
    pub n_inc: usize,
    pub n: usize,
    /// Channel-major: `data[p * n * n + i * n + j]`.
    pub data: Vec<f64>,
    /// Constant `C` the values were scaled by (`2 / C`), 0 when unscaled.
    pub scale_c: f64,
}

impl IndexTensor {
    pub fn new(n_inc: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_inc * n * n {
            return Err(Error::Shape(format!(
                "tensor of {n_inc} x {n} x {n} needs {} values, got {}",
                n_inc * n * n,
                data.len()
            )));
        }
        Ok(Self {
            n_inc,
            n,
            data,
            scale_c: 0.0,
        })
    }

    pub fn from_channels(n: usize, channels: Vec<Vec<f64>>) -> Result<Self> {
        let n_inc = channels.len();
        let data: Vec<f64> = channels.into_iter().flatten().collect();
        Self::new(n_inc, n, data)
    }

    pub fn channel(&self, p: usize) -> &[f64] {
        let len = self.n * self.n;
        &self.data[p * len..(p + 1) * len]
    }

    pub fn channels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n * self.n)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Pixel centers of an `n x n` raster over the default domain.
pub fn grid_points(n: usize) -> Vec<Point> {
    let h = 2.0 * DOMAIN_HALF_WIDTH / n as f64;
    let coord = |i: usize| -DOMAIN_HALF_WIDTH + (i as f64 + 0.5) * h;
    (0..n * n)
        .map(|c| Point::new(coord(c / n), coord(c % n)))
        .collect()
}

/// `conj(kernel(x_m, y_r)) * w` for every probe point `x_m` (rows) and
/// measurement node `y_r` (columns).
#[derive(Clone, Debug)]
pub struct SamplingKernel {
    n_points: usize,
    n_nodes: usize,
    weight: f64,
    values: Vec<Complex64>,
}

impl SamplingKernel {
    /// Near-field kernel: the Green's function towards receivers at `nodes`.
    pub fn near(points: &[Point], nodes: &[Point], k: f64, weight: f64) -> Self {
        let values: Vec<Complex64> = points
            .par_iter()
            .flat_map_iter(|&x| {
                nodes
                    .iter()
                    .map(move |&y| green_of_kr(k * x.dist(y)).conj() * weight)
            })
            .collect();
        Self {
            n_points: points.len(),
            n_nodes: nodes.len(),
            weight,
            values,
        }
    }

    /// Far-field kernel over unit directions `dirs`.
    pub fn far(points: &[Point], dirs: &[Point], k: f64) -> Self {
        let weight = TAU / dirs.len() as f64;
        let values: Vec<Complex64> = points
            .par_iter()
            .flat_map_iter(|&x| {
                dirs.iter()
                    .map(move |&d| green_far_unchecked(x, d, k).conj() * weight)
            })
            .collect();
        Self {
            n_points: points.len(),
            n_nodes: dirs.len(),
            weight,
            values,
        }
    }

    /// Kernel on the pixel grid for the receivers of `cfg`.
    pub fn for_config(cfg: &ExperimentConfig, n: usize) -> Self {
        Self::near(
            &grid_points(n),
            &cfg.receivers(),
            cfg.k,
            cfg.quadrature_weight(),
        )
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn row(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.n_nodes..(m + 1) * self.n_nodes]
    }

    fn check_len(&self, data: &[Complex64]) -> Result<()> {
        if data.len() != self.n_nodes {
            return Err(Error::Shape(format!(
                "field has {} samples but the kernel expects {}",
                data.len(),
                self.n_nodes
            )));
        }
        Ok(())
    }

    /// Discrete inner products `<data, kernel(x_m, .)>` (phased).
    pub fn inner_products(&self, data: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(data)?;
        Ok((0..self.n_points)
            .into_par_iter()
            .map(|m| self.row(m).iter().zip(data).map(|(g, u)| u * g).sum())
            .collect())
    }

    /// Index values `|<data, kernel(x_m, .)>|`.
    pub fn apply(&self, data: &[Complex64]) -> Result<Vec<f64>> {
        Ok(self
            .inner_products(data)?
            .into_iter()
            .map(|z| z.norm())
            .collect())
    }

    /// Index values divided by `||data|| ||kernel(x_m, .)||` (weighted L2).
    pub fn apply_normalized(&self, data: &[Complex64]) -> Result<Vec<f64>> {
        let data_norm = (self.weight * data.iter().map(|u| u.norm_sqr()).sum::<f64>()).sqrt();
        if !(data_norm > 0.0) {
            return Err(Error::InvalidArgument(
                "normalized index function undefined for a zero field".into(),
            ));
        }
        let raw = self.apply(data)?;
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(m, v)| {
                // stored entries carry the weight once: |conj(G) w|^2 / w = w |G|^2
                let g_norm =
                    (self.row(m).iter().map(|g| g.norm_sqr()).sum::<f64>() / self.weight).sqrt();
                v / (data_norm * g_norm)
            })
            .collect())
    }
}

fn check_record(rec: &FieldRecord, cfg: &ExperimentConfig) -> Result<()> {
    if rec.us.len() != cfg.n_rec {
        return Err(Error::Shape(format!(
            "record holds {} receivers, configuration has {}",
            rec.us.len(),
            cfg.n_rec
        )));
    }
    Ok(())
}

fn require_full(cfg: &ExperimentConfig) -> Result<()> {
    if !cfg.aperture.is_full() {
        return Err(Error::InvalidArgument(
            "full-aperture index function needs receivers on the whole circle".into(),
        ));
    }
    Ok(())
}

/// Near-field index function on the `n x n` pixel grid (full aperture).
pub fn index_near(rec: &FieldRecord, cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    require_full(cfg)?;
    check_record(rec, cfg)?;
    SamplingKernel::for_config(cfg, n).apply(&rec.us)
}

/// Normalized near-field index function, values in `[0, 1]`.
pub fn index_near_normalized(
    rec: &FieldRecord,
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<Vec<f64>> {
    require_full(cfg)?;
    check_record(rec, cfg)?;
    SamplingKernel::for_config(cfg, n).apply_normalized(&rec.us)
}

/// Index function from data on a partial arc of the measurement circle.
pub fn index_limited(rec: &FieldRecord, cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    if cfg.aperture.is_full() {
        return Err(Error::InvalidArgument(
            "limited-aperture index function needs a partial aperture".into(),
        ));
    }
    check_record(rec, cfg)?;
    SamplingKernel::for_config(cfg, n).apply(&rec.us)
}

fn check_dirs(uinf: &[Complex64], dirs: &[Point]) -> Result<()> {
    if dirs.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one far-field direction".into(),
        ));
    }
    if uinf.len() != dirs.len() {
        return Err(Error::Shape(format!(
            "{} far-field samples for {} directions",
            uinf.len(),
            dirs.len()
        )));
    }
    if let Some(d) = dirs.iter().find(|d| (d.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::Domain(format!(
            "direction ({}, {}) is not a unit vector",
            d.x, d.y
        )));
    }
    Ok(())
}

/// Far-field index function on the `n x n` pixel grid.
pub fn index_far(
    uinf: &[Complex64],
    dirs: &[Point],
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<Vec<f64>> {
    check_dirs(uinf, dirs)?;
    SamplingKernel::far(&grid_points(n), dirs, cfg.k).apply(uinf)
}

/// Normalized far-field index function, values in `[0, 1]`.
pub fn index_far_normalized(
    uinf: &[Complex64],
    dirs: &[Point],
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<Vec<f64>> {
    check_dirs(uinf, dirs)?;
    SamplingKernel::far(&grid_points(n), dirs, cfg.k).apply_normalized(uinf)
}

/// One index channel per record, using whatever aperture `cfg` describes.
pub fn compute_tensor(
    records: &[FieldRecord],
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<IndexTensor> {
    compute_tensor_with(&SamplingKernel::for_config(cfg, n), records, cfg, n)
}

/// As [`compute_tensor`], reusing a prebuilt kernel.
pub fn compute_tensor_with(
    kernel: &SamplingKernel,
    records: &[FieldRecord],
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<IndexTensor> {
    if records.len() != cfg.n_inc {
        return Err(Error::Shape(format!(
            "{} records for {} incidences",
            records.len(),
            cfg.n_inc
        )));
    }
    if kernel.n_points() != n * n {
        return Err(Error::Shape("kernel was built for a different grid".into()));
    }
    let mut channels = Vec::with_capacity(records.len());
    for (p, rec) in records.iter().enumerate() {
        if rec.incidence != p {
            return Err(Error::InvalidArgument(format!(
                "record {p} is tagged with incidence {}",
                rec.incidence
            )));
        }
        check_record(rec, cfg)?;
        channels.push(kernel.apply(&rec.us)?);
    }
    IndexTensor::from_channels(n, channels)
}

/// Multiplies every entry by `2 / c`.
///
/// Evaluated as `(v * 2) / c` so the entry equal to `c` maps to exactly 2.
/// Scaling an already scaled tensor composes: the recorded constant becomes
/// the one a single equivalent scaling would use.
pub fn scale_tensor(t: &IndexTensor, c: f64) -> Result<IndexTensor> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale constant must be positive, got {c}"
        )));
    }
    Ok(IndexTensor {
        n_inc: t.n_inc,
        n: t.n,
        data: t.data.iter().map(|v| (v * 2.0) / c).collect(),
        scale_c: if t.scale_c > 0.0 {
            t.scale_c * c / 2.0
        } else {
            c
        },
    })
}

/// Largest entry over a collection of tensors.
pub fn dataset_scale_constant<'a>(tensors: impl IntoIterator<Item = &'a IndexTensor>) -> f64 {
    tensors
        .into_iter()
        .map(IndexTensor::max_value)
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceEntry {
    pub radius: f64,
    /// `max |Phi^R / ratio - Phi^inf| / max Phi^inf` over the probes.
    pub deviation: f64,
    /// Median of `Phi^R / Phi^inf` over the probes.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Compares near-field index functions at growing measurement radii with
/// the far-field index function, for incidence 0 of `cfg`.
///
/// Both use `cfg.n_rec` nodes: receivers on each circle and far-field
/// directions alike. The proportionality constant between the two is
/// estimated as the median ratio over the probe points.
pub fn convergence_check(
    grid: &ContrastGrid,
    cfg: &ExperimentConfig,
    radii: &[f64],
    probe_points: &[Point],
) -> Result<ConvergenceReport> {
    require_full(cfg)?;
    if probe_points.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one probe point".into(),
        ));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "radii must be strictly increasing".into(),
        ));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 2f64.sqrt())) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} does not enclose the domain"
        )));
    }

    let res = solve_forward(grid, cfg, 0)?;
    let dirs = far_directions(cfg.n_rec);
    let uinf = far_field(&res, grid, cfg, cfg.n_rec)?;
    let phi_far = SamplingKernel::far(probe_points, &dirs, cfg.k).apply(&uinf)?;
    let far_max = phi_far.iter().copied().fold(0.0, f64::max);
    if !(far_max > 0.0) {
        return Err(Error::InvalidArgument(
            "far-field index function vanishes at every probe".into(),
        ));
    }

    let mut entries = Vec::with_capacity(radii.len());
    for &radius in radii {
        let at_r = ExperimentConfig {
            r_meas: radius,
            ..cfg.clone()
        };
        let receivers = at_r.receivers();
        let us = scattered_at_points(&res, grid, cfg.k, &receivers)?;
        let phi_near =
            SamplingKernel::near(probe_points, &receivers, cfg.k, at_r.quadrature_weight())
                .apply(&us)?;
        let ratio = median(
            phi_near
                .iter()
                .zip(&phi_far)
                .filter(|(_, f)| **f > 0.0)
                .map(|(a, f)| a / f)
                .collect(),
        );
        let deviation = phi_near
            .iter()
            .zip(&phi_far)
            .map(|(a, f)| (a / ratio - f).abs())
            .fold(0.0, f64::max)
            / far_max;
        entries.push(ConvergenceEntry {
            radius,
            deviation,
            ratio,
        });
    }
    Ok(ConvergenceReport { entries })
}

/// Extreme singular values `(sigma_min, sigma_max)` of the discretized
/// sampling operator `A[x, r] = conj(G(x, y_r)) w` on an `n x n` probe grid.
pub fn injectivity_rank(cfg: &ExperimentConfig, n: usize) -> Result<(f64, f64)> {
    cfg.validate()?;
    injectivity_rank_for(&cfg.receivers(), cfg.k, cfg.quadrature_weight(), n)
}

/// As [`injectivity_rank`] for an explicit list of receiver positions.
pub fn injectivity_rank_for(
    receivers: &[Point],
    k: f64,
    weight: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if receivers.is_empty() || receivers.len() > n * n {
        return Err(Error::InvalidArgument(format!(
            "need 1..={} receivers for an {n} x {n} probe grid, got {}",
            n * n,
            receivers.len()
        )));
    }
    let kernel = SamplingKernel::near(&grid_points(n), receivers, k, weight);
    let m = ComplexMatrix::from_fn(kernel.n_points, kernel.n_nodes, |i, j| {
        kernel.values[i * kernel.n_nodes + j]
    });
    let sv = singular_values(&m);
    Ok((*sv.last().unwrap_or(&0.0), sv[0]))
}
