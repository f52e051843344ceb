//! Method-of-moments solution of the Lippmann-Schwinger equation
//! `u = u^i + k^2 \int G eta u` on the pixel grid, with pulse basis
//! functions and collocation at pixel centers.
//!
//! Unknowns live only on cells with non-zero contrast: the induced current
//! `eta u` vanishes elsewhere, so the reduced system is exact.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{norm2, ComplexMatrix, LuFactorization};
use crate::rng::Rng;
use crate::scene::ContrastGrid;
use crate::special::{green_far_unchecked, green_of_kr, hankel1_0_unchecked, hankel1_1};

pub const DEFAULT_WAVELENGTH: f64 = 0.75;
pub const DEFAULT_RECEIVERS: usize = 32;
pub const DEFAULT_MEASUREMENT_RADIUS: f64 = 3.0;
pub const LIMITED_APERTURE_RECEIVERS: usize = 16;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Angular interval `[start, end)` of the measurement circle carrying receivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub start: f64,
    pub end: f64,
}

impl Aperture {
    pub const FULL: Aperture = Aperture {
        start: 0.0,
        end: TAU,
    };
    pub const UPPER_HALF: Aperture = Aperture {
        start: 0.0,
        end: PI,
    };

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_full(&self) -> bool {
        (self.length() - TAU).abs() < 1e-12
    }
}

impl Default for Aperture {
    fn default() -> Self {
        Self::FULL
    }
}

/// Geometry and illumination of one scattering experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Wavenumber (rad per unit length).
    pub k: f64,
    /// Number of plane-wave incidences, directions `2 pi p / n_inc`.
    pub n_inc: usize,
    /// Number of receivers, equally spaced in the aperture.
    pub n_rec: usize,
    /// Radius of the measurement circle.
    pub r_meas: f64,
    pub aperture: Aperture,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: TAU / DEFAULT_WAVELENGTH,
            n_inc: 1,
            n_rec: DEFAULT_RECEIVERS,
            r_meas: DEFAULT_MEASUREMENT_RADIUS,
            aperture: Aperture::FULL,
        }
    }
}

impl ExperimentConfig {
    pub fn with_incidences(n_inc: usize) -> Self {
        Self {
            n_inc,
            ..Self::default()
        }
    }

    /// Sixteen receivers on the upper half circle.
    pub fn limited_aperture(n_inc: usize) -> Self {
        Self {
            n_inc,
            n_rec: LIMITED_APERTURE_RECEIVERS,
            aperture: Aperture::UPPER_HALF,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive, got {}",
                self.k
            )));
        }
        if self.n_inc == 0 || self.n_rec == 0 {
            return Err(Error::InvalidArgument(
                "incidence and receiver counts must be at least 1".into(),
            ));
        }
        if !(self.r_meas > 2f64.sqrt()) {
            return Err(Error::InvalidArgument(format!(
                "measurement radius {} must exceed sqrt(2) so receivers lie outside the domain",
                self.r_meas
            )));
        }
        let len = self.aperture.length();
        if !(len > 0.0 && len <= TAU + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "invalid aperture length {len}"
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        TAU / self.k
    }

    pub fn receiver_angles(&self) -> Vec<f64> {
        let len = self.aperture.length();
        (0..self.n_rec)
            .map(|r| self.aperture.start + len * r as f64 / self.n_rec as f64)
            .collect()
    }

    pub fn receivers(&self) -> Vec<Point> {
        self.receiver_angles()
            .into_iter()
            .map(|t| Point::polar(self.r_meas, t))
            .collect()
    }

    /// Arc-length quadrature weight per receiver.
    pub fn quadrature_weight(&self) -> f64 {
        self.aperture.length() * self.r_meas / self.n_rec as f64
    }

    pub fn incidence_angle(&self, p: usize) -> f64 {
        TAU * p as f64 / self.n_inc as f64
    }

    pub fn incidence_direction(&self, p: usize) -> Point {
        Point::unit(self.incidence_angle(p))
    }

    pub fn incident_field(&self, p: usize, x: Point) -> Complex64 {
        Complex64::from_polar(1.0, self.k * x.dot(self.incidence_direction(p)))
    }
}

/// Scattered field samples for one incidence.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRecord {
    pub incidence: usize,
    /// Scattered field at the receivers.
    pub us: Vec<Complex64>,
    /// Optional far-field pattern samples.
    pub uinf: Option<Vec<Complex64>>,
    /// Relative noise level applied (0 for clean data).
    pub noise_level: f64,
}

/// Total field and induced current on the scatterer support.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub incidence: usize,
    /// Flat indices of cells with `eta > 0`, ascending.
    pub support_cells: Vec<usize>,
    pub total_field: Vec<Complex64>,
    /// `eta * u` per support cell.
    pub induced_current: Vec<Complex64>,
}

/// Cell integration rule for the off-diagonal interaction terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellQuadrature {
    /// `G(x_m, y_c) * A`.
    #[default]
    Midpoint,
    /// Equivalent-disc integral `(i pi a / 2k) J1(ka) H0(k |x_m - y_c|)`.
    EquivalentDisc,
}

/// Which cells carry unknowns in the linear system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Unknowns {
    #[default]
    Support,
    AllCells,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverOptions {
    pub quadrature: CellQuadrature,
    pub unknowns: Unknowns,
}

/// `k^2 * \int_cell G` for every pixel offset `(|di|, |dj|)`; entry (0, 0)
/// is the self term.
struct InteractionTable {
    n: usize,
    values: Vec<Complex64>,
}

impl InteractionTable {
    fn new(grid: &ContrastGrid, k: f64, quadrature: CellQuadrature) -> Result<Self> {
        let n = grid.n();
        let h = grid.cell_size();
        let area = grid.cell_area();
        let a = (area / PI).sqrt();
        let ka = k * a;
        let i_unit = Complex64::new(0.0, 1.0);
        // k^2 \int_{|y|<a} G = (i/2) (pi k a H1(ka) + 2i)
        let self_term = 0.5 * i_unit * (PI * ka * hankel1_1(ka)? + 2.0 * i_unit);
        let disc_factor = 0.5 * i_unit * PI * ka * libm::j1(ka);

        let mut values = Vec::with_capacity(n * n);
        for di in 0..n {
            for dj in 0..n {
                if di == 0 && dj == 0 {
                    values.push(self_term);
                    continue;
                }
                let rho = h * (di as f64).hypot(dj as f64);
                let v = match quadrature {
                    CellQuadrature::Midpoint => k * k * area * green_of_kr(k * rho),
                    CellQuadrature::EquivalentDisc => disc_factor * hankel1_0_unchecked(k * rho),
                };
                values.push(v);
            }
        }
        Ok(Self { n, values })
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> Complex64 {
        let (ai, aj) = (a / self.n, a % self.n);
        let (bi, bj) = (b / self.n, b % self.n);
        self.values[ai.abs_diff(bi) * self.n + aj.abs_diff(bj)]
    }
}

/// Assembled and factored MoM system for one grid and wavenumber.
pub struct MomSystem {
    k: f64,
    cells: Vec<usize>,
    centers: Vec<Point>,
    eta: Vec<f64>,
    matrix: ComplexMatrix,
    lu: Option<LuFactorization>,
}

impl MomSystem {
    pub fn assemble(grid: &ContrastGrid, k: f64, options: SolverOptions) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        let cells = match options.unknowns {
            Unknowns::Support => grid.support(),
            Unknowns::AllCells => (0..grid.n() * grid.n()).collect(),
        };
        let m = cells.len();
        let eta: Vec<f64> = cells.iter().map(|&c| grid.contrast(c)).collect();
        let centers: Vec<Point> = cells.iter().map(|&c| grid.center_of(c)).collect();
        let table = InteractionTable::new(grid, k, options.quadrature)?;
        let one = Complex64::new(1.0, 0.0);
        let matrix = ComplexMatrix::from_fn(m, m, |a, b| {
            let coupling = -table.get(cells[a], cells[b]) * eta[b];
            if a == b {
                one + coupling
            } else {
                coupling
            }
        });
        let lu = if m == 0 {
            None
        } else {
            Some(LuFactorization::factor(&matrix)?)
        };
        Ok(Self {
            k,
            cells,
            centers,
            eta,
            matrix,
            lu,
        })
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    /// Solves for the total field under plane-wave incidence `p` of `cfg`.
    pub fn solve_incidence(&self, cfg: &ExperimentConfig, p: usize) -> Result<SolveResult> {
        if p >= cfg.n_inc {
            return Err(Error::InvalidArgument(format!(
                "incidence {p} out of range for {} incidences",
                cfg.n_inc
            )));
        }
        if (cfg.k - self.k).abs() > 0.0 {
            return Err(Error::InvalidArgument(
                "configuration wavenumber differs from the assembled system".into(),
            ));
        }
        let rhs: Vec<Complex64> = self
            .centers
            .iter()
            .map(|&x| cfg.incident_field(p, x))
            .collect();
        let u = self.solve(&rhs)?;

        let mut support_cells = Vec::new();
        let mut total_field = Vec::new();
        let mut induced_current = Vec::new();
        for (idx, &c) in self.cells.iter().enumerate() {
            if self.eta[idx] > 0.0 {
                support_cells.push(c);
                total_field.push(u[idx]);
                induced_current.push(u[idx] * self.eta[idx]);
            }
        }
        Ok(SolveResult {
            incidence: p,
            support_cells,
            total_field,
            induced_current,
        })
    }

    /// Solves `A u = rhs` and enforces the relative residual bound.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let Some(lu) = &self.lu else {
            return Ok(Vec::new());
        };
        let u = lu.solve(rhs);
        let au = self.matrix.matvec(&u);
        let diff: Vec<Complex64> = au.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let scale = norm2(rhs);
        let residual = if scale > 0.0 {
            norm2(&diff) / scale
        } else {
            norm2(&diff)
        };
        if !(residual <= RESIDUAL_TOLERANCE) {
            return Err(Error::Solver {
                reason: "residual check failed".into(),
                residual,
            });
        }
        Ok(u)
    }
}

/// Solves the forward problem for incidence `p`.
pub fn solve_forward(grid: &ContrastGrid, cfg: &ExperimentConfig, p: usize) -> Result<SolveResult> {
    cfg.validate()?;
    MomSystem::assemble(grid, cfg.k, SolverOptions::default())?.solve_incidence(cfg, p)
}

/// Solves all incidences of `cfg` with a single factorization.
pub fn solve_all(grid: &ContrastGrid, cfg: &ExperimentConfig) -> Result<Vec<SolveResult>> {
    solve_all_with(grid, cfg, SolverOptions::default())
}

pub fn solve_all_with(
    grid: &ContrastGrid,
    cfg: &ExperimentConfig,
    options: SolverOptions,
) -> Result<Vec<SolveResult>> {
    cfg.validate()?;
    let system = MomSystem::assemble(grid, cfg.k, options)?;
    (0..cfg.n_inc)
        .map(|p| system.solve_incidence(cfg, p))
        .collect()
}

fn radiate(res: &SolveResult, grid: &ContrastGrid, k: f64, points: &[Point]) -> Vec<Complex64> {
    let weight = k * k * grid.cell_area();
    let sources: Vec<Point> = res
        .support_cells
        .iter()
        .map(|&c| grid.center_of(c))
        .collect();
    points
        .iter()
        .map(|&x| {
            let sum: Complex64 = sources
                .iter()
                .zip(&res.induced_current)
                .map(|(&y, &current)| green_of_kr(k * x.dist(y)) * current)
                .sum();
            sum * weight
        })
        .collect()
}

/// Scattered field at arbitrary points outside the domain.
pub fn scattered_at_points(
    res: &SolveResult,
    grid: &ContrastGrid,
    k: f64,
    points: &[Point],
) -> Result<Vec<Complex64>> {
    let e = grid.extent();
    if let Some(p) = points.iter().find(|p| p.x.abs() <= e && p.y.abs() <= e) {
        return Err(Error::InvalidArgument(format!(
            "observation point ({}, {}) lies inside the domain",
            p.x, p.y
        )));
    }
    Ok(radiate(res, grid, k, points))
}

/// Scattered field at the receivers of `cfg`.
pub fn scattered_at_receivers(
    res: &SolveResult,
    grid: &ContrastGrid,
    cfg: &ExperimentConfig,
) -> Result<FieldRecord> {
    cfg.validate()?;
    Ok(FieldRecord {
        incidence: res.incidence,
        us: radiate(res, grid, cfg.k, &cfg.receivers()),
        uinf: None,
        noise_level: 0.0,
    })
}

/// Far-field directions `2 pi q / n_far`.
pub fn far_directions(n_far: usize) -> Vec<Point> {
    (0..n_far)
        .map(|q| Point::unit(TAU * q as f64 / n_far as f64))
        .collect()
}

/// Far-field pattern at `n_far` equally spaced directions.
pub fn far_field(
    res: &SolveResult,
    grid: &ContrastGrid,
    cfg: &ExperimentConfig,
    n_far: usize,
) -> Result<Vec<Complex64>> {
    if n_far == 0 {
        return Err(Error::InvalidArgument(
            "need at least one far-field direction".into(),
        ));
    }
    let k = cfg.k;
    let weight = k * k * grid.cell_area();
    let sources: Vec<Point> = res
        .support_cells
        .iter()
        .map(|&c| grid.center_of(c))
        .collect();
    Ok(far_directions(n_far)
        .into_iter()
        .map(|dir| {
            let sum: Complex64 = sources
                .iter()
                .zip(&res.induced_current)
                .map(|(&y, &current)| green_far_unchecked(y, dir, k) * current)
                .sum();
            sum * weight
        })
        .collect())
}

/// Adds complex Gaussian noise at relative level `delta`.
///
/// Each receiver gets `delta ||us||_2 / sqrt(N_r) * (z_r + i z_i) / sqrt 2`
/// with the pair drawn from one Box-Muller step of the stream seeded by
/// `seed`, so that `E ||noise||_2^2 = delta^2 ||us||_2^2`.
pub fn add_noise(rec: &FieldRecord, delta: f64, seed: u64) -> Result<FieldRecord> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be >= 0, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(rec.clone());
    }
    let amplitude = delta * norm2(&rec.us) / (2.0 * rec.us.len() as f64).sqrt();
    let mut rng = Rng::new(seed);
    let us = rec
        .us
        .iter()
        .map(|&u| {
            let (zr, zi) = rng.normal_pair();
            u + Complex64::new(zr, zi) * amplitude
        })
        .collect();
    Ok(FieldRecord {
        incidence: rec.incidence,
        us,
        uinf: rec.uinf.clone(),
        noise_level: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{rasterize_circles, CircleSpec};
    use crate::special::green_2d;

    fn disc(center: Point, r: f64, eps: f64, n: usize) -> ContrastGrid {
        rasterize_circles(&[CircleSpec::new(center, r, eps).unwrap()], n).unwrap()
    }

    #[test]
    fn default_config_geometry() {
        let cfg = ExperimentConfig::with_incidences(4);
        cfg.validate().unwrap();
        assert_eq!(cfg.receivers().len(), 32);
        assert!((cfg.quadrature_weight() - TAU * 3.0 / 32.0).abs() < 1e-15);
        let d = cfg.incidence_direction(1);
        assert!(d.x.abs() < 1e-15 && (d.y - 1.0).abs() < 1e-15);

        let half = ExperimentConfig::limited_aperture(1);
        assert_eq!(half.receivers().len(), 16);
        assert!((half.quadrature_weight() - PI * 3.0 / 16.0).abs() < 1e-15);
        assert!(half.receiver_angles().iter().all(|t| (0.0..PI).contains(t)));
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig {
            r_meas: 1.2,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            n_inc: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_support_gives_zero_fields() {
        let grid = ContrastGrid::background(16);
        let cfg = ExperimentConfig::default();
        let res = solve_forward(&grid, &cfg, 0).unwrap();
        assert!(res.total_field.is_empty());
        let rec = scattered_at_receivers(&res, &grid, &cfg).unwrap();
        assert!(rec.us.iter().all(|u| *u == Complex64::new(0.0, 0.0)));
        let far = far_field(&res, &grid, &cfg, 8).unwrap();
        assert!(far.iter().all(|u| u.norm() == 0.0));
    }

    #[test]
    fn induced_current_is_contrast_times_field() {
        let grid = disc(Point::new(0.1, -0.2), 0.25, 1.8, 32);
        let cfg = ExperimentConfig::default();
        let res = solve_forward(&grid, &cfg, 0).unwrap();
        for ((c, u), i) in res
            .support_cells
            .iter()
            .zip(&res.total_field)
            .zip(&res.induced_current)
        {
            assert_eq!(*i, u * grid.contrast(*c));
        }
    }

    #[test]
    fn single_cell_hand_quadrature() {
        let mut grid = ContrastGrid::background(16);
        grid.set(5, 9, 1.5);
        let cfg = ExperimentConfig::default();
        let res = solve_forward(&grid, &cfg, 0).unwrap();
        assert_eq!(res.support_cells, vec![5 * 16 + 9]);
        let rec = scattered_at_receivers(&res, &grid, &cfg).unwrap();
        let y = grid.center(5, 9);
        let area = grid.cell_area();
        for (x, us) in cfg.receivers().iter().zip(&rec.us) {
            let hand =
                cfg.k * cfg.k * green_2d(*x, y, cfg.k).unwrap() * res.induced_current[0] * area;
            assert!((hand - us).norm() < 1e-15);
        }
        // 1x1 system: u (1 - eta k^2 G_self) = u^i
        let k = cfg.k;
        let a = (area / PI).sqrt();
        let i = Complex64::new(0.0, 1.0);
        let self_term = 0.5 * i * (PI * k * a * hankel1_1(k * a).unwrap() + 2.0 * i);
        let u = cfg.incident_field(0, y) / (1.0 - 0.5 * self_term);
        assert!((u - res.total_field[0]).norm() < 1e-14);
    }

    #[test]
    fn far_field_of_single_cell_at_origin_is_isotropic() {
        // odd grid so a cell center sits exactly at the origin
        let mut odd = ContrastGrid::background(15);
        odd.set(7, 7, 2.0);
        assert_eq!(odd.center(7, 7), Point::ORIGIN);
        let cfg = ExperimentConfig::default();
        let res = solve_forward(&odd, &cfg, 0).unwrap();
        let far = far_field(&res, &odd, &cfg, 12).unwrap();
        for f in &far {
            assert!((f.norm() - far[0].norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn mirror_symmetric_scene_has_mirror_symmetric_data() {
        let grid = rasterize_circles(
            &[
                CircleSpec::new(Point::new(0.2, 0.0), 0.3, 1.8).unwrap(),
                CircleSpec::new(Point::new(-0.5, 0.0), 0.15, 1.6).unwrap(),
            ],
            32,
        )
        .unwrap();
        let cfg = ExperimentConfig::default();
        let res = solve_forward(&grid, &cfg, 0).unwrap();
        let rec = scattered_at_receivers(&res, &grid, &cfg).unwrap();
        let n = cfg.n_rec;
        let scale = norm2(&rec.us);
        for r in 1..n {
            assert!((rec.us[r] - rec.us[n - r]).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn support_restricted_equals_full_grid() {
        let grid = rasterize_circles(
            &[
                CircleSpec::new(Point::new(0.2, 0.1), 0.4, 1.9).unwrap(),
                CircleSpec::new(Point::new(-0.5, -0.4), 0.25, 1.5).unwrap(),
            ],
            16,
        )
        .unwrap();
        let cfg = ExperimentConfig::with_incidences(2);
        let support = solve_all(&grid, &cfg).unwrap();
        let full = solve_all_with(
            &grid,
            &cfg,
            SolverOptions {
                unknowns: Unknowns::AllCells,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in support.iter().zip(&full) {
            let ua = scattered_at_receivers(a, &grid, &cfg).unwrap().us;
            let ub = scattered_at_receivers(b, &grid, &cfg).unwrap().us;
            let diff: Vec<Complex64> = ua.iter().zip(&ub).map(|(x, y)| x - y).collect();
            assert!(norm2(&diff) <= 1e-10 * norm2(&ua));
        }
    }

    #[test]
    fn born_regime_linearity() {
        let cfg = ExperimentConfig::default();
        let weak = disc(Point::new(0.1, 0.2), 0.3, 1.01, 32);
        let double = disc(Point::new(0.1, 0.2), 0.3, 1.02, 32);
        let a =
            scattered_at_receivers(&solve_forward(&weak, &cfg, 0).unwrap(), &weak, &cfg).unwrap();
        let b = scattered_at_receivers(&solve_forward(&double, &cfg, 0).unwrap(), &double, &cfg)
            .unwrap();
        let ratio = norm2(&b.us) / norm2(&a.us);
        assert!((ratio / 2.0 - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn equivalent_disc_quadrature_is_close_to_midpoint() {
        let grid = disc(Point::ORIGIN, 0.3, 2.0, 32);
        let cfg = ExperimentConfig::default();
        let a = solve_all(&grid, &cfg).unwrap();
        let b = solve_all_with(
            &grid,
            &cfg,
            SolverOptions {
                quadrature: CellQuadrature::EquivalentDisc,
                ..Default::default()
            },
        )
        .unwrap();
        let ua = scattered_at_receivers(&a[0], &grid, &cfg).unwrap().us;
        let ub = scattered_at_receivers(&b[0], &grid, &cfg).unwrap().us;
        let diff: Vec<Complex64> = ua.iter().zip(&ub).map(|(x, y)| x - y).collect();
        assert!(norm2(&diff) < 0.02 * norm2(&ua));
    }

    #[test]
    fn incidence_out_of_range() {
        let grid = disc(Point::ORIGIN, 0.3, 2.0, 16);
        assert!(solve_forward(&grid, &ExperimentConfig::default(), 1).is_err());
    }

    #[test]
    fn noise_level_is_relative_l2() {
        let us: Vec<Complex64> = (0..32)
            .map(|r| Complex64::from_polar(1.0 + 0.5 * (r as f64).sin(), 0.3 * r as f64))
            .collect();
        let rec = FieldRecord {
            incidence: 0,
            us: us.clone(),
            uinf: None,
            noise_level: 0.0,
        };
        let delta = 0.4;
        let trials = 10_000;
        let mean = (0..trials)
            .map(|seed| {
                let noisy = add_noise(&rec, delta, seed).unwrap();
                let diff: Vec<Complex64> = noisy.us.iter().zip(&us).map(|(a, b)| a - b).collect();
                norm2(&diff) / norm2(&us)
            })
            .sum::<f64>()
            / trials as f64;
        assert!(
            (mean / delta - 1.0).abs() < 0.03,
            "mean relative noise {mean}"
        );
    }

    #[test]
    fn noise_zero_and_determinism() {
        let rec = FieldRecord {
            incidence: 0,
            us: (0..32).map(|r| Complex64::new(r as f64, -1.0)).collect(),
            uinf: None,
            noise_level: 0.0,
        };
        assert_eq!(add_noise(&rec, 0.0, 5).unwrap(), rec);
        let a = add_noise(&rec, 0.3, 5).unwrap();
        let b = add_noise(&rec, 0.3, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&rec, 0.3, 6).unwrap());
        assert_eq!(a.noise_level, 0.3);
        assert!(add_noise(&rec, -0.1, 5).is_err());
    }

    #[test]
    fn scattered_points_must_be_outside() {
        let grid = disc(Point::ORIGIN, 0.3, 2.0, 16);
        let res = solve_forward(&grid, &ExperimentConfig::default(), 0).unwrap();
        assert!(scattered_at_points(&res, &grid, 1.0, &[Point::new(0.5, 0.5)]).is_err());
    }
}
