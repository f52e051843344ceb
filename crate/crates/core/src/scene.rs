//! Contrast rasters over the sampling square and the scatterer families
//! built on them.
//!
//! Axis convention shared by every module: a grid is stored row-major with
//! the first index `i` running along x and the second index `j` along y,
//! both increasing with the coordinate. Pixel centers sit at
//! `-extent + (i + 0.5) * 2 extent / n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DOMAIN_HALF_WIDTH: f64 = 1.0;
pub const BACKGROUND_PERMITTIVITY: f64 = 1.0;

/// Relative permittivity sampled on an `n x n` raster over `[-extent, extent]^2`.
///
/// Every value is `>= 1`; the background is exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastGrid {
    n: usize,
    extent: f64,
    eps: Vec<f64>,
}

impl ContrastGrid {
    /// Homogeneous background grid over the default domain.
    pub fn background(n: usize) -> Self {
        Self {
            n,
            extent: DOMAIN_HALF_WIDTH,
            eps: vec![BACKGROUND_PERMITTIVITY; n * n],
        }
    }

    pub fn from_eps(n: usize, eps: Vec<f64>) -> Result<Self> {
        if eps.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} permittivity values for n = {n}, got {}",
                n * n,
                eps.len()
            )));
        }
        if let Some(bad) = eps.iter().find(|v| !(**v >= BACKGROUND_PERMITTIVITY)) {
            return Err(Error::InvalidArgument(format!(
                "relative permittivity must be finite and >= 1, found {bad}"
            )));
        }
        Ok(Self {
            n,
            extent: DOMAIN_HALF_WIDTH,
            eps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn into_eps(self) -> Vec<f64> {
        self.eps
    }

    /// Pixel side length.
    pub fn cell_size(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.cell_size();
        h * h
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> f64 {
        -self.extent + (idx as f64 + 0.5) * self.cell_size()
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(self.coord(i), self.coord(j))
    }

    /// Center of the cell with flat index `c`.
    #[inline]
    pub fn center_of(&self, c: usize) -> Point {
        self.center(c / self.n, c % self.n)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.eps[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.eps[i * self.n + j] = value;
    }

    /// Contrast `eps_r - 1` at a flat index.
    #[inline]
    pub fn contrast(&self, c: usize) -> f64 {
        self.eps[c] - BACKGROUND_PERMITTIVITY
    }

    /// Flat indices of cells with non-zero contrast, in ascending order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.eps.len())
            .filter(|&c| self.contrast(c) > 0.0)
            .collect()
    }

    /// The cell containing `p`, if `p` lies in the domain.
    pub fn cell_containing(&self, p: Point) -> Option<(usize, usize)> {
        let h = self.cell_size();
        let fi = ((p.x + self.extent) / h).floor();
        let fj = ((p.y + self.extent) / h).floor();
        let n = self.n as f64;
        if fi < 0.0 || fj < 0.0 || fi >= n || fj >= n {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Value at the cell containing `p`; background outside the domain.
    pub fn value_at(&self, p: Point) -> f64 {
        self.cell_containing(p)
            .map_or(BACKGROUND_PERMITTIVITY, |(i, j)| self.get(i, j))
    }
}

/// A homogeneous disc scatterer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: Point,
    pub radius: f64,
    pub permittivity: f64,
}

impl CircleSpec {
    pub fn new(center: Point, radius: f64, permittivity: f64) -> Result<Self> {
        let spec = Self {
            center,
            radius,
            permittivity,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "circle radius must be positive, got {}",
                self.radius
            )));
        }
        if !(self.permittivity >= BACKGROUND_PERMITTIVITY) || !self.permittivity.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "circle permittivity must be >= 1, got {}",
                self.permittivity
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn covers(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius
    }
}

fn paint_circle(grid: &mut ContrastGrid, circle: &CircleSpec) {
    for i in 0..grid.n {
        for j in 0..grid.n {
            if circle.covers(grid.center(i, j)) {
                grid.set(i, j, circle.permittivity);
            }
        }
    }
}

/// Rasterizes discs onto a background grid. Where discs overlap, the one
/// listed last wins. Parts outside the domain are clipped.
pub fn rasterize_circles(circles: &[CircleSpec], n: usize) -> Result<ContrastGrid> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 8, got {n}"
        )));
    }
    let mut grid = ContrastGrid::background(n);
    for circle in circles {
        circle.validate()?;
        paint_circle(&mut grid, circle);
    }
    Ok(grid)
}

/// Rasterizes discs with boundary pixels set to their area-averaged
/// permittivity, estimated on a `samples x samples` lattice of sub-pixel
/// points per cell (last listed disc wins at each point).
pub fn rasterize_circles_averaged(
    circles: &[CircleSpec],
    n: usize,
    samples: usize,
) -> Result<ContrastGrid> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 8, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "need at least one sample per axis".into(),
        ));
    }
    for circle in circles {
        circle.validate()?;
    }
    let mut grid = ContrastGrid::background(n);
    let h = grid.cell_size();
    let sub = h / samples as f64;
    for i in 0..n {
        for j in 0..n {
            let c = grid.center(i, j);
            let mut total = 0.0;
            for a in 0..samples {
                for b in 0..samples {
                    let p = Point::new(
                        c.x - h / 2.0 + (a as f64 + 0.5) * sub,
                        c.y - h / 2.0 + (b as f64 + 0.5) * sub,
                    );
                    total += circles
                        .iter()
                        .rev()
                        .find(|circle| circle.covers(p))
                        .map_or(BACKGROUND_PERMITTIVITY, |circle| circle.permittivity);
                }
            }
            grid.set(i, j, total / (samples * samples) as f64);
        }
    }
    Ok(grid)
}

/// Permittivity assignments of the two-discs-plus-ring benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AustriaVariant {
    /// Everything at 2.0.
    CircleDataset,
    /// Discs at 3.0, ring at 1.5.
    Mnist1,
    /// Left disc 1.5, right disc 2.0, ring 2.5.
    Mnist2,
}

pub const AUSTRIA_DISC_RADIUS: f64 = 0.2;
pub const AUSTRIA_DISC_CENTERS: [Point; 2] = [Point::new(-0.3, 0.6), Point::new(0.3, 0.6)];
pub const AUSTRIA_RING_CENTER: Point = Point::new(0.0, -0.2);
pub const AUSTRIA_RING_INNER: f64 = 0.3;
pub const AUSTRIA_RING_OUTER: f64 = 0.6;

/// The Austria profile on the default 64 x 64 grid.
pub fn make_austria(variant: AustriaVariant) -> ContrastGrid {
    let (left, right, ring) = match variant {
        AustriaVariant::CircleDataset => (2.0, 2.0, 2.0),
        AustriaVariant::Mnist1 => (3.0, 3.0, 1.5),
        AustriaVariant::Mnist2 => (1.5, 2.0, 2.5),
    };
    let mut grid = ContrastGrid::background(DEFAULT_RESOLUTION);
    for i in 0..grid.n {
        for j in 0..grid.n {
            let p = grid.center(i, j);
            let r = p.dist(AUSTRIA_RING_CENTER);
            if r > AUSTRIA_RING_INNER && r <= AUSTRIA_RING_OUTER {
                grid.set(i, j, ring);
            } else if p.dist(AUSTRIA_DISC_CENTERS[0]) <= AUSTRIA_DISC_RADIUS {
                grid.set(i, j, left);
            } else if p.dist(AUSTRIA_DISC_CENTERS[1]) <= AUSTRIA_DISC_RADIUS {
                grid.set(i, j, right);
            }
        }
    }
    grid
}

const GLYPH_SIZE: usize = 16;
const GLYPH_SCALE: usize = 3;
const LETTER_PERMITTIVITY: f64 = 2.0;

// 16 x 16 masks, top row first, '#' = scatterer.
const GLYPH_D: [&str; GLYPH_SIZE] = [
    "................",
    "..#########.....",
    "..##########....",
    "..##......###...",
    "..##.......###..",
    "..##........##..",
    "..##........##..",
    "..##........##..",
    "..##........##..",
    "..##........##..",
    "..##........##..",
    "..##.......###..",
    "..##......###...",
    "..##########....",
    "..#########.....",
    "................",
];

const GLYPH_S: [&str; GLYPH_SIZE] = [
    "................",
    "....#########...",
    "...##########...",
    "..###...........",
    "..##............",
    "..##............",
    "..###...........",
    "...#########....",
    "....#########...",
    "...........###..",
    "............##..",
    "............##..",
    "...........###..",
    "..##########....",
    "..#########.....",
    "................",
];

const GLYPH_M: [&str; GLYPH_SIZE] = [
    "................",
    ".##..........##.",
    ".###........###.",
    ".####......####.",
    ".##.##....##.##.",
    ".##..##..##..##.",
    ".##...####...##.",
    ".##....##....##.",
    ".##..........##.",
    ".##..........##.",
    ".##..........##.",
    ".##..........##.",
    ".##..........##.",
    ".##..........##.",
    ".##..........##.",
    "................",
];

fn glyph_grid(rows: &[&str; GLYPH_SIZE]) -> ContrastGrid {
    let n = DEFAULT_RESOLUTION;
    let offset = (n - GLYPH_SIZE * GLYPH_SCALE) / 2;
    let mut grid = ContrastGrid::background(n);
    for (row, line) in rows.iter().enumerate() {
        assert_eq!(line.len(), GLYPH_SIZE, "malformed glyph row {row}");
        for (col, ch) in line.bytes().enumerate() {
            if ch != b'#' {
                continue;
            }
            for di in 0..GLYPH_SCALE {
                for dj in 0..GLYPH_SCALE {
                    let i = offset + col * GLYPH_SCALE + di;
                    // Glyph rows run top to bottom; j runs bottom to top.
                    let j = n - 1 - (offset + row * GLYPH_SCALE + dj);
                    grid.set(i, j, LETTER_PERMITTIVITY);
                }
            }
        }
    }
    grid
}

/// The letters D, S and M as binary-contrast 64 x 64 grids.
pub fn make_letters() -> Vec<ContrastGrid> {
    [&GLYPH_D, &GLYPH_S, &GLYPH_M]
        .into_iter()
        .map(glyph_grid)
        .collect()
}

pub const DIGIT_SIDE: usize = 28;
pub const DIGIT_THRESHOLD: f64 = 0.5;

/// A 28 x 28 greyscale image with values in [0, 1], stored top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitImage {
    pixels: Vec<f64>,
}

impl DigitImage {
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != DIGIT_SIDE * DIGIT_SIDE {
            return Err(Error::Shape(format!(
                "digit image must hold {} pixels, got {}",
                DIGIT_SIDE * DIGIT_SIDE,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "digit pixel values must lie in [0, 1], found {bad}"
            )));
        }
        Ok(Self { pixels })
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * DIGIT_SIDE + col]
    }

    /// Bilinear resampling to `n x n` (pixel-center aligned, edge clamped).
    /// Output is indexed `[row][col]`, top row first.
    pub fn upscale(&self, n: usize) -> Vec<f64> {
        let ratio = DIGIT_SIDE as f64 / n as f64;
        let last = (DIGIT_SIDE - 1) as f64;
        let src = |o: usize| ((o as f64 + 0.5) * ratio - 0.5).clamp(0.0, last);
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            let sr = src(r);
            let r0 = sr.floor() as usize;
            let r1 = (r0 + 1).min(DIGIT_SIDE - 1);
            let fr = sr - r0 as f64;
            for c in 0..n {
                let sc = src(c);
                let c0 = sc.floor() as usize;
                let c1 = (c0 + 1).min(DIGIT_SIDE - 1);
                let fc = sc - c0 as f64;
                let top = self.at(r0, c0) * (1.0 - fc) + self.at(r0, c1) * fc;
                let bottom = self.at(r1, c0) * (1.0 - fc) + self.at(r1, c1) * fc;
                out[r * n + c] = top * (1.0 - fr) + bottom * fr;
            }
        }
        out
    }
}

/// Builds a digit scatterer: bilinear upscale to `n x n`, threshold at 0.5,
/// rotate the binary mask by `rot` radians about the grid center with
/// nearest-neighbour lookup, paint it with `eps_digit`, then paint `circle`
/// over it.
pub fn digit_to_grid(
    img: &DigitImage,
    n: usize,
    rot: f64,
    circle: Option<&CircleSpec>,
    eps_digit: f64,
) -> Result<ContrastGrid> {
    if !(eps_digit >= BACKGROUND_PERMITTIVITY) {
        return Err(Error::InvalidArgument(format!(
            "digit permittivity must be >= 1, got {eps_digit}"
        )));
    }
    let up = img.upscale(n);
    let mut mask = vec![false; n * n];
    for row in 0..n {
        for col in 0..n {
            if up[row * n + col] >= DIGIT_THRESHOLD {
                mask[col * n + (n - 1 - row)] = true;
            }
        }
    }

    let mut grid = ContrastGrid::background(n);
    let (s, c) = rot.sin_cos();
    for i in 0..n {
        for j in 0..n {
            // out(x) = in(R_{-rot} x)
            let p = grid.center(i, j);
            let q = Point::new(c * p.x + s * p.y, -s * p.x + c * p.y);
            if let Some((si, sj)) = grid.cell_containing(q) {
                if mask[si * n + sj] {
                    grid.set(i, j, eps_digit);
                }
            }
        }
    }
    if let Some(circle) = circle {
        circle.validate()?;
        paint_circle(&mut grid, circle);
    }
    Ok(grid)
}
