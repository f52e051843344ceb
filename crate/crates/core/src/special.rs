//! Cylindrical Bessel functions of orders 0 and 1 and the 2D free-space
//! Green's functions built on them.
//!
//! Real-argument J0, J1, Y0, Y1 come from `libm` (fdlibm rational
//! approximations below x = 2, rational-corrected Hankel asymptotics above).
//! The test suite checks them against an independent double-double power
//! series.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point;

fn check_nonnegative(z: f64, what: &str) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!(
            "{what} requires finite z >= 0, got {z}"
        )));
    }
    Ok(())
}

fn check_positive(z: f64, what: &str) -> Result<()> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!(
            "{what} requires finite z > 0, got {z}"
        )));
    }
    Ok(())
}

/// J0(z) for z >= 0.
pub fn bessel_j0(z: f64) -> Result<f64> {
    check_nonnegative(z, "bessel_j0")?;
    Ok(libm::j0(z))
}

/// J1(z) for z >= 0.
pub fn bessel_j1(z: f64) -> Result<f64> {
    check_nonnegative(z, "bessel_j1")?;
    Ok(libm::j1(z))
}

/// Y0(z) for z > 0. Y0 diverges logarithmically at the origin.
pub fn bessel_y0(z: f64) -> Result<f64> {
    check_positive(z, "bessel_y0")?;
    Ok(libm::y0(z))
}

/// Y1(z) for z > 0.
pub fn bessel_y1(z: f64) -> Result<f64> {
    check_positive(z, "bessel_y1")?;
    Ok(libm::y1(z))
}

/// H0^(1)(z) = J0(z) + i Y0(z).
pub fn hankel1_0(z: f64) -> Result<Complex64> {
    check_positive(z, "hankel1_0")?;
    Ok(hankel1_0_unchecked(z))
}

/// H1^(1)(z) = J1(z) + i Y1(z).
pub fn hankel1_1(z: f64) -> Result<Complex64> {
    check_positive(z, "hankel1_1")?;
    Ok(Complex64::new(libm::j1(z), libm::y1(z)))
}

#[inline]
pub(crate) fn hankel1_0_unchecked(z: f64) -> Complex64 {
    Complex64::new(libm::j0(z), libm::y0(z))
}

/// (i/4) H0^(1)(kr) as a function of the scaled distance `kr > 0`.
#[inline]
pub(crate) fn green_of_kr(kr: f64) -> Complex64 {
    // (i/4)(J0 + i Y0) = -Y0/4 + i J0/4
    Complex64::new(-0.25 * libm::y0(kr), 0.25 * libm::j0(kr))
}

/// Free-space Green's function of the 2D Helmholtz operator,
/// `G(x, y) = (i/4) H0^(1)(k |x - y|)`.
///
/// Symmetric in `x` and `y`. Singular at `x == y`; the forward solver
/// integrates the self cell analytically instead of calling this.
pub fn green_2d(x: Point, y: Point, k: f64) -> Result<Complex64> {
    check_positive(k, "green_2d wavenumber")?;
    let d = x.dist(y);
    if d == 0.0 {
        return Err(Error::Singularity(format!(
            "green_2d evaluated at coincident points ({}, {})",
            x.x, x.y
        )));
    }
    Ok(green_of_kr(k * d))
}

/// Magnitude of the far-field kernel prefactor `e^{i pi/4} / sqrt(8 k pi)`.
#[inline]
pub fn far_prefactor(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * k * PI).sqrt(), FRAC_PI_4)
}

/// Far-field kernel `e^{i pi/4} / sqrt(8 k pi) * e^{-i k x . dir}`.
///
/// `dir` must be a unit vector to within 1e-12.
pub fn green_far_2d(x: Point, dir: Point, k: f64) -> Result<Complex64> {
    check_positive(k, "green_far_2d wavenumber")?;
    let norm = dir.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "green_far_2d direction must be a unit vector, |dir| = {norm}"
        )));
    }
    Ok(green_far_unchecked(x, dir, k))
}

#[inline]
pub(crate) fn green_far_unchecked(x: Point, dir: Point, k: f64) -> Complex64 {
    far_prefactor(k) * Complex64::from_polar(1.0, -k * x.dot(dir))
}
