//! Special functions checked against tabulated values and the series oracle.

use scatter_dsm::special::{bessel_j0, bessel_j1, bessel_y0, bessel_y1, green_2d, hankel1_1};
use scatter_dsm::Point;
use scatter_dsm_oracles::{oracle_green, series_h, series_j, series_y};

#[test]
fn series_oracle_matches_tables() {
    let table = [
        (0, 1.0, 0.765_197_686_557_966_6, 0.088_256_964_215_676_96),
        (1, 1.0, 0.440_050_585_744_933_5, -0.781_212_821_300_288_7),
        (0, 10.0, -0.245_935_764_451_348_3, 0.055_671_167_283_599_4),
        (1, 10.0, 0.043_472_746_168_861_44, 0.249_015_424_206_953_9),
        (2, 5.0, 0.046_565_116_277_752_2, 0.367_662_882_605_524_5),
    ];
    for (m, z, j, y) in table {
        assert!((series_j(m, z) - j).abs() < 1e-14, "J_{m}({z})");
        assert!((series_y(m, z) - y).abs() < 1e-14, "Y_{m}({z})");
    }
}

#[test]
fn library_bessel_agrees_with_series() {
    let mut z: f64 = 1e-3;
    while z < 40.0 {
        let tol = 1e-12 * (1.0 + z.ln().abs());
        assert!(
            (bessel_j0(z).unwrap() - series_j(0, z)).abs() < tol,
            "J0({z})"
        );
        assert!(
            (bessel_j1(z).unwrap() - series_j(1, z)).abs() < tol,
            "J1({z})"
        );
        assert!(
            (bessel_y0(z).unwrap() - series_y(0, z)).abs() < tol,
            "Y0({z})"
        );
        let y1 = series_y(1, z);
        assert!(
            (bessel_y1(z).unwrap() - y1).abs() < tol * y1.abs().max(1.0),
            "Y1({z})"
        );
        let h = hankel1_1(z).unwrap();
        assert!((h - series_h(1, z)).norm() < tol * y1.abs().max(1.0));
        z *= 1.13;
    }
}

#[test]
fn library_green_agrees_with_series() {
    let k = std::f64::consts::TAU / 0.75;
    let y = Point::new(3.0, 0.0);
    for x in [
        Point::new(0.1, 0.2),
        Point::new(-0.9, 0.95),
        Point::new(0.0, -1.0),
    ] {
        let g = green_2d(x, y, k).unwrap();
        assert!((g - oracle_green(x, y, k)).norm() < 1e-13);
    }
}

#[test]
fn wronskian_of_series() {
    for z in [0.3, 2.5, 7.0, 19.0, 33.0] {
        let w = series_j(1, z) * series_y(0, z) - series_j(0, z) * series_y(1, z);
        assert!((w - 2.0 / (std::f64::consts::PI * z)).abs() < 1e-14);
    }
}
