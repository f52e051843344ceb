//! Reference implementations used as test oracles.
//!
//! Bessel functions are summed from their power series in double-double
//! arithmetic, independent of the library's special-function code.

use num_complex::Complex64;
use scatter_dsm::Point;

pub mod dd {
    use std::ops::{Add, Mul, Neg, Sub};

    /// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
    #[derive(Clone, Copy, Debug, PartialEq)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl Dd {
        pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
        pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

        pub fn from(x: f64) -> Dd {
            Dd { hi: x, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }

        pub fn abs(self) -> f64 {
            self.to_f64().abs()
        }

        pub fn div_f64(self, d: f64) -> Dd {
            let q1 = self.hi / d;
            let (p, e) = two_prod(q1, d);
            let r = (self.hi - p - e + self.lo) / d;
            let (hi, lo) = two_sum(q1, r);
            Dd { hi, lo }
        }

        pub fn recip_int(k: u64) -> Dd {
            Dd::ONE.div_f64(k as f64)
        }
    }

    impl Add for Dd {
        type Output = Dd;
        fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (hi, lo) = two_sum(s, e + self.lo + o.lo);
            Dd { hi, lo }
        }
    }

    impl Neg for Dd {
        type Output = Dd;
        fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }
    }

    impl Sub for Dd {
        type Output = Dd;
        fn sub(self, o: Dd) -> Dd {
            self + (-o)
        }
    }

    impl Mul for Dd {
        type Output = Dd;
        fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.hi, o.hi);
            let (hi, lo) = two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
            Dd { hi, lo }
        }
    }
}

use dd::Dd;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CAP: u64 = 2000;

/// `J_m(z)` from `sum_k (-1)^k (z/2)^(2k+m) / (k! (k+m)!)`.
pub fn series_j(m: u32, z: f64) -> f64 {
    let half = Dd::from(z / 2.0);
    let mut t = Dd::ONE;
    for i in 1..=m as u64 {
        t = (t * half).div_f64(i as f64);
    }
    let q = -(half * half);
    let mut sum = t;
    let mut peak = t.abs();
    for k in 1..SERIES_CAP {
        t = (t * q).div_f64((k * (k + m as u64)) as f64);
        sum = sum + t;
        peak = peak.max(t.abs());
        if k as f64 > z && t.abs() < 1e-34 * peak.max(1.0) {
            break;
        }
    }
    sum.to_f64()
}

/// `Y_n(z)` for `n` in {0, 1} from the logarithmic series.
fn series_y01(n: u32, z: f64) -> f64 {
    assert!(n <= 1 && z > 0.0);
    let half = Dd::from(z / 2.0);
    let q = -(half * half);
    // c_k = q^k / (k! (n+k)!)
    let mut c = Dd::ONE;
    let mut h_k = Dd::ZERO;
    let mut h_kn = if n == 0 { Dd::ZERO } else { Dd::ONE };
    let mut sum = c * (h_k + h_kn);
    let mut peak = sum.abs();
    for k in 1..SERIES_CAP {
        c = (c * q).div_f64((k * (k + n as u64)) as f64);
        h_k = h_k + Dd::recip_int(k);
        h_kn = h_kn + Dd::recip_int(k + n as u64);
        let term = c * (h_k + h_kn);
        sum = sum + term;
        peak = peak.max(term.abs());
        if k as f64 > z && term.abs() < 1e-34 * peak.max(1.0) {
            break;
        }
    }
    let scaled = if n == 0 { sum } else { sum * half };
    let pi = std::f64::consts::PI;
    let log_part = 2.0 / pi * ((z / 2.0).ln() + EULER_GAMMA) * series_j(n, z);
    let pole = if n == 1 { 2.0 / (pi * z) } else { 0.0 };
    -pole + log_part - scaled.to_f64() / pi
}

pub fn series_y(m: u32, z: f64) -> f64 {
    let y0 = series_y01(0, z);
    if m == 0 {
        return y0;
    }
    let mut prev = y0;
    let mut cur = series_y01(1, z);
    for k in 1..m {
        let next = 2.0 * k as f64 / z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn series_h(m: u32, z: f64) -> Complex64 {
    Complex64::new(series_j(m, z), series_y(m, z))
}

/// `(i/4) H_0^(1)(k |x - y|)` from the series oracle.
pub fn oracle_green(x: Point, y: Point, k: f64) -> Complex64 {
    Complex64::new(0.0, 0.25) * series_h(0, k * x.dist(y))
}

/// Scattered field of a homogeneous disc centered at the origin under the
/// plane wave `exp(i k x)`, at polar points `(r, theta)` with `r > radius`.
pub fn mie_scattered(
    k: f64,
    eps: f64,
    radius: f64,
    orders: u32,
    points: &[Point],
) -> Vec<Complex64> {
    let k1 = k * eps.sqrt();
    let (za, z1) = (k * radius, k1 * radius);
    let j = |m: u32, z: f64| series_j(m, z);
    let jp = |m: u32, z: f64| {
        if m == 0 {
            -j(1, z)
        } else {
            0.5 * (j(m - 1, z) - j(m + 1, z))
        }
    };
    let h = |m: u32, z: f64| series_h(m, z);
    let hp = |m: u32, z: f64| {
        if m == 0 {
            -h(1, z)
        } else {
            0.5 * (h(m - 1, z) - h(m + 1, z))
        }
    };
    let coeffs: Vec<Complex64> = (0..=orders)
        .map(|m| {
            let num = Complex64::from(k1 * jp(m, z1) * j(m, za) - k * jp(m, za) * j(m, z1));
            let den = k * hp(m, za) * j(m, z1) - k1 * jp(m, z1) * h(m, za);
            num / den
        })
        .collect();
    let i = Complex64::new(0.0, 1.0);
    points
        .iter()
        .map(|p| {
            let r = p.norm();
            let theta = p.y.atan2(p.x);
            let mut u = coeffs[0] * h(0, k * r);
            for m in 1..=orders {
                u += 2.0 * coeffs[m as usize] * i.powu(m) * h(m, k * r) * (m as f64 * theta).cos();
            }
            u
        })
        .collect()
}

/// First-order Born field `k^2 sum_c G(x, y_c) eta_c u^i(y_c) |cell|`.
pub fn born_scattered(
    grid: &scatter_dsm::scene::ContrastGrid,
    k: f64,
    direction: Point,
    points: &[Point],
) -> Vec<Complex64> {
    let area = grid.cell_area();
    let cells: Vec<(Point, f64)> = (0..grid.n() * grid.n())
        .filter(|&c| grid.contrast(c) != 0.0)
        .map(|c| (grid.center_of(c), grid.contrast(c)))
        .collect();
    points
        .iter()
        .map(|&x| {
            cells
                .iter()
                .map(|&(y, eta)| {
                    let ui = Complex64::from_polar(1.0, k * y.dot(direction));
                    oracle_green(x, y, k) * eta * ui
                })
                .sum::<Complex64>()
                * (k * k * area)
        })
        .collect()
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn rel_max(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
        )
        .0
}
