//! Dense complex matrices and an LU factorization with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `P A = L U` for a square matrix, unit-diagonal `L` stored below the
/// diagonal of `lu`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Shape(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().map(|z| z.norm()).fold(0.0, f64::max);

        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * n + k].norm_sqr();
            for i in k + 1..n {
                let m = lu[i * n + k].norm_sqr();
                if m > pivot_mag {
                    pivot_mag = m;
                    pivot_row = i;
                }
            }
            if !(pivot_mag.sqrt() > scale * f64::EPSILON) {
                return Err(Error::Solver {
                    reason: format!("matrix is numerically singular at column {k}"),
                    residual: f64::INFINITY,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }

            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let inv = pivot_row[k].inv();
            let pivot_rest = &pivot_row[k + 1..n];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                for (x, y) in row[k + 1..].iter_mut().zip(pivot_rest) {
                    *x -= l * y;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "right-hand side length mismatch");
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: Complex64 = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(a, b)| a * b)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// Singular values of a (typically tall) complex matrix, descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let m = nalgebra::DMatrix::<Complex64>::from_row_slice(a.rows, a.cols, &a.data);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_system_with_pivoting() {
        // Zero in the leading position forces a row swap.
        let a = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => c(0.0, 0.0),
            (0, 1) => c(2.0, 1.0),
            (0, 2) => c(1.0, 0.0),
            (1, 0) => c(1.0, -1.0),
            (1, 1) => c(0.5, 0.0),
            (1, 2) => c(0.0, 3.0),
            (2, 0) => c(4.0, 0.0),
            (2, 1) => c(-1.0, 2.0),
            _ => c(1.0, 1.0),
        });
        let x_true = vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
        let b = a.matvec(&x_true);
        let lu = LuFactorization::factor(&a).unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        assert!(matches!(
            LuFactorization::factor(&a),
            Err(Error::Solver { .. })
        ));
    }

    #[test]
    fn random_dense_residual() {
        let mut state = 0x1234_5678_9abc_def0_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 60;
        let a = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let b: Vec<Complex64> = (0..n).map(|_| c(next(), next())).collect();
        let x = LuFactorization::factor(&a).unwrap().solve(&b);
        let r: Vec<Complex64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-11 * norm2(&b));
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = ComplexMatrix::from_fn(4, 2, |i, j| {
            if i == j {
                c(0.0, (j + 1) as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        let sv = singular_values(&a);
        assert!((sv[0] - 2.0).abs() < 1e-14);
        assert!((sv[1] - 1.0).abs() < 1e-14);
    }
}
