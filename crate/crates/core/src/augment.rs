//! Exact rotation and reflection of rasters and index tensors.
//!
//! Every transform here is an index permutation: pixel centers map onto
//! pixel centers, so no interpolation is ever performed. Rasters are
//! flat `n x n` arrays indexed `[i * n + j]` with `i` along x and `j` along
//! y (upward). A transform `T` acts on functions by `(T f)(x) = f(T^{-1} x)`.

use serde::{Deserialize, Serialize};

use crate::dsm::IndexTensor;
use crate::error::{Error, Result};
use crate::scene::ContrastGrid;

fn check_square<T>(g: &[T], n: usize) -> Result<()> {
    if g.len() != n * n {
        return Err(Error::Shape(format!(
            "raster of side {n} needs {} values, got {}",
            n * n,
            g.len()
        )));
    }
    Ok(())
}

fn permute<T: Copy>(
    g: &[T],
    n: usize,
    src: impl Fn(usize, usize) -> (usize, usize),
) -> Result<Vec<T>> {
    check_square(g, n)?;
    let mut out = Vec::with_capacity(g.len());
    for i in 0..n {
        for j in 0..n {
            let (si, sj) = src(i, j);
            out.push(g[si * n + sj]);
        }
    }
    Ok(out)
}

/// Rotation by pi about the raster center.
pub fn rotate_pi_grid<T: Copy>(g: &[T], n: usize) -> Result<Vec<T>> {
    permute(g, n, |i, j| (n - 1 - i, n - 1 - j))
}

/// Reflection about the x-axis, the symmetry line of incidence `(1, 0)`.
pub fn mirror_d1_grid<T: Copy>(g: &[T], n: usize) -> Result<Vec<T>> {
    permute(g, n, |i, j| (i, n - 1 - j))
}

/// Counter-clockwise rotation by `q` quarter turns.
pub fn rotate_quarter_turns<T: Copy>(g: &[T], n: usize, q: i64) -> Result<Vec<T>> {
    match q.rem_euclid(4) {
        0 => permute(g, n, |i, j| (i, j)),
        1 => permute(g, n, |i, j| (j, n - 1 - i)),
        2 => rotate_pi_grid(g, n),
        _ => permute(g, n, |i, j| (n - 1 - j, i)),
    }
}

/// Quarter turns realizing a rotation by `2 pi j / n_inc`, if any.
pub fn quarter_turns_for(j: i64, n_inc: usize) -> Result<i64> {
    if n_inc == 0 {
        return Err(Error::InvalidArgument("tensor has no channels".into()));
    }
    let j = j.rem_euclid(n_inc as i64);
    if (4 * j) % n_inc as i64 != 0 {
        return Err(Error::InvalidArgument(format!(
            "rotation by 2 pi * {j} / {n_inc} is not a multiple of 90 degrees"
        )));
    }
    Ok(4 * j / n_inc as i64)
}

/// Rotates the medium by `phi_j = 2 pi j / N_i` and rebuilds the index
/// tensor without a forward solve: channel `i` of the result is the old
/// channel `i - j` (mod `N_i`) rotated by `phi_j`.
pub fn augment_pair_rotation(
    grid: &ContrastGrid,
    tensor: &IndexTensor,
    j: i64,
) -> Result<(ContrastGrid, IndexTensor)> {
    let n = grid.n();
    if tensor.n != n {
        return Err(Error::Shape(format!(
            "grid side {n} does not match tensor side {}",
            tensor.n
        )));
    }
    let n_inc = tensor.n_inc;
    let q = quarter_turns_for(j, n_inc)?;
    let shift = j.rem_euclid(n_inc as i64) as usize;
    let new_grid = ContrastGrid::from_eps(n, rotate_quarter_turns(grid.eps(), n, q)?)?;
    let mut data = Vec::with_capacity(tensor.data.len());
    for i in 0..n_inc {
        let src = (i + n_inc - shift) % n_inc;
        data.extend(rotate_quarter_turns(tensor.channel(src), n, q)?);
    }
    let mut new_tensor = IndexTensor::new(n_inc, n, data)?;
    new_tensor.scale_c = tensor.scale_c;
    Ok((new_grid, new_tensor))
}

/// Reflects a single-incidence sample (incidence `(1, 0)`) about the x-axis.
pub fn augment_pair_mirror(
    grid: &ContrastGrid,
    tensor: &IndexTensor,
) -> Result<(ContrastGrid, IndexTensor)> {
    if tensor.n_inc != 1 {
        return Err(Error::InvalidArgument(format!(
            "mirror augmentation needs a single incidence, tensor has {}",
            tensor.n_inc
        )));
    }
    let n = grid.n();
    if tensor.n != n {
        return Err(Error::Shape(format!(
            "grid side {n} does not match tensor side {}",
            tensor.n
        )));
    }
    let new_grid = ContrastGrid::from_eps(n, mirror_d1_grid(grid.eps(), n)?)?;
    let mut new_tensor = IndexTensor::new(1, n, mirror_d1_grid(&tensor.data, n)?)?;
    new_tensor.scale_c = tensor.scale_c;
    Ok((new_grid, new_tensor))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentOp {
    /// Rotation by pi (`j = N_i / 2`).
    RotatePi,
    /// Reflection about the incidence direction `(1, 0)`; `N_i = 1` only.
    MirrorD1,
    /// Rotation by `2 pi j / N_i`.
    Rotate { j: i64 },
}

impl AugmentOp {
    pub fn apply(
        &self,
        grid: &ContrastGrid,
        tensor: &IndexTensor,
    ) -> Result<(ContrastGrid, IndexTensor)> {
        match *self {
            AugmentOp::RotatePi => {
                if !tensor.n_inc.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!(
                        "rotation by pi needs an even number of incidences, got {}",
                        tensor.n_inc
                    )));
                }
                augment_pair_rotation(grid, tensor, tensor.n_inc as i64 / 2)
            }
            AugmentOp::MirrorD1 => augment_pair_mirror(grid, tensor),
            AugmentOp::Rotate { j } => augment_pair_rotation(grid, tensor, j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Vec<u32> {
        (0..(n * n) as u32).collect()
    }

    #[test]
    fn rotate_pi_moves_delta() {
        let n = 64;
        let mut g = vec![0.0; n * n];
        g[3 * n + 5] = 1.0;
        let r = rotate_pi_grid(&g, n).unwrap();
        assert_eq!(r[60 * n + 58], 1.0);
        assert_eq!(r.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn involutions_and_constants() {
        for n in [1, 4, 7] {
            let g = ramp(n);
            assert_eq!(
                rotate_pi_grid(&rotate_pi_grid(&g, n).unwrap(), n).unwrap(),
                g
            );
            assert_eq!(
                mirror_d1_grid(&mirror_d1_grid(&g, n).unwrap(), n).unwrap(),
                g
            );
            let c = vec![2.5; n * n];
            assert_eq!(rotate_pi_grid(&c, n).unwrap(), c);
            assert_eq!(rotate_quarter_turns(&c, n, 1).unwrap(), c);
        }
        assert!(rotate_pi_grid(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn mirror_then_rotate_pi_is_y_axis_reflection() {
        let n = 5;
        let g = ramp(n);
        let composed = mirror_d1_grid(&rotate_pi_grid(&g, n).unwrap(), n).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(composed[i * n + j], g[(n - 1 - i) * n + j]);
            }
        }
    }

    #[test]
    fn quarter_turns_compose() {
        let n = 6;
        let g = ramp(n);
        let once = rotate_quarter_turns(&g, n, 1).unwrap();
        let twice = rotate_quarter_turns(&once, n, 1).unwrap();
        assert_eq!(twice, rotate_pi_grid(&g, n).unwrap());
        assert_eq!(
            rotate_quarter_turns(&g, n, -1).unwrap(),
            rotate_quarter_turns(&g, n, 3).unwrap()
        );
        let four = (0..4).fold(g.clone(), |acc, _| {
            rotate_quarter_turns(&acc, n, 1).unwrap()
        });
        assert_eq!(four, g);
    }

    #[test]
    fn quarter_turn_is_counter_clockwise() {
        // a pixel on the positive x-axis moves to the positive y-axis
        let n = 5;
        let grid = ContrastGrid::background(n);
        let mut g = vec![0u8; n * n];
        g[4 * n + 2] = 1;
        let r = rotate_quarter_turns(&g, n, 1).unwrap();
        let hit = r.iter().position(|v| *v == 1).unwrap();
        let p = grid.center_of(hit);
        assert!(p.x.abs() < 1e-12 && p.y > 0.5);
    }

    fn tensor_of(n_inc: usize, n: usize) -> IndexTensor {
        IndexTensor::new(n_inc, n, (0..n_inc * n * n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn channel_permutation_for_half_turn() {
        let n = 4;
        let grid = ContrastGrid::background(n);
        let t = tensor_of(4, n);
        let (_, out) = augment_pair_rotation(&grid, &t, 2).unwrap();
        for (i, src) in [2, 3, 0, 1].into_iter().enumerate() {
            assert_eq!(
                out.channel(i),
                rotate_pi_grid(t.channel(src), n).unwrap().as_slice()
            );
        }
        let (g0, t0) = augment_pair_rotation(&grid, &t, 0).unwrap();
        assert_eq!(t0, t);
        assert_eq!(g0, grid);
    }

    #[test]
    fn rotations_compose_modulo_channels() {
        let n = 4;
        let mut grid = ContrastGrid::background(n);
        grid.set(0, 1, 2.0);
        let t = tensor_of(8, n);
        for (j1, j2) in [(2, 4), (6, 6), (4, -2)] {
            let (g1, t1) = augment_pair_rotation(&grid, &t, j1).unwrap();
            let (g12, t12) = augment_pair_rotation(&g1, &t1, j2).unwrap();
            let (g, tt) = augment_pair_rotation(&grid, &t, j1 + j2).unwrap();
            assert_eq!(g12, g);
            assert_eq!(t12, tt);
        }
    }

    #[test]
    fn inexact_rotation_rejected() {
        let grid = ContrastGrid::background(4);
        assert!(augment_pair_rotation(&grid, &tensor_of(8, 4), 1).is_err());
        assert!(augment_pair_rotation(&grid, &tensor_of(3, 4), 1).is_err());
        assert!(augment_pair_rotation(&grid, &tensor_of(16, 4), 4).is_ok());
        assert!(augment_pair_rotation(&grid, &tensor_of(4, 5), 1).is_err());
    }

    #[test]
    fn mirror_pair() {
        let n = 4;
        let mut grid = ContrastGrid::background(n);
        grid.set(1, 2, 3.0);
        let t = tensor_of(1, n);
        let (g1, t1) = augment_pair_mirror(&grid, &t).unwrap();
        assert_eq!(g1.get(1, 1), 3.0);
        let (g2, t2) = augment_pair_mirror(&g1, &t1).unwrap();
        assert_eq!((g2, t2), (grid.clone(), t.clone()));

        let sym = ContrastGrid::from_eps(n, vec![1.5; n * n]).unwrap();
        let flat = IndexTensor::new(1, n, vec![0.25; n * n]).unwrap();
        assert_eq!(augment_pair_mirror(&sym, &flat).unwrap(), (sym, flat));
        assert!(augment_pair_mirror(&grid, &tensor_of(2, n)).is_err());
    }

    #[test]
    fn op_dispatch() {
        let grid = ContrastGrid::background(4);
        let t = tensor_of(4, 4);
        assert_eq!(
            AugmentOp::RotatePi.apply(&grid, &t).unwrap(),
            augment_pair_rotation(&grid, &t, 2).unwrap()
        );
        assert!(AugmentOp::RotatePi.apply(&grid, &tensor_of(1, 4)).is_err());
        assert!(AugmentOp::MirrorD1.apply(&grid, &t).is_err());
        assert_eq!(
            AugmentOp::Rotate { j: 1 }.apply(&grid, &t).unwrap(),
            augment_pair_rotation(&grid, &t, 1).unwrap()
        );
    }
}
