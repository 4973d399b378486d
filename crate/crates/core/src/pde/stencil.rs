//! Second-order finite differences: centered in the interior, one-sided on the
//! faces of the cube.

use super::grid::{GridShape, ScalarGrid};
use super::minors::SmallMat;

/// Gradient and Hessian of a grid function at every point.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub shape: GridShape,
    pub grad: Vec<[f64; 4]>,
    pub hess: Vec<SmallMat>,
}

#[derive(Clone, Copy)]
struct Weights {
    len: usize,
    off: [isize; 4],
    w: [f64; 4],
}

fn first_weights(i: usize, m: usize, h: f64) -> Weights {
    let s = 1.0 / (2.0 * h);
    if i == 0 {
        Weights { len: 3, off: [0, 1, 2, 0], w: [-3.0 * s, 4.0 * s, -s, 0.0] }
    } else if i == m - 1 {
        Weights { len: 3, off: [0, -1, -2, 0], w: [3.0 * s, -4.0 * s, s, 0.0] }
    } else {
        Weights { len: 2, off: [-1, 1, 0, 0], w: [-s, s, 0.0, 0.0] }
    }
}

fn second_weights(i: usize, m: usize, h: f64) -> Weights {
    let s = 1.0 / (h * h);
    if i == 0 || i == m - 1 {
        let dir = if i == 0 { 1 } else { -1 };
        Weights {
            len: 4,
            off: [0, dir, 2 * dir, 3 * dir],
            w: [2.0 * s, -5.0 * s, 4.0 * s, -s],
        }
    } else {
        Weights { len: 3, off: [-1, 0, 1, 0], w: [s, -2.0 * s, s, 0.0] }
    }
}

/// Gradient and Hessian of `values` at flat index `p`.
pub(crate) fn point_derivatives(shape: &GridShape, values: &[f64], p: usize) -> ([f64; 4], SmallMat) {
    let n = shape.n;
    let (m, h) = (shape.m, shape.h());
    let mut idx = [0usize; 4];
    shape.unflatten(p, &mut idx[..n]);
    let strides: [isize; 4] = std::array::from_fn(|d| if d < n { shape.stride(d) as isize } else { 0 });
    let at = |delta: isize| values[(p as isize + delta) as usize];

    let firsts: [Weights; 4] = std::array::from_fn(|d| {
        if d < n {
            first_weights(idx[d], m, h)
        } else {
            Weights { len: 0, off: [0; 4], w: [0.0; 4] }
        }
    });
    let mut grad = [0.0; 4];
    let mut hess = SmallMat::zeros(n);
    for d in 0..n {
        let fw = &firsts[d];
        grad[d] = (0..fw.len).map(|t| fw.w[t] * at(fw.off[t] * strides[d])).sum();
        let sw = second_weights(idx[d], m, h);
        hess.a[d][d] = (0..sw.len).map(|t| sw.w[t] * at(sw.off[t] * strides[d])).sum();
    }
    for i in 0..n {
        for j in i + 1..n {
            let (wi, wj) = (&firsts[i], &firsts[j]);
            let mut v = 0.0;
            for a in 0..wi.len {
                for b in 0..wj.len {
                    v += wi.w[a] * wj.w[b] * at(wi.off[a] * strides[i] + wj.off[b] * strides[j]);
                }
            }
            hess.a[i][j] = v;
            hess.a[j][i] = v;
        }
    }
    (grad, hess)
}

/// Discrete gradient and Hessian of `w` at every grid point.
///
/// Mixed second differences use the symmetric four-point cross stencil, so
/// the Hessian is symmetric by construction.
pub fn hessian_of(w: &ScalarGrid) -> Derivatives {
    let shape = w.shape;
    let (grad, hess) = (0..shape.len())
        .map(|p| point_derivatives(&shape, &w.values, p))
        .unzip();
    Derivatives { shape, grad, hess }
}
