//! Discrete surrogates for Hölder norms on the grid.

use super::grid::{GridShape, ScalarGrid};
use super::stencil::hessian_of;

/// Pairs entering the Hölder quotient are at most this many grid spacings
/// apart (Euclidean).
pub const HOLDER_RADIUS: usize = 8;

/// Offsets of one half of the discrete ball of radius [`HOLDER_RADIUS`].
fn half_ball(n: usize) -> Vec<[isize; 4]> {
    let r = HOLDER_RADIUS as isize;
    let mut out = Vec::new();
    let mut o = [0isize; 4];
    let side = (2 * r + 1) as usize;
    for code in 0..side.pow(n as u32) {
        let mut c = code;
        for d in (0..n).rev() {
            o[d] = (c % side) as isize - r;
            c /= side;
        }
        let first_nonzero = o[..n].iter().find(|&&v| v != 0);
        let norm2: isize = o[..n].iter().map(|v| v * v).sum();
        if matches!(first_nonzero, Some(&v) if v > 0) && norm2 <= r * r {
            out.push(o);
        }
    }
    out
}

/// Largest `|v(p) - v(q)| / |x_p - x_q|^alpha` over each field, for pairs
/// within [`HOLDER_RADIUS`] spacings.
fn holder_many(shape: &GridShape, fields: &[&[f64]], alpha: f64) -> f64 {
    let n = shape.n;
    let m = shape.m as isize;
    let h = shape.h();
    let idx: Vec<[isize; 4]> = (0..shape.len())
        .map(|p| {
            let mut t = [0usize; 4];
            shape.unflatten(p, &mut t[..n]);
            std::array::from_fn(|d| t[d] as isize)
        })
        .collect();
    let strides: Vec<isize> = (0..n).map(|d| shape.stride(d) as isize).collect();
    let mut best: f64 = 0.0;
    for o in half_ball(n) {
        let dist = h * (o[..n].iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
        let inv = dist.powf(-alpha);
        let delta: isize = (0..n).map(|d| o[d] * strides[d]).sum();
        for (p, t) in idx.iter().enumerate() {
            if (0..n).any(|d| t[d] + o[d] < 0 || t[d] + o[d] >= m) {
                continue;
            }
            let q = (p as isize + delta) as usize;
            for field in fields {
                best = best.max((field[p] - field[q]).abs() * inv);
            }
        }
    }
    best
}

/// Discrete Hölder seminorm `[v]_alpha`.
pub fn holder_seminorm(v: &ScalarGrid, alpha: f64) -> f64 {
    holder_many(&v.shape, &[&v.values], alpha)
}

/// `sup |v| + [v]_alpha`.
pub fn calpha_surrogate(v: &ScalarGrid, alpha: f64) -> f64 {
    v.sup_norm() + holder_seminorm(v, alpha)
}

/// `sup |w| + sup |Dw| + sup |D^2 w| + [D^2 w]_alpha`, derivatives by the
/// finite differences of [`hessian_of`], sups over components.
pub fn c2alpha_surrogate(w: &ScalarGrid, alpha: f64) -> f64 {
    let n = w.shape.n;
    let d = hessian_of(w);
    let grad = d.grad.iter().flat_map(|g| g[..n].iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    let hess = d.hess.iter().fold(0.0f64, |a, h| a.max(h.max_abs()));
    let comps: Vec<Vec<f64>> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| d.hess.iter().map(|h| h.a[i][j]).collect())
        .collect();
    let refs: Vec<&[f64]> = comps.iter().map(|c| c.as_slice()).collect();
    w.sup_norm() + grad + hess + holder_many(&w.shape, &refs, alpha)
}
