//! `S_k(r)`, the sum of the principal `k x k` minors of a small matrix, and its
//! entrywise derivative.

use crate::error::{domain, Result};

/// Dense `n x n` matrix with `n <= 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMat {
    pub n: usize,
    pub a: [[f64; 4]; 4],
}

impl SmallMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= 4, "SmallMat holds at most 4 x 4");
        SmallMat { n, a: [[0.0; 4]; 4] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.a[i][i] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, row) in rows.iter().enumerate() {
            m.a[i][..row.len()].copy_from_slice(row);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                best = best.max(self.a[i][j].abs());
            }
        }
        best
    }
}

/// Determinant of the submatrix picked by `rows` and `cols` (equal lengths <= 4).
fn det_sub(a: &SmallMat, rows: &[usize], cols: &[usize]) -> f64 {
    let e = |i: usize, j: usize| a.a[rows[i]][cols[j]];
    match rows.len() {
        0 => 1.0,
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        len => {
            // Laplace expansion along the first row
            let mut total = 0.0;
            let mut sub_cols = [0usize; 4];
            for c in 0..len {
                let mut t = 0;
                for (cc, &col) in cols.iter().enumerate() {
                    if cc != c {
                        sub_cols[t] = col;
                        t += 1;
                    }
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * e(0, c) * det_sub(a, &rows[1..], &sub_cols[..len - 1]);
            }
            total
        }
    }
}

fn subset(mask: u32, n: usize, out: &mut [usize; 4]) -> usize {
    let mut len = 0;
    for i in 0..n {
        if mask & (1 << i) != 0 {
            out[len] = i;
            len += 1;
        }
    }
    len
}

fn check(r: &SmallMat, k: usize) -> Result<()> {
    if k == 0 || k > r.n {
        return domain(format!("k = {k} outside 1..={}", r.n));
    }
    Ok(())
}

/// Sum over all `k`-subsets `S` of `det(r[S, S])`.
pub fn sk_of_matrix(r: &SmallMat, k: usize) -> Result<f64> {
    check(r, k)?;
    let mut idx = [0usize; 4];
    let mut total = 0.0;
    for mask in 0u32..(1 << r.n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let len = subset(mask, r.n, &mut idx);
        total += det_sub(r, &idx[..len], &idx[..len]);
    }
    Ok(total)
}

/// `dS_k / dr_ij`, each entry treated as an independent variable.
///
/// Entry `(i, j)` collects the `(i, j)` cofactor of every principal `k`-minor
/// whose index set contains both `i` and `j`.
pub fn sk_gradient(r: &SmallMat, k: usize) -> Result<SmallMat> {
    check(r, k)?;
    let n = r.n;
    let mut grad = SmallMat::zeros(n);
    let mut idx = [0usize; 4];
    let mut rows = [0usize; 4];
    let mut cols = [0usize; 4];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let len = subset(mask, n, &mut idx);
        for pi in 0..len {
            let mut t = 0;
            for (q, &v) in idx[..len].iter().enumerate() {
                if q != pi {
                    rows[t] = v;
                    t += 1;
                }
            }
            for pj in 0..len {
                let mut t = 0;
                for (q, &v) in idx[..len].iter().enumerate() {
                    if q != pj {
                        cols[t] = v;
                        t += 1;
                    }
                }
                let sign = if (pi + pj) % 2 == 0 { 1.0 } else { -1.0 };
                grad.a[idx[pi]][idx[pj]] += sign * det_sub(r, &rows[..len - 1], &cols[..len - 1]);
            }
        }
    }
    Ok(grad)
}
