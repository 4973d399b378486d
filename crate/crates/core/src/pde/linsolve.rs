//! Sparse storage and the linear Dirichlet solve: Jacobi-preconditioned
//! BiCGSTAB with a banded LU fallback for moderate sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest unknown count for which the direct fallback is attempted.
pub const DENSE_FALLBACK_LIMIT: usize = 20_000;

/// Iterations without a new best residual before the Krylov solve is
/// declared stagnant.
const STAGNATION_WINDOW: usize = 1_000;

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last = usize::MAX;
            for (c, v) in row {
                if c == last {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                    last = c;
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { nrows, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.nrows) {
            *o = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.matvec(x, &mut out);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.nrows]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(i) {
                row[c] = v;
            }
        }
        d
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..self.nrows {
            for (c, _) in self.row(i) {
                if c < i {
                    lower = lower.max(i - c);
                } else {
                    upper = upper.max(c - i);
                }
            }
        }
        (lower, upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Right-hand side was zero.
    Trivial,
    Bicgstab,
    BandedLu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolution {
    /// Values at the unknowns, in system order.
    pub rho: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `||A rho - b|| / ||b||`, recomputed from scratch.
    pub residual: f64,
    /// Relative recursive residual per Krylov iteration.
    pub history: Vec<f64>,
    pub method: SolveMethod,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| q - p).collect();
    norm(&r) / norm(b)
}

struct KrylovOutcome {
    x: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
}

fn bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> KrylovOutcome {
    let n = a.nrows;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precond = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = inv_diag[i] * v[i];
        }
    };
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut since_best = 0;

    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return KrylovOutcome { x, iterations: it - 1, history, converged: false };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut y);
        a.matvec(&y, &mut v);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 || !denom.is_finite() {
            return KrylovOutcome { x, iterations: it - 1, history, converged: false };
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            history.push(norm(&s) / bnorm);
            return KrylovOutcome { x, iterations: it, history, converged: true };
        }
        precond(&s, &mut z);
        a.matvec(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return KrylovOutcome { x, iterations: it, history, converged: false };
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            return KrylovOutcome { x, iterations: it, history, converged: true };
        }
        if omega == 0.0 || !rel.is_finite() {
            return KrylovOutcome { x, iterations: it, history, converged: false };
        }
        if rel < best {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION_WINDOW {
                return KrylovOutcome { x, iterations: it, history, converged: false };
            }
        }
    }
    KrylovOutcome { x, iterations: max_iter, history, converged: false }
}

/// LU with partial pivoting in band storage; fill stays within `2 kl + ku`.
pub(crate) fn banded_lu_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    let (kl, ku) = a.bandwidths();
    let width = 2 * kl + ku + 1;
    // Entry (i, j) lives at i * width + (j + kl - i).
    let at = |i: usize, j: usize| i * width + j + kl - i;
    let mut band = vec![0.0; n * width];
    for i in 0..n {
        for (c, v) in a.row(i) {
            band[at(i, c)] = v;
        }
    }
    let mut rhs = b.to_vec();
    for i in 0..n {
        let last_row = (i + kl).min(n - 1);
        let last_col = (i + kl + ku).min(n - 1);
        let (piv, pval) = (i..=last_row)
            .map(|r| (r, band[at(r, i)].abs()))
            .fold((i, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pval == 0.0 {
            return Err(Error::Solver {
                iterations: 0,
                residual: f64::NAN,
                history: vec![],
            });
        }
        if piv != i {
            for j in i..=last_col {
                band.swap(at(i, j), at(piv, j));
            }
            rhs.swap(i, piv);
        }
        let d = band[at(i, i)];
        for r in i + 1..=last_row {
            let factor = band[at(r, i)] / d;
            if factor == 0.0 {
                continue;
            }
            band[at(r, i)] = 0.0;
            for j in i + 1..=last_col {
                band[at(r, j)] -= factor * band[at(i, j)];
            }
            rhs[r] -= factor * rhs[i];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let last_col = (i + kl + ku).min(n - 1);
        let mut acc = rhs[i];
        for j in i + 1..=last_col {
            acc -= band[at(i, j)] * x[j];
        }
        x[i] = acc / band[at(i, i)];
    }
    Ok(x)
}

/// Solves `a x = b` to relative residual `tol`.
///
/// BiCGSTAB runs for at most `10 * unknowns` iterations. On breakdown,
/// stagnation or a true residual above `tol`, systems with at most
/// [`DENSE_FALLBACK_LIMIT`] unknowns are factored directly; larger ones fail
/// with the residual history.
pub fn solve_dirichlet(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<DirichletSolution> {
    let n = a.nrows;
    if b.iter().all(|&v| v == 0.0) {
        return Ok(DirichletSolution {
            rho: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            history: vec![],
            method: SolveMethod::Trivial,
        });
    }
    let out = bicgstab(a, b, tol, 10 * n);
    let residual = relative_residual(a, &out.x, b);
    if out.converged && residual <= tol {
        return Ok(DirichletSolution {
            rho: out.x,
            iterations: out.iterations,
            residual,
            history: out.history,
            method: SolveMethod::Bicgstab,
        });
    }
    if n <= DENSE_FALLBACK_LIMIT {
        let x = banded_lu_solve(a, b)?;
        let residual = relative_residual(a, &x, b);
        if residual <= tol {
            return Ok(DirichletSolution {
                rho: x,
                iterations: out.iterations,
                residual,
                history: out.history,
                method: SolveMethod::BandedLu,
            });
        }
    }
    Err(Error::Solver {
        iterations: out.iterations,
        residual,
        history: out.history,
    })
}
