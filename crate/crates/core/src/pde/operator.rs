//! The rescaled residual `G(w)` and its linearization on interior points.

use serde::{Deserialize, Serialize};

use super::grid::{GridShape, ScalarGrid};
use super::linsolve::{solve_dirichlet, CsrMatrix, DirichletSolution};
use super::minors::{sk_gradient, sk_of_matrix, SmallMat};
use super::rhs::{Rhs, RhsJet};
use super::stencil::point_derivatives;
use crate::error::{domain, Error, Result};
use crate::seeds::SeedQuadratic;

/// `r = diag(tau) + eps' D^2 w` at every interior point, in
/// `shape.interior()` order.
#[derive(Debug, Clone)]
pub struct HessianField {
    pub shape: GridShape,
    pub r: Vec<SmallMat>,
}

impl HessianField {
    pub fn of(w: &ScalarGrid, seed: &SeedQuadratic) -> Self {
        let shape = w.shape;
        let r = shape
            .interior()
            .into_iter()
            .map(|p| r_matrix(seed, &point_derivatives(&shape, &w.values, p).1))
            .collect();
        HessianField { shape, r }
    }
}

fn r_matrix(seed: &SeedQuadratic, hess: &SmallMat) -> SmallMat {
    let mut r = SmallMat::zeros(seed.n);
    for i in 0..seed.n {
        for j in 0..seed.n {
            r.a[i][j] = seed.eps_prime * hess.a[i][j];
        }
        r.a[i][i] += seed.tau[i];
    }
    r
}

/// Everything `f~` needs at one interior point.
struct Local {
    r: SmallMat,
    sk: f64,
    jet: RhsJet,
}

fn check_shape(w: &ScalarGrid, seed: &SeedQuadratic) -> Result<()> {
    if w.shape.n != seed.n {
        return domain(format!("grid dimension {} does not match seed dimension {}", w.shape.n, seed.n));
    }
    if !w.respects_mask() {
        return domain("w must vanish on the boundary");
    }
    Ok(())
}

fn local(w: &ScalarGrid, p: usize, seed: &SeedQuadratic, f: &dyn Rhs) -> Result<Local> {
    let shape = &w.shape;
    let n = seed.n;
    let (grad, hess) = point_derivatives(shape, &w.values, p);
    let x = shape.point(p);
    let (e2, ep) = (seed.eps * seed.eps, seed.eps_prime);
    let e4 = e2 * e2;
    let psi: f64 = 0.5 * (0..n).map(|i| seed.tau[i] * x[i] * x[i]).sum::<f64>();
    let y: Vec<f64> = x.iter().map(|v| e2 * v).collect();
    let u = e4 * psi + ep * e4 * w.values[p];
    let pv: Vec<f64> = (0..n).map(|i| e2 * seed.tau[i] * x[i] + ep * e2 * grad[i]).collect();
    if let Some(a) = f.box_bound() {
        let worst = pv.iter().fold(u.abs(), |m, v| m.max(v.abs()));
        if worst > a || y.iter().any(|v| v.abs() > 1.0) {
            return domain(format!(
                "f evaluated outside its box at x = {x:?}: max(|u|, |p|) = {worst:e} > {a}"
            ));
        }
    }
    let r = r_matrix(seed, &hess);
    let sk = sk_of_matrix(&r, seed.k)?;
    Ok(Local { r, sk, jet: f.jet(&y, u, &pv) })
}

/// `G(w) = (S_k(r(w)) - f~(x, w, Dw)) / eps'` on interior points, zero on the
/// boundary.
pub fn eval_g(w: &ScalarGrid, seed: &SeedQuadratic, f: &dyn Rhs) -> Result<ScalarGrid> {
    check_shape(w, seed)?;
    let mut g = ScalarGrid::zeros(w.shape);
    for p in w.shape.interior() {
        let l = local(w, p, seed, f)?;
        g.values[p] = (l.sk - l.jet.value) / seed.eps_prime;
    }
    Ok(g)
}

/// Largest `|S_k(r)| + |f~|` over interior points: the size of the two terms
/// whose difference forms `eps' G`.
pub fn ftilde_scale(w: &ScalarGrid, seed: &SeedQuadratic, f: &dyn Rhs) -> Result<f64> {
    check_shape(w, seed)?;
    let mut scale: f64 = 0.0;
    for p in w.shape.interior() {
        let l = local(w, p, seed, f)?;
        scale = scale.max(l.sk.abs() + l.jet.value.abs());
    }
    Ok(scale)
}

/// Rounding-level uncertainty of [`eval_g`] at `w`: the sup over interior
/// points of what double precision can resolve in `(S_k(r) - f~) / eps'`.
pub fn evaluation_error(w: &ScalarGrid, seed: &SeedQuadratic, f: &dyn Rhs) -> Result<f64> {
    check_shape(w, seed)?;
    let h = w.shape.h();
    let w_max = w.sup_norm();
    let mut err: f64 = 0.0;
    for p in w.shape.interior() {
        let l = local(w, p, seed, f)?;
        let s = sk_gradient(&l.r, seed.k)?;
        let s_abs: f64 = (0..seed.n).flat_map(|i| (0..seed.n).map(move |j| (i, j))).map(|(i, j)| s.a[i][j].abs()).sum();
        let terms = (seed.k as f64 * l.sk.abs() + l.jet.value.abs()) / seed.eps_prime;
        err = err.max(f64::EPSILON * (terms + s_abs * 4.0 * w_max / (h * h)));
    }
    Ok(err)
}

/// The discrete linearized operator `L_G(w)` on interior unknowns together
/// with its coefficients and ellipticity diagnostics.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub shape: GridShape,
    /// Flat grid index of each unknown.
    pub interior: Vec<usize>,
    pub matrix: CsrMatrix,
    /// `-G(w)` at the unknowns.
    pub rhs: Vec<f64>,
    /// `S_k^{ij}(r(w))` per unknown.
    pub second: Vec<SmallMat>,
    /// `a_i = -eps^2 df/dp_i` per unknown.
    pub first: Vec<[f64; 4]>,
    /// `a = -eps^4 df/du` per unknown.
    pub zeroth: Vec<f64>,
    /// `min_i (S^ii - sum_{j != i} |S^ij| - threshold_i)` per unknown.
    pub margin_excess: Vec<f64>,
    /// Smallest dominance margin `S^ii - sum_{j != i} |S^ij|` over all rows
    /// and unknowns.
    pub min_margin: f64,
    /// `1/2 sigma_{k-1;i}(tau)` per coordinate.
    pub thresholds: Vec<f64>,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn min_margin_excess(&self) -> f64 {
        self.margin_excess.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `1/2 min_i sigma_{k-1;i}(tau)`.
    pub fn min_threshold(&self) -> f64 {
        self.thresholds.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Replaces the right-hand side by the interior values of `g`.
    pub fn with_rhs(mut self, g: &ScalarGrid) -> Self {
        self.rhs = self.interior.iter().map(|&p| g.values[p]).collect();
        self
    }

    /// Applies the operator to a grid function vanishing on the boundary.
    pub fn apply(&self, rho: &ScalarGrid) -> ScalarGrid {
        let x = self.gather(rho);
        self.scatter(&self.matrix.mul(&x))
    }

    pub fn gather(&self, grid: &ScalarGrid) -> Vec<f64> {
        self.interior.iter().map(|&p| grid.values[p]).collect()
    }

    pub fn scatter(&self, values: &[f64]) -> ScalarGrid {
        let mut g = ScalarGrid::zeros(self.shape);
        for (&p, &v) in self.interior.iter().zip(values) {
            g.values[p] = v;
        }
        g
    }

    /// Solves `L rho = rhs`, `rho = 0` on the boundary.
    pub fn solve(&self, tol_lin: f64) -> Result<(ScalarGrid, DirichletSolution)> {
        let sol = solve_dirichlet(&self.matrix, &self.rhs, tol_lin)?;
        Ok((self.scatter(&sol.rho), sol))
    }
}

/// Assembles the exact Jacobian of the discrete [`eval_g`] at `w`.
///
/// Diagonal second derivatives use the 3-point stencil, mixed ones the
/// 4-point cross stencil with weight `2 S^ij / (4 h^2)`, first derivatives
/// centered differences. Boundary columns are dropped. Fails with
/// [`Error::Ellipticity`] at the first unknown whose dominance margin is not
/// positive.
pub fn assemble_linearized(w: &ScalarGrid, seed: &SeedQuadratic, f: &dyn Rhs) -> Result<LinearSystem> {
    check_shape(w, seed)?;
    let shape = w.shape;
    let n = seed.n;
    let h = shape.h();
    let (h2, e2) = (h * h, seed.eps * seed.eps);
    let interior = shape.interior();
    let mut unknown = vec![usize::MAX; shape.len()];
    for (q, &p) in interior.iter().enumerate() {
        unknown[p] = q;
    }
    let strides: Vec<isize> = (0..n).map(|d| shape.stride(d) as isize).collect();
    let thresholds: Vec<f64> = seed.row().iter().map(|v| 0.5 * v).collect();

    let mut rows = Vec::with_capacity(interior.len());
    let mut rhs = Vec::with_capacity(interior.len());
    let mut second = Vec::with_capacity(interior.len());
    let mut first = Vec::with_capacity(interior.len());
    let mut zeroth = Vec::with_capacity(interior.len());
    let mut margin_excess = Vec::with_capacity(interior.len());
    let mut min_margin = f64::INFINITY;

    for &p in &interior {
        let l = local(w, p, seed, f)?;
        let s = sk_gradient(&l.r, seed.k)?;
        let mut excess = f64::INFINITY;
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| s.a[i][j].abs()).sum();
            let margin = s.a[i][i] - off;
            if margin <= 0.0 {
                return Err(Error::Ellipticity { point: shape.point(p), margin });
            }
            min_margin = min_margin.min(margin);
            excess = excess.min(margin - thresholds[i]);
        }
        let a1: [f64; 4] = std::array::from_fn(|i| if i < n { -e2 * l.jet.dp[i] } else { 0.0 });
        let a0 = -e2 * e2 * l.jet.du;

        let mut row: Vec<(usize, f64)> = Vec::with_capacity(3usize.pow(n as u32));
        let mut push = |delta: isize, v: f64| {
            let q = unknown[(p as isize + delta) as usize];
            if q != usize::MAX {
                row.push((q, v));
            }
        };
        let mut center = a0;
        for d in 0..n {
            let c = s.a[d][d] / h2;
            push(strides[d], c + a1[d] / (2.0 * h));
            push(-strides[d], c - a1[d] / (2.0 * h));
            center -= 2.0 * c;
            for e in d + 1..n {
                let c = 2.0 * s.a[d][e] / (4.0 * h2);
                push(strides[d] + strides[e], c);
                push(-strides[d] - strides[e], c);
                push(strides[d] - strides[e], -c);
                push(-strides[d] + strides[e], -c);
            }
        }
        push(0, center);
        rows.push(row);
        rhs.push(-(l.sk - l.jet.value) / seed.eps_prime);
        second.push(s);
        first.push(a1);
        zeroth.push(a0);
        margin_excess.push(excess);
    }

    Ok(LinearSystem {
        shape,
        interior,
        matrix: CsrMatrix::from_rows(rows),
        rhs,
        second,
        first,
        zeroth,
        margin_excess,
        min_margin,
        thresholds,
    })
}

/// Serializable summary of a [`LinearSystem`]'s ellipticity diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    pub min_margin: f64,
    pub min_threshold: f64,
    pub min_excess: f64,
}

impl From<&LinearSystem> for MarginSummary {
    fn from(sys: &LinearSystem) -> Self {
        MarginSummary {
            min_margin: sys.min_margin,
            min_threshold: sys.min_threshold(),
            min_excess: sys.min_margin_excess(),
        }
    }
}
