//! Right-hand sides built so that a chosen smooth function solves the
//! rescaled equation exactly.

use std::f64::consts::FRAC_PI_2;

use super::grid::{GridShape, ScalarGrid};
use super::minors::{sk_of_matrix, SmallMat};
use super::rhs::{Rhs, RhsJet};
use crate::seeds::SeedQuadratic;

/// `w*(x) = a prod_i cos(pi x_i / 2)`, zero on the boundary of the cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineBump {
    pub n: usize,
    pub amplitude: f64,
}

impl CosineBump {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * x[..self.n].iter().map(|v| (FRAC_PI_2 * v).cos()).product::<f64>()
    }

    /// Grid values, boundary exactly zero.
    pub fn grid(&self, shape: GridShape) -> ScalarGrid {
        ScalarGrid::from_fn(shape, |x| self.value(x)).with_zero_boundary()
    }

    pub fn grad(&self, x: &[f64]) -> [f64; 4] {
        let (c, s) = self.cos_sin(x);
        std::array::from_fn(|i| {
            if i >= self.n {
                return 0.0;
            }
            let rest: f64 = (0..self.n).filter(|&j| j != i).map(|j| c[j]).product();
            -self.amplitude * FRAC_PI_2 * s[i] * rest
        })
    }

    pub fn hess(&self, x: &[f64]) -> SmallMat {
        let (c, s) = self.cos_sin(x);
        let q = FRAC_PI_2 * FRAC_PI_2 * self.amplitude;
        let mut h = SmallMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let rest: f64 = (0..self.n).filter(|&t| t != i && t != j).map(|t| c[t]).product();
                h.a[i][j] = if i == j { -q * c[i] * rest } else { q * s[i] * s[j] * rest };
            }
        }
        h
    }

    fn cos_sin(&self, x: &[f64]) -> ([f64; 4], [f64; 4]) {
        let mut c = [1.0; 4];
        let mut s = [0.0; 4];
        for i in 0..self.n {
            c[i] = (FRAC_PI_2 * x[i]).cos();
            s[i] = (FRAC_PI_2 * x[i]).sin();
        }
        (c, s)
    }
}

/// `f(y, u, p) = S_k(diag(tau) + eps' D^2 w*(x)) + b (p_1 - P*_1(y)) + c (u - U*(y))`
/// with `x = y / eps^2`, `U*` and `P*` the value and gradient of the physical
/// solution built from `w*`.
///
/// The coupling constants `b`, `c` give the linearization nonzero first- and
/// zeroth-order terms without moving the exact solution.
#[derive(Debug, Clone)]
pub struct ManufacturedRhs {
    pub seed: SeedQuadratic,
    pub target: CosineBump,
    pub coupling_p: f64,
    pub coupling_u: f64,
}

impl ManufacturedRhs {
    pub fn new(seed: SeedQuadratic, amplitude: f64) -> Self {
        let n = seed.n;
        ManufacturedRhs {
            seed,
            target: CosineBump { n, amplitude },
            coupling_p: 0.0,
            coupling_u: 0.0,
        }
    }

    pub fn with_coupling(mut self, coupling_p: f64, coupling_u: f64) -> Self {
        self.coupling_p = coupling_p;
        self.coupling_u = coupling_u;
        self
    }
}

impl Rhs for ManufacturedRhs {
    fn jet(&self, y: &[f64], u: f64, p: &[f64]) -> RhsJet {
        let s = &self.seed;
        let e2 = s.eps * s.eps;
        let x: Vec<f64> = y.iter().map(|v| v / e2).collect();
        let mut r = self.target.hess(&x);
        for i in 0..s.n {
            for j in 0..s.n {
                r.a[i][j] *= s.eps_prime;
            }
            r.a[i][i] += s.tau[i];
        }
        let psi: f64 = 0.5 * (0..s.n).map(|i| s.tau[i] * x[i] * x[i]).sum::<f64>();
        let u_star = e2 * e2 * (psi + s.eps_prime * self.target.value(&x));
        let p1_star = e2 * (s.tau[0] * x[0] + s.eps_prime * self.target.grad(&x)[0]);
        let base = sk_of_matrix(&r, s.k).expect("k <= n for a valid seed");
        let mut dp = [0.0; 4];
        dp[0] = self.coupling_p;
        RhsJet {
            value: base + self.coupling_p * (p[0] - p1_star) + self.coupling_u * (u - u_star),
            du: self.coupling_u,
            dp,
        }
    }

    fn box_bound(&self) -> Option<f64> {
        None
    }
}
