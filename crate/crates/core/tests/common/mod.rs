#![allow(dead_code)]

use khessian_core::pde::{hessian_of, sk_of_matrix, GridShape, Rhs, RhsJet, RhsSpec, ScalarGrid, SmallMat};
use khessian_core::seeds::SeedQuadratic;

/// `f` tabulated on the grid so that the discrete `G(w*)` vanishes exactly:
/// the value at grid point `x` is `S_k(diag(tau) + eps' D_h^2 w*(x))`.
pub struct GridMatchedRhs {
    pub shape: GridShape,
    pub eps2: f64,
    pub table: Vec<f64>,
}

impl GridMatchedRhs {
    pub fn new(seed: &SeedQuadratic, target: &ScalarGrid) -> Self {
        let d = hessian_of(target);
        let table = d
            .hess
            .iter()
            .map(|h| {
                let mut r = SmallMat::zeros(seed.n);
                for i in 0..seed.n {
                    for j in 0..seed.n {
                        r.a[i][j] = seed.eps_prime * h.a[i][j];
                    }
                    r.a[i][i] += seed.tau[i];
                }
                sk_of_matrix(&r, seed.k).unwrap()
            })
            .collect();
        GridMatchedRhs { shape: target.shape, eps2: seed.eps * seed.eps, table }
    }
}

impl Rhs for GridMatchedRhs {
    fn jet(&self, y: &[f64], _u: f64, _p: &[f64]) -> RhsJet {
        let h = self.shape.h();
        let idx: Vec<usize> = y.iter().map(|v| ((v / self.eps2 + 1.0) / h).round() as usize).collect();
        RhsJet { value: self.table[self.shape.flatten(&idx)], ..Default::default() }
    }

    fn box_bound(&self) -> Option<f64> {
        None
    }
}

/// `f = y1 + y2` in three dimensions.
pub fn linear_rhs() -> RhsSpec {
    serde_json::from_str(r#"{"n":3,"terms":[{"coef":1.0,"y":[1,0,0]},{"coef":1.0,"y":[0,1,0]}]}"#).unwrap()
}

/// A right-hand side with `u`- and `p`-dependence and a nonzero value at the origin.
pub fn coupled_rhs(c: f64) -> RhsSpec {
    serde_json::from_str(&format!(
        r#"{{"n":3,"terms":[{{"coef":{c}}},{{"coef":1.0,"y":[1,0,0]}},{{"coef":0.5,"u":1}},{{"coef":0.3,"p":[1,1,0]}},{{"coef":-0.2,"p":[2,0,0]}}]}}"#
    ))
    .unwrap()
}

pub fn bump(shape: GridShape, amplitude: f64) -> ScalarGrid {
    ScalarGrid::from_fn(shape, |x| {
        amplitude * x.iter().map(|v| (std::f64::consts::FRAC_PI_2 * v).cos()).product::<f64>()
    })
    .with_zero_boundary()
}

pub fn max_diff(a: &ScalarGrid, b: &ScalarGrid) -> f64 {
    a.values.iter().zip(&b.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}
