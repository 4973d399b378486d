//! Fixtures shared by the benchmarks.

use khessian_core::pde::{GridShape, RhsSpec, ScalarGrid, SmallMat};
use khessian_core::seeds::{seed_for_zero, SeedQuadratic};
use khessian_core::Spectrum;

/// A deterministic spectrum of length `n` with mixed signs.
pub fn spectrum(n: usize) -> Spectrum {
    Spectrum::new((0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect()).unwrap()
}

/// A symmetric `n x n` matrix with a dominant diagonal.
pub fn symmetric(n: usize) -> SmallMat {
    let mut m = SmallMat::identity(n);
    for i in 0..n {
        for j in 0..n {
            m.a[i][j] += 0.1 * ((i + 2 * j) % 5) as f64 + 0.1 * ((j + 2 * i) % 5) as f64;
        }
    }
    m
}

/// The `P2` seed for `k = 2`, `n = 3`, a linear right-hand side and a
/// smooth iterate on an `m`-point grid.
pub fn problem(m: usize) -> (SeedQuadratic, RhsSpec, ScalarGrid) {
    let seed = seed_for_zero(2, 3, 0.5, 2.0).unwrap();
    let f: RhsSpec = serde_json::from_str(
        r#"{"n":3,"terms":[{"coef":1.0,"y":[1,0,0]},{"coef":1.0,"y":[0,1,0]}]}"#,
    )
    .unwrap();
    let shape = GridShape::new(3, m).unwrap();
    let w = ScalarGrid::from_fn(shape, |x| {
        0.05 * x.iter().map(|v| (std::f64::consts::FRAC_PI_2 * v).cos()).product::<f64>()
    });
    (seed, f, w)
}
