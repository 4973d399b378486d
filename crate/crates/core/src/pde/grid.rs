use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A regular grid of `m^n` points over `[-1, 1]^n`, spacing `h = 2 / (m - 1)`.
///
/// Points are stored in lexicographic order of their index tuple, first axis
/// slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub n: usize,
    pub m: usize,
}

impl GridShape {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return domain(format!("grid dimension n = {n} outside 2..=4"));
        }
        if m < 9 || m % 2 == 0 {
            return domain(format!("points per axis m = {m} must be odd and >= 9"));
        }
        let cap = match n {
            2 => 257,
            3 => 65,
            _ => 33,
        };
        if m > cap {
            return domain(format!("m = {m} exceeds the cap of {cap} for n = {n}"));
        }
        Ok(GridShape { n, m })
    }

    pub fn h(&self) -> f64 {
        2.0 / (self.m - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of grid index `i` along one axis, exact at the center.
    pub fn coord(&self, i: usize) -> f64 {
        let mm = (self.m - 1) as f64;
        (2.0 * i as f64 - mm) / mm
    }

    /// Flat-index stride of axis `d`.
    pub fn stride(&self, d: usize) -> usize {
        self.m.pow((self.n - 1 - d) as u32)
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for d in (0..self.n).rev() {
            out[d] = flat % self.m;
            flat /= self.m;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = [0usize; 4];
        self.unflatten(flat, &mut idx[..self.n]);
        idx[..self.n].iter().map(|&i| self.coord(i)).collect()
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let mut idx = [0usize; 4];
        self.unflatten(flat, &mut idx[..self.n]);
        idx[..self.n].iter().any(|&i| i == 0 || i == self.m - 1)
    }

    /// `true` on the boundary of the cube.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|p| self.is_boundary(p)).collect()
    }

    /// Flat indices of interior points, ascending.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&p| !self.is_boundary(p)).collect()
    }

    /// Flat index of the center point `x = 0`.
    pub fn center(&self) -> usize {
        self.flatten(&vec![(self.m - 1) / 2; self.n])
    }
}

/// Values of a scalar function at every point of a [`GridShape`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    pub shape: GridShape,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(shape: GridShape) -> Self {
        ScalarGrid {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    pub fn from_fn(shape: GridShape, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..shape.len()).map(|p| f(&shape.point(p))).collect();
        ScalarGrid { shape, values }
    }

    /// Sets boundary values to exactly zero.
    pub fn with_zero_boundary(mut self) -> Self {
        for p in 0..self.shape.len() {
            if self.shape.is_boundary(p) {
                self.values[p] = 0.0;
            }
        }
        self
    }

    /// Boundary values are exactly zero.
    pub fn respects_mask(&self) -> bool {
        (0..self.shape.len()).all(|p| !self.shape.is_boundary(p) || self.values[p] == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn add_assign(&mut self, other: &ScalarGrid) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_limits() {
        assert!(GridShape::new(1, 9).is_err());
        assert!(GridShape::new(5, 9).is_err());
        assert!(GridShape::new(3, 8).is_err());
        assert!(GridShape::new(3, 7).is_err());
        assert!(GridShape::new(3, 67).is_err());
        assert!(GridShape::new(4, 35).is_err());
        assert!(GridShape::new(3, 65).is_ok());
    }

    #[test]
    fn spacing_and_coordinates() {
        for m in [9, 11, 17, 21, 33] {
            let s = GridShape::new(2, m).unwrap();
            assert_eq!(s.h() * (m - 1) as f64, 2.0);
            assert_eq!(s.coord(0), -1.0);
            assert_eq!(s.coord(m - 1), 1.0);
            assert_eq!(s.coord((m - 1) / 2), 0.0);
            assert_eq!(s.point(s.center()), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn flatten_roundtrip_and_interior() {
        let s = GridShape::new(3, 9).unwrap();
        let mut idx = [0usize; 3];
        for p in 0..s.len() {
            s.unflatten(p, &mut idx);
            assert_eq!(s.flatten(&idx), p);
        }
        assert_eq!(s.interior().len(), 7 * 7 * 7);
        assert_eq!(s.dirichlet_mask().iter().filter(|b| **b).count(), 729 - 343);
        assert_eq!(s.stride(0), 81);
    }
}
