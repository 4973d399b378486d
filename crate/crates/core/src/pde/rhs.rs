use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default half-width `A` of the box `|u| <= A`, `|p| <= A` on which `f` is used.
pub const DEFAULT_BOX: f64 = 1.0;

/// Value and first partials of `f(y, u, p)` in `(u, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RhsJet {
    pub value: f64,
    pub du: f64,
    pub dp: [f64; 4],
}

/// A right-hand side `f(y, u, p)` with analytic partials in `(u, p)`.
pub trait Rhs {
    fn jet(&self, y: &[f64], u: f64, p: &[f64]) -> RhsJet;

    fn value(&self, y: &[f64], u: f64, p: &[f64]) -> f64 {
        self.jet(y, u, p).value
    }

    /// Half-width of the admissible `(u, p)` box, `None` for unrestricted.
    fn box_bound(&self) -> Option<f64> {
        Some(DEFAULT_BOX)
    }
}

/// `coef * y^a * u^b * p^c` with multi-indices `a`, `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<u32>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub u: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<u32>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl Monomial {
    pub fn constant(coef: f64) -> Self {
        Monomial { coef, y: vec![], u: 0, p: vec![] }
    }

    fn y_exp(&self, i: usize) -> u32 {
        self.y.get(i).copied().unwrap_or(0)
    }

    fn p_exp(&self, i: usize) -> u32 {
        self.p.get(i).copied().unwrap_or(0)
    }

    fn y_degree(&self) -> u32 {
        self.y.iter().sum()
    }

    fn up_degree(&self) -> u32 {
        self.u + self.p.iter().sum::<u32>()
    }
}

/// Polynomial right-hand side: total degree at most 4 in `y` and at most 2 in
/// `(u, p)` per term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsSpec {
    pub n: usize,
    pub terms: Vec<Monomial>,
    /// Hoelder exponent in `y` (metadata).
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.5
}

fn ipow(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

/// `d/dx x^e` as `(coefficient, new exponent)`.
fn dpow(x: f64, e: u32) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * ipow(x, e - 1)
    }
}

impl RhsSpec {
    pub fn new(n: usize, terms: Vec<Monomial>) -> Result<Self> {
        let spec = RhsSpec { n, terms, alpha: default_alpha() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        RhsSpec { n, terms: vec![Monomial::constant(c)], alpha: default_alpha() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 4 {
            return domain(format!("rhs dimension n = {} outside 1..=4", self.n));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("rhs alpha = {} outside (0, 1)", self.alpha));
        }
        for (t, term) in self.terms.iter().enumerate() {
            if !term.coef.is_finite() {
                return domain(format!("term {t}: coefficient is not finite"));
            }
            if term.y.len() > self.n || term.p.len() > self.n {
                return domain(format!("term {t}: exponent vector longer than n = {}", self.n));
            }
            if term.y_degree() > 4 {
                return domain(format!("term {t}: degree {} in y exceeds 4", term.y_degree()));
            }
            if term.up_degree() > 2 {
                return domain(format!("term {t}: degree {} in (u, p) exceeds 2", term.up_degree()));
            }
        }
        Ok(())
    }

    pub fn at_origin(&self) -> f64 {
        let zero = [0.0; 4];
        self.value(&zero[..self.n], 0.0, &zero[..self.n])
    }

    /// `sum_t |coef_t| (1 + deg_t)`, a bound on `f` and its first partials
    /// over the unit box.
    pub fn coefficient_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef.abs() * (1 + t.y_degree() + t.up_degree()) as f64)
            .sum()
    }

    fn y_factor(&self, term: &Monomial, y: &[f64]) -> f64 {
        (0..self.n).map(|i| ipow(y[i], term.y_exp(i))).product()
    }

    /// Second partials in `(u, p)`: `(f_uu, f_up, f_pp)`.
    pub fn second_partials(&self, y: &[f64], u: f64, p: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n;
        let mut fuu = 0.0;
        let mut fup = vec![0.0; n];
        let mut fpp = vec![vec![0.0; n]; n];
        for term in &self.terms {
            let base = term.coef * self.y_factor(term, y);
            if base == 0.0 {
                continue;
            }
            let pu = ipow(u, term.u);
            let pp: Vec<f64> = (0..n).map(|i| ipow(p[i], term.p_exp(i))).collect();
            let prod_except = |skip: &[usize]| -> f64 {
                (0..n).filter(|i| !skip.contains(i)).map(|i| pp[i]).product()
            };
            if term.u >= 2 {
                fuu += base * (term.u * (term.u - 1)) as f64 * ipow(u, term.u - 2) * prod_except(&[]);
            }
            for i in 0..n {
                let di = dpow(p[i], term.p_exp(i));
                fup[i] += base * dpow(u, term.u) * di * prod_except(&[i]);
                for j in 0..n {
                    let v = if i == j {
                        let e = term.p_exp(i);
                        if e >= 2 {
                            (e * (e - 1)) as f64 * ipow(p[i], e - 2) * prod_except(&[i])
                        } else {
                            0.0
                        }
                    } else {
                        di * dpow(p[j], term.p_exp(j)) * prod_except(&[i, j])
                    };
                    fpp[i][j] += base * pu * v;
                }
            }
        }
        (fuu, fup, fpp)
    }
}

impl Rhs for RhsSpec {
    fn jet(&self, y: &[f64], u: f64, p: &[f64]) -> RhsJet {
        let n = self.n;
        let mut jet = RhsJet::default();
        let mut pp = [0.0; 4];
        for term in &self.terms {
            let base = term.coef * self.y_factor(term, y);
            if base == 0.0 {
                continue;
            }
            for i in 0..n {
                pp[i] = ipow(p[i], term.p_exp(i));
            }
            let pprod: f64 = pp[..n].iter().product();
            let pu = ipow(u, term.u);
            jet.value += base * pu * pprod;
            jet.du += base * dpow(u, term.u) * pprod;
            for i in 0..n {
                let others: f64 = (0..n).filter(|&j| j != i).map(|j| pp[j]).product();
                jet.dp[i] += base * pu * dpow(p[i], term.p_exp(i)) * others;
            }
        }
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> RhsSpec {
        // f = 2 y1 y2^2 + 0.5 u^2 - 3 u p2 + p1^2 + 1.5
        RhsSpec::new(
            2,
            vec![
                Monomial { coef: 2.0, y: vec![1, 2], u: 0, p: vec![] },
                Monomial { coef: 0.5, y: vec![], u: 2, p: vec![] },
                Monomial { coef: -3.0, y: vec![], u: 1, p: vec![0, 1] },
                Monomial { coef: 1.0, y: vec![], u: 0, p: vec![2] },
                Monomial::constant(1.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn jet_matches_hand_derivatives() {
        let f = sample();
        let (y, u, p) = ([0.3, -0.4], 0.2, [0.7, -0.1]);
        let jet = f.jet(&y, u, &p);
        let value = 2.0 * 0.3 * 0.16 + 0.5 * 0.04 - 3.0 * 0.2 * -0.1 + 0.49 + 1.5;
        assert_relative_eq!(jet.value, value, max_relative = 1e-14);
        assert_relative_eq!(jet.du, 0.2 - 3.0 * -0.1, max_relative = 1e-14);
        assert_relative_eq!(jet.dp[0], 1.4, max_relative = 1e-14);
        assert_relative_eq!(jet.dp[1], -0.6, max_relative = 1e-14);

        let (fuu, fup, fpp) = f.second_partials(&y, u, &p);
        assert_relative_eq!(fuu, 1.0);
        assert_eq!(fup, vec![0.0, -3.0]);
        assert_eq!(fpp, vec![vec![2.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let f = sample();
        let (y, u, p) = ([0.3, -0.4], 0.2, [0.7, -0.1]);
        let d = 1e-6;
        let jet = f.jet(&y, u, &p);
        let du = (f.value(&y, u + d, &p) - f.value(&y, u - d, &p)) / (2.0 * d);
        assert_relative_eq!(jet.du, du, max_relative = 1e-8);
        for i in 0..2 {
            let mut pp = p;
            pp[i] += d;
            let mut pm = p;
            pm[i] -= d;
            let dp = (f.value(&y, u, &pp) - f.value(&y, u, &pm)) / (2.0 * d);
            assert_relative_eq!(jet.dp[i], dp, max_relative = 1e-8);
        }
    }

    #[test]
    fn degree_limits() {
        let too_high_y = Monomial { coef: 1.0, y: vec![5], u: 0, p: vec![] };
        assert!(RhsSpec::new(2, vec![too_high_y]).is_err());
        let too_high_up = Monomial { coef: 1.0, y: vec![], u: 2, p: vec![1] };
        assert!(RhsSpec::new(2, vec![too_high_up]).is_err());
        let too_long = Monomial { coef: 1.0, y: vec![1, 0, 0], u: 0, p: vec![] };
        assert!(RhsSpec::new(2, vec![too_long]).is_err());
    }

    #[test]
    fn origin_and_bound() {
        let f = sample();
        assert_eq!(f.at_origin(), 1.5);
        assert_relative_eq!(f.coefficient_bound(), 2.0 * 4.0 + 0.5 * 3.0 + 3.0 * 3.0 + 3.0 + 1.5);
    }
}
