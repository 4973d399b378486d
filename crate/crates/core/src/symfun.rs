//! Elementary symmetric polynomials of a real vector.
//!
//! Every evaluation goes through the coefficient recurrence for
//! `prod_i (1 + lambda_i t)`, which costs `O(n k)` and never forms power sums,
//! so mixed-sign inputs do not suffer the cancellation that Newton's
//! identities produce.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A real vector of candidate Hessian eigenvalues, `n >= 2`, all finite.
///
/// No ordering is implied. Operations that need descending order check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return domain(format!("spectrum needs n >= 2, got n = {}", entries.len()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return domain(format!("spectrum entry {bad} is not finite"));
        }
        Ok(Spectrum(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Every entry shifted by `eps`, i.e. `lambda + eps * (1, ..., 1)`.
    pub fn shifted(&self, eps: f64) -> Spectrum {
        Spectrum(self.0.iter().map(|v| v + eps).collect())
    }

    pub fn scaled(&self, s: f64) -> Spectrum {
        Spectrum(self.0.iter().map(|v| v * s).collect())
    }

    pub fn is_descending(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Copy sorted in descending order.
    pub fn sorted_descending(&self) -> Spectrum {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        Spectrum(v)
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Values `sigma_0 .. sigma_kmax` of one spectrum, with `sigma_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymValueTable {
    pub sigma: Vec<f64>,
}

impl SymValueTable {
    pub fn of(lam: &Spectrum, k_max: usize) -> Result<Self> {
        if k_max > lam.n() {
            return domain(format!("k_max = {k_max} exceeds n = {}", lam.n()));
        }
        Ok(SymValueTable {
            sigma: sigma_prefix(lam.as_slice(), k_max),
        })
    }

    pub fn get(&self, j: usize) -> f64 {
        self.sigma[j]
    }

    pub fn k_max(&self) -> usize {
        self.sigma.len() - 1
    }
}

/// `sigma_0 .. sigma_kmax` of an arbitrary slice (any length, `k_max` may exceed it).
///
/// Terms with `j > values.len()` are zero.
pub fn sigma_prefix(values: &[f64], k_max: usize) -> Vec<f64> {
    let mut e = vec![0.0; k_max + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        let top = (i + 1).min(k_max);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `sigma_k` of an arbitrary slice; zero when `k` exceeds its length.
pub fn sigma_of(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    sigma_prefix(values, k)[k]
}

/// `sigma_k(lambda)` for `0 <= k <= n`.
pub fn elem_sym(lam: &Spectrum, k: usize) -> Result<f64> {
    if k > lam.n() {
        return domain(format!("k = {k} outside 0..={}", lam.n()));
    }
    Ok(sigma_of(lam.as_slice(), k))
}

/// `sigma_k` with the listed (0-based) coordinates removed.
///
/// Equals `sigma_k(lambda)` with those coordinates set to zero.
pub fn elem_sym_deleted(lam: &Spectrum, k: usize, deleted: &[usize]) -> Result<f64> {
    let n = lam.n();
    let mut seen = vec![false; n];
    for &i in deleted {
        if i >= n {
            return domain(format!("deleted index {i} out of range for n = {n}"));
        }
        if seen[i] {
            return domain(format!("deleted index {i} listed twice"));
        }
        seen[i] = true;
    }
    let remaining = n - deleted.len();
    if k > remaining {
        return domain(format!(
            "k = {k} exceeds the {remaining} coordinates left after deletion"
        ));
    }
    let kept: Vec<f64> = lam
        .as_slice()
        .iter()
        .zip(&seen)
        .filter(|(_, &gone)| !gone)
        .map(|(&v, _)| v)
        .collect();
    Ok(sigma_of(&kept, k))
}

/// Exact binomial coefficient with overflow detection.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("C({n},{k})")))?
            / (i as u128 + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(format!("C({n},{k})")))
}

/// `C(j,k,n) = C(n,k) C(k,j) / C(n,k-j)`, the weight of `eps^j sigma_{k-j}` in
/// the expansion of `sigma_k(lambda + eps)`.
pub fn shift_coefficient(j: usize, k: usize, n: usize) -> Result<f64> {
    if j > k || k > n {
        return domain(format!("shift coefficient needs j <= k <= n, got ({j},{k},{n})"));
    }
    let num = (binomial(n, k)? as u128)
        .checked_mul(binomial(k, j)? as u128)
        .ok_or_else(|| Error::Overflow(format!("C({j},{k},{n})")))?;
    let den = binomial(n, k - j)? as u128;
    debug_assert_eq!(num % den, 0);
    Ok((num / den) as f64)
}

/// `sigma_k(lambda + eps e)` through the shift expansion in powers of `eps`.
pub fn shift_expand(lam: &Spectrum, k: usize, eps: f64) -> Result<f64> {
    let n = lam.n();
    if k > n {
        return domain(format!("k = {k} outside 0..={n}"));
    }
    let sig = sigma_prefix(lam.as_slice(), k);
    let mut total = 0.0;
    let mut pow = 1.0;
    for j in 0..=k {
        total += shift_coefficient(j, k, n)? * pow * sig[k - j];
        pow *= eps;
    }
    Ok(total)
}

/// Normalized mean `[sigma_l / C(n,l)]^(1/l)`.
pub fn maclaurin_mean(lam: &Spectrum, l: usize) -> Result<f64> {
    let n = lam.n();
    if l == 0 || l > n {
        return domain(format!("l = {l} outside 1..={n}"));
    }
    let s = sigma_of(lam.as_slice(), l);
    if s < 0.0 {
        return domain(format!("sigma_{l} = {s:e} is negative"));
    }
    Ok((s / binomial(n, l)? as f64).powf(1.0 / l as f64))
}

/// `(sigma_{k-1;1}, ..., sigma_{k-1;n})`: the diagonal coefficients of the
/// linearization of `sigma_k` at `lambda`.
pub fn sigma_km1_row(lam: &Spectrum, k: usize) -> Result<Vec<f64>> {
    let n = lam.n();
    if k == 0 || k > n {
        return domain(format!("k = {k} outside 1..={n}"));
    }
    Ok(deleted_row(lam.as_slice(), k - 1))
}

/// `sigma_j` with coordinate `i` removed, for every `i`.
pub(crate) fn deleted_row(values: &[f64], j: usize) -> Vec<f64> {
    let mut rest = Vec::with_capacity(values.len());
    (0..values.len())
        .map(|i| {
            rest.clear();
            rest.extend(values.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &v)| v));
            sigma_of(&rest, j)
        })
        .collect()
}
