//! Membership in the Garding cone `Gamma_k(n) = { sigma_j > 0, j = 1..k }`
//! and classification of its boundary.
//!
//! Three independent membership tests are provided: the defining
//! inequalities ([`in_gamma_k`]), the hyperbolic-polynomial definition
//! `sigma_k(s e + lambda) > 0 for all s >= 0` ([`in_garding_cone_sampled`])
//! and deleted-variable positivity ([`in_gamma_tilde`]).

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::symfun::{
    binomial, elem_sym, shift_coefficient, sigma_km1_row, sigma_of, sigma_prefix, Spectrum,
    SymValueTable,
};

/// Where a spectrum sits relative to `Gamma_k(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    Interior,
    BoundaryP1,
    BoundaryP2,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub kind: ConeKind,
    pub k: usize,
    pub n: usize,
    pub tol: f64,
    /// `sigma_0 .. sigma_{k+1}`.
    pub sigmas: SymValueTable,
    /// Smallest slack among the defining inequalities of `kind` (signed).
    pub margin: f64,
    /// The verdict changes when `tol` moves by a factor of ten either way.
    pub ambiguous: bool,
    /// `min_i sigma_{k-1;i}`; strictly positive on `P2`.
    pub row_min: f64,
    /// Boundary structure checks held: positive row on `P2`, vanishing
    /// `sigma_j` for every `j >= k` on `P1`.
    pub consistent: bool,
}

/// `sigma_j(lambda) > tol` for every `j = 1..k`.
pub fn in_gamma_k(lam: &Spectrum, k: usize, tol: f64) -> Result<bool> {
    check_k(lam, k, 1)?;
    if tol < 0.0 {
        return domain("tol must be nonnegative");
    }
    let sig = sigma_prefix(lam.as_slice(), k);
    Ok(sig[1..].iter().all(|&s| s > tol))
}

/// Hyperbolic-polynomial membership test.
///
/// `p(s) = sigma_k(s e + lambda) = sum_j C(j,k,n) s^j sigma_{k-j}(lambda)` is
/// real-rooted, so `p > 0` on `[0, inf)` exactly when every coefficient is
/// positive (nonnegative with `p(0) > 0`). That coefficient test is the
/// returned answer. `samples` additional values of `p` on a geometric grid in
/// `[0, s_max]` are evaluated directly from the shifted spectrum; a negative
/// sample while the coefficient test passes is reported as an inconsistency.
pub fn in_garding_cone_sampled(lam: &Spectrum, k: usize, samples: usize) -> Result<bool> {
    check_k(lam, k, 1)?;
    let n = lam.n();
    let sig = sigma_prefix(lam.as_slice(), k);
    let coeffs: Vec<f64> = (0..=k)
        .map(|j| Ok(shift_coefficient(j, k, n)? * sig[k - j]))
        .collect::<Result<_>>()?;
    let inside = coeffs[0] > 0.0 && coeffs.iter().all(|&c| c >= 0.0);

    // Cauchy bound on the roots of p
    let lead = coeffs[k];
    let s_max = 1.0 + coeffs[..k].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut min_sample = elem_sym(lam, k)?;
    if samples > 1 {
        let ratio = (s_max / 1e-6).powf(1.0 / (samples - 1) as f64);
        let mut s = 1e-6;
        for _ in 0..samples {
            min_sample = min_sample.min(elem_sym(&lam.shifted(s), k)?);
            s *= ratio;
        }
    }
    if inside && min_sample <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "coefficient test accepts {:?} but sigma_{k}(s e + lambda) = {min_sample:e} at a sample",
            lam.as_slice()
        )));
    }
    Ok(inside)
}

/// Largest number of deleted-variable evaluations [`in_gamma_tilde`] performs.
pub const TILDE_GUARD: u64 = 1_000_000;

/// Deleted-variable positivity: `sigma_{k-l; i_1..i_l}(lambda) > 0` for every
/// `l = 0..min(k, n-1)` and every `l`-subset of coordinates.
pub fn in_gamma_tilde(lam: &Spectrum, k: usize) -> Result<bool> {
    check_k(lam, k, 1)?;
    let n = lam.n();
    let top = k.min(n - 1);
    let mut cost: u64 = 0;
    for l in 0..=top {
        cost = cost.saturating_add(binomial(n, l)?);
    }
    if cost > TILDE_GUARD {
        return Err(Error::Capacity(format!(
            "{cost} subsets exceed the guard of {TILDE_GUARD}"
        )));
    }
    let v = lam.as_slice();
    let mut kept = Vec::with_capacity(n);
    for l in 0..=top {
        for subset in (0..n).combinations(l) {
            kept.clear();
            kept.extend((0..n).filter(|i| !subset.contains(i)).map(|i| v[i]));
            if sigma_of(&kept, k - l) <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn kind_at(sig: &[f64], k: usize, tol: f64) -> ConeKind {
    let n = sig.len() - 1;
    if sig[1..=k].iter().all(|&s| s > tol) {
        return ConeKind::Interior;
    }
    let lower_pos = sig[1..k].iter().all(|&s| s > tol);
    if lower_pos && sig[k].abs() <= tol && sig[k + 1] < -tol {
        return ConeKind::BoundaryP2;
    }
    let lower_nonneg = sig[1..k].iter().all(|&s| s >= -tol);
    if lower_nonneg && sig[k..=n].iter().all(|s| s.abs() <= tol) {
        return ConeKind::BoundaryP1;
    }
    ConeKind::Outside
}

fn margins(sig: &[f64], k: usize, tol: f64) -> [f64; 4] {
    let n = sig.len() - 1;
    let interior = sig[1..=k].iter().map(|s| s - tol).fold(f64::INFINITY, f64::min);
    let p2 = sig[1..k]
        .iter()
        .map(|s| s - tol)
        .chain([tol - sig[k].abs(), -sig[k + 1] - tol])
        .fold(f64::INFINITY, f64::min);
    let p1 = sig[1..k]
        .iter()
        .map(|s| s + tol)
        .chain(sig[k..=n].iter().map(|s| tol - s.abs()))
        .fold(f64::INFINITY, f64::min);
    let outside = -interior.max(p2).max(p1);
    [interior, p1, p2, outside]
}

fn slot(kind: ConeKind) -> usize {
    match kind {
        ConeKind::Interior => 0,
        ConeKind::BoundaryP1 => 1,
        ConeKind::BoundaryP2 => 2,
        ConeKind::Outside => 3,
    }
}

/// Locate `lambda` relative to `Gamma_k(n)` for `1 <= k <= n - 1`.
///
/// Boundary points are split into `P2` (`sigma_k = 0`, `sigma_{k+1} < 0`,
/// lower `sigma_j > 0`) and `P1` (`sigma_j = 0` for all `j >= k`). A verdict
/// that flips when `tol` is scaled by 10 or 1/10 is flagged `ambiguous` and
/// reports the candidate with the larger margin.
pub fn classify_boundary(lam: &Spectrum, k: usize, tol: f64) -> Result<ConeVerdict> {
    let n = lam.n();
    if k == 0 || k >= n {
        return domain(format!("classification needs 1 <= k <= n - 1, got k = {k}, n = {n}"));
    }
    if !(tol >= 0.0) {
        return domain("tol must be nonnegative");
    }
    let sig = sigma_prefix(lam.as_slice(), n);
    let candidates = [
        kind_at(&sig, k, tol / 10.0),
        kind_at(&sig, k, tol),
        kind_at(&sig, k, tol * 10.0),
    ];
    let m = margins(&sig, k, tol);
    let ambiguous = candidates.iter().any(|&c| c != candidates[1]);
    let kind = if ambiguous {
        *candidates
            .iter()
            .max_by(|a, b| m[slot(**a)].total_cmp(&m[slot(**b)]))
            .expect("three candidates")
    } else {
        candidates[1]
    };

    let row = sigma_km1_row(lam, k)?;
    let row_min = row.iter().copied().fold(f64::INFINITY, f64::min);
    let consistent = match kind {
        ConeKind::BoundaryP2 => row_min > 0.0,
        ConeKind::BoundaryP1 => sig[k..].iter().all(|s| s.abs() <= tol),
        _ => true,
    };
    Ok(ConeVerdict {
        kind,
        k,
        n,
        tol,
        sigmas: SymValueTable {
            sigma: sig[..=k + 1].to_vec(),
        },
        margin: m[slot(kind)],
        ambiguous,
        row_min,
        consistent,
    })
}

/// `sum_i sigma_{k-1;i}(lambda) mu_i - k sigma_k(lambda)^((k-1)/k) sigma_k(mu)^(1/k)`.
///
/// Both spectra must lie in `Gamma_k(n)`.
pub fn garding_slack(lam: &Spectrum, mu: &Spectrum, k: usize) -> Result<f64> {
    if lam.n() != mu.n() {
        return domain("lambda and mu must have the same length");
    }
    if !in_gamma_k(lam, k, 0.0)? || !in_gamma_k(mu, k, 0.0)? {
        return domain(format!("both arguments must lie in Gamma_{k}"));
    }
    let row = sigma_km1_row(lam, k)?;
    let lhs: f64 = row.iter().zip(mu.as_slice()).map(|(r, m)| r * m).sum();
    let kf = k as f64;
    let rhs = kf * elem_sym(lam, k)?.powf((kf - 1.0) / kf) * elem_sym(mu, k)?.powf(1.0 / kf);
    Ok(lhs - rhs)
}

/// Truth value of the Garding inequality with an absolute allowance `tol`.
pub fn garding_inequality_check(lam: &Spectrum, mu: &Spectrum, k: usize, tol: f64) -> Result<bool> {
    Ok(garding_slack(lam, mu, k)? >= -tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderFacts {
    /// Number of strictly positive entries.
    pub p: usize,
    /// `sigma_{k-1;i}` is nondecreasing in `i`.
    pub row_sorted: bool,
}

/// Structural facts for a descending spectrum in the closure of `Gamma_k(n)`.
pub fn descending_order_facts(lam: &Spectrum, k: usize) -> Result<OrderFacts> {
    check_k(lam, k, 1)?;
    if !lam.is_descending() {
        return domain("spectrum must be sorted in descending order");
    }
    if !in_gamma_k(lam, k, 0.0)? && !in_closure(lam, k, crate::DEFAULT_TOL) {
        return domain(format!("spectrum is not in the closure of Gamma_{k}"));
    }
    let p = lam.as_slice().iter().filter(|&&v| v > 0.0).count();
    let row = sigma_km1_row(lam, k)?;
    let scale = row.iter().fold(1.0f64, |a, r| a.max(r.abs()));
    let row_sorted = row.windows(2).all(|w| w[1] >= w[0] - 1e-12 * scale);
    Ok(OrderFacts { p, row_sorted })
}

/// `sigma_j >= -tol` for `j = 1..k`.
pub fn in_closure(lam: &Spectrum, k: usize, tol: f64) -> bool {
    let k = k.min(lam.n());
    sigma_prefix(lam.as_slice(), k)[1..].iter().all(|&s| s >= -tol)
}

fn check_k(lam: &Spectrum, k: usize, lo: usize) -> Result<()> {
    if k < lo || k > lam.n() {
        return domain(format!("k = {k} outside {lo}..={}", lam.n()));
    }
    Ok(())
}
