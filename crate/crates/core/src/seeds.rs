//! Quadratic seeds `psi(y) = 1/2 sum tau_i y_i^2` with `sigma_k(tau) = c` and a
//! uniformly elliptic linearization `sum_i sigma_{k-1;i}(tau) d_i^2`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::symfun::{binomial, sigma_km1_row, sigma_of, sigma_prefix, Spectrum};
use crate::DEFAULT_TOL;

/// Which branch of the construction produced a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedClass {
    /// `c = 0`, `tau` on the `P2` part of the cone boundary.
    Zero,
    /// `c > 0`; `level` is `l` with `tau in Gamma_{k+l-1}`, `sigma_{k+l}(tau) < 0`,
    /// or `n - k + 1` for the equal-entry seed in `Gamma_n`.
    Positive { level: usize },
    /// `c < 0`, `tau in Gamma_{k-1}`.
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedQuadratic {
    pub tau: Spectrum,
    pub k: usize,
    pub n: usize,
    /// Target value of `sigma_k(tau)`.
    pub c: f64,
    pub alpha: f64,
    pub eps: f64,
    pub eps_prime: f64,
    /// Largest `m` with `sigma_j(tau) > tol` for all `j <= m`.
    pub convexity_class: usize,
    pub class: SeedClass,
}

/// `eps^alpha` for `alpha <= 1/2`, `eps` otherwise.
pub fn eps_prime(alpha: f64, eps: f64) -> f64 {
    if alpha <= 0.5 {
        eps.powf(alpha)
    } else {
        eps
    }
}

impl SeedQuadratic {
    fn build(tau: Spectrum, k: usize, c: f64, class: SeedClass) -> Result<Self> {
        let n = tau.n();
        let convexity_class = strict_class(&tau, DEFAULT_TOL);
        let seed = SeedQuadratic {
            tau,
            k,
            n,
            c,
            alpha: 0.5,
            eps: 0.5,
            eps_prime: eps_prime(0.5, 0.5),
            convexity_class,
            class,
        };
        seed.validate()?;
        Ok(seed)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha = {alpha} outside (0, 1)"));
        }
        self.alpha = alpha;
        self.eps_prime = eps_prime(alpha, self.eps);
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return domain(format!("eps = {eps} must be positive"));
        }
        self.eps = eps;
        self.eps_prime = eps_prime(self.alpha, eps);
        Ok(self)
    }

    /// `sigma_{k-1;i}(tau)` for every `i`.
    pub fn row(&self) -> Vec<f64> {
        sigma_km1_row(&self.tau, self.k).expect("k validated at construction")
    }

    pub fn min_row(&self) -> f64 {
        self.row().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Checks the target value, the positive row and the `eps'` rule.
    pub fn validate(&self) -> Result<()> {
        let s = sigma_of(self.tau.as_slice(), self.k);
        if (s - self.c).abs() > 1e-10 * self.c.abs().max(1.0) {
            return Err(Error::Inconsistent(format!(
                "sigma_{}(tau) = {s:e} misses target {}",
                self.k, self.c
            )));
        }
        let min_row = self.min_row();
        if !(min_row > 0.0) {
            return Err(Error::Inconsistent(format!(
                "linearization is not uniformly elliptic: min row {min_row:e}"
            )));
        }
        if self.eps_prime != eps_prime(self.alpha, self.eps) {
            return Err(Error::Inconsistent("eps' does not follow the alpha rule".into()));
        }
        Ok(())
    }
}

fn strict_class(tau: &Spectrum, tol: f64) -> usize {
    let sig = sigma_prefix(tau.as_slice(), tau.n());
    sig[1..].iter().take_while(|&&s| s > tol).count()
}

/// `tau` on `P2` for `1 <= k < n`: ones, then `M`, `-1/M`, then zeros, with
/// `M = (k - 1 + sqrt((k-1)^2 + 4)) / 2`.
fn p2_point(k: usize, n: usize) -> Vec<f64> {
    let km1 = (k - 1) as f64;
    let m = (km1 + (km1 * km1 + 4.0).sqrt()) / 2.0;
    let mut v = vec![0.0; n];
    v[..k - 1].fill(1.0);
    v[k - 1] = m;
    v[k] = -1.0 / m;
    v
}

/// The canonical `P2` point for `2 <= k < n`: `sigma_k = 0`, `sigma_{k+1} = -1`.
pub fn p2_example(k: usize, n: usize) -> Result<Spectrum> {
    if k < 2 || k >= n {
        return domain(format!("P2 example needs 2 <= k < n, got k = {k}, n = {n}"));
    }
    let lam = Spectrum::new(p2_point(k, n))?;
    let sig = sigma_prefix(lam.as_slice(), k + 1);
    if sig[k].abs() > 1e-10 || (sig[k + 1] + 1.0).abs() > 1e-10 || sig[1..k].iter().any(|&s| s <= 0.0) {
        return Err(Error::Inconsistent(format!("P2 example fails its identities: {sig:?}")));
    }
    Ok(lam)
}

/// Smallest `eps` in `{1/2, 1/4, ...}` with `eps^(2 alpha) / eps' * f_bound <= 1/4`.
///
/// This is the a-priori size of the initial residual; the solver refines it
/// against the actual right-hand side with `iterate::tune_epsilon`.
pub fn a_priori_eps(alpha: f64, f_bound: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha = {alpha} outside (0, 1)"));
    }
    if !(f_bound >= 0.0) {
        return domain("f_bound must be nonnegative");
    }
    let mut eps: f64 = 0.5;
    while eps >= 1e-4 {
        if eps.powf(2.0 * alpha) / eps_prime(alpha, eps) * f_bound <= 0.25 {
            return Ok(eps);
        }
        eps /= 2.0;
    }
    Err(Error::Tuning(format!("no eps >= 1e-4 bounds the residual for f_bound = {f_bound}")))
}

/// Seed for `f(Z0) = 0`: the canonical `P2` point.
pub fn seed_for_zero(k: usize, n: usize, alpha: f64, f_bound: f64) -> Result<SeedQuadratic> {
    let tau = p2_example(k, n)?;
    let eps = a_priori_eps(alpha, f_bound)?;
    SeedQuadratic::build(tau, k, 0.0, SeedClass::Zero)?
        .with_alpha(alpha)?
        .with_eps(eps)
}

/// Intermediate state of the negative-target construction at level `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeConstruction {
    /// `P2` point of `Gamma_{level-1}(n-1)`, descending.
    pub delta: Vec<f64>,
    /// `delta_2 + 1`.
    pub delta1: f64,
    pub t: f64,
    /// `(delta1, delta_2 + t, ..., delta_n + t)`, in `Gamma_{level-1}(n)` with
    /// `sigma_level < 0`.
    pub lambda: Spectrum,
}

/// Build `lambda in Gamma_{level-1}(n)` with `sigma_level(lambda) < 0` for
/// `2 <= level <= n - 1`, by lifting a `P2` point one dimension down.
pub fn negative_construction(level: usize, n: usize) -> Result<NegativeConstruction> {
    if n < 3 || level < 2 || level > n - 1 {
        return domain(format!("construction needs 2 <= level <= n - 1, n >= 3; got level = {level}, n = {n}"));
    }
    let mut delta = p2_point(level - 1, n - 1);
    delta.sort_by(|a, b| b.total_cmp(a));
    let delta1 = delta[0] + 1.0;

    let mut t = 0.5;
    let mut shifted = vec![0.0; n - 1];
    for _ in 0..200 {
        for (s, d) in shifted.iter_mut().zip(&delta) {
            *s = d + t;
        }
        let sig = sigma_prefix(&shifted, level);
        if sig[level - 1] > 0.0 && delta1 * sig[level - 1] + sig[level] < 0.0 {
            let mut lam = Vec::with_capacity(n);
            lam.push(delta1);
            lam.extend_from_slice(&shifted);
            return Ok(NegativeConstruction {
                delta,
                delta1,
                t,
                lambda: Spectrum::new(lam)?,
            });
        }
        t /= 2.0;
    }
    Err(Error::Construction(format!(
        "no admissible t found in 200 halvings at level {level}, n = {n}"
    )))
}

/// Seed for `f(Z0) = c < 0`: `tau in Gamma_{k-1}(n)`, `sigma_k(tau) = c`.
pub fn seed_for_negative(k: usize, n: usize, c: f64) -> Result<SeedQuadratic> {
    if !(c < 0.0) {
        return domain(format!("negative seed needs c < 0, got {c}"));
    }
    if n < 3 || k < 2 || k > n - 1 {
        return domain(format!("negative seed needs 2 <= k <= n - 1, n >= 3; got k = {k}, n = {n}"));
    }
    let built = negative_construction(k, n)?;
    let sk = sigma_of(built.lambda.as_slice(), k);
    let s = (c / sk).powf(1.0 / k as f64);
    let tau = built.lambda.scaled(s);
    let row = sigma_km1_row(&tau, k)?;
    if !(row[0] > 0.0 && row.windows(2).all(|w| w[1] >= w[0])) {
        return Err(Error::Construction(format!("row not positive and nondecreasing: {row:?}")));
    }
    SeedQuadratic::build(tau, k, c, SeedClass::Negative)
}

/// Seed for `f(Z0) = c > 0`.
///
/// `l = n - k + 1` gives the equal-entry seed `tau_i = (c / C(n,k))^(1/k)`.
/// For `1 <= l <= n - k`, `tau in Gamma_{k+l-1}(n)` with `sigma_{k+l}(tau) < 0`.
pub fn seed_for_positive(k: usize, n: usize, c: f64, l: usize) -> Result<SeedQuadratic> {
    if !(c > 0.0) {
        return domain(format!("positive seed needs c > 0, got {c}"));
    }
    if k < 1 || k > n {
        return domain(format!("k = {k} outside 1..={n}"));
    }
    if l == 0 || l > n - k + 1 {
        return domain(format!("l = {l} outside 1..={}", n - k + 1));
    }
    if l == n - k + 1 {
        let v = (c / binomial(n, k)? as f64).powf(1.0 / k as f64);
        return SeedQuadratic::build(Spectrum::new(vec![v; n])?, k, c, SeedClass::Positive { level: l });
    }
    let level = k + l;
    let lam = if level < n {
        negative_construction(level, n)?.lambda
    } else {
        top_level_point(n)?
    };
    let sk = sigma_of(lam.as_slice(), k);
    if !(sk > 0.0) {
        return Err(Error::Construction(format!("sigma_{k} = {sk:e} is not positive")));
    }
    let tau = lam.scaled((c / sk).powf(1.0 / k as f64));
    let sig = sigma_prefix(tau.as_slice(), level);
    if !(sig[level] < 0.0 && sig[1..level].iter().all(|&s| s > 0.0)) {
        return Err(Error::Construction(format!(
            "tau misses Gamma_{} minus Gamma_{level}: {sig:?}",
            level - 1
        )));
    }
    SeedQuadratic::build(tau, k, c, SeedClass::Positive { level: l })
}

/// `(1, ..., 1, -t)` in `Gamma_{n-1}(n)` with `sigma_n < 0`; `t` halves from 1/2.
fn top_level_point(n: usize) -> Result<Spectrum> {
    let mut t = 0.5;
    for _ in 0..200 {
        let mut v = vec![1.0; n];
        v[n - 1] = -t;
        let sig = sigma_prefix(&v, n);
        if sig[n] < 0.0 && sig[1..n].iter().all(|&s| s > 0.0) {
            return Spectrum::new(v);
        }
        t /= 2.0;
    }
    Err(Error::Construction(format!("no point of Gamma_{} with sigma_{n} < 0", n - 1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedCertificate {
    /// `min_i sigma_{k-1;i}(tau)`.
    pub ellipticity_margin: f64,
    pub convexity_class: usize,
    /// Smallest `m` with `sigma_m(tau) < -tol`.
    pub not_class: Option<usize>,
    pub row: Vec<f64>,
}

pub fn certify_seed(seed: &SeedQuadratic) -> SeedCertificate {
    let row = seed.row();
    let sig = sigma_prefix(seed.tau.as_slice(), seed.n);
    let not_class = (1..=seed.n).find(|&m| sig[m] < -DEFAULT_TOL);
    SeedCertificate {
        ellipticity_margin: row.iter().copied().fold(f64::INFINITY, f64::min),
        convexity_class: strict_class(&seed.tau, DEFAULT_TOL),
        not_class,
        row,
    }
}
