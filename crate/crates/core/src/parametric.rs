//! One-parameter families of discrete distributions, maximum likelihood,
//! Fisher information and the normalized score direction `q̂`.
//!
//! The likelihood is the multinomial one, `ℓ(θ) = Σ ν_i ln p_i(θ)`, and the
//! estimator is a root of the score `Σ ν_i ṗ_i(θ)/p_i(θ)`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::SampleCounts;
use crate::rotations::UnitVector;

/// Default tolerance on `|score(θ̂)|`.
pub const SCORE_TOL: f64 = 1e-10;
/// Fisher information below which the score direction is undefined.
pub const MIN_FISHER: f64 = 1e-14;

/// A family `θ ↦ p(θ)` of distributions on `m` cells with one real
/// parameter.
pub trait ParametricFamily {
    fn name(&self) -> &str;

    fn cells(&self) -> usize;

    /// Open interval of admissible parameters.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn probs(&self, theta: f64) -> Result<Vec<f64>>;

    /// `ṗ(θ) = dp/dθ`, cell by cell.
    fn dprobs(&self, theta: f64) -> Result<Vec<f64>>;

    fn check_domain(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if theta.is_finite() && theta > lo && theta < hi {
            Ok(())
        } else {
            Err(Error::DomainError { theta, lo, hi })
        }
    }
}

/// `p_i(θ) = i^{−θ} / Σ_j j^{−θ}` on cells `1..m`. `θ = 0` is uniform and
/// `θ = 1` the truncated Zipf law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerLaw {
    m: usize,
}

pub fn power_law_family(m: usize) -> Result<PowerLaw> {
    if m < 2 {
        return Err(Error::TooFewCells(m));
    }
    Ok(PowerLaw { m })
}

impl PowerLaw {
    /// `S₁(θ) = Σ_j p_j(θ) ln j`
    fn mean_log(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(j, pj)| pj * ((j + 1) as f64).ln())
            .sum()
    }
}

impl ParametricFamily for PowerLaw {
    fn name(&self) -> &str {
        "power_law"
    }

    fn cells(&self) -> usize {
        self.m
    }

    fn probs(&self, theta: f64) -> Result<Vec<f64>> {
        self.check_domain(theta)?;
        // log-weights shifted by their max so nothing overflows
        let logw: Vec<f64> = (1..=self.m).map(|i| -theta * (i as f64).ln()).collect();
        let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.into_iter().map(|x| x / total).collect();
        if let Some((i, pi)) = p.iter().enumerate().find(|(_, pi)| **pi <= 0.0) {
            return Err(Error::DegenerateModel {
                cell: i + 1,
                prob: *pi,
            });
        }
        Ok(p)
    }

    fn dprobs(&self, theta: f64) -> Result<Vec<f64>> {
        let p = self.probs(theta)?;
        let s1 = self.mean_log(&p);
        Ok(p.iter()
            .enumerate()
            .map(|(i, pi)| pi * (s1 - ((i + 1) as f64).ln()))
            .collect())
    }
}

type VecFn = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A user-supplied family: `p(θ)` as a closure plus either an analytic
/// derivative or central differences with step `1e-6·max(1, |θ|)`.
pub struct TabulatedFamily {
    name: String,
    m: usize,
    domain: (f64, f64),
    p: VecFn,
    dp: Option<VecFn>,
}

impl core::fmt::Debug for TabulatedFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TabulatedFamily")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("domain", &self.domain)
            .field("analytic_derivative", &self.dp.is_some())
            .finish()
    }
}

impl TabulatedFamily {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        domain: (f64, f64),
        p: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewCells(m));
        }
        Ok(Self {
            name: name.into(),
            m,
            domain,
            p: Box::new(p),
            dp: None,
        })
    }

    pub fn with_derivative(mut self, dp: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.dp = Some(Box::new(dp));
        self
    }

    /// Checks positivity, normalization, `Σ ṗ_i = 0` and agreement of `ṗ`
    /// with central differences at each probe point.
    pub fn validate(&self, probes: &[f64]) -> Result<()> {
        for &theta in probes {
            let p = self.probs(theta)?;
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidModel(alloc::format!(
                    "p({theta}) sums to {total}"
                )));
            }
            let dp = self.dprobs(theta)?;
            let dsum: f64 = dp.iter().sum();
            if dsum.abs() > 1e-8 {
                return Err(Error::InvalidModel(alloc::format!(
                    "derivative at {theta} sums to {dsum}"
                )));
            }
            if self.dp.is_some() {
                let fd = central_difference(&*self.p, theta);
                for (i, (a, b)) in dp.iter().zip(&fd).enumerate() {
                    if (a - b).abs() > 1e-6 * a.abs().max(1e-3) {
                        return Err(Error::InvalidModel(alloc::format!(
                            "derivative of cell {} at {theta}: analytic {a}, numeric {b}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn central_difference(p: &dyn Fn(f64) -> Vec<f64>, theta: f64) -> Vec<f64> {
    let h = 1e-6 * theta.abs().max(1.0);
    let up = p(theta + h);
    let down = p(theta - h);
    up.iter()
        .zip(&down)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

impl ParametricFamily for TabulatedFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn cells(&self) -> usize {
        self.m
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn probs(&self, theta: f64) -> Result<Vec<f64>> {
        self.check_domain(theta)?;
        let p = (self.p)(theta);
        if p.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: p.len(),
            });
        }
        if let Some((i, pi)) = p
            .iter()
            .enumerate()
            .find(|(_, pi)| !(pi.is_finite() && **pi > 0.0))
        {
            return Err(Error::DegenerateModel {
                cell: i + 1,
                prob: *pi,
            });
        }
        Ok(p)
    }

    fn dprobs(&self, theta: f64) -> Result<Vec<f64>> {
        self.check_domain(theta)?;
        let dp = match &self.dp {
            Some(d) => d(theta),
            None => central_difference(&*self.p, theta),
        };
        if dp.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: dp.len(),
            });
        }
        Ok(dp)
    }
}

fn check_cells(sample: &SampleCounts, family: &dyn ParametricFamily) -> Result<()> {
    if sample.len() != family.cells() {
        return Err(Error::DimensionMismatch {
            expected: family.cells(),
            found: sample.len(),
        });
    }
    Ok(())
}

/// `Σ ν_i ṗ_i(θ)/p_i(θ)`
pub fn score(sample: &SampleCounts, family: &dyn ParametricFamily, theta: f64) -> Result<f64> {
    check_cells(sample, family)?;
    let p = family.probs(theta)?;
    let dp = family.dprobs(theta)?;
    Ok(sample
        .counts()
        .iter()
        .zip(p.iter().zip(&dp))
        .filter(|(nu, _)| **nu > 0)
        .map(|(nu, (pi, dpi))| *nu as f64 * dpi / pi)
        .sum())
}

/// `Σ ν_i ln p_i(θ)` (the multinomial coefficient is omitted).
pub fn log_likelihood(
    sample: &SampleCounts,
    family: &dyn ParametricFamily,
    theta: f64,
) -> Result<f64> {
    check_cells(sample, family)?;
    let p = family.probs(theta)?;
    Ok(sample
        .counts()
        .iter()
        .zip(&p)
        .filter(|(nu, _)| **nu > 0)
        .map(|(nu, pi)| *nu as f64 * pi.ln())
        .sum())
}

/// Per-observation Fisher information `Γ(θ) = Σ ṗ_i²/p_i`.
pub fn fisher_information(family: &dyn ParametricFamily, theta: f64) -> Result<f64> {
    let p = family.probs(theta)?;
    let dp = family.dprobs(theta)?;
    Ok(p.iter().zip(&dp).map(|(pi, dpi)| dpi * dpi / pi).sum())
}

/// `q̂_i = Γ^{−1/2} ṗ_i/√p_i`, a unit vector orthogonal to `√p`.
pub fn normalized_scores(family: &dyn ParametricFamily, theta: f64) -> Result<UnitVector> {
    let p = family.probs(theta)?;
    let dp = family.dprobs(theta)?;
    let gamma: f64 = p.iter().zip(&dp).map(|(pi, dpi)| dpi * dpi / pi).sum();
    if gamma.is_nan() || gamma <= MIN_FISHER {
        return Err(Error::DegenerateScore(gamma));
    }
    let scale = 1.0 / gamma.sqrt();
    UnitVector::normalized(
        p.iter()
            .zip(&dp)
            .map(|(pi, dpi)| scale * dpi / pi.sqrt())
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Starting point; `0` when absent.
    pub init: Option<f64>,
    pub score_tol: f64,
    pub max_newton: usize,
    /// Range searched for `θ̂`. Newton iterates stay inside it, and it is
    /// scanned for a sign change of the score when Newton fails.
    pub bracket: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            init: None,
            score_tol: SCORE_TOL,
            max_newton: 100,
            bracket: (-20.0, 20.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub theta_hat: f64,
    /// `score(θ̂)`
    pub score_residual: f64,
    pub iterations: usize,
    /// Per-observation Fisher information at `θ̂`.
    pub fisher_at_hat: f64,
    pub converged: bool,
    pub log_likelihood: f64,
    pub used_bisection: bool,
}

/// Maximum likelihood for a one-parameter family.
///
/// Fisher-scoring Newton steps `θ ← θ + score/(nΓ)` with step halving
/// whenever the likelihood would drop; for exponential families such as
/// the power law this is exactly Newton's method. If that fails to reach
/// `|score| ≤ score_tol` within `max_newton` steps, the bracket is scanned
/// for a sign change of the score and bisected, then polished. A score
/// with no root in the bracket (e.g. all mass in an end cell, where the
/// likelihood keeps increasing) is reported as `NoBracket`.
pub fn mle_fit(
    sample: &SampleCounts,
    family: &dyn ParametricFamily,
    opts: &FitOptions,
) -> Result<FitResult> {
    check_cells(sample, family)?;
    let n = sample.n() as f64;
    let init = opts.init.unwrap_or(0.0);
    family.check_domain(init)?;

    let mut theta = init;
    let mut ll = log_likelihood(sample, family, theta)?;
    let mut s = score(sample, family, theta)?;
    let mut iterations = 0;

    while s.abs() > opts.score_tol && iterations < opts.max_newton {
        iterations += 1;
        let info = n * fisher_information(family, theta)?;
        if !info.is_finite() || info <= 0.0 {
            break;
        }
        let mut step = s / info;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = theta + step;
            let inside = cand >= opts.bracket.0 && cand <= opts.bracket.1;
            if inside && family.check_domain(cand).is_ok() {
                if let Ok(cll) = log_likelihood(sample, family, cand) {
                    if cll >= ll - 64.0 * f64::EPSILON * ll.abs().max(1.0) {
                        theta = cand;
                        ll = cll;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        s = score(sample, family, theta)?;
    }

    let mut used_bisection = false;
    if s.is_nan() || s.abs() > opts.score_tol {
        used_bisection = true;
        let (t, it) = bisect_score(sample, family, opts)?;
        iterations += it;
        theta = t;
        s = score(sample, family, theta)?;
        // polish with a few plain Newton steps
        for _ in 0..5 {
            if s.abs() <= opts.score_tol {
                break;
            }
            let info = n * fisher_information(family, theta)?;
            let cand = theta + s / info;
            if family.check_domain(cand).is_err() {
                break;
            }
            let cs = score(sample, family, cand)?;
            if cs.abs() >= s.abs() {
                break;
            }
            theta = cand;
            s = cs;
            iterations += 1;
        }
        ll = log_likelihood(sample, family, theta)?;
    }

    if s.is_nan() || s.abs() > opts.score_tol {
        return Err(Error::NoConvergence {
            iterations,
            theta,
            score: s,
        });
    }
    Ok(FitResult {
        theta_hat: theta,
        score_residual: s,
        iterations,
        fisher_at_hat: fisher_information(family, theta)?,
        converged: true,
        log_likelihood: ll,
        used_bisection,
    })
}

fn bisect_score(
    sample: &SampleCounts,
    family: &dyn ParametricFamily,
    opts: &FitOptions,
) -> Result<(f64, usize)> {
    let (lo, hi) = opts.bracket;
    let (dlo, dhi) = family.domain();
    let lo = lo.max(dlo);
    let hi = hi.min(dhi);
    let steps = 160;
    let grid = |k: usize| lo + (hi - lo) * k as f64 / steps as f64;
    let eval = |t: f64| {
        family
            .check_domain(t)
            .and_then(|_| score(sample, family, t))
            .ok()
    };

    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let t = grid(k);
        let Some(st) = eval(t) else { continue };
        if st == 0.0 {
            return Ok((t, k));
        }
        if let Some((pt, ps)) = prev {
            if ps.signum() != st.signum() {
                let (mut a, mut b, mut sa) = (pt, t, ps);
                let mut it = k;
                while it < k + 200 {
                    it += 1;
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let sm = score(sample, family, mid)?;
                    if sm.abs() <= opts.score_tol {
                        return Ok((mid, it));
                    }
                    if sm.signum() == sa.signum() {
                        a = mid;
                        sa = sm;
                    } else {
                        b = mid;
                    }
                }
                return Ok((0.5 * (a + b), it));
            }
        }
        prev = Some((t, st));
    }
    Err(Error::NoBracket { lo, hi })
}
