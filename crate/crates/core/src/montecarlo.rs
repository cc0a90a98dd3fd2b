//! Multinomial sampling, null-distribution studies, covariance checks and
//! empirical distribution functions.
//!
//! Every replicate draws from its own ChaCha8 stream derived from
//! `(seed, index)`, so results do not depend on the order in which
//! replicates are executed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::anchor::{AnchorPair, AnchorPreset};
use crate::error::{Error, Result, Warning};
use crate::model::{DiscreteModel, SampleCounts};
use crate::parametric::{mle_fit, FitOptions, ParametricFamily};
use crate::rotations::BasisMode;
use crate::special::regularized_incomplete_beta;
use crate::statistics::StatisticKind;
use crate::transforms::{
    components_y, components_y_hat, parametric_bundle, transform_parametric, transform_simple,
};

/// Smallest cell probability accepted for a study model.
pub const MIN_CELL_PROB: f64 = 1e-12;

/// Smallest replicate count of a study.
pub const MIN_STUDY_REPS: usize = 100;

/// Seed of the uniform-spacings model in the reference study.
pub const REFERENCE_SPACINGS_SEED: u64 = 19_940_612;

/// Expected cell count below which covariance checks flag small cells.
pub const SMALL_CELL_EXPECTATION: f64 = 10.0;

/// Replicates of model `j` use streams `j · 2⁴⁰ + i`.
pub const MODEL_STREAM_STRIDE: u64 = 1 << 40;

/// Independent generator for replicate `stream` of a run seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(
    model: &DiscreteModel,
    n: u64,
    rng: &mut R,
) -> Result<SampleCounts> {
    if n == 0 {
        return Err(Error::InvalidCounts(
            "sample size must be at least 1".into(),
        ));
    }
    let probs = model.probs();
    let m = probs.len();
    let mut counts = vec![0u64; m];
    let mut remaining = n;
    let mut mass = 1.0;
    for (i, p) in probs.iter().enumerate().take(m - 1) {
        if remaining == 0 {
            break;
        }
        let cond = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let k = Binomial::new(remaining, cond)
            .map_err(|e| Error::InvalidConfig(format!("binomial draw: {e}")))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts[m - 1] += remaining;
    SampleCounts::new(counts)
}

/// How a study model is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelRecipe {
    /// Spacings of `m − 1` sorted uniforms drawn from `seed`.
    RandomSpacings { seed: u64 },
    /// `F(i/m) − F((i−1)/m)` for the Beta(a, b) distribution function.
    BetaIncrements { a: f64, b: f64 },
}

pub fn make_study_model(recipe: ModelRecipe, m: usize) -> Result<DiscreteModel> {
    if m < 2 {
        return Err(Error::TooFewCells(m));
    }
    let probs = match recipe {
        ModelRecipe::RandomSpacings { seed } => {
            let mut rng = stream_rng(seed, 0);
            let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.random::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            let mut p: Vec<f64> = cuts
                .iter()
                .map(|c| {
                    let d = c - prev;
                    prev = *c;
                    d
                })
                .collect();
            p.push(1.0 - prev);
            p
        }
        ModelRecipe::BetaIncrements { a, b } => {
            let mut prev = 0.0;
            let mut p = Vec::with_capacity(m);
            for i in 1..=m {
                let f = regularized_incomplete_beta(a, b, i as f64 / m as f64)?;
                p.push(f - prev);
                prev = f;
            }
            p
        }
    };
    if let Some((cell, prob)) = probs.iter().enumerate().find(|(_, p)| **p < MIN_CELL_PROB) {
        return Err(Error::DegenerateModel { cell, prob: *prob });
    }
    DiscreteModel::new(probs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub models: Vec<DiscreteModel>,
    pub labels: Vec<String>,
    pub n: u64,
    pub reps: usize,
    pub statistic: StatisticKind,
    pub anchor: AnchorPreset,
    pub seed: u64,
    /// Worker count for parallel runners; results never depend on it.
    pub threads: usize,
}

impl StudyConfig {
    /// Builds a study from recipes.
    pub fn from_recipes(
        recipes: &[(String, ModelRecipe)],
        m: usize,
        n: u64,
        reps: usize,
        statistic: StatisticKind,
        anchor: AnchorPreset,
        seed: u64,
    ) -> Result<Self> {
        let models = recipes
            .iter()
            .map(|(_, r)| make_study_model(*r, m))
            .collect::<Result<Vec<_>>>()?;
        let labels = recipes.iter().map(|(l, _)| l.clone()).collect();
        let config = Self {
            models,
            labels,
            n,
            reps,
            statistic,
            anchor,
            seed,
            threads: 1,
        };
        config.validate()?;
        Ok(config)
    }

    /// Three models on ten cells (uniform spacings, Beta(3,3) and
    /// Beta(0.8,1.5) increments), `n = 200`, 10 000 replicates of `ks_z`
    /// under the diagonal anchor.
    pub fn reference(seed: u64) -> Result<Self> {
        Self::from_recipes(
            &reference_recipes(),
            10,
            200,
            10_000,
            StatisticKind::KsZ,
            AnchorPreset::Diagonal,
            seed,
        )
    }

    /// The reference models with 100 replicates.
    pub fn smoke(seed: u64) -> Result<Self> {
        Self::from_recipes(
            &reference_recipes(),
            10,
            200,
            100,
            StatisticKind::KsZ,
            AnchorPreset::Diagonal,
            seed,
        )
    }

    pub fn m(&self) -> usize {
        self.models.first().map_or(0, DiscreteModel::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::InvalidConfig(
                "study needs at least one model".into(),
            ));
        }
        if self.labels.len() != self.models.len() {
            return Err(Error::InvalidConfig("one label per model required".into()));
        }
        let m = self.m();
        if let Some(bad) = self.models.iter().find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        if self.reps < MIN_STUDY_REPS {
            return Err(Error::InvalidConfig(format!(
                "study needs at least {MIN_STUDY_REPS} replicates"
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig(
                "sample size must be at least 1".into(),
            ));
        }
        if self.threads == 0 {
            return Err(Error::InvalidConfig(
                "thread count must be at least 1".into(),
            ));
        }
        if self.models.len() as u64 > u64::MAX / MODEL_STREAM_STRIDE
            || self.reps as u64 >= MODEL_STREAM_STRIDE
        {
            return Err(Error::InvalidConfig(
                "study too large for the stream layout".into(),
            ));
        }
        Ok(())
    }

    /// Immutable per-run state shared by all replicates.
    pub fn prepare(&self) -> Result<PreparedStudy<'_>> {
        self.validate()?;
        let anchor = AnchorPair::preset(self.anchor, self.m())?.primary();
        Ok(PreparedStudy {
            config: self,
            anchor,
        })
    }
}

fn reference_recipes() -> Vec<(String, ModelRecipe)> {
    vec![
        (
            "uniform_spacings".into(),
            ModelRecipe::RandomSpacings {
                seed: REFERENCE_SPACINGS_SEED,
            },
        ),
        (
            "beta_3_3".into(),
            ModelRecipe::BetaIncrements { a: 3.0, b: 3.0 },
        ),
        (
            "beta_0.8_1.5".into(),
            ModelRecipe::BetaIncrements { a: 0.8, b: 1.5 },
        ),
    ]
}

#[derive(Debug, Clone)]
pub struct PreparedStudy<'a> {
    config: &'a StudyConfig,
    anchor: AnchorPair,
}

impl PreparedStudy<'_> {
    pub fn config(&self) -> &StudyConfig {
        self.config
    }

    /// Statistic of replicate `rep` under model `model`.
    pub fn replicate(&self, model: usize, rep: usize) -> Result<f64> {
        let cfg = self.config;
        let p = &cfg.models[model];
        let mut rng = stream_rng(cfg.seed, model as u64 * MODEL_STREAM_STRIDE + rep as u64);
        let sample = sample_multinomial(p, cfg.n, &mut rng)?;
        let y = components_y(&sample, p)?;
        if cfg.statistic.uses_rotation() {
            let z = transform_simple(&y, p, &self.anchor)?;
            Ok(cfg.statistic.evaluate(z.values()))
        } else {
            Ok(cfg.statistic.evaluate(y.values()))
        }
    }
}

/// All replicate statistics, one list per model, in replicate order.
pub fn run_replicates(config: &StudyConfig) -> Result<Vec<Vec<f64>>> {
    let prepared = config.prepare()?;
    (0..config.models.len())
        .map(|j| (0..config.reps).map(|i| prepared.replicate(j, i)).collect())
        .collect()
}

pub fn run_null_study(config: &StudyConfig) -> Result<Vec<EmpiricalCdf>> {
    run_replicates(config)?
        .into_iter()
        .map(EmpiricalCdf::new)
        .collect()
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig(
                "empirical CDF of an empty sample".into(),
            ));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidConfig(
                "empirical CDF sample contains NaN".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `#{x_i ≤ x} / B`
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Smallest sample value `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let b = self.values.len();
        let k = (p.clamp(0.0, 1.0) * b as f64).ceil() as usize;
        self.values[k.clamp(1, b) - 1]
    }

    /// `(x, F(x))` at every distinct sample value.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        let b = self.values.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            let f = (i + 1) as f64 / b;
            match out.last_mut() {
                Some(last) if last.0 == *v => last.1 = f,
                _ => out.push((*v, f)),
            }
        }
        out
    }
}

/// `sup_x |F_a(x) − F_b(x)|` over the pooled support.
pub fn cdf_sup_distance(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (x, y) = (&a.values, &b.values);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let t = match (x.get(i), y.get(j)) {
            (Some(u), Some(v)) => u.min(*v),
            (Some(u), None) => *u,
            (None, Some(v)) => *v,
            (None, None) => break,
        };
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// `(i, j, d(F_i, F_j))` for every pair `i < j`.
pub fn pairwise_sup_distances(cdfs: &[EmpiricalCdf]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..cdfs.len() {
        for j in i + 1..cdfs.len() {
            out.push((i, j, cdf_sup_distance(&cdfs[i], &cdfs[j])));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    /// Largest entrywise deviation of the empirical covariance from the
    /// target projection.
    pub deviation: f64,
    pub warning: Option<Warning>,
}

struct CovAccumulator {
    m: usize,
    count: usize,
    sum: Vec<f64>,
    cross: Vec<f64>,
}

impl CovAccumulator {
    fn new(m: usize) -> Self {
        Self {
            m,
            count: 0,
            sum: vec![0.0; m],
            cross: vec![0.0; m * m],
        }
    }

    fn push(&mut self, z: &[f64]) {
        self.count += 1;
        for i in 0..self.m {
            self.sum[i] += z[i];
            for j in 0..self.m {
                self.cross[i * self.m + j] += z[i] * z[j];
            }
        }
    }

    /// Max deviation from `I − Σ_k t_k t_kᵀ`.
    fn deviation(&self, targets: &[&[f64]]) -> f64 {
        let b = self.count as f64;
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                let cov = (self.cross[i * self.m + j] - self.sum[i] * self.sum[j] / b) / (b - 1.0);
                let mut target = if i == j { 1.0 } else { 0.0 };
                for t in targets {
                    target -= t[i] * t[j];
                }
                worst = worst.max((cov - target).abs());
            }
        }
        worst
    }
}

fn small_cell(model: &DiscreteModel, n: u64) -> Option<Warning> {
    let min_expected = model.min_expected(n);
    (min_expected < SMALL_CELL_EXPECTATION).then_some(Warning::SmallCell { min_expected })
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::InvalidConfig(
            "covariance check needs at least 2 replicates".into(),
        ));
    }
    Ok(())
}

/// Empirical covariance of `reps` simulated `Z` vectors against `I − rrᵀ`.
pub fn covariance_check(
    model: &DiscreteModel,
    anchor: &AnchorPair,
    n: u64,
    reps: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    check_reps(reps)?;
    let anchor = anchor.primary();
    let mut acc = CovAccumulator::new(model.len());
    for i in 0..reps {
        let mut rng = stream_rng(seed, i as u64);
        let sample = sample_multinomial(model, n, &mut rng)?;
        let z = transform_simple(&components_y(&sample, model)?, model, &anchor)?;
        acc.push(z.values());
    }
    Ok(CovarianceReport {
        deviation: acc.deviation(&[anchor.r()]),
        warning: small_cell(model, n),
    })
}

/// Estimated-parameter variant: each replicate is drawn from `p(θ₀)`,
/// refitted, and rotated at its own `θ̂`; the target is `I − rrᵀ − r̂r̂ᵀ`.
#[allow(clippy::too_many_arguments)]
pub fn covariance_check_parametric(
    family: &dyn ParametricFamily,
    theta0: f64,
    anchor: &AnchorPair,
    mode: BasisMode,
    n: u64,
    reps: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    check_reps(reps)?;
    let rhat = anchor.rhat().ok_or(Error::InvalidAnchor(
        "estimated-parameter check needs an anchor with rhat",
    ))?;
    let truth = DiscreteModel::new(family.probs(theta0)?)?;
    let opts = FitOptions {
        init: Some(theta0),
        ..FitOptions::default()
    };
    let mut acc = CovAccumulator::new(truth.len());
    for i in 0..reps {
        let mut rng = stream_rng(seed, i as u64);
        let sample = sample_multinomial(&truth, n, &mut rng)?;
        let fit = mle_fit(&sample, family, &opts)?;
        let yhat = components_y_hat(&sample, family, fit.theta_hat)?;
        let bundle = parametric_bundle(family, fit.theta_hat, anchor, mode)?;
        acc.push(transform_parametric(&yhat, &bundle)?.values());
    }
    Ok(CovarianceReport {
        deviation: acc.deviation(&[anchor.r(), rhat]),
        warning: small_cell(&truth, n),
    })
}
