//! Argument definitions and the four subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfgof_core::montecarlo::{pairwise_sup_distances, EmpiricalCdf, StudyConfig};
use dfgof_core::parametric::{
    mle_fit, power_law_family, FitOptions, FitResult, ParametricFamily, PowerLaw,
};
use dfgof_core::statistics::{
    cvm_stat, ks_stat, p_value, pearson_chi2, StatisticKind, StatisticValue,
};
use dfgof_core::transforms::{
    components_y, components_y_hat, parametric_bundle, transform_parametric, transform_simple,
    transform_two_sample, two_sample_components,
};
use dfgof_core::{
    AnchorPair, AnchorPreset, BasisMode, ComponentVector, DiscreteModel, SampleCounts, Warning,
};
use serde_json::{json, Value};

use crate::cache::{cache_dir, null_table_cached};
use crate::error::{CliError, CliResult};
use crate::formats::{
    create_dir, fmt_f64, load_model_spec, parse_counts, read_file, sha256_hex, write_csv,
    write_json, ModelSpec, RunProvenance, ThetaSpec,
};
use crate::parallel;

/// Largest pairwise CDF distance for which a study is reported as
/// distribution free.
pub const CLOSENESS_THRESHOLD: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "dfgof",
    version,
    about = "Distribution-free goodness-of-fit tests for discrete data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the chi-square components and their rotation onto an anchor
    Transform(TransformArgs),
    /// Compute a statistic and its Monte Carlo p-value
    Test(TestArgs),
    /// Simulate the null distribution of a statistic under several models
    Simulate(SimulateArgs),
    /// Maximum likelihood fit of a parametric family
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    Diagonal,
    E1,
    #[value(name = "e1_e2")]
    E1E2,
    Plateau,
}

impl From<AnchorArg> for AnchorPreset {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Diagonal => AnchorPreset::Diagonal,
            AnchorArg::E1 => AnchorPreset::E1,
            AnchorArg::E1E2 => AnchorPreset::E1E2,
            AnchorArg::Plateau => AnchorPreset::Plateau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    GramSchmidt,
    Symmetric,
}

impl From<BasisArg> for BasisMode {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::GramSchmidt => BasisMode::GramSchmidt,
            BasisArg::Symmetric => BasisMode::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    #[value(name = "ks_z")]
    KsZ,
    #[value(name = "ks_y")]
    KsY,
    #[value(name = "cvm_z")]
    CvmZ,
    #[value(name = "cvm_y")]
    CvmY,
    Chi2,
}

impl From<StatArg> for StatisticKind {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::KsZ => StatisticKind::KsZ,
            StatArg::KsY => StatisticKind::KsY,
            StatArg::CvmZ => StatisticKind::CvmZ,
            StatArg::CvmY => StatisticKind::CvmY,
            StatArg::Chi2 => StatisticKind::PearsonChi2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// Three models on ten cells, n = 200, 10 000 replicates of ks_z
    #[value(name = "paper-fig1", alias = "reference")]
    Reference,
    /// The same models with 100 replicates
    Smoke,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Counts CSV with header `index,count`
    #[arg(long)]
    pub counts: PathBuf,
    /// Second sample for a two-sample comparison
    #[arg(long)]
    pub counts2: Option<PathBuf>,
    /// Model: JSON array of probabilities, family spec, "fit", or a path to a JSON file
    #[arg(long)]
    pub model: Option<String>,
    /// Parametric family (power_law)
    #[arg(long)]
    pub family: Option<String>,
    /// Parameter value of the family
    #[arg(long, conflicts_with = "fit")]
    pub theta: Option<f64>,
    /// Estimate the parameter by maximum likelihood
    #[arg(long)]
    pub fit: bool,
    /// Anchor; defaults to diagonal, or plateau for a parametric model
    #[arg(long, value_enum)]
    pub anchor: Option<AnchorArg>,
    /// Completion of the 4-D bases for parametric models
    #[arg(long, value_enum, default_value = "gram-schmidt")]
    pub basis: BasisArg,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "ks_z")]
    pub stat: StatArg,
    /// Null table size
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Model probabilities (JSON array or file); repeat for several models
    #[arg(long)]
    pub model: Vec<String>,
    /// Sample size
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub stat: Option<StatArg>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum)]
    pub anchor: Option<AnchorArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long, default_value = "power_law")]
    pub family: String,
    /// Starting value for the iterations
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Transform(a) => cmd_transform(&a),
        Command::Test(a) => cmd_test(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
    }
}

fn threads_or_all(threads: usize) -> usize {
    if threads > 0 {
        threads
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

fn hex64(x: u64) -> String {
    format!("{x:016x}")
}

fn family_by_name(name: &str, m: usize) -> CliResult<PowerLaw> {
    match name {
        "power_law" => Ok(power_law_family(m)?),
        other => Err(CliError::input(format!(
            "unknown family '{other}' (available: power_law)"
        ))),
    }
}

fn load_counts(path: &Path) -> CliResult<(SampleCounts, String)> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::input(format!("{}: not UTF-8", path.display())))?;
    Ok((
        parse_counts(text, &path.display().to_string())?,
        sha256_hex(&bytes),
    ))
}

pub enum Problem {
    Simple {
        sample: SampleCounts,
        model: DiscreteModel,
        anchor: AnchorPair,
    },
    TwoSample {
        first: SampleCounts,
        second: SampleCounts,
        anchor: AnchorPair,
    },
    Parametric {
        sample: SampleCounts,
        family: PowerLaw,
        theta: ThetaSpec,
        anchor: AnchorPair,
        mode: BasisMode,
    },
}

/// Validates the model-related flags and gathers the inputs. The returned
/// JSON records everything that determines the result.
pub fn resolve(args: &InputArgs) -> CliResult<(Problem, Value)> {
    let (sample, counts_hash) = load_counts(&args.counts)?;
    let m = sample.len();
    let mut config = json!({ "counts_sha256": counts_hash });
    let spec = args
        .model
        .as_deref()
        .map(load_model_spec)
        .transpose()?
        .map(|(s, _)| s);

    if let Some(path2) = &args.counts2 {
        if spec.is_some() || args.family.is_some() || args.theta.is_some() || args.fit {
            return Err(CliError::input(
                "--counts2 compares two samples and takes no model",
            ));
        }
        let (second, hash2) = load_counts(path2)?;
        let preset: AnchorPreset = args.anchor.map_or(AnchorPreset::Diagonal, Into::into);
        if preset.has_rhat() {
            return Err(CliError::input(format!(
                "anchor {preset} needs a parametric family"
            )));
        }
        if second.len() != m {
            return Err(CliError::input(format!(
                "--counts2 has {} cells, --counts has {m}",
                second.len()
            )));
        }
        config["counts2_sha256"] = json!(hash2);
        config["anchor"] = json!(preset.as_str());
        let anchor = AnchorPair::preset(preset, m)?;
        return Ok((
            Problem::TwoSample {
                first: sample,
                second,
                anchor,
            },
            config,
        ));
    }

    let flag_theta = match (args.theta, args.fit) {
        (Some(t), _) => Some(ThetaSpec::Value(t)),
        (None, true) => Some(ThetaSpec::Fit),
        (None, false) => None,
    };
    let parametric = match (spec, &args.family) {
        (Some(ModelSpec::Inline(probs)), None) => {
            if flag_theta.is_some() {
                return Err(CliError::input("--theta/--fit need a parametric family"));
            }
            let preset: AnchorPreset = args.anchor.map_or(AnchorPreset::Diagonal, Into::into);
            if preset.has_rhat() {
                return Err(CliError::input(format!(
                    "anchor {preset} needs a parametric family (--family)"
                )));
            }
            config["model"] = json!(probs);
            config["anchor"] = json!(preset.as_str());
            let model =
                DiscreteModel::new(probs).map_err(|e| CliError::input(format!("--model: {e}")))?;
            if model.len() != m {
                return Err(CliError::input(format!(
                    "--model has {} cells, counts have {m}",
                    model.len()
                )));
            }
            let anchor = AnchorPair::preset(preset, m)?;
            return Ok((
                Problem::Simple {
                    sample,
                    model,
                    anchor,
                },
                config,
            ));
        }
        (Some(ModelSpec::Inline(_)), Some(_)) => {
            return Err(CliError::input(
                "--model with probabilities conflicts with --family",
            ));
        }
        (Some(ModelSpec::Family { family, theta }), flag_family) => {
            let name = match (family, flag_family) {
                (Some(a), Some(b)) if &a != b => {
                    return Err(CliError::input(format!(
                        "--model names family '{a}' but --family is '{b}'"
                    )))
                }
                (Some(a), _) => a,
                (None, Some(b)) => b.clone(),
                (None, None) => return Err(CliError::input("--model \"fit\" needs --family")),
            };
            (name, flag_theta.unwrap_or(theta))
        }
        (None, Some(name)) => {
            let theta =
                flag_theta.ok_or_else(|| CliError::input("--family needs --theta or --fit"))?;
            (name.clone(), theta)
        }
        (None, None) => return Err(CliError::input("a model is required: --model or --family")),
    };

    let (name, theta) = parametric;
    let family = family_by_name(&name, m)?;
    let preset: AnchorPreset = args.anchor.map_or(AnchorPreset::Plateau, Into::into);
    if !preset.has_rhat() {
        return Err(CliError::input(format!(
            "anchor {preset} has no second direction; parametric models take e1_e2 or plateau"
        )));
    }
    let mode: BasisMode = args.basis.into();
    config["family"] = json!(name);
    config["theta"] = json!(theta);
    config["anchor"] = json!(preset.as_str());
    config["basis"] = json!(match mode {
        BasisMode::GramSchmidt => "gram-schmidt",
        BasisMode::Symmetric => "symmetric",
    });
    let anchor = AnchorPair::preset(preset, m)?;
    Ok((
        Problem::Parametric {
            sample,
            family,
            theta,
            anchor,
            mode,
        },
        config,
    ))
}

/// Unrotated and rotated components of a resolved problem.
pub struct Components {
    pub y: ComponentVector,
    pub z: ComponentVector,
    pub kind: &'static str,
    pub probs: Vec<f64>,
    pub n: u64,
    pub anchor: AnchorPair,
    pub theta: Option<f64>,
    pub fit: Option<FitResult>,
}

pub fn compute(problem: Problem) -> CliResult<Components> {
    match problem {
        Problem::Simple {
            sample,
            model,
            anchor,
        } => {
            let y = components_y(&sample, &model)?;
            let z = transform_simple(&y, &model, &anchor)?;
            let probs = model.probs().to_vec();
            Ok(Components {
                y,
                z,
                kind: "simple",
                probs,
                n: sample.n(),
                anchor,
                theta: None,
                fit: None,
            })
        }
        Problem::TwoSample {
            first,
            second,
            anchor,
        } => {
            let (y, pooled) = two_sample_components(&first, &second)?;
            let z = transform_two_sample(&y, &pooled, &anchor)?;
            let n = first.n() + second.n();
            let probs = pooled.probs().to_vec();
            Ok(Components {
                y,
                z,
                kind: "two_sample",
                probs,
                n,
                anchor,
                theta: None,
                fit: None,
            })
        }
        Problem::Parametric {
            sample,
            family,
            theta,
            anchor,
            mode,
        } => {
            let (theta, fit) = match theta {
                ThetaSpec::Value(t) => (t, None),
                ThetaSpec::Fit => {
                    let fit = mle_fit(&sample, &family, &FitOptions::default())?;
                    (fit.theta_hat, Some(fit))
                }
            };
            let y = components_y_hat(&sample, &family, theta)?;
            let bundle = parametric_bundle(&family, theta, &anchor, mode)?;
            let z = transform_parametric(&y, &bundle)?;
            let probs = family.probs(theta)?;
            Ok(Components {
                y,
                z,
                kind: "parametric",
                probs,
                n: sample.n(),
                anchor,
                theta: Some(theta),
                fit,
            })
        }
    }
}

fn warning_text(w: &Warning) -> String {
    match w {
        Warning::IllConditioned { gap } => {
            format!("model is within {gap:e} of the anchor; rotation is ill-conditioned")
        }
        Warning::SmallCell { min_expected } => format!("smallest expected count is {min_expected}"),
        Warning::OrthogonalityResidual { q, qhat } => {
            format!("components are not orthogonal to the fitted model: <Y,q> = {q:e}, <Y,qhat> = {qhat:e}")
        }
    }
}

fn warnings_json(c: &Components) -> Value {
    let mut all: Vec<String> = c.z.warnings().iter().map(warning_text).collect();
    let min_expected = c
        .probs
        .iter()
        .fold(f64::INFINITY, |a, p| a.min(p * c.n as f64));
    if min_expected < 5.0 {
        all.push(warning_text(&Warning::SmallCell { min_expected }));
    }
    json!(all)
}

fn fit_json(fit: &FitResult) -> Value {
    json!({
        "theta_hat": fit.theta_hat,
        "score_residual": fit.score_residual,
        "iterations": fit.iterations,
        "fisher_information": fit.fisher_at_hat,
        "log_likelihood": fit.log_likelihood,
        "converged": fit.converged,
        "used_bisection": fit.used_bisection,
    })
}

fn anchor_json(anchor: &AnchorPair) -> Value {
    let tag = anchor.tag();
    json!({ "preset": tag.preset.as_str(), "fingerprint": hex64(tag.fingerprint), "has_rhat": tag.has_rhat })
}

fn describe(c: &Components) -> Value {
    json!({
        "kind": c.kind,
        "m": c.y.len(),
        "n": c.n,
        "probabilities": c.probs,
        "model_fingerprint": hex64(c.y.provenance().model),
        "anchor": anchor_json(&c.anchor),
        "theta": c.theta,
        "fit": c.fit.as_ref().map(fit_json),
        "warnings": warnings_json(c),
    })
}

pub fn cmd_transform(args: &TransformArgs) -> CliResult<()> {
    let (problem, mut config) = resolve(&args.input)?;
    config["command"] = json!("transform");
    let prov = RunProvenance::new("transform", None, &config);
    let c = compute(problem)?;
    let (ycol, zcol) = if c.kind == "parametric" {
        ("yhat", "zhat")
    } else {
        ("y", "z")
    };
    let rows: Vec<Vec<String>> =
        c.y.values()
            .iter()
            .zip(c.z.values())
            .enumerate()
            .map(|(i, (y, z))| vec![(i + 1).to_string(), fmt_f64(*y), fmt_f64(*z)])
            .collect();
    create_dir(&args.out)?;
    write_csv(
        &args.out.join("components.csv"),
        &prov,
        &["index", ycol, zcol],
        &rows,
    )?;
    let sidecar = json!({
        "provenance": prov,
        "config": config,
        "columns": ["index", ycol, zcol],
        "components": describe(&c),
    });
    write_json(&args.out.join("provenance.json"), &sidecar)
}

fn observed_statistic(kind: StatisticKind, c: &Components) -> StatisticValue {
    match kind {
        StatisticKind::KsZ => ks_stat(&c.z),
        StatisticKind::CvmZ => cvm_stat(&c.z),
        StatisticKind::KsY => ks_stat(&c.y),
        StatisticKind::CvmY => cvm_stat(&c.y),
        StatisticKind::PearsonChi2 => pearson_chi2(&c.y),
    }
}

pub fn cmd_test(args: &TestArgs) -> CliResult<()> {
    let kind: StatisticKind = args.stat.into();
    let (problem, mut config) = resolve(&args.input)?;
    config["command"] = json!("test");
    config["statistic"] = json!(kind.as_str());
    config["reps"] = json!(args.reps);
    config["seed"] = json!(args.seed);
    let prov = RunProvenance::new("test", Some(args.seed), &config);
    if kind.is_distribution_free() && args.reps < dfgof_core::statistics::MIN_TABLE_REPS {
        return Err(CliError::input(format!(
            "--reps must be at least {} for p-values",
            dfgof_core::statistics::MIN_TABLE_REPS
        )));
    }
    let c = compute(problem)?;
    let obs = observed_statistic(kind, &c);

    let (p, table_json, note) = if kind.is_distribution_free() {
        let table = null_table_cached(
            cache_dir().as_deref(),
            kind,
            &c.anchor,
            args.reps,
            args.seed,
            threads_or_all(args.threads),
        )?;
        let p = p_value(&obs, &table)?;
        let tj = json!({
            "statistic": table.kind().as_str(),
            "m": table.m(),
            "anchor": anchor_json(&c.anchor),
            "reps": table.reps(),
            "seed": table.seed(),
            "degrees_of_freedom": table.degrees_of_freedom(),
            "quantiles": {
                "0.5": table.quantile(0.5),
                "0.9": table.quantile(0.9),
                "0.95": table.quantile(0.95),
                "0.99": table.quantile(0.99),
            },
        });
        (Some(p), tj, Value::Null)
    } else {
        let note = format!(
            "{kind} has a null distribution that depends on the model; no p-value is reported"
        );
        (None, Value::Null, json!(note))
    };

    let report = json!({
        "provenance": prov,
        "statistic": kind.as_str(),
        "value": obs.value,
        "p_value": p,
        "m": obs.m,
        "n": c.n,
        "anchor": anchor_json(&c.anchor),
        "seed": args.seed,
        "components": describe(&c),
        "table": table_json,
        "note": note,
    });
    create_dir(&args.out)?;
    write_json(&args.out.join("report.json"), &report)
}

fn study_from_args(args: &SimulateArgs) -> CliResult<(StudyConfig, Value)> {
    let mut config = json!({ "command": "simulate", "seed": args.seed });
    let mut study = match (args.preset, args.model.is_empty()) {
        (Some(_), false) => {
            return Err(CliError::input(
                "--preset and --model are mutually exclusive",
            ))
        }
        (Some(PresetArg::Reference), true) => {
            config["preset"] = json!("paper-fig1");
            StudyConfig::reference(args.seed)?
        }
        (Some(PresetArg::Smoke), true) => {
            config["preset"] = json!("smoke");
            StudyConfig::smoke(args.seed)?
        }
        (None, false) => {
            let mut models = Vec::new();
            let mut labels = Vec::new();
            for (i, spec) in args.model.iter().enumerate() {
                let probs = match load_model_spec(spec)?.0 {
                    ModelSpec::Inline(p) => p,
                    ModelSpec::Family { .. } => {
                        return Err(CliError::input(
                            "simulate takes models as probability arrays",
                        ))
                    }
                };
                models.push(
                    DiscreteModel::new(probs)
                        .map_err(|e| CliError::input(format!("--model {}: {e}", i + 1)))?,
                );
                labels.push(format!("model{}", i + 1));
            }
            config["models"] = json!(models
                .iter()
                .map(|m| m.probs().to_vec())
                .collect::<Vec<_>>());
            let n = args
                .n
                .ok_or_else(|| CliError::input("--n is required with --model"))?;
            StudyConfig {
                models,
                labels,
                n,
                reps: 10_000,
                statistic: StatisticKind::KsZ,
                anchor: AnchorPreset::Diagonal,
                seed: args.seed,
                threads: 1,
            }
        }
        (None, true) => return Err(CliError::input("give --preset or at least one --model")),
    };
    if let Some(n) = args.n {
        study.n = n;
    }
    if let Some(s) = args.stat {
        study.statistic = s.into();
    }
    if let Some(r) = args.reps {
        study.reps = r;
    }
    if let Some(a) = args.anchor {
        let preset: AnchorPreset = a.into();
        if preset.has_rhat() {
            return Err(CliError::input(format!(
                "anchor {preset} is for parametric models; use diagonal or e1"
            )));
        }
        study.anchor = preset;
    }
    study.threads = threads_or_all(args.threads);
    study.validate()?;
    config["n"] = json!(study.n);
    config["reps"] = json!(study.reps);
    config["statistic"] = json!(study.statistic.as_str());
    config["anchor"] = json!(study.anchor.as_str());
    Ok((study, config))
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let (study, config) = study_from_args(args)?;
    let prov = RunProvenance::new("simulate", Some(args.seed), &config);
    let draws = parallel::run_study(&study)?;
    let cdfs = draws
        .iter()
        .map(|d| EmpiricalCdf::new(d.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    create_dir(&args.out)?;

    let mut rows = Vec::with_capacity(study.models.len() * study.reps);
    for (label, values) in study.labels.iter().zip(&draws) {
        for (i, v) in values.iter().enumerate() {
            rows.push(vec![label.clone(), (i + 1).to_string(), fmt_f64(*v)]);
        }
    }
    write_csv(
        &args.out.join("replicates.csv"),
        &prov,
        &["model", "replicate", "value"],
        &rows,
    )?;

    let mut files = Vec::new();
    for (label, cdf) in study.labels.iter().zip(&cdfs) {
        let name = format!("cdf_{label}.csv");
        let rows: Vec<Vec<String>> = cdf
            .curve()
            .iter()
            .map(|(x, f)| vec![fmt_f64(*x), fmt_f64(*f)])
            .collect();
        write_csv(&args.out.join(&name), &prov, &["value", "cdf"], &rows)?;
        files.push(name);
    }

    let pairs = pairwise_sup_distances(&cdfs);
    let max_distance = pairs.iter().fold(0.0f64, |a, (_, _, d)| a.max(*d));
    let models: Vec<Value> = study
        .labels
        .iter()
        .zip(&study.models)
        .zip(&cdfs)
        .zip(&files)
        .map(|(((label, model), cdf), file)| {
            let mean = cdf.values().iter().sum::<f64>() / cdf.len() as f64;
            json!({
                "label": label,
                "probabilities": model.probs(),
                "fingerprint": hex64(model.fingerprint()),
                "cdf_file": file,
                "mean": mean,
                "quantiles": {
                    "0.5": cdf.quantile(0.5),
                    "0.9": cdf.quantile(0.9),
                    "0.95": cdf.quantile(0.95),
                    "0.99": cdf.quantile(0.99),
                },
            })
        })
        .collect();
    let pairwise: Vec<Value> = pairs
        .iter()
        .map(|(i, j, d)| json!({ "a": study.labels[*i], "b": study.labels[*j], "sup_distance": d }))
        .collect();
    let summary = json!({
        "provenance": prov,
        "config": config,
        "statistic": study.statistic.as_str(),
        "m": study.m(),
        "n": study.n,
        "reps": study.reps,
        "seed": study.seed,
        "anchor": study.anchor.as_str(),
        "models": models,
        "pairwise": pairwise,
        "max_distance": max_distance,
        "threshold": CLOSENESS_THRESHOLD,
        "distribution_free": max_distance <= CLOSENESS_THRESHOLD,
    });
    write_json(&args.out.join("summary.json"), &summary)
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let (sample, hash) = load_counts(&args.counts)?;
    let family = family_by_name(&args.family, sample.len())?;
    let config = json!({
        "command": "fit",
        "counts_sha256": hash,
        "family": args.family,
        "init": args.theta,
    });
    let prov = RunProvenance::new("fit", None, &config);
    let opts = FitOptions {
        init: args.theta,
        ..FitOptions::default()
    };
    let fit = mle_fit(&sample, &family, &opts)?;
    let report = json!({
        "provenance": prov,
        "family": family.name(),
        "m": sample.len(),
        "n": sample.n(),
        "fit": fit_json(&fit),
        "probabilities": family.probs(fit.theta_hat)?,
    });
    create_dir(&args.out)?;
    write_json(&args.out.join("fit.json"), &report)
}
