use dfgof_core::montecarlo::{
    cdf_sup_distance, covariance_check, covariance_check_parametric, make_study_model,
    pairwise_sup_distances, run_null_study, sample_multinomial, stream_rng, EmpiricalCdf,
    ModelRecipe, StudyConfig,
};
use dfgof_core::parametric::power_law_family;
use dfgof_core::statistics::{cvm_stat, ks_stat, null_table, p_value, pearson_chi2, StatisticKind};
use dfgof_core::transforms::{components_y, transform_simple};
use dfgof_core::{AnchorPair, AnchorPreset, BasisMode, DiscreteModel, SampleCounts};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for k in 1..intervals {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn multinomial_concentrates() {
    let p = DiscreteModel::uniform(2).unwrap();
    let c = sample_multinomial(&p, 1_000_000, &mut stream_rng(2024, 0)).unwrap();
    let share = c.counts()[0] as f64 / 1e6;
    assert!((share - 0.5).abs() <= 0.002, "{share}");
}

#[test]
fn beta_increment_matches_quadrature() {
    let p = make_study_model(ModelRecipe::BetaIncrements { a: 3.0, b: 3.0 }, 10).unwrap();
    let density = |x: f64| 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let oracle = simpson(density, 0.4, 0.5, 200);
    assert!((p.probs()[4] - oracle).abs() <= 1e-12);
    assert!((p.probs()[4] - 0.18256).abs() <= 1e-12);
    // Beta(0.8, 1.5) has an integrable singularity at 0, so check a later cell
    let q = make_study_model(ModelRecipe::BetaIncrements { a: 0.8, b: 1.5 }, 10).unwrap();
    let beta = libm::exp(libm::lgamma(2.3) - libm::lgamma(0.8) - libm::lgamma(1.5));
    let density = |x: f64| beta * x.powf(-0.2) * (1.0 - x).sqrt();
    assert!((q.probs()[5] - simpson(density, 0.5, 0.6, 2000)).abs() <= 1e-10);
}

#[test]
fn rotated_statistic_is_distribution_free_and_raw_one_is_not() {
    let cfg = StudyConfig::reference(42).unwrap();
    let z = pairwise_sup_distances(&run_null_study(&cfg).unwrap());
    assert!(z.iter().all(|(_, _, d)| *d <= 0.05), "{z:?}");
    let cfg = StudyConfig {
        statistic: StatisticKind::KsY,
        ..cfg
    };
    let y = pairwise_sup_distances(&run_null_study(&cfg).unwrap());
    assert!(y.iter().any(|(_, _, d)| *d >= 0.1), "{y:?}");
}

#[test]
fn covariance_of_rotated_components() {
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, 5).unwrap();
    let models = [
        DiscreteModel::new(vec![0.1, 0.15, 0.2, 0.25, 0.3]).unwrap(),
        make_study_model(ModelRecipe::BetaIncrements { a: 3.0, b: 3.0 }, 5).unwrap(),
    ];
    for model in &models {
        let rep = covariance_check(model, &anchor, 20_000, 20_000, 7).unwrap();
        assert!(rep.deviation <= 0.05, "{}", rep.deviation);
        assert!(rep.warning.is_none());
    }
}

#[test]
fn covariance_of_fitted_rotated_components() {
    let f = power_law_family(5).unwrap();
    let anchor = AnchorPair::preset(AnchorPreset::Plateau, 5).unwrap();
    let rep =
        covariance_check_parametric(&f, 1.0, &anchor, BasisMode::GramSchmidt, 20_000, 20_000, 8)
            .unwrap();
    assert!(rep.deviation <= 0.05, "{}", rep.deviation);
}

#[test]
fn chi_square_table_mean() {
    let m = 10;
    let b = 100_000;
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, m).unwrap();
    let t = null_table(StatisticKind::PearsonChi2, m, &anchor, b, 1).unwrap();
    let dof = (m - 1) as f64;
    assert!((t.mean() - dof).abs() <= 5.0 * (2.0 * dof / b as f64).sqrt());
    assert_eq!(t.degrees_of_freedom(), m - 1);
    let with_rhat = AnchorPair::preset(AnchorPreset::Plateau, m).unwrap();
    let t = null_table(StatisticKind::PearsonChi2, m, &with_rhat, 20_000, 1).unwrap();
    assert!((t.mean() - (dof - 1.0)).abs() <= 5.0 * (2.0 * (dof - 1.0) / 20_000.0).sqrt());
}

#[test]
fn omega_square_table_mean() {
    // E S_k² = k − k²/m under the diagonal anchor
    let m = 8;
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, m).unwrap();
    let t = null_table(StatisticKind::CvmZ, m, &anchor, 50_000, 3).unwrap();
    let mf = m as f64;
    let expected = (1..=m).map(|k| k as f64 - (k * k) as f64 / mf).sum::<f64>() / mf;
    let sd = {
        let v = t.values();
        let mean = t.mean();
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    assert!((t.mean() - expected).abs() <= 5.0 * sd / (50_000f64).sqrt());
}

#[test]
fn p_values_are_uniform_under_the_null() {
    let model = make_study_model(ModelRecipe::BetaIncrements { a: 3.0, b: 3.0 }, 6).unwrap();
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, 6).unwrap();
    let table = null_table(StatisticKind::KsZ, 6, &anchor, 4000, 5).unwrap();
    let ps: Vec<f64> = (0..2000)
        .map(|i| {
            let sample = sample_multinomial(&model, 2000, &mut stream_rng(99, i)).unwrap();
            let z =
                transform_simple(&components_y(&sample, &model).unwrap(), &model, &anchor).unwrap();
            p_value(&ks_stat(&z), &table).unwrap()
        })
        .collect();
    let empirical = EmpiricalCdf::new(ps).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let uniform = EmpiricalCdf::new(grid).unwrap();
    assert!(cdf_sup_distance(&empirical, &uniform) <= 0.05);
}

#[test]
fn three_cell_worked_example() {
    // Z = Y − ⟨Y,r⟩(r − q)/(1 − ⟨q,r⟩) evaluated to 40 digits
    let model = DiscreteModel::new(vec![0.5, 0.25, 0.25]).unwrap();
    let sample = SampleCounts::new(vec![12, 4, 4]).unwrap();
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, 3).unwrap();
    let z = transform_simple(&components_y(&sample, &model).unwrap(), &model, &anchor).unwrap();
    let want = [
        -0.730_296_743_340_221_5,
        0.365_148_371_670_110_7,
        0.365_148_371_670_110_7,
    ];
    for (a, b) in z.values().iter().zip(want) {
        assert!((a - b).abs() <= 1e-14);
    }
    assert!((ks_stat(&z).value - 0.730_296_743_340_221_5).abs() <= 1e-14);
    assert!((cvm_stat(&z).value - 2.0 / 9.0).abs() <= 1e-14);
    let chi2 = pearson_chi2(&z).value;
    assert!((chi2 - 0.8).abs() <= 1e-14, "{chi2}");
}

#[test]
fn perfect_fit_gives_zero_statistic_and_unit_p_value() {
    let model = DiscreteModel::new(vec![0.5, 0.25, 0.25]).unwrap();
    let anchor = AnchorPair::preset(AnchorPreset::Diagonal, 3).unwrap();
    let z = transform_simple(
        &components_y(&SampleCounts::new(vec![20, 10, 10]).unwrap(), &model).unwrap(),
        &model,
        &anchor,
    )
    .unwrap();
    let obs = ks_stat(&z);
    assert_eq!(obs.value, 0.0);
    let table = null_table(StatisticKind::KsZ, 3, &anchor, 1000, 1).unwrap();
    assert_eq!(p_value(&obs, &table).unwrap(), 1.0);
}
