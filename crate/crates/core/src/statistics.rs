//! Statistics of component vectors, Monte Carlo null tables and p-values.
//!
//! The partial-sum statistics are
//!
//! * `d = max_k |S_k|`, a discrete Kolmogorov–Smirnov statistic, and
//! * `ω² = (1/m) Σ_k S_k²`, an unweighted omega-square analogue,
//!
//! with `S_k = Σ_{j≤k} v_j`. Pearson's statistic is `Σ v_i²`.
//!
//! Null tables simulate the limit law `X − ⟨X,r⟩r` (or
//! `X − ⟨X,r⟩r − ⟨X,r̂⟩r̂` for anchors with `r̂`), which depends only on the
//! anchor, so one table serves every hypothesized model of dimension `m`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::anchor::{AnchorPair, AnchorTag};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot};
use crate::montecarlo::stream_rng;
use crate::transforms::{ComponentKind, ComponentVector, Provenance};

/// Smallest admissible null table.
pub const MIN_TABLE_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    /// `max_k |S_k|` of rotated components.
    KsZ,
    /// `max_k |S_k|` of unrotated components.
    KsY,
    /// `(1/m) Σ S_k²` of rotated components.
    CvmZ,
    /// `(1/m) Σ S_k²` of unrotated components.
    CvmY,
    PearsonChi2,
}

impl StatisticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::KsZ => "ks_z",
            StatisticKind::KsY => "ks_y",
            StatisticKind::CvmZ => "cvm_z",
            StatisticKind::CvmY => "cvm_y",
            StatisticKind::PearsonChi2 => "pearson_chi2",
        }
    }

    /// Whether the statistic is computed from rotated components.
    pub fn uses_rotation(self) -> bool {
        matches!(self, StatisticKind::KsZ | StatisticKind::CvmZ)
    }

    /// Whether the limit law is free of the hypothesized model.
    pub fn is_distribution_free(self) -> bool {
        !matches!(self, StatisticKind::KsY | StatisticKind::CvmY)
    }

    /// Evaluates the statistic on raw component values.
    pub fn evaluate(self, v: &[f64]) -> f64 {
        match self {
            StatisticKind::KsZ | StatisticKind::KsY => ks_value(v),
            StatisticKind::CvmZ | StatisticKind::CvmY => cvm_value(v),
            StatisticKind::PearsonChi2 => chi2_value(v),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks_z" => Ok(StatisticKind::KsZ),
            "ks_y" => Ok(StatisticKind::KsY),
            "cvm_z" => Ok(StatisticKind::CvmZ),
            "cvm_y" => Ok(StatisticKind::CvmY),
            "pearson_chi2" | "chi2" => Ok(StatisticKind::PearsonChi2),
            _ => Err(Error::InvalidConfig(alloc::format!(
                "unknown statistic '{s}'"
            ))),
        }
    }
}

/// A statistic together with the configuration it was computed under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub m: usize,
    pub n: Option<u64>,
    pub anchor: Option<AnchorTag>,
    pub model: u64,
    pub source: ComponentKind,
}

/// `max_k |Σ_{j≤k} v_j|`
pub fn ks_value(v: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut best: f64 = 0.0;
    for x in v {
        s += x;
        best = best.max(s.abs());
    }
    best
}

/// `(1/m) Σ_k (Σ_{j≤k} v_j)²`
pub fn cvm_value(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    let mut acc = 0.0;
    for x in v {
        s += x;
        acc += s * s;
    }
    acc / v.len() as f64
}

pub fn chi2_value(v: &[f64]) -> f64 {
    dot(v, v)
}

/// `S_k = Σ_{j≤k} v_j`, `k = 1..m`.
pub fn partial_sums(v: &ComponentVector) -> ComponentVector {
    let mut s = 0.0;
    let values: Vec<f64> = v
        .values()
        .iter()
        .map(|x| {
            s += x;
            s
        })
        .collect();
    let provenance = Provenance {
        source: Some(v.effective_kind()),
        ..*v.provenance()
    };
    ComponentVector::new(values, ComponentKind::PartialSums, provenance)
}

fn wrap(kind: StatisticKind, value: f64, v: &ComponentVector) -> StatisticValue {
    let p = v.provenance();
    StatisticValue {
        kind,
        value,
        m: v.len(),
        n: p.n,
        anchor: p.anchor,
        model: p.model,
        source: v.effective_kind(),
    }
}

/// Running maximum of `|x|` over a partial-sum vector, or of its partial
/// sums for ordinary components.
fn path<'a>(v: &'a ComponentVector, buf: &'a mut Vec<f64>) -> &'a [f64] {
    if v.kind() == ComponentKind::PartialSums {
        v.values()
    } else {
        let mut s = 0.0;
        buf.clear();
        buf.extend(v.values().iter().map(|x| {
            s += x;
            s
        }));
        buf
    }
}

/// Discrete Kolmogorov–Smirnov statistic `max_k |S_k|`.
pub fn ks_stat(v: &ComponentVector) -> StatisticValue {
    let mut buf = Vec::new();
    let value = path(v, &mut buf).iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let kind = if v.effective_kind().is_rotated() {
        StatisticKind::KsZ
    } else {
        StatisticKind::KsY
    };
    wrap(kind, value, v)
}

/// Omega-square analogue `(1/m) Σ_k S_k²`.
pub fn cvm_stat(v: &ComponentVector) -> StatisticValue {
    let mut buf = Vec::new();
    let sums = path(v, &mut buf);
    let value = if sums.is_empty() {
        0.0
    } else {
        sums.iter().map(|s| s * s).sum::<f64>() / sums.len() as f64
    };
    let kind = if v.effective_kind().is_rotated() {
        StatisticKind::CvmZ
    } else {
        StatisticKind::CvmY
    };
    wrap(kind, value, v)
}

/// Pearson's statistic `Σ v_i²`.
pub fn pearson_chi2(v: &ComponentVector) -> StatisticValue {
    wrap(StatisticKind::PearsonChi2, chi2_value(v.values()), v)
}

/// Sorted Monte Carlo draws of a statistic under the anchor's limit law.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    kind: StatisticKind,
    m: usize,
    anchor: AnchorTag,
    seed: u64,
    values: Vec<f64>,
}

impl NullTable {
    /// Rebuilds a table from stored parts, checking its invariants.
    pub fn from_parts(
        kind: StatisticKind,
        m: usize,
        anchor: AnchorTag,
        seed: u64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() < MIN_TABLE_REPS {
            return Err(Error::InvalidConfig(alloc::format!(
                "null table needs at least {MIN_TABLE_REPS} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan()) || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig(
                "null table values are not sorted".into(),
            ));
        }
        Ok(Self {
            kind,
            m,
            anchor,
            seed,
            values,
        })
    }

    pub fn kind(&self) -> StatisticKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn anchor(&self) -> AnchorTag {
        self.anchor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn reps(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Chi-square degrees of freedom of the simulated law: `m − 1`, or
    /// `m − 2` for anchors with `r̂`.
    pub fn degrees_of_freedom(&self) -> usize {
        self.m - 1 - usize::from(self.anchor.has_rhat)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Lower empirical quantile, `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let b = self.values.len();
        let idx = ((p.clamp(0.0, 1.0) * b as f64) as usize).min(b - 1);
        self.values[idx]
    }
}

/// One draw of `kind` under the limit law `X − ⟨X,r⟩r [− ⟨X,r̂⟩r̂]`, from
/// the stream derived from `(seed, index)`.
pub fn null_replicate(
    kind: StatisticKind,
    anchor: &AnchorPair,
    seed: u64,
    index: u64,
) -> Result<f64> {
    if !kind.is_distribution_free() {
        return Err(Error::NotDistributionFree(kind.as_str()));
    }
    let mut rng = stream_rng(seed, index);
    let mut x: Vec<f64> = (0..anchor.dim())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let c = anchor.r().dot(&x);
    axpy(-c, anchor.r(), &mut x);
    if let Some(rh) = anchor.rhat() {
        let c = rh.dot(&x);
        axpy(-c, rh, &mut x);
    }
    Ok(kind.evaluate(&x))
}

/// Assembles a table from unsorted draws.
pub fn table_from_draws(
    kind: StatisticKind,
    anchor: &AnchorPair,
    seed: u64,
    mut draws: Vec<f64>,
) -> Result<NullTable> {
    draws.sort_by(f64::total_cmp);
    NullTable::from_parts(kind, anchor.dim(), anchor.tag(), seed, draws)
}

pub fn null_table(
    kind: StatisticKind,
    m: usize,
    anchor: &AnchorPair,
    reps: usize,
    seed: u64,
) -> Result<NullTable> {
    if anchor.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: anchor.dim(),
        });
    }
    if reps < MIN_TABLE_REPS {
        return Err(Error::InvalidConfig(alloc::format!(
            "null table needs at least {MIN_TABLE_REPS} replicates"
        )));
    }
    let draws = (0..reps as u64)
        .map(|i| null_replicate(kind, anchor, seed, i))
        .collect::<Result<Vec<_>>>()?;
    table_from_draws(kind, anchor, seed, draws)
}

/// Add-one Monte Carlo p-value `(1 + #{T_b ≥ t})/(B + 1)`.
pub fn p_value(observed: &StatisticValue, table: &NullTable) -> Result<f64> {
    if observed.kind != table.kind {
        return Err(Error::ProvenanceMismatch(
            "statistic differs from the table's",
        ));
    }
    if observed.m != table.m {
        return Err(Error::ProvenanceMismatch(
            "dimension differs from the table's",
        ));
    }
    match observed.anchor {
        Some(tag) if tag.fingerprint != table.anchor.fingerprint => {
            return Err(Error::ProvenanceMismatch("anchor differs from the table's"));
        }
        None if table.anchor.has_rhat != observed.source.is_parametric() => {
            return Err(Error::ProvenanceMismatch(
                "degrees of freedom differ from the table's",
            ));
        }
        _ => {}
    }
    let below = table.values.partition_point(|v| *v < observed.value);
    let at_or_above = table.values.len() - below;
    Ok((1 + at_or_above) as f64 / (table.values.len() + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchor::AnchorPreset;
    use alloc::vec;

    fn vector(values: Vec<f64>, kind: ComponentKind) -> ComponentVector {
        let prov = Provenance {
            model: 1,
            anchor: None,
            n: Some(10),
            two_sample: false,
            source: None,
        };
        ComponentVector::new(values, kind, prov)
    }

    #[test]
    fn partial_sums_arithmetic() {
        let s = partial_sums(&vector(vec![1.0, -1.0, 0.0], ComponentKind::RawY));
        assert_eq!(s.values(), &[1.0, 0.0, 0.0]);
        assert_eq!(s.kind(), ComponentKind::PartialSums);
        let zero = partial_sums(&vector(vec![0.0; 4], ComponentKind::RawY));
        assert!(zero.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn small_statistics() {
        let v = vector(vec![1.0, -1.0, 0.0], ComponentKind::TransformedZ);
        assert_eq!(ks_stat(&v).value, 1.0);
        assert_eq!(ks_stat(&v).kind, StatisticKind::KsZ);
        assert!((cvm_stat(&v).value - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(pearson_chi2(&v).value, 2.0);
        let zero = vector(vec![0.0; 3], ComponentKind::RawY);
        assert_eq!(ks_stat(&zero).value, 0.0);
        assert_eq!(ks_stat(&zero).kind, StatisticKind::KsY);
        assert_eq!(cvm_stat(&zero).value, 0.0);
        assert_eq!(pearson_chi2(&zero).value, 0.0);
    }

    #[test]
    fn statistics_of_partial_sums_match_components() {
        let v = vector(vec![0.3, -1.2, 0.4, 0.5], ComponentKind::TransformedZ);
        let s = partial_sums(&v);
        assert_eq!(ks_stat(&s).value, ks_stat(&v).value);
        assert_eq!(ks_stat(&s).kind, StatisticKind::KsZ);
        assert_eq!(cvm_stat(&s).value, cvm_stat(&v).value);
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "chi2".parse::<StatisticKind>().unwrap(),
            StatisticKind::PearsonChi2
        );
        assert_eq!("ks_z".parse::<StatisticKind>().unwrap(), StatisticKind::KsZ);
        assert!("ad".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn tables_are_deterministic_and_sorted() {
        let a = AnchorPair::preset(AnchorPreset::Diagonal, 6).unwrap();
        let t1 = null_table(StatisticKind::KsZ, 6, &a, 1000, 9).unwrap();
        let t2 = null_table(StatisticKind::KsZ, 6, &a, 1000, 9).unwrap();
        assert_eq!(t1, t2);
        assert!(t1.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(t1.quantile(0.1) <= t1.quantile(0.5) && t1.quantile(0.5) <= t1.quantile(0.9));
        let t3 = null_table(StatisticKind::KsZ, 6, &a, 1000, 10).unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn table_rejects_bad_requests() {
        let a = AnchorPair::preset(AnchorPreset::Diagonal, 6).unwrap();
        assert!(null_table(StatisticKind::KsZ, 6, &a, 999, 1).is_err());
        assert!(null_table(StatisticKind::KsZ, 5, &a, 1000, 1).is_err());
        assert!(matches!(
            null_table(StatisticKind::KsY, 6, &a, 1000, 1),
            Err(Error::NotDistributionFree(_))
        ));
    }

    #[test]
    fn p_value_extremes() {
        let a = AnchorPair::preset(AnchorPreset::Diagonal, 5).unwrap();
        let t = null_table(StatisticKind::KsZ, 5, &a, 2000, 3).unwrap();
        let mut obs = StatisticValue {
            kind: StatisticKind::KsZ,
            value: -1.0,
            m: 5,
            n: None,
            anchor: Some(a.tag()),
            model: 0,
            source: ComponentKind::TransformedZ,
        };
        assert_eq!(p_value(&obs, &t).unwrap(), 1.0);
        obs.value = 1e9;
        assert_eq!(p_value(&obs, &t).unwrap(), 1.0 / 2001.0);
        obs.value = t.values()[1000];
        let p = p_value(&obs, &t).unwrap();
        assert!((p - 0.5).abs() <= 1.0 / 2000.0 + 1e-12, "{p}");
        obs.kind = StatisticKind::CvmZ;
        assert!(matches!(
            p_value(&obs, &t),
            Err(Error::ProvenanceMismatch(_))
        ));
        obs.kind = StatisticKind::KsZ;
        obs.anchor = Some(AnchorPair::preset(AnchorPreset::E1, 5).unwrap().tag());
        assert!(matches!(
            p_value(&obs, &t),
            Err(Error::ProvenanceMismatch(_))
        ));
    }

    #[test]
    fn p_value_is_monotone() {
        let a = AnchorPair::preset(AnchorPreset::Diagonal, 4).unwrap();
        let t = null_table(StatisticKind::CvmZ, 4, &a, 1000, 5).unwrap();
        let mut last = 1.0;
        for k in 0..50 {
            let obs = StatisticValue {
                kind: StatisticKind::CvmZ,
                value: k as f64 * 0.05,
                m: 4,
                n: None,
                anchor: Some(a.tag()),
                model: 0,
                source: ComponentKind::TransformedZ,
            };
            let p = p_value(&obs, &t).unwrap();
            assert!(p <= last && p > 0.0);
            last = p;
        }
    }
}
