//! Chi-square components and their distribution-free rotations.
//!
//! For a simple hypothesis `p` the components `Y_i = (ν_i − n p_i)/√(n p_i)`
//! satisfy `⟨Y, √p⟩ = 0` exactly. Rotating with the operator that carries
//! `q = √p` to the anchor `r` gives
//!
//! ```text
//! Z = Y − ⟨Y, r⟩ (r − q)/(1 − ⟨q, r⟩),
//! ```
//!
//! which is orthogonal to `r`, has the same norm as `Y`, and whose limit
//! law `X − ⟨X,r⟩r` no longer involves `p`.

use alloc::vec::Vec;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::anchor::{AnchorPair, AnchorPreset, AnchorTag};
use crate::error::{Error, Result, Warning};
use crate::linalg::{axpy, dot, norm, sub};
use crate::model::{DiscreteModel, SampleCounts};
use crate::parametric::{normalized_scores, ParametricFamily};
use crate::rotations::{
    build_bases, build_rotation_2d, recursive_rotation, BasisMode, GeometryBundle, UnitVector,
    CONDITIONING_GAP, IDENTITY_GAP,
};

/// Orthogonality of `Ŷ` to `q` required by the estimated-parameter
/// transform, relative to `max(1, ‖Ŷ‖)`.
pub const YHAT_ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    RawY,
    TransformedZ,
    ParametricYHat,
    ParametricZHat,
    PartialSums,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::RawY => "raw_y",
            ComponentKind::TransformedZ => "transformed_z",
            ComponentKind::ParametricYHat => "parametric_yhat",
            ComponentKind::ParametricZHat => "parametric_zhat",
            ComponentKind::PartialSums => "partial_sums",
        }
    }

    /// Whether the vector has been rotated onto an anchor.
    pub fn is_rotated(self) -> bool {
        matches!(
            self,
            ComponentKind::TransformedZ | ComponentKind::ParametricZHat
        )
    }

    pub fn is_parametric(self) -> bool {
        matches!(
            self,
            ComponentKind::ParametricYHat | ComponentKind::ParametricZHat
        )
    }
}

/// What produced a component vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// Fingerprint of the model (or pooled model) the components refer to.
    pub model: u64,
    pub anchor: Option<AnchorTag>,
    pub n: Option<u64>,
    pub two_sample: bool,
    /// For partial sums: the kind of the summed vector.
    pub source: Option<ComponentKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentVector {
    values: Vec<f64>,
    kind: ComponentKind,
    provenance: Provenance,
    warnings: Vec<Warning>,
}

impl ComponentVector {
    pub fn new(values: Vec<f64>, kind: ComponentKind, provenance: Provenance) -> Self {
        Self {
            values,
            kind,
            provenance,
            warnings: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    /// The kind the statistics should be named after: the summed vector's
    /// kind for partial sums, otherwise the vector's own.
    pub fn effective_kind(&self) -> ComponentKind {
        match self.kind {
            ComponentKind::PartialSums => self.provenance.source.unwrap_or(ComponentKind::RawY),
            k => k,
        }
    }
}

fn expect_kind(v: &ComponentVector, expected: ComponentKind) -> Result<()> {
    if v.kind != expected {
        return Err(Error::WrongKind {
            expected: expected.as_str(),
            found: v.kind.as_str(),
        });
    }
    Ok(())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn raw_components(counts: &[u64], n: u64, probs: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    counts
        .iter()
        .zip(probs)
        .map(|(nu, p)| {
            let e = nf * p;
            (*nu as f64 - e) / e.sqrt()
        })
        .collect()
}

/// `Y_i = (ν_i − n p_i)/√(n p_i)`
pub fn components_y(sample: &SampleCounts, model: &DiscreteModel) -> Result<ComponentVector> {
    check_len(model.len(), sample.len())?;
    let values = raw_components(sample.counts(), sample.n(), model.probs());
    let provenance = Provenance {
        model: model.fingerprint(),
        anchor: None,
        n: Some(sample.n()),
        two_sample: false,
        source: None,
    };
    Ok(ComponentVector::new(
        values,
        ComponentKind::RawY,
        provenance,
    ))
}

/// `Y − ⟨Y,r⟩ (r − q)/(1 − ⟨q,r⟩)`, with the identity rule for `q = r` and
/// an exact zero in the first coordinate for `r = e₁`.
fn rotate_onto(y: &[f64], q: &[f64], anchor: &AnchorPair, warnings: &mut Vec<Warning>) -> Vec<f64> {
    let r = anchor.r();
    let diff = sub(r, q);
    let gap = norm(&diff);
    if gap <= IDENTITY_GAP {
        return y.to_vec();
    }
    // 1 − ⟨q,r⟩ = ‖r − q‖²/2, without the cancellation of the left side
    let denom = 0.5 * gap * gap;
    if gap <= CONDITIONING_GAP {
        warnings.push(Warning::IllConditioned { gap });
    }
    let mut z = y.to_vec();
    axpy(-dot(y, r) / denom, &diff, &mut z);
    if anchor.preset_kind() == AnchorPreset::E1 {
        z[0] = 0.0;
    }
    z
}

fn require_simple_anchor(anchor: &AnchorPair, m: usize) -> Result<()> {
    check_len(m, anchor.dim())?;
    if anchor.rhat().is_some() {
        return Err(Error::InvalidAnchor(
            "simple-hypothesis transform takes an anchor without rhat",
        ));
    }
    Ok(())
}

/// Rotates simple-hypothesis components onto the anchor `r`.
pub fn transform_simple(
    y: &ComponentVector,
    model: &DiscreteModel,
    anchor: &AnchorPair,
) -> Result<ComponentVector> {
    expect_kind(y, ComponentKind::RawY)?;
    check_len(model.len(), y.len())?;
    require_simple_anchor(anchor, y.len())?;
    if y.provenance.model != model.fingerprint() {
        return Err(Error::ProvenanceMismatch(
            "components were computed under a different model",
        ));
    }
    let mut warnings = y.warnings.clone();
    let q = if y.provenance.two_sample {
        model.sqrt_probs().negated()
    } else {
        model.sqrt_probs()
    };
    let values = rotate_onto(&y.values, &q, anchor, &mut warnings);
    let provenance = Provenance {
        anchor: Some(anchor.tag()),
        ..y.provenance
    };
    Ok(ComponentVector {
        values,
        kind: ComponentKind::TransformedZ,
        provenance,
        warnings,
    })
}

/// Undoes [`transform_simple`] (or [`transform_two_sample`]) by applying
/// the transpose of the rotation operator.
pub fn inverse_transform(
    z: &ComponentVector,
    model: &DiscreteModel,
    anchor: &AnchorPair,
) -> Result<ComponentVector> {
    expect_kind(z, ComponentKind::TransformedZ)?;
    check_len(model.len(), z.len())?;
    require_simple_anchor(anchor, z.len())?;
    if z.provenance.model != model.fingerprint() {
        return Err(Error::ProvenanceMismatch(
            "model differs from the one used for the transform",
        ));
    }
    if z.provenance.anchor.map(|t| t.fingerprint) != Some(anchor.tag().fingerprint) {
        return Err(Error::ProvenanceMismatch(
            "anchor differs from the one used for the transform",
        ));
    }
    let q = if z.provenance.two_sample {
        model.sqrt_probs().negated()
    } else {
        model.sqrt_probs()
    };
    let op = build_rotation_2d(&q, anchor.r())?;
    let values = op.apply_transpose(&z.values)?;
    let provenance = Provenance {
        anchor: None,
        ..z.provenance
    };
    Ok(ComponentVector {
        values,
        kind: ComponentKind::RawY,
        provenance,
        warnings: z.warnings.clone(),
    })
}

/// Components of the two-sample statistic for the first sample,
/// `Y'_i = (ν'_i − n' μ_i/n)/√(n' μ_i/n)`, together with the pooled model
/// `μ_i/n`.
pub fn two_sample_components(
    first: &SampleCounts,
    second: &SampleCounts,
) -> Result<(ComponentVector, DiscreteModel)> {
    check_len(first.len(), second.len())?;
    let pooled: Vec<u64> = first
        .counts()
        .iter()
        .zip(second.counts())
        .map(|(a, b)| a + b)
        .collect();
    if let Some(i) = pooled.iter().position(|c| *c == 0) {
        return Err(Error::EmptyPooledCell(i + 1));
    }
    let n = (first.n() + second.n()) as f64;
    let model = DiscreteModel::new(pooled.iter().map(|c| *c as f64 / n).collect())?;
    let values = raw_components(first.counts(), first.n(), model.probs());
    let provenance = Provenance {
        model: model.fingerprint(),
        anchor: None,
        n: Some(first.n()),
        two_sample: true,
        source: None,
    };
    Ok((
        ComponentVector::new(values, ComponentKind::RawY, provenance),
        model,
    ))
}

/// Two-sample rotation
/// `Z' = Y' − ⟨Y',r⟩ (r + √(μ/n))/(1 + ⟨√(μ/n), r⟩)`, i.e. the map that
/// carries `−√(μ/n)` onto `r`.
pub fn transform_two_sample(
    y2: &ComponentVector,
    pooled: &DiscreteModel,
    anchor: &AnchorPair,
) -> Result<ComponentVector> {
    if !y2.provenance.two_sample {
        return Err(Error::ProvenanceMismatch(
            "components do not come from two_sample_components",
        ));
    }
    transform_simple(y2, pooled, anchor)
}

/// `Ŷ_i = (ν_i − n p_i(θ̂))/√(n p_i(θ̂))`
pub fn components_y_hat(
    sample: &SampleCounts,
    family: &dyn ParametricFamily,
    theta_hat: f64,
) -> Result<ComponentVector> {
    check_len(family.cells(), sample.len())?;
    let model = DiscreteModel::new(family.probs(theta_hat)?)?;
    let mut y = components_y(sample, &model)?;
    y.kind = ComponentKind::ParametricYHat;
    Ok(y)
}

/// Bundle for the estimated-parameter transform at `θ`: `q = √p(θ)`,
/// `q̂` the normalized score, and the anchor's `r, r̂`.
pub fn parametric_bundle(
    family: &dyn ParametricFamily,
    theta: f64,
    anchor: &AnchorPair,
    mode: BasisMode,
) -> Result<GeometryBundle> {
    check_len(family.cells(), anchor.dim())?;
    let rhat = anchor.rhat().ok_or(Error::InvalidAnchor(
        "estimated-parameter transform needs an anchor with rhat",
    ))?;
    let q = DiscreteModel::new(family.probs(theta)?)?.sqrt_probs();
    let qhat = normalized_scores(family, theta)?;
    let mut bundle = build_bases(&q, &qhat, anchor.r(), rhat, mode)?;
    bundle.preset = anchor.preset_kind();
    Ok(bundle)
}

fn transport_residuals(
    yhat: &ComponentVector,
    q: &UnitVector,
    qhat: &UnitVector,
) -> Result<(f64, f64)> {
    let rq = q.dot(&yhat.values);
    let rqh = qhat.dot(&yhat.values);
    let scale = yhat.norm().max(1.0);
    if rq.abs() > YHAT_ORTHOGONALITY_TOL * scale {
        return Err(Error::NonOrthogonalInputs {
            which: "yhat,q",
            value: rq.abs(),
        });
    }
    Ok((rq, rqh))
}

/// Estimated-parameter rotation
///
/// ```text
/// Ẑ = Ŷ − ⟨Ŷ,a₃⟩(a₃ − b₃) − ⟨Ŷ,a₄⟩(a₄ − b₄) − ⟨Ŷ,q⟩(q − r) − ⟨Ŷ,q̂⟩(q̂ − r̂)
/// ```
///
/// The last two terms vanish when `Ŷ ⊥ q, q̂` (an exact score root); keeping
/// them makes `⟨Ẑ,r⟩ = ⟨Ŷ,q⟩` and `⟨Ẑ,r̂⟩ = ⟨Ŷ,q̂⟩` hold for inexact fits.
pub fn transform_parametric(
    yhat: &ComponentVector,
    bundle: &GeometryBundle,
) -> Result<ComponentVector> {
    expect_kind(yhat, ComponentKind::ParametricYHat)?;
    check_len(bundle.q.dim(), yhat.len())?;
    let (rq, rqh) = transport_residuals(yhat, &bundle.q, &bundle.qhat)?;
    let y = &yhat.values;
    let mut z = y.clone();
    for (a, b) in [(&bundle.a3, &bundle.b3), (&bundle.a4, &bundle.b4)] {
        let c = a.dot(y);
        axpy(-c, a, &mut z);
        axpy(c, b, &mut z);
    }
    for (c, s, t) in [
        (rq, &bundle.q, &bundle.r),
        (rqh, &bundle.qhat, &bundle.rhat),
    ] {
        axpy(-c, s, &mut z);
        axpy(c, t, &mut z);
    }
    let mut warnings = yhat.warnings.clone();
    if rq.abs().max(rqh.abs()) > 1e-10 {
        warnings.push(Warning::OrthogonalityResidual { q: rq, qhat: rqh });
    }
    let provenance = Provenance {
        anchor: Some(AnchorTag::of(bundle.preset, &bundle.r, Some(&bundle.rhat))),
        ..yhat.provenance
    };
    Ok(ComponentVector {
        values: z,
        kind: ComponentKind::ParametricZHat,
        provenance,
        warnings,
    })
}

/// `Ẑ = U_{q̃,r̂} U_{q,r} Ŷ` with `q̃ = U_{q,r} q̂`, generalized to several
/// score directions applied in index order.
pub fn transform_parametric_recursive(
    yhat: &ComponentVector,
    q: &UnitVector,
    qhats: &[UnitVector],
    r: &UnitVector,
    rhats: &[UnitVector],
    preset: AnchorPreset,
) -> Result<ComponentVector> {
    expect_kind(yhat, ComponentKind::ParametricYHat)?;
    check_len(q.dim(), yhat.len())?;
    let rq = q.dot(&yhat.values);
    if rq.abs() > YHAT_ORTHOGONALITY_TOL * yhat.norm().max(1.0) {
        return Err(Error::NonOrthogonalInputs {
            which: "yhat,q",
            value: rq.abs(),
        });
    }
    let op = recursive_rotation(q, qhats, r, rhats)?;
    let values = op.apply(&yhat.values)?;
    let mut warnings = yhat.warnings.clone();
    warnings.extend(op.warning());
    let rhat_coords: Vec<f64> = rhats.iter().flat_map(|v| v.iter().copied()).collect();
    let anchor = AnchorTag::of(preset, r, (!rhats.is_empty()).then_some(&rhat_coords[..]));
    let provenance = Provenance {
        anchor: Some(anchor),
        ..yhat.provenance
    };
    Ok(ComponentVector {
        values,
        kind: ComponentKind::ParametricZHat,
        provenance,
        warnings,
    })
}
