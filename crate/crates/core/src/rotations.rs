//! Structured orthogonal operators that carry a model direction `q` (and a
//! score direction `q̂`) onto fixed anchors `r` (and `r̂`).
//!
//! Operators are kept in factored form and applied in O(m) per factor. A
//! dense materialization is available for inspection and testing only.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::anchor::AnchorPreset;
use crate::error::{Error, Result, Warning};
use crate::linalg::{axpy, dot, norm, residual, sub, symmetric_eigenvalues};

/// Tolerance on `‖v‖ − 1` accepted by [`UnitVector::new`].
pub const UNIT_TOL: f64 = 1e-12;
/// `‖q − r‖` at or below which a rotation collapses to the identity.
pub const IDENTITY_GAP: f64 = 1e-12;
/// `‖q − r‖` below which a rotation is flagged as ill-conditioned.
pub const CONDITIONING_GAP: f64 = 1e-8;
/// Tolerance on `⟨q,q̂⟩` and `⟨r,r̂⟩` when building 4-D bases.
pub const PAIR_ORTHOGONALITY_TOL: f64 = 1e-8;
/// Smallest admissible eigenvalue of the Gram matrix of `(q, q̂, r, r̂)`.
pub const SPAN_EIGEN_CUTOFF: f64 = 1e-8;

/// A real vector of Euclidean length one with at least two coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts `coords` if its norm is within [`UNIT_TOL`] of one. The
    /// stored coordinates are rescaled so that the norm is one to working
    /// precision.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::TooFewCells(coords.len()));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(coords.into_iter().map(|x| x / n).collect()))
    }

    /// Scales `coords` to unit length.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::TooFewCells(coords.len()));
        }
        let n = norm(&coords);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(coords.into_iter().map(|x| x / n).collect()))
    }

    /// The `i`-th standard basis vector of `ℝ^m` (zero based).
    pub fn basis(m: usize, i: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewCells(m));
        }
        if i >= m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: i + 1,
            });
        }
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Structural form of a [`RotationOp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationKind {
    Identity,
    /// `I_{L*} + U` on the plane spanned by `q` and `r`.
    TwoSubspace,
    /// `Î + Û` on the span of `q, q̂, r, r̂`.
    FourSubspace,
    /// `I − 2 v vᵀ/‖v‖²` with `v = r − q`.
    Householder,
    Composed,
}

#[derive(Debug, Clone, PartialEq)]
enum Factor {
    /// `x ↦ x − Σ_k ⟨x, s_k⟩ (s_k − t_k)` for orthonormal sources `s_k`
    /// and orthonormal targets `t_k` spanning the same subspace.
    Paired {
        sources: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
    },
    /// `x ↦ x − coef ⟨x, v⟩ v`
    Reflection { v: Vec<f64>, coef: f64 },
}

impl Factor {
    fn apply(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let mut out = x.to_vec();
        match self {
            Factor::Paired { sources, targets } => {
                let (from, to) = if transpose {
                    (targets, sources)
                } else {
                    (sources, targets)
                };
                for (s, t) in from.iter().zip(to) {
                    let c = dot(x, s);
                    axpy(-c, s, &mut out);
                    axpy(c, t, &mut out);
                }
            }
            Factor::Reflection { v, coef } => {
                let c = coef * dot(x, v);
                axpy(-c, v, &mut out);
            }
        }
        out
    }
}

/// An orthogonal operator on `ℝ^m` stored as a product of rank-limited
/// factors. Factors are applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationOp {
    dim: usize,
    kind: RotationKind,
    factors: Vec<Factor>,
    warning: Option<Warning>,
}

impl RotationOp {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kind: RotationKind::Identity,
            factors: Vec::new(),
            warning: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> RotationKind {
        self.kind
    }

    /// Conditioning warning recorded at construction, if any.
    pub fn warning(&self) -> Option<Warning> {
        self.warning
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.dim, x.len())?;
        let mut v = x.to_vec();
        for f in &self.factors {
            v = f.apply(&v, false);
        }
        Ok(v)
    }

    /// Applies the transpose, which is also the inverse.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.dim, x.len())?;
        let mut v = x.to_vec();
        for f in self.factors.iter().rev() {
            v = f.apply(&v, true);
        }
        Ok(v)
    }

    /// Row-major `m×m` matrix of the operator. O(m²) memory; meant for
    /// tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m * m];
        let mut e = vec![0.0; m];
        for j in 0..m {
            e[j] = 1.0;
            let col = self.apply(&e).expect("dimension checked");
            for i in 0..m {
                out[i * m + j] = col[i];
            }
            e[j] = 0.0;
        }
        out
    }
}

/// The part of `q` orthogonal to `r` and its norm `μ`.
pub fn orthogonal_part(q: &UnitVector, r: &UnitVector) -> Result<(Vec<f64>, f64)> {
    check_dims(q.dim(), r.dim())?;
    let c = q.dot(r);
    let mut out = q.to_vec();
    axpy(-c, r, &mut out);
    let mu = norm(&out);
    Ok((out, mu))
}

/// `(‖r − q‖², 2(1 − ⟨q,r⟩))`; the two agree for unit vectors.
pub fn hellinger_pair(q: &UnitVector, r: &UnitVector) -> Result<(f64, f64)> {
    check_dims(q.dim(), r.dim())?;
    let d = sub(r, q);
    Ok((dot(&d, &d), 2.0 * (1.0 - q.dot(r))))
}

fn gap_warning(gap: f64) -> Option<Warning> {
    (gap <= CONDITIONING_GAP).then_some(Warning::IllConditioned { gap })
}

/// The operator `I_{L*} + U` with `U = r qᵀ + q_{⊥r} r_{⊥q}ᵀ/μ²`: maps `q`
/// to `r`, `r_{⊥q}` to `q_{⊥r}`, and fixes everything orthogonal to both.
///
/// Returns the identity when `‖q − r‖ ≤ 1e-12`.
pub fn build_rotation_2d(q: &UnitVector, r: &UnitVector) -> Result<RotationOp> {
    check_dims(q.dim(), r.dim())?;
    let m = q.dim();
    let gap = norm(&sub(q, r));
    if gap <= IDENTITY_GAP {
        return Ok(RotationOp::identity(m));
    }
    let r_perp_q = residual(r, &[q]);
    let q_perp_r = residual(q, &[r]);
    let (sources, targets) = if norm(&r_perp_q) <= IDENTITY_GAP {
        // q = −r: the plane collapses to a line and q ↦ r is the sign flip.
        (vec![q.to_vec()], vec![r.to_vec()])
    } else {
        let e = scaled(&r_perp_q, 1.0 / norm(&r_perp_q));
        let f = scaled(&q_perp_r, 1.0 / norm(&q_perp_r));
        (vec![q.to_vec(), e], vec![r.to_vec(), f])
    };
    Ok(RotationOp {
        dim: m,
        kind: RotationKind::TwoSubspace,
        factors: vec![Factor::Paired { sources, targets }],
        warning: gap_warning(gap),
    })
}

/// The reflection `U_{q,r} = I − 2 (r − q)(r − q)ᵀ/‖r − q‖²`, which swaps
/// `q` and `r` and fixes their orthogonal complement.
pub fn householder_map(q: &UnitVector, r: &UnitVector) -> Result<RotationOp> {
    let (dist_sq, hellinger) = hellinger_pair(q, r)?;
    let m = q.dim();
    if dist_sq.sqrt() <= IDENTITY_GAP {
        return Ok(RotationOp::identity(m));
    }
    if (dist_sq - hellinger).abs() > 1e-12 {
        return Err(Error::NotUnit { norm: norm(q) });
    }
    let v = sub(r, q);
    Ok(RotationOp {
        dim: m,
        kind: RotationKind::Householder,
        factors: vec![Factor::Reflection {
            coef: 2.0 / dist_sq,
            v,
        }],
        warning: gap_warning(dist_sq.sqrt()),
    })
}

/// `second ∘ first`: applies `first`, then `second`.
pub fn compose(first: &RotationOp, second: &RotationOp) -> Result<RotationOp> {
    check_dims(first.dim, second.dim)?;
    let factors: Vec<Factor> = first
        .factors
        .iter()
        .chain(&second.factors)
        .cloned()
        .collect();
    let kind = match (first.is_identity(), second.is_identity()) {
        (true, true) => RotationKind::Identity,
        (true, false) => second.kind,
        (false, true) => first.kind,
        (false, false) => RotationKind::Composed,
    };
    Ok(RotationOp {
        dim: first.dim,
        kind,
        factors,
        warning: first.warning.or(second.warning),
    })
}

/// Householder product carrying `q → r` and each `q̂_k → r̂_k` in turn:
/// `U_{q̃_κ, r̂_κ} ⋯ U_{q̃_1, r̂_1} U_{q,r}` with `q̃_k` the image of `q̂_k`
/// under the operator built so far. Parameters are taken in index order.
///
/// Requires `q̂` orthonormal and orthogonal to `q`, and `r̂` orthonormal
/// and orthogonal to `r`.
pub fn recursive_rotation(
    q: &UnitVector,
    qhats: &[UnitVector],
    r: &UnitVector,
    rhats: &[UnitVector],
) -> Result<RotationOp> {
    check_dims(q.dim(), r.dim())?;
    check_dims(qhats.len(), rhats.len())?;
    for v in qhats.iter().chain(rhats) {
        check_dims(q.dim(), v.dim())?;
    }
    let mut op = householder_map(q, r)?;
    for (qhat, rhat) in qhats.iter().zip(rhats) {
        let moved = UnitVector::normalized(op.apply(qhat)?)?;
        op = compose(&op, &householder_map(&moved, rhat)?)?;
    }
    Ok(op)
}

/// How `a₃, a₄` (and `b₃, b₄`) are chosen inside the 4-D span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisMode {
    /// Successive residual normalization: `a₃ ∝ r_{⊥q q̂}`,
    /// `a₄ ∝ r̂_{⊥q q̂ a₃}`, and dually for `b₃, b₄`.
    #[default]
    GramSchmidt,
    /// `a₃, a₄ ∝` sum and difference of the normalized residuals of `r` and
    /// `r̂`, weighted by `1/√(1 ± ρ)`.
    Symmetric,
}

/// Vectors defining the 4-D operator `Î + Û`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryBundle {
    pub q: UnitVector,
    pub qhat: UnitVector,
    pub r: UnitVector,
    pub rhat: UnitVector,
    /// `‖q_{⊥r}‖`
    pub mu: f64,
    /// Correlation of `r_{⊥q q̂}` and `r̂_{⊥q q̂}`.
    pub rho: f64,
    /// Correlation of `q_{⊥r r̂}` and `q̂_{⊥r r̂}`.
    pub rho_target: f64,
    pub a3: UnitVector,
    pub a4: UnitVector,
    pub b3: UnitVector,
    pub b4: UnitVector,
    pub mode: BasisMode,
    pub preset: AnchorPreset,
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Orthonormal completion of `{x, y}` inside `span{x, y, u, w}` from the
/// residuals of `u` and `w`. Returns `(third, fourth, rho)`.
fn complete_pair(
    x: &UnitVector,
    y: &UnitVector,
    u: &UnitVector,
    w: &UnitVector,
    mode: BasisMode,
) -> Result<(UnitVector, UnitVector, f64)> {
    let u_res = residual(u, &[x, y]);
    let w_res = residual(w, &[x, y]);
    let u_unit = UnitVector::normalized(u_res)
        .map_err(|_| Error::DegenerateGeometry("anchor lies in the model plane"))?;
    let w_unit = UnitVector::normalized(w_res)
        .map_err(|_| Error::DegenerateGeometry("anchor lies in the model plane"))?;
    let rho = u_unit.dot(&w_unit);
    match mode {
        BasisMode::GramSchmidt => {
            let fourth = residual(&w_unit, &[x, y, &u_unit]);
            let fourth = UnitVector::normalized(fourth)
                .map_err(|_| Error::DegenerateGeometry("span is not 4-dimensional"))?;
            Ok((u_unit, fourth, rho))
        }
        BasisMode::Symmetric => {
            if rho.abs() >= 1.0 {
                return Err(Error::DegenerateGeometry("|rho| = 1"));
            }
            let plus = 1.0 / (2.0 * (1.0 + rho)).sqrt();
            let minus = 1.0 / (2.0 * (1.0 - rho)).sqrt();
            let third: Vec<f64> = u_unit
                .iter()
                .zip(w_unit.iter())
                .map(|(a, b)| plus * (a + b))
                .collect();
            let fourth: Vec<f64> = u_unit
                .iter()
                .zip(w_unit.iter())
                .map(|(a, b)| minus * (a - b))
                .collect();
            // one refinement pass against x, y for working-precision orthogonality
            let third = UnitVector::normalized(residual(&third, &[x, y]))?;
            let fourth = UnitVector::normalized(residual(&fourth, &[x, y, &third]))?;
            Ok((third, fourth, rho))
        }
    }
}

/// Builds `a₃, a₄ ⊥ {q, q̂}` and `b₃, b₄ ⊥ {r, r̂}` spanning, together with
/// those pairs, the 4-D space `L̂ = span{q, q̂, r, r̂}`.
pub fn build_bases(
    q: &UnitVector,
    qhat: &UnitVector,
    r: &UnitVector,
    rhat: &UnitVector,
    mode: BasisMode,
) -> Result<GeometryBundle> {
    let m = q.dim();
    for v in [qhat, r, rhat] {
        check_dims(m, v.dim())?;
    }
    let qq = q.dot(qhat);
    if qq.abs() > PAIR_ORTHOGONALITY_TOL {
        return Err(Error::NonOrthogonalInputs {
            which: "q,qhat",
            value: qq.abs(),
        });
    }
    let rr = r.dot(rhat);
    if rr.abs() > PAIR_ORTHOGONALITY_TOL {
        return Err(Error::NonOrthogonalInputs {
            which: "r,rhat",
            value: rr.abs(),
        });
    }
    if m < 4 {
        return Err(Error::DegenerateGeometry(
            "span of q, qhat, r, rhat needs m >= 4",
        ));
    }
    let vs: [&[f64]; 4] = [q, qhat, r, rhat];
    let mut gram = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            gram[i * 4 + j] = dot(vs[i], vs[j]);
        }
    }
    let min_eig = symmetric_eigenvalues(&gram, 4)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= SPAN_EIGEN_CUTOFF {
        return Err(Error::DegenerateGeometry(
            "span of q, qhat, r, rhat is not 4-dimensional",
        ));
    }
    let (a3, a4, rho) = complete_pair(q, qhat, r, rhat, mode)?;
    let (b3, b4, rho_target) = complete_pair(r, rhat, q, qhat, mode)?;
    let (_, mu) = orthogonal_part(q, r)?;
    Ok(GeometryBundle {
        q: q.clone(),
        qhat: qhat.clone(),
        r: r.clone(),
        rhat: rhat.clone(),
        mu,
        rho,
        rho_target,
        a3,
        a4,
        b3,
        b4,
        mode,
        preset: AnchorPreset::Custom,
    })
}

/// The operator `Î + Û` with `Û = r qᵀ + r̂ q̂ᵀ + b₃ a₃ᵀ + b₄ a₄ᵀ`.
pub fn build_rotation_4d(bundle: &GeometryBundle) -> Result<RotationOp> {
    let m = bundle.q.dim();
    for v in [
        &bundle.qhat,
        &bundle.r,
        &bundle.rhat,
        &bundle.a3,
        &bundle.a4,
        &bundle.b3,
        &bundle.b4,
    ] {
        check_dims(m, v.dim())?;
    }
    let sources = vec![
        bundle.q.to_vec(),
        bundle.qhat.to_vec(),
        bundle.a3.to_vec(),
        bundle.a4.to_vec(),
    ];
    let targets = vec![
        bundle.r.to_vec(),
        bundle.rhat.to_vec(),
        bundle.b3.to_vec(),
        bundle.b4.to_vec(),
    ];
    Ok(RotationOp {
        dim: m,
        kind: RotationKind::FourSubspace,
        factors: vec![Factor::Paired { sources, targets }],
        warning: None,
    })
}
