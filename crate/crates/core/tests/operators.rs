//! Rotation operators checked against dense matrices built independently
//! with nalgebra.

use dfgof_core::rotations::{
    build_bases, build_rotation_2d, build_rotation_4d, hellinger_pair, householder_map,
    recursive_rotation,
};
use dfgof_core::transforms::transform_parametric;
use dfgof_core::{
    BasisMode, ComponentKind, ComponentVector, GeometryBundle, Provenance, RotationOp, UnitVector,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TOL: f64 = 1e-10;

fn dense(op: &RotationOp) -> DMatrix<f64> {
    let m = op.dim();
    DMatrix::from_row_slice(m, m, &op.to_dense())
}

fn col(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn gaussian(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit(rng: &mut ChaCha8Rng, m: usize) -> UnitVector {
    UnitVector::normalized(gaussian(rng, m)).unwrap()
}

/// Unit vector orthogonal to `to`.
fn unit_perp(rng: &mut ChaCha8Rng, to: &UnitVector) -> UnitVector {
    let x = col(&gaussian(rng, to.dim()));
    let t = col(to);
    let v = &x - &t * t.dot(&x);
    UnitVector::normalized(v.as_slice().to_vec()).unwrap()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let m = u.nrows();
    max_abs(&(u * u.transpose() - DMatrix::identity(m, m)))
        .max(max_abs(&(u.transpose() * u - DMatrix::identity(m, m))))
}

/// Projector onto the orthogonal complement of the columns of `basis`,
/// from an SVD so that it does not share code with the library.
fn complement_projector(basis: &[&[f64]]) -> DMatrix<f64> {
    let m = basis[0].len();
    let a = DMatrix::from_columns(&basis.iter().map(|v| col(v)).collect::<Vec<_>>());
    let svd = a.svd(true, false);
    let u = svd.u.unwrap();
    let mut p = DMatrix::identity(m, m);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-9 {
            let uk = u.column(k);
            p -= uk * uk.transpose();
        }
    }
    p
}

fn bundle(rng: &mut ChaCha8Rng, m: usize, mode: BasisMode) -> GeometryBundle {
    loop {
        let q = unit(rng, m);
        let qhat = unit_perp(rng, &q);
        let r = unit(rng, m);
        let rhat = unit_perp(rng, &r);
        if let Ok(b) = build_bases(&q, &qhat, &r, &rhat, mode) {
            return b;
        }
    }
}

fn yhat_vector(values: Vec<f64>) -> ComponentVector {
    let prov = Provenance {
        model: 0,
        anchor: None,
        n: None,
        two_sample: false,
        source: None,
    };
    ComponentVector::new(values, ComponentKind::ParametricYHat, prov)
}

#[test]
fn two_subspace_rotation_is_the_reflection_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [2, 3, 5, 17, 40] {
        for _ in 0..20 {
            let q = unit(&mut rng, m);
            let r = unit(&mut rng, m);
            let c = q.dot(&r);
            let v = col(&r) - col(&q);
            // I − (r − q)(r − q)ᵀ/(1 − ⟨q,r⟩)
            let oracle = DMatrix::identity(m, m) - &v * v.transpose() / (1.0 - c);
            let op = build_rotation_2d(&q, &r).unwrap();
            assert!(max_abs(&(dense(&op) - &oracle)) <= TOL);
            let hh = householder_map(&q, &r).unwrap();
            assert!(max_abs(&(dense(&hh) - &dense(&op))) <= 1e-12);
            assert!(orthogonality_defect(&oracle) <= 1e-12);
        }
    }
}

#[test]
fn bases_lie_in_the_span_and_complete_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for mode in [BasisMode::GramSchmidt, BasisMode::Symmetric] {
        for m in 4..20 {
            let b = bundle(&mut rng, m, mode);
            let outside = complement_projector(&[&b.q, &b.qhat, &b.r, &b.rhat]);
            for v in [&b.a3, &b.a4, &b.b3, &b.b4] {
                assert!((&outside * col(v)).norm() <= TOL);
            }
            let frame_a = DMatrix::from_columns(&[col(&b.q), col(&b.qhat), col(&b.a3), col(&b.a4)]);
            let frame_b = DMatrix::from_columns(&[col(&b.r), col(&b.rhat), col(&b.b3), col(&b.b4)]);
            for f in [&frame_a, &frame_b] {
                assert!(max_abs(&(f.transpose() * f - DMatrix::identity(4, 4))) <= TOL);
            }
            // both frames span the same 4-D subspace
            let pa = &frame_a * frame_a.transpose();
            let pb = &frame_b * frame_b.transpose();
            assert!(max_abs(&(pa - pb)) <= TOL);
        }
    }
}

#[test]
fn four_subspace_operator_is_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let m = 4 + i % 16;
        let mode = if i % 2 == 0 {
            BasisMode::GramSchmidt
        } else {
            BasisMode::Symmetric
        };
        let b = bundle(&mut rng, m, mode);
        let u = dense(&build_rotation_4d(&b).unwrap());
        assert!(orthogonality_defect(&u) <= TOL);
    }
}

#[test]
fn parametric_formula_matches_dense_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let m = 4 + i % 30;
        let mode = if i % 2 == 0 {
            BasisMode::GramSchmidt
        } else {
            BasisMode::Symmetric
        };
        let b = bundle(&mut rng, m, mode);
        let u = dense(&build_rotation_4d(&b).unwrap());
        // Ŷ ⊥ q, q̂ as for an exact score root
        let x = col(&gaussian(&mut rng, m));
        let y = complement_projector(&[&b.q, &b.qhat]) * x;
        let got = transform_parametric(&yhat_vector(y.as_slice().to_vec()), &b).unwrap();
        // Ŷ − ⟨Ŷ,a₃⟩(a₃ − b₃) − ⟨Ŷ,a₄⟩(a₄ − b₄)
        let (a3, a4, b3, b4) = (col(&b.a3), col(&b.a4), col(&b.b3), col(&b.b4));
        let literal = &y - (&a3 - &b3) * a3.dot(&y) - (&a4 - &b4) * a4.dot(&y);
        let via_matrix = &u * &y;
        assert!((col(got.values()) - &literal).amax() <= TOL);
        assert!((&via_matrix - &literal).amax() <= TOL);
    }
}

#[test]
fn recursive_and_four_subspace_rotations_share_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut largest_difference: f64 = 0.0;
    for i in 0..100 {
        let m = 4 + i % 12;
        let b = bundle(&mut rng, m, BasisMode::GramSchmidt);
        let four = build_rotation_4d(&b).unwrap();
        let rec = recursive_rotation(
            &b.q,
            std::slice::from_ref(&b.qhat),
            &b.r,
            std::slice::from_ref(&b.rhat),
        )
        .unwrap();
        let (uf, ur) = (dense(&four), dense(&rec));
        assert!(orthogonality_defect(&ur) <= TOL);
        for u in [&uf, &ur] {
            assert!((u * col(&b.q) - col(&b.r)).amax() <= TOL);
            assert!((u * col(&b.qhat) - col(&b.rhat)).amax() <= TOL);
        }
        let x = col(&gaussian(&mut rng, m));
        let (zf, zr) = (&uf * &x, &ur * &x);
        assert!((zf.norm() - zr.norm()).abs() <= TOL);
        assert!((zf.dot(&col(&b.r)) - zr.dot(&col(&b.r))).abs() <= TOL);
        assert!((zf.dot(&col(&b.rhat)) - zr.dot(&col(&b.rhat))).abs() <= TOL);
        // they may only differ inside span{b₃, b₄}
        let diff = &zf - &zr;
        let outside = complement_projector(&[&b.b3, &b.b4]) * &diff;
        assert!(outside.amax() <= TOL);
        largest_difference = largest_difference.max(diff.amax());
    }
    assert!(
        largest_difference > 1e-3,
        "the two constructions are not expected to coincide"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn two_subspace_contracts(seed in any::<u64>(), m in 2usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = unit(&mut rng, m);
        let r = unit(&mut rng, m);
        for op in [build_rotation_2d(&q, &r).unwrap(), householder_map(&q, &r).unwrap()] {
            let u = dense(&op);
            prop_assert!((&u * col(&q) - col(&r)).amax() <= TOL);
            let x = col(&gaussian(&mut rng, m));
            let ux = col(&op.apply(x.as_slice()).unwrap());
            prop_assert!((ux.norm() - x.norm()).abs() <= TOL);
            let back = col(&op.apply_transpose(ux.as_slice()).unwrap());
            prop_assert!((back - &x).amax() <= TOL);
            if m > 2 {
                let fixed = complement_projector(&[&q, &r]) * &x;
                let moved = col(&op.apply(fixed.as_slice()).unwrap());
                prop_assert!((moved - fixed).amax() <= TOL);
            }
        }
        let (dist_sq, hellinger) = hellinger_pair(&q, &r).unwrap();
        prop_assert!((dist_sq - hellinger).abs() <= 1e-12);
    }

    #[test]
    fn four_subspace_contracts(seed in any::<u64>(), m in 4usize..40, symmetric in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode = if symmetric { BasisMode::Symmetric } else { BasisMode::GramSchmidt };
        let b = bundle(&mut rng, m, mode);
        let op = build_rotation_4d(&b).unwrap();
        prop_assert!((col(&op.apply(&b.q).unwrap()) - col(&b.r)).amax() <= TOL);
        prop_assert!((col(&op.apply(&b.qhat).unwrap()) - col(&b.rhat)).amax() <= TOL);
        let x = col(&gaussian(&mut rng, m));
        let ux = col(&op.apply(x.as_slice()).unwrap());
        prop_assert!((ux.norm() - x.norm()).abs() <= TOL);
        prop_assert!((col(&op.apply_transpose(ux.as_slice()).unwrap()) - &x).amax() <= TOL);
        if m > 4 {
            let fixed = complement_projector(&[&b.q, &b.qhat, &b.r, &b.rhat]) * &x;
            let moved = col(&op.apply(fixed.as_slice()).unwrap());
            prop_assert!((moved - fixed).amax() <= TOL);
        }
    }
}
