//! Small dense helpers. Everything here is O(m) or works on tiny fixed
//! matrices; nothing ever stores an m×m array.

use alloc::vec::Vec;
// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Removes the components along each (orthonormal) vector in `basis`,
/// twice, which keeps the residual orthogonal to working precision even
/// after heavy cancellation.
pub(crate) fn residual(v: &[f64], basis: &[&[f64]]) -> Vec<f64> {
    let mut out = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&out, b);
            axpy(-c, b, &mut out);
        }
    }
    out
}

/// Eigenvalues of a symmetric `n×n` matrix (row-major) by cyclic Jacobi.
pub(crate) fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut a = a.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let mut ev = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_4x4_matches_trace_and_diagonal_case() {
        let a = [
            4.0, 1.0, 0.5, 0.0, //
            1.0, 3.0, 0.2, 0.1, //
            0.5, 0.2, 2.0, 0.3, //
            0.0, 0.1, 0.3, 1.0,
        ];
        let ev = symmetric_eigenvalues(&a, 4);
        let trace: f64 = ev.iter().sum();
        assert!((trace - 10.0).abs() < 1e-12);
        let diag = symmetric_eigenvalues(&[5.0, 0.0, 0.0, 7.0], 2);
        assert_eq!(diag, alloc::vec![5.0, 7.0]);
    }

    #[test]
    fn residual_is_orthogonal() {
        let e1 = [1.0, 0.0, 0.0];
        let r = residual(&[3.0, 2.0, 1.0], &[&e1]);
        assert_eq!(r, alloc::vec![0.0, 2.0, 1.0]);
    }
}
