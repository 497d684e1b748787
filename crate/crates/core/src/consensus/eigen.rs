//! Cyclic Jacobi eigenvalue iteration for small dense symmetric matrices.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Symmetry slack accepted on input, relative to `max(1, max|m_ij|)`.
const SYMMETRY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<S> {
    /// Eigenvalues in ascending order.
    pub values: Vec<S>,
    /// Frobenius norm of the off-diagonal part at return.
    pub offdiag_residual: S,
    pub sweeps: usize,
}

fn offdiag_norm<S: Scalar>(a: &Matrix<S>) -> S {
    let n = a.dim();
    let mut sum = S::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum = sum + a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Applies the plane rotation that annihilates `a[p][q]`.
fn rotate<S: Scalar>(a: &mut Matrix<S>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == S::zero() {
        return;
    }
    let two = S::lit(2.0);
    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
    let t = if theta == S::zero() {
        S::one()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt())
    };
    let c = S::one() / (t * t + S::one()).sqrt();
    let s = t * c;
    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = S::zero();
    a[(q, p)] = S::zero();
}

/// All eigenvalues of a symmetric matrix, sorted ascending.
///
/// Sweeps over every off-diagonal pair until the off-diagonal Frobenius norm
/// drops to `tol`. Fails with [`Error::EigenConvergence`] when `max_sweeps`
/// sweeps are not enough.
pub fn eigenvalues_symmetric<S: Scalar>(
    m: &Matrix<S>,
    tol: S,
    max_sweeps: usize,
) -> Result<EigenResult<S>> {
    if !(tol > S::zero()) {
        return Err(Error::Argument(
            "eigensolver tolerance must be positive".into(),
        ));
    }
    let slack = S::lit(SYMMETRY_SLACK) * m.max_abs().max(S::one());
    if m.asymmetry() > slack {
        return Err(Error::Argument(format!(
            "matrix is not symmetric (asymmetry {})",
            m.asymmetry()
        )));
    }

    let n = m.dim();
    let mut a = m.clone();
    let mut sweeps = 0;
    loop {
        let residual = offdiag_norm(&a);
        if residual <= tol {
            let mut values: Vec<S> = (0..n).map(|i| a[(i, i)]).collect();
            values.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
            return Ok(EigenResult {
                values,
                offdiag_residual: residual,
                sweeps,
            });
        }
        if sweeps == max_sweeps {
            return Err(Error::EigenConvergence {
                sweeps,
                residual: residual.widen(),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
        sweeps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate, laplacian, TopologyKind};
    use std::f64::consts::PI;

    fn solve(m: &Matrix<f64>) -> EigenResult<f64> {
        eigenvalues_symmetric(m, DEFAULT_TOLERANCE, DEFAULT_MAX_SWEEPS).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Closed-form eigenvalues of a symmetric 3x3 via the trigonometric
    /// solution of the characteristic cubic.
    fn cubic_oracle(m: &[[f64; 3]; 3]) -> [f64; 3] {
        let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        if p1 == 0.0 {
            let mut d = [m[0][0], m[1][1], m[2][2]];
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return d;
        }
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
            }
        }
        let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut out = [e1, e2, e3];
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn diagonal_input() {
        let m = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let r = solve(&m);
        assert_eq!(r.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(r.sweeps, 0);
    }

    #[test]
    fn path3_laplacian() {
        let l = laplacian::<f64>(&generate(TopologyKind::Path, 3, 0).unwrap());
        let r = solve(&l);
        assert!(close(&r.values, &[0.0, 1.0, 3.0], 1e-12), "{:?}", r.values);
        assert!(r.offdiag_residual <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn ring10_matches_circulant_formula() {
        let l = laplacian::<f64>(&generate(TopologyKind::Ring, 10, 0).unwrap());
        let mut expected: Vec<f64> = (0..10)
            .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / 10.0).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(close(&solve(&l).values, &expected, 1e-10));
    }

    #[test]
    fn f32_solver() {
        let l = laplacian::<f32>(&generate(TopologyKind::Path, 3, 0).unwrap());
        let r = eigenvalues_symmetric(&l, 1e-5f32, 50).unwrap();
        assert!((r.values[2] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_asymmetric_and_bad_tolerance() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(solve_err(&m, 1e-12), Error::Argument(_)));
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(solve_err(&m, 0.0), Error::Argument(_)));
    }

    fn solve_err(m: &Matrix<f64>, tol: f64) -> Error {
        eigenvalues_symmetric(m, tol, 10).unwrap_err()
    }

    #[test]
    fn sweep_budget_exhaustion_reports_residual() {
        let l = laplacian::<f64>(&generate(TopologyKind::Ring, 10, 0).unwrap());
        match eigenvalues_symmetric(&l, 1e-14, 0).unwrap_err() {
            Error::EigenConvergence { sweeps, residual } => {
                assert_eq!(sweeps, 0);
                assert!(residual > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_cubic_oracle(v in proptest::array::uniform6(-10.0f64..10.0)) {
                let rows = [[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]];
                let m = Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
                let got = solve(&m).values;
                let want = cubic_oracle(&rows);
                for (g, w) in got.iter().zip(want.iter()) {
                    prop_assert!((g - w).abs() <= 1e-7, "{:?} vs {:?}", got, want);
                }
            }

            #[test]
            fn trace_is_preserved(n in 1usize..12, seed in proptest::collection::vec(-5.0f64..5.0, 144)) {
                let mut m = Matrix::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        m[(i, j)] = seed[i * 12 + j];
                        m[(j, i)] = seed[i * 12 + j];
                    }
                }
                let r = solve(&m);
                let sum: f64 = r.values.iter().sum();
                prop_assert!((sum - m.trace()).abs() <= 1e-9 * (1.0 + m.trace().abs()));
                prop_assert!(r.offdiag_residual <= DEFAULT_TOLERANCE);
                prop_assert!(r.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
