use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P·A = L·U`, packed in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors `m`. A pivot smaller than `n·ε·max|m_ij|` is reported as
    /// [`Error::Singular`].
    pub fn factor(m: &ComplexMatrix) -> Result<Self> {
        let n = m.dim();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = (n as f64) * f64::EPSILON * m.max_abs();

        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::Singular { column: k, pivot: pmax });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solves `A·X = B` column by column.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.dim();
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Matrix inverse through LU with partial pivoting.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite("inverse input"));
    }
    let lu = Lu::factor(m)?;
    Ok(lu.solve(&ComplexMatrix::identity(m.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverse() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(inverse(&id).unwrap(), id);
    }

    #[test]
    fn upper_triangular_two_by_two() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let inv = inverse(&m).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, -0.5], vec![0.0, 0.5]]).unwrap();
        assert!(inv.distance(&want) < 1e-15);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(inverse(&m), Err(Error::Singular { .. })));
    }

    #[test]
    fn complex_inverse_round_trip() {
        let m = ComplexMatrix::from_rows(&[
            vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(2.0, -1.0),
                Complex64::new(0.5, 0.0),
            ],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 3.0),
            ],
            vec![
                Complex64::new(0.3, 0.3),
                Complex64::new(1.0, 1.0),
                Complex64::new(2.0, 0.0),
            ],
        ])
        .unwrap();
        let inv = inverse(&m).unwrap();
        assert!((&m * &inv).distance(&ComplexMatrix::identity(3)) < 1e-14);
        assert!((&inv * &m).distance(&ComplexMatrix::identity(3)) < 1e-14);
    }
}
