//! The proper inner product `⟨φ|Q|ψ⟩` with `Q = (P†)⁻¹·P⁻¹`, the adjoint it
//! induces, and the Q-hermitian / anti-Q-hermitian split of `H`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_eigenvalues, inverse, ComplexMatrix, SpectralDecomposition};
use crate::state::StateVector;

/// Norms below this are treated as zero vectors.
pub const ZERO_NORM: f64 = 1e-14;

/// Hermitian positive-definite metric `Q` and its inverse.
///
/// Cloning is cheap; states normalized under a metric keep a handle to it.
#[derive(Debug, Clone)]
pub struct QMetric(Arc<MetricData>);

#[derive(Debug)]
struct MetricData {
    q: ComplexMatrix,
    q_inv: ComplexMatrix,
    source_kappa: f64,
}

impl QMetric {
    /// The standard inner product.
    pub fn identity(dim: usize) -> Self {
        Self(Arc::new(MetricData {
            q: ComplexMatrix::identity(dim),
            q_inv: ComplexMatrix::identity(dim),
            source_kappa: 1.0,
        }))
    }

    /// Wraps an explicit metric after checking it is hermitian and positive
    /// definite.
    pub fn from_matrix(q: ComplexMatrix) -> Result<Self> {
        let scale = q.norm().max(f64::MIN_POSITIVE);
        if q.hermitian_residual() > 1e-12 * scale {
            return Err(Error::InvalidInput("metric must be hermitian".into()));
        }
        let min_ev = hermitian_eigenvalues(&q).first().copied().unwrap_or(0.0);
        if min_ev <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "metric must be positive definite (smallest eigenvalue {min_ev:.3e})"
            )));
        }
        let q_inv = inverse(&q)?;
        Ok(Self(Arc::new(MetricData {
            q,
            q_inv,
            source_kappa: f64::NAN,
        })))
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.0.q
    }

    pub fn q_inv(&self) -> &ComplexMatrix {
        &self.0.q_inv
    }

    /// `κ(P)` of the decomposition the metric was built from; NaN for
    /// metrics supplied directly.
    pub fn source_kappa(&self) -> f64 {
        self.0.source_kappa
    }

    pub fn dim(&self) -> usize {
        self.0.q.dim()
    }

    /// `φ†·Q·ψ` on raw amplitude slices.
    pub fn inner(&self, phi: &[Complex64], psi: &[Complex64]) -> Result<Complex64> {
        self.check(phi.len())?;
        self.check(psi.len())?;
        Ok(dot(phi, &self.0.q.mul_vec_unchecked(psi)))
    }

    /// `⟨ψ|Q|ψ⟩`, real and positive for `ψ ≠ 0`.
    pub fn norm_sq(&self, psi: &[Complex64]) -> Result<f64> {
        Ok(self.inner(psi, psi)?.re)
    }

    pub fn norm(&self, psi: &[Complex64]) -> Result<f64> {
        Ok(self.norm_sq(psi)?.max(0.0).sqrt())
    }

    /// `Q·ψ`, the ket whose standard components give `⟨q_j|_Q ψ⟩`.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.0.q.mat_vec(psi)
    }

    /// `‖Q − Q†‖ / ‖Q‖`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.0.q.hermitian_residual() / self.0.q.norm()
    }

    /// `‖Q·Q⁻¹ − I‖`.
    pub fn inverse_residual(&self) -> f64 {
        (&self.0.q * &self.0.q_inv).distance(&ComplexMatrix::identity(self.dim()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0.q)[0]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    fn check_matrix(&self, a: &ComplexMatrix) -> Result<()> {
        self.check(a.dim())
    }
}

/// Builds `Q = (P†)⁻¹·P⁻¹ = (P⁻¹)†·P⁻¹`, with `Q⁻¹ = P·P†`.
pub fn build_q(d: &SpectralDecomposition) -> Result<QMetric> {
    let p_inv = &d.p_inv;
    let mut q = &p_inv.adjoint() * p_inv;
    let n = q.dim();
    for i in 0..n {
        q[(i, i)] = Complex64::new(q[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (q[(i, j)] + q[(j, i)].conj()) * 0.5;
            q[(i, j)] = v;
            q[(j, i)] = v.conj();
        }
    }
    let q_inv = &d.p * &d.p.adjoint();
    Ok(QMetric(Arc::new(MetricData {
        q,
        q_inv,
        source_kappa: d.kappa,
    })))
}

/// `max_{i,j} |⟨λ_i|Q|λ_j⟩ − δ_ij|` over the eigenvectors of `d`.
pub fn biorthogonality_error(d: &SpectralDecomposition, qm: &QMetric) -> Result<f64> {
    let gram = &(&d.p.adjoint() * qm.q()) * &d.p;
    let n = gram.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(delta, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// The matrix whose rows are the bras `⟨λ_i|_Q = (Q·|λ_i⟩)†`; equals `P⁻¹`
/// when `P` is Q-unitary.
pub fn dual_rows(d: &SpectralDecomposition, qm: &QMetric) -> Result<ComplexMatrix> {
    qm.check_matrix(&d.p)?;
    Ok(&d.p.adjoint() * qm.q())
}

/// `⟨φ|Q|ψ⟩`.
pub fn q_inner(qm: &QMetric, phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
    qm.inner(&phi.amplitudes, &psi.amplitudes)
}

/// `A^{†_Q} = Q⁻¹·A†·Q`.
pub fn q_adjoint(qm: &QMetric, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    qm.check_matrix(a)?;
    Ok(&(qm.q_inv() * &a.adjoint()) * qm.q())
}

/// `‖A − A^{†_Q}‖ / max(‖A‖, 1e-300)`.
pub fn q_hermiticity_residual(qm: &QMetric, a: &ComplexMatrix) -> Result<f64> {
    let adj = q_adjoint(qm, a)?;
    Ok(a.distance(&adj) / a.norm().max(1e-300))
}

pub fn is_q_hermitian(qm: &QMetric, a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(q_hermiticity_residual(qm, a)? <= tol)
}

pub fn is_anti_q_hermitian(qm: &QMetric, a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let adj = q_adjoint(qm, a)?;
    Ok((a + &adj).norm() <= tol * a.norm().max(1e-300))
}

/// `H = H_Qh + H_Qa`.
#[derive(Debug, Clone)]
pub struct QSplit {
    /// `P·Re(D)·P⁻¹`.
    pub h_qh: ComplexMatrix,
    /// `H − H_Qh`, equal to `i·P·Im(D)·P⁻¹`.
    pub h_qa: ComplexMatrix,
    /// Largest deviation from `(H ± H^{†_Q})/2`, relative to `‖H‖`.
    pub crosscheck_residual: f64,
}

impl QSplit {
    pub fn hamiltonian(&self) -> ComplexMatrix {
        &self.h_qh + &self.h_qa
    }
}

pub fn q_split(d: &SpectralDecomposition, qm: &QMetric) -> Result<QSplit> {
    qm.check_matrix(&d.h)?;
    let h_qh = d.spectral_map(|lam| Complex64::new(lam.re, 0.0));
    let h_qa = &d.h - &h_qh;

    let adj = q_adjoint(qm, &d.h)?;
    let half = Complex64::new(0.5, 0.0);
    let herm = (&d.h + &adj).scale(half);
    let anti = (&d.h - &adj).scale(half);
    let scale = d.h.norm().max(1e-300);
    let crosscheck_residual = h_qh.distance(&herm).max(h_qa.distance(&anti)) / scale;

    Ok(QSplit {
        h_qh,
        h_qa,
        crosscheck_residual,
    })
}

/// `‖[H, H^{†_Q}]‖ / ‖H‖²`; zero for `H = 0`.
pub fn q_normality_residual(h: &ComplexMatrix, qm: &QMetric) -> Result<f64> {
    let hn = h.norm();
    if hn == 0.0 {
        return Ok(0.0);
    }
    let adj = q_adjoint(qm, h)?;
    Ok(h.commutator(&adj).norm() / (hn * hn))
}

/// Which inner product a transition probability is evaluated in.
#[derive(Debug, Clone, Copy)]
pub enum Metric<'a> {
    Standard,
    Q(&'a QMetric),
}

impl Metric<'_> {
    pub fn inner(&self, phi: &[Complex64], psi: &[Complex64]) -> Result<Complex64> {
        match self {
            Metric::Standard => {
                if phi.len() != psi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: phi.len(),
                        found: psi.len(),
                    });
                }
                Ok(dot(phi, psi))
            }
            Metric::Q(qm) => qm.inner(phi, psi),
        }
    }
}

/// Born-rule probability `|⟨f|ψ⟩|²` with both arguments normalized in the
/// chosen inner product.
pub fn transition_probability(metric: Metric<'_>, f: &StateVector, psi: &StateVector) -> Result<f64> {
    let ff = metric.inner(&f.amplitudes, &f.amplitudes)?.re;
    let pp = metric.inner(&psi.amplitudes, &psi.amplitudes)?.re;
    for n2 in [ff, pp] {
        let norm = n2.max(0.0).sqrt();
        if norm < ZERO_NORM {
            return Err(Error::ZeroVector { norm });
        }
    }
    let overlap = metric.inner(&f.amplitudes, &psi.amplitudes)?;
    Ok((overlap.norm_sqr() / (ff * pp)).clamp(0.0, 1.0))
}
