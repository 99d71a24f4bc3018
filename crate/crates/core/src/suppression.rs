//! Long-time suppression of the anti-Q-hermitian part of `H`.
//!
//! Modes whose eigenvalues carry the largest imaginary part `B` (the
//! dominant subset `A`) outgrow all others by `e^{Δt/ħ}`, where `Δ` is the
//! gap to the next imaginary part. After normalization the state follows
//! the Q-hermitian `H_eff = P·D̃_R·P⁻¹`, with `D̃_R` keeping `Re λ_i` on `A`
//! and zero elsewhere.

use num_complex::Complex64;

use crate::dynamics::{check_times, evolve_normalized, normalize, EvolutionTrace};
use crate::error::{Error, Result};
use crate::linalg::{spectral_exp, ComplexMatrix, SpectralDecomposition};
use crate::qmetric::{QMetric, ZERO_NORM};
use crate::state::{NormalizedState, StateVector};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Distances at or below this are excluded from the decay-rate fit.
pub const FIT_FLOOR: f64 = 1e-13;

/// Indices whose imaginary part lies within `eps_a` of the maximum `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantSubset {
    /// Sorted ascending.
    pub indices: Vec<usize>,
    pub b: f64,
    /// `B − max_{i∉A} Im λ_i`; `+∞` when `A` holds every index.
    pub gap: f64,
    pub eps_a: f64,
}

impl DominantSubset {
    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn covers_all(&self, dim: usize) -> bool {
        self.indices.len() == dim
    }
}

/// `1e-9 · max(1, spread of Im λ)`.
pub fn default_eps_a(eigenvalues: &[Complex64]) -> f64 {
    let (lo, hi) = eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
            (lo.min(z.im), hi.max(z.im))
        });
    1e-9 * (hi - lo).max(1.0)
}

pub fn dominant_subset(eigenvalues: &[Complex64], eps_a: Option<f64>) -> Result<DominantSubset> {
    if eigenvalues.is_empty() {
        return Err(Error::InvalidInput("eigenvalue list is empty".into()));
    }
    let eps_a = eps_a.unwrap_or_else(|| default_eps_a(eigenvalues));
    if !(eps_a > 0.0) {
        return Err(Error::InvalidInput(format!("eps_a must be positive, got {eps_a}")));
    }
    let b = eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    let indices: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i].im >= b - eps_a)
        .collect();
    let next = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i].im < b - eps_a)
        .map(|i| eigenvalues[i].im)
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = if next.is_finite() { b - next } else { f64::INFINITY };
    Ok(DominantSubset { indices, b, gap, eps_a })
}

fn check_subset(d: &SpectralDecomposition, a: &DominantSubset) -> Result<()> {
    if a.is_empty() || a.indices.iter().any(|&i| i >= d.dim()) {
        return Err(Error::InvalidInput(
            "dominant subset does not match the decomposition".into(),
        ));
    }
    Ok(())
}

/// Diagonal of `D̃_R`.
fn truncated_real_spectrum(d: &SpectralDecomposition, a: &DominantSubset) -> Vec<Complex64> {
    d.eigenvalues
        .iter()
        .enumerate()
        .map(|(i, lam)| {
            if a.contains(i) {
                Complex64::new(lam.re, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// `H_eff = P·D̃_R·P⁻¹`.
pub fn build_h_eff(d: &SpectralDecomposition, a: &DominantSubset) -> Result<ComplexMatrix> {
    check_subset(d, a)?;
    let diag = truncated_real_spectrum(d, a);
    let mut scaled = d.p.clone();
    for (j, &v) in diag.iter().enumerate() {
        for i in 0..d.dim() {
            scaled[(i, j)] *= v;
        }
    }
    Ok(&scaled * &d.p_inv)
}

/// `e^{−i·H_eff·t/ħ}` through the shared eigenbasis.
pub fn h_eff_propagator(d: &SpectralDecomposition, a: &DominantSubset, t: f64, hbar: f64) -> Result<ComplexMatrix> {
    check_subset(d, a)?;
    let truncated = SpectralDecomposition {
        eigenvalues: truncated_real_spectrum(d, a),
        ..d.clone()
    };
    Ok(spectral_exp(&truncated, -I * (t / hbar)))
}

/// `|ψ̃⟩ = Σ_{i∈A} a_i |λ_i⟩` with `a = P⁻¹·ψ`.
///
/// Fails with [`Error::ProjectionZero`] when the retained coefficients have
/// Q-norm below `1e-14`; the Q-norm of the projection is `‖a_A‖₂` because
/// the eigenvectors are Q-orthonormal.
pub fn project_tilde(d: &SpectralDecomposition, a: &DominantSubset, psi: &StateVector) -> Result<StateVector> {
    check_subset(d, a)?;
    let mut coeffs = d.coefficients(&psi.amplitudes)?;
    for (i, c) in coeffs.iter_mut().enumerate() {
        if !a.contains(i) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < ZERO_NORM {
        return Err(Error::ProjectionZero { norm });
    }
    Ok(StateVector {
        amplitudes: d.p.mul_vec_unchecked(&coeffs),
        label: psi.label.clone(),
    })
}

/// Distance trace between the normalized exact state and the `H_eff` flow
/// of the normalized projection, with the fitted tail decay rate.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    /// `states` hold the normalized exact evolution; `distances` hold d(t).
    pub trace: EvolutionTrace,
    /// Slope of `ln d(t)` over the tail; `None` when fewer than two tail
    /// samples exceed [`FIT_FLOOR`].
    pub fitted_rate: Option<f64>,
    /// `−Δ/ħ`, or `None` when `Δ` is infinite.
    pub predicted_rate: Option<f64>,
}

impl ConvergenceTrace {
    /// `|fitted − predicted| / |predicted|`.
    pub fn rate_error(&self) -> Option<f64> {
        match (self.fitted_rate, self.predicted_rate) {
            (Some(f), Some(p)) => Some((f - p).abs() / p.abs()),
            _ => None,
        }
    }
}

pub fn convergence_trace(
    d: &SpectralDecomposition,
    qm: &QMetric,
    a: &DominantSubset,
    psi0: &StateVector,
    times: &[f64],
    hbar: f64,
) -> Result<ConvergenceTrace> {
    check_times(times)?;
    let tilde0 = normalize(qm, &project_tilde(d, a, psi0)?)?;
    let mut trace = EvolutionTrace::default();
    let mut distances = Vec::with_capacity(times.len());
    for &t in times {
        let exact = evolve_normalized(d, qm, psi0, t, hbar)?;
        let u_eff = h_eff_propagator(d, a, t, hbar)?;
        let tilde = u_eff.mul_vec_unchecked(tilde0.amplitudes());
        let diff: Vec<Complex64> = exact.amplitudes().iter().zip(&tilde).map(|(x, y)| x - y).collect();
        distances.push(qm.norm(&diff)?);
        trace.times.push(t);
        trace.norms.push(1.0);
        trace.states.push(exact.to_state());
    }
    let fitted_rate = fit_log_slope(&trace.times, &distances);
    trace.distances = Some(distances);
    let predicted_rate = if a.gap.is_finite() { Some(-a.gap / hbar) } else { None };
    Ok(ConvergenceTrace {
        trace,
        fitted_rate,
        predicted_rate,
    })
}

/// Least-squares slope of `ln y` against `t` over the last half of the grid,
/// using only samples with `y > FIT_FLOOR`.
pub fn fit_log_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    let start = times.len() / 2;
    let pts: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, &y)| y > FIT_FLOOR && y.is_finite())
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Outcome of back-extrapolating a late state with `H_eff`.
#[derive(Debug, Clone)]
pub struct HistorianReport {
    pub psi_true: NormalizedState,
    pub psi_historian: NormalizedState,
    /// `|⟨ψ_true|_Q ψ_historian⟩|²`.
    pub fidelity: f64,
    /// Phase-aligned Q-distance `min_θ ‖ψ_true − e^{iθ}ψ_historian‖_Q`.
    pub q_distance: f64,
    /// `|A| / dim`.
    pub subspace_fraction: f64,
}

/// Compares the true state at `t1` with the one a late observer at `t`
/// infers by evolving their normalized state backwards with `H_eff`.
#[allow(clippy::too_many_arguments)]
pub fn historian_experiment(
    d: &SpectralDecomposition,
    qm: &QMetric,
    a: &DominantSubset,
    psi0: &StateVector,
    t1: f64,
    t: f64,
    hbar: f64,
) -> Result<HistorianReport> {
    if !(0.0 <= t1 && t1 <= t) {
        return Err(Error::InvalidInput(format!("need 0 ≤ t1 ≤ t, got t1 = {t1}, t = {t}")));
    }
    let psi_true = evolve_normalized(d, qm, psi0, t1, hbar)?;
    let late = evolve_normalized(d, qm, psi0, t, hbar)?;
    let back = h_eff_propagator(d, a, t1 - t, hbar)?;
    let psi_historian = normalize(
        qm,
        &StateVector {
            amplitudes: back.mul_vec_unchecked(late.amplitudes()),
            label: None,
        },
    )?;
    let overlap = qm.inner(psi_true.amplitudes(), psi_historian.amplitudes())?;
    let fidelity = overlap.norm_sqr().clamp(0.0, 1.0);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let aligned: Vec<Complex64> = psi_true
        .amplitudes()
        .iter()
        .zip(psi_historian.amplitudes())
        .map(|(x, y)| x - phase * y)
        .collect();
    let q_distance = qm.norm(&aligned)?;
    Ok(HistorianReport {
        psi_true,
        psi_historian,
        fidelity,
        q_distance,
        subspace_fraction: a.len() as f64 / d.dim() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, inverse, EigOptions};
    use crate::qmetric::{build_q, q_adjoint};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn planted(l1: Complex64, l2: Complex64) -> SpectralDecomposition {
        let r = 0.5f64.sqrt();
        let p = ComplexMatrix::from_real_rows(&[vec![1.0, r], vec![0.0, r]]).unwrap();
        let dm = ComplexMatrix::from_diagonal(&[l1, l2]);
        let h = &(&p * &dm) * &inverse(&p).unwrap();
        eig(&h, &EigOptions::default()).unwrap()
    }

    #[test]
    fn subset_examples() {
        let a = dominant_subset(&[c(1.0, 0.5), c(2.0, -0.5)], None).unwrap();
        assert_eq!(a.indices, vec![0]);
        assert_eq!(a.b, 0.5);
        assert!((a.gap - 1.0).abs() < 1e-15);

        let all = dominant_subset(&[c(1.0, 0.0), c(-2.0, 0.0), c(3.0, 0.0)], None).unwrap();
        assert_eq!(all.indices, vec![0, 1, 2]);
        assert!(all.gap.is_infinite());

        let band = dominant_subset(&[c(0.0, 1.0), c(1.0, 1.0 - 1e-12)], Some(1e-9)).unwrap();
        assert_eq!(band.indices, vec![0, 1]);
        assert!(dominant_subset(&[], None).is_err());
    }

    #[test]
    fn h_eff_of_planted_instance() {
        let d = planted(c(1.0, 0.5), c(2.0, -0.5));
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        let h_eff = build_h_eff(&d, &a).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
        assert!(h_eff.distance(&want) < 1e-13, "{h_eff:?}");
        let l1 = d.eigenvector(0);
        let l2 = d.eigenvector(1);
        let h1 = h_eff.mat_vec(&l1).unwrap();
        let h2 = h_eff.mat_vec(&l2).unwrap();
        for k in 0..2 {
            assert!((h1[k] - l1[k]).norm() < 1e-13);
            assert!(h2[k].norm() < 1e-13);
        }
        let qm = build_q(&d).unwrap();
        assert!(q_adjoint(&qm, &h_eff).unwrap().distance(&h_eff) < 1e-12);
    }

    #[test]
    fn h_eff_of_hermitian_is_itself() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.5, -0.5), c(0.0, 0.0)],
            vec![c(0.5, 0.5), c(-1.0, 0.0), c(0.2, 0.0)],
            vec![c(0.0, 0.0), c(0.2, 0.0), c(0.3, 0.0)],
        ])
        .unwrap();
        let d = eig(&h, &EigOptions::default()).unwrap();
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        assert!(a.covers_all(3));
        assert!(build_h_eff(&d, &a).unwrap().distance(&h) < 1e-10);
    }

    #[test]
    fn projection_masks_coefficients() {
        let d = planted(c(1.0, 0.5), c(2.0, -0.5));
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        let l1 = StateVector::new(d.eigenvector(0)).unwrap();
        let l2 = StateVector::new(d.eigenvector(1)).unwrap();
        let p1 = project_tilde(&d, &a, &l1).unwrap();
        for (x, y) in p1.amplitudes.iter().zip(&l1.amplitudes) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(matches!(project_tilde(&d, &a, &l2), Err(Error::ProjectionZero { .. })));
        let sum = StateVector::new(l1.amplitudes.iter().zip(&l2.amplitudes).map(|(x, y)| x + y).collect()).unwrap();
        let ps = project_tilde(&d, &a, &sum).unwrap();
        for (x, y) in ps.amplitudes.iter().zip(&l1.amplitudes) {
            assert!((x - y).norm() < 1e-14);
        }
        let twice = project_tilde(&d, &a, &ps).unwrap();
        assert_eq!(twice.amplitudes.len(), 2);
        for (x, y) in twice.amplitudes.iter().zip(&ps.amplitudes) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn convergence_rate_matches_gap() {
        let d = planted(c(1.0, 0.5), c(2.0, -0.5));
        let qm = build_q(&d).unwrap();
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        let psi0 = StateVector::from_real(&[0.2, 1.0]).unwrap();
        let times: Vec<f64> = (0..=150).map(|k| k as f64 * 0.1).collect();
        let ct = convergence_trace(&d, &qm, &a, &psi0, &times, 1.0).unwrap();
        // tail window is t ∈ [7.5, 15]; the fit must land on −Δ/ħ = −1
        let rate = ct.fitted_rate.unwrap();
        assert!((rate + 1.0).abs() < 0.05, "rate = {rate}");
        assert!(ct.rate_error().unwrap() < 0.05);
    }

    #[test]
    fn no_distance_inside_the_dominant_span() {
        let d = planted(c(1.0, 0.5), c(2.0, -0.5));
        let qm = build_q(&d).unwrap();
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        let psi0 = StateVector::new(d.eigenvector(0)).unwrap();
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.3).collect();
        let ct = convergence_trace(&d, &qm, &a, &psi0, &times, 1.0).unwrap();
        assert!(ct.trace.distances.unwrap().iter().all(|&x| x < 1e-12));
        assert!(ct.fitted_rate.is_none());
    }

    #[test]
    fn historian_identities() {
        let d = planted(c(1.0, 0.5), c(0.0, -0.5));
        let qm = build_q(&d).unwrap();
        let a = dominant_subset(&d.eigenvalues, None).unwrap();
        let psi0 = StateVector::from_real(&[0.0, 1.0]).unwrap();
        let same = historian_experiment(&d, &qm, &a, &psi0, 1.0, 1.0, 1.0).unwrap();
        assert!((same.fidelity - 1.0).abs() < 1e-10);
        assert!(same.q_distance < 1e-10);
        let mut last = 1.0;
        for t in [2.0, 5.0, 10.0] {
            let r = historian_experiment(&d, &qm, &a, &psi0, 1.0, t, 1.0).unwrap();
            assert!(r.fidelity < 1.0 && r.fidelity <= last, "t = {t}: {}", r.fidelity);
            last = r.fidelity;
        }
        assert!(historian_experiment(&d, &qm, &a, &psi0, 2.0, 1.0, 1.0).is_err());
    }
}
