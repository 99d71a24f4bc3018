//! Time evolution under a non-hermitian `H`: exact spectral propagation,
//! Q-normalization, expectation values in both pictures, and an RK4
//! integrator for the norm-preserving modified Schrödinger equation.
//!
//! The time origin is always `t₀ = 0`; callers pass elapsed time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{spectral_exp, ComplexMatrix, SpectralDecomposition};
use crate::qmetric::{q_adjoint, QMetric, QSplit, ZERO_NORM};
pub use crate::state::{NormalizedState, StateVector};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Q-norm drift beyond which the integrator aborts.
pub const DRIFT_ABORT: f64 = 1e-3;
/// Q-norm drift that recorded samples are expected to stay within.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Time-stamped record of a simulation.
#[derive(Debug, Clone, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Q-norm of each recorded state.
    pub norms: Vec<f64>,
    pub expectations: Option<Vec<Complex64>>,
    pub distances: Option<Vec<f64>>,
    /// Largest `|‖ψ‖_Q − 1|` seen at any step; zero for exact traces.
    pub max_norm_drift: f64,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, psi: Vec<Complex64>, norm: f64) {
        self.times.push(t);
        self.states.push(StateVector {
            amplitudes: psi,
            label: None,
        });
        self.norms.push(norm);
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

fn check_state(d: &SpectralDecomposition, psi: &[Complex64]) -> Result<()> {
    if psi.len() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: psi.len(),
        });
    }
    Ok(())
}

/// `|ψ(t)⟩ = Σ_i a_i e^{(Im λ_i − i Re λ_i) t/ħ} |λ_i⟩`, evaluated as
/// `P · diag(e^{−iλ_i t/ħ}) · P⁻¹ · ψ₀`.
pub fn evolve_exact(d: &SpectralDecomposition, psi0: &StateVector, dt_total: f64, hbar: f64) -> Result<StateVector> {
    check_hbar(hbar)?;
    check_state(d, &psi0.amplitudes)?;
    let s = -I * (dt_total / hbar);
    let coeffs: Vec<Complex64> = d
        .coefficients(&psi0.amplitudes)?
        .into_iter()
        .zip(&d.eigenvalues)
        .map(|(a, &lam)| a * (s * lam).exp())
        .collect();
    Ok(StateVector {
        amplitudes: d.p.mul_vec_unchecked(&coeffs),
        label: psi0.label.clone(),
    })
}

/// Q-normalized `e^{−iHt/ħ}ψ₀`.
///
/// The growth factor of the leading mode is divided out before normalizing,
/// so long times neither overflow nor underflow. Coefficients below
/// `1e-14` of the largest are dropped.
pub fn evolve_normalized(
    d: &SpectralDecomposition,
    qm: &QMetric,
    psi0: &StateVector,
    t: f64,
    hbar: f64,
) -> Result<NormalizedState> {
    check_hbar(hbar)?;
    check_state(d, &psi0.amplitudes)?;
    let coeffs = d.coefficients(&psi0.amplitudes)?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::ZeroVector { norm: scale });
    }
    let active = coeffs
        .iter()
        .zip(&d.eigenvalues)
        .filter(|(c, _)| c.norm() > ZERO_NORM * scale)
        .map(|(_, lam)| lam.im);
    // backwards in time the most decaying mode dominates instead
    let shift = if t >= 0.0 {
        active.fold(f64::NEG_INFINITY, f64::max)
    } else {
        active.fold(f64::INFINITY, f64::min)
    };
    let s = -I * (t / hbar);
    let evolved: Vec<Complex64> = coeffs
        .into_iter()
        .zip(&d.eigenvalues)
        .map(|(a, &lam)| {
            if a.norm() > ZERO_NORM * scale {
                a * (s * (lam - I * shift)).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    normalize(
        qm,
        &StateVector {
            amplitudes: d.p.mul_vec_unchecked(&evolved),
            label: psi0.label.clone(),
        },
    )
}

/// Scales `psi` to unit Q-norm.
pub fn normalize(qm: &QMetric, psi: &StateVector) -> Result<NormalizedState> {
    let norm = qm.norm(&psi.amplitudes)?;
    if norm < ZERO_NORM || !norm.is_finite() {
        return Err(Error::ZeroVector { norm });
    }
    Ok(NormalizedState {
        amplitudes: psi.amplitudes.iter().map(|z| z / norm).collect(),
        metric: qm.clone(),
    })
}

/// `⟨ψ|Q·O|ψ⟩` for a normalized `ψ`.
pub fn expectation(qm: &QMetric, psi_n: &NormalizedState, o: &ComplexMatrix) -> Result<Complex64> {
    let o_psi = o.mat_vec(&psi_n.amplitudes)?;
    qm.inner(&psi_n.amplitudes, &o_psi)
}

/// Heisenberg-picture operator
/// `(⟨ψ₀|_Q ψ₀⟩ / ⟨ψ(t)|_Q ψ(t)⟩) · e^{iH^{†_Q}t/ħ} · O · e^{−iHt/ħ}`.
pub fn heisenberg_operator(
    d: &SpectralDecomposition,
    qm: &QMetric,
    o: &ComplexMatrix,
    dt: f64,
    psi0: &StateVector,
    hbar: f64,
) -> Result<ComplexMatrix> {
    check_hbar(hbar)?;
    check_state(d, &psi0.amplitudes)?;
    d.h.check_dim(o)?;
    let u = spectral_exp(d, -I * (dt / hbar));
    // (e^{−iHt/ħ})^{†_Q} = e^{iH^{†_Q}t/ħ}
    let u_back = q_adjoint(qm, &u)?;
    let n0 = qm.norm_sq(&psi0.amplitudes)?;
    let psi_t = u.mul_vec_unchecked(&psi0.amplitudes);
    let nt = qm.norm_sq(&psi_t)?;
    if nt.max(0.0).sqrt() < ZERO_NORM {
        return Err(Error::ZeroVector {
            norm: nt.max(0.0).sqrt(),
        });
    }
    let ratio = Complex64::new(n0 / nt, 0.0);
    Ok((&(&u_back * o) * &u).scale(ratio))
}

/// Central finite-difference residual of the modified Heisenberg equation
/// `iħ dO_QH/dt = [O_QH, H_Qh] + {O_QH, H_Qa − ⟨H_Qa⟩_Q}` at time `t`,
/// relative to `‖O_QH(t)‖·‖H‖`.
#[allow(clippy::too_many_arguments)]
pub fn modified_heisenberg_residual(
    d: &SpectralDecomposition,
    qm: &QMetric,
    split: &QSplit,
    o: &ComplexMatrix,
    psi0: &StateVector,
    t: f64,
    step: f64,
    hbar: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let plus = heisenberg_operator(d, qm, o, t + step, psi0, hbar)?;
    let minus = heisenberg_operator(d, qm, o, t - step, psi0, hbar)?;
    let mid = heisenberg_operator(d, qm, o, t, psi0, hbar)?;
    let lhs = (&plus - &minus).scale(I * (hbar / (2.0 * step)));

    let psi_t = evolve_normalized(d, qm, psi0, t, hbar)?;
    let mean_qa = expectation(qm, &psi_t, &split.h_qa)?;
    let shifted = &split.h_qa - &ComplexMatrix::identity(d.dim()).scale(mean_qa);
    let rhs = &mid.commutator(&split.h_qh) + &mid.anticommutator(&shifted);

    let scale = (mid.norm() * d.h.norm()).max(1e-300);
    Ok(lhs.distance(&rhs) / scale)
}

/// Normalized exact evolution sampled at `times`.
pub fn exact_normalized_trace(
    d: &SpectralDecomposition,
    qm: &QMetric,
    psi0: &StateVector,
    times: &[f64],
    hbar: f64,
    observable: Option<&ComplexMatrix>,
) -> Result<EvolutionTrace> {
    check_times(times)?;
    let mut trace = EvolutionTrace::default();
    let mut expectations = observable.map(|_| Vec::with_capacity(times.len()));
    for &t in times {
        let psi = evolve_normalized(d, qm, psi0, t, hbar)?;
        if let (Some(o), Some(ex)) = (observable, expectations.as_mut()) {
            ex.push(expectation(qm, &psi, o)?);
        }
        trace.push(t, psi.amplitudes, 1.0);
    }
    trace.expectations = expectations;
    Ok(trace)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "times must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Sampling and observable settings for [`integrate_modified_schrodinger`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions<'a> {
    /// Record every `stride`-th step (the final step is always recorded).
    pub stride: usize,
    pub observable: Option<&'a ComplexMatrix>,
}

impl Default for IntegrationOptions<'_> {
    fn default() -> Self {
        Self {
            stride: 1,
            observable: None,
        }
    }
}

/// Fixed-step RK4 for
/// `iħ d|ψ⟩_N/dt = H_Qh|ψ⟩_N + (H_Qa − ⟨H_Qa⟩_Q)|ψ⟩_N`.
///
/// The step is shrunk to `t_span / ⌈t_span/dt⌉` so the grid ends on
/// `t_span`. Aborts with [`Error::StepSizeTooLarge`] once the Q-norm drifts
/// by more than [`DRIFT_ABORT`].
pub fn integrate_modified_schrodinger(
    split: &QSplit,
    qm: &QMetric,
    psi_n0: &NormalizedState,
    t_span: f64,
    dt: f64,
    hbar: f64,
    opts: IntegrationOptions<'_>,
) -> Result<EvolutionTrace> {
    check_hbar(hbar)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(t_span >= 0.0 && t_span.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "t_span must be non-negative, got {t_span}"
        )));
    }
    let n = split.h_qh.dim();
    if psi_n0.dim() != n || qm.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if psi_n0.dim() != n { psi_n0.dim() } else { qm.dim() },
        });
    }
    let stride = opts.stride.max(1);

    let h = split.hamiltonian();
    let q_hqa = qm.q() * &split.h_qa;
    let scale = -I / hbar;
    let rhs = |psi: &[Complex64]| -> Vec<Complex64> {
        let q_psi = qm.q().mul_vec_unchecked(psi);
        let norm_sq: Complex64 = psi.iter().zip(&q_psi).map(|(a, b)| a.conj() * b).sum();
        let qa: Complex64 = psi
            .iter()
            .zip(q_hqa.mul_vec_unchecked(psi))
            .map(|(a, b)| a.conj() * b)
            .sum();
        let mean = qa / norm_sq.re;
        h.mul_vec_unchecked(psi)
            .into_iter()
            .zip(psi)
            .map(|(hp, &p)| scale * (hp - mean * p))
            .collect()
    };
    let axpy = |y: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
        y.iter().zip(k).map(|(&yi, &ki)| yi + ki * a).collect()
    };

    let steps = if t_span == 0.0 {
        0
    } else {
        ((t_span / dt) - 1e-9).ceil().max(1.0) as usize
    };
    let step = if steps == 0 { 0.0 } else { t_span / steps as f64 };

    let mut trace = EvolutionTrace::default();
    let mut expectations = opts.observable.map(|_| Vec::new());
    let mut psi = psi_n0.amplitudes.clone();
    let mut record = |trace: &mut EvolutionTrace, t: f64, psi: &[Complex64], norm: f64| -> Result<()> {
        if let (Some(o), Some(ex)) = (opts.observable, expectations.as_mut()) {
            let o_psi = o.mul_vec_unchecked(psi);
            ex.push(qm.inner(psi, &o_psi)? / (norm * norm));
        }
        trace.push(t, psi.to_vec(), norm);
        Ok(())
    };

    let n0 = qm.norm(&psi)?;
    trace.max_norm_drift = (n0 - 1.0).abs();
    record(&mut trace, 0.0, &psi, n0)?;

    for k in 1..=steps {
        let k1 = rhs(&psi);
        let k2 = rhs(&axpy(&psi, &k1, step / 2.0));
        let k3 = rhs(&axpy(&psi, &k2, step / 2.0));
        let k4 = rhs(&axpy(&psi, &k3, step));
        for i in 0..n {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0);
        }
        let t = k as f64 * step;
        let norm = qm.norm(&psi)?;
        let drift = (norm - 1.0).abs();
        if !drift.is_finite() || drift > DRIFT_ABORT {
            return Err(Error::StepSizeTooLarge { drift, time: t });
        }
        trace.max_norm_drift = trace.max_norm_drift.max(drift);
        if k % stride == 0 || k == steps {
            record(&mut trace, t, &psi, norm)?;
        }
    }
    trace.expectations = expectations;
    Ok(trace)
}
