//! One-dimensional lattice Hamiltonians with a complex potential, the
//! Q-weighted density `ρ_j = conj((Qψ)_j)·ψ_j`, the link current, and the
//! discrete continuity check.

use num_complex::Complex64;

use crate::dynamics::EvolutionTrace;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::qmetric::QMetric;
use crate::state::{NormalizedState, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub v_real: Vec<f64>,
    pub v_imag: Vec<f64>,
    pub hbar: f64,
    pub boundary: Boundary,
}

impl LatticeConfig {
    /// Free particle, `ħ = m = a = 1`.
    pub fn free(n_sites: usize, boundary: Boundary) -> Self {
        Self {
            n_sites,
            spacing: 1.0,
            mass: 1.0,
            v_real: vec![0.0; n_sites],
            v_imag: vec![0.0; n_sites],
            hbar: 1.0,
            boundary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 3 {
            return Err(Error::InvalidInput(format!(
                "lattice needs at least 3 sites, got {}",
                self.n_sites
            )));
        }
        for (name, v) in [("spacing", self.spacing), ("mass", self.mass), ("hbar", self.hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("v_real", &self.v_real), ("v_imag", &self.v_imag)] {
            if v.len() != self.n_sites {
                return Err(Error::DimensionMismatch {
                    expected: self.n_sites,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }

    /// Hopping amplitude `ħ²/(2 m a²)`.
    pub fn hopping(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass * self.spacing * self.spacing)
    }

    /// Site positions `q_j = j·a`.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_sites).map(|j| j as f64 * self.spacing).collect()
    }
}

/// Second-order finite-difference `p²/2m + V(q)`.
pub fn build_lattice_hamiltonian(cfg: &LatticeConfig) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let n = cfg.n_sites;
    let t = cfg.hopping();
    let mut h = ComplexMatrix::zeros(n);
    for j in 0..n {
        h[(j, j)] = Complex64::new(2.0 * t + cfg.v_real[j], cfg.v_imag[j]);
        if j + 1 < n {
            h[(j, j + 1)] = Complex64::new(-t, 0.0);
            h[(j + 1, j)] = Complex64::new(-t, 0.0);
        }
    }
    if cfg.boundary == Boundary::Periodic {
        h[(0, n - 1)] = Complex64::new(-t, 0.0);
        h[(n - 1, 0)] = Complex64::new(-t, 0.0);
    }
    Ok(h)
}

/// Frobenius mass of `m` outside the (periodic) tridiagonal band, relative
/// to `‖m‖`. A locality diagnostic for effective Hamiltonians.
pub fn off_band_fraction(m: &ComplexMatrix, boundary: Boundary) -> f64 {
    let n = m.dim();
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dist = i.abs_diff(j);
            let in_band = dist <= 1 || (boundary == Boundary::Periodic && dist == n - 1);
            if !in_band {
                off += m[(i, j)].norm_sqr();
            }
        }
    }
    let total = m.norm();
    if total == 0.0 {
        0.0
    } else {
        off.sqrt() / total
    }
}

/// Per-site density. Individual sites may carry an imaginary part for a
/// general metric; only the real part is kept and the largest discarded
/// imaginary part is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub rho: Vec<f64>,
    pub imag_residual: f64,
}

impl Density {
    pub fn total(&self) -> f64 {
        self.rho.iter().sum()
    }
}

fn site_density(psi: &[Complex64], psi_q: &[Complex64]) -> Density {
    let mut imag_residual = 0.0f64;
    let rho = psi
        .iter()
        .zip(psi_q)
        .map(|(p, pq)| {
            let r = pq.conj() * p;
            imag_residual = imag_residual.max(r.im.abs());
            r.re
        })
        .collect();
    Density { rho, imag_residual }
}

/// `ρ_j = conj((Q·ψ)_j)·ψ_j`; sums to `⟨ψ|Q|ψ⟩`.
pub fn density(qm: &QMetric, psi_n: &NormalizedState) -> Result<Density> {
    let psi_q = qm.apply(psi_n.amplitudes())?;
    Ok(site_density(psi_n.amplitudes(), &psi_q))
}

/// Link currents `j_{k−1/2}` for `k = 0..=n`. Entry `k` sits between sites
/// `k−1` and `k`; entries `0` and `n` are the walls (zero) for Dirichlet
/// boundaries and both hold the wrap-around link for periodic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Current {
    pub links: Vec<f64>,
    pub imag_residual: f64,
}

impl Current {
    /// `(j_{k+1/2} − j_{k−1/2}) / a` for every site.
    pub fn divergence(&self, spacing: f64) -> Vec<f64> {
        self.links.windows(2).map(|w| (w[1] - w[0]) / spacing).collect()
    }
}

fn link_current(cfg: &LatticeConfig, psi: &[Complex64], psi_q: &[Complex64], left: usize, right: usize) -> Complex64 {
    let a = cfg.spacing;
    let pref = Complex64::new(0.0, cfg.hbar / (2.0 * cfg.mass));
    let dq_conj = (psi_q[right].conj() - psi_q[left].conj()) / a;
    let avg = (psi[left] + psi[right]) * 0.5;
    let avg_q_conj = ((psi_q[left] + psi_q[right]) * 0.5).conj();
    let dpsi = (psi[right] - psi[left]) / a;
    pref * (dq_conj * avg - avg_q_conj * dpsi)
}

/// Link-centered discretization of
/// `j = (iħ/2m)·(∂ψ_Q* · ψ − ψ_Q* · ∂ψ)` with arithmetic averages on links.
pub fn current(psi: &StateVector, psi_q: &StateVector, cfg: &LatticeConfig) -> Result<Current> {
    cfg.validate()?;
    current_slices(&psi.amplitudes, &psi_q.amplitudes, cfg)
}

fn current_slices(psi: &[Complex64], psi_q: &[Complex64], cfg: &LatticeConfig) -> Result<Current> {
    let n = cfg.n_sites;
    for len in [psi.len(), psi_q.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let mut links = vec![0.0; n + 1];
    let mut imag_residual = 0.0f64;
    let mut put = |k: usize, z: Complex64, links: &mut Vec<f64>| {
        imag_residual = imag_residual.max(z.im.abs());
        links[k] = z.re;
    };
    for k in 1..n {
        let z = link_current(cfg, psi, psi_q, k - 1, k);
        put(k, z, &mut links);
    }
    if cfg.boundary == Boundary::Periodic {
        let z = link_current(cfg, psi, psi_q, n - 1, 0);
        put(0, z, &mut links);
        links[n] = links[0];
    }
    Ok(Current { links, imag_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurrent {
    pub rho: Vec<f64>,
    pub current: Vec<f64>,
}

pub fn density_current(qm: &QMetric, psi: &StateVector, cfg: &LatticeConfig) -> Result<DensityCurrent> {
    let psi_q = qm.apply(&psi.amplitudes)?;
    let rho = site_density(&psi.amplitudes, &psi_q).rho;
    let current = current_slices(&psi.amplitudes, &psi_q, cfg)?.links;
    Ok(DensityCurrent { rho, current })
}

/// Diagnostics of the discrete continuity equation over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    /// `max |∂ρ/∂t + Δj/a|` over sites and interior times, scaled by
    /// `Δt / max ρ`.
    pub residual: f64,
    /// The same maximum without scaling.
    pub raw_max: f64,
    /// `max |d/dt Σ_j ρ_j a|` by central differences.
    pub mass_rate: f64,
    /// `max |Σ_j ρ_j(t) − Σ_j ρ_j(0)|`.
    pub mass_drift: f64,
}

pub fn continuity_report(trace: &EvolutionTrace, qm: &QMetric, cfg: &LatticeConfig) -> Result<ContinuityReport> {
    cfg.validate()?;
    let m = trace.len();
    if m < 3 {
        return Err(Error::GridTooCoarse {
            samples: m,
            required: 3,
        });
    }
    let dt = trace.times[1] - trace.times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("times must be strictly increasing".into()));
    }
    let span = trace.times[m - 1] - trace.times[0];
    if trace
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * span.max(1.0))
    {
        return Err(Error::InvalidInput("continuity check needs a uniform time grid".into()));
    }

    let fields: Vec<DensityCurrent> = trace
        .states
        .iter()
        .map(|s| density_current(qm, s, cfg))
        .collect::<Result<_>>()?;
    let masses: Vec<f64> = fields.iter().map(|f| f.rho.iter().sum::<f64>()).collect();
    let rho_max = fields
        .iter()
        .flat_map(|f| f.rho.iter().copied())
        .fold(0.0f64, |acc, r| acc.max(r.abs()));

    let a = cfg.spacing;
    let mut raw_max = 0.0f64;
    let mut mass_rate = 0.0f64;
    for k in 1..(m - 1) {
        let div: Vec<f64> = fields[k].current.windows(2).map(|w| (w[1] - w[0]) / a).collect();
        for (j, dj) in div.iter().enumerate() {
            let drho = (fields[k + 1].rho[j] - fields[k - 1].rho[j]) / (2.0 * dt);
            raw_max = raw_max.max((drho + dj).abs());
        }
        mass_rate = mass_rate.max(((masses[k + 1] - masses[k - 1]) * a / (2.0 * dt)).abs());
    }
    let mass_drift = masses.iter().map(|x| (x - masses[0]).abs()).fold(0.0, f64::max);
    let residual = if rho_max > 0.0 { raw_max * dt / rho_max } else { raw_max };
    Ok(ContinuityReport {
        residual,
        raw_max,
        mass_rate,
        mass_drift,
    })
}

/// Scaled local continuity residual; see [`ContinuityReport::residual`].
pub fn continuity_residual(trace: &EvolutionTrace, qm: &QMetric, cfg: &LatticeConfig) -> Result<f64> {
    Ok(continuity_report(trace, qm, cfg)?.residual)
}

/// Gaussian wave packet `exp(−(q − q₀)²/(4σ²) + i k₀ q)` with unit
/// Euclidean norm.
pub fn gaussian_packet(cfg: &LatticeConfig, center: f64, width: f64, k0: f64) -> Result<StateVector> {
    cfg.validate()?;
    let amps: Vec<Complex64> = cfg
        .positions()
        .into_iter()
        .map(|q| {
            let x = (q - center) / width;
            Complex64::from_polar((-0.25 * x * x).exp(), k0 * q)
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(amps.into_iter().map(|z| z / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::normalize;
    use crate::linalg::{eig, EigOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kinetic_stencil_three_sites() {
        let cfg = LatticeConfig::free(3, Boundary::Dirichlet);
        let h = build_lattice_hamiltonian(&cfg).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, -0.5, 0.0], vec![-0.5, 1.0, -0.5], vec![0.0, -0.5, 1.0]])
            .unwrap();
        assert_eq!(h, want);
        let mut per = cfg.clone();
        per.boundary = Boundary::Periodic;
        let hp = build_lattice_hamiltonian(&per).unwrap();
        assert_eq!(hp[(0, 2)], c(-0.5, 0.0));
        assert_eq!(hp[(2, 0)], c(-0.5, 0.0));
    }

    #[test]
    fn hermitian_iff_potential_is_real() {
        let mut cfg = LatticeConfig::free(6, Boundary::Periodic);
        cfg.v_real = vec![0.1, -0.3, 0.2, 0.0, 1.0, 0.5];
        assert_eq!(build_lattice_hamiltonian(&cfg).unwrap().hermitian_residual(), 0.0);
        cfg.v_imag[2] = 0.1;
        assert!(build_lattice_hamiltonian(&cfg).unwrap().hermitian_residual() > 0.0);
    }

    #[test]
    fn dirichlet_spectrum_matches_sine_law() {
        let mut cfg = LatticeConfig::free(12, Boundary::Dirichlet);
        cfg.mass = 0.7;
        cfg.spacing = 0.3;
        cfg.hbar = 1.3;
        let h = build_lattice_hamiltonian(&cfg).unwrap();
        let d = eig(&h, &EigOptions::default()).unwrap();
        let mut got: Vec<f64> = d.eigenvalues.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let n = cfg.n_sites as f64;
        let scale = 2.0 * cfg.hbar * cfg.hbar / (cfg.mass * cfg.spacing * cfg.spacing);
        for (k, g) in got.iter().enumerate() {
            let s = ((k as f64 + 1.0) * std::f64::consts::PI / (2.0 * (n + 1.0))).sin();
            assert!((g - scale * s * s).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(LatticeConfig::free(2, Boundary::Dirichlet).validate().is_err());
        let mut cfg = LatticeConfig::free(4, Boundary::Dirichlet);
        cfg.mass = 0.0;
        assert!(build_lattice_hamiltonian(&cfg).is_err());
        let mut cfg = LatticeConfig::free(4, Boundary::Dirichlet);
        cfg.v_imag.pop();
        assert!(matches!(cfg.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn density_examples() {
        let id = QMetric::identity(2);
        let psi = normalize(&id, &StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap()).unwrap();
        let d = density(&id, &psi).unwrap();
        assert!((d.rho[0] - 0.36).abs() < 1e-15 && (d.rho[1] - 0.64).abs() < 1e-15);

        let qm =
            QMetric::from_matrix(ComplexMatrix::from_real_rows(&[vec![1.0, -1.0], vec![-1.0, 3.0]]).unwrap()).unwrap();
        let psi = normalize(&qm, &StateVector::from_real(&[1.0, 1.0]).unwrap()).unwrap();
        let d = density(&qm, &psi).unwrap();
        assert!(d.rho[0].abs() < 1e-15);
        assert!((d.rho[1] - 1.0).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn real_wavefunction_has_no_current() {
        let cfg = LatticeConfig::free(8, Boundary::Dirichlet);
        let psi = StateVector::from_real(&[0.1, 0.3, 0.5, 0.2, -0.4, 0.3, 0.1, 0.05]).unwrap();
        let j = current(&psi, &psi, &cfg).unwrap();
        assert!(j.links.iter().all(|&x| x == 0.0));
        assert_eq!(j.links.len(), 9);
    }

    #[test]
    fn plane_wave_current() {
        let mut cfg = LatticeConfig::free(16, Boundary::Periodic);
        cfg.spacing = 0.5;
        cfg.mass = 2.0;
        cfg.hbar = 1.5;
        let n = cfg.n_sites as f64;
        let k = 2.0 * std::f64::consts::PI * 3.0 / (n * cfg.spacing);
        let psi = StateVector::new(
            (0..cfg.n_sites)
                .map(|j| Complex64::from_polar(1.0, k * j as f64 * cfg.spacing))
                .collect(),
        )
        .unwrap();
        let j = current(&psi, &psi, &cfg).unwrap();
        let want = cfg.hbar * (k * cfg.spacing).sin() / (cfg.mass * cfg.spacing);
        for link in &j.links {
            assert!((link - want).abs() < 1e-13, "{link} vs {want}");
        }
        assert!(j.imag_residual < 1e-14);
        assert!(j.divergence(cfg.spacing).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn too_few_samples_is_too_coarse() {
        let cfg = LatticeConfig::free(4, Boundary::Dirichlet);
        let trace = EvolutionTrace::default();
        assert!(matches!(
            continuity_residual(&trace, &QMetric::identity(4), &cfg),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn band_fraction() {
        let cfg = LatticeConfig::free(5, Boundary::Periodic);
        let h = build_lattice_hamiltonian(&cfg).unwrap();
        assert_eq!(off_band_fraction(&h, Boundary::Periodic), 0.0);
        assert!(off_band_fraction(&h, Boundary::Dirichlet) > 0.0);
    }
}
