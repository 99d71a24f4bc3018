//! Scenario drivers, one per mode.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use qnormal_core::dynamics::{
    evolve_normalized, exact_normalized_trace, expectation, integrate_modified_schrodinger, normalize,
    IntegrationOptions, DRIFT_TOLERANCE,
};
use qnormal_core::lattice::{
    build_lattice_hamiltonian, continuity_report, density_current, gaussian_packet, off_band_fraction, Boundary,
    LatticeConfig,
};
use qnormal_core::linalg::{eig, EigOptions, SpectralDecomposition};
use qnormal_core::qmetric::{biorthogonality_error, build_q, q_hermiticity_residual, q_normality_residual, q_split};
use qnormal_core::random::{generate_planted, random_state, RandomSpec, ALGORITHM_ID};
use qnormal_core::suppression::{
    build_h_eff, convergence_trace, dominant_subset, h_eff_propagator, historian_experiment, project_tilde,
    DominantSubset,
};
use qnormal_core::{ComplexMatrix, QMetric, StateVector};
use serde::Serialize;

use crate::config::{BoundaryKind, Format, HamiltonianSource, Mode, RandomConfig, ScenarioConfig, SweepSpec};
use crate::error::CliError;
use crate::report::{complex_vec, write_file, Check, Report, Trace, TraceRow};

pub const BIORTHOGONALITY_TOL: f64 = 1e-8;
pub const Q_NORMALITY_TOL: f64 = 1e-8;
pub const SPLIT_TOL: f64 = 1e-9;
pub const METRIC_HERMITICITY_TOL: f64 = 1e-12;
pub const EVOLVE_DISTANCE_TOL: f64 = 1e-6;
pub const RATE_TOL: f64 = 0.05;
pub const SUPPRESSED_TOL: f64 = 1e-12;
pub const FIDELITY_TOL: f64 = 1e-10;
pub const MONOTONE_TOL: f64 = 1e-12;
pub const CONTINUITY_TOL: f64 = 1e-5;
pub const MASS_DRIFT_TOL: f64 = 1e-8;

/// Suppression window used by sweeps, in units of `ħ/Δ`.
pub const SWEEP_WINDOW: f64 = 25.0;

/// Runs the scenario, writes `report.json` and any trace files under the
/// output directory, and returns the report.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut report = Report::new(cfg);
    match cfg.mode() {
        Mode::Decompose => {
            let h = hamiltonian(cfg, &mut report)?;
            decompose(cfg, &h, &mut report)?;
        }
        Mode::Evolve => evolve(cfg, &mut report)?,
        Mode::Suppress => suppress(cfg, &mut report)?,
        Mode::Historian => historian(cfg, &mut report)?,
        Mode::Lattice => lattice(cfg, &mut report)?,
        Mode::Sweep => sweep(cfg, &mut report)?,
    }
    // relative paths keep reports identical across output directories
    for t in &mut report.traces {
        if let Ok(rel) = t.strip_prefix(&cfg.output.path) {
            *t = rel.to_path_buf();
        }
    }
    report.write(&cfg.output.path.join("report.json"))?;
    Ok(report)
}

fn eig_options(cfg: &ScenarioConfig) -> EigOptions {
    EigOptions {
        tol_eig: cfg.tolerances.tol_eig,
        kappa_max: cfg.tolerances.kappa_max,
        max_iterations: None,
    }
}

fn random_spec(r: &RandomConfig) -> RandomSpec {
    RandomSpec {
        dim: r.dim,
        seed: r.seed,
        re_range: (r.re_range[0], r.re_range[1]),
        im_range: (r.im_range[0], r.im_range[1]),
        min_separation: r.min_separation,
        kappa_limit: r.kappa_limit,
    }
}

fn matrix(rows: &[Vec<crate::config::Entry>]) -> Result<ComplexMatrix, CliError> {
    let data: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    Ok(ComplexMatrix::from_rows(&data)?)
}

fn lattice_config(cfg: &ScenarioConfig) -> Option<LatticeConfig> {
    let HamiltonianSource::Lattice(l) = &cfg.hamiltonian else {
        return None;
    };
    let n = l.n_sites;
    let or_zero = |v: &Vec<f64>| if v.is_empty() { vec![0.0; n] } else { v.clone() };
    Some(LatticeConfig {
        n_sites: n,
        spacing: l.spacing,
        mass: l.mass,
        v_real: or_zero(&l.v_real),
        v_imag: or_zero(&l.v_imag),
        hbar: cfg.hbar(),
        boundary: match l.boundary {
            BoundaryKind::Dirichlet => Boundary::Dirichlet,
            BoundaryKind::Periodic => Boundary::Periodic,
        },
    })
}

fn hamiltonian(cfg: &ScenarioConfig, report: &mut Report) -> Result<ComplexMatrix, CliError> {
    match &cfg.hamiltonian {
        HamiltonianSource::Matrix(rows) => matrix(rows),
        HamiltonianSource::Random(r) => {
            let inst = generate_planted(&random_spec(r))?;
            report.algorithm = Some(ALGORITHM_ID);
            report.set("planted_eigenvalues", complex_vec(&inst.eigenvalues));
            report.set("planted_kappa", inst.kappa);
            Ok(inst.h)
        }
        HamiltonianSource::Lattice(_) => {
            let lc = lattice_config(cfg).expect("lattice source");
            Ok(build_lattice_hamiltonian(&lc)?)
        }
    }
}

fn initial_state(cfg: &ScenarioConfig, dim: usize) -> Result<StateVector, CliError> {
    if let Some(psi) = &cfg.initial_state {
        return Ok(StateVector::new(psi.iter().map(|e| e.value()).collect())?);
    }
    if let (Some(lc), HamiltonianSource::Lattice(l)) = (lattice_config(cfg), &cfg.hamiltonian) {
        let length = l.n_sites as f64 * l.spacing;
        let center = l.packet.center.unwrap_or(0.5 * length);
        let width = l.packet.width.unwrap_or(length / 16.0);
        return Ok(gaussian_packet(&lc, center, width, l.packet.k0)?);
    }
    // same generator, next seed
    Ok(StateVector::new(random_state(dim, cfg.seed().wrapping_add(1)))?)
}

struct Decomposed {
    d: SpectralDecomposition,
    qm: QMetric,
    a: DominantSubset,
}

fn decompose(cfg: &ScenarioConfig, h: &ComplexMatrix, report: &mut Report) -> Result<Decomposed, CliError> {
    let d = eig(h, &eig_options(cfg))?;
    let qm = build_q(&d)?;
    let split = q_split(&d, &qm)?;
    let a = dominant_subset(&d.eigenvalues, Some(cfg.tolerances.eps_a))?;

    report.set("dim", d.dim());
    report.set("eigenvalues", complex_vec(&d.eigenvalues));
    report.set("kappa", d.kappa);
    report.set("b", a.b);
    report.set("gap", a.gap.is_finite().then_some(a.gap));
    report.set("dominant", &a.indices);
    report.set("dominant_count", a.len());
    if cfg.mode() == Mode::Decompose {
        let rows: Vec<Vec<[f64; 2]>> = qm.q().rows().iter().map(|r| complex_vec(r)).collect();
        report.set("q", rows);
    }
    report.warnings.extend(d.warnings.iter().cloned());

    let tol = cfg.tolerances.tol_eig;
    report.check(Check::at_most("eig_residual", d.residual, tol));
    report.check(Check::at_most("inverse_residual", d.inverse_residual, tol));
    report.check(Check::at_most(
        "biorthogonality",
        biorthogonality_error(&d, &qm)?,
        BIORTHOGONALITY_TOL,
    ));
    report.check(Check::at_most(
        "q_normality",
        q_normality_residual(h, &qm)?,
        Q_NORMALITY_TOL,
    ));
    report.check(Check::at_most(
        "metric_hermiticity",
        qm.hermiticity_residual(),
        METRIC_HERMITICITY_TOL,
    ));
    report.check(Check::at_most("split_crosscheck", split.crosscheck_residual, SPLIT_TOL));
    Ok(Decomposed { d, qm, a })
}

fn observable(cfg: &ScenarioConfig, fallback: impl FnOnce() -> ComplexMatrix) -> Result<ComplexMatrix, CliError> {
    match &cfg.observable {
        Some(rows) => matrix(rows),
        None => Ok(fallback()),
    }
}

/// `t_k = k·t_span/n` with `n = round(t_span / (dt·stride))`, at least one step.
fn sample_times(t_span: f64, dt: f64, stride: usize) -> Vec<f64> {
    if t_span == 0.0 {
        return vec![0.0];
    }
    let n = (t_span / (dt * stride as f64)).round().max(1.0) as usize;
    (0..=n).map(|k| k as f64 * t_span / n as f64).collect()
}

fn q_distance(qm: &QMetric, x: &[Complex64], y: &[Complex64]) -> Result<f64, CliError> {
    let diff: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(qm.norm(&diff)?)
}

fn evolve(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), CliError> {
    let h = hamiltonian(cfg, report)?;
    let Decomposed { d, qm, .. } = decompose(cfg, &h, report)?;
    let split = q_split(&d, &qm)?;
    let hbar = cfg.hbar();
    let psi0 = initial_state(cfg, d.dim())?;
    let psi_n0 = normalize(&qm, &psi0)?;
    let o = observable(cfg, || split.h_qh.clone())?;
    let t_span = cfg.times.t_span.expect("validated");

    let trace = integrate_modified_schrodinger(
        &split,
        &qm,
        &psi_n0,
        t_span,
        cfg.times.dt,
        hbar,
        IntegrationOptions {
            stride: cfg.times.stride,
            observable: Some(&o),
        },
    )?;
    let mut out = Trace::default();
    let mut max_distance = 0.0f64;
    for (k, (&t, st)) in trace.times.iter().zip(&trace.states).enumerate() {
        let exact = evolve_normalized(&d, &qm, &psi0, t, hbar)?;
        let dist = q_distance(&qm, &st.amplitudes, exact.amplitudes())?;
        max_distance = max_distance.max(dist);
        out.rows.push(TraceRow {
            t,
            amplitudes: st.amplitudes.clone(),
            q_norm: trace.norms[k],
            distance: Some(dist),
            expectation: trace.expectations.as_ref().map(|e| e[k]),
        });
    }
    report.set("samples", out.rows.len());
    report.set("max_distance", max_distance);
    report.set("max_norm_drift", trace.max_norm_drift);
    report.check(Check::at_most("distance_to_exact", max_distance, EVOLVE_DISTANCE_TOL));
    report.check(Check::at_most("q_norm_drift", trace.max_norm_drift, DRIFT_TOLERANCE));
    let path = out.write(&cfg.output.path, "trace", cfg.output.format)?;
    report.traces.push(path);
    Ok(())
}

fn suppress(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), CliError> {
    let h = hamiltonian(cfg, report)?;
    let Decomposed { d, qm, a } = decompose(cfg, &h, report)?;
    let split = q_split(&d, &qm)?;
    let hbar = cfg.hbar();
    let psi0 = initial_state(cfg, d.dim())?;
    let o = observable(cfg, || split.h_qh.clone())?;
    let times = sample_times(cfg.times.t_span.expect("validated"), cfg.times.dt, cfg.times.stride);

    let h_eff = build_h_eff(&d, &a)?;
    report.check(Check::at_most(
        "h_eff_q_hermiticity",
        q_hermiticity_residual(&qm, &h_eff)?,
        SPLIT_TOL,
    ));

    let conv = convergence_trace(&d, &qm, &a, &psi0, &times, hbar)?;
    let distances = conv.trace.distances.clone().unwrap_or_default();
    let max_d = distances.iter().copied().fold(0.0, f64::max);
    report.set("fitted_rate", conv.fitted_rate);
    report.set("predicted_rate", conv.predicted_rate);
    report.set("max_distance", max_d);

    let coeffs = d.coefficients(&psi0.amplitudes)?;
    let outside: f64 = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| !a.contains(*i))
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if a.covers_all(d.dim()) || outside <= 1e-14 * scale {
        report.check(Check::at_most("suppressed_distance", max_d, SUPPRESSED_TOL));
    } else {
        match conv.rate_error() {
            Some(err) => report.check(Check::at_most("rate_error", err, RATE_TOL)),
            None => report
                .warnings
                .push("too few tail samples above the fit floor; no rate fitted".into()),
        }
    }

    let mut out = Trace::default();
    for (k, (&t, st)) in conv.trace.times.iter().zip(&conv.trace.states).enumerate() {
        let psi_n = normalize(&qm, st)?;
        out.rows.push(TraceRow {
            t,
            amplitudes: st.amplitudes.clone(),
            q_norm: 1.0,
            distance: Some(distances[k]),
            expectation: Some(expectation(&qm, &psi_n, &o)?),
        });
    }
    report.set("samples", out.rows.len());
    let path = out.write(&cfg.output.path, "trace", cfg.output.format)?;
    report.traces.push(path);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct HistorianSummary {
    t: Vec<f64>,
    fidelity: Vec<f64>,
    q_distance: Vec<f64>,
    subspace_fraction: f64,
    /// Largest increase of the fidelity between consecutive `t`.
    max_increase: f64,
}

#[allow(clippy::too_many_arguments)]
fn historian_summary(
    d: &SpectralDecomposition,
    qm: &QMetric,
    a: &DominantSubset,
    psi0: &StateVector,
    t1: f64,
    ts: &[f64],
    hbar: f64,
    o: Option<&ComplexMatrix>,
) -> Result<(HistorianSummary, Trace), CliError> {
    let mut s = HistorianSummary {
        t: ts.to_vec(),
        fidelity: Vec::new(),
        q_distance: Vec::new(),
        subspace_fraction: a.len() as f64 / d.dim() as f64,
        max_increase: 0.0,
    };
    let mut trace = Trace::default();
    for &t in ts {
        let r = historian_experiment(d, qm, a, psi0, t1, t, hbar)?;
        s.fidelity.push(r.fidelity);
        s.q_distance.push(r.q_distance);
        trace.rows.push(TraceRow {
            t,
            amplitudes: r.psi_historian.amplitudes().to_vec(),
            q_norm: 1.0,
            distance: Some(r.q_distance),
            expectation: o.map(|o| expectation(qm, &r.psi_historian, o)).transpose()?,
        });
    }
    s.max_increase = s.fidelity.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok((s, trace))
}

fn historian(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), CliError> {
    let h = hamiltonian(cfg, report)?;
    let Decomposed { d, qm, a } = decompose(cfg, &h, report)?;
    let split = q_split(&d, &qm)?;
    let hbar = cfg.hbar();
    let psi0 = initial_state(cfg, d.dim())?;
    let o = observable(cfg, || split.h_qh.clone())?;
    let t1 = cfg.times.t1.expect("validated");
    let ts = cfg.times.t.as_ref().expect("validated").to_vec();

    let at_t1 = historian_experiment(&d, &qm, &a, &psi0, t1, t1, hbar)?;
    report.check(Check::at_most(
        "fidelity_at_t1",
        (1.0 - at_t1.fidelity).abs(),
        FIDELITY_TOL,
    ));

    let (summary, trace) = historian_summary(&d, &qm, &a, &psi0, t1, &ts, hbar, Some(&o))?;
    if ts.len() > 1 {
        report.check(Check::at_most(
            "fidelity_nonincreasing",
            summary.max_increase,
            MONOTONE_TOL,
        ));
    }
    report.set("t1", t1);
    report.set("historian", summary);
    let path = trace.write(&cfg.output.path, "trace", cfg.output.format)?;
    report.traces.push(path);
    Ok(())
}

fn lattice(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), CliError> {
    let lc = lattice_config(cfg).expect("validated");
    let h = build_lattice_hamiltonian(&lc)?;
    let hbar = cfg.hbar();
    let psi0 = initial_state(cfg, lc.n_sites)?;
    let times = sample_times(cfg.times.t_span.expect("validated"), cfg.times.dt, cfg.times.stride);
    let position = ComplexMatrix::from_diagonal(
        &lc.positions()
            .into_iter()
            .map(|q| Complex64::new(q, 0.0))
            .collect::<Vec<_>>(),
    );
    let o = observable(cfg, || position.clone())?;
    let hermitian = lc.v_imag.iter().all(|&v| v == 0.0);
    report.set("hermitian", hermitian);

    let d = eig(&h, &eig_options(cfg))?;
    report.set("kappa", d.kappa);
    report.warnings.extend(d.warnings.iter().cloned());

    // Hermitian lattices use the standard metric.
    let (qm, states) = if hermitian {
        let qm = QMetric::identity(lc.n_sites);
        let tr = exact_normalized_trace(&d, &qm, &psi0, &times, hbar, None)?;
        (qm, tr.states)
    } else {
        let qm = build_q(&d)?;
        let a = dominant_subset(&d.eigenvalues, Some(cfg.tolerances.eps_a))?;
        let h_eff = build_h_eff(&d, &a)?;
        report.set("dominant_count", a.len());
        report.set("gap", a.gap.is_finite().then_some(a.gap));
        report.set("h_eff_off_band_fraction", off_band_fraction(&h_eff, lc.boundary));
        let tilde = normalize(&qm, &project_tilde(&d, &a, &psi0)?)?;
        let states = times
            .iter()
            .map(|&t| {
                let u = h_eff_propagator(&d, &a, t, hbar)?;
                StateVector::new(u.mat_vec(tilde.amplitudes())?)
            })
            .collect::<qnormal_core::Result<Vec<_>>>()?;
        (qm, states)
    };

    let mut out = Trace::default();
    let mut masses = Vec::with_capacity(states.len());
    for (&t, st) in times.iter().zip(&states) {
        let dc = density_current(&qm, st, &lc)?;
        masses.push(dc.rho.iter().sum::<f64>());
        let q_norm = qm.norm(&st.amplitudes)?;
        let psi_n = normalize(&qm, st)?;
        out.rows.push(TraceRow {
            t,
            amplitudes: st.amplitudes.clone(),
            q_norm,
            distance: Some((masses[masses.len() - 1] - masses[0]).abs()),
            expectation: Some(expectation(&qm, &psi_n, &o)?),
        });
    }
    let drift = masses.iter().map(|m| (m - masses[0]).abs()).fold(0.0, f64::max);
    report.set("mass_drift", drift);
    report.check(Check::at_most("mass_drift", drift, MASS_DRIFT_TOL));

    if times.len() >= 3 {
        let tr = qnormal_core::dynamics::EvolutionTrace {
            times: times.clone(),
            states,
            ..Default::default()
        };
        let cont = continuity_report(&tr, &qm, &lc)?;
        report.set("continuity_residual", cont.residual);
        report.set("continuity_raw_max", cont.raw_max);
        if hermitian {
            report.check(Check::at_most("continuity_residual", cont.residual, CONTINUITY_TOL));
        }
    }
    report.set("samples", out.rows.len());
    let path = out.write(&cfg.output.path, "trace", cfg.output.format)?;
    report.traces.push(path);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct ScenarioOutcome {
    index: usize,
    seed: u64,
    dim: usize,
    error: Option<String>,
    kappa: Option<f64>,
    biorthogonality: Option<f64>,
    q_normality: Option<f64>,
    gap: Option<f64>,
    fitted_rate: Option<f64>,
    predicted_rate: Option<f64>,
    rate_error: Option<f64>,
    historian: Option<HistorianSummary>,
    historian_monotone: Option<bool>,
}

fn sweep_instance(cfg: &ScenarioConfig, spec: &SweepSpec, index: usize) -> ScenarioOutcome {
    let HamiltonianSource::Random(base) = &cfg.hamiltonian else {
        unreachable!("validated")
    };
    let span = spec.dims[1] - spec.dims[0] + 1;
    let r = RandomConfig {
        dim: spec.dims[0] + index % span,
        seed: base.seed.wrapping_add(index as u64),
        ..base.clone()
    };
    let mut out = ScenarioOutcome {
        index,
        seed: r.seed,
        dim: r.dim,
        error: None,
        kappa: None,
        biorthogonality: None,
        q_normality: None,
        gap: None,
        fitted_rate: None,
        predicted_rate: None,
        rate_error: None,
        historian: None,
        historian_monotone: None,
    };
    if let Err(e) = sweep_fill(cfg, spec, &r, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

fn sweep_fill(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    r: &RandomConfig,
    out: &mut ScenarioOutcome,
) -> Result<(), CliError> {
    let hbar = cfg.hbar();
    let inst = generate_planted(&random_spec(r))?;
    let d = eig(&inst.h, &eig_options(cfg))?;
    let qm = build_q(&d)?;
    out.kappa = Some(d.kappa);
    out.biorthogonality = Some(biorthogonality_error(&d, &qm)?);
    out.q_normality = Some(q_normality_residual(&inst.h, &qm)?);
    let a = dominant_subset(&d.eigenvalues, Some(cfg.tolerances.eps_a))?;
    let psi0 = StateVector::new(random_state(r.dim, r.seed.wrapping_add(1)))?;
    if a.gap.is_finite() {
        out.gap = Some(a.gap);
        let window = SWEEP_WINDOW * hbar / a.gap;
        let times: Vec<f64> = (0..spec.samples)
            .map(|k| window * k as f64 / (spec.samples - 1) as f64)
            .collect();
        let conv = convergence_trace(&d, &qm, &a, &psi0, &times, hbar)?;
        out.fitted_rate = conv.fitted_rate;
        out.predicted_rate = conv.predicted_rate;
        out.rate_error = conv.rate_error();
    }
    let t1 = cfg.times.t1.unwrap_or(1.0);
    let ts = cfg
        .times
        .t
        .as_ref()
        .map_or_else(|| vec![2.0, 5.0, 10.0], |t| t.to_vec());
    let (summary, _) = historian_summary(&d, &qm, &a, &psi0, t1, &ts, hbar, None)?;
    out.historian_monotone = Some(summary.max_increase <= MONOTONE_TOL);
    out.historian = Some(summary);
    Ok(())
}

/// Worker count: `QNORMAL_THREADS` if set, else the available parallelism.
pub fn thread_count(jobs: usize) -> usize {
    let cap = std::env::var("QNORMAL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    cap.min(jobs).max(1)
}

fn sweep(cfg: &ScenarioConfig, report: &mut Report) -> Result<(), CliError> {
    let spec = cfg.sweep.clone().unwrap_or_default();
    report.algorithm = Some(ALGORITHM_ID);
    let dir = cfg.output.path.as_path();
    let slots: Mutex<Vec<Option<Result<ScenarioOutcome, CliError>>>> =
        Mutex::new((0..spec.count).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..thread_count(spec.count) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= spec.count {
                    break;
                }
                let outcome = sweep_instance(cfg, &spec, k);
                let written = write_scenario(dir, &outcome).map(|_| outcome);
                slots.lock().expect("no worker panics")[k] = Some(written);
            });
        }
    });
    let outcomes: Vec<ScenarioOutcome> = slots
        .into_inner()
        .expect("no worker panics")
        .into_iter()
        .map(|o| o.expect("every slot filled"))
        .collect::<Result<_, _>>()?;

    let max = |f: fn(&ScenarioOutcome) -> Option<f64>| outcomes.iter().filter_map(f).fold(0.0, f64::max);
    let errors = outcomes.iter().filter(|o| o.error.is_some()).count();
    let fitted = outcomes.iter().filter(|o| o.rate_error.is_some()).count();
    let violations: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.historian_monotone == Some(false))
        .map(|o| o.index)
        .collect();
    report.set("instances", outcomes.len());
    report.set("fitted_instances", fitted);
    report.set("historian_violations", violations);
    report.check(Check::at_most("instance_errors", errors as f64, 0.0));
    report.check(Check::at_most(
        "max_biorthogonality",
        max(|o| o.biorthogonality),
        BIORTHOGONALITY_TOL,
    ));
    report.check(Check::at_most(
        "max_q_normality",
        max(|o| o.q_normality),
        Q_NORMALITY_TOL,
    ));
    if fitted > 0 {
        report.check(Check::at_most("max_rate_error", max(|o| o.rate_error), RATE_TOL));
    }
    for o in &outcomes {
        report.traces.push(scenario_path(dir, o.index));
    }
    if cfg.output.format == Format::Csv {
        let path = dir.join("summary.csv");
        write_file(&path, &summary_csv(&outcomes))?;
        report.traces.push(path);
    }
    Ok(())
}

fn scenario_path(dir: &Path, index: usize) -> std::path::PathBuf {
    dir.join(format!("scenario_{index:04}.json"))
}

fn write_scenario(dir: &Path, o: &ScenarioOutcome) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(o).expect("outcome serializes");
    text.push('\n');
    write_file(&scenario_path(dir, o.index), &text)
}

fn summary_csv(outcomes: &[ScenarioOutcome]) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = String::from(
        "index,seed,dim,kappa,biorthogonality,q_normality,gap,fitted_rate,predicted_rate,rate_error,historian_monotone,error\n",
    );
    for o in outcomes {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            o.index,
            o.seed,
            o.dim,
            opt(o.kappa),
            opt(o.biorthogonality),
            opt(o.q_normality),
            opt(o.gap),
            opt(o.fitted_rate),
            opt(o.predicted_rate),
            opt(o.rate_error),
            o.historian_monotone.map(|b| b.to_string()).unwrap_or_default(),
            o.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
    }
    out
}
