//! Scenario configuration: JSON schema, defaults, flag overrides, validation.

use std::path::PathBuf;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Decompose,
    Evolve,
    Suppress,
    Historian,
    Lattice,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// A matrix or vector entry: a bare real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianSource {
    Matrix(Vec<Vec<Entry>>),
    Random(RandomConfig),
    Lattice(LatticeSpec),
}

impl Default for HamiltonianSource {
    fn default() -> Self {
        HamiltonianSource::Random(RandomConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomConfig {
    pub dim: usize,
    pub seed: u64,
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
    pub min_separation: f64,
    pub kappa_limit: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            dim: 4,
            seed: 0,
            re_range: [-1.0, 1.0],
            im_range: [-1.0, 1.0],
            min_separation: 0.1,
            kappa_limit: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub boundary: BoundaryKind,
    /// Per-site potentials; empty means zero.
    pub v_real: Vec<f64>,
    pub v_imag: Vec<f64>,
    pub packet: PacketSpec,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            n_sites: 64,
            spacing: 1.0,
            mass: 1.0,
            boundary: BoundaryKind::Dirichlet,
            v_real: Vec::new(),
            v_imag: Vec::new(),
            packet: PacketSpec::default(),
        }
    }
}

/// Initial Gaussian packet; `center` and `width` default to `L/2` and `L/16`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSpec {
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Times {
    pub t_span: Option<f64>,
    pub dt: f64,
    pub stride: usize,
    pub t1: Option<f64>,
    pub t: Option<OneOrMany>,
}

impl Default for Times {
    fn default() -> Self {
        Self {
            t_span: None,
            dt: 1e-3,
            stride: 1,
            t1: None,
            t: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eps_a: f64,
    pub tol_eig: f64,
    pub kappa_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_a: 1e-9,
            tol_eig: 1e-10,
            kappa_max: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub format: Format,
    pub path: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            format: Format::Json,
            path: PathBuf::from("qnormal-out"),
        }
    }
}

/// Ensemble run over consecutive seeds of the random source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub count: usize,
    /// Inclusive range of dimensions, cycled through.
    pub dims: [usize; 2],
    /// Samples per suppression trace; the window is `25ħ/Δ`.
    pub samples: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            count: 20,
            dims: [2, 8],
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub mode: Option<Mode>,
    pub hamiltonian: HamiltonianSource,
    /// Defaults to a seeded random state (or the lattice packet).
    pub initial_state: Option<Vec<Entry>>,
    /// Defaults to the Q-hermitian part of H (position on a lattice).
    pub observable: Option<Vec<Vec<Entry>>>,
    pub times: Times,
    pub hbar: Option<f64>,
    pub tolerances: Tolerances,
    pub output: Output,
    pub sweep: Option<SweepSpec>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub hbar: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl ScenarioConfig {
    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Decompose)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar.unwrap_or(1.0)
    }

    /// Seed for random instances and default initial states.
    pub fn seed(&self) -> u64 {
        match &self.hamiltonian {
            HamiltonianSource::Random(r) => r.seed,
            _ => 0,
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.mode.is_some() {
            self.mode = o.mode;
        }
        if let Some(seed) = o.seed {
            if let HamiltonianSource::Random(r) = &mut self.hamiltonian {
                r.seed = seed;
            }
        }
        if o.hbar.is_some() {
            self.hbar = o.hbar;
        }
        if let Some(out) = &o.out {
            self.output.path = out.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if self.mode() == Mode::Sweep && self.sweep.is_none() {
            self.sweep = Some(SweepSpec::default());
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| {
            Err(CliError::Validation {
                field: field.into(),
                message,
            })
        };
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(field, format!("must be positive and finite, got {v}"))
            }
        };

        positive("hbar", self.hbar())?;
        positive("times.dt", self.times.dt)?;
        if self.times.stride == 0 {
            return bad("times.stride", "must be at least 1".into());
        }
        if let Some(ts) = self.times.t_span {
            if !(ts >= 0.0 && ts.is_finite()) {
                return bad("times.t_span", format!("must be non-negative and finite, got {ts}"));
            }
        }
        positive("tolerances.eps_a", self.tolerances.eps_a)?;
        positive("tolerances.tol_eig", self.tolerances.tol_eig)?;
        if !(self.tolerances.kappa_max >= 1.0) {
            return bad("tolerances.kappa_max", "must be at least 1".into());
        }

        let dim = match &self.hamiltonian {
            HamiltonianSource::Matrix(rows) => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return bad("hamiltonian.matrix", "must be a non-empty square matrix".into());
                }
                if rows.iter().flatten().any(|e| !e.value().is_finite()) {
                    return bad("hamiltonian.matrix", "entries must be finite".into());
                }
                n
            }
            HamiltonianSource::Random(r) => {
                if r.dim == 0 {
                    return bad("hamiltonian.random.dim", "must be positive".into());
                }
                for (field, [lo, hi]) in [
                    ("hamiltonian.random.re_range", r.re_range),
                    ("hamiltonian.random.im_range", r.im_range),
                ] {
                    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                        return bad(field, format!("range [{lo}, {hi}] is empty"));
                    }
                }
                if !(r.min_separation >= 0.0) {
                    return bad("hamiltonian.random.min_separation", "must be non-negative".into());
                }
                if !(r.kappa_limit >= 1.0) {
                    return bad("hamiltonian.random.kappa_limit", "must be at least 1".into());
                }
                r.dim
            }
            HamiltonianSource::Lattice(l) => {
                if l.n_sites < 3 {
                    return bad("hamiltonian.lattice.n_sites", "must be at least 3".into());
                }
                positive("hamiltonian.lattice.spacing", l.spacing)?;
                positive("hamiltonian.lattice.mass", l.mass)?;
                for (field, v) in [
                    ("hamiltonian.lattice.v_real", &l.v_real),
                    ("hamiltonian.lattice.v_imag", &l.v_imag),
                ] {
                    if !v.is_empty() && v.len() != l.n_sites {
                        return bad(field, format!("needs {} entries, got {}", l.n_sites, v.len()));
                    }
                }
                if let Some(w) = l.packet.width {
                    positive("hamiltonian.lattice.packet.width", w)?;
                }
                l.n_sites
            }
        };

        if let Some(psi) = &self.initial_state {
            if psi.len() != dim {
                return bad("initial_state", format!("needs {dim} entries, got {}", psi.len()));
            }
        }
        if let Some(o) = &self.observable {
            if o.len() != dim || o.iter().any(|r| r.len() != dim) {
                return bad("observable", format!("must be {dim}×{dim}"));
            }
        }

        match self.mode() {
            Mode::Decompose => {}
            Mode::Evolve | Mode::Suppress | Mode::Lattice => {
                if self.times.t_span.is_none() {
                    return bad(
                        "times.t_span",
                        format!("required in {:?} mode", self.mode()).to_lowercase(),
                    );
                }
            }
            Mode::Historian => {
                let Some(t1) = self.times.t1 else {
                    return bad("times.t1", "required in historian mode".into());
                };
                if !(t1 >= 0.0 && t1.is_finite()) {
                    return bad("times.t1", format!("must be non-negative, got {t1}"));
                }
                let Some(ts) = &self.times.t else {
                    return bad("times.t", "required in historian mode".into());
                };
                let ts = ts.to_vec();
                if ts.is_empty() || ts.iter().any(|&t| !(t >= t1 && t.is_finite())) {
                    return bad("times.t", format!("values must be finite and at least t1 = {t1}"));
                }
            }
            Mode::Sweep => {
                if !matches!(self.hamiltonian, HamiltonianSource::Random(_)) {
                    return bad("hamiltonian", "sweep mode needs a random source".into());
                }
                let s = self.sweep.clone().unwrap_or_default();
                if s.count == 0 {
                    return bad("sweep.count", "must be positive".into());
                }
                if s.dims[0] == 0 || s.dims[0] > s.dims[1] {
                    return bad("sweep.dims", format!("range {:?} is empty", s.dims));
                }
                if s.samples < 4 {
                    return bad("sweep.samples", "must be at least 4".into());
                }
            }
        }
        if self.mode() == Mode::Lattice && !matches!(self.hamiltonian, HamiltonianSource::Lattice(_)) {
            return bad("hamiltonian", "lattice mode needs a lattice source".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config(r#"{"mode": "decompose", "hamiltonian": {"matrix": [[1, 1], [0, 2]]}}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.hbar(), 1.0);
        assert_eq!(cfg.tolerances.eps_a, 1e-9);
        assert_eq!(cfg.times.dt, 1e-3);
        assert_eq!(cfg.output.format, Format::Json);
    }

    #[test]
    fn negative_dt_names_the_field() {
        let cfg = parse_config(r#"{"times": {"dt": -1}}"#).unwrap();
        match cfg.validate() {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "times.dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let err = parse_config(r#"{"times": {"dtt": 1}}"#).unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }));
        assert!(err.to_string().contains("dtt"));
    }

    #[test]
    fn complex_entries_parse() {
        let cfg = parse_config(r#"{"hamiltonian": {"matrix": [[[1, 0.5], 0], [0, [2, -0.5]]]}}"#).unwrap();
        let HamiltonianSource::Matrix(rows) = cfg.hamiltonian else {
            panic!()
        };
        assert_eq!(rows[0][0].value(), Complex64::new(1.0, 0.5));
        assert_eq!(rows[1][1].value(), Complex64::new(2.0, -0.5));
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = parse_config(r#"{"hamiltonian": {"random": {"dim": 3, "seed": 5}}, "hbar": 2}"#).unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            hbar: Some(0.5),
            format: Some(Format::Csv),
            ..Default::default()
        });
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cfg.hbar(), 0.5);
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn historian_needs_t1() {
        let cfg = ScenarioConfig {
            mode: Some(Mode::Historian),
            ..Default::default()
        };
        match cfg.validate() {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "times.t1"),
            other => panic!("{other:?}"),
        }
    }
}
