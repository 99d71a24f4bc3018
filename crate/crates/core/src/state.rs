use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmetric::QMetric;

/// A (generally unnormalized) state `|ψ⟩` in the standard coordinate basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub label: Option<String>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("state must have at least one amplitude".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        Ok(Self {
            amplitudes,
            label: None,
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

impl From<NormalizedState> for StateVector {
    fn from(n: NormalizedState) -> Self {
        Self {
            amplitudes: n.amplitudes,
            label: None,
        }
    }
}

/// A state with unit Q-norm, tied to the metric that normalized it.
#[derive(Debug, Clone)]
pub struct NormalizedState {
    pub(crate) amplitudes: Vec<Complex64>,
    pub(crate) metric: QMetric,
}

impl NormalizedState {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn metric(&self) -> &QMetric {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_state(&self) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.clone(),
            label: None,
        }
    }
}
