//! The run manifest: everything that determines a run's output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hamflow_core::error_lab::{CLOCK_QUAD_TOL, FIT_TOL, INVARIANT_TOL, RATIO_TOL, ZERO_FIELD_TOL};
use hamflow_core::field::SINGULAR_BAND;
use hamflow_core::system::catalogue;
use hamflow_core::{HamiltonianSystem, PhaseState};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// One step size for every step, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Uniform(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub singular_band: f64,
    pub invariant: f64,
    pub audit: f64,
    pub consistency: f64,
    pub defect_ratio: f64,
    pub clock_quadrature: f64,
    pub zero_field: f64,
    pub classification_fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            singular_band: SINGULAR_BAND,
            invariant: INVARIANT_TOL,
            audit: 1e-10,
            consistency: 1e-3,
            defect_ratio: RATIO_TOL,
            clock_quadrature: CLOCK_QUAD_TOL,
            zero_field: ZERO_FIELD_TOL,
            classification_fit: FIT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub system: String,
    pub scheme: String,
    pub seed: Seed,
    pub delta: StepSpec,
    pub steps: usize,
    pub functionals: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "tool_version")]
    pub version: String,
}

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

impl Default for RunManifest {
    /// Oscillator from `(1, 0)`, 200 steps of 0.1.
    fn default() -> Self {
        RunManifest {
            system: "ho".into(),
            scheme: "exact".into(),
            seed: Seed {
                q: vec![1.0],
                p: vec![0.0],
            },
            delta: StepSpec::Uniform(0.1),
            steps: 200,
            functionals: vec!["x/p".into(), "2H".into()],
            tolerances: Tolerances::default(),
            version: tool_version(),
        }
    }
}

/// Command-line values that replace manifest entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub scheme: Option<String>,
    pub seed_q: Option<Vec<f64>>,
    pub seed_p: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub steps: Option<usize>,
    pub functionals: Option<Vec<String>>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.system {
            self.system = v.clone();
        }
        if let Some(v) = &o.scheme {
            self.scheme = v.clone();
        }
        if let Some(v) = &o.seed_q {
            self.seed.q = v.clone();
        }
        if let Some(v) = &o.seed_p {
            self.seed.p = v.clone();
        }
        if let Some(v) = o.delta {
            self.delta = StepSpec::Uniform(v);
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = &o.functionals {
            self.functionals = v.clone();
        }
    }

    pub fn system(&self) -> CliResult<HamiltonianSystem> {
        Ok(catalogue(&self.system)?)
    }

    pub fn seed_state(&self) -> CliResult<PhaseState> {
        if self.seed.q.len() != self.seed.p.len() {
            return Err(CliError::Config(format!(
                "seed has {} positions but {} momenta",
                self.seed.q.len(),
                self.seed.p.len()
            )));
        }
        Ok(PhaseState::new(self.seed.q.clone(), self.seed.p.clone())?)
    }

    /// Per-step sizes of the run.
    pub fn step_list(&self) -> CliResult<Vec<f64>> {
        let list = match &self.delta {
            StepSpec::Uniform(d) => vec![*d; self.steps],
            StepSpec::List(v) if v.len() == self.steps => v.clone(),
            StepSpec::List(v) => {
                return Err(CliError::Config(format!(
                    "delta lists {} steps but steps = {}",
                    v.len(),
                    self.steps
                )))
            }
        };
        if let Some(bad) = list.iter().find(|d| !d.is_finite()) {
            return Err(CliError::Config(format!("step size {bad} is not finite")));
        }
        Ok(list)
    }

    /// The uniform step, or the first listed one.
    pub fn nominal_delta(&self) -> f64 {
        match &self.delta {
            StepSpec::Uniform(d) => *d,
            StepSpec::List(v) => v.first().copied().unwrap_or(0.0),
        }
    }
}
