//! Run configuration: defaults, config-file layer, preset layer, and flag
//! overrides, in that order. The effective configuration is echoed into
//! every run's output directory.

use elascat::dtn::BackgroundMedium;
use elascat::fem::WaveKind;
use elascat::inversion::{StepSize, StoppingRule, SweepSchedule, Variant};
use elascat::scenarios::paper_preset;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub lambda0: f64,
    pub mu0: f64,
    pub rho0: f64,
    pub radius: f64,
    /// Mesh level of forward/inversion solves (boundary grid 64·2^level).
    pub mesh_level: u32,
    /// Mesh level data synthesis runs on.
    pub data_mesh_level: u32,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_frequencies: usize,
    pub m_directions: usize,
    pub l_iterations: usize,
    /// "P" or "S".
    pub incidence: String,
    /// Single frequency used by `forward`.
    pub omega: f64,
    /// Incidence angle used by `forward`.
    pub angle: f64,
    /// "matrix", "scalar", or "scalar-per-omega".
    pub step_kind: String,
    pub step_value: f64,
    /// "fixed" or "discrepancy".
    pub stop: String,
    pub tau: f64,
    pub eta0: f64,
    /// Relative noise level assumed by the discrepancy rule; NaN means
    /// "wire from the dataset header".
    pub delta: f64,
    pub phantom: String,
    /// "full", "phaseless", "density", "density-phaseless".
    pub variant: String,
    pub noise: f64,
    /// Store |u|² records when synthesizing.
    pub phaseless_data: bool,
    pub seed: u64,
    /// Worker threads; 0 = machine core count.
    pub workers: usize,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda0: 2.0,
            mu0: 1.0,
            rho0: 1.0,
            radius: 1.0,
            mesh_level: 1,
            data_mesh_level: 2,
            omega_min: 1.0,
            omega_max: 10.0,
            n_frequencies: 10,
            m_directions: 16,
            l_iterations: 10,
            incidence: "P".into(),
            omega: 1.0,
            angle: 0.0,
            step_kind: "matrix".into(),
            step_value: 0.01,
            stop: "fixed".into(),
            tau: 3.0,
            eta0: 0.1,
            delta: f64::NAN,
            phantom: "three-bump".into(),
            variant: "full".into(),
            noise: 0.0,
            phaseless_data: false,
            seed: 1,
            workers: 0,
            dataset: None,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn apply_preset(&mut self, id: &str) -> Result<(), String> {
        let p = paper_preset(id).map_err(|e| e.to_string())?;
        self.lambda0 = p.medium.lambda0;
        self.mu0 = p.medium.mu0;
        self.rho0 = p.medium.rho0;
        self.radius = p.medium.radius;
        self.mesh_level = p.inversion_mesh_level;
        self.data_mesh_level = p.data_mesh_level;
        self.omega_min = *p.schedule.frequencies.first().unwrap();
        self.omega_max = *p.schedule.frequencies.last().unwrap();
        self.n_frequencies = p.schedule.frequencies.len();
        self.m_directions = p.schedule.directions.len();
        self.l_iterations = p.schedule.inner_iterations;
        self.incidence = match p.incidence_kind {
            WaveKind::P => "P".into(),
            WaveKind::S => "S".into(),
        };
        match p.step {
            StepSize::Matrix { scale } => {
                self.step_kind = "matrix".into();
                self.step_value = scale;
            }
            StepSize::Scalar { value, per_omega } => {
                self.step_kind = if per_omega {
                    "scalar-per-omega".into()
                } else {
                    "scalar".into()
                };
                self.step_value = value;
            }
        }
        self.phantom = p.phantom.name.clone();
        self.variant = match (p.variant.phaseless, p.variant.density_only) {
            (false, false) => "full".into(),
            (true, false) => "phaseless".into(),
            (false, true) => "density".into(),
            (true, true) => "density-phaseless".into(),
        };
        self.noise = p.noise_level;
        self.phaseless_data = p.phaseless_data;
        Ok(())
    }

    pub fn medium(&self) -> Result<BackgroundMedium, String> {
        BackgroundMedium::new(self.lambda0, self.mu0, self.rho0, self.radius)
            .map_err(|e| e.to_string())
    }

    pub fn incidence_kind(&self) -> Result<WaveKind, String> {
        match self.incidence.as_str() {
            "P" | "p" => Ok(WaveKind::P),
            "S" | "s" => Ok(WaveKind::S),
            other => Err(format!("unknown incidence kind `{other}` (use P or S)")),
        }
    }

    pub fn schedule(&self) -> Result<SweepSchedule, String> {
        SweepSchedule::equispaced(
            self.omega_min,
            self.omega_max,
            self.n_frequencies,
            self.m_directions,
            self.l_iterations,
        )
        .map_err(|e| e.to_string())
    }

    pub fn step(&self) -> Result<StepSize, String> {
        match self.step_kind.as_str() {
            "matrix" => Ok(StepSize::Matrix {
                scale: self.step_value,
            }),
            "scalar" => Ok(StepSize::Scalar {
                value: self.step_value,
                per_omega: false,
            }),
            "scalar-per-omega" => Ok(StepSize::Scalar {
                value: self.step_value,
                per_omega: true,
            }),
            other => Err(format!("unknown step kind `{other}`")),
        }
    }

    pub fn stopping(&self, dataset_noise: f64) -> Result<StoppingRule, String> {
        match self.stop.as_str() {
            "fixed" => Ok(StoppingRule::FixedCount),
            "discrepancy" => {
                let delta = if self.delta.is_nan() {
                    dataset_noise
                } else {
                    self.delta
                };
                StoppingRule::discrepancy(self.tau, self.eta0, delta).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown stopping rule `{other}`")),
        }
    }

    pub fn variant(&self) -> Result<Variant, String> {
        match self.variant.as_str() {
            "full" => Ok(Variant::FULL),
            "phaseless" => Ok(Variant::PHASELESS),
            "density" => Ok(Variant::DENSITY),
            "density-phaseless" => Ok(Variant::DENSITY_PHASELESS),
            other => Err(format!("unknown variant `{other}`")),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
