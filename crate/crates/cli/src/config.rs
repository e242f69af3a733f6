//! Experiment configuration: one TOML file per run, overridable by
//! command-line flags (flags win), with defaults mirroring the built-in
//! glass/PBT study setup.

use serde::{Deserialize, Serialize};
use sfrc_core::corr::Scenario;
use sfrc_core::material::{IsotropicMaterial, PlaneState};
use sfrc_core::microgen::BoundaryMode;
use sfrc_core::verify::DEFAULT_SEED;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub phases: PhasesSection,
    pub generation: GenerationSection,
    pub mesh: MeshSection,
    pub windows: WindowsSection,
    pub analytic: AnalyticSection,
    pub elementsize: ElementSizeSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: String,
    /// "plane-stress" or "plane-strain".
    pub state: String,
    pub realizations: usize,
    /// Window edge for single-window commands [um].
    pub window_um: u32,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            workers: 0,
            out: "runs".into(),
            state: "plane-stress".into(),
            realizations: 500,
            window_um: 250,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSection {
    pub young_modulus_gpa: f64,
    pub poisson_ratio: f64,
    pub density_kg_m3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhasesSection {
    pub matrix: PhaseSection,
    pub fiber: PhaseSection,
}

impl Default for PhasesSection {
    fn default() -> Self {
        Self {
            matrix: PhaseSection {
                young_modulus_gpa: 2.6,
                poisson_ratio: 0.41,
                density_kg_m3: 1300.0,
            },
            fiber: PhaseSection {
                young_modulus_gpa: 70.0,
                poisson_ratio: 0.22,
                density_kg_m3: 2500.0,
            },
        }
    }
}

impl Default for PhaseSection {
    fn default() -> Self {
        PhasesSection::default().matrix
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub domain_um: u32,
    pub target_volume_fraction: f64,
    /// "length", "diameter", "orientation", "fraction", or "all": which
    /// fiber property distributions vary; the others sit at their means.
    pub scenario: String,
    /// Fixes every fiber orientation to this angle [rad] regardless of
    /// the scenario.
    pub orientation_fixed: Option<f64>,
    /// "clipped" (fiber footprints truncated at the domain edge, keeps
    /// fiber coverage stationary up to the boundary) or "contained"
    /// (every fiber lies fully inside, leaving a depleted rim).
    pub boundary: String,
}

impl Default for GenerationSection {
    fn default() -> Self {
        Self {
            domain_um: 2500,
            target_volume_fraction: sfrc_core::presets::VOLUME_FRACTION,
            scenario: "all".into(),
            orientation_fixed: None,
            boundary: "clipped".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub h_um: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { h_um: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowsSection {
    pub sizes_um: Vec<u32>,
}

impl Default for WindowsSection {
    fn default() -> Self {
        Self {
            sizes_um: vec![250, 500, 750],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSection {
    /// "tandon-weng" or "halpin-tsai".
    pub model: String,
    /// "length", "diameter", "orientation", or "volume-fraction"; absent
    /// emits the fixed-parameter constants table for both models.
    pub vary: Option<String>,
    pub samples: usize,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Self {
            model: "tandon-weng".into(),
            vary: None,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementSizeSection {
    pub h_values_um: Vec<f64>,
}

impl Default for ElementSizeSection {
    fn default() -> Self {
        Self {
            h_values_um: vec![10.0, 5.0, 2.5],
        }
    }
}

impl ExperimentConfig {
    /// Loads the file when given; an empty file is a usage error.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?;
                if text.trim().is_empty() {
                    return Err(CliError::Usage(format!(
                        "config {} is empty",
                        p.display()
                    )));
                }
                toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
            }
        }
    }

    pub fn state(&self) -> Result<PlaneState, CliError> {
        match self.run.state.as_str() {
            "plane-stress" => Ok(PlaneState::PlaneStress),
            "plane-strain" => Ok(PlaneState::PlaneStrain),
            other => Err(CliError::Usage(format!(
                "unknown state '{other}' (expected plane-stress or plane-strain)"
            ))),
        }
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        match self.generation.scenario.as_str() {
            "length" => Ok(Scenario::LengthOnly),
            "diameter" => Ok(Scenario::DiameterOnly),
            "orientation" => Ok(Scenario::OrientationOnly),
            "fraction" => Ok(Scenario::FractionOnly),
            "all" => Ok(Scenario::AllVarying),
            other => Err(CliError::Usage(format!(
                "unknown scenario '{other}' (expected length, diameter, orientation, \
                 fraction, or all)"
            ))),
        }
    }

    pub fn boundary(&self) -> Result<BoundaryMode, CliError> {
        match self.generation.boundary.as_str() {
            "clipped" => Ok(BoundaryMode::Clipped),
            "contained" => Ok(BoundaryMode::Contained),
            other => Err(CliError::Usage(format!(
                "unknown boundary '{other}' (expected clipped or contained)"
            ))),
        }
    }

    pub fn matrix(&self) -> Result<IsotropicMaterial, CliError> {
        phase_material(&self.phases.matrix, "matrix")
    }

    pub fn fiber(&self) -> Result<IsotropicMaterial, CliError> {
        phase_material(&self.phases.fiber, "fiber")
    }
}

fn phase_material(p: &PhaseSection, name: &str) -> Result<IsotropicMaterial, CliError> {
    IsotropicMaterial::new(p.young_modulus_gpa, p.poisson_ratio, p.density_kg_m3)
        .map_err(|e| CliError::Usage(format!("{name} phase: {e}")))
}
