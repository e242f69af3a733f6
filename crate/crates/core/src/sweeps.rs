//! Monte-Carlo and deterministic parameter sweeps of the analytical
//! micromechanics models: one fiber property is varied (sampled from its
//! measured distribution or walked over a grid) while the others stay at
//! their mean values.

use crate::error::{Error, Result};
use crate::material::{
    extract_constants_plane_strain, extract_constants_plane_stress, halpin_tsai_constants,
    plane_strain_matrix, plane_stress_matrix, rotate_matrix, tandon_weng_constants,
    EngineeringConstants, IsotropicMaterial, PlaneState,
};
use crate::stochastic::{
    fit_distribution, rng_from_seed, sample_fiber_diameter, sample_fiber_length,
    sample_fiber_orientation, DistributionFit, OrientationSampler,
};
use serde::Serialize;
use std::io::Write;

/// Analytical micromechanics model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    TandonWeng,
    HalpinTsai,
}

impl Model {
    pub fn label(&self) -> &'static str {
        match self {
            Model::TandonWeng => "tandon-weng",
            Model::HalpinTsai => "halpin-tsai",
        }
    }

    pub fn constants(
        &self,
        matrix: &IsotropicMaterial,
        fiber: &IsotropicMaterial,
        aspect_ratio: f64,
        phi: f64,
    ) -> Result<EngineeringConstants> {
        match self {
            Model::TandonWeng => tandon_weng_constants(matrix, fiber, aspect_ratio, phi),
            Model::HalpinTsai => halpin_tsai_constants(matrix, fiber, aspect_ratio, phi),
        }
    }
}

/// The varied fiber parameter; the rest are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Varied {
    Length,
    Diameter,
    Orientation,
    VolumeFraction,
}

impl Varied {
    pub fn label(&self) -> &'static str {
        match self {
            Varied::Length => "length",
            Varied::Diameter => "diameter",
            Varied::Orientation => "orientation",
            Varied::VolumeFraction => "volume_fraction",
        }
    }
}

/// Sampling mode: Monte-Carlo from the parameter's density, or a
/// deterministic grid of values.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepMode {
    Random { samples: usize, seed: u64 },
    Grid(Vec<f64>),
}

/// Fixed values of the non-varied parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParameters {
    pub length: f64,
    pub diameter: f64,
    pub orientation: f64,
    pub volume_fraction: f64,
}

impl Default for FixedParameters {
    fn default() -> Self {
        Self {
            length: crate::presets::MEAN_FIBER_LENGTH,
            diameter: crate::presets::MEAN_FIBER_DIAMETER,
            orientation: 0.0,
            volume_fraction: crate::presets::VOLUME_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    pub varied: Varied,
    pub mode: SweepMode,
    pub fixed: FixedParameters,
    pub state: PlaneState,
    pub matrix: IsotropicMaterial,
    pub fiber: IsotropicMaterial,
}

impl SweepSpec {
    pub fn new(model: Model, varied: Varied, mode: SweepMode) -> Self {
        Self {
            model,
            varied,
            mode,
            fixed: FixedParameters::default(),
            state: PlaneState::PlaneStress,
            matrix: crate::presets::pbt_matrix(),
            fiber: crate::presets::glass_fiber(),
        }
    }
}

/// One evaluated sample of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Varied parameter value (um, radians or fraction).
    pub value: f64,
    pub constants: EngineeringConstants,
    /// Row-major C11..C66 in the global frame [GPa].
    pub coeffs: [f64; 9],
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub model: Model,
    pub varied: Varied,
    pub state: PlaneState,
    pub rows: Vec<SweepRow>,
    /// Fitted output distributions for random sweeps with enough samples.
    pub e1_fit: Option<DistributionFit>,
    pub c11_fit: Option<DistributionFit>,
}

fn evaluate(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let f = &spec.fixed;
    let (length, diameter, theta, phi) = match spec.varied {
        Varied::Length => (value, f.diameter, f.orientation, f.volume_fraction),
        Varied::Diameter => (f.length, value, f.orientation, f.volume_fraction),
        Varied::Orientation => (f.length, f.diameter, value, f.volume_fraction),
        Varied::VolumeFraction => (f.length, f.diameter, f.orientation, value),
    };
    if diameter <= 0.0 || length <= 0.0 {
        return Err(Error::Domain(format!(
            "non-positive fiber geometry: l = {length}, d = {diameter}"
        )));
    }
    let base = spec
        .model
        .constants(&spec.matrix, &spec.fiber, length / diameter, phi)?;
    let aligned = match spec.state {
        PlaneState::PlaneStress => plane_stress_matrix(&base)?,
        PlaneState::PlaneStrain => plane_strain_matrix(&base)?,
    };
    let (matrix, constants) = if theta == 0.0 {
        (aligned, base)
    } else {
        // Rotated coefficients; constants re-extracted from the rotated
        // matrix through the inverse relations.
        let rotated = rotate_matrix(&aligned, theta);
        let constants = match spec.state {
            PlaneState::PlaneStress => extract_constants_plane_stress(&rotated, base.g23)?,
            PlaneState::PlaneStrain => extract_constants_plane_strain(&rotated, base.nu23())?,
        };
        (rotated, constants)
    };
    let mut coeffs = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            coeffs[3 * r + c] = matrix.entries[r][c];
        }
    }
    Ok(SweepRow {
        value,
        constants,
        coeffs,
    })
}

/// Runs a sweep. Random mode draws the varied parameter from its
/// preset distribution; the volume fraction has no sampling density and
/// must use a grid.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let values: Vec<f64> = match &spec.mode {
        SweepMode::Grid(values) => {
            if values.is_empty() {
                return Err(Error::Domain("empty sweep grid".into()));
            }
            values.clone()
        }
        SweepMode::Random { samples, seed } => {
            if *samples == 0 {
                return Err(Error::Domain("zero sweep samples".into()));
            }
            let mut rng = rng_from_seed(*seed);
            match spec.varied {
                Varied::Length => {
                    // Lengths at or below the diameter leave the prolate
                    // domain of the models; the lower tail (~0.2% of the
                    // mass) is truncated by rejection.
                    let p = crate::presets::fiber_length_distribution();
                    (0..*samples)
                        .map(|_| loop {
                            let l = sample_fiber_length(&mut rng, &p);
                            if l > spec.fixed.diameter {
                                break l;
                            }
                        })
                        .collect()
                }
                Varied::Diameter => {
                    let p = crate::presets::fiber_diameter_distribution();
                    (0..*samples)
                        .map(|_| sample_fiber_diameter(&mut rng, &p))
                        .collect()
                }
                Varied::Orientation => {
                    let p = crate::presets::fiber_orientation_distribution();
                    let sampler = OrientationSampler::new(&p);
                    (0..*samples)
                        .map(|_| sample_fiber_orientation(&mut rng, &sampler))
                        .collect()
                }
                Varied::VolumeFraction => {
                    return Err(Error::Domain(
                        "volume fraction sweeps are deterministic; use a grid".into(),
                    ))
                }
            }
        }
    };
    let mut rows = Vec::with_capacity(values.len());
    for v in values {
        rows.push(evaluate(spec, v)?);
    }
    let random = matches!(spec.mode, SweepMode::Random { .. });
    let (e1_fit, c11_fit) = if random && rows.len() >= 50 {
        let e1: Vec<f64> = rows.iter().map(|r| r.constants.e1).collect();
        let c11: Vec<f64> = rows.iter().map(|r| r.coeffs[0]).collect();
        (fit_distribution(&e1).ok(), fit_distribution(&c11).ok())
    } else {
        (None, None)
    };
    Ok(SweepResult {
        model: spec.model,
        varied: spec.varied,
        state: spec.state,
        rows,
        e1_fit,
        c11_fit,
    })
}

/// Deterministic curve of constants and coefficients over a volume
/// fraction grid.
pub fn volume_fraction_curve(model: Model, grid: &[f64]) -> Result<SweepResult> {
    if grid.iter().any(|&p| !(0.0..1.0).contains(&p)) {
        return Err(Error::Domain("volume fraction grid outside [0, 1)".into()));
    }
    let spec = SweepSpec::new(model, Varied::VolumeFraction, SweepMode::Grid(grid.to_vec()));
    run_sweep(&spec)
}

/// CSV export: varied value, engineering constants, coefficients.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{}_value,E1_gpa,E2_gpa,G12_gpa,G23_gpa,nu12,C11,C12,C16,C21,C22,C26,C61,C62,C66",
        result.varied.label()
    )?;
    for r in &result.rows {
        write!(
            w,
            "{},{},{},{},{},{}",
            r.value, r.constants.e1, r.constants.e2, r.constants.g12, r.constants.g23,
            r.constants.nu12
        )?;
        for c in r.coeffs {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QuantileSummary {
    min: f64,
    q05: f64,
    median: f64,
    q95: f64,
    max: f64,
    mean: f64,
}

fn quantiles(values: &[f64]) -> QuantileSummary {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    QuantileSummary {
        min: v[0],
        q05: q(0.05),
        median: q(0.5),
        q95: q(0.95),
        max: v[v.len() - 1],
        mean: values.iter().sum::<f64>() / values.len() as f64,
    }
}

#[derive(Debug, Serialize)]
struct SweepSummary<'a> {
    model: &'a str,
    varied: &'a str,
    state: String,
    samples: usize,
    e1: QuantileSummary,
    c11: QuantileSummary,
    e1_fit: &'a Option<DistributionFit>,
    c11_fit: &'a Option<DistributionFit>,
}

/// JSON summary: fit parameters, preferred families, quantiles.
pub fn write_sweep_summary<W: Write>(result: &SweepResult, w: W) -> Result<()> {
    let e1: Vec<f64> = result.rows.iter().map(|r| r.constants.e1).collect();
    let c11: Vec<f64> = result.rows.iter().map(|r| r.coeffs[0]).collect();
    let summary = SweepSummary {
        model: result.model.label(),
        varied: result.varied.label(),
        state: result.state.to_string(),
        samples: result.rows.len(),
        e1: quantiles(&e1),
        c11: quantiles(&c11),
        e1_fit: &result.e1_fit,
        c11_fit: &result.c11_fit,
    };
    serde_json::to_writer_pretty(w, &summary).map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
