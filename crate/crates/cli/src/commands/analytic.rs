//! `sfrc analytic` — constants table for both micromechanics models, or
//! a single-parameter sweep of one model.

use sfrc_core::material::{plane_strain_matrix, plane_stress_matrix, PlaneState};
use sfrc_core::stochastic::derive_seed;
use sfrc_core::sweeps::{
    run_sweep, volume_fraction_curve, write_sweep_csv, write_sweep_summary, Model, SweepMode,
    SweepSpec, Varied,
};
use std::fs::File;
use std::io::Write;

use crate::manifest::RunManifest;
use crate::{CliError, Ctx};

fn parse_model(s: &str) -> Result<Model, CliError> {
    match s {
        "tandon-weng" => Ok(Model::TandonWeng),
        "halpin-tsai" => Ok(Model::HalpinTsai),
        other => Err(CliError::Usage(format!(
            "unknown model '{other}' (expected tandon-weng or halpin-tsai)"
        ))),
    }
}

fn parse_varied(s: &str) -> Result<Varied, CliError> {
    match s {
        "length" => Ok(Varied::Length),
        "diameter" => Ok(Varied::Diameter),
        "orientation" => Ok(Varied::Orientation),
        "volume-fraction" | "volume_fraction" => Ok(Varied::VolumeFraction),
        other => Err(CliError::Usage(format!(
            "unknown sweep parameter '{other}' (expected length, diameter, orientation, \
             or volume-fraction)"
        ))),
    }
}

pub fn run(
    ctx: &Ctx,
    model_flag: Option<&str>,
    vary_flag: Option<&str>,
    samples_flag: Option<usize>,
) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let model = parse_model(model_flag.unwrap_or(&cfg.analytic.model))?;
    let vary = match vary_flag.or(cfg.analytic.vary.as_deref()) {
        Some(v) => Some(parse_varied(v)?),
        None => None,
    };
    let samples = samples_flag.unwrap_or(cfg.analytic.samples);
    let mut manifest = RunManifest::start(&ctx.out, "analytic", cfg, 0)?;

    match vary {
        None => {
            let name = "analytic_constants.csv";
            let mut w = File::create(ctx.out.join(name))
                .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
            write_constants_table(ctx, &mut w)?;
            manifest.add_output(name)?;
        }
        Some(Varied::VolumeFraction) => {
            // Deterministic curve over the studied mass-content range.
            let grid: Vec<f64> = (0..=40).map(|i| 0.10 + 0.005 * i as f64).collect();
            let result = volume_fraction_curve(model, &grid)?;
            let name = format!("sweep_volume_fraction_{}.csv", model.label());
            let file = File::create(ctx.out.join(&name))
                .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
            write_sweep_csv(&result, file)?;
            manifest.add_output(&name)?;
        }
        Some(varied) => {
            let mut spec = SweepSpec::new(
                model,
                varied,
                SweepMode::Random {
                    samples,
                    seed: derive_seed(cfg.run.seed, 100 + varied as u64),
                },
            );
            spec.state = cfg.state()?;
            spec.matrix = cfg.matrix()?;
            spec.fiber = cfg.fiber()?;
            let result = run_sweep(&spec)?;
            let base = format!("sweep_{}_{}", varied.label(), model.label());
            let csv_name = format!("{base}.csv");
            let file = File::create(ctx.out.join(&csv_name))
                .map_err(|e| CliError::Runtime(format!("{csv_name}: {e}")))?;
            write_sweep_csv(&result, file)?;
            manifest.add_output(&csv_name)?;
            let json_name = format!("{base}.json");
            let file = File::create(ctx.out.join(&json_name))
                .map_err(|e| CliError::Runtime(format!("{json_name}: {e}")))?;
            write_sweep_summary(&result, file)?;
            manifest.add_output(&json_name)?;
        }
    }
    manifest.finish()
}

/// Engineering constants and stiffness coefficients of both models at
/// the fixed parameters, one row per model.
fn write_constants_table<W: Write>(ctx: &Ctx, w: &mut W) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let state = cfg.state()?;
    let matrix = cfg.matrix()?;
    let fiber = cfg.fiber()?;
    let aspect =
        sfrc_core::presets::MEAN_FIBER_LENGTH / sfrc_core::presets::MEAN_FIBER_DIAMETER;
    let phi = cfg.generation.target_volume_fraction;
    writeln!(
        w,
        "model,E1_gpa,E2_gpa,G12_gpa,G23_gpa,nu12,C11_gpa,C12_gpa,C16_gpa,\
         C21_gpa,C22_gpa,C26_gpa,C61_gpa,C62_gpa,C66_gpa"
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    for model in [Model::TandonWeng, Model::HalpinTsai] {
        let c = model.constants(&matrix, &fiber, aspect, phi)?;
        let m = match state {
            PlaneState::PlaneStress => plane_stress_matrix(&c)?,
            PlaneState::PlaneStrain => plane_strain_matrix(&c)?,
        };
        write!(
            w,
            "{},{},{},{},{},{}",
            model.label(),
            c.e1,
            c.e2,
            c.g12,
            c.g23,
            c.nu12
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        for r in 0..3 {
            for col in 0..3 {
                write!(w, ",{}", m.get(r, col)).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
        }
        writeln!(w).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}
