//! `sfrc microgen` — generates one random fiber microstructure, saves it
//! in the binary raster format, and writes a JSON summary.

use serde::Serialize;
use sfrc_core::material::volume_to_mass_fraction;
use sfrc_core::microgen::{generate_microstructure, io::save_binary, PropertyMode};
use sfrc_core::stochastic::{derive_seed, SampleStats};

use crate::manifest::RunManifest;
use crate::{CliError, Ctx};

#[derive(Serialize)]
struct MicrogenSummary {
    domain_um: u32,
    seed: u64,
    fiber_count: usize,
    achieved_volume_fraction: f64,
    achieved_mass_fraction: f64,
    /// True when every fiber has the same orientation (fixed-angle
    /// configuration): the structure is deliberately anisotropic.
    aligned: bool,
    orientation_mean_rad: f64,
    orientation_std_rad: f64,
}

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let scenario = cfg.scenario()?;
    let mut manifest = RunManifest::start(&ctx.out, "microgen", cfg, 1)?;
    let mut gen_cfg = scenario.generation_config(
        cfg.generation.domain_um,
        cfg.generation.target_volume_fraction,
        derive_seed(cfg.run.seed, 0),
    );
    if let Some(theta) = cfg.generation.orientation_fixed {
        gen_cfg.orientation = PropertyMode::Fixed(theta);
    }
    gen_cfg.boundary = cfg.boundary()?;
    let micro = generate_microstructure(&gen_cfg)?;

    let name = "microstructure.bin";
    save_binary(&micro, &ctx.out.join(name))?;
    manifest.add_output(name)?;

    let orientations: Vec<f64> = micro.fibers.iter().map(|f| f.orientation).collect();
    let stats = SampleStats::compute(&orientations)?;
    let matrix = cfg.matrix()?;
    let fiber = cfg.fiber()?;
    let summary = MicrogenSummary {
        domain_um: cfg.generation.domain_um,
        seed: micro.seed,
        fiber_count: micro.fibers.len(),
        achieved_volume_fraction: micro.achieved_volume_fraction,
        achieved_mass_fraction: volume_to_mass_fraction(
            micro.achieved_volume_fraction,
            fiber.density,
            matrix.density,
        )?,
        aligned: stats.std == 0.0,
        orientation_mean_rad: stats.mean,
        orientation_std_rad: stats.std,
    };
    let summary_name = "microstructure.json";
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(format!("summary: {e}")))?;
    std::fs::write(ctx.out.join(summary_name), text)
        .map_err(|e| CliError::Runtime(format!("{summary_name}: {e}")))?;
    manifest.add_output(summary_name)?;
    manifest.finish()
}
