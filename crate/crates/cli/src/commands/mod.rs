use sfrc_core::corr::EnsembleConfig;
use sfrc_core::stochastic::derive_seed;

use crate::{CliError, Ctx};

pub mod analytic;
pub mod corr;
pub mod elementsize;
pub mod influence;
pub mod microgen;
pub mod verify;

/// Builds the shared ensemble configuration of the numerical commands
/// from the merged experiment configuration.
pub(crate) fn ensemble_config(
    ctx: &Ctx,
    window: u32,
    all_placements: bool,
    seed_salt: u64,
) -> Result<EnsembleConfig, CliError> {
    let cfg = &ctx.config;
    let mut e = EnsembleConfig::new(
        cfg.generation.domain_um,
        window,
        cfg.run.realizations,
        derive_seed(cfg.run.seed, seed_salt),
    );
    e.scenario = cfg.scenario()?;
    e.state = cfg.state()?;
    e.h = cfg.mesh.h_um;
    e.all_placements = all_placements;
    e.boundary = cfg.boundary()?;
    e.target_volume_fraction = cfg.generation.target_volume_fraction;
    e.matrix = cfg.matrix()?;
    e.fiber = cfg.fiber()?;
    Ok(e)
}
