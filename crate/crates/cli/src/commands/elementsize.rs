//! `sfrc elementsize` — ensemble-mean apparent coefficients of the
//! configured window for a series of element sizes, one CSV row per
//! (element size, boundary-condition kind).

use sfrc_core::corr::ensemble_run;
use sfrc_core::fem::BcKind;
use std::fs::File;
use std::io::Write;

use crate::manifest::RunManifest;
use crate::{CliError, Ctx};

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let mut manifest = RunManifest::start(&ctx.out, "elementsize", cfg, cfg.run.realizations)?;
    let name = "elementsize.csv";
    let mut w = File::create(ctx.out.join(name))
        .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
    writeln!(
        w,
        "h_um,bc_kind,C11_gpa,C12_gpa,C16_gpa,C21_gpa,C22_gpa,C26_gpa,\
         C61_gpa,C62_gpa,C66_gpa"
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    for &h in &cfg.elementsize.h_values_um {
        // The same seed for every element size: identical microstructure
        // ensembles, so rows differ only through the discretization.
        let mut e = super::ensemble_config(ctx, cfg.run.window_um, false, 200)?;
        e.h = h;
        let table = ensemble_run(&e)?;
        for kind in [BcKind::Displacement, BcKind::Traction] {
            write!(w, "{h},{kind}").map_err(|e| CliError::Runtime(e.to_string()))?;
            for coeff in 0..9 {
                let sample = table.sample(coeff, 0, kind);
                let mean = sample.iter().sum::<f64>() / sample.len() as f64;
                write!(w, ",{mean}").map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            writeln!(w).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    drop(w);
    manifest.add_output(name)?;
    manifest.finish()
}
