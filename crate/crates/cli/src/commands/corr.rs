//! `sfrc corr` — moving-window ensemble with correlation-curve exports.
//! Resumable: an existing coefficient table in the output directory is
//! completed cell by cell instead of recomputed, and the finished table
//! is bit-identical to an uninterrupted run.

use rayon::prelude::*;
use serde::Serialize;
use sfrc_core::corr::{
    correlation_curves, ensemble_run, independent_pair_reduction, read_table_rows,
    window_centers, write_curves_csv, write_table_csv, CoefficientRow, CoefficientTable,
    EnsembleConfig,
};
use sfrc_core::fem::BcKind;
use sfrc_core::homogenize::apparent_tensor;
use sfrc_core::microgen::{extract_window, generate_microstructure};
use sfrc_core::stochastic::derive_seed;
use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::manifest::RunManifest;
use crate::{CliError, Ctx};

const TABLE_FILE: &str = "coefficients.csv";
const CURVES_FILE: &str = "curves.csv";
const SUMMARY_FILE: &str = "correlation_summary.json";

#[derive(Serialize)]
struct CorrSummary {
    realizations: usize,
    placements: usize,
    window_um: u32,
    resumed_rows: usize,
    computed_rows: usize,
    max_hill_residual_new_rows: f64,
    /// Largest pointwise |rho_a^b - rho_b^a| over all curve pairs.
    max_exchange_deviation: f64,
    /// Largest pointwise deviation across tensor-symmetry partners.
    max_partner_deviation: f64,
    independent_curves: usize,
}

fn kind_rank(k: BcKind) -> u8 {
    match k {
        BcKind::Displacement => 0,
        BcKind::Traction => 1,
    }
}

pub fn run(ctx: &Ctx) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let e = super::ensemble_config(ctx, cfg.run.window_um, true, 400)?;
    let mut manifest = RunManifest::start(&ctx.out, "corr", cfg, e.realizations)?;
    let table_path = ctx.out.join(TABLE_FILE);

    let (table, resumed_rows, computed_rows, max_hill) = if table_path.exists() {
        resume(&e, &table_path)?
    } else {
        let table = ensemble_run(&e)?;
        let n = table.rows.len();
        let hill = table.max_hill_residual;
        (table, 0, n, hill)
    };

    let file = File::create(&table_path)
        .map_err(|err| CliError::Runtime(format!("{TABLE_FILE}: {err}")))?;
    write_table_csv(&table, file)?;
    manifest.add_output(TABLE_FILE)?;

    let curves = correlation_curves(&table)?;
    let file = File::create(ctx.out.join(CURVES_FILE))
        .map_err(|err| CliError::Runtime(format!("{CURVES_FILE}: {err}")))?;
    write_curves_csv(&curves, file)?;
    manifest.add_output(CURVES_FILE)?;

    let reduction = independent_pair_reduction(&curves);
    let summary = CorrSummary {
        realizations: table.realizations,
        placements: table.layout.centers.len(),
        window_um: table.layout.window,
        resumed_rows,
        computed_rows,
        max_hill_residual_new_rows: max_hill,
        max_exchange_deviation: reduction.max_exchange_deviation,
        max_partner_deviation: reduction.max_partner_deviation,
        independent_curves: reduction.independent.len(),
    };
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|err| CliError::Runtime(format!("summary: {err}")))?;
    std::fs::write(ctx.out.join(SUMMARY_FILE), text)
        .map_err(|err| CliError::Runtime(format!("{SUMMARY_FILE}: {err}")))?;
    manifest.add_output(SUMMARY_FILE)?;
    manifest.finish()
}

/// Completes the missing (realization, placement, kind) cells of an
/// interrupted run. Realizations already present keep their recorded
/// seed, so resumed tables match uninterrupted ones bit for bit.
fn resume(
    e: &EnsembleConfig,
    table_path: &Path,
) -> Result<(CoefficientTable, usize, usize, f64), CliError> {
    let file = File::open(table_path)
        .map_err(|err| CliError::Runtime(format!("{}: {err}", table_path.display())))?;
    let existing = read_table_rows(file)?;
    let layout = window_centers(e.domain, e.window)?;
    for row in &existing {
        if row.window != e.window || row.state != e.state {
            return Err(CliError::Usage(format!(
                "existing table was computed for window {} um / {}; configured {} um / {}",
                row.window, row.state, e.window, e.state
            )));
        }
    }
    let mut by_realization: HashMap<usize, Vec<CoefficientRow>> = HashMap::new();
    for row in existing {
        by_realization.entry(row.realization).or_default().push(row);
    }
    let resumed_rows: usize = by_realization.values().map(Vec::len).sum();
    let expected = layout.centers.len() * e.bc_kinds.len();

    let results: Vec<Result<(Vec<CoefficientRow>, f64), sfrc_core::Error>> = (0..e.realizations)
        .into_par_iter()
        .map(|i| complete_realization(e, &layout, i, by_realization.get(&i)))
        .collect();
    let mut rows = Vec::new();
    let mut max_hill = 0.0f64;
    for r in results {
        let (mut part, hill) = r?;
        max_hill = max_hill.max(hill);
        rows.append(&mut part);
    }
    rows.sort_by_key(|r| (r.realization, r.placement, kind_rank(r.bc_kind)));
    let computed_rows = rows.len() - resumed_rows;
    if rows.len() != e.realizations * expected {
        return Err(CliError::Runtime(format!(
            "resumed table is not rectangular: {} rows, expected {}",
            rows.len(),
            e.realizations * expected
        )));
    }
    Ok((
        CoefficientTable {
            layout,
            bc_kinds: e.bc_kinds.clone(),
            state: e.state,
            realizations: e.realizations,
            rows,
            replaced: Vec::new(),
            max_hill_residual: max_hill,
        },
        resumed_rows,
        computed_rows,
        max_hill,
    ))
}

fn flatten(entries: &[[f64; 3]; 3]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[3 * r + c] = entries[r][c];
        }
    }
    out
}

fn complete_realization(
    e: &EnsembleConfig,
    layout: &sfrc_core::corr::WindowLayout,
    i: usize,
    existing: Option<&Vec<CoefficientRow>>,
) -> Result<(Vec<CoefficientRow>, f64), sfrc_core::Error> {
    let mut rows: Vec<CoefficientRow> = existing.cloned().unwrap_or_default();
    let have: std::collections::HashSet<(usize, BcKind)> =
        rows.iter().map(|r| (r.placement, r.bc_kind)).collect();
    let missing: Vec<(usize, BcKind)> = (0..layout.centers.len())
        .flat_map(|p| e.bc_kinds.iter().map(move |&k| (p, k)))
        .filter(|cell| !have.contains(cell))
        .collect();
    if missing.is_empty() {
        return Ok((rows, 0.0));
    }
    // A partially computed realization pins its seed through its
    // recorded rows; a fresh slot walks the replacement-seed sequence.
    let seeds: Vec<u64> = match rows.first() {
        Some(row) => vec![row.seed],
        None => (0..20)
            .map(|attempt| derive_seed(e.master_seed, (i + attempt * e.realizations) as u64))
            .collect(),
    };
    let mut last_err: Option<sfrc_core::Error> = None;
    for seed in seeds {
        let mut gen_cfg = e
            .scenario
            .generation_config(e.domain, e.target_volume_fraction, seed);
        gen_cfg.boundary = e.boundary;
        let attempt = (|| -> Result<(Vec<CoefficientRow>, f64), sfrc_core::Error> {
            let micro = generate_microstructure(&gen_cfg)?;
            let mut new_rows = Vec::new();
            let mut max_hill = 0.0f64;
            for &(p, kind) in &missing {
                let view = extract_window(&micro, layout.centers[p], e.window)?;
                let t = apparent_tensor(&view, kind, e.state, &e.matrix, &e.fiber, e.h)?;
                max_hill = max_hill.max(t.max_hill_residual);
                new_rows.push(CoefficientRow {
                    realization: i,
                    placement: p,
                    xi: layout.offset(p),
                    bc_kind: kind,
                    state: e.state,
                    window: e.window,
                    coeffs: flatten(&t.matrix.entries),
                    seed,
                });
            }
            Ok((new_rows, max_hill))
        })();
        match attempt {
            Ok((mut new_rows, hill)) => {
                rows.append(&mut new_rows);
                return Ok((rows, hill));
            }
            Err(err) => last_err = Some(err),
        }
    }
    Err(last_err.expect("at least one attempt"))
}
