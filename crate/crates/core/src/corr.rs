//! Moving-window ensemble orchestration and spatial correlation analysis
//! of apparent elasticity coefficients.
//!
//! A large parent microstructure is generated per realization; 33 square
//! windows (one centered, four per axial and diagonal direction at
//! quarter-window spacing) are extracted and homogenized under both
//! boundary-condition kinds. Dimensionless correlation coefficients are
//! then estimated across the realization ensemble between a coefficient
//! at the center window and a coefficient at a displaced window.

use crate::error::{Error, Result};
use crate::fem::BcKind;
use crate::homogenize::apparent_tensor;
use crate::material::{IsotropicMaterial, PlaneState};
use crate::microgen::{
    extract_window, generate_microstructure, BoundaryMode, GenerationConfig, PropertyMode,
};
use crate::stochastic::{correlation_coefficient, derive_seed};
use rayon::prelude::*;
use std::io::{Read, Write};

/// Row/column labels of the 9 coefficients in table order.
pub const COEFF_LABELS: [&str; 9] = ["11", "12", "16", "21", "22", "26", "61", "62", "66"];

/// Direction class of a window placement relative to the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionClass {
    Center,
    Axial,
    Diagonal,
}

/// The 33 moving-window placements of one domain/window pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowLayout {
    pub domain: u32,
    pub window: u32,
    /// Quarter-window step, rounded up to the 1 um grid.
    pub step: u32,
    pub centers: Vec<(u32, u32)>,
    pub classes: Vec<DirectionClass>,
}

impl WindowLayout {
    /// Offset of placement `p` from the center placement [um].
    pub fn offset(&self, p: usize) -> (i64, i64) {
        let c = self.centers[0];
        (
            self.centers[p].0 as i64 - c.0 as i64,
            self.centers[p].1 as i64 - c.1 as i64,
        )
    }

    /// Center distance |xi| of placement `p` [um].
    pub fn distance(&self, p: usize) -> f64 {
        let (dx, dy) = self.offset(p);
        ((dx * dx + dy * dy) as f64).sqrt()
    }

    /// Degenerate layout holding only the centered placement; unlike the
    /// 33-placement layout this admits windows up to the full domain.
    pub fn center_only(domain: u32, window: u32) -> Result<Self> {
        if window == 0 || !window.is_multiple_of(2) {
            return Err(Error::Geometry(format!(
                "window size {window} um must be positive and even"
            )));
        }
        if window > domain {
            return Err(Error::Geometry(format!(
                "window {window} um exceeds the {domain} um domain"
            )));
        }
        Ok(Self {
            domain,
            window,
            step: window.div_ceil(4),
            centers: vec![(domain / 2, domain / 2)],
            classes: vec![DirectionClass::Center],
        })
    }
}

/// Builds the 33-placement moving-window layout.
pub fn window_centers(domain: u32, window: u32) -> Result<WindowLayout> {
    if window == 0 || !window.is_multiple_of(2) {
        return Err(Error::Geometry(format!(
            "window size {window} um must be positive and even"
        )));
    }
    if 3 * window > domain {
        return Err(Error::Geometry(format!(
            "window {window} um exceeds a third of the {domain} um domain"
        )));
    }
    let step = window.div_ceil(4);
    let c = (domain / 2) as i64;
    let mut centers = vec![(c, c)];
    let mut classes = vec![DirectionClass::Center];
    for &(ex, ey) in &[(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
        for k in 1..=4i64 {
            centers.push((c + ex * k * step as i64, c + ey * k * step as i64));
            classes.push(DirectionClass::Axial);
        }
    }
    for &(ex, ey) in &[(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        for k in 1..=4i64 {
            centers.push((c + ex * k * step as i64, c + ey * k * step as i64));
            classes.push(DirectionClass::Diagonal);
        }
    }
    let half = (window / 2) as i64;
    for &(x, y) in &centers {
        if x - half < 0 || y - half < 0 || x + half > domain as i64 || y + half > domain as i64 {
            return Err(Error::Geometry(format!(
                "placement ({x}, {y}) leaves the {domain} um domain"
            )));
        }
    }
    Ok(WindowLayout {
        domain,
        window,
        step,
        centers: centers.iter().map(|&(x, y)| (x as u32, y as u32)).collect(),
        classes,
    })
}

/// Which fiber property varies across the microstructure ensemble; the
/// remaining properties are fixed at their mean values. The fiber volume
/// fraction always varies locally through window extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    LengthOnly,
    DiameterOnly,
    OrientationOnly,
    /// All properties fixed at the mean, fibers aligned: only the local
    /// volume fraction of the extracted window fluctuates.
    FractionOnly,
    AllVarying,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::LengthOnly => "length",
            Scenario::DiameterOnly => "diameter",
            Scenario::OrientationOnly => "orientation",
            Scenario::FractionOnly => "fraction",
            Scenario::AllVarying => "all",
        }
    }

    /// Generation recipe realizing this scenario on a square domain.
    pub fn generation_config(&self, domain: u32, target: f64, seed: u64) -> GenerationConfig {
        let base = GenerationConfig::all_sampled(domain, domain, target, seed);
        let fixed_l = PropertyMode::Fixed(crate::presets::MEAN_FIBER_LENGTH);
        let fixed_d = PropertyMode::Fixed(crate::presets::MEAN_FIBER_DIAMETER);
        let fixed_o = PropertyMode::Fixed(0.0);
        match self {
            Scenario::LengthOnly => GenerationConfig {
                diameter: fixed_d,
                orientation: fixed_o,
                ..base
            },
            Scenario::DiameterOnly => GenerationConfig {
                length: fixed_l,
                orientation: fixed_o,
                ..base
            },
            Scenario::OrientationOnly => GenerationConfig {
                length: fixed_l,
                diameter: fixed_d,
                ..base
            },
            Scenario::FractionOnly => GenerationConfig {
                length: fixed_l,
                diameter: fixed_d,
                orientation: fixed_o,
                ..base
            },
            Scenario::AllVarying => base,
        }
    }
}

/// Configuration of one moving-window ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Parent microstructure edge [um].
    pub domain: u32,
    /// Window edge [um].
    pub window: u32,
    pub realizations: usize,
    pub master_seed: u64,
    pub scenario: Scenario,
    pub state: PlaneState,
    /// Element size [um].
    pub h: f64,
    pub bc_kinds: Vec<BcKind>,
    /// False restricts the run to the center placement only.
    pub all_placements: bool,
    /// Edge treatment of protruding fibers in the parent structure.
    pub boundary: BoundaryMode,
    pub target_volume_fraction: f64,
    pub matrix: IsotropicMaterial,
    pub fiber: IsotropicMaterial,
}

impl EnsembleConfig {
    pub fn new(domain: u32, window: u32, realizations: usize, master_seed: u64) -> Self {
        Self {
            domain,
            window,
            realizations,
            master_seed,
            scenario: Scenario::AllVarying,
            state: PlaneState::PlaneStress,
            h: 10.0,
            bc_kinds: vec![BcKind::Displacement, BcKind::Traction],
            all_placements: true,
            boundary: BoundaryMode::Clipped,
            target_volume_fraction: crate::presets::VOLUME_FRACTION,
            matrix: crate::presets::pbt_matrix(),
            fiber: crate::presets::glass_fiber(),
        }
    }
}

/// One homogenization result of the ensemble table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub realization: usize,
    pub placement: usize,
    /// Offset from the center placement [um].
    pub xi: (i64, i64),
    pub bc_kind: BcKind,
    pub state: PlaneState,
    pub window: u32,
    /// Row-major: C11, C12, C16, C21, C22, C26, C61, C62, C66 [GPa].
    pub coeffs: [f64; 9],
    /// Seed of the generating realization.
    pub seed: u64,
}

/// Complete rectangular result table of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub layout: WindowLayout,
    pub bc_kinds: Vec<BcKind>,
    pub state: PlaneState,
    pub realizations: usize,
    pub rows: Vec<CoefficientRow>,
    /// Replaced realization slots: (index, abandoned seed, reason).
    pub replaced: Vec<(usize, u64, String)>,
    /// Largest Hill residual over every solve of the run.
    pub max_hill_residual: f64,
}

impl CoefficientTable {
    /// Coefficient `coeff` (0..9) at `placement` under `kind`, ordered by
    /// realization.
    pub fn sample(&self, coeff: usize, placement: usize, kind: BcKind) -> Vec<f64> {
        let mut v: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| r.placement == placement && r.bc_kind == kind)
            .map(|r| (r.realization, r.coeffs[coeff]))
            .collect();
        v.sort_by_key(|&(r, _)| r);
        v.into_iter().map(|(_, c)| c).collect()
    }
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

/// Runs the full ensemble: deterministic per-realization seeds, parallel
/// over realizations, failed realizations replaced by later derived
/// seeds so the table stays rectangular.
pub fn ensemble_run(cfg: &EnsembleConfig) -> Result<CoefficientTable> {
    let layout = if cfg.all_placements {
        window_centers(cfg.domain, cfg.window)?
    } else {
        WindowLayout::center_only(cfg.domain, cfg.window)?
    };
    let placements: Vec<usize> = (0..layout.centers.len()).collect();
    if cfg.realizations == 0 || cfg.bc_kinds.is_empty() {
        return Err(Error::Domain(
            "need at least one realization and bc kind".into(),
        ));
    }

    struct RealizationOut {
        rows: Vec<CoefficientRow>,
        replaced: Vec<(usize, u64, String)>,
        max_hill: f64,
    }

    let run_one = |i: usize| -> Result<RealizationOut> {
        let mut replaced = Vec::new();
        // Replacement seeds i + k R are unique per slot and attempt.
        for attempt in 0..20usize {
            let seed = derive_seed(cfg.master_seed, (i + attempt * cfg.realizations) as u64);
            let mut gen_cfg = cfg
                .scenario
                .generation_config(cfg.domain, cfg.target_volume_fraction, seed);
            gen_cfg.boundary = cfg.boundary;
            let result = (|| -> Result<RealizationOut> {
                let micro = generate_microstructure(&gen_cfg)?;
                let mut rows = Vec::new();
                let mut max_hill = 0.0f64;
                for &p in &placements {
                    let view = extract_window(&micro, layout.centers[p], cfg.window)?;
                    for &kind in &cfg.bc_kinds {
                        let t = apparent_tensor(
                            &view,
                            kind,
                            cfg.state,
                            &cfg.matrix,
                            &cfg.fiber,
                            cfg.h,
                        )?;
                        max_hill = max_hill.max(t.max_hill_residual);
                        rows.push(CoefficientRow {
                            realization: i,
                            placement: p,
                            xi: layout.offset(p),
                            bc_kind: kind,
                            state: cfg.state,
                            window: cfg.window,
                            coeffs: flatten(&t.matrix.entries),
                            seed,
                        });
                    }
                }
                Ok(RealizationOut {
                    rows,
                    replaced: Vec::new(),
                    max_hill,
                })
            })();
            match result {
                Ok(mut out) => {
                    out.replaced = replaced;
                    return Ok(out);
                }
                Err(e) => replaced.push((i, seed, e.to_string())),
            }
        }
        Err(Error::InsufficientData(format!(
            "realization {i}: all replacement seeds failed"
        )))
    };

    let outs: Vec<Result<RealizationOut>> =
        (0..cfg.realizations).into_par_iter().map(run_one).collect();
    let mut rows = Vec::new();
    let mut replaced = Vec::new();
    let mut max_hill = 0.0f64;
    for out in outs {
        let out = out?;
        rows.extend(out.rows);
        replaced.extend(out.replaced);
        max_hill = max_hill.max(out.max_hill);
    }
    Ok(CoefficientTable {
        layout,
        bc_kinds: cfg.bc_kinds.clone(),
        state: cfg.state,
        realizations: cfg.realizations,
        rows,
        replaced,
        max_hill_residual: max_hill,
    })
}

/// One point of a correlation curve; `rho` is None where the estimator
/// is undefined (zero variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub placement: usize,
    pub xi_um: f64,
    pub rho: Option<f64>,
    pub n_samples: usize,
}

/// Correlation of reference coefficient `a` at the center window with
/// moving coefficient `b` at each placement of one direction class.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    /// Indices into [`COEFF_LABELS`].
    pub reference: usize,
    pub moving: usize,
    pub bc_kind: BcKind,
    pub class: DirectionClass,
    pub points: Vec<CurvePoint>,
}

impl CorrelationCurve {
    pub fn pair_label(&self) -> String {
        format!(
            "rho_{}^{}",
            COEFF_LABELS[self.reference], COEFF_LABELS[self.moving]
        )
    }
}

/// Computes all 81 ordered coefficient pairs per bc kind and direction
/// class. The center placement is shared by both classes.
pub fn correlation_curves(table: &CoefficientTable) -> Result<Vec<CorrelationCurve>> {
    if table.realizations < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least two realizations".into(),
        ));
    }
    let mut curves = Vec::new();
    for &kind in &table.bc_kinds {
        // Reference and moving samples per (coeff, placement).
        let placements: Vec<usize> = {
            let mut p: Vec<usize> = table
                .rows
                .iter()
                .filter(|r| r.bc_kind == kind)
                .map(|r| r.placement)
                .collect();
            p.sort_unstable();
            p.dedup();
            p
        };
        for a in 0..9 {
            let reference = table.sample(a, 0, kind);
            for b in 0..9 {
                for class in [DirectionClass::Axial, DirectionClass::Diagonal] {
                    let mut points = Vec::new();
                    for &p in &placements {
                        let pc = table.layout.classes[p];
                        if pc != class && pc != DirectionClass::Center {
                            continue;
                        }
                        let moving = table.sample(b, p, kind);
                        if moving.len() != reference.len() {
                            return Err(Error::InsufficientData(format!(
                                "ragged table at placement {p}"
                            )));
                        }
                        let rho = correlation_coefficient(&reference, &moving).ok();
                        points.push(CurvePoint {
                            placement: p,
                            xi_um: table.layout.distance(p),
                            rho,
                            n_samples: moving.len(),
                        });
                    }
                    points.sort_by(|u, v| {
                        u.xi_um
                            .partial_cmp(&v.xi_um)
                            .unwrap()
                            .then(u.placement.cmp(&v.placement))
                    });
                    curves.push(CorrelationCurve {
                        reference: a,
                        moving: b,
                        bc_kind: kind,
                        class,
                        points,
                    });
                }
            }
        }
    }
    Ok(curves)
}

/// Reduction of the 81 ordered pairs to the independent groups, with the
/// symmetry deviations that justify it.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// The six transversely-isotropic-group pairs (11,12), (11,22),
    /// (11,66), (12,22), (12,66), (22,66) plus the (16,26) anisotropy
    /// group and the retained diagonals.
    pub independent: Vec<CorrelationCurve>,
    /// Max pointwise |rho_a^b - rho_b^a| over all pairs.
    pub max_exchange_deviation: f64,
    /// Max pointwise deviation across tensor-symmetry partner pairs,
    /// e.g. rho_16^16 vs rho_16^61.
    pub max_partner_deviation: f64,
}

fn curve_key(c: &CorrelationCurve) -> (usize, usize, BcKind, DirectionClass) {
    (c.reference, c.moving, c.bc_kind, c.class)
}

fn max_pointwise_dev(a: &CorrelationCurve, b: &CorrelationCurve) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .filter_map(|(u, v)| Some((u.rho? - v.rho?).abs()))
        .fold(0.0, f64::max)
}

/// Verifies the estimator's exchange symmetry and the tensor-symmetry
/// partner equivalences, then emits the independent curve groups.
pub fn independent_pair_reduction(curves: &[CorrelationCurve]) -> ReductionReport {
    use std::collections::HashMap;
    let by_key: HashMap<_, &CorrelationCurve> =
        curves.iter().map(|c| (curve_key(c), c)).collect();
    let mut max_exchange = 0.0f64;
    let mut max_partner = 0.0f64;
    for c in curves {
        if let Some(swapped) = by_key.get(&(c.moving, c.reference, c.bc_kind, c.class)) {
            max_exchange = max_exchange.max(max_pointwise_dev(c, swapped));
        }
    }
    // Tensor symmetry partners: 12<->21, 16<->61, 26<->62 (label indices
    // 1<->3, 2<->6, 5<->7); replacing the moving coefficient by its
    // partner must not change the curve.
    let partner = [0usize, 3, 6, 1, 4, 7, 2, 5, 8];
    for c in curves {
        let p = partner[c.moving];
        if p != c.moving {
            if let Some(partner_curve) = by_key.get(&(c.reference, p, c.bc_kind, c.class)) {
                max_partner = max_partner.max(max_pointwise_dev(c, partner_curve));
            }
        }
    }
    let label_index = |l: &str| COEFF_LABELS.iter().position(|&x| x == l).unwrap();
    let mut wanted: Vec<(usize, usize)> = [
        ("11", "12"),
        ("11", "22"),
        ("11", "66"),
        ("12", "22"),
        ("12", "66"),
        ("22", "66"),
        ("16", "26"),
    ]
    .iter()
    .map(|&(a, b)| (label_index(a), label_index(b)))
    .collect();
    // Diagonals are retained unreduced.
    for l in ["11", "12", "16", "22", "26", "66"] {
        wanted.push((label_index(l), label_index(l)));
    }
    let independent = curves
        .iter()
        .filter(|c| wanted.contains(&(c.reference, c.moving)))
        .cloned()
        .collect();
    ReductionReport {
        independent,
        max_exchange_deviation: max_exchange,
        max_partner_deviation: max_partner,
    }
}

fn kind_str(k: BcKind) -> &'static str {
    match k {
        BcKind::Displacement => "kubc",
        BcKind::Traction => "subc",
    }
}

fn kind_parse(s: &str) -> Result<BcKind> {
    match s {
        "kubc" => Ok(BcKind::Displacement),
        "subc" => Ok(BcKind::Traction),
        other => Err(Error::Format(format!("unknown bc kind {other}"))),
    }
}

fn state_parse(s: &str) -> Result<PlaneState> {
    match s {
        "plane-stress" => Ok(PlaneState::PlaneStress),
        "plane-strain" => Ok(PlaneState::PlaneStrain),
        other => Err(Error::Format(format!("unknown state {other}"))),
    }
}

pub const TABLE_HEADER: &str = "realization,placement_index,xi_x,xi_y,bc_kind,state,window_um,\
C11,C12,C16,C21,C22,C26,C61,C62,C66,seed";

/// Writes the coefficient table as CSV (coefficients in GPa).
pub fn write_table_csv<W: Write>(table: &CoefficientTable, mut w: W) -> Result<()> {
    writeln!(w, "{TABLE_HEADER}")?;
    for r in &table.rows {
        write!(
            w,
            "{},{},{},{},{},{},{}",
            r.realization,
            r.placement,
            r.xi.0,
            r.xi.1,
            kind_str(r.bc_kind),
            r.state,
            r.window
        )?;
        for c in r.coeffs {
            write!(w, ",{c}")?;
        }
        writeln!(w, ",{}", r.seed)?;
    }
    Ok(())
}

/// Reads rows back from a table CSV (used for resuming runs).
pub fn read_table_rows<R: Read>(mut r: R) -> Result<Vec<CoefficientRow>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TABLE_HEADER => {}
        _ => return Err(Error::Format("bad coefficient table header".into())),
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 17 {
            return Err(Error::Format(format!("row {}: wrong column count", ln + 2)));
        }
        let bad = |what: &str| Error::Format(format!("row {}: bad {what}", ln + 2));
        let mut coeffs = [0.0; 9];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = f[7 + i].parse().map_err(|_| bad("coefficient"))?;
        }
        rows.push(CoefficientRow {
            realization: f[0].parse().map_err(|_| bad("realization"))?,
            placement: f[1].parse().map_err(|_| bad("placement"))?,
            xi: (
                f[2].parse().map_err(|_| bad("xi_x"))?,
                f[3].parse().map_err(|_| bad("xi_y"))?,
            ),
            bc_kind: kind_parse(f[4])?,
            state: state_parse(f[5])?,
            window: f[6].parse().map_err(|_| bad("window"))?,
            coeffs,
            seed: f[16].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

/// Writes the curve set as CSV.
pub fn write_curves_csv<W: Write>(curves: &[CorrelationCurve], mut w: W) -> Result<()> {
    writeln!(w, "pair,direction_class,bc_kind,xi_um,rho,n_samples")?;
    for c in curves {
        let class = match c.class {
            DirectionClass::Center => "center",
            DirectionClass::Axial => "axial",
            DirectionClass::Diagonal => "diagonal",
        };
        for p in &c.points {
            let rho = p
                .rho
                .map(|v| v.to_string())
                .unwrap_or_else(|| "undefined".into());
            writeln!(
                w,
                "{},{class},{},{},{rho},{}",
                c.pair_label(),
                kind_str(c.bc_kind),
                p.xi_um,
                p.n_samples
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::rng_from_seed;
    use rand::Rng;

    #[test]
    fn layout_500_on_2500() {
        let l = window_centers(2500, 500).unwrap();
        assert_eq!(l.centers.len(), 33);
        assert_eq!(l.step, 125);
        let mut axial_x: Vec<i64> = (1..=4)
            .map(|k| l.offset(k).0)
            .collect();
        axial_x.sort_unstable();
        assert_eq!(axial_x, vec![125, 250, 375, 500]);
        // Outermost axial window disjoint from the center window.
        assert!(l.offset(4).0 >= l.window as i64);
        assert_eq!(l.classes.iter().filter(|&&c| c == DirectionClass::Axial).count(), 16);
        assert_eq!(
            l.classes.iter().filter(|&&c| c == DirectionClass::Diagonal).count(),
            16
        );
    }

    #[test]
    fn layout_750_fits_and_900_fails() {
        let l = window_centers(2500, 750).unwrap();
        assert_eq!(l.centers.len(), 33);
        assert_eq!(l.step, 188);
        assert!(window_centers(2500, 900).is_err());
        assert!(window_centers(2500, 251).is_err());
    }

    /// Synthetic table with a known joint structure: every coefficient at
    /// every placement is built from one shared factor plus noise whose
    /// blend depends on the placement, so correlations are predictable.
    fn synthetic_table(realizations: usize, seed: u64) -> CoefficientTable {
        let layout = window_centers(2400, 400).unwrap();
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::new();
        for i in 0..realizations {
            let shared: f64 = rng.gen_range(-1.0..1.0);
            for p in 0..layout.centers.len() {
                let noise: f64 = rng.gen_range(-1.0..1.0);
                let w = layout.distance(p) / 600.0;
                let value = (1.0 - w) * shared + w * noise;
                // All nine coefficients share the same field; one is an
                // affine copy, one is constant (degenerate).
                let mut coeffs = [0.0; 9];
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c = match j {
                        2 => 7.0,
                        4 => 3.0 - 2.0 * value,
                        _ => value,
                    };
                }
                rows.push(CoefficientRow {
                    realization: i,
                    placement: p,
                    xi: layout.offset(p),
                    bc_kind: BcKind::Displacement,
                    state: PlaneState::PlaneStress,
                    window: 400,
                    coeffs,
                    seed,
                });
            }
        }
        CoefficientTable {
            layout,
            bc_kinds: vec![BcKind::Displacement],
            state: PlaneState::PlaneStress,
            realizations,
            rows,
            replaced: Vec::new(),
            max_hill_residual: 0.0,
        }
    }

    #[test]
    fn self_correlation_at_center_is_one() {
        let table = synthetic_table(40, 5);
        let curves = correlation_curves(&table).unwrap();
        for c in &curves {
            if c.reference == c.moving && c.reference != 2 {
                let p0 = &c.points[0];
                assert_eq!(p0.xi_um, 0.0);
                assert_eq!(p0.rho, Some(1.0));
            }
            for p in &c.points {
                if let Some(r) = p.rho {
                    assert!((-1.0..=1.0).contains(&r), "rho {r}");
                }
            }
        }
    }

    #[test]
    fn affine_copy_has_unit_magnitude_correlation() {
        // Coefficient 4 = 3 - 2 * coefficient 0, so their correlation is
        // exactly -1 at every placement where variance is nonzero.
        let table = synthetic_table(40, 7);
        let curves = correlation_curves(&table).unwrap();
        let c = curves
            .iter()
            .find(|c| c.reference == 0 && c.moving == 4 && c.class == DirectionClass::Axial)
            .unwrap();
        let auto = curves
            .iter()
            .find(|c| c.reference == 0 && c.moving == 0 && c.class == DirectionClass::Axial)
            .unwrap();
        for (p, q) in c.points.iter().zip(&auto.points) {
            let (r, a) = (p.rho.unwrap(), q.rho.unwrap());
            assert!((r + a).abs() < 1e-12, "affine {r} vs auto {a}");
        }
    }

    #[test]
    fn zero_variance_coefficient_is_undefined() {
        let table = synthetic_table(40, 9);
        let curves = correlation_curves(&table).unwrap();
        let c = curves
            .iter()
            .find(|c| c.reference == 2 && c.moving == 2 && c.class == DirectionClass::Axial)
            .unwrap();
        assert!(c.points.iter().all(|p| p.rho.is_none()));
    }

    #[test]
    fn exchange_symmetry_exact_at_center() {
        let table = synthetic_table(60, 11);
        let curves = correlation_curves(&table).unwrap();
        let get = |a: usize, b: usize| {
            curves
                .iter()
                .find(|c| c.reference == a && c.moving == b && c.class == DirectionClass::Axial)
                .unwrap()
        };
        let ab = get(0, 4).points[0].rho.unwrap();
        let ba = get(4, 0).points[0].rho.unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn reduction_on_synthetic_table() {
        let table = synthetic_table(60, 13);
        let curves = correlation_curves(&table).unwrap();
        let report = independent_pair_reduction(&curves);
        // All non-degenerate coefficients are identical fields, so the
        // partner/exchange deviations vanish exactly.
        assert!(report.max_exchange_deviation < 1e-12);
        assert!(report.max_partner_deviation < 1e-12);
        assert!(!report.independent.is_empty());
        // 13 retained (reference, moving) pairs x 1 bc kind x 2 classes.
        assert_eq!(report.independent.len(), 26);
    }

    #[test]
    fn ensemble_run_small_and_deterministic() {
        let mut cfg = EnsembleConfig::new(450, 140, 2, 99);
        cfg.h = 10.0;
        cfg.target_volume_fraction = 0.15;
        let a = ensemble_run(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2 * 33 * 2);
        assert!(a.max_hill_residual <= 1e-8, "hill {}", a.max_hill_residual);
        // Completeness: every (realization, placement, kind) present once.
        for i in 0..2 {
            for p in 0..33 {
                for kind in [BcKind::Displacement, BcKind::Traction] {
                    assert_eq!(
                        a.rows
                            .iter()
                            .filter(|r| r.realization == i
                                && r.placement == p
                                && r.bc_kind == kind)
                            .count(),
                        1
                    );
                }
            }
        }
        let b = ensemble_run(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn table_csv_round_trip() {
        let table = synthetic_table(3, 17);
        let mut buf = Vec::new();
        write_table_csv(&table, &mut buf).unwrap();
        let rows = read_table_rows(buf.as_slice()).unwrap();
        assert_eq!(rows, table.rows);
        assert!(read_table_rows(b"nope".as_slice()).is_err());
    }

    #[test]
    fn curves_csv_export() {
        let table = synthetic_table(10, 19);
        let curves = correlation_curves(&table).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&curves[..4], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pair,direction_class,bc_kind,xi_um,rho,n_samples"));
        assert!(text.contains("rho_11^11"));
    }
}
