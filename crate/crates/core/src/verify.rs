//! Acceptance verification suite: numbered end-to-end criteria covering
//! the analytical models, the solver oracles, and the Monte Carlo
//! ensemble claims, evaluated into a machine-checkable report.
//!
//! The full suite is expensive (tens of minutes on one core) because the
//! ensemble criteria run hundreds of finite-element homogenizations; the
//! quick subset restricts itself to the sub-second analytical and oracle
//! criteria plus the determinism check.

use crate::corr::{
    correlation_curves, ensemble_run, independent_pair_reduction, write_table_csv,
    CoefficientTable, CorrelationCurve, DirectionClass, EnsembleConfig, Scenario, COEFF_LABELS,
};
use crate::error::{Error, Result};
use crate::fem::BcKind;
use crate::homogenize::apparent_tensor;
use crate::material::{
    halpin_tsai_constants, plane_stress_matrix, tandon_weng_constants, IsotropicMaterial,
    PlaneState,
};
use crate::microgen::{GridView, PhaseGrid};
use crate::presets;
use crate::stochastic::{
    derive_seed, fit_distribution, rng_from_seed, sample_fiber_length, PreferredFamily,
    SampleStats,
};
use crate::sweeps::{run_sweep, write_sweep_csv, Model, SweepMode, SweepSpec, Varied};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::time::Instant;

/// Master seed of the published acceptance runs.
pub const DEFAULT_SEED: u64 = 1822;

/// One elementary check of a criterion.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub label: String,
    pub passed: bool,
    /// True marks a failure as a documented inconsistency in the
    /// reference data rather than a defect of this implementation.
    pub known_issue: bool,
}

/// One numbered acceptance criterion with its elementary checks.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Passed, or failed only on documented reference-data issues.
    pub fn acceptable(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.known_issue)
    }

    pub fn status(&self) -> &'static str {
        if self.passed() {
            "PASS"
        } else if self.acceptable() {
            "FAIL (known reference-data inconsistency)"
        } else {
            "FAIL"
        }
    }
}

/// Report over all executed criteria.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    pub master_seed: u64,
    pub quick: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed())
    }

    pub fn acceptable(&self) -> bool {
        self.criteria.iter().all(|c| c.acceptable())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let scope = if self.quick { "quick subset" } else { "full suite" };
        let _ = writeln!(
            out,
            "acceptance {} (master seed {})",
            scope, self.master_seed
        );
        for c in &self.criteria {
            let _ = writeln!(
                out,
                "criterion {:2} {:<45} {} ({:.1} s)",
                c.id,
                c.name,
                c.status(),
                c.seconds
            );
            for check in &c.checks {
                if !check.passed {
                    let tag = if check.known_issue { "known" } else { "failed" };
                    let _ = writeln!(out, "    [{tag}] {}", check.label);
                }
            }
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.passed() {
                "all criteria passed"
            } else if self.acceptable() {
                "passed up to documented reference-data inconsistencies"
            } else {
                "FAILED"
            }
        );
        out
    }
}

#[derive(Default)]
struct Checks {
    list: Vec<CheckOutcome>,
}

impl Checks {
    fn check(&mut self, passed: bool, label: String) {
        self.list.push(CheckOutcome {
            label,
            passed,
            known_issue: false,
        });
    }

    fn known(&mut self, passed: bool, label: String) {
        self.list.push(CheckOutcome {
            label,
            passed,
            known_issue: true,
        });
    }

    fn finish(
        self,
        id: usize,
        name: &'static str,
        started: Instant,
        limit: Option<f64>,
    ) -> CriterionResult {
        let seconds = started.elapsed().as_secs_f64();
        let mut checks = self.list;
        if let Some(limit) = limit {
            checks.push(CheckOutcome {
                label: format!("runtime {seconds:.1} s within the {limit:.0} s target"),
                passed: seconds <= limit,
                known_issue: false,
            });
        }
        CriterionResult {
            id,
            name,
            checks,
            seconds,
        }
    }
}

fn approx(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn rel_err(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn inverse3(c: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
        - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
    if det.abs() < 1e-14 {
        return Err(Error::Singular("3x3 inverse of singular matrix".into()));
    }
    let adj = |r1: usize, r2: usize, c1: usize, c2: usize| {
        c[r1][c1] * c[r2][c2] - c[r1][c2] * c[r2][c1]
    };
    Ok([
        [
            adj(1, 2, 1, 2) / det,
            -adj(0, 2, 1, 2) / det,
            adj(0, 1, 1, 2) / det,
        ],
        [
            -adj(1, 2, 0, 2) / det,
            adj(0, 2, 0, 2) / det,
            -adj(0, 1, 0, 2) / det,
        ],
        [
            adj(1, 2, 0, 1) / det,
            -adj(0, 2, 0, 1) / det,
            adj(0, 1, 0, 1) / det,
        ],
    ])
}

/// Criterion 1: both analytical models reproduce the tabulated
/// engineering constants of the glass/PBT compound.
fn criterion_1() -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let m = presets::pbt_matrix();
    let f = presets::glass_fiber();
    let aspect = presets::MEAN_FIBER_LENGTH / presets::MEAN_FIBER_DIAMETER;
    let tw = tandon_weng_constants(&m, &f, aspect, presets::VOLUME_FRACTION)?;
    let ht = halpin_tsai_constants(&m, &f, aspect, presets::VOLUME_FRACTION)?;
    for (label, value, target, tol) in [
        ("Tandon-Weng E1", tw.e1, 12.4, 0.05),
        ("Tandon-Weng E2", tw.e2, 3.99, 0.05),
        ("Tandon-Weng G12", tw.g12, 1.31, 0.05),
        ("Tandon-Weng G23", tw.g23, 1.26, 0.05),
        ("Tandon-Weng nu12", tw.nu12, 0.379, 0.005),
        ("Halpin-Tsai E1", ht.e1, 11.2, 0.05),
        ("Halpin-Tsai E2", ht.e2, 4.12, 0.05),
        ("Halpin-Tsai G12", ht.g12, 1.30, 0.05),
        ("Halpin-Tsai G23", ht.g23, 1.25, 0.05),
        ("Halpin-Tsai nu12", ht.nu12, 0.375, 0.005),
    ] {
        checks.check(
            approx(value, target, tol),
            format!("{label} = {value:.4} vs reference {target} +/- {tol}"),
        );
    }
    Ok(checks.finish(1, "analytical engineering constants", started, Some(1.0)))
}

/// Criterion 2: plane-stress stiffness coefficients of both models
/// against their tabulated references.
fn criterion_2() -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let m = presets::pbt_matrix();
    let f = presets::glass_fiber();
    let aspect = presets::MEAN_FIBER_LENGTH / presets::MEAN_FIBER_DIAMETER;
    let tw = plane_stress_matrix(&tandon_weng_constants(
        &m,
        &f,
        aspect,
        presets::VOLUME_FRACTION,
    )?)?;
    let ht = plane_stress_matrix(&halpin_tsai_constants(
        &m,
        &f,
        aspect,
        presets::VOLUME_FRACTION,
    )?)?;
    for (label, value, target) in [
        ("Tandon-Weng C11", tw.get(0, 0), 13.0),
        ("Tandon-Weng C12", tw.get(0, 1), 1.59),
        ("Tandon-Weng C22", tw.get(1, 1), 4.18),
        ("Tandon-Weng C66", tw.get(2, 2), 1.31),
        ("Halpin-Tsai C12", ht.get(0, 1), 1.63),
        ("Halpin-Tsai C22", ht.get(1, 1), 4.34),
        ("Halpin-Tsai C66", ht.get(2, 2), 1.30),
    ] {
        checks.check(
            approx(value, target, 0.05),
            format!("{label} = {value:.4} GPa vs reference {target} +/- 0.05"),
        );
    }
    // The tabulated Halpin-Tsai C11 of 12.0 GPa cannot follow from the
    // model's own constants: every (E1, E2, nu12) combination inside the
    // criterion-1 tolerances gives C11 < 11.9 GPa. The computed value is
    // the one consistent with criterion 1; the reference row is
    // internally inconsistent.
    let c11 = ht.get(0, 0);
    checks.known(
        approx(c11, 12.0, 0.05),
        format!(
            "Halpin-Tsai C11 = {c11:.4} GPa vs reference 12.0 +/- 0.05 \
             (reference inconsistent with its own constants E1 = 11.2, \
             E2 = 4.12, nu12 = 0.375, which imply C11 = 11.8)"
        ),
    );
    Ok(checks.finish(2, "analytical plane-stress coefficients", started, Some(1.0)))
}

/// Criterion 3: the sampled fiber-length mean matches the distribution
/// mean of 260 um.
fn criterion_3(master_seed: u64) -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let params = presets::fiber_length_distribution();
    let mut rng = rng_from_seed(derive_seed(master_seed, 3_000));
    let n = 1_000_000;
    let mean = (0..n)
        .map(|_| sample_fiber_length(&mut rng, &params))
        .sum::<f64>()
        / n as f64;
    checks.check(
        approx(mean, 260.0, 2.0),
        format!("sampled fiber-length mean {mean:.2} um vs 260 +/- 2 um at n = 10^6"),
    );
    Ok(checks.finish(3, "fiber-length sampling mean", started, Some(10.0)))
}

/// Criterion 4: a homogeneous all-matrix window reproduces the isotropic
/// plane-stress matrix under both boundary-condition kinds.
fn criterion_4() -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let m = presets::pbt_matrix();
    let f = presets::glass_fiber();
    let grid = PhaseGrid::new(120, 120);
    let view = GridView::new(&grid, 0, 0, 120)?;
    let expect = m.elasticity_matrix(PlaneState::PlaneStress);
    for kind in [BcKind::Displacement, BcKind::Traction] {
        let t = apparent_tensor(&view, kind, PlaneState::PlaneStress, &m, &f, 10.0)?;
        let scale = expect.get(0, 0);
        let mut max_rel = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                max_rel = max_rel.max((t.matrix.get(r, c) - expect.get(r, c)).abs() / scale);
            }
        }
        checks.check(
            max_rel < 1e-8,
            format!("{kind}: max relative deviation {max_rel:.2e} < 1e-8"),
        );
    }
    Ok(checks.finish(4, "homogeneous-window oracle", started, Some(5.0)))
}

/// Criterion 5: a two-strip bimaterial window reproduces the Voigt and
/// Reuss closed forms. With zero Poisson ratios the exact fields are
/// piecewise uniform and representable by the elements, so the match is
/// tight.
fn criterion_5() -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let size = 120u32;
    let mut cells = vec![0u8; (size * size) as usize];
    for y in 0..size {
        for x in size / 2..size {
            cells[(y * size + x) as usize] = 1;
        }
    }
    let grid = PhaseGrid::from_raw(size, size, cells)?;
    let view = GridView::new(&grid, 0, 0, size)?;
    let (ea, eb) = (2.6, 70.0);
    let soft = IsotropicMaterial::new(ea, 0.0, 1300.0)?;
    let stiff = IsotropicMaterial::new(eb, 0.0, 2500.0)?;
    // Loading along the strips (uniform strain): Voigt mean stiffness.
    let kubc = apparent_tensor(
        &view,
        BcKind::Displacement,
        PlaneState::PlaneStress,
        &soft,
        &stiff,
        10.0,
    )?;
    let voigt = 0.5 * (ea + eb);
    let c22 = kubc.matrix.get(1, 1);
    checks.check(
        rel_err(c22, voigt) < 1e-6,
        format!("kubc C22 = {c22:.6} GPa vs Voigt mean {voigt:.6}"),
    );
    // Loading across the strips (uniform stress): Reuss mean compliance.
    let subc = apparent_tensor(
        &view,
        BcKind::Traction,
        PlaneState::PlaneStress,
        &soft,
        &stiff,
        10.0,
    )?;
    let s = inverse3(&subc.matrix.entries)?;
    let reuss = 0.5 * (1.0 / ea + 1.0 / eb);
    checks.check(
        rel_err(s[0][0], reuss) < 1e-6,
        format!(
            "subc S11 = {:.8} 1/GPa vs Reuss mean compliance {reuss:.8}",
            s[0][0]
        ),
    );
    Ok(checks.finish(5, "two-strip Voigt/Reuss oracle", started, None))
}

/// Shared center-window ensemble data for the statistical criteria.
struct CenterEnsembles {
    aligned_250: CoefficientTable,
    varying: Vec<(u32, CoefficientTable)>,
}

fn center_config(
    domain: u32,
    window: u32,
    scenario: Scenario,
    master_seed: u64,
) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(domain, window, 100, master_seed);
    cfg.scenario = scenario;
    cfg.all_placements = false;
    cfg
}

fn mean_coeff(table: &CoefficientTable, coeff: usize, kind: BcKind) -> f64 {
    mean_of(&table.sample(coeff, 0, kind))
}

/// Criterion 6: ensemble means of aligned-fiber 250 um windows against
/// the tabulated coefficient grid, within 10%.
fn criterion_6(table: &CoefficientTable, started: Instant) -> CriterionResult {
    let mut checks = Checks::default();
    let targets = [
        (BcKind::Displacement, [11.7, 1.56, 1.49, 4.36, 1.35]),
        (BcKind::Traction, [6.42, 1.49, 1.58, 3.91, 1.16]),
    ];
    // Tabulated order: C11, C12, C21, C22, C66.
    let coeff_idx = [0usize, 1, 3, 4, 8];
    let labels = ["C11", "C12", "C21", "C22", "C66"];
    for (kind, refs) in targets {
        for ((&coeff, label), target) in coeff_idx.iter().zip(labels).zip(refs) {
            let mean = mean_coeff(table, coeff, kind);
            checks.check(
                rel_err(mean, target) <= 0.10,
                format!(
                    "{kind} mean {label} = {mean:.3} GPa vs {target} +/- 10% \
                     (deviation {:.1}%)",
                    100.0 * rel_err(mean, target)
                ),
            );
        }
    }
    checks.finish(6, "aligned-fiber coefficient grid", started, Some(900.0))
}

/// Criterion 7: ensemble-mean diagonal coefficients are bounded,
/// traction-side below displacement-side, at every window size.
fn criterion_7(ensembles: &CenterEnsembles) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    let mut tables: Vec<(String, &CoefficientTable)> = vec![(
        "250 um aligned".into(),
        &ensembles.aligned_250,
    )];
    for (w, t) in &ensembles.varying {
        tables.push((format!("{w} um varying"), t));
    }
    for (label, table) in tables {
        for (coeff, cname) in [(0usize, "C11"), (4, "C22"), (8, "C66")] {
            let up = mean_coeff(table, coeff, BcKind::Displacement);
            let low = mean_coeff(table, coeff, BcKind::Traction);
            checks.check(
                low <= up,
                format!("{label}: mean {cname} subc {low:.3} <= kubc {up:.3} GPa"),
            );
        }
    }
    checks.finish(7, "bound ordering of ensemble means", started, None)
}

/// Criterion 8: mean C11 under displacement control decreases and under
/// traction control increases with the window size, strictly.
fn criterion_8(ensembles: &CenterEnsembles) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    let series: Vec<(u32, f64, f64)> = ensembles
        .varying
        .iter()
        .map(|(w, t)| {
            (
                *w,
                mean_coeff(t, 0, BcKind::Displacement),
                mean_coeff(t, 0, BcKind::Traction),
            )
        })
        .collect();
    for pair in series.windows(2) {
        let (w0, k0, s0) = pair[0];
        let (w1, k1, s1) = pair[1];
        checks.check(
            k1 < k0,
            format!("kubc mean C11 strictly decreasing {w0}->{w1} um: {k0:.3} -> {k1:.3}"),
        );
        checks.check(
            s1 > s0,
            format!("subc mean C11 strictly increasing {w0}->{w1} um: {s0:.3} -> {s1:.3}"),
        );
    }
    checks.finish(8, "window-size convergence trend", started, None)
}

/// Criterion 9: the energy-consistency residual stays below 1e-8 on
/// every solve of the criterion-6 run.
fn criterion_9(table: &CoefficientTable) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    checks.check(
        table.max_hill_residual <= 1e-8,
        format!(
            "max energy-consistency residual {:.2e} <= 1e-8",
            table.max_hill_residual
        ),
    );
    checks.finish(9, "energy-consistency residual", started, None)
}

/// Criterion 10: the ensemble-mean coupling terms C16/C26 vanish and
/// their scatter shrinks with the window size.
fn criterion_10(ensembles: &CenterEnsembles) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    for (w, table) in &ensembles.varying {
        for kind in [BcKind::Displacement, BcKind::Traction] {
            for (coeff, cname) in [(2usize, "C16"), (5, "C26")] {
                let mean = mean_coeff(table, coeff, kind);
                checks.check(
                    mean.abs() < 0.1,
                    format!("{w} um {kind}: |mean {cname}| = {:.4} GPa < 0.1", mean.abs()),
                );
            }
        }
    }
    let std_at = |w: u32, kind: BcKind| -> f64 {
        let table = &ensembles
            .varying
            .iter()
            .find(|(ww, _)| *ww == w)
            .expect("window present")
            .1;
        SampleStats::compute(&table.sample(2, 0, kind))
            .expect("nonempty sample")
            .std
    };
    for kind in [BcKind::Displacement, BcKind::Traction] {
        let (s250, s750) = (std_at(250, kind), std_at(750, kind));
        checks.check(
            s750 < s250,
            format!("{kind}: std C16 at 750 um {s750:.4} < at 250 um {s250:.4}"),
        );
    }
    checks.finish(10, "coupling-term decay", started, None)
}

fn curve_map(
    curves: &[CorrelationCurve],
) -> std::collections::HashMap<(usize, usize, BcKind, DirectionClass), &CorrelationCurve> {
    curves
        .iter()
        .map(|c| ((c.reference, c.moving, c.bc_kind, c.class), c))
        .collect()
}

/// True when the window at `placement` does not overlap the center one.
fn is_disjoint(table: &CoefficientTable, placement: usize) -> bool {
    let (dx, dy) = table.layout.offset(placement);
    dx.unsigned_abs() >= table.layout.window as u64
        || dy.unsigned_abs() >= table.layout.window as u64
}

/// Criterion 11: correlation estimator sanity — exact unit
/// autocorrelation at zero displacement, vanishing correlation between
/// disjoint windows, and exchange symmetry of the coupling-pair curves.
fn criterion_11(table: &CoefficientTable, curves: &[CorrelationCurve]) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    let by_key = curve_map(curves);
    let mut exact = 0usize;
    let mut total = 0usize;
    for kind in [BcKind::Displacement, BcKind::Traction] {
        for a in 0..9 {
            let curve = by_key[&(a, a, kind, DirectionClass::Axial)];
            let center = curve
                .points
                .iter()
                .find(|p| p.placement == 0)
                .expect("center point present");
            total += 1;
            if center.rho == Some(1.0) {
                exact += 1;
            }
        }
    }
    checks.check(
        exact == total,
        format!("{exact}/{total} zero-displacement autocorrelations exactly 1"),
    );

    // Vanishing correlation between non-overlapping windows, judged on
    // the independent pair groups, averaged over the disjoint placements
    // to suppress single-estimate noise at R = 100.
    let reduction = independent_pair_reduction(curves);
    let mut worst: (f64, String) = (0.0, String::new());
    let mut grouped: std::collections::HashMap<(usize, usize, BcKind), Vec<f64>> =
        std::collections::HashMap::new();
    for curve in &reduction.independent {
        let entry = grouped
            .entry((curve.reference, curve.moving, curve.bc_kind))
            .or_default();
        for p in &curve.points {
            if is_disjoint(table, p.placement) {
                if let Some(rho) = p.rho {
                    entry.push(rho);
                }
            }
        }
    }
    let mut violations = 0usize;
    for ((a, b, kind), rhos) in &grouped {
        let avg = mean_of(rhos);
        if avg.abs() >= 0.2 {
            violations += 1;
        }
        if avg.abs() > worst.0 {
            worst = (
                avg.abs(),
                format!(
                    "rho_{}^{} {kind} ({} placements)",
                    COEFF_LABELS[*a],
                    COEFF_LABELS[*b],
                    rhos.len()
                ),
            );
        }
    }
    checks.check(
        violations == 0,
        format!(
            "disjoint-window mean |rho| < 0.2 for all {} independent pair groups \
             (worst {:.3} at {})",
            grouped.len(),
            worst.0,
            worst.1
        ),
    );

    // Exchange symmetry of the coupling pair.
    let (i16, i26) = (2usize, 5);
    let mut max_diff = 0.0f64;
    for kind in [BcKind::Displacement, BcKind::Traction] {
        for class in [DirectionClass::Axial, DirectionClass::Diagonal] {
            let fwd = by_key[&(i16, i26, kind, class)];
            let back = by_key[&(i26, i16, kind, class)];
            for (p, q) in fwd.points.iter().zip(&back.points) {
                if let (Some(r1), Some(r2)) = (p.rho, q.rho) {
                    max_diff = max_diff.max((r1 - r2).abs());
                }
            }
        }
    }
    checks.check(
        max_diff < 0.15,
        format!("rho_16^26 vs rho_26^16 max pointwise difference {max_diff:.3} < 0.15"),
    );
    checks.finish(11, "correlation estimator sanity", started, None)
}

/// Criterion 12: the coupling coefficient is uncorrelated with the
/// in-group coefficients at every placement.
fn criterion_12(curves: &[CorrelationCurve]) -> CriterionResult {
    let started = Instant::now();
    let mut checks = Checks::default();
    let by_key = curve_map(curves);
    for kind in [BcKind::Displacement, BcKind::Traction] {
        let mut max_abs = 0.0f64;
        let mut points = 0usize;
        for class in [DirectionClass::Axial, DirectionClass::Diagonal] {
            let curve = by_key[&(2usize, 0, kind, class)];
            for p in &curve.points {
                if let Some(rho) = p.rho {
                    points += 1;
                    max_abs = max_abs.max(rho.abs());
                }
            }
        }
        checks.check(
            max_abs < 0.2,
            format!("{kind}: max |rho_16^11| over {points} placements = {max_abs:.3} < 0.2"),
        );
    }
    checks.finish(12, "uncorrelated-group flatness", started, None)
}

/// Criterion 13: the C11 distribution is Weibull-like at 250 um and the
/// preference over the normal family weakens at 750 um.
///
/// The Weibull family has support on (0, inf); the physically supported
/// quantity is the stiffening contributed by the reinforcement, so the
/// fits act on the excess of the window C11 over the pure-matrix C11
/// (the hard lower bound of any window's stiffness). The normal
/// log-likelihood is shift-invariant, so the 750 um comparison is
/// unaffected by the baseline choice.
fn criterion_13(
    corr_table: &CoefficientTable,
    ensembles: &CenterEnsembles,
) -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let base = crate::presets::pbt_matrix()
        .elasticity_matrix(PlaneState::PlaneStress)
        .get(0, 0);
    let pooled: Vec<f64> = corr_table
        .rows
        .iter()
        .filter(|r| r.bc_kind == BcKind::Displacement)
        .map(|r| r.coeffs[0] - base)
        .collect();
    let fit_250 = fit_distribution(&pooled)?;
    checks.check(
        fit_250.preferred == PreferredFamily::Weibull,
        format!(
            "250 um kubc C11 excess over the matrix baseline (n = {}) \
             prefers Weibull over normal",
            pooled.len()
        ),
    );
    let gap = |fit: &crate::stochastic::DistributionFit, n: usize| -> f64 {
        (fit.log_likelihood_weibull.expect("positive samples") - fit.log_likelihood_normal)
            / n as f64
    };
    let g250 = gap(&fit_250, pooled.len());
    let table_750 = &ensembles
        .varying
        .iter()
        .find(|(w, _)| *w == 750)
        .expect("750 um ensemble present")
        .1;
    let sample_750: Vec<f64> = table_750
        .sample(0, 0, BcKind::Displacement)
        .iter()
        .map(|v| v - base)
        .collect();
    let fit_750 = fit_distribution(&sample_750)?;
    let g750 = gap(&fit_750, sample_750.len());
    checks.check(
        g750 < g250,
        format!(
            "per-sample Weibull-vs-normal log-likelihood gap shrinks: \
             {g750:.5} at 750 um < {g250:.5} at 250 um"
        ),
    );
    Ok(checks.finish(13, "distribution-shape transition", started, None))
}

fn table_checksum(cfg: &EnsembleConfig) -> Result<String> {
    let table = ensemble_run(cfg)?;
    let mut buf = Vec::new();
    write_table_csv(&table, &mut buf)?;
    Ok(hex_digest(&buf))
}

fn sweep_checksum(spec: &SweepSpec) -> Result<String> {
    let result = run_sweep(spec)?;
    let mut buf = Vec::new();
    write_sweep_csv(&result, &mut buf)?;
    Ok(hex_digest(&buf))
}

/// Hex SHA-256 of a byte buffer.
pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Criterion 14: repeated runs with the same master seed produce
/// bit-identical CSV exports, independent of the worker count.
fn criterion_14(master_seed: u64) -> Result<CriterionResult> {
    let started = Instant::now();
    let mut checks = Checks::default();
    let cfg = EnsembleConfig::new(450, 140, 2, derive_seed(master_seed, 14_000));
    let first = table_checksum(&cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .map_err(|e| Error::Domain(format!("worker pool: {e}")))?;
    let second = pool.install(|| table_checksum(&cfg))?;
    checks.check(
        first == second,
        format!("moving-window table checksum stable across worker counts ({first})"),
    );
    let spec = SweepSpec::new(
        Model::TandonWeng,
        Varied::Length,
        SweepMode::Random {
            samples: 200,
            seed: derive_seed(master_seed, 14_001),
        },
    );
    let s1 = sweep_checksum(&spec)?;
    let s2 = pool.install(|| sweep_checksum(&spec))?;
    checks.check(
        s1 == s2,
        format!("analytical sweep checksum stable across worker counts ({s1})"),
    );
    Ok(checks.finish(14, "replay determinism", started, None))
}

/// Runs the sub-second criteria (1-5) plus the determinism check.
pub fn run_quick(master_seed: u64) -> Result<VerifyReport> {
    let criteria = vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3(master_seed)?,
        criterion_4()?,
        criterion_5()?,
        criterion_14(master_seed)?,
    ];
    Ok(VerifyReport {
        criteria,
        master_seed,
        quick: true,
    })
}

/// Runs the complete acceptance suite; expect tens of minutes on a
/// single core, dominated by the ensemble criteria.
pub fn run_full(master_seed: u64) -> Result<VerifyReport> {
    let mut criteria = vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3(master_seed)?,
        criterion_4()?,
        criterion_5()?,
    ];

    // Aligned-fiber ensemble: center 250 um windows extracted from
    // boundary-clipped 1000 um parents (criteria 6 and 9). Extraction
    // keeps fiber coverage stationary across each window and cuts
    // fibers at the window edges, both of which the reference apparent
    // moduli assume.
    let started_6 = Instant::now();
    let aligned_250 = ensemble_run(&center_config(
        1000,
        250,
        Scenario::FractionOnly,
        derive_seed(master_seed, 6_000),
    ))?;
    criteria.push(criterion_6(&aligned_250, started_6));

    // All-varying center ensembles at three window sizes, sharing the
    // master seed so each realization sees the same parent structure.
    let varying_seed = derive_seed(master_seed, 7_000);
    let mut varying = Vec::new();
    for window in [250u32, 500, 750] {
        let table = ensemble_run(&center_config(
            2500,
            window,
            Scenario::AllVarying,
            varying_seed,
        ))?;
        varying.push((window, table));
    }
    let ensembles = CenterEnsembles {
        aligned_250,
        varying,
    };
    criteria.push(criterion_7(&ensembles));
    criteria.push(criterion_8(&ensembles));
    criteria.push(criterion_9(&ensembles.aligned_250));
    criteria.push(criterion_10(&ensembles));

    // Full moving-window ensemble for the correlation criteria.
    let mut corr_cfg = EnsembleConfig::new(1000, 250, 400, derive_seed(master_seed, 11_000));
    corr_cfg.scenario = Scenario::AllVarying;
    let corr_table = ensemble_run(&corr_cfg)?;
    let curves = correlation_curves(&corr_table)?;
    criteria.push(criterion_11(&corr_table, &curves));
    criteria.push(criterion_12(&curves));
    criteria.push(criterion_13(&corr_table, &ensembles)?);

    criteria.push(criterion_14(master_seed)?);
    criteria.sort_by_key(|c| c.id);
    Ok(VerifyReport {
        criteria,
        master_seed,
        quick: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run_quick(DEFAULT_SEED).unwrap();
        assert_eq!(report.criteria.len(), 6);
        assert!(report.passed() || report.acceptable(), "{}", report.render());
        // Criterion 2 carries the documented reference inconsistency and
        // must not count as a clean pass.
        let c2 = report.criteria.iter().find(|c| c.id == 2).unwrap();
        assert!(!c2.passed() && c2.acceptable());
    }

    #[test]
    fn render_lists_every_criterion() {
        let report = run_quick(DEFAULT_SEED).unwrap();
        let text = report.render();
        for c in &report.criteria {
            assert!(text.contains(&format!("criterion {:2}", c.id)));
        }
        assert!(text.contains("known"));
    }
}
