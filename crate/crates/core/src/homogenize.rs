//! Apparent elasticity tensor recovery from three load cases, plus
//! bound-ordering and symmetry diagnostics.
//!
//! For each stress row n in {1, 2, 6} the three load cases give the
//! system [<e1>, <e2>, 2<e6>] [C_n1, C_n2, C_n6]^T = [<s_n>], solved
//! independently, so all nine coefficients are recovered without any
//! symmetry assumption.

use crate::error::{Error, Result};
use crate::fem::{
    assign_materials, build_mesh, default_u0, BcKind, FieldSolution, WindowSystem, DEFAULT_T0,
};
use crate::material::{ElasticityMatrix2D, IsotropicMaterial, PlaneState};
use crate::microgen::GridView;

/// Apparent (window- and boundary-condition-dependent) elasticity
/// matrix; all nine entries independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparentTensor {
    pub matrix: ElasticityMatrix2D,
    pub bc_kind: BcKind,
    /// Window edge length [um].
    pub window: f64,
    pub state: PlaneState,
    /// Largest Hill residual over the three load cases.
    pub max_hill_residual: f64,
}

fn solve_3x3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // Scale-aware singularity guard for strain matrices of any magnitude.
    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
        .powi(3);
    if det.abs() <= 1e-12 * scale || det.is_nan() {
        return Err(Error::Singular(format!(
            "load-case strain matrix is degenerate (det = {det:.3e})"
        )));
    }
    let inv = |r: usize, c: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / det
    };
    let mut x = [0.0; 3];
    for i in 0..3 {
        // Cramer via adjugate: x_i = sum_j adj(i,j)/det * b_j.
        for j in 0..3 {
            x[i] += inv(j, i) * b[j];
        }
    }
    Ok(x)
}

/// Recovers the apparent tensor from three already-computed load-case
/// solutions of one kind on one window.
pub fn apparent_tensor_from_solutions(
    solutions: &[FieldSolution; 3],
    bc_kind: BcKind,
    window: f64,
    state: PlaneState,
) -> Result<ApparentTensor> {
    let mut strain_rows = [[0.0; 3]; 3];
    for (row, sol) in strain_rows.iter_mut().zip(solutions) {
        // avg_strain already carries engineering shear 2<e6>.
        *row = sol.avg_strain;
    }
    let mut entries = [[0.0; 3]; 3];
    for n in 0..3 {
        let rhs = [
            solutions[0].avg_stress[n],
            solutions[1].avg_stress[n],
            solutions[2].avg_stress[n],
        ];
        entries[n] = solve_3x3(&strain_rows, &rhs)?;
    }
    if entries.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite recovered coefficient".into()));
    }
    let max_hill_residual = solutions
        .iter()
        .map(|s| s.hill_residual)
        .fold(0.0, f64::max);
    Ok(ApparentTensor {
        matrix: ElasticityMatrix2D { entries, state },
        bc_kind,
        window,
        state,
        max_hill_residual,
    })
}

/// Meshes a window, runs the three load cases of one kind and recovers
/// the apparent tensor.
pub fn apparent_tensor(
    view: &GridView<'_>,
    bc_kind: BcKind,
    state: PlaneState,
    matrix: &IsotropicMaterial,
    fiber: &IsotropicMaterial,
    h: f64,
) -> Result<ApparentTensor> {
    let mesh = build_mesh(view.size as f64, h)?;
    let materials = assign_materials(&mesh, view, matrix, fiber, state)?;
    let system = WindowSystem::new(&mesh, &materials, bc_kind)?;
    let magnitude = match bc_kind {
        BcKind::Displacement => default_u0(mesh.window),
        BcKind::Traction => DEFAULT_T0,
    };
    let solutions = system.solve_all(magnitude)?;
    apparent_tensor_from_solutions(&solutions, bc_kind, mesh.window, state)
}

/// Diagonal-entrywise comparison of the two boundary-condition kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    /// KUBC - SUBC for C11, C22, C66.
    pub diagonal_gap: [f64; 3],
    /// Diagonals where SUBC exceeds KUBC.
    pub violations: [bool; 3],
}

impl BoundsReport {
    pub fn has_violation(&self) -> bool {
        self.violations.iter().any(|&v| v)
    }
}

/// Checks the expected stiffness ordering between the kinematic upper
/// and static lower bound on the diagonal coefficients.
pub fn bounds_check(kubc: &ApparentTensor, subc: &ApparentTensor) -> Result<BoundsReport> {
    if kubc.bc_kind != BcKind::Displacement || subc.bc_kind != BcKind::Traction {
        return Err(Error::Geometry("arguments must be (kubc, subc)".into()));
    }
    if (kubc.window - subc.window).abs() > 1e-9 || kubc.state != subc.state {
        return Err(Error::Geometry("mismatched window or state".into()));
    }
    let mut gap = [0.0; 3];
    let mut violations = [false; 3];
    for (slot, d) in [0usize, 1, 2].iter().enumerate() {
        gap[slot] = kubc.matrix.entries[*d][*d] - subc.matrix.entries[*d][*d];
        violations[slot] = gap[slot] < 0.0;
    }
    Ok(BoundsReport {
        diagonal_gap: gap,
        violations,
    })
}

/// Signed differences of the symmetric entry pairs, absolute and
/// relative to C11.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub d12_21: f64,
    pub d16_61: f64,
    pub d26_62: f64,
    pub rel_d12_21: f64,
    pub rel_d16_61: f64,
    pub rel_d26_62: f64,
}

pub fn symmetry_report(t: &ApparentTensor) -> SymmetryReport {
    let c = &t.matrix.entries;
    let c11 = c[0][0];
    SymmetryReport {
        d12_21: c[0][1] - c[1][0],
        d16_61: c[0][2] - c[2][0],
        d26_62: c[1][2] - c[2][1],
        rel_d12_21: (c[0][1] - c[1][0]) / c11,
        rel_d16_61: (c[0][2] - c[2][0]) / c11,
        rel_d26_62: (c[1][2] - c[2][1]) / c11,
    }
}
