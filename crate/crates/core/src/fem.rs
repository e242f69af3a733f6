//! 2D finite-element analysis of square windows on a structured mesh of
//! 9-node biquadratic Lagrange elements with 3x3 Gauss quadrature and
//! per-integration-point phase properties.
//!
//! Supported loadings are the three pure-displacement and three
//! pure-traction cases that make all nine elasticity coefficients of the
//! window recoverable from volume-averaged strains and stresses.

pub mod solver;

use crate::error::{Error, Result};
use crate::material::{IsotropicMaterial, PlaneState};
use crate::microgen::GridView;
use solver::{BandedCholesky, BandedMatrix};
use std::io::Write;

/// Structured square mesh; node (gx, gy) sits at (gx h/2, gy h/2).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Window edge length [um].
    pub window: f64,
    /// Element edge length [um].
    pub h: f64,
    /// Elements per side.
    pub n: usize,
    /// Nodes per side, 2n + 1.
    pub nodes_per_side: usize,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes_per_side * self.nodes_per_side
    }

    pub fn element_count(&self) -> usize {
        self.n * self.n
    }

    pub fn dof_count(&self) -> usize {
        2 * self.node_count()
    }

    #[inline]
    fn node_id(&self, gx: usize, gy: usize) -> usize {
        gy * self.nodes_per_side + gx
    }

    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        let gx = node % self.nodes_per_side;
        let gy = node / self.nodes_per_side;
        (gx as f64 * self.h / 2.0, gy as f64 * self.h / 2.0)
    }

    /// Global node ids of element (ex, ey), local order a + 3b with a
    /// along x and b along y.
    fn element_nodes(&self, ex: usize, ey: usize) -> [usize; 9] {
        let mut out = [0; 9];
        for b in 0..3 {
            for a in 0..3 {
                out[b * 3 + a] = self.node_id(2 * ex + a, 2 * ey + b);
            }
        }
        out
    }

    fn is_boundary_node(&self, node: usize) -> bool {
        let gx = node % self.nodes_per_side;
        let gy = node / self.nodes_per_side;
        gx == 0 || gy == 0 || gx == self.nodes_per_side - 1 || gy == self.nodes_per_side - 1
    }
}

/// Builds an n x n structured mesh with n = window / h.
pub fn build_mesh(window: f64, h: f64) -> Result<Mesh> {
    if !(window > 0.0 && h > 0.0) {
        return Err(Error::Domain("window and element size must be positive".into()));
    }
    let n = (window / h).round();
    if (n * h - window).abs() > 1e-9 * window || n < 1.0 {
        return Err(Error::Domain(format!(
            "window {window} um is not divisible by element size {h} um"
        )));
    }
    let n = n as usize;
    Ok(Mesh {
        window,
        h,
        n,
        nodes_per_side: 2 * n + 1,
    })
}

const GAUSS_POINTS: [f64; 3] = [-0.774596669241483, 0.0, 0.774596669241483];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

#[inline]
fn shape_1d(x: f64) -> [f64; 3] {
    [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)]
}

#[inline]
fn shape_1d_deriv(x: f64) -> [f64; 3] {
    [x - 0.5, -2.0 * x, x + 0.5]
}

/// Per-Gauss-point shape values and physical-space gradients, shared by
/// all elements of a uniform mesh.
struct QuadratureTables {
    /// For each of the 9 Gauss points: N, dN/dx, dN/dy for the 9 nodes.
    n: [[f64; 9]; 9],
    dndx: [[f64; 9]; 9],
    dndy: [[f64; 9]; 9],
    /// Quadrature weight including the Jacobian determinant.
    w: [f64; 9],
    /// Gauss point physical offsets within the element.
    offset: [(f64, f64); 9],
}

impl QuadratureTables {
    fn new(h: f64) -> Self {
        let det_j = h * h / 4.0;
        let scale = 2.0 / h;
        let mut t = Self {
            n: [[0.0; 9]; 9],
            dndx: [[0.0; 9]; 9],
            dndy: [[0.0; 9]; 9],
            w: [0.0; 9],
            offset: [(0.0, 0.0); 9],
        };
        for qy in 0..3 {
            for qx in 0..3 {
                let q = qy * 3 + qx;
                let (xi, eta) = (GAUSS_POINTS[qx], GAUSS_POINTS[qy]);
                let (nx, ny) = (shape_1d(xi), shape_1d(eta));
                let (dx, dy) = (shape_1d_deriv(xi), shape_1d_deriv(eta));
                for b in 0..3 {
                    for a in 0..3 {
                        let k = b * 3 + a;
                        t.n[q][k] = nx[a] * ny[b];
                        t.dndx[q][k] = dx[a] * ny[b] * scale;
                        t.dndy[q][k] = nx[a] * dy[b] * scale;
                    }
                }
                t.w[q] = GAUSS_WEIGHTS[qx] * GAUSS_WEIGHTS[qy] * det_j;
                t.offset[q] = (0.5 * (xi + 1.0) * h, 0.5 * (eta + 1.0) * h);
            }
        }
        t
    }
}

/// Per-element, per-Gauss-point phase labels with the two constitutive
/// matrices of the phases.
#[derive(Debug, Clone)]
pub struct IntegrationPointMaterial {
    pub state: PlaneState,
    /// Element-major, 9 entries per element; true = second phase (fiber).
    pub phase: Vec<bool>,
    pub c_matrix: [[f64; 3]; 3],
    pub c_fiber: [[f64; 3]; 3],
}

impl IntegrationPointMaterial {
    #[inline]
    fn c_at(&self, element: usize, q: usize) -> &[[f64; 3]; 3] {
        if self.phase[element * 9 + q] {
            &self.c_fiber
        } else {
            &self.c_matrix
        }
    }

    /// Fiber fraction measured with the integration-point quadrature
    /// weights (all equal-volume elements, so weights alone decide).
    pub fn fiber_fraction_by_weights(&self) -> f64 {
        let w2: f64 = GAUSS_WEIGHTS.iter().sum::<f64>().powi(2);
        let mut total = 0.0;
        let mut fiber = 0.0;
        for (i, &p) in self.phase.iter().enumerate() {
            let q = i % 9;
            let w = GAUSS_WEIGHTS[q % 3] * GAUSS_WEIGHTS[q / 3] / w2;
            total += w;
            if p {
                fiber += w;
            }
        }
        fiber / total
    }
}

/// Assigns each integration point the phase of an arbitrary indicator
/// field evaluated at its physical coordinates.
pub fn assign_materials_with<F: Fn(f64, f64) -> bool>(
    mesh: &Mesh,
    state: PlaneState,
    c_matrix: [[f64; 3]; 3],
    c_fiber: [[f64; 3]; 3],
    phase_at: F,
) -> IntegrationPointMaterial {
    let tables = QuadratureTables::new(mesh.h);
    let mut phase = Vec::with_capacity(mesh.element_count() * 9);
    for ey in 0..mesh.n {
        for ex in 0..mesh.n {
            let (x0, y0) = (ex as f64 * mesh.h, ey as f64 * mesh.h);
            for q in 0..9 {
                let (ox, oy) = tables.offset[q];
                phase.push(phase_at(x0 + ox, y0 + oy));
            }
        }
    }
    IntegrationPointMaterial {
        state,
        phase,
        c_matrix,
        c_fiber,
    }
}

/// Assigns each integration point the phase of the raster cell containing
/// its physical coordinates.
pub fn assign_materials(
    mesh: &Mesh,
    view: &GridView<'_>,
    matrix: &IsotropicMaterial,
    fiber: &IsotropicMaterial,
    state: PlaneState,
) -> Result<IntegrationPointMaterial> {
    if (view.size as f64 - mesh.window).abs() > 1e-9 {
        return Err(Error::Geometry(format!(
            "grid view edge {} um does not cover mesh window {} um",
            view.size, mesh.window
        )));
    }
    let cm = matrix.elasticity_matrix(state).entries;
    let cf = fiber.elasticity_matrix(state).entries;
    let size = view.size;
    Ok(assign_materials_with(mesh, state, cm, cf, |x, y| {
        let cx = (x.floor() as u32).min(size - 1);
        let cy = (y.floor() as u32).min(size - 1);
        view.is_fiber(cx, cy)
    }))
}

/// Boundary-condition kind of the six supported load cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    /// Pure displacement (kinematic uniform) conditions.
    Displacement,
    /// Pure traction (static uniform) conditions.
    Traction,
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BcKind::Displacement => "kubc",
            BcKind::Traction => "subc",
        })
    }
}

/// Default edge displacement magnitude: 0.1% macroscopic strain.
pub fn default_u0(window: f64) -> f64 {
    1e-3 * window
}

/// Default edge traction magnitude: 1 MPa in the GPa unit system.
pub const DEFAULT_T0: f64 = 1e-3;

/// One of the six load cases; `case` is 1, 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadCaseSpec {
    pub kind: BcKind,
    pub case: usize,
    /// u0 [um] for displacement cases, t0 [GPa] for traction cases.
    pub magnitude: f64,
}

impl LoadCaseSpec {
    pub fn displacement(case: usize, window: f64) -> Self {
        Self {
            kind: BcKind::Displacement,
            case,
            magnitude: default_u0(window),
        }
    }

    pub fn traction(case: usize) -> Self {
        Self {
            kind: BcKind::Traction,
            case,
            magnitude: DEFAULT_T0,
        }
    }
}

/// Assembled Dirichlet data and consistent nodal loads for one case.
#[derive(Debug, Clone)]
pub struct BoundaryConditionSet {
    /// (dof index, prescribed value).
    pub fixed: Vec<(usize, f64)>,
    /// (dof index, nodal force).
    pub forces: Vec<(usize, f64)>,
}

/// Edge displacement ramp of the displacement cases: full edge values
/// u = u0 * (coordinate / d) so corner values are compatible.
fn displacement_at(case: usize, magnitude: f64, d: f64, x: f64, y: f64) -> (f64, f64) {
    let r = magnitude / d;
    match case {
        1 => (r * x, 0.0),
        2 => (0.0, r * y),
        3 => (0.0, r * x),
        _ => unreachable!(),
    }
}

/// Constant edge tractions (t1, t2) per case on the left, right, top and
/// bottom faces. Signs follow the published load table verbatim; the
/// recovered coefficients are invariant to the overall sign.
fn edge_tractions(case: usize, t0: f64) -> [[f64; 2]; 4] {
    let s = t0 / 2.0;
    match case {
        // left, right, top, bottom
        1 => [[s, 0.0], [-s, 0.0], [0.0, 0.0], [0.0, 0.0]],
        2 => [[0.0, 0.0], [0.0, 0.0], [0.0, s], [0.0, -s]],
        3 => [[0.0, -s], [0.0, s], [s, 0.0], [-s, 0.0]],
        _ => unreachable!(),
    }
}

/// Translates a load case into nodal constraints and consistent loads.
pub fn apply_load_case(mesh: &Mesh, spec: &LoadCaseSpec) -> Result<BoundaryConditionSet> {
    if !(1..=3).contains(&spec.case) {
        return Err(Error::Domain(format!("load case {} not in 1..=3", spec.case)));
    }
    let nps = mesh.nodes_per_side;
    let d = mesh.window;
    match spec.kind {
        BcKind::Displacement => {
            let mut fixed = Vec::new();
            for node in 0..mesh.node_count() {
                if mesh.is_boundary_node(node) {
                    let (x, y) = mesh.node_coords(node);
                    let (u1, u2) = displacement_at(spec.case, spec.magnitude, d, x, y);
                    fixed.push((2 * node, u1));
                    fixed.push((2 * node + 1, u2));
                }
            }
            Ok(BoundaryConditionSet {
                fixed,
                forces: Vec::new(),
            })
        }
        BcKind::Traction => {
            let t = edge_tractions(spec.case, spec.magnitude);
            let mut forces = vec![0.0; mesh.dof_count()];
            // Consistent loads of the quadratic edge: (1/6, 2/3, 1/6) * t * h.
            let wts = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
            let mut add_edge = |nodes: [usize; 3], tr: [f64; 2]| {
                for (k, &node) in nodes.iter().enumerate() {
                    forces[2 * node] += wts[k] * tr[0] * mesh.h;
                    forces[2 * node + 1] += wts[k] * tr[1] * mesh.h;
                }
            };
            for e in 0..mesh.n {
                let g = 2 * e;
                add_edge([mesh.node_id(0, g), mesh.node_id(0, g + 1), mesh.node_id(0, g + 2)], t[0]);
                let r = nps - 1;
                add_edge([mesh.node_id(r, g), mesh.node_id(r, g + 1), mesh.node_id(r, g + 2)], t[1]);
                add_edge(
                    [mesh.node_id(g, r), mesh.node_id(g + 1, r), mesh.node_id(g + 2, r)],
                    t[2],
                );
                add_edge([mesh.node_id(g, 0), mesh.node_id(g + 1, 0), mesh.node_id(g + 2, 0)], t[3]);
            }
            // Minimal rigid-body constraints: corner (0,0) pinned in both
            // dofs, corner (d,0) pinned vertically.
            let c00 = mesh.node_id(0, 0);
            let cd0 = mesh.node_id(nps - 1, 0);
            let fixed = vec![(2 * c00, 0.0), (2 * c00 + 1, 0.0), (2 * cd0 + 1, 0.0)];
            let forces = forces
                .iter()
                .enumerate()
                .filter(|&(_, &f)| f != 0.0)
                .map(|(i, &f)| (i, f))
                .collect();
            Ok(BoundaryConditionSet { fixed, forces })
        }
    }
}

/// Solution of one load case with its quadrature-averaged fields.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    /// Nodal displacements, 2 per node.
    pub displacements: Vec<f64>,
    /// Per-Gauss-point strain [e1, e2, 2 e6] (engineering shear).
    pub strains: Vec<[f64; 3]>,
    /// Per-Gauss-point stress [s1, s2, s6] in GPa.
    pub stresses: Vec<[f64; 3]>,
    /// Volume average [<e1>, <e2>, 2<e6>].
    pub avg_strain: [f64; 3],
    /// Volume average [<s1>, <s2>, <s6>] in GPa.
    pub avg_stress: [f64; 3],
    /// |<s:e> - <s>:<e>| / |<s>:<e>|.
    pub hill_residual: f64,
}

/// Factored stiffness of one (window, bc kind) pair, reusable across the
/// three load cases.
pub struct WindowSystem<'a> {
    mesh: &'a Mesh,
    materials: &'a IntegrationPointMaterial,
    kind: BcKind,
    tables: QuadratureTables,
    /// dof -> free index or usize::MAX.
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
    chol: BandedCholesky,
    /// Element stiffness coupling (free index, fixed dof, k value).
    coupling: Vec<(usize, usize, f64)>,
    matrix: BandedMatrix,
}

impl<'a> WindowSystem<'a> {
    pub fn new(
        mesh: &'a Mesh,
        materials: &'a IntegrationPointMaterial,
        kind: BcKind,
    ) -> Result<Self> {
        if materials.phase.len() != mesh.element_count() * 9 {
            return Err(Error::Geometry(
                "material table does not match the mesh".into(),
            ));
        }
        let tables = QuadratureTables::new(mesh.h);
        let fixed: Vec<usize> = match kind {
            BcKind::Displacement => (0..mesh.node_count())
                .filter(|&n| mesh.is_boundary_node(n))
                .flat_map(|n| [2 * n, 2 * n + 1])
                .collect(),
            BcKind::Traction => {
                let c00 = mesh.node_id(0, 0);
                let cd0 = mesh.node_id(mesh.nodes_per_side - 1, 0);
                vec![2 * c00, 2 * c00 + 1, 2 * cd0 + 1]
            }
        };
        let mut is_fixed = vec![false; mesh.dof_count()];
        for &d in &fixed {
            is_fixed[d] = true;
        }
        let mut free_index = vec![usize::MAX; mesh.dof_count()];
        let mut free_dofs = Vec::new();
        for dof in 0..mesh.dof_count() {
            if !is_fixed[dof] {
                free_index[dof] = free_dofs.len();
                free_dofs.push(dof);
            }
        }

        // Half bandwidth over element free-dof index spans.
        let mut hb = 0usize;
        for ey in 0..mesh.n {
            for ex in 0..mesh.n {
                let nodes = mesh.element_nodes(ex, ey);
                let mut lo = usize::MAX;
                let mut hi = 0usize;
                for &n in &nodes {
                    for dof in [2 * n, 2 * n + 1] {
                        let fi = free_index[dof];
                        if fi != usize::MAX {
                            lo = lo.min(fi);
                            hi = hi.max(fi);
                        }
                    }
                }
                if lo != usize::MAX {
                    hb = hb.max(hi - lo);
                }
            }
        }

        let mut matrix = BandedMatrix::zeros(free_dofs.len(), hb);
        let mut coupling = Vec::new();
        let mut ke = [[0.0f64; 18]; 18];
        for ey in 0..mesh.n {
            for ex in 0..mesh.n {
                let element = ey * mesh.n + ex;
                element_stiffness(&tables, materials, element, &mut ke);
                let nodes = mesh.element_nodes(ex, ey);
                let mut dofs = [0usize; 18];
                for (k, &n) in nodes.iter().enumerate() {
                    dofs[2 * k] = 2 * n;
                    dofs[2 * k + 1] = 2 * n + 1;
                }
                for i in 0..18 {
                    let fi = free_index[dofs[i]];
                    for j in 0..18 {
                        let fj = free_index[dofs[j]];
                        if fi != usize::MAX && fj != usize::MAX {
                            if fi >= fj {
                                matrix.add(fi, fj, ke[i][j]);
                            }
                        } else if fi != usize::MAX && fj == usize::MAX {
                            coupling.push((fi, dofs[j], ke[i][j]));
                        }
                    }
                }
            }
        }
        let chol = BandedCholesky::factor(&matrix)
            .map_err(|e| Error::Singular(format!("window stiffness: {e}")))?;
        Ok(Self {
            mesh,
            materials,
            kind,
            tables,
            free_index,
            free_dofs,
            chol,
            coupling,
            matrix,
        })
    }

    /// Solves one load case of this system's kind.
    pub fn solve_case(&self, spec: &LoadCaseSpec) -> Result<FieldSolution> {
        if spec.kind != self.kind {
            return Err(Error::Geometry("load case kind mismatch".into()));
        }
        let bc = apply_load_case(self.mesh, spec)?;
        let mut full = vec![0.0; self.mesh.dof_count()];
        for &(dof, v) in &bc.fixed {
            full[dof] = v;
        }
        let mut rhs = vec![0.0; self.free_dofs.len()];
        for &(fi, fixed_dof, k) in &self.coupling {
            rhs[fi] -= k * full[fixed_dof];
        }
        for &(dof, f) in &bc.forces {
            let fi = self.free_index[dof];
            if fi != usize::MAX {
                rhs[fi] += f;
            }
        }
        let rhs_in = rhs.clone();
        self.chol.solve(&mut rhs)?;
        let res = solver::relative_residual(&self.matrix, &rhs, &rhs_in);
        if res > 1e-10 {
            return Err(Error::Singular(format!(
                "relative residual {res:.3e} exceeds 1e-10"
            )));
        }
        for (fi, &dof) in self.free_dofs.iter().enumerate() {
            full[dof] = rhs[fi];
        }
        Ok(self.post_process(full))
    }

    /// Solves all three load cases of this system's kind with the given
    /// magnitude, reusing the single factorization.
    pub fn solve_all(&self, magnitude: f64) -> Result<[FieldSolution; 3]> {
        let mk = |case| LoadCaseSpec {
            kind: self.kind,
            case,
            magnitude,
        };
        Ok([
            self.solve_case(&mk(1))?,
            self.solve_case(&mk(2))?,
            self.solve_case(&mk(3))?,
        ])
    }

    fn post_process(&self, full: Vec<f64>) -> FieldSolution {
        let mesh = self.mesh;
        let area = mesh.window * mesh.window;
        let mut strains = Vec::with_capacity(mesh.element_count() * 9);
        let mut stresses = Vec::with_capacity(mesh.element_count() * 9);
        let mut avg_e = [0.0; 3];
        let mut avg_s = [0.0; 3];
        let mut energy = 0.0;
        for ey in 0..mesh.n {
            for ex in 0..mesh.n {
                let element = ey * mesh.n + ex;
                let nodes = mesh.element_nodes(ex, ey);
                for q in 0..9 {
                    let mut e = [0.0; 3];
                    for (k, &n) in nodes.iter().enumerate() {
                        let (u1, u2) = (full[2 * n], full[2 * n + 1]);
                        e[0] += self.tables.dndx[q][k] * u1;
                        e[1] += self.tables.dndy[q][k] * u2;
                        e[2] += self.tables.dndy[q][k] * u1 + self.tables.dndx[q][k] * u2;
                    }
                    let c = self.materials.c_at(element, q);
                    let mut s = [0.0; 3];
                    for r in 0..3 {
                        s[r] = c[r][0] * e[0] + c[r][1] * e[1] + c[r][2] * e[2];
                    }
                    let w = self.tables.w[q] / area;
                    for r in 0..3 {
                        avg_e[r] += w * e[r];
                        avg_s[r] += w * s[r];
                    }
                    energy += w * (s[0] * e[0] + s[1] * e[1] + s[2] * e[2]);
                    strains.push(e);
                    stresses.push(s);
                }
            }
        }
        let macro_energy = avg_s[0] * avg_e[0] + avg_s[1] * avg_e[1] + avg_s[2] * avg_e[2];
        let hill_residual = if macro_energy.abs() > 0.0 {
            (energy - macro_energy).abs() / macro_energy.abs()
        } else {
            (energy - macro_energy).abs()
        };
        FieldSolution {
            displacements: full,
            strains,
            stresses,
            avg_strain: avg_e,
            avg_stress: avg_s,
            hill_residual,
        }
    }
}

fn element_stiffness(
    tables: &QuadratureTables,
    materials: &IntegrationPointMaterial,
    element: usize,
    ke: &mut [[f64; 18]; 18],
) {
    for row in ke.iter_mut() {
        row.fill(0.0);
    }
    for q in 0..9 {
        let c = materials.c_at(element, q);
        let w = tables.w[q];
        let dndx = &tables.dndx[q];
        let dndy = &tables.dndy[q];
        // B columns for node k: (2k) -> [dndx, 0, dndy], (2k+1) -> [0, dndy, dndx].
        for i in 0..9 {
            let bi = [[dndx[i], 0.0, dndy[i]], [0.0, dndy[i], dndx[i]]];
            for di in 0..2 {
                let cb = [
                    c[0][0] * bi[di][0] + c[0][1] * bi[di][1] + c[0][2] * bi[di][2],
                    c[1][0] * bi[di][0] + c[1][1] * bi[di][1] + c[1][2] * bi[di][2],
                    c[2][0] * bi[di][0] + c[2][1] * bi[di][1] + c[2][2] * bi[di][2],
                ];
                for j in 0..9 {
                    let bj = [[dndx[j], 0.0, dndy[j]], [0.0, dndy[j], dndx[j]]];
                    for dj in 0..2 {
                        ke[2 * i + di][2 * j + dj] +=
                            w * (bj[dj][0] * cb[0] + bj[dj][1] * cb[1] + bj[dj][2] * cb[2]);
                    }
                }
            }
        }
    }
}

/// One-shot convenience: factor and solve a single load case.
pub fn solve(
    mesh: &Mesh,
    materials: &IntegrationPointMaterial,
    spec: &LoadCaseSpec,
) -> Result<FieldSolution> {
    WindowSystem::new(mesh, materials, spec.kind)?.solve_case(spec)
}

/// Debug dump of the nodal displacement field as CSV (x, y, u1, u2).
pub fn write_displacement_csv<W: Write>(
    mesh: &Mesh,
    solution: &FieldSolution,
    mut w: W,
) -> Result<()> {
    writeln!(w, "x_um,y_um,u1_um,u2_um")?;
    for node in 0..mesh.node_count() {
        let (x, y) = mesh.node_coords(node);
        writeln!(
            w,
            "{x},{y},{},{}",
            solution.displacements[2 * node],
            solution.displacements[2 * node + 1]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::PlaneState;
    use crate::microgen::{extract_window, generate_microstructure, GenerationConfig};
    use crate::presets;

    fn homogeneous(mesh: &Mesh, state: PlaneState) -> IntegrationPointMaterial {
        let c = presets::pbt_matrix().elasticity_matrix(state).entries;
        assign_materials_with(mesh, state, c, c, |_, _| false)
    }

    #[test]
    fn mesh_counts() {
        let m = build_mesh(250.0, 10.0).unwrap();
        assert_eq!(m.element_count(), 625);
        assert_eq!(m.node_count(), 2601);
        let m = build_mesh(750.0, 10.0).unwrap();
        assert_eq!(m.element_count(), 5625);
        assert_eq!(m.node_count(), 22801);
        assert!(build_mesh(250.0, 16.7).is_err());
        assert!(build_mesh(0.0, 10.0).is_err());
    }

    #[test]
    fn material_assignment_matches_raster_fraction() {
        let cfg = GenerationConfig::all_sampled(1000, 1000, 0.18, 29);
        let m = generate_microstructure(&cfg).unwrap();
        let view = extract_window(&m, (500, 500), 250).unwrap();
        let mesh = build_mesh(250.0, 10.0).unwrap();
        let mats = assign_materials(
            &mesh,
            &view,
            &presets::pbt_matrix(),
            &presets::glass_fiber(),
            PlaneState::PlaneStress,
        )
        .unwrap();
        let raster = view.fiber_fraction();
        let quad = mats.fiber_fraction_by_weights();
        assert!((raster - quad).abs() < 0.01, "raster {raster}, quad {quad}");
    }

    #[test]
    fn material_mesh_mismatch_is_rejected() {
        let cfg = GenerationConfig::all_sampled(400, 400, 0.1, 31);
        let m = generate_microstructure(&cfg).unwrap();
        let view = extract_window(&m, (200, 200), 200).unwrap();
        let mesh = build_mesh(250.0, 10.0).unwrap();
        assert!(assign_materials(
            &mesh,
            &view,
            &presets::pbt_matrix(),
            &presets::glass_fiber(),
            PlaneState::PlaneStress
        )
        .is_err());
    }

    #[test]
    fn patch_test_affine_field() {
        // Homogeneous material, affine Dirichlet data on the whole
        // boundary: the interior must reproduce the affine field exactly.
        let mesh = build_mesh(60.0, 10.0).unwrap();
        let mats = homogeneous(&mesh, PlaneState::PlaneStress);
        let system = WindowSystem::new(&mesh, &mats, BcKind::Displacement).unwrap();
        let sol = system
            .solve_case(&LoadCaseSpec::displacement(1, mesh.window))
            .unwrap();
        let r = default_u0(mesh.window) / mesh.window;
        for node in 0..mesh.node_count() {
            let (x, _) = mesh.node_coords(node);
            assert!((sol.displacements[2 * node] - r * x).abs() < 1e-10 * mesh.window);
            assert!(sol.displacements[2 * node + 1].abs() < 1e-10 * mesh.window);
        }
    }

    #[test]
    fn homogeneous_plate_kubc_case1_stress() {
        let mesh = build_mesh(100.0, 10.0).unwrap();
        let mats = homogeneous(&mesh, PlaneState::PlaneStress);
        let sol = solve(&mesh, &mats, &LoadCaseSpec::displacement(1, mesh.window)).unwrap();
        let eps = default_u0(mesh.window) / mesh.window;
        let c = presets::pbt_matrix()
            .elasticity_matrix(PlaneState::PlaneStress)
            .entries;
        assert!((sol.avg_strain[0] - eps).abs() < 1e-12);
        assert!(sol.avg_strain[1].abs() < 1e-14);
        assert!(sol.avg_strain[2].abs() < 1e-14);
        assert!((sol.avg_stress[0] - c[0][0] * eps).abs() / (c[0][0] * eps) < 1e-9);
        assert!((sol.avg_stress[1] - c[0][1] * eps).abs() / (c[0][1] * eps).abs() < 1e-9);
    }

    #[test]
    fn homogeneous_plate_kubc_case3_shear() {
        let mesh = build_mesh(100.0, 10.0).unwrap();
        let mats = homogeneous(&mesh, PlaneState::PlaneStress);
        let sol = solve(&mesh, &mats, &LoadCaseSpec::displacement(3, mesh.window)).unwrap();
        // u2 = u0 x / d on the boundary: du2/dx = u0/d, engineering
        // shear average equals u0/d.
        let g = default_u0(mesh.window) / mesh.window;
        assert!((sol.avg_strain[2] - g).abs() < 1e-12);
        assert!(sol.avg_strain[0].abs() < 1e-14);
        assert!(sol.avg_strain[1].abs() < 1e-14);
    }

    #[test]
    fn homogeneous_plate_subc_case1_stress() {
        let mesh = build_mesh(100.0, 10.0).unwrap();
        let mats = homogeneous(&mesh, PlaneState::PlaneStress);
        let sol = solve(&mesh, &mats, &LoadCaseSpec::traction(1)).unwrap();
        // Verbatim sign table: compression of magnitude t0/2.
        assert!((sol.avg_stress[0] - (-DEFAULT_T0 / 2.0)).abs() < 1e-12);
        assert!(sol.avg_stress[1].abs() < 1e-12);
        assert!(sol.avg_stress[2].abs() < 1e-12);
    }

    #[test]
    fn average_strain_theorem_heterogeneous_kubc() {
        let cfg = GenerationConfig::all_sampled(600, 600, 0.18, 37);
        let m = generate_microstructure(&cfg).unwrap();
        let view = extract_window(&m, (300, 300), 250).unwrap();
        let mesh = build_mesh(250.0, 10.0).unwrap();
        let mats = assign_materials(
            &mesh,
            &view,
            &presets::pbt_matrix(),
            &presets::glass_fiber(),
            PlaneState::PlaneStress,
        )
        .unwrap();
        let system = WindowSystem::new(&mesh, &mats, BcKind::Displacement).unwrap();
        let eps = default_u0(mesh.window) / mesh.window;
        let expect = [[eps, 0.0, 0.0], [0.0, eps, 0.0], [0.0, 0.0, eps]];
        for (sol, exp) in system
            .solve_all(default_u0(mesh.window))
            .unwrap()
            .iter()
            .zip(expect)
        {
            for r in 0..3 {
                assert!(
                    (sol.avg_strain[r] - exp[r]).abs() < 1e-10,
                    "avg strain {:?} vs {exp:?}",
                    sol.avg_strain
                );
            }
            assert!(sol.hill_residual <= 1e-8, "hill {}", sol.hill_residual);
        }
    }

    #[test]
    fn average_stress_theorem_heterogeneous_subc() {
        let cfg = GenerationConfig::all_sampled(600, 600, 0.18, 37);
        let m = generate_microstructure(&cfg).unwrap();
        let view = extract_window(&m, (300, 300), 250).unwrap();
        let mesh = build_mesh(250.0, 10.0).unwrap();
        let mats = assign_materials(
            &mesh,
            &view,
            &presets::pbt_matrix(),
            &presets::glass_fiber(),
            PlaneState::PlaneStress,
        )
        .unwrap();
        let system = WindowSystem::new(&mesh, &mats, BcKind::Traction).unwrap();
        let s = DEFAULT_T0 / 2.0;
        let expect = [[-s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]];
        for (sol, exp) in system.solve_all(DEFAULT_T0).unwrap().iter().zip(expect) {
            for r in 0..3 {
                assert!(
                    (sol.avg_stress[r] - exp[r]).abs() < 1e-8,
                    "avg stress {:?} vs {exp:?}",
                    sol.avg_stress
                );
            }
            assert!(sol.hill_residual <= 1e-8, "hill {}", sol.hill_residual);
        }
    }

    #[test]
    fn two_strip_laminate_voigt_reuss() {
        // Vertical interface at x = w/2; phase A left, phase B right.
        // Zero Poisson ratios decouple the normal directions, so the
        // per-strip uniform fields are exact and the mixture rules hold
        // to solver precision.
        let state = PlaneState::PlaneStrain;
        let a = IsotropicMaterial::new(2.6, 0.0, 1300.0).unwrap();
        let b = IsotropicMaterial::new(70.0, 0.0, 2500.0).unwrap();
        let ca = a.elasticity_matrix(state).entries;
        let cb = b.elasticity_matrix(state).entries;
        let mesh = build_mesh(100.0, 10.0).unwrap();
        let mats = assign_materials_with(&mesh, state, ca, cb, |x, _| x > 50.0);

        // KUBC case 2 loads parallel to the interface: both strips carry
        // the same e2, so <s2> is the Voigt mixture of C22 entries, and
        // the uniform per-strip fields make the solution exact.
        let system = WindowSystem::new(&mesh, &mats, BcKind::Displacement).unwrap();
        let sol = system
            .solve_case(&LoadCaseSpec::displacement(2, mesh.window))
            .unwrap();
        let eps = default_u0(mesh.window) / mesh.window;
        // Per-strip plane-strain response with e1 = 0 at the strip scale:
        // s2 = C22 e2; lateral constraint makes e1 = 0 pointwise.
        let voigt = 0.5 * (ca[1][1] + cb[1][1]) * eps;
        assert!(
            (sol.avg_stress[1] - voigt).abs() / voigt < 1e-6,
            "s2 {} vs {voigt}",
            sol.avg_stress[1]
        );

        // SUBC case 1 loads across the interface: uniform s1, series
        // compliances (Reuss) with free lateral contraction per strip.
        let system = WindowSystem::new(&mesh, &mats, BcKind::Traction).unwrap();
        let sol = system.solve_case(&LoadCaseSpec::traction(1)).unwrap();
        let s1 = -DEFAULT_T0 / 2.0;
        // Invert each 3x3 strip matrix on [s1, 0, 0]: e1 = S11 s1.
        let s11 = |c: &[[f64; 3]; 3]| {
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            c[1][1] / det
        };
        let reuss = 0.5 * (s11(&ca) + s11(&cb)) * s1;
        assert!(
            (sol.avg_strain[0] - reuss).abs() / reuss.abs() < 1e-6,
            "e1 {} vs {reuss}",
            sol.avg_strain[0]
        );
    }

    #[test]
    fn mesh_convergence_on_fixed_microstructure() {
        let cfg = GenerationConfig::all_sampled(600, 600, 0.18, 46);
        let m = generate_microstructure(&cfg).unwrap();
        let view = extract_window(&m, (300, 300), 250).unwrap();
        let mut c11 = Vec::new();
        for h in [10.0, 5.0] {
            let mesh = build_mesh(250.0, h).unwrap();
            let mats = assign_materials(
                &mesh,
                &view,
                &presets::pbt_matrix(),
                &presets::glass_fiber(),
                PlaneState::PlaneStress,
            )
            .unwrap();
            let system = WindowSystem::new(&mesh, &mats, BcKind::Displacement).unwrap();
            let sols = system.solve_all(default_u0(250.0)).unwrap();
            let t = crate::homogenize::apparent_tensor_from_solutions(
                &sols,
                BcKind::Displacement,
                250.0,
                PlaneState::PlaneStress,
            )
            .unwrap();
            c11.push(t.matrix.entries[0][0]);
        }
        let rel = (c11[0] - c11[1]).abs() / c11[1];
        assert!(rel <= 0.02, "C11 at h=10: {}, h=5: {}", c11[0], c11[1]);
    }

    #[test]
    fn invalid_load_case_rejected() {
        let mesh = build_mesh(50.0, 10.0).unwrap();
        assert!(apply_load_case(
            &mesh,
            &LoadCaseSpec {
                kind: BcKind::Displacement,
                case: 4,
                magnitude: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn displacement_csv_dump() {
        let mesh = build_mesh(20.0, 10.0).unwrap();
        let mats = homogeneous(&mesh, PlaneState::PlaneStress);
        let sol = solve(&mesh, &mats, &LoadCaseSpec::displacement(1, 20.0)).unwrap();
        let mut out = Vec::new();
        write_displacement_csv(&mesh, &sol, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x_um,y_um,u1_um,u2_um"));
        assert_eq!(text.lines().count(), 1 + mesh.node_count());
    }
}
