//! Analytical micromechanics of aligned short-fiber composites.
//!
//! Engineering constants from phase properties and fiber geometry
//! (Tandon-Weng via the Eshelby tensor for prolate spheroids, and
//! Halpin-Tsai), assembly of the reduced 3x3 elasticity matrix for plane
//! stress / plane strain, in-plane rotation, constant extraction and
//! mass/volume fraction conversion.
//!
//! Moduli are in GPa, densities in kg/m^3, angles in radians.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Two-dimensional reduction assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneState {
    PlaneStress,
    PlaneStrain,
}

impl std::fmt::Display for PlaneState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlaneState::PlaneStress => write!(f, "plane-stress"),
            PlaneState::PlaneStrain => write!(f, "plane-strain"),
        }
    }
}

/// One isotropic phase (fiber or matrix).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropicMaterial {
    /// Young's modulus [GPa].
    pub young_modulus: f64,
    /// Poisson ratio [-].
    pub poisson_ratio: f64,
    /// Density [kg/m^3].
    pub density: f64,
}

impl IsotropicMaterial {
    pub fn new(young_modulus: f64, poisson_ratio: f64, density: f64) -> Result<Self> {
        if young_modulus <= 0.0 || young_modulus.is_nan() {
            return Err(Error::Domain(format!(
                "Young's modulus must be positive, got {young_modulus}"
            )));
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(Error::Domain(format!(
                "Poisson ratio must lie in [0, 0.5), got {poisson_ratio}"
            )));
        }
        if density <= 0.0 || density.is_nan() {
            return Err(Error::Domain(format!(
                "density must be positive, got {density}"
            )));
        }
        Ok(Self {
            young_modulus,
            poisson_ratio,
            density,
        })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn lame_lambda(&self) -> f64 {
        self.young_modulus * self.poisson_ratio
            / ((1.0 + self.poisson_ratio) * (1.0 - 2.0 * self.poisson_ratio))
    }

    /// Reduced isotropic constitutive matrix for the given 2D state.
    pub fn elasticity_matrix(&self, state: PlaneState) -> ElasticityMatrix2D {
        let e = self.young_modulus;
        let nu = self.poisson_ratio;
        let c = match state {
            PlaneState::PlaneStress => {
                let f = e / (1.0 - nu * nu);
                [
                    [f, f * nu, 0.0],
                    [f * nu, f, 0.0],
                    [0.0, 0.0, f * (1.0 - nu) / 2.0],
                ]
            }
            PlaneState::PlaneStrain => {
                let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                [
                    [f * (1.0 - nu), f * nu, 0.0],
                    [f * nu, f * (1.0 - nu), 0.0],
                    [0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0],
                ]
            }
        };
        ElasticityMatrix2D { entries: c, state }
    }
}

/// The five independent constants of a transversely isotropic ply,
/// axis 1 aligned with the fibers. `nu23` is derived from `e2` and `g23`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineeringConstants {
    pub e1: f64,
    pub e2: f64,
    pub g12: f64,
    pub g23: f64,
    pub nu12: f64,
}

impl EngineeringConstants {
    pub fn nu21(&self) -> f64 {
        self.nu12 * self.e2 / self.e1
    }

    /// Out-of-plane Poisson ratio from e2 = 2 g23 (1 + nu23).
    pub fn nu23(&self) -> f64 {
        self.e2 / (2.0 * self.g23) - 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.e1 <= 0.0 || self.e2 <= 0.0 || self.g12 <= 0.0 || self.g23 <= 0.0 {
            return Err(Error::Domain("all moduli must be positive".into()));
        }
        if self.nu12 * self.nu21() >= 1.0 {
            return Err(Error::Domain(format!(
                "nu12*nu21 = {} >= 1",
                self.nu12 * self.nu21()
            )));
        }
        Ok(())
    }
}

/// 3x3 elasticity matrix in Voigt order (11, 22, 66), GPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticityMatrix2D {
    pub entries: [[f64; 3]; 3],
    pub state: PlaneState,
}

impl ElasticityMatrix2D {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    /// Checks symmetry and positive definiteness via leading minors.
    pub fn is_positive_definite(&self) -> bool {
        let c = &self.entries;
        let m1 = c[0][0];
        let m2 = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let m3 = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
        m1 > 0.0 && m2 > 0.0 && m3 > 0.0
    }
}

/// Volume fraction from mass fraction: phi_m = rho_f phi / (rho_f phi + rho_m (1-phi)).
pub fn mass_to_volume_fraction(phi_m: f64, rho_f: f64, rho_m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi_m) {
        return Err(Error::Domain(format!(
            "mass fraction must lie in [0, 1], got {phi_m}"
        )));
    }
    if rho_f <= 0.0 || rho_m <= 0.0 {
        return Err(Error::Domain("densities must be positive".into()));
    }
    Ok(phi_m * rho_m / (rho_f - phi_m * rho_f + phi_m * rho_m))
}

/// Inverse of [`mass_to_volume_fraction`].
pub fn volume_to_mass_fraction(phi: f64, rho_f: f64, rho_m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::Domain(format!(
            "volume fraction must lie in [0, 1], got {phi}"
        )));
    }
    if rho_f <= 0.0 || rho_m <= 0.0 {
        return Err(Error::Domain("densities must be positive".into()));
    }
    Ok(rho_f * phi / (rho_f * phi + rho_m * (1.0 - phi)))
}

/// Eshelby tensor components for a prolate spheroid (aspect ratio > 1)
/// embedded in an isotropic matrix with Poisson ratio `nu0`.
#[derive(Debug, Clone, Copy)]
pub struct EshelbyProlate {
    pub s1111: f64,
    pub s2222: f64,
    pub s2233: f64,
    pub s2211: f64,
    pub s1122: f64,
    pub s2323: f64,
    pub s1212: f64,
}

impl EshelbyProlate {
    pub fn new(aspect_ratio: f64, nu0: f64) -> Result<Self> {
        if aspect_ratio <= 1.0 || aspect_ratio.is_nan() {
            return Err(Error::Domain(format!(
                "prolate branch requires aspect ratio > 1, got {aspect_ratio}"
            )));
        }
        let p = aspect_ratio;
        let e = p * p - 1.0;
        let g = p / e.powf(1.5) * (p * e.sqrt() - p.acosh());
        let q = 1.0 / (2.0 * (1.0 - nu0));
        let k = 1.0 - 2.0 * nu0;
        let s1111 = q * (k + (3.0 * p * p - 1.0) / e - (k + 3.0 * p * p / e) * g);
        let s2222 = 0.75 * q * (p * p / e) + 0.5 * q * (k - 9.0 / (4.0 * e)) * g;
        let s2233 = 0.5 * q * (p * p / (2.0 * e) - (k + 3.0 / (4.0 * e)) * g);
        let s2211 = -q * (p * p / e) + 0.5 * q * (3.0 * p * p / e - k) * g;
        let s1122 = -q * (k + 1.0 / e) + q * (k + 3.0 / (2.0 * e)) * g;
        let s2323 = 0.5 * q * (p * p / (2.0 * e) + (k - 3.0 / (4.0 * e)) * g);
        let s1212 = 0.5 * q * (k - (p * p + 1.0) / e - 0.5 * (k - 3.0 * (p * p + 1.0) / e) * g);
        Ok(Self {
            s1111,
            s2222,
            s2233,
            s2211,
            s1122,
            s2323,
            s1212,
        })
    }
}

fn check_fraction_and_aspect(aspect_ratio: f64, phi: f64) -> Result<()> {
    if aspect_ratio <= 1.0 || aspect_ratio.is_nan() {
        return Err(Error::Domain(format!(
            "aspect ratio must exceed 1 (prolate branch), got {aspect_ratio}"
        )));
    }
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::Domain(format!(
            "fiber volume fraction must lie in [0, 1), got {phi}"
        )));
    }
    Ok(())
}

fn matrix_constants(matrix: &IsotropicMaterial) -> EngineeringConstants {
    let g = matrix.shear_modulus();
    EngineeringConstants {
        e1: matrix.young_modulus,
        e2: matrix.young_modulus,
        g12: g,
        g23: g,
        nu12: matrix.poisson_ratio,
    }
}

/// Tandon-Weng engineering constants for aligned prolate fibers, with the
/// decoupled in-plane Poisson ratio due to Tucker and Liang.
pub fn tandon_weng_constants(
    matrix: &IsotropicMaterial,
    fiber: &IsotropicMaterial,
    aspect_ratio: f64,
    phi: f64,
) -> Result<EngineeringConstants> {
    check_fraction_and_aspect(aspect_ratio, phi)?;
    if phi == 0.0 {
        return Ok(matrix_constants(matrix));
    }
    let s = EshelbyProlate::new(aspect_ratio, matrix.poisson_ratio)?;
    let (lam0, mu0) = (matrix.lame_lambda(), matrix.shear_modulus());
    let (lam1, mu1) = (fiber.lame_lambda(), fiber.shear_modulus());
    let nu0 = matrix.poisson_ratio;
    let e0 = matrix.young_modulus;

    let d1 = 1.0 + 2.0 * (mu1 - mu0) / (lam1 - lam0);
    let d2 = (lam0 + 2.0 * mu0) / (lam1 - lam0);
    let d3 = lam0 / (lam1 - lam0);

    let b1 = phi * d1 + d2 + (1.0 - phi) * (d1 * s.s1111 + 2.0 * s.s2211);
    let b2 = phi + d3 + (1.0 - phi) * (d1 * s.s1122 + s.s2222 + s.s2233);
    let b3 = phi + d3 + (1.0 - phi) * (s.s1111 + (1.0 + d1) * s.s2211);
    let b4 = phi * d1 + d2 + (1.0 - phi) * (s.s1122 + d1 * s.s2222 + s.s2233);
    let b5 = phi + d3 + (1.0 - phi) * (s.s1122 + s.s2222 + d1 * s.s2233);

    let a1 = d1 * (b4 + b5) - 2.0 * b2;
    let a2 = (1.0 + d1) * b2 - (b4 + b5);
    let a3 = b1 - d1 * b3;
    let a4 = (1.0 + d1) * b1 - 2.0 * b3;
    let a5 = (1.0 - d1) / (b4 - b5);
    let a = 2.0 * b2 * b3 - b1 * (b4 + b5);

    let e1 = e0 / (1.0 + phi * (a1 + 2.0 * nu0 * a2) / a);
    let e2 = e0
        / (1.0
            + phi * (-2.0 * nu0 * a3 + (1.0 - nu0) * a4 + (1.0 + nu0) * a5 * a) / (2.0 * a));
    let g12 = mu0 * (1.0 + phi / (mu0 / (mu1 - mu0) + 2.0 * (1.0 - phi) * s.s1212));
    let g23 = mu0 * (1.0 + phi / (mu0 / (mu1 - mu0) + 2.0 * (1.0 - phi) * s.s2323));
    let nu12 = (nu0 * a - phi * (a3 - nu0 * a4)) / (a + phi * (a1 + 2.0 * nu0 * a2));

    let c = EngineeringConstants {
        e1,
        e2,
        g12,
        g23,
        nu12,
    };
    c.validate()?;
    Ok(c)
}

fn halpin_tsai_modulus(m_f: f64, m_m: f64, zeta: f64, phi: f64) -> f64 {
    let eta = (m_f / m_m - 1.0) / (m_f / m_m + zeta);
    m_m * (1.0 + zeta * eta * phi) / (1.0 - eta * phi)
}

/// Halpin-Tsai engineering constants. Only E1 depends on the fiber
/// geometry (zeta = 2 l/d); E2 uses zeta = 2, G12 zeta = 1, G23 the
/// matrix-dominated zeta = K_m/(K_m + 2 G_m) with the plane-strain bulk
/// modulus K_m, and nu12 the rule of mixtures.
pub fn halpin_tsai_constants(
    matrix: &IsotropicMaterial,
    fiber: &IsotropicMaterial,
    aspect_ratio: f64,
    phi: f64,
) -> Result<EngineeringConstants> {
    check_fraction_and_aspect(aspect_ratio, phi)?;
    if phi == 0.0 {
        return Ok(matrix_constants(matrix));
    }
    let gm = matrix.shear_modulus();
    let gf = fiber.shear_modulus();
    let km = matrix.young_modulus
        / (2.0 * (1.0 + matrix.poisson_ratio) * (1.0 - 2.0 * matrix.poisson_ratio));
    let c = EngineeringConstants {
        e1: halpin_tsai_modulus(
            fiber.young_modulus,
            matrix.young_modulus,
            2.0 * aspect_ratio,
            phi,
        ),
        e2: halpin_tsai_modulus(fiber.young_modulus, matrix.young_modulus, 2.0, phi),
        g12: halpin_tsai_modulus(gf, gm, 1.0, phi),
        g23: halpin_tsai_modulus(gf, gm, km / (km + 2.0 * gm), phi),
        nu12: phi * fiber.poisson_ratio + (1.0 - phi) * matrix.poisson_ratio,
    };
    c.validate()?;
    Ok(c)
}

/// Reduced elasticity matrix for a plane stress state.
pub fn plane_stress_matrix(c: &EngineeringConstants) -> Result<ElasticityMatrix2D> {
    c.validate()?;
    let nu21 = c.nu21();
    let den = 1.0 - c.nu12 * nu21;
    if den <= 0.0 {
        return Err(Error::Singular(format!("1 - nu12*nu21 = {den} <= 0")));
    }
    Ok(ElasticityMatrix2D {
        entries: [
            [c.e1 / den, nu21 * c.e1 / den, 0.0],
            [nu21 * c.e1 / den, c.e2 / den, 0.0],
            [0.0, 0.0, c.g12],
        ],
        state: PlaneState::PlaneStress,
    })
}

/// Reduced elasticity matrix for a plane strain state; involves nu23.
pub fn plane_strain_matrix(c: &EngineeringConstants) -> Result<ElasticityMatrix2D> {
    c.validate()?;
    let nu21 = c.nu21();
    let nu23 = c.nu23();
    let den = 1.0 - nu23 - 2.0 * c.nu12 * nu21;
    if den <= 0.0 {
        return Err(Error::Singular(format!(
            "1 - nu23 - 2 nu12 nu21 = {den} <= 0"
        )));
    }
    let c11 = (1.0 - nu23 * nu23) * c.e1 / ((1.0 + nu23) * den);
    let c12 = nu21 * c.e1 / den;
    let c22 = (1.0 - c.nu12 * nu21) * c.e2 / ((1.0 + nu23) * den);
    Ok(ElasticityMatrix2D {
        entries: [[c11, c12, 0.0], [c12, c22, 0.0], [0.0, 0.0, c.g12]],
        state: PlaneState::PlaneStrain,
    })
}

/// In-plane rotation transformation matrix for the reduced elasticity matrix.
pub fn transformation_matrix(theta: f64) -> [[f64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    [
        [c * c, s * s, 2.0 * c * s],
        [s * s, c * c, -2.0 * c * s],
        [-c * s, c * s, c * c - s * s],
    ]
}

/// Rotates the elasticity matrix from the local (fiber) to the global
/// frame: C' = T C T^T.
pub fn rotate_matrix(c: &ElasticityMatrix2D, theta: f64) -> ElasticityMatrix2D {
    let t = transformation_matrix(theta);
    let mut tc = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                tc[i][j] += t[i][k] * c.entries[k][j];
            }
        }
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += tc[i][k] * t[j][k];
            }
        }
    }
    ElasticityMatrix2D {
        entries: out,
        state: c.state,
    }
}

/// Inverts the plane-stress relations for E1, E2, nu12, G12. The shear
/// couplings C16, C26 are ignored (orthotropic projection) and `g23`
/// passes through unchanged: the thickness-direction properties are
/// assumed unaffected by the in-plane rotation.
pub fn extract_constants_plane_stress(
    c: &ElasticityMatrix2D,
    g23: f64,
) -> Result<EngineeringConstants> {
    if c.state != PlaneState::PlaneStress {
        return Err(Error::Domain(
            "plane-strain extraction requires an explicit nu23; use extract_constants_plane_strain"
                .into(),
        ));
    }
    let (c11, c12, c22, c66) = (
        c.entries[0][0],
        0.5 * (c.entries[0][1] + c.entries[1][0]),
        c.entries[1][1],
        c.entries[2][2],
    );
    if c11 <= 0.0 || c22 <= 0.0 {
        return Err(Error::Singular("non-positive diagonal".into()));
    }
    let nu21 = c12 / c11;
    let nu12 = c12 / c22;
    let den = 1.0 - nu12 * nu21;
    if den <= 0.0 {
        return Err(Error::Singular(format!("1 - nu12*nu21 = {den} <= 0")));
    }
    Ok(EngineeringConstants {
        e1: c11 * den,
        e2: c22 * den,
        g12: c66,
        g23,
        nu12,
    })
}

/// Plane-strain counterpart of [`extract_constants_plane_stress`]; needs a
/// fixed out-of-plane Poisson ratio to close the system.
pub fn extract_constants_plane_strain(
    c: &ElasticityMatrix2D,
    nu23: f64,
) -> Result<EngineeringConstants> {
    if c.state != PlaneState::PlaneStrain {
        return Err(Error::Domain("matrix is not tagged plane strain".into()));
    }
    let (c11, c12, c22, c66) = (
        c.entries[0][0],
        0.5 * (c.entries[0][1] + c.entries[1][0]),
        c.entries[1][1],
        c.entries[2][2],
    );
    if c11 <= 0.0 || c22 <= 0.0 || nu23 <= -1.0 {
        return Err(Error::Singular("degenerate plane-strain matrix".into()));
    }
    let nu21 = (c12 / c11) * (1.0 - nu23);
    let q = c12 / c22;
    let nu12 = q / ((1.0 + nu23) + q * nu21);
    let den = 1.0 - nu23 - 2.0 * nu12 * nu21;
    if den <= 0.0 {
        return Err(Error::Singular(format!(
            "1 - nu23 - 2 nu12 nu21 = {den} <= 0"
        )));
    }
    let e1 = c11 * den / (1.0 - nu23);
    let e2 = c22 * (1.0 + nu23) * den / (1.0 - nu12 * nu21);
    let g23 = e2 / (2.0 * (1.0 + nu23));
    Ok(EngineeringConstants {
        e1,
        e2,
        g12: c66,
        g23,
        nu12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const TOL_TABLE: f64 = 0.05;

    fn table1() -> (IsotropicMaterial, IsotropicMaterial) {
        (presets::pbt_matrix(), presets::glass_fiber())
    }

    #[test]
    fn mass_volume_fraction_paper_value() {
        let phi = mass_to_volume_fraction(0.30, 2500.0, 1300.0).unwrap();
        assert!((phi - 0.1822).abs() < 5e-5, "phi = {phi}");
        assert_eq!(mass_to_volume_fraction(0.0, 2500.0, 1300.0).unwrap(), 0.0);
        assert_eq!(mass_to_volume_fraction(1.0, 2500.0, 1300.0).unwrap(), 1.0);
        assert!(mass_to_volume_fraction(1.5, 2500.0, 1300.0).is_err());
    }

    #[test]
    fn fraction_round_trip() {
        for phi_m in [0.05, 0.3, 0.77] {
            let phi = mass_to_volume_fraction(phi_m, 2500.0, 1300.0).unwrap();
            let back = volume_to_mass_fraction(phi, 2500.0, 1300.0).unwrap();
            assert!((back - phi_m).abs() < 1e-14);
        }
    }

    #[test]
    fn tandon_weng_table2_row() {
        let (m, f) = table1();
        let c = tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        assert!((c.e1 - 12.4).abs() < TOL_TABLE, "E1 = {}", c.e1);
        assert!((c.e2 - 3.99).abs() < TOL_TABLE, "E2 = {}", c.e2);
        assert!((c.g12 - 1.31).abs() < TOL_TABLE, "G12 = {}", c.g12);
        assert!((c.g23 - 1.26).abs() < TOL_TABLE, "G23 = {}", c.g23);
        assert!((c.nu12 - 0.379).abs() < 0.005, "nu12 = {}", c.nu12);
    }

    // Frozen by an independent Mori-Tanaka tensor evaluation; see the
    // micromech_oracle integration test for the full 6x6 route.
    #[test]
    fn tandon_weng_frozen_fraction_sweep() {
        let (m, f) = table1();
        let cases = [
            (0.10, 7.8566463129, 3.4133256398, 1.1144282158, 1.0893684903, 0.3931263244),
            (0.30, 19.1803203620, 4.9615205321, 1.6498504068, 1.5566731835, 0.3583701762),
        ];
        for (phi, e1, e2, g12, g23, nu12) in cases {
            let c = tandon_weng_constants(&m, &f, 260.0 / 10.9, phi).unwrap();
            assert!((c.e1 - e1).abs() < 1e-8);
            assert!((c.e2 - e2).abs() < 1e-8);
            assert!((c.g12 - g12).abs() < 1e-8);
            assert!((c.g23 - g23).abs() < 1e-8);
            assert!((c.nu12 - nu12).abs() < 1e-8);
        }
    }

    #[test]
    fn tandon_weng_zero_fraction_is_matrix() {
        let (m, f) = table1();
        let c = tandon_weng_constants(&m, &f, 20.0, 0.0).unwrap();
        assert_eq!(c.e1, m.young_modulus);
        assert_eq!(c.e2, m.young_modulus);
        assert_eq!(c.g12, m.shear_modulus());
        assert_eq!(c.nu12, m.poisson_ratio);
    }

    #[test]
    fn tandon_weng_rejects_oblate_and_full_fraction() {
        let (m, f) = table1();
        assert!(tandon_weng_constants(&m, &f, 0.5, 0.2).is_err());
        assert!(tandon_weng_constants(&m, &f, 20.0, 1.0).is_err());
    }

    #[test]
    fn halpin_tsai_table2_row() {
        let (m, f) = table1();
        let c = halpin_tsai_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        assert!((c.e1 - 11.2).abs() < TOL_TABLE, "E1 = {}", c.e1);
        assert!((c.e2 - 4.12).abs() < TOL_TABLE, "E2 = {}", c.e2);
        assert!((c.g12 - 1.30).abs() < TOL_TABLE, "G12 = {}", c.g12);
        assert!((c.g23 - 1.25).abs() < TOL_TABLE, "G23 = {}", c.g23);
        assert!((c.nu12 - 0.375).abs() < 0.005, "nu12 = {}", c.nu12);
    }

    #[test]
    fn halpin_tsai_e1_hand_check() {
        // zeta = 2*(260/10.9), eta = (26.923-1)/(26.923+zeta),
        // E1 = 2.6 (1 + zeta eta phi)/(1 - eta phi) = 11.16 GPa.
        let (m, f) = table1();
        let c = halpin_tsai_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        assert!((c.e1 - 11.16).abs() < 0.01, "E1 = {}", c.e1);
    }

    #[test]
    fn model_deviation_matches_table2() {
        let (m, f) = table1();
        let tw = tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        let ht = halpin_tsai_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        assert!((tw.e1 - ht.e1).abs() <= 1.3);
        assert!((tw.g12 - ht.g12).abs() <= 0.02);
    }

    #[test]
    fn e1_monotone_in_fraction() {
        let (m, f) = table1();
        for model in [tandon_weng_constants, halpin_tsai_constants] {
            let mut prev = 0.0;
            for i in 0..=30 {
                let phi = i as f64 * 0.01;
                let c = model(&m, &f, 260.0 / 10.9, phi).unwrap();
                assert!(c.e1 > prev, "E1 not increasing at phi = {phi}");
                prev = c.e1;
            }
        }
    }

    #[test]
    fn plane_stress_table5_rows() {
        let (m, f) = table1();
        let tw = plane_stress_matrix(&tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap())
            .unwrap();
        assert!((tw.get(0, 0) - 13.0).abs() < TOL_TABLE, "C11 = {}", tw.get(0, 0));
        assert!((tw.get(0, 1) - 1.59).abs() < TOL_TABLE);
        assert!((tw.get(1, 1) - 4.18).abs() < TOL_TABLE);
        assert!((tw.get(2, 2) - 1.31).abs() < TOL_TABLE);
        assert_eq!(tw.get(0, 1), tw.get(1, 0));
        assert!(tw.is_positive_definite());
    }

    #[test]
    fn plane_stress_isotropic_reduction() {
        let mat = IsotropicMaterial::new(2.6, 0.41, 1300.0).unwrap();
        let g = mat.shear_modulus();
        let c = plane_stress_matrix(&EngineeringConstants {
            e1: 2.6,
            e2: 2.6,
            g12: g,
            g23: g,
            nu12: 0.41,
        })
        .unwrap();
        let want = mat.elasticity_matrix(PlaneState::PlaneStress);
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.get(i, j) - want.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_strain_frozen_and_isotropic() {
        let (m, f) = table1();
        let tw = tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        let c = plane_strain_matrix(&tw).unwrap();
        // Frozen from inverting the full 6x6 transversely isotropic
        // compliance restricted to plane strain.
        assert!((c.get(0, 0) - 15.9822949938).abs() < 1e-8);
        assert!((c.get(0, 1) - 4.7601460202).abs() < 1e-8);
        assert!((c.get(1, 1) - 7.5351539708).abs() < 1e-8);
        assert!((c.get(2, 2) - 1.3051894274).abs() < 1e-8);

        let mat = IsotropicMaterial::new(5.0, 0.3, 1000.0).unwrap();
        let g = mat.shear_modulus();
        let iso = plane_strain_matrix(&EngineeringConstants {
            e1: 5.0,
            e2: 5.0,
            g12: g,
            g23: g,
            nu12: 0.3,
        })
        .unwrap();
        let want = mat.elasticity_matrix(PlaneState::PlaneStrain);
        for i in 0..3 {
            for j in 0..3 {
                assert!((iso.get(i, j) - want.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_strain_degenerate_nu23() {
        // e2 = 2 g23 (1 + nu23) with nu23 pushed so the denominator closes.
        let c = EngineeringConstants {
            e1: 10.0,
            e2: 4.0,
            g12: 1.3,
            g23: 1.0,
            nu12: 0.05,
        };
        // nu23 = 1.0 here, so 1 - nu23 - 2 nu12 nu21 < 0.
        assert!(plane_strain_matrix(&c).is_err());
    }

    #[test]
    fn rotation_identity_and_axis_swap() {
        let (m, f) = table1();
        let c = plane_stress_matrix(&tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap())
            .unwrap();
        let r0 = rotate_matrix(&c, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert!((r0.get(i, j) - c.get(i, j)).abs() < 1e-14);
            }
        }
        let r90 = rotate_matrix(&c, std::f64::consts::FRAC_PI_2);
        assert!((r90.get(0, 0) - c.get(1, 1)).abs() < 1e-12);
        assert!((r90.get(1, 1) - c.get(0, 0)).abs() < 1e-12);
        assert!((r90.get(2, 2) - c.get(2, 2)).abs() < 1e-12);
        assert!(r90.get(0, 2).abs() < 1e-12);
        assert!(r90.get(1, 2).abs() < 1e-12);
    }

    #[test]
    fn rotation_45_frozen_products() {
        let (m, f) = table1();
        let c = plane_stress_matrix(&tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap())
            .unwrap();
        let r = rotate_matrix(&c, std::f64::consts::FRAC_PI_4);
        // Frozen from explicit 3x3 matrix products evaluated independently.
        assert!((r.get(0, 0) - 6.3885440540).abs() < 1e-8);
        assert!((r.get(0, 1) - 3.7781651992).abs() < 1e-8);
        assert!((r.get(0, 2) - -2.1974283526).abs() < 1e-8);
        assert!((r.get(2, 2) - 3.4969798627).abs() < 1e-8);
        assert!(r.is_positive_definite());
    }

    #[test]
    fn extraction_round_trip() {
        let (m, f) = table1();
        let want = tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        let c = plane_stress_matrix(&want).unwrap();
        let got = extract_constants_plane_stress(&c, want.g23).unwrap();
        assert!((got.e1 - want.e1).abs() / want.e1 < 1e-12);
        assert!((got.e2 - want.e2).abs() / want.e2 < 1e-12);
        assert!((got.g12 - want.g12).abs() / want.g12 < 1e-12);
        assert!((got.nu12 - want.nu12).abs() < 1e-12);

        let cs = plane_strain_matrix(&want).unwrap();
        let got = extract_constants_plane_strain(&cs, want.nu23()).unwrap();
        assert!((got.e1 - want.e1).abs() / want.e1 < 1e-10);
        assert!((got.e2 - want.e2).abs() / want.e2 < 1e-10);
        assert!((got.nu12 - want.nu12).abs() < 1e-10);
        assert!((got.g23 - want.g23).abs() / want.g23 < 1e-10);
    }

    #[test]
    fn extraction_refuses_wrong_state() {
        let (m, f) = table1();
        let tw = tandon_weng_constants(&m, &f, 260.0 / 10.9, 0.1822).unwrap();
        let cs = plane_strain_matrix(&tw).unwrap();
        assert!(extract_constants_plane_stress(&cs, tw.g23).is_err());
    }
}
