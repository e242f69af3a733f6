//! Default material data and fiber statistics for the glass/PBT compound
//! all built-in experiment recipes are based on.

use crate::material::IsotropicMaterial;
use crate::stochastic::{EllipticOrientationParams, NormalParams, WeibullParams};

/// E = 70 GPa, nu = 0.22, rho = 2500 kg/m^3.
pub fn glass_fiber() -> IsotropicMaterial {
    IsotropicMaterial {
        young_modulus: 70.0,
        poisson_ratio: 0.22,
        density: 2500.0,
    }
}

/// E = 2.6 GPa, nu = 0.41, rho = 1300 kg/m^3.
pub fn pbt_matrix() -> IsotropicMaterial {
    IsotropicMaterial {
        young_modulus: 2.6,
        poisson_ratio: 0.41,
        density: 1300.0,
    }
}

/// Fiber length distribution, Weibull(a = 292 um, b = 1.96); mean 260 um.
pub fn fiber_length_distribution() -> WeibullParams {
    WeibullParams {
        scale: 292.0,
        shape: 1.96,
    }
}

/// Fiber diameter distribution, Normal(10.9 um, 0.9 um).
pub fn fiber_diameter_distribution() -> NormalParams {
    NormalParams {
        mean: 10.9,
        std: 0.9,
    }
}

/// Fiber orientation distribution, elliptic with semi-axis ratio 22.1.
pub fn fiber_orientation_distribution() -> EllipticOrientationParams {
    EllipticOrientationParams::new(22.1).expect("valid axis ratio")
}

/// Mean fiber length [um].
pub const MEAN_FIBER_LENGTH: f64 = 260.0;
/// Mean fiber diameter [um].
pub const MEAN_FIBER_DIAMETER: f64 = 10.9;
/// Overall fiber mass fraction of the compound.
pub const MASS_FRACTION: f64 = 0.30;
/// Fiber volume fraction equivalent to [`MASS_FRACTION`].
pub const VOLUME_FRACTION: f64 = 0.1822;
