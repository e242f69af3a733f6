//! Independent oracle for the short-fiber micromechanics constants: a
//! full 3D Mori-Tanaka estimate assembled in 6x6 Mandel notation from
//! the prolate-spheroid Eshelby tensor. The closed-form constants of the
//! main implementation must coincide with the tensor route to numerical
//! precision.

#![allow(clippy::needless_range_loop)]

use sfrc_core::material::{tandon_weng_constants, EshelbyProlate, IsotropicMaterial};

type M6 = [[f64; 6]; 6];

fn mat_mul(a: &M6, b: &M6) -> M6 {
    let mut c = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            for k in 0..6 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn mat_inv(a: &M6) -> M6 {
    // Gauss-Jordan with partial pivoting.
    let mut m = *a;
    let mut inv = [[0.0; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..6 {
        let piv = (col..6)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-14, "singular 6x6");
        for j in 0..6 {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..6 {
            if r != col {
                let f = m[r][col];
                for j in 0..6 {
                    m[r][j] -= f * m[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

fn identity() -> M6 {
    let mut i6 = [[0.0; 6]; 6];
    for (i, row) in i6.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    i6
}

/// Isotropic stiffness in Mandel notation, pair order
/// (11, 22, 33, 23, 13, 12).
fn isotropic_mandel(m: &IsotropicMaterial) -> M6 {
    let lam = m.lame_lambda();
    let mu = m.shear_modulus();
    let mut c = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = lam;
        }
        c[i][i] = lam + 2.0 * mu;
    }
    for i in 3..6 {
        // Mandel: sqrt(2)^2 * C_ijij = 2 mu.
        c[i][i] = 2.0 * mu;
    }
    c
}

/// Prolate-spheroid Eshelby tensor (symmetry axis 1) in Mandel notation.
fn eshelby_mandel(aspect: f64, nu0: f64) -> M6 {
    let s = EshelbyProlate::new(aspect, nu0).unwrap();
    let mut t = [[0.0; 6]; 6];
    t[0][0] = s.s1111;
    t[0][1] = s.s1122;
    t[0][2] = s.s1122;
    t[1][0] = s.s2211;
    t[2][0] = s.s2211;
    t[1][1] = s.s2222;
    t[2][2] = s.s2222;
    t[1][2] = s.s2233;
    t[2][1] = s.s2233;
    t[3][3] = 2.0 * s.s2323;
    t[4][4] = 2.0 * s.s1212;
    t[5][5] = 2.0 * s.s1212;
    t
}

struct MandelConstants {
    e1: f64,
    e2: f64,
    g12: f64,
    g23: f64,
    nu12: f64,
}

/// Mori-Tanaka stiffness for aligned spheroidal inclusions and the
/// engineering constants of the resulting transversely isotropic medium.
fn mori_tanaka_constants(
    matrix: &IsotropicMaterial,
    fiber: &IsotropicMaterial,
    aspect: f64,
    phi: f64,
) -> MandelConstants {
    let c0 = isotropic_mandel(matrix);
    let c1 = isotropic_mandel(fiber);
    let s = eshelby_mandel(aspect, matrix.poisson_ratio);
    let c0_inv = mat_inv(&c0);
    // Dilute strain concentration A = [I + S C0^-1 (C1 - C0)]^-1.
    let mut dc = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            dc[i][j] = c1[i][j] - c0[i][j];
        }
    }
    let mut t = mat_mul(&s, &mat_mul(&c0_inv, &dc));
    for (i, row) in t.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let a_dil = mat_inv(&t);
    // A_MT = A_dil [(1 - phi) I + phi A_dil]^-1.
    let mut mix = identity();
    for i in 0..6 {
        for j in 0..6 {
            mix[i][j] = (1.0 - phi) * mix[i][j] + phi * a_dil[i][j];
        }
    }
    let a_mt = mat_mul(&a_dil, &mat_inv(&mix));
    // C_MT = C0 + phi (C1 - C0) A_MT.
    let corr = mat_mul(&dc, &a_mt);
    let mut c = c0;
    for i in 0..6 {
        for j in 0..6 {
            c[i][j] += phi * corr[i][j];
        }
    }
    let compliance = mat_inv(&c);
    MandelConstants {
        e1: 1.0 / compliance[0][0],
        e2: 1.0 / compliance[1][1],
        nu12: -compliance[1][0] / compliance[0][0],
        g23: 1.0 / (2.0 * compliance[3][3]),
        g12: 1.0 / (2.0 * compliance[4][4]),
    }
}

#[test]
fn closed_form_constants_match_tensor_route() {
    let matrix = sfrc_core::presets::pbt_matrix();
    let fiber = sfrc_core::presets::glass_fiber();
    for &(aspect, phi) in &[
        (260.0 / 10.9, 0.1822),
        (260.0 / 10.9, 0.05),
        (260.0 / 10.9, 0.30),
        (5.0, 0.15),
        (50.0, 0.25),
        (1000.0, 0.1822),
    ] {
        let cf = tandon_weng_constants(&matrix, &fiber, aspect, phi).unwrap();
        let mt = mori_tanaka_constants(&matrix, &fiber, aspect, phi);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(cf.e1, mt.e1) < 1e-9, "E1 {} vs {}", cf.e1, mt.e1);
        assert!(rel(cf.e2, mt.e2) < 1e-9, "E2 {} vs {}", cf.e2, mt.e2);
        assert!(rel(cf.g12, mt.g12) < 1e-9, "G12 {} vs {}", cf.g12, mt.g12);
        assert!(rel(cf.g23, mt.g23) < 1e-9, "G23 {} vs {}", cf.g23, mt.g23);
        assert!(
            rel(cf.nu12, mt.nu12) < 1e-9,
            "nu12 {} vs {}",
            cf.nu12,
            mt.nu12
        );
    }
}

#[test]
fn tensor_route_reference_values() {
    // Frozen values for the compound's geometry and fraction.
    let mt = mori_tanaka_constants(
        &sfrc_core::presets::pbt_matrix(),
        &sfrc_core::presets::glass_fiber(),
        260.0 / 10.9,
        0.1822,
    );
    assert!((mt.e1 - 12.3739253365).abs() < 1e-9);
    assert!((mt.e2 - 3.9915241957).abs() < 1e-9);
    assert!((mt.g12 - 1.3051894274).abs() < 1e-9);
    assert!((mt.g23 - 1.2555894347).abs() < 1e-9);
    assert!((mt.nu12 - 0.3790187992).abs() < 1e-9);
}
