//! Probability densities, seeded samplers, discrete moment and correlation
//! estimators, and maximum-likelihood distribution fitting.
//!
//! All random streams are `ChaCha8` instances derived deterministically
//! from a master seed, one independent substream per realization index.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Two-parameter Weibull distribution (scale in um).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub scale: f64,
    pub shape: f64,
}

/// Normal distribution (um).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mean: f64,
    pub std: f64,
}

/// Elliptic orientation density on [-pi/2, pi/2), parameterized by the
/// semi-axis ratio h1/h2 (h2 fixed to 1, density normalized numerically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticOrientationParams {
    pub axis_ratio: f64,
    /// Normalization constant so the density integrates to one.
    pub norm: f64,
}

impl EllipticOrientationParams {
    pub fn new(axis_ratio: f64) -> Result<Self> {
        if axis_ratio < 1.0 || axis_ratio.is_nan() {
            return Err(Error::Domain(format!(
                "axis ratio must be >= 1, got {axis_ratio}"
            )));
        }
        let mut p = Self {
            axis_ratio,
            norm: 1.0,
        };
        p.norm = simpson(|t| p.unnormalized(t), -FRAC_PI_2, FRAC_PI_2, 1 << 14);
        Ok(p)
    }

    fn unnormalized(&self, theta: f64) -> f64 {
        let k2 = 1.0 - 1.0 / (self.axis_ratio * self.axis_ratio);
        1.0 / (1.0 - k2 * theta.cos().powi(2)).sqrt()
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Weibull probability density (b/a)(l/a)^(b-1) exp(-(l/a)^b).
pub fn weibull_pdf(l: f64, p: &WeibullParams) -> Result<f64> {
    if l < 0.0 {
        return Err(Error::Domain(format!("length must be >= 0, got {l}")));
    }
    let z = l / p.scale;
    if l == 0.0 {
        // Finite only for b >= 1; the b > 1 case used here gives 0.
        return Ok(if p.shape > 1.0 {
            0.0
        } else if p.shape == 1.0 {
            1.0 / p.scale
        } else {
            f64::INFINITY
        });
    }
    Ok(p.shape / p.scale * z.powf(p.shape - 1.0) * (-z.powf(p.shape)).exp())
}

/// Normal probability density.
pub fn normal_pdf(x: f64, p: &NormalParams) -> f64 {
    let z = (x - p.mean) / p.std;
    (-0.5 * z * z).exp() / (p.std * (2.0 * PI).sqrt())
}

/// Normalized elliptic orientation density at `theta` (radians, per radian).
pub fn elliptic_pdf(theta: f64, p: &EllipticOrientationParams) -> Result<f64> {
    if !(-FRAC_PI_2..FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!(
            "orientation must lie in [-pi/2, pi/2), got {theta}"
        )));
    }
    Ok(p.unnormalized(theta) / p.norm)
}

/// Fiber length via the inverse Weibull CDF, a (-ln U)^(1/b).
pub fn sample_fiber_length<R: Rng>(rng: &mut R, p: &WeibullParams) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    p.scale * (-u.ln()).powf(1.0 / p.shape)
}

/// Fiber diameter from a truncated normal: non-positive draws and values
/// above mean + 6 std are rejected and resampled.
pub fn sample_fiber_diameter<R: Rng>(rng: &mut R, p: &NormalParams) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let d = p.mean + p.std * z;
        if d > 0.0 && d <= p.mean + 6.0 * p.std {
            return d;
        }
    }
}

/// Inverse-CDF sampler for the elliptic orientation density, tabulated on
/// a fixed grid over [-pi/2, pi/2) with linear interpolation.
#[derive(Debug, Clone)]
pub struct OrientationSampler {
    thetas: Vec<f64>,
    cdf: Vec<f64>,
}

const ORIENTATION_GRID: usize = 10_000;

impl OrientationSampler {
    pub fn new(p: &EllipticOrientationParams) -> Self {
        let n = ORIENTATION_GRID;
        let mut thetas = Vec::with_capacity(n + 1);
        let mut cdf = Vec::with_capacity(n + 1);
        let h = PI / n as f64;
        let mut acc = 0.0;
        let mut prev = p.unnormalized(-FRAC_PI_2);
        thetas.push(-FRAC_PI_2);
        cdf.push(0.0);
        for i in 1..=n {
            let t = -FRAC_PI_2 + i as f64 * h;
            let f = p.unnormalized(t);
            acc += 0.5 * (prev + f) * h;
            prev = f;
            thetas.push(t);
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { thetas, cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        (t0 + w * (t1 - t0)).min(FRAC_PI_2 - f64::EPSILON)
    }

    /// Tabulated CDF evaluated at `theta` (linear interpolation).
    pub fn cdf(&self, theta: f64) -> f64 {
        let i = self
            .thetas
            .partition_point(|&t| t < theta)
            .clamp(1, self.thetas.len() - 1);
        let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
        let w = ((theta - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }
}

/// Fiber orientation in radians, drawn from the tabulated inverse CDF.
pub fn sample_fiber_orientation<R: Rng>(rng: &mut R, sampler: &OrientationSampler) -> f64 {
    sampler.sample(rng)
}

/// Discrete mean and population variance, s^2 = mean(Z^2) - mean(Z)^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    pub count: usize,
}

impl SampleStats {
    pub fn compute(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 values, got {}",
                values.len()
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance =
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(0.0);
        Ok(Self {
            mean,
            variance,
            std: variance.sqrt(),
            count: values.len(),
        })
    }
}

/// Dimensionless correlation coefficient,
/// mean[(z1 - mean z1)(z2 - mean z2)] / (s1 s2), population convention.
pub fn correlation_coefficient(z1: &[f64], z2: &[f64]) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(Error::InsufficientData(format!(
            "length mismatch: {} vs {}",
            z1.len(),
            z2.len()
        )));
    }
    let s1 = SampleStats::compute(z1)?;
    let s2 = SampleStats::compute(z2)?;
    if s1.std == 0.0 || s2.std == 0.0 {
        return Err(Error::InsufficientData(
            "correlation undefined for zero-variance input".into(),
        ));
    }
    if z1 == z2 {
        return Ok(1.0);
    }
    let n = z1.len() as f64;
    let cov = z1
        .iter()
        .zip(z2)
        .map(|(a, b)| (a - s1.mean) * (b - s2.mean))
        .sum::<f64>()
        / n;
    Ok((cov / (s1.std * s2.std)).clamp(-1.0, 1.0))
}

/// Preferred family of a maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreferredFamily {
    Weibull,
    Normal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionFit {
    pub weibull: Option<WeibullParams>,
    pub normal: NormalParams,
    pub log_likelihood_weibull: Option<f64>,
    pub log_likelihood_normal: f64,
    pub preferred: PreferredFamily,
}

const MLE_TOL: f64 = 1e-10;
const MLE_MAX_ITER: usize = 200;

/// Weibull shape equation residual at shape `b`:
/// sum(x^b ln x)/sum(x^b) - 1/b - mean(ln x).
fn weibull_shape_residual(values: &[f64], log_mean: f64, b: f64) -> f64 {
    let mut sw = 0.0;
    let mut swl = 0.0;
    for &x in values {
        let xb = x.powf(b);
        sw += xb;
        swl += xb * x.ln();
    }
    swl / sw - 1.0 / b - log_mean
}

/// Maximum-likelihood Weibull fit, shape solved by bisection refined by
/// Newton steps on the profiled shape equation.
pub fn fit_weibull_mle(values: &[f64]) -> Result<(WeibullParams, f64)> {
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("Weibull fit requires positive values".into()));
    }
    let n = values.len() as f64;
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    // The residual is increasing in 1/b direction; bracket the root.
    let (mut lo, mut hi) = (1e-3, 1.0);
    while weibull_shape_residual(values, log_mean, hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InsufficientData(
                "degenerate likelihood: no Weibull shape root".into(),
            ));
        }
    }
    let mut b = 0.5 * (lo + hi);
    for _ in 0..MLE_MAX_ITER {
        let r = weibull_shape_residual(values, log_mean, b);
        if r > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let next = 0.5 * (lo + hi);
        if (next - b).abs() < MLE_TOL * b.max(1.0) {
            b = next;
            break;
        }
        b = next;
    }
    let a = (values.iter().map(|v| v.powf(b)).sum::<f64>() / n).powf(1.0 / b);
    let log_lik = n * (b.ln() - b * a.ln()) + (b - 1.0) * values.iter().map(|v| v.ln()).sum::<f64>()
        - values.iter().map(|v| (v / a).powf(b)).sum::<f64>();
    Ok((WeibullParams { scale: a, shape: b }, log_lik))
}

/// Maximum-likelihood normal fit (population std).
pub fn fit_normal_mle(values: &[f64]) -> Result<(NormalParams, f64)> {
    let stats = SampleStats::compute(values)?;
    if stats.std == 0.0 {
        return Err(Error::InsufficientData(
            "degenerate likelihood: constant sequence".into(),
        ));
    }
    let n = values.len() as f64;
    let log_lik = -0.5 * n * ((2.0 * PI * stats.variance).ln() + 1.0);
    Ok((
        NormalParams {
            mean: stats.mean,
            std: stats.std,
        },
        log_lik,
    ))
}

/// Fits both families and prefers the one with the larger log-likelihood.
/// Non-positive values disable the Weibull branch.
pub fn fit_distribution(values: &[f64]) -> Result<DistributionFit> {
    if values.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "need at least 50 values for a fit, got {}",
            values.len()
        )));
    }
    let (normal, ll_n) = fit_normal_mle(values)?;
    let weibull = if values.iter().all(|&v| v > 0.0) {
        Some(fit_weibull_mle(values)?)
    } else {
        None
    };
    let (weibull, ll_w, preferred) = match weibull {
        Some((w, ll_w)) => {
            let pref = if ll_w > ll_n {
                PreferredFamily::Weibull
            } else {
                PreferredFamily::Normal
            };
            (Some(w), Some(ll_w), pref)
        }
        None => (None, None, PreferredFamily::Normal),
    };
    Ok(DistributionFit {
        weibull,
        normal,
        log_likelihood_weibull: ll_w,
        log_likelihood_normal: ll_n,
        preferred,
    })
}

/// Published per-realization seed derivation: splitmix64 over
/// master_seed + (index + 1) * golden-gamma.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic random stream for one seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn weibull_pdf_zero_and_normalization() {
        let p = presets::fiber_length_distribution();
        assert_eq!(weibull_pdf(0.0, &p).unwrap(), 0.0);
        assert!(weibull_pdf(-1.0, &p).is_err());
        let integral = simpson(|l| weibull_pdf(l, &p).unwrap(), 0.0, 5000.0, 1 << 16);
        assert!((integral - 1.0).abs() < 1e-9, "integral = {integral}");
        // Mean a*Gamma(1 + 1/b) ~ 259 um by quadrature.
        let mean = simpson(|l| l * weibull_pdf(l, &p).unwrap(), 0.0, 5000.0, 1 << 16);
        assert!((mean - 259.0).abs() < 1.0, "mean = {mean}");
    }

    #[test]
    fn length_sampler_mean() {
        let p = presets::fiber_length_distribution();
        let mut rng = rng_from_seed(7);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| sample_fiber_length(&mut rng, &p))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 259.0).abs() < 1.0, "mean = {mean}");
    }

    #[test]
    fn diameter_sampler_moments() {
        let p = presets::fiber_diameter_distribution();
        let mut rng = rng_from_seed(11);
        let vals: Vec<f64> = (0..1_000_000)
            .map(|_| sample_fiber_diameter(&mut rng, &p))
            .collect();
        let s = SampleStats::compute(&vals).unwrap();
        assert!((s.mean - 10.9).abs() < 0.01, "mean = {}", s.mean);
        assert!((s.std - 0.9).abs() < 0.01, "std = {}", s.std);
        assert!(vals.iter().all(|&d| d > 0.0 && d <= 10.9 + 5.4));
    }

    #[test]
    fn elliptic_pdf_properties() {
        let uniform = EllipticOrientationParams::new(1.0).unwrap();
        let f = elliptic_pdf(0.3, &uniform).unwrap();
        assert!((f - 1.0 / PI).abs() < 1e-12);

        let p = presets::fiber_orientation_distribution();
        let integral = simpson(
            |t| p.unnormalized(t) / p.norm,
            -FRAC_PI_2,
            FRAC_PI_2,
            1 << 14,
        );
        assert!((integral - 1.0).abs() < 1e-8);
        // Peak-to-edge ratio equals the axis ratio.
        let ratio = elliptic_pdf(0.0, &p).unwrap()
            / elliptic_pdf(-FRAC_PI_2 + 1e-12, &p).unwrap();
        assert!((ratio - 22.1).abs() < 1e-6, "ratio = {ratio}");
        assert!(elliptic_pdf(FRAC_PI_2, &p).is_err());
    }

    #[test]
    fn orientation_sampler_matches_pdf() {
        let p = presets::fiber_orientation_distribution();
        let sampler = OrientationSampler::new(&p);
        let mut rng = rng_from_seed(3);
        let n = 1_000_000usize;
        let bins = 180;
        let mut hist = vec![0usize; bins];
        for _ in 0..n {
            let t = sampler.sample(&mut rng);
            let i = (((t + FRAC_PI_2) / PI) * bins as f64) as usize;
            hist[i.min(bins - 1)] += 1;
        }
        let width = PI / bins as f64;
        let mut max_err: f64 = 0.0;
        for (i, &count) in hist.iter().enumerate() {
            let mid = -FRAC_PI_2 + (i as f64 + 0.5) * width;
            let emp = count as f64 / (n as f64 * width);
            max_err = max_err.max((emp - elliptic_pdf(mid, &p).unwrap()).abs());
        }
        assert!(max_err < 0.01 * 22.1 / PI * 2.0, "Linf = {max_err}");
    }

    #[test]
    fn orientation_sampler_ks_statistic() {
        let p = presets::fiber_orientation_distribution();
        let sampler = OrientationSampler::new(&p);
        let mut rng = rng_from_seed(5);
        let n = 100_000usize;
        let mut samples: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &t) in samples.iter().enumerate() {
            let f = sampler.cdf(t);
            let e_hi = (i + 1) as f64 / n as f64;
            let e_lo = i as f64 / n as f64;
            ks = ks.max((f - e_hi).abs()).max((f - e_lo).abs());
        }
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn sample_stats_examples() {
        let s = SampleStats::compute(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 0.0);
        let s = SampleStats::compute(&[0.0, 2.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 1.0);
        assert!(SampleStats::compute(&[1.0]).is_err());
    }

    #[test]
    fn stats_recover_normal_moments() {
        let mut rng = rng_from_seed(17);
        let p = NormalParams {
            mean: 4.0,
            std: 2.0,
        };
        let n = 200_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                4.0 + 2.0 * z
            })
            .collect();
        let s = SampleStats::compute(&vals).unwrap();
        let se_mean = p.std / (n as f64).sqrt();
        assert!((s.mean - p.mean).abs() < 3.0 * se_mean);
        let se_var = p.std * p.std * (2.0 / n as f64).sqrt();
        assert!((s.variance - 4.0).abs() < 3.0 * se_var);
    }

    #[test]
    fn correlation_basics() {
        let z: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        assert!((correlation_coefficient(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlation_coefficient(&z, &neg).unwrap() + 1.0).abs() < 1e-12);
        let constant = vec![3.0; 100];
        assert!(correlation_coefficient(&z, &constant).is_err());
    }

    #[test]
    fn correlation_independent_streams() {
        let mut rng1 = rng_from_seed(derive_seed(42, 0));
        let mut rng2 = rng_from_seed(derive_seed(42, 1));
        let a: Vec<f64> = (0..500).map(|_| rng1.gen::<f64>()).collect();
        let b: Vec<f64> = (0..500).map(|_| rng2.gen::<f64>()).collect();
        let rho = correlation_coefficient(&a, &b).unwrap();
        assert!(rho.abs() < 0.15, "rho = {rho}");
    }

    #[test]
    fn fit_recovers_weibull() {
        let p = presets::fiber_length_distribution();
        let mut rng = rng_from_seed(23);
        let vals: Vec<f64> = (0..10_000).map(|_| sample_fiber_length(&mut rng, &p)).collect();
        let fit = fit_distribution(&vals).unwrap();
        assert_eq!(fit.preferred, PreferredFamily::Weibull);
        let w = fit.weibull.unwrap();
        assert!((w.scale - 292.0).abs() / 292.0 < 0.03, "a = {}", w.scale);
        assert!((w.shape - 1.96).abs() / 1.96 < 0.03, "b = {}", w.shape);
    }

    #[test]
    fn fit_recovers_normal() {
        let p = presets::fiber_diameter_distribution();
        let mut rng = rng_from_seed(29);
        let vals: Vec<f64> = (0..10_000)
            .map(|_| sample_fiber_diameter(&mut rng, &p))
            .collect();
        let fit = fit_distribution(&vals).unwrap();
        assert_eq!(fit.preferred, PreferredFamily::Normal);
    }

    #[test]
    fn fit_rejects_constant_sequence() {
        assert!(fit_distribution(&vec![2.0; 100]).is_err());
    }

    #[test]
    fn weibull_mle_consistency() {
        let p = presets::fiber_length_distribution();
        let mut errs = Vec::new();
        for (seed, n) in [(1u64, 1_000usize), (2, 10_000), (3, 100_000)] {
            let mut rng = rng_from_seed(seed);
            let vals: Vec<f64> = (0..n).map(|_| sample_fiber_length(&mut rng, &p)).collect();
            let (w, _) = fit_weibull_mle(&vals).unwrap();
            errs.push(((w.scale - 292.0) / 292.0).abs() + ((w.shape - 1.96) / 1.96).abs());
        }
        assert!(errs[0] > errs[2], "errors not shrinking: {errs:?}");
    }

    #[test]
    fn samplers_deterministic_given_seed() {
        let p = presets::fiber_length_distribution();
        let a: Vec<f64> = {
            let mut rng = rng_from_seed(99);
            (0..100).map(|_| sample_fiber_length(&mut rng, &p)).collect()
        };
        let b: Vec<f64> = {
            let mut rng = rng_from_seed(99);
            (0..100).map(|_| sample_fiber_length(&mut rng, &p)).collect()
        };
        assert_eq!(a, b);
    }
}
