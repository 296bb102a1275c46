//! Exact samplers for the gamma-Poisson generator: Marsaglia-Tsang gamma
//! (with the shape < 1 boost transform), Poisson by inversion for small
//! means and transformed rejection (PTRS) for large ones, and a polar
//! standard normal. No normal approximations anywhere; the counts are tiny
//! and the samplers stay exact.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::special::ln_gamma;

/// Standard normal draw, Marsaglia polar method. One value per call.
pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Gamma(shape, scale) draw via Marsaglia-Tsang. Shapes below one use the
/// boost `Gamma(shape) = Gamma(shape + 1) * U^(1/shape)`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if shape <= 0.0 || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma requires shape > 0 and scale > 0, got shape {shape}, scale {scale}"
        )));
    }
    if shape < 1.0 {
        let boost = rng.random::<f64>().powf(1.0 / shape);
        return Ok(sample_gamma_shape_ge1(shape + 1.0, rng) * scale * boost);
    }
    Ok(sample_gamma_shape_ge1(shape, rng) * scale)
}

fn sample_gamma_shape_ge1<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = sample_standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.random::<f64>();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Draws the multiplicative heterogeneity `exp(epsilon)` of the NB model:
/// gamma with mean 1 and variance `dispersion` (shape `1/dispersion`,
/// scale `dispersion`).
pub fn sample_gamma_heterogeneity<R: Rng + ?Sized>(dispersion: f64, rng: &mut R) -> Result<f64> {
    if dispersion <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dispersion must be > 0, got {dispersion}"
        )));
    }
    sample_gamma(1.0 / dispersion, dispersion, rng)
}

/// Exact Poisson draw: sequential inversion below mean 10, Hormann's
/// transformed rejection (PTRS) above.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u32> {
    if mean < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "poisson mean must be >= 0, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < 10.0 {
        Ok(poisson_inversion(mean, rng))
    } else {
        Ok(poisson_ptrs(mean, rng))
    }
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u32 {
    let u = rng.random::<f64>();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u32;
    while u > cdf {
        k += 1;
        p *= mean / f64::from(k);
        cdf += p;
        if k > 10_000 {
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u32 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = mean.ln();
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v = rng.random::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u32;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = k * ln_mean - mean - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn moments(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn heterogeneity_has_unit_mean() {
        let mut rng = stream(41, "gamma-mean", 0);
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| sample_gamma_heterogeneity(0.5, &mut rng).unwrap())
            .collect();
        let (mean, var) = moments(&draws);
        assert!((mean - 1.0).abs() < 0.01, "mean = {mean}");
        assert!((var - 0.5).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn heterogeneity_variance_equals_dispersion() {
        let mut rng = stream(41, "gamma-var", 0);
        for &alpha in &[0.1, 1.5, 3.0] {
            let draws: Vec<f64> = (0..200_000)
                .map(|_| sample_gamma_heterogeneity(alpha, &mut rng).unwrap())
                .collect();
            let (mean, var) = moments(&draws);
            assert!((mean - 1.0).abs() < 0.02, "alpha {alpha}: mean {mean}");
            assert!(
                (var - alpha).abs() < 0.06 * alpha.max(1.0),
                "alpha {alpha}: var {var}"
            );
        }
    }

    #[test]
    fn small_dispersion_concentrates_at_one() {
        let mut rng = stream(41, "gamma-degenerate", 0);
        let draws: Vec<f64> = (0..50_000)
            .map(|_| sample_gamma_heterogeneity(0.005, &mut rng).unwrap())
            .collect();
        let (mean, var) = moments(&draws);
        assert!((mean - 1.0).abs() < 0.01);
        assert!(var < 0.01);
    }

    #[test]
    fn non_positive_dispersion_rejected() {
        let mut rng = stream(41, "gamma-err", 0);
        assert!(sample_gamma_heterogeneity(0.0, &mut rng).is_err());
        assert!(sample_gamma_heterogeneity(-1.0, &mut rng).is_err());
    }

    #[test]
    fn poisson_zero_mean_is_always_zero() {
        let mut rng = stream(42, "poisson-zero", 0);
        for _ in 0..100 {
            assert_eq!(sample_poisson(0.0, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn poisson_moments_at_low_mean() {
        let mut rng = stream(42, "poisson-low", 0);
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| f64::from(sample_poisson(1.6, &mut rng).unwrap()))
            .collect();
        let (mean, var) = moments(&draws);
        assert!((mean - 1.6).abs() < 0.01, "mean = {mean}");
        // Equidispersion: variance matches the mean.
        assert!((var / mean - 1.0).abs() < 0.02, "var/mean = {}", var / mean);
    }

    #[test]
    fn poisson_moments_on_rejection_path() {
        let mut rng = stream(42, "poisson-high", 0);
        for &lambda in &[15.0, 80.0] {
            let draws: Vec<f64> = (0..300_000)
                .map(|_| f64::from(sample_poisson(lambda, &mut rng).unwrap()))
                .collect();
            let (mean, var) = moments(&draws);
            assert!((mean - lambda).abs() < 0.05 * lambda.sqrt(), "mean = {mean}");
            assert!((var / lambda - 1.0).abs() < 0.03, "var = {var}");
        }
    }

    #[test]
    fn negative_mean_rejected() {
        let mut rng = stream(42, "poisson-err", 0);
        assert!(sample_poisson(-0.1, &mut rng).is_err());
    }
}
