//! Spherical and conical L^2 averages of Fourier transforms of measures.

use super::{fit_exponent, ExponentFit};
use crate::error::{param, Result};
use crate::fourier::measure_ft_complex;
use crate::measures::{build_sphere_measure, AtomicMeasure, SpacetimeMeasure};
use crate::numeric::gauss_legendre;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Directions and surface weights on S^(n-1); the weights sum to |S^(n-1)|.
pub fn sphere_quadrature(n: usize, points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 1 {
        return Ok((vec![1.0, -1.0], vec![1.0, 1.0]));
    }
    let sphere = build_sphere_measure(1.0, n, points)?;
    Ok((sphere.cloud().coords().to_vec(), sphere.cloud().weights().to_vec()))
}

/// int_{S^(n-1)} |mu^(R w)|^2 dsigma(w).
pub fn sphere_decay_norm(mu: &AtomicMeasure, radius: f64, sphere_points: usize) -> Result<f64> {
    if !(radius >= 2.0) {
        return Err(param(format!("decay radius must be at least 2, got {radius}")));
    }
    let (dirs, weights) = sphere_quadrature(mu.dim(), sphere_points)?;
    let xi: Vec<f64> = dirs.iter().map(|d| d * radius).collect();
    let values = measure_ft_complex(mu, &xi)?;
    Ok(values.iter().zip(&weights).map(|(v, w)| w * v.norm_sqr()).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaEstimate {
    pub alpha: f64,
    /// (R, normalized spherical average).
    pub values: Vec<(f64, f64)>,
    pub fit: ExponentFit,
    /// Minus the fitted slope.
    pub beta: f64,
}

/// Fits the decay of the spherical averages normalized by ||mu|| C.
pub fn estimate_beta(
    mu: &AtomicMeasure,
    alpha: f64,
    frostman: f64,
    radii: &[f64],
    sphere_points: usize,
) -> Result<BetaEstimate> {
    let norm = mu.total_mass() * frostman;
    if !(norm > 0.0) {
        return Err(param("normalization ||mu|| C must be positive"));
    }
    let values = radii
        .iter()
        .map(|&r| sphere_decay_norm(mu, r, sphere_points).map(|v| (r, v / norm)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&values)?;
    Ok(BetaEstimate {
        alpha,
        beta: -fit.slope,
        values,
        fit,
    })
}

/// Node counts for the truncated-cone quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeQuadrature {
    pub radial: usize,
    /// Angles for n = 2, spiral points for n = 3.
    pub angular: usize,
}

impl ConeQuadrature {
    /// Enough nodes to resolve oscillations of frequency `radius * extent`.
    pub fn for_scale(radius: f64, extent: f64, n: usize) -> Self {
        let band = radius * extent.max(1e-3);
        let radial = (2.0 * band).ceil() as usize + 16;
        let ring = (4.0 * PI * band).ceil() as usize + 32;
        let angular = if n == 3 { ring * ring / 2 } else { ring };
        Self { radial, angular }
    }
}

/// ||nu^(R .)||^2 over Gamma = {(xi, |xi|) : 1 <= |xi| < 2} with the cone's
/// surface measure sqrt(2) rho^(n-1) d rho d omega.
pub fn cone_decay_norm(nu: &SpacetimeMeasure, radius: f64, quadrature: Option<ConeQuadrature>) -> Result<f64> {
    let n = nu.spatial_dimension();
    if n != 2 && n != 3 {
        return Err(param(format!("cone averages are supported for n in {{2,3}}, got {n}")));
    }
    if !(radius >= 2.0) {
        return Err(param(format!("decay radius must be at least 2, got {radius}")));
    }
    let extent = (0..nu.len())
        .map(|i| {
            let x: f64 = nu.space(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            2.0 * (x + nu.time(i).abs())
        })
        .fold(0.0, f64::max);
    let q = quadrature.unwrap_or_else(|| ConeQuadrature::for_scale(radius, extent, n));
    let (dirs, dir_weights) = sphere_quadrature(n, q.angular)?;
    let rho = gauss_legendre(q.radial, 1.0, 2.0);
    let weights = nu.cloud().weights();
    let mut total = 0.0;
    for (d, dw) in dirs.chunks(n).zip(&dir_weights) {
        // Phases depend on the atom only through x.w and t.
        let proj: Vec<f64> = (0..nu.len())
            .map(|i| nu.space(i).iter().zip(d).map(|(a, b)| a * b).sum::<f64>() + nu.time(i))
            .collect();
        for &(r, rw) in &rho {
            let scale = radius * r;
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, w) in proj.iter().zip(weights) {
                let phase = -2.0 * PI * (scale * p).rem_euclid(1.0);
                acc += Complex64::new(phase.cos(), phase.sin()) * w;
            }
            total += dw * rw * 2f64.sqrt() * r.powi(n as i32 - 1) * acc.norm_sqr();
        }
    }
    Ok(total)
}

/// Surface measure of the truncated cone, sqrt(2) |S^(n-1)| (2^n - 1) / n.
pub fn cone_mass(n: usize) -> f64 {
    2f64.sqrt() * crate::numeric::unit_sphere_area(n) * (2f64.powi(n as i32) - 1.0) / n as f64
}
