//! Band-restricted trace operator: the largest value of ||f||_{L^2(mu)} / ||f||_2
//! over functions on R^n with Fourier support in the annulus R <= |xi| <= 2R.
//!
//! The square of that supremum is the top eigenvalue of W^(1/2) K W^(1/2),
//! where K(x, y) is the inverse transform of the annulus indicator at x - y
//! and W holds the atom weights.

use crate::error::{param, resource, Result};
use crate::measures::AtomicMeasure;
use crate::numeric::bessel_j1;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest atom count for the dense eigenvalue path.
pub const DENSE_TRACE_LIMIT: usize = 6000;

/// Inverse transform of the indicator of the ball of radius `rho` at distance `r`.
fn ball_kernel(n: usize, rho: f64, r: f64) -> f64 {
    match n {
        1 => {
            if r == 0.0 {
                2.0 * rho
            } else {
                (2.0 * PI * rho * r).sin() / (PI * r)
            }
        }
        2 => {
            let x = 2.0 * PI * rho * r;
            if x < 1e-6 {
                PI * rho * rho * (1.0 - x * x / 8.0)
            } else {
                rho * bessel_j1(x) / r
            }
        }
        _ => {
            let x = 2.0 * PI * rho * r;
            if x < 1e-2 {
                let x2 = x * x;
                4.0 / 3.0 * PI * rho.powi(3) * (1.0 - x2 / 10.0 + x2 * x2 / 280.0)
            } else {
                (x.sin() - x * x.cos()) / (2.0 * PI * PI * r.powi(3))
            }
        }
    }
}

/// Kernel of the annulus R <= |xi| <= 2R.
pub fn annulus_kernel(n: usize, band: f64, r: f64) -> f64 {
    ball_kernel(n, 2.0 * band, r) - ball_kernel(n, band, r)
}

#[derive(Debug, Clone, Serialize)]
pub struct BandTrace {
    pub band: f64,
    pub top_eigenvalue: f64,
    /// sqrt of the top eigenvalue.
    pub ratio: f64,
    /// "circulant" or "dense".
    pub method: &'static str,
    pub iterations: usize,
}

/// Supremum of ||f||_{L^2(mu)} / ||f||_2 over band-`band` data.
pub fn band_trace_sup(mu: &AtomicMeasure, band: f64) -> Result<BandTrace> {
    let n = mu.dim();
    if !(1..=3).contains(&n) {
        return Err(param(format!("band trace supports n in 1..=3, got {n}")));
    }
    if !(band > 0.0) {
        return Err(param("band must be positive"));
    }
    if let Some(eig) = circulant_top_eigenvalue(mu, band) {
        return Ok(BandTrace {
            band,
            top_eigenvalue: eig,
            ratio: eig.max(0.0).sqrt(),
            method: "circulant",
            iterations: 0,
        });
    }
    let count = mu.len();
    if count > DENSE_TRACE_LIMIT {
        return Err(resource(format!(
            "dense trace operator with {count} atoms exceeds the limit of {DENSE_TRACE_LIMIT}"
        )));
    }
    let sqrt_w: Vec<f64> = mu.cloud().weights().iter().map(|w| w.sqrt()).collect();
    let mut matrix = vec![0.0; count * count];
    for i in 0..count {
        let xi = mu.cloud().point(i);
        for j in i..count {
            let xj = mu.cloud().point(j);
            let r = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let v = sqrt_w[i] * sqrt_w[j] * annulus_kernel(n, band, r);
            matrix[i * count + j] = v;
            matrix[j * count + i] = v;
        }
    }
    let (eig, iterations) = power_iteration(&matrix, count);
    Ok(BandTrace {
        band,
        top_eigenvalue: eig,
        ratio: eig.max(0.0).sqrt(),
        method: "dense",
        iterations,
    })
}

/// Top eigenvalue of a symmetric positive semidefinite matrix.
fn power_iteration(matrix: &[f64], count: usize) -> (f64, usize) {
    // Deterministic start with no special symmetry.
    let mut v: Vec<f64> = (0..count).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut eig = 0.0;
    let mut next = vec![0.0; count];
    for iter in 1..=2000 {
        for (i, out) in next.iter_mut().enumerate() {
            let row = &matrix[i * count..(i + 1) * count];
            *out = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let rayleigh: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, iter);
        }
        for (a, b) in v.iter_mut().zip(&next) {
            *a = b / norm;
        }
        if iter > 5 && (rayleigh - eig).abs() <= 1e-10 * rayleigh.abs() {
            return (rayleigh, iter);
        }
        eig = rayleigh;
    }
    (eig, 2000)
}

/// Exact spectrum when the atoms are an equal-weight orbit of the rotation by
/// 2 pi / N on a circle centred at the origin (listed in order).
fn circulant_top_eigenvalue(mu: &AtomicMeasure, band: f64) -> Option<f64> {
    let count = mu.len();
    if mu.dim() != 2 || count < 3 {
        return None;
    }
    let w0 = mu.cloud().weight(0);
    if mu.cloud().weights().iter().any(|&w| (w - w0).abs() > 1e-14 * w0) {
        return None;
    }
    let p0 = mu.cloud().point(0);
    let radius = (p0[0] * p0[0] + p0[1] * p0[1]).sqrt();
    if radius == 0.0 {
        return None;
    }
    let start = p0[1].atan2(p0[0]);
    for j in 0..count {
        let theta = start + 2.0 * PI * j as f64 / count as f64;
        let p = mu.cloud().point(j);
        if (p[0] - radius * theta.cos()).abs() > 1e-12 * radius || (p[1] - radius * theta.sin()).abs() > 1e-12 * radius {
            return None;
        }
    }
    let mut row: Vec<Complex64> = (0..count)
        .map(|j| {
            let chord = 2.0 * radius * (PI * j as f64 / count as f64).sin();
            Complex64::new(w0 * annulus_kernel(2, band, chord), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(count).process(&mut row);
    Some(row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::build_sphere_measure;
    use crate::numeric::{gauss_legendre, unit_ball_volume};

    #[test]
    fn kernels_at_origin_are_annulus_volumes() {
        for n in 1..=3 {
            let expected = unit_ball_volume(n) * (2f64.powi(n as i32) - 1.0) * 3f64.powi(n as i32);
            assert!((annulus_kernel(n, 3.0, 0.0) - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn kernel_matches_radial_quadrature() {
        // n = 3: int_annulus e^{2 pi i x.xi} = int 4 pi rho^2 sin(2 pi rho r) / (2 pi rho r) d rho
        let (band, r) = (2.0, 0.37);
        let q: f64 = gauss_legendre(64, band, 2.0 * band)
            .iter()
            .map(|(rho, w)| w * 4.0 * PI * rho * rho * (2.0 * PI * rho * r).sin() / (2.0 * PI * rho * r))
            .sum();
        assert!((annulus_kernel(3, band, r) - q).abs() < 1e-9);
        // n = 2: int 2 pi rho J0(2 pi rho r) d rho
        let q: f64 = gauss_legendre(64, band, 2.0 * band)
            .iter()
            .map(|(rho, w)| w * 2.0 * PI * rho * crate::numeric::bessel_j0(2.0 * PI * rho * r))
            .sum();
        assert!((annulus_kernel(2, band, r) - q).abs() < 1e-6);
    }

    #[test]
    fn circulant_path_agrees_with_dense() {
        let circle = build_sphere_measure(1.0, 2, 400).unwrap();
        let fast = band_trace_sup(&circle, 6.0).unwrap();
        assert_eq!(fast.method, "circulant");
        // Break the orbit detection by listing the atoms in a different order.
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for j in (0..400).rev() {
            coords.extend_from_slice(circle.cloud().point(j));
            weights.push(circle.cloud().weight(j));
        }
        coords.swap(0, 2);
        coords.swap(1, 3);
        let shuffled = AtomicMeasure::new(2, coords, weights).unwrap();
        let dense = band_trace_sup(&shuffled, 6.0).unwrap();
        assert_eq!(dense.method, "dense");
        assert!((fast.top_eigenvalue - dense.top_eigenvalue).abs() < 1e-6 * fast.top_eigenvalue);
    }

    #[test]
    fn single_atom_gives_annulus_volume() {
        let mu = AtomicMeasure::single_atom(&[0.3, 0.1], 2.0).unwrap();
        let t = band_trace_sup(&mu, 4.0).unwrap();
        assert!((t.top_eigenvalue - 2.0 * annulus_kernel(2, 4.0, 0.0)).abs() < 1e-9);
    }
}
