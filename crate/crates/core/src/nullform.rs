//! Null-form energy of half-wave solutions, its pairing with the inverse
//! Laplacian of a measure, Riesz potentials and the fractional Leibniz rule.

use crate::error::{param, Result};
use crate::fourier::{mollify_measure, GridField, GridSpec, MeasureSpectrum};
use crate::measures::AtomicMeasure;
use crate::norms::{fit_log2, ExponentFit};
use crate::numeric::gauss_legendre;
use crate::wave::{frac_laplacian, half_wave, laplacian, spatial_gradient, time_derivative, ZeroModePolicy};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// |d_t u|^2 - |grad u|^2 at time t for u = e^(it sqrt(-Lap)) u0, in space.
pub fn null_energy(u0: &GridField, t: f64) -> GridField {
    let u = half_wave(u0, t);
    let ut = time_derivative(u0, t).to_space();
    let grad: Vec<GridField> = spatial_gradient(&u).into_iter().map(|g| g.to_space()).collect();
    let spec = *u0.spec();
    let values = (0..spec.len())
        .map(|i| {
            let g2: f64 = grad.iter().map(|g| g.values()[i].norm_sqr()).sum();
            Complex64::new(ut.values()[i].norm_sqr() - g2, 0.0)
        })
        .collect();
    GridField::from_values(spec, values, crate::fourier::FieldDomain::Space).expect("grid sizes match")
}

/// |u|^2 in space at time t.
fn modulus_squared(u0: &GridField, t: f64) -> GridField {
    half_wave(u0, t).map_space(|v| Complex64::new(v.norm_sqr(), 0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub t: f64,
    pub step: f64,
    /// max |(d_tt - Lap)|u|^2 - 2 null_energy|.
    pub max_residual: f64,
    /// max_residual / max |2 null_energy|.
    pub relative_residual: f64,
    /// int null_energy over the torus, relative to ||u0||_{H^1}^2.
    pub relative_mean: f64,
}

/// Checks (d_tt - Lap)|u|^2 = 2 (|d_t u|^2 - |grad u|^2). d_tt comes from
/// Richardson-extrapolated central differences with step 2^(-k-9), where
/// 2^k is the smallest power of two covering the band of u0.
pub fn null_identity_check(u0: &GridField, t: f64) -> Result<IdentityReport> {
    let spec = *u0.spec();
    let band = max_frequency(u0);
    if band > spec.size as f64 / (8.0 * spec.box_len) {
        return Err(param(format!(
            "band {band} exceeds N/(8L) = {}, so |u|^2 would alias",
            spec.size as f64 / (8.0 * spec.box_len)
        )));
    }
    let k = band.max(1.0).log2().ceil();
    let step = 2f64.powf(-k - 9.0);
    let center = modulus_squared(u0, t);
    let second = |h: f64| -> Vec<f64> {
        let plus = modulus_squared(u0, t + h);
        let minus = modulus_squared(u0, t - h);
        (0..spec.len())
            .map(|i| (plus.values()[i].re - 2.0 * center.values()[i].re + minus.values()[i].re) / (h * h))
            .collect()
    };
    let coarse = second(step);
    let fine = second(step / 2.0);
    let lap = laplacian(&center).to_space();
    let energy = null_energy(u0, t);
    let mut max_residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..spec.len() {
        let dtt = (4.0 * fine[i] - coarse[i]) / 3.0;
        let rhs = 2.0 * energy.values()[i].re;
        max_residual = max_residual.max((dtt - lap.values()[i].re - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    let h1 = crate::wave::sobolev_norm(u0, 1.0);
    Ok(IdentityReport {
        t,
        step,
        max_residual,
        relative_residual: if scale > 0.0 { max_residual / scale } else { max_residual },
        relative_mean: energy.integral().re.abs() / (h1 * h1),
    })
}

/// Largest |xi| carried by the field.
fn max_frequency(f: &GridField) -> f64 {
    let c = f.to_frequency();
    let floor = 1e-12 * c.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    c.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > floor)
        .map(|(i, _)| c.spec().frequency_norm(i))
        .fold(0.0, f64::max)
}

/// Mollification radius used for the weight: the mollifier reaches 0.96 of
/// the Nyquist frequency.
fn weight_radius(spec: &GridSpec) -> f64 {
    0.24 * spec.nyquist()
}

/// (-Lap)^(-1) of the mollified measure with the mean removed, in space.
pub fn inverse_laplacian_weight(mu: &AtomicMeasure, spec: GridSpec) -> Result<GridField> {
    if spec.n < 2 {
        return Err(param("the inverse Laplacian weight needs n >= 2"));
    }
    if mu.dim() != spec.n {
        return Err(param("measure and grid dimensions differ"));
    }
    let smooth = mollify_measure(mu, weight_radius(&spec), spec)?;
    Ok(frac_laplacian(&smooth, -1.0, ZeroModePolicy::Project)?.field.to_space())
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightSweep {
    pub sizes: Vec<usize>,
    pub sup: Vec<f64>,
    /// Finest over coarsest sup.
    pub growth: f64,
    /// Growth above 1.5 across the sweep.
    pub unbounded: bool,
}

/// Sup of the weight under grid refinement on a fixed box.
pub fn inverse_laplacian_sweep(mu: &AtomicMeasure, box_len: f64, sizes: &[usize]) -> Result<WeightSweep> {
    if sizes.len() < 2 {
        return Err(param("a refinement sweep needs at least two grids"));
    }
    let sup = sizes
        .iter()
        .map(|&s| inverse_laplacian_weight(mu, GridSpec::new(mu.dim(), s, box_len)?).map(|w| w.sup_norm()))
        .collect::<Result<Vec<_>>>()?;
    let growth = sup[sup.len() - 1] / sup[0];
    Ok(WeightSweep {
        sizes: sizes.to_vec(),
        sup,
        growth,
        unbounded: growth > 1.5,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaStarValue {
    /// int_0^1 int (|d_t u|^2 - |grad u|^2) W dx dt, signed.
    pub integral: f64,
    /// (1/2) [int d_t|u|^2 W dx] from t = 0 to 1.
    pub boundary_term: f64,
    /// (1/2) int_0^1 int |u|^2 (-Lap W) dx dt.
    pub measure_term: f64,
    /// |integral - boundary_term - measure_term|.
    pub chain_residual: f64,
}

/// The null-form pairing with weight `weight`, by Gauss-Legendre quadrature
/// in t with `time_nodes` nodes on [0, 1]; the boundary and measure terms of
/// the integration by parts are computed separately.
pub fn gamma_star_functional(u0: &GridField, weight: &GridField, time_nodes: usize) -> Result<GammaStarValue> {
    if u0.spec() != weight.spec() {
        return Err(param("data and weight grids differ"));
    }
    if time_nodes == 0 {
        return Err(param("time quadrature needs at least one node"));
    }
    let weight = weight.to_space();
    let minus_lap_w = laplacian(&weight).scale(-1.0).to_space();
    let nodes = gauss_legendre(time_nodes, 0.0, 1.0);
    let terms: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&(t, w)| {
            let energy = null_energy(u0, t);
            let density = modulus_squared(u0, t);
            let a = w * energy.inner(&weight).re;
            let b = w * 0.5 * density.inner(&minus_lap_w).re;
            (a, b)
        })
        .collect();
    let integral: f64 = terms.iter().map(|t| t.0).sum();
    let measure_term: f64 = terms.iter().map(|t| t.1).sum();
    // d_t |u|^2 = 2 Re(conj(u) d_t u)
    let boundary_at = |t: f64| -> f64 {
        let u = half_wave(u0, t).to_space();
        let ut = time_derivative(u0, t).to_space();
        let rate = u.pointwise(&ut, |a, b| Complex64::new(2.0 * (a.conj() * b).re, 0.0));
        rate.inner(&weight).re
    };
    let boundary_term = 0.5 * (boundary_at(1.0) - boundary_at(0.0));
    Ok(GammaStarValue {
        integral,
        boundary_term,
        measure_term,
        chain_residual: (integral - boundary_term - measure_term).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaStarBand {
    pub k: u32,
    pub value: GammaStarValue,
    pub data_l2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaStarEstimate {
    pub alpha: f64,
    pub n: usize,
    /// 0 < alpha <= n - 2.
    pub in_scope: bool,
    pub bands: Vec<GammaStarBand>,
    /// Fit of log2 (|integral| / (C ||mu_k||_2^2)) against k.
    pub fit: ExponentFit,
    /// (n - alpha)/2 minus half the fitted slope.
    pub gamma_star: f64,
    /// Bands whose signed integral was negative.
    pub negative_bands: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaStarOptions {
    pub k_min: u32,
    pub k_max: u32,
    pub grid: GridSpec,
    pub time_nodes: usize,
}

/// Runs the null-form pairing with band-k pieces of mu as data and fits the
/// growth of |integral| / (C ||mu_k||^2).
pub fn estimate_gamma_star(
    mu: &AtomicMeasure,
    alpha: f64,
    frostman: f64,
    options: &GammaStarOptions,
) -> Result<GammaStarEstimate> {
    if options.k_max < options.k_min + 2 {
        return Err(param("the fit needs at least three bands"));
    }
    let n = mu.dim();
    let spectrum = MeasureSpectrum::new(mu, options.grid)?;
    let weight = inverse_laplacian_weight(mu, options.grid)?;
    let mut bands = Vec::new();
    let mut samples = Vec::new();
    for k in options.k_min..=options.k_max {
        let piece = spectrum.piece(k)?.field;
        let value = gamma_star_functional(&piece, &weight, options.time_nodes)?;
        let l2 = piece.l2_norm();
        let magnitude = value.integral.abs();
        if !(magnitude > 0.0) {
            return Err(param(format!("band {k} gives a vanishing pairing; the fit is undefined")));
        }
        samples.push((k as f64, (magnitude / (frostman * l2 * l2)).log2()));
        bands.push(GammaStarBand { k, value, data_l2: l2 });
    }
    let fit = fit_log2(samples)?;
    Ok(GammaStarEstimate {
        alpha,
        n,
        in_scope: alpha > 0.0 && alpha <= n as f64 - 2.0,
        negative_bands: bands.iter().filter(|b| b.value.integral < 0.0).count(),
        gamma_star: (n as f64 - alpha) / 2.0 - fit.slope / 2.0,
        bands,
        fit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RieszReport {
    pub alpha: f64,
    pub alpha_prime: f64,
    /// Sample points closer than this to an atom are skipped.
    pub floor: f64,
    pub near_sup: f64,
    /// near_sup / C.
    pub worst_constant: f64,
    /// Largest potential / ||mu|| at sample points with 3 < |x| < 6.
    pub far_ratio: f64,
    pub samples_used: usize,
}

/// sum_j w_j |x - x_j|^(-s).
pub fn riesz_potential(mu: &AtomicMeasure, x: &[f64], s: f64) -> f64 {
    mu.cloud()
        .iter()
        .map(|(p, w)| {
            let d = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            w * d.powf(-s)
        })
        .sum()
}

/// Upper bound of the potential by dyadic shells around x:
/// sum_j mu(2^(-j-1) < |x - y| <= 2^(-j)) 2^((j+1) s), plus the mass beyond
/// distance 1 at weight 1.
pub fn dyadic_shell_bound(mu: &AtomicMeasure, x: &[f64], s: f64) -> f64 {
    mu.cloud()
        .iter()
        .map(|(p, w)| {
            let d = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d > 1.0 {
                w
            } else {
                let j = (-d.log2()).floor();
                w * 2f64.powf((j + 1.0) * s)
            }
        })
        .sum()
}

fn nearest_neighbour_floor(mu: &AtomicMeasure) -> f64 {
    let cloud = mu.cloud();
    let count = cloud.len();
    if count < 2 {
        return 0.0;
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            (0..count)
                .filter(|&j| j != i)
                .map(|j| {
                    cloud
                        .point(i)
                        .iter()
                        .zip(cloud.point(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Sup of the Riesz potential of order alpha' over a grid of `per_axis`^n
/// points covering the bounding box plus a margin of 1, skipping points
/// within the nearest-neighbour spacing of an atom (or `floor` if given).
pub fn riesz_bound_check(
    mu: &AtomicMeasure,
    alpha: f64,
    alpha_prime: f64,
    frostman: f64,
    per_axis: usize,
    floor: Option<f64>,
) -> Result<RieszReport> {
    if !(alpha_prime > 0.0 && alpha_prime < alpha) {
        return Err(param(format!("need 0 < alpha' < alpha, got alpha' = {alpha_prime}, alpha = {alpha}")));
    }
    if per_axis < 2 {
        return Err(param("sample grid needs at least two points per axis"));
    }
    crate::distance::PAIR_ATOM_LIMIT
        .checked_sub(mu.len())
        .ok_or_else(|| crate::error::resource("too many atoms for the potential sweep"))?;
    let n = mu.dim();
    let floor = floor.unwrap_or_else(|| nearest_neighbour_floor(mu));
    let bbox = mu.cloud().bounding_box();
    let total = per_axis.pow(n as u32);
    let near: Vec<f64> = (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let mut rest = flat;
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                let (lo, hi) = (bbox[a].0 - 1.0, bbox[a].1 + 1.0);
                x[a] = lo + (hi - lo) * (rest % per_axis) as f64 / (per_axis - 1) as f64;
                rest /= per_axis;
            }
            let close = mu.cloud().iter().any(|(p, _)| {
                p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < floor
            });
            (!close).then(|| riesz_potential(mu, &x, alpha_prime))
        })
        .collect();
    let near_sup = near.iter().copied().fold(0.0, f64::max);
    // Far field: points on the axes and diagonals at radii 3.5, 4.5, 5.5.
    let mass = mu.total_mass();
    let mut far_ratio: f64 = 0.0;
    for radius in [3.5, 4.5, 5.5] {
        for a in 0..n {
            for sign in [-1.0, 1.0] {
                let mut x = vec![0.0; n];
                x[a] = sign * radius;
                far_ratio = far_ratio.max(riesz_potential(mu, &x, alpha_prime) / mass);
            }
        }
        let diag = vec![radius / (n as f64).sqrt(); n];
        far_ratio = far_ratio.max(riesz_potential(mu, &diag, alpha_prime) / mass);
    }
    Ok(RieszReport {
        alpha,
        alpha_prime,
        floor,
        near_sup,
        worst_constant: near_sup / frostman,
        far_ratio,
        samples_used: near.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeibnizReport {
    pub s: f64,
    /// ||(-Lap)^s (g h)||_1 by grid quadrature.
    pub lhs: f64,
    /// ||(-Lap)^s g||_2 ||h||_2 + ||g||_2 ||(-Lap)^s h||_2.
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of the fractional Leibniz inequality. The product must not
/// alias: the mode radii of g and h may add up to at most N/2 - 1.
pub fn fractional_leibniz_check(g: &GridField, h: &GridField, s: f64) -> Result<LeibnizReport> {
    if !(s >= 0.0) {
        return Err(param(format!("s must be nonnegative, got {s}")));
    }
    if g.spec() != h.spec() {
        return Err(param("fields live on different grids"));
    }
    let spec = *g.spec();
    if g.mode_radius() + h.mode_radius() >= spec.size / 2 {
        return Err(param("the product of the fields aliases on this grid"));
    }
    let power = |f: &GridField| -> Result<GridField> { Ok(frac_laplacian(f, s, ZeroModePolicy::Project)?.field) };
    let product = g.pointwise(h, |a, b| a * b);
    let lhs = power(&product)?.l1_norm();
    let rhs = power(g)?.l2_norm() * h.l2_norm() + g.l2_norm() * power(h)?.l2_norm();
    Ok(LeibnizReport {
        s,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}

/// Newton kernel of (-Lap)^(-1) in R^n, n >= 3: |x|^(2-n) / ((n-2) |S^(n-1)|).
pub fn newton_kernel(n: usize, r: f64) -> f64 {
    r.powi(2 - n as i32) / ((n as f64 - 2.0) * crate::numeric::unit_sphere_area(n))
}
