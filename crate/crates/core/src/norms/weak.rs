//! Level-set bounds for band-limited waves restricted to a space-time measure.

use crate::error::{param, Result};
use crate::fourier::{FieldDomain, GridField, GridSpec, PointSampler};
use crate::measures::SpacetimeMeasure;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Number of lambda nodes in the layer-cake quadrature.
const LAYER_NODES: usize = 4096;

/// Data with Fourier support in R <= |xi| < 2R whose half-wave evolution
/// focuses at `centers` (n coordinates each) at time `t_focus`.
pub fn focused_wave_packets(
    spec: GridSpec,
    band: f64,
    centers: &[f64],
    amplitudes: &[Complex64],
    t_focus: f64,
) -> Result<GridField> {
    let n = spec.n;
    if centers.len() != amplitudes.len() * n {
        return Err(param("each packet needs n centre coordinates and one amplitude"));
    }
    if 2.0 * band > spec.nyquist() {
        return Err(param(format!(
            "band [{band}, {}) exceeds the Nyquist frequency {}",
            2.0 * band,
            spec.nyquist()
        )));
    }
    let mut f = GridField::zeros(spec, FieldDomain::Frequency);
    for (i, v) in f.values_mut().iter_mut().enumerate() {
        let xi = spec.frequency(i);
        let r = xi[..n].iter().map(|x| x * x).sum::<f64>().sqrt();
        if r < band || r >= 2.0 * band {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, a) in centers.chunks(n).zip(amplitudes) {
            let dot: f64 = c.iter().zip(&xi[..n]).map(|(x, k)| x * k).sum::<f64>() + t_focus * r;
            acc += a * Complex64::from_polar(1.0, -2.0 * PI * dot.rem_euclid(1.0));
        }
        *v = acc;
    }
    Ok(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub lambda: f64,
    pub level_mass: f64,
    /// lambda^2 nu(|u| >= lambda) / (R^(n - alpha) C ||f||_2^2).
    pub weak_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakTypeReport {
    pub band: f64,
    pub f_l2: f64,
    pub sup_modulus: f64,
    /// c in the cap c R^(n/2) ||f||_2, with c = sqrt(#modes / (L^n R^n)).
    pub bernstein_constant: f64,
    pub bernstein_cap: f64,
    pub bernstein_holds: bool,
    pub rows: Vec<LevelRow>,
    pub worst_weak_constant: f64,
    pub q: f64,
    pub direct_lq: f64,
    pub layer_cake_lq: f64,
    pub layer_cake_relative_error: f64,
}

/// |e^(it sqrt(-Lap)) f(x)| at every atom (x, t) of `nu`.
pub fn wave_moduli_on(f: &GridField, nu: &SpacetimeMeasure) -> Result<Vec<f64>> {
    let n = f.spec().n;
    if nu.spatial_dimension() != n {
        return Err(param("space-time measure dimension does not match the field"));
    }
    let radius = f.mode_radius();
    let mut order: Vec<usize> = (0..nu.len()).collect();
    order.sort_by(|&a, &b| nu.time(a).total_cmp(&nu.time(b)));
    let mut out = vec![0.0; nu.len()];
    let mut start = 0;
    while start < order.len() {
        let t = nu.time(order[start]);
        let mut end = start;
        while end < order.len() && nu.time(order[end]) == t {
            end += 1;
        }
        let coords: Vec<f64> = order[start..end].iter().flat_map(|&i| nu.space(i).to_vec()).collect();
        let sampler = PointSampler::new(*f.spec(), radius, &coords)?;
        let values = sampler.sample_with_radial(f, |r| Complex64::from_polar(1.0, 2.0 * PI * t * r))?;
        for (k, &i) in order[start..end].iter().enumerate() {
            out[i] = values[k].norm();
        }
        start = end;
    }
    Ok(out)
}

/// Level-set table, Bernstein cap and layer-cake reconstruction for band data.
pub fn weak_type_check(
    f_band: &GridField,
    band: f64,
    nu: &SpacetimeMeasure,
    alpha: f64,
    frostman: f64,
    lambdas: Option<&[f64]>,
    q: f64,
) -> Result<WeakTypeReport> {
    if !(q >= 1.0) {
        return Err(param(format!("q must be at least 1, got {q}")));
    }
    let spec = *f_band.spec();
    let n = spec.n as f64;
    let moduli = wave_moduli_on(f_band, nu)?;
    let weights = nu.cloud().weights();
    let f_l2 = f_band.l2_norm();
    let coeffs = f_band.to_frequency();
    let floor = 1e-12 * coeffs.values().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let modes = coeffs.values().iter().filter(|c| c.norm() > floor).count() as f64;
    let bernstein_constant = (modes / (spec.box_volume() * band.powf(n))).sqrt();
    let bernstein_cap = bernstein_constant * band.powf(n / 2.0) * f_l2;
    let sup_modulus = moduli.iter().copied().fold(0.0, f64::max);

    // Atoms sorted by modulus with suffix sums of their mass.
    let mut sorted: Vec<(f64, f64)> = moduli.iter().copied().zip(weights.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut tail = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        tail[i] = tail[i + 1] + sorted[i].1;
    }
    let level_mass = |lambda: f64| -> f64 {
        let idx = sorted.partition_point(|s| s.0 < lambda);
        tail[idx]
    };

    let default_lambdas: Vec<f64>;
    let lambdas = match lambdas {
        Some(l) => l,
        None => {
            default_lambdas = (0..48)
                .map(|i| sup_modulus * 2f64.powf(-(i as f64) / 4.0))
                .collect();
            &default_lambdas
        }
    };
    let denom = band.powf(n - alpha) * frostman * f_l2 * f_l2;
    let rows: Vec<LevelRow> = lambdas
        .iter()
        .map(|&lambda| {
            let mass = level_mass(lambda);
            LevelRow {
                lambda,
                level_mass: mass,
                weak_ratio: lambda * lambda * mass / denom,
            }
        })
        .collect();
    let worst_weak_constant = rows.iter().map(|r| r.weak_ratio).fold(0.0, f64::max);

    let direct_lq: f64 = moduli.iter().zip(weights).map(|(v, w)| w * v.powf(q)).sum::<f64>().powf(1.0 / q);
    // q int_0^cap lambda^(q-1) nu(|u| >= lambda) d lambda by the midpoint
    // rule; the integrand vanishes beyond the largest modulus, so the grid
    // stops there.
    let h = sup_modulus / LAYER_NODES as f64;
    let mut integral = 0.0;
    for i in 0..LAYER_NODES {
        let lambda = (i as f64 + 0.5) * h;
        integral += q * lambda.powf(q - 1.0) * level_mass(lambda);
    }
    let layer_cake_lq = (integral * h).powf(1.0 / q);
    let layer_cake_relative_error = if direct_lq > 0.0 {
        (layer_cake_lq - direct_lq).abs() / direct_lq
    } else {
        0.0
    };
    Ok(WeakTypeReport {
        band,
        f_l2,
        sup_modulus,
        bernstein_constant,
        bernstein_cap,
        bernstein_holds: sup_modulus <= bernstein_cap * (1.0 + 1e-12),
        rows,
        worst_weak_constant,
        q,
        direct_lq,
        layer_cake_lq,
        layer_cake_relative_error,
    })
}
