//! Space-time norms of the cosine evolution restricted to a measure.

use super::{atom_sampler, fit_log2, ExponentFit, TimeGrid};
use crate::error::{param, Result};
use crate::fourier::{GridField, GridSpec, MeasureSpectrum};
use crate::measures::AtomicMeasure;
use crate::wave::{cosine_phase, sobolev_norm, REAL_EVEN_TOL};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Values u(x_j, t_i) of the cosine evolution at every atom and time node,
/// stored time-major, with optional time derivatives.
#[derive(Debug, Clone)]
pub struct SpaceTimeSamples {
    pub times: TimeGrid,
    pub atom_weights: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Option<Vec<f64>>,
}

impl SpaceTimeSamples {
    pub fn cosine(u0: &GridField, mu: &AtomicMeasure, times: TimeGrid, with_derivative: bool) -> Result<Self> {
        let even = u0.require_real_even(REAL_EVEN_TOL)?;
        let sampler = atom_sampler(&even, mu)?;
        let shift = cosine_phase(even.spec().n);
        let count = mu.len();
        let mut values = Vec::with_capacity(times.len() * count);
        let mut derivative = with_derivative.then(|| Vec::with_capacity(times.len() * count));
        for &t in &times.nodes {
            let u = sampler.sample_with_radial(&even, |r| Complex64::new((2.0 * PI * t * r - shift).cos(), 0.0))?;
            values.extend(u.iter().map(|v| v.re));
            if let Some(d) = derivative.as_mut() {
                let du = sampler.sample_with_radial(&even, |r| {
                    Complex64::new(-2.0 * PI * r * (2.0 * PI * t * r - shift).sin(), 0.0)
                })?;
                d.extend(du.iter().map(|v| v.re));
            }
        }
        Ok(Self {
            times,
            atom_weights: mu.cloud().weights().to_vec(),
            values,
            derivative,
        })
    }

    fn atoms(&self) -> usize {
        self.atom_weights.len()
    }

    fn at(&self, time: usize, atom: usize) -> f64 {
        self.values[time * self.atoms() + atom]
    }

    /// (int_0^1 int |u|^p dmu dt)^(1/p) with trapezoid weights in t.
    pub fn strichartz(&self, p: f64) -> f64 {
        let mut total = 0.0;
        for (i, wt) in self.times.weights.iter().enumerate() {
            let row = &self.values[i * self.atoms()..(i + 1) * self.atoms()];
            let inner: f64 = row.iter().zip(&self.atom_weights).map(|(v, w)| w * v.abs().powf(p)).sum();
            total += wt * inner;
        }
        total.powf(1.0 / p)
    }

    /// (sum_j w_j max_i |u(x_j, t_i)|^p)^(1/p).
    pub fn maximal(&self, p: f64) -> f64 {
        let sum: f64 = (0..self.atoms())
            .map(|j| {
                let peak = (0..self.times.len()).map(|i| self.at(i, j).abs()).fold(0.0, f64::max);
                self.atom_weights[j] * peak.powf(p)
            })
            .sum();
        sum.powf(1.0 / p)
    }

    /// Largest ratio, over atoms, of sup_t |F|^p to
    /// ||F||_p^p + p ||F||_p^(p-1) ||F'||_p on [0, 1]. Values <= 1 confirm
    /// the fundamental-theorem bound along every sampled path.
    pub fn ftc_worst_ratio(&self, p: f64) -> Result<f64> {
        let derivative = self
            .derivative
            .as_ref()
            .ok_or_else(|| param("time derivatives were not sampled"))?;
        let atoms = self.atoms();
        let mut worst: f64 = 0.0;
        for j in 0..atoms {
            let mut norm_p = 0.0;
            let mut deriv_p = 0.0;
            let mut peak: f64 = 0.0;
            for (i, wt) in self.times.weights.iter().enumerate() {
                let f = self.values[i * atoms + j].abs();
                let d = derivative[i * atoms + j].abs();
                norm_p += wt * f.powf(p);
                deriv_p += wt * d.powf(p);
                peak = peak.max(f);
            }
            let bound = norm_p + p * norm_p.powf((p - 1.0) / p) * deriv_p.powf(1.0 / p);
            if bound > 0.0 {
                worst = worst.max(peak.powf(p) / bound);
            }
        }
        Ok(worst)
    }
}

/// Strichartz norm of the cosine evolution over t in [0, 1].
pub fn strichartz_norm(u0: &GridField, mu: &AtomicMeasure, p: f64, time_intervals: usize) -> Result<f64> {
    check_p(p)?;
    let samples = SpaceTimeSamples::cosine(u0, mu, TimeGrid::trapezoid(time_intervals)?, false)?;
    Ok(samples.strichartz(p))
}

/// Maximal-in-time norm over the time grid.
pub fn maximal_norm(u0: &GridField, mu: &AtomicMeasure, p: f64, time_intervals: usize) -> Result<f64> {
    check_p(p)?;
    let samples = SpaceTimeSamples::cosine(u0, mu, TimeGrid::trapezoid(time_intervals)?, false)?;
    Ok(samples.maximal(p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(param(format!("p must be at least 1, got {p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaOptions {
    pub p: f64,
    pub k_min: u32,
    pub k_max: u32,
    pub time_intervals: usize,
    pub grid: GridSpec,
    /// Also fit the maximal norm and run the fundamental-theorem check.
    pub with_maximal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaBand {
    pub k: u32,
    pub piece_l2: f64,
    pub strichartz: f64,
    pub maximal: Option<f64>,
    pub ftc_worst_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaEstimate {
    pub p: f64,
    pub alpha: f64,
    pub n: usize,
    pub bands: Vec<GammaBand>,
    /// Fit of log2 strichartz / (C^(1/p) ||mu_k||_2) against k.
    pub fit: ExponentFit,
    /// (n - alpha)/2 minus the fitted Sobolev exponent.
    pub gamma: f64,
    /// Fit of log2 strichartz / (C^(1/p) ||mu_k||_{H^((n - alpha)/2)}).
    pub sobolev_fit: ExponentFit,
    /// Minus the slope of the Sobolev-normalized fit.
    pub gamma_sobolev: f64,
    /// Whether the fitted exponent lies below (alpha - 1)/2.
    pub below_half_alpha_minus_one: bool,
    pub maximal_fit: Option<ExponentFit>,
}

/// Runs the cosine evolution with initial data mu_k for each band k and fits
/// the growth of the Strichartz norm.
pub fn estimate_gamma(mu: &AtomicMeasure, alpha: f64, frostman: f64, options: &GammaOptions) -> Result<GammaEstimate> {
    check_p(options.p)?;
    if options.k_max < options.k_min + 2 {
        return Err(param("gamma fit needs at least three bands"));
    }
    if !mu.is_even() {
        return Err(param("gamma estimation needs an even measure"));
    }
    let n = mu.dim();
    let p = options.p;
    let top = 2f64.powi(options.k_max as i32);
    if top >= options.grid.nyquist() {
        return Err(param(format!(
            "band {} reaches |xi| = {top}, beyond the Nyquist frequency {}",
            options.k_max,
            options.grid.nyquist()
        )));
    }
    let spectrum = MeasureSpectrum::new(mu, options.grid)?;
    let sobolev_index = (n as f64 - alpha) / 2.0;
    let scale = frostman.powf(1.0 / p);
    let mut bands = Vec::new();
    let mut plain = Vec::new();
    let mut sobolev = Vec::new();
    let mut maximal = Vec::new();
    for k in options.k_min..=options.k_max {
        let piece = spectrum.piece(k)?.field;
        let times = TimeGrid::trapezoid(options.time_intervals)?;
        let samples = SpaceTimeSamples::cosine(&piece, mu, times, options.with_maximal)?;
        let strich = samples.strichartz(p);
        let l2 = piece.l2_norm();
        let hs = sobolev_norm(&piece, sobolev_index);
        plain.push((k as f64, (strich / (scale * l2)).log2()));
        sobolev.push((k as f64, (strich / (scale * hs)).log2()));
        let (max_value, ftc) = if options.with_maximal {
            let m = samples.maximal(p);
            maximal.push((k as f64, (m / (scale * l2)).log2()));
            (Some(m), Some(samples.ftc_worst_ratio(p)?))
        } else {
            (None, None)
        };
        bands.push(GammaBand {
            k,
            piece_l2: l2,
            strichartz: strich,
            maximal: max_value,
            ftc_worst_ratio: ftc,
        });
    }
    let fit = fit_log2(plain)?;
    let sobolev_fit = fit_log2(sobolev)?;
    let maximal_fit = if options.with_maximal {
        Some(fit_log2(maximal)?)
    } else {
        None
    };
    Ok(GammaEstimate {
        p,
        alpha,
        n,
        bands,
        gamma: sobolev_index - fit.slope,
        gamma_sobolev: -sobolev_fit.slope,
        below_half_alpha_minus_one: fit.slope < (alpha - 1.0) / 2.0,
        fit,
        sobolev_fit,
        maximal_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FieldDomain;
    use crate::measures::{build_cantor_product_centered, evenize};
    use rand::{Rng, SeedableRng};

    fn random_even(spec: GridSpec, radius: f64, seed: u64) -> GridField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = GridField::zeros(spec, FieldDomain::Frequency);
        for (i, v) in f.values_mut().iter_mut().enumerate() {
            let x: f64 = rng.gen_range(-1.0..1.0);
            if spec.frequency_norm(i) <= radius {
                *v = Complex64::new(x, 0.0);
            }
        }
        f.enforce_real_even()
    }

    #[test]
    fn time_constant_field_gives_lp_norm() {
        let spec = GridSpec::new(2, 16, 2.0).unwrap();
        let mut f = GridField::zeros(spec, FieldDomain::Frequency);
        f.values_mut()[0] = Complex64::new(1.5, 0.0);
        let mu = build_cantor_product_centered(0.25, 2, 2).unwrap();
        // zero frequency: u = cos(-pi/4) u0 for all t
        let m = maximal_norm(&f, &mu, 2.0, 8).unwrap();
        let s = strichartz_norm(&f, &mu, 2.0, 8).unwrap();
        let expected = 1.5 * std::f64::consts::FRAC_1_SQRT_2;
        assert!((m - expected).abs() < 1e-12 && (s - expected).abs() < 1e-12);
    }

    #[test]
    fn maximal_dominates_and_ftc_holds() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let mu = evenize(&crate::measures::build_falconer_lattice(4, 1.0, 2).unwrap());
        for seed in 0..4 {
            let f = random_even(spec, 4.0, seed);
            let times = TimeGrid::trapezoid(256).unwrap();
            let samples = SpaceTimeSamples::cosine(&f, &mu, times, true).unwrap();
            for p in [1.25, 2.0] {
                assert!(samples.maximal(p) >= samples.strichartz(p));
                assert!(samples.ftc_worst_ratio(p).unwrap() <= 1.0 + 1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_even_data() {
        let spec = GridSpec::new(1, 16, 2.0).unwrap();
        let f = GridField::from_fn(spec, |x| Complex64::new(x[0], 0.0));
        let mu = build_cantor_product_centered(0.25, 2, 1).unwrap();
        assert!(strichartz_norm(&f, &mu, 2.0, 4).is_err());
    }
}
