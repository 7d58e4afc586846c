//! Norm functionals over atomic measures and the exponent-fitting engine.

pub mod decay;
pub mod strichartz;
pub mod trace;
pub mod weak;

pub use decay::{cone_decay_norm, estimate_beta, sphere_decay_norm, BetaEstimate};
pub use strichartz::{
    estimate_gamma, maximal_norm, strichartz_norm, GammaEstimate, GammaOptions, SpaceTimeSamples,
};
pub use trace::{band_trace_sup, BandTrace};
pub use weak::{weak_type_check, WeakTypeReport};

use crate::error::{domain, param, Result};
use crate::fourier::{GridField, PointSampler};
use crate::measures::AtomicMeasure;
use serde::Serialize;

/// Least-squares power law on (log2 scale, log2 value) pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Range of log2 scales covered by the samples.
    pub scale_range: (f64, f64),
    /// (log2 scale, log2 value) pairs.
    pub samples: Vec<(f64, f64)>,
}

impl ExponentFit {
    /// Fitted log2 value at `log2_scale`, refused outside the sampled window.
    pub fn predict(&self, log2_scale: f64) -> Result<f64> {
        let (lo, hi) = self.scale_range;
        if log2_scale < lo || log2_scale > hi {
            return Err(param(format!(
                "log2 scale {log2_scale} lies outside the fitted window [{lo}, {hi}]"
            )));
        }
        Ok(self.intercept + self.slope * log2_scale)
    }
}

/// Fits value = 2^intercept * scale^slope from (scale, value) samples.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(param(format!("a fit needs at least 3 samples, got {}", samples.len())));
    }
    let mut logs = Vec::with_capacity(samples.len());
    for &(scale, value) in samples {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(param(format!("scale {scale} must be positive")));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(param(format!("value {value} at scale {scale} must be positive")));
        }
        logs.push((scale.log2(), value.log2()));
    }
    fit_log2(logs)
}

/// Least squares on samples that are already in log2 form.
pub fn fit_log2(samples: Vec<(f64, f64)>) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(param(format!("a fit needs at least 3 samples, got {}", samples.len())));
    }
    let count = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / count;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / count;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(param("all samples share one scale"));
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_rms = (samples
        .iter()
        .map(|s| (s.1 - intercept - slope * s.0).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        residual_rms,
        scale_range: (lo, hi),
        samples,
    })
}

/// Atom coordinates of a measure, checked against the grid dimension.
pub(crate) fn atom_sampler(field: &GridField, mu: &AtomicMeasure) -> Result<PointSampler> {
    if mu.dim() != field.spec().n {
        return Err(param(format!(
            "measure dimension {} does not match field dimension {}",
            mu.dim(),
            field.spec().n
        )));
    }
    PointSampler::new(*field.spec(), field.mode_radius(), mu.cloud().coords())
}

/// (sum_j w_j |v_j|^p)^(1/p).
pub fn weighted_lp(values: &[f64], weights: &[f64], p: f64) -> f64 {
    let sum: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum();
    sum.powf(1.0 / p)
}

/// L^p(d mu) norm of a band-limited field evaluated at the atoms.
pub fn lp_mu_norm(field: &GridField, mu: &AtomicMeasure, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(param(format!("p must be at least 1, got {p}")));
    }
    let values = atom_sampler(field, mu)?.sample(field)?;
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    Ok(weighted_lp(&moduli, mu.cloud().weights(), p))
}

/// ||e^(it sqrt(-Lap)) u0||_{L^p(mu)} / (||mu||^(1/p - 1/2) C^(1/2) ||u0||_{H^s}).
pub fn fixed_time_ratio(
    u0: &GridField,
    mu: &AtomicMeasure,
    frostman: f64,
    p: f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    let norm = crate::wave::sobolev_norm(u0, s);
    if norm == 0.0 {
        return Err(domain("initial data is zero"));
    }
    let evolved = crate::wave::half_wave(u0, t);
    let lp = lp_mu_norm(&evolved, mu, p)?;
    let mass = mu.total_mass();
    Ok(lp / (mass.powf(1.0 / p - 0.5) * frostman.sqrt() * norm))
}

/// Uniform nodes on [0, 1] with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TimeGrid {
    /// `intervals` subintervals, hence `intervals + 1` nodes.
    pub fn trapezoid(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(param("time grid needs at least one interval"));
        }
        let h = 1.0 / intervals as f64;
        let nodes = (0..=intervals).map(|i| i as f64 * h).collect();
        let weights = (0..=intervals)
            .map(|i| if i == 0 || i == intervals { 0.5 * h } else { h })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
