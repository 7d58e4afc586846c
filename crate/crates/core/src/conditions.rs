//! Closed-form exponent conditions for averaged wave decay and the Falconer
//! distance problem.

use crate::error::{range, Result};
use serde::Serialize;

fn check_finite(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(range(format!("{name} must be finite, got {v}")));
        }
    }
    Ok(())
}

/// Necessary Sobolev exponent for the averaged L^p(dmu) Strichartz estimate.
pub fn s_necessary(alpha: f64, p: f64, n: usize) -> Result<f64> {
    check_finite(&[("alpha", alpha), ("p", p)])?;
    if n < 2 {
        return Err(range(format!("dimension must be at least 2, got {n}")));
    }
    let nf = n as f64;
    if !(alpha > 0.0 && alpha <= nf + 1.0) {
        return Err(range(format!("alpha must lie in (0, n + 1] = (0, {}], got {alpha}", nf + 1.0)));
    }
    if p < 1.0 {
        return Err(range(format!("p must be at least 1, got {p}")));
    }
    let energy = nf / 2.0 - alpha / p;
    let value = if alpha <= 1.0 {
        energy.max((nf + 1.0) / 4.0)
    } else if alpha <= nf {
        energy
            .max((nf + 1.0) / 4.0 - (alpha - 1.0) / (2.0 * p))
            .max((nf + 2.0) / 4.0 - alpha / 4.0)
    } else {
        energy
            .max((nf + 1.0) / 4.0 - (2.0 * alpha - (nf + 1.0)) / (2.0 * p))
            .max((nf + 1.0) / 2.0 - alpha / 2.0)
    };
    Ok(value)
}

/// A threshold that is only available in some dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    Known(f64),
    Unknown,
}

impl Threshold {
    pub fn value(&self) -> Option<f64> {
        match self {
            Threshold::Known(v) => Some(*v),
            Threshold::Unknown => None,
        }
    }
}

/// Known sufficient threshold: any s strictly above it suffices.
pub fn sufficient_s(alpha: f64, p: f64, n: usize) -> Result<Threshold> {
    if n != 2 && n != 3 {
        // Validate the remaining parameters even though no value is known.
        s_necessary(alpha, p, n.max(2))?;
        return Ok(Threshold::Unknown);
    }
    let value = if p <= 2.0 {
        s_necessary(alpha, 2.0, n)?
    } else {
        s_necessary(alpha, p, n)?
    };
    if p < 1.0 {
        return Err(range(format!("p must be at least 1, got {p}")));
    }
    Ok(Threshold::Known(value))
}

/// Necessary condition coming from the smoothing estimate for 1 <= p <= 2.
pub fn new_necessary(alpha: f64, p: f64, n: usize) -> Result<f64> {
    check_finite(&[("alpha", alpha), ("p", p)])?;
    if !(1.0..=2.0).contains(&p) {
        return Err(range(format!("p must lie in [1, 2], got {p}")));
    }
    let nf = n as f64;
    Ok(((nf - alpha) / 2.0).max((nf + 2.0 - alpha) / 4.0) - 1.0 / p)
}

/// Open alpha-interval on which the distance-set bound s >= (n - 2) / 4
/// exceeds the new necessary condition, or `None` when it is empty.
pub fn new_condition_region(p: f64, n: usize) -> Result<Option<(f64, f64)>> {
    check_finite(&[("p", p)])?;
    if !(1.0..=2.0).contains(&p) {
        return Err(range(format!("p must lie in [1, 2], got {p}")));
    }
    if n < 2 {
        return Err(range(format!("dimension must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let lower = ((nf + 2.0) / 2.0 - 2.0 / p).max(4.0 - 4.0 / p).max(0.0);
    let upper = nf / 2.0;
    Ok((lower < upper).then_some((lower, upper)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaSource {
    Mattila,
    ErdoganWolff,
    LucaRogers,
}

impl GammaSource {
    pub fn label(&self) -> &'static str {
        match self {
            GammaSource::Mattila => "Mattila",
            GammaSource::ErdoganWolff => "Erdogan/Wolff",
            GammaSource::LucaRogers => "Luca-Rogers",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaBound {
    pub value: f64,
    pub source: GammaSource,
}

/// Best known lower bound for the averaged decay exponent gamma_n(alpha).
pub fn gamma_lower_bound(alpha: f64, n: usize) -> Result<GammaBound> {
    check_finite(&[("alpha", alpha)])?;
    if n < 2 {
        return Err(range(format!("dimension must be at least 2, got {n}")));
    }
    let nf = n as f64;
    if !(alpha > 0.0 && alpha <= nf) {
        return Err(range(format!("alpha must lie in (0, n] = (0, {nf}], got {alpha}")));
    }
    let half = nf / 2.0;
    let low = (nf - 1.0) / 2.0;
    let mut rows: Vec<(f64, GammaSource)> = Vec::with_capacity(4);
    if alpha <= low {
        rows.push((0.5, GammaSource::Mattila));
    }
    if (low..=half).contains(&alpha) {
        rows.push((0.5 - (2.0 * alpha - nf + 1.0) / 4.0, GammaSource::Mattila));
    }
    if (half..=half + 1.0).contains(&alpha) {
        rows.push((0.25 - (2.0 * alpha - nf) / 8.0, GammaSource::ErdoganWolff));
    }
    if (half..=nf).contains(&alpha) {
        let d = nf - alpha;
        rows.push((d * d / (2.0 * (nf - 1.0) * (2.0 * nf - alpha - 1.0)), GammaSource::LucaRogers));
    }
    // Seams are closed on both sides; keep the first row attaining the max.
    let (value, source) = rows
        .into_iter()
        .fold(None::<(f64, GammaSource)>, |best, row| match best {
            Some(b) if b.0 >= row.0 => Some(b),
            _ => Some(row),
        })
        .expect("alpha in (0, n] is covered by some row");
    Ok(GammaBound { value, source })
}

/// Least sampled alpha with gamma(alpha) >= (n + 1) / 2 - alpha.
/// Samples must be sorted by alpha.
pub fn falconer_threshold_from_gamma(samples: &[(f64, f64)], n: usize) -> Option<f64> {
    let bar = (n as f64 + 1.0) / 2.0;
    samples
        .iter()
        .find(|(alpha, gamma)| *gamma >= bar - alpha)
        .map(|(alpha, _)| *alpha)
}

/// Samples gamma_lower_bound on (0, n] at the given step.
pub fn gamma_curve(n: usize, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) {
        return Err(range("step must be positive"));
    }
    let count = (n as f64 / step).floor() as usize;
    (1..=count)
        .map(|i| {
            let alpha = i as f64 * step;
            gamma_lower_bound(alpha, n).map(|g| (alpha, g.value))
        })
        .collect()
}

/// Spherical-average hypothesis beta_n(alpha) >= n - alpha.
pub fn mattila_threshold(beta: f64, alpha: f64, n: usize) -> bool {
    beta >= n as f64 - alpha
}

/// Averaged decay exponent implied by a spherical decay exponent.
pub fn prop_well(beta: f64, alpha: f64) -> f64 {
    (beta + 1.0 - alpha) / 2.0
}

/// Requirement gamma >= (n + 1) / 2 - alpha, stated for
/// (n - 1) / 2 < alpha < (n + 1) / 2.
pub fn wells_condition(gamma: f64, alpha: f64, n: usize) -> Result<bool> {
    let nf = n as f64;
    if !(alpha > (nf - 1.0) / 2.0 && alpha < (nf + 1.0) / 2.0) {
        return Err(range(format!(
            "the gamma condition is stated for {} < alpha < {}, got {alpha}",
            (nf - 1.0) / 2.0,
            (nf + 1.0) / 2.0
        )));
    }
    Ok(gamma >= (nf + 1.0) / 2.0 - alpha)
}

/// Decay exponent implied by the null-form exponent gamma*.
pub fn prop_nullform(gamma_star: f64) -> f64 {
    gamma_star.min(0.5)
}

/// Pinned distance bound, stated for dim E in [n/2, (n + 1)/2].
pub fn liu_pinned(dim_e: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if !(dim_e >= nf / 2.0 && dim_e <= (nf + 1.0) / 2.0) {
        return Err(range(format!(
            "pinned bound is stated for dim E in [{}, {}], got {dim_e}",
            nf / 2.0,
            (nf + 1.0) / 2.0
        )));
    }
    Ok(1.5 * nf + 1.0 - 2.0 * dim_e)
}
