//! Fourier transforms of measures, Littlewood-Paley pieces and mollification.

pub mod grid;
pub mod nufft;
pub mod snapshot;

pub use grid::{fft_nd, FieldDomain, GridField, GridSpec};
pub use nufft::{measure_coefficients, NufftPlan, PointSampler};

use crate::error::{domain, param, Result};
use crate::measures::AtomicMeasure;
use crate::numeric::{gauss_legendre, unit_sphere_area};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Radial cutoff equal to 1 on [0, 1/2] and 0 beyond 1, smooth in between.
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpProfile;

pub fn standard_bump() -> BumpProfile {
    BumpProfile
}

fn smooth_step_part(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

impl BumpProfile {
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= 0.5 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            let s = 2.0 * (1.0 - r);
            let a = smooth_step_part(s);
            a / (a + smooth_step_part(1.0 - s))
        }
    }

    /// Littlewood-Paley window of band `k` at |xi| = `r`.
    ///
    /// Band 0 is the low-pass bump itself; band k >= 1 is
    /// bump(r / 2^k) - bump(r / 2^(k-1)), supported in 2^(k-2) < r < 2^k.
    pub fn band_window(&self, k: u32, r: f64) -> f64 {
        if k == 0 {
            self.eval(r)
        } else {
            let top = (1u64 << k) as f64;
            self.eval(r / top) - self.eval(2.0 * r / top)
        }
    }

    /// Sum of windows 0..=k, which equals bump(r / 2^k).
    pub fn low_pass(&self, k: u32, r: f64) -> f64 {
        self.eval(r / (1u64 << k) as f64)
    }

    /// Integral of the radial window over R^n, int bump(|xi|) dxi.
    pub fn mass(&self, n: usize) -> f64 {
        let mut acc = 0.5f64.powi(n as i32) / n as f64;
        for (r, w) in gauss_legendre(64, 0.5, 1.0) {
            acc += w * self.eval(r) * r.powi(n as i32 - 1);
        }
        unit_sphere_area(n) * acc
    }
}

/// Fourier transform of an even measure at frequencies `xi` (`n` values each):
/// sum_j w_j cos(2 pi x_j . xi).
pub fn measure_ft(mu: &AtomicMeasure, xi: &[f64]) -> Result<Vec<f64>> {
    if !mu.is_even() {
        return Err(domain(
            "measure is not flagged even; use measure_ft_complex for the full transform",
        ));
    }
    let n = mu.dim();
    if !xi.len().is_multiple_of(n) {
        return Err(param("frequency array does not match the measure dimension"));
    }
    Ok(xi
        .chunks(n)
        .map(|f| {
            mu.cloud()
                .iter()
                .map(|(x, w)| {
                    let dot: f64 = x.iter().zip(f).map(|(a, b)| a * b).sum();
                    w * (2.0 * PI * dot.rem_euclid(1.0)).cos()
                })
                .sum()
        })
        .collect())
}

/// Full transform sum_j w_j exp(-2 pi i x_j . xi).
pub fn measure_ft_complex(mu: &AtomicMeasure, xi: &[f64]) -> Result<Vec<Complex64>> {
    let n = mu.dim();
    if !xi.len().is_multiple_of(n) {
        return Err(param("frequency array does not match the measure dimension"));
    }
    Ok(xi
        .chunks(n)
        .map(|f| {
            mu.cloud()
                .iter()
                .map(|(x, w)| {
                    let dot: f64 = x.iter().zip(f).map(|(a, b)| a * b).sum();
                    let phase = -2.0 * PI * dot.rem_euclid(1.0);
                    Complex64::new(phase.cos(), phase.sin()) * w
                })
                .sum()
        })
        .collect())
}

/// Checks that the measure fits inside one period of the grid.
fn check_support(mu: &AtomicMeasure, spec: &GridSpec) -> Result<()> {
    if mu.dim() != spec.n {
        return Err(param(format!(
            "measure dimension {} does not match grid dimension {}",
            mu.dim(),
            spec.n
        )));
    }
    for (lo, hi) in mu.cloud().bounding_box() {
        if hi - lo >= spec.box_len {
            return Err(param(format!(
                "support extent {} does not fit in a box of side {}",
                hi - lo,
                spec.box_len
            )));
        }
    }
    Ok(())
}

/// Fourier coefficients of a measure on a periodic grid, c_m = mu^(m/L) / L^n.
#[derive(Debug, Clone)]
pub struct MeasureSpectrum {
    coefficients: GridField,
    real_even: bool,
}

impl MeasureSpectrum {
    pub fn new(mu: &AtomicMeasure, spec: GridSpec) -> Result<Self> {
        check_support(mu, &spec)?;
        let mut coefficients = measure_coefficients(&spec, mu.cloud().coords(), mu.cloud().weights())?;
        if mu.is_even() {
            coefficients = coefficients.enforce_real_even();
        }
        Ok(Self {
            coefficients,
            real_even: mu.is_even(),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        self.coefficients.spec()
    }

    pub fn coefficients(&self) -> &GridField {
        &self.coefficients
    }

    /// The measure filtered by a radial window, in frequency form.
    pub fn filtered(&self, window: impl Fn(f64) -> f64) -> GridField {
        let f = self.coefficients.apply_radial(|r| Complex64::new(window(r), 0.0));
        if self.real_even {
            f.enforce_real_even()
        } else {
            f
        }
    }

    /// Littlewood-Paley piece of band `k`, checked against the Nyquist limit.
    pub fn piece(&self, k: u32) -> Result<LittlewoodPaleyPiece> {
        let spec = *self.spec();
        let top = 2f64.powi(k as i32);
        if top >= spec.nyquist() {
            return Err(param(format!(
                "band {k} reaches |xi| = {top}, beyond the grid Nyquist frequency {}",
                spec.nyquist()
            )));
        }
        let bump = standard_bump();
        let field = self.filtered(|r| bump.band_window(k, r));
        Ok(LittlewoodPaleyPiece {
            k,
            annulus: if k == 0 { (0.0, 1.0) } else { (top / 4.0, top) },
            field,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LittlewoodPaleyPiece {
    pub k: u32,
    /// Open frequency annulus containing the support of the piece.
    pub annulus: (f64, f64),
    /// Frequency-domain coefficients of the piece.
    pub field: GridField,
}

/// Littlewood-Paley pieces 0..=k_max of a measure.
pub fn lp_decompose(mu: &AtomicMeasure, k_max: u32, spec: GridSpec) -> Result<Vec<LittlewoodPaleyPiece>> {
    let top = 2f64.powi(k_max as i32);
    if top >= spec.nyquist() {
        return Err(param(format!(
            "2^{k_max} = {top} is not below the Nyquist frequency {} (N = {}, L = {})",
            spec.nyquist(),
            spec.size,
            spec.box_len
        )));
    }
    let spectrum = MeasureSpectrum::new(mu, spec)?;
    (0..=k_max).map(|k| spectrum.piece(k)).collect()
}

/// Norm comparison for one Littlewood-Paley piece.
#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub k: u32,
    pub l1: f64,
    pub l2: f64,
    pub sup: f64,
    /// ||f||_2^2 <= ||f||_1 ||f||_inf on the grid.
    pub cauchy_schwarz_holds: bool,
    /// ||f||_2 / (2^((n - alpha) k / 2) ||mu||^(1/2) C^(1/2)).
    pub normalized_l2: f64,
}

pub fn piece_l2_interpolation_check(
    piece: &LittlewoodPaleyPiece,
    total_mass: f64,
    alpha: f64,
    frostman: f64,
) -> InterpolationReport {
    let space = piece.field.to_space();
    let spec = space.spec();
    let cell = spec.cell_volume();
    let mut l1 = 0.0;
    let mut l2sq = 0.0;
    let mut sup: f64 = 0.0;
    for v in space.values() {
        let a = v.norm();
        l1 += a;
        l2sq += a * a;
        sup = sup.max(a);
    }
    l1 *= cell;
    l2sq *= cell;
    let l2 = l2sq.sqrt();
    let n = spec.n as f64;
    let scale = 2f64.powf((n - alpha) * piece.k as f64 / 2.0) * (total_mass * frostman).sqrt();
    InterpolationReport {
        k: piece.k,
        l1,
        l2,
        sup,
        cauchy_schwarz_holds: l2sq <= l1 * sup * (1.0 + 1e-12),
        normalized_l2: l2 / scale,
    }
}

/// mu * (R^n psi(R .)) where psi^ = bump(|xi| / 4), i.e. frequencies up to 4R.
pub fn mollify_measure(mu: &AtomicMeasure, radius: f64, spec: GridSpec) -> Result<GridField> {
    if !(radius > 0.0) {
        return Err(param("mollification radius must be positive"));
    }
    if 4.0 * radius >= spec.nyquist() {
        return Err(param(format!(
            "mollifier reaches |xi| = {}, beyond the Nyquist frequency {}",
            4.0 * radius,
            spec.nyquist()
        )));
    }
    let spectrum = MeasureSpectrum::new(mu, spec)?;
    let bump = standard_bump();
    Ok(spectrum.filtered(|r| bump.eval(r / (4.0 * radius))).to_space())
}

/// Sup-norm bound check for a mollified measure: sup / (C R^(n - alpha)).
pub fn mollifier_bound_ratio(field: &GridField, radius: f64, alpha: f64, frostman: f64) -> f64 {
    let n = field.spec().n as f64;
    field.sup_norm() / (frostman * radius.powf(n - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor_product_centered, build_sphere_measure};

    #[test]
    fn bump_shape() {
        let b = standard_bump();
        assert_eq!(b.eval(0.0), 1.0);
        assert_eq!(b.eval(0.5), 1.0);
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.eval(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = b.eval(0.5 + 0.005 * i as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn windows_partition_unity() {
        let b = standard_bump();
        for i in 0..2000 {
            let r = i as f64 * 0.013;
            let total: f64 = (0..=12).map(|k| b.band_window(k, r)).sum();
            assert!((total - 1.0).abs() < 1e-14, "r = {r}");
            for k in 1..=12u32 {
                let w = b.band_window(k, r);
                let top = 2f64.powi(k as i32);
                if r <= top / 4.0 || r >= top {
                    assert_eq!(w, 0.0);
                }
                assert!(w >= -1e-15);
            }
        }
    }

    #[test]
    fn even_transform_matches_complex() {
        let mu = build_cantor_product_centered(0.25, 3, 2).unwrap();
        let xi = [0.3, 1.7, 5.0, -2.2, 13.1, 0.0];
        let real = measure_ft(&mu, &xi).unwrap();
        let full = measure_ft_complex(&mu, &xi).unwrap();
        for (a, b) in real.iter().zip(&full) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn non_even_requires_complex_path() {
        let mu = AtomicMeasure::single_atom(&[0.25], 1.0).unwrap();
        assert!(measure_ft(&mu, &[1.0]).is_err());
        let v = measure_ft_complex(&mu, &[1.0]).unwrap();
        assert!((v[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn spectrum_matches_direct_transform() {
        let mu = build_sphere_measure(0.5, 2, 200).unwrap();
        let spec = GridSpec::new(2, 64, 2.0).unwrap();
        let s = MeasureSpectrum::new(&mu, spec).unwrap();
        for flat in [0usize, 5, 64 * 3 + 7, 64 * 40 + 33, 64 * 63 + 1] {
            let xi = spec.frequency(flat);
            let exact = measure_ft(&mu, &xi[..2]).unwrap()[0] / 4.0;
            assert!((s.coefficients().values()[flat].re - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn nyquist_is_enforced() {
        let mu = AtomicMeasure::single_atom(&[0.0, 0.0], 1.0).unwrap();
        let spec = GridSpec::new(2, 64, 2.0).unwrap();
        assert!(lp_decompose(&mu, 4, spec).is_err());
        assert_eq!(lp_decompose(&mu, 3, spec).unwrap().len(), 4);
    }

    #[test]
    fn unit_atom_pieces_grow_like_volume() {
        // On the torus mu_k(0) = L^-n sum_m window_k(|m| / L); for large k this
        // approaches int window_k = 2^(nk) (1 - 2^-n) |bump|.
        let mu = AtomicMeasure::single_atom(&[0.0, 0.0], 1.0).unwrap();
        let spec = GridSpec::new(2, 256, 2.0).unwrap();
        let pieces = lp_decompose(&mu, 5, spec).unwrap();
        let bump = standard_bump();
        let mass = bump.mass(2);
        for p in &pieces {
            let mut lattice = 0.0;
            for a in -128i32..128 {
                for b in -128i32..128 {
                    let r = ((a * a + b * b) as f64).sqrt() / 2.0;
                    lattice += bump.band_window(p.k, r);
                }
            }
            lattice /= 4.0;
            let report = piece_l2_interpolation_check(p, 1.0, 0.0, 1.0);
            assert!(report.cauchy_schwarz_holds);
            assert!((report.sup - lattice).abs() < 1e-9 * lattice, "k={}", p.k);
            if p.k >= 3 {
                let expected = 4f64.powi(p.k as i32) * 0.75 * mass;
                assert!((report.sup - expected).abs() < 1e-3 * expected, "k={}", p.k);
            }
        }
    }

    #[test]
    fn mollified_atom_peak() {
        let mu = AtomicMeasure::single_atom(&[0.0, 0.0], 1.0).unwrap();
        let spec = GridSpec::new(2, 256, 2.0).unwrap();
        let radius = 4.0;
        let f = mollify_measure(&mu, radius, spec).unwrap();
        let expected = 16.0 * radius * radius * standard_bump().mass(2);
        assert!((f.sup_norm() - expected).abs() < 1e-6 * expected);
        assert!((mollifier_bound_ratio(&f, radius, 0.0, 1.0) - 16.0 * standard_bump().mass(2)).abs() < 1e-6);
    }
}
