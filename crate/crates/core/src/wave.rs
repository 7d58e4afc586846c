//! Spectral propagators and multipliers on the periodic grid.
//!
//! The symbol of sqrt(-Laplacian) is 2 pi |xi|, so the half-wave group has
//! multiplier exp(2 pi i t |xi|).

use crate::error::{domain, Result};
use crate::fourier::GridField;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative tolerance for accepting a field as real and even.
pub const REAL_EVEN_TOL: f64 = 1e-8;

pub fn half_wave(f: &GridField, t: f64) -> GridField {
    // Reducing the phase mod 1 keeps large t |xi| accurate.
    f.apply_radial(|r| Complex64::from_polar(1.0, 2.0 * PI * (t * r).rem_euclid(1.0)))
}

/// Phase offset (n - 1) pi / 4 used by the cosine propagator.
pub fn cosine_phase(n: usize) -> f64 {
    (n as f64 - 1.0) * PI / 4.0
}

/// cos(t sqrt(-Laplacian) - (n - 1) pi / 4) applied to a real even field.
pub fn cosine_wave(u0: &GridField, t: f64) -> Result<GridField> {
    let even = u0.require_real_even(REAL_EVEN_TOL)?;
    let shift = cosine_phase(u0.spec().n);
    Ok(even.apply_radial(|r| Complex64::new((2.0 * PI * t * r - shift).cos(), 0.0)))
}

/// Time derivative of the cosine propagator.
pub fn cosine_wave_time_derivative(u0: &GridField, t: f64) -> Result<GridField> {
    let even = u0.require_real_even(REAL_EVEN_TOL)?;
    let shift = cosine_phase(u0.spec().n);
    Ok(even.apply_radial(|r| Complex64::new(-2.0 * PI * r * (2.0 * PI * t * r - shift).sin(), 0.0)))
}

/// (1 - Laplacian)^(-s/2), multiplier (1 + 4 pi^2 |xi|^2)^(-s/2).
pub fn bessel_potential(f: &GridField, s: f64) -> GridField {
    f.apply_radial(|r| Complex64::new(sobolev_weight(r, -s), 0.0))
}

fn sobolev_weight(r: f64, s: f64) -> f64 {
    (1.0 + 4.0 * PI * PI * r * r).powf(s / 2.0)
}

/// ||(1 - Laplacian)^(s/2) f||_2 over the torus.
pub fn sobolev_norm(f: &GridField, s: f64) -> f64 {
    let c = f.to_frequency();
    let spec = *c.spec();
    let sum: f64 = c
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = sobolev_weight(spec.frequency_norm(i), s);
            w * w * v.norm_sqr()
        })
        .sum();
    (spec.box_volume() * sum).sqrt()
}

/// Treatment of the zero mode for negative powers of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModePolicy {
    /// Drop the mean and report it.
    Project,
    /// Fail unless the mean already vanishes.
    Reject,
}

#[derive(Debug, Clone)]
pub struct FractionalLaplacian {
    pub field: GridField,
    /// Integral of the input over the torus that was discarded (zero for
    /// nonnegative powers).
    pub projected_mass: Complex64,
}

/// (-Laplacian)^power, multiplier (4 pi^2 |xi|^2)^power.
pub fn frac_laplacian(f: &GridField, power: f64, policy: ZeroModePolicy) -> Result<FractionalLaplacian> {
    let c = f.to_frequency();
    let mean = c.values()[0];
    let mut projected_mass = Complex64::new(0.0, 0.0);
    if power < 0.0 && mean.norm() > 0.0 {
        let scale = c.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        if policy == ZeroModePolicy::Reject && mean.norm() > 1e-14 * scale {
            return Err(domain(format!(
                "negative power {power} of the Laplacian needs a mean-zero field, mean is {mean}"
            )));
        }
        projected_mass = mean * c.spec().box_volume();
    }
    let field = c.apply_radial(|r| {
        if r == 0.0 {
            if power == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            Complex64::new((4.0 * PI * PI * r * r).powf(power), 0.0)
        }
    });
    Ok(FractionalLaplacian { field, projected_mass })
}

/// d/dt of half_wave(u0, t): multiplier 2 pi i |xi| exp(2 pi i t |xi|).
pub fn time_derivative(u0: &GridField, t: f64) -> GridField {
    u0.apply_radial(|r| Complex64::new(0.0, 2.0 * PI * r) * Complex64::from_polar(1.0, 2.0 * PI * t * r))
}

/// Components of the gradient, multipliers 2 pi i xi_j.
pub fn spatial_gradient(f: &GridField) -> Vec<GridField> {
    (0..f.spec().n)
        .map(|j| f.apply_multiplier(|xi| Complex64::new(0.0, 2.0 * PI * xi[j])))
        .collect()
}

/// Laplacian, multiplier -4 pi^2 |xi|^2.
pub fn laplacian(f: &GridField) -> GridField {
    f.apply_radial(|r| Complex64::new(-4.0 * PI * PI * r * r, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{FieldDomain, GridSpec};
    use rand::{Rng, SeedableRng};

    fn random_band_limited(spec: GridSpec, radius: f64, seed: u64) -> GridField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut c = GridField::zeros(spec, FieldDomain::Frequency);
        for (i, v) in c.values_mut().iter_mut().enumerate() {
            let r = spec.frequency_norm(i);
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if r <= radius {
                *v = Complex64::new(a, b);
            }
        }
        c
    }

    fn mode(spec: GridSpec, m: &[f64]) -> GridField {
        GridField::from_fn(spec, |x| {
            let dot: f64 = x.iter().zip(m).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, 2.0 * PI * dot / spec.box_len)
        })
    }

    #[test]
    fn half_wave_is_unitary_group() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let f = random_band_limited(spec, 6.0, 1);
        let norm = f.l2_norm();
        for t in [0.0, 0.13, 0.5, 1.0] {
            assert!((half_wave(&f, t).l2_norm() - norm).abs() < 1e-12 * norm);
        }
        let a = half_wave(&half_wave(&f, 0.3), 0.45);
        let b = half_wave(&f, 0.75);
        assert!(a.max_abs_diff(&b) < 1e-12 * a.sup_norm());
        assert!(half_wave(&f, 0.0).max_abs_diff(&f) < 1e-13 * f.sup_norm());
    }

    #[test]
    fn half_wave_flips_single_mode() {
        let spec = GridSpec::new(2, 16, 2.0).unwrap();
        let f = mode(spec, &[3.0, 4.0]);
        // |xi| = 5 / 2, so t = 1 / (2 |xi|) gives a factor -1.
        let g = half_wave(&f, 0.2);
        assert!(g.max_abs_diff(&f.scale(-1.0)) < 1e-12);
    }

    #[test]
    fn cosine_wave_properties() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let f = random_band_limited(spec, 5.0, 2).enforce_real_even();
        let at_zero = cosine_wave(&f, 0.0).unwrap();
        assert!(at_zero.max_abs_diff(&f.scale(std::f64::consts::FRAC_1_SQRT_2)) < 1e-12 * f.sup_norm());
        assert!(cosine_wave(&random_band_limited(spec, 5.0, 3), 0.1).is_err());

        // second difference in t against -(2 pi |xi|)^2 on a single even mode
        let cos_mode = mode(spec, &[2.0, 1.0]).add(&mode(spec, &[-2.0, -1.0])).scale(0.5);
        let r = 5f64.sqrt() / 2.0;
        let (t, dt) = (0.37, 1e-3);
        let u = |s: f64| cosine_wave(&cos_mode, s).unwrap().to_space();
        let second = u(t + dt).add(&u(t - dt)).add(&u(t).scale(-2.0)).scale(1.0 / (dt * dt));
        let expected = u(t).scale(-(2.0 * PI * r).powi(2));
        assert!(second.max_abs_diff(&expected) < 1e-4 * expected.sup_norm().max(1.0));

        // pointwise bound by the two half-waves
        let c = cosine_wave(&f, 0.4).unwrap().to_space();
        let plus = half_wave(&f, 0.4).to_space();
        let minus = half_wave(&f, -0.4).to_space();
        for ((a, b), d) in c.values().iter().zip(plus.values()).zip(minus.values()) {
            assert!(a.norm() <= 0.5 * (b.norm() + d.norm()) + 1e-12);
        }

        // the multiplier solves the wave equation exactly
        let dtt = f.apply_radial(|r| {
            let w = 2.0 * PI * r;
            Complex64::new(-w * w * (w * 0.4 - cosine_phase(2)).cos(), 0.0)
        });
        let lap = laplacian(&c);
        assert!(dtt.max_abs_diff(&lap) < 1e-10 * lap.sup_norm());
    }

    #[test]
    fn bessel_potential_inverts_and_is_dyadic() {
        let spec = GridSpec::new(2, 64, 2.0).unwrap();
        let f = random_band_limited(spec, 12.0, 4);
        let back = bessel_potential(&bessel_potential(&f, 1.3), -1.3);
        assert!(back.max_abs_diff(&f) < 1e-12 * f.sup_norm());
        assert!((sobolev_norm(&f, 0.0) - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        // band 3 lives in 2 < |xi| < 8
        let bump = crate::fourier::standard_bump();
        let piece = f.apply_radial(|r| Complex64::new(bump.band_window(3, r), 0.0));
        for s in [-1.0, 0.5, 1.5] {
            let ratio = sobolev_norm(&piece, s) / ((1.0 + 4.0 * PI * PI * 16.0f64).powf(s / 2.0) * piece.l2_norm());
            let bound = 2f64.powf(2.0 * s.abs());
            assert!(ratio >= 1.0 / bound && ratio <= bound, "s={s} ratio={ratio}");
        }
    }

    #[test]
    fn fractional_laplacian_round_trip() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let f = random_band_limited(spec, 6.0, 5);
        let m = mode(spec, &[1.0, -3.0]);
        let lap = frac_laplacian(&m, 1.0, ZeroModePolicy::Project).unwrap().field;
        let r2 = 10.0 / 4.0;
        assert!(lap.max_abs_diff(&m.scale(4.0 * PI * PI * r2)) < 1e-10);

        let inv = frac_laplacian(&f, -1.0, ZeroModePolicy::Project).unwrap();
        assert!((inv.projected_mass - f.integral()).norm() < 1e-12);
        let back = frac_laplacian(&inv.field, 1.0, ZeroModePolicy::Project).unwrap().field;
        let mut centered = f.to_frequency();
        centered.values_mut()[0] = Complex64::new(0.0, 0.0);
        assert!(back.max_abs_diff(&centered) < 1e-12 * f.sup_norm());
        assert!(frac_laplacian(&f, -1.0, ZeroModePolicy::Reject).is_err());
    }

    #[test]
    fn derivatives_and_plancherel() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let f = random_band_limited(spec, 6.0, 6);
        let grad = spatial_gradient(&f);
        let lhs: f64 = grad.iter().map(|g| g.l2_norm().powi(2)).sum();
        let c = f.to_frequency();
        let rhs: f64 = c
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (2.0 * PI * spec.frequency_norm(i)).powi(2) * v.norm_sqr())
            .sum::<f64>()
            * spec.box_volume();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);

        let (t, dt) = (0.3, 1e-4);
        let fd = half_wave(&f, t + dt).add(&half_wave(&f, t - dt).scale(-1.0)).scale(0.5 / dt);
        let exact = time_derivative(&f, t);
        assert!(fd.max_abs_diff(&exact) < 1e-5 * exact.sup_norm());

        let energy_gap = |t: f64| {
            let dt_u = time_derivative(&f, t).to_space();
            let grad: Vec<GridField> = spatial_gradient(&half_wave(&f, t)).iter().map(|g| g.to_space()).collect();
            let mut acc = 0.0;
            for i in 0..spec.len() {
                let g2: f64 = grad.iter().map(|g| g.values()[i].norm_sqr()).sum();
                acc += dt_u.values()[i].norm_sqr() - g2;
            }
            acc * spec.cell_volume()
        };
        for t in [0.0, 0.7] {
            assert!(energy_gap(t).abs() < 1e-9 * lhs);
        }
    }
}
