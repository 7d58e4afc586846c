//! Non-uniform FFT by Gaussian gridding on an oversampled periodic grid.
//!
//! Type 1 maps weighted points to Fourier coefficients
//! F(m) = sum_j w_j exp(-2 pi i m.x_j / L); type 2 evaluates
//! f(x_j) = sum_m c_m exp(2 pi i m.x_j / L). Modes run over [-M/2, M/2)^n
//! and are stored in FFT order.

use super::grid::{fft_nd_with, signed_mode, FieldDomain, GridField, GridSpec};
use crate::error::{param, resource, Result};
use crate::numeric::good_fft_size;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Half-width of the spreading stencil, in oversampled grid cells.
const SPREAD: usize = 12;
const WIDTH: usize = 2 * SPREAD;
const OVERSAMPLED_BUDGET: usize = 1 << 25;

pub struct NufftPlan {
    dim: usize,
    modes: usize,
    fine: usize,
    count: usize,
    starts: Vec<usize>,
    kernel: Vec<f64>,
    deconv: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NufftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NufftPlan")
            .field("dim", &self.dim)
            .field("modes", &self.modes)
            .field("fine", &self.fine)
            .field("count", &self.count)
            .finish()
    }
}

impl NufftPlan {
    /// `coords` holds `dim` coordinates per point; the period is `box_len`.
    pub fn new(dim: usize, modes: usize, box_len: f64, coords: &[f64]) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(param("coordinate array does not match the dimension"));
        }
        if modes < 2 || !modes.is_multiple_of(2) {
            return Err(param(format!("mode count must be even and >= 2, got {modes}")));
        }
        let fine = good_fft_size(2 * modes).max(WIDTH);
        if fine.checked_pow(dim as u32).is_none_or(|t| t > OVERSAMPLED_BUDGET) {
            return Err(resource(format!("oversampled grid {fine}^{dim} is too large")));
        }
        let ratio = fine as f64 / modes as f64;
        let tau = PI * SPREAD as f64 / (modes as f64 * modes as f64 * ratio * (ratio - 0.5));
        let h = 2.0 * PI / fine as f64;
        let count = coords.len() / dim;
        let mut starts = Vec::with_capacity(coords.len());
        let mut kernel = Vec::with_capacity(coords.len() * WIDTH);
        for &x in coords {
            let theta = (2.0 * PI * x / box_len).rem_euclid(2.0 * PI);
            let k0 = (theta / h).floor() as i64;
            let first = k0 - SPREAD as i64 + 1;
            starts.push(first.rem_euclid(fine as i64) as usize);
            for l in 0..WIDTH as i64 {
                let d = theta - (first + l) as f64 * h;
                kernel.push((-d * d / (4.0 * tau)).exp());
            }
        }
        let scale = (PI / tau).sqrt();
        let deconv = (0..modes)
            .map(|i| {
                let m = signed_mode(i, modes) as f64;
                scale * (m * m * tau).exp() / fine as f64
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            modes,
            fine,
            count,
            starts,
            kernel,
            deconv,
            forward: planner.plan_fft_forward(fine),
            inverse: planner.plan_fft_inverse(fine),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn point_count(&self) -> usize {
        self.count
    }

    fn stencil(&self, point: usize, axis: usize) -> (usize, &[f64]) {
        let k = point * self.dim + axis;
        (self.starts[k], &self.kernel[k * WIDTH..(k + 1) * WIDTH])
    }

    fn for_each_stencil(&self, point: usize, mut f: impl FnMut(usize, f64)) {
        let fine = self.fine;
        let wrap = |s: usize, l: usize| {
            let i = s + l;
            if i >= fine {
                i - fine
            } else {
                i
            }
        };
        match self.dim {
            1 => {
                let (s0, k0) = self.stencil(point, 0);
                for (l0, w0) in k0.iter().enumerate() {
                    f(wrap(s0, l0), *w0);
                }
            }
            2 => {
                let (s0, k0) = self.stencil(point, 0);
                let (s1, k1) = self.stencil(point, 1);
                for (l0, w0) in k0.iter().enumerate() {
                    let row = wrap(s0, l0) * fine;
                    for (l1, w1) in k1.iter().enumerate() {
                        f(row + wrap(s1, l1), w0 * w1);
                    }
                }
            }
            _ => {
                let (s0, k0) = self.stencil(point, 0);
                let (s1, k1) = self.stencil(point, 1);
                let (s2, k2) = self.stencil(point, 2);
                for (l0, w0) in k0.iter().enumerate() {
                    let plane = wrap(s0, l0) * fine * fine;
                    for (l1, w1) in k1.iter().enumerate() {
                        let row = plane + wrap(s1, l1) * fine;
                        let w01 = w0 * w1;
                        for (l2, w2) in k2.iter().enumerate() {
                            f(row + wrap(s2, l2), w01 * w2);
                        }
                    }
                }
            }
        }
    }

    /// Maps a flat mode index (FFT order, `modes` per axis) to its position
    /// on the oversampled grid together with the deconvolution factor.
    fn mode_slot(&self, flat: usize) -> (usize, f64) {
        let mut rest = flat;
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = rest % self.modes;
            rest /= self.modes;
        }
        let mut slot = 0;
        let mut factor = 1.0;
        for &i in idx.iter().take(self.dim) {
            let m = signed_mode(i, self.modes);
            slot = slot * self.fine + m.rem_euclid(self.fine as i64) as usize;
            factor *= self.deconv[i];
        }
        (slot, factor)
    }

    /// Type 1: weights at the points to M^n coefficients.
    pub fn type1(&self, weights: &[Complex64]) -> Result<Vec<Complex64>> {
        if weights.len() != self.count {
            return Err(param("weight count does not match the plan"));
        }
        if self.dim > 3 {
            return Err(param("NUFFT supports dimensions 1 to 3"));
        }
        let mut grid = vec![Complex64::new(0.0, 0.0); self.fine.pow(self.dim as u32)];
        for (p, w) in weights.iter().enumerate() {
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            self.for_each_stencil(p, |i, k| grid[i] += w * k);
        }
        fft_nd_with(&mut grid, self.dim, self.fine, &self.forward);
        Ok((0..self.modes.pow(self.dim as u32))
            .map(|flat| {
                let (slot, factor) = self.mode_slot(flat);
                grid[slot] * factor
            })
            .collect())
    }

    /// Type 2: M^n coefficients to values at the points.
    pub fn type2(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.modes.pow(self.dim as u32) {
            return Err(param("coefficient count does not match the plan"));
        }
        if self.dim > 3 {
            return Err(param("NUFFT supports dimensions 1 to 3"));
        }
        let mut grid = vec![Complex64::new(0.0, 0.0); self.fine.pow(self.dim as u32)];
        for (flat, c) in coeffs.iter().enumerate() {
            let (slot, factor) = self.mode_slot(flat);
            grid[slot] = c * factor;
        }
        fft_nd_with(&mut grid, self.dim, self.fine, &self.inverse);
        Ok((0..self.count)
            .map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                self.for_each_stencil(p, |i, k| acc += grid[i] * k);
                acc
            })
            .collect())
    }
}

/// Exact type 1 sum, used for small problems and as a reference.
pub fn type1_direct(dim: usize, modes: usize, box_len: f64, coords: &[f64], weights: &[Complex64]) -> Vec<Complex64> {
    let total = modes.pow(dim as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let freqs = mode_vectors(dim, modes, box_len);
    for (flat, slot) in out.iter_mut().enumerate() {
        let xi = &freqs[flat * dim..(flat + 1) * dim];
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in weights.iter().enumerate() {
            let x = &coords[p * dim..(p + 1) * dim];
            let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
            let phase = -2.0 * PI * dot.rem_euclid(1.0);
            acc += w * Complex64::new(phase.cos(), phase.sin());
        }
        *slot = acc;
    }
    out
}

/// Exact type 2 sum.
pub fn type2_direct(dim: usize, modes: usize, box_len: f64, coords: &[f64], coeffs: &[Complex64]) -> Vec<Complex64> {
    let freqs = mode_vectors(dim, modes, box_len);
    coords
        .chunks(dim)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (flat, c) in coeffs.iter().enumerate() {
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let xi = &freqs[flat * dim..(flat + 1) * dim];
                let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                let phase = 2.0 * PI * dot.rem_euclid(1.0);
                acc += c * Complex64::new(phase.cos(), phase.sin());
            }
            acc
        })
        .collect()
}

fn mode_vectors(dim: usize, modes: usize, box_len: f64) -> Vec<f64> {
    let total = modes.pow(dim as u32);
    let mut out = Vec::with_capacity(total * dim);
    for flat in 0..total {
        let mut rest = flat;
        let mut xi = [0.0; 3];
        for a in (0..dim).rev() {
            xi[a] = signed_mode(rest % modes, modes) as f64 / box_len;
            rest /= modes;
        }
        out.extend_from_slice(&xi[..dim]);
    }
    out
}

/// Coefficients of the measure sum_j w_j delta_{x_j} on the grid:
/// c_m = L^-n sum_j w_j exp(-2 pi i m.x_j / L).
pub fn measure_coefficients(spec: &GridSpec, coords: &[f64], weights: &[f64]) -> Result<GridField> {
    let n = spec.n;
    let count = weights.len();
    let total = spec.len();
    let direct_cost = 20.0 * count as f64 * total as f64;
    let fine_total = good_fft_size(2 * spec.size).pow(n as u32) as f64;
    let gridding_cost = count as f64 * (WIDTH as f64).powi(n as i32) + 20.0 * fine_total;
    let w: Vec<Complex64> = weights.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut values = if direct_cost <= gridding_cost {
        type1_direct(n, spec.size, spec.box_len, coords, &w)
    } else {
        NufftPlan::new(n, spec.size, spec.box_len, coords)?.type1(&w)?
    };
    let scale = 1.0 / spec.box_volume();
    values.iter_mut().for_each(|v| *v *= scale);
    GridField::from_values(*spec, values, FieldDomain::Frequency)
}

/// Evaluates band-limited grid fields at a fixed set of points.
///
/// Only modes with |m_a| <= `radius` on every axis are read; anything
/// outside that box is ignored.
#[derive(Debug)]
pub struct PointSampler {
    spec: GridSpec,
    sub_modes: usize,
    gather: Vec<usize>,
    frequencies: Vec<f64>,
    plan: Option<NufftPlan>,
    coords: Vec<f64>,
}

impl PointSampler {
    pub fn new(spec: GridSpec, radius: usize, coords: &[f64]) -> Result<Self> {
        let n = spec.n;
        if !coords.len().is_multiple_of(n) {
            return Err(param("coordinate array does not match the grid dimension"));
        }
        if 2 * radius >= spec.size {
            return Err(param(format!(
                "sampling radius {radius} does not fit in a grid of {} modes",
                spec.size
            )));
        }
        let sub_modes = 2 * radius + 2;
        let sub_total = sub_modes.pow(n as u32);
        let mut gather = Vec::with_capacity(sub_total);
        let mut frequencies = Vec::with_capacity(sub_total);
        for flat in 0..sub_total {
            let mut rest = flat;
            let mut idx = [0i64; 3];
            for a in (0..n).rev() {
                idx[a] = signed_mode(rest % sub_modes, sub_modes);
                rest /= sub_modes;
            }
            let mut src = 0usize;
            let mut norm2 = 0.0;
            for &m in idx.iter().take(n) {
                src = src * spec.size + m.rem_euclid(spec.size as i64) as usize;
                let xi = m as f64 / spec.box_len;
                norm2 += xi * xi;
            }
            // The extra -M/2 row lies beyond the radius; mark it unused.
            let inside = idx.iter().take(n).all(|m| m.unsigned_abs() as usize <= radius);
            gather.push(if inside { src } else { usize::MAX });
            frequencies.push(norm2.sqrt());
        }
        let count = coords.len() / n;
        let direct_cost = 20.0 * count as f64 * sub_total as f64;
        let fine_total = good_fft_size(2 * sub_modes).max(WIDTH).pow(n as u32) as f64;
        let gridding_cost = count as f64 * (WIDTH as f64).powi(n as i32) + 20.0 * fine_total;
        let plan = if direct_cost > gridding_cost {
            Some(NufftPlan::new(n, sub_modes, spec.box_len, coords)?)
        } else {
            None
        };
        Ok(Self {
            spec,
            sub_modes,
            gather,
            frequencies,
            plan,
            coords: coords.to_vec(),
        })
    }

    pub fn point_count(&self) -> usize {
        self.coords.len() / self.spec.n
    }

    /// Values of the field at the points.
    pub fn sample(&self, field: &GridField) -> Result<Vec<Complex64>> {
        self.sample_with_radial(field, |_| Complex64::new(1.0, 0.0))
    }

    /// Values at the points after multiplying each coefficient by `m(|xi|)`.
    pub fn sample_with_radial(&self, field: &GridField, m: impl Fn(f64) -> Complex64) -> Result<Vec<Complex64>> {
        if field.spec() != &self.spec {
            return Err(param("field grid does not match the sampler"));
        }
        let freq = field.to_frequency();
        let src = freq.values();
        let sub: Vec<Complex64> = self
            .gather
            .iter()
            .zip(&self.frequencies)
            .map(|(&g, &r)| {
                if g == usize::MAX {
                    Complex64::new(0.0, 0.0)
                } else {
                    src[g] * m(r)
                }
            })
            .collect();
        self.evaluate(&sub)
    }

    fn evaluate(&self, sub: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.plan {
            Some(plan) => plan.type2(sub),
            None => Ok(type2_direct(
                self.spec.n,
                self.sub_modes,
                self.spec.box_len,
                &self.coords,
                sub,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_points(dim: usize, count: usize, seed: u64) -> (Vec<f64>, Vec<Complex64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..dim * count).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = (0..count)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        (coords, w)
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn type1_matches_direct_sum() {
        for (dim, modes, count) in [(1, 64, 200), (2, 32, 150), (3, 12, 60)] {
            let (coords, w) = random_points(dim, count, dim as u64);
            let plan = NufftPlan::new(dim, modes, 2.5, &coords).unwrap();
            let fast = plan.type1(&w).unwrap();
            let exact = type1_direct(dim, modes, 2.5, &coords, &w);
            assert!(rel_err(&fast, &exact) < 1e-10, "dim {dim}: {}", rel_err(&fast, &exact));
        }
    }

    #[test]
    fn type2_matches_direct_sum() {
        for (dim, modes, count) in [(1, 64usize, 200), (2, 32, 150), (3, 12, 60)] {
            let (coords, _) = random_points(dim, count, 10 + dim as u64);
            let (_, c) = random_points(dim, modes.pow(dim as u32), 20 + dim as u64);
            let plan = NufftPlan::new(dim, modes, 3.0, &coords).unwrap();
            let fast = plan.type2(&c).unwrap();
            let exact = type2_direct(dim, modes, 3.0, &coords, &c);
            assert!(rel_err(&fast, &exact) < 1e-10, "dim {dim}: {}", rel_err(&fast, &exact));
        }
    }

    #[test]
    fn sampler_reproduces_grid_values() {
        let spec = GridSpec::new(2, 64, 2.0).unwrap();
        let field = GridField::from_spectrum(spec, |xi| {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if r2.sqrt() <= 5.0 {
                Complex64::new((-r2 / 9.0).exp(), 0.3 * xi[0])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let space = field.to_space();
        // grid points themselves, plus enough of them to force the gridding path
        let picks: Vec<usize> = (0..spec.len()).step_by(3).collect();
        let coords: Vec<f64> = picks.iter().flat_map(|&i| spec.position(i)[..2].to_vec()).collect();
        let mut sampler = PointSampler::new(spec, 10, &coords).unwrap();
        for gridded in [false, true] {
            sampler.plan = gridded.then(|| NufftPlan::new(2, sampler.sub_modes, 2.0, &coords).unwrap());
            let got = sampler.sample(&field).unwrap();
            for (k, &i) in picks.iter().enumerate() {
                assert!((got[k] - space.values()[i]).norm() < 1e-10);
            }
        }
    }
}
