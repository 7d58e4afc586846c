use crate::error::{domain, param, resource, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest number of grid points a field may hold.
pub const GRID_BUDGET: usize = 1 << 26;

/// Shape of the periodic computational box: `size` samples per axis over a
/// side of length `box_len`, in `n` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub size: usize,
    pub box_len: f64,
}

impl GridSpec {
    pub fn new(n: usize, size: usize, box_len: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(param(format!("grid dimension must be 1, 2 or 3, got {n}")));
        }
        if size < 2 || !size.is_power_of_two() {
            return Err(param(format!("samples per axis must be a power of two, got {size}")));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(param("box length must be positive"));
        }
        let total = size
            .checked_pow(n as u32)
            .filter(|t| *t <= GRID_BUDGET)
            .ok_or_else(|| resource(format!("grid {size}^{n} exceeds the budget of {GRID_BUDGET} points")))?;
        let _ = total;
        Ok(Self { n, size, box_len })
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest frequency representable on an axis, N / (2L).
    pub fn nyquist(&self) -> f64 {
        self.size as f64 / (2.0 * self.box_len)
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.size as f64
    }

    /// Volume element of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn box_volume(&self) -> f64 {
        self.box_len.powi(self.n as i32)
    }

    /// Signed mode index for FFT-ordered index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        signed_mode(i, self.size)
    }

    /// Multi-index of flat position `flat` (row-major).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.size;
            flat /= self.size;
        }
        idx
    }

    /// Frequency vector m / L at flat position `flat`.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.n {
            xi[a] = self.mode(idx[a]) as f64 / self.box_len;
        }
        xi
    }

    pub fn frequency_norm(&self, flat: usize) -> f64 {
        let xi = self.frequency(flat);
        xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Spatial position of sample `flat`: x_j = j L / N per axis.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = idx[a] as f64 * self.spacing();
        }
        x
    }

    /// Flat index of the mode -m given the flat index of m.
    pub fn negated(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let mut out = 0;
        for &i in idx.iter().take(self.n) {
            out = out * self.size + (self.size - i) % self.size;
        }
        out
    }
}

pub(crate) fn signed_mode(i: usize, size: usize) -> i64 {
    if i < size / 2 {
        i as i64
    } else {
        i as i64 - size as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDomain {
    Space,
    Frequency,
}

/// Complex samples of an L-periodic function on an N^n grid.
///
/// In the frequency domain the values are Fourier-series coefficients c_m
/// with f(x) = sum_m c_m exp(2 pi i m.x / L), stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<Complex64>,
    domain: FieldDomain,
}

impl GridField {
    pub fn zeros(spec: GridSpec, domain: FieldDomain) -> Self {
        Self {
            spec,
            values: vec![Complex64::new(0.0, 0.0); spec.len()],
            domain,
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<Complex64>, domain: FieldDomain) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(param(format!(
                "field has {} values, grid needs {}",
                values.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, values, domain })
    }

    /// Samples `f` at the grid positions.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.position(i)[..spec.n])).collect();
        Self {
            spec,
            values,
            domain: FieldDomain::Space,
        }
    }

    /// Builds coefficients from a function of the frequency vector.
    pub fn from_spectrum(spec: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.frequency(i)[..spec.n])).collect();
        Self {
            spec,
            values,
            domain: FieldDomain::Frequency,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn domain(&self) -> FieldDomain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn to_frequency(&self) -> GridField {
        match self.domain {
            FieldDomain::Frequency => self.clone(),
            FieldDomain::Space => {
                let mut values = self.values.clone();
                fft_nd(&mut values, self.spec.n, self.spec.size, FftDirection::Forward);
                let scale = 1.0 / self.spec.len() as f64;
                values.iter_mut().for_each(|v| *v *= scale);
                GridField {
                    spec: self.spec,
                    values,
                    domain: FieldDomain::Frequency,
                }
            }
        }
    }

    pub fn to_space(&self) -> GridField {
        match self.domain {
            FieldDomain::Space => self.clone(),
            FieldDomain::Frequency => {
                let mut values = self.values.clone();
                fft_nd(&mut values, self.spec.n, self.spec.size, FftDirection::Inverse);
                GridField {
                    spec: self.spec,
                    values,
                    domain: FieldDomain::Space,
                }
            }
        }
    }

    /// Multiplies each coefficient by `m(xi)`.
    pub fn apply_multiplier(&self, m: impl Fn(&[f64]) -> Complex64) -> GridField {
        let mut out = self.to_frequency();
        let spec = out.spec;
        for (i, v) in out.values.iter_mut().enumerate() {
            *v *= m(&spec.frequency(i)[..spec.n]);
        }
        out
    }

    /// Multiplies each coefficient by `m(|xi|)`.
    pub fn apply_radial(&self, m: impl Fn(f64) -> Complex64) -> GridField {
        let mut out = self.to_frequency();
        let spec = out.spec;
        for (i, v) in out.values.iter_mut().enumerate() {
            *v *= m(spec.frequency_norm(i));
        }
        out
    }

    /// L^2 norm over the torus.
    pub fn l2_norm(&self) -> f64 {
        match self.domain {
            FieldDomain::Frequency => {
                (self.spec.box_volume() * self.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
            }
            FieldDomain::Space => {
                (self.spec.cell_volume() * self.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
            }
        }
    }

    /// Riemann-sum L^1 norm of the spatial samples.
    pub fn l1_norm(&self) -> f64 {
        let s = self.to_space();
        s.spec.cell_volume() * s.values.iter().map(|c| c.norm()).sum::<f64>()
    }

    /// Maximum modulus over the spatial samples.
    pub fn sup_norm(&self) -> f64 {
        self.to_space().values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Integral over one period, L^n c_0.
    pub fn integral(&self) -> Complex64 {
        let f = self.to_frequency();
        f.values[0] * self.spec.box_volume()
    }

    /// Torus inner product <self, other> = int self * conj(other).
    pub fn inner(&self, other: &GridField) -> Complex64 {
        if self.domain == FieldDomain::Space && other.domain == FieldDomain::Space {
            // Grid values of trigonometric polynomials: the Riemann sum is exact.
            let s: Complex64 = self.values.iter().zip(&other.values).map(|(x, y)| x * y.conj()).sum();
            return s * self.spec.cell_volume();
        }
        let a = self.to_frequency();
        let b = other.to_frequency();
        let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
        s * self.spec.box_volume()
    }

    /// Largest |m_a| over modes whose coefficient exceeds 1e-12 of the largest.
    pub fn mode_radius(&self) -> usize {
        let f = self.to_frequency();
        let floor = 1e-12 * f.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut r = 0usize;
        for (i, c) in f.values.iter().enumerate() {
            if c.norm() > floor {
                let idx = f.spec.unravel(i);
                for &ia in idx.iter().take(f.spec.n) {
                    r = r.max(f.spec.mode(ia).unsigned_abs() as usize);
                }
            }
        }
        r
    }

    /// Largest deviation from a real, even function, relative to the largest coefficient.
    pub fn real_even_defect(&self) -> f64 {
        let f = self.to_frequency();
        let scale = f.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (i, c) in f.values.iter().enumerate() {
            let j = f.spec.negated(i);
            // real and even <=> coefficients real and even
            worst = worst.max(c.im.abs()).max((c.re - f.values[j].re).abs());
        }
        worst / scale
    }

    /// Projects onto real even functions: c_m -> Re(c_m + c_-m) / 2.
    pub fn enforce_real_even(&self) -> GridField {
        let f = self.to_frequency();
        let values = (0..f.values.len())
            .map(|i| {
                let j = f.spec.negated(i);
                Complex64::new(0.5 * (f.values[i].re + f.values[j].re), 0.0)
            })
            .collect();
        GridField {
            spec: f.spec,
            values,
            domain: FieldDomain::Frequency,
        }
    }

    /// Checks the real-even property within `tol` and returns the projection.
    pub fn require_real_even(&self, tol: f64) -> Result<GridField> {
        let defect = self.real_even_defect();
        if defect > tol {
            return Err(domain(format!(
                "field is not real and even: relative defect {defect:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(self.enforce_real_even())
    }

    pub fn scale(&self, a: f64) -> GridField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn add(&self, other: &GridField) -> GridField {
        let a = self.to_frequency();
        let b = other.to_frequency();
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        GridField {
            spec: a.spec,
            values,
            domain: FieldDomain::Frequency,
        }
    }

    /// Pointwise map of the spatial samples.
    pub fn map_space(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        let mut s = self.to_space();
        s.values.iter_mut().for_each(|v| *v = f(*v));
        s
    }

    /// Pointwise product of spatial samples.
    pub fn pointwise(&self, other: &GridField, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridField {
        let a = self.to_space();
        let b = other.to_space();
        let values = a.values.iter().zip(&b.values).map(|(x, y)| f(*x, *y)).collect();
        GridField {
            spec: a.spec,
            values,
            domain: FieldDomain::Space,
        }
    }

    /// Largest absolute difference of spatial samples.
    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        let a = self.to_space();
        let b = other.to_space();
        a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// In-place n-dimensional FFT over an N^n row-major array, unnormalized.
pub fn fft_nd(values: &mut [Complex64], n: usize, size: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(size, direction);
    fft_nd_with(values, n, size, &fft);
}

pub(crate) fn fft_nd_with(values: &mut [Complex64], n: usize, size: usize, fft: &Arc<dyn Fft<f64>>) {
    let total = values.len();
    // Last axis is contiguous.
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(values, &mut scratch);
    if n == 1 {
        return;
    }
    // Remaining axes: gather batches of strided lines.
    const BATCH: usize = 64;
    let mut buf = vec![Complex64::new(0.0, 0.0); size * BATCH];
    for axis in 0..n - 1 {
        let stride = size.pow((n - 1 - axis) as u32);
        let block = stride * size;
        for base in (0..total).step_by(block) {
            let mut offset = 0;
            while offset < stride {
                let count = BATCH.min(stride - offset);
                for l in 0..count {
                    for k in 0..size {
                        buf[l * size + k] = values[base + offset + l + k * stride];
                    }
                }
                fft.process_with_scratch(&mut buf[..count * size], &mut scratch);
                for l in 0..count {
                    for k in 0..size {
                        values[base + offset + l + k * stride] = buf[l * size + k];
                    }
                }
                offset += count;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_field(spec: GridSpec, seed: u64) -> GridField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..spec.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridField::from_values(spec, values, FieldDomain::Space).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        for n in 1..=3 {
            let spec = GridSpec::new(n, 16, 3.0).unwrap();
            let f = random_field(spec, n as u64);
            let back = f.to_frequency().to_space();
            let scale = f.sup_norm();
            assert!(f.max_abs_diff(&back) < 1e-12 * scale);
        }
    }

    #[test]
    fn single_mode_has_single_coefficient() {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let m = [3.0, -5.0];
        let f = GridField::from_fn(spec, |x| {
            let phase = 2.0 * std::f64::consts::PI * (m[0] * x[0] + m[1] * x[1]) / 2.0;
            Complex64::new(phase.cos(), phase.sin())
        });
        let c = f.to_frequency();
        let idx = 3 * 32 + (32 - 5);
        assert!((c.values()[idx] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(f.mode_radius(), 5);
        assert!((f.l2_norm() - 2.0).abs() < 1e-12);
        assert!((c.l2_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_even_projection() {
        let spec = GridSpec::new(2, 16, 1.0).unwrap();
        let f = random_field(spec, 3);
        assert!(f.real_even_defect() > 1e-3);
        let e = f.enforce_real_even();
        assert!(e.real_even_defect() < 1e-15);
        let s = e.to_space();
        let maxv = s.sup_norm();
        assert!(s.values().iter().all(|v| v.im.abs() < 1e-10 * maxv));
        assert!(f.require_real_even(1e-6).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(2, 100, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(3, 1 << 10, 1.0).is_err());
        let s = GridSpec::new(2, 64, 4.0).unwrap();
        assert_eq!(s.nyquist(), 8.0);
    }
}
