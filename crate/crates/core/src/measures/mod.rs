//! Discrete stand-ins for fractal measures.
//!
//! Every measure here is a finite weighted point cloud. Builders cover
//! Cantor products, one generation of a lattice construction, sphere surface
//! measures and spacetime lifts; [`frostman_constant`] audits growth.

mod frostman;
mod io;

pub use frostman::{frostman_constant, frostman_constant_cloud, FrostmanReport};
pub use io::{read_measure_json, write_measure_json, MeasureDocument};

use crate::error::{param, resource, Result};
use crate::numeric::{compensated_sum, unit_sphere_area};
use std::f64::consts::PI;

/// Largest atom count any builder will produce.
pub const ATOM_BUDGET: usize = 1 << 24;

/// Weighted points in R^d stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(param("point cloud dimension must be positive"));
        }
        if coords.len() != dim * weights.len() {
            return Err(param(format!(
                "coordinate buffer holds {} values, expected {} x {}",
                coords.len(),
                weights.len(),
                dim
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(param(format!("weights must be finite and nonnegative, got {w}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(param("atom coordinates must be finite"));
        }
        Ok(Self { dim, coords, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// Axis-aligned bounding box as (min, max) per axis.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.coords.chunks_exact(self.dim) {
            for (b, &x) in bb.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bb
    }

    /// Diagonal of the bounding box, an upper bound for the diameter.
    pub fn bounding_diameter(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.bounding_box()
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }
}

/// Finite atomic measure in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    cloud: PointCloud,
    total_mass: f64,
    is_even: bool,
    diameter_hint: f64,
    thickening_radius: Option<f64>,
}

impl AtomicMeasure {
    /// Builds a measure from flat coordinates; `is_even` is false.
    pub fn new(n: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let cloud = PointCloud::new(n, coords, weights)?;
        let diameter_hint = cloud.bounding_diameter();
        Ok(Self::from_cloud(cloud, false, diameter_hint))
    }

    pub fn single_atom(point: &[f64], weight: f64) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![weight])
    }

    fn from_cloud(cloud: PointCloud, is_even: bool, diameter_hint: f64) -> Self {
        let total_mass = cloud.total_mass();
        Self {
            cloud,
            total_mass,
            is_even,
            diameter_hint,
            thickening_radius: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    pub fn diameter_hint(&self) -> f64 {
        self.diameter_hint
    }

    /// Radius of the ball each atom stands for (lattice construction only).
    pub fn thickening_radius(&self) -> Option<f64> {
        self.thickening_radius
    }

    pub fn with_diameter_hint(mut self, d: f64) -> Self {
        self.diameter_hint = d;
        self
    }

    /// Largest |x| over the atoms.
    pub fn max_norm(&self) -> f64 {
        self.cloud
            .coords
            .chunks_exact(self.dim())
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Shifts every atom by `offset`. The result is not marked even.
    pub fn translate(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(param("offset dimension mismatch"));
        }
        let mut coords = self.cloud.coords.clone();
        for p in coords.chunks_exact_mut(self.dim()) {
            for (x, o) in p.iter_mut().zip(offset) {
                *x += o;
            }
        }
        let cloud = PointCloud::new(self.dim(), coords, self.cloud.weights.clone())?;
        let mut out = Self::from_cloud(cloud, false, self.diameter_hint);
        out.thickening_radius = self.thickening_radius;
        Ok(out)
    }

    /// Multiplies every weight by `factor`.
    pub fn scale_mass(&self, factor: f64) -> Result<Self> {
        let weights = self.cloud.weights.iter().map(|w| w * factor).collect();
        let cloud = PointCloud::new(self.dim(), self.cloud.coords.clone(), weights)?;
        let mut out = Self::from_cloud(cloud, self.is_even, self.diameter_hint);
        out.thickening_radius = self.thickening_radius;
        Ok(out)
    }
}

/// Weighted point cloud in R^(n+1) with time as the last coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeMeasure {
    spatial_dimension: usize,
    cloud: PointCloud,
    total_mass: f64,
}

impl SpacetimeMeasure {
    pub fn new(spatial_dimension: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let cloud = PointCloud::new(spatial_dimension + 1, coords, weights)?;
        let total_mass = cloud.total_mass();
        Ok(Self {
            spatial_dimension,
            cloud,
            total_mass,
        })
    }

    pub fn spatial_dimension(&self) -> usize {
        self.spatial_dimension
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Spatial part of atom `i`.
    pub fn space(&self, i: usize) -> &[f64] {
        &self.cloud.point(i)[..self.spatial_dimension]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.cloud.point(i)[self.spatial_dimension]
    }
}

/// Hausdorff dimension n log 2 / log(1/ratio) of the limiting Cantor product.
pub fn cantor_dimension(ratio: f64, n: usize) -> f64 {
    n as f64 * 2f64.ln() / (1.0 / ratio).ln()
}

/// Contraction ratio whose n-fold Cantor product has dimension `alpha`.
pub fn cantor_ratio_for_dimension(alpha: f64, n: usize) -> f64 {
    2f64.powf(-(n as f64) / alpha)
}

fn check_cantor(ratio: f64, depth: usize, n: usize) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return Err(param(format!("Cantor ratio must lie in (0, 1/2], got {ratio}")));
    }
    if n == 0 || depth == 0 {
        return Err(param("Cantor depth and dimension must be positive"));
    }
    let bits = depth
        .checked_mul(n)
        .ok_or_else(|| resource("Cantor atom count overflows"))?;
    if bits > ATOM_BUDGET.trailing_zeros() as usize {
        return Err(resource(format!(
            "Cantor product with 2^{bits} atoms exceeds the budget of {ATOM_BUDGET}"
        )));
    }
    Ok(1usize << bits)
}

/// Offsets of the depth-th generation intervals of the ratio-Cantor set,
/// measured from the centre of [0,1]: sum of +-(1-ratio) ratio^j / 2.
/// Index `i` and its bitwise complement give exact negatives.
fn centred_cantor_offsets(ratio: f64, depth: usize) -> Vec<f64> {
    let count = 1usize << depth;
    (0..count)
        .map(|i| {
            let mut x = 0.0;
            let mut scale = (1.0 - ratio) / 2.0;
            for j in 0..depth {
                let bit = (i >> (depth - 1 - j)) & 1;
                x += if bit == 1 { scale } else { -scale };
                scale *= ratio;
            }
            x
        })
        .collect()
}

fn cantor_atoms(ratio: f64, depth: usize, n: usize, shift: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let count = check_cantor(ratio, depth, n)?;
    let axis = centred_cantor_offsets(ratio, depth);
    let per_axis = axis.len();
    let weight = 1.0 / count as f64;
    let mut coords = Vec::with_capacity(count * n);
    for i in 0..count {
        let mut rest = i;
        let mut digits = vec![0usize; n];
        for d in (0..n).rev() {
            digits[d] = rest % per_axis;
            rest /= per_axis;
        }
        coords.extend(digits.iter().map(|&d| axis[d] + shift));
    }
    Ok((coords, vec![weight; count]))
}

/// Uniform measure on the depth-th generation of the n-fold ratio-Cantor
/// product in [0,1]^n, one atom per cube at its midpoint.
pub fn build_cantor_product(ratio: f64, depth: usize, n: usize) -> Result<AtomicMeasure> {
    let (coords, weights) = cantor_atoms(ratio, depth, n, 0.5)?;
    let cloud = PointCloud::new(n, coords, weights)?;
    Ok(AtomicMeasure::from_cloud(cloud, false, (n as f64).sqrt()))
}

/// The same product translated to [-1/2,1/2]^n. The centred set is symmetric,
/// and atom `i` is paired with atom `len-1-i` at `-x`, so the result is even.
pub fn build_cantor_product_centered(ratio: f64, depth: usize, n: usize) -> Result<AtomicMeasure> {
    let (coords, weights) = cantor_atoms(ratio, depth, n, 0.0)?;
    let cloud = PointCloud::new(n, coords, weights)?;
    Ok(AtomicMeasure::from_cloud(cloud, true, (n as f64).sqrt()))
}

/// Equal-mass union of `copies` centred Cantor products dilated by
/// ratio^(j/copies), j = 0..copies. The dilation factors split one
/// self-similarity period evenly, which flattens the log-periodic
/// oscillation of dyadic statistics while keeping the dimension.
pub fn build_scale_averaged_cantor(ratio: f64, depth: usize, n: usize, copies: usize) -> Result<AtomicMeasure> {
    if copies == 0 {
        return Err(param("scale averaging needs at least one copy"));
    }
    let (base, weights) = cantor_atoms(ratio, depth, n, 0.0)?;
    let total = base
        .len()
        .checked_mul(copies)
        .filter(|c| c / n <= ATOM_BUDGET)
        .ok_or_else(|| resource("scale-averaged Cantor measure exceeds the atom budget"))?;
    let mut coords = Vec::with_capacity(total);
    for j in 0..copies {
        let s = ratio.powf(j as f64 / copies as f64);
        coords.extend(base.iter().map(|x| x * s));
    }
    let weights: Vec<f64> = std::iter::repeat_n(weights[0] / copies as f64, weights.len() * copies).collect();
    let cloud = PointCloud::new(n, coords, weights)?;
    Ok(AtomicMeasure::from_cloud(cloud, true, (n as f64).sqrt()))
}

/// One generation of the lattice construction: equal atoms on (1/q)Z^n in
/// [0,1]^n, each standing for a ball of radius q^(-n/alpha).
pub fn build_falconer_lattice(q: usize, alpha: f64, n: usize) -> Result<AtomicMeasure> {
    if q < 2 {
        return Err(param(format!("lattice parameter q must be at least 2, got {q}")));
    }
    if n == 0 || !(alpha > 0.0 && alpha < n as f64) {
        return Err(param(format!("lattice exponent alpha must lie in (0, {n}), got {alpha}")));
    }
    let side = q + 1;
    let count = side
        .checked_pow(n as u32)
        .filter(|c| *c <= ATOM_BUDGET)
        .ok_or_else(|| resource(format!("lattice with ({side})^{n} atoms exceeds the budget")))?;
    let mut coords = Vec::with_capacity(count * n);
    for i in 0..count {
        let mut rest = i;
        let mut digits = vec![0usize; n];
        for d in (0..n).rev() {
            digits[d] = rest % side;
            rest /= side;
        }
        coords.extend(digits.iter().map(|&d| d as f64 / q as f64));
    }
    let cloud = PointCloud::new(n, coords, vec![1.0 / count as f64; count])?;
    let mut m = AtomicMeasure::from_cloud(cloud, false, (n as f64).sqrt());
    m.thickening_radius = Some((q as f64).powf(-(n as f64) / alpha));
    Ok(m)
}

/// Quasi-uniform surface measure on the sphere of radius `t` centred at the
/// origin, total mass t^(n-1) |S^(n-1)|. Equispaced angles for n = 2 and a
/// Fibonacci spiral for n = 3.
pub fn build_sphere_measure(t: f64, n: usize, points: usize) -> Result<AtomicMeasure> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(param(format!("sphere radius must be positive, got {t}")));
    }
    if points == 0 {
        return Err(param("sphere measure needs at least one point"));
    }
    if points > ATOM_BUDGET {
        return Err(resource("sphere point count exceeds the atom budget"));
    }
    let mass = t.powi(n as i32 - 1) * unit_sphere_area(n);
    let weight = mass / points as f64;
    let mut coords = Vec::with_capacity(points * n);
    let is_even = match n {
        2 => {
            for j in 0..points {
                let theta = 2.0 * PI * j as f64 / points as f64;
                coords.push(t * theta.cos());
                coords.push(t * theta.sin());
            }
            points.is_multiple_of(2)
        }
        3 => {
            // Spiral points with z_j = 1 - (2j+1)/N are symmetric under j -> N-1-j
            // only up to the azimuth, so the measure is not flagged even.
            let golden = PI * (3.0 - 5f64.sqrt());
            for j in 0..points {
                let z = 1.0 - (2 * j + 1) as f64 / points as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * j as f64;
                coords.push(t * r * phi.cos());
                coords.push(t * r * phi.sin());
                coords.push(t * z);
            }
            false
        }
        _ => return Err(param(format!("sphere measures are supported for n in {{2,3}}, got {n}"))),
    };
    let cloud = PointCloud::new(n, coords, vec![weight; points])?;
    Ok(AtomicMeasure::from_cloud(cloud, is_even, 2.0 * t))
}

/// Uniform measure of mass one on the midpoints of a regular grid in [0,1]^n.
pub fn build_uniform_grid(per_axis: usize, n: usize) -> Result<AtomicMeasure> {
    if per_axis == 0 || n == 0 {
        return Err(param("uniform grid needs positive size and dimension"));
    }
    let count = per_axis
        .checked_pow(n as u32)
        .filter(|c| *c <= ATOM_BUDGET)
        .ok_or_else(|| resource("uniform grid exceeds the atom budget"))?;
    let h = 1.0 / per_axis as f64;
    let mut coords = Vec::with_capacity(count * n);
    for i in 0..count {
        let mut rest = i;
        let mut digits = vec![0usize; n];
        for d in (0..n).rev() {
            digits[d] = rest % per_axis;
            rest /= per_axis;
        }
        coords.extend(digits.iter().map(|&d| (d as f64 + 0.5) * h));
    }
    let cloud = PointCloud::new(n, coords, vec![1.0 / count as f64; count])?;
    Ok(AtomicMeasure::from_cloud(cloud, false, (n as f64).sqrt()))
}

/// Adds the reflected copy: atoms {(x,w)} and {(-x,w)}, in that order.
pub fn evenize(mu: &AtomicMeasure) -> AtomicMeasure {
    let n = mu.dim();
    let len = mu.len();
    let mut coords = Vec::with_capacity(2 * len * n);
    coords.extend_from_slice(mu.cloud.coords());
    coords.extend(mu.cloud.coords().iter().map(|x| -x));
    let mut weights = Vec::with_capacity(2 * len);
    weights.extend_from_slice(mu.cloud.weights());
    weights.extend_from_slice(mu.cloud.weights());
    let cloud = PointCloud {
        dim: n,
        coords,
        weights,
    };
    let diameter = 2.0 * mu.max_norm();
    let mut out = AtomicMeasure::from_cloud(cloud, true, diameter.max(mu.diameter_hint));
    out.thickening_radius = mu.thickening_radius;
    out
}

/// How a spatial measure is spread over time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeLaw {
    /// Every atom placed at time `t0`.
    DiracAt(f64),
    /// Every atom replicated at `count` equispaced times in [0,1] with weight w/count.
    UniformGrid(usize),
}

pub fn product_with_time(mu: &AtomicMeasure, law: TimeLaw) -> Result<SpacetimeMeasure> {
    let n = mu.dim();
    let (times, share): (Vec<f64>, f64) = match law {
        TimeLaw::DiracAt(t0) => {
            if !t0.is_finite() {
                return Err(param("time must be finite"));
            }
            (vec![t0], 1.0)
        }
        TimeLaw::UniformGrid(count) => {
            if count == 0 {
                return Err(param("uniform time grid needs at least one sample"));
            }
            let times = if count == 1 {
                vec![0.0]
            } else {
                (0..count).map(|i| i as f64 / (count - 1) as f64).collect()
            };
            (times, 1.0 / count as f64)
        }
    };
    let total = mu
        .len()
        .checked_mul(times.len())
        .filter(|c| *c <= ATOM_BUDGET)
        .ok_or_else(|| resource("spacetime lift exceeds the atom budget"))?;
    let mut coords = Vec::with_capacity(total * (n + 1));
    let mut weights = Vec::with_capacity(total);
    for (p, w) in mu.cloud.iter() {
        for &t in &times {
            coords.extend_from_slice(p);
            coords.push(t);
            weights.push(w * share);
        }
    }
    SpacetimeMeasure::new(n, coords, weights)
}
