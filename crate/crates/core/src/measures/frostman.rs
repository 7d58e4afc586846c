use super::{AtomicMeasure, PointCloud};
use crate::error::{domain, param, Result};
use serde::{Deserialize, Serialize};

/// Largest number of cells the ball counter will allocate.
const MAX_CELLS: usize = 1 << 22;

/// Empirical growth constant sup mu(B(x,r)) / r^alpha over probed balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub alpha: f64,
    pub constant_estimate: f64,
    /// Radii probed, coarse to fine. The last entry is the resolution floor.
    pub scales_probed: Vec<f64>,
    /// Best ratio found at each probed radius.
    pub ratio_per_scale: Vec<f64>,
    pub argmax_center: Vec<f64>,
    pub argmax_radius: f64,
    /// The maximum sits at the floor and is still growing there, so the
    /// estimate is a resolution artefact rather than a growth constant.
    pub floor_limited: bool,
}

/// Counts mass in open balls using a uniform cell grid with per-row prefix
/// sums along the last axis. Cells entirely inside a ball are summed from the
/// prefix table; only boundary cells are scanned atom by atom.
struct BallCounter {
    dim: usize,
    origin: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    cell_start: Vec<usize>,
    coords: Vec<f64>,
    weights: Vec<f64>,
    /// For each row, prefix sums over its cells (length shape[last] + 1).
    prefix: Vec<f64>,
}

impl BallCounter {
    fn new(cloud: &PointCloud) -> Self {
        let dim = cloud.dim();
        let bb = cloud.bounding_box();
        let extent = bb.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        let target = cloud.len().clamp(1, MAX_CELLS) as f64;
        let mut h = if extent > 0.0 {
            extent / target.powf(1.0 / dim as f64).max(1.0)
        } else {
            1.0
        };
        let shape_for = |h: f64| -> Vec<usize> {
            bb.iter()
                .map(|(lo, hi)| (((hi - lo) / h).floor() as usize + 1).max(1))
                .collect()
        };
        let mut shape = shape_for(h);
        while shape.iter().product::<usize>() > MAX_CELLS {
            h *= 1.5;
            shape = shape_for(h);
        }
        let origin: Vec<f64> = bb.iter().map(|(lo, _)| *lo).collect();
        let ncells: usize = shape.iter().product();

        let cell_of = |p: &[f64]| -> usize {
            let mut idx = 0;
            for a in 0..dim {
                let c = (((p[a] - origin[a]) / h).floor() as usize).min(shape[a] - 1);
                idx = idx * shape[a] + c;
            }
            idx
        };
        let mut counts = vec![0usize; ncells + 1];
        let cells: Vec<usize> = cloud.coords().chunks_exact(dim).map(cell_of).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let cell_start = counts.clone();
        let mut fill = counts;
        let mut coords = vec![0.0; cloud.coords().len()];
        let mut weights = vec![0.0; cloud.len()];
        for (i, &c) in cells.iter().enumerate() {
            let slot = fill[c];
            fill[c] += 1;
            coords[slot * dim..(slot + 1) * dim].copy_from_slice(cloud.point(i));
            weights[slot] = cloud.weight(i);
        }

        let last = shape[dim - 1];
        let rows = ncells / last;
        let mut prefix = vec![0.0; rows * (last + 1)];
        for r in 0..rows {
            let base = r * (last + 1);
            for c in 0..last {
                let cell = r * last + c;
                let m: f64 = weights[cell_start[cell]..cell_start[cell + 1]].iter().sum();
                prefix[base + c + 1] = prefix[base + c] + m;
            }
        }
        Self {
            dim,
            origin,
            h,
            shape,
            cell_start,
            coords,
            weights,
            prefix,
        }
    }

    fn cell_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let a = ((lo - self.origin[axis]) / self.h).floor();
        let b = ((hi - self.origin[axis]) / self.h).floor();
        let max = self.shape[axis] as f64 - 1.0;
        if b < 0.0 || a > max {
            return None;
        }
        Some((a.max(0.0) as usize, b.min(max) as usize))
    }

    fn scan_cell(&self, cell: usize, x: &[f64], r2: f64) -> f64 {
        let mut m = 0.0;
        for slot in self.cell_start[cell]..self.cell_start[cell + 1] {
            let p = &self.coords[slot * self.dim..(slot + 1) * self.dim];
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < r2 {
                m += self.weights[slot];
            }
        }
        m
    }

    /// Mass of the open ball B(x, r).
    fn mass(&self, x: &[f64], r: f64) -> f64 {
        let d = self.dim;
        let r2 = r * r;
        let eps = self.h * 1e-9;
        let mut ranges = Vec::with_capacity(d - 1);
        for (a, &xa) in x.iter().enumerate().take(d - 1) {
            match self.cell_range(a, xa - r, xa + r) {
                Some(rg) => ranges.push(rg),
                None => return 0.0,
            }
        }
        let last = self.shape[d - 1];
        let la = d - 1;
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let mut total = 0.0;
        loop {
            // Distance bounds from x to this row of cells over the leading axes.
            let mut dmin2 = 0.0;
            let mut dmax2 = 0.0;
            let mut row = 0;
            for a in 0..d - 1 {
                let lo = self.origin[a] + idx[a] as f64 * self.h;
                let hi = lo + self.h;
                let near = if x[a] < lo {
                    lo - x[a]
                } else if x[a] > hi {
                    x[a] - hi
                } else {
                    0.0
                };
                let far = (x[a] - lo).abs().max((hi - x[a]).abs());
                dmin2 += near * near;
                dmax2 += far * far;
                row = row * self.shape[a] + idx[a];
            }
            if dmin2 < r2 {
                let wp = (r2 - dmin2).sqrt();
                if let Some((p0, p1)) = self.cell_range(la, x[la] - wp - eps, x[la] + wp + eps) {
                    // Cells whose whole extent lies strictly inside the ball.
                    let (mut f0, mut f1) = (1usize, 0usize);
                    if dmax2 < r2 {
                        let wf = (r2 - dmax2).sqrt();
                        let lo_bound = x[la] - wf + eps;
                        let hi_bound = x[la] + wf - eps;
                        let c0 = ((lo_bound - self.origin[la]) / self.h).ceil();
                        let c1 = ((hi_bound - self.origin[la]) / self.h).floor() - 1.0;
                        if c1 >= c0 {
                            let c0 = (c0.max(p0 as f64)) as usize;
                            let c1 = (c1.min(p1 as f64)).max(-1.0);
                            if c1 >= c0 as f64 {
                                f0 = c0;
                                f1 = c1 as usize;
                            }
                        }
                    }
                    let base = row * (last + 1);
                    if f0 <= f1 {
                        total += self.prefix[base + f1 + 1] - self.prefix[base + f0];
                        for c in p0..f0 {
                            total += self.scan_cell(row * last + c, x, r2);
                        }
                        for c in f1 + 1..=p1 {
                            total += self.scan_cell(row * last + c, x, r2);
                        }
                    } else {
                        for c in p0..=p1 {
                            total += self.scan_cell(row * last + c, x, r2);
                        }
                    }
                }
            }
            // Odometer over the leading axes.
            let mut a = d - 1;
            loop {
                if a == 0 {
                    return total;
                }
                a -= 1;
                if idx[a] < ranges[a].1 {
                    idx[a] += 1;
                    for b in a + 1..d - 1 {
                        idx[b] = ranges[b].0;
                    }
                    break;
                }
            }
        }
    }
}

/// Growth constant of an atomic measure; see [`frostman_constant_cloud`].
pub fn frostman_constant(mu: &AtomicMeasure, alpha: f64, finest_scale: f64) -> Result<FrostmanReport> {
    if !(alpha > 0.0 && alpha <= mu.dim() as f64) {
        return Err(param(format!(
            "growth exponent must lie in (0, {}], got {alpha}",
            mu.dim()
        )));
    }
    frostman_constant_cloud(mu.cloud(), alpha, finest_scale, mu.diameter_hint())
}

/// Probes atom-centred open balls at radii `diameter * 2^-j` down to
/// `finest_scale`, plus one ball holding all the mass, and returns the largest
/// mass-to-r^alpha ratio found. Below the atom spacing the ratio of a discrete
/// measure diverges, so `finest_scale` is the resolution floor of the report.
pub fn frostman_constant_cloud(
    cloud: &PointCloud,
    alpha: f64,
    finest_scale: f64,
    diameter: f64,
) -> Result<FrostmanReport> {
    if cloud.is_empty() {
        return Err(domain("growth constant of an empty measure"));
    }
    if !(alpha > 0.0) || !(finest_scale > 0.0) {
        return Err(param("growth exponent and finest scale must be positive"));
    }
    let top = diameter.max(finest_scale);
    let mut radii = Vec::new();
    let mut r = top;
    while r > finest_scale * (1.0 + 1e-12) {
        radii.push(r);
        r *= 0.5;
    }
    radii.push(finest_scale);

    let counter = BallCounter::new(cloud);
    let mut best = 0.0;
    let mut best_center = cloud.point(0).to_vec();
    let mut best_radius = top;
    let mut per_scale = Vec::with_capacity(radii.len());
    for &r in &radii {
        let denom = r.powf(alpha);
        let mut scale_best = 0.0;
        let mut scale_center = 0;
        for i in 0..cloud.len() {
            let m = counter.mass(cloud.point(i), r);
            if m > scale_best {
                scale_best = m;
                scale_center = i;
            }
        }
        let ratio = scale_best / denom;
        per_scale.push(ratio);
        if ratio > best {
            best = ratio;
            best_center = cloud.point(scale_center).to_vec();
            best_radius = r;
        }
    }

    // The ball around the bounding-box centre that holds everything.
    let bb = cloud.bounding_box();
    let center: Vec<f64> = bb.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let half_diag = 0.5 * cloud.bounding_diameter();
    let r_all = (half_diag * (1.0 + 1e-9)).max(finest_scale);
    let all_ratio = cloud.total_mass() / r_all.powf(alpha);
    if all_ratio > best {
        best = all_ratio;
        best_center = center;
        best_radius = r_all;
    }

    let last = per_scale.len() - 1;
    let floor_limited = best_radius == finest_scale
        && last >= 3
        && per_scale[last] >= 1.5 * per_scale[last - 3]
        && per_scale[last] > per_scale[last - 1];

    Ok(FrostmanReport {
        alpha,
        constant_estimate: best,
        scales_probed: radii,
        ratio_per_scale: per_scale,
        argmax_center: best_center,
        argmax_radius: best_radius,
        floor_limited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{
        build_cantor_product, build_falconer_lattice, build_uniform_grid, evenize, product_with_time,
        AtomicMeasure, TimeLaw,
    };
    use rand::{Rng, SeedableRng};

    fn brute_mass(cloud: &PointCloud, x: &[f64], r: f64) -> f64 {
        cloud
            .iter()
            .filter(|(p, _)| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < r * r)
            .map(|(_, w)| w)
            .sum()
    }

    #[test]
    fn ball_counter_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            let n = 400;
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let cloud = PointCloud::new(dim, coords, weights).unwrap();
            let counter = BallCounter::new(&cloud);
            for _ in 0..200 {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..2.5)).collect();
                let r = rng.gen_range(0.01..3.0);
                let a = counter.mass(&x, r);
                let b = brute_mass(&cloud, &x, r);
                assert!((a - b).abs() < 1e-10, "dim {dim}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ball_counter_handles_lattice_ties() {
        // Atoms exactly on the sphere of the query ball must be excluded.
        let m = build_falconer_lattice(8, 1.0, 2).unwrap();
        let counter = BallCounter::new(m.cloud());
        for i in 0..m.len() {
            for r in [0.125, 0.25, 0.5] {
                let x = m.cloud().point(i);
                assert!((counter.mass(x, r) - brute_mass(m.cloud(), x, r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_atom_is_floor_limited() {
        let m = AtomicMeasure::single_atom(&[0.2, 0.1], 1.0).unwrap().with_diameter_hint(1.0);
        let rep = frostman_constant(&m, 1.0, 1.0 / 64.0).unwrap();
        assert!((rep.constant_estimate - 64.0).abs() < 1e-9);
        assert_eq!(rep.argmax_radius, 1.0 / 64.0);
        assert!(rep.floor_limited);
    }

    #[test]
    fn uniform_square_constant_is_bounded() {
        let m = build_uniform_grid(256, 2).unwrap();
        let rep = frostman_constant(&m, 2.0, 1.0 / 32.0).unwrap();
        // Exhaustive oracle: mu(B(x,r)) <= min(1, pi r^2) up to lattice error.
        assert!(rep.constant_estimate <= 4.0, "{}", rep.constant_estimate);
        assert!(rep.constant_estimate >= 2.5);
        assert!(!rep.floor_limited);
    }

    #[test]
    fn cantor_constant_is_stable_across_floors() {
        let m = build_cantor_product(1.0 / 3.0, 8, 1).unwrap();
        let alpha = 2f64.ln() / 3f64.ln();
        let values: Vec<f64> = (4..=7)
            .map(|j| frostman_constant(&m, alpha, 3f64.powi(-j)).unwrap().constant_estimate)
            .collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo <= 2.0, "{values:?}");
    }

    #[test]
    fn even_extension_far_from_origin_keeps_small_scale_constant() {
        let m = build_falconer_lattice(8, 1.0, 2).unwrap().translate(&[2.0, 2.0]).unwrap();
        let e = evenize(&m);
        let a = frostman_constant_cloud(m.cloud(), 1.0, 1.0 / 16.0, 0.9).unwrap();
        let b = frostman_constant_cloud(e.cloud(), 1.0, 1.0 / 16.0, 0.9).unwrap();
        for (x, y) in a.ratio_per_scale.iter().zip(&b.ratio_per_scale) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(b.constant_estimate <= 2.0 * a.constant_estimate);
    }

    #[test]
    fn dirac_lift_keeps_constant() {
        let m = build_cantor_product(0.25, 3, 2).unwrap();
        let st = product_with_time(&m, TimeLaw::DiracAt(0.0)).unwrap();
        let a = frostman_constant(&m, 1.0, 1.0 / 32.0).unwrap();
        let b = frostman_constant_cloud(st.cloud(), 1.0, 1.0 / 32.0, m.diameter_hint()).unwrap();
        assert!((a.constant_estimate - b.constant_estimate).abs() < 1e-12);
    }

    #[test]
    fn estimate_is_monotone_in_alpha_below_unit_radius() {
        let m = build_cantor_product(1.0 / 3.0, 5, 2).unwrap().with_diameter_hint(1.0);
        let mut prev = 0.0;
        for alpha in [0.5, 0.8, 1.0, 1.26, 1.6, 2.0] {
            let c = frostman_constant(&m, alpha, 1.0 / 64.0).unwrap().constant_estimate;
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn empty_measure_is_rejected() {
        let cloud = PointCloud::new(2, vec![], vec![]).unwrap();
        assert!(matches!(
            frostman_constant_cloud(&cloud, 1.0, 0.1, 1.0),
            Err(crate::LabError::Domain(_))
        ));
    }
}
