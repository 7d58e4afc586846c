//! Distance sets of atomic measures: push-forward histograms, thickened
//! distance-set length and spherical means of Littlewood-Paley pieces.

use crate::error::{param, range, resource, Result};
use crate::fourier::{LittlewoodPaleyPiece, PointSampler};
use crate::measures::AtomicMeasure;
use crate::numeric::{bessel_j0, gauss_legendre, unit_sphere_area};
use crate::wave::{cosine_phase, cosine_wave};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// Largest atom count for the all-pairs loops.
pub const PAIR_ATOM_LIMIT: usize = 20_000;

/// Rows per tile in the blocked pair loops.
const TILE: usize = 128;

/// Histogram of the push-forward of mu x mu under (x, y) -> |x - y|, each
/// pair weighted by |x - y|^lambda.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceDensity {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub lambda: f64,
    pub total: f64,
    /// Mass of coincident pairs left out because lambda < 0.
    pub skipped_mass: f64,
    pub skipped_pairs: usize,
}

impl DistanceDensity {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// Mass per unit length in each bin.
    pub fn densities(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.masses[i] / self.bin_width(i)).collect()
    }

    pub fn sup_density(&self) -> f64 {
        self.densities().into_iter().fold(0.0, f64::max)
    }

    /// Merges groups of `factor` adjacent bins.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.bins().is_multiple_of(factor) {
            return Err(param(format!("cannot merge {} bins in groups of {factor}", self.bins())));
        }
        let masses = self.masses.chunks(factor).map(|c| c.iter().sum()).collect();
        let bin_edges = self.bin_edges.iter().step_by(factor).copied().collect();
        Ok(Self {
            bin_edges,
            masses,
            ..self.clone()
        })
    }

    /// CSV with columns bin_center, mass, density.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["bin_center", "mass", "density"])?;
        for ((c, m), d) in self.bin_centers().iter().zip(&self.masses).zip(self.densities()) {
            writer.serialize((c, m, d))?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn check_pair_budget(mu: &AtomicMeasure) -> Result<()> {
    if mu.len() > PAIR_ATOM_LIMIT {
        return Err(resource(format!(
            "{} atoms exceed the all-pairs limit of {PAIR_ATOM_LIMIT}",
            mu.len()
        )));
    }
    Ok(())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct TileHistogram {
    masses: Vec<f64>,
    skipped_mass: f64,
    skipped_pairs: usize,
}

/// Ordered-pair histogram on [0, bounding diameter], split into `bins`
/// equal bins. Distances on the upper edge land in the last bin.
pub fn pushforward(mu: &AtomicMeasure, lambda: f64, bins: usize) -> Result<DistanceDensity> {
    if bins == 0 {
        return Err(param("pushforward needs at least one bin"));
    }
    if !lambda.is_finite() {
        return Err(param("lambda must be finite"));
    }
    check_pair_budget(mu)?;
    let cloud = mu.cloud();
    let diameter = cloud.bounding_diameter();
    let top = if diameter > 0.0 { diameter } else { 1.0 };
    let width = top / bins as f64;
    let count = cloud.len();
    let tiles: Vec<TileHistogram> = (0..count.div_ceil(TILE))
        .into_par_iter()
        .map(|tile| {
            let mut h = TileHistogram {
                masses: vec![0.0; bins],
                skipped_mass: 0.0,
                skipped_pairs: 0,
            };
            for i in tile * TILE..((tile + 1) * TILE).min(count) {
                let (xi, wi) = (cloud.point(i), cloud.weight(i));
                for j in 0..count {
                    let d = distance(xi, cloud.point(j));
                    let w = wi * cloud.weight(j);
                    if d == 0.0 && lambda < 0.0 {
                        h.skipped_mass += w;
                        h.skipped_pairs += 1;
                        continue;
                    }
                    let bin = ((d / width) as usize).min(bins - 1);
                    h.masses[bin] += w * d.powf(lambda);
                }
            }
            h
        })
        .collect();
    // Merge in tile order so the result does not depend on scheduling.
    let mut masses = vec![0.0; bins];
    let mut skipped_mass = 0.0;
    let mut skipped_pairs = 0;
    for t in &tiles {
        for (m, v) in masses.iter_mut().zip(&t.masses) {
            *m += v;
        }
        skipped_mass += t.skipped_mass;
        skipped_pairs += t.skipped_pairs;
    }
    if skipped_pairs > 0 {
        eprintln!("pushforward: lambda = {lambda} < 0, skipped {skipped_pairs} coincident pairs of mass {skipped_mass}");
    }
    let bin_edges = (0..=bins).map(|i| i as f64 * width).collect();
    Ok(DistanceDensity {
        bin_edges,
        total: masses.iter().sum(),
        masses,
        lambda,
        skipped_mass,
        skipped_pairs,
    })
}

/// Default weight exponent max(4, ceil(2n / (2 alpha - (n - 1)))), defined for
/// alpha > (n - 1)/2.
pub fn default_lambda(n: usize, alpha: f64) -> Result<f64> {
    let gap = 2.0 * alpha - (n as f64 - 1.0);
    if !(gap > 0.0) {
        return Err(range(format!(
            "the weight exponent needs alpha > (n - 1)/2 = {}, got {alpha}",
            (n as f64 - 1.0) / 2.0
        )));
    }
    Ok((2.0 * n as f64 / gap).ceil().max(4.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub lambda: f64,
    pub bins: Vec<usize>,
    pub sup_density: Vec<f64>,
    /// Finest over coarsest sup density.
    pub growth: f64,
    /// Growth at most 2 across the refinements.
    pub bounded: bool,
}

/// Sup bin density at `base_bins * 2^j`, j = 0..=levels, from one histogram
/// at the finest resolution.
pub fn density_refinement(mu: &AtomicMeasure, lambda: f64, base_bins: usize, levels: u32) -> Result<RefinementReport> {
    let finest = base_bins
        .checked_mul(1 << levels)
        .ok_or_else(|| param("too many refinement levels"))?;
    let fine = pushforward(mu, lambda, finest)?;
    let mut bins = Vec::new();
    let mut sup_density = Vec::new();
    for j in 0..=levels {
        let h = fine.coarsen(1 << (levels - j))?;
        bins.push(h.bins());
        sup_density.push(h.sup_density());
    }
    let growth = sup_density[levels as usize] / sup_density[0];
    Ok(RefinementReport {
        lambda,
        bins,
        sup_density,
        growth,
        bounded: growth <= 2.0,
    })
}

/// Lebesgue measure of the union of [d - r, d + r] over all pairwise
/// distances d, including d = 0.
pub fn distance_set_measure(mu: &AtomicMeasure, thickening: f64) -> Result<f64> {
    if !(thickening > 0.0 && thickening.is_finite()) {
        return Err(param(format!("thickening must be positive, got {thickening}")));
    }
    check_pair_budget(mu)?;
    let cloud = mu.cloud();
    let count = cloud.len();
    if count == 0 {
        return Ok(0.0);
    }
    let mut distances: Vec<f64> = (0..count)
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..count).map(move |j| distance(cloud.point(i), cloud.point(j))))
        .collect();
    distances.push(0.0);
    distances.par_sort_unstable_by(f64::total_cmp);
    // Equal-length intervals: sorting centres sorts the left ends.
    let mut total = 0.0;
    let (mut lo, mut hi) = (distances[0] - thickening, distances[0] + thickening);
    for &d in &distances[1..] {
        if d - thickening > hi {
            total += hi - lo;
            lo = d - thickening;
        }
        hi = d + thickening;
    }
    Ok(total + hi - lo)
}

/// Fourier transform of the surface measure of the sphere of radius t at
/// |xi| = r: 2 pi t^(n-1) (t r)^(1 - n/2) J_(n/2 - 1)(2 pi t r).
pub fn sphere_transform(n: usize, t: f64, r: f64) -> f64 {
    let z = 2.0 * PI * t * r;
    match n {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * t * bessel_j0(z),
        _ => {
            let sinc = if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
            4.0 * PI * t * t * sinc
        }
    }
}

/// Directions and weights on S^(n-1) integrating spherical polynomials of
/// degree <= `degree` exactly. Weights sum to |S^(n-1)|.
pub fn sphere_rule(n: usize, degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match n {
        1 => Ok((vec![1.0, -1.0], vec![1.0, 1.0])),
        2 => {
            let m = degree + 1;
            let dirs = (0..m)
                .flat_map(|j| {
                    let a = 2.0 * PI * j as f64 / m as f64;
                    [a.cos(), a.sin()]
                })
                .collect();
            Ok((dirs, vec![2.0 * PI / m as f64; m]))
        }
        3 => {
            let azimuths = degree + 1;
            let heights = gauss_legendre(degree / 2 + 1, -1.0, 1.0);
            let mut dirs = Vec::with_capacity(3 * azimuths * heights.len());
            let mut weights = Vec::with_capacity(azimuths * heights.len());
            for &(z, wz) in &heights {
                let rho = (1.0 - z * z).sqrt();
                for j in 0..azimuths {
                    let a = 2.0 * PI * j as f64 / azimuths as f64;
                    dirs.extend_from_slice(&[rho * a.cos(), rho * a.sin(), z]);
                    weights.push(wz * 2.0 * PI / azimuths as f64);
                }
            }
            Ok((dirs, weights))
        }
        _ => Err(param(format!("sphere rules exist for n in 1..=3, got {n}"))),
    }
}

fn check_points(piece: &LittlewoodPaleyPiece, points: &[f64]) -> Result<usize> {
    let n = piece.field.spec().n;
    if !points.len().is_multiple_of(n) {
        return Err(param("evaluation points do not match the grid dimension"));
    }
    Ok(n)
}

/// (sigma_t * mu_k)(x) = int_{S^(n-1)} mu_k(x - t w) t^(n-1) dw at each point,
/// by a sphere rule fine enough for the band of the piece. The piece is
/// assumed real.
pub fn spherical_convolution(piece: &LittlewoodPaleyPiece, t: f64, points: &[f64]) -> Result<Vec<f64>> {
    check_radius(t)?;
    let n = check_points(piece, points)?;
    let field = &piece.field;
    let band = piece.annulus.1 * (n as f64).sqrt();
    let degree = (2.0 * PI * band * t).ceil() as usize + 24;
    let (dirs, weights) = sphere_rule(n, degree)?;
    let nodes = weights.len();
    let mut coords = Vec::with_capacity(points.len() * nodes);
    for x in points.chunks(n) {
        for w in dirs.chunks(n) {
            coords.extend(x.iter().zip(w).map(|(a, b)| a - t * b));
        }
    }
    let values = PointSampler::new(*field.spec(), field.mode_radius(), &coords)?.sample(field)?;
    let scale = t.powi(n as i32 - 1);
    Ok(values
        .chunks(nodes)
        .map(|row| scale * row.iter().zip(&weights).map(|(v, w)| w * v.re).sum::<f64>())
        .collect())
}

/// The same convolution evaluated on the frequency side with the closed-form
/// sphere transform.
pub fn spherical_convolution_spectral(piece: &LittlewoodPaleyPiece, t: f64, points: &[f64]) -> Result<Vec<f64>> {
    check_radius(t)?;
    let n = check_points(piece, points)?;
    let field = &piece.field;
    let sampler = PointSampler::new(*field.spec(), field.mode_radius(), points)?;
    let values = sampler.sample_with_radial(field, |r| Complex64::new(sphere_transform(n, t, r), 0.0))?;
    Ok(values.iter().map(|v| v.re).collect())
}

fn check_radius(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(param(format!("sphere radius t must lie in (0, 1], got {t}")));
    }
    Ok(())
}

/// max |sigma_t * mu_k| / (t^(n-1) 2^((n - alpha) k) C) over the points.
pub fn small_radius_constant(
    piece: &LittlewoodPaleyPiece,
    t: f64,
    points: &[f64],
    alpha: f64,
    frostman: f64,
) -> Result<f64> {
    let n = piece.field.spec().n as f64;
    let values = spherical_convolution(piece, t, points)?;
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(peak / (t.powf(n - 1.0) * 2f64.powf((n - alpha) * piece.k as f64) * frostman))
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub k: u32,
    pub t: f64,
    pub lambda: f64,
    /// [2^(-n k / lambda), 1].
    pub window: (f64, f64),
    pub convolution: Vec<f64>,
    /// 2^(-(n-1)k/2) |cos(t sqrt(-Lap) - (n-1) pi/4) mu_k|.
    pub main_bound: Vec<f64>,
    /// Leading stationary-phase term, a sum of two half-waves.
    pub main_term: Vec<f64>,
    /// Convolution minus the leading term.
    pub remainder: Vec<f64>,
    /// max |convolution| / (main_bound + |remainder|).
    pub worst_ratio: f64,
    /// rms(remainder) / rms(main_term).
    pub remainder_share: f64,
    pub main_dominates: bool,
}

/// Splits sigma_t * mu_k into the leading half-wave term
/// 2 t^((n-1)/2) |xi|^(-(n-1)/2) cos(2 pi t |xi| - (n-1) pi/4) and a remainder,
/// for t in the window [2^(-n k / lambda), 1].
pub fn mattila_split_check(piece: &LittlewoodPaleyPiece, t: f64, points: &[f64], lambda: f64) -> Result<SplitReport> {
    let n = check_points(piece, points)?;
    if !(lambda > 0.0) {
        return Err(param("lambda must be positive"));
    }
    if piece.k == 0 {
        return Err(param("the split needs a band piece, k >= 1"));
    }
    let lower = 2f64.powf(-(n as f64) * piece.k as f64 / lambda);
    if !(t >= lower * (1.0 - 1e-12) && t <= 1.0) {
        return Err(range(format!("t = {t} lies outside the window [{lower}, 1]")));
    }
    let field = &piece.field;
    let sampler = PointSampler::new(*field.spec(), field.mode_radius(), points)?;
    let convolution = spherical_convolution(piece, t, points)?;

    let decay = 2f64.powf(-(n as f64 - 1.0) * piece.k as f64 / 2.0);
    let cosine = cosine_wave(field, t)?;
    let main_bound: Vec<f64> = sampler.sample(&cosine)?.iter().map(|v| decay * v.norm()).collect();

    // Sum of the two half-wave symbols e^(+-i(2 pi t r - s)), weighted by
    // t^((n-1)/2) r^(-(n-1)/2).
    let order = (n as f64 - 1.0) / 2.0;
    let shift = cosine_phase(n);
    let main_field = field.apply_radial(|r| {
        if r > 0.0 {
            Complex64::new(2.0 * (t / r).powf(order) * (2.0 * PI * t * r - shift).cos(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let main_term: Vec<f64> = sampler.sample(&main_field)?.iter().map(|v| v.re).collect();
    let remainder: Vec<f64> = convolution.iter().zip(&main_term).map(|(c, m)| c - m).collect();

    let worst_ratio = convolution
        .iter()
        .zip(&main_bound)
        .zip(&remainder)
        .map(|((c, b), r)| {
            let bound = b + r.abs();
            if bound > 0.0 {
                c.abs() / bound
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt();
    let main_rms = rms(&main_term);
    let remainder_share = if main_rms > 0.0 { rms(&remainder) / main_rms } else { f64::INFINITY };
    Ok(SplitReport {
        k: piece.k,
        t,
        lambda,
        window: (lower, 1.0),
        convolution,
        main_bound,
        main_term,
        remainder,
        worst_ratio,
        remainder_share,
        main_dominates: remainder_share < 1.0,
    })
}

/// t^(n-1) |S^(n-1)|, the value of sigma_t * 1.
pub fn sphere_mass(n: usize, t: f64) -> f64 {
    t.powi(n as i32 - 1) * unit_sphere_area(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{FieldDomain, GridField, GridSpec, MeasureSpectrum};
    use crate::measures::{build_cantor_product_centered, build_falconer_lattice};
    use rand::{Rng, SeedableRng};

    fn pair(d: f64) -> AtomicMeasure {
        AtomicMeasure::new(2, vec![0.0, 0.0, d, 0.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn two_atoms_histogram() {
        let h = pushforward(&pair(0.8), 0.0, 4).unwrap();
        assert!((h.masses[0] - 0.5).abs() < 1e-15);
        assert!((h.masses[3] - 0.5).abs() < 1e-15);
        assert!((h.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_triple_histogram() {
        let mu = AtomicMeasure::new(1, vec![0.0, 0.5, 1.0], vec![1.0 / 3.0; 3]).unwrap();
        let h = pushforward(&mu, 0.0, 3).unwrap();
        let expected = [1.0 / 3.0, 4.0 / 9.0, 2.0 / 9.0];
        for (m, e) in h.masses.iter().zip(expected) {
            assert!((m - e).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_lambda_skips_coincident_pairs() {
        let h = pushforward(&pair(0.5), -1.0, 2).unwrap();
        assert_eq!(h.skipped_pairs, 2);
        assert!((h.skipped_mass - 0.5).abs() < 1e-15);
        // two ordered pairs of weight 1/4 and |x - y|^-1 = 2
        assert!((h.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cantor_total_is_squared_mass_and_refinement_flattens_peaks() {
        let mu = build_cantor_product_centered(0.25, 4, 2).unwrap().scale_mass(1.7).unwrap();
        // pair-sum oracle
        let mut oracle = 0.0;
        for i in 0..mu.len() {
            for j in 0..mu.len() {
                oracle += mu.cloud().weight(i) * mu.cloud().weight(j);
            }
        }
        let fine = pushforward(&mu, 0.0, 256).unwrap();
        assert!((fine.total - oracle).abs() < 1e-10 * oracle);
        assert!((oracle - 1.7 * 1.7).abs() < 1e-10);
        let coarse = fine.coarsen(4).unwrap();
        let peak = |h: &DistanceDensity| h.masses.iter().copied().fold(0.0, f64::max);
        assert!(peak(&fine) < peak(&coarse));
        assert!((coarse.total - fine.total).abs() < 1e-12);
    }

    #[test]
    fn csv_export_has_a_row_per_bin() {
        let h = pushforward(&pair(1.0), 0.0, 5).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("bin_center,mass,density"));
    }

    #[test]
    fn default_lambda_values() {
        assert_eq!(default_lambda(2, 1.5).unwrap(), 4.0);
        assert_eq!(default_lambda(2, 0.75).unwrap(), 8.0);
        assert!(default_lambda(2, 0.5).is_err());
    }

    #[test]
    fn thickened_distance_set_examples() {
        assert!((distance_set_measure(&pair(1.0), 0.01).unwrap() - 0.04).abs() < 1e-15);
        // overlapping intervals merge
        assert!((distance_set_measure(&pair(0.01), 0.01).unwrap() - 0.03).abs() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let coords: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mu = AtomicMeasure::new(2, coords, vec![0.01; 100]).unwrap();
        let m = distance_set_measure(&mu, 0.05).unwrap();
        assert!(m >= 0.1 && m <= 2f64.sqrt() + 0.1);
    }

    #[test]
    fn thickened_length_matches_interval_oracle_on_lattice() {
        let mu = build_falconer_lattice(4, 1.0, 2).unwrap();
        let r = 1.0 / 16.0;
        // Brute-force oracle: distinct squared integer distances a^2 + b^2 over 16.
        let mut d: Vec<f64> = Vec::new();
        for a in 0..=4 {
            for b in 0..=4 {
                d.push(((a * a + b * b) as f64).sqrt() / 4.0);
            }
        }
        // Fine cell count of the union on a grid of step 1e-5.
        let step = 1e-5;
        let cells = ((2f64.sqrt() + 1.0) / step) as usize;
        let covered = (0..cells)
            .filter(|&c| {
                let x = -0.5 + (c as f64 + 0.5) * step;
                d.iter().any(|&v| (x - v).abs() <= r)
            })
            .count();
        let oracle = covered as f64 * step;
        assert!((distance_set_measure(&mu, r).unwrap() - oracle).abs() < 1e-4);
    }

    fn band_piece(k: u32, n: usize) -> LittlewoodPaleyPiece {
        let mu = build_cantor_product_centered(0.25, 3, n).unwrap();
        let size = if n == 3 { 64 } else { 128 };
        let spectrum = MeasureSpectrum::new(&mu, GridSpec::new(n, size, 1.0).unwrap()).unwrap();
        spectrum.piece(k).unwrap()
    }

    #[test]
    fn constant_piece_gives_sphere_mass() {
        let spec = GridSpec::new(2, 16, 2.0).unwrap();
        let mut field = GridField::zeros(spec, FieldDomain::Frequency);
        field.values_mut()[0] = Complex64::new(1.5, 0.0);
        let piece = LittlewoodPaleyPiece {
            k: 0,
            annulus: (0.0, 1.0),
            field,
        };
        let v = spherical_convolution(&piece, 0.3, &[0.1, 0.2, -0.4, 0.0]).unwrap();
        for x in v {
            assert!((x - 1.5 * sphere_mass(2, 0.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_frequency_side() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for n in [1usize, 2, 3] {
            let piece = band_piece(if n == 3 { 3 } else { 4 }, n);
            let points: Vec<f64> = (0..8 * n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            for t in [0.05, 0.4, 1.0] {
                let a = spherical_convolution(&piece, t, &points).unwrap();
                let b = spherical_convolution_spectral(&piece, t, &points).unwrap();
                let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-6 * scale, "n={n} t={t}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn small_radius_bound_is_finite_and_scale_free() {
        let piece = band_piece(4, 2);
        let points = [0.0, 0.0, 0.1, 0.3];
        let c1 = small_radius_constant(&piece, 1e-3, &points, 1.0, 1.0).unwrap();
        let c2 = small_radius_constant(&piece, 2e-4, &points, 1.0, 1.0).unwrap();
        assert!(c1 > 0.0 && c1 < 20.0);
        // mu_k is nearly constant on spheres this small
        assert!((c1 / c2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn split_window_and_remainder_growth() {
        let piece = band_piece(5, 2);
        let points = [0.0, 0.0, 0.1, -0.2, 0.33, 0.05];
        let lambda = 4.0;
        let edge = 2f64.powf(-2.0 * 5.0 / lambda);
        assert!(mattila_split_check(&piece, edge / 2.0, &points, lambda).is_err());
        let mid = mattila_split_check(&piece, 0.5, &points, lambda).unwrap();
        let low = mattila_split_check(&piece, edge, &points, lambda).unwrap();
        assert!(mid.main_dominates);
        assert!(mid.worst_ratio.is_finite());
        assert!(low.remainder_share > mid.remainder_share);
        for (c, (m, r)) in mid.convolution.iter().zip(mid.main_term.iter().zip(&mid.remainder)) {
            assert!((c - m - r).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_piece_matches_radial_integral() {
        // Unit atom at the origin: sigma_t * mu_k(0) = int phi_k(rho) sigma^_t(rho) |S| rho d rho
        // in R^2, approximated by the lattice sum on a large box.
        let mu = AtomicMeasure::single_atom(&[0.0, 0.0], 1.0).unwrap();
        let spectrum = MeasureSpectrum::new(&mu, GridSpec::new(2, 256, 8.0).unwrap()).unwrap();
        let piece = spectrum.piece(3).unwrap();
        let t = 0.3;
        let value = spherical_convolution(&piece, t, &[0.0, 0.0]).unwrap()[0];
        let bump = crate::fourier::standard_bump();
        let radial: f64 = gauss_legendre(400, 2.0, 8.0)
            .iter()
            .map(|&(rho, w)| w * bump.band_window(3, rho) * sphere_transform(2, t, rho) * 2.0 * PI * rho)
            .sum();
        assert!((value - radial).abs() < 1e-3 * radial.abs(), "{value} vs {radial}");
    }
}
