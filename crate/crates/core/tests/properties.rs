use fwlab::conditions::{gamma_lower_bound, new_condition_region, s_necessary};
use fwlab::distance::{distance_set_measure, pushforward};
use fwlab::fourier::{standard_bump, FieldDomain, GridField, GridSpec, MeasureSpectrum};
use fwlab::measures::{
    build_cantor_product, build_sphere_measure, evenize, frostman_constant, product_with_time, AtomicMeasure,
    TimeLaw,
};
use fwlab::norms::fit_exponent;
use fwlab::nullform::null_energy;
use fwlab::wave::{half_wave, sobolev_norm};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_measure(n: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((prop::collection::vec(-0.5f64..0.5, n), 0.01f64..1.0), 1..24).prop_map(move |atoms| {
        let coords = atoms.iter().flat_map(|(p, _)| p.clone()).collect();
        let weights = atoms.iter().map(|(_, w)| *w).collect();
        AtomicMeasure::new(n, coords, weights).unwrap()
    })
}

fn band_field(spec: GridSpec, band: f64, seed: Vec<(f64, f64)>) -> GridField {
    let mut f = GridField::zeros(spec, FieldDomain::Frequency);
    let mut it = seed.into_iter().cycle();
    for (i, v) in f.values_mut().iter_mut().enumerate() {
        if spec.frequency_norm(i) <= band {
            let (a, b) = it.next().unwrap();
            *v = Complex64::new(a, b);
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn s_necessary_is_nondecreasing_in_p(alpha in 0.01f64..4.0, p in 1.0f64..8.0, dp in 0.0f64..4.0, n in 2usize..4) {
        prop_assume!(alpha <= n as f64 + 1.0);
        let a = s_necessary(alpha, p, n).unwrap();
        let b = s_necessary(alpha, p + dp, n).unwrap();
        // Every branch carries -c/p with c >= 0, so the bound rises with p.
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn s_necessary_is_continuous_in_alpha(alpha in 0.01f64..3.99, p in 1.0f64..8.0, n in 2usize..4) {
        prop_assume!(alpha + 1e-9 <= n as f64 + 1.0);
        let a = s_necessary(alpha, p, n).unwrap();
        let b = s_necessary(alpha + 1e-9, p, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-8);
    }

    #[test]
    fn gamma_bound_monotonicity(alpha in 0.001f64..2.999, da in 0.0f64..1.0, n in 2usize..4) {
        let nf = n as f64;
        prop_assume!(alpha + da <= nf);
        let g0 = gamma_lower_bound(alpha, n).unwrap().value;
        let g1 = gamma_lower_bound(alpha + da, n).unwrap().value;
        prop_assert!(g1 <= g0 + 1e-12);
        prop_assert!(g1 + (alpha + da) / 2.0 >= g0 + alpha / 2.0 - 1e-12);
    }

    #[test]
    fn region_is_empty_past_the_cutoff(t in 0.0f64..1.0, n in 2usize..6) {
        let cutoff = match n { 2 => 4.0 / 3.0, 3 => 1.6, _ => 2.0 };
        let p = 1.0 + t;
        let region = new_condition_region(p, n).unwrap();
        if p < cutoff - 1e-12 {
            prop_assert!(region.is_some());
        }
        if p > cutoff + 1e-12 {
            prop_assert!(region.is_none());
        }
    }

    #[test]
    fn cantor_counts_and_weights(ratio in 0.05f64..0.5, depth in 1usize..5, n in 1usize..3) {
        let mu = build_cantor_product(ratio, depth, n).unwrap();
        prop_assert_eq!(mu.len(), 1usize << (depth * n));
        let w0 = mu.cloud().weight(0);
        prop_assert!(mu.cloud().weights().iter().all(|w| *w == w0));
    }

    #[test]
    fn evenize_twice_doubles(mu in small_measure(2)) {
        let once = evenize(&mu);
        let twice = evenize(&once);
        prop_assert_eq!(twice.len(), 2 * once.len());
        prop_assert!((twice.total_mass() - 2.0 * once.total_mass()).abs() <= 1e-12 * twice.total_mass());
    }

    #[test]
    fn time_lifts_keep_mass(mu in small_measure(2), count in 1usize..9, t0 in -1.0f64..1.0) {
        for law in [TimeLaw::UniformGrid(count), TimeLaw::DiracAt(t0)] {
            let nu = product_with_time(&mu, law).unwrap();
            prop_assert!((nu.total_mass() - mu.total_mass()).abs() <= 1e-12 * mu.total_mass());
        }
    }

    #[test]
    fn frostman_is_monotone_in_alpha(mu in small_measure(2), a in 0.2f64..1.8, da in 0.0f64..0.2) {
        // All probed radii stay below one when the measure fits in a unit ball.
        let mu = mu.with_diameter_hint(0.99);
        let lo = frostman_constant(&mu, a, 1e-3).unwrap().constant_estimate;
        let hi = frostman_constant(&mu, a + da, 1e-3).unwrap().constant_estimate;
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn pushforward_total_is_squared_mass(mu in small_measure(2), bins in 1usize..40) {
        let d = pushforward(&mu, 0.0, bins).unwrap();
        let m = mu.total_mass();
        prop_assert!((d.total - m * m).abs() <= 1e-12 * m * m);
    }

    #[test]
    fn thickened_distance_set_grows_with_radius(mu in small_measure(2), r in 1e-4f64..0.1, dr in 0.0f64..0.1) {
        let a = distance_set_measure(&mu, r).unwrap();
        let b = distance_set_measure(&mu, r + dr).unwrap();
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn half_wave_unitary_group(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let spec = GridSpec::new(2, 32, 2.0).unwrap();
        let f = band_field(spec, 6.0, seed);
        let norm = f.l2_norm();
        prop_assert!((half_wave(&f, t).l2_norm() - norm).abs() <= 1e-12 * norm);
        let two_steps = half_wave(&half_wave(&f, s), t);
        prop_assert!(two_steps.max_abs_diff(&half_wave(&f, s + t)) <= 1e-12 * f.sup_norm().max(1.0) * 16.0);
    }

    #[test]
    fn null_energy_has_zero_mean(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8), t in 0.0f64..1.0) {
        let spec = GridSpec::new(2, 64, 2.0).unwrap();
        let f = band_field(spec, 4.0, seed);
        let h1 = sobolev_norm(&f, 1.0);
        prop_assert!(null_energy(&f, t).integral().re.abs() <= 1e-10 * h1 * h1);
    }

    #[test]
    fn littlewood_paley_reconstruction_and_orthogonality(mu in small_measure(2), k_max in 2u32..5) {
        let spec = GridSpec::new(2, 128, 2.0).unwrap();
        let spectrum = MeasureSpectrum::new(&mu, spec).unwrap();
        let pieces: Vec<GridField> = (0..=k_max).map(|k| spectrum.piece(k).unwrap().field).collect();
        let mut sum = GridField::zeros(spec, FieldDomain::Frequency);
        for p in &pieces {
            sum = sum.add(p);
        }
        let bump = standard_bump();
        let low = spectrum.filtered(|r| bump.low_pass(k_max, r));
        let scale = low.to_space().sup_norm();
        prop_assert!(sum.to_space().max_abs_diff(&low.to_space()) <= 1e-10 * scale);
        for i in 0..pieces.len() {
            for j in i + 2..pieces.len() {
                let ip = pieces[i].inner(&pieces[j]).norm();
                prop_assert!(ip <= 1e-10 * pieces[i].l2_norm() * pieces[j].l2_norm() + 1e-300);
            }
        }
    }

    #[test]
    fn exact_power_laws_are_recovered(slope in -3.0f64..3.0, c in 0.1f64..10.0) {
        let samples: Vec<(f64, f64)> = (2..8).map(|j| { let r = 2f64.powi(j); (r, c * r.powf(slope)) }).collect();
        let fit = fit_exponent(&samples).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!(fit.residual_rms <= 1e-10);
    }
}

#[test]
fn sphere_masses_match_surface_area() {
    let circle = build_sphere_measure(1.5, 2, 1000).unwrap();
    let expected = 2.0 * std::f64::consts::PI * 1.5;
    assert!((circle.total_mass() - expected).abs() <= 1e-10 * expected);
    let sphere = build_sphere_measure(0.5, 3, 4000).unwrap();
    let expected = 4.0 * std::f64::consts::PI * 0.25;
    assert!((sphere.total_mass() - expected).abs() <= 1e-3 * expected);
}
