//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Surface area of the unit sphere S^(n-1) in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    // |S^(n-1)| = 2 pi^(n/2) / Gamma(n/2)
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

/// Gamma(n/2) for positive integer n.
fn gamma_half_integer(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product::<f64>()
    } else {
        // Gamma(1/2) * prod_{k=0}^{(n-3)/2} (k + 1/2)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Bessel function J0 from (1/pi) int_0^pi cos(x sin theta) d theta. The
/// integrand is periodic and entire, so the trapezoid rule with a node count
/// past the turning point |x| / 2 is accurate to roundoff.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    let nodes = (0.5 * ax + 5.0 * ax.cbrt() + 20.0).ceil() as usize;
    let h = PI / nodes as f64;
    let sum: f64 = (0..nodes).map(|j| (ax * (h * j as f64).sin()).cos()).sum();
    sum / nodes as f64
}

/// Bessel function J1, rational/asymptotic approximation (absolute error ~1e-8).
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let num = x
            * (72362614232.0
                + y * (-7895059235.0
                    + y * (242396853.1 + y * (-2972611.439 + y * (15704.48260 + y * (-30.16036606))))));
        let den = 144725228442.0
            + y * (2300535178.0 + y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
        num / den
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 2.356194491;
        let p = 1.0
            + y * (0.183105e-2 + y * (-0.3516396496e-4 + y * (0.2457520174e-5 + y * (-0.240337019e-6))));
        let q = 0.04687499995
            + y * (-0.2002690873e-3 + y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
        let ans = (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q);
        if x < 0.0 {
            -ans
        } else {
            ans
        }
    }
}

/// Gauss-Legendre nodes and weights on [a, b].
pub fn gauss_legendre(count: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..count {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut z = (PI * (i as f64 + 0.75) / (count as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..count {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = count as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((mid - half * z, half * w));
    }
    out
}

/// Smallest integer >= `n` whose only prime factors are 2, 3 and 5.
pub fn good_fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j_integral(order: f64, x: f64) -> f64 {
        // J_m(x) = (1/pi) int_0^pi cos(m s - x sin s) ds, trapezoid is spectrally accurate here.
        let m = 4000;
        let h = PI / m as f64;
        let mut acc = 0.0;
        for i in 0..=m {
            let s = i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc += w * (order * s - x * s.sin()).cos();
        }
        acc * h / PI
    }

    #[test]
    fn j0_matches_power_series_and_tables() {
        for &x in &[0.0, 0.3, 1.0, 2.4048, 5.0, 7.9, 10.0] {
            // sum_k (-x^2/4)^k / (k!)^2
            let (mut term, mut sum) = (1.0f64, 1.0f64);
            for k in 1..60 {
                term *= -x * x / (4.0 * (k * k) as f64);
                sum += term;
            }
            assert!((bessel_j0(x) - sum).abs() < 1e-13, "J0({x})");
        }
        assert!((bessel_j0(100.0) - 0.019985850304223122).abs() < 1e-14);
        assert!((bessel_j0(-1.0) - 0.7651976865579666).abs() < 1e-15);
    }

    #[test]
    fn bessel_matches_integral_representation() {
        for &x in &[0.0, 0.3, 1.0, 2.4048, 5.0, 7.9, 8.1, 15.0, 60.0, 300.0] {
            assert!((bessel_j0(x) - j_integral(0.0, x)).abs() < 2e-8, "J0({x})");
            assert!((bessel_j1(x) - j_integral(1.0, x)).abs() < 2e-8, "J1({x})");
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let nodes = gauss_legendre(8, 1.0, 2.0);
        let integral: f64 = nodes.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((integral - (2f64.powi(10) - 1.0) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn good_sizes() {
        assert_eq!(good_fft_size(7), 8);
        assert_eq!(good_fft_size(1028), 1080);
        assert_eq!(good_fft_size(1024), 1024);
    }
}
