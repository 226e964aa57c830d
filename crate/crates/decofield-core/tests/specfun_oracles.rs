//! Oracle checks for the special functions: brute-force series, quadrature,
//! and root bracketing, all independent of the library's evaluation paths.

use decofield_core::model::NoiseModel;
use decofield_core::specfun::{bessel_j0, gaussian_hankel, inv_norm_cdf, jacobi_theta3, norm_cdf};

/// Composite Simpson rule on [a, b].
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// J0 by direct defining integral (1/pi) int_0^pi cos(x sin t) dt —
/// a route fully independent of both the power series and the asymptotics.
fn j0_integral_oracle(x: f64) -> f64 {
    let n = 20_000.max((1_200.0 * x.abs()) as usize);
    simpson(|t| (x * t.sin()).cos(), 0.0, std::f64::consts::PI, n) / std::f64::consts::PI
}

#[test]
fn theta3_tiny_nome_two_term_expansion() {
    let q = (-2.0 * std::f64::consts::PI.powi(2)).exp();
    let got = jacobi_theta3(q).unwrap();
    let two_term = 1.0 + 2.0 * q;
    // next correction is O(q^4) ~ 5e-35
    assert!((got - two_term).abs() < 1e-30, "{got} vs {two_term}");
}

#[test]
fn theta3_slow_nome_against_partial_sums() {
    // sigma_x / L = 0.02 regime: q close to 1, still summable directly
    let q: f64 = (-2.0 * std::f64::consts::PI.powi(2) * 0.02f64.powi(2)).exp();
    let direct = jacobi_theta3(q).unwrap();
    let mut brute = 1.0;
    for n in 1..=4000 {
        brute += 2.0 * q.powi((n * n) as i32);
    }
    assert!((direct - brute).abs() < 1e-12, "{direct} vs {brute}");
}

#[test]
fn bessel_j0_against_integral_oracle() {
    for &x in &[
        0.0, 0.5, 1.0, 2.0, 4.0, 7.5, 8.0, 10.0, 11.9, 12.0, 12.1, 15.0, 25.0, 50.0, 100.0,
    ] {
        let got = bessel_j0(x);
        let want = j0_integral_oracle(x);
        assert!(
            (got - want).abs() < 1e-10,
            "x={x}: {got} vs oracle {want}"
        );
    }
}

#[test]
fn bessel_j0_trivial_and_even() {
    assert_eq!(bessel_j0(0.0), 1.0);
    for &x in &[0.3, 2.7, 9.4, 33.0] {
        assert_eq!(bessel_j0(x), bessel_j0(-x));
    }
}

#[test]
fn bessel_j0_first_zero_by_bisection() {
    // bracket the first positive zero with the integral oracle, then check
    // the implementation vanishes there
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    assert!(j0_integral_oracle(lo) > 0.0 && j0_integral_oracle(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j0_integral_oracle(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    assert!((root - 2.404825557695773).abs() < 1e-9, "{root}");
    assert!(bessel_j0(root).abs() < 1e-8);
}

#[test]
fn gaussian_hankel_matches_radial_quadrature() {
    // g_hat(s) = int_0^R dr r g_r(r) J0(s r) with g_r(r) = exp(-r^2/2s2)/s2
    for &sg2 in &[0.01, 0.08, 0.32, 1.0, 4.0, 32.0] {
        let noise = NoiseModel::new(1.0, sg2, 1.0).unwrap();
        let sg = sg2.sqrt();
        let radius = 12.0 * sg;
        for &s in &[0.0, 0.1 / sg, 0.5 / sg, 1.0 / sg, 3.0 / sg] {
            let want = simpson(
                |r| r * (-0.5 * r * r / sg2).exp() / sg2 * bessel_j0(s * r),
                0.0,
                radius,
                8_000,
            );
            let got = gaussian_hankel(&noise, s);
            assert!(
                (got - want).abs() < 1e-6,
                "sg2={sg2} s={s}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn gaussian_hankel_limits() {
    let noise = NoiseModel::new(1.0, 0.32, 1.0).unwrap();
    assert_eq!(gaussian_hankel(&noise, 0.0), 1.0);
    let mut prev = 1.0;
    for i in 1..500 {
        let v = gaussian_hankel(&noise, i as f64 * 0.25);
        assert!(v <= prev);
        prev = v;
    }
    assert_eq!(prev, 0.0);
}

#[test]
fn inv_norm_cdf_roundtrip_against_erf_cdf() {
    // Phi oracle via Simpson quadrature of the density, independent of erfc
    let phi_quad = |z: f64| -> f64 {
        0.5 + simpson(
            |t| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            0.0,
            z,
            4_000,
        )
    };
    let target = phi_quad(1.0);
    let z = inv_norm_cdf(target).unwrap();
    assert!((z - 1.0).abs() < 1e-9, "{z}");

    for &u in &[1e-15, 1e-9, 1e-4, 0.2, 0.5, 0.77, 1.0 - 1e-9] {
        let z = inv_norm_cdf(u).unwrap();
        let back = norm_cdf(z);
        // implied u-error bounded by 1e-9 * density
        let dens = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((back - u).abs() < 1e-9 * dens.max(1e-30) + 1e-17, "u={u}");
    }
}
