use std::f64::consts::PI;

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use wavegroup::{
    find_null_frame, fit_dipole, make_isotropic_rest, pair_boost_closed_form, synthesize_sky,
    BalancedPair, Superposition, Vec3,
};

const T_REST: f64 = 2.725;
const KM_S: f64 = 299_792.458;

/// 4 bands equal in z times 12 azimuth sectors: 48 cells of equal area.
fn cell(n: Vec3) -> usize {
    let band = (((n.z + 1.0) / 2.0 * 4.0) as usize).min(3);
    let phi = n.y.atan2(n.x) + PI;
    let sector = ((phi / (2.0 * PI) * 12.0) as usize).min(11);
    band * 12 + sector
}

#[test]
fn isotropic_rest_is_uniform_on_the_sphere() {
    let s = make_isotropic_rest(10_000, 1.0, 11).unwrap();
    let mut counts = [0usize; 48];
    for p in s.momenta().step_by(2) {
        counts[cell(p / p.norm())] += 1;
    }
    let expected = 10_000.0 / 48.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p_value = 1.0 - ChiSquared::new(47.0).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 {chi2}, p {p_value}");
}

#[test]
fn isotropic_rest_has_zero_momentum() {
    let s = make_isotropic_rest(5_000, 2.0, 4).unwrap();
    assert_eq!(s.total_momentum(), Vec3::ZERO);
    assert!((s.rest_mass().unwrap() - 20_000.0).abs() < 1e-9);
}

fn dipole_error(n: usize, sigma: f64, seeds: std::ops::Range<u64>) -> f64 {
    let beta = Vec3::new(0.0, 1e-3, 0.0);
    let truth = fit_dipole(&synthesize_sky(beta, T_REST, n, 0.0, 0).unwrap()).unwrap();
    let count = seeds.end - seeds.start;
    let sum: f64 = seeds
        .map(|seed| {
            let fit = fit_dipole(&synthesize_sky(beta, T_REST, n, sigma, seed).unwrap()).unwrap();
            (fit.dipole - truth.dipole).norm_squared()
        })
        .sum();
    (sum / count as f64).sqrt()
}

#[test]
fn dipole_noise_falls_as_inverse_root_samples() {
    let coarse = dipole_error(1_000, 1e-4, 0..40);
    let fine = dipole_error(16_000, 1e-4, 0..40);
    let ratio = coarse / fine;
    // sqrt(16) = 4; 40 trials leave roughly 15% scatter on each estimate.
    assert!((2.8..5.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn noisy_frame_recovery_within_one_percent() {
    let dir = Vec3::new(1.0, -2.0, 0.5) / Vec3::new(1.0, -2.0, 0.5).norm();
    let beta = dir * (350.0 / KM_S);
    for seed in 0..10 {
        let est = find_null_frame(beta, T_REST, 10_000, 1e-5, 1e-4, seed).unwrap();
        let rel = (est.speed_km_s() - 350.0).abs() / 350.0;
        assert!(rel < 0.01, "seed {seed}: {} km/s", est.speed_km_s());
        let angle = (-est.beta).angle_to(dir).to_degrees();
        assert!(angle < 1.0, "seed {seed}: {angle} deg");
    }
}

#[test]
fn monopole_is_stable_against_observer_motion() {
    for speed in [0.0, 1e-4, 1e-3, 1e-2] {
        let sky = synthesize_sky(Vec3::new(0.0, 0.0, speed), T_REST, 4_000, 0.0, 9).unwrap();
        let fit = fit_dipole(&sky).unwrap();
        let rel = (fit.monopole - T_REST).abs() / T_REST;
        assert!(rel < speed * speed + 1e-12, "speed {speed}: {}", fit.monopole);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairs_boost_independently(
        theta1 in 0.0..PI,
        theta2 in 0.0..PI,
        v in 0.05..0.9f64,
    ) {
        let p1 = BalancedPair::in_plane(theta1, 1.0).unwrap();
        let p2 = BalancedPair::in_plane(theta2, 1.0).unwrap();
        let parts = [p1.rest_components(v).unwrap(), p2.rest_components(v).unwrap()];
        let joint = Superposition::combine(&parts).unwrap();
        let boosted = joint.boost(Vec3::new(v, 0.0, 0.0), 1e-10).unwrap().final_state;
        let m = boosted.momenta().collect::<Vec<_>>();
        for (pair, (a, b)) in [(p1, (m[0], m[1])), (p2, (m[2], m[3]))] {
            let t = pair_boost_closed_form(&pair, v).unwrap();
            prop_assert!((a.norm() - t.a).abs() < 1e-7, "{} vs {}", a.norm(), t.a);
            prop_assert!((b.norm() - t.b).abs() < 1e-7, "{} vs {}", b.norm(), t.b);
        }
    }
}
