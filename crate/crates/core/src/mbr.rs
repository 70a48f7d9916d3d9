//! Preferred-frame search from a directional background temperature.
//!
//! An observer moving with velocity β through an isotropic thermal
//! background sees `T(n̂) = T_rest sqrt(1 − β²) / (1 − n̂·β)`, where `n̂` is
//! the direction looked in. To first order that is a monopole plus a dipole
//! of amplitude `β T_rest` pointing along the motion. Fitting the dipole and
//! boosting against it drives the observer to the frame where the dipole
//! vanishes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sphere::{random_direction, seeded_rng};
use crate::vector::Vec3;

/// Speed of light in km/s, for reporting.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Present-day background temperature in kelvin.
pub const DEFAULT_T_REST: f64 = 2.725;

/// Observer speeds must stay in the non-relativistic regime.
pub const MAX_OBSERVER_SPEED: f64 = 0.1;

pub const MIN_SKY_SAMPLES: usize = 12;

pub const MAX_FRAME_ITERATIONS: usize = 100;

/// Ratio of smallest to largest singular value below which the design
/// matrix counts as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkySample {
    pub direction: Vec3,
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleFit {
    pub monopole: f64,
    pub dipole: Vec3,
    pub residual_rms: f64,
}

impl DipoleFit {
    /// `|dipole| / monopole`; first order in the observer speed.
    pub fn ratio(&self) -> f64 {
        self.dipole.norm() / self.monopole
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameEstimate {
    /// Accumulated velocity change; its negation estimates the observer's
    /// initial velocity relative to the background.
    pub beta: Vec3,
    /// Number of sky measurements made.
    pub iterations: usize,
    pub final_dipole_ratio: f64,
    /// Dipole ratio seen at each measurement.
    pub ratio_history: Vec<f64>,
}

impl FrameEstimate {
    /// Estimated observer speed in km/s.
    pub fn speed_km_s(&self) -> f64 {
        self.beta.norm() * SPEED_OF_LIGHT_KM_S
    }
}

/// Observed temperature in direction `n` for observer velocity `beta`.
pub fn doppler_temperature(t_rest: f64, beta: Vec3, n: Vec3) -> f64 {
    t_rest * (1.0 - beta.norm_squared()).sqrt() / (1.0 - n.dot(beta))
}

fn check_observer(beta: Vec3, t_rest: f64, n_samples: usize) -> Result<()> {
    let speed = beta.norm();
    if !beta.is_finite() || speed >= MAX_OBSERVER_SPEED {
        return Err(Error::SpeedOutOfRange {
            speed,
            limit: MAX_OBSERVER_SPEED,
        });
    }
    if !(t_rest > 0.0 && t_rest.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rest temperature must be positive, got {t_rest}"
        )));
    }
    if n_samples < MIN_SKY_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SKY_SAMPLES} sky samples, got {n_samples}"
        )));
    }
    Ok(())
}

/// Synthetic sky seen by an observer moving at `beta`.
///
/// Directions are drawn uniformly and mirrored, so samples come in
/// antipodal pairs (the last one is unpaired when `n_samples` is odd).
/// Gaussian noise of standard deviation `noise_sigma` is added to each
/// temperature.
pub fn synthesize_sky(
    beta: Vec3,
    t_rest: f64,
    n_samples: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<SkySample>> {
    check_observer(beta, t_rest, n_samples)?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be non-negative, got {noise_sigma}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut directions = Vec::with_capacity(n_samples);
    while directions.len() < n_samples {
        let n = random_direction(&mut rng);
        directions.push(n);
        if directions.len() < n_samples {
            directions.push(-n);
        }
    }
    Ok(directions
        .into_iter()
        .map(|direction| {
            let noise: f64 = rng.sample(StandardNormal);
            SkySample {
                direction,
                temperature: doppler_temperature(t_rest, beta, direction) + noise_sigma * noise,
            }
        })
        .collect())
}

/// Least-squares fit of `T(n̂) ≈ monopole + dipole · n̂`.
pub fn fit_dipole(samples: &[SkySample]) -> Result<DipoleFit> {
    if samples.len() < 4 {
        return Err(Error::RankDeficient(format!(
            "{} samples cannot determine a monopole and a 3-component dipole",
            samples.len()
        )));
    }
    let design = DMatrix::from_fn(samples.len(), 4, |i, j| match j {
        0 => 1.0,
        1 => samples[i].direction.x,
        2 => samples[i].direction.y,
        _ => samples[i].direction.z,
    });
    let temperatures = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.temperature));

    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * max_sv)
        .count();
    if rank < 4 {
        return Err(Error::RankDeficient(format!(
            "sample directions give design rank {rank} of 4; they do not span the sphere"
        )));
    }
    let coefficients = svd
        .solve(&temperatures, RANK_TOLERANCE * max_sv)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let residual = &temperatures - &design * &coefficients;
    let residual_rms = (residual.norm_squared() / samples.len() as f64).sqrt();

    let monopole = coefficients[0];
    if !(monopole > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fitted monopole {monopole} is not positive"
        )));
    }
    Ok(DipoleFit {
        monopole,
        dipole: Vec3::new(coefficients[1], coefficients[2], coefficients[3]),
        residual_rms,
    })
}

/// Relativistic velocity addition: the velocity, in the original frame, of
/// something moving at `v` in a frame that itself moves at `u`.
pub fn compose_velocities(u: Vec3, v: Vec3) -> Vec3 {
    let u2 = u.norm_squared();
    if u2 == 0.0 {
        return v;
    }
    let gamma = 1.0 / (1.0 - u2).sqrt();
    let uv = u.dot(v);
    (u + v / gamma + u * (gamma / (1.0 + gamma) * uv)) / (1.0 + uv)
}

/// Iteratively boosts the observer against the measured dipole until the
/// dipole ratio drops below `tol`.
///
/// `initial_beta` is the observer's starting velocity relative to the
/// background; it is used only to synthesize the skies. Each measurement
/// uses seed `seed + k` for the k-th sky.
pub fn find_null_frame(
    initial_beta: Vec3,
    t_rest: f64,
    n_samples: usize,
    noise_sigma: f64,
    tol: f64,
    seed: u64,
) -> Result<FrameEstimate> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    check_observer(initial_beta, t_rest, n_samples)?;

    let mut observer = initial_beta;
    let mut correction = Vec3::ZERO;
    let mut ratio_history = Vec::new();
    for k in 0..MAX_FRAME_ITERATIONS {
        let sky = synthesize_sky(observer, t_rest, n_samples, noise_sigma, seed.wrapping_add(k as u64))?;
        let fit = fit_dipole(&sky)?;
        let ratio = fit.ratio();
        ratio_history.push(ratio);
        if ratio < tol {
            return Ok(FrameEstimate {
                beta: correction,
                iterations: k + 1,
                final_dipole_ratio: ratio,
                ratio_history,
            });
        }
        let kick = fit.dipole * (-1.0 / fit.monopole);
        observer = compose_velocities(observer, kick);
        correction = compose_velocities(correction, kick);
        if observer.norm() >= MAX_OBSERVER_SPEED {
            return Err(Error::SpeedOutOfRange {
                speed: observer.norm(),
                limit: MAX_OBSERVER_SPEED,
            });
        }
    }
    Err(Error::FrameNotFound {
        iterations: MAX_FRAME_ITERATIONS,
        ratio: ratio_history.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const BETA_350: f64 = 350.0 / SPEED_OF_LIGHT_KM_S;

    #[test]
    fn rest_observer_sees_uniform_sky() {
        let sky = synthesize_sky(Vec3::ZERO, 2.7, 100, 0.0, 1).unwrap();
        assert!(sky.iter().all(|s| s.temperature == 2.7));
        let fit = fit_dipole(&sky).unwrap();
        assert_abs_diff_eq!(fit.monopole, 2.7, epsilon = 1e-13);
        assert!(fit.dipole.norm() < 1e-13);
    }

    #[test]
    fn first_order_dipole_matches_speed() {
        for speed in [1e-4, 1e-3, 1e-2] {
            let beta = Vec3::new(0.3, -0.5, 0.8).normalized().unwrap() * speed;
            let dir = beta / speed;
            let t = 2.725;
            let front = doppler_temperature(t, beta, dir);
            let back = doppler_temperature(t, beta, -dir);
            let asym = (front - back) / (2.0 * t);
            // Exactly β/sqrt(1 − β²); the first-order term is β.
            let exact = speed / (1.0 - speed * speed).sqrt();
            assert_abs_diff_eq!(asym, exact, epsilon = 1e-12 * speed);
            if speed <= 1e-3 {
                assert!((asym - speed).abs() <= 1e-6 * speed, "{asym} vs {speed}");
            }
        }
    }

    #[test]
    fn dipole_recovers_350_km_s() {
        let beta = Vec3::X * BETA_350;
        let sky = synthesize_sky(beta, DEFAULT_T_REST, 10_000, 0.0, 4).unwrap();
        let fit = fit_dipole(&sky).unwrap();
        assert!(fit.dipole.angle_to(Vec3::X).to_degrees() < 0.1);
        assert!((fit.ratio() - BETA_350).abs() <= 0.01 * BETA_350);
        // "one part per thousand"
        assert!(fit.ratio() > 1e-3 && fit.ratio() < 1.2e-3);
    }

    #[test]
    fn sky_is_deterministic_and_antipodal() {
        let beta = Vec3::new(1e-3, 2e-3, 0.0);
        let a = synthesize_sky(beta, 2.7, 101, 1e-6, 77).unwrap();
        assert_eq!(a, synthesize_sky(beta, 2.7, 101, 1e-6, 77).unwrap());
        assert_eq!(a.len(), 101);
        for pair in a.chunks_exact(2) {
            assert_eq!(pair[0].direction, -pair[1].direction);
        }
    }

    #[test]
    fn sky_validates_inputs() {
        assert!(synthesize_sky(Vec3::X * 0.1, 2.7, 100, 0.0, 1).is_err());
        assert!(synthesize_sky(Vec3::ZERO, 0.0, 100, 0.0, 1).is_err());
        assert!(synthesize_sky(Vec3::ZERO, 2.7, 11, 0.0, 1).is_err());
        assert!(synthesize_sky(Vec3::ZERO, 2.7, 12, -1.0, 1).is_err());
    }

    #[test]
    fn rank_deficient_geometry_is_reported() {
        let plane: Vec<SkySample> = (0..20)
            .map(|i| {
                let a = i as f64 * 0.3;
                SkySample {
                    direction: Vec3::new(a.cos(), a.sin(), 0.0),
                    temperature: 2.7,
                }
            })
            .collect();
        let err = fit_dipole(&plane).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(ref m) if m.contains("rank 3")), "{err}");
        assert!(matches!(fit_dipole(&plane[..3]), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn velocity_composition() {
        let u = Vec3::X * 0.5;
        let w = compose_velocities(u, Vec3::X * 0.5);
        assert_abs_diff_eq!(w.x, 0.8, epsilon = 1e-15);
        assert_eq!(compose_velocities(Vec3::ZERO, Vec3::Y * 0.3), Vec3::Y * 0.3);
        let back = compose_velocities(Vec3::new(0.01, 0.02, -0.03), Vec3::new(-0.01, -0.02, 0.03));
        assert!(back.norm() < 1e-15);
    }

    #[test]
    fn null_frame_at_rest_is_fixed_point() {
        let est = find_null_frame(Vec3::ZERO, 2.725, 1000, 0.0, 1e-9, 3).unwrap();
        assert_eq!(est.iterations, 1);
        assert!(est.beta.norm() <= 1e-12);
    }

    #[test]
    fn null_frame_recovers_observer_velocity() {
        let true_beta = Vec3::new(0.2, -0.7, 0.4).normalized().unwrap() * BETA_350;
        let est = find_null_frame(true_beta, 2.725, 10_000, 0.0, 1e-9, 21).unwrap();
        let recovered = -est.beta;
        assert!((recovered.norm() - BETA_350).abs() <= 1e-3 * BETA_350);
        assert!(recovered.angle_to(true_beta).to_degrees() <= 0.1);
        assert!(est.final_dipole_ratio < 1e-9);
        for w in est.ratio_history.windows(2) {
            assert!(w[1] <= 0.1 * w[0], "{:?}", est.ratio_history);
        }
    }

    #[test]
    fn null_frame_validates_inputs() {
        assert!(find_null_frame(Vec3::ZERO, 2.7, 100, 0.0, 0.0, 1).is_err());
        assert!(find_null_frame(Vec3::X * 0.2, 2.7, 100, 0.0, 1e-6, 1).is_err());
    }

    #[test]
    fn unreachable_tolerance_reports_non_convergence() {
        let err = find_null_frame(Vec3::X * 1e-3, 2.7, 200, 1e-3, 1e-12, 5).unwrap_err();
        assert!(err.is_non_convergence(), "{err}");
    }
}
