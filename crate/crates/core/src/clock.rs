//! Internal motion of components relative to the group, and the clock rate
//! it implies.

use crate::error::{Error, Result};
use crate::kinematics::{Superposition, WaveComponent, SPEED_CEILING};
use crate::vector::Vec3;

/// Tolerance used for the boosts inside [`dilation_sweep`].
const SWEEP_TOLERANCE: f64 = 1e-10;

/// Group speed, internal speed and their residual against `sqrt(1 − V²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockReport {
    pub speed: f64,
    pub zitter_speed: f64,
    pub gamma: f64,
    pub identity_residual: f64,
}

/// Velocity of a component relative to the group, `θ̂ − V`.
pub fn internal_velocity(component: &WaveComponent, group_velocity: Vec3) -> Vec3 {
    component.direction() - group_velocity
}

/// Momentum-weighted RMS of the internal velocities.
///
/// Computed from the internal velocities themselves; the closed form
/// `sqrt(1 − V²)` enters only through the reported residual.
pub fn zitter_speed(s: &Superposition) -> ClockReport {
    let v = s.group_velocity();
    let effective_mass = s.effective_mass();
    let weighted: f64 = s
        .components()
        .iter()
        .map(|c| c.magnitude() * internal_velocity(c, v).norm_squared())
        .sum();
    let zitter = (weighted / effective_mass).sqrt();
    let speed = v.norm();
    ClockReport {
        speed,
        zitter_speed: zitter,
        gamma: 1.0 / (1.0 - speed * speed).sqrt(),
        identity_residual: (zitter - dirac_zitter_scale(speed)).abs(),
    }
}

/// Boosts a fresh copy of `s` to each speed along +x and reports its clock.
pub fn dilation_sweep(s: &Superposition, speeds: &[f64]) -> Result<Vec<ClockReport>> {
    speeds
        .iter()
        .map(|&speed| {
            if !(0.0..SPEED_CEILING).contains(&speed) {
                return Err(Error::SpeedOutOfRange {
                    speed,
                    limit: SPEED_CEILING,
                });
            }
            let boosted = s.boost(Vec3::X * speed, SWEEP_TOLERANCE)?;
            Ok(zitter_speed(&boosted.final_state))
        })
        .collect()
}

/// Scaling of the Dirac zitterbewegung with group speed, `sqrt(1 − V²)`.
pub fn dirac_zitter_scale(group_speed: f64) -> f64 {
    (1.0 - group_speed * group_speed).max(0.0).sqrt()
}
