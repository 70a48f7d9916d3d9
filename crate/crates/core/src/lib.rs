//! Particles as superpositions of momentum-carrying waves that all travel at
//! the speed of light.
//!
//! The crate derives group kinematics from the component momenta
//! ([`kinematics`]), the internal clock rate ([`clock`]), and the
//! momentum-flux ellipsoids of a boosted particle ([`flux`]). It also
//! simulates finding the frame in which the background radiation has no
//! dipole ([`mbr`]). Natural units are used throughout: c = ħ = 1.

pub mod checks;
pub mod cli;
pub mod clock;
pub mod error;
pub mod flux;
pub mod kinematics;
pub mod mbr;
pub mod sphere;
pub mod textio;
pub mod vector;

pub use clock::{dilation_sweep, dirac_zitter_scale, internal_velocity, zitter_speed, ClockReport};
pub use error::{Error, Result};
pub use flux::{
    apportion_charge, ellipsoid_profile, em_radius, flux_radius, make_isotropic_rest,
    pair_boost_closed_form, BalancedPair, EllipseFit, FluxBin, FluxProfile, FluxSample,
    PairTransform,
};
pub use kinematics::{BoostOptions, BoostResult, Superposition, WaveComponent, SPEED_CEILING};
pub use mbr::{
    compose_velocities, find_null_frame, fit_dipole, synthesize_sky, DipoleFit, FrameEstimate,
    SkySample,
};
pub use vector::Vec3;
