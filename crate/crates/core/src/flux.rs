//! Momentum-flux distribution of a boosted superposition.
//!
//! A rest particle is modelled as balanced pairs: two components of equal
//! magnitude and opposite direction. Boosted along +x, each pair becomes
//! `a = c + d`, `b = c − d` about a common centre `c = γV a₀ x̂`. The offsets `d`
//! trace an ellipsoid of revolution: semi-axis `γ a₀` along the motion and
//! `a₀` across it. In polar form about the centre this is
//! `r(Θ) = 1/sqrt(1 − V² cos²Θ)`.

use crate::error::{Error, Result};
use crate::kinematics::{Superposition, SPEED_CEILING};
use crate::sphere::{random_direction, seeded_rng};
use crate::vector::Vec3;

/// Tolerance for the boosts run by [`ellipsoid_profile`].
const PROFILE_BOOST_TOLERANCE: f64 = 1e-10;

/// Largest group speed accepted as "at rest" by [`ellipsoid_profile`].
const REST_SPEED_LIMIT: f64 = 1e-9;

fn check_speed(v: f64) -> Result<()> {
    if (0.0..=SPEED_CEILING).contains(&v) {
        Ok(())
    } else {
        Err(Error::SpeedOutOfRange {
            speed: v,
            limit: SPEED_CEILING,
        })
    }
}

fn lorentz_gamma(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

/// Expected flux radius in direction `theta` from the boost axis.
pub fn flux_radius(v: f64, theta: f64) -> f64 {
    let c = theta.cos();
    1.0 / (1.0 - v * v * c * c).sqrt()
}

/// Flux radius with charge apportioned by energy share: one more factor of
/// `1/γ`, giving `sqrt(1 − V²) / sqrt(1 − V² cos²Θ)`.
pub fn em_radius(v: f64, theta: f64) -> f64 {
    flux_radius(v, theta) / lorentz_gamma(v)
}

/// Two equal and opposite components.
///
/// `orientation` is the direction of the offset `d = (a − b)/2` in the
/// boosted frame. Its angle from +x is the `Θ` of the pair geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalancedPair {
    orientation: Vec3,
    rest_magnitude: f64,
}

impl BalancedPair {
    pub fn new(orientation: Vec3, rest_magnitude: f64) -> Result<Self> {
        let orientation = orientation
            .normalized()
            .filter(|o| o.is_finite())
            .ok_or_else(|| Error::InvalidArgument("pair orientation must be non-zero".into()))?;
        if !(rest_magnitude > 0.0 && rest_magnitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pair rest magnitude must be positive, got {rest_magnitude}"
            )));
        }
        Ok(BalancedPair {
            orientation,
            rest_magnitude,
        })
    }

    /// Pair in the x-y plane at angle `theta` from +x.
    pub fn in_plane(theta: f64, rest_magnitude: f64) -> Result<Self> {
        Self::new(Vec3::new(theta.cos(), theta.sin(), 0.0), rest_magnitude)
    }

    pub fn orientation(&self) -> Vec3 {
        self.orientation
    }

    pub fn rest_magnitude(&self) -> f64 {
        self.rest_magnitude
    }

    /// Angle `Θ` between the orientation and the boost axis.
    pub fn theta(&self) -> f64 {
        Vec3::X.angle_to(self.orientation)
    }

    /// The rest-frame pair that a +x boost to `v` carries onto this
    /// orientation.
    ///
    /// The apportionment rule only adds momentum along x, so the transverse
    /// part of the offset is unchanged by the boost and the axial part grows
    /// by γ. The rest offset is therefore `r (n_x/γ, n_y, n_z)` with `r` the
    /// flux radius at `Θ`, which has unit length.
    pub fn rest_components(&self, v: f64) -> Result<Superposition> {
        check_speed(v)?;
        let r = flux_radius(v, self.theta());
        let n = self.orientation;
        let offset = Vec3::new(n.x / lorentz_gamma(v), n.y, n.z) * r;
        let offset = offset.normalized().unwrap_or(n) * self.rest_magnitude;
        Superposition::from_momenta([offset, -offset])
    }
}

/// Boosted magnitudes `a`, `b` and offset radius `r` of a balanced pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTransform {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

/// Closed-form boost of a balanced pair to speed `v` along +x.
///
/// Solves `a + b = 2γ`, `a² = r² + (γV)² + 2γVr cosΘ` and
/// `b² = r² + (γV)² − 2γVr cosΘ` for unit rest magnitude, then scales by
/// the pair's rest magnitude.
pub fn pair_boost_closed_form(pair: &BalancedPair, v: f64) -> Result<PairTransform> {
    check_speed(v)?;
    let cos = pair.orientation.x;
    let gv = lorentz_gamma(v) * v;
    let r = flux_radius(v, pair.theta());
    let common = r * r + gv * gv;
    let cross = 2.0 * gv * r * cos;
    let a = (common + cross).sqrt();
    let b = (common - cross).max(0.0).sqrt();
    let scale = pair.rest_magnitude;
    Ok(PairTransform {
        a: a * scale,
        b: b * scale,
        r: r * scale,
    })
}

/// A rest particle of `n_pairs` balanced pairs with uniformly random
/// orientations.
///
/// Components are stored pairwise (`p, −p, …`) so the total momentum is
/// exactly zero.
pub fn make_isotropic_rest(n_pairs: usize, magnitude: f64, seed: u64) -> Result<Superposition> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "magnitude must be positive, got {magnitude}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let momenta = (0..n_pairs).flat_map(|_| {
        let p = random_direction(&mut rng) * magnitude;
        [p, -p]
    });
    Superposition::from_momenta(momenta.collect::<Vec<_>>())
}

/// Empirical flux radius at one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxSample {
    /// Centroid angle of the offsets in the bin, radians from +x.
    pub theta: f64,
    /// Mean offset radius in the bin, in units of the rest magnitude.
    pub r: f64,
    /// `r / γ`, the field-compression radius.
    pub r_em: f64,
}

/// One equal-solid-angle bin, `cos Θ ∈ [cos_lo, cos_hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxBin {
    pub cos_lo: f64,
    pub cos_hi: f64,
    pub count: usize,
    /// `None` when no offset fell in the bin.
    pub sample: Option<FluxSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluxProfile {
    pub speed: f64,
    pub gamma: f64,
    /// Mean pair centre, in units of the rest magnitude. Equals `γV x̂`.
    pub center: Vec3,
    pub bins: Vec<FluxBin>,
}

impl FluxProfile {
    pub fn samples(&self) -> impl Iterator<Item = &FluxSample> {
        self.bins.iter().filter_map(|b| b.sample.as_ref())
    }

    /// Largest relative deviation of a bin from [`flux_radius`] at its angle.
    pub fn max_relative_error(&self) -> f64 {
        self.samples()
            .map(|s| (s.r - flux_radius(self.speed, s.theta)).abs() / s.r)
            .fold(0.0, f64::max)
    }

    /// Axis-aligned ellipse through the profile, centred on the pair centre.
    pub fn fit_ellipse(&self) -> Result<EllipseFit> {
        let center = (self.center.x, 0.0);
        let points: Vec<(f64, f64)> = self
            .samples()
            .map(|s| (center.0 + s.r * s.theta.cos(), s.r * s.theta.sin()))
            .collect();
        fit_axial_ellipse(&points, center)
    }
}

/// Boosts a rest ensemble of balanced pairs to `v` along +x and bins the
/// pair offsets by angle.
///
/// `s_rest` must be at rest and hold consecutive balanced pairs, the layout
/// [`make_isotropic_rest`] produces. Each pair contributes both offsets `±d`
/// about its centre, normalized by the pair's rest magnitude. Bins are equal
/// in `cos Θ`.
pub fn ellipsoid_profile(s_rest: &Superposition, v: f64, n_bins: usize) -> Result<FluxProfile> {
    check_speed(v)?;
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be at least 1".into()));
    }
    let rest_speed = s_rest.group_velocity().norm();
    if rest_speed > REST_SPEED_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "ensemble is not at rest (group speed {rest_speed:e})"
        )));
    }
    let rest: Vec<Vec3> = s_rest.momenta().collect();
    if rest.len() % 2 != 0 {
        return Err(Error::InvalidArgument(
            "ensemble must consist of consecutive balanced pairs".into(),
        ));
    }
    for (k, pair) in rest.chunks_exact(2).enumerate() {
        let scale = pair[0].norm() + pair[1].norm();
        if (pair[0] + pair[1]).norm() > 1e-9 * scale {
            return Err(Error::InvalidArgument(format!(
                "components {} and {} are not a balanced pair",
                2 * k,
                2 * k + 1
            )));
        }
    }

    let boosted = s_rest.boost(Vec3::X * v, PROFILE_BOOST_TOLERANCE)?;
    let moved: Vec<Vec3> = boosted.final_state.momenta().collect();

    let mut counts = vec![0usize; n_bins];
    let mut sum_r = vec![0.0; n_bins];
    let mut sum_cos = vec![0.0; n_bins];
    let mut center = Vec3::ZERO;
    let n_pairs = rest.len() / 2;
    for (before, after) in rest.chunks_exact(2).zip(moved.chunks_exact(2)) {
        let rest_magnitude = 0.5 * (before[0].norm() + before[1].norm());
        let mid = (after[0] + after[1]) * 0.5;
        let offset = (after[0] - after[1]) * (0.5 / rest_magnitude);
        center += mid / rest_magnitude;
        let r = offset.norm();
        for cos in [offset.x / r, -offset.x / r] {
            let bin = (((cos + 1.0) * 0.5 * n_bins as f64) as usize).min(n_bins - 1);
            counts[bin] += 1;
            sum_r[bin] += r;
            sum_cos[bin] += cos;
        }
    }

    let gamma = lorentz_gamma(v);
    let width = 2.0 / n_bins as f64;
    let bins = (0..n_bins)
        .map(|i| {
            let sample = (counts[i] > 0).then(|| {
                let n = counts[i] as f64;
                let r = sum_r[i] / n;
                FluxSample {
                    theta: (sum_cos[i] / n).clamp(-1.0, 1.0).acos(),
                    r,
                    r_em: r / gamma,
                }
            });
            FluxBin {
                cos_lo: -1.0 + i as f64 * width,
                cos_hi: -1.0 + (i + 1) as f64 * width,
                count: counts[i],
                sample,
            }
        })
        .collect();

    Ok(FluxProfile {
        speed: v,
        gamma,
        center: center / n_pairs as f64,
        bins,
    })
}

/// Ellipse `(x − cx)²/A² + (y − cy)²/B² = 1` with axes along x and y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseFit {
    /// Semi-axis along the boost axis.
    pub semi_axis_axial: f64,
    pub semi_axis_transverse: f64,
    pub eccentricity: f64,
}

/// Linear least-squares fit of `u (x−cx)² + w (y−cy)² = 1` with the centre
/// held fixed.
pub fn fit_axial_ellipse(points: &[(f64, f64)], center: (f64, f64)) -> Result<EllipseFit> {
    let (mut sxx, mut sxy, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx2, dy2) = ((x - center.0).powi(2), (y - center.1).powi(2));
        sxx += dx2 * dx2;
        sxy += dx2 * dy2;
        syy += dy2 * dy2;
        sx += dx2;
        sy += dy2;
    }
    let det = sxx * syy - sxy * sxy;
    if points.len() < 2 || !(det.abs() > 1e-12 * (sxx * syy).max(f64::MIN_POSITIVE)) {
        return Err(Error::RankDeficient(format!(
            "{} profile points do not constrain both ellipse axes",
            points.len()
        )));
    }
    let u = (sx * syy - sy * sxy) / det;
    let w = (sy * sxx - sx * sxy) / det;
    if !(u > 0.0 && w > 0.0) {
        return Err(Error::RankDeficient(
            "profile points do not lie on an ellipse about the centre".into(),
        ));
    }
    let (axial, transverse) = (1.0 / u.sqrt(), 1.0 / w.sqrt());
    let (major, minor) = if axial >= transverse {
        (axial, transverse)
    } else {
        (transverse, axial)
    };
    Ok(EllipseFit {
        semi_axis_axial: axial,
        semi_axis_transverse: transverse,
        eccentricity: (1.0 - (minor / major).powi(2)).max(0.0).sqrt(),
    })
}

/// Shares a charge among components in proportion to energy, `q_i = Q p_i / m_e`.
pub fn apportion_charge(s: &Superposition, charge: f64) -> Vec<f64> {
    let effective_mass = s.effective_mass();
    s.components()
        .iter()
        .map(|c| charge * c.magnitude() / effective_mass)
        .collect()
}
