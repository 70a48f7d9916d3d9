//! Superposition data model and group kinematics.
//!
//! A particle is a finite collection of wave components, each travelling at
//! c = 1 and carrying a momentum vector. Every group quantity (momentum,
//! energy, velocity, effective and rest mass) is derived from the component
//! momenta. An external impulse is shared out among the components in
//! proportion to their share of the total energy; integrating that rule is
//! what boosts a superposition.

use crate::error::{Error, Result};
use crate::vector::Vec3;

/// Largest supported group speed for boost targets.
pub const SPEED_CEILING: f64 = 1.0 - 1e-9;

/// Relative floor below which a component magnitude is treated as vanished.
pub const MAGNITUDE_FLOOR: f64 = 1e-15;

/// Negative radicands of `m_e² − P²` down to this fraction of `m_e²` are
/// roundoff and clamp to zero.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

/// Rest masses below this fraction of the effective mass count as massless.
const MASSLESS_FRACTION: f64 = 1e-6;

/// Integration stops once the momentum still to be delivered is below this
/// fraction of the effective mass.
const DELIVERY_THRESHOLD: f64 = 1e-13;

/// A single constant-speed momentum carrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveComponent {
    momentum: Vec3,
}

impl WaveComponent {
    pub fn new(momentum: Vec3) -> Result<Self> {
        Self::validate(momentum).map_err(|reason| Error::InvalidComponent { index: 0, reason })?;
        Ok(WaveComponent { momentum })
    }

    fn validate(momentum: Vec3) -> std::result::Result<(), String> {
        if !momentum.is_finite() {
            return Err(format!("momentum {momentum} is not finite"));
        }
        if momentum.norm() <= 0.0 {
            return Err("momentum magnitude must be strictly positive".into());
        }
        Ok(())
    }

    pub fn momentum(&self) -> Vec3 {
        self.momentum
    }

    pub fn magnitude(&self) -> f64 {
        self.momentum.norm()
    }

    /// Energy equals momentum magnitude for a carrier moving at c.
    pub fn energy(&self) -> f64 {
        self.magnitude()
    }

    /// Unit propagation direction, which is also the component velocity.
    pub fn direction(&self) -> Vec3 {
        self.momentum / self.magnitude()
    }
}

/// The particle model: an ordered, non-empty collection of components.
#[derive(Clone, Debug, PartialEq)]
pub struct Superposition {
    components: Vec<WaveComponent>,
}

impl Superposition {
    pub fn new(components: Vec<WaveComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptySuperposition);
        }
        Ok(Superposition { components })
    }

    /// Builds a superposition from raw momenta, validating each one.
    pub fn from_momenta<I>(momenta: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec3>,
    {
        let components = momenta
            .into_iter()
            .enumerate()
            .map(|(index, p)| {
                WaveComponent::validate(p)
                    .map(|_| WaveComponent { momentum: p })
                    .map_err(|reason| Error::InvalidComponent { index, reason })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[WaveComponent] {
        &self.components
    }

    pub fn momenta(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.components.iter().map(|c| c.momentum)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Group momentum: the vector sum of component momenta.
    pub fn total_momentum(&self) -> Vec3 {
        self.momenta().sum()
    }

    /// Total energy: the sum of component momentum magnitudes.
    pub fn total_energy(&self) -> f64 {
        self.components.iter().map(WaveComponent::magnitude).sum()
    }

    /// Momentum-weighted mean of the component unit velocities.
    pub fn group_velocity(&self) -> Vec3 {
        let weighted: Vec3 = self
            .components
            .iter()
            .map(|c| c.magnitude() * c.direction())
            .sum();
        weighted / self.total_energy()
    }

    /// Effective mass, `P = m_e V`; identical to the total energy with c = 1.
    pub fn effective_mass(&self) -> f64 {
        self.total_energy()
    }

    /// Invariant mass `sqrt(m_e² − |P|²)`.
    pub fn rest_mass(&self) -> Result<f64> {
        rest_mass_of(self.effective_mass(), self.total_momentum())
    }

    /// Returns a copy with every component momentum multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_momenta(self.momenta().map(|p| p * factor))
    }

    /// Concatenates the components of several superpositions.
    pub fn combine<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Superposition>,
    {
        let components: Vec<WaveComponent> = parts
            .into_iter()
            .flat_map(|s| s.components.iter().copied())
            .collect();
        Self::new(components)
    }

    /// Applies one impulse `dp`, shared out as `dp · p_i / m_e`.
    ///
    /// The shares sum to one, so the total momentum grows by exactly `dp`
    /// up to roundoff. A step that would drive a component to zero
    /// magnitude is rejected.
    pub fn apportion_step(&self, dp: Vec3) -> Result<Superposition> {
        if !dp.is_finite() {
            return Err(Error::InvalidArgument(format!("impulse {dp} is not finite")));
        }
        let effective_mass = self.effective_mass();
        let momenta: Vec<Vec3> = self
            .components
            .iter()
            .map(|c| c.momentum + dp * (c.magnitude() / effective_mass))
            .collect();
        check_floor(&momenta, effective_mass)?;
        Ok(Superposition {
            components: momenta
                .into_iter()
                .map(|momentum| WaveComponent { momentum })
                .collect(),
        })
    }

    /// Boosts to group velocity `target` using the default step budget.
    pub fn boost(&self, target: Vec3, tolerance: f64) -> Result<BoostResult> {
        self.boost_with(target, tolerance, &BoostOptions::default())
    }

    /// Integrates the apportionment rule until the group velocity reaches
    /// `target`.
    ///
    /// The required total impulse comes from `P = γ m₀ V` with the initial
    /// rest mass. It is delivered in sub-steps no larger than
    /// `options.max_step_fraction · m_e`. Each sub-step is a classical
    /// Runge-Kutta step of `dp_i/ds = û p_i / m_e`. Every stage moves each
    /// component along the impulse direction û, so one sub-step adds exactly
    /// the sub-step impulse to the total momentum.
    pub fn boost_with(
        &self,
        target: Vec3,
        tolerance: f64,
        options: &BoostOptions,
    ) -> Result<BoostResult> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive and finite, got {tolerance}"
            )));
        }
        if !(options.max_step_fraction > 0.0 && options.max_step_fraction.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "max_step_fraction must be positive, got {}",
                options.max_step_fraction
            )));
        }
        let speed = target.norm();
        if !target.is_finite() || speed >= SPEED_CEILING {
            return Err(Error::SpeedOutOfRange {
                speed,
                limit: SPEED_CEILING,
            });
        }
        let rest_mass_initial = self.rest_mass()?;
        if rest_mass_initial <= MASSLESS_FRACTION * self.effective_mass() {
            return Err(Error::Massless {
                rest_mass: rest_mass_initial,
            });
        }

        let gamma = 1.0 / (1.0 - speed * speed).sqrt();
        let target_momentum = target * (gamma * rest_mass_initial);

        let mut integrator = Rk4Apportion::new(self.momenta().collect());
        let mut steps = 0usize;
        let mut max_momentum_residual = 0.0f64;
        loop {
            let momentum = integrator.total_momentum();
            let effective_mass = integrator.effective_mass();
            let remaining = target_momentum - momentum;
            let remaining_norm = remaining.norm();
            if remaining_norm <= DELIVERY_THRESHOLD * effective_mass {
                break;
            }
            if steps >= options.max_steps {
                let final_state = integrator.into_superposition();
                return Err(non_convergence(
                    &final_state,
                    steps,
                    target,
                    rest_mass_initial,
                ));
            }
            let direction = remaining / remaining_norm;
            let mut step = remaining_norm.min(options.max_step_fraction * effective_mass);
            loop {
                match integrator.step(direction * step) {
                    Ok(()) => break,
                    Err(err) => {
                        step *= 0.5;
                        if step <= DELIVERY_THRESHOLD * effective_mass {
                            return Err(err);
                        }
                    }
                }
            }
            let delivered = integrator.total_momentum();
            let residual = (delivered - (momentum + direction * step)).norm();
            max_momentum_residual = max_momentum_residual.max(residual);
            steps += 1;
        }

        let final_state = integrator.into_superposition();
        let rest_mass_final = final_state.rest_mass()?;
        let effective_mass = final_state.effective_mass();
        let velocity_error = final_state.group_velocity().distance(target);
        let momentum_residual = (final_state.total_momentum() - target_momentum).norm();
        let drift = (rest_mass_final - rest_mass_initial).abs() / rest_mass_initial;

        if velocity_error > tolerance
            || drift > 10.0 * tolerance
            || momentum_residual > tolerance * effective_mass
        {
            return Err(Error::BoostNonConvergence {
                steps,
                velocity_error,
                rest_mass_drift: drift,
                momentum_residual,
            });
        }

        Ok(BoostResult {
            final_state,
            steps_taken: steps,
            rest_mass_initial,
            rest_mass_final,
            max_momentum_residual,
            velocity_error,
            momentum_residual,
        })
    }
}

/// Step budget and step-size ceiling for [`Superposition::boost_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoostOptions {
    /// Upper bound on a sub-step impulse as a fraction of the current `m_e`.
    pub max_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for BoostOptions {
    fn default() -> Self {
        BoostOptions {
            max_step_fraction: 1e-4,
            max_steps: 1_000_000,
        }
    }
}

/// Outcome of a successful boost.
#[derive(Clone, Debug)]
pub struct BoostResult {
    pub final_state: Superposition,
    pub steps_taken: usize,
    pub rest_mass_initial: f64,
    pub rest_mass_final: f64,
    /// Largest per-step deviation of `ΔP` from the requested impulse.
    pub max_momentum_residual: f64,
    /// `|V_final − V_target|`.
    pub velocity_error: f64,
    /// `|P_final − γ m₀ V_target|`.
    pub momentum_residual: f64,
}

impl BoostResult {
    /// Relative rest-mass drift `|m₀_final − m₀_initial| / m₀_initial`.
    pub fn rest_mass_drift(&self) -> f64 {
        (self.rest_mass_final - self.rest_mass_initial).abs() / self.rest_mass_initial
    }
}

pub(crate) fn rest_mass_of(effective_mass: f64, momentum: Vec3) -> Result<f64> {
    let scale = effective_mass * effective_mass;
    // Factored so a lone component (|P| = m_e exactly) gives exactly zero.
    let p = momentum.norm();
    let radicand = (effective_mass - p) * (effective_mass + p);
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if -radicand <= RADICAND_TOLERANCE * scale {
        Ok(0.0)
    } else {
        Err(Error::CorruptedState {
            radicand,
            effective_mass,
        })
    }
}

fn check_floor(momenta: &[Vec3], effective_mass: f64) -> Result<()> {
    let floor = MAGNITUDE_FLOOR * effective_mass;
    for (index, p) in momenta.iter().enumerate() {
        let magnitude = p.norm();
        if !(magnitude >= floor) {
            return Err(Error::StepRejected {
                index,
                magnitude,
                floor,
            });
        }
    }
    Ok(())
}

fn non_convergence(
    state: &Superposition,
    steps: usize,
    target: Vec3,
    rest_mass_initial: f64,
) -> Error {
    let speed = target.norm();
    let gamma = 1.0 / (1.0 - speed * speed).sqrt();
    let rest_mass_drift = state
        .rest_mass()
        .map(|m| (m - rest_mass_initial).abs() / rest_mass_initial)
        .unwrap_or(f64::NAN);
    Error::BoostNonConvergence {
        steps,
        velocity_error: state.group_velocity().distance(target),
        rest_mass_drift,
        momentum_residual: (state.total_momentum() - target * (gamma * rest_mass_initial)).norm(),
    }
}

/// Runge-Kutta integrator for the apportionment flow along a fixed impulse.
///
/// For an impulse `dp` every stage derivative of component `i` is
/// `dp · w_i` with `w_i = |p_i| / Σ|p_j|`, so a stage state is
/// `p_i + c_i dp` and the whole step reduces to per-component scalar
/// weights. Stage magnitudes come from
/// `|p + c dp|² = |p|² + 2c (p·dp) + c² |dp|²`. The shift `c |dp|` never
/// exceeds `|p|` times the step fraction, so the expansion does not cancel.
struct Rk4Apportion {
    momenta: Vec<Vec3>,
    magnitudes: Vec<f64>,
    projections: Vec<f64>,
    trial: Vec<Vec3>,
    trial_magnitudes: Vec<f64>,
    weights: [Vec<f64>; 4],
}

impl Rk4Apportion {
    fn new(momenta: Vec<Vec3>) -> Self {
        let n = momenta.len();
        Rk4Apportion {
            magnitudes: momenta.iter().map(|p| p.norm()).collect(),
            projections: vec![0.0; n],
            trial: vec![Vec3::ZERO; n],
            trial_magnitudes: vec![0.0; n],
            weights: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            momenta,
        }
    }

    fn total_momentum(&self) -> Vec3 {
        self.momenta.iter().sum()
    }

    fn effective_mass(&self) -> f64 {
        self.magnitudes.iter().sum()
    }

    /// Energy shares of the stage state `p_i + offset · previous_i · dp`.
    fn stage(&mut self, dp_squared: f64, offset: f64, previous: usize, out: usize) {
        let (before, after) = self.weights.split_at_mut(out);
        let prev = &before[previous];
        let w = &mut after[0];
        let mut total = 0.0;
        for i in 0..w.len() {
            let c = offset * prev[i];
            let squared = self.magnitudes[i] * self.magnitudes[i]
                + c * (2.0 * self.projections[i] + c * dp_squared);
            w[i] = squared.sqrt();
            total += w[i];
        }
        for wi in w.iter_mut() {
            *wi /= total;
        }
    }

    fn step(&mut self, dp: Vec3) -> Result<()> {
        let effective_mass = self.effective_mass();
        for i in 0..self.momenta.len() {
            self.projections[i] = self.momenta[i].dot(dp);
            self.weights[0][i] = self.magnitudes[i] / effective_mass;
        }
        let dp_squared = dp.norm_squared();
        self.stage(dp_squared, 0.5, 0, 1);
        self.stage(dp_squared, 0.5, 1, 2);
        self.stage(dp_squared, 1.0, 2, 3);
        let [w1, w2, w3, w4] = &self.weights;
        let mut trial_mass = 0.0;
        for i in 0..self.momenta.len() {
            let share = (w1[i] + 2.0 * w2[i] + 2.0 * w3[i] + w4[i]) / 6.0;
            let p = self.momenta[i] + dp * share;
            self.trial[i] = p;
            self.trial_magnitudes[i] = p.norm_squared().sqrt();
            trial_mass += self.trial_magnitudes[i];
        }
        let floor = MAGNITUDE_FLOOR * trial_mass;
        if let Some(index) = self.trial_magnitudes.iter().position(|&m| !(m >= floor)) {
            return Err(Error::StepRejected {
                index,
                magnitude: self.trial_magnitudes[index],
                floor,
            });
        }
        std::mem::swap(&mut self.momenta, &mut self.trial);
        std::mem::swap(&mut self.magnitudes, &mut self.trial_magnitudes);
        Ok(())
    }

    fn into_superposition(self) -> Superposition {
        Superposition {
            components: self
                .momenta
                .into_iter()
                .map(|momentum| WaveComponent { momentum })
                .collect(),
        }
    }
}
