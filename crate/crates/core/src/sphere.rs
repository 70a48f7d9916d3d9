//! Seeded generation of directions uniform on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vector::Vec3;

/// Generator used for every seeded ensemble. ChaCha output is fixed by its
/// algorithm, so a seed reproduces the same stream on every platform.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction from three normalized standard normal deviates.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        // Rejects the measure-zero origin and near-underflow draws.
        if let Some(u) = (v.norm() > 1e-150).then(|| v.normalized()).flatten() {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_reproducible() {
        let mut a = seeded_rng(11);
        let mut b = seeded_rng(11);
        for _ in 0..1000 {
            let (u, v) = (random_direction(&mut a), random_direction(&mut b));
            assert_eq!(u, v);
            assert!((u.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_mean_is_near_origin() {
        let mut rng = seeded_rng(3);
        let n = 20_000;
        let mean: Vec3 = (0..n).map(|_| random_direction(&mut rng)).sum::<Vec3>() / n as f64;
        // Each coordinate has variance 1/3; 5 sigma bound.
        assert!(mean.norm() < 5.0 * (1.0 / (3.0 * n as f64)).sqrt() * 3f64.sqrt());
    }
}
