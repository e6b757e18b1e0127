//! Seeded random points.
//!
//! All randomness goes through ChaCha8 seeded from a `u64`
//! (`ChaCha8Rng::seed_from_u64`), which produces the same stream on every
//! platform. Directions are normalized standard-normal vectors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, dimension: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A point at exactly `distance` from `center` in a uniform direction.
pub fn on_sphere<R: Rng + ?Sized>(rng: &mut R, center: &[f64], distance: f64) -> Vec<f64> {
    unit_direction(rng, center.len())
        .into_iter()
        .zip(center)
        .map(|(u, c)| c + distance * u)
        .collect()
}

/// A point uniformly distributed in the ball of `radius` around `center`.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let u: f64 = rng.gen();
    let r = radius * u.powf(1.0 / center.len() as f64);
    on_sphere(rng, center, r)
}

/// `n` points uniformly distributed in the ball, drawn from `seed`.
pub fn ball_samples(seed: u64, center: &[f64], radius: f64, n: usize) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| in_ball(&mut rng, center, radius)).collect()
}
