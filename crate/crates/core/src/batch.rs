//! Batch evaluation over independent inputs.
//!
//! [`map`] fans out over rayon's pool when the `parallel` feature is on and
//! falls back to a plain iterator otherwise. [`map_seq`] is always available
//! so both paths can be benchmarked from the same build.

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::quat::{Mat3, Quat, Vec3};

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_par(items, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_seq(items, f)
}

/// `n` uniformly distributed rotation matrices from a fixed seed.
pub fn random_rotations(n: usize, seed: u64) -> Vec<Mat3> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| *Quat::random(&mut rng).to_rotation().expect("unit quaternion").matrix())
        .collect()
}

/// `n` vectors with entries uniform in `[-scale, scale]` from a fixed seed.
pub fn random_vectors(n: usize, scale: f64, seed: u64) -> Vec<Vec3> {
    use rand::Rng;
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec3::from_fn(|_, _| rng.random_range(-scale..=scale)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x * x + 1;
        assert_eq!(map(&items, f), map_seq(&items, f));
    }

    #[test]
    fn random_samples_are_reproducible() {
        assert_eq!(random_rotations(5, 3), random_rotations(5, 3));
        assert_ne!(random_rotations(5, 3), random_rotations(5, 4));
        assert!(random_vectors(100, 2.0, 1).iter().all(|v| v.amax() <= 2.0));
    }
}
