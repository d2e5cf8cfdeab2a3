use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{rat, Rational};
use crate::error::{Error, Result};
use crate::fermion::{CliffordFactor, CliffordSpec, ModeWindow};

/// Coefficients random factors are drawn from.
pub fn coefficient_pool() -> Vec<Rational> {
    [(1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1), (-2, 1), (1, 3), (-1, 3)]
        .iter()
        .map(|&(n, d)| rat(n, d))
        .collect()
}

/// `count` factors with components, modes and coefficients drawn uniformly;
/// deterministic in `seed`.
pub fn generate_random_clifford(components: usize, window: ModeWindow, count: usize, seed: u64) -> Result<CliffordSpec> {
    if count == 0 {
        return Ok(CliffordSpec::identity());
    }
    if components == 0 {
        return Err(Error::Config("random factors need at least one component".into()));
    }
    if components == 1 && window.width() < 2 {
        return Err(Error::Config(format!("window {window} has no room for a two-mode factor")));
    }
    let pool = coefficient_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::with_capacity(count);
    while factors.len() < count {
        let alpha = rng.gen_range(1..=components);
        let beta = rng.gen_range(1..=components);
        let i = rng.gen_range(window.lo..window.hi);
        let j = rng.gen_range(window.lo..window.hi);
        if (alpha, i) == (beta, j) {
            continue;
        }
        let c = pool.choose(&mut rng).expect("nonempty pool").clone();
        factors.push(CliffordFactor::new(alpha, i, beta, j, c));
    }
    Ok(CliffordSpec::new(factors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> ModeWindow {
        ModeWindow::new(-3, 3).unwrap()
    }

    #[test]
    fn empty_and_deterministic() {
        assert!(generate_random_clifford(2, w(), 0, 7).unwrap().is_identity());
        let a = generate_random_clifford(2, w(), 3, 42).unwrap();
        assert_eq!(a, generate_random_clifford(2, w(), 3, 42).unwrap());
        assert_ne!(a, generate_random_clifford(2, w(), 3, 43).unwrap());
    }

    #[test]
    fn factors_are_valid() {
        let pool = coefficient_pool();
        for seed in 0..50 {
            let g = generate_random_clifford(3, w(), 3, seed).unwrap();
            assert_eq!(g.factors.len(), 3);
            g.validate(3, &w()).unwrap();
            assert!(g.factors.iter().all(|f| pool.contains(&f.c)));
        }
    }
}
