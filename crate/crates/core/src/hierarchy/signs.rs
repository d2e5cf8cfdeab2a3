use std::collections::BTreeSet;

use crate::fermion::ChargeVector;

/// `eps_{alpha beta}(p)` for a charge vector:
/// `(-1)^(p_{alpha+1} + ... + p_beta)` if `alpha < beta`, `1` on the
/// diagonal, `-(-1)^(p_{beta+1} + ... + p_alpha)` if `alpha > beta`.
pub fn sign_eps(alpha: usize, beta: usize, p: &ChargeVector) -> i64 {
    assert!(
        alpha >= 1 && beta >= 1 && alpha.max(beta) <= p.0.len(),
        "component pair ({alpha},{beta}) outside 1..={}",
        p.0.len()
    );
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let parity: i64 = p.0[lo..hi].iter().sum();
    let base = if parity.rem_euclid(2) == 0 { 1 } else { -1 };
    match alpha.cmp(&beta) {
        std::cmp::Ordering::Less => base,
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Greater => -base,
    }
}

/// Matrix-reduction sign `eps_{alpha beta}(p)` with `p_gamma = p`.
pub fn sign_eps_uniform(alpha: usize, beta: usize, p: i64) -> i64 {
    let base = if (p * (alpha as i64 - beta as i64)).rem_euclid(2) == 0 { 1 } else { -1 };
    match alpha.cmp(&beta) {
        std::cmp::Ordering::Less => base,
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Greater => -base,
    }
}

/// The signs used by the hierarchy layer, with optional deliberate flips
/// for negative-control runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignTable {
    flips: BTreeSet<(usize, usize, i64)>,
}

impl SignTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Flips `eps_{alpha beta}(p)`.
    pub fn with_flip(mut self, alpha: usize, beta: usize, p: i64) -> Self {
        self.flips.insert((alpha, beta, p));
        self
    }

    pub fn is_corrupted(&self) -> bool {
        !self.flips.is_empty()
    }

    pub fn eps(&self, alpha: usize, beta: usize, p: i64) -> i64 {
        let e = sign_eps_uniform(alpha, beta, p);
        if self.flips.contains(&(alpha, beta, p)) {
            -e
        } else {
            e
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let p = ChargeVector(vec![1, 2, 3]);
        assert_eq!(sign_eps(1, 3, &p), -1);
        assert_eq!(sign_eps(3, 1, &p), 1);
        assert_eq!(sign_eps(2, 2, &p), 1);
        assert_eq!(sign_eps(1, 2, &p), 1);
        assert_eq!(sign_eps(2, 1, &p), -1);
        let t = SignTable::new().with_flip(1, 2, 0);
        assert_eq!(t.eps(1, 2, 0), -1);
        assert_eq!(t.eps(1, 2, 1), -1);
        assert_eq!(t.eps(2, 1, 0), -1);
        assert!(t.is_corrupted());
    }

    proptest! {
        #[test]
        fn uniform_matches_vector_form(a in 1usize..=4, b in 1usize..=4, p in -6i64..=6) {
            prop_assert_eq!(sign_eps_uniform(a, b, p), sign_eps(a, b, &ChargeVector::uniform(4, p)));
        }

        #[test]
        fn diagonal_is_one_and_parity_only(a in 1usize..=4, b in 1usize..=4, p in prop::collection::vec(-6i64..=6, 4), flip in 0usize..4) {
            prop_assert_eq!(sign_eps(a, a, &ChargeVector(p.clone())), 1);
            // Only p_{min+1..=max} matters, and only through parity.
            let mut q = p.clone();
            q[flip] += 2;
            prop_assert_eq!(sign_eps(a, b, &ChargeVector(p.clone())), sign_eps(a, b, &ChargeVector(q)));
            let (lo, hi) = (a.min(b), a.max(b));
            let mut r = p.clone();
            if flip < lo || flip >= hi {
                r[flip] += 1;
                prop_assert_eq!(sign_eps(a, b, &ChargeVector(p)), sign_eps(a, b, &ChargeVector(r)));
            }
        }
    }
}
