use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::ring::{PolyRing, TimeVar};
use super::Rational;
use crate::error::{Error, Result};

/// Exponent vector over the ring's variable universe. Ordered by graded
/// degree first so that iteration visits low-degree terms first and products
/// can stop early once the cap is exceeded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    weight: u32,
    exps: Box<[u8]>,
}

impl Monomial {
    pub fn one(ring: &PolyRing) -> Self {
        Self {
            weight: 0,
            exps: vec![0; ring.n_vars()].into_boxed_slice(),
        }
    }

    pub fn from_exponents(ring: &PolyRing, exps: &[u8]) -> Result<Self> {
        if exps.len() != ring.n_vars() {
            return Err(Error::config(format!(
                "exponent vector of length {} for a universe of {} variables",
                exps.len(),
                ring.n_vars()
            )));
        }
        let weight = exps
            .iter()
            .enumerate()
            .map(|(i, &e)| ring.weight_of(i) * e as u32)
            .sum();
        Ok(Self {
            weight,
            exps: exps.into(),
        })
    }

    /// Graded degree (total or weighted, per the ring).
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.weight == 0 && self.exps.iter().all(|&e| e == 0)
    }

    /// Graded degree restricted to one copy of the alphabet.
    pub fn weight_in_copy(&self, ring: &PolyRing, copy: u8) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .filter(|(i, &e)| e > 0 && ring.var(*i).copy == copy)
            .map(|(i, &e)| ring.weight_of(i) * e as u32)
            .sum()
    }

    /// Plain number of variables (with multiplicity).
    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a + b)
            .collect();
        Monomial {
            weight: self.weight + other.weight,
            exps,
        }
    }
}

/// Truncated polynomial in the time variables with exact rational
/// coefficients. Monomials above the ring's degree cap are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct TimePolynomial {
    ring: Arc<PolyRing>,
    terms: BTreeMap<Monomial, Rational>,
}

impl TimePolynomial {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        Self {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: &Arc<PolyRing>, c: Rational) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ring), c);
        }
        p
    }

    pub fn var(ring: &Arc<PolyRing>, var: TimeVar) -> Result<Self> {
        let idx = ring
            .index(var)
            .ok_or_else(|| Error::config(format!("variable {var} outside the ring universe")))?;
        let mut exps = vec![0u8; ring.n_vars()];
        exps[idx] = 1;
        let m = Monomial::from_exponents(ring, &exps)?;
        let mut p = Self::zero(ring);
        if m.weight <= ring.degree_cap() {
            p.terms.insert(m, Rational::one());
        }
        Ok(p)
    }

    /// Builds a polynomial from `(coefficient, [(variable, exponent)])` terms,
    /// dropping anything above the cap.
    pub fn from_terms<I, V>(ring: &Arc<PolyRing>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, V)>,
        V: AsRef<[(TimeVar, u8)]>,
    {
        let mut p = Self::zero(ring);
        for (c, vars) in terms {
            let mut exps = vec![0u8; ring.n_vars()];
            for &(v, e) in vars.as_ref() {
                let idx = ring
                    .index(v)
                    .ok_or_else(|| Error::config(format!("variable {v} outside the ring universe")))?;
                exps[idx] += e;
            }
            let m = Monomial::from_exponents(ring, &exps)?;
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .iter()
            .next()
            .filter(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Largest graded degree present, `None` for the zero polynomial.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.weight)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || m.weight > self.ring.degree_cap() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ring.ensure_same(&other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ring.ensure_same(&other.ring)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ring.ensure_same(&other.ring)?;
        Ok(self.mul_unchecked(other, self.ring.degree_cap()))
    }

    /// Product keeping only monomials of graded degree `<= cap`; cheaper
    /// than truncating a full product.
    pub fn mul_capped(&self, other: &Self, cap: u32) -> Self {
        self.ring.ensure_same(&other.ring).expect("polynomials from different rings");
        self.mul_unchecked(other, cap.min(self.ring.degree_cap()))
    }

    fn mul_unchecked(&self, other: &Self, cap: u32) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ring);
        }
        let rhs: Vec<(&Monomial, &Rational)> = other.terms.iter().collect();
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (ma, ca) in &self.terms {
            if ma.weight + rhs[0].0.weight > cap {
                break;
            }
            for &(mb, cb) in &rhs {
                if ma.weight + mb.weight > cap {
                    break;
                }
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += c;
                    }
                }
            }
        }
        Self {
            ring: self.ring.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Self {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Partial derivative in one time variable. Variables outside the
    /// universe are constants, so the result is zero for them.
    pub fn derivative(&self, var: TimeVar) -> Self {
        let Some(idx) = self.ring.index(var) else {
            return Self::zero(&self.ring);
        };
        let w = self.ring.weight_of(idx);
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exps[idx];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.clone();
            exps[idx] -= 1;
            let dm = Monomial {
                weight: m.weight - w,
                exps,
            };
            out.terms.insert(dm, c * Rational::from_integer(e.into()));
        }
        out
    }

    /// Sum of `t[alpha,1]` derivatives over all components of copy 0, the
    /// matrix-hierarchy `d/dt_1`.
    pub fn d_t1(&self) -> Self {
        self.d_tm(1)
    }

    /// `d/dt_m = sum_alpha d/dt[alpha,m]` on copy 0.
    pub fn d_tm(&self, m: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for alpha in 1..=self.ring.components() {
            out += &self.derivative(TimeVar::new(alpha, m));
        }
        out
    }

    /// Keeps only monomials satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        Self {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every monomial of graded degree above `degree`.
    pub fn truncate(&self, degree: u32) -> Self {
        self.filter(|m| m.weight <= degree)
    }

    /// Re-expresses the polynomial in another ring over the same components,
    /// moving variables of copy `from` to copy `to`. Monomials that do not
    /// fit the target universe or cap are dropped.
    pub fn transfer(&self, target: &Arc<PolyRing>, from: u8, to: u8) -> Self {
        let mut out = Self::zero(target);
        'terms: for (m, c) in &self.terms {
            let mut exps = vec![0u8; target.n_vars()];
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut v = self.ring.var(i);
                if v.copy == from {
                    v.copy = to;
                }
                match target.index(v) {
                    Some(j) => exps[j] += e,
                    None => continue 'terms,
                }
            }
            if let Ok(tm) = Monomial::from_exponents(target, &exps) {
                out.add_term(tm, c.clone());
            }
        }
        out
    }

    /// `1/self` as a truncated power series. Requires a nonzero constant term.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return None;
        }
        let inv0 = c0.recip();
        // self = c0 (1 - x)  =>  1/self = inv0 * sum_n x^n
        let x = Self::one(&self.ring) - &self.scale(&inv0);
        let mut sum = Self::one(&self.ring);
        let mut power = Self::one(&self.ring);
        loop {
            power = &power * &x;
            if power.is_zero() {
                break;
            }
            sum += &power;
        }
        Some(sum.scale(&inv0))
    }

    /// Canonical text: monomials in graded order, `coeff*t[alpha,k]^e`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TimePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            for (idx, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = self.ring.var(idx);
                if e == 1 {
                    factors.push(v.to_string());
                } else {
                    factors.push(format!("{v}^{e}"));
                }
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TimePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimePolynomial({self})")
    }
}

fn expect<T>(r: Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => panic!("{e}"),
    }
}

impl Add for &TimePolynomial {
    type Output = TimePolynomial;
    fn add(self, rhs: &TimePolynomial) -> TimePolynomial {
        expect(self.try_add(rhs))
    }
}

impl Sub for &TimePolynomial {
    type Output = TimePolynomial;
    fn sub(self, rhs: &TimePolynomial) -> TimePolynomial {
        expect(self.try_sub(rhs))
    }
}

impl Mul for &TimePolynomial {
    type Output = TimePolynomial;
    fn mul(self, rhs: &TimePolynomial) -> TimePolynomial {
        expect(self.try_mul(rhs))
    }
}

impl Add<&TimePolynomial> for TimePolynomial {
    type Output = TimePolynomial;
    fn add(mut self, rhs: &TimePolynomial) -> TimePolynomial {
        self += rhs;
        self
    }
}

impl Sub<&TimePolynomial> for TimePolynomial {
    type Output = TimePolynomial;
    fn sub(mut self, rhs: &TimePolynomial) -> TimePolynomial {
        self -= rhs;
        self
    }
}

impl AddAssign<&TimePolynomial> for TimePolynomial {
    fn add_assign(&mut self, rhs: &TimePolynomial) {
        expect(self.ring.ensure_same(&rhs.ring));
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&TimePolynomial> for TimePolynomial {
    fn sub_assign(&mut self, rhs: &TimePolynomial) {
        expect(self.ring.ensure_same(&rhs.ring));
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for &TimePolynomial {
    type Output = TimePolynomial;
    fn neg(self) -> TimePolynomial {
        TimePolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for TimePolynomial {
    type Output = TimePolynomial;
    fn neg(self) -> TimePolynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Grading};

    fn ring(cap: u32) -> Arc<PolyRing> {
        PolyRing::new(2, 3, 1, Grading::Total, cap).unwrap()
    }

    fn t(ring: &Arc<PolyRing>, k: usize) -> TimePolynomial {
        TimePolynomial::var(ring, TimeVar::new(1, k)).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let r = ring(2);
        let one = TimePolynomial::one(&r);
        let t1 = t(&r, 1);
        let prod = &(&one + &t1) * &(&one - &t1);
        assert_eq!(prod, &one - &(&t1 * &t1));
        assert_eq!(prod.to_string(), "1 - t[1,1]^2");
    }

    #[test]
    fn derivative_of_schur_like_polynomial() {
        let r = ring(2);
        let t1 = t(&r, 1);
        let p = &t(&r, 2) + &(&t1 * &t1).scale(&rat(1, 2));
        assert_eq!(p.derivative(TimeVar::new(1, 1)), t1);
    }

    #[test]
    fn truncation_discards_high_monomials() {
        let r = ring(1);
        assert!((&t(&r, 1) * &t(&r, 2)).is_zero());
    }

    #[test]
    fn weighted_cap_counts_orders() {
        let r = PolyRing::new(1, 3, 1, Grading::Weighted, 2).unwrap();
        let t1 = TimePolynomial::var(&r, TimeVar::new(1, 1)).unwrap();
        let t2 = TimePolynomial::var(&r, TimeVar::new(1, 2)).unwrap();
        assert!(TimePolynomial::var(&r, TimeVar::new(1, 3)).unwrap().is_zero());
        assert!((&t1 * &t2).is_zero());
        assert_eq!((&t1 * &t1).max_weight(), Some(2));
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = TimePolynomial::one(&ring(2));
        let b = TimePolynomial::one(&ring(3));
        assert!(matches!(a.try_add(&b), Err(Error::Config(_))));
        assert!(matches!(a.try_mul(&b), Err(Error::Config(_))));
    }

    #[test]
    fn inverse_series() {
        let r = ring(4);
        let p = &TimePolynomial::one(&r) + &t(&r, 1).scale(&rat(3, 1));
        let inv = p.inverse().unwrap();
        assert_eq!(&p * &inv, TimePolynomial::one(&r));
        assert_eq!(
            inv.to_string(),
            "1 - 3*t[1,1] + 9*t[1,1]^2 - 27*t[1,1]^3 + 81*t[1,1]^4"
        );
        assert!(t(&r, 1).inverse().is_none());
    }

    #[test]
    fn canonical_text_orders_by_degree() {
        let r = PolyRing::new(1, 2, 2, Grading::Weighted, 3).unwrap();
        let p = TimePolynomial::from_terms(
            &r,
            vec![
                (rat(1, 2), vec![(TimeVar::new(1, 1), 2)]),
                (rat(1, 1), vec![(TimeVar::new(1, 2), 1)]),
                (rat(-2, 3), vec![(TimeVar::primed(1, 1), 1)]),
                (rat(1, 1), vec![]),
            ],
        )
        .unwrap();
        assert_eq!(p.to_string(), "1 - 2/3*t'[1,1] + t[1,2] + 1/2*t[1,1]^2");
    }

    #[test]
    fn transfer_renames_copy() {
        let single = PolyRing::new(2, 2, 1, Grading::Weighted, 3).unwrap();
        let double = PolyRing::new(2, 2, 2, Grading::Weighted, 3).unwrap();
        let p = TimePolynomial::var(&single, TimeVar::new(2, 1)).unwrap();
        let q = p.transfer(&double, 0, 1);
        assert_eq!(q, TimePolynomial::var(&double, TimeVar::primed(2, 1)).unwrap());
    }
}
