use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::polynomial::TimePolynomial;
use super::ring::{PolyRing, TimeVar};
use super::Rational;
use crate::error::{Error, Result};

/// Formal spectral symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Z,
    Mu,
    Nu,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Z => "z",
            Symbol::Mu => "mu",
            Symbol::Nu => "nu",
        })
    }
}

/// Finite Laurent polynomial in one or two spectral symbols with
/// time-polynomial coefficients.
///
/// Every exponent is bounded below by `-z_max`; products silently drop terms
/// under that floor. Positive exponents are unbounded.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPolynomial {
    ring: Arc<PolyRing>,
    symbols: Vec<Symbol>,
    z_max: i32,
    terms: BTreeMap<Vec<i32>, TimePolynomial>,
}

impl LaurentPolynomial {
    pub fn zero(ring: &Arc<PolyRing>, symbol: Symbol, z_max: u32) -> Self {
        Self::zero_in(ring, &[symbol], z_max)
    }

    pub fn zero_in(ring: &Arc<PolyRing>, symbols: &[Symbol], z_max: u32) -> Self {
        let mut symbols = symbols.to_vec();
        symbols.sort();
        symbols.dedup();
        assert!(!symbols.is_empty(), "a Laurent polynomial needs a symbol");
        Self {
            ring: ring.clone(),
            symbols,
            z_max: z_max as i32,
            terms: BTreeMap::new(),
        }
    }

    /// `c * symbol^exponent`.
    pub fn monomial(c: TimePolynomial, symbol: Symbol, exponent: i32, z_max: u32) -> Self {
        let mut out = Self::zero(c.ring(), symbol, z_max);
        out.add_coefficient(&[exponent], c);
        out
    }

    pub fn from_poly(c: TimePolynomial, symbol: Symbol, z_max: u32) -> Self {
        Self::monomial(c, symbol, 0, z_max)
    }

    /// `symbol^exponent` with unit coefficient.
    pub fn power(ring: &Arc<PolyRing>, symbol: Symbol, exponent: i32, z_max: u32) -> Self {
        Self::monomial(TimePolynomial::one(ring), symbol, exponent, z_max)
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn z_max(&self) -> u32 {
        self.z_max as u32
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero coefficients keyed by exponent vector (one entry per symbol,
    /// in `symbols()` order).
    pub fn terms(&self) -> impl Iterator<Item = (&[i32], &TimePolynomial)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[i32]) -> TimePolynomial {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(|| TimePolynomial::zero(&self.ring))
    }

    /// Coefficient of `symbol^e` for a single-symbol polynomial.
    pub fn coeff(&self, e: i32) -> TimePolynomial {
        self.coefficient(&[e])
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().flat_map(|e| e.iter().copied()).min()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().flat_map(|e| e.iter().copied()).max()
    }

    /// Total number of stored time monomials.
    pub fn monomial_count(&self) -> usize {
        self.terms.values().map(TimePolynomial::len).sum()
    }

    pub(crate) fn add_coefficient(&mut self, exps: &[i32], c: TimePolynomial) {
        debug_assert_eq!(exps.len(), self.symbols.len());
        if c.is_zero() || exps.iter().any(|&e| e < -self.z_max) {
            return;
        }
        match self.terms.get_mut(exps) {
            Some(existing) => {
                *existing += &c;
                if existing.is_zero() {
                    self.terms.remove(exps);
                }
            }
            None => {
                self.terms.insert(exps.to_vec(), c);
            }
        }
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.ring.ensure_same(&other.ring)?;
        if self.symbols != other.symbols {
            return Err(Error::config(format!(
                "cross-symbol arithmetic between {:?} and {:?}",
                self.symbols, other.symbols
            )));
        }
        if self.z_max != other.z_max {
            return Err(Error::config(format!(
                "mismatched Laurent bounds: {} vs {}",
                self.z_max, other.z_max
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_coefficient(e, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_coefficient(e, -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = Self::zero_in(&self.ring, &self.symbols, self.z_max as u32);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if e.iter().any(|&x| x < -self.z_max) {
                    continue;
                }
                out.add_coefficient(&e, ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by a time polynomial.
    pub fn mul_poly(&self, c: &TimePolynomial) -> Self {
        self.map(|x| x * c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, mut f: impl FnMut(&TimePolynomial) -> TimePolynomial) -> Self {
        let mut out = Self::zero_in(&self.ring, &self.symbols, self.z_max as u32);
        for (e, c) in &self.terms {
            out.add_coefficient(e, f(c));
        }
        out
    }

    /// Multiplies by `symbol^k`; `symbol` must be one of the polynomial's
    /// symbols.
    pub fn shift(&self, symbol: Symbol, k: i32) -> Self {
        let pos = self
            .symbols
            .iter()
            .position(|&s| s == symbol)
            .unwrap_or_else(|| panic!("symbol {symbol} not present in {:?}", self.symbols));
        let mut out = Self::zero_in(&self.ring, &self.symbols, self.z_max as u32);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[pos] += k;
            out.add_coefficient(&e2, c.clone());
        }
        out
    }

    pub fn derivative(&self, var: TimeVar) -> Self {
        self.map(|c| c.derivative(var))
    }

    /// Matrix-hierarchy `d/dt_1` applied coefficientwise.
    pub fn d_t1(&self) -> Self {
        self.map(TimePolynomial::d_t1)
    }

    pub fn d_tm(&self, m: usize) -> Self {
        self.map(|c| c.d_tm(m))
    }

    /// Formal derivative in the (single) spectral symbol.
    pub fn symbol_derivative(&self) -> Self {
        assert_eq!(self.symbols.len(), 1, "symbol derivative of a bivariate series");
        let mut out = Self::zero_in(&self.ring, &self.symbols, self.z_max as u32);
        for (e, c) in &self.terms {
            if e[0] != 0 {
                out.add_coefficient(&[e[0] - 1], c.scale(&Rational::from_integer(e[0].into())));
            }
        }
        out
    }

    /// Embeds into a polynomial over a larger symbol set (constant in the new
    /// symbols).
    pub fn extend(&self, symbols: &[Symbol]) -> Self {
        let mut out = Self::zero_in(&self.ring, symbols, self.z_max as u32);
        assert!(
            self.symbols.iter().all(|s| out.symbols.contains(s)),
            "extension must contain the existing symbols"
        );
        for (e, c) in &self.terms {
            let mut e2 = vec![0; out.symbols.len()];
            for (i, s) in self.symbols.iter().enumerate() {
                let j = out.symbols.iter().position(|x| x == s).unwrap();
                e2[j] = e[i];
            }
            out.add_coefficient(&e2, c.clone());
        }
        out
    }

    /// Keeps only the coefficients (exponents, monomials) accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&[i32], &super::Monomial) -> bool) -> Self {
        let mut out = Self::zero_in(&self.ring, &self.symbols, self.z_max as u32);
        for (e, c) in &self.terms {
            out.add_coefficient(e, c.filter(|m| keep(e, m)));
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Coefficient of `symbol^-1`; the `2 pi i` of the contour integral is
/// normalized away.
pub fn residue(l: &LaurentPolynomial) -> TimePolynomial {
    assert_eq!(l.symbols.len(), 1, "residue of a bivariate series");
    l.coeff(-1)
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let powers: Vec<String> = self
                .symbols
                .iter()
                .zip(e)
                .filter(|(_, &k)| k != 0)
                .map(|(s, &k)| if k == 1 { s.to_string() } else { format!("{s}^{k}") })
                .collect();
            if powers.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", powers.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent[{:?}]({self})", self.symbols)
    }
}

fn expect<T>(r: Result<T>) -> T {
    r.unwrap_or_else(|e| panic!("{e}"))
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        expect(self.try_add(rhs))
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        expect(self.try_sub(rhs))
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        expect(self.try_mul(rhs))
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        self.map(|c| -c)
    }
}
