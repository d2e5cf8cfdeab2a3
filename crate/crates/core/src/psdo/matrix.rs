use std::fmt;
use std::sync::Arc;

use crate::algebra::{LaurentPolynomial, PolyRing, Rational, Symbol, TimePolynomial, TimeVar};

/// `N x N` matrix of time polynomials, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct MatrixSeries {
    n: usize,
    entries: Vec<TimePolynomial>,
}

impl MatrixSeries {
    pub fn zero(n: usize, ring: &Arc<PolyRing>) -> Self {
        Self {
            n,
            entries: vec![TimePolynomial::zero(ring); n * n],
        }
    }

    pub fn identity(n: usize, ring: &Arc<PolyRing>) -> Self {
        Self::unit(n, ring, None)
    }

    /// `E_alpha`: 1 at `(alpha, alpha)`, zero elsewhere. `None` gives `I`.
    pub fn unit(n: usize, ring: &Arc<PolyRing>, alpha: Option<usize>) -> Self {
        let mut m = Self::zero(n, ring);
        for a in 1..=n {
            if alpha.is_none_or(|x| x == a) {
                m.set(a, a, TimePolynomial::one(ring));
            }
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> TimePolynomial) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for a in 1..=n {
            for b in 1..=n {
                entries.push(f(a, b));
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.entries[0].ring()
    }

    /// Entry `(alpha, beta)`, 1-based.
    pub fn get(&self, alpha: usize, beta: usize) -> &TimePolynomial {
        &self.entries[(alpha - 1) * self.n + beta - 1]
    }

    pub fn set(&mut self, alpha: usize, beta: usize, x: TimePolynomial) {
        self.entries[(alpha - 1) * self.n + beta - 1] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TimePolynomial::is_zero)
    }

    pub fn monomial_count(&self) -> usize {
        self.entries.iter().map(TimePolynomial::len).sum()
    }

    pub fn map(&self, f: impl FnMut(&TimePolynomial) -> TimePolynomial) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "matrix dimension mismatch");
        let n = self.n;
        Self::from_fn(n, |a, b| {
            let mut acc = TimePolynomial::zero(self.ring());
            for g in 1..=n {
                let (x, y) = (self.get(a, g), o.get(g, b));
                if !x.is_zero() && !y.is_zero() {
                    acc += &(x * y);
                }
            }
            acc
        })
    }

    pub fn derivative(&self, v: TimeVar) -> Self {
        self.map(|x| x.derivative(v))
    }

    pub fn d_tm(&self, m: usize) -> Self {
        self.map(|x| x.d_tm(m))
    }
}

impl fmt::Debug for MatrixSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl MatrixSeries {
    pub fn to_text(&self) -> String {
        let rows: Vec<String> = (1..=self.n)
            .map(|a| {
                let cells: Vec<String> = (1..=self.n).map(|b| self.get(a, b).to_text()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

/// `N x N` matrix of Laurent polynomials in one spectral symbol.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentMatrix {
    n: usize,
    entries: Vec<LaurentPolynomial>,
}

impl LaurentMatrix {
    pub fn zero(n: usize, ring: &Arc<PolyRing>, symbol: Symbol, z_max: u32) -> Self {
        Self {
            n,
            entries: vec![LaurentPolynomial::zero(ring, symbol, z_max); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> LaurentPolynomial) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for a in 1..=n {
            for b in 1..=n {
                entries.push(f(a, b));
            }
        }
        Self { n, entries }
    }

    /// Constant-in-`z` embedding of a polynomial matrix.
    pub fn from_series(m: &MatrixSeries, symbol: Symbol, z_max: u32) -> Self {
        Self::from_fn(m.dim(), |a, b| LaurentPolynomial::from_poly(m.get(a, b).clone(), symbol, z_max))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &LaurentPolynomial {
        &self.entries[(alpha - 1) * self.n + beta - 1]
    }

    pub fn entries(&self) -> &[LaurentPolynomial] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(LaurentPolynomial::is_zero)
    }

    pub fn monomial_count(&self) -> usize {
        self.entries.iter().map(LaurentPolynomial::monomial_count).sum()
    }

    pub fn map(&self, f: impl FnMut(&LaurentPolynomial) -> LaurentPolynomial) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x)
    }

    /// Multiplies every entry by `symbol^k`.
    pub fn shift(&self, symbol: Symbol, k: i32) -> Self {
        self.map(|x| x.shift(symbol, k))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |a, b| {
            let mut acc = LaurentPolynomial::zero_in(self.get(1, 1).ring(), self.get(1, 1).symbols(), self.get(1, 1).z_max());
            for g in 1..=n {
                let (x, y) = (self.get(a, g), o.get(g, b));
                if !x.is_zero() && !y.is_zero() {
                    acc = &acc + &(x * y);
                }
            }
            acc
        })
    }

    /// `M * self` with a polynomial matrix on the left.
    pub fn left_mul(&self, m: &MatrixSeries) -> Self {
        let n = self.n;
        Self::from_fn(n, |a, b| {
            let mut acc = self.get(1, 1).map(|_| TimePolynomial::zero(m.ring()));
            for g in 1..=n {
                let c = m.get(a, g);
                if !c.is_zero() {
                    acc = &acc + &self.get(g, b).mul_poly(c);
                }
            }
            acc
        })
    }

    /// `self * M` with a polynomial matrix on the right.
    pub fn right_mul(&self, m: &MatrixSeries) -> Self {
        let n = self.n;
        Self::from_fn(n, |a, b| {
            let mut acc = self.get(1, 1).map(|_| TimePolynomial::zero(m.ring()));
            for g in 1..=n {
                let c = m.get(g, b);
                if !c.is_zero() {
                    acc = &acc + &self.get(a, g).mul_poly(c);
                }
            }
            acc
        })
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<String> = (1..=self.n)
            .map(|a| {
                let cells: Vec<String> = (1..=self.n).map(|b| self.get(a, b).to_text()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

impl fmt::Debug for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}
