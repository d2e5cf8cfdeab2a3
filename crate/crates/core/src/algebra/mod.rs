//! Exact polynomial and Laurent arithmetic over the rationals.

mod laurent;
mod polynomial;
mod ring;
mod series;

pub use laurent::{residue, LaurentPolynomial, Symbol};
pub use polynomial::{Monomial, TimePolynomial};
pub use ring::{Grading, PolyRing, TimeVar};
pub use series::{
    component_alphabet, miwa_shift, miwa_shift_by_substitution, miwa_shift_in, schur, schur_derivative_action,
    schur_derivative_series, xi_alphabet, xi_exponential, Sign,
};

pub type Rational = num_rational::BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
