//! Schur polynomials, Miwa shifts and the `exp(xi)` factor.

use std::sync::Arc;

use num_integer::binomial;
use num_traits::Zero;

use super::laurent::{LaurentPolynomial, Symbol};
use super::polynomial::TimePolynomial;
use super::ring::{PolyRing, TimeVar};
use super::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn rational(self) -> Rational {
        Rational::from_integer(self.value().into())
    }
}

/// Schur polynomials `h_0..h_k` of an alphabet, defined by
/// `exp(sum_j x_j z^j) = sum_k h_k(x) z^k`. `alphabet[j - 1]` plays the
/// role of `x_j`; missing letters are zero.
pub fn schur(ring: &Arc<PolyRing>, k: usize, alphabet: &[TimePolynomial]) -> Vec<TimePolynomial> {
    // k h_k = sum_{j=1}^{k} j x_j h_{k-j}
    let mut h = vec![TimePolynomial::one(ring)];
    for m in 1..=k {
        let mut acc = TimePolynomial::zero(ring);
        for j in 1..=m.min(alphabet.len()) {
            if alphabet[j - 1].is_zero() || h[m - j].is_zero() {
                continue;
            }
            acc += &(&alphabet[j - 1] * &h[m - j]).scale(&Rational::from_integer((j as i64).into()));
        }
        h.push(acc.scale(&Rational::new(1.into(), (m as i64).into())));
    }
    h
}

/// The alphabet `t[component, 1..=K_t]` of one copy.
pub fn component_alphabet(ring: &Arc<PolyRing>, copy: u8, component: usize) -> Vec<TimePolynomial> {
    (1..=ring.max_order())
        .map(|k| {
            TimePolynomial::var(
                ring,
                TimeVar {
                    copy,
                    component,
                    order: k,
                },
            )
            .expect("component within ring")
        })
        .collect()
}

/// `[h_0(s d~) P, h_1(s d~) P, ..., h_k(s d~) P]` where
/// `d~ = {d/dt[c,1], 1/2 d/dt[c,2], 1/3 d/dt[c,3], ...}` and `s` is the sign.
pub fn schur_derivative_series(
    p: &TimePolynomial,
    copy: u8,
    component: usize,
    sign: Sign,
    k: usize,
) -> Vec<TimePolynomial> {
    // Operators commute, so the generating-function recurrence carries over:
    // m R_m = sum_j j (s/j) d_j R_{m-j} = s sum_j d_j R_{m-j}.
    let mut out = vec![p.clone()];
    for m in 1..=k {
        let mut acc = TimePolynomial::zero(p.ring());
        for j in 1..=m {
            let prev = &out[m - j];
            if prev.is_zero() {
                continue;
            }
            acc += &prev.derivative(TimeVar {
                copy,
                component,
                order: j,
            });
        }
        out.push(acc.scale(&Rational::new(sign.value().into(), (m as i64).into())));
    }
    out
}

/// `h_k(s d~_component) P` on the unprimed alphabet.
pub fn schur_derivative_action(k: usize, component: usize, p: &TimePolynomial, sign: Sign) -> TimePolynomial {
    schur_derivative_series(p, 0, component, sign, k).pop().unwrap()
}

/// `P(t +- [symbol^-1]_component)` expanded to `symbol^-z_max`, computed
/// through the derivative expansion `exp(+- sum_k symbol^-k/k d/dt[c,k]) P`.
pub fn miwa_shift(p: &TimePolynomial, component: usize, sign: Sign, symbol: Symbol, z_max: u32) -> LaurentPolynomial {
    miwa_shift_in(p, 0, component, sign, symbol, z_max)
}

pub fn miwa_shift_in(
    p: &TimePolynomial,
    copy: u8,
    component: usize,
    sign: Sign,
    symbol: Symbol,
    z_max: u32,
) -> LaurentPolynomial {
    let series = schur_derivative_series(p, copy, component, sign, z_max as usize);
    let mut out = LaurentPolynomial::zero(p.ring(), symbol, z_max);
    for (k, c) in series.into_iter().enumerate() {
        out.add_coefficient(&[-(k as i32)], c);
    }
    out
}

/// Same shift computed by literal substitution
/// `t[c,k] -> t[c,k] +- symbol^-k / k` in every monomial.
pub fn miwa_shift_by_substitution(
    p: &TimePolynomial,
    copy: u8,
    component: usize,
    sign: Sign,
    symbol: Symbol,
    z_max: u32,
) -> LaurentPolynomial {
    let ring = p.ring();
    let mut out = LaurentPolynomial::zero(ring, symbol, z_max);
    for (m, c) in p.terms() {
        let mut fixed = m.exponents().to_vec();
        let mut factor = LaurentPolynomial::from_poly(TimePolynomial::one(ring), symbol, z_max);
        for (idx, &e) in m.exponents().iter().enumerate() {
            let v = ring.var(idx);
            if e == 0 || v.copy != copy || v.component != component {
                continue;
            }
            fixed[idx] = 0;
            let t = TimePolynomial::var(ring, v).expect("variable from ring");
            let k = v.order as i64;
            // (t + s z^-k / k)^e = sum_i C(e,i) t^(e-i) (s/k)^i z^(-k i)
            let mut binom = LaurentPolynomial::zero(ring, symbol, z_max);
            let mut t_pow = vec![TimePolynomial::one(ring)];
            for _ in 0..e {
                let next = t_pow.last().unwrap() * &t;
                t_pow.push(next);
            }
            for i in 0..=e as i64 {
                let shift = Rational::new(sign.value().into(), k.into());
                let coeff = Rational::from_integer(binomial(e as i64, i).into()) * pow(&shift, i as u32);
                binom.add_coefficient(&[-(k * i) as i32], t_pow[(e as i64 - i) as usize].scale(&coeff));
            }
            factor = &factor * &binom;
        }
        let rest = TimePolynomial::from_terms(
            ring,
            [(
                c.clone(),
                fixed
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (ring.var(i), e))
                    .collect::<Vec<_>>(),
            )],
        )
        .expect("monomial from ring");
        out = &out + &factor.mul_poly(&rest);
    }
    out
}

fn pow(r: &Rational, e: u32) -> Rational {
    let mut out = Rational::from_integer(1.into());
    for _ in 0..e {
        out *= r;
    }
    out
}

/// `exp(sum_k dt_k symbol^k)`, with `dt[k - 1]` the coefficient of
/// `symbol^k`. Every `dt_k` must vanish at the origin so the expansion is
/// finite under the degree cap.
pub fn xi_exponential(ring: &Arc<PolyRing>, dt: &[TimePolynomial], symbol: Symbol, z_max: u32) -> Result<LaurentPolynomial> {
    if let Some(k) = dt.iter().position(|x| !x.constant_term().is_zero()) {
        return Err(Error::config(format!(
            "xi exponential needs dt_{} without constant term",
            k + 1
        )));
    }
    let top = ring.degree_cap() as usize * dt.len().max(1);
    let h = schur(ring, top, dt);
    let mut out = LaurentPolynomial::zero(ring, symbol, z_max);
    for (m, c) in h.into_iter().enumerate() {
        out.add_coefficient(&[m as i32], c);
    }
    Ok(out)
}

/// `dt_k = s * (t[c,k] - t'[c,k])` when the ring has a primed copy and
/// `with_primed` is set, otherwise `s * t[c,k]`.
pub fn xi_alphabet(ring: &Arc<PolyRing>, component: usize, sign: Sign, with_primed: bool) -> Result<Vec<TimePolynomial>> {
    if with_primed && ring.copies() < 2 {
        return Err(Error::config("primed times requested in a single-alphabet ring"));
    }
    let plain = component_alphabet(ring, 0, component);
    let primed = with_primed.then(|| component_alphabet(ring, 1, component));
    Ok(plain
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let d = match &primed {
                Some(pr) => &t - &pr[i],
                None => t,
            };
            d.scale(&sign.rational())
        })
        .collect())
}
