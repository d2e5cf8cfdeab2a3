use std::collections::BTreeMap;

use super::data::Hierarchy;
use crate::algebra::{xi_alphabet, xi_exponential, LaurentPolynomial, Sign, Symbol};
use crate::error::{Error, Result};
use crate::psdo::{
    pdo_invert, pdo_mul, pdo_project, Coefficient, LaurentMatrix, MatrixSeries, PseudoDiffOp, WaveSymbolFamily,
};

/// How a Baker–Akhiezer function is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Miwa-shifted tau quotients.
    Direct,
    /// `sum_k w^(k) z^-k` (or `v^(k)`) from the Schur-action coefficients.
    Series,
}

/// Reduced Baker–Akhiezer family: `Psi^p = chi^p z^p diag(e^{xi(t_b, z)})`
/// or `Psi^{dag p} = diag(e^{-xi(t_a, z)}) z^{-p} chi^{dag p}`; the family
/// stores `chi` with the z-power convention `+1` (resp. `-1`).
#[derive(Clone, Debug, PartialEq)]
pub struct BakerFunction {
    pub family: WaveSymbolFamily,
    pub adjoint: bool,
    /// Lowest retained power is `z^-z_order`.
    pub z_order: u32,
    /// Coefficient of `z^-k` is exact through this degree minus `k`.
    pub degree: u32,
}

pub fn baker_akhiezer(h: &Hierarchy, adjoint: bool, construction: Construction) -> Result<BakerFunction> {
    let n = h.components();
    let z = h.z_max();
    let d = h.degree() as i32;
    let ring = h.ring();
    let mut entries = BTreeMap::new();
    for p in h.p_values() {
        let m = match construction {
            Construction::Series => {
                let coeffs = h.coefficients();
                LaurentMatrix::from_fn(n, |a, b| {
                    let mut l = LaurentPolynomial::zero(ring, Symbol::Z, z);
                    for k in 0..=(z as usize).min(coeffs.depth()) {
                        let c = if adjoint { coeffs.v(p, k) } else { coeffs.w(p, k) };
                        l.add_coefficient(&[-(k as i32)], c.expect("coefficient depth").get(a, b).clone());
                    }
                    l
                })
            }
            Construction::Direct => {
                let inv = h.inv_tau(p);
                LaurentMatrix::from_fn(n, |a, b| {
                    let (component, sign, eps) = if adjoint {
                        (a, Sign::Plus, h.eps_rat(b, a, p))
                    } else {
                        (b, Sign::Minus, h.eps_rat(a, b, p))
                    };
                    let s = h.shifted(p, a, b, component, sign, z as usize);
                    let offset = if a == b { 0 } else { -1 };
                    let mut l = LaurentPolynomial::zero(ring, Symbol::Z, z);
                    for (k, c) in s.iter().enumerate() {
                        let e = offset - k as i32;
                        if e < -(z as i32) || d + e < 0 || c.is_zero() {
                            continue;
                        }
                        l.add_coefficient(&[e], c.mul_capped(inv, (d + e) as u32).scale(&eps));
                    }
                    l
                })
            }
        };
        entries.insert(p, m);
    }
    Ok(BakerFunction {
        family: WaveSymbolFamily::new(n, ring, Symbol::Z, z, if adjoint { -1 } else { 1 }, entries)?,
        adjoint,
        z_order: z,
        degree: h.degree(),
    })
}

/// The unreduced `Psi^p` (or `Psi^{dag p}`) including `z^{+-p}` and the
/// exponential factors, truncated at `z^-Z_max`.
pub fn baker_akhiezer_full(h: &Hierarchy, p: i64, adjoint: bool) -> Result<LaurentMatrix> {
    h.require(p)?;
    let ba = baker_akhiezer(h, adjoint, Construction::Direct)?;
    let chi = ba.family.get(p).expect("p in range").clone();
    let z = h.z_max();
    let ring = h.ring();
    let sign = if adjoint { Sign::Minus } else { Sign::Plus };
    let mut xi = Vec::new();
    for c in 1..=h.components() {
        xi.push(xi_exponential(ring, &xi_alphabet(ring, c, sign, false)?, Symbol::Z, z)?);
    }
    let shift = if adjoint { -p } else { p } as i32;
    Ok(LaurentMatrix::from_fn(h.components(), |a, b| {
        let e = &xi[if adjoint { a } else { b } - 1];
        (chi.get(a, b) * e).shift(Symbol::Z, shift)
    }))
}

/// `W`, the closed-form inverse `sum_k e^{-k d_p} v^(k)(p+1)` and the
/// order-by-order inverse, all through shift order `K_trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveOperator {
    pub w: PseudoDiffOp,
    pub inverse_closed: PseudoDiffOp,
    pub inverse_generic: PseudoDiffOp,
}

pub fn build_wave_operator(h: &Hierarchy) -> Result<WaveOperator> {
    let n = h.components();
    let ring = h.ring();
    let k_trunc = h.k_trunc();
    let coeffs = h.coefficients();
    let ps = h.p_values();
    let at = |p: i64, k: usize, adjoint: bool| -> Option<MatrixSeries> {
        if k > coeffs.depth() {
            return h.contains(p).then(|| MatrixSeries::zero(n, ring));
        }
        if adjoint { coeffs.v(p, k) } else { coeffs.w(p, k) }.cloned()
    };
    let mut w_terms = BTreeMap::new();
    let mut inv_terms = BTreeMap::new();
    for k in 0..=k_trunc {
        let table: BTreeMap<i64, MatrixSeries> = ps.iter().filter_map(|&p| at(p, k, false).map(|m| (p, m))).collect();
        w_terms.insert(k as i64, Coefficient::Table(table));
        // e^{-k d_p} v(p+1) = v(p+1-k) e^{-k d_p}
        let table: BTreeMap<i64, MatrixSeries> = ps
            .iter()
            .map(|&q| q + k as i64 - 1)
            .filter_map(|p| at(p + 1 - k as i64, k, true).map(|m| (p, m)))
            .collect();
        inv_terms.insert(k as i64, Coefficient::Table(table));
    }
    let w = PseudoDiffOp::from_terms(n, ring, w_terms, Some(k_trunc as i64))?;
    let inverse_closed = PseudoDiffOp::from_terms(n, ring, inv_terms, Some(k_trunc as i64))?;
    let inverse_generic = pdo_invert(&w, k_trunc as i64)?;
    Ok(WaveOperator {
        w,
        inverse_closed,
        inverse_generic,
    })
}

/// Which flow: `t[alpha, m]` of one component, or the matrix flow `t_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Component(usize),
    Matrix,
}

impl Flow {
    pub(crate) fn unit(self, n: usize, ring: &std::sync::Arc<crate::algebra::PolyRing>) -> MatrixSeries {
        match self {
            Flow::Component(a) => MatrixSeries::unit(n, ring, Some(a)),
            Flow::Matrix => MatrixSeries::identity(n, ring),
        }
    }

    pub(crate) fn label(self) -> String {
        match self {
            Flow::Component(a) => format!("alpha={a}"),
            Flow::Matrix => "matrix".into(),
        }
    }

    pub(crate) fn validate(self, h: &Hierarchy, m: usize) -> Result<()> {
        if let Flow::Component(a) = self {
            if a == 0 || a > h.components() {
                return Err(Error::config(format!("flow component {a} outside 1..={}", h.components())));
            }
        }
        if m == 0 || m > h.k_trunc() || m > h.ring().max_order() {
            return Err(Error::config(format!(
                "flow order m = {m} must lie in 1..={}",
                h.k_trunc().min(h.ring().max_order())
            )));
        }
        Ok(())
    }
}

/// `W E e^{m d_p} W^-1` before projection.
pub fn dressed_shift(h: &Hierarchy, wave: &WaveOperator, flow: Flow, m: usize) -> Result<PseudoDiffOp> {
    flow.validate(h, m)?;
    let e = PseudoDiffOp::monomial(flow.unit(h.components(), h.ring()), -(m as i64));
    Ok(pdo_mul(&pdo_mul(&wave.w, &e), &wave.inverse_generic))
}

/// `A = (W E e^{m d_p} W^-1)_+`.
pub fn flow_generator(h: &Hierarchy, wave: &WaveOperator, flow: Flow, m: usize) -> Result<PseudoDiffOp> {
    Ok(pdo_project(&dressed_shift(h, wave, flow, m)?, true))
}

/// `L = W e^{d_p} W^-1`, known through shift order `K_trunc - 1`.
pub fn lax_operator(h: &Hierarchy, wave: &WaveOperator) -> PseudoDiffOp {
    let shift = PseudoDiffOp::shift(h.components(), h.ring(), 1);
    pdo_mul(&pdo_mul(&wave.w, &shift), &wave.inverse_generic)
}
