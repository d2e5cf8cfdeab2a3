use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::family::WaveSymbolFamily;
use super::matrix::{LaurentMatrix, MatrixSeries};
use crate::algebra::{PolyRing, TimeVar};
use crate::error::{Error, Result};

/// Coefficient of one shift power: either the same matrix for every `p`, or
/// an explicit table over the `p` values where it is known.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Uniform(MatrixSeries),
    Table(BTreeMap<i64, MatrixSeries>),
}

impl Coefficient {
    pub fn get(&self, p: i64) -> Option<&MatrixSeries> {
        match self {
            Coefficient::Uniform(m) => Some(m),
            Coefficient::Table(t) => t.get(&p),
        }
    }

    /// `None` when defined for every `p`.
    pub fn domain(&self) -> Option<BTreeSet<i64>> {
        match self {
            Coefficient::Uniform(_) => None,
            Coefficient::Table(t) => Some(t.keys().copied().collect()),
        }
    }

    fn map(&self, mut f: impl FnMut(&MatrixSeries) -> MatrixSeries) -> Self {
        match self {
            Coefficient::Uniform(m) => Coefficient::Uniform(f(m)),
            Coefficient::Table(t) => Coefficient::Table(t.iter().map(|(p, m)| (*p, f(m))).collect()),
        }
    }

    fn shift_domain(&self, s: i64) -> Self {
        match self {
            Coefficient::Uniform(m) => Coefficient::Uniform(m.clone()),
            Coefficient::Table(t) => Coefficient::Table(t.iter().map(|(p, m)| (p - s, m.clone())).collect()),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Uniform(m) => m.is_zero(),
            Coefficient::Table(t) => t.values().all(MatrixSeries::is_zero),
        }
    }
}

/// Matrix pseudo-difference operator `sum_k A_k(p) e^{-k d_p}`.
///
/// `terms[k]` is the coefficient of `e^{-k d_p}` (so the shift `e^{d_p}` sits
/// at `k = -1`). `order` bounds the known part: terms with `k > order` were
/// truncated away and are unknown, not zero. `None` means the operator is
/// exact (finitely many terms).
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoDiffOp {
    n: usize,
    ring: Arc<PolyRing>,
    terms: BTreeMap<i64, Coefficient>,
    order: Option<i64>,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PseudoDiffOp {
    pub fn zero(n: usize, ring: &Arc<PolyRing>) -> Self {
        Self {
            n,
            ring: ring.clone(),
            terms: BTreeMap::new(),
            order: None,
        }
    }

    pub fn identity(n: usize, ring: &Arc<PolyRing>) -> Self {
        Self::monomial(MatrixSeries::identity(n, ring), 0)
    }

    /// `e^{m d_p}` times the identity matrix.
    pub fn shift(n: usize, ring: &Arc<PolyRing>, m: i64) -> Self {
        Self::monomial(MatrixSeries::identity(n, ring), -m)
    }

    /// `M e^{-k d_p}` with a `p`-independent matrix.
    pub fn monomial(m: MatrixSeries, k: i64) -> Self {
        let mut op = Self::zero(m.dim(), m.ring());
        op.terms.insert(k, Coefficient::Uniform(m));
        op
    }

    /// Operator from per-shift coefficients, known through shift `order`.
    pub fn from_terms(n: usize, ring: &Arc<PolyRing>, terms: BTreeMap<i64, Coefficient>, order: Option<i64>) -> Result<Self> {
        if let (Some(k), Some(o)) = (terms.keys().next_back(), order) {
            if *k > o {
                return Err(Error::config(format!("term e^(-{k} d_p) beyond truncation order {o}")));
            }
        }
        Ok(Self {
            n,
            ring: ring.clone(),
            terms,
            order,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Coefficient)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn shifts(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    /// Coefficient of `e^{-k d_p}` at `p`: `None` when unknown (beyond the
    /// truncation order or outside the tabulated `p` values).
    pub fn coefficient(&self, k: i64, p: i64) -> Option<MatrixSeries> {
        if self.order.is_some_and(|o| k > o) {
            return None;
        }
        match self.terms.get(&k) {
            Some(c) => c.get(p).cloned(),
            None => Some(MatrixSeries::zero(self.n, &self.ring)),
        }
    }

    /// Keeps only shifts `k <= order`.
    pub fn truncated(&self, order: i64) -> Self {
        Self {
            n: self.n,
            ring: self.ring.clone(),
            terms: self.terms.range(..=order).map(|(k, c)| (*k, c.clone())).collect(),
            order: Some(self.order.map_or(order, |o| o.min(order))),
        }
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.n, o.n, "operator dimension mismatch");
    }

    fn combine(&self, o: &Self, sub: bool) -> Self {
        self.check(o);
        let order = min_opt(self.order, o.order);
        let keys: BTreeSet<i64> = self.terms.keys().chain(o.terms.keys()).copied().collect();
        let mut terms = BTreeMap::new();
        for k in keys {
            if order.is_some_and(|x| k > x) {
                continue;
            }
            let a = self.terms.get(&k);
            let b = o.terms.get(&k);
            let c = match (a, b) {
                (Some(Coefficient::Uniform(x)), Some(Coefficient::Uniform(y))) => {
                    Coefficient::Uniform(if sub { x.sub(y) } else { x.add(y) })
                }
                (Some(x), None) => x.clone(),
                (None, Some(y)) => {
                    if sub {
                        y.map(MatrixSeries::neg)
                    } else {
                        y.clone()
                    }
                }
                (Some(x), Some(y)) => {
                    let dom: BTreeSet<i64> = match (x.domain(), y.domain()) {
                        (Some(d1), Some(d2)) => d1.intersection(&d2).copied().collect(),
                        (Some(d), None) | (None, Some(d)) => d,
                        (None, None) => unreachable!(),
                    };
                    Coefficient::Table(
                        dom.into_iter()
                            .map(|p| {
                                let (u, v) = (x.get(p).unwrap(), y.get(p).unwrap());
                                (p, if sub { u.sub(v) } else { u.add(v) })
                            })
                            .collect(),
                    )
                }
                (None, None) => unreachable!(),
            };
            terms.insert(k, c);
        }
        Self {
            n: self.n,
            ring: self.ring.clone(),
            terms,
            order,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, true)
    }

    /// Applies `f` to every coefficient matrix.
    pub fn map(&self, f: impl FnMut(&MatrixSeries) -> MatrixSeries + Clone) -> Self {
        Self {
            n: self.n,
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c.map(f.clone()))).collect(),
            order: self.order,
        }
    }

    pub fn derivative(&self, v: TimeVar) -> Self {
        self.map(move |m| m.derivative(v))
    }

    /// Matrix-hierarchy `d/dt_m = sum_alpha d/dt[alpha,m]` coefficientwise.
    pub fn d_tm(&self, m: usize) -> Self {
        self.map(move |x| x.d_tm(m))
    }

    /// The operator with coefficient argument shifted: `A(p + s)`.
    pub fn shift_argument(&self, s: i64) -> Self {
        Self {
            n: self.n,
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c.shift_domain(s))).collect(),
            order: self.order,
        }
    }

    /// Whether every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Coefficient::is_zero)
    }

    /// Canonical dump: one line per shift power and `p`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(o) = self.order {
            let _ = writeln!(out, "# known through e^(-{o} d_p)");
        }
        for (k, c) in &self.terms {
            match c {
                Coefficient::Uniform(m) => {
                    let _ = writeln!(out, "e^({} d_p) [all p]: {}", -k, m.to_text());
                }
                Coefficient::Table(t) => {
                    for (p, m) in t {
                        let _ = writeln!(out, "e^({} d_p) [p={p}]: {}", -k, m.to_text());
                    }
                }
            }
        }
        out
    }
}

/// `(AB)(p) = sum_m [sum_k A_k(p) B_{m-k}(p-k)] e^{-m d_p}`.
///
/// A result coefficient is known at `p` only when every contribution is;
/// the known order is `min(K_A + min_k B, K_B + min_k A)`.
pub fn pdo_mul(a: &PseudoDiffOp, b: &PseudoDiffOp) -> PseudoDiffOp {
    a.check(b);
    let n = a.n;
    let ring = &a.ring;
    let (Some(&amin), Some(&bmin)) = (a.terms.keys().next(), b.terms.keys().next()) else {
        return PseudoDiffOp {
            n,
            ring: ring.clone(),
            terms: BTreeMap::new(),
            order: min_opt(a.order, b.order),
        };
    };
    let amax = *a.terms.keys().next_back().unwrap();
    let bmax = *b.terms.keys().next_back().unwrap();
    let order = min_opt(a.order.map(|o| o + bmin), b.order.map(|o| o + amin));
    let top = order.map_or(amax + bmax, |o| o.min(amax + bmax));
    let mut terms = BTreeMap::new();
    for m in amin + bmin..=top {
        let pairs: Vec<(i64, &Coefficient, &Coefficient)> = a
            .terms
            .iter()
            .filter_map(|(k, ca)| b.terms.get(&(m - k)).map(|cb| (*k, ca, cb)))
            .collect();
        if pairs.is_empty() {
            continue;
        }
        // Candidate p's: constrained by every tabulated factor.
        let mut dom: Option<BTreeSet<i64>> = None;
        for (k, ca, cb) in &pairs {
            let mut cand: Option<BTreeSet<i64>> = ca.domain();
            if let Some(db) = cb.domain() {
                let shifted: BTreeSet<i64> = db.into_iter().map(|q| q + k).collect();
                cand = Some(match cand {
                    Some(c) => c.intersection(&shifted).copied().collect(),
                    None => shifted,
                });
            }
            if let Some(c) = cand {
                dom = Some(match dom {
                    Some(d) => d.intersection(&c).copied().collect(),
                    None => c,
                });
            }
        }
        let eval = |p: i64| {
            let mut acc = MatrixSeries::zero(n, ring);
            for (k, ca, cb) in &pairs {
                acc = acc.add(&ca.get(p).unwrap().mul(cb.get(p - k).unwrap()));
            }
            acc
        };
        let c = match dom {
            None => Coefficient::Uniform(eval(0)),
            Some(d) => Coefficient::Table(d.into_iter().map(|p| (p, eval(p))).collect()),
        };
        terms.insert(m, c);
    }
    PseudoDiffOp {
        n,
        ring: ring.clone(),
        terms,
        order,
    }
}

/// `A_+` keeps non-negative powers of `e^{d_p}` (stored `k <= 0`), `A_-`
/// the rest.
pub fn pdo_project(a: &PseudoDiffOp, plus: bool) -> PseudoDiffOp {
    PseudoDiffOp {
        n: a.n,
        ring: a.ring.clone(),
        terms: a
            .terms
            .iter()
            .filter(|(k, _)| (**k <= 0) == plus)
            .map(|(k, c)| (*k, c.clone()))
            .collect(),
        order: if plus { None } else { a.order },
    }
}

/// `[A, B] = AB - BA`.
pub fn pdo_commutator(a: &PseudoDiffOp, b: &PseudoDiffOp) -> PseudoDiffOp {
    pdo_mul(a, b).sub(&pdo_mul(b, a))
}

/// Order-by-order inverse of `I + sum_{k>=1} a_k e^{-k d_p}`:
/// `x_m(p) = -sum_{k=1}^m a_k(p) x_{m-k}(p-k)`.
pub fn pdo_invert(a: &PseudoDiffOp, order: i64) -> Result<PseudoDiffOp> {
    let n = a.n;
    if a.terms.keys().any(|&k| k < 0) {
        return Err(Error::Precondition("inverse needs an operator without positive shift powers".into()));
    }
    match a.terms.get(&0) {
        Some(Coefficient::Uniform(m)) if *m == MatrixSeries::identity(n, &a.ring) => {}
        Some(Coefficient::Table(t)) if t.values().all(|m| *m == MatrixSeries::identity(n, &a.ring)) => {}
        _ => return Err(Error::Precondition("leading coefficient must be the identity".into())),
    }
    let order = a.order.map_or(order, |o| o.min(order));
    let mut x: Vec<Coefficient> = vec![Coefficient::Uniform(MatrixSeries::identity(n, &a.ring))];
    for m in 1..=order {
        let mut pieces: Vec<(i64, Coefficient)> = Vec::new();
        for k in 1..=m {
            if let Some(c) = a.terms.get(&k) {
                pieces.push((k, c.clone()));
            }
        }
        let mut dom: Option<BTreeSet<i64>> = None;
        for (k, c) in &pieces {
            let mut cand = c.domain();
            if let Some(dx) = x[(m - k) as usize].domain() {
                let shifted: BTreeSet<i64> = dx.into_iter().map(|q| q + k).collect();
                cand = Some(match cand {
                    Some(cc) => cc.intersection(&shifted).copied().collect(),
                    None => shifted,
                });
            }
            if let Some(cc) = cand {
                dom = Some(match dom {
                    Some(d) => d.intersection(&cc).copied().collect(),
                    None => cc,
                });
            }
        }
        let eval = |p: i64| {
            let mut acc = MatrixSeries::zero(n, &a.ring);
            for (k, c) in &pieces {
                acc = acc.sub(&c.get(p).unwrap().mul(x[(m - k) as usize].get(p - k).unwrap()));
            }
            acc
        };
        x.push(match dom {
            None => Coefficient::Uniform(eval(0)),
            Some(d) => Coefficient::Table(d.into_iter().map(|p| (p, eval(p))).collect()),
        });
    }
    let terms = x
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !matches!(c, Coefficient::Uniform(m) if m.is_zero()))
        .map(|(k, c)| (k as i64, c))
        .collect();
    Ok(PseudoDiffOp {
        n,
        ring: a.ring.clone(),
        terms,
        order: Some(order),
    })
}

/// `(AF)(p) = sum_k A_k(p) F(p - k)`, defined at every `p` where all the
/// operator's known terms and the shifted family values are available.
pub fn pdo_apply(a: &PseudoDiffOp, f: &WaveSymbolFamily) -> Result<WaveSymbolFamily> {
    let mut out = BTreeMap::new();
    for &p in f.p_values().iter() {
        if let Some(v) = apply_at(a, f, p) {
            out.insert(p, v);
        }
    }
    let extra: Vec<i64> = candidate_ps(a, f);
    for p in extra {
        if let std::collections::btree_map::Entry::Vacant(e) = out.entry(p) {
            if let Some(v) = apply_at(a, f, p) {
                e.insert(v);
            }
        }
    }
    if out.is_empty() {
        return Err(exhausted(a, f));
    }
    Ok(f.with_entries(out))
}

fn candidate_ps(a: &PseudoDiffOp, f: &WaveSymbolFamily) -> Vec<i64> {
    let mut ps = BTreeSet::new();
    for q in f.p_values() {
        for k in a.terms.keys() {
            ps.insert(q + k);
            ps.insert(q - k);
        }
    }
    ps.into_iter().collect()
}

fn exhausted(a: &PseudoDiffOp, f: &WaveSymbolFamily) -> Error {
    let (kmin, kmax) = (
        a.terms.keys().next().copied().unwrap_or(0),
        a.terms.keys().next_back().copied().unwrap_or(0),
    );
    let ps = f.p_values();
    Error::window(
        format!(
            "operator with shifts {kmin}..={kmax} on a family over p in {:?}..={:?}",
            ps.first(),
            ps.last()
        ),
        format!("a p window spanning at least {} consecutive values", kmax - kmin + 1),
    )
}

fn apply_at(a: &PseudoDiffOp, f: &WaveSymbolFamily, p: i64) -> Option<LaurentMatrix> {
    let mut acc: Option<LaurentMatrix> = None;
    for (k, c) in &a.terms {
        let coeff = c.get(p)?;
        let fv = f.get(p - k)?;
        let term = fv.left_mul(coeff).shift(f.symbol(), -(f.sigma() * *k) as i32);
        acc = Some(match acc {
            Some(x) => x.add(&term),
            None => term,
        });
    }
    Some(acc.unwrap_or_else(|| f.zero_matrix()))
}

/// `(F A)(p) = sum_k F(p + k) A_k(p + k)`, the left action
/// `f e^{-d_p} = e^{d_p} f`.
pub fn pdo_left_apply(f: &WaveSymbolFamily, a: &PseudoDiffOp) -> Result<WaveSymbolFamily> {
    let mut out = BTreeMap::new();
    let mut ps: BTreeSet<i64> = f.p_values().into_iter().collect();
    ps.extend(candidate_ps(a, f));
    for p in ps {
        let mut acc: Option<LaurentMatrix> = None;
        let mut ok = true;
        for (k, c) in &a.terms {
            let (Some(coeff), Some(fv)) = (c.get(p + k), f.get(p + k)) else {
                ok = false;
                break;
            };
            let term = fv.right_mul(coeff).shift(f.symbol(), (f.sigma() * *k) as i32);
            acc = Some(match acc {
                Some(x) => x.add(&term),
                None => term,
            });
        }
        if ok {
            out.insert(p, acc.unwrap_or_else(|| f.zero_matrix()));
        }
    }
    if out.is_empty() {
        return Err(exhausted(a, f));
    }
    Ok(f.with_entries(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, LaurentPolynomial, Symbol, TimePolynomial};
    use proptest::prelude::*;

    fn ring() -> Arc<PolyRing> {
        PolyRing::weighted(2, 1, 3).unwrap()
    }

    fn t(r: &Arc<PolyRing>, a: usize, k: usize) -> TimePolynomial {
        TimePolynomial::var(r, TimeVar::new(a, k)).unwrap()
    }

    fn c(r: &Arc<PolyRing>, x: i64) -> TimePolynomial {
        TimePolynomial::constant(r, rat(x, 1))
    }

    fn scalar(r: &Arc<PolyRing>, x: TimePolynomial) -> MatrixSeries {
        MatrixSeries::from_fn(2, |a, b| if a == b { x.clone() } else { TimePolynomial::zero(r) })
    }

    /// `p`-dependent matrix for tables: entries mix `p` into the coefficients.
    fn sample(r: &Arc<PolyRing>, p: i64, salt: i64) -> MatrixSeries {
        MatrixSeries::from_fn(2, |a, b| {
            let s = (a * 2 + b) as i64 + salt;
            &c(r, p * s + 1) * &t(r, a, 1) + &c(r, s - p)
        })
    }

    fn table(r: &Arc<PolyRing>, ps: std::ops::RangeInclusive<i64>, salt: i64) -> Coefficient {
        Coefficient::Table(ps.map(|p| (p, sample(r, p, salt))).collect())
    }

    fn op(r: &Arc<PolyRing>, terms: Vec<(i64, Coefficient)>, order: Option<i64>) -> PseudoDiffOp {
        PseudoDiffOp::from_terms(2, r, terms.into_iter().collect(), order).unwrap()
    }

    /// Agreement on every `(k, p)` known to both operators.
    fn agree(a: &PseudoDiffOp, b: &PseudoDiffOp, ps: std::ops::RangeInclusive<i64>) -> usize {
        let top = min_opt(a.order(), b.order()).unwrap_or(12);
        let mut checked = 0;
        for k in -12..=top {
            for p in ps.clone() {
                if let (Some(x), Some(y)) = (a.coefficient(k, p), b.coefficient(k, p)) {
                    assert_eq!(x, y, "shift {k} at p={p}");
                    checked += 1;
                }
            }
        }
        checked
    }

    #[test]
    fn composition_rule() {
        let r = ring();
        let w = op(&r, vec![(1, table(&r, -3..=3, 0))], None);
        let v = op(&r, vec![(1, table(&r, -3..=3, 5))], None);
        let wv = pdo_mul(&w, &v);
        assert_eq!(wv.shifts(), vec![2]);
        for p in -2..=3 {
            assert_eq!(wv.coefficient(2, p).unwrap(), sample(&r, p, 0).mul(&sample(&r, p - 1, 5)));
        }
        assert_eq!(wv.coefficient(2, -3), None);
        assert_eq!(pdo_mul(&w, &PseudoDiffOp::identity(2, &r)), w);
        // e^{d_p} u(p) = u(p+1) e^{d_p}
        let u = op(&r, vec![(0, table(&r, -3..=3, 1))], None);
        let su = pdo_mul(&PseudoDiffOp::shift(2, &r, 1), &u);
        assert_eq!(su.shifts(), vec![-1]);
        for p in -4..=2 {
            assert_eq!(su.coefficient(-1, p).unwrap(), sample(&r, p + 1, 1));
        }
    }

    #[test]
    fn projections() {
        let r = ring();
        let a = op(
            &r,
            vec![
                (-1, Coefficient::Uniform(MatrixSeries::identity(2, &r))),
                (0, table(&r, -2..=2, 0)),
                (1, table(&r, -2..=2, 3)),
            ],
            Some(3),
        );
        let plus = pdo_project(&a, true);
        assert_eq!(plus.shifts(), vec![-1, 0]);
        assert_eq!(plus.order(), None);
        assert!(pdo_project(&plus, false).shifts().is_empty());
        assert_eq!(plus.add(&pdo_project(&a, false)), a);
    }

    #[test]
    fn inverse_geometric_series() {
        let r = ring();
        let id = PseudoDiffOp::identity(2, &r);
        assert_eq!(pdo_invert(&id, 3).unwrap().truncated(3).shifts(), vec![0]);
        let a = op(
            &r,
            vec![(0, Coefficient::Uniform(MatrixSeries::identity(2, &r))), (1, table(&r, -4..=4, 0))],
            None,
        );
        let x = pdo_invert(&a, 2).unwrap();
        for p in -3..=4 {
            assert_eq!(x.coefficient(1, p).unwrap(), sample(&r, p, 0).neg());
            assert_eq!(x.coefficient(2, p).unwrap(), sample(&r, p, 0).mul(&sample(&r, p - 1, 0)));
        }
        assert_eq!(x.coefficient(3, 0), None);
        let bad = op(&r, vec![(0, Coefficient::Uniform(scalar(&r, c(&r, 2))))], None);
        assert!(pdo_invert(&bad, 2).is_err());
        let positive = PseudoDiffOp::shift(2, &r, 1).add(&id);
        assert!(pdo_invert(&positive, 2).is_err());
    }

    fn family(r: &Arc<PolyRing>, sigma: i64, ps: std::ops::RangeInclusive<i64>, salt: i64) -> WaveSymbolFamily {
        let entries = ps
            .map(|p| {
                let m = LaurentMatrix::from_fn(2, |a, b| {
                    let lo = LaurentPolynomial::monomial(sample(r, p, salt).get(a, b).clone(), Symbol::Z, -1, 4);
                    let hi = LaurentPolynomial::monomial(c(r, (a + b) as i64 + p), Symbol::Z, 0, 4);
                    &lo + &hi
                });
                (p, m)
            })
            .collect();
        WaveSymbolFamily::new(2, r, Symbol::Z, 4, sigma, entries).unwrap()
    }

    #[test]
    fn application_examples() {
        let r = ring();
        // Constant reduced matrix: F(p) = z^p M.
        let m = LaurentMatrix::from_fn(2, |a, b| LaurentPolynomial::monomial(c(&r, (a * b) as i64), Symbol::Z, -1, 4));
        let f = WaveSymbolFamily::new(2, &r, Symbol::Z, 4, 1, (-3..=3).map(|p| (p, m.clone())).collect()).unwrap();
        let sf = pdo_apply(&PseudoDiffOp::shift(2, &r, 1), &f).unwrap();
        assert_eq!(sf.p_values(), (-4..=2).collect::<Vec<_>>());
        for p in sf.p_values() {
            assert_eq!(sf.get(p).unwrap(), &m.shift(Symbol::Z, 1));
        }
        let g = family(&r, 1, -3..=3, 0);
        assert_eq!(pdo_apply(&PseudoDiffOp::identity(2, &r), &g).unwrap(), g);
        let u = op(&r, vec![(0, table(&r, -3..=3, 2))], None);
        let ug = pdo_apply(&u, &g).unwrap();
        for p in -3..=3 {
            assert_eq!(ug.get(p).unwrap(), &g.get(p).unwrap().left_mul(&sample(&r, p, 2)));
        }
        let dag = family(&r, -1, -3..=3, 4);
        assert_eq!(pdo_left_apply(&dag, &PseudoDiffOp::identity(2, &r)).unwrap(), dag);
        let w = op(&r, vec![(1, table(&r, -3..=3, 1))], None);
        let dw = pdo_left_apply(&dag, &w).unwrap();
        assert_eq!(dw.p_values(), (-4..=2).collect::<Vec<_>>());
        for p in dw.p_values() {
            let expect = dag.get(p + 1).unwrap().right_mul(&sample(&r, p + 1, 1)).shift(Symbol::Z, -1);
            assert_eq!(dw.get(p).unwrap(), &expect);
        }
        let tiny = WaveSymbolFamily::new(2, &r, Symbol::Z, 4, 1, [(0, m)].into_iter().collect()).unwrap();
        assert!(matches!(pdo_apply(&w.add(&PseudoDiffOp::identity(2, &r)), &tiny), Err(Error::Window { .. })));
    }

    fn trace_pairing(f: &WaveSymbolFamily, g: &WaveSymbolFamily) -> TimePolynomial {
        let mut acc = TimePolynomial::zero(f.ring());
        for (p, m) in f.entries() {
            if let Some(x) = g.get(*p) {
                let prod = m.mul(x);
                for a in 1..=f.dim() {
                    acc += &prod.get(a, a).coeff(-1);
                }
            }
        }
        acc
    }

    #[test]
    fn residue_pairing_is_adjoint() {
        let r = ring();
        // Families supported on p in -1..=1 inside a zero-padded window.
        let pad = |fam: WaveSymbolFamily| {
            let mut e = fam.entries().clone();
            for p in -8..=8 {
                e.entry(p).or_insert_with(|| fam.zero_matrix());
            }
            fam.with_entries(e)
        };
        let f = pad(family(&r, 1, -1..=1, 0));
        let g = pad(family(&r, -1, -1..=1, 7));
        let a = op(
            &r,
            vec![(-1, table(&r, -9..=9, 1)), (0, table(&r, -9..=9, 2)), (2, table(&r, -9..=9, 3))],
            None,
        );
        let lhs = trace_pairing(&pdo_apply(&a, &f).unwrap(), &g);
        let rhs = trace_pairing(&f, &pdo_left_apply(&g, &a).unwrap());
        assert!(!lhs.is_zero());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn text_dump() {
        let r = PolyRing::weighted(1, 1, 2).unwrap();
        let a = PseudoDiffOp::from_terms(
            1,
            &r,
            [(1, Coefficient::Table([(0, MatrixSeries::identity(1, &r))].into_iter().collect()))]
                .into_iter()
                .collect(),
            Some(2),
        )
        .unwrap()
        .add(&PseudoDiffOp::shift(1, &r, 1));
        assert_eq!(a.to_text(), "# known through e^(-2 d_p)\ne^(1 d_p) [all p]: [[1]]\ne^(-1 d_p) [p=0]: [[1]]\n");
    }

    // Random p-tabulated operators over p in -10..=10.
    fn arb_matrix(r: Arc<PolyRing>) -> impl Strategy<Value = MatrixSeries> {
        prop::collection::vec((-3i64..=3, -2i64..=2), 4).prop_map(move |v| {
            let mut it = v.into_iter();
            MatrixSeries::from_fn(2, |a, _| {
                let (x, y) = it.next().unwrap();
                &c(&r, x) + &(&c(&r, y) * &t(&r, a, 1))
            })
        })
    }

    fn arb_op(kmin: i64, kmax: i64, unipotent: bool) -> impl Strategy<Value = PseudoDiffOp> {
        let r = ring();
        let cells = ((kmax - kmin + 1) * 21) as usize;
        prop::collection::vec(arb_matrix(r.clone()), cells).prop_map(move |ms| {
            let mut it = ms.into_iter();
            let mut terms = BTreeMap::new();
            for k in kmin..=kmax {
                let tab: BTreeMap<i64, MatrixSeries> = (-10..=10)
                    .map(|p| {
                        let m = it.next().unwrap();
                        (p, if unipotent && k == 0 { MatrixSeries::identity(2, &r) } else { m })
                    })
                    .collect();
                terms.insert(k, Coefficient::Table(tab));
            }
            PseudoDiffOp::from_terms(2, &r, terms, Some(kmax)).unwrap()
        })
    }

    fn arb_family(sigma: i64) -> impl Strategy<Value = WaveSymbolFamily> {
        let r = ring();
        prop::collection::vec(arb_matrix(r.clone()), 21).prop_map(move |ms| {
            let entries = ms
                .into_iter()
                .zip(-10..=10)
                .map(|(m, p)| (p, LaurentMatrix::from_series(&m, Symbol::Z, 6).shift(Symbol::Z, -1)))
                .collect();
            WaveSymbolFamily::new(2, &r, Symbol::Z, 6, sigma, entries).unwrap()
        })
    }

    /// Families compared on common `p` at z-exponents `>= floor`, the range
    /// untouched by operator truncation.
    fn agree_above(l: &WaveSymbolFamily, r: &WaveSymbolFamily, floor: i32) -> usize {
        let cut = |m: &LaurentMatrix| m.map(|x| x.filter(|e, _| e[0] >= floor));
        let mut common = 0;
        for (p, m) in l.entries() {
            if let Some(x) = r.get(*p) {
                assert_eq!(cut(m), cut(x), "p={p}");
                common += 1;
            }
        }
        common
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mul_is_associative(a in arb_op(-1, 2, false), b in arb_op(0, 2, false), c in arb_op(-1, 1, false)) {
            let l = pdo_mul(&pdo_mul(&a, &b), &c);
            let r = pdo_mul(&a, &pdo_mul(&b, &c));
            prop_assert!(agree(&l, &r, -10..=10) > 0);
        }

        #[test]
        fn inverse_round_trips(a in arb_op(0, 3, true)) {
            let x = pdo_invert(&a, 3).unwrap();
            let id = PseudoDiffOp::identity(2, a.ring());
            prop_assert!(agree(&pdo_mul(&a, &x), &id, -10..=10) > 0);
            prop_assert!(agree(&pdo_mul(&x, &a), &id, -10..=10) > 0);
            prop_assert!(agree(&pdo_invert(&x, 3).unwrap(), &a, -10..=10) > 0);
        }

        #[test]
        fn apply_is_a_module_action(a in arb_op(-1, 1, false), b in arb_op(0, 2, false), f in arb_family(1)) {
            let l = pdo_apply(&a, &pdo_apply(&b, &f).unwrap()).unwrap();
            let r = pdo_apply(&pdo_mul(&a, &b), &f).unwrap();
            let floor = -1 - pdo_mul(&a, &b).order().unwrap() as i32;
            prop_assert!(agree_above(&l, &r, floor) > 0);
        }

        #[test]
        fn left_apply_is_compatible(a in arb_op(-1, 1, false), b in arb_op(0, 2, false), f in arb_family(-1)) {
            let l = pdo_left_apply(&f, &pdo_mul(&a, &b)).unwrap();
            let r = pdo_left_apply(&pdo_left_apply(&f, &a).unwrap(), &b).unwrap();
            let floor = -1 - pdo_mul(&a, &b).order().unwrap() as i32;
            prop_assert!(agree_above(&l, &r, floor) > 0);
        }

        #[test]
        fn shift_acts_as_spectral_multiplication(m in -3i64..=3, f in arb_family(1)) {
            // Constant reduced matrices, so F(p) = z^p M.
            let m0 = f.get(0).unwrap().clone();
            let f = f.map(|_, _| m0.clone());
            let s = pdo_apply(&PseudoDiffOp::shift(2, f.ring(), m), &f).unwrap();
            for x in s.entries().values() {
                prop_assert_eq!(x, &m0.shift(Symbol::Z, m as i32));
            }
        }
    }
}
