use std::collections::BTreeMap;

use super::data::{transfer_all, Hierarchy};
use super::residual::{Residual, Tally};
use super::wave::{
    baker_akhiezer, build_wave_operator, dressed_shift, flow_generator, lax_operator, Construction, Flow,
};
use crate::algebra::{schur, schur_derivative_series, xi_alphabet, Grading, PolyRing, Sign, TimePolynomial, TimeVar};
use crate::error::{Error, Result};
use crate::psdo::{
    pdo_apply, pdo_commutator, pdo_left_apply, pdo_mul, pdo_project, Coefficient, MatrixSeries,
    PseudoDiffOp, WaveSymbolFamily,
};

/// Which side of the linear problem: `Psi` or the adjoint `Psi^dag`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Psi,
    Adjoint,
}

impl Direction {
    fn label(self) -> &'static str {
        match self {
            Direction::Psi => "psi",
            Direction::Adjoint => "psi-dag",
        }
    }
}

/// The four differential Fay identities, indices 1-based and distinct.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HirotaEquation {
    H8 { alpha: usize, beta: usize, gamma: usize },
    H9 { alpha: usize, beta: usize },
    H10 { alpha: usize, beta: usize },
    H11 { alpha: usize, gamma: usize },
}

impl HirotaEquation {
    fn indices(self) -> Vec<usize> {
        match self {
            HirotaEquation::H8 { alpha, beta, gamma } => vec![alpha, beta, gamma],
            HirotaEquation::H9 { alpha, beta } | HirotaEquation::H10 { alpha, beta } => vec![alpha, beta],
            HirotaEquation::H11 { alpha, gamma } => vec![alpha, gamma],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HirotaEquation::H8 { .. } => "hirota-h8",
            HirotaEquation::H9 { .. } => "hirota-h9",
            HirotaEquation::H10 { .. } => "hirota-h10",
            HirotaEquation::H11 { .. } => "hirota-h11",
        }
    }
}

fn d1(c: usize) -> TimeVar {
    TimeVar::new(c, 1)
}

fn mulc(a: &TimePolynomial, b: &TimePolynomial, cap: i64) -> TimePolynomial {
    a.mul_capped(b, cap.max(0) as u32)
}

fn check_components(h: &Hierarchy, idx: &[usize]) -> Result<()> {
    let n = h.components();
    for &i in idx {
        if i == 0 || i > n {
            return Err(Error::config(format!("component index {i} outside 1..={n}")));
        }
    }
    Ok(())
}

fn tally_family(t: &mut Tally, f: &WaveSymbolFamily, lo: i32, hi: i32, cap: impl Fn(i32) -> i64) {
    let n = f.dim();
    for (p, m) in f.entries() {
        for a in 1..=n {
            for b in 1..=n {
                let l = m.get(a, b);
                for e in lo..=hi {
                    t.poly(&l.coeff(e), cap(e), || format!("p={p} ({a},{b}) z^{e}"));
                }
            }
        }
    }
}

fn tally_matrix(t: &mut Tally, m: &MatrixSeries, cap: i64, label: impl Fn(usize, usize) -> String) {
    let n = m.dim();
    for a in 1..=n {
        for b in 1..=n {
            t.poly(m.get(a, b), cap, || label(a, b));
        }
    }
}

/// Compares every known coefficient at shifts `lo..=hi` over `ps`.
fn tally_operator(t: &mut Tally, op: &PseudoDiffOp, ps: &[i64], lo: i64, hi: i64, cap: impl Fn(i64) -> i64) {
    for k in lo..=hi {
        for &p in ps {
            if let Some(c) = op.coefficient(k, p) {
                tally_matrix(t, &c, cap(k), |a, b| format!("p={p} shift {k} ({a},{b})"));
            }
        }
    }
}

/// Every `p` for which some operator coefficient is tabulated, plus the
/// hierarchy's own range.
fn operator_ps(h: &Hierarchy, ops: &[&PseudoDiffOp]) -> Vec<i64> {
    let mut ps: std::collections::BTreeSet<i64> = h.p_values().into_iter().collect();
    for op in ops {
        for (_, c) in op.terms() {
            if let Some(d) = c.domain() {
                ps.extend(d);
            }
        }
    }
    ps.into_iter().collect()
}

/// `w^(1) + v^(1) = 0`, exact through degree `D - 1`.
pub fn first_coefficient_antisymmetry_check(h: &Hierarchy) -> Result<Residual> {
    let d = i64::from(h.degree());
    let c = h.coefficients();
    let mut t = Tally::new("antisymmetry", "w1 + v1", format!("degree <= {}", d - 1));
    for p in h.p_values() {
        if let (Some(w), Some(v)) = (c.w(p, 1), c.v(p, 1)) {
            tally_matrix(&mut t, &w.add(v), d - 1, |a, b| format!("p={p} ({a},{b})"));
        }
    }
    t.finish_nonempty()
}

/// The Miwa-quotient and coefficient-series forms of `chi` and `chi^dag`
/// agree on `z^-Z..z^0`.
pub fn check_ba_constructions(h: &Hierarchy) -> Result<Residual> {
    let (d, z) = (i64::from(h.degree()), h.z_max() as i32);
    let mut t = Tally::new(
        "ba-constructions",
        "direct vs series",
        format!("z^e, -{z} <= e <= 0, degree <= D + e"),
    );
    for adjoint in [false, true] {
        let direct = baker_akhiezer(h, adjoint, Construction::Direct)?;
        let series = baker_akhiezer(h, adjoint, Construction::Series)?;
        tally_family(&mut t, &direct.family.sub(&series.family), -z, 0, |e| d + i64::from(e));
    }
    t.finish_nonempty()
}

/// `W W^-1 = I` with the closed-form inverse, and the closed-form inverse
/// against the order-by-order one.
pub fn check_wave_inverse(h: &Hierarchy) -> Result<Vec<Residual>> {
    let d = i64::from(h.degree());
    let k = h.k_trunc() as i64;
    let wave = build_wave_operator(h)?;
    let region = format!("shifts 0..={k}, degree <= D - shift");
    let prod = pdo_mul(&wave.w, &wave.inverse_closed).sub(&PseudoDiffOp::identity(h.components(), h.ring()));
    let diff = wave.inverse_closed.sub(&wave.inverse_generic);
    let mut out = Vec::new();
    for (name, op) in [("wave-inverse", &prod), ("inverse-agreement", &diff)] {
        let mut t = Tally::new(name, format!("K_trunc={k}"), region.clone());
        let ps = operator_ps(h, &[&wave.w, &wave.inverse_closed, &wave.inverse_generic]);
        tally_operator(&mut t, op, &ps, 0, k, |s| d - s);
        out.push(t.finish_nonempty()?);
    }
    Ok(out)
}

/// Residue of the bilinear identity between charges `p` and `p - n` for
/// the `(alpha, beta)` entry, on the doubled alphabet `(t, t')`.
pub fn check_bilinear_identity(h: &Hierarchy, n: usize, alpha: usize, beta: usize) -> Result<Residual> {
    check_components(h, &[alpha, beta])?;
    let nc = h.components();
    let d = h.degree() as i64;
    let z = h.z_max() as i64;
    let ni = n as i64;
    let delta = |a: usize, b: usize| i64::from(a == b);
    let s_of = |g: usize| ni + delta(alpha, g) + delta(beta, g) - 2;
    let s_max = (1..=nc).map(s_of).max().unwrap_or(0);
    let dc = d.min(z) - 1 - s_max;
    if dc < 0 {
        return Err(Error::window(
            format!("bilinear identity at n = {n} leaves no exact degrees"),
            format!("D and Z_max of at least {}", s_max + 1),
        ));
    }
    let ring2 = PolyRing::new(nc, h.ring().max_order(), 2, Grading::Weighted, dc as u32)?;
    let mut t = Tally::new(
        "bilinear",
        format!("n={n} alpha={alpha} beta={beta}"),
        format!("combined (t, t') degree <= {dc}"),
    );
    let z_us = z as usize;
    for p in h.p_values() {
        let q = p - ni;
        if !h.contains(q) {
            continue;
        }
        let mut acc = TimePolynomial::zero(&ring2);
        for g in 1..=nc {
            let s = s_of(g);
            let a = transfer_all(&h.shifted(p, alpha, g, g, Sign::Minus, z_us), &ring2, 0);
            let b = transfer_all(&h.shifted(q, g, beta, g, Sign::Plus, z_us), &ring2, 1);
            let x = schur(&ring2, dc as usize, &xi_alphabet(&ring2, g, Sign::Plus, true)?);
            let mut term = TimePolynomial::zero(&ring2);
            for (k1, ak) in a.iter().enumerate() {
                if ak.is_zero() {
                    continue;
                }
                for (k2, bk) in b.iter().enumerate() {
                    let j = k1 as i64 + k2 as i64 - s - 1;
                    if j < 0 || j > dc || bk.is_zero() {
                        continue;
                    }
                    let ab = ak.mul_capped(bk, dc as u32);
                    term += &x[j as usize].mul_capped(&ab, dc as u32);
                }
            }
            let sign = h.eps(alpha, g, p) * h.eps(beta, g, q);
            term = term.scale(&crate::algebra::Rational::from_integer(sign.into()));
            acc += &term;
        }
        t.poly(&acc, dc, || format!("p={p}"));
    }
    t.finish_nonempty()
}

/// `Res_z Psi^p(t) Psi^{dag p-n}(t') = 0` in the reduced form, for all
/// matrix entries.
pub fn check_ba_bilinear_pairing(h: &Hierarchy, n: usize) -> Result<Residual> {
    let nc = h.components();
    let d = h.degree() as i64;
    let z = h.z_max() as i64;
    let ni = n as i64;
    let dc = d.min(z) - ni - 1;
    if dc < 0 {
        return Err(Error::window(
            format!("wave-function pairing at n = {n} leaves no exact degrees"),
            format!("D and Z_max of at least {}", ni + 1),
        ));
    }
    let chi = baker_akhiezer(h, false, Construction::Direct)?;
    let chd = baker_akhiezer(h, true, Construction::Direct)?;
    let ring2 = PolyRing::new(nc, h.ring().max_order(), 2, Grading::Weighted, dc as u32)?;
    let xs: Vec<Vec<TimePolynomial>> = (1..=nc)
        .map(|g| Ok(schur(&ring2, dc as usize, &xi_alphabet(&ring2, g, Sign::Plus, true)?)))
        .collect::<Result<_>>()?;
    let coeffs = |l: &crate::algebra::LaurentPolynomial, copy: u8| -> Vec<TimePolynomial> {
        (0..=z)
            .map(|k| l.coeff(-(k as i32)).transfer(&ring2, 0, copy))
            .collect()
    };
    let mut t = Tally::new("ba-pairing", format!("n={n}"), format!("combined (t, t') degree <= {dc}"));
    for p in h.p_values() {
        let q = p - ni;
        let (Some(m1), Some(m2)) = (chi.family.get(p), chd.family.get(q)) else {
            continue;
        };
        for a in 1..=nc {
            for b in 1..=nc {
                let mut acc = TimePolynomial::zero(&ring2);
                for g in 1..=nc {
                    let u = coeffs(m1.get(a, g), 0);
                    let v = coeffs(m2.get(g, b), 1);
                    for (k1, x1) in u.iter().enumerate() {
                        for (k2, x2) in v.iter().enumerate() {
                            let j = k1 as i64 + k2 as i64 - ni - 1;
                            if j < 0 || j > dc || x1.is_zero() || x2.is_zero() {
                                continue;
                            }
                            acc += &xs[g - 1][j as usize].mul_capped(&x1.mul_capped(x2, dc as u32), dc as u32);
                        }
                    }
                }
                t.poly(&acc, dc, || format!("p={p} ({a},{b})"));
            }
        }
    }
    t.finish_nonempty()
}

/// One of the differential Fay identities at every `p` of the table,
/// coefficient by coefficient in the spectral parameters.
pub fn check_hirota(h: &Hierarchy, eq: HirotaEquation) -> Result<Residual> {
    let idx = eq.indices();
    check_components(h, &idx)?;
    for (i, a) in idx.iter().enumerate() {
        if idx[i + 1..].contains(a) {
            return Err(Error::config(format!("{} needs distinct indices, got {idx:?}", eq.name())));
        }
    }
    let d = h.degree() as i64;
    let z = h.z_max() as i64;
    let zu = z as usize;
    let params = format!("{idx:?}");
    let mut t;
    match eq {
        HirotaEquation::H8 { alpha, beta, gamma } => {
            t = Tally::new(eq.name(), params, "mu^-k, 0 <= k <= Z_max, degree <= D - 1 - k");
            for p in h.p_values() {
                let tau = h.tau(p, alpha, alpha);
                let dtau = tau.derivative(d1(gamma));
                let bs = h.shifted(p, alpha, beta, beta, Sign::Minus, zu);
                let cs = h.shifted(p, gamma, beta, beta, Sign::Minus, zu);
                let c = h.eps(alpha, gamma, p) * h.eps(gamma, beta, p) * h.eps(alpha, beta, p);
                let tag = h.tau(p, alpha, gamma);
                for k in 0..=zu {
                    let cap = d - 1 - k as i64;
                    if cap < 0 {
                        break;
                    }
                    let mut r = &mulc(&bs[k], &dtau, cap) - &mulc(tau, &bs[k].derivative(d1(gamma)), cap);
                    r += &mulc(tag, &cs[k], cap).scale(&crate::algebra::Rational::from_integer(c.into()));
                    t.poly(&r, cap, || format!("p={p} mu^-{k}"));
                }
            }
        }
        HirotaEquation::H9 { alpha, beta } => {
            t = Tally::new(
                eq.name(),
                params,
                format!("mu^-i nu^e, 0 <= i <= {z}, {} <= e <= 1, degree <= D - 1 - i + e", 1 - z),
            );
            for p in h.p_values() {
                let tab = h.tau(p, alpha, beta);
                let a = h.shifted(p, alpha, alpha, alpha, Sign::Minus, zu);
                let b = h.shifted(p, alpha, beta, beta, Sign::Minus, zu);
                let g: Vec<Vec<TimePolynomial>> =
                    a.iter().map(|x| schur_derivative_series(x, 0, beta, Sign::Minus, zu)).collect();
                for i in 0..=zu {
                    for e in (1 - z)..=1 {
                        let cap = d - 1 - i as i64 + e;
                        if cap < 0 {
                            continue;
                        }
                        let mut r = TimePolynomial::zero(h.ring());
                        if e <= 0 {
                            let j = (-e) as usize;
                            r += &mulc(&b[j].derivative(d1(beta)), &a[i], cap);
                            r -= &mulc(&a[i].derivative(d1(beta)), &b[j], cap);
                        }
                        let j = (1 - e) as usize;
                        r += &mulc(&b[j], &a[i], cap);
                        r -= &mulc(tab, &g[i][j], cap);
                        t.poly(&r, cap, || format!("p={p} mu^-{i} nu^{e}"));
                    }
                }
            }
        }
        HirotaEquation::H10 { alpha, beta } => {
            t = Tally::new(
                eq.name(),
                params,
                format!("mu^e nu^-j, {} <= e <= 1, 0 <= j <= {z}, degree <= D - 1 + e - j", 1 - z),
            );
            for p in h.p_values() {
                let tau = h.tau(p, alpha, alpha);
                let a = h.shifted(p, alpha, alpha, alpha, Sign::Minus, zu);
                let b = h.shifted(p, alpha, beta, beta, Sign::Minus, zu);
                let g: Vec<Vec<TimePolynomial>> = h
                    .shifted(p, alpha, beta, alpha, Sign::Minus, zu)
                    .iter()
                    .map(|x| schur_derivative_series(x, 0, beta, Sign::Minus, zu))
                    .collect();
                for e in (1 - z)..=1 {
                    for j in 0..=zu {
                        let cap = d - 1 + e - j as i64;
                        if cap < 0 {
                            continue;
                        }
                        let mut r = TimePolynomial::zero(h.ring());
                        if e <= 0 {
                            let i = (-e) as usize;
                            r += &mulc(&b[j].derivative(d1(alpha)), &a[i], cap);
                            r -= &mulc(&a[i].derivative(d1(alpha)), &b[j], cap);
                        }
                        let i = (1 - e) as usize;
                        r -= &mulc(&b[j], &a[i], cap);
                        r += &mulc(tau, &g[i][j], cap);
                        t.poly(&r, cap, || format!("p={p} mu^{e} nu^-{j}"));
                    }
                }
            }
        }
        HirotaEquation::H11 { alpha, gamma } => {
            t = Tally::new(eq.name(), params, format!("mu^e, -{z} <= e <= 0, degree <= D - 1 + e"));
            for p in h.p_values() {
                let tau = h.tau(p, alpha, alpha);
                let dtau = tau.derivative(d1(gamma));
                let a = h.shifted(p, alpha, alpha, alpha, Sign::Minus, zu);
                let c = h.shifted(p, gamma, alpha, alpha, Sign::Minus, zu);
                let tag = h.tau(p, alpha, gamma);
                for k in 0..=zu {
                    let cap = d - 1 - k as i64;
                    if cap < 0 {
                        break;
                    }
                    let mut r = &mulc(&a[k].derivative(d1(gamma)), tau, cap) - &mulc(&dtau, &a[k], cap);
                    if k >= 1 {
                        r += &mulc(tag, &c[k - 1], cap);
                    }
                    t.poly(&r, cap, || format!("p={p} mu^-{k}"));
                }
            }
        }
    }
    t.finish_nonempty()
}

/// `w^(1)(p)` straight from the tau quotients: `-d_{a,1} tau / tau` on the
/// diagonal, `eps_ab tau_ab / tau` off it; exact through `D - 1`.
fn first_coefficient_from_tau(h: &Hierarchy, p: i64) -> MatrixSeries {
    let cap = h.degree().saturating_sub(1);
    let inv = h.inv_tau(p);
    MatrixSeries::from_fn(h.components(), |a, b| {
        if a == b {
            -&h.tau(p, a, a).derivative(d1(a)).mul_capped(inv, cap)
        } else {
            h.tau(p, a, b).mul_capped(inv, cap).scale(&h.eps_rat(a, b, p))
        }
    })
}

/// `e^{d_p} + w^(1)(p) - w^(1)(p+1)`, tabulated where `p + 1` is known.
fn first_flow_operator(h: &Hierarchy) -> Result<PseudoDiffOp> {
    let c = h.coefficients();
    let mut u = BTreeMap::new();
    for p in h.p_values() {
        if let (Some(a), Some(b)) = (c.w(p, 1), c.w(p + 1, 1)) {
            u.insert(p, a.sub(b));
        }
    }
    let n = h.components();
    let mut terms = BTreeMap::new();
    terms.insert(-1, Coefficient::Uniform(MatrixSeries::identity(n, h.ring())));
    terms.insert(0, Coefficient::Table(u));
    PseudoDiffOp::from_terms(n, h.ring(), terms, None)
}

/// The first linear problem in operator form, `d_{t1} Psi = (e^{d_p} + u) Psi`
/// (or the adjoint), through `z^{1-Z}..z^1`.
pub fn check_linear_problem_t1(h: &Hierarchy, dir: Direction) -> Result<Residual> {
    let d = i64::from(h.degree());
    let z = h.z_max() as i32;
    let a1 = first_flow_operator(h)?;
    let sym = crate::algebra::Symbol::Z;
    let r = match dir {
        Direction::Psi => {
            let chi = baker_akhiezer(h, false, Construction::Direct)?.family;
            let lhs = chi.map(|_, m| m.map(|x| x.d_t1()).add(&m.shift(sym, 1)));
            lhs.sub(&pdo_apply(&a1, &chi)?)
        }
        Direction::Adjoint => {
            let chi = baker_akhiezer(h, true, Construction::Direct)?.family;
            let lhs = chi.map(|_, m| m.shift(sym, 1).sub(&m.map(|x| x.d_t1())));
            lhs.sub(&pdo_left_apply(&chi, &a1.shift_argument(-1))?)
        }
    };
    let mut t = Tally::new(
        "linear-t1",
        dir.label(),
        format!("z^e, {} <= e <= 1, degree <= D - 1 + e", 1 - z),
    );
    tally_family(&mut t, &r, 1 - z, 1, |e| d - 1 + i64::from(e));
    t.finish_nonempty()
}

/// The same linear problem entry by entry, with `w^(1)` taken from the tau
/// quotients and `Psi^{p+1}` (resp. `Psi^{dag p}`) isolated.
pub fn check_linear_problem_components(h: &Hierarchy, dir: Direction) -> Result<Residual> {
    let n = h.components();
    let d = i64::from(h.degree());
    let z = h.z_max() as i32;
    let adjoint = dir == Direction::Adjoint;
    let chi = baker_akhiezer(h, adjoint, Construction::Direct)?.family;
    let mut t = Tally::new(
        "linear-components",
        dir.label(),
        format!("z^e, {} <= e <= 1, degree <= D - 1 + e", 1 - z),
    );
    for p in h.p_values() {
        let (Some(m0), Some(m1)) = (chi.get(p), chi.get(p + 1)) else {
            continue;
        };
        let dw = first_coefficient_from_tau(h, p + 1).sub(&first_coefficient_from_tau(h, p));
        for a in 1..=n {
            for b in 1..=n {
                for e in (1 - z)..=1 {
                    let cap = d - 1 + i64::from(e);
                    if cap < 0 {
                        continue;
                    }
                    let r = if !adjoint {
                        // z chi^{p+1} - d chi^p - z chi^p - sum dw_ag chi^p_gb
                        let mut r = &m1.get(a, b).coeff(e - 1) - &m0.get(a, b).coeff(e).d_t1();
                        r -= &m0.get(a, b).coeff(e - 1);
                        for g in 1..=n {
                            r -= &mulc(dw.get(a, g), &m0.get(g, b).coeff(e), cap);
                        }
                        r
                    } else {
                        // z chi^p - z chi^{p+1} + d chi^{p+1} - sum chi^{p+1}_ag dw_gb
                        let mut r = &m0.get(a, b).coeff(e - 1) - &m1.get(a, b).coeff(e - 1);
                        r += &m1.get(a, b).coeff(e).d_t1();
                        for g in 1..=n {
                            r -= &mulc(&m1.get(a, g).coeff(e), dw.get(g, b), cap);
                        }
                        r
                    };
                    t.poly(&r, cap, || format!("p={p} ({a},{b}) z^{e}"));
                }
            }
        }
    }
    t.finish_nonempty()
}

/// The first linear problem cleared of denominators: bilinear relations
/// between `tau^p` and `tau^{p+1}` for every entry.
pub fn check_linear_problem_tau(h: &Hierarchy) -> Result<Residual> {
    let n = h.components();
    let d = i64::from(h.degree());
    let z = h.z_max() as i64;
    let zu = z as usize;
    let rat = |x: i64| crate::algebra::Rational::from_integer(x.into());
    let mut t = Tally::new(
        "linear-tau",
        "off-diagonal and diagonal",
        format!(
            "off-diagonal z^e, {} <= e <= 1, degree <= D - 1 + e; diagonal z^e, {} <= e <= 2, degree <= D - 2 + e",
            1 - z,
            2 - z
        ),
    );
    let at = |s: &[TimePolynomial], k: i64| -> Option<TimePolynomial> {
        (0..=z).contains(&k).then(|| s[k as usize].clone())
    };
    for p in h.p_values() {
        if !h.contains(p + 1) {
            continue;
        }
        let t0 = h.tau(p, 1, 1);
        let t1 = h.tau(p + 1, 1, 1);
        for a in 1..=n {
            let dt1 = t1.derivative(d1(a));
            for b in 1..=n {
                if a != b {
                    let s_tau0 = h.shifted(p, b, b, b, Sign::Minus, zu);
                    let s_tau1ab = h.shifted(p + 1, a, b, b, Sign::Minus, zu);
                    let s_tau0ab = h.shifted(p, a, b, b, Sign::Minus, zu);
                    let others: Vec<(usize, Vec<TimePolynomial>)> = (1..=n)
                        .filter(|&g| g != a && g != b)
                        .map(|g| (g, h.shifted(p, g, b, b, Sign::Minus, zu)))
                        .collect();
                    let e1 = rat(h.eps(a, b, p + 1));
                    let e0 = rat(h.eps(a, b, p));
                    for e in (1 - z)..=1 {
                        let cap = d - 1 + e;
                        if cap < 0 {
                            continue;
                        }
                        let mut r = TimePolynomial::zero(h.ring());
                        if let (Some(x), Some(y)) = (at(&s_tau0, 1 - e), at(&s_tau1ab, 1 - e)) {
                            let v = &mulc(h.tau(p + 1, a, b), &x, cap) - &mulc(t0, &y, cap);
                            r += &v.scale(&e1);
                        }
                        if let Some(x) = at(&s_tau0ab, -e) {
                            let v = &mulc(&x.derivative(d1(a)), t1, cap) - &mulc(&dt1, &x, cap);
                            r += &v.scale(&e0);
                            for (g, s) in &others {
                                let c = rat(h.eps(a, *g, p + 1) * h.eps(*g, b, p));
                                r += &mulc(h.tau(p + 1, a, *g), &s[(-e) as usize], cap).scale(&c);
                            }
                        }
                        t.poly(&r, cap, || format!("p={p} ({a},{b}) z^{e}"));
                    }
                } else {
                    let s0 = h.shifted(p, a, a, a, Sign::Minus, zu);
                    let s1 = h.shifted(p + 1, a, a, a, Sign::Minus, zu);
                    let others: Vec<(usize, Vec<TimePolynomial>)> = (1..=n)
                        .filter(|&g| g != a)
                        .map(|g| (g, h.shifted(p, g, a, a, Sign::Minus, zu)))
                        .collect();
                    for e in (2 - z)..=2 {
                        let cap = d - 2 + e;
                        if cap < 0 {
                            continue;
                        }
                        let mut r = TimePolynomial::zero(h.ring());
                        if let (Some(x), Some(y)) = (at(&s0, 2 - e), at(&s1, 2 - e)) {
                            r += &(&mulc(t1, &x, cap) - &mulc(&y, t0, cap));
                        }
                        if let Some(x) = at(&s0, 1 - e) {
                            r += &(&mulc(t1, &x.derivative(d1(a)), cap) - &mulc(&dt1, &x, cap));
                        }
                        if (0..=z).contains(&(-e)) {
                            for (g, s) in &others {
                                let c = rat(h.eps(a, *g, p + 1) * h.eps(*g, a, p));
                                r += &mulc(h.tau(p + 1, a, *g), &s[(-e) as usize], cap).scale(&c);
                            }
                        }
                        t.poly(&r, cap, || format!("p={p} ({a},{a}) z^{e}"));
                    }
                }
            }
        }
    }
    t.finish_nonempty()
}

fn flow_derivative(flow: Flow, m: usize) -> impl Fn(&TimePolynomial) -> TimePolynomial + Clone {
    move |x: &TimePolynomial| match flow {
        Flow::Component(a) => x.derivative(TimeVar::new(a, m)),
        Flow::Matrix => x.d_tm(m),
    }
}

/// `d_{a,m} Psi = A Psi` with `A = (W E_a e^{m d_p} W^-1)_+`, or the adjoint
/// `d_{a,m} Psi^dag = -Psi^dag A`, through `z^{m-Z}..z^m`.
pub fn check_flow_equation(h: &Hierarchy, flow: Flow, m: usize, dir: Direction) -> Result<Residual> {
    flow.validate(h, m)?;
    let d = i64::from(h.degree());
    let z = h.z_max() as i32;
    let mi = m as i32;
    let wave = build_wave_operator(h)?;
    let a = flow_generator(h, &wave, flow, m)?;
    let e = flow.unit(h.components(), h.ring());
    let dt = flow_derivative(flow, m);
    let sym = crate::algebra::Symbol::Z;
    let r = match dir {
        Direction::Psi => {
            let chi = baker_akhiezer(h, false, Construction::Direct)?.family;
            let lhs = chi.map(|_, x| x.map(|c| c.map(&dt)).add(&x.shift(sym, mi).right_mul(&e)));
            lhs.sub(&pdo_apply(&a, &chi)?)
        }
        Direction::Adjoint => {
            let chi = baker_akhiezer(h, true, Construction::Direct)?.family;
            let lhs = chi.map(|_, x| x.shift(sym, mi).left_mul(&e).sub(&x.map(|c| c.map(&dt))));
            lhs.sub(&pdo_left_apply(&chi, &a.shift_argument(-1))?)
        }
    };
    let mut t = Tally::new(
        "flow",
        format!("{} m={m} {}", flow.label(), dir.label()),
        format!("z^e, {} <= e <= {m}, degree <= D - {m} + e", mi - z),
    );
    tally_family(&mut t, &r, mi - z, mi, |x| d - m as i64 + i64::from(x));
    t.finish_nonempty()
}

/// `d_{a,m} W = -(W E_a e^{m d_p} W^-1)_- W` through shift order
/// `K_trunc - m`.
pub fn check_sato_equation(h: &Hierarchy, flow: Flow, m: usize) -> Result<Residual> {
    flow.validate(h, m)?;
    let d = i64::from(h.degree());
    let k = h.k_trunc() as i64;
    let mi = m as i64;
    let wave = build_wave_operator(h)?;
    let minus = pdo_project(&dressed_shift(h, &wave, flow, m)?, false);
    let r = wave.w.map(move |x| x.map(flow_derivative(flow, m))).add(&pdo_mul(&minus, &wave.w));
    let mut t = Tally::new(
        "sato",
        format!("{} m={m}", flow.label()),
        format!("shifts 0..={}, degree <= D - shift - {m}", k - mi),
    );
    let ps = operator_ps(h, &[&wave.w]);
    tally_operator(&mut t, &r, &ps, 0, k - mi, |j| d - j - mi);
    t.finish_nonempty()
}

/// `L Psi = z Psi` with `L = W e^{d_p} W^-1`.
pub fn check_eigenfunction(h: &Hierarchy) -> Result<Residual> {
    let d = i64::from(h.degree());
    let z = h.z_max() as i32;
    let k = h.k_trunc() as i32;
    let wave = build_wave_operator(h)?;
    let l = lax_operator(h, &wave);
    let chi = baker_akhiezer(h, false, Construction::Direct)?.family;
    let r = pdo_apply(&l, &chi)?.sub(&chi.shift_z(1));
    let lo = 1 - k.min(z);
    let mut t = Tally::new("eigenfunction", "L psi = z psi", format!("z^e, {lo} <= e <= 1, degree <= D - 1 + e"));
    tally_family(&mut t, &r, lo, 1, |e| d - 1 + i64::from(e));
    t.finish_nonempty()
}

/// `d_{a,m} L = [A, L]`.
pub fn check_lax_equation(h: &Hierarchy, flow: Flow, m: usize) -> Result<Residual> {
    flow.validate(h, m)?;
    let d = i64::from(h.degree());
    let k = h.k_trunc() as i64;
    let mi = m as i64;
    let wave = build_wave_operator(h)?;
    let l = lax_operator(h, &wave);
    let a = flow_generator(h, &wave, flow, m)?;
    let r = l.map(move |x| x.map(flow_derivative(flow, m))).sub(&pdo_commutator(&a, &l));
    let (lo, hi) = (-mi - 1, k - mi - 1);
    let mut t = Tally::new(
        "lax",
        format!("{} m={m}", flow.label()),
        format!("shifts {lo}..={hi}, degree <= D - shift - {}", mi + 1),
    );
    let ps = operator_ps(h, &[&wave.w]);
    tally_operator(&mut t, &r, &ps, lo, hi, |j| d - j - mi - 1);
    t.finish_nonempty()
}

/// `d_{t2} A_1 - d_{t1} A_2 + [A_1, A_2] = 0` for the matrix flows.
pub fn check_zero_curvature(h: &Hierarchy) -> Result<Residual> {
    let d = i64::from(h.degree());
    let wave = build_wave_operator(h)?;
    let a1 = flow_generator(h, &wave, Flow::Matrix, 1)?;
    let a2 = flow_generator(h, &wave, Flow::Matrix, 2)?;
    let r = a1.d_tm(2).sub(&a2.d_tm(1)).add(&pdo_commutator(&a1, &a2));
    let mut t = Tally::new("zero-curvature", "t1, t2", "shifts -3..=0, degree <= D - 3 - shift");
    let ps = operator_ps(h, &[&wave.w]);
    tally_operator(&mut t, &r, &ps, -3, 0, |j| d - j - 3);
    t.finish_nonempty()
}

/// `sum_a A_{a,m} = A_m`: the component flows resolve the matrix flow.
pub fn check_flow_resolution(h: &Hierarchy, m: usize) -> Result<Residual> {
    Flow::Matrix.validate(h, m)?;
    let d = i64::from(h.degree());
    let wave = build_wave_operator(h)?;
    let mut sum = PseudoDiffOp::zero(h.components(), h.ring());
    for a in 1..=h.components() {
        sum = sum.add(&flow_generator(h, &wave, Flow::Component(a), m)?);
    }
    let r = sum.sub(&flow_generator(h, &wave, Flow::Matrix, m)?);
    let mut t = Tally::new("flow-resolution", format!("m={m}"), format!("shifts -{m}..=0, degree <= D"));
    let ps = operator_ps(h, &[&wave.w]);
    tally_operator(&mut t, &r, &ps, -(m as i64), 0, |_| d);
    t.finish_nonempty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, LaurentPolynomial, Symbol};
    use crate::fermion::{CliffordFactor, CliffordSpec, FockSpace, ModeWindow, TauTable};
    use crate::hierarchy::{HierarchyConfig, SchurCorruption, SignTable};

    fn table(n: usize, d: u32, g: Vec<CliffordFactor>) -> TauTable {
        let ring = PolyRing::weighted(n, 1, d).unwrap();
        let fs = FockSpace::new(n, ModeWindow::new(-3, 3).unwrap(), &ring).unwrap();
        fs.tau_table(-2, 2, &CliffordSpec::new(g)).unwrap()
    }

    fn hierarchy(t: TauTable, z: u32) -> Hierarchy {
        Hierarchy::new(t, HierarchyConfig { z_max: z, k_trunc: 3 }).unwrap()
    }

    /// `tau^0 = 1 + a t1` for one component.
    fn single_hop(d: u32) -> Hierarchy {
        hierarchy(table(1, d, vec![CliffordFactor::new(1, 0, 1, -1, rat(2, 1))]), d)
    }

    fn two_factor(d: u32) -> Hierarchy {
        hierarchy(
            table(
                2,
                d,
                vec![CliffordFactor::new(1, 1, 2, -1, rat(1, 2)), CliffordFactor::new(2, 0, 1, -2, rat(-2, 3))],
            ),
            d,
        )
    }

    fn three_component(d: u32) -> Hierarchy {
        hierarchy(
            table(
                3,
                d,
                vec![
                    CliffordFactor::new(1, 1, 2, -1, rat(1, 2)),
                    CliffordFactor::new(3, 0, 1, -2, rat(-2, 1)),
                    CliffordFactor::new(2, 1, 3, -1, rat(1, 3)),
                ],
            ),
            d,
        )
    }

    fn all_pass(rs: &[Residual]) {
        for r in rs {
            assert!(r.passed(), "{r}");
        }
    }

    fn battery(h: &Hierarchy) -> Vec<Residual> {
        let n = h.components();
        let mut rs = vec![first_coefficient_antisymmetry_check(h).unwrap(), check_ba_constructions(h).unwrap()];
        rs.extend(check_wave_inverse(h).unwrap());
        for k in 0..=2 {
            for a in 1..=n {
                for b in 1..=n {
                    rs.push(check_bilinear_identity(h, k, a, b).unwrap());
                }
            }
            rs.push(check_ba_bilinear_pairing(h, k).unwrap());
        }
        for dir in [Direction::Psi, Direction::Adjoint] {
            rs.push(check_linear_problem_t1(h, dir).unwrap());
            rs.push(check_linear_problem_components(h, dir).unwrap());
            for m in 1..=2 {
                for f in (1..=n).map(Flow::Component).chain([Flow::Matrix]) {
                    rs.push(check_flow_equation(h, f, m, dir).unwrap());
                }
            }
        }
        rs.push(check_linear_problem_tau(h).unwrap());
        for m in 1..=2 {
            for f in (1..=n).map(Flow::Component).chain([Flow::Matrix]) {
                rs.push(check_sato_equation(h, f, m).unwrap());
                rs.push(check_lax_equation(h, f, m).unwrap());
            }
            rs.push(check_flow_resolution(h, m).unwrap());
        }
        rs.push(check_eigenfunction(h).unwrap());
        rs.push(check_zero_curvature(h).unwrap());
        rs
    }

    #[test]
    fn identity_tau_is_trivial() {
        let h = hierarchy(table(2, 3, vec![]), 3);
        for p in h.p_values() {
            for k in 1..=3 {
                assert!(h.coefficients().w(p, k).unwrap().is_zero());
                assert!(h.coefficients().v(p, k).unwrap().is_zero());
            }
        }
        let wave = build_wave_operator(&h).unwrap();
        let a1 = flow_generator(&h, &wave, Flow::Matrix, 1).unwrap();
        assert!(a1.coefficient(0, 0).unwrap().is_zero());
        assert_eq!(a1.coefficient(-1, 0).unwrap(), MatrixSeries::identity(2, h.ring()));
        // Psi^p = delta z^p e^xi
        let psi = crate::hierarchy::baker_akhiezer_full(&h, 1, false).unwrap();
        let xi = crate::algebra::xi_exponential(
            h.ring(),
            &crate::algebra::xi_alphabet(h.ring(), 2, Sign::Plus, false).unwrap(),
            Symbol::Z,
            3,
        )
        .unwrap();
        assert_eq!(*psi.get(2, 2), xi.shift(Symbol::Z, 1));
        assert!(psi.get(1, 2).is_zero());
        all_pass(&battery(&h));
        let r = check_hirota(&h, HirotaEquation::H11 { alpha: 1, gamma: 2 }).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn single_hop_coefficients() {
        let h = single_hop(4);
        let r = h.ring();
        let t1 = TimePolynomial::var(r, TimeVar::new(1, 1)).unwrap();
        // w1 = -a / (1 + a t1) through degree 3
        let mut expected = TimePolynomial::zero(r);
        let mut pow = TimePolynomial::one(r);
        for k in 0..4 {
            let c = if k % 2 == 0 { -(2i64.pow(k + 1)) } else { 2i64.pow(k + 1) };
            expected += &pow.scale(&rat(c, 1));
            pow = &pow * &t1;
        }
        assert_eq!(h.coefficients().w(0, 1).unwrap().get(1, 1), &expected);
        assert_eq!(h.coefficients().v(0, 1).unwrap().get(1, 1), &-&expected);
        // chi^0 = 1 - a z^-1 / (1 + a t1): only z^0 and z^-1 survive
        let chi = baker_akhiezer(&h, false, Construction::Direct).unwrap();
        let m = chi.family.get(0).unwrap().get(1, 1);
        let mut want = LaurentPolynomial::zero(r, Symbol::Z, 4);
        want = &want + &LaurentPolynomial::monomial(TimePolynomial::one(r), Symbol::Z, 0, 4);
        want = &want + &LaurentPolynomial::monomial(expected.clone(), Symbol::Z, -1, 4);
        assert_eq!(*m, want);
        // neighbouring charges are untouched vacua
        assert!(h.coefficients().w(1, 1).unwrap().is_zero());
        all_pass(&battery(&h));
    }

    #[test]
    fn two_component_identities() {
        let h = two_factor(5);
        assert!(!h.tau(0, 1, 2).is_zero() || !h.tau(1, 1, 2).is_zero() || !h.tau(-1, 2, 1).is_zero());
        all_pass(&battery(&h));
        for (a, b) in [(1, 2), (2, 1)] {
            all_pass(&[
                check_hirota(&h, HirotaEquation::H9 { alpha: a, beta: b }).unwrap(),
                check_hirota(&h, HirotaEquation::H10 { alpha: a, beta: b }).unwrap(),
                check_hirota(&h, HirotaEquation::H11 { alpha: a, gamma: b }).unwrap(),
            ]);
        }
    }

    #[test]
    fn three_component_hirota() {
        let h = three_component(5);
        for (a, b, g) in [(1, 2, 3), (2, 3, 1), (3, 1, 2), (1, 3, 2)] {
            assert!(check_hirota(&h, HirotaEquation::H8 { alpha: a, beta: b, gamma: g }).unwrap().passed());
        }
        for (a, b) in [(1, 3), (3, 2)] {
            assert!(check_hirota(&h, HirotaEquation::H9 { alpha: a, beta: b }).unwrap().passed());
            assert!(check_hirota(&h, HirotaEquation::H10 { alpha: a, beta: b }).unwrap().passed());
        }
        assert!(check_linear_problem_tau(&h).unwrap().passed());
        for b in 1..=3 {
            assert!(check_bilinear_identity(&h, 1, 1, b).unwrap().passed());
        }
    }

    #[test]
    fn sign_flip_is_detected() {
        let h = three_component(4);
        let p = h.p_values().into_iter().find(|&p| !h.tau(p, 1, 2).is_zero()).unwrap();
        let bad = Hierarchy::with_signs(h.table().clone(), h.config(), SignTable::new().with_flip(1, 2, p)).unwrap();
        let failing = (1..=3)
            .flat_map(|b| (0..=1).map(move |n| (n, b)))
            .filter(|&(n, b)| !check_bilinear_identity(&bad, n, 1, b).unwrap().passed())
            .count();
        assert!(failing > 0);
        assert!(!check_linear_problem_t1(&bad, Direction::Psi).unwrap().passed());
    }

    #[test]
    fn schur_corruption_is_detected() {
        let h = two_factor(4);
        let p = h.p_values().into_iter().find(|&p| !h.tau(p, 1, 2).is_zero()).unwrap();
        let bad = h.with_schur_corruption(SchurCorruption { p, alpha: 1, beta: 2, k: 1 }).unwrap();
        let r = check_bilinear_identity(&bad, 0, 1, 2).unwrap();
        assert!(!r.passed());
        assert!(r.witness.is_some());
    }

    #[test]
    fn argument_errors() {
        let h = two_factor(3);
        assert!(matches!(
            check_hirota(&h, HirotaEquation::H9 { alpha: 1, beta: 1 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            check_hirota(&h, HirotaEquation::H8 { alpha: 1, beta: 2, gamma: 3 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(check_flow_equation(&h, Flow::Component(3), 1, Direction::Psi), Err(Error::Config(_))));
        assert!(matches!(check_sato_equation(&h, Flow::Matrix, 4), Err(Error::Config(_))));
        // n = 3 at D = Z = 3 leaves nothing exact
        assert!(matches!(check_bilinear_identity(&h, 3, 1, 1), Err(Error::Window { .. })));
        assert!(matches!(check_ba_bilinear_pairing(&h, 3), Err(Error::Window { .. })));
    }
}
