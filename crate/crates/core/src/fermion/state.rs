use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{PolyRing, Rational, TimePolynomial, TimeVar};
use crate::error::{Error, Result};

/// Modes `lo <= j < hi` available in every component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ModeWindow {
    pub lo: i64,
    pub hi: i64,
}

impl ModeWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if !(lo < 0 && 0 <= hi) {
            return Err(Error::config(format!(
                "mode window [{lo},{hi}) must contain both negative and non-negative modes"
            )));
        }
        if hi - lo > 64 {
            return Err(Error::config("mode windows wider than 64 modes are not supported"));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, j: i64) -> bool {
        self.lo <= j && j < self.hi
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_subwindow_of(&self, other: &ModeWindow) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    fn bit(&self, j: i64) -> u64 {
        1u64 << (j - self.lo)
    }

    fn check(&self, j: i64) -> Result<()> {
        if self.contains(j) {
            Ok(())
        } else {
            Err(Error::config(format!("mode {j} outside window [{},{})", self.lo, self.hi)))
        }
    }
}

impl fmt::Display for ModeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

/// Occupation pattern: one bitmask per component, bit `i` standing for mode
/// `lo + i`.
///
/// The basis vector's sign is fixed by listing occupied modes
/// component-major; an operator at `(alpha, j)` picks up the parity of the
/// charges of components before `alpha` plus the occupied modes of `alpha`
/// above `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occ: Box<[u64]>,
}

impl FockState {
    /// `|0>`: modes `j < 0` filled in every component.
    pub fn vacuum(components: usize, w: &ModeWindow) -> Self {
        let sea = 1u64.checked_shl((-w.lo) as u32).map_or(u64::MAX, |b| b - 1);
        Self {
            occ: vec![sea; components].into_boxed_slice(),
        }
    }

    pub fn components(&self) -> usize {
        self.occ.len()
    }

    pub fn is_occupied(&self, w: &ModeWindow, alpha: usize, j: i64) -> bool {
        w.contains(j) && self.occ[alpha - 1] & w.bit(j) != 0
    }

    pub fn occupied_modes(&self, w: &ModeWindow, alpha: usize) -> Vec<i64> {
        (w.lo..w.hi).filter(|&j| self.is_occupied(w, alpha, j)).collect()
    }

    /// `#occupied(alpha) - #{j < 0 in window}`.
    pub fn charge(&self, w: &ModeWindow, alpha: usize) -> i64 {
        self.occ[alpha - 1].count_ones() as i64 + w.lo
    }

    pub fn charges(&self, w: &ModeWindow) -> Vec<i64> {
        (1..=self.components()).map(|a| self.charge(w, a)).collect()
    }

    /// Twice the energy relative to `|0>`: particles at `j >= 0` cost
    /// `2j + 1`, holes at `j < 0` cost `-2j - 1`. `J_k` lowers it by `2k`.
    pub fn double_energy(&self, w: &ModeWindow) -> i64 {
        let mut e = 0;
        for a in 1..=self.components() {
            for j in w.lo..w.hi {
                let occ = self.is_occupied(w, a, j);
                if j >= 0 && occ {
                    e += 2 * j + 1;
                } else if j < 0 && !occ {
                    e += -2 * j - 1;
                }
            }
        }
        e
    }

    // The infinite seas are regularized: each earlier component contributes
    // its charge, and within the component only the occupied modes above `j`
    // count. Signs then do not depend on where the window is cut.
    fn koszul(&self, w: &ModeWindow, alpha: usize, j: i64) -> bool {
        let before: i64 = (1..alpha).map(|b| self.charge(w, b)).sum();
        let mask = u64::MAX.checked_shl((j - w.lo + 1) as u32).unwrap_or(0);
        let above = (self.occ[alpha - 1] & mask).count_ones() as i64;
        (before + above).rem_euclid(2) == 1
    }

    /// `psi_j` (create) or `psi*_j` (annihilate) on a basis state: the new
    /// state and whether the sign flips, or `None` when the result vanishes.
    pub fn apply(&self, w: &ModeWindow, kind: FermionKind, alpha: usize, j: i64) -> Option<(FockState, bool)> {
        let occupied = self.is_occupied(w, alpha, j);
        if occupied == (kind == FermionKind::Psi) {
            return None;
        }
        let flip = self.koszul(w, alpha, j);
        let mut occ = self.occ.clone();
        occ[alpha - 1] ^= w.bit(j);
        Some((FockState { occ }, flip))
    }

    pub fn display(&self, w: &ModeWindow) -> String {
        let parts: Vec<String> = (1..=self.components())
            .map(|a| {
                let modes: Vec<String> = self.occupied_modes(w, a).iter().map(|j| j.to_string()).collect();
                format!("{a}:{{{}}}", modes.join(","))
            })
            .collect();
        format!("|{}>", parts.join("; "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FermionKind {
    /// `psi_j`: fills mode `j`.
    Psi,
    /// `psi*_j`: empties mode `j`.
    PsiStar,
}

/// Finite linear combination of basis states with time-polynomial
/// coefficients. No zero coefficients are stored.
#[derive(Clone, PartialEq, Eq)]
pub struct FockVector {
    window: ModeWindow,
    components: usize,
    ring: Arc<PolyRing>,
    terms: BTreeMap<FockState, TimePolynomial>,
}

impl FockVector {
    pub fn zero(components: usize, window: ModeWindow, ring: &Arc<PolyRing>) -> Self {
        Self {
            window,
            components,
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(state: FockState, window: ModeWindow, ring: &Arc<PolyRing>) -> Self {
        let mut v = Self::zero(state.components(), window, ring);
        v.add(state, TimePolynomial::one(ring));
        v
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn components(&self) -> usize {
        self.components
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

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &TimePolynomial)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &FockState) -> TimePolynomial {
        self.terms.get(s).cloned().unwrap_or_else(|| TimePolynomial::zero(&self.ring))
    }

    pub fn add(&mut self, s: FockState, c: TimePolynomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&s) {
            Some(x) => {
                *x += &c;
                if x.is_zero() {
                    self.terms.remove(&s);
                }
            }
            None => {
                self.terms.insert(s, c);
            }
        }
    }

    fn empty_like(&self) -> Self {
        Self::zero(self.components, self.window, &self.ring)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add(s.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scale(&Rational::from_integer((-1).into())))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.empty_like();
        for (s, x) in &self.terms {
            out.add(s.clone(), x.scale(c));
        }
        out
    }

    /// Keeps the states accepted by `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&FockState) -> bool) {
        self.terms.retain(|s, _| keep(s));
    }
}

impl fmt::Debug for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| format!("({c}){}", s.display(&self.window)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn check_component(v: &FockVector, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha > v.components {
        return Err(Error::config(format!(
            "component {alpha} outside 1..={}",
            v.components
        )));
    }
    Ok(())
}

pub fn apply_fermion(kind: FermionKind, alpha: usize, j: i64, v: &FockVector) -> Result<FockVector> {
    check_component(v, alpha)?;
    v.window.check(j)?;
    let mut out = v.empty_like();
    for (s, c) in &v.terms {
        if let Some((s2, flip)) = s.apply(&v.window, kind, alpha, j) {
            out.add(s2, if flip { -c } else { c.clone() });
        }
    }
    Ok(out)
}

/// `J_k^(alpha) = sum_j psi_j psi*_{j+k}` restricted to the window, with the
/// coefficient multiplied by `weight`.
fn current_into(out: &mut FockVector, alpha: usize, k: i64, s: &FockState, c: &TimePolynomial, weight: Option<&TimePolynomial>) {
    let w = out.window;
    for m in w.lo + k..w.hi {
        let j = m - k;
        let Some((s1, f1)) = s.apply(&w, FermionKind::PsiStar, alpha, m) else {
            continue;
        };
        let Some((s2, f2)) = s1.apply(&w, FermionKind::Psi, alpha, j) else {
            continue;
        };
        let mut term = match weight {
            Some(t) => c * t,
            None => c.clone(),
        };
        if f1 != f2 {
            term = -&term;
        }
        out.add(s2, term);
    }
}

pub fn apply_current(alpha: usize, k: i64, v: &FockVector) -> Result<FockVector> {
    check_component(v, alpha)?;
    if k < 1 {
        return Err(Error::config(format!("current mode k = {k} must be at least 1")));
    }
    let mut out = v.empty_like();
    for (s, c) in &v.terms {
        current_into(&mut out, alpha, k, s, c, None);
    }
    Ok(out)
}

/// `J(t) v = sum_{alpha,k} t[alpha,k] J_k^(alpha) v` over the ring's times.
fn apply_j_of_t(v: &FockVector, times: &[(usize, i64, TimePolynomial)]) -> FockVector {
    let mut out = v.empty_like();
    for (s, c) in &v.terms {
        for (alpha, k, t) in times {
            current_into(&mut out, *alpha, *k, s, c, Some(t));
        }
    }
    out
}

/// `exp(J(t)) v` truncated at the ring's degree cap. With `floor`, states
/// whose doubled energy drops below it are discarded after each step (they
/// can never come back up).
pub fn apply_exp_j(v: &FockVector) -> FockVector {
    apply_exp_j_above(v, None)
}

pub(crate) fn apply_exp_j_above(v: &FockVector, floor: Option<i64>) -> FockVector {
    let ring = v.ring.clone();
    let w = v.window;
    let times: Vec<(usize, i64, TimePolynomial)> = (1..=v.components)
        .flat_map(|a| (1..=ring.max_order()).map(move |k| (a, k)))
        .filter(|&(a, k)| (k as i64) < w.width() as i64 && a <= ring.components())
        .map(|(a, k)| (a, k as i64, TimePolynomial::var(&ring, TimeVar::new(a, k)).expect("time in ring")))
        .filter(|(_, _, t)| !t.is_zero())
        .collect();
    let prune = |x: &mut FockVector| {
        if let Some(f) = floor {
            x.retain(|s| s.double_energy(&w) >= f);
        }
    };
    let mut term = v.clone();
    prune(&mut term);
    let mut sum = term.clone();
    let mut n = 1i64;
    while !term.is_zero() {
        term = apply_j_of_t(&term, &times).scale(&Rational::new(1.into(), n.into()));
        prune(&mut term);
        sum = sum.plus(&term);
        n += 1;
    }
    sum
}
