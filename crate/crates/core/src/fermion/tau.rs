use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use super::clifford::{apply_clifford, CliffordSpec};
use super::state::{apply_exp_j_above, apply_fermion, FermionKind, FockState, FockVector, ModeWindow};
use crate::algebra::{PolyRing, TimePolynomial};
use crate::error::{Error, Result};

/// Per-component filling levels `p = (p_1, ..., p_N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChargeVector(pub Vec<i64>);

impl ChargeVector {
    pub fn uniform(components: usize, p: i64) -> Self {
        Self(vec![p; components])
    }

    /// `p + e_alpha - e_beta` (1-based components).
    pub fn shifted(&self, alpha: usize, beta: usize) -> Self {
        let mut q = self.0.clone();
        q[alpha - 1] += 1;
        q[beta - 1] -= 1;
        Self(q)
    }
}

/// The truncated Fock space: component count, mode window, and the time
/// ring that coefficients live in.
#[derive(Clone, Debug)]
pub struct FockSpace {
    components: usize,
    window: ModeWindow,
    ring: Arc<PolyRing>,
}

impl FockSpace {
    pub fn new(components: usize, window: ModeWindow, ring: &Arc<PolyRing>) -> Result<Self> {
        if components == 0 {
            return Err(Error::config("at least one component is required"));
        }
        if ring.components() != components {
            return Err(Error::config(format!(
                "time ring has {} components, Fock space {components}",
                ring.components()
            )));
        }
        Ok(Self {
            components,
            window,
            ring: ring.clone(),
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    fn check_charge(&self, p: &ChargeVector) -> Result<()> {
        if p.0.len() != self.components {
            return Err(Error::config(format!(
                "charge vector has {} entries, expected {}",
                p.0.len(),
                self.components
            )));
        }
        let w = self.window;
        if let Some(&bad) = p.0.iter().find(|&&x| x < w.lo || x > w.hi) {
            return Err(Error::window(
                format!("charge {bad} not representable in {w}"),
                format!("lo <= {bad} <= hi"),
            ));
        }
        Ok(())
    }

    pub fn vacuum_zero(&self) -> FockVector {
        FockVector::basis(FockState::vacuum(self.components, &self.window), self.window, &self.ring)
    }

    /// `|p> = Psi*_{p_N} ... Psi*_{p_1} |0>` with
    /// `Psi*_p = psi_{p-1} ... psi_0` (p > 0) or `psi*_p ... psi*_{-1}` (p < 0).
    pub fn vacuum(&self, p: &ChargeVector) -> Result<FockVector> {
        self.check_charge(p)?;
        let mut v = self.vacuum_zero();
        for (a, &pa) in p.0.iter().enumerate() {
            if pa > 0 {
                for j in 0..pa {
                    v = apply_fermion(FermionKind::Psi, a + 1, j, &v)?;
                }
            } else {
                for j in (pa..0).rev() {
                    v = apply_fermion(FermionKind::PsiStar, a + 1, j, &v)?;
                }
            }
        }
        Ok(v)
    }

    /// `<p| = <0| Psi_{p_1} ... Psi_{p_N}` as a (basis state, sign) pair:
    /// `<p|v> = sign * v[state]`.
    pub fn dual_vacuum(&self, p: &ChargeVector) -> Result<(FockState, bool)> {
        let ket = self.vacuum(p)?;
        let (state, _) = ket.terms().next().expect("vacuum is a single state");
        let state = state.clone();
        // Run the operator string on |state> and read off the sign that
        // lands on |0>. Psi_p = psi*_0 ... psi*_{p-1} (p > 0) or
        // psi_{-1} ... psi_p (p < 0); the rightmost factor acts first.
        let mut v = FockVector::basis(state.clone(), self.window, &self.ring);
        for (a, &pa) in p.0.iter().enumerate().rev() {
            if pa > 0 {
                for j in (0..pa).rev() {
                    v = apply_fermion(FermionKind::PsiStar, a + 1, j, &v)?;
                }
            } else {
                for j in pa..0 {
                    v = apply_fermion(FermionKind::Psi, a + 1, j, &v)?;
                }
            }
        }
        let c = v.coefficient(&FockState::vacuum(self.components, &self.window));
        debug_assert_eq!(v.len(), 1);
        let negative = c.constant_term() < num_traits::Zero::zero();
        Ok((state, negative))
    }

    /// `<p|v>`.
    pub fn pair(&self, p: &ChargeVector, v: &FockVector) -> Result<TimePolynomial> {
        let (s, negative) = self.dual_vacuum(p)?;
        let c = v.coefficient(&s);
        Ok(if negative { -&c } else { c })
    }

    /// `tau_{alpha beta}(p, t) = <p + e_alpha - e_beta| exp(J(t)) g |p>`.
    pub fn tau(&self, p: &ChargeVector, alpha: usize, beta: usize, g: &CliffordSpec) -> Result<TimePolynomial> {
        let cells = self.tau_cells(p, &[(alpha, beta)], g)?;
        Ok(cells.into_iter().next().unwrap())
    }

    /// Several `tau_{alpha beta}(p)` sharing one `g|p>` evaluation.
    fn tau_cells(&self, p: &ChargeVector, pairs: &[(usize, usize)], g: &CliffordSpec) -> Result<Vec<TimePolynomial>> {
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > self.components || b > self.components {
                return Err(Error::config(format!("component pair ({a},{b}) outside 1..={}", self.components)));
            }
        }
        let targets: Vec<(FockState, bool)> = pairs
            .iter()
            .map(|&(a, b)| self.dual_vacuum(&p.shifted(a, b)))
            .collect::<Result<_>>()?;
        let w = self.window;
        let mut gv = apply_clifford(g, &self.vacuum(p)?)?;
        // J(t) preserves every component charge and lowers the energy, so
        // only states in a target sector at or above its energy matter.
        let sectors: Vec<Vec<i64>> = targets.iter().map(|(s, _)| s.charges(&w)).collect();
        gv.retain(|s| sectors.contains(&s.charges(&w)));
        let floor = targets.iter().map(|(s, _)| s.double_energy(&w)).min().unwrap_or(0);
        let evolved = apply_exp_j_above(&gv, Some(floor));
        Ok(targets
            .into_iter()
            .map(|(s, negative)| {
                let c = evolved.coefficient(&s);
                if negative {
                    -&c
                } else {
                    c
                }
            })
            .collect())
    }

    /// All `tau^p_{alpha beta}` for uniform charge `p` in `p_lo..=p_hi`.
    pub fn tau_table(&self, p_lo: i64, p_hi: i64, g: &CliffordSpec) -> Result<TauTable> {
        if p_lo > p_hi {
            return Err(Error::config(format!("empty p range {p_lo}..={p_hi}")));
        }
        g.validate(self.components, &self.window)?;
        let w = self.window;
        // p + e_alpha - e_beta must stay inside [lo, hi] when N > 1.
        let margin = if self.components > 1 { 1 } else { 0 };
        if p_lo - margin < w.lo || p_hi + margin > w.hi {
            return Err(Error::window(
                format!("p range {p_lo}..={p_hi} in mode window {w}"),
                format!("window [{}, {}) or larger", (p_lo - margin).min(w.lo), (p_hi + margin).max(w.hi)),
            ));
        }
        let n = self.components;
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (1..=n).map(move |b| (a, b))).collect();
        let mut entries = BTreeMap::new();
        for p in p_lo..=p_hi {
            let cells = self.tau_cells(&ChargeVector::uniform(n, p), &pairs, g)?;
            entries.insert(p, cells);
        }
        Ok(TauTable {
            components: n,
            ring: self.ring.clone(),
            entries,
            clifford: g.clone(),
            window: w,
        })
    }
}

/// `tau^p` and `tau^p_{alpha beta}` for the matrix reduction `p_alpha = p`,
/// over a contiguous range of `p`. The diagonal cells hold `tau^p` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct TauTable {
    components: usize,
    ring: Arc<PolyRing>,
    entries: BTreeMap<i64, Vec<TimePolynomial>>,
    clifford: CliffordSpec,
    window: ModeWindow,
}

impl TauTable {
    /// Table from explicit entries: `cells(p)[(alpha-1)*N + (beta-1)]`.
    pub fn from_entries(
        components: usize,
        ring: &Arc<PolyRing>,
        entries: BTreeMap<i64, Vec<TimePolynomial>>,
        clifford: CliffordSpec,
        window: ModeWindow,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("tau table needs at least one p"));
        }
        let keys: Vec<i64> = entries.keys().copied().collect();
        if keys.windows(2).any(|k| k[1] != k[0] + 1) {
            return Err(Error::config("tau table p range must be contiguous"));
        }
        if entries.values().any(|v| v.len() != components * components) {
            return Err(Error::config("tau table cells must form an N x N matrix"));
        }
        Ok(Self {
            components,
            ring: ring.clone(),
            entries,
            clifford,
            window,
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn p_range(&self) -> (i64, i64) {
        (*self.entries.keys().next().unwrap(), *self.entries.keys().next_back().unwrap())
    }

    pub fn contains(&self, p: i64) -> bool {
        self.entries.contains_key(&p)
    }

    pub fn clifford(&self) -> &CliffordSpec {
        &self.clifford
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    fn cells(&self, p: i64) -> Result<&[TimePolynomial]> {
        self.entries.get(&p).map(Vec::as_slice).ok_or_else(|| {
            let (lo, hi) = self.p_range();
            Error::window(format!("p = {p} outside tau table range {lo}..={hi}"), format!("p range covering {p}"))
        })
    }

    pub fn tau(&self, p: i64) -> Result<&TimePolynomial> {
        self.tau_ab(p, 1, 1)
    }

    /// `tau^p_{alpha beta}`; equals `tau^p` on the diagonal.
    pub fn tau_ab(&self, p: i64, alpha: usize, beta: usize) -> Result<&TimePolynomial> {
        let n = self.components;
        if alpha == 0 || beta == 0 || alpha > n || beta > n {
            return Err(Error::config(format!("component pair ({alpha},{beta}) outside 1..={n}")));
        }
        Ok(&self.cells(p)?[(alpha - 1) * n + beta - 1])
    }

    /// Coefficient-exact equality of every cell whose `p` both tables cover.
    pub fn agrees_with(&self, other: &TauTable) -> bool {
        self.entries
            .iter()
            .all(|(p, cells)| other.entries.get(p).is_none_or(|o| o == cells))
    }

    pub fn to_json(&self) -> Value {
        let n = self.components;
        let rows: Vec<Value> = self
            .entries
            .iter()
            .map(|(p, cells)| {
                let matrix: Vec<Vec<String>> = (0..n)
                    .map(|a| (0..n).map(|b| cells[a * n + b].to_text()).collect())
                    .collect();
                json!({ "p": p, "tau": matrix })
            })
            .collect();
        json!({
            "components": n,
            "window": [self.window.lo, self.window.hi],
            "degree_cap": self.ring.degree_cap(),
            "clifford": self.clifford.to_text(),
            "entries": rows,
        })
    }
}

/// Computes the tau table in both windows and compares every coefficient.
pub fn window_stability_check(
    components: usize,
    ring: &Arc<PolyRing>,
    g: &CliffordSpec,
    p_range: (i64, i64),
    w1: ModeWindow,
    w2: ModeWindow,
) -> Result<bool> {
    if !w1.is_subwindow_of(&w2) {
        return Err(Error::config(format!("window {w1} is not contained in {w2}")));
    }
    let t1 = FockSpace::new(components, w1, ring)?.tau_table(p_range.0, p_range.1, g)?;
    let t2 = FockSpace::new(components, w2, ring)?.tau_table(p_range.0, p_range.1, g)?;
    Ok(t1.agrees_with(&t2))
}
