use std::collections::BTreeMap;
use std::sync::Arc;

use super::signs::SignTable;
use crate::algebra::{schur_derivative_series, PolyRing, Rational, Sign, TimePolynomial};
use crate::error::{Error, Result};
use crate::fermion::TauTable;
use crate::psdo::MatrixSeries;

/// Truncation parameters of the hierarchy layer. The time-degree cap `D`
/// comes from the tau table's ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierarchyConfig {
    /// Spectral order kept in Miwa shifts: `z^-1 .. z^-z_max`.
    pub z_max: u32,
    /// Highest shift power `e^{-k d_p}` kept in wave operators.
    pub k_trunc: usize,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self { z_max: 3, k_trunc: 3 }
    }
}

/// Deliberate perturbation of one Miwa-expansion coefficient: `+1` is added
/// to the `z^-k` coefficient of every shift of `tau^p_{alpha beta}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchurCorruption {
    pub p: i64,
    pub alpha: usize,
    pub beta: usize,
    pub k: usize,
}

/// `w^(k)(p)` and `v^(k)(p)`; the `k`-th coefficient is exact through
/// graded degree `D - k` and stored truncated there.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveCoefficients {
    depth: usize,
    w: BTreeMap<i64, Vec<MatrixSeries>>,
    v: BTreeMap<i64, Vec<MatrixSeries>>,
}

impl WaveCoefficients {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn p_values(&self) -> Vec<i64> {
        self.w.keys().copied().collect()
    }

    pub fn w(&self, p: i64, k: usize) -> Option<&MatrixSeries> {
        self.w.get(&p).and_then(|x| x.get(k))
    }

    pub fn v(&self, p: i64, k: usize) -> Option<&MatrixSeries> {
        self.v.get(&p).and_then(|x| x.get(k))
    }
}

/// Tau data prepared for the hierarchy constructions: cached `1/tau^p`,
/// signs, and wave coefficients.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    table: TauTable,
    signs: SignTable,
    config: HierarchyConfig,
    inv: BTreeMap<i64, TimePolynomial>,
    coeffs: WaveCoefficients,
    schur: Option<SchurCorruption>,
}

impl Hierarchy {
    pub fn new(table: TauTable, config: HierarchyConfig) -> Result<Self> {
        Self::with_signs(table, config, SignTable::new())
    }

    pub fn with_signs(table: TauTable, config: HierarchyConfig, signs: SignTable) -> Result<Self> {
        Self::build(table, config, signs, None)
    }

    /// Same data with one Miwa coefficient perturbed (negative control).
    pub fn with_schur_corruption(self, c: SchurCorruption) -> Result<Self> {
        Self::build(self.table, self.config, self.signs, Some(c))
    }

    fn build(table: TauTable, config: HierarchyConfig, signs: SignTable, schur: Option<SchurCorruption>) -> Result<Self> {
        if config.z_max == 0 || config.k_trunc == 0 {
            return Err(Error::config("Z_max and K_trunc must be at least 1"));
        }
        if config.z_max as usize > table.ring().max_order() {
            return Err(Error::config(format!(
                "Z_max = {} exceeds the time-variable order K_t = {}",
                config.z_max,
                table.ring().max_order()
            )));
        }
        let (lo, hi) = table.p_range();
        let mut inv = BTreeMap::new();
        for p in lo..=hi {
            let x = table.tau(p)?.inverse().ok_or(Error::NonNormalizable { p })?;
            inv.insert(p, x);
        }
        let mut h = Self {
            table,
            signs,
            config,
            inv,
            coeffs: WaveCoefficients {
                depth: 0,
                w: BTreeMap::new(),
                v: BTreeMap::new(),
            },
            schur,
        };
        h.coeffs = wave_coefficients_of(&h)?;
        Ok(h)
    }

    pub fn table(&self) -> &TauTable {
        &self.table
    }

    pub fn signs(&self) -> &SignTable {
        &self.signs
    }

    pub fn config(&self) -> HierarchyConfig {
        self.config
    }

    pub fn components(&self) -> usize {
        self.table.components()
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.table.ring()
    }

    /// Time-degree cap `D`.
    pub fn degree(&self) -> u32 {
        self.ring().degree_cap()
    }

    pub fn z_max(&self) -> u32 {
        self.config.z_max
    }

    pub fn k_trunc(&self) -> usize {
        self.config.k_trunc
    }

    pub fn p_values(&self) -> Vec<i64> {
        self.inv.keys().copied().collect()
    }

    pub fn contains(&self, p: i64) -> bool {
        self.inv.contains_key(&p)
    }

    pub fn eps(&self, alpha: usize, beta: usize, p: i64) -> i64 {
        self.signs.eps(alpha, beta, p)
    }

    pub(crate) fn eps_rat(&self, alpha: usize, beta: usize, p: i64) -> Rational {
        Rational::from_integer(self.eps(alpha, beta, p).into())
    }

    pub fn coefficients(&self) -> &WaveCoefficients {
        &self.coeffs
    }

    pub fn schur_corruption(&self) -> Option<SchurCorruption> {
        self.schur
    }

    pub(crate) fn require(&self, p: i64) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            let (lo, hi) = self.table.p_range();
            Err(Error::window(
                format!("p = {p} outside tau table range {lo}..={hi}"),
                format!("p range covering {p}"),
            ))
        }
    }

    /// `tau^p_{alpha beta}`; `p` must be in range.
    pub(crate) fn tau(&self, p: i64, alpha: usize, beta: usize) -> &TimePolynomial {
        self.table.tau_ab(p, alpha, beta).expect("p checked by caller")
    }

    pub(crate) fn inv_tau(&self, p: i64) -> &TimePolynomial {
        &self.inv[&p]
    }

    /// Coefficients `[z^0, z^-1, ..., z^-k_max]` of
    /// `tau^p_{alpha beta}(t +- [z^-1]_component)`; the `z^-k` coefficient is
    /// exact through degree `D - k`.
    pub(crate) fn shifted(&self, p: i64, alpha: usize, beta: usize, component: usize, sign: Sign, k_max: usize) -> Vec<TimePolynomial> {
        let ring = self.ring();
        let mut s = schur_derivative_series(self.tau(p, alpha, beta), 0, component, sign, k_max);
        if let Some(c) = self.schur {
            if (c.p, c.alpha, c.beta) == (p, alpha, beta) && c.k < s.len() {
                s[c.k] = &s[c.k] + &TimePolynomial::one(ring);
            }
        }
        s
    }
}

/// Moves base-ring polynomials onto alphabet `copy` of `ring`.
pub(crate) fn transfer_all(xs: &[TimePolynomial], ring: &Arc<PolyRing>, copy: u8) -> Vec<TimePolynomial> {
    xs.iter().map(|x| x.transfer(ring, 0, copy)).collect()
}

fn wave_coefficients_of(h: &Hierarchy) -> Result<WaveCoefficients> {
    let n = h.components();
    let d = h.degree() as usize;
    let ring = h.ring().clone();
    let mut w = BTreeMap::new();
    let mut v = BTreeMap::new();
    for p in h.p_values() {
        let inv = h.inv_tau(p);
        let mut ws = vec![MatrixSeries::identity(n, &ring)];
        let mut vs = vec![MatrixSeries::identity(n, &ring)];
        for _ in 1..=d {
            ws.push(MatrixSeries::zero(n, &ring));
            vs.push(MatrixSeries::zero(n, &ring));
        }
        for a in 1..=n {
            for b in 1..=n {
                // w: shift in component b with minus sign; v: component a, plus.
                let sw = h.shifted(p, a, b, b, Sign::Minus, d);
                let sv = h.shifted(p, a, b, a, Sign::Plus, d);
                for k in 1..=d {
                    let cap = (d - k) as u32;
                    let (xw, xv) = if a == b {
                        (sw[k].mul_capped(inv, cap), sv[k].mul_capped(inv, cap))
                    } else {
                        (
                            sw[k - 1].mul_capped(inv, cap).scale(&h.eps_rat(a, b, p)),
                            sv[k - 1].mul_capped(inv, cap).scale(&h.eps_rat(b, a, p)),
                        )
                    };
                    ws[k].set(a, b, xw);
                    vs[k].set(a, b, xv);
                }
            }
        }
        w.insert(p, ws);
        v.insert(p, vs);
    }
    Ok(WaveCoefficients { depth: d, w, v })
}

/// `w^(k)(p)` and `v^(k)(p)` for every `p` of the table, `k <= D`.
pub fn wave_coefficients(table: &TauTable, signs: &SignTable) -> Result<WaveCoefficients> {
    let h = Hierarchy::with_signs(table.clone(), HierarchyConfig::default().clamped(table), signs.clone())?;
    Ok(h.coeffs)
}

impl HierarchyConfig {
    fn clamped(self, table: &TauTable) -> Self {
        Self {
            z_max: self.z_max.min(table.ring().max_order().max(1) as u32),
            ..self
        }
    }
}
