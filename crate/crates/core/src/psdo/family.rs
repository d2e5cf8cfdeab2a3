use std::collections::BTreeMap;
use std::sync::Arc;

use super::matrix::LaurentMatrix;
use crate::algebra::{PolyRing, Symbol};
use crate::error::{Error, Result};

/// A `p`-indexed family `F(p) = z^{sigma p} M(p)` stored through the reduced
/// matrices `M(p)`; the explicit `z^{sigma p}` prefactor is what shift
/// operators act on.
///
/// `sigma = 1` for wave functions `Psi^p`, `sigma = -1` for adjoint ones.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSymbolFamily {
    n: usize,
    ring: Arc<PolyRing>,
    symbol: Symbol,
    z_max: u32,
    sigma: i64,
    entries: BTreeMap<i64, LaurentMatrix>,
}

impl WaveSymbolFamily {
    pub fn new(
        n: usize,
        ring: &Arc<PolyRing>,
        symbol: Symbol,
        z_max: u32,
        sigma: i64,
        entries: BTreeMap<i64, LaurentMatrix>,
    ) -> Result<Self> {
        if sigma.abs() > 1 {
            return Err(Error::config(format!("z-power convention must be -1, 0 or 1, got {sigma}")));
        }
        if let Some(m) = entries.values().find(|m| m.dim() != n) {
            return Err(Error::config(format!("family entry of size {} in a {n}x{n} family", m.dim())));
        }
        Ok(Self {
            n,
            ring: ring.clone(),
            symbol,
            z_max,
            sigma,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    pub fn z_max(&self) -> u32 {
        self.z_max
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }

    pub fn p_values(&self) -> Vec<i64> {
        self.entries.keys().copied().collect()
    }

    /// Reduced matrix `M(p)`.
    pub fn get(&self, p: i64) -> Option<&LaurentMatrix> {
        self.entries.get(&p)
    }

    pub fn entries(&self) -> &BTreeMap<i64, LaurentMatrix> {
        &self.entries
    }

    pub(crate) fn zero_matrix(&self) -> LaurentMatrix {
        LaurentMatrix::zero(self.n, &self.ring, self.symbol, self.z_max)
    }

    pub(crate) fn with_entries(&self, entries: BTreeMap<i64, LaurentMatrix>) -> Self {
        Self {
            entries,
            ..self.clone()
        }
    }

    /// Pointwise map over the reduced matrices.
    pub fn map(&self, mut f: impl FnMut(i64, &LaurentMatrix) -> LaurentMatrix) -> Self {
        self.with_entries(self.entries.iter().map(|(p, m)| (*p, f(*p, m))).collect())
    }

    /// `F - G` on the common `p` values.
    pub fn sub(&self, o: &Self) -> Self {
        self.with_entries(
            self.entries
                .iter()
                .filter_map(|(p, m)| o.entries.get(p).map(|x| (*p, m.sub(x))))
                .collect(),
        )
    }

    /// `z^k F`.
    pub fn shift_z(&self, k: i32) -> Self {
        self.map(|_, m| m.shift(self.symbol, k))
    }
}
