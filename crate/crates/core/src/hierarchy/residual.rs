use std::fmt;

use serde::Serialize;

use crate::algebra::TimePolynomial;

/// Outcome of one identity check: the number of nonzero residual monomials
/// inside the region where the truncated computation is exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub check: String,
    pub params: String,
    /// Human-readable description of the asserted region.
    pub region: String,
    /// Coefficient slots compared (per `p`, matrix entry and spectral order).
    pub checked: usize,
    /// Nonzero monomials found inside the region; must be 0.
    pub nonzero: usize,
    /// First offending coefficient, for diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Residual {
    pub fn passed(&self) -> bool {
        self.nonzero == 0 && self.checked > 0
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} slots, {} nonzero monomials ({})",
            self.check,
            self.params,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.nonzero,
            self.region
        )?;
        if let Some(w) = &self.witness {
            write!(f, "; first: {w}")?;
        }
        Ok(())
    }
}

/// Accumulates residual coefficients against per-slot weight caps.
#[derive(Debug)]
pub(crate) struct Tally {
    check: String,
    params: String,
    region: String,
    checked: usize,
    nonzero: usize,
    witness: Option<String>,
}

impl Tally {
    pub(crate) fn new(check: &str, params: impl Into<String>, region: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            params: params.into(),
            region: region.into(),
            checked: 0,
            nonzero: 0,
            witness: None,
        }
    }

    /// Counts the monomials of `x` with graded degree `<= cap`; a negative
    /// cap means the slot lies outside the region.
    pub(crate) fn poly(&mut self, x: &TimePolynomial, cap: i64, label: impl FnOnce() -> String) {
        if cap < 0 {
            return;
        }
        self.checked += 1;
        let bad = x.filter(|m| i64::from(m.weight()) <= cap);
        if !bad.is_zero() {
            self.nonzero += bad.len();
            if self.witness.is_none() {
                self.witness = Some(format!("{}: {}", label(), bad.to_text()));
            }
        }
    }

    /// Like `finish`, but an empty region (nothing could be compared) is a
    /// window error rather than a vacuous pass.
    pub(crate) fn finish_nonempty(self) -> crate::error::Result<Residual> {
        if self.checked == 0 {
            return Err(crate::error::Error::window(
                format!("{} [{}]: no p value has all the data the check needs", self.check, self.params),
                "a wider p range (larger mode window) or larger D / Z_max",
            ));
        }
        Ok(self.finish())
    }

    pub(crate) fn finish(self) -> Residual {
        Residual {
            check: self.check,
            params: self.params,
            region: self.region,
            checked: self.checked,
            nonzero: self.nonzero,
            witness: self.witness,
        }
    }
}
