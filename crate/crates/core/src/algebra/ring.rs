use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a monomial's degree is measured against the truncation cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    /// Every time variable counts 1.
    Total,
    /// `t[alpha,k]` counts `k`. Miwa shifts, derivatives and the current
    /// exponential are homogeneous for this grading, which is what makes
    /// truncated identities exact below the cap.
    Weighted,
}

/// A time variable `t[alpha,k]` (copy 0) or `t'[alpha,k]` (copy 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeVar {
    pub copy: u8,
    pub component: usize,
    pub order: usize,
}

impl TimeVar {
    pub fn new(component: usize, order: usize) -> Self {
        Self {
            copy: 0,
            component,
            order,
        }
    }

    pub fn primed(component: usize, order: usize) -> Self {
        Self {
            copy: 1,
            component,
            order,
        }
    }
}

impl fmt::Display for TimeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.copy == 0 { "t" } else { "t'" };
        write!(f, "{}[{},{}]", name, self.component, self.order)
    }
}

/// The coefficient ring shared by a family of time polynomials: the finite
/// variable universe `{t[alpha,k] : alpha <= N, k <= K_t}` (optionally
/// doubled by a primed copy) together with the truncation cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    components: usize,
    max_order: usize,
    copies: usize,
    grading: Grading,
    degree_cap: u32,
}

impl PolyRing {
    pub fn new(
        components: usize,
        max_order: usize,
        copies: usize,
        grading: Grading,
        degree_cap: u32,
    ) -> Result<Arc<Self>> {
        if components == 0 {
            return Err(Error::config("number of components must be at least 1"));
        }
        if !(1..=2).contains(&copies) {
            return Err(Error::config("time alphabet copies must be 1 or 2"));
        }
        if degree_cap > 200 {
            return Err(Error::config("degree cap above 200 is not supported"));
        }
        if max_order == 0 && degree_cap > 0 {
            return Err(Error::config("K_t must be at least 1"));
        }
        Ok(Arc::new(Self {
            components,
            max_order,
            copies,
            grading,
            degree_cap,
        }))
    }

    /// Weighted ring with `K_t = D`, which is the smallest order bound that
    /// loses nothing under the weighted grading.
    pub fn weighted(components: usize, copies: usize, degree_cap: u32) -> Result<Arc<Self>> {
        Self::new(
            components,
            degree_cap.max(1) as usize,
            copies,
            Grading::Weighted,
            degree_cap,
        )
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn n_vars(&self) -> usize {
        self.copies * self.components * self.max_order
    }

    pub fn index(&self, var: TimeVar) -> Option<usize> {
        let TimeVar {
            copy,
            component,
            order,
        } = var;
        if (copy as usize) < self.copies
            && (1..=self.components).contains(&component)
            && (1..=self.max_order).contains(&order)
        {
            Some(((copy as usize) * self.components + component - 1) * self.max_order + order - 1)
        } else {
            None
        }
    }

    pub fn var(&self, index: usize) -> TimeVar {
        let order = index % self.max_order + 1;
        let rest = index / self.max_order;
        TimeVar {
            copy: (rest / self.components) as u8,
            component: rest % self.components + 1,
            order,
        }
    }

    pub fn weight_of(&self, index: usize) -> u32 {
        match self.grading {
            Grading::Total => 1,
            Grading::Weighted => (index % self.max_order + 1) as u32,
        }
    }

    /// Same universe with a different cap.
    pub fn with_cap(&self, degree_cap: u32) -> Arc<Self> {
        Arc::new(Self {
            degree_cap,
            ..self.clone()
        })
    }

    pub(crate) fn ensure_same(&self, other: &PolyRing) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::config(format!(
                "mismatched coefficient rings: {self:?} vs {other:?}"
            )))
        }
    }
}
