use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::random::generate_random_clifford;
use crate::algebra::{Grading, PolyRing, Rational};
use crate::error::{Error, Result};
use crate::fermion::{CliffordFactor, CliffordSpec, ModeWindow};

/// Check ids understood by the runner, in report order.
pub const CHECK_IDS: &[&str] = &[
    "antisymmetry",
    "ba-constructions",
    "ba-pairing",
    "bilinear",
    "eigenfunction",
    "flow",
    "flow-resolution",
    "hirota",
    "lax",
    "linear-components",
    "linear-t1",
    "linear-tau",
    "sato",
    "wave-inverse",
    "zero-curvature",
];

pub const DEFAULT_DEGREE: u32 = 3;
pub const DEFAULT_Z_MAX: u32 = 3;
pub const DEFAULT_K_TRUNC: usize = 3;

fn default_degree() -> u32 {
    DEFAULT_DEGREE
}

fn default_z_max() -> u32 {
    DEFAULT_Z_MAX
}

fn default_k_trunc() -> usize {
    DEFAULT_K_TRUNC
}

/// A coefficient written either as an integer or as `"num/den"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Int(i64),
    Text(String),
}

impl Coefficient {
    fn value(&self) -> Result<Rational> {
        match self {
            Coefficient::Int(x) => Ok(Rational::from_integer((*x).into())),
            Coefficient::Text(s) => Rational::from_str(s.trim())
                .map_err(|e| Error::Config(format!("bad coefficient `{s}`: {e}"))),
        }
    }
}

/// One factor `exp(c psi_i^(alpha) psi*_j^(beta))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorEntry {
    pub alpha: usize,
    pub i: i64,
    pub beta: usize,
    pub j: i64,
    pub c: Coefficient,
}

/// Where the group element comes from. At most one source may be given; none
/// means `g = 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorEntry>>,
    /// `factor alpha i beta j num/den` lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Path to a file with the same line format, relative to the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Number of randomly drawn factors (uses the scenario seed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "Scenario::default_name")]
    pub name: String,
    pub components: usize,
    /// Mode window `[lo, hi)`.
    pub window: [i64; 2],
    /// Inclusive range of the uniform charge `p`.
    pub p_range: [i64; 2],
    #[serde(default)]
    pub clifford: CliffordSource,
    /// Time-degree cap `D` (weighted).
    #[serde(default = "default_degree")]
    pub degree: u32,
    /// Highest time order `K_t`; defaults to `D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_t: Option<usize>,
    #[serde(default = "default_z_max")]
    pub z_max: u32,
    #[serde(default = "default_k_trunc")]
    pub k_trunc: usize,
    /// Check ids; empty or `["all"]` selects everything.
    #[serde(default)]
    pub suite: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    fn default_name() -> String {
        "scenario".into()
    }

    /// Three components in `[-3, 3)`, charges `-2..=2`, three random factors.
    pub fn default_verification(seed: u64) -> Self {
        Self {
            name: "default".into(),
            components: 3,
            window: [-3, 3],
            p_range: [-2, 2],
            clifford: CliffordSource {
                random: Some(3),
                ..Default::default()
            },
            degree: DEFAULT_DEGREE,
            k_t: None,
            z_max: DEFAULT_Z_MAX,
            k_trunc: DEFAULT_K_TRUNC,
            suite: Vec::new(),
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Reads a scenario; relative Clifford file paths are resolved against
    /// the scenario's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = Self::from_json(&text)?;
        if let (Some(f), Some(dir)) = (&s.clifford.file, path.parent()) {
            if f.is_relative() {
                s.clifford.file = Some(dir.join(f));
            }
        }
        Ok(s)
    }

    pub fn k_t(&self) -> usize {
        self.k_t.unwrap_or(self.degree as usize)
    }

    pub fn mode_window(&self) -> Result<ModeWindow> {
        ModeWindow::new(self.window[0], self.window[1])
    }

    /// The window one mode wider on each side, used for the stability gate.
    pub fn wider_window(&self) -> Result<ModeWindow> {
        ModeWindow::new(self.window[0] - 1, self.window[1] + 1)
    }

    pub fn ring(&self) -> Result<std::sync::Arc<PolyRing>> {
        PolyRing::new(self.components, self.k_t(), 1, Grading::Weighted, self.degree)
    }

    /// Selected check ids, sorted and deduplicated.
    pub fn selected_checks(&self) -> Result<Vec<&'static str>> {
        if self.suite.is_empty() || self.suite.iter().any(|s| s == "all") {
            return Ok(CHECK_IDS.to_vec());
        }
        let mut out = Vec::new();
        for s in &self.suite {
            let id = CHECK_IDS
                .iter()
                .find(|c| **c == s.as_str())
                .ok_or_else(|| Error::Config(format!("unknown check id `{s}`; known: {}", CHECK_IDS.join(", "))))?;
            out.push(*id);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Consistency of all parameters, before anything is computed.
    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::Config("components must be at least 1".into()));
        }
        let w = self.mode_window()?;
        let [lo, hi] = self.p_range;
        if lo > hi {
            return Err(Error::Config(format!("empty p range {lo}..={hi}")));
        }
        let margin = i64::from(self.components > 1);
        if lo - margin < w.lo || hi + margin > w.hi {
            return Err(Error::Config(format!(
                "mode window {w} does not admit charges {lo}..={hi} (needs [{}, {}))",
                lo - margin,
                hi + margin
            )));
        }
        if self.k_t() == 0 {
            return Err(Error::Config("K_t must be at least 1".into()));
        }
        if self.z_max == 0 || self.z_max as usize > self.k_t() {
            return Err(Error::Config(format!(
                "Z_max = {} must lie in 1..=K_t = {}",
                self.z_max,
                self.k_t()
            )));
        }
        if self.k_trunc == 0 || self.k_trunc > self.degree as usize {
            return Err(Error::Config(format!(
                "K_trunc = {} must lie in 1..=D = {} (wave coefficients are computed up to D)",
                self.k_trunc, self.degree
            )));
        }
        let sources = [
            self.clifford.factors.is_some(),
            self.clifford.text.is_some(),
            self.clifford.file.is_some(),
            self.clifford.random.is_some(),
        ];
        if sources.iter().filter(|x| **x).count() > 1 {
            return Err(Error::Config("give at most one of clifford.factors/text/file/random".into()));
        }
        self.ring()?;
        self.selected_checks()?;
        Ok(())
    }

    /// The group element described by the scenario (random draws use the
    /// scenario seed; `attempt` selects later draws of the same stream).
    pub fn clifford_spec(&self, attempt: u64) -> Result<CliffordSpec> {
        let c = &self.clifford;
        let spec = if let Some(fs) = &c.factors {
            let mut out = Vec::with_capacity(fs.len());
            for f in fs {
                out.push(CliffordFactor::new(f.alpha, f.i, f.beta, f.j, f.c.value()?));
            }
            CliffordSpec::new(out)
        } else if let Some(t) = &c.text {
            CliffordSpec::parse(t)?
        } else if let Some(path) = &c.file {
            let t = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            CliffordSpec::parse(&t)?
        } else if let Some(count) = c.random {
            generate_random_clifford(self.components, self.mode_window()?, count, self.seed.wrapping_add(attempt))?
        } else {
            CliffordSpec::identity()
        };
        spec.validate(self.components, &self.mode_window()?)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::from_json(r#"{"components": 2, "window": [-3, 3], "p_range": [-2, 2]}"#).unwrap()
    }

    #[test]
    fn documented_defaults() {
        let s = base();
        assert_eq!((s.degree, s.z_max, s.k_trunc, s.k_t()), (3, 3, 3, 3));
        assert_eq!(s.selected_checks().unwrap().len(), CHECK_IDS.len());
        assert!(s.clifford_spec(0).unwrap().is_identity());
        s.validate().unwrap();
    }

    #[test]
    fn rejects_inconsistent_settings() {
        let bad = |f: &dyn Fn(&mut Scenario)| {
            let mut s = base();
            f(&mut s);
            assert!(matches!(s.validate(), Err(Error::Config(_))), "{s:?}");
        };
        bad(&|s| s.p_range = [-3, 2]);
        bad(&|s| s.z_max = 4);
        bad(&|s| s.k_trunc = 4);
        bad(&|s| s.k_trunc = 0);
        bad(&|s| s.components = 0);
        bad(&|s| s.window = [0, 3]);
        bad(&|s| s.suite = vec!["nonsense".into()]);
        bad(&|s| {
            s.clifford.random = Some(1);
            s.clifford.text = Some(String::new());
        });
        assert!(matches!(
            Scenario::from_json(r#"{"components": 2, "window": [-3, 3], "p_range": [-2, 2], "typo": 1}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn factor_sources_agree() {
        let mut a = base();
        a.clifford.factors = Some(vec![FactorEntry {
            alpha: 1,
            i: 0,
            beta: 2,
            j: -1,
            c: Coefficient::Text("-1/2".into()),
        }]);
        let mut b = base();
        b.clifford.text = Some("factor 1 0 2 -1 -1/2\n".into());
        assert_eq!(a.clifford_spec(0).unwrap(), b.clifford_spec(0).unwrap());
        let mut c = base();
        c.clifford.factors = Some(vec![FactorEntry {
            alpha: 1,
            i: 0,
            beta: 1,
            j: -1,
            c: Coefficient::Int(2),
        }]);
        assert_eq!(c.clifford_spec(0).unwrap().factors[0].c, Rational::from_integer(2.into()));
    }

    #[test]
    fn suite_selection_is_sorted() {
        let mut s = base();
        s.suite = vec!["linear-t1".into(), "bilinear".into(), "bilinear".into()];
        assert_eq!(s.selected_checks().unwrap(), vec!["bilinear", "linear-t1"]);
    }
}
