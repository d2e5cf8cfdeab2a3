use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::state::{apply_fermion, FermionKind, FockVector, ModeWindow};
use crate::algebra::Rational;
use crate::error::{Error, Result};

/// `exp(c psi_i^(alpha) psi*_j^(beta))`, which is `1 + c psi psi*` since the
/// bilinear is nilpotent for distinct modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordFactor {
    pub alpha: usize,
    pub i: i64,
    pub beta: usize,
    pub j: i64,
    pub c: Rational,
}

impl CliffordFactor {
    pub fn new(alpha: usize, i: i64, beta: usize, j: i64, c: Rational) -> Self {
        Self { alpha, i, beta, j, c }
    }
}

/// Ordered product of single-bilinear exponentials; the last factor acts
/// first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CliffordSpec {
    pub factors: Vec<CliffordFactor>,
}

impl CliffordSpec {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(factors: Vec<CliffordFactor>) -> Self {
        Self { factors }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn validate(&self, components: usize, w: &ModeWindow) -> Result<()> {
        for (n, f) in self.factors.iter().enumerate() {
            if (f.alpha, f.i) == (f.beta, f.j) {
                return Err(Error::config(format!(
                    "factor {n}: same-mode bilinear at ({}, {})",
                    f.alpha, f.i
                )));
            }
            for a in [f.alpha, f.beta] {
                if a == 0 || a > components {
                    return Err(Error::config(format!("factor {n}: component {a} outside 1..={components}")));
                }
            }
            for m in [f.i, f.j] {
                if !w.contains(m) {
                    return Err(Error::config(format!("factor {n}: mode {m} outside window {w}")));
                }
            }
        }
        Ok(())
    }

    /// Whether some factor uses the lowest or highest mode of the window.
    pub fn touches_boundary(&self, w: &ModeWindow) -> bool {
        self.factors
            .iter()
            .any(|f| [f.i, f.j].iter().any(|&m| m == w.lo || m == w.hi - 1))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: n + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 || fields[0] != "factor" {
                return Err(err(format!("expected `factor alpha i beta j num/den`, got `{line}`")));
            }
            let int = |s: &str| s.parse::<i64>().map_err(|e| err(format!("`{s}`: {e}")));
            let comp = |s: &str| s.parse::<usize>().map_err(|e| err(format!("`{s}`: {e}")));
            let c = Rational::from_str(fields[5]).map_err(|e| err(format!("`{}`: {e}", fields[5])))?;
            factors.push(CliffordFactor::new(comp(fields[1])?, int(fields[2])?, comp(fields[3])?, int(fields[4])?, c));
        }
        Ok(Self { factors })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CliffordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.factors {
            writeln!(f, "factor {} {} {} {} {}", x.alpha, x.i, x.beta, x.j, x.c)?;
        }
        Ok(())
    }
}

/// `g v` with factors applied right to left.
pub fn apply_clifford(g: &CliffordSpec, v: &FockVector) -> Result<FockVector> {
    g.validate(v.components(), &v.window())?;
    let mut out = v.clone();
    for f in g.factors.iter().rev() {
        if f.c.is_zero() {
            continue;
        }
        let moved = apply_fermion(
            FermionKind::Psi,
            f.alpha,
            f.i,
            &apply_fermion(FermionKind::PsiStar, f.beta, f.j, &out)?,
        )?;
        out = if f.c.is_one() { out.plus(&moved) } else { out.plus(&moved.scale(&f.c)) };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Grading, PolyRing, TimePolynomial};
    use crate::fermion::state::FockState;

    #[test]
    fn text_round_trip() {
        let g = CliffordSpec::new(vec![
            CliffordFactor::new(1, 0, 2, -1, rat(-1, 2)),
            CliffordFactor::new(2, 1, 1, -2, rat(3, 1)),
        ]);
        let text = g.to_text();
        assert_eq!(text, "factor 1 0 2 -1 -1/2\nfactor 2 1 1 -2 3\n");
        assert_eq!(CliffordSpec::parse(&text).unwrap(), g);
        assert_eq!(CliffordSpec::parse("# comment\n\nfactor 1 0 1 -1 2\n").unwrap().factors[0].c, rat(2, 1));
        assert!(matches!(CliffordSpec::parse("factor 1 0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(CliffordSpec::parse("\nfactor 1 0 1 -1 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn validation() {
        let w = ModeWindow::new(-2, 2).unwrap();
        let same = CliffordSpec::new(vec![CliffordFactor::new(1, 0, 1, 0, rat(1, 1))]);
        assert!(same.validate(1, &w).is_err());
        let outside = CliffordSpec::new(vec![CliffordFactor::new(1, 2, 1, 0, rat(1, 1))]);
        assert!(outside.validate(1, &w).is_err());
        let bad_comp = CliffordSpec::new(vec![CliffordFactor::new(3, 0, 1, -1, rat(1, 1))]);
        assert!(bad_comp.validate(2, &w).is_err());
    }

    fn setup() -> (ModeWindow, std::sync::Arc<PolyRing>, FockVector) {
        let w = ModeWindow::new(-3, 3).unwrap();
        let r = PolyRing::new(1, 2, 1, Grading::Weighted, 2).unwrap();
        let v = FockVector::basis(FockState::vacuum(1, &w), w, &r);
        (w, r, v)
    }

    #[test]
    fn identity_and_single_factor() {
        let (_, _, v) = setup();
        assert_eq!(apply_clifford(&CliffordSpec::identity(), &v).unwrap(), v);
        let a = rat(5, 2);
        let g = CliffordSpec::new(vec![CliffordFactor::new(1, 0, 1, -1, a.clone())]);
        let ex = apply_fermion(FermionKind::Psi, 1, 0, &apply_fermion(FermionKind::PsiStar, 1, -1, &v).unwrap()).unwrap();
        assert_eq!(apply_clifford(&g, &v).unwrap(), v.plus(&ex.scale(&a)));
    }

    #[test]
    fn factor_order_matters() {
        let (w, r, v) = setup();
        // psi_0 psi*_-1 then psi_1 psi*_0 moves a particle -1 -> 0 -> 1;
        // the other order cannot.
        let f1 = CliffordFactor::new(1, 0, 1, -1, rat(1, 1));
        let f2 = CliffordFactor::new(1, 1, 1, 0, rat(1, 1));
        let ab = apply_clifford(&CliffordSpec::new(vec![f2.clone(), f1.clone()]), &v).unwrap();
        let ba = apply_clifford(&CliffordSpec::new(vec![f1, f2]), &v).unwrap();
        assert_ne!(ab, ba);
        assert_eq!(ab.len(), 3);
        assert_eq!(ba.len(), 2);
        // Hand expansion: (1 + psi_1 psi*_0)(1 + psi_0 psi*_-1)|0>
        // = |0> + |-1 -> 0> + |-1 -> 1>, all with sign +1 here.
        for (s, c) in ab.terms() {
            assert_eq!(*c, TimePolynomial::one(&r), "{}", s.display(&w));
        }
    }
}
