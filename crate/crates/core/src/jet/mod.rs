//! Delta-polynomial rings `O(X)[T', ..., T^(n)]` over `R_{d,k}`.
//!
//! An [`Ambient`] fixes the coefficient ring, the list of jet variables that
//! may occur, and a truncation rule; a [`DeltaPoly`] is a sparse polynomial
//! living in one ambient. Jet variables carry a word over the two
//! derivation directions `delta` and `delta_1`, so the coordinates of
//! `J^1(J^1(X))` (`T`, `delta T`, `delta_1 T`, `delta_1 delta T`) and those of
//! `J^2(X)` share one type.
//!
//! Truncation is by a monomial ideal: either a weighted degree bound, or a
//! bound on `v_p(coefficient) + weighted degree` for series meant to be
//! evaluated on the formal disk. Both ideals are stable under products and
//! under the universal p-derivation up to the documented loss of one digit,
//! so every operation may truncate its intermediate results.

mod diagram;
mod map;
mod poly;
mod prolong;

pub use diagram::{verify_jet_square, DiagramReport, GeneratorCheck, JetSquare};
pub use map::{CoefficientMap, RingMapSpec};
pub use poly::{DeltaPoly, PolyRing};
pub use prolong::{fold_order_independent, jet_eval};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::padic::{ArithError, UnramifiedRing};

/// Maximum number of variables in one ambient.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("too many variables for one ambient ({0} > 8)")]
    TooManyVariables(usize),
    #[error("{0} is beyond the jet order declared by the target ambient")]
    JetOrderOverflow(String),
    #[error("variable {0} has no image under the ring map")]
    UnboundVariable(String),
    #[error("precision exhausted: {0}")]
    Precision(#[from] ArithError),
    #[error("point has {got} coordinates, ambient has {expected} base coordinates")]
    PointArity { expected: usize, got: usize },
    #[error("ambients use different coefficient rings")]
    RingMismatch,
}

/// A direction of p-differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Delta,
    Delta1,
}

/// `delta_w T_i`: a base coordinate index plus a word of directions.
///
/// The word is read left to right as the order of application, so
/// `delta_1 delta T` is `[Delta, Delta1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVariable {
    base: u8,
    order: u8,
    /// Bit `j` set iff step `j` is `delta_1`.
    word: u8,
}

impl JetVariable {
    pub fn base(index: usize) -> Self {
        JetVariable { base: index as u8, order: 0, word: 0 }
    }

    /// `delta^order T_index` using only the first direction.
    pub fn jet(index: usize, order: usize) -> Self {
        JetVariable { base: index as u8, order: order as u8, word: 0 }
    }

    pub fn from_word(index: usize, word: &[Branch]) -> Self {
        let bits =
            word.iter().enumerate().fold(0u8, |acc, (j, b)| if *b == Branch::Delta1 { acc | (1 << j) } else { acc });
        JetVariable { base: index as u8, order: word.len() as u8, word: bits }
    }

    pub fn base_index(&self) -> usize {
        self.base as usize
    }

    pub fn jet_order(&self) -> usize {
        self.order as usize
    }

    pub fn word(&self) -> Vec<Branch> {
        (0..self.order).map(|j| if self.word & (1 << j) != 0 { Branch::Delta1 } else { Branch::Delta }).collect()
    }

    /// The variable `direction(self)`.
    pub fn prolonged(&self, direction: Branch) -> Self {
        let bit = if direction == Branch::Delta1 { 1 << self.order } else { 0 };
        JetVariable { base: self.base, order: self.order + 1, word: self.word | bit }
    }

    /// Printed form: base name, then `'` per step, with `1` after a `delta_1` step.
    pub fn display_with(&self, base_names: &[String]) -> String {
        let mut s = base_names.get(self.base as usize).cloned().unwrap_or_else(|| format!("T{}", self.base));
        for b in self.word() {
            s.push('\'');
            if b == Branch::Delta1 {
                s.push('1');
            }
        }
        s
    }
}

/// One conjunct of a truncation rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeRule {
    /// Keep monomials with `sum w_i e_i <= max`.
    AtMost { weights: Vec<u32>, max: u32 },
    /// Keep terms with `v_p(c) + sum w_i e_i < bound`.
    PadicBelow { weights: Vec<u32>, bound: u32 },
}

impl DegreeRule {
    fn weighted(weights: &[u32], m: &Monomial) -> u32 {
        weights.iter().zip(m.0.iter()).map(|(w, &e)| w * e as u32).sum()
    }

    fn keeps(&self, m: &Monomial, valuation: u32) -> bool {
        match self {
            DegreeRule::AtMost { weights, max } => Self::weighted(weights, m) <= *max,
            DegreeRule::PadicBelow { weights, bound } => {
                (Self::weighted(weights, m) as u64 + valuation as u64) < *bound as u64
            }
        }
    }

    fn keeps_monomial(&self, m: &Monomial) -> bool {
        self.keeps(m, 0)
    }
}

/// Exponent vector aligned with the ambient's variable list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub(crate) [u8; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::one();
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        let mut m = Monomial::one();
        m.0[..exps.len()].copy_from_slice(exps);
        m
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn exponents(&self) -> &[u8; MAX_VARS] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Panics if an exponent leaves `u8`; truncation rules keep them far below.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(std::array::from_fn(|i| self.0[i].checked_add(other.0[i]).expect("exponent overflow")))
    }

    pub fn pow(&self, e: u32) -> Monomial {
        Monomial(self.0.map(|x| u8::try_from(x as u32 * e).expect("exponent overflow")))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Coefficient ring, variable list and truncation rule shared by polynomials.
#[derive(Debug)]
pub struct Ambient {
    ring: UnramifiedRing,
    base_names: Vec<String>,
    vars: Vec<JetVariable>,
    rules: Vec<DegreeRule>,
    /// Display names overriding the derived ones, one per variable.
    labels: Option<Vec<String>>,
}

impl Ambient {
    pub fn new(
        ring: UnramifiedRing,
        base_names: Vec<String>,
        vars: Vec<JetVariable>,
        rules: Vec<DegreeRule>,
    ) -> Result<Arc<Self>, JetError> {
        if vars.len() > MAX_VARS {
            return Err(JetError::TooManyVariables(vars.len()));
        }
        Ok(Arc::new(Ambient { ring, base_names, vars, rules, labels: None }))
    }

    /// Variables `delta^j T_i` for `i < bases`, `j <= max_order`, truncated by
    /// total degree `max_degree`.
    pub fn jets(ring: UnramifiedRing, bases: usize, max_order: usize, max_degree: u32) -> Result<Arc<Self>, JetError> {
        let vars: Vec<_> = (0..bases).flat_map(|i| (0..=max_order).map(move |j| JetVariable::jet(i, j))).collect();
        let n = vars.len();
        let names = (0..bases).map(|i| format!("T{i}")).collect();
        Self::new(ring, names, vars, vec![DegreeRule::AtMost { weights: vec![1; n], max: max_degree }])
    }

    pub fn ring(&self) -> &UnramifiedRing {
        &self.ring
    }

    pub fn vars(&self) -> &[JetVariable] {
        &self.vars
    }

    pub fn rules(&self) -> &[DegreeRule] {
        &self.rules
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn num_bases(&self) -> usize {
        self.vars.iter().map(|v| v.base_index() + 1).max().unwrap_or(0).max(self.base_names.len())
    }

    pub fn index_of(&self, v: &JetVariable) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    pub fn var_name(&self, i: usize) -> String {
        match &self.labels {
            Some(labels) => labels[i].clone(),
            None => self.vars[i].display_with(&self.base_names),
        }
    }

    pub fn keeps(&self, m: &Monomial, valuation: u32) -> bool {
        self.rules.iter().all(|r| r.keeps(m, valuation))
    }

    pub fn keeps_monomial(&self, m: &Monomial) -> bool {
        self.rules.iter().all(|r| r.keeps_monomial(m))
    }

    /// `x1^e1*x2^e2...`, or `1` for the empty monomial.
    pub fn monomial_string(&self, m: &Monomial) -> String {
        let parts: Vec<String> = (0..self.vars.len())
            .filter(|&i| m.0[i] > 0)
            .map(|i| {
                let name = self.var_name(i);
                if m.0[i] == 1 {
                    name
                } else {
                    format!("{name}^{}", m.0[i])
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Same ring, names and variables, different truncation.
    pub fn with_rules(&self, rules: Vec<DegreeRule>) -> Arc<Self> {
        Arc::new(Ambient {
            ring: self.ring.clone(),
            base_names: self.base_names.clone(),
            vars: self.vars.clone(),
            rules,
            labels: self.labels.clone(),
        })
    }

    /// Same ambient with explicit display names, e.g. for tensor factors.
    pub fn with_labels(&self, labels: Vec<String>) -> Arc<Self> {
        assert_eq!(labels.len(), self.vars.len(), "one label per variable");
        Arc::new(Ambient {
            ring: self.ring.clone(),
            base_names: self.base_names.clone(),
            vars: self.vars.clone(),
            rules: self.rules.clone(),
            labels: Some(labels),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::RingParams;

    #[test]
    fn variable_words_and_names() {
        let names = vec!["T0".to_string()];
        let t = JetVariable::base(0);
        let dt = t.prolonged(Branch::Delta);
        let d1t = t.prolonged(Branch::Delta1);
        let d1dt = dt.prolonged(Branch::Delta1);
        assert_eq!(dt, JetVariable::jet(0, 1));
        assert_eq!(dt.prolonged(Branch::Delta), JetVariable::jet(0, 2));
        assert_eq!(d1dt.word(), vec![Branch::Delta, Branch::Delta1]);
        assert_eq!(JetVariable::from_word(0, &[Branch::Delta, Branch::Delta1]), d1dt);
        assert_eq!(t.display_with(&names), "T0");
        assert_eq!(dt.display_with(&names), "T0'");
        assert_eq!(JetVariable::jet(0, 2).display_with(&names), "T0''");
        assert_eq!(d1t.display_with(&names), "T0'1");
        assert_eq!(d1dt.display_with(&names), "T0''1");
        assert_ne!(d1t, dt);
    }

    #[test]
    fn ambient_limits_and_monomial_strings() {
        let ring = UnramifiedRing::new(RingParams::prime_field(3, 3)).unwrap();
        assert!(matches!(Ambient::jets(ring.clone(), 3, 2, 4), Err(JetError::TooManyVariables(9))));
        let amb = Ambient::jets(ring, 1, 2, 4).unwrap();
        let m = Monomial::from_exponents(&[2, 1, 0]);
        assert_eq!(amb.monomial_string(&m), "T0^2*T0'");
        assert_eq!(amb.monomial_string(&Monomial::one()), "1");
        assert!(amb.keeps_monomial(&m));
        assert!(!amb.keeps_monomial(&Monomial::from_exponents(&[2, 1, 2])));
    }
}
