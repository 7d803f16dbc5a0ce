use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::ser::{Serialize, SerializeMap, Serializer};

use super::{Ambient, JetError, JetVariable, Monomial};
use crate::padic::{ArithError, UnramifiedElement, UnramifiedRing};
use crate::witt::BaseRing;

/// A truncated polynomial with coefficients in `R_{d,k}`.
///
/// Invariants: every stored coefficient is nonzero modulo `p^prec`, carries
/// precision exactly `prec`, and its term survives the ambient's truncation.
#[derive(Clone)]
pub struct DeltaPoly {
    amb: Arc<Ambient>,
    prec: u32,
    terms: BTreeMap<Monomial, UnramifiedElement>,
}

impl DeltaPoly {
    pub fn zero(amb: &Arc<Ambient>, prec: u32) -> Self {
        DeltaPoly { amb: amb.clone(), prec: prec.min(amb.ring().k()), terms: BTreeMap::new() }
    }

    pub fn constant(amb: &Arc<Ambient>, c: &UnramifiedElement) -> Self {
        Self::from_terms(amb, c.prec(), [(Monomial::one(), c.clone())])
    }

    pub fn from_int(amb: &Arc<Ambient>, n: i64, prec: u32) -> Self {
        let c = amb.ring().with_prec(&amb.ring().from_int(n), prec);
        Self::constant(amb, &c)
    }

    /// The coordinate function of a declared variable.
    pub fn var(amb: &Arc<Ambient>, v: &JetVariable, prec: u32) -> Result<Self, JetError> {
        let i = amb.index_of(v).ok_or_else(|| JetError::JetOrderOverflow(v.display_with(amb.base_names())))?;
        Ok(Self::var_at(amb, i, prec))
    }

    /// The coordinate function of the `i`-th declared variable.
    pub fn var_at(amb: &Arc<Ambient>, i: usize, prec: u32) -> Self {
        let one = amb.ring().with_prec(&amb.ring().one(), prec);
        Self::from_terms(amb, one.prec(), [(Monomial::var(i), one)])
    }

    /// Sums repeated monomials, reduces to `prec` and applies the truncation.
    pub fn from_terms<I>(amb: &Arc<Ambient>, prec: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, UnramifiedElement)>,
    {
        let ring = amb.ring();
        let prec = prec.min(ring.k());
        let mut acc: BTreeMap<Monomial, UnramifiedElement> = BTreeMap::new();
        for (m, c) in terms {
            let c = ring.with_prec(&c, prec);
            match acc.get_mut(&m) {
                Some(e) => *e = ring.add(e, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut out = DeltaPoly { amb: amb.clone(), prec, terms: acc };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        let ring = self.amb.ring().clone();
        let prec = self.prec;
        let amb = self.amb.clone();
        self.terms.retain(|m, c| {
            if c.prec() > prec {
                *c = ring.with_prec(c, prec);
            }
            !c.is_zero() && amb.keeps(m, c.valuation())
        });
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.amb
    }

    pub fn ring(&self) -> &UnramifiedRing {
        self.amb.ring()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, UnramifiedElement> {
        &self.terms
    }

    /// Number of nonzero terms; see [`DeltaPoly::is_zero`] for emptiness.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> UnramifiedElement {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring().with_prec(&self.ring().zero(), self.prec))
    }

    pub fn constant_term(&self) -> UnramifiedElement {
        self.coefficient(&Monomial::one())
    }

    /// Highest total degree of a surviving monomial (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest jet order among variables that actually occur.
    pub fn max_jet_order(&self) -> usize {
        let vars = self.amb.vars();
        self.terms
            .keys()
            .flat_map(|m| (0..vars.len()).filter(move |&i| m.0[i] > 0))
            .map(|i| vars[i].jet_order())
            .max()
            .unwrap_or(0)
    }

    fn check_same(&self, other: &DeltaPoly) {
        assert!(
            Arc::ptr_eq(&self.amb, &other.amb)
                || (self.amb.vars() == other.amb.vars() && self.amb.rules() == other.amb.rules()),
            "operands live in different ambients"
        );
    }

    pub fn add(&self, other: &DeltaPoly) -> DeltaPoly {
        self.check_same(other);
        let ring = self.ring();
        let prec = self.prec.min(other.prec);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(*m, ring.with_prec(c, prec));
        }
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(e) => *e = ring.add(e, c),
                None => {
                    terms.insert(*m, ring.with_prec(c, prec));
                }
            }
        }
        let mut out = DeltaPoly { amb: self.amb.clone(), prec, terms };
        out.normalize();
        out
    }

    pub fn neg(&self) -> DeltaPoly {
        let ring = self.ring();
        DeltaPoly {
            amb: self.amb.clone(),
            prec: self.prec,
            terms: self.terms.iter().map(|(m, c)| (*m, ring.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &DeltaPoly) -> DeltaPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DeltaPoly) -> DeltaPoly {
        self.check_same(other);
        let ring = self.ring();
        let prec = self.prec.min(other.prec);
        let amb = &self.amb;
        let rhs: Vec<(Monomial, &UnramifiedElement, u32)> =
            other.terms.iter().map(|(m, c)| (*m, c, c.valuation())).collect();
        let mut acc: HashMap<Monomial, UnramifiedElement> = HashMap::new();
        for (m1, c1) in &self.terms {
            let v1 = c1.valuation();
            for (m2, c2, v2) in &rhs {
                if v1 + v2 >= prec {
                    continue;
                }
                let m = m1.mul(m2);
                // v(c1 c2) >= v1 + v2 and every rule is monotone in the valuation.
                if !amb.keeps(&m, v1 + v2) {
                    continue;
                }
                let c = ring.mul(c1, c2);
                match acc.get_mut(&m) {
                    Some(e) => *e = ring.add(e, &c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        let mut out = DeltaPoly { amb: amb.clone(), prec, terms: acc.into_iter().collect() };
        out.normalize();
        out
    }

    pub fn pow(&self, mut e: u64) -> DeltaPoly {
        let mut base = self.clone();
        let mut acc = DeltaPoly::from_int(&self.amb, 1, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, c: &UnramifiedElement) -> DeltaPoly {
        let ring = self.ring();
        let prec = self.prec.min(c.prec());
        let terms = self.terms.iter().map(|(m, a)| (*m, ring.mul(a, c)));
        DeltaPoly::from_terms(&self.amb, prec, terms)
    }

    pub fn scale_int(&self, n: i64) -> DeltaPoly {
        self.scale(&self.ring().from_int(n))
    }

    /// Multiplication by `p^e`; precision grows by `e`, capped at `k`.
    pub fn mul_by_p_pow(&self, e: u32) -> DeltaPoly {
        let ring = self.ring();
        let prec = (self.prec + e).min(ring.k());
        let terms = self.terms.iter().map(|(m, c)| (*m, ring.mul_by_p_pow(c, e)));
        DeltaPoly::from_terms(&self.amb, prec, terms)
    }

    /// Exact division by `p^e`; fails unless every coefficient is divisible.
    pub fn div_by_p_pow(&self, e: u32) -> Result<DeltaPoly, ArithError> {
        if self.prec < e {
            return Err(ArithError::InsufficientPrecision { needed: e, have: self.prec });
        }
        let ring = self.ring();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((*m, ring.div_by_p_pow(c, e)?)))
            .collect::<Result<Vec<_>, ArithError>>()?;
        Ok(DeltaPoly::from_terms(&self.amb, self.prec - e, terms))
    }

    pub fn with_prec(&self, prec: u32) -> DeltaPoly {
        DeltaPoly::from_terms(&self.amb, prec.min(self.prec), self.terms.clone())
    }

    /// Applies `f` to every coefficient, e.g. the Frobenius twist.
    pub fn map_coefficients<F>(&self, f: F) -> DeltaPoly
    where
        F: Fn(&UnramifiedElement) -> UnramifiedElement,
    {
        DeltaPoly::from_terms(&self.amb, self.prec, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Re-homes the polynomial into `target`, matching variables by identity.
    pub fn embed(&self, target: &Arc<Ambient>) -> Result<DeltaPoly, JetError> {
        if target.ring() != self.ring() {
            return Err(JetError::RingMismatch);
        }
        let vars = self.amb.vars();
        let index: Vec<Option<usize>> = vars.iter().map(|v| target.index_of(v)).collect();
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut e = [0u8; super::MAX_VARS];
            for (i, slot) in index.iter().enumerate() {
                if m.0[i] == 0 {
                    continue;
                }
                let j = slot.ok_or_else(|| JetError::JetOrderOverflow(self.amb.var_name(i)))?;
                e[j] = m.0[i];
            }
            out.push((Monomial(e), c.clone()));
        }
        Ok(DeltaPoly::from_terms(target, self.prec, out))
    }

    /// Evaluates at `values[i]` for the `i`-th ambient variable.
    pub fn eval(&self, values: &[UnramifiedElement]) -> Result<UnramifiedElement, JetError> {
        let n = self.amb.vars().len();
        if values.len() != n {
            return Err(JetError::PointArity { expected: n, got: values.len() });
        }
        let ring = self.ring();
        let prec = values.iter().map(|v| v.prec()).fold(self.prec, u32::min);
        let mut powers: Vec<Vec<UnramifiedElement>> =
            values.iter().map(|v| vec![ring.with_prec(&ring.one(), prec), v.clone()]).collect();
        let mut acc = ring.with_prec(&ring.zero(), prec);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..n {
                let e = m.0[i] as usize;
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e {
                    let next = ring.mul(powers[i].last().unwrap(), &values[i]);
                    powers[i].push(next);
                }
                t = ring.mul(&t, &powers[i][e]);
            }
            acc = ring.add(&acc, &t);
        }
        Ok(ring.with_prec(&acc, prec))
    }
}

impl PartialEq for DeltaPoly {
    /// Equal when every coefficient agrees modulo `p^min(prec)`.
    fn eq(&self, other: &Self) -> bool {
        if self.amb.vars() != other.amb.vars() {
            return false;
        }
        let prec = self.prec.min(other.prec);
        let a = self.with_prec(prec);
        let b = other.with_prec(prec);
        a.terms.len() == b.terms.len() && a.terms.iter().zip(&b.terms).all(|(x, y)| x == y)
    }
}

impl fmt::Display for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 (mod p^{})", self.prec);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let coeff =
                    if self.ring().d() == 1 { c.balanced_constant().to_string() } else { format!("{:?}", c.coords()) };
                if m.is_one() {
                    coeff
                } else {
                    format!("{coeff}*{}", self.amb.monomial_string(m))
                }
            })
            .collect();
        write!(f, "{} (mod p^{})", parts.join(" + "), self.prec)
    }
}

impl fmt::Debug for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON form: `{"prec": k, "terms": {monomial: [coordinate digits]}}`.
impl Serialize for DeltaPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: BTreeMap<String, Vec<String>> = self
            .terms
            .iter()
            .map(|(m, c)| (self.amb.monomial_string(m), c.coords().iter().map(u64::to_string).collect()))
            .collect();
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("prec", &self.prec)?;
        map.serialize_entry("terms", &terms)?;
        map.end()
    }
}

/// The polynomial ring of an ambient at a fixed precision, as a Witt base ring.
#[derive(Clone, Debug)]
pub struct PolyRing {
    amb: Arc<Ambient>,
    prec: u32,
}

impl PolyRing {
    pub fn new(amb: &Arc<Ambient>, prec: u32) -> Self {
        PolyRing { amb: amb.clone(), prec }
    }
}

impl BaseRing for PolyRing {
    type Elem = DeltaPoly;

    fn prime(&self) -> u64 {
        self.amb.ring().p()
    }

    fn zero(&self) -> DeltaPoly {
        DeltaPoly::zero(&self.amb, self.prec)
    }

    fn one(&self) -> DeltaPoly {
        DeltaPoly::from_int(&self.amb, 1, self.prec)
    }

    fn from_i128(&self, n: i128) -> DeltaPoly {
        let c = self.amb.ring().with_prec(&self.amb.ring().from_i128(n), self.prec);
        DeltaPoly::constant(&self.amb, &c)
    }

    fn add(&self, a: &DeltaPoly, b: &DeltaPoly) -> DeltaPoly {
        a.add(b)
    }

    fn neg(&self, a: &DeltaPoly) -> DeltaPoly {
        a.neg()
    }

    fn mul(&self, a: &DeltaPoly, b: &DeltaPoly) -> DeltaPoly {
        a.mul(b)
    }
}
