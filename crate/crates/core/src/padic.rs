//! Truncated unramified extensions `W(F_{p^d}) / p^k` of `Z / p^k`.
//!
//! A ring context is built once from a prime `p`, a residue degree `d`, a
//! precision exponent `k` and a monic defining polynomial `m` that is
//! irreducible mod `p`. Elements are coordinate vectors in the basis
//! `1, xi, ..., xi^(d-1)` together with an explicit precision `prec <= k`:
//! a value is only asserted modulo `p^prec`.
//!
//! The Frobenius automorphism is the unique ring automorphism lifting
//! `x -> x^p`; it is determined by the image of `xi`, which is computed once
//! per context by Newton iteration from the seed `xi^p`. The p-derivation is
//! `delta(a) = (phi(a) - a^p) / p` and costs one digit of precision.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Coordinate storage; `d = 1` and `d = 2` stay inline.
pub type Coords = SmallVec<[u64; 2]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("p not prime: {0}")]
    NotPrime(u64),
    #[error("p must be odd (got 2)")]
    EvenPrime,
    #[error("k must be ≥ 2 (got {0})")]
    PrecisionTooSmall(u32),
    #[error("p^k does not fit in 63 bits (p = {p}, k = {k})")]
    ModulusOverflow { p: u64, k: u32 },
    #[error("residue degree must be ≥ 1")]
    ZeroDegree,
    #[error("defining polynomial must be monic of degree {expected}, got {got} coefficients")]
    BadDefiningPolynomial { expected: usize, got: usize },
    #[error("defining polynomial is reducible mod {0}")]
    Reducible(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("element is not a unit (it vanishes mod p)")]
    NotUnit,
    #[error("insufficient precision: need at least {needed}, have {have}")]
    InsufficientPrecision { needed: u32, have: u32 },
    #[error("element is not divisible by p^{0}")]
    NotDivisible(u32),
}

/// Parameters of `R_{d,k}`.
///
/// `modulus_poly` lists the coefficients of the monic defining polynomial
/// from the constant term upward, so it has `d + 1` entries and ends in `1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingParams {
    pub p: u64,
    pub d: usize,
    pub k: u32,
    pub modulus_poly: Vec<i64>,
}

impl RingParams {
    /// `Z / p^k`, defined by `m = X`.
    pub fn prime_field(p: u64, k: u32) -> Self {
        RingParams { p, d: 1, k, modulus_poly: vec![0, 1] }
    }

    pub fn extension(p: u64, k: u32, modulus_poly: Vec<i64>) -> Self {
        let d = modulus_poly.len().saturating_sub(1);
        RingParams { p, d, k, modulus_poly }
    }

    /// Degree `d` with the first monic polynomial irreducible mod `p`, counting
    /// `c_0 + c_1 p + ... + c_{d-1} p^(d-1)` upward from 0.
    pub fn with_degree(p: u64, k: u32, d: usize) -> Result<Self, RingError> {
        if d == 0 {
            return Err(RingError::ZeroDegree);
        }
        if d == 1 {
            return Ok(RingParams::prime_field(p, k));
        }
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        let mut digits = vec![0u64; d];
        loop {
            let mut m = digits.clone();
            m.push(1);
            if fp_poly::is_irreducible(&m, p) {
                let modulus_poly = m.iter().map(|&c| c as i64).collect();
                return Ok(RingParams::extension(p, k, modulus_poly));
            }
            // Irreducibles of every degree exist, so this terminates.
            let mut i = 0;
            while digits[i] + 1 == p {
                digits[i] = 0;
                i += 1;
            }
            digits[i] += 1;
        }
    }
}

/// An element of `R_{d,k}` known modulo `p^prec`.
///
/// Coordinates are stored reduced into `[0, p^prec)`. Equality compares
/// coordinates modulo `p^min(prec)`, so a low-precision value equals every
/// refinement of itself.
#[derive(Clone)]
pub struct UnramifiedElement {
    coords: Coords,
    prec: u32,
    p: u64,
}

impl UnramifiedElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// `p`-adic valuation, capped at `prec`.
    pub fn valuation(&self) -> u32 {
        self.coords.iter().map(|&c| valuation_u64(c, self.p).min(self.prec)).min().unwrap_or(self.prec)
    }

    /// The constant coordinate as a signed integer in `(-p^prec/2, p^prec/2]`.
    pub fn balanced_constant(&self) -> i128 {
        let q = pow_u64(self.p, self.prec) as i128;
        let c = self.coords[0] as i128;
        if 2 * c > q {
            c - q
        } else {
            c
        }
    }
}

/// JSON form: coordinates from the constant term up, as decimal strings, plus
/// the precision exponent.
impl Serialize for UnramifiedElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coords: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        let mut st = serializer.serialize_struct("UnramifiedElement", 2)?;
        st.serialize_field("coords", &coords)?;
        st.serialize_field("prec", &self.prec)?;
        st.end()
    }
}

impl PartialEq for UnramifiedElement {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.coords.len() != other.coords.len() {
            return false;
        }
        let q = pow_u64(self.p, self.prec.min(other.prec));
        self.coords.iter().zip(other.coords.iter()).all(|(a, b)| a % q == b % q)
    }
}

impl fmt::Debug for UnramifiedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            write!(f, "{} + O({}^{})", self.coords[0], self.p, self.prec)
        } else {
            write!(f, "{:?} + O({}^{})", self.coords.as_slice(), self.p, self.prec)
        }
    }
}

struct RingInner {
    p: u64,
    d: usize,
    k: u32,
    /// `p^i` for `i = 0..=k`.
    powers: Vec<u64>,
    /// Non-leading coefficients of `m`, reduced mod `p^k`.
    m_low: Vec<u64>,
    /// `phi(xi)^i` for `i = 0..d`, at precision `k`.
    frob_basis: Vec<Coords>,
    params: RingParams,
}

/// Ring context for `R_{d,k} = W(F_{p^d}) / p^k`.
///
/// Cheap to clone; contexts are immutable and shared behind an `Arc`.
#[derive(Clone)]
pub struct UnramifiedRing {
    inner: Arc<RingInner>,
}

impl fmt::Debug for UnramifiedRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R(p={}, d={}, k={})", self.inner.p, self.inner.d, self.inner.k)
    }
}

impl PartialEq for UnramifiedRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.params == other.inner.params
    }
}

impl UnramifiedRing {
    // trace: ring_new | ring context validation | ring_new_rejects_bad_parameters | exact
    pub fn new(params: RingParams) -> Result<Self, RingError> {
        let RingParams { p, d, k, ref modulus_poly } = params;
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if p == 2 {
            return Err(RingError::EvenPrime);
        }
        if k < 2 {
            return Err(RingError::PrecisionTooSmall(k));
        }
        if d == 0 {
            return Err(RingError::ZeroDegree);
        }
        if modulus_poly.len() != d + 1 || modulus_poly[d] != 1 {
            return Err(RingError::BadDefiningPolynomial { expected: d, got: modulus_poly.len() });
        }
        let mut powers = vec![1u64];
        for _ in 0..k {
            let next = (*powers.last().unwrap() as u128) * p as u128;
            if next >= 1u128 << 63 {
                return Err(RingError::ModulusOverflow { p, k });
            }
            powers.push(next as u64);
        }
        let q = powers[k as usize];
        let reduce = |c: i64| c.rem_euclid(q as i64) as u64;
        let m_mod_p: Vec<u64> = modulus_poly.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        if d > 1 && !fp_poly::is_irreducible(&m_mod_p, p) {
            return Err(RingError::Reducible(p));
        }
        let m_low: Vec<u64> = modulus_poly[..d].iter().map(|&c| reduce(c)).collect();

        let mut ring = UnramifiedRing {
            inner: Arc::new(RingInner { p, d, k, powers, m_low, frob_basis: Vec::new(), params: params.clone() }),
        };
        let frob_xi = ring.hensel_frobenius_image(modulus_poly);
        let mut frob_basis = Vec::with_capacity(d);
        let mut acc = ring.one();
        for _ in 0..d {
            frob_basis.push(acc.coords.clone());
            acc = ring.mul(&acc, &frob_xi);
        }
        Arc::get_mut(&mut ring.inner).expect("ring context not yet shared").frob_basis = frob_basis;
        Ok(ring)
    }

    /// Root of `m` congruent to `xi^p` mod `p`, refined by Newton iteration.
    fn hensel_frobenius_image(&self, modulus_poly: &[i64]) -> UnramifiedElement {
        let d = self.inner.d;
        if d == 1 {
            // m = X - c: the only root is c itself and phi is the identity.
            return self.from_int(-modulus_poly[0]);
        }
        let m: Vec<UnramifiedElement> = modulus_poly.iter().map(|&c| self.from_int(c)).collect();
        let dm: Vec<UnramifiedElement> = (1..=d).map(|i| self.from_int(modulus_poly[i] * i as i64)).collect();
        let eval = |coeffs: &[UnramifiedElement], x: &UnramifiedElement| {
            coeffs.iter().rev().fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
        };
        let mut r = self.pow(&self.xi(), self.inner.p);
        for _ in 0..=(self.inner.k + 1) {
            let f = eval(&m, &r);
            if f.is_zero() {
                break;
            }
            let df = eval(&dm, &r);
            let step = self.mul(&f, &self.inv(&df).expect("m is separable mod p"));
            r = self.sub(&r, &step);
        }
        debug_assert!(eval(&m, &r).is_zero());
        r
    }

    pub fn params(&self) -> &RingParams {
        &self.inner.params
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn d(&self) -> usize {
        self.inner.d
    }

    pub fn k(&self) -> u32 {
        self.inner.k
    }

    /// `p^e` for `e <= k`.
    pub fn p_pow(&self, e: u32) -> u64 {
        self.inner.powers[e as usize]
    }

    /// `phi(xi)` as computed at context creation.
    pub fn frobenius_of_xi(&self) -> UnramifiedElement {
        if self.inner.d == 1 {
            return self.one();
        }
        self.elem(self.inner.frob_basis[1].clone(), self.inner.k)
    }

    fn elem(&self, mut coords: Coords, prec: u32) -> UnramifiedElement {
        let q = self.inner.powers[prec as usize];
        for c in coords.iter_mut() {
            *c %= q;
        }
        UnramifiedElement { coords, prec, p: self.inner.p }
    }

    /// Element from signed coordinates at precision `prec` (clamped to `k`).
    pub fn element(&self, coords: &[i64], prec: u32) -> UnramifiedElement {
        let prec = prec.min(self.inner.k);
        let q = self.inner.powers[prec as usize] as i128;
        let mut out: Coords = SmallVec::from_elem(0, self.inner.d);
        for (slot, &c) in out.iter_mut().zip(coords) {
            *slot = (c as i128).rem_euclid(q) as u64;
        }
        UnramifiedElement { coords: out, prec, p: self.inner.p }
    }

    /// Element from unsigned residues; entries are reduced mod `p^prec`.
    pub fn element_from_residues(&self, coords: &[u64], prec: u32) -> UnramifiedElement {
        let prec = prec.min(self.inner.k);
        let mut out: Coords = SmallVec::from_elem(0, self.inner.d);
        out.iter_mut().zip(coords).for_each(|(s, &c)| *s = c);
        self.elem(out, prec)
    }

    pub fn from_int(&self, n: i64) -> UnramifiedElement {
        self.from_i128(n as i128)
    }

    pub fn from_i128(&self, n: i128) -> UnramifiedElement {
        let q = self.inner.powers[self.inner.k as usize] as i128;
        let mut coords: Coords = SmallVec::from_elem(0, self.inner.d);
        coords[0] = n.rem_euclid(q) as u64;
        UnramifiedElement { coords, prec: self.inner.k, p: self.inner.p }
    }

    pub fn zero(&self) -> UnramifiedElement {
        self.from_int(0)
    }

    pub fn one(&self) -> UnramifiedElement {
        self.from_int(1)
    }

    /// The class of `X` in `Z[X]/(p^k, m)`.
    pub fn xi(&self) -> UnramifiedElement {
        if self.inner.d == 1 {
            return self.from_int(-self.inner.params.modulus_poly[0]);
        }
        let mut coords: Coords = SmallVec::from_elem(0, self.inner.d);
        coords[1] = 1;
        UnramifiedElement { coords, prec: self.inner.k, p: self.inner.p }
    }

    /// Drops digits so that `a` is asserted only modulo `p^prec`.
    pub fn with_prec(&self, a: &UnramifiedElement, prec: u32) -> UnramifiedElement {
        let prec = prec.min(a.prec);
        self.elem(a.coords.clone(), prec)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, prec: u32) -> UnramifiedElement {
        let prec = prec.min(self.inner.k);
        let q = self.inner.powers[prec as usize];
        let coords = (0..self.inner.d).map(|_| rng.gen_range(0..q)).collect();
        UnramifiedElement { coords, prec, p: self.inner.p }
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R, prec: u32) -> UnramifiedElement {
        loop {
            let a = self.random(rng, prec);
            if self.is_unit(&a) {
                return a;
            }
        }
    }

    /// A unit if and only if the reduction mod `p` is nonzero.
    pub fn is_unit(&self, a: &UnramifiedElement) -> bool {
        a.prec > 0 && a.coords.iter().any(|&c| c % self.inner.p != 0)
    }

    // trace: add | ring structure of R | ring_axioms_on_random_triples | min of input precisions
    pub fn add(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        let prec = a.prec.min(b.prec);
        let q = self.inner.powers[prec as usize];
        let coords =
            a.coords.iter().zip(&b.coords).map(|(&x, &y)| ((x as u128 + y as u128) % q as u128) as u64).collect();
        UnramifiedElement { coords, prec, p: self.inner.p }
    }

    pub fn neg(&self, a: &UnramifiedElement) -> UnramifiedElement {
        let q = self.inner.powers[a.prec as usize];
        let coords = a.coords.iter().map(|&x| (q - x % q) % q).collect();
        UnramifiedElement { coords, prec: a.prec, p: self.inner.p }
    }

    pub fn sub(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        let prec = a.prec.min(b.prec);
        let q = self.inner.powers[prec as usize];
        let coords = self.mul_coords(&a.coords, &b.coords, q);
        UnramifiedElement { coords, prec, p: self.inner.p }
    }

    fn mul_coords(&self, a: &[u64], b: &[u64], q: u64) -> Coords {
        let d = self.inner.d;
        if d == 1 {
            return smallvec::smallvec![mulmod(a[0], b[0], q)];
        }
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = addmod(prod[i + j], mulmod(x, y, q), q);
            }
        }
        // Reduce by the monic m: X^d = -sum m_low[j] X^j.
        for i in (d..2 * d - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &mj) in self.inner.m_low.iter().enumerate() {
                let t = mulmod(c, mj % q, q);
                prod[i - d + j] = submod(prod[i - d + j], t, q);
            }
        }
        prod.truncate(d);
        prod.into_iter().collect()
    }

    /// Multiplication by an integer scalar.
    pub fn scale(&self, a: &UnramifiedElement, n: i64) -> UnramifiedElement {
        let q = self.inner.powers[a.prec as usize];
        let s = (n as i128).rem_euclid(q as i128) as u64;
        let coords = a.coords.iter().map(|&x| mulmod(x, s, q)).collect();
        UnramifiedElement { coords, prec: a.prec, p: self.inner.p }
    }

    pub fn pow(&self, a: &UnramifiedElement, mut e: u64) -> UnramifiedElement {
        let mut base = a.clone();
        let mut acc = self.with_prec(&self.one(), a.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    // trace: inv | units of R | inverse_of_two_mod_81 | min of input precisions
    pub fn inv(&self, a: &UnramifiedElement) -> Result<UnramifiedElement, ArithError> {
        if !self.is_unit(a) {
            return Err(ArithError::NotUnit);
        }
        // Inverse in the residue field F_{p^d} via a^(p^d - 2), then Newton lifting.
        let residue = self.with_prec(a, 1);
        let order = (self.inner.p as u128).pow(self.inner.d as u32) - 2;
        let mut x = self.with_prec(&self.pow_u128(&residue, order), a.prec);
        let target = self.with_prec(&self.one(), a.prec);
        let two = self.with_prec(&self.from_int(2), a.prec);
        for _ in 0..64 {
            let ax = self.mul(a, &self.elem(x.coords.clone(), a.prec));
            if ax == target {
                break;
            }
            x = self.mul(&self.elem(x.coords.clone(), a.prec), &self.sub(&two, &ax));
        }
        Ok(self.elem(x.coords, a.prec))
    }

    fn pow_u128(&self, a: &UnramifiedElement, mut e: u128) -> UnramifiedElement {
        let mut base = a.clone();
        let mut acc = self.with_prec(&self.one(), a.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            base = self.mul(&base, &base);
        }
        acc
    }

    // trace: frobenius | Frobenius lift on R | frobenius_is_ring_automorphism | same as input
    pub fn frobenius(&self, a: &UnramifiedElement) -> UnramifiedElement {
        if self.inner.d == 1 {
            return a.clone();
        }
        let q = self.inner.powers[a.prec as usize];
        let mut coords: Coords = SmallVec::from_elem(0, self.inner.d);
        for (i, &ai) in a.coords.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (slot, &b) in coords.iter_mut().zip(&self.inner.frob_basis[i]) {
                *slot = addmod(*slot, mulmod(ai, b % q, q), q);
            }
        }
        UnramifiedElement { coords, prec: a.prec, p: self.inner.p }
    }

    /// `phi^n(a)`.
    pub fn frobenius_iter(&self, a: &UnramifiedElement, n: usize) -> UnramifiedElement {
        (0..n).fold(a.clone(), |acc, _| self.frobenius(&acc))
    }

    // trace: p_derivation | delta(a) = (phi(a) - a^p)/p | delta_matches_witt_homomorphism | prec - 1
    pub fn p_derivation(&self, a: &UnramifiedElement) -> Result<UnramifiedElement, ArithError> {
        if a.prec < 2 {
            return Err(ArithError::InsufficientPrecision { needed: 2, have: a.prec });
        }
        let diff = self.sub(&self.frobenius(a), &self.pow(a, self.inner.p));
        Ok(self.div_by_p(&diff).expect("phi lifts Frobenius, so phi(a) - a^p is divisible by p"))
    }

    /// Exact division by `p`; the result has one digit less precision.
    pub fn div_by_p(&self, a: &UnramifiedElement) -> Result<UnramifiedElement, ArithError> {
        self.div_by_p_pow(a, 1)
    }

    pub fn div_by_p_pow(&self, a: &UnramifiedElement, e: u32) -> Result<UnramifiedElement, ArithError> {
        if a.prec < e {
            return Err(ArithError::InsufficientPrecision { needed: e, have: a.prec });
        }
        let pe = self.inner.powers[e as usize];
        if a.coords.iter().any(|&c| c % pe != 0) {
            return Err(ArithError::NotDivisible(e));
        }
        let coords = a.coords.iter().map(|&c| c / pe).collect();
        Ok(UnramifiedElement { coords, prec: a.prec - e, p: self.inner.p })
    }

    /// Multiplication by `p^e`, which gains `e` digits of precision (capped at `k`).
    pub fn mul_by_p_pow(&self, a: &UnramifiedElement, e: u32) -> UnramifiedElement {
        let prec = (a.prec + e).min(self.inner.k);
        let q = self.inner.powers[prec as usize];
        let pe = self.inner.powers[e.min(self.inner.k) as usize];
        let coords = a.coords.iter().map(|&c| mulmod(c, pe, q)).collect();
        UnramifiedElement { coords, prec, p: self.inner.p }
    }
}

pub(crate) fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub(crate) fn addmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub(crate) fn submod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + q as u128 - (b % q) as u128) % q as u128) as u64
}

pub(crate) fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("p^e overflows u64")
}

pub(crate) fn valuation_u64(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Dense polynomials over `F_p`, coefficients from the constant term up.
mod fp_poly {
    use super::{mulmod, submod};

    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(a: u64, p: u64) -> u64 {
        let mut acc = 1;
        let mut base = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base, p);
            }
            base = mulmod(base, base, p);
            e >>= 1;
        }
        acc
    }

    fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let m = trim(m.to_vec());
        let mut r = trim(a.to_vec());
        let lead_inv = inv_mod(*m.last().unwrap(), p);
        while r.len() >= m.len() {
            let c = mulmod(*r.last().unwrap(), lead_inv, p);
            let shift = r.len() - m.len();
            for (j, &mj) in m.iter().enumerate() {
                r[shift + j] = submod(r[shift + j], mulmod(c, mj, p), p);
            }
            r = trim(r);
        }
        r
    }

    fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
            }
        }
        rem(&out, m, p)
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Ben-Or: `m` of degree `d` is irreducible iff `gcd(m, X^(p^i) - X) = 1`
    /// for `1 <= i <= d/2`.
    pub(super) fn is_irreducible(m: &[u64], p: u64) -> bool {
        let m = trim(m.to_vec());
        let d = m.len() - 1;
        if d <= 1 {
            return d == 1;
        }
        let x = vec![0, 1];
        let mut xp = x.clone();
        for _ in 0..d / 2 {
            // xp <- xp^p mod m
            let mut acc = vec![1u64];
            let mut base = xp.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_mod(&acc, &base, &m, p);
                }
                base = mul_mod(&base, &base, &m, p);
                e >>= 1;
            }
            xp = acc;
            let mut diff = xp.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = submod(diff[1], 1, p);
            let g = gcd(&m, &diff, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }

}
