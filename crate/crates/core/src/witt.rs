//! Length-2 Witt vectors over an abstract base ring.
//!
//! `W_2(B)` is the set of pairs `(a0, a1)` with the unique ring structure for
//! which the ghost map `(a0, a1) -> (a0, a0^p + p a1)` is a ring homomorphism
//! into `B x B`. Written out:
//!
//! ```text
//! (x0, x1) + (y0, y1) = (x0 + y0, x1 + y1 + C_p(x0, y0))
//! (x0, x1) * (y0, y1) = (x0 y0, x0^p y1 + y0^p x1 + p x1 y1)
//! C_p(X, Y)          = (X^p + Y^p - (X + Y)^p) / p
//! ```
//!
//! A p-derivation `delta: A -> B` is exactly a map for which
//! `a -> (a, delta a)` is a ring homomorphism into `W_2(B)`, which is what
//! [`is_p_derivation`] checks on samples.

use std::fmt;

use crate::padic::{UnramifiedElement, UnramifiedRing};

/// The operations `W_2` needs from its base. Implementations never expose
/// their representation to the Witt layer.
pub trait BaseRing {
    type Elem: Clone + fmt::Debug + PartialEq;

    fn prime(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    // A context method: elements need the ring to know p and k.
    #[allow(clippy::wrong_self_convention)]
    fn from_i128(&self, n: i128) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
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

    fn times_p(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.from_i128(self.prime() as i128))
    }
}

impl BaseRing for UnramifiedRing {
    type Elem = UnramifiedElement;

    fn prime(&self) -> u64 {
        self.p()
    }
    fn zero(&self) -> UnramifiedElement {
        UnramifiedRing::zero(self)
    }
    fn one(&self) -> UnramifiedElement {
        UnramifiedRing::one(self)
    }
    fn from_i128(&self, n: i128) -> UnramifiedElement {
        UnramifiedRing::from_i128(self, n)
    }
    fn add(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        UnramifiedRing::add(self, a, b)
    }
    fn neg(&self, a: &UnramifiedElement) -> UnramifiedElement {
        UnramifiedRing::neg(self, a)
    }
    fn mul(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        UnramifiedRing::mul(self, a, b)
    }
    fn sub(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        UnramifiedRing::sub(self, a, b)
    }
    fn pow(&self, a: &UnramifiedElement, e: u64) -> UnramifiedElement {
        UnramifiedRing::pow(self, a, e)
    }
    fn times_p(&self, a: &UnramifiedElement) -> UnramifiedElement {
        self.scale(a, self.p() as i64)
    }
}

/// `C_p(X, Y) = sum_{i=1}^{p-1} c_i X^i Y^(p-i)` with `c_i = -binom(p, i) / p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpPolynomial {
    p: u64,
    /// `(i, c_i)` for `1 <= i <= p - 1`.
    terms: Vec<(u32, i128)>,
}

impl CpPolynomial {
    /// Panics for `p > 113`, where the binomials leave `i128`.
    pub fn new(p: u64) -> Self {
        assert!(p <= 113, "C_p table limited to p <= 113");
        let mut terms = Vec::with_capacity(p as usize - 1);
        let mut binom: i128 = 1;
        for i in 1..p as i128 {
            binom = binom * (p as i128 - i + 1) / i;
            assert_eq!(binom % p as i128, 0, "binom(p, i) divisible by p");
            terms.push((i as u32, -binom / p as i128));
        }
        CpPolynomial { p, terms }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Coefficient table `(i, c_i)`: `c_i` multiplies `X^i Y^(p - i)`.
    pub fn terms(&self) -> &[(u32, i128)] {
        &self.terms
    }

    pub fn eval<R: BaseRing>(&self, ring: &R, x: &R::Elem, y: &R::Elem) -> R::Elem {
        let p = self.p as usize;
        // Powers 0..p-1 of both arguments, shared across terms.
        let mut xs = vec![ring.one()];
        let mut ys = vec![ring.one()];
        for _ in 1..p {
            xs.push(ring.mul(xs.last().unwrap(), x));
            ys.push(ring.mul(ys.last().unwrap(), y));
        }
        self.terms.iter().fold(ring.zero(), |acc, &(i, c)| {
            let mono = ring.mul(&xs[i as usize], &ys[p - i as usize]);
            ring.add(&acc, &ring.mul(&ring.from_i128(c), &mono))
        })
    }
}

/// A length-2 Witt vector `(a0, a1)`.
#[derive(Clone, PartialEq)]
pub struct WittPair<E> {
    pub a0: E,
    pub a1: E,
}

impl<E: fmt::Debug> fmt::Debug for WittPair<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.a0, self.a1)
    }
}

impl<E> WittPair<E> {
    pub fn new(a0: E, a1: E) -> Self {
        WittPair { a0, a1 }
    }
}

/// `W_2(B)` for a base ring `B`; owns the cached `C_p` table.
#[derive(Debug, Clone)]
pub struct Witt2<R> {
    base: R,
    cp: CpPolynomial,
}

impl<R: BaseRing> Witt2<R> {
    pub fn new(base: R) -> Self {
        let cp = CpPolynomial::new(base.prime());
        Witt2 { base, cp }
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn cp(&self) -> &CpPolynomial {
        &self.cp
    }

    pub fn zero(&self) -> WittPair<R::Elem> {
        WittPair::new(self.base.zero(), self.base.zero())
    }

    pub fn one(&self) -> WittPair<R::Elem> {
        WittPair::new(self.base.one(), self.base.zero())
    }

    // trace: witt_add | ghost map is additive | ghost_of_sum_is_sum_of_ghosts | exact at k
    pub fn add(&self, x: &WittPair<R::Elem>, y: &WittPair<R::Elem>) -> WittPair<R::Elem> {
        let b = &self.base;
        let carry = self.cp.eval(b, &x.a0, &y.a0);
        WittPair::new(b.add(&x.a0, &y.a0), b.add(&b.add(&x.a1, &y.a1), &carry))
    }

    // trace: witt_mul | ghost map is multiplicative | ghost_of_product_is_product_of_ghosts | exact at k
    pub fn mul(&self, x: &WittPair<R::Elem>, y: &WittPair<R::Elem>) -> WittPair<R::Elem> {
        let b = &self.base;
        let p = b.prime();
        let t1 = b.mul(&b.pow(&x.a0, p), &y.a1);
        let t2 = b.mul(&b.pow(&y.a0, p), &x.a1);
        let t3 = b.times_p(&b.mul(&x.a1, &y.a1));
        WittPair::new(b.mul(&x.a0, &y.a0), b.add(&b.add(&t1, &t2), &t3))
    }

    pub fn neg(&self, x: &WittPair<R::Elem>) -> WittPair<R::Elem> {
        // C_p(a, -a) = (a^p + (-a)^p) / p = 0 for odd p.
        WittPair::new(self.base.neg(&x.a0), self.base.neg(&x.a1))
    }

    // trace: ghost | ghost components | ghost_recovers_second_coordinate | exact at k
    pub fn ghost(&self, x: &WittPair<R::Elem>) -> (R::Elem, R::Elem) {
        let b = &self.base;
        let g1 = b.add(&b.pow(&x.a0, b.prime()), &b.times_p(&x.a1));
        (x.a0.clone(), g1)
    }
}

/// Why a candidate map failed to be a p-derivation.
#[derive(Debug, Clone, PartialEq)]
pub enum PDerivationFailure<E> {
    /// `delta(0) != 0`.
    Zero(E),
    /// `delta(1) != 0`.
    One(E),
    /// `(a + b, delta(a + b)) != (a, delta a) + (b, delta b)`.
    Addition { a: E, b: E },
    /// `(ab, delta(ab)) != (a, delta a) (b, delta b)`.
    Multiplication { a: E, b: E },
}

// trace: is_p_derivation | a -> (a, delta a) is a ring map into W_2 | zero_map_is_not_a_p_derivation | prec - 1
/// Checks that `a -> (a, delta(a))` respects `0`, `1`, `+` and `*` on the
/// given pairs. Returns the first failure.
pub fn is_p_derivation<R, F, I>(w2: &Witt2<R>, delta: F, pairs: I) -> Result<(), PDerivationFailure<R::Elem>>
where
    R: BaseRing,
    F: Fn(&R::Elem) -> R::Elem,
    I: IntoIterator<Item = (R::Elem, R::Elem)>,
{
    let b = w2.base();
    let d0 = delta(&b.zero());
    if d0 != b.zero() {
        return Err(PDerivationFailure::Zero(d0));
    }
    let d1 = delta(&b.one());
    if d1 != b.zero() {
        return Err(PDerivationFailure::One(d1));
    }
    let lift = |a: &R::Elem| WittPair::new(a.clone(), delta(a));
    for (a, c) in pairs {
        let (wa, wc) = (lift(&a), lift(&c));
        if lift(&b.add(&a, &c)) != w2.add(&wa, &wc) {
            return Err(PDerivationFailure::Addition { a, b: c });
        }
        if lift(&b.mul(&a, &c)) != w2.mul(&wa, &wc) {
            return Err(PDerivationFailure::Multiplication { a, b: c });
        }
    }
    Ok(())
}
