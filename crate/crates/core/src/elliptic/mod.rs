//! Short Weierstrass curves `y^2 = x^3 + a4 x + a6` over `Z_p`, `p >= 5`.
//!
//! Everything here works on the formal disk around the origin, in the
//! parameter `t = -x/y`, except point counting and the affine group law
//! which act on reductions and on points mod `p^k`.

mod formal;
mod l11;
mod order1;
mod psi2;
mod report;

pub use formal::{formal_group_law, formal_log, prolonged_law, FormalLog, TruncatedSeries};
pub use l11::{l11delta_eval, DeltaPoint2, L11Delta, L11Value};
pub use order1::{order1_character_search, Order1Character, Order1Search, Reverification, Verdict};
pub use psi2::{default_k_eff, psi2_build, psi2_is_additive, AdditivityReport, AdditivityWitness, Psi2, Psi2Shape};
pub use report::{curve_report, CurveReport, CurveReportConfig};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::jet::JetError;
use crate::padic::{is_prime, ArithError, RingError, RingParams, UnramifiedElement, UnramifiedRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EllipticError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("short Weierstrass form needs p >= 5 (got {0})")]
    SmallPrime(u64),
    #[error("singular reduction: discriminant {discriminant} is divisible by {p}")]
    SingularReduction { discriminant: i128, p: u64 },
    #[error("point is not on the formal disk (v_p(t) = {0})")]
    NotOnFormalDisk(u32),
    #[error("chord or tangent slope has a non-unit denominator")]
    NonUnitDenominator,
    #[error(transparent)]
    Precision(#[from] ArithError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("series is not p-integral after division: {0}")]
    Integrality(String),
}

/// `y^2 = x^3 + a4 x + a6` with integer coefficients and good reduction at `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeierstrassCurve {
    pub p: u64,
    pub a4: i64,
    pub a6: i64,
}

/// The shipped curves: a canonical-lift (CM) curve, a supersingular curve and
/// an ordinary curve without CM.
pub const ROSTER: [(&str, WeierstrassCurve); 3] = [
    ("cm-ordinary", WeierstrassCurve { p: 7, a4: 0, a6: 1 }),
    ("supersingular", WeierstrassCurve { p: 5, a4: 0, a6: 1 }),
    ("non-cm-ordinary", WeierstrassCurve { p: 7, a4: 2, a6: 3 }),
];

impl WeierstrassCurve {
    pub fn new(p: u64, a4: i64, a6: i64) -> Result<Self, EllipticError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p).into());
        }
        if p < 5 {
            return Err(EllipticError::SmallPrime(p));
        }
        let curve = WeierstrassCurve { p, a4, a6 };
        let disc = curve.discriminant();
        if disc.rem_euclid(p as i128) == 0 {
            return Err(EllipticError::SingularReduction { discriminant: disc, p });
        }
        Ok(curve)
    }

    /// `-16 (4 a4^3 + 27 a6^2)`.
    pub fn discriminant(&self) -> i128 {
        let (a, b) = (self.a4 as i128, self.a6 as i128);
        -16 * (4 * a * a * a + 27 * b * b)
    }

    /// `Z/p^k` with the curve's prime.
    pub fn ring(&self, k: u32) -> Result<UnramifiedRing, EllipticError> {
        Ok(UnramifiedRing::new(RingParams::prime_field(self.p, k))?)
    }

    fn rhs(&self, ring: &UnramifiedRing, x: &UnramifiedElement) -> UnramifiedElement {
        let x3 = ring.pow(x, 3);
        let ax = ring.mul(&ring.from_int(self.a4), x);
        ring.add(&ring.add(&x3, &ax), &ring.from_int(self.a6))
    }

    pub fn contains(&self, ring: &UnramifiedRing, pt: &CurvePoint) -> bool {
        match pt {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => ring.mul(y, y) == self.rhs(ring, x),
        }
    }

    /// `w(t)` with `w = t^3 + a4 t w^2 + a6 w^3`, by fixed-point iteration on
    /// a number with `v_p(t) >= 1`.
    pub fn w_of_t(&self, ring: &UnramifiedRing, t: &UnramifiedElement) -> UnramifiedElement {
        let a4 = ring.from_int(self.a4);
        let a6 = ring.from_int(self.a6);
        let mut w = ring.zero();
        // Each step gains at least v_p(t) >= 1 digit.
        for _ in 0..=ring.k() {
            let w2 = ring.mul(&w, &w);
            let next = ring
                .add(&ring.add(&ring.pow(t, 3), &ring.mul(&ring.mul(&a4, t), &w2)), &ring.mul(&a6, &ring.mul(&w2, &w)));
            w = ring.with_prec(&next, t.prec());
        }
        w
    }
}

// trace: count_points_fp | a_p = p + 1 - #E(F_p) | a_p_matches_brute_force_counts | exact
pub fn count_points_fp(curve: &WeierstrassCurve) -> i64 {
    let p = curve.p as i128;
    let mut count: i128 = 1;
    for x in 0..p {
        let f = (x * x * x + curve.a4 as i128 * x + curve.a6 as i128).rem_euclid(p);
        if f == 0 {
            count += 1;
        } else if legendre(f, p) == 1 {
            count += 2;
        }
    }
    (p + 1 - count) as i64
}

fn legendre(a: i128, p: i128) -> i32 {
    let mut result: i128 = 1;
    let mut base = a.rem_euclid(p);
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

/// A point of `E(Z/p^k)` in affine coordinates, or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvePoint {
    Infinity,
    Affine { x: UnramifiedElement, y: UnramifiedElement },
}

impl CurvePoint {
    pub fn neg(&self, ring: &UnramifiedRing) -> CurvePoint {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x: x.clone(), y: ring.neg(y) },
        }
    }
}

/// Chord-tangent addition on `E(Z/p^k)`.
///
/// Defined when the slope denominator is a unit; two distinct points with
/// equal reductions (whose sum lies in the formal group) are rejected.
// trace: weierstrass_add | chord-tangent law on E(Z/p^k) | weierstrass_add_is_associative | exact mod p^k
pub fn weierstrass_add(
    curve: &WeierstrassCurve,
    ring: &UnramifiedRing,
    a: &CurvePoint,
    b: &CurvePoint,
) -> Result<CurvePoint, EllipticError> {
    let (x1, y1, x2, y2) = match (a, b) {
        (CurvePoint::Infinity, q) | (q, CurvePoint::Infinity) => return Ok(q.clone()),
        (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    let lambda = if x1 == x2 && y1 == y2 {
        let two_y = ring.scale(y1, 2);
        let num = ring.add(&ring.scale(&ring.mul(x1, x1), 3), &ring.from_int(curve.a4));
        ring.mul(&num, &ring.inv(&two_y).map_err(|_| EllipticError::NonUnitDenominator)?)
    } else if x1 == x2 && ring.add(y1, y2).is_zero() {
        return Ok(CurvePoint::Infinity);
    } else {
        let dx = ring.sub(x2, x1);
        let inv = ring.inv(&dx).map_err(|_| EllipticError::NonUnitDenominator)?;
        ring.mul(&ring.sub(y2, y1), &inv)
    };
    let x3 = ring.sub(&ring.sub(&ring.mul(&lambda, &lambda), x1), x2);
    let y3 = ring.sub(&ring.mul(&lambda, &ring.sub(x1, &x3)), y1);
    Ok(CurvePoint::Affine { x: x3, y: y3 })
}

/// A random point of `E(Z/p^k)` with `y` a unit: an `F_p`-point with
/// `y != 0`, a random lift of `x`, and `y` lifted by Newton's method.
pub fn random_lifted_point<R: Rng + ?Sized>(
    curve: &WeierstrassCurve,
    ring: &UnramifiedRing,
    rng: &mut R,
) -> CurvePoint {
    let p = curve.p;
    loop {
        let x = ring.random(rng, ring.k());
        let f = curve.rhs(ring, &x);
        let f0 = f.coords()[0] % p;
        if f0 == 0 {
            continue;
        }
        let Some(y0) = (1..p).find(|y| y * y % p == f0) else { continue };
        let mut y = ring.from_int(y0 as i64);
        for _ in 0..ring.k() {
            let err = ring.sub(&ring.mul(&y, &y), &f);
            let step = ring.mul(&err, &ring.inv(&ring.scale(&y, 2)).expect("2y is a unit"));
            y = ring.sub(&y, &step);
        }
        if rng.gen_bool(0.5) {
            y = ring.neg(&y);
        }
        return CurvePoint::Affine { x, y };
    }
}
