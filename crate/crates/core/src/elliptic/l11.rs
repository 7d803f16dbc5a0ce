use serde::Serialize;

use super::formal::{disk_weight_rule, formal_group_law, formal_log, prolonged_law};
use super::{EllipticError, FormalLog, WeierstrassCurve};
use crate::jet::DeltaPoly;
use crate::padic::{UnramifiedElement, UnramifiedRing};

/// A point of `J^2` on the formal disk, `(t, t', t'')`, or of `J^1 J^1`
/// when `t1` is recorded separately from `t'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPoint2 {
    pub t: UnramifiedElement,
    pub t_prime: UnramifiedElement,
    pub t1: UnramifiedElement,
    pub t1_prime: UnramifiedElement,
    /// `t1 == t'`: the point lies in the image of `J^2`.
    pub is_genuine_jet: bool,
}

impl DeltaPoint2 {
    pub fn new(
        t: UnramifiedElement,
        t_prime: UnramifiedElement,
        t1: UnramifiedElement,
        t1_prime: UnramifiedElement,
    ) -> Self {
        let is_genuine_jet = t1 == t_prime;
        DeltaPoint2 { t, t_prime, t1, t1_prime, is_genuine_jet }
    }

    /// `(a, delta a, delta a, delta^2 a)`, the image of the jet of `a`.
    pub fn from_number(ring: &UnramifiedRing, a: &UnramifiedElement) -> Result<Self, EllipticError> {
        let d1 = ring.p_derivation(a)?;
        let d2 = ring.p_derivation(&d1)?;
        Ok(DeltaPoint2::new(a.clone(), d1.clone(), d1, d2))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct L11Value {
    /// Second coordinate of `Q - P` in `J^1`, with `P = (t, t')`, `Q = (t, t1)`.
    /// The first coordinate is `F(t, -t) = 0`.
    pub u: UnramifiedElement,
    /// `L(p u) / p`, additive in `u` for the group law on the fiber over 0.
    pub coordinate: UnramifiedElement,
    /// Digits of `coordinate` that the truncations leave intact.
    pub certified_prec: u32,
}

/// Precomputed `F_1 = delta F` and the logarithm for repeated evaluation.
#[derive(Debug, Clone)]
pub struct L11Delta {
    pub curve: WeierstrassCurve,
    pub ring: UnramifiedRing,
    pub degree: u32,
    law1: DeltaPoly,
    log: FormalLog,
}

impl L11Delta {
    /// `degree` bounds the expansion of `F`; dropped terms have `t`-weight
    /// above `degree`, so on the disk they cost nothing below `p^degree`.
    pub fn new(curve: &WeierstrassCurve, k: u32, degree: u32) -> Result<Self, EllipticError> {
        let working = k + 1;
        let ring = curve.ring(working)?;
        let law = formal_group_law(curve, degree, working)?;
        let laws = prolonged_law(&law, 1, disk_weight_rule(1, working))?;
        let log = formal_log(curve, degree, working)?;
        Ok(L11Delta { curve: *curve, ring, degree, law1: laws[1].clone(), log })
    }

    pub fn law1(&self) -> &DeltaPoly {
        &self.law1
    }
}

/// The difference of the two `J^1` points packed in a point of `J^1 J^1`,
/// read through the additive coordinate of the kernel of `J^1 -> J^0`.
/// It vanishes exactly on genuine second jets (`t1 = t'`); `t1'` is unused.
// trace: l11delta_eval | l11delta vanishes on J^2 and is additive on the fiber | l11delta_vanishes_on_genuine_jets | min(k, degree)
pub fn l11delta_eval(map: &L11Delta, point: &DeltaPoint2) -> Result<L11Value, EllipticError> {
    let ring = &map.ring;
    if point.t.valuation() < 1 {
        return Err(EllipticError::NotOnFormalDisk(point.t.valuation()));
    }
    let values = [point.t.clone(), point.t1.clone(), ring.neg(&point.t), ring.neg(&point.t_prime)];
    let u = map.law1.eval(&values)?;
    let coordinate = map.log.kernel_coordinate(ring, &u);
    let certified_prec = coordinate.prec().min(map.degree).min(ring.k() - 1);
    Ok(L11Value { u, coordinate: ring.with_prec(&coordinate, certified_prec), certified_prec })
}
