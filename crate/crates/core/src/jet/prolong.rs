use std::sync::Arc;

use super::{Ambient, Branch, DeltaPoly, JetError, Monomial};
use crate::padic::{ArithError, UnramifiedElement};
use crate::witt::CpPolynomial;

/// Index in `target` of each source variable's prolongation, if declared.
fn prolonged_indices(f: &DeltaPoly, direction: Branch, target: &Ambient) -> Vec<Option<usize>> {
    f.ambient().vars().iter().map(|v| target.index_of(&v.prolonged(direction))).collect()
}

fn require(idx: Option<usize>, f: &DeltaPoly, i: usize, direction: Branch) -> Result<usize, JetError> {
    idx.ok_or_else(|| {
        let v = f.ambient().vars()[i].prolonged(direction);
        JetError::JetOrderOverflow(v.display_with(f.ambient().base_names()))
    })
}

fn check_prec(f: &DeltaPoly) -> Result<(), JetError> {
    if f.prec() < 2 {
        return Err(ArithError::InsufficientPrecision { needed: 2, have: f.prec() }.into());
    }
    Ok(())
}

impl DeltaPoly {
    /// The universal p-derivation in `direction`, landing in `target`.
    ///
    /// Computed term by term: the product law builds `delta(c * monomial)`
    /// one variable occurrence at a time, and the sum law folds the terms
    /// together with the carry `C_p`. Precision drops by one.
    // trace: prolong | universal p-derivation O(X) -> O(J^1 X) | prolong_matches_frobenius_route | prec - 1
    pub fn prolong(&self, direction: Branch, target: &Arc<Ambient>) -> Result<DeltaPoly, JetError> {
        let terms: Vec<_> = self.terms().iter().map(|(m, c)| (*m, c.clone())).collect();
        self.prolong_in_order(direction, target, &terms)
    }

    pub(crate) fn prolong_in_order(
        &self,
        direction: Branch,
        target: &Arc<Ambient>,
        terms: &[(Monomial, UnramifiedElement)],
    ) -> Result<DeltaPoly, JetError> {
        check_prec(self)?;
        let ring = target.ring();
        let n = self.prec();
        let src = self.ambient();
        let lifted = prolonged_indices(self, direction, target);
        let cp = CpPolynomial::new(ring.p());
        let poly_ring = super::PolyRing::new(target, n);

        let mut acc = DeltaPoly::zero(target, n);
        let mut acc_delta = DeltaPoly::zero(target, n - 1);
        for (m, c) in terms {
            let term = DeltaPoly::from_terms(src, n, [(*m, c.clone())]).embed(target)?;
            let term_delta = self.prolong_term(*m, c, &lifted, direction, target)?;
            let carry = cp.eval(&poly_ring, &acc, &term);
            acc_delta = acc_delta.add(&term_delta).add(&carry);
            acc = acc.add(&term);
        }
        Ok(acc_delta.with_prec(n - 1))
    }

    /// `delta(c * m)` by the product law with one factor a variable.
    fn prolong_term(
        &self,
        m: Monomial,
        c: &UnramifiedElement,
        lifted: &[Option<usize>],
        direction: Branch,
        target: &Arc<Ambient>,
    ) -> Result<DeltaPoly, JetError> {
        let ring = target.ring();
        let p = ring.p();
        let n = self.prec();
        let src_vars = self.ambient().vars();
        let c = ring.with_prec(c, n);
        let mut value = DeltaPoly::constant(target, &c);
        let mut delta = DeltaPoly::constant(target, &ring.p_derivation(&c)?);
        for i in 0..src_vars.len() {
            if m.0[i] == 0 {
                continue;
            }
            let vi =
                target.index_of(&src_vars[i]).ok_or_else(|| JetError::JetOrderOverflow(self.ambient().var_name(i)))?;
            let dvi = require(lifted[i], self, i, direction)?;
            let v = DeltaPoly::var_at(target, vi, n);
            let dv = DeltaPoly::var_at(target, dvi, n);
            let vp = v.pow(p);
            for _ in 0..m.0[i] {
                // delta(F v) = F^p dv + v^p dF + p dF dv
                let next_delta = value.pow(p).mul(&dv).add(&vp.mul(&delta)).add(&delta.mul(&dv).mul_by_p_pow(1));
                value = value.mul(&v);
                delta = next_delta;
            }
        }
        Ok(delta)
    }

    /// The same p-derivation computed as `(phi(f) - f^p) / p`, where `phi`
    /// twists coefficients by Frobenius and sends `v` to `v^p + p * dv`.
    // trace: prolong_via_frobenius | delta f = (phi(f) - f^p)/p | prolong_matches_frobenius_route | prec - 1
    pub fn prolong_via_frobenius(&self, direction: Branch, target: &Arc<Ambient>) -> Result<DeltaPoly, JetError> {
        check_prec(self)?;
        let ring = target.ring();
        let p = ring.p();
        let n = self.prec();
        let src_vars = self.ambient().vars();
        let lifted = prolonged_indices(self, direction, target);
        let f = self.embed(target)?;

        let mut lifts: Vec<Option<Vec<DeltaPoly>>> = vec![None; src_vars.len()];
        let mut phi_f = DeltaPoly::zero(target, n);
        for (m, c) in self.terms() {
            let mut t = DeltaPoly::constant(target, &ring.frobenius(&ring.with_prec(c, n)));
            for i in 0..src_vars.len() {
                let e = m.0[i] as usize;
                if e == 0 {
                    continue;
                }
                if lifts[i].is_none() {
                    let vi = target.index_of(&src_vars[i]).expect("embed succeeded");
                    let dvi = require(lifted[i], self, i, direction)?;
                    let s =
                        DeltaPoly::var_at(target, vi, n).pow(p).add(&DeltaPoly::var_at(target, dvi, n).mul_by_p_pow(1));
                    lifts[i] = Some(vec![DeltaPoly::from_int(target, 1, n), s]);
                }
                let pw = lifts[i].as_mut().unwrap();
                while pw.len() <= e {
                    let next = pw.last().unwrap().mul(&pw[1]);
                    pw.push(next);
                }
                t = t.mul(&pw[e]);
            }
            phi_f = phi_f.add(&t);
        }
        let diff = phi_f.sub(&f.pow(p));
        Ok(diff.div_by_p_pow(1)?)
    }
}

/// Checks that folding the sum law over the terms in reverse order gives the
/// same prolongation; `C_p` is a symmetric 2-cocycle, so it must.
pub fn fold_order_independent(f: &DeltaPoly, direction: Branch, target: &Arc<Ambient>) -> Result<bool, JetError> {
    let forward = f.prolong(direction, target)?;
    let mut terms: Vec<_> = f.terms().iter().map(|(m, c)| (*m, c.clone())).collect();
    terms.reverse();
    let backward = f.prolong_in_order(direction, target, &terms)?;
    Ok(forward == backward)
}

/// Evaluates `f` at the jet of an `R`-point: each `delta_w T_i` becomes
/// `delta^|w|(a_i)` regardless of the directions in `w`.
// trace: jet_eval | T^(j) -> delta^j(a) on R-points | jet_eval_commutes_with_prolong | a.prec - max jet order
pub fn jet_eval(f: &DeltaPoly, point: &[UnramifiedElement]) -> Result<UnramifiedElement, JetError> {
    let amb = f.ambient();
    let ring = amb.ring();
    let bases = amb.num_bases();
    if point.len() != bases {
        return Err(JetError::PointArity { expected: bases, got: point.len() });
    }
    let order = f.max_jet_order();
    let mut jets: Vec<Vec<UnramifiedElement>> = Vec::with_capacity(bases);
    for a in point {
        if a.prec() < order as u32 + 1 {
            return Err(ArithError::InsufficientPrecision { needed: order as u32 + 1, have: a.prec() }.into());
        }
        let mut chain = vec![a.clone()];
        for _ in 0..order {
            let next = ring.p_derivation(chain.last().unwrap())?;
            chain.push(next);
        }
        jets.push(chain);
    }
    let prec = point.iter().map(|a| a.prec()).min().unwrap_or(f.prec()).saturating_sub(order as u32);
    let values: Vec<UnramifiedElement> = amb
        .vars()
        .iter()
        .map(|v| match jets[v.base_index()].get(v.jet_order()) {
            Some(x) => x.clone(),
            // Unused variable above the occurring jet order.
            None => ring.with_prec(&ring.zero(), prec),
        })
        .collect();
    let value = f.eval(&values)?;
    Ok(ring.with_prec(&value, prec))
}
