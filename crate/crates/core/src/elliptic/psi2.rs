use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::formal::{disk_weight_rule, formal_group_law, formal_log, prolonged_law};
use super::{count_points_fp, EllipticError, WeierstrassCurve};
use crate::jet::{Ambient, DegreeRule, DeltaPoly, JetVariable, Monomial};
use crate::padic::{valuation_u64, UnramifiedElement, UnramifiedRing};

/// The order-2 character `psi_2` on the formal disk, as a series in `t, t', t''`.
#[derive(Debug, Clone, Serialize)]
pub struct Psi2 {
    pub curve: WeierstrassCurve,
    pub a_p: i64,
    /// Terms `b_n/n t^n` of `L` kept for `n <= log_degree`.
    pub log_degree: u32,
    /// Precision of the intermediate integral series `p^(e+1) psi_2`.
    pub working_prec: u32,
    /// `psi_2` is correct modulo `p^certified_prec` at points of the disk.
    pub certified_prec: u32,
    pub series: DeltaPoly,
    pub shape: Psi2Shape,
}

/// The structural facts `psi_2` must satisfy.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Psi2Shape {
    /// Every `t''`-monomial has coefficient divisible by `p`.
    pub second_jet_terms_divisible_by_p: bool,
    /// The coefficient of the bare monomial `t''` is exactly `p`.
    pub second_jet_coefficient_is_p: bool,
    /// The coefficient of the bare monomial `t'` is exactly `-a_p`.
    pub first_jet_coefficient_is_minus_a_p: bool,
    pub vanishes_at_origin: bool,
    /// Monomials breaking one of the conditions above.
    pub offenders: Vec<String>,
}

impl Psi2Shape {
    pub fn holds(&self) -> bool {
        self.second_jet_terms_divisible_by_p
            && self.second_jet_coefficient_is_p
            && self.first_jet_coefficient_is_minus_a_p
            && self.vanishes_at_origin
    }
}

/// Largest `v_p(n)` for `n <= degree`.
fn max_denominator(p: u64, degree: u32) -> u32 {
    (1..=degree as u64).map(|n| valuation_u64(n, p)).max().unwrap_or(0)
}

fn substitute(series: &DeltaPoly, x: &DeltaPoly) -> DeltaPoly {
    let amb = x.ambient();
    let mut out = DeltaPoly::zero(amb, x.prec());
    let mut power = DeltaPoly::from_int(amb, 1, x.prec());
    let mut e = 0;
    for (m, c) in series.terms() {
        while e < m.exponent(0) {
            power = power.mul(x);
            e += 1;
        }
        out = out.add(&power.scale(c));
    }
    out
}

/// `psi_2 = (1/p) [L(t^(phi^2)) - a_p L(t^phi) + p L(t)]`, where
/// `t^phi = t^p + p t'` and `t^(phi^2) = (t^phi)^p + p (t'^p + p t'')`.
///
/// Computed as an integral series scaled by `p^(e+1)`, `e = max v_p(n)`,
/// then divided exactly; a failed division is an integrality error. Terms are
/// kept while `v_p(coefficient) + deg_t` stays below the working precision.
// trace: psi2_build | psi_2 = (1/p)(phi^2 - a_p phi + p) L | psi2_is_integral_with_step3_shape | k at disk points
pub fn psi2_build(curve: &WeierstrassCurve, log_degree: u32, k: u32) -> Result<Psi2, EllipticError> {
    let p = curve.p;
    let a_p = count_points_fp(curve);
    let e = max_denominator(p, log_degree);
    let working = k + e + 1;
    let ring = curve.ring(working)?;
    let log = formal_log(curve, log_degree, working)?;

    let vars = (0..=2).map(|j| JetVariable::jet(0, j)).collect();
    let rules = vec![DegreeRule::PadicBelow { weights: vec![1, 0, 0], bound: working }];
    let amb: Arc<Ambient> = Ambient::new(ring.clone(), vec!["t".into()], vars, rules)?;
    let t = DeltaPoly::var_at(&amb, 0, working);
    let t1 = DeltaPoly::var_at(&amb, 1, working);
    let t2 = DeltaPoly::var_at(&amb, 2, working);
    let phi_t = t.pow(p).add(&t1.mul_by_p_pow(1));
    let phi_t1 = t1.pow(p).add(&t2.mul_by_p_pow(1));
    let phi2_t = phi_t.pow(p).add(&phi_t1.mul_by_p_pow(1));

    let l = &log.scaled.series;
    let scaled =
        substitute(l, &phi2_t).sub(&substitute(l, &phi_t).scale_int(a_p)).add(&substitute(l, &t).mul_by_p_pow(1));
    let series = scaled.div_by_p_pow(e + 1).map_err(|_| {
        let bad = scaled
            .terms()
            .iter()
            .find(|(_, c)| c.valuation() < e + 1)
            .map(|(m, c)| format!("{} has valuation {}", amb.monomial_string(m), c.valuation()))
            .unwrap_or_default();
        EllipticError::Integrality(bad)
    })?;

    // Dropped log terms contribute valuation >= n - v_p(n) - 1 at disk points.
    let truncation = (log_degree as u64 + 1..=(log_degree as u64 + 1) * p)
        .map(|n| n as u32 - valuation_u64(n, p) - 1)
        .min()
        .unwrap();
    let certified_prec = series.prec().min(truncation);
    let shape = check_shape(&series, a_p, &ring);
    Ok(Psi2 { curve: *curve, a_p, log_degree, working_prec: working, certified_prec, series, shape })
}

fn check_shape(psi: &DeltaPoly, a_p: i64, ring: &UnramifiedRing) -> Psi2Shape {
    let amb = psi.ambient();
    let p = ring.p();
    let mut offenders = Vec::new();
    let mut divisible = true;
    for (m, c) in psi.terms() {
        if m.exponent(2) > 0 && c.coords()[0] % p != 0 {
            divisible = false;
            offenders.push(amb.monomial_string(m));
        }
    }
    let t1 = Monomial::var(1);
    let t2 = Monomial::var(2);
    let is_p = psi.coefficient(&t2) == ring.from_int(p as i64);
    if !is_p {
        offenders.push(amb.monomial_string(&t2));
    }
    let is_minus_ap = psi.coefficient(&t1) == ring.from_int(-a_p);
    if !is_minus_ap {
        offenders.push(amb.monomial_string(&t1));
    }
    let at_origin = psi.constant_term().is_zero();
    if !at_origin {
        offenders.push("1".into());
    }
    Psi2Shape {
        second_jet_terms_divisible_by_p: divisible,
        second_jet_coefficient_is_p: is_p,
        first_jet_coefficient_is_minus_a_p: is_minus_ap,
        vanishes_at_origin: at_origin,
        offenders,
    }
}

impl Psi2 {
    pub fn ring(&self) -> &UnramifiedRing {
        self.series.ring()
    }

    /// `psi_2(t, t', t'')`.
    pub fn eval(&self, t: &UnramifiedElement, t1: &UnramifiedElement, t2: &UnramifiedElement) -> UnramifiedElement {
        let v = self.series.eval(&[t.clone(), t1.clone(), t2.clone()]).expect("three variables");
        self.ring().with_prec(&v, v.prec().min(self.certified_prec))
    }

    /// `psi_2` at the second jet `(a, delta a, delta^2 a)` of a disk point.
    pub fn eval_jet(&self, a: &UnramifiedElement) -> Result<UnramifiedElement, EllipticError> {
        let ring = self.ring();
        let a1 = ring.p_derivation(a)?;
        let a2 = ring.p_derivation(&a1)?;
        Ok(self.eval(a, &a1, &a2))
    }
}

/// `k - 2 - ceil(log_p D)`: the digits additivity is asserted to by default.
pub fn default_k_eff(p: u64, k: u32, degree: u32) -> u32 {
    let mut log = 0;
    let mut pw = 1u64;
    while pw < degree as u64 {
        pw *= p;
        log += 1;
    }
    k.saturating_sub(2 + log)
}

/// One failed additivity trial, with decimal residues.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityWitness {
    pub trial: usize,
    pub a: String,
    pub b: String,
    pub lhs: String,
    pub rhs: String,
    pub jets_agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub trials: usize,
    pub seed: u64,
    pub k: u32,
    pub k_eff: u32,
    pub degree: u32,
    pub passed: usize,
    /// Trials where the jets of `F(a, b)` from `delta` and from the
    /// prolonged law disagreed.
    pub jet_route_mismatches: usize,
    pub failures: Vec<AdditivityWitness>,
}

impl AdditivityReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Checks `psi_2(jet(F(a, b))) = psi_2(jet(a)) + psi_2(jet(b))` modulo
/// `p^k_eff` on random `a, b` in `pZ/p^k`.
///
/// The jets of `F(a, b)` are computed twice: by applying `delta` to the
/// number `F(a, b)`, and by evaluating the prolonged laws `delta F`,
/// `delta^2 F` at the jets of `a` and `b`. Both must agree.
// trace: psi2_is_additive | psi_2 is a homomorphism J^2(E) -> G_a | psi2_additive_on_cm_curve | k_eff = k - 2 - ceil(log_p D)
pub fn psi2_is_additive(
    psi: &Psi2,
    k: u32,
    degree: u32,
    trials: usize,
    seed: u64,
    k_eff: u32,
) -> Result<AdditivityReport, EllipticError> {
    let curve = psi.curve;
    let p = curve.p;
    let ring = psi.ring().clone();
    let working = ring.k();
    let law = formal_group_law(&curve, degree, working)?;
    let laws = prolonged_law(&law, 2, disk_weight_rule(2, working))?;

    let outcomes: Vec<Result<(bool, bool, AdditivityWitness), EllipticError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let sample = |rng: &mut ChaCha8Rng| {
                let x = ring.random(rng, k - 1);
                ring.with_prec(&ring.mul_by_p_pow(&x, 1), k)
            };
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let jet = |x: &UnramifiedElement| -> Result<[UnramifiedElement; 3], EllipticError> {
                let x1 = ring.p_derivation(x)?;
                let x2 = ring.p_derivation(&x1)?;
                Ok([x.clone(), x1, x2])
            };
            let ja = jet(&a)?;
            let jb = jet(&b)?;
            // Unused higher jets are passed as exact zeros so they do not cap precision.
            let zero = ring.zero();
            let up_to = |order: usize| -> Vec<UnramifiedElement> {
                let zero = &zero;
                [&ja, &jb]
                    .iter()
                    .flat_map(|j| (0..3).map(move |i| if i <= order { j[i].clone() } else { zero.clone() }))
                    .collect()
            };
            let c = laws[0].eval(&up_to(0))?;
            let jc = jet(&ring.with_prec(&c, k))?;
            let via_law = [laws[1].eval(&up_to(1))?, laws[2].eval(&up_to(2))?];
            let jets_agree = via_law[0] == jc[1] && via_law[1] == jc[2];

            let lhs = psi.eval(&jc[0], &jc[1], &jc[2]);
            let rhs = ring.add(&psi.eval(&ja[0], &ja[1], &ja[2]), &psi.eval(&jb[0], &jb[1], &jb[2]));
            let agree = lhs.prec() >= k_eff
                && rhs.prec() >= k_eff
                && ring.with_prec(&lhs, k_eff) == ring.with_prec(&rhs, k_eff);
            let show = |x: &UnramifiedElement| format!("{} (mod {p}^{})", x.coords()[0], x.prec());
            let witness =
                AdditivityWitness { trial, a: show(&a), b: show(&b), lhs: show(&lhs), rhs: show(&rhs), jets_agree };
            Ok((agree && jets_agree, jets_agree, witness))
        })
        .collect();

    let mut passed = 0;
    let mut mismatches = 0;
    let mut failures = Vec::new();
    for outcome in outcomes {
        let (ok, jets_agree, witness) = outcome?;
        if !jets_agree {
            mismatches += 1;
        }
        if ok {
            passed += 1;
        } else {
            failures.push(witness);
        }
    }
    Ok(AdditivityReport { trials, seed, k, k_eff, degree, passed, jet_route_mismatches: mismatches, failures })
}
