//! The square relating `J^2(X)`, `J^1(J^1(X))`, `J^1(X) x_X J^1(X)` and
//! `J^1(X)`, checked on coordinate rings for one base coordinate `T`.
//!
//! Corners (as polynomial rings over `R`):
//! top-left `[T, dT, d1T, d1dT]`, top-right `[T, dT(x)1, 1(x)dT]`,
//! bottom-left `[T, dT, d^2T]`, bottom-right `[T, dT]`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Ambient, Branch, CoefficientMap, DegreeRule, DeltaPoly, JetError, JetVariable, Monomial, RingMapSpec};
use crate::padic::{RingError, RingParams, UnramifiedRing};

/// The four corners and four arrows of the square.
#[derive(Debug, Clone)]
pub struct JetSquare {
    pub top_left: Arc<Ambient>,
    pub top_right: Arc<Ambient>,
    pub bottom_left: Arc<Ambient>,
    pub bottom_right: Arc<Ambient>,
    /// top-right -> top-left: `dT(x)1 -> dT`, `1(x)dT -> d1T`.
    pub top: RingMapSpec,
    /// top-left -> bottom-left: `d1T -> dT`, `d1dT -> d^2T`.
    pub left: RingMapSpec,
    /// top-right -> bottom-right: both factors to `dT`.
    pub right: RingMapSpec,
    /// bottom-right -> bottom-left: inclusion.
    pub bottom: RingMapSpec,
}

impl JetSquare {
    pub fn new(ring: UnramifiedRing, degree: u32) -> Result<Self, JetError> {
        let t = JetVariable::base(0);
        let dt = t.prolonged(Branch::Delta);
        let d1t = t.prolonged(Branch::Delta1);
        let d1dt = dt.prolonged(Branch::Delta1);
        let ddt = dt.prolonged(Branch::Delta);
        let names = vec!["T".to_string()];
        let rules = |n: usize| vec![DegreeRule::AtMost { weights: vec![1; n], max: degree }];

        let top_left = Ambient::new(ring.clone(), names.clone(), vec![t, dt, d1t, d1dt], rules(4))?;
        // The second tensor factor's dT is stored under a d1 word; only the
        // explicit arrows below give it meaning.
        let top_right = Ambient::new(ring.clone(), names.clone(), vec![t, dt, d1t], rules(3))?.with_labels(vec![
            "T".into(),
            "T'(x)1".into(),
            "1(x)T'".into(),
        ]);
        let bottom_left = Ambient::new(ring.clone(), names.clone(), vec![t, dt, ddt], rules(3))?;
        let bottom_right = Ambient::new(ring, names, vec![t, dt], rules(2))?;

        let id = CoefficientMap::Identity;
        let top = RingMapSpec::new(&top_right, &top_left, id).send(0, 0).send(1, 1).send(2, 2);
        let left = RingMapSpec::new(&top_left, &bottom_left, id).send(0, 0).send(1, 1).send(2, 1).send(3, 2);
        let right = RingMapSpec::new(&top_right, &bottom_right, id).send(0, 0).send(1, 1).send(2, 1);
        let bottom = RingMapSpec::inclusion(&bottom_right, &bottom_left)?;
        Ok(JetSquare { top_left, top_right, bottom_left, bottom_right, top, left, right, bottom })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorCheck {
    pub generator: String,
    pub via_top_left: String,
    pub via_bottom_right: String,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramReport {
    pub p: u64,
    pub k: u32,
    pub degree_bound: u32,
    pub generators: Vec<GeneratorCheck>,
    pub monomials_checked: usize,
    pub commutativity_mismatches: Vec<String>,
    /// Sizes of the monomial bases of the pushout and of `J^2` up to the bound.
    pub pushout_basis_size: usize,
    pub second_jet_basis_size: usize,
    pub cartesian_mismatches: Vec<String>,
    pub prolongation_trials: usize,
    pub prolongation_mismatches: Vec<String>,
    pub passed: bool,
}

fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    for i in 0..nvars {
        let mut next = Vec::new();
        for m in &out {
            let room = degree - m.degree();
            for e in 0..=room {
                let mut m2 = *m;
                m2.0[i] = e as u8;
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// The single variable index of `f` if `f` is exactly one variable.
fn as_variable(f: &DeltaPoly) -> Option<usize> {
    if f.len() != 1 {
        return None;
    }
    let (m, c) = f.terms().iter().next()?;
    let one = f.ring().with_prec(&f.ring().one(), c.prec());
    if *c != one || m.degree() != 1 {
        return None;
    }
    m.0.iter().position(|&e| e == 1)
}

/// Checks the square for commutativity on all top-right monomials of degree
/// at most `degree`, and for cartesianness at the level of presentations:
/// the pushout of the top-left and bottom-right rings over the top-right
/// ring must map bijectively onto the monomial basis of the bottom-left ring.
// trace: verify_jet_square | J^2 = J^1(J^1) x (J^1 x J^1) J^1 on coordinate rings | jet_square_passes_at_degree_6 | k
pub fn verify_jet_square(p: u64, k: u32, degree: u32, seed: u64) -> Result<DiagramReport, RingError> {
    let ring = UnramifiedRing::new(RingParams::prime_field(p, k))?;
    let sq = JetSquare::new(ring.clone(), degree).expect("square ambients have four variables");
    let via_tl = sq.top.then(&sq.left).expect("generators assigned");
    let via_br = sq.right.then(&sq.bottom).expect("generators assigned");

    let mut generators = Vec::new();
    for i in 0..sq.top_right.vars().len() {
        let a = via_tl.image(i).expect("assigned");
        let b = via_br.image(i).expect("assigned");
        generators.push(GeneratorCheck {
            generator: sq.top_right.var_name(i),
            via_top_left: a.to_string(),
            via_bottom_right: b.to_string(),
            agree: a == b,
        });
    }

    let mut commutativity_mismatches = Vec::new();
    let basis = monomials_up_to(sq.top_right.vars().len(), degree);
    for m in &basis {
        let f = DeltaPoly::from_terms(&sq.top_right, k, [(*m, ring.one())]);
        let a = via_tl.apply(&f).expect("assigned");
        let b = via_br.apply(&f).expect("assigned");
        if a != b {
            commutativity_mismatches.push(format!("{}: {} vs {}", sq.top_right.monomial_string(m), a, b));
        }
    }

    // Pushout: variables of top-left and bottom-right glued along the images
    // of the top-right generators.
    let ntl = sq.top_left.vars().len();
    let nbr = sq.bottom_right.vars().len();
    let mut parent: Vec<usize> = (0..ntl + nbr).collect();
    let mut cartesian_mismatches = Vec::new();
    for i in 0..sq.top_right.vars().len() {
        let a = sq.top.image(i).and_then(as_variable);
        let b = sq.right.image(i).and_then(as_variable);
        match (a, b) {
            (Some(a), Some(b)) => {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, ntl + b));
                parent[ra] = rb;
            }
            _ => cartesian_mismatches
                .push(format!("relation for {} is not variable = variable", sq.top_right.var_name(i))),
        }
    }
    // Each class must have a single image variable in the bottom-left ring.
    let mut class_image: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..ntl + nbr {
        let img = if x < ntl { sq.left.image(x) } else { sq.bottom.image(x - ntl) };
        let Some(v) = img.and_then(as_variable) else {
            cartesian_mismatches.push(format!("generator {x} does not map to a variable"));
            continue;
        };
        let r = find(&mut parent, x);
        match class_image.get(&r) {
            Some(&w) if w != v => cartesian_mismatches.push(format!(
                "class of {} maps to both {} and {}",
                if x < ntl { sq.top_left.var_name(x) } else { sq.bottom_right.var_name(x - ntl) },
                sq.bottom_left.var_name(w),
                sq.bottom_left.var_name(v)
            )),
            _ => {
                class_image.insert(r, v);
            }
        }
    }
    let classes: Vec<usize> = class_image.keys().copied().collect();
    let pushout_basis = monomials_up_to(classes.len(), degree);
    let mut hit: BTreeSet<Monomial> = BTreeSet::new();
    for m in &pushout_basis {
        let mut image = Monomial::one();
        for (slot, r) in classes.iter().enumerate() {
            image.0[class_image[r]] += m.0[slot];
        }
        if !hit.insert(image) {
            cartesian_mismatches
                .push(format!("two pushout monomials map to {}", sq.bottom_left.monomial_string(&image)));
        }
    }
    let target_basis = monomials_up_to(sq.bottom_left.vars().len(), degree);
    for m in &target_basis {
        if !hit.contains(m) {
            cartesian_mismatches.push(format!("{} is not hit from the pushout", sq.bottom_left.monomial_string(m)));
        }
    }

    // d1 then left equals left then d, on random polynomials in T, dT.
    let j1 = Ambient::new(
        ring.clone(),
        vec!["T".into()],
        vec![JetVariable::base(0), JetVariable::jet(0, 1)],
        vec![DegreeRule::AtMost { weights: vec![1, 1], max: degree }],
    )
    .expect("two variables");
    let j1_into_tl = RingMapSpec::inclusion(&j1, &sq.top_left).expect("T, dT are top-left variables");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prolongation_mismatches = Vec::new();
    let trials = 10;
    let max_in = (degree / p as u32).max(1);
    for _ in 0..trials {
        let terms = monomials_up_to(2, max_in).into_iter().map(|m| (m, ring.random(&mut rng, k)));
        let f = DeltaPoly::from_terms(&j1, k, terms);
        let in_tl = j1_into_tl.apply(&f).expect("inclusion");
        let a = sq.left.apply(&in_tl.prolong(Branch::Delta1, &sq.top_left).expect("d1 variables declared"));
        let b = sq.left.apply(&in_tl).and_then(|g| g.prolong(Branch::Delta, &sq.bottom_left));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => prolongation_mismatches.push(format!("{f}: {a:?} vs {b:?}")),
        }
    }

    let passed = generators.iter().all(|g| g.agree)
        && commutativity_mismatches.is_empty()
        && cartesian_mismatches.is_empty()
        && prolongation_mismatches.is_empty();
    Ok(DiagramReport {
        p,
        k,
        degree_bound: degree,
        generators,
        monomials_checked: basis.len(),
        commutativity_mismatches,
        pushout_basis_size: pushout_basis.len(),
        second_jet_basis_size: target_basis.len(),
        cartesian_mismatches,
        prolongation_trials: trials,
        prolongation_mismatches,
        passed,
    })
}
