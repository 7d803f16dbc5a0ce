use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::formal::{formal_group_law, prolonged_law};
use super::{EllipticError, WeierstrassCurve};
use crate::jet::{DegreeRule, DeltaPoly, Monomial};
use crate::linalg::{solve_linear_zpk, ZpkMatrix};
use crate::padic::{valuation_u64, UnramifiedElement};

/// What a bounded search says about a Frobenius lift. Finding a character is
/// evidence for a lift; finding none is evidence against, never proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EvidenceFor,
    EvidenceAgainst,
    Inconclusive,
}

/// A kernel generator above the trivial submodule, as `G(t, t')` coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct Order1Character {
    /// `"t^i*t'^j" -> residue mod p^k'`; zero coefficients omitted.
    pub coefficients: BTreeMap<String, String>,
    pub min_valuation: u32,
    /// Least valuation among coefficients of monomials containing `t'`;
    /// `None` for a pure series in `t` (a truncated multiple of the logarithm).
    pub first_jet_valuation: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reverification {
    pub trials: usize,
    pub passed: usize,
    /// Additivity is checked modulo `p^digits`.
    pub digits: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Order1Search {
    pub degree_t: u32,
    pub degree_t_prime: u32,
    pub k_prime: u32,
    /// Total degree to which `F` is expanded before prolongation.
    pub law_degree: u32,
    pub unknowns: usize,
    pub constraints: usize,
    pub kernel_generators: usize,
    /// Generators with some coefficient of valuation below `k' - 1`.
    pub nontrivial: Vec<Order1Character>,
    pub reverification: Option<Reverification>,
    pub verdict: Verdict,
}

/// Searches for `G(t, t') = sum c_ij t^i t'^j` with
/// `G(F(t,s), F_1(t,t',s,s')) = G(t,t') + G(s,s')` in the window
/// `deg_(t,s) <= degree_t`, `deg_(t',s') <= degree_t_prime`, modulo `p^k'`.
///
/// `F` is expanded to total degree `degree_t + degree_t_prime + 1`, enough
/// for every window monomial of `F_1 = delta F` to be exact.
// trace: order1_character_search | order-1 characters J^1(E) -> G_a on the formal disk | order1_search_finds_character_on_cm_curve | k'
pub fn order1_character_search(
    curve: &WeierstrassCurve,
    degree_t: u32,
    degree_t_prime: u32,
    k_prime: u32,
    seed: u64,
) -> Result<Order1Search, EllipticError> {
    let p = curve.p;
    let law_degree = degree_t + degree_t_prime + 1;
    let working = k_prime + 1;
    let law = formal_group_law(curve, law_degree, working)?;
    let total = vec![DegreeRule::AtMost { weights: vec![1; 4], max: law_degree }];
    let laws = prolonged_law(&law, 1, total)?;

    // Variables are ordered t, t', s, s'.
    let window = laws[0].ambient().with_rules(vec![
        DegreeRule::AtMost { weights: vec![1, 0, 1, 0], max: degree_t },
        DegreeRule::AtMost { weights: vec![0, 1, 0, 1], max: degree_t_prime },
    ]);
    let u = laws[0].embed(&window)?.with_prec(k_prime);
    let u1 = laws[1].embed(&window)?.with_prec(k_prime);
    let var = |i: usize| DeltaPoly::var_at(&window, i, k_prime);
    let powers = |x: &DeltaPoly, n: u32| {
        let mut out = vec![DeltaPoly::from_int(&window, 1, k_prime)];
        for _ in 0..n {
            out.push(out.last().unwrap().mul(x));
        }
        out
    };
    let (u_pow, u1_pow) = (powers(&u, degree_t), powers(&u1, degree_t_prime));
    let (t_pow, t1_pow) = (powers(&var(0), degree_t), powers(&var(1), degree_t_prime));
    let (s_pow, s1_pow) = (powers(&var(2), degree_t), powers(&var(3), degree_t_prime));

    let unknowns: Vec<(u32, u32)> =
        (0..=degree_t).flat_map(|i| (0..=degree_t_prime).map(move |j| (i, j))).filter(|&(i, j)| i + j >= 1).collect();
    let columns: Vec<DeltaPoly> = unknowns
        .par_iter()
        .map(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            u_pow[i].mul(&u1_pow[j]).sub(&t_pow[i].mul(&t1_pow[j])).sub(&s_pow[i].mul(&s1_pow[j]))
        })
        .collect();

    let monomials: BTreeSet<Monomial> = columns.iter().flat_map(|c| c.terms().keys().copied()).collect();
    let row_of: BTreeMap<Monomial, usize> = monomials.iter().enumerate().map(|(r, m)| (*m, r)).collect();
    let mut rows = vec![vec![0u64; unknowns.len()]; monomials.len()];
    for (col, poly) in columns.iter().enumerate() {
        for (m, c) in poly.terms() {
            rows[row_of[m]][col] = c.coords()[0];
        }
    }
    let matrix = ZpkMatrix::from_residues(p, k_prime, unknowns.len(), rows);
    let solution = solve_linear_zpk(&matrix, None);

    let threshold = k_prime.saturating_sub(1);
    let names = ["t", "t'"];
    let nontrivial: Vec<(Vec<u64>, Order1Character)> = solution
        .kernel
        .iter()
        .filter_map(|g| {
            let min_valuation = g.vector.iter().filter(|&&x| x != 0).map(|&x| valuation_u64(x, p)).min()?;
            if min_valuation >= threshold {
                return None;
            }
            let coefficients = unknowns
                .iter()
                .zip(&g.vector)
                .filter(|(_, &c)| c != 0)
                .map(|(&(i, j), &c)| (monomial_name(&names, i, j), c.to_string()))
                .collect();
            let first_jet_valuation = unknowns
                .iter()
                .zip(&g.vector)
                .filter(|(&(_, j), &c)| j > 0 && c != 0)
                .map(|(_, &c)| valuation_u64(c, p))
                .min();
            Some((g.vector.clone(), Order1Character { coefficients, min_valuation, first_jet_valuation }))
        })
        .collect();

    let reverification =
        nontrivial.first().map(|(vector, _)| reverify(&law, &unknowns, vector, k_prime, seed)).transpose()?;
    let verdict = match (&reverification, nontrivial.is_empty()) {
        (_, true) => Verdict::EvidenceAgainst,
        (Some(r), false) if r.passed == r.trials => Verdict::EvidenceFor,
        _ => Verdict::Inconclusive,
    };
    Ok(Order1Search {
        degree_t,
        degree_t_prime,
        k_prime,
        law_degree,
        unknowns: unknowns.len(),
        constraints: monomials.len(),
        kernel_generators: solution.kernel.len(),
        nontrivial: nontrivial.into_iter().map(|(_, c)| c).collect(),
        reverification,
        verdict,
    })
}

fn monomial_name(names: &[&str; 2], i: u32, j: u32) -> String {
    let part = |name: &str, e: u32| match e {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{e}")),
    };
    [part(names[0], i), part(names[1], j)].into_iter().flatten().collect::<Vec<_>>().join("*")
}

const REVERIFY_TRIALS: usize = 30;

/// Evaluates `G` on jets of random disk points `a, b` and on the jet of
/// `F(a, b)`, computed by `delta` on the number `F(a, b)`.
fn reverify(
    law: &super::TruncatedSeries,
    unknowns: &[(u32, u32)],
    coefficients: &[u64],
    k_prime: u32,
    seed: u64,
) -> Result<Reverification, EllipticError> {
    let ring = law.series.ring().clone();
    let digits = k_prime.saturating_sub(1);
    let g = |t: &UnramifiedElement, t1: &UnramifiedElement| {
        let mut acc = ring.zero();
        for (&(i, j), &c) in unknowns.iter().zip(coefficients) {
            if c == 0 {
                continue;
            }
            let term = ring.mul(&ring.pow(t, i as u64), &ring.pow(t1, j as u64));
            acc = ring.add(&acc, &ring.mul(&ring.from_i128(c as i128), &term));
        }
        ring.with_prec(&acc, digits)
    };
    let outcomes: Vec<Result<bool, EllipticError>> = (0..REVERIFY_TRIALS)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let a = ring.mul_by_p_pow(&ring.random(&mut rng, ring.k() - 1), 1);
            let b = ring.mul_by_p_pow(&ring.random(&mut rng, ring.k() - 1), 1);
            let c = law.series.eval(&[a.clone(), b.clone()])?;
            let (da, db, dc) = (ring.p_derivation(&a)?, ring.p_derivation(&b)?, ring.p_derivation(&c)?);
            Ok(g(&c, &dc) == ring.add(&g(&a, &da), &g(&b, &db)))
        })
        .collect();
    let mut passed = 0;
    for o in outcomes {
        if o? {
            passed += 1;
        }
    }
    Ok(Reverification { trials: REVERIFY_TRIALS, passed, digits })
}
