use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    order1_character_search, psi2_build, psi2_is_additive, AdditivityReport, EllipticError, Order1Search, Psi2Shape,
    Verdict, WeierstrassCurve,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveReportConfig {
    /// Precision of disk points and of `psi_2`.
    pub k: u32,
    /// Degree bound for the logarithm and the group law.
    pub degree: u32,
    /// Additivity is asserted modulo `p^k_eff`.
    pub k_eff: u32,
    pub trials: usize,
    pub seed: u64,
    /// Order-1 search window and precision.
    pub k_prime: u32,
    pub degree_t: u32,
    pub degree_t_prime: u32,
}

impl Default for CurveReportConfig {
    fn default() -> Self {
        CurveReportConfig {
            k: 6,
            degree: 10,
            k_eff: 3,
            trials: 32,
            seed: 0,
            k_prime: 4,
            degree_t: 8,
            degree_t_prime: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveReport {
    pub curve: WeierstrassCurve,
    pub discriminant: String,
    pub a_p: i64,
    pub is_ordinary: bool,
    pub config: CurveReportConfig,
    pub psi2_certified_prec: u32,
    /// Monomial in `t, t', t''` to residue mod `p^psi2_certified_prec`.
    pub psi2_coefficients: BTreeMap<String, String>,
    pub psi2_shape: Psi2Shape,
    pub additivity: AdditivityReport,
    pub order1: Order1Search,
    pub verdict: Verdict,
}

/// Builds `psi_2`, tests its additivity and runs the order-1 search.
pub fn curve_report(curve: &WeierstrassCurve, config: &CurveReportConfig) -> Result<CurveReport, EllipticError> {
    let psi = psi2_build(curve, config.degree, config.k)?;
    let additivity = psi2_is_additive(&psi, config.k, config.degree, config.trials, config.seed, config.k_eff)?;
    let order1 = order1_character_search(curve, config.degree_t, config.degree_t_prime, config.k_prime, config.seed)?;
    let ring = psi.ring();
    let amb = psi.series.ambient();
    let psi2_coefficients = psi
        .series
        .terms()
        .iter()
        .filter_map(|(m, c)| {
            let c = ring.with_prec(c, psi.certified_prec);
            (!c.is_zero()).then(|| (amb.monomial_string(m), c.balanced_constant().to_string()))
        })
        .collect();
    Ok(CurveReport {
        curve: *curve,
        discriminant: curve.discriminant().to_string(),
        a_p: psi.a_p,
        is_ordinary: psi.a_p.rem_euclid(curve.p as i64) != 0,
        config: *config,
        psi2_certified_prec: psi.certified_prec,
        psi2_coefficients,
        psi2_shape: psi.shape.clone(),
        additivity,
        verdict: order1.verdict,
        order1,
    })
}
