//! The sequence norm `sup_beta 2^{rho |beta|} (sum_nu (sum_m |lambda|^p)^{q/p})^{1/q}`.

use crate::gridfn::LpExponent;
use std::collections::BTreeMap;

/// Index `(beta, nu, m)` of a quark coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuarkIndex {
    pub beta: Vec<u32>,
    pub nu: u32,
    pub m: Vec<i64>,
}

impl QuarkIndex {
    /// `beta = 0`, one spatial index per level.
    pub fn level(nu: u32, dim: usize) -> Self {
        QuarkIndex {
            beta: vec![0; dim],
            nu,
            m: vec![0; dim],
        }
    }
}

fn lp_sum(values: impl Iterator<Item = f64>, p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => values.map(f64::abs).fold(0.0, f64::max),
        LpExponent::Finite(p) => values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Exact evaluation for finitely many coefficients; repeated indices are summed.
pub fn quark_sequence_norm(coeffs: &[(QuarkIndex, f64)], rho: f64, p: LpExponent, q: LpExponent) -> f64 {
    let mut tree: BTreeMap<&[u32], BTreeMap<u32, BTreeMap<&[i64], f64>>> = BTreeMap::new();
    for (idx, v) in coeffs {
        *tree
            .entry(&idx.beta)
            .or_default()
            .entry(idx.nu)
            .or_default()
            .entry(&idx.m)
            .or_default() += v;
    }
    tree.iter()
        .map(|(beta, levels)| {
            let size: u32 = beta.iter().sum();
            let inner = levels.values().map(|ms| lp_sum(ms.values().copied(), p));
            2f64.powf(rho * size as f64) * lp_sum(inner, q)
        })
        .fold(0.0, f64::max)
}
