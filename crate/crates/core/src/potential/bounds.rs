//! Variational bounds on effective conductance and resistance.

use std::collections::HashMap;

use serde::Serialize;

use super::network::ElectricNetwork;
use crate::configspace::log_sum_exp;
use crate::error::{Error, Result};

/// Cut bound `C(A,B) ≤ Σ_{e∈∂C} c(e) ≤ |∂C| · max c`.
#[derive(Clone, Debug, Serialize)]
pub struct CutBound {
    pub log_cut_conductance: f64,
    pub boundary_edges: usize,
    pub log_crude_bound: f64,
}

/// Upper bound on the effective conductance from the cut around `inside`.
pub fn cut_upper_bound(net: &ElectricNetwork, inside: &[bool]) -> Result<CutBound> {
    if inside.len() != net.len() {
        return Err(Error::InvalidParameter("cut indicator has wrong length".into()));
    }
    let mut logs = Vec::new();
    for x in 0..net.len() {
        if !inside[x] {
            continue;
        }
        for &(y, lc) in net.neighbors_log_c(x) {
            if !inside[y] {
                logs.push(lc);
            }
        }
    }
    if logs.is_empty() {
        return Err(Error::InvalidParameter("cut has no boundary edges".into()));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CutBound {
        log_cut_conductance: log_sum_exp(&logs),
        boundary_edges: logs.len(),
        log_crude_bound: (logs.len() as f64).ln() + max,
    })
}

/// Lower bound `C(A,B) ≥ Σ_k 1 / Σ_{e∈ω_k} n(e) r(e)` from a family of
/// self-avoiding paths from A to B, no two of which use an edge in opposite
/// directions. Returns the log of the bound.
pub fn path_lower_bound(
    net: &ElectricNetwork,
    a: &[usize],
    b: &[usize],
    paths: &[Vec<usize>],
) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::InvalidParameter("path family is empty".into()));
    }
    let in_a: std::collections::HashSet<usize> = a.iter().copied().collect();
    let in_b: std::collections::HashSet<usize> = b.iter().copied().collect();
    let mut uses: HashMap<(usize, usize), usize> = HashMap::new();
    for p in paths {
        if p.len() < 2 || !in_a.contains(&p[0]) || !in_b.contains(p.last().unwrap()) {
            return Err(Error::InvalidParameter("path must run from A to B".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if !p.iter().all(|x| seen.insert(*x)) {
            return Err(Error::InvalidParameter("path is not self-avoiding".into()));
        }
        for w in p.windows(2) {
            if net.log_conductance(w[0], w[1]).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "states {} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
            if uses.contains_key(&(w[1], w[0])) {
                return Err(Error::InvalidParameter(
                    "two paths traverse an edge in opposite directions".into(),
                ));
            }
            *uses.entry((w[0], w[1])).or_insert(0) += 1;
        }
    }
    let terms: Vec<f64> = paths
        .iter()
        .map(|p| {
            let parts: Vec<f64> = p
                .windows(2)
                .map(|w| {
                    let n = uses[&(w[0], w[1])] as f64;
                    n.ln() - net.log_conductance(w[0], w[1]).unwrap()
                })
                .collect();
            -log_sum_exp(&parts)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Greedy family of up to `k` edge-disjoint bottleneck paths from A to B.
pub fn greedy_paths(net: &ElectricNetwork, a: &[usize], b: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut removed: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut out = Vec::new();
    for _ in 0..k {
        let (val, path) = super::network::minimax(
            net.len(),
            a,
            b,
            |x| {
                net.neighbors_log_c(x)
                    .iter()
                    .filter(|&&(y, _)| !removed.contains(&(x, y)))
                    .map(|&(y, c)| (y, -c))
                    .collect::<Vec<_>>()
                    .into_iter()
            },
            |p: &f64, q: &f64| p.total_cmp(q),
            |p, q| if p > q { p } else { q },
            f64::NEG_INFINITY,
        );
        if val.is_none() || path.len() < 2 {
            break;
        }
        for w in path.windows(2) {
            removed.insert((w[0], w[1]));
            removed.insert((w[1], w[0]));
        }
        out.push(path);
    }
    out
}

/// `ln R`, `ln Ψ`, and whether `|X|^{-2} Ψ ≤ R ≤ |X|^2 Ψ` holds.
#[derive(Clone, Debug, Serialize)]
pub struct Sandwich {
    pub log_r: f64,
    pub log_psi: f64,
    pub log_factor: f64,
    pub holds: bool,
}

pub fn sandwich(net: &ElectricNetwork, a: &[usize], b: &[usize]) -> Result<Sandwich> {
    let log_r = net.log_effective_resistance(a, b)?;
    let log_psi = net.bottleneck(a, b).log_psi;
    let log_factor = 2.0 * (net.len() as f64).ln();
    let slack = 1e-9;
    let holds = log_psi - log_factor <= log_r + slack && log_r <= log_psi + log_factor + slack;
    Ok(Sandwich {
        log_r,
        log_psi,
        log_factor,
        holds,
    })
}

/// Counts of violated voltage bounds for a pair of disjoint sets.
#[derive(Clone, Debug, Default, Serialize)]
pub struct VoltageBoundReport {
    pub checked: usize,
    pub resistance_violations: usize,
    pub bottleneck_violations: usize,
    pub lipschitz_violations: usize,
}

impl VoltageBoundReport {
    pub fn total_violations(&self) -> usize {
        self.resistance_violations + self.bottleneck_violations + self.lipschitz_violations
    }
}

/// Check, for every `x` outside `A ∪ B`,
/// `1 - R(x,A)/R(A,B) ≤ W(x) ≤ R(x,B)/R(A,B)`, the bottleneck versions with
/// factor `|X|^4`, and `|W(x) - W(y)| ≤ |X|^4 Ψ(x,y)/Ψ(A,B)` on neighbours.
pub fn check_voltage_bounds(
    net: &ElectricNetwork,
    a: &[usize],
    b: &[usize],
) -> Result<VoltageBoundReport> {
    let tol = 1e-9;
    let w = net.voltage(a, b)?;
    let lr_ab = net.log_effective_resistance(a, b)?;
    let lpsi_ab = net.bottleneck(a, b).log_psi;
    let log_k = 4.0 * (net.len() as f64).ln();
    let mut in_ab = vec![false; net.len()];
    for &x in a.iter().chain(b) {
        in_ab[x] = true;
    }
    let mut rep = VoltageBoundReport::default();
    for x in 0..net.len() {
        if in_ab[x] {
            continue;
        }
        rep.checked += 1;
        let r_xa = (net.log_effective_resistance(&[x], a)? - lr_ab).exp();
        let r_xb = (net.log_effective_resistance(&[x], b)? - lr_ab).exp();
        if w[x] < 1.0 - r_xa - tol || w[x] > r_xb + tol {
            rep.resistance_violations += 1;
        }
        let p_xa = (log_k + net.bottleneck(&[x], a).log_psi - lpsi_ab).exp();
        let p_xb = (log_k + net.bottleneck(&[x], b).log_psi - lpsi_ab).exp();
        if w[x] < 1.0 - p_xa - tol || w[x] > p_xb + tol {
            rep.bottleneck_violations += 1;
        }
        for &(y, _) in net.neighbors_log_c(x) {
            let bound = (log_k + net.bottleneck(&[x], &[y]).log_psi - lpsi_ab).exp();
            if (w[x] - w[y]).abs() > bound + tol {
                rep.lipschitz_violations += 1;
            }
        }
    }
    Ok(rep)
}
