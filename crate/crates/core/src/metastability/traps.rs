//! Dominance sets `J(a)`, `J⁻(a)`, the no-trap certificate and standard paths.

use std::cmp::Ordering;

use serde::Serialize;

use crate::configspace::{u_mask, weight_exponent, Config, ConfigurationSpace};
use crate::error::{Error, Result};
use crate::exponent::{Alpha, AsymptoticExponent, ExponentOrder};
use crate::graph::BipartiteGraph;
use crate::potential::SymbolicNetwork;

/// `J(a)`: states `x ≠ a` with `π(x) ⪰ π(a)`, and `J⁻(a)`: states with `π(x) ≻ π(a)`,
/// as sorted state indices. Equal heights go into `J(a)` only.
pub fn dominance_sets(space: &ConfigurationSpace, a: usize, alpha: Alpha) -> (Vec<usize>, Vec<usize>) {
    let ha = space.height(a, alpha);
    let mut j = Vec::new();
    let mut jm = Vec::new();
    for x in 0..space.len() {
        if x == a {
            continue;
        }
        match space.height(x, alpha).cmp(&ha) {
            Ordering::Less => {
                j.push(x);
                jm.push(x);
            }
            Ordering::Equal => j.push(x),
            Ordering::Greater => {}
        }
    }
    (j, jm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoTrapStatus {
    Certified,
    Refuted,
    /// Some comparison is an exponent tie at this `α`.
    Inconclusive,
}

/// A state whose escape quantity is not strictly below that of `u`.
#[derive(Clone, Debug, Serialize)]
pub struct TrapWitness {
    pub state: usize,
    pub config: String,
    /// Order of `π(x)Ψ(x, J⁻(x)) · Z`; `None` when `J⁻(x)` is empty or unreachable.
    pub exponent: Option<AsymptoticExponent>,
    /// `"equal"`, `"greater"`, `"tie"` or `"no-escape"`.
    pub relation: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoTrapReport {
    pub status: NoTrapStatus,
    /// Order of `π(u)Ψ(u, J(u)) · Z`.
    pub reference: AsymptoticExponent,
    pub states_checked: usize,
    pub violations: Vec<TrapWitness>,
}

/// Check `π(x)Ψ(x, J⁻(x)) ≺ π(u)Ψ(u, J(u))` for every state `x ∉ {u, v}` by
/// symbolic bottleneck search.
pub fn no_trap_certificate(space: &ConfigurationSpace, alpha: Alpha) -> Result<NoTrapReport> {
    let net = SymbolicNetwork::new(space, alpha);
    let u = space.u_index();
    let v = space.v_index();
    let (ju, _) = dominance_sets(space, u, alpha);
    let reference = match net.bottleneck(&[u], &ju).exponent {
        Some(e) => space.weight_exponent(u) + e,
        None => {
            return Err(Error::Precondition(
                "J(u) is empty or unreachable; the escape from u is undefined".into(),
            ))
        }
    };
    let mut violations = Vec::new();
    let mut tie = false;
    let mut refuted = false;
    let mut checked = 0;
    for x in 0..space.len() {
        if x == u || x == v {
            continue;
        }
        checked += 1;
        let (_, jm) = dominance_sets(space, x, alpha);
        let config = format!("{:#x}", space.state(x));
        let exp = if jm.is_empty() {
            None
        } else {
            net.bottleneck(&[x], &jm).exponent
        };
        let Some(e) = exp else {
            refuted = true;
            violations.push(TrapWitness {
                state: x,
                config,
                exponent: None,
                relation: "no-escape",
            });
            continue;
        };
        let q = space.weight_exponent(x) + e;
        let relation = match q.compare(&reference, alpha) {
            ExponentOrder::Less => continue,
            ExponentOrder::Equal => "equal",
            ExponentOrder::Greater => "greater",
            ExponentOrder::Tie => "tie",
        };
        if relation == "tie" {
            tie = true;
        } else {
            refuted = true;
        }
        violations.push(TrapWitness {
            state: x,
            config,
            exponent: Some(q),
            relation,
        });
    }
    let status = if refuted {
        NoTrapStatus::Refuted
    } else if tie {
        NoTrapStatus::Inconclusive
    } else {
        NoTrapStatus::Certified
    };
    Ok(NoTrapReport {
        status,
        reference,
        states_checked: checked,
        violations,
    })
}

/// Monotone configuration path of a numbering, starting at `u`.
#[derive(Clone, Debug, Serialize)]
pub struct StandardPath {
    pub configs: Vec<Config>,
    /// Positions in `configs` of the backbone `ω(k_0), ..., ω(k_m)`.
    pub backbone: Vec<usize>,
}

impl StandardPath {
    /// Largest edge resistance order along the path, as the order of `r/Z`.
    pub fn critical_exponent(&self, g: &BipartiteGraph, alpha: Alpha) -> Option<AsymptoticExponent> {
        self.configs
            .windows(2)
            .map(|w| {
                let a = weight_exponent(g, w[0]);
                let b = weight_exponent(g, w[1]);
                AsymptoticExponent::GAMMA - a.max_at(b, alpha)
            })
            .reduce(|p, q| p.max_at(q, alpha))
    }
}

/// For each new site of the numbering, remove the U-particles on its
/// neighbours in increasing site order and then place the particle.
pub fn standard_path(g: &BipartiteGraph, numbering: &[usize]) -> Result<StandardPath> {
    let mut seen: u128 = 0;
    for &a in numbering {
        if a >= g.n_sites() || g.is_u(a) {
            return Err(Error::InvalidParameter(format!("site {a} is not in V")));
        }
        if seen >> a & 1 == 1 {
            return Err(Error::InvalidParameter(format!("site {a} repeated in numbering")));
        }
        seen |= 1u128 << a;
    }
    let mut x = u_mask(g);
    let mut configs = vec![x];
    let mut backbone = vec![0];
    for &a in numbering {
        for &j in g.neighbors(a) {
            if x >> j & 1 == 1 {
                x &= !(1u128 << j);
                configs.push(x);
            }
        }
        x |= 1u128 << a;
        configs.push(x);
        backbone.push(configs.len() - 1);
    }
    Ok(StandardPath { configs, backbone })
}

/// Order of `Ψ/Z` predicted for an isoperimetric progression starting at `∅`:
/// `γ/w(u) · λ^{Δ(s†)+s†-1} / λ̄^{s†-1}` with `s†` maximising
/// `g` over `{1, ..., s_max}`.
pub fn progression_resistance_exponent(
    values: &[i64],
    s_max: usize,
    alpha: Alpha,
    n_u: usize,
) -> Option<AsymptoticExponent> {
    let s = (1..=s_max)
        .filter(|&s| s < values.len())
        .max_by(|&a, &b| {
            let ga = super::g_value(values[a], a, alpha);
            let gb = super::g_value(values[b], b, alpha);
            ga.cmp(&gb).then(b.cmp(&a))
        })?;
    let d = values[s];
    let lam = AsymptoticExponent::new(d + s as i64 - 1, 0);
    let lam_bar = AsymptoticExponent::new(s as i64 - 1, s as i64 - 1);
    Some(AsymptoticExponent::GAMMA - AsymptoticExponent::new(n_u as i64, 0) + lam - lam_bar)
}
