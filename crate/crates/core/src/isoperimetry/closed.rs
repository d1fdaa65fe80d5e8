//! Closed-form isoperimetric functions of the torus, doubled torus, tree-like
//! graphs and the hypercube.

use serde::Serialize;

use super::{binomial, IsoperimetricProfile, Provenance};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, GraphSpec};

/// `⌈2√s⌉ + 1` for `s > 0`, the optimal cost on the square lattice.
pub fn torus_delta(s: usize) -> i64 {
    if s == 0 {
        return 0;
    }
    // smallest t with t² ≥ 4s
    let mut t = (2.0 * (s as f64).sqrt()).floor() as u64;
    while t * t < 4 * s as u64 {
        t += 1;
    }
    while t > 0 && (t - 1) * (t - 1) >= 4 * s as u64 {
        t -= 1;
    }
    t as i64 + 1
}

/// `(ℓ, i)` with `s = ℓ² + (ℓ-1)² + i` and `0 ≤ i < 4ℓ`.
pub(crate) fn doubled_decompose(s: usize) -> (usize, usize) {
    let mut l = 1;
    while (l + 1) * (l + 1) + l * l <= s {
        l += 1;
    }
    (l, s - l * l - (l - 1) * (l - 1))
}

/// Optimal cost on the doubled square lattice.
pub fn doubled_torus_delta(s: usize) -> i64 {
    if s == 0 {
        return 0;
    }
    let (l, i) = doubled_decompose(s);
    let extra = if i == 0 {
        0
    } else if i < l {
        1
    } else if i < 2 * l {
        2
    } else if i < 3 * l {
        3
    } else {
        4
    };
    (4 * l + extra) as i64
}

/// `ψ_d(r, k)`: the number of weight-`(r+1)` words of length `d` covering one
/// of the first `k` weight-`r` words in reverse lexicographic order.
pub fn hypercube_psi(d: usize, r: usize, k: u128) -> u128 {
    if k == 0 {
        return 0;
    }
    if r == 0 {
        // the single empty word is covered by all d unit words
        return d as u128;
    }
    if r >= d {
        return 0;
    }
    let head = binomial(d - 1, r - 1);
    if k <= head {
        hypercube_psi(d - 1, r - 1, k)
    } else {
        binomial(d - 1, r) + hypercube_psi(d - 1, r, k - head)
    }
}

/// Bipartite isoperimetric function `Δ_{d+1}(s)` of the hypercube `H_{d+1}`,
/// which is the vertex isoperimetric function of `H_d`.
pub fn hypercube_delta(d: usize, s: u128) -> Result<i64> {
    if s > 1u128 << d {
        return Err(Error::InvalidParameter(format!(
            "size {s} exceeds 2^{d}"
        )));
    }
    if s == 0 {
        return Ok(0);
    }
    let mut below = 0u128;
    let mut r = 0;
    while r <= d && below + binomial(d, r) <= s {
        below += binomial(d, r);
        r += 1;
    }
    let k = s - below;
    Ok((binomial(d, r) + hypercube_psi(d, r, k)) as i64 - k as i64)
}

/// Graph families with a known isoperimetric function on a window of sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ClosedFormFamily {
    Torus { m: usize, n: usize },
    DoubledTorus { m: usize, n: usize },
    /// `degree`-regular bipartite graph with the given girth.
    TreeLike { degree: usize, girth: usize },
    /// Doubled version of a `degree`-regular graph with the given girth.
    DoubledTreeLike { degree: usize, girth: usize },
    /// The bipartite hypercube `H_dim`.
    Hypercube { dim: usize },
}

fn regular_girth(adj: &[Vec<usize>]) -> Option<(usize, usize)> {
    let d = adj.first()?.len();
    if adj.iter().any(|a| a.len() != d) {
        return None;
    }
    Some((d, crate::graph::girth_of(adj)?))
}

/// Largest `s` for which the enclosing tilted rectangle of the optimal lattice
/// shape, `a × b`, satisfies `a + b + 1 ≤ min(m, n)`.
pub fn torus_window(m: usize, n: usize) -> usize {
    let side = m.min(n);
    let mut s = 0;
    loop {
        let t = s + 1;
        let l = (t as f64).sqrt().floor() as usize;
        let l = if (l + 1) * (l + 1) <= t { l + 1 } else { l };
        let (a, b) = if l * l == t {
            (l, l)
        } else if t <= l * (l + 1) {
            (l, l + 1)
        } else {
            (l + 1, l + 1)
        };
        if a + b + 1 > side {
            return s;
        }
        s = t;
    }
}

/// Largest `s` for which the doubled-lattice formula holds on `Z_m × Z_n`:
/// the largest Pareto set whose neighbourhood fits in a `k × k` box,
/// `k = min(m, n)`. For odd `k = 2ℓ+1` that is the type II set at `ℓ`, for
/// even `k = 2ℓ+2` the type IV set at `ℓ`.
pub fn doubled_torus_window(m: usize, n: usize) -> usize {
    let k = m.min(n);
    if k < 3 {
        return 0;
    }
    if k % 2 == 1 {
        let l = (k - 1) / 2;
        l * l + (l - 1) * (l - 1) + l - 1
    } else {
        let l = (k - 2) / 2;
        l * l + (l - 1) * (l - 1) + 3 * l - 1
    }
}

impl ClosedFormFamily {
    /// Recognise a family from the graph's spec, or from regularity and girth.
    pub fn detect(g: &BipartiteGraph) -> Option<Self> {
        match g.spec() {
            Some(GraphSpec::Torus { m, n }) => {
                return Some(ClosedFormFamily::Torus { m: *m, n: *n })
            }
            Some(GraphSpec::Hypercube { d }) => {
                return Some(ClosedFormFamily::Hypercube { dim: *d })
            }
            Some(GraphSpec::Doubled(base)) => {
                if let GraphSpec::Torus { m, n } = **base {
                    return Some(ClosedFormFamily::DoubledTorus { m, n });
                }
                let simple = base.build_simple().ok()?;
                let adj: Vec<Vec<usize>> =
                    (0..simple.n()).map(|v| simple.neighbors(v).to_vec()).collect();
                let (degree, girth) = regular_girth(&adj)?;
                return Some(ClosedFormFamily::DoubledTreeLike { degree, girth });
            }
            _ => {}
        }
        let adj: Vec<Vec<usize>> = (0..g.n_sites()).map(|v| g.neighbors(v).to_vec()).collect();
        let (degree, girth) = regular_girth(&adj)?;
        Some(ClosedFormFamily::TreeLike { degree, girth })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedFormFamily::Torus { .. } => "torus",
            ClosedFormFamily::DoubledTorus { .. } => "doubled-torus",
            ClosedFormFamily::TreeLike { .. } => "tree-like",
            ClosedFormFamily::DoubledTreeLike { .. } => "doubled-tree-like",
            ClosedFormFamily::Hypercube { .. } => "hypercube",
        }
    }

    /// Largest size inside the validity window.
    pub fn max_s(&self) -> usize {
        match *self {
            ClosedFormFamily::Torus { m, n } => torus_window(m, n),
            ClosedFormFamily::DoubledTorus { m, n } => doubled_torus_window(m, n),
            ClosedFormFamily::TreeLike { girth, .. } => (girth - 1) / 2,
            ClosedFormFamily::DoubledTreeLike { girth, .. } => girth.saturating_sub(2),
            ClosedFormFamily::Hypercube { dim } => 1usize << (dim - 1),
        }
    }

    /// The closed-form value of `Δ(s)`; sizes outside the window are refused.
    pub fn delta(&self, s: usize) -> Result<i64> {
        let max = self.max_s();
        if s > max {
            return Err(Error::InvalidParameter(format!(
                "size {s} is outside the {} validity window 0..={max}",
                self.name()
            )));
        }
        if s == 0 {
            return Ok(0);
        }
        Ok(match *self {
            ClosedFormFamily::Torus { .. } => torus_delta(s),
            ClosedFormFamily::DoubledTorus { .. } => doubled_torus_delta(s),
            ClosedFormFamily::TreeLike { degree, .. } => (degree as i64 - 2) * s as i64 + 1,
            ClosedFormFamily::DoubledTreeLike { degree, .. } => {
                (degree as i64 - 2) * s as i64 + 2
            }
            ClosedFormFamily::Hypercube { dim } => hypercube_delta(dim - 1, s as u128)?,
        })
    }

    pub fn profile(&self, s_max: usize) -> Result<IsoperimetricProfile> {
        let values = (0..=s_max).map(|s| self.delta(s)).collect::<Result<Vec<_>>>()?;
        Ok(IsoperimetricProfile::from_values(
            &values,
            Provenance::ClosedForm(self.name()),
        ))
    }

    /// Closed-form profile over the whole window.
    pub fn full_profile(&self) -> IsoperimetricProfile {
        self.profile(self.max_s()).expect("window sizes are valid")
    }
}
