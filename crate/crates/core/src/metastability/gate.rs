//! The families `𝒜`, `ℬ`, `𝒞`, the critical gate `[Q, Q*]`, crossover
//! predictions and gate statistics.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Serialize, Serializer};

use super::critical::CriticalAnalysis;
use crate::configspace::{u_mask, Config, ConfigurationSpace};
use crate::dynamics::{GateWatch, HittingSample};
use crate::error::{Error, Result};
use crate::exponent::{Alpha, AsymptoticExponent, Rational};
use crate::graph::{BipartiteGraph, GraphSpec, TorusLayout};
use crate::isoperimetry::{nbhd, IsoperimetricProfile, SiteSet};
use crate::stats::chi_square_uniform;

fn ser_sets<S: Serializer>(sets: &[SiteSet], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(sets.len()))?;
    for &a in sets {
        seq.serialize_element(&crate::isoperimetry::sites_in(a))?;
    }
    seq.end()
}

fn ser_pairs<S: Serializer>(pairs: &[(Config, Config)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pairs.len()))?;
    for &(x, y) in pairs {
        seq.serialize_element(&(format!("{x:#x}"), format!("{y:#x}")))?;
    }
    seq.end()
}

/// Critical gate `[Q, Q*]` built from the optimal sets around `s*`.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalGate {
    pub s_star: usize,
    pub kappa: usize,
    #[serde(serialize_with = "ser_sets")]
    pub family_a: Vec<SiteSet>,
    #[serde(serialize_with = "ser_sets")]
    pub family_b: Vec<SiteSet>,
    #[serde(serialize_with = "ser_sets")]
    pub family_c: Vec<SiteSet>,
    /// Pairs `(A, B)` with `A ∈ 𝒜`, `B ∈ ℬ`, `|B \ A| = 1`.
    #[serde(skip)]
    pub pairs: Vec<(SiteSet, SiteSet)>,
    /// Transitions `(x, y)`, `x ∈ Q`, `y ∈ Q*`, as configuration bitmasks.
    #[serde(serialize_with = "ser_pairs")]
    pub transitions: Vec<(Config, Config)>,
    /// `Σ |N(B) \ N(A)|` over the pairs.
    pub count: u64,
    /// Result of comparing the families with the torus characterisation, when applicable.
    pub torus_characterization: Option<bool>,
    /// Set for families whose gate description rests on an unproven statement.
    pub label: Option<&'static str>,
}

impl CriticalGate {
    /// Gate transitions as directed `(x, y)` state indices of `space`.
    pub fn watch(&self, space: &ConfigurationSpace) -> Result<GateWatch> {
        let transitions = self
            .transitions
            .iter()
            .map(|&(x, y)| match (space.index_of(x), space.index_of(y)) {
                (Some(i), Some(j)) => Ok((i, j)),
                _ => Err(Error::InvalidParameter(
                    "gate configuration missing from the configuration space".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GateWatch { transitions })
    }
}

fn witnesses<'a>(profile: &'a IsoperimetricProfile, s: usize) -> Result<&'a [SiteSet]> {
    profile.complete_witnesses(s).ok_or_else(|| {
        Error::Precondition(format!(
            "the optimal sets of size {s} are not completely enumerated"
        ))
    })
}

/// Build `𝒜`, `ℬ`, `𝒞` and `[Q, Q*]`.
///
/// `𝒜` and `𝒞` are the optimal sets of sizes `s* - 1` and `s* + κ`; `B ∈ ℬ`
/// when some isoperimetric progression `B_0 ∈ 𝒜, B_1 = B, ..., B_n ∈ 𝒞` keeps
/// its interior sizes in `[s*, s* + κ - 1]`. The profile must hold all optimal
/// sets of sizes `s* - 1, ..., s* + κ`.
pub fn build_gate(
    g: &BipartiteGraph,
    analysis: &CriticalAnalysis,
    kappa: Option<usize>,
    profile: &IsoperimetricProfile,
) -> Result<CriticalGate> {
    let s = analysis.s_star;
    let kappa = kappa.unwrap_or_else(|| analysis.default_kappa());
    if Rational::from_integer(kappa as i64) * analysis.alpha.value() >= Rational::from_integer(1) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} must satisfy kappa < 1/alpha"
        )));
    }
    for size in s - 1..=s + kappa {
        match (profile.delta(size), analysis.delta(size)) {
            (Some(p), Some(a)) if p != a => {
                return Err(Error::Precondition(format!(
                    "profile value Δ({size}) = {p} disagrees with the analysis value {a}"
                )))
            }
            (None, _) => {
                return Err(Error::Precondition(format!(
                    "profile does not cover size {size}"
                )))
            }
            _ => {}
        }
    }
    let fam_a: Vec<SiteSet> = witnesses(profile, s - 1)?.to_vec();
    let fam_c: Vec<SiteSet> = witnesses(profile, s + kappa)?.to_vec();
    let set_a: HashSet<SiteSet> = fam_a.iter().copied().collect();
    let set_c: HashSet<SiteSet> = fam_c.iter().copied().collect();

    // Middle layer: optimal sets of sizes s*, ..., s*+κ-1 connected to 𝒞.
    let good: HashSet<SiteSet> = if kappa == 0 {
        set_c.clone()
    } else {
        let mut middle: HashSet<SiteSet> = HashSet::new();
        for size in s..s + kappa {
            middle.extend(witnesses(profile, size)?.iter().copied());
        }
        let mut good = HashSet::new();
        let mut queue = VecDeque::new();
        for &c in &fam_c {
            let mut rest = c;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                rest ^= b;
                let m = c ^ b;
                if middle.contains(&m) && good.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        let vmask: SiteSet = g.v_sites().fold(0, |m, x| m | 1u128 << x);
        while let Some(m) = queue.pop_front() {
            let mut rest = vmask;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                rest ^= b;
                let n = m ^ b;
                if middle.contains(&n) && good.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        good
    };

    let mut fam_b: Vec<SiteSet> = good
        .iter()
        .copied()
        .filter(|&b| b.count_ones() as usize == s)
        .filter(|&b| {
            let mut rest = b;
            while rest != 0 {
                let x = rest & rest.wrapping_neg();
                rest ^= x;
                if set_a.contains(&(b ^ x)) {
                    return true;
                }
            }
            false
        })
        .collect();
    fam_b.sort_unstable();

    let umask = u_mask(g);
    let mut pairs = Vec::new();
    let mut count = 0u64;
    let mut transitions = Vec::new();
    let mut seen = HashSet::new();
    for &b in &fam_b {
        let nb = nbhd(g, b);
        let mut rest = b;
        while rest != 0 {
            let x = rest & rest.wrapping_neg();
            rest ^= x;
            let a = b ^ x;
            if !set_a.contains(&a) {
                continue;
            }
            pairs.push((a, b));
            let fresh = nb & !nbhd(g, a);
            count += fresh.count_ones() as u64;
            let y: Config = a | (umask & !nb);
            let mut r = fresh;
            while r != 0 {
                let j = r & r.wrapping_neg();
                r ^= j;
                let xcfg = y | j;
                if seen.insert((xcfg, y)) {
                    transitions.push((xcfg, y));
                }
            }
        }
    }
    pairs.sort_unstable();
    transitions.sort_unstable();

    let torus_characterization = torus_characterization(g, analysis, kappa, &fam_a, &fam_b);
    let label = match g.spec() {
        Some(GraphSpec::Doubled(base)) if matches!(**base, GraphSpec::Torus { .. }) => {
            Some("conditional-on-conjecture")
        }
        _ => None,
    };
    let mut fam_a = fam_a;
    let mut fam_c = fam_c;
    fam_a.sort_unstable();
    fam_c.sort_unstable();
    Ok(CriticalGate {
        s_star: s,
        kappa,
        family_a: fam_a,
        family_b: fam_b,
        family_c: fam_c,
        pairs,
        transitions,
        count,
        torus_characterization,
        label,
    })
}

/// Tilted `(ℓ-1) × ℓ` rectangles, and those rectangles plus one site beyond
/// one of the two longer sides, in both orientations and at every position.
pub fn torus_gate_families(m: usize, n: usize, l: usize) -> (HashSet<SiteSet>, HashSet<SiteSet>) {
    let layout = TorusLayout::new(m, n);
    let half = m * n / 2;
    let mut rects = HashSet::new();
    let mut ext = HashSet::new();
    for anchor in half..m * n {
        let (i0, j0) = layout.coord(anchor);
        let site = |a: i64, b: i64| layout.site(i0 as i64 + a + b, j0 as i64 + a - b);
        for (h, w) in [(l as i64 - 1, l as i64), (l as i64, l as i64 - 1)] {
            let mut r: SiteSet = 0;
            for a in 0..h {
                for b in 0..w {
                    r |= 1u128 << site(a, b);
                }
            }
            rects.insert(r);
            let extra: Vec<(i64, i64)> = if h < w {
                (0..w).flat_map(|b| [(-1, b), (h, b)]).collect()
            } else {
                (0..h).flat_map(|a| [(a, -1), (a, w)]).collect()
            };
            for (a, b) in extra {
                ext.insert(r | 1u128 << site(a, b));
            }
        }
    }
    (rects, ext)
}

fn torus_characterization(
    g: &BipartiteGraph,
    analysis: &CriticalAnalysis,
    kappa: usize,
    fam_a: &[SiteSet],
    fam_b: &[SiteSet],
) -> Option<bool> {
    let Some(GraphSpec::Torus { m, n }) = g.spec() else {
        return None;
    };
    let l = analysis.alpha.recip().ceil().to_integer() as usize;
    if l < 2 || analysis.s_star != l * (l - 1) + 1 || kappa != l - 1 {
        return None;
    }
    let (rects, ext) = torus_gate_families(*m, *n, l);
    let a: HashSet<SiteSet> = fam_a.iter().copied().collect();
    let b: HashSet<SiteSet> = fam_b.iter().copied().collect();
    Some(a == rects && b == ext)
}

/// Order of magnitude and sharp value of `E_u[T̂_v]`.
#[derive(Clone, Debug, Serialize)]
pub struct CrossoverPrediction {
    /// `λ^{Δ(s*)+s*-1} / λ̄^{s*-1}` as `λ^{p+qα}`.
    pub exponent: AsymptoticExponent,
    pub lambda_power: i64,
    pub lambda_bar_power: i64,
    /// `1 / |[Q, Q*]|`, when a gate is given.
    pub sharp_prefactor: Option<f64>,
    pub gate_count: Option<u64>,
    pub label: Option<&'static str>,
}

impl CrossoverPrediction {
    /// `prefactor · λ^{Δ(s*)+s*-1} / λ̄^{s*-1}` at a given `λ`.
    pub fn sharp_value(&self, lambda: f64, alpha: Alpha) -> Option<f64> {
        let c = self.sharp_prefactor?;
        let l = lambda.ln();
        let log = c.ln() + self.lambda_power as f64 * l
            - self.lambda_bar_power as f64 * (1.0 + alpha.as_f64()) * l;
        Some(log.exp())
    }

    /// `λ^{p+qα}` at a given `λ`.
    pub fn order_value(&self, lambda: f64, alpha: Alpha) -> f64 {
        lambda.powf(self.exponent.value_f64(alpha))
    }
}

pub fn crossover_prediction(analysis: &CriticalAnalysis, gate: Option<&CriticalGate>) -> CrossoverPrediction {
    let s = analysis.s_star as i64;
    let d = analysis.delta_star;
    CrossoverPrediction {
        exponent: AsymptoticExponent::new(d, -(s - 1)),
        lambda_power: d + s - 1,
        lambda_bar_power: s - 1,
        sharp_prefactor: gate.map(|g| 1.0 / g.count as f64),
        gate_count: gate.map(|g| g.count),
        label: gate.and_then(|g| g.label),
    }
}

/// Passage statistics of simulated trajectories through a watched gate.
#[derive(Clone, Debug, Serialize)]
pub struct GateStatistics {
    pub samples: usize,
    /// Trajectories with exactly one gate transition.
    pub single_crossing: usize,
    pub single_crossing_fraction: f64,
    /// Per-transition counts over single-crossing trajectories.
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn gate_statistics(samples: &[HittingSample], gate: &GateWatch) -> GateStatistics {
    let index: HashMap<(usize, usize), usize> = gate
        .transitions
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, i))
        .collect();
    let mut counts = vec![0u64; gate.transitions.len()];
    let mut single = 0;
    for s in samples {
        let hits: Vec<usize> = s
            .gate_events
            .iter()
            .filter_map(|t| index.get(t).copied())
            .collect();
        if hits.len() == 1 {
            single += 1;
            counts[hits[0]] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let frequencies = counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect();
    let chi = chi_square_uniform(&counts);
    GateStatistics {
        samples: samples.len(),
        single_crossing: single,
        single_crossing_fraction: if samples.is_empty() {
            0.0
        } else {
            single as f64 / samples.len() as f64
        },
        counts,
        frequencies,
        chi_square: chi.statistic,
        degrees_of_freedom: chi.degrees_of_freedom,
        p_value: chi.p_value,
    }
}

/// The three critical-pair conditions of a built gate, checked symbolically.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPairReport {
    /// Order of `Ψ(u, J(u))`.
    pub psi: AsymptoticExponent,
    /// (a): every gate transition has resistance of order `Ψ(u, J(u))`.
    pub transitions_critical: bool,
    /// (b): `Ψ(u, x) ≺ Ψ(u, J(u))` for every `x ∈ Q`.
    pub lower_side: bool,
    /// (c): `Ψ(y, J(u)) ≺ Ψ(u, J(u))` for every `y ∈ Q*`.
    pub upper_side: bool,
    pub failures: Vec<String>,
}

impl CriticalPairReport {
    pub fn holds(&self) -> bool {
        self.transitions_critical && self.lower_side && self.upper_side
    }
}

pub fn critical_pair_check(
    space: &ConfigurationSpace,
    gate: &CriticalGate,
    alpha: Alpha,
) -> Result<CriticalPairReport> {
    use crate::potential::{resistance_exponent, SymbolicNetwork};
    use std::cmp::Ordering;

    let net = SymbolicNetwork::new(space, alpha);
    let u = space.u_index();
    let (ju, _) = super::dominance_sets(space, u, alpha);
    let psi = net
        .bottleneck(&[u], &ju)
        .exponent
        .ok_or_else(|| Error::Precondition("J(u) is empty or unreachable".into()))?;
    let watch = gate.watch(space)?;
    let mut failures = Vec::new();
    let mut strictly_below = |from: usize, to: &[usize], what: &str| match net.bottleneck(&[from], to).exponent {
        Some(e) if e.cmp_value(&psi, alpha) == Ordering::Less => true,
        // a start inside the target has no resistance to overcome
        None if to.contains(&from) => true,
        e => {
            failures.push(format!("{what} {:#x}: {e:?}", space.state(from)));
            false
        }
    };
    let mut lower_side = true;
    let mut upper_side = true;
    let mut q: Vec<usize> = watch.transitions.iter().map(|t| t.0).collect();
    let mut q_star: Vec<usize> = watch.transitions.iter().map(|t| t.1).collect();
    q.sort_unstable();
    q.dedup();
    q_star.sort_unstable();
    q_star.dedup();
    for &x in &q {
        if x != u {
            lower_side &= strictly_below(u, &[x], "Ψ(u, x) for x in Q at");
        }
    }
    for &y in &q_star {
        if !ju.contains(&y) {
            upper_side &= strictly_below(y, &ju, "Ψ(y, J(u)) for y in Q* at");
        }
    }
    let mut transitions_critical = true;
    for &(x, y) in &watch.transitions {
        let r = resistance_exponent(space, x, y, alpha);
        if r.cmp_value(&psi, alpha) != Ordering::Equal {
            transitions_critical = false;
            failures.push(format!(
                "transition {:#x} -> {:#x} has order {r}",
                space.state(x),
                space.state(y)
            ));
        }
    }
    Ok(CriticalPairReport {
        psi,
        transitions_critical,
        lower_side,
        upper_side,
        failures,
    })
}
