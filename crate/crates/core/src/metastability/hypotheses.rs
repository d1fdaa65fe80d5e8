//! Checking the hypotheses H0–H3, H4' and H5' on a given graph and profile.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::critical::{analyze_profile, CriticalAnalysis};
use super::gate::{build_gate, CriticalGate};
use super::traps::{no_trap_certificate, NoTrapReport, NoTrapStatus};
use crate::configspace::ConfigurationSpace;
use crate::exponent::{fmt_rational, Alpha, Rational};
use crate::graph::{BipartiteGraph, GraphSpec};
use crate::isoperimetry::{
    cost_unchecked, find_numbering, grow_progression, harper_v_sites, sites_in, spiral_numbering,
    ClosedFormFamily, IsoperimetricProfile, SearchOutcome, SiteSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Verified,
    Refuted,
    ExhaustedBudget,
    /// Established by the structure of a known graph family.
    ClosedForm,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisResult {
    pub status: HypothesisStatus,
    pub evidence: String,
}

impl HypothesisResult {
    fn new(status: HypothesisStatus, evidence: impl Into<String>) -> Self {
        HypothesisResult {
            status,
            evidence: evidence.into(),
        }
    }

    fn decide(ok: bool, evidence: impl Into<String>) -> Self {
        let status = if ok {
            HypothesisStatus::Verified
        } else {
            HypothesisStatus::Refuted
        };
        Self::new(status, evidence)
    }

    pub fn holds(&self) -> bool {
        matches!(
            self.status,
            HypothesisStatus::Verified | HypothesisStatus::ClosedForm
        )
    }
}

/// Work limits for the search-based checks.
#[derive(Clone, Copy, Debug)]
pub struct HypothesisBudgets {
    /// Node budget of each progression or numbering search.
    pub search: u64,
    /// Largest configuration space on which the no-trap certificate is run.
    pub state_cap: usize,
    /// Largest `|V|` for the exhaustive H4(d) probe.
    pub probe_max_v: usize,
}

impl Default for HypothesisBudgets {
    fn default() -> Self {
        HypothesisBudgets {
            search: 1_000_000,
            state_cap: 20_000,
            probe_max_v: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub alpha: Alpha,
    pub kappa: usize,
    pub s_star: Option<usize>,
    pub s_tilde: Option<usize>,
    pub h0: HypothesisResult,
    pub h1: HypothesisResult,
    pub h2: HypothesisResult,
    pub h3: HypothesisResult,
    pub h4a: HypothesisResult,
    pub h4b: HypothesisResult,
    pub h4c: HypothesisResult,
    pub h5a: HypothesisResult,
    pub h5b: HypothesisResult,
    /// Exhaustive check of the mandatory passage through `𝒜 → ℬ`, on tiny graphs.
    pub h4d_probe: Option<HypothesisResult>,
    pub no_trap: Option<NoTrapReport>,
    pub flags: Vec<String>,
}

impl HypothesisReport {
    pub fn entries(&self) -> Vec<(&'static str, &HypothesisResult)> {
        vec![
            ("H0", &self.h0),
            ("H1", &self.h1),
            ("H2", &self.h2),
            ("H3", &self.h3),
            ("H4'(a)", &self.h4a),
            ("H4'(b)", &self.h4b),
            ("H4'(c)", &self.h4c),
            ("H5'(a)", &self.h5a),
            ("H5'(b)", &self.h5b),
        ]
    }

    /// H0–H5' all verified or established in closed form.
    pub fn all_hold(&self) -> bool {
        self.entries().iter().all(|(_, r)| r.holds())
    }
}

/// Families whose automorphism group acts transitively on V.
fn v_transitive(spec: Option<&GraphSpec>) -> bool {
    match spec {
        Some(GraphSpec::CompleteBipartite { .. })
        | Some(GraphSpec::Cycle { .. })
        | Some(GraphSpec::Ladder { .. })
        | Some(GraphSpec::Torus { .. })
        | Some(GraphSpec::Hypercube { .. }) => true,
        Some(GraphSpec::Doubled(base)) => matches!(
            **base,
            GraphSpec::Cycle { .. }
                | GraphSpec::Torus { .. }
                | GraphSpec::Hypercube { .. }
                | GraphSpec::Clique { .. }
        ),
        _ => false,
    }
}

fn fmt_sites(sites: &[usize]) -> String {
    let v: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
    format!("[{}]", v.join(","))
}

fn fmt_set(a: SiteSet) -> String {
    fmt_sites(&sites_in(a))
}

/// All optimal sets of sizes `lo..=hi`, when the profile holds them completely.
fn optimal_layers(profile: &IsoperimetricProfile, lo: usize, hi: usize) -> Option<HashSet<SiteSet>> {
    let mut out = HashSet::new();
    for s in lo..=hi {
        if s == 0 {
            out.insert(0);
            continue;
        }
        out.extend(profile.complete_witnesses(s)?.iter().copied());
    }
    Some(out)
}

/// Sets of `nodes` reachable from `sources` by single-element changes inside `nodes`.
fn reach(g: &BipartiteGraph, nodes: &HashSet<SiteSet>, sources: &[SiteSet]) -> HashSet<SiteSet> {
    let vmask: SiteSet = g.v_sites().fold(0, |m, x| m | 1u128 << x);
    let mut seen: HashSet<SiteSet> = HashSet::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if nodes.contains(&s) && seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(a) = queue.pop_front() {
        let mut rest = vmask;
        while rest != 0 {
            let b = rest & rest.wrapping_neg();
            rest ^= b;
            let n = a ^ b;
            if nodes.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn numbering_h1(
    g: &BipartiteGraph,
    family: Option<ClosedFormFamily>,
    profile: &IsoperimetricProfile,
    s_tilde: usize,
    budget: u64,
) -> (HypothesisResult, Option<Vec<usize>>) {
    match family {
        Some(f @ ClosedFormFamily::Torus { .. }) if s_tilde <= f.max_s() => {
            let a = g.v_sites().next().unwrap_or(0);
            if let Ok(num) = spiral_numbering(g, a, s_tilde) {
                return (
                    HypothesisResult::new(
                        HypothesisStatus::ClosedForm,
                        format!("spiral numbering {}", fmt_sites(&num)),
                    ),
                    Some(num),
                );
            }
        }
        Some(ClosedFormFamily::Hypercube { .. }) => {
            if let Ok(num) = harper_v_sites(g, s_tilde) {
                return (
                    HypothesisResult::new(
                        HypothesisStatus::ClosedForm,
                        format!("Harper numbering {}", fmt_sites(&num)),
                    ),
                    Some(num),
                );
            }
        }
        _ => {}
    }
    match find_numbering(g, None, s_tilde, |s| profile.delta(s), budget) {
        Ok(SearchOutcome::Found(num)) => (
            HypothesisResult::new(
                HypothesisStatus::Verified,
                format!("isoperimetric numbering {}", fmt_sites(&num)),
            ),
            Some(num),
        ),
        Ok(SearchOutcome::NotFound) => (
            HypothesisResult::new(
                HypothesisStatus::Refuted,
                format!("no nested optimal chain reaches size {s_tilde} from any site"),
            ),
            None,
        ),
        Ok(SearchOutcome::BudgetExhausted) => (
            HypothesisResult::new(
                HypothesisStatus::ExhaustedBudget,
                format!("numbering search exceeded {budget} nodes"),
            ),
            None,
        ),
        Err(e) => (
            HypothesisResult::new(HypothesisStatus::ExhaustedBudget, e.to_string()),
            None,
        ),
    }
}

fn numbering_h2(
    g: &BipartiteGraph,
    family: Option<ClosedFormFamily>,
    profile: &IsoperimetricProfile,
    s_tilde: usize,
    h1: &(HypothesisResult, Option<Vec<usize>>),
    budget: u64,
) -> HypothesisResult {
    if let Some(f @ ClosedFormFamily::Torus { .. }) = family {
        if s_tilde <= f.max_s()
            && g.v_sites().all(|a| spiral_numbering(g, a, s_tilde).is_ok())
        {
            return HypothesisResult::new(
                HypothesisStatus::ClosedForm,
                "spiral numbering from every site of V",
            );
        }
    }
    if v_transitive(g.spec()) {
        if let Some(num) = &h1.1 {
            return HypothesisResult::new(
                HypothesisStatus::ClosedForm,
                format!(
                    "numbering {} carried to every site by the symmetry of the family",
                    fmt_sites(num)
                ),
            );
        }
    }
    let mut exhausted = None;
    for a in g.v_sites() {
        match find_numbering(g, Some(a), s_tilde, |s| profile.delta(s), budget) {
            Ok(SearchOutcome::Found(_)) => {}
            Ok(SearchOutcome::NotFound) => {
                return HypothesisResult::new(
                    HypothesisStatus::Refuted,
                    format!("no isoperimetric numbering of length {s_tilde} starts at site {a}"),
                )
            }
            Ok(SearchOutcome::BudgetExhausted) | Err(_) => exhausted = exhausted.or(Some(a)),
        }
    }
    match exhausted {
        Some(a) => HypothesisResult::new(
            HypothesisStatus::ExhaustedBudget,
            format!("numbering search from site {a} exceeded {budget} nodes"),
        ),
        None => HypothesisResult::new(
            HypothesisStatus::Verified,
            format!("isoperimetric numbering of length {s_tilde} found from every site of V"),
        ),
    }
}

fn lattice_family(family: Option<ClosedFormFamily>, sizes_up_to: usize) -> bool {
    match family {
        Some(f @ ClosedFormFamily::Torus { .. }) | Some(f @ ClosedFormFamily::DoubledTorus { .. }) => {
            sizes_up_to <= f.max_s()
        }
        _ => false,
    }
}

fn check_h5a(
    g: &BipartiteGraph,
    family: Option<ClosedFormFamily>,
    profile: &IsoperimetricProfile,
    s: usize,
) -> HypothesisResult {
    if let (Some(layers), Some(fam_a)) = (
        optimal_layers(profile, 0, s - 1),
        profile.complete_witnesses(s - 1).map(|w| w.to_vec()).or_else(|| (s == 1).then(|| vec![0])),
    ) {
        let r = reach(g, &layers, &[0]);
        return match fam_a.iter().find(|a| !r.contains(a)) {
            None => HypothesisResult::new(
                HypothesisStatus::Verified,
                format!("all {} sets of 𝒜 reachable from ∅ through optimal sets of size ≤ {}", fam_a.len(), s - 1),
            ),
            Some(&a) => HypothesisResult::new(
                HypothesisStatus::Refuted,
                format!("𝒜 member {} is not reachable from ∅", fmt_set(a)),
            ),
        };
    }
    if lattice_family(family, s - 1) {
        return HypothesisResult::new(
            HypothesisStatus::ClosedForm,
            "nested numberings through the lattice Pareto sets",
        );
    }
    HypothesisResult::new(
        HypothesisStatus::ExhaustedBudget,
        format!("optimal sets of sizes ≤ {} are not completely enumerated", s - 1),
    )
}

fn check_h5b(
    g: &BipartiteGraph,
    family: Option<ClosedFormFamily>,
    profile: &IsoperimetricProfile,
    a: &CriticalAnalysis,
    kappa: usize,
    budget: u64,
) -> HypothesisResult {
    let (s, t) = (a.s_star, a.s_tilde);
    let Some(fam_c) = profile.complete_witnesses(s + kappa) else {
        if lattice_family(family, t) {
            return HypothesisResult::new(
                HypothesisStatus::ClosedForm,
                "nested numberings through the lattice Pareto sets",
            );
        }
        return HypothesisResult::new(
            HypothesisStatus::ExhaustedBudget,
            format!("optimal sets of size {} are not completely enumerated", s + kappa),
        );
    };
    if s + kappa >= t {
        return HypothesisResult::new(
            HypothesisStatus::Verified,
            format!("every set of 𝒞 already has size {} ≥ s̃", s + kappa),
        );
    }
    let mut pending = Vec::new();
    let mut exhausted = false;
    for &c in fam_c {
        match grow_progression(g, c, t, |x| profile.delta(x), budget) {
            Ok(SearchOutcome::Found(_)) => {}
            Ok(SearchOutcome::BudgetExhausted) => {
                exhausted = true;
                pending.push(c);
            }
            _ => pending.push(c),
        }
    }
    if pending.is_empty() {
        return HypothesisResult::new(
            HypothesisStatus::Verified,
            format!("nested isoperimetric growth to size {t} from all {} sets of 𝒞", fam_c.len()),
        );
    }
    if let Some(layers) = optimal_layers(profile, s, t) {
        let targets: Vec<SiteSet> = layers.iter().copied().filter(|x| x.count_ones() as usize == t).collect();
        let r = reach(g, &layers, &targets);
        return match pending.iter().find(|c| !r.contains(c)) {
            None => HypothesisResult::new(
                HypothesisStatus::Verified,
                format!("all {} sets of 𝒞 connect to size {t} through optimal sets of size ≥ {s}", fam_c.len()),
            ),
            Some(&c) => HypothesisResult::new(
                HypothesisStatus::Refuted,
                format!("𝒞 member {} does not connect to size {t}", fmt_set(c)),
            ),
        };
    }
    if lattice_family(family, t) {
        return HypothesisResult::new(
            HypothesisStatus::ClosedForm,
            "nested numberings through the lattice Pareto sets",
        );
    }
    let why = if exhausted { "search budget exhausted" } else { "no nested growth" };
    HypothesisResult::new(
        HypothesisStatus::ExhaustedBudget,
        format!("{why} from {} and the optimal layers are incomplete", fmt_set(pending[0])),
    )
}

/// Every α-bounded progression from `∅` to a non-empty set with `Δ(A) ≤ α|A|`
/// passes a step `A ∈ 𝒜 → B ∈ ℬ`; decided by search over all subsets of V.
pub fn h4d_probe(g: &BipartiteGraph, analysis: &CriticalAnalysis, gate: &CriticalGate) -> HypothesisResult {
    let nv = g.n_v();
    let alpha = analysis.alpha.value();
    let bound = Rational::from_integer(analysis.delta_star)
        - alpha * Rational::from_integer(analysis.s_star as i64);
    let level = |a: SiteSet| {
        Rational::from_integer(cost_unchecked(g, a)) - alpha * Rational::from_integer(a.count_ones() as i64)
    };
    let banned: HashSet<(SiteSet, SiteSet)> = gate.pairs.iter().copied().collect();
    let sites: Vec<usize> = g.v_sites().collect();
    let mut parent: HashMap<SiteSet, SiteSet> = HashMap::new();
    let mut queue = VecDeque::new();
    if level(0) > bound {
        return HypothesisResult::new(HypothesisStatus::Verified, "∅ itself is not α-bounded");
    }
    parent.insert(0, 0);
    queue.push_back(0u128);
    while let Some(a) = queue.pop_front() {
        if a != 0 && level(a) <= Rational::from_integer(0) {
            let mut path = vec![a];
            let mut c = a;
            while c != 0 {
                c = parent[&c];
                path.push(c);
            }
            path.reverse();
            let shown: Vec<String> = path.iter().map(|&x| fmt_set(x)).collect();
            return HypothesisResult::new(
                HypothesisStatus::Refuted,
                format!("α-bounded progression avoiding the gate: {}", shown.join(" -> ")),
            );
        }
        for &x in &sites {
            let b = a ^ (1u128 << x);
            if parent.contains_key(&b) || banned.contains(&(a, b)) || level(b) > bound {
                continue;
            }
            parent.insert(b, a);
            queue.push_back(b);
        }
    }
    HypothesisResult::new(
        HypothesisStatus::Verified,
        format!(
            "all {} α-bounded sets reachable from ∅ without a gate step checked over |V| = {nv}",
            parent.len()
        ),
    )
}

/// Check H0–H5' for `g` at `α` against the given profile.
pub fn check_hypotheses(
    g: &BipartiteGraph,
    alpha: Alpha,
    profile: &IsoperimetricProfile,
    kappa: Option<usize>,
    budgets: HypothesisBudgets,
) -> HypothesisReport {
    let kappa = kappa.unwrap_or_else(|| alpha.default_kappa());
    let (nu, nv) = (g.n_u() as i64, g.n_v() as i64);
    let h0_ok = Rational::from_integer(nu) < (Rational::from_integer(1) + alpha.value()) * Rational::from_integer(nv);
    let h0 = HypothesisResult::decide(
        h0_ok,
        format!("|U| = {nu}, (1+α)|V| = {}", fmt_rational((Rational::from_integer(1) + alpha.value()) * Rational::from_integer(nv))),
    );
    let family = ClosedFormFamily::detect(g);
    let mut flags = Vec::new();

    let no_trap = ConfigurationSpace::enumerate(g, budgets.state_cap)
        .ok()
        .and_then(|space| no_trap_certificate(&space, alpha).ok());
    if let Some(r) = &no_trap {
        match r.status {
            NoTrapStatus::Refuted => flags.push("absence of traps is not satisfied".to_string()),
            NoTrapStatus::Inconclusive => {
                flags.push("absence of traps is inconclusive: exponent tie at this alpha".to_string())
            }
            NoTrapStatus::Certified => {}
        }
    }

    let analysis = match analyze_profile(profile, alpha, Some(g.n_u()), family) {
        Ok(a) => a,
        Err(e) => {
            let complete = profile.max_s() >= g.n_v();
            let status = if complete {
                HypothesisStatus::Refuted
            } else {
                HypothesisStatus::ExhaustedBudget
            };
            let r = HypothesisResult::new(status, e.to_string());
            return HypothesisReport {
                alpha,
                kappa,
                s_star: None,
                s_tilde: None,
                h0,
                h1: r.clone(),
                h2: r.clone(),
                h3: r.clone(),
                h4a: r.clone(),
                h4b: r.clone(),
                h4c: r.clone(),
                h5a: r.clone(),
                h5b: r,
                h4d_probe: None,
                no_trap,
                flags,
            };
        }
    };
    let (s, t) = (analysis.s_star, analysis.s_tilde);
    let provenance = profile
        .entries
        .first()
        .map(|e| e.provenance.to_string())
        .unwrap_or_default();

    let h1_full = numbering_h1(g, family, profile, t, budgets.search);
    let h2 = numbering_h2(g, family, profile, t, &h1_full, budgets.search);
    let h1 = h1_full.0.clone();

    let h3 = if analysis.unique_max {
        HypothesisResult::new(
            HypothesisStatus::Verified,
            format!("s* = {s} is the unique maximiser of g on 0..={t} ({provenance})"),
        )
    } else {
        flags.push(format!("tied maximisers {:?}", analysis.maximizers));
        HypothesisResult::new(
            HypothesisStatus::Refuted,
            format!("tied maximisers of g on 0..={t}: {:?}", analysis.maximizers),
        )
    };

    let d = |x: usize| profile.delta(x);
    let missing = |x: usize| {
        HypothesisResult::new(
            HypothesisStatus::ExhaustedBudget,
            format!("profile does not cover size {x}"),
        )
    };
    let h4a = match (d(s + kappa), kappa.checked_sub(1).map(|k| d(s + k))) {
        (Some(x), Some(Some(y))) => HypothesisResult::decide(x >= y, format!("Δ({}) = {x}, Δ({}) = {y}", s + kappa, s + kappa - 1)),
        (Some(x), None) => {
            // κ = 0: compare with Δ(s* - 1)
            match d(s - 1) {
                Some(y) => HypothesisResult::decide(x >= y, format!("Δ({s}) = {x}, Δ({}) = {y}", s - 1)),
                None => missing(s - 1),
            }
        }
        (None, _) => missing(s + kappa),
        (_, Some(None)) => missing(s + kappa - 1),
    };
    let h4b = {
        let mut res = HypothesisResult::new(HypothesisStatus::Verified, format!("Δ(s*+i) ≥ Δ(s*) = {} for 0 ≤ i < {kappa}", analysis.delta_star));
        for i in 0..kappa {
            match d(s + i) {
                Some(x) if x < analysis.delta_star => {
                    res = HypothesisResult::new(HypothesisStatus::Refuted, format!("Δ({}) = {x} < Δ(s*) = {}", s + i, analysis.delta_star));
                    break;
                }
                Some(_) => {}
                None => {
                    res = missing(s + i);
                    break;
                }
            }
        }
        res
    };
    let h4c = match d(s - 1) {
        Some(y) => HypothesisResult::decide(
            analysis.delta_star == y + 1,
            format!("Δ({s}) = {}, Δ({}) = {y}", analysis.delta_star, s - 1),
        ),
        None => missing(s - 1),
    };

    let h5a = check_h5a(g, family, profile, s.max(1));
    let h5b = check_h5b(g, family, profile, &analysis, kappa, budgets.search);

    let h4d_probe = if g.n_v() <= budgets.probe_max_v {
        build_gate(g, &analysis, Some(kappa), profile)
            .ok()
            .map(|gate| h4d_probe(g, &analysis, &gate))
    } else {
        None
    };

    HypothesisReport {
        alpha,
        kappa,
        s_star: Some(s),
        s_tilde: Some(t),
        h0,
        h1,
        h2,
        h3,
        h4a,
        h4b,
        h4c,
        h5a,
        h5b,
        h4d_probe,
        no_trap,
        flags,
    }
}
