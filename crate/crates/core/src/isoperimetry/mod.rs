//! The bipartite isoperimetric problem.
//!
//! For `A ⊆ V` the cost is `Δ(A) = |N(A)| - |A|` and `Δ(s)` is its minimum over
//! sets of size `s`. Sets are bitmasks over site ids, so V-sets use the ids
//! `n_u..n_u + n_v` of the graph.

mod closed;
mod numbering;

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponent::{Alpha, Rational};
use crate::graph::BipartiteGraph;

pub use closed::{
    doubled_torus_delta, hypercube_delta, hypercube_psi, torus_delta, ClosedFormFamily,
};
pub use numbering::{
    harper_numbering, harper_order, harper_v_sites, hypercube_vertex_boundary, inflate,
    lattice_classes, obs_progressions, seed_set, spiral_numbering, torus_edge_boundary,
    ConnectingProgression, LatticeClasses, SeedSet, SeedType,
};

/// A subset of sites as a bitmask over site ids.
pub type SiteSet = u128;

/// Default number of subset evaluations allowed in a brute-force profile.
pub const DEFAULT_BUDGET: u128 = 10_000_000;
/// Default number of optimal sets retained per size.
pub const DEFAULT_WITNESS_CAP: usize = 10_000;

fn v_mask(g: &BipartiteGraph) -> SiteSet {
    g.v_sites().fold(0, |m, s| m | 1u128 << s)
}

fn check_v_subset(g: &BipartiteGraph, a: SiteSet) -> Result<()> {
    if a & !v_mask(g) != 0 {
        return Err(Error::InvalidParameter(format!(
            "set {a:#x} is not contained in V"
        )));
    }
    Ok(())
}

pub(crate) fn nbhd(g: &BipartiteGraph, a: SiteSet) -> SiteSet {
    let mut out = 0;
    let mut rest = a;
    while rest != 0 {
        let s = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= g.neighbor_mask(s);
    }
    out
}

pub(crate) fn cost_unchecked(g: &BipartiteGraph, a: SiteSet) -> i64 {
    nbhd(g, a).count_ones() as i64 - a.count_ones() as i64
}

/// `N(A)`, the U-sites adjacent to some element of `A ⊆ V`.
pub fn neighborhood(g: &BipartiteGraph, a: SiteSet) -> Result<SiteSet> {
    check_v_subset(g, a)?;
    Ok(nbhd(g, a))
}

/// `Δ(A) = |N(A)| - |A|`.
pub fn set_cost(g: &BipartiteGraph, a: SiteSet) -> Result<i64> {
    check_v_subset(g, a)?;
    Ok(cost_unchecked(g, a))
}

pub fn set_of(sites: impl IntoIterator<Item = usize>) -> SiteSet {
    sites.into_iter().fold(0, |m, s| m | 1u128 << s)
}

pub fn sites_in(a: SiteSet) -> Vec<usize> {
    (0..128).filter(|&s| a >> s & 1 == 1).collect()
}

/// Where a profile value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    BruteForce,
    ClosedForm(&'static str),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::BruteForce => write!(f, "brute-force"),
            Provenance::ClosedForm(name) => write!(f, "closed-form:{name}"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileEntry {
    pub s: usize,
    pub delta: i64,
    pub provenance: Provenance,
    /// Exact number of optimal sets, when known.
    pub witness_count: Option<u64>,
    /// True when fewer witnesses are retained than exist.
    pub truncated: bool,
    #[serde(skip)]
    pub witnesses: Vec<SiteSet>,
}

/// One CSV row of a profile.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub s: usize,
    pub delta: i64,
    pub provenance: String,
    pub witness_count: Option<u64>,
}

/// Optimal costs `Δ(0), Δ(1), ...` up to some size.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IsoperimetricProfile {
    pub entries: Vec<ProfileEntry>,
}

impl IsoperimetricProfile {
    pub fn from_values(values: &[i64], provenance: Provenance) -> Self {
        IsoperimetricProfile {
            entries: values
                .iter()
                .enumerate()
                .map(|(s, &delta)| ProfileEntry {
                    s,
                    delta,
                    provenance,
                    witness_count: None,
                    truncated: false,
                    witnesses: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn delta(&self, s: usize) -> Option<i64> {
        self.entries.get(s).map(|e| e.delta)
    }

    pub fn values(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.delta).collect()
    }

    /// Largest size covered.
    pub fn max_s(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    /// All optimal sets of size `s`, if the enumeration was complete.
    pub fn complete_witnesses(&self, s: usize) -> Option<&[SiteSet]> {
        let e = self.entries.get(s)?;
        (e.witness_count.is_some() && !e.truncated).then_some(&e.witnesses[..])
    }

    pub fn rows(&self) -> Vec<ProfileRow> {
        self.entries
            .iter()
            .map(|e| ProfileRow {
                s: e.s,
                delta: e.delta,
                provenance: e.provenance.to_string(),
                witness_count: e.witness_count,
            })
            .collect()
    }

    /// True when `a` is optimal for its size according to this profile.
    pub fn is_optimal(&self, g: &BipartiteGraph, a: SiteSet) -> Option<bool> {
        self.delta(a.count_ones() as usize)
            .map(|d| cost_unchecked(g, a) == d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BruteForceOptions {
    pub budget: u128,
    pub witness_cap: usize,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            budget: DEFAULT_BUDGET,
            witness_cap: DEFAULT_WITNESS_CAP,
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// Number of subsets of an `n`-set with at most `s_max` elements.
pub fn subset_count(n: usize, s_max: usize) -> u128 {
    (0..=s_max.min(n)).fold(0u128, |t, s| t.saturating_add(binomial(n, s)))
}

pub fn brute_force_profile(g: &BipartiteGraph, s_max: usize) -> Result<IsoperimetricProfile> {
    brute_force_profile_with(g, s_max, BruteForceOptions::default())
}

struct Acc {
    best: Vec<i64>,
    count: Vec<u64>,
    wit: Vec<Vec<SiteSet>>,
}

impl Acc {
    fn new(len: usize) -> Self {
        Acc {
            best: vec![i64::MAX; len],
            count: vec![0; len],
            wit: vec![Vec::new(); len],
        }
    }

    fn record(&mut self, s: usize, d: i64, set: SiteSet, cap: usize) {
        if d < self.best[s] {
            self.best[s] = d;
            self.count[s] = 1;
            self.wit[s].clear();
            self.wit[s].push(set);
        } else if d == self.best[s] {
            self.count[s] += 1;
            if self.wit[s].len() < cap {
                self.wit[s].push(set);
            }
        }
    }

    fn merge(&mut self, o: Acc, cap: usize) {
        for s in 0..self.best.len() {
            if o.best[s] < self.best[s] {
                self.best[s] = o.best[s];
                self.count[s] = o.count[s];
                self.wit[s] = o.wit[s].clone();
                self.wit[s].truncate(cap);
            } else if o.best[s] == self.best[s] && o.count[s] > 0 {
                self.count[s] += o.count[s];
                let room = cap - self.wit[s].len().min(cap);
                self.wit[s].extend(o.wit[s].iter().take(room));
            }
        }
    }
}

/// Exact `Δ(s)` for `s ≤ s_max` by exhaustive enumeration of subsets of V,
/// keeping the optimal sets up to a per-size cap.
pub fn brute_force_profile_with(
    g: &BipartiteGraph,
    s_max: usize,
    opts: BruteForceOptions,
) -> Result<IsoperimetricProfile> {
    let n_v = g.n_v();
    if s_max > n_v {
        return Err(Error::InvalidParameter(format!(
            "s_max = {s_max} exceeds |V| = {n_v}"
        )));
    }
    let total = subset_count(n_v, s_max);
    if total > opts.budget {
        return Err(Error::CapExceeded {
            what: "brute-force isoperimetric profile".into(),
            estimate: total,
            cap: opts.budget,
        });
    }
    let vbit: Vec<SiteSet> = g.v_sites().map(|s| 1u128 << s).collect();
    let nm: Vec<SiteSet> = g.v_sites().map(|s| g.neighbor_mask(s)).collect();
    let cap = opts.witness_cap;

    fn dfs(
        vbit: &[SiteSet],
        nm: &[SiteSet],
        s_max: usize,
        cap: usize,
        start: usize,
        depth: usize,
        set: SiteSet,
        n: SiteSet,
        acc: &mut Acc,
    ) {
        acc.record(depth, n.count_ones() as i64 - depth as i64, set, cap);
        if depth == s_max {
            return;
        }
        for i in start..vbit.len() {
            dfs(vbit, nm, s_max, cap, i + 1, depth + 1, set | vbit[i], n | nm[i], acc);
        }
    }

    let shards: Vec<Acc> = (0..if s_max == 0 { 0 } else { n_v })
        .into_par_iter()
        .map(|first| {
            let mut acc = Acc::new(s_max + 1);
            dfs(&vbit, &nm, s_max, cap, first + 1, 1, vbit[first], nm[first], &mut acc);
            acc
        })
        .collect();
    let mut acc = Acc::new(s_max + 1);
    acc.record(0, 0, 0, cap);
    for sh in shards {
        acc.merge(sh, cap);
    }
    let entries = (0..=s_max)
        .map(|s| ProfileEntry {
            s,
            delta: acc.best[s],
            provenance: Provenance::BruteForce,
            witness_count: Some(acc.count[s]),
            truncated: (acc.wit[s].len() as u64) < acc.count[s],
            witnesses: std::mem::take(&mut acc.wit[s]),
        })
        .collect();
    Ok(IsoperimetricProfile { entries })
}

/// Flags of a sequence of V-sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProgressionFlags {
    /// Consecutive sets differ in exactly one element and all lie in V.
    pub valid: bool,
    pub nested: bool,
    /// Every member is optimal; `None` when a size is not covered by the profile.
    pub isoperimetric: Option<bool>,
    /// `Δ(A_i) - α|A_i| ≤ Δ(s*) - α s*` for all members; `None` without `Δ(s*)`.
    pub alpha_bounded: Option<bool>,
}

pub fn progression_check(
    g: &BipartiteGraph,
    prog: &[SiteSet],
    alpha: Alpha,
    s_star: usize,
    delta: impl Fn(usize) -> Option<i64>,
) -> ProgressionFlags {
    let vm = v_mask(g);
    let valid = !prog.is_empty()
        && prog.iter().all(|a| a & !vm == 0)
        && prog.windows(2).all(|w| (w[0] ^ w[1]).count_ones() == 1);
    let nested = prog.windows(2).all(|w| w[0] & !w[1] == 0);
    let isoperimetric = prog
        .iter()
        .map(|&a| delta(a.count_ones() as usize).map(|d| cost_unchecked(g, a) == d))
        .collect::<Option<Vec<bool>>>()
        .map(|v| v.iter().all(|&b| b));
    let a = alpha.value();
    let alpha_bounded = delta(s_star).map(|ds| {
        let bound = Rational::from_integer(ds) - a * Rational::from_integer(s_star as i64);
        prog.iter().all(|&x| {
            let c = Rational::from_integer(cost_unchecked(g, x))
                - a * Rational::from_integer(x.count_ones() as i64);
            c <= bound
        })
    });
    ProgressionFlags {
        valid,
        nested,
        isoperimetric,
        alpha_bounded,
    }
}

/// Prefix costs of a sequence of distinct V-sites.
pub fn numbering_prefix_costs(g: &BipartiteGraph, numbering: &[usize]) -> Result<Vec<i64>> {
    let mut a: SiteSet = 0;
    let mut out = Vec::with_capacity(numbering.len());
    for &s in numbering {
        if s >= g.n_sites() || g.is_u(s) {
            return Err(Error::InvalidParameter(format!("site {s} is not in V")));
        }
        if a >> s & 1 == 1 {
            return Err(Error::InvalidParameter(format!("site {s} repeated")));
        }
        a |= 1u128 << s;
        out.push(cost_unchecked(g, a));
    }
    Ok(out)
}

/// Prefix sets `{a_1}, {a_1, a_2}, ...` of a numbering, starting with `∅`.
pub fn numbering_prefixes(numbering: &[usize]) -> Vec<SiteSet> {
    let mut a = 0;
    let mut out = vec![0];
    for &s in numbering {
        a |= 1u128 << s;
        out.push(a);
    }
    out
}

/// Result of a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    NotFound,
    BudgetExhausted,
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

struct Grow<'a, F: Fn(usize) -> Option<i64>> {
    g: &'a BipartiteGraph,
    delta: F,
    budget: u64,
    used: u64,
    dead: HashSet<SiteSet>,
    exhausted: bool,
}

impl<F: Fn(usize) -> Option<i64>> Grow<'_, F> {
    /// Depth-first growth of `cur` by elements of `pool`, every set optimal,
    /// until `done(cur)`.
    fn run(
        &mut self,
        cur: SiteSet,
        pool: SiteSet,
        done: &dyn Fn(SiteSet) -> bool,
        path: &mut Vec<SiteSet>,
    ) -> bool {
        if done(cur) {
            return true;
        }
        if self.dead.contains(&cur) {
            return false;
        }
        self.used += 1;
        if self.used > self.budget {
            self.exhausted = true;
            return false;
        }
        let want = match (self.delta)(cur.count_ones() as usize + 1) {
            Some(d) => d,
            None => return false,
        };
        let mut rest = pool & !cur;
        while rest != 0 {
            let s = rest.trailing_zeros();
            rest &= rest - 1;
            let next = cur | 1u128 << s;
            if cost_unchecked(self.g, next) == want {
                path.push(next);
                if self.run(next, pool, done, path) {
                    return true;
                }
                path.pop();
                if self.exhausted {
                    return false;
                }
            }
        }
        self.dead.insert(cur);
        false
    }
}

fn grow_search(
    g: &BipartiteGraph,
    from: SiteSet,
    pool: SiteSet,
    done: &dyn Fn(SiteSet) -> bool,
    delta: impl Fn(usize) -> Option<i64>,
    budget: u64,
) -> SearchOutcome<Vec<SiteSet>> {
    match delta(from.count_ones() as usize) {
        Some(d) if cost_unchecked(g, from) == d => {}
        _ => return SearchOutcome::NotFound,
    }
    let mut st = Grow {
        g,
        delta,
        budget,
        used: 0,
        dead: HashSet::new(),
        exhausted: false,
    };
    let mut path = vec![from];
    if st.run(from, pool, done, &mut path) {
        SearchOutcome::Found(path)
    } else if st.exhausted {
        SearchOutcome::BudgetExhausted
    } else {
        SearchOutcome::NotFound
    }
}

/// A nested isoperimetric progression from `from` to `to ⊇ from`.
pub fn nested_progression(
    g: &BipartiteGraph,
    from: SiteSet,
    to: SiteSet,
    delta: impl Fn(usize) -> Option<i64>,
    budget: u64,
) -> Result<SearchOutcome<Vec<SiteSet>>> {
    check_v_subset(g, to)?;
    if from & !to != 0 {
        return Err(Error::InvalidParameter("progression endpoints are not nested".into()));
    }
    Ok(grow_search(g, from, to, &|a| a == to, delta, budget))
}

/// A nested isoperimetric progression from `from` to some set of size `target`.
pub fn grow_progression(
    g: &BipartiteGraph,
    from: SiteSet,
    target: usize,
    delta: impl Fn(usize) -> Option<i64>,
    budget: u64,
) -> Result<SearchOutcome<Vec<SiteSet>>> {
    check_v_subset(g, from)?;
    if target > g.n_v() {
        return Err(Error::InvalidParameter(format!(
            "target size {target} exceeds |V|"
        )));
    }
    Ok(grow_search(
        g,
        from,
        v_mask(g),
        &|a| a.count_ones() as usize >= target,
        delta,
        budget,
    ))
}

/// An isoperimetric numbering of the given length, starting at `start` when given.
pub fn find_numbering(
    g: &BipartiteGraph,
    start: Option<usize>,
    length: usize,
    delta: impl Fn(usize) -> Option<i64> + Copy,
    budget: u64,
) -> Result<SearchOutcome<Vec<usize>>> {
    let starts: Vec<usize> = match start {
        Some(a) if g.v_sites().contains(&a) => vec![a],
        Some(a) => return Err(Error::InvalidParameter(format!("site {a} is not in V"))),
        None => g.v_sites().collect(),
    };
    if length == 0 {
        return Ok(SearchOutcome::Found(Vec::new()));
    }
    let mut exhausted = false;
    for a in starts {
        match grow_progression(g, 1u128 << a, length, delta, budget)? {
            SearchOutcome::Found(path) => {
                let mut out = vec![a];
                for w in path.windows(2) {
                    out.push((w[1] ^ w[0]).trailing_zeros() as usize);
                }
                return Ok(SearchOutcome::Found(out));
            }
            SearchOutcome::BudgetExhausted => exhausted = true,
            SearchOutcome::NotFound => {}
        }
    }
    Ok(if exhausted {
        SearchOutcome::BudgetExhausted
    } else {
        SearchOutcome::NotFound
    })
}

#[cfg(test)]
mod tests;
