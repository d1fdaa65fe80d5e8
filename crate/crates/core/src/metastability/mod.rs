//! Critical sizes, hypotheses, the critical gate and crossover predictions.
//!
//! Everything here is exact: heights and exponents are compared as rationals
//! in `α`, and the families `𝒜`, `ℬ`, `𝒞` are built from complete
//! enumerations of optimal sets.

mod critical;
mod gate;
mod hypotheses;
mod traps;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::isoperimetry::{
    brute_force_profile, subset_count, ClosedFormFamily, IsoperimetricProfile, DEFAULT_BUDGET,
};

pub use critical::{
    analyze_profile, critical_analysis, doubled_lattice_analysis, doubled_lattice_profile,
    doubled_lattice_search_bound, doubled_torus_critical_size, g_value, lattice_search_bound,
    lemma_agrees, square_lattice_analysis, square_lattice_profile, torus_critical_size,
    CriticalAnalysis, LemmaPrediction,
};
pub use gate::{
    build_gate, critical_pair_check, crossover_prediction, gate_statistics, torus_gate_families, CriticalGate,
    CriticalPairReport, CrossoverPrediction, GateStatistics,
};
pub use hypotheses::{
    check_hypotheses, h4d_probe, HypothesisBudgets, HypothesisReport, HypothesisResult,
    HypothesisStatus,
};
pub use traps::{
    dominance_sets, no_trap_certificate, progression_resistance_exponent, standard_path,
    NoTrapReport, NoTrapStatus, StandardPath, TrapWitness,
};

/// Where the values `Δ(s)` come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSource {
    /// Brute force as far as the default budget allows, closed form when that reaches further.
    Auto,
    BruteForce,
    ClosedForm,
}

impl FromStr for ProfileSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ProfileSource::Auto),
            "brute-force" => Ok(ProfileSource::BruteForce),
            "closed-form" => Ok(ProfileSource::ClosedForm),
            _ => Err(Error::Parse(format!(
                "unknown profile source '{s}' (expected auto, brute-force or closed-form)"
            ))),
        }
    }
}

impl fmt::Display for ProfileSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileSource::Auto => "auto",
            ProfileSource::BruteForce => "brute-force",
            ProfileSource::ClosedForm => "closed-form",
        })
    }
}

/// Profile of `g` up to `s_max` (default `|V|`) from the given source.
pub fn profile_for(
    g: &BipartiteGraph,
    s_max: Option<usize>,
    source: ProfileSource,
) -> Result<IsoperimetricProfile> {
    let nv = g.n_v();
    let want = s_max.unwrap_or(nv).min(nv);
    let closed = || -> Result<IsoperimetricProfile> {
        let fam = ClosedFormFamily::detect(g).ok_or_else(|| {
            Error::InvalidParameter("no closed form is known for this graph".into())
        })?;
        fam.profile(want.min(fam.max_s()))
    };
    match source {
        ProfileSource::BruteForce => brute_force_profile(g, want),
        ProfileSource::ClosedForm => closed(),
        ProfileSource::Auto => {
            let mut s = want;
            while s > 0 && subset_count(nv, s) > DEFAULT_BUDGET {
                s -= 1;
            }
            let reach = ClosedFormFamily::detect(g).map_or(0, |f| f.max_s().min(want));
            if reach > s {
                closed()
            } else {
                brute_force_profile(g, s)
            }
        }
    }
}

/// Profile and critical analysis of a graph.
pub fn analyze_graph(
    g: &BipartiteGraph,
    alpha: crate::exponent::Alpha,
    s_max: Option<usize>,
    source: ProfileSource,
) -> Result<(IsoperimetricProfile, CriticalAnalysis)> {
    let profile = profile_for(g, s_max, source)?;
    let analysis = analyze_profile(&profile, alpha, Some(g.n_u()), ClosedFormFamily::detect(g))?;
    Ok((profile, analysis))
}

#[cfg(test)]
mod tests;
