//! Hard-core configurations (independent sets) of a bipartite graph.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{Alpha, AsymptoticExponent, Rational};
use crate::graph::BipartiteGraph;

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUMERATION_CAP: usize = 5_000_000;

/// A configuration, stored as a bitmask over site ids.
pub type Config = u128;

/// Fugacities `λ` on U and `λ̄` on V.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub lambda_u: f64,
    pub lambda_v: f64,
}

impl Rates {
    pub fn new(lambda_u: f64, lambda_v: f64) -> Result<Self> {
        for (name, x) in [("lambda", lambda_u), ("lambda_bar", lambda_v)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {x}"
                )));
            }
        }
        Ok(Rates { lambda_u, lambda_v })
    }

    pub fn for_site(&self, g: &BipartiteGraph, site: usize) -> f64 {
        if g.is_u(site) {
            self.lambda_u
        } else {
            self.lambda_v
        }
    }

    /// `γ = (1+λ)|U| + (1+λ̄)|V|`.
    pub fn gamma(&self, g: &BipartiteGraph) -> f64 {
        (1.0 + self.lambda_u) * g.n_u() as f64 + (1.0 + self.lambda_v) * g.n_v() as f64
    }

    /// Unnormalised log weight of a configuration.
    pub fn log_weight(&self, g: &BipartiteGraph, x: Config) -> f64 {
        let (nu, nv) = part_counts(g, x);
        nu as f64 * self.lambda_u.ln() + nv as f64 * self.lambda_v.ln()
    }
}

/// The model parameters `λ` and `α`, with `λ̄ = λ^{1+α}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub alpha: Alpha,
}

impl ModelParams {
    pub fn new(lambda: f64, alpha: Alpha) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and greater than 1, got {lambda}"
            )));
        }
        Ok(ModelParams { lambda, alpha })
    }

    pub fn lambda_bar(&self) -> f64 {
        self.alpha.lambda_bar(self.lambda)
    }

    pub fn rates(&self) -> Rates {
        Rates {
            lambda_u: self.lambda,
            lambda_v: self.lambda_bar(),
        }
    }
}

pub fn u_mask(g: &BipartiteGraph) -> Config {
    mask_of(g.u_sites())
}

pub fn v_mask(g: &BipartiteGraph) -> Config {
    mask_of(g.v_sites())
}

pub fn mask_of(sites: impl IntoIterator<Item = usize>) -> Config {
    sites.into_iter().fold(0, |m, s| m | 1u128 << s)
}

pub fn sites_of(x: Config) -> Vec<usize> {
    let mut out = Vec::with_capacity(x.count_ones() as usize);
    let mut m = x;
    while m != 0 {
        let s = m.trailing_zeros() as usize;
        out.push(s);
        m &= m - 1;
    }
    out
}

/// Number of particles on U and on V.
pub fn part_counts(g: &BipartiteGraph, x: Config) -> (usize, usize) {
    let um = u_mask(g);
    ((x & um).count_ones() as usize, (x & !um).count_ones() as usize)
}

/// Whether `x` is an independent set of `g`.
pub fn is_independent(g: &BipartiteGraph, x: Config) -> bool {
    if g.n_sites() < 128 && x >> g.n_sites() != 0 {
        return false;
    }
    sites_of(x & u_mask(g))
        .into_iter()
        .all(|u| g.neighbor_mask(u) & x == 0)
}

/// Whether site `s` may be occupied in `x` without violating exclusion.
pub fn can_occupy(g: &BipartiteGraph, x: Config, s: usize) -> bool {
    g.neighbor_mask(s) & x == 0
}

/// Height `H(x) = -|x_U| - (1+α)|x_V|`.
pub fn height(g: &BipartiteGraph, x: Config, alpha: Alpha) -> Rational {
    -weight_exponent(g, x).value(alpha)
}

/// Order of the unnormalised weight, `λ^{|x_U| + (1+α)|x_V|}`.
pub fn weight_exponent(g: &BipartiteGraph, x: Config) -> AsymptoticExponent {
    let (nu, nv) = part_counts(g, x);
    AsymptoticExponent::weight(nu, nv)
}

/// `|U| - |x|`.
pub fn config_cost(g: &BipartiteGraph, x: Config) -> i64 {
    g.n_u() as i64 - x.count_ones() as i64
}

/// Partial order: `x ⊑ y` iff `x_U ⊇ y_U` and `x_V ⊆ y_V`.
pub fn precedes(g: &BipartiteGraph, x: Config, y: Config) -> bool {
    let um = u_mask(g);
    let vm = v_mask(g);
    (y & um) & !(x & um) == 0 && (x & vm) & !(y & vm) == 0
}

/// Least upper bound: union on V, intersection on U.
pub fn join(g: &BipartiteGraph, x: Config, y: Config) -> Config {
    let um = u_mask(g);
    let vm = v_mask(g);
    (x & y & um) | ((x | y) & vm)
}

/// Greatest lower bound: union on U, intersection on V.
pub fn meet(g: &BipartiteGraph, x: Config, y: Config) -> Config {
    let um = u_mask(g);
    let vm = v_mask(g);
    ((x | y) & um) | (x & y & vm)
}

/// JSON form of a configuration: hex bitmask plus the occupied sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub hex: String,
    pub sites: Vec<usize>,
}

pub fn config_to_json(x: Config) -> ConfigJson {
    ConfigJson {
        hex: format!("{x:#x}"),
        sites: sites_of(x),
    }
}

/// Parse a hex bitmask such as `0x15` (the prefix is optional).
pub fn parse_config_hex(s: &str) -> Result<Config> {
    let t = s.trim();
    let body = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .unwrap_or(t);
    if body.is_empty() || body.len() > 32 || !body.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::Parse(format!("not a hex configuration: {s:?}")));
    }
    u128::from_str_radix(body, 16).map_err(|e| Error::Parse(e.to_string()))
}

/// Parse a configuration given either as a hex bitmask or as `u`, `v`, or a
/// comma separated list of site ids, and check it against the graph.
pub fn parse_config(g: &BipartiteGraph, s: &str) -> Result<Config> {
    let t = s.trim();
    let x = match t {
        "u" => u_mask(g),
        "v" => v_mask(g),
        "" | "empty" => 0,
        _ if t.starts_with("0x") || t.starts_with("0X") => parse_config_hex(t)?,
        _ => {
            let mut m = 0u128;
            for part in t.split(',') {
                let site: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad site id {part:?}")))?;
                if site >= g.n_sites() {
                    return Err(Error::InvalidParameter(format!("site {site} out of range")));
                }
                m |= 1u128 << site;
            }
            m
        }
    };
    if !is_independent(g, x) {
        return Err(Error::InvalidParameter(format!(
            "configuration {x:#x} is not an independent set of the graph"
        )));
    }
    Ok(x)
}

/// Exact number of independent sets, `Σ_{A ⊆ V} 2^{|U \ N(A)|}`, iterating
/// over the smaller part. Returns `None` if both parts exceed 26 sites.
pub fn count_independent_sets(g: &BipartiteGraph) -> Option<u128> {
    let (small, other_count): (Vec<usize>, usize) = if g.n_v() <= g.n_u() {
        (g.v_sites().collect(), g.n_u())
    } else {
        (g.u_sites().collect(), g.n_v())
    };
    if small.len() > 26 {
        return None;
    }
    let masks: Vec<u128> = small.iter().map(|&s| g.neighbor_mask(s)).collect();
    // Gray-code walk over subsets of the small part, tracking multiplicities.
    let mut cover = vec![0u32; g.n_sites()];
    let mut covered = 0usize;
    let pow = |k: usize| -> u128 {
        if k >= 128 {
            u128::MAX
        } else {
            1u128 << k
        }
    };
    let mut total: u128 = pow(other_count);
    let mut in_set = vec![false; small.len()];
    for i in 1u64..(1u64 << small.len()) {
        let bit = i.trailing_zeros() as usize;
        let nb = sites_of(masks[bit]);
        if in_set[bit] {
            for s in nb {
                cover[s] -= 1;
                if cover[s] == 0 {
                    covered -= 1;
                }
            }
        } else {
            for s in nb {
                if cover[s] == 0 {
                    covered += 1;
                }
                cover[s] += 1;
            }
        }
        in_set[bit] = !in_set[bit];
        total = total.saturating_add(pow(other_count - covered));
    }
    Some(total)
}

/// Estimate the number of independent sets by sampling subsets of V.
pub fn estimate_independent_sets(g: &BipartiteGraph, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<usize> = g.v_sites().collect();
    let mut acc = 0.0;
    for _ in 0..samples {
        let mut cov = 0u128;
        for &v in &vs {
            if rng.random::<bool>() {
                cov |= g.neighbor_mask(v);
            }
        }
        acc += 2f64.powi((g.n_u() - cov.count_ones() as usize) as i32);
    }
    acc / samples as f64 * 2f64.powi(vs.len() as i32)
}

/// The enumerated configuration space, in increasing bitmask order.
#[derive(Clone, Debug)]
pub struct ConfigurationSpace {
    graph: BipartiteGraph,
    states: Vec<Config>,
    index: HashMap<Config, usize>,
}

impl ConfigurationSpace {
    /// Enumerate all independent sets, refusing when more than `cap` exist.
    pub fn enumerate(graph: &BipartiteGraph, cap: usize) -> Result<Self> {
        let n = graph.n_sites();
        let lower: Vec<u128> = (0..n)
            .map(|s| graph.neighbor_mask(s) & ((1u128 << s) - 1))
            .collect();
        let mut states = Vec::new();
        // Iterative DFS: decide sites in increasing order.
        let mut stack: Vec<(usize, Config)> = vec![(0, 0)];
        while let Some((site, x)) = stack.pop() {
            if site == n {
                states.push(x);
                if states.len() > cap {
                    let estimate = count_independent_sets(graph).unwrap_or_else(|| {
                        estimate_independent_sets(graph, 20_000, 0) as u128
                    });
                    return Err(Error::CapExceeded {
                        what: "configuration enumeration".into(),
                        estimate,
                        cap: cap as u128,
                    });
                }
                continue;
            }
            stack.push((site + 1, x));
            if lower[site] & x == 0 {
                stack.push((site + 1, x | 1u128 << site));
            }
        }
        states.sort_unstable();
        let index = states.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        Ok(ConfigurationSpace {
            graph: graph.clone(),
            states,
            index,
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> Config {
        self.states[i]
    }

    pub fn states(&self) -> &[Config] {
        &self.states
    }

    pub fn index_of(&self, x: Config) -> Option<usize> {
        self.index.get(&x).copied()
    }

    /// Index of `u`, all of U occupied.
    pub fn u_index(&self) -> usize {
        self.index[&u_mask(&self.graph)]
    }

    /// Index of `v`, all of V occupied.
    pub fn v_index(&self) -> usize {
        self.index[&v_mask(&self.graph)]
    }

    /// Configurations reachable by flipping one site, as `(site, index)` pairs.
    pub fn flips(&self, i: usize) -> Vec<(usize, usize)> {
        let x = self.states[i];
        let mut out = Vec::new();
        for s in 0..self.graph.n_sites() {
            let bit = 1u128 << s;
            let y = if x & bit != 0 {
                x & !bit
            } else if can_occupy(&self.graph, x, s) {
                x | bit
            } else {
                continue;
            };
            out.push((s, self.index[&y]));
        }
        out
    }

    pub fn height(&self, i: usize, alpha: Alpha) -> Rational {
        height(&self.graph, self.states[i], alpha)
    }

    pub fn weight_exponent(&self, i: usize) -> AsymptoticExponent {
        weight_exponent(&self.graph, self.states[i])
    }

    /// Normalised log stationary weights.
    pub fn log_pi(&self, rates: &Rates) -> Vec<f64> {
        let w: Vec<f64> = self
            .states
            .iter()
            .map(|&x| rates.log_weight(&self.graph, x))
            .collect();
        let lz = log_sum_exp(&w);
        w.into_iter().map(|v| v - lz).collect()
    }

    /// Stationary probabilities, normalised in log space.
    pub fn pi(&self, rates: &Rates) -> Vec<f64> {
        self.log_pi(rates).into_iter().map(f64::exp).collect()
    }
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, even_cycle, even_torus, random_bipartite};
    use proptest::prelude::*;

    /// Independent oracle: test every subset.
    fn count_by_subsets(g: &BipartiteGraph) -> usize {
        (0u128..1 << g.n_sites())
            .filter(|&x| is_independent(g, x))
            .count()
    }

    #[test]
    fn small_counts() {
        let c6 = even_cycle(6).unwrap();
        assert_eq!(ConfigurationSpace::enumerate(&c6, 100).unwrap().len(), 18);
        let k23 = complete_bipartite(2, 3).unwrap();
        assert_eq!(ConfigurationSpace::enumerate(&k23, 100).unwrap().len(), 11);
        let k11 = complete_bipartite(1, 1).unwrap();
        assert_eq!(ConfigurationSpace::enumerate(&k11, 100).unwrap().len(), 3);
        assert_eq!(count_independent_sets(&c6), Some(18));
    }

    #[test]
    fn cap_refusal_reports_estimate() {
        let t = even_torus(4, 4).unwrap();
        match ConfigurationSpace::enumerate(&t, 100) {
            Err(Error::CapExceeded { estimate, cap, .. }) => {
                assert_eq!(cap, 100);
                assert_eq!(estimate, count_by_subsets(&t) as u128);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn weights_and_heights() {
        let k23 = complete_bipartite(2, 3).unwrap();
        let rates = Rates::new(10.0, 10f64.powf(1.5)).unwrap();
        let v = v_mask(&k23);
        assert!((rates.log_weight(&k23, v) - 10f64.powf(4.5).ln()).abs() < 1e-12);
        let t = even_torus(6, 6).unwrap();
        let a = Alpha::new(7, 10).unwrap();
        assert_eq!(height(&t, u_mask(&t), a), Rational::from_integer(-18));
        assert_eq!(height(&t, v_mask(&t), a), Rational::new(-306, 10));
    }

    #[test]
    fn parse_config_forms() {
        let c6 = even_cycle(6).unwrap();
        assert_eq!(parse_config(&c6, "u").unwrap(), 0b000111);
        assert_eq!(parse_config(&c6, "0x38").unwrap(), 0b111000);
        assert_eq!(parse_config(&c6, "0,3").unwrap_err().exit_code(), 2);
        assert_eq!(parse_config(&c6, "3").unwrap(), 0b1000);
        assert!(parse_config(&c6, "0xzz").is_err());
        let j = config_to_json(0b101);
        assert_eq!(j.hex, "0x5");
        assert_eq!(j.sites, vec![0, 2]);
        assert_eq!(parse_config_hex(&j.hex).unwrap(), 0b101);
    }

    proptest! {
        #[test]
        fn enumeration_matches_oracles(nu in 1usize..7, nv in 1usize..7, p in 0.2f64..1.0, seed in 0u64..1000) {
            if let Ok(g) = random_bipartite(nu, nv, p, seed) {
                let space = ConfigurationSpace::enumerate(&g, 1 << 20).unwrap();
                prop_assert_eq!(space.len(), count_by_subsets(&g));
                prop_assert_eq!(space.len() as u128, count_independent_sets(&g).unwrap());
                prop_assert!(space.states().windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn lattice_laws(seed in 0u64..500, i in 0usize..1000, j in 0usize..1000) {
            let g = random_bipartite(4, 5, 0.5, seed).unwrap();
            let space = ConfigurationSpace::enumerate(&g, 1 << 20).unwrap();
            let x = space.state(i % space.len());
            let y = space.state(j % space.len());
            let (jn, mt) = (join(&g, x, y), meet(&g, x, y));
            prop_assert!(is_independent(&g, jn) && is_independent(&g, mt));
            prop_assert!(precedes(&g, x, jn) && precedes(&g, y, jn));
            prop_assert!(precedes(&g, mt, x) && precedes(&g, mt, y));
            prop_assert!(precedes(&g, u_mask(&g), x) && precedes(&g, x, v_mask(&g)));
            // π(x∨y) π(x∧y) = π(x) π(y) in exponent form.
            prop_assert_eq!(
                weight_exponent(&g, jn) + weight_exponent(&g, mt),
                weight_exponent(&g, x) + weight_exponent(&g, y)
            );
        }

        #[test]
        fn hex_parse_never_panics(s in "\\PC{0,40}") {
            let _ = parse_config_hex(&s);
        }
    }
}
