//! Textual graph family descriptors such as `torus:6x6` or `doubled(cycle:5)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::family::*;
use super::{BipartiteGraph, SimpleGraph};
use crate::error::{Error, Result};

const MAX_NESTING: usize = 4;

/// A graph family together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    /// `complete:MxN`
    CompleteBipartite { m: usize, n: usize },
    /// `cycle:L`
    Cycle { len: usize },
    /// `path:S` with `S` sites
    Path { sites: usize },
    /// `ladder:L` for `Z_L x Z_2`
    Ladder { len: usize },
    /// `torus:MxN`
    Torus { m: usize, n: usize },
    /// `hypercube:D`
    Hypercube { d: usize },
    /// `clique:N`, only meaningful as a doubling base
    Clique { n: usize },
    /// `random:NUxNV:P:SEED`
    Random { nu: usize, nv: usize, p: f64, seed: u64 },
    /// `doubled(BASE)`
    Doubled(Box<GraphSpec>),
}

impl Eq for GraphSpec {}

impl GraphSpec {
    /// Build the bipartite graph. Non-doubled families must be bipartite themselves.
    pub fn build(&self) -> Result<BipartiteGraph> {
        match self {
            GraphSpec::CompleteBipartite { m, n } => complete_bipartite(*m, *n),
            GraphSpec::Cycle { len } => even_cycle(*len),
            GraphSpec::Path { sites } => path(*sites),
            GraphSpec::Ladder { len } => cyclic_ladder(*len),
            GraphSpec::Torus { m, n } => even_torus(*m, *n),
            GraphSpec::Hypercube { d } => hypercube(*d),
            GraphSpec::Clique { n } => Err(Error::InvalidParameter(format!(
                "clique:{n} is not bipartite; use doubled(clique:{n})"
            ))),
            GraphSpec::Random { nu, nv, p, seed } => random_bipartite(*nu, *nv, *p, *seed),
            GraphSpec::Doubled(base) => {
                Ok(double_graph(&base.build_simple()?)?.with_spec(self.clone()))
            }
        }
    }

    /// Build the underlying simple graph, used as a doubling base.
    pub fn build_simple(&self) -> Result<SimpleGraph> {
        match self {
            GraphSpec::Cycle { len } => simple_cycle(*len),
            GraphSpec::Path { sites } => simple_path(*sites),
            GraphSpec::Torus { m, n } => simple_torus(*m, *n),
            GraphSpec::Hypercube { d } => simple_hypercube(*d),
            GraphSpec::Clique { n } => simple_complete(*n),
            other => Ok(other.build()?.to_simple()),
        }
    }

    fn parse_depth(s: &str, depth: usize) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("bad graph spec {s:?}: {why}"));
        if depth > MAX_NESTING {
            return Err(bad("nesting too deep"));
        }
        let t: String = s.trim().to_ascii_lowercase();
        if let Some(rest) = t.strip_prefix("doubled(") {
            let inner = rest.strip_suffix(')').ok_or_else(|| bad("missing ')'"))?;
            return Ok(GraphSpec::Doubled(Box::new(Self::parse_depth(
                inner,
                depth + 1,
            )?)));
        }
        let (kind, args) = t.split_once(':').ok_or_else(|| bad("expected KIND:ARGS"))?;
        let num = |x: &str| -> Result<usize> {
            let x = x.trim();
            if x.is_empty() || x.len() > 6 || !x.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad("expected a small non-negative integer"));
            }
            x.parse().map_err(|_| bad("integer out of range"))
        };
        let pair = |x: &str| -> Result<(usize, usize)> {
            let (a, b) = x.split_once('x').ok_or_else(|| bad("expected AxB"))?;
            Ok((num(a)?, num(b)?))
        };
        Ok(match kind.trim() {
            "complete" => {
                let (m, n) = pair(args)?;
                GraphSpec::CompleteBipartite { m, n }
            }
            "cycle" => GraphSpec::Cycle { len: num(args)? },
            "path" => GraphSpec::Path { sites: num(args)? },
            "ladder" => GraphSpec::Ladder { len: num(args)? },
            "torus" => {
                let (m, n) = pair(args)?;
                GraphSpec::Torus { m, n }
            }
            "hypercube" => GraphSpec::Hypercube { d: num(args)? },
            "clique" => GraphSpec::Clique { n: num(args)? },
            "random" => {
                let parts: Vec<&str> = args.split(':').collect();
                if parts.len() != 3 {
                    return Err(bad("expected random:NUxNV:P:SEED"));
                }
                let (nu, nv) = pair(parts[0])?;
                let p: f64 = parts[1].trim().parse().map_err(|_| bad("bad probability"))?;
                if !p.is_finite() {
                    return Err(bad("bad probability"));
                }
                let seed: u64 = parts[2].trim().parse().map_err(|_| bad("bad seed"))?;
                GraphSpec::Random { nu, nv, p, seed }
            }
            _ => return Err(bad("unknown family")),
        })
    }
}

impl FromStr for GraphSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.len() > 256 {
            return Err(Error::Parse("graph spec too long".into()));
        }
        Self::parse_depth(s, 0)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::CompleteBipartite { m, n } => write!(f, "complete:{m}x{n}"),
            GraphSpec::Cycle { len } => write!(f, "cycle:{len}"),
            GraphSpec::Path { sites } => write!(f, "path:{sites}"),
            GraphSpec::Ladder { len } => write!(f, "ladder:{len}"),
            GraphSpec::Torus { m, n } => write!(f, "torus:{m}x{n}"),
            GraphSpec::Hypercube { d } => write!(f, "hypercube:{d}"),
            GraphSpec::Clique { n } => write!(f, "clique:{n}"),
            GraphSpec::Random { nu, nv, p, seed } => write!(f, "random:{nu}x{nv}:{p}:{seed}"),
            GraphSpec::Doubled(b) => write!(f, "doubled({b})"),
        }
    }
}

impl Serialize for GraphSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GraphSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_normalises() {
        let g: GraphSpec = " Torus:6X6 ".parse().unwrap();
        assert_eq!(g, GraphSpec::Torus { m: 6, n: 6 });
        assert_eq!(g.to_string(), "torus:6x6");
        let d: GraphSpec = "doubled(torus:5x5)".parse().unwrap();
        assert_eq!(d.to_string(), "doubled(torus:5x5)");
        let b = d.build().unwrap();
        assert_eq!((b.n_u(), b.n_v()), (25, 25));
        assert_eq!(b.validate().regular_degree, Some(5));
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "torus", "torus:6", "torus:ax6", "doubled(torus:5x5", "foo:1", "random:3x3:0.5"] {
            assert!(s.parse::<GraphSpec>().is_err(), "{s}");
        }
        assert!("torus:5x5".parse::<GraphSpec>().unwrap().build().is_err());
        assert!("clique:3".parse::<GraphSpec>().unwrap().build().is_err());
        assert!("doubled(clique:3)".parse::<GraphSpec>().unwrap().build().is_ok());
    }

    fn arb_spec() -> impl Strategy<Value = GraphSpec> {
        let leaf = prop_oneof![
            (1usize..9, 1usize..9).prop_map(|(m, n)| GraphSpec::CompleteBipartite { m, n }),
            (3usize..20).prop_map(|len| GraphSpec::Cycle { len }),
            (1usize..20).prop_map(|sites| GraphSpec::Path { sites }),
            (3usize..20).prop_map(|len| GraphSpec::Ladder { len }),
            (3usize..9, 3usize..9).prop_map(|(m, n)| GraphSpec::Torus { m, n }),
            (0usize..6).prop_map(|d| GraphSpec::Hypercube { d }),
            (1usize..6).prop_map(|n| GraphSpec::Clique { n }),
            (1usize..6, 1usize..6, 0.05f64..1.0, any::<u64>())
                .prop_map(|(nu, nv, p, seed)| GraphSpec::Random { nu, nv, p, seed }),
        ];
        leaf.prop_recursive(2, 4, 1, |inner| inner.prop_map(|b| GraphSpec::Doubled(Box::new(b))))
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(spec in arb_spec()) {
            let text = spec.to_string();
            let back: GraphSpec = text.parse().unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn parse_never_panics(s in "[a-z():x0-9. ]{0,40}") {
            if let Ok(spec) = s.parse::<GraphSpec>() {
                let _ = spec.build();
            }
        }
    }
}
