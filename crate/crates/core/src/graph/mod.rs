//! Bipartite graphs, standard families, and the doubling construction.

mod canon;
mod family;
mod spec;

pub use canon::{canonical_form, is_isomorphic};
pub use family::{
    complete_bipartite, cyclic_ladder, double_graph, even_cycle, even_torus, hypercube, path,
    random_bipartite, simple_complete, simple_cycle, simple_hypercube, simple_path, simple_torus,
    TorusLayout,
};
pub use spec::GraphSpec;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of sites supported by the configuration bitmask.
pub const MAX_SITES: usize = 128;

/// A finite simple undirected graph, used as input to [`double_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: &[(usize, usize)], labels: Option<Vec<String>>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self loop at {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidGraph(format!("parallel edges at vertex {v}")));
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(Error::InvalidGraph("label count mismatch".into()));
        }
        Ok(SimpleGraph { adj, labels })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            for &b in list {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// A bipartite graph whose sites are numbered with U first (`0..n_u`) and V after.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_u: usize,
    n_v: usize,
    adj: Vec<Vec<usize>>,
    labels: Vec<String>,
    spec: Option<GraphSpec>,
}

/// Plain JSON form of a bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub u_sites: Vec<usize>,
    pub v_sites: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

/// Structural facts reported by [`BipartiteGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphReport {
    pub n_u: usize,
    pub n_v: usize,
    pub n_edges: usize,
    pub connected: bool,
    pub regular_degree: Option<usize>,
    pub min_degree: usize,
    pub max_degree: usize,
    /// `None` for forests.
    pub girth: Option<usize>,
}

impl BipartiteGraph {
    /// Build from part sizes and U-V edges given in dense site ids.
    pub fn from_parts(n_u: usize, n_v: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n_u + n_v).map(|i| i.to_string()).collect();
        Self::from_parts_labeled(n_u, n_v, edges, labels)
    }

    pub fn from_parts_labeled(
        n_u: usize,
        n_v: usize,
        edges: &[(usize, usize)],
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = n_u + n_v;
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no sites".into()));
        }
        if n_u == 0 || n_v == 0 {
            return Err(Error::InvalidGraph("both parts must be non-empty".into()));
        }
        if n > MAX_SITES {
            return Err(Error::InvalidGraph(format!(
                "{n} sites exceeds the supported maximum of {MAX_SITES}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidGraph("label count mismatch".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) out of range")));
            }
            let (x, y) = if a < n_u { (a, b) } else { (b, a) };
            if x >= n_u || y < n_u {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) does not join U to V"
                )));
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::InvalidGraph(format!("parallel edges at site {v}")));
            }
        }
        Ok(BipartiteGraph {
            n_u,
            n_v,
            adj,
            labels,
            spec: None,
        })
    }

    pub(crate) fn with_spec(mut self, spec: GraphSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    /// The family this graph was built from, if any.
    pub fn spec(&self) -> Option<&GraphSpec> {
        self.spec.as_ref()
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_sites(&self) -> usize {
        self.n_u + self.n_v
    }

    pub fn u_sites(&self) -> std::ops::Range<usize> {
        0..self.n_u
    }

    pub fn v_sites(&self) -> std::ops::Range<usize> {
        self.n_u..self.n_u + self.n_v
    }

    pub fn is_u(&self, site: usize) -> bool {
        site < self.n_u
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adj[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.adj[site].len()
    }

    pub fn label(&self, site: usize) -> &str {
        &self.labels[site]
    }

    /// Edges as `(u, v)` pairs with `u` in U.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in self.u_sites() {
            for &v in &self.adj[u] {
                out.push((u, v));
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.adj[..self.n_u].iter().map(Vec::len).sum()
    }

    /// Neighbourhood of a V-site in U, as a bitmask over U-site ids.
    pub fn v_neighbor_mask(&self, v: usize) -> u128 {
        let mut m = 0u128;
        for &u in &self.adj[v] {
            m |= 1u128 << u;
        }
        m
    }

    /// Bitmask over all sites of the neighbourhood of `site`.
    pub fn neighbor_mask(&self, site: usize) -> u128 {
        let mut m = 0u128;
        for &u in &self.adj[site] {
            m |= 1u128 << u;
        }
        m
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            u_sites: self.u_sites().collect(),
            v_sites: self.v_sites().collect(),
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    /// Build from the JSON form. Site ids may be arbitrary; they are relabelled
    /// so that U comes first, preserving the listed order within each part.
    pub fn from_json(j: &GraphJson) -> Result<Self> {
        use std::collections::HashMap;
        let mut index: HashMap<usize, usize> = HashMap::new();
        for (k, &s) in j.u_sites.iter().chain(j.v_sites.iter()).enumerate() {
            if index.insert(s, k).is_some() {
                return Err(Error::InvalidGraph(format!("site {s} listed twice")));
            }
        }
        let mut edges = Vec::with_capacity(j.edges.len());
        for e in &j.edges {
            let a = *index
                .get(&e[0])
                .ok_or_else(|| Error::InvalidGraph(format!("unknown site {}", e[0])))?;
            let b = *index
                .get(&e[1])
                .ok_or_else(|| Error::InvalidGraph(format!("unknown site {}", e[1])))?;
            edges.push((a, b));
        }
        let labels = j
            .u_sites
            .iter()
            .chain(j.v_sites.iter())
            .map(|s| s.to_string())
            .collect();
        Self::from_parts_labeled(j.u_sites.len(), j.v_sites.len(), &edges, labels)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&j)
    }

    /// Forget the bipartition.
    pub fn to_simple(&self) -> SimpleGraph {
        SimpleGraph {
            adj: self.adj.clone(),
            labels: self.labels.clone(),
        }
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_sites();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    /// Length of a shortest cycle, or `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        girth_of(&self.adj)
    }

    pub fn validate(&self) -> GraphReport {
        let degrees: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let min_degree = degrees.iter().copied().min().unwrap_or(0);
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        GraphReport {
            n_u: self.n_u,
            n_v: self.n_v,
            n_edges: self.n_edges(),
            connected: self.is_connected(),
            regular_degree: (min_degree == max_degree).then_some(min_degree),
            min_degree,
            max_degree,
            girth: self.girth(),
        }
    }

    /// Require connectivity, as every analysis assumes it.
    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::InvalidGraph("graph is not connected".into()))
        }
    }
}

pub(crate) fn girth_of(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[x] + 1 >= b {
                    break;
                }
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                } else if parent[x] != y {
                    let len = dist[x] + dist[y] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_relabels_parts() {
        let j = GraphJson {
            u_sites: vec![10, 11],
            v_sites: vec![20, 21, 22],
            edges: vec![[10, 20], [21, 10], [11, 22]],
        };
        let g = BipartiteGraph::from_json(&j).unwrap();
        assert_eq!(g.n_u(), 2);
        assert_eq!(g.n_v(), 3);
        assert_eq!(g.neighbors(0), &[2, 3]);
        let back = BipartiteGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn rejects_edges_inside_a_part() {
        let err = BipartiteGraph::from_parts(2, 1, &[(0, 1)]).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn rejects_duplicate_sites_and_unknown_ids() {
        let j = GraphJson {
            u_sites: vec![1, 1],
            v_sites: vec![2],
            edges: vec![],
        };
        assert!(BipartiteGraph::from_json(&j).is_err());
        let j = GraphJson {
            u_sites: vec![1],
            v_sites: vec![2],
            edges: vec![[1, 3]],
        };
        assert!(BipartiteGraph::from_json(&j).is_err());
    }

    #[test]
    fn girth_of_small_graphs() {
        assert_eq!(even_cycle(6).unwrap().girth(), Some(6));
        assert_eq!(complete_bipartite(2, 3).unwrap().girth(), Some(4));
        assert_eq!(path(6).unwrap().girth(), None);
        assert_eq!(even_torus(4, 4).unwrap().girth(), Some(4));
    }
}
