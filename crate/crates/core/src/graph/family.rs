use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BipartiteGraph, GraphSpec, SimpleGraph, MAX_SITES};
use crate::error::{Error, Result};

fn check_size(n: usize) -> Result<()> {
    if n > MAX_SITES {
        Err(Error::InvalidGraph(format!(
            "{n} sites exceeds the supported maximum of {MAX_SITES}"
        )))
    } else {
        Ok(())
    }
}

/// Relabel a 2-coloured graph on `n` vertices so that the `is_u` class comes first.
/// Returns the graph and the map from original vertex to site id.
fn from_coloring(
    n: usize,
    edges: &[(usize, usize)],
    is_u: impl Fn(usize) -> bool,
    label: impl Fn(usize) -> String,
) -> Result<(BipartiteGraph, Vec<usize>)> {
    check_size(n)?;
    let mut site = vec![0usize; n];
    let n_u = (0..n).filter(|&x| is_u(x)).count();
    let (mut nu, mut nv) = (0, n_u);
    let mut labels = vec![String::new(); n];
    for x in 0..n {
        if is_u(x) {
            site[x] = nu;
            nu += 1;
        } else {
            site[x] = nv;
            nv += 1;
        }
        labels[site[x]] = label(x);
    }
    let mapped: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (site[a], site[b])).collect();
    let g = BipartiteGraph::from_parts_labeled(n_u, n - n_u, &mapped, labels)?;
    Ok((g, site))
}

/// Complete bipartite graph `K_{m,n}`.
pub fn complete_bipartite(m: usize, n: usize) -> Result<BipartiteGraph> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("K_{m,n} needs m, n >= 1".into()));
    }
    check_size(m + n)?;
    let mut edges = Vec::with_capacity(m * n);
    for u in 0..m {
        for v in 0..n {
            edges.push((u, m + v));
        }
    }
    Ok(BipartiteGraph::from_parts(m, n, &edges)?.with_spec(GraphSpec::CompleteBipartite { m, n }))
}

/// Even cycle `Z_len`, with U the even positions.
pub fn even_cycle(len: usize) -> Result<BipartiteGraph> {
    if len < 4 || len % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "even cycle needs an even length >= 4, got {len}"
        )));
    }
    let edges: Vec<(usize, usize)> = (0..len).map(|i| (i, (i + 1) % len)).collect();
    let (g, _) = from_coloring(len, &edges, |x| x % 2 == 0, |x| x.to_string())?;
    Ok(g.with_spec(GraphSpec::Cycle { len }))
}

/// Path on `sites` vertices `0..sites`, with U the even positions.
pub fn path(sites: usize) -> Result<BipartiteGraph> {
    if sites < 2 {
        return Err(Error::InvalidParameter("path needs at least 2 sites".into()));
    }
    let edges: Vec<(usize, usize)> = (0..sites - 1).map(|i| (i, i + 1)).collect();
    let (g, _) = from_coloring(sites, &edges, |x| x % 2 == 0, |x| x.to_string())?;
    Ok(g.with_spec(GraphSpec::Path { sites }))
}

/// Cyclic ladder `Z_len x Z_2`, with U the sites where `i + j` is even.
pub fn cyclic_ladder(len: usize) -> Result<BipartiteGraph> {
    if len < 4 || len % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "cyclic ladder needs an even length >= 4, got {len}"
        )));
    }
    let id = |i: usize, j: usize| 2 * i + j;
    let mut edges = Vec::new();
    for i in 0..len {
        edges.push((id(i, 0), id(i, 1)));
        for j in 0..2 {
            edges.push((id(i, j), id((i + 1) % len, j)));
        }
    }
    let (g, _) = from_coloring(
        2 * len,
        &edges,
        |x| (x / 2 + x % 2) % 2 == 0,
        |x| format!("({},{})", x / 2, x % 2),
    )?;
    Ok(g.with_spec(GraphSpec::Ladder { len }))
}

/// Coordinates of the sites of an even torus.
#[derive(Clone, Debug)]
pub struct TorusLayout {
    pub m: usize,
    pub n: usize,
    site_of: Vec<usize>,
    coord_of: Vec<(usize, usize)>,
}

impl TorusLayout {
    pub fn new(m: usize, n: usize) -> Self {
        let mut site_of = vec![0; m * n];
        let mut coord_of = vec![(0, 0); m * n];
        let half = m * n / 2;
        let (mut nu, mut nv) = (0, half);
        for i in 0..m {
            for j in 0..n {
                let s = if (i + j) % 2 == 0 {
                    nu += 1;
                    nu - 1
                } else {
                    nv += 1;
                    nv - 1
                };
                site_of[i * n + j] = s;
                coord_of[s] = (i, j);
            }
        }
        TorusLayout {
            m,
            n,
            site_of,
            coord_of,
        }
    }

    /// Site at coordinates reduced modulo the torus dimensions.
    pub fn site(&self, i: i64, j: i64) -> usize {
        let a = i.rem_euclid(self.m as i64) as usize;
        let b = j.rem_euclid(self.n as i64) as usize;
        self.site_of[a * self.n + b]
    }

    pub fn coord(&self, site: usize) -> (usize, usize) {
        self.coord_of[site]
    }
}

/// Even torus `Z_m x Z_n`, with U the sites where `i + j` is even.
pub fn even_torus(m: usize, n: usize) -> Result<BipartiteGraph> {
    if m < 4 || n < 4 || m % 2 != 0 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "bipartite torus needs even dimensions >= 4, got {m}x{n}"
        )));
    }
    check_size(m.saturating_mul(n))?;
    let base = simple_torus(m, n)?;
    let (g, _) = from_coloring(
        m * n,
        &base.edges(),
        |x| (x / n + x % n) % 2 == 0,
        |x| format!("({},{})", x / n, x % n),
    )?;
    Ok(g.with_spec(GraphSpec::Torus { m, n }))
}

/// Hypercube `H_d` on words of length `d`; U holds the words of even weight.
/// Bit `k` of a word stores the coordinate `w_{k+1}`.
pub fn hypercube(d: usize) -> Result<BipartiteGraph> {
    if d == 0 {
        return Err(Error::InvalidParameter("hypercube needs d >= 1".into()));
    }
    if d > 7 {
        return Err(Error::InvalidGraph(format!(
            "hypercube of dimension {d} exceeds {MAX_SITES} sites"
        )));
    }
    let base = simple_hypercube(d)?;
    let (g, _) = from_coloring(
        1 << d,
        &base.edges(),
        |x| x.count_ones() % 2 == 0,
        |x| word_label(x, d),
    )?;
    Ok(g.with_spec(GraphSpec::Hypercube { d }))
}

pub(crate) fn word_label(w: usize, d: usize) -> String {
    (0..d)
        .map(|k| if w >> k & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Random bipartite graph with i.i.d. edges of probability `p`, resampled until connected.
pub fn random_bipartite(nu: usize, nv: usize, p: f64, seed: u64) -> Result<BipartiteGraph> {
    if nu == 0 || nv == 0 {
        return Err(Error::InvalidParameter("both parts must be non-empty".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in (0, 1], got {p}"
        )));
    }
    check_size(nu + nv)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let mut edges = Vec::new();
        for u in 0..nu {
            for v in 0..nv {
                if rng.random::<f64>() < p {
                    edges.push((u, nu + v));
                }
            }
        }
        let g = BipartiteGraph::from_parts(nu, nv, &edges)?;
        if g.is_connected() {
            return Ok(g.with_spec(GraphSpec::Random { nu, nv, p, seed }));
        }
    }
    Err(Error::InvalidParameter(format!(
        "no connected sample after 100 attempts (nu={nu}, nv={nv}, p={p})"
    )))
}

/// Doubling: red copies form U, blue copies form V, and red `i` is joined to
/// blue `j` when `i = j` or `i ~ j`.
pub fn double_graph(g: &SimpleGraph) -> Result<BipartiteGraph> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("cannot double the empty graph".into()));
    }
    check_size(2 * n)?;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, n + i));
        for &j in g.neighbors(i) {
            edges.push((i, n + j));
        }
    }
    let labels = (0..n)
        .map(|i| format!("{}r", g.label(i)))
        .chain((0..n).map(|i| format!("{}b", g.label(i))))
        .collect();
    BipartiteGraph::from_parts_labeled(n, n, &edges, labels)
}

pub fn simple_cycle(len: usize) -> Result<SimpleGraph> {
    if len < 3 {
        return Err(Error::InvalidParameter("cycle needs length >= 3".into()));
    }
    check_size(len)?;
    let edges: Vec<(usize, usize)> = (0..len).map(|i| (i, (i + 1) % len)).collect();
    SimpleGraph::new(len, &edges, None)
}

pub fn simple_path(sites: usize) -> Result<SimpleGraph> {
    if sites == 0 {
        return Err(Error::InvalidParameter("path needs at least 1 site".into()));
    }
    check_size(sites)?;
    let edges: Vec<(usize, usize)> = (0..sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    SimpleGraph::new(sites, &edges, None)
}

/// Torus `Z_m x Z_n` with vertex `i * n + j` at `(i, j)`.
pub fn simple_torus(m: usize, n: usize) -> Result<SimpleGraph> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameter(format!(
            "torus needs dimensions >= 3, got {m}x{n}"
        )));
    }
    check_size(m.saturating_mul(n))?;
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..n {
            edges.push((i * n + j, ((i + 1) % m) * n + j));
            edges.push((i * n + j, i * n + (j + 1) % n));
        }
    }
    let labels = (0..m * n).map(|x| format!("({},{})", x / n, x % n)).collect();
    SimpleGraph::new(m * n, &edges, Some(labels))
}

pub fn simple_hypercube(d: usize) -> Result<SimpleGraph> {
    if d > 7 {
        return Err(Error::InvalidGraph(format!(
            "hypercube of dimension {d} exceeds {MAX_SITES} sites"
        )));
    }
    let n = 1usize << d;
    let mut edges = Vec::new();
    for w in 0..n {
        for k in 0..d {
            let x = w ^ (1 << k);
            if w < x {
                edges.push((w, x));
            }
        }
    }
    let labels = (0..n).map(|w| word_label(w, d)).collect();
    SimpleGraph::new(n, &edges, Some(labels))
}

/// Complete graph `K_n`.
pub fn simple_complete(n: usize) -> Result<SimpleGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("complete graph needs n >= 1".into()));
    }
    check_size(n)?;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    SimpleGraph::new(n, &edges, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_isomorphic;

    #[test]
    fn standard_sizes() {
        let t = even_torus(4, 4).unwrap();
        assert_eq!((t.n_sites(), t.n_edges()), (16, 32));
        assert_eq!(t.validate().regular_degree, Some(4));
        let h = hypercube(3).unwrap();
        assert_eq!((h.n_sites(), h.n_edges()), (8, 12));
        let k = complete_bipartite(2, 3).unwrap();
        let r = k.validate();
        assert_eq!(r.regular_degree, None);
        assert_eq!(r.girth, Some(4));
        assert_eq!(even_cycle(6).unwrap().validate().girth, Some(6));
        let l = cyclic_ladder(4).unwrap();
        assert_eq!((l.n_u(), l.n_v(), l.n_edges()), (4, 4, 12));
    }

    #[test]
    fn parity_of_parts() {
        let t = even_torus(6, 6).unwrap();
        let lay = TorusLayout::new(6, 6);
        for s in t.u_sites() {
            let (i, j) = lay.coord(s);
            assert_eq!((i + j) % 2, 0);
            assert_eq!(lay.site(i as i64, j as i64), s);
        }
        for s in t.v_sites() {
            let (i, j) = lay.coord(s);
            assert_eq!((i + j) % 2, 1);
            for &u in t.neighbors(s) {
                let (a, b) = lay.coord(u);
                let da = (a as i64 - i as i64).rem_euclid(6);
                let db = (b as i64 - j as i64).rem_euclid(6);
                assert!(matches!((da, db), (0, 1) | (0, 5) | (1, 0) | (5, 0)));
            }
        }
    }

    #[test]
    fn rejects_odd_or_degenerate_families() {
        assert!(even_cycle(5).is_err());
        assert!(even_torus(5, 6).is_err());
        assert!(even_torus(2, 4).is_err());
        assert!(hypercube(0).is_err());
        assert!(random_bipartite(3, 3, 0.0, 1).is_err());
        assert!(hypercube(8).is_err());
    }

    #[test]
    fn doubled_single_vertex_is_an_edge() {
        let g = double_graph(&simple_complete(1).unwrap()).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn doubling_isomorphisms() {
        for d in 0..=4 {
            let a = double_graph(&simple_hypercube(d).unwrap()).unwrap();
            let b = hypercube(d + 1).unwrap();
            assert!(is_isomorphic(&a.to_simple(), &b.to_simple()).unwrap(), "d={d}");
        }
        for n in [4usize, 6, 8] {
            let a = double_graph(&simple_cycle(n).unwrap()).unwrap();
            let b = cyclic_ladder(n).unwrap();
            assert!(is_isomorphic(&a.to_simple(), &b.to_simple()).unwrap(), "n={n}");
        }
        let a = double_graph(&simple_cycle(6).unwrap()).unwrap();
        assert!(!is_isomorphic(&a.to_simple(), &even_torus(4, 6).unwrap().to_simple()).unwrap());
    }

    #[test]
    fn random_graphs_are_connected_and_reproducible() {
        for seed in 0..10 {
            let g = random_bipartite(5, 6, 0.4, seed).unwrap();
            assert!(g.is_connected());
            assert_eq!(g, random_bipartite(5, 6, 0.4, seed).unwrap());
        }
    }
}
