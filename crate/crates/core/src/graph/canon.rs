//! Canonical labelling by colour refinement with individualisation, for small graphs.

use super::SimpleGraph;
use crate::error::{Error, Result};

const LEAF_BUDGET: usize = 500_000;

/// Refine a colouring to the coarsest equitable one. Colours are relabelled
/// by sorted signature, so the result does not depend on vertex order.
fn refine(adj: &[Vec<usize>], mut colors: Vec<usize>) -> Vec<usize> {
    let n = adj.len();
    let mut n_colors = count_distinct(&colors);
    loop {
        let mut sigs: Vec<(usize, Vec<usize>, usize)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = adj[v].iter().map(|&w| colors[w]).collect();
                nb.sort_unstable();
                (colors[v], nb, v)
            })
            .collect();
        sigs.sort();
        let mut next = vec![0usize; n];
        let mut c = 0;
        for k in 0..n {
            if k > 0 && (sigs[k].0 != sigs[k - 1].0 || sigs[k].1 != sigs[k - 1].1) {
                c += 1;
            }
            next[sigs[k].2] = c;
        }
        let new_count = c + 1;
        colors = next;
        if new_count == n_colors {
            return colors;
        }
        n_colors = new_count;
    }
}

fn count_distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn leaf_code(adj: &[Vec<usize>], colors: &[usize]) -> Vec<u64> {
    let n = adj.len();
    let words = (n * n).div_ceil(64);
    let mut code = vec![0u64; words];
    for v in 0..n {
        for &w in &adj[v] {
            let bit = colors[v] * n + colors[w];
            code[bit / 64] |= 1 << (bit % 64);
        }
    }
    code
}

fn search(
    adj: &[Vec<usize>],
    colors: Vec<usize>,
    best: &mut Option<Vec<u64>>,
    leaves: &mut usize,
) -> Result<()> {
    let colors = refine(adj, colors);
    let n = adj.len();
    if count_distinct(&colors) == n {
        *leaves += 1;
        if *leaves > LEAF_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "canonical labelling".into(),
                budget: LEAF_BUDGET as u64,
            });
        }
        let code = leaf_code(adj, &colors);
        if best.as_ref().is_none_or(|b| code < *b) {
            *best = Some(code);
        }
        return Ok(());
    }
    // First colour class with more than one member.
    let mut sizes = vec![0usize; n];
    for &c in &colors {
        sizes[c] += 1;
    }
    let target = (0..n).find(|&c| sizes[c] > 1).expect("non-discrete colouring");
    for v in 0..n {
        if colors[v] != target {
            continue;
        }
        let child: Vec<usize> = colors
            .iter()
            .enumerate()
            .map(|(w, &c)| {
                if c < target {
                    2 * c
                } else if c > target {
                    2 * c + 1
                } else if w == v {
                    2 * c
                } else {
                    2 * c + 1
                }
            })
            .collect();
        search(adj, child, best, leaves)?;
    }
    Ok(())
}

/// Canonical adjacency code: equal for two graphs iff they are isomorphic.
pub fn canonical_form(g: &SimpleGraph) -> Result<(usize, Vec<u64>)> {
    let n = g.n();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let start: Vec<usize> = (0..n).map(|v| adj[v].len()).collect();
    let mut best = None;
    let mut leaves = 0;
    if n > 0 {
        search(&adj, start, &mut best, &mut leaves)?;
    }
    Ok((n, best.unwrap_or_default()))
}

pub fn is_isomorphic(a: &SimpleGraph, b: &SimpleGraph) -> Result<bool> {
    if a.n() != b.n() || a.edges().len() != b.edges().len() {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn relabel(g: &SimpleGraph, perm: &[usize]) -> SimpleGraph {
        let edges: Vec<(usize, usize)> =
            g.edges().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        SimpleGraph::new(g.n(), &edges, None).unwrap()
    }

    #[test]
    fn distinguishes_non_isomorphic_regular_graphs() {
        // Two 2-regular graphs on 6 vertices: C6 and two triangles.
        let c6 = SimpleGraph::new(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], None).unwrap();
        let tt = SimpleGraph::new(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], None).unwrap();
        assert!(!is_isomorphic(&c6, &tt).unwrap());
    }

    proptest! {
        #[test]
        fn invariant_under_relabelling(
            edges in proptest::collection::vec((0usize..9, 0usize..9), 0..20),
            perm in Just((0..9).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let mut es: Vec<(usize, usize)> = edges.into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect();
            es.sort();
            es.dedup();
            let g = SimpleGraph::new(9, &es, None).unwrap();
            let h = relabel(&g, &perm);
            prop_assert!(is_isomorphic(&g, &h).unwrap());
        }
    }
}
