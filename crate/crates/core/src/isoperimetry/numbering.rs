//! Explicit optimal sets and numberings: torus spirals, Harper's order on the
//! hypercube, and seeds on the doubled torus.

use serde::Serialize;

use super::closed::{doubled_torus_delta, hypercube_delta, torus_delta, torus_window};
use super::{cost_unchecked, nbhd, nested_progression, SearchOutcome, SiteSet};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, GraphSpec, TorusLayout};

fn torus_dims(g: &BipartiteGraph) -> Result<(usize, usize)> {
    match g.spec() {
        Some(GraphSpec::Torus { m, n }) => Ok((*m, *n)),
        _ => Err(Error::InvalidGraph("expected a torus graph".into())),
    }
}

/// Cells of a square spiral in the lattice `L`, growing `ℓ×ℓ → ℓ×(ℓ+1) → (ℓ+1)×(ℓ+1)`.
fn lattice_spiral(length: usize) -> Vec<(i64, i64)> {
    let mut cells = Vec::with_capacity(length);
    if length == 0 {
        return cells;
    }
    cells.push((0, 0));
    let (mut w, mut h) = (1i64, 1i64);
    while cells.len() < length {
        if w == h {
            for b in 0..h {
                cells.push((w, b));
            }
            w += 1;
        } else {
            for a in 0..w {
                cells.push((a, h));
            }
            h += 1;
        }
    }
    cells.truncate(length);
    cells
}

/// Spiral isoperimetric numbering on an even torus, in the lattice `L` of
/// V-sites with unit steps `(1, 1)` and `(1, -1)`.
pub fn spiral_numbering(g: &BipartiteGraph, start: usize, length: usize) -> Result<Vec<usize>> {
    let (m, n) = torus_dims(g)?;
    let window = torus_window(m, n);
    if length > window {
        return Err(Error::InvalidParameter(format!(
            "spiral length {length} exceeds the torus window {window}"
        )));
    }
    if !g.v_sites().contains(&start) {
        return Err(Error::InvalidParameter(format!("site {start} is not in V")));
    }
    let layout = TorusLayout::new(m, n);
    let (i0, j0) = layout.coord(start);
    let out: Vec<usize> = lattice_spiral(length)
        .into_iter()
        .map(|(a, b)| layout.site(i0 as i64 + a + b, j0 as i64 + a - b))
        .collect();
    let mut set: SiteSet = 0;
    for (k, &s) in out.iter().enumerate() {
        set |= 1u128 << s;
        let c = cost_unchecked(g, set);
        if c != torus_delta(k + 1) {
            return Err(Error::Numerical(format!(
                "spiral prefix of size {} has cost {c}, expected {}",
                k + 1,
                torus_delta(k + 1)
            )));
        }
    }
    Ok(out)
}

/// Partition of `N(A)` on a torus by the number and position of neighbours in `A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatticeClasses {
    pub n1: usize,
    /// Two neighbours in `A` adjacent in `L`.
    pub n1100: usize,
    /// Two opposite neighbours in `A`.
    pub n1010: usize,
    pub n3: usize,
    pub n4: usize,
}

pub fn lattice_classes(g: &BipartiteGraph, a: SiteSet) -> Result<LatticeClasses> {
    let (m, n) = torus_dims(g)?;
    let layout = TorusLayout::new(m, n);
    let mut c = LatticeClasses::default();
    let mut rest = nbhd(g, a);
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let (i, j) = layout.coord(p);
        let (i, j) = (i as i64, j as i64);
        // neighbours in cyclic order: up, right, down, left
        let ring = [
            layout.site(i - 1, j),
            layout.site(i, j + 1),
            layout.site(i + 1, j),
            layout.site(i, j - 1),
        ];
        let inside: Vec<bool> = ring.iter().map(|&s| a >> s & 1 == 1).collect();
        match inside.iter().filter(|&&b| b).count() {
            1 => c.n1 += 1,
            2 if (inside[0] && inside[2]) || (inside[1] && inside[3]) => c.n1010 += 1,
            2 => c.n1100 += 1,
            3 => c.n3 += 1,
            4 => c.n4 += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// Number of torus edges between `A ∪ N(A)` and its complement.
pub fn torus_edge_boundary(g: &BipartiteGraph, a: SiteSet) -> Result<usize> {
    torus_dims(g)?;
    let inside = a | nbhd(g, a);
    Ok(g.edges()
        .iter()
        .filter(|&&(x, y)| (inside >> x & 1) != (inside >> y & 1))
        .count())
}

/// All words of `H_d` in Harper's order: by weight, then a word with a `1`
/// at the first differing coordinate comes first.
pub fn harper_order(d: usize) -> Vec<u32> {
    let mut words: Vec<u32> = (0..1u32 << d).collect();
    words.sort_by(|&x, &y| {
        x.count_ones().cmp(&y.count_ones()).then_with(|| {
            if x == y {
                std::cmp::Ordering::Equal
            } else {
                let k = (x ^ y).trailing_zeros();
                if x >> k & 1 == 1 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            }
        })
    });
    words
}

pub fn harper_numbering(d: usize, length: usize) -> Result<Vec<u32>> {
    if d > 16 || length > 1 << d {
        return Err(Error::InvalidParameter(format!(
            "length {length} exceeds 2^{d}"
        )));
    }
    let mut w = harper_order(d);
    w.truncate(length);
    Ok(w)
}

/// Vertex boundary `|N[A] \ A|` of a set of words in `H_d`.
pub fn hypercube_vertex_boundary(d: usize, words: &[u32]) -> usize {
    let mut inside = vec![false; 1 << d];
    for &w in words {
        inside[w as usize] = true;
    }
    let mut seen = vec![false; 1 << d];
    let mut count = 0;
    for &w in words {
        for k in 0..d {
            let x = (w ^ 1 << k) as usize;
            if !inside[x] && !seen[x] {
                seen[x] = true;
                count += 1;
            }
        }
    }
    count
}

/// V-sites of the bipartite hypercube `H_{d+1}` corresponding to the first
/// `length` words of Harper's order on `H_d`: a word is extended by a final
/// coordinate making its weight odd.
pub fn harper_v_sites(g: &BipartiteGraph, length: usize) -> Result<Vec<usize>> {
    let dim = match g.spec() {
        Some(GraphSpec::Hypercube { d }) => *d,
        _ => return Err(Error::InvalidGraph("expected a hypercube graph".into())),
    };
    let d = dim - 1;
    let words = harper_numbering(d, length)?;
    let mut rank = vec![0usize; 1 << dim];
    let mut next = g.n_u();
    for x in 0..1usize << dim {
        if x.count_ones() % 2 == 1 {
            rank[x] = next;
            next += 1;
        }
    }
    let out: Vec<usize> = words
        .iter()
        .map(|&w| {
            let w = w as usize;
            let ext = if w.count_ones() % 2 == 0 { w | 1 << d } else { w };
            rank[ext]
        })
        .collect();
    let mut set: SiteSet = 0;
    for (k, &s) in out.iter().enumerate() {
        set |= 1u128 << s;
        let expect = hypercube_delta(d, k as u128 + 1)?;
        if cost_unchecked(g, set) != expect {
            return Err(Error::Numerical(format!(
                "Harper prefix of size {} does not attain {expect}",
                k + 1
            )));
        }
    }
    Ok(out)
}

/// Seeds of the Pareto optimal sets on the doubled square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeedType {
    /// a single site
    I,
    /// a plus shape with one diagonal cell
    II,
    /// two horizontally adjacent sites
    IIIa,
    /// two diagonally adjacent sites
    IIIb,
    /// an L-shaped tromino
    IV,
}

impl SeedType {
    pub fn cells(&self) -> Vec<(i64, i64)> {
        match self {
            SeedType::I => vec![(0, 0)],
            SeedType::II => vec![(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1)],
            SeedType::IIIa => vec![(0, 0), (1, 0)],
            SeedType::IIIb => vec![(0, 0), (1, 1)],
            SeedType::IV => vec![(0, 0), (1, 0), (0, 1)],
        }
    }

    /// Number of inflation steps producing the Pareto set at parameter `ℓ`.
    pub fn radius(&self, l: usize) -> Option<usize> {
        match self {
            SeedType::II => l.checked_sub(2),
            _ => l.checked_sub(1),
        }
    }
}

/// `N^k(S)` in `Z²`: the cells within `L¹` distance `k` of the seed.
pub fn inflate(cells: &[(i64, i64)], k: usize) -> Vec<(i64, i64)> {
    let k = k as i64;
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &(x, y) in cells {
        for dx in -k..=k {
            let r = k - dx.abs();
            for dy in -r..=r {
                out.push((x + dx, y + dy));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn rotate(cells: &[(i64, i64)], quarter_turns: usize) -> Vec<(i64, i64)> {
    cells
        .iter()
        .map(|&(x, y)| match quarter_turns % 4 {
            0 => (x, y),
            1 => (-y, x),
            2 => (-x, -y),
            _ => (y, -x),
        })
        .collect()
}

/// An inflated seed placed on a doubled torus.
#[derive(Clone, Debug, Serialize)]
pub struct SeedSet {
    pub seed: SeedType,
    pub radius: usize,
    pub cells: Vec<(i64, i64)>,
    #[serde(skip)]
    pub set: SiteSet,
    pub size: usize,
    pub cost: i64,
}

fn doubled_torus_dims(g: &BipartiteGraph) -> Result<(usize, usize)> {
    match g.spec() {
        Some(GraphSpec::Doubled(b)) => match **b {
            GraphSpec::Torus { m, n } => Ok((m, n)),
            _ => Err(Error::InvalidGraph("expected a doubled torus".into())),
        },
        _ => Err(Error::InvalidGraph("expected a doubled torus".into())),
    }
}

/// Place `N^k(S)` for a rotated seed at `offset` on the doubled torus, refusing
/// shapes whose neighbourhood would wrap around.
pub fn seed_set(
    g: &BipartiteGraph,
    seed: SeedType,
    quarter_turns: usize,
    offset: (i64, i64),
    k: usize,
) -> Result<SeedSet> {
    let (m, n) = doubled_torus_dims(g)?;
    let base = rotate(&seed.cells(), quarter_turns);
    let cells = inflate(&base, k);
    let outer = inflate(&base, k + 1);
    let span = |f: fn(&(i64, i64)) -> i64| {
        let lo = outer.iter().map(f).min().unwrap();
        let hi = outer.iter().map(f).max().unwrap();
        (hi - lo + 1) as usize
    };
    if span(|c| c.0) > m || span(|c| c.1) > n {
        return Err(Error::Precondition(format!(
            "N^{k} of seed {seed:?} wraps around the {m}x{n} torus"
        )));
    }
    let nb = m * n;
    let set = cells.iter().fold(0u128, |acc, &(x, y)| {
        let i = (x + offset.0).rem_euclid(m as i64) as usize;
        let j = (y + offset.1).rem_euclid(n as i64) as usize;
        acc | 1u128 << (nb + i * n + j)
    });
    let size = cells.len();
    let cost = cost_unchecked(g, set);
    Ok(SeedSet {
        seed,
        radius: k,
        cells,
        set,
        size,
        cost,
    })
}

/// A nested isoperimetric progression between Pareto sets of consecutive types.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectingProgression {
    pub label: String,
    pub from: SeedSet,
    pub to: SeedSet,
    #[serde(skip)]
    pub steps: Vec<SiteSet>,
}

/// The four connecting progressions I→II, II→III, III→IV and IV→I at parameter
/// `ℓ ≥ 2`, each found by search and checked against the lattice formula.
pub fn obs_progressions(g: &BipartiteGraph, l: usize) -> Result<Vec<ConnectingProgression>> {
    if l < 2 {
        return Err(Error::InvalidParameter("connecting progressions need ℓ ≥ 2".into()));
    }
    let c = (0i64, 0i64);
    let pairs = [
        ("I->II", (SeedType::I, l - 1, l), (SeedType::II, l - 2, l)),
        ("II->III", (SeedType::II, l - 2, l), (SeedType::IIIa, l - 1, l)),
        ("III->IV", (SeedType::IIIa, l - 1, l), (SeedType::IV, l - 1, l)),
        ("IV->I", (SeedType::IV, l - 1, l), (SeedType::I, l, l + 1)),
    ];
    let delta = |s: usize| Some(doubled_torus_delta(s));
    let mut out = Vec::new();
    for (label, (s0, k0, _), (s1, k1, _)) in pairs {
        let from = seed_set(g, s0, 0, c, k0)?;
        let to = seed_set(g, s1, 0, c, k1)?;
        for x in [&from, &to] {
            if x.cost != doubled_torus_delta(x.size) {
                return Err(Error::Numerical(format!(
                    "{:?} set of size {} has cost {}, expected {}",
                    x.seed,
                    x.size,
                    x.cost,
                    doubled_torus_delta(x.size)
                )));
            }
        }
        match nested_progression(g, from.set, to.set, delta, 1_000_000)? {
            SearchOutcome::Found(steps) => out.push(ConnectingProgression {
                label: label.to_string(),
                from,
                to,
                steps,
            }),
            _ => {
                return Err(Error::Numerical(format!(
                    "no nested isoperimetric progression {label} at ℓ = {l}"
                )))
            }
        }
    }
    Ok(out)
}
