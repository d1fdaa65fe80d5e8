use proptest::prelude::*;

use super::closed::{doubled_torus_window, torus_window};
use super::*;
use crate::graph::{random_bipartite, GraphSpec};

fn build(spec: &str) -> BipartiteGraph {
    spec.parse::<GraphSpec>().unwrap().build().unwrap()
}

fn first_v(g: &BipartiteGraph) -> usize {
    g.v_sites().next().unwrap()
}

#[test]
fn set_cost_examples() {
    let t = build("torus:6x6");
    assert_eq!(set_cost(&t, 0).unwrap(), 0);
    assert_eq!(set_cost(&t, 1u128 << first_v(&t)).unwrap(), 3);
    let d = build("doubled(torus:5x5)");
    assert_eq!(set_cost(&d, 1u128 << first_v(&d)).unwrap(), 4);
    assert!(set_cost(&t, 1).is_err());
    assert!(neighborhood(&t, 1).is_err());
}

#[test]
fn torus_brute_force_matches_formula() {
    let g = build("torus:6x6");
    let p = brute_force_profile(&g, 6).unwrap();
    assert_eq!(p.values(), vec![0, 3, 4, 5, 5, 6, 6]);
    let fam = ClosedFormFamily::detect(&g).unwrap();
    assert_eq!(fam, ClosedFormFamily::Torus { m: 6, n: 6 });
    assert_eq!(fam.profile(6).unwrap().values(), p.values());
    for e in &p.entries {
        assert_eq!(e.provenance, Provenance::BruteForce);
        assert!(!e.truncated);
        assert_eq!(e.witnesses.len() as u64, e.witness_count.unwrap());
        for &w in &e.witnesses {
            assert_eq!(set_cost(&g, w).unwrap(), e.delta);
            assert_eq!(w.count_ones() as usize, e.s);
        }
    }
}

#[test]
fn doubled_torus_brute_force_matches_formula() {
    let g = build("doubled(torus:5x5)");
    let p = brute_force_profile(&g, 6).unwrap();
    assert_eq!(p.values(), vec![0, 4, 6, 7, 8, 8, 9]);
    let fam = ClosedFormFamily::detect(&g).unwrap();
    assert_eq!(fam, ClosedFormFamily::DoubledTorus { m: 5, n: 5 });
    assert_eq!(fam.profile(6).unwrap().values(), p.values());
}

#[test]
fn closed_form_examples() {
    assert_eq!(torus_delta(3), 5);
    assert_eq!(doubled_torus_delta(5), 8);
    let h = ClosedFormFamily::Hypercube { dim: 4 };
    assert_eq!(h.delta(1).unwrap(), 3);
    assert_eq!(h.delta(4).unwrap(), 3);
    assert_eq!(h.delta(7).unwrap(), 1);
    assert_eq!(h.delta(8).unwrap(), 0);
    assert!(h.delta(9).is_err());
    let dt: Vec<i64> = (0..=6).map(doubled_torus_delta).collect();
    assert_eq!(dt, vec![0, 4, 6, 7, 8, 8, 9]);
    // Hamming balls: Δ_{d+1}(Σ_{i≤r} C(d,i)) = C(d,r+1)
    for d in 1..=8usize {
        let mut below = 0u128;
        for r in 0..=d {
            below += binomial(d, r);
            assert_eq!(hypercube_delta(d, below).unwrap() as u128, binomial(d, r + 1));
        }
    }
}

#[test]
fn windows_are_enforced() {
    let t = ClosedFormFamily::Torus { m: 6, n: 6 };
    assert_eq!(t.max_s(), 6);
    assert!(t.delta(7).is_err());
    assert_eq!(torus_window(4, 4), 2);
    assert_eq!(torus_window(8, 8), 12);
    assert_eq!(doubled_torus_window(5, 5), 6);
    assert_eq!(doubled_torus_window(4, 4), 3);
    assert_eq!(doubled_torus_window(6, 6), 10);
}

/// The windows end exactly where the brute-force profile first departs from
/// the lattice formula.
#[test]
fn window_edges_match_brute_force() {
    for (m, n) in [(4, 4), (4, 6), (6, 6)] {
        let g = build(&format!("torus:{m}x{n}"));
        let w = torus_window(m, n);
        let p = brute_force_profile(&g, w + 1).unwrap();
        for s in 0..=w {
            assert_eq!(p.delta(s).unwrap(), torus_delta(s), "torus {m}x{n} s={s}");
        }
        assert_ne!(p.delta(w + 1).unwrap(), torus_delta(w + 1), "torus {m}x{n}");
    }
    for (m, n) in [(3, 3), (3, 4), (4, 4), (4, 5), (5, 5)] {
        let g = build(&format!("doubled(torus:{m}x{n})"));
        let w = doubled_torus_window(m, n);
        let p = brute_force_profile(&g, w + 1).unwrap();
        for s in 0..=w {
            assert_eq!(p.delta(s).unwrap(), doubled_torus_delta(s), "{m}x{n} s={s}");
        }
        assert_ne!(p.delta(w + 1).unwrap(), doubled_torus_delta(w + 1), "{m}x{n}");
    }
}

/// Direct vertex isoperimetry of `H_d` by exhaustive search.
fn vertex_isoperimetry(d: usize) -> Vec<usize> {
    let n = 1usize << d;
    let mut best = vec![usize::MAX; n + 1];
    for mask in 0u64..1 << n {
        let words: Vec<u32> = (0..n as u32).filter(|&w| mask >> w & 1 == 1).collect();
        let b = hypercube_vertex_boundary(d, &words);
        let s = words.len();
        best[s] = best[s].min(b);
    }
    best
}

#[test]
fn hypercube_brute_force_matches_recursion() {
    for dim in 2..=5 {
        let g = build(&format!("hypercube:{dim}"));
        let fam = ClosedFormFamily::detect(&g).unwrap();
        assert_eq!(fam, ClosedFormFamily::Hypercube { dim });
        let p = brute_force_profile(&g, g.n_v()).unwrap();
        assert_eq!(fam.full_profile().values(), p.values(), "dim {dim}");
    }
    // the doubled H_3 picture: H_4 agrees with vertex isoperimetry of H_3
    let g = build("hypercube:4");
    let p = brute_force_profile(&g, 8).unwrap();
    let direct = vertex_isoperimetry(3);
    for s in 0..=8 {
        assert_eq!(p.delta(s).unwrap(), direct[s] as i64);
    }
}

/// Upper shadow of the first `k` weight-`r` words in reverse lexicographic order.
fn shadow_direct(d: usize, r: usize, k: usize) -> usize {
    let level: Vec<u32> = harper_order(d)
        .into_iter()
        .filter(|w| w.count_ones() as usize == r)
        .take(k)
        .collect();
    let mut up = std::collections::BTreeSet::new();
    for &w in &level {
        for b in 0..d {
            if w >> b & 1 == 0 {
                up.insert(w | 1 << b);
            }
        }
    }
    up.len()
}

#[test]
fn psi_recursion_matches_shadows_and_harper_prefixes() {
    for d in 1..=7 {
        for r in 0..=d {
            for k in 0..=binomial(d, r) as usize {
                assert_eq!(
                    hypercube_psi(d, r, k as u128) as usize,
                    shadow_direct(d, r, k),
                    "ψ_{d}({r},{k})"
                );
            }
        }
        let order = harper_order(d);
        for s in 0..=order.len() {
            let b = hypercube_vertex_boundary(d, &order[..s]);
            assert_eq!(b as i64, hypercube_delta(d, s as u128).unwrap(), "d={d} s={s}");
        }
    }
}

#[test]
fn harper_examples() {
    let one = harper_numbering(3, 1).unwrap();
    assert_eq!(one, vec![0]);
    assert_eq!(hypercube_vertex_boundary(3, &one), 3);
    let ball = harper_numbering(3, 4).unwrap();
    assert_eq!(hypercube_vertex_boundary(3, &ball), 3);
    let all = harper_numbering(3, 8).unwrap();
    assert_eq!(hypercube_vertex_boundary(3, &all), 0);
    assert!(harper_numbering(3, 9).is_err());
    // after the empty word come the unit words, with e_1 first
    assert_eq!(harper_order(3)[..4], [0b000, 0b001, 0b010, 0b100]);
    let g = build("hypercube:5");
    let sites = harper_v_sites(&g, 16).unwrap();
    let costs = numbering_prefix_costs(&g, &sites).unwrap();
    for (k, c) in costs.iter().enumerate() {
        assert_eq!(*c, hypercube_delta(4, k as u128 + 1).unwrap());
    }
}

#[test]
fn even_cycle_and_doubled_cycle_tree_like() {
    let g = build("cycle:12");
    let fam = ClosedFormFamily::detect(&g).unwrap();
    assert_eq!(fam, ClosedFormFamily::TreeLike { degree: 2, girth: 12 });
    assert_eq!(fam.max_s(), 5);
    let p = brute_force_profile(&g, 5).unwrap();
    assert_eq!(fam.full_profile().values(), p.values());
    assert_eq!(p.values(), vec![0, 1, 1, 1, 1, 1]);

    let g = build("doubled(cycle:7)");
    let fam = ClosedFormFamily::detect(&g).unwrap();
    assert_eq!(fam, ClosedFormFamily::DoubledTreeLike { degree: 2, girth: 7 });
    let p = brute_force_profile(&g, fam.max_s()).unwrap();
    assert_eq!(fam.full_profile().values(), p.values());
    assert_eq!(p.values(), vec![0, 2, 2, 2, 2, 2]);

    // cubic graph of girth 6 (Heawood graph as a bipartite graph)
    let edges: Vec<(usize, usize)> = (0..7)
        .flat_map(|i| [0usize, 1, 3].map(|k| (i, 7 + (i + k) % 7)))
        .collect();
    let h = BipartiteGraph::from_parts(7, 7, &edges).unwrap();
    let fam = ClosedFormFamily::detect(&h).unwrap();
    assert_eq!(fam, ClosedFormFamily::TreeLike { degree: 3, girth: 6 });
    let p = brute_force_profile(&h, fam.max_s()).unwrap();
    assert_eq!(fam.full_profile().values(), p.values());
}

#[test]
fn brute_force_budget_is_reported() {
    let g = build("torus:8x8");
    match brute_force_profile(&g, 16) {
        Err(Error::CapExceeded { estimate, cap, .. }) => {
            assert_eq!(estimate, subset_count(32, 16));
            assert_eq!(cap, DEFAULT_BUDGET);
        }
        other => panic!("expected a budget refusal, got {other:?}"),
    }
    assert!(brute_force_profile(&g, 33).is_err());
}

#[test]
fn witness_cap_marks_truncation() {
    let g = build("torus:6x6");
    let p = brute_force_profile_with(
        &g,
        3,
        BruteForceOptions {
            budget: DEFAULT_BUDGET,
            witness_cap: 2,
        },
    )
    .unwrap();
    assert!(p.entries[2].truncated);
    assert_eq!(p.entries[2].witnesses.len(), 2);
    assert!(p.complete_witnesses(2).is_none());
    assert!(p.complete_witnesses(0).is_some());
    // two sites at distance e1 or e2 in L: 18 sites, 2 directions
    assert_eq!(p.entries[2].witness_count, Some(36));
}

/// True when `A ∪ N(A)` misses a whole row and a whole column, so that cutting
/// the torus there embeds the set in the plane.
fn embeds_in_plane(g: &BipartiteGraph, m: usize, n: usize, a: SiteSet) -> bool {
    let layout = crate::graph::TorusLayout::new(m, n);
    let all = a | neighborhood(g, a).unwrap();
    let (mut rows, mut cols) = (vec![false; m], vec![false; n]);
    for s in sites_in(all) {
        let (i, j) = layout.coord(s);
        rows[i] = true;
        cols[j] = true;
    }
    rows.contains(&false) && cols.contains(&false)
}

#[test]
fn lattice_lemma_on_torus_witnesses() {
    for (m, n, expect_wrapping) in [(6, 6, true), (8, 8, false)] {
        let g = build(&format!("torus:{m}x{n}"));
        let p = brute_force_profile(&g, 6).unwrap();
        let mut wrapping = 0;
        for s in 1..=6 {
            let wit = p.complete_witnesses(s).expect("enumeration is complete");
            assert!(!wit.is_empty());
            for &a in wit {
                // regular-graph identity: 4 Δ(A) = |∂(A ∪ N(A))|
                assert_eq!(torus_edge_boundary(&g, a).unwrap() as i64, 4 * p.delta(s).unwrap());
                if !embeds_in_plane(&g, m, n, a) {
                    wrapping += 1;
                    continue;
                }
                let c = lattice_classes(&g, a).unwrap();
                assert_eq!(c.n1010, 0, "{m}x{n} s={s}");
                assert_eq!(c.n1 as i64 - c.n3 as i64, 4, "{m}x{n} s={s}");
            }
        }
        assert_eq!(wrapping > 0, expect_wrapping, "{m}x{n}: {wrapping} wrapping witnesses");
    }
}

#[test]
fn spiral_numbering_on_torus() {
    let g = build("torus:6x6");
    let start = first_v(&g);
    let one = spiral_numbering(&g, start, 1).unwrap();
    assert_eq!(one, vec![start]);
    let reference = numbering_prefix_costs(&g, &spiral_numbering(&g, start, 6).unwrap()).unwrap();
    assert_eq!(reference, vec![3, 4, 5, 5, 6, 6]);
    for a in g.v_sites() {
        let num = spiral_numbering(&g, a, 6).unwrap();
        assert_eq!(numbering_prefix_costs(&g, &num).unwrap(), reference);
    }
    assert!(spiral_numbering(&g, start, 7).is_err());
    assert!(spiral_numbering(&g, 0, 3).is_err());
    let big = build("torus:8x8");
    let num = spiral_numbering(&big, first_v(&big), 12).unwrap();
    let costs = numbering_prefix_costs(&big, &num).unwrap();
    for (k, c) in costs.iter().enumerate() {
        assert_eq!(*c, torus_delta(k + 1));
    }
}

#[test]
fn progression_flags() {
    let g = build("torus:8x8");
    let alpha = Alpha::new(7, 10).unwrap();
    let num = spiral_numbering(&g, first_v(&g), 12).unwrap();
    let prog = numbering_prefixes(&num);
    let delta = |s: usize| Some(torus_delta(s));
    let f = progression_check(&g, &prog, alpha, 3, delta);
    assert_eq!(
        f,
        ProgressionFlags {
            valid: true,
            nested: true,
            isoperimetric: Some(true),
            alpha_bounded: Some(true),
        }
    );
    // step to a suboptimal pair of far-apart sites
    let a = prog[1];
    let far = g
        .v_sites()
        .find(|&s| set_cost(&g, a | 1u128 << s).unwrap() == 6)
        .unwrap();
    let bad = vec![0, a, a | 1u128 << far];
    let f = progression_check(&g, &bad, alpha, 3, delta);
    assert!(f.valid && f.nested);
    assert_eq!(f.isoperimetric, Some(false));
    // removing an element is still a valid progression, but not nested
    let back = vec![prog[2], prog[1]];
    let f = progression_check(&g, &back, alpha, 3, delta);
    assert!(f.valid && !f.nested);
    // jumps of two elements are invalid
    let f = progression_check(&g, &[prog[0], prog[2]], alpha, 3, delta);
    assert!(!f.valid);
    // unknown sizes leave the flag undecided
    let f = progression_check(&g, &prog, alpha, 3, |s| (s < 5).then(|| torus_delta(s)));
    assert_eq!(f.isoperimetric, None);
}

#[test]
fn numbering_searches() {
    let g = build("torus:6x6");
    let p = brute_force_profile(&g, 6).unwrap();
    let delta = |s: usize| p.delta(s);
    let found = find_numbering(&g, Some(first_v(&g)), 6, delta, 100_000).unwrap();
    let num = found.found().expect("torus has spiral numberings").clone();
    assert_eq!(num[0], first_v(&g));
    assert_eq!(numbering_prefix_costs(&g, &num).unwrap(), vec![3, 4, 5, 5, 6, 6]);
    // beyond the profile the search cannot certify optimality
    assert_eq!(
        find_numbering(&g, None, 7, delta, 100_000).unwrap(),
        SearchOutcome::NotFound
    );
    let tiny = find_numbering(&g, None, 6, delta, 1).unwrap();
    assert_eq!(tiny, SearchOutcome::BudgetExhausted);
    // nested progression from ∅ to an optimal 2x2 block, and a refusal
    let block = set_of(spiral_numbering(&g, first_v(&g), 4).unwrap());
    let prog = nested_progression(&g, 0, block, delta, 10_000).unwrap();
    assert_eq!(prog.found().unwrap().len(), 5);
    assert!(nested_progression(&g, block, 0, delta, 10).is_err());
}

#[test]
fn doubled_torus_seeds() {
    let g = build("doubled(torus:8x8)");
    let s = seed_set(&g, SeedType::I, 0, (3, 3), 1).unwrap();
    assert_eq!((s.size, s.cost), (5, 8));
    let s0 = seed_set(&g, SeedType::IV, 1, (3, 3), 0).unwrap();
    assert_eq!(s0.size, 3);
    assert_eq!(s0.cells.len(), 3);
    for (t, k, size) in [
        (SeedType::I, 1, 5),
        (SeedType::II, 0, 6),
        (SeedType::IIIa, 1, 8),
        (SeedType::IIIb, 1, 8),
        (SeedType::IV, 1, 10),
        (SeedType::I, 2, 13),
    ] {
        for rot in 0..4 {
            let x = seed_set(&g, t, rot, (2, 5), k).unwrap();
            assert_eq!(x.size, size);
            assert_eq!(x.cost, doubled_torus_delta(size), "{t:?} rot {rot}");
        }
    }
    assert!(matches!(
        seed_set(&g, SeedType::I, 0, (0, 0), 3),
        Err(Error::Precondition(_))
    ));
    assert!(seed_set(&build("torus:6x6"), SeedType::I, 0, (0, 0), 0).is_err());
}

#[test]
fn connecting_progressions_between_seed_types() {
    let g = build("doubled(torus:8x8)");
    let alpha = Alpha::new(7, 10).unwrap();
    let progs = obs_progressions(&g, 2).unwrap();
    assert_eq!(progs.len(), 4);
    let sizes: Vec<(usize, usize)> = progs.iter().map(|p| (p.from.size, p.to.size)).collect();
    assert_eq!(sizes, vec![(5, 6), (6, 8), (8, 10), (10, 13)]);
    for p in &progs {
        let f = progression_check(&g, &p.steps, alpha, 4, |s| Some(doubled_torus_delta(s)));
        assert!(f.valid && f.nested, "{}", p.label);
        assert_eq!(f.isoperimetric, Some(true), "{}", p.label);
        assert_eq!(p.steps.first(), Some(&p.from.set));
        assert_eq!(p.steps.last(), Some(&p.to.set));
    }
    assert!(obs_progressions(&g, 1).is_err());
}

#[test]
fn profile_rows_for_csv() {
    let g = build("torus:6x6");
    let p = brute_force_profile(&g, 2).unwrap();
    let rows = p.rows();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].provenance, "brute-force");
    assert_eq!(rows[2].witness_count, Some(36));
    let c = ClosedFormFamily::Torus { m: 6, n: 6 }.profile(2).unwrap();
    assert_eq!(c.rows()[1].provenance, "closed-form:torus");
    assert_eq!(c.rows()[1].witness_count, None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brute_force_is_a_lower_bound(
        nu in 2usize..7, nv in 2usize..8, p in 0.3f64..0.9, seed in 0u64..1000,
        probes in proptest::collection::vec(any::<u16>(), 20),
    ) {
        let Ok(g) = random_bipartite(nu, nv, p, seed) else { return Ok(()) };
        let prof = brute_force_profile(&g, nv).unwrap();
        prop_assert_eq!(prof.delta(0), Some(0));
        let min_deg = g.v_sites().map(|v| g.degree(v)).min().unwrap() as i64;
        prop_assert_eq!(prof.delta(1), Some(min_deg - 1));
        let vs: Vec<usize> = g.v_sites().collect();
        for bits in probes {
            let a = set_of(vs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &v)| v));
            let c = set_cost(&g, a).unwrap();
            prop_assert!(prof.delta(a.count_ones() as usize).unwrap() <= c);
        }
        for e in &prof.entries {
            for &w in &e.witnesses {
                prop_assert_eq!(set_cost(&g, w).unwrap(), e.delta);
            }
        }
    }
}
