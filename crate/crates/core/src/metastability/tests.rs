use proptest::prelude::*;

use super::*;
use crate::configspace::{is_independent, u_mask, v_mask, ConfigurationSpace, ModelParams};
use crate::exponent::{Alpha, AsymptoticExponent, Rational};
use crate::graph::{BipartiteGraph, GraphSpec};
use crate::isoperimetry::{brute_force_profile, set_cost, sites_in};
use crate::potential::SymbolicNetwork;

fn build(spec: &str) -> BipartiteGraph {
    spec.parse::<GraphSpec>().unwrap().build().unwrap()
}

fn alpha(p: i64, q: i64) -> Alpha {
    Alpha::new(p, q).unwrap()
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

#[test]
fn torus_critical_sizes_at_seven_tenths() {
    let g = build("torus:6x6");
    let p = brute_force_profile(&g, 10).unwrap();
    let a = analyze_profile(&p, alpha(7, 10), Some(g.n_u()), ClosedFormFamily::detect(&g)).unwrap();
    assert_eq!(a.s_star, 3);
    assert_eq!(a.delta_star, 5);
    assert_eq!(a.g(1), Some(r(3, 1)));
    assert_eq!(a.g(2), Some(r(33, 10)));
    assert_eq!(a.g(3), Some(r(36, 10)));
    assert_eq!(a.g(4), Some(r(29, 10)));
    assert!(a.unique_max);
    assert_eq!(a.s_tilde, 9);
    assert_eq!(a.ell_star, Some(2));
    assert_eq!(a.t_star, Some(18 - 3 - 5));
    assert_eq!(a.default_kappa(), 1);
}

/// Independent scan of the definitions, used as an oracle.
fn oracle(values: &[i64], a: Rational) -> Option<(usize, usize)> {
    let g = |s: usize| Rational::from_integer(values[s]) - a * Rational::from_integer(s as i64 - 1);
    for t in 2..values.len() {
        let best = (1..t).map(g).max().unwrap();
        let s = (1..t).find(|&s| g(s) == best).unwrap();
        if Rational::from_integer(values[t]) <= a * Rational::from_integer(t as i64) {
            return Some((s, t));
        }
    }
    None
}

#[test]
fn lattice_sizes_match_the_closed_form_lemmas() {
    for (p, q) in [(7, 10), (11, 20), (2, 5), (3, 10), (4, 9)] {
        let al = alpha(p, q);
        let sq = square_lattice_analysis(al).unwrap();
        let pred = torus_critical_size(al);
        assert!(lemma_agrees(&pred, &sq), "torus lemma at {p}/{q}");
        assert!(!pred.tie_reported());
        let db = doubled_lattice_analysis(al).unwrap();
        let pred = doubled_torus_critical_size(al);
        if (p, q) != (2, 5) {
            assert!(lemma_agrees(&pred, &db), "doubled lemma at {p}/{q}");
        }
    }
    let expected = [((7, 10), 3, 4), ((11, 20), 3, 7), ((3, 10), 13, 22), ((4, 9), 7, 11)];
    for ((p, q), t, d) in expected {
        assert_eq!(square_lattice_analysis(alpha(p, q)).unwrap().s_star, t);
        assert_eq!(doubled_lattice_analysis(alpha(p, q)).unwrap().s_star, d);
    }
    // 2/5 ties on the doubled lattice
    let db = doubled_lattice_analysis(alpha(2, 5)).unwrap();
    assert_eq!(db.maximizers, vec![11, 16]);
    assert!(lemma_agrees(&doubled_torus_critical_size(alpha(2, 5)), &db));
}

#[test]
fn half_is_a_tie_case() {
    let sq = square_lattice_analysis(alpha(1, 2)).unwrap();
    assert_eq!(sq.maximizers, vec![3, 5, 7]);
    assert!(!sq.unique_max);
    let pred = torus_critical_size(alpha(1, 2));
    assert!(pred.tie_reported());
    assert!(lemma_agrees(&pred, &sq));
    let db = doubled_lattice_analysis(alpha(1, 2)).unwrap();
    assert_eq!(db.maximizers, vec![7, 9, 11]);
    assert!(lemma_agrees(&doubled_torus_critical_size(alpha(1, 2)), &db));
    let third = square_lattice_analysis(alpha(1, 3)).unwrap();
    assert_eq!(third.maximizers, vec![7, 10, 13]);
}

#[test]
fn lattice_analysis_agrees_with_oracle_scan() {
    for (p, q) in [(7, 10), (11, 20), (3, 10), (4, 9), (2, 5)] {
        let al = alpha(p, q);
        let sq = square_lattice_analysis(al).unwrap();
        assert_eq!(oracle(&sq.values, al.value()), Some((sq.s_star, sq.s_tilde)));
        let db = doubled_lattice_analysis(al).unwrap();
        assert_eq!(oracle(&db.values, al.value()), Some((db.s_star, db.s_tilde)));
    }
}

#[test]
fn even_cycle_sizes() {
    let g = build("cycle:8");
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    for (al, s_tilde) in [(alpha(1, 2), 2), (alpha(3, 10), 4), (alpha(7, 10), 2)] {
        let a = analyze_profile(&p, al, Some(g.n_u()), None).unwrap();
        assert_eq!(a.s_star, 1);
        assert_eq!(a.delta_star, 1);
        assert_eq!(a.s_tilde, s_tilde);
        assert!(a.unique_max);
    }
}

#[test]
fn missing_s_tilde_is_a_precondition_error() {
    // Δ(s) = s + 1 never drops to αs
    let values: Vec<i64> = (0..10).map(|s| if s == 0 { 0 } else { s + 1 }).collect();
    assert!(critical_analysis(&values, alpha(1, 2), None).is_err());
    assert!(critical_analysis(&[0], alpha(1, 2), None).is_err());
}

#[test]
fn torus_gate_has_the_closed_form_count() {
    let g = build("torus:6x6");
    let al = alpha(7, 10);
    let p = brute_force_profile(&g, 10).unwrap();
    let a = analyze_profile(&p, al, Some(g.n_u()), ClosedFormFamily::detect(&g)).unwrap();
    let gate = build_gate(&g, &a, None, &p).unwrap();
    assert_eq!(gate.s_star, 3);
    assert_eq!(gate.kappa, 1);
    assert_eq!(gate.count, 4 * 36 * 2);
    assert_eq!(gate.torus_characterization, Some(true));
    assert_eq!(gate.transitions.len() as u64, gate.count);

    // oracle: count Σ |N(B) \ N(A)| over adjacent pairs directly
    let mut count = 0u64;
    for &(x, y) in &gate.pairs {
        assert_eq!((x ^ y).count_ones(), 1);
        assert!(x & !y == 0);
        assert_eq!(set_cost(&g, x).unwrap(), 4);
        assert_eq!(set_cost(&g, y).unwrap(), 5);
        let nx = crate::isoperimetry::neighborhood(&g, x).unwrap();
        let ny = crate::isoperimetry::neighborhood(&g, y).unwrap();
        count += (ny & !nx).count_ones() as u64;
    }
    assert_eq!(count, gate.count);

    let pred = crossover_prediction(&a, Some(&gate));
    assert_eq!(pred.exponent, AsymptoticExponent::new(5, -2));
    assert_eq!(pred.lambda_power, 7);
    assert_eq!(pred.lambda_bar_power, 2);
    assert_eq!(pred.gate_count, Some(288));
}

fn gate_of(spec: &str, al: Alpha) -> CriticalGate {
    let g = build(spec);
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let a = analyze_profile(&p, al, Some(g.n_u()), ClosedFormFamily::detect(&g)).unwrap();
    build_gate(&g, &a, None, &p).unwrap()
}

#[test]
fn small_gate_counts() {
    // cycle: ∅ → single site, with U keeping one of its three particles
    assert_eq!(gate_of("cycle:6", alpha(1, 2)).count, 6);
    let gl = gate_of("ladder:4", alpha(1, 2));
    assert_eq!(gl.count, 12);
    let gd = gate_of("doubled(cycle:6)", alpha(1, 2));
    assert_eq!(gd.count, 18);
}

#[test]
fn gate_transitions_are_distinct_configuration_flips() {
    let g = build("ladder:4");
    let gate = gate_of("ladder:4", alpha(1, 2));
    let space = ConfigurationSpace::enumerate(&g, 100_000).unwrap();
    let w = gate.watch(&space).unwrap();
    assert_eq!(w.transitions.len() as u64, gate.count);
    for &(x, y) in &gate.transitions {
        assert!(is_independent(&g, x) && is_independent(&g, y));
        assert_eq!((x ^ y).count_ones(), 1);
    }
}

#[test]
fn dominance_sets_follow_stationary_ratios() {
    let g = build("complete:2x3");
    let space = ConfigurationSpace::enumerate(&g, 1000).unwrap();
    let al = alpha(1, 2);
    let rates = ModelParams::new(1e6, al).unwrap().rates();
    let lp = space.log_pi(&rates);
    for a in 0..space.len() {
        let (j, jm) = dominance_sets(&space, a, al);
        for x in 0..space.len() {
            if x == a {
                continue;
            }
            assert_eq!(j.contains(&x), lp[x] >= lp[a] - 1e-9, "J({a}) at {x}");
            assert_eq!(jm.contains(&x), lp[x] > lp[a] + 1e-9, "J-({a}) at {x}");
        }
    }
}

#[test]
fn no_trap_certificates() {
    let al = alpha(1, 2);
    for spec in ["complete:2x3", "cycle:6", "ladder:4"] {
        let g = build(spec);
        let space = ConfigurationSpace::enumerate(&g, 100_000).unwrap();
        let rep = no_trap_certificate(&space, al).unwrap();
        assert_eq!(rep.status, NoTrapStatus::Certified, "{spec}: {:?}", rep.violations);
        assert_eq!(rep.states_checked, space.len() - 2);
    }
    let g = build("cycle:6");
    let space = ConfigurationSpace::enumerate(&g, 1000).unwrap();
    assert_eq!(space.len(), 18);
    let g = build("path:6");
    let space = ConfigurationSpace::enumerate(&g, 1000).unwrap();
    let rep = no_trap_certificate(&space, al).unwrap();
    assert_eq!(rep.status, NoTrapStatus::Refuted);
    assert!(!rep.violations.is_empty());
}

#[test]
fn standard_path_runs_from_u_to_v() {
    let g = build("cycle:8");
    let numbering: Vec<usize> = g.v_sites().collect();
    let path = standard_path(&g, &numbering).unwrap();
    assert_eq!(path.configs[0], u_mask(&g));
    assert_eq!(path.configs[*path.backbone.last().unwrap()], v_mask(&g));
    assert_eq!(path.backbone.len(), numbering.len() + 1);
    assert_eq!(path.configs.len(), g.n_u() + g.n_v() + 1);
    for w in path.configs.windows(2) {
        assert!(is_independent(&g, w[1]));
        assert_eq!((w[0] ^ w[1]).count_ones(), 1);
    }
    assert!(standard_path(&g, &[numbering[0], numbering[0]]).is_err());
    assert!(standard_path(&g, &[0]).is_err());
}

#[test]
fn standard_path_attains_the_escape_bottleneck_on_a_cycle() {
    let g = build("cycle:6");
    let al = alpha(1, 2);
    let space = ConfigurationSpace::enumerate(&g, 1000).unwrap();
    let net = SymbolicNetwork::new(&space, al);
    let (ju, _) = dominance_sets(&space, space.u_index(), al);
    let psi = net.bottleneck(&[space.u_index()], &ju).exponent.unwrap();
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let a = analyze_profile(&p, al, Some(g.n_u()), None).unwrap();
    let numbering = crate::isoperimetry::find_numbering(&g, None, a.s_tilde, |s| p.delta(s), 10_000)
        .unwrap()
        .found()
        .cloned()
        .unwrap();
    let path = standard_path(&g, &numbering).unwrap();
    assert_eq!(path.critical_exponent(&g, al).unwrap().cmp_value(&psi, al), std::cmp::Ordering::Equal);
    let pred = progression_resistance_exponent(&p.values(), a.s_tilde, al, g.n_u()).unwrap();
    assert_eq!(pred.cmp_value(&psi, al), std::cmp::Ordering::Equal);
}

#[test]
fn cycle_crossover_prediction() {
    let g = build("cycle:6");
    let al = alpha(1, 2);
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let a = analyze_profile(&p, al, Some(g.n_u()), None).unwrap();
    let gate = build_gate(&g, &a, None, &p).unwrap();
    let pred = crossover_prediction(&a, Some(&gate));
    assert_eq!(pred.exponent, AsymptoticExponent::new(1, 0));
    let v = pred.sharp_value(1000.0, al).unwrap();
    assert!((v - 1000.0 / 6.0).abs() < 1e-9);
    assert!((pred.order_value(1000.0, al) - 1000.0).abs() < 1e-9);
    assert!(crossover_prediction(&a, None).sharp_prefactor.is_none());
}

#[test]
fn kappa_must_stay_below_inverse_alpha() {
    let g = build("cycle:6");
    let al = alpha(1, 2);
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let a = analyze_profile(&p, al, Some(g.n_u()), None).unwrap();
    assert!(build_gate(&g, &a, Some(2), &p).is_err());
    assert!(build_gate(&g, &a, Some(0), &p).is_ok());
}

#[test]
fn torus_hypotheses_hold() {
    let g = build("torus:6x6");
    let al = alpha(7, 10);
    let p = brute_force_profile(&g, 10).unwrap();
    let rep = check_hypotheses(&g, al, &p, None, HypothesisBudgets::default());
    for (name, res) in rep.entries() {
        assert!(res.holds(), "{name}: {:?}", res);
    }
    assert_eq!(rep.s_star, Some(3));
    assert_eq!(rep.s_tilde, Some(9));
}

#[test]
fn path_flags_a_trap() {
    let g = build("path:6");
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let rep = check_hypotheses(&g, alpha(1, 2), &p, None, HypothesisBudgets::default());
    assert!(rep.flags.iter().any(|f| f == "absence of traps is not satisfied"));
}

#[test]
fn cycle_hypotheses_and_probe() {
    let g = build("cycle:8");
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let rep = check_hypotheses(&g, alpha(1, 2), &p, None, HypothesisBudgets::default());
    assert!(rep.all_hold(), "{:?}", rep.entries());
    let probe = rep.h4d_probe.unwrap();
    assert_eq!(probe.status, HypothesisStatus::Verified, "{}", probe.evidence);
    assert_eq!(rep.no_trap.unwrap().status, NoTrapStatus::Certified);
}

#[test]
fn h0_fails_when_u_dominates() {
    let g = build("complete:5x2");
    let p = brute_force_profile(&g, g.n_v()).unwrap();
    let rep = check_hypotheses(&g, alpha(1, 2), &p, None, HypothesisBudgets::default());
    assert_eq!(rep.h0.status, HypothesisStatus::Refuted);
}

#[test]
fn profile_source_parsing() {
    for s in ["auto", "brute-force", "closed-form"] {
        assert_eq!(s.parse::<ProfileSource>().unwrap().to_string(), s);
    }
    assert!("exact".parse::<ProfileSource>().is_err());
    let g = build("cycle:6");
    assert!(profile_for(&g, None, ProfileSource::ClosedForm).is_ok() || ClosedFormFamily::detect(&g).is_none());
    let t = build("torus:6x6");
    let auto = profile_for(&t, Some(6), ProfileSource::Auto).unwrap();
    assert_eq!(auto.values(), vec![0, 3, 4, 5, 5, 6, 6]);
}

#[test]
fn torus_gate_families_sizes() {
    let (rects, ext) = torus_gate_families(6, 6, 2);
    assert!(!rects.is_empty());
    for a in rects.iter().chain(ext.iter()) {
        assert!(!sites_in(*a).is_empty());
    }
}

proptest! {
    #[test]
    fn analysis_matches_definitions(
        steps in prop::collection::vec(0i64..3, 1..20),
        num in 1i64..10,
    ) {
        let al = alpha(num, 10);
        // non-decreasing Δ with Δ(0) = 0, then a final drop to 0
        let mut values = vec![0i64];
        for s in steps {
            let last = *values.last().unwrap();
            let floor = if values.len() == 1 { 1 } else { 0 };
            values.push(last + s + floor);
        }
        values.push(0);
        let a = critical_analysis(&values, al, None).unwrap();
        let oracle_pair = oracle(&values, al.value()).unwrap();
        prop_assert_eq!((a.s_star, a.s_tilde), oracle_pair);
        for s in 1..=a.s_tilde {
            prop_assert!(a.g(s).unwrap() <= a.g_star);
        }
        for t in a.s_star + 1..a.s_tilde {
            prop_assert!(Rational::from_integer(values[t]) > al.value() * Rational::from_integer(t as i64));
        }
    }
}

#[test]
fn critical_pair_conditions_hold_on_small_gates() {
    for (spec, a) in [
        ("cycle:6", alpha(1, 2)),
        ("complete:2x3", alpha(1, 2)),
        ("ladder:4", alpha(7, 10)),
        ("ladder:4", alpha(1, 2)),
    ] {
        let g = build(spec);
        let p = brute_force_profile(&g, g.n_v()).unwrap();
        let an = analyze_profile(&p, a, Some(g.n_u()), None).unwrap();
        let gate = build_gate(&g, &an, None, &p).unwrap();
        let space = ConfigurationSpace::enumerate(&g, 1 << 16).unwrap();
        let rep = critical_pair_check(&space, &gate, a).unwrap();
        assert!(rep.holds(), "{spec} at {a:?}: {:?}", rep.failures);
    }
}
