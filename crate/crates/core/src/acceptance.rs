//! The acceptance suite: thirteen end-to-end checks, each reported as pass or fail.

use std::time::Instant;

use serde::Serialize;

use crate::configspace::{u_mask, v_mask, ConfigurationSpace, ModelParams, Rates};
use crate::dynamics::{coupled_simulate, sample_crossover, HitOptions, TransitionKernel};
use crate::error::{Error, Result};
use crate::exponent::Alpha;
use crate::graph::{random_bipartite, BipartiteGraph, GraphSpec};
use crate::isoperimetry::{brute_force_profile, ClosedFormFamily};
use crate::metastability::{
    analyze_profile, build_gate, doubled_lattice_analysis, doubled_torus_critical_size,
    dominance_sets, gate_statistics, lemma_agrees, no_trap_certificate, square_lattice_analysis,
    torus_critical_size, NoTrapStatus,
};
use crate::potential::{
    check_voltage_bounds, cut_upper_bound, greedy_paths, path_lower_bound, sandwich,
    ElectricNetwork, SymbolicNetwork,
};
use crate::stats::{ks_exponential, mean_var};

/// Sample sizes, seeds and thresholds of the statistical criteria.
#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub ks_samples: usize,
    /// The KS test passes when `p > ks_threshold`.
    pub ks_threshold: f64,
    pub gate_samples: usize,
    /// The chi-square test passes when `p > chi_square_threshold`.
    pub chi_square_threshold: f64,
    pub single_crossing_min: f64,
    pub path_samples: usize,
    pub coupled_runs: usize,
    pub coupled_steps: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            seed: 42,
            ks_samples: 2000,
            ks_threshold: 0.01,
            gate_samples: 3000,
            chi_square_threshold: 0.01,
            single_crossing_min: 0.95,
            path_samples: 2000,
            coupled_runs: 100,
            coupled_steps: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [&str; 13] = [
    "complete bipartite resistance equals the series law",
    "even cycle sharp mean lambda/6",
    "cyclic ladder sharp mean lambda^2/12",
    "exponential law of the crossover time on the 6-cycle",
    "odd path crossover is a sum of three exponentials",
    "single uniform gate passage on the 6-cycle",
    "isoperimetric brute force equals closed forms",
    "torus 6x6 gate count 288 and gate characterisation",
    "critical sizes match the lattice lemmas",
    "potential-theory identities on random instances",
    "no-trap certificates",
    "monotone coupling keeps the order",
    "symbolic and numeric critical resistance orders agree",
];

fn build(spec: &str) -> Result<BipartiteGraph> {
    spec.parse::<GraphSpec>()?.build()
}

fn alpha(p: i64, q: i64) -> Alpha {
    Alpha::new(p, q).expect("valid constant")
}

fn network(g: &BipartiteGraph, lambda: f64, a: Alpha) -> Result<ElectricNetwork> {
    let space = ConfigurationSpace::enumerate(g, 1 << 20)?;
    ElectricNetwork::new(space, ModelParams::new(lambda, a)?)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `R(u, v)` on `K_{m,n}` by the series law over the two one-sided chains.
pub fn complete_bipartite_series(m: usize, n: usize, lambda: f64, lambda_bar: f64) -> f64 {
    let gamma = (1.0 + lambda) * m as f64 + (1.0 + lambda_bar) * n as f64;
    let z: f64 = (0..=m).map(|i| binom(m, i) * lambda.powi(i as i32)).sum::<f64>()
        + (1..=n).map(|j| binom(n, j) * lambda_bar.powi(j as i32)).sum::<f64>();
    let su: f64 = (1..=m)
        .map(|i| 1.0 / (i as f64 * binom(m, i) * lambda.powi(i as i32)))
        .sum();
    let sv: f64 = (1..=n)
        .map(|j| 1.0 / (j as f64 * binom(n, j) * lambda_bar.powi(j as i32)))
        .sum();
    z * gamma * (su + sv)
}

fn c1() -> Result<(bool, String)> {
    let a = alpha(1, 2);
    let mut worst: f64 = 0.0;
    for (m, n) in [(2, 3), (3, 4)] {
        for lambda in [10.0, 100.0] {
            let net = network(&build(&format!("complete:{m}x{n}"))?, lambda, a)?;
            let s = net.space();
            let r = net.effective_resistance(&[s.u_index()], &[s.v_index()])?;
            worst = worst.max(rel(r, complete_bipartite_series(m, n, lambda, a.lambda_bar(lambda))));
        }
    }
    Ok((worst <= 1e-9, format!("max relative error {worst:.3e}")))
}

fn mean_ratio(spec: &str, a: Alpha, lambda: f64, scale: f64) -> Result<f64> {
    let net = network(&build(spec)?, lambda, a)?;
    let s = net.space();
    let t = net.mean_hitting_time(s.u_index(), &[s.v_index()])? / net.gamma();
    Ok(t / scale)
}

fn c2() -> Result<(bool, String)> {
    let lo = mean_ratio("cycle:6", alpha(1, 2), 1e2, 1e2 / 6.0)?;
    let hi = mean_ratio("cycle:6", alpha(1, 2), 1e4, 1e4 / 6.0)?;
    let ok = (0.95..=1.05).contains(&hi) && (hi - 1.0).abs() < (lo - 1.0).abs();
    Ok((ok, format!("ratio {lo:.6} at 1e2, {hi:.6} at 1e4")))
}

fn c3() -> Result<(bool, String)> {
    let l: f64 = 1e3;
    let r = mean_ratio("ladder:4", alpha(7, 10), l, l * l / 12.0)?;
    let r_half = mean_ratio("ladder:4", alpha(1, 2), l, l * l / 12.0)?;
    Ok((
        (0.9..=1.1).contains(&r),
        format!("ratio {r:.6} at alpha 7/10 (alpha 1/2 gives {r_half:.6})"),
    ))
}

/// Crossover samples `u → v` and the number of timeouts.
fn crossover_samples(
    spec: &str,
    a: Alpha,
    lambda: f64,
    n: usize,
    seed: u64,
    opts: &HitOptions,
) -> Result<(Vec<crate::dynamics::HittingSample>, usize, ConfigurationSpace)> {
    let g = build(spec)?;
    let space = ConfigurationSpace::enumerate(&g, 1 << 20)?;
    let kernel = TransitionKernel::build(&space, &ModelParams::new(lambda, a)?.rates());
    let mut targets = vec![false; space.len()];
    targets[space.v_index()] = true;
    let out = sample_crossover(&kernel, space.u_index(), &targets, n, seed, opts)?;
    let hits: Vec<_> = out.iter().filter_map(|o| o.hit().cloned()).collect();
    let timeouts = out.len() - hits.len();
    Ok((hits, timeouts, space))
}

fn c4(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let opts = HitOptions {
        embedded_clock: true,
        ..HitOptions::default()
    };
    let (hits, timeouts, _) = crossover_samples("cycle:6", alpha(1, 2), 1e3, cfg.ks_samples, cfg.seed, &opts)?;
    let xs: Vec<f64> = hits.iter().map(|h| h.t_hat).collect();
    let ks = ks_exponential(&xs)?;
    Ok((
        timeouts == 0 && ks.p_value > cfg.ks_threshold,
        format!("n {} D {:.4} p {:.4} timeouts {timeouts}", ks.n, ks.statistic, ks.p_value),
    ))
}

fn c5(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let opts = HitOptions {
        embedded_clock: true,
        ..HitOptions::default()
    };
    let (hits, timeouts, _) = crossover_samples("path:6", alpha(1, 2), 1e3, cfg.path_samples, cfg.seed, &opts)?;
    let xs: Vec<f64> = hits.iter().map(|h| h.t_hat).collect();
    let (mean, var, _) = mean_var(&xs);
    let ks = ks_exponential(&xs)?;
    let ok = timeouts == 0
        && (mean - 3.0).abs() <= 0.15 * 3.0
        && (var - 3.0).abs() <= 0.25 * 3.0
        && ks.p_value < 0.01;
    Ok((ok, format!("mean {mean:.4} variance {var:.4} KS p {:.3e}", ks.p_value)))
}

fn c6(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    // at alpha 1/2 and lambda 1e3 a backtrack through the gate still has
    // probability near 2 lambda^(-alpha) per visit, so the single-crossing
    // fraction sits near 0.88; alpha 7/10 brings it to about 0.97
    let a = alpha(7, 10);
    let g = build("cycle:6")?;
    let profile = brute_force_profile(&g, g.n_v())?;
    let analysis = analyze_profile(&profile, a, Some(g.n_u()), None)?;
    let gate = build_gate(&g, &analysis, None, &profile)?;
    let space = ConfigurationSpace::enumerate(&g, 1 << 20)?;
    let watch = gate.watch(&space)?;
    let opts = HitOptions {
        watch: Some(watch.clone()),
        ..HitOptions::default()
    };
    let (hits, timeouts, _) = crossover_samples("cycle:6", a, 1e3, cfg.gate_samples, cfg.seed, &opts)?;
    let st = gate_statistics(&hits, &watch);
    let ok = timeouts == 0
        && watch.transitions.len() == 6
        && st.single_crossing_fraction >= cfg.single_crossing_min
        && st.p_value > cfg.chi_square_threshold;
    Ok((
        ok,
        format!(
            "alpha 7/10, {} transitions, single crossing {:.4}, chi-square {:.3} (df {}) p {:.4}",
            watch.transitions.len(),
            st.single_crossing_fraction,
            st.chi_square,
            st.degrees_of_freedom,
            st.p_value
        ),
    ))
}

fn c7() -> Result<(bool, String)> {
    let cases: [(&str, usize); 8] = [
        ("torus:6x6", 6),
        ("doubled(torus:5x5)", 6),
        ("hypercube:2", 2),
        ("hypercube:3", 4),
        ("hypercube:4", 8),
        ("hypercube:5", 16),
        ("cycle:12", 5),
        ("doubled(cycle:10)", 5),
    ];
    let mut failures = Vec::new();
    for (spec, s_max) in cases {
        let g = build(spec)?;
        let fam = ClosedFormFamily::detect(&g)
            .ok_or_else(|| Error::Precondition(format!("no closed form detected for {spec}")))?;
        let s_max = s_max.min(fam.max_s());
        let closed = fam.profile(s_max)?.values();
        let brute = brute_force_profile(&g, s_max)?.values();
        if closed != brute {
            failures.push(format!("{spec}: {brute:?} vs {closed:?}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} instances agree", cases.len())
    } else {
        failures.join("; ")
    };
    Ok((failures.is_empty(), detail))
}

fn c8() -> Result<(bool, String)> {
    let a = alpha(7, 10);
    let g = build("torus:6x6")?;
    let profile = brute_force_profile(&g, 10)?;
    let analysis = analyze_profile(&profile, a, Some(g.n_u()), ClosedFormFamily::detect(&g))?;
    let gate = build_gate(&g, &analysis, None, &profile)?;
    let ok = gate.count == 288 && gate.torus_characterization == Some(true);
    Ok((
        ok,
        format!(
            "gate count {}, |A| {}, |B| {}, characterisation {:?}",
            gate.count,
            gate.family_a.len(),
            gate.family_b.len(),
            gate.torus_characterization
        ),
    ))
}

fn c9() -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, q) in [(7, 10), (11, 20), (2, 5), (3, 10)] {
        let a = alpha(p, q);
        let sq = square_lattice_analysis(a)?;
        let db = doubled_lattice_analysis(a)?;
        let tp = torus_critical_size(a);
        let dp = doubled_torus_critical_size(a);
        let agree = lemma_agrees(&tp, &sq) && lemma_agrees(&dp, &db);
        ok &= agree;
        parts.push(format!(
            "{p}/{q}: s* {} / {}{}",
            sq.s_star,
            db.s_star,
            match dp.case {
                Some(c) => format!(" (case {c})"),
                None => " (tie)".to_string(),
            }
        ));
    }
    Ok((ok, parts.join(", ")))
}

/// Random connected bipartite graphs with at most 200 configurations.
pub fn random_instances(count: usize) -> Result<Vec<BipartiteGraph>> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count {
        let nu = 2 + (seed as usize % 3);
        let nv = 2 + (seed as usize / 3 % 3);
        let g = random_bipartite(nu, nv, 0.55, seed)?;
        seed += 1;
        let space = ConfigurationSpace::enumerate(&g, 1 << 20)?;
        if space.len() <= 200 {
            out.push(g);
        }
    }
    Ok(out)
}

/// Largest relative deviation in the identity suite, and the number of inequality violations.
pub fn identity_suite(g: &BipartiteGraph, lambda: f64, a: Alpha) -> Result<(f64, usize)> {
    let net = network(g, lambda, a)?;
    let s = net.space();
    let (u, v) = (s.u_index(), s.v_index());
    let b = [v];
    let mut dev: f64 = 0.0;
    let mut violations = 0;

    let t_first = net.mean_hitting_times_first_step(&b)?;
    let empty = s.index_of(0).ok_or_else(|| Error::Numerical("empty state missing".into()))?;
    for x in [u, empty] {
        let green = net.green_function(x, &b)?;
        let t = net.mean_hitting_time(x, &b)?;
        dev = dev.max(rel(green.iter().sum(), t)).max(rel(t, t_first[x]));
        for y in (0..net.len()).filter(|&y| y != v).step_by(7) {
            let col = net.green_column_first_step(y, &b)?;
            dev = dev.max(rel(col[x], green[y]));
        }
    }

    let others: Vec<usize> = (0..net.len()).filter(|&x| x != v).collect();
    for (i, &x) in others.iter().enumerate().step_by(3) {
        let y = others[(i * 5 + 1) % others.len()];
        if x == y {
            continue;
        }
        let gx = net.green_function(x, &b)?;
        let gy = net.green_function(y, &b)?;
        dev = dev.max(((net.log_pi(x) + gx[y].ln()) - (net.log_pi(y) + gy[x].ln())).abs());
        let rx = net.log_effective_resistance(&[x], &b)?;
        let ry = net.log_effective_resistance(&[y], &b)?;
        let wy = net.voltage(&[x], &b)?[y];
        let wx = net.voltage(&[y], &b)?[x];
        dev = dev.max(((rx + wy.ln()) - (ry + wx.ln())).abs());
    }

    for x in (0..net.len()).filter(|&x| x != v).step_by(5) {
        let p1 = net.escape_probability(x, &b)?;
        let p2 = net.escape_probability_one_step(x, &b)?;
        dev = dev.max(rel(p1, p2));
    }

    if !sandwich(&net, &[u], &b)?.holds {
        violations += 1;
    }
    violations += check_voltage_bounds(&net, &[u], &b)?.total_violations();

    let c = -net.log_effective_resistance(&[u], &b)?;
    let mut inside = vec![false; net.len()];
    inside[u] = true;
    let cut = cut_upper_bound(&net, &inside)?;
    if c > cut.log_cut_conductance + 1e-9 {
        violations += 1;
    }
    let paths = greedy_paths(&net, &[u], &b, 4);
    if path_lower_bound(&net, &[u], &b, &paths)? > c + 1e-9 {
        violations += 1;
    }
    Ok((dev, violations))
}

fn c10() -> Result<(bool, String)> {
    let a = alpha(2, 5);
    let mut dev: f64 = 0.0;
    let mut violations = 0;
    let instances = random_instances(20)?;
    for (k, g) in instances.iter().enumerate() {
        let (d, v) = identity_suite(g, 2.0 + k as f64, a)?;
        dev = dev.max(d);
        violations += v;
    }
    Ok((
        dev <= 1e-9 && violations == 0,
        format!("{} instances, max deviation {dev:.3e}, {violations} violations", instances.len()),
    ))
}

fn c11() -> Result<(bool, String)> {
    let a = alpha(1, 2);
    let mut parts = Vec::new();
    let mut ok = true;
    for (spec, want) in [
        ("complete:2x3", NoTrapStatus::Certified),
        ("cycle:6", NoTrapStatus::Certified),
        ("ladder:4", NoTrapStatus::Certified),
        ("path:6", NoTrapStatus::Refuted),
    ] {
        let space = ConfigurationSpace::enumerate(&build(spec)?, 1 << 20)?;
        let rep = no_trap_certificate(&space, a)?;
        ok &= rep.status == want;
        if want == NoTrapStatus::Refuted {
            ok &= !rep.violations.is_empty();
        }
        let witness = rep
            .violations
            .first()
            .map(|w| format!(" trap {}", w.config))
            .unwrap_or_default();
        parts.push(format!("{spec} {:?}{witness}", rep.status));
    }
    Ok((ok, parts.join(", ")))
}

fn c12(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let mut violations = 0;
    let mut runs = 0;
    for spec in ["torus:4x4", "complete:2x3"] {
        let g = build(spec)?;
        for r in 0..cfg.coupled_runs {
            // alternate the one-parameter and two-parameter couplings
            let (lower, upper) = if r % 2 == 0 {
                let p = Rates::new(5.0, 8.0)?;
                (p, p)
            } else {
                (Rates::new(6.0, 4.0)?, Rates::new(3.0, 9.0)?)
            };
            let run = coupled_simulate(&g, lower, upper, u_mask(&g), v_mask(&g), cfg.coupled_steps, cfg.seed + r as u64)?;
            violations += run.violations.len();
            runs += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{runs} runs of {} steps, {violations} violations", cfg.coupled_steps),
    ))
}

fn c13() -> Result<(bool, String)> {
    let a = alpha(1, 2);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for spec in ["cycle:6", "ladder:4", "complete:2x3"] {
        let g = build(spec)?;
        let lo = network(&g, 1e3, a)?;
        let hi = network(&g, 1e4, a)?;
        let s = lo.space();
        let u = s.u_index();
        let (ju, _) = dominance_sets(s, u, a);
        let sym = SymbolicNetwork::new(s, a)
            .bottleneck(&[u], &ju)
            .exponent
            .ok_or_else(|| Error::Numerical("J(u) unreachable".into()))?;
        // order of Ψ/Z, so subtract ln Z = w(u) ln λ - ln π(u)
        let scaled = |net: &ElectricNetwork| {
            let w = net.space().weight_exponent(u).value_f64(a);
            net.bottleneck(&[u], &ju).log_psi - (w * net.params().lambda.ln() - net.log_pi(u))
        };
        let slope = (scaled(&hi) - scaled(&lo)) / 10f64.ln();
        let d = (slope - sym.value_f64(a)).abs();
        worst = worst.max(d);
        parts.push(format!("{spec} {sym} slope {slope:.4}"));
    }
    Ok((worst <= 0.05, parts.join(", ")))
}

/// Run criterion `id` (1-based).
pub fn run_criterion(id: usize, cfg: &AcceptanceConfig) -> CriterionResult {
    let start = Instant::now();
    let out = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(cfg),
        5 => c5(cfg),
        6 => c6(cfg),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        12 => c12(cfg),
        13 => c13(),
        _ => Err(Error::InvalidParameter(format!("no acceptance criterion {id}"))),
    };
    let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        title: CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(|id| run_criterion(id, cfg)).collect()
}

impl CriterionResult {
    /// One line: `[PASS] 08 title: detail (1.2 s)`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:02} {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}
