//! One function per subcommand. Each returns the process exit code.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use clap::Args;
use hcmeta_core::acceptance::{run_criterion, AcceptanceConfig, CRITERIA};
use hcmeta_core::configspace::{config_to_json, parse_config, part_counts, ConfigurationSpace, ModelParams};
use hcmeta_core::dynamics::{sample_crossover, HitOptions, HitOutcome, TransitionKernel};
use hcmeta_core::exponent::{fmt_rational, Alpha};
use hcmeta_core::graph::BipartiteGraph;
use hcmeta_core::isoperimetry::{brute_force_profile, IsoperimetricProfile};
use hcmeta_core::metastability::{
    analyze_graph, build_gate, check_hypotheses, crossover_prediction, dominance_sets,
    gate_statistics, CriticalAnalysis, CriticalGate, HypothesisBudgets, HypothesisReport,
    ProfileSource,
};
use hcmeta_core::potential::{ElectricNetwork, SymbolicNetwork};
use hcmeta_core::stats::{ks_exponential, StatReport};
use hcmeta_core::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{load_graph, ExperimentConfig};
use crate::output::{fmt17, open, to_json_line, write_json};
use crate::Common;

pub const VERIFY_FAILED: u8 = 4;

#[derive(Args, Debug, Clone)]
pub struct Endpoints {
    /// Start configuration: u, v, empty, a hex mask (0x..) or comma separated sites.
    #[arg(long, default_value = "u")]
    pub from: String,
    /// Target configuration in the same syntax, or J for the set J(from) of
    /// configurations strictly lower than the start.
    #[arg(long, default_value = "v")]
    pub to: String,
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    /// Largest size for which Delta(s) is computed.
    #[arg(long)]
    pub s_max: Option<usize>,
    /// Profile source: auto, brute-force or closed-form.
    #[arg(long, default_value = "auto")]
    pub source: String,
    /// Progression slack kappa; defaults to ceil(1/alpha) - 1.
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Skip the hypothesis checks.
    #[arg(long)]
    pub no_hypotheses: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Discrete steps allowed per trajectory.
    #[arg(long, default_value_t = hcmeta_core::dynamics::DEFAULT_STEP_CAP)]
    pub step_cap: u64,
    /// Draw continuous times from the Poisson clock instead of steps / gamma.
    #[arg(long)]
    pub embedded_clock: bool,
    /// Kolmogorov-Smirnov test of T_hat / mean against the unit exponential law.
    #[arg(long)]
    pub ks_exponential: bool,
    #[arg(long, default_value_t = 0.01)]
    pub ks_threshold: f64,
    /// Record crossings of the critical gate and test their uniformity.
    #[arg(long)]
    pub watch_gate: bool,
    #[arg(long, default_value_t = 0.01)]
    pub chi_square_threshold: f64,
}

fn experiment(command: &str, c: &Common, samples: Option<usize>, seed: u64, options: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    ExperimentConfig {
        command: command.into(),
        graph: c.graph.clone(),
        alpha: Some(c.alpha.clone()),
        lambda: c.lambda.clone(),
        samples,
        seed,
        options,
        output: c.output.as_ref().map(|p| p.display().to_string()),
    }
    .normalize()
}

fn opts<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn lambdas(c: &Common) -> Result<Vec<f64>> {
    if c.lambda.is_empty() {
        return Err(Error::InvalidParameter("--lambda is required".into()));
    }
    Ok(c.lambda.clone())
}

fn config_value(space: &ConfigurationSpace, i: usize) -> Value {
    let x = space.state(i);
    let (nu, nv) = part_counts(space.graph(), x);
    let j = config_to_json(x);
    json!({"index": i, "hex": j.hex, "sites": j.sites, "n_u": nu, "n_v": nv})
}

pub fn enumerate(c: &Common, cap: usize) -> Result<u8> {
    let cfg = experiment("enumerate", c, None, 0, opts([("cap", cap.to_string())]))?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let space = ConfigurationSpace::enumerate(&g, cap)?;
    let log_pis: Vec<Vec<f64>> = c
        .lambda
        .iter()
        .map(|&l| Ok(space.log_pi(&ModelParams::new(l, alpha)?.rates())))
        .collect::<Result<_>>()?;
    let states: Vec<Value> = (0..space.len())
        .map(|i| {
            let mut v = config_value(&space, i);
            if !log_pis.is_empty() {
                v["log_pi"] = json!(log_pis.iter().map(|lp| lp[i]).collect::<Vec<_>>());
            }
            v
        })
        .collect();
    write_json(
        c.output.as_deref(),
        &json!({
            "config": cfg,
            "graph": g.validate(),
            "n_states": space.len(),
            "u_index": space.u_index(),
            "v_index": space.v_index(),
            "states": states,
        }),
    )?;
    Ok(0)
}

struct Ends {
    from: usize,
    to: Vec<usize>,
}

fn resolve_ends(space: &ConfigurationSpace, e: &Endpoints, alpha: Alpha) -> Result<Ends> {
    let g = space.graph();
    let index = |s: &str| -> Result<usize> {
        let x = parse_config(g, s)?;
        space
            .index_of(x)
            .ok_or_else(|| Error::InvalidParameter(format!("configuration {s} not in the space")))
    };
    let from = index(&e.from)?;
    let to = if e.to.eq_ignore_ascii_case("j") {
        let (j, _) = dominance_sets(space, from, alpha);
        if j.is_empty() {
            return Err(Error::Precondition("J(from) is empty".into()));
        }
        j
    } else {
        vec![index(&e.to)?]
    };
    if to.contains(&from) {
        return Err(Error::InvalidParameter("start lies in the target set".into()));
    }
    Ok(Ends { from, to })
}

fn ends_value(space: &ConfigurationSpace, ends: &Ends) -> Value {
    json!({
        "from": config_value(space, ends.from),
        "to": if ends.to.len() == 1 { config_value(space, ends.to[0]) } else { json!({"set": "J", "size": ends.to.len()}) },
    })
}

fn exponent_value(e: hcmeta_core::exponent::AsymptoticExponent, alpha: Alpha) -> Value {
    json!({"exponent": [e.p, e.q], "value": fmt_rational(e.value(alpha))})
}

pub fn resistance(c: &Common, e: &Endpoints, cap: usize) -> Result<u8> {
    let cfg = experiment("resistance", c, None, 0, opts([("from", e.from.clone()), ("to", e.to.clone())]))?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let space = ConfigurationSpace::enumerate(&g, cap)?;
    let ends = resolve_ends(&space, e, alpha)?;
    let sym = SymbolicNetwork::new(&space, alpha).bottleneck(&[ends.from], &ends.to);
    let mut rows = Vec::new();
    for l in lambdas(c)? {
        let net = ElectricNetwork::new(space.clone(), ModelParams::new(l, alpha)?)?;
        let log_r = net.log_effective_resistance(&[ends.from], &ends.to)?;
        let psi = net.bottleneck(&[ends.from], &ends.to);
        rows.push(json!({
            "lambda": l,
            "lambda_bar": alpha.lambda_bar(l),
            "gamma": net.gamma(),
            "log_resistance": log_r,
            "resistance": log_r.exp(),
            "log_psi": psi.log_psi,
            "log_ratio_resistance_to_psi": log_r - psi.log_psi,
        }));
    }
    write_json(
        c.output.as_deref(),
        &json!({
            "config": cfg,
            "ends": ends_value(&space, &ends),
            "n_states": space.len(),
            "symbolic_psi": sym.exponent.map(|x| exponent_value(x, alpha)),
            "symbolic_order_tie": sym.order_tie,
            "results": rows,
        }),
    )?;
    Ok(0)
}

pub fn hitting(c: &Common, e: &Endpoints, cap: usize) -> Result<u8> {
    let cfg = experiment("hitting", c, None, 0, opts([("from", e.from.clone()), ("to", e.to.clone())]))?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let space = ConfigurationSpace::enumerate(&g, cap)?;
    let ends = resolve_ends(&space, e, alpha)?;
    let mut rows = Vec::new();
    for l in lambdas(c)? {
        let net = ElectricNetwork::new(space.clone(), ModelParams::new(l, alpha)?)?;
        let steps = net.mean_hitting_time(ends.from, &ends.to)?;
        rows.push(json!({
            "lambda": l,
            "gamma": net.gamma(),
            "mean_steps": steps,
            "mean_t_hat": steps / net.gamma(),
            "escape_probability": net.escape_probability(ends.from, &ends.to)?,
        }));
    }
    write_json(
        c.output.as_deref(),
        &json!({
            "config": cfg,
            "ends": ends_value(&space, &ends),
            "n_states": space.len(),
            "results": rows,
        }),
    )?;
    Ok(0)
}

fn profile_from(g: &BipartiteGraph, s_max: Option<usize>, source: ProfileSource) -> Result<IsoperimetricProfile> {
    hcmeta_core::metastability::profile_for(g, s_max, source)
}

pub fn isoperimetry(
    c: &Common,
    s_max: Option<usize>,
    brute_force: bool,
    closed_form: bool,
    compare: Option<&str>,
) -> Result<u8> {
    let g = load_graph(&c.graph)?;
    let source = if brute_force {
        ProfileSource::BruteForce
    } else if closed_form {
        ProfileSource::ClosedForm
    } else {
        ProfileSource::Auto
    };
    let main = profile_from(&g, s_max, source)?;
    let other = match compare {
        Some(s) => Some(profile_from(&g, Some(main.max_s()), s.parse()?)?),
        None => None,
    };
    let mut w = csv::Writer::from_writer(open(c.output.as_deref())?);
    let mut header = vec!["s", "delta", "provenance", "witness_count"];
    if let Some(src) = compare {
        header.extend([src, "match"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    let mut mismatches = 0;
    for row in main.rows() {
        let mut rec = vec![
            row.s.to_string(),
            row.delta.to_string(),
            row.provenance.clone(),
            row.witness_count.map(|n| n.to_string()).unwrap_or_default(),
        ];
        if let Some(o) = &other {
            let d = o.delta(row.s);
            let ok = d == Some(row.delta);
            mismatches += usize::from(!ok);
            rec.push(d.map(|d| d.to_string()).unwrap_or_default());
            rec.push(ok.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    if mismatches > 0 {
        eprintln!("{mismatches} rows disagree");
        return Ok(VERIFY_FAILED);
    }
    Ok(0)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn analysis_options(a: &AnalysisArgs) -> BTreeMap<String, String> {
    let mut o = opts([("source", a.source.clone())]);
    if let Some(s) = a.s_max {
        o.insert("s_max".into(), s.to_string());
    }
    if let Some(k) = a.kappa {
        o.insert("kappa".into(), k.to_string());
    }
    o
}

/// Build the gate, completing the optimal-set enumeration when the profile lacks it.
fn gate_for(g: &BipartiteGraph, analysis: &CriticalAnalysis, kappa: Option<usize>, profile: &IsoperimetricProfile) -> Result<CriticalGate> {
    match build_gate(g, analysis, kappa, profile) {
        Err(Error::Precondition(_)) => {
            let k = kappa.unwrap_or_else(|| analysis.default_kappa());
            let full = brute_force_profile(g, (analysis.s_star + k).min(g.n_v()))?;
            build_gate(g, analysis, kappa, &full)
        }
        r => r,
    }
}

fn hypotheses_value(r: &HypothesisReport) -> Value {
    let mut m = serde_json::Map::new();
    for (label, res) in r.entries() {
        m.insert(label.to_string(), json!(res));
    }
    m.insert("all_hold".into(), json!(r.all_hold()));
    m.insert("kappa".into(), json!(r.kappa));
    m.insert("h4d_probe".into(), json!(r.h4d_probe));
    m.insert("no_trap".into(), json!(r.no_trap));
    m.insert("flags".into(), json!(r.flags));
    Value::Object(m)
}

fn analysis_value(a: &CriticalAnalysis) -> Value {
    json!({
        "s_star": a.s_star,
        "s_tilde": a.s_tilde,
        "g_star": fmt_rational(a.g_star),
        "delta_star": a.delta_star,
        "ell_star": a.ell_star,
        "t_star": a.t_star,
        "unique_max": a.unique_max,
        "maximizers": a.maximizers,
        "profile": a.values,
    })
}

fn prediction_value(a: &CriticalAnalysis, gate: Option<&CriticalGate>, lambdas: &[f64]) -> Value {
    let p = crossover_prediction(a, gate);
    let at: Vec<Value> = lambdas
        .iter()
        .map(|&l| json!({"lambda": l, "order": p.order_value(l, a.alpha), "sharp": p.sharp_value(l, a.alpha)}))
        .collect();
    json!({
        "exponent": [p.exponent.p, p.exponent.q],
        "lambda_power": p.lambda_power,
        "lambda_bar_power": p.lambda_bar_power,
        "sharp_prefactor": p.sharp_prefactor,
        "gate_count": p.gate_count,
        "label": p.label,
        "at": at,
    })
}

pub fn critical(c: &Common, a: &AnalysisArgs) -> Result<u8> {
    let cfg = experiment("critical", c, None, 0, analysis_options(a))?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let (profile, analysis) = analyze_graph(&g, alpha, a.s_max, a.source.parse()?)?;
    // the gate is optional here: large graphs may not admit the enumeration
    let gate = gate_for(&g, &analysis, a.kappa, &profile).ok();
    let hyp = (!a.no_hypotheses)
        .then(|| check_hypotheses(&g, alpha, &profile, a.kappa, HypothesisBudgets::default()));
    let mut out = analysis_value(&analysis);
    let pred = prediction_value(&analysis, gate.as_ref(), &c.lambda);
    out["config"] = json!(cfg);
    out["alpha"] = json!(alpha);
    out["exponent"] = pred["exponent"].clone();
    out["gate_count"] = json!(gate.as_ref().map(|g| g.count));
    out["sharp_prefactor"] = pred["sharp_prefactor"].clone();
    out["prediction"] = pred;
    out["hypotheses"] = hyp.as_ref().map_or(Value::Null, hypotheses_value);
    write_json(c.output.as_deref(), &out)?;
    Ok(0)
}

pub fn gate(c: &Common, a: &AnalysisArgs, transitions: bool) -> Result<u8> {
    let mut o = analysis_options(a);
    o.insert("transitions".into(), transitions.to_string());
    let cfg = experiment("gate", c, None, 0, o)?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let (profile, analysis) = analyze_graph(&g, alpha, a.s_max, a.source.parse()?)?;
    let gate = gate_for(&g, &analysis, a.kappa, &profile)?;
    let mut gv = json!(gate);
    if !transitions {
        if let Some(m) = gv.as_object_mut() {
            m.remove("transitions");
        }
    }
    gv["config"] = json!(cfg);
    gv["alpha"] = json!(alpha);
    gv["gate_count"] = json!(gate.count);
    gv["family_sizes"] = json!([gate.family_a.len(), gate.family_b.len(), gate.family_c.len()]);
    gv["analysis"] = analysis_value(&analysis);
    gv["prediction"] = prediction_value(&analysis, Some(&gate), &c.lambda);
    write_json(c.output.as_deref(), &gv)?;
    Ok(0)
}

pub fn simulate(c: &Common, e: &Endpoints, s: &SimArgs) -> Result<u8> {
    let cfg = experiment(
        "simulate",
        c,
        Some(s.samples),
        s.seed,
        opts([
            ("from", e.from.clone()),
            ("to", e.to.clone()),
            ("step_cap", s.step_cap.to_string()),
            ("embedded_clock", s.embedded_clock.to_string()),
            ("ks_exponential", s.ks_exponential.to_string()),
            ("ks_threshold", fmt17(s.ks_threshold)),
            ("watch_gate", s.watch_gate.to_string()),
            ("chi_square_threshold", fmt17(s.chi_square_threshold)),
        ]),
    )?;
    let g = cfg.build_graph()?;
    let alpha = cfg.alpha()?;
    let ls = lambdas(c)?;
    if ls.len() != 1 {
        return Err(Error::InvalidParameter("simulate takes a single --lambda".into()));
    }
    let lambda = ls[0];
    let space = ConfigurationSpace::enumerate(&g, 1 << 20)?;
    let ends = resolve_ends(&space, e, alpha)?;
    let watch = if s.watch_gate {
        let (profile, analysis) = analyze_graph(&g, alpha, None, ProfileSource::Auto)?;
        Some(gate_for(&g, &analysis, None, &profile)?.watch(&space)?)
    } else {
        None
    };
    let kernel = TransitionKernel::build(&space, &ModelParams::new(lambda, alpha)?.rates());
    let mut targets = vec![false; space.len()];
    for &t in &ends.to {
        targets[t] = true;
    }
    let hit_opts = HitOptions {
        step_cap: s.step_cap,
        embedded_clock: s.embedded_clock,
        watch: watch.clone(),
    };
    let outcomes = sample_crossover(&kernel, ends.from, &targets, s.samples, s.seed, &hit_opts)?;

    let hex = |i: usize| format!("{:#x}", space.state(i));
    let lines: Vec<String> = outcomes
        .par_iter()
        .map(|o| {
            let v = match o {
                HitOutcome::Hit(h) => json!({
                    "sample": h.sample,
                    "steps": h.steps,
                    "t_hat": h.t_hat,
                    "gate_events": h.gate_events.iter().map(|&(a, b)| [hex(a), hex(b)]).collect::<Vec<_>>(),
                }),
                HitOutcome::Timeout { sample, steps } => json!({"sample": sample, "steps": steps, "timeout": true}),
            };
            to_json_line(&v)
        })
        .collect::<serde_json::Result<_>>()?;

    let hits: Vec<_> = outcomes.iter().filter_map(|o| o.hit().cloned()).collect();
    let t: Vec<f64> = hits.iter().map(|h| h.t_hat).collect();
    let timeouts = outcomes.len() - hits.len();
    let ks = if s.ks_exponential { Some(ks_exponential(&t)?) } else { None };
    let gate_stats = watch.as_ref().map(|w| gate_statistics(&hits, w));
    let report = StatReport::new(
        &t,
        timeouts,
        ks,
        s.ks_threshold,
        gate_stats.as_ref().map(|g| hcmeta_core::stats::ChiSquare {
            statistic: g.chi_square,
            degrees_of_freedom: g.degrees_of_freedom,
            p_value: g.p_value,
        }),
        s.chi_square_threshold,
    );

    let mut w = open(c.output.as_deref())?;
    for l in &lines {
        writeln!(w, "{l}")?;
    }
    let summary = json!({
        "config": cfg,
        "gamma": kernel.gamma(),
        "report": report,
        "gate": gate_stats,
    });
    writeln!(w, "{}", to_json_line(&summary)?)?;
    w.flush()?;
    if timeouts > 0 {
        eprintln!("{timeouts} trajectories reached the step cap");
        return Ok(3);
    }
    if (s.ks_exponential || s.watch_gate) && !report.pass {
        return Ok(VERIFY_FAILED);
    }
    Ok(0)
}

pub fn verify(seed: u64, only: &[usize], output: Option<&Path>) -> Result<u8> {
    let cfg = AcceptanceConfig {
        seed,
        ..AcceptanceConfig::default()
    };
    let ids: Vec<usize> = if only.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        only.to_vec()
    };
    let results: Vec<_> = ids.par_iter().map(|&id| run_criterion(id, &cfg)).collect();
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<4} {:<6} {:<56} detail", "id", "result", "criterion")?;
    for r in &results {
        writeln!(
            out,
            "{:<4} {:<6} {:<56} {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.title,
            r.detail
        )?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    writeln!(out, "{} of {} criteria pass", results.len() - failed, results.len())?;
    if let Some(p) = output {
        write_json(Some(p), &json!({"config": cfg, "results": results}))?;
    }
    Ok(if failed == 0 { 0 } else { VERIFY_FAILED })
}
