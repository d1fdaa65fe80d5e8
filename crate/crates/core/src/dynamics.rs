//! Discrete-time hard-core dynamics: kernel, hitting-time sampling, and the
//! monotone coupling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::configspace::{can_occupy, precedes, Config, ConfigurationSpace, Rates};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// Default step cap for hitting-time simulation.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000_000;

/// Sparse transition matrix of the discrete-time chain.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    /// Off-diagonal entries `(target, probability)` per row.
    rows: Vec<Vec<(usize, f64)>>,
    /// `Σ_{y≠x} K(x,y)`, computed as a sum to avoid cancellation.
    leave: Vec<f64>,
    gamma: f64,
}

impl TransitionKernel {
    pub fn build(space: &ConfigurationSpace, rates: &Rates) -> Self {
        let g = space.graph();
        let gamma = rates.gamma(g);
        let mut rows = Vec::with_capacity(space.len());
        let mut leave = Vec::with_capacity(space.len());
        for i in 0..space.len() {
            let x = space.state(i);
            let row: Vec<(usize, f64)> = space
                .flips(i)
                .into_iter()
                .map(|(s, j)| {
                    let p = if x >> s & 1 == 1 {
                        1.0 / gamma
                    } else {
                        rates.for_site(g, s) / gamma
                    };
                    (j, p)
                })
                .collect();
            leave.push(row.iter().map(|e| e.1).sum());
            rows.push(row);
        }
        TransitionKernel { rows, leave, gamma }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Probability of leaving state `i` in one step.
    pub fn leave_probability(&self, i: usize) -> f64 {
        self.leave[i]
    }

    /// `K(i, i)`.
    pub fn diagonal(&self, i: usize) -> f64 {
        1.0 - self.leave[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal(i);
        }
        self.rows[i]
            .iter()
            .find(|e| e.0 == j)
            .map_or(0.0, |e| e.1)
    }
}

/// A watched set of directed transitions `(from, to)` given as state indices.
#[derive(Clone, Debug, Default)]
pub struct GateWatch {
    pub transitions: Vec<(usize, usize)>,
}

impl GateWatch {
    fn position(&self, from: usize, to: usize) -> Option<usize> {
        self.transitions.iter().position(|&t| t == (from, to))
    }
}

/// One simulated hitting time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingSample {
    pub sample: u64,
    pub steps: u64,
    pub t_hat: f64,
    pub terminal: usize,
    /// Watched transitions crossed, in order, as `(from, to)` state indices.
    pub gate_events: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HitOutcome {
    Hit(HittingSample),
    Timeout { sample: u64, steps: u64 },
}

impl HitOutcome {
    pub fn hit(&self) -> Option<&HittingSample> {
        match self {
            HitOutcome::Hit(h) => Some(h),
            HitOutcome::Timeout { .. } => None,
        }
    }
}

/// Options for [`simulate_hit`].
#[derive(Clone, Debug)]
pub struct HitOptions {
    pub step_cap: u64,
    /// Draw `T̂` from the embedded continuous clock instead of `steps / γ`.
    pub embedded_clock: bool,
    pub watch: Option<GateWatch>,
}

impl Default for HitOptions {
    fn default() -> Self {
        HitOptions {
            step_cap: DEFAULT_STEP_CAP,
            embedded_clock: false,
            watch: None,
        }
    }
}

/// RNG for sample `index` of a run seeded with `base_seed`.
pub fn sample_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(index))
}

/// Simulate the chain from `start` until it enters `targets`.
///
/// The chain is advanced jump by jump: the number of steps spent in a state
/// is drawn from the geometric law of its self-loop, which leaves the law of
/// the step count and of the visited path unchanged.
pub fn simulate_hit(
    kernel: &TransitionKernel,
    start: usize,
    targets: &[bool],
    sample: u64,
    rng: &mut ChaCha8Rng,
    opts: &HitOptions,
) -> Result<HitOutcome> {
    if start >= kernel.len() || targets.len() != kernel.len() {
        return Err(Error::InvalidParameter("start or target set out of range".into()));
    }
    if !targets.iter().any(|&t| t) {
        return Err(Error::InvalidParameter("target set is empty".into()));
    }
    let mut x = start;
    let mut steps: u64 = 0;
    let mut events = Vec::new();
    while !targets[x] {
        let p = kernel.leave_probability(x);
        if p <= 0.0 {
            return Err(Error::Numerical(format!("state {x} is absorbing")));
        }
        let hold = if p >= 1.0 {
            1
        } else {
            Geometric::new(p)
                .map_err(|e| Error::Numerical(e.to_string()))?
                .sample(rng)
                .saturating_add(1)
        };
        steps = steps.saturating_add(hold);
        if steps > opts.step_cap {
            return Ok(HitOutcome::Timeout {
                sample,
                steps: opts.step_cap,
            });
        }
        let row = kernel.row(x);
        let mut r = rng.random::<f64>() * p;
        let mut next = row[row.len() - 1].0;
        for &(j, q) in row {
            if r < q {
                next = j;
                break;
            }
            r -= q;
        }
        if let Some(w) = &opts.watch {
            if w.position(x, next).is_some() {
                events.push((x, next));
            }
        }
        x = next;
    }
    let t_hat = if opts.embedded_clock && steps > 0 {
        Gamma::new(steps as f64, 1.0 / kernel.gamma())
            .map_err(|e| Error::Numerical(e.to_string()))?
            .sample(rng)
    } else {
        steps as f64 / kernel.gamma()
    };
    Ok(HitOutcome::Hit(HittingSample {
        sample,
        steps,
        t_hat,
        terminal: x,
        gate_events: events,
    }))
}

/// Draw `n` independent hitting samples; sample `i` uses seed `base_seed + i`.
/// Runs in parallel on the current rayon pool and returns results in index order.
pub fn sample_crossover(
    kernel: &TransitionKernel,
    start: usize,
    targets: &[bool],
    n: usize,
    base_seed: u64,
    opts: &HitOptions,
) -> Result<Vec<HitOutcome>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(base_seed, i);
            simulate_hit(kernel, start, targets, i, &mut rng, opts)
        })
        .collect()
}

/// Sampler for the site and uniform variate that drive one update.
#[derive(Clone, Debug)]
struct SiteClock {
    /// Total clock weight of U and of V sites.
    weight_u: f64,
    weight_v: f64,
    n_u: usize,
    n_v: usize,
}

impl SiteClock {
    fn new(g: &BipartiteGraph, cap_u: f64, cap_v: f64) -> Self {
        SiteClock {
            weight_u: g.n_u() as f64 * (1.0 + cap_u),
            weight_v: g.n_v() as f64 * (1.0 + cap_v),
            n_u: g.n_u(),
            n_v: g.n_v(),
        }
    }

    /// Pick a site with probability proportional to `1 + cap` and a uniform
    /// point `w` in `[0, 1 + cap)` for that site.
    fn draw(&self, rng: &mut ChaCha8Rng, cap_u: f64, cap_v: f64) -> (usize, f64) {
        let total = self.weight_u + self.weight_v;
        let r = rng.random::<f64>() * total;
        if r < self.weight_u {
            let k = ((r / self.weight_u) * self.n_u as f64) as usize;
            (k.min(self.n_u - 1), rng.random::<f64>() * (1.0 + cap_u))
        } else {
            let k = (((r - self.weight_u) / self.weight_v) * self.n_v as f64) as usize;
            (
                self.n_u + k.min(self.n_v - 1),
                rng.random::<f64>() * (1.0 + cap_v),
            )
        }
    }
}

fn apply(g: &BipartiteGraph, x: Config, site: usize, w: f64, rate: f64) -> Config {
    let bit = 1u128 << site;
    if w < 1.0 {
        x & !bit
    } else if w - 1.0 < rate && can_occupy(g, x, site) {
        x | bit
    } else {
        x
    }
}

/// Single-chain trajectory driven step by step by the kernel's own clock.
#[derive(Clone, Debug)]
pub struct Stepper<'g> {
    graph: &'g BipartiteGraph,
    rates: Rates,
    clock: SiteClock,
}

impl<'g> Stepper<'g> {
    pub fn new(graph: &'g BipartiteGraph, rates: Rates) -> Self {
        let clock = SiteClock::new(graph, rates.lambda_u, rates.lambda_v);
        Stepper {
            graph,
            rates,
            clock,
        }
    }

    /// One step of `K`: pick site `i` with probability `(1+λ_i)/γ`, then
    /// occupy it with probability `λ_i/(1+λ_i)` if allowed, else empty it.
    pub fn step(&self, x: Config, rng: &mut ChaCha8Rng) -> Config {
        let (site, w) = self.clock.draw(rng, self.rates.lambda_u, self.rates.lambda_v);
        apply(self.graph, x, site, w, self.rates.for_site(self.graph, site))
    }
}

/// Result of a coupled run.
#[derive(Clone, Debug, Serialize)]
pub struct CoupledRun {
    pub steps: u64,
    /// Steps after which the order `x1 ⊑ x2` failed.
    pub violations: Vec<u64>,
    pub final_lower: Config,
    pub final_upper: Config,
    /// Steps at which at least one chain changed.
    pub moves: u64,
}

/// Run the monotone coupling of two chains with parameters `lower` and
/// `upper`, requiring `λ_lower ≥ λ_upper`, `λ̄_lower ≤ λ̄_upper`, and
/// `x_lower ⊑ x_upper`. Both chains share the site choice and the uniform
/// variate of every step; births are nested by comparing the same variate
/// against each chain's rate.
pub fn coupled_simulate(
    graph: &BipartiteGraph,
    lower: Rates,
    upper: Rates,
    x_lower: Config,
    x_upper: Config,
    horizon: u64,
    seed: u64,
) -> Result<CoupledRun> {
    if lower.lambda_u < upper.lambda_u || lower.lambda_v > upper.lambda_v {
        return Err(Error::Precondition(
            "coupling needs lambda_lower >= lambda_upper and lambda_bar_lower <= lambda_bar_upper"
                .into(),
        ));
    }
    if !precedes(graph, x_lower, x_upper) {
        return Err(Error::Precondition("initial configurations are not ordered".into()));
    }
    let cap_u = lower.lambda_u.max(upper.lambda_u);
    let cap_v = lower.lambda_v.max(upper.lambda_v);
    let clock = SiteClock::new(graph, cap_u, cap_v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (x_lower, x_upper);
    let mut violations = Vec::new();
    let mut moves = 0;
    for t in 1..=horizon {
        let (site, w) = clock.draw(&mut rng, cap_u, cap_v);
        let na = apply(graph, a, site, w, lower.for_site(graph, site));
        let nb = apply(graph, b, site, w, upper.for_site(graph, site));
        if na != a || nb != b {
            moves += 1;
        }
        a = na;
        b = nb;
        if !precedes(graph, a, b) {
            violations.push(t);
        }
    }
    Ok(CoupledRun {
        steps: horizon,
        violations,
        final_lower: a,
        final_upper: b,
        moves,
    })
}

/// Empirical mean of `T̂` and its standard error over the hit samples.
pub fn mean_t_hat(outcomes: &[HitOutcome]) -> (f64, f64, usize) {
    let xs: Vec<f64> = outcomes.iter().filter_map(|o| o.hit().map(|h| h.t_hat)).collect();
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
    (mean, (var / n as f64).sqrt(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::{u_mask, v_mask, ModelParams};
    use crate::exponent::Alpha;
    use crate::graph::{complete_bipartite, even_cycle, even_torus, random_bipartite};
    use proptest::prelude::*;

    #[test]
    fn k11_kernel_entries() {
        let g = complete_bipartite(1, 1).unwrap();
        let space = ConfigurationSpace::enumerate(&g, 10).unwrap();
        let k = TransitionKernel::build(&space, &Rates::new(10.0, 20.0).unwrap());
        assert_eq!(k.gamma(), 32.0);
        let e = space.index_of(0).unwrap();
        let u = space.u_index();
        let v = space.v_index();
        assert!((k.entry(e, u) - 10.0 / 32.0).abs() < 1e-15);
        assert!((k.entry(e, v) - 20.0 / 32.0).abs() < 1e-15);
        assert!((k.entry(e, e) - 2.0 / 32.0).abs() < 1e-15);
        assert!((k.entry(u, e) - 1.0 / 32.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn kernel_is_stochastic_and_reversible(seed in 0u64..300, lam in 1.5f64..50.0) {
            let g = random_bipartite(4, 4, 0.5, seed).unwrap();
            let space = ConfigurationSpace::enumerate(&g, 1 << 20).unwrap();
            let rates = ModelParams::new(lam, Alpha::new(1, 3).unwrap()).unwrap().rates();
            let k = TransitionKernel::build(&space, &rates);
            let pi = space.pi(&rates);
            for i in 0..space.len() {
                let s: f64 = k.row(i).iter().map(|e| e.1).sum::<f64>() + k.diagonal(i);
                prop_assert!((s - 1.0).abs() < 1e-12);
                prop_assert!(k.diagonal(i) >= -1e-15);
                for &(j, p) in k.row(i) {
                    let lhs = pi[i] * p;
                    let rhs = pi[j] * k.entry(j, i);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
                }
            }
            let pk: Vec<f64> = (0..space.len())
                .map(|j| pi[j] * k.diagonal(j) + k.row(j).iter().map(|&(i, _)| pi[i] * k.entry(i, j)).sum::<f64>())
                .collect();
            for j in 0..space.len() {
                prop_assert!((pk[j] - pi[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn occupation_frequencies_match_stationary_law() {
        let g = complete_bipartite(2, 2).unwrap();
        let space = ConfigurationSpace::enumerate(&g, 100).unwrap();
        let rates = Rates::new(2.0, 3.0).unwrap();
        let pi = space.pi(&rates);
        let stepper = Stepper::new(&g, rates);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = vec![0u64; space.len()];
        let mut x = 0;
        let n = 1_000_000u64;
        for _ in 0..n {
            x = stepper.step(x, &mut rng);
            counts[space.index_of(x).unwrap()] += 1;
        }
        for i in 0..space.len() {
            let f = counts[i] as f64 / n as f64;
            assert!((f - pi[i]).abs() < 0.01, "state {i}: {f} vs {}", pi[i]);
        }
    }

    #[test]
    fn reproducible_and_single_sample_consistent() {
        let g = even_cycle(6).unwrap();
        let space = ConfigurationSpace::enumerate(&g, 100).unwrap();
        let rates = ModelParams::new(20.0, Alpha::new(1, 2).unwrap()).unwrap().rates();
        let k = TransitionKernel::build(&space, &rates);
        let mut targets = vec![false; space.len()];
        targets[space.v_index()] = true;
        let opts = HitOptions::default();
        let a = sample_crossover(&k, space.u_index(), &targets, 8, 42, &opts).unwrap();
        let b = sample_crossover(&k, space.u_index(), &targets, 8, 42, &opts).unwrap();
        assert_eq!(a, b);
        let one = sample_crossover(&k, space.u_index(), &targets, 1, 42, &opts).unwrap();
        let mut rng = sample_rng(42, 0);
        let direct = simulate_hit(&k, space.u_index(), &targets, 0, &mut rng, &opts).unwrap();
        assert_eq!(one[0], direct);
        assert_eq!(a[0], direct);
    }

    #[test]
    fn step_cap_produces_timeout() {
        let g = even_cycle(6).unwrap();
        let space = ConfigurationSpace::enumerate(&g, 100).unwrap();
        let rates = ModelParams::new(1000.0, Alpha::new(1, 2).unwrap()).unwrap().rates();
        let k = TransitionKernel::build(&space, &rates);
        let mut targets = vec![false; space.len()];
        targets[space.v_index()] = true;
        let opts = HitOptions {
            step_cap: 10,
            ..Default::default()
        };
        let mut rng = sample_rng(1, 0);
        let out = simulate_hit(&k, space.u_index(), &targets, 0, &mut rng, &opts).unwrap();
        assert!(matches!(out, HitOutcome::Timeout { steps: 10, .. }));
    }

    #[test]
    fn coupling_preserves_order() {
        let g = even_torus(4, 4).unwrap();
        for seed in 0..5 {
            let r = Rates::new(3.0, 5.0).unwrap();
            let run = coupled_simulate(&g, r, r, u_mask(&g), v_mask(&g), 20_000, seed).unwrap();
            assert!(run.violations.is_empty());
            assert!(run.moves > 0);
            let lo = Rates::new(6.0, 2.0).unwrap();
            let run = coupled_simulate(&g, lo, r, u_mask(&g), v_mask(&g), 20_000, seed).unwrap();
            assert!(run.violations.is_empty());
        }
        let lo = Rates::new(1.0, 2.0).unwrap();
        let hi = Rates::new(3.0, 5.0).unwrap();
        assert!(coupled_simulate(&g, lo, hi, u_mask(&g), v_mask(&g), 10, 0).is_err());
        assert!(coupled_simulate(&g, hi, hi, v_mask(&g), u_mask(&g), 10, 0).is_err());
    }
}
