//! The electrical network of the reversible hard-core chain.

use serde::Serialize;

use super::solver::{solve_dirichlet, Elimination, Weights, DIRECT_LIMIT};
use crate::configspace::{log_sum_exp, ConfigurationSpace, ModelParams, Rates};
use crate::dynamics::TransitionKernel;
use crate::error::{Error, Result};
use crate::exponent::{Alpha, AsymptoticExponent};

/// Largest log-ratio between conductances that the linear solvers accept.
pub const MAX_LOG_RANGE: f64 = 700.0;

/// Conductances `c(x,y) = max(π(x), π(y)) / γ` on single-site flips.
#[derive(Clone, Debug)]
pub struct ElectricNetwork {
    space: ConfigurationSpace,
    params: ModelParams,
    rates: Rates,
    gamma: f64,
    log_pi: Vec<f64>,
    /// Neighbours with log conductance.
    log_c: Vec<Vec<(usize, f64)>>,
    log_c_max: f64,
    /// Conductances divided by `exp(log_c_max)`.
    scaled: Option<Weights>,
    kernel: TransitionKernel,
}

/// A bottleneck value with a path attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct Bottleneck {
    /// `ln Ψ`, or `+∞` when the target set is unreachable or empty.
    pub log_psi: f64,
    pub witness_path: Vec<usize>,
}

/// Symbolic bottleneck: order of `Ψ / Z`, the bottleneck computed with unnormalised weights.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolicBottleneck {
    /// `None` when the target set is empty or unreachable (`Ψ = ∞`).
    pub exponent: Option<AsymptoticExponent>,
    pub witness_path: Vec<usize>,
    /// Several distinct `(p, q)` attain the optimal value at this `α`.
    pub order_tie: bool,
}

impl ElectricNetwork {
    pub fn new(space: ConfigurationSpace, params: ModelParams) -> Result<Self> {
        let rates = params.rates();
        let g = space.graph();
        let gamma = rates.gamma(g);
        let log_pi = space.log_pi(&rates);
        let ln_gamma = gamma.ln();
        let mut log_c = Vec::with_capacity(space.len());
        let mut log_c_max = f64::NEG_INFINITY;
        let mut log_c_min = f64::INFINITY;
        for i in 0..space.len() {
            let row: Vec<(usize, f64)> = space
                .flips(i)
                .into_iter()
                .map(|(_, j)| {
                    let c = log_pi[i].max(log_pi[j]) - ln_gamma;
                    log_c_max = log_c_max.max(c);
                    log_c_min = log_c_min.min(c);
                    (j, c)
                })
                .collect();
            log_c.push(row);
        }
        let scaled = (log_c_max - log_c_min <= MAX_LOG_RANGE).then(|| {
            log_c
                .iter()
                .map(|row| row.iter().map(|&(j, c)| (j, (c - log_c_max).exp())).collect())
                .collect()
        });
        let kernel = TransitionKernel::build(&space, &rates);
        Ok(ElectricNetwork {
            space,
            params,
            rates,
            gamma,
            log_pi,
            log_c,
            log_c_max,
            scaled,
            kernel,
        })
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn log_pi(&self, x: usize) -> f64 {
        self.log_pi[x]
    }

    pub fn pi(&self, x: usize) -> f64 {
        self.log_pi[x].exp()
    }

    pub fn neighbors_log_c(&self, x: usize) -> &[(usize, f64)] {
        &self.log_c[x]
    }

    pub fn log_conductance(&self, x: usize, y: usize) -> Option<f64> {
        self.log_c[x].iter().find(|e| e.0 == y).map(|e| e.1)
    }

    fn scaled(&self) -> Result<&Weights> {
        self.scaled.as_ref().ok_or_else(|| {
            Error::Numerical(format!(
                "conductances span more than e^{MAX_LOG_RANGE}; use the symbolic routines"
            ))
        })
    }

    fn check_sets(&self, a: &[usize], b: &[usize]) -> Result<(Vec<bool>, Vec<bool>)> {
        let n = self.len();
        let mut ia = vec![false; n];
        let mut ib = vec![false; n];
        for &x in a {
            if x >= n {
                return Err(Error::InvalidParameter(format!("state {x} out of range")));
            }
            ia[x] = true;
        }
        for &x in b {
            if x >= n {
                return Err(Error::InvalidParameter(format!("state {x} out of range")));
            }
            if ia[x] {
                return Err(Error::InvalidParameter("sets A and B must be disjoint".into()));
            }
            ib[x] = true;
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidParameter("sets A and B must be non-empty".into()));
        }
        Ok((ia, ib))
    }

    /// `ln R(A, B)`, the log effective resistance.
    pub fn log_effective_resistance(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let (ia, ib) = self.check_sets(a, b)?;
        let w = self.scaled()?;
        let boundary: Vec<bool> = ia.iter().zip(&ib).map(|(p, q)| *p || *q).collect();
        let interior = boundary.iter().filter(|&&x| !x).count();
        let c_scaled = if interior <= DIRECT_LIMIT {
            let e = Elimination::run(w, &boundary, &vec![0.0; self.len()])?;
            let mut c = 0.0;
            for &x in a {
                for &y in b {
                    c += e.reduced_weight(x, y);
                }
            }
            c
        } else {
            // Current leaving B under the unit voltage on A.
            let h = self.solve_voltage(&ia, &ib)?;
            let mut c = 0.0;
            for &y in b {
                for &(x, wxy) in &w[y] {
                    if !ib[x] {
                        c += wxy * h[x];
                    }
                }
            }
            c
        };
        if c_scaled <= 0.0 {
            return Err(Error::Numerical("A and B are not connected".into()));
        }
        Ok(-(c_scaled.ln() + self.log_c_max))
    }

    pub fn effective_resistance(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        Ok(self.log_effective_resistance(a, b)?.exp())
    }

    fn solve_voltage(&self, ia: &[bool], ib: &[bool]) -> Result<Vec<f64>> {
        let w = self.scaled()?;
        let boundary: Vec<Option<f64>> = ia
            .iter()
            .zip(ib)
            .map(|(&p, &q)| {
                if p {
                    Some(1.0)
                } else if q {
                    Some(0.0)
                } else {
                    None
                }
            })
            .collect();
        solve_dirichlet(w, &boundary, &vec![0.0; self.len()], true)
    }

    /// Equilibrium potential `W_{A,B}(x) = Pr_x(T_A < T_B)`.
    pub fn voltage(&self, a: &[usize], b: &[usize]) -> Result<Vec<f64>> {
        let (ia, ib) = self.check_sets(a, b)?;
        self.solve_voltage(&ia, &ib)
    }

    /// `ln E_a[T_B]` via `E_a[T_B] = R(a,B) Σ_x π(x) W_{a,B}(x)`.
    pub fn log_mean_hitting_time(&self, a: usize, b: &[usize]) -> Result<f64> {
        let lr = self.log_effective_resistance(&[a], b)?;
        let w = self.voltage(&[a], b)?;
        let terms: Vec<f64> = (0..self.len())
            .filter(|&x| w[x] > 0.0)
            .map(|x| self.log_pi[x] + w[x].ln())
            .collect();
        Ok(lr + log_sum_exp(&terms))
    }

    pub fn mean_hitting_time(&self, a: usize, b: &[usize]) -> Result<f64> {
        Ok(self.log_mean_hitting_time(a, b)?.exp())
    }

    /// `E_x[T_B]` for every `x`, from the first-step equations of the kernel.
    pub fn mean_hitting_times_first_step(&self, b: &[usize]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut boundary = vec![None; n];
        for &x in b {
            boundary[x] = Some(0.0);
        }
        if b.is_empty() {
            return Err(Error::InvalidParameter("target set is empty".into()));
        }
        if n - b.len() <= DIRECT_LIMIT {
            let w: Weights = (0..n).map(|x| self.kernel.row(x).to_vec()).collect();
            solve_dirichlet(&w, &boundary, &vec![1.0; n], false)
        } else {
            // Symmetrised form: Σ_y c(x,y)(t_x - t_y) = π(x), rescaled.
            let w = self.scaled()?;
            let src: Vec<f64> = (0..n)
                .map(|x| (self.log_pi[x] - self.log_c_max).exp())
                .collect();
            solve_dirichlet(w, &boundary, &src, true)
        }
    }

    /// Escape probability `Pr_a(T_B < T_a^+) = 1 / (π(a) R(a, B))`.
    pub fn escape_probability(&self, a: usize, b: &[usize]) -> Result<f64> {
        let lr = self.log_effective_resistance(&[a], b)?;
        Ok((-(self.log_pi[a] + lr)).exp())
    }

    /// Escape probability from the one-step decomposition
    /// `Σ_y K(a,y) Pr_y(T_B < T_a)`.
    pub fn escape_probability_one_step(&self, a: usize, b: &[usize]) -> Result<f64> {
        let h = self.voltage(b, &[a])?;
        Ok(self.kernel.row(a).iter().map(|&(y, p)| p * h[y]).sum())
    }

    /// Green function `G_{T_B}(a, x) = R(a,B) π(x) W_{a,B}(x)` for all `x`.
    pub fn green_function(&self, a: usize, b: &[usize]) -> Result<Vec<f64>> {
        let lr = self.log_effective_resistance(&[a], b)?;
        let w = self.voltage(&[a], b)?;
        Ok((0..self.len())
            .map(|x| {
                if w[x] > 0.0 {
                    (lr + self.log_pi[x] + w[x].ln()).exp()
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Expected visits to `x` before `T_B`, as a function of the start,
    /// from the first-step equations.
    pub fn green_column_first_step(&self, x: usize, b: &[usize]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut boundary = vec![None; n];
        for &y in b {
            boundary[y] = Some(0.0);
        }
        let mut src = vec![0.0; n];
        src[x] = 1.0;
        let w: Weights = (0..n).map(|y| self.kernel.row(y).to_vec()).collect();
        solve_dirichlet(&w, &boundary, &src, false)
    }

    /// Numeric bottleneck `Ψ(A, B)`: the least, over paths, of the largest
    /// edge resistance `1/c`.
    pub fn bottleneck(&self, a: &[usize], b: &[usize]) -> Bottleneck {
        let (log_psi, path) = minimax(
            self.len(),
            a,
            b,
            |x| self.log_c[x].iter().map(|&(y, c)| (y, -c)),
            |p, q| p.total_cmp(q),
            |p, q| if p > q { p } else { q },
            f64::NEG_INFINITY,
        );
        Bottleneck {
            log_psi: log_psi.unwrap_or(f64::INFINITY),
            witness_path: path,
        }
    }

    /// Symbolic bottleneck with edge resistances `λ^{(1+α) - max(w(x), w(y))}`.
    pub fn symbolic_bottleneck(&self, a: &[usize], b: &[usize]) -> SymbolicBottleneck {
        symbolic_bottleneck(&self.space, self.params.alpha, a, b)
    }
}

/// Order of `r(x, y) / Z = γ / max(w(x), w(y))` for a single-site flip, with `w` the unnormalised weight.
pub fn resistance_exponent(
    space: &ConfigurationSpace,
    x: usize,
    y: usize,
    alpha: Alpha,
) -> AsymptoticExponent {
    let wx = space.weight_exponent(x);
    let wy = space.weight_exponent(y);
    AsymptoticExponent::GAMMA - wx.max_at(wy, alpha)
}

/// Flip graph with symbolic edge resistances, reusable across many queries.
#[derive(Clone, Debug)]
pub struct SymbolicNetwork {
    alpha: Alpha,
    flips: Vec<Vec<(usize, AsymptoticExponent)>>,
}

impl SymbolicNetwork {
    pub fn new(space: &ConfigurationSpace, alpha: Alpha) -> Self {
        let flips = (0..space.len())
            .map(|x| {
                space
                    .flips(x)
                    .into_iter()
                    .map(|(_, y)| (y, resistance_exponent(space, x, y, alpha)))
                    .collect()
            })
            .collect();
        SymbolicNetwork { alpha, flips }
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn edges(&self, x: usize) -> &[(usize, AsymptoticExponent)] {
        &self.flips[x]
    }

    pub fn bottleneck(&self, a: &[usize], b: &[usize]) -> SymbolicBottleneck {
        let alpha = self.alpha;
        let n = self.flips.len();
        let (best, path) = minimax(
            n,
            a,
            b,
            |x| self.flips[x].iter().copied(),
            |p, q| p.cmp_value(q, alpha),
            |p, q| p.max_at(q, alpha),
            AsymptoticExponent::new(i64::MIN / 4, 0),
        );
        let order_tie = match best {
            Some(v) => has_tie(n, a, b, &self.flips, v, alpha),
            None => false,
        };
        SymbolicBottleneck {
            exponent: best,
            witness_path: path,
            order_tie,
        }
    }
}

pub fn symbolic_bottleneck(
    space: &ConfigurationSpace,
    alpha: Alpha,
    a: &[usize],
    b: &[usize],
) -> SymbolicBottleneck {
    SymbolicNetwork::new(space, alpha).bottleneck(a, b)
}

/// Whether edges of optimal value but different `(p, q)` both lie on
/// admissible paths from A to B.
fn has_tie(
    n: usize,
    a: &[usize],
    b: &[usize],
    flips: &[Vec<(usize, AsymptoticExponent)>],
    v: AsymptoticExponent,
    alpha: Alpha,
) -> bool {
    use std::cmp::Ordering;
    let reach = |from: &[usize]| {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = from.to_vec();
        for &x in from {
            seen[x] = true;
        }
        while let Some(x) = stack.pop() {
            for &(y, r) in &flips[x] {
                if !seen[y] && r.cmp_value(&v, alpha) != Ordering::Greater {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let ra = reach(a);
    let rb = reach(b);
    let mut found: Option<AsymptoticExponent> = None;
    for x in 0..n {
        for &(y, r) in &flips[x] {
            if r.cmp_value(&v, alpha) == Ordering::Equal && ra[x] && rb[y] {
                match found {
                    None => found = Some(r),
                    Some(f) if f != r => return true,
                    _ => {}
                }
            }
        }
    }
    false
}

/// Multi-source minimax path search (Dijkstra with `max` in place of `+`).
/// Returns the optimal bottleneck value and a witness path, or `None` when
/// `b` is unreachable or empty.
pub(crate) fn minimax<T, I, N, C, M>(
    n: usize,
    a: &[usize],
    b: &[usize],
    neighbors: N,
    cmp: C,
    max: M,
    bottom: T,
) -> (Option<T>, Vec<usize>)
where
    T: Copy,
    I: Iterator<Item = (usize, T)>,
    N: Fn(usize) -> I,
    C: Fn(&T, &T) -> std::cmp::Ordering,
    M: Fn(T, T) -> T,
{
    use std::cmp::Ordering;
    let mut is_target = vec![false; n];
    for &x in b {
        is_target[x] = true;
    }
    let mut best: Vec<Option<T>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap: Vec<(T, usize)> = Vec::new();
    for &x in a {
        best[x] = Some(bottom);
        heap_push(&mut heap, (bottom, x), &cmp);
    }
    loop {
        let Some((bx, x)) = heap_pop(&mut heap, &cmp) else {
            return (None, Vec::new());
        };
        if done[x] {
            continue;
        }
        done[x] = true;
        if is_target[x] {
            let mut path = vec![x];
            let mut c = x;
            while parent[c] != usize::MAX {
                c = parent[c];
                path.push(c);
            }
            path.reverse();
            return (Some(bx), path);
        }
        for (y, w) in neighbors(x) {
            if done[y] {
                continue;
            }
            let cand = max(bx, w);
            let better = match best[y] {
                None => true,
                Some(cur) => cmp(&cand, &cur) == Ordering::Less,
            };
            if better {
                best[y] = Some(cand);
                parent[y] = x;
                heap_push(&mut heap, (cand, y), &cmp);
            }
        }
    }
}

/// Binary min-heap on `(key, node)` with an external comparator; ties are
/// broken by node index so the search is deterministic.
fn heap_less<T, C>(a: &(T, usize), b: &(T, usize), cmp: &C) -> bool
where
    C: Fn(&T, &T) -> std::cmp::Ordering,
{
    match cmp(&a.0, &b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1 < b.1,
    }
}

fn heap_push<T, C>(heap: &mut Vec<(T, usize)>, item: (T, usize), cmp: &C)
where
    C: Fn(&T, &T) -> std::cmp::Ordering,
{
    heap.push(item);
    let mut i = heap.len() - 1;
    while i > 0 {
        let p = (i - 1) / 2;
        if heap_less(&heap[i], &heap[p], cmp) {
            heap.swap(i, p);
            i = p;
        } else {
            break;
        }
    }
}

fn heap_pop<T, C>(heap: &mut Vec<(T, usize)>, cmp: &C) -> Option<(T, usize)>
where
    C: Fn(&T, &T) -> std::cmp::Ordering,
{
    if heap.is_empty() {
        return None;
    }
    let last = heap.len() - 1;
    heap.swap(0, last);
    let top = heap.pop();
    let mut i = 0;
    loop {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        let mut m = i;
        if l < heap.len() && heap_less(&heap[l], &heap[m], cmp) {
            m = l;
        }
        if r < heap.len() && heap_less(&heap[r], &heap[m], cmp) {
            m = r;
        }
        if m == i {
            break;
        }
        heap.swap(i, m);
        i = m;
    }
    top
}
