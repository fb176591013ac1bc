use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};

use crate::exec::{map_ordered, Execution};
use crate::field::{rational_ln, ContextExt, ParamValue, Rational};
use crate::graph::{RatMatrix, TransitionGraph};

use super::AnalysisError;

#[derive(Clone, Debug)]
pub struct LqOptions {
    pub q: Vec<f64>,
    pub t_min: Rational,
    /// Number of scales `t_j = t_min^(j/K)`, `j = 1..=K`.
    pub schedule_len: usize,
    pub max_paths: usize,
    pub execution: Execution,
}

impl Default for LqOptions {
    fn default() -> Self {
        LqOptions {
            q: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            t_min: Rational::new(1.into(), 4096.into()),
            schedule_len: 12,
            max_paths: 2_000_000,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LqPoint {
    pub q: f64,
    /// Least-squares slope of `log S_t(q)` against `log t` over the finer half
    /// of the schedule.
    pub tau: f64,
    /// `log S_t(q) / log t` for each scale, coarse to fine.
    pub partials: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LqReport {
    pub points: Vec<LqPoint>,
    pub scales: Vec<f64>,
    pub t_min: f64,
    /// Size of the path cut at the finest scale.
    pub cut_size: usize,
    /// Paths visited during the descent.
    pub visited: usize,
    /// `τ̂(q)/q` at the largest positive q.
    pub alpha_min: Option<f64>,
    /// `τ̂(q)/q` at the most negative q.
    pub alpha_max: Option<f64>,
    /// `max_t |log S_t(1)|`, the observed comparability constant.
    pub comparability: f64,
}

/// Streaming log-sum-exp with compensated summation of the scaled terms.
#[derive(Clone, Copy, Debug)]
struct Lse {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Lse {
    const EMPTY: Lse = Lse {
        max: f64::NEG_INFINITY,
        sum: 0.0,
        comp: 0.0,
    };

    fn add_scaled(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn push(&mut self, x: f64) {
        if x > self.max {
            if self.max > f64::NEG_INFINITY {
                let f = (self.max - x).exp();
                self.sum *= f;
                self.comp *= f;
            }
            self.max = x;
        }
        self.add_scaled((x - self.max).exp());
    }

    fn merge(&mut self, other: &Lse) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            if self.max > f64::NEG_INFINITY {
                let f = (self.max - other.max).exp();
                self.sum *= f;
                self.comp *= f;
            }
            self.max = other.max;
        }
        let f = (other.max - self.max).exp();
        self.add_scaled(other.sum * f);
        self.add_scaled(other.comp * f);
    }

    fn ln(&self) -> f64 {
        self.max + (self.sum + self.comp).ln()
    }
}

struct Scale {
    ln: f64,
    exact: Option<Rational>,
}

struct Acc {
    // [scale][q]
    sums: Vec<Vec<Lse>>,
    counts: Vec<usize>,
    visited: usize,
}

impl Acc {
    fn new(ns: usize, nq: usize) -> Self {
        Acc {
            sums: vec![vec![Lse::EMPTY; nq]; ns],
            counts: vec![0; ns],
            visited: 0,
        }
    }

    fn merge(&mut self, o: &Acc) {
        for (a, b) in self.sums.iter_mut().zip(&o.sums) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.visited += o.visited;
    }
}

#[derive(Clone)]
struct Node {
    vertex: usize,
    edges: Vec<usize>,
    ln_len: f64,
    vec: Vec<Rational>,
}

struct Walker<'a> {
    g: &'a TransitionGraph,
    mats: Vec<RatMatrix>,
    ln_edge: Vec<f64>,
    scales: Vec<Scale>,
    qs: Vec<f64>,
    max_paths: usize,
    // shared across subtrees so the budget is global
    visited: AtomicUsize,
}

const TIE: f64 = 1e-9;

impl Walker<'_> {
    fn exact_length(&self, edges: &[usize]) -> ParamValue {
        let ctx = self.g.ifs().context();
        edges
            .iter()
            .fold(ctx.one(), |acc, e| &acc * &self.g.edge(*e).length)
    }

    /// `L(η) < t`, numerically with an exact fallback near ties. The
    /// measure lives at the witness point, so ties are decided there: a
    /// symbolic comparison would be indeterminate when `L(η)` and `t`
    /// coincide at the witness without being equal as expressions.
    fn below(&self, n: &Node, s: &Scale) -> Result<bool, AnalysisError> {
        let d = n.ln_len - s.ln;
        if d.abs() >= TIE || n.edges.is_empty() {
            return Ok(d < 0.0);
        }
        match &s.exact {
            Some(t) => {
                let len = self.exact_length(&n.edges);
                let e = len.enclosure();
                if e.lo == e.hi {
                    return Ok(e.lo < *t);
                }
                let ctx = self.g.ifs().context();
                Ok(len.lt(&ctx.rational(t.clone()))?)
            }
            None => Ok(d < 0.0),
        }
    }

    fn child(&self, n: &Node, e: usize) -> Node {
        let edge = self.g.edge(e);
        let m = &self.mats[e];
        let vec: Vec<Rational> = (0..m.cols)
            .map(|j| {
                n.vec
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .fold(Rational::zero(), |acc, (i, x)| acc + x * m.get(i, j))
            })
            .collect();
        let mut edges = n.edges.clone();
        edges.push(e);
        Node {
            vertex: edge.target,
            edges,
            ln_len: n.ln_len + self.ln_edge[e],
            vec,
        }
    }

    /// Record the contribution of a non-root node whose parent is above
    /// every scale it is below. Returns whether to descend further.
    fn visit(&self, n: &Node, parent_below: &[bool], acc: &mut Acc) -> Result<(bool, Vec<bool>), AnalysisError> {
        acc.visited += 1;
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.max_paths {
            return Err(AnalysisError::PathBudgetExceeded(self.max_paths));
        }
        let mut below: Vec<bool> = Vec::with_capacity(self.scales.len());
        for (j, s) in self.scales.iter().enumerate() {
            // scales are decreasing, so once above one we are above the rest
            let b = if j > 0 && !below[j - 1] {
                false
            } else {
                self.below(n, s)?
            };
            below.push(b);
        }
        let mass: Rational = n.vec.iter().fold(Rational::zero(), |a, x| a + x);
        let ln_mass = if mass.is_zero() {
            None
        } else {
            Some(rational_ln(&mass))
        };
        for j in 0..self.scales.len() {
            if below[j] && !parent_below[j] {
                acc.counts[j] += 1;
                if let Some(lm) = ln_mass {
                    for (k, q) in self.qs.iter().enumerate() {
                        acc.sums[j][k].push(q * lm);
                    }
                }
            }
        }
        let descend = !below[self.scales.len() - 1];
        Ok((descend, below))
    }

    fn dfs(&self, root: Node, root_below: Vec<bool>, acc: &mut Acc) -> Result<(), AnalysisError> {
        let mut stack = vec![(root, root_below)];
        while let Some((n, below)) = stack.pop() {
            let out = self.g.out_edges(n.vertex);
            for &e in out.iter().rev() {
                let c = self.child(&n, e);
                let (descend, cb) = self.visit(&c, &below, acc)?;
                if descend {
                    stack.push((c, cb));
                }
            }
        }
        Ok(())
    }
}

fn schedule(t_min: &Rational, k: usize) -> Vec<Scale> {
    let ln_min = rational_ln(t_min);
    let exact_root = integer_root(t_min, k);
    (1..=k)
        .map(|j| Scale {
            ln: ln_min * j as f64 / k as f64,
            exact: exact_root.as_ref().map(|r| pow(r, j)),
        })
        .collect()
}

fn pow(r: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |a, _| a * r)
}

fn integer_root(x: &Rational, k: usize) -> Option<Rational> {
    let n = x.numer().nth_root(k as u32);
    let d = x.denom().nth_root(k as u32);
    let r = Rational::new(n, d);
    (pow(&r, k) == *x).then_some(r)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Estimates of `τ(q)` from sums of `‖T*(η)‖₁^q` over path cuts.
pub fn lq_spectrum(g: &TransitionGraph, probs: &[Rational], opts: &LqOptions) -> Result<LqReport, AnalysisError> {
    g.require_closed()?;
    if opts.q.is_empty() || opts.q.iter().any(|q| !q.is_finite()) {
        return Err(AnalysisError::InvalidOption("q list must be non-empty and finite".into()));
    }
    if opts.t_min <= Rational::zero() || opts.t_min >= Rational::one() {
        return Err(AnalysisError::InvalidOption("t_min must lie in (0, 1)".into()));
    }
    if opts.schedule_len < 2 {
        return Err(AnalysisError::InvalidOption("schedule needs at least two scales".into()));
    }
    let mut qs = opts.q.clone();
    let q_one = qs.len();
    qs.push(1.0);
    let w = Walker {
        g,
        mats: g.edges().iter().map(|e| e.matrix.eval(probs)).collect(),
        ln_edge: g
            .edges()
            .iter()
            .map(|e| {
                let (lo, hi) = e.length.ln_enclosure();
                0.5 * (lo + hi)
            })
            .collect(),
        scales: schedule(&opts.t_min, opts.schedule_len),
        qs,
        max_paths: opts.max_paths,
        visited: AtomicUsize::new(0),
    };
    let ns = w.scales.len();
    let nq = w.qs.len();

    // Breadth-first frontier; its interior is accumulated up front and the
    // subtrees below it are walked independently.
    let root = Node {
        vertex: g.root(),
        edges: Vec::new(),
        ln_len: 0.0,
        vec: vec![Rational::one()],
    };
    let mut head = Acc::new(ns, nq);
    let mut frontier = vec![(root, vec![false; ns])];
    for _ in 0..8 {
        if frontier.is_empty() || frontier.len() >= 64 {
            break;
        }
        let mut next = Vec::new();
        for (n, below) in &frontier {
            for &e in g.out_edges(n.vertex) {
                let c = w.child(n, e);
                let (descend, cb) = w.visit(&c, below, &mut head)?;
                if descend {
                    next.push((c, cb));
                }
            }
        }
        frontier = next;
    }
    let parts = map_ordered(opts.execution, &frontier, |(n, b)| {
        let mut acc = Acc::new(ns, nq);
        w.dfs(n.clone(), b.clone(), &mut acc).map(|_| acc)
    });
    let mut total = head;
    for p in parts {
        total.merge(&p?);
    }

    let ln_t: Vec<f64> = w.scales.iter().map(|s| s.ln).collect();
    let fine = ns / 2;
    let mut points = Vec::new();
    for (k, &q) in opts.q.iter().enumerate() {
        let ln_s: Vec<f64> = (0..ns).map(|j| total.sums[j][k].ln()).collect();
        let partials: Vec<f64> = ln_s.iter().zip(&ln_t).map(|(s, t)| s / t).collect();
        let tau = slope(&ln_t[fine..], &ln_s[fine..]);
        points.push(LqPoint { q, tau, partials });
    }
    let comparability = (0..ns)
        .map(|j| total.sums[j][q_one].ln().abs())
        .fold(0.0, f64::max);
    let pos = points
        .iter()
        .filter(|p| p.q > 0.0)
        .max_by(|a, b| a.q.total_cmp(&b.q));
    let neg = points
        .iter()
        .filter(|p| p.q < 0.0)
        .min_by(|a, b| a.q.total_cmp(&b.q));
    Ok(LqReport {
        alpha_min: pos.map(|p| p.tau / p.q),
        alpha_max: neg.map(|p| p.tau / p.q),
        points,
        scales: ln_t.iter().map(|l| l.exp()).collect(),
        t_min: ln_t[ns - 1].exp(),
        cut_size: total.counts[ns - 1],
        visited: total.visited,
        comparability,
    })
}

const ALPHA_GRID: usize = 50;

/// Discrete Legendre transform `f̂(α) = min_q (αq − τ̂(q))` on an α grid
/// spanning the consecutive slopes of τ̂.
pub fn concave_conjugate(report: &LqReport) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = report.points.iter().map(|p| (p.q, p.tau)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 2 {
        return Vec::new();
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut alphas: Vec<f64> = if hi - lo <= 1e-9 * hi.abs().max(1.0) {
        vec![0.5 * (lo + hi)]
    } else {
        let mut a: Vec<f64> = (0..ALPHA_GRID)
            .map(|i| lo + (hi - lo) * i as f64 / (ALPHA_GRID - 1) as f64)
            .collect();
        a.extend(&slopes);
        a
    };
    alphas.sort_by(f64::total_cmp);
    alphas.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    alphas
        .into_iter()
        .map(|a| {
            let f = pts
                .iter()
                .map(|(q, t)| a * q - t)
                .fold(f64::INFINITY, f64::min);
            (a, f)
        })
        .collect()
}

/// Largest violation of concavity of `(q, τ̂(q))` on its grid.
pub fn concavity_defect(report: &LqReport) -> f64 {
    let mut pts: Vec<(f64, f64)> = report.points.iter().map(|p| (p.q, p.tau)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(3)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
            chord - y1
        })
        .fold(0.0, f64::max)
}
