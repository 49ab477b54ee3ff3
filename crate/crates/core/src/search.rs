//! Deterministic multi-start pattern search.
//!
//! Starts come from a Halton sequence with a seeded Cranley–Patterson shift.
//! Each start is refined by opportunistic polling along the coordinate axes
//! plus a few rotating pseudo-random directions; the step shrinks by
//! `shrink` after every unsuccessful poll level. Starts are refined in
//! parallel and reduced by `(value, start index)`, so results do not depend
//! on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Search effort and seed for every modulus estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub starts: usize,
    pub refine_steps: usize,
    pub shrink: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            starts: 256,
            refine_steps: 60,
            shrink: 0.5,
            seed: 0,
        }
    }
}

impl SearchBudget {
    pub fn new(starts: usize, refine_steps: usize, shrink: f64, seed: u64) -> Result<Self> {
        let b = SearchBudget {
            starts,
            refine_steps,
            shrink,
            seed,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(invalid("budget needs at least one start"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(invalid(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same budget with `factor` times as many starts.
    pub fn scaled(mut self, factor: usize) -> Self {
        self.starts = self.starts.saturating_mul(factor.max(1));
        self
    }
}

/// Whether a move should be accepted: maximise or minimise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Maximize,
    Minimize,
}

impl Goal {
    #[inline]
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Goal::Maximize => a > b,
            Goal::Minimize => a < b,
        }
    }
}

/// Best point found by a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    /// Index into [`Problem::starts`] of the start that produced the optimum.
    pub start_index: usize,
    pub evaluations: u64,
}

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-13;
const MAX_MOVES_PER_LEVEL: usize = 200;
const EXTRA_DIRECTIONS: usize = 4;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// `count` points in `[-1, 1]^dim`: shifted Halton sequence.
pub fn start_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let h = radical_inverse(i as u64 + 1, PRIMES[d % PRIMES.len()])
                        + if d >= PRIMES.len() { 0.5 } else { 0.0 };
                    2.0 * (h + shift[d]).fract() - 1.0
                })
                .collect()
        })
        .collect()
}

/// Problem definition handed to [`optimize`].
pub struct Problem<'a, F, N>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
    N: Fn(&mut [f64]) + Sync,
{
    pub dim: usize,
    pub goal: Goal,
    /// Objective; `None` marks an infeasible or degenerate point.
    pub objective: F,
    /// Re-normalisation applied after every accepted move.
    pub normalize: N,
    /// Starting points, in priority order (see [`starts_with`]).
    pub starts: &'a [Vec<f64>],
}

/// Caller-supplied candidates followed by `budget.starts` Halton points.
pub fn starts_with(candidates: Vec<Vec<f64>>, dim: usize, budget: &SearchBudget) -> Vec<Vec<f64>> {
    let mut s = candidates;
    s.extend(start_points(dim, budget.starts, budget.seed));
    s
}

/// Run the multi-start pattern search. Returns `None` when no start ever
/// produced a feasible point.
pub fn optimize<F, N>(problem: &Problem<'_, F, N>, budget: &SearchBudget) -> Option<SearchOutcome>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
    N: Fn(&mut [f64]) + Sync,
{
    let results: Vec<(usize, Option<(f64, Vec<f64>)>, u64)> = problem
        .starts
        .par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let (best, evals) = refine(problem, budget, start.clone(), idx as u64);
            (idx, best, evals)
        })
        .collect();

    let evaluations = results.iter().map(|r| r.2).sum();
    let mut best: Option<SearchOutcome> = None;
    // results are in start order, so a strict comparison keeps the lowest
    // index on ties
    for (idx, r, _) in results {
        if let Some((v, point)) = r {
            let replace = match &best {
                None => true,
                Some(b) => problem.goal.better(v, b.value),
            };
            if replace {
                best = Some(SearchOutcome {
                    value: v,
                    point,
                    start_index: idx,
                    evaluations: 0,
                });
            }
        }
    }
    best.map(|mut b| {
        b.evaluations = evaluations;
        b
    })
}

fn refine<F, N>(
    problem: &Problem<'_, F, N>,
    budget: &SearchBudget,
    mut x: Vec<f64>,
    stream: u64,
) -> (Option<(f64, Vec<f64>)>, u64)
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
    N: Fn(&mut [f64]) + Sync,
{
    let dim = problem.dim;
    let goal = problem.goal;
    let mut evals = 1u64;
    (problem.normalize)(&mut x);
    let mut fx = match (problem.objective)(&x) {
        Some(v) if v.is_finite() => v,
        _ => return (None, evals),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x9E37_79B9_7F4A_7C15);
    rng.set_stream(stream);

    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * dim + 2 * EXTRA_DIRECTIONS);
    let mut trial = vec![0.0; dim];
    let mut step = INITIAL_STEP;
    let mut last_good: Option<usize> = None;

    for _ in 0..budget.refine_steps {
        dirs.clear();
        for d in 0..dim {
            let mut e = vec![0.0; dim];
            e[d] = 1.0;
            dirs.push(e.clone());
            e[d] = -1.0;
            dirs.push(e);
        }
        for _ in 0..EXTRA_DIRECTIONS {
            let mut r: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                r.iter_mut().for_each(|v| *v /= n);
                dirs.push(r.iter().map(|v| -v).collect());
                dirs.push(r);
            }
        }

        let mut moves = 0;
        loop {
            let mut improved = false;
            let order = last_good
                .into_iter()
                .chain((0..dirs.len()).filter(|&i| Some(i) != last_good));
            for i in order {
                for (t, (xi, di)) in trial.iter_mut().zip(x.iter().zip(&dirs[i])) {
                    *t = xi + step * di;
                }
                (problem.normalize)(&mut trial);
                evals += 1;
                if let Some(v) = (problem.objective)(&trial) {
                    if v.is_finite() && goal.better(v, fx) {
                        x.copy_from_slice(&trial);
                        fx = v;
                        last_good = Some(i);
                        improved = true;
                        break;
                    }
                }
            }
            moves += 1;
            if !improved || moves >= MAX_MOVES_PER_LEVEL {
                break;
            }
        }
        step *= budget.shrink;
        if step < MIN_STEP {
            break;
        }
    }
    (Some((fx, x)), evals)
}

/// Scale the whole vector to unit Euclidean length.
pub fn normalize_whole(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Scale each half of the vector to unit Euclidean length.
pub fn normalize_halves(x: &mut [f64]) {
    let h = x.len() / 2;
    let (a, b) = x.split_at_mut(h);
    normalize_whole(a);
    normalize_whole(b);
}
