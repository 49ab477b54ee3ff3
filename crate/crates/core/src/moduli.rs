//! Search-based estimates of the modulus of roundness `ν_X(p)`, maximal
//! roundness, minimal coroundness, the moduli of smoothness and convexity,
//! the Clarkson ratio, the duality gap and the expansion exponent of the
//! norm at a point.
//!
//! Suprema are estimated from below and infima from above: every reported
//! value is the objective evaluated at the returned witness pair.

use crate::error::{invalid, Error, Result};
use crate::search::{self, Goal, Problem, SearchBudget};
use crate::spaces::{Space, SpaceSpec, Vector};

/// Margin above a threshold that counts as a violation in bisections.
pub const VIOLATION_MARGIN: f64 = 1e-6;
/// Pairs with `‖x‖^p + ‖y‖^p` below this are skipped.
const DEGENERATE_DENOMINATOR: f64 = 1e-12;
/// Default bracket width for `mr`/`mc` bisections.
pub const DEFAULT_TOL_P: f64 = 5e-3;

/// One point of a sampled modulus curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusSample {
    pub argument: f64,
    /// Reported estimate; for `ν` this is the clamped value.
    pub value: f64,
    /// Objective at the witness, before any clamping.
    pub raw: f64,
    pub witness: (Vector, Vector),
    pub budget: SearchBudget,
    pub evaluations: u64,
    /// The estimate was moved into its a-priori range.
    pub clamped: bool,
    /// A feasible pair was found (always true except for `δ`).
    pub feasible: bool,
}

fn add(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + y;
    }
}

fn sub(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i % dim] = 1.0;
    e
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().chain(b).copied().collect()
}

fn witness(z: &[f64]) -> Result<(Vector, Vector)> {
    let d = z.len() / 2;
    Ok((Vector::new(z[..d].to_vec())?, Vector::new(z[d..].to_vec())?))
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `(‖x+y‖^p + ‖x−y‖^p)/(‖x‖^p + ‖y‖^p)`; `None` when degenerate.
pub fn roundness_ratio(space: &Space, x: &[f64], y: &[f64], p: f64) -> Option<f64> {
    let mut s = vec![0.0; x.len()];
    let mut d = vec![0.0; x.len()];
    add(x, y, &mut s);
    sub(x, y, &mut d);
    let den = space.norm(x).powf(p) + space.norm(y).powf(p);
    if !(den >= DEGENERATE_DENOMINATOR) {
        return None;
    }
    let v = (space.norm(&s).powf(p) + space.norm(&d).powf(p)) / den;
    v.is_finite().then_some(v)
}

/// Estimate `ν_X(p)` from below, clamped to `[max(2, 2^{p−1}), 2^p]`.
pub fn nu_estimate(space: &Space, p: f64, budget: &SearchBudget) -> Result<ModulusSample> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("nu_estimate needs finite p >= 1, got {p}")));
    }
    budget.validate()?;
    let dim = space.dim();
    let n = 2 * dim;
    let e0 = unit(dim, 0);
    let zero = vec![0.0; dim];
    let mut candidates = vec![concat(&e0, &zero), concat(&e0, &e0)];
    if dim > 1 {
        candidates.push(concat(&e0, &unit(dim, 1)));
    }
    let starts = search::starts_with(candidates, n, budget);
    let problem = Problem {
        dim: n,
        goal: Goal::Maximize,
        objective: |z: &[f64]| roundness_ratio(space, &z[..dim], &z[dim..], p),
        normalize: search::normalize_whole,
        starts: &starts,
    };
    let out = search::optimize(&problem, budget)
        .ok_or_else(|| Error::Evaluation("no admissible pair for nu".into()))?;

    let lower = 2f64.max(2f64.powf(p - 1.0));
    let upper = 2f64.powf(p);
    let raw = out.value;
    let value = raw.clamp(lower, upper);
    let clamped = value != raw;
    if clamped {
        log::debug!("nu_estimate({p}) clamped raw value {raw} into [{lower}, {upper}]");
    }
    Ok(ModulusSample {
        argument: p,
        value,
        raw,
        witness: witness(&out.point)?,
        budget: *budget,
        evaluations: out.evaluations,
        clamped,
        feasible: true,
    })
}

/// Bisection bracket for a threshold exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// The inequality under test holds (no violation found) at `lo`.
    pub verdict_lo: bool,
    /// The inequality under test holds at `hi`.
    pub verdict_hi: bool,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `lo − slack ≤ value ≤ hi + slack`.
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lo - slack <= value && value <= self.hi + slack
    }

    fn point(p: f64, verdict: bool) -> Self {
        Bracket {
            lo: p,
            hi: p,
            verdict_lo: verdict,
            verdict_hi: verdict,
        }
    }
}

fn bisect(
    mut holds_at: f64,
    mut fails_at: f64,
    tol: f64,
    violated: impl Fn(f64) -> Result<bool>,
) -> Result<(f64, f64)> {
    while (fails_at - holds_at).abs() > tol {
        let mid = 0.5 * (holds_at + fails_at);
        if violated(mid)? {
            fails_at = mid;
        } else {
            holds_at = mid;
        }
    }
    Ok((holds_at, fails_at))
}

/// Bracket `mr(X) = sup{p : ν_X(p) = 2}` by bisection on `[1, 2]`.
pub fn mr_estimate(space: &Space, tol_p: f64, budget: &SearchBudget) -> Result<Bracket> {
    if !(tol_p > 0.0) {
        return Err(invalid("tol_p must be positive"));
    }
    let violated = |p: f64| -> Result<bool> {
        Ok(nu_estimate(space, p, budget)?.value > 2.0 + VIOLATION_MARGIN)
    };
    if !violated(2.0)? {
        return Ok(Bracket::point(2.0, true));
    }
    let holds_at_one = !violated(1.0)?;
    if !holds_at_one {
        log::warn!("mr_estimate: violation reported at p = 1");
        return Ok(Bracket {
            lo: 1.0,
            hi: 1.0,
            verdict_lo: false,
            verdict_hi: false,
        });
    }
    let (lo, hi) = bisect(1.0, 2.0, tol_p, violated)?;
    Ok(Bracket {
        lo,
        hi,
        verdict_lo: true,
        verdict_hi: false,
    })
}

/// Result of a minimal coroundness search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coroundness {
    Bracket(Bracket),
    /// Coroundness still fails at `p_max`.
    AtLeast(f64),
}

/// Bracket `mc(X) = inf{p : ν_X(p) = 2^{p−1}}` by bisection on `[2, p_max]`.
pub fn mc_estimate(space: &Space, p_max: f64, tol_p: f64, budget: &SearchBudget) -> Result<Coroundness> {
    if !(p_max >= 2.0 && p_max.is_finite()) {
        return Err(invalid(format!("p_max must be a finite value >= 2, got {p_max}")));
    }
    if !(tol_p > 0.0) {
        return Err(invalid("tol_p must be positive"));
    }
    let violated = |p: f64| -> Result<bool> {
        Ok(nu_estimate(space, p, budget)?.value > 2f64.powf(p - 1.0) + VIOLATION_MARGIN)
    };
    if !violated(2.0)? {
        return Ok(Coroundness::Bracket(Bracket::point(2.0, true)));
    }
    if violated(p_max)? {
        return Ok(Coroundness::AtLeast(p_max));
    }
    let (hi, lo) = bisect(p_max, 2.0, tol_p, violated)?;
    Ok(Coroundness::Bracket(Bracket {
        lo,
        hi,
        verdict_lo: false,
        verdict_hi: true,
    }))
}

fn half_normalized(space: &Space, z: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = z.len() / 2;
    let (nx, nu) = (space.norm(&z[..d]), space.norm(&z[d..]));
    if !(nx > 1e-300 && nu > 1e-300 && nx.is_finite() && nu.is_finite()) {
        return None;
    }
    Some((
        z[..d].iter().map(|v| v / nx).collect(),
        z[d..].iter().map(|v| v / nu).collect(),
    ))
}

fn smoothness_objective(space: &Space, z: &[f64], t: f64) -> Option<f64> {
    let (x, u) = half_normalized(space, z)?;
    let y: Vec<f64> = u.iter().map(|v| t * v).collect();
    let mut s = vec![0.0; x.len()];
    let mut d = vec![0.0; x.len()];
    add(&x, &y, &mut s);
    sub(&x, &y, &mut d);
    let v = 0.5 * (space.norm(&s) + space.norm(&d)) - 1.0;
    v.is_finite().then_some(v)
}

/// Estimate the modulus of smoothness `ρ_X(t)` from below. The witness is
/// `(x, y)` with `‖x‖ = 1`, `‖y‖ = t`.
pub fn rho_estimate(space: &Space, t: f64, budget: &SearchBudget) -> Result<ModulusSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("rho_estimate needs finite t >= 0, got {t}")));
    }
    budget.validate()?;
    let dim = space.dim();
    let e0 = unit(dim, 0);
    let candidates = vec![concat(&e0, &unit(dim, 1)), concat(&unit(dim, 1), &e0)];
    let starts = search::starts_with(candidates, 2 * dim, budget);
    let problem = Problem {
        dim: 2 * dim,
        goal: Goal::Maximize,
        objective: |z: &[f64]| smoothness_objective(space, z, t),
        normalize: search::normalize_halves,
        starts: &starts,
    };
    let out = search::optimize(&problem, budget)
        .ok_or_else(|| Error::Evaluation("no admissible pair for rho".into()))?;
    let (x, u) = half_normalized(space, &out.point)
        .ok_or_else(|| Error::Evaluation("degenerate rho witness".into()))?;
    let y: Vec<f64> = u.iter().map(|v| t * v).collect();
    let raw = out.value;
    let value = raw.clamp(0.0, t);
    Ok(ModulusSample {
        argument: t,
        value,
        raw,
        witness: (Vector::new(x)?, Vector::new(y)?),
        budget: *budget,
        evaluations: out.evaluations,
        clamped: value != raw,
        feasible: true,
    })
}

/// Estimate the modulus of convexity `δ_X(ε)` from above by searching unit
/// pairs and discarding those with `‖x − y‖ < ε`.
pub fn delta_estimate(space: &Space, eps: f64, budget: &SearchBudget) -> Result<ModulusSample> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(invalid(format!("delta_estimate needs 0 <= eps <= 2, got {eps}")));
    }
    budget.validate()?;
    let dim = space.dim();
    let n = 2 * dim;
    let objective = |z: &[f64]| -> Option<f64> {
        let (x, y) = half_normalized(space, z)?;
        let mut s = vec![0.0; dim];
        let mut d = vec![0.0; dim];
        sub(&x, &y, &mut d);
        if space.norm(&d) < eps {
            return None;
        }
        add(&x, &y, &mut s);
        let v = 1.0 - 0.5 * space.norm(&s);
        v.is_finite().then_some(v)
    };

    // infeasible starts are pulled towards antipodal pairs until feasible
    let e0 = unit(dim, 0);
    let neg_e0: Vec<f64> = e0.iter().map(|v| -v).collect();
    let mut starts = vec![concat(&e0, &neg_e0)];
    if dim > 1 {
        starts.push(concat(&e0, &unit(dim, 1)));
    }
    for mut z in search::start_points(n, budget.starts, budget.seed) {
        let mut weight = 1.0;
        for _ in 0..40 {
            search::normalize_halves(&mut z);
            if objective(&z).is_some() {
                break;
            }
            weight *= 0.5;
            let (x, y) = z.split_at_mut(dim);
            for (yi, xi) in y.iter_mut().zip(x.iter()) {
                *yi = -xi + weight * *yi;
            }
        }
        starts.push(z);
    }
    let problem = Problem {
        dim: n,
        goal: Goal::Minimize,
        objective,
        normalize: search::normalize_halves,
        starts: &starts,
    };
    match search::optimize(&problem, budget) {
        Some(out) => {
            let (x, y) = half_normalized(space, &out.point)
                .ok_or_else(|| Error::Evaluation("degenerate delta witness".into()))?;
            let raw = out.value;
            let value = raw.clamp(0.0, 1.0);
            Ok(ModulusSample {
                argument: eps,
                value,
                raw,
                witness: (Vector::new(x)?, Vector::new(y)?),
                budget: *budget,
                evaluations: out.evaluations,
                clamped: value != raw,
                feasible: true,
            })
        }
        None => {
            log::warn!("delta_estimate: no feasible pair with ‖x − y‖ ≥ {eps}");
            Ok(ModulusSample {
                argument: eps,
                value: 0.0,
                raw: f64::NAN,
                witness: (Vector::new(e0.clone())?, Vector::new(neg_e0)?),
                budget: *budget,
                evaluations: 0,
                clamped: false,
                feasible: false,
            })
        }
    }
}

/// `(‖x+y‖^{p'} + ‖x−y‖^{p'})^{1/p'} / (2^{1/p'} (‖x‖^p + ‖y‖^p)^{1/p})`.
pub fn clarkson_quotient(space: &Space, x: &[f64], y: &[f64], p: f64) -> Option<f64> {
    let q = conjugate(p);
    let mut s = vec![0.0; x.len()];
    let mut d = vec![0.0; x.len()];
    add(x, y, &mut s);
    sub(x, y, &mut d);
    let den_sum = space.norm(x).powf(p) + space.norm(y).powf(p);
    if !(den_sum >= DEGENERATE_DENOMINATOR) {
        return None;
    }
    let num = (space.norm(&s).powf(q) + space.norm(&d).powf(q)).powf(1.0 / q);
    let v = num / (2f64.powf(1.0 / q) * den_sum.powf(1.0 / p));
    v.is_finite().then_some(v)
}

/// Estimate the supremum of the Clarkson quotient; values `≤ 1` are
/// consistent with Clarkson roundness `p`.
pub fn clarkson_ratio(space: &Space, p: f64, budget: &SearchBudget) -> Result<ModulusSample> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(invalid(format!("clarkson_ratio needs 1 < p <= 2, got {p}")));
    }
    budget.validate()?;
    let dim = space.dim();
    let e0 = unit(dim, 0);
    let mut candidates = vec![concat(&e0, &vec![0.0; dim]), concat(&e0, &e0)];
    if dim > 1 {
        candidates.push(concat(&e0, &unit(dim, 1)));
    }
    let starts = search::starts_with(candidates, 2 * dim, budget);
    let problem = Problem {
        dim: 2 * dim,
        goal: Goal::Maximize,
        objective: |z: &[f64]| clarkson_quotient(space, &z[..dim], &z[dim..], p),
        normalize: search::normalize_whole,
        starts: &starts,
    };
    let out = search::optimize(&problem, budget)
        .ok_or_else(|| Error::Evaluation("no admissible pair for the Clarkson ratio".into()))?;
    Ok(ModulusSample {
        argument: p,
        value: out.value,
        raw: out.value,
        witness: witness(&out.point)?,
        budget: *budget,
        evaluations: out.evaluations,
        clamped: false,
        feasible: true,
    })
}

/// Both sides of `ν_X(p)^{1/p} = ν_{X*}(p')^{1/p'}` and their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityGap {
    pub primal: ModulusSample,
    pub dual: ModulusSample,
    pub primal_root: f64,
    pub dual_root: f64,
    pub gap: f64,
}

/// Compare `ν` of a planar space at `p` with `ν` of its numerical dual at `p'`.
pub fn duality_gap(base: &SpaceSpec, p: f64, budget: &SearchBudget, resolution: usize) -> Result<DualityGap> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("duality_gap needs finite p > 1, got {p}")));
    }
    if base.dim() != 2 {
        return Err(invalid(format!(
            "duality_gap needs a 2-dimensional base, got dimension {}",
            base.dim()
        )));
    }
    let primal_space = base.build()?;
    let dual_space = SpaceSpec::numerical_dual(base.clone(), resolution).build()?;
    let q = conjugate(p);
    let primal = nu_estimate(&primal_space, p, budget)?;
    let dual = nu_estimate(&dual_space, q, budget)?;
    let primal_root = primal.value.powf(1.0 / p);
    let dual_root = dual.value.powf(1.0 / q);
    Ok(DualityGap {
        gap: (primal_root - dual_root).abs(),
        primal,
        dual,
        primal_root,
        dual_root,
    })
}

/// Remainders below this are treated as exact linearity.
const DEGENERATE_REMAINDER: f64 = 1e-13;

/// Estimated order `r` in `‖x + ty‖ = 1 + f_x(y) t + O(t^r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetEstimate {
    /// Least-squares slope of `log|remainder|` against `log t`; `+∞` when
    /// every remainder vanished.
    pub exponent: f64,
    /// Symmetric difference quotient at the smallest grid `t`.
    pub derivative: f64,
    /// Some remainders fell below `1e-13` and were dropped.
    pub degenerate: bool,
    /// One-sided derivatives disagree: the norm is not smooth at `x` in
    /// direction `y`.
    pub ambiguous: bool,
}

pub fn frechet_exponent(space: &Space, x: &[f64], y: &[f64], t_grid: &[f64]) -> Result<FrechetEstimate> {
    let dim = space.dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::Shape {
            expected: dim,
            got: if x.len() != dim { x.len() } else { y.len() },
        });
    }
    for (name, v) in [("x", x), ("y", y)] {
        let n = space.try_norm(v)?;
        if (n - 1.0).abs() > 1e-8 {
            return Err(invalid(format!("{name} must have unit norm, got {n}")));
        }
    }
    if t_grid.len() < 2 {
        return Err(invalid("t grid needs at least two points"));
    }
    if t_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("t grid must be strictly decreasing"));
    }
    let t_min = t_grid[t_grid.len() - 1];
    if !(t_min >= 1e-6) {
        return Err(invalid(format!("smallest t must be >= 1e-6, got {t_min}")));
    }

    let along = |t: f64| -> f64 {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
        space.norm(&z)
    };
    let plus_min = along(t_min);
    let minus_min = along(-t_min);
    let derivative = (plus_min - minus_min) / (2.0 * t_min);

    let one_sided_gap = |t: f64| ((along(t) - 1.0) / t - (1.0 - along(-t)) / t).abs();
    let gap_small = one_sided_gap(t_min);
    let gap_large = one_sided_gap(t_grid[0]);
    let ambiguous = gap_small > 1e-6 && gap_small > 0.5 * gap_large;

    let mut logs = Vec::with_capacity(t_grid.len());
    let mut degenerate = false;
    for &t in t_grid {
        let rem = (along(t) - 1.0 - derivative * t).abs();
        if rem < DEGENERATE_REMAINDER {
            degenerate = true;
            continue;
        }
        logs.push((t.ln(), rem.ln()));
    }
    let exponent = if logs.len() < 2 {
        degenerate = true;
        f64::INFINITY
    } else {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
        let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(FrechetEstimate {
        exponent,
        derivative,
        degenerate,
        ambiguous,
    })
}

/// `ν(p)^{1/p} − (ν(p₀)^{1/p₀})^{1−θ} (ν(p₁)^{1/p₁})^θ` with
/// `1/p = (1−θ)/p₀ + θ/p₁`. The endpoint estimates use four times the
/// starts of `budget`. Positive values beyond search tolerance indicate an
/// under-converged estimate.
pub fn log_convexity_check(space: &Space, p0: f64, p1: f64, theta: f64, budget: &SearchBudget) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1), got {theta}")));
    }
    if !(p0 >= 1.0 && p1 >= 1.0) {
        return Err(invalid("p0 and p1 must be >= 1"));
    }
    let p = 1.0 / ((1.0 - theta) / p0 + theta / p1);
    let wide = budget.scaled(4);
    let lhs = nu_estimate(space, p, budget)?.value.powf(1.0 / p);
    let r0 = nu_estimate(space, p0, &wide)?.value.powf(1.0 / p0);
    let r1 = nu_estimate(space, p1, &wide)?.value.powf(1.0 / p1);
    Ok(lhs - r0.powf(1.0 - theta) * r1.powf(theta))
}
