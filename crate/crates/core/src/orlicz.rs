//! Orlicz functions and the checks applied to them: the Δ₂ index at 0,
//! super-multiplicativity, convexity of `Φ(√t)` and the smoothness-ratio
//! supremum that bounds the modulus of smoothness of `ℓ_Φ`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::quad;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Points in the generic validation grid on `[0, VALIDATION_SPAN]`.
const VALIDATION_POINTS: usize = 4001;
const VALIDATION_SPAN: f64 = 4.0;
const SECOND_DIFF_SLACK: f64 = 1e-10;
/// Relative step used for the central-difference derivative fallback.
const DERIV_REL_STEP: f64 = 1e-5;

/// Parameters carried alongside an Orlicz function for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczParams {
    pub p: f64,
    pub t0: Option<f64>,
}

/// An evaluable Orlicz function `Φ : [0, ∞) → ℝ`.
///
/// Construction validates `Φ(0) = 0`, strict monotonicity and convexity on a
/// uniform grid, and growth at `t = 10³`.
#[derive(Clone)]
pub struct OrliczFunction {
    label: String,
    params: OrliczParams,
    eval: RealFn,
    deriv: Option<RealFn>,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczFunction")
            .field("label", &self.label)
            .field("params", &self.params)
            .field("has_derivative", &self.deriv.is_some())
            .finish()
    }
}

impl OrliczFunction {
    pub fn new(
        label: impl Into<String>,
        params: OrliczParams,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: Option<RealFn>,
    ) -> Result<Self> {
        let f = OrliczFunction {
            label: label.into(),
            params,
            eval: Arc::new(eval),
            deriv,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> OrliczParams {
        self.params
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    /// `Φ'(t)`: the supplied derivative, or a central difference with step
    /// `t·1e-5`.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.deriv {
            Some(d) => d(t),
            None => {
                let h = t * DERIV_REL_STEP;
                (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let zero = self.eval(0.0);
        if zero != 0.0 {
            return Err(Error::InvalidOrlicz {
                at: 0.0,
                reason: format!("Φ(0) = {zero}"),
            });
        }
        let grid: Vec<f64> = (0..VALIDATION_POINTS)
            .map(|i| VALIDATION_SPAN * i as f64 / (VALIDATION_POINTS - 1) as f64)
            .collect();
        check_increasing_convex(&grid, |t| self.eval(t)).map_err(|(at, reason)| {
            Error::InvalidOrlicz { at, reason }
        })?;
        let far = self.eval(1e3);
        let one = self.eval(1.0);
        if !far.is_finite() || far < 1e3 * one * (1.0 - 1e-9) {
            return Err(Error::InvalidOrlicz {
                at: 1e3,
                reason: format!("insufficient growth: Φ(1e3) = {far}, Φ(1) = {one}"),
            });
        }
        Ok(())
    }
}

/// Strict increase and second differences ≥ −1e-10 on a sorted grid.
/// Returns the first offending grid point.
fn check_increasing_convex(grid: &[f64], f: impl Fn(f64) -> f64) -> std::result::Result<(), (f64, String)> {
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    for (i, w) in vals.windows(2).enumerate() {
        if !w[1].is_finite() {
            return Err((grid[i + 1], "non-finite value".into()));
        }
        if w[1] <= w[0] {
            return Err((grid[i + 1], "not strictly increasing".into()));
        }
    }
    for (i, w) in vals.windows(3).enumerate() {
        let d2 = w[2] - 2.0 * w[1] + w[0];
        if d2 < -SECOND_DIFF_SLACK {
            return Err((grid[i + 1], format!("not convex (second difference {d2:e})")));
        }
    }
    Ok(())
}

/// `Φ(t) = t^p`.
pub fn power(p: f64) -> Result<OrliczFunction> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("power Orlicz function needs p >= 1, got {p}")));
    }
    OrliczFunction::new(
        format!("power(p={p})"),
        OrliczParams { p, t0: None },
        move |t| t.powf(p),
        Some(Arc::new(move |t: f64| p * t.powf(p - 1.0))),
    )
}

/// Piecewise logarithmic building blocks of the first example.
#[derive(Debug, Clone, Copy)]
struct Example1 {
    p: f64,
    /// `|log t0|`
    lt0: f64,
}

impl Example1 {
    /// `Ψ₀(t) = t^p |log(t0 t)| + (1 − 1/p) t^p`
    fn psi0(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        t.powf(self.p) * (self.lt0 - t.ln() + 1.0 - 1.0 / self.p)
    }

    fn psi0_deriv(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let p = self.p;
        t.powf(p - 1.0) * (p * (self.lt0 - t.ln()) + p - 2.0)
    }

    fn psi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            self.psi0(t)
        } else {
            self.psi0(1.0) + (t - 1.0) * self.psi0_deriv(1.0)
        }
    }

    fn psi_deriv(&self, t: f64) -> f64 {
        self.psi0_deriv(t.min(1.0))
    }

    /// `∫₀¹ Ψ(s)/s ds = (1 + |log t0|)/p`
    fn head_integral(&self) -> f64 {
        (1.0 + self.lt0) / self.p
    }

    /// Closed form of `Φ(t) = ∫₀ᵗ Ψ(s)/s ds / ∫₀¹ Ψ(s)/s ds`.
    fn phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let c_p = 1.0 / (1.0 + self.lt0);
        if t <= 1.0 {
            c_p * t.powf(self.p) * (1.0 + self.lt0 - t.ln())
        } else {
            let a = self.psi0(1.0);
            let b = self.psi0_deriv(1.0);
            1.0 + ((a - b) * t.ln() + b * (t - 1.0)) / self.head_integral()
        }
    }

    fn phi_deriv(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.psi(t) / (t * self.head_integral())
    }
}

fn example1_params(p: f64, t0: f64) -> Result<Example1> {
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("example 1 needs 1 < p < 2, got {p}")));
    }
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(invalid(format!("example 1 needs 0 < t0 < 1, got {t0}")));
    }
    let e = Example1 { p, lt0: -t0.ln() };
    let grid: Vec<f64> = (0..10_000).map(|i| i as f64 / 9_999.0).collect();
    check_increasing_convex(&grid, |t| e.psi0(t))
        .map_err(|(at, reason)| Error::InvalidT0 { t0, at, reason })?;
    Ok(e)
}

/// `Ψ` of the first example: `Ψ₀` on `[0, 1]`, extended linearly with slope
/// `Ψ₀'(1)`. `t0` is validated on a 10⁴-point grid of `[0, 1]`.
pub fn psi_example1(p: f64, t0: f64) -> Result<OrliczFunction> {
    let e = example1_params(p, t0)?;
    OrliczFunction::new(
        format!("psi_example1(p={p}, t0={t0})"),
        OrliczParams { p, t0: Some(t0) },
        move |t| e.psi(t),
        Some(Arc::new(move |t: f64| e.psi_deriv(t))),
    )
}

/// Closed form of the normalised `Φ` derived from [`psi_example1`]:
/// `c_p t^p (1 + |log(t0 t)|)` on `[0, 1]`, `c_p = (1 + |log t0|)⁻¹`.
pub fn phi_example1(p: f64, t0: f64) -> Result<OrliczFunction> {
    let e = example1_params(p, t0)?;
    OrliczFunction::new(
        format!("example1(p={p}, t0={t0})"),
        OrliczParams { p, t0: Some(t0) },
        move |t| e.phi(t),
        Some(Arc::new(move |t: f64| e.phi_deriv(t))),
    )
}

/// `c_p = (1 + |log t0|)⁻¹`
pub fn example1_c_p(t0: f64) -> f64 {
    1.0 / (1.0 - t0.ln())
}

/// Largest `t0 ∈ {0.01k : k = 1..99}` accepted by the example 1 validation.
pub fn largest_valid_t0(p: f64) -> Option<f64> {
    (1..100)
        .rev()
        .map(|k| k as f64 / 100.0)
        .find(|&t0| example1_params(p, t0).is_ok())
}

/// Second example: `t^p/(1 + |log t|)` on `[0, 1]`, `t^{2p}` beyond.
pub fn phi_example2(p: f64) -> Result<OrliczFunction> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid(format!("example 2 needs p >= 2, got {p}")));
    }
    let eval = move |t: f64| {
        if t == 0.0 {
            0.0
        } else if t <= 1.0 {
            t.powf(p) / (1.0 - t.ln())
        } else {
            t.powf(2.0 * p)
        }
    };
    let deriv = move |t: f64| {
        if t == 0.0 {
            0.0
        } else if t <= 1.0 {
            let l = 1.0 - t.ln();
            t.powf(p - 1.0) * (p * l + 1.0) / (l * l)
        } else {
            2.0 * p * t.powf(2.0 * p - 1.0)
        }
    };
    OrliczFunction::new(
        format!("example2(p={p})"),
        OrliczParams { p, t0: None },
        eval,
        Some(Arc::new(deriv)),
    )
}

/// Upper end of the head interval `[0, ε]` integrated after `s = e^{−u}`.
const HEAD: f64 = 1e-3;

/// `∫₀^x Ψ(s)/s ds` for `x ≤ HEAD`, as `∫_{−ln x}^∞ Ψ(e^{−u}) du`.
fn head_integral(psi: &OrliczFunction, x: f64, tol: f64) -> Result<f64> {
    let mut u = -x.ln();
    let mut total = 0.0;
    const CHUNK: f64 = 8.0;
    loop {
        let part = quad::integrate(|v| psi.eval((-v).exp()), u, u + CHUNK, tol * 1e-2)?;
        total += part;
        u += CHUNK;
        if part.abs() <= tol * 1e-3 || u > 745.0 {
            break;
        }
    }
    Ok(total)
}

fn check_integrable(psi: &OrliczFunction) -> Result<()> {
    let (s1, s2) = (1e-8_f64, 1e-6_f64);
    let (g1, g2) = (psi.eval(s1) / s1, psi.eval(s2) / s2);
    if !(g1.is_finite() && g2.is_finite()) || g1 < 0.0 || g2 <= 0.0 {
        return Err(Error::NonIntegrable(format!(
            "Ψ(s)/s not positive and finite near 0 ({g1}, {g2})"
        )));
    }
    if g1 == 0.0 {
        return Ok(());
    }
    let alpha = (g2.ln() - g1.ln()) / (s2.ln() - s1.ln());
    if alpha <= -1.0 + 1e-3 {
        return Err(Error::NonIntegrable(format!(
            "Ψ(s)/s behaves like s^{alpha:.4} near 0"
        )));
    }
    Ok(())
}

/// Numerical `Φ(t) = ∫₀ᵗ Ψ(s)/s ds / ∫₀¹ Ψ(s)/s ds` by adaptive quadrature
/// to absolute tolerance `quad_tol`; the `[0, 1e-3]` head is integrated
/// after the substitution `s = e^{−u}`.
pub fn phi_from_psi(psi: &OrliczFunction, quad_tol: f64) -> Result<OrliczFunction> {
    if !(quad_tol > 0.0) {
        return Err(invalid("quad_tol must be positive"));
    }
    check_integrable(psi)?;
    let psi = psi.clone();
    let head = head_integral(&psi, HEAD, quad_tol)?;
    let body = quad::integrate(|s| psi.eval(s) / s, HEAD, 1.0, quad_tol)?;
    let norm = head + body;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonIntegrable(format!("∫₀¹ Ψ(s)/s ds = {norm}")));
    }

    let integral = {
        let psi = psi.clone();
        move |t: f64| -> f64 {
            if t <= 0.0 {
                return 0.0;
            }
            let r = if t <= HEAD {
                head_integral(&psi, t, quad_tol)
            } else {
                quad::integrate(|s| psi.eval(s) / s, HEAD, t, quad_tol).map(|b| head + b)
            };
            r.unwrap_or(f64::NAN)
        }
    };
    let deriv_psi = psi.clone();
    let p = psi.params();
    OrliczFunction::new(
        format!("phi_from_psi({})", psi.label()),
        p,
        move |t| integral(t) / norm,
        Some(Arc::new(move |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                deriv_psi.eval(t) / (t * norm)
            }
        })),
    )
}

/// Log-spaced grid from `hi` down to `lo` (both included), `n ≥ 2` points.
pub fn log_grid_desc(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > 0.0 && lo > 0.0);
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                lo
            } else if i == 0 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Grid used by [`delta2_index`] when the caller has no preference.
pub fn default_delta2_grid() -> Vec<f64> {
    log_grid_desc(1e-1, 1e-100, 400)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delta2Estimate {
    /// Max of `tΦ'(t)/Φ(t)` over the grid tail.
    pub value: f64,
    /// Grid points actually evaluated.
    pub points_used: usize,
    /// Set when `Φ` underflowed before the end of the grid.
    pub shortened: bool,
}

/// Estimate `limsup_{t→0} tΦ'(t)/Φ(t)` as the max over the last 10% of a
/// decreasing grid.
pub fn delta2_index(phi: &OrliczFunction, t_grid: &[f64]) -> Result<Delta2Estimate> {
    if t_grid.is_empty() {
        return Err(invalid("empty t grid"));
    }
    if t_grid.windows(2).any(|w| !(w[1] < w[0])) || t_grid[0] <= 0.0 {
        return Err(invalid("t grid must be positive and strictly decreasing"));
    }
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let v = phi.eval(t);
        let r = t * phi.derivative(t) / v;
        if !(v > 0.0) || !r.is_finite() {
            break;
        }
        ratios.push(r);
    }
    if ratios.is_empty() {
        return Err(Error::Evaluation(format!(
            "Φ({}) is not positive",
            t_grid[0]
        )));
    }
    let shortened = ratios.len() < t_grid.len();
    if shortened {
        log::warn!(
            "delta2_index: Φ underflowed after {} of {} grid points",
            ratios.len(),
            t_grid.len()
        );
    }
    let tail = (ratios.len() as f64 * 0.1).ceil().max(1.0) as usize;
    let value = ratios[ratios.len() - tail..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Delta2Estimate {
        value,
        points_used: ratios.len(),
        shortened,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermultResult {
    /// `min Φ(st) − cΦ(s)Φ(t)` over the grid.
    pub worst: f64,
    pub s: f64,
    pub t: f64,
}

/// Worst value of `Φ(st) − cΦ(s)Φ(t)` over the product grid `grid × grid`.
pub fn supermult_check(phi: &OrliczFunction, grid: &[f64], c: f64) -> Result<SupermultResult> {
    if grid.is_empty() || grid.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
        return Err(invalid("super-multiplicativity grid must lie in (0, 1]"));
    }
    let vals: Vec<f64> = grid.iter().map(|&g| phi.eval(g)).collect();
    let mut worst = SupermultResult {
        worst: f64::INFINITY,
        s: f64::NAN,
        t: f64::NAN,
    };
    for (i, &s) in grid.iter().enumerate() {
        for (j, &t) in grid.iter().enumerate() {
            let d = phi.eval(s * t) - c * vals[i] * vals[j];
            if d < worst.worst {
                worst = SupermultResult { worst: d, s, t };
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityResult {
    /// Minimum second difference of `Φ(√t)` on the grid.
    pub min_second_difference: f64,
    pub at: f64,
    pub passes: bool,
}

/// Convexity of `g(t) = Φ(√t)` on a uniform grid of `points` nodes on `[0, T]`.
pub fn sqrt_convexity_check(phi: &OrliczFunction, upper: f64, points: usize) -> Result<ConvexityResult> {
    if points < 100 {
        return Err(invalid("sqrt convexity check needs at least 100 grid points"));
    }
    if !(upper > 0.0) {
        return Err(invalid("grid upper end must be positive"));
    }
    let h = upper / (points - 1) as f64;
    let g: Vec<f64> = (0..points).map(|i| phi.eval((i as f64 * h).sqrt())).collect();
    let (mut min, mut at) = (f64::INFINITY, 0.0);
    for (i, w) in g.windows(3).enumerate() {
        let d2 = w[2] - 2.0 * w[1] + w[0];
        if d2 < min {
            min = d2;
            at = (i + 1) as f64 * h;
        }
    }
    Ok(ConvexityResult {
        min_second_difference: min,
        at,
        passes: min >= -SECOND_DIFF_SLACK,
    })
}

/// Lower floor of every `(0, 1]` grid used by the sup estimate.
pub const GRID_FLOOR: f64 = 1e-8;

/// Grid estimate of `sup_{t≤u≤1, 0<v≤1} Φ(uv)/(u²Φ(v))` with `resolution`
/// log-spaced nodes in each of `u ∈ [t, 1]` and `v ∈ [1e-8, 1]`.
pub fn smoothness_ratio_sup(phi: &OrliczFunction, t: f64, resolution: usize) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid(format!("t must lie in (0, 1], got {t}")));
    }
    if resolution < 2 {
        return Err(invalid("resolution must be at least 2"));
    }
    let us = if t == 1.0 {
        vec![1.0]
    } else {
        log_grid_desc(1.0, t, resolution)
    };
    let mut vs = log_grid_desc(1.0, GRID_FLOOR, resolution);
    let cut = vs.iter().position(|&v| !(phi.eval(v) > 0.0));
    if let Some(cut) = cut {
        log::warn!("smoothness_ratio_sup: Φ underflows at v = {}, grid truncated", vs[cut]);
        vs.truncate(cut);
    }
    let mut best = f64::NEG_INFINITY;
    for &v in &vs {
        let pv = phi.eval(v);
        for &u in &us {
            let r = phi.eval(u * v) / (u * u * pv);
            if r > best {
                best = r;
            }
        }
    }
    Ok(best)
}

/// Serializable reference to one of the named Orlicz functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrliczSpec {
    Example1 { p: f64, t0: f64 },
    Example2 { p: f64 },
    Power { p: f64 },
}

impl OrliczSpec {
    pub fn build(&self) -> Result<OrliczFunction> {
        match *self {
            OrliczSpec::Example1 { p, t0 } => phi_example1(p, t0),
            OrliczSpec::Example2 { p } => phi_example2(p),
            OrliczSpec::Power { p } => power(p),
        }
    }
}

impl fmt::Display for OrliczSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczSpec::Example1 { p, t0 } => write!(f, "example1(p={p:?}, t0={t0:?})"),
            OrliczSpec::Example2 { p } => write!(f, "example2(p={p:?})"),
            OrliczSpec::Power { p } => write!(f, "power(p={p:?})"),
        }
    }
}

impl FromStr for OrliczSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| format!("expected name(args), got `{s}`"))?;
        if !s.ends_with(')') {
            return Err(format!("missing `)` in `{s}`"));
        }
        let name = s[..open].trim();
        let mut p = None;
        let mut t0 = None;
        for arg in s[open + 1..s.len() - 1].split(',').filter(|a| !a.trim().is_empty()) {
            let (k, v) = arg
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{}`", arg.trim()))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{}`", v.trim()))?;
            match k.trim() {
                "p" => p = Some(v),
                "t0" => t0 = Some(v),
                other => return Err(format!("unknown argument `{other}`")),
            }
        }
        let p = p.ok_or("missing argument p")?;
        match name {
            "example1" => Ok(OrliczSpec::Example1 {
                p,
                t0: t0.ok_or("example1 needs t0")?,
            }),
            "example2" if t0.is_none() => Ok(OrliczSpec::Example2 { p }),
            "power" if t0.is_none() => Ok(OrliczSpec::Power { p }),
            "example2" | "power" => Err(format!("{name} takes no t0")),
            other => Err(format!("unknown Orlicz function `{other}`")),
        }
    }
}
