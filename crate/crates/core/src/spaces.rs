//! Concrete finite-dimensional norms and the [`Space`] evaluator built from a
//! [`SpaceSpec`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::orlicz::{OrliczFunction, OrliczSpec};

/// Finite list of real coordinates with no NaN or infinite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("vector must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("vector coordinates must be finite"));
        }
        Ok(Vector(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Square real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix side must be at least 1"));
        }
        if data.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix::new(n, data)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix { n, data: t }
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be >= 1, got {p}")))
    }
}

/// `(Σ|x_i|^p)^{1/p}`, `max |x_i|` for `p = ∞`. Caller guarantees `p ≥ 1`.
pub(crate) fn lp(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        return m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(lp(x, p))
}

fn lplq(x: &[f64], outer: usize, inner: usize, p: f64, q: f64) -> f64 {
    let blocks: Vec<f64> = x.chunks(inner).take(outer).map(|b| lp(b, q)).collect();
    lp(&blocks, p)
}

/// `ℓ^p` norm of the `ℓ^q` norms of `outer` consecutive blocks of length `inner`.
pub fn lplq_norm(x: &[f64], outer: usize, inner: usize, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if outer == 0 || inner == 0 {
        return Err(invalid("block dimensions must be positive"));
    }
    if x.len() != outer * inner {
        return Err(Error::Shape {
            expected: outer * inner,
            got: x.len(),
        });
    }
    Ok(lplq(x, outer, inner, p, q))
}

/// `ℓ^p` norm of the singular values.
pub fn schatten_norm(a: &Matrix, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(schatten(a.as_slice(), a.side(), p))
}

fn schatten(a: &[f64], n: usize, p: f64) -> f64 {
    lp(&linalg::singular_values(a, n), p)
}

const LUX_REL_TOL: f64 = 1e-10;
const LUX_MAX_DOUBLINGS: usize = 1100;

/// Luxemburg norm `inf{k > 0 : Σ Φ(|x_i|/k) ≤ 1}`, solved by bracketing
/// from `k = max|x_i|` followed by bisection to relative tolerance `1e-10`.
pub fn luxemburg_norm(x: &[f64], phi: &OrliczFunction) -> Result<f64> {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    if !m.is_finite() {
        return Err(invalid("vector coordinates must be finite"));
    }
    let sum = |k: f64| -> Result<f64> {
        let s: f64 = x.iter().map(|v| phi.eval(v.abs() / k)).sum();
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::Evaluation(format!("Σ Φ(|x_i|/{k}) is not finite")))
        }
    };

    let (mut lo, mut hi) = (m, m);
    let s0 = sum(m)?;
    if s0 > 1.0 {
        let mut n = 0;
        loop {
            hi *= 2.0;
            n += 1;
            if sum(hi)? <= 1.0 {
                break;
            }
            if n > LUX_MAX_DOUBLINGS {
                return Err(Error::Evaluation("Luxemburg bracket did not close".into()));
            }
            lo = hi;
        }
    } else if s0 < 1.0 {
        let mut n = 0;
        loop {
            lo *= 0.5;
            n += 1;
            if sum(lo)? >= 1.0 {
                break;
            }
            if n > LUX_MAX_DOUBLINGS {
                return Err(Error::Evaluation("Luxemburg bracket did not close".into()));
            }
            hi = lo;
        }
    } else {
        return Ok(m);
    }

    while hi - lo > LUX_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Racetrack norm on ℝ²: `|x₂|` when `|x₂| ≥ |x₁|`, else `(x₁² + x₂²)/(2|x₁|)`.
pub fn racetrack_norm(x: &[f64]) -> Result<f64> {
    check_planar(x)?;
    Ok(racetrack(x[0], x[1]))
}

fn racetrack(x1: f64, x2: f64) -> f64 {
    let (a1, a2) = (x1.abs(), x2.abs());
    if a2 >= a1 {
        a2
    } else {
        (x1 * x1 + x2 * x2) / (2.0 * a1)
    }
}

/// Dual of the racetrack norm: `√(x₁² + x₂²) + |x₁|`.
pub fn racetrack_dual_norm(x: &[f64]) -> Result<f64> {
    check_planar(x)?;
    Ok(racetrack_dual(x[0], x[1]))
}

fn racetrack_dual(x1: f64, x2: f64) -> f64 {
    x1.hypot(x2) + x1.abs()
}

fn check_planar(x: &[f64]) -> Result<()> {
    if x.len() == 2 {
        Ok(())
    } else {
        Err(Error::Shape {
            expected: 2,
            got: x.len(),
        })
    }
}

/// Minimum number of vertices for the dual sphere polygon.
pub const MIN_DUAL_RESOLUTION: usize = 8;

/// Polygonal discretisation of a planar unit sphere, supporting dual norm
/// evaluation `max_k ⟨f, u_k⟩` over its vertices.
///
/// Vertices are the radial normalisations of `resolution` directions equally
/// spaced in angle. Because the polygon is convex, the maximising vertex is
/// found by binary search over the outward edge-normal angles.
#[derive(Debug, Clone)]
pub struct DualSphere {
    vertices: Vec<[f64; 2]>,
    /// Unwrapped, nondecreasing outward normal angle of edge `k → k+1`.
    normal_angles: Vec<f64>,
}

impl DualSphere {
    pub fn new(base: &Space, resolution: usize) -> Result<Self> {
        if base.dim() != 2 {
            return Err(invalid(format!(
                "numerical dual needs a 2-dimensional base, got dimension {}",
                base.dim()
            )));
        }
        if resolution < MIN_DUAL_RESOLUTION {
            return Err(invalid(format!(
                "dual resolution must be at least {MIN_DUAL_RESOLUTION}, got {resolution}"
            )));
        }
        let vertices: Vec<[f64; 2]> = (0..resolution)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / resolution as f64;
                let d = [th.cos(), th.sin()];
                let r = base.norm(&d);
                [d[0] / r, d[1] / r]
            })
            .collect();
        if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::Evaluation("base norm vanished on a direction".into()));
        }
        let n = vertices.len();
        let mut normal_angles = Vec::with_capacity(n);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let mut phi = (-(b[0] - a[0])).atan2(b[1] - a[1]);
            if k == 0 {
                prev = phi;
            } else {
                while phi < prev - PI {
                    phi += 2.0 * PI;
                }
                phi = phi.max(prev);
                prev = phi;
            }
            normal_angles.push(phi);
        }
        Ok(DualSphere {
            vertices,
            normal_angles,
        })
    }

    pub fn resolution(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// `max_k ⟨f, u_k⟩`, a lower bound for the true dual norm.
    pub fn dual_norm(&self, f: &[f64]) -> f64 {
        let (f1, f2) = (f[0], f[1]);
        if f1 == 0.0 && f2 == 0.0 {
            return 0.0;
        }
        let n = self.vertices.len();
        let start = self.normal_angles[0];
        let mut alpha = f2.atan2(f1);
        while alpha < start {
            alpha += 2.0 * PI;
        }
        while alpha >= start + 2.0 * PI {
            alpha -= 2.0 * PI;
        }
        // vertex k is optimal for normal angles in [φ_{k-1}, φ_k]
        let k = self.normal_angles.partition_point(|&a| a < alpha) % n;
        let mut best = f64::NEG_INFINITY;
        for off in [n - 2, n - 1, 0, 1, 2] {
            let v = self.vertices[(k + off) % n];
            best = best.max(f1 * v[0] + f2 * v[1]);
        }
        best
    }
}

/// Numerical dual norm of a planar space at the given polygon resolution.
pub fn dual_norm_2d(base: &SpaceSpec, f: &[f64], resolution: usize) -> Result<f64> {
    check_planar(f)?;
    let sphere = DualSphere::new(&base.build()?, resolution)?;
    Ok(sphere.dual_norm(f))
}

/// Tagged description of a normed space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Lp { p: f64, dim: usize },
    LpLq { p: f64, q: f64, outer: usize, inner: usize },
    /// Schatten class on `dim × dim` matrices, flattened row-major.
    Schatten { p: f64, dim: usize },
    Orlicz { phi: OrliczSpec, dim: usize },
    Racetrack,
    RacetrackDual,
    NumericalDual { base: Box<SpaceSpec>, resolution: usize },
}

impl SpaceSpec {
    pub fn lp(p: f64, dim: usize) -> Self {
        SpaceSpec::Lp { p, dim }
    }

    pub fn numerical_dual(base: SpaceSpec, resolution: usize) -> Self {
        SpaceSpec::NumericalDual {
            base: Box::new(base),
            resolution,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceSpec::Lp { .. } => "lp",
            SpaceSpec::LpLq { .. } => "lplq",
            SpaceSpec::Schatten { .. } => "schatten",
            SpaceSpec::Orlicz { .. } => "orlicz",
            SpaceSpec::Racetrack => "racetrack",
            SpaceSpec::RacetrackDual => "racetrack_dual",
            SpaceSpec::NumericalDual { .. } => "numerical_dual",
        }
    }

    /// Vector length of an element of this space.
    pub fn dim(&self) -> usize {
        match self {
            SpaceSpec::Lp { dim, .. } | SpaceSpec::Orlicz { dim, .. } => *dim,
            SpaceSpec::LpLq { outer, inner, .. } => outer * inner,
            SpaceSpec::Schatten { dim, .. } => dim * dim,
            SpaceSpec::Racetrack | SpaceSpec::RacetrackDual => 2,
            SpaceSpec::NumericalDual { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be at least 1")))
            }
        };
        match self {
            SpaceSpec::Lp { p, dim } | SpaceSpec::Schatten { p, dim } => {
                check_exponent("p", *p)?;
                positive("dim", *dim)
            }
            SpaceSpec::LpLq { p, q, outer, inner } => {
                check_exponent("p", *p)?;
                check_exponent("q", *q)?;
                positive("outer", *outer)?;
                positive("inner", *inner)
            }
            SpaceSpec::Orlicz { dim, .. } => positive("dim", *dim),
            SpaceSpec::Racetrack | SpaceSpec::RacetrackDual => Ok(()),
            SpaceSpec::NumericalDual { base, resolution } => {
                base.validate()?;
                if base.dim() != 2 {
                    return Err(invalid("numerical_dual only wraps 2-dimensional bases"));
                }
                if *resolution < MIN_DUAL_RESOLUTION {
                    return Err(invalid(format!(
                        "dual resolution must be at least {MIN_DUAL_RESOLUTION}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Build the norm evaluator.
    pub fn build(&self) -> Result<Space> {
        self.validate()?;
        let norm = match self {
            SpaceSpec::Lp { p, .. } => Norm::Lp(*p),
            SpaceSpec::LpLq { p, q, outer, inner } => Norm::LpLq {
                p: *p,
                q: *q,
                outer: *outer,
                inner: *inner,
            },
            SpaceSpec::Schatten { p, dim } => Norm::Schatten { p: *p, side: *dim },
            SpaceSpec::Orlicz { phi, .. } => Norm::Orlicz(Arc::new(phi.build()?)),
            SpaceSpec::Racetrack => Norm::Racetrack,
            SpaceSpec::RacetrackDual => Norm::RacetrackDual,
            SpaceSpec::NumericalDual { base, resolution } => {
                Norm::Dual(Arc::new(DualSphere::new(&base.build()?, *resolution)?))
            }
        };
        Ok(Space {
            spec: self.clone(),
            dim: self.dim(),
            norm,
        })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lp { p, dim } => write!(f, "l^{p} (dim {dim})"),
            SpaceSpec::LpLq { p, q, outer, inner } => {
                write!(f, "l^{p}(l^{q}) ({outer}x{inner})")
            }
            SpaceSpec::Schatten { p, dim } => write!(f, "S_{p} ({dim}x{dim})"),
            SpaceSpec::Orlicz { phi, dim } => write!(f, "l_Phi, Phi = {phi} (dim {dim})"),
            SpaceSpec::Racetrack => write!(f, "racetrack"),
            SpaceSpec::RacetrackDual => write!(f, "racetrack dual"),
            SpaceSpec::NumericalDual { base, resolution } => {
                write!(f, "numerical dual of {base} ({resolution} vertices)")
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Norm {
    Lp(f64),
    LpLq { p: f64, q: f64, outer: usize, inner: usize },
    Schatten { p: f64, side: usize },
    Orlicz(Arc<OrliczFunction>),
    Racetrack,
    RacetrackDual,
    Dual(Arc<DualSphere>),
}

/// A norm evaluator on ℝ^dim.
#[derive(Debug, Clone)]
pub struct Space {
    spec: SpaceSpec,
    dim: usize,
    norm: Norm,
}

impl Space {
    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Norm of `x`; `x.len()` must equal [`Space::dim`]. Orlicz evaluation
    /// failures yield NaN.
    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.norm {
            Norm::Lp(p) => lp(x, *p),
            Norm::LpLq { p, q, outer, inner } => lplq(x, *outer, *inner, *p, *q),
            Norm::Schatten { p, side } => schatten(x, *side, *p),
            Norm::Orlicz(phi) => luxemburg_norm(x, phi).unwrap_or(f64::NAN),
            Norm::Racetrack => racetrack(x[0], x[1]),
            Norm::RacetrackDual => racetrack_dual(x[0], x[1]),
            Norm::Dual(s) => s.dual_norm(x),
        }
    }

    /// Checked variant of [`Space::norm`].
    pub fn try_norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: x.len(),
            });
        }
        match &self.norm {
            Norm::Orlicz(phi) => luxemburg_norm(x, phi),
            _ => Ok(self.norm(x)),
        }
    }
}
