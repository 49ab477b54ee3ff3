//! Finite metric spaces: roundness defects, maximal generalised roundness
//! from the roots of `det(D_p)` and `⟨D_p⁻¹𝟙, 𝟙⟩`, and an exhaustive
//! generalised-roundness oracle.

use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, Error, MetricError, Result};
use crate::linalg;

/// Slack allowed on the triangle inequality and symmetry checks.
const METRIC_TOL: f64 = 1e-12;

/// Validated finite metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
}

/// Check symmetry, zero diagonal, positivity and the triangle inequality.
pub fn validate_metric(table: &[Vec<f64>]) -> std::result::Result<FiniteMetricSpace, MetricError> {
    let n = table.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    for (row, r) in table.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare {
                row,
                got: r.len(),
                expected: n,
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !table[i][j].is_finite() {
                return Err(MetricError::NonFinite { i, j });
            }
        }
    }
    for i in 0..n {
        if table[i][i] != 0.0 {
            return Err(MetricError::Diagonal { i });
        }
        for j in (i + 1)..n {
            let (a, b) = (table[i][j], table[j][i]);
            if (a - b).abs() > METRIC_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(MetricError::Asymmetric { i, j });
            }
            if a <= 0.0 {
                return Err(MetricError::NonPositive { i, j });
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                if j == i || j == k || i == k {
                    continue;
                }
                let via = table[i][j] + table[j][k];
                if table[i][k] > via + METRIC_TOL * via.max(1.0) {
                    return Err(MetricError::Triangle { i, j, k });
                }
            }
        }
    }
    let dist = table.iter().flat_map(|r| r.iter().copied()).collect();
    Ok(FiniteMetricSpace { n, dist })
}

impl FiniteMetricSpace {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Relabel points: point `i` of the result is point `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true)) {
            return Err(invalid("not a permutation of the points"));
        }
        let n = self.n;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = self.d(perm[i], perm[j]);
            }
        }
        Ok(FiniteMetricSpace { n, dist })
    }

    pub fn p_matrix(&self, p: f64) -> PMatrix {
        PMatrix::new(self, p)
    }

    /// Cycle graph `C_n` with the shortest-path metric.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid("cycle needs at least 3 points"));
        }
        Self::from_fn(n, |i, j| {
            let d = i.abs_diff(j);
            d.min(n - d) as f64
        })
    }

    /// Path graph `P_n` with the shortest-path metric.
    pub fn path(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| i.abs_diff(j) as f64)
    }

    /// Complete bipartite graph `K_{a,b}` (distance 1 across, 2 within a part).
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        Self::from_fn(a + b, |i, j| if (i < a) == (j < a) { 2.0 } else { 1.0 })
    }

    /// `n` points at mutual distance 1.
    pub fn simplex(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| 1.0)
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let table: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect())
            .collect();
        Ok(validate_metric(&table)?)
    }
}

/// Entrywise power `d(x_i, x_j)^p` of a distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct PMatrix {
    pub p: f64,
    n: usize,
    entries: Vec<f64>,
}

impl PMatrix {
    pub fn new(m: &FiniteMetricSpace, p: f64) -> Self {
        let entries = m
            .dist
            .iter()
            .map(|&d| if d == 0.0 { 0.0 } else { d.powf(p) })
            .collect();
        PMatrix { p, n: m.n, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn determinant(&self) -> f64 {
        linalg::determinant(&self.entries, self.n)
    }

    /// `det(D) ⟨D⁻¹𝟙, 𝟙⟩ = 𝟙ᵀ adj(D) 𝟙`, computed as minus the determinant
    /// of the bordered matrix `[[D, 𝟙], [𝟙ᵀ, 0]]`.
    pub fn adjugate_form(&self) -> f64 {
        let n = self.n;
        let m = n + 1;
        let mut b = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                b[i * m + j] = self.get(i, j);
            }
            b[i * m + n] = 1.0;
            b[n * m + i] = 1.0;
        }
        -linalg::determinant(&b, m)
    }
}

/// Ordered quadruple `(a₁, a₂; b₁, b₂)` of point indices.
pub type Quadruple = [usize; 4];

/// `max` over all ordered quadruples (repeats allowed) of
/// `d(a₁,a₂)^p + d(b₁,b₂)^p − Σ_{i,j} d(a_i,b_j)^p`.
pub fn roundness_defect(m: &FiniteMetricSpace, p: f64) -> Result<(f64, Quadruple)> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("roundness needs finite p >= 1, got {p}")));
    }
    let dp = m.p_matrix(p);
    let n = m.len();
    let best = (0..n * n)
        .into_par_iter()
        .map(|ab| {
            let (a1, a2) = (ab / n, ab % n);
            let mut best = (f64::NEG_INFINITY, [0; 4]);
            for b1 in 0..n {
                for b2 in 0..n {
                    let v = dp.get(a1, a2) + dp.get(b1, b2)
                        - dp.get(a1, b1)
                        - dp.get(a1, b2)
                        - dp.get(a2, b1)
                        - dp.get(a2, b2);
                    if v > best.0 {
                        best = (v, [a1, a2, b1, b2]);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [usize::MAX; 4]), pick_max);
    Ok(best)
}

/// Order-independent max with a lexicographic tie-break on the witness.
fn pick_max<W: Ord + Copy>(a: (f64, W), b: (f64, W)) -> (f64, W) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Roundness defect at every grid exponent, without assuming the set of
/// admissible exponents is an interval.
pub fn roundness_profile(m: &FiniteMetricSpace, p_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if p_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("p grid must be sorted"));
    }
    p_grid
        .iter()
        .map(|&p| roundness_defect(m, p).map(|(d, _)| (p, d)))
        .collect()
}

/// Which scanned function produced the reported root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSource {
    Determinant,
    QuadraticForm,
}

impl fmt::Display for RootSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootSource::Determinant => "determinant",
            RootSource::QuadraticForm => "quadratic_form",
        })
    }
}

/// Maximal generalised roundness of a finite metric space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgrResult {
    Root {
        value: f64,
        source: RootSource,
        bracket_width: f64,
    },
    /// Neither function vanished on `(0, p_max]`.
    AtLeast(f64),
}

impl MgrResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            MgrResult::Root { value, .. } => Some(*value),
            MgrResult::AtLeast(_) => None,
        }
    }
}

/// Scan parameters for [`sanchez_mgr`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgrScan {
    pub p_max: f64,
    pub grid_step: f64,
    pub tol: f64,
}

impl Default for MgrScan {
    fn default() -> Self {
        MgrScan {
            p_max: 20.0,
            grid_step: 0.01,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Root {
    p: f64,
    width: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

/// First root of `f` on the grid `p_k = k·step ≤ p_max`: a near-zero grid
/// value (`|f| < tol·scale`, scale = max(1, median |f| so far)) or a sign
/// change refined by bisection to width `tol`.
fn first_root(f: impl Fn(f64) -> f64, scan: &MgrScan) -> Option<Root> {
    let steps = (scan.p_max / scan.grid_step).floor() as usize;
    let mut seen: Vec<f64> = Vec::with_capacity(steps);
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..=steps {
        let p = k as f64 * scan.grid_step;
        let v = f(p);
        seen.push(v.abs());
        let scale = median(&seen).max(1.0);
        if v == 0.0 || v.abs() < scan.tol * scale {
            return Some(Root { p, width: 0.0 });
        }
        if let Some((pp, pv)) = prev {
            if pv.signum() != v.signum() {
                let (mut lo, mut hi, lo_sign) = (pp, p, pv.signum());
                while hi - lo > scan.tol {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm == 0.0 {
                        return Some(Root { p: mid, width: 0.0 });
                    }
                    if fm.signum() == lo_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(Root {
                    p: 0.5 * (lo + hi),
                    width: hi - lo,
                });
            }
        }
        prev = Some((p, v));
    }
    None
}

/// Maximal generalised roundness from the first root of `det(D_p)` or of
/// `det(D_p)⟨D_p⁻¹𝟙, 𝟙⟩` on `(0, p_max]`. When both vanish at the same
/// exponent the determinant is reported.
pub fn sanchez_mgr(m: &FiniteMetricSpace, scan: &MgrScan) -> Result<MgrResult> {
    if !(scan.p_max > 0.0 && scan.p_max.is_finite()) {
        return Err(invalid("p_max must be positive and finite"));
    }
    if !(scan.grid_step > 0.0 && scan.grid_step <= scan.p_max) {
        return Err(invalid("grid_step must lie in (0, p_max]"));
    }
    if !(scan.tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if m.len() < 2 {
        return Ok(MgrResult::AtLeast(scan.p_max));
    }
    let det = first_root(|p| m.p_matrix(p).determinant(), scan);
    let quad = first_root(|p| m.p_matrix(p).adjugate_form(), scan);
    let result = match (det, quad) {
        (None, None) => MgrResult::AtLeast(scan.p_max),
        (Some(d), None) => root(d, RootSource::Determinant),
        (None, Some(q)) => root(q, RootSource::QuadraticForm),
        (Some(d), Some(q)) => {
            if q.p < d.p - 4.0 * scan.tol {
                root(q, RootSource::QuadraticForm)
            } else {
                root(d, RootSource::Determinant)
            }
        }
    };
    Ok(result)
}

fn root(r: Root, source: RootSource) -> MgrResult {
    MgrResult::Root {
        value: r.p,
        source,
        bracket_width: r.width,
    }
}

/// Configurations `(a₁..a_k; b₁..b_k)` as point indices.
pub type Configuration = Vec<usize>;

/// Largest point count accepted by [`gr_bruteforce`].
pub const GR_MAX_POINTS: usize = 8;

/// Exhaustive generalised-roundness defect over all ordered configurations
/// of `k ∈ {2, 3}` points per side (repeats allowed):
/// `Σ_{i≠j} d(a_i,a_j)^p + Σ_{i≠j} d(b_i,b_j)^p − 2 Σ_{i,j} d(a_i,b_j)^p`.
pub fn gr_bruteforce(m: &FiniteMetricSpace, p: f64, n_points: usize) -> Result<(f64, Configuration)> {
    if !(n_points == 2 || n_points == 3) {
        return Err(invalid(format!("n_points must be 2 or 3, got {n_points}")));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(invalid(format!("p must be finite and >= 0, got {p}")));
    }
    let n = m.len();
    let slots = 2 * n_points as u32;
    let configurations = (n as u64).pow(slots);
    if n > GR_MAX_POINTS {
        let limit = (GR_MAX_POINTS as u64).pow(slots);
        return Err(Error::TooLarge {
            configurations,
            limit,
        });
    }
    let dp = m.p_matrix(p);
    let k = n_points;
    let best = (0..configurations)
        .into_par_iter()
        .map(|code| {
            let mut idx = [0usize; 6];
            let mut c = code;
            for slot in idx.iter_mut().take(2 * k) {
                *slot = (c % n as u64) as usize;
                c /= n as u64;
            }
            let (a, b) = idx[..2 * k].split_at(k);
            let mut v = 0.0;
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        v += dp.get(a[i], a[j]) + dp.get(b[i], b[j]);
                    }
                    v -= 2.0 * dp.get(a[i], b[j]);
                }
            }
            (v, code)
        })
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), pick_max);
    let mut config = Vec::with_capacity(2 * k);
    let mut c = best.1;
    for _ in 0..2 * k {
        config.push((c % n as u64) as usize);
        c /= n as u64;
    }
    Ok((best.0, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> FiniteMetricSpace {
        FiniteMetricSpace::path(3).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert!(FiniteMetricSpace::simplex(3).is_ok());
        let bad = vec![
            vec![0.0, 5.0, 1.0],
            vec![5.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert_eq!(
            validate_metric(&bad),
            Err(MetricError::Triangle { i: 0, j: 2, k: 1 })
        );
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(validate_metric(&asym), Err(MetricError::Asymmetric { i: 0, j: 1 }));
        let diag = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(validate_metric(&diag), Err(MetricError::Diagonal { i: 0 }));
        let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(validate_metric(&zero), Err(MetricError::NonPositive { i: 0, j: 1 }));
        assert_eq!(validate_metric(&[]), Err(MetricError::Empty));
    }

    #[test]
    fn c4_roundness() {
        let c4 = FiniteMetricSpace::cycle(4).unwrap();
        let (d, w) = roundness_defect(&c4, 1.0).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
        // equality witness: the two diagonals
        assert!(d == 0.0 && c4.d(w[0], w[1]) >= 0.0);
        let (d, _) = roundness_defect(&c4, 1.2).unwrap();
        assert!((d - (2.0 * 2f64.powf(1.2) - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn p1_defect_nonpositive() {
        for m in [path3(), FiniteMetricSpace::complete_bipartite(2, 3).unwrap()] {
            assert!(roundness_defect(&m, 1.0).unwrap().0 <= 1e-12);
        }
    }

    #[test]
    fn profiles() {
        let tri = FiniteMetricSpace::simplex(3).unwrap();
        let prof = roundness_profile(&tri, &[1.0, 2.0, 5.0]).unwrap();
        assert!(prof.iter().all(|&(_, d)| d <= 1e-12));
        let c4 = FiniteMetricSpace::cycle(4).unwrap();
        let prof = roundness_profile(&c4, &[1.0, 1.5, 2.0]).unwrap();
        assert!(prof[0].1.abs() < 1e-12 && prof[1].1 > 0.0 && prof[2].1 > 0.0);
        let one = FiniteMetricSpace::simplex(1).unwrap();
        assert!(roundness_profile(&one, &[1.0, 3.0]).unwrap().iter().all(|&(_, d)| d == 0.0));
        assert!(roundness_profile(&one, &[3.0, 1.0]).is_err());
    }

    #[test]
    fn adjugate_form_path3() {
        // det = 2·2^p, ⟨D⁻¹𝟙,𝟙⟩ = 2 − 2^{p−1}
        for p in [0.5, 1.0, 1.7, 3.0] {
            let dp = path3().p_matrix(p);
            let det = 2.0 * 2f64.powf(p);
            assert!((dp.determinant() - det).abs() < 1e-12 * det.max(1.0));
            let s = det * (2.0 - 2f64.powf(p - 1.0));
            assert!((dp.adjugate_form() - s).abs() < 1e-11 * s.abs().max(1.0), "p = {p}");
        }
    }

    #[test]
    fn sanchez_examples() {
        let scan = MgrScan::default();
        match sanchez_mgr(&path3(), &scan).unwrap() {
            MgrResult::Root { value, source, .. } => {
                assert!((value - 2.0).abs() < 1e-6);
                assert_eq!(source, RootSource::QuadraticForm);
            }
            other => panic!("{other:?}"),
        }
        match sanchez_mgr(&FiniteMetricSpace::cycle(4).unwrap(), &scan).unwrap() {
            MgrResult::Root { value, source, .. } => {
                assert!((value - 1.0).abs() < 1e-6);
                assert_eq!(source, RootSource::Determinant);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            sanchez_mgr(&FiniteMetricSpace::simplex(3).unwrap(), &scan).unwrap(),
            MgrResult::AtLeast(20.0)
        );
    }

    #[test]
    fn gr_examples() {
        let c4 = FiniteMetricSpace::cycle(4).unwrap();
        let (d, _) = gr_bruteforce(&c4, 1.0, 2).unwrap();
        assert!(d.abs() < 1e-12);
        let (d, _) = gr_bruteforce(&c4, 1.1, 2).unwrap();
        assert!((d - (4.0 * 2f64.powf(1.1) - 8.0)).abs() < 1e-12);
        let tri = FiniteMetricSpace::simplex(3).unwrap();
        assert!(gr_bruteforce(&tri, 5.0, 2).unwrap().0 <= 1e-12);
        let big = FiniteMetricSpace::path(9).unwrap();
        assert!(matches!(gr_bruteforce(&big, 1.0, 2), Err(Error::TooLarge { .. })));
        assert!(gr_bruteforce(&c4, 1.0, 4).is_err());
    }

    #[test]
    fn gr_pairs_double_roundness() {
        let m = FiniteMetricSpace::complete_bipartite(2, 2).unwrap();
        for p in [1.0, 1.5, 2.5] {
            let (g, _) = gr_bruteforce(&m, p, 2).unwrap();
            let (r, _) = roundness_defect(&m, p).unwrap();
            assert!((g - 2.0 * r).abs() < 1e-12, "p = {p}: {g} vs {r}");
        }
    }
}
