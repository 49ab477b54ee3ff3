use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Roundness, coroundness and smoothness sweeps for finite-dimensional
/// normed spaces and finite metric spaces.
#[derive(Debug, Parser)]
#[command(name = "roundness", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// ν(p) over a p-range, with the a-priori bounds max(2, 2^{p-1}) and 2^p.
    NuCurve,
    /// Bracket the maximal roundness mr.
    Mr,
    /// Bracket the minimal coroundness mc.
    Mc,
    /// Maximal generalised roundness of a metric given as a CSV distance matrix.
    Mgr,
    /// Modulus of smoothness ρ(t) over a t-range.
    Rho,
    /// Modulus of convexity δ(ε) over an ε-range.
    Delta,
    /// Clarkson ratio over a p-range.
    Clarkson,
    /// Expansion exponent of the norm at x in direction y.
    Frechet,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Space description file.
    #[arg(long, global = true, value_name = "PATH")]
    pub space: Option<PathBuf>,
    /// Distance-matrix CSV file.
    #[arg(long, global = true, value_name = "PATH")]
    pub metric: Option<PathBuf>,
    /// Exponent range `a:b:step` (or a single value).
    #[arg(long, global = true, value_name = "RANGE", value_parser = parse_range)]
    pub p: Option<Range>,
    /// Range of t (`rho`, and the step grid of `frechet`).
    #[arg(long, global = true, value_name = "RANGE", value_parser = parse_range)]
    pub t: Option<Range>,
    /// Range of ε for `delta`.
    #[arg(long, global = true, value_name = "RANGE", value_parser = parse_range)]
    pub eps: Option<Range>,
    /// Base point for `frechet`, comma separated (default e₁).
    #[arg(long, global = true, value_name = "X1,X2,...", value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Direction for `frechet`, comma separated (default e₂).
    #[arg(long, global = true, value_name = "Y1,Y2,...", value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_starts: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_steps: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Upper end of the `mc` bisection / `mgr` scan (defaults 8 and 20).
    #[arg(long, global = true)]
    pub pmax: Option<f64>,
    /// Bracket width for `mr`/`mc`, root tolerance for `mgr`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Also write an SVG line plot (sweep commands only).
    #[arg(long, global = true, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Print the parsed space description in canonical form and exit.
    #[arg(long, global = true)]
    pub dump_spec: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    /// `start + i·step` for every `i` that stays within `stop` (up to rounding).
    pub fn points(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let n = ((self.stop - self.start) / self.step * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let num = |v: &str| -> Result<f64, String> {
        let x: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("`{v}` is not finite"))
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    let r = match parts.as_slice() {
        [a] => {
            let a = num(a)?;
            Range { start: a, stop: a, step: 1.0 }
        }
        [a, b, step] => Range {
            start: num(a)?,
            stop: num(b)?,
            step: num(step)?,
        },
        _ => return Err(format!("expected `start:stop:step`, got `{s}`")),
    };
    if !(r.step > 0.0) {
        return Err(format!("step must be positive in `{s}`"));
    }
    if r.stop < r.start {
        return Err(format!("empty range `{s}`"));
    }
    Ok(r)
}
