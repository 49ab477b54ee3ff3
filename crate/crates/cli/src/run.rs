use std::fs;
use std::io::{self, Write};
use std::path::Path;

use roundness_core::metric::{sanchez_mgr, validate_metric};
use roundness_core::moduli::{
    clarkson_ratio, delta_estimate, frechet_exponent, mc_estimate, mr_estimate, nu_estimate,
    rho_estimate, DEFAULT_TOL_P,
};
use roundness_core::orlicz::log_grid_desc;
use roundness_core::specfile::{dump_spec, parse_spec};
use roundness_core::{
    Bracket, Coroundness, Error, FiniteMetricSpace, MgrResult, MgrScan, SearchBudget, Space,
    SpaceSpec,
};
use thiserror::Error;

use crate::args::{Cli, Command, Options, Range};
use crate::svg::{line_chart, Series};

const DEFAULT_MC_PMAX: f64 = 8.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Shape { .. } | Error::TooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            Error::Parse { .. } | Error::Metric(_) | Error::InvalidT0 { .. } | Error::InvalidOrlicz { .. } => {
                CliError::Parse(e.to_string())
            }
            Error::Evaluation(_) | Error::NonIntegrable(_) => CliError::Numeric(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

/// 17 significant digits.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(opts: &Options) -> Result<SpaceSpec> {
    let path = opts
        .space
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --space PATH".into()))?;
    let text = read_file(path)?;
    parse_spec(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_space(opts: &Options) -> Result<Space> {
    Ok(load_spec(opts)?.build()?)
}

pub fn read_metric(path: &Path) -> Result<FiniteMetricSpace> {
    let text = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!("{}: line {line}: `{field}` is not a number", path.display()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    validate_metric(&rows).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn budget(opts: &Options) -> Result<SearchBudget> {
    let d = SearchBudget::default();
    SearchBudget::new(
        opts.budget_starts.unwrap_or(d.starts),
        opts.budget_steps.unwrap_or(d.refine_steps),
        d.shrink,
        opts.seed,
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn need(range: Option<Range>, flag: &str) -> Result<Vec<f64>> {
    range
        .map(|r| r.points())
        .ok_or_else(|| CliError::Usage(format!("this command needs --{flag} a:b:step")))
}

fn bracket_row(b: &Bracket) -> Vec<String> {
    vec![num(b.lo), num(b.hi), b.verdict_lo.to_string(), b.verdict_hi.to_string()]
}

const BRACKET_HEADER: [&str; 4] = ["lo", "hi", "verdict_lo", "verdict_hi"];

fn sweep_chart(x_label: &str, table: &Table, title: &str) -> String {
    let series: Vec<Series<'_>> = (1..table.header.len())
        .filter(|&c| table.rows.iter().all(|r| r[c].parse::<f64>().is_ok()))
        .map(|c| Series {
            name: table.header[c],
            points: table
                .rows
                .iter()
                .map(|r| (r[0].parse().unwrap_or(f64::NAN), r[c].parse().unwrap_or(f64::NAN)))
                .collect(),
        })
        .collect();
    line_chart(title, x_label, &series)
}

fn write_table(table: &Table, path: Option<&Path>) -> Result<()> {
    let io_err = |e: &dyn std::fmt::Display| CliError::Numeric(format!("cannot write output: {e}"));
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| io_err(&e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header).map_err(|e| io_err(&e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| io_err(&e))?;
    }
    w.flush().map_err(|e| io_err(&e))
}

pub fn run(cli: &Cli) -> Result<()> {
    let opts = &cli.opts;
    if opts.dump_spec {
        print!("{}", dump_spec(&load_spec(opts)?));
        return Ok(());
    }
    let sweep = matches!(
        cli.command,
        Command::NuCurve | Command::Rho | Command::Delta | Command::Clarkson
    );
    if opts.svg.is_some() && !sweep {
        return Err(CliError::Usage("--svg is only available for sweep commands".into()));
    }

    let (table, x_label, title) = match cli.command {
        Command::NuCurve => {
            let space = load_space(opts)?;
            let b = budget(opts)?;
            let mut rows = Vec::new();
            for p in need(opts.p, "p")? {
                let s = nu_estimate(&space, p, &b)?;
                rows.push(vec![num(p), num(s.value), num(2f64.max(2f64.powf(p - 1.0))), num(2f64.powf(p))]);
            }
            let t = Table { header: vec!["p", "nu", "lower_bound", "upper_bound"], rows };
            (t, "p", format!("modulus of roundness, {}", space.spec()))
        }
        Command::Mr => {
            let space = load_space(opts)?;
            let b = mr_estimate(&space, opts.tol.unwrap_or(DEFAULT_TOL_P), &budget(opts)?)?;
            (Table { header: BRACKET_HEADER.to_vec(), rows: vec![bracket_row(&b)] }, "", String::new())
        }
        Command::Mc => {
            let space = load_space(opts)?;
            let p_max = opts.pmax.unwrap_or(DEFAULT_MC_PMAX);
            let row = match mc_estimate(&space, p_max, opts.tol.unwrap_or(DEFAULT_TOL_P), &budget(opts)?)? {
                Coroundness::Bracket(b) => bracket_row(&b),
                Coroundness::AtLeast(v) => vec![format!("≥ {v}"), "inf".into(), "false".into(), String::new()],
            };
            (Table { header: BRACKET_HEADER.to_vec(), rows: vec![row] }, "", String::new())
        }
        Command::Mgr => {
            let path = opts
                .metric
                .as_ref()
                .ok_or_else(|| CliError::Usage("mgr needs --metric PATH".into()))?;
            let m = read_metric(path)?;
            let d = MgrScan::default();
            let scan = MgrScan {
                p_max: opts.pmax.unwrap_or(d.p_max),
                tol: opts.tol.unwrap_or(d.tol),
                ..d
            };
            let row = match sanchez_mgr(&m, &scan)? {
                MgrResult::Root { value, source, bracket_width } => {
                    vec![num(value), source.to_string(), num(bracket_width)]
                }
                MgrResult::AtLeast(v) => vec![format!("≥ {v}"), String::new(), String::new()],
            };
            let t = Table { header: vec!["value", "root_source", "bracket_width"], rows: vec![row] };
            (t, "", String::new())
        }
        Command::Rho => {
            let space = load_space(opts)?;
            let b = budget(opts)?;
            let mut rows = Vec::new();
            for t in need(opts.t, "t")? {
                rows.push(vec![num(t), num(rho_estimate(&space, t, &b)?.value)]);
            }
            (Table { header: vec!["t", "rho"], rows }, "t", format!("modulus of smoothness, {}", space.spec()))
        }
        Command::Delta => {
            let space = load_space(opts)?;
            let b = budget(opts)?;
            let mut rows = Vec::new();
            for eps in need(opts.eps, "eps")? {
                let s = delta_estimate(&space, eps, &b)?;
                rows.push(vec![num(eps), num(s.value), s.feasible.to_string()]);
            }
            let t = Table { header: vec!["eps", "delta", "feasible"], rows };
            (t, "eps", format!("modulus of convexity, {}", space.spec()))
        }
        Command::Clarkson => {
            let space = load_space(opts)?;
            let b = budget(opts)?;
            let mut rows = Vec::new();
            for p in need(opts.p, "p")? {
                rows.push(vec![num(p), num(clarkson_ratio(&space, p, &b)?.value)]);
            }
            (Table { header: vec!["p", "clarkson_ratio"], rows }, "p", format!("Clarkson ratio, {}", space.spec()))
        }
        Command::Frechet => {
            let space = load_space(opts)?;
            let dim = space.dim();
            let unit_vec = |v: Option<&Vec<f64>>, k: usize, flag: &str| -> Result<Vec<f64>> {
                let v = v.cloned().unwrap_or_else(|| {
                    let mut e = vec![0.0; dim];
                    e[k % dim] = 1.0;
                    e
                });
                let n = space.try_norm(&v)?;
                if !(n > 0.0) {
                    return Err(CliError::Usage(format!("--{flag} must be nonzero")));
                }
                Ok(v.iter().map(|c| c / n).collect())
            };
            let x = unit_vec(opts.x.as_ref(), 0, "x")?;
            let y = unit_vec(opts.y.as_ref(), 1, "y")?;
            let grid = match opts.t {
                Some(r) => r.points().into_iter().rev().collect(),
                None => log_grid_desc(1e-1, 1e-5, 17),
            };
            let f = frechet_exponent(&space, &x, &y, &grid)?;
            let row = vec![num(f.exponent), num(f.derivative), f.degenerate.to_string(), f.ambiguous.to_string()];
            let t = Table { header: vec!["exponent", "derivative", "degenerate", "ambiguous"], rows: vec![row] };
            (t, "", String::new())
        }
    };

    write_table(&table, opts.csv.as_deref())?;
    if let Some(path) = &opts.svg {
        fs::write(path, sweep_chart(x_label, &table, &title))
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
