//! Text format for [`SpaceSpec`].
//!
//! One `kind = <name>` line followed by `key = value` parameter lines.
//! Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! kind = lplq
//! p = 1.5
//! q = 3
//! outer = 2
//! inner = 2
//! ```
//!
//! | kind             | keys                                   |
//! |------------------|----------------------------------------|
//! | `lp`             | `p`, `dim`                             |
//! | `lplq`           | `p`, `q`, `outer`, `inner`             |
//! | `schatten`       | `p`, `dim` (matrix side)               |
//! | `orlicz`         | `orlicz_fn`, `dim`                     |
//! | `racetrack`      | none                                   |
//! | `racetrack_dual` | none                                   |
//! | `numerical_dual` | `base` (a kind), `resolution`, plus the base's keys |
//!
//! `orlicz_fn` is one of `example1(p=…, t0=…)`, `example2(p=…)`,
//! `power(p=…)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::orlicz::OrliczSpec;
use crate::spaces::SpaceSpec;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Fields {
    values: BTreeMap<String, (usize, String)>,
    used: Vec<String>,
    kind_line: usize,
}

impl Fields {
    fn raw(&mut self, key: &str) -> Result<(usize, String)> {
        self.used.push(key.to_string());
        self.values
            .get(key)
            .cloned()
            .ok_or_else(|| parse_err(self.kind_line, format!("missing parameter `{key}`")))
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let (line, v) = self.raw(key)?;
        v.parse::<f64>()
            .map_err(|_| parse_err(line, format!("`{key}` expects a number, got `{v}`")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let (line, v) = self.raw(key)?;
        v.parse::<usize>()
            .map_err(|_| parse_err(line, format!("`{key}` expects a positive integer, got `{v}`")))
    }

    fn orlicz(&mut self, key: &str) -> Result<OrliczSpec> {
        let (line, v) = self.raw(key)?;
        v.parse::<OrliczSpec>().map_err(|m| parse_err(line, m))
    }

    fn finish(self) -> Result<()> {
        for (k, (line, _)) in &self.values {
            if !self.used.iter().any(|u| u == k) {
                return Err(parse_err(*line, format!("unexpected parameter `{k}`")));
            }
        }
        Ok(())
    }
}

fn build_kind(kind: &str, kind_line: usize, f: &mut Fields) -> Result<SpaceSpec> {
    Ok(match kind {
        "lp" => SpaceSpec::Lp {
            p: f.real("p")?,
            dim: f.count("dim")?,
        },
        "lplq" => SpaceSpec::LpLq {
            p: f.real("p")?,
            q: f.real("q")?,
            outer: f.count("outer")?,
            inner: f.count("inner")?,
        },
        "schatten" => SpaceSpec::Schatten {
            p: f.real("p")?,
            dim: f.count("dim")?,
        },
        "orlicz" => SpaceSpec::Orlicz {
            phi: f.orlicz("orlicz_fn")?,
            dim: f.count("dim")?,
        },
        "racetrack" => SpaceSpec::Racetrack,
        "racetrack_dual" => SpaceSpec::RacetrackDual,
        other => return Err(parse_err(kind_line, format!("unknown kind `{other}`"))),
    })
}

/// Parse a space description.
pub fn parse_spec(text: &str) -> Result<SpaceSpec> {
    let mut kind: Option<(usize, String)> = None;
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{s}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(parse_err(line, "empty key or value"));
        }
        if k == "kind" {
            if kind.is_some() {
                return Err(parse_err(line, "duplicate `kind`"));
            }
            kind = Some((line, v.to_string()));
        } else if values.insert(k.to_string(), (line, v.to_string())).is_some() {
            return Err(parse_err(line, format!("duplicate parameter `{k}`")));
        }
    }
    let (kind_line, kind) = kind.ok_or_else(|| parse_err(1, "missing `kind = ...` line"))?;
    let mut fields = Fields {
        values,
        used: Vec::new(),
        kind_line,
    };
    let spec = if kind == "numerical_dual" {
        let (base_line, base) = fields.raw("base")?;
        if base == "numerical_dual" {
            return Err(parse_err(base_line, "numerical_dual cannot wrap itself"));
        }
        let base = build_kind(&base, base_line, &mut fields)?;
        SpaceSpec::NumericalDual {
            base: Box::new(base),
            resolution: fields.count("resolution")?,
        }
    } else {
        build_kind(&kind, kind_line, &mut fields)?
    };
    fields.finish()?;
    spec.validate().map_err(|e| parse_err(kind_line, e.to_string()))?;
    Ok(spec)
}

fn dump_params(spec: &SpaceSpec, out: &mut String) {
    match spec {
        SpaceSpec::Lp { p, dim } | SpaceSpec::Schatten { p, dim } => {
            out.push_str(&format!("p = {p:?}\ndim = {dim}\n"));
        }
        SpaceSpec::LpLq { p, q, outer, inner } => {
            out.push_str(&format!("p = {p:?}\nq = {q:?}\nouter = {outer}\ninner = {inner}\n"));
        }
        SpaceSpec::Orlicz { phi, dim } => {
            out.push_str(&format!("orlicz_fn = {phi}\ndim = {dim}\n"));
        }
        SpaceSpec::Racetrack | SpaceSpec::RacetrackDual => {}
        SpaceSpec::NumericalDual { base, resolution } => {
            out.push_str(&format!("base = {}\nresolution = {resolution}\n", base.kind_name()));
            dump_params(base, out);
        }
    }
}

/// Render a space description that [`parse_spec`] reads back unchanged.
pub fn dump_spec(spec: &SpaceSpec) -> String {
    let mut out = format!("kind = {}\n", spec.kind_name());
    dump_params(spec, &mut out);
    out
}
