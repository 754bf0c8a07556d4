//! Text serialization: a `gridfn v1` header followed by one value per line.

use super::GridFunction;
use crate::error::{parse_err, Result};
use std::fmt::Write;

fn join(v: impl Iterator<Item = String>) -> String {
    v.collect::<Vec<_>>().join(",")
}

pub fn write_text(f: &GridFunction) -> String {
    let mut out = String::with_capacity(f.len() * 24 + 128);
    let _ = writeln!(
        out,
        "gridfn v1 dim={} origin={} spacing={:e} shape={}",
        f.dim(),
        join(f.origin().iter().map(|v| format!("{v:e}"))),
        f.spacing(),
        join(f.shape().iter().map(|v| v.to_string()))
    );
    for v in f.values() {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

pub fn read_text(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let mut fields = header.split_whitespace();
    if fields.next() != Some("gridfn") || fields.next() != Some("v1") {
        return parse_err("missing `gridfn v1` header");
    }
    let (mut dim, mut origin, mut spacing, mut shape) = (None, None, None, None);
    for kv in fields {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| crate::Error::Parse(format!("bad header field `{kv}`")))?;
        let nums = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|t| t.parse::<f64>().or_else(|_| parse_err(format!("bad number `{t}`"))))
                .collect()
        };
        match k {
            "dim" => dim = Some(v.parse::<usize>().or_else(|_| parse_err("bad dim"))?),
            "origin" => origin = Some(nums(v)?),
            "spacing" => spacing = Some(v.parse::<f64>().or_else(|_| parse_err("bad spacing"))?),
            "shape" => {
                shape = Some(
                    v.split(',')
                        .map(|t| t.parse::<usize>().or_else(|_| parse_err("bad shape")))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            _ => return parse_err(format!("unknown header field `{k}`")),
        }
    }
    let (Some(dim), Some(origin), Some(spacing), Some(shape)) = (dim, origin, spacing, shape) else {
        return parse_err("header needs dim, origin, spacing and shape");
    };
    if origin.len() != dim {
        return parse_err("origin length differs from dim");
    }
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().or_else(|_| parse_err(format!("bad value `{l}`"))))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(origin, spacing, shape, values)
}

/// `x1[,x2,..],value` rows with a header line.
pub fn to_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    let names: Vec<String> = (1..=f.dim()).map(|d| format!("x{d}")).collect();
    let _ = writeln!(out, "{},value", names.join(","));
    for (i, v) in f.values().iter().enumerate() {
        let x = f.coordinate(i);
        let _ = writeln!(out, "{},{v}", join(x.iter().map(|c| c.to_string())));
    }
    out
}
