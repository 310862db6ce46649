//! Instance document:
//!
//! ```toml
//! [meta]
//! name = "ex1"
//! scale_factor = 1.0
//!
//! [dims]
//! n_transmitters = 2
//! n_testpoints = 2
//! n_levels = 1
//!
//! [params]
//! delta = 1.0
//! mu = 1.0
//! alpha = 2
//! powers = [10.0]
//! costs = [1.0]
//!
//! [fading]
//! rows = [[2.0, 0.5], [0.5, 2.0]]   # one row per testpoint
//! # or: entries = [[t, b, value], ...] listing every pair once
//! ```

use std::fmt::Write as _;

use serde::Deserialize;
use toml::Spanned;

use super::{float, FileError};
use crate::{Instance, InstanceField, InstanceSpec, Scalar};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    meta: Spanned<Meta>,
    dims: Spanned<Dims>,
    params: Spanned<Params>,
    fading: Spanned<Fading>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    name: String,
    #[serde(default = "one")]
    scale_factor: Spanned<f64>,
}

fn one() -> Spanned<f64> {
    Spanned::new(0..0, 1.0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Dims {
    n_transmitters: Spanned<usize>,
    n_testpoints: Spanned<usize>,
    n_levels: Spanned<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    delta: Spanned<f64>,
    mu: Spanned<f64>,
    alpha: Spanned<usize>,
    powers: Spanned<Vec<f64>>,
    costs: Spanned<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fading {
    rows: Option<Spanned<Vec<Spanned<Vec<Spanned<f64>>>>>>,
    entries: Option<Spanned<Vec<Spanned<(usize, usize, f64)>>>>,
}

fn span<T>(s: &Spanned<T>) -> Option<std::ops::Range<usize>> {
    let r = s.span();
    (r.end > 0).then_some(r)
}

/// Parses and validates an instance document.
pub fn read_instance<S: Scalar>(text: &str) -> Result<Instance<S>, FileError> {
    let doc: Doc = toml::from_str(text).map_err(|e| FileError::from_toml(text, e))?;
    let (nb, nt, nl) = (
        *doc.dims.get_ref().n_transmitters.get_ref(),
        *doc.dims.get_ref().n_testpoints.get_ref(),
        *doc.dims.get_ref().n_levels.get_ref(),
    );
    let params = doc.params.get_ref();
    if params.powers.get_ref().len() != nl {
        return Err(FileError::at(
            text,
            span(&params.powers),
            format!(
                "powers has {} values, n_levels is {}",
                params.powers.get_ref().len(),
                nl
            ),
        ));
    }

    // Cell spans so that a bad fading value can be pointed at.
    let mut cell_span = vec![None; nt * nb];
    let mut fading = vec![f64::NAN; nt * nb];
    let fad = doc.fading.get_ref();
    match (&fad.rows, &fad.entries) {
        (Some(rows), None) => {
            if rows.get_ref().len() != nt {
                return Err(FileError::at(
                    text,
                    span(rows),
                    format!(
                        "fading has {} rows, n_testpoints is {}",
                        rows.get_ref().len(),
                        nt
                    ),
                ));
            }
            for (t, row) in rows.get_ref().iter().enumerate() {
                if row.get_ref().len() != nb {
                    return Err(FileError::at(
                        text,
                        span(row),
                        format!(
                            "fading row {} has {} values, n_transmitters is {}",
                            t,
                            row.get_ref().len(),
                            nb
                        ),
                    ));
                }
                for (b, v) in row.get_ref().iter().enumerate() {
                    fading[t * nb + b] = *v.get_ref();
                    cell_span[t * nb + b] = span(v);
                }
            }
        }
        (None, Some(entries)) => {
            for e in entries.get_ref() {
                let (t, b, v) = *e.get_ref();
                if t >= nt || b >= nb {
                    return Err(FileError::at(
                        text,
                        span(e),
                        format!("fading entry ({}, {}) out of range", t, b),
                    ));
                }
                if cell_span[t * nb + b].is_some() {
                    return Err(FileError::at(
                        text,
                        span(e),
                        format!("fading entry ({}, {}) given twice", t, b),
                    ));
                }
                fading[t * nb + b] = v;
                cell_span[t * nb + b] = span(e);
            }
            if let Some(k) = cell_span.iter().position(Option::is_none) {
                return Err(FileError::at(
                    text,
                    span(entries),
                    format!(
                        "fading entry ({}, {}) missing",
                        k / nb.max(1),
                        k % nb.max(1)
                    ),
                ));
            }
        }
        _ => {
            return Err(FileError::at(
                text,
                span(&doc.fading),
                "fading needs exactly one of `rows` or `entries`",
            ))
        }
    }

    let spec = InstanceSpec {
        name: doc.meta.get_ref().name.clone(),
        n_transmitters: nb,
        n_testpoints: nt,
        powers: params.powers.get_ref().clone(),
        costs: params.costs.get_ref().clone(),
        fading,
        noise: *params.mu.get_ref(),
        threshold: *params.delta.get_ref(),
        coverage: *params.alpha.get_ref(),
        scale_factor: *doc.meta.get_ref().scale_factor.get_ref(),
    };
    let inst = Instance::new(spec).map_err(|e| {
        let at = match e.field {
            InstanceField::Dimensions => span(&doc.dims),
            InstanceField::Powers => span(&params.powers),
            InstanceField::Costs => span(&params.costs),
            InstanceField::Fading {
                testpoint,
                transmitter,
            } => cell_span
                .get(testpoint * nb + transmitter)
                .cloned()
                .flatten()
                .or_else(|| span(&doc.fading)),
            InstanceField::Noise => span(&params.mu),
            InstanceField::Threshold => span(&params.delta),
            InstanceField::Coverage => span(&params.alpha),
            InstanceField::ScaleFactor => {
                span(&doc.meta.get_ref().scale_factor).or_else(|| span(&doc.meta))
            }
        };
        FileError::at(text, at, e.message)
    })?;
    Ok(inst.cast())
}

fn list(values: impl IntoIterator<Item = f64>) -> String {
    let items: Vec<String> = values.into_iter().map(float).collect();
    format!("[{}]", items.join(", "))
}

/// Serialises an instance as a dense document.
pub fn write_instance<S: Scalar>(inst: &Instance<S>) -> String {
    let mut s = String::new();
    let name = toml::Value::String(inst.name().to_string()).to_string();
    let _ = writeln!(
        s,
        "[meta]\nname = {}\nscale_factor = {}\n",
        name,
        float(inst.scale_factor().as_f64())
    );
    let _ = writeln!(
        s,
        "[dims]\nn_transmitters = {}\nn_testpoints = {}\nn_levels = {}\n",
        inst.n_transmitters(),
        inst.n_testpoints(),
        inst.n_levels()
    );
    let _ = writeln!(
        s,
        "[params]\ndelta = {}\nmu = {}\nalpha = {}\npowers = {}\ncosts = {}\n",
        float(inst.threshold().as_f64()),
        float(inst.noise().as_f64()),
        inst.coverage(),
        list(inst.powers().iter().map(|p| p.as_f64())),
        list(inst.costs().iter().map(|c| c.as_f64()))
    );
    let _ = writeln!(s, "[fading]\nrows = [");
    for t in 0..inst.n_testpoints() {
        let _ = writeln!(
            s,
            "  {},",
            list(inst.gains_at(t).iter().map(|a| a.as_f64()))
        );
    }
    s.push_str("]\n");
    s
}
