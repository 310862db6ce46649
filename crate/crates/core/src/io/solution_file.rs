//! Solution document. Indices are 0-based and `-1` means none:
//!
//! ```toml
//! [meta]              # optional
//! objective = 1.0
//! framework = "R+PBw"
//! status = "optimal"
//!
//! [solution]
//! level = [0, -1]     # per transmitter
//! server = [0, -1]    # per testpoint
//! slack = [[0, 1], [1, 1]]   # optional, testpoint rows
//! ```

use std::fmt::Write as _;

use serde::Deserialize;
use toml::Spanned;

use super::{float, FileError};
use crate::Solution;

/// Free-form information stored next to a solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionMeta {
    pub objective: Option<f64>,
    pub framework: Option<String>,
    pub status: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    #[serde(default)]
    meta: Option<Meta>,
    solution: Spanned<Body>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    objective: Option<f64>,
    framework: Option<String>,
    status: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Body {
    level: Spanned<Vec<Spanned<i64>>>,
    server: Spanned<Vec<Spanned<i64>>>,
    slack: Option<Spanned<Vec<Spanned<Vec<Spanned<i64>>>>>>,
}

fn index(text: &str, v: &Spanned<i64>, what: &str) -> Result<Option<usize>, FileError> {
    match *v.get_ref() {
        -1 => Ok(None),
        i if i >= 0 => Ok(Some(i as usize)),
        i => Err(FileError::at(
            text,
            Some(v.span()),
            format!("{} {} is neither -1 nor an index", what, i),
        )),
    }
}

/// Parses a solution. Dimensions and level indices are checked against an
/// instance by `verify_solution`.
pub fn read_solution(text: &str) -> Result<(Solution, SolutionMeta), FileError> {
    let doc: Doc = toml::from_str(text).map_err(|e| FileError::from_toml(text, e))?;
    let body = doc.solution.get_ref();
    let level = body
        .level
        .get_ref()
        .iter()
        .map(|v| index(text, v, "level"))
        .collect::<Result<Vec<_>, _>>()?;
    let server = body
        .server
        .get_ref()
        .iter()
        .map(|v| index(text, v, "server"))
        .collect::<Result<Vec<_>, _>>()?;
    for (v, s) in body.server.get_ref().iter().zip(&server) {
        if s.is_some_and(|b| b >= level.len()) {
            return Err(FileError::at(
                text,
                Some(v.span()),
                format!(
                    "server {} out of range for {} transmitters",
                    v.get_ref(),
                    level.len()
                ),
            ));
        }
    }
    let mut sol = Solution::new(server, level);
    if let Some(rows) = &body.slack {
        let (nt, nb) = (sol.n_testpoints(), sol.n_transmitters());
        if rows.get_ref().len() != nt {
            return Err(FileError::at(
                text,
                Some(rows.span()),
                format!("slack has {} rows, expected {}", rows.get_ref().len(), nt),
            ));
        }
        let mut flat = Vec::with_capacity(nt * nb);
        for row in rows.get_ref() {
            if row.get_ref().len() != nb {
                return Err(FileError::at(
                    text,
                    Some(row.span()),
                    format!(
                        "slack row has {} values, expected {}",
                        row.get_ref().len(),
                        nb
                    ),
                ));
            }
            for v in row.get_ref() {
                match *v.get_ref() {
                    0 => flat.push(false),
                    1 => flat.push(true),
                    other => {
                        return Err(FileError::at(
                            text,
                            Some(v.span()),
                            format!("slack value {} is not 0 or 1", other),
                        ))
                    }
                }
            }
        }
        sol = sol.with_slack(flat);
    }
    let meta = doc
        .meta
        .map(|m| SolutionMeta {
            objective: m.objective,
            framework: m.framework,
            status: m.status,
        })
        .unwrap_or_default();
    Ok((sol, meta))
}

fn indices(v: &[Option<usize>]) -> String {
    let items: Vec<String> = v
        .iter()
        .map(|x| x.map_or("-1".to_string(), |i| i.to_string()))
        .collect();
    format!("[{}]", items.join(", "))
}

pub fn write_solution(sol: &Solution, meta: &SolutionMeta) -> String {
    let mut s = String::new();
    if meta != &SolutionMeta::default() {
        s.push_str("[meta]\n");
        if let Some(o) = meta.objective {
            let _ = writeln!(s, "objective = {}", float(o));
        }
        if let Some(f) = &meta.framework {
            let _ = writeln!(s, "framework = {}", toml::Value::String(f.clone()));
        }
        if let Some(st) = &meta.status {
            let _ = writeln!(s, "status = {}", toml::Value::String(st.clone()));
        }
        s.push('\n');
    }
    let _ = writeln!(
        s,
        "[solution]\nlevel = {}\nserver = {}",
        indices(sol.level()),
        indices(sol.server())
    );
    if let Some(slack) = sol.slack() {
        s.push_str("slack = [\n");
        for row in slack.chunks(sol.n_transmitters().max(1)) {
            let items: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            let _ = writeln!(s, "  [{}],", items.join(", "));
        }
        s.push_str("]\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let sol = Solution::new(vec![Some(0), None, Some(1)], vec![Some(1), Some(0)]);
        let meta = SolutionMeta {
            objective: Some(3.0),
            framework: Some("R+PBw".into()),
            status: Some("optimal".into()),
        };
        let text = write_solution(&sol, &meta);
        assert_eq!(read_solution(&text).unwrap(), (sol.clone(), meta));

        let with_slack = sol.with_slack(vec![false, true, true, true, true, false]);
        let text = write_solution(&with_slack, &SolutionMeta::default());
        assert!(!text.contains("[meta]"));
        assert_eq!(read_solution(&text).unwrap().0, with_slack);
    }

    #[test]
    fn bad_values_located() {
        let err = read_solution("[solution]\nlevel = [0]\nserver = [-2]\n").unwrap_err();
        assert_eq!((err.line, err.column), (Some(3), Some(11)));
        let err = read_solution("[solution]\nlevel = [0]\nserver = [3]\n").unwrap_err();
        assert!(err.message.contains("out of range"));
        let err =
            read_solution("[solution]\nlevel = [0]\nserver = [0]\nslack = [[2]]\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        let err = read_solution("[solution]\nlevel = [0]\n").unwrap_err();
        assert!(err.message.contains("server"), "{}", err);
    }
}
