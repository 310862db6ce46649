//! MPS export in the fixed-column layout.
//!
//! Fields start at the classic columns (2, 5, 15, 25, 40, 50). Names longer
//! than eight characters and full-precision numbers simply push the following
//! fields right, which whitespace-splitting readers accept.

use std::io::{self, Write};

use super::model::{MilpModel, Sense};
use crate::Scalar;

const OBJECTIVE_ROW: &str = "COST";

fn number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:e}", v)
    }
}

fn line(out: &mut impl Write, f1: &str, f2: &str, f3: &str, f4: &str) -> io::Result<()> {
    let mut s = format!(" {:<2} {:<8}", f1, f2);
    if !f3.is_empty() {
        s.push_str(&format!("  {:<8}  {}", f3, f4));
    }
    writeln!(out, "{}", s.trim_end())
}

/// Writes `model` as an MPS document named `name`.
pub fn write_mps<S: Scalar>(
    model: &MilpModel<S>,
    name: &str,
    out: &mut impl Write,
) -> io::Result<()> {
    writeln!(out, "NAME          {}", name)?;
    writeln!(out, "ROWS")?;
    line(out, "N", OBJECTIVE_ROW, "", "")?;
    let row_names: Vec<String> = model.rows().iter().map(|r| r.tag.name()).collect();
    for (r, rname) in model.rows().iter().zip(&row_names) {
        let code = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(out, code, rname, "", "")?;
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.n_cols()];
    for (i, j, v) in model.triplets() {
        by_col[j].push((i, v.as_f64()));
    }
    writeln!(out, "COLUMNS")?;
    let mut in_int = false;
    for (j, col) in model.columns().iter().enumerate() {
        if col.integer != in_int {
            let tag = if col.integer { "'INTORG'" } else { "'INTEND'" };
            writeln!(
                out,
                "    MARKER                 'MARKER'                 {}",
                tag
            )?;
            in_int = col.integer;
        }
        let cname = col.role.to_string();
        let cost = col.cost.as_f64();
        if cost != 0.0 || by_col[j].is_empty() {
            line(out, "", &cname, OBJECTIVE_ROW, &number(cost))?;
        }
        for (i, v) in &by_col[j] {
            line(out, "", &cname, &row_names[*i], &number(*v))?;
        }
    }
    if in_int {
        writeln!(
            out,
            "    MARKER                 'MARKER'                 'INTEND'"
        )?;
    }

    writeln!(out, "RHS")?;
    for (r, rname) in model.rows().iter().zip(&row_names) {
        let rhs = r.rhs.as_f64();
        if rhs != 0.0 {
            line(out, "", "RHS", rname, &number(rhs))?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for col in model.columns() {
        let cname = col.role.to_string();
        let (lo, up) = (col.lower.as_f64(), col.upper.as_f64());
        if lo == up {
            line(out, "FX", "BND", &cname, &number(lo))?;
        } else if col.integer && lo == 0.0 && up == 1.0 {
            line(out, "BV", "BND", &cname, "")?;
        } else {
            line(out, "LO", "BND", &cname, &number(lo))?;
            line(out, "UP", "BND", &cname, &number(up))?;
        }
    }
    writeln!(out, "ENDATA")
}

pub fn to_mps_string<S: Scalar>(model: &MilpModel<S>, name: &str) -> String {
    let mut buf = Vec::new();
    write_mps(model, name, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
