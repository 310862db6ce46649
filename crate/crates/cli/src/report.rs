//! Bench rows in the layout of the RCF comparison table: sparsity and
//! largest big-M before and after presolve, then the time split.

use std::io::{self, Write};
use std::time::Duration;

use sitepower::framework::{Framework, SolveReport, SolveStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub framework: Framework,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub nodes: usize,
    pub total_time: Duration,
    pub heuristic_time: Option<Duration>,
    pub reduced_time: Option<Duration>,
    pub nonzeros_before: usize,
    pub nonzeros_after: usize,
    pub bigm_before: f64,
    pub bigm_after: f64,
}

impl BenchRow {
    pub fn new(id: &str, r: &SolveReport<f64>) -> Self {
        let (nz0, m0) = match &r.rcf {
            Some(rcf) => (
                rcf.nonzeros_before.unwrap_or(r.nonzeros),
                rcf.bigm_before.unwrap_or(r.max_bigm),
            ),
            None => (r.nonzeros, r.max_bigm),
        };
        Self {
            id: id.to_string(),
            framework: r.framework,
            status: r.status.clone(),
            objective: r.objective,
            nodes: r.nodes,
            total_time: r.total_time,
            heuristic_time: r.heuristic_time,
            reduced_time: r.reduced_time,
            nonzeros_before: nz0,
            nonzeros_after: r.nonzeros,
            bigm_before: m0,
            bigm_after: r.max_bigm,
        }
    }
}

pub const HEADER: [&str; 12] = [
    "ID",
    "Framework",
    "Status",
    "Objective",
    "Nodes",
    "Non-zeros",
    "MaxBig-M",
    "Non-zeros",
    "MaxBig-M",
    "HTime[s]",
    "RTime[s]",
    "Time[s]",
];

const CSV_HEADER: [&str; 12] = [
    "id",
    "framework",
    "status",
    "objective",
    "nodes",
    "nonzeros_before",
    "max_bigm_before",
    "nonzeros_after",
    "max_bigm_after",
    "heuristic_time_s",
    "reduced_time_s",
    "total_time_s",
];

fn secs(d: Option<Duration>) -> String {
    d.map_or_else(|| "-".to_string(), |d| format!("{:.3}", d.as_secs_f64()))
}

fn status_word(s: &SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Limit => "limit",
        SolveStatus::Failed(_) => "failed",
    }
}

fn cells(r: &BenchRow) -> [String; 12] {
    [
        r.id.clone(),
        r.framework.label().to_string(),
        status_word(&r.status).to_string(),
        r.objective
            .map_or_else(|| "-".to_string(), |v| format!("{}", v)),
        r.nodes.to_string(),
        r.nonzeros_before.to_string(),
        format!("{:.4e}", r.bigm_before),
        r.nonzeros_after.to_string(),
        format!("{:.4e}", r.bigm_after),
        secs(r.heuristic_time),
        secs(r.reduced_time),
        secs(Some(r.total_time)),
    ]
}

/// Left-aligned text columns for the first two fields, right-aligned after.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i < 2 {
                    format!("{:<w$}", c)
                } else {
                    format!("{:>w$}", c)
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let body: Vec<Vec<String>> = rows.iter().map(|r| cells(r).to_vec()).collect();
    render_table(&HEADER, &body)
}

pub fn write_csv(rows: &[BenchRow], out: impl Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let c = cells(r);
        let mut rec: Vec<String> = c.to_vec();
        // Full precision and empty fields for machine readers.
        rec[3] = r.objective.map_or_else(String::new, |v| format!("{:e}", v));
        rec[6] = format!("{:e}", r.bigm_before);
        rec[8] = format!("{:e}", r.bigm_after);
        for (k, d) in [
            (9, r.heuristic_time),
            (10, r.reduced_time),
            (11, Some(r.total_time)),
        ] {
            rec[k] = d.map_or_else(String::new, |d| format!("{:.6}", d.as_secs_f64()));
        }
        w.write_record(&rec)?;
    }
    w.flush()
}
