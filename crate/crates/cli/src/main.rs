//! `sitepower`: generate, solve, check and benchmark site and power
//! assignment instances.

mod backend;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sitepower::bnb::NodeSelection;
use sitepower::formulation::{big_m_base, build, mps::to_mps_string};
use sitepower::framework::{
    presolve, solve_framework, Framework, FrameworkConfig, PresolveOutcome, SolveStatus,
};
use sitepower::instgen::{generate, small_params, standard_params, GenParams};
use sitepower::io::{read_instance, read_solution, write_instance, write_solution, SolutionMeta};
use sitepower::oracle::{brute_force, DEFAULT_CAP};
use sitepower::{objective, verify_solution, Instance64, Solution};

use backend::Backend;
use report::{bench_table, render_table, write_csv, BenchRow};

#[derive(Parser)]
#[command(
    name = "sitepower",
    version,
    about = "Site and power assignment with big-M tightening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Solve an instance with one framework.
    Solve(SolveArgs),
    /// Solve a small instance by enumeration.
    Oracle(OracleArgs),
    /// Check a solution against an instance.
    Verify(VerifyArgs),
    /// Root LP, heuristic and reduced cost fixing, without the final search.
    PresolveReport(PresolveArgs),
    /// Write the model of a framework in MPS format.
    ExportMps(ExportArgs),
    /// Solve every instance with every listed framework.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 30 transmitters, 500 testpoints, three levels.
    Standard,
    /// At most 4 transmitters, 10 testpoints and 2 levels.
    Small,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "standard")]
    preset: Preset,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    transmitters: Option<usize>,
    #[arg(long)]
    testpoints: Option<usize>,
    /// Side of the square area in metres.
    #[arg(long)]
    area: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    min_distance: Option<f64>,
    /// SINR threshold delta.
    #[arg(long)]
    threshold: Option<f64>,
    /// Fraction of testpoints to cover.
    #[arg(long)]
    coverage: Option<f64>,
    /// Power levels in watts, comma separated.
    #[arg(long, value_delimiter = ',')]
    powers: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<f64>>,
    /// Noise in watts.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    scale_factor: Option<f64>,
    #[arg(long)]
    name: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long)]
    node_limit: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Depth-first node selection instead of best bound.
    #[arg(long)]
    dfs: bool,
    /// LP value below which the heuristic fixes a level to zero.
    #[arg(long)]
    zero_threshold: Option<f64>,
    /// Fix levels whose reduced cost equals the gap as well.
    #[arg(long)]
    fix_ties: bool,
}

impl SearchArgs {
    fn config(&self) -> FrameworkConfig<f64> {
        let mut cfg = FrameworkConfig::default();
        cfg.bnb.node_limit = self.node_limit;
        cfg.bnb.time_limit = self.time_limit.map(Duration::from_secs_f64);
        if self.dfs {
            cfg.bnb.node_selection = NodeSelection::DepthFirst;
        }
        if let Some(z) = self.zero_threshold {
            cfg.heuristic.zero_threshold = z;
        }
        cfg.rcf.fix_ties = self.fix_ties;
        cfg
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, short, default_value = "N")]
    framework: Framework,
    /// Solution file to write.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Largest number of activations to enumerate.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
    /// Also compare the cost with the enumerated optimum.
    #[arg(long)]
    optimal: bool,
}

#[derive(Args)]
struct PresolveArgs {
    instance: PathBuf,
    #[arg(long, short, default_value = "N+RCF")]
    framework: Framework,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    /// RCF frameworks export the tightened, restricted model.
    #[arg(long, short, default_value = "N")]
    framework: Framework,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Comma separated; every framework when omitted.
    #[arg(long, short, value_delimiter = ',')]
    frameworks: Option<Vec<Framework>>,
    /// Also write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Cells solved in parallel. Each solve stays single-threaded.
    #[arg(long, short, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    search: SearchArgs,
}

/// A failure together with its exit code.
#[derive(Debug)]
enum Failure {
    /// Infeasible instance, or a solution that fails verification.
    Negative(String),
    Usage(String),
    Backend(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Backend(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Negative(m) | Failure::Usage(m) | Failure::Backend(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn load_instance(path: &Path) -> Result<Instance64, Failure> {
    let text = read_text(path)?;
    read_instance(&text).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn load_solution(path: &Path) -> Result<(Solution, SolutionMeta), Failure> {
    let text = read_text(path)?;
    read_solution(&text).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {}", p.display(), e)))
        }
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn run_generate(a: GenerateArgs) -> Outcome {
    let mut p: GenParams = match a.preset {
        Preset::Standard => standard_params(a.seed),
        Preset::Small => small_params(a.seed),
    };
    if let Some(v) = a.transmitters {
        p.n_transmitters = v;
    }
    if let Some(v) = a.testpoints {
        p.n_testpoints = v;
    }
    if let Some(v) = a.area {
        p.area = v;
    }
    if let Some(v) = a.eta {
        p.pathloss_exponent = v;
    }
    if let Some(v) = a.min_distance {
        p.min_distance = v;
    }
    if let Some(v) = a.threshold {
        p.threshold = v;
    }
    if let Some(v) = a.coverage {
        p.coverage_fraction = v;
    }
    if let Some(v) = a.powers {
        p.powers = v;
    }
    if let Some(v) = a.costs {
        p.costs = v;
    }
    if let Some(v) = a.noise {
        p.noise = v;
    }
    if let Some(v) = a.scale_factor {
        p.scale_factor = v;
    }
    let mut inst: Instance64 = generate(&p).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(n) = a.name {
        inst = inst.with_name(n);
    }
    emit(a.output.as_deref(), &write_instance(&inst))
}

/// `verify` is the feasibility authority for everything a solver returns.
fn checked(inst: &Instance64, sol: &Solution, who: &str) -> Outcome {
    let rep = verify_solution(inst, sol);
    if rep.is_feasible() {
        Ok(())
    } else {
        Err(Failure::Backend(format!(
            "{} returned a solution that fails verification: {}",
            who, rep
        )))
    }
}

fn run_solve(a: SolveArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let backend = Backend::from_env().map_err(Failure::Usage)?;
    let r = solve_framework(&inst, a.framework, backend.get(), &a.search.config());
    let row = BenchRow::new(&instance_id(&a.instance), &r);
    print!("{}", bench_table(&[row]));
    if let Some(sol) = &r.solution {
        checked(&inst, sol, a.framework.label())?;
        if let Some(out) = &a.output {
            let meta = SolutionMeta {
                objective: r.objective,
                framework: Some(a.framework.label().to_string()),
                status: Some(r.status.to_string()),
            };
            emit(Some(out), &write_solution(sol, &meta))?;
        }
    }
    match r.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(Failure::Negative("instance is infeasible".into())),
        SolveStatus::Limit if r.solution.is_some() => {
            eprintln!("limit reached; gap {:e}", r.gap);
            Ok(())
        }
        SolveStatus::Limit => Err(Failure::Negative(
            "limit reached without a feasible solution".into(),
        )),
        SolveStatus::Failed(m) => Err(Failure::Backend(m)),
    }
}

fn run_oracle(a: OracleArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let o = brute_force(&inst, a.cap).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("enumerated      {}", o.enumerated);
    let Some(opt) = o.optimum else {
        println!("optimum         -");
        return Err(Failure::Negative(
            "no activation reaches the coverage target".into(),
        ));
    };
    println!("optimum         {}", opt);
    println!("optimal count   {}", o.optimal_count);
    let sol = o.solution.expect("an optimum comes with a solution");
    checked(&inst, &sol, "oracle")?;
    if let Some(out) = &a.output {
        let meta = SolutionMeta {
            objective: Some(opt),
            framework: Some("oracle".into()),
            status: Some("optimal".into()),
        };
        emit(Some(out), &write_solution(&sol, &meta))?;
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let (sol, meta) = load_solution(&a.solution)?;
    let rep = verify_solution(&inst, &sol);
    println!("{}", rep.to_string().trim_end());
    if !rep.is_feasible() {
        return Err(Failure::Negative("solution is infeasible".into()));
    }
    let cost = objective(&inst, &sol);
    println!("objective       {}", cost);
    if let Some(claimed) = meta.objective {
        if (claimed - cost).abs() > 1e-9 * cost.abs().max(1.0) {
            eprintln!(
                "warning: file claims objective {} but the solution costs {}",
                claimed, cost
            );
        }
    }
    if a.optimal {
        let o = brute_force(&inst, DEFAULT_CAP).map_err(|e| Failure::Usage(e.to_string()))?;
        let opt = o.optimum.expect("a feasible solution exists");
        println!("optimum         {}", opt);
        if cost > opt + 1e-9 {
            return Err(Failure::Negative(format!("suboptimal: {} > {}", cost, opt)));
        }
    }
    Ok(())
}

fn run_presolve(a: PresolveArgs) -> Outcome {
    if !a.framework.uses_rcf() {
        return Err(Failure::Usage(format!(
            "{} has no presolve; pick an RCF framework",
            a.framework
        )));
    }
    let inst = load_instance(&a.instance)?;
    let backend = Backend::from_env().map_err(Failure::Usage)?;
    let cfg = a.search.config();
    let pre = presolve(
        &inst,
        a.framework.kind(),
        a.framework.scheme(),
        backend.get(),
        &cfg,
    );
    let (nz0, m0) = (pre.base.nonzeros(), pre.base_bigm.max());
    let (nz1, m1, note) = match &pre.outcome {
        PresolveOutcome::Infeasible => {
            return Err(Failure::Negative("root LP is infeasible".into()))
        }
        PresolveOutcome::Failed(m) => return Err(Failure::Backend(m.clone())),
        PresolveOutcome::Unavailable => (nz0, m0, Some("no upper bound; model left untouched")),
        PresolveOutcome::Closed => (nz0, m0, Some("heuristic closed the gap at the root")),
        PresolveOutcome::Tightened { model, bigm, .. } => (model.nonzeros(), bigm.max(), None),
    };
    let secs = |d: Duration| format!("{:.3}", d.as_secs_f64());
    let row = vec![
        instance_id(&a.instance),
        a.framework.label().to_string(),
        nz0.to_string(),
        format!("{:.4e}", m0),
        nz1.to_string(),
        format!("{:.4e}", m1),
        secs(pre.lb_time),
        secs(pre.heuristic_time),
    ];
    let header = [
        "ID",
        "Framework",
        "Non-zeros",
        "MaxBig-M",
        "Non-zeros",
        "MaxBig-M",
        "LTime[s]",
        "HTime[s]",
    ];
    print!("{}", render_table(&header, &[row]));
    if let Some(n) = note {
        println!("{}", n);
    }
    if let PresolveOutcome::Tightened { report, .. } = &pre.outcome {
        println!();
        print!("{}", report);
    }
    Ok(())
}

fn run_export(a: ExportArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let name = instance_id(&a.instance);
    let model = if a.framework.uses_rcf() {
        let backend = Backend::from_env().map_err(Failure::Usage)?;
        let pre = presolve(
            &inst,
            a.framework.kind(),
            a.framework.scheme(),
            backend.get(),
            &FrameworkConfig::default(),
        );
        match pre.outcome {
            PresolveOutcome::Tightened { model, .. } => model,
            PresolveOutcome::Failed(m) => return Err(Failure::Backend(m)),
            _ => pre.base,
        }
    } else {
        build(a.framework.kind(), &inst, &big_m_base(&inst))
            .map_err(|e| Failure::Backend(e.to_string()))?
            .with_priorities(a.framework.scheme())
    };
    emit(a.output.as_deref(), &to_mps_string(&model, &name))
}

fn run_bench(a: BenchArgs) -> Outcome {
    let instances: Vec<(String, Instance64)> = a
        .instances
        .iter()
        .map(|p| Ok((instance_id(p), load_instance(p)?)))
        .collect::<Result<_, Failure>>()?;
    let frameworks = a
        .frameworks
        .clone()
        .unwrap_or_else(|| Framework::ALL.to_vec());
    let backend = Backend::from_env().map_err(Failure::Usage)?;
    let cfg = a.search.config();
    let cells: Vec<(usize, Framework)> = (0..instances.len())
        .flat_map(|i| frameworks.iter().map(move |&f| (i, f)))
        .collect();
    let solve = |&(i, f): &(usize, Framework)| {
        let (id, inst) = &instances[i];
        BenchRow::new(id, &solve_framework(inst, f, backend.get(), &cfg))
    };
    // An indexed parallel collect keeps the cell order.
    let rows: Vec<BenchRow> = if a.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.jobs)
            .build()
            .map_err(|e| Failure::Backend(e.to_string()))?;
        pool.install(|| cells.par_iter().map(solve).collect())
    } else {
        cells.iter().map(solve).collect()
    };
    print!("{}", bench_table(&rows));
    if let Some(path) = &a.csv {
        let file = fs::File::create(path)
            .map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))?;
        write_csv(&rows, file).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))?;
    }
    match rows
        .iter()
        .find(|r| matches!(r.status, SolveStatus::Failed(_)))
    {
        Some(r) => Err(Failure::Backend(format!(
            "{} on {}: {}",
            r.framework, r.id, r.status
        ))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Solve(a) => run_solve(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Verify(a) => run_verify(a),
        Command::PresolveReport(a) => run_presolve(a),
        Command::ExportMps(a) => run_export(a),
        Command::Bench(a) => run_bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sitepower: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
