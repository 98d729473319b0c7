use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use compgraph::conditions::{
    appendix_counterexample, plan_asymmetric, plan_centralized, plan_simultaneous, plan_simultaneous_streaming,
    plan_streaming,
};
use compgraph::harness::{
    moment_audit, parse_dist_spec, parse_graph_spec, parse_suite, records_jsonl, run_scenario, run_suite_text,
    summary_csv, DistSpec, Scenario, ScenarioModel, SuiteOutput,
};
use compgraph::{Error, Execution, Plan};
use serde_json::json;

#[derive(Parser)]
#[command(name = "compgraph", version, about = "Comparison-graph uniformity testers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a certified plan as JSON.
    Plan(PlanArgs),
    /// Run one scenario, from a file or from flags.
    Run(RunArgs),
    /// Run every scenario in a suite file.
    Suite(SuiteArgs),
    /// Compare Monte Carlo moments of Z with the closed forms.
    Audit(AuditArgs),
    /// Build the cycle and hub-augmented pair.
    Counterexample(CounterArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum PlanModel {
    Centralized,
    Simultaneous,
    Asymmetric,
    Streaming,
    SimultaneousStreaming,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_enum)]
    model: PlanModel,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    m_bits: Option<u64>,
    /// Print a table instead of JSON.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    seed: u64,
    /// Summary CSV destination; stdout by default.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-trial JSON-lines destination.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Emitted plans as a JSON array.
    #[arg(long)]
    plans: Option<PathBuf>,
    /// Add a wall-clock column.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with_all = ["model", "n", "eps", "dist", "trials"])]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, requires_all = ["n", "eps", "trials"])]
    model: Option<ScenarioModelArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    m_bits: Option<u64>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    t: Option<usize>,
    /// `uniform`, `bump[:EPS]`, `heavy[:EPS]`, `point[:I]` or `explicit:P1,P2,...`.
    #[arg(long, default_value = "uniform")]
    dist: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ScenarioModelArg {
    Centralized,
    Simultaneous,
    Asymmetric,
    Streaming,
    SimultaneousStreaming,
    CongestLocal,
    CongestPipelined,
    CongestCombined,
}

impl From<ScenarioModelArg> for ScenarioModel {
    fn from(m: ScenarioModelArg) -> Self {
        match m {
            ScenarioModelArg::Centralized => ScenarioModel::Centralized,
            ScenarioModelArg::Simultaneous => ScenarioModel::Simultaneous,
            ScenarioModelArg::Asymmetric => ScenarioModel::Asymmetric,
            ScenarioModelArg::Streaming => ScenarioModel::Streaming,
            ScenarioModelArg::SimultaneousStreaming => ScenarioModel::SimultaneousStreaming,
            ScenarioModelArg::CongestLocal => ScenarioModel::CongestLocal,
            ScenarioModelArg::CongestPipelined => ScenarioModel::CongestPipelined,
            ScenarioModelArg::CongestCombined => ScenarioModel::CongestCombined,
        }
    }
}

#[derive(Args)]
struct SuiteArgs {
    /// JSON array of scenarios, or one scenario per line.
    path: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AuditArgs {
    /// e.g. `clique:5`, `star:10`, `cliques:3:4`, or a JSON file.
    #[arg(long)]
    graph: String,
    /// e.g. `uniform:10`, `bump:10:0.5`, or a JSON file.
    #[arg(long)]
    dist: String,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct CounterArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 40.0)]
    b: f64,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn dist_spec(s: &str) -> Result<DistSpec, Error> {
    let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
    let num = |a: &str| a.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{a}` in `{s}`")));
    Ok(match (kind, arg) {
        ("uniform", None) => DistSpec::Uniform,
        ("bump", a) => DistSpec::Bump { eps: a.map(num).transpose()? },
        ("heavy", a) => DistSpec::Heavy { eps: a.map(num).transpose()? },
        ("point", a) => DistSpec::Point {
            element: a.map_or(Ok(1), |a| a.parse().map_err(|_| Error::Parse(format!("bad element in `{s}`"))))?,
        },
        ("explicit", Some(a)) => DistSpec::Explicit { probs: a.split(',').map(num).collect::<Result<_, _>>()? },
        _ => return Err(Error::Parse(format!("unknown distribution `{s}`"))),
    })
}

fn plan(args: &PlanArgs) -> Result<Plan, Error> {
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")));
    match args.model {
        PlanModel::Centralized => plan_centralized(args.n, args.eps),
        PlanModel::Simultaneous => plan_simultaneous(args.n, args.eps, need(args.k, "k")?),
        PlanModel::Asymmetric => plan_asymmetric(
            args.n,
            args.eps,
            args.rates.as_deref().ok_or_else(|| Error::InvalidArgument("--rates is required".into()))?,
        ),
        PlanModel::Streaming => plan_streaming(args.n, args.eps, need(args.m_bits, "m-bits")?),
        PlanModel::SimultaneousStreaming => {
            plan_simultaneous_streaming(args.n, args.eps, need(args.k, "k")?, need(args.m_bits, "m-bits")?)
        }
    }
}

fn plan_table(p: &Plan) -> String {
    let r = &p.report;
    let res = &p.resources;
    let mut lines = vec![
        format!("model          {:?}", p.model),
        format!("family         {:?}", p.family),
        format!("n, eps         {}, {}", p.n, p.eps),
        format!("tau            {:.4}", p.tau),
        format!("clique size    {}", p.clique_size),
        format!("players        {}", p.players),
        format!("cliques/player {}", p.cliques_per_player),
        format!("samples        {} ({} per player)", res.total_samples, res.samples_per_player),
        format!("edges          {}", res.edges),
        format!("threshold      {:.3}", res.threshold),
    ];
    if let Some(t) = res.time {
        lines.push(format!("time           {t}"));
    }
    if let Some(b) = res.message_bits {
        lines.push(format!("message bits   {b}"));
    }
    if let Some(b) = res.memory_bits {
        lines.push(format!("memory bits    {b}"));
    }
    for (name, c) in [("cond1", &r.cond1), ("cond2", &r.cond2), ("cond3", &r.cond3)] {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        lines.push(format!("{name}          {verdict}  actual {:.6e}  required {:.6e}", c.actual, c.required));
    }
    lines.join("\n")
}

fn emit(out: &Output, result: SuiteOutput) -> Result<(), Error> {
    match &out.csv {
        Some(path) => fs::write(path, &result.csv)?,
        None => print!("{}", result.csv),
    }
    if let Some(path) = &out.records {
        fs::write(path, records_jsonl(&result.records)?)?;
    }
    if let Some(path) = &out.plans {
        fs::write(path, serde_json::to_string_pretty(&result.plans)?)?;
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Error> {
    let exec = execution(args.out.sequential);
    let scenarios = match (&args.scenario, args.model) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            match serde_json::from_str::<Scenario>(&text) {
                Ok(s) => vec![s],
                Err(_) => parse_suite(&text)?,
            }
        }
        (None, Some(model)) => vec![Scenario {
            id: None,
            model: model.into(),
            n: args.n.unwrap_or_default(),
            eps: args.eps.unwrap_or_default(),
            k: args.k,
            rates: args.rates,
            m_bits: args.m_bits,
            topology: args.topology,
            t: args.t,
            ball_cap: None,
            dist: dist_spec(args.dist.as_deref().unwrap_or("uniform"))?,
            trials: args.trials.unwrap_or_default(),
        }],
        (None, None) => return Err(Error::InvalidArgument("give --scenario or --model".into())),
    };
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut plans = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        let r = run_scenario(s, i, args.out.seed, exec)?;
        rows.push(r.row);
        records.extend(r.records);
        plans.extend(r.plan);
    }
    let csv = summary_csv(&rows, args.out.timing)?;
    emit(&args.out, SuiteOutput { csv, rows, records, plans })
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Plan(args) => {
            let p = plan(&args)?;
            if args.table {
                println!("{}", plan_table(&p));
            } else {
                println!("{}", serde_json::to_string_pretty(&p)?);
            }
        }
        Command::Run(args) => run(args)?,
        Command::Suite(args) => {
            let text = fs::read_to_string(&args.path)?;
            let result = run_suite_text(&text, args.out.seed, execution(args.out.sequential), args.out.timing)?;
            emit(&args.out, result)?;
        }
        Command::Audit(args) => {
            let g = parse_graph_spec(&args.graph)?;
            let p = parse_dist_spec(&args.dist)?;
            let audit = moment_audit(&g, &p, args.trials, args.seed, execution(args.sequential))?;
            println!("{}", serde_json::to_string_pretty(&audit)?);
        }
        Command::Counterexample(args) => {
            let c = appendix_counterexample(args.n, args.eps, args.b)?;
            let g_cond3: Vec<_> = c
                .g_reports
                .iter()
                .map(|r| json!({"tau": r.tau, "cond3_actual": r.cond3.actual, "cond3_required": r.cond3.required, "overall": r.overall}))
                .collect();
            let report = json!({
                "h": c.h.stats(),
                "g": c.g.stats(),
                "h_report": c.h_report,
                "g_certified_anywhere": c.g_reports.iter().any(|r| r.overall),
                "g_ratio": c.g_ratio,
                "g_reports": g_cond3,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_capacity() { 2 } else { 1 })
        }
    }
}
