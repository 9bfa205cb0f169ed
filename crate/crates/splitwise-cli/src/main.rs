use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use splitwise::exact::ExactSolver;
use splitwise::format::{parse_instance, parse_mssc_text, write_instance_json, write_instance_text};
use splitwise::fulltree::{audit_trace, full_tree_with_deadline, own_ratio_bound, FullTreeConfig};
use splitwise::generate::{gen_grid_adversarial, gen_random, gen_setcover_reduction, GridOptions, WeightProfile};
use splitwise::greedy::build_greedy_tree;
use splitwise::harness::{self, Algo, AuditConfig, ExperimentConfig, Sweep};
use splitwise::mssc::{mssc_cost, mssc_greedy, mssc_optimal};
use splitwise::num::render;
use splitwise::setcover::{greedy_cover_factor, optimal_cover_size, weighted_greedy_cover};
use splitwise::{DecisionTree, Error, ExactInstance, HypothesisSet, Rational, Value};

const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_AUDIT: u8 = 4;

#[derive(Parser)]
#[command(name = "splitwise", version, about = "Decision-tree solvers, audits, and experiment sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tree for an instance file and report its cost.
    Solve(SolveArgs),
    /// Run the audit battery over seeded instances.
    Audit(AuditArgs),
    /// Re-run the tree checks on a repro file written by `audit`.
    Replay { file: PathBuf },
    /// Sweep a generator family and write a CSV.
    Experiment(ExperimentArgs),
    /// Write a generated instance.
    Gen(GenArgs),
    /// Solve a min-sum set cover instance (or set cover with `--cover`).
    Mssc {
        file: PathBuf,
        #[arg(long)]
        cover: bool,
        #[arg(long)]
        float: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveAlgo {
    Greedy,
    Exact,
    Partial,
    Fulltree,
    FulltreeUniform,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    algo: SolveAlgo,
    /// Depth budget b for `partial` (and an optional cap for `exact`).
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.03)]
    eps: f64,
    /// R for general FullTree; defaults to the instance's own p_max/p_min.
    #[arg(long)]
    ratio_bound: Option<f64>,
    #[arg(long)]
    float: bool,
    /// Tree output path; FullTree also writes `<out>.trace`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the tree as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    min_n: usize,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    /// Comma-separated audit families to run.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Corrupt each greedy tree before the identity check (negative control).
    #[arg(long)]
    inject_fault: bool,
    #[arg(long)]
    float: bool,
    /// Also write the report here; repros go to `<out>.repro`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Grid,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Uniform,
    Skew,
    TwoTier,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    family: Family,
    /// Instance sizes; none gives a header-only CSV.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    c_star: usize,
    #[arg(long, default_value_t = 6)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    per_size: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    profile: Profile,
    #[arg(long, default_value_t = 4.0)]
    ratio: f64,
    #[arg(long, value_delimiter = ',', default_value = "greedy")]
    algo: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.03)]
    eps: f64,
    /// Fill the runtime_ms column (otherwise `-`, keeping output reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    float: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    Grid {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c_star: usize,
        #[arg(long)]
        allow_small_c_star: bool,
    },
    Reduction {
        #[arg(long)]
        n0: usize,
        /// Sets as 1-based members, sets separated by `;`, e.g. "1 2;2 3".
        #[arg(long)]
        sets: String,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        profile: Profile,
        #[arg(long, default_value_t = 4.0)]
        ratio: f64,
    },
}

/// Failures carrying their exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INVALID,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, msg: msg.into() }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Solve(a) => solve(a),
        Command::Audit(a) => audit(a),
        Command::Replay { file } => replay(&file),
        Command::Experiment(a) => experiment(a),
        Command::Gen(a) => generate(a),
        Command::Mssc { file, cover, float } => mssc(&file, cover, float),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn budget_ms() -> Result<Option<u64>, Failure> {
    match std::env::var("SPLITWISE_BUDGET_MS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| invalid(format!("SPLITWISE_BUDGET_MS must be an integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Parses and validates; the validation report goes to stderr on failure.
fn load_instance(path: &Path) -> Result<ExactInstance, Failure> {
    let inst: ExactInstance = parse_instance(&read(path)?)?.build()?;
    let report = inst.validate();
    if !report.ok() {
        eprintln!("{report}");
        return Err(invalid("instance does not separate every pair of hypotheses"));
    }
    Ok(inst)
}

fn solve(a: SolveArgs) -> CliResult {
    let inst = load_instance(&a.file)?;
    let deadline = budget_ms()?.map(|ms| Instant::now() + Duration::from_millis(ms));
    let full = inst.full_set();
    let show = |v: &Rational| render(v, a.float);
    let mut trace_text = None;
    let tree = match a.algo {
        SolveAlgo::Greedy => {
            let t = build_greedy_tree(&inst, &full)?;
            println!("C_G={}", show(&t.cost(&inst, &full)?.total));
            t
        }
        SolveAlgo::Exact | SolveAlgo::Partial => {
            let b = match (a.algo, a.max_depth) {
                (SolveAlgo::Partial, None) => return Err(invalid("--algo partial needs --max-depth")),
                (_, b) => b.unwrap_or(inst.n().saturating_sub(1)),
            };
            let mut solver = ExactSolver::new(&inst).with_deadline(deadline);
            let t = solver.partial_tree(&full, b)?;
            let c = t.cost(&inst, &full)?.total;
            if matches!(a.algo, SolveAlgo::Exact) && t.is_complete(&inst, &full, None) {
                println!("C_OPT={}", show(&c));
            } else {
                println!("C_OPT(b={b})={}", show(&c));
            }
            println!("expansions={} memo={}", solver.expansions(), solver.memo_entries());
            t
        }
        SolveAlgo::Fulltree | SolveAlgo::FulltreeUniform => {
            let cfg = if matches!(a.algo, SolveAlgo::Fulltree) {
                FullTreeConfig::general(a.alpha, a.ratio_bound.unwrap_or_else(|| own_ratio_bound(&inst)))?
            } else {
                FullTreeConfig::uniform(a.alpha, a.eps)?
            };
            let (t, trace) = full_tree_with_deadline(&inst, &cfg, deadline)?;
            let c = t.cost(&inst, &full)?.total;
            println!("C_FT={}", show(&c));
            println!("b={} b_used={} levels={}", trace.b, trace.b_used, trace.max_level() + 1);
            // The exact baseline is only attempted where the search is cheap.
            let c_opt = if inst.n() <= 12 {
                Some(ExactSolver::new(&inst).with_deadline(deadline).optimal_cost(&full)?)
            } else {
                None
            };
            if let Some(opt) = &c_opt {
                let bound = cfg.approximation_bound() * opt.to_f64();
                println!("C_OPT={}", show(opt));
                println!("bound={bound:.6} within={}", c <= Rational::from_f64(bound));
            }
            let audit = audit_trace(&trace, &inst, &t, c_opt.as_ref())?;
            let failed = audit.iter().filter(|l| !l.pass).count();
            println!("trace_checks={} failed={failed}", audit.len());
            trace_text = Some(trace.to_text());
            t
        }
    };
    if let Some(out) = &a.out {
        write(out, &if a.json { tree.to_json() } else { tree.to_text() })?;
        if let Some(t) = &trace_text {
            write(&with_suffix(out, "trace"), t)?;
        }
    }
    Ok(0)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn audit(a: AuditArgs) -> CliResult {
    let cfg = AuditConfig {
        seed: a.seed,
        count: a.count,
        min_n: a.min_n,
        max_n: a.max_n,
        only: (!a.only.is_empty()).then_some(a.only),
        inject_fault: a.inject_fault,
    };
    let report = harness::run_audit(&cfg)?;
    let text = report.to_text(a.float) + &report.summary();
    print!("{text}");
    let repros: String = report.repros.iter().map(|r| r.to_text()).collect::<Vec<_>>().join("\n");
    if let Some(out) = &a.out {
        write(out, &text)?;
        if !report.repros.is_empty() {
            write(&with_suffix(out, "repro"), &repros)?;
        }
    }
    if report.ok() {
        Ok(0)
    } else {
        if let Some(first) = report.repros.first() {
            eprintln!("{} failing checks; first repro:\n{}", report.failed(), first.to_text());
        }
        Ok(EXIT_AUDIT)
    }
}

/// Splits a repro into its instance and tree parts and re-runs the checks
/// that need only those two.
fn replay(path: &Path) -> CliResult {
    let text = read(path)?;
    let first = text.split("\n# repro").next().unwrap_or(&text);
    let (inst_part, tree_part) = first
        .split_once("# tree\n")
        .ok_or_else(|| invalid("repro has no `# tree` section"))?;
    let inst: ExactInstance = parse_instance(inst_part)?.build()?;
    let tree = DecisionTree::from_text(tree_part)?;
    let lines = harness::tree_lines(&inst, &tree);
    for l in &lines {
        println!("{l}");
    }
    Ok(if lines.iter().all(|l| l.pass) { 0 } else { EXIT_AUDIT })
}

fn profile(p: Profile, ratio: f64) -> WeightProfile {
    match p {
        Profile::Uniform => WeightProfile::Uniform,
        Profile::Skew => WeightProfile::Skew,
        Profile::TwoTier => WeightProfile::TwoTier { ratio },
    }
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let algos = a
        .algo
        .iter()
        .map(|s| match s.as_str() {
            "greedy" => Ok(Algo::Greedy),
            "fulltree" => Ok(Algo::FullTree),
            "fulltree-uniform" => Ok(Algo::FullTreeUniform),
            other => Err(invalid(format!("unknown algo `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = match a.family {
        Family::Grid => Sweep::Grid { ns: a.ns, c_star: a.c_star },
        Family::Random => Sweep::Random {
            ns: a.ns,
            m: a.m,
            k: a.k,
            per_size: a.per_size,
            profile: profile(a.profile, a.ratio),
        },
    };
    let cfg = ExperimentConfig {
        sweep,
        algos,
        seed: a.seed,
        alpha: a.alpha,
        epsilon: a.eps,
        budget_ms: budget_ms()?,
        timing: a.timing,
        float: a.float,
    };
    let csv = harness::write_csv(&harness::run_experiment(&cfg)?);
    match &a.out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn parse_sets(n0: usize, spec: &str) -> Result<Vec<HypothesisSet>, Failure> {
    spec.split(';')
        .map(|part| {
            let members = part
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(e) if (1..=n0).contains(&e) => Ok(e - 1),
                    _ => Err(invalid(format!("set member `{t}` outside 1..{n0}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(HypothesisSet::from_indices(n0, members))
        })
        .collect()
}

fn generate(a: GenArgs) -> CliResult {
    let inst = match a.kind {
        GenKind::Grid { n, c_star, allow_small_c_star } => {
            gen_grid_adversarial(n, c_star, GridOptions { allow_small_c_star })?.instance
        }
        GenKind::Reduction { n0, sets, r } => {
            let red = gen_setcover_reduction(n0, &parse_sets(n0, &sets)?, r)?;
            eprintln!("q={} ell={} n={} ratio={}", red.q, red.ell, red.n, red.ratio);
            red.instance
        }
        GenKind::Random { n, m, k, seed, profile: p, ratio } => gen_random(n, m, k, seed, profile(p, ratio))?,
    };
    let text = if a.json { write_instance_json(&inst) + "\n" } else { write_instance_text(&inst) };
    match &a.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn mssc(path: &Path, cover: bool, float: bool) -> CliResult {
    let inst = parse_mssc_text::<i128>(&read(path)?)?;
    let one_based = |order: &[usize]| order.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
    if cover {
        let picks = weighted_greedy_cover(&inst)?;
        println!("greedy_cover={}", one_based(&picks));
        println!("greedy_size={}", picks.len());
        println!("optimal_size={}", optimal_cover_size(&inst)?);
        if let Some(f) = greedy_cover_factor(&inst) {
            println!("factor={f:.6}");
        }
    } else {
        let g = mssc_greedy(&inst)?;
        println!("greedy_order={}", one_based(&g.order));
        println!("greedy_cost={}", render(&mssc_cost(&inst, &g)?.value(), float));
        let o = mssc_optimal(&inst)?;
        println!("optimal_order={}", one_based(&o.order));
        println!("optimal_cost={}", render(&mssc_cost(&inst, &o)?.value(), float));
    }
    Ok(0)
}
