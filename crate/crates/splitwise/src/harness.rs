//! Audit battery and experiment sweeps shared by the CLI and the acceptance
//! tests.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    chain_decomposition, chain_mssc_audit, classify_vertices, entropy_audit, heavy_path_audit, imbalanced_audit,
    structure_audit, theorem1_bound, uniform_binary_bound,
};
use crate::error::{Error, Result};
use crate::exact::ExactSolver;
use crate::format::{write_instance_text, write_mssc_text};
use crate::fulltree::{audit_trace, full_tree, full_tree_with_deadline, own_ratio_bound, FullTreeConfig};
use crate::generate::{gen_grid_adversarial, gen_random, gen_setcover_reduction, GridOptions, WeightProfile};
use crate::greedy::{build_greedy_tree, greediness_violation, greedy_choice, monotonicity_violation};
use crate::hypset::HypothesisSet;
use crate::instance::ExactInstance;
use crate::mssc::{mssc_cost, mssc_greedy, mssc_optimal, MsscInstance};
use crate::num::{render, Rational, Value};
use crate::report::AuditLine;
use crate::rounding::rounding_gap_extremes;
use crate::setcover::{greedy_cover_factor, optimal_cover_size, weighted_greedy_cover};
use crate::tree::DecisionTree;

/// Audit families in the order they run.
pub const FAMILIES: &[&str] = &[
    "identity",
    "monotonicity",
    "theorem1",
    "structure",
    "entropy",
    "chains",
    "imbalanced",
    "heavy",
    "fulltree",
    "rounding",
    "mssc",
    "setcover",
    "generators",
];

/// The weight profile used for the `i`-th corpus instance.
pub fn profile_for(i: usize) -> WeightProfile {
    match i % 3 {
        0 => WeightProfile::Uniform,
        1 => WeightProfile::Skew,
        _ => WeightProfile::TwoTier { ratio: 4.0 },
    }
}

/// A named instance from the seeded corpus.
#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub id: String,
    pub profile: WeightProfile,
    pub instance: ExactInstance,
}

/// `count` seeded random instances with `n` in `n_range`, `m` in `m_range`,
/// `K` alternating 2 and 3, and profiles cycling uniform / skew / two-tier.
/// Sizes where no separating instance was found are skipped.
pub fn random_corpus(
    seed: u64,
    count: usize,
    n_range: (usize, usize),
    m_range: (usize, usize),
    profile: Option<WeightProfile>,
) -> Vec<CorpusItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count && i < count * 4 {
        let n = rng.gen_range(n_range.0..=n_range.1);
        let k = 2 + i % 2;
        // Enough tests that random answer vectors usually separate everything.
        let need = ((n as f64).ln() / (k as f64).ln()).ceil() as usize + 1;
        let m = rng.gen_range(m_range.0.max(need).min(m_range.1)..=m_range.1);
        let prof = profile.unwrap_or_else(|| profile_for(i));
        let sub_seed = rng.gen::<u64>();
        if let Ok(instance) = gen_random(n, m, k, sub_seed, prof) {
            out.push(CorpusItem { id: format!("r{}", out.len()), profile: prof, instance });
        }
        i += 1;
    }
    out
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub seed: u64,
    /// Random decision-tree instances in the battery.
    pub count: usize,
    pub min_n: usize,
    pub max_n: usize,
    /// Run only these families.
    pub only: Option<Vec<String>>,
    /// Corrupt one cached consistent set per greedy tree before the identity check.
    pub inject_fault: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { seed: 1, count: 30, min_n: 3, max_n: 8, only: None, inject_fault: false }
    }
}

impl AuditConfig {
    fn wants(&self, family: &str) -> bool {
        self.only.as_ref().is_none_or(|o| o.iter().any(|f| f == family))
    }
}

#[derive(Clone, Debug)]
pub struct AuditEntry {
    pub family: &'static str,
    pub instance: String,
    pub line: AuditLine,
}

/// What is needed to rerun a failed check by hand.
#[derive(Clone, Debug)]
pub struct Repro {
    pub family: &'static str,
    pub instance_id: String,
    pub check: String,
    pub instance_text: String,
    pub tree_text: Option<String>,
}

impl Repro {
    pub fn to_text(&self) -> String {
        let mut out = format!("# repro {} {} {}\n{}", self.family, self.instance_id, self.check, self.instance_text);
        if let Some(t) = &self.tree_text {
            out.push_str("# tree\n");
            out.push_str(t);
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub repros: Vec<Repro>,
}

impl AuditReport {
    pub fn passed(&self) -> usize {
        self.entries.iter().filter(|e| e.line.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.entries.len() - self.passed()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn family_failures(&self, family: &str) -> usize {
        self.entries.iter().filter(|e| e.family == family && !e.line.pass).count()
    }

    /// One line per check: `family instance check level pass|fail lhs rhs slack`.
    pub fn to_text(&self, float: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = if float { e.line.to_float_string() } else { e.line.to_string() };
            let _ = writeln!(out, "{} {} {}", e.family, e.instance, line);
        }
        out
    }

    /// Pass/fail counts per family, then the total.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for fam in FAMILIES {
            let total = self.entries.iter().filter(|e| e.family == *fam).count();
            if total > 0 {
                let bad = self.family_failures(fam);
                let _ = writeln!(out, "summary {fam} checks={total} passed={} failed={bad}", total - bad);
            }
        }
        let _ = writeln!(out, "summary total checks={} passed={} failed={}", self.entries.len(), self.passed(), self.failed());
        out
    }
}

struct Recorder<'a> {
    cfg: &'a AuditConfig,
    report: AuditReport,
}

impl Recorder<'_> {
    /// Records lines (or the error as a failing line) and a repro per failure.
    fn record(
        &mut self,
        family: &'static str,
        id: &str,
        lines: Result<Vec<AuditLine>>,
        instance_text: impl Fn() -> String,
        tree: Option<&DecisionTree>,
    ) {
        if !self.cfg.wants(family) {
            return;
        }
        let lines = lines.unwrap_or_else(|e| vec![AuditLine::flag(&format!("{family}_error"), None, false, e, "-")]);
        for line in lines {
            if !line.pass {
                self.report.repros.push(Repro {
                    family,
                    instance_id: id.to_string(),
                    check: line.check.clone(),
                    instance_text: instance_text(),
                    tree_text: tree.map(DecisionTree::to_text),
                });
            }
            self.report.entries.push(AuditEntry { family, instance: id.to_string(), line });
        }
    }
}

/// Swaps one hypothesis into a non-root interior set it does not belong to.
fn corrupt(tree: &mut DecisionTree) -> Result<bool> {
    let root = tree.root();
    let universe = tree.consistent_set(root)?.clone();
    let targets: Vec<usize> = tree.interior().filter(|&v| v != root).collect();
    for v in targets {
        let set = tree.consistent_set(v)?.clone();
        if let Some(h) = universe.difference(&set).first() {
            let mut bad = set;
            bad.insert(h);
            tree.overwrite_consistent_set(v, bad)?;
            return Ok(true);
        }
    }
    Ok(false)
}

/// Runs every requested family over the seeded corpus.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    if cfg.min_n < 2 || cfg.max_n < cfg.min_n {
        return Err(Error::InvalidParameter(format!("need 2 <= min_n <= max_n, got {}..{}", cfg.min_n, cfg.max_n)));
    }
    if let Some(only) = &cfg.only {
        if let Some(bad) = only.iter().find(|f| !FAMILIES.contains(&f.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown audit family `{bad}`")));
        }
    }
    let mut rec = Recorder { cfg, report: AuditReport::default() };
    for item in random_corpus(cfg.seed, cfg.count, (cfg.min_n, cfg.max_n), (3, 8), None) {
        audit_instance(&mut rec, &item)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5e7c_0fe5);
    for i in 0..cfg.count {
        let inst = random_mssc(&mut rng, 6, 6);
        let id = format!("m{i}");
        let text = || write_mssc_text(&inst);
        rec.record("mssc", &id, mssc_lines(&inst), text, None);
        rec.record("setcover", &id, setcover_lines(&inst), text, None);
    }
    rec.record("generators", "g", generator_lines(cfg.seed), || "-\n".to_string(), None);
    Ok(rec.report)
}

fn audit_instance(rec: &mut Recorder<'_>, item: &CorpusItem) -> Result<()> {
    let inst = &item.instance;
    let id = item.id.as_str();
    let text = || write_instance_text(inst);
    let full = inst.full_set();
    let greedy = build_greedy_tree(inst, &full)?;
    let c_g = greedy.cost(inst, &full)?.total;

    let mut checked = greedy.clone();
    if rec.cfg.inject_fault {
        corrupt(&mut checked)?;
    }
    let identity = checked
        .interior_weight_sum(inst)
        .map(|s| vec![AuditLine::eq("identity", None, &s, &c_g)]);
    rec.record("identity", id, identity, text, Some(&checked));

    let mono = monotonicity_violation(inst, &greedy).map(|v| {
        vec![AuditLine::flag("monotonicity", None, v.is_none(), v.map_or("-".to_string(), |(a, b)| format!("{a}->{b}")), "-")]
    });
    rec.record("monotonicity", id, mono, text, Some(&greedy));

    let mut solver = ExactSolver::new(inst);
    let opt_tree = solver.optimal_tree(&full)?;
    let c_opt = opt_tree.cost(inst, &full)?.total;
    let one = Rational::one();
    if c_opt > one {
        let c = c_opt.to_f64();
        let mut lines = vec![AuditLine::le_bound("theorem1", None, &c_g, theorem1_bound(inst.p_min().to_f64(), inst.p_max().to_f64(), c)?)];
        if inst.is_uniform() && inst.k() == 2 {
            lines.push(AuditLine::le_bound("theorem1_uniform_binary", None, &c_g, uniform_binary_bound(inst.n(), c)?));
        }
        rec.record("theorem1", id, Ok(lines), text, Some(&greedy));

        let delta = one.clone() / c_opt.clone();
        match classify_vertices(inst, &greedy, &delta) {
            Ok(cls) => {
                rec.record("structure", id, structure_audit(inst, &greedy, &cls), text, Some(&greedy));
                rec.record("entropy", id, Ok(vec![entropy_audit(inst, &cls)]), text, Some(&greedy));
                let chains = chain_decomposition(inst, &greedy, &cls)
                    .and_then(|dec| chain_mssc_audit(inst, &greedy, &cls, &dec, &c_opt));
                rec.record("chains", id, chains, text, Some(&greedy));
                rec.record("imbalanced", id, imbalanced_audit(inst, &greedy, &cls, &c_opt), text, Some(&greedy));
                rec.record("heavy", id, heavy_path_audit(inst, &greedy, &cls, &opt_tree), text, Some(&greedy));
            }
            Err(e) => rec.record("structure", id, Err(e), text, Some(&greedy)),
        }
    }

    let ft = FullTreeConfig::general(0.5, own_ratio_bound(inst))
        .and_then(|cfg| full_tree(inst, &cfg))
        .and_then(|(tree, trace)| audit_trace(&trace, inst, &tree, Some(&c_opt)));
    rec.record("fulltree", id, ft, text, None);
    if inst.is_uniform() {
        let ft = FullTreeConfig::uniform(0.5, 0.03)
            .and_then(|cfg| full_tree(inst, &cfg))
            .and_then(|(tree, trace)| audit_trace(&trace, inst, &tree, Some(&c_opt)));
        rec.record("fulltree", id, ft, text, None);
    }

    rec.record("rounding", id, rounding_lines(inst), text, None);
    Ok(())
}

/// Checks that need only an instance and a tree: replay of a repro file.
pub fn tree_lines(inst: &ExactInstance, tree: &DecisionTree) -> Vec<AuditLine> {
    let mut out = vec![AuditLine::flag(
        "tree_verify",
        None,
        tree.verify(inst).is_ok(),
        tree.verify(inst).err().map_or("ok".to_string(), |e| e.to_string()),
        "-",
    )];
    let full = inst.full_set();
    match (tree.interior_weight_sum(inst), tree.cost(inst, &full)) {
        (Ok(s), Ok(c)) => out.push(AuditLine::eq("identity", None, &s, &c.total)),
        (Err(e), _) | (_, Err(e)) => out.push(AuditLine::flag("identity", None, false, e, "-")),
    }
    if let Ok(v) = greediness_violation(inst, tree) {
        out.push(AuditLine::flag("greedy", None, v.is_none(), v.map_or("-".to_string(), |v| v.to_string()), "-"));
        if v.is_none() {
            if let Ok(m) = monotonicity_violation(inst, tree) {
                out.push(AuditLine::flag("monotonicity", None, m.is_none(), m.map_or("-".to_string(), |(a, b)| format!("{a}->{b}")), "-"));
            }
        }
    }
    out
}

/// min p' ≥ 1/(n(n−1)) and |C'(T) − C(T)| ≤ 1 over all trees of depth ≤ 4.
pub fn rounding_lines(inst: &ExactInstance) -> Result<Vec<AuditLine>> {
    let n = inst.n() as i64;
    let rounded = inst.round_weights()?;
    let floor = Rational::from_ratio(1, n * (n - 1));
    let (lo, hi) = rounding_gap_extremes(inst, &rounded, 4);
    let one = Rational::one();
    Ok(vec![
        AuditLine::le("rounding_min_weight", None, &floor, &rounded.p_min()),
        AuditLine::le("rounding_gap_max", None, &hi, &one),
        AuditLine::le("rounding_gap_min", None, &(Rational::zero() - lo), &one),
    ])
}

/// A coverable weighted instance with up to `max_size` elements and `max_sets` sets.
pub fn random_mssc(rng: &mut ChaCha8Rng, max_size: usize, max_sets: usize) -> MsscInstance<i128> {
    let size = rng.gen_range(1..=max_size);
    let count = rng.gen_range(1..=max_sets);
    let mut sets: Vec<HypothesisSet> = (0..count)
        .map(|_| HypothesisSet::from_indices(size, (0..size).filter(|_| rng.gen_bool(0.4))))
        .collect();
    // Patch uncovered elements into random sets.
    for e in 0..size {
        if !sets.iter().any(|s| s.contains(e)) {
            let i = rng.gen_range(0..count);
            sets[i].insert(e);
        }
    }
    let masses: Vec<i128> = (0..size).map(|_| rng.gen_range(1..=9)).collect();
    let den = masses.iter().sum();
    MsscInstance::new(HypothesisSet::full(size), masses, den, sets).expect("well-formed by construction")
}

pub fn mssc_lines(inst: &MsscInstance<i128>) -> Result<Vec<AuditLine>> {
    let g = mssc_cost(inst, &mssc_greedy(inst)?)?;
    let o = mssc_cost(inst, &mssc_optimal(inst)?)?;
    Ok(vec![
        AuditLine::le("mssc_greedy_4x", None, &g.value(), &(Rational::from_int(4) * o.value())),
        AuditLine::flag("mssc_cost_formulas", None, g.formulas_agree() && o.formulas_agree(), "agree", "-"),
    ])
}

pub fn setcover_lines(inst: &MsscInstance<i128>) -> Result<Vec<AuditLine>> {
    let picks = weighted_greedy_cover(inst)?.len();
    let opt = optimal_cover_size(inst)?;
    let Some(factor) = greedy_cover_factor(inst) else {
        return Ok(Vec::new());
    };
    Ok(vec![AuditLine::le_bound(
        "setcover_greedy",
        None,
        &Rational::from_int(picks as i64),
        factor * opt as f64,
    )])
}

fn generator_lines(seed: u64) -> Result<Vec<AuditLine>> {
    let g = gen_grid_adversarial(16, 4, GridOptions::default())?;
    let root = greedy_choice(&g.instance, &g.instance.full_set())?;
    let mut lines = vec![
        AuditLine::flag("grid_valid", None, g.instance.validate().ok(), "n=16", "c=4"),
        AuditLine::flag("grid_root_type4", None, g.kinds[root].type_number() == 4, g.kinds[root].type_number(), 4),
    ];
    let sets = [HypothesisSet::from_indices(2, [0, 1])];
    let red = gen_setcover_reduction(2, &sets, 0.4)?;
    let total = red.instance.total_weight();
    lines.push(AuditLine::eq("reduction_weight_sum", None, &total, &Rational::one()));
    let ratio = red.instance.weight_ratio().unwrap_or_else(Rational::zero);
    let expected = Rational::one() + Rational::from_ratio(red.n as i64, red.ell as i64);
    lines.push(AuditLine::eq("reduction_ratio", None, &ratio, &expected));
    let r = gen_random(8, 6, 2, seed, WeightProfile::Skew)?;
    let again = gen_random(8, 6, 2, seed, WeightProfile::Skew)?;
    lines.push(AuditLine::flag("random_valid", None, r.validate().ok(), "n=8", "-"));
    lines.push(AuditLine::flag("random_deterministic", None, r == again, "seeded", "-"));
    Ok(lines)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Greedy,
    FullTree,
    FullTreeUniform,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Greedy => "greedy",
            Algo::FullTree => "fulltree",
            Algo::FullTreeUniform => "fulltree-uniform",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Sweep {
    /// Adversarial grid instances; the baseline is the bound 4·c_star.
    Grid { ns: Vec<usize>, c_star: usize },
    /// Seeded random instances with exact baselines.
    Random { ns: Vec<usize>, m: usize, k: usize, per_size: usize, profile: WeightProfile },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub sweep: Sweep,
    pub algos: Vec<Algo>,
    pub seed: u64,
    pub alpha: f64,
    pub epsilon: f64,
    /// Per-row solver time cap.
    pub budget_ms: Option<u64>,
    pub timing: bool,
    pub float: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub r: String,
    pub algo: &'static str,
    pub cost: String,
    pub baseline: String,
    pub ratio: String,
    pub bound_value: String,
    pub runtime_ms: Option<u128>,
    pub status: &'static str,
}

pub const CSV_HEADER: &str = "instance_id,n,m,K,R,algo,cost,exact_or_bound,ratio,bound_value,runtime_ms,status";

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    match &cfg.sweep {
        Sweep::Grid { ns, c_star } => {
            for &n in ns {
                let g = gen_grid_adversarial(n, *c_star, GridOptions { allow_small_c_star: true })?;
                let baseline = Rational::from_int(4 * *c_star as i64);
                for &algo in &cfg.algos {
                    rows.push(solve_row(cfg, &format!("grid-n{n}-c{c_star}"), &g.instance, algo, Baseline::Bound(baseline.clone())));
                }
            }
        }
        Sweep::Random { ns, m, k, per_size, profile } => {
            for &n in ns {
                for i in 0..*per_size {
                    let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add((n * 10_007 + i) as u64);
                    let inst = gen_random(n, *m, *k, seed, *profile)?;
                    let id = format!("{}-n{n}-{i}", profile.name());
                    let start = Instant::now();
                    let deadline = cfg.budget_ms.map(|ms| start + std::time::Duration::from_millis(ms));
                    let exact = ExactSolver::new(&inst).with_deadline(deadline).optimal_cost(&inst.full_set());
                    let baseline = match exact {
                        Ok(c) => Baseline::Exact(c),
                        Err(Error::BudgetExceeded { .. }) => Baseline::Skipped,
                        Err(e) => return Err(e),
                    };
                    for &algo in &cfg.algos {
                        rows.push(solve_row(cfg, &id, &inst, algo, baseline.clone()));
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| (a.n, &a.instance_id, a.algo).cmp(&(b.n, &b.instance_id, b.algo)));
    Ok(rows)
}

#[derive(Clone, Debug)]
enum Baseline {
    Exact(Rational),
    Bound(Rational),
    Skipped,
}

fn solve_row(cfg: &ExperimentConfig, id: &str, inst: &ExactInstance, algo: Algo, baseline: Baseline) -> Row {
    let start = Instant::now();
    let deadline = cfg.budget_ms.map(|ms| start + std::time::Duration::from_millis(ms));
    let ratio_bound = own_ratio_bound(inst);
    let full = inst.full_set();
    let built: Result<(DecisionTree, Option<f64>)> = match algo {
        Algo::Greedy => build_greedy_tree(inst, &full).map(|t| (t, None)),
        Algo::FullTree => FullTreeConfig::general(cfg.alpha, ratio_bound).and_then(|c| {
            full_tree_with_deadline(inst, &c, deadline).map(|(t, _)| (t, Some(c.approximation_bound())))
        }),
        Algo::FullTreeUniform => FullTreeConfig::uniform(cfg.alpha, cfg.epsilon).and_then(|c| {
            full_tree_with_deadline(inst, &c, deadline).map(|(t, _)| (t, Some(c.approximation_bound())))
        }),
    };
    let elapsed = start.elapsed().as_millis();
    let show = |v: &Rational| render(v, cfg.float);
    let mut row = Row {
        instance_id: id.to_string(),
        n: inst.n(),
        m: inst.m(),
        k: inst.k(),
        r: inst.weight_ratio().map_or("-".to_string(), |r| show(&r)),
        algo: algo.name(),
        cost: "-".into(),
        baseline: "-".into(),
        ratio: "-".into(),
        bound_value: "-".into(),
        runtime_ms: cfg.timing.then_some(elapsed),
        status: "ok",
    };
    let (tree, factor) = match built {
        Ok(x) => x,
        Err(Error::BudgetExceeded { .. }) => {
            row.status = "skipped";
            return row;
        }
        Err(_) => {
            row.status = "error";
            return row;
        }
    };
    let cost = match tree.cost(inst, &full) {
        Ok(c) => c.total,
        Err(_) => {
            row.status = "error";
            return row;
        }
    };
    row.cost = show(&cost);
    match baseline {
        Baseline::Exact(c) => {
            row.baseline = format!("exact:{}", show(&c));
            if c != Rational::zero() {
                row.ratio = show(&(cost / c.clone()));
            }
            let bound = match factor {
                Some(f) => Some(f * c.to_f64()),
                None => theorem1_bound(inst.p_min().to_f64(), inst.p_max().to_f64(), c.to_f64()).ok(),
            };
            if let Some(b) = bound {
                row.bound_value = format!("{b:.6}");
            }
        }
        Baseline::Bound(b) => {
            row.baseline = format!("bound:{}", show(&b));
            row.ratio = show(&(cost / b));
        }
        Baseline::Skipped => row.status = "skipped",
    }
    row
}

/// The CSV text; header only when there are no rows.
pub fn write_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.instance_id,
            r.n,
            r.m,
            r.k,
            r.r,
            r.algo,
            r.cost,
            r.baseline,
            r.ratio,
            r.bound_value,
            r.runtime_ms.map_or("-".to_string(), |t| t.to_string()),
            r.status
        );
    }
    out
}
