//! The `FullTree` approximation: greedy where greedy is already cheap,
//! exhaustive depth-`b` search elsewhere, recursing below the search frontier.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exact::ExactSolver;
use crate::greedy::build_greedy_tree;
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::{Mass, Value};
use crate::report::AuditLine;
use crate::tree::DecisionTree;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// Arbitrary weights with p_max/p_min bounded by the configured ratio.
    General,
    /// Uniform weights; below `n0` hypotheses the greedy step is replaced by an
    /// exact solve.
    Uniform { epsilon: f64, n0: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullTreeConfig {
    pub alpha: f64,
    pub ratio_bound: f64,
    pub mode: Mode,
    /// Replaces the formula for `b` (diagnostics only; the guarantee assumes
    /// the formula).
    pub depth_override: Option<usize>,
}

pub const DEFAULT_N0: usize = 12;

impl FullTreeConfig {
    pub fn general(alpha: f64, ratio_bound: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(ratio_bound >= 1.0 && ratio_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("R = {ratio_bound} must be at least 1")));
        }
        Ok(Self {
            alpha,
            ratio_bound,
            mode: Mode::General,
            depth_override: None,
        })
    }

    pub fn uniform(alpha: f64, epsilon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
        }
        Ok(Self {
            alpha,
            ratio_bound: 1.0,
            mode: Mode::Uniform { epsilon, n0: DEFAULT_N0 },
            depth_override: None,
        })
    }

    pub fn with_n0(mut self, n0: usize) -> Self {
        if let Mode::Uniform { epsilon, .. } = self.mode {
            self.mode = Mode::Uniform { epsilon, n0 };
        }
        self
    }

    pub fn with_depth(mut self, b: usize) -> Self {
        self.depth_override = Some(b);
        self
    }

    /// The search depth `b` for an instance with `n` hypotheses, before capping.
    pub fn depth_budget(&self, n: usize) -> usize {
        if let Some(b) = self.depth_override {
            return b;
        }
        let nf = n as f64;
        let raw = match self.mode {
            Mode::General => (12.0 * nf.log2() + self.ratio_bound.log2()) * nf.powf(self.alpha),
            Mode::Uniform { epsilon, .. } => (4.0 + 2.0 * epsilon / 3.0) * nf.log2() * nf.powf(self.alpha),
        };
        raw.ceil().max(0.0) as usize
    }

    /// Per-level weight contraction factor, also the threshold multiplier.
    pub fn contraction(&self, n: usize) -> f64 {
        let e = match self.mode {
            Mode::General => self.alpha / 4.0,
            Mode::Uniform { .. } => self.alpha / 3.0,
        };
        (n as f64).powf(-e)
    }

    /// Greedy is kept when its cost reaches this value.
    pub fn threshold(&self, n: usize) -> f64 {
        self.contraction(n) * self.depth_budget(n) as f64
    }

    pub fn recursion_depth_bound(&self) -> usize {
        match self.mode {
            Mode::General => (8.0 / self.alpha).ceil() as usize,
            Mode::Uniform { .. } => (3.0 / self.alpha).ceil() as usize,
        }
    }

    /// Guaranteed approximation factor against C_OPT.
    pub fn approximation_bound(&self) -> f64 {
        match self.mode {
            Mode::General => 25.0 / self.alpha + self.ratio_bound.log2(),
            Mode::Uniform { epsilon, .. } => (9.0 + epsilon) / self.alpha,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0,1)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// p(H) < 1/n².
    GreedyLight,
    /// Greedy cost reached the threshold.
    GreedyThreshold,
    /// Exhaustive depth-`b` search, recursing below its frontier.
    Partial,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::GreedyLight => "greedy-light",
            Decision::GreedyThreshold => "greedy-threshold",
            Decision::Partial => "partial",
        }
    }

    pub fn is_greedy(self) -> bool {
        self != Decision::Partial
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CallRecord<V> {
    pub level: usize,
    pub set: HypothesisSet,
    /// p(H).
    pub weight: V,
    pub decision: Decision,
    /// Cost of the (modified) greedy tree on H.
    pub greedy_cost: V,
    /// C_OPT(H, b) for partial calls.
    pub partial_cost: Option<V>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionTrace<V> {
    pub config: FullTreeConfig,
    pub n: usize,
    /// `b` from the formula (or override).
    pub b: usize,
    /// Depth actually searched: `b` capped at n-1.
    pub b_used: usize,
    pub threshold: f64,
    /// Sorted by (level, smallest hypothesis).
    pub records: Vec<CallRecord<V>>,
    pub expansions: u64,
}

impl<V: Value> RecursionTrace<V> {
    /// F_i: sets expanded by exhaustive search at level `i`.
    pub fn family(&self, level: usize) -> Vec<&CallRecord<V>> {
        self.records
            .iter()
            .filter(|r| r.level == level && r.decision == Decision::Partial)
            .collect()
    }

    /// F_greedy: sets answered by the greedy tree, at any level.
    pub fn greedy_family(&self) -> Vec<&CallRecord<V>> {
        self.records.iter().filter(|r| r.decision.is_greedy()).collect()
    }

    pub fn max_level(&self) -> usize {
        self.records.iter().map(|r| r.level).max().unwrap_or(0)
    }

    /// One line per call.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "trace n={} b={} b_used={} threshold={} calls={}",
            self.n,
            self.b,
            self.b_used,
            self.threshold,
            self.records.len()
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "call level={} decision={} p={} C_G={} C_OPT_b={} H={}",
                r.level,
                r.decision.name(),
                r.weight,
                r.greedy_cost,
                r.partial_cost.as_ref().map_or("-".to_string(), |c| c.to_string()),
                r.set.display_one_based()
            );
        }
        out
    }
}

/// The smallest double at or above the instance's p_max/p_min, so that the
/// instance passes its own ratio check.
pub fn own_ratio_bound<M: Mass>(inst: &DTInstance<M>) -> f64 {
    let Some(r) = inst.weight_ratio() else { return f64::INFINITY };
    let f = r.to_f64().max(1.0);
    if M::Value::from_f64(f) < r {
        f64::from_bits(f.to_bits() + 1)
    } else {
        f
    }
}

/// Runs `FullTree` in the mode chosen by `cfg`.
pub fn full_tree<M: Mass>(inst: &DTInstance<M>, cfg: &FullTreeConfig) -> Result<(DecisionTree, RecursionTrace<M::Value>)> {
    run(inst, cfg, None)
}

/// Uniform-weight variant; `cfg` must be in uniform mode.
pub fn full_tree_uniform<M: Mass>(
    inst: &DTInstance<M>,
    cfg: &FullTreeConfig,
) -> Result<(DecisionTree, RecursionTrace<M::Value>)> {
    if cfg.mode == Mode::General {
        return Err(Error::InvalidParameter("uniform variant needs a uniform-mode config".into()));
    }
    run(inst, cfg, None)
}

/// Like [`full_tree`], but the exhaustive searches give up at `deadline`.
pub fn full_tree_with_deadline<M: Mass>(
    inst: &DTInstance<M>,
    cfg: &FullTreeConfig,
    deadline: Option<Instant>,
) -> Result<(DecisionTree, RecursionTrace<M::Value>)> {
    run(inst, cfg, deadline)
}

fn run<M: Mass>(
    inst: &DTInstance<M>,
    cfg: &FullTreeConfig,
    deadline: Option<Instant>,
) -> Result<(DecisionTree, RecursionTrace<M::Value>)> {
    match cfg.mode {
        Mode::General => {
            let ratio = inst.weight_ratio().map_or(f64::INFINITY, |r| r.to_f64());
            let within = match inst.weight_ratio() {
                Some(r) => r <= M::Value::from_f64(cfg.ratio_bound),
                None => false,
            };
            if !within {
                return Err(Error::RatioViolated { ratio, bound: cfg.ratio_bound });
            }
        }
        Mode::Uniform { .. } => {
            if !inst.is_uniform() {
                return Err(Error::NotUniform);
            }
        }
    }
    let n = inst.n();
    let b = cfg.depth_budget(n);
    let mut state = Run {
        inst,
        cfg,
        b_used: b.min(n.saturating_sub(1)),
        threshold: cfg.threshold(n),
        light: M::Value::from_ratio(1, (n * n) as i64),
        solver: ExactSolver::new(inst).with_deadline(deadline),
        records: Vec::new(),
    };
    let tree = state.call(&inst.full_set(), 0)?;
    let mut records = state.records;
    records.sort_by(|a, b| a.level.cmp(&b.level).then(a.set.first().cmp(&b.set.first())));
    let trace = RecursionTrace {
        config: *cfg,
        n,
        b,
        b_used: state.b_used,
        threshold: state.threshold,
        records,
        expansions: state.solver.expansions(),
    };
    Ok((tree, trace))
}

struct Run<'a, M: Mass> {
    inst: &'a DTInstance<M>,
    cfg: &'a FullTreeConfig,
    b_used: usize,
    threshold: f64,
    light: M::Value,
    solver: ExactSolver<'a, M>,
    records: Vec<CallRecord<M::Value>>,
}

impl<M: Mass> Run<'_, M> {
    fn greedy(&mut self, set: &HypothesisSet) -> Result<DecisionTree> {
        match self.cfg.mode {
            Mode::Uniform { n0, .. } if set.len() < n0 => self.solver.optimal_tree(set),
            _ => build_greedy_tree(self.inst, set),
        }
    }

    fn call(&mut self, set: &HypothesisSet, level: usize) -> Result<DecisionTree> {
        let greedy = self.greedy(set)?;
        let greedy_cost = greedy.cost(self.inst, set)?.total;
        let weight = self.inst.weight_of(set);
        let mut record = CallRecord {
            level,
            set: set.clone(),
            weight: weight.clone(),
            decision: Decision::GreedyLight,
            greedy_cost: greedy_cost.clone(),
            partial_cost: None,
        };
        if weight < self.light {
            self.records.push(record);
            return Ok(greedy);
        }
        if greedy_cost >= M::Value::from_f64(self.threshold) {
            record.decision = Decision::GreedyThreshold;
            self.records.push(record);
            return Ok(greedy);
        }
        let mut tree = self.solver.partial_tree(set, self.b_used)?;
        record.decision = Decision::Partial;
        record.partial_cost = Some(tree.cost(self.inst, set)?.total);
        self.records.push(record);
        let frontier: Vec<_> = tree
            .leaves()
            .filter(|&v| tree.depth(v) == self.b_used && tree.nodes()[v].consistent().len() > 1)
            .collect();
        for v in frontier {
            let sub_set = tree.consistent_set(v)?.clone();
            let sub = self.call(&sub_set, level + 1)?;
            tree.attach(v, &sub)?;
        }
        Ok(tree)
    }
}

/// Structural and quantitative checks on a completed run. `c_opt` enables the
/// checks that need the optimum.
pub fn audit_trace<M: Mass>(
    trace: &RecursionTrace<M::Value>,
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    c_opt: Option<&M::Value>,
) -> Result<Vec<AuditLine>> {
    type V<M> = <M as Mass>::Value;
    let cfg = &trace.config;
    let mut lines = Vec::new();
    let full = inst.full_set();
    lines.push(AuditLine::flag(
        "fulltree_complete",
        None,
        tree.is_complete(inst, &full, None) && tree.verify(inst).is_ok(),
        "complete",
        "required",
    ));
    lines.push(AuditLine::le(
        "fulltree_recursion_depth",
        None,
        &V::<M>::from_int(trace.max_level() as i64),
        &V::<M>::from_int(cfg.recursion_depth_bound() as i64),
    ));

    let mut decomposition = V::<M>::zero();
    for r in &trace.records {
        let c = match r.decision {
            Decision::Partial => r.partial_cost.clone().expect("partial calls record a cost"),
            _ => r.greedy_cost.clone(),
        };
        decomposition = decomposition + r.weight.clone() * c;
    }
    let cost = tree.cost(inst, &full)?;
    let out = cost.total.clone() * cost.normalizer.clone();
    lines.push(AuditLine::eq("fulltree_decomposition", None, &decomposition, &out));

    let levels = trace.max_level();
    for i in 0..=levels {
        let fam = trace.family(i);
        lines.push(AuditLine::flag("fulltree_disjoint", Some(i), pairwise_disjoint(&fam), fam.len(), "disjoint"));
    }
    let greedy = trace.greedy_family();
    lines.push(AuditLine::flag("fulltree_disjoint_greedy", None, pairwise_disjoint(&greedy), greedy.len(), "disjoint"));

    let factor = cfg.contraction(trace.n);
    for i in 0..levels {
        let here: V<M> = trace.family(i).iter().fold(V::<M>::zero(), |a, r| a + r.weight.clone());
        let next: V<M> = trace.family(i + 1).iter().fold(V::<M>::zero(), |a, r| a + r.weight.clone());
        let bound = here.to_f64() * factor;
        let rhs = if V::<M>::is_exact() {
            here * V::<M>::from_f64(factor)
        } else {
            V::<M>::from_f64(bound)
        };
        lines.push(AuditLine::le("fulltree_contraction", Some(i + 1), &next, &rhs));
    }

    if let Some(opt) = c_opt {
        for i in 0..=levels {
            let sum = trace.family(i).iter().fold(V::<M>::zero(), |a, r| {
                a + r.weight.clone() * r.partial_cost.clone().expect("partial")
            });
            lines.push(AuditLine::le("fulltree_level_sum", Some(i), &sum, opt));
        }
        let bound = cfg.approximation_bound();
        let rhs = if V::<M>::is_exact() {
            opt.clone() * V::<M>::from_f64(bound)
        } else {
            V::<M>::from_f64(opt.to_f64() * bound)
        };
        lines.push(AuditLine::le("fulltree_approximation", None, &cost.total, &rhs));
    }
    Ok(lines)
}

fn pairwise_disjoint<V>(records: &[&CallRecord<V>]) -> bool {
    let Some(first) = records.first() else {
        return true;
    };
    let mut seen = HypothesisSet::empty(first.set.universe());
    for r in records {
        if !r.set.is_disjoint(&seen) {
            return false;
        }
        seen.union_with(&r.set);
    }
    true
}
