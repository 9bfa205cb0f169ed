//! Proof machinery replayed on concrete greedy trees: balanced and level-s
//! imbalanced vertices, chains, heavy vertices, and the inequalities built on
//! them, each evaluated as an audit line.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::greedy::{greediness_violation, majority_child, split_profile};
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::mssc::{complete_greedily, induced_mssc, is_greedy_solution, mssc_cost, mssc_optimal, MsscInstance, MsscSolution};
use crate::num::{Mass, Value};
use crate::report::AuditLine;
use crate::setcover::optimal_cover_size;
use crate::tree::{DecisionTree, NodeId};

/// Levels beyond this are refused; δ this close to 1 makes the analysis vacuous anyway.
const MAX_LEVELS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexLabel<V> {
    pub vertex: NodeId,
    /// p(v)
    pub weight: V,
    /// p^-(v)
    pub minority: V,
    /// Every s at which v is level-s imbalanced, ascending.
    pub levels: Vec<usize>,
    /// Hypotheses h with v h-heavy. At most one on a greedy tree.
    pub heavy: Vec<usize>,
    /// q(v)
    pub q: V,
}

impl<V> VertexLabel<V> {
    pub fn is_balanced(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn is_level(&self, s: usize) -> bool {
        self.levels.binary_search(&s).is_ok()
    }
}

/// Labels of the interior vertices of a greedy tree at one δ.
#[derive(Clone, Debug)]
pub struct Classification<V> {
    pub delta: V,
    /// `powers[s-1] = δ^s` for s = 1..=⌈s_max⌉.
    pub powers: Vec<V>,
    labels: Vec<Option<VertexLabel<V>>>,
    /// Leaf u_h^⊥ of each hypothesis.
    pub leaf_of: Vec<NodeId>,
    /// Topmost h-heavy vertex u_h^⊤, if any.
    pub heavy_top: Vec<Option<NodeId>>,
}

impl<V: Value> Classification<V> {
    pub fn label(&self, v: NodeId) -> Option<&VertexLabel<V>> {
        self.labels.get(v).and_then(Option::as_ref)
    }

    pub fn interior(&self) -> impl Iterator<Item = &VertexLabel<V>> {
        self.labels.iter().flatten()
    }

    pub fn levels(&self) -> usize {
        self.powers.len()
    }

    pub fn balanced_weight(&self) -> V {
        self.interior()
            .filter(|l| l.is_balanced())
            .fold(V::zero(), |a, l| a + l.weight.clone())
    }

    pub fn imbalanced_weight(&self) -> V {
        self.interior()
            .filter(|l| !l.is_balanced())
            .fold(V::zero(), |a, l| a + l.weight.clone())
    }

    pub fn heavy_weight(&self) -> V {
        self.interior().fold(V::zero(), |a, l| a + l.q.clone())
    }
}

/// log(1/p_min) / log(1/δ).
pub fn s_max(p_min: f64, delta: f64) -> f64 {
    (1.0 / p_min).ln() / (1.0 / delta).ln()
}

/// δ = 1/C_OPT when the optimum is known, else 1/C_G; the flag marks the proxy.
pub fn choose_delta<V: Value>(c_opt: Option<&V>, c_g: &V) -> (V, bool) {
    match c_opt {
        Some(c) => (V::one() / c.clone(), false),
        None => (V::one() / c_g.clone(), true),
    }
}

pub fn classify_vertices<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree, delta: &M::Value) -> Result<Classification<M::Value>> {
    if !(*delta > M::Value::zero() && *delta < M::Value::one()) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if !inst.has_positive_weights() {
        return Err(Error::ZeroWeight);
    }
    tree.verify(inst)?;
    if !tree.is_complete(inst, &inst.full_set(), None) {
        return Err(Error::Incomplete);
    }
    if let Some(v) = greediness_violation(inst, tree)? {
        return Err(Error::NotGreedy(v));
    }
    let p_min = inst.p_min();
    let mut powers = vec![delta.clone()];
    while *powers.last().expect("nonempty") > p_min {
        if powers.len() >= MAX_LEVELS {
            return Err(Error::InvalidParameter(format!("delta {delta} needs more than {MAX_LEVELS} levels")));
        }
        let next = powers.last().expect("nonempty").clone() * delta.clone();
        powers.push(next);
    }

    let den = inst.denominator();
    let two = M::Value::from_int(2);
    let mut labels = vec![None; tree.len()];
    for v in tree.interior() {
        let set = tree.consistent_set(v)?;
        let j = tree.test(v).expect("interior");
        let minority_mass = split_profile(inst, set, j)?.minority;
        let weight = inst.mass_of(set).over(den);
        let minority = minority_mass.over(den);
        let levels = powers
            .iter()
            .enumerate()
            .filter(|(_, d)| minority <= **d && weight > two.clone() * (*d).clone())
            .map(|(i, _)| i + 1)
            .collect();
        let heavy: Vec<usize> = set.iter().filter(|&h| inst.mass(h) > minority_mass).collect();
        let q = heavy.iter().map(|&h| inst.weight(h)).fold(M::Value::zero(), M::Value::max_of);
        labels[v] = Some(VertexLabel { vertex: v, weight, minority, levels, heavy, q });
    }

    let mut leaf_of = Vec::with_capacity(inst.n());
    let mut heavy_top = Vec::with_capacity(inst.n());
    for h in 0..inst.n() {
        let leaf = tree.deepest_consistent(inst, h)?;
        leaf_of.push(leaf);
        let top = tree
            .path_to(leaf)
            .into_iter()
            .find(|&u| labels[u].as_ref().is_some_and(|l: &VertexLabel<M::Value>| l.heavy.contains(&h)));
        heavy_top.push(top);
    }
    Ok(Classification { delta: delta.clone(), powers, labels, leaf_of, heavy_top })
}

/// Level-s chains for every s, each a downward path from a maximal to a
/// minimal level-s imbalanced vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDecomposition {
    /// `chains[s-1]` lists the level-s chains in preorder of their tops.
    pub chains: Vec<Vec<Vec<NodeId>>>,
}

impl ChainDecomposition {
    pub fn level(&self, s: usize) -> &[Vec<NodeId>] {
        &self.chains[s - 1]
    }

    pub fn is_empty(&self) -> bool {
        self.chains.iter().all(Vec::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Vec<NodeId>)> {
        self.chains
            .iter()
            .enumerate()
            .flat_map(|(i, cs)| cs.iter().map(move |c| (i + 1, c)))
    }
}

/// Groups level-s imbalanced vertices by their topmost level-s ancestor and
/// checks that each group is a majority-edge path.
pub fn chain_decomposition<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
) -> Result<ChainDecomposition> {
    let order = tree.preorder();
    let mut chains = Vec::with_capacity(cls.levels());
    for s in 1..=cls.levels() {
        let member = |v: NodeId| cls.label(v).is_some_and(|l| l.is_level(s));
        let total = order.iter().filter(|&&v| member(v)).count();
        let mut level_chains = Vec::new();
        let mut covered = 0;
        for &v in &order {
            if !member(v) {
                continue;
            }
            let mut up = tree.parent(v);
            let mut has_member_ancestor = false;
            while let Some(u) = up {
                if member(u) {
                    has_member_ancestor = true;
                    break;
                }
                up = tree.parent(u);
            }
            if has_member_ancestor {
                continue;
            }
            let mut chain = vec![v];
            let mut cur = v;
            loop {
                let kids: Vec<NodeId> = tree.children(cur).iter().map(|&(_, c)| c).filter(|&c| member(c)).collect();
                match kids.as_slice() {
                    [] => break,
                    [c] => {
                        if majority_child(inst, tree, cur)? != Some(*c) {
                            return Err(Error::ChainStructure(format!(
                                "level-{s} vertex {cur} continues through a minority edge"
                            )));
                        }
                        chain.push(*c);
                        cur = *c;
                    }
                    _ => {
                        return Err(Error::ChainStructure(format!(
                            "level-{s} vertex {cur} has {} level-{s} children",
                            kids.len()
                        )))
                    }
                }
            }
            covered += chain.len();
            level_chains.push(chain);
        }
        if covered != total {
            return Err(Error::ChainStructure(format!(
                "level-{s} chains cover {covered} of {total} imbalanced vertices"
            )));
        }
        chains.push(level_chains);
    }
    Ok(ChainDecomposition { chains })
}

/// Structural facts every greedy tree must satisfy, one line each.
pub fn structure_audit<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
) -> Result<Vec<AuditLine>> {
    let mut out = Vec::new();
    let half_delta = cls.delta.clone() / M::Value::from_int(2);
    let weak: Vec<&VertexLabel<M::Value>> = cls
        .interior()
        .filter(|l| l.is_balanced() && l.minority < half_delta.clone() * l.weight.clone())
        .collect();
    out.push(AuditLine::flag("balanced_minority", None, weak.is_empty(), weak.len(), 0));

    let shared = cls.interior().filter(|l| l.heavy.len() > 1).count();
    out.push(AuditLine::flag("heavy_unique", None, shared == 0, shared, 0));

    let mut broken_run = 0;
    let mut minority_edges = 0;
    for l in cls.interior() {
        for &h in &l.heavy {
            let path = tree.path_to(cls.leaf_of[h]);
            let from = path.iter().position(|&u| u == l.vertex).expect("h is consistent with v");
            for w in path[from..].windows(2) {
                if tree.test(w[1]).is_some() && !cls.label(w[1]).is_some_and(|x| x.heavy.contains(&h)) {
                    broken_run += 1;
                }
                if majority_child(inst, tree, w[0])? != Some(w[1]) {
                    minority_edges += 1;
                }
            }
        }
    }
    out.push(AuditLine::flag("heavy_contiguous", None, broken_run == 0, broken_run, 0));
    out.push(AuditLine::flag("heavy_majority_edges", None, minority_edges == 0, minority_edges, 0));

    let split = cls.balanced_weight() + cls.imbalanced_weight();
    out.push(AuditLine::eq("weight_partition", None, &split, &tree.interior_weight_sum(inst)?));
    Ok(out)
}

/// Σ_{balanced} p(v) ≤ (log n / log(2/δ))·(2/δ).
pub fn entropy_audit<M: Mass>(inst: &DTInstance<M>, cls: &Classification<M::Value>) -> AuditLine {
    let d = cls.delta.to_f64();
    let n = inst.n() as f64;
    let rhs = if n <= 1.0 { 0.0 } else { n.ln() / (2.0 / d).ln() * (2.0 / d) };
    AuditLine::le_bound("entropy_balanced", None, &cls.balanced_weight(), rhs)
}

/// σ_G for a chain: the chain's tests in order, with the singleton of the
/// heavy hypothesis slotted in where the chain turns heavy, then greedy.
pub fn chain_greedy_solution<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
    chain: &[NodeId],
    induced: &MsscInstance<M>,
) -> Result<MsscSolution> {
    let m = inst.m();
    let tests: Vec<usize> = chain.iter().map(|&v| tree.test(v).expect("chain vertices are interior")).collect();
    let heavy_at = |v: NodeId| cls.label(v).and_then(|l| l.heavy.first().copied());
    let l0 = chain.iter().rposition(|&v| heavy_at(v).is_none()).map_or(0, |i| i + 1);
    let mut prefix = tests[..l0].to_vec();
    if l0 < chain.len() {
        let h0 = heavy_at(chain[l0]).expect("vertices past l0 are heavy");
        prefix.push(m + h0);
        prefix.extend_from_slice(&tests[l0..]);
    }
    complete_greedily(induced, prefix)
}

/// True when no test has two answer classes of at least two hypotheses each,
/// so every decision tree peels hypotheses off one path.
pub fn forces_caterpillar<M: Mass>(inst: &DTInstance<M>) -> bool {
    (0..inst.m()).all(|j| {
        let mut counts = vec![0usize; inst.k()];
        for h in 0..inst.n() {
            counts[inst.answer(j, h)] += 1;
        }
        counts.iter().filter(|&&c| c >= 2).count() < 2
    })
}

/// Per chain: the σ_G construction is greedy and Σ_{v∈P}(p(v) − q(v)) is at
/// most its cost; greedy within 4× of the optimum. Per level: Σ_P MSSC_OPT is
/// at most C_OPT (uniform, unless the instance forces a caterpillar) or
/// C_OPT + 1 (weighted).
pub fn chain_mssc_audit<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
    dec: &ChainDecomposition,
    c_opt: &M::Value,
) -> Result<Vec<AuditLine>> {
    let uniform = inst.is_uniform();
    let caterpillar = forces_caterpillar(inst);
    let four = M::Value::from_int(4);
    let mut out = Vec::new();
    for (i, level) in dec.chains.iter().enumerate() {
        let s = i + 1;
        let mut opt_sum = M::Value::zero();
        let mut deficit = M::Value::zero();
        for chain in level {
            let induced = induced_mssc(inst, tree, chain)?;
            let sigma = chain_greedy_solution(inst, tree, cls, chain, &induced)?;
            out.push(AuditLine::flag(
                "chain_sigma_greedy",
                Some(s),
                is_greedy_solution(&induced, &sigma),
                format!("top={}", chain[0]),
                format!("len={}", chain.len()),
            ));
            let lhs = chain.iter().fold(M::Value::zero(), |a, &v| {
                let l = cls.label(v).expect("chain vertices are interior");
                a + l.weight.clone() - l.q.clone()
            });
            let greedy_cost = mssc_cost(&induced, &sigma)?;
            out.push(AuditLine::le("chain_weight", Some(s), &lhs, &greedy_cost.value()));
            let opt = mssc_optimal(&induced)?;
            let opt_cost = mssc_cost(&induced, &opt)?.value();
            out.push(AuditLine::le("chain_flt", Some(s), &greedy_cost.value(), &(four.clone() * opt_cost.clone())));
            opt_sum = opt_sum + opt_cost;
            let heaviest = induced.universe().iter().map(|h| inst.weight(h)).fold(M::Value::zero(), M::Value::max_of);
            deficit = deficit + heaviest;
        }
        if !uniform {
            out.push(AuditLine::le("level_mssc_sum", Some(s), &opt_sum, &(c_opt.clone() + M::Value::one())));
        } else if !caterpillar {
            out.push(AuditLine::le("level_mssc_sum", Some(s), &opt_sum, c_opt));
        }
        // Each chain loses at most its heaviest element against the optimal tree.
        out.push(AuditLine::le("level_mssc_sum_tight", Some(s), &opt_sum, &(c_opt.clone() + deficit)));
    }
    Ok(out)
}

/// The imbalanced-weight and heavy-weight inequalities.
pub fn imbalanced_audit<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
    c_opt: &M::Value,
) -> Result<Vec<AuditLine>> {
    let d = cls.delta.to_f64();
    let c = c_opt.to_f64();
    let p_min = inst.p_min().to_f64();
    let p_max = inst.p_max().to_f64();
    let imbalanced = cls.imbalanced_weight();
    let heavy = cls.heavy_weight();
    let mut out = Vec::new();
    if inst.is_uniform() {
        let n = inst.n() as f64;
        let rhs = 4.0 * n.ln() / (1.0 / d).ln() * c;
        out.push(AuditLine::le_bound("imbalanced_uniform", None, &imbalanced, rhs));
    }
    // Σq stays exact on the left; only the s_max term is irrational.
    let lhs = imbalanced - heavy.clone();
    let rhs = 4.0 * s_max(p_min, d) * (c + 1.0);
    out.push(AuditLine::le_bound("imbalanced_minus_heavy", None, &lhs, rhs));

    let mut by_path = M::Value::zero();
    for h in 0..inst.n() {
        if let Some(top) = cls.heavy_top[h] {
            let steps = tree.depth(cls.leaf_of[h]) - tree.depth(top);
            by_path = by_path + inst.weight(h) * M::Value::from_int(steps as i64);
        }
    }
    out.push(AuditLine::eq("heavy_sum_paths", None, &heavy, &by_path));
    out.push(AuditLine::le_bound("heavy_sum", None, &heavy, (1.0 + (p_max / p_min).ln()) * c));
    Ok(out)
}

/// For each hypothesis with a heavy run: the run's tests are a weighted greedy
/// cover of L(u_h^⊤) \ {h}, the optimal cover is no longer than d_OPT(h), and
/// the run is at most (1 + ln(p_max/p_min))·d_OPT(h) long.
pub fn heavy_path_audit<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    cls: &Classification<M::Value>,
    opt_tree: &DecisionTree,
) -> Result<Vec<AuditLine>> {
    let factor = 1.0 + (inst.p_max().to_f64() / inst.p_min().to_f64()).ln();
    let n = inst.n();
    let mut out = Vec::new();
    for h in 0..n {
        let Some(top) = cls.heavy_top[h] else { continue };
        let leaf = cls.leaf_of[h];
        let mut universe = tree.consistent_set(top)?.clone();
        universe.remove(h);
        let sets: Vec<HypothesisSet> = (0..inst.m())
            .map(|j| HypothesisSet::from_indices(n, universe.iter().filter(|&g| inst.answer(j, g) != inst.answer(j, h))))
            .collect();
        let sc = MsscInstance::new(universe, inst.masses().to_vec(), inst.denominator(), sets)?;
        let path = tree.path_to(leaf);
        let from = path.iter().position(|&u| u == top).expect("top is an ancestor");
        let picks: Vec<usize> = path[from..path.len() - 1].iter().map(|&u| tree.test(u).expect("interior")).collect();
        let run = picks.len();
        out.push(AuditLine::flag(
            "heavy_path_greedy_cover",
            Some(h + 1),
            is_greedy_solution(&sc, &MsscSolution { order: picks }),
            run,
            "-",
        ));
        let l_opt = optimal_cover_size(&sc)?;
        let d_opt = opt_tree.depth(opt_tree.deepest_consistent(inst, h)?);
        out.push(AuditLine::le(
            "heavy_path_cover_opt",
            Some(h + 1),
            &M::Value::from_int(l_opt as i64),
            &M::Value::from_int(d_opt as i64),
        ));
        out.push(AuditLine::le_bound(
            "heavy_path_bound",
            Some(h + 1),
            &M::Value::from_int(run as i64),
            factor * d_opt as f64,
        ));
    }
    Ok(out)
}

/// (12·log2(1/p_min)/log2 C_OPT + ln(p_max/p_min))·C_OPT.
pub fn theorem1_bound(p_min: f64, p_max: f64, c_opt: f64) -> Result<f64> {
    if c_opt <= 1.0 {
        return Err(Error::BoundUndefined(c_opt));
    }
    Ok((12.0 * (1.0 / p_min).log2() / c_opt.log2() + (p_max / p_min).ln()) * c_opt)
}

/// 6·log2(n)/log2(C_OPT)·C_OPT, the uniform binary form.
pub fn uniform_binary_bound(n: usize, c_opt: f64) -> Result<f64> {
    if c_opt <= 1.0 {
        return Err(Error::BoundUndefined(c_opt));
    }
    Ok(6.0 * (n as f64).log2() / c_opt.log2() * c_opt)
}

/// Everything above for one greedy tree, given the exact optimum.
pub fn full_analysis<M: Mass>(
    inst: &DTInstance<M>,
    tree: &DecisionTree,
    opt_tree: &DecisionTree,
    c_opt: &M::Value,
) -> Result<Vec<AuditLine>> {
    let delta = M::Value::one() / c_opt.clone();
    let cls = classify_vertices(inst, tree, &delta)?;
    let dec = chain_decomposition(inst, tree, &cls)?;
    let mut out = structure_audit(inst, tree, &cls)?;
    out.push(entropy_audit(inst, &cls));
    out.extend(chain_mssc_audit(inst, tree, &cls, &dec, c_opt)?);
    out.extend(imbalanced_audit(inst, tree, &cls, c_opt)?);
    out.extend(heavy_path_audit(inst, tree, &cls, opt_tree)?);
    Ok(out)
}

/// Heavy vertices per hypothesis, for reporting.
pub fn heavy_runs<V: Value>(cls: &Classification<V>) -> HashMap<usize, Vec<NodeId>> {
    let mut runs: HashMap<usize, Vec<NodeId>> = HashMap::new();
    for l in cls.interior() {
        for &h in &l.heavy {
            runs.entry(h).or_default().push(l.vertex);
        }
    }
    runs
}
