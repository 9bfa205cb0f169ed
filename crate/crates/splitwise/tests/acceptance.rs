//! Acceptance suite. Runs without the libtest harness so that each criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use splitwise::analysis::{
    chain_decomposition, chain_greedy_solution, classify_vertices, forces_caterpillar, theorem1_bound,
    uniform_binary_bound,
};
use splitwise::exact::ExactSolver;
use splitwise::format::write_instance_text;
use splitwise::fulltree::{audit_trace, full_tree, own_ratio_bound, FullTreeConfig};
use splitwise::generate::{gen_grid_adversarial, gen_setcover_reduction, GridOptions, WeightProfile};
use splitwise::greedy::{build_greedy_tree, greedy_choice, monotonicity_violation};
use splitwise::harness::{self, random_corpus, random_mssc, Algo, AuditConfig, ExperimentConfig, Sweep};
use splitwise::mssc::{induced_mssc, mssc_cost, mssc_greedy, mssc_optimal, MsscInstance};
use splitwise::num::parse_rational;
use splitwise::rounding::{enumerate_shapes, rounding_gap_extremes};
use splitwise::setcover::{greedy_cover_factor, weighted_greedy_cover};
use splitwise::{DecisionTree, ExactInstance, HypothesisSet, Rational, Value};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Leaf-depth cost recomputed from the leaves' consistent sets.
fn leaf_depth_cost(inst: &ExactInstance, tree: &DecisionTree) -> Rational {
    tree.leaves().fold(Rational::zero(), |acc, v| {
        let depth = Rational::from_int(tree.depth(v) as i64);
        let w = tree.consistent_set(v).unwrap().iter().fold(Rational::zero(), |a, h| a + inst.weight(h));
        acc + w * depth
    })
}

fn c1_cost_identity() -> Verdict {
    let corpus = random_corpus(101, 500, (2, 32), (1, 16), None);
    let mut agree = 0;
    for item in &corpus {
        let inst = &item.instance;
        let tree = build_greedy_tree(inst, &inst.full_set()).unwrap();
        let sum = tree.interior_weight_sum(inst).unwrap();
        let cost = tree.cost(inst, &inst.full_set()).unwrap().total;
        if sum == cost && cost == leaf_depth_cost(inst, &tree) {
            agree += 1;
        }
    }
    let profiles = corpus.iter().map(|c| c.profile.name()).unique().count();
    verdict(
        corpus.len() == 500 && agree == 500 && profiles == 3,
        format!("{agree}/{} identities exact, {profiles} weight profiles", corpus.len()),
    )
}

fn c2_monotonicity() -> Verdict {
    let corpus = random_corpus(101, 500, (2, 32), (1, 16), None);
    let mut violations = 0;
    for item in &corpus {
        let inst = &item.instance;
        let tree = build_greedy_tree(inst, &inst.full_set()).unwrap();
        if monotonicity_violation(inst, &tree).unwrap().is_some() {
            violations += 1;
        }
        // Independent walk: p^-(v) along every root-to-leaf path.
        for leaf in tree.leaves().collect::<Vec<_>>() {
            let minority: Vec<Rational> = tree
                .path_to(leaf)
                .into_iter()
                .filter(|&v| tree.test(v).is_some())
                .map(|v| {
                    let set = tree.consistent_set(v).unwrap();
                    let j = tree.test(v).unwrap();
                    let mut by_answer: HashMap<usize, Rational> = HashMap::new();
                    for h in set.iter() {
                        *by_answer.entry(inst.answer(j, h)).or_insert_with(Rational::zero) += inst.weight(h);
                    }
                    let total = by_answer.values().fold(Rational::zero(), |a, b| a + b.clone());
                    let top = by_answer.values().cloned().fold(Rational::zero(), Rational::max_of);
                    total - top
                })
                .collect();
            violations += minority.windows(2).filter(|w| w[1] > w[0]).count();
        }
    }
    verdict(violations == 0, format!("{} greedy trees, {violations} violations", corpus.len()))
}

fn c3_theorem1() -> Verdict {
    let corpus = random_corpus(303, 360, (5, 10), (3, 8), None);
    let (mut used, mut ok, mut binary, mut binary_ok) = (0, 0, 0, 0);
    for item in &corpus {
        let inst = &item.instance;
        let full = inst.full_set();
        let c_opt = ExactSolver::new(inst).optimal_cost(&full).unwrap();
        if c_opt <= Rational::one() {
            continue;
        }
        used += 1;
        let c_g = build_greedy_tree(inst, &full).unwrap().cost(inst, &full).unwrap().total;
        let c = c_opt.to_f64();
        let bound = theorem1_bound(inst.p_min().to_f64(), inst.p_max().to_f64(), c).unwrap();
        if c_g <= Rational::from_f64(bound) {
            ok += 1;
        }
        if inst.is_uniform() && inst.k() == 2 {
            binary += 1;
            if c_g <= Rational::from_f64(uniform_binary_bound(inst.n(), c).unwrap()) {
                binary_ok += 1;
            }
        }
    }
    verdict(
        used >= 300 && ok == used && binary_ok == binary && binary > 0,
        format!("{ok}/{used} instances with C_OPT > 1 within bound; uniform binary {binary_ok}/{binary}"),
    )
}

/// Optimal MSSC cost in integer mass units: g(used) = w(uncovered) + min_j g(used ∪ {j}).
fn mssc_oracle(weights: &[i64], sets: &[u32]) -> i64 {
    let full: u32 = (1u32 << weights.len()) - 1;
    let mut memo: HashMap<u32, i64> = HashMap::new();
    fn go(used: u32, weights: &[i64], sets: &[u32], full: u32, memo: &mut HashMap<u32, i64>) -> i64 {
        let covered = sets.iter().enumerate().filter(|(j, _)| used >> j & 1 == 1).fold(0, |a, (_, s)| a | s);
        if covered == full {
            return 0;
        }
        if let Some(&c) = memo.get(&used) {
            return c;
        }
        let left: i64 = (0..weights.len()).filter(|e| covered >> e & 1 == 0).map(|e| weights[e]).sum();
        let best = (0..sets.len())
            .filter(|&j| used >> j & 1 == 0 && sets[j] & !covered != 0)
            .map(|j| go(used | 1 << j, weights, sets, full, memo))
            .min()
            .expect("coverable");
        memo.insert(used, left + best);
        left + best
    }
    go(0, weights, sets, full, &mut memo)
}

fn to_masks(inst: &MsscInstance<i128>) -> (Vec<i64>, Vec<u32>) {
    let elems: Vec<usize> = inst.universe().iter().collect();
    let weights = elems.iter().map(|&h| inst.masses()[h] as i64).collect();
    let sets = inst
        .sets()
        .iter()
        .map(|s| elems.iter().enumerate().filter(|(_, &h)| s.contains(h)).fold(0u32, |a, (i, _)| a | 1 << i))
        .collect();
    (weights, sets)
}

fn c4_mssc() -> Verdict {
    let mut exhaustive = 0;
    let mut bad = 0;
    let mut strict = 0;
    for size in 1..=5usize {
        let subsets: Vec<u32> = (1u32..1 << size).collect();
        for count in 1..=4 {
            for combo in subsets.iter().copied().combinations(count) {
                if combo.iter().fold(0, |a, s| a | s) != (1 << size) - 1 {
                    continue;
                }
                let sets = combo
                    .iter()
                    .map(|&m| HypothesisSet::from_indices(size, (0..size).filter(|e| m >> e & 1 == 1)))
                    .collect();
                let inst = MsscInstance::<i128>::uniform(size, sets).unwrap();
                let greedy = mssc_cost(&inst, &mssc_greedy(&inst).unwrap()).unwrap().value();
                let opt = Rational::from_ratio(mssc_oracle(&vec![1; size], &combo), size as i64);
                exhaustive += 1;
                if greedy > Rational::from_int(4) * opt.clone() {
                    bad += 1;
                }
                if greedy > opt {
                    strict += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut weighted = 0;
    for _ in 0..200 {
        let inst = random_mssc(&mut rng, 8, 8);
        let (w, s) = to_masks(&inst);
        let greedy = mssc_cost(&inst, &mssc_greedy(&inst).unwrap()).unwrap().value();
        let opt = Rational::from_ratio(mssc_oracle(&w, &s), w.iter().sum());
        weighted += 1;
        if greedy > Rational::from_int(4) * opt {
            bad += 1;
        }
    }
    verdict(
        bad == 0 && exhaustive > 0,
        format!("{exhaustive} exhaustive uniform + {weighted} weighted instances, {bad} violations, greedy suboptimal on {strict}"),
    )
}

fn c5_chains() -> Verdict {
    let corpus = random_corpus(505, 100, (4, 10), (3, 8), Some(WeightProfile::Uniform));
    let (mut chains, mut chain_bad, mut levels, mut level_bad, mut imb_bad) = (0, 0, 0, 0, 0);
    let mut caterpillars = 0;
    for item in &corpus {
        let inst = &item.instance;
        let full = inst.full_set();
        let c_opt = ExactSolver::new(inst).optimal_cost(&full).unwrap();
        let tree = build_greedy_tree(inst, &full).unwrap();
        let delta = Rational::one() / c_opt.clone();
        let cls = classify_vertices(inst, &tree, &delta).unwrap();
        let dec = chain_decomposition(inst, &tree, &cls).unwrap();
        caterpillars += usize::from(forces_caterpillar(inst));
        for s in 1..=cls.levels() {
            let mut opt_sum = Rational::zero();
            for chain in dec.level(s) {
                let induced = induced_mssc(inst, &tree, chain).unwrap();
                let sigma = chain_greedy_solution(inst, &tree, &cls, chain, &induced).unwrap();
                let weight = chain.iter().fold(Rational::zero(), |a, &v| a + inst.weight_of(tree.consistent_set(v).unwrap()));
                chains += 1;
                if weight > mssc_cost(&induced, &sigma).unwrap().value() {
                    chain_bad += 1;
                }
                opt_sum += mssc_cost(&induced, &mssc_optimal(&induced).unwrap()).unwrap().value();
            }
            if !dec.level(s).is_empty() {
                levels += 1;
                if opt_sum > c_opt {
                    level_bad += 1;
                }
            }
        }
        let n = inst.n() as f64;
        let rhs = 4.0 * n.ln() / c_opt.to_f64().ln() * c_opt.to_f64();
        if cls.imbalanced_weight() > Rational::from_f64(rhs) {
            imb_bad += 1;
        }
    }
    verdict(
        corpus.len() == 100 && chain_bad + level_bad + imb_bad == 0,
        format!(
            "{chains} chains ({chain_bad} over σ_G), {levels} levels ({level_bad} over C_OPT), {imb_bad} imbalanced-weight violations, {caterpillars} caterpillar-only instances"
        ),
    )
}

fn c6_setcover() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut checked, mut bad, mut gap) = (0, 0, 0);
    while checked < 200 {
        let inst = random_mssc(&mut rng, 10, 12);
        let (_, masks) = to_masks(&inst);
        let full = (1u32 << inst.universe().len()) - 1;
        // Increasing-cardinality scan over set combinations.
        let l_opt = (1..=masks.len())
            .find(|&k| masks.iter().combinations(k).any(|c| c.iter().fold(0, |a, &&s| a | s) == full))
            .unwrap();
        let picks = weighted_greedy_cover(&inst).unwrap().len();
        let factor = greedy_cover_factor(&inst).unwrap();
        if Rational::from_int(picks as i64) > Rational::from_f64(factor * l_opt as f64) {
            bad += 1;
        }
        gap += usize::from(picks > l_opt);
        checked += 1;
    }
    verdict(bad == 0, format!("{checked} instances, {bad} violations, greedy above optimum on {gap}"))
}

fn c7_fulltree() -> Verdict {
    let corpus = random_corpus(707, 100, (3, 9), (3, 8), None);
    let (mut runs, mut bad, mut uniform_runs) = (0, 0, 0);
    let mut forced = 0;
    for item in &corpus {
        let inst = &item.instance;
        let full = inst.full_set();
        let c_opt = ExactSolver::new(inst).optimal_cost(&full).unwrap();
        let mut configs: Vec<FullTreeConfig> =
            [0.3, 0.5, 0.8].iter().map(|&a| FullTreeConfig::general(a, own_ratio_bound(inst)).unwrap()).collect();
        if inst.is_uniform() {
            configs.push(FullTreeConfig::uniform(0.5, 0.03).unwrap());
            uniform_runs += 1;
        }
        for cfg in configs {
            let (tree, trace) = full_tree(inst, &cfg).unwrap();
            let lines = audit_trace(&trace, inst, &tree, Some(&c_opt)).unwrap();
            let cost = tree.cost(inst, &full).unwrap().total;
            let within = cost <= c_opt.clone() * Rational::from_f64(cfg.approximation_bound());
            let depth_ok = trace.max_level() <= cfg.recursion_depth_bound();
            runs += 1;
            if !(within && depth_ok && lines.iter().all(|l| l.pass)) {
                bad += 1;
            }
        }
        // A forced shallow search exercises the recursion; only the exact
        // decomposition and disjointness are claimed there.
        let cfg = FullTreeConfig::general(0.5, own_ratio_bound(inst)).unwrap().with_depth(1);
        let (tree, trace) = full_tree(inst, &cfg).unwrap();
        let lines = audit_trace(&trace, inst, &tree, None).unwrap();
        forced += 1;
        if !lines.iter().filter(|l| l.check != "fulltree_recursion_depth").all(|l| l.pass) {
            bad += 1;
        }
    }
    verdict(
        bad == 0 && uniform_runs > 0,
        format!("{runs} guaranteed runs ({uniform_runs} uniform-mode), {forced} forced-depth runs, {bad} failures"),
    )
}

fn c8_grid() -> Verdict {
    let g = gen_grid_adversarial(16, 4, GridOptions::default()).unwrap();
    let root = greedy_choice(&g.instance, &g.instance.full_set()).unwrap();
    let valid = g.instance.validate().ok();
    let type4 = g.kinds[root].type_number() == 4;
    let cfg = ExperimentConfig {
        sweep: Sweep::Grid { ns: vec![64, 256, 1024], c_star: 8 },
        algos: vec![Algo::Greedy],
        seed: 1,
        alpha: 0.5,
        epsilon: 0.03,
        budget_ms: None,
        timing: false,
        float: false,
    };
    let rows = harness::run_experiment(&cfg).unwrap();
    let ratios: Vec<Rational> = rows.iter().map(|r| parse_rational(&r.ratio).unwrap()).collect();
    let monotone = ratios.windows(2).all(|w| w[0] <= w[1]);
    let shown = ratios.iter().map(|r| format!("{:.4}", r.to_f64())).join(" <= ");
    verdict(
        valid && type4 && monotone && rows.len() == 3,
        format!("n=16 valid={valid} root type-4={type4}; C_G/(4c*) = {shown}"),
    )
}

fn c9_rounding() -> Verdict {
    let mut corpus = random_corpus(909, 50, (2, 8), (2, 8), Some(WeightProfile::Skew));
    corpus.extend(random_corpus(910, 50, (2, 8), (2, 8), Some(WeightProfile::TwoTier { ratio: 200.0 })));
    let (mut bad, mut enumerated, mut trees, mut changed) = (0, 0, 0usize, 0);
    let one = Rational::one();
    for item in &corpus {
        let inst = &item.instance;
        let n = inst.n() as i64;
        let rounded = inst.round_weights().unwrap();
        changed += usize::from(rounded.weights() != inst.weights());
        if rounded.p_min() < q(1, n * (n - 1)) {
            bad += 1;
        }
        let (lo, hi) = rounding_gap_extremes(inst, &rounded, 4);
        if hi > one || Rational::zero() - lo.clone() > one {
            bad += 1;
        }
        // Where the tree count is manageable, check every tree directly.
        if let Some(shapes) = enumerate_shapes(inst, &inst.full_set(), 4, 20_000) {
            enumerated += 1;
            trees += shapes.len();
            let full = inst.full_set();
            let (mut elo, mut ehi) = (Rational::zero(), Rational::zero());
            for s in shapes {
                let t = s.to_tree(inst, &full).unwrap();
                let d = t.cost(&rounded, &full).unwrap().total - t.cost(inst, &full).unwrap().total;
                if d > one || Rational::zero() - d.clone() > one {
                    bad += 1;
                }
                elo = Rational::min_of(elo, d.clone());
                ehi = Rational::max_of(ehi, d);
            }
            if (elo, ehi) != (lo, hi) {
                bad += 1;
            }
        }
    }
    verdict(
        corpus.len() == 100 && bad == 0,
        format!(
            "{} instances ({changed} reweighted), all depth-4 trees bounded by recursion; {enumerated} also fully enumerated ({trees} trees); {bad} violations",
            corpus.len()
        ),
    )
}

fn c10_reduction() -> Verdict {
    let cases: Vec<(usize, Vec<Vec<usize>>)> = vec![
        (2, vec![vec![0, 1]]),
        (2, vec![vec![0], vec![1]]),
        (3, vec![vec![0, 1, 2]]),
        (3, vec![vec![0, 1], vec![2]]),
        (3, vec![vec![0], vec![1], vec![2]]),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (n0, sets) in cases {
        let sets: Vec<HypothesisSet> = sets.into_iter().map(|s| HypothesisSet::from_indices(n0, s)).collect();
        let red = gen_setcover_reduction(n0, &sets, 0.4).unwrap();
        let inst = &red.instance;
        let b_opt = (1..=sets.len())
            .find(|&k| {
                sets.iter().combinations(k).any(|c| c.iter().fold(HypothesisSet::empty(n0), |a, s| a.union(s)).len() == n0)
            })
            .unwrap() as i64;
        let sum_ok = inst.total_weight() == Rational::one();
        let ratio_ok = inst.weight_ratio() == Some(Rational::one() + q(red.n as i64, red.ell as i64));
        let c_opt = ExactSolver::new(inst).optimal_cost(&inst.full_set()).unwrap();
        let qb = Rational::from_int(red.q as i64 * b_opt);
        let sandwich = qb.clone() / Rational::from_int(2) < c_opt && c_opt < Rational::from_int(3) * qb;
        pass &= sum_ok && ratio_ok && sandwich;
        details.push(format!("n0={n0} B={b_opt} n={} C_OPT={c_opt}", red.n));
    }
    verdict(pass, details.join("; "))
}

fn c11_determinism() -> Verdict {
    let snapshot = || {
        let mut out = String::new();
        for item in random_corpus(1111, 20, (3, 9), (3, 8), None) {
            let inst = &item.instance;
            out.push_str(&write_instance_text(inst));
            out.push_str(&build_greedy_tree(inst, &inst.full_set()).unwrap().to_text());
            let (tree, trace) = full_tree(inst, &FullTreeConfig::general(0.5, own_ratio_bound(inst)).unwrap().with_depth(2)).unwrap();
            out.push_str(&tree.to_text());
            out.push_str(&trace.to_text());
        }
        let cfg = ExperimentConfig {
            sweep: Sweep::Random { ns: vec![5, 7], m: 6, k: 2, per_size: 3, profile: WeightProfile::Skew },
            algos: vec![Algo::Greedy, Algo::FullTree],
            seed: 11,
            alpha: 0.5,
            epsilon: 0.03,
            budget_ms: None,
            timing: false,
            float: false,
        };
        out.push_str(&harness::write_csv(&harness::run_experiment(&cfg).unwrap()));
        let report = harness::run_audit(&AuditConfig { seed: 11, count: 8, ..AuditConfig::default() }).unwrap();
        out.push_str(&report.to_text(false));
        out
    };
    let first = snapshot();
    let second = snapshot();
    let third = std::thread::spawn(snapshot).join().unwrap();
    verdict(first == second && second == third, format!("{} bytes identical across 3 runs", first.len()))
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "cost identity", Duration::from_secs(10), c1_cost_identity),
        (2, "greedy monotonicity", Duration::MAX, c2_monotonicity),
        (3, "greedy cost bound", Duration::from_secs(300), c3_theorem1),
        (4, "MSSC 4-approximation", Duration::from_secs(120), c4_mssc),
        (5, "chain/MSSC correspondence", Duration::MAX, c5_chains),
        (6, "weighted set cover", Duration::MAX, c6_setcover),
        (7, "FullTree guarantee", Duration::from_secs(600), c7_fulltree),
        (8, "grid generator", Duration::MAX, c8_grid),
        (9, "weight rounding", Duration::MAX, c9_rounding),
        (10, "set-cover reduction", Duration::MAX, c10_reduction),
        (11, "determinism", Duration::MAX, c11_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed < limit;
        failed += usize::from(!pass);
        let limit_note = if limit == Duration::MAX { String::new() } else { format!(", limit {}s", limit.as_secs()) };
        println!(
            "criterion {id:>2} {name}: {} ({}; {:.2}s{limit_note})",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
