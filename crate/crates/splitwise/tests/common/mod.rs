#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splitwise::generate::{gen_random, WeightProfile};
use splitwise::tree::partition;
use splitwise::{DecisionTree, ExactInstance, HypothesisSet};

pub fn profile(i: usize) -> WeightProfile {
    match i % 3 {
        0 => WeightProfile::Uniform,
        1 => WeightProfile::Skew,
        _ => WeightProfile::TwoTier { ratio: 3.5 },
    }
}

/// Valid random instances with `2..=max_n` hypotheses and at most `max_m` tests.
pub fn instances(max_n: usize, max_m: usize) -> impl Strategy<Value = ExactInstance> {
    (2..=max_n, 2..=3usize, any::<u64>(), 0..3usize).prop_filter_map("no separating instance", move |(n, k, seed, p)| {
        let need = ((n as f64).ln() / (k as f64).ln()).ceil() as usize;
        let lo = need.min(max_m).max(1);
        let m = lo + (seed % (max_m - lo + 1) as u64) as usize;
        gen_random(n, m, k, seed, profile(p)).ok()
    })
}

/// Splits every leaf with more than one hypothesis by a random splitting
/// test, down to `max_depth` (`None` for a complete tree).
pub fn random_tree(inst: &ExactInstance, seed: u64, max_depth: Option<usize>) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = DecisionTree::leaf(inst.full_set());
    let mut open = vec![tree.root()];
    while let Some(v) = open.pop() {
        let set = tree.consistent_set(v).unwrap().clone();
        if set.len() <= 1 || max_depth.is_some_and(|b| tree.depth(v) >= b) {
            continue;
        }
        let useful: Vec<usize> = (0..inst.m()).filter(|&j| partition(inst, &set, j).len() > 1).collect();
        if useful.is_empty() {
            continue;
        }
        let j = useful[rng.gen_range(0..useful.len())];
        open.extend(tree.split(inst, v, j).unwrap());
    }
    tree
}

/// Σ mass·depth of the best tree complete to depth `b`, by plain recursion
/// over every splitting test with no memo.
pub fn plain_partial_mass(inst: &ExactInstance, set: &[usize], b: usize) -> i128 {
    if b == 0 || set.len() <= 1 {
        return 0;
    }
    let own: i128 = set.iter().map(|&h| inst.mass(h)).sum();
    let mut best: Option<i128> = None;
    for j in 0..inst.m() {
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); inst.k()];
        for &h in set {
            parts[inst.answer(j, h)].push(h);
        }
        parts.retain(|p| !p.is_empty());
        if parts.len() < 2 {
            continue;
        }
        let c = own + parts.iter().map(|p| plain_partial_mass(inst, p, b - 1)).sum::<i128>();
        best = Some(best.map_or(c, |x: i128| x.min(c)));
    }
    best.unwrap_or(0)
}

pub fn indices(set: &HypothesisSet) -> Vec<usize> {
    set.iter().collect()
}

/// Inserts a non-splitting node above the leaf on line `pick` of the tree
/// text (mod the number of leaves), returning the new text.
pub fn insert_useless_above_leaf(text: &str, pick: usize, test: usize, answer: usize) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let leaves: Vec<usize> = (1..lines.len()).filter(|&i| lines[i].split_whitespace().nth(2) == Some("leaf")).collect();
    let at = leaves[pick % leaves.len()];
    let f: Vec<String> = lines[at].split_whitespace().map(str::to_string).collect();
    let (id, depth) = (f[0].parse::<usize>().unwrap(), f[1].parse::<usize>().unwrap());
    let (pa, hyps) = (f[3].clone(), f[4].clone());
    lines[at] = format!("{id} {depth} test {} {pa} {hyps}", test + 1);
    lines.insert(at + 1, format!("{} {} leaf {} {hyps}", id + 1, depth + 1, answer + 1));
    for line in lines.iter_mut().skip(at + 2) {
        let mut f: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        f[0] = (f[0].parse::<usize>().unwrap() + 1).to_string();
        *line = f.join(" ");
    }
    let header: Vec<String> = lines[0].split_whitespace().map(str::to_string).collect();
    lines[0] = format!("tree {} {}", header[1], header[2].parse::<usize>().unwrap() + 1);
    lines.join("\n") + "\n"
}
