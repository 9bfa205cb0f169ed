//! The greedy tree: at every node, query the test whose heaviest answer class
//! is lightest.

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::Mass;
use crate::tree::{DecisionTree, NodeId};

/// How test `j` splits a hypothesis set.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitProfile<M> {
    pub test: usize,
    /// Mass of each answer class, indexed by 0-based answer.
    pub parts: Vec<M>,
    pub max_part: M,
    /// Heaviest answer; ties go to the largest answer.
    pub majority: usize,
    /// Mass outside the majority class.
    pub minority: M,
    /// A single answer holds every hypothesis of the set.
    pub useless: bool,
}

pub fn split_profile<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet, j: usize) -> Result<SplitProfile<M>> {
    if j >= inst.m() {
        return Err(Error::TestOutOfRange(j));
    }
    let mut parts = vec![M::zero(); inst.k()];
    let mut counts = vec![0usize; inst.k()];
    let mut total = M::zero();
    for h in set {
        let a = inst.answer(j, h);
        parts[a] += inst.mass(h);
        counts[a] += 1;
        total += inst.mass(h);
    }
    let mut majority = 0;
    for a in 1..parts.len() {
        if parts[a] >= parts[majority] {
            majority = a;
        }
    }
    let max_part = parts[majority];
    Ok(SplitProfile {
        test: j,
        minority: total - max_part,
        majority,
        useless: counts.iter().filter(|&&c| c > 0).count() <= 1,
        parts,
        max_part,
    })
}

/// The greedy test at `set`: smallest heaviest class among splitting tests,
/// ties to the smallest test index.
pub fn greedy_choice<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet) -> Result<usize> {
    let mut best: Option<(usize, M)> = None;
    for j in 0..inst.m() {
        let p = split_profile(inst, set, j)?;
        if p.useless {
            continue;
        }
        if best.is_none_or(|(_, b)| p.max_part < b) {
            best = Some((j, p.max_part));
        }
    }
    match best {
        Some((j, _)) => Ok(j),
        None => {
            let (a, b) = inst
                .undistinguished_pair(set)
                .unwrap_or((set.first().unwrap_or(0), set.first().unwrap_or(0)));
            Err(Error::InvalidAt(a, b))
        }
    }
}

/// The complete greedy tree over `set`.
pub fn build_greedy_tree<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet) -> Result<DecisionTree> {
    let mut tree = DecisionTree::leaf(set.clone());
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        let s = tree.consistent_set(v)?;
        if s.len() <= 1 {
            continue;
        }
        let j = greedy_choice(inst, s)?;
        let kids = tree.split(inst, v, j)?;
        stack.extend(kids.into_iter().rev());
    }
    Ok(tree)
}

/// p^-(v): mass of L(v) outside the majority child; zero at leaves.
pub fn minority_mass<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree, v: NodeId) -> Result<M> {
    match tree.node(v)?.test() {
        Some(j) => Ok(split_profile(inst, tree.consistent_set(v)?, j)?.minority),
        None => Ok(M::zero()),
    }
}

/// The child of interior `v` reached by its majority answer (v^+).
pub fn majority_child<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree, v: NodeId) -> Result<Option<NodeId>> {
    match tree.node(v)?.test() {
        Some(j) => {
            let p = split_profile(inst, tree.consistent_set(v)?, j)?;
            Ok(tree.child(v, p.majority))
        }
        None => Ok(None),
    }
}

/// First interior node where some test has a strictly lighter heaviest class
/// than the one queried.
pub fn greediness_violation<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree) -> Result<Option<NodeId>> {
    for v in tree.interior() {
        let s = tree.consistent_set(v)?;
        let chosen = split_profile(inst, s, tree.test(v).expect("interior"))?.max_part;
        for j in 0..inst.m() {
            let p = split_profile(inst, s, j)?;
            if !p.useless && p.max_part < chosen {
                return Ok(Some(v));
            }
        }
    }
    Ok(None)
}

/// First parent/child pair on which p^- increases.
pub fn monotonicity_violation<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree) -> Result<Option<(NodeId, NodeId)>> {
    for v in tree.interior() {
        let pv = minority_mass(inst, tree, v)?;
        for &(_, c) in tree.children(v) {
            if !tree.is_leaf(c) && minority_mass(inst, tree, c)? > pv {
                return Ok(Some((v, c)));
            }
        }
    }
    Ok(None)
}
