//! How far rounding the weights can move the cost of any shallow tree.
//!
//! C'(T) − C(T) = Σ_h (p'_h − p_h)·d_T(h) is linear in the leaf depths, so its
//! extremes over every tree of depth at most `b` (no non-splitting nodes)
//! follow from a recursion on (hypothesis set, remaining depth).

use std::collections::HashMap;

use crate::error::Result;
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::{Mass, Value};
use crate::tree::{partition, DecisionTree};

/// Minimum and maximum of C'(T) − C(T) over all trees of depth ≤ `depth`.
pub fn rounding_gap_extremes<M: Mass>(
    original: &DTInstance<M>,
    rounded: &DTInstance<M>,
    depth: usize,
) -> (M::Value, M::Value) {
    let delta: Vec<M::Value> = (0..original.n()).map(|h| rounded.weight(h) - original.weight(h)).collect();
    let mut memo = HashMap::new();
    let (lo, hi) = extremes(original, &delta, &original.full_set(), depth, &mut memo);
    (lo, hi)
}

type GapMemo<V> = HashMap<(HypothesisSet, usize), (V, V)>;

fn extremes<M: Mass>(
    inst: &DTInstance<M>,
    delta: &[M::Value],
    set: &HypothesisSet,
    b: usize,
    memo: &mut GapMemo<M::Value>,
) -> (M::Value, M::Value) {
    if b == 0 || set.len() <= 1 {
        return (M::Value::zero(), M::Value::zero());
    }
    if let Some(e) = memo.get(&(set.clone(), b)) {
        return e.clone();
    }
    // A leaf here contributes nothing below this vertex.
    let mut lo = M::Value::zero();
    let mut hi = M::Value::zero();
    let here = set.iter().fold(M::Value::zero(), |a, h| a + delta[h].clone());
    for j in 0..inst.m() {
        let parts = partition(inst, set, j);
        if parts.len() < 2 {
            continue;
        }
        let (mut l, mut u) = (here.clone(), here.clone());
        for (_, p) in &parts {
            let (pl, pu) = extremes(inst, delta, p, b - 1, memo);
            l = l + pl;
            u = u + pu;
        }
        lo = M::Value::min_of(lo, l);
        hi = M::Value::max_of(hi, u);
    }
    memo.insert((set.clone(), b), (lo.clone(), hi.clone()));
    (lo, hi)
}

/// A tree over a fixed hypothesis set: a leaf, or a test with one subtree
/// per answer class (in increasing answer order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf,
    Node(usize, Vec<Shape>),
}

impl Shape {
    /// Builds the corresponding [`DecisionTree`] rooted at `set`.
    pub fn to_tree<M: Mass>(&self, inst: &DTInstance<M>, set: &HypothesisSet) -> Result<DecisionTree> {
        let mut tree = DecisionTree::leaf(set.clone());
        let mut stack = vec![(tree.root(), self)];
        while let Some((v, shape)) = stack.pop() {
            if let Shape::Node(j, kids) = shape {
                let ids = tree.split(inst, v, *j)?;
                stack.extend(ids.into_iter().zip(kids.iter()));
            }
        }
        Ok(tree)
    }
}

/// Every tree over `set` of depth ≤ `depth` without non-splitting nodes, or
/// `None` when there are more than `limit`.
pub fn enumerate_shapes<M: Mass>(
    inst: &DTInstance<M>,
    set: &HypothesisSet,
    depth: usize,
    limit: usize,
) -> Option<Vec<Shape>> {
    let mut out = vec![Shape::Leaf];
    if depth == 0 || set.len() <= 1 {
        return Some(out);
    }
    for j in 0..inst.m() {
        let parts = partition(inst, set, j);
        if parts.len() < 2 {
            continue;
        }
        let mut combos: Vec<Vec<Shape>> = vec![Vec::new()];
        for (_, p) in &parts {
            let subs = enumerate_shapes(inst, p, depth - 1, limit)?;
            if combos.len().saturating_mul(subs.len()) > limit {
                return None;
            }
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    subs.iter().map(move |s| {
                        let mut c = c.clone();
                        c.push(s.clone());
                        c
                    })
                })
                .collect();
        }
        out.extend(combos.into_iter().map(|c| Shape::Node(j, c)));
        if out.len() > limit {
            return None;
        }
    }
    Some(out)
}
