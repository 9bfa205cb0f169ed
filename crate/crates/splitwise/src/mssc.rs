//! Weighted min-sum set cover: costs, greedy orderings, exact optima, and the
//! instance induced by a chain of tree vertices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::greedy::split_profile;
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::{Mass, Value};
use crate::tree::{DecisionTree, NodeId};

/// A weighted universe and a family of sets over it. Elements are indices
/// below a fixed width; only members of `universe` count.
#[derive(Clone, Debug, PartialEq)]
pub struct MsscInstance<M: Mass = i128> {
    universe: HypothesisSet,
    masses: Vec<M>,
    denominator: M,
    sets: Vec<HypothesisSet>,
}

/// An ordering of set indices; a covering prefix suffices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MsscSolution {
    pub order: Vec<usize>,
}

/// Both cost formulas of one solution.
#[derive(Clone, Debug, PartialEq)]
pub struct MsscCost<V> {
    /// Σ_ℓ p(elements uncovered before step ℓ).
    pub prefix_sum: V,
    /// Σ_h p_h · (step covering h).
    pub cover_time: V,
}

impl<V: Value> MsscCost<V> {
    pub fn value(&self) -> V {
        self.prefix_sum.clone()
    }

    pub fn formulas_agree(&self) -> bool {
        if V::is_exact() {
            self.prefix_sum == self.cover_time
        } else {
            (self.prefix_sum.to_f64() - self.cover_time.to_f64()).abs() <= 1e-9
        }
    }
}

impl<M: Mass> MsscInstance<M> {
    pub fn new(universe: HypothesisSet, masses: Vec<M>, denominator: M, sets: Vec<HypothesisSet>) -> Result<Self> {
        let w = universe.universe();
        if masses.len() != w || sets.iter().any(|s| s.universe() != w) {
            return Err(Error::InvalidParameter("universe, weights, and sets disagree on width".into()));
        }
        if denominator <= M::zero() {
            return Err(Error::InvalidParameter("weight denominator must be positive".into()));
        }
        Ok(Self { universe, masses, denominator, sets })
    }

    /// Universe `0..size`, each element of weight `1/size`.
    pub fn uniform(size: usize, sets: Vec<HypothesisSet>) -> Result<Self>
    where
        M: From<u8>,
    {
        let one = M::from(1u8);
        let mut den = M::zero();
        for _ in 0..size {
            den += one;
        }
        Self::new(HypothesisSet::full(size), vec![one; size], den, sets)
    }

    pub fn universe(&self) -> &HypothesisSet {
        &self.universe
    }

    pub fn masses(&self) -> &[M] {
        &self.masses
    }

    pub fn denominator(&self) -> M {
        self.denominator
    }

    pub fn sets(&self) -> &[HypothesisSet] {
        &self.sets
    }

    pub fn width(&self) -> usize {
        self.universe.universe()
    }

    pub fn mass_of(&self, set: &HypothesisSet) -> M {
        let mut total = M::zero();
        for h in set.intersection(&self.universe).iter() {
            total += self.masses[h];
        }
        total
    }

    pub fn weight(&self, h: usize) -> M::Value {
        self.masses[h].over(self.denominator)
    }

    /// Errors with the first element no set contains.
    pub fn check_coverable(&self) -> Result<()> {
        let mut covered = HypothesisSet::empty(self.width());
        for s in &self.sets {
            covered.union_with(s);
        }
        match self.universe.difference(&covered).first() {
            Some(h) => Err(Error::Uncovered(h)),
            None => Ok(()),
        }
    }

    /// Smallest and largest element weight in the universe.
    pub fn weight_range(&self) -> Option<(M, M)> {
        let mut it = self.universe.iter().map(|h| self.masses[h]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), x| {
            (if x < lo { x } else { lo }, if x > hi { x } else { hi })
        }))
    }
}

pub fn mssc_cost<M: Mass>(inst: &MsscInstance<M>, sol: &MsscSolution) -> Result<MsscCost<M::Value>> {
    let mut uncovered = inst.universe.clone();
    let mut prefix = M::zero();
    let mut cover = M::zero();
    for (step, &j) in sol.order.iter().enumerate() {
        if uncovered.is_empty() {
            break;
        }
        let set = inst.sets.get(j).ok_or_else(|| Error::InvalidParameter(format!("set index {j} out of range")))?;
        prefix += inst.mass_of(&uncovered);
        let newly = uncovered.intersection(set);
        for h in &newly {
            cover += inst.masses[h].times(step + 1);
        }
        uncovered = uncovered.difference(set);
    }
    if let Some(h) = uncovered.first() {
        return Err(Error::Uncovered(h));
    }
    Ok(MsscCost {
        prefix_sum: prefix.over(inst.denominator),
        cover_time: cover.over(inst.denominator),
    })
}

/// Index of the set covering the most remaining weight (ties: smallest index,
/// then most elements when all remaining weight is zero).
fn best_set<M: Mass>(inst: &MsscInstance<M>, uncovered: &HypothesisSet) -> Option<usize> {
    let mut best: Option<(usize, M, usize)> = None;
    for (j, s) in inst.sets.iter().enumerate() {
        let newly = uncovered.intersection(s);
        let count = newly.len();
        if count == 0 {
            continue;
        }
        let mass = inst.mass_of(&newly);
        let better = match best {
            None => true,
            Some((_, bm, bc)) => mass > bm || (mass == bm && bm.is_zero() && count > bc),
        };
        if better {
            best = Some((j, mass, count));
        }
    }
    best.map(|(j, _, _)| j)
}

/// Greedy ordering by maximum remaining weight.
pub fn mssc_greedy<M: Mass>(inst: &MsscInstance<M>) -> Result<MsscSolution> {
    complete_greedily(inst, Vec::new())
}

/// Extends `prefix` greedily until the universe is covered.
pub fn complete_greedily<M: Mass>(inst: &MsscInstance<M>, prefix: Vec<usize>) -> Result<MsscSolution> {
    let mut uncovered = inst.universe.clone();
    for &j in &prefix {
        let set = inst.sets.get(j).ok_or_else(|| Error::InvalidParameter(format!("set index {j} out of range")))?;
        uncovered = uncovered.difference(set);
    }
    let mut order = prefix;
    while !uncovered.is_empty() {
        let j = best_set(inst, &uncovered).ok_or_else(|| Error::Uncovered(uncovered.first().expect("nonempty")))?;
        uncovered = uncovered.difference(&inst.sets[j]);
        order.push(j);
    }
    Ok(MsscSolution { order })
}

/// Whether every step up to full coverage picks a set of maximum remaining weight.
pub fn is_greedy_solution<M: Mass>(inst: &MsscInstance<M>, sol: &MsscSolution) -> bool {
    let mut uncovered = inst.universe.clone();
    for &j in &sol.order {
        if uncovered.is_empty() {
            return true;
        }
        let Some(set) = inst.sets.get(j) else {
            return false;
        };
        let chosen = inst.mass_of(&uncovered.intersection(set));
        if inst.sets.iter().any(|s| inst.mass_of(&uncovered.intersection(s)) > chosen) {
            return false;
        }
        uncovered = uncovered.difference(set);
    }
    uncovered.is_empty()
}

/// Default cap on distinct covered-states explored by [`mssc_optimal`].
pub const MSSC_STATE_BUDGET: usize = 1 << 20;

/// An optimal ordering, by dynamic programming over covered prefixes: two
/// orderings that have covered the same elements share their best completion.
pub fn mssc_optimal<M: Mass>(inst: &MsscInstance<M>) -> Result<MsscSolution> {
    mssc_optimal_with_budget(inst, MSSC_STATE_BUDGET)
}

pub fn mssc_optimal_with_budget<M: Mass>(inst: &MsscInstance<M>, max_states: usize) -> Result<MsscSolution> {
    inst.check_coverable()?;
    // Sets that agree on the universe are interchangeable; keep the first.
    let mut seen: HashMap<HypothesisSet, usize> = HashMap::new();
    let mut candidates = Vec::new();
    for (j, s) in inst.sets.iter().enumerate() {
        let key = s.intersection(&inst.universe);
        if key.is_empty() {
            continue;
        }
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
            e.insert(j);
            candidates.push(j);
        }
    }
    let mut memo: HashMap<HypothesisSet, (M, Option<usize>)> = HashMap::new();
    let start = HypothesisSet::empty(inst.width());
    solve_mssc(inst, &candidates, &start, &mut memo, max_states)?;
    let mut order = Vec::new();
    let mut covered = start;
    while let Some(&(_, Some(j))) = memo.get(&covered) {
        order.push(j);
        covered = covered.union(&inst.sets[j].intersection(&inst.universe));
    }
    Ok(MsscSolution { order })
}

fn solve_mssc<M: Mass>(
    inst: &MsscInstance<M>,
    candidates: &[usize],
    covered: &HypothesisSet,
    memo: &mut HashMap<HypothesisSet, (M, Option<usize>)>,
    max_states: usize,
) -> Result<M> {
    let uncovered = inst.universe.difference(covered);
    if uncovered.is_empty() {
        return Ok(M::zero());
    }
    if let Some(&(c, _)) = memo.get(covered) {
        return Ok(c);
    }
    if memo.len() >= max_states {
        return Err(Error::BudgetExceeded {
            expansions: memo.len() as u64,
            memo_entries: memo.len(),
        });
    }
    let here = inst.mass_of(&uncovered);
    let mut best: Option<(M, usize)> = None;
    for &j in candidates {
        if uncovered.is_disjoint(&inst.sets[j]) {
            continue;
        }
        let next = covered.union(&inst.sets[j].intersection(&inst.universe));
        let c = here + solve_mssc(inst, candidates, &next, memo, max_states)?;
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, j));
        }
    }
    let (c, j) = best.expect("coverable universe has a useful set");
    memo.insert(covered.clone(), (c, Some(j)));
    Ok(c)
}

/// The instance induced by a downward path `chain` of `tree`: universe
/// S = L(first vertex); set `j < m` holds the hypotheses of S outside the
/// majority answer of test `j` on S; set `m + h` is `{h} ∩ S`.
pub fn induced_mssc<M: Mass>(inst: &DTInstance<M>, tree: &DecisionTree, chain: &[NodeId]) -> Result<MsscInstance<M>> {
    check_downward_path(tree, chain)?;
    let s = tree.consistent_set(chain[0])?.clone();
    let n = inst.n();
    let mut sets = Vec::with_capacity(inst.m() + n);
    for j in 0..inst.m() {
        let p = split_profile(inst, &s, j)?;
        sets.push(HypothesisSet::from_indices(n, s.iter().filter(|&h| inst.answer(j, h) != p.majority)));
    }
    for h in 0..n {
        let mut single = HypothesisSet::empty(n);
        if s.contains(h) {
            single.insert(h);
        }
        sets.push(single);
    }
    MsscInstance::new(s, inst.masses().to_vec(), inst.denominator(), sets)
}

pub(crate) fn check_downward_path(tree: &DecisionTree, chain: &[NodeId]) -> Result<()> {
    if chain.is_empty() {
        return Err(Error::NotAPath);
    }
    for &v in chain {
        tree.node(v)?;
    }
    if chain.windows(2).all(|w| tree.parent(w[1]) == Some(w[0])) {
        Ok(())
    } else {
        Err(Error::NotAPath)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rational;

    fn sets(width: usize, xs: &[&[usize]]) -> Vec<HypothesisSet> {
        xs.iter().map(|s| HypothesisSet::from_indices(width, s.iter().copied())).collect()
    }

    #[test]
    fn single_element() {
        let inst = MsscInstance::<i128>::uniform(1, sets(1, &[&[0]])).unwrap();
        let c = mssc_cost(&inst, &MsscSolution { order: vec![0] }).unwrap();
        assert_eq!(c.value(), Rational::from_int(1));
        assert!(c.formulas_agree());
    }

    #[test]
    fn two_singletons() {
        let inst = MsscInstance::<i128>::uniform(2, sets(2, &[&[0], &[1]])).unwrap();
        let c = mssc_cost(&inst, &MsscSolution { order: vec![0, 1] }).unwrap();
        assert_eq!(c.prefix_sum, Rational::from_ratio(3, 2));
        assert_eq!(c.cover_time, Rational::from_ratio(3, 2));
        assert!(matches!(
            mssc_cost(&inst, &MsscSolution { order: vec![0] }),
            Err(Error::Uncovered(1))
        ));
        assert_eq!(mssc_greedy(&inst).unwrap().order, vec![0, 1]);
    }

    #[test]
    fn overlapping_chain_of_sets() {
        let inst = MsscInstance::<i128>::uniform(3, sets(3, &[&[0, 1], &[1, 2], &[2]])).unwrap();
        let g = mssc_greedy(&inst).unwrap();
        assert_eq!(g.order, vec![0, 1]);
        assert_eq!(mssc_cost(&inst, &g).unwrap().value(), Rational::from_ratio(4, 3));
        let o = mssc_optimal(&inst).unwrap();
        assert_eq!(mssc_cost(&inst, &o).unwrap().value(), Rational::from_ratio(4, 3));
    }

    #[test]
    fn heavy_singleton_beats_light_pair() {
        let inst = MsscInstance::new(HypothesisSet::full(3), vec![3i128, 1, 1], 5, sets(3, &[&[1, 2], &[0]])).unwrap();
        assert_eq!(mssc_greedy(&inst).unwrap().order, vec![1, 0]);
    }

    #[test]
    fn universal_set_is_optimal() {
        let inst = MsscInstance::<i128>::uniform(3, sets(3, &[&[0], &[0, 1, 2], &[1]])).unwrap();
        let o = mssc_optimal(&inst).unwrap();
        assert_eq!(o.order, vec![1]);
        assert_eq!(mssc_cost(&inst, &o).unwrap().value(), Rational::from_int(1));
    }

    #[test]
    fn optimal_budget() {
        let inst = MsscInstance::<i128>::uniform(3, sets(3, &[&[0], &[1], &[2]])).unwrap();
        assert!(matches!(mssc_optimal_with_budget(&inst, 1), Err(Error::BudgetExceeded { .. })));
    }
}
