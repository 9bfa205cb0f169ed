//! Exhaustive search for minimum-cost trees that are complete up to a depth
//! budget, memoized on (hypothesis set, remaining depth).

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::Mass;
use crate::tree::{partition, DecisionTree};

#[derive(Clone, Copy, Debug)]
struct Entry<M> {
    /// min Σ_{h∈H} mass(h)·d(h)
    mass: M,
    test: Option<usize>,
}

/// Memoized depth-bounded search. One solver may serve many queries on the
/// same instance; the table is shared between them.
pub struct ExactSolver<'a, M: Mass> {
    inst: &'a DTInstance<M>,
    memo: HashMap<(HypothesisSet, usize), Entry<M>>,
    expansions: u64,
    budget: Option<u64>,
    deadline: Option<Instant>,
}

impl<'a, M: Mass> ExactSolver<'a, M> {
    pub fn new(inst: &'a DTInstance<M>) -> Self {
        Self {
            inst,
            memo: HashMap::new(),
            expansions: 0,
            budget: None,
            deadline: None,
        }
    }

    /// Fails with [`Error::BudgetExceeded`] after this many expansions.
    pub fn with_budget(mut self, max_expansions: u64) -> Self {
        self.budget = Some(max_expansions);
        self
    }

    /// Fails with [`Error::BudgetExceeded`] once the clock passes `deadline`.
    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn instance(&self) -> &'a DTInstance<M> {
        self.inst
    }

    /// Search nodes expanded so far (memo misses on nontrivial subproblems).
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    pub fn memo_entries(&self) -> usize {
        self.memo.len()
    }

    /// Minimum of Σ_{h∈H} mass(h)·d(h) over trees complete w.r.t. H up to depth b.
    pub fn partial_mass(&mut self, set: &HypothesisSet, b: usize) -> Result<M> {
        Ok(self.solve(set, b)?.mass)
    }

    /// C_OPT(H, b).
    pub fn partial_cost(&mut self, set: &HypothesisSet, b: usize) -> Result<M::Value> {
        let mass = self.partial_mass(set, b)?;
        Ok(mass.over(self.inst.mass_of(set)))
    }

    /// C_OPT(H).
    pub fn optimal_cost(&mut self, set: &HypothesisSet) -> Result<M::Value> {
        self.partial_cost(set, set.len().saturating_sub(1))
    }

    pub fn partial_tree(&mut self, set: &HypothesisSet, b: usize) -> Result<DecisionTree> {
        if set.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        self.solve(set, b)?;
        let mut tree = DecisionTree::leaf(set.clone());
        let mut stack = vec![(tree.root(), b)];
        while let Some((v, b)) = stack.pop() {
            let s = tree.consistent_set(v)?.clone();
            if b == 0 || s.len() <= 1 {
                continue;
            }
            let b = b.min(s.len() - 1);
            let j = match self.memo.get(&(s.clone(), b)) {
                Some(e) => e.test.expect("nontrivial entries record a test"),
                None => self.solve(&s, b)?.test.expect("nontrivial entries record a test"),
            };
            for c in tree.split(self.inst, v, j)?.into_iter().rev() {
                stack.push((c, b - 1));
            }
        }
        Ok(tree)
    }

    pub fn optimal_tree(&mut self, set: &HypothesisSet) -> Result<DecisionTree> {
        self.partial_tree(set, set.len().saturating_sub(1))
    }

    fn solve(&mut self, set: &HypothesisSet, b: usize) -> Result<Entry<M>> {
        if b == 0 || set.len() <= 1 {
            return Ok(Entry { mass: M::zero(), test: None });
        }
        // Every splitting query shrinks the set, so deeper budgets change nothing.
        let b = b.min(set.len() - 1);
        if let Some(e) = self.memo.get(&(set.clone(), b)) {
            return Ok(*e);
        }
        self.expansions += 1;
        if self.budget.is_some_and(|cap| self.expansions > cap)
            || (self.expansions % 256 == 1 && self.deadline.is_some_and(|d| Instant::now() > d))
        {
            return Err(Error::BudgetExceeded {
                expansions: self.expansions,
                memo_entries: self.memo.len(),
            });
        }
        let own = self.inst.mass_of(set);
        let mut seen: HashSet<Vec<HypothesisSet>> = HashSet::new();
        let mut best: Option<Entry<M>> = None;
        for j in 0..self.inst.m() {
            let mut parts: Vec<HypothesisSet> = partition(self.inst, set, j).into_iter().map(|(_, s)| s).collect();
            if parts.len() < 2 {
                continue;
            }
            parts.sort_unstable_by_key(|p| p.first());
            if !seen.insert(parts.clone()) {
                continue;
            }
            let mut total = own;
            for p in &parts {
                total += self.solve(p, b - 1)?.mass;
            }
            if best.is_none_or(|e| total < e.mass) {
                best = Some(Entry { mass: total, test: Some(j) });
            }
        }
        let entry = match best {
            Some(e) => e,
            None => {
                let (a, c) = self.inst.undistinguished_pair(set).expect("no splitting test");
                return Err(Error::InvalidAt(a, c));
            }
        };
        self.memo.insert((set.clone(), b), entry);
        Ok(entry)
    }
}

/// A minimum-cost tree over `set` that is complete up to depth `b`.
pub fn partial_tree<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet, b: usize) -> Result<DecisionTree> {
    ExactSolver::new(inst).partial_tree(set, b)
}

/// A minimum-cost complete tree over `set`.
pub fn optimal_tree<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet) -> Result<DecisionTree> {
    ExactSolver::new(inst).optimal_tree(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ExactInstance;
    use crate::num::{Rational, Value};

    fn uniform(n: usize, tests: Vec<Vec<u16>>) -> ExactInstance {
        ExactInstance::from_masses(2, vec![1; n], n as i128, tests).unwrap()
    }

    #[test]
    fn singleton_set_is_a_leaf() {
        let inst = uniform(3, vec![vec![0, 1, 1], vec![1, 0, 1]]);
        let t = partial_tree(&inst, &HypothesisSet::singleton(3, 2), 5).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn singleton_tests_optimum() {
        let inst = uniform(3, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let mut s = ExactSolver::new(&inst);
        assert_eq!(s.partial_cost(&inst.full_set(), 2).unwrap(), Rational::from_ratio(5, 3));
        assert_eq!(s.optimal_cost(&inst.full_set()).unwrap(), Rational::from_ratio(5, 3));
    }

    #[test]
    fn depth_one_budget_with_symmetric_tests() {
        let inst = uniform(4, vec![vec![0, 1, 1, 1], vec![1, 0, 1, 1], vec![1, 1, 0, 1]]);
        let mut s = ExactSolver::new(&inst);
        let t = s.partial_tree(&inst.full_set(), 1).unwrap();
        assert_eq!(t.test(0), Some(0));
        assert_eq!(t.cost(&inst, &inst.full_set()).unwrap().total, Rational::from_int(1));
        assert!(t.is_complete(&inst, &inst.full_set(), Some(1)));
    }

    #[test]
    fn two_hypotheses_and_perfect_split() {
        let inst = uniform(2, vec![vec![0, 1]]);
        let t = optimal_tree(&inst, &inst.full_set()).unwrap();
        assert_eq!(t.cost(&inst, &inst.full_set()).unwrap().total, Rational::from_int(1));
        let inst = uniform(4, vec![vec![0, 1, 1, 1], vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);
        let t = optimal_tree(&inst, &inst.full_set()).unwrap();
        assert_eq!(t.cost(&inst, &inst.full_set()).unwrap().total, Rational::from_int(2));
        assert_eq!(t.test(0), Some(1));
    }

    #[test]
    fn budget_is_enforced() {
        let inst = uniform(4, vec![vec![0, 1, 1, 1], vec![1, 0, 1, 1], vec![1, 1, 0, 1]]);
        let r = ExactSolver::new(&inst).with_budget(1).optimal_tree(&inst.full_set());
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }
}
