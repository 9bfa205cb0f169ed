//! Weighted greedy set cover and an exact minimum-cardinality cover.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::mssc::MsscInstance;
use crate::num::Mass;

/// Repeatedly takes the set covering the most remaining weight (ties to the
/// smallest index) and returns the selection order.
pub fn weighted_greedy_cover<M: Mass>(inst: &MsscInstance<M>) -> Result<Vec<usize>> {
    let mut uncovered = inst.universe().clone();
    let mut picks = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, M, usize)> = None;
        for (j, s) in inst.sets().iter().enumerate() {
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
        let Some((j, _, _)) = best else {
            return Err(Error::Uncovered(uncovered.first().expect("nonempty")));
        };
        uncovered = uncovered.difference(&inst.sets()[j]);
        picks.push(j);
    }
    Ok(picks)
}

/// Default cap on covered-states explored by [`optimal_cover_size`].
pub const COVER_STATE_BUDGET: usize = 1 << 22;

/// Minimum number of sets covering the universe, by breadth-first search over
/// covered subsets.
pub fn optimal_cover_size<M: Mass>(inst: &MsscInstance<M>) -> Result<usize> {
    optimal_cover_size_with_budget(inst, COVER_STATE_BUDGET)
}

pub fn optimal_cover_size_with_budget<M: Mass>(inst: &MsscInstance<M>, max_states: usize) -> Result<usize> {
    inst.check_coverable()?;
    let universe = inst.universe();
    let sets: Vec<HypothesisSet> = inst
        .sets()
        .iter()
        .map(|s| s.intersection(universe))
        .filter(|s| !s.is_empty())
        .collect();
    let mut frontier = vec![HypothesisSet::empty(universe.universe())];
    let mut seen: HashSet<HypothesisSet> = frontier.iter().cloned().collect();
    let mut depth = 0;
    loop {
        if frontier.iter().any(|c| c == universe) {
            return Ok(depth);
        }
        depth += 1;
        let mut next = Vec::new();
        for c in &frontier {
            for s in &sets {
                if s.is_subset(c) {
                    continue;
                }
                let u = c.union(s);
                if seen.insert(u.clone()) {
                    if seen.len() > max_states {
                        return Err(Error::BudgetExceeded {
                            expansions: seen.len() as u64,
                            memo_entries: seen.len(),
                        });
                    }
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
}

/// `1 + ln(p*/p_min)`, where p* is the heaviest set and p_min the lightest
/// element; `None` if some element has zero weight.
pub fn greedy_cover_factor<M: Mass>(inst: &MsscInstance<M>) -> Option<f64> {
    let (lo, _) = inst.weight_range()?;
    if lo <= M::zero() {
        return None;
    }
    let p_star = inst
        .sets()
        .iter()
        .map(|s| inst.mass_of(s).to_f64())
        .fold(0.0f64, f64::max);
    Some(1.0 + (p_star / lo.to_f64()).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(width: usize, xs: &[&[usize]]) -> MsscInstance<i128> {
        let sets = xs.iter().map(|s| HypothesisSet::from_indices(width, s.iter().copied())).collect();
        MsscInstance::uniform(width, sets).unwrap()
    }

    #[test]
    fn single_covering_set() {
        let i = inst(3, &[&[0, 1, 2]]);
        assert_eq!(weighted_greedy_cover(&i).unwrap(), vec![0]);
        assert_eq!(optimal_cover_size(&i).unwrap(), 1);
    }

    #[test]
    fn overlapping_pairs() {
        let i = inst(3, &[&[0, 1], &[1, 2], &[2]]);
        assert_eq!(weighted_greedy_cover(&i).unwrap(), vec![0, 1]);
        assert_eq!(optimal_cover_size(&i).unwrap(), 2);
    }

    #[test]
    fn disjoint_singletons_and_decoys() {
        let i = inst(4, &[&[0], &[1], &[2], &[3]]);
        assert_eq!(optimal_cover_size(&i).unwrap(), 4);
        let i = inst(4, &[&[0, 1], &[0, 1, 2, 3], &[3]]);
        assert_eq!(optimal_cover_size(&i).unwrap(), 1);
    }

    #[test]
    fn layered_family_fools_greedy() {
        // Two rows of seven against columns of sizes 2, 4, 8: greedy takes the columns.
        let i = inst(
            14,
            &[
                &[0, 1, 2, 3, 4, 5, 6],
                &[7, 8, 9, 10, 11, 12, 13],
                &[0, 7],
                &[1, 2, 8, 9],
                &[3, 4, 5, 6, 10, 11, 12, 13],
            ],
        );
        let g = weighted_greedy_cover(&i).unwrap();
        assert_eq!(g, vec![4, 3, 2]);
        assert_eq!(optimal_cover_size(&i).unwrap(), 2);
        let f = greedy_cover_factor(&i).unwrap();
        assert!((g.len() as f64) <= f * 2.0);
    }

    #[test]
    fn uncoverable_universe() {
        let i = inst(3, &[&[0, 1]]);
        assert!(matches!(weighted_greedy_cover(&i), Err(Error::Uncovered(2))));
        assert!(matches!(optimal_cover_size(&i), Err(Error::Uncovered(2))));
    }
}
