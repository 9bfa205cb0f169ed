//! Decision-tree instances: weighted hypotheses and K-ary tests.

use std::fmt;

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::num::{Mass, Rational, Value};

/// A weighted identification instance.
///
/// Hypotheses and tests are 0-based internally; answers are stored in `0..k`.
/// Weights are kept as masses over a shared denominator (see [`Mass`]).
/// Validity is advisory: construction only checks the shape, and
/// [`DTInstance::validate`] reports every violated invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct DTInstance<M: Mass = i128> {
    k: usize,
    masses: Vec<M>,
    denominator: M,
    tests: Vec<Vec<u16>>,
}

/// Instance with exact rational weights.
pub type ExactInstance = DTInstance<i128>;
/// Instance with floating-point weights.
pub type FloatInstance = DTInstance<f64>;

impl<M: Mass> DTInstance<M> {
    /// Builds an instance from normalized weights and 0-based answer vectors.
    pub fn new(k: usize, weights: &[M::Value], tests: Vec<Vec<u16>>) -> Result<Self> {
        let (masses, denominator) = M::from_weights(weights)?;
        Self::from_masses(k, masses, denominator, tests)
    }

    /// Builds an instance whose weight for hypothesis `h` is `masses[h] / denominator`.
    pub fn from_masses(k: usize, masses: Vec<M>, denominator: M, tests: Vec<Vec<u16>>) -> Result<Self> {
        let n = masses.len();
        if k > u16::MAX as usize + 1 {
            return Err(Error::InvalidParameter(format!("K = {k} is too large")));
        }
        if denominator <= M::zero() {
            return Err(Error::InvalidParameter("weight denominator must be positive".into()));
        }
        for (j, t) in tests.iter().enumerate() {
            if t.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "test {} has {} answers, expected {n}",
                    j + 1,
                    t.len()
                )));
            }
            if let Some(h) = t.iter().position(|&a| a as usize >= k) {
                return Err(Error::InvalidParameter(format!(
                    "test {} gives hypothesis {} an answer outside 1..{k}",
                    j + 1,
                    h + 1
                )));
            }
        }
        Ok(Self { k, masses, denominator, tests })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn m(&self) -> usize {
        self.tests.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mass(&self, h: usize) -> M {
        self.masses[h]
    }

    pub fn masses(&self) -> &[M] {
        &self.masses
    }

    pub fn denominator(&self) -> M {
        self.denominator
    }

    pub fn weight(&self, h: usize) -> M::Value {
        self.masses[h].over(self.denominator)
    }

    pub fn weights(&self) -> Vec<M::Value> {
        (0..self.n()).map(|h| self.weight(h)).collect()
    }

    /// Answer of test `j` on hypothesis `h`, in `0..k`.
    pub fn answer(&self, j: usize, h: usize) -> usize {
        self.tests[j][h] as usize
    }

    pub fn test(&self, j: usize) -> &[u16] {
        &self.tests[j]
    }

    pub fn tests(&self) -> &[Vec<u16>] {
        &self.tests
    }

    pub fn full_set(&self) -> HypothesisSet {
        HypothesisSet::full(self.n())
    }

    pub fn mass_of(&self, set: &HypothesisSet) -> M {
        let mut total = M::zero();
        for h in set {
            total += self.masses[h];
        }
        total
    }

    /// Normalized weight p(S).
    pub fn weight_of(&self, set: &HypothesisSet) -> M::Value {
        self.mass_of(set).over(self.denominator)
    }

    pub fn total_weight(&self) -> M::Value {
        self.weight_of(&self.full_set())
    }

    pub fn p_min(&self) -> M::Value {
        let m = self.masses.iter().copied().fold(None, |acc: Option<M>, x| match acc {
            Some(a) if a <= x => Some(a),
            _ => Some(x),
        });
        m.map_or_else(M::Value::zero, |m| m.over(self.denominator))
    }

    pub fn p_max(&self) -> M::Value {
        let m = self.masses.iter().copied().fold(None, |acc: Option<M>, x| match acc {
            Some(a) if a >= x => Some(a),
            _ => Some(x),
        });
        m.map_or_else(M::Value::zero, |m| m.over(self.denominator))
    }

    /// p_max / p_min, or `None` when some weight is zero.
    pub fn weight_ratio(&self) -> Option<M::Value> {
        let lo = self.p_min();
        if lo <= M::Value::zero() {
            return None;
        }
        Some(self.p_max() / lo)
    }

    pub fn is_uniform(&self) -> bool {
        self.masses.windows(2).all(|w| w[0] == w[1])
    }

    pub fn has_positive_weights(&self) -> bool {
        self.masses.iter().all(|&m| m > M::zero())
    }

    /// A pair of hypotheses in `set` that no test separates, if any.
    pub fn undistinguished_pair(&self, set: &HypothesisSet) -> Option<(usize, usize)> {
        self.undistinguished_pairs(set, 1).into_iter().next()
    }

    /// Pairs within `set` that share every answer, at most `limit` of them.
    pub fn undistinguished_pairs(&self, set: &HypothesisSet, limit: usize) -> Vec<(usize, usize)> {
        let mut members: Vec<usize> = set.iter().collect();
        members.sort_by(|&a, &b| {
            self.tests
                .iter()
                .map(|t| t[a])
                .cmp(self.tests.iter().map(|t| t[b]))
                .then(a.cmp(&b))
        });
        let same = |a: usize, b: usize| self.tests.iter().all(|t| t[a] == t[b]);
        let mut pairs = Vec::new();
        let mut start = 0;
        while start < members.len() && pairs.len() < limit {
            let mut end = start + 1;
            while end < members.len() && same(members[start], members[end]) {
                end += 1;
            }
            let mut group = members[start..end].to_vec();
            group.sort_unstable();
            'outer: for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    if pairs.len() >= limit {
                        break 'outer;
                    }
                    pairs.push((a, b));
                }
            }
            start = end;
        }
        pairs.sort_unstable();
        pairs
    }

    /// Reports every violated instance invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.n() == 0 {
            issues.push(Issue::NoHypotheses);
        }
        if self.m() == 0 {
            issues.push(Issue::NoTests);
        }
        if self.k < 2 {
            issues.push(Issue::BranchingTooSmall(self.k));
        }
        for (h, &m) in self.masses.iter().enumerate() {
            if m < M::zero() {
                issues.push(Issue::NegativeWeight(h));
            }
        }
        let total = self.total_weight();
        let normalized = if M::Value::is_exact() {
            total == M::Value::one()
        } else {
            (total.to_f64() - 1.0).abs() <= 1e-9
        };
        if !normalized {
            issues.push(Issue::NotNormalized(total.to_f64()));
        }
        for (a, b) in self.undistinguished_pairs(&self.full_set(), usize::MAX) {
            issues.push(Issue::Undistinguished(a, b));
        }
        ValidationReport { issues }
    }

    /// The sub-instance induced by `set`, as a view over this instance.
    pub fn restrict(&self, set: &HypothesisSet) -> Result<Restriction<'_, M>> {
        if set.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        if set.universe() != self.n() {
            return Err(Error::InvalidParameter("restriction set has the wrong width".into()));
        }
        Ok(Restriction {
            parent: self,
            set: set.clone(),
            mass: self.mass_of(set),
        })
    }

    /// Raises small weights to `1/(n-1)^2` and renormalizes.
    pub fn round_weights(&self) -> Result<Self> {
        let n = self.n();
        if n < 2 {
            return Err(Error::RoundingUndefined);
        }
        let floor = M::Value::from_ratio(1, ((n - 1) * (n - 1)) as i64);
        let raised: Vec<M::Value> = self
            .weights()
            .into_iter()
            .map(|w| M::Value::max_of(w, floor.clone()))
            .collect();
        let total = raised.iter().cloned().fold(M::Value::zero(), |a, b| a + b);
        let rounded: Vec<M::Value> = raised.into_iter().map(|w| w / total.clone()).collect();
        Self::new(self.k, &rounded, self.tests.clone())
    }

    /// Same instance in floating-point mode.
    pub fn to_float(&self) -> FloatInstance {
        let den = self.denominator.to_f64();
        DTInstance {
            k: self.k,
            masses: self.masses.iter().map(|m| m.to_f64() / den).collect(),
            denominator: 1.0,
            tests: self.tests.clone(),
        }
    }

    /// Weights as exact rationals (float weights convert exactly).
    pub fn rational_weights(&self) -> Vec<Rational> {
        self.weights().iter().map(Value::to_rational).collect()
    }
}

/// The instance induced by a nonempty hypothesis set.
///
/// Hypotheses keep their original indices; weights stay unnormalized and
/// [`Restriction::normalizer`] gives p(H).
#[derive(Clone, Debug)]
pub struct Restriction<'a, M: Mass> {
    parent: &'a DTInstance<M>,
    set: HypothesisSet,
    mass: M,
}

impl<'a, M: Mass> Restriction<'a, M> {
    pub fn parent(&self) -> &'a DTInstance<M> {
        self.parent
    }

    pub fn set(&self) -> &HypothesisSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn normalizer(&self) -> M::Value {
        self.mass.over(self.parent.denominator)
    }

    pub fn original_indices(&self) -> Vec<usize> {
        self.set.iter().collect()
    }

    /// Ratio of the largest to smallest weight inside the restriction.
    pub fn weight_ratio(&self) -> Option<M::Value> {
        let ws: Vec<M> = self.set.iter().map(|h| self.parent.mass(h)).collect();
        let lo = ws.iter().copied().fold(ws[0], |a, b| if b < a { b } else { a });
        let hi = ws.iter().copied().fold(ws[0], |a, b| if b > a { b } else { a });
        if lo <= M::zero() {
            return None;
        }
        Some(hi.over(self.parent.denominator) / lo.over(self.parent.denominator))
    }

    /// A reindexed copy: hypothesis `i` is the `i`-th smallest member of H.
    /// Weights are not renormalized.
    pub fn materialize(&self) -> DTInstance<M> {
        let idx = self.original_indices();
        DTInstance {
            k: self.parent.k,
            masses: idx.iter().map(|&h| self.parent.mass(h)).collect(),
            denominator: self.parent.denominator,
            tests: self
                .parent
                .tests
                .iter()
                .map(|t| idx.iter().map(|&h| t[h]).collect())
                .collect(),
        }
    }
}

/// An invariant violated by an instance.
#[derive(Clone, Debug, PartialEq)]
pub enum Issue {
    NoHypotheses,
    NoTests,
    BranchingTooSmall(usize),
    NegativeWeight(usize),
    NotNormalized(f64),
    Undistinguished(usize, usize),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NoHypotheses => write!(f, "instance has no hypotheses"),
            Issue::NoTests => write!(f, "instance has no tests"),
            Issue::BranchingTooSmall(k) => write!(f, "branching factor K = {k} is below 2"),
            Issue::NegativeWeight(h) => write!(f, "hypothesis {} has negative weight", h + 1),
            Issue::NotNormalized(s) => write!(f, "weights sum to {s}, not 1"),
            Issue::Undistinguished(a, b) => {
                write!(f, "hypotheses {} and {} are not distinguished by any test", a + 1, b + 1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn undistinguished(&self) -> Vec<(usize, usize)> {
        self.issues
            .iter()
            .filter_map(|i| match i {
                Issue::Undistinguished(a, b) => Some((*a, *b)),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return writeln!(f, "valid");
        }
        for issue in &self.issues {
            writeln!(f, "invalid: {issue}")?;
        }
        Ok(())
    }
}
