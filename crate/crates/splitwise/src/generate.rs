//! Instance generators: the adversarial grid family that baits the greedy
//! rule, the set-cover reduction family with a large weight ratio, and seeded
//! random instances.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::instance::ExactInstance;
use crate::num::{Mass, Rational, Value};

/// Which family a grid test belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridTest {
    /// Isolates one hypothesis outside the grid.
    Isolated { hypothesis: usize },
    /// Column membership.
    Column { column: usize },
    /// Column membership and bit `bit` of the (1-based) row number.
    RowBit { column: usize, bit: u32 },
    /// Row membership in a good set of rows (1-based rows, ascending).
    GoodSet { rows: Vec<usize> },
}

impl GridTest {
    pub fn type_number(&self) -> u8 {
        match self {
            GridTest::Isolated { .. } => 1,
            GridTest::Column { .. } => 2,
            GridTest::RowBit { .. } => 3,
            GridTest::GoodSet { .. } => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridInstance {
    pub instance: ExactInstance,
    pub n_star: usize,
    pub rows: usize,
    pub columns: usize,
    /// `kinds[j]` describes test `j`.
    pub kinds: Vec<GridTest>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GridOptions {
    /// Accept `c_star < log2 n`; the construction is still well defined.
    pub allow_small_c_star: bool,
}

/// Good sets of rows `1..=r` in breadth-first order: `[r]` first, then each
/// split into `1 + ⌊r'/c⌋` lowest rows and the rest.
pub fn good_sets(r: usize, c_star: usize) -> Vec<Vec<usize>> {
    let mut out = vec![(1..=r).collect::<Vec<_>>()];
    let mut i = 0;
    while i < out.len() {
        let set = out[i].clone();
        if set.len() > 1 {
            let first = (1 + set.len() / c_star).min(set.len());
            out.push(set[..first].to_vec());
            if first < set.len() {
                out.push(set[first..].to_vec());
            }
        }
        i += 1;
    }
    out
}

pub fn gen_grid_adversarial(n: usize, c_star: usize, opts: GridOptions) -> Result<GridInstance> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!("grid family needs n >= 16, got {n}")));
    }
    if c_star == 0 || c_star > n {
        return Err(Error::InvalidParameter(format!("c_star must lie in [log2 n, n], got {c_star}")));
    }
    if !opts.allow_small_c_star && (c_star as f64) < (n as f64).log2() {
        return Err(Error::InvalidParameter(format!(
            "c_star = {c_star} is below log2 n = {:.3}",
            (n as f64).log2()
        )));
    }
    let n_star = n / c_star * c_star;
    let rows = n_star / c_star;
    let row_of = |h: usize| h / c_star + 1;
    let col_of = |h: usize| h % c_star;
    let on_grid = |h: usize| h < n_star;

    let mut tests = Vec::new();
    let mut kinds = Vec::new();
    let mut push = |kind: GridTest, f: &dyn Fn(usize) -> bool| {
        tests.push((0..n).map(|h| if f(h) { 0u16 } else { 1 }).collect::<Vec<u16>>());
        kinds.push(kind);
    };
    for h in n_star..n {
        push(GridTest::Isolated { hypothesis: h }, &|g| g == h);
    }
    for c in 0..c_star {
        push(GridTest::Column { column: c }, &|g| on_grid(g) && col_of(g) == c);
    }
    let top_bit = rows.ilog2();
    for c in 0..c_star {
        for t in 0..=top_bit {
            push(GridTest::RowBit { column: c, bit: t }, &|g| {
                on_grid(g) && col_of(g) == c && (row_of(g) >> t) & 1 == 1
            });
        }
    }
    for set in good_sets(rows, c_star) {
        let (lo, hi) = (set[0], *set.last().expect("good sets are nonempty"));
        push(GridTest::GoodSet { rows: set }, &|g| on_grid(g) && (lo..=hi).contains(&row_of(g)));
    }
    let instance = ExactInstance::from_masses(2, vec![1; n], n as i128, tests)?;
    Ok(GridInstance { instance, n_star, rows, columns: c_star, kinds })
}

#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub instance: ExactInstance,
    pub q: usize,
    pub ell: usize,
    pub n: usize,
    /// p_max / p_min, exact.
    pub ratio: Rational,
    /// Index of hypothesis (h1, ⊥) for each h1.
    pub bottoms: Vec<usize>,
}

/// ⌊x⌋ with a tolerance for values that are integers up to rounding error.
fn floor_tolerant(x: f64) -> f64 {
    (x + 1e-9).floor()
}

/// Builds the weighted instance on `[ℓ] × ([q] × [n0] ∪ {⊥})` from a set-cover
/// instance over elements `0..n0`.
pub fn gen_setcover_reduction(n0: usize, sets: &[HypothesisSet], r: f64) -> Result<ReductionInstance> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0,1), got {r}")));
    }
    if n0 == 0 || sets.iter().any(|s| s.universe() != n0) {
        return Err(Error::InvalidParameter("set-cover sets must range over 0..n0".into()));
    }
    let mut covered = HypothesisSet::empty(n0);
    for s in sets {
        covered.union_with(s);
    }
    if let Some(e) = HypothesisSet::full(n0).difference(&covered).first() {
        return Err(Error::Uncovered(e));
    }
    let q = floor_tolerant((n0 as f64).log2() / r) as usize;
    let scale = (n0 as f64).powf(1.0 / r);
    let ell = floor_tolerant(scale / (n0 * q + 1) as f64) as usize;
    if q == 0 || ell == 0 {
        return Err(Error::ReductionTooSmall);
    }
    let block = q * n0 + 1;
    let n = ell * block;
    if n > 1 << 16 {
        return Err(Error::InvalidParameter(format!("reduction would have {n} hypotheses")));
    }
    // Hypothesis (h1, h2, h3) sits at h1·block + h2·n0 + h3; (h1, ⊥) at h1·block + q·n0.
    let bottoms: Vec<usize> = (0..ell).map(|h1| h1 * block + q * n0).collect();

    // 1/(2n) + 1/(2ℓ) = (ℓ + n)/(2nℓ) and 1/(2n) = ℓ/(2nℓ).
    let den = 2 * n as i128 * ell as i128;
    let mut masses = vec![ell as i128; n];
    for &b in &bottoms {
        masses[b] = (ell + n) as i128;
    }

    let decode = |h: usize| -> Option<(usize, usize, usize)> {
        let (h1, rest) = (h / block, h % block);
        (rest < q * n0).then(|| (h1, rest / n0, rest % n0))
    };
    let mut tests = Vec::new();
    let element_bits = n0.ilog2();
    for i1 in 0..ell {
        for i2 in 0..q {
            for s in sets {
                tests.push(
                    (0..n)
                        .map(|h| u16::from(!matches!(decode(h), Some((a, b, c)) if a == i1 && b == i2 && s.contains(c))))
                        .collect::<Vec<u16>>(),
                );
            }
        }
    }
    for i1 in 0..ell {
        for i2 in 0..q {
            for s in sets {
                for t in 0..=element_bits {
                    tests.push(
                        (0..n)
                            .map(|h| {
                                let hit = matches!(decode(h), Some((a, b, c))
                                    if a == i1 && b == i2 && s.contains(c) && ((c + 1) >> t) & 1 == 1);
                                u16::from(!hit)
                            })
                            .collect(),
                    );
                }
            }
        }
    }
    for t in 0..=ell.ilog2() {
        tests.push((0..n).map(|h| u16::from(((h / block + 1) >> t) & 1 != 1)).collect());
    }
    let instance = ExactInstance::from_masses(2, masses, den, tests)?;
    let ratio = Rational::from_ratio((ell + n) as i64, ell as i64);
    Ok(ReductionInstance { instance, q, ell, n, ratio, bottoms })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightProfile {
    Uniform,
    /// Independent integer masses in 1..=20.
    Skew,
    /// Hypothesis 0 is `ratio` times heavier than each of the others.
    TwoTier { ratio: f64 },
}

impl WeightProfile {
    pub fn name(&self) -> &'static str {
        match self {
            WeightProfile::Uniform => "uniform",
            WeightProfile::Skew => "skew",
            WeightProfile::TwoTier { .. } => "two-tier",
        }
    }
}

pub const RANDOM_ATTEMPTS: usize = 100;

/// A seeded random instance with independent uniform answer vectors,
/// resampled until every pair of hypotheses is separated.
pub fn gen_random(n: usize, m: usize, k: usize, seed: u64, profile: WeightProfile) -> Result<ExactInstance> {
    if n == 0 || m == 0 || k < 2 || k > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!("need n >= 1, m >= 1, K >= 2; got n={n} m={m} K={k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masses: Vec<i128> = match profile {
        WeightProfile::Uniform => vec![1; n],
        WeightProfile::Skew => (0..n).map(|_| rng.gen_range(1..=20)).collect(),
        WeightProfile::TwoTier { ratio } => {
            if !(ratio.is_finite() && ratio >= 1.0) {
                return Err(Error::InvalidParameter(format!("two-tier ratio must be >= 1, got {ratio}")));
            }
            let r = Ratio::<i64>::approximate_float(ratio)
                .ok_or_else(|| Error::NotRepresentable(format!("ratio {ratio}")))?;
            let mut v = vec![i128::from(*r.denom()); n];
            v[0] = i128::from(*r.numer());
            v
        }
    };
    let den = masses.iter().sum::<i128>();
    for _ in 0..RANDOM_ATTEMPTS {
        let tests: Vec<Vec<u16>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..k as u16)).collect())
            .collect();
        let inst = ExactInstance::from_masses(k, masses.clone(), den, tests)?;
        if inst.validate().ok() {
            return Ok(inst);
        }
    }
    Err(Error::GenerationFailed(RANDOM_ATTEMPTS))
}

/// p_max / p_min of an exact instance.
pub fn weight_ratio(inst: &ExactInstance) -> Option<Rational> {
    let lo = inst.masses().iter().copied().min()?;
    let hi = inst.masses().iter().copied().max()?;
    (!lo.is_zero()).then(|| Rational::from_ratio(hi as i64, lo as i64))
}
