//! Line-oriented audit reports: `check_name level pass|fail lhs rhs slack`.

use std::fmt;

use crate::num::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct AuditLine {
    pub check: String,
    /// Level, recursion depth, or other index the check is scoped to.
    pub level: Option<usize>,
    pub pass: bool,
    pub lhs: String,
    pub rhs: String,
    pub slack: String,
}

impl AuditLine {
    /// Passes iff `lhs <= rhs`; slack is `rhs - lhs`.
    pub fn le<V: Value>(check: &str, level: Option<usize>, lhs: &V, rhs: &V) -> Self {
        Self::build(check, level, lhs <= rhs, lhs, rhs)
    }

    /// Passes iff `lhs < rhs`.
    pub fn lt<V: Value>(check: &str, level: Option<usize>, lhs: &V, rhs: &V) -> Self {
        Self::build(check, level, lhs < rhs, lhs, rhs)
    }

    /// Passes iff `lhs == rhs`.
    pub fn eq<V: Value>(check: &str, level: Option<usize>, lhs: &V, rhs: &V) -> Self {
        Self::build(check, level, lhs == rhs, lhs, rhs)
    }

    /// `lhs <= rhs` where the right side is an irrational bound evaluated in
    /// double precision; the comparison itself is exact against that double.
    pub fn le_bound<V: Value>(check: &str, level: Option<usize>, lhs: &V, rhs: f64) -> Self {
        let r = V::from_f64(rhs);
        Self::build(check, level, rhs.is_finite() && *lhs <= r, lhs, &r)
    }

    /// A yes/no structural check with free-form sides.
    pub fn flag(check: &str, level: Option<usize>, pass: bool, lhs: impl ToString, rhs: impl ToString) -> Self {
        Self {
            check: check.to_string(),
            level,
            pass,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            slack: "-".to_string(),
        }
    }

    fn build<V: Value>(check: &str, level: Option<usize>, pass: bool, lhs: &V, rhs: &V) -> Self {
        Self {
            check: check.to_string(),
            level,
            pass,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            slack: (rhs.clone() - lhs.clone()).to_string(),
        }
    }

    /// Renders numeric sides as decimals.
    pub fn to_float_string(&self) -> String {
        let f = |s: &str| match crate::num::parse_rational(s) {
            Some(r) => format!("{:.6}", crate::num::rational_to_f64(&r)),
            None => s.to_string(),
        };
        format!(
            "{} {} {} {} {} {}",
            self.check,
            self.level.map_or("-".to_string(), |l| l.to_string()),
            if self.pass { "pass" } else { "fail" },
            f(&self.lhs),
            f(&self.rhs),
            f(&self.slack)
        )
    }
}

impl fmt::Display for AuditLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.check,
            self.level.map_or("-".to_string(), |l| l.to_string()),
            if self.pass { "pass" } else { "fail" },
            self.lhs,
            self.rhs,
            self.slack
        )
    }
}

/// True iff every line passes.
pub fn all_pass(lines: &[AuditLine]) -> bool {
    lines.iter().all(|l| l.pass)
}
