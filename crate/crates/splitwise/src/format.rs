//! Text and JSON formats for instances, and the text format for min-sum set
//! cover instances.
//!
//! Instance text:
//!
//! ```text
//! n m K
//! w_1 ... w_n          (decimals or p/q)
//! a_11 ... a_1n        (m lines, answers in 1..K)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. The JSON mirror is
//! `{"n", "weights": [strings], "k", "tests": [[answers]]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::mssc::MsscInstance;
use crate::num::{parse_rational, Mass, Rational, Value};

/// A parsed instance before choosing an arithmetic mode. Answers are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct RawInstance {
    pub k: usize,
    pub weights: Vec<Rational>,
    pub tests: Vec<Vec<u16>>,
}

impl RawInstance {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Builds the instance in either mode; float mode rounds each weight once.
    pub fn build<M: Mass>(&self) -> Result<DTInstance<M>> {
        let weights: Vec<M::Value> = self.weights.iter().map(M::Value::from_rational).collect();
        DTInstance::new(self.k, &weights, self.tests.clone())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_instance_text(text: &str) -> Result<RawInstance> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n m K`"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad header token `{t}`"))))
        .collect::<Result<_>>()?;
    let [n, m, k] = nums[..] else {
        return Err(parse_err(ln, "header must be `n m K`"));
    };
    if k > u16::MAX as usize {
        return Err(parse_err(ln, format!("K = {k} is too large")));
    }
    let (ln, wline) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing weight line"))?;
    let weights: Vec<Rational> = wline
        .split_whitespace()
        .map(|t| parse_rational(t).ok_or_else(|| parse_err(ln, format!("bad weight `{t}`"))))
        .collect::<Result<_>>()?;
    if weights.len() != n {
        return Err(parse_err(ln, format!("expected {n} weights, found {}", weights.len())));
    }
    let mut tests = Vec::with_capacity(m);
    let mut last = ln;
    for j in 0..m {
        let (ln, tline) = lines
            .next()
            .ok_or_else(|| parse_err(last + 1, format!("missing answer line for test {}", j + 1)))?;
        last = ln;
        let answers: Vec<u16> = tline
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(a) if (1..=k).contains(&a) => Ok((a - 1) as u16),
                _ => Err(parse_err(ln, format!("answer `{t}` outside 1..{k}"))),
            })
            .collect::<Result<_>>()?;
        if answers.len() != n {
            return Err(parse_err(ln, format!("expected {n} answers, found {}", answers.len())));
        }
        tests.push(answers);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after the last test"));
    }
    Ok(RawInstance { k, weights, tests })
}

pub fn write_instance_text<M: Mass>(inst: &DTInstance<M>) -> String {
    let mut out = format!("{} {} {}\n", inst.n(), inst.m(), inst.k());
    let weights: Vec<String> = inst.weights().iter().map(ToString::to_string).collect();
    out.push_str(&weights.join(" "));
    out.push('\n');
    for t in inst.tests() {
        let answers: Vec<String> = t.iter().map(|a| (a + 1).to_string()).collect();
        out.push_str(&answers.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    weights: Vec<String>,
    k: usize,
    tests: Vec<Vec<usize>>,
}

pub fn parse_instance_json(text: &str) -> Result<RawInstance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.weights.len() != doc.n {
        return Err(parse_err(0, format!("expected {} weights, found {}", doc.n, doc.weights.len())));
    }
    let weights = doc
        .weights
        .iter()
        .map(|w| parse_rational(w).ok_or_else(|| parse_err(0, format!("bad weight `{w}`"))))
        .collect::<Result<_>>()?;
    let tests = doc
        .tests
        .iter()
        .enumerate()
        .map(|(j, t)| {
            if t.len() != doc.n {
                return Err(parse_err(0, format!("test {} has {} answers", j + 1, t.len())));
            }
            t.iter()
                .map(|&a| {
                    if (1..=doc.k).contains(&a) {
                        Ok((a - 1) as u16)
                    } else {
                        Err(parse_err(0, format!("answer {a} outside 1..{}", doc.k)))
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(RawInstance { k: doc.k, weights, tests })
}

pub fn write_instance_json<M: Mass>(inst: &DTInstance<M>) -> String {
    let doc = InstanceDoc {
        n: inst.n(),
        weights: inst.weights().iter().map(ToString::to_string).collect(),
        k: inst.k(),
        tests: inst.tests().iter().map(|t| t.iter().map(|&a| a as usize + 1).collect()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

/// Chooses the reader by the first non-space character.
pub fn parse_instance(text: &str) -> Result<RawInstance> {
    if text.trim_start().starts_with('{') {
        parse_instance_json(text)
    } else {
        parse_instance_text(text)
    }
}

/// MSSC text: `|S| M`, a weight line, then `M` lines of 1-based members
/// (a blank line is an empty set).
pub fn parse_mssc_text<M: Mass>(text: &str) -> Result<MsscInstance<M>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    fn next_content<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Option<(usize, &'a str)> {
        lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
    }
    let (ln, header) = next_content(&mut lines).ok_or_else(|| parse_err(1, "missing header `|S| M`"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad header token `{t}`"))))
        .collect::<Result<_>>()?;
    let [size, count] = nums[..] else {
        return Err(parse_err(ln, "header must be `|S| M`"));
    };
    let (ln, wline) = next_content(&mut lines).ok_or_else(|| parse_err(ln + 1, "missing weight line"))?;
    let weights: Vec<M::Value> = wline
        .split_whitespace()
        .map(|t| {
            parse_rational(t)
                .map(|r| M::Value::from_rational(&r))
                .ok_or_else(|| parse_err(ln, format!("bad weight `{t}`")))
        })
        .collect::<Result<_>>()?;
    if weights.len() != size {
        return Err(parse_err(ln, format!("expected {size} weights, found {}", weights.len())));
    }
    let mut sets = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, line) = lines.next().unwrap_or((0, ""));
        let members = line
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(e) if (1..=size).contains(&e) => Ok(e - 1),
                _ => Err(parse_err(ln, format!("member `{t}` outside 1..{size}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(HypothesisSet::from_indices(size, members));
    }
    let (masses, den) = M::from_weights(&weights)?;
    MsscInstance::new(HypothesisSet::full(size), masses, den, sets)
}

/// Writes the universe renumbered to `1..=|S|` in increasing order.
pub fn write_mssc_text<M: Mass>(inst: &MsscInstance<M>) -> String {
    let elems: Vec<usize> = inst.universe().iter().collect();
    let mut out = format!("{} {}\n", elems.len(), inst.sets().len());
    let weights: Vec<String> = elems.iter().map(|&h| inst.weight(h).to_string()).collect();
    out.push_str(&weights.join(" "));
    out.push('\n');
    for s in inst.sets() {
        let members: Vec<String> = elems
            .iter()
            .enumerate()
            .filter(|(_, &h)| s.contains(h))
            .map(|(i, _)| (i + 1).to_string())
            .collect();
        out.push_str(&members.join(" "));
        out.push('\n');
    }
    out
}
