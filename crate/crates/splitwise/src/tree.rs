//! Decision trees over a hypothesis set, their costs, and serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypset::HypothesisSet;
use crate::instance::DTInstance;
use crate::num::{Mass, Value};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    test: Option<usize>,
    children: Vec<(u16, NodeId)>,
    parent: Option<(NodeId, u16)>,
    depth: usize,
    consistent: HypothesisSet,
}

impl Node {
    pub fn test(&self) -> Option<usize> {
        self.test
    }

    /// `(answer, child)` pairs in increasing answer order; answers are 0-based.
    pub fn children(&self) -> &[(u16, NodeId)] {
        &self.children
    }

    pub fn parent(&self) -> Option<(NodeId, u16)> {
        self.parent
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn consistent(&self) -> &HypothesisSet {
        &self.consistent
    }

    pub fn is_leaf(&self) -> bool {
        self.test.is_none()
    }
}

/// A rooted decision tree. Node 0 is the root; its consistent set is the
/// hypothesis set the tree was built for. Every node caches L(v).
#[derive(Clone, Debug)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Leaf-depth cost of a tree with respect to a hypothesis set.
#[derive(Clone, Debug, PartialEq)]
pub struct CostBreakdown<V> {
    pub total: V,
    /// `(hypothesis, depth of its deepest consistent vertex)`.
    pub depths: Vec<(usize, usize)>,
    pub normalizer: V,
}

impl DecisionTree {
    pub fn leaf(set: HypothesisSet) -> Self {
        Self {
            nodes: vec![Node {
                test: None,
                children: Vec::new(),
                parent: None,
                depth: 0,
                consistent: set,
            }],
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: NodeId) -> Result<&Node> {
        self.nodes.get(v).ok_or(Error::ForeignNode(v))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v].is_leaf()
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.nodes[v].depth
    }

    pub fn test(&self, v: NodeId) -> Option<usize> {
        self.nodes[v].test
    }

    pub fn children(&self, v: NodeId) -> &[(u16, NodeId)] {
        &self.nodes[v].children
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v].parent.map(|(p, _)| p)
    }

    pub fn child(&self, v: NodeId, answer: usize) -> Option<NodeId> {
        self.nodes[v]
            .children
            .iter()
            .find(|(a, _)| *a as usize == answer)
            .map(|&(_, c)| c)
    }

    /// Cached L(v).
    pub fn consistent_set(&self, v: NodeId) -> Result<&HypothesisSet> {
        Ok(&self.node(v)?.consistent)
    }

    /// L(v) recomputed by filtering the root set through the path's answers.
    pub fn replay_consistent_set<M: Mass>(&self, inst: &DTInstance<M>, v: NodeId) -> Result<HypothesisSet> {
        self.node(v)?;
        let mut path = Vec::new();
        let mut cur = v;
        while let Some((p, a)) = self.nodes[cur].parent {
            path.push((self.nodes[p].test.expect("parent is interior"), a as usize));
            cur = p;
        }
        let root = &self.nodes[0].consistent;
        Ok(HypothesisSet::from_indices(
            root.universe(),
            root.iter().filter(|&h| path.iter().all(|&(j, a)| inst.answer(j, h) == a)),
        ))
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].is_leaf())
    }

    pub fn interior(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&v| !self.nodes[v].is_leaf())
    }

    /// Node ids in preorder, children visited by increasing answer.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.nodes[v].children.iter().rev().map(|&(_, c)| c));
        }
        out
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Vertices from the root down to `v`, inclusive.
    pub fn path_to(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Turns leaf `v` into an interior node querying test `j`; one child per
    /// answer realized in L(v). Returns the new children.
    pub fn split<M: Mass>(&mut self, inst: &DTInstance<M>, v: NodeId, j: usize) -> Result<Vec<NodeId>> {
        self.node(v)?;
        if j >= inst.m() {
            return Err(Error::TestOutOfRange(j));
        }
        if !self.nodes[v].is_leaf() {
            return Err(Error::MalformedTree(format!("node {v} is already interior")));
        }
        let parts = partition(inst, &self.nodes[v].consistent, j);
        if parts.len() < 2 {
            return Err(Error::MalformedTree(format!("test {} does not split node {v}", j + 1)));
        }
        let depth = self.nodes[v].depth + 1;
        let mut ids = Vec::with_capacity(parts.len());
        for (a, set) in parts {
            let id = self.nodes.len();
            self.nodes.push(Node {
                test: None,
                children: Vec::new(),
                parent: Some((v, a as u16)),
                depth,
                consistent: set,
            });
            self.nodes[v].children.push((a as u16, id));
            ids.push(id);
        }
        self.nodes[v].test = Some(j);
        Ok(ids)
    }

    /// Replaces leaf `v` by a copy of `sub`, whose root set must equal L(v).
    pub fn attach(&mut self, v: NodeId, sub: &DecisionTree) -> Result<()> {
        self.node(v)?;
        if !self.nodes[v].is_leaf() {
            return Err(Error::MalformedTree(format!("node {v} is not a leaf")));
        }
        if sub.nodes[0].consistent != self.nodes[v].consistent {
            return Err(Error::MalformedTree(format!(
                "attached subtree does not cover the hypotheses of node {v}"
            )));
        }
        let base = self.nodes[v].depth;
        let offset = self.nodes.len();
        let remap = |id: NodeId| if id == 0 { v } else { offset + id - 1 };
        for (id, n) in sub.nodes.iter().enumerate() {
            let children: Vec<(u16, NodeId)> = n.children.iter().map(|&(a, c)| (a, remap(c))).collect();
            if id == 0 {
                self.nodes[v].test = n.test;
                self.nodes[v].children = children;
            } else {
                self.nodes.push(Node {
                    test: n.test,
                    children,
                    parent: n.parent.map(|(p, a)| (remap(p), a)),
                    depth: n.depth + base,
                    consistent: n.consistent.clone(),
                });
            }
        }
        Ok(())
    }

    /// Overwrites a cached consistent set without any check. Exists to build
    /// deliberately corrupted trees for negative-control audits.
    pub fn overwrite_consistent_set(&mut self, v: NodeId, set: HypothesisSet) -> Result<()> {
        self.node(v)?;
        self.nodes[v].consistent = set;
        Ok(())
    }

    /// The vertex `h` ends at when answering every test on its way down.
    pub fn deepest_consistent<M: Mass>(&self, inst: &DTInstance<M>, h: usize) -> Result<NodeId> {
        if h >= inst.n() {
            return Err(Error::HypothesisOutOfRange(h));
        }
        if !self.nodes[0].consistent.contains(h) {
            return Err(Error::Inconsistent(h));
        }
        let mut v = 0;
        while let Some(j) = self.nodes[v].test {
            match self.child(v, inst.answer(j, h)) {
                Some(c) => v = c,
                None => break,
            }
        }
        Ok(v)
    }

    /// Σ_{h∈H} mass(h)·d_T(h).
    pub fn depth_mass<M: Mass>(&self, inst: &DTInstance<M>, set: &HypothesisSet) -> Result<M> {
        let mut total = M::zero();
        for h in set {
            let v = self.deepest_consistent(inst, h)?;
            total += inst.mass(h).times(self.nodes[v].depth);
        }
        Ok(total)
    }

    /// C(T;H) = (1/p(H)) Σ_{h∈H} p_h d_T(h).
    pub fn cost<M: Mass>(&self, inst: &DTInstance<M>, set: &HypothesisSet) -> Result<CostBreakdown<M::Value>> {
        let mut depths = Vec::with_capacity(set.len());
        let mut total = M::zero();
        for h in set {
            let v = self.deepest_consistent(inst, h)?;
            let d = self.nodes[v].depth;
            total += inst.mass(h).times(d);
            depths.push((h, d));
        }
        let mass = inst.mass_of(set);
        let normalizer = mass.over(inst.denominator());
        let total = if mass.is_zero() {
            M::Value::zero()
        } else {
            total.over(mass)
        };
        Ok(CostBreakdown { total, depths, normalizer })
    }

    /// Σ over interior vertices of p(v), from the cached sets.
    pub fn interior_weight_sum<M: Mass>(&self, inst: &DTInstance<M>) -> Result<M::Value> {
        if !self.is_complete(inst, &self.nodes[0].consistent, None) {
            return Err(Error::Incomplete);
        }
        let mut total = M::zero();
        for v in self.interior() {
            total += inst.mass_of(&self.nodes[v].consistent);
        }
        Ok(total.over(inst.denominator()))
    }

    /// Complete w.r.t. `set` up to depth `b` (`None` for unbounded): every
    /// hypothesis is isolated at a leaf or reaches depth `b`.
    pub fn is_complete<M: Mass>(&self, inst: &DTInstance<M>, set: &HypothesisSet, b: Option<usize>) -> bool {
        set.iter().all(|h| {
            let Ok(v) = self.deepest_consistent(inst, h) else {
                return false;
            };
            let node = &self.nodes[v];
            if node.is_leaf() && node.consistent.intersection(set).len() == 1 {
                return true;
            }
            matches!(b, Some(b) if node.depth >= b)
        })
    }

    /// Checks every structural invariant against a fresh replay of the paths.
    pub fn verify<M: Mass>(&self, inst: &DTInstance<M>) -> Result<()> {
        if self.nodes[0].parent.is_some() || self.nodes[0].depth != 0 {
            return Err(Error::MalformedTree("root has a parent or nonzero depth".into()));
        }
        for (v, node) in self.nodes.iter().enumerate() {
            if node.consistent.is_empty() {
                return Err(Error::MalformedTree(format!("node {v} has an empty consistent set")));
            }
            let replay = self.replay_consistent_set(inst, v)?;
            if replay != node.consistent {
                return Err(Error::MalformedTree(format!("cached consistent set of node {v} is stale")));
            }
            let Some(j) = node.test else {
                if !node.children.is_empty() {
                    return Err(Error::MalformedTree(format!("leaf {v} has children")));
                }
                continue;
            };
            if j >= inst.m() {
                return Err(Error::TestOutOfRange(j));
            }
            let parts = partition(inst, &node.consistent, j);
            if parts.len() < 2 {
                return Err(Error::MalformedTree(format!("node {v} queries a useless test")));
            }
            if parts.len() != node.children.len() {
                return Err(Error::MalformedTree(format!("node {v} has missing or extra children")));
            }
            for ((a, set), &(ca, c)) in parts.iter().zip(&node.children) {
                let child = &self.nodes[c];
                if *a != ca as usize
                    || child.consistent != *set
                    || child.parent != Some((v, ca))
                    || child.depth != node.depth + 1
                {
                    return Err(Error::MalformedTree(format!("child {c} of node {v} is inconsistent")));
                }
            }
        }
        Ok(())
    }

    /// Same tree with nodes renumbered in preorder.
    pub fn canonical(&self) -> DecisionTree {
        let order = self.preorder();
        let mut new_id = vec![0; self.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let n = &self.nodes[v];
                Node {
                    test: n.test,
                    children: n.children.iter().map(|&(a, c)| (a, new_id[c])).collect(),
                    parent: n.parent.map(|(p, a)| (new_id[p], a)),
                    depth: n.depth,
                    consistent: n.consistent.clone(),
                }
            })
            .collect();
        DecisionTree { nodes }
    }

    /// Preorder text form. Header `tree <n> <nodes>`, then one line per node:
    /// `id depth test j parent_answer hyps` or `id depth leaf parent_answer hyps`,
    /// with 1-based tests, answers, and hypotheses; the root's answer is `-`.
    pub fn to_text(&self) -> String {
        let canon = self.canonical();
        let mut out = String::new();
        let _ = writeln!(out, "tree {} {}", canon.nodes[0].consistent.universe(), canon.nodes.len());
        for (id, n) in canon.nodes.iter().enumerate() {
            let kind = match n.test {
                Some(j) => format!("test {}", j + 1),
                None => "leaf".to_string(),
            };
            let pa = n.parent.map_or("-".to_string(), |(_, a)| (a + 1).to_string());
            let _ = writeln!(out, "{id} {} {kind} {pa} {}", n.depth, n.consistent.display_one_based());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing tree header"))?;
        let hf: Vec<&str> = header.split_whitespace().collect();
        if hf.len() != 3 || hf[0] != "tree" {
            return Err(err(hl, "expected `tree <n> <nodes>`"));
        }
        let n: usize = hf[1].parse().map_err(|_| err(hl, "bad hypothesis count"))?;
        let count: usize = hf[2].parse().map_err(|_| err(hl, "bad node count"))?;
        let mut nodes: Vec<Node> = Vec::with_capacity(count);
        let mut stack: Vec<NodeId> = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let (id, depth) = match (f.first(), f.get(1)) {
                (Some(a), Some(b)) => (
                    a.parse::<usize>().map_err(|_| err(ln, "bad node id"))?,
                    b.parse::<usize>().map_err(|_| err(ln, "bad depth"))?,
                ),
                _ => return Err(err(ln, "truncated node line")),
            };
            if id != nodes.len() {
                return Err(err(ln, "node ids must be consecutive in preorder"));
            }
            let (test, rest) = match f.get(2) {
                Some(&"test") => {
                    let j: usize = f
                        .get(3)
                        .and_then(|s| s.parse().ok())
                        .filter(|&j| j >= 1)
                        .ok_or_else(|| err(ln, "bad test index"))?;
                    (Some(j - 1), &f[4..])
                }
                Some(&"leaf") => (None, &f[3..]),
                _ => return Err(err(ln, "kind must be `test j` or `leaf`")),
            };
            if rest.len() != 2 {
                return Err(err(ln, "expected parent answer and hypothesis set"));
            }
            let consistent = parse_set(rest[1], n).ok_or_else(|| err(ln, "bad hypothesis set"))?;
            while stack.last().is_some_and(|&p| nodes[p].depth + 1 != depth) {
                stack.pop();
            }
            let parent = if depth == 0 {
                if id != 0 || rest[0] != "-" {
                    return Err(err(ln, "only the first node may be the root"));
                }
                None
            } else {
                let p = *stack.last().ok_or_else(|| err(ln, "node has no parent at depth - 1"))?;
                let a: u16 = rest[0]
                    .parse::<u16>()
                    .ok()
                    .filter(|&a| a >= 1)
                    .ok_or_else(|| err(ln, "bad parent answer"))?;
                if nodes[p].test.is_none() {
                    return Err(err(ln, "parent is a leaf"));
                }
                nodes[p].children.push((a - 1, id));
                Some((p, a - 1))
            };
            nodes.push(Node { test, children: Vec::new(), parent, depth, consistent });
            stack.push(id);
        }
        if nodes.len() != count || nodes.is_empty() {
            return Err(err(1, "node count does not match header"));
        }
        for n in &mut nodes {
            n.children.sort_unstable();
        }
        Ok(DecisionTree { nodes })
    }

    /// Nested structured form.
    pub fn to_json(&self) -> String {
        let doc = TreeDoc {
            n: self.nodes[0].consistent.universe(),
            root: self.nested(0),
        };
        serde_json::to_string_pretty(&doc).expect("tree serializes")
    }

    fn nested(&self, v: NodeId) -> NestedNode {
        let n = &self.nodes[v];
        NestedNode {
            test: n.test.map(|j| j + 1),
            hypotheses: n.consistent.iter().map(|h| h + 1).collect(),
            children: n
                .children
                .iter()
                .map(|&(a, c)| NestedEdge {
                    answer: a as usize + 1,
                    node: self.nested(c),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDoc = serde_json::from_str(text)?;
        let mut nodes = Vec::new();
        fn walk(
            doc: &NestedNode,
            n: usize,
            parent: Option<(NodeId, u16)>,
            depth: usize,
            nodes: &mut Vec<Node>,
        ) -> Result<NodeId> {
            if doc.hypotheses.iter().any(|&h| h == 0 || h > n) {
                return Err(Error::MalformedTree("hypothesis index out of range".into()));
            }
            let id = nodes.len();
            nodes.push(Node {
                test: match doc.test {
                    Some(0) => return Err(Error::MalformedTree("tests are 1-based".into())),
                    t => t.map(|j| j - 1),
                },
                children: Vec::new(),
                parent,
                depth,
                consistent: HypothesisSet::from_indices(n, doc.hypotheses.iter().map(|h| h - 1)),
            });
            for e in &doc.children {
                if e.answer == 0 || e.answer > u16::MAX as usize {
                    return Err(Error::MalformedTree("answers are 1-based".into()));
                }
                let a = (e.answer - 1) as u16;
                let c = walk(&e.node, n, Some((id, a)), depth + 1, nodes)?;
                nodes[id].children.push((a, c));
            }
            nodes[id].children.sort_unstable();
            Ok(id)
        }
        walk(&doc.root, doc.n, None, 0, &mut nodes)?;
        Ok(DecisionTree { nodes })
    }
}

impl PartialEq for DecisionTree {
    fn eq(&self, other: &Self) -> bool {
        self.canonical().nodes == other.canonical().nodes
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    n: usize,
    root: NestedNode,
}

#[derive(Serialize, Deserialize)]
struct NestedNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    test: Option<usize>,
    hypotheses: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NestedEdge>,
}

#[derive(Serialize, Deserialize)]
struct NestedEdge {
    answer: usize,
    node: NestedNode,
}

fn parse_set(s: &str, n: usize) -> Option<HypothesisSet> {
    let inner = s.strip_prefix('{')?.strip_suffix('}')?;
    let mut set = HypothesisSet::empty(n);
    if inner.is_empty() {
        return Some(set);
    }
    for tok in inner.split(',') {
        let h: usize = tok.parse().ok()?;
        if h == 0 || h > n {
            return None;
        }
        set.insert(h - 1);
    }
    Some(set)
}

/// Nonempty parts of `set` under test `j`, keyed by 0-based answer.
pub fn partition<M: Mass>(inst: &DTInstance<M>, set: &HypothesisSet, j: usize) -> Vec<(usize, HypothesisSet)> {
    let mut parts: BTreeMap<usize, HypothesisSet> = BTreeMap::new();
    for h in set {
        parts
            .entry(inst.answer(j, h))
            .or_insert_with(|| HypothesisSet::empty(set.universe()))
            .insert(h);
    }
    parts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ExactInstance;
    use crate::num::{Rational, Value};

    fn singleton_tests3() -> ExactInstance {
        ExactInstance::from_masses(
            2,
            vec![1; 3],
            3,
            vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
        )
        .unwrap()
    }

    fn perfect4() -> (ExactInstance, DecisionTree) {
        let inst = ExactInstance::from_masses(2, vec![1; 4], 4, vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]).unwrap();
        let mut t = DecisionTree::leaf(inst.full_set());
        let kids = t.split(&inst, 0, 0).unwrap();
        for c in kids {
            t.split(&inst, c, 1).unwrap();
        }
        (inst, t)
    }

    #[test]
    fn bare_leaf_costs_nothing() {
        let inst = ExactInstance::from_masses(2, vec![1], 1, vec![vec![0]]).unwrap();
        let t = DecisionTree::leaf(inst.full_set());
        assert_eq!(t.cost(&inst, &inst.full_set()).unwrap().total, Rational::from_int(0));
        assert_eq!(t.interior_weight_sum(&inst).unwrap(), Rational::from_int(0));
    }

    #[test]
    fn perfect_tree_costs_two() {
        let (inst, t) = perfect4();
        t.verify(&inst).unwrap();
        assert_eq!(t.cost(&inst, &inst.full_set()).unwrap().total, Rational::from_int(2));
        assert_eq!(t.interior_weight_sum(&inst).unwrap(), Rational::from_int(2));
        let left = t.child(0, 0).unwrap();
        assert_eq!(t.consistent_set(left).unwrap(), &HypothesisSet::from_indices(4, [0, 1]));
        assert!(matches!(t.consistent_set(99), Err(Error::ForeignNode(99))));
    }

    #[test]
    fn caterpillar_over_singleton_tests() {
        let inst = singleton_tests3();
        let mut t = DecisionTree::leaf(inst.full_set());
        let kids = t.split(&inst, 0, 0).unwrap();
        t.split(&inst, kids[1], 1).unwrap();
        let c = t.cost(&inst, &inst.full_set()).unwrap();
        assert_eq!(c.depths, vec![(0, 1), (1, 2), (2, 2)]);
        assert_eq!(c.total, Rational::from_ratio(5, 3));
    }

    #[test]
    fn completeness_with_depth_bound() {
        let inst = singleton_tests3();
        let leaf = DecisionTree::leaf(inst.full_set());
        assert!(!leaf.is_complete(&inst, &inst.full_set(), None));
        assert!(leaf.is_complete(&inst, &HypothesisSet::singleton(3, 1), None));
        let mut t = DecisionTree::leaf(inst.full_set());
        t.split(&inst, 0, 0).unwrap();
        assert!(t.is_complete(&inst, &inst.full_set(), Some(1)));
        assert!(!t.is_complete(&inst, &inst.full_set(), Some(2)));
        assert!(matches!(t.interior_weight_sum(&inst), Err(Error::Incomplete)));
    }

    #[test]
    fn text_and_json_round_trip() {
        let (inst, t) = perfect4();
        let text = t.to_text();
        assert!(text.starts_with("tree 4 7\n0 0 test 1 - {1,2,3,4}\n1 1 test 2 1 {1,2}\n"));
        let back = DecisionTree::from_text(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), text);
        back.verify(&inst).unwrap();
        let json = DecisionTree::from_json(&t.to_json()).unwrap();
        assert_eq!(json, t);
    }

    #[test]
    fn attach_rebases_depths() {
        let (inst, t) = perfect4();
        let mut top = DecisionTree::leaf(inst.full_set());
        let kids = top.split(&inst, 0, 0).unwrap();
        let mut sub = DecisionTree::leaf(top.consistent_set(kids[0]).unwrap().clone());
        sub.split(&inst, 0, 1).unwrap();
        top.attach(kids[0], &sub).unwrap();
        let mut sub = DecisionTree::leaf(top.consistent_set(kids[1]).unwrap().clone());
        sub.split(&inst, 0, 1).unwrap();
        top.attach(kids[1], &sub).unwrap();
        top.verify(&inst).unwrap();
        assert_eq!(top, t);
    }

    #[test]
    fn corrupted_cache_is_detected() {
        let (inst, mut t) = perfect4();
        t.overwrite_consistent_set(1, HypothesisSet::singleton(4, 0)).unwrap();
        assert!(t.verify(&inst).is_err());
        assert_ne!(
            t.interior_weight_sum(&inst).unwrap(),
            t.cost(&inst, &inst.full_set()).unwrap().total
        );
    }
}
