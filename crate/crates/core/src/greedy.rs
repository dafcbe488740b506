//! Greedy tree construction: at every node pick the test minimising the
//! worst-case cost per unit of impurity removed, and recurse until every
//! leaf's impurity is at most the stopping threshold.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::impurity::{Impurity, ImpurityError, ImpurityFn};
use crate::instance::{ClassCounts, ClassId, CoreError, Instance, ObjectId, TestId};
use crate::rational::{format_exact, Rational};
use crate::tree::{DecisionTree, Node, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GreedyError {
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("impurity of a part ({part}) exceeds its parent ({parent}); the impurity is not monotone")]
    NegativeReduction { parent: u128, part: u128 },
    #[error("no remaining test reduces impurity {impurity} above threshold {delta} for objects {objects:?}")]
    IncompleteInstance { objects: Vec<ObjectId>, impurity: u128, delta: u128 },
    #[error("cannot build a tree over an empty object set")]
    EmptyObjectSet,
}

/// Greedy score of a test. Tests that leave some outcome as impure as the
/// parent score [`Score::Infinite`] and sort after every finite score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    Finite(Rational),
    Infinite,
}

impl Score {
    pub fn finite(&self) -> Option<Rational> {
        match self {
            Score::Finite(r) => Some(*r),
            Score::Infinite => None,
        }
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Score::Finite(a), Score::Finite(b)) => a.cmp(b),
            (Score::Finite(_), Score::Infinite) => Ordering::Less,
            (Score::Infinite, Score::Finite(_)) => Ordering::Greater,
            (Score::Infinite, Score::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Finite(r) => f.write_str(&format_exact(r)),
            Score::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestTestId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildConfig {
    pub impurity: ImpurityFn,
    /// Stopping threshold in the impurity's integer units; a node becomes a
    /// leaf once its impurity is at most `delta`.
    pub delta: u128,
    pub tie_break: TieBreak,
}

impl BuildConfig {
    pub fn new(impurity: ImpurityFn) -> Self {
        BuildConfig { impurity, delta: 0, tie_break: TieBreak::default() }
    }

    pub fn with_delta(mut self, delta: u128) -> Self {
        self.delta = delta;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub test: TestId,
    pub score: Score,
}

/// Bookkeeping for one internal node of a greedy tree.
#[derive(Debug, Clone, Serialize)]
pub struct TraceNode {
    pub node: NodeId,
    pub counts: Vec<u64>,
    pub impurity: u128,
    #[serde(with = "crate::rational::serde_exact")]
    pub path_cost: Rational,
    pub chosen_test: TestId,
    pub chosen_score: Score,
    pub candidates: Vec<Candidate>,
    /// Impurity of each outcome part of the chosen test.
    pub child_impurities: Vec<u128>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BuildTrace {
    pub impurity: String,
    pub delta: u128,
    pub nodes: Vec<TraceNode>,
}

impl BuildTrace {
    /// Record of the root split, if the root is internal.
    pub fn root(&self) -> Option<&TraceNode> {
        self.nodes.iter().find(|n| n.node == 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// `max_i cost / (F(G) − F(G_i))`, infinite when some outcome removes no
/// impurity.
pub fn score_test(
    f: &dyn Impurity,
    counts_g: &ClassCounts,
    parts: &[ClassCounts],
    cost: Rational,
) -> Result<Score, GreedyError> {
    let parent = f.evaluate(counts_g)?;
    let values = parts.iter().map(|p| f.evaluate(p)).collect::<Result<Vec<_>, _>>()?;
    score_from_values(parent, &values, cost)
}

fn score_from_values(parent: u128, parts: &[u128], cost: Rational) -> Result<Score, GreedyError> {
    let mut worst = Score::Finite(Rational::from_integer(0));
    for &part in parts {
        if part > parent {
            return Err(GreedyError::NegativeReduction { parent, part });
        }
        let reduction = parent - part;
        if reduction == 0 {
            return Ok(Score::Infinite);
        }
        let reduction = i128::try_from(reduction).map_err(|_| ImpurityError::Overflow)?;
        worst = worst.max(Score::Finite(cost / Rational::from_integer(reduction)));
    }
    Ok(worst)
}

/// Largest integer threshold not exceeding `fraction · F(S)`.
pub fn delta_from_fraction(f: &dyn Impurity, instance: &Instance, fraction: Rational) -> Result<u128, GreedyError> {
    let root = f.evaluate(&instance.class_counts(&instance.object_ids())?)?;
    let root = Rational::from_integer(i128::try_from(root).map_err(|_| ImpurityError::Overflow)?);
    let d = (root * fraction).floor().to_integer();
    Ok(d.max(0) as u128)
}

/// Greedy tree over `object_ids` using `available_tests`.
pub fn build(
    instance: &Instance,
    object_ids: &[ObjectId],
    available_tests: &[TestId],
    config: &BuildConfig,
) -> Result<(DecisionTree, BuildTrace), GreedyError> {
    build_with(instance, object_ids, available_tests, &config.impurity, config.delta)
}

/// [`build`] for an arbitrary [`Impurity`].
pub fn build_with(
    instance: &Instance,
    object_ids: &[ObjectId],
    available_tests: &[TestId],
    impurity: &dyn Impurity,
    delta: u128,
) -> Result<(DecisionTree, BuildTrace), GreedyError> {
    Builder::new(instance, impurity, delta, None).run(object_ids, available_tests)
}

/// Greedy tree over the whole instance whose every root-to-leaf path costs
/// at most `budget`. Nodes that cannot be split within the remaining budget,
/// or by any remaining test, become majority leaves.
pub fn build_budgeted(instance: &Instance, config: &BuildConfig, budget: Rational) -> Result<DecisionTree, GreedyError> {
    build_budgeted_with(instance, &config.impurity, config.delta, budget).map(|(t, _)| t)
}

pub fn build_budgeted_with(
    instance: &Instance,
    impurity: &dyn Impurity,
    delta: u128,
    budget: Rational,
) -> Result<(DecisionTree, BuildTrace), GreedyError> {
    Builder::new(instance, impurity, delta, Some(budget)).run(&instance.object_ids(), &instance.test_ids())
}

/// Best test so far: score, id, branches and their impurities.
type Choice = (Score, TestId, Vec<Vec<ObjectId>>, Vec<u128>);

struct Builder<'a> {
    instance: &'a Instance,
    f: &'a dyn Impurity,
    delta: u128,
    budget: Option<Rational>,
    nodes: Vec<Node>,
    trace: Vec<TraceNode>,
}

impl<'a> Builder<'a> {
    fn new(instance: &'a Instance, f: &'a dyn Impurity, delta: u128, budget: Option<Rational>) -> Self {
        Builder { instance, f, delta, budget, nodes: Vec::new(), trace: Vec::new() }
    }

    fn run(mut self, object_ids: &[ObjectId], tests: &[TestId]) -> Result<(DecisionTree, BuildTrace), GreedyError> {
        if object_ids.is_empty() {
            return Err(GreedyError::EmptyObjectSet);
        }
        let mut available = tests.to_vec();
        available.sort_unstable();
        available.dedup();
        for &t in &available {
            self.instance.test(t)?;
        }
        let root = self.grow(object_ids.to_vec(), &available, Rational::from_integer(0), 0)?;
        debug_assert_eq!(root, 0);
        let trace = BuildTrace { impurity: self.f.name(), delta: self.delta, nodes: self.trace };
        Ok((DecisionTree { root, nodes: self.nodes }, trace))
    }

    fn leaf(&mut self, class: ClassId, objects: Vec<ObjectId>, impurity: u128) -> NodeId {
        self.nodes.push(Node::Leaf { class, objects, impurity });
        self.nodes.len() - 1
    }

    fn grow(
        &mut self,
        objects: Vec<ObjectId>,
        available: &[TestId],
        path_cost: Rational,
        parent_class: ClassId,
    ) -> Result<NodeId, GreedyError> {
        if objects.is_empty() {
            return Ok(self.leaf(parent_class, objects, 0));
        }
        let counts = self.instance.class_counts(&objects)?;
        let majority = counts.majority();
        let impurity = self.f.evaluate(&counts)?;
        if impurity <= self.delta {
            return Ok(self.leaf(majority, objects, impurity));
        }

        let mut candidates = Vec::with_capacity(available.len());
        let mut best: Option<Choice> = None;
        for &t in available {
            let cost = self.instance.cost(t);
            if self.budget.is_some_and(|b| path_cost + cost > b) {
                continue;
            }
            let parts = self.instance.split(&objects, t)?;
            let values = parts
                .iter()
                .map(|p| Ok(self.f.evaluate(&self.instance.class_counts(p)?)?))
                .collect::<Result<Vec<u128>, GreedyError>>()?;
            let score = score_from_values(impurity, &values, cost)?;
            candidates.push(Candidate { test: t, score });
            // Ascending test order plus strict comparison keeps the lowest id on ties.
            if best.as_ref().is_none_or(|(s, ..)| score < *s) {
                best = Some((score, t, parts, values));
            }
        }

        let (score, test, parts, child_impurities) = match best {
            Some(b) if b.0 != Score::Infinite => b,
            _ if self.budget.is_some() => return Ok(self.leaf(majority, objects, impurity)),
            _ => {
                let mut objects = objects;
                objects.sort_unstable();
                return Err(GreedyError::IncompleteInstance { objects, impurity, delta: self.delta });
            }
        };

        let id = self.nodes.len();
        self.nodes.push(Node::Internal { test, children: Vec::new() });
        let remaining: Vec<TestId> = available.iter().copied().filter(|&t| t != test).collect();
        let child_cost = path_cost + self.instance.cost(test);
        let mut children = Vec::with_capacity(parts.len());
        for part in parts {
            children.push(self.grow(part, &remaining, child_cost, majority)?);
        }
        self.trace.push(TraceNode {
            node: id,
            counts: counts.counts,
            impurity,
            path_cost,
            chosen_test: test,
            chosen_score: score,
            candidates,
            child_impurities,
            children: children.clone(),
        });
        self.nodes[id] = Node::Internal { test, children };
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(v: &[u64]) -> ClassCounts {
        ClassCounts::from_slice(v)
    }

    #[test]
    fn worked_scores_for_pairs() {
        let g = cc(&[30, 30]);
        let one = Rational::from_integer(1);
        let t1 = score_test(&ImpurityFn::Pairs, &g, &[cc(&[30, 10]), cc(&[0, 20])], one).unwrap();
        let t2 = score_test(&ImpurityFn::Pairs, &g, &[cc(&[15, 15]), cc(&[15, 15])], one).unwrap();
        assert_eq!(t1, Score::Finite(Rational::new(1, 600)));
        assert_eq!(t2, Score::Finite(Rational::new(1, 675)));
        assert!(t2 < t1);
    }

    #[test]
    fn non_splitting_test_scores_infinity() {
        let g = cc(&[3, 4]);
        let s = score_test(&ImpurityFn::Pairs, &g, &[g.clone(), cc(&[0, 0])], Rational::from_integer(1)).unwrap();
        assert_eq!(s, Score::Infinite);
        assert!(Score::Finite(Rational::from_integer(1_000_000)) < Score::Infinite);
    }

    #[test]
    fn growing_part_is_negative_reduction() {
        struct Weird;
        impl Impurity for Weird {
            fn evaluate(&self, c: &ClassCounts) -> Result<u128, ImpurityError> {
                Ok(if c.total() == 1 { 100 } else { 10 })
            }
            fn degree(&self) -> u32 {
                2
            }
            fn name(&self) -> String {
                "weird".into()
            }
        }
        let r = score_test(&Weird, &cc(&[1, 1]), &[cc(&[1, 0]), cc(&[0, 1])], Rational::from_integer(1));
        assert_eq!(r, Err(GreedyError::NegativeReduction { parent: 10, part: 100 }));
    }

    #[test]
    fn zero_cost_splitting_test_scores_zero() {
        let s = score_test(&ImpurityFn::Pairs, &cc(&[1, 1]), &[cc(&[1, 0]), cc(&[0, 1])], Rational::from_integer(0));
        assert_eq!(s.unwrap(), Score::Finite(Rational::from_integer(0)));
    }

    fn xor_instance() -> Instance {
        Instance::from_rows(&[0, 1, 1, 0], &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]], 2).unwrap()
    }

    #[test]
    fn builds_pure_tree_on_xor() {
        let inst = xor_instance();
        let cfg = BuildConfig::new(ImpurityFn::Pairs);
        let (tree, trace) = build(&inst, &inst.object_ids(), &inst.test_ids(), &cfg).unwrap();
        tree.validate(&inst).unwrap();
        assert_eq!(tree.max_cost(&inst).unwrap(), Rational::from_integer(2));
        assert_eq!(tree.classification_error(&inst).unwrap(), Rational::from_integer(0));
        assert_eq!(trace.nodes.len(), 3);
        for n in &trace.nodes {
            let min = n.candidates.iter().map(|c| c.score).min().unwrap();
            assert_eq!(n.chosen_score, min);
        }
    }

    #[test]
    fn duplicate_objects_are_incomplete() {
        let inst = Instance::from_rows(&[0, 1, 0], &[vec![0], vec![1], vec![1]], 2).unwrap();
        let cfg = BuildConfig::new(ImpurityFn::Pairs);
        match build(&inst, &inst.object_ids(), &inst.test_ids(), &cfg) {
            Err(GreedyError::IncompleteInstance { objects, .. }) => assert_eq!(objects, vec![1, 2]),
            other => panic!("unexpected {other:?}"),
        }
        let tree = build_budgeted(&inst, &cfg, Rational::from_integer(5)).unwrap();
        assert_eq!(tree.misclassified(&inst).unwrap(), 1);
    }

    #[test]
    fn delta_stops_early() {
        let inst = xor_instance();
        let cfg = BuildConfig::new(ImpurityFn::Pairs).with_delta(4);
        let (tree, trace) = build(&inst, &inst.object_ids(), &inst.test_ids(), &cfg).unwrap();
        assert_eq!(tree.num_leaves(), 1);
        assert!(trace.root().is_none());
        assert_eq!(delta_from_fraction(&ImpurityFn::Pairs, &inst, Rational::new(1, 2)).unwrap(), 2);
    }

    #[test]
    fn empty_outcome_becomes_parent_majority_leaf() {
        // Test 0 has three outcomes; outcome 2 is never observed.
        let inst = Instance::new(
            vec![
                crate::instance::ObjectRecord { id: 0, class_id: 1, outcomes: vec![0] },
                crate::instance::ObjectRecord { id: 1, class_id: 0, outcomes: vec![1] },
                crate::instance::ObjectRecord { id: 2, class_id: 1, outcomes: vec![1] },
                crate::instance::ObjectRecord { id: 3, class_id: 1, outcomes: vec![0] },
            ],
            2,
            vec![crate::instance::TestSpec::new(0, "", 3, 1)],
            1,
        )
        .unwrap();
        let tree = build_budgeted(&inst, &BuildConfig::new(ImpurityFn::Pairs), Rational::from_integer(1)).unwrap();
        tree.validate(&inst).unwrap();
        let Node::Internal { children, .. } = &tree.nodes[0] else { panic!() };
        assert_eq!(tree.nodes[children[2]], Node::Leaf { class: 1, objects: vec![], impurity: 0 });
    }

    #[test]
    fn zero_budget_gives_single_leaf() {
        let inst = xor_instance();
        let tree = build_budgeted(&inst, &BuildConfig::new(ImpurityFn::Pairs), Rational::from_integer(0)).unwrap();
        assert_eq!(tree.num_leaves(), 1);
        assert_eq!(tree.max_cost(&inst).unwrap(), Rational::from_integer(0));
    }

    #[test]
    fn empty_object_set_is_rejected() {
        let inst = xor_instance();
        let cfg = BuildConfig::new(ImpurityFn::Pairs);
        assert_eq!(build(&inst, &[], &[0], &cfg).unwrap_err(), GreedyError::EmptyObjectSet);
    }
}
