//! Exact optima on small instances by exhaustive search over decision trees.
//!
//! Object sets and available tests are bitmasks, so instances are limited to
//! [`OracleLimits`]. Trees consume tests along each path, the same class the
//! greedy builder searches.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::impurity::{Impurity, ImpurityError};
use crate::instance::{ClassCounts, ClassId, Instance, ObjectId, TestId};
use crate::rational::Rational;
use crate::tree::{DecisionTree, Node};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance with {objects} objects and {tests} tests exceeds oracle limits ({max_objects} objects, {max_tests} tests)")]
    LimitExceeded { objects: usize, tests: usize, max_objects: usize, max_tests: usize },
    #[error("no decision tree satisfies the leaf constraint")]
    Infeasible,
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_objects: usize,
    pub max_tests: usize,
    pub memoize: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_objects: 12, max_tests: 8, memoize: true }
    }
}

impl OracleLimits {
    /// Tighter limits for full tree enumeration.
    pub fn enumeration() -> Self {
        OracleLimits { max_objects: 8, max_tests: 5, memoize: true }
    }

    fn check(&self, instance: &Instance) -> Result<(), OracleError> {
        let (objects, tests) = (instance.num_objects(), instance.num_tests());
        if objects > self.max_objects || tests > self.max_tests || objects > 63 || tests > 31 {
            return Err(OracleError::LimitExceeded {
                objects,
                tests,
                max_objects: self.max_objects,
                max_tests: self.max_tests,
            });
        }
        Ok(())
    }
}

type Mask = u64;
type TestMask = u32;

/// Precomputed outcome masks: `parts[t][i]` holds the objects with outcome
/// `i` on test `t`.
struct Masks<'a> {
    instance: &'a Instance,
    parts: Vec<Vec<Mask>>,
    costs: Vec<Rational>,
}

impl<'a> Masks<'a> {
    fn new(instance: &'a Instance) -> Self {
        let parts = instance
            .tests()
            .iter()
            .map(|t| {
                let mut m = vec![0; t.num_outcomes];
                for o in instance.objects() {
                    m[o.outcomes[t.id]] |= 1 << o.id;
                }
                m
            })
            .collect();
        let costs = (0..instance.num_tests()).map(|t| instance.cost(t)).collect();
        Masks { instance, parts, costs }
    }

    fn counts(&self, g: Mask) -> ClassCounts {
        let mut c = ClassCounts::zeros(self.instance.num_classes());
        for id in ids(g) {
            c.add(self.instance.class_of(id));
        }
        c
    }

    /// Outcome parts of `g` under `t`, or `None` if `t` leaves `g` whole.
    fn split(&self, g: Mask, t: TestId) -> Option<Vec<Mask>> {
        let parts: Vec<Mask> = self.parts[t].iter().map(|&p| p & g).collect();
        if parts.contains(&g) {
            None
        } else {
            Some(parts)
        }
    }

    fn split_all(&self, g: Mask, t: TestId) -> Vec<Mask> {
        self.parts[t].iter().map(|&p| p & g).collect()
    }
}

fn ids(mask: Mask) -> impl Iterator<Item = ObjectId> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

fn tests_of(mask: TestMask) -> impl Iterator<Item = TestId> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

fn full_mask(n: usize) -> Mask {
    if n == 0 {
        0
    } else {
        Mask::MAX >> (64 - n)
    }
}

fn object_mask(object_ids: &[ObjectId]) -> Mask {
    object_ids.iter().fold(0, |m, &o| m | 1 << o)
}

fn test_mask(test_ids: &[TestId]) -> TestMask {
    test_ids.iter().fold(0, |m, &t| m | 1 << t)
}

/// Minimum max-cost over all trees whose every leaf has impurity at most
/// `delta`.
pub fn opt_max_cost(instance: &Instance, f: &dyn Impurity, delta: u128, limits: OracleLimits) -> Result<Rational, OracleError> {
    opt_max_cost_on(instance, f, delta, &instance.object_ids(), &instance.test_ids(), limits)
}

/// [`opt_max_cost`] restricted to a subset of objects and tests.
pub fn opt_max_cost_on(
    instance: &Instance,
    f: &dyn Impurity,
    delta: u128,
    object_ids: &[ObjectId],
    test_ids: &[TestId],
    limits: OracleLimits,
) -> Result<Rational, OracleError> {
    limits.check(instance)?;
    let mut search = CostSearch {
        masks: Masks::new(instance),
        f,
        delta,
        memoize: limits.memoize,
        memo: HashMap::new(),
        impurity: HashMap::new(),
    };
    search.solve(object_mask(object_ids), test_mask(test_ids))?.ok_or(OracleError::Infeasible)
}

struct CostSearch<'a> {
    masks: Masks<'a>,
    f: &'a dyn Impurity,
    delta: u128,
    memoize: bool,
    memo: HashMap<(Mask, TestMask), Option<Rational>>,
    impurity: HashMap<Mask, u128>,
}

impl CostSearch<'_> {
    fn impurity(&mut self, g: Mask) -> Result<u128, OracleError> {
        if let Some(&v) = self.impurity.get(&g) {
            return Ok(v);
        }
        let v = self.f.evaluate(&self.masks.counts(g))?;
        self.impurity.insert(g, v);
        Ok(v)
    }

    fn solve(&mut self, g: Mask, tests: TestMask) -> Result<Option<Rational>, OracleError> {
        if self.impurity(g)? <= self.delta {
            return Ok(Some(Rational::from_integer(0)));
        }
        if self.memoize {
            if let Some(&v) = self.memo.get(&(g, tests)) {
                return Ok(v);
            }
        }
        let mut best: Option<Rational> = None;
        // Non-splitting tests are skipped: with non-negative costs they never
        // beat solving the same set with that test removed.
        for t in tests_of(tests) {
            let Some(parts) = self.masks.split(g, t) else { continue };
            let cost = self.masks.costs[t];
            if best.is_some_and(|b| cost >= b) {
                continue;
            }
            let rest = tests & !(1 << t);
            let mut worst = Rational::from_integer(0);
            let mut feasible = true;
            for p in parts.into_iter().filter(|&p| p != 0) {
                match self.solve(p, rest)? {
                    Some(v) => worst = worst.max(v),
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible {
                let total = cost + worst;
                if best.is_none_or(|b| total < b) {
                    best = Some(total);
                }
            }
        }
        if self.memoize {
            self.memo.insert((g, tests), best);
        }
        Ok(best)
    }
}

/// A non-dominated `(max-cost, misclassified objects)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontierPoint {
    pub cost: Rational,
    pub errors: u64,
}

/// Pareto frontier of `(max-cost, misclassified)` over all trees with
/// majority-labelled leaves, sorted by increasing cost and strictly
/// decreasing error count.
pub fn error_cost_frontier(instance: &Instance, limits: OracleLimits) -> Result<Vec<FrontierPoint>, OracleError> {
    limits.check(instance)?;
    let mut search = FrontierSearch { masks: Masks::new(instance), memoize: limits.memoize, memo: HashMap::new() };
    Ok(search
        .solve(full_mask(instance.num_objects()), full_mask(instance.num_tests()) as TestMask)
        .to_vec())
}

/// Minimum max-cost over all trees whose classification error is at most
/// `epsilon`.
pub fn opt_error_constrained(instance: &Instance, epsilon: Rational, limits: OracleLimits) -> Result<Rational, OracleError> {
    let n = instance.num_objects().max(1) as i128;
    error_cost_frontier(instance, limits)?
        .into_iter()
        .find(|p| Rational::new(p.errors as i128, n) <= epsilon)
        .map(|p| p.cost)
        .ok_or(OracleError::Infeasible)
}

struct FrontierSearch<'a> {
    masks: Masks<'a>,
    memoize: bool,
    memo: HashMap<(Mask, TestMask), Rc<Vec<FrontierPoint>>>,
}

fn pareto(mut points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    points.sort_by(|a, b| a.cost.cmp(&b.cost).then(a.errors.cmp(&b.errors)));
    let mut out: Vec<FrontierPoint> = Vec::new();
    for p in points {
        if out.last().is_none_or(|l| p.errors < l.errors) {
            out.push(p);
        }
    }
    out
}

impl FrontierSearch<'_> {
    fn solve(&mut self, g: Mask, tests: TestMask) -> Rc<Vec<FrontierPoint>> {
        if self.memoize {
            if let Some(v) = self.memo.get(&(g, tests)) {
                return Rc::clone(v);
            }
        }
        let leaf_errors = self.masks.counts(g).minority();
        let mut points = vec![FrontierPoint { cost: Rational::from_integer(0), errors: leaf_errors }];
        if leaf_errors > 0 {
            for t in tests_of(tests) {
                let Some(parts) = self.masks.split(g, t) else { continue };
                let rest = tests & !(1 << t);
                let children: Vec<Rc<Vec<FrontierPoint>>> =
                    parts.into_iter().filter(|&p| p != 0).map(|p| self.solve(p, rest)).collect();
                let mut thresholds: Vec<Rational> = children.iter().flat_map(|c| c.iter().map(|p| p.cost)).collect();
                thresholds.sort();
                thresholds.dedup();
                let cost = self.masks.costs[t];
                for c in thresholds {
                    // Every child frontier starts at cost 0, so each has an
                    // entry within any threshold.
                    let errors = children
                        .iter()
                        .map(|ch| ch.iter().take_while(|p| p.cost <= c).last().map_or(u64::MAX, |p| p.errors))
                        .sum();
                    points.push(FrontierPoint { cost: cost + c, errors });
                }
            }
        }
        let frontier = Rc::new(pareto(points));
        if self.memoize {
            self.memo.insert((g, tests), Rc::clone(&frontier));
        }
        frontier
    }
}

#[derive(Debug)]
enum Shape {
    Leaf,
    Split(TestId, Vec<Rc<Shape>>),
}

/// Every decision tree over the instance: at each non-empty node either a
/// leaf or any remaining test, with tests consumed along paths. Empty
/// outcome branches are leaves labelled with the parent's majority class.
pub fn enumerate_trees(instance: &Instance, limits: OracleLimits) -> Result<TreeEnumeration<'_>, OracleError> {
    limits.check(instance)?;
    let mut shapes = ShapeSearch { masks: Masks::new(instance), memo: HashMap::new() };
    let all = full_mask(instance.num_objects());
    let roots = if all == 0 {
        Rc::new(vec![Rc::new(Shape::Leaf)])
    } else {
        shapes.solve(all, full_mask(instance.num_tests()) as TestMask)
    };
    Ok(TreeEnumeration { masks: shapes.masks, roots, next: 0 })
}

/// Number of trees [`enumerate_trees`] would yield, without building them.
pub fn count_trees(instance: &Instance, limits: OracleLimits) -> Result<u128, OracleError> {
    fn count(masks: &Masks, memo: &mut HashMap<(Mask, TestMask), u128>, g: Mask, tests: TestMask) -> u128 {
        if g == 0 {
            return 1;
        }
        if let Some(&c) = memo.get(&(g, tests)) {
            return c;
        }
        let mut total = 1u128;
        for t in tests_of(tests) {
            let rest = tests & !(1 << t);
            total += masks.split_all(g, t).into_iter().map(|p| count(masks, memo, p, rest)).product::<u128>();
        }
        memo.insert((g, tests), total);
        total
    }
    limits.check(instance)?;
    let masks = Masks::new(instance);
    Ok(count(
        &masks,
        &mut HashMap::new(),
        full_mask(instance.num_objects()),
        full_mask(instance.num_tests()) as TestMask,
    ))
}

struct ShapeSearch<'a> {
    masks: Masks<'a>,
    memo: HashMap<(Mask, TestMask), Rc<Vec<Rc<Shape>>>>,
}

impl ShapeSearch<'_> {
    fn solve(&mut self, g: Mask, tests: TestMask) -> Rc<Vec<Rc<Shape>>> {
        if let Some(v) = self.memo.get(&(g, tests)) {
            return Rc::clone(v);
        }
        let mut out = vec![Rc::new(Shape::Leaf)];
        for t in tests_of(tests) {
            let rest = tests & !(1 << t);
            let child_lists: Vec<Rc<Vec<Rc<Shape>>>> = self
                .masks
                .split_all(g, t)
                .into_iter()
                .map(|p| if p == 0 { Rc::new(vec![Rc::new(Shape::Leaf)]) } else { self.solve(p, rest) })
                .collect();
            let mut idx = vec![0usize; child_lists.len()];
            'product: loop {
                let children = idx.iter().zip(&child_lists).map(|(&i, l)| Rc::clone(&l[i])).collect();
                out.push(Rc::new(Shape::Split(t, children)));
                for (pos, list) in child_lists.iter().enumerate() {
                    idx[pos] += 1;
                    if idx[pos] < list.len() {
                        continue 'product;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        let out = Rc::new(out);
        self.memo.insert((g, tests), Rc::clone(&out));
        out
    }
}

/// Iterator over enumerated trees; see [`enumerate_trees`].
pub struct TreeEnumeration<'a> {
    masks: Masks<'a>,
    roots: Rc<Vec<Rc<Shape>>>,
    next: usize,
}

impl TreeEnumeration<'_> {
    fn materialize(&self, shape: &Shape, g: Mask, parent_class: ClassId, nodes: &mut Vec<Node>) -> usize {
        let slot = nodes.len();
        match shape {
            Shape::Leaf => {
                let class = if g == 0 { parent_class } else { self.masks.counts(g).majority() };
                nodes.push(Node::Leaf { class, objects: ids(g).collect(), impurity: 0 });
            }
            Shape::Split(t, children) => {
                let majority = self.masks.counts(g).majority();
                nodes.push(Node::Internal { test: *t, children: Vec::new() });
                let parts = self.masks.split_all(g, *t);
                let ids = children
                    .iter()
                    .zip(parts)
                    .map(|(c, p)| self.materialize(c, p, majority, nodes))
                    .collect();
                nodes[slot] = Node::Internal { test: *t, children: ids };
            }
        }
        slot
    }
}

impl Iterator for TreeEnumeration<'_> {
    type Item = DecisionTree;

    fn next(&mut self) -> Option<DecisionTree> {
        let shape = Rc::clone(self.roots.get(self.next)?);
        self.next += 1;
        let mut nodes = Vec::new();
        let root = self.materialize(&shape, full_mask(self.masks.instance.num_objects()), 0, &mut nodes);
        Some(DecisionTree { root, nodes })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.roots.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for TreeEnumeration<'_> {}
