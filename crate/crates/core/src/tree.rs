//! Decision trees over an [`Instance`] and their cost and error evaluators.

use serde::{Deserialize, Serialize};

use crate::instance::{ClassCounts, ClassId, CoreError, Instance, ObjectId, TestId};
use crate::rational::Rational;

pub type NodeId = usize;

/// `u128` as a JSON number when it fits in `u64`, else as a decimal string.
/// Internally tagged enums cannot buffer `u128` values.
mod wide {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        match u64::try_from(*v) {
            Ok(small) => s.serialize_u64(small),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wide {
        Small(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        match Wide::deserialize(d)? {
            Wide::Small(v) => Ok(v as u128),
            Wide::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Internal {
        test: TestId,
        children: Vec<NodeId>,
    },
    Leaf {
        class: ClassId,
        objects: Vec<ObjectId>,
        /// Impurity left at the leaf, in the builder's integer units.
        #[serde(default, with = "wide")]
        impurity: u128,
    },
}

/// Arena-backed tree. Serializes as `{"root":r,"nodes":[...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: NodeId,
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// A tree consisting of one leaf labelled with the majority class.
    pub fn single_leaf(instance: &Instance, object_ids: &[ObjectId], impurity: u128) -> Result<Self, CoreError> {
        let counts = instance.class_counts(object_ids)?;
        Ok(DecisionTree {
            root: 0,
            nodes: vec![Node::Leaf { class: counts.majority(), objects: object_ids.to_vec(), impurity }],
        })
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, CoreError> {
        self.nodes
            .get(id)
            .ok_or_else(|| CoreError::MalformedTree(format!("node {id} does not exist")))
    }

    pub fn leaves(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| matches!(n, Node::Leaf { .. }))
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves().count()
    }

    /// Leaves holding at least one object.
    pub fn populated_leaves(&self) -> usize {
        self.leaves()
            .filter(|(_, n)| matches!(n, Node::Leaf { objects, .. } if !objects.is_empty()))
            .count()
    }

    /// Follows `object`'s outcomes from the root, returning the leaf reached
    /// and the tests applied on the way.
    pub fn route(&self, instance: &Instance, object: ObjectId) -> Result<(NodeId, Vec<TestId>), CoreError> {
        if object >= instance.num_objects() {
            return Err(CoreError::UnknownObject(object));
        }
        let mut at = self.root;
        let mut path = Vec::new();
        loop {
            match self.node(at)? {
                Node::Leaf { .. } => return Ok((at, path)),
                Node::Internal { test, children } => {
                    if *test >= instance.num_tests() {
                        return Err(CoreError::MalformedTree(format!("node {at} uses unknown test {test}")));
                    }
                    if path.len() > self.nodes.len() {
                        return Err(CoreError::MalformedTree("cycle detected".into()));
                    }
                    let outcome = instance.outcome(object, *test);
                    path.push(*test);
                    at = *children.get(outcome).ok_or_else(|| {
                        CoreError::MalformedTree(format!("node {at} has no child for outcome {outcome}"))
                    })?;
                }
            }
        }
    }

    fn path_cost(instance: &Instance, path: &[TestId]) -> Rational {
        path.iter().map(|&t| instance.cost(t)).sum()
    }

    /// Worst-case testing cost over all objects of the instance.
    pub fn max_cost(&self, instance: &Instance) -> Result<Rational, CoreError> {
        let mut worst = Rational::from_integer(0);
        for id in 0..instance.num_objects() {
            let (_, path) = self.route(instance, id)?;
            worst = worst.max(Self::path_cost(instance, &path));
        }
        Ok(worst)
    }

    /// Maximum path cost over leaves that hold objects, computed by walking
    /// the tree top-down rather than replaying objects.
    pub fn max_leaf_path_cost(&self, instance: &Instance) -> Result<Rational, CoreError> {
        let mut worst = Rational::from_integer(0);
        let mut stack = vec![(self.root, Rational::from_integer(0), 0usize)];
        while let Some((id, cost, depth)) = stack.pop() {
            if depth > self.nodes.len() {
                return Err(CoreError::MalformedTree("cycle detected".into()));
            }
            match self.node(id)? {
                Node::Leaf { objects, .. } => {
                    if !objects.is_empty() {
                        worst = worst.max(cost);
                    }
                }
                Node::Internal { test, children } => {
                    instance.test(*test)?;
                    let c = cost + instance.cost(*test);
                    stack.extend(children.iter().map(|&ch| (ch, c, depth + 1)));
                }
            }
        }
        Ok(worst)
    }

    /// Number of tests on the deepest path that reaches an object.
    pub fn depth(&self, instance: &Instance) -> Result<usize, CoreError> {
        let mut deepest = 0;
        for id in 0..instance.num_objects() {
            deepest = deepest.max(self.route(instance, id)?.1.len());
        }
        Ok(deepest)
    }

    /// Class counts of the objects routed to each leaf.
    fn routed_leaf_counts(&self, instance: &Instance) -> Result<Vec<(NodeId, ClassCounts)>, CoreError> {
        let mut per_node: Vec<Option<ClassCounts>> = vec![None; self.nodes.len()];
        for id in 0..instance.num_objects() {
            let (leaf, _) = self.route(instance, id)?;
            per_node[leaf]
                .get_or_insert_with(|| ClassCounts::zeros(instance.num_classes()))
                .add(instance.class_of(id));
        }
        Ok(per_node.into_iter().enumerate().filter_map(|(i, c)| c.map(|c| (i, c))).collect())
    }

    /// Number of objects outside their leaf's majority class.
    pub fn misclassified(&self, instance: &Instance) -> Result<u64, CoreError> {
        Ok(self.routed_leaf_counts(instance)?.iter().map(|(_, c)| c.minority()).sum())
    }

    /// Fraction of objects outside their leaf's majority class.
    pub fn classification_error(&self, instance: &Instance) -> Result<Rational, CoreError> {
        let n = instance.num_objects();
        if n == 0 {
            return Ok(Rational::from_integer(0));
        }
        Ok(Rational::new(self.misclassified(instance)? as i128, n as i128))
    }

    /// Object counts of populated leaves, largest first.
    pub fn leaf_sizes(&self, instance: &Instance) -> Result<Vec<u64>, CoreError> {
        let mut sizes: Vec<u64> = self.routed_leaf_counts(instance)?.iter().map(|(_, c)| c.total()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(sizes)
    }

    /// Class counts of every populated leaf.
    pub fn leaf_class_counts(&self, instance: &Instance) -> Result<Vec<ClassCounts>, CoreError> {
        Ok(self.routed_leaf_counts(instance)?.into_iter().map(|(_, c)| c).collect())
    }

    /// Checks the structural contract against `instance`: every object reaches
    /// the leaf that lists it, each internal node has one child per outcome,
    /// no test repeats on a path, and populated leaves carry the majority
    /// class (lowest id on ties).
    pub fn validate(&self, instance: &Instance) -> Result<(), CoreError> {
        let invalid = |m: String| Err(CoreError::InvalidTree(m));
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<(NodeId, Vec<TestId>)> = vec![(self.root, Vec::new())];
        while let Some((id, path)) = stack.pop() {
            if std::mem::replace(seen.get_mut(id).ok_or_else(|| {
                CoreError::MalformedTree(format!("node {id} does not exist"))
            })?, true)
            {
                return invalid(format!("node {id} reachable twice"));
            }
            match &self.nodes[id] {
                Node::Internal { test, children } => {
                    let spec = instance.test(*test)?;
                    if children.len() != spec.num_outcomes {
                        return invalid(format!(
                            "node {id} has {} children for test with {} outcomes",
                            children.len(),
                            spec.num_outcomes
                        ));
                    }
                    if path.contains(test) {
                        return invalid(format!("test {test} repeats on the path to node {id}"));
                    }
                    let mut p = path.clone();
                    p.push(*test);
                    stack.extend(children.iter().map(|&c| (c, p.clone())));
                }
                Node::Leaf { class, objects, .. } => {
                    if *class >= instance.num_classes() {
                        return invalid(format!("leaf {id} predicts unknown class {class}"));
                    }
                    if !objects.is_empty() && instance.class_counts(objects)?.majority() != *class {
                        return invalid(format!("leaf {id} does not predict its majority class"));
                    }
                }
            }
        }
        let mut listed = vec![None; instance.num_objects()];
        for (leaf, node) in self.leaves() {
            if let Node::Leaf { objects, .. } = node {
                for &o in objects {
                    match listed.get_mut(o) {
                        None => return Err(CoreError::UnknownObject(o)),
                        Some(Some(_)) => return invalid(format!("object {o} listed in two leaves")),
                        Some(slot) => *slot = Some(leaf),
                    }
                }
            }
        }
        for (o, slot) in listed.iter().enumerate() {
            let (reached, _) = self.route(instance, o)?;
            if *slot != Some(reached) {
                return invalid(format!("object {o} reaches leaf {reached} but is listed at {slot:?}"));
            }
        }
        Ok(())
    }

    /// Copy of the tree in which every node at depth `max_depth` becomes a
    /// majority leaf over the objects below it.
    pub fn truncated(&self, instance: &Instance, max_depth: usize) -> Result<DecisionTree, CoreError> {
        let mut out = DecisionTree { root: 0, nodes: Vec::new() };
        self.copy_truncated(instance, self.root, 0, max_depth, &mut out)?;
        Ok(out)
    }

    fn subtree_objects(&self, id: NodeId, acc: &mut Vec<ObjectId>) -> Result<(), CoreError> {
        match self.node(id)? {
            Node::Leaf { objects, .. } => acc.extend(objects),
            Node::Internal { children, .. } => {
                for &c in children {
                    self.subtree_objects(c, acc)?;
                }
            }
        }
        Ok(())
    }

    fn copy_truncated(
        &self,
        instance: &Instance,
        id: NodeId,
        depth: usize,
        max_depth: usize,
        out: &mut DecisionTree,
    ) -> Result<NodeId, CoreError> {
        let slot = out.nodes.len();
        match self.node(id)? {
            Node::Internal { test, children } if depth < max_depth => {
                out.nodes.push(Node::Internal { test: *test, children: Vec::new() });
                let mut ids = Vec::with_capacity(children.len());
                for &c in children {
                    ids.push(self.copy_truncated(instance, c, depth + 1, max_depth, out)?);
                }
                out.nodes[slot] = Node::Internal { test: *test, children: ids };
            }
            Node::Internal { .. } => {
                let mut objects = Vec::new();
                self.subtree_objects(id, &mut objects)?;
                objects.sort_unstable();
                let class = instance.class_counts(&objects)?.majority();
                out.nodes.push(Node::Leaf { class, objects, impurity: 0 });
            }
            leaf @ Node::Leaf { .. } => out.nodes.push(leaf.clone()),
        }
        Ok(slot)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
