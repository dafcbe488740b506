//! Problem instances: objects with class labels, discrete-outcome tests and
//! per-test costs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub type ObjectId = usize;
pub type TestId = usize;
pub type ClassId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unknown object id {0}")]
    UnknownObject(ObjectId),
    #[error("unknown test id {0}")]
    UnknownTest(TestId),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("tree violates an invariant: {0}")]
    InvalidTree(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: ObjectId,
    #[serde(rename = "class")]
    pub class_id: ClassId,
    pub outcomes: Vec<usize>,
}

/// A test with `num_outcomes` possible results. `cost` is a numerator over
/// the owning instance's `cost_scale`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSpec {
    pub id: TestId,
    #[serde(default)]
    pub name: String,
    pub num_outcomes: usize,
    #[serde(default = "unit_cost")]
    pub cost: u64,
}

fn unit_cost() -> u64 {
    1
}

impl TestSpec {
    pub fn new(id: TestId, name: impl Into<String>, num_outcomes: usize, cost: u64) -> Self {
        TestSpec { id, name: name.into(), num_outcomes, cost }
    }

    /// Human readable label; falls back to the 1-based `t<n>` convention.
    pub fn label(&self) -> String {
        if self.name.is_empty() {
            format!("t{}", self.id + 1)
        } else {
            self.name.clone()
        }
    }
}

/// Per-class object counts of a set of objects.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassCounts {
    pub counts: Vec<u64>,
}

impl ClassCounts {
    pub fn zeros(num_classes: usize) -> Self {
        ClassCounts { counts: vec![0; num_classes] }
    }

    pub fn from_slice(counts: &[u64]) -> Self {
        ClassCounts { counts: counts.to_vec() }
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add(&mut self, class: ClassId) {
        self.counts[class] += 1;
    }

    /// Majority class, ties broken by the lowest class id.
    pub fn majority(&self) -> ClassId {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    /// Objects outside the majority class.
    pub fn minority(&self) -> u64 {
        self.total() - self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn classes_present(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn is_pure(&self) -> bool {
        self.classes_present() <= 1
    }
}

impl From<Vec<u64>> for ClassCounts {
    fn from(counts: Vec<u64>) -> Self {
        ClassCounts { counts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    objects: Vec<ObjectRecord>,
    num_classes: usize,
    tests: Vec<TestSpec>,
    cost_scale: u64,
}

impl Instance {
    /// Validates ids, class labels and outcome ranges. Object and test ids
    /// must equal their positions.
    pub fn new(
        objects: Vec<ObjectRecord>,
        num_classes: usize,
        tests: Vec<TestSpec>,
        cost_scale: u64,
    ) -> Result<Self, CoreError> {
        let bad = |msg: String| Err(CoreError::InvalidInstance(msg));
        if num_classes == 0 {
            return bad("num_classes must be positive".into());
        }
        if cost_scale == 0 {
            return bad("cost_scale must be positive".into());
        }
        for (i, t) in tests.iter().enumerate() {
            if t.id != i {
                return bad(format!("test at position {i} has id {}", t.id));
            }
            if t.num_outcomes < 2 {
                return bad(format!("test {i} has fewer than 2 outcomes"));
            }
        }
        for (i, o) in objects.iter().enumerate() {
            if o.id != i {
                return bad(format!("object at position {i} has id {}", o.id));
            }
            if o.class_id >= num_classes {
                return bad(format!("object {i} has class {} outside [0, {num_classes})", o.class_id));
            }
            if o.outcomes.len() != tests.len() {
                return bad(format!(
                    "object {i} has {} outcomes, expected {}",
                    o.outcomes.len(),
                    tests.len()
                ));
            }
            for (t, &v) in o.outcomes.iter().enumerate() {
                if v >= tests[t].num_outcomes {
                    return bad(format!("object {i} has outcome {v} for test {t} with {} outcomes", tests[t].num_outcomes));
                }
            }
        }
        Ok(Instance { objects, num_classes, tests, cost_scale })
    }

    /// Convenience constructor: unit costs, binary or wider tests sized from
    /// the observed outcomes (at least 2).
    pub fn from_rows(classes: &[ClassId], outcomes: &[Vec<usize>], num_classes: usize) -> Result<Self, CoreError> {
        if classes.len() != outcomes.len() {
            return Err(CoreError::InvalidInstance("classes and outcome rows differ in length".into()));
        }
        let num_tests = outcomes.first().map_or(0, Vec::len);
        let tests = (0..num_tests)
            .map(|t| {
                let max = outcomes.iter().filter_map(|row| row.get(t)).copied().max().unwrap_or(0);
                TestSpec::new(t, "", (max + 1).max(2), 1)
            })
            .collect();
        let objects = classes
            .iter()
            .zip(outcomes)
            .enumerate()
            .map(|(id, (&class_id, row))| ObjectRecord { id, class_id, outcomes: row.clone() })
            .collect();
        Instance::new(objects, num_classes, tests, 1)
    }

    pub fn objects(&self) -> &[ObjectRecord] {
        &self.objects
    }

    pub fn tests(&self) -> &[TestSpec] {
        &self.tests
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn cost_scale(&self) -> u64 {
        self.cost_scale
    }

    pub fn object_ids(&self) -> Vec<ObjectId> {
        (0..self.objects.len()).collect()
    }

    pub fn test_ids(&self) -> Vec<TestId> {
        (0..self.tests.len()).collect()
    }

    pub fn class_of(&self, id: ObjectId) -> ClassId {
        self.objects[id].class_id
    }

    pub fn outcome(&self, object: ObjectId, test: TestId) -> usize {
        self.objects[object].outcomes[test]
    }

    pub fn test(&self, id: TestId) -> Result<&TestSpec, CoreError> {
        self.tests.get(id).ok_or(CoreError::UnknownTest(id))
    }

    /// Exact cost of a test, `cost / cost_scale`.
    pub fn cost(&self, test: TestId) -> Rational {
        Rational::new(self.tests[test].cost as i128, self.cost_scale as i128)
    }

    pub fn class_counts(&self, object_ids: &[ObjectId]) -> Result<ClassCounts, CoreError> {
        let mut counts = ClassCounts::zeros(self.num_classes);
        for &id in object_ids {
            let o = self.objects.get(id).ok_or(CoreError::UnknownObject(id))?;
            counts.add(o.class_id);
        }
        Ok(counts)
    }

    /// Partitions `object_ids` by outcome of `test`; part `i` holds the
    /// objects with outcome `i`, in input order.
    pub fn split(&self, object_ids: &[ObjectId], test: TestId) -> Result<Vec<Vec<ObjectId>>, CoreError> {
        let spec = self.test(test)?;
        let mut parts = vec![Vec::new(); spec.num_outcomes];
        for &id in object_ids {
            let o = self.objects.get(id).ok_or(CoreError::UnknownObject(id))?;
            parts[o.outcomes[test]].push(id);
        }
        Ok(parts)
    }

    /// Groups of object ids sharing an identical outcome vector (size ≥ 2).
    pub fn duplicate_groups(&self) -> Vec<Vec<ObjectId>> {
        let mut groups: HashMap<&[usize], Vec<ObjectId>> = HashMap::new();
        for o in &self.objects {
            groups.entry(o.outcomes.as_slice()).or_default().push(o.id);
        }
        let mut dups: Vec<Vec<ObjectId>> = groups.into_values().filter(|g| g.len() > 1).collect();
        dups.sort();
        dups
    }

    /// True when every pair of distinct objects is separated by some test.
    pub fn is_complete(&self) -> bool {
        self.duplicate_groups().is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, InstanceFileError> {
        let file: InstanceFile = serde_json::from_str(s)?;
        Ok(Instance::try_from(file)?)
    }
}

/// JSON interchange form: `{"num_classes":k,"objects":[...],"tests":[...],"costs":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub num_classes: usize,
    pub objects: Vec<ObjectRecord>,
    pub tests: Vec<TestFileEntry>,
    /// Cost numerators, one per test. Defaults to unit costs when absent.
    #[serde(default)]
    pub costs: Option<Vec<u64>>,
    #[serde(default = "unit_cost")]
    pub cost_scale: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFileEntry {
    pub id: TestId,
    #[serde(default)]
    pub name: String,
    pub num_outcomes: usize,
}

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] CoreError),
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            num_classes: inst.num_classes,
            objects: inst.objects.clone(),
            tests: inst
                .tests
                .iter()
                .map(|t| TestFileEntry { id: t.id, name: t.name.clone(), num_outcomes: t.num_outcomes })
                .collect(),
            costs: Some(inst.tests.iter().map(|t| t.cost).collect()),
            cost_scale: inst.cost_scale,
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = CoreError;

    fn try_from(file: InstanceFile) -> Result<Self, CoreError> {
        let costs = match file.costs {
            Some(c) if c.len() != file.tests.len() => {
                return Err(CoreError::InvalidInstance(format!(
                    "{} costs given for {} tests",
                    c.len(),
                    file.tests.len()
                )))
            }
            Some(c) => c,
            None => vec![1; file.tests.len()],
        };
        let tests = file
            .tests
            .into_iter()
            .zip(costs)
            .map(|(t, cost)| TestSpec { id: t.id, name: t.name, num_outcomes: t.num_outcomes, cost })
            .collect();
        Instance::new(file.objects, file.num_classes, tests, file.cost_scale)
    }
}
