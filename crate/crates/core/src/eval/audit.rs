use thiserror::Error;

use crate::greedy::{build_with, GreedyError};
use crate::impurity::{Impurity, ImpurityError, ImpurityFn};
use crate::instance::{ClassCounts, CoreError, Instance};
use crate::oracle::{enumerate_trees, opt_error_constrained, opt_max_cost, OracleError, OracleLimits};
use crate::rational::{to_f64, Rational};
use crate::tree::{DecisionTree, Node, NodeId};

pub const DEFAULT_ETA_GRID: [(i128, i128); 4] = [(0, 1), (1, 20), (1, 10), (1, 5)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("leaf {leaf} has impurity {impurity} under {function}; the tree does not reach zero impurity")]
    PreconditionViolated { leaf: NodeId, impurity: u128, function: String },
    #[error("{0} is not a hinged impurity")]
    NotHinged(String),
    #[error("instance has no objects")]
    EmptyInstance,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One error bound evaluated on one tree. `eta` is `None` for the bound in
/// terms of all leaves and `Some` for the bound over the heaviest leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRecord {
    pub k: usize,
    pub l: usize,
    pub eta: Option<Rational>,
    pub l_eta: Option<usize>,
    pub epsilon: Rational,
    pub error: Rational,
    pub bound: Rational,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundAudit {
    pub records: Vec<BoundRecord>,
}

impl BoundAudit {
    pub fn all_satisfied(&self) -> bool {
        self.records.iter().all(|r| r.satisfied)
    }
}

fn int(v: usize) -> Rational {
    Rational::from_integer(v as i128)
}

/// Smallest number of leaves, taken largest first, holding at least
/// `(1 − eta)·n` objects.
fn heavy_leaves(sizes: &[u64], n: usize, eta: Rational) -> usize {
    let need = (Rational::from_integer(1) - eta) * int(n);
    let mut acc = Rational::from_integer(0);
    if acc >= need {
        return 0;
    }
    for (i, &s) in sizes.iter().enumerate() {
        acc += Rational::from_integer(s as i128);
        if acc >= need {
            return i + 1;
        }
    }
    sizes.len()
}

/// Checks `error ≤ k(k−1)·l·ε` and, per `eta`, `error ≤ k(k−1)·l_η·ε + (k−1)/k·η`
/// for a tree whose populated leaves all have zero hinged impurity, with
/// `ε = α/n`. `k` counts the classes present and `l` the populated leaves.
pub fn audit_error_bounds(
    tree: &DecisionTree,
    instance: &Instance,
    f: &ImpurityFn,
    eta_grid: &[Rational],
) -> Result<BoundAudit, AuditError> {
    let alpha = f.alpha().ok_or_else(|| AuditError::NotHinged(f.to_string()))?;
    let n = instance.num_objects();
    if n == 0 {
        return Err(AuditError::EmptyInstance);
    }
    for (leaf, node) in tree.leaves() {
        if let Node::Leaf { objects, .. } = node {
            let v = f.evaluate(&instance.class_counts(objects)?)?;
            if v > 0 {
                return Err(AuditError::PreconditionViolated { leaf, impurity: v, function: f.to_string() });
            }
        }
    }
    let k = instance.class_counts(&instance.object_ids())?.classes_present();
    let sizes = tree.leaf_sizes(instance)?;
    let l = sizes.len();
    let epsilon = alpha / int(n);
    let error = tree.classification_error(instance)?;
    let pair_factor = int(k * k.saturating_sub(1));
    let mut records = Vec::with_capacity(eta_grid.len() + 1);
    let bound = pair_factor * int(l) * epsilon;
    records.push(BoundRecord { k, l, eta: None, l_eta: None, epsilon, error, bound, satisfied: error <= bound });
    for &eta in eta_grid {
        let l_eta = heavy_leaves(&sizes, n, eta);
        let spread = if k == 0 { Rational::from_integer(0) } else { Rational::new(k as i128 - 1, k as i128) };
        let bound = pair_factor * int(l_eta) * epsilon + spread * eta;
        records.push(BoundRecord {
            k,
            l,
            eta: Some(eta),
            l_eta: Some(l_eta),
            epsilon,
            error,
            bound,
            satisfied: error <= bound,
        });
    }
    Ok(BoundAudit { records })
}

/// Max-cost of the subtree rooted at `node`, over leaves that hold objects.
pub fn subtree_cost(tree: &DecisionTree, instance: &Instance, node: NodeId) -> Result<Rational, CoreError> {
    match tree.node(node)? {
        Node::Leaf { .. } => Ok(Rational::from_integer(0)),
        Node::Internal { test, children } => {
            let mut worst = None::<Rational>;
            for &c in children {
                if let Node::Leaf { objects, .. } = tree.node(c)? {
                    if objects.is_empty() {
                        continue;
                    }
                }
                let v = subtree_cost(tree, instance, c)?;
                worst = Some(worst.map_or(v, |w| w.max(v)));
            }
            Ok(instance.cost(*test) + worst.unwrap_or(Rational::from_integer(0)))
        }
    }
}

/// Lower bounds on the optimum derived from the greedy root split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBound {
    /// `c(τ)(F(S) − δ) / (F(S) − F(S_q))`, `q` the costliest greedy child.
    pub costliest_child: Rational,
    /// `R(τ)(F(S) − δ)`, at least as large as `costliest_child`.
    pub score_bound: Rational,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub impurity: String,
    pub delta: u128,
    pub root_impurity: u128,
    pub greedy_cost: Rational,
    pub opt: Rational,
    /// `greedy / opt`, absent when the optimum is 0.
    pub ratio: Option<Rational>,
    /// `ln F(S) + 1` with `F` in integer units.
    pub log_bound: f64,
    pub within_log_bound: bool,
    pub root_bound: Option<RootBound>,
    /// For hinged impurities at `δ = 0`: the optimum over trees with error at
    /// most `α/n`, which must be at least `opt`.
    pub error_constrained_opt: Option<Rational>,
    pub chain_holds: Option<bool>,
}

impl ApproximationReport {
    pub fn all_satisfied(&self) -> bool {
        self.within_log_bound && self.root_bound.as_ref().is_none_or(|r| r.satisfied) && self.chain_holds != Some(false)
    }
}

/// Compares the greedy tree with the exact optimum on a small instance.
pub fn audit_approximation(
    instance: &Instance,
    f: &ImpurityFn,
    delta: u128,
    limits: OracleLimits,
) -> Result<ApproximationReport, AuditError> {
    let all = instance.object_ids();
    if all.is_empty() {
        return Err(AuditError::EmptyInstance);
    }
    let (tree, trace) = build_with(instance, &all, &instance.test_ids(), f, delta)?;
    let greedy_cost = tree.max_cost(instance)?;
    let opt = opt_max_cost(instance, f, delta, limits)?;
    let root_impurity = f.evaluate(&instance.class_counts(&all)?)?;
    let log_bound = if root_impurity == 0 { 1.0 } else { (root_impurity as f64).ln() + 1.0 };
    let zero = Rational::from_integer(0);
    let within_log_bound = if opt == zero {
        greedy_cost == zero
    } else {
        to_f64(&greedy_cost) <= log_bound * to_f64(&opt) * (1.0 + 1e-12)
    };
    let ratio = (opt != zero).then(|| greedy_cost / opt);

    let root_bound = match (trace.root(), &tree.nodes[tree.root]) {
        (Some(root), Node::Internal { children, .. }) => {
            let gap = Rational::from_integer((root_impurity - delta) as i128);
            let mut q = None::<(Rational, usize)>;
            for (i, &c) in children.iter().enumerate() {
                if matches!(tree.node(c)?, Node::Leaf { objects, .. } if objects.is_empty()) {
                    continue;
                }
                let v = subtree_cost(&tree, instance, c)?;
                if q.is_none_or(|(w, _)| v > w) {
                    q = Some((v, i));
                }
            }
            let (_, qi) = q.expect("a split root has a populated child");
            let reduction = Rational::from_integer((root_impurity - root.child_impurities[qi]) as i128);
            let costliest_child = instance.cost(root.chosen_test) * gap / reduction;
            let score = root.chosen_score.finite().expect("chosen split has a finite score");
            let score_bound = score * gap;
            Some(RootBound { costliest_child, score_bound, satisfied: costliest_child <= opt && score_bound <= opt })
        }
        _ => None,
    };

    let (error_constrained_opt, chain_holds) = match f.alpha() {
        Some(alpha) if delta == 0 => {
            let epsilon = alpha / int(all.len());
            let e = opt_error_constrained(instance, epsilon, limits)?;
            (Some(e), Some(opt <= e))
        }
        _ => (None, None),
    };

    Ok(ApproximationReport {
        impurity: f.to_string(),
        delta,
        root_impurity,
        greedy_cost,
        opt,
        ratio,
        log_bound,
        within_log_bound,
        root_bound,
        error_constrained_opt,
        chain_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingViolation {
    pub alpha: Rational,
    pub tree: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmbeddingReport {
    pub trees: usize,
    pub checks: usize,
    pub violations: Vec<EmbeddingViolation>,
}

/// Classifies every enumerated tree, for each integer `α` in `0..=n` with
/// `ε = α/n`, and checks that low-error trees have zero hinged impurity at
/// every leaf and that zero-impurity trees have error at most `k(k−1)·l·ε`.
pub fn audit_embedding(instance: &Instance, family: &ImpurityFn, limits: OracleLimits) -> Result<EmbeddingReport, AuditError> {
    if family.alpha().is_none() {
        return Err(AuditError::NotHinged(family.to_string()));
    }
    let n = instance.num_objects();
    if n == 0 {
        return Err(AuditError::EmptyInstance);
    }
    let k = instance.class_counts(&instance.object_ids())?.classes_present();
    let pair_factor = int(k * k.saturating_sub(1));
    let hinges: Vec<(Rational, ImpurityFn)> = (0..=n)
        .map(|a| Ok((int(a), family.with_alpha(int(a))?)))
        .collect::<Result<_, ImpurityError>>()?;
    let mut report = EmbeddingReport::default();
    for (index, tree) in enumerate_trees(instance, limits)?.enumerate() {
        report.trees += 1;
        let leaves: Vec<ClassCounts> = tree.leaf_class_counts(instance)?;
        let error = Rational::new(leaves.iter().map(ClassCounts::minority).sum::<u64>() as i128, n as i128);
        let l = int(leaves.len());
        for (alpha, f) in &hinges {
            report.checks += 1;
            let epsilon = alpha / int(n);
            let mut zero = true;
            for c in &leaves {
                if f.evaluate(c)? > 0 {
                    zero = false;
                    break;
                }
            }
            if error <= epsilon && !zero {
                report.violations.push(EmbeddingViolation {
                    alpha: *alpha,
                    tree: index,
                    detail: format!("error {error} within {epsilon} but some leaf has positive {f}"),
                });
            }
            let bound = pair_factor * l * epsilon;
            if zero && error > bound {
                report.violations.push(EmbeddingViolation {
                    alpha: *alpha,
                    tree: index,
                    detail: format!("all leaves zero under {f} but error {error} exceeds {bound}"),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_fig1, gen_synthetic_outlier};

    fn eta_grid() -> Vec<Rational> {
        DEFAULT_ETA_GRID.iter().map(|&(p, q)| Rational::new(p, q)).collect()
    }

    #[test]
    fn heavy_leaf_count() {
        assert_eq!(heavy_leaves(&[5, 3, 2], 10, Rational::from_integer(0)), 3);
        assert_eq!(heavy_leaves(&[5, 3, 2], 10, Rational::new(1, 5)), 2);
        assert_eq!(heavy_leaves(&[5, 3, 2], 10, Rational::new(1, 2)), 1);
        assert_eq!(heavy_leaves(&[5, 3, 2], 10, Rational::from_integer(1)), 0);
    }

    #[test]
    fn zero_alpha_tree_has_zero_error_and_bound() {
        let inst = gen_synthetic_outlier();
        let f = ImpurityFn::hinged(Rational::from_integer(0)).unwrap();
        let (tree, _) = build_with(&inst, &inst.object_ids(), &inst.test_ids(), &f, 0).unwrap();
        let audit = audit_error_bounds(&tree, &inst, &f, &eta_grid()).unwrap();
        assert!(audit.all_satisfied());
        assert_eq!(audit.records[0].bound, Rational::from_integer(0));
        assert_eq!(audit.records[1].l_eta, Some(audit.records[0].l));
        assert_eq!(audit.records[1].bound, audit.records[0].bound);
    }

    #[test]
    fn precondition_checked() {
        let inst = gen_fig1(true);
        let tree = DecisionTree::single_leaf(&inst, &inst.object_ids(), 0).unwrap();
        let f = ImpurityFn::hinged(Rational::from_integer(1)).unwrap();
        assert!(matches!(audit_error_bounds(&tree, &inst, &f, &[]), Err(AuditError::PreconditionViolated { .. })));
        assert!(matches!(audit_error_bounds(&tree, &inst, &ImpurityFn::Pairs, &[]), Err(AuditError::NotHinged(_))));
    }

    #[test]
    fn trivial_approximation_cases() {
        let single = Instance::from_rows(&[0, 0], &[vec![0], vec![1]], 1).unwrap();
        let r = audit_approximation(&single, &ImpurityFn::Pairs, 0, OracleLimits::default()).unwrap();
        assert_eq!((r.greedy_cost, r.opt), (Rational::from_integer(0), Rational::from_integer(0)));
        assert!(r.all_satisfied());
        let pair = Instance::from_rows(&[0, 1], &[vec![0], vec![1]], 2).unwrap();
        let r = audit_approximation(&pair, &ImpurityFn::Pairs, 0, OracleLimits::default()).unwrap();
        assert_eq!(r.ratio, Some(Rational::from_integer(1)));
        assert!(r.all_satisfied());
        let f = ImpurityFn::hinged(Rational::from_integer(0)).unwrap();
        let r = audit_approximation(&pair, &f, 0, OracleLimits::default()).unwrap();
        assert_eq!(r.chain_holds, Some(true));
    }

    #[test]
    fn embedding_on_tiny_instance() {
        let inst = Instance::from_rows(&[0, 1, 1], &[vec![0, 0], vec![0, 1], vec![1, 0]], 2).unwrap();
        let f = ImpurityFn::hinged(Rational::from_integer(0)).unwrap();
        let r = audit_embedding(&inst, &f, OracleLimits::enumeration()).unwrap();
        assert!(r.trees > 1);
        assert_eq!(r.checks, r.trees * 4);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
    }
}
