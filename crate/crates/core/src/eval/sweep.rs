use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::greedy::{build_budgeted_with, build_with};
use crate::impurity::{Impurity, ImpurityError, ImpurityFn};
use crate::instance::{CoreError, Instance};
use crate::rational::{format_decimal, format_exact, Rational};
use crate::tree::DecisionTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("negative sweep parameter {0}")]
    NegativeParameter(String),
    #[error("alpha sweeps need a hinged impurity, got {0}")]
    NotHinged(String),
    #[error("curves do not share a parameter grid")]
    MismatchedGrids,
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepKind {
    /// Stopping threshold, in the impurity's own value scale.
    Delta(ImpurityFn),
    /// Hinge parameter of a hinged impurity, stopping at zero impurity.
    Alpha(ImpurityFn),
    /// Per-path cost budget, stopping at zero impurity.
    Budget(ImpurityFn),
}

impl SweepKind {
    pub fn impurity(&self) -> &ImpurityFn {
        match self {
            SweepKind::Delta(f) | SweepKind::Alpha(f) | SweepKind::Budget(f) => f,
        }
    }

    pub fn parameter_name(&self) -> &'static str {
        match self {
            SweepKind::Delta(_) => "delta",
            SweepKind::Alpha(_) => "alpha",
            SweepKind::Budget(_) => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointResult {
    Built { max_cost: Rational, misclassified: u64, leaves: usize },
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub parameter: Rational,
    /// Impurity that produced the point.
    pub impurity: String,
    pub result: PointResult,
}

impl TradeoffPoint {
    pub fn error(&self, num_objects: usize) -> Option<Rational> {
        match self.result {
            PointResult::Built { misclassified, .. } => {
                Some(Rational::new(misclassified as i128, num_objects.max(1) as i128))
            }
            PointResult::Infeasible(_) => None,
        }
    }

    fn rank(&self) -> Option<(u64, Rational)> {
        match self.result {
            PointResult::Built { max_cost, misclassified, .. } => Some((misclassified, max_cost)),
            PointResult::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffCurve {
    pub parameter: String,
    pub impurity: String,
    pub num_objects: usize,
    pub points: Vec<TradeoffPoint>,
}

fn point_for(instance: &Instance, kind: &SweepKind, p: Rational) -> Result<(String, Result<DecisionTree, String>), SweepError> {
    if p < Rational::from_integer(0) {
        return Err(SweepError::NegativeParameter(format_exact(&p)));
    }
    let all = instance.object_ids();
    let tests = instance.test_ids();
    let (name, built) = match kind {
        SweepKind::Delta(f) => {
            let delta = (p * Rational::from_integer(f.units() as i128)).floor().to_integer() as u128;
            (f.to_string(), build_with(instance, &all, &tests, f, delta))
        }
        SweepKind::Alpha(f) => {
            if f.alpha().is_none() {
                return Err(SweepError::NotHinged(f.to_string()));
            }
            let g = f.with_alpha(p)?;
            (g.to_string(), build_with(instance, &all, &tests, &g, 0))
        }
        SweepKind::Budget(f) => (f.to_string(), build_budgeted_with(instance, f, 0, p)),
    };
    Ok((name, built.map(|(t, _)| t).map_err(|e| e.to_string())))
}

/// One greedy build per grid point, computed in parallel and reported in
/// grid order. Points whose build fails are kept as infeasible.
pub fn sweep(instance: &Instance, kind: &SweepKind, grid: &[Rational]) -> Result<TradeoffCurve, SweepError> {
    if grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let points = grid
        .par_iter()
        .map(|&p| {
            let (impurity, built) = point_for(instance, kind, p)?;
            let result = match built {
                Ok(tree) => PointResult::Built {
                    max_cost: tree.max_cost(instance)?,
                    misclassified: tree.misclassified(instance)?,
                    leaves: tree.num_leaves(),
                },
                Err(msg) => PointResult::Infeasible(msg),
            };
            Ok(TradeoffPoint { parameter: p, impurity, result })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(TradeoffCurve {
        parameter: kind.parameter_name().to_string(),
        impurity: kind.impurity().to_string(),
        num_objects: instance.num_objects(),
        points,
    })
}

/// Per grid point, the lowest-error point across `curves`; ties go to the
/// lower max-cost, then to the earlier curve.
pub fn best_of(curves: &[TradeoffCurve]) -> Result<TradeoffCurve, SweepError> {
    let first = curves.first().ok_or(SweepError::EmptyGrid)?;
    let grid: Vec<Rational> = first.points.iter().map(|p| p.parameter).collect();
    let same = |c: &TradeoffCurve| c.points.iter().map(|p| p.parameter).eq(grid.iter().copied());
    if !curves.iter().all(|c| same(c) && c.parameter == first.parameter) {
        return Err(SweepError::MismatchedGrids);
    }
    let points = (0..grid.len())
        .map(|i| {
            let mut best = &first.points[i];
            for c in &curves[1..] {
                let p = &c.points[i];
                let better = match (p.rank(), best.rank()) {
                    (Some(a), Some(b)) => a < b,
                    (Some(_), None) => true,
                    _ => false,
                };
                if better {
                    best = p;
                }
            }
            best.clone()
        })
        .collect();
    Ok(TradeoffCurve {
        parameter: first.parameter.clone(),
        impurity: "best-of".to_string(),
        num_objects: first.num_objects,
        points,
    })
}

/// Columns: `impurity,parameter,max_cost,error,error_decimal,leaves,status`.
/// `error` is printed unreduced as `misclassified/n`.
pub fn write_csv<W: Write>(out: W, curves: &[TradeoffCurve]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["impurity", "parameter", "max_cost", "error", "error_decimal", "leaves", "status"])?;
    for c in curves {
        for p in &c.points {
            let param = format_exact(&p.parameter);
            match &p.result {
                PointResult::Built { max_cost, misclassified, leaves } => {
                    let err = Rational::new(*misclassified as i128, c.num_objects.max(1) as i128);
                    w.write_record([
                        p.impurity.as_str(),
                        &param,
                        &format_exact(max_cost),
                        &format!("{misclassified}/{}", c.num_objects),
                        &format_decimal(&err),
                        &leaves.to_string(),
                        "ok",
                    ])?;
                }
                PointResult::Infeasible(_) => {
                    w.write_record([p.impurity.as_str(), &param, "", "", "", "", "infeasible"])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
