use std::fs;
use std::io::Write;
use std::path::Path;

use dfep::data::{random_instance, RandomSpec};
use dfep::eval::{
    audit_approximation, audit_embedding, audit_error_bounds, best_of, render_svg, AuditError, PointResult,
    SweepError, SweepKind,
};
use dfep::greedy::{build_budgeted_with, build_with, delta_from_fraction, GreedyError};
use dfep::impurity::check_admissibility;
use dfep::oracle::OracleError;
use dfep::rational::{format_decimal, format_exact, parse_rational};
use dfep::{DecisionTree, Impurity, ImpurityFn, Instance, OracleLimits, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{AuditArgs, BuildArgs, SweepArgs};
use crate::input;
use crate::Failure;

fn greedy_failure(e: GreedyError) -> Failure {
    match e {
        GreedyError::IncompleteInstance { .. } => Failure::new(Failure::INCOMPLETE, e.to_string()),
        other => Failure::parse(other.to_string()),
    }
}

fn audit_failure(e: AuditError) -> Failure {
    match e {
        AuditError::Oracle(OracleError::LimitExceeded { .. }) => Failure::new(Failure::LIMIT, e.to_string()),
        AuditError::Greedy(g) => greedy_failure(g),
        AuditError::PreconditionViolated { .. } => Failure::new(Failure::VIOLATED, e.to_string()),
        other => Failure::parse(other.to_string()),
    }
}

/// Writes to standard output, treating a closed pipe as success.
pub fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::parse(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::parse(format!("{}: {e}", p.display()))),
        None => emit(text),
    }
}

/// Threshold in the impurity's integer units.
fn units_delta(f: &ImpurityFn, delta: Rational) -> u128 {
    (delta * Rational::from_integer(f.units() as i128)).floor().to_integer().max(0) as u128
}

/// Tree JSON with each internal node's test label alongside its id.
fn labelled_tree_json(tree: &DecisionTree, instance: &Instance) -> String {
    let mut value = serde_json::to_value(tree).expect("tree serializes");
    if let Some(nodes) = value.get_mut("nodes").and_then(|n| n.as_array_mut()) {
        for node in nodes {
            let test = node.get("test").and_then(|t| t.as_u64());
            if let (Some(t), Some(obj)) = (test, node.as_object_mut()) {
                obj.insert("test_label".into(), instance.tests()[t as usize].label().into());
            }
        }
    }
    serde_json::to_string_pretty(&value).expect("tree serializes") + "\n"
}

pub fn build(a: &BuildArgs) -> Result<(), Failure> {
    let inst = input::load(&a.input)?;
    let f = &a.impurity;
    let delta = match (a.delta, a.delta_frac) {
        (Some(d), _) => units_delta(f, d),
        (None, Some(frac)) => delta_from_fraction(f, &inst, frac).map_err(greedy_failure)?,
        (None, None) => 0,
    };
    let (tree, trace) = match a.budget {
        Some(b) => build_budgeted_with(&inst, f, delta, b),
        None => build_with(&inst, &inst.object_ids(), &inst.test_ids(), f, delta),
    }
    .map_err(greedy_failure)?;
    write_out(a.output.as_deref(), &labelled_tree_json(&tree, &inst))?;
    if let Some(p) = &a.trace {
        fs::write(p, trace.to_json() + "\n").map_err(|e| Failure::parse(format!("{}: {e}", p.display())))?;
    }
    let cost = tree.max_cost(&inst).map_err(|e| Failure::parse(e.to_string()))?;
    let wrong = tree.misclassified(&inst).map_err(|e| Failure::parse(e.to_string()))?;
    emit(&(format!(
        "max_cost={} error={wrong}/{} leaves={}",
        format_exact(&cost),
        inst.num_objects(),
        tree.num_leaves()
    ) + "\n"))?;
    Ok(())
}

/// `A..B` for the integers from A to B inclusive, or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<Rational>, Failure> {
    let bad = |why: &str| Failure::parse(format!("grid `{s}`: {why}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i128 = lo.trim().parse().map_err(|_| bad("range bounds must be integers"))?;
        let hi: i128 = hi.trim().parse().map_err(|_| bad("range bounds must be integers"))?;
        if lo > hi {
            return Err(bad("empty range"));
        }
        return Ok((lo..=hi).map(Rational::from_integer).collect());
    }
    let grid = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_rational(p.trim()).map_err(|e| bad(&e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(grid)
}

pub fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let inst = input::load(&a.input)?;
    let (grid, make): (&str, fn(ImpurityFn) -> SweepKind) = match (&a.budget_grid, &a.delta_grid, &a.alpha_grid) {
        (Some(g), _, _) => (g, SweepKind::Budget),
        (_, Some(g), _) => (g, SweepKind::Delta),
        (_, _, Some(g)) => (g, SweepKind::Alpha),
        _ => return Err(Failure::parse("pass one of --budget-grid, --delta-grid, --alpha-grid")),
    };
    let grid = parse_grid(grid)?;
    let sweep_failure = |e: SweepError| Failure::parse(e.to_string());
    let curves = a
        .impurity
        .iter()
        .map(|f| dfep::eval::sweep(&inst, &make(f.clone()), &grid).map_err(sweep_failure))
        .collect::<Result<Vec<_>, _>>()?;
    let curves = if a.best_of { vec![best_of(&curves).map_err(sweep_failure)?] } else { curves };
    for c in &curves {
        for p in &c.points {
            if let PointResult::Infeasible(why) = &p.result {
                eprintln!("{} at {}={}: {why}", p.impurity, c.parameter, format_exact(&p.parameter));
            }
        }
    }
    let mut csv = Vec::new();
    dfep::eval::write_csv(&mut csv, &curves).map_err(|e| Failure::parse(e.to_string()))?;
    write_out(a.output.as_deref(), &String::from_utf8(csv).expect("csv is utf-8"))?;
    if let Some(p) = &a.svg {
        let title = format!("error vs max-cost ({} sweep)", curves[0].parameter);
        fs::write(p, render_svg(&curves, &title)).map_err(|e| Failure::parse(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn bits_for(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize
}

/// Complete binary instances with `2..=max_n` objects and up to `max_tests`
/// tests.
fn random_instances(a: &AuditArgs, count: usize, max_n: usize, max_tests: usize) -> Result<Vec<Instance>, Failure> {
    if a.classes == 0 {
        return Err(Failure::parse("--classes must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n);
            let tests = rng.random_range(bits_for(n).max(1)..=max_tests);
            let classes = rng.random_range(1..=a.classes);
            random_instance(&mut rng, RandomSpec::binary(n, tests, classes)).map_err(|e| Failure::parse(e.to_string()))
        })
        .collect()
}

fn audit_instances(a: &AuditArgs, max_n: usize, max_tests: usize) -> Result<Vec<Instance>, Failure> {
    match a.random {
        Some(count) => random_instances(a, count, max_n, max_tests),
        None if a.input.input.is_some() || a.input.synthetic.is_some() => Ok(vec![input::load(&a.input)?]),
        None => Err(Failure::parse("pass INPUT, --synthetic or --random N")),
    }
}

fn hinged_family(a: &AuditArgs, alpha: Rational) -> Result<ImpurityFn, Failure> {
    let f = if a.offset { ImpurityFn::hinged_offset(alpha) } else { ImpurityFn::hinged(alpha) };
    f.map_err(|e| Failure::parse(e.to_string()))
}

fn finish(audited: usize, violations: usize) -> Result<(), Failure> {
    emit(&(format!("audited={audited} violations={violations}") + "\n"))?;
    if violations > 0 {
        Err(Failure::new(Failure::VIOLATED, format!("{violations} violated checks")))
    } else {
        Ok(())
    }
}

pub fn audit(a: &AuditArgs) -> Result<(), Failure> {
    if let Some(spec) = &a.admissibility {
        return audit_admissibility(a, spec);
    }
    if a.approximation {
        return audit_approx(a);
    }
    if a.error_bounds {
        return audit_errors(a);
    }
    audit_embed(a)
}

fn audit_admissibility(a: &AuditArgs, spec: &str) -> Result<(), Failure> {
    let f = ImpurityFn::parse_unchecked(spec).map_err(|e| Failure::parse(e.to_string()))?;
    let grounds = if a.input.input.is_some() || a.input.synthetic.is_some() {
        vec![input::load(&a.input)?]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        (0..a.random.unwrap_or(1))
            .map(|_| {
                let spec = RandomSpec { objects: a.n, tests: 0, classes: a.classes.max(1), outcomes: 2, complete: false };
                random_instance(&mut rng, spec).map_err(|e| Failure::parse(e.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    let mut violations = 0;
    for (i, g) in grounds.iter().enumerate() {
        let report = check_admissibility(&f, g, a.n);
        emit(&(format!(
            "ground={i} impurity={} objects={} exhaustive={} subsets={} comparisons={} violations={}",
            report.impurity,
            g.num_objects(),
            report.exhaustive,
            report.subsets,
            report.comparisons,
            report.violations.len()
        ) + "\n"))?;
        for v in &report.violations {
            emit(&(format!("  witness {v}") + "\n"))?;
        }
        violations += report.violations.len();
    }
    finish(grounds.len(), violations)
}

fn audit_approx(a: &AuditArgs) -> Result<(), Failure> {
    let instances = audit_instances(a, 10, 6)?;
    let limits = OracleLimits::default();
    let (mut audited, mut violations) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        for f in &a.impurity {
            let r = audit_approximation(inst, f, units_delta(f, a.delta), limits).map_err(audit_failure)?;
            audited += 1;
            let ok = r.all_satisfied();
            violations += usize::from(!ok);
            emit(&(format!(
                "instance={i} impurity={} delta={} greedy={} opt={} ratio={} bound={:.6} root_bound={} chain={} status={}",
                r.impurity,
                r.delta,
                format_exact(&r.greedy_cost),
                format_exact(&r.opt),
                r.ratio.map_or("-".into(), |q| format_exact(&q)),
                r.log_bound,
                r.root_bound.as_ref().map_or("-", |b| if b.satisfied { "ok" } else { "VIOLATED" }),
                r.chain_holds.map_or("-", |c| if c { "ok" } else { "VIOLATED" }),
                if ok { "ok" } else { "VIOLATED" }
            ) + "\n"))?;
        }
    }
    finish(audited, violations)
}

fn audit_errors(a: &AuditArgs) -> Result<(), Failure> {
    let instances = audit_instances(a, 12, 8)?;
    let f = hinged_family(a, a.alpha)?;
    let (mut audited, mut violations) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        let (tree, _) = build_with(inst, &inst.object_ids(), &inst.test_ids(), &f, 0).map_err(greedy_failure)?;
        let audit = audit_error_bounds(&tree, inst, &f, &a.eta).map_err(audit_failure)?;
        for r in &audit.records {
            audited += 1;
            violations += usize::from(!r.satisfied);
            emit(&(format!(
                "instance={i} impurity={f} k={} l={} eta={} l_eta={} epsilon={} error={} bound={} ({}) status={}",
                r.k,
                r.l,
                r.eta.map_or("-".into(), |e| format_exact(&e)),
                r.l_eta.map_or("-".into(), |l| l.to_string()),
                format_exact(&r.epsilon),
                format_exact(&r.error),
                format_exact(&r.bound),
                format_decimal(&r.bound),
                if r.satisfied { "ok" } else { "VIOLATED" }
            ) + "\n"))?;
        }
    }
    finish(audited, violations)
}

fn audit_embed(a: &AuditArgs) -> Result<(), Failure> {
    let instances = audit_instances(a, 7, 4)?;
    let f = hinged_family(a, Rational::from_integer(0))?;
    let (mut audited, mut violations) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        let r = audit_embedding(inst, &f, OracleLimits::enumeration()).map_err(audit_failure)?;
        audited += r.checks;
        violations += r.violations.len();
        emit(&format!("instance={i} trees={} checks={} violations={}\n", r.trees, r.checks, r.violations.len()))?;
        for v in &r.violations {
            emit(&format!("  witness alpha={} tree={}: {}\n", format_exact(&v.alpha), v.tree, v.detail))?;
        }
    }
    finish(audited, violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0..3").unwrap();
        assert_eq!(g, (0..=3).map(Rational::from_integer).collect::<Vec<_>>());
        assert_eq!(parse_grid("1/2, 2").unwrap(), vec![Rational::new(1, 2), Rational::from_integer(2)]);
        assert!(parse_grid("3..1").is_err());
        assert!(parse_grid("").is_err());
        assert!(parse_grid("a..b").is_err());
    }
}
