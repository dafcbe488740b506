//! Brute-force verification of the admissibility properties of an impurity
//! function on the subsets of a ground set of objects.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Impurity, ImpurityError};
use crate::instance::{ClassCounts, Instance, ObjectId};

/// Largest ground set the exhaustive mode will enumerate regardless of
/// `max_n`. The subset table has `2^n` entries and the supermodularity pass
/// visits `3^n · n` triples.
const EXHAUSTIVE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    NonNegativity,
    Purity,
    Monotonicity,
    Supermodularity,
    Growth,
    Evaluation,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::NonNegativity => "non-negativity",
            Property::Purity => "purity",
            Property::Monotonicity => "monotonicity",
            Property::Supermodularity => "supermodularity",
            Property::Growth => "growth",
            Property::Evaluation => "evaluation",
        };
        f.write_str(s)
    }
}

/// A failed property with its `(R, G, j)` witness. Properties about a single
/// set leave `r` empty and `j` unset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: Property,
    pub r: Vec<ObjectId>,
    pub g: Vec<ObjectId>,
    pub j: Option<ObjectId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: R={:?} G={:?}", self.property, self.r, self.g)?;
        if let Some(j) = self.j {
            write!(f, " j={j}")?;
        }
        write!(f, " ({})", self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub impurity: String,
    pub exhaustive: bool,
    pub subsets: u64,
    pub comparisons: u64,
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, p: Property) -> bool {
        self.violations.iter().any(|v| v.property == p)
    }
}

#[derive(Debug, Clone)]
pub struct AdmissibilityOptions {
    /// Ground sets of at most this many objects are checked exhaustively.
    pub max_n: usize,
    /// Growth degree `d` in `F(S) ≤ n^d`; defaults to the impurity's own.
    pub degree: Option<u32>,
    /// Random `(R, G, j)` triples drawn when the ground set is too large.
    pub samples: usize,
    pub seed: u64,
    /// Witnesses kept per property before that property stops being checked.
    pub witnesses_per_property: usize,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions { max_n: 10, degree: None, samples: 200_000, seed: 0, witnesses_per_property: 1 }
    }
}

/// Checks `f` on the objects of `ground_set` with default options.
pub fn check_admissibility(f: &dyn Impurity, ground_set: &Instance, max_n: usize) -> AdmissibilityReport {
    check_admissibility_with(f, ground_set, &AdmissibilityOptions { max_n, ..Default::default() })
}

pub fn check_admissibility_with(
    f: &dyn Impurity,
    ground_set: &Instance,
    options: &AdmissibilityOptions,
) -> AdmissibilityReport {
    let n = ground_set.num_objects();
    let classes: Vec<usize> = ground_set.objects().iter().map(|o| o.class_id).collect();
    let mut checker = Checker {
        f,
        classes: &classes,
        num_classes: ground_set.num_classes(),
        options,
        report: AdmissibilityReport {
            impurity: f.name(),
            exhaustive: n <= options.max_n.min(EXHAUSTIVE_CAP),
            subsets: 0,
            comparisons: 0,
            violations: Vec::new(),
        },
    };
    checker.growth();
    if checker.report.exhaustive {
        checker.exhaustive();
    } else {
        checker.sampled();
    }
    checker.report
}

struct Checker<'a> {
    f: &'a dyn Impurity,
    classes: &'a [usize],
    num_classes: usize,
    options: &'a AdmissibilityOptions,
    report: AdmissibilityReport,
}

fn members(mask: u64) -> Vec<ObjectId> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

impl Checker<'_> {
    fn counts(&self, ids: impl Iterator<Item = ObjectId>) -> ClassCounts {
        let mut c = ClassCounts::zeros(self.num_classes);
        for i in ids {
            c.add(self.classes[i]);
        }
        c
    }

    fn wants(&self, p: Property) -> bool {
        self.report.violations.iter().filter(|v| v.property == p).count() < self.options.witnesses_per_property
    }

    fn record(&mut self, property: Property, r: Vec<ObjectId>, g: Vec<ObjectId>, j: Option<ObjectId>, detail: String) {
        if self.wants(property) {
            self.report.violations.push(Violation { property, r, g, j, detail });
        }
    }

    fn eval_error(&mut self, g: Vec<ObjectId>, e: ImpurityError) {
        self.record(Property::Evaluation, Vec::new(), g, None, e.to_string());
    }

    fn growth(&mut self) {
        let n = self.classes.len() as u128;
        let d = self.options.degree.unwrap_or_else(|| self.f.degree());
        let all = self.counts(0..self.classes.len());
        match self.f.evaluate(&all) {
            Ok(v) => {
                let limit = n.checked_pow(d).and_then(|p| p.checked_mul(self.f.units()));
                if limit.is_some_and(|l| v > l) {
                    self.record(
                        Property::Growth,
                        Vec::new(),
                        (0..self.classes.len()).collect(),
                        None,
                        format!("F(S) = {v} exceeds n^{d} = {}", n.pow(d)),
                    );
                }
            }
            Err(e) => self.eval_error((0..self.classes.len()).collect(), e),
        }
    }

    fn check_set(&mut self, mask: u64, value: u128) {
        let counts = self.counts(members(mask).into_iter());
        if counts.is_pure() && value != 0 && self.wants(Property::Purity) {
            self.record(Property::Purity, Vec::new(), members(mask), None, format!("F(G) = {value} on a single-class set"));
        }
    }

    fn check_triple(&mut self, r: u64, g: u64, j: usize, table: impl Fn(u64) -> Option<u128>) {
        let (Some(fr), Some(fg), Some(frj), Some(fgj)) = (table(r), table(g), table(r | 1 << j), table(g | 1 << j))
        else {
            return;
        };
        self.report.comparisons += 1;
        let gain_g = fgj as i128 - fg as i128;
        let gain_r = frj as i128 - fr as i128;
        if gain_g < gain_r {
            self.record(
                Property::Supermodularity,
                members(r),
                members(g),
                Some(j),
                format!("F(G+j)-F(G) = {gain_g} < F(R+j)-F(R) = {gain_r}"),
            );
        }
    }

    fn check_step(&mut self, g: u64, j: usize, fg: u128, fgj: u128) {
        if fgj < fg {
            self.record(
                Property::Monotonicity,
                members(g),
                members(g | 1 << j),
                Some(j),
                format!("F(R) = {fg} > F(R+j) = {fgj}"),
            );
        }
    }

    fn exhaustive(&mut self) {
        let n = self.classes.len();
        let size = 1usize << n;
        let mut table: Vec<Option<u128>> = Vec::with_capacity(size);
        for mask in 0..size as u64 {
            let counts = self.counts(members(mask).into_iter());
            match self.f.evaluate(&counts) {
                Ok(v) => table.push(Some(v)),
                Err(e) => {
                    self.eval_error(members(mask), e);
                    table.push(None);
                }
            }
        }
        self.report.subsets = size as u64;
        let full = (size - 1) as u64;
        for g in 0..size as u64 {
            let Some(fg) = table[g as usize] else { continue };
            self.check_set(g, fg);
            let outside = full & !g;
            for j in (0..n).filter(|j| outside >> j & 1 == 1) {
                // Single-element steps cover monotonicity for every R ⊆ G.
                if let Some(fgj) = table[(g | 1 << j) as usize] {
                    self.check_step(g, j, fg, fgj);
                }
                if !self.wants(Property::Supermodularity) {
                    continue;
                }
                let mut r = g;
                loop {
                    self.check_triple(r, g, j, |m| table[m as usize]);
                    if r == 0 {
                        break;
                    }
                    r = (r - 1) & g;
                }
            }
        }
    }

    fn sampled(&mut self) {
        let n = self.classes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed);
        let eval = |ids: &[ObjectId], this: &Self| this.f.evaluate(&this.counts(ids.iter().copied())).ok();
        for _ in 0..self.options.samples {
            if n == 0 {
                break;
            }
            let g: Vec<ObjectId> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            let outside: Vec<ObjectId> = (0..n).filter(|i| !g.contains(i)).collect();
            if outside.is_empty() {
                continue;
            }
            let r: Vec<ObjectId> = g.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let j = outside[rng.random_range(0..outside.len())];
            let with = |s: &[ObjectId]| {
                let mut v = s.to_vec();
                v.push(j);
                v.sort_unstable();
                v
            };
            let (Some(fr), Some(fg), Some(frj), Some(fgj)) =
                (eval(&r, self), eval(&g, self), eval(&with(&r), self), eval(&with(&g), self))
            else {
                self.eval_error(g.clone(), ImpurityError::Overflow);
                continue;
            };
            self.report.subsets += 1;
            self.report.comparisons += 1;
            if self.counts(g.iter().copied()).is_pure() && fg != 0 {
                self.record(Property::Purity, Vec::new(), g.clone(), None, format!("F(G) = {fg} on a single-class set"));
            }
            if fgj < fg {
                self.record(Property::Monotonicity, g.clone(), with(&g), Some(j), format!("F(R) = {fg} > F(R+j) = {fgj}"));
            }
            if fr > fg {
                self.record(Property::Monotonicity, r.clone(), g.clone(), None, format!("F(R) = {fr} > F(G) = {fg}"));
            }
            let gain_g = fgj as i128 - fg as i128;
            let gain_r = frj as i128 - fr as i128;
            if gain_g < gain_r {
                self.record(
                    Property::Supermodularity,
                    r,
                    g,
                    Some(j),
                    format!("F(G+j)-F(G) = {gain_g} < F(R+j)-F(R) = {gain_r}"),
                );
            }
        }
    }
}
