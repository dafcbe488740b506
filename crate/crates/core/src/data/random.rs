use rand::seq::index;
use rand::Rng;

use crate::instance::{CoreError, Instance, ObjectRecord, TestSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub objects: usize,
    pub tests: usize,
    pub classes: usize,
    pub outcomes: usize,
    /// Draw distinct outcome vectors so every pair of objects is separable.
    pub complete: bool,
}

impl RandomSpec {
    pub fn binary(objects: usize, tests: usize, classes: usize) -> Self {
        RandomSpec { objects, tests, classes, outcomes: 2, complete: true }
    }
}

/// Random instance with unit costs and uniformly drawn labels.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, spec: RandomSpec) -> Result<Instance, CoreError> {
    if spec.outcomes < 2 || spec.classes == 0 {
        return Err(CoreError::InvalidInstance("need at least 2 outcomes and 1 class".into()));
    }
    let space = (spec.outcomes as u128).checked_pow(spec.tests as u32);
    let codes: Vec<u128> = if spec.complete {
        match space {
            Some(s) if s >= spec.objects as u128 && s <= usize::MAX as u128 => {
                index::sample(rng, s as usize, spec.objects).into_iter().map(|c| c as u128).collect()
            }
            _ => {
                return Err(CoreError::InvalidInstance(format!(
                    "{} tests with {} outcomes cannot separate {} objects",
                    spec.tests, spec.outcomes, spec.objects
                )))
            }
        }
    } else {
        Vec::new()
    };
    let objects = (0..spec.objects)
        .map(|id| {
            let outcomes = if spec.complete {
                let mut c = codes[id];
                (0..spec.tests)
                    .map(|_| {
                        let d = (c % spec.outcomes as u128) as usize;
                        c /= spec.outcomes as u128;
                        d
                    })
                    .collect()
            } else {
                (0..spec.tests).map(|_| rng.random_range(0..spec.outcomes)).collect()
            };
            ObjectRecord { id, class_id: rng.random_range(0..spec.classes), outcomes }
        })
        .collect();
    let tests = (0..spec.tests).map(|t| TestSpec::new(t, "", spec.outcomes, 1)).collect();
    Instance::new(objects, spec.classes, tests, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_instances_are_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, RandomSpec::binary(8, 3, 3)).unwrap();
            assert!(inst.is_complete());
            assert_eq!(inst.num_objects(), 8);
        }
        assert!(random_instance(&mut rng, RandomSpec::binary(9, 3, 2)).is_err());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let spec = RandomSpec { objects: 10, tests: 4, classes: 3, outcomes: 3, complete: false };
        let a = random_instance(&mut ChaCha8Rng::seed_from_u64(9), spec).unwrap();
        let b = random_instance(&mut ChaCha8Rng::seed_from_u64(9), spec).unwrap();
        assert_eq!(a, b);
    }
}
