//! Train/test splits.

use rand::seq::SliceRandom;
use rand::Rng;

use super::dataset::{simulate_record, DatasetRecord, GenConfig};
use crate::domain::ParticleSpec;
use crate::{seed, Error, Result};

/// Range of the extra fill heights drawn for held-out particles, mm.
pub const HOLDOUT_HEIGHT_RANGE: (f64, f64) = (25.0, 75.0);

/// Test-set size for a fraction, rounding halves up.
pub fn test_count(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction) + 0.5).floor() as usize
}

/// Shuffles and splits off `round(test_fraction · n)` test records.
pub fn split_random<T: Clone>(
    records: &[T],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if records.is_empty() {
        return Err(Error::domain("cannot split an empty set"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::domain(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut seed::rng(seed, &[seed::tag("split-random")]));
    let n_test = test_count(records.len(), test_fraction);
    let test = order[..n_test]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    let train = order[n_test..]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    Ok((train, test))
}

/// Unseen-particle split: every record of a held particle goes to test,
/// plus `extra_per_particle` freshly simulated records of each held
/// particle at random heights.
pub fn split_holdout(
    records: &[DatasetRecord],
    catalog: &[ParticleSpec],
    held_names: &[&str],
    extra_per_particle: usize,
    config: &GenConfig,
    seed: u64,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>)> {
    let mut held = Vec::new();
    for name in held_names {
        let p = catalog
            .iter()
            .find(|p| p.name == *name)
            .ok_or_else(|| Error::domain(format!("unknown particle `{name}`")))?;
        held.push(p);
    }
    let is_held = |r: &DatasetRecord| held_names.contains(&r.particle.name.as_str());
    let train: Vec<DatasetRecord> = records.iter().filter(|r| !is_held(r)).cloned().collect();
    let mut test: Vec<DatasetRecord> = records.iter().filter(|r| is_held(r)).cloned().collect();
    let mut rng = seed::rng(seed, &[seed::tag("holdout-heights")]);
    for (i, p) in held.iter().enumerate() {
        for k in 0..extra_per_particle {
            let h = rng.gen_range(HOLDOUT_HEIGHT_RANGE.0..=HOLDOUT_HEIGHT_RANGE.1);
            let s = seed::derive(seed, &[seed::tag("holdout-cell"), i as u64, k as u64]);
            let (rec, _) = simulate_record(p, h, k, s, config)?;
            test.push(rec);
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_half_up() {
        assert_eq!(test_count(333, 0.2), 67);
        assert_eq!(test_count(10, 0.25), 3);
        assert_eq!(test_count(50, 0.2), 10);
    }

    #[test]
    fn split_sizes_and_errors() {
        let xs: Vec<usize> = (0..333).collect();
        let (tr, te) = split_random(&xs, 0.2, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (266, 67));
        assert!(split_random(&xs, 1.0, 1).is_err());
        assert!(split_random::<usize>(&[], 0.2, 1).is_err());
        assert_eq!(split_random(&xs, 0.2, 1).unwrap(), (tr, te));
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 1usize..200, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let xs: Vec<usize> = (0..n).collect();
            let (mut tr, te) = split_random(&xs, frac, seed).unwrap();
            tr.extend(te);
            tr.sort();
            prop_assert_eq!(tr, xs);
        }
    }
}
