use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

/// Train/test item indices for one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Unique subjects grouped by class, each subject mapped to its item indices.
fn subjects_by_class(ds: &Dataset) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut by_subject: BTreeMap<&str, (usize, Vec<usize>)> = BTreeMap::new();
    for (i, it) in ds.items.iter().enumerate() {
        let entry = by_subject.entry(&it.subject_id).or_insert((it.label, Vec::new()));
        if entry.0 != it.label {
            return Err(Error::InvalidArgument(format!(
                "subject {:?} appears with two labels",
                it.subject_id
            )));
        }
        entry.1.push(i);
    }
    let mut classes = vec![Vec::new(); ds.n_classes()];
    for (_, (label, items)) in by_subject {
        classes[label].push(items);
    }
    Ok(classes)
}

fn finish(ds: &Dataset, test_groups: Vec<Vec<usize>>) -> Vec<Split> {
    test_groups
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..ds.len()).filter(|i| test.binary_search(i).is_err()).collect();
            Split { train, test }
        })
        .collect()
}

/// Stratified K-fold over unique subjects. Subjects of each class are shuffled
/// and dealt round-robin, continuing across classes so fold sizes stay even.
pub fn stratified_kfold(ds: &Dataset, folds: usize, seed: u64) -> Result<Vec<Split>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let mut classes = subjects_by_class(ds)?;
    for (c, subjects) in classes.iter().enumerate() {
        if subjects.len() < folds {
            return Err(Error::InsufficientData(format!(
                "class {:?} has {} subjects, fewer than {folds} folds",
                ds.class_names[c],
                subjects.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = vec![Vec::new(); folds];
    let mut next = 0;
    for subjects in classes.iter_mut() {
        subjects.shuffle(&mut rng);
        for items in subjects.iter() {
            groups[next % folds].extend_from_slice(items);
            next += 1;
        }
    }
    Ok(finish(ds, groups))
}

/// Stratified 80/20 hold-out over unique subjects; each class contributes
/// round(0.2 * n_c) test subjects, at least one.
pub fn holdout_80_20(ds: &Dataset, seed: u64) -> Result<Split> {
    let mut classes = subjects_by_class(ds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    for (c, subjects) in classes.iter_mut().enumerate() {
        if subjects.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "class {:?} needs 2 subjects for a hold-out split",
                ds.class_names[c]
            )));
        }
        subjects.shuffle(&mut rng);
        let n_test = ((subjects.len() as f64 * 0.2).round() as usize).clamp(1, subjects.len() - 1);
        for items in &subjects[..n_test] {
            test.extend_from_slice(items);
        }
    }
    Ok(finish(ds, vec![test]).remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{FeatureKind, Item};

    fn dataset(n_per_class: usize) -> Dataset {
        let mut items = Vec::new();
        for c in 0..2 {
            for i in 0..n_per_class {
                items.push(Item {
                    subject_id: format!("c{c}_{i}"),
                    features: vec![i as f64],
                    label: c,
                });
            }
        }
        Dataset {
            items,
            class_names: vec!["A".into(), "B".into()],
            feature_kind: FeatureKind::Lifespans,
        }
    }

    #[test]
    fn kfold_partitions_and_stratifies() {
        let ds = dataset(10);
        let splits = stratified_kfold(&ds, 5, 3).unwrap();
        let mut seen = vec![0; ds.len()];
        for s in &splits {
            assert_eq!(s.test.len(), 4);
            assert_eq!(s.train.len() + s.test.len(), ds.len());
            let n_a = s.test.iter().filter(|&&i| ds.items[i].label == 0).count();
            assert_eq!(n_a, 2);
            for &i in &s.test {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn kfold_is_seeded() {
        let ds = dataset(10);
        assert_eq!(stratified_kfold(&ds, 5, 9).unwrap(), stratified_kfold(&ds, 5, 9).unwrap());
        assert_ne!(stratified_kfold(&ds, 5, 9).unwrap(), stratified_kfold(&ds, 5, 10).unwrap());
    }

    #[test]
    fn kfold_rejects_small_class() {
        assert!(stratified_kfold(&dataset(3), 5, 0).is_err());
    }

    #[test]
    fn holdout_sizes() {
        let ds = dataset(20);
        let s = holdout_80_20(&ds, 1).unwrap();
        assert_eq!(s.test.len(), 8);
        assert_eq!(s.train.len(), 32);
    }

    #[test]
    fn repeated_subject_stays_together() {
        let mut ds = dataset(10);
        let extra = ds.items[0].clone();
        ds.items.push(extra);
        for s in stratified_kfold(&ds, 5, 2).unwrap() {
            let has_first = s.test.contains(&0);
            assert_eq!(has_first, s.test.contains(&20));
        }
    }
}
