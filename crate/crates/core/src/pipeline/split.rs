//! Stratified train/holdout index split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{mix2, PipelineError};
use crate::seqio::Region;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
}

/// Split sample indices per region: each present class is shuffled with its
/// own seed (`mix2(seed, class)`) and contributes `round(n·fraction)` holdout
/// samples, clamped to [1, n−1] so both sides always see every class. A
/// present class with fewer than 2 samples cannot satisfy that and is an
/// error. Both lists come back sorted ascending.
pub fn split_indices(
    labels: &[Region],
    fraction: f64,
    seed: u64,
) -> Result<SplitIndices, PipelineError> {
    if labels.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if !(0.0..1.0).contains(&fraction) {
        return Err(PipelineError::Format(format!(
            "holdout fraction {fraction} outside [0, 1)"
        )));
    }

    let mut by_class: [Vec<usize>; Region::COUNT] = Default::default();
    for (i, &label) in labels.iter().enumerate() {
        by_class[label as usize].push(i);
    }

    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (class, indices) in by_class.iter_mut().enumerate() {
        if indices.is_empty() {
            continue;
        }
        let n = indices.len();
        if n < 2 {
            return Err(PipelineError::ClassTooSmall {
                region: Region::ALL[class],
                count: n,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix2(seed, class as u64));
        indices.shuffle(&mut rng);
        let take = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
        holdout.extend_from_slice(&indices[..take]);
        train.extend_from_slice(&indices[take..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    Ok(SplitIndices { train, holdout })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(counts: [usize; 4]) -> Vec<Region> {
        let mut v = Vec::new();
        for (class, &n) in counts.iter().enumerate() {
            v.extend(std::iter::repeat_n(Region::ALL[class], n));
        }
        v
    }

    #[test]
    fn fraction_rounds_per_class() {
        let l = labels([10, 10, 10, 10]);
        let s = split_indices(&l, 0.2, 7).unwrap();
        assert_eq!(s.holdout.len(), 8);
        assert_eq!(s.train.len(), 32);
        // Two holdout samples from every class.
        for class in 0..4 {
            let lo = class * 10;
            let hi = lo + 10;
            let in_class = s.holdout.iter().filter(|&&i| i >= lo && i < hi).count();
            assert_eq!(in_class, 2);
        }
    }

    #[test]
    fn clamps_to_keep_both_sides_nonempty() {
        // round(2·0.01) = 0 → clamped up to 1.
        let s = split_indices(&labels([2, 2, 0, 0]), 0.01, 0).unwrap();
        assert_eq!(s.holdout.len(), 2);
        assert_eq!(s.train.len(), 2);

        // round(3·0.99) = 3 → clamped down to 2.
        let s = split_indices(&labels([3, 3, 0, 0]), 0.99, 0).unwrap();
        assert_eq!(s.holdout.len(), 4);
        assert_eq!(s.train.len(), 2);
    }

    #[test]
    fn absent_classes_are_fine_but_singletons_are_not() {
        assert!(split_indices(&labels([5, 5, 5, 0]), 0.2, 1).is_ok());
        let err = split_indices(&labels([5, 1, 5, 0]), 0.2, 1).unwrap_err();
        assert!(matches!(
            err,
            PipelineError::ClassTooSmall { region: Region::Europe, count: 1 }
        ));
    }

    #[test]
    fn partitions_all_indices_sorted() {
        let l = labels([7, 5, 9, 3]);
        let s = split_indices(&l, 0.3, 42).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.holdout).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
        assert!(s.train.windows(2).all(|w| w[0] < w[1]));
        assert!(s.holdout.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn seed_determines_membership() {
        let l = labels([20, 20, 0, 0]);
        assert_eq!(split_indices(&l, 0.25, 5).unwrap(), split_indices(&l, 0.25, 5).unwrap());
        assert_ne!(
            split_indices(&l, 0.25, 5).unwrap().holdout,
            split_indices(&l, 0.25, 6).unwrap().holdout
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            split_indices(&[], 0.2, 0),
            Err(PipelineError::EmptyDataset)
        ));
        assert!(split_indices(&labels([4, 4, 0, 0]), 1.0, 0).is_err());
        assert!(split_indices(&labels([4, 4, 0, 0]), -0.1, 0).is_err());
    }
}
