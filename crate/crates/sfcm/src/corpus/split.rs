//! Stratified train/test splitting and per-class shot sampling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{Corpus, ShotSet};

/// Fractional parts closer than this count as tied and fall back to cell order.
const REMAINDER_TIE_EPS: f64 = 1e-9;

/// Splits a fully labeled corpus into train and test partitions, stratified
/// over (sentiment, dialect) cells.
///
/// Within each cell, `floor(ratio * cell_size)` reviews go to train; the
/// remaining train slots (up to `round(ratio * corpus_size)` in total) are
/// assigned to cells in descending order of fractional part, ties broken by
/// cell order in `label_set x dialect_set`. Membership within a cell is a
/// seeded uniform shuffle; both outputs keep the source row order. A cell of
/// size one sends its review to train with a warning.
pub fn stratified_split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    corpus.require_labeled()?;

    // cells in label-major order; empty combinations are skipped
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for &sentiment in corpus.label_set() {
        for dialect in corpus.dialect_set() {
            let members: Vec<usize> = corpus
                .iter()
                .enumerate()
                .filter(|(_, r)| r.sentiment == Some(sentiment) && &r.dialect == dialect)
                .map(|(i, _)| i)
                .collect();
            if !members.is_empty() {
                cells.push(members);
            }
        }
    }

    let target = (ratio * corpus.len() as f64).round() as usize;
    let mut train_counts = vec![0usize; cells.len()];
    let mut fractions = vec![0.0f64; cells.len()];
    for (c, members) in cells.iter().enumerate() {
        if members.len() == 1 {
            log::warn!(
                "stratification cell of size 1 (review `{}`) assigned to train",
                corpus.reviews()[members[0]].id
            );
            train_counts[c] = 1;
        } else {
            let exact = ratio * members.len() as f64;
            train_counts[c] = exact.floor() as usize;
            fractions[c] = exact - exact.floor();
        }
    }

    let assigned: usize = train_counts.iter().sum();
    let mut leftover = target.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| {
        if (fractions[a] - fractions[b]).abs() <= REMAINDER_TIE_EPS {
            std::cmp::Ordering::Equal // stable sort keeps cell order
        } else {
            fractions[b].partial_cmp(&fractions[a]).unwrap()
        }
    });
    for &c in &order {
        if leftover == 0 {
            break;
        }
        if train_counts[c] < cells[c].len() {
            train_counts[c] += 1;
            leftover -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; corpus.len()];
    for (c, members) in cells.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for &idx in shuffled.iter().take(train_counts[c]) {
            in_train[idx] = true;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (idx, review) in corpus.iter().enumerate() {
        if in_train[idx] {
            train.push(review.clone());
        } else {
            test.push(review.clone());
        }
    }
    Ok((Corpus::new(train)?, Corpus::new(test)?))
}

/// Samples up to `n_per_class` reviews per sentiment class, without
/// replacement, using a seeded uniform draw.
///
/// Output order is label_set order, then sampled order. Classes smaller than
/// `n_per_class` contribute all their members and log a shortfall warning.
pub fn sample_shots(corpus: &Corpus, n_per_class: usize, seed: u64) -> Result<ShotSet> {
    if n_per_class == 0 {
        return Err(Error::Config("shots per class must be positive".into()));
    }
    corpus.require_labeled()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reviews = Vec::new();
    for &sentiment in corpus.label_set() {
        let mut members: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, r)| r.sentiment == Some(sentiment))
            .map(|(i, _)| i)
            .collect();
        if members.len() < n_per_class {
            log::warn!(
                "class {sentiment} has only {} reviews; requested {n_per_class} per class",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for &idx in members.iter().take(n_per_class) {
            reviews.push(corpus.reviews()[idx].clone());
        }
    }
    Ok(ShotSet {
        reviews,
        requested_per_class: n_per_class,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Review, Sentiment};
    use std::collections::HashSet;

    /// Corpus with the shared-task cell sizes: per dialect
    /// 154 positive / 168 negative / 108 neutral.
    fn shared_task_shaped() -> Corpus {
        let mut reviews = Vec::new();
        let mut i = 0;
        for dialect in ["darija", "saudi"] {
            for (sentiment, n) in [
                (Sentiment::Positive, 154),
                (Sentiment::Negative, 168),
                (Sentiment::Neutral, 108),
            ] {
                for _ in 0..n {
                    reviews.push(Review::new(
                        format!("r{i}"),
                        format!("text {i}"),
                        dialect,
                        Some(sentiment),
                    ));
                    i += 1;
                }
            }
        }
        Corpus::new(reviews).unwrap()
    }

    fn cell_count(corpus: &Corpus, sentiment: Sentiment, dialect: &str) -> usize {
        corpus
            .iter()
            .filter(|r| r.sentiment == Some(sentiment) && r.dialect == dialect)
            .count()
    }

    /// Independent application of the floor-then-largest-remainder rule.
    fn remainder_rule(cell_sizes: &[usize], ratio: f64) -> Vec<usize> {
        let total: usize = cell_sizes.iter().sum();
        let target = (ratio * total as f64).round() as usize;
        let mut counts: Vec<usize> = cell_sizes
            .iter()
            .map(|&s| (ratio * s as f64).floor() as usize)
            .collect();
        let mut fracs: Vec<(usize, f64)> = cell_sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| (i, ratio * s as f64 - (ratio * s as f64).floor()))
            .collect();
        fracs.sort_by(|a, b| {
            if (a.1 - b.1).abs() <= 1e-9 {
                std::cmp::Ordering::Equal
            } else {
                b.1.partial_cmp(&a.1).unwrap()
            }
        });
        let mut leftover = target - counts.iter().sum::<usize>();
        for (i, _) in fracs {
            if leftover == 0 {
                break;
            }
            if counts[i] < cell_sizes[i] {
                counts[i] += 1;
                leftover -= 1;
            }
        }
        counts
    }

    #[test]
    fn split_860_at_080_gives_688_172() {
        let corpus = shared_task_shaped();
        let (train, test) = stratified_split(&corpus, 0.8, 7).unwrap();
        assert_eq!(train.len(), 688);
        assert_eq!(test.len(), 172);
    }

    #[test]
    fn per_cell_counts_follow_the_remainder_rule() {
        let corpus = shared_task_shaped();
        let (train, _) = stratified_split(&corpus, 0.8, 7).unwrap();

        // cell order is label-major: (pos, darija), (pos, saudi), (neg, ...), ...
        let sizes = [154, 154, 168, 168, 108, 108];
        let expected = remainder_rule(&sizes, 0.8);
        assert_eq!(expected, vec![123, 123, 135, 135, 86, 86]);

        let got = [
            cell_count(&train, Sentiment::Positive, "darija"),
            cell_count(&train, Sentiment::Positive, "saudi"),
            cell_count(&train, Sentiment::Negative, "darija"),
            cell_count(&train, Sentiment::Negative, "saudi"),
            cell_count(&train, Sentiment::Neutral, "darija"),
            cell_count(&train, Sentiment::Neutral, "saudi"),
        ];
        assert_eq!(got.to_vec(), expected);
    }

    #[test]
    fn split_is_a_partition() {
        let corpus = shared_task_shaped();
        let (train, test) = stratified_split(&corpus, 0.8, 3).unwrap();
        let train_ids: HashSet<_> = train.iter().map(|r| r.id.clone()).collect();
        let test_ids: HashSet<_> = test.iter().map(|r| r.id.clone()).collect();
        assert!(train_ids.is_disjoint(&test_ids));
        assert_eq!(train_ids.len() + test_ids.len(), corpus.len());
    }

    #[test]
    fn split_is_deterministic() {
        let corpus = shared_task_shaped();
        let a = stratified_split(&corpus, 0.8, 11).unwrap();
        let b = stratified_split(&corpus, 0.8, 11).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn different_seeds_move_membership() {
        let corpus = shared_task_shaped();
        let (a, _) = stratified_split(&corpus, 0.8, 1).unwrap();
        let (b, _) = stratified_split(&corpus, 0.8, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn bad_ratio_rejected() {
        let corpus = shared_task_shaped();
        assert!(stratified_split(&corpus, 0.0, 1).is_err());
        assert!(stratified_split(&corpus, 1.0, 1).is_err());
        assert!(stratified_split(&corpus, 1.5, 1).is_err());
    }

    #[test]
    fn singleton_cell_goes_to_train() {
        let mut reviews = vec![Review::new("solo", "x", "darija", Some(Sentiment::Neutral))];
        for i in 0..10 {
            reviews.push(Review::new(
                format!("p{i}"),
                "y",
                "darija",
                Some(Sentiment::Positive),
            ));
        }
        let corpus = Corpus::new(reviews).unwrap();
        let (train, _) = stratified_split(&corpus, 0.8, 5).unwrap();
        assert!(train.iter().any(|r| r.id == "solo"));
    }

    #[test]
    fn shots_64_over_three_classes_gives_192() {
        let corpus = shared_task_shaped();
        let shots = sample_shots(&corpus, 64, 9).unwrap();
        assert_eq!(shots.len(), 192);
        for sentiment in [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral] {
            let n = shots
                .reviews
                .iter()
                .filter(|r| r.sentiment == Some(sentiment))
                .count();
            assert_eq!(n, 64);
        }
    }

    #[test]
    fn shots_8_gives_24() {
        let corpus = shared_task_shaped();
        assert_eq!(sample_shots(&corpus, 8, 9).unwrap().len(), 24);
    }

    #[test]
    fn shots_clamp_to_class_size() {
        let corpus = shared_task_shaped();
        let shots = sample_shots(&corpus, 1000, 9).unwrap();
        assert_eq!(shots.len(), 860);
    }

    #[test]
    fn shots_without_replacement_and_deterministic() {
        let corpus = shared_task_shaped();
        let a = sample_shots(&corpus, 16, 4).unwrap();
        let ids: HashSet<_> = a.reviews.iter().map(|r| r.id.clone()).collect();
        assert_eq!(ids.len(), a.len());
        let b = sample_shots(&corpus, 16, 4).unwrap();
        assert_eq!(
            a.reviews.iter().map(|r| &r.id).collect::<Vec<_>>(),
            b.reviews.iter().map(|r| &r.id).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_shots_rejected() {
        let corpus = shared_task_shaped();
        assert!(sample_shots(&corpus, 0, 1).is_err());
    }
}
