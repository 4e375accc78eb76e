//! Contrastive fine-tuning of the encoder: labeled pair generation and
//! squared-error training against pair cosine-similarity targets.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ShotSet;
use crate::encoder::{encode_features, featurize, EncoderParams, RowSource, TextFeatures};
use crate::error::{Error, Result};
use crate::optim::{Adam, AdamConfig};

/// A contrastive training pair: indices into the shot set plus a similarity
/// target (1.0 same label, 0.0 different).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub left: usize,
    pub right: usize,
    pub target: f64,
}

/// Stage-1 training parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContrastiveConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Pair-generation iterations: each anchor gets one positive and one
    /// negative pair per iteration.
    pub pair_iterations: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        ContrastiveConfig {
            epochs: 3,
            batch_size: 16,
            pair_iterations: 20,
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.pair_iterations == 0 {
            return Err(Error::Config("pair iterations must be at least 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        for (name, beta) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {beta}")));
            }
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Generates `2 * iterations * N` pairs (minus skipped singleton-class
/// anchors): per iteration each anchor draws one same-label partner and one
/// different-label partner, and the full sequence is shuffled at the end.
///
/// Anchors whose class has a single member are skipped with a warning; with
/// fewer than two classes no negatives exist and pair generation fails.
pub fn generate_pairs(shots: &ShotSet, iterations: usize, seed: u64) -> Result<Vec<Pair>> {
    if iterations == 0 {
        return Err(Error::Config("pair iterations must be at least 1".into()));
    }
    let labels: Vec<_> = shots
        .reviews
        .iter()
        .map(|r| r.label())
        .collect::<Result<_>>()?;
    let classes = shots.label_set();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.len()));
    }

    // per-class member lists plus, per anchor, its position within its class
    let mut same: BTreeMap<crate::corpus::Sentiment, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        same.entry(label).or_default().push(i);
    }
    let mut position = vec![0usize; labels.len()];
    for members in same.values() {
        for (pos, &i) in members.iter().enumerate() {
            position[i] = pos;
        }
    }
    let mut diff: BTreeMap<crate::corpus::Sentiment, Vec<usize>> = BTreeMap::new();
    for (&label, _) in &same {
        let others: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != label).collect();
        diff.insert(label, others);
    }
    for (label, members) in &same {
        if members.len() == 1 {
            log::warn!("class {label} has a single shot; skipping its pairs");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(2 * iterations * labels.len());
    for _ in 0..iterations {
        for (anchor, &label) in labels.iter().enumerate() {
            let mates = &same[&label];
            if mates.len() < 2 {
                continue;
            }
            // uniform over same-label indices, excluding the anchor itself
            let mut pick = rng.gen_range(0..mates.len() - 1);
            if pick >= position[anchor] {
                pick += 1;
            }
            pairs.push(Pair {
                left: anchor,
                right: mates[pick],
                target: 1.0,
            });
            let others = &diff[&label];
            pairs.push(Pair {
                left: anchor,
                right: others[rng.gen_range(0..others.len())],
                target: 0.0,
            });
        }
    }
    pairs.shuffle(&mut rng);
    Ok(pairs)
}

/// Cosine similarity with 64-bit accumulation. Errors on zero-norm input.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm("cosine input".into()));
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Squared error between the pair's cosine similarity and its target.
pub fn pair_loss(u: &[f64], v: &[f64], target: f64) -> Result<f64> {
    let s = cosine_similarity(u, v)?;
    Ok((s - target) * (s - target))
}

struct PairGeometry {
    s: f64,
    nu: f64,
    nv: f64,
}

fn pair_geometry(u: &[f64], v: &[f64]) -> Option<PairGeometry> {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let nu = nu.sqrt();
    let nv = nv.sqrt();
    Some(PairGeometry {
        s: dot / (nu * nv),
        nu,
        nv,
    })
}

/// Embeddings (and their owners' ids for error reporting) for every text
/// index referenced by the batch.
fn batch_embeddings<R: RowSource>(
    rows: &R,
    feats: &[TextFeatures],
    ids: &[&str],
    pairs: &[Pair],
) -> Result<BTreeMap<usize, Vec<f64>>> {
    let mut cache = BTreeMap::new();
    for pair in pairs {
        for idx in [pair.left, pair.right] {
            if !cache.contains_key(&idx) {
                cache.insert(idx, encode_features(rows, &feats[idx]));
            }
        }
    }
    for (&idx, emb) in &cache {
        if emb.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroNorm(ids[idx].to_string()));
        }
    }
    Ok(cache)
}

/// Mean loss of a pair batch.
pub fn pair_batch_loss<R: RowSource>(
    rows: &R,
    feats: &[TextFeatures],
    ids: &[&str],
    pairs: &[Pair],
) -> Result<f64> {
    let cache = batch_embeddings(rows, feats, ids, pairs)?;
    let mut sum = 0.0;
    for pair in pairs {
        let u = &cache[&pair.left];
        let v = &cache[&pair.right];
        let g = pair_geometry(u, v).ok_or_else(|| Error::ZeroNorm(ids[pair.left].to_string()))?;
        sum += (g.s - pair.target) * (g.s - pair.target);
    }
    Ok(sum / pairs.len() as f64)
}

/// Mean loss and analytic gradient of a pair batch with respect to the
/// embedding matrix.
///
/// Per pair, d/du of `(s - y)^2` is `2(s - y) (v / (|u||v|) - s u / |u|^2)`
/// (symmetrically for v); the chain rule through mean pooling distributes
/// `multiplicity / |G|` of each side's gradient onto the contributing matrix
/// rows. The returned map holds only rows the batch touches.
pub fn pair_batch_gradient<R: RowSource>(
    rows: &R,
    feats: &[TextFeatures],
    ids: &[&str],
    pairs: &[Pair],
) -> Result<(f64, BTreeMap<usize, Vec<f64>>)> {
    let dim = rows.dim();
    let cache = batch_embeddings(rows, feats, ids, pairs)?;
    let weight = 1.0 / pairs.len() as f64;
    let mut grad: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut loss = 0.0;

    let mut side = vec![0.0f64; dim];
    for pair in pairs {
        let u = &cache[&pair.left];
        let v = &cache[&pair.right];
        let g = pair_geometry(u, v).ok_or_else(|| Error::ZeroNorm(ids[pair.left].to_string()))?;
        let err = g.s - pair.target;
        loss += err * err;
        let coef = 2.0 * err * weight;

        for (this, other, n_this, features) in [
            (u, v, g.nu, &feats[pair.left]),
            (v, u, g.nv, &feats[pair.right]),
        ] {
            let a = coef / (g.nu * g.nv);
            let b = coef * g.s / (n_this * n_this);
            for k in 0..dim {
                side[k] = a * other[k] - b * this[k];
            }
            let inv_total = 1.0 / f64::from(features.total());
            for &(bucket, count) in features.counts() {
                let scale = f64::from(count) * inv_total;
                let row = grad.entry(bucket).or_insert_with(|| vec![0.0; dim]);
                for k in 0..dim {
                    row[k] += scale * side[k];
                }
            }
        }
    }
    Ok((loss * weight, grad))
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub pairs: usize,
    pub seconds: f64,
}

/// Stage-1 training log: one record per epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    /// JSON-lines rendering, one record per epoch.
    pub fn to_jsonl(&self) -> String {
        self.epochs
            .iter()
            .map(|e| serde_json::to_string(e).expect("epoch stats serialize"))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            })
    }
}

/// Fine-tunes the encoder on the shot set.
///
/// Pairs are generated once, then re-shuffled each epoch and consumed in
/// batches (the final short batch included); every batch applies one
/// bias-corrected Adam update. Fully deterministic under the config seed.
pub fn finetune_encoder(
    params: &mut EncoderParams,
    shots: &ShotSet,
    config: &ContrastiveConfig,
) -> Result<TrainingLog> {
    config.validate()?;
    let feats: Vec<TextFeatures> = shots
        .reviews
        .iter()
        .map(|r| {
            featurize(&r.text, params.config()).map_err(|e| match e {
                Error::NoFeatures => Error::EmptyText(r.id.clone()),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let ids: Vec<&str> = shots.reviews.iter().map(|r| r.id.as_str()).collect();

    let mut pairs = generate_pairs(shots, config.pair_iterations, config.seed)?;
    if pairs.is_empty() {
        return Err(Error::Config(
            "pair generation produced no pairs; every class has a single shot".into(),
        ));
    }

    let dim = params.config().dim;
    let mut adam = Adam::new(params.matrix().len(), config.adam());
    // epoch shuffles draw from their own stream so pair sampling and epoch
    // order stay independently reproducible
    let mut epoch_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));

    let mut log = TrainingLog::default();
    for epoch in 1..=config.epochs {
        let started = Instant::now();
        pairs.shuffle(&mut epoch_rng);
        let mut loss_sum = 0.0;
        for batch in pairs.chunks(config.batch_size) {
            let (loss, grad) = pair_batch_gradient(params, &feats, &ids, batch)?;
            loss_sum += loss * batch.len() as f64;
            adam.step_rows(params.matrix_mut(), dim, &grad);
        }
        let stats = EpochStats {
            epoch,
            mean_loss: loss_sum / pairs.len() as f64,
            pairs: pairs.len(),
            seconds: started.elapsed().as_secs_f64(),
        };
        log::info!(
            "contrastive epoch {}/{}: mean loss {:.6} over {} pairs ({:.2}s)",
            stats.epoch,
            config.epochs,
            stats.mean_loss,
            stats.pairs,
            stats.seconds
        );
        log.epochs.push(stats);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Review, Sentiment, ShotSet};
    use crate::encoder::{init_encoder, DenseRows, EncoderConfig};
    use proptest::prelude::*;

    fn shots_with_counts(counts: &[(Sentiment, usize)]) -> ShotSet {
        let mut reviews = Vec::new();
        let mut i = 0;
        for &(sentiment, n) in counts {
            for _ in 0..n {
                reviews.push(Review::new(
                    format!("s{i}"),
                    format!("shot text {i} token{i}"),
                    "synth-a",
                    Some(sentiment),
                ));
                i += 1;
            }
        }
        ShotSet {
            reviews,
            requested_per_class: counts.iter().map(|c| c.1).max().unwrap_or(0),
            seed: 0,
        }
    }

    fn balanced_shots(per_class: usize) -> ShotSet {
        shots_with_counts(&[
            (Sentiment::Positive, per_class),
            (Sentiment::Negative, per_class),
            (Sentiment::Neutral, per_class),
        ])
    }

    #[test]
    fn pair_counts_match_the_scheme() {
        let shots = balanced_shots(64); // N = 192
        let pairs = generate_pairs(&shots, 20, 1).unwrap();
        assert_eq!(pairs.len(), 7_680);
        let positives = pairs.iter().filter(|p| p.target == 1.0).count();
        assert_eq!(positives, 3_840);

        let shots = balanced_shots(8); // N = 24
        assert_eq!(generate_pairs(&shots, 20, 1).unwrap().len(), 960);
    }

    #[test]
    fn pair_labels_are_definitionally_correct() {
        let shots = balanced_shots(3);
        let pairs = generate_pairs(&shots, 5, 7).unwrap();
        for p in &pairs {
            assert_ne!(p.left, p.right);
            let l = shots.reviews[p.left].sentiment;
            let r = shots.reviews[p.right].sentiment;
            if p.target == 1.0 {
                assert_eq!(l, r);
            } else {
                assert_ne!(l, r);
            }
        }
    }

    #[test]
    fn singleton_class_anchors_are_skipped() {
        let shots = shots_with_counts(&[(Sentiment::Positive, 1), (Sentiment::Negative, 4)]);
        let pairs = generate_pairs(&shots, 10, 3).unwrap();
        // 2*R*N minus 2*R per singleton member: 2*10*5 - 2*10 = 80
        assert_eq!(pairs.len(), 80);
        assert!(pairs.iter().all(|p| p.left != 0));
    }

    #[test]
    fn single_class_is_an_error() {
        let shots = shots_with_counts(&[(Sentiment::Positive, 5)]);
        assert!(matches!(
            generate_pairs(&shots, 2, 1),
            Err(Error::SingleClass(1))
        ));
    }

    #[test]
    fn pairs_deterministic_under_seed() {
        let shots = balanced_shots(6);
        assert_eq!(
            generate_pairs(&shots, 4, 9).unwrap(),
            generate_pairs(&shots, 4, 9).unwrap()
        );
        assert_ne!(
            generate_pairs(&shots, 4, 9).unwrap(),
            generate_pairs(&shots, 4, 10).unwrap()
        );
    }

    #[test]
    fn cosine_basics() {
        let u = [1.0, 0.0];
        let v = [0.0, 1.0];
        let w = [-1.0, 0.0];
        assert_eq!(cosine_similarity(&u, &u).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&u, &v).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&u, &w).unwrap(), -1.0);
        assert!(cosine_similarity(&u, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn pair_loss_basics() {
        let u = [1.0, 0.0];
        let v = [0.0, 1.0];
        assert_eq!(pair_loss(&u, &u, 1.0).unwrap(), 0.0);
        assert_eq!(pair_loss(&u, &v, 1.0).unwrap(), 1.0);
        assert_eq!(pair_loss(&u, &v, 0.0).unwrap(), 0.0);
    }

    fn tiny_instance(
        seed: u64,
        n_texts: usize,
        n_pairs: usize,
    ) -> (Vec<f64>, usize, usize, Vec<TextFeatures>, Vec<Pair>) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let buckets = 64;
        let dim = 8;
        let cfg = EncoderConfig {
            ngram_min: 2,
            ngram_max: 3,
            buckets,
            dim,
            seed,
        };
        let matrix: Vec<f64> = (0..buckets * dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let feats: Vec<TextFeatures> = (0..n_texts)
            .map(|i| {
                let len = rng.gen_range(4..10);
                let text: String = (0..len)
                    .map(|_| (b'a' + rng.gen_range(0..12u8)) as char)
                    .collect();
                featurize(&format!("t{i}{text}"), &cfg).unwrap()
            })
            .collect();
        let pairs: Vec<Pair> = (0..n_pairs)
            .map(|_| {
                let left = rng.gen_range(0..n_texts);
                let mut right = rng.gen_range(0..n_texts - 1);
                if right >= left {
                    right += 1;
                }
                Pair {
                    left,
                    right,
                    target: if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
                }
            })
            .collect();
        (matrix, buckets, dim, feats, pairs)
    }

    /// Central finite differences against the analytic gradient on one
    /// small instance.
    fn check_gradient_once(seed: u64) -> f64 {
        let (matrix, _buckets, dim, feats, pairs) = tiny_instance(seed, 5, 4);
        let ids: Vec<&str> = (0..feats.len()).map(|_| "t").collect();
        let rows = DenseRows { data: &matrix, dim };
        let (_, grad) = pair_batch_gradient(&rows, &feats, &ids, &pairs).unwrap();

        let step = 1e-6;
        let mut max_rel = 0.0f64;
        for (&bucket, g_row) in &grad {
            for k in 0..dim {
                let idx = bucket * dim + k;
                let mut plus = matrix.clone();
                plus[idx] += step;
                let mut minus = matrix.clone();
                minus[idx] -= step;
                let lp = pair_batch_loss(&DenseRows { data: &plus, dim }, &feats, &ids, &pairs)
                    .unwrap();
                let lm = pair_batch_loss(&DenseRows { data: &minus, dim }, &feats, &ids, &pairs)
                    .unwrap();
                let numeric = (lp - lm) / (2.0 * step);
                let denom = numeric.abs().max(g_row[k].abs()).max(1e-8);
                max_rel = max_rel.max((numeric - g_row[k]).abs() / denom);
            }
        }
        max_rel
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..5 {
            let err = check_gradient_once(seed);
            assert!(err <= 1e-5, "seed {seed}: max relative error {err}");
        }
    }

    #[test]
    fn identical_pair_with_target_one_has_zero_gradient() {
        let cfg = EncoderConfig {
            ngram_min: 2,
            ngram_max: 3,
            buckets: 64,
            dim: 8,
            seed: 3,
        };
        let params = init_encoder(&cfg).unwrap();
        let feats = vec![featurize("abcd", &cfg).unwrap(), featurize("abcd", &cfg).unwrap()];
        let ids = vec!["a", "b"];
        let pairs = vec![Pair {
            left: 0,
            right: 1,
            target: 1.0,
        }];
        let (loss, grad) = pair_batch_gradient(&params, &feats, &ids, &pairs).unwrap();
        assert!(loss.abs() < 1e-12);
        for row in grad.values() {
            for &v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_is_invariant_to_row_scaling() {
        // one feature per text: embeddings are single matrix rows
        let cfg = EncoderConfig {
            ngram_min: 3,
            ngram_max: 3,
            buckets: 64,
            dim: 4,
            seed: 1,
        };
        let f0 = featurize("a", &cfg).unwrap();
        let f1 = featurize("b", &cfg).unwrap();
        assert_eq!(f0.total(), 1);
        assert_eq!(f1.total(), 1);
        let params = init_encoder(&cfg).unwrap();
        let doubled: Vec<f32> = params.matrix().iter().map(|v| v * 2.0).collect();
        let doubled =
            crate::encoder::EncoderParams::from_matrix(doubled, *params.config()).unwrap();
        let feats = [f0, f1];
        let ids = ["a", "b"];
        let pairs = [Pair {
            left: 0,
            right: 1,
            target: 0.0,
        }];
        let l1 = pair_batch_loss(&params, &feats, &ids, &pairs).unwrap();
        let l2 = pair_batch_loss(&doubled, &feats, &ids, &pairs).unwrap();
        assert!((l1 - l2).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix_reports_offending_id() {
        let cfg = EncoderConfig {
            ngram_min: 2,
            ngram_max: 3,
            buckets: 64,
            dim: 4,
            seed: 0,
        };
        let params = crate::encoder::EncoderParams::from_matrix(vec![0.0; 64 * 4], cfg).unwrap();
        let feats = vec![featurize("abc", &cfg).unwrap(), featurize("xyz", &cfg).unwrap()];
        let ids = vec!["first", "second"];
        let pairs = vec![Pair {
            left: 0,
            right: 1,
            target: 1.0,
        }];
        match pair_batch_gradient(&params, &feats, &ids, &pairs) {
            Err(Error::ZeroNorm(id)) => assert_eq!(id, "first"),
            other => panic!("expected zero-norm error, got {other:?}"),
        }
    }

    #[test]
    fn finetune_one_epoch_returns_finite_params_and_log() {
        let cfg = EncoderConfig {
            buckets: 1 << 10,
            dim: 16,
            ..EncoderConfig::default()
        };
        let mut params = init_encoder(&cfg).unwrap();
        let shots = balanced_shots(4);
        let config = ContrastiveConfig {
            epochs: 1,
            pair_iterations: 2,
            seed: 5,
            ..ContrastiveConfig::default()
        };
        let log = finetune_encoder(&mut params, &shots, &config).unwrap();
        assert_eq!(log.epochs.len(), 1);
        assert!(params.matrix().iter().all(|v| v.is_finite()));
        assert!(log.epochs[0].mean_loss.is_finite());
    }

    #[test]
    fn finetune_rejects_zero_epochs() {
        let cfg = EncoderConfig {
            buckets: 1 << 10,
            dim: 16,
            ..EncoderConfig::default()
        };
        let mut params = init_encoder(&cfg).unwrap();
        let shots = balanced_shots(4);
        let config = ContrastiveConfig {
            epochs: 0,
            ..ContrastiveConfig::default()
        };
        assert!(finetune_encoder(&mut params, &shots, &config).is_err());
    }

    #[test]
    fn finetune_is_bit_deterministic() {
        let cfg = EncoderConfig {
            buckets: 1 << 10,
            dim: 16,
            seed: 2,
            ..EncoderConfig::default()
        };
        let shots = balanced_shots(4);
        let config = ContrastiveConfig {
            epochs: 2,
            pair_iterations: 3,
            seed: 11,
            ..ContrastiveConfig::default()
        };
        let mut a = init_encoder(&cfg).unwrap();
        finetune_encoder(&mut a, &shots, &config).unwrap();
        let mut b = init_encoder(&cfg).unwrap();
        finetune_encoder(&mut b, &shots, &config).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    proptest! {
        #[test]
        fn per_pair_loss_stays_within_bounds(
            ux in -5.0f64..5.0, uy in -5.0f64..5.0,
            vx in -5.0f64..5.0, vy in -5.0f64..5.0,
            target in prop::bool::ANY,
        ) {
            let u = [ux, uy];
            let v = [vx, vy];
            prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
            let y = if target { 1.0 } else { 0.0 };
            let loss = pair_loss(&u, &v, y).unwrap();
            prop_assert!((0.0..=4.0).contains(&loss));
        }

        #[test]
        fn batch_loss_is_order_invariant(seed in 0u64..50) {
            let (matrix, _b, dim, feats, mut pairs) = tiny_instance(seed, 4, 6);
            let ids: Vec<&str> = (0..feats.len()).map(|_| "t").collect();
            let rows = DenseRows { data: &matrix, dim };
            let l1 = pair_batch_loss(&rows, &feats, &ids, &pairs).unwrap();
            pairs.reverse();
            let l2 = pair_batch_loss(&rows, &feats, &ids, &pairs).unwrap();
            prop_assert!((l1 - l2).abs() < 1e-12);
        }
    }
}
