use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewlens::classifier::{run_repeated, train, train_on_features};
use skewlens::features::{EmbeddingEncoder, EmbeddingStore};
use skewlens::metrics::evaluate;
use skewlens::{ClassWeights, Encoder, FeatureVector, Label, LabeledDataset, Scores, Sentence, TrainConfig};

fn blobs(seed: u64, n: usize, minority_share: f64, gap: f64) -> (Vec<FeatureVector>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..n {
        let y = usize::from(rng.gen_bool(minority_share));
        let centre = if y == 1 { gap } else { -gap };
        let x = vec![centre + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        xs.push(FeatureVector::dense(x).unwrap());
        ys.push(y);
    }
    (xs, ys)
}

#[test]
fn separable_data_is_learned_exactly() {
    let (xs, ys) = blobs(1, 200, 0.5, 2.0);
    let cfg = TrainConfig {
        epochs: 100,
        learning_rate: 0.5,
        ..Default::default()
    };
    let model = train_on_features(&xs, &ys, 2, &cfg).unwrap();
    let correct = xs
        .iter()
        .zip(&ys)
        .filter(|(x, &y)| model.predict(x).unwrap() == y)
        .count();
    assert_eq!(correct, xs.len());
}

#[test]
fn training_is_deterministic_per_seed() {
    let (xs, ys) = blobs(2, 150, 0.3, 0.5);
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 7,
        seed: 9,
        ..Default::default()
    };
    let a = train_on_features(&xs, &ys, 2, &cfg).unwrap();
    let b = train_on_features(&xs, &ys, 2, &cfg).unwrap();
    assert_eq!(a.to_model_text(), b.to_model_text());
    let c = train_on_features(&xs, &ys, 2, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.to_model_text(), c.to_model_text());
}

#[test]
fn minority_weight_raises_minority_recall() {
    let (xs, ys) = blobs(3, 600, 0.1, 0.4);
    let recall = |w: f64| {
        let cfg = TrainConfig {
            epochs: 30,
            class_weights: ClassWeights::new(vec![1.0, w]).unwrap(),
            ..Default::default()
        };
        let model = train_on_features(&xs, &ys, 2, &cfg).unwrap();
        let pred: Vec<usize> = xs.iter().map(|x| model.predict(x).unwrap()).collect();
        evaluate(&ys, &pred, 2, 1).unwrap().scores.per_class[1].recall
    };
    assert!(recall(8.0) > recall(1.0));
}

fn embedded_dataset(name: &str, seed: u64, n: usize, store: &mut EmbeddingStore) -> LabeledDataset {
    let (xs, ys) = blobs(seed, n, 0.3, 0.6);
    let sentences = xs
        .iter()
        .zip(&ys)
        .enumerate()
        .map(|(i, (x, &y))| {
            store.insert(name, i + 1, x.to_dense()).unwrap();
            Sentence::new(name, i + 1, format!("sentence {i}"), Label::from_class_index(y))
        })
        .collect();
    LabeledDataset::new(name, sentences)
}

#[test]
fn repeated_runs_average_hand_computed_scores() {
    let mut store = EmbeddingStore::new();
    let train_ds = embedded_dataset("train", 4, 120, &mut store);
    let eval_ds = embedded_dataset("eval", 5, 60, &mut store);
    let encoder = EmbeddingEncoder::new(store).unwrap();
    let cfg = TrainConfig {
        epochs: 15,
        ..Default::default()
    };
    let seeds = [3, 1, 4];
    let report = run_repeated(&train_ds, &eval_ds, &encoder, &cfg, &seeds).unwrap();
    assert_eq!(report.seeds, seeds);

    let truth = eval_ds.class_indices().unwrap();
    let feats = encoder.encode_dataset(&eval_ds).unwrap();
    let mut by_hand: Vec<Scores> = Vec::new();
    for (&seed, reported) in seeds.iter().zip(&report.per_seed) {
        let model = train(&train_ds, &encoder, &TrainConfig { seed, ..cfg.clone() }).unwrap();
        let pred: Vec<usize> = feats.iter().map(|x| model.predict(x).unwrap()).collect();
        let r = evaluate(&truth, &pred, 2, Label::Propaganda.class_index()).unwrap();
        assert_eq!(&r, reported);
        by_hand.push(r.scores);
    }
    let k = by_hand.len() as f64;
    let mean = |f: &dyn Fn(&Scores) -> f64| by_hand.iter().map(f).sum::<f64>() / k;
    let m = &report.mean;
    assert!((m.macro_f1 - mean(&|s| s.macro_f1)).abs() <= 1e-12);
    assert!((m.positive_f1 - mean(&|s| s.positive_f1)).abs() <= 1e-12);
    assert!((m.accuracy - mean(&|s| s.accuracy)).abs() <= 1e-12);
    for c in 0..2 {
        assert!((m.per_class[c].precision - mean(&|s| s.per_class[c].precision)).abs() <= 1e-12);
        assert!((m.per_class[c].recall - mean(&|s| s.per_class[c].recall)).abs() <= 1e-12);
    }
}
