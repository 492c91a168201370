//! Seeded fixtures shared by the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewlens::{FeatureVector, Label, LabeledDataset, Sentence};

/// `n` paired samples with a small location shift and no exact ties.
pub fn paired_samples(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.gen::<f64>() + 0.05, rng.gen::<f64>())).collect()
}

/// Sentences of `len` words drawn from a Zipf-like vocabulary of `vocab` words.
pub fn zipf_dataset(n_sentences: usize, len: usize, vocab: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n_sentences)
        .map(|i| {
            let text = (0..len)
                .map(|_| {
                    // inverse-CDF draw from a 1/r^2-ish tail, clipped to the vocabulary
                    let u: f64 = rng.gen_range(1e-9..1.0);
                    let r = ((1.0 / u).sqrt() as usize).min(vocab);
                    format!("w{r}")
                })
                .collect::<Vec<_>>()
                .join(" ");
            let label = if rng.gen_bool(0.28) {
                Label::Propaganda
            } else {
                Label::NonPropaganda
            };
            Sentence::new("bench", i + 1, text, Some(label))
        })
        .collect();
    LabeledDataset::new("bench", sentences)
}

/// Dense two-class blobs for the training benchmark.
pub fn dense_blobs(n: usize, dim: usize, seed: u64) -> (Vec<FeatureVector>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let y = usize::from(rng.gen_bool(0.28));
        let centre = if y == 1 { 0.5 } else { -0.5 };
        xs.push(FeatureVector::dense((0..dim).map(|_| centre + rng.gen_range(-1.0..1.0)).collect()).unwrap());
        ys.push(y);
    }
    (xs, ys)
}
