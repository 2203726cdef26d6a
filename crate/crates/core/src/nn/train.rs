use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{Mode, Network, OptimizerConfig};
use super::tensor::Tensor;
use crate::correction::weighted_ce_grad;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{argmax, softmax_into};
use crate::noise::TransitionMatrix;
use crate::rng::{derive_seed, keyed_unit, stream};

/// Probability of mirroring each training image.
pub const DEFAULT_FLIP_PROBABILITY: f64 = 0.5;

const EVAL_BATCH: usize = 256;

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub epochs: usize,
    pub flip_probability: f64,
    /// Keys shuffling and augmentation.
    pub seed: u64,
}

/// Mirrors each image of an `(N, C, H, W)` batch horizontally with
/// probability `p`; image `i` flips when the draw keyed by `(seed, i)` is
/// below `p`.
pub fn augment_flip(batch: &Tensor, p: f64, seed: u64) -> Tensor {
    let mut out = batch.clone();
    let shape = batch.shape();
    if shape.len() != 4 || p <= 0.0 {
        return out;
    }
    let w = shape[3];
    let per_image = batch.len() / shape[0].max(1);
    for (i, img) in out.data_mut().chunks_mut(per_image).enumerate() {
        if keyed_unit(seed, stream::AUGMENT, i as u64) < p {
            for row in img.chunks_mut(w) {
                row.reverse();
            }
        }
    }
    out
}

/// Mean loss over a batch and its gradient w.r.t. the logits. The per-instance
/// loss is the `label` entry of `T⁻¹ ℓ(softmax(z))`; with the identity matrix
/// this is plain cross-entropy.
pub fn batch_objective(logits: &Tensor, labels: &[usize], t: &TransitionMatrix) -> Result<(f64, Tensor)> {
    let c = t.num_classes();
    let n = logits.batch();
    if logits.shape() != [n, c] {
        return Err(Error::ShapeMismatch(format!(
            "logits {:?} vs {c} classes",
            logits.shape()
        )));
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    let mut grad = Tensor::zeros(&[n, c]);
    let mut p = vec![0.0; c];
    let mut total = 0.0;
    let scale = 1.0 / n as f64;
    for ((z, g), &y) in logits.data().chunks(c).zip(grad.data_mut().chunks_mut(c)).zip(labels) {
        if y >= c {
            return Err(Error::LabelOutOfRange { label: y, classes: c });
        }
        softmax_into(z, &mut p);
        total += weighted_ce_grad(&p, t.inverse().row(y), g);
        for v in g.iter_mut() {
            *v *= scale;
        }
    }
    Ok((total * scale, grad))
}

/// Trains `net` in place on `data` (whose labels may be noisy) and returns
/// the mean training objective of every epoch.
pub fn fit(net: &mut Network, data: &LabeledDataset, t: &TransitionMatrix, cfg: &TrainConfig) -> Result<Vec<f64>> {
    cfg.optimizer.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if t.num_classes() != net.num_classes() {
        return Err(Error::DimensionMismatch {
            expected: net.num_classes(),
            found: t.num_classes(),
        });
    }
    net.set_mode(Mode::Train);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(cfg.seed, stream::SHUFFLE), epoch as u64));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (b, chunk) in order.chunks(cfg.optimizer.batch_size).enumerate() {
            let batch = data.batch_tensor(chunk);
            let aug_seed = derive_seed(
                derive_seed(cfg.seed, stream::AUGMENT),
                ((epoch as u64) << 32) | b as u64,
            );
            let batch = augment_flip(&batch, cfg.flip_probability, aug_seed);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let logits = net.forward(&batch)?;
            let (loss, dlogits) = batch_objective(&logits, &labels, t)?;
            let grads = net.backward(&dlogits)?;
            net.sgd_step(&grads, &cfg.optimizer)?;
            epoch_loss += loss * chunk.len() as f64;
        }
        history.push(epoch_loss / data.len() as f64);
    }
    net.set_mode(Mode::Eval);
    Ok(history)
}

/// Eval-mode posteriors for every image of `data`, in order.
pub fn posteriors(net: &Network, data: &LabeledDataset) -> Result<Vec<Vec<f64>>> {
    let c = net.num_classes();
    let mut out = Vec::with_capacity(data.len());
    let idx: Vec<usize> = (0..data.len()).collect();
    for chunk in idx.chunks(EVAL_BATCH) {
        let logits = net.infer(&data.batch_tensor(chunk))?;
        for z in logits.data().chunks(c) {
            let mut p = vec![0.0; c];
            softmax_into(z, &mut p);
            out.push(p);
        }
    }
    Ok(out)
}

/// Top-1 class predictions for every image of `data`.
pub fn predict(net: &Network, data: &LabeledDataset) -> Result<Vec<usize>> {
    Ok(posteriors(net, data)?.iter().map(|p| argmax(p)).collect())
}
