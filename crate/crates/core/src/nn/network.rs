use serde::{Deserialize, Serialize};

use super::layer::{Layer, LayerSpec};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::linalg::{softmax_into, ProbVector};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 5e-5,
            batch_size: 128,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::ConfigInvalid(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "weight decay {} must be non-negative",
                self.weight_decay
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::ConfigInvalid("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Parameter gradients, one list per layer in network order.
#[derive(Clone, Debug)]
pub struct Gradients(pub Vec<Vec<Tensor>>);

impl Gradients {
    pub fn layer(&self, i: usize) -> &[Tensor] {
        &self.0[i]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(Tensor::is_finite)
    }
}

/// Sequential differentiable model producing one logit per class.
#[derive(Clone, Debug)]
pub struct Network {
    input_shape: [usize; 3],
    num_classes: usize,
    layers: Vec<Layer>,
    mode: Mode,
    seed: u64,
    forward_count: u64,
}

impl Network {
    /// Builds the network, checking that layer shapes compose from
    /// `input_shape = [channels, height, width]` down to `num_classes` logits.
    pub fn new(specs: Vec<LayerSpec>, input_shape: [usize; 3], seed: u64) -> Result<Self> {
        let mut shape = input_shape.to_vec();
        for spec in &specs {
            shape = spec.output_shape(&shape)?;
        }
        let num_classes = match shape[..] {
            [c] if c > 0 => c,
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "final layer must output a flat logit vector, got {shape:?}"
                )))
            }
        };
        let init_seed = derive_seed(seed, stream::INIT);
        let layers = specs
            .into_iter()
            .enumerate()
            .map(|(i, spec)| Layer::new(spec, init_seed, i))
            .collect();
        Ok(Network {
            input_shape,
            num_classes,
            layers,
            mode: Mode::Train,
            seed,
            forward_count: 0,
        })
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn specs(&self) -> impl Iterator<Item = &LayerSpec> {
        self.layers.iter().map(|l| &l.spec)
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().flat_map(|l| &l.params).map(Tensor::len).sum()
    }

    pub fn params(&self, layer: usize) -> &[Tensor] {
        &self.layers[layer].params
    }

    pub fn params_mut(&mut self, layer: usize) -> &mut [Tensor] {
        &mut self.layers[layer].params
    }

    pub fn buffers(&self, layer: usize) -> &[Tensor] {
        &self.layers[layer].buffers
    }

    pub fn buffers_mut(&mut self, layer: usize) -> &mut [Tensor] {
        &mut self.layers[layer].buffers
    }

    /// Number of training-mode forward passes so far; keys dropout masks.
    pub fn forward_count(&self) -> u64 {
        self.forward_count
    }

    /// Rewinds the dropout key so the next training forward reuses masks.
    pub fn set_forward_count(&mut self, count: u64) {
        self.forward_count = count;
    }

    fn check_input(&self, batch: &Tensor) -> Result<()> {
        let [c, h, w] = self.input_shape;
        match batch.shape() {
            [n, bc, bh, bw] if *n > 0 && (*bc, *bh, *bw) == (c, h, w) => Ok(()),
            other => Err(Error::ShapeMismatch(format!(
                "expected batch of shape (N, {c}, {h}, {w}), got {other:?}"
            ))),
        }
    }

    /// Forward pass caching activations for [`Network::backward`].
    pub fn forward(&mut self, batch: &Tensor) -> Result<Tensor> {
        self.check_input(batch)?;
        let training = self.mode == Mode::Train;
        let pass_seed = derive_seed(derive_seed(self.seed, stream::DROPOUT), self.forward_count);
        if training {
            self.forward_count += 1;
        }
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let (y, cache) = layer.forward(&x, training, derive_seed(pass_seed, i as u64))?;
            if !y.is_finite() {
                return Err(Error::NonFiniteActivation { layer: i });
            }
            layer.absorb_stats(&cache);
            layer.cache = Some(cache);
            x = y;
        }
        Ok(x)
    }

    /// Eval-mode forward pass without caching; does not touch `self`.
    pub fn infer(&self, batch: &Tensor) -> Result<Tensor> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, _) = layer.forward(&x, false, 0)?;
            if !y.is_finite() {
                return Err(Error::NonFiniteActivation { layer: i });
            }
            x = y;
        }
        Ok(x)
    }

    /// Backpropagates `upstream` (gradient w.r.t. the logits) through the
    /// cached forward pass. Consumes the caches.
    pub fn backward(&mut self, upstream: &Tensor) -> Result<Gradients> {
        if self.layers.iter().any(|l| l.cache.is_none()) {
            return Err(Error::NoCachedForward);
        }
        let mut grads = vec![Vec::new(); self.layers.len()];
        let mut g = upstream.clone();
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            let cache = layer.cache.take().expect("checked above");
            let (dx, pg) = layer.backward(&g, cache)?;
            grads[i] = pg;
            g = dx;
        }
        Ok(Gradients(grads))
    }

    /// SGD with momentum and L2 weight decay:
    /// `v ← μ v + g + λ θ`, `θ ← θ − η v`.
    pub fn sgd_step(&mut self, grads: &Gradients, cfg: &OptimizerConfig) -> Result<()> {
        if !grads.is_finite() {
            return Err(Error::NonFiniteGradient);
        }
        if grads.0.len() != self.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layers.len(),
                found: grads.0.len(),
            });
        }
        for (layer, lg) in self.layers.iter_mut().zip(&grads.0) {
            for ((p, v), g) in layer.params.iter_mut().zip(&mut layer.velocity).zip(lg) {
                if g.shape() != p.shape() {
                    return Err(Error::ShapeMismatch(format!(
                        "gradient {:?} vs parameter {:?}",
                        g.shape(),
                        p.shape()
                    )));
                }
                for ((pv, vv), gv) in p.data_mut().iter_mut().zip(v.data_mut()).zip(g.data()) {
                    *vv = cfg.momentum * *vv + gv + cfg.weight_decay * *pv;
                    *pv -= cfg.learning_rate * *vv;
                }
            }
        }
        Ok(())
    }

    /// Softmax posteriors for every image of an `(N, C, H, W)` batch, using
    /// eval-mode semantics.
    pub fn predict_posteriors(&self, batch: &Tensor) -> Result<Vec<ProbVector>> {
        let logits = self.infer(batch)?;
        Ok(posteriors_from_logits(&logits, self.num_classes))
    }
}

pub(crate) fn posteriors_from_logits(logits: &Tensor, c: usize) -> Vec<ProbVector> {
    logits
        .data()
        .chunks(c)
        .map(|z| {
            let mut p = vec![0.0; c];
            softmax_into(z, &mut p);
            ProbVector::new(p).expect("softmax output is a distribution")
        })
        .collect()
}
