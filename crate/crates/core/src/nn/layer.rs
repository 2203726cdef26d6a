use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::{keyed_unit, stream};

pub const BATCHNORM_EPS: f64 = 1e-5;
pub const BATCHNORM_MOMENTUM: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerSpec {
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    MaxPool2d {
        size: usize,
        stride: usize,
    },
    Activation {
        function: Activation,
    },
    Dense {
        inputs: usize,
        outputs: usize,
    },
    /// Per-channel over `(N, C, H, W)` or per-feature over `(N, F)`.
    BatchNorm {
        features: usize,
    },
    Dropout {
        p: f64,
    },
    Flatten,
}

impl LayerSpec {
    pub fn conv(in_channels: usize, out_channels: usize, kernel: usize, padding: usize) -> Self {
        LayerSpec::Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride: 1,
            padding,
        }
    }

    pub fn pool(size: usize) -> Self {
        LayerSpec::MaxPool2d { size, stride: size }
    }

    pub fn tanh() -> Self {
        LayerSpec::Activation {
            function: Activation::Tanh,
        }
    }

    pub fn relu() -> Self {
        LayerSpec::Activation {
            function: Activation::Relu,
        }
    }

    pub fn dense(inputs: usize, outputs: usize) -> Self {
        LayerSpec::Dense { inputs, outputs }
    }

    /// Output shape (without the batch axis) for the given input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let mismatch = |what: &str| Err(Error::ShapeMismatch(format!("{what} cannot take input {input:?}")));
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => match *input {
                [c, h, w]
                    if c == in_channels && stride > 0 && h + 2 * padding >= kernel && w + 2 * padding >= kernel =>
                {
                    Ok(vec![
                        out_channels,
                        (h + 2 * padding - kernel) / stride + 1,
                        (w + 2 * padding - kernel) / stride + 1,
                    ])
                }
                _ => mismatch("conv2d"),
            },
            LayerSpec::MaxPool2d { size, stride } => match *input {
                [c, h, w] if size > 0 && stride > 0 && h >= size && w >= size => {
                    Ok(vec![c, (h - size) / stride + 1, (w - size) / stride + 1])
                }
                _ => mismatch("maxpool2d"),
            },
            LayerSpec::Activation { .. } | LayerSpec::Dropout { .. } => Ok(input.to_vec()),
            LayerSpec::Dense { inputs, outputs } => match *input {
                [f] if f == inputs => Ok(vec![outputs]),
                _ => mismatch("dense"),
            },
            LayerSpec::BatchNorm { features } => match input {
                [f] | [f, _, _] if *f == features => Ok(input.to_vec()),
                _ => mismatch("batchnorm"),
            },
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Cache {
    Input(Tensor),
    Output(Tensor),
    Pool {
        input_shape: Vec<usize>,
        argmax: Vec<usize>,
    },
    Mask(Vec<f64>),
    Norm {
        xhat: Tensor,
        inv_std: Vec<f64>,
        /// Batch mean and unbiased variance when batch statistics were used.
        batch_stats: Option<(Vec<f64>, Vec<f64>)>,
    },
    Shape(Vec<usize>),
    Identity,
}

/// A layer together with its parameters and optimizer state.
#[derive(Clone, Debug)]
pub(crate) struct Layer {
    pub spec: LayerSpec,
    pub params: Vec<Tensor>,
    pub velocity: Vec<Tensor>,
    /// Non-trainable state (batchnorm running mean and variance).
    pub buffers: Vec<Tensor>,
    pub cache: Option<Cache>,
}

impl Layer {
    /// Builds the layer with Glorot-uniform weights keyed by `(seed, index)`.
    pub fn new(spec: LayerSpec, seed: u64, index: usize) -> Self {
        let glorot = |shape: &[usize], fan_in: usize, fan_out: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let n: usize = shape.iter().product();
            let data = (0..n)
                .map(|k| {
                    let u = keyed_unit(seed, stream::INIT, ((index as u64) << 40) | k as u64);
                    (2.0 * u - 1.0) * bound
                })
                .collect();
            Tensor::new(shape.to_vec(), data).expect("shape matches")
        };
        let (params, buffers) = match spec {
            LayerSpec::Conv2d {
                in_channels: ci,
                out_channels: co,
                kernel: k,
                ..
            } => (
                vec![glorot(&[co, ci, k, k], ci * k * k, co * k * k), Tensor::zeros(&[co])],
                vec![],
            ),
            LayerSpec::Dense { inputs, outputs } => (
                vec![glorot(&[outputs, inputs], inputs, outputs), Tensor::zeros(&[outputs])],
                vec![],
            ),
            LayerSpec::BatchNorm { features } => (
                vec![
                    Tensor::new(vec![features], vec![1.0; features]).unwrap(),
                    Tensor::zeros(&[features]),
                ],
                vec![
                    Tensor::zeros(&[features]),
                    Tensor::new(vec![features], vec![1.0; features]).unwrap(),
                ],
            ),
            _ => (vec![], vec![]),
        };
        let velocity = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        Layer {
            spec,
            params,
            velocity,
            buffers,
            cache: None,
        }
    }

    /// `mask_seed` keys dropout masks; batchnorm uses batch statistics and
    /// updates its running averages only when `training` is set.
    pub fn forward(&self, x: &Tensor, training: bool, mask_seed: u64) -> Result<(Tensor, Cache)> {
        match self.spec {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
                ..
            } => {
                let y = conv_forward(
                    x,
                    &self.params[0],
                    &self.params[1],
                    out_channels,
                    kernel,
                    stride,
                    padding,
                );
                Ok((y, Cache::Input(x.clone())))
            }
            LayerSpec::MaxPool2d { size, stride } => {
                let (y, argmax) = pool_forward(x, size, stride);
                Ok((
                    y,
                    Cache::Pool {
                        input_shape: x.shape().to_vec(),
                        argmax,
                    },
                ))
            }
            LayerSpec::Activation { function } => match function {
                Activation::Tanh => {
                    let y = x.map(f64::tanh);
                    Ok((y.clone(), Cache::Output(y)))
                }
                Activation::Relu => Ok((x.map(|v| v.max(0.0)), Cache::Input(x.clone()))),
            },
            LayerSpec::Dense { inputs, outputs } => {
                let y = dense_forward(x, &self.params[0], &self.params[1], inputs, outputs);
                Ok((y, Cache::Input(x.clone())))
            }
            LayerSpec::BatchNorm { features } => self.batchnorm_forward(x, features, training),
            LayerSpec::Dropout { p } => {
                if !training || p == 0.0 {
                    return Ok((x.clone(), Cache::Identity));
                }
                let keep = 1.0 - p;
                let mask: Vec<f64> = (0..x.len())
                    .map(|i| {
                        if keyed_unit(mask_seed, stream::DROPOUT, i as u64) < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let data = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
                Ok((Tensor::new(x.shape().to_vec(), data)?, Cache::Mask(mask)))
            }
            LayerSpec::Flatten => {
                let n = x.batch();
                let rest = x.len() / n.max(1);
                Ok((x.clone().reshape(vec![n, rest])?, Cache::Shape(x.shape().to_vec())))
            }
        }
    }

    /// Returns the input gradient and one gradient per parameter tensor.
    pub fn backward(&self, dy: &Tensor, cache: Cache) -> Result<(Tensor, Vec<Tensor>)> {
        match (&self.spec, cache) {
            (
                &LayerSpec::Conv2d {
                    kernel,
                    stride,
                    padding,
                    ..
                },
                Cache::Input(x),
            ) => Ok(conv_backward(&x, &self.params[0], dy, kernel, stride, padding)),
            (LayerSpec::MaxPool2d { .. }, Cache::Pool { input_shape, argmax }) => {
                let mut dx = Tensor::zeros(&input_shape);
                let d = dx.data_mut();
                for (&src, &g) in argmax.iter().zip(dy.data()) {
                    d[src] += g;
                }
                Ok((dx, vec![]))
            }
            (LayerSpec::Activation { .. }, Cache::Output(y)) => {
                let data = y.data().iter().zip(dy.data()).map(|(y, g)| g * (1.0 - y * y)).collect();
                Ok((Tensor::new(dy.shape().to_vec(), data)?, vec![]))
            }
            (LayerSpec::Activation { .. }, Cache::Input(x)) => {
                let data = x
                    .data()
                    .iter()
                    .zip(dy.data())
                    .map(|(x, g)| if *x > 0.0 { *g } else { 0.0 })
                    .collect();
                Ok((Tensor::new(dy.shape().to_vec(), data)?, vec![]))
            }
            (&LayerSpec::Dense { inputs, outputs }, Cache::Input(x)) => {
                Ok(dense_backward(&x, &self.params[0], dy, inputs, outputs))
            }
            (
                &LayerSpec::BatchNorm { features },
                Cache::Norm {
                    xhat,
                    inv_std,
                    batch_stats,
                },
            ) => Ok(self.batchnorm_backward(dy, features, &xhat, &inv_std, batch_stats.is_some())),
            (LayerSpec::Dropout { .. }, Cache::Mask(mask)) => {
                let data = dy.data().iter().zip(&mask).map(|(g, m)| g * m).collect();
                Ok((Tensor::new(dy.shape().to_vec(), data)?, vec![]))
            }
            (_, Cache::Identity) => Ok((dy.clone(), vec![])),
            (LayerSpec::Flatten, Cache::Shape(shape)) => Ok((dy.clone().reshape(shape)?, vec![])),
            (spec, _) => Err(Error::ShapeMismatch(format!("cache does not belong to layer {spec:?}"))),
        }
    }

    fn batchnorm_forward(&self, x: &Tensor, features: usize, training: bool) -> Result<(Tensor, Cache)> {
        let n = x.batch();
        let spatial = x.len() / (n * features).max(1);
        let count = n * spatial;
        let at = |b: usize, f: usize| (b * features + f) * spatial;

        let mut stats = None;
        let (mean, var) = if training {
            let mut mean = vec![0.0; features];
            let mut var = vec![0.0; features];
            for f in 0..features {
                let mut s = 0.0;
                for b in 0..n {
                    s += x.data()[at(b, f)..at(b, f) + spatial].iter().sum::<f64>();
                }
                let m = s / count as f64;
                let mut v = 0.0;
                for b in 0..n {
                    v += x.data()[at(b, f)..at(b, f) + spatial]
                        .iter()
                        .map(|x| (x - m) * (x - m))
                        .sum::<f64>();
                }
                mean[f] = m;
                var[f] = v / count as f64;
            }
            let unbias = if count > 1 {
                count as f64 / (count - 1) as f64
            } else {
                1.0
            };
            stats = Some((mean.clone(), var.iter().map(|v| v * unbias).collect()));
            (mean, var)
        } else {
            (self.buffers[0].data().to_vec(), self.buffers[1].data().to_vec())
        };

        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BATCHNORM_EPS).sqrt()).collect();
        let gamma = self.params[0].data();
        let beta = self.params[1].data();
        let mut xhat = Tensor::zeros(x.shape());
        let mut y = Tensor::zeros(x.shape());
        for b in 0..n {
            for f in 0..features {
                let r = at(b, f)..at(b, f) + spatial;
                for ((xh, yo), &xi) in xhat.data_mut()[r.clone()]
                    .iter_mut()
                    .zip(&mut y.data_mut()[r.clone()])
                    .zip(&x.data()[r.clone()])
                {
                    *xh = (xi - mean[f]) * inv_std[f];
                    *yo = gamma[f] * *xh + beta[f];
                }
            }
        }
        Ok((
            y,
            Cache::Norm {
                xhat,
                inv_std,
                batch_stats: stats,
            },
        ))
    }

    /// Folds batch statistics from a training forward into the running averages.
    pub fn absorb_stats(&mut self, cache: &Cache) {
        if let Cache::Norm {
            batch_stats: Some((mean, var)),
            ..
        } = cache
        {
            let m = BATCHNORM_MOMENTUM;
            for (r, b) in self.buffers[0].data_mut().iter_mut().zip(mean) {
                *r = (1.0 - m) * *r + m * b;
            }
            for (r, b) in self.buffers[1].data_mut().iter_mut().zip(var) {
                *r = (1.0 - m) * *r + m * b;
            }
        }
    }

    fn batchnorm_backward(
        &self,
        dy: &Tensor,
        features: usize,
        xhat: &Tensor,
        inv_std: &[f64],
        batch_stats: bool,
    ) -> (Tensor, Vec<Tensor>) {
        let n = dy.batch();
        let spatial = dy.len() / (n * features).max(1);
        let count = (n * spatial) as f64;
        let at = |b: usize, f: usize| (b * features + f) * spatial;
        let gamma = self.params[0].data();

        let mut dgamma = vec![0.0; features];
        let mut dbeta = vec![0.0; features];
        for b in 0..n {
            for f in 0..features {
                let r = at(b, f)..at(b, f) + spatial;
                for (g, xh) in dy.data()[r.clone()].iter().zip(&xhat.data()[r]) {
                    dgamma[f] += g * xh;
                    dbeta[f] += g;
                }
            }
        }

        let mut dx = Tensor::zeros(dy.shape());
        for b in 0..n {
            for f in 0..features {
                let r = at(b, f)..at(b, f) + spatial;
                let scale = gamma[f] * inv_std[f];
                for ((d, g), xh) in dx.data_mut()[r.clone()]
                    .iter_mut()
                    .zip(&dy.data()[r.clone()])
                    .zip(&xhat.data()[r])
                {
                    *d = if batch_stats {
                        scale * (g - dbeta[f] / count - xh * dgamma[f] / count)
                    } else {
                        scale * g
                    };
                }
            }
        }
        (
            dx,
            vec![
                Tensor::new(vec![features], dgamma).unwrap(),
                Tensor::new(vec![features], dbeta).unwrap(),
            ],
        )
    }
}

/// Output positions `[lo, hi)` whose input coordinate `o*stride + off - pad`
/// lands inside `[0, in_len)`.
fn valid_range(out_len: usize, in_len: usize, off: usize, stride: usize, pad: usize) -> (usize, usize) {
    let lo = if pad > off { (pad - off).div_ceil(stride) } else { 0 };
    let hi = if in_len + pad > off {
        ((in_len + pad - off - 1) / stride + 1).min(out_len)
    } else {
        0
    };
    (lo, hi.max(lo))
}

fn conv_forward(x: &Tensor, w: &Tensor, b: &Tensor, co: usize, k: usize, stride: usize, pad: usize) -> Tensor {
    let &[n, ci, h, wd] = x.shape() else {
        unreachable!("conv input is 4-d")
    };
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (wd + 2 * pad - k) / stride + 1;
    let mut y = Tensor::zeros(&[n, co, oh, ow]);
    let (xd, wt, bias) = (x.data(), w.data(), b.data());
    let yd = y.data_mut();
    for s in 0..n {
        for o in 0..co {
            let out = &mut yd[(s * co + o) * oh * ow..][..oh * ow];
            out.fill(bias[o]);
            for c in 0..ci {
                let inp = &xd[(s * ci + c) * h * wd..][..h * wd];
                for kh in 0..k {
                    let (rlo, rhi) = valid_range(oh, h, kh, stride, pad);
                    for kw in 0..k {
                        let wv = wt[((o * ci + c) * k + kh) * k + kw];
                        let (clo, chi) = valid_range(ow, wd, kw, stride, pad);
                        for r in rlo..rhi {
                            let ih = r * stride + kh - pad;
                            let in_row = &inp[ih * wd..][..wd];
                            let out_row = &mut out[r * ow..][..ow];
                            if stride == 1 {
                                let shift = clo + kw - pad;
                                for (yo, xi) in out_row[clo..chi].iter_mut().zip(&in_row[shift..]) {
                                    *yo += wv * xi;
                                }
                            } else {
                                for col in clo..chi {
                                    out_row[col] += wv * in_row[col * stride + kw - pad];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    y
}

fn conv_backward(x: &Tensor, w: &Tensor, dy: &Tensor, k: usize, stride: usize, pad: usize) -> (Tensor, Vec<Tensor>) {
    let &[n, ci, h, wd] = x.shape() else {
        unreachable!("conv input is 4-d")
    };
    let &[_, co, oh, ow] = dy.shape() else {
        unreachable!("conv output is 4-d")
    };
    let mut dx = Tensor::zeros(x.shape());
    let mut dw = Tensor::zeros(w.shape());
    let mut db = Tensor::zeros(&[co]);
    let (xd, wt, gd) = (x.data(), w.data(), dy.data());
    {
        let dxd = dx.data_mut();
        let dwd = dw.data_mut();
        let dbd = db.data_mut();
        for s in 0..n {
            for o in 0..co {
                let g = &gd[(s * co + o) * oh * ow..][..oh * ow];
                dbd[o] += g.iter().sum::<f64>();
                for c in 0..ci {
                    let base = (s * ci + c) * h * wd;
                    for kh in 0..k {
                        let (rlo, rhi) = valid_range(oh, h, kh, stride, pad);
                        for kw in 0..k {
                            let widx = ((o * ci + c) * k + kh) * k + kw;
                            let wv = wt[widx];
                            let (clo, chi) = valid_range(ow, wd, kw, stride, pad);
                            let mut acc = 0.0;
                            for r in rlo..rhi {
                                let ih = r * stride + kh - pad;
                                let g_row = &g[r * ow..][..ow];
                                let row_start = base + ih * wd;
                                if stride == 1 {
                                    let shift = row_start + clo + kw - pad;
                                    let len = chi - clo;
                                    let in_row = &xd[shift..shift + len];
                                    acc += g_row[clo..chi].iter().zip(in_row).map(|(a, b)| a * b).sum::<f64>();
                                    for (d, gv) in dxd[shift..shift + len].iter_mut().zip(&g_row[clo..chi]) {
                                        *d += wv * gv;
                                    }
                                } else {
                                    for col in clo..chi {
                                        let xi = row_start + col * stride + kw - pad;
                                        acc += g_row[col] * xd[xi];
                                        dxd[xi] += wv * g_row[col];
                                    }
                                }
                            }
                            dwd[widx] += acc;
                        }
                    }
                }
            }
        }
    }
    (dx, vec![dw, db])
}

fn pool_forward(x: &Tensor, size: usize, stride: usize) -> (Tensor, Vec<usize>) {
    let &[n, c, h, w] = x.shape() else {
        unreachable!("pool input is 4-d")
    };
    let oh = (h - size) / stride + 1;
    let ow = (w - size) / stride + 1;
    let mut y = Tensor::zeros(&[n, c, oh, ow]);
    let mut argmax = vec![0; n * c * oh * ow];
    let xd = x.data();
    let yd = y.data_mut();
    for plane in 0..n * c {
        let base = plane * h * w;
        for r in 0..oh {
            for col in 0..ow {
                let mut best = base + r * stride * w + col * stride;
                for dr in 0..size {
                    for dc in 0..size {
                        let idx = base + (r * stride + dr) * w + col * stride + dc;
                        if xd[idx] > xd[best] {
                            best = idx;
                        }
                    }
                }
                let o = (plane * oh + r) * ow + col;
                yd[o] = xd[best];
                argmax[o] = best;
            }
        }
    }
    (y, argmax)
}

fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor, inputs: usize, outputs: usize) -> Tensor {
    let n = x.batch();
    let mut y = Tensor::zeros(&[n, outputs]);
    let (xd, wt, bias) = (x.data(), w.data(), b.data());
    for (s, out) in y.data_mut().chunks_mut(outputs).enumerate() {
        let xi = &xd[s * inputs..][..inputs];
        for (o, yo) in out.iter_mut().enumerate() {
            let row = &wt[o * inputs..][..inputs];
            *yo = bias[o] + row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    y
}

fn dense_backward(x: &Tensor, w: &Tensor, dy: &Tensor, inputs: usize, outputs: usize) -> (Tensor, Vec<Tensor>) {
    let n = x.batch();
    let mut dx = Tensor::zeros(x.shape());
    let mut dw = Tensor::zeros(&[outputs, inputs]);
    let mut db = Tensor::zeros(&[outputs]);
    let (xd, wt, gd) = (x.data(), w.data(), dy.data());
    for s in 0..n {
        let xi = &xd[s * inputs..][..inputs];
        let g = &gd[s * outputs..][..outputs];
        let dxi = &mut dx.data_mut()[s * inputs..][..inputs];
        for (o, &go) in g.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            let row = &wt[o * inputs..][..inputs];
            for (d, wv) in dxi.iter_mut().zip(row) {
                *d += go * wv;
            }
            for (d, xv) in dw.data_mut()[o * inputs..][..inputs].iter_mut().zip(xi) {
                *d += go * xv;
            }
            db.data_mut()[o] += go;
        }
    }
    (dx, vec![dw, db])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_range_covers_padding() {
        // 5 wide input, 3 kernel, pad 1 -> 5 outputs
        assert_eq!(valid_range(5, 5, 0, 1, 1), (1, 5));
        assert_eq!(valid_range(5, 5, 1, 1, 1), (0, 5));
        assert_eq!(valid_range(5, 5, 2, 1, 1), (0, 4));
        // stride 2, no padding, 7 wide input, 3 kernel -> 3 outputs
        assert_eq!(valid_range(3, 7, 2, 2, 0), (0, 3));
    }

    #[test]
    fn conv_matches_naive_definition() {
        let x = Tensor::new(vec![1, 2, 4, 5], (0..40).map(|v| (v as f64 * 0.37).sin()).collect()).unwrap();
        let w = Tensor::new(vec![3, 2, 3, 3], (0..54).map(|v| (v as f64 * 0.11).cos()).collect()).unwrap();
        let b = Tensor::new(vec![3], vec![0.1, -0.2, 0.3]).unwrap();
        for (stride, pad) in [(1, 0), (1, 1), (2, 1), (2, 0)] {
            let y = conv_forward(&x, &w, &b, 3, 3, stride, pad);
            let &[_, _, oh, ow] = y.shape() else { panic!() };
            for o in 0..3 {
                for r in 0..oh {
                    for c in 0..ow {
                        let mut s = b.data()[o];
                        for ci in 0..2 {
                            for kh in 0..3 {
                                for kw in 0..3 {
                                    let ih = (r * stride + kh) as isize - pad as isize;
                                    let iw = (c * stride + kw) as isize - pad as isize;
                                    if (0..4).contains(&ih) && (0..5).contains(&iw) {
                                        s += w.data()[((o * 2 + ci) * 3 + kh) * 3 + kw]
                                            * x.data()[(ci * 4 + ih as usize) * 5 + iw as usize];
                                    }
                                }
                            }
                        }
                        let got = y.data()[(o * oh + r) * ow + c];
                        assert!((got - s).abs() < 1e-12, "stride {stride} pad {pad}");
                    }
                }
            }
        }
    }

    #[test]
    fn pool_picks_maximum() {
        let x = Tensor::new(vec![1, 1, 2, 4], vec![1.0, 5.0, 2.0, 0.0, 3.0, 4.0, 7.0, 6.0]).unwrap();
        let (y, argmax) = pool_forward(&x, 2, 2);
        assert_eq!(y.data(), &[5.0, 7.0]);
        assert_eq!(argmax, vec![1, 6]);
    }
}
