//! Dense feed-forward networks trained with backpropagation.
//!
//! The architecture is fixed by configuration: `hidden_layers` dense ReLU
//! layers of `hidden_neurons` each, followed by one linear output layer.
//! All arithmetic is 64-bit. Training is fully determined by
//! `(seed, data, config)`: weights come from a Glorot-uniform draw over the
//! seeded generator and every shuffle uses a stream derived from the same
//! seed.

pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SplitMix64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    /// Derivative as a function of the pre-activation. The ReLU subgradient
    /// at exactly zero is taken as 0.
    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Network and training hyperparameters. `new` fills in the defaults used
/// throughout: 4 hidden layers of 14 ReLU neurons, linear output, learning
/// rate 0.001, 32 epochs, batch size 20, Adam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_neurons: usize,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(input_dim: usize, output_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_layers: 4,
            hidden_neurons: 14,
            output_dim,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Linear,
            learning_rate: 0.001,
            epochs: 32,
            batch_size: 20,
            optimizer: OptimizerKind::Adam,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("input_dim", self.input_dim),
            ("hidden_layers", self.hidden_layers),
            ("hidden_neurons", self.hidden_neurons),
            ("output_dim", self.output_dim),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ] {
            if value == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// `(rows, cols)` of every weight matrix, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            dims.push((self.hidden_neurons, fan_in));
            fan_in = self.hidden_neurons;
        }
        dims.push((self.output_dim, fan_in));
        dims
    }
}

/// One dense layer: row-major `rows x cols` weights, `rows` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.cols)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Checks layer chaining, buffer lengths, and weight finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::DimensionMismatch("network has no layers".into()));
        }
        let mut fan_in = self.input_dim();
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.cols != fan_in {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} expects {fan_in} inputs, has cols {}",
                    layer.cols
                )));
            }
            if layer.weights.len() != layer.rows * layer.cols {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} has {} weights, expected {}",
                    layer.weights.len(),
                    layer.rows * layer.cols
                )));
            }
            if layer.biases.len() != layer.rows {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} has {} biases, expected {}",
                    layer.biases.len(),
                    layer.rows
                )));
            }
            if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} contains non-finite parameters"
                )));
            }
            fan_in = layer.rows;
        }
        Ok(())
    }
}

/// Build a network from `cfg`: Glorot-uniform weights drawn layer by layer,
/// row-major, from `SplitMix64::new(cfg.seed)`; biases zero. The uniform
/// limit per layer is `sqrt(6 / (fan_in + fan_out))`.
pub fn init_network(cfg: &NetworkConfig) -> Result<Network> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let dims = cfg.layer_dims();
    let last = dims.len() - 1;
    let layers = dims
        .into_iter()
        .enumerate()
        .map(|(i, (rows, cols))| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let weights = (0..rows * cols).map(|_| rng.next_range(-limit, limit)).collect();
            Layer {
                rows,
                cols,
                weights,
                biases: vec![0.0; rows],
                activation: if i == last {
                    cfg.output_activation
                } else {
                    cfg.hidden_activation
                },
            }
        })
        .collect();
    Ok(Network { layers })
}

/// Per-layer pre- and post-activations captured by [`forward`], sufficient
/// for [`backward`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l + 1]` the output of
    /// layer `l`.
    activations: Vec<Vec<f64>>,
    /// `pre_activations[l]` is `W_l a_l + b_l` before the nonlinearity.
    pre_activations: Vec<Vec<f64>>,
}

pub fn forward(net: &Network, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if x.len() != net.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "input has {} components, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    let mut activations = Vec::with_capacity(net.layers.len() + 1);
    let mut pre_activations = Vec::with_capacity(net.layers.len());
    activations.push(x.to_vec());
    let mut current = x.to_vec();
    for layer in &net.layers {
        let mut z = vec![0.0; layer.rows];
        for (r, zr) in z.iter_mut().enumerate() {
            let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
            let mut acc = layer.biases[r];
            for (w, a) in row.iter().zip(&current) {
                acc += w * a;
            }
            *zr = acc;
        }
        current = z.iter().map(|&v| layer.activation.apply(v)).collect();
        pre_activations.push(z);
        activations.push(current.clone());
    }
    Ok((current, ForwardCache { activations, pre_activations }))
}

/// Mean over components of squared differences.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} components, target {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty vectors".into()));
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrads {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.d_weights.iter_mut().zip(&b.d_weights) {
                *x += y;
            }
            for (x, y) in a.d_biases.iter_mut().zip(&b.d_biases) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for x in &mut layer.d_weights {
                *x *= factor;
            }
            for x in &mut layer.d_biases {
                *x *= factor;
            }
        }
    }

    fn matches(&self, net: &Network) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.d_weights.len() == l.weights.len() && g.d_biases.len() == l.biases.len()
            })
    }
}

/// Exact analytic gradients of [`mse_loss`] with respect to every weight and
/// bias, given the cache of a matching [`forward`] call.
pub fn backward(net: &Network, cache: &ForwardCache, target: &[f64]) -> Result<Gradients> {
    if cache.activations.len() != net.layers.len() + 1
        || cache.pre_activations.len() != net.layers.len()
        || cache.activations[0].len() != net.input_dim()
        || net
            .layers
            .iter()
            .zip(&cache.pre_activations)
            .any(|(l, z)| z.len() != l.rows)
    {
        return Err(Error::DimensionMismatch(
            "forward cache does not match this network".into(),
        ));
    }
    if target.len() != net.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} components, network outputs {}",
            target.len(),
            net.output_dim()
        )));
    }

    let output = cache.activations.last().expect("validated above");
    let n_out = output.len() as f64;
    // dL/da_L for the component mean of squared errors.
    let mut delta: Vec<f64> = output
        .iter()
        .zip(target)
        .map(|(&a, &t)| 2.0 * (a - t) / n_out)
        .collect();

    let mut grads = Gradients::zeros_like(net);
    for l in (0..net.layers.len()).rev() {
        let layer = &net.layers[l];
        let pre = &cache.pre_activations[l];
        let dz: Vec<f64> = delta
            .iter()
            .zip(pre)
            .map(|(&d, &z)| d * layer.activation.derivative(z))
            .collect();
        let below = &cache.activations[l];
        let slot = &mut grads.layers[l];
        for (r, &dzr) in dz.iter().enumerate() {
            slot.d_biases[r] = dzr;
            let row = &mut slot.d_weights[r * layer.cols..(r + 1) * layer.cols];
            for (g, a) in row.iter_mut().zip(below) {
                *g = dzr * a;
            }
        }
        if l > 0 {
            let mut next = vec![0.0; layer.cols];
            for (r, &dzr) in dz.iter().enumerate() {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += w * dzr;
                }
            }
            delta = next;
        }
    }
    Ok(grads)
}

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    kind: OptimizerKind,
    step: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    first_moment: Vec<LayerGrads>,
    second_moment: Vec<LayerGrads>,
}

impl OptimizerState {
    pub fn new(net: &Network, kind: OptimizerKind) -> Self {
        let zeros = Gradients::zeros_like(net).layers;
        OptimizerState {
            kind,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: zeros.clone(),
            second_moment: zeros,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// Apply one optimizer update in place. Adam uses bias-corrected moment
/// estimates; SGD is the plain `p -= lr * g` rule.
pub fn optimizer_step(
    state: &mut OptimizerState,
    net: &mut Network,
    grads: &Gradients,
    lr: f64,
) -> Result<()> {
    if !grads.matches(net) || state.first_moment.len() != net.layers.len() {
        return Err(Error::DimensionMismatch(
            "gradient or optimizer state shapes do not match the network".into(),
        ));
    }
    state.step += 1;
    match state.kind {
        OptimizerKind::Sgd => {
            for (layer, g) in net.layers.iter_mut().zip(&grads.layers) {
                for (p, &dg) in layer.weights.iter_mut().zip(&g.d_weights) {
                    *p -= lr * dg;
                }
                for (p, &dg) in layer.biases.iter_mut().zip(&g.d_biases) {
                    *p -= lr * dg;
                }
            }
        }
        OptimizerKind::Adam => {
            let bc1 = 1.0 - state.beta1.powi(state.step as i32);
            let bc2 = 1.0 - state.beta2.powi(state.step as i32);
            for (l, (layer, g)) in net.layers.iter_mut().zip(&grads.layers).enumerate() {
                let m = &mut state.first_moment[l];
                let v = &mut state.second_moment[l];
                adam_update(
                    &mut layer.weights,
                    &g.d_weights,
                    &mut m.d_weights,
                    &mut v.d_weights,
                    state.beta1,
                    state.beta2,
                    state.epsilon,
                    bc1,
                    bc2,
                    lr,
                );
                adam_update(
                    &mut layer.biases,
                    &g.d_biases,
                    &mut m.d_biases,
                    &mut v.d_biases,
                    state.beta1,
                    state.beta2,
                    state.epsilon,
                    bc1,
                    bc2,
                    lr,
                );
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bc1: f64,
    bc2: f64,
    lr: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// One standardized training example.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Per-epoch training and validation mean squared error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub training: Vec<f64>,
    pub validation: Vec<f64>,
}

impl LossCurve {
    pub fn len(&self) -> usize {
        self.training.len()
    }

    pub fn is_empty(&self) -> bool {
        self.training.is_empty()
    }
}

/// Train `net` on `data` for `cfg.epochs` epochs.
///
/// A stream seeded with `derive_seed(cfg.seed, STREAM_TRAIN)` first shuffles
/// the data once — the first `floor(n * val_fraction)` (at least 1) indices
/// become the validation set — then reshuffles the training indices every
/// epoch. Mini-batches of `cfg.batch_size` are taken in order, the final
/// short batch included; gradients are averaged over each batch. Losses are
/// measured at epoch end over the full training and validation sets; a
/// non-finite loss aborts with [`Error::NonFiniteLoss`].
pub fn train(
    net: &mut Network,
    data: &[Sample],
    cfg: &NetworkConfig,
    val_fraction: f64,
) -> Result<LossCurve> {
    cfg.validate()?;
    net.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples to train, got {}",
            data.len()
        )));
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "val_fraction must be in (0, 1), got {val_fraction}"
        )));
    }
    for (i, sample) in data.iter().enumerate() {
        if sample.input.len() != net.input_dim() || sample.target.len() != net.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "sample {i} has shape ({}, {}), network expects ({}, {})",
                sample.input.len(),
                sample.target.len(),
                net.input_dim(),
                net.output_dim()
            )));
        }
    }

    let mut rng = SplitMix64::new(rng::derive_seed(cfg.seed, rng::STREAM_TRAIN));
    let n = data.len();
    let mut indices: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut indices);
    let n_val = ((n as f64 * val_fraction).floor() as usize).max(1);
    if n_val >= n {
        return Err(Error::InvalidArgument(
            "validation split leaves no training data".into(),
        ));
    }
    let (val_idx, rest) = indices.split_at(n_val);
    let mut train_idx = rest.to_vec();

    let mut optimizer = OptimizerState::new(net, cfg.optimizer);
    let mut curve = LossCurve {
        training: Vec::with_capacity(cfg.epochs),
        validation: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut train_idx);
        for batch in train_idx.chunks(cfg.batch_size) {
            let mut acc = Gradients::zeros_like(net);
            for &i in batch {
                let (_, cache) = forward(net, &data[i].input)?;
                let grads = backward(net, &cache, &data[i].target)?;
                acc.add_assign(&grads);
            }
            acc.scale(1.0 / batch.len() as f64);
            optimizer_step(&mut optimizer, net, &acc, cfg.learning_rate)?;
        }
        let train_loss = mean_loss(net, data, &train_idx)?;
        let val_loss = mean_loss(net, data, val_idx)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
        }
        curve.training.push(train_loss);
        curve.validation.push(val_loss);
    }
    Ok(curve)
}

fn mean_loss(net: &Network, data: &[Sample], indices: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    for &i in indices {
        let (pred, _) = forward(net, &data[i].input)?;
        sum += mse_loss(&pred, &data[i].target)?;
    }
    Ok(sum / indices.len() as f64)
}

/// Compare analytic gradients against central finite differences for every
/// parameter and return the worst relative error
/// `|a - b| / max(|a|, |b|, 1e-12)`.
pub fn grad_check(net: &Network, sample: &Sample, eps: f64) -> Result<f64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let (_, cache) = forward(net, &sample.input)?;
    let analytic = backward(net, &cache, &sample.target)?;

    let mut work = net.clone();
    let mut worst = 0.0f64;
    for l in 0..net.layers.len() {
        for k in 0..net.layers[l].weights.len() {
            let a = analytic.layers[l].d_weights[k];
            let n = central_difference(&mut work, sample, eps, |w| &mut w.layers[l].weights[k])?;
            worst = worst.max(relative_error(a, n));
        }
        for k in 0..net.layers[l].biases.len() {
            let a = analytic.layers[l].d_biases[k];
            let n = central_difference(&mut work, sample, eps, |w| &mut w.layers[l].biases[k])?;
            worst = worst.max(relative_error(a, n));
        }
    }
    Ok(worst)
}

fn central_difference(
    net: &mut Network,
    sample: &Sample,
    eps: f64,
    mut param: impl FnMut(&mut Network) -> &mut f64,
) -> Result<f64> {
    let original = *param(net);
    *param(net) = original + eps;
    let plus = sample_loss(net, sample)?;
    *param(net) = original - eps;
    let minus = sample_loss(net, sample)?;
    *param(net) = original;
    Ok((plus - minus) / (2.0 * eps))
}

fn sample_loss(net: &Network, sample: &Sample) -> Result<f64> {
    let (pred, _) = forward(net, &sample.input)?;
    mse_loss(&pred, &sample.target)
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

#[cfg(test)]
mod tests {
    // Frozen literals are kept digit-for-digit as the oracle printed them.
    #![allow(clippy::excessive_precision)]

    use super::*;

    type LayerSpec = (Vec<f64>, Vec<f64>, usize, usize, Activation);

    fn tiny_net(weights: Vec<LayerSpec>) -> Network {
        Network {
            layers: weights
                .into_iter()
                .map(|(w, b, rows, cols, activation)| Layer {
                    rows,
                    cols,
                    weights: w,
                    biases: b,
                    activation,
                })
                .collect(),
        }
    }

    /// The fixed 2-2-1 network used by the independent scripted oracle.
    fn oracle_net() -> Network {
        tiny_net(vec![
            (
                vec![0.15, -0.2, 0.4, 0.55],
                vec![0.05, -0.1],
                2,
                2,
                Activation::Relu,
            ),
            (vec![-0.3, 0.7], vec![0.2], 1, 2, Activation::Linear),
        ])
    }

    #[test]
    fn init_shapes_predictive_topology() {
        let net = init_network(&NetworkConfig::new(3, 4, 1)).unwrap();
        let shapes: Vec<(usize, usize)> = net.layers.iter().map(|l| (l.rows, l.cols)).collect();
        assert_eq!(shapes, [(14, 3), (14, 14), (14, 14), (14, 14), (4, 14)]);
        assert!(net.layers.iter().rev().skip(1).all(|l| l.activation == Activation::Relu));
        assert_eq!(net.layers.last().unwrap().activation, Activation::Linear);
        assert!(net.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn init_shapes_design_topology() {
        let net = init_network(&NetworkConfig::new(4, 3, 1)).unwrap();
        assert_eq!(net.layers[0].cols, 4);
        let last = net.layers.last().unwrap();
        assert_eq!((last.rows, last.cols), (3, 14));
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_network(&NetworkConfig::new(3, 4, 99)).unwrap();
        let b = init_network(&NetworkConfig::new(3, 4, 99)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = init_network(&NetworkConfig::new(3, 4, 100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_rejects_zero_dimension() {
        assert!(init_network(&NetworkConfig::new(0, 4, 1)).is_err());
        let mut cfg = NetworkConfig::new(3, 4, 1);
        cfg.hidden_neurons = 0;
        assert!(init_network(&cfg).is_err());
    }

    #[test]
    fn init_weights_respect_glorot_limit() {
        let net = init_network(&NetworkConfig::new(3, 4, 5)).unwrap();
        for layer in &net.layers {
            let limit = (6.0 / (layer.rows + layer.cols) as f64).sqrt();
            assert!(layer.weights.iter().all(|w| w.abs() <= limit));
        }
    }

    #[test]
    fn parameter_count_formula() {
        for (input, output) in [(3, 4), (4, 3)] {
            let net = init_network(&NetworkConfig::new(input, output, 2)).unwrap();
            let expected = input * 14 + 14 + 3 * (14 * 14 + 14) + 14 * output + output;
            assert_eq!(net.parameter_count(), expected);
        }
    }

    #[test]
    fn forward_zero_weights_returns_bias() {
        let net = tiny_net(vec![
            (vec![0.0; 6], vec![0.0, 0.0], 2, 3, Activation::Relu),
            (vec![0.0, 0.0], vec![1.5], 1, 2, Activation::Linear),
        ]);
        let (y, _) = forward(&net, &[0.3, -0.7, 2.0]).unwrap();
        assert_eq!(y, vec![1.5]);
    }

    #[test]
    fn forward_relu_gating() {
        let net = tiny_net(vec![
            (vec![1.0], vec![0.0], 1, 1, Activation::Relu),
            (vec![1.0], vec![0.0], 1, 1, Activation::Linear),
        ]);
        assert_eq!(forward(&net, &[2.0]).unwrap().0, vec![2.0]);
        assert_eq!(forward(&net, &[-3.0]).unwrap().0, vec![0.0]);
    }

    // Frozen from the independent scripted oracle.
    #[test]
    fn forward_matches_scripted_oracle() {
        let (y, _) = forward(&oracle_net(), &[0.6, -0.4]).unwrap();
        assert!((y[0] - 0.13400000000000001).abs() < 1e-15, "got {}", y[0]);
    }

    #[test]
    fn forward_rejects_bad_input_length() {
        assert!(forward(&oracle_net(), &[1.0]).is_err());
    }

    #[test]
    fn mse_loss_cases() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(mse_loss(&[3.0], &[1.0]).unwrap(), 4.0);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn backward_zero_at_optimum() {
        let net = oracle_net();
        let (y, cache) = forward(&net, &[0.6, -0.4]).unwrap();
        let grads = backward(&net, &cache, &y).unwrap();
        for layer in &grads.layers {
            assert!(layer.d_weights.iter().all(|&g| g == 0.0));
            assert!(layer.d_biases.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn backward_single_parameter_linear() {
        // y = w x with w = 2: dL/dw at x = 1, target 0 is 2 * (w x) * x = 4.
        let net = tiny_net(vec![(vec![2.0], vec![0.0], 1, 1, Activation::Linear)]);
        let (_, cache) = forward(&net, &[1.0]).unwrap();
        let grads = backward(&net, &cache, &[0.0]).unwrap();
        assert_eq!(grads.layers[0].d_weights[0], 4.0);
    }

    #[test]
    fn backward_matches_scripted_oracle() {
        let net = oracle_net();
        let (_, cache) = forward(&net, &[0.6, -0.4]).unwrap();
        let g = backward(&net, &cache, &[0.25]).unwrap();
        let expect_w1 = [0.041759999999999999, -0.02784, 0.0, 0.0];
        for (a, e) in g.layers[0].d_weights.iter().zip(expect_w1) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!((g.layers[1].d_weights[0] - -0.051040000000000002).abs() < 1e-15);
        assert!((g.layers[1].d_biases[0] - -0.23199999999999998).abs() < 1e-15);
    }

    #[test]
    fn backward_rejects_mismatched_cache() {
        let net = oracle_net();
        let other = tiny_net(vec![(vec![1.0, 1.0, 1.0], vec![0.0], 1, 3, Activation::Linear)]);
        let (_, cache) = forward(&other, &[1.0, 2.0, 3.0]).unwrap();
        assert!(backward(&net, &cache, &[0.0]).is_err());
        let (_, cache) = forward(&net, &[0.6, -0.4]).unwrap();
        assert!(backward(&net, &cache, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn adam_zero_gradient_leaves_parameters() {
        let mut net = oracle_net();
        let before = net.clone();
        let mut state = OptimizerState::new(&net, OptimizerKind::Adam);
        let grads = Gradients::zeros_like(&net);
        optimizer_step(&mut state, &mut net, &grads, 0.001).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_first_step_magnitude_is_learning_rate() {
        let mut net = tiny_net(vec![(vec![1.0], vec![0.0], 1, 1, Activation::Linear)]);
        let mut state = OptimizerState::new(&net, OptimizerKind::Adam);
        let mut grads = Gradients::zeros_like(&net);
        grads.layers[0].d_weights[0] = 0.37;
        optimizer_step(&mut state, &mut net, &grads, 0.001).unwrap();
        let moved = 1.0 - net.layers[0].weights[0];
        assert!((moved - 0.001).abs() < 1e-9, "moved {moved}");
    }

    #[test]
    fn adam_optimizes_scalar_quadratic() {
        // 200 steps on f(w) = (w - 3)^2 from w = 0 with lr = 0.1.
        let mut net = tiny_net(vec![(vec![0.0], vec![0.0], 1, 1, Activation::Linear)]);
        let mut state = OptimizerState::new(&net, OptimizerKind::Adam);
        for _ in 0..200 {
            let w = net.layers[0].weights[0];
            let mut grads = Gradients::zeros_like(&net);
            grads.layers[0].d_weights[0] = 2.0 * (w - 3.0);
            optimizer_step(&mut state, &mut net, &grads, 0.1).unwrap();
        }
        let w = net.layers[0].weights[0];
        assert!((w - 3.0).abs() < 0.1, "w = {w}");
        // Independent scripted oracle for the same iteration.
        assert!((w - 3.0000530297387056).abs() < 1e-6, "w = {w}");
    }

    #[test]
    fn adam_matches_scripted_oracle_one_step() {
        let mut net = oracle_net();
        let (_, cache) = forward(&net, &[0.6, -0.4]).unwrap();
        let grads = backward(&net, &cache, &[0.25]).unwrap();
        let mut state = OptimizerState::new(&net, OptimizerKind::Adam);
        optimizer_step(&mut state, &mut net, &grads, 0.001).unwrap();

        let expect_w1 = [
            0.14900000023946353,
            -0.19900000035919529,
            0.40000000000000002,
            0.55000000000000004,
        ];
        for (p, e) in net.layers[0].weights.iter().zip(expect_w1) {
            assert!((p - e).abs() < 1e-12, "{p} vs {e}");
        }
        let expect_b1 = [0.049000000143678141, -0.1];
        for (p, e) in net.layers[0].biases.iter().zip(expect_b1) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((net.layers[1].weights[0] - -0.29900000019592471).abs() < 1e-12);
        assert!((net.layers[1].weights[1] - 0.7).abs() < 1e-12);
        assert!((net.layers[1].biases[0] - 0.20099999995689657).abs() < 1e-12);

        let (y, _) = forward(&net, &[0.6, -0.4]).unwrap();
        assert!((y[0] - 0.1358179997853057).abs() < 1e-12);
    }

    #[test]
    fn optimizer_step_rejects_shape_mismatch() {
        let mut net = oracle_net();
        let other = tiny_net(vec![(vec![1.0], vec![0.0], 1, 1, Activation::Linear)]);
        let grads = Gradients::zeros_like(&other);
        let mut state = OptimizerState::new(&net, OptimizerKind::Adam);
        assert!(optimizer_step(&mut state, &mut net, &grads, 0.001).is_err());
    }

    #[test]
    fn sgd_step_is_plain_descent() {
        let mut net = tiny_net(vec![(vec![1.0], vec![0.5], 1, 1, Activation::Linear)]);
        let mut state = OptimizerState::new(&net, OptimizerKind::Sgd);
        let mut grads = Gradients::zeros_like(&net);
        grads.layers[0].d_weights[0] = 2.0;
        grads.layers[0].d_biases[0] = -1.0;
        optimizer_step(&mut state, &mut net, &grads, 0.1).unwrap();
        assert!((net.layers[0].weights[0] - 0.8).abs() < 1e-15);
        assert!((net.layers[0].biases[0] - 0.6).abs() < 1e-15);
    }

    fn linear_samples(n: usize) -> Vec<Sample> {
        // y = 2x + 1 on [-1, 1]
        (0..n)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                Sample { input: vec![x], target: vec![2.0 * x + 1.0] }
            })
            .collect()
    }

    #[test]
    fn train_curve_has_one_entry_per_epoch() {
        let mut cfg = NetworkConfig::new(1, 1, 7);
        cfg.hidden_layers = 2;
        cfg.hidden_neurons = 8;
        let mut net = init_network(&cfg).unwrap();
        let curve = train(&mut net, &linear_samples(64), &cfg, 0.2).unwrap();
        assert_eq!(curve.len(), 32);
        assert_eq!(curve.validation.len(), 32);
        assert!(curve.training.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn train_converges_on_linear_target() {
        let mut cfg = NetworkConfig::new(1, 1, 3);
        cfg.hidden_layers = 2;
        cfg.hidden_neurons = 8;
        let mut net = init_network(&cfg).unwrap();
        let curve = train(&mut net, &linear_samples(64), &cfg, 0.2).unwrap();
        assert!(
            curve.training.last().unwrap() < curve.training.first().unwrap(),
            "loss did not decrease: {:?}",
            curve.training
        );
    }

    #[test]
    fn train_oversized_batch_equals_exact_batch() {
        let samples = linear_samples(40);
        let mut cfg = NetworkConfig::new(1, 1, 5);
        cfg.hidden_layers = 1;
        cfg.hidden_neurons = 4;
        cfg.epochs = 6;

        // 40 samples at val 0.2 leaves 32 training records.
        let mut exact_cfg = cfg.clone();
        exact_cfg.batch_size = 32;
        let mut net_exact = init_network(&exact_cfg).unwrap();
        train(&mut net_exact, &samples, &exact_cfg, 0.2).unwrap();

        let mut big_cfg = cfg.clone();
        big_cfg.batch_size = 1000;
        let mut net_big = init_network(&big_cfg).unwrap();
        train(&mut net_big, &samples, &big_cfg, 0.2).unwrap();

        assert_eq!(net_exact, net_big);
    }

    #[test]
    fn train_is_deterministic() {
        let samples = linear_samples(50);
        let cfg = {
            let mut c = NetworkConfig::new(1, 1, 11);
            c.hidden_layers = 2;
            c.hidden_neurons = 6;
            c.epochs = 5;
            c
        };
        let mut a = init_network(&cfg).unwrap();
        let curve_a = train(&mut a, &samples, &cfg, 0.2).unwrap();
        let mut b = init_network(&cfg).unwrap();
        let curve_b = train(&mut b, &samples, &cfg, 0.2).unwrap();
        assert_eq!(a, b);
        assert_eq!(curve_a, curve_b);
    }

    #[test]
    fn train_rejects_bad_arguments() {
        let cfg = NetworkConfig::new(1, 1, 1);
        let mut net = init_network(&cfg).unwrap();
        assert!(train(&mut net, &linear_samples(1), &cfg, 0.2).is_err());
        assert!(train(&mut net, &linear_samples(10), &cfg, 0.0).is_err());
        assert!(train(&mut net, &linear_samples(10), &cfg, 1.0).is_err());
    }

    #[test]
    fn train_aborts_on_non_finite_loss() {
        let mut cfg = NetworkConfig::new(1, 1, 2);
        cfg.learning_rate = 1e300;
        cfg.epochs = 3;
        let mut net = init_network(&cfg).unwrap();
        match train(&mut net, &linear_samples(20), &cfg, 0.2) {
            Err(Error::NonFiniteLoss { epoch }) => assert!(epoch >= 1),
            other => panic!("expected NonFiniteLoss, got {other:?}"),
        }
    }

    #[test]
    fn grad_check_linear_network_is_near_exact() {
        let net = tiny_net(vec![(vec![2.0], vec![0.3], 1, 1, Activation::Linear)]);
        let sample = Sample { input: vec![1.3], target: vec![0.2] };
        let err = grad_check(&net, &sample, 1e-6).unwrap();
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn grad_check_default_topology() {
        let cfg = NetworkConfig::new(3, 4, 123);
        let net = init_network(&cfg).unwrap();
        let mut rng = SplitMix64::new(321);
        let sample = Sample {
            input: (0..3).map(|_| rng.standard_normal()).collect(),
            target: (0..4).map(|_| rng.standard_normal()).collect(),
        };
        let err = grad_check(&net, &sample, 1e-6).unwrap();
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn grad_check_rejects_bad_eps() {
        let net = oracle_net();
        let sample = Sample { input: vec![0.6, -0.4], target: vec![0.25] };
        assert!(grad_check(&net, &sample, 0.0).is_err());
    }

    // A sample placed exactly on a ReLU kink (pre-activation exactly 0) is
    // outside the finite-difference tolerance claim: the two-sided quotient
    // straddles the subgradient. Documented here rather than asserted tight.
    #[test]
    fn grad_check_on_relu_kink_is_excluded_from_tolerance() {
        let net = tiny_net(vec![
            (vec![1.0], vec![0.0], 1, 1, Activation::Relu),
            (vec![1.0], vec![0.0], 1, 1, Activation::Linear),
        ]);
        // input 0 puts the hidden pre-activation exactly at the kink
        let sample = Sample { input: vec![0.0], target: vec![1.0] };
        let err = grad_check(&net, &sample, 1e-6).unwrap();
        assert!(err.is_finite());
    }
}
