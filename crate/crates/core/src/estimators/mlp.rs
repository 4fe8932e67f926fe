//! Fully connected regressor with rectifier hidden units, trained by Adam on
//! mean squared error.
//!
//! Inputs and targets are z-scored with training-set statistics stored in
//! the model, so callers always work in physical units.

use rand::Rng;

use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// Per-dimension affine normalisation `(x - mean) / std`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Fits mean and population standard deviation; constant dimensions get
    /// unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

/// Dense layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in self.weights.chunks_exact(self.inputs).enumerate() {
            out[o] = self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub input_scale: Standardizer,
    pub output_scale: Standardizer,
    /// Final training MSE in target units; `None` for hand-built models.
    pub training_loss: Option<f64>,
}

/// Adam and stopping settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    /// Stop when the best loss improved by less than `min_improvement`
    /// over this many epochs.
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 2000,
            patience: 100,
            min_improvement: 1e-8,
        }
    }
}

impl MlpModel {
    /// Model with all parameters zero and identity scaling.
    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::domain(format!(
                "invalid layer dimensions {layer_dims:?}"
            )));
        }
        let layers = layer_dims
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            layers,
            activation: Activation::Relu,
            input_scale: Standardizer::identity(layer_dims[0]),
            output_scale: Standardizer::identity(*layer_dims.last().unwrap()),
            training_loss: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn is_trained(&self) -> bool {
        self.training_loss.is_some()
    }

    /// Checks that dimensions chain and every parameter is finite.
    pub fn validate(&self) -> Result<()> {
        let dims_ok = self.layer_dims.len() == self.layers.len() + 1
            && self.layers.iter().enumerate().all(|(i, l)| {
                l.inputs == self.layer_dims[i]
                    && l.outputs == self.layer_dims[i + 1]
                    && l.weights.len() == l.inputs * l.outputs
                    && l.biases.len() == l.outputs
            })
            && self.input_scale.dim() == self.input_dim()
            && self.output_scale.dim() == self.output_dim();
        if !dims_ok {
            return Err(Error::domain("model dimensions do not chain"));
        }
        if !self.params().iter().all(|p| p.is_finite()) {
            return Err(Error::domain("model has non-finite parameters"));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::domain("parameter count mismatch"));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let w = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + w]);
            at += w;
            let b = l.biases.len();
            l.biases.copy_from_slice(&params[at..at + b]);
            at += b;
        }
        Ok(())
    }

    /// Pre-activations of every layer for a standardized input.
    fn pre_activations(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = z.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; l.outputs];
            l.affine(&act, &mut out);
            act = if i + 1 < self.layers.len() {
                out.iter().map(|v| self.activation.apply(*v)).collect()
            } else {
                out.clone()
            };
            pre.push(out);
        }
        pre
    }

    /// Prediction in target units.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::domain(format!(
                "model expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("non-finite model input"));
        }
        let pre = self.pre_activations(&self.input_scale.forward(x));
        Ok(self.output_scale.inverse(pre.last().unwrap()))
    }

    /// Rectifier on/off pattern over a batch; gradient checks use it to
    /// skip perturbations that cross a kink.
    pub fn activation_pattern(&self, xs: &[Vec<f64>]) -> Vec<bool> {
        let hidden = self.layers.len() - 1;
        xs.iter()
            .flat_map(|x| {
                let pre = self.pre_activations(&self.input_scale.forward(x));
                pre.into_iter().take(hidden).flatten().map(|v| v > 0.0)
            })
            .collect()
    }

    /// Mean squared error in standardized target space and its gradient
    /// with respect to [`params`](Self::params).
    pub fn loss_gradient(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let zs: Vec<Vec<f64>> = xs.iter().map(|x| self.input_scale.forward(x)).collect();
        let ts: Vec<Vec<f64>> = ys.iter().map(|y| self.output_scale.forward(y)).collect();
        self.loss_gradient_scaled(&zs, &ts)
    }

    fn loss_gradient_scaled(&self, zs: &[Vec<f64>], ts: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let n_layers = self.layers.len();
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer::zeros(l.inputs, l.outputs))
            .collect();
        let norm = (zs.len() * self.output_dim()) as f64;
        let mut loss = 0.0;
        for (z, t) in zs.iter().zip(ts) {
            let pre = self.pre_activations(z);
            let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
            acts.push(z.clone());
            for p in pre.iter().take(n_layers - 1) {
                acts.push(p.iter().map(|v| self.activation.apply(*v)).collect());
            }
            let out = &pre[n_layers - 1];
            let mut delta: Vec<f64> = out
                .iter()
                .zip(t)
                .map(|(o, y)| {
                    loss += (o - y) * (o - y);
                    2.0 * (o - y) / norm
                })
                .collect();
            for li in (0..n_layers).rev() {
                let layer = &self.layers[li];
                let g = &mut grads[li];
                let a = &acts[li];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (w, v) in row.iter_mut().zip(a) {
                        *w += d * v;
                    }
                }
                if li > 0 {
                    let mut back = vec![0.0; layer.inputs];
                    for (o, d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (b, w) in back.iter_mut().zip(row) {
                            *b += d * w;
                        }
                    }
                    delta = back
                        .iter()
                        .zip(&pre[li - 1])
                        .map(|(b, p)| b * self.activation.derivative(*p))
                        .collect();
                }
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for g in grads {
            flat.extend(g.weights);
            flat.extend(g.biases);
        }
        (loss / norm, flat)
    }
}

fn check_data(xs: &[Vec<f64>], ys: &[Vec<f64>], layer_dims: &[usize]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::domain("no training data"));
    }
    if xs.len() < 2 {
        return Err(Error::domain("training needs at least two samples"));
    }
    if xs.len() != ys.len() {
        return Err(Error::domain("input and target counts differ"));
    }
    let (din, dout) = (layer_dims[0], *layer_dims.last().unwrap());
    if xs.iter().any(|x| x.len() != din) || ys.iter().any(|y| y.len() != dout) {
        return Err(Error::domain(
            "training data dimensions do not match the architecture",
        ));
    }
    if xs.iter().chain(ys).flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain("training data has non-finite values"));
    }
    Ok(())
}

/// Trains a network of the given shape on `(xs, ys)`.
///
/// Full-batch Adam; weights start He-uniform and biases at zero. The result
/// depends only on the data, the settings and `seed`.
pub fn mlp_train(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    layer_dims: &[usize],
    config: &TrainConfig,
    seed: u64,
) -> Result<MlpModel> {
    let mut model = MlpModel::zeros(layer_dims)?;
    check_data(xs, ys, layer_dims)?;
    model.input_scale = Standardizer::fit(xs);
    model.output_scale = Standardizer::fit(ys);

    let mut rng = seed::rng(seed, &[seed::tag("mlp-init")]);
    for l in &mut model.layers {
        let bound = (6.0 / l.inputs as f64).sqrt();
        l.weights
            .iter_mut()
            .for_each(|w| *w = rng.gen_range(-bound..bound));
    }

    let zs: Vec<Vec<f64>> = xs.iter().map(|x| model.input_scale.forward(x)).collect();
    let ts: Vec<Vec<f64>> = ys.iter().map(|y| model.output_scale.forward(y)).collect();
    let mut params = model.params();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut best = f64::INFINITY;
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let (loss, grad) = model.loss_gradient_scaled(&zs, &ts);
        best = best.min(loss);
        history.push(best);
        if epoch > config.patience
            && history[epoch - 1 - config.patience] - best < config.min_improvement
        {
            break;
        }
        let bc1 = 1.0 - config.beta1.powi(epoch as i32);
        let bc2 = 1.0 - config.beta2.powi(epoch as i32);
        for i in 0..params.len() {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
            let step = (m[i] / bc1) / ((v[i] / bc2).sqrt() + config.epsilon);
            params[i] -= config.learning_rate * step;
        }
        model.set_params(&params)?;
    }

    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let p = model.forward(x)?;
        sse += p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    model.training_loss = Some(sse / (xs.len() * model.output_dim()) as f64);
    model.validate()?;
    Ok(model)
}
