//! Dense softmax networks trained by gradient descent on cross-entropy.
//!
//! Multinomial logistic regression is the network with no hidden layer; the
//! MLP has one ReLU hidden layer. Both share the forward pass, the analytic
//! gradient and the training loop.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GdParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    #[serde(with = "crate::numfmt::vec")]
    pub weights: Vec<f64>,
    #[serde(with = "crate::numfmt::vec")]
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Network {
    pub layers: Vec<Dense>,
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln()
}

impl Network {
    /// Layer sizes `[inputs, hidden..., outputs]`, all parameters zero.
    pub fn zeros(sizes: &[usize]) -> Self {
        Network {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn uniform(sizes: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut net = Network::zeros(sizes);
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.inputs as f64).sqrt();
            layer
                .weights
                .iter_mut()
                .for_each(|w| *w = rng.random_range(-bound..=bound));
        }
        net
    }

    /// Layer outputs: ReLU activations for hidden layers, logits for the last.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let input = if l == 0 { x } else { &acts[l - 1] };
            let mut out = layer.apply(input);
            if l < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(self.forward(x).last().expect("network has layers"))
    }

    fn penalty(&self, l2: f64) -> f64 {
        if l2 == 0.0 {
            return 0.0;
        }
        0.5 * l2
            * self
                .layers
                .iter()
                .flat_map(|l| &l.weights)
                .map(|w| w * w)
                .sum::<f64>()
    }

    /// Mean cross-entropy plus `l2 / 2 * |W|^2` over weight matrices.
    pub fn loss(&self, xs: &[&[f64]], ys: &[usize], l2: f64) -> f64 {
        let ce: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let z = self.forward(x).pop().expect("network has layers");
                log_sum_exp(&z) - z[*y]
            })
            .sum();
        ce / xs.len() as f64 + self.penalty(l2)
    }

    /// Loss and its exact gradient, returned in the shape of the network.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[usize], l2: f64) -> (f64, Network) {
        let mut grad = Network {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        };
        let mut ce = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let acts = self.forward(x);
            let logits = acts.last().expect("network has layers");
            ce += log_sum_exp(logits) - logits[y];
            let mut delta = softmax(logits);
            delta[y] -= 1.0;
            for l in (0..self.layers.len()).rev() {
                let input: &[f64] = if l == 0 { x } else { &acts[l - 1] };
                let g = &mut grad.layers[l];
                for (o, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    g.bias[o] += d;
                    let row = &mut g.weights[o * g.inputs..(o + 1) * g.inputs];
                    row.iter_mut().zip(input).for_each(|(gw, v)| *gw += d * v);
                }
                if l > 0 {
                    let layer = &self.layers[l];
                    let mut prev = vec![0.0; layer.inputs];
                    for (o, d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                    }
                    prev.iter_mut().zip(input).for_each(|(p, a)| {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    });
                    delta = prev;
                }
            }
        }
        let n = xs.len() as f64;
        for (g, layer) in grad.layers.iter_mut().zip(&self.layers) {
            g.weights
                .iter_mut()
                .zip(&layer.weights)
                .for_each(|(gw, w)| *gw = *gw / n + l2 * w);
            g.bias.iter_mut().for_each(|gb| *gb /= n);
        }
        (ce / n + self.penalty(l2), grad)
    }

    fn step(&mut self, grad: &Network, lr: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grad.layers) {
            layer.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= lr * d);
            layer.bias.iter_mut().zip(&g.bias).for_each(|(b, d)| *b -= lr * d);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn parameter_mut(&mut self, mut index: usize) -> &mut f64 {
        for layer in &mut self.layers {
            if index < layer.weights.len() {
                return &mut layer.weights[index];
            }
            index -= layer.weights.len();
            if index < layer.bias.len() {
                return &mut layer.bias[index];
            }
            index -= layer.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn parameter(&self, mut index: usize) -> f64 {
        for layer in &self.layers {
            if index < layer.weights.len() {
                return layer.weights[index];
            }
            index -= layer.weights.len();
            if index < layer.bias.len() {
                return layer.bias[index];
            }
            index -= layer.bias.len();
        }
        panic!("parameter index out of range")
    }
}

/// Loss trace and stopping point of a gradient-descent run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs_run: usize,
    /// Loss at the start of every epoch, followed by the final loss.
    #[serde(with = "crate::numfmt::vec")]
    pub loss_trace: Vec<f64>,
    pub stopped_on_plateau: bool,
}

/// Runs gradient descent in place and returns the loss trace.
///
/// Full batch unless `params.batch_size` is smaller than the sample count, in
/// which case each epoch visits a seeded shuffle in mini-batches and the trace
/// records the full-batch loss at epoch boundaries.
pub(crate) fn train(
    net: &mut Network,
    xs: &[&[f64]],
    ys: &[usize],
    params: &GdParams,
    rng: &mut ChaCha8Rng,
) -> TrainingLog {
    let n = xs.len();
    let batch = params.batch_size.filter(|b| *b < n);
    let mut log = TrainingLog::default();
    let mut stall = 0;
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..params.epochs {
        let loss = match batch {
            None => {
                let (loss, grad) = net.loss_and_gradient(xs, ys, params.l2);
                if plateau(&log.loss_trace, loss, params, &mut stall) {
                    log.loss_trace.push(loss);
                    log.stopped_on_plateau = true;
                    return log;
                }
                net.step(&grad, params.learning_rate);
                loss
            }
            Some(b) => {
                let loss = net.loss(xs, ys, params.l2);
                if plateau(&log.loss_trace, loss, params, &mut stall) {
                    log.loss_trace.push(loss);
                    log.stopped_on_plateau = true;
                    return log;
                }
                order.shuffle(rng);
                for chunk in order.chunks(b) {
                    let bx: Vec<&[f64]> = chunk.iter().map(|i| xs[*i]).collect();
                    let by: Vec<usize> = chunk.iter().map(|i| ys[*i]).collect();
                    let (_, grad) = net.loss_and_gradient(&bx, &by, params.l2);
                    net.step(&grad, params.learning_rate);
                }
                loss
            }
        };
        log.loss_trace.push(loss);
        log.epochs_run = epoch + 1;
    }
    log.loss_trace.push(net.loss(xs, ys, params.l2));
    log
}

fn plateau(trace: &[f64], loss: f64, params: &GdParams, stall: &mut usize) -> bool {
    if let Some(prev) = trace.last() {
        if (prev - loss).abs() < params.plateau_tol {
            *stall += 1;
        } else {
            *stall = 0;
        }
    }
    *stall >= params.plateau_patience
}

/// Central-difference check of [`Network::loss_and_gradient`].
pub(crate) fn max_relative_gradient_error(net: &mut Network, xs: &[&[f64]], ys: &[usize], l2: f64, h: f64) -> f64 {
    let (_, grad) = net.loss_and_gradient(xs, ys, l2);
    let mut worst: f64 = 0.0;
    for i in 0..net.parameter_count() {
        let original = net.parameter(i);
        *net.parameter_mut(i) = original + h;
        let plus = net.loss(xs, ys, l2);
        *net.parameter_mut(i) = original - h;
        let minus = net.loss(xs, ys, l2);
        *net.parameter_mut(i) = original;
        let numeric = (plus - minus) / (2.0 * h);
        let analytic = grad.parameter(i);
        let scale = analytic.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
        worst = worst.max((analytic - numeric).abs() / scale);
    }
    worst
}

/// Gradients smaller than this are compared in absolute terms.
pub(crate) const GRADIENT_FLOOR: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn zero_network_has_log_k_loss() {
        let net = Network::zeros(&[3, 2]);
        let xs: Vec<&[f64]> = vec![&[1.0, 2.0, 3.0], &[-1.0, 0.5, 0.0]];
        assert!((net.loss(&xs, &[0, 1], 0.0) - 2f64.ln()).abs() < 1e-15);
        let net = Network::zeros(&[3, 5]);
        assert!((net.loss(&xs, &[0, 4], 0.0) - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn softmax_is_stable() {
        let p = softmax(&[1000.0, 1000.0, -1000.0]);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seed::rng(3);
        let mut net = Network::uniform(&[4, 6, 3], &mut rng);
        for layer in &mut net.layers {
            layer.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
        }
        let data: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let xs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let ys = [0, 1, 2, 0, 1, 2, 2];
        let err = max_relative_gradient_error(&mut net, &xs, &ys, 1e-3, 1e-5);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn parameter_indexing_covers_everything() {
        let mut net = Network::zeros(&[2, 3, 2]);
        let n = net.parameter_count();
        assert_eq!(n, 2 * 3 + 3 + 3 * 2 + 2);
        for i in 0..n {
            *net.parameter_mut(i) = i as f64;
        }
        for i in 0..n {
            assert_eq!(net.parameter(i), i as f64);
        }
        assert_eq!(net.layers[1].bias, vec![15.0, 16.0]);
    }
}
