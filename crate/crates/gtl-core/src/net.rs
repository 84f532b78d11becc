//! Dense-network engine: initialization, forward pass, exact reverse-mode
//! gradients, and SGD with optional momentum.
//!
//! The engine is deliberately small: MLPs with one hidden activation, a
//! softmax cross-entropy head or a per-bit sigmoid BCE head, and full 64-bit
//! arithmetic so gradient checks and bit-exact determinism tests are
//! practical. A gradient mask, when used, is applied to the raw gradients
//! *before* momentum accumulation (see [`crate::guidance::apply_guidance`]),
//! so masked dimensions never leak into velocity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::rng::rng_from_seed;

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn forward(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => libm::tanh(z),
        }
    }

    /// Derivative expressed in terms of the activation output.
    #[inline]
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

/// Output head: softmax + cross-entropy, or per-bit sigmoid + BCE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputHead {
    SoftmaxCe,
    SigmoidBce,
}

impl OutputHead {
    pub fn name(self) -> &'static str {
        match self {
            OutputHead::SoftmaxCe => "softmax_ce",
            OutputHead::SigmoidBce => "sigmoid_bce",
        }
    }
}

/// Architecture plus init seed. Same spec (including seed) always yields a
/// bit-identical initial [`ParamSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    /// Input dimension first, output dimension last; length >= 2.
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_head: OutputHead,
    pub init_seed: u64,
}

impl NetworkSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden_activation: Activation,
        output_head: OutputHead,
        init_seed: u64,
    ) -> Result<Self> {
        let spec = NetworkSpec {
            layer_sizes,
            hidden_activation,
            output_head,
            init_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "layer_sizes needs at least input and output dimensions, got {:?}",
                self.layer_sizes
            )));
        }
        if let Some(pos) = self.layer_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Config(format!("layer_sizes[{pos}] is 0")));
        }
        Ok(())
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weight layers.
    #[inline]
    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Same architecture with the output layer resized (head replacement) and
    /// a new init seed.
    pub fn with_output_dim(&self, output_dim: usize, init_seed: u64) -> Result<NetworkSpec> {
        let mut sizes = self.layer_sizes.clone();
        *sizes.last_mut().unwrap() = output_dim;
        NetworkSpec::new(sizes, self.hidden_activation, self.output_head, init_seed)
    }
}

/// One dense layer's parameters. Weights have shape `fan_in x fan_out`
/// (row-major), biases have length `fan_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        LayerParams {
            weights: Matrix::zeros(fan_in, fan_out),
            biases: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.values().len() + self.biases.len()
    }
}

/// Flat, ordered collection of per-layer weights and biases — the universal
/// currency between training, scouting, and guidance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub layers: Vec<LayerParams>,
}

/// Gradients (or any other parameter-shaped buffer, e.g. momentum velocity):
/// structurally identical to the [`ParamSet`] they were computed for.
pub type GradSet = ParamSet;

impl ParamSet {
    /// Per-layer `(fan_in, fan_out)` pairs.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .map(|l| (l.fan_in(), l.fan_out()))
            .collect()
    }

    pub fn congruent_with(&self, other: &ParamSet) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.fan_in() == b.fan_in()
                    && a.fan_out() == b.fan_out()
                    && a.biases.len() == b.biases.len()
            })
    }

    pub fn zeros_like(&self) -> ParamSet {
        self.map(|_| 0.0)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerParams::param_count).sum()
    }

    /// All values in a fixed order: per layer, weights (row-major) then biases.
    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.values().iter().chain(&l.biases).copied())
    }

    pub fn all_finite(&self) -> bool {
        self.iter_values().all(|v| v.is_finite())
    }

    /// Exact bit-for-bit equality.
    pub fn bits_eq(&self, other: &ParamSet) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.weights.bits_eq(&b.weights)
                    && a.biases.len() == b.biases.len()
                    && a.biases
                        .iter()
                        .zip(&b.biases)
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }

    /// Fraction of parameters that moved more than `eps` from `reference`.
    pub fn changed_fraction(&self, reference: &ParamSet, eps: f64) -> Result<f64> {
        if !self.congruent_with(reference) {
            return Err(Error::Shape(format!(
                "changed_fraction shapes differ: {:?} vs {:?}",
                self.shape(),
                reference.shape()
            )));
        }
        let total = self.param_count();
        let changed = self
            .iter_values()
            .zip(reference.iter_values())
            .filter(|(a, b)| abs(a - b) > eps)
            .count();
        Ok(changed as f64 / total as f64)
    }

    /// Elementwise transform into a new set.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ParamSet {
        let mut out = self.clone();
        for layer in &mut out.layers {
            for w in layer.weights.values_mut() {
                *w = f(*w);
            }
            for b in layer.biases.iter_mut() {
                *b = f(*b);
            }
        }
        out
    }

    /// Elementwise combine into a new set, `f(self, other)` per parameter.
    pub fn zip_map(&self, other: &ParamSet, mut f: impl FnMut(f64, f64) -> f64) -> Result<ParamSet> {
        if !self.congruent_with(other) {
            return Err(Error::Shape(format!(
                "parameter shapes differ: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = self.clone();
        for (layer, other_layer) in out.layers.iter_mut().zip(&other.layers) {
            for (w, &o) in layer
                .weights
                .values_mut()
                .iter_mut()
                .zip(other_layer.weights.values())
            {
                *w = f(*w, o);
            }
            for (b, &o) in layer.biases.iter_mut().zip(&other_layer.biases) {
                *b = f(*b, o);
            }
        }
        Ok(out)
    }
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1 << 63))
}

/// One labeled batch: `inputs` is `batch_size x input_dim`, `targets` is
/// `batch_size x output_dim` (one-hot rows for the softmax head, bit vectors
/// for the sigmoid head).
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Matrix,
    pub targets: Matrix,
}

impl Batch {
    pub fn new(inputs: Matrix, targets: Matrix) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::Shape(format!(
                "batch has {} input rows but {} target rows",
                inputs.rows(),
                targets.rows()
            )));
        }
        if inputs.rows() == 0 {
            return Err(Error::Argument("batch is empty".into()));
        }
        Ok(Batch { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Batch with the given subset of rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Batch {
        let mut inputs = Matrix::zeros(indices.len(), self.inputs.cols());
        let mut targets = Matrix::zeros(indices.len(), self.targets.cols());
        for (out_r, &r) in indices.iter().enumerate() {
            inputs.row_mut(out_r).copy_from_slice(self.inputs.row(r));
            targets.row_mut(out_r).copy_from_slice(self.targets.row(r));
        }
        Batch { inputs, targets }
    }

    fn validate_for(&self, spec: &NetworkSpec) -> Result<()> {
        if self.inputs.cols() != spec.input_dim() {
            return Err(Error::Shape(format!(
                "batch input dim {} does not match network input dim {}",
                self.inputs.cols(),
                spec.input_dim()
            )));
        }
        if self.targets.cols() != spec.output_dim() {
            return Err(Error::Shape(format!(
                "batch target dim {} does not match network output dim {}",
                self.targets.cols(),
                spec.output_dim()
            )));
        }
        if spec.output_head == OutputHead::SoftmaxCe {
            for r in 0..self.targets.rows() {
                let row = self.targets.row(r);
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let valid = row.iter().all(|&v| v == 0.0 || v == 1.0);
                if !valid || ones != 1 {
                    return Err(Error::Argument(format!(
                        "softmax_ce target row {r} is not one-hot"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Glorot-style uniform initialization: weights from `uniform(-s, s)` with
/// `s = sqrt(6 / (fan_in + fan_out))`, biases zero. Deterministic in
/// `spec.init_seed`.
pub fn init_params(spec: &NetworkSpec) -> Result<ParamSet> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.init_seed);
    let mut layers = Vec::with_capacity(spec.n_layers());
    for w in spec.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        let dist = Uniform::new(-limit, limit);
        let mut layer = LayerParams::zeros(fan_in, fan_out);
        for v in layer.weights.values_mut() {
            *v = dist.sample(&mut rng);
        }
        layers.push(layer);
    }
    Ok(ParamSet { layers })
}

/// Activations captured during a forward pass. `activations[0]` is the input,
/// `activations[l]` the output of layer `l`; the last entry is the head
/// output (probabilities). `output_z` keeps the pre-head logits for stable
/// loss computation.
struct ForwardTrace {
    activations: Vec<Matrix>,
    output_z: Matrix,
}

fn check_finite(m: &Matrix, layer: usize, what: &str) -> Result<()> {
    if m.all_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "non-finite {what} in layer {layer}"
        )))
    }
}

fn run_forward(params: &ParamSet, spec: &NetworkSpec, inputs: &Matrix) -> Result<ForwardTrace> {
    spec.validate()?;
    if inputs.cols() != spec.input_dim() {
        return Err(Error::Shape(format!(
            "input dim {} does not match network input dim {}",
            inputs.cols(),
            spec.input_dim()
        )));
    }
    let expected: Vec<(usize, usize)> = spec
        .layer_sizes
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect();
    if params.shape() != expected {
        return Err(Error::Shape(format!(
            "parameter shape {:?} does not match spec {:?}",
            params.shape(),
            expected
        )));
    }

    let n_layers = params.layers.len();
    let mut activations = Vec::with_capacity(n_layers + 1);
    activations.push(inputs.clone());
    let mut output_z = None;

    for (l, layer) in params.layers.iter().enumerate() {
        let mut z = activations[l].matmul(&layer.weights);
        for r in 0..z.rows() {
            for (v, &b) in z.row_mut(r).iter_mut().zip(&layer.biases) {
                *v += b;
            }
        }
        check_finite(&z, l, "pre-activation")?;
        let is_output = l == n_layers - 1;
        let a = if is_output {
            output_z = Some(z.clone());
            apply_head(&z, spec.output_head)
        } else {
            let mut a = z;
            for v in a.values_mut() {
                *v = spec.hidden_activation.forward(*v);
            }
            a
        };
        check_finite(&a, l, "activation")?;
        activations.push(a);
    }

    Ok(ForwardTrace {
        activations,
        output_z: output_z.unwrap(),
    })
}

fn apply_head(z: &Matrix, head: OutputHead) -> Matrix {
    let mut out = z.clone();
    match head {
        OutputHead::SoftmaxCe => {
            for r in 0..out.rows() {
                let row = out.row_mut(r);
                let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let mut sum = 0.0;
                for v in row.iter_mut() {
                    *v = libm::exp(*v - max);
                    sum += *v;
                }
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
        OutputHead::SigmoidBce => {
            for v in out.values_mut() {
                *v = sigmoid(*v);
            }
        }
    }
    out
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-abs(z)))
}

/// Runs the network and returns the head output: row-stochastic for the
/// softmax head, elementwise in `(0,1)` for the sigmoid head.
pub fn forward(params: &ParamSet, spec: &NetworkSpec, inputs: &Matrix) -> Result<Matrix> {
    let trace = run_forward(params, spec, inputs)?;
    Ok(trace.activations.into_iter().last().unwrap())
}

/// Mean loss over batch rows from the pre-head logits.
fn loss_from_logits(z: &Matrix, targets: &Matrix, head: OutputHead) -> f64 {
    let batch = z.rows() as f64;
    match head {
        OutputHead::SoftmaxCe => {
            // Per row: log-sum-exp(z) - sum_j y_j z_j.
            let mut total = 0.0;
            for r in 0..z.rows() {
                let row = z.row(r);
                let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let lse = max
                    + libm::log(row.iter().map(|&v| libm::exp(v - max)).sum::<f64>());
                let dot: f64 = row.iter().zip(targets.row(r)).map(|(&v, &y)| v * y).sum();
                total += lse - dot;
            }
            total / batch
        }
        OutputHead::SigmoidBce => {
            // Per bit: softplus(z) - y*z; averaged over bits, then rows.
            let bits = z.cols() as f64;
            let mut total = 0.0;
            for (zv, yv) in z.values().iter().zip(targets.values()) {
                total += softplus(*zv) - yv * zv;
            }
            total / (batch * bits)
        }
    }
}

/// Computes the batch loss and its exact analytic gradients.
///
/// The loss is the mean over batch rows: cross-entropy for the softmax head,
/// mean per-bit binary cross-entropy for the sigmoid head.
pub fn loss_and_grad(params: &ParamSet, spec: &NetworkSpec, batch: &Batch) -> Result<(f64, GradSet)> {
    batch.validate_for(spec)?;
    let trace = run_forward(params, spec, &batch.inputs)?;
    let loss = loss_from_logits(&trace.output_z, &batch.targets, spec.output_head);
    if !loss.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite loss in layer {}",
            params.layers.len() - 1
        )));
    }

    let n_layers = params.layers.len();
    let batch_size = batch.len() as f64;
    let probs = &trace.activations[n_layers];

    // dL/dz at the output; both heads reduce to (p - y) over a shared scale.
    let scale = match spec.output_head {
        OutputHead::SoftmaxCe => 1.0 / batch_size,
        OutputHead::SigmoidBce => 1.0 / (batch_size * batch.targets.cols() as f64),
    };
    let mut d_z = Matrix::zeros(probs.rows(), probs.cols());
    for ((d, &p), &y) in d_z
        .values_mut()
        .iter_mut()
        .zip(probs.values())
        .zip(batch.targets.values())
    {
        *d = (p - y) * scale;
    }

    let mut grads = params.zeros_like();
    for l in (0..n_layers).rev() {
        let a_prev = &trace.activations[l];
        grads.layers[l].weights = a_prev.matmul_transpose_self(&d_z);
        for (b, c) in grads.layers[l].biases.iter_mut().zip(0..d_z.cols()) {
            *b = (0..d_z.rows()).map(|r| d_z.get(r, c)).sum();
        }
        check_finite(&grads.layers[l].weights, l, "weight gradient")?;
        if l > 0 {
            let mut d_a = d_z.matmul_transpose_other(&params.layers[l].weights);
            let a = &trace.activations[l];
            for (d, &av) in d_a.values_mut().iter_mut().zip(a.values()) {
                *d *= spec.hidden_activation.grad_from_output(av);
            }
            d_z = d_a;
        }
    }

    Ok((loss, grads))
}

/// Loss plus accuracy on `data`.
///
/// Softmax accuracy is the fraction of rows where `argmax(output)` equals
/// `argmax(target)`, ties broken by lowest index. Sigmoid accuracy is the
/// fraction of rows where every bit, thresholded strictly at 0.5, matches.
pub fn evaluate(params: &ParamSet, spec: &NetworkSpec, data: &Batch) -> Result<(f64, f64)> {
    if data.len() == 0 {
        return Err(Error::Argument("evaluate called with empty data".into()));
    }
    data.validate_for(spec)?;
    let trace = run_forward(params, spec, &data.inputs)?;
    let loss = loss_from_logits(&trace.output_z, &data.targets, spec.output_head);
    let outputs = &trace.activations[params.layers.len()];

    let mut correct = 0usize;
    for r in 0..outputs.rows() {
        let out_row = outputs.row(r);
        let tgt_row = data.targets.row(r);
        let ok = match spec.output_head {
            OutputHead::SoftmaxCe => argmax(out_row) == argmax(tgt_row),
            OutputHead::SigmoidBce => out_row
                .iter()
                .zip(tgt_row)
                .all(|(&o, &t)| (o > 0.5) == (t > 0.5)),
        };
        if ok {
            correct += 1;
        }
    }
    Ok((loss, correct as f64 / outputs.rows() as f64))
}

/// First index of the maximum value (lowest index wins ties).
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Plain or momentum SGD.
///
/// With momentum `m > 0` the update is `v' = m*v + g`, `p' = p - lr*v'`;
/// with `m = 0` it is `p' = p - lr*g`. Gradient masking, when used, must
/// already have happened before [`Sgd::step`].
#[derive(Debug, Clone)]
pub struct Sgd {
    lr: f64,
    momentum: f64,
    velocity: Option<GradSet>,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64) -> Result<Self> {
        if !lr.is_finite() || lr < 0.0 {
            return Err(Error::Config(format!("learning rate must be >= 0, got {lr}")));
        }
        if !momentum.is_finite() || !(0.0..1.0).contains(&momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {momentum}"
            )));
        }
        Ok(Sgd {
            lr,
            momentum,
            velocity: None,
        })
    }

    pub fn velocity(&self) -> Option<&GradSet> {
        self.velocity.as_ref()
    }

    /// One update step; returns the new parameters.
    pub fn step(&mut self, params: &ParamSet, grads: &GradSet) -> Result<ParamSet> {
        if !params.congruent_with(grads) {
            return Err(Error::Shape(format!(
                "gradient shape {:?} does not match parameter shape {:?}",
                grads.shape(),
                params.shape()
            )));
        }
        let lr = self.lr;
        let next = if self.momentum == 0.0 {
            params.zip_map(grads, |p, g| p - lr * g)?
        } else {
            let momentum = self.momentum;
            let velocity = match self.velocity.take() {
                Some(v) => {
                    if !v.congruent_with(params) {
                        return Err(Error::Shape(
                            "momentum state shape does not match parameters".into(),
                        ));
                    }
                    v
                }
                None => params.zeros_like(),
            };
            let new_velocity = velocity.zip_map(grads, |v, g| momentum * v + g)?;
            let next = params.zip_map(&new_velocity, |p, v| p - lr * v)?;
            self.velocity = Some(new_velocity);
            next
        };
        if !next.all_finite() {
            return Err(Error::Numeric(
                "non-finite parameter after SGD update".into(),
            ));
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sizes: &[usize], act: Activation, head: OutputHead, seed: u64) -> NetworkSpec {
        NetworkSpec::new(sizes.to_vec(), act, head, seed).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_biases_zero() {
        let s = spec(&[2, 1], Activation::Relu, OutputHead::SigmoidBce, 7);
        let a = init_params(&s).unwrap();
        let b = init_params(&s).unwrap();
        assert!(a.bits_eq(&b));
        for layer in &a.layers {
            assert!(layer.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_respects_uniform_bound() {
        let s = spec(&[4, 3], Activation::Relu, OutputHead::SoftmaxCe, 1);
        let p = init_params(&s).unwrap();
        let limit = libm::sqrt(6.0 / 7.0);
        for &w in p.layers[0].weights.values() {
            assert!(w > -limit && w < limit, "weight {w} outside (-{limit}, {limit})");
        }
    }

    #[test]
    fn init_rejects_zero_layer() {
        assert!(matches!(
            NetworkSpec::new(vec![2, 0, 1], Activation::Relu, OutputHead::SoftmaxCe, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_net_softmax_is_uniform() {
        let s = spec(&[2, 3], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = ParamSet {
            layers: vec![LayerParams::zeros(2, 3)],
        };
        let inputs = Matrix::from_vec(2, 2, vec![0.3, -0.7, 1.0, 2.0]).unwrap();
        let out = forward(&p, &s, &inputs).unwrap();
        for r in 0..out.rows() {
            for &v in out.row(r) {
                assert!((v - 1.0 / 3.0).abs() < 1e-15);
            }
            let sum: f64 = out.row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_net_sigmoid_is_half() {
        let s = spec(&[2, 2], Activation::Relu, OutputHead::SigmoidBce, 0);
        let p = ParamSet {
            layers: vec![LayerParams::zeros(2, 2)],
        };
        let inputs = Matrix::from_vec(1, 2, vec![0.1, 0.9]).unwrap();
        let out = forward(&p, &s, &inputs).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_sigmoid_unit_hand_value() {
        // w = 2, b = 1, input 0.5 -> sigmoid(2) ~ 0.880797.
        let s = spec(&[1, 1], Activation::Relu, OutputHead::SigmoidBce, 0);
        let p = ParamSet {
            layers: vec![LayerParams {
                weights: Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
                biases: vec![1.0],
            }],
        };
        let inputs = Matrix::from_vec(1, 1, vec![0.5]).unwrap();
        let out = forward(&p, &s, &inputs).unwrap();
        assert!((out.get(0, 0) - 0.8807970779778823).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_wrong_input_dim() {
        let s = spec(&[3, 2], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = init_params(&s).unwrap();
        let inputs = Matrix::zeros(1, 2);
        assert!(matches!(forward(&p, &s, &inputs), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_net_softmax_loss_is_ln_k() {
        let s = spec(&[2, 3], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = ParamSet {
            layers: vec![LayerParams::zeros(2, 3)],
        };
        let batch = Batch::new(
            Matrix::from_vec(2, 2, vec![0.5, -0.5, 0.1, 0.2]).unwrap(),
            Matrix::from_vec(2, 3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let (loss, _) = loss_and_grad(&p, &s, &batch).unwrap();
        assert!((loss - 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_rows_leave_loss_and_grads_unchanged() {
        let s = spec(&[3, 4, 2], Activation::Tanh, OutputHead::SoftmaxCe, 11);
        let p = init_params(&s).unwrap();
        let inputs = Matrix::from_vec(2, 3, vec![0.1, -0.2, 0.3, 0.8, 0.5, -0.1]).unwrap();
        let targets = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let batch = Batch::new(inputs.clone(), targets.clone()).unwrap();

        let mut dup_in = Matrix::zeros(4, 3);
        let mut dup_tg = Matrix::zeros(4, 2);
        for r in 0..2 {
            for c in 0..3 {
                dup_in.set(r, c, inputs.get(r, c));
                dup_in.set(r + 2, c, inputs.get(r, c));
            }
            for c in 0..2 {
                dup_tg.set(r, c, targets.get(r, c));
                dup_tg.set(r + 2, c, targets.get(r, c));
            }
        }
        let dup = Batch::new(dup_in, dup_tg).unwrap();

        let (l1, g1) = loss_and_grad(&p, &s, &batch).unwrap();
        let (l2, g2) = loss_and_grad(&p, &s, &dup).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter_values().zip(g2.iter_values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_hot_targets_enforced_for_softmax() {
        let s = spec(&[2, 2], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = init_params(&s).unwrap();
        let batch = Batch::new(
            Matrix::from_vec(1, 2, vec![0.0, 0.0]).unwrap(),
            Matrix::from_vec(1, 2, vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            loss_and_grad(&p, &s, &batch),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn sgd_hand_values() {
        let p = ParamSet {
            layers: vec![LayerParams {
                weights: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
                biases: vec![0.0],
            }],
        };
        let mut g = p.zeros_like();
        g.layers[0].weights.set(0, 0, 0.5);

        let mut sgd = Sgd::new(0.1, 0.0).unwrap();
        let p1 = sgd.step(&p, &g).unwrap();
        assert_eq!(p1.layers[0].weights.get(0, 0), 0.95);
    }

    #[test]
    fn sgd_momentum_hand_values() {
        // g = 1, lr = 0.1, momentum = 0.9: p drops by 0.1 then 0.19.
        let p = ParamSet {
            layers: vec![LayerParams {
                weights: Matrix::from_vec(1, 1, vec![0.0]).unwrap(),
                biases: vec![0.0],
            }],
        };
        let mut g = p.zeros_like();
        g.layers[0].weights.set(0, 0, 1.0);

        let mut sgd = Sgd::new(0.1, 0.9).unwrap();
        let p1 = sgd.step(&p, &g).unwrap();
        assert!((p1.layers[0].weights.get(0, 0) + 0.1).abs() < 1e-15);
        let p2 = sgd.step(&p1, &g).unwrap();
        assert!((p2.layers[0].weights.get(0, 0) + 0.29).abs() < 1e-15);
    }

    #[test]
    fn sgd_zero_gradient_is_identity() {
        let s = spec(&[3, 2], Activation::Relu, OutputHead::SoftmaxCe, 5);
        let p = init_params(&s).unwrap();
        let g = p.zeros_like();
        let mut sgd = Sgd::new(0.5, 0.0).unwrap();
        assert!(sgd.step(&p, &g).unwrap().bits_eq(&p));
    }

    #[test]
    fn sgd_zero_lr_is_identity_even_with_momentum() {
        let s = spec(&[3, 2], Activation::Tanh, OutputHead::SigmoidBce, 5);
        let p = init_params(&s).unwrap();
        let mut g = p.zeros_like();
        for layer in &mut g.layers {
            for v in layer.weights.values_mut() {
                *v = 0.25;
            }
        }
        let mut sgd = Sgd::new(0.0, 0.9).unwrap();
        let p1 = sgd.step(&p, &g).unwrap();
        assert!(p1.bits_eq(&p));
    }

    #[test]
    fn evaluate_tie_break_prefers_lowest_index() {
        // Zero network: all outputs uniform, argmax = 0 for every row.
        let s = spec(&[2, 3], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = ParamSet {
            layers: vec![LayerParams::zeros(2, 3)],
        };
        let data = Batch::new(
            Matrix::from_vec(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap(),
            Matrix::from_vec(
                3,
                3,
                vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            )
            .unwrap(),
        )
        .unwrap();
        let (_, acc) = evaluate(&p, &s, &data).unwrap();
        assert!((acc - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn evaluate_sigmoid_threshold_is_strict() {
        // Zero network: every output exactly 0.5, which thresholds to 0.
        let s = spec(&[2, 2], Activation::Relu, OutputHead::SigmoidBce, 0);
        let p = ParamSet {
            layers: vec![LayerParams::zeros(2, 2)],
        };
        let data = Batch::new(
            Matrix::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            Matrix::from_vec(2, 2, vec![0.0, 0.0, 1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let (_, acc) = evaluate(&p, &s, &data).unwrap();
        assert!((acc - 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_empty_data() {
        let s = spec(&[2, 2], Activation::Relu, OutputHead::SoftmaxCe, 0);
        let p = init_params(&s).unwrap();
        assert!(Batch::new(Matrix::zeros(0, 2), Matrix::zeros(0, 2)).is_err());
        let _ = p;
    }
}
