use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-layer nonlinearity. The output layer is always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a = act(z)`.
    #[inline]
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Pointwise training loss, averaged over every output entry of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    Mse,
    L1,
}

impl Loss {
    /// Returns `(mean loss, d loss / d prediction)` for residuals `pred - target`.
    pub fn value_and_residual_grad(self, residual: &Array2<f64>) -> (f64, Array2<f64>) {
        let n = residual.len().max(1) as f64;
        match self {
            Loss::Mse => {
                let value = residual.iter().map(|r| r * r).sum::<f64>() / n;
                (value, residual.mapv(|r| 2.0 * r / n))
            }
            Loss::L1 => {
                let value = residual.iter().map(|r| r.abs()).sum::<f64>() / n;
                // subgradient 0 at a zero residual
                let grad = residual.mapv(|r| {
                    if r > 0.0 {
                        1.0 / n
                    } else if r < 0.0 {
                        -1.0 / n
                    } else {
                        0.0
                    }
                });
                (value, grad)
            }
        }
    }
}

/// Parameters of a fully connected network.
///
/// Weight matrix `k` is row-major with shape `(layer_sizes[k + 1], layer_sizes[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MlpRecord", into = "MlpRecord")]
pub struct MlpParams {
    layer_sizes: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    activation: Activation,
}

/// Serialized form; loading goes through [`MlpParams::from_parts`] checks.
#[derive(Serialize, Deserialize)]
struct MlpRecord {
    activation: Activation,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl TryFrom<MlpRecord> for MlpParams {
    type Error = Error;

    fn try_from(r: MlpRecord) -> Result<Self> {
        MlpParams::from_parts(r.weights, r.biases, r.activation)
    }
}

impl From<MlpParams> for MlpRecord {
    fn from(p: MlpParams) -> Self {
        Self {
            activation: p.activation,
            weights: p.weights,
            biases: p.biases,
        }
    }
}

/// Gradient bundle with the same shapes as an [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Inputs `(n, in_width)` paired with targets `(n, out_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    inputs: Array2<f64>,
    targets: Array2<f64>,
}

/// Activations of every layer from a batched forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache holds at least the input")
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 layer sizes, got {}",
            layer_sizes.len()
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Config(format!(
            "layer sizes must be positive: {layer_sizes:?}"
        )));
    }
    Ok(())
}

impl MlpParams {
    /// Random initialization: weights uniform with variance `1 / fan_in`, biases zero.
    pub fn init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (3.0 / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let w = Array2::from_shape_simple_fn((fan_out, fan_in), || dist.sample(&mut rng));
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation,
        })
    }

    pub fn zeros(layer_sizes: &[usize], activation: Activation) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|p| Array2::zeros((p[1], p[0])))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| Array1::zeros(n)).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation,
        })
    }

    /// Assembles a network from explicit arrays, checking every shape and value.
    pub fn from_parts(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Shape(format!(
                "{} weight matrices vs {} bias vectors",
                weights.len(),
                biases.len()
            )));
        }
        let mut layer_sizes = vec![weights[0].ncols()];
        for (k, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *layer_sizes.last().unwrap() || w.nrows() != b.len() {
                return Err(Error::Shape(format!(
                    "layer {k}: weight {:?} does not chain with bias {}",
                    w.dim(),
                    b.len()
                )));
            }
            layer_sizes.push(w.nrows());
        }
        validate_sizes(&layer_sizes)?;
        let finite = weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && biases.iter().all(|b| b.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
            activation,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Single-input forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_width() {
            return Err(Error::Shape(format!(
                "input length {} does not match network input width {}",
                input.len(),
                self.input_width()
            )));
        }
        let mut a = Array1::from(input.to_vec());
        let last = self.n_layers() - 1;
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w.dot(&a) + b;
            if k < last {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            a = z;
        }
        Ok(a.to_vec())
    }

    /// Batched forward pass over the rows of `inputs`, without keeping intermediates.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_batch_width(inputs.ncols())?;
        let last = self.n_layers() - 1;
        let mut a = inputs.to_owned();
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = self.affine(&a.view(), w, b, k < last);
        }
        Ok(a)
    }

    /// Batched forward pass that keeps every layer's activations and rejects
    /// non-finite values, reporting the first offending layer.
    pub fn forward_cached(&self, inputs: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_batch_width(inputs.ncols())?;
        let last = self.n_layers() - 1;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(inputs.to_owned());
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let a = self.affine(&activations[k].view(), w, b, k < last);
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLayer { layer: k });
            }
            activations.push(a);
        }
        Ok(ForwardCache { activations })
    }

    #[inline]
    fn affine(
        &self,
        a: &ArrayView2<f64>,
        w: &Array2<f64>,
        b: &Array1<f64>,
        hidden: bool,
    ) -> Array2<f64> {
        let mut z = a.dot(&w.t());
        z += b;
        if hidden {
            let act = self.activation;
            z.mapv_inplace(|v| act.apply(v));
        }
        z
    }

    fn check_batch_width(&self, width: usize) -> Result<()> {
        if width != self.input_width() {
            return Err(Error::Shape(format!(
                "batch width {width} does not match network input width {}",
                self.input_width()
            )));
        }
        Ok(())
    }

    /// Reverse-mode pass. `d_output` is the loss gradient with respect to the
    /// network output rows. Returns the parameter gradients and, when
    /// `want_input_grad` is set, the gradient with respect to the inputs.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_output: ArrayView2<f64>,
        want_input_grad: bool,
    ) -> (Gradients, Option<Array2<f64>>) {
        let n_layers = self.n_layers();
        assert_eq!(cache.activations.len(), n_layers + 1, "cache from another network");
        assert_eq!(d_output.dim(), cache.output().dim(), "output gradient shape");
        let mut grad_w = vec![Array2::zeros((0, 0)); n_layers];
        let mut grad_b = vec![Array1::zeros(0); n_layers];
        let mut dz = d_output.to_owned();
        let mut d_input = None;
        for k in (0..n_layers).rev() {
            let a_prev = &cache.activations[k];
            grad_w[k] = dz.t().dot(a_prev);
            grad_b[k] = dz.sum_axis(Axis(0));
            if k > 0 || want_input_grad {
                let mut da = dz.dot(&self.weights[k]);
                if k > 0 {
                    let act = self.activation;
                    ndarray::Zip::from(&mut da)
                        .and(a_prev)
                        .for_each(|d, &a| *d *= act.grad_from_output(a));
                    dz = da;
                } else {
                    d_input = Some(da);
                }
            }
        }
        (
            Gradients {
                weights: grad_w,
                biases: grad_b,
            },
            d_input,
        )
    }

    /// Loss averaged over the batch together with its exact gradient.
    pub fn value_and_grad(&self, batch: &Batch, loss: Loss) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::Usage("empty batch".into()));
        }
        if batch.targets.ncols() != self.output_width() {
            return Err(Error::Shape(format!(
                "target width {} does not match network output width {}",
                batch.targets.ncols(),
                self.output_width()
            )));
        }
        let cache = self.forward_cached(batch.inputs.view())?;
        let residual = cache.output() - &batch.targets;
        let (value, d_out) = loss.value_and_residual_grad(&residual);
        let (grads, _) = self.backward(&cache, d_out.view(), false);
        Ok((value, grads))
    }
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            weights: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    /// True when every array has the shape of the corresponding parameter.
    pub fn matches(&self, params: &MlpParams) -> bool {
        self.weights.len() == params.weights.len()
            && self.biases.len() == params.biases.len()
            && self
                .weights
                .iter()
                .zip(&params.weights)
                .all(|(g, w)| g.dim() == w.dim())
            && self
                .biases
                .iter()
                .zip(&params.biases)
                .all(|(g, b)| g.len() == b.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(self.biases.iter().flat_map(|b| b.iter()))
    }
}

impl Batch {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(Error::Shape(format!(
                "{} input rows vs {} target rows",
                inputs.nrows(),
                targets.nrows()
            )));
        }
        Ok(Self { inputs, targets })
    }

    /// Single-output batch from a target vector.
    pub fn scalar(inputs: Array2<f64>, targets: Vec<f64>) -> Result<Self> {
        let n = targets.len();
        Self::new(inputs, Array2::from_shape_vec((n, 1), targets).expect("column"))
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &Array2<f64> {
        &self.targets
    }
}
