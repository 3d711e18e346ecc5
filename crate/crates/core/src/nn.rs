//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Every network here is a chain of affine layers. Hidden layers use a
//! rectifier; the output layer is either the identity or `scale * tanh`.
//! Batched entry points take row-major `(samples, features)` matrices; the
//! single-sample `forward`/`backward` wrap them with a batch of one.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const FORMAT_TAG: &str = "dense-net 1";

/// Activation applied after the last affine layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputActivation {
    Identity,
    /// `scale * tanh(z)`; every output component lies in `[-scale, scale]`.
    ScaledTanh { scale: f64 },
}

impl OutputActivation {
    fn name(&self) -> &'static str {
        match self {
            OutputActivation::Identity => "identity",
            OutputActivation::ScaledTanh { .. } => "scaled-tanh",
        }
    }
}

/// One affine layer. `weights` has shape `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl DenseLayer {
    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

/// Gradient of a scalar with respect to every parameter of a [`DenseNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    layers: Vec<DenseLayer>,
}

impl GradientSet {
    pub fn zeros_like(net: &DenseNet) -> Self {
        GradientSet {
            layers: net
                .layers
                .iter()
                .map(|l| DenseLayer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    biases: Array1::zeros(l.biases.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.biases *= factor;
        }
    }

    /// Element-wise `self += other`. Panics if shapes differ.
    pub fn accumulate(&mut self, other: &GradientSet) {
        assert_eq!(self.layers.len(), other.layers.len());
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.biases += &b.biases;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }

    fn congruent_with(&self, net: &DenseNet) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, p)| {
                g.weights.dim() == p.weights.dim() && g.biases.len() == p.biases.len()
            })
    }
}

/// Activations recorded by a batched forward pass, needed for backprop.
///
/// `activations[0]` is the input batch and `activations[l + 1]` the output
/// of layer `l` (after its activation function).
#[derive(Debug, Clone)]
pub struct Tape {
    activations: Vec<Array2<f64>>,
}

impl Tape {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("tape holds at least the input")
    }

    pub fn into_output(mut self) -> Array2<f64> {
        self.activations.pop().expect("tape holds at least the input")
    }

    pub fn batch_size(&self) -> usize {
        self.activations[0].nrows()
    }
}

/// Multi-layer perceptron with rectifier hidden units.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
    output: OutputActivation,
}

impl DenseNet {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(layer_sizes: &[usize], output: OutputActivation, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "a network needs at least an input and an output layer, got sizes {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive, got {layer_sizes:?}"
            )));
        }
        validate_output(output)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_out, fan_in), || rng.gen_range(-limit..=limit));
                DenseLayer {
                    weights,
                    biases: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(DenseNet { layers, output })
    }

    /// Build a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<DenseLayer>, output: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        validate_output(output)?;
        for (i, l) in layers.iter().enumerate() {
            if l.inputs() == 0 || l.outputs() == 0 {
                return Err(Error::Config(format!("layer {i} has an empty dimension")));
            }
            if l.biases.len() != l.outputs() {
                return Err(Error::Dimension {
                    context: "layer biases",
                    expected: l.outputs(),
                    got: l.biases.len(),
                });
            }
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Dimension {
                    context: "consecutive layers",
                    expected: pair[0].outputs(),
                    got: pair[1].inputs(),
                });
            }
        }
        Ok(DenseNet { layers, output })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size())
            .chain(self.layers.iter().map(DenseLayer::outputs))
            .collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Direct parameter access. Shapes must not be changed through this.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().all(f64::is_finite)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let batch = single_row(input);
        Ok(self.forward_batch(batch.view())?.into_raw_vec_and_offset().0)
    }

    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(inputs.ncols())?;
        let mut a = inputs.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            a = self.affine(layer, a.view(), i + 1 == self.layers.len());
        }
        Ok(a)
    }

    /// Batched forward pass that keeps every activation for [`Self::backward_batch`].
    pub fn forward_tape(&self, inputs: ArrayView2<'_, f64>) -> Result<Tape> {
        self.check_input(inputs.ncols())?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let next = self.affine(layer, activations[i].view(), i + 1 == self.layers.len());
            activations.push(next);
        }
        Ok(Tape { activations })
    }

    fn affine(&self, layer: &DenseLayer, a: ArrayView2<'_, f64>, is_output: bool) -> Array2<f64> {
        let mut z = a.dot(&layer.weights.t());
        z += &layer.biases;
        if !is_output {
            z.mapv_inplace(|v| v.max(0.0));
        } else if let OutputActivation::ScaledTanh { scale } = self.output {
            z.mapv_inplace(|v| scale * v.tanh());
        }
        z
    }

    /// Gradients of `<upstream, forward(input)>` with respect to every
    /// parameter and to the input.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(GradientSet, Vec<f64>)> {
        let tape = self.forward_tape(single_row(input).view())?;
        let upstream = single_row(upstream);
        let (grads, input_grad) = self.backward_batch(&tape, upstream.view())?;
        Ok((grads, input_grad.into_raw_vec_and_offset().0))
    }

    /// Parameter gradients summed over the batch, and per-sample input gradients.
    pub fn backward_batch(
        &self,
        tape: &Tape,
        upstream: ArrayView2<'_, f64>,
    ) -> Result<(GradientSet, Array2<f64>)> {
        let (grads, input_grad) = self.backprop(tape, upstream, true, true)?;
        Ok((grads.unwrap(), input_grad.unwrap()))
    }

    /// Like [`Self::backward_batch`] but skips the input gradient.
    pub fn parameter_grads(&self, tape: &Tape, upstream: ArrayView2<'_, f64>) -> Result<GradientSet> {
        Ok(self.backprop(tape, upstream, true, false)?.0.unwrap())
    }

    /// Like [`Self::backward_batch`] but skips every parameter gradient.
    pub fn input_grads(&self, tape: &Tape, upstream: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.backprop(tape, upstream, false, true)?.1.unwrap())
    }

    fn backprop(
        &self,
        tape: &Tape,
        upstream: ArrayView2<'_, f64>,
        want_params: bool,
        want_input: bool,
    ) -> Result<(Option<GradientSet>, Option<Array2<f64>>)> {
        if tape.activations.len() != self.layers.len() + 1 {
            return Err(Error::Dimension {
                context: "tape depth",
                expected: self.layers.len() + 1,
                got: tape.activations.len(),
            });
        }
        let out = tape.output();
        if upstream.dim() != out.dim() {
            return Err(Error::Dimension {
                context: "upstream gradient",
                expected: out.len(),
                got: upstream.len(),
            });
        }

        let mut delta = match self.output {
            OutputActivation::Identity => upstream.to_owned(),
            OutputActivation::ScaledTanh { scale } => {
                let mut d = upstream.to_owned();
                Zip::from(&mut d).and(out).for_each(|d, &y| {
                    let t = y / scale;
                    *d *= scale * (1.0 - t * t);
                });
                d
            }
        };

        let mut grads = want_params.then(|| Vec::with_capacity(self.layers.len()));
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let below = &tape.activations[l];
            if let Some(grads) = grads.as_mut() {
                grads.push(DenseLayer {
                    weights: delta.t().dot(below),
                    biases: delta.sum_axis(Axis(0)),
                });
            }
            if l > 0 {
                let mut d = delta.dot(&layer.weights);
                Zip::from(&mut d).and(below).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = d;
            } else if want_input {
                delta = delta.dot(&layer.weights);
            }
        }

        let grads = grads.map(|mut layers| {
            layers.reverse();
            GradientSet { layers }
        });
        Ok((grads, want_input.then_some(delta)))
    }

    /// `param -= learning_rate * grad`, rejected if any gradient is non-finite.
    pub fn sgd_step(&mut self, grads: &GradientSet, learning_rate: f64) -> Result<()> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive and finite, got {learning_rate}"
            )));
        }
        if !grads.congruent_with(self) {
            return Err(Error::Config("gradient shapes do not match the network".into()));
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        for (p, g) in self.layers.iter_mut().zip(&grads.layers) {
            p.weights.scaled_add(-learning_rate, &g.weights);
            p.biases.scaled_add(-learning_rate, &g.biases);
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("parameters after update".into()));
        }
        Ok(())
    }

    /// Polyak blend `self = tau * source + (1 - tau) * self`.
    pub fn soft_update_from(&mut self, source: &DenseNet, tau: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
        }
        if self.layer_sizes() != source.layer_sizes() {
            return Err(Error::Config("soft update between differently shaped networks".into()));
        }
        let keep = 1.0 - tau;
        for (t, s) in self.layers.iter_mut().zip(&source.layers) {
            Zip::from(&mut t.weights)
                .and(&s.weights)
                .for_each(|t, &s| *t = tau * s + keep * *t);
            Zip::from(&mut t.biases)
                .and(&s.biases)
                .for_each(|t, &s| *t = tau * s + keep * *t);
        }
        Ok(())
    }

    fn check_input(&self, got: usize) -> Result<()> {
        if got != self.input_size() {
            return Err(Error::Dimension {
                context: "network input",
                expected: self.input_size(),
                got,
            });
        }
        Ok(())
    }

    /// Lossless text encoding: every parameter is written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{FORMAT_TAG}").unwrap();
        let sizes: Vec<String> = self.layer_sizes().iter().map(usize::to_string).collect();
        writeln!(out, "layers {}", sizes.join(" ")).unwrap();
        writeln!(out, "hidden relu").unwrap();
        match self.output {
            OutputActivation::Identity => writeln!(out, "output identity").unwrap(),
            OutputActivation::ScaledTanh { scale } => {
                writeln!(out, "output scaled-tanh {scale:.16e}").unwrap()
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            writeln!(out, "weights {i}").unwrap();
            for row in l.weights.rows() {
                write_values(&mut out, row.iter().copied());
            }
            writeln!(out, "biases {i}").unwrap();
            write_values(&mut out, l.biases.iter().copied());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of input, expected {what}")))
        };

        if next("format tag")? != FORMAT_TAG {
            return Err(Error::Parse(format!("missing `{FORMAT_TAG}` header")));
        }
        let sizes: Vec<usize> = keyword_fields(next("layer sizes")?, "layers")?
            .iter()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad layer size `{s}`"))))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Parse(format!("invalid layer sizes {sizes:?}")));
        }
        let hidden = keyword_fields(next("hidden activation")?, "hidden")?;
        if hidden != ["relu"] {
            return Err(Error::Parse(format!("unsupported hidden activation {hidden:?}")));
        }
        let output = match keyword_fields(next("output activation")?, "output")?.as_slice() {
            ["identity"] => OutputActivation::Identity,
            ["scaled-tanh", scale] => OutputActivation::ScaledTanh {
                scale: parse_f64(scale)?,
            },
            other => return Err(Error::Parse(format!("unsupported output activation {other:?}"))),
        };

        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (i, pair) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            expect_line(next("weights header")?, &format!("weights {i}"))?;
            let mut weights = Vec::with_capacity(fan_in * fan_out);
            for _ in 0..fan_out {
                let row = parse_row(next("weight row")?)?;
                if row.len() != fan_in {
                    return Err(Error::Parse(format!(
                        "layer {i}: weight row has {} values, expected {fan_in}",
                        row.len()
                    )));
                }
                weights.extend(row);
            }
            expect_line(next("biases header")?, &format!("biases {i}"))?;
            let biases = parse_row(next("bias row")?)?;
            if biases.len() != fan_out {
                return Err(Error::Parse(format!(
                    "layer {i}: {} biases, expected {fan_out}",
                    biases.len()
                )));
            }
            layers.push(DenseLayer {
                weights: Array2::from_shape_vec((fan_out, fan_in), weights)
                    .expect("row count and width checked"),
                biases: Array1::from(biases),
            });
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content `{extra}`")));
        }
        DenseNet::from_layers(layers, output)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DenseNet::from_text(&text)
    }
}

fn validate_output(output: OutputActivation) -> Result<()> {
    if let OutputActivation::ScaledTanh { scale } = output {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!(
                "{} scale must be positive, got {scale}",
                output.name()
            )));
        }
    }
    Ok(())
}

fn single_row(values: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, values.len()), values.to_vec()).expect("1 x n shape")
}

fn write_values(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:.16e}").unwrap();
    }
    out.push('\n');
}

fn keyword_fields<'a>(line: &'a str, keyword: &str) -> Result<Vec<&'a str>> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some(keyword) {
        return Err(Error::Parse(format!("expected `{keyword} ...`, found `{line}`")));
    }
    Ok(fields.collect())
}

fn expect_line(line: &str, expected: &str) -> Result<()> {
    if line != expected {
        return Err(Error::Parse(format!("expected `{expected}`, found `{line}`")));
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite parameter `{s}`")));
    }
    Ok(v)
}

fn parse_row(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace().map(parse_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn linear(weight: f64, bias: f64) -> DenseNet {
        DenseNet::from_layers(
            vec![DenseLayer {
                weights: array![[weight]],
                biases: array![bias],
            }],
            OutputActivation::Identity,
        )
        .unwrap()
    }

    #[test]
    fn init_is_deterministic_and_biases_start_at_zero() {
        let a = DenseNet::init(&[6, 512, 512, 3], OutputActivation::Identity, 42).unwrap();
        let b = DenseNet::init(&[6, 512, 512, 3], OutputActivation::Identity, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.layers().iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        let c = DenseNet::init(&[6, 512, 512, 3], OutputActivation::Identity, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_respects_glorot_bound() {
        let net = DenseNet::init(&[3, 20, 5], OutputActivation::Identity, 1).unwrap();
        for l in net.layers() {
            let limit = (6.0 / (l.inputs() + l.outputs()) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= limit));
        }
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(DenseNet::init(&[4], OutputActivation::Identity, 0).is_err());
        assert!(DenseNet::init(&[], OutputActivation::Identity, 0).is_err());
        assert!(DenseNet::init(&[4, 0, 1], OutputActivation::Identity, 0).is_err());
        assert!(DenseNet::init(&[4, 1], OutputActivation::ScaledTanh { scale: 0.0 }, 0).is_err());
    }

    #[test]
    fn zero_weights_output_is_activated_bias() {
        let mut net = DenseNet::init(&[3, 4, 2], OutputActivation::ScaledTanh { scale: 2.0 }, 5).unwrap();
        for l in net.layers_mut() {
            l.weights.fill(0.0);
        }
        net.layers_mut()[1].biases = array![0.3, -0.7];
        let y = net.forward(&[1.0, -2.0, 9.0]).unwrap();
        assert_eq!(y, vec![2.0 * 0.3f64.tanh(), 2.0 * (-0.7f64).tanh()]);
    }

    #[test]
    fn affine_arithmetic() {
        assert_eq!(linear(2.0, 1.0).forward(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn negative_preactivation_is_cut_by_rectifier() {
        let net = DenseNet::from_layers(
            vec![
                DenseLayer {
                    weights: array![[1.0]],
                    biases: array![-5.0],
                },
                DenseLayer {
                    weights: array![[10.0]],
                    biases: array![0.5],
                },
            ],
            OutputActivation::Identity,
        )
        .unwrap();
        assert_eq!(net.forward(&[0.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let net = linear(1.0, 0.0);
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn linear_backward_is_product_rule() {
        let (w, x) = (1.5, -0.25);
        let (grads, dx) = linear(w, 0.3).backward(&[x], &[1.0]).unwrap();
        assert_eq!(grads.layers()[0].weights[[0, 0]], x);
        assert_eq!(grads.layers()[0].biases[0], 1.0);
        assert_eq!(dx, vec![w]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = DenseNet::init(&[4, 6, 3], OutputActivation::ScaledTanh { scale: 0.5 }, 9).unwrap();
        let (grads, dx) = net.backward(&[0.1, 0.2, -0.3, 0.4], &[0.0; 3]).unwrap();
        assert!(grads.values().all(|g| g == 0.0));
        assert!(dx.iter().all(|&g| g == 0.0));
        assert!(net.backward(&[0.1; 4], &[1.0; 2]).is_err());
    }

    #[test]
    fn sgd_arithmetic_and_fixed_point() {
        let mut net = linear(1.0, 0.0);
        let mut grads = GradientSet::zeros_like(&net);
        net.sgd_step(&grads, 0.02).unwrap();
        assert_eq!(net, linear(1.0, 0.0));
        grads.layers_mut()[0].weights[[0, 0]] = 0.5;
        net.sgd_step(&grads, 0.02).unwrap();
        assert_eq!(net.layers()[0].weights[[0, 0]], 0.99);
    }

    #[test]
    fn sgd_rejects_non_finite_gradients() {
        let mut net = linear(1.0, 0.0);
        let mut grads = GradientSet::zeros_like(&net);
        grads.layers_mut()[0].biases[0] = f64::NAN;
        assert!(matches!(net.sgd_step(&grads, 0.1), Err(Error::NonFinite(_))));
        assert_eq!(net, linear(1.0, 0.0));
        assert!(net.sgd_step(&GradientSet::zeros_like(&net), 0.0).is_err());
    }

    #[test]
    fn soft_update_limits() {
        let src = DenseNet::init(&[3, 5, 2], OutputActivation::Identity, 1).unwrap();
        let orig = DenseNet::init(&[3, 5, 2], OutputActivation::Identity, 2).unwrap();
        let mut t = orig.clone();
        t.soft_update_from(&src, 0.0).unwrap();
        assert_eq!(t, orig);
        t.soft_update_from(&src, 1.0).unwrap();
        assert_eq!(t, src);
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let net = DenseNet::init(
            &[3, 7, 4, 2],
            OutputActivation::ScaledTanh {
                scale: std::f64::consts::PI / 16.0,
            },
            77,
        )
        .unwrap();
        let back = DenseNet::from_text(&net.to_text()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn text_parse_errors() {
        assert!(DenseNet::from_text("").is_err());
        assert!(DenseNet::from_text("dense-net 1\nlayers 1\nhidden relu\noutput identity\n").is_err());
        let good = linear(1.0, 2.0).to_text();
        assert!(DenseNet::from_text(&good.replace("identity", "softmax")).is_err());
        assert!(DenseNet::from_text(&format!("{good}1.0\n")).is_err());
    }
}
