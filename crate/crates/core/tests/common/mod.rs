#![allow(dead_code)]

use apf_ddpg::apf::{self, ShapingForm};
use apf_ddpg::env::EnvState;
use apf_ddpg::nn::{DenseNet, OutputActivation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain-loop forward pass used as an oracle, independent of the ndarray path.
pub fn naive_forward(net: &DenseNet, input: &[f64]) -> Vec<f64> {
    let n_layers = net.layers().len();
    let mut a = input.to_vec();
    for (i, layer) in net.layers().iter().enumerate() {
        let mut z = vec![0.0; layer.outputs()];
        for (o, zo) in z.iter_mut().enumerate() {
            *zo = layer.biases[o];
            for (k, ak) in a.iter().enumerate() {
                *zo += layer.weights[[o, k]] * ak;
            }
        }
        a = if i + 1 < n_layers {
            z.into_iter().map(|v| v.max(0.0)).collect()
        } else {
            match net.output_activation() {
                OutputActivation::Identity => z,
                OutputActivation::ScaledTanh { scale } => z.into_iter().map(|v| scale * v.tanh()).collect(),
            }
        };
    }
    a
}

/// Smallest |pre-activation| of any hidden unit, used to keep finite
/// differences away from rectifier kinks.
pub fn min_hidden_margin(net: &DenseNet, input: &[f64]) -> f64 {
    let n_layers = net.layers().len();
    let mut a = input.to_vec();
    let mut margin = f64::INFINITY;
    for layer in &net.layers()[..n_layers - 1] {
        let z: Vec<f64> = (0..layer.outputs())
            .map(|o| layer.biases[o] + (0..a.len()).map(|k| layer.weights[[o, k]] * a[k]).sum::<f64>())
            .collect();
        margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
        a = z.into_iter().map(|v| v.max(0.0)).collect();
    }
    margin
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

/// Random small network with random (nonzero) biases.
pub fn random_net(rng: &mut ChaCha8Rng) -> DenseNet {
    let depth = rng.gen_range(2..=4);
    let sizes: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=6)).collect();
    let output = if rng.gen_bool(0.5) {
        OutputActivation::Identity
    } else {
        OutputActivation::ScaledTanh { scale: rng.gen_range(0.1..2.0) }
    };
    let mut net = DenseNet::init(&sizes, output, rng.gen()).expect("valid sizes");
    for layer in net.layers_mut() {
        layer.biases.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
    }
    net
}

/// Compares `backward` with central differences (step 1e-5) of
/// `<upstream, forward(x)>`; returns the largest relative error over every
/// parameter and input coordinate.
pub fn gradient_check(net: &DenseNet, rng: &mut ChaCha8Rng) -> f64 {
    const H: f64 = 1e-5;
    let mut input: Vec<f64>;
    loop {
        input = (0..net.input_size()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if min_hidden_margin(net, &input) > 1e-3 {
            break;
        }
    }
    let upstream: Vec<f64> = (0..net.output_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let objective = |n: &DenseNet, x: &[f64]| -> f64 {
        naive_forward(n, x).iter().zip(&upstream).map(|(y, u)| y * u).sum()
    };
    let (grads, input_grad) = net.backward(&input, &upstream).expect("backward");

    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for (l, g) in grads.layers().iter().enumerate() {
        for ((o, k), &analytic) in g.weights.indexed_iter() {
            let w0 = probe.layers()[l].weights[[o, k]];
            probe.layers_mut()[l].weights[[o, k]] = w0 + H;
            let up = objective(&probe, &input);
            probe.layers_mut()[l].weights[[o, k]] = w0 - H;
            let down = objective(&probe, &input);
            probe.layers_mut()[l].weights[[o, k]] = w0;
            worst = worst.max(rel_err(analytic, (up - down) / (2.0 * H)));
        }
        for (o, &analytic) in g.biases.indexed_iter() {
            let b0 = probe.layers()[l].biases[o];
            probe.layers_mut()[l].biases[o] = b0 + H;
            let up = objective(&probe, &input);
            probe.layers_mut()[l].biases[o] = b0 - H;
            let down = objective(&probe, &input);
            probe.layers_mut()[l].biases[o] = b0;
            worst = worst.max(rel_err(analytic, (up - down) / (2.0 * H)));
        }
    }
    for (i, &analytic) in input_grad.iter().enumerate() {
        let mut x = input.clone();
        x[i] += H;
        let up = objective(net, &x);
        x[i] -= 2.0 * H;
        let down = objective(net, &x);
        worst = worst.max(rel_err(analytic, (up - down) / (2.0 * H)));
    }
    worst
}

pub fn random_state(rng: &mut ChaCha8Rng) -> EnvState {
    EnvState::from_array(std::array::from_fn(|i| {
        if i < 3 {
            rng.gen_range(-1.0..1.0)
        } else {
            rng.gen_range(-1.5..1.5)
        }
    }))
}

/// Discounted shaping summed along a random episode minus the closed form
/// `gamma^T phi(s_T) - phi(s_0)`.
pub fn telescoping_gap(net: &DenseNet, gamma: f64, rng: &mut ChaCha8Rng) -> f64 {
    let len = rng.gen_range(1..=100);
    let states: Vec<EnvState> = (0..=len).map(|_| random_state(rng)).collect();
    let mut total = 0.0;
    let mut discount = 1.0;
    for pair in states.windows(2) {
        let f = apf::shaping_reward(net, &pair[0], &pair[1], gamma, ShapingForm::Discounted, apf::CELL_SIZE)
            .expect("finite shaping");
        total += discount * f;
        discount *= gamma;
    }
    let phi = |s: &EnvState| apf::potential(net, apf::map_state(s, apf::CELL_SIZE)).unwrap();
    let closed = discount * phi(&states[len]) - phi(&states[0]);
    (total - closed).abs()
}

/// A potential network `[3, h, 1]` with random nonzero parameters.
pub fn random_apf_net(rng: &mut ChaCha8Rng) -> DenseNet {
    let hidden = rng.gen_range(2..=16);
    let mut net = DenseNet::init(&[3, hidden, 1], OutputActivation::Identity, rng.gen()).unwrap();
    for layer in net.layers_mut() {
        layer.biases.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
    }
    net
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
