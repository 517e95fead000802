#![allow(dead_code)]

use branchfinder::loss::{LossFunction, LossKind};
use branchfinder::network::{init_model, Activation, NetworkConfig, NetworkModel};
use branchfinder::synthdata::Sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;

/// Outcome of comparing backprop against central differences on one network.
pub struct GradientCheck {
    pub relative_error: f64,
    /// Parameters skipped because the loss has a kink within one step.
    pub skipped: usize,
    pub checked: usize,
}

/// Compare analytic gradients with central differences, parameter by parameter.
///
/// A parameter whose forward and backward one-sided differences disagree sits
/// on a kink (relu, mae, huber) and is skipped.
pub fn check_gradients(model: &NetworkModel, batch: &[Sample], loss: &LossKind) -> GradientCheck {
    let analytic = model.parameter_gradients(batch, loss).unwrap().flatten();
    let base = model.parameters();
    let f0 = model.scaled_batch_loss(batch, loss).unwrap();
    let mut probe = model.clone();
    let mut eval = |params: &[f64]| {
        probe.set_parameters(params).unwrap();
        probe.scaled_batch_loss(batch, loss).unwrap()
    };
    let (mut diff2, mut norm2, mut skipped) = (0.0, 0.0, 0);
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + FD_STEP;
        let fp = eval(&p);
        p[i] = base[i] - FD_STEP;
        let fm = eval(&p);
        let forward = (fp - f0) / FD_STEP;
        let backward = (f0 - fm) / FD_STEP;
        let scale = forward.abs().max(backward.abs()).max(1e-3);
        if (forward - backward).abs() > 1e-3 * scale {
            skipped += 1;
            continue;
        }
        let central = (fp - fm) / (2.0 * FD_STEP);
        diff2 += (central - analytic[i]).powi(2);
        norm2 += central.abs().max(analytic[i].abs()).powi(2);
    }
    GradientCheck {
        relative_error: if norm2 > 0.0 { (diff2 / norm2).sqrt() } else { diff2.sqrt() },
        skipped,
        checked: base.len() - skipped,
    }
}

/// A random network of at most 3 hidden layers with at most 10 units each,
/// a random batch, and a random loss of the requested family.
pub fn random_case(seed: u64, function: &LossFunction) -> (NetworkModel, Vec<Sample>, LossKind) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_dim = rng.random_range(1..=3);
    let depth = rng.random_range(1..=3);
    let hidden_layers: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=10)).collect();
    let activation = [Activation::Tanh, Activation::Relu, Activation::Sigmoid][rng.random_range(0..3)];
    let config = NetworkConfig {
        input_dim,
        hidden_layers,
        activation,
        seed,
    };
    let mut model = init_model(&config).unwrap();
    // Non-zero biases so relu units are not all on their kink at zero input.
    let params: Vec<f64> = model.parameters().iter().map(|p| p + rng.random_range(-0.3..0.3)).collect();
    model.set_parameters(&params).unwrap();

    let n = rng.random_range(1..=8);
    let mut batch = Vec::with_capacity(n);
    while batch.len() < n {
        let x: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = rng.random_range(-2.0..2.0);
        let pred = model.forward(&x).unwrap();
        // residuals stay clear of the mae kink
        if matches!(function, LossFunction::Mae) && (pred - y).abs() < 1e-2 {
            continue;
        }
        batch.push(Sample {
            x,
            y,
            true_branch: None,
        });
    }
    let beta = rng.random_range(0.5..4.0);
    (model, batch, LossKind::new(function.clone()).with_beta(beta))
}

pub fn all_loss_functions() -> Vec<LossFunction> {
    vec![
        LossFunction::Mse,
        LossFunction::Mae,
        LossFunction::Huber { delta: 0.7 },
        LossFunction::LogCosh,
    ]
}
