//! Backpropagation-through-time gradients against central finite differences.

use stockbot_core::lstm::{Architecture, DecoderInput, Network, NetworkParams, NetworkSpec};
use stockbot_core::ndcore::{seeded_uniform, Matrix, Parameters, Rng};
use stockbot_core::optim::{compare_gradients, finite_diff_grad, make_weights, mse_loss, weighted_mse_loss};

const EPS: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
const ABS_FLOOR: f64 = 1e-7;

fn spec(arch: Architecture, depth: usize, units: usize, ph: usize, fl: usize, input_dim: usize) -> NetworkSpec {
    NetworkSpec {
        architecture: arch,
        stack_depth: depth,
        units,
        input_dim,
        past_history: ph,
        forward_look: fl,
    }
}

fn windows(rng: &mut Rng, n: usize, rows: usize, cols: usize) -> Vec<Matrix> {
    (0..n).map(|_| seeded_uniform(rng, rows, cols, 0.0, 1.0).unwrap()).collect()
}

fn targets(rng: &mut Rng, n: usize, fl: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..fl).map(|_| rng.uniform(0.0, 1.0)).collect()).collect()
}

fn stacked_loss(net: &Network, xs: &[Matrix], ys: &[Vec<f64>], weighted: bool) -> (f64, NetworkParams) {
    let mut preds = Vec::new();
    let mut caches = Vec::new();
    for x in xs {
        let (p, c) = net.forward_window(x).unwrap();
        preds.push(p);
        caches.push(c);
    }
    let out = if weighted {
        weighted_mse_loss(&preds, ys, &make_weights(net.spec.forward_look)).unwrap()
    } else {
        mse_loss(&preds, ys).unwrap()
    };
    let mut grads = NetworkParams::zeros(&net.spec);
    for (c, g) in caches.iter().zip(&out.grads) {
        net.backward_window_into(c, g, &mut grads).unwrap();
    }
    (out.loss, grads)
}

fn check_stacked(s: NetworkSpec, seed: u64, weighted: bool) {
    let mut rng = Rng::new(seed);
    let net = Network::new(s, &mut rng).unwrap();
    let xs = windows(&mut rng, 3, s.past_history, s.input_dim);
    let ys = targets(&mut rng, 3, s.forward_look);
    let (_, analytic) = stacked_loss(&net, &xs, &ys, weighted);
    let numeric = finite_diff_grad(
        |p: &NetworkParams| {
            let probe = Network {
                spec: s,
                params: p.clone(),
            };
            stacked_loss(&probe, &xs, &ys, weighted).0
        },
        &net.params,
        EPS,
    );
    let report = compare_gradients(&analytic, &numeric, REL_TOL, ABS_FLOOR);
    assert!(report.passed(), "{report:?}");
    assert_eq!(report.checked, net.params.param_count());
}

#[test]
fn stacked_two_layer_matches_finite_differences() {
    check_stacked(spec(Architecture::StackedLstm, 2, 4, 8, 2, 1), 7, false);
}

#[test]
fn stacked_single_layer_with_exogenous_column() {
    check_stacked(spec(Architecture::StackedLstm, 1, 3, 5, 3, 2), 17, true);
}

#[test]
fn stacked_three_layers() {
    check_stacked(spec(Architecture::StackedLstm, 3, 2, 4, 1, 1), 27, false);
}

fn encdec_loss(net: &Network, xs: &[Matrix], ys: &[Vec<f64>]) -> (f64, NetworkParams) {
    let mut preds = Vec::new();
    let mut caches = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        let (p, c) = net.encdec_forward(x, DecoderInput::TeacherForced(y)).unwrap();
        preds.push(p);
        caches.push(c);
    }
    let out = mse_loss(&preds, ys).unwrap();
    let mut grads = NetworkParams::zeros(&net.spec);
    for (c, g) in caches.iter().zip(&out.grads) {
        net.encdec_backward_into(c, g, &mut grads).unwrap();
    }
    (out.loss, grads)
}

#[test]
fn encoder_decoder_matches_finite_differences() {
    let s = spec(Architecture::EncoderDecoder, 1, 4, 6, 2, 1);
    let mut rng = Rng::new(7);
    let net = Network::new(s, &mut rng).unwrap();
    let xs = windows(&mut rng, 3, 6, 1);
    let ys = targets(&mut rng, 3, 2);
    let (_, analytic) = encdec_loss(&net, &xs, &ys);
    let numeric = finite_diff_grad(
        |p: &NetworkParams| {
            encdec_loss(
                &Network {
                    spec: s,
                    params: p.clone(),
                },
                &xs,
                &ys,
            )
            .0
        },
        &net.params,
        EPS,
    );
    let report = compare_gradients(&analytic, &numeric, REL_TOL, ABS_FLOOR);
    assert!(report.passed(), "{report:?}");

    // The decoder's loss reaches the encoder only through the handed-over state.
    let encoder_tensors = net.params.layers[0].tensors().len();
    let encoder_grad: f64 = analytic.tensors()[..encoder_tensors]
        .iter()
        .flat_map(|t| t.data().iter())
        .map(|v| v.abs())
        .sum();
    assert!(encoder_grad > 1e-6);
}

#[test]
fn deep_encoder_decoder_matches_finite_differences() {
    let s = spec(Architecture::EncoderDecoder, 2, 3, 4, 3, 1);
    let mut rng = Rng::new(99);
    let net = Network::new(s, &mut rng).unwrap();
    let xs = windows(&mut rng, 2, 4, 1);
    let ys = targets(&mut rng, 2, 3);
    let (_, analytic) = encdec_loss(&net, &xs, &ys);
    let numeric = finite_diff_grad(
        |p: &NetworkParams| {
            encdec_loss(
                &Network {
                    spec: s,
                    params: p.clone(),
                },
                &xs,
                &ys,
            )
            .0
        },
        &net.params,
        EPS,
    );
    assert!(compare_gradients(&analytic, &numeric, REL_TOL, ABS_FLOOR).passed());
}
