use std::fmt;
use std::str::FromStr;

use super::cell::{dot, layer_backward, layer_forward, LayerCache, LstmLayerParams, LstmState};
use crate::error::{Error, Result};
use crate::ndcore::{seeded_uniform, Matrix, Parameters, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    StackedLstm,
    EncoderDecoder,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::StackedLstm => "stacked_lstm",
            Architecture::EncoderDecoder => "encoder_decoder",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stacked_lstm" => Ok(Architecture::StackedLstm),
            "encoder_decoder" => Ok(Architecture::EncoderDecoder),
            other => Err(Error::arg(format!(
                "unknown architecture {other:?} (expected stacked_lstm or encoder_decoder)"
            ))),
        }
    }
}

/// Shape-determining description of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkSpec {
    pub architecture: Architecture,
    pub stack_depth: usize,
    pub units: usize,
    /// Feature count per timestep.
    pub input_dim: usize,
    pub past_history: usize,
    pub forward_look: usize,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stack_depth", self.stack_depth),
            ("units", self.units),
            ("input_dim", self.input_dim),
            ("past_history", self.past_history),
            ("forward_look", self.forward_look),
        ] {
            if v == 0 {
                return Err(Error::arg(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn layer_input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.units
        }
    }
}

/// Every learnable tensor of a network. Also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    /// The stack (the encoder for [`Architecture::EncoderDecoder`]).
    pub layers: Vec<LstmLayerParams>,
    /// Decoder layer, present only for the encoder-decoder.
    pub decoder: Option<LstmLayerParams>,
    /// `forward_look x units`.
    pub dense_weights: Matrix,
    /// `forward_look x 1`.
    pub dense_bias: Matrix,
}

pub type Gradients = NetworkParams;

/// Decoder input width: the decoder consumes one price per step.
const DECODER_INPUT_DIM: usize = 1;

impl NetworkParams {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        NetworkParams {
            layers: (0..spec.stack_depth)
                .map(|l| LstmLayerParams::zeros(spec.units, spec.layer_input_dim(l)))
                .collect(),
            decoder: (spec.architecture == Architecture::EncoderDecoder)
                .then(|| LstmLayerParams::zeros(spec.units, DECODER_INPUT_DIM)),
            dense_weights: Matrix::zeros(spec.forward_look, spec.units),
            dense_bias: Matrix::zeros(spec.forward_look, 1),
        }
    }

    /// Uniform in `[-1/sqrt(units), 1/sqrt(units))`, drawn layer by layer in
    /// tensor order, then the decoder, then the head.
    pub fn init(spec: &NetworkSpec, rng: &mut Rng) -> Self {
        let scale = 1.0 / (spec.units as f64).sqrt();
        let layers = (0..spec.stack_depth)
            .map(|l| LstmLayerParams::init(spec.units, spec.layer_input_dim(l), rng))
            .collect();
        let decoder = (spec.architecture == Architecture::EncoderDecoder)
            .then(|| LstmLayerParams::init(spec.units, DECODER_INPUT_DIM, rng));
        NetworkParams {
            layers,
            decoder,
            dense_weights: seeded_uniform(rng, spec.forward_look, spec.units, -scale, scale)
                .expect("positive scale"),
            dense_bias: seeded_uniform(rng, spec.forward_look, 1, -scale, scale)
                .expect("positive scale"),
        }
    }

    /// Names matching [`Parameters::tensors`] order.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            names.extend(LstmLayerParams::tensor_names(&format!("layer{l}")));
        }
        if self.decoder.is_some() {
            names.extend(LstmLayerParams::tensor_names("decoder"));
        }
        names.push("dense.weights".into());
        names.push("dense.bias".into());
        names
    }

    /// Checks that every tensor has the shape `spec` implies.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        let expect = NetworkParams::zeros(spec);
        let got = self.tensors();
        let want = expect.tensors();
        if got.len() != want.len() {
            return Err(Error::State(format!(
                "parameter tensor count {} does not match spec ({})",
                got.len(),
                want.len()
            )));
        }
        for ((g, w), name) in got.iter().zip(&want).zip(expect.tensor_names()) {
            if g.shape() != w.shape() {
                return Err(Error::State(format!(
                    "tensor {name} has shape {:?}, spec implies {:?}",
                    g.shape(),
                    w.shape()
                )));
            }
        }
        Ok(())
    }
}

impl Parameters for NetworkParams {
    fn tensors(&self) -> Vec<&Matrix> {
        let mut out: Vec<&Matrix> = self.layers.iter().flat_map(|l| l.tensors()).collect();
        if let Some(d) = &self.decoder {
            out.extend(d.tensors());
        }
        out.push(&self.dense_weights);
        out.push(&self.dense_bias);
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = self
            .layers
            .iter_mut()
            .flat_map(|l| l.tensors_mut())
            .collect();
        if let Some(d) = &mut self.decoder {
            out.extend(d.tensors_mut());
        }
        out.push(&mut self.dense_weights);
        out.push(&mut self.dense_bias);
        out
    }
}

/// Per-layer records of a stacked forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCache {
    pub layers: Vec<LayerCache>,
}

/// Decoder feeding for [`Network::encdec_forward`].
#[derive(Clone, Copy, Debug)]
pub enum DecoderInput<'a> {
    /// Training: step `k > 0` consumes the true value for step `k - 1`.
    TeacherForced(&'a [f64]),
    /// Inference: step `k > 0` consumes the decoder's own output for `k - 1`.
    SelfFeeding,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncDecCache {
    pub encoder: Vec<LayerCache>,
    pub decoder: LayerCache,
    pub teacher_forced: bool,
}

/// A network: its shape description plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    pub params: NetworkParams,
}

impl Network {
    pub fn new(spec: NetworkSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        Ok(Network {
            spec,
            params: NetworkParams::init(&spec, rng),
        })
    }

    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Network {
            spec,
            params: NetworkParams::zeros(&spec),
        })
    }

    /// Wraps existing parameters after checking them against `spec`.
    pub fn from_parts(spec: NetworkSpec, params: NetworkParams) -> Result<Self> {
        spec.validate()?;
        params.check_against(&spec)?;
        Ok(Network { spec, params })
    }

    fn check_window(&self, window: &Matrix) -> Result<()> {
        let want = (self.spec.past_history, self.spec.input_dim);
        if window.shape() != want {
            return Err(Error::Shape {
                op: "input window",
                left: want,
                right: window.shape(),
            });
        }
        Ok(())
    }

    fn run_stack(&self, window: &Matrix) -> Vec<LayerCache> {
        let mut inputs: Vec<Vec<f64>> = (0..window.rows()).map(|r| window.row(r).to_vec()).collect();
        let mut caches = Vec::with_capacity(self.params.layers.len());
        for layer in &self.params.layers {
            let cache = layer_forward(&inputs, LstmState::zeros(self.spec.units), layer);
            inputs = cache.hidden_sequence();
            caches.push(cache);
        }
        caches
    }

    fn head(&self, row: usize, h: &[f64]) -> f64 {
        self.params.dense_bias.data()[row] + dot(self.params.dense_weights.row(row), h)
    }

    /// Stacked many-to-one forward pass over one `past_history x input_dim` window.
    pub fn forward_window(&self, window: &Matrix) -> Result<(Vec<f64>, ForwardCache)> {
        if self.spec.architecture != Architecture::StackedLstm {
            return Err(Error::arg(
                "forward_window applies to stacked_lstm; use encdec_forward",
            ));
        }
        self.check_window(window)?;
        let layers = self.run_stack(window);
        let top = &layers.last().expect("stack_depth >= 1").steps;
        let h_last = &top.last().expect("past_history >= 1").h;
        let pred = (0..self.spec.forward_look).map(|k| self.head(k, h_last)).collect();
        Ok((pred, ForwardCache { layers }))
    }

    /// Gradient of the loss with respect to every parameter, given
    /// `grad_prediction = dL/dprediction` and the cache of the forward pass.
    pub fn backward_window(&self, cache: &ForwardCache, grad_prediction: &[f64]) -> Result<Gradients> {
        let mut grads = NetworkParams::zeros(&self.spec);
        self.backward_window_into(cache, grad_prediction, &mut grads)?;
        Ok(grads)
    }

    /// Like [`Network::backward_window`], accumulating into `grads`.
    pub fn backward_window_into(
        &self,
        cache: &ForwardCache,
        grad_prediction: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        if self.spec.architecture != Architecture::StackedLstm {
            return Err(Error::State("backward_window on an encoder-decoder".into()));
        }
        self.check_grad_len(grad_prediction)?;
        self.check_stack_cache(&cache.layers)?;
        let h_last = &cache.layers.last().unwrap().steps.last().unwrap().h;

        let units = self.spec.units;
        let mut dh_last = vec![0.0; units];
        for (k, &g) in grad_prediction.iter().enumerate() {
            grads.dense_bias.data_mut()[k] += g;
            let w = self.params.dense_weights.row(k);
            for ((gw, dh), (&wv, &h)) in grads
                .dense_weights
                .row_mut(k)
                .iter_mut()
                .zip(dh_last.iter_mut())
                .zip(w.iter().zip(h_last))
            {
                *gw += g * h;
                *dh += wv * g;
            }
        }
        self.backward_stack(&cache.layers, None, dh_last, vec![0.0; units], grads);
        Ok(())
    }

    fn check_grad_len(&self, grad_prediction: &[f64]) -> Result<()> {
        if grad_prediction.len() != self.spec.forward_look {
            return Err(Error::Shape {
                op: "grad_prediction",
                left: (self.spec.forward_look, 1),
                right: (grad_prediction.len(), 1),
            });
        }
        Ok(())
    }

    fn check_stack_cache(&self, layers: &[LayerCache]) -> Result<()> {
        if layers.len() != self.params.layers.len() {
            return Err(Error::State(format!(
                "cache has {} layers, network has {}",
                layers.len(),
                self.params.layers.len()
            )));
        }
        for (l, c) in layers.iter().enumerate() {
            if c.steps.len() != self.spec.past_history {
                return Err(Error::State(format!(
                    "layer {l} cache has {} steps, expected {}",
                    c.steps.len(),
                    self.spec.past_history
                )));
            }
            let want_in = self.spec.layer_input_dim(l);
            if c.steps.iter().any(|r| r.h.len() != self.spec.units || r.x.len() != want_in) {
                return Err(Error::State(format!("layer {l} cache widths do not match params")));
            }
        }
        Ok(())
    }

    /// Backpropagates from the top of the stack down to the input.
    fn backward_stack(
        &self,
        caches: &[LayerCache],
        top_dh_seq: Option<Vec<Vec<f64>>>,
        top_dh_last: Vec<f64>,
        top_dc_last: Vec<f64>,
        grads: &mut Gradients,
    ) {
        let zeros = vec![0.0; self.spec.units];
        let mut dh_seq = top_dh_seq;
        let mut dh_last = top_dh_last;
        let mut dc_last = top_dc_last;
        for l in (0..caches.len()).rev() {
            let out = layer_backward(
                &caches[l],
                &self.params.layers[l],
                dh_seq.as_deref(),
                &dh_last,
                &dc_last,
                &mut grads.layers[l],
            );
            dh_seq = Some(out.dx);
            dh_last = zeros.clone();
            dc_last = zeros.clone();
        }
    }

    /// Encoder-decoder forward pass over a `past_history x input_dim` history.
    pub fn encdec_forward(&self, history: &Matrix, input: DecoderInput<'_>) -> Result<(Vec<f64>, EncDecCache)> {
        let decoder = match (&self.params.decoder, self.spec.architecture) {
            (Some(d), Architecture::EncoderDecoder) => d,
            _ => return Err(Error::arg("encdec_forward requires an encoder_decoder network")),
        };
        self.check_window(history)?;
        let n = self.spec.forward_look;
        if let DecoderInput::TeacherForced(t) = input {
            if t.len() != n {
                return Err(Error::arg(format!(
                    "teacher sequence has {} values, forward_look is {n}",
                    t.len()
                )));
            }
        }

        let encoder = self.run_stack(history);
        let mut state = encoder.last().expect("stack_depth >= 1").final_state();
        let seed = history.get(history.rows() - 1, 0);

        let mut decoder_cache = LayerCache {
            initial: state.clone(),
            steps: Vec::with_capacity(n),
        };
        let mut pred = Vec::with_capacity(n);
        let mut next_input = seed;
        for k in 0..n {
            let step = layer_forward(&[vec![next_input]], state, decoder);
            let rec = step.steps.into_iter().next().expect("one step");
            let y = self.head(k, &rec.h);
            state = LstmState {
                h: rec.h.clone(),
                c: rec.c.clone(),
            };
            decoder_cache.steps.push(rec);
            pred.push(y);
            next_input = match input {
                DecoderInput::TeacherForced(t) => t[k],
                DecoderInput::SelfFeeding => y,
            };
        }
        let cache = EncDecCache {
            encoder,
            decoder: decoder_cache,
            teacher_forced: matches!(input, DecoderInput::TeacherForced(_)),
        };
        Ok((pred, cache))
    }

    /// Gradients of a teacher-forced encoder-decoder pass.
    pub fn encdec_backward(&self, cache: &EncDecCache, grad_prediction: &[f64]) -> Result<Gradients> {
        let mut grads = NetworkParams::zeros(&self.spec);
        self.encdec_backward_into(cache, grad_prediction, &mut grads)?;
        Ok(grads)
    }

    pub fn encdec_backward_into(
        &self,
        cache: &EncDecCache,
        grad_prediction: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        let decoder = self
            .params
            .decoder
            .as_ref()
            .ok_or_else(|| Error::State("encdec_backward on a stacked network".into()))?;
        if !cache.teacher_forced {
            return Err(Error::State(
                "encdec_backward supports only teacher-forced caches".into(),
            ));
        }
        self.check_grad_len(grad_prediction)?;
        self.check_stack_cache(&cache.encoder)?;
        if cache.decoder.steps.len() != self.spec.forward_look {
            return Err(Error::State(format!(
                "decoder cache has {} steps, expected {}",
                cache.decoder.steps.len(),
                self.spec.forward_look
            )));
        }

        let units = self.spec.units;
        let mut dh_seq = vec![vec![0.0; units]; self.spec.forward_look];
        for (k, &g) in grad_prediction.iter().enumerate() {
            let h = &cache.decoder.steps[k].h;
            grads.dense_bias.data_mut()[k] += g;
            let w = self.params.dense_weights.row(k);
            for ((gw, dh), (&wv, &hv)) in grads
                .dense_weights
                .row_mut(k)
                .iter_mut()
                .zip(dh_seq[k].iter_mut())
                .zip(w.iter().zip(h))
            {
                *gw += g * hv;
                *dh += wv * g;
            }
        }
        let zeros = vec![0.0; units];
        let dec_grads = grads.decoder.as_mut().expect("grads shaped like params");
        let out = layer_backward(&cache.decoder, decoder, Some(&dh_seq), &zeros, &zeros, dec_grads);
        self.backward_stack(&cache.encoder, None, out.dh0, out.dc0, grads);
        Ok(())
    }

    /// Inference-mode prediction for either architecture.
    pub fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        match self.spec.architecture {
            Architecture::StackedLstm => Ok(self.forward_window(window)?.0),
            Architecture::EncoderDecoder => Ok(self.encdec_forward(window, DecoderInput::SelfFeeding)?.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::lstm_cell_forward;

    fn spec(arch: Architecture, depth: usize, units: usize, ph: usize, fl: usize) -> NetworkSpec {
        NetworkSpec {
            architecture: arch,
            stack_depth: depth,
            units,
            input_dim: 1,
            past_history: ph,
            forward_look: fl,
        }
    }

    fn random_window(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        seeded_uniform(rng, rows, cols, 0.0, 1.0).unwrap()
    }

    /// Independent stack evaluation: cell by cell, layer by layer, via the
    /// public single-step API and a hand-written head.
    fn reference_stacked(net: &Network, window: &Matrix) -> Vec<f64> {
        let mut seq: Vec<Vec<f64>> = (0..window.rows()).map(|r| window.row(r).to_vec()).collect();
        for layer in &net.params.layers {
            let mut state = LstmState::zeros(net.spec.units);
            let mut out = Vec::new();
            for x in &seq {
                state = lstm_cell_forward(x, &state, layer).unwrap().0;
                out.push(state.h.clone());
            }
            seq = out;
        }
        let h = seq.last().unwrap();
        (0..net.spec.forward_look)
            .map(|k| {
                let mut s = 0.0;
                for j in 0..net.spec.units {
                    s += net.params.dense_weights.get(k, j) * h[j];
                }
                net.params.dense_bias.get(k, 0) + s
            })
            .collect()
    }

    #[test]
    fn zero_network_predicts_bias() {
        let s = spec(Architecture::StackedLstm, 2, 3, 5, 2);
        let mut net = Network::zeros(s).unwrap();
        net.params.dense_bias = Matrix::column(&[0.25, -1.5]);
        let w = random_window(&mut Rng::new(1), 5, 1);
        assert_eq!(net.forward_window(&w).unwrap().0, vec![0.25, -1.5]);
    }

    #[test]
    fn single_layer_matches_manual_loop() {
        let mut rng = Rng::new(2);
        let net = Network::new(spec(Architecture::StackedLstm, 1, 4, 7, 3), &mut rng).unwrap();
        let w = random_window(&mut rng, 7, 1);
        assert_eq!(net.forward_window(&w).unwrap().0, reference_stacked(&net, &w));
    }

    #[test]
    fn two_layer_matches_reference() {
        let mut rng = Rng::new(3);
        let mut s = spec(Architecture::StackedLstm, 2, 5, 9, 2);
        s.input_dim = 2;
        let net = Network::new(s, &mut rng).unwrap();
        for _ in 0..5 {
            let w = random_window(&mut rng, 9, 2);
            let got = net.forward_window(&w).unwrap().0;
            let want = reference_stacked(&net, &w);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = Rng::new(4);
        let net = Network::new(spec(Architecture::StackedLstm, 2, 4, 6, 1), &mut rng).unwrap();
        let w = random_window(&mut rng, 6, 1);
        assert_eq!(net.forward_window(&w).unwrap(), net.forward_window(&w).unwrap());
    }

    #[test]
    fn output_depends_on_row_order() {
        let mut rng = Rng::new(5);
        let net = Network::new(spec(Architecture::StackedLstm, 1, 4, 6, 1), &mut rng).unwrap();
        let w = random_window(&mut rng, 6, 1);
        let mut reversed = w.clone();
        for r in 0..6 {
            reversed.set(r, 0, w.get(5 - r, 0));
        }
        assert_ne!(net.forward_window(&w).unwrap().0, net.forward_window(&reversed).unwrap().0);
    }

    #[test]
    fn wrong_window_shape_is_shape_error() {
        let net = Network::zeros(spec(Architecture::StackedLstm, 1, 2, 4, 1)).unwrap();
        assert!(matches!(
            net.forward_window(&Matrix::zeros(3, 1)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let mut rng = Rng::new(6);
        let net = Network::new(spec(Architecture::StackedLstm, 2, 3, 5, 2), &mut rng).unwrap();
        let (_, cache) = net.forward_window(&random_window(&mut rng, 5, 1)).unwrap();
        let g = net.backward_window(&cache, &[0.0, 0.0]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_are_linear_in_upstream() {
        let mut rng = Rng::new(7);
        let net = Network::new(spec(Architecture::StackedLstm, 2, 3, 5, 2), &mut rng).unwrap();
        let (_, cache) = net.forward_window(&random_window(&mut rng, 5, 1)).unwrap();
        let g1 = net.backward_window(&cache, &[0.3, -0.7]).unwrap().flatten();
        let g2 = net.backward_window(&cache, &[0.6, -1.4]).unwrap().flatten();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn mismatched_cache_is_state_error() {
        let mut rng = Rng::new(8);
        let small = Network::new(spec(Architecture::StackedLstm, 1, 3, 5, 1), &mut rng).unwrap();
        let deep = Network::new(spec(Architecture::StackedLstm, 2, 3, 5, 1), &mut rng).unwrap();
        let (_, cache) = small.forward_window(&random_window(&mut rng, 5, 1)).unwrap();
        assert!(matches!(deep.backward_window(&cache, &[1.0]), Err(Error::State(_))));
    }

    #[test]
    fn encdec_single_step_modes_agree() {
        let mut rng = Rng::new(9);
        let net = Network::new(spec(Architecture::EncoderDecoder, 1, 4, 6, 1), &mut rng).unwrap();
        let w = random_window(&mut rng, 6, 1);
        let (a, _) = net.encdec_forward(&w, DecoderInput::TeacherForced(&[0.9])).unwrap();
        let (b, _) = net.encdec_forward(&w, DecoderInput::SelfFeeding).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn encdec_zero_network_predicts_bias() {
        let mut net = Network::zeros(spec(Architecture::EncoderDecoder, 1, 3, 4, 3)).unwrap();
        net.params.dense_bias = Matrix::column(&[0.1, 0.2, 0.3]);
        let w = random_window(&mut Rng::new(10), 4, 1);
        let (p, _) = net.encdec_forward(&w, DecoderInput::SelfFeeding).unwrap();
        assert_eq!(p, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn encdec_self_feeding_matches_hand_unroll() {
        let mut rng = Rng::new(11);
        let net = Network::new(spec(Architecture::EncoderDecoder, 1, 4, 6, 3), &mut rng).unwrap();
        let w = random_window(&mut rng, 6, 1);
        let (got, _) = net.encdec_forward(&w, DecoderInput::SelfFeeding).unwrap();

        let mut state = LstmState::zeros(4);
        for r in 0..6 {
            state = lstm_cell_forward(w.row(r), &state, &net.params.layers[0]).unwrap().0;
        }
        let dec = net.params.decoder.as_ref().unwrap();
        let mut x = w.get(5, 0);
        let mut want = Vec::new();
        for k in 0..3 {
            state = lstm_cell_forward(&[x], &state, dec).unwrap().0;
            let mut y = 0.0;
            for j in 0..4 {
                y += net.params.dense_weights.get(k, j) * state.h[j];
            }
            y += net.params.dense_bias.get(k, 0);
            want.push(y);
            x = y;
        }
        assert_eq!(got, want);
    }

    #[test]
    fn encdec_train_mode_requires_matching_teacher() {
        let mut rng = Rng::new(12);
        let net = Network::new(spec(Architecture::EncoderDecoder, 1, 2, 3, 2), &mut rng).unwrap();
        let w = random_window(&mut rng, 3, 1);
        assert!(matches!(
            net.encdec_forward(&w, DecoderInput::TeacherForced(&[1.0])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn encdec_backward_rejects_self_fed_cache() {
        let mut rng = Rng::new(13);
        let net = Network::new(spec(Architecture::EncoderDecoder, 1, 2, 3, 2), &mut rng).unwrap();
        let (_, cache) = net
            .encdec_forward(&random_window(&mut rng, 3, 1), DecoderInput::SelfFeeding)
            .unwrap();
        assert!(matches!(net.encdec_backward(&cache, &[1.0, 1.0]), Err(Error::State(_))));
    }

    #[test]
    fn encdec_zero_upstream_gives_zero() {
        let mut rng = Rng::new(14);
        let net = Network::new(spec(Architecture::EncoderDecoder, 2, 3, 4, 2), &mut rng).unwrap();
        let w = random_window(&mut rng, 4, 1);
        let (_, cache) = net.encdec_forward(&w, DecoderInput::TeacherForced(&[0.2, 0.4])).unwrap();
        let g = net.encdec_backward(&cache, &[0.0, 0.0]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tensor_names_align_with_tensors() {
        let s = spec(Architecture::EncoderDecoder, 2, 3, 4, 2);
        let p = NetworkParams::zeros(&s);
        assert_eq!(p.tensor_names().len(), p.tensors().len());
        assert_eq!(p.tensors().len(), 12 * 3 + 2);
    }
}
