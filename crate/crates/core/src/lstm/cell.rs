//! A single LSTM layer: the gated cell update and its backward pass through time.
//!
//! Per timestep, with `σ` the logistic function:
//!
//! ```text
//! f = σ(W_f x + U_f h_prev + b_f)        forget gate
//! i = σ(W_i x + U_i h_prev + b_i)        input gate
//! o = σ(W_o x + U_o h_prev + b_o)        output gate
//! g = tanh(W_c x + U_c h_prev + b_c)     candidate cell input
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ tanh(c)
//! ```

use crate::error::{Error, Result};
use crate::ndcore::{seeded_uniform, sigmoid, Matrix, Rng};

/// Weights and bias feeding one gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    /// `units x input_dim`, applied to the layer input.
    pub input_weights: Matrix,
    /// `units x units`, applied to the previous hidden state.
    pub recurrent_weights: Matrix,
    /// `units x 1`.
    pub bias: Matrix,
}

impl GateParams {
    fn zeros(units: usize, input_dim: usize) -> Self {
        GateParams {
            input_weights: Matrix::zeros(units, input_dim),
            recurrent_weights: Matrix::zeros(units, units),
            bias: Matrix::zeros(units, 1),
        }
    }

    fn init(units: usize, input_dim: usize, rng: &mut Rng, scale: f64) -> Self {
        let u = |r, c, rng: &mut Rng| seeded_uniform(rng, r, c, -scale, scale).expect("scale > 0");
        GateParams {
            input_weights: u(units, input_dim, rng),
            recurrent_weights: u(units, units, rng),
            bias: u(units, 1, rng),
        }
    }

    /// Pre-activation `W x + U h + b` for unit `j`.
    #[inline]
    fn pre_activation(&self, j: usize, x: &[f64], h: &[f64]) -> f64 {
        let mut z = self.bias.data()[j];
        z += dot(self.input_weights.row(j), x);
        z += dot(self.recurrent_weights.row(j), h);
        z
    }
}

/// Parameters of one LSTM layer, grouped by gate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayerParams {
    pub forget: GateParams,
    pub input: GateParams,
    pub output: GateParams,
    pub candidate: GateParams,
}

impl LstmLayerParams {
    pub fn zeros(units: usize, input_dim: usize) -> Self {
        LstmLayerParams {
            forget: GateParams::zeros(units, input_dim),
            input: GateParams::zeros(units, input_dim),
            output: GateParams::zeros(units, input_dim),
            candidate: GateParams::zeros(units, input_dim),
        }
    }

    /// Uniform initialization in `[-1/sqrt(units), 1/sqrt(units))`.
    pub fn init(units: usize, input_dim: usize, rng: &mut Rng) -> Self {
        let scale = 1.0 / (units as f64).sqrt();
        LstmLayerParams {
            forget: GateParams::init(units, input_dim, rng, scale),
            input: GateParams::init(units, input_dim, rng, scale),
            output: GateParams::init(units, input_dim, rng, scale),
            candidate: GateParams::init(units, input_dim, rng, scale),
        }
    }

    pub fn units(&self) -> usize {
        self.forget.input_weights.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.forget.input_weights.cols()
    }

    pub(crate) fn gates(&self) -> [&GateParams; 4] {
        [&self.forget, &self.input, &self.output, &self.candidate]
    }

    pub(crate) fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.output,
            &mut self.candidate,
        ]
    }

    /// The twelve tensors in gate-major order (forget, input, output,
    /// candidate), each as input weights, recurrent weights, bias.
    pub fn tensors(&self) -> Vec<&Matrix> {
        self.gates()
            .into_iter()
            .flat_map(|g| [&g.input_weights, &g.recurrent_weights, &g.bias])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        self.gates_mut()
            .into_iter()
            .flat_map(|g| [&mut g.input_weights, &mut g.recurrent_weights, &mut g.bias])
            .collect()
    }

    pub fn tensor_names(prefix: &str) -> Vec<String> {
        let mut names = Vec::with_capacity(12);
        for gate in ["forget", "input", "output", "candidate"] {
            for part in ["input_weights", "recurrent_weights", "bias"] {
                names.push(format!("{prefix}.{gate}.{part}"));
            }
        }
        names
    }

    fn check_consistent(&self) -> Result<()> {
        let (units, input_dim) = (self.units(), self.input_dim());
        for g in self.gates() {
            let expect = [(units, input_dim), (units, units), (units, 1)];
            let got = [
                g.input_weights.shape(),
                g.recurrent_weights.shape(),
                g.bias.shape(),
            ];
            for (e, s) in expect.iter().zip(got) {
                if *e != s {
                    return Err(Error::Shape {
                        op: "lstm layer params",
                        left: *e,
                        right: s,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Hidden and cell state carried between timesteps.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(units: usize) -> Self {
        LstmState {
            h: vec![0.0; units],
            c: vec![0.0; units],
        }
    }
}

/// Everything one cell update computed, kept for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct GateRecord {
    pub x: Vec<f64>,
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub candidate: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// One layer's unrolled forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCache {
    pub initial: LstmState,
    pub steps: Vec<GateRecord>,
}

impl LayerCache {
    pub fn final_state(&self) -> LstmState {
        match self.steps.last() {
            Some(r) => LstmState {
                h: r.h.clone(),
                c: r.c.clone(),
            },
            None => self.initial.clone(),
        }
    }

    pub fn hidden_sequence(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|r| r.h.clone()).collect()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Single timestep of the cell.
pub fn lstm_cell_forward(
    x: &[f64],
    prev: &LstmState,
    p: &LstmLayerParams,
) -> Result<(LstmState, GateRecord)> {
    p.check_consistent()?;
    let units = p.units();
    if x.len() != p.input_dim() {
        return Err(Error::Shape {
            op: "lstm_cell_forward input",
            left: (p.input_dim(), 1),
            right: (x.len(), 1),
        });
    }
    if prev.h.len() != units || prev.c.len() != units {
        return Err(Error::Shape {
            op: "lstm_cell_forward state",
            left: (units, units),
            right: (prev.h.len(), prev.c.len()),
        });
    }
    let rec = cell_step(x, &prev.h, &prev.c, p);
    let state = LstmState {
        h: rec.h.clone(),
        c: rec.c.clone(),
    };
    Ok((state, rec))
}

fn cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &LstmLayerParams) -> GateRecord {
    let units = p.units();
    let mut rec = GateRecord {
        x: x.to_vec(),
        forget: vec![0.0; units],
        input: vec![0.0; units],
        output: vec![0.0; units],
        candidate: vec![0.0; units],
        c: vec![0.0; units],
        tanh_c: vec![0.0; units],
        h: vec![0.0; units],
    };
    for j in 0..units {
        let f = sigmoid(p.forget.pre_activation(j, x, h_prev));
        let i = sigmoid(p.input.pre_activation(j, x, h_prev));
        let o = sigmoid(p.output.pre_activation(j, x, h_prev));
        let g = p.candidate.pre_activation(j, x, h_prev).tanh();
        let c = f * c_prev[j] + i * g;
        let tc = c.tanh();
        rec.forget[j] = f;
        rec.input[j] = i;
        rec.output[j] = o;
        rec.candidate[j] = g;
        rec.c[j] = c;
        rec.tanh_c[j] = tc;
        rec.h[j] = o * tc;
    }
    rec
}

/// Runs the layer over `inputs` starting from `initial`. Shapes are assumed
/// checked by the caller.
pub(crate) fn layer_forward(inputs: &[Vec<f64>], initial: LstmState, p: &LstmLayerParams) -> LayerCache {
    let mut steps: Vec<GateRecord> = Vec::with_capacity(inputs.len());
    for x in inputs {
        let rec = match steps.last() {
            Some(prev) => cell_step(x, &prev.h, &prev.c, p),
            None => cell_step(x, &initial.h, &initial.c, p),
        };
        steps.push(rec);
    }
    LayerCache { initial, steps }
}

/// Gradients flowing out of a layer's backward pass.
pub(crate) struct LayerBackward {
    /// Gradient with respect to each step's input `x_t`.
    pub dx: Vec<Vec<f64>>,
    /// Gradient with respect to the initial hidden state.
    pub dh0: Vec<f64>,
    /// Gradient with respect to the initial cell state.
    pub dc0: Vec<f64>,
}

/// Backpropagation through time for one layer.
///
/// `dh_seq[t]` is the upstream gradient on `h_t` (from the layer above or a
/// per-step head), `dh_last`/`dc_last` are extra gradients on the final state.
/// Parameter gradients are accumulated into `grads`.
pub(crate) fn layer_backward(
    cache: &LayerCache,
    p: &LstmLayerParams,
    dh_seq: Option<&[Vec<f64>]>,
    dh_last: &[f64],
    dc_last: &[f64],
    grads: &mut LstmLayerParams,
) -> LayerBackward {
    let units = p.units();
    let input_dim = p.input_dim();
    let steps = cache.steps.len();

    let mut dh_next = dh_last.to_vec();
    let mut dc_next = dc_last.to_vec();
    let mut dx = vec![vec![0.0; input_dim]; steps];
    let mut dz = [
        vec![0.0; units],
        vec![0.0; units],
        vec![0.0; units],
        vec![0.0; units],
    ];

    for t in (0..steps).rev() {
        let rec = &cache.steps[t];
        let (h_prev, c_prev) = if t > 0 {
            (&cache.steps[t - 1].h, &cache.steps[t - 1].c)
        } else {
            (&cache.initial.h, &cache.initial.c)
        };

        for j in 0..units {
            let mut dh = dh_next[j];
            if let Some(seq) = dh_seq {
                dh += seq[t][j];
            }
            let (f, i, o, g, tc) = (
                rec.forget[j],
                rec.input[j],
                rec.output[j],
                rec.candidate[j],
                rec.tanh_c[j],
            );
            let d_out = dh * tc;
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            dz[0][j] = dc * c_prev[j] * f * (1.0 - f);
            dz[1][j] = dc * g * i * (1.0 - i);
            dz[2][j] = d_out * o * (1.0 - o);
            dz[3][j] = dc * i * (1.0 - g * g);
            dc_next[j] = dc * f;
        }

        let dh_prev = &mut dh_next;
        dh_prev.iter_mut().for_each(|v| *v = 0.0);
        let dx_t = &mut dx[t];
        for ((gate, grad), dz) in p.gates().into_iter().zip(grads.gates_mut()).zip(&dz) {
            let w = gate.input_weights.data();
            let u = gate.recurrent_weights.data();
            let gw = grad.input_weights.data_mut();
            for j in 0..units {
                let d = dz[j];
                if d == 0.0 {
                    continue;
                }
                let row = j * input_dim..(j + 1) * input_dim;
                for ((gw, w), (x, dxk)) in gw[row.clone()]
                    .iter_mut()
                    .zip(&w[row])
                    .zip(rec.x.iter().zip(dx_t.iter_mut()))
                {
                    *gw += d * x;
                    *dxk += w * d;
                }
            }
            let gu = grad.recurrent_weights.data_mut();
            for j in 0..units {
                let d = dz[j];
                if d == 0.0 {
                    continue;
                }
                let row = j * units..(j + 1) * units;
                for ((gu, u), (hp, dhk)) in gu[row.clone()]
                    .iter_mut()
                    .zip(&u[row])
                    .zip(h_prev.iter().zip(dh_prev.iter_mut()))
                {
                    *gu += d * hp;
                    *dhk += u * d;
                }
            }
            for (gb, d) in grad.bias.data_mut().iter_mut().zip(dz) {
                *gb += d;
            }
        }
    }

    LayerBackward {
        dx,
        dh0: dh_next,
        dc0: dc_next,
    }
}
