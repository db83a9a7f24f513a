use crate::error::{Error, Result};
use crate::ndcore::{Matrix, Parameters};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators, shaped like the parameters they track.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl AdamState {
    pub fn new(params: &dyn Parameters, config: AdamConfig) -> Self {
        let zeros: Vec<Matrix> = params
            .tensors()
            .iter()
            .map(|t| Matrix::zeros(t.rows(), t.cols()))
            .collect();
        AdamState {
            config,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }
}

/// One bias-corrected Adam update, applied in place.
pub fn adam_step(params: &mut dyn Parameters, grads: &dyn Parameters, state: &mut AdamState) -> Result<()> {
    let g_tensors = grads.tensors();
    {
        let p_tensors = params.tensors();
        let consistent = p_tensors.len() == g_tensors.len()
            && p_tensors.len() == state.first.len()
            && p_tensors
                .iter()
                .zip(&g_tensors)
                .zip(&state.first)
                .all(|((p, g), m)| p.shape() == g.shape() && p.shape() == m.shape());
        if !consistent {
            return Err(Error::Shape {
                op: "adam_step",
                left: (p_tensors.len(), params.param_count()),
                right: (g_tensors.len(), grads.param_count()),
            });
        }
    }

    state.step += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);

    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(g_tensors)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        for (((p, &g), m), v) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}
