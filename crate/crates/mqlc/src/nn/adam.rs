//! Adam updates over a [`ParameterSet`].

use std::collections::BTreeMap;

use super::params::ParameterSet;
use super::tensor::Tensor;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First/second moment accumulators, keyed like the parameter set.
#[derive(Clone, Debug, Default)]
pub struct AdamState {
    m: BTreeMap<String, Tensor>,
    v: BTreeMap<String, Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One Adam step. Parameters without a gradient entry are left unchanged.
pub fn adam_step(
    params: &mut ParameterSet,
    grads: &BTreeMap<String, Tensor>,
    lr: f64,
    state: &mut AdamState,
) {
    state.t += 1;
    let bc1 = 1.0 - BETA1.powi(state.t as i32);
    let bc2 = 1.0 - BETA2.powi(state.t as i32);
    for (name, tensor) in params.iter_mut() {
        let Some(grad) = grads.get(name) else { continue };
        assert_eq!(grad.shape(), tensor.shape(), "gradient shape for {name}");
        let m = state
            .m
            .entry(name.to_string())
            .or_insert_with(|| Tensor::zeros(tensor.rows(), tensor.cols()));
        let v = state
            .v
            .entry(name.to_string())
            .or_insert_with(|| Tensor::zeros(tensor.rows(), tensor.cols()));
        let data = tensor.data_mut();
        for i in 0..data.len() {
            let g = grad.data()[i];
            let mi = BETA1 * m.data()[i] + (1.0 - BETA1) * g;
            let vi = BETA2 * v.data()[i] + (1.0 - BETA2) * g * g;
            m.data_mut()[i] = mi;
            v.data_mut()[i] = vi;
            let m_hat = mi / bc1;
            let v_hat = vi / bc2;
            data[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}
