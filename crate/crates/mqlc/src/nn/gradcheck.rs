//! Central finite-difference verification of analytic gradients.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::params::ParameterSet;
use super::tensor::Tensor;

const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn pass(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Compare analytic gradients against central differences with step 1e-5.
///
/// `loss` evaluates the scalar loss for a parameter set; `loss_and_grads`
/// additionally returns analytic gradients from one backward pass. Every
/// element is perturbed when the set is small; past `max_per_tensor`
/// elements per tensor a seeded subsample is checked instead.
pub fn grad_check<L, G>(
    params: &ParameterSet,
    loss: L,
    loss_and_grads: G,
    tolerance: f64,
    max_per_tensor: usize,
    seed: u64,
) -> GradCheckReport
where
    L: Fn(&ParameterSet) -> f64,
    G: Fn(&ParameterSet) -> (f64, BTreeMap<String, Tensor>),
{
    let (_, analytic) = loss_and_grads(params);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut work = params.clone();
    let mut max_rel: f64 = 0.0;
    let mut checked = 0;

    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in names {
        let len = params.get(&name).unwrap().len();
        let mut indices: Vec<usize> = (0..len).collect();
        if len > max_per_tensor {
            indices.shuffle(&mut rng);
            indices.truncate(max_per_tensor);
        }
        for idx in indices {
            let original = params.get(&name).unwrap().data()[idx];

            work.get_mut(&name).unwrap().data_mut()[idx] = original + FD_STEP;
            let plus = loss(&work);
            work.get_mut(&name).unwrap().data_mut()[idx] = original - FD_STEP;
            let minus = loss(&work);
            work.get_mut(&name).unwrap().data_mut()[idx] = original;

            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let exact = analytic[&name].data()[idx];
            let denom = exact.abs().max(numeric.abs()) + 1e-6;
            let rel = (exact - numeric).abs() / denom;
            if rel > max_rel {
                max_rel = rel;
            }
            checked += 1;
        }
    }

    GradCheckReport {
        max_rel_error: max_rel,
        checked,
        tolerance,
    }
}
