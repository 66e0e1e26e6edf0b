//! Layer-level forward ops on the tape.

use std::rc::Rc;

use super::adjacency::AdjacencyMatrix;
use super::tape::{Graph, Var};
use super::tensor::Tensor;
use super::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Tanh,
}

fn activate(g: &mut Graph, x: Var, act: Activation) -> Var {
    match act {
        Activation::Linear => x,
        Activation::Relu => g.relu(x),
        Activation::Sigmoid => g.sigmoid(x),
        Activation::Tanh => g.tanh(x),
    }
}

/// `activation(x W + b)` for a batch of row vectors.
pub fn fc_forward(g: &mut Graph, x: Var, w: Var, b: Var, act: Activation) -> Result<Var, NnError> {
    let (xr, xc) = g.value(x).shape();
    let (wr, wc) = g.value(w).shape();
    let (br, bc) = g.value(b).shape();
    if xc != wr || br != 1 || bc != wc {
        return Err(NnError::ShapeMismatch(format!(
            "fc_forward: x {xr}x{xc}, w {wr}x{wc}, b {br}x{bc}"
        )));
    }
    let z = g.matmul(x, w);
    let z = g.add_row(z, b);
    let out = activate(g, z, act);
    if let Some(op) = g.poisoned() {
        return Err(NnError::NonFinite(op));
    }
    Ok(out)
}

/// Graph convolution `activation(Â H W)` applied blockwise: `h` stacks one
/// node-feature block per adjacency matrix.
pub fn gcn_forward(
    g: &mut Graph,
    adj: Rc<Vec<AdjacencyMatrix>>,
    h: Var,
    w: Var,
    act: Activation,
) -> Result<Var, NnError> {
    let (hr, hc) = g.value(h).shape();
    let (wr, wc) = g.value(w).shape();
    let total: usize = adj.iter().map(AdjacencyMatrix::size).sum();
    if hc != wr || hr != total {
        return Err(NnError::ShapeMismatch(format!(
            "gcn_forward: h {hr}x{hc}, w {wr}x{wc}, adjacency rows {total}"
        )));
    }
    let agg = g.adj_agg(h, adj);
    let z = g.matmul(agg, w);
    let out = activate(g, z, act);
    if let Some(op) = g.poisoned() {
        return Err(NnError::NonFinite(op));
    }
    Ok(out)
}

/// Tape handles for one gated recurrent cell.
pub struct GruVars {
    pub w_xr: Var,
    pub w_hr: Var,
    pub b_r: Var,
    pub w_xz: Var,
    pub w_hz: Var,
    pub b_z: Var,
    pub w_xn: Var,
    pub w_hn: Var,
    pub b_n: Var,
}

/// Standard gated recurrent cell run over `steps` (each `B x input`),
/// starting from a zero hidden state; returns the final hidden state.
pub fn gru_forward(g: &mut Graph, steps: &[Var], p: &GruVars) -> Result<Var, NnError> {
    if steps.is_empty() {
        return Err(NnError::ShapeMismatch("gru_forward: empty sequence".into()));
    }
    let batch = g.value(steps[0]).rows();
    let hidden = g.value(p.w_hr).rows();
    let mut h = g.leaf(Tensor::zeros(batch, hidden));
    for x in steps {
        if g.value(*x).rows() != batch {
            return Err(NnError::ShapeMismatch("gru_forward: ragged batch".into()));
        }
        // r = sigmoid(x W_xr + h W_hr + b_r)
        let xr = g.matmul(*x, p.w_xr);
        let hr = g.matmul(h, p.w_hr);
        let r = g.add(xr, hr);
        let r = g.add_row(r, p.b_r);
        let r = g.sigmoid(r);
        // z = sigmoid(x W_xz + h W_hz + b_z)
        let xz = g.matmul(*x, p.w_xz);
        let hz = g.matmul(h, p.w_hz);
        let z = g.add(xz, hz);
        let z = g.add_row(z, p.b_z);
        let z = g.sigmoid(z);
        // n = tanh(x W_xn + r * (h W_hn) + b_n)
        let xn = g.matmul(*x, p.w_xn);
        let hn = g.matmul(h, p.w_hn);
        let rhn = g.mul(r, hn);
        let n = g.add(xn, rhn);
        let n = g.add_row(n, p.b_n);
        let n = g.tanh(n);
        // h = (1 - z) * n + z * h
        let one_minus_z = g.affine(z, -1.0, 1.0);
        let a = g.mul(one_minus_z, n);
        let b = g.mul(z, h);
        h = g.add(a, b);
    }
    if let Some(op) = g.poisoned() {
        return Err(NnError::NonFinite(op));
    }
    Ok(h)
}

/// Mean squared error against a constant target.
pub fn mse(g: &mut Graph, pred: Var, target: &Tensor) -> Result<Var, NnError> {
    if g.value(pred).shape() != target.shape() {
        return Err(NnError::ShapeMismatch(format!(
            "mse: pred {:?} vs target {:?}",
            g.value(pred).shape(),
            target.shape()
        )));
    }
    let t = g.leaf(target.clone());
    let diff = g.sub(pred, t);
    let sq = g.mul(diff, diff);
    let out = g.mean_all(sq);
    if let Some(op) = g.poisoned() {
        return Err(NnError::NonFinite(op));
    }
    Ok(out)
}

/// Numerically stable softmax over a plain slice (no gradient; used for
/// exploration sampling).
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
