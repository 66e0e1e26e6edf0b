//! Reverse-mode tape.
//!
//! A [`Graph`] records every forward op; [`Graph::backward`] walks the tape
//! once in reverse and accumulates gradients into every node, so a single
//! scalar loss can reach any number of bound parameter leaves. The graph is
//! consumed by backward and cannot be replayed.

use std::rc::Rc;

use super::adjacency::AdjacencyMatrix;
use super::tensor::Tensor;
use super::NnError;

/// Handle to a node on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// (parent values, upstream gradient) -> per-parent gradient contributions.
type BackFn = Box<dyn Fn(&[&Tensor], &Tensor) -> Vec<Tensor>>;

struct Node {
    value: Tensor,
    parents: Vec<Var>,
    back: Option<BackFn>,
}

/// Recorded forward computation.
pub struct Graph {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    consumed: bool,
    poison: Option<&'static str>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            grads: Vec::new(),
            consumed: false,
            poison: None,
        }
    }

    /// First op that produced a non-finite value, if any.
    pub fn poisoned(&self) -> Option<&'static str> {
        self.poison
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last backward pass with respect to `v`.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    fn push(&mut self, op: &'static str, value: Tensor, parents: Vec<Var>, back: Option<BackFn>) -> Var {
        if self.poison.is_none() && !value.all_finite() {
            self.poison = Some(op);
        }
        self.nodes.push(Node { value, parents, back });
        Var(self.nodes.len() - 1)
    }

    /// Register an input or parameter tensor.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push("leaf", t, Vec::new(), None)
    }

    /// Reverse pass from a scalar loss. Consumes the graph; calling twice
    /// is a usage error.
    pub fn backward(&mut self, loss: Var) -> Result<(), NnError> {
        if self.consumed {
            return Err(NnError::GraphConsumed);
        }
        if let Some(op) = self.poison {
            return Err(NnError::NonFinite(op));
        }
        let (r, c) = self.nodes[loss.0].value.shape();
        if r != 1 || c != 1 {
            return Err(NnError::NonScalarLoss { rows: r, cols: c });
        }
        self.consumed = true;

        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g_out) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if let Some(back) = &node.back {
                let parent_values: Vec<&Tensor> =
                    node.parents.iter().map(|p| &self.nodes[p.0].value).collect();
                let contributions = back(&parent_values, &g_out);
                debug_assert_eq!(contributions.len(), node.parents.len());
                for (p, contrib) in node.parents.iter().zip(contributions) {
                    match &mut grads[p.0] {
                        Some(acc) => acc.add_assign(&contrib),
                        slot @ None => *slot = Some(contrib),
                    }
                }
            }
            grads[i] = Some(g_out);
        }
        self.grads = grads;
        Ok(())
    }

    // ---- ops ----

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let va = self.value(a);
        let vb = self.value(b);
        assert_eq!(
            va.cols(),
            vb.rows(),
            "matmul {:?} by {:?}",
            va.shape(),
            vb.shape()
        );
        let out = va.matmul(vb);
        self.push(
            "matmul",
            out,
            vec![a, b],
            Some(Box::new(|pv, g| {
                vec![g.matmul_nt(pv[1]), pv[0].matmul_tn(g)]
            })),
        )
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        self.push(
            "add",
            out,
            vec![a, b],
            Some(Box::new(|_, g| vec![g.clone(), g.clone()])),
        )
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let va = self.value(a);
        let vb = self.value(b);
        assert_eq!(va.shape(), vb.shape(), "sub shape mismatch");
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x - y)
            .collect();
        let out = Tensor::from_vec(va.rows(), va.cols(), data);
        self.push(
            "sub",
            out,
            vec![a, b],
            Some(Box::new(|_, g| vec![g.clone(), g.map(|v| -v)])),
        )
    }

    /// Broadcast a 1xC bias row over every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Var {
        let va = self.value(a);
        let vb = self.value(bias);
        assert_eq!(vb.rows(), 1, "bias must be a row vector");
        assert_eq!(va.cols(), vb.cols(), "add_row width mismatch");
        let mut out = va.clone();
        for r in 0..out.rows() {
            let cols = out.cols();
            let row = &mut out.data_mut()[r * cols..(r + 1) * cols];
            for (x, b) in row.iter_mut().zip(vb.data()) {
                *x += b;
            }
        }
        self.push(
            "add_row",
            out,
            vec![a, bias],
            Some(Box::new(|pv, g| {
                let cols = pv[1].cols();
                let mut db = Tensor::zeros(1, cols);
                for r in 0..g.rows() {
                    for c in 0..cols {
                        db.data_mut()[c] += g.get(r, c);
                    }
                }
                vec![g.clone(), db]
            })),
        )
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let va = self.value(a);
        let vb = self.value(b);
        assert_eq!(va.shape(), vb.shape(), "mul shape mismatch");
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let out = Tensor::from_vec(va.rows(), va.cols(), data);
        self.push(
            "mul",
            out,
            vec![a, b],
            Some(Box::new(|pv, g| {
                let da = Tensor::from_vec(
                    g.rows(),
                    g.cols(),
                    g.data().iter().zip(pv[1].data()).map(|(x, y)| x * y).collect(),
                );
                let db = Tensor::from_vec(
                    g.rows(),
                    g.cols(),
                    g.data().iter().zip(pv[0].data()).map(|(x, y)| x * y).collect(),
                );
                vec![da, db]
            })),
        )
    }

    /// Elementwise `k * x + m`.
    pub fn affine(&mut self, a: Var, k: f64, m: f64) -> Var {
        let out = self.value(a).map(|v| k * v + m);
        self.push(
            "affine",
            out,
            vec![a],
            Some(Box::new(move |_, g| vec![g.map(|v| k * v)])),
        )
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| v.max(0.0));
        self.push(
            "relu",
            out,
            vec![a],
            Some(Box::new(|pv, g| {
                let data = g
                    .data()
                    .iter()
                    .zip(pv[0].data())
                    .map(|(gv, x)| if *x > 0.0 { *gv } else { 0.0 })
                    .collect();
                vec![Tensor::from_vec(g.rows(), g.cols(), data)]
            })),
        )
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid_scalar);
        self.push(
            "sigmoid",
            out,
            vec![a],
            Some(Box::new(|pv, g| {
                let data = g
                    .data()
                    .iter()
                    .zip(pv[0].data())
                    .map(|(gv, x)| {
                        let s = sigmoid_scalar(*x);
                        gv * s * (1.0 - s)
                    })
                    .collect();
                vec![Tensor::from_vec(g.rows(), g.cols(), data)]
            })),
        )
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(
            "tanh",
            out,
            vec![a],
            Some(Box::new(|pv, g| {
                let data = g
                    .data()
                    .iter()
                    .zip(pv[0].data())
                    .map(|(gv, x)| {
                        let t = x.tanh();
                        gv * (1.0 - t * t)
                    })
                    .collect();
                vec![Tensor::from_vec(g.rows(), g.cols(), data)]
            })),
        )
    }

    /// Horizontal concatenation of equal-height blocks.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.value(parts[0]).rows();
        let widths: Vec<usize> = parts.iter().map(|p| self.value(*p).cols()).collect();
        let total: usize = widths.iter().sum();
        let mut out = Tensor::zeros(rows, total);
        let mut offset = 0;
        for (p, w) in parts.iter().zip(&widths) {
            let vp = self.value(*p);
            assert_eq!(vp.rows(), rows, "concat_cols height mismatch");
            for r in 0..rows {
                let src = vp.row(r);
                let dst = &mut out.data_mut()[r * total + offset..r * total + offset + w];
                dst.copy_from_slice(src);
            }
            offset += w;
        }
        self.push(
            "concat_cols",
            out,
            parts.to_vec(),
            Some(Box::new(move |pv, g| {
                let total = g.cols();
                let mut grads = Vec::with_capacity(pv.len());
                let mut offset = 0;
                for p in pv {
                    let w = p.cols();
                    let mut dg = Tensor::zeros(p.rows(), w);
                    for r in 0..p.rows() {
                        let src = &g.data()[r * total + offset..r * total + offset + w];
                        dg.data_mut()[r * w..(r + 1) * w].copy_from_slice(src);
                    }
                    grads.push(dg);
                    offset += w;
                }
                grads
            })),
        )
    }

    /// Per-row column selection: out[r, 0] = a[r, idx[r]].
    pub fn gather_cols(&mut self, a: Var, idx: Vec<usize>) -> Var {
        let va = self.value(a);
        assert_eq!(idx.len(), va.rows(), "gather_cols index count");
        let data = idx.iter().enumerate().map(|(r, c)| va.get(r, *c)).collect();
        let out = Tensor::from_vec(va.rows(), 1, data);
        let idx = Rc::new(idx);
        self.push(
            "gather_cols",
            out,
            vec![a],
            Some(Box::new(move |pv, g| {
                let mut da = Tensor::zeros(pv[0].rows(), pv[0].cols());
                for (r, c) in idx.iter().enumerate() {
                    da.set(r, *c, g.get(r, 0));
                }
                vec![da]
            })),
        )
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s: f64 = self.value(a).data().iter().sum();
        self.push(
            "sum_all",
            Tensor::scalar(s),
            vec![a],
            Some(Box::new(|pv, g| {
                let gv = g.item();
                vec![pv[0].map(|_| gv)]
            })),
        )
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let n = self.value(a).len().max(1) as f64;
        let s: f64 = self.value(a).data().iter().sum();
        self.push(
            "mean_all",
            Tensor::scalar(s / n),
            vec![a],
            Some(Box::new(move |pv, g| {
                let gv = g.item() / n;
                vec![pv[0].map(|_| gv)]
            })),
        )
    }

    /// Per-block adjacency aggregation: rows of `h` are grouped into
    /// consecutive blocks, one per adjacency matrix, and each block is
    /// multiplied by its (symmetric, normalized) matrix.
    pub fn adj_agg(&mut self, h: Var, blocks: Rc<Vec<AdjacencyMatrix>>) -> Var {
        let vh = self.value(h);
        let total: usize = blocks.iter().map(|b| b.size()).sum();
        assert_eq!(vh.rows(), total, "adj_agg row count mismatch");
        let out = apply_blocks(&blocks, vh);
        let back_blocks = Rc::clone(&blocks);
        self.push(
            "adj_agg",
            out,
            vec![h],
            // Symmetric matrices: the backward aggregation is identical.
            Some(Box::new(move |_, g| vec![apply_blocks(&back_blocks, g)])),
        )
    }

    /// Per-block masked mean over rows: block i (rows given by
    /// `groups[i].len()`) collapses to the mean of its rows where the mask
    /// is set, or a zero row when nothing is present.
    pub fn masked_mean_rows(&mut self, h: Var, groups: Rc<Vec<Vec<bool>>>) -> Var {
        let vh = self.value(h);
        let cols = vh.cols();
        let total: usize = groups.iter().map(|g| g.len()).sum();
        assert_eq!(vh.rows(), total, "masked_mean_rows row count mismatch");
        let mut out = Tensor::zeros(groups.len(), cols);
        let mut base = 0;
        for (i, mask) in groups.iter().enumerate() {
            let count = mask.iter().filter(|m| **m).count();
            if count > 0 {
                let inv = 1.0 / count as f64;
                for (j, present) in mask.iter().enumerate() {
                    if *present {
                        for c in 0..cols {
                            out.data_mut()[i * cols + c] += vh.get(base + j, c) * inv;
                        }
                    }
                }
            }
            base += mask.len();
        }
        let back_groups = Rc::clone(&groups);
        self.push(
            "masked_mean_rows",
            out,
            vec![h],
            Some(Box::new(move |pv, g| {
                let cols = pv[0].cols();
                let mut dh = Tensor::zeros(pv[0].rows(), cols);
                let mut base = 0;
                for (i, mask) in back_groups.iter().enumerate() {
                    let count = mask.iter().filter(|m| **m).count();
                    if count > 0 {
                        let inv = 1.0 / count as f64;
                        for (j, present) in mask.iter().enumerate() {
                            if *present {
                                for c in 0..cols {
                                    dh.data_mut()[(base + j) * cols + c] += g.get(i, c) * inv;
                                }
                            }
                        }
                    }
                    base += mask.len();
                }
                vec![dh]
            })),
        )
    }
}

fn apply_blocks(blocks: &[AdjacencyMatrix], h: &Tensor) -> Tensor {
    let cols = h.cols();
    let mut out = Tensor::zeros(h.rows(), cols);
    let mut base = 0;
    for block in blocks {
        let v = block.size();
        for i in 0..v {
            for j in 0..v {
                let w = block.get(i, j);
                if w != 0.0 {
                    for c in 0..cols {
                        let add = w * h.get(base + j, c);
                        out.data_mut()[(base + i) * cols + c] += add;
                    }
                }
            }
        }
        base += v;
    }
    out
}

fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sum_gradient_is_ones() {
        let mut g = Graph::new();
        let w = g.leaf(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let s = g.sum_all(w);
        g.backward(s).unwrap();
        assert_eq!(g.grad(w).unwrap().data(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn scalar_mse_closed_form() {
        // loss = (w*x - y)^2, d/dw = 2(wx - y)x
        let (w0, x0, y0) = (1.5, 2.0, 7.0);
        let mut g = Graph::new();
        let w = g.leaf(Tensor::scalar(w0));
        let x = g.leaf(Tensor::scalar(x0));
        let y = g.leaf(Tensor::scalar(y0));
        let pred = g.mul(w, x);
        let diff = g.sub(pred, y);
        let loss = g.mul(diff, diff);
        let loss = g.sum_all(loss);
        g.backward(loss).unwrap();
        assert_abs_diff_eq!(
            g.grad(w).unwrap().item(),
            2.0 * (w0 * x0 - y0) * x0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn backward_twice_is_an_error() {
        let mut g = Graph::new();
        let w = g.leaf(Tensor::scalar(2.0));
        let s = g.sum_all(w);
        g.backward(s).unwrap();
        assert!(matches!(g.backward(s), Err(NnError::GraphConsumed)));
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut g = Graph::new();
        let w = g.leaf(Tensor::zeros(2, 3));
        assert!(matches!(
            g.backward(w),
            Err(NnError::NonScalarLoss { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn shared_parent_accumulates() {
        // loss = sum(x * x) -> dx = 2x
        let mut g = Graph::new();
        let x = g.leaf(Tensor::from_vec(1, 3, vec![1.0, -2.0, 3.0]));
        let sq = g.mul(x, x);
        let loss = g.sum_all(sq);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap().data(), &[2.0, -4.0, 6.0]);
    }

    #[test]
    fn non_finite_poisons_graph() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::scalar(1e308));
        let doubled = g.add(x, x); // overflows to inf
        let loss = g.sum_all(doubled);
        assert!(g.poisoned().is_some());
        assert!(matches!(g.backward(loss), Err(NnError::NonFinite(_))));
    }
}
