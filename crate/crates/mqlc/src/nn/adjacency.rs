//! Symmetrically normalized adjacency for the graph-convolution layers.

use super::tensor::Tensor;

/// `D^(-1/2) (A + I) D^(-1/2)` over a fixed slot count, fully connected
/// among present slots. Rows and columns of absent slots are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyMatrix {
    size: usize,
    values: Tensor,
}

impl AdjacencyMatrix {
    /// Build from a presence mask. Present slots form a complete graph with
    /// self-loops; with `p` present slots every present-present entry of the
    /// normalized matrix is `1/p`.
    pub fn from_presence(present: &[bool]) -> Self {
        let size = present.len();
        let p = present.iter().filter(|m| **m).count();
        let mut values = Tensor::zeros(size, size);
        if p > 0 {
            let w = 1.0 / p as f64;
            for i in 0..size {
                if !present[i] {
                    continue;
                }
                for j in 0..size {
                    if present[j] {
                        values.set(i, j, w);
                    }
                }
            }
        }
        AdjacencyMatrix { size, values }
    }

    pub fn identity(size: usize) -> Self {
        let mut values = Tensor::zeros(size, size);
        for i in 0..size {
            values.set(i, i, 1.0);
        }
        AdjacencyMatrix { size, values }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn values(&self) -> &Tensor {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.size {
            for j in (i + 1)..self.size {
                if (self.get(i, j) - self.get(j, i)).abs() > 1e-15 {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_and_zero_rows() {
        let a = AdjacencyMatrix::from_presence(&[true, true, false, true, false]);
        assert!(a.is_symmetric());
        for (i, j) in [(0, 0), (0, 1), (1, 3), (3, 3)] {
            assert_abs_diff_eq!(a.get(i, j), 1.0 / 3.0, epsilon = 1e-15);
        }
        for j in 0..5 {
            assert_eq!(a.get(2, j), 0.0);
            assert_eq!(a.get(j, 2), 0.0);
            assert_eq!(a.get(4, j), 0.0);
        }
    }

    #[test]
    fn eigenvalues_within_unit_interval() {
        // The normalized complete-graph block is a rank-1 projector with
        // eigenvalues {1, 0}; x^T A x / x^T x therefore stays in [0, 1].
        // Check the quadratic form bound on random vectors.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for pattern in 0u32..32 {
            let present: Vec<bool> = (0..5).map(|i| pattern >> i & 1 == 1).collect();
            let a = AdjacencyMatrix::from_presence(&present);
            for _ in 0..20 {
                let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut ax = vec![0.0; 5];
                for i in 0..5 {
                    for j in 0..5 {
                        ax[i] += a.get(i, j) * x[j];
                    }
                }
                let quad: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
                let norm: f64 = x.iter().map(|u| u * u).sum();
                assert!(quad >= -1e-12 && quad <= norm + 1e-12);
            }
        }
    }

    #[test]
    fn empty_presence_is_all_zero() {
        let a = AdjacencyMatrix::from_presence(&[false; 4]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, j), 0.0);
            }
        }
    }
}
