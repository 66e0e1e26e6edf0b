//! Dense row-major 64-bit matrices. Everything in the networks is rank 2;
//! scalars are 1x1 and row vectors 1xN.

/// Dense `rows x cols` matrix of f64, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "tensor data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        Tensor { rows, cols, data }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor::from_vec(1, 1, vec![v])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Scalar payload of a 1x1 tensor.
    pub fn item(&self) -> f64 {
        assert_eq!(self.len(), 1, "item() on a {}x{} tensor", self.rows, self.cols);
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * other` via the SIMD dgemm kernel.
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(
            self.cols, other.rows,
            "matmul {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Tensor::zeros(self.rows, other.cols);
        dgemm(
            self.rows,
            self.cols,
            other.cols,
            self.data(),
            false,
            other.data(),
            false,
            out.data_mut(),
        );
        out
    }

    /// `self^T * other`.
    pub fn matmul_tn(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.rows, other.rows, "matmul_tn row mismatch");
        let mut out = Tensor::zeros(self.cols, other.cols);
        dgemm(
            self.cols,
            self.rows,
            other.cols,
            self.data(),
            true,
            other.data(),
            false,
            out.data_mut(),
        );
        out
    }

    /// `self * other^T`.
    pub fn matmul_nt(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.cols, "matmul_nt col mismatch");
        let mut out = Tensor::zeros(self.rows, other.rows);
        dgemm(
            self.rows,
            self.cols,
            other.rows,
            self.data(),
            false,
            other.data(),
            true,
            out.data_mut(),
        );
        out
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// out += a(m x k, optionally transposed) * b(k x n, optionally transposed)
#[allow(clippy::too_many_arguments)]
fn dgemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, out: &mut [f64]) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    // Row-major strides; a transposed operand is the stored k x m (resp.
    // n x k) matrix read column-first.
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            1.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matmul_small() {
        let a = Tensor::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Tensor::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.shape(), (2, 2));
        assert_abs_diff_eq!(c.get(0, 0), 58.0);
        assert_abs_diff_eq!(c.get(0, 1), 64.0);
        assert_abs_diff_eq!(c.get(1, 0), 139.0);
        assert_abs_diff_eq!(c.get(1, 1), 154.0);
    }

    #[test]
    fn transposed_variants_agree_with_explicit_transpose() {
        let a = Tensor::from_vec(2, 3, vec![1.0, -2.0, 3.0, 0.5, 4.0, -1.0]);
        let b = Tensor::from_vec(2, 4, (0..8).map(|i| i as f64 * 0.25).collect());
        // a^T (3x2) * b (2x4)
        let tn = a.matmul_tn(&b);
        let mut at = Tensor::zeros(3, 2);
        for r in 0..2 {
            for c in 0..3 {
                at.set(c, r, a.get(r, c));
            }
        }
        let expect = at.matmul(&b);
        assert_eq!(tn, expect);

        // b (2x4) * a^T would not conform; use a (2x3) * a^T (3x2) instead.
        let nt = a.matmul_nt(&a);
        let mut att = Tensor::zeros(3, 2);
        for r in 0..2 {
            for c in 0..3 {
                att.set(c, r, a.get(r, c));
            }
        }
        let expect2 = a.matmul(&att);
        assert_eq!(nt, expect2);
    }
}
