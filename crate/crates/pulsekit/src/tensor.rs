//! Dense row-major f64 matrices.
//!
//! Everything the encoder and the training loop touch is a `Tensor`:
//! scalars are 1x1, vectors 1xN. All compute is f64 so that gradient checks
//! against central finite differences are meaningful.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Work threshold (multiply-adds) above which matmuls fan out over rayon.
/// Each output row is computed by exactly one task, so results are
/// bit-identical for any thread count.
const PAR_FLOP_THRESHOLD: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {}x{}={} elements, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn row_vector(data: Vec<f64>) -> Self {
        Tensor {
            rows: 1,
            cols: data.len(),
            data,
        }
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

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn item(&self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (1, 1));
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale_assign(&mut self, c: f64) {
        for v in self.data.iter_mut() {
            *v *= c;
        }
    }

    pub fn transpose(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// C = A * B, shapes (m x k) * (k x n).
    pub fn matmul(&self, b: &Tensor) -> Tensor {
        assert_eq!(self.cols, b.rows, "matmul shape mismatch");
        let (m, k, n) = (self.rows, self.cols, b.cols);
        let mut out = Tensor::zeros(m, n);
        let work = m * k * n;
        let body = |(i, out_row): (usize, &mut [f64])| {
            let a_row = &self.data[i * k..(i + 1) * k];
            for (p, &a_ip) in a_row.iter().enumerate() {
                if a_ip == 0.0 {
                    continue;
                }
                let b_row = &b.data[p * n..(p + 1) * n];
                for (o, &b_pj) in out_row.iter_mut().zip(b_row.iter()) {
                    *o += a_ip * b_pj;
                }
            }
        };
        if work >= PAR_FLOP_THRESHOLD {
            out.data.par_chunks_mut(n).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(n).enumerate().for_each(body);
        }
        out
    }

    /// C = A * B^T, shapes (m x k) * (n x k).
    pub fn matmul_nt(&self, b: &Tensor) -> Tensor {
        assert_eq!(self.cols, b.cols, "matmul_nt shape mismatch");
        let (m, k, n) = (self.rows, self.cols, b.rows);
        let mut out = Tensor::zeros(m, n);
        let work = m * k * n;
        let body = |(i, out_row): (usize, &mut [f64])| {
            let a_row = &self.data[i * k..(i + 1) * k];
            for (j, o) in out_row.iter_mut().enumerate() {
                let b_row = &b.data[j * k..(j + 1) * k];
                let mut acc = 0.0;
                for (x, y) in a_row.iter().zip(b_row.iter()) {
                    acc += x * y;
                }
                *o = acc;
            }
        };
        if work >= PAR_FLOP_THRESHOLD {
            out.data.par_chunks_mut(n).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(n).enumerate().for_each(body);
        }
        out
    }

    /// C = A^T * B, shapes (k x m) * (k x n).
    pub fn matmul_tn(&self, b: &Tensor) -> Tensor {
        assert_eq!(self.rows, b.rows, "matmul_tn shape mismatch");
        let (k, m, n) = (self.rows, self.cols, b.cols);
        let mut out = Tensor::zeros(m, n);
        let work = m * k * n;
        if work >= PAR_FLOP_THRESHOLD {
            out.data
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, out_row)| {
                    for p in 0..k {
                        let a_pi = self.data[p * m + i];
                        if a_pi == 0.0 {
                            continue;
                        }
                        let b_row = &b.data[p * n..(p + 1) * n];
                        for (o, &b_pj) in out_row.iter_mut().zip(b_row.iter()) {
                            *o += a_pi * b_pj;
                        }
                    }
                });
        } else {
            // k-outer order streams both B and C rows.
            for p in 0..k {
                let b_row = &b.data[p * n..(p + 1) * n];
                for i in 0..m {
                    let a_pi = self.data[p * m + i];
                    if a_pi == 0.0 {
                        continue;
                    }
                    let out_row = &mut out.data[i * n..(i + 1) * n];
                    for (o, &b_pj) in out_row.iter_mut().zip(b_row.iter()) {
                        *o += a_pi * b_pj;
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, v: &[f64]) -> Tensor {
        Tensor::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn matmul_small() {
        let a = t(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = t(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_variants_agree() {
        let a = t(2, 3, &[1.0, -2.0, 3.0, 0.5, 5.0, -6.0]);
        let b = t(3, 4, &(1..=12).map(|v| v as f64 * 0.3).collect::<Vec<_>>());
        let nn = a.matmul(&b);
        let nt = a.matmul_nt(&b.transpose());
        let tn = a.transpose().matmul_tn(&b);
        for (x, y) in nn.data().iter().zip(nt.data()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in nn.data().iter().zip(tn.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_matmul_matches_serial() {
        // Big enough to cross the parallel threshold.
        let n = 96;
        let a = Tensor::from_vec(
            n,
            n,
            (0..n * n).map(|i| ((i * 37 % 101) as f64) / 50.0 - 1.0).collect(),
        )
        .unwrap();
        let b = Tensor::from_vec(
            n,
            n,
            (0..n * n).map(|i| ((i * 61 % 97) as f64) / 40.0 - 1.2).collect(),
        )
        .unwrap();
        let big = a.matmul(&b);
        // Serial reference.
        let mut reference = Tensor::zeros(n, n);
        for i in 0..n {
            for p in 0..n {
                let a_ip = a.get(i, p);
                for j in 0..n {
                    reference.data_mut()[i * n + j] += a_ip * b.get(p, j);
                }
            }
        }
        assert_eq!(big.data(), reference.data());
    }
}
