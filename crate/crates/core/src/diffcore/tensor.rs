use serde::{Deserialize, Serialize};

use super::DiffError;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn full(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DiffError> {
        if data.len() != rows * cols {
            return Err(DiffError::Shape(format!(
                "buffer of length {} cannot hold a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equally long rows into a matrix.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self, DiffError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(DiffError::Shape(format!(
                    "row {i} has {} values, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    pub fn row_vector(values: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values,
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

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Value of a 1x1 tensor.
    pub fn item(&self) -> Option<f64> {
        (self.rows == 1 && self.cols == 1).then(|| self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// `c = beta * c + op(a) * op(b)` where `op` optionally transposes.
pub(crate) fn gemm(a: &Tensor, trans_a: bool, b: &Tensor, trans_b: bool, beta: f64, c: &mut Tensor) {
    let (m, k) = if trans_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    let (kb, n) = if trans_b {
        (b.cols, b.rows)
    } else {
        (b.rows, b.cols)
    };
    assert_eq!(k, kb, "gemm inner dimensions disagree");
    assert_eq!((c.rows, c.cols), (m, n), "gemm output shape");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c.data.iter_mut() {
            *v *= beta;
        }
        return;
    }
    let (rsa, csa) = if trans_a {
        (1, a.cols as isize)
    } else {
        (a.cols as isize, 1)
    };
    let (rsb, csb) = if trans_b {
        (1, b.cols as isize)
    } else {
        (b.cols as isize, 1)
    };
    // SAFETY: the shapes above bound every offset matrixmultiply computes
    // from (m, k, n) and the strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

/// Plain matrix product.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor, DiffError> {
    if a.cols != b.rows {
        return Err(DiffError::Shape(format!(
            "matmul of {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Tensor::zeros(a.rows, b.cols);
    gemm(a, false, b, false, 0.0, &mut out);
    Ok(out)
}

/// Sum with optional row broadcast of `b` (1 x cols).
pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor, DiffError> {
    if a.shape() == b.shape() {
        let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
        return Ok(Tensor {
            rows: a.rows,
            cols: a.cols,
            data,
        });
    }
    if b.rows == 1 && b.cols == a.cols {
        let mut out = a.clone();
        for r in 0..out.rows {
            for (v, bias) in out.row_mut(r).iter_mut().zip(&b.data) {
                *v += bias;
            }
        }
        return Ok(out);
    }
    Err(DiffError::Shape(format!(
        "add of {}x{} and {}x{}",
        a.rows, a.cols, b.rows, b.cols
    )))
}

/// Elementwise product with optional column broadcast of `b` (rows x 1).
pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor, DiffError> {
    if a.shape() == b.shape() {
        let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
        return Ok(Tensor {
            rows: a.rows,
            cols: a.cols,
            data,
        });
    }
    if b.cols == 1 && b.rows == a.rows {
        let mut out = a.clone();
        for r in 0..out.rows {
            let w = b.data[r];
            for v in out.row_mut(r) {
                *v *= w;
            }
        }
        return Ok(out);
    }
    Err(DiffError::Shape(format!(
        "mul of {}x{} and {}x{}",
        a.rows, a.cols, b.rows, b.cols
    )))
}

pub const SIGMOID_CLAMP: f64 = 40.0;

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

#[inline]
pub fn leaky_relu_scalar(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

pub fn sigmoid(a: &Tensor) -> Tensor {
    a.map(sigmoid_scalar)
}

pub fn tanh(a: &Tensor) -> Tensor {
    a.map(f64::tanh)
}

pub fn leaky_relu(a: &Tensor, slope: f64) -> Tensor {
    a.map(|x| leaky_relu_scalar(x, slope))
}

/// Softmax of each column independently within each segment of rows.
pub fn segment_softmax(a: &Tensor, segments: &[usize], segment_count: usize) -> Tensor {
    let cols = a.cols;
    let mut max = vec![f64::NEG_INFINITY; segment_count * cols];
    for (r, &s) in segments.iter().enumerate() {
        for c in 0..cols {
            let slot = &mut max[s * cols + c];
            *slot = slot.max(a.get(r, c));
        }
    }
    let mut out = Tensor::zeros(a.rows, cols);
    let mut denom = vec![0.0; segment_count * cols];
    for (r, &s) in segments.iter().enumerate() {
        for c in 0..cols {
            let e = (a.get(r, c) - max[s * cols + c]).exp();
            out.set(r, c, e);
            denom[s * cols + c] += e;
        }
    }
    for (r, &s) in segments.iter().enumerate() {
        for c in 0..cols {
            let v = out.get(r, c) / denom[s * cols + c];
            out.set(r, c, v);
        }
    }
    out
}

pub fn segment_sum(a: &Tensor, segments: &[usize], segment_count: usize) -> Tensor {
    let mut out = Tensor::zeros(segment_count, a.cols);
    for (r, &s) in segments.iter().enumerate() {
        let src = a.row(r);
        for (o, v) in out.row_mut(s).iter_mut().zip(src) {
            *o += v;
        }
    }
    out
}

pub fn gather_rows(a: &Tensor, index: &[usize]) -> Tensor {
    let mut data = Vec::with_capacity(index.len() * a.cols);
    for &i in index {
        data.extend_from_slice(a.row(i));
    }
    Tensor {
        rows: index.len(),
        cols: a.cols,
        data,
    }
}

pub fn concat_cols(parts: &[&Tensor]) -> Result<Tensor, DiffError> {
    let rows = parts.first().map_or(0, |t| t.rows);
    if parts.iter().any(|t| t.rows != rows) {
        return Err(DiffError::Shape("concat of tensors with differing row counts".into()));
    }
    let cols = parts.iter().map(|t| t.cols).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for t in parts {
            data.extend_from_slice(t.row(r));
        }
    }
    Ok(Tensor { rows, cols, data })
}
