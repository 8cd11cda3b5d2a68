//! Operation tape and reverse sweep.
//!
//! Every primitive evaluates eagerly when recorded. The node list is
//! therefore already in topological order and `backward` walks it once
//! in reverse.

use std::sync::Arc;

use super::params::{ParamId, ParamStore};
use super::tensor::{self, gemm, Tensor};
use super::DiffError;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Concat(Vec<Var>),
    GatherRows(Var, Arc<[usize]>),
    SegmentSum(Var, Arc<[usize]>),
    Sigmoid(Var),
    Tanh(Var),
    LeakyRelu(Var, f64),
    SegmentSoftmax(Var, Arc<[usize]>),
    SquaredError(Var, Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one backward sweep, indexed by tape position.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    params: Vec<(ParamId, usize)>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.0].as_ref()
    }

    /// Gradient for every parameter in `store`, zero where the tape never
    /// touched it. A parameter recorded twice gets the sum.
    pub fn for_params(&self, store: &ParamStore) -> Vec<Tensor> {
        let mut out: Vec<Tensor> = store
            .iter()
            .map(|(_, t)| Tensor::zeros(t.rows(), t.cols()))
            .collect();
        for &(pid, node) in &self.params {
            if let Some(g) = &self.grads[node] {
                out[pid.index()].add_assign(g);
            }
        }
        out
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Constant)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.get(id).clone(), Op::Param(id))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = tensor::matmul(self.value(a), self.value(b))?;
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    /// `a + b`, where `b` may be a single row broadcast over `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = tensor::add(self.value(a), self.value(b))?;
        Ok(self.push(out, Op::Add(a, b)))
    }

    /// `a ⊙ b`, where `b` may be a single column broadcast over `a`.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let out = tensor::mul(self.value(a), self.value(b))?;
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let out = self.value(a).map(|v| v * factor);
        self.push(out, Op::Scale(a, factor))
    }

    /// Column-wise concatenation.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, DiffError> {
        let values: Vec<&Tensor> = parts.iter().map(|&p| self.value(p)).collect();
        let out = tensor::concat_cols(&values)?;
        Ok(self.push(out, Op::Concat(parts.to_vec())))
    }

    pub fn gather_rows(&mut self, a: Var, index: Arc<[usize]>) -> Result<Var, DiffError> {
        let rows = self.value(a).rows();
        if let Some(&bad) = index.iter().find(|&&i| i >= rows) {
            return Err(DiffError::Shape(format!(
                "gather index {bad} out of range for {rows} rows"
            )));
        }
        let out = tensor::gather_rows(self.value(a), &index);
        Ok(self.push(out, Op::GatherRows(a, index)))
    }

    /// Sums rows sharing a segment id into `segment_count` output rows.
    pub fn segment_sum(
        &mut self,
        a: Var,
        segments: Arc<[usize]>,
        segment_count: usize,
    ) -> Result<Var, DiffError> {
        check_segments(self.value(a), &segments, segment_count)?;
        let out = tensor::segment_sum(self.value(a), &segments, segment_count);
        Ok(self.push(out, Op::SegmentSum(a, segments)))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = tensor::sigmoid(self.value(a));
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = tensor::tanh(self.value(a));
        self.push(out, Op::Tanh(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let out = tensor::leaky_relu(self.value(a), slope);
        self.push(out, Op::LeakyRelu(a, slope))
    }

    /// Softmax of each column over the rows of each segment.
    pub fn segment_softmax(
        &mut self,
        a: Var,
        segments: Arc<[usize]>,
        segment_count: usize,
    ) -> Result<Var, DiffError> {
        check_segments(self.value(a), &segments, segment_count)?;
        let out = tensor::segment_softmax(self.value(a), &segments, segment_count);
        Ok(self.push(out, Op::SegmentSoftmax(a, segments)))
    }

    /// `Σ (a − b)²` as a 1x1 tensor.
    pub fn squared_error(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(DiffError::Shape(format!(
                "squared error between {:?} and {:?}",
                x.shape(),
                y.shape()
            )));
        }
        let s = x
            .data()
            .iter()
            .zip(y.data())
            .map(|(p, q)| (p - q) * (p - q))
            .sum();
        Ok(self.push(Tensor::scalar(s), Op::SquaredError(a, b)))
    }

    pub fn backward(&self, loss: Var) -> Result<Gradients, DiffError> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(DiffError::NonScalarLoss(lv.shape()));
        }
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let Some(upstream) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant | Op::Param(_) => {}
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let mut ga = Tensor::zeros(av.rows(), av.cols());
                    gemm(&upstream, false, bv, true, 0.0, &mut ga);
                    accumulate(&mut grads, *a, ga);
                    let mut gb = Tensor::zeros(bv.rows(), bv.cols());
                    gemm(av, true, &upstream, false, 0.0, &mut gb);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    let bv = self.value(*b);
                    let gb = if bv.shape() == upstream.shape() {
                        upstream.clone()
                    } else {
                        let mut g = Tensor::zeros(1, bv.cols());
                        for r in 0..upstream.rows() {
                            for (o, v) in g.row_mut(0).iter_mut().zip(upstream.row(r)) {
                                *o += v;
                            }
                        }
                        g
                    };
                    accumulate(&mut grads, *b, gb);
                    accumulate(&mut grads, *a, upstream.clone());
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = tensor::mul(&upstream, bv)?;
                    let gb = if bv.shape() == av.shape() {
                        tensor::mul(&upstream, av)?
                    } else {
                        let mut g = Tensor::zeros(bv.rows(), 1);
                        for r in 0..av.rows() {
                            let s: f64 =
                                upstream.row(r).iter().zip(av.row(r)).map(|(u, x)| u * x).sum();
                            g.set(r, 0, s);
                        }
                        g
                    };
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, f) => {
                    let f = *f;
                    accumulate(&mut grads, *a, upstream.map(|v| v * f));
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let cols = self.value(*p).cols();
                        let mut g = Tensor::zeros(upstream.rows(), cols);
                        for r in 0..upstream.rows() {
                            g.row_mut(r)
                                .copy_from_slice(&upstream.row(r)[offset..offset + cols]);
                        }
                        offset += cols;
                        accumulate(&mut grads, *p, g);
                    }
                }
                Op::GatherRows(a, index) => {
                    let av = self.value(*a);
                    let mut g = Tensor::zeros(av.rows(), av.cols());
                    for (r, &i) in index.iter().enumerate() {
                        for (o, v) in g.row_mut(i).iter_mut().zip(upstream.row(r)) {
                            *o += v;
                        }
                    }
                    accumulate(&mut grads, *a, g);
                }
                Op::SegmentSum(a, segments) => {
                    let g = tensor::gather_rows(&upstream, segments);
                    accumulate(&mut grads, *a, g);
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let g = elementwise(&upstream, y, |u, y| u * y * (1.0 - y));
                    accumulate(&mut grads, *a, g);
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let g = elementwise(&upstream, y, |u, y| u * (1.0 - y * y));
                    accumulate(&mut grads, *a, g);
                }
                Op::LeakyRelu(a, slope) => {
                    let x = self.value(*a);
                    let slope = *slope;
                    let g = elementwise(&upstream, x, |u, x| if x > 0.0 { u } else { u * slope });
                    accumulate(&mut grads, *a, g);
                }
                Op::SegmentSoftmax(a, segments) => {
                    let y = &node.value;
                    let cols = y.cols();
                    let count = segments.iter().copied().max().map_or(0, |m| m + 1);
                    let mut dot = vec![0.0; count * cols];
                    for (r, &s) in segments.iter().enumerate() {
                        for c in 0..cols {
                            dot[s * cols + c] += y.get(r, c) * upstream.get(r, c);
                        }
                    }
                    let mut g = Tensor::zeros(y.rows(), cols);
                    for (r, &s) in segments.iter().enumerate() {
                        for c in 0..cols {
                            g.set(r, c, y.get(r, c) * (upstream.get(r, c) - dot[s * cols + c]));
                        }
                    }
                    accumulate(&mut grads, *a, g);
                }
                Op::SquaredError(a, b) => {
                    let u = upstream.data()[0];
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = elementwise(av, bv, |x, y| 2.0 * u * (x - y));
                    let gb = ga.map(|v| -v);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
            }
            grads[idx] = Some(upstream);
        }

        let params = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.op {
                Op::Param(pid) => Some((pid, i)),
                _ => None,
            })
            .collect();
        Ok(Gradients { grads, params })
    }
}

fn check_segments(a: &Tensor, segments: &[usize], count: usize) -> Result<(), DiffError> {
    if segments.len() != a.rows() {
        return Err(DiffError::Shape(format!(
            "{} segment ids for {} rows",
            segments.len(),
            a.rows()
        )));
    }
    if let Some(&bad) = segments.iter().find(|&&s| s >= count) {
        return Err(DiffError::Shape(format!(
            "segment id {bad} out of range for {count} segments"
        )));
    }
    Ok(())
}

fn elementwise(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_vec(a.rows(), a.cols(), data).expect("shapes checked at record time")
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}
