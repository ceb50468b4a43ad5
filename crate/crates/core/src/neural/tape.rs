//! Reverse-mode differentiation over dense matrices.
//!
//! Every operation appends a node holding its value and the inputs it read.
//! Nodes are only ever appended, so their order is a topological order and
//! [`Tape::backward`] walks them once, last to first.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An operation with a hand-written vector-Jacobian product.
pub trait CustomOp {
    fn name(&self) -> &'static str;

    /// Gradients with respect to each input given the output gradient.
    /// `None` means the op does not propagate to that input.
    fn backward(&self, inputs: &[&Tensor], output: &Tensor, grad: &Tensor) -> Vec<Option<Tensor>>;
}

enum Op {
    Leaf,
    /// `x · wᵀ + b`
    Linear {
        x: Var,
        w: Var,
        b: Option<Var>,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Tanh(Var),
    Sigmoid(Var),
    Exp(Var),
    Clamp(Var, f64, f64),
    Concat(Vec<Var>),
    Slice(Var, usize),
    Sum(Var),
    SelectRows {
        take_first: Vec<bool>,
        first: Var,
        second: Var,
    },
    /// Summed negative log-likelihood of `labels` under row-wise softmax.
    SoftmaxNll {
        logits: Var,
        labels: Vec<usize>,
        probs: Tensor,
    },
    Custom {
        inputs: Vec<Var>,
        op: Box<dyn CustomOp>,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Recording of a forward computation.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("nodes", &self.nodes.len()).finish()
    }
}

fn shape_err(what: &'static str, expected: usize, found: usize) -> Error {
    Error::Shape {
        what,
        expected,
        found,
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records an input value.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Records a value that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.rg(v)
    }

    /// `x · wᵀ + b` with `x: (B × in)`, `w: (out × in)`, `b: (1 × out)`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var> {
        let (xt, wt) = (self.value(x), self.value(w));
        let (batch, input) = xt.shape();
        let output = wt.rows();
        if wt.cols() != input {
            return Err(shape_err("linear input width", wt.cols(), input));
        }
        let mut out = Vec::with_capacity(batch * output);
        let bias = match b {
            Some(b) => {
                let bt = self.value(b);
                if bt.len() != output {
                    return Err(shape_err("linear bias width", output, bt.len()));
                }
                Some(bt.data())
            }
            None => None,
        };
        let wd = wt.data();
        for r in 0..batch {
            let row = xt.row(r);
            for o in 0..output {
                let wrow = &wd[o * input..(o + 1) * input];
                out.push(bias.map_or(0.0, |b| b[o]) + dot(row, wrow));
            }
        }
        let rg = self.rg(x) || self.rg(w) || b.is_some_and(|b| self.rg(b));
        let value = Tensor::new(batch, output, out)?;
        Ok(self.push(value, Op::Linear { x, w, b }, rg))
    }

    /// General product `a · b`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let bt = transpose(self.value(b));
        let bt = self.custom(&[b], bt, Box::new(Transpose));
        self.linear(a, bt, None)
    }

    fn push_custom_raw(&mut self, inputs: Vec<Var>, op: Box<dyn CustomOp>, value: Tensor, rg: bool) -> Var {
        self.push(value, Op::Custom { inputs, op }, rg)
    }

    fn same_shape(&self, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa.0 != sb.0 {
            return Err(shape_err("row count", sa.0, sb.0));
        }
        if sa.1 != sb.1 {
            return Err(shape_err("column count", sa.1, sb.1));
        }
        Ok(())
    }

    fn zip_with(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Result<Var> {
        self.same_shape(a, b)?;
        let (ta, tb) = (self.value(a), self.value(b));
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| f(*x, *y)).collect();
        let value = Tensor::new(ta.rows(), ta.cols(), data)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).map(|v| v * s);
        let rg = self.rg(a);
        self.push(value, Op::Scale(a, s), rg)
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).map(|v| v + s);
        let rg = self.rg(a);
        self.push(value, Op::AddScalar(a), rg)
    }

    /// `1 − a`
    pub fn one_minus(&mut self, a: Var) -> Var {
        let neg = self.scale(a, -1.0);
        self.add_scalar(neg, 1.0)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| v.tanh());
        let rg = self.rg(a);
        self.push(value, Op::Tanh(a), rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        let rg = self.rg(a);
        self.push(value, Op::Sigmoid(a), rg)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|v| v.exp());
        let rg = self.rg(a);
        self.push(value, Op::Exp(a), rg)
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping is active.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let value = self.value(a).map(|v| v.clamp(lo, hi));
        let rg = self.rg(a);
        self.push(value, Op::Clamp(a, lo, hi), rg)
    }

    /// Column-wise concatenation of tensors with equal row counts.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts.first().map_or(0, |&p| self.value(p).rows());
        let mut cols = 0;
        for &p in parts {
            let t = self.value(p);
            if t.rows() != rows {
                return Err(shape_err("concat row count", rows, t.rows()));
            }
            cols += t.cols();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        let value = Tensor::new(rows, cols, data)?;
        Ok(self.push(value, Op::Concat(parts.to_vec()), rg))
    }

    /// Columns `start..end`.
    pub fn slice(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let t = self.value(a);
        if start > end || end > t.cols() {
            return Err(shape_err("slice end", t.cols(), end));
        }
        let mut data = Vec::with_capacity(t.rows() * (end - start));
        for r in 0..t.rows() {
            data.extend_from_slice(&t.row(r)[start..end]);
        }
        let value = Tensor::new(t.rows(), end - start, data)?;
        let rg = self.rg(a);
        Ok(self.push(value, Op::Slice(a, start), rg))
    }

    /// Sum of all entries as a 1×1 tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    /// `Σ (a − b)²`
    pub fn squared_distance(&mut self, a: Var, b: Var) -> Result<Var> {
        let d = self.sub(a, b)?;
        let sq = self.mul(d, d)?;
        Ok(self.sum(sq))
    }

    /// Row `r` comes from `first` when `take_first[r]`, else from `second`.
    pub fn select_rows(&mut self, take_first: &[bool], first: Var, second: Var) -> Result<Var> {
        self.same_shape(first, second)?;
        let (a, b) = (self.value(first), self.value(second));
        if take_first.len() != a.rows() {
            return Err(shape_err("row mask length", a.rows(), take_first.len()));
        }
        let mut data = Vec::with_capacity(a.len());
        for (r, &pick) in take_first.iter().enumerate() {
            data.extend_from_slice(if pick { a.row(r) } else { b.row(r) });
        }
        let value = Tensor::new(a.rows(), a.cols(), data)?;
        let rg = self.rg(first) || self.rg(second);
        Ok(self.push(
            value,
            Op::SelectRows {
                take_first: take_first.to_vec(),
                first,
                second,
            },
            rg,
        ))
    }

    /// Summed cross-entropy of integer `labels` under row-wise softmax.
    pub fn softmax_nll(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let t = self.value(logits);
        if labels.len() != t.rows() {
            return Err(shape_err("label count", t.rows(), labels.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= t.cols()) {
            return Err(shape_err("label index bound", t.cols(), bad));
        }
        let probs = softmax_rows(t);
        let loss: f64 = labels
            .iter()
            .enumerate()
            .map(|(r, &l)| -(probs.get(r, l).max(f64::MIN_POSITIVE)).ln())
            .sum();
        let rg = self.rg(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxNll {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// Records an operation with a hand-written backward pass.
    pub fn custom(&mut self, inputs: &[Var], value: Tensor, op: Box<dyn CustomOp>) -> Var {
        let rg = inputs.iter().any(|&v| self.rg(v));
        self.push_custom_raw(inputs.to_vec(), op, value, rg)
    }

    /// Gradients of the scalar `output` with respect to every recorded value.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        let out = self.value(output);
        if out.len() != 1 {
            return Err(shape_err("backward output size", 1, out.len()));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::scalar(1.0));
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let mut acc = |v: Var, t: Tensor| {
            if !self.rg(v) {
                return;
            }
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&t),
                slot @ None => *slot = Some(t),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::Linear { x, w, b } => {
                let (xt, wt) = (self.value(*x), self.value(*w));
                let (batch, input) = xt.shape();
                let output = wt.rows();
                if self.rg(*x) {
                    let mut dx = vec![0.0; batch * input];
                    for r in 0..batch {
                        let drow = &mut dx[r * input..(r + 1) * input];
                        for o in 0..output {
                            let go = g.get(r, o);
                            if go == 0.0 {
                                continue;
                            }
                            for (d, wv) in drow.iter_mut().zip(wt.row(o)) {
                                *d += go * wv;
                            }
                        }
                    }
                    acc(*x, Tensor::new(batch, input, dx).expect("shape"));
                }
                if self.rg(*w) {
                    let mut dw = vec![0.0; output * input];
                    for r in 0..batch {
                        let xrow = xt.row(r);
                        for o in 0..output {
                            let go = g.get(r, o);
                            if go == 0.0 {
                                continue;
                            }
                            for (d, xv) in dw[o * input..(o + 1) * input].iter_mut().zip(xrow) {
                                *d += go * xv;
                            }
                        }
                    }
                    acc(*w, Tensor::new(output, input, dw).expect("shape"));
                }
                if let Some(b) = b {
                    let bt = self.value(*b);
                    let mut db = vec![0.0; output];
                    for r in 0..batch {
                        for (d, gv) in db.iter_mut().zip(g.row(r)) {
                            *d += gv;
                        }
                    }
                    acc(*b, Tensor::new(bt.rows(), bt.cols(), db).expect("shape"));
                }
            }
            Op::Add(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.clone());
            }
            Op::Sub(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.map(|v| -v));
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                if self.rg(*a) {
                    acc(*a, zip(g, tb, |x, y| x * y));
                }
                if self.rg(*b) {
                    acc(*b, zip(g, ta, |x, y| x * y));
                }
            }
            Op::Scale(a, s) => acc(*a, g.map(|v| v * s)),
            Op::AddScalar(a) => acc(*a, g.clone()),
            Op::Tanh(a) => acc(*a, zip(g, &node.value, |gv, y| gv * (1.0 - y * y))),
            Op::Sigmoid(a) => acc(*a, zip(g, &node.value, |gv, y| gv * y * (1.0 - y))),
            Op::Exp(a) => acc(*a, zip(g, &node.value, |gv, y| gv * y)),
            Op::Clamp(a, lo, hi) => {
                let x = self.value(*a);
                acc(*a, zip(g, x, |gv, xv| if xv < *lo || xv > *hi { 0.0 } else { gv }));
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (rows, cols) = self.value(p).shape();
                    if self.rg(p) {
                        let mut data = Vec::with_capacity(rows * cols);
                        for r in 0..rows {
                            data.extend_from_slice(&g.row(r)[offset..offset + cols]);
                        }
                        acc(p, Tensor::new(rows, cols, data).expect("shape"));
                    }
                    offset += cols;
                }
            }
            Op::Slice(a, start) => {
                let (rows, cols) = self.value(*a).shape();
                let mut d = Tensor::zeros(rows, cols);
                let width = g.cols();
                for r in 0..rows {
                    d.data_mut()[r * cols + start..r * cols + start + width].copy_from_slice(g.row(r));
                }
                acc(*a, d);
            }
            Op::Sum(a) => {
                let (rows, cols) = self.value(*a).shape();
                acc(*a, Tensor::filled(rows, cols, g.item()));
            }
            Op::SelectRows {
                take_first,
                first,
                second,
            } => {
                let (rows, cols) = g.shape();
                let mut ga = Tensor::zeros(rows, cols);
                let mut gb = Tensor::zeros(rows, cols);
                for (r, &pick) in take_first.iter().enumerate() {
                    let dst = if pick { &mut ga } else { &mut gb };
                    dst.data_mut()[r * cols..(r + 1) * cols].copy_from_slice(g.row(r));
                }
                acc(*first, ga);
                acc(*second, gb);
            }
            Op::SoftmaxNll {
                logits,
                labels,
                probs,
            } => {
                let mut d = probs.clone();
                let cols = d.cols();
                for (r, &l) in labels.iter().enumerate() {
                    d.data_mut()[r * cols + l] -= 1.0;
                }
                let scale = g.item();
                acc(*logits, d.map(|v| v * scale));
            }
            Op::Custom { inputs, op } => {
                let values: Vec<&Tensor> = inputs.iter().map(|&v| self.value(v)).collect();
                let parts = op.backward(&values, &node.value, g);
                for (&v, part) in inputs.iter().zip(parts) {
                    if let Some(part) = part {
                        acc(v, part);
                    }
                }
            }
        }
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient for `v`, or `None` when `v` does not influence the output.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient for `v`, zero-filled to `shape` when absent.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Tensor {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(shape.0, shape.1))
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| f(*x, *y)).collect();
    Tensor::new(a.rows(), a.cols(), data).expect("shape")
}

fn transpose(t: &Tensor) -> Tensor {
    let (rows, cols) = t.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            data.push(t.get(r, c));
        }
    }
    Tensor::new(cols, rows, data).expect("shape")
}

struct Transpose;

impl CustomOp for Transpose {
    fn name(&self) -> &'static str {
        "transpose"
    }

    fn backward(&self, _inputs: &[&Tensor], _output: &Tensor, grad: &Tensor) -> Vec<Option<Tensor>> {
        vec![Some(transpose(grad))]
    }
}

/// Row-wise softmax.
pub fn softmax_rows(t: &Tensor) -> Tensor {
    let (rows, cols) = t.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row = t.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = data.len();
        let mut total = 0.0;
        for &v in row {
            let e = (v - max).exp();
            total += e;
            data.push(e);
        }
        data[start..].iter_mut().for_each(|v| *v /= total);
    }
    Tensor::new(rows, cols, data).expect("shape")
}

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            lanes[k] += x[k] * y[k];
        }
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}
