//! Named parameter storage and the two layer types the models are built from.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::tape::{Gradients, Tape, Var};
use super::tensor::Tensor;
use crate::error::{check_len, Result};

/// Index of a tensor inside a [`Params`] store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Ordered, named parameter tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    /// Replaces every value, keeping names; shapes must match.
    pub fn load_values(&mut self, values: Vec<Tensor>) -> Result<()> {
        check_len("parameter count", self.values.len(), values.len())?;
        for (old, new) in self.values.iter().zip(&values) {
            check_len("parameter rows", old.rows(), new.rows())?;
            check_len("parameter cols", old.cols(), new.cols())?;
        }
        self.values = values;
        Ok(())
    }

    pub fn zero_all(&mut self) {
        for v in &mut self.values {
            v.data_mut().iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// Copies every parameter onto `tape` as a leaf.
    pub fn bind(&self, tape: &mut Tape, requires_grad: bool) -> Bound {
        Bound {
            vars: self
                .values
                .iter()
                .map(|v| tape.leaf(v.clone(), requires_grad))
                .collect(),
        }
    }
}

/// Tape handles for a bound [`Params`] store.
#[derive(Debug, Clone)]
pub struct Bound {
    vars: Vec<Var>,
}

impl Bound {
    /// Wraps handles already on a tape, one per parameter in store order.
    pub fn from_vars(vars: Vec<Var>) -> Self {
        Bound { vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }

    /// Gradient for every parameter, zero where the loss does not depend on it.
    pub fn gradients(&self, grads: &Gradients, params: &Params) -> Vec<Tensor> {
        self.vars
            .iter()
            .zip(params.values())
            .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
            .collect()
    }
}

fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Tensor::new(rows, cols, data).expect("shape")
}

/// Fully connected layer `y = x·Wᵀ + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    /// Weights uniform in ±1/√in, zero bias.
    pub fn new(params: &mut Params, name: &str, in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weight = params.add(alloc::format!("{name}.weight"), uniform(out_dim, in_dim, bound, rng));
        let bias = params.add(alloc::format!("{name}.bias"), Tensor::zeros(1, out_dim));
        Linear {
            weight,
            bias,
            in_dim,
            out_dim,
        }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &Bound, x: Var) -> Result<Var> {
        tape.linear(x, bound.var(self.weight), Some(bound.var(self.bias)))
    }
}

/// Gated recurrent unit with separate input and hidden biases.
///
/// ```text
/// r  = σ(W_ir x + b_ir + W_hr h + b_hr)
/// z  = σ(W_iz x + b_iz + W_hz h + b_hz)
/// n  = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
/// h' = (1 − z) ⊙ n + z ⊙ h
/// ```
///
/// The three gates are stacked row-wise in the order r, z, n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GruCell {
    pub w_input: ParamId,
    pub w_hidden: ParamId,
    pub bias_input: ParamId,
    pub bias_hidden: ParamId,
    pub input_size: usize,
    pub hidden_size: usize,
}

impl GruCell {
    pub fn new(params: &mut Params, name: &str, input_size: usize, hidden_size: usize, rng: &mut impl Rng) -> Self {
        let gates = 3 * hidden_size;
        let w_input = params.add(
            alloc::format!("{name}.weight_ih"),
            uniform(gates, input_size, 1.0 / (input_size as f64).sqrt(), rng),
        );
        let w_hidden = params.add(
            alloc::format!("{name}.weight_hh"),
            uniform(gates, hidden_size, 1.0 / (hidden_size as f64).sqrt(), rng),
        );
        let bias_input = params.add(alloc::format!("{name}.bias_ih"), Tensor::zeros(1, gates));
        let bias_hidden = params.add(alloc::format!("{name}.bias_hh"), Tensor::zeros(1, gates));
        GruCell {
            w_input,
            w_hidden,
            bias_input,
            bias_hidden,
            input_size,
            hidden_size,
        }
    }

    /// One recurrence step; `x: (B × input)`, `h: (B × hidden)`.
    pub fn step(&self, tape: &mut Tape, bound: &Bound, x: Var, h: Var) -> Result<Var> {
        let hs = self.hidden_size;
        check_len("gru input width", self.input_size, tape.value(x).cols())?;
        check_len("gru hidden width", hs, tape.value(h).cols())?;
        let gi = tape.linear(x, bound.var(self.w_input), Some(bound.var(self.bias_input)))?;
        let gh = tape.linear(h, bound.var(self.w_hidden), Some(bound.var(self.bias_hidden)))?;
        let gi_rz = tape.slice(gi, 0, 2 * hs)?;
        let gh_rz = tape.slice(gh, 0, 2 * hs)?;
        let rz_pre = tape.add(gi_rz, gh_rz)?;
        let rz = tape.sigmoid(rz_pre);
        let r = tape.slice(rz, 0, hs)?;
        let z = tape.slice(rz, hs, 2 * hs)?;
        let gi_n = tape.slice(gi, 2 * hs, 3 * hs)?;
        let gh_n = tape.slice(gh, 2 * hs, 3 * hs)?;
        let gated = tape.mul(r, gh_n)?;
        let n_pre = tape.add(gi_n, gated)?;
        let n = tape.tanh(n_pre);
        let keep = tape.mul(z, h)?;
        let one_minus_z = tape.one_minus(z);
        let fresh = tape.mul(one_minus_z, n)?;
        tape.add(fresh, keep)
    }
}
