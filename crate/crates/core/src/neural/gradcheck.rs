//! Central-difference verification of tape gradients.

use alloc::vec::Vec;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Outcome of [`grad_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic − numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// (input index, element index) where the relative error peaked.
    pub worst: (usize, usize),
    /// The denominator floor: `1e-3 · max |numeric|`, so components far below
    /// the gradient's overall scale are judged against that scale.
    pub floor: f64,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }
}

fn evaluate<F>(f: &F, inputs: &[Tensor], requires_grad: bool) -> Result<(Tape, Vec<Var>, Var)>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs
        .iter()
        .map(|t| tape.leaf(t.clone(), requires_grad))
        .collect();
    let out = f(&mut tape, &vars)?;
    if tape.value(out).len() != 1 {
        return Err(Error::Shape {
            what: "grad_check output size",
            expected: 1,
            found: tape.value(out).len(),
        });
    }
    Ok((tape, vars, out))
}

/// Compares the tape gradient of the scalar function `f` at `inputs` against
/// central differences with step `h`.
///
/// `f` must be deterministic: it is re-run twice per input element, so any
/// randomness has to be re-seeded inside it.
pub fn grad_check<F>(f: F, inputs: &[Tensor], h: f64, tolerance: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let (tape, vars, out) = evaluate(&f, inputs, true)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| grads.get_or_zeros(v, t.shape()))
        .collect();
    drop(tape);

    let mut numeric: Vec<Vec<f64>> = Vec::with_capacity(inputs.len());
    let mut work: Vec<Tensor> = inputs.to_vec();
    for i in 0..inputs.len() {
        let mut column = Vec::with_capacity(inputs[i].len());
        for k in 0..inputs[i].len() {
            let original = work[i].data()[k];
            work[i].data_mut()[k] = original + h;
            let (t, _, o) = evaluate(&f, &work, false)?;
            let plus = t.value(o).item();
            work[i].data_mut()[k] = original - h;
            let (t, _, o) = evaluate(&f, &work, false)?;
            let minus = t.value(o).item();
            work[i].data_mut()[k] = original;
            column.push((plus - minus) / (2.0 * h));
        }
        numeric.push(column);
    }

    let scale = numeric
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = (1e-3 * scale).max(1e-12);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst: (0, 0),
        floor,
        checked: 0,
        tolerance,
    };
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        for (k, (&av, &nv)) in a.data().iter().zip(n).enumerate() {
            let abs = (av - nv).abs();
            let rel = abs / av.abs().max(nv.abs()).max(floor);
            if !rel.is_finite() || rel > report.max_rel_error {
                report.max_rel_error = if rel.is_finite() { rel } else { f64::INFINITY };
                report.worst = (i, k);
            }
            report.max_abs_error = report.max_abs_error.max(abs);
            report.checked += 1;
        }
    }
    Ok(report)
}
