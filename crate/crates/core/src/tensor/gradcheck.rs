//! Central finite-difference gradient checking.
//!
//! The numerical side only ever runs forward passes on constant inputs, so it
//! is independent of the backward implementation it is compared against.

use crate::error::Result;
use crate::tensor::{Graph, NodeId, Tensor};

/// Denominator floor for the relative error, so entries whose true gradient
/// is zero compare on an absolute 1e-6 scale.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// Outcome of comparing analytic and numerical gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(input index, element index)` of the worst entry.
    pub worst: (usize, usize),
    pub checked: usize,
}

/// `|a - n| / max(|a|, |n|, REL_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR);
    (analytic - numeric).abs() / scale
}

fn evaluate<F>(inputs: &[Tensor], build: &F) -> Result<f64>
where
    F: Fn(&mut Graph, &[NodeId]) -> Result<NodeId>,
{
    let mut g = Graph::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| g.constant(t.clone())).collect();
    let loss = build(&mut g, &ids)?;
    Ok(g.value(loss).item())
}

/// Central-difference gradient of the scalar function defined by `build`
/// with respect to input `which`.
pub fn numerical_gradient<F>(inputs: &[Tensor], which: usize, h: f64, build: &F) -> Result<Tensor>
where
    F: Fn(&mut Graph, &[NodeId]) -> Result<NodeId>,
{
    let mut work = inputs.to_vec();
    let mut grad = Tensor::zeros(inputs[which].shape());
    for j in 0..inputs[which].numel() {
        let orig = inputs[which].data()[j];
        work[which].data_mut()[j] = orig + h;
        let plus = evaluate(&work, build)?;
        work[which].data_mut()[j] = orig - h;
        let minus = evaluate(&work, build)?;
        work[which].data_mut()[j] = orig;
        grad.data_mut()[j] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Compares backpropagated gradients of every input against central
/// differences with step `h`.
pub fn check_gradients<F>(inputs: &[Tensor], h: f64, build: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, &[NodeId]) -> Result<NodeId>,
{
    let mut g = Graph::new();
    let ids: Vec<NodeId> = inputs.iter().map(|t| g.parameter(t.clone())).collect();
    let loss = build(&mut g, &ids)?;
    g.backward(loss)?;
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        checked: 0,
    };
    for (i, id) in ids.iter().enumerate() {
        let analytic = g.grad(*id);
        let numeric = numerical_gradient(inputs, i, h, &build)?;
        for (j, (a, n)) in analytic.data().iter().zip(numeric.data()).enumerate() {
            let err = relative_error(*a, *n);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (i, j);
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Reduces a node to a scalar by a fixed weighted sum, so every output
/// element contributes a distinct gradient.
pub fn weighted_sum(g: &mut Graph, x: NodeId, weights: &Tensor) -> Result<NodeId> {
    let w = g.constant(weights.clone());
    let prod = g.mul(x, w)?;
    Ok(g.sum(prod))
}
