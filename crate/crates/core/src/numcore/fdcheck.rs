//! Central finite-difference verification of tape gradients.

use crate::{Error, Result};

use super::tape::{NodeId, Tape};
use super::tensor::Tensor;

/// Compare the tape's analytic gradients against central finite differences
/// for a scalar loss and return the worst elementwise relative error.
///
/// `build` receives a fresh tape with the given tensors already inserted as
/// parameter leaves and must return the scalar loss node. The graph must be
/// deterministic given the parameters (freeze any noise as constants). Each
/// probe perturbs one parameter entry and re-runs the recorded graph via
/// [`Tape::recompute`], so the loss is evaluated `2 * total_entries` times.
///
/// The relative error denominator is `max(|analytic|, |numeric|, 1e-12)`.
pub fn finite_difference_check<F>(build: F, params: &[Tensor], epsilon: f64) -> Result<f64>
where
    F: FnOnce(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    if !(1e-8..=1e-4).contains(&epsilon) {
        return Err(Error::Parameter(format!("epsilon must be in [1e-8, 1e-4], got {epsilon}")));
    }
    let mut tape = Tape::new();
    let ids: Vec<NodeId> = params.iter().map(|p| tape.param(p)).collect();
    let loss_id = build(&mut tape, &ids)?;
    if tape.value(loss_id).len() != 1 {
        return Err(Error::Contract("finite_difference_check: loss must be scalar".into()));
    }
    if !tape.scalar_value(loss_id).is_finite() {
        return Err(Error::Numerical("finite_difference_check: loss is not finite".into()));
    }
    let grads = tape.backward(loss_id)?;

    let mut worst: f64 = 0.0;
    for (param, &id) in params.iter().zip(&ids) {
        let analytic = grads.get(id).to_vec();
        let mut data = param.data().to_vec();
        for entry in 0..data.len() {
            let original = data[entry];

            data[entry] = original + epsilon;
            tape.set_leaf(id, &data)?;
            tape.recompute();
            let loss_plus = tape.scalar_value(loss_id);

            data[entry] = original - epsilon;
            tape.set_leaf(id, &data)?;
            tape.recompute();
            let loss_minus = tape.scalar_value(loss_id);

            data[entry] = original;
            tape.set_leaf(id, &data)?;

            if !loss_plus.is_finite() || !loss_minus.is_finite() {
                return Err(Error::Numerical(format!(
                    "finite_difference_check: non-finite loss at probe entry {entry}"
                )));
            }
            let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
            let denom = analytic[entry].abs().max(numeric.abs()).max(1e-12);
            let rel = (analytic[entry] - numeric).abs() / denom;
            worst = worst.max(rel);
        }
    }
    // Leave the tape consistent with the unperturbed parameters.
    tape.recompute();
    Ok(worst)
}
