use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::tagger::TaggerModel;

fn check_rate(lr: f64) -> Result<()> {
    if lr.is_finite() && lr >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "learning rate must be finite and >= 0, got {lr}"
        )))
    }
}

/// `theta -= lr * grad` on every parameter using the accumulated gradient
/// buffers, which are cleared afterwards. No clipping is applied.
pub fn sgd_step(model: &mut TaggerModel, lr: f64) -> Result<()> {
    check_rate(lr)?;
    for p in model.params_mut() {
        p.sgd(lr);
    }
    model.bump_generation();
    model.meta.updates += 1;
    Ok(())
}

/// Same update with externally supplied gradients, one per parameter in
/// [`TaggerModel::params`] order. Nothing changes if any shape disagrees.
pub fn apply_update(model: &mut TaggerModel, gradients: &[Mat], lr: f64) -> Result<()> {
    check_rate(lr)?;
    let params = model.params();
    if params.len() != gradients.len() {
        return Err(Error::Length {
            what: "gradients",
            got: gradients.len(),
            expected: params.len(),
        });
    }
    for (p, g) in params.iter().zip(gradients) {
        if p.value.shape() != g.shape() {
            return Err(Error::Shape {
                op: "apply_update",
                left: p.value.shape(),
                right: g.shape(),
            });
        }
    }
    for (p, g) in model.params_mut().into_iter().zip(gradients) {
        p.value.axpy(-lr, g)?;
        p.zero_grad();
    }
    model.bump_generation();
    model.meta.updates += 1;
    Ok(())
}
