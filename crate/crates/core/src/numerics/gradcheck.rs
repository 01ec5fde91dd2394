use super::Mat;
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-5;

/// Anything whose trainable tensors can be enumerated in a fixed order.
pub trait ParamSet {
    fn tensors(&self) -> Vec<&Mat>;
    fn tensors_mut(&mut self) -> Vec<&mut Mat>;
}

impl ParamSet for Vec<Mat> {
    fn tensors(&self) -> Vec<&Mat> {
        self.iter().collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Mat> {
        self.iter_mut().collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    /// (tensor index, flat entry index) of the worst entry.
    pub worst: Option<(usize, usize)>,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub entries: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / denom
}

/// Compares `analytic` against central differences of `loss` for every entry of
/// every tensor in `params`. Each entry is restored bit-exactly after probing.
pub fn grad_check<P, F>(
    params: &mut P,
    mut loss: F,
    analytic: &[Mat],
    eps: f64,
) -> Result<GradCheckReport>
where
    P: ParamSet,
    F: FnMut(&P) -> f64,
{
    grad_check_by_tensor(params, |p, _| loss(p), analytic, eps)
}

/// [`grad_check`] with a loss that is told which tensor is being probed, so
/// it can reuse work that does not depend on that tensor.
pub fn grad_check_by_tensor<P, F>(
    params: &mut P,
    mut loss: F,
    analytic: &[Mat],
    eps: f64,
) -> Result<GradCheckReport>
where
    P: ParamSet,
    F: FnMut(&P, usize) -> f64,
{
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Config(format!(
            "grad_check: eps must be positive, got {eps}"
        )));
    }
    let shapes: Vec<(usize, usize)> = params.tensors().iter().map(|m| m.shape()).collect();
    if shapes.len() != analytic.len() {
        return Err(Error::Length {
            what: "analytic gradients",
            got: analytic.len(),
            expected: shapes.len(),
        });
    }
    for (shape, grad) in shapes.iter().zip(analytic) {
        if *shape != grad.shape() {
            return Err(Error::Shape {
                op: "grad_check",
                left: *shape,
                right: grad.shape(),
            });
        }
    }

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst: None,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        entries: 0,
    };
    for (t, grad) in analytic.iter().enumerate() {
        for j in 0..grad.len() {
            let original = params.tensors()[t].data()[j];
            params.tensors_mut()[t].data_mut()[j] = original + eps;
            let plus = loss(params, t);
            params.tensors_mut()[t].data_mut()[j] = original - eps;
            let minus = loss(params, t);
            params.tensors_mut()[t].data_mut()[j] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad.data()[j];
            let err = relative_error(a, numeric);
            report.entries += 1;
            if err > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = err;
                report.worst = Some((t, j));
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    Ok(report)
}
