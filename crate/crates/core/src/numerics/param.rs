use super::Mat;

/// A trainable tensor with its gradient accumulator.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: Mat,
    pub grad: Mat,
}

impl Param {
    pub fn new(value: Mat) -> Self {
        let grad = Mat::zeros(value.rows(), value.cols());
        Param { value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    /// `value -= lr * grad`, then clears the gradient.
    pub fn sgd(&mut self, lr: f64) {
        for (v, g) in self.value.data_mut().iter_mut().zip(self.grad.data_mut()) {
            *v -= lr * *g;
            *g = 0.0;
        }
    }
}
