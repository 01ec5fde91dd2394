use super::{Mat, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Non-inverted dropout: training multiplies by a binary keep mask, evaluation
/// scales by the keep probability `1 - rate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dropout {
    pub rate: f64,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        Dropout { rate }
    }

    pub fn keep(&self) -> f64 {
        1.0 - self.rate
    }

    pub fn is_active(&self) -> bool {
        self.rate > 0.0
    }

    /// Multiplicative mask of `len` entries. No draws are consumed when the rate is zero.
    pub fn mask(&self, len: usize, mode: Mode, rng: &mut Rng) -> Mat {
        if !self.is_active() {
            return Mat::filled(len, 1, 1.0);
        }
        match mode {
            Mode::Eval => Mat::filled(len, 1, self.keep()),
            Mode::Train => {
                let keep = self.keep();
                let data = (0..len)
                    .map(|_| if rng.bernoulli(keep) { 1.0 } else { 0.0 })
                    .collect();
                Mat::from_vec(len, 1, data).expect("column length")
            }
        }
    }
}
