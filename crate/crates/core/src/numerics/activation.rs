use super::Mat;

/// Logistic sigmoid, evaluated so that neither branch overflows.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigm(x: &Mat) -> Mat {
    x.map(sigmoid)
}

pub fn tanh_m(x: &Mat) -> Mat {
    x.map(f64::tanh)
}

/// Sigmoid derivative expressed through the activated value `y = sigm(x)`.
pub fn sigm_d(y: &Mat) -> Mat {
    y.map(|v| v * (1.0 - v))
}

/// Tanh derivative expressed through the activated value `y = tanh(x)`.
pub fn tanh_d(y: &Mat) -> Mat {
    y.map(|v| 1.0 - v * v)
}

/// Softmax over a column vector with max-subtraction.
pub fn softmax(x: &Mat) -> Mat {
    let max = x.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = x.map(|v| (v - max).exp());
    let total = exps.sum();
    exps.map(|v| v / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(tanh_m(&Mat::column(&[0.0])).data()[0], 0.0);
        let big = sigmoid(500.0);
        assert!(big > 0.0 && big <= 1.0);
        let small = sigmoid(-500.0);
        assert!((0.0..1.0).contains(&small));
        assert_eq!(sigmoid(-1e4), 0.0);
    }

    #[test]
    fn derivatives_from_activated_values() {
        let y = sigm(&Mat::column(&[0.3]));
        let d = sigm_d(&y).data()[0];
        let h = 1e-6;
        let fd = (sigmoid(0.3 + h) - sigmoid(0.3 - h)) / (2.0 * h);
        assert!((d - fd).abs() < 1e-9);
        let t = tanh_m(&Mat::column(&[0.7]));
        let fd = ((0.7f64 + h).tanh() - (0.7f64 - h).tanh()) / (2.0 * h);
        assert!((tanh_d(&t).data()[0] - fd).abs() < 1e-9);
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&Mat::column(&[0.0, 0.0])).data(), &[0.5, 0.5]);
        let y = softmax(&Mat::column(&[2f64.ln(), 0.0]));
        assert!((y.data()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((y.data()[1] - 1.0 / 3.0).abs() < 1e-12);
        let y = softmax(&Mat::column(&[1000.0, 0.0]));
        assert!((y.data()[0] - 1.0).abs() < 1e-12);
        assert!(y.data()[1].abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            v in proptest::collection::vec(-50.0f64..50.0, 1..12),
            c in -100.0f64..100.0,
        ) {
            let x = Mat::column(&v);
            let y = softmax(&x);
            proptest::prop_assert!((y.sum() - 1.0).abs() < 1e-12);
            proptest::prop_assert!(y.data().iter().all(|&p| p >= 0.0));
            let shifted = softmax(&x.map(|e| e + c));
            for (a, b) in y.data().iter().zip(shifted.data()) {
                proptest::prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn ranges(x in -800.0f64..800.0) {
            let s = sigmoid(x);
            proptest::prop_assert!((0.0..=1.0).contains(&s));
            proptest::prop_assert!((-1.0..=1.0).contains(&x.tanh()));
        }
    }
}
