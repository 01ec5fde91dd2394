use super::{Mat, Rng};
use crate::error::{Error, Result};

const MAX_SVD_ATTEMPTS: usize = 8;
const MAX_SWEEPS: usize = 100;

/// How the second argument of `N(0, 1/sqrt(fan_in))` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GaussianScale {
    /// `1/sqrt(fan_in)` is the variance.
    #[default]
    Variance,
    /// `1/sqrt(fan_in)` is the standard deviation.
    StdDev,
}

impl GaussianScale {
    pub fn std_dev(self, fan_in: usize) -> f64 {
        let spread = 1.0 / (fan_in as f64).sqrt();
        let base = match self {
            GaussianScale::Variance => spread.sqrt(),
            GaussianScale::StdDev => spread,
        };
        0.1 * base
    }

    pub fn name(self) -> &'static str {
        match self {
            GaussianScale::Variance => "variance",
            GaussianScale::StdDev => "stddev",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "variance" => Some(GaussianScale::Variance),
            "stddev" => Some(GaussianScale::StdDev),
            _ => None,
        }
    }
}

/// Entries drawn i.i.d. from `0.1 * N(0, 1/sqrt(fan_in))`.
pub fn gaussian_init(
    rows: usize,
    cols: usize,
    fan_in: usize,
    scale: GaussianScale,
    rng: &mut Rng,
) -> Result<Mat> {
    if fan_in == 0 {
        return Err(Error::Config("gaussian_init: fan_in must be >= 1".into()));
    }
    let std = scale.std_dev(fan_in);
    let data = (0..rows * cols).map(|_| std * rng.normal()).collect();
    Mat::from_vec(rows, cols, data)
}

/// Random orthonormal matrix: the left singular factor of a Gaussian draw
/// (or the right factor, transposed, for wide shapes).
pub fn orthogonal_init(rows: usize, cols: usize, rng: &mut Rng) -> Result<Mat> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config("orthogonal_init: empty shape".into()));
    }
    let (tall_rows, tall_cols) = if rows >= cols {
        (rows, cols)
    } else {
        (cols, rows)
    };
    for _ in 0..MAX_SVD_ATTEMPTS {
        let data = (0..tall_rows * tall_cols).map(|_| rng.normal()).collect();
        let draw = Mat::from_vec(tall_rows, tall_cols, data)?;
        if let Some(u) = left_singular_vectors(draw) {
            return Ok(if rows >= cols { u } else { u.transpose() });
        }
    }
    Err(Error::SvdNoConvergence(MAX_SVD_ATTEMPTS))
}

/// One-sided Jacobi SVD on a tall matrix; returns `U` with orthonormal columns,
/// or `None` on non-convergence or a numerically rank-deficient draw.
fn left_singular_vectors(mut a: Mat) -> Option<Mat> {
    let (m, n) = a.shape();
    let tol = 1e-15;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let ap = a.get(i, p);
                    let aq = a.get(i, q);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let ap = a.get(i, p);
                    let aq = a.get(i, q);
                    a.set(i, p, c * ap - s * aq);
                    a.set(i, q, s * ap + c * aq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    for j in 0..n {
        let norm = (0..m).map(|i| a.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for i in 0..m {
            a.set(i, j, a.get(i, j) / norm);
        }
    }
    Some(a)
}

/// Largest absolute deviation of `QᵀQ` (tall) or `QQᵀ` (wide) from the identity.
pub fn orthogonality_defect(q: &Mat) -> f64 {
    let gram = if q.rows() >= q.cols() {
        q.t_matmul(q)
    } else {
        q.matmul(&q.transpose())
    }
    .expect("gram shapes agree");
    let eye = Mat::identity(gram.rows());
    gram.sub(&eye).expect("square").max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_and_tall_are_orthonormal() {
        let mut rng = Rng::new(1);
        for &(r, c) in &[(4, 4), (8, 4), (4, 8), (1, 1), (16, 16), (3, 7), (33, 16)] {
            let q = orthogonal_init(r, c, &mut rng).unwrap();
            assert_eq!(q.shape(), (r, c));
            assert!(orthogonality_defect(&q) < 1e-6, "{r}x{c}");
        }
    }

    #[test]
    fn orthogonal_is_deterministic() {
        let a = orthogonal_init(5, 5, &mut Rng::new(9)).unwrap();
        let b = orthogonal_init(5, 5, &mut Rng::new(9)).unwrap();
        let bits = |m: &Mat| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    fn sample_std(fan_in: usize, scale: GaussianScale) -> f64 {
        let m = gaussian_init(1000, 1000, fan_in, scale, &mut Rng::new(17)).unwrap();
        let n = m.len() as f64;
        let mean = m.sum() / n;
        (m.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn gaussian_spread_matches_variance_reading() {
        // 1/sqrt(100) = 0.1 as variance => std sqrt(0.1), times 0.1
        let want = 0.1 * 0.1f64.sqrt();
        let got = sample_std(100, GaussianScale::Variance);
        assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
        let got = sample_std(1, GaussianScale::Variance);
        assert!((got / 0.1 - 1.0).abs() < 0.02, "{got}");
        let got = sample_std(100, GaussianScale::StdDev);
        assert!((got / 0.01 - 1.0).abs() < 0.02, "{got}");
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = gaussian_init(3, 4, 10, GaussianScale::Variance, &mut Rng::new(2)).unwrap();
        let b = gaussian_init(3, 4, 10, GaussianScale::Variance, &mut Rng::new(2)).unwrap();
        assert_eq!(a, b);
        assert!(gaussian_init(1, 1, 0, GaussianScale::Variance, &mut Rng::new(2)).is_err());
    }
}
