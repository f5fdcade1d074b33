use super::{Matrix, NnError, Rng};

/// Inverted dropout. The returned mask holds the per-entry multiplier
/// (`0` or `1/(1-p)`), so backward is a plain elementwise product.
pub fn dropout_forward(x: &Matrix, p: f64, rng: &mut Rng, training: bool) -> Result<(Matrix, Matrix), NnError> {
    if !(0.0..1.0).contains(&p) {
        return Err(NnError::InvalidRate(p));
    }
    if !training || p == 0.0 {
        return Ok((x.clone(), Matrix::filled(x.rows(), x.cols(), 1.0)));
    }
    let keep = 1.0 / (1.0 - p);
    let mut mask = Matrix::zeros(x.rows(), x.cols());
    for m in mask.data_mut() {
        if !rng.bernoulli(p) {
            *m = keep;
        }
    }
    let out = apply_mask(x, &mask);
    Ok((out, mask))
}

pub fn dropout_backward(upstream: &Matrix, mask: &Matrix) -> Matrix {
    apply_mask(upstream, mask)
}

pub(crate) fn apply_mask(x: &Matrix, mask: &Matrix) -> Matrix {
    debug_assert_eq!(x.shape(), mask.shape());
    let mut out = x.clone();
    for (o, &m) in out.data_mut().iter_mut().zip(mask.data()) {
        *o *= m;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Matrix {
        Matrix::from_vec(1, n, (0..n).map(|i| 1.0 + i as f64 * 0.25).collect()).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let x = sample(20);
        let mut rng = Rng::new(1);
        for training in [true, false] {
            let (y, mask) = dropout_forward(&x, 0.0, &mut rng, training).unwrap();
            assert_eq!(y, x);
            assert!(mask.data().iter().all(|&m| m == 1.0));
        }
    }

    #[test]
    fn eval_mode_is_identity() {
        let x = sample(20);
        let (y, _) = dropout_forward(&x, 0.5, &mut Rng::new(1), false).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn keep_fraction_and_scaling() {
        let n = 1_000_000;
        let x = Matrix::filled(1, n, 3.0);
        let (y, _) = dropout_forward(&x, 0.5, &mut Rng::new(2024), true).unwrap();
        let kept = y.data().iter().filter(|&&v| v != 0.0).count();
        let frac = kept as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.005, "kept fraction {frac}");
        assert!(y.data().iter().all(|&v| v == 0.0 || v == 6.0));
    }

    #[test]
    fn rejects_bad_rate() {
        let x = sample(3);
        assert!(matches!(dropout_forward(&x, 1.0, &mut Rng::new(0), true), Err(NnError::InvalidRate(_))));
        assert!(dropout_forward(&x, -0.1, &mut Rng::new(0), true).is_err());
    }

    #[test]
    fn backward_uses_same_mask() {
        let x = sample(100);
        let (y, mask) = dropout_forward(&x, 0.3, &mut Rng::new(5), true).unwrap();
        let g = dropout_backward(&Matrix::filled(1, 100, 1.0), &mask);
        for ((&yv, &xv), &gv) in y.data().iter().zip(x.data()).zip(g.data()) {
            assert_eq!(yv, xv * gv);
        }
    }
}
