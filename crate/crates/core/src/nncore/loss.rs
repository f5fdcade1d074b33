use super::{Matrix, NnError};

/// Mean absolute error and its subgradient, with `sign(0) = 0`.
pub fn mae_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix), NnError> {
    if pred.shape() != target.shape() {
        return Err(NnError::ShapeMismatch { op: "mae_loss", left: pred.shape(), right: target.shape() });
    }
    let n = pred.data().len();
    if n == 0 {
        return Ok((0.0, pred.clone()));
    }
    let inv = 1.0 / n as f64;
    let mut total = 0.0;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        total += d.abs();
        *g = if d > 0.0 {
            inv
        } else if d < 0.0 {
            -inv
        } else {
            0.0
        };
    }
    Ok((total * inv, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_on_exact_match() {
        let m = Matrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]);
        let (l, g) = mae_loss(&m, &m).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_cases() {
        let (l, g) = mae_loss(&Matrix::row_vector(&[2.0]), &Matrix::row_vector(&[5.0])).unwrap();
        assert_eq!(l, 3.0);
        assert_eq!(g.data(), &[-1.0]);

        let (l, g) = mae_loss(&Matrix::row_vector(&[1.0, 4.0]), &Matrix::row_vector(&[2.0, 2.0])).unwrap();
        assert_eq!(l, 1.5);
        assert_eq!(g.data(), &[-0.5, 0.5]);
    }

    #[test]
    fn shape_mismatch() {
        assert!(mae_loss(&Matrix::zeros(1, 2), &Matrix::zeros(2, 1)).is_err());
    }
}
