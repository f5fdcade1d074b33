use super::Param;

/// Anything that exposes its trainable parameters in a fixed order.
pub trait HasParams {
    fn params(&self) -> Vec<&Param>;
    fn params_mut(&mut self) -> Vec<&mut Param>;
}

/// Compares the analytic gradients currently stored in `target`'s params
/// with central differences of `loss`, returning the largest
/// `|a - n| / max(1e-8, |a| + |n|)` over every parameter entry.
///
/// `loss` must be a pure function of the parameter values (freeze any
/// dropout masks beforehand).
pub fn grad_check<T: HasParams>(target: &mut T, mut loss: impl FnMut(&T) -> f64, epsilon: f64) -> f64 {
    let analytic: Vec<Vec<f64>> = target.params().iter().map(|p| p.grad.data().to_vec()).collect();
    let mut worst = 0.0f64;
    for (pi, grads) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let orig = target.params()[pi].value.data()[j];
            target.params_mut()[pi].value.data_mut()[j] = orig + epsilon;
            let plus = loss(target);
            target.params_mut()[pi].value.data_mut()[j] = orig - epsilon;
            let minus = loss(target);
            target.params_mut()[pi].value.data_mut()[j] = orig;
            let n = (plus - minus) / (2.0 * epsilon);
            let rel = (a - n).abs() / (a.abs() + n.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::Matrix;

    struct Quadratic(Param);

    impl HasParams for Quadratic {
        fn params(&self) -> Vec<&Param> {
            vec![&self.0]
        }
        fn params_mut(&mut self) -> Vec<&mut Param> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn exact_for_quadratic() {
        let mut q = Quadratic(Param::new("theta", Matrix::row_vector(&[3.0])));
        q.0.grad.set(0, 0, 6.0);
        let err = grad_check(&mut q, |q| q.0.value.get(0, 0).powi(2), 1e-5);
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let mut q = Quadratic(Param::new("theta", Matrix::row_vector(&[3.0])));
        q.0.grad.set(0, 0, 5.0);
        let err = grad_check(&mut q, |q| q.0.value.get(0, 0).powi(2), 1e-5);
        assert!(err > 0.05);
    }

    #[test]
    fn leaves_values_untouched() {
        let mut q = Quadratic(Param::new("theta", Matrix::row_vector(&[0.1, 0.2, 0.3])));
        let before = q.0.value.clone();
        grad_check(&mut q, |q| q.0.value.data().iter().map(|x| x.sin()).sum(), 1e-5);
        assert_eq!(q.0.value, before);
    }
}
