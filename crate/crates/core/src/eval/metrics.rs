use super::EvalError;

fn check(y: &[f64], y_hat: &[f64]) -> Result<(), EvalError> {
    if y.len() != y_hat.len() {
        return Err(EvalError::LengthMismatch { left: y.len(), right: y_hat.len() });
    }
    if y.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64, EvalError> {
    check(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Mean squared error.
pub fn mse(y: &[f64], y_hat: &[f64]) -> Result<f64, EvalError> {
    check(y, y_hat)?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64, EvalError> {
    Ok(mse(y, y_hat)?.sqrt())
}

/// Coefficient of determination against the mean of the observed values.
pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<f64, EvalError> {
    check(y, y_hat)?;
    if y.len() < 2 {
        return Err(EvalError::DegenerateVariance);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::DegenerateVariance);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Up, down or unchanged relative to a previous value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    pub fn of_change(from: f64, to: f64) -> Self {
        if to > from {
            Direction::Up
        } else if to < from {
            Direction::Down
        } else {
            Direction::Flat
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
            Direction::Flat => "FLAT",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Fraction of samples whose predicted change has the same sign as the
/// actual one. A zero change only matches a zero change.
pub fn direction_accuracy(pred: &[f64], prev: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check(pred, actual)?;
    if prev.len() != pred.len() {
        return Err(EvalError::LengthMismatch { left: pred.len(), right: prev.len() });
    }
    let hits = (0..pred.len())
        .filter(|&i| Direction::of_change(prev[i], pred[i]) == Direction::of_change(prev[i], actual[i]))
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

/// `100 · (pred − prev) / prev`.
pub fn percent_change(pred: f64, prev: f64) -> Result<f64, EvalError> {
    if prev == 0.0 {
        return Err(EvalError::ZeroBase);
    }
    Ok(100.0 * (pred - prev) / prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::Rng;
    use proptest::prelude::*;

    #[test]
    fn exact_predictions() {
        let y = [1500.0, 1620.0, 1390.0];
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn worked_example() {
        let (y, p) = ([0.0, 0.0], [3.0, 4.0]);
        assert!((mae(&y, &p).unwrap() - 3.5).abs() < 1e-12);
        assert!((mse(&y, &p).unwrap() - 12.5).abs() < 1e-12);
        assert!((rmse(&y, &p).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((rmse(&y, &p).unwrap() - 3.5355).abs() < 1e-4);
    }

    #[test]
    fn r2_hand_cases() {
        assert!((r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(r2(&[5.0, 5.0], &[1.0, 2.0]), Err(EvalError::DegenerateVariance)));
        assert!(matches!(r2(&[5.0], &[1.0]), Err(EvalError::DegenerateVariance)));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(mse(&[], &[]), Err(EvalError::EmptyInput)));
        assert!(matches!(direction_accuracy(&[1.0], &[1.0, 2.0], &[1.0]), Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn rmse_squared_is_mse() {
        let mut rng = Rng::new(21);
        for _ in 0..100 {
            let n = 1 + rng.below(50) as usize;
            let y: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.0, 3000.0)).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.0, 3000.0)).collect();
            let (r, m) = (rmse(&y, &p).unwrap(), mse(&y, &p).unwrap());
            assert!((r * r - m).abs() <= 1e-9 * m.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn direction_cases() {
        let a = [1510.0, 1480.0, 1500.0];
        let prev = [1500.0, 1500.0, 1500.0];
        assert_eq!(direction_accuracy(&a, &prev, &a).unwrap(), 1.0);
        assert_eq!(direction_accuracy(&[1520.0], &[1500.0], &[1490.0]).unwrap(), 0.0);
        assert_eq!(direction_accuracy(&[1500.0], &[1500.0], &[1501.0]).unwrap(), 0.0);
        assert_eq!(direction_accuracy(&[1500.0], &[1500.0], &[1500.0]).unwrap(), 1.0);
    }

    #[test]
    fn direction_recount() {
        let mut rng = Rng::new(4);
        let n = 50;
        let mut triple = |_| {
            let pick = |r: &mut Rng| 1500.0 + (r.below(5) as f64 - 2.0) * 10.0;
            (pick(&mut rng), 1500.0, pick(&mut rng))
        };
        let rows: Vec<(f64, f64, f64)> = (0..n).map(&mut triple).collect();
        let sign = |d: f64| if d > 0.0 { 1 } else if d < 0.0 { -1 } else { 0 };
        let mut hits = 0;
        for &(p, q, a) in &rows {
            if sign(p - q) == sign(a - q) {
                hits += 1;
            }
        }
        let pred: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let prev: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let act: Vec<f64> = rows.iter().map(|r| r.2).collect();
        assert_eq!(direction_accuracy(&pred, &prev, &act).unwrap(), hits as f64 / n as f64);
    }

    #[test]
    fn percent_change_cases() {
        assert_eq!(percent_change(1500.0, 1500.0).unwrap(), 0.0);
        assert!((percent_change(1650.0, 1500.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((percent_change(1350.0, 1500.0).unwrap() + 10.0).abs() < 1e-12);
        assert!(matches!(percent_change(10.0, 0.0), Err(EvalError::ZeroBase)));
    }

    fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (prop::collection::vec(-3000.0f64..3000.0, n), prop::collection::vec(-3000.0f64..3000.0, n))
        })
    }

    proptest! {
        #[test]
        fn metrics_ignore_order((y, p) in pairs(), seed in any::<u64>()) {
            let mut idx: Vec<usize> = (0..y.len()).collect();
            Rng::new(seed).shuffle(&mut idx);
            let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            let ps: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
            prop_assert!(close(mae(&y, &p).unwrap(), mae(&ys, &ps).unwrap()));
            prop_assert!(close(mse(&y, &p).unwrap(), mse(&ys, &ps).unwrap()));
            if let (Ok(a), Ok(b)) = (r2(&y, &p), r2(&ys, &ps)) {
                prop_assert!(close(a, b));
            }
        }

        #[test]
        fn shift_invariance((y, p) in pairs(), c in -1000.0f64..1000.0) {
            let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
            let ps: Vec<f64> = p.iter().map(|v| v + c).collect();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * (1.0 + a.abs());
            prop_assert!(close(mae(&y, &p).unwrap(), mae(&ys, &ps).unwrap()));
            prop_assert!(close(mse(&y, &p).unwrap(), mse(&ys, &ps).unwrap()));
            if let (Ok(a), Ok(b)) = (r2(&y, &p), r2(&ys, &ps)) {
                prop_assert!(close(a, b));
            }
        }

        #[test]
        fn r2_never_exceeds_one((y, p) in pairs()) {
            if let Ok(v) = r2(&y, &p) {
                prop_assert!(v <= 1.0);
            }
        }

        #[test]
        fn direction_accuracy_is_a_fraction((y, p) in pairs()) {
            let prev: Vec<f64> = y.iter().map(|v| v * 0.5).collect();
            let d = direction_accuracy(&p, &prev, &y).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
