use super::matrix::{checked, Matrix};

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Matrix) -> Matrix {
    checked(x.map(sigmoid_scalar))
}

pub fn tanh_act(x: &Matrix) -> Matrix {
    checked(x.map(f64::tanh))
}

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

/// Row-wise softmax with the row max subtracted first.
pub fn softmax_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        softmax_in_place(out.row_mut(r));
    }
    checked(out)
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

// Derivatives expressed in terms of the activation's output.

pub fn sigmoid_grad_from_output(y: &Matrix) -> Matrix {
    y.map(|s| s * (1.0 - s))
}

pub fn tanh_grad_from_output(y: &Matrix) -> Matrix {
    y.map(|t| 1.0 - t * t)
}

pub fn relu_grad_from_output(y: &Matrix) -> Matrix {
    y.map(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

/// Backward through a row-wise softmax given its output `y` and upstream `dy`.
pub fn softmax_rows_backward(y: &Matrix, dy: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(y.rows(), y.cols());
    for r in 0..y.rows() {
        let yr = y.row(r);
        let dr = dy.row(r);
        let dot: f64 = yr.iter().zip(dr).map(|(a, b)| a * b).sum();
        for ((o, &s), &d) in out.row_mut(r).iter_mut().zip(yr).zip(dr) {
            *o = s * (d - dot);
        }
    }
    out
}
