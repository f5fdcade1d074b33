use super::recurrent::glorot;
use crate::nncore::{gemm_nn, gemm_nt, gemm_tn, Matrix, Param, Rng};

/// Fully connected layer `y = act(x·W + b)`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub weight: Param,
    pub bias: Param,
    relu: bool,
}

impl Dense {
    pub fn new(name: &str, input: usize, output: usize, relu: bool, rng: &mut Rng) -> Self {
        Self {
            weight: Param::new(format!("{name}.weight"), glorot(rng, input, output)),
            bias: Param::new(format!("{name}.bias"), Matrix::zeros(1, output)),
            relu,
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }

    pub(crate) fn forward(&self, x: &Matrix) -> Matrix {
        let mut y = Matrix::zeros(x.rows(), self.weight.value.cols());
        gemm_nn(&mut y, x, &self.weight.value);
        y.add_row_broadcast(&self.bias.value);
        if self.relu {
            for v in y.data_mut() {
                *v = v.max(0.0);
            }
        }
        y
    }

    /// `x` and `y` are this layer's input and output from the forward pass.
    pub(crate) fn backward(&mut self, x: &Matrix, y: &Matrix, dy: &Matrix) -> Matrix {
        let mut dz = dy.clone();
        if self.relu {
            for (g, &out) in dz.data_mut().iter_mut().zip(y.data()) {
                if out <= 0.0 {
                    *g = 0.0;
                }
            }
        }
        gemm_tn(&mut self.weight.grad, x, &dz);
        self.bias.grad.add_row_broadcast(&dz.column_sums());
        let mut dx = Matrix::zeros(x.rows(), x.cols());
        gemm_nt(&mut dx, &dz, &self.weight.value);
        dx
    }
}
