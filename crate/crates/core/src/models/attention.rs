use super::recurrent::glorot;
use super::ModelError;
use crate::nncore::{gemm_nn, gemm_nt, gemm_tn, softmax_in_place, Matrix, NnError, Param, Rng};

/// Additive attention over the top recurrent layer's states, queried by its
/// final state:
///
/// ```text
/// e_t = tanh(s_t·W1 + q·W2)
/// score_t = e_t·v
/// α = softmax(score);  context = Σ α_t s_t
/// ```
#[derive(Clone, Debug)]
pub struct Attention {
    pub w_enc: Param,
    pub w_query: Param,
    pub v: Param,
}

#[derive(Clone, Debug)]
pub(crate) struct AttentionCache {
    states: Matrix,
    query: Matrix,
    /// `tanh` activations, `(T·B) × D`.
    energy: Matrix,
    /// Weights per batch item, `B × T`.
    pub alphas: Matrix,
}

impl Attention {
    pub fn new(width: usize, rng: &mut Rng) -> Self {
        Self {
            w_enc: Param::new("attention.w_enc", glorot(rng, width, width)),
            w_query: Param::new("attention.w_query", glorot(rng, width, width)),
            v: Param::new("attention.v", glorot(rng, width, 1)),
        }
    }

    pub fn width(&self) -> usize {
        self.v.value.rows()
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![&self.w_enc, &self.w_query, &self.v]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w_enc, &mut self.w_query, &mut self.v]
    }

    /// Single-sequence attention: `states` is `T × D`, `query` has length `D`.
    /// Returns the context vector and the `T` weights.
    pub fn attention_forward(&self, states: &Matrix, query: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let d = self.width();
        if states.cols() != d || query.len() != d || states.rows() == 0 {
            return Err(NnError::ShapeMismatch {
                op: "attention",
                left: states.shape(),
                right: (1, query.len()),
            }
            .into());
        }
        let (ctx, cache) = self.forward(states, &Matrix::row_vector(query), states.rows(), 1);
        Ok((ctx.into_vec(), cache.alphas.into_vec()))
    }

    pub(crate) fn forward(&self, states: &Matrix, query: &Matrix, steps: usize, batch: usize) -> (Matrix, AttentionCache) {
        let d = self.width();
        let mut qw = Matrix::zeros(batch, d);
        gemm_nn(&mut qw, query, &self.w_query.value);
        let mut energy = Matrix::zeros(steps * batch, d);
        gemm_nn(&mut energy, states, &self.w_enc.value);
        for t in 0..steps {
            energy.add_row_block(t * batch, &qw);
        }
        for e in energy.data_mut() {
            *e = e.tanh();
        }
        let mut scores = Matrix::zeros(steps * batch, 1);
        gemm_nn(&mut scores, &energy, &self.v.value);

        let mut alphas = Matrix::zeros(batch, steps);
        let mut ctx = Matrix::zeros(batch, d);
        for b in 0..batch {
            let row = alphas.row_mut(b);
            for (t, a) in row.iter_mut().enumerate() {
                *a = scores.get(t * batch + b, 0);
            }
            softmax_in_place(row);
            for t in 0..steps {
                let a = alphas.get(b, t);
                let s = states.row(t * batch + b);
                for (c, &sv) in ctx.row_mut(b).iter_mut().zip(s) {
                    *c += a * sv;
                }
            }
        }
        let cache = AttentionCache { states: states.clone(), query: query.clone(), energy, alphas };
        (ctx, cache)
    }

    /// Returns gradients w.r.t. the states and the query.
    pub(crate) fn backward(&mut self, cache: &AttentionCache, d_ctx: &Matrix, steps: usize, batch: usize) -> (Matrix, Matrix) {
        let d = self.width();
        let states = &cache.states;
        let mut d_states = Matrix::zeros(steps * batch, d);
        let mut d_scores = Matrix::zeros(steps * batch, 1);
        for b in 0..batch {
            let dc = d_ctx.row(b);
            let mut d_alpha = vec![0.0; steps];
            for (t, da) in d_alpha.iter_mut().enumerate() {
                let row = t * batch + b;
                let a = cache.alphas.get(b, t);
                *da = dc.iter().zip(states.row(row)).map(|(x, y)| x * y).sum();
                for (ds, &g) in d_states.row_mut(row).iter_mut().zip(dc) {
                    *ds += a * g;
                }
            }
            let dot: f64 = (0..steps).map(|t| cache.alphas.get(b, t) * d_alpha[t]).sum();
            for (t, da) in d_alpha.iter().enumerate() {
                d_scores.set(t * batch + b, 0, cache.alphas.get(b, t) * (da - dot));
            }
        }

        gemm_tn(&mut self.v.grad, &cache.energy, &d_scores);
        let mut d_pre = Matrix::zeros(steps * batch, d);
        gemm_nt(&mut d_pre, &d_scores, &self.v.value);
        for (g, &e) in d_pre.data_mut().iter_mut().zip(cache.energy.data()) {
            *g *= 1.0 - e * e;
        }

        gemm_tn(&mut self.w_enc.grad, states, &d_pre);
        gemm_nt(&mut d_states, &d_pre, &self.w_enc.value);

        let mut d_qw = Matrix::zeros(batch, d);
        for t in 0..steps {
            d_qw.add_row_block(0, &d_pre.row_block(t * batch, batch));
        }
        gemm_tn(&mut self.w_query.grad, &cache.query, &d_qw);
        let mut d_query = Matrix::zeros(batch, d);
        gemm_nt(&mut d_query, &d_qw, &self.w_query.value);
        (d_states, d_query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scoring_vector_gives_uniform_weights() {
        let mut rng = Rng::new(1);
        let mut att = Attention::new(3, &mut rng);
        att.v.value.fill(0.0);
        let states = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![3.0, 1.0, 0.0], vec![-1.0, 2.0, 1.0], vec![0.0, 0.0, 1.0]]);
        let (ctx, alphas) = att.attention_forward(&states, &[0.5, 0.5, 0.5]).unwrap();
        for a in &alphas {
            assert!((a - 0.25).abs() < 1e-12);
        }
        assert!((ctx[0] - 0.75).abs() < 1e-12);
        assert!((ctx[1] - 0.75).abs() < 1e-12);
        assert!((ctx[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_two_by_three() {
        // Identity projections and v = (1, 1): score_t = Σ tanh(s_t + q).
        let mut rng = Rng::new(0);
        let mut att = Attention::new(2, &mut rng);
        att.w_enc.value = Matrix::identity(2);
        att.w_query.value = Matrix::identity(2);
        att.v.value = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        let states = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, -1.0]]);
        let q = [0.5, 0.0];
        let scores: Vec<f64> = vec![
            0.5f64.tanh(),
            1.5f64.tanh(),
            0.5f64.tanh() + (-1.0f64).tanh(),
        ];
        let m = scores.iter().cloned().fold(f64::MIN, f64::max);
        let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
        let expect: Vec<f64> = scores.iter().map(|s| (s - m).exp() / z).collect();
        let (ctx, alphas) = att.attention_forward(&states, &q).unwrap();
        for (a, e) in alphas.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-12);
        }
        assert!((ctx[0] - expect[1]).abs() < 1e-12);
        assert!((ctx[1] + expect[2]).abs() < 1e-12);
        assert!((alphas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_width() {
        let att = Attention::new(3, &mut Rng::new(0));
        assert!(att.attention_forward(&Matrix::zeros(2, 2), &[0.0, 0.0]).is_err());
    }
}
