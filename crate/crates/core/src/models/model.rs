use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use super::attention::{Attention, AttentionCache};
use super::dense::Dense;
use super::recurrent::{BiLstmLayer, GruLayer, LstmLayer, RecurrentCache, RecurrentLayer};
use super::{ModelConfig, ModelError, ModelKind, SeqBatch};
use crate::nncore::{adam_step, apply_mask, clip_grad_norm, dropout_forward, grad_norm, AdamConfig, HasParams, Matrix, Param, Rng};

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}

/// How dropout behaves during a forward pass.
pub enum ForwardMode<'a> {
    /// No dropout.
    Eval,
    /// Draw fresh masks from the stream.
    Train(&'a mut Rng),
    /// Reuse masks recorded by an earlier pass.
    Replay(&'a DropoutMasks),
}

/// Dropout masks of one forward pass, one per recurrent layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMasks(pub Vec<Matrix>);

/// Everything backward needs from a forward pass.
#[derive(Debug)]
pub struct Tape {
    model_id: u64,
    generation: u64,
    steps: usize,
    batch: usize,
    layer_caches: Vec<RecurrentCache>,
    masks: Option<DropoutMasks>,
    attention: Option<(AttentionCache, Matrix)>,
    head_input: Matrix,
    hidden_act: Matrix,
    output: Matrix,
}

impl Tape {
    pub fn masks(&self) -> Option<&DropoutMasks> {
        self.masks.as_ref()
    }

    /// Attention weights, `B × T`, when the model has attention.
    pub fn attention_weights(&self) -> Option<&Matrix> {
        self.attention.as_ref().map(|(c, _)| &c.alphas)
    }
}

/// Stacked recurrent encoder, optional attention, and a two-layer head.
#[derive(Debug)]
pub struct Model {
    config: ModelConfig,
    layers: Vec<RecurrentLayer>,
    attention: Option<Attention>,
    dense: Dense,
    output: Dense,
    id: u64,
    generation: u64,
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Self {
            config: self.config.clone(),
            layers: self.layers.clone(),
            attention: self.attention.clone(),
            dense: self.dense.clone(),
            output: self.output.clone(),
            id: fresh_id(),
            generation: 0,
        }
    }
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = Rng::derived(config.init_seed, 0x1A17);
        let width = config.recurrent_width();
        let mut layers = Vec::with_capacity(config.n_layers);
        for l in 0..config.n_layers {
            let input = if l == 0 { config.input_features } else { width };
            let layer = match config.kind {
                ModelKind::Lstm | ModelKind::LstmAttn => {
                    RecurrentLayer::Lstm(LstmLayer::new(&format!("lstm{l}"), input, config.hidden, &mut rng))
                }
                ModelKind::Gru => RecurrentLayer::Gru(GruLayer::new(&format!("gru{l}"), input, config.hidden, &mut rng)),
                ModelKind::BiLstm => {
                    RecurrentLayer::BiLstm(BiLstmLayer::new(&format!("bilstm{l}"), input, config.hidden, &mut rng))
                }
            };
            layers.push(layer);
        }
        let attention = (config.kind == ModelKind::LstmAttn).then(|| Attention::new(width, &mut rng));
        let dense = Dense::new("dense", config.head_input_width(), config.dense_hidden, true, &mut rng);
        let output = Dense::new("output", config.dense_hidden, config.output_features, false, &mut rng);
        Ok(Self { config, layers, attention, dense, output, id: fresh_id(), generation: 0 })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn attention(&self) -> Option<&Attention> {
        self.attention.as_ref()
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn check_batch(&self, batch: &SeqBatch) -> Result<(), ModelError> {
        if batch.data.cols() != self.config.input_features || batch.steps == 0 || batch.batch == 0 {
            return Err(ModelError::ShapeMismatch {
                expected: format!("(T*B) x {} with T, B >= 1", self.config.input_features),
                found: format!("{} x {} (T={}, B={})", batch.data.rows(), batch.data.cols(), batch.steps, batch.batch),
            });
        }
        Ok(())
    }

    /// Returns predictions `B × output_features` and the tape for [`backward`](Self::backward).
    pub fn forward(&self, batch: &SeqBatch, mut mode: ForwardMode<'_>) -> Result<(Matrix, Tape), ModelError> {
        self.check_batch(batch)?;
        let (steps, b) = (batch.steps, batch.batch);
        if let ForwardMode::Replay(m) = &mode {
            if m.0.len() != self.layers.len() {
                return Err(ModelError::ShapeMismatch {
                    expected: format!("{} dropout masks", self.layers.len()),
                    found: format!("{}", m.0.len()),
                });
            }
        }
        let mut masks = Vec::new();
        let mut drop = |x: Matrix, l: usize, mode: &mut ForwardMode<'_>| -> Result<Matrix, ModelError> {
            match mode {
                ForwardMode::Eval => Ok(x),
                ForwardMode::Train(rng) => {
                    let (y, mask) = dropout_forward(&x, self.config.dropout, rng, true)?;
                    masks.push(mask);
                    Ok(y)
                }
                ForwardMode::Replay(m) => {
                    let mask = &m.0[l];
                    if mask.shape() != x.shape() {
                        return Err(ModelError::ShapeMismatch {
                            expected: format!("{:?}", x.shape()),
                            found: format!("{:?}", mask.shape()),
                        });
                    }
                    masks.push(mask.clone());
                    Ok(apply_mask(&x, mask))
                }
            }
        };

        let last = self.layers.len() - 1;
        let mut x = batch.data.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut head_input = None;
        for (l, layer) in self.layers.iter().enumerate() {
            let (seq, cache) = layer.forward(&x, steps, b);
            caches.push(cache);
            if l == last && self.attention.is_none() {
                let fin = layer.final_state(&seq, steps, b);
                head_input = Some(drop(fin, l, &mut mode)?);
            } else {
                x = drop(seq, l, &mut mode)?;
            }
        }
        let mut attention = None;
        let head_input = match (&self.attention, head_input) {
            (Some(att), _) => {
                let q = x.row_block((steps - 1) * b, b);
                let (ctx, cache) = att.forward(&x, &q, steps, b);
                attention = Some((cache, q.clone()));
                ctx.concat_cols(&q)?
            }
            (None, Some(h)) => h,
            (None, None) => unreachable!("last layer sets the head input"),
        };
        let hidden_act = self.dense.forward(&head_input);
        let output = self.output.forward(&hidden_act);
        let masks = match mode {
            ForwardMode::Eval => None,
            _ => Some(DropoutMasks(masks)),
        };
        let tape = Tape {
            model_id: self.id,
            generation: self.generation,
            steps,
            batch: b,
            layer_caches: caches,
            masks,
            attention,
            head_input,
            hidden_act,
            output: output.clone(),
        };
        Ok((output, tape))
    }

    /// Predictions only, without dropout.
    pub fn predict(&self, batch: &SeqBatch) -> Result<Matrix, ModelError> {
        Ok(self.forward(batch, ForwardMode::Eval)?.0)
    }

    /// Accumulates `∂L/∂θ` into every parameter's gradient given `∂L/∂output`.
    pub fn backward(&mut self, tape: Tape, d_output: &Matrix) -> Result<(), ModelError> {
        if tape.model_id != self.id || tape.generation != self.generation {
            return Err(ModelError::StaleTape);
        }
        if d_output.shape() != tape.output.shape() {
            return Err(ModelError::ShapeMismatch {
                expected: format!("{:?}", tape.output.shape()),
                found: format!("{:?}", d_output.shape()),
            });
        }
        let (steps, b) = (tape.steps, tape.batch);
        let mask = |g: Matrix, l: usize| match &tape.masks {
            Some(m) => apply_mask(&g, &m.0[l]),
            None => g,
        };

        let d_hidden = self.output.backward(&tape.hidden_act, &tape.output, d_output);
        let d_head = self.dense.backward(&tape.head_input, &tape.hidden_act, &d_hidden);
        let last = self.layers.len() - 1;
        let mut d_seq = match (&mut self.attention, &tape.attention) {
            (Some(att), Some((cache, _))) => {
                let w = att.width();
                let d_ctx = d_head.slice_cols(0, w)?;
                let d_q = d_head.slice_cols(w, 2 * w)?;
                let (mut d_states, d_query) = att.backward(cache, &d_ctx, steps, b);
                d_states.add_row_block((steps - 1) * b, &d_q);
                d_states.add_row_block((steps - 1) * b, &d_query);
                mask(d_states, last)
            }
            _ => {
                let d_final = mask(d_head, last);
                self.layers[last].final_state_grad(&d_final, steps, b)
            }
        };
        for l in (0..self.layers.len()).rev() {
            let dx = self.layers[l].backward(&tape.layer_caches[l], &d_seq, steps, b);
            if l > 0 {
                d_seq = mask(dx, l - 1);
            }
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    pub fn grad_norm(&self) -> f64 {
        grad_norm(self.params())
    }

    /// Optional global-norm clipping, then one Adam update (which clears the gradients).
    pub fn adam_step(&mut self, cfg: &AdamConfig, t: u64, clip_norm: Option<f64>) {
        if let Some(max) = clip_norm {
            clip_grad_norm(self.params_mut(), max);
        }
        adam_step(self.params_mut(), cfg, t);
    }

    /// All parameter values in [`HasParams::params`] order.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for p in self.params() {
            out.extend_from_slice(p.value.data());
        }
        out
    }

    pub fn load_flat(&mut self, flat: &[f64]) -> Result<(), ModelError> {
        let expected = self.parameter_count();
        if flat.len() != expected {
            return Err(ModelError::PayloadLengthMismatch { expected, found: flat.len() });
        }
        let mut offset = 0;
        for p in self.params_mut() {
            let n = p.len();
            p.value.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Human-readable layer summary.
    pub fn describe(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "{} ({} input features, window {})", c.kind.display_name(), c.input_features, c.seq_len);
        for (l, layer) in self.layers.iter().enumerate() {
            let n: usize = layer.params().iter().map(|p| p.len()).sum();
            let _ = writeln!(
                s,
                "  {:<10} {} -> {:<5} dropout {:.2}  params {}",
                format!("{}[{l}]", layer.label()),
                layer.input_width(),
                layer.output_width(),
                c.dropout,
                n
            );
        }
        if let Some(att) = &self.attention {
            let n: usize = att.params().iter().map(|p| p.len()).sum();
            let _ = writeln!(s, "  {:<10} {} -> {:<5}               params {}", "attention", att.width(), 2 * att.width(), n);
        }
        for (label, d) in [("dense", &self.dense), ("output", &self.output)] {
            let n: usize = d.params().iter().map(|p| p.len()).sum();
            let _ = writeln!(
                s,
                "  {:<10} {} -> {:<5}               params {}",
                label,
                d.weight.value.rows(),
                d.weight.value.cols(),
                n
            );
        }
        let _ = write!(s, "  total parameters: {}", self.parameter_count());
        s
    }
}

impl HasParams for Model {
    fn params(&self) -> Vec<&Param> {
        let mut v: Vec<&Param> = self.layers.iter().flat_map(|l| l.params()).collect();
        if let Some(a) = &self.attention {
            v.extend(a.params());
        }
        v.extend(self.dense.params());
        v.extend(self.output.params());
        v
    }

    /// Any tape recorded before this call becomes stale.
    fn params_mut(&mut self) -> Vec<&mut Param> {
        self.generation += 1;
        let mut v: Vec<&mut Param> = self.layers.iter_mut().flat_map(|l| l.params_mut()).collect();
        if let Some(a) = &mut self.attention {
            v.extend(a.params_mut());
        }
        v.extend(self.dense.params_mut());
        v.extend(self.output.params_mut());
        v
    }
}
