//! Recurrent layers over time-major sequences.
//!
//! A sequence of `T` steps for a batch of `B` is one `(T·B) × D` matrix whose
//! row `t·B + b` is step `t` of batch item `b`.

use crate::nncore::{gemm_nn, gemm_nt, gemm_tn, sigmoid_scalar, Matrix, Param, Rng};

/// Glorot-uniform `rows × cols` weights.
pub(crate) fn glorot(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.uniform_range(-limit, limit);
    }
    m
}

/// Reverses the step order of a time-major sequence.
pub(crate) fn reverse_time(m: &Matrix, steps: usize, batch: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for t in 0..steps {
        out.set_row_block((steps - 1 - t) * batch, &m.row_block(t * batch, batch));
    }
    out
}

/// Standard LSTM cell, gate blocks ordered `[input, forget, candidate, output]`:
///
/// ```text
/// z = x·Wx + h_prev·Wh + b
/// i, f, o = σ(z_i), σ(z_f), σ(z_o);  g = tanh(z_g)
/// c = f ⊙ c_prev + i ⊙ g;  h = o ⊙ tanh(c)
/// ```
#[derive(Clone, Debug)]
pub struct LstmLayer {
    pub w_x: Param,
    pub w_h: Param,
    pub bias: Param,
    hidden: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct LstmCache {
    input: Matrix,
    steps: usize,
    batch: usize,
    /// Activated gates per step, `B × 4H`.
    gates: Vec<Matrix>,
    cells: Vec<Matrix>,
    tanh_cells: Vec<Matrix>,
    pub output: Matrix,
}

impl LstmLayer {
    pub fn new(name: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let w_x = Param::new(format!("{name}.w_x"), glorot(rng, input, 4 * hidden));
        let w_h = Param::new(format!("{name}.w_h"), glorot(rng, hidden, 4 * hidden));
        let mut b = Matrix::zeros(1, 4 * hidden);
        for j in hidden..2 * hidden {
            b.set(0, j, 1.0);
        }
        Self { w_x, w_h, bias: Param::new(format!("{name}.bias"), b), hidden }
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![&self.w_x, &self.w_h, &self.bias]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w_x, &mut self.w_h, &mut self.bias]
    }

    pub(crate) fn forward(&self, x: &Matrix, steps: usize, batch: usize) -> LstmCache {
        let h = self.hidden;
        let mut zx = Matrix::zeros(steps * batch, 4 * h);
        gemm_nn(&mut zx, x, &self.w_x.value);
        zx.add_row_broadcast(&self.bias.value);

        let mut output = Matrix::zeros(steps * batch, h);
        let mut gates = Vec::with_capacity(steps);
        let mut cells = Vec::with_capacity(steps);
        let mut tanh_cells = Vec::with_capacity(steps);
        let mut h_prev = Matrix::zeros(batch, h);
        let mut c_prev = Matrix::zeros(batch, h);
        for t in 0..steps {
            let mut z = zx.row_block(t * batch, batch);
            gemm_nn(&mut z, &h_prev, &self.w_h.value);
            let mut c = Matrix::zeros(batch, h);
            let mut tc = Matrix::zeros(batch, h);
            let mut h_new = Matrix::zeros(batch, h);
            for b in 0..batch {
                let zr = z.row_mut(b);
                for j in 0..h {
                    let i = sigmoid_scalar(zr[j]);
                    let f = sigmoid_scalar(zr[h + j]);
                    let g = zr[2 * h + j].tanh();
                    let o = sigmoid_scalar(zr[3 * h + j]);
                    zr[j] = i;
                    zr[h + j] = f;
                    zr[2 * h + j] = g;
                    zr[3 * h + j] = o;
                    let cv = f * c_prev.get(b, j) + i * g;
                    let tcv = cv.tanh();
                    c.set(b, j, cv);
                    tc.set(b, j, tcv);
                    h_new.set(b, j, o * tcv);
                }
            }
            output.set_row_block(t * batch, &h_new);
            gates.push(z);
            cells.push(c.clone());
            tanh_cells.push(tc);
            h_prev = h_new;
            c_prev = c;
        }
        LstmCache { input: x.clone(), steps, batch, gates, cells, tanh_cells, output }
    }

    /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
    pub(crate) fn backward(&mut self, cache: &LstmCache, d_out: &Matrix) -> Matrix {
        let h = self.hidden;
        let (steps, batch) = (cache.steps, cache.batch);
        let mut dz_all = Matrix::zeros(steps * batch, 4 * h);
        let mut dh_next = Matrix::zeros(batch, h);
        let mut dc_next = Matrix::zeros(batch, h);
        for t in (0..steps).rev() {
            let gates = &cache.gates[t];
            let tc = &cache.tanh_cells[t];
            let c_prev = if t > 0 { Some(&cache.cells[t - 1]) } else { None };
            let mut dz = Matrix::zeros(batch, 4 * h);
            for b in 0..batch {
                let g_row = gates.row(b);
                for j in 0..h {
                    let (i, f, g, o) = (g_row[j], g_row[h + j], g_row[2 * h + j], g_row[3 * h + j]);
                    let tcv = tc.get(b, j);
                    let dh = d_out.get(t * batch + b, j) + dh_next.get(b, j);
                    let d_o = dh * tcv;
                    let dc = dh * o * (1.0 - tcv * tcv) + dc_next.get(b, j);
                    let cp = c_prev.map_or(0.0, |m| m.get(b, j));
                    let dz_row = dz.row_mut(b);
                    dz_row[j] = dc * g * i * (1.0 - i);
                    dz_row[h + j] = dc * cp * f * (1.0 - f);
                    dz_row[2 * h + j] = dc * i * (1.0 - g * g);
                    dz_row[3 * h + j] = d_o * o * (1.0 - o);
                    dc_next.set(b, j, dc * f);
                }
            }
            if t > 0 {
                let h_prev = cache.output.row_block((t - 1) * batch, batch);
                gemm_tn(&mut self.w_h.grad, &h_prev, &dz);
            }
            dh_next.fill(0.0);
            gemm_nt(&mut dh_next, &dz, &self.w_h.value);
            dz_all.set_row_block(t * batch, &dz);
        }
        gemm_tn(&mut self.w_x.grad, &cache.input, &dz_all);
        self.bias.grad.add_row_broadcast(&dz_all.column_sums());
        let mut dx = Matrix::zeros(steps * batch, cache.input.cols());
        gemm_nt(&mut dx, &dz_all, &self.w_x.value);
        dx
    }
}

/// GRU cell, gate blocks ordered `[update, reset, candidate]`, with the
/// reset gate applied to the projected previous state:
///
/// ```text
/// zx = x·Wx + b;  zh = h_prev·Wh
/// u = σ(zx_u + zh_u);  r = σ(zx_r + zh_r)
/// n = tanh(zx_n + r ⊙ zh_n)
/// h = u ⊙ h_prev + (1 − u) ⊙ n
/// ```
#[derive(Clone, Debug)]
pub struct GruLayer {
    pub w_x: Param,
    pub w_h: Param,
    pub bias: Param,
    hidden: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct GruCache {
    input: Matrix,
    steps: usize,
    batch: usize,
    /// `[u, r, n]` per step, `B × 3H`.
    gates: Vec<Matrix>,
    /// Candidate block of `h_prev·Wh` per step, `B × H`.
    zh_candidate: Vec<Matrix>,
    pub output: Matrix,
}

impl GruLayer {
    pub fn new(name: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        Self {
            w_x: Param::new(format!("{name}.w_x"), glorot(rng, input, 3 * hidden)),
            w_h: Param::new(format!("{name}.w_h"), glorot(rng, hidden, 3 * hidden)),
            bias: Param::new(format!("{name}.bias"), Matrix::zeros(1, 3 * hidden)),
            hidden,
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        vec![&self.w_x, &self.w_h, &self.bias]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w_x, &mut self.w_h, &mut self.bias]
    }

    pub(crate) fn forward(&self, x: &Matrix, steps: usize, batch: usize) -> GruCache {
        let h = self.hidden;
        let mut zx = Matrix::zeros(steps * batch, 3 * h);
        gemm_nn(&mut zx, x, &self.w_x.value);
        zx.add_row_broadcast(&self.bias.value);

        let mut output = Matrix::zeros(steps * batch, h);
        let mut gates = Vec::with_capacity(steps);
        let mut zh_candidate = Vec::with_capacity(steps);
        let mut h_prev = Matrix::zeros(batch, h);
        for t in 0..steps {
            let mut zh = Matrix::zeros(batch, 3 * h);
            gemm_nn(&mut zh, &h_prev, &self.w_h.value);
            let mut g = Matrix::zeros(batch, 3 * h);
            let mut zhn = Matrix::zeros(batch, h);
            let mut h_new = Matrix::zeros(batch, h);
            for b in 0..batch {
                let zx_row = zx.row(t * batch + b);
                let zh_row = zh.row(b);
                for j in 0..h {
                    let u = sigmoid_scalar(zx_row[j] + zh_row[j]);
                    let r = sigmoid_scalar(zx_row[h + j] + zh_row[h + j]);
                    let n = (zx_row[2 * h + j] + r * zh_row[2 * h + j]).tanh();
                    g.set(b, j, u);
                    g.set(b, h + j, r);
                    g.set(b, 2 * h + j, n);
                    zhn.set(b, j, zh_row[2 * h + j]);
                    h_new.set(b, j, u * h_prev.get(b, j) + (1.0 - u) * n);
                }
            }
            output.set_row_block(t * batch, &h_new);
            gates.push(g);
            zh_candidate.push(zhn);
            h_prev = h_new;
        }
        GruCache { input: x.clone(), steps, batch, gates, zh_candidate, output }
    }

    pub(crate) fn backward(&mut self, cache: &GruCache, d_out: &Matrix) -> Matrix {
        let h = self.hidden;
        let (steps, batch) = (cache.steps, cache.batch);
        let mut dzx_all = Matrix::zeros(steps * batch, 3 * h);
        let mut dh_next = Matrix::zeros(batch, h);
        for t in (0..steps).rev() {
            let g = &cache.gates[t];
            let zhn = &cache.zh_candidate[t];
            let h_prev = if t > 0 {
                cache.output.row_block((t - 1) * batch, batch)
            } else {
                Matrix::zeros(batch, h)
            };
            let mut dzh = Matrix::zeros(batch, 3 * h);
            let mut dh_direct = Matrix::zeros(batch, h);
            for b in 0..batch {
                for j in 0..h {
                    let (u, r, n) = (g.get(b, j), g.get(b, h + j), g.get(b, 2 * h + j));
                    let hp = h_prev.get(b, j);
                    let dh = d_out.get(t * batch + b, j) + dh_next.get(b, j);
                    let du = dh * (hp - n);
                    let dn = dh * (1.0 - u);
                    let dan = dn * (1.0 - n * n);
                    let dr = dan * zhn.get(b, j);
                    let dau = du * u * (1.0 - u);
                    let dar = dr * r * (1.0 - r);
                    let row = t * batch + b;
                    dzx_all.set(row, j, dau);
                    dzx_all.set(row, h + j, dar);
                    dzx_all.set(row, 2 * h + j, dan);
                    dzh.set(b, j, dau);
                    dzh.set(b, h + j, dar);
                    dzh.set(b, 2 * h + j, dan * r);
                    dh_direct.set(b, j, dh * u);
                }
            }
            if t > 0 {
                gemm_tn(&mut self.w_h.grad, &h_prev, &dzh);
            }
            dh_next = dh_direct;
            gemm_nt(&mut dh_next, &dzh, &self.w_h.value);
        }
        gemm_tn(&mut self.w_x.grad, &cache.input, &dzx_all);
        self.bias.grad.add_row_broadcast(&dzx_all.column_sums());
        let mut dx = Matrix::zeros(steps * batch, cache.input.cols());
        gemm_nt(&mut dx, &dzx_all, &self.w_x.value);
        dx
    }
}

/// Two independent LSTMs, one reading the sequence backwards. The output at
/// step `t` is `[forward_t, backward_t]`, width `2H`.
#[derive(Clone, Debug)]
pub struct BiLstmLayer {
    pub forward: LstmLayer,
    pub backward: LstmLayer,
}

#[derive(Clone, Debug)]
pub(crate) struct BiLstmCache {
    fwd: LstmCache,
    /// Cache of the backward LSTM, in its own (reversed) step order.
    bwd: LstmCache,
}

impl BiLstmLayer {
    pub fn new(name: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        Self {
            forward: LstmLayer::new(&format!("{name}.fwd"), input, hidden, rng),
            backward: LstmLayer::new(&format!("{name}.bwd"), input, hidden, rng),
        }
    }

    fn forward_pass(&self, x: &Matrix, steps: usize, batch: usize) -> (Matrix, BiLstmCache) {
        let fwd = self.forward.forward(x, steps, batch);
        let bwd = self.backward.forward(&reverse_time(x, steps, batch), steps, batch);
        let back_in_order = reverse_time(&bwd.output, steps, batch);
        let out = fwd.output.concat_cols(&back_in_order).expect("same row count");
        (out, BiLstmCache { fwd, bwd })
    }

    fn backward_pass(&mut self, cache: &BiLstmCache, d_out: &Matrix, steps: usize, batch: usize) -> Matrix {
        let h = self.forward.hidden();
        let d_fwd = d_out.slice_cols(0, h).expect("width 2H");
        let d_bwd = reverse_time(&d_out.slice_cols(h, 2 * h).expect("width 2H"), steps, batch);
        let mut dx = self.forward.backward(&cache.fwd, &d_fwd);
        let dx_rev = self.backward.backward(&cache.bwd, &d_bwd);
        dx.add_assign(&reverse_time(&dx_rev, steps, batch)).expect("same shape");
        dx
    }
}

#[derive(Clone, Debug)]
pub enum RecurrentLayer {
    Lstm(LstmLayer),
    Gru(GruLayer),
    BiLstm(BiLstmLayer),
}

#[derive(Clone, Debug)]
pub(crate) enum RecurrentCache {
    Lstm(LstmCache),
    Gru(GruCache),
    BiLstm(BiLstmCache),
}

impl RecurrentLayer {
    pub fn label(&self) -> &'static str {
        match self {
            RecurrentLayer::Lstm(_) => "LSTM",
            RecurrentLayer::Gru(_) => "GRU",
            RecurrentLayer::BiLstm(_) => "Bi-LSTM",
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            RecurrentLayer::Lstm(l) => l.w_x.value.rows(),
            RecurrentLayer::Gru(l) => l.w_x.value.rows(),
            RecurrentLayer::BiLstm(l) => l.forward.w_x.value.rows(),
        }
    }

    pub fn output_width(&self) -> usize {
        match self {
            RecurrentLayer::Lstm(l) => l.hidden,
            RecurrentLayer::Gru(l) => l.hidden,
            RecurrentLayer::BiLstm(l) => 2 * l.forward.hidden,
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        match self {
            RecurrentLayer::Lstm(l) => l.params(),
            RecurrentLayer::Gru(l) => l.params(),
            RecurrentLayer::BiLstm(l) => {
                let mut v = l.forward.params();
                v.extend(l.backward.params());
                v
            }
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            RecurrentLayer::Lstm(l) => l.params_mut(),
            RecurrentLayer::Gru(l) => l.params_mut(),
            RecurrentLayer::BiLstm(l) => {
                let mut v = l.forward.params_mut();
                v.extend(l.backward.params_mut());
                v
            }
        }
    }

    /// Full output sequence, `(T·B) × output_width`.
    pub(crate) fn forward(&self, x: &Matrix, steps: usize, batch: usize) -> (Matrix, RecurrentCache) {
        match self {
            RecurrentLayer::Lstm(l) => {
                let c = l.forward(x, steps, batch);
                (c.output.clone(), RecurrentCache::Lstm(c))
            }
            RecurrentLayer::Gru(l) => {
                let c = l.forward(x, steps, batch);
                (c.output.clone(), RecurrentCache::Gru(c))
            }
            RecurrentLayer::BiLstm(l) => {
                let (out, c) = l.forward_pass(x, steps, batch);
                (out, RecurrentCache::BiLstm(c))
            }
        }
    }

    pub(crate) fn backward(&mut self, cache: &RecurrentCache, d_out: &Matrix, steps: usize, batch: usize) -> Matrix {
        match (self, cache) {
            (RecurrentLayer::Lstm(l), RecurrentCache::Lstm(c)) => l.backward(c, d_out),
            (RecurrentLayer::Gru(l), RecurrentCache::Gru(c)) => l.backward(c, d_out),
            (RecurrentLayer::BiLstm(l), RecurrentCache::BiLstm(c)) => l.backward_pass(c, d_out, steps, batch),
            _ => unreachable!("cache produced by a different layer kind"),
        }
    }

    /// The state each direction holds after reading the whole sequence:
    /// step `T-1` of a unidirectional layer; for Bi-LSTM the forward half at
    /// step `T-1` joined with the backward half at step `0`.
    pub(crate) fn final_state(&self, out: &Matrix, steps: usize, batch: usize) -> Matrix {
        let last = out.row_block((steps - 1) * batch, batch);
        match self {
            RecurrentLayer::BiLstm(l) => {
                let h = l.forward.hidden;
                let first = out.row_block(0, batch);
                last.slice_cols(0, h)
                    .expect("width 2H")
                    .concat_cols(&first.slice_cols(h, 2 * h).expect("width 2H"))
                    .expect("same rows")
            }
            _ => last,
        }
    }

    /// Scatters a gradient on [`final_state`](Self::final_state) back onto the full sequence.
    pub(crate) fn final_state_grad(&self, d_final: &Matrix, steps: usize, batch: usize) -> Matrix {
        let width = self.output_width();
        let mut d = Matrix::zeros(steps * batch, width);
        match self {
            RecurrentLayer::BiLstm(l) => {
                let h = l.forward.hidden;
                for b in 0..batch {
                    let src = d_final.row(b);
                    d.row_mut((steps - 1) * batch + b)[..h].copy_from_slice(&src[..h]);
                    d.row_mut(b)[h..].copy_from_slice(&src[h..]);
                }
            }
            _ => d.set_row_block((steps - 1) * batch, d_final),
        }
        d
    }
}
