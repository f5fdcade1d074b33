use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Lstm,
    Gru,
    BiLstm,
    LstmAttn,
}

impl ModelKind {
    /// Report column order.
    pub const ALL: [ModelKind; 4] = [ModelKind::Lstm, ModelKind::LstmAttn, ModelKind::Gru, ModelKind::BiLstm];

    pub fn cli_name(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Gru => "gru",
            ModelKind::BiLstm => "bilstm",
            ModelKind::LstmAttn => "lstm-attn",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Lstm => "LSTM",
            ModelKind::Gru => "GRU",
            ModelKind::BiLstm => "Bi-LSTM",
            ModelKind::LstmAttn => "LSTM + Attention",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ModelKind::Lstm => 0,
            ModelKind::Gru => 1,
            ModelKind::BiLstm => 2,
            ModelKind::LstmAttn => 3,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => ModelKind::Lstm,
            1 => ModelKind::Gru,
            2 => ModelKind::BiLstm,
            3 => ModelKind::LstmAttn,
            _ => return None,
        })
    }

    /// Gate blocks per recurrent cell.
    fn gates(self) -> usize {
        match self {
            ModelKind::Gru => 3,
            _ => 4,
        }
    }

    fn directions(self) -> usize {
        match self {
            ModelKind::BiLstm => 2,
            _ => 1,
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "lstm" => Ok(ModelKind::Lstm),
            "gru" => Ok(ModelKind::Gru),
            "bilstm" | "bi-lstm" => Ok(ModelKind::BiLstm),
            "lstm-attn" | "lstm-attention" | "lstm+attention" => Ok(ModelKind::LstmAttn),
            other => Err(format!("unknown model {other:?} (expected lstm, gru, bilstm or lstm-attn)")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.cli_name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n_layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub dense_hidden: usize,
    pub input_features: usize,
    pub output_features: usize,
    pub seq_len: usize,
    pub init_seed: u64,
}

impl ModelConfig {
    /// Four recurrent layers of 256 units, dropout 0.5 and a 100-unit ReLU head.
    pub fn full_size(kind: ModelKind, features: usize, init_seed: u64) -> Self {
        Self {
            kind,
            n_layers: 4,
            hidden: 256,
            dropout: 0.5,
            dense_hidden: 100,
            input_features: features,
            output_features: features,
            seq_len: 15,
            init_seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.n_layers < 1 {
            return bad("n_layers must be >= 1");
        }
        if self.hidden < 1 || self.dense_hidden < 1 {
            return bad("layer widths must be >= 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.input_features < 1 || self.output_features < 1 || self.seq_len < 1 {
            return bad("feature counts and seq_len must be >= 1");
        }
        Ok(())
    }

    /// Output width of every recurrent layer.
    pub fn recurrent_width(&self) -> usize {
        self.hidden * self.kind.directions()
    }

    pub fn head_input_width(&self) -> usize {
        match self.kind {
            ModelKind::LstmAttn => 2 * self.recurrent_width(),
            _ => self.recurrent_width(),
        }
    }

    /// Closed-form parameter count.
    pub fn parameter_count(&self) -> usize {
        let h = self.hidden;
        let d = self.recurrent_width();
        let mut total = 0;
        for layer in 0..self.n_layers {
            let input = if layer == 0 { self.input_features } else { d };
            total += self.kind.directions() * self.kind.gates() * (h * (input + h) + h);
        }
        if self.kind == ModelKind::LstmAttn {
            total += 2 * d * d + d;
        }
        total += self.head_input_width() * self.dense_hidden + self.dense_hidden;
        total += self.dense_hidden * self.output_features + self.output_features;
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_size_lstm_count() {
        let c = ModelConfig::full_size(ModelKind::Lstm, 5, 0);
        assert_eq!(c.parameter_count(), 268_288 + 3 * 525_312 + 25_700 + 505);
        assert_eq!(c.parameter_count(), 1_870_429);
    }

    #[test]
    fn gru_uses_three_gate_blocks() {
        let c = ModelConfig::full_size(ModelKind::Gru, 5, 0);
        let layers = 3 * (256 * 261 + 256) + 3 * 3 * (256 * 512 + 256);
        assert_eq!(c.parameter_count(), layers + 25_700 + 505);
    }

    #[test]
    fn bilstm_doubles_directions_and_widths() {
        let c = ModelConfig::full_size(ModelKind::BiLstm, 5, 0);
        let first = 2 * 268_288;
        let rest = 3 * 2 * 4 * (256 * (512 + 256) + 256);
        assert_eq!(c.parameter_count(), first + rest + 512 * 100 + 100 + 505);
    }

    #[test]
    fn validation() {
        let mut c = ModelConfig::full_size(ModelKind::Lstm, 3, 0);
        assert!(c.validate().is_ok());
        c.dropout = 1.0;
        assert!(matches!(c.validate(), Err(ModelError::InvalidConfig(_))));
        c.dropout = 0.5;
        c.n_layers = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.cli_name().parse::<ModelKind>().unwrap(), k);
            assert_eq!(ModelKind::from_code(k.code()), Some(k));
        }
    }
}
