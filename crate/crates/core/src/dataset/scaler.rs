use super::{DatasetError, SequenceSample};

/// Per-feature min-max scaling to `[0, 1]`. A constant feature
/// (`max == min`) passes through unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaler {
    /// Fits on every input row and every target of `train`.
    pub fn fit(train: &[SequenceSample]) -> Result<Self, DatasetError> {
        let first = train.first().ok_or(DatasetError::EmptyTrainingSet)?;
        let f = first.features();
        let mut min = vec![f64::INFINITY; f];
        let mut max = vec![f64::NEG_INFINITY; f];
        let mut see = |row: &[f64]| {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        };
        for s in train {
            for r in 0..s.inputs.rows() {
                see(s.inputs.row(r));
            }
            see(&s.target);
        }
        Ok(Self { min, max })
    }

    pub fn features(&self) -> usize {
        self.min.len()
    }

    #[inline]
    fn is_constant(&self, j: usize) -> bool {
        self.max[j] == self.min[j]
    }

    #[inline]
    pub fn scale_value(&self, j: usize, x: f64) -> f64 {
        if self.is_constant(j) {
            x
        } else {
            (x - self.min[j]) / (self.max[j] - self.min[j])
        }
    }

    #[inline]
    pub fn unscale_value(&self, j: usize, y: f64) -> f64 {
        if self.is_constant(j) {
            y
        } else {
            y * (self.max[j] - self.min[j]) + self.min[j]
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &x)| self.scale_value(j, x)).collect()
    }

    pub fn inverse(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &y)| self.unscale_value(j, y)).collect()
    }

    /// Scales inputs and targets; `target_prev_rating` stays in raw units.
    /// Values outside the fitted range are not clipped.
    pub fn apply(&self, samples: &[SequenceSample]) -> Vec<SequenceSample> {
        samples
            .iter()
            .map(|s| {
                let mut s = s.clone();
                let cols = s.inputs.cols();
                for (i, v) in s.inputs.data_mut().iter_mut().enumerate() {
                    *v = self.scale_value(i % cols, *v);
                }
                s.target = self.transform(&s.target);
                s
            })
            .collect()
    }
}

pub fn fit_scaler(train: &[SequenceSample]) -> Result<FeatureScaler, DatasetError> {
    FeatureScaler::fit(train)
}

pub fn apply_scaler(scaler: &FeatureScaler, samples: &[SequenceSample]) -> Vec<SequenceSample> {
    scaler.apply(samples)
}

pub fn invert_scaler(scaler: &FeatureScaler, row: &[f64]) -> Vec<f64> {
    scaler.inverse(row)
}
