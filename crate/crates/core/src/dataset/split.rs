use std::collections::BTreeSet;

use super::{DatasetError, SequenceSample};
use crate::nncore::Rng;

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

/// Seeded train/test partition.
///
/// By default samples are shuffled and cut at `round(ratio · N)`. With
/// `by_user`, whole contestants are assigned to one side, in shuffled
/// contestant order, until the train side reaches that count.
pub fn split_dataset(
    samples: Vec<SequenceSample>,
    ratio: f64,
    seed: u64,
    by_user: bool,
) -> Result<(Vec<SequenceSample>, Vec<SequenceSample>), DatasetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::InvalidRatio(ratio));
    }
    let n = samples.len();
    let cut = (ratio * n as f64).round() as usize;
    let mut rng = Rng::new(seed);

    if !by_user {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let mut slots: Vec<Option<SequenceSample>> = samples.into_iter().map(Some).collect();
        let mut shuffled: Vec<SequenceSample> = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        let test = shuffled.split_off(cut);
        return Ok((shuffled, test));
    }

    let mut users: Vec<u64> = samples.iter().map(|s| s.contestant_tag).collect::<BTreeSet<_>>().into_iter().collect();
    rng.shuffle(&mut users);
    let mut train_users = BTreeSet::new();
    let mut train_count = 0usize;
    for u in users {
        if train_count >= cut {
            break;
        }
        train_count += samples.iter().filter(|s| s.contestant_tag == u).count();
        train_users.insert(u);
    }
    Ok(samples.into_iter().partition(|s| train_users.contains(&s.contestant_tag)))
}
