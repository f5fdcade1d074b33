use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{DatasetError, FeatureMode};
use crate::ingest::{ParticipantType, RatingChange, StandingsRow, Submission, Verdict};

/// Fallback gap between a contest's start and its rating publication when
/// no in-contest submission pins the start.
pub const CONTEST_START_FALLBACK_SECS: i64 = 5 * 3600;

/// Features of one rated contest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimestampFeatures {
    pub contest_id: u64,
    pub contest_time: i64,
    /// Post-contest rating.
    pub rating: f64,
    pub rank: f64,
    /// Points earned in the contest.
    pub solve_rating: f64,
    /// Distinct problems solved in practice since the previous contest.
    pub ac_count: f64,
    /// Distinct problems attempted in practice but not solved in that window.
    pub wa_count: f64,
}

impl TimestampFeatures {
    /// `[rating, rank, solve_rating]` then `[ac_count, wa_count]` with practice.
    pub fn features(&self, mode: FeatureMode) -> Vec<f64> {
        let mut v = vec![self.rating, self.rank, self.solve_rating];
        if mode == FeatureMode::WithPractice {
            v.extend([self.ac_count, self.wa_count]);
        }
        v
    }
}

/// One entry per rating change, oldest first.
///
/// A contest's practice window is `(previous update_time, contest start]`,
/// where the start is the earliest in-contest submission of that contest or
/// `update_time - 5h` without one. The first window opens at the earliest
/// submission on the account. In-contest submissions never count as practice.
pub fn build_timeline(
    ratings: &[RatingChange],
    submissions: &[Submission],
    standings: &BTreeMap<u64, StandingsRow>,
) -> Result<Vec<TimestampFeatures>, DatasetError> {
    for pair in ratings.windows(2) {
        if pair[1].update_time <= pair[0].update_time {
            return Err(DatasetError::NonChronologicalInput {
                contest_id: pair[1].contest_id,
                time: pair[1].update_time,
            });
        }
    }

    let mut contest_start: HashMap<u64, i64> = HashMap::new();
    for s in submissions.iter().filter(|s| s.participant_type == ParticipantType::Contestant) {
        contest_start
            .entry(s.contest_id)
            .and_modify(|t| *t = (*t).min(s.creation_time))
            .or_insert(s.creation_time);
    }
    let practice: Vec<&Submission> =
        submissions.iter().filter(|s| s.participant_type != ParticipantType::Contestant).collect();
    let earliest = submissions.iter().map(|s| s.creation_time).min();

    let mut out = Vec::with_capacity(ratings.len());
    let mut lower_exclusive = earliest.map_or(i64::MIN, |t| t - 1);
    for r in ratings {
        let start = contest_start
            .get(&r.contest_id)
            .copied()
            .unwrap_or(r.update_time - CONTEST_START_FALLBACK_SECS);
        let (ac, wa) = practice_counts(
            practice.iter().copied().filter(|s| s.creation_time > lower_exclusive && s.creation_time <= start),
        );
        out.push(TimestampFeatures {
            contest_id: r.contest_id,
            contest_time: r.update_time,
            rating: r.new_rating as f64,
            rank: r.rank as f64,
            solve_rating: standings.get(&r.contest_id).map_or(0.0, |s| s.points),
            ac_count: ac as f64,
            wa_count: wa as f64,
        });
        lower_exclusive = r.update_time;
    }
    Ok(out)
}

/// Distinct solved problems, and distinct attempted problems never solved.
pub fn practice_counts<'a>(window: impl Iterator<Item = &'a Submission>) -> (usize, usize) {
    let mut attempted: HashSet<&str> = HashSet::new();
    let mut solved: HashSet<&str> = HashSet::new();
    for s in window {
        attempted.insert(&s.problem_key);
        if s.verdict == Verdict::Ok {
            solved.insert(&s.problem_key);
        }
    }
    (solved.len(), attempted.len() - solved.len())
}

pub const TIMELINE_CSV_HEADER: &str = "contestant,contest_id,contest_time,rating,rank,solve_rating,ac_count,wa_count";

/// Writes rows (no header) for one contestant's timeline.
pub fn write_timeline_csv(mut w: impl Write, contestant: &str, timeline: &[TimestampFeatures]) -> std::io::Result<()> {
    for t in timeline {
        writeln!(
            w,
            "{contestant},{},{},{},{},{},{},{}",
            t.contest_id, t.contest_time, t.rating, t.rank, t.solve_rating, t.ac_count, t.wa_count
        )?;
    }
    Ok(())
}

/// Parses rows written by [`write_timeline_csv`], grouped by contestant in
/// order of first appearance. A header line is skipped.
pub fn read_timeline_csv(text: &str) -> Result<Vec<(String, Vec<TimestampFeatures>)>, DatasetError> {
    let mut out: Vec<(String, Vec<TimestampFeatures>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == TIMELINE_CSV_HEADER {
            continue;
        }
        let bad = |detail: String| DatasetError::BadTimelineCsv { line: i + 1, detail };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(bad(format!("expected 8 columns, found {}", cols.len())));
        }
        let num = |j: usize| cols[j].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", j + 1)));
        let t = TimestampFeatures {
            contest_id: cols[1].parse().map_err(|e| bad(format!("contest_id: {e}")))?,
            contest_time: cols[2].parse().map_err(|e| bad(format!("contest_time: {e}")))?,
            rating: num(3)?,
            rank: num(4)?,
            solve_rating: num(5)?,
            ac_count: num(6)?,
            wa_count: num(7)?,
        };
        match out.iter_mut().find(|(name, _)| name == cols[0]) {
            Some((_, tl)) => tl.push(t),
            None => out.push((cols[0].to_string(), vec![t])),
        }
    }
    Ok(out)
}
