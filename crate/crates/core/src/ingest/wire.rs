//! JSON shapes of the public API responses and their conversion into the
//! domain records.

use serde::Deserialize;
use serde_json::Value;

use super::types::{ParticipantType, RatingChange, StandingsRow, Submission, Verdict};

#[derive(Deserialize)]
pub(crate) struct Envelope {
    pub status: String,
    #[serde(default)]
    pub comment: Option<String>,
    #[serde(default)]
    pub result: Option<Value>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ApiRatingChange {
    contest_id: u64,
    contest_name: String,
    rank: u32,
    rating_update_time_seconds: i64,
    old_rating: i32,
    new_rating: i32,
}

impl From<ApiRatingChange> for RatingChange {
    fn from(r: ApiRatingChange) -> Self {
        RatingChange {
            contest_id: r.contest_id,
            contest_name: r.contest_name,
            rank: r.rank,
            old_rating: r.old_rating,
            new_rating: r.new_rating,
            update_time: r.rating_update_time_seconds,
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ApiProblem {
    #[serde(default)]
    contest_id: Option<u64>,
    #[serde(default)]
    problemset_name: Option<String>,
    index: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ApiParty {
    #[serde(default)]
    members: Vec<ApiMember>,
    participant_type: String,
}

#[derive(Deserialize)]
pub(crate) struct ApiMember {
    handle: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ApiSubmission {
    id: u64,
    #[serde(default)]
    contest_id: Option<u64>,
    creation_time_seconds: i64,
    problem: ApiProblem,
    author: ApiParty,
    #[serde(default)]
    verdict: Option<String>,
}

impl From<ApiSubmission> for Submission {
    fn from(s: ApiSubmission) -> Self {
        let contest_id = s.contest_id.or(s.problem.contest_id).unwrap_or(0);
        let prefix = match (s.problem.contest_id.or(s.contest_id), &s.problem.problemset_name) {
            (Some(c), _) => c.to_string(),
            (None, Some(name)) => name.clone(),
            (None, None) => "0".to_string(),
        };
        Submission {
            submission_id: s.id,
            contest_id,
            problem_key: format!("{prefix}/{}", s.problem.index),
            creation_time: s.creation_time_seconds,
            verdict: Verdict::from_api(s.verdict.as_deref()),
            participant_type: ParticipantType::from_api(&s.author.participant_type),
        }
    }
}

#[derive(Deserialize)]
pub(crate) struct ApiStandings {
    #[serde(default)]
    rows: Vec<ApiRanklistRow>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct ApiRanklistRow {
    party: ApiParty,
    rank: u32,
    #[serde(default)]
    points: f64,
    #[serde(default)]
    problem_results: Vec<ApiProblemResult>,
}

#[derive(Deserialize)]
pub(crate) struct ApiProblemResult {
    #[serde(default)]
    points: f64,
}

impl ApiStandings {
    /// Picks the handle's official row (falling back to any row with a
    /// positive rank). Points are summed per problem.
    pub fn row_for(self, contest_id: u64, handle: &str) -> Option<StandingsRow> {
        let mut rows: Vec<ApiRanklistRow> = self
            .rows
            .into_iter()
            .filter(|r| r.rank >= 1 && r.party.members.iter().any(|m| m.handle.eq_ignore_ascii_case(handle)))
            .collect();
        let pick = rows
            .iter()
            .position(|r| ParticipantType::from_api(&r.party.participant_type) == ParticipantType::Contestant)
            .unwrap_or(0);
        if rows.is_empty() {
            return None;
        }
        let row = rows.swap_remove(pick);
        let points = if row.problem_results.is_empty() {
            row.points
        } else {
            row.problem_results.iter().map(|p| p.points).sum()
        };
        Some(StandingsRow { contest_id, handle: handle.to_string(), points: points.max(0.0), rank: row.rank })
    }
}
