use serde::{Deserialize, Serialize};

/// One rated contest participation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingChange {
    pub contest_id: u64,
    pub contest_name: String,
    pub rank: u32,
    pub old_rating: i32,
    pub new_rating: i32,
    /// Unix seconds at which the rating change was published.
    pub update_time: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Ok,
    WrongAnswer,
    TimeLimit,
    MemoryLimit,
    RuntimeError,
    CompilationError,
    Other,
}

impl Verdict {
    /// Unknown or missing verdicts map to `Other`.
    pub fn from_api(s: Option<&str>) -> Self {
        match s {
            Some("OK") => Verdict::Ok,
            Some("WRONG_ANSWER") => Verdict::WrongAnswer,
            Some("TIME_LIMIT_EXCEEDED") => Verdict::TimeLimit,
            Some("MEMORY_LIMIT_EXCEEDED") => Verdict::MemoryLimit,
            Some("RUNTIME_ERROR") => Verdict::RuntimeError,
            Some("COMPILATION_ERROR") => Verdict::CompilationError,
            _ => Verdict::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParticipantType {
    Contestant,
    Practice,
    Virtual,
    OutOfCompetition,
    Other,
}

impl ParticipantType {
    pub fn from_api(s: &str) -> Self {
        match s {
            "CONTESTANT" => ParticipantType::Contestant,
            "PRACTICE" => ParticipantType::Practice,
            "VIRTUAL" => ParticipantType::Virtual,
            "OUT_OF_COMPETITION" => ParticipantType::OutOfCompetition,
            _ => ParticipantType::Other,
        }
    }
}

/// One judged submission.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub submission_id: u64,
    /// 0 when the problem belongs to a problemset rather than a contest.
    pub contest_id: u64,
    /// `"<contest>/<index>"`, e.g. `"1234/A"`.
    pub problem_key: String,
    pub creation_time: i64,
    pub verdict: Verdict,
    pub participant_type: ParticipantType,
}

/// A contestant's row in one contest's standings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandingsRow {
    pub contest_id: u64,
    pub handle: String,
    /// Sum of the points of every problem solved during the contest.
    pub points: f64,
    pub rank: u32,
}
