//! Client for the public Codeforces REST API: `user.rating`, `user.status`
//! and `contest.standings`, with an on-disk raw response cache and a global
//! request-rate limiter.

mod cache;
mod client;
mod transport;
mod types;
mod wire;

pub use cache::{Cache, CacheKey};
pub use client::{CodeforcesClient, DEFAULT_PAGE_SIZE, DEFAULT_RATE_LIMIT};
pub use transport::{FixtureTransport, HttpTransport, RateLimiter, Transport, API_BASE};
pub use types::{ParticipantType, RatingChange, StandingsRow, Submission, Verdict};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unknown handle {handle:?}: {comment}")]
    UnknownHandle { handle: String, comment: String },
    #[error("{method} failed: {comment}")]
    ApiFailure { method: String, comment: String },
    #[error("{handle:?} has no row in the standings of contest {contest_id}")]
    NotAParticipant { contest_id: u64, handle: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("offline and not cached: {request}")]
    Offline { request: String },
    #[error("malformed {method} response: {detail}")]
    MalformedResponse { method: String, detail: String },
    #[error("empty handle")]
    EmptyHandle,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Newline-delimited handle list; blank lines and `#` comments are skipped.
pub fn read_handles(path: &Path) -> std::io::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_handles(&text))
}

pub fn parse_handles(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Everything fetched for one contestant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContestantRecord {
    pub handle: String,
    pub ratings: Vec<RatingChange>,
    pub submissions: Vec<Submission>,
    pub standings: std::collections::BTreeMap<u64, StandingsRow>,
}

impl CodeforcesClient {
    /// Ratings, submissions and the standings row of every rated contest.
    /// A contest whose standings cannot be attributed to the handle is
    /// skipped (its solve rating later defaults to 0).
    pub fn fetch_contestant(&self, handle: &str) -> Result<ContestantRecord, IngestError> {
        let ratings = self.fetch_rating_history(handle)?;
        let submissions = self.fetch_submissions(handle)?;
        let mut standings = std::collections::BTreeMap::new();
        for r in &ratings {
            match self.fetch_standings_row(r.contest_id, handle) {
                Ok(row) => {
                    standings.insert(r.contest_id, row);
                }
                Err(IngestError::NotAParticipant { .. }) | Err(IngestError::ApiFailure { .. }) => {
                    log::warn!("no standings row for {handle} in contest {}", r.contest_id);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ContestantRecord { handle: handle.to_string(), ratings, submissions, standings })
    }
}
