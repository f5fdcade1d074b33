use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::de::DeserializeOwned;

use super::cache::{Cache, CacheKey};
use super::transport::{RateLimiter, Transport};
use super::types::{RatingChange, StandingsRow, Submission};
use super::wire::{ApiRatingChange, ApiStandings, ApiSubmission, Envelope};
use super::IngestError;

pub const DEFAULT_RATE_LIMIT: Duration = Duration::from_millis(2000);
pub const DEFAULT_PAGE_SIZE: usize = 1000;

/// Cached, rate-limited access to the three API methods the dataset needs.
///
/// Every response is looked up in the cache first. On a miss the request
/// goes through the shared [`RateLimiter`]; the raw body is stored before it
/// is parsed, so a later offline run replays it byte for byte.
#[derive(Clone)]
pub struct CodeforcesClient {
    cache: Cache,
    transport: Option<Arc<dyn Transport>>,
    limiter: Arc<RateLimiter>,
    page_size: usize,
}

impl CodeforcesClient {
    pub fn new(cache_dir: impl Into<PathBuf>, transport: Arc<dyn Transport>, limiter: Arc<RateLimiter>) -> Self {
        Self { cache: Cache::new(cache_dir), transport: Some(transport), limiter, page_size: DEFAULT_PAGE_SIZE }
    }

    /// Cache-only client; any miss is an [`IngestError::Offline`].
    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            cache: Cache::new(cache_dir),
            transport: None,
            limiter: Arc::new(RateLimiter::new(Duration::ZERO)),
            page_size: DEFAULT_PAGE_SIZE,
        }
    }

    pub fn with_page_size(mut self, page_size: usize) -> Self {
        self.page_size = page_size.max(1);
        self
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    fn raw(&self, key: &CacheKey) -> Result<Vec<u8>, IngestError> {
        if let Some(hit) = self.cache.get(key)? {
            return Ok(hit);
        }
        let transport = self.transport.as_ref().ok_or_else(|| IngestError::Offline {
            request: format!("{}?{}", key.method, key.query_string()),
        })?;
        let body = self.limiter.run(|| transport.get(&key.method, &key.args)).map_err(IngestError::Transport)?;
        if is_cacheable(&body) {
            self.cache.put(key, &body)?;
        }
        Ok(body)
    }

    fn call<T: DeserializeOwned>(&self, key: &CacheKey) -> Result<Result<T, String>, IngestError> {
        let body = self.raw(key)?;
        let malformed = |detail: String| IngestError::MalformedResponse { method: key.method.clone(), detail };
        let env: Envelope = serde_json::from_slice(&body).map_err(|e| malformed(e.to_string()))?;
        match env.status.as_str() {
            "OK" => {
                let result = env.result.ok_or_else(|| malformed("missing result".into()))?;
                serde_json::from_value(result).map(Ok).map_err(|e| malformed(e.to_string()))
            }
            "FAILED" => Ok(Err(env.comment.unwrap_or_default())),
            other => Err(malformed(format!("unknown status {other:?}"))),
        }
    }

    /// All rated contests of `handle`, oldest first.
    pub fn fetch_rating_history(&self, handle: &str) -> Result<Vec<RatingChange>, IngestError> {
        check_handle(handle)?;
        let key = CacheKey::new("user.rating", &[("handle", handle.to_string())]);
        let rows: Vec<ApiRatingChange> = self.call(&key)?.map_err(|comment| unknown(handle, comment))?;
        let mut out: Vec<RatingChange> = rows.into_iter().map(RatingChange::from).collect();
        out.sort_by_key(|r| r.update_time);
        Ok(out)
    }

    /// Every submission of `handle`, oldest first, fetched page by page until
    /// a short page comes back. Duplicates across pages are dropped.
    pub fn fetch_submissions(&self, handle: &str) -> Result<Vec<Submission>, IngestError> {
        check_handle(handle)?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut from = 1usize;
        loop {
            let key = CacheKey::new(
                "user.status",
                &[("handle", handle.to_string()), ("from", from.to_string()), ("count", self.page_size.to_string())],
            );
            let page: Vec<ApiSubmission> = self.call(&key)?.map_err(|comment| unknown(handle, comment))?;
            let n = page.len();
            for s in page {
                let s = Submission::from(s);
                if seen.insert(s.submission_id) {
                    out.push(s);
                }
            }
            if n < self.page_size {
                break;
            }
            from += self.page_size;
        }
        out.sort_by_key(|s| (s.creation_time, s.submission_id));
        Ok(out)
    }

    pub fn fetch_standings_row(&self, contest_id: u64, handle: &str) -> Result<StandingsRow, IngestError> {
        check_handle(handle)?;
        let key = CacheKey::new(
            "contest.standings",
            &[("contestId", contest_id.to_string()), ("handles", handle.to_string())],
        );
        let standings: ApiStandings = self
            .call(&key)?
            .map_err(|comment| IngestError::ApiFailure { method: key.method.clone(), comment })?;
        standings
            .row_for(contest_id, handle)
            .ok_or_else(|| IngestError::NotAParticipant { contest_id, handle: handle.to_string() })
    }
}

fn check_handle(handle: &str) -> Result<(), IngestError> {
    if handle.trim().is_empty() {
        return Err(IngestError::EmptyHandle);
    }
    Ok(())
}

fn unknown(handle: &str, comment: String) -> IngestError {
    IngestError::UnknownHandle { handle: handle.to_string(), comment }
}

/// Only well-formed envelopes are stored; throttling replies are transient.
fn is_cacheable(body: &[u8]) -> bool {
    match serde_json::from_slice::<Envelope>(body) {
        Ok(env) => {
            env.status == "OK"
                || (env.status == "FAILED"
                    && !env.comment.as_deref().unwrap_or("").to_ascii_lowercase().contains("limit exceeded"))
        }
        Err(_) => false,
    }
}
