//! Checks shared by the per-module integration tests and the acceptance runner.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use cfpredict_core::ingest::{
    CodeforcesClient, FixtureTransport, IngestError, ParticipantType, RateLimiter, Transport, Verdict,
};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}
#[allow(unused_imports)]
pub(crate) use ensure;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/api")
}

/// Wraps a transport, recording the start and end of every request and the
/// largest number of requests seen in flight at once.
pub struct RecordingTransport {
    inner: Box<dyn Transport>,
    pub spans: Mutex<Vec<(Instant, Instant)>>,
    in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    pub calls: AtomicUsize,
    work: Duration,
}

impl RecordingTransport {
    pub fn new(inner: impl Transport + 'static, work: Duration) -> Self {
        Self {
            inner: Box::new(inner),
            spans: Mutex::new(Vec::new()),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
            calls: AtomicUsize::new(0),
            work,
        }
    }
}

impl Transport for RecordingTransport {
    fn get(&self, method: &str, args: &[(String, String)]) -> Result<Vec<u8>, String> {
        let start = Instant::now();
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        self.calls.fetch_add(1, Ordering::SeqCst);
        std::thread::sleep(self.work);
        let out = self.inner.get(method, args);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        self.spans.lock().unwrap().push((start, Instant::now()));
        out
    }
}

/// Serves `user.status` pages of a synthetic account with `total` submissions.
pub struct PagedTransport {
    pub total: usize,
}

impl Transport for PagedTransport {
    fn get(&self, method: &str, args: &[(String, String)]) -> Result<Vec<u8>, String> {
        if method != "user.status" {
            return Err(format!("unexpected {method}"));
        }
        let get = |k: &str| args.iter().find(|(n, _)| n == k).map(|(_, v)| v.parse::<usize>().unwrap());
        let from = get("from").unwrap_or(1);
        let count = get("count").unwrap_or(1000);
        let rows: Vec<String> = (from..(from + count).min(self.total + 1))
            .map(|i| {
                let id = 100_000 - i;
                format!(
                    r#"{{"id":{id},"contestId":77,"creationTimeSeconds":{},"problem":{{"contestId":77,"index":"A{i}"}},"author":{{"members":[{{"handle":"paged"}}],"participantType":"PRACTICE"}},"verdict":"OK"}}"#,
                    2_000_000_000 - i as i64
                )
            })
            .collect();
        Ok(format!(r#"{{"status":"OK","result":[{}]}}"#, rows.join(",")).into_bytes())
    }
}

fn fixture_client(cache: &std::path::Path) -> CodeforcesClient {
    CodeforcesClient::new(
        cache,
        Arc::new(FixtureTransport::new(fixture_dir())),
        Arc::new(RateLimiter::new(Duration::ZERO)),
    )
}

pub fn ok_rating_history() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = fixture_client(dir.path());
    let h = client.fetch_rating_history("tourist").map_err(|e| e.to_string())?;
    ensure!(h.len() == 3, "expected 3 records, got {}", h.len());
    ensure!(h.windows(2).all(|w| w[0].update_time < w[1].update_time), "not ascending");
    ensure!(h[0].contest_id == 1001 && h[2].new_rating == 3700, "wrong parse {:?}", h[0]);
    let empty = client.fetch_rating_history("newbie").map_err(|e| e.to_string())?;
    ensure!(empty.is_empty(), "zero-contest history should be empty");
    Ok(())
}

pub fn failed_status() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = fixture_client(dir.path());
    match client.fetch_rating_history("ghost") {
        Err(IngestError::UnknownHandle { handle, comment }) => {
            ensure!(handle == "ghost" && comment.contains("not found"), "bad error fields");
        }
        other => return Err(format!("expected UnknownHandle, got {other:?}")),
    }
    ensure!(
        matches!(client.fetch_submissions("ghost"), Err(IngestError::UnknownHandle { .. })),
        "submissions of unknown handle"
    );
    Ok(())
}

pub fn malformed_responses() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = fixture_client(dir.path());
    for handle in ["broken", "schema", "weird"] {
        match client.fetch_rating_history(handle) {
            Err(IngestError::MalformedResponse { method, .. }) => ensure!(method == "user.rating", "method {method}"),
            other => return Err(format!("{handle}: expected MalformedResponse, got {other:?}")),
        }
    }
    ensure!(
        matches!(client.fetch_rating_history("missing"), Err(IngestError::Transport(_))),
        "missing fixture should be a transport error"
    );
    Ok(())
}

pub fn unknown_enums() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = fixture_client(dir.path());
    let subs = client.fetch_submissions("tourist").map_err(|e| e.to_string())?;
    ensure!(subs.len() == 5, "expected 5 submissions, got {}", subs.len());
    ensure!(subs.windows(2).all(|w| w[0].creation_time <= w[1].creation_time), "not chronological");
    let hacked = subs.iter().find(|s| s.submission_id == 5004).ok_or("5004 missing")?;
    ensure!(hacked.verdict == Verdict::Other, "HACKED -> {:?}", hacked.verdict);
    let manager = subs.iter().find(|s| s.submission_id == 5002).ok_or("5002 missing")?;
    ensure!(manager.participant_type == ParticipantType::Other, "MANAGER -> {:?}", manager.participant_type);
    ensure!(manager.verdict == Verdict::Other, "missing verdict -> {:?}", manager.verdict);
    let gym = subs.iter().find(|s| s.submission_id == 5001).ok_or("5001 missing")?;
    ensure!(gym.problem_key == "acmsguru/101" && gym.contest_id == 0, "problemset key {}", gym.problem_key);
    let empty = client.fetch_submissions("newbie").map_err(|e| e.to_string())?;
    ensure!(empty.is_empty(), "empty account");
    Ok(())
}

pub fn paginated() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rec = Arc::new(RecordingTransport::new(PagedTransport { total: 200 }, Duration::ZERO));
    let client = CodeforcesClient::new(dir.path(), rec.clone(), Arc::new(RateLimiter::new(Duration::ZERO))).with_page_size(100);
    let subs = client.fetch_submissions("paged").map_err(|e| e.to_string())?;
    ensure!(subs.len() == 200, "expected 200, got {}", subs.len());
    let mut ids: Vec<u64> = subs.iter().map(|s| s.submission_id).collect();
    ids.sort();
    ids.dedup();
    ensure!(ids.len() == 200, "duplicate ids");
    ensure!(subs.windows(2).all(|w| w[0].creation_time <= w[1].creation_time), "not chronological");
    // two full pages, then an empty one that ends the walk
    ensure!(rec.calls.load(Ordering::SeqCst) == 3, "expected 3 page requests, got {}", rec.calls.load(Ordering::SeqCst));
    Ok(())
}

pub fn standings_rows() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = fixture_client(dir.path());
    let row = client.fetch_standings_row(1001, "tourist").map_err(|e| e.to_string())?;
    ensure!(row.points == 1500.0, "points {}", row.points);
    // rating record says rank 4; standings value wins here
    ensure!(row.rank == 3, "rank {}", row.rank);
    let zero = client.fetch_standings_row(1002, "tourist").map_err(|e| e.to_string())?;
    ensure!(zero.points == 0.0 && zero.rank == 812, "official row should be picked: {zero:?}");
    ensure!(
        matches!(client.fetch_standings_row(1003, "tourist"), Err(IngestError::NotAParticipant { contest_id: 1003, .. })),
        "empty standings"
    );
    Ok(())
}

pub fn offline_and_idempotent() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let online = fixture_client(dir.path());
    let first = online.fetch_contestant("tourist").map_err(|e| e.to_string())?;
    ensure!(first.standings.len() == 2, "standings for 1001 and 1002 only");
    let offline = CodeforcesClient::offline(dir.path());
    let again = offline.fetch_contestant("tourist").map_err(|e| e.to_string())?;
    ensure!(first == again, "offline replay differs");
    let third = offline.fetch_contestant("tourist").map_err(|e| e.to_string())?;
    ensure!(again == third, "repeat differs");
    ensure!(
        matches!(offline.fetch_rating_history("newbie"), Err(IngestError::Offline { .. })),
        "cold offline fetch must fail"
    );
    // FAILED replies are cached too, so an offline rerun reports the same error
    let _ = online.fetch_rating_history("ghost");
    ensure!(
        matches!(offline.fetch_rating_history("ghost"), Err(IngestError::UnknownHandle { .. })),
        "cached FAILED reply"
    );
    Ok(())
}

/// Issues requests from several threads through one limiter and checks that
/// no request starts before `interval` has passed since the previous one ended.
pub fn rate_limiter_spacing() -> Check {
    let interval = Duration::from_millis(30);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rec = Arc::new(RecordingTransport::new(FixtureTransport::new(fixture_dir()), Duration::from_millis(2)));
    let limiter = Arc::new(RateLimiter::new(interval));
    let handles = ["tourist", "newbie", "ghost", "broken", "schema", "weird"];
    std::thread::scope(|s| {
        for (i, h) in handles.iter().enumerate() {
            let sub = dir.path().join(format!("c{i}"));
            let client = CodeforcesClient::new(sub, rec.clone(), limiter.clone());
            s.spawn(move || {
                let _ = client.fetch_rating_history(h);
                let _ = client.fetch_submissions(h);
            });
        }
    });
    let mut spans = rec.spans.lock().unwrap().clone();
    spans.sort();
    ensure!(spans.len() >= handles.len(), "only {} requests recorded", spans.len());
    ensure!(rec.max_in_flight.load(Ordering::SeqCst) == 1, "more than one request in flight");
    for w in spans.windows(2) {
        let gap = w[1].0.duration_since(w[0].0);
        ensure!(gap >= interval, "two request starts only {gap:?} apart");
        ensure!(w[1].0 >= w[0].1 + interval, "request started {:?} after the previous ended", w[1].0 - w[0].1);
    }
    Ok(())
}

pub const INGEST_SUITE: [(&str, fn() -> Check); 8] = [
    ("OK responses parse in order", ok_rating_history),
    ("FAILED status maps to UnknownHandle", failed_status),
    ("malformed bodies are rejected", malformed_responses),
    ("unknown enum strings map to Other", unknown_enums),
    ("two pages of 100 give 200 unique records", paginated),
    ("standings points and ranks", standings_rows),
    ("offline replay and idempotence", offline_and_idempotent),
    ("rate limiter spacing under concurrency", rate_limiter_spacing),
];
