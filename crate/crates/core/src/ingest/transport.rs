use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Issues one GET against an API method and returns the response body.
pub trait Transport: Send + Sync {
    fn get(&self, method: &str, args: &[(String, String)]) -> Result<Vec<u8>, String>;
}

pub const API_BASE: &str = "https://codeforces.com/api";

/// Blocking HTTPS transport. Non-2xx bodies are returned as-is because the
/// API reports failures (e.g. unknown handles) inside a JSON envelope.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    base: String,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("cfpredict/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Self { client, base: API_BASE.to_string() })
    }

    pub fn with_base(mut self, base: impl Into<String>) -> Self {
        self.base = base.into();
        self
    }
}

impl Transport for HttpTransport {
    fn get(&self, method: &str, args: &[(String, String)]) -> Result<Vec<u8>, String> {
        let url = format!("{}/{}", self.base, method);
        let resp = self.client.get(url).query(args).send().map_err(|e| e.to_string())?;
        resp.bytes().map(|b| b.to_vec()).map_err(|e| e.to_string())
    }
}

/// Serves responses from hand-written files in a directory:
///
/// | request                                    | file                   |
/// |--------------------------------------------|------------------------|
/// | `user.rating?handle=H`                     | `H.rating.json`        |
/// | `user.status?handle=H&from=F&count=C`      | `H.status.F.json`, else `H.status.json` (page 1 only) |
/// | `contest.standings?contestId=I&handles=H`  | `standings.I.H.json`   |
pub struct FixtureTransport {
    dir: PathBuf,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn arg<'a>(args: &'a [(String, String)], name: &str) -> Option<&'a str> {
        args.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn read(&self, name: &str) -> Option<Vec<u8>> {
        std::fs::read(self.dir.join(name)).ok()
    }
}

impl Transport for FixtureTransport {
    fn get(&self, method: &str, args: &[(String, String)]) -> Result<Vec<u8>, String> {
        let missing = || format!("no fixture for {method}?{args:?}");
        match method {
            "user.rating" => {
                let h = Self::arg(args, "handle").ok_or_else(missing)?;
                self.read(&format!("{h}.rating.json")).ok_or_else(missing)
            }
            "user.status" => {
                let h = Self::arg(args, "handle").ok_or_else(missing)?;
                let from = Self::arg(args, "from").unwrap_or("1");
                if let Some(b) = self.read(&format!("{h}.status.{from}.json")) {
                    return Ok(b);
                }
                let whole = self.read(&format!("{h}.status.json")).ok_or_else(missing)?;
                if from == "1" {
                    Ok(whole)
                } else {
                    Ok(br#"{"status":"OK","result":[]}"#.to_vec())
                }
            }
            "contest.standings" => {
                let c = Self::arg(args, "contestId").ok_or_else(missing)?;
                let h = Self::arg(args, "handles").ok_or_else(missing)?;
                self.read(&format!("standings.{c}.{h}.json")).ok_or_else(missing)
            }
            _ => Err(missing()),
        }
    }
}

/// Starts each request at least `interval` after the previous one finished.
/// The lock is held for the whole request, so at most one is ever in flight.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        Self { interval, last: Mutex::new(None) }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    pub fn run<T>(&self, request: impl FnOnce() -> T) -> T {
        let mut last = self.last.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(prev) = *last {
            let next = prev + self.interval;
            let now = Instant::now();
            if now < next {
                std::thread::sleep(next - now);
            }
        }
        let out = request();
        *last = Some(Instant::now());
        out
    }
}
