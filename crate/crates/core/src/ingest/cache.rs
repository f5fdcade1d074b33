use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::IngestError;

/// Identifies one API request: method name plus its ordered arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub method: String,
    pub args: Vec<(String, String)>,
}

impl CacheKey {
    pub fn new(method: &str, args: &[(&str, String)]) -> Self {
        Self {
            method: method.to_string(),
            args: args.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    pub fn query_string(&self) -> String {
        self.args.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("&")
    }

    /// `<method>/<first 16 bytes of sha256(query) as hex>.json`
    pub fn relative_path(&self) -> PathBuf {
        let digest = Sha256::digest(self.query_string().as_bytes());
        PathBuf::from(&self.method).join(format!("{}.json", hex::encode(&digest[..16])))
    }
}

/// Raw response store, one file per request.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.relative_path())
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<Vec<u8>>, IngestError> {
        match std::fs::read(self.path_for(key)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(IngestError::Io(e)),
        }
    }

    /// Atomic: concurrent readers see either the old or the new payload.
    pub fn put(&self, key: &CacheKey, payload: &[u8]) -> Result<(), IngestError> {
        crate::binio::write_atomic(&self.path_for(key), payload).map_err(IngestError::Io)
    }
}
