//! On-disk cache of modular-symbol computations.
//!
//! A cache file is a header line, a checksum line and a JSON body:
//!
//! ```text
//! EXZERO-MODSYM-CACHE v1
//! sha256 <hex digest of the body>
//! {"key": .., "space": .., "symbol": ..}
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use exzero_core::modsym::{EigenSymbol, ManinSpace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const HEADER: &str = "EXZERO-MODSYM-CACHE v1";
pub const DIR_ENV: &str = "EXZERO_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub coefficients: [i64; 5],
    pub conductor: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub space: ManinSpace,
    pub symbol: EigenSymbol,
}

/// Why a lookup did not produce an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Miss {
    Absent,
    VersionMismatch(String),
    Checksum,
    KeyMismatch,
    Malformed(String),
    Io(String),
}

pub struct Cache {
    dir: PathBuf,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The directory from the flag, else from the environment.
    pub fn from_flag_or_env(flag: Option<&Path>) -> Option<Self> {
        flag.map(Path::to_path_buf).or_else(|| std::env::var_os(DIR_ENV).map(PathBuf::from)).map(Self::new)
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        let name = digest(serde_json::to_string(key).expect("keys serialize").as_bytes());
        self.dir.join(format!("modsym-{}.cache", &name[..16]))
    }

    pub fn encode(entry: &CacheEntry) -> String {
        let body = serde_json::to_string(entry).expect("entries serialize");
        format!("{HEADER}\nsha256 {}\n{body}", digest(body.as_bytes()))
    }

    pub fn decode(text: &str, key: &CacheKey) -> Result<CacheEntry, Miss> {
        let mut lines = text.splitn(3, '\n');
        let header = lines.next().unwrap_or_default();
        if header != HEADER {
            return Err(Miss::VersionMismatch(header.to_string()));
        }
        let sum = lines
            .next()
            .and_then(|l| l.strip_prefix("sha256 "))
            .ok_or_else(|| Miss::Malformed("missing checksum line".into()))?;
        let body = lines.next().ok_or_else(|| Miss::Malformed("missing body".into()))?;
        if digest(body.as_bytes()) != sum {
            return Err(Miss::Checksum);
        }
        let entry: CacheEntry = serde_json::from_str(body).map_err(|e| Miss::Malformed(e.to_string()))?;
        if &entry.key != key {
            return Err(Miss::KeyMismatch);
        }
        Ok(entry)
    }

    pub fn load(&self, key: &CacheKey) -> Result<CacheEntry, Miss> {
        match fs::read(self.path_for(key)) {
            Ok(bytes) => {
                let text = String::from_utf8(bytes).map_err(|_| Miss::Checksum)?;
                Self::decode(&text, key)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(Miss::Absent),
            Err(e) => Err(Miss::Io(e.to_string())),
        }
    }

    pub fn store(&self, entry: &CacheEntry) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(&entry.key);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, Self::encode(entry))?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use exzero_core::curve::EllipticCurveQ;
    use exzero_core::modsym::eigen_symbol;

    fn entry() -> CacheEntry {
        let a = [0, -1, 1, -10, -20];
        let (space, symbol) = eigen_symbol(&EllipticCurveQ::from_i64(a).unwrap(), None).unwrap();
        CacheEntry { key: CacheKey { coefficients: a, conductor: None }, space, symbol }
    }

    #[test]
    fn save_then_load_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let e = entry();
        cache.store(&e).unwrap();
        assert_eq!(cache.load(&e.key).unwrap(), e);
    }

    #[test]
    fn flipped_byte_fails_the_checksum() {
        let e = entry();
        let text = Cache::encode(&e);
        let pos = text.rfind("values").expect("symbol values are serialized");
        let mut bytes = text.into_bytes();
        bytes[pos + 12] ^= 1;
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(Cache::decode(&text, &e.key), Err(Miss::Checksum));
    }

    #[test]
    fn other_versions_are_refused() {
        let e = entry();
        let text = Cache::encode(&e).replacen("v1", "v2", 1);
        assert!(matches!(Cache::decode(&text, &e.key), Err(Miss::VersionMismatch(_))));
        let other = CacheKey { coefficients: [0, 0, 1, -1, 0], conductor: None };
        assert_eq!(Cache::decode(&Cache::encode(&e), &other), Err(Miss::KeyMismatch));
    }

    #[test]
    fn missing_files_are_absent() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(Cache::new(dir.path()).load(&entry().key), Err(Miss::Absent));
    }
}
