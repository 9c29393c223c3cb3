//! Versioned on-disk cache for expensive precomputations (coset tables,
//! Bessel memo tables).
//!
//! Each entry is a single file: a fixed binary header followed by a JSON
//! payload. The header carries a magic tag, a schema version, the SHA-256 of
//! the logical key, and the SHA-256 of the payload; any mismatch (truncated
//! file, flipped bit, stale schema, hash collision on the file name) makes
//! the load return `None` and the caller recomputes.

use crate::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"GQC1";
const SCHEMA: u32 = 1;

pub struct Cache {
    dir: PathBuf,
}

fn sha(bytes: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().into()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Cache> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)
            .map_err(|e| Error::Config(format!("cannot create cache dir {}: {e}", dir.display())))?;
        Ok(Cache { dir })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.bin", hex(&sha(key.as_bytes()))))
    }

    pub fn store<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let payload =
            serde_json::to_vec(value).map_err(|e| Error::Config(format!("serialize: {e}")))?;
        let mut bytes = Vec::with_capacity(payload.len() + 80);
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&SCHEMA.to_le_bytes());
        bytes.extend_from_slice(&sha(key.as_bytes()));
        bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        bytes.extend_from_slice(&sha(&payload));
        bytes.extend_from_slice(&payload);
        // Write to a temp name then rename, so readers never see a torn file.
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)
            .map_err(|e| Error::Config(format!("cache write {}: {e}", tmp.display())))?;
        f.write_all(&bytes)
            .and_then(|_| f.sync_all())
            .map_err(|e| Error::Config(format!("cache write: {e}")))?;
        drop(f);
        fs::rename(&tmp, &path).map_err(|e| Error::Config(format!("cache rename: {e}")))?;
        Ok(())
    }

    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let bytes = fs::read(self.path_for(key)).ok()?;
        if bytes.len() < 76 || &bytes[0..4] != MAGIC {
            return None;
        }
        let schema = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if schema != SCHEMA {
            return None;
        }
        if bytes[8..40] != sha(key.as_bytes()) {
            return None;
        }
        let len = u64::from_le_bytes(bytes[40..48].try_into().unwrap()) as usize;
        let payload = bytes.get(80..80 + len)?;
        if bytes.len() != 80 + len || bytes[48..80] != sha(payload) {
            return None;
        }
        serde_json::from_slice(payload).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let data: Vec<(Vec<u64>, (f64, f64))> =
            vec![(vec![1, 2, 3], (0.5, -0.25)), (vec![9], (1.0, 0.0))];
        cache.store("bessel/test", &data).unwrap();
        let back: Vec<(Vec<u64>, (f64, f64))> = cache.load("bessel/test").unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn missing_key_is_none() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        assert!(cache.load::<Vec<u64>>("absent").is_none());
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        cache.store("k", &vec![1u64, 2, 3]).unwrap();
        // Flip one byte in the payload region of the single cache file.
        let entry = fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        let mut bytes = fs::read(&entry).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x01;
        fs::write(&entry, &bytes).unwrap();
        assert!(cache.load::<Vec<u64>>("k").is_none());
    }

    #[test]
    fn truncation_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        cache.store("k", &vec![1u64; 100]).unwrap();
        let entry = fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        let bytes = fs::read(&entry).unwrap();
        fs::write(&entry, &bytes[..bytes.len() / 2]).unwrap();
        assert!(cache.load::<Vec<u64>>("k").is_none());
    }

    #[test]
    fn key_collision_on_filename_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        cache.store("first", &42u64).unwrap();
        // Rename the file to the slot of a different key; the embedded key
        // hash must reject it.
        let entry = fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        fs::rename(&entry, cache.path_for("second")).unwrap();
        assert!(cache.load::<u64>("second").is_none());
    }
}
