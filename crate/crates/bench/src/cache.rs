//! On-disk score cache keyed by pair content, metric and constants table.
//!
//! Entries are written to a temporary file and renamed into place, so
//! concurrent writers never expose a partial entry.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use advfid_core::{MetricId, ScoreValue};
use sha2::{Digest, Sha256};

use crate::config::hex;

/// Environment variable that overrides the cache root.
pub const CACHE_ENV: &str = "ADVFID_CACHE_DIR";

const FORMAT_VERSION: &str = "advfid-score-cache-v1";

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug)]
pub struct ScoreCache {
    root: PathBuf,
}

/// A cached score and its optional note (e.g. a reduced scale count).
#[derive(Clone, Debug, PartialEq)]
pub struct CachedScore {
    pub value: ScoreValue,
    pub note: Option<String>,
}

impl ScoreCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Environment override, then the configured directory, then `<out_dir>/cache`.
    pub fn resolve_root(configured: Option<&Path>, out_dir: &Path) -> PathBuf {
        match std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            Some(dir) => PathBuf::from(dir),
            None => configured.map_or_else(|| out_dir.join("cache"), Path::to_path_buf),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Digest identifying the image content of a pair.
    pub fn pair_digest(reference: &[u8], test: &[u8]) -> String {
        let mut h = Sha256::new();
        h.update(Sha256::digest(reference));
        h.update(Sha256::digest(test));
        hex(&h.finalize())
    }

    pub fn key(pair_digest: &str, metric: MetricId, constants_hash: &str) -> String {
        let mut h = Sha256::new();
        for part in [FORMAT_VERSION, pair_digest, metric.name(), constants_hash] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        hex(&h.finalize())
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(key)
    }

    /// Missing or unreadable entries are treated as misses.
    pub fn get(&self, key: &str) -> Option<CachedScore> {
        let text = std::fs::read_to_string(self.entry_path(key)).ok()?;
        let mut lines = text.lines();
        let value = lines.next()?.parse::<ScoreValue>().ok()?;
        let note = lines.next().filter(|l| !l.is_empty()).map(str::to_string);
        Some(CachedScore { value, note })
    }

    pub fn put(&self, key: &str, entry: &CachedScore) -> std::io::Result<()> {
        let path = self.entry_path(key);
        let dir = path.parent().expect("entry has a parent");
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        {
            let mut f = std::fs::File::create(&tmp)?;
            writeln!(f, "{}", entry.value)?;
            writeln!(f, "{}", entry.note.as_deref().unwrap_or(""))?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, &path).inspect_err(|_| {
            let _ = std::fs::remove_file(&tmp);
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ScoreCache::new(dir.path());
        let key = ScoreCache::key(&ScoreCache::pair_digest(b"a", b"b"), MetricId::Psnr, "c");
        assert_eq!(cache.get(&key), None);
        for value in [ScoreValue::Finite(0.1 + 0.2), ScoreValue::UnboundedPerfect] {
            let e = CachedScore {
                value,
                note: Some("reduced to 4 scales".into()),
            };
            cache.put(&key, &e).unwrap();
            assert_eq!(cache.get(&key), Some(e));
        }
    }

    #[test]
    fn keys_separate_inputs() {
        let d = ScoreCache::pair_digest(b"a", b"b");
        assert_ne!(d, ScoreCache::pair_digest(b"b", b"a"));
        assert_ne!(
            ScoreCache::key(&d, MetricId::Psnr, "c"),
            ScoreCache::key(&d, MetricId::Ssim, "c")
        );
        assert_ne!(
            ScoreCache::key(&d, MetricId::Psnr, "c"),
            ScoreCache::key(&d, MetricId::Psnr, "d")
        );
    }

    #[test]
    fn concurrent_writers_leave_a_whole_entry() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ScoreCache::new(dir.path());
        let key = ScoreCache::key("p", MetricId::Ssim, "c");
        std::thread::scope(|s| {
            for i in 0..8 {
                let (cache, key) = (&cache, &key);
                s.spawn(move || {
                    let e = CachedScore {
                        value: ScoreValue::Finite(i as f64),
                        note: None,
                    };
                    cache.put(key, &e).unwrap();
                });
            }
        });
        let got = cache.get(&key).unwrap().value.finite().unwrap();
        assert!((0.0..8.0).contains(&got));
        let leftovers = std::fs::read_dir(dir.path().join(&key[..2]))
            .unwrap()
            .count();
        assert_eq!(leftovers, 1);
    }
}
