//! Persistent cache of invariant values.
//!
//! One JSON document per (link, backend tag) lives in the cache directory,
//! e.g. `whitehead.extended-256.json`, holding entries
//! `{N, re, im, formula_version}`. Values are stored as decimal strings that
//! parse back to the identical binary value, so a hit is bit-for-bit equal
//! to the value that was stored. A corrupt document is reported with a
//! warning and treated as empty; nothing is ever written unless the cache
//! directory already exists.

use crate::backend::{backend_tag, Cx, Real};
use crate::error::Result;
use crate::links::LinkId;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Environment variable naming the cache directory.
pub const CACHE_ENV_VAR: &str = "KASHAEV_CACHE_DIR";

/// Serializes every read-modify-write cycle within the process.
static LOCK: Mutex<()> = Mutex::new(());

/// One cached value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    /// Color.
    #[serde(rename = "N")]
    pub n: usize,
    /// Real part (round-trip decimal).
    pub re: String,
    /// Imaginary part (round-trip decimal).
    pub im: String,
    /// Formula identifier and version.
    pub formula_version: String,
    /// Cancellation estimate recorded with the value.
    #[serde(default = "one")]
    pub condition: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CacheFile {
    link: String,
    backend: String,
    entries: Vec<CacheEntry>,
}

/// Handle on a cache directory.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// Cache rooted at `dir`.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// Cache named by `KASHAEV_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV_VAR).map(Cache::new)
    }

    /// Directory of this cache.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path<R: Real>(&self, link: LinkId) -> PathBuf {
        self.dir.join(format!("{}.{}.json", link.name(), backend_tag::<R>()))
    }

    fn load(path: &Path) -> Option<CacheFile> {
        let text = fs::read_to_string(path).ok()?;
        match serde_json::from_str(&text) {
            Ok(doc) => Some(doc),
            Err(e) => {
                log::warn!("ignoring corrupt cache file {}: {e}", path.display());
                None
            }
        }
    }

    /// Looks up `(link, N, backend, formula_version)`; returns the value and
    /// its recorded condition estimate.
    pub fn get<R: Real>(&self, link: LinkId, n: usize, formula_version: &str) -> Option<(Cx<R>, f64)> {
        let _guard = LOCK.lock().unwrap_or_else(|p| p.into_inner());
        let doc = Self::load(&self.path::<R>(link))?;
        let entry = doc
            .entries
            .iter()
            .find(|e| e.n == n && e.formula_version == formula_version)?;
        match (R::from_repr(&entry.re), R::from_repr(&entry.im)) {
            (Some(re), Some(im)) if re.is_finite() && im.is_finite() => {
                Some((Complex::new(re, im), entry.condition))
            }
            _ => {
                log::warn!("ignoring unreadable cache entry for {link} N={n}");
                None
            }
        }
    }

    /// Stores a value; a no-op when the cache directory does not exist.
    pub fn put<R: Real>(
        &self,
        link: LinkId,
        n: usize,
        formula_version: &str,
        value: &Cx<R>,
        condition: f64,
    ) -> Result<()> {
        if !self.dir.is_dir() {
            return Ok(());
        }
        let _guard = LOCK.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.path::<R>(link);
        let mut doc = Self::load(&path).unwrap_or_else(|| CacheFile {
            link: link.name().to_string(),
            backend: backend_tag::<R>(),
            entries: Vec::new(),
        });
        doc.entries
            .retain(|e| !(e.n == n && e.formula_version == formula_version));
        doc.entries.push(CacheEntry {
            n,
            re: value.re.to_repr(),
            im: value.im.to_repr(),
            formula_version: formula_version.to_string(),
            condition,
        });
        doc.entries
            .sort_by(|a, b| (a.n, &a.formula_version).cmp(&(b.n, &b.formula_version)));
        let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string_pretty(&doc)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
