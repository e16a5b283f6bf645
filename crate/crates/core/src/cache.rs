//! Content-addressed JSON cache for computed series and tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eisenstein::{eis_series, TorsionIndex};
use crate::error::Result;
use crate::qseries::NearlyHol;

/// Bumped whenever cached formats or algorithms change.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+1");

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "CUSPSYM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub module: String,
    pub level: u32,
    pub weight: u32,
    pub index: Option<[u32; 2]>,
    pub precision: usize,
    pub degree: Option<u32>,
    pub version: String,
}

impl CacheKey {
    pub fn new(module: &str, level: u32, weight: u32, precision: usize) -> Self {
        CacheKey {
            module: module.into(),
            level,
            weight,
            index: None,
            precision,
            degree: None,
            version: CODE_VERSION.into(),
        }
    }

    pub fn index(mut self, c: [u32; 2]) -> Self {
        self.index = Some(c);
        self
    }

    pub fn degree(mut self, w: u32) -> Self {
        self.degree = Some(w);
        self
    }

    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("key serializes");
        let h = Sha256::digest(canonical.as_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    key: CacheKey,
    value: T,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
    version: String,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into(), version: CODE_VERSION.into() }
    }

    /// Uses the environment override if set, else `dir`.
    pub fn from_env(dir: Option<PathBuf>) -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(PathBuf::from).or(dir).map(Cache::new)
    }

    /// A cache that stamps keys with another code version.
    pub fn with_version(mut self, v: &str) -> Self {
        self.version = v.into();
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stamp(&self, key: &CacheKey) -> CacheKey {
        CacheKey { version: self.version.clone(), ..key.clone() }
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        let key = self.stamp(key);
        self.dir.join(&key.module).join(format!("{}.json", key.digest()))
    }

    /// `None` when missing, unreadable, for another key, or rejected by `valid`.
    pub fn load<T: DeserializeOwned>(&self, key: &CacheKey, valid: impl Fn(&T) -> bool) -> Option<T> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let env: Envelope<T> = serde_json::from_str(&text).ok()?;
        (env.key == self.stamp(key) && valid(&env.value)).then_some(env.value)
    }

    /// Writes through a temporary file and a rename, so readers never see partial files.
    pub fn store<T: Serialize>(&self, key: &CacheKey, value: &T) -> Result<()> {
        let path = self.path(key);
        let parent = path.parent().expect("cache path has a parent");
        fs::create_dir_all(parent)?;
        let env = Envelope { key: self.stamp(key), value };
        let text = serde_json::to_string(&env)?;
        let tmp = parent.join(format!(
            ".{}.{}.{:?}.tmp",
            path.file_name().unwrap().to_string_lossy(),
            std::process::id(),
            std::thread::current().id()
        ));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn get_or_compute<T: Serialize + DeserializeOwned>(
        &self,
        key: &CacheKey,
        valid: impl Fn(&T) -> bool,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        if let Some(v) = self.load(key, valid) {
            return Ok(v);
        }
        let v = compute()?;
        self.store(key, &v)?;
        Ok(v)
    }
}

/// `ε_{k,c}` through an optional cache; loads are checked against level, weight and precision.
pub fn cached_eis_series(cache: Option<&Cache>, k: u32, c: &TorsionIndex, precision: usize) -> Result<NearlyHol> {
    let Some(cache) = cache else {
        return eis_series(k, c, precision);
    };
    let key = CacheKey::new("eisenstein", c.level, k, precision).index([c.c1, c.c2]);
    let valid = |f: &NearlyHol| f.level() == c.level && f.precision() == precision && f.weight() == k as i32;
    cache.get_or_compute(&key, valid, || eis_series(k, c, precision))
}
