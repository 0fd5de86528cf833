//! Content-addressed store for density-evolution results.
//!
//! Records live in memory and, when a directory is configured, as one JSON
//! file per record under `<dir>/<kind>/<key[..2]>/<key>.json`. Each file
//! carries its own key and a SHA-256 checksum of the payload; records that
//! fail either check are discarded and recomputed.

use std::any::Any;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density_evolution::{DeEngine, DeParams, DeTrace, ENGINE_VERSION};
use crate::error::Result;
use crate::protograph::Protograph;

/// Environment variable naming the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "LDPC_ENERGY_CACHE";

/// Incremental builder of cache keys; floats are hashed by bit pattern.
#[derive(Debug, Clone)]
pub struct KeyBuilder {
    text: String,
}

impl KeyBuilder {
    pub fn new(kind: &str) -> Self {
        KeyBuilder {
            text: format!("{kind}|engine={ENGINE_VERSION}"),
        }
    }

    pub fn protograph(mut self, p: &Protograph) -> Self {
        let entries: Vec<String> = p.entries().iter().map(u32::to_string).collect();
        self.text += &format!("|S={}x{}:{}", p.rows(), p.cols(), entries.join(","));
        self
    }

    pub fn params(self, params: &DeParams) -> Self {
        self.uint("q", u64::from(params.q))
            .float("eps", params.epsilon)
            .float("alpha", params.alpha)
            .uint("lambda", u64::from(params.lambda))
    }

    pub fn float(mut self, name: &str, v: f64) -> Self {
        self.text += &format!("|{name}={:016x}", v.to_bits());
        self
    }

    pub fn uint(mut self, name: &str, v: u64) -> Self {
        self.text += &format!("|{name}={v}");
        self
    }

    /// Human-readable key material.
    pub fn material(&self) -> &str {
        &self.text
    }

    pub fn finish(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

/// Key of a single DE trace.
pub fn trace_key(p: &Protograph, params: &DeParams, snr_db: f64, l_flood: usize) -> String {
    KeyBuilder::new("trace")
        .protograph(p)
        .params(params)
        .float("snr_db", snr_db)
        .uint("l_flood", l_flood as u64)
        .finish()
}

#[derive(Serialize, Deserialize)]
struct DiskRecord {
    kind: String,
    key: String,
    engine_version: u32,
    checksum: String,
    payload: String,
}

type Entry = Arc<dyn Any + Send + Sync>;

/// Concurrent DE result cache.
#[derive(Default)]
pub struct DeCache {
    dir: Option<PathBuf>,
    mem: RwLock<HashMap<(String, String), Entry>>,
}

impl std::fmt::Debug for DeCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeCache").field("dir", &self.dir).finish()
    }
}

impl DeCache {
    /// In-memory only.
    pub fn in_memory() -> Self {
        DeCache::default()
    }

    /// Memory plus a persistent directory (created on demand).
    pub fn persistent(dir: impl Into<PathBuf>) -> Self {
        DeCache {
            dir: Some(dir.into()),
            mem: RwLock::default(),
        }
    }

    /// Persistent at `$LDPC_ENERGY_CACHE` when set, in-memory otherwise.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => DeCache::persistent(dir),
            _ => DeCache::in_memory(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(kind).join(&key[..2]).join(format!("{key}.json")))
    }

    /// Looks a record up in memory, then on disk.
    pub fn get<T>(&self, kind: &str, key: &str) -> Option<Arc<T>>
    where
        T: DeserializeOwned + Send + Sync + 'static,
    {
        let id = (kind.to_string(), key.to_string());
        if let Some(e) = self.mem.read().unwrap().get(&id) {
            if let Ok(v) = e.clone().downcast::<T>() {
                return Some(v);
            }
        }
        let value = Arc::new(self.load::<T>(kind, key)?);
        self.mem.write().unwrap().insert(id, value.clone());
        Some(value)
    }

    fn load<T: DeserializeOwned>(&self, kind: &str, key: &str) -> Option<T> {
        let path = self.path(kind, key)?;
        let text = fs::read_to_string(&path).ok()?;
        let verdict = serde_json::from_str::<DiskRecord>(&text)
            .map_err(|e| e.to_string())
            .and_then(|rec| {
                if rec.key != key || rec.kind != kind || rec.engine_version != ENGINE_VERSION {
                    return Err("key mismatch".to_string());
                }
                if hex::encode(Sha256::digest(rec.payload.as_bytes())) != rec.checksum {
                    return Err("checksum mismatch".to_string());
                }
                serde_json::from_str::<T>(&rec.payload).map_err(|e| e.to_string())
            });
        match verdict {
            Ok(v) => Some(v),
            Err(why) => {
                log::warn!("discarding cache record {}: {why}", path.display());
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    /// Stores a record; identical keys overwrite (last writer wins).
    pub fn put<T>(&self, kind: &str, key: &str, value: Arc<T>) -> Result<()>
    where
        T: Serialize + Send + Sync + 'static,
    {
        if let Some(path) = self.path(kind, key) {
            let payload = serde_json::to_string(value.as_ref())?;
            let rec = DiskRecord {
                kind: kind.to_string(),
                key: key.to_string(),
                engine_version: ENGINE_VERSION,
                checksum: hex::encode(Sha256::digest(payload.as_bytes())),
                payload,
            };
            let parent = path.parent().unwrap();
            fs::create_dir_all(parent)?;
            let tmp = parent.join(format!(
                "{key}.{}.{:?}.tmp",
                std::process::id(),
                std::thread::current().id()
            ));
            fs::write(&tmp, serde_json::to_vec(&rec)?)?;
            fs::rename(&tmp, &path)?;
        }
        self.mem
            .write()
            .unwrap()
            .insert((kind.to_string(), key.to_string()), value);
        Ok(())
    }

    /// Cached value or the result of `compute`, which is then stored.
    pub fn get_or_insert_with<T, F>(&self, kind: &str, key: &str, compute: F) -> Result<Arc<T>>
    where
        T: Serialize + DeserializeOwned + Send + Sync + 'static,
        F: FnOnce() -> Result<T>,
    {
        if let Some(v) = self.get::<T>(kind, key) {
            return Ok(v);
        }
        let v = Arc::new(compute()?);
        self.put(kind, key, v.clone())?;
        Ok(v)
    }

    /// DE trace at one SNR, computed on a miss.
    pub fn trace(
        &self,
        p: &Protograph,
        params: DeParams,
        snr_db: f64,
        l_flood: usize,
    ) -> Result<Arc<DeTrace>> {
        let key = trace_key(p, &params, snr_db, l_flood);
        self.get_or_insert_with("trace", &key, || DeEngine::new(p, params)?.run(snr_db, l_flood))
    }

    /// Number of records held in memory.
    pub fn len(&self) -> usize {
        self.mem.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
