//! On-disk cache of computed complexes and modules, keyed by a SHA-256 hash
//! of (construction, parameters, field). Entries are validated on load.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::chain::EqComplex;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::operad::{validate_right_action, RightModule};

pub const CACHE_SCHEMA_VERSION: u32 = 1;

/// Something that can be stored in the cache and re-validated on load.
pub trait Cacheable: Sized {
    fn to_payload(&self) -> Result<Value>;
    /// Parse and check structural invariants.
    fn from_payload(v: &Value) -> Result<Self>;
}

#[derive(Serialize, Deserialize)]
struct EqPayload {
    arity: usize,
    complex: crate::chain::ComplexJson,
}

impl<F: Field> Cacheable for EqComplex<F> {
    fn to_payload(&self) -> Result<Value> {
        Ok(serde_json::to_value(EqPayload { arity: self.arity(), complex: self.to_json() })?)
    }

    fn from_payload(v: &Value) -> Result<Self> {
        let p: EqPayload = serde_json::from_value(v.clone())?;
        // from_json checks d² = 0 and the Coxeter relations
        EqComplex::from_json(&p.complex, p.arity)
    }
}

impl<F: Field> Cacheable for RightModule<F> {
    fn to_payload(&self) -> Result<Value> {
        Ok(serde_json::to_value(self.to_json())?)
    }

    fn from_payload(v: &Value) -> Result<Self> {
        let m = RightModule::from_json(&serde_json::from_value(v.clone())?)?;
        validate_right_action(&m)?;
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    pub schema_version: u32,
    pub key: String,
    pub construction: String,
    pub params: Value,
    pub field: String,
    /// SHA-256 of the serialized payload.
    pub checksum: String,
    pub payload: Value,
}

/// How a value was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Hit,
    Miss,
    /// A stored entry failed validation and was recomputed.
    Recomputed(String),
}

pub fn key(construction: &str, params: &Value, field: &str) -> String {
    let canonical = serde_json::to_string(&(construction, params, field)).expect("json of plain values");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn checksum(payload: &Value) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(payload)?)))
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn lock_file(&self, key: &str) -> Result<File> {
        Ok(OpenOptions::new().create(true).truncate(false).write(true).open(self.dir.join(format!("{key}.lock")))?)
    }

    /// Read an entry under a shared lock. `Ok(None)` when absent.
    pub fn read_entry(&self, key: &str) -> Result<Option<Entry>> {
        let path = self.path(key);
        let lock = self.lock_file(key)?;
        lock.lock_shared()?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        lock.unlock()?;
        Ok(Some(serde_json::from_slice(&bytes).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?))
    }

    /// Write an entry under an exclusive lock, through a temporary file.
    pub fn write_entry(&self, entry: &Entry) -> Result<()> {
        let lock = self.lock_file(&entry.key)?;
        lock.lock()?;
        let tmp = self.dir.join(format!("{}.tmp", entry.key));
        let mut f = File::create(&tmp)?;
        f.write_all(&serde_json::to_vec_pretty(entry)?)?;
        f.sync_all()?;
        fs::rename(&tmp, self.path(&entry.key))?;
        lock.unlock()?;
        Ok(())
    }

    /// Load and validate a stored value.
    pub fn load<F: Field, T: Cacheable>(&self, construction: &str, params: &Value) -> Result<Option<T>> {
        let k = key(construction, params, &F::tag());
        let Some(entry) = self.read_entry(&k)? else { return Ok(None) };
        if entry.field != F::tag() || entry.construction != construction || &entry.params != params {
            return Ok(None);
        }
        if entry.schema_version != CACHE_SCHEMA_VERSION {
            return Err(Error::Cache(format!("schema version {} (expected {CACHE_SCHEMA_VERSION})", entry.schema_version)));
        }
        if checksum(&entry.payload)? != entry.checksum {
            return Err(Error::Cache("payload checksum mismatch".into()));
        }
        T::from_payload(&entry.payload).map(Some).map_err(|e| Error::Cache(format!("stored value is invalid: {e}")))
    }

    pub fn store<F: Field, T: Cacheable>(&self, construction: &str, params: &Value, value: &T) -> Result<PathBuf> {
        let payload = value.to_payload()?;
        let entry = Entry {
            schema_version: CACHE_SCHEMA_VERSION,
            key: key(construction, params, &F::tag()),
            construction: construction.into(),
            params: params.clone(),
            field: F::tag(),
            checksum: checksum(&payload)?,
            payload,
        };
        self.write_entry(&entry)?;
        Ok(self.path(&entry.key))
    }

    /// Return the cached value, or compute and store it. A stored entry that
    /// fails validation is replaced.
    pub fn get_or_compute<F: Field, T: Cacheable>(
        &self,
        construction: &str,
        params: &Value,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<(T, Status)> {
        let status = match self.load::<F, T>(construction, params) {
            Ok(Some(v)) => return Ok((v, Status::Hit)),
            Ok(None) => Status::Miss,
            Err(Error::Cache(msg)) => Status::Recomputed(msg),
            Err(e) => return Err(e),
        };
        let value = compute()?;
        self.store::<F, T>(construction, params, &value)?;
        Ok((value, status))
    }

    /// All readable entries, without their payloads.
    pub fn list(&self) -> Result<Vec<Entry>> {
        let mut out = Vec::new();
        for item in fs::read_dir(&self.dir)? {
            let path = item?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Ok(mut e) = serde_json::from_slice::<Entry>(&fs::read(&path)?) {
                    e.payload = Value::Null;
                    out.push(e);
                }
            }
        }
        out.sort_by(|a, b| (&a.construction, &a.key).cmp(&(&b.construction, &b.key)));
        Ok(out)
    }

    /// Remove every entry and lock file. Returns the number of entries removed.
    pub fn clear(&self) -> Result<usize> {
        let mut removed = 0;
        for item in fs::read_dir(&self.dir)? {
            let path = item?.path();
            match path.extension().and_then(|e| e.to_str()) {
                Some("json") => {
                    fs::remove_file(&path)?;
                    removed += 1;
                }
                Some("lock") | Some("tmp") => fs::remove_file(&path)?,
                _ => {}
            }
        }
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::lie;
    use crate::field::{F2, Q};
    use serde_json::json;

    #[test]
    fn lie_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let params = json!({ "n": 3 });
        let (_, status) = cache.get_or_compute::<Q, _>("lie", &params, || Ok(lie::<Q>(3))).unwrap();
        assert_eq!(status, Status::Miss);
        let path = cache.path(&key("lie", &params, "q"));
        let first = fs::read(&path).unwrap();
        let (loaded, status) = cache.get_or_compute::<Q, EqComplex<Q>>("lie", &params, || unreachable!()).unwrap();
        assert_eq!(status, Status::Hit);
        cache.store::<Q, _>("lie", &params, &loaded).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn other_field_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let params = json!({ "n": 3 });
        cache.store::<Q, _>("lie", &params, &lie::<Q>(3)).unwrap();
        assert!(cache.load::<F2, EqComplex<F2>>("lie", &params).unwrap().is_none());
    }

    #[test]
    fn tampering_is_detected_and_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let params = json!({ "n": 3 });
        let path = cache.store::<Q, _>("lie", &params, &lie::<Q>(3)).unwrap();
        let mut entry: Entry = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        entry.payload["complex"]["degrees"][0] = json!(7);
        fs::write(&path, serde_json::to_vec(&entry).unwrap()).unwrap();
        assert!(matches!(cache.load::<Q, EqComplex<Q>>("lie", &params), Err(Error::Cache(_))));
        // a consistent checksum does not hide a broken differential
        entry.checksum = checksum(&entry.payload).unwrap();
        fs::write(&path, serde_json::to_vec(&entry).unwrap()).unwrap();
        assert!(matches!(cache.load::<Q, EqComplex<Q>>("lie", &params), Err(Error::Cache(_))));
        let (v, status) = cache.get_or_compute::<Q, _>("lie", &params, || Ok(lie::<Q>(3))).unwrap();
        assert!(matches!(status, Status::Recomputed(_)));
        assert_eq!(v.complex.homology(), lie::<Q>(3).complex.homology());
        assert_eq!(cache.load::<Q, EqComplex<Q>>("lie", &params).unwrap().unwrap().dim(), v.dim());
    }

    #[test]
    fn modules_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let m = crate::bar::bar_module(&RightModule::<Q>::unit(3));
        cache.store::<Q, _>("bar", &json!({}), &m).unwrap();
        let back: RightModule<Q> = cache.load::<Q, _>("bar", &json!({})).unwrap().unwrap();
        assert_eq!(back.seq.dims(), m.seq.dims());
        assert_eq!(cache.list().unwrap().len(), 1);
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.list().unwrap().is_empty());
    }
}
