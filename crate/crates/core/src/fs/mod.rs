// SPDX-License-Identifier: Apache-2.0

//! File-system shim over the object pool.
//!
//! Files are cut into `stripe_unit`-sized objects named
//! `<ino as 16 hex digits>.<stripe index as 8 hex digits>`, so a file's
//! object ids follow from its catalog entry alone.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::{Mutex, RwLock};

use crate::error::{Error, Result};
use crate::format::ReadAt;
use crate::store::{ObjectId, Pool};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeMap {
    pub path: String,
    pub file_ino: u64,
    pub stripe_unit: u64,
    pub file_size: u64,
    pub object_ids: Vec<ObjectId>,
}

impl StripeMap {
    fn from_geometry(path: String, file_ino: u64, stripe_unit: u64, file_size: u64) -> Self {
        let count = object_count(file_size, stripe_unit);
        Self {
            path,
            file_ino,
            stripe_unit,
            file_size,
            object_ids: (0..count).map(|i| object_name(file_ino, i)).collect(),
        }
    }

    /// Byte range `[start, end)` of the file held by object `index`.
    pub fn object_range(&self, index: usize) -> (u64, u64) {
        let start = index as u64 * self.stripe_unit;
        (start, (start + self.stripe_unit).min(self.file_size))
    }

    pub fn last_object(&self) -> &ObjectId {
        self.object_ids.last().expect("stripe maps always hold at least one object")
    }
}

pub fn object_name(ino: u64, index: u64) -> ObjectId {
    ObjectId::new(format!("{ino:016x}.{index:08x}")).expect("non-empty")
}

/// `max(1, ceil(size / unit))`.
pub fn object_count(file_size: u64, stripe_unit: u64) -> u64 {
    file_size.div_ceil(stripe_unit).max(1)
}

/// Path catalog: path → stripe map, listed in lexicographic order.
#[derive(Debug, Default)]
pub struct Namespace {
    entries: RwLock<BTreeMap<String, StripeMap>>,
    next_ino: AtomicU64,
}

impl Namespace {
    pub fn new() -> Self {
        Self {
            entries: RwLock::new(BTreeMap::new()),
            next_ino: AtomicU64::new(1),
        }
    }

    /// Stripes `bytes` into objects and records the file. An existing path
    /// is replaced only with `overwrite`; its old objects are deleted.
    pub fn write_file_striped(
        &self,
        pool: &Pool,
        path: &str,
        bytes: &[u8],
        stripe_unit: u64,
        overwrite: bool,
    ) -> Result<StripeMap> {
        if stripe_unit == 0 {
            return Err(Error::validation("stripe_unit must be >= 1"));
        }
        validate_path(path)?;
        let previous = self.entries.read().get(path).cloned();
        if previous.is_some() && !overwrite {
            return Err(Error::Conflict(format!("path '{path}' already exists")));
        }
        let ino = self.next_ino.fetch_add(1, Ordering::SeqCst);
        let map = StripeMap::from_geometry(path.to_string(), ino, stripe_unit, bytes.len() as u64);
        for (i, oid) in map.object_ids.iter().enumerate() {
            let (start, end) = map.object_range(i);
            pool.put(oid, bytes[start as usize..end as usize].to_vec())?;
        }
        if let Some(old) = previous {
            for oid in &old.object_ids {
                pool.delete(oid)?;
            }
        }
        self.entries.write().insert(path.to_string(), map.clone());
        Ok(map)
    }

    /// Filename to object ids, without touching any data object.
    pub fn resolve(&self, path: &str) -> Result<StripeMap> {
        self.entries
            .read()
            .get(path)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("path '{path}'")))
    }

    pub fn exists(&self, path: &str) -> bool {
        self.entries.read().contains_key(path)
    }

    /// Removes the catalog entry and its objects.
    pub fn remove(&self, pool: &Pool, path: &str) -> Result<()> {
        let map = self
            .entries
            .write()
            .remove(path)
            .ok_or_else(|| Error::NotFound(format!("path '{path}'")))?;
        for oid in &map.object_ids {
            pool.delete(oid)?;
        }
        Ok(())
    }

    pub fn read_file(&self, pool: &Pool, path: &str, offset: u64, length: u64) -> Result<Vec<u8>> {
        read_striped(pool, &self.resolve(path)?, offset, length)
    }

    /// Paths starting with `prefix` and ending with `suffix`, sorted.
    pub fn list(&self, prefix: &str, suffix: &str) -> Vec<String> {
        self.entries
            .read()
            .keys()
            .filter(|p| p.starts_with(prefix) && p.ends_with(suffix))
            .cloned()
            .collect()
    }

    /// Writes one `path\tino\tstripe_unit\tsize` line per file.
    pub fn save_catalog(&self, file: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(file)?);
        for m in self.entries.read().values() {
            writeln!(out, "{}\t{}\t{}\t{}", m.path, m.file_ino, m.stripe_unit, m.file_size)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load_catalog(file: &Path) -> Result<Namespace> {
        let ns = Namespace::new();
        let mut max_ino = 0;
        let reader = BufReader::new(std::fs::File::open(file)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::CorruptMetadata(format!("catalog line {}: '{line}'", lineno + 1));
            let parts: Vec<&str> = line.split('\t').collect();
            let [path, ino, unit, size] = parts.as_slice() else {
                return Err(bad());
            };
            let ino: u64 = ino.parse().map_err(|_| bad())?;
            let unit: u64 = unit.parse().map_err(|_| bad())?;
            let size: u64 = size.parse().map_err(|_| bad())?;
            if unit == 0 || path.is_empty() {
                return Err(bad());
            }
            max_ino = max_ino.max(ino);
            let map = StripeMap::from_geometry(path.to_string(), ino, unit, size);
            if ns.entries.write().insert(path.to_string(), map).is_some() {
                return Err(bad());
            }
        }
        ns.next_ino.store(max_ino + 1, Ordering::SeqCst);
        Ok(ns)
    }
}

fn validate_path(path: &str) -> Result<()> {
    if path.is_empty() || path.contains(['\t', '\n', '\r']) {
        return Err(Error::validation(format!("invalid path {path:?}")));
    }
    Ok(())
}

fn read_striped(pool: &Pool, map: &StripeMap, offset: u64, length: u64) -> Result<Vec<u8>> {
    let end = offset.saturating_add(length).min(map.file_size);
    let mut out = Vec::with_capacity(end.saturating_sub(offset) as usize);
    let mut pos = offset;
    while pos < end {
        let idx = (pos / map.stripe_unit) as usize;
        let (obj_start, obj_end) = map.object_range(idx);
        let take = end.min(obj_end) - pos;
        let chunk = pool.read_at(&map.object_ids[idx], pos - obj_start, take)?;
        if chunk.len() as u64 != take {
            return Err(Error::corrupt(format!(
                "object {} shorter than its stripe map says",
                map.object_ids[idx]
            )));
        }
        out.extend_from_slice(&chunk);
        pos += take;
    }
    Ok(out)
}

/// File-like view of a single object, backed by the pool's offset reads.
/// Records every read it issues.
pub struct ObjectReader<'a> {
    pool: &'a Pool,
    id: ObjectId,
    size: u64,
    reads: Mutex<Vec<(u64, u64)>>,
}

pub fn open_random_access_object<'a>(pool: &'a Pool, id: &ObjectId) -> Result<ObjectReader<'a>> {
    let size = pool.stat(id)?;
    Ok(ObjectReader {
        pool,
        id: id.clone(),
        size,
        reads: Mutex::new(Vec::new()),
    })
}

impl ObjectReader<'_> {
    pub fn id(&self) -> &ObjectId {
        &self.id
    }

    pub fn reads(&self) -> Vec<(u64, u64)> {
        self.reads.lock().clone()
    }

    pub fn bytes_read(&self) -> u64 {
        self.reads
            .lock()
            .iter()
            .map(|(off, len)| (off + len).min(self.size).saturating_sub(*off))
            .sum()
    }
}

impl ReadAt for ObjectReader<'_> {
    fn size(&self) -> Result<u64> {
        Ok(self.size)
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        self.reads.lock().push((offset, len));
        self.pool.read_at(&self.id, offset, len)
    }
}

/// Whole-file random access across all stripes.
pub struct FileReader<'a> {
    pool: &'a Pool,
    map: StripeMap,
}

impl<'a> FileReader<'a> {
    pub fn open(ns: &Namespace, pool: &'a Pool, path: &str) -> Result<Self> {
        Ok(Self {
            pool,
            map: ns.resolve(path)?,
        })
    }

    pub fn stripe_map(&self) -> &StripeMap {
        &self.map
    }
}

impl ReadAt for FileReader<'_> {
    fn size(&self) -> Result<u64> {
        Ok(self.map.file_size)
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        read_striped(self.pool, &self.map, offset, len)
    }
}
