// SPDX-License-Identifier: Apache-2.0

//! Dataset layouts over the striping shim.
//!
//! Striped: one file whose row groups each fill exactly one stripe unit
//! (zero-padded), with the footer in the trailing unit(s).
//!
//! Split: one single-row-group file per group, `<prefix>.rg<i>.rgf`, plus a
//! `<prefix>.rgf.index` file holding `RGX1` and the parent footer, whose
//! row-group records name their data files.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::format::writer::{MIN_FILE_SIZE, TRAILER_LEN};
use crate::format::{
    assemble_file, decode_footer, encode_footer, encode_row_groups, FooterMetadata, ReadAt, RowGroupMeta, Schema,
    Table, MAGIC,
};
use crate::fs::{open_random_access_object, FileReader, Namespace, StripeMap};
use crate::store::{ObjectId, Pool};

pub const INDEX_MAGIC: &[u8; 4] = b"RGX1";
pub const INDEX_SUFFIX: &str = ".index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    Striped,
    Split,
}

impl LayoutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayoutKind::Striped => "striped",
            LayoutKind::Split => "split",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "striped" => Ok(LayoutKind::Striped),
            "split" => Ok(LayoutKind::Split),
            _ => Err(Error::validation(format!("unknown layout '{s}' (expected striped or split)"))),
        }
    }
}

/// One row group, self-contained in one object.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub ordinal: usize,
    pub object_id: ObjectId,
    /// File that holds the object.
    pub path: String,
    /// Offsets are relative to the start of `object_id`.
    pub row_group_meta: RowGroupMeta,
    pub source_footer: Arc<FooterMetadata>,
}

/// `ordinal -> object id`; ordinal `i` is entry `i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowGroupObjectMap(pub Vec<ObjectId>);

impl RowGroupObjectMap {
    pub fn get(&self, ordinal: usize) -> Option<&ObjectId> {
        self.0.get(ordinal)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDescriptor {
    pub layout_kind: LayoutKind,
    pub root: String,
    /// Parent footer; row group `i` is fragment `i`.
    pub footer: Arc<FooterMetadata>,
    pub fragments: Vec<Fragment>,
}

impl DatasetDescriptor {
    pub fn schema(&self) -> &Schema {
        &self.footer.schema
    }

    pub fn total_rows(&self) -> u64 {
        self.footer.total_rows
    }

    pub fn object_map(&self) -> RowGroupObjectMap {
        RowGroupObjectMap(self.fragments.iter().map(|f| f.object_id.clone()).collect())
    }
}

pub fn write_striped_dataset(
    ns: &Namespace,
    pool: &Pool,
    path: &str,
    table: &Table,
    stripe_unit: u64,
    target_rows_per_group: usize,
) -> Result<(StripeMap, RowGroupObjectMap)> {
    let groups = encode_row_groups(table, target_rows_per_group)?;
    let (bytes, footer) = assemble_file(table.schema(), &groups, Some(stripe_unit))?;
    let map = ns.write_file_striped(pool, path, &bytes, stripe_unit, false)?;
    let objects = map.object_ids[..footer.row_groups.len()].to_vec();
    Ok((map, RowGroupObjectMap(objects)))
}

pub fn split_data_path(prefix: &str, ordinal: usize) -> String {
    format!("{prefix}.rg{ordinal}.rgf")
}

pub fn split_index_path(prefix: &str) -> String {
    format!("{prefix}.rgf{INDEX_SUFFIX}")
}

pub fn write_split_dataset(
    ns: &Namespace,
    pool: &Pool,
    path_prefix: &str,
    table: &Table,
    target_rows_per_group: usize,
    stripe_unit: u64,
) -> Result<DatasetDescriptor> {
    if stripe_unit == 0 {
        return Err(Error::validation("stripe_unit must be >= 1"));
    }
    let schema = table.schema();
    let groups = encode_row_groups(table, target_rows_per_group)?;
    let mut files = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        let (bytes, footer) = assemble_file(schema, std::slice::from_ref(g), None)?;
        if bytes.len() as u64 > stripe_unit {
            return Err(Error::LayoutInfeasible {
                group: i,
                needed: bytes.len() as u64,
                stripe_unit,
            });
        }
        files.push((bytes, footer));
    }
    let index_path = split_index_path(path_prefix);
    if ns.exists(&index_path) {
        return Err(Error::Conflict(format!("path '{index_path}' already exists")));
    }

    let mut metas = Vec::with_capacity(files.len());
    let mut objects = Vec::with_capacity(files.len());
    for (i, (bytes, footer)) in files.into_iter().enumerate() {
        let path = split_data_path(path_prefix, i);
        let map = ns.write_file_striped(pool, &path, &bytes, stripe_unit, false)?;
        let mut meta = footer.row_groups.into_iter().next().expect("one group per file");
        meta.data_path = Some(path.clone());
        metas.push(meta);
        objects.push((path, map.object_ids[0].clone()));
    }
    let parent = FooterMetadata::new(schema.clone(), metas);
    let mut index = INDEX_MAGIC.to_vec();
    index.extend_from_slice(&encode_footer(&parent));
    ns.write_file_striped(pool, &index_path, &index, stripe_unit, false)?;

    let parent = Arc::new(parent);
    let fragments = objects
        .into_iter()
        .enumerate()
        .map(|(ordinal, (path, object_id))| Fragment {
            ordinal,
            object_id,
            path,
            row_group_meta: parent.row_groups[ordinal].clone(),
            source_footer: parent.clone(),
        })
        .collect();
    Ok(DatasetDescriptor {
        layout_kind: LayoutKind::Split,
        root: path_prefix.to_string(),
        footer: parent,
        fragments,
    })
}

/// Reads the trailer and footer from the file's trailing footer object(s),
/// normally just the last one. No data object is touched.
pub fn discover_striped(ns: &Namespace, pool: &Pool, path: &str) -> Result<DatasetDescriptor> {
    let map = ns.resolve(path)?;
    let unit = map.stripe_unit;
    let size = map.file_size;
    let bad = |msg: String| Error::CorruptLayout(format!("'{path}': {msg}"));
    if size < MIN_FILE_SIZE {
        return Err(bad(format!("{size} bytes is too small for a striped file")));
    }
    // Only objects at or past the footer's first stripe are ever read: the
    // trailer follows the footer, and the footer starts on a boundary.
    let read_range = |start: u64, end: u64| -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity((end - start) as usize);
        let mut pos = start;
        while pos < end {
            let idx = (pos / unit) as usize;
            let (obj_start, obj_end) = map.object_range(idx);
            let take = end.min(obj_end) - pos;
            let obj = open_random_access_object(pool, &map.object_ids[idx])?;
            out.extend_from_slice(&obj.read_exact_at(pos - obj_start, take)?);
            pos += take;
        }
        Ok(out)
    };
    let trailer = read_range(size - TRAILER_LEN, size)?;
    if &trailer[8..] != MAGIC {
        return Err(Error::corrupt(format!("'{path}': bad trailing magic")));
    }
    let footer_len = u64::from_le_bytes(trailer[..8].try_into().unwrap());
    let footer_start = (size - TRAILER_LEN)
        .checked_sub(footer_len)
        .ok_or_else(|| bad(format!("footer length {footer_len} exceeds file size")))?;
    if footer_start % unit != 0 {
        return Err(bad(format!("footer starts at {footer_start}, not on a stripe boundary")));
    }
    let body = read_range(footer_start, size - TRAILER_LEN)?;
    let footer = decode_footer(&body)?;

    let groups = footer.row_groups.len();
    if footer_start != groups.max(1) as u64 * unit {
        return Err(bad(format!(
            "footer at {footer_start} overlaps data stripes ({groups} row groups, unit {unit})"
        )));
    }
    for (i, g) in footer.row_groups.iter().enumerate() {
        if g.byte_offset != i as u64 * unit || g.byte_length > unit || g.data_path.is_some() {
            return Err(bad(format!("row group {i} is not aligned to its stripe unit")));
        }
    }

    let footer = Arc::new(footer);
    let fragments = footer
        .row_groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let object = (g.byte_offset / unit) as usize;
            Fragment {
                ordinal: i,
                object_id: map.object_ids[object].clone(),
                path: path.to_string(),
                row_group_meta: g.rebased(object as u64 * unit),
                source_footer: footer.clone(),
            }
        })
        .collect();
    Ok(DatasetDescriptor {
        layout_kind: LayoutKind::Striped,
        root: path.to_string(),
        footer,
        fragments,
    })
}

/// Every `.index` file under `prefix`, in path order, contributes its row
/// groups; ordinals run densely across them.
pub fn discover_split(ns: &Namespace, pool: &Pool, prefix: &str) -> Result<DatasetDescriptor> {
    let index_paths = ns.list(prefix, INDEX_SUFFIX);
    if index_paths.is_empty() {
        return Err(Error::NotFound(format!("no index files under '{prefix}'")));
    }
    let mut schema: Option<Schema> = None;
    let mut metas = Vec::new();
    let mut objects = Vec::new();
    for index_path in &index_paths {
        let reader = FileReader::open(ns, pool, index_path)?;
        let bytes = reader.read_exact_at(0, reader.size()?)?;
        if bytes.len() < 4 || &bytes[..4] != INDEX_MAGIC {
            return Err(Error::CorruptLayout(format!("'{index_path}': missing index magic")));
        }
        let footer = decode_footer(&bytes[4..])?;
        match &schema {
            None => schema = Some(footer.schema.clone()),
            Some(s) if *s != footer.schema => {
                return Err(Error::CorruptLayout(format!(
                    "'{index_path}': schema differs from earlier index files"
                )))
            }
            Some(_) => {}
        }
        for meta in footer.row_groups {
            let ordinal = metas.len();
            let data_path = meta
                .data_path
                .clone()
                .ok_or_else(|| Error::CorruptLayout(format!("'{index_path}': row group without data file")))?;
            let data = ns.resolve(&data_path).map_err(|_| Error::BrokenDataset {
                ordinal,
                path: data_path.clone(),
            })?;
            if data.object_ids.len() != 1 || meta.end() > data.file_size {
                return Err(Error::CorruptLayout(format!(
                    "data file '{data_path}' does not hold row group {ordinal} in one object"
                )));
            }
            objects.push((data_path, data.object_ids[0].clone()));
            metas.push(meta);
        }
    }
    let parent = Arc::new(FooterMetadata::new(schema.expect("at least one index"), metas));
    let fragments = objects
        .into_iter()
        .enumerate()
        .map(|(ordinal, (path, object_id))| Fragment {
            ordinal,
            object_id,
            path,
            row_group_meta: parent.row_groups[ordinal].clone(),
            source_footer: parent.clone(),
        })
        .collect();
    Ok(DatasetDescriptor {
        layout_kind: LayoutKind::Split,
        root: prefix.to_string(),
        footer: parent,
        fragments,
    })
}

/// Discovers a dataset of either layout rooted at `root`.
pub fn discover(ns: &Namespace, pool: &Pool, kind: LayoutKind, root: &str) -> Result<DatasetDescriptor> {
    match kind {
        LayoutKind::Striped => discover_striped(ns, pool, root),
        LayoutKind::Split => discover_split(ns, pool, root),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{open_file, scan_row_groups, Column, ColumnData, Field, PhysicalType, ScanRequest};
    use crate::store::AccessKind;

    fn table(n: i64) -> Table {
        let schema = Schema::new(vec![
            Field::new("x", PhysicalType::Int64, false),
            Field::new("s", PhysicalType::Utf8, true),
        ])
        .unwrap();
        Table::new(
            schema,
            vec![
                Column::all_valid(ColumnData::Int64((0..n).collect())),
                Column::from_options(
                    (0..n).map(|i| (i % 3 != 0).then(|| format!("v{}", i % 4))).collect(),
                    ColumnData::Utf8,
                ),
            ],
        )
        .unwrap()
    }

    fn setup() -> (Namespace, Pool) {
        (Namespace::new(), Pool::create(4, 1).unwrap())
    }

    #[test]
    fn striped_three_groups_four_objects() {
        let (ns, pool) = setup();
        let (map, objs) = write_striped_dataset(&ns, &pool, "t", &table(30), 1024, 10).unwrap();
        assert_eq!(map.object_ids.len(), 4);
        assert_eq!(objs.0, map.object_ids[..3].to_vec());

        let whole = FileReader::open(&ns, &pool, "t").unwrap();
        let footer = open_file(&whole).unwrap();
        assert_eq!(scan_row_groups(&whole, &footer, &ScanRequest::all()).unwrap(), table(30));

        pool.start_access_log();
        let d = discover_striped(&ns, &pool, "t").unwrap();
        let log = pool.take_access_log();
        assert!(log.iter().all(|r| &r.object == map.last_object() && r.kind == AccessKind::Read));
        assert_eq!(d.fragments.len(), 3);
        assert_eq!(d.object_map(), objs);
    }

    #[test]
    fn striped_rejects_oversized_group() {
        let (ns, pool) = setup();
        let err = write_striped_dataset(&ns, &pool, "t", &table(100), 64, 100).unwrap_err();
        assert!(matches!(err, Error::LayoutInfeasible { group: 0, stripe_unit: 64, .. }));
    }

    #[test]
    fn striped_footer_spanning_objects() {
        let (ns, pool) = setup();
        // Tiny unit: the footer needs several trailing objects.
        write_striped_dataset(&ns, &pool, "t", &table(40), 128, 4).unwrap();
        let d = discover_striped(&ns, &pool, "t").unwrap();
        assert_eq!(d.fragments.len(), 10);
        assert_eq!(d.total_rows(), 40);
    }

    #[test]
    fn split_files_and_discovery() {
        let (ns, pool) = setup();
        let written = write_split_dataset(&ns, &pool, "d/t", &table(50), 10, 4096).unwrap();
        let paths = ns.list("d/t", "");
        assert_eq!(paths.len(), 6);
        assert_eq!(paths.iter().filter(|p| p.ends_with(".index")).count(), 1);
        assert_eq!(paths.iter().filter(|p| p.ends_with(".rgf")).count(), 5);

        for f in &written.fragments {
            let r = FileReader::open(&ns, &pool, &f.path).unwrap();
            let footer = open_file(&r).unwrap();
            let got = scan_row_groups(&r, &footer, &ScanRequest::all()).unwrap();
            assert_eq!(got, table(50).slice(f.ordinal * 10, 10));
        }

        let index_obj = ns.resolve("d/t.rgf.index").unwrap().object_ids;
        pool.start_access_log();
        let found = discover_split(&ns, &pool, "d/t").unwrap();
        assert!(pool.take_access_log().iter().all(|r| index_obj.contains(&r.object)));
        assert_eq!(found, written);
        assert_eq!(found.schema(), table(0).schema());
        let ordinals: Vec<usize> = found.fragments.iter().map(|f| f.ordinal).collect();
        assert_eq!(ordinals, (0..5).collect::<Vec<_>>());

        ns.remove(&pool, "d/t.rg3.rgf").unwrap();
        let err = discover_split(&ns, &pool, "d/t").unwrap_err();
        assert!(matches!(err, Error::BrokenDataset { ordinal: 3, .. }), "{err}");
    }

    #[test]
    fn corrupt_striped_footer_position() {
        let (ns, pool) = setup();
        let groups = encode_row_groups(&table(30), 10).unwrap();
        let (bytes, _) = assemble_file(table(0).schema(), &groups, None).unwrap();
        ns.write_file_striped(&pool, "plain", &bytes, 1 << 20, false).unwrap();
        assert!(matches!(discover_striped(&ns, &pool, "plain"), Err(Error::CorruptLayout(_))));
    }
}
