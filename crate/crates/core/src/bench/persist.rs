// SPDX-License-Identifier: Apache-2.0

//! On-disk store directory used by the CLI.
//!
//! ```text
//! <dir>/store.conf    seed = <u64>, nodes = <usize>
//! <dir>/catalog.tsv   namespace catalog
//! <dir>/objects/<id>  raw object bytes
//! ```
//!
//! Objects are re-placed on load, so a store may be reopened with any node count.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fs::Namespace;
use crate::store::{ObjectId, Pool};

const CONF: &str = "store.conf";
const CATALOG: &str = "catalog.tsv";
const OBJECTS: &str = "objects";

pub fn save_store(dir: &Path, ns: &Namespace, pool: &Pool) -> Result<()> {
    let objects = dir.join(OBJECTS);
    std::fs::create_dir_all(&objects)?;
    for entry in std::fs::read_dir(&objects)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            std::fs::remove_file(entry.path())?;
        }
    }
    for id in pool.object_ids() {
        let bytes = pool.read_at(&id, 0, pool.stat(&id)?)?;
        std::fs::write(objects.join(id.as_str()), bytes)?;
    }
    ns.save_catalog(&dir.join(CATALOG))?;
    std::fs::write(
        dir.join(CONF),
        format!("seed = {}\nnodes = {}\n", pool.seed(), pool.node_count()),
    )?;
    Ok(())
}

/// Opens a saved store; `nodes` overrides the saved node count.
pub fn load_store(dir: &Path, nodes: Option<usize>) -> Result<(Namespace, Pool)> {
    let conf = std::fs::read_to_string(dir.join(CONF))
        .map_err(|e| Error::NotFound(format!("store at '{}': {e}", dir.display())))?;
    let mut seed = None;
    let mut saved_nodes = None;
    for line in conf.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{CONF}: bad line '{line}'")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{CONF}: bad value '{line}'")))
        };
        match k.trim() {
            "seed" => seed = Some(parse(v)?),
            "nodes" => saved_nodes = Some(parse(v)? as usize),
            other => return Err(Error::Config(format!("{CONF}: unknown key '{other}'"))),
        }
    }
    let seed = seed.ok_or_else(|| Error::Config(format!("{CONF}: missing seed")))?;
    let nodes = nodes
        .or(saved_nodes)
        .ok_or_else(|| Error::Config(format!("{CONF}: missing nodes")))?;
    let pool = Pool::create(nodes, seed)?;
    for entry in std::fs::read_dir(dir.join(OBJECTS))? {
        let entry = entry?;
        let name = entry.file_name().into_string().map_err(|n| {
            Error::Config(format!("object file name {n:?} is not UTF-8"))
        })?;
        pool.put(&ObjectId::new(name)?, std::fs::read(entry.path())?)?;
    }
    let ns = Namespace::load_catalog(&dir.join(CATALOG))?;
    Ok((ns, pool))
}
