// SPDX-License-Identifier: Apache-2.0

//! In-process multi-node object pool.
//!
//! Objects are whole byte strings addressed by [`ObjectId`] and placed on
//! exactly one node by a seeded hash. Registered [`ObjectClassMethod`]s
//! run against a single object on the node that owns it, and the work they
//! report is charged to that node's ledger.
//!
//! Phase discipline: `put`/`delete` are safe at any time but benchmarks
//! write a dataset first and only then scan it; concurrent `read_at` and
//! `exec_class_method` calls are the supported hot path.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use crate::error::{Error, NodeId, Result};
use crate::format::ReadAt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::validation("object id must be non-empty"));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Resources consumed on one storage node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeUsage {
    /// Abstract CPU work units.
    pub cpu_ticks: u64,
    /// Portion of `cpu_ticks` spent decoding column chunks and evaluating predicates.
    pub decode_filter_ticks: u64,
    pub bytes_read_local: u64,
    pub bytes_returned: u64,
    pub reads: u64,
    pub execs: u64,
}

impl NodeUsage {
    pub fn add(&mut self, o: &NodeUsage) {
        self.cpu_ticks += o.cpu_ticks;
        self.decode_filter_ticks += o.decode_filter_ticks;
        self.bytes_read_local += o.bytes_read_local;
        self.bytes_returned += o.bytes_returned;
        self.reads += o.reads;
        self.execs += o.execs;
    }
}

#[derive(Default)]
struct Ledger {
    cpu_ticks: AtomicU64,
    decode_filter_ticks: AtomicU64,
    bytes_read_local: AtomicU64,
    bytes_returned: AtomicU64,
    reads: AtomicU64,
    execs: AtomicU64,
}

impl Ledger {
    fn add(&self, u: &NodeUsage) {
        self.cpu_ticks.fetch_add(u.cpu_ticks, Ordering::Relaxed);
        self.decode_filter_ticks.fetch_add(u.decode_filter_ticks, Ordering::Relaxed);
        self.bytes_read_local.fetch_add(u.bytes_read_local, Ordering::Relaxed);
        self.bytes_returned.fetch_add(u.bytes_returned, Ordering::Relaxed);
        self.reads.fetch_add(u.reads, Ordering::Relaxed);
        self.execs.fetch_add(u.execs, Ordering::Relaxed);
    }

    fn snapshot(&self) -> NodeUsage {
        NodeUsage {
            cpu_ticks: self.cpu_ticks.load(Ordering::Relaxed),
            decode_filter_ticks: self.decode_filter_ticks.load(Ordering::Relaxed),
            bytes_read_local: self.bytes_read_local.load(Ordering::Relaxed),
            bytes_returned: self.bytes_returned.load(Ordering::Relaxed),
            reads: self.reads.load(Ordering::Relaxed),
            execs: self.execs.load(Ordering::Relaxed),
        }
    }
}

#[derive(Default)]
struct Node {
    objects: RwLock<HashMap<ObjectId, Arc<Vec<u8>>>>,
    ledger: Ledger,
    in_flight: AtomicUsize,
    peak_in_flight: AtomicUsize,
}

struct InFlight<'a>(&'a Node);

impl<'a> InFlight<'a> {
    fn enter(node: &'a Node) -> Self {
        let now = node.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        node.peak_in_flight.fetch_max(now, Ordering::SeqCst);
        InFlight(node)
    }
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

/// How an object was touched, as recorded by [`Pool::start_access_log`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    /// `Pool::read_at` from outside the store.
    Read,
    /// A class-method invocation.
    Exec,
    /// A ranged read issued by a class method against its own object.
    HandlerRead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessRecord {
    pub object: ObjectId,
    pub kind: AccessKind,
    pub offset: u64,
    pub length: u64,
}

/// A handler invocable on any object by name.
pub trait ObjectClassMethod: Send + Sync {
    fn name(&self) -> &str;

    /// Runs against the single object behind `object`; handlers only see
    /// that object's bytes.
    fn call(&self, object: &ObjectHandle, arg: &[u8]) -> Result<Vec<u8>>;
}

/// Read-only view of one object handed to a class method, accumulating the
/// work it performs for the owning node.
pub struct ObjectHandle {
    id: ObjectId,
    node: NodeId,
    data: Arc<Vec<u8>>,
    cpu_ticks: AtomicU64,
    decode_filter_ticks: AtomicU64,
    bytes_read: AtomicU64,
    reads: AtomicU64,
    ranges: Mutex<Vec<(u64, u64)>>,
}

impl ObjectHandle {
    pub fn id(&self) -> &ObjectId {
        &self.id
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn charge_cpu(&self, ticks: u64) {
        self.cpu_ticks.fetch_add(ticks, Ordering::Relaxed);
    }

    /// Charges decode/filter work; also counted in total CPU.
    pub fn charge_decode_filter(&self, ticks: u64) {
        self.decode_filter_ticks.fetch_add(ticks, Ordering::Relaxed);
        self.charge_cpu(ticks);
    }

    fn usage(&self) -> NodeUsage {
        NodeUsage {
            cpu_ticks: self.cpu_ticks.load(Ordering::Relaxed),
            decode_filter_ticks: self.decode_filter_ticks.load(Ordering::Relaxed),
            bytes_read_local: self.bytes_read.load(Ordering::Relaxed),
            bytes_returned: 0,
            reads: self.reads.load(Ordering::Relaxed),
            execs: 1,
        }
    }
}

impl ReadAt for ObjectHandle {
    fn size(&self) -> Result<u64> {
        Ok(self.data.len() as u64)
    }

    fn read_at(&self, offset: u64, len: u64) -> Result<Vec<u8>> {
        let out = self.data.as_slice().read_at(offset, len)?;
        self.ranges.lock().push((offset, len));
        self.bytes_read.fetch_add(out.len() as u64, Ordering::Relaxed);
        self.reads.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }
}

/// Seeded FNV-1a with a splitmix64 finalizer; stable across runs and platforms.
pub fn placement(id: &ObjectId, node_count: usize, seed: u64) -> NodeId {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(id.as_str().as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    NodeId((h % node_count as u64) as usize)
}

pub struct Pool {
    seed: u64,
    nodes: Vec<Node>,
    methods: RwLock<BTreeMap<String, Arc<dyn ObjectClassMethod>>>,
    access_log: Mutex<Option<Vec<AccessRecord>>>,
}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pool")
            .field("node_count", &self.nodes.len())
            .field("seed", &self.seed)
            .field("methods", &self.methods.read().keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Pool {
    pub fn create(node_count: usize, seed: u64) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::validation("node_count must be >= 1"));
        }
        Ok(Self {
            seed,
            nodes: (0..node_count).map(|_| Node::default()).collect(),
            methods: RwLock::new(BTreeMap::new()),
            access_log: Mutex::new(None),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_of(&self, id: &ObjectId) -> NodeId {
        placement(id, self.nodes.len(), self.seed)
    }

    fn node(&self, id: &ObjectId) -> &Node {
        &self.nodes[self.node_of(id).0]
    }

    fn get(&self, id: &ObjectId) -> Result<Arc<Vec<u8>>> {
        self.node(id)
            .objects
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("object {id}")))
    }

    /// Full-object write; overwrites any existing object.
    pub fn put(&self, id: &ObjectId, bytes: Vec<u8>) -> Result<()> {
        self.node(id).objects.write().insert(id.clone(), Arc::new(bytes));
        Ok(())
    }

    pub fn delete(&self, id: &ObjectId) -> Result<()> {
        match self.node(id).objects.write().remove(id) {
            Some(_) => Ok(()),
            None => Err(Error::NotFound(format!("object {id}"))),
        }
    }

    pub fn stat(&self, id: &ObjectId) -> Result<u64> {
        Ok(self.get(id)?.len() as u64)
    }

    /// Returns `min(length, size - offset)` bytes; empty past the end.
    /// Charges the bytes to the owning node.
    pub fn read_at(&self, id: &ObjectId, offset: u64, length: u64) -> Result<Vec<u8>> {
        let node = self.node(id);
        let _guard = InFlight::enter(node);
        let data = self.get(id)?;
        let out = data.as_slice().read_at(offset, length)?;
        self.log(id, AccessKind::Read, offset, length);
        node.ledger.add(&NodeUsage {
            bytes_read_local: out.len() as u64,
            reads: 1,
            ..NodeUsage::default()
        });
        Ok(out)
    }

    pub fn register_class_method(&self, method: Arc<dyn ObjectClassMethod>) -> Result<()> {
        let mut methods = self.methods.write();
        let name = method.name().to_string();
        if methods.contains_key(&name) {
            return Err(Error::Conflict(format!("class method '{name}' already registered")));
        }
        methods.insert(name, method);
        Ok(())
    }

    pub fn has_class_method(&self, name: &str) -> bool {
        self.methods.read().contains_key(name)
    }

    /// Runs `method_name` on the node owning `id`. Returns the handler's
    /// result bytes and the usage charged to that node for this call.
    pub fn exec_class_method(&self, id: &ObjectId, method_name: &str, arg: &[u8]) -> Result<(Vec<u8>, NodeUsage)> {
        let method = self
            .methods
            .read()
            .get(method_name)
            .cloned()
            .ok_or_else(|| Error::UnknownMethod(method_name.to_string()))?;
        let node_id = self.node_of(id);
        let node = &self.nodes[node_id.0];
        let _guard = InFlight::enter(node);
        let data = self.get(id)?;
        let handle = ObjectHandle {
            id: id.clone(),
            node: node_id,
            data,
            cpu_ticks: AtomicU64::new(0),
            decode_filter_ticks: AtomicU64::new(0),
            bytes_read: AtomicU64::new(0),
            reads: AtomicU64::new(0),
            ranges: Mutex::new(Vec::new()),
        };
        self.log(id, AccessKind::Exec, 0, arg.len() as u64);
        let result = method.call(&handle, arg);
        for (offset, length) in handle.ranges.lock().drain(..) {
            self.log(id, AccessKind::HandlerRead, offset, length);
        }
        let mut usage = handle.usage();
        let out = match result {
            Ok(bytes) => {
                usage.bytes_returned = bytes.len() as u64;
                Ok(bytes)
            }
            Err(e) => Err(Error::Handler {
                node: node_id,
                source: Box::new(e),
            }),
        };
        node.ledger.add(&usage);
        out.map(|bytes| (bytes, usage))
    }

    /// Starts (or restarts) recording every object access.
    pub fn start_access_log(&self) {
        *self.access_log.lock() = Some(Vec::new());
    }

    /// Stops recording and returns what was logged since the last start.
    pub fn take_access_log(&self) -> Vec<AccessRecord> {
        self.access_log.lock().take().unwrap_or_default()
    }

    fn log(&self, id: &ObjectId, kind: AccessKind, offset: u64, length: u64) {
        if let Some(log) = self.access_log.lock().as_mut() {
            log.push(AccessRecord {
                object: id.clone(),
                kind,
                offset,
                length,
            });
        }
    }

    /// Cumulative usage of `node` since pool creation.
    pub fn usage(&self, node: NodeId) -> NodeUsage {
        self.nodes[node.0].ledger.snapshot()
    }

    /// Highest number of concurrent reads/execs ever observed on `node`.
    pub fn peak_in_flight(&self, node: NodeId) -> usize {
        self.nodes[node.0].peak_in_flight.load(Ordering::SeqCst)
    }

    pub fn reset_peaks(&self) {
        for n in &self.nodes {
            n.peak_in_flight.store(0, Ordering::SeqCst);
        }
    }

    pub fn object_count(&self, node: NodeId) -> usize {
        self.nodes[node.0].objects.read().len()
    }

    /// Every stored object id, sorted.
    pub fn object_ids(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self
            .nodes
            .iter()
            .flat_map(|n| n.objects.read().keys().cloned().collect::<Vec<_>>())
            .collect();
        ids.sort();
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ObjectId {
        ObjectId::new(s).unwrap()
    }

    struct SizeOf;

    impl ObjectClassMethod for SizeOf {
        fn name(&self) -> &str {
            "size_of"
        }

        fn call(&self, object: &ObjectHandle, _arg: &[u8]) -> Result<Vec<u8>> {
            object.charge_cpu(7);
            Ok(object.size()?.to_le_bytes().to_vec())
        }
    }

    struct Fails;

    impl ObjectClassMethod for Fails {
        fn name(&self) -> &str {
            "fails"
        }

        fn call(&self, _object: &ObjectHandle, _arg: &[u8]) -> Result<Vec<u8>> {
            Err(Error::corrupt("boom"))
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(matches!(Pool::create(0, 1), Err(Error::Validation(_))));
        for n in [4, 8, 16] {
            assert_eq!(Pool::create(n, 1).unwrap().node_count(), n);
        }
    }

    #[test]
    fn placement_is_total_and_deterministic() {
        let pool = Pool::create(8, 42).unwrap();
        for i in 0..1000 {
            let oid = id(&format!("obj-{i}"));
            let n = pool.node_of(&oid);
            assert!(n.0 < 8);
            assert_eq!(n, placement(&oid, 8, 42));
        }
    }

    #[test]
    fn put_stat_overwrite_delete() {
        let pool = Pool::create(4, 0).unwrap();
        let a = id("a");
        pool.put(&a, vec![1, 2, 3]).unwrap();
        assert_eq!(pool.stat(&a).unwrap(), 3);
        pool.put(&a, vec![9; 10]).unwrap();
        assert_eq!(pool.stat(&a).unwrap(), 10);
        pool.delete(&a).unwrap();
        assert!(matches!(pool.read_at(&a, 0, 1), Err(Error::NotFound(_))));
        assert!(matches!(pool.delete(&a), Err(Error::NotFound(_))));
    }

    #[test]
    fn ranged_reads() {
        let pool = Pool::create(2, 0).unwrap();
        let a = id("a");
        let data: Vec<u8> = (0..100).collect();
        pool.put(&a, data.clone()).unwrap();
        assert_eq!(pool.read_at(&a, 0, 100).unwrap(), data);
        assert!(pool.read_at(&a, 100, 10).unwrap().is_empty());
        assert!(pool.read_at(&a, 500, 10).unwrap().is_empty());
        let mut joined = pool.read_at(&a, 0, 37).unwrap();
        joined.extend(pool.read_at(&a, 37, 1000).unwrap());
        assert_eq!(joined, data);
        let node = pool.node_of(&a);
        assert_eq!(pool.usage(node).bytes_read_local, 100 + 100);
    }

    #[test]
    fn class_method_registry() {
        let pool = Pool::create(4, 3).unwrap();
        let a = id("a");
        pool.put(&a, vec![0; 33]).unwrap();
        assert!(matches!(pool.exec_class_method(&a, "size_of", &[]), Err(Error::UnknownMethod(_))));
        pool.register_class_method(Arc::new(SizeOf)).unwrap();
        assert!(matches!(pool.register_class_method(Arc::new(SizeOf)), Err(Error::Conflict(_))));

        let (out, usage) = pool.exec_class_method(&a, "size_of", &[]).unwrap();
        assert_eq!(u64::from_le_bytes(out.try_into().unwrap()), 33);
        assert_eq!(usage.cpu_ticks, 7);
        let owner = pool.node_of(&a);
        for n in 0..4 {
            let u = pool.usage(NodeId(n));
            if NodeId(n) == owner {
                assert_eq!((u.cpu_ticks, u.execs, u.bytes_returned), (7, 1, 8));
            } else {
                assert_eq!(u, NodeUsage::default());
            }
        }
        assert!(matches!(pool.exec_class_method(&id("missing"), "size_of", &[]), Err(Error::NotFound(_))));
    }

    #[test]
    fn handler_errors_carry_node() {
        let pool = Pool::create(4, 3).unwrap();
        let a = id("a");
        pool.put(&a, vec![]).unwrap();
        pool.register_class_method(Arc::new(Fails)).unwrap();
        match pool.exec_class_method(&a, "fails", &[]) {
            Err(Error::Handler { node, .. }) => assert_eq!(node, pool.node_of(&a)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
