//! Network topology: node placement, shortest-path routing tree, broadcast
//! links, and tree queries under pre-order numbering.
//!
//! Sensor nodes are indexed `1..=N`; the sink is `N+1`. After pre-order
//! renumbering the descendants of node `n` occupy the contiguous index block
//! `{n+1, ..., n+|D_n|}`, which the transform machinery relies on throughout.

use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based node index. The sink is `N+1` and never carries data of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    /// Zero-based position in per-node vectors.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Radio range assignment.
///
/// `VariableRange` gives each node exactly the range needed to reach its SPT
/// parent. `FixedRange` gives every node the same radius; it also constrains
/// which links the SPT may use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadioModel {
    VariableRange,
    FixedRange { radius: f64 },
}

impl RadioModel {
    pub fn validate(&self) -> Result<()> {
        if let RadioModel::FixedRange { radius } = self {
            if !(*radius > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "fixed radio radius must be positive, got {radius}"
                )));
            }
        }
        Ok(())
    }
}

/// Draw `count` node positions uniformly in `[0, extent]^2`, deterministic
/// per seed. The sink is placed separately (grid center) by the network
/// builders.
pub fn place_nodes(count: usize, extent: f64, rng_seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "node count must be at least 1".into(),
        ));
    }
    if !(extent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "extent must be positive, got {extent}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok((0..count)
        .map(|_| Point::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect())
}

/// Heap entry ordered so the smallest (distance, node) pair pops first.
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Build the shortest-path tree toward the sink over the connectivity graph
/// admitted by `link_predicate`.
///
/// Edge weight is squared Euclidean distance, the transmit-energy proxy of
/// the radio model. Plain Euclidean weights on a complete graph degenerate
/// into a single-hop star (the triangle inequality always favors the direct
/// edge), so squared distance is what yields the multihop trees the rest of
/// the pipeline expects. Equal-cost ties pick the smaller predecessor index.
///
/// `positions` holds the sensor nodes `1..=N`; `sink` is their common
/// destination. Returns the parent of each node (the sink is `N+1`).
pub fn build_spt<F>(positions: &[Point], sink: &Point, link_predicate: F) -> Result<Vec<NodeId>>
where
    F: Fn(&Point, &Point) -> bool,
{
    let n = positions.len();
    let sink_idx = n; // internal 0-based: nodes 0..n-1, sink at n
    let pt = |i: usize| if i == sink_idx { sink } else { &positions[i] };

    let mut dist = vec![f64::INFINITY; n + 1];
    let mut parent = vec![usize::MAX; n + 1];
    let mut done = vec![false; n + 1];
    dist[sink_idx] = 0.0;

    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        dist: 0.0,
        node: sink_idx,
    });

    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        for v in 0..n {
            if v == u || done[v] {
                continue;
            }
            if !link_predicate(pt(u), pt(v)) {
                continue;
            }
            let step = pt(u).dist(pt(v));
            let nd = d + step * step;
            if nd < dist[v] || (nd == dist[v] && u < parent[v]) {
                let improved = nd < dist[v];
                dist[v] = nd;
                parent[v] = u;
                if improved {
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
    }

    if let Some(i) = (0..n).find(|&i| !done[i]) {
        return Err(Error::Disconnected {
            node: NodeId(i + 1),
        });
    }
    Ok((0..n)
        .map(|i| {
            NodeId(if parent[i] == sink_idx {
                n + 1
            } else {
                parent[i] + 1
            })
        })
        .collect())
}

/// Pre-order renumbering of a routing tree.
///
/// Children are visited in ascending old index; the sink keeps index `N+1`.
/// Returns `(perm, new_parents)` where `perm[old.index()]` is the new id of
/// the old node, and `new_parents` is indexed by the new ids.
pub fn preorder_renumber(parents: &[NodeId]) -> (Vec<NodeId>, Vec<NodeId>) {
    let n = parents.len();
    let sink = n + 1;
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    for (i, p) in parents.iter().enumerate() {
        children[p.0].push(i + 1);
    }
    // Ascending old index per parent; reverse-push for pre-order pop.
    let mut perm = vec![NodeId(0); n];
    let mut stack: Vec<usize> = children[sink].iter().rev().copied().collect();
    let mut next = 1usize;
    while let Some(old) = stack.pop() {
        perm[old - 1] = NodeId(next);
        next += 1;
        for &c in children[old].iter().rev() {
            stack.push(c);
        }
    }
    let mut new_parents = vec![NodeId(0); n];
    for (i, p) in parents.iter().enumerate() {
        let new_id = perm[i];
        let new_parent = if p.0 == sink {
            NodeId(sink)
        } else {
            perm[p.index()]
        };
        new_parents[new_id.index()] = new_parent;
    }
    (perm, new_parents)
}

/// Routing tree plus broadcast links, with all derived tree structure
/// (depths, children, subtree sizes) precomputed under pre-order numbering.
#[derive(Debug, Clone)]
pub struct Network {
    positions: Vec<Point>,
    sink_pos: Point,
    parent: Vec<NodeId>,
    radio: RadioModel,
    /// Directed overheard links `(source m, listener n)` with `n != parent(m)`.
    broadcast: Vec<(NodeId, NodeId)>,
    depth: Vec<u32>,
    children: Vec<Vec<NodeId>>,
    subtree: Vec<usize>, // |D_n|
    sink_children: Vec<NodeId>,
}

impl Network {
    /// Random uniform placement, SPT, pre-order renumbering, and broadcast
    /// link derivation in one step. The sink sits at the grid center.
    pub fn generate(count: usize, extent: f64, radio: RadioModel, seed: u64) -> Result<Network> {
        radio.validate()?;
        let positions = place_nodes(count, extent, seed)?;
        let sink_pos = Point::new(extent / 2.0, extent / 2.0);
        Network::from_positions(positions, sink_pos, radio)
    }

    /// Like [`Network::generate`], but deterministically resamples the
    /// placement when a fixed radio range leaves it disconnected.
    pub fn generate_connected(
        count: usize,
        extent: f64,
        radio: RadioModel,
        seed: u64,
    ) -> Result<Network> {
        let mut last = None;
        for attempt in 0..64u64 {
            match Network::generate(
                count,
                extent,
                radio,
                seed.wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15)),
            ) {
                Ok(net) => return Ok(net),
                Err(e @ Error::Disconnected { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap())
    }

    /// Build the SPT over given positions. Under `FixedRange` only links
    /// within the radius participate; under `VariableRange` the SPT is built
    /// on the complete graph and ranges are derived from the chosen parents.
    pub fn from_positions(
        positions: Vec<Point>,
        sink_pos: Point,
        radio: RadioModel,
    ) -> Result<Network> {
        radio.validate()?;
        let parents = match radio {
            RadioModel::VariableRange => build_spt(&positions, &sink_pos, |_, _| true)?,
            RadioModel::FixedRange { radius } => {
                build_spt(&positions, &sink_pos, |a, b| a.dist(b) <= radius)?
            }
        };
        Network::from_tree(positions, sink_pos, parents, radio)
    }

    /// Renumber an existing tree into pre-order and derive broadcast links
    /// from the radio model.
    pub fn from_tree(
        positions: Vec<Point>,
        sink_pos: Point,
        parents: Vec<NodeId>,
        radio: RadioModel,
    ) -> Result<Network> {
        let (perm, new_parents) = preorder_renumber(&parents);
        let mut new_positions = vec![Point::new(0.0, 0.0); positions.len()];
        for (old_idx, p) in positions.iter().enumerate() {
            new_positions[perm[old_idx].index()] = *p;
        }
        let mut net = Network::assemble(new_positions, sink_pos, new_parents, radio)?;
        net.broadcast = derive_broadcast_links(&net.positions, &net.sink_pos, &net.parent, radio);
        Ok(net)
    }

    /// Fixture constructor: the tree must already be pre-ordered and the
    /// broadcast links are given explicitly.
    pub fn from_preordered_with_links(
        positions: Vec<Point>,
        sink_pos: Point,
        parents: Vec<NodeId>,
        radio: RadioModel,
        broadcast: Vec<(NodeId, NodeId)>,
    ) -> Result<Network> {
        let mut net = Network::assemble(positions, sink_pos, parents, radio)?;
        for &(m, l) in &broadcast {
            net.check_node(m)?;
            net.check_node(l)?;
            if net.parent[m.index()] == l {
                return Err(Error::Topology(format!(
                    "broadcast link {m}->{l} duplicates the tree edge to the parent"
                )));
            }
            if m == l {
                return Err(Error::Topology(format!(
                    "broadcast link {m}->{m} is a self-loop"
                )));
            }
        }
        let mut broadcast = broadcast;
        broadcast.sort();
        broadcast.dedup();
        net.broadcast = broadcast;
        Ok(net)
    }

    fn assemble(
        positions: Vec<Point>,
        sink_pos: Point,
        parent: Vec<NodeId>,
        radio: RadioModel,
    ) -> Result<Network> {
        let n = positions.len();
        if parent.len() != n {
            return Err(Error::Topology(format!(
                "parent map has {} entries for {} nodes",
                parent.len(),
                n
            )));
        }
        let sink = n + 1;
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut sink_children = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            if p.0 == sink {
                sink_children.push(NodeId(i + 1));
            } else if p.0 >= 1 && p.0 <= n {
                children[p.index()].push(NodeId(i + 1));
            } else {
                return Err(Error::Topology(format!(
                    "node {} has invalid parent {}",
                    i + 1,
                    p
                )));
            }
        }

        // Depths via parent chain; detects cycles by bounding the walk.
        let mut depth = vec![0u32; n];
        for i in 0..n {
            let mut steps = 0u32;
            let mut cur = NodeId(i + 1);
            while cur.0 != sink {
                cur = parent[cur.index()];
                steps += 1;
                if steps as usize > n {
                    return Err(Error::Topology(format!(
                        "cycle detected on the parent chain of node {}",
                        i + 1
                    )));
                }
            }
            depth[i] = steps;
        }

        // Pre-order contiguity: |D_n| equals the span of indices that follow n.
        let mut subtree = vec![0usize; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| depth[*b].cmp(&depth[*a]));
        for &i in &order {
            let p = parent[i];
            if p.0 != sink {
                subtree[p.index()] += subtree[i] + 1;
            }
        }
        for i in 0..n {
            for &c in &children[i] {
                if !(c.0 > i + 1 && c.0 + subtree[c.index()] <= i + 1 + subtree[i]) {
                    return Err(Error::Topology(format!(
                        "tree is not pre-order numbered: child {} escapes the block of {}",
                        c,
                        i + 1
                    )));
                }
            }
        }

        Ok(Network {
            positions,
            sink_pos,
            parent,
            radio,
            broadcast: Vec::new(),
            depth,
            children,
            subtree,
            sink_children,
        })
    }

    fn check_node(&self, n: NodeId) -> Result<()> {
        if n.0 < 1 || n.0 > self.len() {
            return Err(Error::InvalidArgument(format!("unknown node {n}")));
        }
        Ok(())
    }

    /// Number of sensor nodes N.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sink(&self) -> NodeId {
        NodeId(self.len() + 1)
    }

    pub fn radio(&self) -> RadioModel {
        self.radio
    }

    pub fn position(&self, n: NodeId) -> Point {
        if n == self.sink() {
            self.sink_pos
        } else {
            self.positions[n.index()]
        }
    }

    pub fn parent(&self, n: NodeId) -> NodeId {
        self.parent[n.index()]
    }

    /// Hop count to the sink; the sink itself has depth 0.
    pub fn depth(&self, n: NodeId) -> u32 {
        if n == self.sink() {
            0
        } else {
            self.depth[n.index()]
        }
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        if n == self.sink() {
            &self.sink_children
        } else {
            &self.children[n.index()]
        }
    }

    /// |D_n|, the number of descendants.
    pub fn descendant_count(&self, n: NodeId) -> usize {
        self.subtree[n.index()]
    }

    /// Size of the coefficient block `{n} ∪ D_n`.
    pub fn block_len(&self, n: NodeId) -> usize {
        1 + self.subtree[n.index()]
    }

    /// Descendants of `n`: the contiguous pre-order block `n+1..=n+|D_n|`.
    pub fn descendants(&self, n: NodeId) -> impl Iterator<Item = NodeId> {
        let start = n.0 + 1;
        let end = n.0 + self.subtree[n.index()];
        (start..=end).map(NodeId)
    }

    /// Ancestors of `n` from parent up to and including the sink.
    pub fn ancestors(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = n;
        while cur != self.sink() {
            cur = self.parent(cur);
            out.push(cur);
        }
        out
    }

    pub fn is_ancestor_of(&self, a: NodeId, n: NodeId) -> bool {
        if a == self.sink() {
            return true;
        }
        // Pre-order: a's block covers n.
        a != n && n.0 > a.0 && n.0 <= a.0 + self.subtree[a.index()]
    }

    /// All tree-query results for one node in a single call.
    pub fn tree_queries(&self, n: NodeId) -> Result<TreeQueries> {
        self.check_node(n)?;
        Ok(TreeQueries {
            descendants: self.descendants(n).collect(),
            ancestors: self.ancestors(n),
            children: self.children(n).to_vec(),
            depth: self.depth(n),
        })
    }

    /// Descendants exactly `k` hops below `n`.
    pub fn children_k(&self, n: NodeId, k: u32) -> Result<Vec<NodeId>> {
        self.check_node(n)?;
        if k == 0 {
            return Ok(vec![n]);
        }
        let dn = self.depth(n);
        Ok(self
            .descendants(n)
            .filter(|&m| self.depth(m) == dn + k)
            .filter(|&m| {
                let mut cur = m;
                for _ in 0..k {
                    cur = self.parent(cur);
                }
                cur == n
            })
            .collect())
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.children[n.index()].is_empty()
    }

    /// Transmission range of `n` under the radio model.
    pub fn range(&self, n: NodeId) -> f64 {
        match self.radio {
            RadioModel::VariableRange => self.position(n).dist(&self.position(self.parent(n))),
            RadioModel::FixedRange { radius } => radius,
        }
    }

    /// Link distance used for transmit-energy purposes.
    pub fn tx_distance(&self, n: NodeId) -> f64 {
        match self.radio {
            RadioModel::VariableRange => self.position(n).dist(&self.position(self.parent(n))),
            RadioModel::FixedRange { radius } => radius,
        }
    }

    pub fn broadcast_links(&self) -> &[(NodeId, NodeId)] {
        &self.broadcast
    }

    /// Listeners that can overhear transmissions from `m`.
    pub fn listeners(&self, m: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.broadcast
            .iter()
            .filter(move |(src, _)| *src == m)
            .map(|(_, l)| *l)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.len()).map(NodeId)
    }

    pub fn to_json(&self) -> NetworkJson {
        NetworkJson {
            positions: self
                .positions
                .iter()
                .chain(std::iter::once(&self.sink_pos))
                .map(|p| [p.x, p.y])
                .collect(),
            sink: self.sink(),
            parent: self.parent.clone(),
            broadcast: self.broadcast.clone(),
            radio: self.radio,
        }
    }

    pub fn from_json(doc: &NetworkJson) -> Result<Network> {
        if doc.positions.len() != doc.parent.len() + 1 {
            return Err(Error::Topology(
                "positions must hold one entry per node plus the sink".into(),
            ));
        }
        let sink_pos = doc
            .positions
            .last()
            .map(|p| Point::new(p[0], p[1]))
            .unwrap();
        let positions = doc.positions[..doc.positions.len() - 1]
            .iter()
            .map(|p| Point::new(p[0], p[1]))
            .collect();
        Network::from_preordered_with_links(
            positions,
            sink_pos,
            doc.parent.clone(),
            doc.radio,
            doc.broadcast.clone(),
        )
    }
}

/// Bundle of per-node tree queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeQueries {
    pub descendants: Vec<NodeId>,
    pub ancestors: Vec<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: u32,
}

/// Serialized fixture form of a network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkJson {
    pub positions: Vec<[f64; 2]>,
    pub sink: NodeId,
    pub parent: Vec<NodeId>,
    pub broadcast: Vec<(NodeId, NodeId)>,
    pub radio: RadioModel,
}

/// Directed broadcast links `(m, listener)`: listener within range of `m`,
/// listener not `m`'s parent. Under `VariableRange` the range of `m` is the
/// distance to its parent.
pub fn derive_broadcast_links(
    positions: &[Point],
    sink_pos: &Point,
    parents: &[NodeId],
    radio: RadioModel,
) -> Vec<(NodeId, NodeId)> {
    let n = positions.len();
    let sink = n + 1;
    let mut links = Vec::new();
    for m in 0..n {
        let range = match radio {
            RadioModel::VariableRange => {
                let p = parents[m];
                let pp = if p.0 == sink {
                    sink_pos
                } else {
                    &positions[p.index()]
                };
                positions[m].dist(pp)
            }
            RadioModel::FixedRange { radius } => radius,
        };
        for l in 0..n {
            if l == m || parents[m] == NodeId(l + 1) {
                continue;
            }
            if positions[m].dist(&positions[l]) <= range {
                links.push((NodeId(m + 1), NodeId(l + 1)));
            }
        }
    }
    links.sort();
    links
}
