//! Unidirectional transforms: per-node local matrices executed in schedule
//! order, reverse step-by-step decoding, global matrix assembly, and the
//! invertibility / critical-sampling checks.
//!
//! Node `n` holds the coefficient block `{n} ∪ D_n`. At its slot it replaces
//! that block with `A_n · [y(n); y(D_n)] + Σ_i B_n^i · y_{B_n(i)}`, where each
//! `y_{B_n(i)}` is the broadcast source's block exactly as transmitted (the
//! timing constraints guarantee no ancestor has touched it yet). Decoding
//! walks the slots in reverse, inverting one local operation at a time.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduling::{CausalSets, Schedule};
use crate::topology::{Network, NodeId};

/// Role of a node's final coefficient, used for payload accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffClass {
    /// Unprocessed measurement; always costs the full raw bit budget.
    Raw,
    /// Low-pass coefficient at the given decomposition level; transmitted at
    /// raw precision.
    Smooth(u8),
    /// High-pass coefficient at the given level; entropy coded.
    Detail(u8),
}

impl CoeffClass {
    pub fn is_detail(self) -> bool {
        matches!(self, CoeffClass::Detail(_))
    }
}

/// One epoch's transform output: one coefficient per node plus its class.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub values: Vec<f64>,
    pub classes: Vec<CoeffClass>,
}

impl CoefficientSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The matrix operation a single node applies at its transmission slot.
#[derive(Debug, Clone)]
pub struct LocalTransform {
    pub node: NodeId,
    /// `A_n`, square of size `1 + |D_n|`.
    pub matrix: DMatrix<f64>,
    /// `(source, B_n^i)` pairs over the pruned causal sources, ascending slot;
    /// each matrix is `(1+|D_n|) x (1+|D_source|)`.
    pub broadcast: Vec<(NodeId, DMatrix<f64>)>,
}

impl LocalTransform {
    /// Identity operation for a node with the given block size.
    pub fn identity(node: NodeId, block_len: usize) -> LocalTransform {
        LocalTransform {
            node,
            matrix: DMatrix::identity(block_len, block_len),
            broadcast: Vec::new(),
        }
    }
}

/// Invertibility verdict: every local `A_n` must be comfortably nonsingular.
/// Broadcast matrices never enter the verdict.
#[derive(Debug, Clone)]
pub struct InvertibilityReport {
    pub ok: bool,
    /// `|det A_n|` per node.
    pub dets: Vec<(NodeId, f64)>,
    pub offending: Vec<NodeId>,
    pub threshold: f64,
}

/// A complete unidirectional transform: one local operation per node, tied to
/// the network, schedule, and pruned causal sets it was built against.
#[derive(Debug, Clone)]
pub struct UnidirectionalTransform {
    network: Network,
    schedule: Schedule,
    causal: CausalSets,
    locals: Vec<LocalTransform>,
    classes: Vec<CoeffClass>,
    /// Hops over which a node's stream travels as raw data before its
    /// coefficient exists (0 = coefficient computed at the node itself).
    raw_hops: Vec<u32>,
}

impl UnidirectionalTransform {
    pub fn new(
        network: Network,
        schedule: Schedule,
        causal: CausalSets,
        locals: Vec<LocalTransform>,
        classes: Vec<CoeffClass>,
        raw_hops: Vec<u32>,
    ) -> Result<UnidirectionalTransform> {
        let t = UnidirectionalTransform {
            network,
            schedule,
            causal,
            locals,
            classes,
            raw_hops,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.network.len();
        if self.locals.len() != n {
            return Err(Error::Validation(format!(
                "{} local transforms for {} nodes",
                self.locals.len(),
                n
            )));
        }
        if self.classes.len() != n || self.raw_hops.len() != n {
            return Err(Error::Validation(
                "annotation vectors must cover every node".into(),
            ));
        }
        for (i, local) in self.locals.iter().enumerate() {
            let node = NodeId(i + 1);
            if local.node != node {
                return Err(Error::Validation(format!(
                    "local transform at position {i} belongs to node {}",
                    local.node
                )));
            }
            let blen = self.network.block_len(node);
            if local.matrix.nrows() != blen || local.matrix.ncols() != blen {
                return Err(Error::Validation(format!(
                    "node {node}: matrix is {}x{}, block needs {blen}x{blen}",
                    local.matrix.nrows(),
                    local.matrix.ncols()
                )));
            }
            if local.matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "node {node}: non-finite matrix entry"
                )));
            }
            let sources: Vec<NodeId> = local.broadcast.iter().map(|(s, _)| *s).collect();
            if sources != self.causal.causal(node) {
                return Err(Error::Validation(format!(
                    "node {node}: broadcast sources {sources:?} do not match the pruned causal set"
                )));
            }
            for (src, mat) in &local.broadcast {
                let want_cols = self.network.block_len(*src);
                if mat.nrows() != blen || mat.ncols() != want_cols {
                    return Err(Error::Validation(format!(
                        "node {node}: broadcast matrix for {src} is {}x{}, needs {blen}x{want_cols}",
                        mat.nrows(),
                        mat.ncols()
                    )));
                }
                if mat.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Validation(format!(
                        "node {node}: non-finite broadcast entry for source {src}"
                    )));
                }
            }
            if self.raw_hops[i] > self.network.depth(node) {
                return Err(Error::Validation(format!(
                    "node {node}: raw forwarding over {} hops exceeds depth {}",
                    self.raw_hops[i],
                    self.network.depth(node)
                )));
            }
        }
        Ok(())
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn causal_sets(&self) -> &CausalSets {
        &self.causal
    }

    pub fn local(&self, n: NodeId) -> &LocalTransform {
        &self.locals[n.index()]
    }

    pub fn locals(&self) -> &[LocalTransform] {
        &self.locals
    }

    pub fn class(&self, n: NodeId) -> CoeffClass {
        self.classes[n.index()]
    }

    pub fn classes(&self) -> &[CoeffClass] {
        &self.classes
    }

    pub fn raw_hops(&self, n: NodeId) -> u32 {
        self.raw_hops[n.index()]
    }

    /// What the node's own first transmission carries: its coefficient when
    /// computed locally, raw data otherwise.
    pub fn emits(&self, n: NodeId) -> CoeffClass {
        if self.raw_hops[n.index()] == 0 {
            self.classes[n.index()]
        } else {
            CoeffClass::Raw
        }
    }

    /// True when the listener's local operation actually reads data from the
    /// broadcast source (a structurally zero matrix consumes nothing).
    pub fn consumes_broadcast(&self, listener: NodeId, source: NodeId) -> bool {
        self.locals[listener.index()]
            .broadcast
            .iter()
            .any(|(s, m)| *s == source && m.iter().any(|v| *v != 0.0))
    }

    /// Run the forward transform on one epoch of measurements.
    pub fn encode_epoch(&self, x: &[f64]) -> Result<CoefficientSet> {
        let states = self.encode_states(x)?;
        Ok(CoefficientSet {
            values: states.into_iter().last().unwrap(),
            classes: self.classes.clone(),
        })
    }

    /// Forward transform, returning the full coefficient vector after every
    /// slot (index 0 is the untouched input). Useful for tracing which
    /// entries each slot rewrites.
    pub fn encode_states(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.network.len();
        if x.len() != n {
            return Err(Error::Validation(format!(
                "epoch has {} samples for {} nodes",
                x.len(),
                n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("measurements must be finite".into()));
        }

        // Snapshot the as-transmitted block of every node that later feeds a
        // broadcast matrix.
        let mut needs_snapshot = vec![false; n];
        for local in &self.locals {
            for (src, _) in &local.broadcast {
                needs_snapshot[src.index()] = true;
            }
        }

        let mut y = x.to_vec();
        let mut snapshots: Vec<Option<DVector<f64>>> = vec![None; n];
        let mut states = Vec::with_capacity(n + 1);
        states.push(y.clone());

        for &node in self.schedule.order() {
            let local = &self.locals[node.index()];
            let b0 = node.index();
            let blen = self.network.block_len(node);
            let block = DVector::from_column_slice(&y[b0..b0 + blen]);
            let mut out = &local.matrix * block;
            for (src, mat) in &local.broadcast {
                let snap = snapshots[src.index()].as_ref().ok_or_else(|| {
                    Error::Validation(format!(
                        "broadcast source {src} transmits after listener {node}"
                    ))
                })?;
                out += mat * snap;
            }
            if needs_snapshot[node.index()] {
                snapshots[node.index()] = Some(out.clone());
            }
            y[b0..b0 + blen].copy_from_slice(out.as_slice());
            states.push(y.clone());
        }
        Ok(states)
    }

    /// Invert the transform by undoing each local operation in reverse slot
    /// order. By the pruning constraints, every broadcast source block is
    /// back in its as-transmitted state when it is needed.
    pub fn decode_epoch(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        let n = self.network.len();
        if coefficients.len() != n {
            return Err(Error::Validation(format!(
                "{} coefficients for {} nodes",
                coefficients.len(),
                n
            )));
        }
        let mut y = coefficients.to_vec();
        for &node in self.schedule.order().iter().rev() {
            let local = &self.locals[node.index()];
            let b0 = node.index();
            let blen = self.network.block_len(node);
            let mut rhs = DVector::from_column_slice(&y[b0..b0 + blen]);
            for (src, mat) in &local.broadcast {
                let s0 = src.index();
                let slen = self.network.block_len(*src);
                let sblock = DVector::from_column_slice(&y[s0..s0 + slen]);
                rhs -= mat * sblock;
            }
            let lu = local.matrix.clone().lu();
            let det: f64 = lu.determinant();
            if det.abs() <= singularity_threshold(blen) {
                return Err(Error::Singular {
                    node,
                    det: det.abs(),
                });
            }
            let solved = lu.solve(&rhs).ok_or(Error::Singular {
                node,
                det: det.abs(),
            })?;
            y[b0..b0 + blen].copy_from_slice(solved.as_slice());
        }
        Ok(y)
    }

    /// Assemble the global matrix `C_N ··· C_1`, each factor embedding one
    /// local operation at its slot.
    pub fn assemble_global_matrix(&self) -> DMatrix<f64> {
        let n = self.network.len();
        let mut global = DMatrix::identity(n, n);
        for &node in self.schedule.order() {
            global = self.slot_matrix(node) * global;
        }
        global
    }

    /// The global factor `C_{t(n)}` for one node: identity outside the block
    /// rows, `A_n` on the block columns, `B_n^i` on each source's columns.
    pub fn slot_matrix(&self, node: NodeId) -> DMatrix<f64> {
        let n = self.network.len();
        let local = &self.locals[node.index()];
        let b0 = node.index();
        let blen = self.network.block_len(node);
        let mut c = DMatrix::identity(n, n);
        for i in 0..blen {
            for j in 0..blen {
                c[(b0 + i, b0 + j)] = local.matrix[(i, j)];
            }
        }
        for (src, mat) in &local.broadcast {
            let s0 = src.index();
            for i in 0..blen {
                for j in 0..self.network.block_len(*src) {
                    c[(b0 + i, s0 + j)] = mat[(i, j)];
                }
            }
        }
        c
    }

    /// Check `|det A_n|` for every node. Broadcast matrices are irrelevant:
    /// the global factors are block triangular up to the broadcast columns,
    /// which row operations eliminate without changing the determinant.
    pub fn verify_invertibility(&self) -> InvertibilityReport {
        let mut dets = Vec::with_capacity(self.locals.len());
        let mut offending = Vec::new();
        let mut threshold_used: f64 = 0.0;
        for local in &self.locals {
            let det: f64 = local.matrix.clone().lu().determinant();
            let thr = singularity_threshold(local.matrix.nrows());
            threshold_used = threshold_used.max(thr);
            dets.push((local.node, det.abs()));
            if det.abs() <= thr {
                offending.push(local.node);
            }
        }
        InvertibilityReport {
            ok: offending.is_empty(),
            dets,
            offending,
            threshold: threshold_used,
        }
    }

    /// Critical sampling: one local operation per node, each emitting exactly
    /// `1 + |D_n|` values, with the sink's child blocks partitioning the node
    /// set so each coefficient reaches the sink exactly once.
    pub fn verify_critical_sampling(&self) -> bool {
        verify_critical_sampling(&self.network, &self.locals)
    }

    pub fn to_json(&self) -> TransformJson {
        TransformJson {
            locals: self
                .locals
                .iter()
                .map(|l| LocalJson {
                    node: l.node,
                    a: matrix_rows(&l.matrix),
                    b: l.broadcast
                        .iter()
                        .map(|(src, m)| BroadcastJson {
                            src: *src,
                            mat: matrix_rows(m),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuild from the serialized matrix form. Classes default to `Raw` and
    /// raw-forwarding hops to zero; annotations are not part of the wire
    /// format.
    pub fn from_json(
        network: Network,
        schedule: Schedule,
        causal: CausalSets,
        doc: &TransformJson,
    ) -> Result<UnidirectionalTransform> {
        let n = network.len();
        let mut locals = Vec::with_capacity(doc.locals.len());
        for l in &doc.locals {
            locals.push(LocalTransform {
                node: l.node,
                matrix: matrix_from_rows(&l.a)?,
                broadcast: l
                    .b
                    .iter()
                    .map(|b| Ok((b.src, matrix_from_rows(&b.mat)?)))
                    .collect::<Result<Vec<_>>>()?,
            });
        }
        UnidirectionalTransform::new(
            network,
            schedule,
            causal,
            locals,
            vec![CoeffClass::Raw; n],
            vec![0; n],
        )
    }

    pub(crate) fn set_annotations(&mut self, classes: Vec<CoeffClass>, raw_hops: Vec<u32>) {
        self.classes = classes;
        self.raw_hops = raw_hops;
    }
}

/// |det| below this counts as singular.
pub fn singularity_threshold(dim: usize) -> f64 {
    1e-12 * dim as f64
}

/// Free-standing critical sampling check so partial local sets can be probed.
pub fn verify_critical_sampling(network: &Network, locals: &[LocalTransform]) -> bool {
    let n = network.len();
    if locals.len() != n {
        return false;
    }
    for (i, local) in locals.iter().enumerate() {
        let node = NodeId(i + 1);
        if local.node != node {
            return false;
        }
        let blen = network.block_len(node);
        if local.matrix.nrows() != blen || local.matrix.ncols() != blen {
            return false;
        }
    }
    // Blocks of the sink's children must tile 1..=N exactly once.
    let mut covered = vec![false; n];
    for &r in network.children(network.sink()) {
        for m in std::iter::once(r).chain(network.descendants(r)) {
            if covered[m.index()] {
                return false;
            }
            covered[m.index()] = true;
        }
    }
    covered.into_iter().all(|c| c)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Validation("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Serialized transform: per-node `A_n` plus `(source, matrix)` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformJson {
    pub locals: Vec<LocalJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalJson {
    pub node: NodeId,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<BroadcastJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BroadcastJson {
    pub src: NodeId,
    pub mat: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduling::{derive_causal_sets, prune_for_decodability};
    use crate::topology::{Point, RadioModel};
    use crate::zoo;

    fn five_node_fixture() -> (Network, Schedule) {
        let positions = vec![
            Point::new(10.0, 0.0),
            Point::new(20.0, 10.0),
            Point::new(30.0, 10.0),
            Point::new(20.0, -10.0),
            Point::new(30.0, -10.0),
        ];
        let parents = vec![NodeId(6), NodeId(1), NodeId(2), NodeId(1), NodeId(4)];
        let net = Network::from_preordered_with_links(
            positions,
            Point::new(0.0, 0.0),
            parents,
            RadioModel::VariableRange,
            vec![(NodeId(3), NodeId(4)), (NodeId(4), NodeId(2))],
        )
        .unwrap();
        let schedule = Schedule::from_slots(&net, vec![5, 4, 1, 3, 2]).unwrap();
        (net, schedule)
    }

    /// The worked five-node transform: node 4 mixes in node 3's broadcast,
    /// node 2 mixes in node 4's block, node 1 applies `A_1`.
    fn five_node_transform(a1: DMatrix<f64>) -> UnidirectionalTransform {
        let (net, schedule) = five_node_fixture();
        let causal = prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
        assert_eq!(causal.causal(NodeId(4)), &[NodeId(3)]);
        assert_eq!(causal.causal(NodeId(2)), &[NodeId(4)]);

        let a = [0.7, -0.3, 0.4, 1.1]; // node 4
        let b = [0.5, -0.2];
        let ap = [1.3, 0.6, -0.8, 0.9]; // node 2
        let bp = [0.25, -0.75, 0.35, 0.15];
        let locals = vec![
            LocalTransform {
                node: NodeId(1),
                matrix: a1,
                broadcast: vec![],
            },
            LocalTransform {
                node: NodeId(2),
                matrix: DMatrix::from_row_slice(2, 2, &ap),
                broadcast: vec![(NodeId(4), DMatrix::from_row_slice(2, 2, &bp))],
            },
            LocalTransform::identity(NodeId(3), 1),
            LocalTransform {
                node: NodeId(4),
                matrix: DMatrix::from_row_slice(2, 2, &a),
                broadcast: vec![(NodeId(3), DMatrix::from_row_slice(2, 1, &b))],
            },
            LocalTransform::identity(NodeId(5), 1),
        ];
        UnidirectionalTransform::new(
            net,
            schedule,
            causal,
            locals,
            vec![CoeffClass::Raw; 5],
            vec![0; 5],
        )
        .unwrap()
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let net = Network::generate(12, 600.0, RadioModel::VariableRange, 1).unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let x: Vec<f64> = (0..12).map(|i| i as f64 - 3.5).collect();
        let y = t.encode_epoch(&x).unwrap();
        assert_eq!(y.values, x);
        let back = t.decode_epoch(&y.values).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn five_node_example_matches_hand_product() {
        let t = five_node_transform(DMatrix::identity(5, 5));
        // Hand-built global factors per the worked example: node 4's factor
        // puts its broadcast matrix on column 3, node 2's on columns 4..5.
        let m4 = DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.5, 0.7, -0.3, //
                0.0, 0.0, -0.2, 0.4, 1.1,
            ],
        );
        let m2 = DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 1.3, 0.6, 0.25, -0.75, //
                0.0, -0.8, 0.9, 0.35, 0.15, //
                0.0, 0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, 1.0,
            ],
        );
        let want = m2.clone() * m4.clone();
        let got = t.assemble_global_matrix();
        assert!((&got - &want).amax() < 1e-14);

        // The zero pattern of the factors themselves matches the embedding.
        assert_eq!(t.slot_matrix(NodeId(4)), m4);
        assert_eq!(t.slot_matrix(NodeId(2)), m2);

        // Encoding agrees with the matrix route.
        let x = vec![2.0, -1.0, 0.5, 3.0, -2.5];
        let y = t.encode_epoch(&x).unwrap();
        let via_matrix = &got * DVector::from_column_slice(&x);
        for i in 0..5 {
            assert!((y.values[i] - via_matrix[i]).abs() < 1e-12);
        }
        let back = t.decode_epoch(&y.values).unwrap();
        for i in 0..5 {
            assert!((back[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_matches_global_matrix_on_random_networks() {
        for seed in 0..8 {
            let net = Network::generate_connected(
                12,
                600.0,
                RadioModel::FixedRange { radius: 250.0 },
                seed,
            )
            .unwrap();
            let schedule = Schedule::assign(&net);
            let causal =
                prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
            let t = zoo::build_random(net, schedule, causal, seed ^ 0xbeef).unwrap();
            let g = t.assemble_global_matrix();
            let mut rng_x = 0u64;
            for _ in 0..5 {
                rng_x = rng_x
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let x: Vec<f64> = (0..12)
                    .map(|i| ((rng_x >> (i % 32)) & 0xffff) as f64 / 4096.0 - 8.0)
                    .collect();
                let y = t.encode_epoch(&x).unwrap();
                let want = &g * DVector::from_column_slice(&x);
                let scale = want.amax().max(1.0);
                for i in 0..12 {
                    assert!(
                        (y.values[i] - want[i]).abs() <= 1e-12 * scale,
                        "seed {seed}: entry {i}: {} vs {}",
                        y.values[i],
                        want[i]
                    );
                }
            }
        }
    }

    #[test]
    fn roundtrip_on_random_networks() {
        let mut worst: f64 = 0.0;
        for seed in 0..20u64 {
            let net = Network::generate_connected(
                50,
                600.0,
                RadioModel::FixedRange { radius: 160.0 },
                seed,
            )
            .unwrap();
            let schedule = Schedule::assign(&net);
            let causal =
                prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
            let t = zoo::build_random(net, schedule, causal, seed ^ 0x5eed).unwrap();
            let mut state = seed.wrapping_add(17);
            for _ in 0..50 {
                let x: Vec<f64> = (0..50)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                        (state >> 11) as f64 / (1u64 << 53) as f64 * 40.0 - 20.0
                    })
                    .collect();
                let y = t.encode_epoch(&x).unwrap();
                let back = t.decode_epoch(&y.values).unwrap();
                let xmax = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for i in 0..50 {
                    worst = worst.max((back[i] - x[i]).abs() / xmax.max(1e-300));
                }
            }
        }
        assert!(worst < 1e-9, "worst relative roundtrip error {worst}");
    }

    #[test]
    fn determinant_multiplicativity_without_broadcast() {
        let net = Network::generate(10, 600.0, RadioModel::VariableRange, 4).unwrap();
        let schedule = Schedule::assign(&net);
        let causal = CausalSets::empty(&net);
        let t = zoo::build_random(net, schedule, causal, 99).unwrap();
        let global_det = t.assemble_global_matrix().determinant();
        let product: f64 = t
            .locals()
            .iter()
            .map(|l| l.matrix.clone().lu().determinant())
            .product();
        assert!(
            (global_det - product).abs() <= 1e-6 * product.abs().max(1e-12),
            "{global_det} vs {product}"
        );
    }

    #[test]
    fn invertibility_flags_zero_row() {
        let (net, schedule) = five_node_fixture();
        let causal = CausalSets::empty(&net);
        let mut a1 = DMatrix::identity(5, 5);
        for j in 0..5 {
            a1[(2, j)] = 0.0;
        }
        let locals = vec![
            LocalTransform {
                node: NodeId(1),
                matrix: a1,
                broadcast: vec![],
            },
            LocalTransform::identity(NodeId(2), 2),
            LocalTransform::identity(NodeId(3), 1),
            LocalTransform::identity(NodeId(4), 2),
            LocalTransform::identity(NodeId(5), 1),
        ];
        let t = UnidirectionalTransform::new(
            net,
            schedule,
            causal,
            locals,
            vec![CoeffClass::Raw; 5],
            vec![0; 5],
        )
        .unwrap();
        let report = t.verify_invertibility();
        assert!(!report.ok);
        assert_eq!(report.offending, vec![NodeId(1)]);
        assert!(matches!(
            t.decode_epoch(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(Error::Singular {
                node: NodeId(1),
                ..
            })
        ));
    }

    #[test]
    fn invertibility_verdict_matches_global_rank() {
        for seed in 0..10u64 {
            let net = Network::generate_connected(
                10,
                600.0,
                RadioModel::FixedRange { radius: 260.0 },
                seed,
            )
            .unwrap();
            let schedule = Schedule::assign(&net);
            let causal =
                prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
            let mut t = zoo::build_random(net, schedule, causal, seed).unwrap();
            if seed % 2 == 0 {
                // Break one local matrix.
                let node = NodeId(1 + (seed as usize % 10));
                let blen = t.network().block_len(node);
                t.locals[node.index()].matrix = DMatrix::zeros(blen, blen);
            }
            let report = t.verify_invertibility();
            let g = t.assemble_global_matrix();
            let svd = g.svd(false, false);
            let full_rank = svd.rank(1e-9) == t.network().len();
            assert_eq!(report.ok, full_rank, "seed {seed}");
        }
    }

    #[test]
    fn critical_sampling_checks_structure() {
        let net = Network::generate(15, 600.0, RadioModel::VariableRange, 2).unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        assert!(t.verify_critical_sampling());
        // Dropping any local breaks it.
        let partial: Vec<LocalTransform> = t.locals()[..14].to_vec();
        assert!(!verify_critical_sampling(t.network(), &partial));
    }

    #[test]
    fn encode_touches_only_the_active_block() {
        let net =
            Network::generate_connected(20, 600.0, RadioModel::FixedRange { radius: 200.0 }, 6)
                .unwrap();
        let schedule = Schedule::assign(&net);
        let causal = prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
        let t = zoo::build_random(net, schedule, causal, 7).unwrap();
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let states = t.encode_states(&x).unwrap();
        for (k, node) in t.schedule().order().iter().enumerate() {
            let before = &states[k];
            let after = &states[k + 1];
            let b0 = node.index();
            let blen = t.network().block_len(*node);
            for i in 0..20 {
                if i < b0 || i >= b0 + blen {
                    assert_eq!(before[i], after[i], "slot {k} leaked outside its block");
                }
            }
        }
    }

    #[test]
    fn transform_json_round_trip() {
        let t = five_node_transform(DMatrix::identity(5, 5));
        let doc = t.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: TransformJson = serde_json::from_str(&text).unwrap();
        let t2 = UnidirectionalTransform::from_json(
            t.network().clone(),
            t.schedule().clone(),
            t.causal_sets().clone(),
            &parsed,
        )
        .unwrap();
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(
            t.encode_epoch(&x).unwrap().values,
            t2.encode_epoch(&x).unwrap().values
        );
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (net, schedule) = five_node_fixture();
        let causal = CausalSets::empty(&net);
        let locals = vec![
            LocalTransform::identity(NodeId(1), 4), // wrong: needs 5
            LocalTransform::identity(NodeId(2), 2),
            LocalTransform::identity(NodeId(3), 1),
            LocalTransform::identity(NodeId(4), 2),
            LocalTransform::identity(NodeId(5), 1),
        ];
        assert!(UnidirectionalTransform::new(
            net,
            schedule,
            causal,
            locals,
            vec![CoeffClass::Raw; 5],
            vec![0; 5],
        )
        .is_err());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let net = Network::generate(4, 600.0, RadioModel::VariableRange, 0).unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let err = t.encode_epoch(&[1.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
