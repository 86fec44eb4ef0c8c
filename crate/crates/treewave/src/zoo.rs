//! Concrete unidirectional transform constructions.
//!
//! Everything here reduces to choosing the local matrices: whitening chains
//! (T-KLT), differencing against decoded children or against the parent
//! (T-DPCM), and the lifting wavelets — the 5/3-like design predicting from
//! parent and children, and the Haar-like design that computes details at the
//! odd nodes themselves, optionally folding in overheard broadcast data and
//! re-decomposing children smooths along secondary trees.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lifting::{
    averaging_prediction, build_lifting_level, compose_multilevel, orthogonalizing_update,
    ExtraLevel, LevelPlan, LevelSpec, LiftTerm, ParitySplit, Tap, UpdateDesign,
};
use crate::scheduling::{CausalSets, Schedule};
use crate::topology::{Network, NodeId};
use crate::transform::{CoeffClass, LocalTransform, UnidirectionalTransform};

/// Transform selector used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Identity,
    Tklt,
    TdpcmDecoding,
    TdpcmOnehop,
    Lifting53,
    Haar,
    HaarBroadcast,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Scheme> {
        match s {
            "identity" => Ok(Scheme::Identity),
            "tklt" => Ok(Scheme::Tklt),
            "tdpcm-decoding" => Ok(Scheme::TdpcmDecoding),
            "tdpcm-onehop" => Ok(Scheme::TdpcmOnehop),
            "lifting53" => Ok(Scheme::Lifting53),
            "haar" => Ok(Scheme::Haar),
            "haar-broadcast" => Ok(Scheme::HaarBroadcast),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Identity => "identity",
            Scheme::Tklt => "tklt",
            Scheme::TdpcmDecoding => "tdpcm-decoding",
            Scheme::TdpcmOnehop => "tdpcm-onehop",
            Scheme::Lifting53 => "lifting53",
            Scheme::Haar => "haar",
            Scheme::HaarBroadcast => "haar-broadcast",
        }
    }

    pub fn all() -> &'static [Scheme] {
        &[
            Scheme::Identity,
            Scheme::Tklt,
            Scheme::TdpcmDecoding,
            Scheme::TdpcmOnehop,
            Scheme::Lifting53,
            Scheme::Haar,
            Scheme::HaarBroadcast,
        ]
    }
}

/// Per-edge T-DPCM weights with a uniform default.
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    default: f64,
    overrides: BTreeMap<(NodeId, NodeId), f64>,
}

impl EdgeWeights {
    pub fn uniform(w: f64) -> EdgeWeights {
        EdgeWeights {
            default: w,
            overrides: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, from: NodeId, to: NodeId, w: f64) {
        self.overrides.insert((from, to), w);
    }

    pub fn get(&self, from: NodeId, to: NodeId) -> f64 {
        *self.overrides.get(&(from, to)).unwrap_or(&self.default)
    }
}

impl Default for EdgeWeights {
    fn default() -> Self {
        EdgeWeights::uniform(1.0)
    }
}

/// Depth-parity split (odd depth → odd set).
pub fn split_by_depth_parity(network: &Network) -> ParitySplit {
    ParitySplit::by_depth(network)
}

/// Expose a transform's class annotations as the per-node class map.
pub fn annotate_coefficient_classes(t: &UnidirectionalTransform) -> Vec<CoeffClass> {
    t.classes().to_vec()
}

/// Every node forwards its block untouched.
pub fn build_identity(network: Network, schedule: Schedule) -> Result<UnidirectionalTransform> {
    let n = network.len();
    let causal = CausalSets::empty(&network);
    let locals = network
        .nodes()
        .map(|node| LocalTransform::identity(node, network.block_len(node)))
        .collect();
    UnidirectionalTransform::new(
        network,
        schedule,
        causal,
        locals,
        vec![CoeffClass::Raw; n],
        vec![0; n],
    )
}

/// Random well-conditioned transform over the pruned causal structure:
/// orthogonal local matrices plus dense broadcast matrices on every causal
/// source. Exercises the general transform class in tests and examples.
pub fn build_random(
    network: Network,
    schedule: Schedule,
    causal: CausalSets,
    seed: u64,
) -> Result<UnidirectionalTransform> {
    let n = network.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locals = Vec::with_capacity(n);
    for node in network.nodes() {
        let blen = network.block_len(node);
        let raw = DMatrix::from_fn(blen, blen, |_, _| rng.gen_range(-1.0..1.0));
        let matrix = raw.qr().q(); // orthogonal, |det| = 1
        let broadcast = causal
            .causal(node)
            .iter()
            .map(|&src| {
                let cols = network.block_len(src);
                (
                    src,
                    DMatrix::from_fn(blen, cols, |_, _| rng.gen_range(-0.5..0.5)),
                )
            })
            .collect();
        locals.push(LocalTransform {
            node,
            matrix,
            broadcast,
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

/// Tree-based KLT: each node unwhitens its children's blocks and re-whitens
/// the joint vector against the supplied covariance. `A_n = H_n ·
/// diag(1, G_c1, ..., G_ck)` with `H_n` the whitening transform of the
/// subtree covariance and `G_c = H_c^{-1}`.
pub fn build_tklt(
    network: Network,
    schedule: Schedule,
    covariance: &DMatrix<f64>,
) -> Result<UnidirectionalTransform> {
    let n = network.len();
    if covariance.nrows() != n || covariance.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "covariance is {}x{}, need {n}x{n}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    if (covariance - covariance.transpose()).amax() > 1e-9 * covariance.amax().max(1.0) {
        return Err(Error::InvalidArgument(
            "covariance must be symmetric".into(),
        ));
    }

    // Whitening transform of the subtree covariance of each node.
    let whiten = |node: NodeId| -> Result<DMatrix<f64>> {
        let b0 = node.index();
        let blen = network.block_len(node);
        let sub = covariance.view((b0, b0), (blen, blen)).into_owned();
        let eig = nalgebra::SymmetricEigen::new(sub);
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidArgument(
                "covariance is not positive definite on a subtree block".into(),
            ));
        }
        let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        Ok(scale * eig.eigenvectors.transpose())
    };

    let mut h: Vec<Option<DMatrix<f64>>> = vec![None; n];
    let mut locals: Vec<Option<LocalTransform>> = (0..n).map(|_| None).collect();
    for &node in schedule.order() {
        let blen = network.block_len(node);
        let hn = whiten(node)?;
        // diag(1, G_c1, ..., G_ck): children blocks are contiguous.
        let mut unwhiten = DMatrix::identity(blen, blen);
        for &c in network.children(node) {
            let hc = h[c.index()].as_ref().expect("children precede parents");
            let g = hc
                .clone()
                .try_inverse()
                .ok_or(Error::Singular { node: c, det: 0.0 })?;
            let off = c.0 - node.0;
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    unwhiten[(off + i, off + j)] = g[(i, j)];
                }
            }
        }
        locals[node.index()] = Some(LocalTransform {
            node,
            matrix: &hn * unwhiten,
            broadcast: vec![],
        });
        h[node.index()] = Some(hn);
    }

    let causal = CausalSets::empty(&network);
    UnidirectionalTransform::new(
        network,
        schedule,
        causal,
        locals.into_iter().map(Option::unwrap).collect(),
        vec![CoeffClass::Detail(1); n],
        vec![0; n],
    )
}

/// T-DPCM, decoded-children variant: each node recovers its children's raw
/// values through their inverse transforms and differences itself against
/// their weighted average. Descendant coefficients pass through unchanged, so
/// only leaves stay raw.
pub fn build_tdpcm_decoding(
    network: Network,
    schedule: Schedule,
    weights: &EdgeWeights,
) -> Result<UnidirectionalTransform> {
    let n = network.len();
    // recovery[c] = first row of (A_c)^{-1}: maps c's block back to x(c).
    let mut recovery: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut locals: Vec<Option<LocalTransform>> = (0..n).map(|_| None).collect();

    for &node in schedule.order() {
        let blen = network.block_len(node);
        let mut a = DMatrix::<f64>::identity(blen, blen);
        for &c in network.children(node) {
            let w = weights.get(node, c);
            let off = c.0 - node.0;
            let rec = recovery[c.index()]
                .as_ref()
                .expect("children precede parents");
            for (j, r) in rec.iter().enumerate() {
                a[(0, off + j)] -= w * r;
            }
        }
        // A is identity except row 0, so its inverse just flips the sign of
        // the off-diagonal row-0 entries.
        let mut rec = vec![0.0; blen];
        rec[0] = 1.0;
        for j in 1..blen {
            rec[j] = -a[(0, j)];
        }
        recovery[node.index()] = Some(rec);
        locals[node.index()] = Some(LocalTransform {
            node,
            matrix: a,
            broadcast: vec![],
        });
    }

    let classes = network
        .nodes()
        .map(|node| {
            if network.is_leaf(node) {
                CoeffClass::Raw
            } else {
                CoeffClass::Detail(1)
            }
        })
        .collect();
    let causal = CausalSets::empty(&network);
    UnidirectionalTransform::new(
        network,
        schedule,
        causal,
        locals.into_iter().map(Option::unwrap).collect(),
        classes,
        vec![0; n],
    )
}

/// T-DPCM, one-hop variant: every node forwards raw data one hop; the parent
/// differences each child against its own raw value. `A_n` is the unit
/// lower-triangular `[[1, 0], [-a, I]]` form.
pub fn build_tdpcm_onehop(
    network: Network,
    schedule: Schedule,
    weights: &EdgeWeights,
) -> Result<UnidirectionalTransform> {
    let n = network.len();
    let mut locals = Vec::with_capacity(n);
    for node in network.nodes() {
        let blen = network.block_len(node);
        let mut a = DMatrix::identity(blen, blen);
        for &c in network.children(node) {
            a[(c.0 - node.0, 0)] = -weights.get(c, node);
        }
        locals.push(LocalTransform {
            node,
            matrix: a,
            broadcast: vec![],
        });
    }
    let classes = network
        .nodes()
        .map(|node| {
            if network.parent(node) == network.sink() {
                CoeffClass::Raw
            } else {
                CoeffClass::Detail(1)
            }
        })
        .collect();
    let raw_hops = vec![1; n];
    let causal = CausalSets::empty(&network);
    UnidirectionalTransform::new(network, schedule, causal, locals, classes, raw_hops)
}

fn update_weight(
    design: UpdateDesign,
    predictor_weights: &[f64],
    target_idx: usize,
    updater_count: usize,
) -> f64 {
    match design {
        UpdateDesign::Smoothing => 0.5 / updater_count as f64,
        UpdateDesign::Ortho => orthogonalizing_update(predictor_weights)[target_idx],
    }
}

/// 5/3-like wavelet on the tree: odd nodes are predicted from parent plus
/// children, even nodes updated from the surrounding details. Details of odd
/// nodes are computed at their parents (raw over 1 hop); smooths of even
/// nodes at their grandparents (raw over 2 hops, 1 at depth 2). Depth-1 root
/// nodes predict from children only and take over their children's updates.
pub fn build_53like(
    network: Network,
    schedule: Schedule,
    design: UpdateDesign,
) -> Result<UnidirectionalTransform> {
    let split = ParitySplit::by_depth(&network);
    let n = network.len();
    let mut locals = Vec::with_capacity(n);

    // Averaging predictor weights of odd node j as seen at its computing
    // node: neighbors are the parent (if it carries data) plus children.
    let predictor = |j: NodeId| -> (Vec<NodeId>, Vec<f64>) {
        let mut neighbors: Vec<NodeId> = Vec::new();
        if network.parent(j) != network.sink() {
            neighbors.push(network.parent(j));
        }
        neighbors.extend(network.children(j).iter().copied());
        let w = averaging_prediction(neighbors.len()).unwrap_or_default();
        (neighbors, w)
    };

    for node in network.nodes() {
        let mut spec = LevelSpec::default();
        if split.is_even(node) {
            // Details of odd children, then smooths of even grandchildren.
            for &j in network.children(node) {
                let (neighbors, w) = predictor(j);
                spec.predicts.push(LiftTerm {
                    target: j,
                    taps: neighbors
                        .iter()
                        .zip(&w)
                        .map(|(m, p)| (Tap::Tree(*m), *p))
                        .collect(),
                });
                for &i in network.children(j) {
                    spec.updates
                        .push(update_term(&network, design, i, &predictor));
                }
            }
        } else if network.parent(node) == network.sink() {
            // Root: predict itself from children alone, then update those
            // children (their smooths have nowhere else to be computed).
            if !network.children(node).is_empty() {
                let kids = network.children(node).to_vec();
                let w = averaging_prediction(kids.len())?;
                spec.predicts.push(LiftTerm {
                    target: node,
                    taps: kids
                        .iter()
                        .zip(&w)
                        .map(|(m, p)| (Tap::Tree(*m), *p))
                        .collect(),
                });
                for &c in &kids {
                    spec.updates
                        .push(update_term(&network, design, c, &predictor));
                }
            }
        }
        let (a, bs) = build_lifting_level(&network, node, &split, &[], &spec)?;
        locals.push(LocalTransform {
            node,
            matrix: a,
            broadcast: bs,
        });
    }

    let classes = network
        .nodes()
        .map(|node| {
            if split.is_odd(node) {
                if network.parent(node) == network.sink() && network.is_leaf(node) {
                    CoeffClass::Raw
                } else {
                    CoeffClass::Detail(1)
                }
            } else {
                CoeffClass::Smooth(1)
            }
        })
        .collect();
    let raw_hops = network
        .nodes()
        .map(|node| {
            if split.is_odd(node) {
                u32::from(network.parent(node) != network.sink())
            } else if network.depth(node) == 2 {
                1
            } else {
                2
            }
        })
        .collect();

    let causal = CausalSets::empty(&network);
    let mut t = UnidirectionalTransform::new(
        network,
        schedule,
        causal,
        locals,
        vec![CoeffClass::Raw; n],
        vec![0; n],
    )?;
    t.set_annotations(classes, raw_hops);
    t.validate()?;
    Ok(t)
}

/// Smooth update term for even node `i`: weighted details from its odd
/// neighbors `{parent} ∪ children`, all of which are present in the block of
/// the node computing the update.
fn update_term(
    network: &Network,
    design: UpdateDesign,
    i: NodeId,
    predictor: &impl Fn(NodeId) -> (Vec<NodeId>, Vec<f64>),
) -> LiftTerm {
    let mut updaters: Vec<NodeId> = Vec::new();
    if network.parent(i) != network.sink() {
        updaters.push(network.parent(i));
    }
    updaters.extend(network.children(i).iter().copied());
    let count = updaters.len();
    let taps = updaters
        .into_iter()
        .map(|j| {
            let w = match design {
                UpdateDesign::Smoothing => 0.5 / count as f64,
                UpdateDesign::Ortho => {
                    let (neighbors, pw) = predictor(j);
                    let idx = neighbors
                        .iter()
                        .position(|m| *m == i)
                        .expect("i predicts j");
                    orthogonalizing_update(&pw)[idx]
                }
            };
            (Tap::Tree(j), w)
        })
        .collect();
    LiftTerm { target: i, taps }
}

/// Haar-like wavelet: odd nodes with children compute their own detail and
/// update their children; childless odd nodes fall back to a parent-side
/// difference, or — with `use_broadcast` — predict from overheard even
/// neighbors and so avoid transmitting raw data at all; even nodes forward
/// raw one hop. With `extra_levels > 0`, each odd node further decomposes its
/// children's smooths along a Euclidean minimum spanning tree.
///
/// Broadcast predictors are used only at childless odd nodes: with uniform
/// averaging weights, folding distant overheard neighbors into a node that
/// already has children degrades its prediction, whereas for a childless node
/// the broadcast data is what turns a raw transmission into a detail.
pub fn build_haarlike(
    network: Network,
    schedule: Schedule,
    causal: &CausalSets,
    design: UpdateDesign,
    use_broadcast: bool,
    extra_levels: u8,
) -> Result<UnidirectionalTransform> {
    let split = ParitySplit::by_depth(&network);
    let n = network.len();
    let active_causal = if use_broadcast {
        causal.clone()
    } else {
        CausalSets::empty(&network)
    };

    // Which odd nodes compute their own detail.
    let broadcast_evens = |node: NodeId| -> Vec<NodeId> {
        if !use_broadcast || !network.children(node).is_empty() {
            return Vec::new();
        }
        active_causal
            .causal(node)
            .iter()
            .copied()
            .filter(|&m| split.is_even(m))
            .collect()
    };
    let self_detail: Vec<bool> = network
        .nodes()
        .map(|node| {
            split.is_odd(node)
                && (!network.children(node).is_empty() || !broadcast_evens(node).is_empty())
        })
        .collect();

    let mut locals = Vec::with_capacity(n);
    let mut classes = vec![CoeffClass::Raw; n];
    let mut raw_hops = vec![0u32; n];

    for node in network.nodes() {
        let sources = active_causal.causal(node).to_vec();
        if split.is_odd(node) {
            if self_detail[node.index()] {
                let kids = network.children(node).to_vec();
                let bcast = broadcast_evens(node);
                let total = kids.len() + bcast.len();
                let p = averaging_prediction(total)?;
                let mut taps: Vec<(Tap, f64)> =
                    kids.iter().map(|&c| (Tap::Tree(c), p[0])).collect();
                taps.extend(bcast.iter().map(|&b| {
                    (
                        Tap::Broadcast {
                            source: b,
                            member: b,
                        },
                        p[0],
                    )
                }));
                let first = LevelSpec {
                    predicts: vec![LiftTerm { target: node, taps }],
                    updates: kids
                        .iter()
                        .map(|&c| LiftTerm {
                            target: c,
                            taps: vec![(Tap::Tree(node), update_weight(design, &p, 0, 1))],
                        })
                        .collect(),
                };
                classes[node.index()] = CoeffClass::Detail(1);
                raw_hops[node.index()] = 0;
                for &c in &kids {
                    classes[c.index()] = CoeffClass::Smooth(1);
                    raw_hops[c.index()] = 1;
                }

                // Extra levels decompose the children's smooths along
                // secondary minimum spanning trees.
                let plan = if extra_levels > 0 && kids.len() >= 2 {
                    let (extras, level_classes) =
                        secondary_levels(&network, &kids, design, extra_levels);
                    for (m, class) in level_classes {
                        classes[m.index()] = class;
                    }
                    LevelPlan {
                        first,
                        base: kids.clone(),
                        extras,
                    }
                } else {
                    LevelPlan {
                        first,
                        base: kids.clone(),
                        extras: vec![],
                    }
                };
                locals.push(compose_multilevel(&network, node, &split, &sources, &plan)?);
            } else {
                // Childless without usable broadcast: raw one hop, detail at
                // the parent — unless the parent is the sink.
                if network.parent(node) == network.sink() {
                    classes[node.index()] = CoeffClass::Raw;
                    raw_hops[node.index()] = 0;
                } else {
                    classes[node.index()] = CoeffClass::Detail(1);
                    raw_hops[node.index()] = 1;
                }
                let (a, bs) =
                    build_lifting_level(&network, node, &split, &sources, &LevelSpec::default())?;
                locals.push(LocalTransform {
                    node,
                    matrix: a,
                    broadcast: bs,
                });
            }
        } else {
            // Even node: compute parent-side details for childless odd
            // children that could not predict on their own.
            let targets: Vec<NodeId> = network
                .children(node)
                .iter()
                .copied()
                .filter(|j| !self_detail[j.index()])
                .collect();
            let spec = LevelSpec {
                predicts: targets
                    .iter()
                    .map(|&j| LiftTerm {
                        target: j,
                        taps: vec![(Tap::Tree(node), 1.0)],
                    })
                    .collect(),
                updates: vec![],
            };
            let (a, bs) = build_lifting_level(&network, node, &split, &sources, &spec)?;
            locals.push(LocalTransform {
                node,
                matrix: a,
                broadcast: bs,
            });
            if classes[node.index()] == CoeffClass::Raw {
                // Not touched by a parent update yet: evens whose parent is
                // odd always get one, so this only tags the default before
                // the parent's pass (order of the loop is ascending ids, and
                // a parent precedes its children in pre-order).
                classes[node.index()] = CoeffClass::Smooth(1);
                raw_hops[node.index()] = 1;
            }
        }
    }

    let mut t = UnidirectionalTransform::new(
        network,
        schedule,
        active_causal,
        locals,
        vec![CoeffClass::Raw; n],
        vec![0; n],
    )?;
    t.set_annotations(classes, raw_hops);
    t.validate()?;
    Ok(t)
}

/// Build the extra-level plan for one odd node: repeatedly split the current
/// smooth set along a Euclidean MST (rooted at the smallest index, root depth
/// 1), predict odds from their MST children (or their MST parent when
/// childless), and update evens from their MST parent's detail.
fn secondary_levels(
    network: &Network,
    base: &[NodeId],
    design: UpdateDesign,
    levels: u8,
) -> (Vec<ExtraLevel>, Vec<(NodeId, CoeffClass)>) {
    let mut extras = Vec::new();
    let mut classes = Vec::new();
    let mut current: Vec<NodeId> = base.to_vec();
    for level in 0..levels {
        if current.len() < 2 {
            break;
        }
        let label = level + 2;
        let (parent, children, depth) = euclidean_mst(network, &current);
        let odd: Vec<NodeId> = current
            .iter()
            .copied()
            .filter(|m| depth[m] % 2 == 1)
            .collect();
        let even: Vec<NodeId> = current
            .iter()
            .copied()
            .filter(|m| depth[m] % 2 == 0)
            .collect();

        let mut spec = LevelSpec::default();
        let mut predictor_weights: BTreeMap<NodeId, (Vec<NodeId>, Vec<f64>)> = BTreeMap::new();
        for &l in &odd {
            let kids = children.get(&l).cloned().unwrap_or_default();
            let (neighbors, w) = if kids.is_empty() {
                (vec![parent[&l]], vec![1.0])
            } else {
                let w = averaging_prediction(kids.len()).unwrap();
                (kids, w)
            };
            spec.predicts.push(LiftTerm {
                target: l,
                taps: neighbors
                    .iter()
                    .zip(&w)
                    .map(|(m, p)| (Tap::Tree(*m), *p))
                    .collect(),
            });
            predictor_weights.insert(l, (neighbors, w));
            classes.push((l, CoeffClass::Detail(label)));
        }
        for &k in &even {
            // Root of the MST is depth 1 (odd), so every even member has an
            // odd parent whose prediction consumed it.
            let l = parent[&k];
            let (neighbors, w) = &predictor_weights[&l];
            if let Some(idx) = neighbors.iter().position(|m| *m == k) {
                let u = match design {
                    UpdateDesign::Smoothing => 0.5,
                    UpdateDesign::Ortho => orthogonalizing_update(w)[idx],
                };
                spec.updates.push(LiftTerm {
                    target: k,
                    taps: vec![(Tap::Tree(l), u)],
                });
            }
            classes.push((k, CoeffClass::Smooth(label)));
        }
        extras.push(ExtraLevel {
            odd,
            even: even.clone(),
            spec,
        });
        current = even;
    }
    (extras, classes)
}

/// Euclidean MST over a member set (Prim, smallest-index tie-breaks). The
/// root is the smallest index; depths count the root as 1.
fn euclidean_mst(
    network: &Network,
    members: &[NodeId],
) -> (
    BTreeMap<NodeId, NodeId>,
    BTreeMap<NodeId, Vec<NodeId>>,
    BTreeMap<NodeId, u32>,
) {
    let root = *members.iter().min().unwrap();
    let mut in_tree = vec![root];
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut depth: BTreeMap<NodeId, u32> = BTreeMap::new();
    depth.insert(root, 1);

    while in_tree.len() < members.len() {
        let mut best: Option<(f64, NodeId, NodeId)> = None; // (dist, from, to)
        for &u in &in_tree {
            for &v in members {
                if in_tree.contains(&v) {
                    continue;
                }
                let d = network.position(u).dist(&network.position(v));
                let cand = (d, u, v);
                best = match best {
                    None => Some(cand),
                    Some(b) => {
                        if d < b.0 || (d == b.0 && (u.0, v.0) < (b.1 .0, b.2 .0)) {
                            Some(cand)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
        }
        let (_, u, v) = best.expect("members remain");
        parent.insert(v, u);
        children.entry(u).or_default().push(v);
        depth.insert(v, depth[&u] + 1);
        in_tree.push(v);
    }
    for kids in children.values_mut() {
        kids.sort();
    }
    (parent, children, depth)
}

/// Parameters shared by the scheme dispatcher.
pub struct BuildOptions<'a> {
    pub design: UpdateDesign,
    pub extra_levels: u8,
    pub weights: &'a EdgeWeights,
    /// Required by `Scheme::Tklt` only.
    pub covariance: Option<&'a DMatrix<f64>>,
}

/// Build any named scheme against a network, schedule, and pruned causal sets.
pub fn build_scheme(
    scheme: Scheme,
    network: &Network,
    schedule: &Schedule,
    causal: &CausalSets,
    opts: &BuildOptions<'_>,
) -> Result<UnidirectionalTransform> {
    let net = network.clone();
    let sch = schedule.clone();
    match scheme {
        Scheme::Identity => build_identity(net, sch),
        Scheme::Tklt => {
            let cov = opts.covariance.ok_or_else(|| {
                Error::InvalidArgument("tklt requires a covariance matrix".into())
            })?;
            build_tklt(net, sch, cov)
        }
        Scheme::TdpcmDecoding => build_tdpcm_decoding(net, sch, opts.weights),
        Scheme::TdpcmOnehop => build_tdpcm_onehop(net, sch, opts.weights),
        Scheme::Lifting53 => build_53like(net, sch, opts.design),
        Scheme::Haar => build_haarlike(net, sch, causal, opts.design, false, opts.extra_levels),
        Scheme::HaarBroadcast => {
            build_haarlike(net, sch, causal, opts.design, true, opts.extra_levels)
        }
    }
}
