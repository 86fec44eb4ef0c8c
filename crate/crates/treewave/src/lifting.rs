//! Lifting steps: parity splits, predict/update filter designs, single-level
//! local matrix factors, and multi-level composition.
//!
//! A lifting step first predicts every odd target from opposite-parity
//! sources (detail = value minus weighted sources) and then updates even
//! targets from odd details. Both phases are unit-triangular up to a
//! permutation, so every composed local matrix has determinant exactly one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::topology::{Network, NodeId};
use crate::transform::LocalTransform;

/// Node partition by tree-depth parity: odd depth → odd set.
#[derive(Debug, Clone)]
pub struct ParitySplit {
    odd: Vec<bool>,
}

impl ParitySplit {
    pub fn by_depth(network: &Network) -> ParitySplit {
        ParitySplit {
            odd: network.nodes().map(|n| network.depth(n) % 2 == 1).collect(),
        }
    }

    pub fn is_odd(&self, n: NodeId) -> bool {
        self.odd[n.index()]
    }

    pub fn is_even(&self, n: NodeId) -> bool {
        !self.odd[n.index()]
    }

    pub fn odd_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.odd
            .iter()
            .enumerate()
            .filter(|(_, o)| **o)
            .map(|(i, _)| NodeId(i + 1))
    }

    pub fn even_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.odd
            .iter()
            .enumerate()
            .filter(|(_, o)| !**o)
            .map(|(i, _)| NodeId(i + 1))
    }
}

/// Uniform prediction weights `1/|N|` over a nonempty neighbor set.
pub fn averaging_prediction(neighbor_count: usize) -> Result<Vec<f64>> {
    if neighbor_count == 0 {
        return Err(Error::InvalidArgument(
            "averaging prediction needs at least one neighbor".into(),
        ));
    }
    Ok(vec![1.0 / neighbor_count as f64; neighbor_count])
}

/// Uniform smoothing update weights `1/(2|N|)`.
pub fn smoothing_update(neighbor_count: usize) -> Result<Vec<f64>> {
    if neighbor_count == 0 {
        return Err(Error::InvalidArgument(
            "smoothing update needs at least one neighbor".into(),
        ));
    }
    Ok(vec![0.5 / neighbor_count as f64; neighbor_count])
}

/// Update weights that make each smooth coefficient orthogonal to the detail
/// it absorbs (identity-covariance inner product): `u(i) = p(i) / (1 + ‖p‖²)`.
/// For `p = [1/2, 1/2]` this yields `[1/3, 1/3]`; for `p = [1]` the classical
/// Haar `[1/2]`.
pub fn orthogonalizing_update(prediction: &[f64]) -> Vec<f64> {
    let norm2: f64 = prediction.iter().map(|p| p * p).sum();
    prediction.iter().map(|p| p / (1.0 + norm2)).collect()
}

/// Update filter selection; predictions are always averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateDesign {
    /// `u = 1/(2|N|)` per neighbor.
    Smoothing,
    /// Orthogonalizing weights derived from the predictor's weights.
    Ortho,
}

/// Where a lifting term reads its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tap {
    /// A member of the node's own block `{n} ∪ D_n`.
    Tree(NodeId),
    /// A member of a broadcast source's block (`member` is the source itself
    /// or one of its descendants).
    Broadcast { source: NodeId, member: NodeId },
}

/// One predict or update: `target` gains `±Σ w · value(tap)`.
#[derive(Debug, Clone)]
pub struct LiftTerm {
    pub target: NodeId,
    pub taps: Vec<(Tap, f64)>,
}

/// A single lifting level: all predicts fire simultaneously, then all
/// updates.
#[derive(Debug, Clone, Default)]
pub struct LevelSpec {
    pub predicts: Vec<LiftTerm>,
    pub updates: Vec<LiftTerm>,
}

/// Multi-level plan for one node: the first level may read broadcast data,
/// the extra levels re-decompose a base set of smooth coefficients.
#[derive(Debug, Clone)]
pub struct LevelPlan {
    pub first: LevelSpec,
    /// Smooth coefficients the extra levels decompose (`E^1` for this plan).
    pub base: Vec<NodeId>,
    pub extras: Vec<ExtraLevel>,
}

/// Level `j ≥ 2`: `odd ∪ even` must partition the previous level's evens.
#[derive(Debug, Clone)]
pub struct ExtraLevel {
    pub odd: Vec<NodeId>,
    pub even: Vec<NodeId>,
    pub spec: LevelSpec,
}

/// Build the `A_n` factor and per-source broadcast factors for one lifting
/// level at `node`. Predict targets must be odd and read only even taps;
/// update targets must be even and read only odd taps.
pub fn build_lifting_level(
    network: &Network,
    node: NodeId,
    split: &ParitySplit,
    causal_sources: &[NodeId],
    spec: &LevelSpec,
) -> Result<(DMatrix<f64>, Vec<(NodeId, DMatrix<f64>)>)> {
    let mut a = DMatrix::identity(network.block_len(node), network.block_len(node));
    let mut bs: Vec<(NodeId, DMatrix<f64>)> = causal_sources
        .iter()
        .map(|&src| {
            (
                src,
                DMatrix::zeros(network.block_len(node), network.block_len(src)),
            )
        })
        .collect();
    apply_level(network, node, split, spec, &mut a, &mut bs, true)?;
    Ok((a, bs))
}

/// Compose a full multi-level plan into the node's local transform matrices.
pub fn compose_multilevel(
    network: &Network,
    node: NodeId,
    split: &ParitySplit,
    causal_sources: &[NodeId],
    plan: &LevelPlan,
) -> Result<LocalTransform> {
    let (mut a, mut bs) = build_lifting_level(network, node, split, causal_sources, &plan.first)?;

    // Parity alternates per level: level-2 odds live inside the base evens.
    let mut prev_even: Vec<NodeId> = plan.base.clone();
    for (k, level) in plan.extras.iter().enumerate() {
        let mut members = level.odd.clone();
        members.extend(level.even.iter().copied());
        members.sort();
        members.dedup();
        let mut expected = prev_even.clone();
        expected.sort();
        if members.len() != level.odd.len() + level.even.len() || members != expected {
            return Err(Error::Plan(format!(
                "level {} sets do not partition the previous even set at node {node}",
                k + 2
            )));
        }
        let level_split = SetSplit {
            odd: &level.odd,
            even: &level.even,
        };
        apply_extra_level(network, node, &level_split, &level.spec, &mut a, &mut bs)?;
        prev_even = level.even.clone();
    }

    Ok(LocalTransform {
        node,
        matrix: a,
        broadcast: bs,
    })
}

/// Parity view for extra levels, defined by explicit odd/even sets.
struct SetSplit<'a> {
    odd: &'a [NodeId],
    even: &'a [NodeId],
}

impl SetSplit<'_> {
    fn is_odd(&self, n: NodeId) -> bool {
        self.odd.contains(&n)
    }
    fn is_even(&self, n: NodeId) -> bool {
        self.even.contains(&n)
    }
}

fn block_pos(network: &Network, node: NodeId, member: NodeId) -> Result<usize> {
    if member == node || network.is_ancestor_of(node, member) {
        Ok(member.0 - node.0)
    } else {
        Err(Error::Plan(format!(
            "node {member} is outside the block of node {node}"
        )))
    }
}

fn apply_level(
    network: &Network,
    node: NodeId,
    split: &ParitySplit,
    spec: &LevelSpec,
    a: &mut DMatrix<f64>,
    bs: &mut [(NodeId, DMatrix<f64>)],
    allow_broadcast: bool,
) -> Result<()> {
    let blen = a.nrows();

    // Predict factor: odd targets subtract weighted even taps.
    let mut p_sq = DMatrix::<f64>::identity(blen, blen);
    let mut p_bc: Vec<DMatrix<f64>> = bs
        .iter()
        .map(|(_, m)| DMatrix::zeros(m.nrows(), m.ncols()))
        .collect();
    for term in &spec.predicts {
        if !split.is_odd(term.target) {
            return Err(Error::Parity(format!(
                "predict target {} is not odd",
                term.target
            )));
        }
        let t = block_pos(network, node, term.target)?;
        for (tap, w) in &term.taps {
            match tap {
                Tap::Tree(m) => {
                    if !split.is_even(*m) {
                        return Err(Error::Parity(format!(
                            "predict at {} reads odd source {m}",
                            term.target
                        )));
                    }
                    p_sq[(t, block_pos(network, node, *m)?)] -= w;
                }
                Tap::Broadcast { source, member } => {
                    if !allow_broadcast {
                        return Err(Error::Plan(
                            "broadcast taps are only valid in the first level".into(),
                        ));
                    }
                    if !split.is_even(*member) {
                        return Err(Error::Parity(format!(
                            "predict at {} reads odd broadcast member {member}",
                            term.target
                        )));
                    }
                    let idx = bs.iter().position(|(s, _)| s == source).ok_or_else(|| {
                        Error::Plan(format!("{source} is not a causal broadcast source"))
                    })?;
                    p_bc[idx][(t, block_pos(network, *source, *member)?)] -= w;
                }
            }
        }
    }

    // Update factor: even targets add weighted odd taps.
    let mut u_sq = DMatrix::<f64>::identity(blen, blen);
    let mut u_bc: Vec<DMatrix<f64>> = bs
        .iter()
        .map(|(_, m)| DMatrix::zeros(m.nrows(), m.ncols()))
        .collect();
    for term in &spec.updates {
        if !split.is_even(term.target) {
            return Err(Error::Parity(format!(
                "update target {} is not even",
                term.target
            )));
        }
        let t = block_pos(network, node, term.target)?;
        for (tap, w) in &term.taps {
            match tap {
                Tap::Tree(m) => {
                    if !split.is_odd(*m) {
                        return Err(Error::Parity(format!(
                            "update at {} reads even source {m}",
                            term.target
                        )));
                    }
                    u_sq[(t, block_pos(network, node, *m)?)] += w;
                }
                Tap::Broadcast { source, member } => {
                    if !allow_broadcast {
                        return Err(Error::Plan(
                            "broadcast taps are only valid in the first level".into(),
                        ));
                    }
                    if !split.is_odd(*member) {
                        return Err(Error::Parity(format!(
                            "update at {} reads even broadcast member {member}",
                            term.target
                        )));
                    }
                    let idx = bs.iter().position(|(s, _)| s == source).ok_or_else(|| {
                        Error::Plan(format!("{source} is not a causal broadcast source"))
                    })?;
                    u_bc[idx][(t, block_pos(network, *source, *member)?)] += w;
                }
            }
        }
    }

    // y' = U (P y + P_bc b) + U_bc b, composed onto the running factors.
    let old_a = a.clone();
    *a = &u_sq * &p_sq * old_a;
    for (i, (_, b)) in bs.iter_mut().enumerate() {
        let old = b.clone();
        *b = &u_sq * (&p_sq * old + &p_bc[i]) + &u_bc[i];
    }
    Ok(())
}

fn apply_extra_level(
    network: &Network,
    node: NodeId,
    split: &SetSplit<'_>,
    spec: &LevelSpec,
    a: &mut DMatrix<f64>,
    bs: &mut [(NodeId, DMatrix<f64>)],
) -> Result<()> {
    let blen = a.nrows();
    let mut p_sq = DMatrix::<f64>::identity(blen, blen);
    let mut u_sq = DMatrix::<f64>::identity(blen, blen);

    for term in &spec.predicts {
        if !split.is_odd(term.target) {
            return Err(Error::Parity(format!(
                "predict target {} is not odd at this level",
                term.target
            )));
        }
        let t = block_pos(network, node, term.target)?;
        for (tap, w) in &term.taps {
            match tap {
                Tap::Tree(m) if split.is_even(*m) => {
                    p_sq[(t, block_pos(network, node, *m)?)] -= w;
                }
                Tap::Tree(m) => {
                    return Err(Error::Parity(format!(
                        "predict at {} reads non-even source {m}",
                        term.target
                    )));
                }
                Tap::Broadcast { .. } => {
                    return Err(Error::Plan(
                        "broadcast taps are only valid in the first level".into(),
                    ));
                }
            }
        }
    }
    for term in &spec.updates {
        if !split.is_even(term.target) {
            return Err(Error::Parity(format!(
                "update target {} is not even at this level",
                term.target
            )));
        }
        let t = block_pos(network, node, term.target)?;
        for (tap, w) in &term.taps {
            match tap {
                Tap::Tree(m) if split.is_odd(*m) => {
                    u_sq[(t, block_pos(network, node, *m)?)] += w;
                }
                Tap::Tree(m) => {
                    return Err(Error::Parity(format!(
                        "update at {} reads non-odd source {m}",
                        term.target
                    )));
                }
                Tap::Broadcast { .. } => {
                    return Err(Error::Plan(
                        "broadcast taps are only valid in the first level".into(),
                    ));
                }
            }
        }
    }

    let old_a = a.clone();
    *a = &u_sq * &p_sq * old_a;
    for (_, b) in bs.iter_mut() {
        let old = b.clone();
        *b = &u_sq * &p_sq * old;
    }
    Ok(())
}
