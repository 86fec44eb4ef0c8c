//! In-network linear transforms on routing trees with broadcast links.
//!
//! This crate simulates tree-based data gathering in which nodes compress
//! measurements *as the data flows toward the sink*: each node applies a
//! local linear transform to its own sample plus whatever it has received
//! from descendants and overheard broadcasts, then forwards exactly one
//! coefficient per covered node (critical sampling). The library provides:
//!
//! - [`topology`]: random placements, shortest-path routing trees, broadcast
//!   link derivation, and tree queries under pre-order numbering;
//! - [`scheduling`]: unique transmission slots plus the causal broadcast
//!   neighborhoods that keep the transform decodable step by step;
//! - [`transform`]: the per-node matrix representation, forward encoding in
//!   slot order, reverse decoding, global-matrix assembly, and invertibility
//!   and critical-sampling checks;
//! - [`lifting`]: predict/update lifting factors and multi-level plans with
//!   unit-determinant local matrices;
//! - [`zoo`]: concrete constructions — whitening (T-KLT), differential
//!   (T-DPCM, both flavors), 5/3-like and Haar-like wavelets, the latter with
//!   optional broadcast exploitation and extra decomposition levels;
//! - [`codec`]: dead-zone scalar quantizer and an adaptive arithmetic coder
//!   for detail streams;
//! - [`energy`]: the radio energy model and epoch cost accounting against a
//!   raw-forwarding baseline;
//! - [`datagen`]: separable AR(2) field synthesis and field sampling;
//! - [`experiment`]: config-driven lossless/lossy comparison runs with CSV
//!   output.
//!
//! Every runnable capability has a corresponding example under `examples/`;
//! the `treewave` binary exposes the `gen-net`, `lossless`, `lossy`, and
//! `verify` subcommands over the same machinery.

pub mod codec;
pub mod datagen;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod lifting;
pub mod scheduling;
pub mod topology;
pub mod transform;
pub mod zoo;

pub use error::{Error, Result};
pub use scheduling::{derive_causal_sets, prune_for_decodability, CausalSets, Schedule};
pub use topology::{Network, NodeId, Point, RadioModel};
pub use transform::{CoeffClass, CoefficientSet, LocalTransform, UnidirectionalTransform};
