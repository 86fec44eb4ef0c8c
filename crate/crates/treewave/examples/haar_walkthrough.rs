//! Worked multi-level Haar-like computation: an odd node with two even
//! children, averaging prediction, orthogonalizing update, and one extra
//! decomposition level over the children's smooths. Applied to [4, 2, 6]
//! the block becomes [0, -4, 4].

use treewave::lifting::UpdateDesign;
use treewave::zoo::build_haarlike;
use treewave::{CausalSets, Network, NodeId, Point, RadioModel, Schedule};

fn main() {
    let net = Network::from_preordered_with_links(
        vec![
            Point::new(10.0, 0.0),
            Point::new(20.0, 5.0),
            Point::new(20.0, -5.0),
        ],
        Point::new(0.0, 0.0),
        vec![NodeId(4), NodeId(1), NodeId(1)],
        RadioModel::VariableRange,
        vec![],
    )
    .unwrap();
    let schedule = Schedule::assign(&net);
    let causal = CausalSets::empty(&net);

    let t = build_haarlike(net, schedule, &causal, UpdateDesign::Ortho, false, 1).unwrap();
    println!("local matrix of node 1 (predict, update, then level 2):");
    println!("{:.4}", t.local(NodeId(1)).matrix);

    let x = [4.0, 2.0, 6.0];
    let states = t.encode_states(&x).unwrap();
    for (k, state) in states.iter().enumerate() {
        println!("after slot {k}: {state:?}");
    }
    for n in 1..=3 {
        println!("node {n}: class {:?}", t.class(NodeId(n)));
    }

    let y = states.last().unwrap();
    let back = t.decode_epoch(y).unwrap();
    println!("decoded: {back:?}");
}
