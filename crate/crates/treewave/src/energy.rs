//! Radio energy model and gathering-cost accounting.
//!
//! Transmitting `k` bits over distance `D` costs `E_elec·k + ε_amp·k·D²`;
//! receiving costs `E_elec·k`. An epoch is simulated by walking the schedule:
//! each node sends one packet to its parent carrying its own stream plus
//! everything relayed for descendants, where a stream travels as raw data for
//! its annotated raw-forwarding hops and as its coefficient payload after
//! that. The sink is mains powered, so its receptions are free.

use serde::{Deserialize, Serialize};

use crate::codec::Payload;
use crate::error::{Error, Result};
use crate::topology::NodeId;
use crate::transform::UnidirectionalTransform;

/// First-order radio constants. The defaults are the standard 50 nJ/bit
/// electronics and 100 pJ/bit/m² amplifier figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioCostParams {
    pub e_elec: f64,
    pub eps_amp: f64,
}

impl Default for RadioCostParams {
    fn default() -> Self {
        RadioCostParams {
            e_elec: 50e-9,
            eps_amp: 100e-12,
        }
    }
}

impl RadioCostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_elec > 0.0) || !(self.eps_amp > 0.0) {
            return Err(Error::InvalidArgument(
                "radio cost constants must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Transmit cost in Joules for `k` bits over `distance` meters.
pub fn tx_cost(k: u64, distance: f64, params: &RadioCostParams) -> Result<f64> {
    if !(distance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative transmit distance {distance}"
        )));
    }
    let k = k as f64;
    Ok(params.e_elec * k + params.eps_amp * k * distance * distance)
}

/// Receive cost in Joules for `k` bits.
pub fn rx_cost(k: u64, params: &RadioCostParams) -> f64 {
    params.e_elec * k as f64
}

/// Who pays reception energy for overheard broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BroadcastChargePolicy {
    /// Only listeners whose transform actually consumes the packet pay, and
    /// they pay for the part they use: the source's own stream at the head of
    /// the packet (the radio powers down once it has it).
    ConsumersOnly,
    /// Every in-range listener pays for the full packet, whether or not the
    /// data is used.
    AllInRange,
}

/// One scheduled transmission and everyone it touched.
#[derive(Debug, Clone)]
pub struct TransmissionEvent {
    pub sender: NodeId,
    /// Parent (when not the sink) followed by charged broadcast listeners.
    pub receivers: Vec<NodeId>,
    pub bits: u64,
    pub distance: f64,
    pub energy: f64,
}

/// Cost of gathering one epoch, against the raw-forwarding baseline.
#[derive(Debug, Clone)]
pub struct CostReport {
    pub events: Vec<TransmissionEvent>,
    /// Total gathering cost with the transform, C_t.
    pub total_joules: f64,
    /// Raw-forwarding baseline, C_r.
    pub baseline_joules: f64,
    /// (C_r - C_t) / C_r.
    pub ratio: f64,
    pub snr_db: Option<f64>,
}

/// Bits node `stream_owner`'s data occupies on its `hop`-th transmission
/// (1-based): raw until the coefficient exists, the payload afterwards.
fn stream_bits_at_hop(
    transform: &UnidirectionalTransform,
    payloads: &[Payload],
    raw_stream_bits: u64,
    stream_owner: NodeId,
    hop: u32,
) -> u64 {
    if hop <= transform.raw_hops(stream_owner) {
        raw_stream_bits
    } else {
        payloads[stream_owner.index()].bits
    }
}

/// Simulate the gathering cost of one epoch under a transform.
///
/// `payloads` holds each node's coefficient-stream bits (one entry per node,
/// in node order); `raw_stream_bits` is the cost of one raw stream
/// (`M · B_r`).
pub fn simulate_epoch_cost(
    transform: &UnidirectionalTransform,
    payloads: &[Payload],
    raw_stream_bits: u64,
    params: &RadioCostParams,
    policy: BroadcastChargePolicy,
) -> Result<CostReport> {
    params.validate()?;
    let network = transform.network();
    let n = network.len();
    if payloads.len() != n {
        return Err(Error::Accounting(format!(
            "{} payloads for {} nodes",
            payloads.len(),
            n
        )));
    }
    for (i, p) in payloads.iter().enumerate() {
        if p.node != NodeId(i + 1) {
            return Err(Error::Accounting(format!(
                "payload at position {i} belongs to node {}",
                p.node
            )));
        }
    }

    let mut events = Vec::with_capacity(n);
    let mut total = 0.0;
    for &sender in transform.schedule().order() {
        // Packet: the sender's own stream plus all relayed descendant
        // streams, each at its current hop index.
        let mut bits = 0u64;
        let sender_depth = network.depth(sender);
        for owner in std::iter::once(sender).chain(network.descendants(sender)) {
            let hop = network.depth(owner) - sender_depth + 1;
            bits += stream_bits_at_hop(transform, payloads, raw_stream_bits, owner, hop);
        }
        let distance = network.tx_distance(sender);
        let mut energy = tx_cost(bits, distance, params)?;
        let mut receivers = Vec::new();
        let parent = network.parent(sender);
        if parent != network.sink() {
            energy += rx_cost(bits, params);
            receivers.push(parent);
        }
        let head_bits = stream_bits_at_hop(transform, payloads, raw_stream_bits, sender, 1);
        for listener in network.listeners(sender) {
            match policy {
                BroadcastChargePolicy::ConsumersOnly => {
                    if transform.consumes_broadcast(listener, sender) {
                        energy += rx_cost(head_bits, params);
                        receivers.push(listener);
                    }
                }
                BroadcastChargePolicy::AllInRange => {
                    energy += rx_cost(bits, params);
                    receivers.push(listener);
                }
            }
        }
        total += energy;
        events.push(TransmissionEvent {
            sender,
            receivers,
            bits,
            distance,
            energy,
        });
    }

    let baseline = raw_baseline_cost(transform, raw_stream_bits, params)?;
    Ok(CostReport {
        events,
        total_joules: total,
        baseline_joules: baseline,
        ratio: (baseline - total) / baseline,
        snr_db: None,
    })
}

/// Raw-forwarding baseline: every node's stream is `raw_stream_bits` on every
/// hop, no broadcast listeners are charged. Accumulation follows the schedule
/// order so an identity transform reproduces the baseline bit for bit.
pub fn raw_baseline_cost(
    transform: &UnidirectionalTransform,
    raw_stream_bits: u64,
    params: &RadioCostParams,
) -> Result<f64> {
    params.validate()?;
    let network = transform.network();
    let mut total = 0.0;
    for &sender in transform.schedule().order() {
        let bits = network.block_len(sender) as u64 * raw_stream_bits;
        let mut energy = tx_cost(bits, network.tx_distance(sender), params)?;
        if network.parent(sender) != network.sink() {
            energy += rx_cost(bits, params);
        }
        total += energy;
    }
    Ok(total)
}

/// Signal-to-quantization-noise ratio in dB. Exact reconstruction saturates
/// to +inf; an all-zero reference signal is undefined.
pub fn snr(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            original.len(),
            reconstructed.len()
        )));
    }
    let signal: f64 = original.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedSignal(
            "all-zero reference signal has no SNR".into(),
        ));
    }
    let noise: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Payload, PayloadKind};
    use crate::scheduling::Schedule;
    use crate::topology::{Network, Point, RadioModel};
    use crate::transform::CoeffClass;
    use crate::zoo;

    fn raw_payloads(n: usize, bits: u64) -> Vec<Payload> {
        (0..n)
            .map(|i| Payload {
                node: NodeId(i + 1),
                bits,
                kind: PayloadKind::RawBits,
            })
            .collect()
    }

    #[test]
    fn radio_formulas_match_hand_values() {
        let params = RadioCostParams::default();
        assert_eq!(tx_cost(0, 25.0, &params).unwrap(), 0.0);
        let tx = tx_cost(600, 10.0, &params).unwrap();
        assert!((tx - 3.6e-5).abs() < 1e-12, "tx = {tx}");
        let rx = rx_cost(600, &params);
        assert!((rx - 3.0e-5).abs() < 1e-12, "rx = {rx}");
        assert!(tx_cost(1, -1.0, &params).is_err());
    }

    #[test]
    fn single_node_pays_one_transmission() {
        let net = Network::from_preordered_with_links(
            vec![Point::new(10.0, 0.0)],
            Point::new(0.0, 0.0),
            vec![NodeId(2)],
            RadioModel::VariableRange,
            vec![],
        )
        .unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let params = RadioCostParams::default();
        let report = simulate_epoch_cost(
            &t,
            &raw_payloads(1, 600),
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap();
        let want = tx_cost(600, 10.0, &params).unwrap();
        assert_eq!(report.total_joules, want);
        assert_eq!(report.events.len(), 1);
        assert!(report.events[0].receivers.is_empty()); // sink reception is free
        assert_eq!(report.ratio, 0.0);
    }

    fn chain(n: usize) -> Network {
        let positions: Vec<Point> = (1..=n).map(|i| Point::new(12.0 * i as f64, 0.0)).collect();
        let parents: Vec<NodeId> = (0..n)
            .map(|i| if i == 0 { NodeId(n + 1) } else { NodeId(i) })
            .collect();
        Network::from_preordered_with_links(
            positions,
            Point::new(0.0, 0.0),
            parents,
            RadioModel::VariableRange,
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn identity_transform_equals_raw_baseline() {
        for radio in [
            RadioModel::VariableRange,
            RadioModel::FixedRange { radius: 200.0 },
        ] {
            let net = Network::generate_connected(20, 600.0, radio, 8).unwrap();
            let schedule = Schedule::assign(&net);
            let t = zoo::build_identity(net, schedule).unwrap();
            let params = RadioCostParams::default();
            let report = simulate_epoch_cost(
                &t,
                &raw_payloads(20, 600),
                600,
                &params,
                BroadcastChargePolicy::ConsumersOnly,
            )
            .unwrap();
            assert_eq!(report.total_joules, report.baseline_joules);
            assert_eq!(report.ratio, 0.0);
        }
    }

    #[test]
    fn baseline_matches_per_path_oracle() {
        let net = Network::generate(25, 600.0, RadioModel::VariableRange, 5).unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net.clone(), schedule).unwrap();
        let params = RadioCostParams::default();
        let baseline = raw_baseline_cost(&t, 600, &params).unwrap();

        // Independent summation: each node's stream pays tx on every hop of
        // its path and rx at every intermediate (non-sink) receiver.
        let mut oracle = 0.0;
        for start in net.nodes() {
            let mut cur = start;
            while cur != net.sink() {
                oracle += tx_cost(600, net.tx_distance(cur), &params).unwrap();
                let parent = net.parent(cur);
                if parent != net.sink() {
                    oracle += rx_cost(600, &params);
                }
                cur = parent;
            }
        }
        assert!(
            (baseline - oracle).abs() <= 1e-9 * oracle,
            "{baseline} vs {oracle}"
        );
    }

    #[test]
    fn chain_of_three_charges_leaf_over_two_hops() {
        let net = chain(3);
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let params = RadioCostParams::default();
        let baseline = raw_baseline_cost(&t, 600, &params).unwrap();
        // Node 3: tx at 3 and relayed tx at 2 and 1, rx at 2 and 1.
        // Node 2: tx at 2 and 1, rx at 1. Node 1: tx at 1.
        let d = 12.0;
        let tx1 = tx_cost(600, d, &params).unwrap();
        let want = 6.0 * tx1 + 3.0 * rx_cost(600, &params);
        assert!((baseline - want).abs() < 1e-12);
    }

    #[test]
    fn more_bits_never_cost_less() {
        let net =
            Network::generate_connected(30, 600.0, RadioModel::FixedRange { radius: 170.0 }, 3)
                .unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let params = RadioCostParams::default();
        let mut payloads = raw_payloads(30, 500);
        let base = simulate_epoch_cost(
            &t,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap()
        .total_joules;
        payloads[7].bits += 64;
        let bumped = simulate_epoch_cost(
            &t,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap()
        .total_joules;
        assert!(bumped > base);
    }

    #[test]
    fn totals_equal_event_sums_and_ratio_below_one() {
        let net =
            Network::generate_connected(25, 600.0, RadioModel::FixedRange { radius: 180.0 }, 9)
                .unwrap();
        let schedule = Schedule::assign(&net);
        let t = zoo::build_identity(net, schedule).unwrap();
        let params = RadioCostParams::default();
        let report = simulate_epoch_cost(
            &t,
            &raw_payloads(25, 320),
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap();
        let sum: f64 = report.events.iter().map(|e| e.energy).sum();
        assert_eq!(report.total_joules, sum);
        assert!(report.ratio < 1.0);
    }

    #[test]
    fn raw_hops_charge_raw_bits_before_coefficients() {
        // Chain of 3 with a one-hop raw annotation on every node (the
        // parent-differencing scheme): hop 1 carries 600 raw bits, later hops
        // the payload.
        let net = chain(3);
        let schedule = Schedule::assign(&net);
        let t = zoo::build_tdpcm_onehop(net, schedule, &zoo::EdgeWeights::uniform(1.0)).unwrap();
        let params = RadioCostParams::default();
        let detail_bits = 100u64;
        let payloads: Vec<Payload> = (0..3)
            .map(|i| Payload {
                node: NodeId(i + 1),
                bits: if t.class(NodeId(i + 1)) == CoeffClass::Raw {
                    600
                } else {
                    detail_bits
                },
                kind: PayloadKind::DetailCoded,
            })
            .collect();
        let report = simulate_epoch_cost(
            &t,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap();
        // Node 3 (slot 1) sends 600 raw. Node 2 sends its own raw 600 plus
        // node 3's detail (100). Node 1 sends own raw 600 + details 100+100.
        let bits: Vec<u64> = report.events.iter().map(|e| e.bits).collect();
        assert_eq!(bits, vec![600, 700, 800]);
    }

    #[test]
    fn broadcast_listeners_charged_per_policy() {
        // Orphan fixture: node 3 consumes node 2's broadcast.
        let positions = vec![
            Point::new(10.0, 0.0),
            Point::new(20.0, 0.0),
            Point::new(0.0, 10.0),
        ];
        let parents = vec![NodeId(4), NodeId(1), NodeId(4)];
        let net = Network::from_preordered_with_links(
            positions,
            Point::new(0.0, 0.0),
            parents,
            RadioModel::VariableRange,
            vec![(NodeId(2), NodeId(3))],
        )
        .unwrap();
        let schedule = Schedule::from_slots(&net, vec![3, 1, 2]).unwrap();
        let causal = crate::scheduling::prune_for_decodability(
            &crate::scheduling::derive_causal_sets(&net, &schedule),
            &net,
            &schedule,
        );
        let params = RadioCostParams::default();

        let bc = zoo::build_haarlike(
            net.clone(),
            schedule.clone(),
            &causal,
            crate::lifting::UpdateDesign::Ortho,
            true,
            0,
        )
        .unwrap();
        let payloads = raw_payloads(3, 600);
        let consumed = simulate_epoch_cost(
            &bc,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap();
        let ev2 = consumed
            .events
            .iter()
            .find(|e| e.sender == NodeId(2))
            .unwrap();
        assert!(ev2.receivers.contains(&NodeId(3)));

        // Without broadcast use, the consumer charge disappears but the
        // all-in-range policy still bills the listener.
        let plain = zoo::build_haarlike(
            net,
            schedule,
            &causal,
            crate::lifting::UpdateDesign::Ortho,
            false,
            0,
        )
        .unwrap();
        let consumed = simulate_epoch_cost(
            &plain,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::ConsumersOnly,
        )
        .unwrap();
        let ev2 = consumed
            .events
            .iter()
            .find(|e| e.sender == NodeId(2))
            .unwrap();
        assert!(!ev2.receivers.contains(&NodeId(3)));
        let all = simulate_epoch_cost(
            &plain,
            &payloads,
            600,
            &params,
            BroadcastChargePolicy::AllInRange,
        )
        .unwrap();
        let ev2 = all.events.iter().find(|e| e.sender == NodeId(2)).unwrap();
        assert!(ev2.receivers.contains(&NodeId(3)));
    }

    #[test]
    fn snr_known_values() {
        assert_eq!(snr(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), f64::INFINITY);
        // Zero reconstruction: noise equals signal, SNR = 0 dB.
        let v = snr(&[3.0, -4.0], &[0.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-12);
        // Hand value: signal 25+16=41... use [3,4] vs [3,2]: 25/4.
        let v = snr(&[3.0, 4.0], &[3.0, 2.0]).unwrap();
        assert!((v - 10.0 * (25.0f64 / 4.0).log10()).abs() < 1e-12);
        assert!(snr(&[0.0], &[0.0]).is_err());
        assert!(snr(&[1.0], &[1.0, 2.0]).is_err());
    }
}
