//! Config-driven experiment harness: build networks, run transform + codec +
//! energy pipelines over seeded trials, and emit CSV tables.
//!
//! Lossless mode quantizes detail streams with step 1.0 (near-lossless, the
//! raw measurements being 12-bit sensor readings) and reports cost-reduction
//! ratios against raw forwarding. Lossy mode sweeps quantizer steps and
//! reports cost/SNR points. Generated fields are rescaled to `field_scale`
//! standard deviation so the 12-bit raw budget and the unit quantizer step
//! describe the same dynamic range.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{ac_encode, dequantize, payload_bits, quantize, Payload};
use crate::datagen::{ar2_field, sample_field, spatial_covariance, ArFieldSpec};
use crate::energy::{simulate_epoch_cost, snr, BroadcastChargePolicy, RadioCostParams};
use crate::error::{Error, Result};
use crate::lifting::UpdateDesign;
use crate::scheduling::{derive_causal_sets, prune_for_decodability, CausalSets, Schedule};
use crate::topology::{Network, NetworkJson, NodeId, RadioModel};
use crate::transform::UnidirectionalTransform;
use crate::zoo::{build_scheme, BuildOptions, EdgeWeights, Scheme};

/// Spatial correlation setting: the AR(2) pole angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    High,
    Low,
}

impl Correlation {
    pub fn rho(self) -> f64 {
        0.99
    }

    pub fn omega0_deg(self) -> f64 {
        match self {
            Correlation::High => 359.0,
            Correlation::Low => 99.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Correlation::High => "high",
            Correlation::Low => "low",
        }
    }

    fn parse(s: &str) -> Result<Correlation> {
        match s {
            "high" => Ok(Correlation::High),
            "low" => Ok(Correlation::Low),
            other => Err(Error::InvalidArgument(format!(
                "unknown correlation '{other}' (expected high|low)"
            ))),
        }
    }
}

/// Everything a run needs. The flat key-value text format round-trips
/// through [`ExperimentConfig::to_text`] and [`ExperimentConfig::from_text`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub extent: f64,
    pub radio: RadioModel,
    pub schemes: Vec<Scheme>,
    pub filter: UpdateDesign,
    pub levels: u8,
    pub correlation: Correlation,
    pub steps: Vec<f64>,
    pub epochs: usize,
    pub raw_bits: u32,
    pub energy: RadioCostParams,
    pub trials: usize,
    pub master_seed: u64,
    pub broadcast_policy: BroadcastChargePolicy,
    pub grid_size: usize,
    pub field_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nodes: 50,
            extent: 600.0,
            radio: RadioModel::VariableRange,
            schemes: vec![Scheme::Haar],
            filter: UpdateDesign::Ortho,
            levels: 2,
            correlation: Correlation::High,
            steps: vec![1.0],
            epochs: 50,
            raw_bits: 12,
            energy: RadioCostParams::default(),
            trials: 20,
            master_seed: 7,
            broadcast_policy: BroadcastChargePolicy::ConsumersOnly,
            grid_size: 600,
            field_scale: 50.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidArgument("nodes must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.epochs == 0 || self.epochs > u16::MAX as usize {
            return Err(Error::InvalidArgument(
                "epochs must fit the 16-bit stream header".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one scheme required".into(),
            ));
        }
        if self.steps.is_empty() {
            return Err(Error::InvalidArgument(
                "steps must be nonempty for lossy runs".into(),
            ));
        }
        if self.steps.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument(
                "quantizer steps must be positive".into(),
            ));
        }
        if !(self.field_scale > 0.0) {
            return Err(Error::InvalidArgument(
                "field_scale must be positive".into(),
            ));
        }
        self.radio.validate()?;
        self.energy.validate()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes = {}", self.nodes);
        let _ = writeln!(s, "extent = {}", self.extent);
        match self.radio {
            RadioModel::VariableRange => {
                let _ = writeln!(s, "radio = variable");
            }
            RadioModel::FixedRange { radius } => {
                let _ = writeln!(s, "radio = fixed:{radius}");
            }
        }
        let names: Vec<&str> = self.schemes.iter().map(|s| s.name()).collect();
        let _ = writeln!(s, "schemes = {}", names.join(","));
        let _ = writeln!(
            s,
            "filter = {}",
            match self.filter {
                UpdateDesign::Smoothing => "smoothing",
                UpdateDesign::Ortho => "ortho",
            }
        );
        let _ = writeln!(s, "levels = {}", self.levels);
        let _ = writeln!(s, "correlation = {}", self.correlation.name());
        let steps: Vec<String> = self.steps.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "steps = {}", steps.join(","));
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "raw_bits = {}", self.raw_bits);
        let _ = writeln!(s, "e_elec = {}", self.energy.e_elec);
        let _ = writeln!(s, "eps_amp = {}", self.energy.eps_amp);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(
            s,
            "broadcast_policy = {}",
            match self.broadcast_policy {
                BroadcastChargePolicy::ConsumersOnly => "consumers",
                BroadcastChargePolicy::AllInRange => "all",
            }
        );
        let _ = writeln!(s, "grid_size = {}", self.grid_size);
        let _ = writeln!(s, "field_scale = {}", self.field_scale);
        s
    }

    pub fn from_text(text: &str) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("expected 'key = value', got '{trimmed}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |msg: String| Error::Parse { line, msg };
            match key {
                "nodes" => config.nodes = value.parse().map_err(|e| bad(format!("nodes: {e}")))?,
                "extent" => {
                    config.extent = value.parse().map_err(|e| bad(format!("extent: {e}")))?
                }
                "radio" => {
                    config.radio = if value == "variable" {
                        RadioModel::VariableRange
                    } else if let Some(r) = value.strip_prefix("fixed:") {
                        RadioModel::FixedRange {
                            radius: r.parse().map_err(|e| bad(format!("radio radius: {e}")))?,
                        }
                    } else {
                        return Err(bad(format!(
                            "radio must be variable or fixed:<radius>, got '{value}'"
                        )));
                    }
                }
                "schemes" | "scheme" => {
                    config.schemes = value
                        .split(',')
                        .map(|v| Scheme::parse(v.trim()))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| bad(e.to_string()))?;
                }
                "filter" => {
                    config.filter = match value {
                        "average" | "smoothing" => UpdateDesign::Smoothing,
                        "ortho" => UpdateDesign::Ortho,
                        other => return Err(bad(format!("unknown filter '{other}'"))),
                    }
                }
                "levels" => {
                    config.levels = value.parse().map_err(|e| bad(format!("levels: {e}")))?
                }
                "correlation" => {
                    config.correlation =
                        Correlation::parse(value).map_err(|e| bad(e.to_string()))?
                }
                "steps" => {
                    config.steps = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| bad(format!("steps: {e}")))?;
                }
                "epochs" => {
                    config.epochs = value.parse().map_err(|e| bad(format!("epochs: {e}")))?
                }
                "raw_bits" => {
                    config.raw_bits = value.parse().map_err(|e| bad(format!("raw_bits: {e}")))?
                }
                "e_elec" => {
                    config.energy.e_elec = value.parse().map_err(|e| bad(format!("e_elec: {e}")))?
                }
                "eps_amp" => {
                    config.energy.eps_amp =
                        value.parse().map_err(|e| bad(format!("eps_amp: {e}")))?
                }
                "trials" => {
                    config.trials = value.parse().map_err(|e| bad(format!("trials: {e}")))?
                }
                "master_seed" => {
                    config.master_seed = value
                        .parse()
                        .map_err(|e| bad(format!("master_seed: {e}")))?
                }
                "broadcast_policy" => {
                    config.broadcast_policy = match value {
                        "consumers" => BroadcastChargePolicy::ConsumersOnly,
                        "all" => BroadcastChargePolicy::AllInRange,
                        other => return Err(bad(format!("unknown broadcast policy '{other}'"))),
                    }
                }
                "grid_size" => {
                    config.grid_size = value.parse().map_err(|e| bad(format!("grid_size: {e}")))?
                }
                "field_scale" => {
                    config.field_scale = value
                        .parse()
                        .map_err(|e| bad(format!("field_scale: {e}")))?
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// One (trial, scheme, step) outcome.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub scheme: String,
    pub trial: usize,
    pub seed: u64,
    pub nodes: usize,
    pub correlation: String,
    pub radio: String,
    pub delta: f64,
    pub c_t: f64,
    pub c_r: f64,
    pub ratio: f64,
    pub snr_db: Option<f64>,
}

/// Per-(scheme, step) aggregate over trials.
#[derive(Debug, Clone)]
pub struct Summary {
    pub scheme: String,
    pub delta: f64,
    pub mean_ct: f64,
    pub mean_cr: f64,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub mean_snr: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<Summary>,
}

impl ResultTable {
    pub fn mean_ratio(&self, scheme: Scheme, delta: f64) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.scheme == scheme.name() && s.delta == delta)
            .map(|s| s.mean_ratio)
    }

    /// Recompute the aggregates from the per-trial rows.
    pub fn compute_summaries(rows: &[ResultRow]) -> Vec<Summary> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in rows {
            if !keys.iter().any(|(s, d)| *s == r.scheme && *d == r.delta) {
                keys.push((r.scheme.clone(), r.delta));
            }
        }
        keys.iter()
            .map(|(scheme, delta)| {
                let group: Vec<&ResultRow> = rows
                    .iter()
                    .filter(|r| r.scheme == *scheme && r.delta == *delta)
                    .collect();
                let n = group.len() as f64;
                let mean_ratio = group.iter().map(|r| r.ratio).sum::<f64>() / n;
                let var = group
                    .iter()
                    .map(|r| (r.ratio - mean_ratio) * (r.ratio - mean_ratio))
                    .sum::<f64>()
                    / n;
                let snrs: Vec<f64> = group.iter().filter_map(|r| r.snr_db).collect();
                Summary {
                    scheme: scheme.clone(),
                    delta: *delta,
                    mean_ct: group.iter().map(|r| r.c_t).sum::<f64>() / n,
                    mean_cr: group.iter().map(|r| r.c_r).sum::<f64>() / n,
                    mean_ratio,
                    std_ratio: var.sqrt(),
                    mean_snr: if snrs.is_empty() {
                        None
                    } else {
                        Some(snrs.iter().sum::<f64>() / snrs.len() as f64)
                    },
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("scheme,trial,seed,nodes,correlation,radio,delta,c_t,c_r,ratio,snr_db\n");
        let fmt_snr = |v: Option<f64>| match v {
            Some(x) if x.is_finite() => x.to_string(),
            Some(_) => "inf".to_string(),
            None => String::new(),
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.scheme,
                r.trial,
                r.seed,
                r.nodes,
                r.correlation,
                r.radio,
                r.delta,
                r.c_t,
                r.c_r,
                r.ratio,
                fmt_snr(r.snr_db)
            );
        }
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},mean,,,,,{},{},{},{},{}",
                s.scheme,
                s.delta,
                s.mean_ct,
                s.mean_cr,
                s.mean_ratio,
                fmt_snr(s.mean_snr)
            );
            let _ = writeln!(
                out,
                "{},stddev,,,,,{},,,{},",
                s.scheme, s.delta, s.std_ratio
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    let mut acc = 0xdead_beef_cafe_f00d_u64;
    for &p in parts {
        acc = splitmix(acc ^ p);
    }
    acc
}

/// A trial's network stack plus its epoch measurement matrix.
pub struct TrialSetup {
    pub seed: u64,
    pub network: Network,
    pub schedule: Schedule,
    pub causal: CausalSets,
    /// `epochs[e][node]` measurements, already rescaled.
    pub epochs: Vec<Vec<f64>>,
}

/// Build the network for one trial, resampling placements (deterministically)
/// until the graph is connected under the radio model.
pub fn build_trial_network(
    config: &ExperimentConfig,
    trial: usize,
) -> Result<(u64, Network, Schedule, CausalSets)> {
    let mut last_err = None;
    for attempt in 0..64u64 {
        let seed = mix(&[config.master_seed, trial as u64, attempt, 0xA110C]);
        match Network::generate(config.nodes, config.extent, config.radio, seed) {
            Ok(network) => {
                let schedule = Schedule::assign(&network);
                let causal = prune_for_decodability(
                    &derive_causal_sets(&network, &schedule),
                    &network,
                    &schedule,
                );
                return Ok((seed, network, schedule, causal));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Topology("network generation failed".into())))
}

/// Generate, sample, and rescale the epoch measurements for one trial.
pub fn build_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialSetup> {
    let (seed, network, schedule, causal) = build_trial_network(config, trial)?;
    let positions: Vec<crate::topology::Point> =
        network.nodes().map(|n| network.position(n)).collect();
    let corr_tag = match config.correlation {
        Correlation::High => 1,
        Correlation::Low => 2,
    };
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let spec = ArFieldSpec {
            rho: config.correlation.rho(),
            omega0_deg: config.correlation.omega0_deg(),
            size: config.grid_size,
            seed: mix(&[config.master_seed, trial as u64, epoch as u64, corr_tag]),
        };
        let field = ar2_field(&spec)?;
        let std = field.std_dev();
        let factor = if std > 0.0 {
            config.field_scale / std
        } else {
            1.0
        };
        let x: Vec<f64> = sample_field(&field, config.extent, &positions)?
            .into_iter()
            .map(|v| v * factor)
            .collect();
        epochs.push(x);
    }
    Ok(TrialSetup {
        seed,
        network,
        schedule,
        causal,
        epochs,
    })
}

fn build_for(
    config: &ExperimentConfig,
    scheme: Scheme,
    setup: &TrialSetup,
) -> Result<UnidirectionalTransform> {
    let weights = EdgeWeights::uniform(1.0);
    let covariance = if scheme == Scheme::Tklt {
        Some(spatial_covariance(
            &setup.network,
            config.correlation.rho(),
            config.correlation.omega0_deg(),
            config.extent,
            config.grid_size,
            config.field_scale * config.field_scale,
        ))
    } else {
        None
    };
    let opts = BuildOptions {
        design: config.filter,
        extra_levels: config.levels,
        weights: &weights,
        covariance: covariance.as_ref(),
    };
    build_scheme(
        scheme,
        &setup.network,
        &setup.schedule,
        &setup.causal,
        &opts,
    )
}

/// Per-node coefficient streams across the epoch set.
fn node_streams(t: &UnidirectionalTransform, setup: &TrialSetup) -> Result<Vec<Vec<f64>>> {
    let n = setup.network.len();
    let mut streams = vec![Vec::with_capacity(setup.epochs.len()); n];
    for x in &setup.epochs {
        let y = t.encode_epoch(x)?;
        for (i, v) in y.values.iter().enumerate() {
            streams[i].push(*v);
        }
    }
    Ok(streams)
}

/// Quantize and entropy-code the detail streams; raw and smooth streams cost
/// the full raw budget. Returns payloads and the per-node quantized symbols
/// (details only) for reconstruction.
fn code_streams(
    t: &UnidirectionalTransform,
    streams: &[Vec<f64>],
    delta: f64,
    epochs: usize,
    raw_bits: u32,
) -> Result<(Vec<Payload>, Vec<Option<Vec<i32>>>)> {
    let mut payloads = Vec::with_capacity(streams.len());
    let mut symbols = Vec::with_capacity(streams.len());
    for (i, stream) in streams.iter().enumerate() {
        let node = NodeId(i + 1);
        let class = t.class(node);
        if class.is_detail() {
            let q = quantize(stream, delta)?;
            let coded = ac_encode(&q)?;
            payloads.push(payload_bits(node, class, Some(&coded), epochs, raw_bits)?);
            symbols.push(Some(q));
        } else {
            payloads.push(payload_bits(node, class, None, epochs, raw_bits)?);
            symbols.push(None);
        }
    }
    Ok((payloads, symbols))
}

fn radio_name(radio: RadioModel) -> String {
    match radio {
        RadioModel::VariableRange => "variable".to_string(),
        RadioModel::FixedRange { radius } => format!("fixed:{radius}"),
    }
}

/// Lossless-mode comparison: detail streams quantized at step 1.0, cost
/// reduction against raw forwarding, one row per (trial, scheme).
pub fn run_lossless(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let setup = build_trial(config, trial)?;
        for &scheme in &config.schemes {
            let t = build_for(config, scheme, &setup)?;
            let streams = node_streams(&t, &setup)?;
            let (payloads, _) = code_streams(&t, &streams, 1.0, config.epochs, config.raw_bits)?;
            let raw_stream = config.epochs as u64 * config.raw_bits as u64;
            let report = simulate_epoch_cost(
                &t,
                &payloads,
                raw_stream,
                &config.energy,
                config.broadcast_policy,
            )?;
            rows.push(ResultRow {
                scheme: scheme.name().to_string(),
                trial,
                seed: setup.seed,
                nodes: config.nodes,
                correlation: config.correlation.name().to_string(),
                radio: radio_name(config.radio),
                delta: 1.0,
                c_t: report.total_joules,
                c_r: report.baseline_joules,
                ratio: report.ratio,
                snr_db: None,
            });
        }
    }
    let summaries = ResultTable::compute_summaries(&rows);
    Ok(ResultTable { rows, summaries })
}

/// Lossy sweep: per quantizer step, code the detail streams, reconstruct, and
/// report cost and SNR.
pub fn run_lossy(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let setup = build_trial(config, trial)?;
        for &scheme in &config.schemes {
            let t = build_for(config, scheme, &setup)?;
            let streams = node_streams(&t, &setup)?;
            for &delta in &config.steps {
                let (payloads, symbols) =
                    code_streams(&t, &streams, delta, config.epochs, config.raw_bits)?;
                let raw_stream = config.epochs as u64 * config.raw_bits as u64;
                let report = simulate_epoch_cost(
                    &t,
                    &payloads,
                    raw_stream,
                    &config.energy,
                    config.broadcast_policy,
                )?;

                // Reconstruct every epoch from dequantized details plus exact
                // smooth/raw coefficients.
                let n = setup.network.len();
                let dequantized: Vec<Option<Vec<f64>>> = symbols
                    .iter()
                    .map(|s| s.as_ref().map(|q| dequantize(q, delta).unwrap()))
                    .collect();
                let mut original = Vec::with_capacity(n * setup.epochs.len());
                let mut reconstructed = Vec::with_capacity(n * setup.epochs.len());
                for (e, x) in setup.epochs.iter().enumerate() {
                    let mut y_hat = Vec::with_capacity(n);
                    for i in 0..n {
                        match &dequantized[i] {
                            Some(d) => y_hat.push(d[e]),
                            None => y_hat.push(streams[i][e]),
                        }
                    }
                    let x_hat = t.decode_epoch(&y_hat)?;
                    original.extend_from_slice(x);
                    reconstructed.extend_from_slice(&x_hat);
                }
                let snr_db = snr(&original, &reconstructed)?;
                rows.push(ResultRow {
                    scheme: scheme.name().to_string(),
                    trial,
                    seed: setup.seed,
                    nodes: config.nodes,
                    correlation: config.correlation.name().to_string(),
                    radio: radio_name(config.radio),
                    delta,
                    c_t: report.total_joules,
                    c_r: report.baseline_joules,
                    ratio: report.ratio,
                    snr_db: Some(snr_db),
                });
            }
        }
    }
    let summaries = ResultTable::compute_summaries(&rows);
    Ok(ResultTable { rows, summaries })
}

/// Network bundle emitted by the `gen-net` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkBundle {
    pub network: NetworkJson,
    pub schedule: Vec<u32>,
    pub causal: Vec<Vec<NodeId>>,
    pub extended: Vec<Vec<NodeId>>,
}

pub fn generate_network_bundle(config: &ExperimentConfig, trial: usize) -> Result<NetworkBundle> {
    let (_, network, schedule, causal) = build_trial_network(config, trial)?;
    Ok(NetworkBundle {
        network: network.to_json(),
        schedule: schedule.slots().to_vec(),
        causal: network.nodes().map(|n| causal.causal(n).to_vec()).collect(),
        extended: network
            .nodes()
            .map(|n| causal.extended(n).to_vec())
            .collect(),
    })
}

/// One named invariant check outcome.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Run the invariant suite on freshly generated fixtures: schedule causality,
/// pruning predicates and idempotence, round-trip exactness, critical
/// sampling, invertibility, and unit determinants for the lifting family.
pub fn run_verification(nodes: usize, fixtures: usize, master_seed: u64) -> Vec<CheckResult> {
    let mut results: Vec<CheckResult> = Vec::new();
    let mut record = |name: &str, pass: bool, detail: String| {
        results.push(CheckResult {
            name: name.to_string(),
            pass,
            detail,
        });
    };

    let mut schedule_ok = true;
    let mut prune_ok = true;
    let mut idempotent_ok = true;
    let mut roundtrip_worst: f64 = 0.0;
    let mut sampling_ok = true;
    let mut invertible_ok = true;
    let mut det_worst: f64 = 0.0;
    let mut failures: Vec<String> = Vec::new();

    let weights = EdgeWeights::uniform(1.0);
    for k in 0..fixtures {
        let radio = if k % 2 == 0 {
            RadioModel::VariableRange
        } else {
            RadioModel::FixedRange { radius: 150.0 }
        };
        let config = ExperimentConfig {
            nodes,
            radio,
            master_seed: mix(&[master_seed, k as u64]),
            ..ExperimentConfig::default()
        };
        let (_, network, schedule, causal) = match build_trial_network(&config, k) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("fixture {k}: {e}"));
                continue;
            }
        };

        for n in network.nodes() {
            for d in network.descendants(n) {
                if schedule.slot(d) >= schedule.slot(n) {
                    schedule_ok = false;
                }
            }
            for &m in causal.causal(n) {
                if !(schedule.slot(m) < schedule.slot(n)
                    && schedule.parent_slot(&network, m) > schedule.slot(n))
                {
                    prune_ok = false;
                }
                for &a in causal.causal(n) {
                    if a != m && network.is_ancestor_of(a, m) {
                        prune_ok = false;
                    }
                }
            }
        }
        let again = prune_for_decodability(&causal, &network, &schedule);
        if again != causal {
            idempotent_ok = false;
        }

        let cov = spatial_covariance(&network, 0.99, 359.0, 600.0, 600, 1.0);
        let opts = BuildOptions {
            design: UpdateDesign::Ortho,
            extra_levels: 2,
            weights: &weights,
            covariance: Some(&cov),
        };
        for &scheme in Scheme::all() {
            let t = match build_scheme(scheme, &network, &schedule, &causal, &opts) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("fixture {k} {}: {e}", scheme.name()));
                    continue;
                }
            };
            if !t.verify_critical_sampling() {
                sampling_ok = false;
            }
            let report = t.verify_invertibility();
            if !report.ok {
                invertible_ok = false;
            }
            if matches!(
                scheme,
                Scheme::Lifting53 | Scheme::Haar | Scheme::HaarBroadcast
            ) {
                for (_, det) in report.dets {
                    det_worst = det_worst.max((det - 1.0).abs());
                }
            }
            let seed = mix(&[master_seed, k as u64, scheme as u64]);
            let x: Vec<f64> = (0..network.len())
                .map(|i| {
                    ((splitmix(seed ^ i as u64) >> 11) as f64 / (1u64 << 53) as f64) * 60.0 - 30.0
                })
                .collect();
            match t.encode_epoch(&x).and_then(|y| t.decode_epoch(&y.values)) {
                Ok(back) => {
                    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                    for i in 0..x.len() {
                        roundtrip_worst = roundtrip_worst.max((back[i] - x[i]).abs() / scale);
                    }
                }
                Err(e) => failures.push(format!("fixture {k} {}: {e}", scheme.name())),
            }
        }
    }

    record("schedule-causality", schedule_ok, String::new());
    record("pruning-predicates", prune_ok, String::new());
    record("pruning-idempotent", idempotent_ok, String::new());
    record(
        "roundtrip-exactness",
        roundtrip_worst < 1e-9 && failures.is_empty(),
        format!("worst relative error {roundtrip_worst:.3e}"),
    );
    record("critical-sampling", sampling_ok, String::new());
    record("invertibility", invertible_ok, String::new());
    record(
        "lifting-unit-determinants",
        det_worst < 1e-9,
        format!("worst |det-1| {det_worst:.3e}"),
    );
    if !failures.is_empty() {
        record("build-failures", false, failures.join("; "));
    }
    results
}
