//! Request, model and EC parameter generation: everything an optimization
//! instance needs, drawn once per seed and frozen.

use crate::radio::{sample_gain_sq, Interferer, RadioLink, RateTable};
use crate::topology::{MobilityProfile, NetworkTopology, NodeId, TopologyConfig};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type ReqId = usize;
pub type ModelId = usize;
pub type AroId = usize;

const BITS_PER_BYTE: f64 = 8.0;
const MB: f64 = 1e6;

/// Size of one decoded-and-compressed foreground frame in bits.
pub fn foreground_bits(width: u32, height: u32, bits_per_pixel: u32) -> f64 {
    let raw = width as f64 * height as f64 * bits_per_pixel as f64;
    let bits = raw * (5.0 / 9.0) * 1e-3;
    if bits < 8.0 {
        log::warn!("foreground frame of {bits} bits is below one byte");
    }
    bits
}

/// A target ARO of one request inside one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AroTarget {
    pub id: AroId,
    pub size_bytes: f64,
}

/// One background model as seen by one request: its own background and
/// result-frame sizes plus the target AROs embedded in the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    pub background_bits: f64,
    pub result_bits: f64,
    pub targets: Vec<AroTarget>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Request {
    pub id: ReqId,
    /// Initial access router f(r).
    pub origin: NodeId,
    /// Terminal node j_r.
    pub terminal: NodeId,
    pub foreground_bits: f64,
    pub pointer_bits: f64,
    pub mobility: MobilityProfile,
    /// The model set S_r with per-model target AROs L_rs.
    pub models: Vec<ModelSpec>,
    pub terminal_cpu_hz: f64,
    /// CPU portion the service may consume on the terminal.
    pub terminal_portion: f64,
    pub terminal_cache_bytes: f64,
}

impl Request {
    /// Total number of target AROs of the request (the model target sets are
    /// disjoint by construction).
    pub fn target_count(&self) -> usize {
        self.models.iter().map(|m| m.targets.len()).sum()
    }

    pub fn total_mobility(&self) -> f64 {
        self.mobility.total_probability()
    }
}

/// Remaining resources of one activated EC.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EcProfile {
    pub node: NodeId,
    pub vm_count: u32,
    /// Effective per-VM CPU frequency in Hz (base frequency times the core
    /// portion granted to one VM).
    pub vm_cpu_hz: f64,
    pub cache_bytes: f64,
    pub chip_coefficient: f64,
}

/// Whether the downlink frame term sums result frames over every co-region
/// user or only the request itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharedFrames {
    All,
    SelfOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub path_loss_exponent: f64,
    /// Base-station transmit power used for interferers (20 dBm).
    pub interferer_power_w: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub rates_mbps: Vec<f64>,
    pub ssim: Vec<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let nominal = RateTable::nominal();
        RadioConfig {
            bandwidth_hz: 180e3,
            noise_w: 1e-11,
            path_loss_exponent: 4.0,
            interferer_power_w: 0.1,
            cell_radius_m: 250.0,
            min_distance_m: 10.0,
            rates_mbps: nominal.rates().iter().map(|r| r / 1e6).collect(),
            ssim: (0..nominal.len()).map(|i| nominal.ssim_at(i)).collect(),
        }
    }
}

impl RadioConfig {
    pub fn rate_table(&self) -> Result<RateTable> {
        RateTable::new(self.rates_mbps.iter().map(|m| m * 1e6).collect(), self.ssim.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadConfig {
    pub requests: usize,
    pub vms_per_ec: u32,
    pub ec_freq_ghz: [f64; 2],
    /// CPU core portion granted to one VM.
    pub vm_core_portion: f64,
    pub ec_cache_mb: [f64; 2],
    pub terminal_freq_ghz: f64,
    pub terminal_cache_mb: [f64; 2],
    pub terminal_portion: [f64; 2],
    pub models_per_region: usize,
    pub aros_per_model: usize,
    pub targets_per_model: [usize; 2],
    /// ARO sizes are uniform on (0, aro_size_mb_max].
    pub aro_size_mb_max: f64,
    pub background_mb: [f64; 2],
    /// Result frame bits = foreground bits times this factor (assumed; the
    /// compressed final-frame size has no published range).
    pub result_size_factor: f64,
    pub pointer_bits: f64,
    pub frame_width: u32,
    pub frame_height: u32,
    pub bits_per_pixel: u32,
    pub foreground_multiplier: f64,
    pub background_multiplier: f64,
    /// Computation load of foreground interaction, cycles/bit.
    pub omega_fore: f64,
    /// Computation load of background content checking, cycles/bit.
    pub omega_back: f64,
    pub chip_coefficient: f64,
    pub cache_miss_penalty_ms: f64,
    pub total_mobility_probability: f64,
    /// Optional weights over the adjacent destinations; uniform when empty.
    pub mobility_split: Vec<f64>,
    pub shared_region_frames: SharedFrames,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            requests: 30,
            vms_per_ec: 14,
            ec_freq_ghz: [4.0, 8.0],
            vm_core_portion: 0.5,
            ec_cache_mb: [100.0, 400.0],
            terminal_freq_ghz: 1.0,
            terminal_cache_mb: [0.0, 100.0],
            terminal_portion: [0.3, 0.5],
            models_per_region: 4,
            aros_per_model: 3,
            targets_per_model: [1, 2],
            aro_size_mb_max: 10.0,
            background_mb: [0.1, 0.5],
            result_size_factor: 1.0,
            pointer_bits: 0.0,
            frame_width: 1280,
            frame_height: 720,
            bits_per_pixel: 8,
            foreground_multiplier: 1.0,
            background_multiplier: 1.0,
            omega_fore: 4.0,
            omega_back: 10.0,
            chip_coefficient: 1e-18,
            cache_miss_penalty_ms: 25.0,
            total_mobility_probability: 1.0,
            mobility_split: Vec::new(),
            shared_region_frames: SharedFrames::All,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceConfig {
    pub topology: TopologyConfig,
    pub radio: RadioConfig,
    pub workload: WorkloadConfig,
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.workload;
        if w.requests == 0 {
            return Err(Error::Config("at least one request required".into()));
        }
        if w.models_per_region == 0 {
            return Err(Error::Config("at least one model per request required".into()));
        }
        if w.aros_per_model == 0 {
            return Err(Error::Config("models must embed at least one ARO".into()));
        }
        if w.targets_per_model[0] == 0 || w.targets_per_model[0] > w.targets_per_model[1] {
            return Err(Error::Config("invalid target range".into()));
        }
        if w.targets_per_model[1] > w.aros_per_model {
            return Err(Error::Config("cannot target more AROs than a model embeds".into()));
        }
        if !(0.0..=1.0).contains(&w.total_mobility_probability) {
            return Err(Error::Config("total mobility probability outside [0,1]".into()));
        }
        if w.aro_size_mb_max <= 0.0 {
            return Err(Error::Config("ARO size bound must be positive".into()));
        }
        if w.vm_core_portion <= 0.0 || w.vm_core_portion > 1.0 {
            return Err(Error::Config("VM core portion outside (0,1]".into()));
        }
        if w.vms_per_ec == 0 {
            return Err(Error::Config("ECs need at least one VM".into()));
        }
        self.radio.rate_table()?;
        Ok(())
    }
}

/// One frozen optimization problem: topology, workload, radio and cost
/// parameters. Immutable after generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub schema_version: u32,
    pub seed: u64,
    pub topology: NetworkTopology,
    pub requests: Vec<Request>,
    /// Profiles of the activated ECs, aligned with `topology.activated_ecs`.
    pub ecs: Vec<EcProfile>,
    pub rate_table: RateTable,
    /// Uplink of each request, aligned with `requests`.
    pub links: Vec<RadioLink>,
    pub omega_fore: f64,
    pub omega_back: f64,
    pub miss_penalty_ms: f64,
    pub shared_frames: SharedFrames,
}

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

impl Instance {
    pub fn request_count(&self) -> usize {
        self.requests.len()
    }

    pub fn ec_count(&self) -> usize {
        self.ecs.len()
    }

    /// Index into `ecs` for an activated EC node.
    pub fn ec_index(&self, node: NodeId) -> Option<usize> {
        self.ecs.iter().position(|e| e.node == node)
    }

    /// Requests sharing the origin region of `r`, including `r` itself,
    /// honoring the shared-frames policy.
    pub fn co_region_requests(&self, r: ReqId) -> Vec<ReqId> {
        match self.shared_frames {
            SharedFrames::SelfOnly => vec![r],
            SharedFrames::All => {
                let region = self.topology.region_of[self.requests[r].origin];
                self.requests
                    .iter()
                    .filter(|t| self.topology.region_of[t.origin] == region)
                    .map(|t| t.id)
                    .collect()
            }
        }
    }

    /// Result-frame bits of model `s` for request `t`, zero when `t` does not
    /// use the model.
    pub fn result_bits(&self, s: ModelId, t: ReqId) -> f64 {
        self.requests[t]
            .models
            .iter()
            .find(|m| m.id == s)
            .map(|m| m.result_bits)
            .unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut inst: Instance = serde_json::from_str(text)?;
        if inst.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported instance schema version {}",
                inst.schema_version
            )));
        }
        inst.topology.finish()?;
        inst.validate()?;
        Ok(inst)
    }

    /// Checks every invariant a generated instance must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.requests.is_empty() || self.ecs.is_empty() {
            return Err(Error::Generation("empty instance".into()));
        }
        for req in &self.requests {
            if req.models.is_empty() {
                return Err(Error::Generation(format!("request {} has no models", req.id)));
            }
            for m in &req.models {
                if m.targets.is_empty() {
                    return Err(Error::Generation(format!(
                        "request {} model {} has no target AROs",
                        req.id, m.id
                    )));
                }
                if m.background_bits <= 0.0 {
                    return Err(Error::Generation("background size must be positive".into()));
                }
            }
            if !(0.30..=0.50).contains(&req.terminal_portion) {
                return Err(Error::Generation("terminal portion outside [0.30, 0.50]".into()));
            }
            req.mobility.validate(&self.topology)?;
        }
        for ec in &self.ecs {
            if ec.vm_count == 0 || ec.vm_cpu_hz <= 0.0 || ec.cache_bytes < 0.0 || ec.chip_coefficient <= 0.0 {
                return Err(Error::Generation(format!("invalid EC profile at node {}", ec.node)));
            }
        }
        for link in &self.links {
            link.validate()?;
        }
        Ok(())
    }
}

fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..range[1])
    }
}

/// Generates the frozen instance for `config` and `seed`. Identical inputs
/// produce byte-identical instances.
pub fn generate_instance(config: &InstanceConfig, seed: u64) -> Result<Instance> {
    config.validate()?;
    let w = &config.workload;

    let mut topo_rng = stream(seed, 0);
    let topology = NetworkTopology::build_balanced(&config.topology, w.requests, &mut topo_rng)?;

    let mut ec_rng = stream(seed, 1);
    let ecs: Vec<EcProfile> = topology
        .activated_ecs
        .iter()
        .map(|&node| {
            let base_hz = uniform(&mut ec_rng, w.ec_freq_ghz) * 1e9;
            EcProfile {
                node,
                vm_count: w.vms_per_ec,
                vm_cpu_hz: base_hz * w.vm_core_portion,
                cache_bytes: uniform(&mut ec_rng, w.ec_cache_mb) * MB,
                chip_coefficient: w.chip_coefficient,
            }
        })
        .collect();

    // Global model pool, one block of models per region; every ARO is
    // embedded in exactly one model and sized once.
    let regions = config.topology.regions;
    let models_total = regions * w.models_per_region;
    let mut size_rng = stream(seed, 2);
    let aro_sizes: Vec<f64> = (0..models_total * w.aros_per_model)
        .map(|_| (1.0 - size_rng.random::<f64>()) * w.aro_size_mb_max * MB)
        .collect();

    let fore_bits = foreground_bits(w.frame_width, w.frame_height, w.bits_per_pixel) * w.foreground_multiplier;
    let result_bits = fore_bits * w.result_size_factor;
    if w.result_size_factor == 1.0 {
        log::debug!("result frame size assumed equal to foreground size");
    }

    // Deal one reserved (model, ARO) pair per request within its region so
    // the at-most-once pre-caching rule always admits a feasible assignment.
    let mut region_rank = vec![0usize; regions];
    let pairs_per_region = w.models_per_region * w.aros_per_model;

    let mut req_rng = stream(seed, 3);
    let mut target_rng = stream(seed, 4);
    let mut requests = Vec::with_capacity(w.requests);
    for r in 0..w.requests {
        let origin = topology.terminal_attach[r];
        let terminal = topology.terminal_nodes[r];
        let region = topology.region_of[origin];

        let rank = region_rank[region];
        region_rank[region] += 1;
        if rank >= pairs_per_region {
            return Err(Error::Generation(format!(
                "region {region} has {} co-located requests but only {pairs_per_region} cacheable pairs",
                rank + 1
            )));
        }
        let reserved_model = rank / w.aros_per_model;
        let reserved_aro = rank % w.aros_per_model;

        let mut models = Vec::with_capacity(w.models_per_region);
        for m in 0..w.models_per_region {
            let model_id = region * w.models_per_region + m;
            let n_targets = if w.targets_per_model[0] == w.targets_per_model[1] {
                w.targets_per_model[0]
            } else {
                target_rng.random_range(w.targets_per_model[0]..=w.targets_per_model[1])
            };
            let mut picks: Vec<usize> = (0..w.aros_per_model).collect();
            picks.shuffle(&mut target_rng);
            picks.truncate(n_targets);
            if m == reserved_model && !picks.contains(&reserved_aro) {
                picks[0] = reserved_aro;
            }
            picks.sort_unstable();
            let targets = picks
                .into_iter()
                .map(|a| {
                    let id = model_id * w.aros_per_model + a;
                    AroTarget {
                        id,
                        size_bytes: aro_sizes[id],
                    }
                })
                .collect();
            models.push(ModelSpec {
                id: model_id,
                background_bits: uniform(&mut req_rng, w.background_mb) * MB * BITS_PER_BYTE * w.background_multiplier,
                result_bits,
                targets,
            });
        }

        let mut destinations: Vec<NodeId> = topology.adjacent_access_routers(origin);
        destinations.sort_unstable();
        if destinations.is_empty() && w.total_mobility_probability > 0.0 {
            return Err(Error::Generation(format!(
                "origin {origin} has no adjacent access routers for the configured mobility"
            )));
        }
        let weights: Vec<f64> = if w.mobility_split.is_empty() {
            vec![1.0; destinations.len()]
        } else {
            destinations
                .iter()
                .enumerate()
                .map(|(i, _)| w.mobility_split.get(i).copied().unwrap_or(0.0))
                .collect()
        };
        let weight_sum: f64 = weights.iter().sum();
        let mobility = MobilityProfile {
            origin,
            destinations: destinations
                .iter()
                .zip(&weights)
                .map(|(&k, &wk)| (k, w.total_mobility_probability * wk / weight_sum.max(f64::MIN_POSITIVE)))
                .collect(),
        };

        requests.push(Request {
            id: r,
            origin,
            terminal,
            foreground_bits: fore_bits,
            pointer_bits: w.pointer_bits,
            mobility,
            models,
            terminal_cpu_hz: w.terminal_freq_ghz * 1e9,
            terminal_portion: uniform(&mut req_rng, w.terminal_portion),
            terminal_cache_bytes: uniform(&mut req_rng, w.terminal_cache_mb) * MB,
        });
    }

    // Frozen uplinks: the serving cell is the origin access router; every
    // other activated EC interferes at a tree-distance derived range.
    let mut radio_rng = stream(seed, 5);
    let links = requests
        .iter()
        .map(|req| {
            let interferers = topology
                .activated_ecs
                .iter()
                .filter(|&&ec| ec != req.origin)
                .map(|&ec| {
                    let hops = topology.hops_between(req.origin, ec);
                    Interferer {
                        power_w: config.radio.interferer_power_w,
                        gain_sq: sample_gain_sq(&mut radio_rng),
                        distance_m: config.radio.cell_radius_m * (1.0 + hops as f64),
                    }
                })
                .collect();
            RadioLink {
                bandwidth_hz: config.radio.bandwidth_hz,
                noise_w: config.radio.noise_w,
                path_loss_exponent: config.radio.path_loss_exponent,
                distance_m: uniform(
                    &mut radio_rng,
                    [config.radio.min_distance_m, config.radio.cell_radius_m],
                ),
                gain_sq: sample_gain_sq(&mut radio_rng).max(1e-6),
                interferers,
            }
        })
        .collect();

    let inst = Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        seed,
        topology,
        requests,
        ecs,
        rate_table: config.radio.rate_table()?,
        links,
        omega_fore: w.omega_fore,
        omega_back: w.omega_back,
        miss_penalty_ms: w.cache_miss_penalty_ms,
        shared_frames: w.shared_region_frames,
    };
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_coefficients_give_4096_bits() {
        // 1280 * 720 * 8 * 5/9 * 1e-3, checked by hand: 7_372_800 * 5/9 =
        // 4_096_000, scaled to 4096.
        assert!((foreground_bits(1280, 720, 8) - 4096.0).abs() < 1e-9);
    }

    #[test]
    fn frame_bits_scale_linearly() {
        assert!((foreground_bits(2560, 720, 8) - 2.0 * foreground_bits(1280, 720, 8)).abs() < 1e-9);
        let tiny = foreground_bits(1, 1, 9);
        assert!((tiny - 0.005).abs() < 1e-12);
    }

    #[test]
    fn default_instance_matches_nominal_parameters() {
        let inst = generate_instance(&InstanceConfig::default(), 11).unwrap();
        assert_eq!(inst.request_count(), 30);
        assert_eq!(inst.ec_count(), 6);
        for ec in &inst.ecs {
            assert_eq!(ec.vm_count, 14);
            // Base 4-8 GHz split in half per VM.
            assert!(ec.vm_cpu_hz >= 2e9 && ec.vm_cpu_hz <= 4e9);
            assert!(ec.cache_bytes >= 100.0 * MB && ec.cache_bytes <= 400.0 * MB);
        }
        for req in &inst.requests {
            assert!(req.terminal_cpu_hz == 1e9);
            assert!((0.30..=0.50).contains(&req.terminal_portion));
            assert!(req.terminal_cache_bytes <= 100.0 * MB);
            assert_eq!(req.models.len(), 4);
            for m in &req.models {
                assert!(!m.targets.is_empty() && m.targets.len() <= 4);
                for t in &m.targets {
                    assert!(t.size_bytes > 0.0 && t.size_bytes <= 10.0 * MB);
                }
            }
        }
        assert_eq!(inst.omega_fore, 4.0);
        assert_eq!(inst.omega_back, 10.0);
        assert_eq!(inst.miss_penalty_ms, 25.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(&InstanceConfig::default(), 5).unwrap();
        let b = generate_instance(&InstanceConfig::default(), 5).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate_instance(&InstanceConfig::default(), 6).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn aro_sizes_uniform_on_range() {
        let mut cfg = InstanceConfig::default();
        cfg.workload.requests = 40;
        cfg.workload.aros_per_model = 7;
        let mut sizes = Vec::new();
        let mut seed = 0;
        while sizes.len() < 1000 {
            let inst = generate_instance(&cfg, seed).unwrap();
            for req in &inst.requests {
                for m in &req.models {
                    for t in &m.targets {
                        sizes.push(t.size_bytes);
                    }
                }
            }
            seed += 1;
        }
        sizes.truncate(1000);
        let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
        assert!(sizes.iter().all(|&s| s > 0.0 && s <= 10.0 * MB));
        assert!((mean - 5.0 * MB).abs() < 0.5 * MB, "mean {mean}");
    }

    #[test]
    fn mobility_sums_to_configured_total() {
        for total in [0.0, 0.4, 1.0] {
            let mut cfg = InstanceConfig::default();
            cfg.workload.total_mobility_probability = total;
            let inst = generate_instance(&cfg, 3).unwrap();
            for req in &inst.requests {
                assert!((req.total_mobility() - total).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_models_rejected() {
        let mut cfg = InstanceConfig::default();
        cfg.workload.models_per_region = 0;
        assert!(generate_instance(&cfg, 1).is_err());
        let mut cfg = InstanceConfig::default();
        cfg.workload.requests = 0;
        assert!(generate_instance(&cfg, 1).is_err());
    }

    #[test]
    fn reserved_pairs_are_distinct_within_regions() {
        let inst = generate_instance(&InstanceConfig::default(), 17).unwrap();
        // Count available pairs per request; a distinct-ownership assignment
        // exists because ranks deal distinct reserved pairs.
        for region in 0..inst.topology.region_servers.len() {
            let co: Vec<&Request> = inst
                .requests
                .iter()
                .filter(|r| inst.topology.region_of[r.origin] == region)
                .collect();
            let pairs: usize = 4 * 3;
            assert!(co.len() <= pairs);
        }
    }

    #[test]
    fn instance_json_round_trips() {
        let inst = generate_instance(&InstanceConfig::default(), 23).unwrap();
        let json = inst.to_json().unwrap();
        let back = Instance::from_json(&json).unwrap();
        assert_eq!(json, back.to_json().unwrap());
        assert_eq!(back.topology.hop_count(0, 1).unwrap(), inst.topology.hop_count(0, 1).unwrap());
    }
}
