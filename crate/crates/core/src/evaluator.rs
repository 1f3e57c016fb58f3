//! Closed-form latency, energy and quality of a complete plan, written
//! directly from the system model. This is the metric engine for baselines
//! and the independent oracle for the linear program objective.

use crate::workload::{AroId, Instance, ModelId, ReqId};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const BITS_PER_BYTE: f64 = 8.0;
const MS_PER_S: f64 = 1e3;

/// A full assignment of the semantic decision variables. Cache hits are
/// always re-derived from the caching sets, never trusted from the producer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    /// Compute node per request: an activated EC or the request's terminal.
    pub compute: Vec<usize>,
    /// Storage node per request: always an activated EC.
    pub storage: Vec<usize>,
    /// Index into the instance rate table, per request.
    pub rate_idx: Vec<usize>,
    /// Models rendered at ECs: (model, ec node).
    pub cached_models: BTreeSet<(ModelId, usize)>,
    /// Pre-cached AROs: (request, model, aro).
    pub cached_aros: BTreeSet<(ReqId, ModelId, AroId)>,
}

impl Plan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Latency split plus energy split plus quality for one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBreakdown {
    pub wireless_ms: f64,
    pub wired_ms: f64,
    pub processing_ms: f64,
    pub penalty_ms: f64,
    pub mobility_ms: f64,
    pub latency_ms: f64,
    pub server_j: f64,
    pub terminal_j: f64,
    pub energy_j: f64,
    pub quality: f64,
    pub quality_norm: f64,
}

impl MetricBreakdown {
    pub const CSV_HEADER: &'static str = "wireless_ms,wired_ms,processing_ms,penalty_ms,mobility_ms,latency_ms,server_j,terminal_j,energy_j,quality,quality_norm";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9},{:.9},{:.9},{:.6},{:.6}",
            self.wireless_ms,
            self.wired_ms,
            self.processing_ms,
            self.penalty_ms,
            self.mobility_ms,
            self.latency_ms,
            self.server_j,
            self.terminal_j,
            self.energy_j,
            self.quality,
            self.quality_norm
        )
    }
}

/// Constraint violations of a plan, named by family and indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    ComputeDomain { request: ReqId, node: usize },
    StorageDomain { request: ReqId, node: usize },
    RateDomain { request: ReqId, idx: usize },
    VmCapacity { ec: usize, used: u32, cap: u32 },
    CacheCapacity { ec: usize, bytes: f64, cap: f64 },
    AroOwnership { model: ModelId, aro: AroId, owners: usize },
    NoCaching { request: ReqId },
    OrphanAro { request: ReqId, model: ModelId, aro: AroId },
    UnknownTarget { request: ReqId, model: ModelId, aro: AroId },
    UnknownModel { model: ModelId },
    Quality { got: f64, need: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "plan shape: {s}"),
            Violation::ComputeDomain { request, node } => {
                write!(f, "compute placement of request {request} at invalid node {node}")
            }
            Violation::StorageDomain { request, node } => {
                write!(f, "storage placement of request {request} at invalid node {node}")
            }
            Violation::RateDomain { request, idx } => {
                write!(f, "rate index {idx} of request {request} outside the table")
            }
            Violation::VmCapacity { ec, used, cap } => {
                write!(f, "VM capacity at EC {ec}: {used} functions over {cap} slots")
            }
            Violation::CacheCapacity { ec, bytes, cap } => {
                write!(f, "cache capacity at EC {ec}: {bytes:.0} of {cap:.0} bytes")
            }
            Violation::AroOwnership { model, aro, owners } => {
                write!(f, "ARO {aro} of model {model} pre-cached by {owners} requests")
            }
            Violation::NoCaching { request } => {
                write!(f, "request {request} pre-caches nothing")
            }
            Violation::OrphanAro { request, model, aro } => {
                write!(f, "ARO {aro} of request {request} cached without model {model} rendered anywhere")
            }
            Violation::UnknownTarget { request, model, aro } => {
                write!(f, "request {request} does not target ARO {aro} in model {model}")
            }
            Violation::UnknownModel { model } => write!(f, "model {model} is not used by any request"),
            Violation::Quality { got, need } => {
                write!(f, "quality {got:.6} below the bound {need:.6}")
            }
        }
    }
}

fn check_shape(inst: &Instance, plan: &Plan) -> Result<()> {
    let n = inst.request_count();
    if plan.compute.len() != n || plan.storage.len() != n || plan.rate_idx.len() != n {
        return Err(Error::IncompletePlan(format!(
            "expected {n} placements, got {}/{}/{}",
            plan.compute.len(),
            plan.storage.len(),
            plan.rate_idx.len()
        )));
    }
    Ok(())
}

/// Cache hit of request `r` at node `j`: some model of the request is
/// rendered at `j` with every one of its target AROs pre-cached by `r`.
pub fn cache_hit(inst: &Instance, plan: &Plan, r: ReqId, j: usize) -> bool {
    inst.requests[r].models.iter().any(|m| {
        plan.cached_models.contains(&(m.id, j))
            && m.targets
                .iter()
                .all(|t| plan.cached_aros.contains(&(r, m.id, t.id)))
    })
}

fn any_model_at(inst: &Instance, plan: &Plan, r: ReqId, j: usize) -> bool {
    inst.requests[r]
        .models
        .iter()
        .any(|m| plan.cached_models.contains(&(m.id, j)))
}

/// Round trip from node `j` to the origin region server plus the
/// mobility-weighted trips to each destination region server, split into
/// (static part, mobility part).
fn region_trip(inst: &Instance, r: ReqId, j: usize) -> (f64, f64) {
    let req = &inst.requests[r];
    let topo = &inst.topology;
    let origin_server = topo.region_servers[topo.region_of[req.origin]];
    let fixed = topo.delay_between(j, origin_server);
    let moving = req
        .mobility
        .destinations
        .iter()
        .map(|&(k, u)| u * topo.delay_between(j, topo.region_servers[topo.region_of[k]]))
        .sum::<f64>();
    (fixed, moving)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatencyParts {
    pub wireless_ms: f64,
    pub wired_ms: f64,
    pub processing_ms: f64,
    pub penalty_ms: f64,
    pub mobility_ms: f64,
}

impl LatencyParts {
    pub fn total(&self) -> f64 {
        self.wireless_ms + self.wired_ms + self.processing_ms + self.penalty_ms + self.mobility_ms
    }
}

/// Overall latency of the plan, split into wireless, wired, processing,
/// penalty and mobility terms (all in ms).
pub fn evaluate_latency(inst: &Instance, plan: &Plan) -> Result<LatencyParts> {
    check_shape(inst, plan)?;
    let topo = &inst.topology;
    let mut parts = LatencyParts::default();

    for req in &inst.requests {
        let r = req.id;
        let cn = plan.compute[r];
        let sn = plan.storage[r];
        let rate = inst.rate_table.rate(plan.rate_idx[r]);
        let mobility_total = req.total_mobility();

        // Wireless uplink/downlink, before and (probability weighted) after
        // the mobility event. Result frames of every cached model are pushed
        // to every user of the origin region.
        let mut frame_bits = req.foreground_bits;
        for m in &req.models {
            let cached_somewhere = inst
                .ecs
                .iter()
                .any(|ec| plan.cached_models.contains(&(m.id, ec.node)));
            if cached_somewhere {
                for t in inst.co_region_requests(r) {
                    frame_bits += inst.result_bits(m.id, t);
                }
            }
        }
        parts.wireless_ms += MS_PER_S * (1.0 + mobility_total) * frame_bits / rate;

        // Computational function: reach it over the wire and run it.
        parts.wired_ms += topo.delay_between(req.origin, cn);
        let v_ms = if cn == req.terminal {
            MS_PER_S * inst.omega_fore * req.foreground_bits / req.terminal_cpu_hz / req.terminal_portion
        } else {
            let ec = &inst.ecs[inst.ec_index(cn).ok_or(Error::UnknownNode(cn))?];
            MS_PER_S * inst.omega_fore * req.foreground_bits / ec.vm_cpu_hz
        };
        parts.processing_ms += v_ms;

        // Hand-over to the storage function and run the matching there.
        parts.wired_ms += topo.delay_between(cn, sn);
        let ec = &inst.ecs[inst.ec_index(sn).ok_or(Error::UnknownNode(sn))?];
        let mut content_bits = req.pointer_bits;
        let mut models_here = 0usize;
        for m in &req.models {
            if plan.cached_models.contains(&(m.id, sn)) {
                models_here += 1;
                content_bits += m.background_bits;
                for t in &m.targets {
                    if plan.cached_aros.contains(&(r, m.id, t.id)) {
                        content_bits += t.size_bytes * BITS_PER_BYTE;
                    }
                }
            }
        }
        parts.processing_ms += MS_PER_S * inst.omega_back * content_bits / ec.vm_cpu_hz;

        // Region synchronization: origin region to the access router, the
        // mobility-weighted destination links, and one round trip per model
        // rendered at the storage node.
        let origin_server = topo.region_servers[topo.region_of[req.origin]];
        parts.wired_ms += topo.delay_between(origin_server, req.origin);
        parts.mobility_ms += req
            .mobility
            .destinations
            .iter()
            .map(|&(k, u)| u * topo.delay_between(topo.region_servers[topo.region_of[k]], k))
            .sum::<f64>();
        let (trip_fixed, trip_moving) = region_trip(inst, r, sn);
        parts.wired_ms += models_here as f64 * trip_fixed;
        parts.mobility_ms += models_here as f64 * trip_moving;

        // Cache miss: redirection penalty, plus the wired fetch from the
        // region server when the storage node holds no model at all.
        if !cache_hit(inst, plan, r, sn) {
            parts.penalty_ms += inst.miss_penalty_ms;
        }
        if models_here == 0 {
            parts.wired_ms += trip_fixed;
            parts.mobility_ms += trip_moving;
        }

        // Reaching the computational function from the mobility destination.
        parts.mobility_ms += req
            .mobility
            .destinations
            .iter()
            .map(|&(k, u)| u * topo.delay_between(k, cn))
            .sum::<f64>();
    }
    Ok(parts)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyParts {
    pub server_j: f64,
    pub terminal_j: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.server_j + self.terminal_j
    }
}

/// Total consumed energy: transmission plus CPU at the serving ECs, plus the
/// slowed-down terminal processing when the computational function runs
/// there. Redirection after a miss consumes no energy.
pub fn evaluate_energy(inst: &Instance, plan: &Plan) -> Result<EnergyParts> {
    check_shape(inst, plan)?;
    let mut parts = EnergyParts::default();

    for req in &inst.requests {
        let r = req.id;
        let cn = plan.compute[r];
        let sn = plan.storage[r];
        let rate = inst.rate_table.rate(plan.rate_idx[r]);

        // Uplink energy at the selected rate.
        let power = inst.links[r].transmit_power_w(rate)?;
        let tran_s = (req.foreground_bits + req.pointer_bits) / rate;
        parts.server_j += power * tran_s;

        // Matching and content checking at the storage EC.
        let ec = &inst.ecs[inst.ec_index(sn).ok_or(Error::UnknownNode(sn))?];
        let mut content_bits = req.pointer_bits;
        for m in &req.models {
            if plan.cached_models.contains(&(m.id, sn)) {
                content_bits += m.background_bits;
                for t in &m.targets {
                    if plan.cached_aros.contains(&(r, m.id, t.id)) {
                        content_bits += t.size_bytes * BITS_PER_BYTE;
                    }
                }
            }
        }
        let w_s = inst.omega_back * content_bits / ec.vm_cpu_hz;
        parts.server_j += ec.chip_coefficient * ec.vm_cpu_hz * ec.vm_cpu_hz * w_s;

        // Computational function: on an EC it bills the server, on the
        // terminal it bills the device with the portion slow-down.
        if cn == req.terminal {
            let v_s = inst.omega_fore * req.foreground_bits / req.terminal_cpu_hz;
            parts.terminal_j += inst.chip_coefficient()
                * req.terminal_cpu_hz
                * req.terminal_cpu_hz
                * (v_s / req.terminal_portion);
        } else {
            let ec = &inst.ecs[inst.ec_index(cn).ok_or(Error::UnknownNode(cn))?];
            let v_s = inst.omega_fore * req.foreground_bits / ec.vm_cpu_hz;
            parts.server_j += ec.chip_coefficient * ec.vm_cpu_hz * ec.vm_cpu_hz * v_s;
        }
    }
    Ok(parts)
}

/// Perception quality: one SSIM score per target ARO at the selected rate.
pub fn evaluate_quality(inst: &Instance, plan: &Plan) -> Result<(f64, f64)> {
    check_shape(inst, plan)?;
    let mut q = 0.0;
    for req in &inst.requests {
        let idx = plan.rate_idx[req.id];
        if idx >= inst.rate_table.len() {
            return Err(Error::UnknownRate(idx as f64));
        }
        q += req.target_count() as f64 * inst.rate_table.ssim_at(idx);
    }
    Ok((q, q / quality_max(inst)))
}

/// The quality attained when every request selects the maximum rate.
pub fn quality_max(inst: &Instance) -> f64 {
    inst.requests
        .iter()
        .map(|r| r.target_count() as f64 * inst.rate_table.max_ssim())
        .sum()
}

/// Full metric breakdown of one plan.
pub fn evaluate(inst: &Instance, plan: &Plan) -> Result<MetricBreakdown> {
    let lat = evaluate_latency(inst, plan)?;
    let en = evaluate_energy(inst, plan)?;
    let (q, q_norm) = evaluate_quality(inst, plan)?;
    Ok(MetricBreakdown {
        wireless_ms: lat.wireless_ms,
        wired_ms: lat.wired_ms,
        processing_ms: lat.processing_ms,
        penalty_ms: lat.penalty_ms,
        mobility_ms: lat.mobility_ms,
        latency_ms: lat.total(),
        server_j: en.server_j,
        terminal_j: en.terminal_j,
        energy_j: en.total(),
        quality: q,
        quality_norm: q_norm,
    })
}

/// Number of requests whose selected rate needs more than one watt of
/// transmit power; reported, never clamped.
pub fn over_watt_count(inst: &Instance, plan: &Plan) -> Result<usize> {
    check_shape(inst, plan)?;
    let mut n = 0;
    for req in &inst.requests {
        let rate = inst.rate_table.rate(plan.rate_idx[req.id]);
        if inst.links[req.id].transmit_power_w(rate)? > 1.0 {
            n += 1;
        }
    }
    Ok(n)
}

/// Checks a plan against every constraint family; empty means feasible.
pub fn check_feasibility(inst: &Instance, plan: &Plan, q_bound: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.request_count();
    if plan.compute.len() != n || plan.storage.len() != n || plan.rate_idx.len() != n {
        out.push(Violation::Shape(format!(
            "expected {n} placements, got {}/{}/{}",
            plan.compute.len(),
            plan.storage.len(),
            plan.rate_idx.len()
        )));
        return out;
    }

    let model_pool: BTreeSet<ModelId> = inst
        .requests
        .iter()
        .flat_map(|r| r.models.iter().map(|m| m.id))
        .collect();

    for req in &inst.requests {
        let r = req.id;
        let cn = plan.compute[r];
        let sn = plan.storage[r];
        if cn != req.terminal && inst.ec_index(cn).is_none() {
            out.push(Violation::ComputeDomain { request: r, node: cn });
        }
        if inst.ec_index(sn).is_none() {
            out.push(Violation::StorageDomain { request: r, node: sn });
        }
        if plan.rate_idx[r] >= inst.rate_table.len() {
            out.push(Violation::RateDomain { request: r, idx: plan.rate_idx[r] });
        }
    }

    // Virtual machine limitation per EC.
    for ec in &inst.ecs {
        let used = plan
            .compute
            .iter()
            .filter(|&&c| c == ec.node)
            .count()
            + plan.storage.iter().filter(|&&s| s == ec.node).count();
        if used as u32 > ec.vm_count {
            out.push(Violation::VmCapacity {
                ec: ec.node,
                used: used as u32,
                cap: ec.vm_count,
            });
        }
    }

    // Pre-caching rules: at most one owner per (model, ARO), at least one
    // pre-cached pair per request, owned AROs only inside rendered models.
    let mut owners: std::collections::BTreeMap<(ModelId, AroId), usize> = Default::default();
    for &(_, s, l) in &plan.cached_aros {
        *owners.entry((s, l)).or_insert(0) += 1;
    }
    for (&(s, l), &count) in &owners {
        if count > 1 {
            out.push(Violation::AroOwnership { model: s, aro: l, owners: count });
        }
    }
    for req in &inst.requests {
        let r = req.id;
        let owned: Vec<&(ReqId, ModelId, AroId)> =
            plan.cached_aros.iter().filter(|(rr, _, _)| *rr == r).collect();
        if owned.is_empty() {
            out.push(Violation::NoCaching { request: r });
        }
        for &&(_, s, l) in &owned {
            let model = req.models.iter().find(|m| m.id == s);
            match model {
                None => out.push(Violation::UnknownTarget { request: r, model: s, aro: l }),
                Some(m) => {
                    if !m.targets.iter().any(|t| t.id == l) {
                        out.push(Violation::UnknownTarget { request: r, model: s, aro: l });
                    } else if !inst
                        .ecs
                        .iter()
                        .any(|ec| plan.cached_models.contains(&(s, ec.node)))
                    {
                        out.push(Violation::OrphanAro { request: r, model: s, aro: l });
                    }
                }
            }
        }
    }

    for &(s, j) in &plan.cached_models {
        if !model_pool.contains(&s) {
            out.push(Violation::UnknownModel { model: s });
        }
        if inst.ec_index(j).is_none() {
            out.push(Violation::StorageDomain { request: usize::MAX, node: j });
        }
    }

    // Cache capacity: every owned ARO occupies space wherever its model is
    // rendered.
    for ec in &inst.ecs {
        let mut bytes = 0.0;
        for &(r, s, l) in &plan.cached_aros {
            if plan.cached_models.contains(&(s, ec.node)) {
                if let Some(m) = inst.requests.get(r).and_then(|req| req.models.iter().find(|m| m.id == s)) {
                    if let Some(t) = m.targets.iter().find(|t| t.id == l) {
                        bytes += t.size_bytes;
                    }
                }
            }
        }
        if bytes > ec.cache_bytes + 1e-6 {
            out.push(Violation::CacheCapacity {
                ec: ec.node,
                bytes,
                cap: ec.cache_bytes,
            });
        }
    }

    // Perception quality floor.
    if out.iter().all(|v| !matches!(v, Violation::RateDomain { .. } | Violation::Shape(_))) {
        if let Ok((q, _)) = evaluate_quality(inst, plan) {
            let need = q_bound * quality_max(inst);
            if q + 1e-9 < need {
                out.push(Violation::Quality { got: q, need });
            }
        }
    }

    out
}

impl Instance {
    /// Chip coefficient used for terminal energy.
    pub fn chip_coefficient(&self) -> f64 {
        self.ecs
            .first()
            .map(|e| e.chip_coefficient)
            .unwrap_or(1e-18)
    }
}
