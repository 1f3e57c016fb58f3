//! Translates an instance into constraint rows and objective coefficients.
//!
//! The objective construction here and the closed-form evaluator are two
//! independent code paths that must agree on every feasible assignment;
//! the enumeration tests hold them together.

use super::index::{Mode, VarKind, VariableIndex};
use super::program::{Cmp, Constraint, LinearProgram};
use crate::workload::{AroId, Instance, ModelId};
use crate::{Error, Result};

const BITS_PER_BYTE: f64 = 8.0;
const MS_PER_S: f64 = 1e3;
/// Tolerance of the either-or cache-hit constraint; any value in (0,1) is
/// exact because ARO counts are integers.
pub const HIT_EPSILON: f64 = 0.5;

/// Big-M constant of the cache-hit constraint: |N| * max |S_r| + 1.
pub fn hit_big_m(inst: &Instance) -> f64 {
    let mut aros: Vec<AroId> = inst
        .requests
        .iter()
        .flat_map(|r| r.models.iter().flat_map(|m| m.targets.iter().map(|t| t.id)))
        .collect();
    aros.sort_unstable();
    aros.dedup();
    let max_models = inst.requests.iter().map(|r| r.models.len()).max().unwrap_or(1);
    (aros.len() * max_models) as f64 + 1.0
}

fn ec_nodes(inst: &Instance) -> Vec<usize> {
    inst.ecs.iter().map(|e| e.node).collect()
}

fn x_domain(inst: &Instance, r: usize, mode: Mode) -> Vec<usize> {
    let mut nodes = ec_nodes(inst);
    if mode == Mode::OptimT {
        nodes.push(inst.requests[r].terminal);
    }
    nodes
}

/// Pre-caching rules: each (model, ARO) pair owned at most once, every
/// request caches something, AROs only ride along rendered models.
pub fn build_caching_constraints(inst: &Instance, idx: &VariableIndex) -> Vec<Constraint> {
    let ecs = ec_nodes(inst);
    let mut rows = Vec::new();

    // At most one owner per (model, ARO) pair.
    let mut pair_owners: std::collections::BTreeMap<(ModelId, AroId), Vec<usize>> = Default::default();
    for req in &inst.requests {
        for m in &req.models {
            for t in &m.targets {
                pair_owners.entry((m.id, t.id)).or_default().push(req.id);
            }
        }
    }
    for (&(s, l), owners) in &pair_owners {
        let terms = owners
            .iter()
            .map(|&r| (idx.of(VarKind::H { r, s, l }), 1.0))
            .collect();
        rows.push(Constraint::le(format!("h1_s{s}_l{l}"), terms, 1.0));
    }

    for req in &inst.requests {
        let r = req.id;
        // A valid request pre-caches at least one model/ARO pair.
        let terms: Vec<(usize, f64)> = req
            .models
            .iter()
            .flat_map(|m| {
                m.targets
                    .iter()
                    .map(move |t| (idx.of(VarKind::H { r, s: m.id, l: t.id }), 1.0))
            })
            .collect();
        rows.push(Constraint::ge(format!("h2_r{r}"), terms, 1.0));

        for m in &req.models {
            for t in &m.targets {
                let h = idx.of(VarKind::H { r, s: m.id, l: t.id });
                // Caching an ARO requires its model rendered somewhere.
                let mut terms = vec![(h, 1.0)];
                for &j in &ecs {
                    terms.push((idx.of(VarKind::P { s: m.id, j }), -1.0));
                }
                rows.push(Constraint::le(format!("h3_r{r}_s{}_l{}", m.id, t.id), terms, 0.0));

                // Rewritten companion: the cached ARO must co-locate with a
                // rendered copy (beta) of its model.
                let mut terms = vec![(h, 1.0)];
                for &j in &ecs {
                    terms.push((idx.of(VarKind::Beta { r, s: m.id, l: t.id, j }), -1.0));
                }
                rows.push(Constraint::le(format!("h4_r{r}_s{}_l{}", m.id, t.id), terms, 0.0));
            }
        }
    }
    rows
}

/// EC cache capacity, the either-or hit constraint with its tolerance and
/// big-M, the z/q complement and the exact hit definition.
pub fn build_cache_capacity_and_hit(inst: &Instance, idx: &VariableIndex) -> Vec<Constraint> {
    let ecs = ec_nodes(inst);
    let big_m = hit_big_m(inst);
    let mut rows = Vec::new();

    // Cache capacity: every owned ARO occupies space wherever its model is
    // rendered (p*h replaced by beta).
    for ec in &inst.ecs {
        let mut terms = Vec::new();
        for req in &inst.requests {
            for m in &req.models {
                for t in &m.targets {
                    terms.push((
                        idx.of(VarKind::Beta { r: req.id, s: m.id, l: t.id, j: ec.node }),
                        t.size_bytes,
                    ));
                }
            }
        }
        rows.push(Constraint::le(format!("h5_n{}", ec.node), terms, ec.cache_bytes));
    }

    for req in &inst.requests {
        let r = req.id;
        for &j in &ecs {
            let z = idx.of(VarKind::Z { r, j });
            let q = idx.of(VarKind::Qc { r, j });

            // Either the cache is short of a full model or the hit flag is up:
            // sum beta + eps <= |L| + U(1 - q), one row per model.
            for m in &req.models {
                let mut terms: Vec<(usize, f64)> = m
                    .targets
                    .iter()
                    .map(|t| (idx.of(VarKind::Beta { r, s: m.id, l: t.id, j }), 1.0))
                    .collect();
                terms.push((q, big_m));
                rows.push(Constraint::le(
                    format!("h6_r{r}_s{}_n{j}", m.id),
                    terms,
                    m.targets.len() as f64 - HIT_EPSILON + big_m,
                ));
            }

            // z = 1 - q.
            rows.push(Constraint::eq(
                format!("zq_r{r}_n{j}"),
                vec![(z, 1.0), (q, 1.0)],
                1.0,
            ));

            // A hit needs at least one fully cached model at j.
            let mut terms = vec![(z, 1.0)];
            for m in &req.models {
                let hit = hit_var(idx, r, m, j);
                terms.push((hit, -1.0));
            }
            rows.push(Constraint::le(format!("zor_r{r}_n{j}"), terms, 0.0));

            // Hit indicator = AND over the model's betas (multi-target only).
            for m in &req.models {
                if m.targets.len() > 1 {
                    let hit = idx.of(VarKind::Hit { r, s: m.id, j });
                    let mut sum = vec![(hit, -1.0)];
                    for t in &m.targets {
                        let b = idx.of(VarKind::Beta { r, s: m.id, l: t.id, j });
                        rows.push(Constraint::le(
                            format!("hitu_r{r}_s{}_l{}_n{j}", m.id, t.id),
                            vec![(hit, 1.0), (b, -1.0)],
                            0.0,
                        ));
                        sum.push((b, 1.0));
                    }
                    rows.push(Constraint::le(
                        format!("hitl_r{r}_s{}_n{j}", m.id),
                        sum,
                        m.targets.len() as f64 - 1.0,
                    ));
                }
            }
        }
    }
    rows
}

fn hit_var(idx: &VariableIndex, r: usize, m: &crate::workload::ModelSpec, j: usize) -> usize {
    if m.targets.len() == 1 {
        idx.of(VarKind::Beta { r, s: m.id, l: m.targets[0].id, j })
    } else {
        idx.of(VarKind::Hit { r, s: m.id, j })
    }
}

fn and_rows(name: &str, product: usize, a: usize, b: usize) -> [Constraint; 3] {
    [
        Constraint::le(format!("{name}_a"), vec![(product, 1.0), (a, -1.0)], 0.0),
        Constraint::le(format!("{name}_b"), vec![(product, 1.0), (b, -1.0)], 0.0),
        Constraint::ge(
            format!("{name}_c"),
            vec![(product, 1.0), (a, -1.0), (b, -1.0)],
            -1.0,
        ),
    ]
}

/// McCormick rows tying every auxiliary to the product of its operands.
pub fn build_linearization_constraints(inst: &Instance, idx: &VariableIndex) -> Vec<Constraint> {
    let ecs = ec_nodes(inst);
    let mode = idx.mode();
    let mut rows = Vec::new();

    for req in &inst.requests {
        let r = req.id;
        for m in &req.models {
            let s = m.id;
            for &j in &ecs {
                let p = idx.of(VarKind::P { s, j });
                let y = idx.of(VarKind::Y { r, j });
                let alpha = idx.of(VarKind::Alpha { r, s, j });
                rows.extend(and_rows(&format!("a1_r{r}_s{s}_n{j}"), alpha, p, y));

                for t in &m.targets {
                    let h = idx.of(VarKind::H { r, s, l: t.id });
                    let beta = idx.of(VarKind::Beta { r, s, l: t.id, j });
                    rows.extend(and_rows(&format!("a2_r{r}_s{s}_l{}_n{j}", t.id), beta, p, h));

                    let lambda = idx.of(VarKind::Lambda { r, s, l: t.id, j });
                    rows.extend(and_rows(
                        &format!("a3_r{r}_s{s}_l{}_n{j}", t.id),
                        lambda,
                        alpha,
                        beta,
                    ));
                }
            }

            // phi = e AND (model rendered anywhere).
            for g in 0..inst.rate_table.len() {
                let phi = idx.of(VarKind::Phi { r, s, g });
                let e = idx.of(VarKind::E { r, g });
                rows.push(Constraint::le(
                    format!("a4_r{r}_s{s}_g{g}_e"),
                    vec![(phi, 1.0), (e, -1.0)],
                    0.0,
                ));
                let mut any = vec![(phi, 1.0)];
                for &j in &ecs {
                    let p = idx.of(VarKind::P { s, j });
                    any.push((p, -1.0));
                    rows.push(Constraint::ge(
                        format!("a4_r{r}_s{s}_g{g}_n{j}"),
                        vec![(phi, 1.0), (e, -1.0), (p, -1.0)],
                        -1.0,
                    ));
                }
                rows.push(Constraint::le(format!("a4_r{r}_s{s}_g{g}_p"), any, 0.0));
            }
        }

        for &j in &ecs {
            let y = idx.of(VarKind::Y { r, j });
            let z = idx.of(VarKind::Z { r, j });
            let q = idx.of(VarKind::Qc { r, j });
            let psi = idx.of(VarKind::Psi { r, j });
            rows.extend(and_rows(&format!("psi_r{r}_n{j}"), psi, z, y));
            let miss = idx.of(VarKind::Miss { r, j });
            rows.extend(and_rows(&format!("mis_r{r}_n{j}"), miss, q, y));

            for &i in &x_domain(inst, r, mode) {
                let x = idx.of(VarKind::X { r, i });
                let xi = idx.of(VarKind::Xi { r, i, j });
                rows.extend(and_rows(&format!("xi_r{r}_i{i}_n{j}"), xi, x, y));
            }

            // bare = y AND no model of the request rendered at j.
            if req.models.len() > 1 {
                let bare = idx.of(VarKind::Bare { r, j });
                rows.push(Constraint::le(
                    format!("br_r{r}_n{j}_y"),
                    vec![(bare, 1.0), (y, -1.0)],
                    0.0,
                ));
                let mut lower = vec![(bare, 1.0), (y, -1.0)];
                for m in &req.models {
                    let alpha = idx.of(VarKind::Alpha { r, s: m.id, j });
                    rows.push(Constraint::le(
                        format!("br_r{r}_n{j}_s{}", m.id),
                        vec![(bare, 1.0), (alpha, 1.0)],
                        1.0,
                    ));
                    lower.push((alpha, 1.0));
                }
                rows.push(Constraint::ge(format!("br_r{r}_n{j}_l"), lower, 0.0));
            }
        }
    }
    rows
}

/// VM capacity and the one-hot placement and rate rows.
pub fn build_assignment_constraints(inst: &Instance, idx: &VariableIndex) -> Vec<Constraint> {
    let ecs = ec_nodes(inst);
    let mode = idx.mode();
    let mut rows = Vec::new();

    for ec in &inst.ecs {
        let mut terms = Vec::new();
        for req in &inst.requests {
            terms.push((idx.of(VarKind::X { r: req.id, i: ec.node }), 1.0));
            terms.push((idx.of(VarKind::Y { r: req.id, j: ec.node }), 1.0));
        }
        rows.push(Constraint::le(format!("vm_n{}", ec.node), terms, ec.vm_count as f64));
    }

    for req in &inst.requests {
        let r = req.id;
        let terms = x_domain(inst, r, mode)
            .iter()
            .map(|&i| (idx.of(VarKind::X { r, i }), 1.0))
            .collect();
        rows.push(Constraint::eq(format!("xone_r{r}"), terms, 1.0));

        let terms = ecs.iter().map(|&j| (idx.of(VarKind::Y { r, j }), 1.0)).collect();
        rows.push(Constraint::eq(format!("yone_r{r}"), terms, 1.0));

        let terms = (0..inst.rate_table.len())
            .map(|g| (idx.of(VarKind::E { r, g }), 1.0))
            .collect();
        rows.push(Constraint::eq(format!("eone_r{r}"), terms, 1.0));
    }
    rows
}

/// Average-SSIM floor over all requests and target AROs.
pub fn build_quality_constraint(inst: &Instance, idx: &VariableIndex, q_bound: f64) -> Constraint {
    let q_max = super::quality_upper_bound(inst);
    let mut terms = Vec::new();
    for req in &inst.requests {
        let weight = req.target_count() as f64;
        for g in 0..inst.rate_table.len() {
            terms.push((
                idx.of(VarKind::E { r: req.id, g }),
                weight * inst.rate_table.ssim_at(g),
            ));
        }
    }
    Constraint::ge("quality", terms, q_bound * q_max)
}

/// Round trip from EC `j` to the origin region server plus the u-weighted
/// trips to the destination region servers.
fn trip_ms(inst: &Instance, r: usize, j: usize) -> f64 {
    let req = &inst.requests[r];
    let topo = &inst.topology;
    let origin_server = topo.region_servers[topo.region_of[req.origin]];
    let mut trip = topo.delay_between(j, origin_server);
    for &(k, u) in &req.mobility.destinations {
        trip += u * topo.delay_between(j, topo.region_servers[topo.region_of[k]]);
    }
    trip
}

/// Dense latency coefficients in ms per variable.
pub fn build_latency_objective(inst: &Instance, idx: &VariableIndex) -> Result<Vec<f64>> {
    let topo = &inst.topology;
    let mut lat = vec![0.0; idx.len()];
    let mode = idx.mode();

    for req in &inst.requests {
        let r = req.id;
        let mobility_total = req.total_mobility();
        let weight = 1.0 + mobility_total;

        // Wireless uplink/downlink per selectable rate; the frame terms ride
        // on phi so only rendered models are streamed.
        for g in 0..inst.rate_table.len() {
            let rate = inst.rate_table.rate(g);
            lat[idx.of(VarKind::E { r, g })] += MS_PER_S * weight * req.foreground_bits / rate;
            for m in &req.models {
                let mut shared_bits = 0.0;
                for t in inst.co_region_requests(r) {
                    shared_bits += inst.result_bits(m.id, t);
                }
                lat[idx.of(VarKind::Phi { r, s: m.id, g })] +=
                    MS_PER_S * weight * shared_bits / rate;
            }
        }

        // Computational function: wired reach, processing, mobility reach.
        for &i in &x_domain(inst, r, mode) {
            let v_ms = if i == req.terminal {
                MS_PER_S * inst.omega_fore * req.foreground_bits
                    / req.terminal_cpu_hz
                    / req.terminal_portion
            } else {
                let ec = &inst.ecs[inst.ec_index(i).ok_or(Error::UnknownNode(i))?];
                MS_PER_S * inst.omega_fore * req.foreground_bits / ec.vm_cpu_hz
            };
            let mut coeff = topo.delay_between(req.origin, i) + v_ms;
            for &(k, u) in &req.mobility.destinations {
                coeff += u * topo.delay_between(k, i);
            }
            lat[idx.of(VarKind::X { r, i })] += coeff;
        }

        // Region links independent of the placement, attached to the y
        // one-hot family so the objective stays constant-free.
        let origin_server = topo.region_servers[topo.region_of[req.origin]];
        let mut fixed = topo.delay_between(origin_server, req.origin);
        for &(k, u) in &req.mobility.destinations {
            fixed += u * topo.delay_between(topo.region_servers[topo.region_of[k]], k);
        }

        let single_model = req.models.len() == 1;
        for ec in &inst.ecs {
            let j = ec.node;
            let trip = trip_ms(inst, r, j);

            let mut y_coeff = fixed + MS_PER_S * inst.omega_back * req.pointer_bits / ec.vm_cpu_hz;
            if single_model {
                // One model: either it sits here (alpha trip) or the request
                // redirects over the same links, so the trip always fires.
                y_coeff += trip;
            }
            lat[idx.of(VarKind::Y { r, j })] += y_coeff;

            for m in &req.models {
                let w_back = MS_PER_S * inst.omega_back * m.background_bits / ec.vm_cpu_hz;
                let alpha_trip = if single_model { 0.0 } else { trip };
                lat[idx.of(VarKind::Alpha { r, s: m.id, j })] += w_back + alpha_trip;
                for t in &m.targets {
                    lat[idx.of(VarKind::Lambda { r, s: m.id, l: t.id, j })] +=
                        MS_PER_S * inst.omega_back * t.size_bytes * BITS_PER_BYTE / ec.vm_cpu_hz;
                }
            }

            if !single_model {
                lat[idx.of(VarKind::Bare { r, j })] += trip;
            }
            lat[idx.of(VarKind::Miss { r, j })] += inst.miss_penalty_ms;

            for &i in &x_domain(inst, r, mode) {
                lat[idx.of(VarKind::Xi { r, i, j })] += topo.delay_between(i, j);
            }
        }
    }
    Ok(lat)
}

/// Dense energy coefficients in joules per variable.
pub fn build_energy_objective(inst: &Instance, idx: &VariableIndex) -> Result<Vec<f64>> {
    let mut en = vec![0.0; idx.len()];
    let mode = idx.mode();

    for req in &inst.requests {
        let r = req.id;
        let budget = inst.links[r].budget_w()?;
        let bits = req.foreground_bits + req.pointer_bits;

        for g in 0..inst.rate_table.len() {
            let rate = inst.rate_table.rate(g);
            let gain = (rate / inst.links[r].bandwidth_hz).exp2() - 1.0;
            en[idx.of(VarKind::E { r, g })] += budget * gain * bits / rate;
        }

        for &i in &x_domain(inst, r, mode) {
            // k0 f^2 * (omega F / f) collapses to k0 f omega F.
            let coeff = if i == req.terminal {
                inst.chip_coefficient() * req.terminal_cpu_hz * inst.omega_fore * req.foreground_bits
                    / req.terminal_portion
            } else {
                let ec = &inst.ecs[inst.ec_index(i).ok_or(Error::UnknownNode(i))?];
                ec.chip_coefficient * ec.vm_cpu_hz * inst.omega_fore * req.foreground_bits
            };
            en[idx.of(VarKind::X { r, i })] += coeff;
        }

        for ec in &inst.ecs {
            let j = ec.node;
            let k = ec.chip_coefficient * ec.vm_cpu_hz * inst.omega_back;
            en[idx.of(VarKind::Y { r, j })] += k * req.pointer_bits;
            for m in &req.models {
                en[idx.of(VarKind::Alpha { r, s: m.id, j })] += k * m.background_bits;
                for t in &m.targets {
                    en[idx.of(VarKind::Lambda { r, s: m.id, l: t.id, j })] +=
                        k * t.size_bytes * BITS_PER_BYTE;
                }
            }
        }
    }
    Ok(en)
}

/// Analytic worst-case normalization bounds plus the attained maximum
/// quality. Latency and energy are bounded per request by the worst
/// coefficient of each one-hot family, so any feasible plan normalizes
/// into [0, 1] in both modes.
#[derive(Debug, Clone)]
pub struct NormalizationBounds {
    pub l_max: f64,
    pub e_max: f64,
    pub q_max: f64,
    pub derivation: String,
}

pub fn normalization_bounds(inst: &Instance) -> Result<NormalizationBounds> {
    // OptimT dominates OptimNT's choice set, so its maxima bound both modes.
    let idx = VariableIndex::new(inst, Mode::OptimT);
    let lat = build_latency_objective(inst, &idx)?;
    let en = build_energy_objective(inst, &idx)?;
    let ecs = ec_nodes(inst);

    let mut l_max = 0.0;
    let mut e_max = 0.0;
    for req in &inst.requests {
        let r = req.id;

        let worst = |values: &[f64], kinds: &mut dyn Iterator<Item = VarKind>| -> f64 {
            kinds.map(|k| values[idx.of(k)]).fold(0.0, f64::max)
        };

        // Wireless at the worst rate with every model rendered.
        let wireless = |values: &[f64]| -> f64 {
            (0..inst.rate_table.len())
                .map(|g| {
                    values[idx.of(VarKind::E { r, g })]
                        + req
                            .models
                            .iter()
                            .map(|m| values[idx.of(VarKind::Phi { r, s: m.id, g })])
                            .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };

        // Storage-side worst case: full content plus all trips plus the
        // redirection at the least favourable EC.
        let storage_worst = |values: &[f64]| -> f64 {
            ecs.iter()
                .map(|&j| {
                    let mut total = values[idx.of(VarKind::Y { r, j })];
                    for m in &req.models {
                        total += values[idx.of(VarKind::Alpha { r, s: m.id, j })];
                        for t in &m.targets {
                            total += values[idx.of(VarKind::Lambda { r, s: m.id, l: t.id, j })];
                        }
                    }
                    if req.models.len() > 1 {
                        total += values[idx.of(VarKind::Bare { r, j })];
                    }
                    total
                })
                .fold(0.0, f64::max)
        };

        let x_kinds = || x_domain(inst, r, Mode::OptimT).into_iter().map(move |i| VarKind::X { r, i });
        let xi_kinds = || {
            let ecs = ec_nodes(inst);
            x_domain(inst, r, Mode::OptimT)
                .into_iter()
                .flat_map(move |i| ecs.clone().into_iter().map(move |j| VarKind::Xi { r, i, j }))
        };

        l_max += wireless(&lat)
            + worst(&lat, &mut x_kinds())
            + worst(&lat, &mut xi_kinds())
            + storage_worst(&lat)
            + inst.miss_penalty_ms;
        e_max += wireless(&en) + worst(&en, &mut x_kinds()) + storage_worst(&en);
    }

    let q_max = super::quality_upper_bound(inst);
    let derivation = format!(
        "l_max {l_max:.3} ms: per request, min-rate wireless with all models rendered \
         + worst compute placement + farthest compute-storage pair + full storage content \
         with every trip and the redirection + the miss penalty; \
         e_max {e_max:.6} J: max-rate uplink + worst-case processing placements; \
         q_max {q_max:.3}: every request at the top rate"
    );
    log::debug!("{derivation}");
    Ok(NormalizationBounds {
        l_max: l_max.max(f64::MIN_POSITIVE),
        e_max: e_max.max(f64::MIN_POSITIVE),
        q_max,
        derivation,
    })
}

/// A fully assembled program with its index and normalization bounds.
#[derive(Debug, Clone)]
pub struct Program {
    pub lp: LinearProgram,
    pub index: VariableIndex,
    pub bounds: NormalizationBounds,
    /// Dense latency coefficients (ms).
    pub latency: Vec<f64>,
    /// Dense energy coefficients (J).
    pub energy: Vec<f64>,
    pub mu: f64,
    pub mode: Mode,
    pub q_bound: f64,
}

impl Program {
    /// Latency (ms) and energy (J) of a raw assignment through the objective
    /// coefficient split.
    pub fn objective_parts(&self, assignment: &[u8]) -> (f64, f64) {
        let mut lat = 0.0;
        let mut en = 0.0;
        for (v, &val) in assignment.iter().enumerate() {
            if val == 1 {
                lat += self.latency[v];
                en += self.energy[v];
            }
        }
        (lat, en)
    }
}

/// Builds the scalarized program `min mu L/L_max + (1-mu) E/E_max` with all
/// constraint families for the given mode.
pub fn build_program(inst: &Instance, mu: f64, mode: Mode, q_bound: f64) -> Result<Program> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Config(format!("mu {mu} outside [0,1]")));
    }
    let index = VariableIndex::new(inst, mode);
    let mut lp = LinearProgram::new(index.names());

    lp.constraints.extend(build_caching_constraints(inst, &index));
    lp.constraints.extend(build_cache_capacity_and_hit(inst, &index));
    lp.constraints.extend(build_linearization_constraints(inst, &index));
    lp.constraints.extend(build_assignment_constraints(inst, &index));
    lp.constraints.push(build_quality_constraint(inst, &index, q_bound));

    let latency = build_latency_objective(inst, &index)?;
    let energy = build_energy_objective(inst, &index)?;
    let bounds = normalization_bounds(inst)?;

    lp.objective = (0..index.len())
        .filter_map(|v| {
            let c = mu * latency[v] / bounds.l_max + (1.0 - mu) * energy[v] / bounds.e_max;
            (c != 0.0).then_some((v, c))
        })
        .collect();
    lp.validate()?;

    Ok(Program {
        lp,
        index,
        bounds,
        latency,
        energy,
        mu,
        mode,
        q_bound,
    })
}
