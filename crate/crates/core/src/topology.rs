//! Tree-like edge network: node roles, hop costs, metaverse-region mapping
//! and mobility profiles.

use crate::{Error, Result};
use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub type NodeId = usize;
pub type RegionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    Router,
    /// Access router that also hosts an edge cloud site.
    EdgeCloud,
    Terminal,
    RegionServer,
}

/// Generator parameters for the nominal tree topology: a root, a layer of
/// aggregation routers, a layer of access routers (the EC sites), one
/// terminal per request and one region server per metaverse region.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyConfig {
    pub agg_routers: usize,
    pub access_per_agg: usize,
    /// Number of access routers that host an EC site.
    pub total_ecs: usize,
    /// Activated subset, by EC site rank. Empty means "first `activated_count`
    /// sites spread evenly".
    pub activated_list: Vec<usize>,
    pub activated_count: usize,
    pub per_hop_ms: f64,
    pub regions: usize,
    /// Hops between a region server and the EC it attaches to. Zero places
    /// the region server on the EC node itself.
    pub region_hop_distance: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            agg_routers: 4,
            access_per_agg: 5,
            total_ecs: 20,
            activated_list: Vec::new(),
            activated_count: 6,
            per_hop_ms: 2.0,
            regions: 4,
            region_hop_distance: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub roles: Vec<NodeRole>,
    pub edges: Vec<(NodeId, NodeId)>,
    pub per_hop_ms: f64,
    /// All EC sites, activated or not.
    pub ec_sites: Vec<NodeId>,
    /// ECs activated for the current service; placement variables range here.
    pub activated_ecs: Vec<NodeId>,
    /// One terminal per request, in request order.
    pub terminal_nodes: Vec<NodeId>,
    pub access_routers: Vec<NodeId>,
    /// Attachment node of each region server, indexed by region id.
    pub region_servers: Vec<NodeId>,
    /// Region of every node.
    pub region_of: Vec<RegionId>,
    /// Parent access-router of each terminal, in request order.
    pub terminal_attach: Vec<NodeId>,
    #[serde(skip)]
    hops: Vec<Vec<u32>>,
}

impl NetworkTopology {
    /// Builds the nominal tree for `config` with `terminals` terminal nodes
    /// attached to access routers drawn uniformly from `rng`.
    pub fn build(config: &TopologyConfig, terminals: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let mut roles = vec![NodeRole::Router]; // node 0 = root
        let mut edges = Vec::new();
        let mut access_routers = Vec::new();

        for a in 0..config.agg_routers {
            let agg = roles.len();
            roles.push(NodeRole::Router);
            edges.push((0, agg));
            for _ in 0..config.access_per_agg {
                let acc = roles.len();
                roles.push(NodeRole::Router);
                edges.push((agg, acc));
                access_routers.push(acc);
            }
            let _ = a;
        }

        // EC sites are the first `total_ecs` access routers; the node role is
        // upgraded in place so an EC is co-located with its router (0 hops).
        let ec_sites: Vec<NodeId> = access_routers.iter().take(config.total_ecs).copied().collect();
        for &n in &ec_sites {
            roles[n] = NodeRole::EdgeCloud;
        }
        let activated_ecs = config.activated_sites(&ec_sites)?;

        // Region of every router follows its aggregation subtree.
        let mut region_of = vec![0usize; roles.len()];
        for (i, &acc) in access_routers.iter().enumerate() {
            let agg_index = i / config.access_per_agg;
            let region = agg_index % config.regions;
            region_of[acc] = region;
            region_of[1 + agg_index * (1 + config.access_per_agg)] = region;
        }

        // Terminals attach to access routers drawn uniformly.
        let mut terminal_nodes = Vec::with_capacity(terminals);
        let mut terminal_attach = Vec::with_capacity(terminals);
        for _ in 0..terminals {
            let attach = *access_routers
                .choose(rng)
                .ok_or_else(|| Error::Topology("no access routers".into()))?;
            let t = roles.len();
            roles.push(NodeRole::Terminal);
            region_of.push(region_of[attach]);
            edges.push((attach, t));
            terminal_nodes.push(t);
            terminal_attach.push(attach);
        }

        // One region server per region, attached near the first activated EC
        // of the region (falling back to any EC site, then any router).
        let mut region_servers = Vec::with_capacity(config.regions);
        for region in 0..config.regions {
            let anchor = activated_ecs
                .iter()
                .chain(ec_sites.iter())
                .chain(access_routers.iter())
                .copied()
                .find(|&n| region_of[n] == region)
                .unwrap_or(0);
            if config.region_hop_distance == 0 {
                region_servers.push(anchor);
            } else {
                let mut prev = anchor;
                let mut server = anchor;
                for _ in 0..config.region_hop_distance {
                    server = roles.len();
                    roles.push(NodeRole::RegionServer);
                    region_of.push(region);
                    edges.push((prev, server));
                    prev = server;
                }
                region_servers.push(server);
            }
        }

        let mut topo = NetworkTopology {
            roles,
            edges,
            per_hop_ms: config.per_hop_ms,
            ec_sites,
            activated_ecs,
            terminal_nodes,
            access_routers,
            region_servers,
            region_of,
            terminal_attach,
            hops: Vec::new(),
        };
        topo.finish()?;
        Ok(topo)
    }

    /// Like [`NetworkTopology::build`] but spreads terminals round-robin over
    /// a shuffled access-router list, so no cell is ever starved of cacheable
    /// pairs while attachments still vary per seed.
    pub fn build_balanced(
        config: &TopologyConfig,
        terminals: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mut topo = NetworkTopology::build(config, 0, rng)?;
        let mut order = topo.access_routers.clone();
        use rand::seq::SliceRandom;
        order.shuffle(rng);
        for t in 0..terminals {
            let attach = order[t % order.len()];
            let node = topo.roles.len();
            topo.roles.push(NodeRole::Terminal);
            topo.region_of.push(topo.region_of[attach]);
            topo.edges.push((attach, node));
            topo.terminal_nodes.push(node);
            topo.terminal_attach.push(attach);
        }
        topo.finish()?;
        Ok(topo)
    }

    /// Validates an explicitly assembled topology (used when loading edge
    /// lists from configuration) and computes the hop matrix.
    pub fn finish(&mut self) -> Result<()> {
        let n = self.roles.len();
        if self.per_hop_ms <= 0.0 {
            return Err(Error::Topology("per-hop latency must be positive".into()));
        }
        if self.edges.len() + 1 != n {
            return Err(Error::Topology(format!(
                "edge list does not form a tree: {} nodes, {} edges",
                n,
                self.edges.len()
            )));
        }
        if self.region_of.len() != n {
            return Err(Error::Topology("region_of must cover every node".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                return Err(Error::UnknownNode(a.max(b)));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        // BFS from every node; a tree is connected with n-1 edges, so any
        // unreachable node means a cycle elsewhere.
        let mut hops = vec![vec![u32::MAX; n]; n];
        for s in 0..n {
            let row = &mut hops[s];
            row[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if row[v] == u32::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if row.iter().any(|&d| d == u32::MAX) {
                return Err(Error::Topology("edge list does not form a connected tree".into()));
            }
        }
        self.hops = hops;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    /// Tree-path hop count between two nodes.
    pub fn hop_count(&self, i: NodeId, j: NodeId) -> Result<u32> {
        let n = self.node_count();
        if i >= n {
            return Err(Error::UnknownNode(i));
        }
        if j >= n {
            return Err(Error::UnknownNode(j));
        }
        Ok(self.hops[i][j])
    }

    /// Wired delay between two nodes in milliseconds: path edge count times
    /// the per-hop latency. Zero iff `i == j`.
    pub fn hop_delay(&self, i: NodeId, j: NodeId) -> Result<f64> {
        Ok(self.hop_count(i, j)? as f64 * self.per_hop_ms)
    }

    /// Hop count for ids already known to be valid.
    pub fn hops_between(&self, i: NodeId, j: NodeId) -> u32 {
        self.hops[i][j]
    }

    /// Wired delay in ms for ids already known to be valid.
    pub fn delay_between(&self, i: NodeId, j: NodeId) -> f64 {
        self.hops[i][j] as f64 * self.per_hop_ms
    }

    /// Largest wired delay between any two nodes, in ms.
    pub fn max_delay(&self) -> f64 {
        let n = self.node_count();
        let mut best = 0u32;
        for i in 0..n {
            for j in 0..n {
                best = best.max(self.hops[i][j]);
            }
        }
        best as f64 * self.per_hop_ms
    }

    /// Metaverse region a node belongs to.
    pub fn region_of(&self, node: NodeId) -> Result<RegionId> {
        self.region_of
            .get(node)
            .copied()
            .ok_or(Error::UnknownNode(node))
    }

    /// Attachment node of a region's server.
    pub fn region_server(&self, region: RegionId) -> Result<NodeId> {
        self.region_servers
            .get(region)
            .copied()
            .ok_or_else(|| Error::Topology(format!("region {region} has no server")))
    }

    /// Access routers in the same cell neighbourhood as `origin`: the
    /// siblings under the same aggregation router. These are the allowed
    /// mobility destinations.
    pub fn adjacent_access_routers(&self, origin: NodeId) -> Vec<NodeId> {
        let parent = match self
            .edges
            .iter()
            .find_map(|&(a, b)| {
                if b == origin && self.access_routers.contains(&origin) {
                    Some(a)
                } else {
                    None
                }
            }) {
            Some(p) => p,
            None => return Vec::new(),
        };
        self.access_routers
            .iter()
            .copied()
            .filter(|&r| r != origin && self.edges.contains(&(parent, r)))
            .collect()
    }

    /// One "i j" pair per line, ordered as constructed.
    pub fn export_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }
}

impl TopologyConfig {
    fn validate(&self) -> Result<()> {
        if self.total_ecs == 0 {
            return Err(Error::Config("EC count must be at least 1".into()));
        }
        if self.per_hop_ms <= 0.0 {
            return Err(Error::Config("per-hop latency must be positive".into()));
        }
        if self.agg_routers == 0 || self.access_per_agg == 0 {
            return Err(Error::Config("tree layers must be non-empty".into()));
        }
        if self.regions == 0 {
            return Err(Error::Config("at least one region required".into()));
        }
        let sites = self.agg_routers * self.access_per_agg;
        if self.total_ecs > sites {
            return Err(Error::Config(format!(
                "{} EC sites requested but only {} access routers",
                self.total_ecs, sites
            )));
        }
        if self.effective_activated() == 0 {
            return Err(Error::Config("at least one activated EC required".into()));
        }
        Ok(())
    }

    fn effective_activated(&self) -> usize {
        if self.activated_list.is_empty() {
            self.activated_count
        } else {
            self.activated_list.len()
        }
    }

    fn activated_sites(&self, ec_sites: &[NodeId]) -> Result<Vec<NodeId>> {
        if !self.activated_list.is_empty() {
            let mut out = Vec::new();
            for &rank in &self.activated_list {
                let node = ec_sites
                    .get(rank)
                    .ok_or_else(|| Error::Config(format!("activated EC rank {rank} out of range")))?;
                out.push(*node);
            }
            out.sort_unstable();
            out.dedup();
            return Ok(out);
        }
        let k = self.activated_count.min(ec_sites.len());
        if k == 0 {
            return Err(Error::Config("no activated ECs".into()));
        }
        // Spread the activated subset evenly across the sites.
        let mut out: Vec<NodeId> = (0..k)
            .map(|i| ec_sites[i * ec_sites.len() / k])
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Moving probabilities of one request: origin access router and the
/// adjacent destinations with their probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilityProfile {
    pub origin: NodeId,
    pub destinations: Vec<(NodeId, f64)>,
}

impl MobilityProfile {
    pub fn total_probability(&self) -> f64 {
        self.destinations.iter().map(|(_, u)| u).sum()
    }

    pub fn validate(&self, topo: &NetworkTopology) -> Result<()> {
        let adjacent = topo.adjacent_access_routers(self.origin);
        let mut total = 0.0;
        for &(k, u) in &self.destinations {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Config(format!("mobility probability {u} outside [0,1]")));
            }
            if !adjacent.contains(&k) {
                return Err(Error::Config(format!(
                    "destination {k} is not adjacent to origin {}",
                    self.origin
                )));
            }
            total += u;
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::Config(format!("total mobility probability {total} exceeds 1")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn default_tree_has_twenty_sites_six_active() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 5, &mut rng(1)).unwrap();
        assert_eq!(topo.ec_sites.len(), 20);
        assert_eq!(topo.activated_ecs.len(), 6);
        assert_eq!(topo.terminal_nodes.len(), 5);
        // Every hop cost is a multiple of 2 ms.
        for i in 0..topo.node_count() {
            for j in 0..topo.node_count() {
                let d = topo.hop_delay(i, j).unwrap();
                assert!((d / 2.0 - (d / 2.0).round()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hop_delay_symmetric_zero_on_diagonal() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 3, &mut rng(2)).unwrap();
        for i in 0..topo.node_count() {
            assert_eq!(topo.hop_delay(i, i).unwrap(), 0.0);
            for j in 0..topo.node_count() {
                assert_eq!(topo.hop_delay(i, j).unwrap(), topo.hop_delay(j, i).unwrap());
                if i != j {
                    assert!(topo.hop_delay(i, j).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn hop_counts_match_independent_bfs() {
        // 3-level binary tree.
        let cfg = TopologyConfig {
            agg_routers: 2,
            access_per_agg: 2,
            total_ecs: 4,
            activated_count: 2,
            regions: 2,
            ..TopologyConfig::default()
        };
        let topo = NetworkTopology::build(&cfg, 4, &mut rng(3)).unwrap();
        let n = topo.node_count();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &topo.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        // Re-derive distances with a test-local BFS.
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut q = std::collections::VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            for t in 0..n {
                assert_eq!(topo.hop_count(s, t).unwrap() as usize, dist[t]);
            }
        }
    }

    #[test]
    fn adjacent_nodes_cost_one_hop() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 1, &mut rng(4)).unwrap();
        let (a, b) = topo.edges[0];
        assert_eq!(topo.hop_delay(a, b).unwrap(), 2.0);
    }

    #[test]
    fn single_region_maps_everything_to_zero() {
        let cfg = TopologyConfig {
            regions: 1,
            ..TopologyConfig::default()
        };
        let topo = NetworkTopology::build(&cfg, 4, &mut rng(5)).unwrap();
        for n in 0..topo.node_count() {
            assert_eq!(topo.region_of(n).unwrap(), 0);
        }
    }

    #[test]
    fn terminals_under_same_access_router_share_region() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 40, &mut rng(6)).unwrap();
        for (a, &att_a) in topo.terminal_attach.iter().enumerate() {
            for (b, &att_b) in topo.terminal_attach.iter().enumerate() {
                if att_a == att_b {
                    assert_eq!(
                        topo.region_of(topo.terminal_nodes[a]).unwrap(),
                        topo.region_of(topo.terminal_nodes[b]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn region_equals_subtree_root_region() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 6, &mut rng(7)).unwrap();
        // Each access router's region equals its aggregation parent's region.
        for &acc in &topo.access_routers {
            let parent = topo
                .edges
                .iter()
                .find(|&&(_, b)| b == acc)
                .map(|&(a, _)| a)
                .unwrap();
            assert_eq!(topo.region_of[acc], topo.region_of[parent]);
        }
    }

    #[test]
    fn non_tree_edge_list_rejected() {
        let mut topo = NetworkTopology {
            roles: vec![NodeRole::Router; 3],
            edges: vec![(0, 1), (1, 2), (2, 0)],
            per_hop_ms: 2.0,
            ec_sites: vec![],
            activated_ecs: vec![],
            terminal_nodes: vec![],
            access_routers: vec![],
            region_servers: vec![],
            region_of: vec![0; 3],
            terminal_attach: vec![],
            hops: Vec::new(),
        };
        assert!(topo.finish().is_err());
    }

    #[test]
    fn disconnected_forest_rejected() {
        let mut topo = NetworkTopology {
            roles: vec![NodeRole::Router; 4],
            edges: vec![(0, 1), (2, 3), (3, 2)],
            per_hop_ms: 2.0,
            ec_sites: vec![],
            activated_ecs: vec![],
            terminal_nodes: vec![],
            access_routers: vec![],
            region_servers: vec![],
            region_of: vec![0; 4],
            terminal_attach: vec![],
            hops: Vec::new(),
        };
        assert!(topo.finish().is_err());
    }

    #[test]
    fn edge_list_export_round_trips() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 2, &mut rng(8)).unwrap();
        let text = topo.export_edge_list();
        let parsed: Vec<(usize, usize)> = text
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        assert_eq!(parsed, topo.edges);
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let a = NetworkTopology::build(&TopologyConfig::default(), 30, &mut rng(9)).unwrap();
        let b = NetworkTopology::build(&TopologyConfig::default(), 30, &mut rng(9)).unwrap();
        assert_eq!(a.terminal_attach, b.terminal_attach);
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn mobility_destinations_are_siblings() {
        let topo = NetworkTopology::build(&TopologyConfig::default(), 1, &mut rng(10)).unwrap();
        let origin = topo.terminal_attach[0];
        let adj = topo.adjacent_access_routers(origin);
        assert_eq!(adj.len(), 4); // 5 per aggregation router minus the origin
        for &k in &adj {
            assert_eq!(topo.hop_count(origin, k).unwrap(), 2);
        }
        let profile = MobilityProfile {
            origin,
            destinations: adj.iter().map(|&k| (k, 0.25)).collect(),
        };
        profile.validate(&topo).unwrap();
        let bad = MobilityProfile {
            origin,
            destinations: vec![(0, 0.5)],
        };
        assert!(bad.validate(&topo).is_err());
    }

    proptest::proptest! {
        #[test]
        fn triangle_inequality_on_tree(seed in 0u64..50) {
            let topo = NetworkTopology::build(&TopologyConfig::default(), 8, &mut rng(seed)).unwrap();
            let n = topo.node_count();
            let pick = |s: u64| (s as usize * 7919) % n;
            let (i, j, k) = (pick(seed), pick(seed + 1), pick(seed + 2));
            let dij = topo.hop_delay(i, j).unwrap();
            let djk = topo.hop_delay(j, k).unwrap();
            let dik = topo.hop_delay(i, k).unwrap();
            proptest::prop_assert!(dik <= dij + djk + 1e-12);
        }
    }
}
