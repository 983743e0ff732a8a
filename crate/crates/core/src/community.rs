//! Modularity and Louvain community detection.
//!
//! Both operate on the undirected projection of a [`DomainGraph`]: an edge
//! in either direction (or both) becomes one unit-weight undirected edge.
//!
//! Louvain alternates two phases until no node moves:
//!
//! 1. local moving: visit nodes in a seeded random order and move each one
//!    to the neighboring community with the largest modularity gain;
//! 2. aggregation: collapse every community into a single node, with
//!    intra-community weight turned into a self-loop.
//!
//! A node only leaves its community for a strictly better one; among equally
//! good targets the lowest community id wins.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{subgraph_stats, DomainGraph};
use crate::label::Label;

/// Gains below this are treated as zero.
const GAIN_EPSILON: f64 = 1e-12;
const MAX_PASSES: usize = 10_000;

/// Newman modularity of `assignment` (community id per node index) on the
/// undirected projection, with resolution `gamma`. Zero for edgeless graphs.
pub fn modularity(graph: &DomainGraph, assignment: &[usize], resolution: f64) -> Result<f64> {
    if assignment.len() != graph.node_count() {
        return Err(Error::InvalidParameter(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.len(),
            graph.node_count()
        )));
    }
    let edges: Vec<(usize, usize)> = graph.undirected_edges().into_iter().collect();
    Ok(undirected_modularity(
        graph.node_count(),
        &edges,
        assignment,
        resolution,
    ))
}

/// Modularity of a simple undirected unit-weight graph.
pub fn undirected_modularity(
    n: usize,
    edges: &[(usize, usize)],
    assignment: &[usize],
    resolution: f64,
) -> f64 {
    let m = edges.len() as f64;
    if edges.is_empty() {
        return 0.0;
    }
    let mut degree = vec![0.0; n];
    for &(a, b) in edges {
        degree[a] += 1.0;
        degree[b] += 1.0;
    }
    // Per community: internal edge count and degree sum.
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total: BTreeMap<usize, f64> = BTreeMap::new();
    for &(a, b) in edges {
        if assignment[a] == assignment[b] {
            *internal.entry(assignment[a]).or_default() += 1.0;
        }
    }
    for (v, d) in degree.iter().enumerate() {
        *total.entry(assignment[v]).or_default() += d;
    }
    total
        .iter()
        .map(|(c, d)| {
            let l = internal.get(c).copied().unwrap_or(0.0);
            l / m - resolution * (d / (2.0 * m)) * (d / (2.0 * m))
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Community id per node index; ids are contiguous from 0, numbered by
    /// first appearance in node order.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub seed: u64,
    pub resolution: f64,
    /// Modularity on the input graph after each local-moving phase.
    pub phase_modularity: Vec<f64>,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Node indices grouped by community id.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// `domain,community_id` CSV in node order.
    pub fn to_csv(&self, graph: &DomainGraph) -> String {
        let mut out = String::from("domain,community_id\n");
        for (node, c) in graph.nodes().iter().zip(&self.assignment) {
            out.push_str(&format!("{},{c}\n", node.domain));
        }
        out
    }
}

/// Relabel ids to 0.. in order of first appearance.
pub fn renumber(assignment: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignment
        .iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

/// Weighted undirected graph for one Louvain level.
#[derive(Debug, Clone)]
struct Level {
    neighbors: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl Level {
    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, b) in edges {
            *weights.entry((a, b)).or_default() += 1.0;
        }
        Level::from_weights(n, &weights, vec![0.0; n])
    }

    fn from_weights(
        n: usize,
        weights: &BTreeMap<(usize, usize), f64>,
        self_loops: Vec<f64>,
    ) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        let mut degree: Vec<f64> = self_loops.iter().map(|w| 2.0 * w).collect();
        let mut total_weight: f64 = self_loops.iter().sum();
        for (&(a, b), &w) in weights {
            neighbors[a].push((b, w));
            neighbors[b].push((a, w));
            degree[a] += w;
            degree[b] += w;
            total_weight += w;
        }
        Level {
            neighbors,
            self_loops,
            degree,
            total_weight,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    /// One local-moving phase. Returns the community per node and whether
    /// any node moved.
    fn local_moving(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        if self.total_weight == 0.0 {
            return (community, false);
        }
        let two_m = 2.0 * self.total_weight;
        let mut totals = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut moved_any = false;
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &v in &order {
                let current = community[v];
                let k = self.degree[v];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for &(u, w) in &self.neighbors[v] {
                    *links.entry(community[u]).or_default() += w;
                }
                totals[current] -= k;
                let gain =
                    |c: usize, w: f64, totals: &[f64]| w - resolution * totals[c] * k / two_m;
                let mut best = current;
                let mut best_gain = gain(
                    current,
                    links.get(&current).copied().unwrap_or(0.0),
                    &totals,
                );
                for (&c, &w) in &links {
                    let g = gain(c, w, &totals);
                    if g > best_gain + GAIN_EPSILON {
                        best = c;
                        best_gain = g;
                    }
                }
                totals[best] += k;
                if best != current {
                    community[v] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (community, moved_any)
    }

    /// Collapse communities (already contiguous) into nodes.
    fn aggregate(&self, community: &[usize]) -> Level {
        let count = community.iter().max().map_or(0, |m| m + 1);
        let mut self_loops = vec![0.0; count];
        let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for v in 0..self.len() {
            self_loops[community[v]] += self.self_loops[v];
            for &(u, w) in &self.neighbors[v] {
                if u < v {
                    continue;
                }
                let (a, b) = (community[v], community[u]);
                if a == b {
                    self_loops[a] += w;
                } else {
                    *weights.entry((a.min(b), a.max(b))).or_default() += w;
                }
            }
        }
        Level::from_weights(count, &weights, self_loops)
    }
}

/// Louvain community detection with a seeded node visit order.
pub fn louvain(graph: &DomainGraph, resolution: f64, seed: u64) -> Partition {
    let edges: Vec<(usize, usize)> = graph.undirected_edges().into_iter().collect();
    louvain_undirected(graph.node_count(), &edges, resolution, seed)
}

/// Louvain on a simple undirected graph given as index pairs.
pub fn louvain_undirected(
    n: usize,
    edges: &[(usize, usize)],
    resolution: f64,
    seed: u64,
) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut level = Level::from_edges(n, edges);
    let mut phase_modularity = Vec::new();
    loop {
        let (community, moved) = level.local_moving(resolution, &mut rng);
        if !moved {
            break;
        }
        let community = renumber(&community);
        for c in assignment.iter_mut() {
            *c = community[*c];
        }
        phase_modularity.push(undirected_modularity(n, edges, &assignment, resolution));
        level = level.aggregate(&community);
    }
    let assignment = renumber(&assignment);
    let modularity = undirected_modularity(n, edges, &assignment, resolution);
    Partition {
        assignment,
        modularity,
        seed,
        resolution,
        phase_modularity,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityProfile {
    pub community_id: usize,
    pub size: usize,
    pub misinfo_fraction: f64,
    pub member_domains: Vec<String>,
    pub average_degree: f64,
    pub density: f64,
}

/// One profile per community, largest first (ties by id).
pub fn profile_communities(graph: &DomainGraph, partition: &Partition) -> Vec<CommunityProfile> {
    let mut profiles: Vec<CommunityProfile> = partition
        .communities()
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let misinfo = members
                .iter()
                .filter(|&&v| graph.node(v).label == Label::Misinfo)
                .count();
            let stats = subgraph_stats(graph, &members);
            let mut member_domains: Vec<String> = members
                .iter()
                .map(|&v| graph.node(v).domain.clone())
                .collect();
            member_domains.sort();
            CommunityProfile {
                community_id: id,
                size: members.len(),
                misinfo_fraction: if members.is_empty() {
                    0.0
                } else {
                    misinfo as f64 / members.len() as f64
                },
                member_domains,
                average_degree: stats.average_degree,
                density: stats.density,
            }
        })
        .collect();
    profiles.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then(a.community_id.cmp(&b.community_id))
    });
    profiles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabelIndex;
    use crate::label::Category;
    use proptest::prelude::*;

    fn graph_of(n: usize, edges: &[(usize, usize)]) -> DomainGraph {
        let names: Vec<String> = (0..n).map(|i| format!("d{i:02}.com")).collect();
        DomainGraph::from_edges(
            names.iter().map(String::as_str),
            edges
                .iter()
                .map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
            &LabelIndex::default(),
        )
    }

    fn two_cliques_with_bridge() -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in (i + 1)..5 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((4, 5));
        edges
    }

    /// Restricted-growth enumeration of every set partition.
    fn best_modularity(n: usize, edges: &[(usize, usize)]) -> f64 {
        fn rec(
            i: usize,
            n: usize,
            a: &mut Vec<usize>,
            max: usize,
            edges: &[(usize, usize)],
            best: &mut f64,
        ) {
            if i == n {
                *best = best.max(undirected_modularity(n, edges, a, 1.0));
                return;
            }
            for c in 0..=max + 1 {
                a[i] = c;
                rec(i + 1, n, a, max.max(c), edges, best);
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut a = vec![0; n];
        if n == 0 {
            return 0.0;
        }
        rec(1, n, &mut a, 0, edges, &mut best);
        best
    }

    #[test]
    fn two_triangles() {
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let g = graph_of(6, &edges);
        assert_eq!(modularity(&g, &[0, 0, 0, 1, 1, 1], 1.0).unwrap(), 0.5);
        assert_eq!(modularity(&g, &[0; 6], 1.0).unwrap(), 0.0);
        let p = louvain(&g, 1.0, 3);
        assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(p.modularity, 0.5);
    }

    #[test]
    fn reciprocal_edges_collapse() {
        let g = graph_of(2, &[(0, 1), (1, 0)]);
        assert_eq!(g.undirected_edges().len(), 1);
        assert_eq!(modularity(&g, &[0, 1], 1.0).unwrap(), -0.5);
    }

    #[test]
    fn assignment_length_checked() {
        let g = graph_of(3, &[(0, 1)]);
        assert!(modularity(&g, &[0, 0], 1.0).is_err());
    }

    #[test]
    fn bridge_between_cliques() {
        let edges = two_cliques_with_bridge();
        let g = graph_of(10, &edges);
        let best = best_modularity(10, &edges);
        for seed in 0..10 {
            let p = louvain(&g, 1.0, seed);
            let mut communities = p.communities();
            communities.sort();
            assert_eq!(communities, vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
            assert!((p.modularity - best).abs() < 1e-9);
        }
        // (10/21 - 1/4) per clique.
        assert!((best - 2.0 * (10.0 / 21.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn edgeless_and_single_node() {
        let p = louvain(&graph_of(5, &[]), 1.0, 1);
        assert_eq!(p.assignment, vec![0, 1, 2, 3, 4]);
        assert_eq!(p.modularity, 0.0);
        let p = louvain(&graph_of(1, &[]), 1.0, 1);
        assert_eq!(p.assignment, vec![0]);
        assert_eq!(p.modularity, 0.0);
        let p = louvain(&graph_of(0, &[]), 1.0, 1);
        assert!(p.assignment.is_empty());
    }

    #[test]
    fn resolution_splits_more() {
        let edges = two_cliques_with_bridge();
        let g = graph_of(10, &edges);
        assert_eq!(louvain(&g, 0.01, 0).community_count(), 1);
        assert!(louvain(&g, 5.0, 0).community_count() > 2);
    }

    #[test]
    fn profiles_tally() {
        let idx: LabelIndex = [
            ("d00.com", Label::Misinfo),
            ("d01.com", Label::Misinfo),
            ("d02.com", Label::Info),
            ("d03.com", Label::Info),
        ]
        .into_iter()
        .map(|(d, l)| (d.to_string(), l, Category::Uncategorized))
        .collect();
        let g = DomainGraph::from_edges(
            ["d00.com", "d01.com", "d02.com", "d03.com", "d04.com"],
            [
                ("d00.com", "d01.com"),
                ("d01.com", "d00.com"),
                ("d01.com", "d02.com"),
            ],
            &idx,
        );
        let p = Partition {
            assignment: vec![0, 0, 0, 1, 2],
            modularity: 0.0,
            seed: 0,
            resolution: 1.0,
            phase_modularity: vec![],
        };
        let profiles = profile_communities(&g, &p);
        assert_eq!(profiles.len(), 3);
        assert_eq!(profiles[0].size, 3);
        assert!((profiles[0].misinfo_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(profiles[0].density, 3.0 / 6.0);
        assert_eq!(profiles[0].average_degree, 1.0);
        assert_eq!(profiles[1].member_domains, vec!["d03.com".to_string()]);
        assert_eq!(profiles[1].misinfo_fraction, 0.0);
        assert_eq!(profiles[1].density, 0.0);
        assert_eq!(p.to_csv(&g).lines().nth(4), Some("d03.com,1"));
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1..=max_n).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..n * 3)))
    }

    proptest! {
        #[test]
        fn louvain_never_beats_exhaustive((n, edges) in arb_graph(8), seed in any::<u64>()) {
            let g = graph_of(n, &edges);
            let und: Vec<(usize, usize)> = g.undirected_edges().into_iter().collect();
            let p = louvain(&g, 1.0, seed);
            let best = best_modularity(n, &und);
            prop_assert!(p.modularity <= best + 1e-12);
            let singletons: Vec<usize> = (0..n).collect();
            prop_assert!(p.modularity >= modularity(&g, &singletons, 1.0).unwrap() - 1e-12);
            prop_assert!(p.phase_modularity.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            prop_assert_eq!(p.modularity, modularity(&g, &p.assignment, 1.0).unwrap());
        }

        #[test]
        fn single_community_is_zero((n, edges) in arb_graph(12)) {
            let g = graph_of(n, &edges);
            prop_assert_eq!(modularity(&g, &vec![0; n], 1.0).unwrap(), 0.0);
        }

        #[test]
        fn relabeling_invariant((n, edges) in arb_graph(10), raw in proptest::collection::vec(0usize..4, 10), shift in 1usize..50) {
            let g = graph_of(n, &edges);
            let a: Vec<usize> = raw[..n].to_vec();
            let b: Vec<usize> = a.iter().map(|c| (c * 7 + shift) % 97).collect();
            let qa = modularity(&g, &a, 1.0).unwrap();
            let qb = modularity(&g, &b, 1.0).unwrap();
            prop_assert!((qa - qb).abs() < 1e-12);
        }

        #[test]
        fn seeded_runs_identical((n, edges) in arb_graph(30), seed in any::<u64>()) {
            let g = graph_of(n, &edges);
            prop_assert_eq!(louvain(&g, 1.0, seed), louvain(&g, 1.0, seed));
        }
    }
}
