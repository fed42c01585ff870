//! Partitioning of Hamiltonian terms into disjoint groups for parallel block
//! encoding.
//!
//! Terms acting on disjoint mode sets commute and can be encoded in parallel,
//! so grouping reduces to proper coloring of the conflict graph whose nodes
//! are terms and whose edges join terms sharing at least one mode. The
//! parallel circuit depth of a plan is `Σ_groups max(node cost)`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Default refusal bound of [`exact_coloring`].
pub const DEFAULT_EXACT_NODE_LIMIT: usize = 30;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("exact coloring limited to {limit} nodes, got {nodes}; use the greedy algorithm")]
    TooManyNodesForExact { nodes: usize, limit: usize },
    #[error("plan is not a partition of the node set")]
    NotAPartition,
    #[error("group {group} contains conflicting nodes {a:?} and {b:?}")]
    ConflictWithinGroup { group: usize, a: String, b: String },
    #[error("no cost attached to node {0:?}")]
    MissingCost(String),
}

/// One schedulable term: an identifier, the set of modes it acts on, and its
/// block-encoding Toffoli cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermNode {
    pub id: String,
    pub modes: BTreeSet<usize>,
    pub cost: u64,
}

impl TermNode {
    pub fn new(id: impl Into<String>, modes: impl IntoIterator<Item = usize>, cost: u64) -> Self {
        Self { id: id.into(), modes: modes.into_iter().collect(), cost }
    }

    pub fn conflicts_with(&self, other: &Self) -> bool {
        !self.modes.is_disjoint(&other.modes)
    }
}

/// Conflict graph over term nodes; edge iff the mode sets intersect.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub nodes: Vec<TermNode>,
    /// Adjacency by node position, derived from the mode sets.
    adjacency: Vec<Vec<usize>>,
}

impl ConflictGraph {
    /// Build from nodes in the given order; the order is the visit order of
    /// the sequential algorithms.
    pub fn new(nodes: Vec<TermNode>) -> Self {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if nodes[i].conflicts_with(&nodes[j]) {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        Self { nodes, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(&j)
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Conflict graph of a Hamiltonian's couplings: one node per coupling,
/// identified by [`mc_id`](crate::sop::mc_id), carrying its mode set and the
/// block-encoding Toffoli cost supplied by the caller. Nodes are ordered by
/// mode tuple (lexicographic), then id.
pub fn build_conflict_graph(
    h: &crate::sop::SopHamiltonian,
    costs: &std::collections::BTreeMap<String, u64>,
) -> Result<ConflictGraph, GroupError> {
    let mut nodes = Vec::with_capacity(h.couplings.len());
    for mc in &h.couplings {
        if mc.term_count() == 0 {
            continue;
        }
        let id = crate::sop::mc_id(&mc.modes);
        let cost = *costs.get(&id).ok_or_else(|| GroupError::MissingCost(id.clone()))?;
        nodes.push(TermNode::new(id, mc.modes.iter().copied(), cost));
    }
    nodes.sort_by(|a, b| a.modes.cmp(&b.modes).then_with(|| a.id.cmp(&b.id)));
    Ok(ConflictGraph::new(nodes))
}

/// Strategy that produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingAlgorithm {
    Naive,
    Greedy,
    Exact,
}

impl std::fmt::Display for GroupingAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GroupingAlgorithm::Naive => "naive",
            GroupingAlgorithm::Greedy => "greedy",
            GroupingAlgorithm::Exact => "exact",
        })
    }
}

/// An ordered partition of the term set into pairwise mode-disjoint groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub algorithm: GroupingAlgorithm,
    pub weighted: bool,
    /// Groups as lists of node ids.
    pub groups: Vec<Vec<String>>,
    /// `Σ_groups max(node cost)`.
    pub depth_cost: u64,
    /// True when the group count is certified minimal.
    pub optimal: bool,
}

impl GroupingPlan {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

fn plan_from_positions(
    g: &ConflictGraph,
    algorithm: GroupingAlgorithm,
    weighted: bool,
    optimal: bool,
    groups_pos: Vec<Vec<usize>>,
) -> GroupingPlan {
    let depth_cost = groups_pos
        .iter()
        .map(|grp| grp.iter().map(|&i| g.nodes[i].cost).max().unwrap_or(0))
        .sum();
    let groups = groups_pos
        .into_iter()
        .map(|grp| grp.into_iter().map(|i| g.nodes[i].id.clone()).collect())
        .collect();
    GroupingPlan { algorithm, weighted, groups, depth_cost, optimal }
}

/// Single pass in node order: a node disjoint from everything in the current
/// group joins it, otherwise it opens a new group. Earlier groups are never
/// revisited.
pub fn naive_grouping(g: &ConflictGraph) -> GroupingPlan {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for i in 0..g.node_count() {
        if current.iter().any(|&j| g.are_adjacent(i, j)) {
            groups.push(std::mem::take(&mut current));
        }
        current.push(i);
    }
    if !current.is_empty() {
        groups.push(current);
    }
    plan_from_positions(g, GroupingAlgorithm::Naive, false, false, groups)
}

/// Largest-first greedy coloring: nodes in descending degree (ties by node
/// order), each taking the smallest color absent from its neighbors. Uses at
/// most `max_degree + 1` groups.
pub fn greedy_largest_first(g: &ConflictGraph) -> GroupingPlan {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(g.degree(i)), i));

    let mut color = vec![usize::MAX; n];
    let mut n_colors = 0;
    for &i in &order {
        let used: BTreeSet<usize> = g.adjacency[i]
            .iter()
            .map(|&j| color[j])
            .filter(|&c| c != usize::MAX)
            .collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color[i] = c;
        n_colors = n_colors.max(c + 1);
    }

    let mut groups = vec![Vec::new(); n_colors];
    for i in 0..n {
        groups[color[i]].push(i);
    }
    plan_from_positions(g, GroupingAlgorithm::Greedy, false, false, groups)
}

/// Exact chromatic coloring by branch and bound, with a greedy clique as the
/// lower bound and the largest-first coloring as the upper bound.
pub fn exact_coloring(g: &ConflictGraph, node_limit: usize) -> Result<GroupingPlan, GroupError> {
    let n = g.node_count();
    if n > node_limit {
        return Err(GroupError::TooManyNodesForExact { nodes: n, limit: node_limit });
    }
    if n == 0 {
        return Ok(plan_from_positions(g, GroupingAlgorithm::Exact, false, true, Vec::new()));
    }

    // Greedy clique on a highest-degree start; a clique forces one color per
    // member, giving the lower bound.
    let mut clique: Vec<usize> = Vec::new();
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by_key(|&i| std::cmp::Reverse(g.degree(i)));
    for i in candidates {
        if clique.iter().all(|&j| g.are_adjacent(i, j)) {
            clique.push(i);
        }
    }
    let lower = clique.len();

    let greedy = greedy_largest_first(g);
    let mut best_k = greedy.group_count();
    let mut best_color: Vec<usize> = {
        let mut c = vec![0; n];
        for (color, grp) in greedy.groups.iter().enumerate() {
            for id in grp {
                let pos = g.nodes.iter().position(|t| &t.id == id).unwrap();
                c[pos] = color;
            }
        }
        c
    };

    // Branch over nodes in descending-degree order; each node tries the used
    // colors plus at most one fresh color, pruning at the incumbent.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(g.degree(i)), i));

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        g: &ConflictGraph,
        order: &[usize],
        depth: usize,
        used: usize,
        color: &mut Vec<usize>,
        best_k: &mut usize,
        best_color: &mut Vec<usize>,
        lower: usize,
    ) {
        if used >= *best_k {
            return;
        }
        if depth == order.len() {
            *best_k = used;
            *best_color = color.clone();
            return;
        }
        let i = order[depth];
        let forbidden: BTreeSet<usize> = g.adjacency[i]
            .iter()
            .filter(|&&j| color[j] != usize::MAX)
            .map(|&j| color[j])
            .collect();
        // Colors already in use plus at most one fresh color; the entry
        // prune cuts branches that cannot beat the incumbent.
        for c in 0..=used {
            if forbidden.contains(&c) {
                continue;
            }
            color[i] = c;
            let new_used = used.max(c + 1);
            dfs(g, order, depth + 1, new_used, color, best_k, best_color, lower);
            color[i] = usize::MAX;
            if *best_k == lower {
                return; // already optimal
            }
        }
    }

    if best_k > lower {
        let mut color = vec![usize::MAX; n];
        dfs(g, &order, 0, 0, &mut color, &mut best_k, &mut best_color, lower);
    }

    let mut groups = vec![Vec::new(); best_k];
    for i in 0..n {
        groups[best_color[i]].push(i);
    }
    Ok(plan_from_positions(g, GroupingAlgorithm::Exact, false, true, groups))
}

/// Divide and conquer on cost: nodes are bucketed by exactly equal cost,
/// buckets colored independently with `base` in descending cost order, and
/// groups from different buckets are never merged.
pub fn weighted_grouping(
    g: &ConflictGraph,
    base: GroupingAlgorithm,
    node_limit: usize,
) -> Result<GroupingPlan, GroupError> {
    let mut costs: Vec<u64> = g.nodes.iter().map(|t| t.cost).collect();
    costs.sort_unstable();
    costs.dedup();
    costs.reverse();

    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut depth_cost = 0u64;
    for cost in costs {
        let bucket: Vec<TermNode> =
            g.nodes.iter().filter(|t| t.cost == cost).cloned().collect();
        let sub = ConflictGraph::new(bucket);
        let plan = run(&sub, base, node_limit)?;
        depth_cost += plan.depth_cost;
        groups.extend(plan.groups);
    }
    Ok(GroupingPlan { algorithm: base, weighted: true, groups, depth_cost, optimal: false })
}

/// Run the named algorithm unweighted.
pub fn run(
    g: &ConflictGraph,
    algorithm: GroupingAlgorithm,
    node_limit: usize,
) -> Result<GroupingPlan, GroupError> {
    Ok(match algorithm {
        GroupingAlgorithm::Naive => naive_grouping(g),
        GroupingAlgorithm::Greedy => greedy_largest_first(g),
        GroupingAlgorithm::Exact => exact_coloring(g, node_limit)?,
    })
}

/// Check that `plan` partitions the node set of `g` into groups of pairwise
/// mode-disjoint terms. Every plan producer above yields partitions by
/// construction; this is the independent checker.
pub fn verify_plan(g: &ConflictGraph, plan: &GroupingPlan) -> Result<(), GroupError> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut count = 0usize;
    for (gi, group) in plan.groups.iter().enumerate() {
        for (a_pos, id_a) in group.iter().enumerate() {
            let a = g
                .nodes
                .iter()
                .find(|t| &t.id == id_a)
                .ok_or(GroupError::NotAPartition)?;
            if !seen.insert(id_a) {
                return Err(GroupError::NotAPartition);
            }
            count += 1;
            for id_b in &group[a_pos + 1..] {
                let b = g
                    .nodes
                    .iter()
                    .find(|t| &t.id == id_b)
                    .ok_or(GroupError::NotAPartition)?;
                if a.conflicts_with(b) {
                    return Err(GroupError::ConflictWithinGroup {
                        group: gi,
                        a: a.id.clone(),
                        b: b.id.clone(),
                    });
                }
            }
        }
    }
    if count != g.node_count() {
        return Err(GroupError::NotAPartition);
    }
    Ok(())
}

/// Parallel depth of a plan under explicit per-node costs:
/// `Σ_groups max cost`.
pub fn evaluate_depth(
    plan: &GroupingPlan,
    costs: &std::collections::BTreeMap<String, u64>,
) -> Result<u64, GroupError> {
    let mut total = 0u64;
    for group in &plan.groups {
        let mut max = 0u64;
        for id in group {
            let c = costs.get(id).ok_or_else(|| GroupError::MissingCost(id.clone()))?;
            max = max.max(*c);
        }
        total += max;
    }
    Ok(total)
}

/// Minimum coloring by exhaustive search; test oracle for small graphs.
pub fn brute_force_chromatic(g: &ConflictGraph) -> usize {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    'k: for k in 1..=n {
        let mut assign = vec![0usize; n];
        loop {
            let proper = (0..n).all(|i| {
                g.adjacency[i].iter().all(|&j| j > i || assign[j] != assign[i])
            });
            if proper {
                return k;
            }
            // next assignment in base k
            let mut pos = 0;
            loop {
                if pos == n {
                    continue 'k;
                }
                assign[pos] += 1;
                if assign[pos] < k {
                    break;
                }
                assign[pos] = 0;
                pos += 1;
            }
        }
    }
    n
}
