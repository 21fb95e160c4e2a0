use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};

/// Node identifier; ids are contiguous in `[0, n_nodes)`.
pub type NodeId = usize;

/// Undirected simple graph with symmetric adjacency lists.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    n_edges: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops and duplicate edges are
    /// rejected; use [`Graph::from_edges_lenient`] to drop them instead.
    pub fn from_edges(n_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let (g, self_loops, duplicates) = Self::build(n_nodes, edges)?;
        if self_loops > 0 || duplicates > 0 {
            return Err(Error::Parameter(format!(
                "edge list contains {self_loops} self-loop(s) and {duplicates} duplicate(s)"
            )));
        }
        Ok(g)
    }

    /// Builds a graph, dropping self-loops and duplicate edges; returns the
    /// graph together with the dropped counts `(self_loops, duplicates)`.
    pub fn from_edges_lenient(
        n_nodes: usize,
        edges: &[(NodeId, NodeId)],
    ) -> Result<(Self, usize, usize)> {
        Self::build(n_nodes, edges)
    }

    fn build(n_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<(Self, usize, usize)> {
        let mut adj = vec![Vec::new(); n_nodes];
        let mut self_loops = 0usize;
        for &(u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut duplicates = 0usize;
        for list in &mut adj {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            duplicates += before - list.len();
        }
        // Each duplicate edge was counted once per endpoint.
        duplicates /= 2;
        let n_edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok((Graph { adj, n_edges }, self_loops, duplicates))
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.adj.len()
    }

    /// Iterates every edge once, as ordered pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_set(&self) -> Vec<(NodeId, NodeId)> {
        self.edges().collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adj.is_empty() {
            0.0
        } else {
            2.0 * self.n_edges as f64 / self.adj.len() as f64
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n_nodes()
    }
}

/// A subgraph re-indexed to contiguous ids, with the id mapping retained.
#[derive(Debug, Clone)]
pub struct SubgraphResult {
    pub graph: Graph,
    /// `new_to_old[new_id]` is the node's id in the source graph.
    pub new_to_old: Vec<NodeId>,
}

impl SubgraphResult {
    /// Inverse lookup into the source graph.
    pub fn old_to_new(&self, old: NodeId) -> Option<NodeId> {
        self.new_to_old.iter().position(|&o| o == old)
    }
}

/// Extracts the largest connected component, re-indexed to contiguous ids in
/// ascending original-id order. Ties between equal-size components go to the
/// component containing the smallest original node id.
pub fn largest_connected_component(g: &Graph) -> SubgraphResult {
    let n = g.n_nodes();
    let mut comp = vec![usize::MAX; n];
    let mut best_root = 0;
    let mut best_size = 0;
    let mut n_comps = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = n_comps;
        n_comps += 1;
        comp[start] = id;
        let mut size = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    size += 1;
                    queue.push_back(v);
                }
            }
        }
        // Scanning roots in ascending id order makes "first largest" the
        // component with the smallest contained original id.
        if size > best_size {
            best_size = size;
            best_root = id;
        }
    }
    let new_to_old: Vec<NodeId> = (0..n).filter(|&u| comp[u] == best_root).collect();
    let mut old_to_new = vec![usize::MAX; n];
    for (new, &old) in new_to_old.iter().enumerate() {
        old_to_new[old] = new;
    }
    let edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .filter(|&(u, _)| comp[u] == best_root)
        .map(|(u, v)| (old_to_new[u], old_to_new[v]))
        .collect();
    let graph = Graph::from_edges(new_to_old.len(), &edges).expect("component edges are valid");
    SubgraphResult { graph, new_to_old }
}

/// Grows a connected `target_n`-node subgraph by repeatedly attaching a
/// not-yet-included neighbour chosen with probability inversely proportional
/// to its degree. Attachment prefers the newest included node; when the
/// newest node has no unvisited neighbours the owner falls back to a
/// uniformly random included node that still has some. The result contains
/// exactly the sampled attachment edges (a tree).
pub fn degree_biased_subsample(g: &Graph, target_n: usize, seed: u64) -> Result<SubgraphResult> {
    let n = g.n_nodes();
    if target_n == 0 {
        return Err(Error::Parameter("target_n must be >= 1".into()));
    }
    if target_n > n {
        return Err(Error::Parameter(format!(
            "target_n = {target_n} exceeds n_nodes = {n}"
        )));
    }
    let mut rng = crate::seeds::rng_for(seed, &[0x7375]);

    let mut included = vec![false; n];
    let mut new_to_old = Vec::with_capacity(target_n);
    // Included nodes that still have at least one unvisited neighbour, with
    // a positional index for O(1) removal.
    let mut owners: Vec<NodeId> = Vec::new();
    let mut owner_pos = vec![usize::MAX; n];
    // Remaining unvisited-neighbour counts for included nodes.
    let mut open = vec![0usize; n];

    let add_node = |u: NodeId,
                        included: &mut Vec<bool>,
                        owners: &mut Vec<NodeId>,
                        owner_pos: &mut Vec<usize>,
                        open: &mut Vec<usize>,
                        new_to_old: &mut Vec<NodeId>| {
        included[u] = true;
        new_to_old.push(u);
        open[u] = g.neighbors(u).iter().filter(|&&w| !included[w]).count();
        if open[u] > 0 {
            owner_pos[u] = owners.len();
            owners.push(u);
        }
        for &w in g.neighbors(u) {
            if included[w] && owner_pos[w] != usize::MAX {
                open[w] -= 1;
                if open[w] == 0 {
                    let pos = owner_pos[w];
                    let last = *owners.last().unwrap();
                    owners.swap_remove(pos);
                    owner_pos[w] = usize::MAX;
                    if last != w {
                        owner_pos[last] = pos;
                    }
                }
            }
        }
    };

    let start = rng.gen_range(0..n);
    add_node(
        start,
        &mut included,
        &mut owners,
        &mut owner_pos,
        &mut open,
        &mut new_to_old,
    );
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(target_n.saturating_sub(1));
    let mut newest = start;

    while new_to_old.len() < target_n {
        let owner = if included[newest] && open[newest] > 0 {
            newest
        } else if owners.is_empty() {
            return Err(Error::Generation(format!(
                "frontier exhausted at {} of {target_n} nodes; graph not connected",
                new_to_old.len()
            )));
        } else {
            owners[rng.gen_range(0..owners.len())]
        };
        let candidates: Vec<NodeId> = g
            .neighbors(owner)
            .iter()
            .copied()
            .filter(|&w| !included[w])
            .collect();
        let weights: Vec<f64> = candidates.iter().map(|&w| 1.0 / g.degree(w) as f64).collect();
        let total: f64 = weights.iter().sum();
        let mut draw = rng.gen::<f64>() * total;
        let mut chosen = *candidates.last().unwrap();
        for (&c, &w) in candidates.iter().zip(&weights) {
            if draw < w {
                chosen = c;
                break;
            }
            draw -= w;
        }
        edges.push((owner, chosen));
        add_node(
            chosen,
            &mut included,
            &mut owners,
            &mut owner_pos,
            &mut open,
            &mut new_to_old,
        );
        newest = chosen;
    }

    let mut old_to_new = vec![usize::MAX; n];
    for (new, &old) in new_to_old.iter().enumerate() {
        old_to_new[old] = new;
    }
    let mapped: Vec<(NodeId, NodeId)> = edges
        .iter()
        .map(|&(u, v)| (old_to_new[u], old_to_new[v]))
        .collect();
    let graph = Graph::from_edges(target_n, &mapped).expect("attachment edges are valid");
    Ok(SubgraphResult { graph, new_to_old })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle_plus_edge() -> Graph {
        Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap()
    }

    #[test]
    fn lcc_of_connected_triangle_is_identity() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.graph.edge_set(), g.edge_set());
        assert_eq!(lcc.new_to_old, vec![0, 1, 2]);
    }

    #[test]
    fn lcc_picks_larger_component() {
        let lcc = largest_connected_component(&triangle_plus_edge());
        assert_eq!(lcc.graph.n_nodes(), 3);
        assert_eq!(lcc.graph.n_edges(), 3);
        assert_eq!(lcc.new_to_old, vec![0, 1, 2]);
    }

    #[test]
    fn lcc_tie_break_prefers_smallest_original_id() {
        // Two triangles of equal size; the one containing node 0 must win.
        let g = Graph::from_edges(6, &[(3, 4), (4, 5), (3, 5), (0, 1), (1, 2), (0, 2)]).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.new_to_old, vec![0, 1, 2]);
        assert_eq!(lcc.old_to_new(4), None);
        assert_eq!(lcc.old_to_new(2), Some(2));
    }

    #[test]
    fn subsample_single_node_has_no_edges() {
        let g = triangle_plus_edge();
        let sub = degree_biased_subsample(&largest_connected_component(&g).graph, 1, 5).unwrap();
        assert_eq!(sub.graph.n_nodes(), 1);
        assert_eq!(sub.graph.n_edges(), 0);
    }

    #[test]
    fn subsample_of_whole_tree_returns_the_tree() {
        let tree = Graph::from_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]).unwrap();
        for seed in 0..10 {
            let sub = degree_biased_subsample(&tree, 6, seed).unwrap();
            assert_eq!(sub.graph.n_edges(), 5);
            let mut back: Vec<(usize, usize)> = sub
                .graph
                .edges()
                .map(|(u, v)| {
                    let (a, b) = (sub.new_to_old[u], sub.new_to_old[v]);
                    (a.min(b), a.max(b))
                })
                .collect();
            back.sort_unstable();
            assert_eq!(back, tree.edge_set());
        }
    }

    #[test]
    fn subsample_star_from_leaf_goes_through_center() {
        // 5-node star with center 0. Starting anywhere, the walk must reach
        // the center after at most one step, and every leaf is then equally
        // likely: check the uniform-choice statistics loosely.
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let mut second_pick = [0usize; 5];
        for seed in 0..4000 {
            let sub = degree_biased_subsample(&star, 3, seed).unwrap();
            // Of the three sampled nodes one is the center; record the last
            // added leaf to probe the uniform frontier choice.
            let last = *sub.new_to_old.last().unwrap();
            if sub.new_to_old[0] != 0 {
                // started at a leaf: second node must be the center
                assert_eq!(sub.new_to_old[1], 0);
                second_pick[last] += 1;
            }
        }
        let picked: Vec<usize> = (1..5).map(|l| second_pick[l]).collect();
        let total: usize = picked.iter().sum();
        for &c in &picked {
            let share = c as f64 / total as f64;
            // 3 remaining leaves minus the start leaf are eligible per run.
            assert!((0.20..0.47).contains(&share), "share {share}");
        }
    }

    #[test]
    fn subsample_rejects_oversized_target() {
        let g = triangle_plus_edge();
        assert!(matches!(
            degree_biased_subsample(&g, 6, 0),
            Err(Error::Parameter(_))
        ));
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric_and_simple(edges in proptest::collection::vec((0usize..30, 0usize..30), 0..120)) {
            let (g, _, _) = Graph::from_edges_lenient(30, &edges).unwrap();
            for u in g.node_ids() {
                for &v in g.neighbors(u) {
                    prop_assert!(u != v);
                    prop_assert!(g.neighbors(v).contains(&u));
                }
                let mut sorted = g.neighbors(u).to_vec();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), g.degree(u));
            }
        }

        #[test]
        fn subsample_is_connected_with_exact_size(target in 1usize..=40, seed in 0u64..50) {
            let spec = crate::netgen::ModelSpec::Er { n: 60, p: 0.08 };
            let g = crate::netgen::generate(&spec, 11).unwrap();
            let target = target.min(g.n_nodes());
            let sub = degree_biased_subsample(&g, target, seed).unwrap();
            prop_assert_eq!(sub.graph.n_nodes(), target);
            prop_assert!(sub.graph.is_connected());
            prop_assert_eq!(sub.graph.n_edges(), target - 1);
        }
    }
}
