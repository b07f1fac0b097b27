//! Directed sensing topology of a leader-follower formation.
//!
//! An edge `(i, j)` means node `i` measures the relative position of node
//! `j`; the neighbor set of a node is everything it measures. Leaders are
//! anchors: they measure nothing and their motion is imposed from outside.
//! Followers close the loop over their neighbors, so the information flow
//! must be acyclic for the formation to be solvable layer by layer.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::report::{ValidationReport, Violation};

/// 1-based node index; scenario files, reports, and exports all use the same
/// numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn new(id: usize) -> Self {
        assert!(id >= 1, "node ids are 1-based");
        NodeId(id)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based position in stacked vectors and matrices.
    pub(crate) fn index(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn from_index(index: usize) -> Self {
        NodeId(index + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Immutable sensing graph over nodes `1..=n` with a designated leader set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormationGraph {
    n: usize,
    leaders: Vec<NodeId>,
    edges: BTreeSet<(NodeId, NodeId)>,
    /// Neighbor lists by measuring node, ascending; derived from `edges`.
    neighbors: Vec<Vec<NodeId>>,
}

impl FormationGraph {
    /// Builds a graph over `n` nodes. `leaders` and edge endpoints are
    /// 1-based ids; duplicate edges collapse.
    pub fn new(
        n: usize,
        leaders: &[usize],
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewNodes { got: n, min: 3 });
        }
        let check = |id: usize| -> Result<NodeId> {
            if id < 1 || id > n {
                Err(Error::NodeOutOfRange { id, n })
            } else {
                Ok(NodeId(id))
            }
        };
        let mut leader_ids = Vec::with_capacity(leaders.len());
        for &id in leaders {
            let id = check(id)?;
            if leader_ids.contains(&id) {
                return Err(Error::DuplicateLeader(id));
            }
            leader_ids.push(id);
        }
        let mut edge_set = BTreeSet::new();
        let mut neighbors = vec![Vec::new(); n];
        for (i, j) in edges {
            let (i, j) = (check(i)?, check(j)?);
            if edge_set.insert((i, j)) {
                neighbors[i.index()].push(j);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(FormationGraph {
            n,
            leaders: leader_ids,
            edges: edge_set,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn leader_count(&self) -> usize {
        self.leaders.len()
    }

    pub fn follower_count(&self) -> usize {
        self.n - self.leaders.len()
    }

    /// Leaders in their declared order.
    pub fn leaders(&self) -> &[NodeId] {
        &self.leaders
    }

    /// Non-leader nodes in ascending id order.
    pub fn followers(&self) -> Vec<NodeId> {
        (1..=self.n)
            .map(NodeId)
            .filter(|id| !self.is_leader(*id))
            .collect()
    }

    pub fn is_leader(&self, id: NodeId) -> bool {
        self.leaders.contains(&id)
    }

    /// Nodes measured by `id`, ascending.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.neighbors[id.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    /// Checks the structural assumptions and reports every violation found.
    /// The result depends only on the edge set, not on insertion order.
    pub fn validate_topology(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.has_cycle() {
            report.push(Violation::Cycle);
        }
        if self.leaders.len() != 2 {
            report.push(Violation::LeaderCount {
                count: self.leaders.len(),
            });
        }
        for &leader in &self.leaders {
            let count = self.neighbors(leader).len();
            if count != 0 {
                report.push(Violation::LeaderInEdges { leader, count });
            }
        }
        for follower in self.followers() {
            let degree = self.neighbors(follower).len();
            if degree != 2 {
                report.push(Violation::FollowerDegree { follower, degree });
            }
        }
        report
    }

    pub fn has_cycle(&self) -> bool {
        // Kahn's algorithm: nodes become ready once everything they measure
        // has been placed.
        let mut pending: Vec<usize> = self.neighbors.iter().map(Vec::len).collect();
        let watchers = self.watchers();
        let mut queue: Vec<usize> = (0..self.n).filter(|&ix| pending[ix] == 0).collect();
        let mut placed = 0;
        while let Some(ix) = queue.pop() {
            placed += 1;
            for &w in &watchers[ix] {
                pending[w] -= 1;
                if pending[w] == 0 {
                    queue.push(w);
                }
            }
        }
        placed < self.n
    }

    /// Reverse adjacency: `watchers[j]` lists the 0-based indices of nodes
    /// that measure node `j + 1`.
    fn watchers(&self) -> Vec<Vec<usize>> {
        let mut watchers = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            watchers[j.index()].push(i.index());
        }
        watchers
    }

    /// Renumbers the formation so that leaders occupy positions `1..=n_l` in
    /// their declared order and every follower comes after everything it
    /// measures. Ties between ready followers go to the smallest original
    /// id, so the result is deterministic.
    pub fn topological_renumbering(&self) -> Result<Permutation> {
        if self.has_cycle() {
            return Err(Error::CycleDetected);
        }
        let watchers = self.watchers();
        let mut placed = vec![false; self.n];
        for &leader in &self.leaders {
            placed[leader.index()] = true;
        }
        // Followers wait on their not-yet-placed neighbors; leaders count as
        // placed from the start.
        let mut pending: Vec<usize> = (0..self.n)
            .map(|ix| {
                self.neighbors[ix]
                    .iter()
                    .filter(|nb| !placed[nb.index()])
                    .count()
            })
            .collect();
        let mut ready: BinaryHeap<Reverse<usize>> = (0..self.n)
            .filter(|&ix| !placed[ix] && pending[ix] == 0)
            .map(Reverse)
            .collect();
        let mut order: Vec<NodeId> = self.leaders.clone();
        while let Some(Reverse(ix)) = ready.pop() {
            debug_assert!(!placed[ix]);
            placed[ix] = true;
            order.push(NodeId::from_index(ix));
            for &w in &watchers[ix] {
                if !placed[w] {
                    pending[w] -= 1;
                    if pending[w] == 0 {
                        ready.push(Reverse(w));
                    }
                }
            }
        }
        if order.len() < self.n {
            return Err(Error::CycleDetected);
        }
        Ok(Permutation::from_order(&order))
    }

    /// Scalar Laplacian of the sensing graph: diagonal entries carry the
    /// neighbor count, off-diagonal entries are -1 toward each neighbor.
    pub fn standard_laplacian(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for ix in 0..self.n {
            m[(ix, ix)] = self.neighbors[ix].len() as f64;
            for nb in &self.neighbors[ix] {
                m[(ix, nb.index())] -= 1.0;
            }
        }
        m
    }
}

/// A relabeling of node ids, stored as old index -> new index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
}

impl Permutation {
    /// `order[k]` is the old id assigned to new position `k + 1`.
    fn from_order(order: &[NodeId]) -> Self {
        let mut forward = vec![usize::MAX; order.len()];
        for (new_ix, old) in order.iter().enumerate() {
            forward[old.index()] = new_ix;
        }
        Permutation { forward }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(ix, &new)| ix == new)
    }

    /// New id of an old node.
    pub fn map(&self, id: NodeId) -> NodeId {
        NodeId::from_index(self.forward[id.index()])
    }

    pub fn inverse(&self) -> Permutation {
        let mut forward = vec![usize::MAX; self.forward.len()];
        for (old, &new) in self.forward.iter().enumerate() {
            forward[new] = old;
        }
        Permutation { forward }
    }

    /// Reorders per-node data: entry for old node `i` moves to `map(i)`.
    pub fn permute_items<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.forward.len());
        let mut out = items.to_vec();
        for (old, item) in items.iter().enumerate() {
            out[self.forward[old]] = item.clone();
        }
        out
    }

    /// Permutation matrix P with `P[new, old] = 1`, so conjugating a matrix
    /// indexed by old ids as `P * M * P^T` re-indexes it by new ids.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.forward.len();
        let mut p = DMatrix::zeros(n, n);
        for (old, &new) in self.forward.iter().enumerate() {
            p[(new, old)] = 1.0;
        }
        p
    }

    /// The same graph with every node renamed to its new id.
    pub fn apply_to_graph(&self, g: &FormationGraph) -> FormationGraph {
        let leaders: Vec<usize> = g.leaders.iter().map(|&l| self.map(l).get()).collect();
        let edges: Vec<(usize, usize)> = g
            .edges
            .iter()
            .map(|&(i, j)| (self.map(i).get(), self.map(j).get()))
            .collect();
        FormationGraph::new(g.n, &leaders, edges).expect("relabeling preserves graph validity")
    }
}
