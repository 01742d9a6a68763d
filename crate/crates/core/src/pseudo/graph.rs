use super::node::{PseudoNode, PseudoPath};
use super::PseudoError;
use crate::grid::Grid;

/// Default bound on the number of paths [`PseudoGraph::enumerate_paths`]
/// will materialize.
pub const DEFAULT_PATH_CAP: u64 = 1_000_000;

/// The DAG whose source-to-sink paths are exactly the grid bid profiles.
///
/// Nodes are stored in flat arrays. Row `k2` holds the bid nodes of unit
/// `k2 / 2` (levels `0..=m`) when `k2` is even and the gap nodes between
/// units `k2 / 2` and `k2 / 2 + 1` (levels `0..m`) when it is odd.
#[derive(Debug, Clone)]
pub struct PseudoGraph {
    units: u32,
    grid: Grid,
    nodes: Vec<PseudoNode>,
    row_start: Vec<usize>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    topo: Vec<usize>,
    starts: Vec<usize>,
    sinks: Vec<usize>,
}

/// Graph for `units` bids on the unshifted grid with `inv_epsilon` steps.
pub fn build_graph(units: u32, inv_epsilon: u32) -> PseudoGraph {
    PseudoGraph::new(units, Grid::new(inv_epsilon))
}

impl PseudoGraph {
    /// # Panics
    /// If `units` is zero.
    pub fn new(units: u32, grid: Grid) -> Self {
        assert!(units >= 1, "at least one unit is required");
        let m = grid.inv_epsilon();
        let top_row = 2 * units;

        let mut row_start = vec![0usize; top_row as usize + 2];
        let mut nodes = Vec::new();
        for k2 in 2..=top_row {
            row_start[k2 as usize] = nodes.len();
            let width = if k2 % 2 == 0 { m + 1 } else { m };
            nodes.extend((0..width).map(|j| PseudoNode { k2, j }));
        }
        row_start[top_row as usize + 1] = nodes.len();

        let mut graph = Self {
            units,
            grid,
            nodes,
            row_start,
            successors: Vec::new(),
            predecessors: Vec::new(),
            topo: Vec::new(),
            starts: Vec::new(),
            sinks: Vec::new(),
        };

        let n = graph.nodes.len();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for (idx, node) in graph.nodes.iter().enumerate() {
            for succ in graph.successor_nodes(*node) {
                let s = graph.index_of(succ).expect("successor exists");
                successors[idx].push(s);
                predecessors[s].push(idx);
            }
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_by_key(|&i| graph.nodes[i]);
        }
        graph.successors = successors;
        graph.predecessors = predecessors;
        graph.starts = (0..=m).map(|j| graph.row_start[2] + j as usize).collect();
        graph.sinks = (0..=m)
            .map(|j| graph.row_start[top_row as usize] + j as usize)
            .collect();
        graph.topo = graph.topological_order();
        graph
    }

    fn successor_nodes(&self, node: PseudoNode) -> Vec<PseudoNode> {
        let unit = node.unit();
        if node.is_bid() && unit == self.units {
            return Vec::new();
        }
        if node.j == 0 {
            vec![PseudoNode::bid(unit + 1, 0)]
        } else {
            vec![
                PseudoNode::gap(unit, node.j - 1),
                PseudoNode::bid(unit + 1, node.j),
            ]
        }
    }

    /// Kahn's algorithm; the queue is kept sorted so the order is canonical.
    fn topological_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.predecessors.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<(PseudoNode, usize)> = (0..n)
            .filter(|&i| indegree[i] == 0)
            .map(|i| (self.nodes[i], i))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(entry) = ready.pop_first() {
            let idx = entry.1;
            order.push(idx);
            for &s in &self.successors[idx] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert((self.nodes[s], s));
                }
            }
        }
        debug_assert_eq!(order.len(), n, "graph must be acyclic");
        order
    }

    pub fn units(&self) -> u32 {
        self.units
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn inv_epsilon(&self) -> u32 {
        self.grid.inv_epsilon()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[PseudoNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> PseudoNode {
        self.nodes[idx]
    }

    pub fn index_of(&self, node: PseudoNode) -> Option<usize> {
        if node.k2 < 2 || node.k2 > 2 * self.units {
            return None;
        }
        let start = self.row_start[node.k2 as usize];
        let end = self.row_start[node.k2 as usize + 1];
        let idx = start + node.j as usize;
        (idx < end).then_some(idx)
    }

    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.successors[idx]
    }

    pub fn predecessors(&self, idx: usize) -> &[usize] {
        &self.predecessors[idx]
    }

    /// Bid nodes of the first unit, by increasing level.
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Bid nodes of the last unit, by increasing level.
    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    /// Node indices with every edge pointing forward.
    pub fn topological(&self) -> &[usize] {
        &self.topo
    }

    /// Number of paths, `C(K + m, K)`, saturating at `u64::MAX`.
    pub fn path_count(&self) -> u64 {
        let k = self.units as u128;
        let m = self.inv_epsilon() as u128;
        let mut count: u128 = 1;
        for i in 1..=k {
            count = count * (m + i) / i;
            if count > u64::MAX as u128 {
                return u64::MAX;
            }
        }
        count as u64
    }

    /// Every path, in increasing lexicographic order.
    pub fn enumerate_paths(&self, cap: u64) -> Result<Vec<PseudoPath>, PseudoError> {
        let count = self.path_count();
        if count > cap {
            return Err(PseudoError::TooLarge { count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut stack = Vec::new();
        for &s in &self.starts {
            self.extend_paths(s, &mut stack, &mut out);
        }
        Ok(out)
    }

    fn extend_paths(&self, idx: usize, prefix: &mut Vec<PseudoNode>, out: &mut Vec<PseudoPath>) {
        prefix.push(self.nodes[idx]);
        if self.successors[idx].is_empty() {
            out.push(PseudoPath::new(prefix.clone()));
        } else {
            for &s in &self.successors[idx] {
                self.extend_paths(s, prefix, out);
            }
        }
        prefix.pop();
    }

    /// Node indices of a path that belongs to this graph.
    pub fn path_indices(&self, path: &PseudoPath) -> Option<Vec<usize>> {
        path.nodes().iter().map(|&n| self.index_of(n)).collect()
    }
}
