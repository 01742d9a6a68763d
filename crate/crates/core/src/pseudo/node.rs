use std::fmt;

/// A bid variable `h_{k,j}` or a bid-gap variable `h_{k+½,j}`.
///
/// The position is stored doubled: `k2 = 2k` for the bid of unit `k`,
/// `k2 = 2k + 1` for the gap between units `k` and `k + 1`. Deriving `Ord`
/// on `(k2, j)` gives the order used for lexicographic tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PseudoNode {
    pub k2: u32,
    pub j: u32,
}

impl PseudoNode {
    /// The event "the `unit`-th bid sits at level `level`".
    pub fn bid(unit: u32, level: u32) -> Self {
        Self {
            k2: 2 * unit,
            j: level,
        }
    }

    /// The event "bid `unit` is at least level `level + 1` and bid `unit + 1`
    /// is at most level `level`".
    pub fn gap(unit: u32, level: u32) -> Self {
        Self {
            k2: 2 * unit + 1,
            j: level,
        }
    }

    pub fn is_bid(&self) -> bool {
        self.k2.is_multiple_of(2)
    }

    pub fn is_gap(&self) -> bool {
        !self.is_bid()
    }

    /// Number of units the learner wins when this node's event fires.
    pub fn unit(&self) -> u32 {
        self.k2 / 2
    }
}

impl fmt::Display for PseudoNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bid() {
            write!(f, "h[{},{}]", self.unit(), self.j)
        } else {
            write!(f, "h[{}.5,{}]", self.unit(), self.j)
        }
    }
}

/// One action: the nodes switched on by a grid bid profile, in order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PseudoPath {
    nodes: Vec<PseudoNode>,
}

impl PseudoPath {
    /// Wraps a node sequence without checking it; see
    /// [`crate::pseudo::decode`] for validation.
    pub fn new(nodes: Vec<PseudoNode>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[PseudoNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: &PseudoNode) -> bool {
        self.nodes.contains(node)
    }
}

impl fmt::Display for PseudoPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{node}")?;
        }
        write!(f, ")")
    }
}
