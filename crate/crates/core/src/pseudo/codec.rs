//! Conversion between grid bid profiles and pseudo-bid paths.

use super::graph::PseudoGraph;
use super::node::{PseudoNode, PseudoPath};
use super::PseudoError;
use crate::auction::BidProfile;

/// Path of a grid profile: one bid node per unit, and between units `k` and
/// `k + 1` a gap node for every level strictly below bid `k` and at or above
/// bid `k + 1`, highest level first.
pub fn encode(graph: &PseudoGraph, bids: &BidProfile) -> Result<PseudoPath, PseudoError> {
    let units = graph.units() as usize;
    if bids.units() != units {
        return Err(PseudoError::WrongLength {
            expected: units,
            got: bids.units(),
        });
    }
    let grid = graph.grid();
    let levels = bids
        .bids()
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            grid.level_of(value)
                .ok_or(PseudoError::OffGrid { index, value })
        })
        .collect::<Result<Vec<u32>, _>>()?;

    let mut nodes = Vec::with_capacity(units + grid.inv_epsilon() as usize);
    for (i, &level) in levels.iter().enumerate() {
        let unit = i as u32 + 1;
        nodes.push(PseudoNode::bid(unit, level));
        if let Some(&next) = levels.get(i + 1) {
            nodes.extend((next..level).rev().map(|j| PseudoNode::gap(unit, j)));
        }
    }
    Ok(PseudoPath::new(nodes))
}

/// Bid profile read off the bid nodes of a well-formed path.
pub fn decode(graph: &PseudoGraph, path: &PseudoPath) -> Result<BidProfile, PseudoError> {
    let malformed = |reason: &'static str| PseudoError::MalformedPath { reason };
    let indices = graph
        .path_indices(path)
        .ok_or_else(|| malformed("node outside the graph"))?;
    let first = *indices.first().ok_or_else(|| malformed("empty path"))?;
    if !graph.starts().contains(&first) {
        return Err(malformed("path must start at a first-unit bid node"));
    }
    if indices
        .windows(2)
        .any(|w| !graph.successors(w[0]).contains(&w[1]))
    {
        return Err(malformed("consecutive nodes are not linked"));
    }
    if !graph.successors(*indices.last().unwrap()).is_empty() {
        return Err(malformed("path must end at a last-unit bid node"));
    }
    let bids = path
        .nodes()
        .iter()
        .filter(|n| n.is_bid())
        .map(|n| graph.grid().value(n.j))
        .collect();
    Ok(BidProfile::from_grid_unchecked(bids))
}
