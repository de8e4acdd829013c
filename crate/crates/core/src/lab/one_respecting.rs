//! Search for a packed spanning tree that crosses some minimum cut once.

use crate::graph::Graph;
use crate::ideal::{mincuts_enumerate, IdealError};
use crate::lab::ladder::lex_mst_pack;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneRespecting {
    pub found: bool,
    /// 0-based index of the first witness tree; the smallest k is this plus one.
    pub tree: Option<usize>,
    /// Vertex side (containing vertex 0) of the cut it crosses once.
    pub cut: Option<Vec<usize>>,
    pub lambda: usize,
    pub cuts: usize,
}

impl OneRespecting {
    pub fn smallest_k(&self) -> Option<u32> {
        self.tree.map(|t| t as u32 + 1)
    }
}

/// Packs `k` trees and scans them, in order, against every minimum cut.
pub fn one_respecting_check(g: &Graph, k: u32) -> Result<OneRespecting, IdealError> {
    let (lambda, cuts) = mincuts_enumerate(g)?;
    let st = lex_mst_pack(g, k).map_err(|_| IdealError::EmptyGraph)?;
    let mut side = vec![vec![false; g.n()]; cuts.len()];
    for (c, s) in cuts.iter().enumerate() {
        for &v in s {
            side[c][v] = true;
        }
    }
    for (t, tree) in st.bases.as_ref().expect("retained").iter().enumerate() {
        for (c, sd) in side.iter().enumerate() {
            let crossing = tree
                .iter()
                .filter(|&&e| {
                    let (u, v) = g.endpoints(e).expect("live edge");
                    sd[u] != sd[v]
                })
                .count();
            if crossing == 1 {
                return Ok(OneRespecting {
                    found: true,
                    tree: Some(t),
                    cut: Some(cuts[c].clone()),
                    lambda,
                    cuts: cuts.len(),
                });
            }
        }
    }
    Ok(OneRespecting { found: false, tree: None, cut: None, lambda, cuts: cuts.len() })
}

/// `64 lambda^3 ceil(ln m)`, the tree budget used by the property check.
pub fn tree_budget(lambda: usize, m: usize) -> u32 {
    let l = lambda as f64;
    (64.0 * l * l * l * (m as f64).ln().ceil()) as u32
}
