//! The 2 x d ladder `G_d`, its w-fold copy `G_d^w`, and the lexicographic
//! MST packing used on it.
//!
//! Vertex `c` is the top of column `c`, vertex `d + c` the bottom. Base edges
//! are listed column by column: rung, then the top rail to the next column,
//! then the bottom rail. Copy `c` of base edge `i` gets id `i * w + c`, so ids
//! double as the tie-break index.

use std::fmt;

use num_bigint::BigInt;

use crate::graph::{EdgeId, Graph, MatroidKind};
use crate::packing::{LoadsVector, PackError, PackOptions, Packer, PackingState};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Rung of a column.
    R,
    /// Top rail from a column to the next.
    T,
    /// Bottom rail from a column to the next.
    B,
}

impl Side {
    pub fn from_char(c: char) -> Option<Side> {
        match c {
            'R' => Some(Side::R),
            'T' => Some(Side::T),
            'B' => Some(Side::B),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Side::R => 'R',
            Side::T => 'T',
            Side::B => 'B',
        };
        write!(f, "{c}")
    }
}

/// A base ladder edge: side and column.
pub type Slot = (Side, i64);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderSpec {
    pub d: usize,
    pub w: usize,
    /// Within-column order of the base edges; `new` uses the frozen fixture order.
    pub ordering: [Side; 3],
}

impl LadderSpec {
    pub fn new(d: usize, w: usize) -> Self {
        LadderSpec { d, w, ordering: super::tiles::frozen_ordering() }
    }

    pub fn n(&self) -> usize {
        2 * self.d
    }

    pub fn m(&self) -> usize {
        (3 * self.d - 2) * self.w
    }

    /// Edge connectivity, `2w`.
    pub fn lambda(&self) -> usize {
        2 * self.w
    }

    /// `(n - 1) / m`, every edge's ideal load.
    pub fn x_star(&self) -> Rational {
        Rational::new(BigInt::from(self.n() - 1), BigInt::from(self.m()))
    }
}

/// Ladder graph plus the slot of every base edge.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub spec: LadderSpec,
    pub graph: Graph,
    /// Indexed by base edge index.
    pub slots: Vec<Slot>,
}

impl Ladder {
    pub fn base_index(&self, e: EdgeId) -> usize {
        e as usize / self.spec.w
    }

    pub fn slot(&self, e: EdgeId) -> Slot {
        self.slots[self.base_index(e)]
    }

    /// Uniform ideal loads.
    pub fn x_star(&self) -> LoadsVector<Rational> {
        LoadsVector::uniform(self.graph.edge_ids(), self.spec.x_star())
    }

    /// Per base edge, the count summed over its copies.
    pub fn base_counts(&self, st: &PackingState) -> Vec<u32> {
        let mut out = vec![0; self.slots.len()];
        for e in self.graph.edge_ids() {
            out[self.base_index(e)] += st.count(e);
        }
        out
    }
}

pub fn ladder_graph(spec: &LadderSpec) -> Ladder {
    assert!(spec.d >= 2 && spec.w >= 1, "ladder needs d >= 2 and w >= 1");
    let d = spec.d;
    let mut slots = Vec::with_capacity(3 * d - 2);
    for c in 0..d {
        for &s in &spec.ordering {
            if s == Side::R || c + 1 < d {
                slots.push((s, c as i64));
            }
        }
    }
    let mut g = Graph::new(2 * d);
    for &(s, c) in &slots {
        let c = c as usize;
        let (u, v) = match s {
            Side::R => (c, d + c),
            Side::T => (c, c + 1),
            Side::B => (d + c, d + c + 1),
        };
        for _ in 0..spec.w {
            g.insert(u, v).expect("in range");
        }
    }
    Ladder { spec: spec.clone(), graph: g, slots }
}

/// Greedy MST packing keyed by `(load, id)`, bases retained.
pub fn lex_mst_pack(g: &Graph, k: u32) -> Result<PackingState, PackError> {
    let mut p = Packer::new(g, MatroidKind::Graphic, PackOptions { retain_bases: true, prune: None })?;
    for _ in 0..k {
        p.step()?;
    }
    Ok(p.into_state())
}

/// Packer that keeps going, for sweeps over k.
pub fn lex_mst_packer(g: &Graph) -> Result<Packer<'_>, PackError> {
    Packer::new(g, MatroidKind::Graphic, PackOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UnionFind;

    #[test]
    fn sizes() {
        let l = ladder_graph(&LadderSpec::new(8, 1));
        assert_eq!((l.graph.n(), l.graph.m()), (16, 22));
        assert_eq!(l.spec.x_star(), Rational::new(15.into(), 22.into()));
        let l3 = ladder_graph(&LadderSpec::new(8, 3));
        assert_eq!(l3.graph.m(), 66);
        assert_eq!(l3.spec.lambda(), 6);
        assert_eq!(l.slots[..4], [(Side::R, 0), (Side::T, 0), (Side::B, 0), (Side::R, 1)]);
    }

    #[test]
    fn edge_connectivity_small() {
        let l = ladder_graph(&LadderSpec::new(4, 2));
        let (lam, _) = crate::ideal::mincuts_enumerate(&l.graph).unwrap();
        assert_eq!(lam, 4);
    }

    #[test]
    fn bases_are_spanning_trees() {
        let l = ladder_graph(&LadderSpec::new(6, 1));
        let st = lex_mst_pack(&l.graph, 10).unwrap();
        for b in st.bases.as_ref().unwrap() {
            assert_eq!(b.len(), 11);
            let mut uf = UnionFind::new(12);
            for &e in b {
                let (u, v) = l.graph.endpoints(e).unwrap();
                assert!(uf.union(u, v));
            }
        }
    }

    #[test]
    fn one_extra_edge_at_three() {
        let l = ladder_graph(&LadderSpec::new(8, 1));
        let st = lex_mst_pack(&l.graph, 3).unwrap();
        let mut c: Vec<u32> = l.graph.edge_ids().iter().map(|&e| st.count(e)).collect();
        c.sort_unstable();
        assert_eq!(c.iter().filter(|&&x| x == 3).count(), 1);
        assert!(c[..21].iter().all(|&x| x == 2));
    }
}
