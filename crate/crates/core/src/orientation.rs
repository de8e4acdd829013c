//! Fractional out-orientation induced by a layered pseudoforest packing.
//!
//! Each layer orients its cycle by the stored cycle-edge bit and every other
//! edge toward the cycle (toward the smallest vertex in acyclic components).
//! An edge's fraction is the average over the layers that contain it.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::dynpacking::{DynError, LayeredPacking};
use crate::graph::{Applied, EdgeId, Graph, GraphError, UpdateEvent};
use crate::pseudoforest::PfError;
use crate::scalar::fmt_rational;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientError {
    #[error("unknown edge id {0}")]
    UnknownEdgeId(EdgeId),
    #[error("edge {0} is in no layer")]
    UncoveredEdge(EdgeId),
    #[error("layer {layer}: {err}")]
    Layer { layer: u32, err: PfError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Layers(#[from] DynError),
}

/// Layers needed for a `(1 + eps)` guarantee at density `rho`:
/// `ceil(c_k * rho * ln m_hat / eps^2)`.
pub fn threshold_layers(c_k: f64, rho: f64, m_hat: usize, eps: f64) -> u32 {
    (c_k * rho * (m_hat.max(2) as f64).ln() / (eps * eps)).ceil().max(1.0) as u32
}

/// A graph with one unpruned layered packing, answering orientation queries.
#[derive(Clone, Debug)]
pub struct DynOrientation {
    pub graph: Graph,
    pub layers: LayeredPacking,
}

impl DynOrientation {
    pub fn new(n: usize, k: u32, m_hat: usize) -> Self {
        DynOrientation { graph: Graph::new(n), layers: LayeredPacking::new(n, k, None, m_hat) }
    }

    pub fn from_graph(g: &Graph, k: u32, m_hat: usize) -> Result<Self, OrientError> {
        let edges: Vec<_> = g.edges().collect();
        Ok(DynOrientation { graph: g.clone(), layers: LayeredPacking::from_edges(g.n(), k, None, m_hat, &edges)? })
    }

    /// Applies an insert or delete; queries are a no-op.
    pub fn update(&mut self, ev: &UpdateEvent) -> Result<Applied, OrientError> {
        let a = self.graph.apply_update(ev)?;
        match a {
            Applied::Inserted(e) => {
                let (u, v) = self.graph.endpoints(e).expect("just inserted");
                self.layers.insert(e, u, v)?;
            }
            Applied::Deleted(e) => {
                self.layers.delete(e)?;
            }
            Applied::Query => {}
        }
        Ok(a)
    }

    pub fn orient(&mut self, e: EdgeId) -> Result<FractionalOrientation, OrientError> {
        orient_edge(&mut self.layers, e)
    }

    pub fn audit(&mut self) -> Result<OutdegAudit, OrientError> {
        outdeg_audit(&mut self.layers)
    }
}

/// Orientation of one edge `(u, v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalOrientation {
    pub id: EdgeId,
    pub u: usize,
    pub v: usize,
    pub d_uv: Rational,
    pub d_vu: Rational,
    /// Number of layers containing the edge.
    pub coverage: u32,
}

impl FractionalOrientation {
    /// `id u v d_uv d_vu coverage`
    pub fn line(&self) -> String {
        format!(
            "{} {} {} {} {} {}",
            self.id,
            self.u,
            self.v,
            fmt_rational(&self.d_uv),
            fmt_rational(&self.d_vu),
            self.coverage
        )
    }
}

/// Averages the per-layer direction of `e`. A loop gets `d_uv = 1`.
pub fn orient_edge(lp: &mut LayeredPacking, e: EdgeId) -> Result<FractionalOrientation, OrientError> {
    let (u, v) = lp.endpoints(e).ok_or(OrientError::UnknownEdgeId(e))?;
    let layers: Vec<u32> = lp.members(e).ok_or(OrientError::UnknownEdgeId(e))?.to_vec();
    if layers.is_empty() {
        return Err(OrientError::UncoveredEdge(e));
    }
    let cov = layers.len() as u32;
    let mut forward = 0u32;
    if u == v {
        forward = cov;
    } else {
        for j in layers {
            let (from, _) = lp.layer_mut(j).orient_any(e).map_err(|err| OrientError::Layer { layer: j, err })?;
            forward += u32::from(from == u);
        }
    }
    let d_uv = Rational::new(BigInt::from(forward), BigInt::from(cov));
    let d_vu = Rational::one() - &d_uv;
    Ok(FractionalOrientation { id: e, u, v, d_uv, d_vu, coverage: cov })
}

/// Per-vertex out-degrees of the induced orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct OutdegAudit {
    pub outdeg: Vec<Rational>,
    pub max: Rational,
    pub argmax: usize,
    /// Cleared when no layer has a cycle (forest input), where no bound is claimed.
    pub guarantee: bool,
    /// `k / min coverage`, the bound every out-degree respects.
    pub bound: Rational,
    pub edges: Vec<FractionalOrientation>,
}

pub fn outdeg_audit(lp: &mut LayeredPacking) -> Result<OutdegAudit, OrientError> {
    let mut outdeg = vec![Rational::zero(); lp.n()];
    let mut edges = Vec::with_capacity(lp.m());
    let mut min_cov = u32::MAX;
    for e in lp.edge_ids() {
        let o = orient_edge(lp, e)?;
        outdeg[o.u] += &o.d_uv;
        if o.u != o.v {
            outdeg[o.v] += &o.d_vu;
        }
        min_cov = min_cov.min(o.coverage);
        edges.push(o);
    }
    let (argmax, max) = outdeg
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, x)| (i, x.clone()))
        .unwrap_or((0, Rational::zero()));
    let cyclic = (1..=lp.k()).any(|j| !lp.layer_mut(j).summary().is_forest);
    let bound = if min_cov == u32::MAX {
        Rational::zero()
    } else {
        Rational::new(BigInt::from(lp.k()), BigInt::from(min_cov))
    };
    Ok(OutdegAudit { outdeg, max, argmax, guarantee: cyclic, bound, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(n: usize, k: u32, edges: &[(usize, usize)]) -> LayeredPacking {
        let es: Vec<_> = edges.iter().enumerate().map(|(i, &(u, v))| (i as u32, u, v)).collect();
        LayeredPacking::from_edges(n, k, None, 40, &es).unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn four_cycle_is_a_directed_cycle() {
        let mut lp = build(4, 7, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let a = outdeg_audit(&mut lp).unwrap();
        for o in &a.edges {
            assert!(o.d_uv == Rational::one() || o.d_vu == Rational::one());
            assert_eq!(o.coverage, 7);
        }
        assert!(a.outdeg.iter().all(|d| *d == Rational::one()));
        assert!(a.guarantee);
    }

    #[test]
    fn pendant_points_into_triangle() {
        let mut lp = build(4, 12, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let o = orient_edge(&mut lp, 3).unwrap();
        assert_eq!((o.u, o.v), (2, 3));
        assert_eq!(o.d_vu, Rational::one());
        assert_eq!(o.line(), "3 2 3 0 1 12");
    }

    #[test]
    fn loop_counts_once() {
        let mut lp = build(2, 3, &[(0, 0), (0, 1)]);
        let a = outdeg_audit(&mut lp).unwrap();
        assert_eq!(&a.outdeg[0] + &a.outdeg[1], r(2, 1));
        assert_eq!(a.edges[0].d_uv, Rational::one());
    }

    #[test]
    fn forest_clears_guarantee() {
        let mut lp = build(3, 4, &[(0, 1), (1, 2)]);
        let a = outdeg_audit(&mut lp).unwrap();
        assert!(!a.guarantee);
        assert_eq!(a.outdeg, vec![r(0, 1), r(1, 1), r(1, 1)]);
    }

    #[test]
    fn k4_bounded_by_inverse_min_load() {
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut lp = build(4, 200, &k4);
        let a = outdeg_audit(&mut lp).unwrap();
        let total: Rational = a.outdeg.iter().sum();
        assert_eq!(total, r(6, 1));
        assert!(a.max <= a.bound);
        assert!(a.max <= r(15, 8));
    }

    #[test]
    fn dynamic_outdeg_matches_bulk() {
        let mut d = DynOrientation::new(4, 9, 10);
        for (u, v) in [(0, 1), (1, 2), (0, 2), (2, 3), (3, 1)] {
            d.update(&UpdateEvent::Insert { u, v, id: None }).unwrap();
        }
        d.update(&UpdateEvent::Delete(1)).unwrap();
        let mut b = DynOrientation::from_graph(&d.graph, 9, 10).unwrap();
        // cycle directions depend on history; out-degrees do not
        assert_eq!(d.audit().unwrap().outdeg, b.audit().unwrap().outdeg);
        assert_eq!(threshold_layers(20.0, 1.0, 3, 0.5), 88);
    }

    #[test]
    fn unknown_edge() {
        let mut lp = build(2, 2, &[(0, 1)]);
        assert_eq!(orient_edge(&mut lp, 9), Err(OrientError::UnknownEdgeId(9)));
    }
}
