//! Layered packing of k minimum-weight maximal pseudoforests kept equal to
//! the static greedy packing (with optional pruning) under edge updates.
//!
//! Layer j weighs edge e by the number of layers below j that contain e.
//! An update is repaired layer by layer: at layer j only edges whose wanted
//! presence or weight differs from what the layer stores are touched, and
//! whatever moved at j is re-examined at j + 1.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::graph::EdgeId;
use crate::packing::PruneConfig;
use crate::pseudoforest::{PfError, Pseudoforest};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynError {
    #[error("unknown edge id {0}")]
    UnknownEdgeId(EdgeId),
    #[error("edge id {0} already present")]
    DuplicateEdgeId(EdgeId),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("no active edges")]
    EmptyActiveSet,
    #[error("an active edge is in no layer")]
    ZeroMinCount,
    #[error("layer {layer}: {err}")]
    Layer { layer: u32, err: PfError },
}

/// Swap counts caused by one update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Recourse {
    pub swaps: u64,
    /// `(layer, swaps)` for layers with at least one swap.
    pub per_layer: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
struct EData {
    u: u32,
    v: u32,
    /// Sorted 1-based layers containing the edge.
    members: Vec<u32>,
    /// The edge takes part in layers `j < prune_layer`.
    prune_layer: u32,
}

impl EData {
    fn below(&self, j: u32) -> u32 {
        self.members.partition_point(|&x| x < j) as u32
    }
}

#[derive(Clone, Debug)]
struct Prune {
    cfg: PruneConfig,
    p: i128,
    q: i128,
    c_load: i128,
    threshold: u32,
}

impl Prune {
    /// `c / i > c_load / rho_lo`.
    fn over(&self, c: u32, i: u32) -> bool {
        i128::from(c) * self.p > self.c_load * i128::from(i) * self.q
    }
}

/// k stacked pseudoforests with per-edge membership.
#[derive(Clone, Debug)]
pub struct LayeredPacking {
    n: usize,
    k: u32,
    layers: Vec<Pseudoforest>,
    edges: FxHashMap<EdgeId, EData>,
    prune: Option<Prune>,
    index: BTreeSet<(u32, EdgeId)>,
}

impl LayeredPacking {
    /// `m_hat` fixes the logarithm in the pruning threshold.
    pub fn new(n: usize, k: u32, prune: Option<PruneConfig>, m_hat: usize) -> Self {
        let prune = prune.map(|cfg| {
            let fit = |b: &BigInt| b.to_i128().expect("interval endpoints fit in i128");
            Prune {
                p: fit(cfg.rho_lo.numer()),
                q: fit(cfg.rho_lo.denom()),
                c_load: i128::from(cfg.c_load),
                threshold: cfg.threshold(m_hat).max(1),
                cfg,
            }
        });
        LayeredPacking {
            n,
            k,
            layers: (0..k).map(|_| Pseudoforest::new(n)).collect(),
            edges: FxHashMap::default(),
            prune,
            index: BTreeSet::new(),
        }
    }

    /// Bulk construction, layer by layer; same state as inserting the edges
    /// one at a time.
    pub fn from_edges(
        n: usize,
        k: u32,
        prune: Option<PruneConfig>,
        m_hat: usize,
        edges: &[(EdgeId, usize, usize)],
    ) -> Result<Self, DynError> {
        let mut lp = Self::new(n, k, prune, m_hat);
        for &(e, u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(DynError::VertexOutOfRange(x));
                }
            }
            let d = EData { u: u as u32, v: v as u32, members: Vec::new(), prune_layer: k + 1 };
            if lp.edges.insert(e, d).is_some() {
                return Err(DynError::DuplicateEdgeId(e));
            }
        }
        let mut ids = lp.edge_ids();
        for j in 1..=k {
            let layer = &mut lp.layers[j as usize - 1];
            for &e in &ids {
                let d = &lp.edges[&e];
                layer.insert(e, d.u as usize, d.v as usize, d.members.len() as u32).map_err(|err| DynError::Layer { layer: j, err })?;
            }
            for e in layer.members() {
                lp.edges.get_mut(&e).expect("known").members.push(j);
            }
            if let Some(p) = &lp.prune {
                if j >= p.threshold && j < k {
                    ids.retain(|e| {
                        let d = lp.edges.get_mut(e).expect("known");
                        if p.over(d.members.len() as u32, j) {
                            d.prune_layer = j + 1;
                            false
                        } else {
                            true
                        }
                    });
                }
            }
        }
        lp.index = lp.edges.keys().filter_map(|&e| lp.index_key(e)).collect();
        Ok(lp)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn prune_config(&self) -> Option<&PruneConfig> {
        self.prune.as_ref().map(|p| &p.cfg)
    }

    /// Step from which pruning may fire, if pruning is on.
    pub fn prune_threshold(&self) -> Option<u32> {
        self.prune.as_ref().map(|p| p.threshold)
    }

    /// Layer `j`, 1-based.
    pub fn layer(&self, j: u32) -> &Pseudoforest {
        &self.layers[j as usize - 1]
    }

    pub fn layer_mut(&mut self, j: u32) -> &mut Pseudoforest {
        &mut self.layers[j as usize - 1]
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn endpoints(&self, e: EdgeId) -> Option<(usize, usize)> {
        self.edges.get(&e).map(|d| (d.u as usize, d.v as usize))
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.edges.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Number of layers containing e.
    pub fn count(&self, e: EdgeId) -> Option<u32> {
        self.edges.get(&e).map(|d| d.members.len() as u32)
    }

    /// Layers containing e, ascending.
    pub fn members(&self, e: EdgeId) -> Option<&[u32]> {
        self.edges.get(&e).map(|d| d.members.as_slice())
    }

    /// Whether e belongs to the active set of the last layer.
    pub fn is_active(&self, e: EdgeId) -> bool {
        self.edges.get(&e).is_some_and(|d| d.prune_layer > self.k)
    }

    fn index_key(&self, e: EdgeId) -> Option<(u32, EdgeId)> {
        let d = self.edges.get(&e)?;
        (d.prune_layer > self.k).then_some((d.members.len() as u32, e))
    }

    /// First layer the edge is pruned from, scanning decisions made after
    /// steps `i >= from`.
    fn prune_layer_from(&self, d: &EData, from: u32) -> u32 {
        let none = self.k + 1;
        let Some(p) = &self.prune else { return none };
        let start = from.max(p.threshold);
        if start >= self.k {
            return none;
        }
        // count after step i is constant between consecutive member layers
        let mut i = start;
        let mut c = d.members.partition_point(|&x| x <= i) as u32;
        let mut idx = c as usize;
        while i < self.k {
            if p.over(c, i) {
                return i + 1;
            }
            // next i where the count changes
            match d.members.get(idx) {
                Some(&nxt) => {
                    i = nxt;
                    c += 1;
                    idx += 1;
                }
                None => return none,
            }
        }
        none
    }

    fn wanted(&self, e: EdgeId, j: u32) -> Option<u32> {
        let d = self.edges.get(&e)?;
        (j < d.prune_layer).then(|| d.below(j))
    }

    fn stored(&self, e: EdgeId, j: u32) -> Option<u32> {
        self.layers[j as usize - 1].weight_of(e)
    }

    pub fn insert(&mut self, e: EdgeId, u: usize, v: usize) -> Result<Recourse, DynError> {
        if self.edges.contains_key(&e) {
            return Err(DynError::DuplicateEdgeId(e));
        }
        for x in [u, v] {
            if x >= self.n {
                return Err(DynError::VertexOutOfRange(x));
            }
        }
        let d = EData { u: u as u32, v: v as u32, members: Vec::new(), prune_layer: self.k + 1 };
        self.edges.insert(e, d);
        if let Some(key) = self.index_key(e) {
            self.index.insert(key);
        }
        self.cascade(e)
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<Recourse, DynError> {
        if let Some(key) = self.index_key(e) {
            self.index.remove(&key);
        }
        self.edges.remove(&e).ok_or(DynError::UnknownEdgeId(e))?;
        self.cascade(e)
    }

    fn cascade(&mut self, e: EdgeId) -> Result<Recourse, DynError> {
        let mut rec = Recourse::default();
        // edges whose index key may change, with the key they had before
        let mut old_keys: FxHashMap<EdgeId, Option<(u32, EdgeId)>> = FxHashMap::default();
        let mut pending: Vec<EdgeId> = vec![e];
        let mut touched: Vec<EdgeId> = Vec::new();
        for j in 1..=self.k {
            if pending.is_empty() {
                break;
            }
            touched.clear();
            touched.extend_from_slice(&pending);
            let mut swaps = 0u32;
            for &x in &pending {
                let want = self.wanted(x, j);
                let have = self.stored(x, j);
                let layer = &mut self.layers[j as usize - 1];
                let lift = |err| DynError::Layer { layer: j, err };
                match (have, want) {
                    (None, Some(w)) => {
                        let d = &self.edges[&x];
                        if let Some(out) = layer.insert(x, d.u as usize, d.v as usize, w).map_err(lift)? {
                            touched.push(out);
                            swaps += 1;
                        }
                    }
                    (Some(_), None) => {
                        if let Some(inn) = layer.delete(x).map_err(lift)? {
                            touched.push(inn);
                            swaps += 1;
                        }
                    }
                    (Some(a), Some(b)) if a != b => {
                        if let Some(s) = layer.reweight(x, b).map_err(lift)? {
                            touched.push(s.out);
                            touched.push(s.inn);
                            swaps += 1;
                        }
                    }
                    _ => {}
                }
            }
            if swaps > 0 {
                rec.swaps += u64::from(swaps);
                rec.per_layer.push((j, swaps));
            }
            touched.sort_unstable();
            touched.dedup();
            for &x in &touched {
                if let std::collections::hash_map::Entry::Vacant(v) = old_keys.entry(x) {
                    v.insert(self.index_key(x));
                }
                self.sync_membership(x, j);
                self.sync_prune(x, j);
            }
            pending.clear();
            if j < self.k {
                for &x in &touched {
                    if self.wanted(x, j + 1) != self.stored(x, j + 1) {
                        pending.push(x);
                    }
                }
            }
        }
        for (x, old) in old_keys {
            let now = self.index_key(x);
            if now != old {
                if let Some(k) = old {
                    self.index.remove(&k);
                }
                if let Some(k) = now {
                    self.index.insert(k);
                }
            }
        }
        Ok(rec)
    }

    fn sync_membership(&mut self, x: EdgeId, j: u32) {
        let now = self.layers[j as usize - 1].contains(x);
        let Some(d) = self.edges.get_mut(&x) else { return };
        match (d.members.binary_search(&j), now) {
            (Ok(i), false) => {
                d.members.remove(i);
            }
            (Err(i), true) => d.members.insert(i, j),
            _ => {}
        }
    }

    /// Re-decides the prune step `j` for an edge whose count after step `j`
    /// may have moved. Decisions before `j` are already final, and later
    /// ones are revisited while the edge stays in the cascade; an edge that
    /// leaves the cascade has the same counts as before from there on.
    fn sync_prune(&mut self, x: EdgeId, j: u32) {
        let Some(p) = &self.prune else { return };
        if j < p.threshold || j >= self.k {
            return;
        }
        let Some(d) = self.edges.get(&x) else { return };
        if d.prune_layer <= j {
            return;
        }
        let c = d.below(j + 1);
        let pl = if p.over(c, j) {
            j + 1
        } else if d.prune_layer == j + 1 {
            self.prune_layer_from(d, j + 1)
        } else {
            return;
        };
        self.edges.get_mut(&x).expect("present").prune_layer = pl;
    }

    /// Minimum membership count over active edges, with a witness.
    pub fn min_count(&self) -> Result<(u32, EdgeId), DynError> {
        self.index.first().copied().ok_or(DynError::EmptyActiveSet)
    }

    /// `k / min count`.
    pub fn estimate(&self) -> Result<Rational, DynError> {
        let (c, _) = self.min_count()?;
        if c == 0 {
            return Err(DynError::ZeroMinCount);
        }
        Ok(Rational::new(BigInt::from(self.k), BigInt::from(c)))
    }

    /// Upper bound on any edge's membership count implied by pruning.
    pub fn appearance_bound(&self) -> u32 {
        match &self.prune {
            None => self.k,
            Some(p) => {
                let k1 = i128::from(self.k.saturating_sub(1));
                let cap = (p.c_load * k1 * p.q / p.p) as u32 + 1;
                p.threshold.max(cap).min(self.k)
            }
        }
    }

    pub fn max_membership(&self) -> u32 {
        self.edges.values().map(|d| d.members.len() as u32).max().unwrap_or(0)
    }

    /// Checks counts, the min-count index and every layer's bookkeeping.
    pub fn check_invariants(&mut self) -> Result<(), String> {
        let ids = self.edge_ids();
        for &e in &ids {
            let d = &self.edges[&e];
            for j in 1..=self.k {
                let inn = self.layers[j as usize - 1].contains(e);
                if inn != d.members.binary_search(&j).is_ok() {
                    return Err(format!("membership of {e} at layer {j} out of sync"));
                }
            }
            if self.prune_layer_from(d, 0) != d.prune_layer {
                return Err(format!("prune layer of {e} stale"));
            }
        }
        let want: BTreeSet<(u32, EdgeId)> = ids.iter().filter_map(|&e| self.index_key(e)).collect();
        if want != self.index {
            return Err("min-count index out of sync".into());
        }
        for l in &mut self.layers {
            l.check_invariants()?;
        }
        Ok(())
    }
}

/// Per-update recourse rows.
#[derive(Clone, Debug, Default)]
pub struct RecourseLog {
    pub rows: Vec<(usize, &'static str, Recourse)>,
}

impl RecourseLog {
    pub fn push(&mut self, index: usize, op: &'static str, r: Recourse) {
        self.rows.push((index, op, r));
    }

    pub fn mean_swaps(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.2.swaps as f64).sum::<f64>() / self.rows.len() as f64
    }

    /// CSV "update_index,op,swaps,per_layer_swaps"; the last column lists
    /// `layer:count` pairs separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("update_index,op,swaps,per_layer_swaps\n");
        for (i, op, r) in &self.rows {
            let per: Vec<String> = r.per_layer.iter().map(|(j, c)| format!("{j}:{c}")).collect();
            let _ = writeln!(s, "{i},{op},{},{}", r.swaps, per.join(";"));
        }
        s
    }
}
