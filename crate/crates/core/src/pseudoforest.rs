//! Dynamic minimum-weight maximal pseudoforest.
//!
//! Each component of the pseudoforest P is stored in `d` as the tree `C - e_C`
//! with `e_C` kept as that tree's payload. `dp` holds the same trees over
//! `V ∪ V̄`, with an extra edge `(v, v̄)` weighted by the cheapest non-P edge at
//! `v`, so a tree-min on `dp` finds the best candidate touching a component.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::dyntree::{DynForest, EdgeHandle};
use crate::graph::EdgeId;

/// Packed `(weight, id)` key; the order is lexicographic.
pub type Key = u64;

const INF: Key = u64::MAX;

pub fn pack_key(w: u32, id: EdgeId) -> Key {
    (u64::from(w) << 32) | u64::from(id)
}

pub fn key_id(k: Key) -> EdgeId {
    k as u32
}

pub fn key_weight(k: Key) -> u32 {
    (k >> 32) as u32
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PfError {
    #[error("edge id {0} already present")]
    DuplicateEdgeId(EdgeId),
    #[error("unknown edge id {0}")]
    UnknownEdgeId(EdgeId),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("edge {0} is not in the pseudoforest")]
    NotInPseudoforest(EdgeId),
    #[error("edge {0} lies in an acyclic component")]
    AcyclicComponent(EdgeId),
}

/// The designated cycle edge of a component and its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleEdge {
    pub id: EdgeId,
    pub tail: u32,
    pub head: u32,
}

/// One edge leaving P and one entering it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Swap {
    pub out: EdgeId,
    pub inn: EdgeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Queued,
    Tree { dh: EdgeHandle, dph: EdgeHandle },
    Cycle,
}

#[derive(Clone, Copy, Debug)]
struct Rec {
    u: u32,
    v: u32,
    w: u32,
    state: State,
}

/// Sorted keys of the non-P edges at one vertex.
#[derive(Clone, Debug, Default)]
struct Queue(Vec<Key>);

impl Queue {
    fn first(&self) -> Option<&Key> {
        self.0.first()
    }

    fn last(&self) -> Option<&Key> {
        self.0.last()
    }

    fn replace(&mut self, old: Key, new: Key) {
        self.remove(&old);
        self.insert(new);
    }

    fn insert(&mut self, k: Key) {
        if let Err(i) = self.0.binary_search(&k) {
            self.0.insert(i, k);
        }
    }

    fn remove(&mut self, k: &Key) {
        if let Ok(i) = self.0.binary_search(k) {
            self.0.remove(i);
        }
    }

    fn contains(&self, k: &Key) -> bool {
        self.0.binary_search(k).is_ok()
    }
}

/// Snapshot statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Summary {
    pub is_forest: bool,
    pub largest_component: usize,
    pub total_weight: u64,
}

#[derive(Clone, Debug)]
pub struct Pseudoforest {
    n: usize,
    d: DynForest<Key, CycleEdge>,
    dp: DynForest<Key, ()>,
    bar: Vec<EdgeHandle>,
    queues: Vec<Queue>,
    /// Keys of P edges and of queued edges, for quick rejections.
    pin: Queue,
    pout: Queue,
    edges: FxHashMap<EdgeId, Rec>,
    weight: u64,
    size: usize,
}

impl Pseudoforest {
    pub fn new(n: usize) -> Self {
        let mut dp = DynForest::new(2 * n);
        let bar = (0..n).map(|v| dp.link(v, n + v, INF).expect("fresh")).collect();
        Pseudoforest {
            n,
            d: DynForest::new(n),
            dp,
            bar,
            queues: vec![Queue::default(); n],
            pin: Queue::default(),
            pout: Queue::default(),
            edges: FxHashMap::default(),
            weight: 0,
            size: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges in P.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.get(&e).is_some_and(|r| r.state != State::Queued)
    }

    pub fn weight_of(&self, e: EdgeId) -> Option<u32> {
        self.edges.get(&e).map(|r| r.w)
    }

    pub fn endpoints(&self, e: EdgeId) -> Option<(usize, usize)> {
        self.edges.get(&e).map(|r| (r.u as usize, r.v as usize))
    }

    /// Edges of P in increasing id order.
    pub fn members(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> =
            self.edges.iter().filter(|(_, r)| r.state != State::Queued).map(|(&e, _)| e).collect();
        v.sort_unstable();
        v
    }

    fn rec(&self, e: EdgeId) -> Result<Rec, PfError> {
        self.edges.get(&e).copied().ok_or(PfError::UnknownEdgeId(e))
    }

    fn key_of(&self, e: EdgeId) -> Key {
        pack_key(self.edges[&e].w, e)
    }

    fn refresh_bar(&mut self, v: usize) {
        let k = self.queues[v].first().copied().unwrap_or(INF);
        if self.dp.key(self.bar[v]).expect("bar edge") != k {
            self.dp.set_key(self.bar[v], k).expect("bar edge");
        }
    }

    fn enqueue(&mut self, e: EdgeId) {
        let r = self.edges[&e];
        let k = pack_key(r.w, e);
        self.pout.insert(k);
        for x in ends(r) {
            self.queues[x].insert(k);
            self.refresh_bar(x);
        }
    }

    fn dequeue(&mut self, e: EdgeId) {
        let r = self.edges[&e];
        let k = pack_key(r.w, e);
        self.pout.remove(&k);
        for x in ends(r) {
            self.queues[x].remove(&k);
            self.refresh_bar(x);
        }
    }

    fn set_state(&mut self, e: EdgeId, s: State) {
        self.edges.get_mut(&e).expect("known edge").state = s;
    }

    /// Adds e to P. Its component(s) must allow it.
    fn p_add(&mut self, e: EdgeId) {
        let r = self.edges[&e];
        let (u, v) = (r.u as usize, r.v as usize);
        if u == v || self.d.connected(u, v) {
            debug_assert!(self.d.payload(u).is_none());
            let c = CycleEdge { id: e, tail: r.u.min(r.v), head: r.u.max(r.v) };
            self.d.set_payload(u, Some(c));
            self.set_state(e, State::Cycle);
        } else {
            debug_assert!(self.d.payload(u).is_none() || self.d.payload(v).is_none());
            let dh = self.d.link(u, v, pack_key(r.w, e)).expect("distinct trees");
            let dph = self.dp.link(u, v, INF).expect("distinct trees");
            self.set_state(e, State::Tree { dh, dph });
        }
        self.weight += u64::from(r.w);
        self.size += 1;
        self.pin.insert(pack_key(r.w, e));
    }

    /// Removes e from P and returns one vertex of each component that became
    /// (or stayed) acyclic as a result.
    fn p_remove(&mut self, e: EdgeId) -> Vec<usize> {
        let r = self.edges[&e];
        let (u, v) = (r.u as usize, r.v as usize);
        self.weight -= u64::from(r.w);
        self.size -= 1;
        self.pin.remove(&pack_key(r.w, e));
        let reps = match r.state {
            State::Cycle => {
                self.d.set_payload(u, None);
                vec![u]
            }
            State::Tree { dh, dph } => {
                let pay = self.d.payload(u).copied();
                self.d.cut(dh).expect("tree edge");
                self.dp.cut(dph).expect("tree edge");
                match pay {
                    None => vec![u, v],
                    Some(c) => {
                        let (a, b) = (c.tail as usize, c.head as usize);
                        if a != b && !self.d.connected(a, b) {
                            // e was on the cycle; the component becomes the tree C - e
                            self.d.set_payload(u, None);
                            self.d.set_payload(v, None);
                            let k = self.key_of(c.id);
                            let dh = self.d.link(a, b, k).expect("halves disjoint");
                            let dph = self.dp.link(a, b, INF).expect("halves disjoint");
                            self.set_state(c.id, State::Tree { dh, dph });
                            vec![u]
                        } else if self.d.connected(u, a) {
                            self.d.set_payload(v, None);
                            vec![v]
                        } else {
                            self.d.set_payload(u, None);
                            vec![u]
                        }
                    }
                }
            }
            State::Queued => unreachable!("p_remove on a queued edge"),
        };
        self.set_state(e, State::Queued);
        reps
    }

    /// Best edge to drop if e were added: the maximum key on the circuit of
    /// P + e, or None when P + e is still a pseudoforest.
    fn circuit_max(&mut self, u: usize, v: usize) -> Option<Key> {
        let ru = self.d.tree_id(u);
        let rv = if u == v { ru } else { self.d.tree_id(v) };
        let c1 = self.d.payload_of(ru).copied()?;
        if u != v && ru == rv {
            let (a, b) = (c1.tail as usize, c1.head as usize);
            let best = self.key_of(c1.id);
            Some(self.d.path_max_many(a, &[u, v, b]).map_or(best, |k| k.max(best)))
        } else {
            let c2 = if u == v { c1 } else { self.d.payload_of(rv).copied()? };
            let mut best = 0;
            for (c, x) in [(c1, u), (c2, v)] {
                let (a, b) = (c.tail as usize, c.head as usize);
                best = best.max(self.key_of(c.id));
                if let Some(k) = self.d.path_max_many(a, &[x, b]) {
                    best = best.max(k);
                }
            }
            Some(best)
        }
    }

    /// Inserts a fresh edge; returns the id pushed out of P, if any.
    pub fn insert(&mut self, e: EdgeId, u: usize, v: usize, w: u32) -> Result<Option<EdgeId>, PfError> {
        if self.edges.contains_key(&e) {
            return Err(PfError::DuplicateEdgeId(e));
        }
        for x in [u, v] {
            if x >= self.n {
                return Err(PfError::VertexOutOfRange(x));
            }
        }
        self.edges.insert(e, Rec { u: u as u32, v: v as u32, w, state: State::Queued });
        Ok(self.place(e))
    }

    fn place(&mut self, e: EdgeId) -> Option<EdgeId> {
        let r = self.edges[&e];
        match self.circuit_max(r.u as usize, r.v as usize) {
            None => {
                self.p_add(e);
                None
            }
            Some(fk) if pack_key(r.w, e) < fk => {
                let f = key_id(fk);
                self.p_remove(f);
                self.p_add(e);
                self.enqueue(f);
                Some(f)
            }
            Some(_) => {
                self.enqueue(e);
                None
            }
        }
    }

    /// Deletes an edge; returns the replacement that entered P, if any.
    pub fn delete(&mut self, e: EdgeId) -> Result<Option<EdgeId>, PfError> {
        let r = self.rec(e)?;
        let out = if r.state == State::Queued {
            self.dequeue(e);
            None
        } else {
            self.remove_from_p(e)
        };
        self.edges.remove(&e);
        Ok(out)
    }

    fn remove_from_p(&mut self, e: EdgeId) -> Option<EdgeId> {
        let reps = self.p_remove(e);
        let f = key_id(self.best_candidate(&reps)?);
        self.dequeue(f);
        self.p_add(f);
        Some(f)
    }

    /// Cheapest queued edge with an endpoint in v's component.
    fn lightest_near(&mut self, v: usize) -> Key {
        self.dp.tree_min(v).map_or(INF, |(_, k)| k)
    }

    /// Cheapest queued edge touching one of the acyclic components of `reps`.
    fn best_candidate(&mut self, reps: &[usize]) -> Option<Key> {
        let mut found: Option<Key> = None;
        for &x in reps {
            if let Some((_, k)) = self.dp.tree_min(x) {
                if k != INF {
                    assert!(found.is_none(), "two acyclic halves both carry candidates");
                    found = Some(k);
                }
            }
        }
        found
    }

    /// Changes the weight of e; returns the net swap, if any.
    pub fn reweight(&mut self, e: EdgeId, w: u32) -> Result<Option<Swap>, PfError> {
        let r = self.rec(e)?;
        if r.w == w {
            return Ok(None);
        }
        let lower = w < r.w;
        let (old, new) = (pack_key(r.w, e), pack_key(w, e));
        match r.state {
            State::Queued if !lower || self.pin.last().is_some_and(|&m| m < new) => {
                // still dependent on P, and no P edge is heavier
                self.pout.replace(old, new);
                for x in ends(r) {
                    self.queues[x].replace(old, new);
                    self.refresh_bar(x);
                }
                self.edges.get_mut(&e).expect("known").w = w;
                Ok(None)
            }
            State::Queued => {
                self.dequeue(e);
                self.edges.get_mut(&e).expect("known").w = w;
                Ok(self.place(e).map(|out| Swap { out, inn: e }))
            }
            State::Tree { .. } | State::Cycle
                if lower || self.pout.first().is_none_or(|&m| m > new) || self.lightest_near(r.u as usize) > new =>
            {
                if let State::Tree { dh, .. } = r.state {
                    self.d.set_key(dh, new).expect("tree edge");
                }
                self.pin.replace(old, new);
                self.weight = self.weight - u64::from(r.w) + u64::from(w);
                self.edges.get_mut(&e).expect("known").w = w;
                Ok(None)
            }
            State::Tree { .. } | State::Cycle => {
                // e stays unless its cheapest replacement is now lighter
                let reps = self.p_remove(e);
                let cand = self.best_candidate(&reps);
                self.edges.get_mut(&e).expect("known").w = w;
                match cand {
                    Some(fk) if fk < pack_key(w, e) => {
                        let f = key_id(fk);
                        self.dequeue(f);
                        self.p_add(f);
                        self.enqueue(e);
                        Ok(Some(Swap { out: e, inn: f }))
                    }
                    _ => {
                        self.p_add(e);
                        Ok(None)
                    }
                }
            }
        }
    }

    /// The cycle edge of v's component, if it has one.
    pub fn cycle_edge(&mut self, v: usize) -> Option<CycleEdge> {
        self.d.payload(v).copied()
    }

    /// Direction of a P edge in a cyclic component, as `(from, to)`.
    pub fn orient(&mut self, e: EdgeId) -> Result<(usize, usize), PfError> {
        let r = self.rec(e)?;
        let (u, v) = (r.u as usize, r.v as usize);
        match r.state {
            State::Queued => Err(PfError::NotInPseudoforest(e)),
            State::Cycle => {
                let c = self.d.payload(u).copied().expect("cycle payload");
                Ok((c.tail as usize, c.head as usize))
            }
            State::Tree { dh, .. } => {
                let c = self.d.payload(u).copied().ok_or(PfError::AcyclicComponent(e))?;
                Ok(self.toward(c.tail as usize, u, v, dh))
            }
        }
    }

    /// Like [`orient`](Self::orient) but acyclic components point toward
    /// their smallest vertex.
    pub fn orient_any(&mut self, e: EdgeId) -> Result<(usize, usize), PfError> {
        match self.orient(e) {
            Err(PfError::AcyclicComponent(_)) => {
                let r = self.rec(e)?;
                let (u, v) = (r.u as usize, r.v as usize);
                let State::Tree { dh, .. } = r.state else { unreachable!() };
                let root = self.d.min_vertex(u);
                Ok(self.toward(root, u, v, dh))
            }
            other => other,
        }
    }

    fn toward(&mut self, root: usize, u: usize, v: usize, dh: EdgeHandle) -> (usize, usize) {
        if self.d.path_contains(root, u, dh).expect("same tree") {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn summary(&mut self) -> Summary {
        let largest = (0..self.n).map(|v| self.d.size(v)).max().unwrap_or(0);
        Summary { is_forest: self.d.payload_count() == 0, largest_component: largest, total_weight: self.weight }
    }

    /// Sum of weights over P.
    pub fn total_weight(&self) -> u64 {
        self.weight
    }

    /// Checks queue coherence, maximality and the cycle bookkeeping.
    /// Linear time; meant for tests.
    pub fn check_invariants(&mut self) -> Result<(), String> {
        let mut pin: Vec<Key> = Vec::new();
        let mut pout: Vec<Key> = Vec::new();
        for (&e, r) in &self.edges {
            let side = if r.state == State::Queued { &mut pout } else { &mut pin };
            side.push(pack_key(r.w, e));
        }
        pin.sort_unstable();
        pout.sort_unstable();
        if pin != self.pin.0 || pout != self.pout.0 {
            return Err("global key lists out of sync".into());
        }
        for v in 0..self.n {
            let want = self.queues[v].first().copied().unwrap_or(INF);
            if self.dp.key(self.bar[v]).ok() != Some(want) {
                return Err(format!("bar key of {v} out of sync"));
            }
        }
        let ids: Vec<EdgeId> = self.edges.keys().copied().collect();
        let mut cycles = 0;
        for e in ids {
            let r = self.edges[&e];
            match r.state {
                State::Queued => {
                    for x in ends(r) {
                        if self.d.payload(x).is_none() {
                            return Err(format!("non-P edge {e} touches acyclic component at {x}"));
                        }
                        if !self.queues[x].contains(&pack_key(r.w, e)) {
                            return Err(format!("edge {e} missing from queue of {x}"));
                        }
                    }
                }
                State::Cycle => {
                    cycles += 1;
                    if self.d.payload(r.u as usize).map(|c| c.id) != Some(e) {
                        return Err(format!("cycle edge {e} not recorded as payload"));
                    }
                }
                State::Tree { dh, .. } => {
                    if self.d.key(dh).ok() != Some(pack_key(r.w, e)) {
                        return Err(format!("tree key of {e} out of sync"));
                    }
                }
            }
        }
        if cycles != self.d.payload_count() {
            return Err("stale cycle payloads".into());
        }
        Ok(())
    }
}

fn ends(r: Rec) -> impl Iterator<Item = usize> {
    let (u, v) = (r.u as usize, r.v as usize);
    std::iter::once(u).chain((u != v).then_some(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(w: [u32; 3]) -> Pseudoforest {
        let mut p = Pseudoforest::new(3);
        p.insert(0, 0, 1, w[0]).unwrap();
        p.insert(1, 1, 2, w[1]).unwrap();
        p.insert(2, 0, 2, w[2]).unwrap();
        p
    }

    #[test]
    fn first_edge_joins() {
        let mut p = Pseudoforest::new(3);
        assert_eq!(p.insert(0, 0, 1, 0).unwrap(), None);
        assert!(p.contains(0));
    }

    #[test]
    fn tie_keeps_incumbent() {
        let mut p = triangle([0, 0, 0]);
        assert_eq!(p.insert(3, 0, 1, 0).unwrap(), None);
        assert!(!p.contains(3));
        p.check_invariants().unwrap();
    }

    #[test]
    fn cheaper_parallel_swaps_out_heavy_edge() {
        let mut p = triangle([5, 0, 0]);
        assert_eq!(p.insert(3, 0, 1, 1).unwrap(), Some(0));
        assert_eq!(p.members(), vec![1, 2, 3]);
        p.check_invariants().unwrap();
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut p = triangle([0, 0, 0]);
        assert_eq!(p.insert(1, 0, 1, 0), Err(PfError::DuplicateEdgeId(1)));
    }

    #[test]
    fn delete_lone_edge() {
        let mut p = Pseudoforest::new(2);
        p.insert(0, 0, 1, 0).unwrap();
        assert_eq!(p.delete(0).unwrap(), None);
        assert!(p.is_empty());
        assert_eq!(p.delete(0), Err(PfError::UnknownEdgeId(0)));
    }

    #[test]
    fn delete_brings_in_replacement() {
        let mut p = triangle([0, 0, 0]);
        p.insert(3, 0, 1, 9).unwrap();
        assert_eq!(p.delete(0).unwrap(), Some(3));
        assert_eq!(p.members(), vec![1, 2, 3]);
        p.check_invariants().unwrap();
    }

    #[test]
    fn delete_queued_edge() {
        let mut p = triangle([0, 0, 0]);
        p.insert(3, 0, 1, 9).unwrap();
        let w = p.total_weight();
        assert_eq!(p.delete(3).unwrap(), None);
        assert_eq!(p.total_weight(), w);
        p.check_invariants().unwrap();
    }

    #[test]
    fn reweight_cases() {
        let mut p = triangle([0, 0, 0]);
        p.insert(3, 0, 1, 4).unwrap();
        assert_eq!(p.reweight(3, 8).unwrap(), None);
        // push edge 0 above the queued parallel
        assert_eq!(p.reweight(0, 9).unwrap(), Some(Swap { out: 0, inn: 3 }));
        // and pull it back under
        assert_eq!(p.reweight(0, 1).unwrap(), Some(Swap { out: 3, inn: 0 }));
        p.check_invariants().unwrap();
    }

    #[test]
    fn orient_triangle_and_pendant() {
        let mut p = triangle([0, 0, 0]);
        // edge 2 = (0,2) closed the cycle: oriented 0 -> 2
        assert_eq!(p.orient(2).unwrap(), (0, 2));
        assert_eq!(p.orient(1).unwrap(), (2, 1));
        assert_eq!(p.orient(0).unwrap(), (1, 0));
        let mut q = Pseudoforest::new(4);
        q.insert(0, 0, 1, 0).unwrap();
        q.insert(1, 1, 2, 0).unwrap();
        q.insert(2, 0, 2, 0).unwrap();
        q.insert(3, 2, 3, 0).unwrap();
        assert_eq!(q.orient(3).unwrap(), (3, 2));
    }

    #[test]
    fn orient_errors() {
        let mut p = Pseudoforest::new(4);
        p.insert(0, 0, 1, 0).unwrap();
        assert_eq!(p.orient(0), Err(PfError::AcyclicComponent(0)));
        assert_eq!(p.orient_any(0).unwrap(), (1, 0));
        let mut t = triangle([0, 0, 0]);
        t.insert(3, 0, 1, 0).unwrap();
        assert_eq!(t.orient(3), Err(PfError::NotInPseudoforest(3)));
    }

    #[test]
    fn summaries() {
        let mut path = Pseudoforest::new(3);
        path.insert(0, 0, 1, 0).unwrap();
        path.insert(1, 1, 2, 0).unwrap();
        assert!(path.summary().is_forest);
        assert_eq!(path.summary().largest_component, 3);
        assert!(!triangle([0, 0, 0]).summary().is_forest);
        let mut two = Pseudoforest::new(4);
        two.insert(0, 0, 1, 0).unwrap();
        two.insert(1, 2, 3, 0).unwrap();
        assert_eq!(two.summary(), Summary { is_forest: true, largest_component: 2, total_weight: 0 });
    }

    #[test]
    fn loops_are_cycles() {
        let mut p = Pseudoforest::new(2);
        p.insert(0, 0, 0, 3).unwrap();
        assert!(p.contains(0));
        assert_eq!(p.insert(1, 0, 0, 1).unwrap(), Some(0));
        assert_eq!(p.orient(1).unwrap(), (0, 0));
        p.insert(2, 0, 1, 0).unwrap();
        assert_eq!(p.orient(2).unwrap(), (1, 0));
        p.check_invariants().unwrap();
    }
}
