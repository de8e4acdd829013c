//! Static greedy base packing, plain and with pruning, and load vectors.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, Independence, MatroidKind};
use crate::scalar::{fmt_rational, Scalar};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("pruning removed every edge")]
    EmptyActiveSet,
    #[error("some active edge was never packed")]
    ZeroMinCount,
    #[error("invalid pruning interval")]
    BadInterval,
}

/// Greedy base of minimum total weight, ties broken by edge id.
/// Only edges accepted by `keep` take part.
pub fn min_weight_base_by<W, F, K>(g: &Graph, kind: MatroidKind, mut weight: F, mut keep: K) -> Vec<EdgeId>
where
    W: PartialOrd,
    F: FnMut(EdgeId) -> W,
    K: FnMut(EdgeId) -> bool,
{
    let mut order: Vec<(W, EdgeId, usize, usize)> =
        g.edges().filter(|&(e, _, _)| keep(e)).map(|(e, u, v)| (weight(e), e, u, v)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    let mut ind = Independence::new(g.n(), kind);
    let mut base: Vec<EdgeId> = order.into_iter().filter(|&(_, _, u, v)| ind.try_add(u, v)).map(|x| x.1).collect();
    base.sort_unstable();
    base
}

/// Minimum-weight base under per-edge weights indexed by edge id.
pub fn min_weight_base<W: PartialOrd + Clone>(g: &Graph, weights: &[W], kind: MatroidKind) -> Vec<EdgeId> {
    min_weight_base_by(g, kind, |e| weights[e as usize].clone(), |_| true)
}

/// Pruning parameters. Loads above `c_load / rho_lo` are dropped once
/// `k >= ceil(c_prune * rho_hi * ln m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PruneConfig {
    pub rho_lo: Rational,
    pub rho_hi: Rational,
    pub c_load: u32,
    pub c_prune: f64,
    /// Edge count used in the logarithm; defaults to the graph's.
    pub m_hat: Option<usize>,
}

impl PruneConfig {
    pub fn new(rho_lo: Rational, rho_hi: Rational) -> Self {
        PruneConfig { rho_lo, rho_hi, c_load: 2, c_prune: 24.0, m_hat: None }
    }

    pub fn validate(&self) -> Result<(), PackError> {
        if !self.rho_lo.is_positive() || self.rho_lo > self.rho_hi {
            return Err(PackError::BadInterval);
        }
        Ok(())
    }

    /// First step count at which pruning may fire.
    pub fn threshold(&self, m: usize) -> u32 {
        let m = self.m_hat.unwrap_or(m).max(2) as f64;
        let rho_hi = f64::from_rational(&self.rho_hi);
        (self.c_prune * rho_hi * m.ln()).ceil() as u32
    }

    /// Whether an edge packed `count` times out of `k` is over the load cap.
    pub fn over(&self, count: u32, k: u32) -> bool {
        let lhs = BigInt::from(count) * self.rho_lo.numer();
        let rhs = BigInt::from(self.c_load) * BigInt::from(k) * self.rho_lo.denom();
        lhs > rhs
    }
}

/// Packing state after k greedy steps.
#[derive(Clone, Debug)]
pub struct PackingState {
    pub kind: MatroidKind,
    pub k: u32,
    /// Indexed by edge id; zero for absent ids.
    pub counts: Vec<u32>,
    /// The set E_k the last base was drawn from, indexed by edge id.
    pub active: Vec<bool>,
    pub prune: Option<PruneConfig>,
    pub bases: Option<Vec<Vec<EdgeId>>>,
    ids: Vec<EdgeId>,
}

impl PackingState {
    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.ids
    }

    pub fn count(&self, e: EdgeId) -> u32 {
        self.counts[e as usize]
    }

    pub fn is_active(&self, e: EdgeId) -> bool {
        self.active[e as usize]
    }

    /// Active edges.
    pub fn active_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.ids.iter().copied().filter(|&e| self.active[e as usize])
    }

    pub fn loads<S: Scalar>(&self) -> LoadsVector<S> {
        let k = i64::from(self.k.max(1));
        LoadsVector {
            ids: self.ids.clone(),
            values: self.ids.iter().map(|&e| S::ratio(i64::from(self.counts[e as usize]), k)).collect(),
            active: self.ids.iter().map(|&e| self.active[e as usize]).collect(),
        }
    }

    /// CSV with header "edge_id,count,k,load,active".
    pub fn to_csv(&self) -> String {
        let mut s = String::from("edge_id,count,k,load,active\n");
        for &e in &self.ids {
            let c = self.counts[e as usize];
            let load = Rational::new(BigInt::from(c), BigInt::from(self.k.max(1)));
            let _ = writeln!(s, "{e},{c},{},{},{}", self.k, fmt_rational(&load), self.active[e as usize]);
        }
        s
    }
}

/// Options for [`Packer`].
#[derive(Clone, Debug, Default)]
pub struct PackOptions {
    pub retain_bases: bool,
    pub prune: Option<PruneConfig>,
}

/// Step-by-step greedy packing.
#[derive(Clone, Debug)]
pub struct Packer<'g> {
    g: &'g Graph,
    st: PackingState,
    order: Vec<(u32, EdgeId, u32, u32)>,
    threshold: u32,
    last: Vec<EdgeId>,
}

impl<'g> Packer<'g> {
    pub fn new(g: &'g Graph, kind: MatroidKind, opts: PackOptions) -> Result<Self, PackError> {
        if g.m() == 0 {
            return Err(PackError::EmptyGraph);
        }
        if let Some(p) = &opts.prune {
            p.validate()?;
        }
        let bound = g.id_bound() as usize;
        let ids = g.edge_ids();
        let mut active = vec![false; bound];
        for &e in &ids {
            active[e as usize] = true;
        }
        let threshold = opts.prune.as_ref().map_or(u32::MAX, |p| p.threshold(g.m()));
        let order = g.edges().map(|(e, u, v)| (0, e, u as u32, v as u32)).collect();
        Ok(Packer {
            g,
            st: PackingState {
                kind,
                k: 0,
                counts: vec![0; bound],
                active,
                prune: opts.prune,
                bases: opts.retain_bases.then(Vec::new),
                ids,
            },
            order,
            threshold,
            last: Vec::new(),
        })
    }

    pub fn state(&self) -> &PackingState {
        &self.st
    }

    pub fn into_state(self) -> PackingState {
        self.st
    }

    /// The base chosen by the most recent step.
    pub fn last_base(&self) -> &[EdgeId] {
        &self.last
    }

    /// Packs one more base and returns it (sorted by id).
    pub fn step(&mut self) -> Result<&[EdgeId], PackError> {
        let st = &mut self.st;
        // E_{k+1}: drop over-loaded edges once the threshold is reached
        if let Some(p) = &st.prune {
            if st.k >= self.threshold && st.k > 0 {
                let mut any = false;
                for &e in &st.ids {
                    let i = e as usize;
                    if st.active[i] {
                        if p.over(st.counts[i], st.k) {
                            st.active[i] = false;
                        } else {
                            any = true;
                        }
                    }
                }
                if !any {
                    return Err(PackError::EmptyActiveSet);
                }
            }
        }
        for o in self.order.iter_mut() {
            o.0 = st.counts[o.1 as usize];
        }
        self.order.sort_unstable_by_key(|o| (o.0, o.1));
        let mut ind = Independence::new(self.g.n(), st.kind);
        self.last.clear();
        for &(_, e, u, v) in &self.order {
            if st.active[e as usize] && ind.try_add(u as usize, v as usize) {
                self.last.push(e);
            }
        }
        self.last.sort_unstable();
        st.k += 1;
        for &e in &self.last {
            st.counts[e as usize] += 1;
        }
        if let Some(b) = st.bases.as_mut() {
            b.push(self.last.clone());
        }
        Ok(&self.last)
    }
}

/// Plain greedy packing of k bases.
pub fn pack(g: &Graph, kind: MatroidKind, k: u32) -> Result<PackingState, PackError> {
    pack_with(g, kind, k, PackOptions::default())
}

pub fn pack_with(g: &Graph, kind: MatroidKind, k: u32, opts: PackOptions) -> Result<PackingState, PackError> {
    let mut p = Packer::new(g, kind, opts)?;
    for _ in 0..k {
        p.step()?;
    }
    Ok(p.into_state())
}

/// Bicircular packing with pruning over `[rho_lo, rho_hi]`.
pub fn pack_pruned(g: &Graph, k: u32, prune: PruneConfig) -> Result<PackingState, PackError> {
    pack_with(g, MatroidKind::Bicircular, k, PackOptions { retain_bases: false, prune: Some(prune) })
}

/// Base sequence when the greedy is driven by `weight(count, k)` instead of
/// the raw count.
pub fn pack_sequence_by<W: PartialOrd>(
    g: &Graph,
    kind: MatroidKind,
    k: u32,
    mut weight: impl FnMut(u32, u32) -> W,
) -> Vec<Vec<EdgeId>> {
    let mut counts = vec![0u32; g.id_bound() as usize];
    let mut out = Vec::with_capacity(k as usize);
    for step in 0..k {
        let base = min_weight_base_by(g, kind, |e| weight(counts[e as usize], step), |_| true);
        for &e in &base {
            counts[e as usize] += 1;
        }
        out.push(base);
    }
    out
}

/// `k / min count` over active edges.
pub fn min_load_estimate(st: &PackingState) -> Result<Rational, PackError> {
    let min = st.active_ids().map(|e| st.count(e)).min().ok_or(PackError::EmptyActiveSet)?;
    if min == 0 {
        return Err(PackError::ZeroMinCount);
    }
    Ok(Rational::new(BigInt::from(st.k), BigInt::from(min)))
}

/// Whether `set` is a base of the active part of g.
pub fn is_base(g: &Graph, kind: MatroidKind, set: &[EdgeId], active: impl Fn(EdgeId) -> bool) -> bool {
    let mut ind = Independence::new(g.n(), kind);
    for &e in set {
        let Some((u, v)) = g.endpoints(e) else { return false };
        if !active(e) || !ind.try_add(u, v) {
            return false;
        }
    }
    // maximal: no active edge can be added
    g.edges().filter(|&(e, _, _)| active(e)).all(|(_, u, v)| !ind.clone().try_add(u, v))
}

/// Per-edge values with an active mask, in edge-id order.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadsVector<S> {
    pub ids: Vec<EdgeId>,
    pub values: Vec<S>,
    pub active: Vec<bool>,
}

impl<S: Scalar> LoadsVector<S> {
    pub fn new(ids: Vec<EdgeId>, values: Vec<S>) -> Self {
        let active = vec![true; ids.len()];
        LoadsVector { ids, values, active }
    }

    pub fn uniform(ids: Vec<EdgeId>, value: S) -> Self {
        let values = vec![value; ids.len()];
        Self::new(ids, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> Option<&S> {
        self.ids.binary_search(&e).ok().map(|i| &self.values[i])
    }

    pub fn sum(&self) -> S {
        self.values.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// Smallest value over active entries.
    pub fn min_active(&self) -> Option<S> {
        self.values
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(v, _)| v.clone())
            .fold(None, |m: Option<S>, v| match m {
                Some(x) if x <= v => Some(x),
                _ => Some(v),
            })
    }

    pub fn norm2_sq(&self) -> S {
        self.values.iter().fold(S::zero(), |a, v| a + v.clone() * v.clone())
    }

    /// Maximum absolute difference; both vectors must share ids.
    pub fn dist_inf(&self, other: &Self) -> S {
        assert_eq!(self.ids, other.ids);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(S::zero(), |m, d| if d > m { d } else { m })
    }

    pub fn dist2_sq(&self, other: &Self) -> S {
        assert_eq!(self.ids, other.ids);
        self.values.iter().zip(&other.values).fold(S::zero(), |a, (x, y)| {
            let d = x.clone() - y.clone();
            a + d.clone() * d
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LoadsVector<T> {
        LoadsVector { ids: self.ids.clone(), values: self.values.iter().map(f).collect(), active: self.active.clone() }
    }

    pub fn to_f64(&self) -> LoadsVector<f64> {
        self.map(|v| v.approx())
    }
}

impl LoadsVector<Rational> {
    /// CSV "edge_id,load" with exact values.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("edge_id,load\n");
        for (e, v) in self.ids.iter().zip(&self.values) {
            let _ = writeln!(s, "{e},{}", fmt_rational(v));
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }
}
