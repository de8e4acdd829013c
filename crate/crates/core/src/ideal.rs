//! Exact desk-scale oracles: densest subgraph by enumeration, ideal loads by
//! repeated contraction of the densest part, minimum cuts, and a base
//! decomposition certificate. All arithmetic is exact.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, Independence, MatroidKind};
use crate::packing::{min_weight_base, pack, LoadsVector};
use crate::Rational;

/// Largest vertex count accepted by the enumerations.
pub const MAX_DENSEST_N: usize = 22;
pub const MAX_MINCUT_N: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("instance too large for enumeration (n = {0})")]
    TooLarge(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("loops are dependent in the graphic matroid")]
    GraphicLoop,
    #[error("no exact base decomposition found")]
    NoDecomposition,
}

fn rat(p: usize, q: usize) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Densest vertex set and its ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct DensestResult {
    pub set: Vec<usize>,
    pub ratio: Rational,
    pub maximal: bool,
}

struct Masks {
    n: usize,
    edges: Vec<(EdgeId, usize, usize, u32)>,
}

impl Masks {
    fn new(g: &Graph) -> Self {
        Masks { n: g.n(), edges: g.edges().map(|(e, u, v)| (e, u, v, (1u32 << u) | (1u32 << v))).collect() }
    }

    fn inside(&self, s: u32) -> impl Iterator<Item = &(EdgeId, usize, usize, u32)> {
        self.edges.iter().filter(move |x| x.3 & s == x.3)
    }

    /// `(|E[S]|, denominator)` or None when the denominator is zero.
    fn ratio(&self, s: u32, kind: MatroidKind) -> Option<(usize, usize)> {
        match kind {
            MatroidKind::Bicircular => {
                let m = self.inside(s).count();
                Some((m, s.count_ones() as usize))
            }
            MatroidKind::Graphic => {
                let mut ind = Independence::new(self.n, kind);
                let mut m = 0;
                let mut r = 0;
                for &(_, u, v, _) in self.inside(s) {
                    m += 1;
                    r += usize::from(ind.try_add(u, v));
                }
                (r > 0).then_some((m, r))
            }
        }
    }
}

fn bits(s: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| s >> v & 1 == 1).collect()
}

/// Lexicographic comparison of vertex sets given as masks.
fn lex_less(a: u32, b: u32) -> bool {
    let d = a ^ b;
    d != 0 && a & (d & d.wrapping_neg()) != 0
}

fn check_input(g: &Graph, kind: MatroidKind, cap: usize) -> Result<(), IdealError> {
    if g.n() > cap {
        return Err(IdealError::TooLarge(g.n()));
    }
    if g.m() == 0 {
        return Err(IdealError::EmptyGraph);
    }
    if kind == MatroidKind::Graphic && g.has_loops() {
        return Err(IdealError::GraphicLoop);
    }
    Ok(())
}

/// Exact densest set: `|E[S]|/|S|` (bicircular) or `|E[S]|/rank` (graphic).
/// Ties prefer larger sets, then the lexicographically smallest.
pub fn densest_exact(g: &Graph, kind: MatroidKind) -> Result<DensestResult, IdealError> {
    check_input(g, kind, MAX_DENSEST_N)?;
    let mk = Masks::new(g);
    let n = g.n();
    let mut best: Option<(usize, usize, u32)> = None;
    for s in 1u32..(1u32 << n) {
        let Some((m, r)) = mk.ratio(s, kind) else { continue };
        let better = match best {
            None => true,
            Some((bm, br, bs)) => {
                let (lhs, rhs) = (m * br, bm * r);
                lhs > rhs
                    || (lhs == rhs
                        && (s.count_ones() > bs.count_ones() || (s.count_ones() == bs.count_ones() && lex_less(s, bs))))
            }
        };
        if better {
            best = Some((m, r, s));
        }
    }
    let (m, r, s) = best.expect("some set has an edge");
    let full = (1u32 << n) - 1;
    let rest = full & !s;
    // a strict superset with the same ratio would contradict maximality
    let mut maximal = true;
    let mut sub = rest;
    while sub != 0 {
        if let Some((m2, r2)) = mk.ratio(s | sub, kind) {
            if m2 * r == m * r2 {
                maximal = false;
                break;
            }
        }
        sub = (sub - 1) & rest;
    }
    Ok(DensestResult { set: bits(s, n), ratio: rat(m, r), maximal })
}

/// One contraction level: edges and their common load.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub edges: Vec<EdgeId>,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealLoads {
    pub loads: LoadsVector<Rational>,
    pub levels: Vec<Level>,
}

impl IdealLoads {
    pub fn min_value(&self) -> Rational {
        self.levels[0].value.clone()
    }

    pub fn norm2_sq(&self) -> Rational {
        self.loads.norm2_sq()
    }
}

/// Ideal loads by contracting densest parts level by level.
pub fn x_star_contraction(g: &Graph, kind: MatroidKind) -> Result<IdealLoads, IdealError> {
    check_input(g, kind, MAX_DENSEST_N)?;
    let mk = Masks::new(g);
    let n = g.n();
    let mut contracted = vec![false; mk.edges.len()];
    let mut base_c = Independence::new(n, kind);
    let mut value = vec![Rational::zero(); mk.edges.len()];
    let mut levels = Vec::new();
    while contracted.iter().any(|c| !c) {
        // best ratio |H| / r'(H) over induced remaining edge sets
        let mut best: Option<(usize, usize)> = None;
        let mut winners: Vec<u32> = Vec::new();
        for s in 1u32..(1u32 << n) {
            let mut ind = base_c.clone();
            let (mut h, mut r) = (0, 0);
            for (i, &(_, u, v, m)) in mk.edges.iter().enumerate() {
                if !contracted[i] && m & s == m {
                    h += 1;
                    r += usize::from(ind.try_add(u, v));
                }
            }
            if h == 0 {
                continue;
            }
            assert!(r > 0, "remaining edges spanned by the contracted part");
            match best {
                Some((bh, br)) if h * br < bh * r => {}
                Some((bh, br)) if h * br == bh * r => winners.push(s),
                _ => {
                    best = Some((h, r));
                    winners = vec![s];
                }
            }
        }
        let (bh, br) = best.expect("remaining edges");
        let level: Vec<usize> = (0..mk.edges.len())
            .filter(|&i| !contracted[i] && winners.iter().any(|&s| mk.edges[i].3 & s == mk.edges[i].3))
            .collect();
        {
            let mut ind = base_c.clone();
            let r = level.iter().filter(|&&i| ind.try_add(mk.edges[i].1, mk.edges[i].2)).count();
            assert_eq!(level.len() * br, bh * r, "union of densest sets is not densest");
        }
        let x = rat(br, bh);
        for &i in &level {
            contracted[i] = true;
            value[i] = x.clone();
            base_c.try_add(mk.edges[i].1, mk.edges[i].2);
        }
        levels.push(Level { edges: level.iter().map(|&i| mk.edges[i].0).collect(), value: x });
    }
    let ids = mk.edges.iter().map(|x| x.0).collect();
    Ok(IdealLoads { loads: LoadsVector::new(ids, value), levels })
}

/// `1 / min x*`.
pub fn density_from_loads(x: &IdealLoads) -> Rational {
    x.min_value().recip()
}

/// Long-run packing loads with the radius `sqrt(2 r ln(k+1) / k)`.
pub fn x_star_longrun(g: &Graph, kind: MatroidKind, k: u32) -> Result<(LoadsVector<Rational>, f64), IdealError> {
    let st = pack(g, kind, k).map_err(|_| IdealError::EmptyGraph)?;
    let r = g.rank(kind) as f64;
    let k = f64::from(k);
    Ok((st.loads(), (2.0 * r * (k + 1.0).ln() / k).sqrt()))
}

/// Weight of the minimum-weight base under x*, for the norm certificate.
pub fn min_base_weight(g: &Graph, kind: MatroidKind, x: &LoadsVector<Rational>) -> Rational {
    let mut w = vec![Rational::zero(); g.id_bound() as usize];
    for (e, v) in x.ids.iter().zip(&x.values) {
        w[*e as usize] = v.clone();
    }
    min_weight_base(g, &w, kind).iter().fold(Rational::zero(), |a, &e| a + &w[e as usize])
}

/// Edge connectivity and every minimum cut, as the side containing vertex 0.
pub fn mincuts_enumerate(g: &Graph) -> Result<(usize, Vec<Vec<usize>>), IdealError> {
    let n = g.n();
    if n > MAX_MINCUT_N {
        return Err(IdealError::TooLarge(n));
    }
    if n < 2 || !g.is_connected() {
        return Err(IdealError::Disconnected);
    }
    let mk = Masks::new(g);
    let mut lambda = usize::MAX;
    let mut cuts = Vec::new();
    // subsets containing vertex 0, proper
    for rest in 0u32..(1u32 << (n - 1)) {
        let s = (rest << 1) | 1;
        if s == (1u32 << n) - 1 {
            continue;
        }
        let cross = mk.edges.iter().filter(|x| (s >> x.1 & 1) != (s >> x.2 & 1)).count();
        if cross < lambda {
            lambda = cross;
            cuts.clear();
        }
        if cross == lambda {
            cuts.push(bits(s, n));
        }
    }
    Ok((lambda, cuts))
}

/// Explicit convex combination of bases, as `(weight, base)` pairs.
pub type Decomposition = Vec<(Rational, Vec<EdgeId>)>;

/// Writes x* as a convex combination of bases. Each level is decomposed by
/// greedy packing inside its minor until the counts are exactly uniform, then
/// the levels are stitched along a common refinement of [0, 1).
pub fn base_decomposition(g: &Graph, kind: MatroidKind, x: &IdealLoads, max_steps: u32) -> Result<Decomposition, IdealError> {
    let n = g.n();
    let mut below: Vec<(usize, usize)> = Vec::new();
    let mut per_level: Vec<Vec<Vec<EdgeId>>> = Vec::new();
    for lvl in &x.levels {
        let ends: Vec<(EdgeId, usize, usize)> =
            lvl.edges.iter().map(|&e| (e, g.endpoints(e).expect("edge").0, g.endpoints(e).expect("edge").1)).collect();
        let mut start = Independence::new(n, kind);
        for &(u, v) in &below {
            start.try_add(u, v);
        }
        let mut counts = vec![0u32; ends.len()];
        let mut seq = Vec::new();
        let mut found = false;
        for k in 1..=max_steps {
            let mut order: Vec<usize> = (0..ends.len()).collect();
            order.sort_by_key(|&i| (counts[i], ends[i].0));
            let mut ind = start.clone();
            let mut base = Vec::new();
            for i in order {
                if ind.try_add(ends[i].1, ends[i].2) {
                    counts[i] += 1;
                    base.push(ends[i].0);
                }
            }
            seq.push(base);
            let target = &lvl.value * Rational::from_integer(BigInt::from(k));
            if counts.iter().all(|&c| Rational::from_integer(BigInt::from(c)) == target) {
                found = true;
                break;
            }
        }
        if !found {
            return Err(IdealError::NoDecomposition);
        }
        per_level.push(seq);
        below.extend(ends.iter().map(|&(_, u, v)| (u, v)));
    }
    // common refinement of the uniform grids 1/k_i
    let mut cuts: Vec<Rational> = Vec::new();
    for seq in &per_level {
        let k = seq.len();
        cuts.extend((0..k).map(|j| rat(j, k)));
    }
    cuts.push(Rational::one());
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
        let mut base = Vec::new();
        for seq in &per_level {
            let idx = (&mid * Rational::from_integer(BigInt::from(seq.len()))).floor();
            let j: usize = idx.to_integer().try_into().expect("small index");
            base.extend_from_slice(&seq[j]);
        }
        base.sort_unstable();
        out.push((&w[1] - &w[0], base));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn tri_pendant() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
    }

    fn k4_pendant() -> Graph {
        Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn densest_triangle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = densest_exact(&g, MatroidKind::Bicircular).unwrap();
        assert_eq!(d.set, vec![0, 1, 2]);
        assert_eq!(d.ratio, r(1, 1));
        assert!(d.maximal);
    }

    #[test]
    fn densest_k4_pendant() {
        let d = densest_exact(&k4_pendant(), MatroidKind::Bicircular).unwrap();
        assert_eq!(d.set, vec![0, 1, 2, 3]);
        assert_eq!(d.ratio, r(3, 2));
    }

    #[test]
    fn contraction_triangle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let x = x_star_contraction(&g, MatroidKind::Graphic).unwrap();
        assert_eq!(x.levels.len(), 1);
        assert!(x.loads.values.iter().all(|v| *v == r(2, 3)));
    }

    #[test]
    fn contraction_triangle_pendant() {
        let x = x_star_contraction(&tri_pendant(), MatroidKind::Graphic).unwrap();
        assert_eq!(x.loads.values, vec![r(2, 3), r(2, 3), r(2, 3), r(1, 1)]);
        assert_eq!(x.levels.len(), 2);
        assert!(x.levels[0].value < x.levels[1].value);
    }

    #[test]
    fn norm_certificate_holds() {
        for kind in [MatroidKind::Graphic, MatroidKind::Bicircular] {
            let g = k4_pendant();
            let x = x_star_contraction(&g, kind).unwrap();
            assert_eq!(min_base_weight(&g, kind, &x.loads), x.norm2_sq());
            assert_eq!(x.loads.sum(), Rational::from_integer(g.rank(kind).into()));
        }
    }

    #[test]
    fn min_load_is_inverse_density() {
        let g = k4_pendant();
        let x = x_star_contraction(&g, MatroidKind::Bicircular).unwrap();
        assert_eq!(density_from_loads(&x), densest_exact(&g, MatroidKind::Bicircular).unwrap().ratio);
    }

    #[test]
    fn mincuts_cycle_and_tree() {
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let (l, cuts) = mincuts_enumerate(&c4).unwrap();
        assert_eq!(l, 2);
        // a side containing 0 is a contiguous arc: {0},{0,1},{0,3},{0,1,2},{0,2,3},{0,1,3}
        assert_eq!(cuts.len(), 6);
        let tree = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let (l, cuts) = mincuts_enumerate(&tree).unwrap();
        assert_eq!((l, cuts.len()), (1, 3));
        assert_eq!(mincuts_enumerate(&Graph::from_edges(3, &[(0, 1)]).unwrap()), Err(IdealError::Disconnected));
    }

    #[test]
    fn decomposition_reproduces_loads() {
        let g = tri_pendant();
        let x = x_star_contraction(&g, MatroidKind::Graphic).unwrap();
        let dec = base_decomposition(&g, MatroidKind::Graphic, &x, 100).unwrap();
        let total: Rational = dec.iter().fold(Rational::zero(), |a, (w, _)| a + w);
        assert_eq!(total, Rational::one());
        for (i, &e) in x.loads.ids.iter().enumerate() {
            let s = dec.iter().filter(|(_, b)| b.contains(&e)).fold(Rational::zero(), |a, (w, _)| a + w);
            assert_eq!(s, x.loads.values[i]);
        }
    }

    #[test]
    fn graphic_loop_rejected() {
        let g = Graph::from_edges(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(densest_exact(&g, MatroidKind::Graphic), Err(IdealError::GraphicLoop));
    }
}
