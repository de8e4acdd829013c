//! Seeded random multigraphs and update streams.

use crate::graph::{Graph, UpdateEvent};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a generated corpus.
#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub m_max: usize,
    /// Reject forests.
    pub cyclic: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { seed: 7, count: 50, n_min: 8, n_max: 12, m_max: 40, cyclic: true }
    }
}

/// Connected loop-free multigraph: random spanning tree plus `m - n + 1` extra edges.
pub fn random_multigraph<R: Rng>(rng: &mut R, n: usize, m: usize) -> Graph {
    assert!(n >= 2 && m + 1 >= n);
    let mut g = Graph::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let p = order[rng.gen_range(0..i)];
        g.insert(p, order[i]).expect("in range");
    }
    while g.m() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            g.insert(u, v).expect("in range");
        }
    }
    g
}

pub fn corpus(spec: &CorpusSpec) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|_| {
            let n = rng.gen_range(spec.n_min..=spec.n_max);
            let lo = if spec.cyclic { n } else { n - 1 };
            let m = rng.gen_range(lo..=spec.m_max.max(lo));
            random_multigraph(&mut rng, n, m)
        })
        .collect()
}

/// Random insert/delete stream over `g`'s vertex set. Keeps `m` in `[1, m_max]`
/// and never emits loops. Deletions refer to ids live at that point, assuming
/// fresh ids are handed out sequentially from `g.id_bound()`.
pub fn update_stream<R: Rng>(rng: &mut R, g: &Graph, steps: usize, m_max: usize) -> Vec<UpdateEvent> {
    let n = g.n();
    let mut live: Vec<u32> = g.edge_ids();
    let mut next = g.id_bound();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let insert = live.len() <= 1 || (live.len() < m_max && rng.gen_bool(0.5));
        if insert {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            out.push(UpdateEvent::Insert { u, v, id: Some(next) });
            live.push(next);
            next += 1;
        } else {
            let i = rng.gen_range(0..live.len());
            out.push(UpdateEvent::Delete(live.swap_remove(i)));
        }
    }
    out
}

/// Events that build `g` from an empty graph, keeping its ids.
pub fn build_events(g: &Graph) -> Vec<UpdateEvent> {
    g.edges().map(|(id, u, v)| UpdateEvent::Insert { u, v, id: Some(id) }).collect()
}
