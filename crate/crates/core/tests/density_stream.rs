use basepack::density::{brackets, single_scale_estimator, EstimatorConfig, MultiScaleState};
use basepack::ideal::densest_exact;
use basepack::lab::corpus::{random_multigraph, update_stream};
use basepack::lab::ladder::{ladder_graph, LadderSpec};
use basepack::{Graph, MatroidKind, Rational, UpdateEvent};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn truth(g: &Graph) -> Rational {
    densest_exact(g, MatroidKind::Bicircular).unwrap().ratio
}

/// Replays a stream with a query after every update.
fn replay(n: usize, steps: usize, seed: u64, eps: Rational) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = random_multigraph(&mut rng, n, n + 2);
    let evs = update_stream(&mut rng, &g0, steps, 14);
    let cfg = EstimatorConfig::new(eps.clone(), r(4, 1), 14).unwrap();
    let mut st = MultiScaleState::from_graph(&g0, cfg).unwrap();
    for ev in &evs {
        st.update(ev).unwrap();
        let rep = st.query().unwrap();
        if st.graph().m() == 0 {
            continue;
        }
        let t = truth(st.graph());
        assert!(rep.estimate >= t, "estimate below the density");
        assert!(rep.estimate <= &t * (Rational::from_integer(1.into()) + &eps), "estimate above (1+eps) density");
        assert!(brackets(&rep, &t));
        assert_eq!(rep.is_forest, st.graph().rank(MatroidKind::Graphic) == st.graph().m());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn stream_estimates_sandwich(seed in any::<u64>(), n in 4usize..8) {
        replay(n, 25, seed, r(1, 2));
    }
}

#[test]
fn forest_fallback_exact() {
    let cfg = EstimatorConfig::new(r(1, 2), r(2, 1), 8).unwrap();
    let mut st = MultiScaleState::new(3, cfg).unwrap();
    st.insert(0, 1).unwrap();
    st.insert(1, 2).unwrap();
    let rep = st.query().unwrap();
    assert!(rep.is_forest);
    assert_eq!(rep.estimate, r(2, 3));
    let e = st.insert(0, 2).unwrap();
    let rep = st.query().unwrap();
    assert!(!rep.is_forest && brackets(&rep, &r(1, 1)));
    st.delete(e).unwrap();
    assert!(st.query().unwrap().is_forest);
}

#[test]
fn k4_plus_pendant_brackets() {
    let mut e = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    e.push((3, 4));
    let g = Graph::from_edges(5, &e).unwrap();
    let cfg = EstimatorConfig::new(r(1, 4), r(2, 1), 7).unwrap();
    let mut st = MultiScaleState::from_graph(&g, cfg).unwrap();
    let rep = st.query().unwrap();
    assert!(brackets(&rep, &r(3, 2)));
}

#[test]
fn ladder_single_scale() {
    let l = ladder_graph(&LadderSpec::new(8, 1));
    assert_eq!(truth(&l.graph), r(22, 16));
    let est = single_scale_estimator(&l.graph, &r(1, 4), &r(2, 1)).unwrap();
    assert!(est >= r(22, 16) && est <= r(22, 16) * r(5, 4));
}

#[test]
fn above_rho_max_is_flagged() {
    // five parallel edges: density 5/2 > rho_max = 1
    let cfg = EstimatorConfig::new(r(1, 2), r(1, 1), 6).unwrap();
    let mut st = MultiScaleState::new(2, cfg).unwrap();
    for _ in 0..5 {
        st.update(&UpdateEvent::Insert { u: 0, v: 1, id: None }).unwrap();
    }
    let rep = st.query().unwrap();
    assert!(rep.above_rho_max);
    assert!(rep.high.is_none());
    assert!(brackets(&rep, &r(5, 2)));
}
