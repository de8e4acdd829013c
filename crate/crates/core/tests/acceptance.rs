//! Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Pass criterion numbers as arguments to run a subset; set
//! `BASEPACK_ACCEPT_QUICK=1` to shrink the density workload (criteria 1 and 10).

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use basepack::density::{EstimatorConfig, MultiScaleState};
use basepack::graph::Independence;
use basepack::ideal::{densest_exact, min_base_weight, x_star_contraction};
use basepack::lab::convergence::{convergence_curves, convergence_curves_with, P_NORM};
use basepack::lab::corpus::{corpus, update_stream, CorpusSpec};
use basepack::lab::ladder::{ladder_graph, lex_mst_packer, LadderSpec};
use basepack::lab::one_respecting::{one_respecting_check, tree_budget};
use basepack::lab::tiles::{tile_step_errors, tile_trace};
use basepack::orientation::{threshold_layers, DynOrientation};
use basepack::pseudoforest::Pseudoforest;
use basepack::{Graph, MatroidKind, Rational};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rho_bicircular(g: &Graph) -> Rational {
    densest_exact(g, MatroidKind::Bicircular).unwrap().ratio
}

// ---------------------------------------------------------------- 1 and 10

/// Everything criteria 1 and 10 need from one replay of the density workload.
struct DensityRun {
    graphs: usize,
    updates: usize,
    sandwich_failures: Vec<String>,
    elapsed: Duration,
    /// Per stream and run (coarse first): (k, total swaps, updates).
    swaps: Vec<Vec<(u32, u64, usize)>>,
    membership_failures: Vec<String>,
    quick: bool,
}

fn density_workload() -> DensityRun {
    let quick = std::env::var("BASEPACK_ACCEPT_QUICK").is_ok_and(|v| v == "1");
    let (count, steps) = if quick { (4, 20) } else { (50, 200) };
    let graphs: Vec<Graph> = corpus(&CorpusSpec::default()).into_iter().take(count).collect();
    let eps = r(1, 4);
    let bound = Rational::one() + &eps;
    let start = Instant::now();
    let mut out = DensityRun {
        graphs: graphs.len(),
        updates: 0,
        sandwich_failures: Vec::new(),
        elapsed: Duration::ZERO,
        swaps: Vec::new(),
        membership_failures: Vec::new(),
        quick,
    };
    for (gi, g0) in graphs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + gi as u64);
        let events = update_stream(&mut rng, g0, steps, 40);
        // oracle densities first; they also fix the stream's rho_max
        let mut g = g0.clone();
        let mut truth = Vec::with_capacity(events.len());
        for ev in &events {
            g.apply_update(ev).unwrap();
            truth.push(rho_bicircular(&g));
        }
        let peak = truth.iter().max().cloned().unwrap_or_else(Rational::one);
        let mut rho_max = Rational::one();
        while rho_max < peak {
            rho_max *= Rational::from_integer(2.into());
        }
        let cfg = EstimatorConfig::new(eps.clone(), rho_max.clone(), 40).unwrap();
        let mut st = MultiScaleState::from_graph(g0, cfg).unwrap();
        let mut per_run: Vec<(u32, u64, usize)> = std::iter::once(st.coarse().k())
            .chain((1..=st.runs()).map(|i| st.run(i).k()))
            .map(|k| (k, 0, 0))
            .collect();
        for (step, (ev, rho)) in events.iter().zip(&truth).enumerate() {
            let (_, rec) = st.update(ev).unwrap();
            for (slot, x) in per_run.iter_mut().zip(&rec) {
                slot.1 += x.swaps;
                slot.2 += 1;
            }
            let rep = st.query().unwrap();
            if rep.estimate < *rho || rep.estimate > rho * &bound {
                out.sandwich_failures.push(format!("graph {gi} step {step}: {} vs {}", rep.estimate, rho));
            }
            for i in 1..=st.runs() {
                let run = st.run(i);
                if run.max_membership() > run.appearance_bound() {
                    out.membership_failures.push(format!(
                        "graph {gi} step {step} run {i}: {} > {}",
                        run.max_membership(),
                        run.appearance_bound()
                    ));
                }
            }
        }
        out.updates += events.len();
        out.swaps.push(per_run);
        eprintln!(
            "  [1] stream {}/{} rho_max={} layers={} {:.1}s",
            gi + 1,
            graphs.len(),
            rho_max,
            st.total_layers(),
            start.elapsed().as_secs_f64()
        );
    }
    out.elapsed = start.elapsed();
    out
}

fn criterion1(run: &DensityRun) -> Outcome {
    let limit = Duration::from_secs(120);
    let fast = run.elapsed <= limit;
    let mut detail = format!(
        "{} graphs, {} updates, {} sandwich failures, {:.1}s (limit 120s)",
        run.graphs,
        run.updates,
        run.sandwich_failures.len(),
        run.elapsed.as_secs_f64()
    );
    if let Some(f) = run.sandwich_failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    if run.quick {
        detail.push_str("; quick mode, runtime not judged");
        return outcome(run.sandwich_failures.is_empty(), detail);
    }
    if !fast {
        detail.push_str("; runtime over limit");
    }
    outcome(run.sandwich_failures.is_empty() && fast, detail)
}

fn criterion10(run: &DensityRun) -> Outcome {
    let mut worst = 0f64;
    let mut over = 0;
    for per_run in &run.swaps {
        for &(k, total, n) in per_run {
            if n == 0 {
                continue;
            }
            let mean = total as f64 / n as f64;
            let ratio = mean / (f64::from(k) * f64::from(k));
            worst = worst.max(ratio);
            if ratio > 4.0 {
                over += 1;
            }
        }
    }
    let pass = over == 0 && run.membership_failures.is_empty();
    let mut detail = format!(
        "max mean swaps / k^2 = {worst:.6} (limit 4), {over} runs over, {} membership violations",
        run.membership_failures.len()
    );
    if let Some(f) = run.membership_failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

// ---------------------------------------------------------------- 2

fn greedy_weight(n: usize, edges: &BTreeMap<u32, (usize, usize, u32)>) -> u64 {
    let mut order: Vec<(u32, u32)> = edges.iter().map(|(&id, &(_, _, w))| (w, id)).collect();
    order.sort_unstable();
    let mut ind = Independence::new(n, MatroidKind::Bicircular);
    order
        .into_iter()
        .filter(|&(_, id)| {
            let (u, v, _) = edges[&id];
            ind.try_add(u, v)
        })
        .map(|(w, _)| u64::from(w))
        .sum()
}

fn criterion2() -> Outcome {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pf = Pseudoforest::new(n);
    let mut edges: BTreeMap<u32, (usize, usize, u32)> = BTreeMap::new();
    let mut next = 0u32;
    let mut mismatches = 0;
    let start = Instant::now();
    for _ in 0..10_000 {
        let roll = rng.gen_range(0..10);
        if edges.len() < 2 * n && (edges.len() < n || roll < 5) || edges.is_empty() {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            let w = rng.gen_range(0..50);
            pf.insert(next, u, v, w).unwrap();
            edges.insert(next, (u, v, w));
            next += 1;
        } else {
            let id = *edges.keys().nth(rng.gen_range(0..edges.len())).unwrap();
            if roll < 7 {
                pf.delete(id).unwrap();
                edges.remove(&id);
            } else {
                let w = rng.gen_range(0..50);
                pf.reweight(id, w).unwrap();
                edges.get_mut(&id).unwrap().2 = w;
            }
        }
        if pf.total_weight() != greedy_weight(n, &edges) {
            mismatches += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        mismatches == 0 && t <= Duration::from_secs(60),
        format!("10000 events on n=200, {mismatches} weight mismatches, {:.1}s (limit 60s)", t.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- 3

fn criterion3() -> Outcome {
    let mut bad = Vec::new();
    let graphs = corpus(&CorpusSpec::default());
    for (gi, g) in graphs.iter().enumerate() {
        for kind in [MatroidKind::Graphic, MatroidKind::Bicircular] {
            let x = x_star_contraction(g, kind).unwrap();
            if !x.levels.windows(2).all(|w| w[0].value < w[1].value) {
                bad.push(format!("graph {gi} {kind:?}: levels not increasing"));
            }
            let rho = densest_exact(g, kind).unwrap().ratio;
            if x.min_value() != rho.recip() {
                bad.push(format!("graph {gi} {kind:?}: min {} vs 1/{}", x.min_value(), rho));
            }
            if min_base_weight(g, kind, &x.loads) != x.norm2_sq() {
                bad.push(format!("graph {gi} {kind:?}: min base weight differs from |x*|^2"));
            }
        }
    }
    let mut detail = format!("{} graphs x 2 matroids, {} failures", graphs.len(), bad.len());
    if let Some(f) = bad.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(bad.is_empty(), detail)
}

// ---------------------------------------------------------------- 4

fn criterion4() -> Outcome {
    let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
    let c = convergence_curves::<f64>(&g, MatroidKind::Graphic, 100_000, P_NORM).unwrap();
    let v = c.violations();
    let last = c.at(100_000).unwrap().dist_2;
    let mut detail = format!("{} bound violations over k <= 1e5, dist at 1e5 = {last:.3e} (limit 0.05)", v.len());
    if let Some(f) = v.first() {
        detail.push_str(&format!("; first: {} at k={} ({} > {})", f.bound, f.k, f.value, f.limit));
    }
    outcome(v.is_empty() && last <= 0.05, detail)
}

// ---------------------------------------------------------------- 5

fn criterion5() -> Outcome {
    let k_max = 5000;
    let mut total = 0;
    let mut cases = 0;
    for g in corpus(&CorpusSpec::default()) {
        total += convergence_curves::<f64>(&g, MatroidKind::Graphic, k_max, P_NORM).unwrap().thorup_violations();
        cases += 1;
    }
    for (d, w) in [(8, 1), (16, 1), (30, 1), (50, 1), (100, 1), (30, 3), (100, 3)] {
        let l = ladder_graph(&LadderSpec::new(d, w));
        let c = convergence_curves_with::<f64>(&l.graph, MatroidKind::Graphic, k_max, P_NORM, &l.x_star(), l.spec.lambda())
            .unwrap();
        total += c.thorup_violations();
        cases += 1;
    }
    outcome(total == 0, format!("{cases} graphs, k <= {k_max}, {total} violations"))
}

// ---------------------------------------------------------------- 6

/// `err_inf` of the lex MST packing of `G_d^w` at each requested k.
fn ladder_errors(d: usize, w: usize, ks: &[u32]) -> Vec<f64> {
    let l = ladder_graph(&LadderSpec::new(d, w));
    let xs = l.spec.x_star();
    let ids = l.graph.edge_ids();
    let mut p = lex_mst_packer(&l.graph).unwrap();
    let mut out = Vec::new();
    for &k in ks {
        while p.state().k < k {
            p.step().unwrap();
        }
        let st = p.state();
        let err = ids
            .iter()
            .map(|&e| {
                let x = Rational::new(st.count(e).into(), k.into());
                let dlt = x - &xs;
                if dlt < Rational::zero() {
                    -dlt
                } else {
                    dlt
                }
            })
            .max()
            .unwrap();
        out.push(err.to_f64().unwrap());
    }
    out
}

fn criterion6() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let ks = [96, 384, 864];
    for (k, e) in ks.iter().zip(ladder_errors(100, 1, &ks)) {
        let kf = f64::from(*k);
        let (lhs, rhs) = (kf * e, 0.5 * (kf / 6.0).sqrt());
        pass &= lhs >= rhs;
        lines.push(format!("G_100 k={k}: k*err={lhs:.4} >= {rhs:.4}"));
    }
    let ks = [288, 1152];
    for (k, e) in ks.iter().zip(ladder_errors(100, 3, &ks)) {
        let rhs = 0.5 * (1.0 / (6.0 * f64::from(*k))).sqrt();
        let ok = e >= rhs;
        pass &= ok;
        lines.push(format!("G_100^3 k={k}: err={e:.6} >= {rhs:.6}{}", if ok { "" } else { " FAILS" }));
    }
    outcome(pass, lines.join("; "))
}

// ---------------------------------------------------------------- 7

fn criterion7() -> Outcome {
    let l = ladder_graph(&LadderSpec::new(30, 1));
    let trace = tile_trace(&l, 54..=225);
    let mut errs = Vec::new();
    let mut strings = Vec::new();
    for t in trace {
        match t {
            Ok(s) => strings.push(s),
            Err(e) => errs.push(e.to_string()),
        }
    }
    let anchors = [(54, "b1 m6 m1 z2"), (96, "b1 m3 m5 m4 z1")];
    for (k, want) in anchors {
        match strings.iter().find(|s| s.k == k) {
            Some(s) if s.to_string() == want => {}
            Some(s) => errs.push(format!("k={k}: {s} vs {want}")),
            None => errs.push(format!("k={k}: missing")),
        }
    }
    for w in strings.windows(2) {
        for e in tile_step_errors(&w[0], &w[1]) {
            errs.push(format!("k={}->{}: {e}", w[0].k, w[1].k));
        }
    }
    let mut detail = format!("{} strings decoded over [54, 225], {} errors", strings.len(), errs.len());
    if let Some(f) = errs.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(errs.is_empty() && strings.len() == 172, detail)
}

// ---------------------------------------------------------------- 8

fn criterion8() -> Outcome {
    let ratio = r(5, 4);
    let mut bad = Vec::new();
    let mut checked = 0;
    for (gi, g) in corpus(&CorpusSpec::default()).iter().enumerate() {
        if g.rank(MatroidKind::Graphic) == g.m() {
            continue;
        }
        checked += 1;
        let rho = rho_bicircular(g);
        let k = threshold_layers(20.0, rho.to_f64().unwrap(), g.m(), 0.25);
        let mut o = DynOrientation::from_graph(g, k, g.m()).unwrap();
        let a = o.audit().unwrap();
        if a.max > &ratio * &rho {
            bad.push(format!("graph {gi}: max outdeg {} > 5/4 * {rho}", a.max));
        }
        let mut deg = vec![Rational::zero(); g.n()];
        for e in &a.edges {
            if &e.d_uv + &e.d_vu != Rational::one() {
                bad.push(format!("graph {gi} edge {}: fractions do not sum to 1", e.id));
            }
            deg[e.u] += &e.d_uv;
            deg[e.v] += &e.d_vu;
        }
        let sum: Rational = a.outdeg.iter().sum();
        if deg != a.outdeg || sum != Rational::from_integer(g.m().into()) {
            bad.push(format!("graph {gi}: degree identity broken"));
        }
    }
    let mut detail = format!("{checked} non-forest graphs at threshold k, {} failures", bad.len());
    if let Some(f) = bad.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(bad.is_empty() && checked > 0, detail)
}

// ---------------------------------------------------------------- 9

fn criterion9() -> Outcome {
    let spec = CorpusSpec { seed: 9, count: 20, n_min: 5, n_max: 12, m_max: 30, cyclic: true };
    let mut found = 0;
    let mut ks = Vec::new();
    for g in corpus(&spec) {
        let probe = one_respecting_check(&g, 1).unwrap();
        let budget = tree_budget(probe.lambda, g.m());
        let res = one_respecting_check(&g, budget).unwrap();
        if res.found {
            found += 1;
        }
        ks.push(match res.smallest_k() {
            Some(k) => format!("{k}/{budget}"),
            None => format!("-/{budget}"),
        });
    }
    outcome(found == 20, format!("{found}/20 found; smallest k per graph (k/budget): {}", ks.join(" ")))
}

// ----------------------------------------------------------------

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |c: u32| only.is_empty() || only.contains(&c);
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |c: u32, o: Outcome| {
        println!("criterion {c:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((c, o));
    };
    let density = if want(1) || want(10) { Some(density_workload()) } else { None };
    let tests: [(u32, fn() -> Outcome); 8] = [
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
    ];
    if want(1) {
        report(1, criterion1(density.as_ref().unwrap()));
    }
    for (c, f) in tests {
        if want(c) {
            report(c, f());
        }
    }
    if want(10) {
        report(10, criterion10(density.as_ref().unwrap()));
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed {:?}", results.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
