//! Dynamic densest-subgraph density: multi-scale pruned runs, an unpruned
//! coarse run for scale selection, and the forest fallback.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::dynpacking::{DynError, LayeredPacking, Recourse};
use crate::graph::{Applied, EdgeId, Graph, GraphError, MatroidKind, UpdateEvent};
use crate::packing::{min_load_estimate, pack, PackError, PruneConfig};
use crate::scalar::fmt_rational;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("eps must lie in (0, 1] and rho_max must be at least 1")]
    BadConfig,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Layers(#[from] DynError),
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error("event is not an update")]
    NotAnUpdate,
}

/// Estimator parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub eps: Rational,
    pub rho_max: Rational,
    /// Edge-count cap used in every logarithm.
    pub m_hat: usize,
    pub c_k: f64,
    pub c_prune: f64,
    pub c_load: u32,
}

impl EstimatorConfig {
    pub fn new(eps: Rational, rho_max: Rational, m_hat: usize) -> Result<Self, DensityError> {
        let cfg = EstimatorConfig { eps, rho_max, m_hat, c_k: 20.0, c_prune: 24.0, c_load: 2 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !self.eps.is_positive() || self.eps > Rational::one() || self.rho_max < Rational::one() {
            return Err(DensityError::BadConfig);
        }
        Ok(())
    }

    fn ln_m(&self) -> f64 {
        (self.m_hat.max(2) as f64).ln()
    }

    fn eps_f(&self) -> f64 {
        self.eps.to_f64().unwrap_or(1.0)
    }

    /// Number of pruned runs, `ceil(log2 rho_max) + 2`.
    pub fn runs(&self) -> usize {
        ceil_log2(&self.rho_max) as usize + 2
    }

    /// Layers of run i (1-based), `ceil(c_k * 2^(i-1) * ln m / eps^2)`.
    pub fn run_layers(&self, i: usize) -> u32 {
        let rho_i = f64::from(1u32 << (i - 1));
        (self.c_k * rho_i * self.ln_m() / self.eps_f().powi(2)).ceil() as u32
    }

    /// Layers of the coarse run, `ceil(8 * rho_max * ln m)`.
    pub fn coarse_layers(&self) -> u32 {
        (8.0 * self.rho_max.to_f64().unwrap_or(1.0) * self.ln_m()).ceil() as u32
    }

    pub fn run_prune(&self, i: usize) -> PruneConfig {
        let lo = Rational::from_integer(BigInt::from(1u64 << (i - 1)));
        let hi = Rational::from_integer(BigInt::from(1u64 << (i + 1)));
        PruneConfig { rho_lo: lo, rho_hi: hi, c_load: self.c_load, c_prune: self.c_prune, m_hat: Some(self.m_hat) }
    }
}

/// Smallest t with 2^t >= x, for x >= 1.
fn ceil_log2(x: &Rational) -> u32 {
    let mut t = 0;
    let mut p = Rational::one();
    while &p < x {
        p *= Rational::from_integer(2.into());
        t += 1;
    }
    t
}

/// Largest t with 2^t <= x, for x >= 1.
fn floor_log2(x: &Rational) -> u32 {
    let mut t = 0;
    let mut p = Rational::from_integer(2.into());
    while &p <= x {
        p *= Rational::from_integer(2.into());
        t += 1;
    }
    t
}

/// Answer to a density query.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub estimate: Rational,
    pub low: Rational,
    /// None stands for an unbounded guarantee.
    pub high: Option<Rational>,
    pub is_forest: bool,
    /// 1-based run index, absent for the forest fallback.
    pub selected_scale: Option<usize>,
    /// The coarse estimate exceeded rho_max; the guarantee is widened.
    pub above_rho_max: bool,
}

impl DensityReport {
    fn forest(largest: usize) -> Self {
        let n = largest.max(1);
        let val = Rational::new(BigInt::from(n - 1), BigInt::from(n));
        DensityReport {
            estimate: val.clone(),
            low: val.clone(),
            high: Some(val),
            is_forest: true,
            selected_scale: None,
            above_rho_max: false,
        }
    }

    /// `op_index,estimate,low,high,is_forest,selected_scale`.
    pub fn csv_row(&self, op_index: usize) -> String {
        format!(
            "{op_index},{},{},{},{},{}",
            fmt_rational(&self.estimate),
            fmt_rational(&self.low),
            self.high.as_ref().map_or("inf".to_string(), fmt_rational),
            self.is_forest,
            self.selected_scale.map_or(String::new(), |i| i.to_string())
        )
    }
}

pub const REPORT_HEADER: &str = "op_index,estimate,low,high,is_forest,selected_scale";

/// Coarse run plus r pruned runs over a shared graph.
#[derive(Clone, Debug)]
pub struct MultiScaleState {
    cfg: EstimatorConfig,
    graph: Graph,
    coarse: LayeredPacking,
    runs: Vec<LayeredPacking>,
}

impl MultiScaleState {
    pub fn new(n: usize, cfg: EstimatorConfig) -> Result<Self, DensityError> {
        cfg.validate()?;
        let coarse = LayeredPacking::new(n, cfg.coarse_layers(), None, cfg.m_hat);
        let runs = (1..=cfg.runs())
            .map(|i| LayeredPacking::new(n, cfg.run_layers(i), Some(cfg.run_prune(i)), cfg.m_hat))
            .collect();
        Ok(MultiScaleState { cfg, graph: Graph::new(n), coarse, runs })
    }

    /// State after inserting all of g's edges, built layer by layer.
    pub fn from_graph(g: &Graph, cfg: EstimatorConfig) -> Result<Self, DensityError> {
        cfg.validate()?;
        let edges: Vec<_> = g.edges().collect();
        let n = g.n();
        let coarse = LayeredPacking::from_edges(n, cfg.coarse_layers(), None, cfg.m_hat, &edges)?;
        let runs = (1..=cfg.runs())
            .map(|i| LayeredPacking::from_edges(n, cfg.run_layers(i), Some(cfg.run_prune(i)), cfg.m_hat, &edges))
            .collect::<Result<_, _>>()?;
        Ok(MultiScaleState { cfg, graph: g.clone(), coarse, runs })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coarse(&self) -> &LayeredPacking {
        &self.coarse
    }

    /// Run i, 1-based.
    pub fn run(&self, i: usize) -> &LayeredPacking {
        &self.runs[i - 1]
    }

    pub fn run_mut(&mut self, i: usize) -> &mut LayeredPacking {
        &mut self.runs[i - 1]
    }

    pub fn runs(&self) -> usize {
        self.runs.len()
    }

    pub fn total_layers(&self) -> u64 {
        u64::from(self.coarse.k()) + self.runs.iter().map(|r| u64::from(r.k())).sum::<u64>()
    }

    /// Applies an insert or delete to every run; returns the assigned or
    /// removed id and per-run recourse (coarse first).
    pub fn update(&mut self, ev: &UpdateEvent) -> Result<(EdgeId, Vec<Recourse>), DensityError> {
        let applied = self.graph.apply_update(ev)?;
        let mut out = Vec::with_capacity(self.runs.len() + 1);
        match applied {
            Applied::Inserted(e) => {
                let (u, v) = self.graph.endpoints(e).expect("just inserted");
                out.push(self.coarse.insert(e, u, v)?);
                for r in &mut self.runs {
                    out.push(r.insert(e, u, v)?);
                }
                Ok((e, out))
            }
            Applied::Deleted(e) => {
                out.push(self.coarse.delete(e)?);
                for r in &mut self.runs {
                    out.push(r.delete(e)?);
                }
                Ok((e, out))
            }
            Applied::Query => Err(DensityError::NotAnUpdate),
        }
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<EdgeId, DensityError> {
        self.update(&UpdateEvent::Insert { u, v, id: None }).map(|x| x.0)
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<(), DensityError> {
        self.update(&UpdateEvent::Delete(e)).map(|_| ())
    }

    /// Run index for a coarse estimate: the run whose interval
    /// `[2^(i-1), 2^(i+1)]` contains `[rho_hat / 2, rho_hat]`.
    pub fn select_scale(&self, rho_hat: &Rational) -> usize {
        let i = if rho_hat < &Rational::one() { 0 } else { floor_log2(rho_hat) as usize };
        i.clamp(1, self.runs.len())
    }

    pub fn query(&mut self) -> Result<DensityReport, DensityError> {
        if self.graph.m() == 0 {
            return Ok(DensityReport::forest(1));
        }
        let s = self.coarse.layer_mut(1).summary();
        if s.is_forest {
            return Ok(DensityReport::forest(s.largest_component));
        }
        let rho_hat = self.coarse.estimate()?;
        let above = rho_hat > self.cfg.rho_max;
        let i = self.select_scale(&rho_hat);
        let val = self.runs[i - 1].estimate()?;
        let (low, high) = if above {
            (&val / Rational::from_integer(2.into()), None)
        } else {
            (&val / (Rational::one() + &self.cfg.eps), Some(val.clone()))
        };
        Ok(DensityReport { estimate: val, low, high, is_forest: false, selected_scale: Some(i), above_rho_max: above })
    }
}

/// Static single-run estimator with `ceil(c_k * rho_max * ln m / eps^2)`
/// unpruned layers; forests get the exact fallback.
pub fn single_scale_estimator(g: &Graph, eps: &Rational, rho_max: &Rational) -> Result<Rational, DensityError> {
    if g.m() == 0 {
        return Err(PackError::EmptyGraph.into());
    }
    if g.rank(MatroidKind::Graphic) == g.m() {
        let (label, count) = g.components();
        let largest = (0..count).map(|c| label.iter().filter(|&&l| l == c).count()).max().unwrap_or(1);
        return Ok(DensityReport::forest(largest).estimate);
    }
    let eps_f = eps.to_f64().unwrap_or(1.0);
    let ln_m = (g.m().max(2) as f64).ln();
    let k = (20.0 * rho_max.to_f64().unwrap_or(1.0) * ln_m / (eps_f * eps_f)).ceil() as u32;
    let st = pack(g, MatroidKind::Bicircular, k)?;
    Ok(min_load_estimate(&st)?)
}

/// CSV text for a sequence of reports.
pub fn reports_to_csv(rows: &[(usize, DensityReport)]) -> String {
    let mut s = format!("{REPORT_HEADER}\n");
    for (i, r) in rows {
        let _ = writeln!(s, "{}", r.csv_row(*i));
    }
    s
}

/// Whether `x` lies in the report's guarantee.
pub fn brackets(r: &DensityReport, x: &Rational) -> bool {
    &r.low <= x && r.high.as_ref().is_none_or(|h| x <= h)
}
