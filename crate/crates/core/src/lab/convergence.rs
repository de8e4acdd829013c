//! Convergence of greedy packing loads toward the ideal loads, with the
//! closed-form bounds they are checked against.

use std::fmt::Write as _;

use crate::graph::{Graph, MatroidKind};
use crate::ideal::{mincuts_enumerate, x_star_contraction, IdealError};
use crate::packing::{LoadsVector, PackError, PackOptions, Packer};
use crate::scalar::{fmt_decimal, Scalar};
use crate::Rational;

/// Exponent of the p-norm columns.
pub const P_NORM: u32 = 10;

/// Errors and bounds after k packed bases.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord<S> {
    pub k: u32,
    /// `max |x^k - x*|`
    pub err_inf: S,
    /// `|x^k|_2 - |x*|_2`
    pub err_2: S,
    /// `|x^k|_p - |x*|_p`
    pub err_p: S,
    /// `|x^k - x*|_2`
    pub dist_2: S,
    /// `|x^k|_2^2 - |x*|_2^2`
    pub gap2_sq: S,
    /// `|x^k|_p^p - |x*|_p^p`
    pub gapp: S,
    /// `sqrt(6 ln m / (k lambda))`
    pub thorup_bound: S,
    /// `sqrt(m) ln(k+1) / k`
    pub norm2_bound: S,
    /// `(p/2) m^(1/p) ln k / k`
    pub normp_bound: S,
}

/// One convergence run and the constants its bounds depend on.
#[derive(Clone, Debug)]
pub struct Curves<S> {
    pub m: usize,
    pub rank: usize,
    pub lambda: usize,
    pub p: u32,
    /// `|x*|_{p-1}^{p-1}`
    pub xstar_pm1: f64,
    pub records: Vec<ConvergenceRecord<S>>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Pack(#[from] PackError),
}

fn lift<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("finite")
}

fn pow_sum(v: &[f64], p: u32) -> f64 {
    v.iter().map(|x| x.abs().powi(p as i32)).sum()
}

/// Records for k = 1..=k_max of the greedy packing of `g`, against `x_star`.
pub fn convergence_curves_with<S: Scalar>(
    g: &Graph,
    kind: MatroidKind,
    k_max: u32,
    p: u32,
    x_star: &LoadsVector<Rational>,
    lambda: usize,
) -> Result<Curves<S>, CurveError> {
    let mut pk = Packer::new(g, kind, PackOptions::default())?;
    let ids = g.edge_ids();
    assert_eq!(ids, x_star.ids, "x* must cover exactly the graph's edges");
    let m = ids.len();
    let xs: Vec<S> = x_star.values.iter().map(S::from_rational).collect();
    let xs_f: Vec<f64> = xs.iter().map(Scalar::approx).collect();
    let xs2 = pow_sum(&xs_f, 2);
    let xsp = pow_sum(&xs_f, p);
    let mf = m as f64;
    let mut records = Vec::with_capacity(k_max as usize);
    let mut x = vec![0f64; m];
    for _ in 0..k_max {
        pk.step()?;
        let st = pk.state();
        let k = st.k;
        let kf = f64::from(k);
        let ks = S::from_u32(k).expect("k");
        let mut err_inf = S::zero();
        for (i, &e) in ids.iter().enumerate() {
            let xe = S::from_u32(st.count(e)).expect("count") / ks.clone();
            x[i] = xe.approx();
            let dlt = (xe - xs[i].clone()).abs();
            if dlt > err_inf {
                err_inf = dlt;
            }
        }
        let x2 = pow_sum(&x, 2);
        let xp = pow_sum(&x, p);
        let dist2: f64 = x.iter().zip(&xs_f).map(|(a, b)| (a - b) * (a - b)).sum();
        let pf = f64::from(p);
        records.push(ConvergenceRecord {
            k,
            err_inf,
            err_2: lift(x2.sqrt() - xs2.sqrt()),
            err_p: lift(xp.powf(1.0 / pf) - xsp.powf(1.0 / pf)),
            dist_2: lift(dist2.sqrt()),
            gap2_sq: lift(x2 - xs2),
            gapp: lift(xp - xsp),
            thorup_bound: lift((6.0 * mf.ln() / (kf * lambda as f64)).sqrt()),
            norm2_bound: lift(mf.sqrt() * (kf + 1.0).ln() / kf),
            normp_bound: lift(pf / 2.0 * mf.powf(1.0 / pf) * kf.ln() / kf),
        });
    }
    Ok(Curves {
        m,
        rank: g.rank(kind),
        lambda,
        p,
        xstar_pm1: pow_sum(&xs_f, p - 1),
        records,
    })
}

/// Curves for a desk-scale graph: x* by contraction, lambda by enumeration.
pub fn convergence_curves<S: Scalar>(g: &Graph, kind: MatroidKind, k_max: u32, p: u32) -> Result<Curves<S>, CurveError> {
    let xs = x_star_contraction(g, kind)?;
    let (lambda, _) = mincuts_enumerate(g)?;
    convergence_curves_with(g, kind, k_max, p, &xs.loads, lambda)
}

/// A bound that failed at some k.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub k: u32,
    pub bound: &'static str,
    pub value: f64,
    pub limit: f64,
}

/// Slack absorbing the `(1 + o(1))` factor of the p-norm bounds.
pub const PNORM_SLACK: f64 = 2.0;
/// The p-norm bounds are only checked from here on.
pub const PNORM_FROM_K: u32 = 100;

const TOL: f64 = 1e-9;

impl<S: Scalar> Curves<S> {
    /// Checks the Thorup bound, the 2-norm bounds and (for large k) the
    /// p-norm bounds at every record.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let r = self.rank as f64;
        let p = f64::from(self.p);
        for rec in &self.records {
            let kf = f64::from(rec.k);
            let two_r = 2.0 * r * (kf + 1.0).ln() / kf;
            let mut checks = vec![
                ("thorup", rec.err_inf.approx(), rec.thorup_bound.approx()),
                ("norm2_sq", rec.gap2_sq.approx(), two_r),
                ("norm2", rec.err_2.approx(), rec.norm2_bound.approx()),
                ("dist2", rec.dist_2.approx(), two_r.sqrt()),
            ];
            if rec.k >= PNORM_FROM_K {
                let pp = PNORM_SLACK * p * p / 2.0 * self.xstar_pm1 * kf.ln() / kf;
                checks.push(("normp_pow", rec.gapp.approx(), pp));
                checks.push(("normp", rec.err_p.approx(), PNORM_SLACK * rec.normp_bound.approx()));
            }
            for (bound, value, limit) in checks {
                if value > limit * (1.0 + TOL) + TOL {
                    out.push(Violation { k: rec.k, bound, value, limit });
                }
            }
        }
        out
    }

    pub fn thorup_violations(&self) -> usize {
        self.violations().iter().filter(|v| v.bound == "thorup").count()
    }

    pub fn at(&self, k: u32) -> Option<&ConvergenceRecord<S>> {
        self.records.get(k.checked_sub(1)? as usize)
    }

    /// CSV "k,err_inf,err_2,err_p,thorup,bound2,boundp".
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,err_inf,err_2,err_p,thorup,bound2,boundp\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.k,
                fmt_decimal(r.err_inf.approx()),
                fmt_decimal(r.err_2.approx()),
                fmt_decimal(r.err_p.approx()),
                fmt_decimal(r.thorup_bound.approx()),
                fmt_decimal(r.norm2_bound.approx()),
                fmt_decimal(r.normp_bound.approx())
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::ladder::{ladder_graph, LadderSpec};

    fn tri_pendant() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn triangle_pendant_bounds_hold() {
        let c: Curves<f64> = convergence_curves(&tri_pendant(), MatroidKind::Graphic, 500, P_NORM).unwrap();
        assert_eq!(c.records.len(), 500);
        assert_eq!(c.lambda, 1);
        assert!(c.violations().is_empty());
        // x* = (2/3, 2/3, 2/3, 1); at k = 3 the loads are exact
        assert!(c.at(3).unwrap().err_inf < 1e-12);
    }

    #[test]
    fn exact_and_float_agree() {
        let g = tri_pendant();
        let a: Curves<Rational> = convergence_curves(&g, MatroidKind::Graphic, 20, P_NORM).unwrap();
        let b: Curves<f32> = convergence_curves(&g, MatroidKind::Graphic, 20, P_NORM).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.err_inf.approx() - y.err_inf.approx()).abs() < 1e-6);
        }
        assert_eq!(a.at(2).unwrap().err_inf, Rational::new(1.into(), 3.into()));
    }

    #[test]
    fn ladder_records_nonnegative() {
        let l = ladder_graph(&LadderSpec::new(10, 1));
        let c: Curves<f64> =
            convergence_curves_with(&l.graph, MatroidKind::Graphic, 200, P_NORM, &l.x_star(), l.spec.lambda()).unwrap();
        for r in &c.records {
            assert!(r.err_inf >= 0.0 && r.err_2 >= -1e-12 && r.err_p >= -1e-12 && r.gap2_sq >= -1e-12);
        }
        assert!(c.violations().is_empty());
        let csv = c.to_csv();
        assert!(csv.starts_with("k,err_inf,err_2,err_p,thorup,bound2,boundp\n1,"));
    }
}
