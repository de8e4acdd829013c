//! `basepack` command line.
//!
//! Exit codes: 0 ok, 2 usage, 3 parse or I/O, 4 invariant violation.

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use basepack::density::{brackets, EstimatorConfig, MultiScaleState, REPORT_HEADER};
use basepack::graph::{parse_graph_file, parse_update_stream};
use basepack::ideal::{densest_exact, min_base_weight, x_star_contraction};
use basepack::lab::convergence::{convergence_curves, convergence_curves_with, Curves, P_NORM};
use basepack::lab::corpus::random_multigraph;
use basepack::lab::ladder::{ladder_graph, LadderSpec};
use basepack::lab::tiles::{tile_step_errors, tile_trace, TileString};
use basepack::orientation::{threshold_layers, DynOrientation};
use basepack::packing::{pack_with, PackOptions, PruneConfig};
use basepack::scalar::{fmt_decimal, fmt_rational};
use basepack::{Graph, MatroidKind, Rational, UpdateEvent};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(name = "basepack", version, about = "Greedy base packings on dynamic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Io {
    /// Input file; stdin when absent.
    input: Option<String>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct Accuracy {
    #[arg(long, default_value = "1/4")]
    eps: String,
    #[arg(long = "rho-max", default_value = "8")]
    rho_max: String,
    /// Vertex count; defaults to one more than the largest vertex seen.
    #[arg(long)]
    n: Option<usize>,
    /// Edge cap used for sizing; defaults to the stream's peak edge count.
    #[arg(long = "m-hat")]
    m_hat: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum Kind {
    Graphic,
    Bicircular,
}

impl From<Kind> for MatroidKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Graphic => MatroidKind::Graphic,
            Kind::Bicircular => MatroidKind::Bicircular,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dynamic density estimates for an update stream.
    DensityStream {
        #[command(flatten)]
        acc: Accuracy,
        #[command(flatten)]
        io: Io,
        /// Check every answer against exact enumeration.
        #[arg(long)]
        check: bool,
    },
    /// Fractional orientation queries over an update stream.
    OrientStream {
        #[command(flatten)]
        acc: Accuracy,
        #[command(flatten)]
        io: Io,
    },
    /// Exact ideal loads of a graph file.
    IdealLoads {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value_t = Kind::Graphic)]
        kind: Kind,
    },
    /// Greedy packing of k bases.
    Pack {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Kind::Bicircular)]
        kind: Kind,
        /// Prune with interval [rho_lo, rho_hi] (bicircular only).
        #[arg(long = "prune", num_args = 2, value_names = ["RHO_LO", "RHO_HI"])]
        prune: Option<Vec<String>>,
    },
    /// Convergence records of the greedy MST packing.
    Converge {
        #[command(flatten)]
        io: Io,
        #[arg(long = "k-max", default_value_t = 1000)]
        k_max: u32,
        /// Use the ladder G_d^w instead of an input graph.
        #[arg(long)]
        ladder: Option<usize>,
        #[arg(long, default_value_t = 1)]
        w: usize,
        /// Random graph when neither input nor ladder is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "rand-n", default_value_t = 10)]
        rand_n: usize,
        #[arg(long = "rand-m", default_value_t = 25)]
        rand_m: usize,
    },
    /// Tile trace of the ladder packing, checked against the transition tables.
    LadderVerify {
        #[arg(long, default_value_t = 30)]
        d: usize,
        #[arg(long = "k-min", default_value_t = 54)]
        k_min: u32,
        #[arg(long = "k-max", default_value_t = 225)]
        k_max: u32,
        #[arg(short, long)]
        output: Option<String>,
    },
}

enum Fail {
    Usage(String),
    Parse(String),
    Invariant(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Usage(_) => 2,
            Fail::Parse(_) => 3,
            Fail::Invariant(_) => 4,
        }
    }

    fn msg(&self) -> &str {
        match self {
            Fail::Usage(m) | Fail::Parse(m) | Fail::Invariant(m) => m,
        }
    }
}

type Res<T> = Result<T, Fail>;

fn parse<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Parse(e.to_string())
}

fn invariant<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Invariant(e.to_string())
}

fn read_input(path: &Option<String>) -> Res<String> {
    let mut s = String::new();
    match path {
        Some(p) => s = fs::read_to_string(p).map_err(|e| Fail::Parse(format!("{p}: {e}")))?,
        None => {
            io::stdin().read_to_string(&mut s).map_err(parse)?;
        }
    }
    Ok(s)
}

fn write_output(path: &Option<String>, text: &str) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Fail::Parse(format!("{p}: {e}"))),
        None => io::stdout().write_all(text.as_bytes()).map_err(parse),
    }
}

fn rational(s: &str) -> Res<Rational> {
    let bad = || Fail::Usage(format!("not a number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p.into(), q.into()));
    }
    if let Ok(i) = s.parse::<i64>() {
        return Ok(Rational::from_integer(i.into()));
    }
    let f: f64 = s.parse().map_err(|_| bad())?;
    Rational::from_float(f).ok_or_else(bad)
}

/// Vertex count and peak live edge count of a stream.
fn stream_shape(events: &[UpdateEvent]) -> (usize, usize) {
    let (mut n, mut live, mut peak) = (0usize, 0usize, 0usize);
    for ev in events {
        match ev {
            UpdateEvent::Insert { u, v, .. } => {
                n = n.max(u + 1).max(v + 1);
                live += 1;
                peak = peak.max(live);
            }
            UpdateEvent::Delete(_) => live = live.saturating_sub(1),
            _ => {}
        }
    }
    (n.max(1), peak.max(2))
}

fn stream_setup(acc: &Accuracy, io: &Io) -> Res<(Vec<UpdateEvent>, usize, EstimatorConfig)> {
    let events = parse_update_stream(&read_input(&io.input)?).map_err(parse)?;
    let (n0, peak) = stream_shape(&events);
    let n = acc.n.unwrap_or(n0);
    if n < n0 {
        return Err(Fail::Usage(format!("--n {n} is below the largest vertex in the stream")));
    }
    let cfg = EstimatorConfig::new(rational(&acc.eps)?, rational(&acc.rho_max)?, acc.m_hat.unwrap_or(peak))
        .map_err(|e| Fail::Usage(e.to_string()))?;
    Ok((events, n, cfg))
}

fn density_stream(acc: &Accuracy, io: &Io, check: bool) -> Res<String> {
    let (events, n, cfg) = stream_setup(acc, io)?;
    let mut st = MultiScaleState::new(n, cfg).map_err(invariant)?;
    let mut out = format!("{REPORT_HEADER}\n");
    for (i, ev) in events.iter().enumerate() {
        match ev {
            UpdateEvent::QueryDensity => {
                let r = st.query().map_err(invariant)?;
                out.push_str(&r.csv_row(i));
                out.push('\n');
                if check && st.graph().m() > 0 {
                    let truth = densest_exact(st.graph(), MatroidKind::Bicircular).map_err(invariant)?.ratio;
                    if !r.above_rho_max && !brackets(&r, &truth) {
                        return Err(Fail::Invariant(format!(
                            "op {i}: density {} outside [{}, {}]",
                            fmt_rational(&truth),
                            fmt_rational(&r.low),
                            r.high.as_ref().map_or("inf".into(), fmt_rational)
                        )));
                    }
                }
            }
            UpdateEvent::QueryOrientation(_) => {
                return Err(Fail::Usage(format!("op {i}: orientation queries need orient-stream")));
            }
            _ => {
                st.update(ev).map_err(parse)?;
            }
        }
    }
    Ok(out)
}

fn orient_stream(acc: &Accuracy, io: &Io) -> Res<String> {
    let (events, n, cfg) = stream_setup(acc, io)?;
    let k = threshold_layers(
        cfg.c_k,
        cfg.rho_max.to_f64().unwrap_or(1.0),
        cfg.m_hat,
        cfg.eps.to_f64().unwrap_or(1.0),
    );
    let mut st = DynOrientation::new(n, k, cfg.m_hat);
    let mut out = String::from("id u v d_uv d_vu coverage\n");
    for (i, ev) in events.iter().enumerate() {
        match ev {
            UpdateEvent::QueryOrientation(e) => {
                let o = st.orient(*e).map_err(|e| Fail::Parse(format!("op {i}: {e}")))?;
                if o.d_uv.clone() + o.d_vu.clone() != Rational::from_integer(1.into()) {
                    return Err(Fail::Invariant(format!("op {i}: fractions of {e} do not sum to 1")));
                }
                out.push_str(&o.line());
                out.push('\n');
            }
            UpdateEvent::QueryDensity => {
                let a = st.audit().map_err(invariant)?;
                if a.max > a.bound {
                    return Err(Fail::Invariant(format!("op {i}: out-degree above k / min coverage")));
                }
                out.push_str(&format!(
                    "# op {i} max_outdeg {} at {} bound {} guarantee {}\n",
                    fmt_rational(&a.max),
                    a.argmax,
                    fmt_rational(&a.bound),
                    a.guarantee
                ));
            }
            _ => {
                st.update(ev).map_err(parse)?;
            }
        }
    }
    Ok(out)
}

fn ideal_loads(io: &Io, kind: Kind) -> Res<String> {
    let g = parse_graph_file(&read_input(&io.input)?).map_err(parse)?;
    let kind = MatroidKind::from(kind);
    let x = x_star_contraction(&g, kind).map_err(invariant)?;
    let w = min_base_weight(&g, kind, &x.loads);
    if w != x.norm2_sq() {
        return Err(Fail::Invariant("min-weight base under x* does not have weight |x*|^2".into()));
    }
    if x.levels.windows(2).any(|p| p[0].value >= p[1].value) {
        return Err(Fail::Invariant("level values are not increasing".into()));
    }
    Ok(x.loads.to_csv())
}

fn pack_cmd(io: &Io, k: u32, kind: Kind, prune: &Option<Vec<String>>) -> Res<String> {
    let g = parse_graph_file(&read_input(&io.input)?).map_err(parse)?;
    let prune = match prune {
        None => None,
        Some(v) => {
            if kind != Kind::Bicircular {
                return Err(Fail::Usage("--prune applies to bicircular packings".into()));
            }
            let mut p = PruneConfig::new(rational(&v[0])?, rational(&v[1])?);
            p.m_hat = Some(g.m());
            Some(p)
        }
    };
    let st = pack_with(&g, kind.into(), k, PackOptions { retain_bases: false, prune }).map_err(invariant)?;
    Ok(st.to_csv())
}

fn converge(io: &Io, k_max: u32, ladder: Option<usize>, w: usize, seed: u64, rn: usize, rm: usize) -> Res<String> {
    let curves: Curves<f64> = if let Some(d) = ladder {
        if d < 2 || w < 1 {
            return Err(Fail::Usage("ladder needs d >= 2 and w >= 1".into()));
        }
        let l = ladder_graph(&LadderSpec::new(d, w));
        convergence_curves_with(&l.graph, MatroidKind::Graphic, k_max, P_NORM, &l.x_star(), l.spec.lambda())
            .map_err(invariant)?
    } else {
        let g: Graph = if io.input.is_some() {
            parse_graph_file(&read_input(&io.input)?).map_err(parse)?
        } else {
            if rn < 2 || rm + 1 < rn {
                return Err(Fail::Usage("random graph needs n >= 2 and m >= n - 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(rm.max(rn - 1)..=rm);
            random_multigraph(&mut rng, rn, m)
        };
        convergence_curves(&g, MatroidKind::Graphic, k_max, P_NORM).map_err(invariant)?
    };
    let v = curves.violations();
    if let Some(first) = v.first() {
        return Err(Fail::Invariant(format!(
            "{} violations; first at k = {}: {} {} > {}",
            v.len(),
            first.k,
            first.bound,
            fmt_decimal(first.value),
            fmt_decimal(first.limit)
        )));
    }
    Ok(curves.to_csv())
}

fn ladder_verify(d: usize, k_min: u32, k_max: u32) -> Res<String> {
    if d < 8 || k_min < 54 || k_min > k_max || k_max as usize > d * d / 4 {
        return Err(Fail::Usage(format!("need d >= 8 and 54 <= k-min <= k-max <= d^2/4 = {}", d * d / 4)));
    }
    let l = ladder_graph(&LadderSpec::new(d, 1));
    let mut out = String::from("k,tiles,residual\n");
    let mut prev: Option<TileString> = None;
    for r in tile_trace(&l, k_min..=k_max) {
        let t = r.map_err(invariant)?;
        out.push_str(&t.csv_row());
        out.push('\n');
        if let Some(p) = &prev {
            let errs = tile_step_errors(p, &t);
            if !errs.is_empty() {
                return Err(Fail::Invariant(format!("k = {}: {}", t.k, errs.join("; "))));
            }
        }
        prev = Some(t);
    }
    Ok(out)
}

fn run(cli: Cli) -> Res<(Option<String>, String)> {
    Ok(match cli.command {
        Command::DensityStream { acc, io, check } => (io.output.clone(), density_stream(&acc, &io, check)?),
        Command::OrientStream { acc, io } => (io.output.clone(), orient_stream(&acc, &io)?),
        Command::IdealLoads { io, kind } => (io.output.clone(), ideal_loads(&io, kind)?),
        Command::Pack { io, k, kind, prune } => (io.output.clone(), pack_cmd(&io, k, kind, &prune)?),
        Command::Converge { io, k_max, ladder, w, seed, rand_n, rand_m } => {
            (io.output.clone(), converge(&io, k_max, ladder, w, seed, rand_n, rand_m)?)
        }
        Command::LadderVerify { d, k_min, k_max, output } => (output, ladder_verify(d, k_min, k_max)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli).and_then(|(path, text)| write_output(&path, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("basepack: {}", f.msg());
            ExitCode::from(f.code())
        }
    }
}
