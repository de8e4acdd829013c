//! Tile strings: a symbolic reading of ladder load profiles, and the
//! transition tables between consecutive packings.
//!
//! Tile shapes and the frozen edge order live in `fixtures/ladder_tiles.txt`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use super::ladder::{Ladder, Side, Slot};
use crate::packing::PackingState;

const FIXTURE: &str = include_str!("../../fixtures/ladder_tiles.txt");

/// Tile code such as `b1`, `m6` or `z2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub group: char,
    pub index: u8,
}

impl Tile {
    pub const fn new(group: char, index: u8) -> Tile {
        Tile { group, index }
    }

    pub fn is_ending(self) -> bool {
        matches!(self.group, 'z' | 'o' | 't')
    }

    /// m5..m8.
    pub fn is_heavy_middle(self) -> bool {
        self.group == 'm' && self.index >= 5
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.group, self.index)
    }
}

impl FromStr for Tile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut it = s.chars();
        let g = it.next().ok_or("empty tile code")?;
        if !"bmzot".contains(g) {
            return Err(format!("bad tile group in {s:?}"));
        }
        let i: u8 = it.as_str().parse().map_err(|_| format!("bad tile index in {s:?}"))?;
        Ok(Tile::new(g, i))
    }
}

#[derive(Clone, Debug)]
struct Shape {
    fixed: BTreeSet<Slot>,
    runs: Vec<Slot>,
}

#[derive(Debug)]
struct Catalogue {
    ordering: [Side; 3],
    shapes: Vec<(Tile, Shape)>,
    residual: [Vec<Side>; 3],
}

fn parse_slot(tok: &str) -> Result<Slot, String> {
    let mut ch = tok.chars();
    let s = ch.next().and_then(Side::from_char).ok_or_else(|| format!("bad slot {tok:?}"))?;
    let c: i64 = ch.as_str().parse().map_err(|_| format!("bad slot {tok:?}"))?;
    Ok((s, c))
}

fn parse_catalogue(text: &str) -> Result<Catalogue, String> {
    let mut ordering = None;
    let mut shapes = Vec::new();
    let mut residual: [Vec<Side>; 3] = Default::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or_default();
        match head {
            "ordering" => {
                let v: Vec<Side> = toks.filter_map(|t| t.chars().next().and_then(Side::from_char)).collect();
                ordering = Some(<[Side; 3]>::try_from(v).map_err(|_| "ordering needs three sides")?);
            }
            "residual" => {
                let r: usize = toks.next().and_then(|t| t.parse().ok()).ok_or("bad residual line")?;
                residual[r % 3] = toks.filter_map(|t| t.chars().next().and_then(Side::from_char)).collect();
            }
            _ => {
                let tile: Tile = head.parse()?;
                let rest: Vec<&str> = toks.collect();
                let (a, b) = match rest.iter().position(|&t| t == "|") {
                    Some(p) => (&rest[..p], &rest[p + 1..]),
                    None => (&rest[..], &[][..]),
                };
                let fixed = a.iter().map(|t| parse_slot(t)).collect::<Result<_, _>>()?;
                let runs = b.iter().map(|t| parse_slot(t)).collect::<Result<_, _>>()?;
                shapes.push((tile, Shape { fixed, runs }));
            }
        }
    }
    Ok(Catalogue { ordering: ordering.ok_or("missing ordering")?, shapes, residual })
}

fn catalogue() -> &'static Catalogue {
    static C: OnceLock<Catalogue> = OnceLock::new();
    C.get_or_init(|| parse_catalogue(FIXTURE).expect("tile fixture parses"))
}

/// Within-column edge order frozen in the fixture.
pub fn frozen_ordering() -> [Side; 3] {
    catalogue().ordering
}

fn last_col(s: Side, d: usize) -> i64 {
    if s == Side::R {
        d as i64 - 1
    } else {
        d as i64 - 2
    }
}

fn min_col(set: &BTreeSet<Slot>) -> i64 {
    set.iter().map(|x| x.1).min().unwrap_or(0)
}

fn shifted(sh: &Shape, by: i64, d: usize) -> BTreeSet<Slot> {
    let mut out: BTreeSet<Slot> = sh.fixed.iter().map(|&(s, c)| (s, c + by)).collect();
    for &(s, c0) in &sh.runs {
        for c in c0 + by..=last_col(s, d) {
            out.insert((s, c));
        }
    }
    out
}

/// Finds the tile of `group` whose shape, aligned on the minimum column,
/// equals `set`. Returns the tile and its origin column.
fn match_group(set: &BTreeSet<Slot>, groups: &str, d: usize, origin: Option<i64>) -> Option<(Tile, i64)> {
    let mc = min_col(set);
    catalogue().shapes.iter().filter(|(t, _)| groups.contains(t.group)).find_map(|(t, sh)| {
        let by = origin.unwrap_or(mc - min_col(&sh.fixed));
        (shifted(sh, by, d) == *set).then_some((*t, by))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placed {
    pub tile: Tile,
    pub load: u32,
    /// Column of the tile's origin.
    pub col: i64,
}

/// Load profile of a ladder packing as tiles, heaviest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileString {
    pub k: u32,
    pub tiles: Vec<Placed>,
    /// Edges in the trailing level one below the ending tile.
    pub residual: usize,
}

impl TileString {
    pub fn codes(&self) -> Vec<Tile> {
        self.tiles.iter().map(|p| p.tile).collect()
    }

    pub fn beginning(&self) -> Placed {
        self.tiles[0]
    }

    pub fn ending(&self) -> Placed {
        *self.tiles.last().expect("non-empty")
    }

    fn at_load(&self, l: u32) -> Option<Tile> {
        self.tiles.iter().find(|p| p.load == l).map(|p| p.tile)
    }

    /// `k,tiles,residual` row, tiles space separated.
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.k, self, self.residual)
    }
}

impl fmt::Display for TileString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.tiles.iter().map(|p| p.tile.to_string()).collect();
        write!(f, "{}", s.join(" "))
    }
}

pub fn tile_trace_csv(rows: &[TileString]) -> String {
    let mut s = String::from("k,tiles,residual\n");
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TileError {
    #[error("k = {k} outside [54, d^2/4] or d = {d} < 8")]
    OutOfRange { d: usize, k: u32 },
    #[error("no valid tiling at k = {k}: {why}")]
    NoValidTiling { k: u32, why: String },
}

/// Segments the load profile of `st` (a packing of `ladder`) into tiles.
/// For `w > 1` the summed copy counts are scaled back to one copy.
pub fn decode_tiles(st: &PackingState, ladder: &Ladder) -> Result<TileString, TileError> {
    let d = ladder.spec.d;
    let k = st.k / ladder.spec.w as u32;
    if d < 8 || k < 54 || (k as usize) > d * d / 4 {
        return Err(TileError::OutOfRange { d, k });
    }
    let w = ladder.spec.w as u32;
    let counts = ladder.base_counts(st);
    if !st.k.is_multiple_of(w) || counts.iter().any(|c| !c.is_multiple_of(w)) {
        return Err(TileError::NoValidTiling { k, why: "copies are not packed evenly".into() });
    }
    decode_counts(&counts.iter().map(|c| c / w).collect::<Vec<_>>(), ladder, k)
}

/// Like [`decode_tiles`] on per-base-edge counts, without the range check.
pub fn decode_counts(counts: &[u32], ladder: &Ladder, k: u32) -> Result<TileString, TileError> {
    let d = ladder.spec.d;
    let fail = |why: String| TileError::NoValidTiling { k, why };
    let mut levels: BTreeMap<u32, BTreeSet<Slot>> = BTreeMap::new();
    for (i, &c) in counts.iter().enumerate() {
        levels.entry(c).or_default().insert(ladder.slots[i]);
    }
    let lv: Vec<(u32, BTreeSet<Slot>)> = levels.into_iter().rev().collect();
    let (l0, s0) = &lv[0];
    let (b, _) = match_group(s0, "b", d, Some(0)).ok_or_else(|| fail(format!("no beginning tile at load {l0}")))?;
    let mut tiles = vec![Placed { tile: b, load: *l0, col: 0 }];
    let end_group = ['z', 'o', 't'][(k % 3) as usize];
    let mut i = 1;
    loop {
        let (l, set) = lv.get(i).ok_or_else(|| fail("no ending tile".into()))?;
        if *l + 1 != tiles.last().expect("non-empty").load {
            return Err(fail(format!("load gap below {}", l + 1)));
        }
        if i + 1 < lv.len() {
            if let Some((t, col)) = match_group(set, "m", d, None) {
                tiles.push(Placed { tile: t, load: *l, col });
                i += 1;
                continue;
            }
        }
        let groups = end_group.to_string();
        let (t, col) = match_group(set, &groups, d, None)
            .ok_or_else(|| fail(format!("level {l} is neither a middle nor a {end_group}-tile")))?;
        tiles.push(Placed { tile: t, load: *l, col });
        break;
    }
    let rest = &lv[i + 1..];
    let residual = match rest {
        [] => 0,
        [(l, set)] if *l + 1 == tiles.last().expect("non-empty").load => {
            check_residual(set, &catalogue().residual[(k % 3) as usize], d).map_err(fail)?;
            set.len()
        }
        _ => return Err(fail("extra levels after the ending tile".into())),
    };
    if k.is_multiple_of(3) != (residual == 0) {
        return Err(fail("residual presence does not match k mod 3".into()));
    }
    Ok(TileString { k, tiles, residual })
}

fn check_residual(set: &BTreeSet<Slot>, sides: &[Side], d: usize) -> Result<(), String> {
    for &s in &[Side::R, Side::T, Side::B] {
        let cols: Vec<i64> = set.iter().filter(|x| x.0 == s).map(|x| x.1).collect();
        if cols.is_empty() {
            continue;
        }
        if !sides.contains(&s) {
            return Err(format!("residual holds {s} edges"));
        }
        let end = last_col(s, d);
        if *cols.last().expect("non-empty") != end || cols.len() as i64 != end - cols[0] + 1 {
            return Err(format!("residual {s} edges do not run to the right end"));
        }
    }
    Ok(())
}

const MIDDLE: [&str; 8] = ["m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8"];
const ENDINGS: [&str; 16] =
    ["z1", "z2", "z3", "z4", "o1", "o2", "o3", "o4", "o5", "t1", "t2", "t3", "t4", "t5", "t6", "t7"];

/// Beginning tile rules: row is the old beginning, column the tile just below it.
const TABLE1: [(&str, &str); 5] = [
    ("b1", "x x b4 x x b5 x x"),
    ("b2", "x b1 x b1 b1 x b1 x"),
    ("b3", "b2 x x x x x x b2"),
    ("b4", "x x b2 x x b2 x x"),
    ("b5", "x b3 x b3 b3 x b3 x"),
];

/// Middle tile rules: row is the left neighbour at load i+1, column the tile at load i.
const TABLE2: [(&str, &str); 8] = [
    ("m1", "x m3 x m1 m8 x m1 x"),
    ("m2", "x x m2 x x m5 x x"),
    ("m3", "x m3 x m3 m6 x m3 x"),
    ("m4", "m4 x x x x x x m7"),
    ("b1", "x x b4 x x m1 x x"),
    ("b2", "x m3 x m3 m6 x m3 x"),
    ("b3", "m4 x x x x x x m7"),
    ("b4", "x x m2 x x m5 x x"),
];

/// Ending tile rules: row is the tile left of the ending, column the ending.
/// A pair `a,z` puts `a` one load up and `z` as the new ending. The (m4, t2)
/// and (m6, t2) cells read `m4,z1`: that is the only entry consistent with the
/// k = 96 state.
const TABLE3: [(&str, &str); 8] = [
    ("m1", "x o2 x x t2 x x t3 x x x x x m1,z2 m8,z1 x"),
    ("m2", "x x o4 x x x t6 x x m2,z3 x x m5,z2 x x x"),
    ("m3", "x o3 x x t1 x x t4 x x x x x m3,z2 m6,z1 x"),
    ("m4", "o1 x x x x t5 x x x x m4,z1 m7,z4 x x x x"),
    ("m5", "x o2 x x t2 x x t3 x x x x x m1,z2 m8,z1 x"),
    ("m6", "o1 x x x x t5 x x x x m4,z1 m7,z4 x x x x"),
    ("m7", "x x x o4 x x x x t6 x x x x x x m5,z2"),
    ("m8", "o5 x x x x t7 x x x x U U x x x x"),
];

type Table = HashMap<(Tile, Tile), String>;

fn table(rows: &[(&str, &str)], cols: &[&str]) -> Table {
    let mut t = HashMap::new();
    for (r, line) in rows {
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cells.len(), cols.len());
        for (c, cell) in cols.iter().zip(cells) {
            t.insert((r.parse().expect("tile"), c.parse().expect("tile")), cell.to_string());
        }
    }
    t
}

fn tables() -> &'static (Table, Table, Table) {
    static T: OnceLock<(Table, Table, Table)> = OnceLock::new();
    T.get_or_init(|| (table(&TABLE1, &MIDDLE), table(&TABLE2, &MIDDLE), table(&TABLE3, &ENDINGS)))
}

fn tile(s: &str) -> Tile {
    s.parse().expect("tile code")
}

/// Every rule violated going from `prev` (at k) to `next` (at k + 1).
pub fn tile_step_errors(prev: &TileString, next: &TileString) -> Vec<String> {
    let (t1, t2, t3) = tables();
    let mut errs = Vec::new();
    let pt = &prev.tiles;
    let cell = |t: &Table, r: Tile, c: Tile| t.get(&(r, c)).cloned();

    // beginning
    let b = pt[0];
    if let Some(below) = prev.at_load(b.load - 1).filter(|t| t.group == 'm') {
        match cell(t1, b.tile, below).as_deref() {
            Some("x") | None => errs.push(format!("table 1: ({}, {below}) is x", b.tile)),
            Some(want) => {
                if next.tiles[0].tile != tile(want) {
                    errs.push(format!("table 1: ({}, {below}) gives {want}, saw {}", b.tile, next.tiles[0].tile));
                }
            }
        }
    }

    // middles
    for w in 1..pt.len().saturating_sub(1) {
        let cur = pt[w];
        let mut left = pt[w - 1].tile;
        if left == Tile::new('b', 5) {
            left = Tile::new('m', 1);
        }
        if left.is_heavy_middle() {
            continue;
        }
        let got = next.at_load(cur.load + 1);
        match cell(t2, left, cur.tile).as_deref() {
            Some("x") | None => errs.push(format!("table 2: ({left}, {}) is x", cur.tile)),
            Some(want) => {
                let want = tile(want);
                let ok = got == Some(want) || (want == Tile::new('m', 1) && got == Some(Tile::new('b', 5)));
                if !ok {
                    errs.push(format!("table 2: ({left}, {}) gives {want}, saw {got:?}", cur.tile));
                }
            }
        }
    }

    // ending
    if pt.len() >= 2 {
        let x = pt[pt.len() - 2].tile;
        let z = pt[pt.len() - 1];
        let new_end = next.ending();
        match cell(t3, x, z.tile).as_deref() {
            None => errs.push(format!("table 3: no row for ({x}, {})", z.tile)),
            Some("x") => errs.push(format!("table 3: ({x}, {}) is x", z.tile)),
            Some("U") => errs.push(format!("table 3: ({x}, {}) is unreachable", z.tile)),
            Some(c) => match c.split_once(',') {
                Some((a, e)) => {
                    if next.at_load(z.load + 1) != Some(tile(a)) || new_end.tile != tile(e) || new_end.load != z.load {
                        errs.push(format!("table 3: ({x}, {}) gives ({a}, {e}), saw {next}", z.tile));
                    }
                }
                None => {
                    if new_end.tile != tile(c) || new_end.load != z.load + 1 {
                        errs.push(format!("table 3: ({x}, {}) gives {c}, saw {}", z.tile, new_end.tile));
                    }
                }
            },
        }
    }

    for w in next.tiles.windows(2) {
        if w[0].tile.is_heavy_middle() && w[1].tile.is_heavy_middle() {
            errs.push(format!("{} next to {}", w[0].tile, w[1].tile));
        }
    }
    errs
}

pub fn verify_tile_step(prev: &TileString, next: &TileString) -> bool {
    tile_step_errors(prev, next).is_empty()
}

/// Decodes every k in `ks` of the ladder with one incremental packing.
pub fn tile_trace(ladder: &Ladder, ks: std::ops::RangeInclusive<u32>) -> Vec<Result<TileString, TileError>> {
    let mut p = super::ladder::lex_mst_packer(&ladder.graph).expect("ladder has edges");
    let w = ladder.spec.w as u32;
    let mut out = Vec::new();
    for k in 1..=*ks.end() {
        for _ in 0..w {
            p.step().expect("graphic packing never empties");
        }
        if ks.contains(&k) {
            out.push(decode_tiles(p.state(), ladder));
        }
    }
    out
}
