//! Multigraph with stable edge ids, update events and the text formats.

use std::fmt::Write as _;

use thiserror::Error;

/// Edge identifier. Dense, assigned by a monotone counter, never reused.
pub type EdgeId = u32;

/// Which matroid a packing runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatroidKind {
    /// Forests; a loop is dependent.
    Graphic,
    /// Pseudoforests; a loop is an independent one-edge cycle.
    Bicircular,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown edge id {0}")]
    UnknownEdgeId(EdgeId),
    #[error("vertex {v} out of range (n = {n})")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("edge id {0} already used")]
    DuplicateEdgeId(EdgeId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header declares {declared} edges, found {found}")]
    InconsistentHeader { declared: usize, found: usize },
}

/// One line of an update stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpdateEvent {
    Insert { u: usize, v: usize, id: Option<EdgeId> },
    Delete(EdgeId),
    QueryDensity,
    QueryOrientation(EdgeId),
}

/// What [`Graph::apply_update`] did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applied {
    Inserted(EdgeId),
    Deleted(EdgeId),
    Query,
}

/// Undirected multigraph on a fixed vertex set `0..n`.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    n: usize,
    ends: Vec<Option<(u32, u32)>>,
    adj: Vec<Vec<EdgeId>>,
    m: usize,
    next_id: EdgeId,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, ends: Vec::new(), adj: vec![Vec::new(); n], m: 0, next_id: 0 }
    }

    /// Builds a graph whose edge ids are `0..pairs.len()` in order.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(u, v) in pairs {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// One past the largest id ever handed out.
    pub fn id_bound(&self) -> EdgeId {
        self.next_id
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { v, n: self.n })
        }
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<EdgeId, GraphError> {
        let id = self.next_id;
        self.insert_with_id(id, u, v)?;
        Ok(id)
    }

    /// Inserts with an explicit id, which must never have been used.
    pub fn insert_with_id(&mut self, id: EdgeId, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if id < self.next_id {
            return Err(GraphError::DuplicateEdgeId(id));
        }
        let idx = id as usize;
        if self.ends.len() <= idx {
            self.ends.resize(idx + 1, None);
        }
        self.ends[idx] = Some((u as u32, v as u32));
        self.adj[u].push(id);
        if u != v {
            self.adj[v].push(id);
        }
        self.m += 1;
        self.next_id = id + 1;
        Ok(())
    }

    pub fn remove(&mut self, id: EdgeId) -> Result<(usize, usize), GraphError> {
        let (u, v) = self.endpoints(id).ok_or(GraphError::UnknownEdgeId(id))?;
        self.ends[id as usize] = None;
        for w in [u, v] {
            if let Some(p) = self.adj[w].iter().position(|&e| e == id) {
                self.adj[w].swap_remove(p);
            }
        }
        self.m -= 1;
        Ok((u, v))
    }

    pub fn endpoints(&self, id: EdgeId) -> Option<(usize, usize)> {
        self.ends.get(id as usize).copied().flatten().map(|(u, v)| (u as usize, v as usize))
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.endpoints(id).is_some()
    }

    /// Edges as `(id, u, v)` in increasing id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, usize, usize)> + '_ {
        self.ends
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|(u, v)| (i as EdgeId, u as usize, v as usize)))
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges().map(|(e, _, _)| e).collect()
    }

    pub fn incident(&self, v: usize) -> &[EdgeId] {
        &self.adj[v]
    }

    pub fn has_loops(&self) -> bool {
        self.edges().any(|(_, u, v)| u == v)
    }

    /// Component label per vertex and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.n);
        for (_, u, v) in self.edges() {
            uf.union(u, v);
        }
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        for v in 0..self.n {
            let r = uf.find(v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            label[v] = label[r];
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }

    /// Rank of the whole edge set in the given matroid.
    pub fn rank(&self, kind: MatroidKind) -> usize {
        let mut ind = Independence::new(self.n, kind);
        self.edges().filter(|&(_, u, v)| ind.try_add(u, v)).count()
    }

    pub fn apply_update(&mut self, ev: &UpdateEvent) -> Result<Applied, GraphError> {
        match *ev {
            UpdateEvent::Insert { u, v, id: Some(id) } => {
                self.insert_with_id(id, u, v)?;
                Ok(Applied::Inserted(id))
            }
            UpdateEvent::Insert { u, v, id: None } => self.insert(u, v).map(Applied::Inserted),
            UpdateEvent::Delete(id) => {
                self.remove(id)?;
                Ok(Applied::Deleted(id))
            }
            UpdateEvent::QueryDensity => Ok(Applied::Query),
            UpdateEvent::QueryOrientation(id) => {
                if self.contains(id) {
                    Ok(Applied::Query)
                } else {
                    Err(GraphError::UnknownEdgeId(id))
                }
            }
        }
    }

    /// Serialises in the graph file format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m);
        for (e, u, v) in self.edges() {
            let _ = writeln!(s, "{e} {u} {v}");
        }
        s
    }
}

fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, GraphError> {
    tok.parse().map_err(|_| GraphError::Parse { line, msg: format!("bad number {tok:?}") })
}

/// Parses `"n m"` followed by `m` lines `"id u v"`.
pub fn parse_graph_file(text: &str) -> Result<Graph, GraphError> {
    let mut lines = meaningful_lines(text);
    let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 2 {
        return Err(GraphError::Parse { line: hline, msg: "header must be \"n m\"".into() });
    }
    let n: usize = parse_num(h[0], hline)?;
    let declared: usize = parse_num(h[1], hline)?;
    let mut rows = Vec::new();
    for (line, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(GraphError::Parse { line, msg: "expected \"id u v\"".into() });
        }
        let id: EdgeId = parse_num(t[0], line)?;
        let u: usize = parse_num(t[1], line)?;
        let v: usize = parse_num(t[2], line)?;
        rows.push((line, id, u, v));
    }
    if rows.len() != declared {
        return Err(GraphError::InconsistentHeader { declared, found: rows.len() });
    }
    rows.sort_by_key(|r| r.1);
    let mut g = Graph::new(n);
    for (line, id, u, v) in rows {
        g.insert_with_id(id, u, v).map_err(|e| match e {
            GraphError::DuplicateEdgeId(id) => GraphError::Parse { line, msg: format!("duplicate edge id {id}") },
            other => other,
        })?;
    }
    Ok(g)
}

/// Parses an update stream. Inserts without an id get one when applied.
pub fn parse_update_stream(text: &str) -> Result<Vec<UpdateEvent>, GraphError> {
    let mut out = Vec::new();
    for (line, l) in meaningful_lines(text) {
        let t: Vec<&str> = l.split_whitespace().collect();
        let ev = match t.as_slice() {
            ["+", u, v] => UpdateEvent::Insert { u: parse_num(u, line)?, v: parse_num(v, line)?, id: None },
            ["+", id, u, v] => UpdateEvent::Insert {
                u: parse_num(u, line)?,
                v: parse_num(v, line)?,
                id: Some(parse_num(id, line)?),
            },
            ["-", id] => UpdateEvent::Delete(parse_num(id, line)?),
            ["?", "density"] => UpdateEvent::QueryDensity,
            ["?", "orient", id] => UpdateEvent::QueryOrientation(parse_num(id, line)?),
            _ => return Err(GraphError::Parse { line, msg: format!("unrecognised event {l:?}") }),
        };
        out.push(ev);
    }
    Ok(out)
}

/// Plain union-find over `0..n`.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Incremental independence test for graphic and bicircular matroids.
#[derive(Clone, Debug)]
pub struct Independence {
    kind: MatroidKind,
    uf: UnionFind,
    cyclic: Vec<bool>,
}

impl Independence {
    pub fn new(n: usize, kind: MatroidKind) -> Self {
        Independence { kind, uf: UnionFind::new(n), cyclic: vec![false; n] }
    }

    /// Adds the edge if the set stays independent.
    pub fn try_add(&mut self, u: usize, v: usize) -> bool {
        let (a, b) = (self.uf.find(u), self.uf.find(v));
        match self.kind {
            MatroidKind::Graphic => a != b && self.uf.union(a, b),
            MatroidKind::Bicircular => {
                if a == b {
                    if self.cyclic[a] {
                        return false;
                    }
                    self.cyclic[a] = true;
                    true
                } else {
                    if self.cyclic[a] && self.cyclic[b] {
                        return false;
                    }
                    let c = self.cyclic[a] || self.cyclic[b];
                    self.uf.union(a, b);
                    let r = self.uf.find(a);
                    self.cyclic[r] = c;
                    true
                }
            }
        }
    }

    pub fn is_cyclic(&mut self, v: usize) -> bool {
        let r = self.uf.find(v);
        self.cyclic[r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_insert_gets_id_zero() {
        let mut g = Graph::new(3);
        assert_eq!(g.apply_update(&UpdateEvent::Insert { u: 0, v: 1, id: None }), Ok(Applied::Inserted(0)));
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn delete_restores_empty() {
        let mut g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        g.apply_update(&UpdateEvent::Delete(0)).unwrap();
        assert_eq!(g.m(), 0);
        assert_eq!(g.remove(0), Err(GraphError::UnknownEdgeId(0)));
    }

    #[test]
    fn parallel_edges_are_distinct() {
        let mut g = Graph::new(2);
        let a = g.insert(0, 1).unwrap();
        let b = g.insert(0, 1).unwrap();
        assert_ne!(a, b);
        assert_eq!(g.m(), 2);
        assert_eq!(g.incident(0).len(), 2);
    }

    #[test]
    fn ids_are_not_reused() {
        let mut g = Graph::new(2);
        let a = g.insert(0, 1).unwrap();
        g.remove(a).unwrap();
        assert_ne!(g.insert(0, 1).unwrap(), a);
        assert_eq!(g.insert_with_id(a, 0, 1), Err(GraphError::DuplicateEdgeId(a)));
    }

    #[test]
    fn out_of_range_vertex() {
        let mut g = Graph::new(2);
        assert_eq!(g.insert(0, 2), Err(GraphError::VertexOutOfRange { v: 2, n: 2 }));
    }

    #[test]
    fn parse_path() {
        let g = parse_graph_file("3 2\n0 0 1\n1 1 2\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0, 1), (1, 1, 2)]);
    }

    #[test]
    fn parse_loop() {
        let g = parse_graph_file("2 1\n0 0 0\n").unwrap();
        assert!(g.has_loops());
    }

    #[test]
    fn parse_header_mismatch() {
        assert_eq!(
            parse_graph_file("2 2\n0 0 1\n").unwrap_err(),
            GraphError::InconsistentHeader { declared: 2, found: 1 }
        );
    }

    #[test]
    fn parse_bad_line_number() {
        let err = parse_graph_file("2 1\n# c\n0 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
    }

    #[test]
    fn stream_basic() {
        assert_eq!(
            parse_update_stream("+ 0 1\n- 0\n").unwrap(),
            vec![UpdateEvent::Insert { u: 0, v: 1, id: None }, UpdateEvent::Delete(0)]
        );
        assert_eq!(
            parse_update_stream("+ 5 0 1\n? density\n").unwrap(),
            vec![UpdateEvent::Insert { u: 0, v: 1, id: Some(5) }, UpdateEvent::QueryDensity]
        );
        assert_eq!(
            parse_update_stream("# hi\n? orient 3\n").unwrap(),
            vec![UpdateEvent::QueryOrientation(3)]
        );
    }

    #[test]
    fn stream_rejects_garbage() {
        assert!(matches!(parse_update_stream("x 0 1").unwrap_err(), GraphError::Parse { line: 1, .. }));
    }

    #[test]
    fn text_roundtrip() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 1), (2, 3), (0, 1)]).unwrap();
        let h = parse_graph_file(&g.to_text()).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
    }

    #[test]
    fn independence_rules() {
        let mut gr = Independence::new(3, MatroidKind::Graphic);
        assert!(!gr.try_add(0, 0));
        assert!(gr.try_add(0, 1));
        assert!(gr.try_add(1, 2));
        assert!(!gr.try_add(0, 2));
        let mut bi = Independence::new(3, MatroidKind::Bicircular);
        assert!(bi.try_add(0, 0));
        assert!(bi.try_add(0, 1));
        assert!(!bi.try_add(0, 1));
        assert!(bi.try_add(1, 2));
        assert!(!bi.try_add(2, 2));
    }

    #[test]
    fn ranks() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(tri.rank(MatroidKind::Graphic), 2);
        assert_eq!(tri.rank(MatroidKind::Bicircular), 3);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.rank(MatroidKind::Bicircular), 2);
    }
}
