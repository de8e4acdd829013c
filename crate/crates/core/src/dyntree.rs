//! Dynamic forest over a fixed vertex set with path-max, tree-min, size and
//! a payload slot per tree.
//!
//! Link-cut tree where every edge is its own node, so edge keys live on
//! nodes. Subtree aggregates (min edge, vertex count, min vertex) are kept
//! through virtual-child summaries. Amortized logarithmic, plus a scan of the
//! virtual list on removal.


use thiserror::Error;

const NIL: u32 = u32::MAX;

/// Opaque handle of a linked edge. Handles of cut edges may be reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeHandle(pub u32);

/// Identifier of a tree: its smallest vertex. Valid until a link or cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeId(pub u32);

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TreeError {
    #[error("endpoints already connected")]
    WouldCreateCycle,
    #[error("unknown edge handle")]
    UnknownEdge,
    #[error("nodes not connected")]
    NotConnected,
    #[error("path query on a single node")]
    SameNode,
}

type Agg<K> = Option<(K, u32)>;

fn agg_max<K: Ord + Copy>(a: Agg<K>, b: Agg<K>) -> Agg<K> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x >= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn agg_min<K: Ord + Copy>(a: Agg<K>, b: Agg<K>) -> Agg<K> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x <= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Clone, Debug)]
struct Node<K> {
    ch: [u32; 2],
    p: u32,
    rev: bool,
    key: Option<K>,
    ends: (u32, u32),
    path: Agg<K>,
    sub_min: Agg<K>,
    sub_size: u32,
    sub_vmin: u32,
    /// Virtual children form a list: head here, siblings via `vnext`/`vprev`.
    vhead: u32,
    vnext: u32,
    vprev: u32,
    vir_min: Agg<K>,
    vir_size: u32,
    vir_vmin: u32,
}

impl<K> Node<K> {
    fn blank() -> Self {
        Node {
            ch: [NIL, NIL],
            p: NIL,
            rev: false,
            key: None,
            ends: (NIL, NIL),
            path: None,
            sub_min: None,
            sub_size: 0,
            sub_vmin: NIL,
            vhead: NIL,
            vnext: NIL,
            vprev: NIL,
            vir_min: None,
            vir_size: 0,
            vir_vmin: NIL,
        }
    }
}

/// Forest on vertices `0..n`, edges keyed by `K` (ties broken by handle).
#[derive(Clone, Debug)]
pub struct DynForest<K, P> {
    n: u32,
    t: Vec<Node<K>>,
    free: Vec<u32>,
    /// Indexed by the tree's smallest vertex.
    payload: Vec<Option<P>>,
    payloads: usize,
    edges: usize,
    work: u64,
    stack: Vec<u32>,
}

impl<K: Ord + Copy, P: Clone> DynForest<K, P> {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(2 * n);
        for v in 0..n as u32 {
            let mut x = Node::blank();
            x.sub_size = 1;
            x.sub_vmin = v;
            t.push(x);
        }
        DynForest { n: n as u32, t, free: Vec::new(), payload: vec![None; n], payloads: 0, edges: 0, work: 0, stack: Vec::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.n as usize
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Rotation and access-step counter, for scaling checks.
    pub fn work(&self) -> u64 {
        self.work
    }

    fn is_root(&self, x: u32) -> bool {
        let p = self.t[x as usize].p;
        p == NIL || (self.t[p as usize].ch[0] != x && self.t[p as usize].ch[1] != x)
    }

    fn push(&mut self, x: u32) {
        if self.t[x as usize].rev {
            let node = &mut self.t[x as usize];
            node.rev = false;
            node.ch.swap(0, 1);
            let ch = node.ch;
            for c in ch {
                if c != NIL {
                    self.t[c as usize].rev ^= true;
                }
            }
        }
    }

    fn pull(&mut self, x: u32) {
        let xi = x as usize;
        let [l, r] = self.t[xi].ch;
        let own: Agg<K> = self.t[xi].key.map(|k| (k, x));
        let mut path = own;
        let mut min = agg_min(own, self.t[xi].vir_min);
        let mut size = self.t[xi].vir_size + u32::from(x < self.n);
        let mut vmin = self.t[xi].vir_vmin.min(if x < self.n { x } else { NIL });
        for c in [l, r] {
            if c != NIL {
                let cn = &self.t[c as usize];
                path = agg_max(path, cn.path);
                min = agg_min(min, cn.sub_min);
                size += cn.sub_size;
                vmin = vmin.min(cn.sub_vmin);
            }
        }
        let node = &mut self.t[xi];
        node.path = path;
        node.sub_min = min;
        node.sub_size = size;
        node.sub_vmin = vmin;
    }

    fn vir_add(&mut self, x: u32, c: u32) {
        let head = self.t[x as usize].vhead;
        let (min, size, vmin) = {
            let cn = &mut self.t[c as usize];
            cn.vnext = head;
            cn.vprev = NIL;
            (cn.sub_min, cn.sub_size, cn.sub_vmin)
        };
        if head != NIL {
            self.t[head as usize].vprev = c;
        }
        let node = &mut self.t[x as usize];
        node.vhead = c;
        node.vir_min = agg_min(node.vir_min, min);
        node.vir_size += size;
        node.vir_vmin = node.vir_vmin.min(vmin);
    }

    fn vir_remove(&mut self, x: u32, c: u32) {
        let (prev, next) = {
            let cn = &mut self.t[c as usize];
            let r = (cn.vprev, cn.vnext);
            cn.vprev = NIL;
            cn.vnext = NIL;
            r
        };
        if prev == NIL {
            debug_assert_eq!(self.t[x as usize].vhead, c);
            self.t[x as usize].vhead = next;
        } else {
            self.t[prev as usize].vnext = next;
        }
        if next != NIL {
            self.t[next as usize].vprev = prev;
        }
        let mut min = None;
        let mut size = 0;
        let mut vm = NIL;
        let mut y = self.t[x as usize].vhead;
        while y != NIL {
            let yn = &self.t[y as usize];
            min = agg_min(min, yn.sub_min);
            size += yn.sub_size;
            vm = vm.min(yn.sub_vmin);
            y = yn.vnext;
        }
        let node = &mut self.t[x as usize];
        node.vir_min = min;
        node.vir_size = size;
        node.vir_vmin = vm;
    }

    /// Puts x where the splay root p sat in g's virtual list.
    fn vir_replace(&mut self, g: u32, p: u32, x: u32) {
        let (prev, next) = {
            let pn = &mut self.t[p as usize];
            let r = (pn.vprev, pn.vnext);
            pn.vprev = NIL;
            pn.vnext = NIL;
            r
        };
        {
            let xn = &mut self.t[x as usize];
            xn.vprev = prev;
            xn.vnext = next;
        }
        if prev == NIL {
            self.t[g as usize].vhead = x;
        } else {
            self.t[prev as usize].vnext = x;
        }
        if next != NIL {
            self.t[next as usize].vprev = x;
        }
    }

    fn rotate(&mut self, x: u32) {
        self.work += 1;
        let p = self.t[x as usize].p;
        let g = self.t[p as usize].p;
        let dir = usize::from(self.t[p as usize].ch[1] == x);
        let b = self.t[x as usize].ch[dir ^ 1];
        if !self.is_root(p) {
            let gi = g as usize;
            if self.t[gi].ch[0] == p {
                self.t[gi].ch[0] = x;
            } else {
                self.t[gi].ch[1] = x;
            }
        } else if g != NIL {
            self.vir_replace(g, p, x);
        }
        self.t[x as usize].p = g;
        self.t[x as usize].ch[dir ^ 1] = p;
        self.t[p as usize].p = x;
        self.t[p as usize].ch[dir] = b;
        if b != NIL {
            self.t[b as usize].p = p;
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        let mut stack = std::mem::take(&mut self.stack);
        stack.push(x);
        let mut y = x;
        while !self.is_root(y) {
            y = self.t[y as usize].p;
            stack.push(y);
        }
        while let Some(z) = stack.pop() {
            self.push(z);
        }
        self.stack = stack;
        while !self.is_root(x) {
            let p = self.t[x as usize].p;
            if !self.is_root(p) {
                let g = self.t[p as usize].p;
                let zigzig = (self.t[g as usize].ch[0] == p) == (self.t[p as usize].ch[0] == x);
                self.rotate(if zigzig { p } else { x });
            }
            self.rotate(x);
        }
    }

    fn access(&mut self, x: u32) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.work += 1;
            self.splay(y);
            let old = self.t[y as usize].ch[1];
            if old != NIL {
                self.vir_add(y, old);
            }
            if last != NIL {
                self.vir_remove(y, last);
            }
            self.t[y as usize].ch[1] = last;
            self.pull(y);
            last = y;
            y = self.t[y as usize].p;
        }
        self.splay(x);
    }

    fn make_root(&mut self, x: u32) {
        self.access(x);
        self.t[x as usize].rev ^= true;
        self.push(x);
    }

    fn edge_node(&self, e: EdgeHandle) -> Result<u32, TreeError> {
        let i = e.0;
        if i >= self.n && (i as usize) < self.t.len() && self.t[i as usize].key.is_some() {
            Ok(i)
        } else {
            Err(TreeError::UnknownEdge)
        }
    }

    fn root_of(&mut self, v: u32) -> usize {
        self.access(v);
        self.t[v as usize].sub_vmin as usize
    }

    pub fn tree_id(&mut self, v: usize) -> TreeId {
        TreeId(self.root_of(v as u32) as u32)
    }

    pub fn connected(&mut self, u: usize, v: usize) -> bool {
        u == v || self.min_vertex(u) == self.min_vertex(v)
    }

    /// Number of vertices in v's tree.
    pub fn size(&mut self, v: usize) -> usize {
        self.access(v as u32);
        self.t[v].sub_size as usize
    }

    /// Smallest vertex index in v's tree.
    pub fn min_vertex(&mut self, v: usize) -> usize {
        self.access(v as u32);
        self.t[v].sub_vmin as usize
    }

    pub fn link(&mut self, u: usize, v: usize, key: K) -> Result<EdgeHandle, TreeError> {
        if self.connected(u, v) {
            return Err(TreeError::WouldCreateCycle);
        }
        let (pu, pv) = if self.payloads > 0 {
            let a = self.root_of(u as u32);
            let b = self.root_of(v as u32);
            (self.take_payload(a), self.take_payload(b))
        } else {
            (None, None)
        };
        let e = match self.free.pop() {
            Some(e) => e,
            None => {
                self.t.push(Node::blank());
                (self.t.len() - 1) as u32
            }
        };
        {
            let node = &mut self.t[e as usize];
            node.key = Some(key);
            node.ends = (u as u32, v as u32);
        }
        self.pull(e);
        let (u, v) = (u as u32, v as u32);
        self.make_root(u);
        self.t[u as usize].p = e;
        self.vir_add(e, u);
        self.pull(e);
        self.access(v);
        self.t[e as usize].p = v;
        self.vir_add(v, e);
        self.pull(v);
        self.edges += 1;
        if let Some(p) = pu.or(pv) {
            let r = self.root_of(u);
            self.put_payload(r, p);
        }
        Ok(EdgeHandle(e))
    }

    fn cut_adjacent(&mut self, x: u32, y: u32) {
        self.make_root(x);
        self.access(y);
        let yi = y as usize;
        debug_assert_eq!(self.t[yi].ch[0], x);
        self.t[yi].ch[0] = NIL;
        self.t[x as usize].p = NIL;
        self.pull(y);
    }

    pub fn cut(&mut self, e: EdgeHandle) -> Result<(), TreeError> {
        let x = self.edge_node(e)?;
        let (a, b) = self.t[x as usize].ends;
        let pay = if self.payloads > 0 {
            let r = self.root_of(a);
            self.take_payload(r)
        } else {
            None
        };
        self.cut_adjacent(a, x);
        self.cut_adjacent(x, b);
        let node = &mut self.t[x as usize];
        node.key = None;
        node.ends = (NIL, NIL);
        node.path = None;
        node.sub_min = None;
        debug_assert!(node.vhead == NIL && node.ch == [NIL, NIL] && node.p == NIL);
        self.free.push(x);
        self.edges -= 1;
        if let Some(p) = pay {
            let ra = self.root_of(a);
            let rb = self.root_of(b);
            self.put_payload(ra, p.clone());
            self.put_payload(rb, p);
        }
        Ok(())
    }

    pub fn key(&self, e: EdgeHandle) -> Result<K, TreeError> {
        let x = self.edge_node(e)?;
        Ok(self.t[x as usize].key.expect("edge node"))
    }

    pub fn endpoints(&self, e: EdgeHandle) -> Result<(usize, usize), TreeError> {
        let x = self.edge_node(e)?;
        let (a, b) = self.t[x as usize].ends;
        Ok((a as usize, b as usize))
    }

    pub fn set_key(&mut self, e: EdgeHandle, key: K) -> Result<(), TreeError> {
        let x = self.edge_node(e)?;
        self.access(x);
        self.t[x as usize].key = Some(key);
        self.pull(x);
        Ok(())
    }

    /// Maximum-key edge on the u–v path.
    pub fn path_max(&mut self, u: usize, v: usize) -> Result<(EdgeHandle, K), TreeError> {
        if u == v {
            return Err(TreeError::SameNode);
        }
        if !self.connected(u, v) {
            return Err(TreeError::NotConnected);
        }
        self.make_root(u as u32);
        self.access(v as u32);
        let (k, h) = self.t[v].path.expect("path has an edge");
        Ok((EdgeHandle(h), k))
    }

    /// Maximum key over the union of the paths from `root` to each target.
    /// All targets must share root's tree; targets equal to root add nothing.
    pub fn path_max_many(&mut self, root: usize, targets: &[usize]) -> Option<K> {
        self.make_root(root as u32);
        let mut best: Option<K> = None;
        for &x in targets {
            if x == root {
                continue;
            }
            self.access(x as u32);
            debug_assert_eq!(self.t[x].sub_vmin, self.t[root].sub_vmin.min(self.t[x].sub_vmin));
            if let Some((k, _)) = self.t[x].path {
                best = Some(best.map_or(k, |b| b.max(k)));
            }
        }
        best
    }

    /// Minimum-key edge of v's tree, absent for a singleton.
    pub fn tree_min(&mut self, v: usize) -> Option<(EdgeHandle, K)> {
        self.access(v as u32);
        self.t[v].sub_min.map(|(k, h)| (EdgeHandle(h), k))
    }

    /// Whether edge `e` lies on the x–y path. x and y must be connected.
    pub fn path_contains(&mut self, x: usize, y: usize, e: EdgeHandle) -> Result<bool, TreeError> {
        let en = self.edge_node(e)?;
        if !self.connected(x, y) {
            return Err(TreeError::NotConnected);
        }
        if x == y {
            return Ok(false);
        }
        self.make_root(x as u32);
        self.access(y as u32);
        self.splay(en);
        Ok(self.t[en as usize].p == NIL)
    }

    pub fn payload(&mut self, v: usize) -> Option<&P> {
        if self.payloads == 0 {
            return None;
        }
        let r = self.root_of(v as u32);
        self.payload[r].as_ref()
    }

    /// Replaces the payload of v's tree, returning the old one.
    pub fn set_payload(&mut self, v: usize, p: Option<P>) -> Option<P> {
        if p.is_none() && self.payloads == 0 {
            return None;
        }
        let r = self.root_of(v as u32);
        let old = self.take_payload(r);
        if let Some(p) = p {
            self.put_payload(r, p);
        }
        old
    }

    /// Payload stored under a tree id obtained since the last link or cut.
    pub fn payload_of(&self, id: TreeId) -> Option<&P> {
        self.payload[id.0 as usize].as_ref()
    }

    pub fn payload_count(&self) -> usize {
        self.payloads
    }

    fn take_payload(&mut self, r: usize) -> Option<P> {
        let p = self.payload[r].take();
        self.payloads -= usize::from(p.is_some());
        p
    }

    fn put_payload(&mut self, r: usize, p: P) {
        self.payloads += usize::from(self.payload[r].is_none());
        self.payload[r] = Some(p);
    }
}
