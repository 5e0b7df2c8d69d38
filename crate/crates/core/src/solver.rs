//! Exact maximum clique search on explicitly queried subgraphs.
//!
//! The search is a bit-parallel branch and bound: candidate sets are `u64`
//! bitsets and every node is bounded by a greedy sequential coloring of its
//! candidate set (color classes are independent sets, so the number of colors
//! bounds the clique size). Vertices are pre-ordered by non-increasing degree.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{EdgeQuery, Vertex};

const WORD: usize = 64;

#[inline]
fn words_for(m: usize) -> usize {
    m.div_ceil(WORD)
}

#[inline]
fn test_bit(row: &[u64], b: usize) -> bool {
    row[b / WORD] >> (b % WORD) & 1 == 1
}

#[inline]
fn set_bit(row: &mut [u64], b: usize) {
    row[b / WORD] |= 1 << (b % WORD);
}

#[inline]
fn clear_bit(row: &mut [u64], b: usize) {
    row[b / WORD] &= !(1 << (b % WORD));
}

fn bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                None
            } else {
                let t = x.trailing_zeros() as usize;
                x &= x - 1;
                Some(w * WORD + t)
            }
        })
    })
}

/// Induced subgraph on a set of original vertex ids, stored as a symmetric bit
/// matrix over local indices `0..labels.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSubgraph {
    labels: Vec<Vertex>,
    words: usize,
    rows: Vec<u64>,
}

impl DenseSubgraph {
    /// Edgeless graph on `labels`, which must be strictly increasing.
    pub fn empty(labels: Vec<Vertex>) -> Result<Self> {
        if let Some(w) = labels.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::param(if w[0] == w[1] {
                format!("duplicate vertex {} in vertex set", w[0])
            } else {
                format!("vertex set not sorted ascending at {} > {}", w[0], w[1])
            }));
        }
        let words = words_for(labels.len());
        Ok(DenseSubgraph {
            rows: vec![0; words * labels.len()],
            labels,
            words,
        })
    }

    /// Graph on local vertices `0..m` labeled `1..=m`.
    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty((1..=m as Vertex).collect())?;
        for &(a, b) in edges {
            if a == b || a >= m || b >= m {
                return Err(Error::param(format!("invalid local edge ({a},{b})")));
            }
            g.set_edge(a, b);
        }
        Ok(g)
    }

    /// Graph on local vertices given by a dense boolean matrix.
    pub fn from_matrix(labels: Vec<Vertex>, adj: &[Vec<bool>]) -> Result<Self> {
        let mut g = Self::empty(labels)?;
        let m = g.order();
        if adj.len() != m || adj.iter().any(|row| row.len() != m) {
            return Err(Error::param(format!("adjacency matrix is not {m} x {m}")));
        }
        for (a, row) in adj.iter().enumerate() {
            for (b, &e) in row.iter().enumerate().skip(a + 1) {
                if e {
                    g.set_edge(a, b);
                }
            }
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.rows[a * self.words..(a + 1) * self.words]
    }

    pub fn set_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        let w = self.words;
        set_bit(&mut self.rows[a * w..(a + 1) * w], b);
        set_bit(&mut self.rows[b * w..(b + 1) * w], a);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        test_bit(self.row(a), b)
    }

    pub fn degree(&self, a: usize) -> usize {
        self.row(a).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.order()).map(|a| self.degree(a)).sum::<usize>() / 2
    }

    /// Local index of an original vertex id.
    pub fn local(&self, v: Vertex) -> Option<usize> {
        self.labels.binary_search(&v).ok()
    }

    /// Whether every pair of the given original ids is adjacent.
    pub fn is_clique(&self, vertices: &[Vertex]) -> bool {
        let Some(local): Option<Vec<usize>> = vertices.iter().map(|&v| self.local(v)).collect()
        else {
            return false;
        };
        local.iter().enumerate().all(|(x, &a)| {
            local[x + 1..]
                .iter()
                .all(|&b| a != b && self.has_edge(a, b))
        })
    }

    /// Subgraph induced on a subset of local indices (ascending).
    pub fn induced(&self, local: &[usize]) -> Result<Self> {
        let mut g = Self::empty(local.iter().map(|&a| self.labels[a]).collect())?;
        for (x, &a) in local.iter().enumerate() {
            for (y, &b) in local.iter().enumerate().skip(x + 1) {
                if self.has_edge(a, b) {
                    g.set_edge(x, y);
                }
            }
        }
        Ok(g)
    }

    /// DIMACS-style edge list: a `p edge V E` header then one `e i j` line
    /// per edge, using 1-based local indices.
    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "c labels {:?}", self.labels);
        let _ = writeln!(s, "p edge {} {}", self.order(), self.edge_count());
        for a in 0..self.order() {
            for b in bits(self.row(a)).filter(|&b| b > a) {
                let _ = writeln!(s, "e {} {}", a + 1, b + 1);
            }
        }
        s
    }
}

/// Queries every pair of `vertex_set` through the oracle and returns the
/// induced subgraph. Pairs are issued in row-major order `(a, b)`, `a < b`.
pub fn build_from_oracle<Q: EdgeQuery + ?Sized>(
    vertex_set: &[Vertex],
    oracle: &mut Q,
) -> Result<DenseSubgraph> {
    let n = oracle.n();
    if let Some(&v) = vertex_set.iter().find(|&&v| v == 0 || v > n) {
        return Err(Error::param(format!("vertex {v} outside [1..{n}]")));
    }
    let mut g = DenseSubgraph::empty(vertex_set.to_vec())?;
    let m = g.order();
    for a in 0..m {
        for b in (a + 1)..m {
            if oracle.query_edge(vertex_set[a], vertex_set[b])? {
                g.set_edge(a, b);
            }
        }
    }
    Ok(g)
}

/// A clique in some source graph, as sorted original vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueWitness {
    pub vertices: Vec<Vertex>,
    pub size: usize,
}

impl CliqueWitness {
    fn from_local(g: &DenseSubgraph, mut local: Vec<usize>) -> Self {
        local.sort_unstable();
        let vertices: Vec<Vertex> = local.into_iter().map(|a| g.labels[a]).collect();
        CliqueWitness {
            size: vertices.len(),
            vertices,
        }
    }
}

/// Adjacency of one search frame in compact indices `0..size`.
struct Frame {
    words: usize,
    adj: Vec<u64>,
    /// frame index -> root solver index
    to_root: Vec<usize>,
}

impl Frame {
    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    /// Frame over the vertices of `set` (a bitset in this frame's indices).
    fn compact(&self, set: &[u64]) -> Frame {
        let verts: Vec<usize> = bits(set).collect();
        let words = words_for(verts.len());
        // offset[w] = compact index of the first member in word w
        let mut offset = Vec::with_capacity(set.len());
        let mut acc = 0usize;
        for &w in set {
            offset.push(acc);
            acc += w.count_ones() as usize;
        }
        let mut adj = vec![0u64; words * verts.len()];
        for (x, &v) in verts.iter().enumerate() {
            let dst = &mut adj[x * words..(x + 1) * words];
            for (w, (&r, &mask)) in self.row(v).iter().zip(set).enumerate() {
                if mask == 0 {
                    continue;
                }
                let packed = gather_bits(r, mask);
                if packed == 0 {
                    continue;
                }
                let at = offset[w];
                let (q, sh) = (at / WORD, at % WORD);
                dst[q] |= packed << sh;
                if sh != 0 && q + 1 < words {
                    dst[q + 1] |= packed >> (WORD - sh);
                }
            }
        }
        Frame {
            words,
            adj,
            to_root: verts.iter().map(|&v| self.to_root[v]).collect(),
        }
    }
}

/// Packs the bits of `value` selected by `mask` into the low bits (`pext`).
#[inline]
fn gather_bits(value: u64, mask: u64) -> u64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("bmi2") {
            // SAFETY: guarded by the runtime feature check above.
            return unsafe { pext(value, mask) };
        }
    }
    let mut out = 0u64;
    let mut m = mask;
    let mut i = 0;
    while m != 0 {
        let t = m.trailing_zeros();
        out |= (value >> t & 1) << i;
        i += 1;
        m &= m - 1;
    }
    out
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "bmi2")]
unsafe fn pext(value: u64, mask: u64) -> u64 {
    std::arch::x86_64::_pext_u64(value, mask)
}

/// Incumbent of a search.
struct Incumbent {
    best: Vec<usize>,
    size: usize,
}

/// Buffers owned by one search depth, reused by every node at that depth.
#[derive(Default)]
struct Scratch {
    uncolored: Vec<u64>,
    class: Vec<u64>,
    /// color classes below `kmin`, `words` entries each
    low: Vec<u64>,
    order: Vec<usize>,
    colors: Vec<usize>,
    child: Vec<u64>,
    work: Vec<u64>,
    state: Vec<u8>,
    queue: Vec<usize>,
}

struct State {
    inc: Incumbent,
    path: Vec<usize>,
    scratch: Vec<Scratch>,
    /// stop at the first clique above the floor
    first: bool,
    done: bool,
}

/// Greedy sequential coloring of `p` with re-numbering. Color classes below
/// `kmin` are kept; each vertex that would open a class `>= kmin` first tries
/// to join a lower class directly, or by moving its single conflicting vertex
/// in that class to another lower class. Only vertices left with a color
/// `>= kmin` are returned, in non-decreasing color order.
fn color(frame: &Frame, p: &[u64], kmin: usize, sc: &mut Scratch) {
    let Scratch {
        uncolored,
        class,
        low,
        order,
        colors,
        work,
        state,
        queue,
        ..
    } = sc;
    order.clear();
    colors.clear();
    low.clear();
    let words = frame.words;
    uncolored.clear();
    uncolored.extend_from_slice(p);
    class.clear();
    class.resize(words, 0);
    let mut lo = uncolored.iter().position(|&w| w != 0).unwrap_or(words);
    let plo = lo;
    let hi = uncolored.iter().rposition(|&w| w != 0).map_or(0, |x| x + 1);
    let mut k = 0;
    while lo < hi {
        k += 1;
        if k == kmin && k > 1 {
            renumber(frame, low, uncolored, plo..hi);
            while lo < hi && uncolored[lo] == 0 {
                lo += 1;
            }
            if lo >= hi {
                break;
            }
        }
        class[lo..hi].copy_from_slice(&uncolored[lo..hi]);
        let base = low.len();
        let keep = k < kmin;
        if keep {
            low.resize(base + words, 0);
        }
        for w in lo..hi {
            let mut cur = class[w];
            let mut taken = 0u64;
            while cur != 0 {
                let bit = cur & cur.wrapping_neg();
                let v = w * WORD + bit.trailing_zeros() as usize;
                taken |= bit;
                let row = &frame.adj[v * words..v * words + hi];
                cur &= !row[w] & !bit;
                for (c, r) in class[w + 1..hi].iter_mut().zip(&row[w + 1..]) {
                    *c &= !r;
                }
                if !keep {
                    order.push(v);
                    colors.push(k);
                }
            }
            uncolored[w] &= !taken;
            if keep {
                low[base + w] = taken;
            }
        }
        while lo < hi && uncolored[lo] == 0 {
            lo += 1;
        }
    }
    if !order.is_empty() && kmin > 1 {
        let span = plo..hi;
        propagate(frame, low, span, order, colors, work, state, queue);
    }
}

const FREE: u8 = 0;
const USED: u8 = 1;
const QUEUED: u8 = 2;
const ASSIGNED: u8 = 3;

/// Unit propagation over the low classes of one node.
struct Propagation<'a> {
    frame: &'a Frame,
    low: &'a [u64],
    span: std::ops::Range<usize>,
    nl: usize,
    /// per class: its members still compatible with the current assignment
    work: &'a mut Vec<u64>,
    state: &'a mut Vec<u8>,
    queue: &'a mut Vec<usize>,
    /// (reduced class, class of the unit that reduced it)
    log: Vec<(usize, usize)>,
}

impl Propagation<'_> {
    fn width(&self) -> usize {
        self.span.len()
    }

    fn live(&self, i: usize) -> &[u64] {
        let w = self.width();
        &self.work[i * w..(i + 1) * w]
    }

    /// Restricts every non-used class to the neighbours of `v`. Returns an
    /// emptied class, if any; classes reduced to one vertex are queued.
    fn start(&mut self, v: usize) -> Option<usize> {
        let words = self.frame.words;
        let width = self.width();
        let row_v = &self.frame.row(v)[self.span.clone()];
        self.queue.clear();
        for i in 0..self.nl {
            if self.state[i] == USED {
                continue;
            }
            let cls = &self.low[i * words + self.span.start..i * words + self.span.end];
            let dst = &mut self.work[i * width..(i + 1) * width];
            let mut count = 0;
            for ((d, &c), &r) in dst.iter_mut().zip(cls).zip(row_v) {
                *d = c & r;
                count += d.count_ones();
            }
            if count == 0 {
                return Some(i);
            }
            if count == 1 {
                self.state[i] = QUEUED;
                self.queue.push(i);
            }
        }
        None
    }

    /// Single vertex of a unit class.
    fn unit_vertex(&self, i: usize) -> usize {
        let live = self.live(i);
        let at = live
            .iter()
            .position(|&w| w != 0)
            .expect("unit class is nonempty");
        (self.span.start + at) * WORD + live[at].trailing_zeros() as usize
    }

    /// Processes queued units from `head` on. Returns an emptied class.
    fn run(&mut self, head: &mut usize) -> Option<usize> {
        let width = self.width();
        while *head < self.queue.len() {
            let i = self.queue[*head];
            *head += 1;
            self.state[i] = ASSIGNED;
            let u = self.unit_vertex(i);
            let row_u = &self.frame.row(u)[self.span.clone()];
            for j in 0..self.nl {
                if self.state[j] == USED || self.state[j] == ASSIGNED {
                    continue;
                }
                let dst = &mut self.work[j * width..(j + 1) * width];
                let mut count = 0;
                let mut changed = 0;
                for (d, &r) in dst.iter_mut().zip(row_u) {
                    changed |= *d & !r;
                    *d &= r;
                    count += d.count_ones();
                }
                if changed != 0 {
                    self.log.push((j, i));
                }
                if count == 0 {
                    return Some(j);
                }
                if count == 1 && self.state[j] == FREE {
                    self.state[j] = QUEUED;
                    self.queue.push(j);
                }
            }
        }
        None
    }

    /// Classes needed to explain the state of `root`: itself plus, through
    /// the log, every unit class that reduced it, transitively.
    fn explain(&self, root: usize, out: &mut Vec<usize>) {
        let start = out.len();
        out.push(root);
        let mut at = start;
        while at < out.len() {
            let c = out[at];
            at += 1;
            for &(j, i) in &self.log {
                if j == c && !out[start..].contains(&i) {
                    out.push(i);
                }
            }
        }
    }

    /// Refutes `v`: on success the classes involved are marked used.
    fn refute(&mut self, v: usize) -> bool {
        let mut involved: Vec<usize> = Vec::new();
        let mut head = 0;
        self.log.clear();
        let mut conflict = self.start(v);
        if conflict.is_none() {
            conflict = self.run(&mut head);
        }
        if let Some(j) = conflict {
            self.explain(j, &mut involved);
        } else {
            self.reset();
            return false;
        }
        self.reset();
        for i in involved {
            self.state[i] = USED;
        }
        true
    }

    /// Clears assignment marks, keeping used classes.
    fn reset(&mut self) {
        for s in self.state.iter_mut() {
            if *s != USED {
                *s = FREE;
            }
        }
    }
}

/// Drops leftover vertices whose inclusion is refuted by unit propagation.
///
/// A clique takes at most one vertex per low class. For a leftover `v`,
/// restricting every class to the neighbours of `v` and then to the
/// neighbours of each class reduced to a single vertex either empties some
/// class or stalls. An emptied class means no clique holds `v` together with
/// a vertex from each class involved, so those classes and `v` together add
/// no more than the classes alone. Such sets are kept disjoint, after which
/// the low classes plus every dropped vertex still bound the clique size by
/// the number of low classes. Kept vertices get bounds that stay valid with
/// the dropped ones present.
#[allow(clippy::too_many_arguments)]
fn propagate(
    frame: &Frame,
    low: &[u64],
    span: std::ops::Range<usize>,
    order: &mut Vec<usize>,
    colors: &mut Vec<usize>,
    work: &mut Vec<u64>,
    state: &mut Vec<u8>,
    queue: &mut Vec<usize>,
) {
    let nl = low.len() / frame.words;
    work.clear();
    work.resize(nl * span.len(), 0);
    state.clear();
    state.resize(nl, FREE);
    let mut pr = Propagation {
        frame,
        low,
        span,
        nl,
        work,
        state,
        queue,
        log: Vec::new(),
    };
    let mut kept = 0;
    let mut dropped_colors: Vec<usize> = Vec::new();
    for idx in 0..order.len() {
        let v = order[idx];
        if pr.refute(v) {
            dropped_colors.push(colors[idx]);
        } else {
            order[kept] = v;
            colors[kept] = colors[idx];
            kept += 1;
        }
    }
    order.truncate(kept);
    colors.truncate(kept);
    if dropped_colors.is_empty() {
        return;
    }
    // colors and dropped_colors are both non-decreasing
    let mut above = dropped_colors.len();
    let mut bound = usize::MAX;
    for j in (0..kept).rev() {
        while above > 0 && dropped_colors[above - 1] > colors[j] {
            above -= 1;
        }
        let dropped_above = dropped_colors.len() - above;
        bound = bound.min(colors[j] + dropped_above).min(nl + j + 1);
        colors[j] = bound;
    }
}

fn renumber(frame: &Frame, low: &mut [u64], uncolored: &mut [u64], span: std::ops::Range<usize>) {
    let words = frame.words;
    let nclasses = low.len() / words;
    let (plo, hi) = (span.start, span.end);
    // class members lie anywhere in the node's word span, not only above the
    // lowest uncolored word
    for x0 in plo..hi {
        let mut pending = uncolored[x0];
        'vertex: while pending != 0 {
            let v = x0 * WORD + pending.trailing_zeros() as usize;
            pending &= pending - 1;
            let row_v = &frame.row(v)[plo..hi];
            for c1 in 0..nclasses {
                let cls = &low[c1 * words + plo..c1 * words + hi];
                let mut conflict = None;
                let mut count = 0;
                for (x, (&c, &r)) in cls.iter().zip(row_v).enumerate() {
                    let inter = c & r;
                    if inter != 0 {
                        count += inter.count_ones();
                        if count > 1 {
                            break;
                        }
                        conflict = Some((plo + x) * WORD + inter.trailing_zeros() as usize);
                    }
                }
                match (count, conflict) {
                    (0, _) => {
                        set_bit(&mut low[c1 * words..], v);
                        clear_bit(uncolored, v);
                        continue 'vertex;
                    }
                    (1, Some(w)) => {
                        let row_w = &frame.row(w)[plo..hi];
                        for c2 in (c1 + 1)..nclasses {
                            let other = &low[c2 * words + plo..c2 * words + hi];
                            if other.iter().zip(row_w).all(|(&c, &r)| c & r == 0) {
                                clear_bit(&mut low[c1 * words..], w);
                                set_bit(&mut low[c2 * words..], w);
                                set_bit(&mut low[c1 * words..], v);
                                clear_bit(uncolored, v);
                                continue 'vertex;
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
}

fn expand(frame: &Frame, st: &mut State, p: &mut [u64]) {
    let depth = st.path.len();
    if st.scratch.len() <= depth {
        st.scratch.resize_with(depth + 1, Scratch::default);
    }
    let mut sc = std::mem::take(&mut st.scratch[depth]);
    let kmin = (st.inc.size + 1).saturating_sub(depth).max(1);
    color(frame, p, kmin, &mut sc);
    for idx in (0..sc.order.len()).rev() {
        if depth + sc.colors[idx] <= st.inc.size {
            break;
        }
        let v = sc.order[idx];
        st.path.push(frame.to_root[v]);
        sc.child.clear();
        sc.child
            .extend(p.iter().zip(frame.row(v)).map(|(a, b)| a & b));
        let size: usize = sc.child.iter().map(|w| w.count_ones() as usize).sum();
        if size == 0 {
            if st.path.len() > st.inc.size {
                st.inc.size = st.path.len();
                st.inc.best = st.path.clone();
                st.done = st.first;
            }
        } else if st.path.len() + size > st.inc.size {
            if size >= 320 && frame.words >= 2 * words_for(size) {
                let sub = frame.compact(&sc.child);
                let mut all = full_set(sub.to_root.len());
                expand(&sub, st, &mut all);
            } else {
                expand(frame, st, &mut sc.child);
            }
        }
        st.path.pop();
        if st.done {
            break;
        }
        clear_bit(p, v);
    }
    st.scratch[depth] = sc;
}

fn full_set(m: usize) -> Vec<u64> {
    let mut p = vec![u64::MAX; words_for(m)];
    if !m.is_multiple_of(WORD) {
        if let Some(last) = p.last_mut() {
            *last = (1u64 << (m % WORD)) - 1;
        }
    }
    p
}

/// Degeneracy order: repeatedly strip a minimum-degree vertex; the vertex
/// removed last comes first.
fn degeneracy_order(g: &DenseSubgraph) -> Vec<usize> {
    let m = g.order();
    let mut deg: Vec<usize> = (0..m).map(|a| g.degree(a)).collect();
    let mut alive = vec![true; m];
    let mut removed = Vec::with_capacity(m);
    for _ in 0..m {
        let v = (0..m)
            .filter(|&a| alive[a])
            .min_by_key(|&a| (deg[a], std::cmp::Reverse(a)))
            .expect("vertex left");
        alive[v] = false;
        removed.push(v);
        for b in bits(g.row(v)) {
            if alive[b] {
                deg[b] -= 1;
            }
        }
    }
    removed.reverse();
    removed
}

/// Branch-and-bound engine over a reordered copy of the adjacency.
struct Search {
    root: Frame,
    /// solver index -> local index
    to_local: Vec<usize>,
    /// local index -> solver index
    to_solver: Vec<usize>,
}

impl Search {
    fn new(g: &DenseSubgraph) -> Self {
        let m = g.order();
        let to_local = degeneracy_order(g);
        let mut to_solver = vec![0; m];
        for (s, &a) in to_local.iter().enumerate() {
            to_solver[a] = s;
        }
        let words = words_for(m);
        let mut adj = vec![0u64; words * m];
        for (s, &a) in to_local.iter().enumerate() {
            let dst = &mut adj[s * words..(s + 1) * words];
            for b in bits(g.row(a)) {
                set_bit(dst, to_solver[b]);
            }
        }
        Search {
            root: Frame {
                words,
                adj,
                to_root: (0..m).collect(),
            },
            to_local,
            to_solver,
        }
    }

    fn full_set(&self) -> Vec<u64> {
        full_set(self.to_local.len())
    }

    fn root_set(&self, local: &[u64]) -> Vec<u64> {
        let mut p = vec![0u64; self.root.words];
        for a in bits(local) {
            set_bit(&mut p, self.to_solver[a]);
        }
        p
    }

    /// Largest clique inside candidate set `p` among those of size >= `floor`.
    /// Returned as local indices; `None` when every clique in `p` is smaller.
    fn run(&mut self, p: Vec<u64>, floor: usize) -> Option<Vec<usize>> {
        self.search(p, floor, false)
    }

    /// Any clique of size at least `floor`, not necessarily maximum.
    fn run_first(&mut self, p: Vec<u64>, floor: usize) -> Option<Vec<usize>> {
        self.search(p, floor, true)
    }

    fn search(&mut self, mut p: Vec<u64>, floor: usize, first: bool) -> Option<Vec<usize>> {
        let mut st = State {
            inc: Incumbent {
                best: Vec::new(),
                size: floor.saturating_sub(1),
            },
            path: Vec::new(),
            scratch: Vec::new(),
            first,
            done: false,
        };
        let size: usize = p.iter().map(|w| w.count_ones() as usize).sum();
        if size > st.inc.size {
            expand(&self.root, &mut st, &mut p);
        }
        if st.inc.best.is_empty() {
            (floor == 0).then(Vec::new)
        } else {
            Some(st.inc.best.iter().map(|&s| self.to_local[s]).collect())
        }
    }
}

/// Clique number of `g`.
pub fn clique_number(g: &DenseSubgraph) -> usize {
    clique_number_at_least(g, 0).unwrap_or(0)
}

/// `Some(omega)` when the clique number of `g` is at least `floor`, otherwise
/// `None`. Much cheaper than [`clique_number`] when `floor` is close to or
/// above the true value.
pub fn clique_number_at_least(g: &DenseSubgraph, floor: usize) -> Option<usize> {
    if g.order() == 0 {
        return (floor == 0).then_some(0);
    }
    let mut s = Search::new(g);
    let p = s.full_set();
    s.run(p, floor).map(|c| c.len())
}

/// Some clique of size at least `floor`, found by a search that stops at
/// its first success. Neither maximum nor canonical; `None` exactly when
/// the clique number is below `floor`.
pub fn find_clique_at_least(g: &DenseSubgraph, floor: usize) -> Option<CliqueWitness> {
    if floor == 0 {
        return Some(CliqueWitness {
            vertices: Vec::new(),
            size: 0,
        });
    }
    if g.order() == 0 {
        return None;
    }
    let peeled = peel_local(g);
    if peeled.len() >= floor {
        return Some(CliqueWitness::from_local(g, peeled));
    }
    let mut s = Search::new(g);
    let p = s.full_set();
    let found = s.run_first(p, floor)?;
    Some(CliqueWitness::from_local(g, found))
}

/// Maximum clique of `g`; among all maximum cliques the lexicographically
/// smallest sorted vertex set is returned.
pub fn max_clique(g: &DenseSubgraph) -> CliqueWitness {
    clique_at_least(g, 0).expect("floor 0 always succeeds")
}

/// Like [`max_clique`], but only searches for cliques of size at least
/// `floor`. Returns `None` when the clique number is below `floor`.
pub fn clique_at_least(g: &DenseSubgraph, floor: usize) -> Option<CliqueWitness> {
    let m = g.order();
    if m == 0 {
        return (floor == 0).then(|| CliqueWitness {
            vertices: Vec::new(),
            size: 0,
        });
    }
    let mut s = Search::new(g);
    let p = s.full_set();
    // a heuristic clique at or above the floor raises the floor past itself
    let peeled = peel_local(g);
    let found = if peeled.len() >= floor.max(1) {
        s.run(p, peeled.len() + 1).unwrap_or(peeled)
    } else {
        s.run(p, floor)?
    };
    Some(CliqueWitness::from_local(g, lex_smallest(g, &mut s, found)))
}

/// Exact maximum clique (same witness as [`max_clique`]) found by trying
/// floors `start, start - step, ...`. The first floor that succeeds yields
/// the maximum, so this is cheap whenever the clique number is close to
/// `start`. Floors at or below a heuristic clique are not tried one by one:
/// the search then only has to rule out anything larger.
pub fn max_clique_from_above(g: &DenseSubgraph, start: usize, step: usize) -> CliqueWitness {
    let step = step.max(1);
    let lower = peel_local(g).len();
    let mut floor = start;
    loop {
        if floor <= lower {
            return clique_at_least(g, lower).expect("the heuristic clique reaches its own size");
        }
        if let Some(w) = clique_at_least(g, floor) {
            return w;
        }
        floor = floor.saturating_sub(step);
    }
}

/// Greedy clique: repeatedly add the candidate with the most candidate
/// neighbors. A lower bound only.
pub fn greedy_clique(g: &DenseSubgraph) -> CliqueWitness {
    let m = g.order();
    let mut cand = full_set(m);
    let mut chosen = Vec::new();
    loop {
        let pick = bits(&cand).max_by_key(|&a| {
            let d: u32 = g
                .row(a)
                .iter()
                .zip(&cand)
                .map(|(r, c)| (r & c).count_ones())
                .sum();
            (d, std::cmp::Reverse(a))
        });
        let Some(a) = pick else { break };
        chosen.push(a);
        for (c, r) in cand.iter_mut().zip(g.row(a)) {
            *c &= r;
        }
    }
    CliqueWitness::from_local(g, chosen)
}

/// Clique left by repeatedly deleting a vertex of minimum degree until the
/// remaining vertices are pairwise adjacent, then extended greedily by
/// vertices adjacent to all of it. A lower bound only, but one that tends to
/// land on a planted clique well before a plain greedy pass does.
pub fn peel_clique(g: &DenseSubgraph) -> CliqueWitness {
    CliqueWitness::from_local(g, peel_local(g))
}

fn peel_local(g: &DenseSubgraph) -> Vec<usize> {
    let m = g.order();
    let mut deg: Vec<usize> = (0..m).map(|a| g.degree(a)).collect();
    let mut alive = full_set(m);
    let mut left = m;
    while left > 0 {
        let (v, d) = bits(&alive)
            .map(|a| (a, deg[a]))
            .min_by_key(|&(a, d)| (d, a))
            .expect("alive set is nonempty");
        if d + 1 == left {
            break;
        }
        clear_bit(&mut alive, v);
        left -= 1;
        for b in bits(g.row(v)) {
            deg[b] = deg[b].saturating_sub(1);
        }
    }
    let mut cand: Vec<u64> = full_set(m);
    let mut chosen: Vec<usize> = bits(&alive).collect();
    for &a in &chosen {
        for (c, r) in cand.iter_mut().zip(g.row(a)) {
            *c &= r;
        }
    }
    loop {
        let Some(a) = bits(&cand).next() else { break };
        chosen.push(a);
        for (c, r) in cand.iter_mut().zip(g.row(a)) {
            *c &= r;
        }
    }
    chosen
}

/// Turns one maximum clique into the lexicographically smallest one of the
/// same size. Elements are fixed left to right; at each step the smallest
/// candidate that still admits a completion is taken, and the last known
/// completion is used as an upper limit for the scan.
fn lex_smallest(g: &DenseSubgraph, s: &mut Search, mut completion: Vec<usize>) -> Vec<usize> {
    let omega = completion.len();
    completion.sort_unstable();
    let m = g.order();
    let words = words_for(m);
    let mut cand = vec![0u64; words];
    for a in 0..m {
        set_bit(&mut cand, a);
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(omega);
    for step in 0..omega {
        let need = omega - step - 1;
        let known = completion[step];
        let mut pick = known;
        for v in bits(&cand).take_while(|&v| v < known) {
            let mut sub: Vec<u64> = cand.iter().zip(g.row(v)).map(|(a, b)| a & b).collect();
            for b in 0..=v {
                clear_bit(&mut sub, b);
            }
            if need == 0 {
                pick = v;
                completion.truncate(step);
                completion.push(v);
                break;
            }
            let p = s.root_set(&sub);
            if let Some(rest) = s.run_first(p, need) {
                pick = v;
                let mut rest = rest;
                rest.sort_unstable();
                completion.truncate(step);
                completion.push(v);
                completion.extend(rest);
                break;
            }
        }
        chosen.push(pick);
        let row = g.row(pick);
        for (c, r) in cand.iter_mut().zip(row) {
            *c &= r;
        }
        for b in 0..=pick {
            clear_bit(&mut cand, b);
        }
    }
    chosen
}

/// Reference values for the clique number of G(n,1/2): Matula's
/// `2 log n - 2 log log n + 2 log e - 1` and the first-moment cap
/// `2 log n + 3`, both with base-2 logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaReference {
    pub omega_n: f64,
    pub first_moment_cap: f64,
}

pub fn omega_reference(n: u64) -> Result<OmegaReference> {
    if n < 4 {
        return Err(Error::param(format!(
            "omega reference needs n >= 4, got {n}"
        )));
    }
    let lg = (n as f64).log2();
    Ok(OmegaReference {
        omega_n: 2.0 * lg - 2.0 * lg.log2() + 2.0 * std::f64::consts::E.log2() - 1.0,
        first_moment_cap: 2.0 * lg + 3.0,
    })
}
