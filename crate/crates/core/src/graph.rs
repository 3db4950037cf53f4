//! Undirected simple graphs on dense vertex ids, vertex sets over a fixed
//! ground set, traversal, and the edge-list text format.
//!
//! The text format is a header line `n m` followed by `m` lines `u v` with
//! `0 <= u < v < n`. Lines starting with `#` and blank lines are ignored.
//! Writing always emits the canonical form (edges sorted lexicographically).

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Immutable undirected simple graph with sorted adjacency lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut b = GraphBuilder::new(n);
        for (u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    /// Neighbor bitmasks, one per vertex. Only for graphs with at most 64 vertices.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        debug_assert!(self.n() <= 64);
        self.adj
            .iter()
            .map(|ns| ns.iter().fold(0u64, |acc, &v| acc | (1u64 << v)))
            .collect()
    }

    /// All vertices at hop distance at most `radius` from `center`.
    pub fn bfs_ball(&self, center: usize, radius: usize) -> VertexSet {
        self.bfs_ball_within(center, radius, None)
    }

    /// Same as [`Graph::bfs_ball`] but restricted to paths inside `within`.
    pub fn bfs_ball_within(&self, center: usize, radius: usize, within: Option<&VertexSet>) -> VertexSet {
        assert!(center < self.n(), "center {center} out of range");
        let mut ball = VertexSet::new(self.n());
        ball.insert(center);
        let mut frontier = vec![center];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.adj[u] {
                    if within.is_some_and(|s| !s.contains(w)) || ball.contains(w) {
                        continue;
                    }
                    ball.insert(w);
                    next.push(w);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        ball
    }

    /// Hop distances from `source` inside `within` (or the whole graph).
    /// Unreached vertices get `usize::MAX`.
    pub fn distances_within(&self, source: usize, within: Option<&VertexSet>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] != usize::MAX || within.is_some_and(|s| !s.contains(w)) {
                    continue;
                }
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
        dist
    }

    /// Subgraph induced by `s`; vertex `i` of the result is `map[i]` in `self`.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<(Graph, Vec<usize>)> {
        if s.is_empty() {
            return Err(Error::Degenerate("induced subgraph of an empty vertex set".into()));
        }
        let map: Vec<usize> = s.iter().collect();
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            index[v] = i;
        }
        let mut adj = vec![Vec::new(); map.len()];
        let mut m = 0;
        for (i, &v) in map.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = index[w];
                if j != usize::MAX {
                    adj[i].push(j);
                    if j > i {
                        m += 1;
                    }
                }
            }
            // `index` is increasing in `w`, so the list is already sorted.
        }
        Ok((Graph { adj, m }, map))
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<VertexSet> {
        self.components_within(&self.vertices())
    }

    /// Components of the subgraph induced by `within`.
    pub fn components_within(&self, within: &VertexSet) -> Vec<VertexSet> {
        let mut seen = VertexSet::new(self.n());
        let mut out = Vec::new();
        for start in within.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = VertexSet::new(self.n());
            comp.insert(start);
            seen.insert(start);
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if within.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        comp.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Vertices outside `s` with a neighbor in `s`.
    pub fn boundary(&self, s: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new(self.n());
        for v in s.iter() {
            for &w in &self.adj[v] {
                if !s.contains(w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// Number of edges with both ends in `s`.
    pub fn edges_within(&self, s: &VertexSet) -> usize {
        s.iter()
            .map(|v| self.adj[v].iter().filter(|&&w| w > v && s.contains(w)).count())
            .sum()
    }

    /// Canonical edge-list text.
    pub fn write_graph(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn read_graph(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let (n, m) = parse_pair(hline, header, "header")?;

        let mut b = GraphBuilder::new(n);
        let mut count = 0;
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l, "edge")?;
            if u == v {
                return Err(Error::Parse {
                    line,
                    message: format!("self-loop at vertex {u}"),
                });
            }
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex out of range in edge {u} {v} (n = {n})"),
                });
            }
            if u > v {
                return Err(Error::Parse {
                    line,
                    message: format!("edge {u} {v} must be written with u < v"),
                });
            }
            if b.contains(u, v) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate edge {u} {v}"),
                });
            }
            b.add_edge(u, v).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            count += 1;
        }
        if count != m {
            return Err(Error::Parse {
                line: hline,
                message: format!("header declares {m} edges but {count} were given"),
            });
        }
        Ok(b.build())
    }
}

fn parse_pair(line: usize, text: &str, what: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line,
            message: format!("malformed {what}: expected two integers"),
        })?;
        tok.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("malformed {what}: `{tok}` is not a nonnegative integer"),
        })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            message: format!("malformed {what}: trailing tokens"),
        });
    }
    Ok((a, b))
}

/// Single-owner builder; duplicates are errors, not silently merged.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].contains(&v)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::InvalidParameter(format!(
                "edge {u} {v} out of range for n = {n}"
            )));
        }
        if u == v {
            return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
        }
        if self.contains(u, v) {
            return Err(Error::InvalidParameter(format!("duplicate edge {u} {v}")));
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.m += 1;
        Ok(())
    }

    /// Adds the edge unless present. Used by contractions, where parallel
    /// edges collapse.
    pub fn add_edge_dedup(&mut self, u: usize, v: usize) {
        if u != v && !self.contains(u, v) {
            self.adj[u].push(v);
            self.adj[v].push(u);
            self.m += 1;
        }
    }

    pub fn build(mut self) -> Graph {
        for ns in &mut self.adj {
            ns.sort_unstable();
        }
        Graph {
            adj: self.adj,
            m: self.m,
        }
    }
}

/// Set of vertex ids over the ground set `0..n`, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_iter_in(n: usize, it: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(n);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub(crate) fn from_mask(n: usize, mask: u64) -> Self {
        let mut s = Self::new(n);
        if n > 0 {
            s.words[0] = mask;
        }
        s
    }

    pub fn ground(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.n, "vertex {v} outside ground set of size {}", self.n);
        let (w, b) = (v / 64, v % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.n {
            return false;
        }
        let (w, b) = (v / 64, v % 64);
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        had
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.n, other.n, "vertex sets over different ground sets");
        VertexSet {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        VertexSet::full(self.n).difference(self)
    }

    pub fn union_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Plain sorted list of vertex ids, used where the ground set size is not
/// known at deserialization time.
pub fn deserialize_ids<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    let mut v = Vec::<usize>::deserialize(d)?;
    v.sort_unstable();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn grid(k: usize) -> Graph {
        let mut e = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let v = r * k + c;
                if c + 1 < k {
                    e.push((v, v + 1));
                }
                if r + 1 < k {
                    e.push((v, v + k));
                }
            }
        }
        Graph::from_edges(k * k, e).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    // Floyd-Warshall; independent of the BFS in `bfs_ball`.
    fn all_pairs(g: &Graph) -> Vec<Vec<usize>> {
        let n = g.n();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (v, row) in d.iter_mut().enumerate() {
            row[v] = 0;
        }
        for (u, v) in g.edges() {
            d[u][v] = 1;
            d[v][u] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    #[test]
    fn ball_on_path() {
        assert_eq!(path(5).bfs_ball(2, 1).to_vec(), vec![1, 2, 3]);
        assert_eq!(path(5).bfs_ball(4, 0).to_vec(), vec![4]);
    }

    #[test]
    fn ball_on_grid_matches_all_pairs() {
        let g = grid(3);
        let d = all_pairs(&g);
        let ball = g.bfs_ball(4, 1);
        assert_eq!(ball.len(), 5);
        for r in 0..5 {
            let expect: Vec<usize> = (0..9).filter(|&v| d[4][v] <= r).collect();
            assert_eq!(g.bfs_ball(4, r).to_vec(), expect);
        }
    }

    #[test]
    fn induced_clique_and_cycle() {
        let (k3, map) = complete(4)
            .induced_subgraph(&VertexSet::from_iter_in(4, [0, 2, 3]))
            .unwrap();
        assert_eq!(k3, complete(3));
        assert_eq!(map, vec![0, 2, 3]);

        let c6 = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let (h, _) = c6.induced_subgraph(&VertexSet::from_iter_in(6, [0, 2, 4])).unwrap();
        assert_eq!(h.n(), 3);
        assert_eq!(h.m(), 0);
    }

    #[test]
    fn induced_empty_is_degenerate() {
        assert!(matches!(
            path(3).induced_subgraph(&VertexSet::new(3)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn components_examples() {
        let two = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let cs = two.components();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].to_vec(), vec![0, 1, 2]);
        assert_eq!(cs[1].to_vec(), vec![3, 4, 5]);
        assert_eq!(path(7).components().len(), 1);
        assert_eq!(Graph::empty(4).components().len(), 4);
    }

    #[test]
    fn read_examples() {
        assert_eq!(Graph::read_graph("3 2\n0 1\n1 2").unwrap(), path(3));
        assert_eq!(Graph::read_graph("1 0").unwrap().n(), 1);
        let e = Graph::read_graph("2 1\n0 0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
    }

    #[test]
    fn read_errors_carry_line_numbers() {
        let cases = [
            ("x 1\n", 1),
            ("3 1\n0 5\n", 2),
            ("3 2\n0 1\n0 1\n", 3),
            ("# c\n3 1\n\n1 0\n", 4),
            ("3 2\n0 1\n", 1),
        ];
        for (text, line) in cases {
            match Graph::read_graph(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_ignored() {
        let g = Graph::read_graph("# header\n3 1\n# edge\n0 2\n").unwrap();
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn vertex_set_ops() {
        let a = VertexSet::from_iter_in(130, [0, 64, 129]);
        let b = VertexSet::from_iter_in(130, [64, 100]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 64, 100, 129]);
        assert_eq!(a.intersection(&b).to_vec(), vec![64]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 129]);
        assert_eq!(a.complement().len(), 127);
        assert!(!a.is_disjoint(&b));
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0,64,129]");
    }
}
