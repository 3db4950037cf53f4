//! Tree decompositions: validation, exact treewidth for small graphs,
//! decompositions built from balanced separators, and the reverse direction.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::separator::{
    certify_balanced, optimal_balanced_separator, pack_around, prs_dichotomy, sweep_separator, trim, DichotomyResult,
    Separator,
};

/// Largest graph accepted by [`exact_treewidth`].
pub const EXACT_TW_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<VertexSet>,
    pub tree: Vec<(usize, usize)>,
}

/// Serialized as `{"bags":[[...],...],"tree":[[i,j],...],"width":w}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeDecompositionJson {
    pub bags: Vec<Vec<usize>>,
    pub tree: Vec<[usize; 2]>,
    pub width: i64,
}

impl TreeDecomposition {
    /// Largest bag size minus one; `-1` when there are no nonempty bags.
    pub fn width(&self) -> i64 {
        self.bags.iter().map(|b| b.len() as i64).max().unwrap_or(0) - 1
    }

    pub fn to_json(&self) -> TreeDecompositionJson {
        TreeDecompositionJson {
            bags: self.bags.iter().map(VertexSet::to_vec).collect(),
            tree: self.tree.iter().map(|&(i, j)| [i, j]).collect(),
            width: self.width(),
        }
    }

    pub fn from_json(n: usize, json: &TreeDecompositionJson) -> Result<Self> {
        let mut bags = Vec::with_capacity(json.bags.len());
        for bag in &json.bags {
            if let Some(&v) = bag.iter().find(|&&v| v >= n) {
                return Err(Error::Validation(format!("bag vertex {v} out of range")));
            }
            bags.push(VertexSet::from_iter_in(n, bag.iter().copied()));
        }
        Ok(TreeDecomposition {
            bags,
            tree: json.tree.iter().map(|e| (e[0], e[1])).collect(),
        })
    }

    fn tree_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(i, j) in &self.tree {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionViolation {
    NotATree(String),
    VertexUncovered(usize),
    EdgeUncovered(usize, usize),
    VertexBagsDisconnected(usize),
}

impl fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionViolation::NotATree(why) => write!(f, "bag graph is not a tree: {why}"),
            DecompositionViolation::VertexUncovered(v) => write!(f, "vertex {v} is in no bag"),
            DecompositionViolation::EdgeUncovered(u, v) => write!(f, "edge {u} {v} is uncovered"),
            DecompositionViolation::VertexBagsDisconnected(v) => {
                write!(f, "bags containing vertex {v} are disconnected")
            }
        }
    }
}

impl From<DecompositionViolation> for Error {
    fn from(v: DecompositionViolation) -> Self {
        Error::Validation(v.to_string())
    }
}

pub fn validate_decomposition(g: &Graph, td: &TreeDecomposition) -> std::result::Result<(), DecompositionViolation> {
    let k = td.bags.len();
    let n = g.n();
    if k == 0 {
        return match n {
            0 => Ok(()),
            _ => Err(DecompositionViolation::VertexUncovered(0)),
        };
    }
    if let Some(b) = td.bags.iter().position(|b| b.ground() != n) {
        return Err(DecompositionViolation::NotATree(format!(
            "bag {b} has the wrong ground set"
        )));
    }
    if td.tree.len() != k - 1 {
        return Err(DecompositionViolation::NotATree(format!(
            "{} bags but {} tree edges",
            k,
            td.tree.len()
        )));
    }
    if let Some(&(i, j)) = td.tree.iter().find(|&&(i, j)| i >= k || j >= k || i == j) {
        return Err(DecompositionViolation::NotATree(format!("bad tree edge {i} {j}")));
    }
    let adj = td.tree_adjacency();
    if reach(&adj, 0, |_| true).iter().filter(|&&r| r).count() != k {
        return Err(DecompositionViolation::NotATree("disconnected".into()));
    }
    for v in 0..n {
        let holders: Vec<usize> = (0..k).filter(|&b| td.bags[b].contains(v)).collect();
        let Some(&first) = holders.first() else {
            return Err(DecompositionViolation::VertexUncovered(v));
        };
        let seen = reach(&adj, first, |b| td.bags[b].contains(v));
        if holders.iter().any(|&b| !seen[b]) {
            return Err(DecompositionViolation::VertexBagsDisconnected(v));
        }
    }
    for (u, v) in g.edges() {
        if !td.bags.iter().any(|b| b.contains(u) && b.contains(v)) {
            return Err(DecompositionViolation::EdgeUncovered(u, v));
        }
    }
    Ok(())
}

fn reach(adj: &[Vec<usize>], start: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if !seen[y] && allowed(y) {
                seen[y] = true;
                q.push_back(y);
            }
        }
    }
    seen
}

/// Exact treewidth by dynamic programming over vertex subsets, for `n <= 16`.
///
/// `TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|)` where
/// `Q(S, v)` is the set of vertices outside `S + v` reachable from `v`
/// through `S`. The witness is built from the optimal elimination order.
pub fn exact_treewidth(g: &Graph) -> Result<(usize, TreeDecomposition)> {
    let n = g.n();
    if n > EXACT_TW_LIMIT {
        return Err(Error::size_limit("exact treewidth", n, EXACT_TW_LIMIT));
    }
    if n == 0 {
        return Err(Error::Degenerate("treewidth of the empty graph".into()));
    }
    let adj = g.adjacency_masks();
    let full = (1usize << n) - 1;
    // tw[s] stores TW(S) + 1 so that the empty set can hold "minus infinity" as 0.
    let mut tw = vec![u8::MAX; 1 << n];
    let mut choice = vec![0u8; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let q = q_size(&adj, rest as u64, v) as u8 + 1;
            let val = tw[rest].max(q);
            if val < tw[s] {
                tw[s] = val;
                choice[s] = v as u8;
            }
        }
    }
    // Last chosen vertex of the full set is eliminated last.
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = choice[s] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    let td = from_elimination_order(g, &order);
    let width = tw[full] as usize - 1;
    debug_assert_eq!(td.width(), width as i64);
    Ok((width, td))
}

fn q_size(adj: &[u64], s: u64, v: usize) -> u32 {
    let mut comp = 1u64 << v;
    let mut frontier = comp;
    while frontier != 0 {
        let mut next = 0;
        let mut b = frontier;
        while b != 0 {
            let u = b.trailing_zeros() as usize;
            b &= b - 1;
            next |= adj[u];
        }
        next &= s & !comp;
        comp |= next;
        frontier = next;
    }
    let mut nb = 0;
    let mut b = comp;
    while b != 0 {
        let u = b.trailing_zeros() as usize;
        b &= b - 1;
        nb |= adj[u];
    }
    (nb & !comp & !s).count_ones()
}

/// Decomposition from an elimination order: one bag per vertex holding the
/// vertex and its later neighbors in the filled graph.
pub fn from_elimination_order(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut nbrs: Vec<VertexSet> = (0..n)
        .map(|v| VertexSet::from_iter_in(n, g.neighbors(v).iter().copied()))
        .collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (i, &v) in order.iter().enumerate() {
        let later: Vec<usize> = nbrs[v].iter().filter(|&w| pos[w] > i).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
        parent[i] = later.iter().map(|&w| pos[w]).min();
        let mut bag = VertexSet::from_iter_in(n, later);
        bag.insert(v);
        bags.push(bag);
    }
    let mut tree = Vec::new();
    let mut last_root: Option<usize> = None;
    for (i, &par) in parent.iter().enumerate() {
        match par {
            Some(p) => tree.push((i, p)),
            None => {
                if let Some(r) = last_root {
                    tree.push((r, i));
                }
                last_root = Some(i);
            }
        }
    }
    TreeDecomposition { bags, tree }
}

/// Source of balanced separators for subgraphs.
pub trait SeparatorProvider {
    fn separate(&self, g: &Graph) -> Result<Separator>;
}

/// Exhaustive minimum-order separators.
pub struct OracleProvider;

impl SeparatorProvider for OracleProvider {
    fn separate(&self, g: &Graph) -> Result<Separator> {
        optimal_balanced_separator(g)
    }
}

/// BFS level sweeps.
pub struct SweepProvider;

impl SeparatorProvider for SweepProvider {
    fn separate(&self, g: &Graph) -> Result<Separator> {
        Ok(sweep_separator(g))
    }
}

/// Region growing; falls back to a sweep when the minor arm comes back.
pub struct DichotomyProvider {
    pub l: usize,
    pub h: usize,
    pub budget_const: f64,
}

impl SeparatorProvider for DichotomyProvider {
    fn separate(&self, g: &Graph) -> Result<Separator> {
        if g.n() < 2 {
            return Ok(Separator::trivial(g.n()));
        }
        match prs_dichotomy(g, self.l, self.h, self.budget_const)? {
            DichotomyResult::Separator { separator, .. } => Ok(separator),
            DichotomyResult::Minor(_) => Ok(sweep_separator(g)),
        }
    }
}

impl<F: Fn(&Graph) -> Result<Separator>> SeparatorProvider for F {
    fn separate(&self, g: &Graph) -> Result<Separator> {
        self(g)
    }
}

#[derive(Debug, Clone)]
pub struct SeparatorDecomposition {
    pub decomposition: TreeDecomposition,
    pub width: i64,
    /// `105 * k_hint`.
    pub reference_width: f64,
    /// Largest separator order returned by the provider.
    pub max_separator_order: usize,
}

/// Recursive decomposition: a part `P` with interface `I ⊇ N(P)` gets the bag
/// `I ∪ S` for a balanced separator `S` of `G[P]`; each component `C` of
/// `G[P] - S` recurses with interface `(I ∪ S) ∩ N(C)`.
pub fn decomposition_from_separators(
    g: &Graph,
    provider: &dyn SeparatorProvider,
    k_hint: f64,
) -> Result<SeparatorDecomposition> {
    let n = g.n();
    let mut bags: Vec<VertexSet> = Vec::new();
    let mut tree = Vec::new();
    let mut max_order = 0;
    // (part, interface, parent bag, depth)
    let mut stack: Vec<(VertexSet, VertexSet, Option<usize>, usize)> = Vec::new();
    let mut roots = Vec::new();
    for comp in g.components() {
        stack.push((comp, VertexSet::new(n), None, 0));
    }
    stack.reverse();
    while let Some((part, iface, parent, depth)) = stack.pop() {
        if depth > n {
            return Err(Error::InternalLimit("separator recursion exceeded n levels".into()));
        }
        let (sub, map) = g.induced_subgraph(&part)?;
        let sep = provider.separate(&sub)?;
        certify_balanced(&sub, &sep)?;
        let middle = VertexSet::from_iter_in(n, sep.middle().iter().map(|i| map[i]));
        max_order = max_order.max(middle.len());
        let bag = iface.union(&middle);
        let id = bags.len();
        bags.push(bag.clone());
        match parent {
            Some(p) => tree.push((p, id)),
            None => roots.push(id),
        }
        let rest = part.difference(&middle);
        let mut children: Vec<_> = g
            .components_within(&rest)
            .into_iter()
            .map(|c| {
                let next_iface = bag.intersection(&g.boundary(&c));
                (c, next_iface, Some(id), depth + 1)
            })
            .collect();
        if children.iter().any(|(c, ..)| c.len() >= part.len()) {
            return Err(Error::InternalLimit("separator failed to shrink a part".into()));
        }
        children.reverse();
        stack.extend(children);
    }
    for w in roots.windows(2) {
        tree.push((w[0], w[1]));
    }
    let td = TreeDecomposition { bags, tree };
    validate_decomposition(g, &td)?;
    Ok(SeparatorDecomposition {
        width: td.width(),
        decomposition: td,
        reference_width: 105.0 * k_hint,
        max_separator_order: max_order,
    })
}

/// Balanced separator whose middle is a single bag, so its order is at most
/// the width plus one.
///
/// Walks the tree from bag 0 toward any component of `G - bag` with more than
/// `n/2` vertices; ties go to the lower bag index.
pub fn separator_from_decomposition(g: &Graph, td: &TreeDecomposition) -> Result<Separator> {
    validate_decomposition(g, td)?;
    let n = g.n();
    if n == 0 {
        return Ok(Separator::trivial(0));
    }
    let adj = td.tree_adjacency();
    let mut cur = 0;
    let mut prev: Option<usize> = None;
    for _ in 0..=td.bags.len() {
        let bag = &td.bags[cur];
        let rest = bag.complement();
        let heavy = g.components_within(&rest).into_iter().find(|c| 2 * c.len() > n);
        let Some(heavy) = heavy else {
            let sep = trim(g, &pack_around(g, bag));
            certify_balanced(g, &sep)?;
            return Ok(sep);
        };
        let next = adj[cur].iter().copied().find(|&y| {
            let side = reach(&adj, y, |b| b != cur);
            (0..td.bags.len()).any(|b| side[b] && b != cur && !td.bags[b].is_disjoint(&heavy))
        });
        match next {
            Some(y) if Some(y) != prev => {
                prev = Some(cur);
                cur = y;
            }
            _ => return Err(Error::InternalLimit("centroid bag walk did not converge".into())),
        }
    }
    Err(Error::InternalLimit("centroid bag walk did not converge".into()))
}

/// `alpha / (3 (1 + alpha)) * n - 1`: treewidth lower bound for an
/// `alpha`-expander on `n` vertices.
pub fn expander_tw_lower_bound(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(alpha / (3.0 * (1.0 + alpha)) * n as f64 - 1.0)
}
