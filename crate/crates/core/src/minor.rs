//! Shallow minors: branch models, contraction, and density of `r`-minors.
//!
//! The radius of a branch set is measured inside the subgraph it induces,
//! from its declared center. This is the stricter of the two readings found
//! in the literature (the other measures distance in the host graph).

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::rng;
use crate::graph::{Graph, GraphBuilder, VertexSet};

/// Largest graph for `nabla_exact` at radius zero.
pub const NABLA_EXACT_R0_LIMIT: usize = 16;
/// Largest graph for `nabla_exact` at positive radius.
pub const NABLA_EXACT_LIMIT: usize = 12;
/// Largest graph for [`exact_shallow_clique`].
pub const CLIQUE_ORACLE_LIMIT: usize = 12;

/// Witness of a depth-`depth` minor: disjoint branch sets with centers.
/// Serialized as `{"depth":r,"sets":[[...],...],"centers":[...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchModel {
    pub depth: usize,
    pub sets: Vec<Vec<usize>>,
    pub centers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelViolation {
    CenterCount { sets: usize, centers: usize },
    EmptySet(usize),
    OutOfRange { set: usize, vertex: usize },
    Overlap { vertex: usize },
    CenterOutside { set: usize, center: usize },
    Radius { set: usize, vertex: usize },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::CenterCount { sets, centers } => write!(f, "{sets} branch sets but {centers} centers"),
            ModelViolation::EmptySet(i) => write!(f, "branch set {i} is empty"),
            ModelViolation::OutOfRange { set, vertex } => write!(f, "branch set {set} has out-of-range vertex {vertex}"),
            ModelViolation::Overlap { vertex } => write!(f, "vertex {vertex} lies in two branch sets (disjointness)"),
            ModelViolation::CenterOutside { set, center } => {
                write!(f, "center {center} is not in branch set {set}")
            }
            ModelViolation::Radius { set, vertex } => write!(
                f,
                "vertex {vertex} of branch set {set} is farther than the depth from its center inside the set (connectivity/radius)"
            ),
        }
    }
}

impl From<ModelViolation> for Error {
    fn from(v: ModelViolation) -> Self {
        Error::Validation(v.to_string())
    }
}

impl BranchModel {
    pub fn identity(g: &Graph) -> Self {
        BranchModel {
            depth: 0,
            sets: (0..g.n()).map(|v| vec![v]).collect(),
            centers: (0..g.n()).collect(),
        }
    }

    /// Disjointness, connectivity and radius, each checked by BFS from the
    /// center inside the branch set.
    pub fn validate(&self, host: &Graph) -> std::result::Result<(), ModelViolation> {
        if self.sets.len() != self.centers.len() {
            return Err(ModelViolation::CenterCount {
                sets: self.sets.len(),
                centers: self.centers.len(),
            });
        }
        let n = host.n();
        let mut owner = vec![usize::MAX; n];
        for (i, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(ModelViolation::EmptySet(i));
            }
            for &v in set {
                if v >= n {
                    return Err(ModelViolation::OutOfRange { set: i, vertex: v });
                }
                if owner[v] != usize::MAX {
                    return Err(ModelViolation::Overlap { vertex: v });
                }
                owner[v] = i;
            }
        }
        for (i, set) in self.sets.iter().enumerate() {
            let c = self.centers[i];
            if c >= n || owner[c] != i {
                return Err(ModelViolation::CenterOutside { set: i, center: c });
            }
            let inside = VertexSet::from_iter_in(n, set.iter().copied());
            let dist = host.distances_within(c, Some(&inside));
            if let Some(&v) = set.iter().find(|&&v| dist[v] > self.depth) {
                return Err(ModelViolation::Radius { set: i, vertex: v });
            }
        }
        Ok(())
    }

    /// Whether every pair of branch sets is joined by a host edge.
    pub fn is_clique_model(&self, host: &Graph) -> bool {
        let sets: Vec<VertexSet> = self
            .sets
            .iter()
            .map(|s| VertexSet::from_iter_in(host.n(), s.iter().copied()))
            .collect();
        let bounds: Vec<VertexSet> = sets.iter().map(|s| host.boundary(s)).collect();
        (0..sets.len()).all(|i| (i + 1..sets.len()).all(|j| !bounds[i].is_disjoint(&sets[j])))
    }

    fn canonical(mut self) -> Self {
        for s in &mut self.sets {
            s.sort_unstable();
        }
        let mut pairs: Vec<(Vec<usize>, usize)> = self.sets.into_iter().zip(self.centers).collect();
        pairs.sort();
        let (sets, centers) = pairs.into_iter().unzip();
        BranchModel {
            depth: self.depth,
            sets,
            centers,
        }
    }
}

/// Exact edge density `edges / vertices`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Density {
    pub edges: usize,
    pub vertices: usize,
}

impl Density {
    pub fn new(edges: usize, vertices: usize) -> Self {
        Density { edges, vertices }
    }

    pub fn value(&self) -> f64 {
        if self.vertices == 0 {
            0.0
        } else {
            self.edges as f64 / self.vertices as f64
        }
    }
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Density {}

impl PartialOrd for Density {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Density {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.edges as u128 * other.vertices.max(1) as u128;
        let b = other.edges as u128 * self.vertices.max(1) as u128;
        a.cmp(&b)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.edges, self.vertices)
    }
}

#[derive(Debug, Clone)]
pub struct MinorResult {
    pub minor: Graph,
    pub model: BranchModel,
    pub density: Density,
}

/// Contracts each branch set to a vertex; parallel edges collapse.
///
/// With `keep_all_edges` the minor is the full contraction. Without it, the
/// minor is cut down to its densest induced subgraph and the branch sets of
/// removed vertices are dropped from the model.
pub fn contract_model(host: &Graph, model: &BranchModel, keep_all_edges: bool) -> Result<MinorResult> {
    model.validate(host)?;
    let full = contract_unchecked(host, model);
    if keep_all_edges {
        let density = Density::new(full.m(), full.n());
        return Ok(MinorResult {
            minor: full,
            model: model.clone(),
            density,
        });
    }
    let keep = densest_subgraph(&full);
    let sub_model = BranchModel {
        depth: model.depth,
        sets: keep.iter().map(|i| model.sets[i].clone()).collect(),
        centers: keep.iter().map(|i| model.centers[i]).collect(),
    };
    let (minor, _) = full.induced_subgraph(&keep)?;
    let density = Density::new(minor.m(), minor.n());
    Ok(MinorResult {
        minor,
        model: sub_model,
        density,
    })
}

fn contract_unchecked(host: &Graph, model: &BranchModel) -> Graph {
    let mut owner = vec![usize::MAX; host.n()];
    for (i, set) in model.sets.iter().enumerate() {
        for &v in set {
            owner[v] = i;
        }
    }
    let mut b = GraphBuilder::new(model.sets.len());
    for (u, v) in host.edges() {
        let (a, c) = (owner[u], owner[v]);
        if a != usize::MAX && c != usize::MAX && a != c {
            b.add_edge_dedup(a, c);
        }
    }
    b.build()
}

/// Vertex set of maximum edge density (exact). Returns a single vertex for
/// edgeless graphs.
pub fn densest_subgraph(g: &Graph) -> VertexSet {
    let n = g.n();
    if n == 0 {
        return VertexSet::new(0);
    }
    if g.m() == 0 {
        return VertexSet::from_iter_in(n, [0]);
    }
    // Dinkelbach iteration on max e(S) - (p/q)|S| via Goldberg's cut network.
    let mut best = VertexSet::full(n);
    let mut dens = Density::new(g.m(), n);
    loop {
        let s = goldberg_maximiser(g, dens.edges as i64, dens.vertices as i64);
        if s.is_empty() {
            return best;
        }
        let d = Density::new(g.edges_within(&s), s.len());
        if d <= dens {
            return best;
        }
        dens = d;
        best = s;
    }
}

/// A maximiser of `q e(S) - p |S|` (empty when the maximum is not positive).
fn goldberg_maximiser(g: &Graph, p: i64, q: i64) -> VertexSet {
    let n = g.n();
    let m = g.m() as i64;
    let (src, sink) = (n, n + 1);
    let mut net = FlowNet::new(n + 2);
    for v in 0..n {
        net.add(src, v, m * q);
        net.add(v, sink, m * q + 2 * p - g.degree(v) as i64 * q);
    }
    for (u, v) in g.edges() {
        net.add(u, v, q);
        net.add(v, u, q);
    }
    let flow = net.max_flow(src, sink);
    if flow >= m * q * n as i64 {
        return VertexSet::new(n);
    }
    let side = net.source_side(src);
    VertexSet::from_iter_in(n, (0..n).filter(|&v| side[v]))
}

/// Dinic max flow on integer capacities.
struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    it: Vec<usize>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            it: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: i64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.it[u] < self.head[u].len() {
            let e = self.head[u][self.it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[e]));
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.it[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.it.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }

    fn source_side(&mut self, s: usize) -> Vec<bool> {
        self.bfs(s);
        self.level.iter().map(|&l| l >= 0).collect()
    }
}

/// Branch-set candidates for the exhaustive oracles: for each vertex mask,
/// a center realising radius at most `r` inside the mask, if any.
fn radius_table(g: &Graph, r: usize) -> Vec<Option<usize>> {
    let n = g.n();
    let adj = g.adjacency_masks();
    let mut table = vec![None; 1usize << n];
    for mask in 1u64..(1u64 << n) {
        let mut bits = mask;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let mut reached = 1u64 << c;
            for _ in 0..r {
                let mut next = reached;
                let mut b = reached;
                while b != 0 {
                    let v = b.trailing_zeros() as usize;
                    b &= b - 1;
                    next |= adj[v] & mask;
                }
                if next == reached {
                    break;
                }
                reached = next;
            }
            if reached == mask {
                table[mask as usize] = Some(c);
                break;
            }
        }
    }
    table
}

fn neighbourhood_mask(adj: &[u64], mask: u64) -> u64 {
    let mut out = 0;
    let mut b = mask;
    while b != 0 {
        let v = b.trailing_zeros() as usize;
        b &= b - 1;
        out |= adj[v];
    }
    out & !mask
}

/// Exact `∇_r(g)` with a witness. Radius zero: densest subgraph by subset
/// enumeration (`n <= 16`). Positive radius: every family of disjoint valid
/// branch sets (`n <= 12`).
pub fn nabla_exact(g: &Graph, r: usize) -> Result<MinorResult> {
    let n = g.n();
    if n == 0 {
        return Err(Error::Degenerate("nabla of the empty graph".into()));
    }
    if r == 0 {
        if n > NABLA_EXACT_R0_LIMIT {
            return Err(Error::size_limit("exact nabla_0", n, NABLA_EXACT_R0_LIMIT));
        }
        let mut best = (Density::new(0, 1), 1u64);
        for mask in 1u64..(1u64 << n) {
            let s = VertexSet::from_mask(n, mask);
            let d = Density::new(g.edges_within(&s), s.len());
            if d > best.0 {
                best = (d, mask);
            }
        }
        let set = VertexSet::from_mask(n, best.1);
        let model = BranchModel {
            depth: 0,
            sets: set.iter().map(|v| vec![v]).collect(),
            centers: set.to_vec(),
        };
        return contract_model(g, &model, true);
    }
    if n > NABLA_EXACT_LIMIT {
        return Err(Error::size_limit("exact nabla_r", n, NABLA_EXACT_LIMIT));
    }
    let table = radius_table(g, r);
    let adj = g.adjacency_masks();
    let mut by_low: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
    for mask in 1u64..(1u64 << n) {
        if table[mask as usize].is_some() {
            by_low[mask.trailing_zeros() as usize].push((mask, neighbourhood_mask(&adj, mask)));
        }
    }
    let mut search = BlockSearch {
        by_low: &by_low,
        blocks: Vec::new(),
        best: (Density::new(0, 1), vec![1]),
    };
    search.run((1u64 << n) - 1, 0);
    let blocks = search.best.1;
    let model = BranchModel {
        depth: r,
        sets: blocks.iter().map(|&b| VertexSet::from_mask(n, b).to_vec()).collect(),
        centers: blocks.iter().map(|&b| table[b as usize].expect("valid")).collect(),
    };
    contract_model(g, &model, true)
}

/// Depth-first search over vertex-disjoint families of valid branch sets.
/// The lowest undecided vertex is either deleted or covered by a valid set
/// whose lowest vertex it is.
struct BlockSearch<'a> {
    by_low: &'a [Vec<(u64, u64)>],
    blocks: Vec<(u64, u64)>,
    best: (Density, Vec<u64>),
}

impl BlockSearch<'_> {
    fn run(&mut self, remaining: u64, edges: usize) {
        let k = self.blocks.len();
        if remaining == 0 {
            let d = Density::new(edges, k);
            if k > 0 && d > self.best.0 {
                self.best = (d, self.blocks.iter().map(|b| b.0).collect());
            }
            return;
        }
        if !self.can_improve(edges, k, remaining.count_ones() as usize) {
            return;
        }
        let v = remaining.trailing_zeros() as usize;
        self.run(remaining & !(1 << v), edges);
        for &(mask, nb) in &self.by_low[v] {
            if mask & !remaining != 0 {
                continue;
            }
            let gained = self.blocks.iter().filter(|b| b.0 & nb != 0).count();
            self.blocks.push((mask, nb));
            self.run(remaining & !mask, edges + gained);
            self.blocks.pop();
        }
    }

    /// Whether adding `x <= free` more sets, each adjacent to all others,
    /// could beat the best density.
    fn can_improve(&self, edges: usize, k: usize, free: usize) -> bool {
        (0..=free).any(|x| {
            let total = edges + x * k + x * x.saturating_sub(1) / 2;
            k + x > 0 && Density::new(total, k + x) > self.best.0
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    pub restarts: usize,
    pub max_passes: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            restarts: 200,
            max_passes: 50,
        }
    }
}

/// Lower bound on `∇_r(g)` from randomized ball carving and hill climbing.
/// The result is certified by [`contract_model`].
pub fn nabla_greedy(g: &Graph, r: usize, seed: u64) -> Result<MinorResult> {
    nabla_greedy_with(g, r, seed, GreedyOptions::default())
}

pub fn nabla_greedy_with(g: &Graph, r: usize, seed: u64, opts: GreedyOptions) -> Result<MinorResult> {
    if g.n() == 0 {
        return Err(Error::Degenerate("nabla of the empty graph".into()));
    }
    let mut best = {
        let mut id = BranchModel::identity(g);
        id.depth = r;
        contract_model(g, &id, false)?
    };
    for restart in 1..=opts.restarts {
        let mut rng = rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64));
        let mut state = Carving::random(g, r, &mut rng);
        state.climb(&mut rng, opts.max_passes);
        let model = state.into_model();
        if model.sets.is_empty() {
            continue;
        }
        let cand = contract_model(g, &model, false)?;
        let better = match cand.density.cmp(&best.density) {
            Ordering::Greater => true,
            Ordering::Equal => cand.model.clone().canonical().sets < best.model.clone().canonical().sets,
            Ordering::Less => false,
        };
        if better {
            best = cand;
        }
    }
    best.model = best.model.canonical();
    let (minor, density) = {
        let m = contract_unchecked(g, &best.model);
        let d = Density::new(m.m(), m.n());
        (m, d)
    };
    best.minor = minor;
    best.density = density;
    Ok(best)
}

/// Partition of some host vertices into branch sets, with the contracted
/// minor maintained incrementally.
struct Carving<'g> {
    g: &'g Graph,
    r: usize,
    owner: Vec<Option<usize>>,
    sets: Vec<Vec<usize>>,
    centers: Vec<usize>,
    alive: Vec<bool>,
    nbrs: Vec<BTreeSet<usize>>,
    edges: usize,
    count: usize,
}

impl<'g> Carving<'g> {
    fn random(g: &'g Graph, r: usize, rng: &mut impl Rng) -> Self {
        let n = g.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let jitter: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0).collect();
        order.sort_by(|&a, &b| {
            let ka = g.degree(a) as f64 + jitter[a];
            let kb = g.degree(b) as f64 + jitter[b];
            kb.partial_cmp(&ka).unwrap_or(Ordering::Equal)
        });
        let keep_prob = rng.gen_range(0.3..=1.0);
        let mut owner = vec![None; n];
        let mut sets = Vec::new();
        let mut centers = Vec::new();
        for &c in &order {
            if owner[c].is_some() {
                continue;
            }
            let radius = rng.gen_range(0..=r);
            let idx = sets.len();
            let mut set = vec![c];
            owner[c] = Some(idx);
            let mut frontier = vec![c];
            for _ in 0..radius {
                let mut next = Vec::new();
                for &u in &frontier {
                    for &w in g.neighbors(u) {
                        if owner[w].is_none() && rng.gen_bool(keep_prob) {
                            owner[w] = Some(idx);
                            set.push(w);
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
            sets.push(set);
            centers.push(c);
        }
        let mut s = Carving {
            g,
            r,
            owner,
            alive: vec![true; sets.len()],
            nbrs: vec![BTreeSet::new(); sets.len()],
            sets,
            centers,
            edges: 0,
            count: 0,
        };
        s.rebuild();
        s
    }

    fn rebuild(&mut self) {
        for ns in &mut self.nbrs {
            ns.clear();
        }
        for (u, v) in self.g.edges() {
            if let (Some(a), Some(b)) = (self.owner[u], self.owner[v]) {
                if a != b {
                    self.nbrs[a].insert(b);
                    self.nbrs[b].insert(a);
                }
            }
        }
        self.count = self.alive.iter().filter(|&&a| a).count();
        self.edges = self.nbrs.iter().map(BTreeSet::len).sum::<usize>() / 2;
    }

    /// `(e1, v1)` strictly denser than `(e0, v0)`.
    fn denser(e1: usize, v1: usize, e0: usize, v0: usize) -> bool {
        v1 > 0 && (v0 == 0 || e1 * v0 > e0 * v1)
    }

    /// Best center of `set` if its radius inside itself is at most `r`.
    fn center_of(&self, set: &[usize]) -> Option<usize> {
        let inside = VertexSet::from_iter_in(self.g.n(), set.iter().copied());
        set.iter()
            .copied()
            .map(|c| {
                let dist = self.g.distances_within(c, Some(&inside));
                (set.iter().map(|&v| dist[v]).max().unwrap_or(0), c)
            })
            .filter(|&(ecc, _)| ecc <= self.r)
            .min()
            .map(|(_, c)| c)
    }

    fn climb(&mut self, rng: &mut impl Rng, max_passes: usize) {
        for _ in 0..max_passes {
            let mut improved = false;
            let mut ids: Vec<usize> = (0..self.sets.len()).filter(|&i| self.alive[i]).collect();
            ids.shuffle(rng);
            for i in ids {
                if !self.alive[i] {
                    continue;
                }
                improved |= self.try_discard(i) || self.try_merge(i) || self.try_absorb(i);
            }
            improved |= self.try_new_singletons();
            if !improved {
                break;
            }
        }
    }

    fn try_discard(&mut self, i: usize) -> bool {
        let deg = self.nbrs[i].len();
        if self.count <= 1 || !Self::denser(self.edges - deg, self.count - 1, self.edges, self.count) {
            return false;
        }
        for &v in &self.sets[i] {
            self.owner[v] = None;
        }
        for j in std::mem::take(&mut self.nbrs[i]) {
            self.nbrs[j].remove(&i);
        }
        self.alive[i] = false;
        self.sets[i].clear();
        self.edges -= deg;
        self.count -= 1;
        true
    }

    fn try_merge(&mut self, i: usize) -> bool {
        if self.r == 0 {
            return false;
        }
        let cands: Vec<usize> = self.nbrs[i].iter().copied().collect();
        for j in cands {
            let common = self.nbrs[i].intersection(&self.nbrs[j]).count();
            let e1 = self.edges - 1 - common;
            if !Self::denser(e1, self.count - 1, self.edges, self.count) {
                continue;
            }
            let mut union = self.sets[i].clone();
            union.extend_from_slice(&self.sets[j]);
            let Some(center) = self.center_of(&union) else {
                continue;
            };
            for &v in &self.sets[j] {
                self.owner[v] = Some(i);
            }
            let moved = std::mem::take(&mut self.nbrs[j]);
            for k in moved {
                self.nbrs[k].remove(&j);
                if k != i {
                    self.nbrs[k].insert(i);
                    self.nbrs[i].insert(k);
                }
            }
            self.nbrs[i].remove(&j);
            self.sets[i] = union;
            self.sets[j].clear();
            self.centers[i] = center;
            self.alive[j] = false;
            self.edges = e1;
            self.count -= 1;
            return true;
        }
        false
    }

    fn try_absorb(&mut self, i: usize) -> bool {
        let mut changed = false;
        let free: BTreeSet<usize> = self.sets[i]
            .iter()
            .flat_map(|&v| self.g.neighbors(v).iter().copied())
            .filter(|&w| self.owner[w].is_none())
            .collect();
        for w in free {
            let gained: BTreeSet<usize> = self
                .g
                .neighbors(w)
                .iter()
                .filter_map(|&x| self.owner[x])
                .filter(|&k| k != i && !self.nbrs[i].contains(&k))
                .collect();
            if gained.is_empty() {
                continue;
            }
            let mut grown = self.sets[i].clone();
            grown.push(w);
            let inside = VertexSet::from_iter_in(self.g.n(), grown.iter().copied());
            let dist = self.g.distances_within(self.centers[i], Some(&inside));
            if dist[w] > self.r {
                continue;
            }
            self.owner[w] = Some(i);
            self.sets[i] = grown;
            for k in gained {
                self.nbrs[i].insert(k);
                self.nbrs[k].insert(i);
                self.edges += 1;
            }
            changed = true;
        }
        changed
    }

    fn try_new_singletons(&mut self) -> bool {
        let mut changed = false;
        for w in 0..self.g.n() {
            if self.owner[w].is_some() {
                continue;
            }
            let adj: BTreeSet<usize> = self.g.neighbors(w).iter().filter_map(|&x| self.owner[x]).collect();
            if !Self::denser(self.edges + adj.len(), self.count + 1, self.edges, self.count) {
                continue;
            }
            let idx = self.sets.len();
            self.sets.push(vec![w]);
            self.centers.push(w);
            self.alive.push(true);
            self.nbrs.push(BTreeSet::new());
            self.owner[w] = Some(idx);
            for k in adj {
                self.nbrs[idx].insert(k);
                self.nbrs[k].insert(idx);
                self.edges += 1;
            }
            self.count += 1;
            changed = true;
        }
        changed
    }

    fn into_model(self) -> BranchModel {
        let mut sets = Vec::new();
        let mut centers = Vec::new();
        for i in 0..self.sets.len() {
            if self.alive[i] && !self.sets[i].is_empty() {
                sets.push(self.sets[i].clone());
                centers.push(self.centers[i]);
            }
        }
        BranchModel {
            depth: self.r,
            sets,
            centers,
        }
        .canonical()
    }
}

/// Why a clique search gave up. Not a proof that no model exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueSearchFailure {
    pub t: usize,
    pub depth: usize,
    pub attempts: usize,
    /// Largest clique model size reached by any attempt.
    pub best_partial: usize,
}

pub const CLIQUE_ATTEMPTS: usize = 64;

/// Best-effort search for a model of `K_t` whose branch sets have radius at
/// most `depth`.
///
/// Cycles through three strategies: growing branch sets one at a time as
/// shortest path trees that touch every earlier set, carving the graph into
/// random small balls, and contracting random matchings. The last two look
/// for a `t`-clique in the contraction.
pub fn greedy_shallow_clique(
    g: &Graph,
    t: usize,
    depth: usize,
    seed: u64,
) -> std::result::Result<BranchModel, CliqueSearchFailure> {
    let mut best_partial = 0;
    if t == 0 || t > g.n() {
        return Err(CliqueSearchFailure {
            t,
            depth,
            attempts: 0,
            best_partial,
        });
    }
    for attempt in 0..CLIQUE_ATTEMPTS {
        let mut r = rng(seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(attempt as u64));
        let found = match attempt % 3 {
            0 => grow_clique_model(g, t, depth, attempt == 0, &mut r),
            1 => carve_clique_model(g, t, depth, &mut r),
            _ => matching_clique_model(g, t, depth, &mut r),
        };
        match found {
            Ok(model) => {
                debug_assert!(model.validate(g).is_ok() && model.is_clique_model(g));
                return Ok(model.canonical());
            }
            Err(k) => best_partial = best_partial.max(k),
        }
    }
    Err(CliqueSearchFailure {
        t,
        depth,
        attempts: CLIQUE_ATTEMPTS,
        best_partial,
    })
}

fn grow_clique_model(
    g: &Graph,
    t: usize,
    depth: usize,
    by_degree: bool,
    rng: &mut impl Rng,
) -> std::result::Result<BranchModel, usize> {
    let n = g.n();
    let mut roots: Vec<usize> = (0..n).collect();
    roots.shuffle(rng);
    if by_degree {
        roots.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    }
    let mut used = VertexSet::new(n);
    let mut sets: Vec<VertexSet> = Vec::new();
    let mut centers = Vec::new();
    while sets.len() < t {
        let free = used.complement();
        let targets: Vec<VertexSet> = sets.iter().map(|s| g.boundary(s).intersection(&free)).collect();
        let mut best: Option<VertexSet> = None;
        let mut best_root = 0;
        for &x in roots.iter().filter(|&&x| !used.contains(x)).take(96) {
            let (dist, parent) = bfs_parents(g, x, &free, depth);
            let mut tree = VertexSet::new(n);
            tree.insert(x);
            let mut ok = true;
            for tg in &targets {
                let Some(y) = tg.iter().filter(|&y| dist[y] <= depth).min_by_key(|&y| (dist[y], y)) else {
                    ok = false;
                    break;
                };
                let mut v = y;
                while v != x {
                    tree.insert(v);
                    v = parent[v];
                }
            }
            if ok && best.as_ref().is_none_or(|b| tree.len() < b.len()) {
                best = Some(tree);
                best_root = x;
            }
        }
        match best {
            Some(tree) => {
                used.union_with(&tree);
                sets.push(tree);
                centers.push(best_root);
            }
            None => return Err(sets.len()),
        }
    }
    Ok(BranchModel {
        depth,
        sets: sets.iter().map(VertexSet::to_vec).collect(),
        centers,
    })
}

fn bfs_parents(g: &Graph, root: usize, within: &VertexSet, max: usize) -> (Vec<usize>, Vec<usize>) {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    dist[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        if dist[u] == max {
            continue;
        }
        for &w in g.neighbors(u) {
            if within.contains(w) && dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = u;
                q.push_back(w);
            }
        }
    }
    (dist, parent)
}

fn carve_clique_model(
    g: &Graph,
    t: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> std::result::Result<BranchModel, usize> {
    let mut carving = Carving::random(g, depth, rng);
    carving.climb(rng, 0);
    let model = carving.into_model();
    let minor = contract_unchecked(g, &model);
    let clique = max_clique(&minor, t);
    if clique.len() >= t {
        let pick = &clique[..t];
        Ok(BranchModel {
            depth,
            sets: pick.iter().map(|&i| model.sets[i].clone()).collect(),
            centers: pick.iter().map(|&i| model.centers[i]).collect(),
        })
    } else {
        Err(clique.len())
    }
}

/// Contracts a random maximal matching (for positive depth) and searches the
/// result for a clique.
fn matching_clique_model(
    g: &Graph,
    t: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> std::result::Result<BranchModel, usize> {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut matched = vec![false; n];
    let mut sets = Vec::new();
    let mut centers = Vec::new();
    for &u in &order {
        if matched[u] {
            continue;
        }
        matched[u] = true;
        let mut set = vec![u];
        if depth > 0 {
            let free: Vec<usize> = g.neighbors(u).iter().copied().filter(|&w| !matched[w]).collect();
            if let Some(&w) = free.choose(rng) {
                matched[w] = true;
                set.push(w);
            }
        }
        sets.push(set);
        centers.push(u);
    }
    let model = BranchModel { depth, sets, centers };
    let minor = contract_unchecked(g, &model);
    let clique = max_clique(&minor, t);
    if clique.len() >= t {
        Ok(BranchModel {
            depth,
            sets: clique[..t].iter().map(|&i| model.sets[i].clone()).collect(),
            centers: clique[..t].iter().map(|&i| model.centers[i]).collect(),
        })
    } else {
        Err(clique.len())
    }
}

/// Bron–Kerbosch with pivoting; stops once a clique of size `enough` is found.
fn max_clique(g: &Graph, enough: usize) -> Vec<usize> {
    fn bk(
        g: &Graph,
        r: &mut Vec<usize>,
        p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        best: &mut Vec<usize>,
        enough: usize,
    ) {
        if best.len() >= enough {
            return;
        }
        if p.is_empty() {
            if x.is_empty() && r.len() > best.len() {
                *best = r.clone();
            }
            return;
        }
        if r.len() + p.len() <= best.len() {
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| g.neighbors(u).iter().filter(|w| p.contains(w)).count())
            .expect("p nonempty");
        let cands: Vec<usize> = p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
        let mut p = p;
        for v in cands {
            let nv: BTreeSet<usize> = g.neighbors(v).iter().copied().collect();
            r.push(v);
            bk(
                g,
                r,
                p.intersection(&nv).copied().collect(),
                x.intersection(&nv).copied().collect(),
                best,
                enough,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
    let mut best = Vec::new();
    bk(
        g,
        &mut Vec::new(),
        (0..g.n()).collect(),
        BTreeSet::new(),
        &mut best,
        enough,
    );
    best
}

/// Exhaustive search for a `K_t` model of the given depth, for `n <= 12`.
pub fn exact_shallow_clique(g: &Graph, t: usize, depth: usize) -> Result<Option<BranchModel>> {
    let n = g.n();
    if n > CLIQUE_ORACLE_LIMIT {
        return Err(Error::size_limit("exact shallow clique", n, CLIQUE_ORACLE_LIMIT));
    }
    if t == 0 {
        return Ok(Some(BranchModel {
            depth,
            sets: vec![],
            centers: vec![],
        }));
    }
    let table = radius_table(g, depth);
    let adj = g.adjacency_masks();
    // Candidate sets grouped by lowest vertex; sets are chosen with
    // increasing lowest vertex to skip permutations.
    let mut by_low: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
    for mask in 1u64..(1u64 << n) {
        if table[mask as usize].is_some() {
            by_low[mask.trailing_zeros() as usize].push((mask, neighbourhood_mask(&adj, mask)));
        }
    }
    fn search(
        by_low: &[Vec<(u64, u64)>],
        n: usize,
        t: usize,
        low: usize,
        used: u64,
        chosen: &mut Vec<(u64, u64)>,
    ) -> bool {
        if chosen.len() == t {
            return true;
        }
        let remaining = n - (used.count_ones() as usize);
        if remaining < t - chosen.len() {
            return false;
        }
        for l in low..n {
            if used >> l & 1 == 1 {
                continue;
            }
            for &(mask, nb) in &by_low[l] {
                if mask & used != 0 || !chosen.iter().all(|&(_, cn)| cn & mask != 0) {
                    continue;
                }
                chosen.push((mask, nb));
                if search(by_low, n, t, l + 1, used | mask, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if !search(&by_low, n, t, 0, 0, &mut chosen) {
        return Ok(None);
    }
    Ok(Some(BranchModel {
        depth,
        sets: chosen
            .iter()
            .map(|&(m, _)| VertexSet::from_mask(n, m).to_vec())
            .collect(),
        centers: chosen.iter().map(|&(m, _)| table[m as usize].expect("valid")).collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{binary_tree, complete, cycle, gnp, grid, path, petersen, random_tree};

    fn spokes() -> BranchModel {
        BranchModel {
            depth: 1,
            sets: (0..5).map(|i| vec![i, i + 5]).collect(),
            centers: (0..5).collect(),
        }
    }

    #[test]
    fn contract_cycle_pairs() {
        let c6 = cycle(6).unwrap();
        let m = BranchModel {
            depth: 1,
            sets: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            centers: vec![0, 2, 4],
        };
        let r = contract_model(&c6, &m, true).unwrap();
        assert_eq!(r.minor, complete(3));
        assert_eq!(r.density, Density::new(1, 1));
    }

    #[test]
    fn contract_identity() {
        let g = gnp(10, 0.3, 4);
        let r = contract_model(&g, &BranchModel::identity(&g), true).unwrap();
        assert_eq!(r.minor, g);
        assert_eq!(r.density, Density::new(g.m(), 10));
    }

    #[test]
    fn contract_petersen_spokes() {
        let g = petersen();
        // Independent adjacency check between spoke pairs.
        for i in 0..5 {
            for j in i + 1..5 {
                let joined = [i, i + 5].iter().any(|&u| [j, j + 5].iter().any(|&v| g.has_edge(u, v)));
                assert!(joined, "{i} {j}");
            }
        }
        let r = contract_model(&g, &spokes(), true).unwrap();
        assert_eq!(r.minor, complete(5));
        assert_eq!(r.density.value(), 2.0);
    }

    #[test]
    fn contract_rejects_invalid_models() {
        let g = path(5);
        let overlap = BranchModel {
            depth: 1,
            sets: vec![vec![0, 1], vec![1, 2]],
            centers: vec![0, 2],
        };
        let e = contract_model(&g, &overlap, true).unwrap_err();
        assert!(e.to_string().contains("disjointness"), "{e}");
        let too_deep = BranchModel {
            depth: 1,
            sets: vec![vec![0, 1, 2]],
            centers: vec![0],
        };
        assert!(contract_model(&g, &too_deep, true)
            .unwrap_err()
            .to_string()
            .contains("radius"));
        let disconnected = BranchModel {
            depth: 4,
            sets: vec![vec![0, 2]],
            centers: vec![0],
        };
        assert!(contract_model(&g, &disconnected, true).is_err());
        let bad_center = BranchModel {
            depth: 1,
            sets: vec![vec![0, 1]],
            centers: vec![3],
        };
        assert!(contract_model(&g, &bad_center, true).is_err());
    }

    #[test]
    fn prune_keeps_densest_part() {
        // K_4 with a pendant path: densest part is the K_4.
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5)]).unwrap();
        let r = contract_model(&g, &BranchModel::identity(&g), false).unwrap();
        assert_eq!(r.density, Density::new(6, 4));
        assert_eq!(r.model.sets, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn densest_matches_enumeration() {
        for seed in 0..30 {
            let g = gnp(11, 0.35, seed);
            let got = densest_subgraph(&g);
            let got_d = Density::new(g.edges_within(&got), got.len());
            let mut best = Density::new(0, 1);
            for mask in 1u64..(1 << 11) {
                let s = VertexSet::from_mask(11, mask);
                best = best.max(Density::new(g.edges_within(&s), s.len()));
            }
            assert_eq!(got_d, best, "seed {seed}");
        }
    }

    #[test]
    fn exact_examples() {
        assert_eq!(nabla_exact(&complete(5), 0).unwrap().density, Density::new(2, 1));
        let c9 = cycle(9).unwrap();
        let r = nabla_exact(&c9, 1).unwrap();
        assert_eq!(r.density, Density::new(1, 1));
        r.model.validate(&c9).unwrap();
        for seed in 0..5 {
            let tree = random_tree(9, seed);
            for r in 0..3 {
                assert!(nabla_exact(&tree, r).unwrap().density < Density::new(1, 1));
            }
        }
    }

    #[test]
    fn exact_limits() {
        assert!(matches!(nabla_exact(&path(17), 0), Err(Error::SizeLimit { .. })));
        assert!(matches!(nabla_exact(&path(13), 1), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn exact_is_monotone_in_radius() {
        for seed in 0..10 {
            let g = gnp(8, 0.3, seed);
            let d: Vec<Density> = (0..4).map(|r| nabla_exact(&g, r).unwrap().density).collect();
            assert!(d.windows(2).all(|w| w[0] <= w[1]), "{d:?}");
        }
    }

    #[test]
    fn greedy_examples() {
        let k6 = complete(6);
        assert!(nabla_greedy(&k6, 0, 1).unwrap().density >= Density::new(5, 2));
        let c9 = cycle(9).unwrap();
        assert_eq!(
            nabla_greedy(&c9, 1, 1).unwrap().density,
            nabla_exact(&c9, 1).unwrap().density
        );
        let g = grid(10, 10);
        let r = nabla_greedy_with(
            &g,
            2,
            3,
            GreedyOptions {
                restarts: 40,
                max_passes: 20,
            },
        )
        .unwrap();
        assert!(r.density >= Density::new(180, 100));
        contract_model(&g, &r.model, true).unwrap();
    }

    #[test]
    fn greedy_never_beats_exact() {
        for seed in 0..30 {
            let g = gnp(8, 0.3, 100 + seed);
            for r in 0..=2 {
                let greedy = nabla_greedy_with(
                    &g,
                    r,
                    seed,
                    GreedyOptions {
                        restarts: 20,
                        max_passes: 20,
                    },
                )
                .unwrap();
                greedy.model.validate(&g).unwrap();
                assert!(greedy.density <= nabla_exact(&g, r).unwrap().density);
            }
        }
    }

    #[test]
    fn greedy_on_forest_stays_below_one() {
        let g = binary_tree(31);
        assert!(nabla_greedy(&g, 3, 0).unwrap().density < Density::new(1, 1));
    }

    #[test]
    fn clique_search_examples() {
        let k5 = complete(5);
        let m = greedy_shallow_clique(&k5, 5, 0, 0).unwrap();
        assert!(m.sets.iter().all(|s| s.len() == 1));

        let p = petersen();
        let m = greedy_shallow_clique(&p, 5, 1, 0).unwrap();
        m.validate(&p).unwrap();
        assert!(m.is_clique_model(&p));
        assert_eq!(contract_model(&p, &m, true).unwrap().minor, complete(5));

        // No depth-0 K_4 in the Petersen graph (it is triangle-free).
        assert!(greedy_shallow_clique(&p, 4, 0, 0).is_err());
        assert_eq!(exact_shallow_clique(&p, 3, 0).unwrap(), None);
    }

    #[test]
    fn clique_search_on_cycles() {
        let c8 = cycle(8).unwrap();
        // Three arcs of a cycle contract to a triangle.
        let m = greedy_shallow_clique(&c8, 3, 2, 0).unwrap();
        m.validate(&c8).unwrap();
        assert!(exact_shallow_clique(&c8, 3, 2).unwrap().is_some());
        // K_4 is never a minor of a cycle.
        assert!(greedy_shallow_clique(&c8, 4, 2, 0).is_err());
        assert_eq!(exact_shallow_clique(&c8, 4, 4).unwrap(), None);
    }

    #[test]
    fn clique_oracle_agrees_with_known_minors() {
        let p = petersen();
        let m = exact_shallow_clique(&p, 5, 1).unwrap().unwrap();
        m.validate(&p).unwrap();
        assert!(m.is_clique_model(&p));
        assert_eq!(exact_shallow_clique(&grid(3, 3), 5, 3).unwrap(), None);
    }

    #[test]
    fn model_json_shape() {
        let json = serde_json::to_string(&spokes()).unwrap();
        assert_eq!(
            json,
            r#"{"depth":1,"sets":[[0,5],[1,6],[2,7],[3,8],[4,9]],"centers":[0,1,2,3,4]}"#
        );
        let back: BranchModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spokes());
    }
}
