//! Instance generators and expansion certificates.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, VertexSet};

/// Default for the unquantified vertex threshold above which certified
/// 3-regular 1/7-expanders are assumed to exist. Overridable everywhere.
pub const DEFAULT_N0: u64 = 14;

/// Largest graph `expansion_of` enumerates exactly.
pub const EXACT_EXPANSION_LIMIT: usize = 22;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path edges are simple")
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("clique edges are simple")
}

pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are simple")
}

/// `rows x cols` grid; vertex `(r, c)` is `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut b = GraphBuilder::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                b.add_edge_dedup(v, v + 1);
            }
            if r + 1 < rows {
                b.add_edge_dedup(v, v + cols);
            }
        }
    }
    b.build()
}

/// Outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i -- i+5`.
pub fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, e.into_iter().map(|(u, v)| (u.min(v), u.max(v)))).expect("petersen is simple")
}

/// Heap-shaped binary tree on `n` vertices.
pub fn binary_tree(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| ((i - 1) / 2, i))).expect("tree edges are simple")
}

/// Random recursive tree: vertex `i` attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut r = rng(seed);
    Graph::from_edges(n, (1..n).map(|i| (r.gen_range(0..i), i))).expect("tree edges are simple")
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut b = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p.clamp(0.0, 1.0)) {
                b.add_edge_dedup(u, v);
            }
        }
    }
    b.build()
}

/// Replaces every edge by a path with `times` internal vertices. Original
/// vertices keep their ids; new vertices follow in edge order.
pub fn subdivide(g: &Graph, times: usize) -> Graph {
    let mut b = GraphBuilder::new(g.n());
    for (u, v) in g.edges() {
        let mut prev = u;
        for _ in 0..times {
            let w = b.add_vertex();
            b.add_edge_dedup(prev, w);
            prev = w;
        }
        b.add_edge_dedup(prev, v);
    }
    b.build()
}

/// Random simple connected 3-regular graph as a union of three disjoint
/// random perfect matchings.
pub fn random_cubic(n: usize, seed: u64) -> Result<Graph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "random cubic graph needs even n >= 4, got {n}"
        )));
    }
    const RETRIES: usize = 10_000;
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..RETRIES {
        let mut b = GraphBuilder::new(n);
        let mut ok = true;
        for _ in 0..3 {
            let mut placed = false;
            for _ in 0..RETRIES {
                order.shuffle(&mut r);
                if order.chunks(2).all(|p| !b.contains(p[0], p[1])) {
                    for p in order.chunks(2) {
                        b.add_edge_dedup(p[0], p[1]);
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let g = b.build();
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InternalLimit(format!(
        "no connected cubic graph on {n} vertices after {RETRIES} attempts"
    )))
}

/// Number of subdivision vertices per edge in the tightness family,
/// `floor(n^(delta / (1 - delta)))`.
pub fn c_delta_subdivisions(n: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "c-delta needs delta in (0, 1), got {delta}"
        )));
    }
    let x = (n as f64).powf(delta / (1.0 - delta));
    Ok((x + 1e-9).floor() as usize)
}

/// Random cubic graph on `n` vertices with each edge subdivided
/// `floor(n^(delta/(1-delta)))` times.
pub fn c_delta(n: usize, delta: f64, seed: u64) -> Result<Graph> {
    let s = c_delta_subdivisions(n, delta)?;
    Ok(subdivide(&random_cubic(n, seed)?, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Path,
    Cycle,
    Grid,
    Tree,
    Clique,
    CubicRandom,
    CDelta,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Path => "path",
            FamilyKind::Cycle => "cycle",
            FamilyKind::Grid => "grid",
            FamilyKind::Tree => "tree",
            FamilyKind::Clique => "clique",
            FamilyKind::CubicRandom => "cubic-random",
            FamilyKind::CDelta => "c-delta",
        }
    }

    pub fn is_seeded(self) -> bool {
        matches!(self, FamilyKind::Tree | FamilyKind::CubicRandom | FamilyKind::CDelta)
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "path" => FamilyKind::Path,
            "cycle" => FamilyKind::Cycle,
            "grid" => FamilyKind::Grid,
            "tree" => FamilyKind::Tree,
            "clique" => FamilyKind::Clique,
            "cubic-random" => FamilyKind::CubicRandom,
            "c-delta" => FamilyKind::CDelta,
            other => return Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        })
    }
}

/// A family member: `grid:n=5`, `c-delta:n=10,delta=0.5,seed=1`, ...
///
/// `n` is the size parameter: vertex count for path/cycle/tree/clique and the
/// base cubic graph, side length for grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub n: usize,
    pub delta: Option<f64>,
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, n: usize) -> Self {
        FamilySpec {
            kind,
            n,
            delta: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.kind {
            FamilyKind::Cycle if self.n < 3 => bad(format!("cycle needs n >= 3, got {}", self.n)),
            FamilyKind::CubicRandom | FamilyKind::CDelta if self.n < 4 || self.n % 2 == 1 => {
                bad(format!("{} needs even n >= 4, got {}", self.kind.name(), self.n))
            }
            FamilyKind::CDelta => match self.delta {
                Some(d) if d > 0.0 && d < 1.0 => Ok(()),
                Some(d) => bad(format!("c-delta needs delta in (0, 1), got {d}")),
                None => bad("c-delta needs a delta parameter".into()),
            },
            _ if self.delta.is_some() => bad(format!("{} takes no delta parameter", self.kind.name())),
            _ if self.n == 0 => bad("n must be positive".into()),
            _ => Ok(()),
        }
    }

    /// Deterministic for a fixed spec.
    pub fn generate(&self) -> Result<Graph> {
        self.validate()?;
        Ok(match self.kind {
            FamilyKind::Path => path(self.n),
            FamilyKind::Cycle => cycle(self.n)?,
            FamilyKind::Grid => grid(self.n, self.n),
            FamilyKind::Tree => random_tree(self.n, self.seed),
            FamilyKind::Clique => complete(self.n),
            FamilyKind::CubicRandom => random_cubic(self.n, self.seed)?,
            FamilyKind::CDelta => c_delta(self.n, self.delta.expect("validated"), self.seed)?,
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:n={}", self.kind.name(), self.n)?;
        if let Some(d) = self.delta {
            write!(f, ",delta={d}")?;
        }
        if self.kind.is_seeded() {
            write!(f, ",seed={}", self.seed)?;
        }
        Ok(())
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: FamilyKind = name.trim().parse()?;
        let mut n = None;
        let mut spec = FamilySpec::new(kind, 0);
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let num_err = || Error::InvalidParameter(format!("bad value for `{k}`: `{v}`"));
            match k.trim() {
                "n" => n = Some(v.trim().parse::<usize>().map_err(|_| num_err())?),
                "seed" => spec.seed = v.trim().parse::<u64>().map_err(|_| num_err())?,
                "delta" => spec.delta = Some(v.trim().parse::<f64>().map_err(|_| num_err())?),
                other => return Err(Error::InvalidParameter(format!("unknown family parameter `{other}`"))),
            }
        }
        spec.n = n.ok_or_else(|| Error::InvalidParameter(format!("family spec `{s}` is missing n")))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    Exact,
    Sampled,
}

/// Vertex expansion `min |N(A) \ A| / |A|` over nonempty `|A| <= n/2`.
///
/// In exact mode `alpha` is certified and `violating_set` attains it. In
/// sampled mode `alpha` is only an upper estimate from the best set found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCertificate {
    pub alpha: f64,
    /// `alpha` as the exact ratio `boundary / size` of `violating_set`.
    pub boundary: usize,
    pub size: usize,
    pub mode: ExpansionMode,
    pub violating_set: Option<VertexSet>,
    pub note: &'static str,
}

impl ExpansionCertificate {
    /// Exact comparison `alpha >= num / den`.
    pub fn at_least(&self, num: usize, den: usize) -> bool {
        self.boundary * den >= num * self.size
    }
}

pub fn expansion_of(g: &Graph, mode: ExpansionMode, seed: u64) -> Result<ExpansionCertificate> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Degenerate("expansion needs at least two vertices".into()));
    }
    match mode {
        ExpansionMode::Exact => {
            if n > EXACT_EXPANSION_LIMIT {
                return Err(Error::size_limit("exact expansion", n, EXACT_EXPANSION_LIMIT));
            }
            Ok(exact_expansion(g))
        }
        ExpansionMode::Sampled => Ok(sampled_expansion(g, seed)),
    }
}

fn exact_expansion(g: &Graph) -> ExpansionCertificate {
    let n = g.n();
    let adj = g.adjacency_masks();
    let half = n / 2;
    // nbr[mask] = union of neighborhoods; built from the mask without its low bit.
    let mut nbr = vec![0u32; 1usize << n];
    let mut best = (usize::MAX, 1usize, 0u64);
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        nbr[mask] = nbr[mask & (mask - 1)] | adj[low] as u32;
        let size = mask.count_ones() as usize;
        if size > half {
            continue;
        }
        let boundary = (nbr[mask] & !(mask as u32)).count_ones() as usize;
        if boundary * best.1 < best.0.saturating_mul(size) {
            best = (boundary, size, mask as u64);
        }
    }
    let (boundary, size, mask) = best;
    ExpansionCertificate {
        alpha: boundary as f64 / size as f64,
        boundary,
        size,
        mode: ExpansionMode::Exact,
        violating_set: Some(VertexSet::from_mask(n, mask)),
        note: "certificate",
    }
}

fn sampled_expansion(g: &Graph, seed: u64) -> ExpansionCertificate {
    let n = g.n();
    let half = n / 2;
    let mut r = rng(seed);
    let mut best: Option<(usize, usize, VertexSet)> = None;
    let consider = |s: &VertexSet, best: &mut Option<(usize, usize, VertexSet)>| {
        let size = s.len();
        if size == 0 || size > half {
            return;
        }
        let boundary = g.boundary(s).len();
        let better = match best {
            None => true,
            Some((b, z, _)) => boundary * *z < *b * size,
        };
        if better {
            *best = Some((boundary, size, s.clone()));
        }
    };

    for c in 0..n {
        let mut radius = 0;
        loop {
            let ball = g.bfs_ball(c, radius);
            if ball.len() > half {
                break;
            }
            consider(&ball, &mut best);
            let grown = g.bfs_ball(c, radius + 1);
            if grown.len() == ball.len() {
                break;
            }
            radius += 1;
        }
    }
    for comp in g.components() {
        consider(&comp, &mut best);
    }
    let samples = 64 * n;
    for _ in 0..samples {
        let k = r.gen_range(1..=half.max(1));
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut r);
        let s = VertexSet::from_iter_in(n, ids.into_iter().take(k));
        consider(&s, &mut best);
    }

    // Local descent from the incumbent: single-vertex toggles.
    if let Some((_, _, start)) = best.clone() {
        let mut cur = start;
        loop {
            let cur_ratio = {
                let b = g.boundary(&cur).len();
                (b, cur.len())
            };
            let mut improved = None;
            for v in 0..n {
                let mut s = cur.clone();
                if s.contains(v) {
                    s.remove(v);
                } else {
                    s.insert(v);
                }
                if s.is_empty() || s.len() > half {
                    continue;
                }
                let b = g.boundary(&s).len();
                if b * cur_ratio.1 < cur_ratio.0 * s.len() {
                    improved = Some(s);
                    break;
                }
            }
            match improved {
                Some(s) => {
                    consider(&s, &mut best);
                    cur = s;
                }
                None => break,
            }
        }
    }

    let (boundary, size, set) = best.expect("n >= 2 gives at least one candidate");
    ExpansionCertificate {
        alpha: boundary as f64 / size as f64,
        boundary,
        size,
        mode: ExpansionMode::Sampled,
        violating_set: Some(set),
        note: "estimate, not certificate",
    }
}
