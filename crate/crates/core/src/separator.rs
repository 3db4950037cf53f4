//! Balanced vertex separators.
//!
//! A separator `(A, B)` covers the vertex set and no edge joins `A \ B` to
//! `B \ A`. It is balanced when both exclusive parts hold at most `2n/3`
//! vertices. Every producer here hands its result to [`validate_separator`]
//! before returning.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::rng;
use crate::graph::{Graph, VertexSet};
use crate::minor::BranchModel;

/// Largest graph handed to the exhaustive separator search.
pub const ORACLE_LIMIT: usize = 18;
/// Largest graph checked exhaustively by [`verify_cb_separators`].
pub const EXHAUSTIVE_CB_LIMIT: usize = 14;
pub const DEFAULT_BUDGET_CONST: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separator {
    pub a: VertexSet,
    pub b: VertexSet,
}

impl Separator {
    /// `(V, V)`: always a separator, vacuously balanced.
    pub fn trivial(n: usize) -> Self {
        Separator {
            a: VertexSet::full(n),
            b: VertexSet::full(n),
        }
    }

    /// Separator with `a = s ∪ side_a` and `b = V \ side_a`.
    pub fn from_sides(n: usize, s: &VertexSet, side_a: &VertexSet) -> Self {
        let a = s.union(side_a);
        let b = VertexSet::full(n).difference(side_a);
        Separator { a, b }
    }

    pub fn order(&self) -> usize {
        self.a.intersection(&self.b).len()
    }

    pub fn middle(&self) -> VertexSet {
        self.a.intersection(&self.b)
    }

    pub fn to_json(&self, cert: &BalanceCertificate) -> SeparatorJson {
        SeparatorJson {
            a: self.a.to_vec(),
            b: self.b.to_vec(),
            order: self.order(),
            balanced: cert.balanced,
        }
    }
}

/// Wire format `{"a":[...],"b":[...],"order":k,"balanced":true}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SeparatorJson {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub order: usize,
    pub balanced: bool,
}

impl SeparatorJson {
    pub fn into_separator(self, n: usize) -> Result<Separator> {
        if let Some(&v) = self.a.iter().chain(&self.b).find(|&&v| v >= n) {
            return Err(Error::Validation(format!("vertex {v} out of range for n = {n}")));
        }
        Ok(Separator {
            a: VertexSet::from_iter_in(n, self.a),
            b: VertexSet::from_iter_in(n, self.b),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalanceCertificate {
    pub size_a_minus_b: usize,
    pub size_b_minus_a: usize,
    pub n: usize,
    pub balanced: bool,
}

/// `3|X| <= 2n`, the balance condition in integers.
pub(crate) fn within_two_thirds(size: usize, n: usize) -> bool {
    3 * size <= 2 * n
}

/// Independent check of cover and no-crossing-edge; reports balance.
pub fn validate_separator(g: &Graph, sep: &Separator) -> Result<BalanceCertificate> {
    let n = g.n();
    if sep.a.ground() != n || sep.b.ground() != n {
        return Err(Error::Validation(
            "separator sides are over a different ground set".into(),
        ));
    }
    if let Some(v) = (0..n).find(|&v| !sep.a.contains(v) && !sep.b.contains(v)) {
        return Err(Error::Validation(format!("vertex {v} is in neither side")));
    }
    for (u, v) in g.edges() {
        let u_a = sep.a.contains(u) && !sep.b.contains(u);
        let u_b = sep.b.contains(u) && !sep.a.contains(u);
        let v_a = sep.a.contains(v) && !sep.b.contains(v);
        let v_b = sep.b.contains(v) && !sep.a.contains(v);
        if (u_a && v_b) || (u_b && v_a) {
            return Err(Error::Validation(format!("edge {u} {v} crosses the separator")));
        }
    }
    let size_a_minus_b = sep.a.difference(&sep.b).len();
    let size_b_minus_a = sep.b.difference(&sep.a).len();
    Ok(BalanceCertificate {
        size_a_minus_b,
        size_b_minus_a,
        n,
        balanced: within_two_thirds(size_a_minus_b, n) && within_two_thirds(size_b_minus_a, n),
    })
}

/// Like [`validate_separator`] but balance is required.
pub fn certify_balanced(g: &Graph, sep: &Separator) -> Result<BalanceCertificate> {
    let cert = validate_separator(g, sep)?;
    if !cert.balanced {
        return Err(Error::Validation(format!(
            "separator unbalanced: |A\\B| = {}, |B\\A| = {}, n = {}",
            cert.size_a_minus_b, cert.size_b_minus_a, cert.n
        )));
    }
    Ok(cert)
}

/// Splits blocks of the given sizes into two groups minimising the larger
/// group. Returns the indices placed in the first group and that group's total.
pub(crate) fn pack_blocks(sizes: &[usize]) -> (Vec<usize>, usize) {
    let total: usize = sizes.iter().sum();
    // from[s] = index of the block that first made sum `s` reachable.
    let mut from = vec![usize::MAX; total + 1];
    let mut reach = vec![false; total + 1];
    reach[0] = true;
    for (i, &s) in sizes.iter().enumerate() {
        if s == 0 {
            continue;
        }
        for x in (s..=total).rev() {
            if !reach[x] && reach[x - s] {
                reach[x] = true;
                from[x] = i;
            }
        }
    }
    let target = (0..=total / 2).rev().find(|&x| reach[x]).unwrap_or(0);
    let mut picked = Vec::new();
    let mut x = target;
    while x > 0 {
        let i = from[x];
        picked.push(i);
        x -= sizes[i];
    }
    picked.sort_unstable();
    (picked, target)
}

/// Packs the components of `G - s` into two sides as evenly as possible.
pub(crate) fn pack_around(g: &Graph, s: &VertexSet) -> Separator {
    let rest = s.complement();
    let comps = g.components_within(&rest);
    let sizes: Vec<usize> = comps.iter().map(VertexSet::len).collect();
    let (picked, _) = pack_blocks(&sizes);
    let mut side_a = VertexSet::new(g.n());
    for i in picked {
        side_a.union_with(&comps[i]);
    }
    Separator::from_sides(g.n(), s, &side_a)
}

/// Moves middle vertices into a side when they touch only that side and
/// balance is preserved.
pub fn trim(g: &Graph, sep: &Separator) -> Separator {
    let n = g.n();
    let mut a = sep.a.clone();
    let mut b = sep.b.clone();
    loop {
        let mut changed = false;
        let middle = a.intersection(&b);
        for v in middle.iter() {
            let only_a = |w: usize| a.contains(w) && !b.contains(w);
            let only_b = |w: usize| b.contains(w) && !a.contains(w);
            let touches_a = g.neighbors(v).iter().any(|&w| only_a(w));
            let touches_b = g.neighbors(v).iter().any(|&w| only_b(w));
            let size_a = a.difference(&b).len();
            let size_b = b.difference(&a).len();
            // Prefer the smaller side.
            let to_a = !touches_b && within_two_thirds(size_a + 1, n);
            let to_b = !touches_a && within_two_thirds(size_b + 1, n);
            if to_a && (!to_b || size_a <= size_b) {
                b.remove(v);
                changed = true;
            } else if to_b {
                a.remove(v);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Separator { a, b }
}

fn largest_component(comps: &[VertexSet]) -> Option<&VertexSet> {
    let mut best: Option<&VertexSet> = None;
    for c in comps {
        if best.is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best
}

/// BFS-level sweep: picks the smallest BFS layer (from a few starting points
/// in the largest component) whose removal leaves a balanced split.
/// Always returns a balanced separator.
pub fn sweep_separator(g: &Graph) -> Separator {
    let n = g.n();
    if n == 0 {
        return Separator::trivial(0);
    }
    let comps = g.components();
    let big = largest_component(&comps).expect("n > 0").clone();
    if within_two_thirds(big.len(), n) {
        return pack_around(g, &VertexSet::new(n));
    }

    let members = big.to_vec();
    let mut starts = vec![pseudo_peripheral(g, &big)];
    let k = 8.min(members.len());
    for i in 0..k {
        let v = members[i * members.len() / k];
        if !starts.contains(&v) {
            starts.push(v);
        }
    }

    let outside = big.complement();
    let mut best: Option<Separator> = None;
    for start in starts {
        let dist = g.distances_within(start, Some(&big));
        let depth = members.iter().map(|&v| dist[v]).max().unwrap_or(0);
        let mut level = vec![0usize; depth + 1];
        for &v in &members {
            level[dist[v]] += 1;
        }
        let mut order: Vec<usize> = (0..=depth).collect();
        order.sort_by_key(|&j| (level[j], j));
        let before_counts: Vec<usize> = level
            .iter()
            .scan(0, |acc, &x| {
                let b = *acc;
                *acc += x;
                Some(b)
            })
            .collect();
        for j in order {
            if best.as_ref().is_some_and(|b| b.order() <= level[j]) {
                break;
            }
            let before = before_counts[j];
            let after = big.len() - before - level[j];
            let mut sizes = vec![before, after];
            let other: Vec<VertexSet> = g.components_within(&outside);
            sizes.extend(other.iter().map(VertexSet::len));
            let (picked, side) = pack_blocks(&sizes);
            let rest = n - level[j] - side;
            if !(within_two_thirds(side, n) && within_two_thirds(rest, n)) {
                continue;
            }
            let mut side_a = VertexSet::new(n);
            let mut s = VertexSet::new(n);
            for &v in &members {
                if dist[v] == j {
                    s.insert(v);
                }
            }
            for i in picked {
                match i {
                    0 => members.iter().filter(|&&v| dist[v] < j).for_each(|&v| {
                        side_a.insert(v);
                    }),
                    1 => members.iter().filter(|&&v| dist[v] > j).for_each(|&v| {
                        side_a.insert(v);
                    }),
                    i => side_a.union_with(&other[i - 2]),
                }
            }
            best = Some(trim(g, &Separator::from_sides(n, &s, &side_a)));
            break;
        }
    }
    best.unwrap_or_else(|| Separator::trivial(n))
}

fn pseudo_peripheral(g: &Graph, comp: &VertexSet) -> usize {
    let mut v = comp.first().expect("nonempty component");
    let mut ecc = 0;
    for _ in 0..4 {
        let dist = g.distances_within(v, Some(comp));
        let (far, d) = comp
            .iter()
            .map(|w| (w, dist[w]))
            .fold((v, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if d <= ecc {
            break;
        }
        ecc = d;
        v = far;
    }
    v
}

/// Either arm of the region-growing dichotomy.
#[derive(Debug, Clone)]
pub enum DichotomyResult {
    /// Model of `K_h` whose branch sets have radius at most `depth`.
    Minor(BranchModel),
    Separator {
        separator: Separator,
        certificate: BalanceCertificate,
        /// `budget_const * (n/l + l h^2 log2 n)`.
        budget: f64,
    },
}

/// Region growing: either a `K_h` model at depth `l * ceil(log2 n)` or a
/// balanced separator of order at most `budget_const * (n/l + l h^2 log2 n)`.
///
/// Branch sets are grown one at a time inside the largest remaining
/// component `C`. A new set is a BFS tree from the smallest vertex of `C`
/// reaching the neighborhood of every current set within the depth. When
/// some set is out of reach, a BFS layer with few vertices relative to the
/// ball it encloses is cut, the ball being the side of at most `|C|/2`. The
/// final separator is the union of cut layers and live branch sets, refined
/// by a level sweep and trimming when that gives a smaller order.
pub fn prs_dichotomy(g: &Graph, l: usize, h: usize, budget_const: f64) -> Result<DichotomyResult> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dichotomy needs n >= 2, got {n}")));
    }
    if l < 1 || h < 2 {
        return Err(Error::InvalidParameter(format!(
            "need l >= 1 and h >= 2, got l = {l}, h = {h}"
        )));
    }
    if !(budget_const > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budget_const must be positive, got {budget_const}"
        )));
    }
    let ceil_log = ceil_log2(n);
    let depth = l * ceil_log;
    let log_n = (n as f64).log2().max(1.0);
    let budget = budget_const * (n as f64 / l as f64 + (l * h * h) as f64 * log_n);
    let reach = (depth / 2).max(1);

    let mut cut = VertexSet::new(n);
    let mut in_model = VertexSet::new(n);
    let mut model: Vec<(VertexSet, usize)> = Vec::new();

    for _ in 0..=2 * n + 2 {
        let avail = cut.union(&in_model).complement();
        let comps = g.components_within(&avail);
        let c = match largest_component(&comps) {
            Some(c) if !within_two_thirds(c.len(), n) => c.clone(),
            _ => return finish_separator(g, &cut.union(&in_model), budget),
        };

        model.retain(|(set, _)| {
            let touches = !g.boundary(set).is_disjoint(&c);
            if !touches {
                in_model.difference_with(set);
            }
            touches
        });

        let x = c.first().expect("nonempty");
        let (dist, parent) = bfs_tree(g, x, &c);

        let mut tree = VertexSet::new(n);
        tree.insert(x);
        let mut unreached = None;
        for (set, _) in &model {
            let targets = g.boundary(set).intersection(&c);
            let nearest = targets.iter().min_by_key(|&v| (dist[v], v)).expect("kept sets touch C");
            if dist[nearest] > depth {
                unreached = Some(targets);
                break;
            }
            let mut v = nearest;
            while v != x {
                tree.insert(v);
                v = parent[v];
            }
        }

        match unreached {
            None => {
                in_model.union_with(&tree);
                model.push((tree, x));
                if model.len() == h {
                    let bm = BranchModel {
                        depth,
                        sets: model.iter().map(|(s, _)| s.to_vec()).collect(),
                        centers: model.iter().map(|&(_, c)| c).collect(),
                    };
                    bm.validate(g)
                        .map_err(|e| Error::InternalLimit(format!("dichotomy produced invalid model: {e}")))?;
                    return Ok(DichotomyResult::Minor(bm));
                }
            }
            Some(targets) => {
                let layer = sparse_layer(&c, &dist, reach).or_else(|| {
                    let dist_y = multi_source_distances(g, &targets, &c);
                    sparse_layer(&c, &dist_y, reach).map(|(j, _)| (j, dist_y))
                });
                // Both balls past |C|/2 within `reach` contradicts the miss
                // unless 2 * reach > depth; fall back to the x-ball then.
                let (j, layer_dist) = layer.unwrap_or_else(|| (min_ratio_layer(&c, &dist, reach), dist.clone()));
                for v in c.iter() {
                    if layer_dist[v] == j {
                        cut.insert(v);
                    }
                }
            }
        }
    }
    Err(Error::InternalLimit("region growing did not converge".into()))
}

fn finish_separator(g: &Graph, middle: &VertexSet, budget: f64) -> Result<DichotomyResult> {
    let grown = trim(g, &pack_around(g, middle));
    let swept = sweep_separator(g);
    let separator = if swept.order() < grown.order() { swept } else { grown };
    let certificate = certify_balanced(g, &separator)
        .map_err(|e| Error::InternalLimit(format!("dichotomy produced an invalid separator: {e}")))?;
    if separator.order() as f64 > budget {
        return Err(Error::InternalLimit(format!(
            "separator order {} exceeds budget {budget:.2}",
            separator.order()
        )));
    }
    Ok(DichotomyResult::Separator {
        separator,
        certificate,
        budget,
    })
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize
}

/// BFS inside `within` with smallest-id parents.
fn bfs_tree(g: &Graph, root: usize, within: &VertexSet) -> (Vec<usize>, Vec<usize>) {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if within.contains(w) && dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    (dist, parent)
}

fn multi_source_distances(g: &Graph, sources: &VertexSet, within: &VertexSet) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::new();
    for s in sources.iter() {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if within.contains(w) && dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn ball_profile(c: &VertexSet, dist: &[usize], reach: usize) -> (Vec<usize>, Vec<usize>) {
    let mut level = vec![0usize; reach + 2];
    for v in c.iter() {
        if dist[v] <= reach + 1 {
            level[dist[v]] += 1;
        }
    }
    let cum: Vec<usize> = level
        .iter()
        .scan(0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    (level, cum)
}

/// If the radius-`reach` ball holds at most `|C|/2` vertices, the layer
/// `j + 1` minimising `|layer| / |ball_j|` over `j < reach`, returned as its
/// distance together with the distance table.
fn sparse_layer(c: &VertexSet, dist: &[usize], reach: usize) -> Option<(usize, Vec<usize>)> {
    let (_, cum) = ball_profile(c, dist, reach);
    if 2 * cum[reach] > c.len() {
        return None;
    }
    Some((min_ratio_layer(c, dist, reach), dist.to_vec()))
}

fn min_ratio_layer(c: &VertexSet, dist: &[usize], reach: usize) -> usize {
    let (level, cum) = ball_profile(c, dist, reach);
    let mut best: Option<(usize, usize, usize)> = None;
    for j in 0..reach {
        let (num, den) = (level[j + 1], cum[j]);
        if num == 0 {
            continue;
        }
        if best.is_none_or(|(_, bn, bd)| num * bd < bn * den) {
            best = Some((j + 1, num, den));
        }
    }
    best.map_or(1, |(j, _, _)| j)
}

/// Outcome of [`separator_from_expansion`].
#[derive(Debug, Clone)]
pub struct ExpansionSeparator {
    pub separator: Separator,
    pub certificate: BalanceCertificate,
    pub delta: f64,
    pub l: usize,
    /// Clique size used by the successful attempt.
    pub h: usize,
    pub attempts: usize,
    pub bound: f64,
    /// Whether `k (l log2 n + 1)^d < (h - 1) / 2` held for the initial `h`,
    /// the regime where the promise alone rules out the minor arm.
    pub promise_excludes_minor: bool,
}

pub const DEFAULT_RETRY_CAP: usize = 8;

/// Separator for a graph promised to have expansion at most `k (r + 1)^d`,
/// using `delta = 1/(4d+3)`, `l = ceil(n^delta)`, `h = ceil(n^(1/4 - delta/2))`.
///
/// A returned clique minor means the promise failed at this `h`; `h` is
/// doubled up to `retry_cap` times before giving up.
pub fn separator_from_expansion(
    g: &Graph,
    k: f64,
    d: f64,
    c_out: f64,
    budget_const: f64,
    retry_cap: usize,
) -> Result<ExpansionSeparator> {
    if !(k > 0.0) || !(d >= 0.0) || !(c_out > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k > 0, d >= 0, c_out > 0 (got {k}, {d}, {c_out})"
        )));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::Degenerate("separator of the empty graph".into()));
    }
    let delta = 1.0 / (4.0 * d + 3.0);
    let bound = c_out * (n as f64).powf(1.0 - delta);
    if n == 1 {
        let separator = Separator::trivial(1);
        let certificate = certify_balanced(g, &separator)?;
        if separator.order() as f64 > bound {
            return Err(Error::BoundExceeded { order: 1, bound });
        }
        return Ok(ExpansionSeparator {
            separator,
            certificate,
            delta,
            l: 1,
            h: 2,
            attempts: 0,
            bound,
            promise_excludes_minor: false,
        });
    }
    let nf = n as f64;
    let l = ceil_tol(nf.powf(delta)).max(1);
    let h0 = ceil_tol(nf.powf(0.25 - delta / 2.0)).max(2);
    let depth = l * ceil_log2(n);
    let promise_excludes_minor = k * ((depth + 1) as f64).powf(d) < (h0 as f64 - 1.0) / 2.0;

    let mut h = h0;
    let mut last = None;
    for attempt in 1..=retry_cap + 1 {
        match prs_dichotomy(g, l, h, budget_const)? {
            DichotomyResult::Separator {
                separator, certificate, ..
            } => {
                if separator.order() as f64 > bound {
                    return Err(Error::BoundExceeded {
                        order: separator.order(),
                        bound,
                    });
                }
                return Ok(ExpansionSeparator {
                    separator,
                    certificate,
                    delta,
                    l,
                    h,
                    attempts: attempt,
                    bound,
                    promise_excludes_minor,
                });
            }
            DichotomyResult::Minor(m) => {
                last = Some((h, m));
                h *= 2;
            }
        }
    }
    let (h, witness) = last.expect("at least one attempt");
    Err(Error::ExpansionPromiseViolated {
        h,
        depth: witness.depth,
        attempts: retry_cap + 1,
        witness,
    })
}

/// `ceil(x)` that ignores floating noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Minimum-order balanced separator of the subgraph induced by `universe`,
/// searched over middle sets by increasing size. Returns the middle set and
/// the vertices packed on the first side.
fn optimal_in_mask(adj: &[u64], universe: u64) -> (u64, u64) {
    let verts: Vec<usize> = (0..64).filter(|&v| universe >> v & 1 == 1).collect();
    let size = verts.len();
    let cap = 2 * size / 3;
    for k in 0..=size {
        let mut found = None;
        for_each_combination(size, k, |pick| {
            let s = pick.iter().fold(0u64, |m, &i| m | 1 << verts[i]);
            let comps = mask_components(adj, universe & !s);
            let sizes: Vec<usize> = comps.iter().map(|c| c.count_ones() as usize).collect();
            if sizes.iter().any(|&z| z > cap) {
                return false;
            }
            let (picked, side) = pack_blocks(&sizes);
            if side <= cap && size - k - side <= cap {
                let a = picked.iter().fold(0u64, |m, &i| m | comps[i]);
                found = Some((s, a));
                return true;
            }
            false
        });
        if let Some(f) = found {
            return f;
        }
    }
    unreachable!("the full universe as middle set always balances")
}

fn mask_components(adj: &[u64], mut rest: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while rest != 0 {
        let mut comp = rest & rest.wrapping_neg();
        loop {
            let mut grown = comp;
            let mut bits = comp;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                grown |= adj[v] & rest;
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        out.push(comp);
        rest &= !comp;
    }
    out
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order until it
/// returns `true`.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return;
        }
        // Rightmost position that can still advance.
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive minimum-order balanced separator, for `n <= 18`.
pub fn optimal_balanced_separator(g: &Graph) -> Result<Separator> {
    let n = g.n();
    if n > ORACLE_LIMIT {
        return Err(Error::size_limit("optimal balanced separator", n, ORACLE_LIMIT));
    }
    if n == 0 {
        return Ok(Separator::trivial(0));
    }
    let adj = g.adjacency_masks();
    let universe = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let (s, side) = optimal_in_mask(&adj, universe);
    let sep = Separator::from_sides(n, &VertexSet::from_mask(n, s), &VertexSet::from_mask(n, side));
    certify_balanced(g, &sep)?;
    Ok(sep)
}

/// Optimal balanced separator order of the subgraph induced by `universe`.
pub(crate) fn optimal_order_of_mask(adj: &[u64], universe: u64) -> usize {
    optimal_in_mask(adj, universe).0.count_ones() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CbViolation {
    pub subgraph_vertices: Vec<usize>,
    pub optimal_order: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CbReport {
    pub c: f64,
    pub beta: f64,
    pub exhaustive: bool,
    pub checked: usize,
    pub violations: Vec<CbViolation>,
}

impl CbReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that subgraphs have balanced separators of order at most
/// `c |V(H)|^beta`.
///
/// Only connected induced subgraphs are examined: adding edges never helps a
/// separator, and a disconnected graph has a balanced separator no larger
/// than its largest component's. Sampled mode examines BFS balls and random
/// connected subsets of at most 18 vertices.
pub fn verify_cb_separators(g: &Graph, c: f64, beta: f64, mode: CbMode) -> Result<CbReport> {
    if !(c > 0.0) || !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and beta in [0, 1), got c = {c}, beta = {beta}"
        )));
    }
    let n = g.n();
    let mut report = CbReport {
        c,
        beta,
        exhaustive: matches!(mode, CbMode::Exhaustive),
        checked: 0,
        violations: Vec::new(),
    };
    let check = |set: &VertexSet, report: &mut CbReport| -> Result<()> {
        let (sub, map) = g.induced_subgraph(set)?;
        let adj = sub.adjacency_masks();
        let universe = (1u64 << sub.n()) - 1;
        let order = optimal_order_of_mask(&adj, universe);
        let bound = c * (sub.n() as f64).powf(beta);
        report.checked += 1;
        if order as f64 > bound {
            report.violations.push(CbViolation {
                subgraph_vertices: map,
                optimal_order: order,
                bound,
            });
        }
        Ok(())
    };

    match mode {
        CbMode::Exhaustive => {
            if n > EXHAUSTIVE_CB_LIMIT {
                return Err(Error::size_limit(
                    "exhaustive (c, beta) verification",
                    n,
                    EXHAUSTIVE_CB_LIMIT,
                ));
            }
            let adj = g.adjacency_masks();
            for mask in 1u64..(1u64 << n) {
                if mask_components(&adj, mask).len() != 1 {
                    continue;
                }
                check(&VertexSet::from_mask(n, mask), &mut report)?;
            }
        }
        CbMode::Sampled { samples, seed } => {
            let mut seen = std::collections::HashSet::new();
            for center in 0..n {
                let mut radius = 0;
                loop {
                    let ball = g.bfs_ball(center, radius);
                    if ball.len() > ORACLE_LIMIT {
                        break;
                    }
                    if seen.insert(ball.to_vec()) {
                        check(&ball, &mut report)?;
                    }
                    if g.bfs_ball(center, radius + 1).len() == ball.len() {
                        break;
                    }
                    radius += 1;
                }
            }
            let mut r = rng(seed);
            for _ in 0..samples {
                if n == 0 {
                    break;
                }
                let target = r.gen_range(1..=n.min(ORACLE_LIMIT));
                let start = r.gen_range(0..n);
                let mut set = VertexSet::new(n);
                set.insert(start);
                let mut frontier: Vec<usize> = g.neighbors(start).to_vec();
                while set.len() < target && !frontier.is_empty() {
                    frontier.shuffle(&mut r);
                    let v = frontier.pop().expect("nonempty");
                    if set.insert(v) {
                        frontier.extend(g.neighbors(v).iter().filter(|&&w| !set.contains(w)));
                    }
                }
                if seen.insert(set.to_vec()) {
                    check(&set, &mut report)?;
                }
            }
        }
    }
    Ok(report)
}
