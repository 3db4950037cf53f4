//! Dense graphs contain bounded-degree subgraphs of large treewidth: find a
//! shallow clique minor, then route a certified cubic expander through it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bounds::{m_of_epsilon, t_value, Magnitude};
use crate::error::{Error, Result};
use crate::families::{expansion_of, random_cubic, ExpansionMode, DEFAULT_N0, EXACT_EXPANSION_LIMIT};
use crate::graph::{Graph, GraphBuilder, VertexSet};
use crate::minor::{greedy_shallow_clique, BranchModel};
use crate::treewidth::{exact_treewidth, expander_tw_lower_bound, EXACT_TW_LIMIT};

/// Seeds tried for the cubic expander before giving up.
pub const EXPANDER_ATTEMPTS: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Replaces `2 * 32^m * t^4 * n^(1 + eps)`.
    pub threshold: Option<f64>,
    pub t: Option<u64>,
    /// Replaces `4^m`.
    pub depth: Option<usize>,
    pub n0: u64,
    pub r: u64,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            threshold: None,
            t: None,
            depth: None,
            n0: DEFAULT_N0,
            r: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineStage {
    HypothesisNotMet,
    TBelowN0,
    CliqueNotFound,
    ExpanderNotCertified,
    Embedded,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddedSubgraph {
    /// Host vertices of `H`, sorted.
    pub vertices: Vec<usize>,
    /// Host edges of `H`, each `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub max_degree: usize,
    /// Cubic expander routed through the clique model.
    pub expander_edges: Vec<(usize, usize)>,
    pub alpha_boundary: usize,
    pub alpha_size: usize,
    pub expander_seed: u64,
    /// Exact treewidth of the expander when small enough to compute.
    pub expander_treewidth: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub epsilon: f64,
    pub m: u32,
    pub t: Magnitude,
    pub depth: usize,
    pub edges: usize,
    pub threshold: Magnitude,
    pub hypothesis_met: bool,
    pub stage: PipelineStage,
    pub clique_model: Option<BranchModel>,
    pub subgraph: Option<EmbeddedSubgraph>,
    /// `(3 depth + 1) t`.
    pub vertex_bound: Option<u64>,
    pub tw_lower_bound: Option<f64>,
}

pub fn subgraph_expansion_pipeline(
    g: &Graph,
    eps: f64,
    c: f64,
    delta: f64,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    if !(delta > 0.0 && delta <= 1.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and delta in (0, 1], got c = {c}, delta = {delta}"
        )));
    }
    let m = m_of_epsilon(eps)?;
    let t = match opts.t {
        Some(t) if t % 2 == 1 => {
            return Err(Error::InvalidParameter(format!("t must be even, got {t}")));
        }
        Some(t) => Magnitude::from_exact(t as u128),
        None => t_value(c, delta, m, opts.r, opts.n0),
    };
    let depth = opts
        .depth
        .unwrap_or_else(|| 4usize.checked_pow(m).unwrap_or(usize::MAX));
    let n = g.n().max(1) as f64;
    let threshold = match opts.threshold {
        Some(th) => Magnitude::from_ln(th.max(f64::MIN_POSITIVE).ln()),
        None => Magnitude::from_ln(2f64.ln() + m as f64 * 32f64.ln() + 4.0 * t.ln + (1.0 + eps) * n.ln()),
    };
    let hypothesis_met = match opts.threshold {
        Some(th) => g.m() as f64 >= th,
        None => (g.m() as f64).ln() >= threshold.ln,
    };
    let mut report = PipelineReport {
        epsilon: eps,
        m,
        t,
        depth,
        edges: g.m(),
        threshold,
        hypothesis_met,
        stage: PipelineStage::HypothesisNotMet,
        clique_model: None,
        subgraph: None,
        vertex_bound: None,
        tw_lower_bound: None,
    };
    if !hypothesis_met {
        return Ok(report);
    }
    let t = match t.exact {
        Some(t) if t < opts.n0 as u128 || t < 4 => {
            report.stage = PipelineStage::TBelowN0;
            return Ok(report);
        }
        Some(t) if t <= g.n() as u128 => t as usize,
        _ => {
            report.stage = PipelineStage::CliqueNotFound;
            return Ok(report);
        }
    };
    let model = match greedy_shallow_clique(g, t, depth, opts.seed) {
        Ok(model) => model,
        Err(_) => {
            report.stage = PipelineStage::CliqueNotFound;
            return Ok(report);
        }
    };
    report.clique_model = Some(model.clone());
    if t > EXACT_EXPANSION_LIMIT {
        report.stage = PipelineStage::ExpanderNotCertified;
        return Ok(report);
    }
    let mut expander = None;
    for i in 0..EXPANDER_ATTEMPTS {
        let seed = opts.seed.wrapping_add(i);
        let h0 = random_cubic(t, seed)?;
        let cert = expansion_of(&h0, ExpansionMode::Exact, seed)?;
        if cert.at_least(1, 7) {
            expander = Some((h0, cert, seed));
            break;
        }
    }
    let Some((h0, cert, expander_seed)) = expander else {
        report.stage = PipelineStage::ExpanderNotCertified;
        return Ok(report);
    };
    let (vertices, edges) = embed(g, &model, &h0);
    let mut builder = GraphBuilder::new(g.n());
    for &(u, v) in &edges {
        builder.add_edge_dedup(u, v);
    }
    let max_degree = builder.build().max_degree();
    let expander_treewidth = if t <= EXACT_TW_LIMIT {
        Some(exact_treewidth(&h0)?.0)
    } else {
        None
    };
    report.tw_lower_bound = Some(expander_tw_lower_bound(cert.alpha, t)?);
    report.vertex_bound = Some((3 * depth as u64 + 1) * t as u64);
    report.subgraph = Some(EmbeddedSubgraph {
        vertices,
        edges,
        max_degree,
        expander_edges: h0.edges().collect(),
        alpha_boundary: cert.boundary,
        alpha_size: cert.size,
        expander_seed,
        expander_treewidth,
    });
    report.stage = PipelineStage::Embedded;
    Ok(report)
}

/// Routes each expander edge `{i, j}` through one host edge between branch
/// sets `i` and `j`, and joins the attachment points inside each branch set
/// by their minimal subtree of a BFS tree from the center. The result is a
/// subdivision of the expander with maximum degree 3.
fn embed(g: &Graph, model: &BranchModel, h0: &Graph) -> (Vec<usize>, Vec<(usize, usize)>) {
    let n = g.n();
    let sets: Vec<VertexSet> = model
        .sets
        .iter()
        .map(|s| VertexSet::from_iter_in(n, s.iter().copied()))
        .collect();
    let mut edges = Vec::new();
    let mut terminals: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, j) in h0.edges() {
        let (u, v) = sets[i]
            .iter()
            .flat_map(|u| {
                g.neighbors(u)
                    .iter()
                    .filter(|&&v| sets[j].contains(v))
                    .map(move |&v| (u, v))
            })
            .min()
            .expect("clique model joins every pair");
        edges.push((u.min(v), u.max(v)));
        terminals.entry(i).or_default().push(u);
        terminals.entry(j).or_default().push(v);
    }
    let mut vertices = VertexSet::new(n);
    for (i, terms) in terminals {
        let tree = steiner_in_bfs_tree(g, &sets[i], model.centers[i], &terms);
        for &(u, v) in &tree.1 {
            edges.push((u.min(v), u.max(v)));
        }
        for v in tree.0 {
            vertices.insert(v);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    (vertices.to_vec(), edges)
}

/// Minimal subtree spanning `terms` of the BFS tree of `set` from `root`.
fn steiner_in_bfs_tree(g: &Graph, set: &VertexSet, root: usize, terms: &[usize]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let n = g.n();
    let dist = g.distances_within(root, Some(set));
    let parent = |v: usize| -> usize {
        *g.neighbors(v)
            .iter()
            .filter(|&&w| set.contains(w) && dist[w] + 1 == dist[v])
            .min()
            .expect("non-root vertex has a BFS parent")
    };
    let mut in_tree = VertexSet::new(n);
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    for &t in terms {
        let mut v = t;
        in_tree.insert(v);
        while v != root {
            let p = parent(v);
            if !tree_edges.contains(&(v, p)) {
                tree_edges.push((v, p));
            }
            in_tree.insert(p);
            v = p;
        }
    }
    let is_term = |v: usize| terms.contains(&v);
    loop {
        let leaf = in_tree
            .iter()
            .find(|&v| !is_term(v) && tree_edges.iter().filter(|&&(a, b)| a == v || b == v).count() <= 1);
        let Some(leaf) = leaf else {
            break;
        };
        in_tree.remove(leaf);
        tree_edges.retain(|&(a, b)| a != leaf && b != leaf);
    }
    (in_tree.to_vec(), tree_edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{complete, grid, path};

    #[test]
    fn sparse_graph_misses_hypothesis() {
        let r = subgraph_expansion_pipeline(&path(50), 1.0, 1.0, 1.0, &PipelineOptions::default()).unwrap();
        assert_eq!(r.stage, PipelineStage::HypothesisNotMet);
        assert!(r.threshold.log10 > 20.0);
    }

    #[test]
    fn small_t_reported() {
        let opts = PipelineOptions {
            threshold: Some(1.0),
            t: Some(4),
            depth: Some(1),
            ..Default::default()
        };
        let r = subgraph_expansion_pipeline(&complete(20), 1.0, 1.0, 1.0, &opts).unwrap();
        assert_eq!(r.stage, PipelineStage::TBelowN0);
    }

    #[test]
    fn clique_embeds_k4() {
        let g = complete(20);
        let opts = PipelineOptions {
            threshold: Some(1.0),
            t: Some(4),
            depth: Some(1),
            n0: 4,
            ..Default::default()
        };
        let r = subgraph_expansion_pipeline(&g, 1.0, 1.0, 1.0, &opts).unwrap();
        assert_eq!(r.stage, PipelineStage::Embedded);
        let h = r.subgraph.unwrap();
        assert!(h.max_degree <= 3);
        assert!(h.vertices.len() as u64 <= r.vertex_bound.unwrap());
        assert_eq!(h.edges.len(), 6);
        assert!(h.edges.iter().all(|&(u, v)| g.has_edge(u, v)));
        r.clique_model.unwrap().validate(&g).unwrap();
    }

    #[test]
    fn deep_model_gives_subdivision() {
        // A grid has K_4 minors only through long branch sets.
        let g = grid(6, 6);
        let opts = PipelineOptions {
            threshold: Some(1.0),
            t: Some(4),
            depth: Some(4),
            n0: 4,
            ..Default::default()
        };
        let r = subgraph_expansion_pipeline(&g, 1.0, 1.0, 1.0, &opts).unwrap();
        assert_eq!(r.stage, PipelineStage::Embedded);
        let h = r.subgraph.unwrap();
        assert!(h.max_degree <= 3);
        assert!(h.vertices.len() as u64 <= r.vertex_bound.unwrap());
        let sub = Graph::from_edges(g.n(), h.edges.iter().copied()).unwrap();
        let hv = VertexSet::from_iter_in(g.n(), h.vertices.iter().copied());
        let (hg, _) = sub.induced_subgraph(&hv).unwrap();
        // Subdivision of K_4: 4 branch vertices of degree 3, the rest degree 2.
        assert!(hg.is_connected());
        let deg3 = (0..hg.n()).filter(|&v| hg.degree(v) == 3).count();
        assert_eq!(deg3, 4);
        assert!((0..hg.n()).all(|v| hg.degree(v) == 2 || hg.degree(v) == 3));
        assert!(h.edges.iter().all(|&(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn odd_t_rejected() {
        let opts = PipelineOptions {
            t: Some(5),
            ..Default::default()
        };
        assert!(subgraph_expansion_pipeline(&complete(6), 1.0, 1.0, 1.0, &opts).is_err());
    }
}
