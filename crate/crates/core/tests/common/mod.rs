//! Validators and brute-force oracles written against the raw edge list,
//! sharing no code with the library's own checkers.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use polysep::families::{self, FamilyKind, FamilySpec};
use polysep::{BranchModel, Graph, Separator, TreeDecomposition};

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    adj
}

fn members(n: usize, it: impl Iterator<Item = usize>) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in it {
        m[v] = true;
    }
    m
}

/// Cover, no edge between the exclusive parts, and `3|X| <= 2n` for both.
pub fn check_separator(g: &Graph, sep: &Separator) -> Result<usize, String> {
    let n = g.n();
    let a = members(n, sep.a.iter());
    let b = members(n, sep.b.iter());
    if let Some(v) = (0..n).find(|&v| !a[v] && !b[v]) {
        return Err(format!("vertex {v} uncovered"));
    }
    for (u, v) in g.edges() {
        let crosses = |x: usize, y: usize| a[x] && !b[x] && b[y] && !a[y];
        if crosses(u, v) || crosses(v, u) {
            return Err(format!("edge {u}-{v} crosses"));
        }
    }
    let only_a = (0..n).filter(|&v| a[v] && !b[v]).count();
    let only_b = (0..n).filter(|&v| b[v] && !a[v]).count();
    if 3 * only_a > 2 * n || 3 * only_b > 2 * n {
        return Err(format!("unbalanced: {only_a} / {only_b} of {n}"));
    }
    Ok((0..n).filter(|&v| a[v] && b[v]).count())
}

/// Disjoint nonempty sets, each within `depth` of its center inside the set.
pub fn check_model(g: &Graph, model: &BranchModel, depth: usize) -> Result<(), String> {
    let n = g.n();
    if model.sets.len() != model.centers.len() {
        return Err("centers and sets differ in length".into());
    }
    let mut owner = vec![usize::MAX; n];
    for (i, set) in model.sets.iter().enumerate() {
        if set.is_empty() {
            return Err(format!("branch set {i} empty"));
        }
        for &v in set {
            if v >= n {
                return Err(format!("vertex {v} out of range"));
            }
            if owner[v] != usize::MAX {
                return Err(format!("vertex {v} in two branch sets"));
            }
            owner[v] = i;
        }
    }
    let adj = adjacency(g);
    for (i, set) in model.sets.iter().enumerate() {
        let c = model.centers[i];
        if c >= n || owner[c] != i {
            return Err(format!("center of set {i} not inside it"));
        }
        let mut dist = vec![usize::MAX; n];
        dist[c] = 0;
        let mut queue = VecDeque::from([c]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if adj[u][w] && owner[w] == i && dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if let Some(&v) = set.iter().find(|&&v| dist[v] > depth) {
            return Err(format!("vertex {v} of set {i} beyond depth {depth}"));
        }
    }
    Ok(())
}

/// [`check_model`] plus an edge between every pair of branch sets.
pub fn check_clique_model(g: &Graph, model: &BranchModel, depth: usize) -> Result<(), String> {
    check_model(g, model, depth)?;
    let adj = adjacency(g);
    let k = model.sets.len();
    for i in 0..k {
        for j in i + 1..k {
            let touch = model.sets[i].iter().any(|&u| model.sets[j].iter().any(|&v| adj[u][v]));
            if !touch {
                return Err(format!("branch sets {i} and {j} not adjacent"));
            }
        }
    }
    Ok(())
}

/// Edges of the contraction of `model` in `g`, counted once per pair.
pub fn contracted_edges(g: &Graph, model: &BranchModel) -> usize {
    let n = g.n();
    let mut owner = vec![usize::MAX; n];
    for (i, set) in model.sets.iter().enumerate() {
        for &v in set {
            owner[v] = i;
        }
    }
    let mut pairs = std::collections::BTreeSet::new();
    for (u, v) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != usize::MAX && b != usize::MAX && a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    pairs.len()
}

/// Vertex and edge coverage, connected occurrence sets, and a forest shape.
/// Returns the width.
pub fn check_decomposition(g: &Graph, td: &TreeDecomposition) -> Result<i64, String> {
    let n = g.n();
    let k = td.bags.len();
    if n > 0 && k == 0 {
        return Err("no bags".into());
    }
    let bags: Vec<Vec<bool>> = td.bags.iter().map(|b| members(n, b.iter())).collect();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree_adj = vec![Vec::new(); k];
    for &(i, j) in &td.tree {
        if i >= k || j >= k || i == j {
            return Err(format!("bad tree edge {i}-{j}"));
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            return Err("tree has a cycle".into());
        }
        parent[ri] = rj;
        tree_adj[i].push(j);
        tree_adj[j].push(i);
    }
    for v in 0..n {
        let holding: Vec<usize> = (0..k).filter(|&i| bags[i][v]).collect();
        let Some(&start) = holding.first() else {
            return Err(format!("vertex {v} in no bag"));
        };
        let mut seen = vec![false; k];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(i) = stack.pop() {
            for &j in &tree_adj[i] {
                if bags[j][v] && !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    stack.push(j);
                }
            }
        }
        if reached != holding.len() {
            return Err(format!("bags holding {v} disconnected"));
        }
    }
    for (u, v) in g.edges() {
        if !(0..k).any(|i| bags[i][u] && bags[i][v]) {
            return Err(format!("edge {u}-{v} in no bag"));
        }
    }
    Ok(td.bags.iter().map(|b| b.len() as i64).max().unwrap_or(0) - 1)
}

/// Component sizes of `g - s` restricted to `universe`.
fn component_sizes(adj: &[Vec<bool>], universe: &[usize], removed: &[bool]) -> Vec<usize> {
    let n = adj.len();
    let mut inside = vec![false; n];
    for &v in universe {
        inside[v] = !removed[v];
    }
    let mut sizes = Vec::new();
    for &s in universe {
        if !inside[s] {
            continue;
        }
        inside[s] = false;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for w in 0..n {
                if adj[u][w] && inside[w] {
                    inside[w] = false;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Whether the sizes split into two groups each at most `cap`.
fn splittable(sizes: &[usize], cap: usize) -> bool {
    let total: usize = sizes.iter().sum();
    let mut reach = vec![false; total + 1];
    reach[0] = true;
    for &s in sizes {
        for x in (s..=total).rev() {
            if reach[x - s] {
                reach[x] = true;
            }
        }
    }
    (0..=total).any(|x| reach[x] && x <= cap && total - x <= cap)
}

/// Minimum balanced separator order of `g[universe]`, balance measured
/// against `|universe|`, by trying every candidate middle set.
pub fn brute_separator_order_in(adj: &[Vec<bool>], universe: &[usize]) -> usize {
    let k = universe.len();
    assert!(k <= 20);
    let cap = 2 * k / 3;
    let mut best = k;
    for mask in 0u32..(1u32 << k) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let mut removed = vec![false; adj.len()];
        for (i, &v) in universe.iter().enumerate() {
            removed[v] = mask >> i & 1 == 1;
        }
        if splittable(&component_sizes(adj, universe, &removed), cap) {
            best = size;
        }
    }
    best
}

pub fn brute_separator_order(g: &Graph) -> usize {
    let all: Vec<usize> = (0..g.n()).collect();
    brute_separator_order_in(&adjacency(g), &all)
}

/// Largest optimal separator order over connected induced subgraphs.
pub fn max_subgraph_separator_order(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 12);
    let adj = adjacency(g);
    let mut best = 0;
    for mask in 1u32..(1u32 << n) {
        let universe: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let none = vec![false; n];
        if component_sizes(&adj, &universe, &none).len() != 1 {
            continue;
        }
        best = best.max(brute_separator_order_in(&adj, &universe));
    }
    best
}

/// Treewidth as the best elimination order over all permutations.
pub fn brute_treewidth(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 8);
    if n == 0 {
        return 0;
    }
    let adj = adjacency(g);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = n - 1;
    permute(&mut order, 0, &mut |perm| {
        let mut a = adj.clone();
        let mut gone = vec![false; n];
        let mut width = 0;
        for &v in perm {
            let nb: Vec<usize> = (0..n).filter(|&w| !gone[w] && a[v][w]).collect();
            width = width.max(nb.len());
            for &x in &nb {
                for &y in &nb {
                    if x != y {
                        a[x][y] = true;
                    }
                }
            }
            gone[v] = true;
        }
        best = best.min(width);
    });
    best
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Maximum `|E(H)| / |V(H)|` over minors with branch sets of radius at most
/// `r`, by assigning each vertex to a center or to nothing.
pub fn brute_nabla(g: &Graph, r: usize) -> f64 {
    let n = g.n();
    assert!(n <= 7);
    let mut best = 0.0f64;
    let mut assign = vec![usize::MAX; n];
    brute_assign(g, r, 0, &mut assign, &mut best);
    best
}

fn brute_assign(g: &Graph, r: usize, v: usize, assign: &mut Vec<usize>, best: &mut f64) {
    let n = g.n();
    if v == n {
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, &a) in assign.iter().enumerate() {
            if a != usize::MAX {
                sets[a].push(u);
            }
        }
        let mut model = BranchModel {
            depth: r,
            sets: Vec::new(),
            centers: Vec::new(),
        };
        for (c, set) in sets.into_iter().enumerate() {
            if !set.is_empty() {
                model.sets.push(set);
                model.centers.push(c);
            }
        }
        if model.sets.is_empty() || check_model(g, &model, r).is_err() {
            return;
        }
        let d = contracted_edges(g, &model) as f64 / model.sets.len() as f64;
        *best = best.max(d);
        return;
    }
    for a in (0..n).map(Some).chain([None]) {
        assign[v] = a.unwrap_or(usize::MAX);
        brute_assign(g, r, v + 1, assign, best);
    }
}

/// `count` Erdős–Rényi and tree instances with `lo <= n <= hi`.
pub fn random_suite(count: usize, lo: usize, hi: usize, seed: u64) -> Vec<Graph> {
    let span = (hi - lo + 1) as u64;
    (0..count as u64)
        .map(|i| {
            let s = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(i.wrapping_mul(1442695040888963407));
            let n = lo + ((s >> 33) % span) as usize;
            match i % 5 {
                4 => families::random_tree(n, s),
                k => {
                    let p = [0.12, 0.25, 0.4, 0.7][k as usize];
                    families::gnp(n, p, s)
                }
            }
        })
        .collect()
}

/// Small members of every family generator, plus named graphs.
pub fn family_suite() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    let specs = [
        FamilySpec::new(FamilyKind::Path, 17),
        FamilySpec::new(FamilyKind::Cycle, 12),
        FamilySpec::new(FamilyKind::Grid, 5),
        FamilySpec::new(FamilyKind::Tree, 20).with_seed(3),
        FamilySpec::new(FamilyKind::Clique, 9),
        FamilySpec::new(FamilyKind::CubicRandom, 16).with_seed(1),
        FamilySpec::new(FamilyKind::CDelta, 6).with_delta(0.5).with_seed(2),
    ];
    for spec in specs {
        out.push((spec.to_string(), spec.generate().expect("valid spec")));
    }
    out.push(("petersen".into(), families::petersen()));
    out.push(("star".into(), families::star(9)));
    out.push(("binary-tree".into(), families::binary_tree(15)));
    out.push(("subdivided-k5".into(), families::subdivide(&families::complete(5), 1)));
    out
}
