//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use polysep::bounds::{self, BoundParams};
use polysep::experiment::{self, ExperimentConfig, ExperimentKind, SeparatorAlgorithm};
use polysep::families::{self, ExpansionMode, FamilyKind};
use polysep::minor;
use polysep::pipeline::{self, PipelineOptions, PipelineStage};
use polysep::separator::{self, DichotomyResult, DEFAULT_RETRY_CAP};
use polysep::treewidth::{self, DichotomyProvider, SweepProvider};
use polysep::{Error, Graph};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    match failures.first() {
        None => Outcome {
            pass: true,
            detail: summary,
        },
        Some(first) => Outcome {
            pass: false,
            detail: format!("{summary}; {} failures, first: {first}", failures.len()),
        },
    }
}

fn check(failures: &mut Vec<String>, what: &str, r: Result<impl Sized, String>) {
    if let Err(e) = r {
        failures.push(format!("{what}: {e}"));
    }
}

fn certify_all(label: &str, g: &Graph, failures: &mut Vec<String>) -> usize {
    let certified = std::cell::Cell::new(0);
    let sep = |what: &str, s: &polysep::Separator, failures: &mut Vec<String>| {
        certified.set(certified.get() + 1);
        check(failures, &format!("{label} {what}"), common::check_separator(g, s));
    };
    sep("sweep", &separator::sweep_separator(g), failures);
    if g.n() >= 2 {
        match separator::prs_dichotomy(g, 2, 8, 8.0) {
            Ok(DichotomyResult::Separator { separator, .. }) => sep("prs", &separator, failures),
            Ok(DichotomyResult::Minor(m)) => check(
                failures,
                &format!("{label} prs minor"),
                common::check_clique_model(g, &m, m.depth),
            ),
            Err(e) => failures.push(format!("{label} prs: {e}")),
        }
        match separator::separator_from_expansion(g, 1.0, 1.0, 1e6, 8.0, DEFAULT_RETRY_CAP) {
            Ok(r) => sep("expansion", &r.separator, failures),
            Err(Error::ExpansionPromiseViolated { .. }) => {}
            Err(e) => failures.push(format!("{label} expansion: {e}")),
        }
    }
    if g.n() <= 16 {
        match separator::optimal_balanced_separator(g) {
            Ok(s) => sep("oracle", &s, failures),
            Err(e) => failures.push(format!("{label} oracle: {e}")),
        }
        match treewidth::exact_treewidth(g) {
            Ok((tw, td)) => {
                match common::check_decomposition(g, &td) {
                    Ok(w) if w == tw as i64 => {}
                    Ok(w) => failures.push(format!("{label} exact tw {tw} but width {w}")),
                    Err(e) => failures.push(format!("{label} exact td: {e}")),
                }
                if g.n() >= 1 {
                    match treewidth::separator_from_decomposition(g, &td) {
                        Ok(s) => sep("from exact td", &s, failures),
                        Err(e) => failures.push(format!("{label} td separator: {e}")),
                    }
                }
            }
            Err(e) => failures.push(format!("{label} exact tw: {e}")),
        }
    }
    let prs = DichotomyProvider {
        l: 2,
        h: 8,
        budget_const: 8.0,
    };
    for (name, provider) in [
        ("sweep", &SweepProvider as &dyn treewidth::SeparatorProvider),
        ("prs", &prs),
    ] {
        match treewidth::decomposition_from_separators(g, provider, 1.0) {
            Ok(d) => {
                certified.set(certified.get() + 1);
                check(
                    failures,
                    &format!("{label} {name} td"),
                    common::check_decomposition(g, &d.decomposition),
                );
                if g.n() >= 1 {
                    match treewidth::separator_from_decomposition(g, &d.decomposition) {
                        Ok(s) => sep("from recursive td", &s, failures),
                        Err(e) => failures.push(format!("{label} td separator: {e}")),
                    }
                }
            }
            Err(e) => failures.push(format!("{label} {name} recursion: {e}")),
        }
    }
    for r in [0, 1] {
        match minor::nabla_greedy(g, r, 7) {
            Ok(res) => {
                certified.set(certified.get() + 1);
                check(
                    failures,
                    &format!("{label} greedy r={r}"),
                    common::check_model(g, &res.model, r),
                );
                if common::contracted_edges(g, &res.model) < res.density.edges {
                    failures.push(format!("{label} greedy r={r} claims more edges than its model has"));
                }
            }
            Err(e) => failures.push(format!("{label} greedy: {e}")),
        }
    }
    if let Ok(m) = minor::greedy_shallow_clique(g, 4, 1, 3) {
        certified.set(certified.get() + 1);
        check(
            failures,
            &format!("{label} clique"),
            common::check_clique_model(g, &m, 1),
        );
    }
    certified.get()
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut certified = 0;
    let suite = common::random_suite(500, 2, 40, 1);
    for (i, g) in suite.iter().enumerate() {
        certified += certify_all(&format!("random#{i}"), g, &mut failures);
    }
    let fam = common::family_suite();
    for (name, g) in &fam {
        certified += certify_all(name, g, &mut failures);
    }
    let k20 = families::complete(20);
    let opts = PipelineOptions {
        threshold: Some(1.0),
        t: Some(4),
        depth: Some(1),
        n0: 4,
        ..PipelineOptions::default()
    };
    match pipeline::subgraph_expansion_pipeline(&k20, 0.5, 1.0, 1.0, &opts) {
        Ok(rep) if rep.stage == PipelineStage::Embedded => {
            certified += 2;
            let model = rep.clique_model.as_ref().expect("embedded implies a model");
            check(
                &mut failures,
                "pipeline model",
                common::check_clique_model(&k20, model, rep.depth),
            );
            let sub = rep.subgraph.as_ref().expect("embedded implies a subgraph");
            let mut deg = vec![0; k20.n()];
            for &(u, v) in &sub.edges {
                if !k20.has_edge(u, v) || !sub.vertices.contains(&u) || !sub.vertices.contains(&v) {
                    failures.push(format!("pipeline edge {u}-{v} not in host"));
                }
                deg[u] += 1;
                deg[v] += 1;
            }
            if deg.iter().any(|&d| d > 3) {
                failures.push("pipeline subgraph degree above 3".into());
            }
        }
        Ok(rep) => failures.push(format!("pipeline stopped at {:?}", rep.stage)),
        Err(e) => failures.push(format!("pipeline: {e}")),
    }
    outcome(
        &failures,
        format!(
            "{} random + {} family graphs, {certified} certificates",
            suite.len(),
            fam.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let small: Vec<Graph> = common::random_suite(500, 2, 40, 1)
        .into_iter()
        .filter(|g| g.n() <= 12)
        .collect();
    for (i, g) in small.iter().enumerate() {
        let opt = separator::optimal_balanced_separator(g).expect("n <= 12").order();
        if let Ok(DichotomyResult::Separator { separator, .. }) = separator::prs_dichotomy(g, 2, 8, 8.0) {
            if separator.order() < opt {
                failures.push(format!(
                    "graph {i}: prs order {} below optimum {opt}",
                    separator.order()
                ));
            }
        }
        for r in 0..=2 {
            let exact = minor::nabla_exact(g, r).expect("n <= 12").density;
            let greedy = minor::nabla_greedy(g, r, i as u64).expect("greedy").density;
            if greedy > exact {
                failures.push(format!("graph {i} r={r}: greedy {greedy} above exact {exact}"));
            }
        }
    }
    outcome(&failures, format!("{} graphs with n <= 12, r in 0..=2", small.len()))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let suite = common::random_suite(150, 2, 14, 3);
    for (i, g) in suite.iter().enumerate() {
        let (tw, td) = treewidth::exact_treewidth(g).expect("n <= 14");
        match treewidth::separator_from_decomposition(g, &td) {
            Ok(s) => match common::check_separator(g, &s) {
                Ok(order) if order <= tw + 1 => {}
                Ok(order) => failures.push(format!("graph {i}: order {order} > tw + 1 = {}", tw + 1)),
                Err(e) => failures.push(format!("graph {i}: {e}")),
            },
            Err(e) => failures.push(format!("graph {i}: {e}")),
        }
    }
    outcome(&failures, format!("{} graphs with n <= 14", suite.len()))
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let suite = common::random_suite(120, 2, 10, 4);
    let mut worst: f64 = 0.0;
    for (i, g) in suite.iter().enumerate() {
        let (tw, _) = treewidth::exact_treewidth(g).expect("n <= 10");
        let k = common::max_subgraph_separator_order(g);
        worst = worst.max(tw as f64 / k as f64);
        if tw > 105 * k {
            failures.push(format!("graph {i}: tw {tw} > 105 * {k}"));
        }
    }
    outcome(
        &failures,
        format!("{} graphs with n <= 10, max tw/k = {worst:.3}", suite.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut certified = 0;
    for n in [4, 6, 8, 10, 12, 14] {
        for seed in 0..50 {
            let g = families::random_cubic(n, seed).expect("even n");
            let cert = families::expansion_of(&g, ExpansionMode::Exact, 0).expect("exact");
            if cert.boundary == 0 {
                continue;
            }
            certified += 1;
            let alpha = cert.boundary as f64 / cert.size as f64;
            let bound = alpha / (3.0 * (1.0 + alpha)) * n as f64 - 1.0;
            let lib = treewidth::expander_tw_lower_bound(alpha, n).expect("valid alpha");
            if (lib - bound).abs() > 1e-9 {
                failures.push(format!("n={n} seed={seed}: library bound {lib} vs {bound}"));
            }
            let (tw, _) = treewidth::exact_treewidth(&g).expect("n <= 14");
            if (tw as f64) < bound {
                failures.push(format!("n={n} seed={seed}: tw {tw} < {bound}"));
            }
        }
    }
    outcome(&failures, format!("{certified} certified expanders"))
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for delta in [0.25, 0.5, 0.75, 1.0] {
        let mut prev = 0.0;
        for c in [1.0, 2.0, 10.0, 100.0] {
            match bounds::solve_a(delta, c, 1e-9) {
                Ok(a) => {
                    let l = 1.0 + a.ln();
                    let res = (a.powf(delta) - 4.0 * c * l * l).abs();
                    worst = worst.max(res);
                    if res > 1e-9 {
                        failures.push(format!("delta={delta} c={c}: residual {res:e}"));
                    }
                    if a <= prev {
                        failures.push(format!("delta={delta}: a not increasing at c={c}"));
                    }
                    prev = a;
                }
                Err(e) => failures.push(format!("delta={delta} c={c}: {e}")),
            }
        }
    }
    outcome(&failures, format!("16 cells, max residual {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let radii = bounds::powers_of_two(10);
    let mut parts = Vec::new();
    for delta in [1.0, 0.5, 0.25] {
        for c in [1.0, 10.0] {
            match bounds::bound_slopes(&BoundParams::new(c, delta, 1), &radii) {
                Ok(s) => {
                    let lin = 4.0 / delta + 0.5;
                    let quad = 5.0 / (delta * delta) + 0.5;
                    for (name, slope, cap) in [
                        ("b", s.b.exponent, lin),
                        ("p", s.p.exponent, lin),
                        ("f", s.f.exponent, quad),
                    ] {
                        if !(slope <= cap) {
                            failures.push(format!("delta={delta} c={c}: slope({name}) = {slope:.3} > {cap}"));
                        }
                    }
                    if c == 1.0 {
                        parts.push(format!(
                            "d={delta}: {:.2}/{:.2}/{:.2}",
                            s.b.exponent, s.p.exponent, s.f.exponent
                        ));
                    }
                }
                Err(e) => failures.push(format!("delta={delta} c={c}: {e}")),
            }
        }
    }
    outcome(&failures, format!("slopes b/p/f {}", parts.join(", ")))
}

fn scaling(family: FamilyKind, sizes: &[usize], delta: Option<f64>) -> polysep::Result<experiment::ExperimentOutcome> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::SeparatorScaling,
        family,
        sizes: sizes.to_vec(),
        family_delta: delta,
        seed: 11,
        repetitions: 5,
        algorithm: SeparatorAlgorithm::Prs,
        ..ExperimentConfig::default()
    };
    experiment::run_experiment(&cfg)
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    let cases: [(&str, FamilyKind, &[usize], Option<f64>, f64, f64, f64); 3] = [
        (
            "grid",
            FamilyKind::Grid,
            &[4, 6, 8, 12, 16, 20, 24, 32],
            None,
            0.4,
            0.6,
            0.8,
        ),
        (
            "path",
            FamilyKind::Path,
            &[16, 32, 64, 128, 256, 512],
            None,
            f64::NEG_INFINITY,
            0.15,
            f64::NEG_INFINITY,
        ),
        (
            "c-delta",
            FamilyKind::CDelta,
            &[16, 24, 32, 48, 64, 96, 128],
            Some(0.5),
            0.35,
            0.65,
            f64::NEG_INFINITY,
        ),
    ];
    for (name, family, sizes, delta, lo, hi, r2) in cases {
        match scaling(family, sizes, delta) {
            Ok(out) => {
                let Some(fit) = out.fits.first() else {
                    failures.push(format!("{name}: no fit"));
                    continue;
                };
                let e = fit.fit.exponent;
                parts.push(format!("{name} {e:.3} (r2 {:.3})", fit.fit.r_squared));
                if fit.fit.points.len() < 6 {
                    failures.push(format!("{name}: only {} sizes", fit.fit.points.len()));
                }
                if !(e >= lo && e <= hi) || !(fit.fit.r_squared >= r2) {
                    failures.push(format!("{name}: exponent {e:.3}, r2 {:.3}", fit.fit.r_squared));
                }
                if out.minor_outcomes > 0 {
                    failures.push(format!("{name}: {} minor outcomes", out.minor_outcomes));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if let Ok(out) = scaling(FamilyKind::CDelta, &[6, 8, 10, 12, 14, 16], Some(0.5)) {
        if let Some(fit) = out.fits.first() {
            parts.push(format!("[c-delta bases 6..16: {:.3}, not asserted]", fit.fit.exponent));
        }
    }
    outcome(&failures, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for n in (12..=22).step_by(2) {
        let found = (0..50u64).find(|&seed| {
            let g = families::random_cubic(n, seed).expect("even n");
            families::expansion_of(&g, ExpansionMode::Exact, 0)
                .expect("exact")
                .at_least(1, 7)
        });
        match found {
            Some(seed) => parts.push(format!("n={n}:seed {seed}")),
            None => failures.push(format!("n={n}: no seed certifies alpha >= 1/7")),
        }
    }
    outcome(&failures, parts.join(" "))
}

fn strip_wall(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_10() -> Outcome {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().expect("tempdir");
    let configs = [
        "experiment = \"separator-scaling\"\nfamily = \"c-delta\"\nfamily_delta = 0.5\nsizes = [6, 8, 10]\nrepetitions = 3\nseed = 5\n",
        "experiment = \"separator-scaling\"\nfamily = \"tree\"\nsizes = [10, 20, 40]\nrepetitions = 3\nseed = 9\nalgorithm = \"expansion\"\n",
        "experiment = \"expansion-scaling\"\nfamily = \"cubic-random\"\nsizes = [8, 10]\nradii = [0, 1, 2]\nrestarts = 20\nseed = 2\n",
        "experiment = \"bound-table\"\nc_values = [1.0, 10.0]\ndeltas = [0.5, 1.0]\nr_max_log2 = 6\n",
    ];
    for (i, text) in configs.iter().enumerate() {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}-{rep}.csv"));
            let mut cfg = match ExperimentConfig::from_toml(text) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("config {i}: {e}"));
                    break;
                }
            };
            cfg.csv = Some(path.clone());
            if let Err(e) = experiment::run_experiment(&cfg) {
                failures.push(format!("config {i}: {e}"));
                break;
            }
            runs.push(strip_wall(&std::fs::read_to_string(&path).expect("csv written")));
        }
        if runs.len() == 2 && runs[0].as_bytes() != runs[1].as_bytes() {
            failures.push(format!("config {i}: CSV differs between runs"));
        }
        if runs.first().is_some_and(|r| r.lines().count() < 2) {
            failures.push(format!("config {i}: no records"));
        }
    }
    outcome(&failures, format!("{} configs run twice", configs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("certificate soundness", criterion_1, Duration::from_secs(120)),
        ("oracle dominance", criterion_2, Duration::MAX),
        ("decomposition to separator", criterion_3, Duration::MAX),
        ("treewidth vs separator order", criterion_4, Duration::MAX),
        ("expander treewidth bound", criterion_5, Duration::MAX),
        ("solver residual", criterion_6, Duration::from_secs(1)),
        ("bound slopes", criterion_7, Duration::from_secs(5)),
        ("separator exponent fits", criterion_8, Duration::from_secs(300)),
        ("expander existence", criterion_9, Duration::from_secs(600)),
        ("reproducibility", criterion_10, Duration::MAX),
    ];
    let mut all = true;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let took = start.elapsed();
        if took > limit {
            out.pass = false;
            out.detail = format!("{} (over the {:?} limit)", out.detail, limit);
        }
        all &= out.pass;
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name}: {} [{:.2?}]", i + 1, out.detail, took);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
