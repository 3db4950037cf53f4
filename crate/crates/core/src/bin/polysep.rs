use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use polysep::bounds::{bound_row, powers_of_two, residual_a, solve_a, BoundParams, DEFAULT_TOL};
use polysep::error::{Error, Result};
use polysep::experiment::{run_experiment, ExperimentConfig, ExperimentKind, SeparatorAlgorithm, CSV_HEADER};
use polysep::families::{expansion_of, ExpansionMode, FamilyKind, FamilySpec};
use polysep::graph::Graph;
use polysep::minor::{
    contract_model, exact_shallow_clique, greedy_shallow_clique, nabla_exact, nabla_greedy_with, BranchModel,
    GreedyOptions,
};
use polysep::pipeline::{subgraph_expansion_pipeline, PipelineOptions};
use polysep::separator::{
    certify_balanced, optimal_balanced_separator, prs_dichotomy, separator_from_expansion, sweep_separator,
    validate_separator, verify_cb_separators, CbMode, DichotomyResult, SeparatorJson, DEFAULT_BUDGET_CONST,
    DEFAULT_RETRY_CAP,
};
use polysep::treewidth::{
    decomposition_from_separators, exact_treewidth, expander_tw_lower_bound, separator_from_decomposition,
    validate_decomposition, DichotomyProvider, OracleProvider, SeparatorProvider, SweepProvider, TreeDecomposition,
    TreeDecompositionJson,
};

/// Balanced separators, shallow minors and treewidth tools.
#[derive(Parser)]
#[command(name = "polysep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph I/O and statistics.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Balanced separators.
    #[command(subcommand)]
    Separate(SeparateCmd),
    /// Shallow minors and expansion.
    #[command(subcommand)]
    Minor(MinorCmd),
    /// Tree decompositions.
    #[command(subcommand)]
    Tw(TwCmd),
    /// Instance families.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Explicit bound functions.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Scaling experiments.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Graph file in edge-list format, or `-` for stdin.
    graph: PathBuf,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Vertex/edge counts, degrees, components.
    Stats(GraphInput),
    /// Rewrites a graph in canonical form.
    Canonical(GraphInput),
}

#[derive(Subcommand)]
enum SeparateCmd {
    /// Region growing: a separator or a shallow clique minor.
    Prs {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 8)]
        h: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET_CONST)]
        budget_const: f64,
    },
    /// Separator for a graph promised to have expansion at most k (r+1)^d.
    Expansion {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 1e6)]
        c_out: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET_CONST)]
        budget_const: f64,
        #[arg(long, default_value_t = DEFAULT_RETRY_CAP)]
        retry_cap: usize,
    },
    /// BFS level sweep.
    Sweep(GraphInput),
    /// Exhaustive minimum-order balanced separator (n <= 18).
    Oracle(GraphInput),
    /// Checks a separator JSON file against a graph.
    Verify {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        separator: PathBuf,
    },
    /// Checks that subgraphs have separators of order at most c |V(H)|^beta.
    Cb {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        beta: f64,
        /// Sample this many subgraphs instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum MinorCmd {
    /// Contracts a branch model given as JSON.
    Contract {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        model: PathBuf,
        /// Keep only the densest part of the minor.
        #[arg(long)]
        prune: bool,
    },
    /// Exact nabla_r (n <= 16 for r = 0, n <= 12 otherwise).
    NablaExact {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        r: usize,
    },
    /// Lower bound on nabla_r by randomized search.
    NablaGreedy {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
    },
    /// Searches for a K_t model of bounded depth.
    Clique {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the exhaustive search (n <= 12).
        #[arg(long)]
        exact: bool,
    },
    /// Dense graph to max-degree-3 subgraph of large treewidth.
    Pipeline {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = polysep::families::DEFAULT_N0)]
        n0: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Provider {
    Oracle,
    Sweep,
    Prs,
}

#[derive(Subcommand)]
enum TwCmd {
    /// Exact treewidth with a witnessing decomposition (n <= 16).
    Exact(GraphInput),
    /// Decomposition built from recursive balanced separators.
    FromSeparators {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, value_enum, default_value_t = Provider::Sweep)]
        provider: Provider,
        #[arg(long, default_value_t = 1.0)]
        k_hint: f64,
    },
    /// Balanced separator from a decomposition JSON file.
    ToSeparator {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Checks a decomposition JSON file.
    Validate {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Treewidth lower bound for an alpha-expander on n vertices.
    LowerBound {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Generates a family member, e.g. `grid:n=5` or `c-delta:n=10,delta=0.5,seed=1`.
    Generate {
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertex expansion of a graph (exact for n <= 22).
    Expansion {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Table of (c, delta, r) -> (epsilon, m, t, b, p, f).
    Table {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        c: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        r_max_log2: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Root of a^delta = 4c ln^2(e a).
    SolveA {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    kind: ExperimentKind,
    /// TOML config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<FamilyKind>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    family_delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    algorithm: Option<SeparatorAlgorithm>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    #[arg(long)]
    r_max_log2: Option<u32>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::InvalidParameter(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(input: &GraphInput) -> Result<Graph> {
    Graph::read_graph(&read_text(&input.graph)?)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidParameter(_) | Error::Degenerate(_) => 1,
        Error::SizeLimit { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Graph(c) => graph_cmd(c),
        Command::Separate(c) => separate_cmd(c),
        Command::Minor(c) => minor_cmd(c),
        Command::Tw(c) => tw_cmd(c),
        Command::Family(c) => family_cmd(c),
        Command::Bounds(c) => bounds_cmd(c),
        Command::Experiment(a) => experiment_cmd(a),
    }
}

fn graph_cmd(cmd: GraphCmd) -> Result<()> {
    match cmd {
        GraphCmd::Stats(input) => {
            let g = load_graph(&input)?;
            let comps = g.components();
            print_json(&json!({
                "n": g.n(),
                "m": g.m(),
                "max_degree": g.max_degree(),
                "components": comps.len(),
                "largest_component": comps.iter().map(|c| c.len()).max().unwrap_or(0),
                "density": if g.n() == 0 { 0.0 } else { g.m() as f64 / g.n() as f64 },
            }));
        }
        GraphCmd::Canonical(input) => print!("{}", load_graph(&input)?.write_graph()),
    }
    Ok(())
}

fn separate_cmd(cmd: SeparateCmd) -> Result<()> {
    match cmd {
        SeparateCmd::Prs {
            input,
            l,
            h,
            budget_const,
        } => {
            let g = load_graph(&input)?;
            match prs_dichotomy(&g, l, h, budget_const)? {
                DichotomyResult::Separator {
                    separator,
                    certificate,
                    budget,
                } => print_json(&json!({
                    "outcome": "separator",
                    "separator": separator.to_json(&certificate),
                    "budget": budget,
                })),
                DichotomyResult::Minor(model) => print_json(&json!({"outcome": "minor", "model": model})),
            }
        }
        SeparateCmd::Expansion {
            input,
            k,
            d,
            c_out,
            budget_const,
            retry_cap,
        } => {
            let g = load_graph(&input)?;
            let r = separator_from_expansion(&g, k, d, c_out, budget_const, retry_cap)?;
            print_json(&json!({
                "separator": r.separator.to_json(&r.certificate),
                "delta": r.delta,
                "l": r.l,
                "h": r.h,
                "attempts": r.attempts,
                "bound": r.bound,
                "promise_excludes_minor": r.promise_excludes_minor,
            }));
        }
        SeparateCmd::Sweep(input) => {
            let g = load_graph(&input)?;
            let sep = sweep_separator(&g);
            print_json(&sep.to_json(&certify_balanced(&g, &sep)?));
        }
        SeparateCmd::Oracle(input) => {
            let g = load_graph(&input)?;
            let sep = optimal_balanced_separator(&g)?;
            print_json(&sep.to_json(&certify_balanced(&g, &sep)?));
        }
        SeparateCmd::Verify { input, separator } => {
            let g = load_graph(&input)?;
            let json: SeparatorJson = load_json(&separator)?;
            let sep = json
                .into_separator(g.n())
                .map_err(|e| Error::Validation(e.to_string()))?;
            let cert = validate_separator(&g, &sep)?;
            print_json(&cert);
            if !cert.balanced {
                return Err(Error::Validation("separator is not balanced".into()));
            }
        }
        SeparateCmd::Cb {
            input,
            c,
            beta,
            samples,
            seed,
        } => {
            let g = load_graph(&input)?;
            let mode = match samples {
                Some(samples) => CbMode::Sampled { samples, seed },
                None => CbMode::Exhaustive,
            };
            let report = verify_cb_separators(&g, c, beta, mode)?;
            print_json(&report);
            if !report.consistent() {
                return Err(Error::Validation(format!("{} violations", report.violations.len())));
            }
        }
    }
    Ok(())
}

fn minor_json(r: &polysep::minor::MinorResult) -> serde_json::Value {
    json!({
        "density": r.density.value(),
        "edges": r.density.edges,
        "vertices": r.density.vertices,
        "model": r.model,
    })
}

fn minor_cmd(cmd: MinorCmd) -> Result<()> {
    match cmd {
        MinorCmd::Contract { input, model, prune } => {
            let g = load_graph(&input)?;
            let model: BranchModel = load_json(&model)?;
            let r = contract_model(&g, &model, !prune)?;
            let mut out = minor_json(&r);
            out["minor"] = json!(r.minor.write_graph());
            print_json(&out);
        }
        MinorCmd::NablaExact { input, r } => print_json(&minor_json(&nabla_exact(&load_graph(&input)?, r)?)),
        MinorCmd::NablaGreedy {
            input,
            r,
            seed,
            restarts,
        } => {
            let opts = GreedyOptions {
                restarts,
                ..GreedyOptions::default()
            };
            print_json(&minor_json(&nabla_greedy_with(&load_graph(&input)?, r, seed, opts)?));
        }
        MinorCmd::Clique {
            input,
            t,
            depth,
            seed,
            exact,
        } => {
            let g = load_graph(&input)?;
            if exact {
                match exact_shallow_clique(&g, t, depth)? {
                    Some(model) => print_json(&json!({"found": true, "model": model})),
                    None => print_json(&json!({"found": false, "exhaustive": true})),
                }
            } else {
                match greedy_shallow_clique(&g, t, depth, seed) {
                    Ok(model) => print_json(&json!({"found": true, "model": model})),
                    Err(report) => print_json(&json!({"found": false, "report": report})),
                }
            }
        }
        MinorCmd::Pipeline {
            input,
            eps,
            c,
            delta,
            threshold,
            t,
            depth,
            n0,
            seed,
        } => {
            let g = load_graph(&input)?;
            let opts = PipelineOptions {
                threshold,
                t,
                depth,
                n0,
                r: 1,
                seed,
            };
            print_json(&subgraph_expansion_pipeline(&g, eps, c, delta, &opts)?);
        }
    }
    Ok(())
}

fn load_decomposition(path: &Path, n: usize) -> Result<TreeDecomposition> {
    let json: TreeDecompositionJson = load_json(path)?;
    TreeDecomposition::from_json(n, &json)
}

fn tw_cmd(cmd: TwCmd) -> Result<()> {
    match cmd {
        TwCmd::Exact(input) => {
            let g = load_graph(&input)?;
            let (w, td) = exact_treewidth(&g)?;
            print_json(&json!({"treewidth": w, "decomposition": td.to_json()}));
        }
        TwCmd::FromSeparators {
            input,
            provider,
            k_hint,
        } => {
            let g = load_graph(&input)?;
            let dichotomy = DichotomyProvider {
                l: 2,
                h: 8,
                budget_const: DEFAULT_BUDGET_CONST,
            };
            let p: &dyn SeparatorProvider = match provider {
                Provider::Oracle => &OracleProvider,
                Provider::Sweep => &SweepProvider,
                Provider::Prs => &dichotomy,
            };
            let d = decomposition_from_separators(&g, p, k_hint)?;
            print_json(&json!({
                "width": d.width,
                "reference_width": d.reference_width,
                "max_separator_order": d.max_separator_order,
                "decomposition": d.decomposition.to_json(),
            }));
        }
        TwCmd::ToSeparator { input, decomposition } => {
            let g = load_graph(&input)?;
            let td = load_decomposition(&decomposition, g.n())?;
            let sep = separator_from_decomposition(&g, &td)?;
            print_json(&sep.to_json(&certify_balanced(&g, &sep)?));
        }
        TwCmd::Validate { input, decomposition } => {
            let g = load_graph(&input)?;
            let td = load_decomposition(&decomposition, g.n())?;
            validate_decomposition(&g, &td)?;
            print_json(&json!({"valid": true, "width": td.width()}));
        }
        TwCmd::LowerBound { alpha, n } => print_json(&json!({"lower_bound": expander_tw_lower_bound(alpha, n)?})),
    }
    Ok(())
}

fn family_cmd(cmd: FamilyCmd) -> Result<()> {
    match cmd {
        FamilyCmd::Generate { spec, out } => {
            let spec: FamilySpec = spec.parse()?;
            let text = spec.generate()?.write_graph();
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        FamilyCmd::Expansion { input, sampled, seed } => {
            let mode = if sampled {
                ExpansionMode::Sampled
            } else {
                ExpansionMode::Exact
            };
            print_json(&expansion_of(&load_graph(&input)?, mode, seed)?);
        }
    }
    Ok(())
}

fn bounds_cmd(cmd: BoundsCmd) -> Result<()> {
    match cmd {
        BoundsCmd::Table {
            c,
            delta,
            r_max_log2,
            format,
        } => {
            let mut rows = Vec::new();
            for &c in &c {
                for &d in &delta {
                    for r in powers_of_two(r_max_log2) {
                        rows.push(bound_row(&BoundParams::new(c, d, r))?);
                    }
                }
            }
            match format {
                Format::Json => {
                    for row in &rows {
                        print_json(row);
                    }
                }
                Format::Csv => {
                    println!("c,delta,r,epsilon,m,log10_t,log10_b,log10_p,log10_f,f_mode");
                    for row in &rows {
                        println!(
                            "{},{},{},{},{},{},{},{},{},{}",
                            row.c,
                            row.delta,
                            row.r,
                            row.epsilon,
                            row.m,
                            row.t.log10,
                            row.b.log10,
                            row.p.log10,
                            row.f.log10,
                            serde_json::to_value(row.f_mode)
                                .expect("enum")
                                .as_str()
                                .unwrap_or_default()
                        );
                    }
                }
            }
        }
        BoundsCmd::SolveA { delta, c, tol } => {
            let a = solve_a(delta, c, tol)?;
            print_json(&json!({"a": a, "residual": residual_a(a, delta, c)}));
        }
    }
    Ok(())
}

fn experiment_cmd(a: ExperimentArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = a.kind;
    macro_rules! set {
        ($($field:ident),*) => {$( if let Some(v) = a.$field { cfg.$field = v; } )*};
    }
    set!(
        family,
        sizes,
        seed,
        repetitions,
        algorithm,
        radii,
        restarts,
        deltas,
        c_values,
        r_max_log2
    );
    if a.family_delta.is_some() {
        cfg.family_delta = a.family_delta;
    }
    if a.csv.is_some() {
        cfg.csv = a.csv;
    }
    if a.jsonl.is_some() {
        cfg.jsonl = a.jsonl;
    }
    if a.plot_dir.is_some() {
        cfg.plot_dir = a.plot_dir;
    }
    let to_stdout = cfg.csv.is_none() && cfg.jsonl.is_none();
    let outcome = run_experiment(&cfg)?;
    if to_stdout {
        println!("{CSV_HEADER}");
        for r in &outcome.records {
            println!("{}", r.csv_line());
        }
    }
    for f in &outcome.fits {
        eprintln!(
            "fit {}: exponent {:.4}, ln constant {:.4}, r2 {:.4}{}",
            f.name,
            f.fit.exponent,
            f.fit.ln_constant,
            f.fit.r_squared,
            f.reference.map(|r| format!(", reference {r}")).unwrap_or_default()
        );
    }
    if outcome.minor_outcomes > 0 {
        eprintln!("minor outcomes excluded from fit: {}", outcome.minor_outcomes);
    }
    Ok(())
}
