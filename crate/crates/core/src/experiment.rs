//! Reproducible scaling experiments with streamed CSV/JSONL records and
//! static SVG plots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{bound_row, bound_slopes, powers_of_two, BoundParams, FitResult};
use crate::error::{Error, Result};
use crate::families::{FamilyKind, FamilySpec};
use crate::graph::Graph;
use crate::minor::{nabla_exact, nabla_greedy_with, Density, GreedyOptions, NABLA_EXACT_LIMIT, NABLA_EXACT_R0_LIMIT};
use crate::separator::{
    certify_balanced, optimal_balanced_separator, prs_dichotomy, separator_from_expansion, sweep_separator,
    DichotomyResult, DEFAULT_BUDGET_CONST, DEFAULT_RETRY_CAP, ORACLE_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SeparatorScaling,
    ExpansionScaling,
    BoundTable,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SeparatorScaling => "separator-scaling",
            ExperimentKind::ExpansionScaling => "expansion-scaling",
            ExperimentKind::BoundTable => "bound-table",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separator-scaling" => Ok(ExperimentKind::SeparatorScaling),
            "expansion-scaling" => Ok(ExperimentKind::ExpansionScaling),
            "bound-table" => Ok(ExperimentKind::BoundTable),
            other => Err(Error::InvalidParameter(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparatorAlgorithm {
    Prs,
    Expansion,
    Sweep,
    Oracle,
}

impl FromStr for SeparatorAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prs" => Ok(SeparatorAlgorithm::Prs),
            "expansion" => Ok(SeparatorAlgorithm::Expansion),
            "sweep" => Ok(SeparatorAlgorithm::Sweep),
            "oracle" => Ok(SeparatorAlgorithm::Oracle),
            other => Err(Error::InvalidParameter(format!(
                "unknown separator algorithm `{other}`"
            ))),
        }
    }
}

/// Declarative experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub family: FamilyKind,
    /// Family size parameters, strictly increasing.
    pub sizes: Vec<usize>,
    /// Subdivision exponent for the c-delta family.
    pub family_delta: Option<f64>,
    pub seed: u64,
    /// Instances per size.
    pub repetitions: usize,
    pub algorithm: SeparatorAlgorithm,
    pub l: usize,
    pub h: usize,
    pub budget_const: f64,
    /// Expansion promise `k (r + 1)^d` for the expansion schedule.
    pub k: f64,
    pub d: f64,
    pub c_out: f64,
    pub radii: Vec<usize>,
    pub restarts: usize,
    pub c_values: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Radii `1, 2, ..., 2^r_max_log2` for the bound table.
    pub r_max_log2: u32,
    pub n0: u64,
    pub csv: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::SeparatorScaling,
            family: FamilyKind::Grid,
            sizes: vec![4, 8, 16],
            family_delta: None,
            seed: 0,
            repetitions: 1,
            algorithm: SeparatorAlgorithm::Prs,
            l: 2,
            h: 8,
            budget_const: DEFAULT_BUDGET_CONST,
            k: 1.0,
            d: 1.0,
            c_out: 1e6,
            radii: vec![0, 1, 2, 4],
            restarts: 200,
            c_values: vec![1.0],
            deltas: vec![1.0],
            r_max_log2: 10,
            n0: crate::families::DEFAULT_N0,
            csv: None,
            jsonl: None,
            plot_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.experiment != ExperimentKind::BoundTable {
            if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "sizes must be nonempty and strictly increasing".into(),
                ));
            }
            for &n in &self.sizes {
                self.spec(n, 0).validate()?;
            }
        }
        if self.experiment == ExperimentKind::ExpansionScaling && self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
        }
        Ok(())
    }

    fn spec(&self, n: usize, seed: u64) -> FamilySpec {
        let mut spec = FamilySpec::new(self.family, n).with_seed(seed);
        if let Some(d) = self.family_delta {
            spec = spec.with_delta(d);
        }
        spec
    }

    fn family_label(&self) -> String {
        match (self.family, self.family_delta) {
            (FamilyKind::CDelta, Some(d)) => format!("c-delta-{d}"),
            (kind, _) => kind.name().to_string(),
        }
    }
}

/// One measured value. CSV columns: `family,n,seed,metric,value,wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub wall_ms: f64,
}

pub const CSV_HEADER: &str = "family,n,seed,metric,value,wall_ms";

impl ExperimentRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3}",
            self.family, self.n, self.seed, self.metric, self.value, self.wall_ms
        )
    }
}

/// Appends records to the configured files, flushing after each one so an
/// interrupted run leaves a valid prefix.
pub struct RecordSink {
    csv: Option<BufWriter<File>>,
    jsonl: Option<BufWriter<File>>,
    records: Vec<ExperimentRecord>,
}

impl RecordSink {
    pub fn new(csv: Option<&Path>, jsonl: Option<&Path>) -> Result<Self> {
        let open = |p: &Path| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", p.display())))
        };
        let mut csv = csv.map(open).transpose()?;
        if let Some(w) = csv.as_mut() {
            writeln!(w, "{CSV_HEADER}").and_then(|_| w.flush()).map_err(io_err)?;
        }
        Ok(RecordSink {
            csv,
            jsonl: jsonl.map(open).transpose()?,
            records: Vec::new(),
        })
    }

    pub fn in_memory() -> Self {
        RecordSink {
            csv: None,
            jsonl: None,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: ExperimentRecord) -> Result<()> {
        if !rec.value.is_finite() {
            return Err(Error::Numeric(format!("metric {} is not finite", rec.metric)));
        }
        if let Some(w) = self.csv.as_mut() {
            writeln!(w, "{}", rec.csv_line())
                .and_then(|_| w.flush())
                .map_err(io_err)?;
        }
        if let Some(w) = self.jsonl.as_mut() {
            let line = serde_json::to_string(&rec).map_err(|e| Error::Numeric(e.to_string()))?;
            writeln!(w, "{line}").and_then(|_| w.flush()).map_err(io_err)?;
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("write failed: {e}"))
}

/// Deterministic per-cell seed derived from the top-level seed.
pub fn fan_out(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: FitResult,
    /// Reference exponent the fit is compared against, if any.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub experiment: ExperimentKind,
    pub family: String,
    pub records: Vec<ExperimentRecord>,
    pub fits: Vec<NamedFit>,
    /// Cells whose region growing returned a clique minor instead.
    pub minor_outcomes: usize,
    pub skipped: usize,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let outcome = match cfg.experiment {
        ExperimentKind::SeparatorScaling => run_separator_scaling(cfg)?,
        ExperimentKind::ExpansionScaling => run_expansion_scaling(cfg)?,
        ExperimentKind::BoundTable => run_bound_table(cfg)?,
    };
    if let Some(dir) = &cfg.plot_dir {
        write_plots(dir, &outcome)?;
    }
    Ok(outcome)
}

fn sink_for(cfg: &ExperimentConfig) -> Result<RecordSink> {
    RecordSink::new(cfg.csv.as_deref(), cfg.jsonl.as_deref())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Separator order against `|V|` for each size, fitted on per-size means.
pub fn run_separator_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let family = cfg.family_label();
    let mut sink = sink_for(cfg)?;
    let mut minor_outcomes = 0;
    let mut points = Vec::new();
    let mut cell = 0u64;
    for &size in &cfg.sizes {
        let mut orders = Vec::new();
        let mut vertices = 0;
        for _ in 0..cfg.repetitions {
            let seed = fan_out(cfg.seed, cell);
            cell += 1;
            let g = cfg.spec(size, seed).generate()?;
            vertices = g.n();
            let start = Instant::now();
            let order = separate_once(cfg, &g)?;
            let wall = elapsed_ms(start);
            let rec = |metric: &str, value: f64| ExperimentRecord {
                family: family.clone(),
                n: g.n(),
                seed,
                metric: metric.to_string(),
                value,
                wall_ms: wall,
            };
            match order {
                Some(o) => {
                    orders.push(o as f64);
                    sink.push(rec("separator_order", o as f64))?;
                }
                None => {
                    minor_outcomes += 1;
                    sink.push(rec("minor_arm", 1.0))?;
                }
            }
        }
        if !orders.is_empty() {
            let mean = orders.iter().sum::<f64>() / orders.len() as f64;
            points.push((vertices as f64, mean.max(1e-9)));
        }
    }
    let mut fits = Vec::new();
    if points.len() >= 3 {
        fits.push(NamedFit {
            name: "separator_order".into(),
            fit: crate::bounds::fit_exponent(&points)?,
            reference: None,
        });
    }
    Ok(ExperimentOutcome {
        experiment: ExperimentKind::SeparatorScaling,
        family,
        records: sink.records().to_vec(),
        fits,
        minor_outcomes,
        skipped: 0,
    })
}

/// Order of a certified balanced separator, or `None` for a minor outcome.
fn separate_once(cfg: &ExperimentConfig, g: &Graph) -> Result<Option<usize>> {
    let sep = match cfg.algorithm {
        SeparatorAlgorithm::Prs => match prs_dichotomy(g, cfg.l, cfg.h, cfg.budget_const)? {
            DichotomyResult::Separator { separator, .. } => separator,
            DichotomyResult::Minor(model) => {
                model.validate(g)?;
                return Ok(None);
            }
        },
        SeparatorAlgorithm::Expansion => {
            match separator_from_expansion(g, cfg.k, cfg.d, cfg.c_out, cfg.budget_const, DEFAULT_RETRY_CAP) {
                Ok(r) => r.separator,
                Err(Error::ExpansionPromiseViolated { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        SeparatorAlgorithm::Sweep => sweep_separator(g),
        SeparatorAlgorithm::Oracle => {
            if g.n() > ORACLE_LIMIT {
                return Err(Error::size_limit("optimal balanced separator", g.n(), ORACLE_LIMIT));
            }
            optimal_balanced_separator(g)?
        }
    };
    certify_balanced(g, &sep)?;
    Ok(Some(sep.order()))
}

/// Greedy (and, where feasible, exact) `nabla_r` across radii. The fit is
/// density against `r + 1` at the largest size.
pub fn run_expansion_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let family = cfg.family_label();
    let mut sink = sink_for(cfg)?;
    let mut skipped = 0;
    let mut cell = 0u64;
    let mut last_curve = Vec::new();
    let opts = GreedyOptions {
        restarts: cfg.restarts,
        ..GreedyOptions::default()
    };
    for &size in &cfg.sizes {
        let mut curve = vec![0.0; cfg.radii.len()];
        for _ in 0..cfg.repetitions {
            let seed = fan_out(cfg.seed, cell);
            cell += 1;
            let g = cfg.spec(size, seed).generate()?;
            let mut knee = None;
            for (i, &r) in cfg.radii.iter().enumerate() {
                let start = Instant::now();
                let greedy = nabla_greedy_with(&g, r, seed, opts)?;
                greedy.model.validate(&g)?;
                let wall = elapsed_ms(start);
                curve[i] += greedy.density.value() / cfg.repetitions as f64;
                if knee.is_none() && greedy.density > Density::new(1, 1) {
                    knee = Some(r);
                }
                sink.push(ExperimentRecord {
                    family: family.clone(),
                    n: g.n(),
                    seed,
                    metric: format!("nabla_greedy:r={r}"),
                    value: greedy.density.value(),
                    wall_ms: wall,
                })?;
                let feasible = if r == 0 {
                    g.n() <= NABLA_EXACT_R0_LIMIT
                } else {
                    g.n() <= NABLA_EXACT_LIMIT
                };
                let start = Instant::now();
                let (metric, value) = if feasible {
                    (format!("nabla_exact:r={r}"), nabla_exact(&g, r)?.density.value())
                } else {
                    skipped += 1;
                    (format!("nabla_exact_skipped:r={r}"), 0.0)
                };
                sink.push(ExperimentRecord {
                    family: family.clone(),
                    n: g.n(),
                    seed,
                    metric,
                    value,
                    wall_ms: elapsed_ms(start),
                })?;
            }
            sink.push(ExperimentRecord {
                family: family.clone(),
                n: g.n(),
                seed,
                metric: "knee_radius".into(),
                value: knee.map_or(-1.0, |r| r as f64),
                wall_ms: 0.0,
            })?;
        }
        last_curve = curve;
    }
    let points: Vec<(f64, f64)> = cfg
        .radii
        .iter()
        .zip(&last_curve)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&r, &d)| ((r + 1) as f64, d))
        .collect();
    let mut fits = Vec::new();
    if points.len() >= 3 {
        fits.push(NamedFit {
            name: "nabla_greedy".into(),
            fit: crate::bounds::fit_exponent(&points)?,
            reference: None,
        });
    }
    Ok(ExperimentOutcome {
        experiment: ExperimentKind::ExpansionScaling,
        family,
        records: sink.records().to_vec(),
        fits,
        minor_outcomes: 0,
        skipped,
    })
}

/// Bound table over `(c, delta)` and radii `1..2^r_max_log2`, with fitted
/// slopes of `b`, `p`, `f` against the reference exponents `4/delta`,
/// `4/delta` and `5/delta^2`.
pub fn run_bound_table(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let mut sink = sink_for(cfg)?;
    let radii = powers_of_two(cfg.r_max_log2);
    let mut fits = Vec::new();
    for &c in &cfg.c_values {
        for &delta in &cfg.deltas {
            let label = format!("bounds-c{c}-delta{delta}");
            let mut params = BoundParams::new(c, delta, 1);
            params.n0 = cfg.n0;
            for &r in &radii {
                let start = Instant::now();
                let row = bound_row(&params.with_r(r))?;
                let wall = elapsed_ms(start);
                let values = [
                    ("epsilon", row.epsilon),
                    ("m", row.m as f64),
                    ("log10_t", row.t.log10),
                    ("log10_b", row.b.log10),
                    ("log10_p", row.p.log10),
                    ("log10_f", row.f.log10),
                    (
                        "f_log_space",
                        (row.f_mode == crate::bounds::FMode::LogSpace) as u8 as f64,
                    ),
                ];
                for (metric, value) in values {
                    sink.push(ExperimentRecord {
                        family: label.clone(),
                        n: r as usize,
                        seed: 0,
                        metric: metric.into(),
                        value,
                        wall_ms: wall,
                    })?;
                }
            }
            let slopes = bound_slopes(&params, &radii)?;
            for (name, fit, reference) in [
                ("b", slopes.b, 4.0 / delta),
                ("p", slopes.p, 4.0 / delta),
                ("f", slopes.f, 5.0 / (delta * delta)),
            ] {
                sink.push(ExperimentRecord {
                    family: label.clone(),
                    n: 0,
                    seed: 0,
                    metric: format!("slope_{name}"),
                    value: fit.exponent,
                    wall_ms: 0.0,
                })?;
                sink.push(ExperimentRecord {
                    family: label.clone(),
                    n: 0,
                    seed: 0,
                    metric: format!("reference_slope_{name}"),
                    value: reference,
                    wall_ms: 0.0,
                })?;
                fits.push(NamedFit {
                    name: format!("{label}:{name}"),
                    fit,
                    reference: Some(reference),
                });
            }
        }
    }
    Ok(ExperimentOutcome {
        experiment: ExperimentKind::BoundTable,
        family: "bounds".into(),
        records: sink.records().to_vec(),
        fits,
        minor_outcomes: 0,
        skipped: 0,
    })
}

/// Writes `<experiment>-<family>.svg` for each fit: log-log scatter plus the
/// fitted line.
pub fn write_plots(dir: &Path, outcome: &ExperimentOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut written = Vec::new();
    for (i, nf) in outcome.fits.iter().enumerate() {
        let suffix = if outcome.fits.len() > 1 {
            format!("-{i}")
        } else {
            String::new()
        };
        let path = dir.join(format!(
            "{}-{}{}.svg",
            outcome.experiment.name(),
            outcome.family,
            suffix
        ));
        // Bound-table fits carry logged points already.
        let logged = outcome.experiment == ExperimentKind::BoundTable;
        let svg = render_svg(&nf.name, &nf.fit, logged);
        std::fs::write(&path, svg).map_err(io_err)?;
        written.push(path);
    }
    Ok(written)
}

fn render_svg(title: &str, fit: &FitResult, logged: bool) -> String {
    let pts: Vec<(f64, f64)> = fit
        .points
        .iter()
        .map(|&(x, y)| if logged { (x, y) } else { (x.ln(), y.ln()) })
        .collect();
    let (w, h, pad) = (480.0, 360.0, 48.0);
    let min_x = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_x = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let line_y = |x: f64| fit.ln_constant + fit.exponent * x;
    let ys = pts.iter().map(|p| p.1).chain([line_y(min_x), line_y(max_x)]);
    let (min_y, max_y) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { hi - lo } else { 1.0 };
    let sx = |x: f64| pad + (x - min_x) / span(min_x, max_x) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - min_y) / span(min_y, max_y) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{} (slope {:.3}, r2 {:.3})</text>"#,
        title, fit.exponent, fit.r_squared
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">ln x</text><text x="8" y="{pad}" font-family="sans-serif" font-size="11">ln y</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="2"/>"#,
        sx(min_x),
        sy(line_y(min_x)),
        sx(max_x),
        sy(line_y(max_x))
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
            sx(x),
            sy(y)
        );
    }
    s.push_str("</svg>\n");
    s
}
