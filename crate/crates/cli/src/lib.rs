//! Commands behind the `modreyn` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{error, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use modreyn::config::{ConfigNotes, RunConfig};
use modreyn::output::{self, ErrorReport, RunReport, REPORT_JSON};
use modreyn::{outer_solve, Error, ModelVariant, OuterSolution, Result, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_ELLIPTICITY: i32 = 3;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "MODREYN_WORKERS";

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        "config" | "parse" | "io" => EXIT_CONFIG,
        "ellipticity_loss" => EXIT_ELLIPTICITY,
        _ => EXIT_SOLVER,
    }
}

/// `--workers` if given, else the environment variable, else rayon's default.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{WORKERS_ENV} must be a positive integer, got `{v}`"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn run_variant(config: &RunConfig, variant: ModelVariant) -> Result<OuterSolution> {
    outer_solve(&config.problem()?, variant, &config.solver)
}

fn artifact(variant: ModelVariant, name: &str) -> String {
    format!("{}/{name}", variant.name())
}

/// Writes the artifacts of one finished (or failed) variant under
/// `out/<variant>/` and returns the report and exit code.
fn persist_variant(
    config: &RunConfig,
    notes: &ConfigNotes,
    variant: ModelVariant,
    outcome: &Result<OuterSolution>,
    out: &Path,
) -> Result<(i32, RunReport)> {
    let dir = out.join(variant.name());
    let mut report = RunReport::new(variant, config, notes);
    let code = match outcome {
        Ok(solution) => {
            let written = output::write_fields(&dir, &config.problem()?, solution)?;
            report.artifacts = written.iter().map(|n| artifact(variant, n)).collect();
            report.result = Some(solution.summary.clone());
            EXIT_OK
        }
        Err(e) => {
            error!("{variant}: {e}");
            report.error = Some(ErrorReport::from(e));
            exit_code(e)
        }
    };
    report.artifacts.push(artifact(variant, REPORT_JSON));
    output::write_json(&dir.join(REPORT_JSON), &report)?;
    Ok((code, report))
}

/// Solves one variant. The returned error is reserved for I/O failures;
/// solver failures are recorded in `report.json` and the exit code.
pub fn cmd_solve(
    config: &RunConfig,
    notes: &ConfigNotes,
    variant: ModelVariant,
    out: &Path,
) -> Result<i32> {
    info!("solving {variant}");
    let outcome = run_variant(config, variant);
    let (code, report) = persist_variant(config, notes, variant, &outcome, out)?;
    if let Some(s) = &report.result {
        info!(
            "{variant}: theta2 = {:e} rad, p_max = {:e} Pa, mu_max = {:e} Pa s",
            s.theta2_rad, s.p_max_pa, s.mu_max_pas
        );
    }
    Ok(code)
}

/// Writes a report holding only an error, for failures before any solve.
pub fn write_error_report(path: &Path, e: &Error) -> Result<()> {
    #[derive(Serialize)]
    struct Failed<'a> {
        error: ErrorReport,
        artifacts: [&'a str; 1],
    }
    output::write_json(
        path,
        &Failed {
            error: ErrorReport::from(e),
            artifacts: [REPORT_JSON],
        },
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantMaxima {
    pub label: String,
    pub variant: ModelVariant,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub variants: Vec<VariantMaxima>,
    /// `"a/b"` maps to `p_max(a) / p_max(b)` over successful variants.
    pub p_max_ratios: BTreeMap<String, f64>,
    pub mu_max_ratios: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub config: RunConfig,
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
}

pub const COMPARISON_CSV: &str = "comparison.csv";
pub const COMPARISON_JSON: &str = "comparison_report.json";

/// Column labels: the variant name, suffixed `_2`, `_3`, ... on repeats.
fn labels(variants: &[ModelVariant]) -> Vec<String> {
    let mut seen = BTreeMap::<&str, usize>::new();
    variants
        .iter()
        .map(|v| {
            let n = seen.entry(v.name()).or_default();
            *n += 1;
            if *n == 1 {
                v.name().to_string()
            } else {
                format!("{}_{n}", v.name())
            }
        })
        .collect()
}

/// Runs every configured variant and writes their per-variant artifacts, a
/// pressure comparison table and a report with pairwise ratios. Exits with
/// the largest per-variant code.
pub fn cmd_compare(config: &RunConfig, notes: &ConfigNotes, out: &Path) -> Result<i32> {
    if config.variants.len() < 2 {
        let e = Error::Config("compare needs at least two variants".into());
        write_error_report(&out.join(COMPARISON_JSON), &e)?;
        return Ok(EXIT_CONFIG);
    }
    let labels = labels(&config.variants);
    let mut code = EXIT_OK;
    let mut rows = Vec::new();
    let mut solutions = Vec::new();
    let mut artifacts = Vec::new();
    for (label, &variant) in labels.iter().zip(&config.variants) {
        let outcome = run_variant(config, variant);
        let (c, report) = persist_variant(config, notes, variant, &outcome, out)?;
        code = code.max(c);
        for a in &report.artifacts {
            if !artifacts.contains(a) {
                artifacts.push(a.clone());
            }
        }
        rows.push(VariantMaxima {
            label: label.clone(),
            variant,
            result: report.result,
            error: report.error,
        });
        if let Ok(s) = outcome {
            solutions.push((label.clone(), s));
        }
    }

    let mut p_max_ratios = BTreeMap::new();
    let mut mu_max_ratios = BTreeMap::new();
    for (a, sa) in &solutions {
        for (b, sb) in &solutions {
            if a != b {
                let key = format!("{a}/{b}");
                p_max_ratios.insert(key.clone(), sa.summary.p_max_pa / sb.summary.p_max_pa);
                mu_max_ratios.insert(key, sa.summary.mu_max_pas / sb.summary.mu_max_pas);
            }
        }
    }

    let columns: Vec<_> = solutions
        .iter()
        .map(|(l, s)| (l.clone(), &s.pressure))
        .collect();
    let table = output::comparison_csv(&columns, 2 * config.solver.n_theta);
    output::write_atomic(&out.join(COMPARISON_CSV), table.as_bytes())?;
    artifacts.push(COMPARISON_CSV.into());
    artifacts.push(COMPARISON_JSON.into());
    let report = ComparisonReport {
        variants: rows,
        p_max_ratios,
        mu_max_ratios,
        artifacts,
        config: config.clone(),
        defaults_applied: notes.defaults_applied.clone(),
        warnings: notes.warnings.clone(),
    };
    output::write_json(&out.join(COMPARISON_JSON), &report)?;
    Ok(code)
}

/// Parameter grid for `sweep`; every combination is one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    #[serde(rename = "h0_over_R")]
    pub h0_over_r: Vec<f64>,
}

impl SweepGrid {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let grid: Self = serde_json::from_str(&text)?;
        if grid.alpha.is_empty() || grid.h0_over_r.is_empty() {
            return Err(Error::Config("sweep grid axes must be non-empty".into()));
        }
        if grid
            .alpha
            .iter()
            .chain(&grid.h0_over_r)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Config("sweep grid values must be finite".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub h0_over_r: f64,
    pub variant: ModelVariant,
    pub summary: Option<RunSummary>,
    pub error_kind: Option<String>,
}

pub const SWEEP_CSV: &str = "sweep.csv";

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "alpha,h0_over_R,variant,theta2_rad,p_max_Pa,mu_max_Pas,converged,error_kind\n",
    );
    for r in rows {
        write!(out, "{:e},{:e},{},", r.alpha, r.h0_over_r, r.variant).unwrap();
        match &r.summary {
            Some(s) => write!(
                out,
                "{:e},{:e},{:e},true,",
                s.theta2_rad, s.p_max_pa, s.mu_max_pas
            )
            .unwrap(),
            None => out.push_str(",,,false,"),
        }
        out.push_str(r.error_kind.as_deref().unwrap_or(""));
        out.push('\n');
    }
    out
}

/// Runs every grid cell and variant. Cells run in parallel and write to
/// `out/cells/a<i>_h<j>/`; failed cells are flagged in `sweep.csv` and do
/// not stop the sweep.
pub fn cmd_sweep(
    config: &RunConfig,
    notes: &ConfigNotes,
    grid: &SweepGrid,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(usize, usize, ModelVariant)> = (0..grid.alpha.len())
        .flat_map(|i| {
            (0..grid.h0_over_r.len())
                .flat_map(move |j| config.variants.iter().map(move |&v| (i, j, v)))
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(i, j, variant)| -> Result<SweepRow> {
            let (alpha, ratio) = (grid.alpha[i], grid.h0_over_r[j]);
            let mut cell = config.clone();
            cell.viscosity.alpha = alpha;
            cell.geometry.h0 = ratio * cell.geometry.radius;
            let dir: PathBuf = out.join("cells").join(format!("a{i}_h{j}"));
            let outcome = cell.validate().and_then(|_| run_variant(&cell, variant));
            let (_, report) = persist_variant(&cell, notes, variant, &outcome, &dir)?;
            Ok(SweepRow {
                alpha,
                h0_over_r: ratio,
                variant,
                summary: report.result,
                error_kind: report.error.map(|e| e.kind),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    output::write_atomic(&out.join(SWEEP_CSV), sweep_csv(&rows).as_bytes())?;
    Ok(rows)
}
