//! One function per subcommand.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use renewal_percolation::exact::{concentration_terms, fkg_terms, jensen_terms};
use renewal_percolation::sim::LAYOUT_ID;
use renewal_percolation::{
    bounds_report, ck_sequence, classify, dual_law_to, gf_partial, percolation_probability,
    simulate_connectivity, simulate_coupling, simulate_dual, BoundsReport, Diagnosis,
    PercolationBracket, QSequence, RadiusModel, SimReport,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{
    self, summary_path, write_json, write_json_file, write_table, Format, Provenance, VERSION,
};
use crate::verify::{battery, check_instance, Instance};
use crate::CliError;

/// Largest dual occupancy horizon written by default; `v` costs `O(N^2)`.
pub const DEFAULT_DUAL_HORIZON: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub format: Format,
    pub timing: bool,
}

/// Writes the table to `cfg.out` (or stdout) and the summary beside it (or
/// to stderr).
fn emit<R: Serialize, S: Serialize>(
    cfg: &RunConfig,
    opts: Options,
    provenance: &Provenance,
    header: &[&str],
    rows: &[R],
    summary: Option<&S>,
) -> Result<(), CliError> {
    let mut out = output::open(cfg.out.as_deref())?;
    write_table(&mut *out, opts.format, provenance, header, rows)?;
    drop(out);
    if let Some(summary) = summary {
        match &cfg.out {
            Some(path) => write_json_file(&summary_path(path), summary)?,
            None => write_json(&mut std::io::stderr().lock(), summary)?,
        }
    }
    Ok(())
}

fn warn(msg: &str) {
    let _ = writeln!(std::io::stderr(), "warning: {msg}");
}

#[derive(Serialize)]
struct ExactRow {
    n: usize,
    s_n: f64,
    f_n: Option<f64>,
    v_n: Option<f64>,
}

#[derive(Serialize)]
struct ExactSummary<'a> {
    schema: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    bracket: PercolationBracket<f64>,
    bounds: Option<BoundsReport<f64>>,
    bounds_error: Option<String>,
    diagnosis: Option<Diagnosis<f64>>,
    diagnosis_error: Option<String>,
    dual_mean_partial: f64,
    dual_horizon: usize,
}

pub fn exact(cfg: &RunConfig, opts: Options) -> Result<(), CliError> {
    let (spec, model) = cfg.model()?;
    let n = cfg.horizon;
    let gf = gf_partial(spec, model, n)?;
    let bracket = percolation_probability(&gf, spec, model, cfg.tail)?;
    let v_horizon = cfg.dual_horizon.unwrap_or(DEFAULT_DUAL_HORIZON).min(n);
    let dual = dual_law_to(&gf, spec, model, v_horizon)?;
    let rows: Vec<ExactRow> = (0..=n)
        .map(|k| ExactRow {
            n: k,
            s_n: gf.s[k],
            f_n: k.checked_sub(1).map(|i| dual.f[i]),
            v_n: dual.v.get(k).copied(),
        })
        .collect();
    let (bounds, bounds_error) = split(bounds_report(spec, model, n));
    let (diagnosis, diagnosis_error) = split(classify(spec, model, n));
    for w in &bracket.warnings {
        warn(w);
    }
    if let Some(d) = &diagnosis {
        if !d.mean_converged {
            warn("mean inter-arrival series did not converge");
        }
    }
    let summary = ExactSummary {
        schema: "renperc.exact.summary.v1",
        version: VERSION,
        config: cfg,
        bracket,
        bounds,
        bounds_error,
        diagnosis,
        diagnosis_error,
        dual_mean_partial: dual.mean_partial,
        dual_horizon: v_horizon,
    };
    emit(
        cfg,
        opts,
        &Provenance::new("renperc.exact.v1"),
        &["n", "S_n", "f_n", "v_n"],
        &rows,
        Some(&summary),
    )
}

fn split<T>(r: renewal_percolation::Result<T>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

#[derive(Serialize)]
struct BoundsRow {
    n: usize,
    s_n: f64,
    jensen: f64,
    fkg: Option<f64>,
    concentration: Option<f64>,
}

#[derive(Serialize)]
struct BoundsSummary<'a> {
    schema: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    bracket: PercolationBracket<f64>,
    bounds: BoundsReport<f64>,
}

pub fn bounds(cfg: &RunConfig, opts: Options) -> Result<(), CliError> {
    let (spec, model) = cfg.model()?;
    let n = cfg.horizon;
    let gf = gf_partial(spec, model, n)?;
    let bracket = percolation_probability(&gf, spec, model, cfg.tail)?;
    let report = bounds_report(spec, model, n)?;
    let jensen = jensen_terms(spec, model, n);
    let fkg = report.fkg_upper.map(|_| fkg_terms(spec, model, n));
    let conc = if model.is_defective() {
        None
    } else {
        Some(concentration_terms(spec, model, n)?.b)
    };
    let rows: Vec<BoundsRow> = (0..=n)
        .map(|k| BoundsRow {
            n: k,
            s_n: gf.s[k],
            jensen: jensen[k],
            fkg: fkg.as_ref().map(|f| f[k]),
            concentration: conc.as_ref().map(|b| b[k]),
        })
        .collect();
    let summary = BoundsSummary {
        schema: "renperc.bounds.summary.v1",
        version: VERSION,
        config: cfg,
        bracket,
        bounds: report,
    };
    emit(
        cfg,
        opts,
        &Provenance::new("renperc.bounds.v1"),
        &["n", "S_n", "J_n", "F_n", "B_n"],
        &rows,
        Some(&summary),
    )
}

#[derive(Serialize)]
struct CurveRow {
    index: usize,
    successes: u64,
    estimate: f64,
    std_error: f64,
    wilson_lo: f64,
    wilson_hi: f64,
}

fn curve_rows(report: &SimReport) -> Vec<CurveRow> {
    report
        .points
        .iter()
        .map(|p| CurveRow {
            index: p.index,
            successes: p.successes,
            estimate: p.estimate,
            std_error: p.std_error,
            wilson_lo: p.wilson_lo,
            wilson_hi: p.wilson_hi,
        })
        .collect()
}

const CURVE_HEADER: [&str; 6] = [
    "n",
    "successes",
    "estimate",
    "std_error",
    "wilson_lo",
    "wilson_hi",
];

pub fn simulate(cfg: &RunConfig, opts: Options, dual: bool) -> Result<(), CliError> {
    let (spec, model) = cfg.model()?;
    let (report, schema) = if dual {
        (
            simulate_dual(spec, model, cfg.n, cfg.reps, cfg.seed)?,
            "renperc.dual.v1",
        )
    } else {
        (
            simulate_connectivity(spec, model, cfg.n, cfg.reps, cfg.seed)?,
            "renperc.simulate.v1",
        )
    };
    let prov = Provenance::new(schema).seeded(cfg.seed, LAYOUT_ID);
    emit::<_, ()>(cfg, opts, &prov, &CURVE_HEADER, &curve_rows(&report), None)
}

#[derive(Serialize)]
struct CouplingRow {
    curve: &'static str,
    delay: usize,
    j: usize,
    successes: u64,
    estimate: f64,
    std_error: f64,
    wilson_lo: f64,
    wilson_hi: f64,
}

#[derive(Serialize)]
struct CouplingSummary<'a> {
    schema: &'static str,
    version: &'static str,
    seed: u64,
    layout: &'static str,
    config: &'a RunConfig,
    k: usize,
    ck_exact: Option<f64>,
    ck_empirical: f64,
    ck_empirical_shifted: f64,
    ck_shifted_std_error: f64,
    coalescence_violations: u64,
}

pub fn coupling(cfg: &RunConfig, opts: Options) -> Result<(), CliError> {
    let spec = cfg
        .q
        .as_ref()
        .ok_or_else(|| CliError::Usage("config must provide `q`".into()))?;
    let report = simulate_coupling(spec, &cfg.delays, cfg.coupling_horizon, cfg.reps, cfg.seed)?;
    let mut rows = Vec::new();
    let curves = report
        .tau
        .iter()
        .zip(&cfg.delays[1..])
        .map(|(r, &d)| ("tau", d, r))
        .chain(std::iter::once(("t_all", report.k, &report.t_all)));
    for (curve, delay, r) in curves {
        rows.extend(r.points.iter().map(|p| CouplingRow {
            curve,
            delay,
            j: p.index,
            successes: p.successes,
            estimate: p.estimate,
            std_error: p.std_error,
            wilson_lo: p.wilson_lo,
            wilson_hi: p.wilson_hi,
        }));
    }
    let ck_exact = if report.k >= 1 {
        Some(ck_sequence(spec, report.k)?.get(report.k))
    } else {
        None
    };
    let summary = CouplingSummary {
        schema: "renperc.coupling.summary.v1",
        version: VERSION,
        seed: cfg.seed,
        layout: LAYOUT_ID,
        config: cfg,
        k: report.k,
        ck_exact,
        ck_empirical: report.ck_empirical,
        ck_empirical_shifted: report.ck_empirical_shifted,
        ck_shifted_std_error: report.ck_shifted_std_error,
        coalescence_violations: report.coalescence_violations,
    };
    emit(
        cfg,
        opts,
        &Provenance::new("renperc.coupling.v1").seeded(cfg.seed, LAYOUT_ID),
        &[
            "curve",
            "delay",
            "j",
            "successes",
            "estimate",
            "std_error",
            "wilson_lo",
            "wilson_hi",
        ],
        &rows,
        Some(&summary),
    )
}

const VERIFY_HEADER: [&str; 14] = [
    "id",
    "n",
    "oracle_connectivity",
    "oracle_dual",
    "forward_dp",
    "dual_dp",
    "mc_connectivity",
    "mc_dual",
    "exact_discrepancy",
    "mc_connectivity_z",
    "mc_dual_z",
    "pass",
    "q",
    "radius",
];

/// Battery from `cfg.battery`, or the single configured instance at `cfg.n`.
pub fn verify(cfg: &RunConfig, opts: Options) -> Result<(), CliError> {
    let (instances, reps) = match &cfg.battery {
        Some(b) => (battery(b.seed, b.size, b.max_support, b.max_n), b.reps),
        None => {
            let (q, radius) = cfg.model()?;
            if radius.support_bound().is_none() {
                return Err(CliError::Validation(
                    "verify needs a finite-support radius table".into(),
                ));
            }
            if cfg.n > renewal_percolation::oracle::MAX_CONNECTIVITY_SITES {
                return Err(CliError::Validation("verify needs n <= 8".into()));
            }
            let inst = Instance {
                q: q.clone(),
                radius: radius.clone(),
                n: cfg.n,
            };
            (vec![inst], cfg.reps)
        }
    };
    let checks = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| check_instance(i, inst, reps, cfg.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let prov = Provenance::new("renperc.verify.v1").seeded(cfg.seed, LAYOUT_ID);
    emit::<_, ()>(cfg, opts, &prov, &VERIFY_HEADER, &checks, None)?;
    let failures: Vec<String> = checks.iter().filter_map(|c| c.failure()).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("\n")))
    }
}

#[derive(Serialize)]
struct SweepRow {
    q_index: usize,
    radius_index: usize,
    q: String,
    radius: String,
    horizon: usize,
    lo: Option<f64>,
    hi: Option<f64>,
    certified: Option<bool>,
    tail_method: Option<&'static str>,
    jensen_upper: Option<f64>,
    fkg_upper: Option<f64>,
    concentration_lower: Option<f64>,
    mean: Option<f64>,
    ratio_min: Option<f64>,
    ratio_max: Option<f64>,
    verdict: Option<&'static str>,
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<f64>,
}

const SWEEP_HEADER: [&str; 18] = [
    "q_index",
    "radius_index",
    "q",
    "radius",
    "horizon",
    "lo",
    "hi",
    "certified",
    "tail_method",
    "jensen_upper",
    "fkg_upper",
    "concentration_lower",
    "mean",
    "ratio_min",
    "ratio_max",
    "verdict",
    "error",
    "runtime_ms",
];

struct Point {
    bracket: PercolationBracket<f64>,
    bounds: BoundsReport<f64>,
    diagnosis: Diagnosis<f64>,
}

fn sweep_point(
    spec: &QSequence<f64>,
    model: &RadiusModel<f64>,
    cfg: &RunConfig,
) -> renewal_percolation::Result<Point> {
    let gf = gf_partial(spec, model, cfg.horizon)?;
    Ok(Point {
        bracket: percolation_probability(&gf, spec, model, cfg.tail)?,
        bounds: bounds_report(spec, model, cfg.horizon)?,
        diagnosis: classify(spec, model, cfg.horizon)?,
    })
}

fn tail_name(t: renewal_percolation::TailMethod) -> &'static str {
    use renewal_percolation::TailMethod::*;
    match t {
        Concentration => "concentration",
        GeometricExtrapolation => "geometric-extrapolation",
        None => "none",
    }
}

fn sweep_row(
    (q_index, radius_index): (usize, usize),
    spec: &QSequence<f64>,
    model: &RadiusModel<f64>,
    horizon: usize,
    result: renewal_percolation::Result<Point>,
    runtime_ms: Option<f64>,
) -> SweepRow {
    let mut row = SweepRow {
        q_index,
        radius_index,
        q: serde_json::to_string(spec).expect("q serialises"),
        radius: serde_json::to_string(model).expect("radius serialises"),
        horizon,
        lo: None,
        hi: None,
        certified: None,
        tail_method: None,
        jensen_upper: None,
        fkg_upper: None,
        concentration_lower: None,
        mean: None,
        ratio_min: None,
        ratio_max: None,
        verdict: None,
        error: None,
        runtime_ms,
    };
    match result {
        Ok(p) => {
            row.lo = Some(p.bracket.lo);
            row.hi = Some(p.bracket.hi);
            row.certified = Some(p.bracket.certified);
            row.tail_method = Some(tail_name(p.bracket.tail_method));
            row.jensen_upper = Some(p.bounds.jensen_upper);
            row.fkg_upper = p.bounds.fkg_upper;
            row.concentration_lower = p.bounds.concentration_lower;
            row.mean = Some(p.diagnosis.mean);
            row.ratio_min = p.diagnosis.ratio_min;
            row.ratio_max = p.diagnosis.ratio_max;
            row.verdict = Some(p.diagnosis.verdict.as_str());
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

pub fn sweep(cfg: &RunConfig, opts: Options) -> Result<(), CliError> {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs a `grid`".into()))?;
    if grid.q.is_empty() || grid.radius.is_empty() {
        return Err(CliError::Usage(
            "sweep grid must have at least one q and one radius".into(),
        ));
    }
    let points: Vec<(usize, usize)> = (0..grid.q.len())
        .flat_map(|i| (0..grid.radius.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(i, j)| {
            let (spec, model) = (&grid.q[i], &grid.radius[j]);
            let start = Instant::now();
            let result = sweep_point(spec, model, cfg);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            sweep_row(
                (i, j),
                spec,
                model,
                cfg.horizon,
                result,
                opts.timing.then_some(elapsed),
            )
        })
        .collect();
    let header = if opts.timing {
        &SWEEP_HEADER[..]
    } else {
        &SWEEP_HEADER[..17]
    };
    emit::<_, ()>(
        cfg,
        opts,
        &Provenance::new("renperc.sweep.v1"),
        header,
        &rows,
        None,
    )
}
