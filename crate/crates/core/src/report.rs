//! CSV tables for trials and ensemble statistics.
//!
//! Trial CSV columns: `seed, N, Lprime, r, protocol, C_para, R_para, D_para,
//! C_post, R_post, D_post, C, R, D, M, T_us, unfilled, plan_ms`, where `r` is
//! the realized reservoir-to-target ratio of that load.
//!
//! Stats CSV columns: `N, Lprime, r, protocol, trials, failures,
//! failure_rate, conditioning`, then `<q>_mean, <q>_std, <q>_sem` for each
//! quantity in [`QUANTITIES`], then `plan_ms_mean`. Fits are appended as
//! `# fit ...` comment lines.
//!
//! `plan_ms` columns are left empty unless timing is requested, so that
//! reruns with the same seeds are byte-identical.

use std::io::Read;

use crate::ensemble::{EnsembleStats, TrialResult, QUANTITIES};
use crate::error::{Error, Result};
use crate::fit::{fit_exp_decay, fit_linear_sqrt, fit_power_law, fit_three_halves, FitModel, FitResult};
use crate::lattice::GridSpec;
use crate::metrics::{time_of, TimeModel};
use crate::compression::Protocol;

pub const TRIAL_COLUMNS: [&str; 18] = [
    "seed", "N", "Lprime", "r", "protocol", "C_para", "R_para", "D_para", "C_post", "R_post", "D_post", "C", "R",
    "D", "M", "T_us", "unfilled", "plan_ms",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("csv: {other:?}")),
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Appends trial rows for one grid point to `w`.
fn write_trial_rows(
    w: &mut csv::Writer<Vec<u8>>,
    spec: &GridSpec,
    protocol: Protocol,
    trials: &[TrialResult],
    tm: &TimeModel,
    timing: bool,
) -> Result<()> {
    for t in trials {
        let m = &t.metrics;
        let row = [
            t.seed.to_string(),
            spec.n_targets().to_string(),
            spec.grid_side().to_string(),
            t.realized_ratio.to_string(),
            protocol.to_string(),
            m.c_para.to_string(),
            m.r_para.to_string(),
            m.d_para.to_string(),
            m.c_post.to_string(),
            m.r_post.to_string(),
            m.d_post.to_string(),
            m.c().to_string(),
            m.r().to_string(),
            m.d().to_string(),
            m.m().to_string(),
            time_of(m, tm).to_string(),
            t.unfilled.to_string(),
            if timing { t.plan_ms.to_string() } else { String::new() },
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    Ok(())
}

/// Trial table for one or more grid points.
pub fn trials_csv(groups: &[(GridSpec, Protocol, Vec<TrialResult>)], tm: &TimeModel, timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRIAL_COLUMNS).map_err(csv_err)?;
    for (spec, protocol, trials) in groups {
        write_trial_rows(&mut w, spec, *protocol, trials, tm, timing)?;
    }
    into_string(w)
}

pub fn stats_header() -> Vec<String> {
    let mut cols: Vec<String> = ["N", "Lprime", "r", "protocol", "trials", "failures", "failure_rate", "conditioning"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for q in QUANTITIES {
        for suffix in ["mean", "std", "sem"] {
            cols.push(format!("{q}_{suffix}"));
        }
    }
    cols.push("plan_ms_mean".into());
    cols
}

/// Stats table with one row per entry of `rows`, followed by `footer` lines
/// (normally from [`fit_comment`]).
pub fn stats_csv(rows: &[EnsembleStats], footer: &[String], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(stats_header()).map_err(csv_err)?;
    for s in rows {
        let mut row = vec![
            s.n_targets.to_string(),
            s.grid_side.to_string(),
            s.ratio.to_string(),
            s.protocol.to_string(),
            s.trials.to_string(),
            s.failures.to_string(),
            s.failure_rate().to_string(),
            s.conditioning.to_string(),
        ];
        for sum in &s.summaries {
            row.extend([sum.mean.to_string(), sum.std.to_string(), sum.sem.to_string()]);
        }
        row.push(if timing { s.plan_ms_mean.to_string() } else { String::new() });
        w.write_record(&row).map_err(csv_err)?;
    }
    let mut out = into_string(w)?;
    for line in footer {
        out.push_str(line);
        out.push('\n');
    }
    Ok(out)
}

/// Fits `model` and formats the result as a comment line:
/// `# fit model=... x=... y=... coefficients=a;b std_errors=... residual_norm=...`,
/// or `# fit model=... x=... y=... unavailable: <reason>`.
pub fn fit_footer(model: FitModel, x: &str, y: &str, points: &[(f64, f64)]) -> String {
    match fit_points(model, points) {
        Ok(fit) => fit_comment(x, y, &fit),
        Err(e) => format!("# fit model={model} x={x} y={y} unavailable: {e}"),
    }
}

pub fn fit_comment(x: &str, y: &str, fit: &FitResult) -> String {
    let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
    format!(
        "# fit model={} x={x} y={y} coefficients={} std_errors={} residual_norm={}",
        fit.model,
        join(&fit.coefficients),
        join(&fit.std_errors),
        fit.residual_norm
    )
}

pub fn fit_points(model: FitModel, points: &[(f64, f64)]) -> Result<FitResult> {
    match model {
        FitModel::LinearSqrt => fit_linear_sqrt(points),
        FitModel::ThreeHalves => fit_three_halves(points),
        FitModel::PowerLaw => fit_power_law(points),
        FitModel::ExpDecay => fit_exp_decay(points),
    }
}

/// Reads `(x, y)` pairs from two named columns of a CSV, skipping `#` lines
/// and rows where either cell is empty.
pub fn read_columns(reader: impl Read, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("no column `{name}`")))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let (xs, ys) = (rec.get(xi).unwrap_or(""), rec.get(yi).unwrap_or(""));
        if xs.is_empty() || ys.is_empty() {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")));
        out.push((parse(xs)?, parse(ys)?));
    }
    Ok(out)
}
