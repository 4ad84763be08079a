use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::{bar_chart, line_chart, Series};
use super::{EpochReport, Experiment, ExperimentConfig};
use crate::constellation::ConstellationSnapshot;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Scenario;

pub const CSV_COLUMNS: [&str; 15] = [
    "epoch",
    "method",
    "risk_lb",
    "risk_ex",
    "risk_ub",
    "cap_use",
    "util_mean_pct",
    "util_peak_pct",
    "mig_avoidable",
    "mig_cost",
    "t_stage1_ms",
    "t_stage2_ms",
    "t_stage3_ms",
    "objective",
    "feasible",
];

pub const PLOT_FILES: [&str; 5] = [
    "risk_per_epoch.svg",
    "utilization.svg",
    "migrations_per_epoch.svg",
    "runtime_per_epoch.svg",
    "risk_bounds.svg",
];

/// Six significant digits, shortest form, no exponent.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
}

/// One row per report, columns as in [`CSV_COLUMNS`]. Stage times are
/// written as 0 unless `wall_times` is set.
pub fn emit_csv<T: Real>(reports: &[EpochReport<T>], path: &Path, wall_times: bool) -> Result<()> {
    let f = |x: T| fmt_sig6(x.as_f64());
    let rows = reports.iter().map(|r| {
        let t = |k: usize| fmt_sig6(if wall_times { r.stage_ms[k] } else { 0.0 });
        vec![
            r.epoch.to_string(),
            r.method.clone(),
            f(r.risk.lb),
            f(r.risk.exact),
            f(r.risk.ub),
            f(r.cap_use),
            f(r.util_mean_pct),
            f(r.util_peak_pct),
            r.mig_avoidable.to_string(),
            f(r.mig_cost),
            t(0),
            t(1),
            t(2),
            f(r.objective),
            r.feasible.to_string(),
        ]
    });
    write_file(path, &csv_bytes(&CSV_COLUMNS, rows)?)
}

/// Measured stage times and search effort; not reproducible run to run.
pub fn emit_runtime_csv<T: Real>(reports: &[EpochReport<T>], path: &Path) -> Result<()> {
    let rows = reports.iter().map(|r| {
        vec![
            r.epoch.to_string(),
            r.method.clone(),
            fmt_sig6(r.stage_ms[0]),
            fmt_sig6(r.stage_ms[1]),
            fmt_sig6(r.stage_ms[2]),
            r.nodes.to_string(),
            fmt_sig6(r.gap.as_f64()),
        ]
    });
    let header = [
        "epoch",
        "method",
        "t_stage1_ms",
        "t_stage2_ms",
        "t_stage3_ms",
        "nodes",
        "gap",
    ];
    write_file(path, &csv_bytes(&header, rows)?)
}

fn method_names<T>(reports: &[EpochReport<T>]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in reports {
        if !names.contains(&r.method) {
            names.push(r.method.clone());
        }
    }
    names
}

fn per_epoch<T: Real>(
    reports: &[EpochReport<T>],
    names: &[String],
    get: impl Fn(&EpochReport<T>) -> f64,
) -> Vec<Series> {
    let epochs = reports.iter().map(|r| r.epoch + 1).max().unwrap_or(0);
    names
        .iter()
        .map(|n| {
            let mut values = vec![f64::NAN; epochs];
            for r in reports.iter().filter(|r| &r.method == n) {
                values[r.epoch] = get(r);
            }
            Series {
                name: n.clone(),
                values,
            }
        })
        .collect()
}

fn finite_mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v
        .filter(|x| x.is_finite())
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Writes the five figures into `dir`.
pub fn emit_plots<T: Real>(reports: &[EpochReport<T>], dir: &Path) -> Result<Vec<PathBuf>> {
    let names = method_names(reports);
    fn of<'a, T>(
        reports: &'a [EpochReport<T>],
        n: &'a str,
    ) -> impl Iterator<Item = &'a EpochReport<T>> {
        reports.iter().filter(move |r| r.method == n)
    }
    let risk = per_epoch(reports, &names, |r| r.risk.exact.as_f64());
    let migs = per_epoch(reports, &names, |r| {
        if r.placement.is_some() {
            r.mig_avoidable as f64
        } else {
            f64::NAN
        }
    });
    let runtime = per_epoch(reports, &names, |r| r.stage_ms.iter().sum());
    let util = vec![
        Series {
            name: "mean".into(),
            values: names
                .iter()
                .map(|n| finite_mean(of(reports, n).map(|r| r.util_mean_pct.as_f64())))
                .collect(),
        },
        Series {
            name: "peak".into(),
            values: names
                .iter()
                .map(|n| {
                    of(reports, n)
                        .map(|r| r.util_peak_pct.as_f64())
                        .filter(|x| x.is_finite())
                        .fold(0.0, f64::max)
                })
                .collect(),
        },
    ];
    let bounds: Vec<Series> = [("LB", 0), ("exact", 1), ("UB", 2)]
        .into_iter()
        .map(|(label, k)| Series {
            name: label.into(),
            values: names
                .iter()
                .map(|n| {
                    finite_mean(
                        of(reports, n).map(|r| [r.risk.lb, r.risk.exact, r.risk.ub][k].as_f64()),
                    )
                })
                .collect(),
        })
        .collect();
    let svgs = [
        line_chart("Risk per epoch", "epoch", "exact risk", &risk),
        bar_chart("CPU utilization", "utilization (%)", &names, &util),
        line_chart(
            "Avoidable migrations per epoch",
            "epoch",
            "migrations",
            &migs,
        ),
        line_chart("Solve time per epoch", "epoch", "wall time (ms)", &runtime),
        bar_chart("Risk bounds (mean over epochs)", "risk", &names, &bounds),
    ];
    let mut paths = Vec::with_capacity(svgs.len());
    for (name, body) in PLOT_FILES.iter().zip(svgs) {
        let p = dir.join(name);
        write_file(&p, body.as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Everything a `run` leaves behind: `results.csv`, `runtime.csv`, the five
/// plots, `scenario.json` and the resolved `config.toml`.
pub fn write_artifacts<T: Real + Serialize>(
    exp: &Experiment<T>,
    cfg: &ExperimentConfig<T>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    let results = dir.join("results.csv");
    emit_csv(&exp.reports, &results, cfg.report_wall_times)?;
    out.push(results);
    let runtime = dir.join("runtime.csv");
    emit_runtime_csv(&exp.reports, &runtime)?;
    out.push(runtime);
    out.extend(emit_plots(&exp.reports, dir)?);
    let sc = dir.join("scenario.json");
    write_file(&sc, exp.scenario.to_json()?.as_bytes())?;
    out.push(sc);
    let resolved = dir.join("config.toml");
    write_file(&resolved, cfg.to_toml_string()?.as_bytes())?;
    out.push(resolved);
    Ok(out)
}

/// Dumps one epoch's constellation: `satellites.csv`, `isl.csv` (one row per
/// undirected link) and `visibility.csv` (visible pairs only).
pub fn write_snapshot<T: Real>(
    sc: &Scenario<T>,
    snap: &ConstellationSnapshot<T>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let f = |x: T| fmt_sig6(x.as_f64());
    let sats = csv_bytes(
        &["satellite", "x_km", "y_km", "z_km"],
        snap.sat_positions
            .iter()
            .enumerate()
            .map(|(s, p)| vec![s.to_string(), f(p.x), f(p.y), f(p.z)]),
    )?;
    let isl = csv_bytes(
        &["a", "b", "delay_ms"],
        snap.isl_edges
            .iter()
            .filter(|e| e.from < e.to)
            .map(|e| vec![e.from.to_string(), e.to.to_string(), f(e.delay_ms)]),
    )?;
    let vis = csv_bytes(
        &[
            "slice",
            "user",
            "satellite",
            "elevation_deg",
            "access_delay_ms",
        ],
        snap.visibility.iter().enumerate().flat_map(|(fu, v)| {
            let (n, u) = sc.user_of(fu);
            v.visible.iter().map(move |&s| {
                vec![
                    n.to_string(),
                    u.to_string(),
                    s.to_string(),
                    f(v.elevation_deg[s]),
                    f(v.access_delay_ms[s]),
                ]
            })
        }),
    )?;
    let mut out = Vec::new();
    for (name, bytes) in [
        ("satellites.csv", sats),
        ("isl.csv", isl),
        ("visibility.csv", vis),
    ] {
        let p = dir.join(name);
        write_file(&p, &bytes)?;
        out.push(p);
    }
    Ok(out)
}
