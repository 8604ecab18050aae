// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario dispatch: one resolved config in, tables, plots and a JSON
//! result block out. Sweeps fan out over the worker pool and come back in
//! sweep order.

use serde_json::{json, Value};

use qsl_core::bounds::{evaluate_bounds, EndpointMetric, QslReport};
use qsl_core::geometry::{metric_tensor, BlochChart, ParameterChart};
use qsl_core::jc::{self, BlochZChart, JcCoordinate, JcParams, Regime, Rho11Chart};
use qsl_core::lz::{self, LzParams, LzTrajectory, Protocol};
use qsl_core::transport::{self, TransportConfig};
use qsl_core::{par, QslError};

use crate::config::{RunConfig, Scenario, SweepSpec};
use crate::output::{Plot, Table};

/// A numerical failure with the scenario point it came from.
#[derive(Debug)]
pub struct Failure {
    pub context: String,
    pub source: QslError,
}

type Result<T> = std::result::Result<T, QslError>;

/// A table to write, under `name`.csv, with its plots.
pub struct Artifact {
    pub name: String,
    pub table: Table,
    pub plots: Vec<(String, Plot)>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub results: Value,
    pub warnings: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let context = || {
        let p: Vec<String> = cfg.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{} scenario ({})", cfg.scenario.name(), p.join(", "))
    };
    match cfg.sweep_spec() {
        Some(spec) => run_sweep(cfg, &spec),
        None => run_single(cfg).map_err(|source| Failure {
            context: context(),
            source,
        }),
    }
}

fn run_single(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.scenario {
        Scenario::Lz => lz_single(cfg),
        Scenario::Jc => jc_single(cfg),
        Scenario::Transport if given_k2(cfg) => surface_single(cfg),
        Scenario::Transport => transport_single(cfg),
        Scenario::Metric => metric_single(cfg),
    }
}

fn given_k2(cfg: &RunConfig) -> bool {
    cfg.scenario == Scenario::Transport && cfg.text("mode") == "given_k2"
}

// ---------------------------------------------------------------------------
// Landau-Zener

struct LzRun {
    traj: LzTrajectory,
    params: LzParams,
    report: QslReport,
    chi0: f64,
    phi_start: f64,
}

fn lz_run(cfg: &RunConfig) -> Result<LzRun> {
    let (v, c, chi0, phi0) = (cfg.num("v"), cfg.num("c"), cfg.num("chi0"), cfg.num("phi0"));
    let target = cfg.opt_num("chitau");
    let tmax = cfg.num("tmax");
    let params = match cfg.text("protocol") {
        "optimal" => {
            let base = LzParams::new(v, c, Protocol::Constant(0.0))?;
            let chi_tau = target.expect("validated chitau");
            lz::optimal_protocol(&base, chi0, chi_tau, phi0)?.params
        }
        kind => {
            let protocol = if kind == "ramp" {
                Protocol::ramp(cfg.num("gamma"), cfg.num("slope"), tmax)?
            } else {
                Protocol::Constant(cfg.num("gamma"))
            };
            let p = LzParams::new(v, c, protocol)?;
            match target {
                Some(t) => p.with_target(t),
                None => p,
            }
        }
    };
    let traj = lz::integrate(&params, chi0, phi0, tmax, cfg.num("dt"))?;
    let report = evaluate_bounds(&traj.to_trajectory()?, &BlochChart, EndpointMetric::Pure)?;
    let phi_start = traj.phi[0];
    Ok(LzRun {
        traj,
        params,
        report,
        chi0,
        phi_start,
    })
}

fn lz_summary(cfg: &RunConfig, r: &LzRun) -> Value {
    let elapsed = r.traj.elapsed();
    let tau_optimal = cfg
        .opt_num("chitau")
        .map(|t| lz::qsl_time_lz(cfg.num("v"), r.chi0, t).expect("v validated"));
    json!({
        "arrival_time": r.traj.arrival_time,
        "elapsed": elapsed,
        "tau_qsl": r.report.tau_qsl,
        "tau_optimal": tau_optimal,
        "saturation": r.report.tau_qsl / elapsed,
        "max_residual": lz::conserved_residual(&r.traj, &r.params, r.chi0, r.phi_start),
        "phi_initial": r.traj.phi_initial,
        "phi_final": r.traj.phi_final,
        "bounds": r.report,
    })
}

fn lz_single(cfg: &RunConfig) -> Result<Outcome> {
    let r = lz_run(cfg)?;
    let residuals = r.traj.residuals(&r.params, r.chi0, r.phi_start);
    let mut table = Table::new(&["t", "chi", "phi", "gamma", "eta", "speed", "residual"]);
    for (k, residual) in residuals.into_iter().enumerate() {
        table.rows.push(vec![
            r.traj.times[k],
            r.traj.chi[k],
            r.traj.phi[k],
            r.traj.gamma[k],
            r.traj.eta(k),
            r.traj.global_speed(k),
            residual,
        ]);
    }
    let warnings = if cfg.opt_num("chitau").is_some() && r.traj.arrival_time.is_none() {
        vec!["target chitau not reached before tmax".to_string()]
    } else {
        Vec::new()
    };
    Ok(Outcome {
        results: lz_summary(cfg, &r),
        artifacts: vec![Artifact {
            name: "traj".into(),
            table,
            plots: vec![("traj".into(), Plot::new("Bloch angles", "t", &["chi", "phi"]))],
        }],
        warnings,
    })
}

fn lz_row(cfg: &RunConfig) -> Result<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let r = lz_run(cfg)?;
    let s = lz_summary(cfg, &r);
    let cols = vec![
        "arrival_time",
        "elapsed",
        "tau_qsl",
        "tau_optimal",
        "global_bound",
        "best_local_bound",
        "max_residual",
    ];
    let get = |v: &Value| v.as_f64().unwrap_or(f64::NAN);
    let row = vec![
        get(&s["arrival_time"]),
        get(&s["elapsed"]),
        r.report.tau_qsl,
        get(&s["tau_optimal"]),
        r.report.global_bound,
        r.report.best_local_bound,
        get(&s["max_residual"]),
    ];
    Ok((cols, vec![row]))
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings

fn jc_params(cfg: &RunConfig) -> Result<JcParams> {
    JcParams::new(cfg.num("gamma0"), cfg.num("lambda0"), cfg.num("omega0"))
}

/// Requested horizon and the one actually used for the trajectory.
fn jc_horizon(cfg: &RunConfig, p: &JcParams) -> (f64, f64) {
    let t = cfg.opt_num("tmax").unwrap_or(5.0 / p.gamma0);
    (t, p.domain_end().map_or(t, |end| t.min(end)))
}

fn jc_single(cfg: &RunConfig) -> Result<Outcome> {
    let p = jc_params(cfg)?;
    let (t_req, t_traj) = jc_horizon(cfg, &p);
    let mut warnings = Vec::new();
    if t_traj < t_req {
        warnings.push(format!(
            "trajectory cut at the strong-coupling domain end t = {t_traj} (requested {t_req})"
        ));
    }
    let qsl = jc::qsl_jc(&p)?;
    let n = jc::non_markovianity(&p, t_req)?;
    let times = jc::uniform_times(t_traj, cfg.count("samples"));
    let bounds = match cfg.text("coordinate") {
        "z" => evaluate_bounds(
            &jc::trajectory(&p, &times, JcCoordinate::Z)?,
            &BlochZChart,
            EndpointMetric::Mixed,
        )?,
        _ => evaluate_bounds(
            &jc::trajectory(&p, &times, JcCoordinate::Rho11)?,
            &Rho11Chart,
            EndpointMetric::Mixed,
        )?,
    };
    let mut table = Table::new(&["t", "rho11", "z", "decay_rate", "sigma"]);
    for &t in &times {
        let rho = jc::rho11_closed_form(t, &p)?;
        table.rows.push(vec![
            t,
            rho,
            jc::bloch_z(rho),
            jc::decay_rate(t, &p).unwrap_or(f64::NAN),
            jc::sigma_backflow(t, &p)?,
        ]);
    }
    Ok(Outcome {
        results: json!({
            "qsl": qsl,
            "non_markovianity": n,
            "tmax": t_req,
            "trajectory_tmax": t_traj,
            "spectral_density_peak": jc::lorentzian_spectral_density(p.omega0, &p),
            "trajectory_bounds": bounds,
        }),
        artifacts: vec![Artifact {
            name: "traj".into(),
            table,
            plots: vec![
                ("traj".into(), Plot::new("Excited population", "t", &["rho11", "z"])),
                ("backflow".into(), Plot::new("Population rate", "t", &["sigma"])),
            ],
        }],
        warnings,
    })
}

fn jc_row(cfg: &RunConfig) -> Result<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let p = jc_params(cfg)?;
    let q = jc::qsl_jc(&p)?;
    let n = jc::non_markovianity(&p, jc_horizon(cfg, &p).0)?;
    let regime = match q.regime {
        Regime::Weak => 0.0,
        Regime::Critical => 1.0,
        Regime::Strong => 2.0,
    };
    let cols = vec![
        "gamma0",
        "lambda0",
        "tau_qsl",
        "tau_weak_formula",
        "tau_strong_formula",
        "sigma_max",
        "t_sigma_max",
        "non_markovianity",
        "regime",
    ];
    let row = vec![
        p.gamma0,
        p.lambda0,
        q.tau_qsl,
        q.tau_weak_formula,
        q.tau_strong_formula.unwrap_or(f64::NAN),
        q.sigma_max,
        q.t_sigma_max,
        n,
        regime,
    ];
    Ok((cols, vec![row]))
}

// ---------------------------------------------------------------------------
// Transport

fn transport_config(cfg: &RunConfig) -> TransportConfig {
    TransportConfig {
        mass: cfg.num("mass"),
        wavelength: cfg.num("wavelength"),
        u0: cfg.num("U0"),
        distance: cfg.num("d"),
        n_grid: cfg.count("n_grid"),
        padding_wavelengths: cfg.num("padding"),
        dt_over_tau_ho: cfg.num("dt_factor"),
        duration: cfg.opt_num("duration"),
        duration_factor: cfg.num("duration_factor"),
        snapshot_every: cfg.count("snapshot_every"),
    }
}

const TRANSPORT_COLUMNS: [&str; 11] = [
    "d",
    "delta_x",
    "speed_max_direct",
    "speed_max_formula",
    "tau_global",
    "tau_global_formula_speed",
    "tau_conveyor",
    "tau_local",
    "tau_qsl",
    "duration",
    "max_lag",
];

fn transport_single(cfg: &RunConfig) -> Result<Outcome> {
    let run = transport::run_transport(&transport_config(cfg))?;
    let mut table = Table::new(&[
        "t",
        "x_control",
        "trap_center",
        "mean_x",
        "delta_x",
        "delta_p",
        "k2",
        "delta_u",
        "fs_speed_direct",
        "fs_speed_formula",
    ]);
    for s in &run.snapshots {
        table.rows.push(vec![
            s.t,
            s.x_control,
            s.trap_center,
            s.mean_x,
            s.delta_x,
            s.delta_p,
            s.k2,
            s.delta_u,
            s.fs_speed_direct,
            s.fs_speed_formula,
        ]);
    }
    Ok(Outcome {
        warnings: run.report.warnings.clone(),
        results: json!({ "transport": run.report }),
        artifacts: vec![Artifact {
            name: "traj".into(),
            table,
            plots: vec![
                (
                    "traj".into(),
                    Plot::new("Atom and trap", "t", &["x_control", "trap_center", "mean_x"]),
                ),
                ("speeds".into(), Plot::new("Speeds", "t", &["fs_speed_direct"])),
            ],
        }],
    })
}

fn transport_row(cfg: &RunConfig) -> Result<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let r = transport::run_transport(&transport_config(cfg))?.report;
    let row = vec![
        r.d,
        r.delta_x,
        r.speed_max_direct,
        r.speed_max_formula,
        r.tau_global,
        r.tau_global_formula_speed,
        r.tau_conveyor,
        r.tau_local,
        r.tau_qsl,
        r.duration,
        r.max_lag,
    ];
    Ok((TRANSPORT_COLUMNS.to_vec(), vec![row]))
}

/// Given width, or the harmonic ground-state width `1/√(2mω)`.
fn surface_width(cfg: &RunConfig) -> Result<f64> {
    match cfg.opt_num("delta_x") {
        Some(dx) => Ok(dx),
        None => {
            let omega = transport::harmonic_frequency(cfg.num("U0"), cfg.num("mass"), cfg.num("wavelength"))?;
            Ok(1.0 / (2.0 * cfg.num("mass") * omega).sqrt())
        }
    }
}

fn k2_grid(cfg: &RunConfig) -> Vec<f64> {
    let spec = SweepSpec {
        parameter: "k2".into(),
        min: cfg.num("k2_min"),
        max: cfg.num("k2_max"),
        count: cfg.count("k2_count"),
        spacing: crate::config::Spacing::Log,
    };
    spec.values()
}

fn surface_rows(cfg: &RunConfig) -> Result<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let dx = surface_width(cfg)?;
    let rows = transport::bound_surface(dx, &[cfg.num("d")], &k2_grid(cfg))?
        .into_iter()
        .map(|p| vec![p.d, p.k2, p.tau])
        .collect();
    Ok((vec!["d", "K2", "tau"], rows))
}

fn surface_single(cfg: &RunConfig) -> Result<Outcome> {
    let (cols, rows) = surface_rows(cfg)?;
    let mut table = Table::new(&cols);
    table.rows = rows;
    Ok(Outcome {
        results: json!({ "delta_x": surface_width(cfg)?, "d": cfg.num("d"), "points": table.rows.len() }),
        artifacts: vec![Artifact {
            name: "heatmap".into(),
            table,
            plots: vec![("heatmap".into(), Plot::new("Bound at given <K^2>", "K2", &["tau"]))],
        }],
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Metric

/// Chart coordinates, point, metric rows, eigenvalues and the closed form.
struct MetricPoint {
    names: Vec<&'static str>,
    point: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    exact: Vec<Vec<f64>>,
}

impl MetricPoint {
    fn columns(&self) -> Vec<String> {
        let n = self.matrix.len();
        let mut cols: Vec<String> = self.names.iter().map(|s| s.to_string()).collect();
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("g{i}{j}"));
            }
        }
        cols.extend((0..n).map(|i| format!("eig{i}")));
        cols
    }

    fn row(&self) -> Vec<f64> {
        let mut row = self.point.clone();
        row.extend(self.matrix.iter().flatten());
        row.extend(&self.eigenvalues);
        row
    }
}

fn metric_eval(cfg: &RunConfig) -> Result<MetricPoint> {
    let (names, point, chart, exact): (Vec<&'static str>, Vec<f64>, &dyn ParameterChart, Vec<Vec<f64>>) =
        match cfg.text("chart") {
            "rho11" => {
                let p = cfg.num("rho11");
                (
                    vec!["rho11"],
                    vec![p],
                    &Rho11Chart,
                    vec![vec![1.0 / (4.0 * p * (1.0 - p))]],
                )
            }
            "bloch_z" => {
                let z = cfg.num("z");
                (
                    vec!["z"],
                    vec![z],
                    &BlochZChart,
                    vec![vec![1.0 / (4.0 * (1.0 - z * z))]],
                )
            }
            _ => {
                let (chi, phi) = (cfg.num("chi"), cfg.num("phi"));
                let s = chi.sin();
                (
                    vec!["chi", "phi"],
                    vec![chi, phi],
                    &BlochChart,
                    vec![vec![0.25, 0.0], vec![0.0, 0.25 * s * s]],
                )
            }
        };
    let g = metric_tensor(chart, &point)?;
    let m = g.matrix();
    let matrix = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    Ok(MetricPoint {
        names,
        point,
        matrix,
        eigenvalues: g.eigenvalues(),
        exact,
    })
}

fn metric_single(cfg: &RunConfig) -> Result<Outcome> {
    let m = metric_eval(cfg)?;
    let table = Table {
        columns: m.columns(),
        rows: vec![m.row()],
    };
    Ok(Outcome {
        results: json!({
            "chart": cfg.text("chart"),
            "coordinates": m.names,
            "point": m.point,
            "metric": m.matrix,
            "eigenvalues": m.eigenvalues,
            "psd": m.eigenvalues.iter().all(|&e| e >= -1e-12),
            "closed_form": m.exact,
        }),
        artifacts: vec![Artifact {
            name: "metric".into(),
            table,
            plots: Vec::new(),
        }],
        warnings: Vec::new(),
    })
}

fn metric_row(cfg: &RunConfig) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let m = metric_eval(cfg)?;
    Ok((m.columns(), vec![m.row()]))
}

// ---------------------------------------------------------------------------
// Sweeps

fn point_rows(cfg: &RunConfig) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let owned = |(c, r): (Vec<&'static str>, Vec<Vec<f64>>)| (c.into_iter().map(String::from).collect(), r);
    match cfg.scenario {
        Scenario::Lz => lz_row(cfg).map(owned),
        Scenario::Jc => jc_row(cfg).map(owned),
        Scenario::Transport if given_k2(cfg) => surface_rows(cfg).map(owned),
        Scenario::Transport => transport_row(cfg).map(owned),
        Scenario::Metric => metric_row(cfg),
    }
}

fn run_sweep(cfg: &RunConfig, spec: &SweepSpec) -> std::result::Result<Outcome, Failure> {
    let values = spec.values();
    let points: Vec<RunConfig> = values.iter().map(|&v| cfg.with_param(&spec.parameter, v)).collect();
    let results = par::map(&points, point_rows);

    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, (value, result)) in values.iter().zip(results).enumerate() {
        let (cols, point_rows) = result.map_err(|source| Failure {
            context: format!("{} sweep point {k} ({}={value})", cfg.scenario.name(), spec.parameter),
            source,
        })?;
        let lead = !cols.contains(&spec.parameter);
        if columns.is_none() {
            let mut all = Vec::new();
            if lead {
                all.push(spec.parameter.clone());
            }
            all.extend(cols);
            columns = Some(all);
        }
        for r in point_rows {
            let mut full = Vec::with_capacity(r.len() + 1);
            if lead {
                full.push(*value);
            }
            full.extend(r);
            rows.push(full);
        }
    }
    let table = Table {
        columns: columns.unwrap_or_default(),
        rows,
    };

    let mut fit = serde_json::Map::new();
    if cfg.scenario == Scenario::Transport && spec.parameter == "d" && !given_k2(cfg) && values.len() >= 2 {
        for col in ["tau_global", "tau_conveyor", "tau_qsl"] {
            let ys = table.column(col).expect("transport column");
            if let Ok(slope) = transport::loglog_slope(&values, &ys) {
                fit.insert(format!("loglog_slope_{col}"), json!(slope));
            }
        }
    }

    let (name, plot) = match cfg.scenario {
        Scenario::Transport if given_k2(cfg) => ("heatmap", None),
        Scenario::Metric => {
            let ys: Vec<&str> = table
                .columns
                .iter()
                .filter(|c| c.starts_with('g'))
                .map(String::as_str)
                .collect();
            ("sweep", Some(Plot::new("Metric components", &spec.parameter, &ys)))
        }
        Scenario::Jc => (
            "sweep",
            Some(Plot::new(
                "QSL time",
                &spec.parameter,
                &["tau_qsl", "tau_weak_formula", "tau_strong_formula"],
            )),
        ),
        _ => ("sweep", Some(Plot::new("QSL time", &spec.parameter, &["tau_qsl"]))),
    };
    let results = json!({
        "parameter": spec.parameter,
        "values": values,
        "columns": table.columns,
        "rows": table.rows,
        "fit": fit,
    });
    Ok(Outcome {
        results,
        artifacts: vec![Artifact {
            name: name.into(),
            plots: plot.map(|p| vec![(name.to_string(), p)]).unwrap_or_default(),
            table,
        }],
        warnings: Vec::new(),
    })
}
