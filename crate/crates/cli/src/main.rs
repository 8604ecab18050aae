// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! `qsl`: quantum-speed-limit bounds from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! domain error.

mod config;
mod output;
mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use config::{Input, RunConfig, Scenario, Source};

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limit bounds for driven, transported and open qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlinear Landau-Zener qubit on the Bloch sphere.
    Lz {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: LzFlags,
    },
    /// Atom transported in a moving optical lattice.
    Transport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: TransportFlags,
    },
    /// Damped Jaynes-Cummings qubit in a Lorentzian reservoir.
    Jc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: JcFlags,
    },
    /// Bures/Fubini-Study metric tensor of a built-in chart.
    Metric {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: MetricFlags,
    },
    /// Run the sweep declared in a config file.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file (a previous report.json also works); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Sweep one parameter: name=min:max:count:linear|log.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    no_csv: bool,
    #[arg(long)]
    no_json: bool,
    #[arg(long)]
    no_svg: bool,
    /// Validate the configuration and exit without running.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct LzFlags {
    #[arg(long)]
    v: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    chi0: Option<f64>,
    #[arg(long)]
    chitau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<f64>,
    /// optimal, constant or ramp.
    #[arg(long)]
    protocol: Option<String>,
    /// Constant bias, or ramp start.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct TransportFlags {
    /// simulate or given_k2.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    wavelength: Option<f64>,
    #[arg(long = "U0", allow_hyphen_values = true)]
    u0: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    n_grid: Option<u64>,
    #[arg(long)]
    padding: Option<f64>,
    #[arg(long)]
    dt_factor: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    duration_factor: Option<f64>,
    #[arg(long)]
    snapshot_every: Option<u64>,
    #[arg(long)]
    delta_x: Option<f64>,
    #[arg(long)]
    k2_min: Option<f64>,
    #[arg(long)]
    k2_max: Option<f64>,
    #[arg(long)]
    k2_count: Option<u64>,
}

#[derive(Args)]
struct JcFlags {
    #[arg(long, allow_hyphen_values = true)]
    gamma0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    /// rho11 or z.
    #[arg(long)]
    coordinate: Option<String>,
}

#[derive(Args)]
struct MetricFlags {
    /// bloch, rho11 or bloch_z.
    #[arg(long)]
    chart: Option<String>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long)]
    rho11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
}

type Overrides = Vec<(&'static str, Value, String)>;

fn push_num(out: &mut Overrides, key: &'static str, flag: &str, v: Option<f64>) {
    if let Some(x) = v {
        let value = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        out.push((key, value, format!("--{flag}")));
    }
}

fn push_int(out: &mut Overrides, key: &'static str, flag: &str, v: Option<u64>) {
    if let Some(n) = v {
        out.push((key, Value::from(n), format!("--{flag}")));
    }
}

fn push_text(out: &mut Overrides, key: &'static str, flag: &str, v: &Option<String>) {
    if let Some(s) = v {
        out.push((key, Value::String(s.clone()), format!("--{flag}")));
    }
}

impl LzFlags {
    fn overrides(&self) -> Overrides {
        let mut o = Vec::new();
        push_num(&mut o, "v", "v", self.v);
        push_num(&mut o, "c", "c", self.c);
        push_num(&mut o, "chi0", "chi0", self.chi0);
        push_num(&mut o, "chitau", "chitau", self.chitau);
        push_num(&mut o, "phi0", "phi0", self.phi0);
        push_text(&mut o, "protocol", "protocol", &self.protocol);
        push_num(&mut o, "gamma", "gamma", self.gamma);
        push_num(&mut o, "slope", "slope", self.slope);
        push_num(&mut o, "tmax", "tmax", self.tmax);
        push_num(&mut o, "dt", "dt", self.dt);
        o
    }
}

impl TransportFlags {
    fn overrides(&self) -> Overrides {
        let mut o = Vec::new();
        push_text(&mut o, "mode", "mode", &self.mode);
        push_num(&mut o, "mass", "mass", self.mass);
        push_num(&mut o, "wavelength", "wavelength", self.wavelength);
        push_num(&mut o, "U0", "U0", self.u0);
        push_num(&mut o, "d", "d", self.d);
        push_int(&mut o, "n_grid", "n-grid", self.n_grid);
        push_num(&mut o, "padding", "padding", self.padding);
        push_num(&mut o, "dt_factor", "dt-factor", self.dt_factor);
        push_num(&mut o, "duration", "duration", self.duration);
        push_num(&mut o, "duration_factor", "duration-factor", self.duration_factor);
        push_int(&mut o, "snapshot_every", "snapshot-every", self.snapshot_every);
        push_num(&mut o, "delta_x", "delta-x", self.delta_x);
        push_num(&mut o, "k2_min", "k2-min", self.k2_min);
        push_num(&mut o, "k2_max", "k2-max", self.k2_max);
        push_int(&mut o, "k2_count", "k2-count", self.k2_count);
        o
    }
}

impl JcFlags {
    fn overrides(&self) -> Overrides {
        let mut o = Vec::new();
        push_num(&mut o, "gamma0", "gamma0", self.gamma0);
        push_num(&mut o, "lambda0", "lambda0", self.lambda0);
        push_num(&mut o, "omega0", "omega0", self.omega0);
        push_num(&mut o, "tmax", "tmax", self.tmax);
        push_int(&mut o, "samples", "samples", self.samples);
        push_text(&mut o, "coordinate", "coordinate", &self.coordinate);
        o
    }
}

impl MetricFlags {
    fn overrides(&self) -> Overrides {
        let mut o = Vec::new();
        push_text(&mut o, "chart", "chart", &self.chart);
        push_num(&mut o, "chi", "chi", self.chi);
        push_num(&mut o, "phi", "phi", self.phi);
        push_num(&mut o, "rho11", "rho11", self.rho11);
        push_num(&mut o, "z", "z", self.z);
        o
    }
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    results: &'a Value,
    warnings: &'a [String],
    artifacts: &'a [String],
}

fn build_input(common: &Common, scenario: Option<Scenario>, params: Overrides) -> Result<Input, ExitCode> {
    let file = match &common.config {
        None => None,
        Some(path) => match fs::read_to_string(path) {
            Ok(text) => Some(Source {
                path: path.display().to_string(),
                text,
            }),
            Err(e) => {
                eprintln!("error: {}: cannot read config: {e}", path.display());
                return Err(ExitCode::from(2));
            }
        },
    };
    Ok(Input {
        file,
        scenario,
        params,
        output: common.out.clone(),
        sweep: common.sweep.clone(),
        no_csv: common.no_csv,
        no_json: common.no_json,
        no_svg: common.no_svg,
        require_sweep: scenario.is_none(),
    })
}

fn write_artifacts(cfg: &RunConfig, outcome: &scenarios::Outcome) -> std::io::Result<Vec<String>> {
    let dir = Path::new(&cfg.output);
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in &outcome.artifacts {
        if cfg.emit.csv {
            let name = format!("{}.csv", a.name);
            output::write_csv(&dir.join(&name), &a.table)?;
            written.push(name);
        }
        if cfg.emit.svg {
            for (file, plot) in &a.plots {
                let name = format!("{file}.svg");
                fs::write(dir.join(&name), output::render_svg(&a.table, plot))?;
                written.push(name);
            }
        }
    }
    if cfg.emit.json {
        written.push("report.json".into());
        let report = Report {
            config: cfg,
            results: &outcome.results,
            warnings: &outcome.warnings,
            artifacts: &written,
        };
        output::write_json(&dir.join("report.json"), &report)?;
    }
    Ok(written)
}

fn execute(common: &Common, scenario: Option<Scenario>, params: Overrides) -> ExitCode {
    let input = match build_input(common, scenario, params) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let report_diagnostics = |diags: &[config::Diagnostic]| {
        for d in diags {
            eprintln!("error: {d}");
        }
        eprintln!("{} configuration error(s)", diags.len());
        ExitCode::from(2)
    };
    if common.check {
        let diags = config::validate(&input);
        if !diags.is_empty() {
            return report_diagnostics(&diags);
        }
        println!("configuration ok");
        return ExitCode::SUCCESS;
    }
    let cfg = match config::resolve(&input) {
        Ok(cfg) => cfg,
        Err(diags) => return report_diagnostics(&diags),
    };
    let outcome = match scenarios::run(&cfg) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}: {}", f.context, f.source);
            return ExitCode::from(3);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match write_artifacts(&cfg, &outcome) {
        Ok(files) => {
            for f in files {
                println!("{}", Path::new(&cfg.output).join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: writing to {}: {e}", cfg.output);
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Lz { common, flags } => execute(common, Some(Scenario::Lz), flags.overrides()),
        Command::Transport { common, flags } => execute(common, Some(Scenario::Transport), flags.overrides()),
        Command::Jc { common, flags } => execute(common, Some(Scenario::Jc), flags.overrides()),
        Command::Metric { common, flags } => execute(common, Some(Scenario::Metric), flags.overrides()),
        Command::Sweep { common } => execute(common, None, Vec::new()),
    }
}
