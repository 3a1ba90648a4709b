//! CSV tables and JSON documents written by the command-line tool.
//!
//! Every CSV starts with a header whose column names carry their unit in
//! brackets. Numbers are written in Rust's shortest round-trip form, so
//! identical results always produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, Provenance};
use crate::drivetrain::SimTrace;
use crate::error::{Error, Result};
use crate::optimizer::{MaxFreqResult, StiffnessOptResult, SweepRow, AXIAL_FORCE_BASIS};
use crate::spectral;
use crate::tail_dynamics::phase_difference;

/// Version of the JSON documents and CSV column layouts.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_COLUMNS: &[&str] = &[
    "t [s]",
    "theta1 [rad]",
    "theta2 [rad]",
    "theta_s [rad]",
    "tau_j1 [N*m]",
    "t_e1 [N*m]",
    "e_aes [J]",
    "f_wire [N]",
    "t_m [N*m]",
    "p_m [W]",
    "thrust [N]",
    "f_cr [N]",
];

pub const SWEEP_COLUMNS: &[&str] = &[
    "frequency [Hz]",
    "pes_thickness [m]",
    "pes_stiffness [N*m]",
    "k1_min [N*m]",
    "k1_max [N*m]",
    "axial_force [N]",
    "k1_opt [N*m]",
    "aes_thickness [m]",
    "variance [W^2]",
    "rigid_variance [W^2]",
    "eta_r [%]",
    "eta_a [W^2]",
    "mean_power [W]",
    "max_power [W]",
    "rigid_max_power [W]",
    "peak_joint_torque [N*m]",
    "non_unimodal [-]",
    "error",
];

fn num(v: f64) -> String {
    format!("{v}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes CSV rows (already formatted) under a header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))?;
    Ok(())
}

pub fn trace_rows(trace: &SimTrace) -> Vec<Vec<String>> {
    trace
        .tail
        .samples
        .iter()
        .zip(&trace.drivetrain)
        .map(|(s, d)| {
            [
                s.time,
                s.theta1,
                s.theta2,
                s.theta_s,
                s.joint_torque,
                d.aes_moment,
                d.aes_energy,
                d.wire_force,
                d.motor_torque,
                d.motor_power,
                s.thrust,
                s.fin_axial_force,
            ]
            .into_iter()
            .map(num)
            .collect()
        })
        .collect()
}

pub fn sweep_rows(rows: &[SweepRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| {
            let mut cells = vec![num(row.frequency), num(row.pes_thickness), num(row.pes_stiffness)];
            match &row.result {
                Ok(r) => {
                    cells.extend(
                        [
                            r.bounds.k1_min,
                            r.bounds.k1_max,
                            r.bounds.axial_force,
                            r.k1_opt,
                            r.thickness,
                            r.variance,
                            r.rigid_variance,
                            r.eta_r,
                            r.eta_a,
                            r.mean_power,
                            r.max_power,
                            r.rigid_max_power,
                            r.peak_joint_torque,
                        ]
                        .into_iter()
                        .map(num),
                    );
                    cells.push(u8::from(r.non_unimodal).to_string());
                    cells.push(String::new());
                }
                Err(e) => {
                    cells.extend(std::iter::repeat(String::new()).take(SWEEP_COLUMNS.len() - 4));
                    cells.push(e.clone());
                }
            }
            cells
        })
        .collect()
}

/// Summary statistics of a simulated trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub schema_version: u32,
    pub frequency: f64,
    pub aes_stiffness: f64,
    pub pes_stiffness: f64,
    pub steps_per_cycle: usize,
    pub cycles: usize,
    pub settle_cycles: usize,
    pub steady_change: f64,
    pub mean_motor_torque: f64,
    pub mean_motor_power: f64,
    pub max_motor_power: f64,
    pub min_motor_power: f64,
    pub power_variance: f64,
    pub power_peak_to_peak: f64,
    pub mean_thrust: f64,
    pub amplitude_theta1: f64,
    pub amplitude_theta2: f64,
    pub amplitude_theta_s: f64,
    /// Lag of the fin orientation behind the chord orientation (rad), or
    /// `None` when a channel has no fundamental.
    pub phase_lag: Option<f64>,
    pub peak_joint_torque: f64,
    pub peak_axial_fin_force: f64,
    pub axial_force_basis: &'static str,
    pub peak_aes_energy: f64,
    /// Motor work per cycle (J).
    pub motor_work_per_cycle: f64,
}

pub fn summarize(trace: &SimTrace) -> TraceSummary {
    let run = &trace.tail;
    let power = trace.power();
    let (min_p, max_p) = spectral::min_max(&power);
    let cycles = run.cycles();
    let dt = run.dt();
    let work = spectral::trapezoid(&power, trace.closing.motor_power, dt);
    TraceSummary {
        schema_version: SCHEMA_VERSION,
        frequency: run.frequency,
        aes_stiffness: trace.aes_stiffness,
        pes_stiffness: run.pes_stiffness,
        steps_per_cycle: run.steps_per_cycle,
        cycles,
        settle_cycles: run.settle_cycles,
        steady_change: run.steady_change,
        mean_motor_torque: trace.mean_torque(),
        mean_motor_power: spectral::mean(&power),
        max_motor_power: max_p,
        min_motor_power: min_p,
        power_variance: spectral::variance(&power),
        power_peak_to_peak: max_p - min_p,
        mean_thrust: run.mean_thrust(),
        amplitude_theta1: spectral::amplitude(&run.channel(|s| s.theta1)),
        amplitude_theta2: spectral::amplitude(&run.channel(|s| s.theta2)),
        amplitude_theta_s: spectral::amplitude(&run.channel(|s| s.theta_s)),
        phase_lag: phase_difference(run).ok(),
        peak_joint_torque: run.peak_joint_torque(),
        peak_axial_fin_force: run.peak_fin_axial_force(),
        axial_force_basis: AXIAL_FORCE_BASIS,
        peak_aes_energy: trace.drivetrain.iter().fold(0.0, |m, d| m.max(d.aes_energy)),
        motor_work_per_cycle: work / cycles.max(1) as f64,
    }
}

/// A JSON document: the payload plus the schema version.
#[derive(Debug, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: u32,
    pub kind: &'a str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn to_json<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        kind,
        body,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[derive(Debug, Serialize)]
struct SweepCell<'a> {
    frequency: f64,
    pes_stiffness: f64,
    pes_thickness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a StiffnessOptResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Debug, Serialize)]
struct SweepDoc<'a> {
    axial_force_basis: &'static str,
    rows: Vec<SweepCell<'a>>,
}

pub fn sweep_json(rows: &[SweepRow]) -> Result<String> {
    let cells = rows
        .iter()
        .map(|r| SweepCell {
            frequency: r.frequency,
            pes_stiffness: r.pes_stiffness,
            pes_thickness: r.pes_thickness,
            result: r.result.as_ref().ok(),
            error: r.result.as_ref().err().map(String::as_str),
        })
        .collect();
    to_json(
        "sweep",
        &SweepDoc {
            axial_force_basis: AXIAL_FORCE_BASIS,
            rows: cells,
        },
    )
}

pub fn maxfreq_rows(r: &MaxFreqResult) -> Vec<Vec<String>> {
    let mut ev = r.evaluations.clone();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev.into_iter().map(|(f, p)| vec![num(f), num(p)]).collect()
}

/// Record of one command-line invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub tool_version: &'static str,
    /// Resolved parameters in config-file form; reloading it reproduces the run.
    pub config_snapshot: String,
    pub provenance: BTreeMap<String, Provenance>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(subcommand: &str, arguments: Vec<String>, config: &Config) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            arguments,
            tool_version: env!("CARGO_PKG_VERSION"),
            config_snapshot: config.to_text(),
            provenance: config.provenance.clone(),
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
        }
    }
}

/// Collects output files in a directory and records them in the manifest.
pub struct OutputDir {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: &Path, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut buf = Vec::new();
        write_csv(&mut buf, header, rows)?;
        self.write(name, &buf)
    }

    /// Writes `manifest.json`, listing itself among the outputs.
    pub fn finish(mut self, seconds: f64) -> Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        self.manifest.outputs.push(path.clone());
        self.manifest.wall_clock_seconds = seconds;
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }
}
