//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation or I/O step fails, 2 for
//! usage errors (reported by the argument parser).

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Config, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::optimizer::{
    bounds_from_run, lattice, max_frequency, optimize_run, peak_to_peak_objective, sweep, OptMode,
    OptOptions, PesSetting, PowerObjective, Variant,
};
use crate::output::{self, OutputDir, RunManifest};
use crate::spectral;
use crate::tail_dynamics::{run_tail, simulate};

#[derive(Debug, Parser)]
#[command(name = "wirefish", version, about = "Wire-driven elastic fishtail simulator and AES stiffness optimizer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the steady-state swing and write the time series.
    Simulate(SimulateArgs),
    /// Feasible AES stiffness interval at one operating point.
    Bounds(PointArgs),
    /// Optimal AES stiffness at one operating point.
    Optimize(OptimizeArgs),
    /// Optimize over a grid of frequencies and PES stiffnesses.
    Sweep(SweepArgs),
    /// Largest swing frequency within the motor power cap.
    Maxfreq(MaxfreqArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file.
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    /// Directory for output files; without it a JSON summary goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct PesArg {
    /// PES stiffness (N*m).
    #[arg(long)]
    pub k2: Option<f64>,
    /// PES thickness (mm).
    #[arg(long)]
    pub dt2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct AesArg {
    /// AES stiffness (N*m).
    #[arg(long)]
    pub k1: Option<f64>,
    /// AES thickness (mm).
    #[arg(long)]
    pub dt1: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: Common,
    /// Swing frequency (Hz); defaults to the config value.
    #[arg(long)]
    pub freq: Option<f64>,
    #[command(flatten)]
    pub pes: PesArg,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub aes: AesArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Grid,
    Continuous,
}

impl From<ModeArg> for OptMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Grid => OptMode::Grid,
            ModeArg::Continuous => OptMode::Continuous,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptArgs {
    /// Stiffness search mode.
    #[arg(long, value_enum, default_value = "continuous")]
    pub mode: ModeArg,
    /// Largest acceptable motor power variance (W^2).
    #[arg(long)]
    pub var_cap: Option<f64>,
}

impl OptArgs {
    fn options(&self) -> OptOptions {
        OptOptions {
            mode: self.mode.into(),
            variance_cap: self.var_cap,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub opt: OptArgs,
}

/// An inclusive `lo:step:hi` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
        match parts.as_slice() {
            [single] => Ok(Grid(vec![parse(single)?])),
            [lo, step, hi] => {
                let (lo, step, hi) = (parse(lo)?, parse(step)?, parse(hi)?);
                if !(step > 0.0) || hi < lo {
                    return Err("expected lo:step:hi with step > 0 and hi >= lo".into());
                }
                let n = ((hi - lo) / step + 1e-9).floor() as usize;
                // Values are rebuilt from the index so that 0.1-spaced grids
                // carry no accumulated rounding.
                let decimals = [lo, step]
                    .iter()
                    .map(|v| {
                        let t = format!("{v}");
                        t.split_once('.').map_or(0, |(_, f)| f.len())
                    })
                    .max()
                    .unwrap_or(0) as i32;
                let scale = 10f64.powi(decimals);
                Ok(Grid(
                    (0..=n)
                        .map(|i| ((lo + step * i as f64) * scale).round() / scale)
                        .collect(),
                ))
            }
            _ => Err("expected a number or lo:step:hi".into()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Frequencies, `lo:step:hi` (Hz).
    #[arg(long)]
    pub freq_grid: Grid,
    /// PES thicknesses, `lo:step:hi` (mm).
    #[arg(long, conflicts_with = "k2_grid", required_unless_present = "k2_grid")]
    pub dt2_grid: Option<Grid>,
    /// PES stiffnesses, `lo:step:hi` (N*m).
    #[arg(long)]
    pub k2_grid: Option<Grid>,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Aes,
    Rigid,
}

#[derive(Debug, Clone, Args)]
pub struct MaxfreqArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pes: PesArg,
    #[arg(long, value_enum, default_value = "aes")]
    pub variant: VariantArg,
    #[command(flatten)]
    pub opt: OptArgs,
}

fn load(common: &Common) -> Result<Config> {
    Config::load(&common.config)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidConfig(format!("--{name} must be positive, got {v}")))
    }
}

fn apply_point(cfg: &mut Config, freq: Option<f64>, pes: &PesArg) -> Result<()> {
    if let Some(f) = freq {
        cfg.sim.frequency = positive("freq", f)?;
        cfg.mark_user("sim.frequency");
    }
    if let Some(k) = pes.k2 {
        cfg.model = cfg.model.with_pes_stiffness(positive("k2", k)?);
        cfg.mark_user("pes.thickness");
    }
    if let Some(d) = pes.dt2 {
        cfg.model = cfg.model.with_pes_thickness(positive("dt2", d)? * 1e-3);
        cfg.mark_user("pes.thickness");
    }
    cfg.sim.validate()
}

/// AES stiffness from the flags, falling back to the configured thickness.
fn aes_stiffness(cfg: &mut Config, aes: &AesArg) -> Result<f64> {
    if let Some(k) = aes.k1 {
        cfg.model.aes.thickness = cfg.model.aes.thickness_for_stiffness(positive("k1", k)?);
        cfg.mark_user("aes.thickness");
        return Ok(k);
    }
    if let Some(d) = aes.dt1 {
        cfg.model.aes.thickness = positive("dt1", d)? * 1e-3;
        cfg.mark_user("aes.thickness");
    }
    Ok(cfg.model.aes.stiffness())
}

struct Emitter {
    out: Option<OutputDir>,
    started: Instant,
}

impl Emitter {
    fn new(common: &Common, subcommand: &str, args: &[String], cfg: &Config) -> Result<Self> {
        let out = match &common.out {
            Some(dir) => Some(OutputDir::create(
                dir,
                RunManifest::new(subcommand, args.to_vec(), cfg),
            )?),
            None => None,
        };
        Ok(Emitter {
            out,
            started: Instant::now(),
        })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        match &mut self.out {
            Some(o) => o.write_csv(name, header, rows),
            None => Ok(()),
        }
    }

    /// Writes the main JSON result to the output directory, or to stdout.
    fn json(&mut self, name: &str, text: &str) -> Result<()> {
        match &mut self.out {
            Some(o) => o.write(name, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(o) = self.out {
            let path = o.finish(self.started.elapsed().as_secs_f64())?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn cmd_simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let mut cfg = load(&a.point.common)?;
    apply_point(&mut cfg, a.point.freq, &a.point.pes)?;
    let k1 = aes_stiffness(&mut cfg, &a.aes)?;
    let mut em = Emitter::new(&a.point.common, "simulate", argv, &cfg)?;
    let trace = simulate(&cfg.model, &cfg.sim, k1)?;
    em.csv("trace.csv", output::TRACE_COLUMNS, &output::trace_rows(&trace))?;
    em.json("summary.json", &output::to_json("simulate", &output::summarize(&trace))?)?;
    em.finish()
}

fn cmd_bounds(a: &PointArgs, argv: &[String]) -> Result<()> {
    let mut cfg = load(&a.common)?;
    apply_point(&mut cfg, a.freq, &a.pes)?;
    let mut em = Emitter::new(&a.common, "bounds", argv, &cfg)?;
    let run = run_tail(&cfg.model, &cfg.sim)?;
    let bounds = bounds_from_run(&run, &cfg.model);
    #[derive(serde::Serialize)]
    struct Doc {
        frequency: f64,
        pes_stiffness: f64,
        feasible: bool,
        axial_force_basis: &'static str,
        bounds: crate::optimizer::StiffnessBounds,
    }
    let doc = Doc {
        frequency: cfg.sim.frequency,
        pes_stiffness: cfg.model.pes_stiffness(),
        feasible: bounds.is_feasible(),
        axial_force_basis: crate::optimizer::AXIAL_FORCE_BASIS,
        bounds,
    };
    em.json("bounds.json", &output::to_json("bounds", &doc)?)?;
    em.finish()
}

fn cmd_optimize(a: &OptimizeArgs, argv: &[String]) -> Result<()> {
    let mut cfg = load(&a.point.common)?;
    apply_point(&mut cfg, a.point.freq, &a.point.pes)?;
    let mut em = Emitter::new(&a.point.common, "optimize", argv, &cfg)?;
    let run = run_tail(&cfg.model, &cfg.sim)?;
    let result = optimize_run(&run, &cfg.model, &a.opt.options())?;
    let objective = PowerObjective::new(&run, &cfg.model);
    let curve: Vec<Vec<String>> = lattice(&cfg.model.aes, &result.bounds)
        .into_iter()
        .map(|(d, k1)| {
            let p = objective.power(k1);
            vec![
                format!("{k1}"),
                format!("{d}"),
                format!("{}", spectral::variance(&p)),
                format!("{}", peak_to_peak_objective(&p)),
                format!("{}", spectral::mean(&p)),
            ]
        })
        .collect();
    em.csv(
        "variance_curve.csv",
        &["k1 [N*m]", "aes_thickness [m]", "variance [W^2]", "peak_to_peak [W]", "mean_power [W]"],
        &curve,
    )?;
    em.json("optimize.json", &output::to_json("optimize", &result)?)?;
    em.finish()
}

fn cmd_sweep(a: &SweepArgs, argv: &[String]) -> Result<()> {
    let cfg = load(&a.common)?;
    let pes: Vec<PesSetting> = match (&a.dt2_grid, &a.k2_grid) {
        (Some(g), _) => g.0.iter().map(|d| PesSetting::Thickness(d * 1e-3)).collect(),
        (None, Some(g)) => g.0.iter().map(|&k| PesSetting::Stiffness(k)).collect(),
        (None, None) => unreachable!("argument parser requires one PES grid"),
    };
    for &f in &a.freq_grid.0 {
        positive("freq-grid", f)?;
    }
    let mut em = Emitter::new(&a.common, "sweep", argv, &cfg)?;
    let rows = sweep(&cfg.model, &cfg.sim, &a.freq_grid.0, &pes, &a.opt.options(), a.jobs)?;
    em.csv("sweep.csv", output::SWEEP_COLUMNS, &output::sweep_rows(&rows))?;
    em.json("sweep.json", &output::sweep_json(&rows)?)?;
    em.finish()
}

fn cmd_maxfreq(a: &MaxfreqArgs, argv: &[String]) -> Result<()> {
    let mut cfg = load(&a.common)?;
    apply_point(&mut cfg, None, &a.pes)?;
    let variant = match a.variant {
        VariantArg::Aes => Variant::Aes,
        VariantArg::Rigid => Variant::Rigid,
    };
    let mut em = Emitter::new(&a.common, "maxfreq", argv, &cfg)?;
    let r = max_frequency(&cfg.model, &cfg.sim, variant, &a.opt.options())?;
    em.csv(
        "maxfreq_evaluations.csv",
        &["frequency [Hz]", "max_power [W]"],
        &output::maxfreq_rows(&r),
    )?;
    em.json("maxfreq.json", &output::to_json("maxfreq", &r)?)?;
    em.finish()
}

/// Runs a parsed command. `argv` is recorded in the manifest.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, argv),
        Command::Bounds(a) => cmd_bounds(a, argv),
        Command::Optimize(a) => cmd_optimize(a, argv),
        Command::Sweep(a) => cmd_sweep(a, argv),
        Command::Maxfreq(a) => cmd_maxfreq(a, argv),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Path helper for tests and scripts: the output file `name` in `dir`.
pub fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
