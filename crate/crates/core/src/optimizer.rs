//! AES stiffness selection.
//!
//! The feasible stiffness interval is bounded below by Euler buckling of the
//! AES under the axial fin force and above by the static motor torque limit.
//! Inside it the stiffness minimising the variance of motor power is found on
//! the spring-steel thickness lattice and, optionally, refined continuously.
//! Because the AES stiffness does not change the tail motion, every search
//! reuses a single tail simulation per (frequency, PES stiffness) cell.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FishModel, SimSettings, SpringSpec, THICKNESS_STEP};
use crate::drivetrain::{power_series, statics_torque_per_stiffness};
use crate::error::{Error, Result};
use crate::spectral;
use crate::tail_dynamics::{run_tail, TailRun};

/// Effective length factor of the AES as a column (one end clamped, the
/// other free).
pub const BUCKLING_LENGTH_FACTOR: f64 = 2.0;

/// Motor-angle samples per revolution for the static torque maximum.
pub const STATICS_GRID: usize = 20_000;

/// Frequency bracket and tolerance of the maximum-frequency search (Hz).
pub const FREQ_SEARCH_LO: f64 = 0.5;
pub const FREQ_SEARCH_HI: f64 = 20.0;
pub const FREQ_SEARCH_TOL: f64 = 0.01;

/// Relative variance difference below which two stiffnesses tie.
const TIE_TOL: f64 = 1e-9;

/// Samples used to check the refinement bracket for a single minimum.
const BRACKET_SAMPLES: usize = 33;

/// How the axial fin force entering the buckling bound is taken from a run.
pub const AXIAL_FORCE_BASIS: &str = "cycle-peak |F_cr| over the steady-state window";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StiffnessBounds {
    pub k1_min: f64,
    pub k1_max: f64,
    /// Axial fin force the AES must carry without buckling (N).
    pub axial_force: f64,
    /// Largest static motor torque per unit AES stiffness (N*m per N*m).
    pub statics_torque_per_stiffness: f64,
    /// Motor torque limit that sets `k1_max` (N*m).
    pub max_torque: f64,
}

impl StiffnessBounds {
    pub fn is_feasible(&self) -> bool {
        self.k1_min <= self.k1_max
    }

    pub fn check(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible {
                k1_min: self.k1_min,
                k1_max: self.k1_max,
            })
        }
    }

    pub fn contains(&self, k1: f64) -> bool {
        k1 >= self.k1_min && k1 <= self.k1_max
    }
}

/// Smallest AES stiffness whose Euler critical load reaches `axial_force`.
///
/// The critical load of the strip is `pi^2 E I / (mu l)^2`; solving for
/// `E I` and dividing by `l` gives the rotational stiffness.
pub fn buckling_min_stiffness(axial_force: f64, aes: &SpringSpec) -> f64 {
    let mu = BUCKLING_LENGTH_FACTOR;
    axial_force.abs() * mu * mu * aes.length / (PI * PI)
}

/// Euler critical load of an AES strip (N).
pub fn critical_load(aes: &SpringSpec) -> f64 {
    let mu_l = BUCKLING_LENGTH_FACTOR * aes.length;
    PI * PI * aes.modulus * aes.area_moment() / (mu_l * mu_l)
}

/// Largest AES stiffness whose static motor torque stays within the limit.
pub fn statics_max_stiffness(model: &FishModel) -> f64 {
    model.drive.max_torque / statics_torque_per_stiffness(&model.drive, STATICS_GRID)
}

/// Stiffness bounds given a steady-state tail run.
pub fn bounds_from_run(run: &TailRun, model: &FishModel) -> StiffnessBounds {
    let axial_force = run.peak_fin_axial_force();
    StiffnessBounds {
        k1_min: buckling_min_stiffness(axial_force, &model.aes),
        k1_max: statics_max_stiffness(model),
        axial_force,
        statics_torque_per_stiffness: statics_torque_per_stiffness(&model.drive, STATICS_GRID),
        max_torque: model.drive.max_torque,
    }
}

/// Simulates the tail at the settings' frequency and returns the feasible
/// AES stiffness interval. An empty interval is returned as is; use
/// [`StiffnessBounds::check`] to turn it into an error.
pub fn stiffness_bounds(model: &FishModel, sim: &SimSettings) -> Result<StiffnessBounds> {
    let run = run_tail(model, sim)?;
    Ok(bounds_from_run(&run, model))
}

/// Population variance of motor power over a window.
pub fn variance_objective(power: &[f64]) -> f64 {
    spectral::variance(power)
}

/// Spread between the largest and smallest motor power over a window.
pub fn peak_to_peak_objective(power: &[f64]) -> f64 {
    spectral::peak_to_peak(power)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    /// Thicknesses on the 0.1 mm lattice only.
    Grid,
    /// Lattice search followed by golden-section refinement.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptOptions {
    pub mode: OptMode,
    /// Largest acceptable power variance (W^2), if any.
    pub variance_cap: Option<f64>,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            mode: OptMode::Continuous,
            variance_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffnessOptResult {
    pub frequency: f64,
    pub pes_stiffness: f64,
    pub mode: OptMode,
    pub bounds: StiffnessBounds,
    /// Optimal AES stiffness (N*m).
    pub k1_opt: f64,
    /// AES thickness realising `k1_opt` (m); on the lattice in grid mode.
    pub thickness: f64,
    /// Motor power variance at `k1_opt` (W^2).
    pub variance: f64,
    pub mean_power: f64,
    pub max_power: f64,
    pub peak_to_peak: f64,
    /// Same quantities with the AES carrying no moment.
    pub rigid_variance: f64,
    pub rigid_max_power: f64,
    /// Relative variance reduction against the rigid spine (%).
    pub eta_r: f64,
    /// Absolute variance reduction against the rigid spine (W^2).
    pub eta_a: f64,
    pub peak_joint_torque: f64,
    /// Set when the refinement bracket had more than one local minimum and
    /// the best sample was used instead.
    pub non_unimodal: bool,
    pub variance_cap: Option<f64>,
    pub within_variance_cap: Option<bool>,
}

/// Variance of motor power as a function of AES stiffness for one run.
pub struct PowerObjective<'a> {
    run: &'a TailRun,
    model: &'a FishModel,
}

impl<'a> PowerObjective<'a> {
    pub fn new(run: &'a TailRun, model: &'a FishModel) -> Self {
        PowerObjective { run, model }
    }

    pub fn power(&self, k1: f64) -> Vec<f64> {
        power_series(self.run, k1, &self.model.drive)
    }

    pub fn variance(&self, k1: f64) -> f64 {
        variance_objective(&self.power(k1))
    }
}

/// Lattice thicknesses whose stiffness lies within `bounds`, ascending.
pub fn lattice(aes: &SpringSpec, bounds: &StiffnessBounds) -> Vec<(f64, f64)> {
    if !bounds.is_feasible() {
        return Vec::new();
    }
    let lo = (aes.thickness_for_stiffness(bounds.k1_min) / THICKNESS_STEP).floor().max(1.0) as u64;
    let hi = (aes.thickness_for_stiffness(bounds.k1_max) / THICKNESS_STEP).ceil() as u64;
    (lo..=hi)
        .map(|k| {
            let d = k as f64 * THICKNESS_STEP;
            (d, aes.with_thickness(d).stiffness())
        })
        .filter(|&(_, k1)| bounds.contains(k1))
        .collect()
}

fn better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE_TOL * incumbent.abs()
}

/// Golden-section minimisation of `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// True when `values` fall to a single minimum and then rise, ignoring
/// differences below the tie tolerance.
fn is_unimodal(values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_TOL * scale;
    let mut rising = false;
    for w in values.windows(2) {
        let diff = w[1] - w[0];
        if diff > tol {
            rising = true;
        } else if diff < -tol && rising {
            return false;
        }
    }
    true
}

/// Optimal AES stiffness for an existing steady-state run.
pub fn optimize_run(run: &TailRun, model: &FishModel, opts: &OptOptions) -> Result<StiffnessOptResult> {
    let bounds = bounds_from_run(run, model);
    bounds.check()?;
    let objective = PowerObjective::new(run, model);
    let points = lattice(&model.aes, &bounds);

    let mut best: Option<(usize, f64)> = None;
    for (i, &(_, k1)) in points.iter().enumerate() {
        let v = objective.variance(k1);
        if best.map_or(true, |(_, bv)| better(v, bv)) {
            best = Some((i, v));
        }
    }

    let mut non_unimodal = false;
    let (k1_opt, thickness) = match (opts.mode, best) {
        (OptMode::Grid, None) => {
            return Err(Error::EmptyLattice {
                k1_min: bounds.k1_min,
                k1_max: bounds.k1_max,
                step: THICKNESS_STEP,
            })
        }
        (OptMode::Grid, Some((i, _))) => (points[i].1, points[i].0),
        (OptMode::Continuous, best) => {
            let (lo, hi) = match best {
                Some((i, _)) => (
                    if i == 0 { bounds.k1_min } else { points[i - 1].1 },
                    points.get(i + 1).map_or(bounds.k1_max, |p| p.1),
                ),
                None => (bounds.k1_min, bounds.k1_max),
            };
            let samples: Vec<(f64, f64)> = (0..BRACKET_SAMPLES)
                .map(|j| {
                    let k1 = lo + (hi - lo) * j as f64 / (BRACKET_SAMPLES - 1) as f64;
                    (k1, objective.variance(k1))
                })
                .collect();
            let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
            let mut pick = samples
                .iter()
                .copied()
                .fold(None::<(f64, f64)>, |acc, s| match acc {
                    Some(a) if !better(s.1, a.1) => Some(a),
                    _ => Some(s),
                })
                .expect("bracket has samples");
            if is_unimodal(&values) {
                let tol = 1e-9 * hi.max(1e-12);
                let k = golden_section(|k| objective.variance(k), lo, hi, tol);
                let v = objective.variance(k);
                if !better(pick.1, v) {
                    pick = (k, v);
                }
            } else {
                non_unimodal = true;
            }
            if let Some((i, bv)) = best {
                if better(bv, pick.1) {
                    pick = (points[i].1, bv);
                }
            }
            (pick.0, model.aes.thickness_for_stiffness(pick.0))
        }
    };

    let power = objective.power(k1_opt);
    let rigid = objective.power(0.0);
    let variance = variance_objective(&power);
    let rigid_variance = variance_objective(&rigid);
    let eta_a = rigid_variance - variance;
    let eta_r = if rigid_variance > 0.0 {
        100.0 * eta_a / rigid_variance
    } else {
        0.0
    };
    Ok(StiffnessOptResult {
        frequency: run.frequency,
        pes_stiffness: run.pes_stiffness,
        mode: opts.mode,
        bounds,
        k1_opt,
        thickness,
        variance,
        mean_power: spectral::mean(&power),
        max_power: spectral::min_max(&power).1,
        peak_to_peak: peak_to_peak_objective(&power),
        rigid_variance,
        rigid_max_power: spectral::min_max(&rigid).1,
        eta_r,
        eta_a,
        peak_joint_torque: run.peak_joint_torque(),
        non_unimodal,
        variance_cap: opts.variance_cap,
        within_variance_cap: opts.variance_cap.map(|cap| variance <= cap),
    })
}

/// Simulates one (frequency, PES) cell and optimises the AES stiffness.
pub fn optimize_k1(model: &FishModel, sim: &SimSettings, opts: &OptOptions) -> Result<StiffnessOptResult> {
    let run = run_tail(model, sim)?;
    optimize_run(&run, model, opts)
}

/// A PES given either by stiffness or by spring-steel thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PesSetting {
    Stiffness(f64),
    Thickness(f64),
}

impl PesSetting {
    pub fn apply(&self, model: &FishModel) -> FishModel {
        match *self {
            PesSetting::Stiffness(k) => model.with_pes_stiffness(k),
            PesSetting::Thickness(d) => model.with_pes_thickness(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub frequency: f64,
    pub pes_stiffness: f64,
    pub pes_thickness: f64,
    pub result: std::result::Result<StiffnessOptResult, String>,
}

/// Optimises every (frequency, PES) cell, frequency-major. Cells fail
/// independently; `jobs = 0` uses all available cores.
pub fn sweep(
    model: &FishModel,
    sim: &SimSettings,
    frequencies: &[f64],
    pes: &[PesSetting],
    opts: &OptOptions,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if frequencies.is_empty() || pes.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must not be empty".into()));
    }
    let cells: Vec<(f64, FishModel)> = frequencies
        .iter()
        .flat_map(|&f| pes.iter().map(move |p| (f, p.apply(model))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|(f, m)| SweepRow {
                frequency: *f,
                pes_stiffness: m.pes_stiffness(),
                pes_thickness: m.pes.thickness,
                result: optimize_k1(m, &sim.with_frequency(*f), opts).map_err(|e| e.to_string()),
            })
            .collect()
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// AES stiffness re-optimised at every trial frequency.
    Aes,
    /// AES carrying no moment.
    Rigid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchBoundary {
    /// Even the lowest frequency exceeds the power cap.
    BelowRange,
    /// The cap is not reached anywhere in the search range.
    AboveRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxFreqResult {
    pub variant: Variant,
    pub pes_stiffness: f64,
    pub power_cap: f64,
    /// Largest frequency found with max motor power within the cap (Hz).
    pub f_max: f64,
    pub max_power: f64,
    /// AES stiffness used at `f_max` (zero for the rigid variant).
    pub aes_stiffness: f64,
    pub boundary: Option<SearchBoundary>,
    /// Every (frequency, max power) evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Peak motor power at one frequency and the AES stiffness that produced it.
pub fn peak_power_at(
    model: &FishModel,
    sim: &SimSettings,
    frequency: f64,
    variant: Variant,
    opts: &OptOptions,
) -> Result<(f64, f64)> {
    let run = run_tail(model, &sim.with_frequency(frequency))?;
    let k1 = match variant {
        Variant::Rigid => 0.0,
        Variant::Aes => optimize_run(&run, model, opts)?.k1_opt,
    };
    let power = power_series(&run, k1, &model.drive);
    Ok((spectral::min_max(&power).1, k1))
}

/// Bisects on frequency for the largest swing frequency whose steady-state
/// peak motor power stays within the motor's power cap.
pub fn max_frequency(
    model: &FishModel,
    sim: &SimSettings,
    variant: Variant,
    opts: &OptOptions,
) -> Result<MaxFreqResult> {
    let cap = model.drive.power_cap;
    let mut evaluations = Vec::new();
    let mut eval = |f: f64| -> Result<(f64, f64)> {
        let r = peak_power_at(model, sim, f, variant, opts)?;
        evaluations.push((f, r.0));
        Ok(r)
    };
    let result = |f_max, (p, k): (f64, f64), boundary, evaluations| MaxFreqResult {
        variant,
        pes_stiffness: model.pes_stiffness(),
        power_cap: cap,
        f_max,
        max_power: p,
        aes_stiffness: k,
        boundary,
        evaluations,
    };

    let at_lo = eval(FREQ_SEARCH_LO)?;
    if at_lo.0 > cap {
        return Ok(result(FREQ_SEARCH_LO, at_lo, Some(SearchBoundary::BelowRange), evaluations));
    }
    let at_hi = eval(FREQ_SEARCH_HI)?;
    if at_hi.0 <= cap {
        return Ok(result(FREQ_SEARCH_HI, at_hi, Some(SearchBoundary::AboveRange), evaluations));
    }
    let (mut lo, mut hi) = (FREQ_SEARCH_LO, FREQ_SEARCH_HI);
    let mut best = at_lo;
    while hi - lo > FREQ_SEARCH_TOL {
        let mid = 0.5 * (lo + hi);
        let r = eval(mid)?;
        if r.0 <= cap {
            lo = mid;
            best = r;
        } else {
            hi = mid;
        }
    }
    Ok(result(lo, best, None, evaluations))
}
