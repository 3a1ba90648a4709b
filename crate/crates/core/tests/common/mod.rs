#![allow(dead_code)]

pub mod lagrange;

use wirefish_core::config::{Config, FishModel, SimSettings};
use wirefish_core::drivetrain::SimTrace;
use wirefish_core::spectral::trapezoid;
use wirefish_core::tail_dynamics::{TailState, TailSystem};

pub fn model_and_sim(frequency: f64, pes_stiffness: f64) -> (FishModel, SimSettings) {
    let cfg = Config::shipped();
    (
        cfg.model.with_pes_stiffness(pes_stiffness),
        cfg.sim.with_frequency(frequency),
    )
}

/// Terms of the energy budget over a trace window, all in joules.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBudget {
    pub motor_work: f64,
    /// Work done by the fluid drag (negative when dissipating).
    pub drag_work: f64,
    pub kinetic: f64,
    pub pes: f64,
    pub aes: f64,
    pub reel: f64,
}

impl EnergyBudget {
    /// Budget over cycle `c` of the trace window.
    pub fn cycle(trace: &SimTrace, model: &FishModel, c: usize) -> Self {
        let run = &trace.tail;
        let n = run.steps_per_cycle;
        let dt = run.dt();
        let range = c * n..(c + 1) * n;
        let tail = &run.samples[range.clone()];
        let drive = &trace.drivetrain[range];
        let (end, end_drive) = match run.samples.get((c + 1) * n) {
            Some(s) => (s, &trace.drivetrain[(c + 1) * n]),
            None => (&run.closing, &trace.closing),
        };
        let first = &tail[0];
        let power: Vec<f64> = drive.iter().map(|d| d.motor_power).collect();
        let drag: Vec<f64> = tail.iter().map(|s| s.drag_power).collect();
        let j = model.drive.lumped_inertia();
        EnergyBudget {
            motor_work: trapezoid(&power, end_drive.motor_power, dt),
            drag_work: trapezoid(&drag, end.drag_power, dt),
            kinetic: end.kinetic_energy - first.kinetic_energy,
            pes: end.pes_energy - first.pes_energy,
            aes: end_drive.aes_energy - drive[0].aes_energy,
            reel: 0.5 * j * (end.reel_rate.powi(2) - first.reel_rate.powi(2)),
        }
    }

    /// Imbalance relative to the motor work.
    pub fn relative_residual(&self) -> f64 {
        let lhs = self.motor_work + self.drag_work;
        let rhs = self.kinetic + self.pes + self.aes + self.reel;
        (lhs - rhs).abs() / self.motor_work.abs()
    }
}

/// Fin state (angle, rate) after `cycles` cycles from rest.
pub fn fin_state_after(system: &TailSystem, cycles: u64) -> (f64, f64) {
    let n = system.steps_per_cycle as u64;
    let mut s: TailState = system.state(0, 0.0, 0.0).unwrap();
    for _ in 0..cycles * n {
        s = system.step(&s).unwrap();
    }
    (s.fin_angle, s.fin_rate)
}

/// Fin angle after `cycles` cycles from rest with `steps_per_cycle` steps.
pub fn fin_angle_after(system: &TailSystem, cycles: u64) -> f64 {
    fin_state_after(system, cycles).0
}

/// The same model with quadratic drag and skin friction switched off. The
/// |v|v drag law has a kink at zero relative velocity, which caps the
/// observable order of any fixed-step scheme once the step gets small; the
/// drag-free system is smooth, so it shows the integrator's own order.
pub fn without_drag(model: &FishModel) -> FishModel {
    let mut m = model.clone();
    for link in &mut m.body.links {
        link.drag_coeff = 0.0;
        link.friction_coeff = 0.0;
    }
    m
}

/// Ratio of successive end-state differences when the step count doubles;
/// a fourth-order method gives about 16. The rate is scaled by the drive
/// angular frequency so both components are in radians.
pub fn self_convergence_ratio(model: &FishModel, sim: &SimSettings, coarse: usize, cycles: u64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * sim.frequency;
    let at = |n: usize| {
        let mut sys = TailSystem::new(model, sim);
        sys.steps_per_cycle = n;
        fin_state_after(&sys, cycles)
    };
    let dist = |x: (f64, f64), y: (f64, f64)| (x.0 - y.0).hypot((x.1 - y.1) / omega);
    let (a, b, c) = (at(coarse), at(2 * coarse), at(4 * coarse));
    dist(a, b) / dist(b, c)
}

/// True when `xs` never decreases by more than `slack` (relative).
pub fn non_decreasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0] - slack * w[0].abs())
}

pub fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}
