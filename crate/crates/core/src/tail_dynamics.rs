//! Lagrangian dynamics of the two-link tail with the chord angle prescribed
//! by the drive.
//!
//! The chord angle `q1 = bend / 2` follows the motor exactly, so the first
//! row of the equations of motion is solved for the joint torque that the
//! wires must supply, and the second row is integrated forward for the fin
//! angle `q2`. Added mass is folded into the mass matrix; drag enters as a
//! generalized force.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::config::{FishModel, SimSettings, TailBodyParams};
use crate::error::{Error, Result};
use crate::hydrodynamics::{self, LinkForce};
use crate::spectral;
use crate::transmission::{drive_state_at_phase, Chord, DriveState, TailMotion};

/// Terms of `M(q) qdd + bias(q, qd) + spring(q) = Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomTerms {
    pub mass: Matrix2<f64>,
    pub bias: Vector2<f64>,
    pub spring: Vector2<f64>,
}

/// Mass matrix (rigid body plus added mass), velocity-dependent bias and
/// PES spring force at one configuration.
pub fn eom_terms(
    q: Vector2<f64>,
    qd: Vector2<f64>,
    chord: Chord,
    pes_stiffness: f64,
    body: &TailBodyParams,
) -> Result<EomTerms> {
    let motion = TailMotion::new(q, qd, Vector2::zeros(), chord, body);
    let [l1, l2] = &body.links;
    let (m1, m2) = (l1.total_mass(), l2.total_mass());
    let [j1, j2] = &motion.jac;

    let mut mass = m1 * j1.transpose() * j1 + m2 * j2.transpose() * j2;
    mass[(0, 0)] += l1.inertia + l2.inertia;
    mass[(0, 1)] += l2.inertia;
    mass[(1, 0)] += l2.inertia;
    mass[(1, 1)] += l2.inertia;

    if !(mass[(0, 0)] > 0.0 && mass.determinant() > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mass matrix is not positive definite at q = ({:.4}, {:.4}); check link masses and inertias",
            q[0], q[1]
        )));
    }

    let bias = m1 * j1.transpose() * motion.acc[0] + m2 * j2.transpose() * motion.acc[1];
    let pes_bend = q[1] - q[0];
    let spring = pes_stiffness * pes_bend * Vector2::new(-1.0, 1.0);
    Ok(EomTerms { mass, bias, spring })
}

/// Drag projected onto the generalized coordinates.
pub fn generalized_drag(forces: &[LinkForce; 2], motion: &TailMotion) -> Vector2<f64> {
    motion.jac[0].transpose() * forces[0].drag + motion.jac[1].transpose() * forces[1].drag
}

/// Kinetic energy including the entrained fluid.
pub fn kinetic_energy(motion: &TailMotion, body: &TailBodyParams) -> f64 {
    let [l1, l2] = &body.links;
    0.5 * (l1.total_mass() * motion.vel[0].norm_squared()
        + l2.total_mass() * motion.vel[1].norm_squared()
        + l1.inertia * motion.rate[0].powi(2)
        + l2.inertia * motion.rate[1].powi(2))
}

/// Integrator state: fin angle and rate at an integer step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailState {
    /// Steps taken since t = 0.
    pub step: u64,
    pub time: f64,
    pub fin_angle: f64,
    pub fin_rate: f64,
    pub fin_accel: f64,
    pub link1_angle: f64,
    pub link1_rate: f64,
    pub link1_accel: f64,
    pub joint_torque: f64,
}

impl TailState {
    pub fn pes_energy(&self, pes_stiffness: f64) -> f64 {
        0.5 * pes_stiffness * (self.fin_angle - self.link1_angle).powi(2)
    }
}

/// One recorded instant of a tail simulation. Nothing here depends on the
/// AES stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSample {
    pub time: f64,
    pub motor_angle: f64,
    pub reel_angle: f64,
    pub reel_rate: f64,
    pub reel_accel: f64,
    pub bend: f64,
    pub bend_rate: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_s: f64,
    pub fin_angle: f64,
    pub fin_rate: f64,
    pub fin_accel: f64,
    pub joint_torque: f64,
    pub thrust: f64,
    pub fin_axial_force: f64,
    /// Hydrodynamic moment about the link-1 origin.
    pub hydro_torque1: f64,
    /// Hydrodynamic moment about the fin joint.
    pub hydro_torque2: f64,
    pub drag_power: f64,
    pub kinetic_energy: f64,
    pub pes_energy: f64,
}

/// Steady-state window of a tail simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRun {
    pub frequency: f64,
    pub pes_stiffness: f64,
    pub steps_per_cycle: usize,
    /// Cycles integrated before the window began.
    pub settle_cycles: usize,
    /// Last relative cycle-to-cycle change of the RMS fin angle.
    pub steady_change: f64,
    pub samples: Vec<TailSample>,
    /// State one step past the last sample, closing the window.
    pub closing: TailSample,
}

impl TailRun {
    pub fn dt(&self) -> f64 {
        1.0 / (self.frequency * self.steps_per_cycle as f64)
    }

    pub fn cycles(&self) -> usize {
        self.samples.len() / self.steps_per_cycle
    }

    pub fn channel(&self, f: impl Fn(&TailSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn peak_joint_torque(&self) -> f64 {
        spectral::max_abs(&self.channel(|s| s.joint_torque))
    }

    /// Largest magnitude of the axial fin force over the window.
    pub fn peak_fin_axial_force(&self) -> f64 {
        spectral::max_abs(&self.channel(|s| s.fin_axial_force))
    }

    pub fn mean_thrust(&self) -> f64 {
        spectral::mean(&self.channel(|s| s.thrust))
    }
}

/// The tail driven at one frequency with one PES stiffness.
#[derive(Debug, Clone, Copy)]
pub struct TailSystem {
    pub model: FishModel,
    pub pes_stiffness: f64,
    pub frequency: f64,
    pub steps_per_cycle: usize,
}

impl TailSystem {
    pub fn new(model: &FishModel, sim: &SimSettings) -> Self {
        TailSystem {
            model: *model,
            pes_stiffness: model.pes_stiffness(),
            frequency: sim.frequency,
            steps_per_cycle: sim.steps_per_cycle,
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.frequency * self.steps_per_cycle as f64)
    }

    fn drive_at(&self, step: u64, frac: f64) -> DriveState {
        let n = self.steps_per_cycle as u64;
        let phase = (step / n) as f64 + ((step % n) as f64 + frac) / n as f64;
        drive_state_at_phase(phase, self.frequency, &self.model.drive, &self.model.aes)
    }

    /// Fin acceleration and the pieces needed to finish the dynamics.
    fn solve(
        &self,
        ds: &DriveState,
        fin_angle: f64,
        fin_rate: f64,
    ) -> Result<(Vector2<f64>, Vector2<f64>, f64, EomTerms)> {
        let body = &self.model.body;
        let (a1, r1, acc1) = ds.link1();
        let q = Vector2::new(a1, fin_angle);
        let qd = Vector2::new(r1, fin_rate);
        let terms = eom_terms(q, qd, ds.chord, self.pes_stiffness, body)?;
        let motion = TailMotion::new(q, qd, Vector2::zeros(), ds.chord, body);
        let drag = [
            hydrodynamics::drag_force(0, &motion, body),
            hydrodynamics::drag_force(1, &motion, body),
        ];
        let gen_drag = motion.jac[0].transpose() * drag[0] + motion.jac[1].transpose() * drag[1];
        let m = &terms.mass;
        let fin_accel = (gen_drag[1] - terms.bias[1] - terms.spring[1] - m[(1, 0)] * acc1) / m[(1, 1)];
        Ok((q, qd, fin_accel, terms))
    }

    /// Full state at an instant, including the back-solved joint torque.
    pub fn state(&self, step: u64, fin_angle: f64, fin_rate: f64) -> Result<TailState> {
        let ds = self.drive_at(step, 0.0);
        self.state_at(step, &ds, fin_angle, fin_rate)
    }

    fn state_at(&self, step: u64, ds: &DriveState, fin_angle: f64, fin_rate: f64) -> Result<TailState> {
        let (q, qd, fin_accel, terms) = self.solve(ds, fin_angle, fin_rate)?;
        let (_, _, acc1) = ds.link1();
        let qdd = Vector2::new(acc1, fin_accel);
        let motion = TailMotion::new(q, qd, qdd, ds.chord, &self.model.body);
        let forces = hydrodynamics::link_forces(&motion, &self.model.body);
        let gen_drag = generalized_drag(&forces, &motion);
        let lhs = terms.mass * qdd + terms.bias + terms.spring;
        Ok(TailState {
            step,
            time: ds.time,
            fin_angle,
            fin_rate,
            fin_accel,
            link1_angle: q[0],
            link1_rate: qd[0],
            link1_accel: acc1,
            joint_torque: lhs[0] - gen_drag[0],
        })
    }

    fn fin_accel(&self, step: u64, frac: f64, fin_angle: f64, fin_rate: f64) -> Result<f64> {
        let ds = self.drive_at(step, frac);
        Ok(self.solve(&ds, fin_angle, fin_rate)?.2)
    }

    /// One classical fourth-order Runge-Kutta step of the fin coordinate.
    pub fn step(&self, state: &TailState) -> Result<TailState> {
        let h = self.dt();
        let (x, v) = (state.fin_angle, state.fin_rate);
        let n = state.step;
        let k1x = v;
        let k1v = self.fin_accel(n, 0.0, x, v)?;
        let k2x = v + 0.5 * h * k1v;
        let k2v = self.fin_accel(n, 0.5, x + 0.5 * h * k1x, k2x)?;
        let k3x = v + 0.5 * h * k2v;
        let k3v = self.fin_accel(n, 0.5, x + 0.5 * h * k2x, k3x)?;
        let k4x = v + h * k3v;
        let k4v = self.fin_accel(n, 1.0, x + h * k3x, k4x)?;
        let x1 = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        let v1 = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(x1.is_finite() && v1.is_finite()) {
            return Err(Error::Integration { step: n as usize + 1 });
        }
        self.state(n + 1, x1, v1)
    }

    /// Everything recorded about the tail at an instant.
    pub fn sample(&self, state: &TailState) -> Result<TailSample> {
        let body = &self.model.body;
        let ds = self.drive_at(state.step, 0.0);
        let q = Vector2::new(state.link1_angle, state.fin_angle);
        let qd = Vector2::new(state.link1_rate, state.fin_rate);
        let qdd = Vector2::new(state.link1_accel, state.fin_accel);
        let motion = TailMotion::new(q, qd, qdd, ds.chord, body);
        let forces = hydrodynamics::link_forces(&motion, body);
        let (tau1, tau2) = hydrodynamics::generalized_hydro_torques(&forces, &motion);
        let angles = crate::transmission::joint_angles(&ds, state.fin_angle);
        Ok(TailSample {
            time: ds.time,
            motor_angle: ds.motor_angle,
            reel_angle: ds.reel_angle,
            reel_rate: ds.reel_rate,
            reel_accel: ds.reel_accel,
            bend: ds.bend,
            bend_rate: ds.bend_rate,
            theta1: angles.link1,
            theta2: angles.link2,
            theta_s: angles.pes,
            fin_angle: state.fin_angle,
            fin_rate: state.fin_rate,
            fin_accel: state.fin_accel,
            joint_torque: state.joint_torque,
            thrust: hydrodynamics::thrust(&forces),
            fin_axial_force: hydrodynamics::axial_fin_force(&forces, &motion),
            hydro_torque1: tau1,
            hydro_torque2: tau2,
            drag_power: hydrodynamics::drag_power(&forces, &motion),
            kinetic_energy: kinetic_energy(&motion, body),
            pes_energy: state.pes_energy(self.pes_stiffness),
        })
    }

    /// Integrates from rest until the fin motion settles, then records
    /// `measure_cycles` full cycles.
    pub fn run(&self, sim: &SimSettings) -> Result<TailRun> {
        let n = self.steps_per_cycle;
        let mut state = self.state(0, 0.0, 0.0)?;
        let mut prev_rms: Option<f64> = None;
        let mut change = f64::INFINITY;
        let mut settled = None;
        for cycle in 1..=sim.max_cycles {
            let mut sum_sq = 0.0;
            for _ in 0..n {
                sum_sq += state.fin_angle * state.fin_angle;
                state = self.step(&state)?;
            }
            let rms = (sum_sq / n as f64).sqrt();
            if let Some(prev) = prev_rms {
                change = (rms - prev).abs() / prev.max(f64::MIN_POSITIVE);
                if rms == prev {
                    change = 0.0;
                }
            }
            prev_rms = Some(rms);
            if cycle >= sim.warmup_cycles && change < sim.steady_tol {
                settled = Some(cycle);
                break;
            }
        }

        let cycles = if settled.is_some() { sim.measure_cycles } else { 1 };
        let mut samples = Vec::with_capacity(n * cycles);
        for _ in 0..n * cycles {
            samples.push(self.sample(&state)?);
            state = self.step(&state)?;
        }
        let run = TailRun {
            frequency: self.frequency,
            pes_stiffness: self.pes_stiffness,
            steps_per_cycle: n,
            settle_cycles: settled.unwrap_or(sim.max_cycles),
            steady_change: change,
            closing: self.sample(&state)?,
            samples,
        };
        match settled {
            Some(_) => Ok(run),
            None => Err(Error::Divergence {
                cycles: sim.max_cycles,
                last_change: change,
                trace: Box::new(run),
            }),
        }
    }
}

/// Steady-state tail motion for a model at the settings' frequency.
pub fn run_tail(model: &FishModel, sim: &SimSettings) -> Result<TailRun> {
    sim.validate()?;
    TailSystem::new(model, sim).run(sim)
}

/// Steady-state tail motion plus drivetrain channels for AES stiffness
/// `aes_stiffness` (zero gives the rigid-spine baseline).
pub fn simulate(
    model: &FishModel,
    sim: &SimSettings,
    aes_stiffness: f64,
) -> Result<crate::drivetrain::SimTrace> {
    let run = run_tail(model, sim)?;
    Ok(crate::drivetrain::SimTrace::new(run, aes_stiffness, &model.drive))
}

/// Phase lag (rad, in [0, 2*pi)) of the fin orientation's fundamental behind
/// the chord orientation's fundamental.
pub fn phase_difference(run: &TailRun) -> Result<f64> {
    let cycles = run.cycles();
    if cycles < 2 {
        return Err(Error::InvalidConfig(
            "phase difference needs at least two full cycles".into(),
        ));
    }
    let theta1 = run.channel(|s| s.theta1);
    let theta2 = run.channel(|s| s.theta2);
    phase_lag(&theta1, &theta2, cycles)
}

/// Phase lag of `lagging`'s component at `cycles` periods per window behind
/// that of `leading`.
pub fn phase_lag(leading: &[f64], lagging: &[f64], cycles: usize) -> Result<f64> {
    let c1 = spectral::fourier_coefficient(leading, cycles);
    let c2 = spectral::fourier_coefficient(lagging, cycles);
    let scale = |x: &[f64]| spectral::max_abs(x).max(f64::MIN_POSITIVE);
    if c1.norm() <= 1e-12 * scale(leading) {
        return Err(Error::UndefinedPhase("theta1"));
    }
    if c2.norm() <= 1e-12 * scale(lagging) {
        return Err(Error::UndefinedPhase("theta2"));
    }
    let lag = (c1 * c2.conj()).arg().rem_euclid(TAU);
    Ok(if TAU - lag < 1e-12 { 0.0 } else { lag })
}
