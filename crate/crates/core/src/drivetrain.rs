//! Force chain from the tail back to the motor: AES bending moment and
//! stored energy, wire tension, reel torque, motor torque and power.
//!
//! The motor turns at constant rate, so motor power is torque times that
//! rate. The AES stiffness enters only here; the tail motion it is applied
//! to is the same for every stiffness.

use serde::Serialize;

use crate::config::TransmissionSpec;
use crate::spectral;
use crate::tail_dynamics::{TailRun, TailSample};

/// Bending moment and elastic energy of the AES at central angle `bend`.
pub fn aes_moment_energy(stiffness: f64, bend: f64) -> (f64, f64) {
    (stiffness * bend, 0.5 * stiffness * bend * bend)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrivetrainSample {
    /// AES bending moment (N*m).
    pub aes_moment: f64,
    /// Elastic energy stored in the AES (J).
    pub aes_energy: f64,
    /// Torque the wire pair must exert about the AES bend (N*m).
    pub wire_torque: f64,
    /// Wire tension; positive on the right wire, negative on the left (N).
    pub wire_force: f64,
    /// Wire torque about the reel axis (N*m).
    pub reel_torque: f64,
    pub motor_torque: f64,
    pub motor_power: f64,
}

/// Inputs to the drive chain at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveLoad {
    /// Equivalent joint torque on the AES chord.
    pub joint_torque: f64,
    pub aes_moment: f64,
    pub motor_angle: f64,
    pub motor_rate: f64,
    pub reel_angle: f64,
    pub reel_accel: f64,
}

/// Motor torque and power needed to hold the prescribed motion.
///
/// The chord turns at half the bend rate, so the joint torque maps onto the
/// bend coordinate with a factor of one half; the wire torque is then the
/// moment conjugate to the bend. The lumped reel inertia is accelerated by
/// the motor along with the wire load.
pub fn motor_torque(load: &DriveLoad, drive: &TransmissionSpec) -> DrivetrainSample {
    let wire_torque = 0.5 * load.joint_torque + load.aes_moment;
    let wire_force = wire_torque / drive.wire_offset;
    let reel_torque = wire_force * drive.reel_radius;
    let lever = drive.eccenter_offset * load.motor_angle.cos()
        / (drive.slide_distance * load.reel_angle.cos());
    let motor_torque = (reel_torque + drive.lumped_inertia() * load.reel_accel) * lever;
    DrivetrainSample {
        aes_moment: load.aes_moment,
        aes_energy: 0.0,
        wire_torque,
        wire_force,
        reel_torque,
        motor_torque,
        motor_power: motor_torque * load.motor_rate,
    }
}

/// Drive-chain sample for one tail sample and AES stiffness.
pub fn evaluate(
    sample: &TailSample,
    aes_stiffness: f64,
    frequency: f64,
    drive: &TransmissionSpec,
) -> DrivetrainSample {
    let (moment, energy) = aes_moment_energy(aes_stiffness, sample.bend);
    let load = DriveLoad {
        joint_torque: sample.joint_torque,
        aes_moment: moment,
        motor_angle: sample.motor_angle,
        motor_rate: std::f64::consts::TAU * frequency,
        reel_angle: sample.reel_angle,
        reel_accel: sample.reel_accel,
    };
    DrivetrainSample {
        aes_energy: energy,
        ..motor_torque(&load, drive)
    }
}

/// Motor torque under static load (no joint torque, no reel acceleration)
/// per unit AES stiffness, maximised over one motor revolution.
pub fn statics_torque_per_stiffness(drive: &TransmissionSpec, grid_points: usize) -> f64 {
    let a = drive.crank_ratio();
    let gain = drive.bend_gain();
    let n = grid_points.max(8);
    (0..n)
        .map(|k| {
            let motor = std::f64::consts::TAU * k as f64 / n as f64;
            let reel = (a * motor.sin()).asin();
            let bend = gain * reel;
            (bend * drive.reel_radius * drive.eccenter_offset * motor.cos()
                / (drive.wire_offset * drive.slide_distance * reel.cos()))
            .abs()
        })
        .fold(0.0, f64::max)
}

/// Largest static motor torque over a revolution for AES stiffness
/// `aes_stiffness`.
pub fn statics_motor_torque(aes_stiffness: f64, drive: &TransmissionSpec, grid_points: usize) -> f64 {
    aes_stiffness * statics_torque_per_stiffness(drive, grid_points)
}

/// Tail run with drivetrain channels for one AES stiffness.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub tail: TailRun,
    pub aes_stiffness: f64,
    pub drivetrain: Vec<DrivetrainSample>,
    pub closing: DrivetrainSample,
}

impl SimTrace {
    pub fn new(tail: TailRun, aes_stiffness: f64, drive: &TransmissionSpec) -> Self {
        let f = tail.frequency;
        let drivetrain = tail
            .samples
            .iter()
            .map(|s| evaluate(s, aes_stiffness, f, drive))
            .collect();
        let closing = evaluate(&tail.closing, aes_stiffness, f, drive);
        SimTrace {
            tail,
            aes_stiffness,
            drivetrain,
            closing,
        }
    }

    pub fn power(&self) -> Vec<f64> {
        self.drivetrain.iter().map(|d| d.motor_power).collect()
    }

    pub fn mean_power(&self) -> f64 {
        spectral::mean(&self.power())
    }

    pub fn mean_torque(&self) -> f64 {
        spectral::mean(&self.drivetrain.iter().map(|d| d.motor_torque).collect::<Vec<_>>())
    }

    pub fn max_power(&self) -> f64 {
        self.power().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn power_variance(&self) -> f64 {
        spectral::variance(&self.power())
    }
}

/// Motor power over a tail run for one AES stiffness, without keeping the
/// other drivetrain channels.
pub fn power_series(tail: &TailRun, aes_stiffness: f64, drive: &TransmissionSpec) -> Vec<f64> {
    tail.samples
        .iter()
        .map(|s| evaluate(s, aes_stiffness, tail.frequency, drive).motor_power)
        .collect()
}
