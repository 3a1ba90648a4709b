//! Simulation and stiffness optimization for a wire-driven robotic fishtail
//! with an actively bent elastic spine (AES) and a passive elastic joint
//! (PES) in front of the caudal fin.
//!
//! The crate is organised along the physical chain:
//!
//! * [`config`]: parameters, the config-file format and the spring law;
//! * [`transmission`]: motor to AES bend kinematics and link motion;
//! * [`hydrodynamics`]: Morison forces on the links;
//! * [`tail_dynamics`]: equations of motion and time integration;
//! * [`drivetrain`]: wire, reel and motor torque and power;
//! * [`optimizer`]: AES stiffness bounds, variance minimization, sweeps
//!   and the maximum-frequency search;
//! * [`output`]: CSV and JSON writers used by the command-line tool.

pub mod cli;
pub mod config;
pub mod drivetrain;
pub mod error;
pub mod hydrodynamics;
pub mod optimizer;
pub mod output;
pub mod spectral;
pub mod tail_dynamics;
pub mod transmission;

pub use config::{
    rotational_stiffness, Config, FishModel, LinkParams, Provenance, SimSettings, SpringSpec,
    TailBodyParams, TransmissionSpec,
};
pub use drivetrain::{aes_moment_energy, motor_torque, statics_motor_torque, DrivetrainSample, SimTrace};
pub use error::{Error, Result};
pub use optimizer::{
    max_frequency, optimize_k1, peak_to_peak_objective, stiffness_bounds, sweep, variance_objective,
    MaxFreqResult, OptMode, StiffnessBounds, StiffnessOptResult, SweepRow, Variant,
};
pub use tail_dynamics::{eom_terms, phase_difference, run_tail, simulate, TailRun, TailSample, TailState};
pub use transmission::{drive_state, jacobians, joint_angles, DriveState, JointAngles};
