//! Kinematics of the drive chain: motor -> eccenter -> slide way -> reel ->
//! wire -> AES bend, and the planar motion of the two tail links that
//! follows from it.
//!
//! Link 1 is the chord of the bent AES, rotated by half the central angle.
//! Its length shrinks as the AES bends, so the position of everything
//! downstream of it depends on the bend through [`chord`].

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix3x2, Vector2};

use crate::config::{SpringSpec, TailBodyParams, TransmissionSpec};

/// Chord length of a circular arc and its first two derivatives with respect
/// to the central angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    /// Arc length (the straight AES length).
    pub arc: f64,
    pub length: f64,
    /// d(length)/d(bend)
    pub slope: f64,
    /// d2(length)/d(bend)2
    pub curvature: f64,
}

impl Chord {
    /// Chord length relative to the unbent length.
    pub fn ratio(&self) -> f64 {
        self.length / self.arc
    }
}

// Below this central angle the closed forms lose digits to cancellation
// (the second derivative most of all), so the Taylor series is used.
const SERIES_BEND: f64 = 0.05;

/// Chord of an arc of length `arc` bent through central angle `bend`.
pub fn chord(bend: f64, arc: f64) -> Chord {
    let x = 0.5 * bend;
    let (sinc, d_sinc, dd_sinc) = if bend.abs() < SERIES_BEND {
        let x2 = x * x;
        // sin(x)/x = 1 - x^2/6 + x^4/120 - x^6/5040 + x^8/362880
        let s = 1.0 + x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 + x2 / 362880.0)));
        let ds = x * (-1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 / 45360.0)));
        let dds = -1.0 / 3.0 + x2 * (1.0 / 10.0 + x2 * (-1.0 / 168.0 + x2 / 6480.0));
        (s, ds, dds)
    } else {
        let (s, c) = x.sin_cos();
        let sinc = s / x;
        let d = (x * c - s) / (x * x);
        let dd = (-x * x * s - 2.0 * x * c + 2.0 * s) / (x * x * x);
        (sinc, d, dd)
    };
    Chord {
        arc,
        length: arc * sinc,
        slope: 0.5 * arc * d_sinc,
        curvature: 0.25 * arc * dd_sinc,
    }
}

/// Angles of the drive chain and their analytic time derivatives at one
/// instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    pub time: f64,
    pub motor_angle: f64,
    pub motor_rate: f64,
    pub reel_angle: f64,
    pub reel_rate: f64,
    pub reel_accel: f64,
    /// AES central angle.
    pub bend: f64,
    pub bend_rate: f64,
    pub bend_accel: f64,
    pub chord: Chord,
    pub chord_rate: f64,
    pub chord_accel: f64,
}

impl DriveState {
    /// Drive state for a motor turning at constant rate `omega`, evaluated at
    /// motor angle `motor_angle`.
    pub fn at_angle(
        time: f64,
        motor_angle: f64,
        omega: f64,
        drive: &TransmissionSpec,
        aes: &SpringSpec,
    ) -> Self {
        let a = drive.crank_ratio();
        let gain = drive.bend_gain();
        let (s, c) = motor_angle.sin_cos();
        let u = a * s;
        let cos_reel = (1.0 - u * u).sqrt();
        let reel_angle = u.asin();
        let reel_rate = a * omega * c / cos_reel;
        let reel_accel = -a * (1.0 - a * a) * omega * omega * s / cos_reel.powi(3);

        let bend = gain * reel_angle;
        let bend_rate = gain * reel_rate;
        let bend_accel = gain * reel_accel;
        let chord = chord(bend, aes.length);
        DriveState {
            time,
            motor_angle,
            motor_rate: omega,
            reel_angle,
            reel_rate,
            reel_accel,
            bend,
            bend_rate,
            bend_accel,
            chord,
            chord_rate: chord.slope * bend_rate,
            chord_accel: chord.curvature * bend_rate * bend_rate + chord.slope * bend_accel,
        }
    }

    /// Link-1 angle and its derivatives; the chord turns at half the bend.
    pub fn link1(&self) -> (f64, f64, f64) {
        (0.5 * self.bend, 0.5 * self.bend_rate, 0.5 * self.bend_accel)
    }
}

/// Drive state at time `t` for a motor angular velocity `omega`.
pub fn drive_state(t: f64, omega: f64, drive: &TransmissionSpec, aes: &SpringSpec) -> DriveState {
    DriveState::at_angle(t, omega * t, omega, drive, aes)
}

/// Drive state at a fraction of a motor revolution, `phase` in cycles.
/// Integer phases give bit-identical states.
pub fn drive_state_at_phase(
    phase: f64,
    frequency: f64,
    drive: &TransmissionSpec,
    aes: &SpringSpec,
) -> DriveState {
    let omega = TAU * frequency;
    let turn = phase.fract();
    DriveState::at_angle(phase / frequency, TAU * turn, omega, drive, aes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAngles {
    /// Orientation of the AES chord.
    pub link1: f64,
    /// Orientation of the caudal fin.
    pub link2: f64,
    /// PES bend relative to the AES tip tangent.
    pub pes: f64,
}

pub fn joint_angles(ds: &DriveState, fin_joint: f64) -> JointAngles {
    joint_angles_from_bend(ds.bend, fin_joint)
}

pub fn joint_angles_from_bend(bend: f64, fin_joint: f64) -> JointAngles {
    let link1 = 0.5 * bend;
    JointAngles {
        link1,
        link2: link1 + fin_joint,
        pes: fin_joint - 0.5 * bend,
    }
}

/// Center-of-mass Jacobians in the world frame. Rows are x, y, z; columns
/// the two generalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobians {
    pub v1: Matrix3x2<f64>,
    pub v2: Matrix3x2<f64>,
    pub w1: Matrix3x2<f64>,
    pub w2: Matrix3x2<f64>,
}

/// Link Jacobians at the current chord length, holding the chord length
/// fixed.
pub fn jacobians(q: Vector2<f64>, ds: &DriveState, body: &TailBodyParams) -> Jacobians {
    let l1 = ds.chord.length;
    let lc1 = body.links[0].com_offset;
    let lc2 = body.links[1].com_offset;
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    #[rustfmt::skip]
    let v1 = Matrix3x2::new(
        -lc1 * s1, 0.0,
         lc1 * c1, 0.0,
         0.0,      0.0,
    );
    #[rustfmt::skip]
    let v2 = Matrix3x2::new(
        -l1 * s1 - lc2 * s12, -lc2 * s12,
         l1 * c1 + lc2 * c12,  lc2 * c12,
         0.0,                  0.0,
    );
    #[rustfmt::skip]
    let w1 = Matrix3x2::new(
        0.0, 0.0,
        0.0, 0.0,
        1.0, 0.0,
    );
    #[rustfmt::skip]
    let w2 = Matrix3x2::new(
        0.0, 0.0,
        0.0, 0.0,
        1.0, 1.0,
    );
    Jacobians { v1, v2, w1, w2 }
}

pub(crate) fn unit(angle: f64) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(c, s)
}

pub(crate) fn normal(angle: f64) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(-s, c)
}

/// Planar positions, velocities and accelerations of both links.
///
/// The chord length is treated as a function of the link-1 angle
/// (`l1 = L(2 q1)`), so the link-2 Jacobian carries an extra `2 L' e1`
/// term in its first column. These Jacobians are the ones conjugate to the
/// generalized coordinates; forces projected through them give work-
/// consistent generalized forces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMotion {
    pub q: Vector2<f64>,
    pub qd: Vector2<f64>,
    pub qdd: Vector2<f64>,
    pub chord: Chord,
    /// Link orientations in the world frame.
    pub angle: [f64; 2],
    pub rate: [f64; 2],
    pub accel: [f64; 2],
    /// Origin of the fin link (end of the chord).
    pub joint2: Vector2<f64>,
    pub com: [Vector2<f64>; 2],
    pub vel: [Vector2<f64>; 2],
    pub acc: [Vector2<f64>; 2],
    /// Planar center-of-mass Jacobians including the chord-length term.
    pub jac: [Matrix2<f64>; 2],
}

impl TailMotion {
    pub fn new(
        q: Vector2<f64>,
        qd: Vector2<f64>,
        qdd: Vector2<f64>,
        chord: Chord,
        body: &TailBodyParams,
    ) -> Self {
        let lc1 = body.links[0].com_offset;
        let lc2 = body.links[1].com_offset;
        let l1 = chord.length;
        let l1_rate = 2.0 * chord.slope * qd[0];
        let l1_accel = 4.0 * chord.curvature * qd[0] * qd[0] + 2.0 * chord.slope * qdd[0];

        let th1 = q[0];
        let th2 = q[0] + q[1];
        let w1 = qd[0];
        let w2 = qd[0] + qd[1];
        let a1 = qdd[0];
        let a2 = qdd[0] + qdd[1];
        let (e1, n1) = (unit(th1), normal(th1));
        let (e2, n2) = (unit(th2), normal(th2));

        let joint2 = l1 * e1;
        let com1 = lc1 * e1;
        let com2 = joint2 + lc2 * e2;

        let vel1 = lc1 * w1 * n1;
        let vel2 = l1_rate * e1 + l1 * w1 * n1 + lc2 * w2 * n2;

        let acc1 = lc1 * a1 * n1 - lc1 * w1 * w1 * e1;
        let acc2 = (l1_accel - l1 * w1 * w1) * e1
            + (2.0 * l1_rate * w1 + l1 * a1) * n1
            + lc2 * a2 * n2
            - lc2 * w2 * w2 * e2;

        let jac1 = Matrix2::from_columns(&[lc1 * n1, Vector2::zeros()]);
        let jac2 = Matrix2::from_columns(&[
            2.0 * chord.slope * e1 + l1 * n1 + lc2 * n2,
            lc2 * n2,
        ]);

        TailMotion {
            q,
            qd,
            qdd,
            chord,
            angle: [th1, th2],
            rate: [w1, w2],
            accel: [a1, a2],
            joint2,
            com: [com1, com2],
            vel: [vel1, vel2],
            acc: [acc1, acc2],
            jac: [jac1, jac2],
        }
    }
}
