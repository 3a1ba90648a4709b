//! Two-link tail kinematics and Lagrange's equations from finite
//! differences of the position map alone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wirefish_core::config::{Config, TailBodyParams};

pub struct Oracle {
    pub body: TailBodyParams,
    pub arc: f64,
    pub k2: f64,
}

impl Oracle {
    pub fn new() -> Self {
        let cfg = Config::shipped();
        Oracle {
            body: cfg.model.body,
            arc: cfg.model.aes.length,
            k2: cfg.model.pes_stiffness(),
        }
    }

    /// Chord of the AES when the chord angle is `q1` (half the bend).
    pub fn chord_length(&self, q1: f64) -> f64 {
        if q1 == 0.0 {
            self.arc
        } else {
            self.arc * q1.sin() / q1
        }
    }

    pub fn positions(&self, q: [f64; 2]) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let lc1 = self.body.links[0].com_offset;
        let lc2 = self.body.links[1].com_offset;
        let l1 = self.chord_length(q[0]);
        let th2 = q[0] + q[1];
        let joint = [l1 * q[0].cos(), l1 * q[0].sin()];
        let p1 = [lc1 * q[0].cos(), lc1 * q[0].sin()];
        let p2 = [joint[0] + lc2 * th2.cos(), joint[1] + lc2 * th2.sin()];
        (p1, p2, joint)
    }

    /// Center-of-mass velocities by a five-point stencil along `qd`.
    pub fn velocities(&self, q: [f64; 2], qd: [f64; 2]) -> [[f64; 2]; 2] {
        let at = |s: f64| self.positions([q[0] + s * qd[0], q[1] + s * qd[1]]);
        let v = |i: usize, k: usize| {
            d5(
                |s| {
                    let (p1, p2, _) = at(s);
                    [p1, p2][i][k]
                },
                1e-3,
            )
        };
        [[v(0, 0), v(0, 1)], [v(1, 0), v(1, 1)]]
    }

    pub fn kinetic(&self, q: [f64; 2], qd: [f64; 2]) -> f64 {
        let v = self.velocities(q, qd);
        let [l1, l2] = &self.body.links;
        let m1 = l1.mass * (1.0 + l1.added_mass_coeff);
        let m2 = l2.mass * (1.0 + l2.added_mass_coeff);
        0.5 * m1 * (v[0][0].powi(2) + v[0][1].powi(2))
            + 0.5 * m2 * (v[1][0].powi(2) + v[1][1].powi(2))
            + 0.5 * l1.inertia * qd[0].powi(2)
            + 0.5 * l2.inertia * (qd[0] + qd[1]).powi(2)
    }

    fn potential(&self, q: [f64; 2]) -> f64 {
        0.5 * self.k2 * (q[1] - q[0]).powi(2)
    }

    fn dt_dqd(&self, i: usize, q: [f64; 2], qd: [f64; 2]) -> f64 {
        d5(
            |h| {
                let mut p = qd;
                p[i] += h;
                self.kinetic(q, p)
            },
            1e-2,
        )
    }

    /// Lagrange's equations, `d/dt dT/dqd - dT/dq + dV/dq`, by differences.
    pub fn generalized_force(&self, q: [f64; 2], qd: [f64; 2], qdd: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for i in 0..2 {
            let ddt = d5(
                |s| {
                    self.dt_dqd(
                        i,
                        [q[0] + s * qd[0], q[1] + s * qd[1]],
                        [qd[0] + s * qdd[0], qd[1] + s * qdd[1]],
                    )
                },
                1e-4,
            );
            let shifted = |h: f64| {
                let mut a = q;
                a[i] += h;
                a
            };
            let dtdq = d5(|h| self.kinetic(shifted(h), qd), 1e-3);
            let dvdq = d5(|h| self.potential(shifted(h)), 1e-3);
            out[i] = ddt - dtdq + dvdq;
        }
        out
    }
}

/// Five-point central difference of `f` at zero.
pub fn d5(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// A random state inside the operating envelope: angles, rates, accelerations.
pub fn random_state(rng: &mut ChaCha8Rng) -> ([f64; 2], [f64; 2], [f64; 2]) {
    (
        [rng.gen_range(-0.4..0.4), rng.gen_range(-1.0..1.0)],
        [rng.gen_range(-15.0..15.0), rng.gen_range(-30.0..30.0)],
        [rng.gen_range(-600.0..600.0), rng.gen_range(-1500.0..1500.0)],
    )
}
