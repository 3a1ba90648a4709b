//! Morison-equation forces on the two tail links.
//!
//! Each link feels an added-mass force proportional to the acceleration of
//! its center of mass and a quadratic drag resolved along and across the
//! link. Link-1 areas scale with the current chord length.

use nalgebra::{Matrix2, Vector2};

use crate::config::TailBodyParams;
use crate::transmission::{unit, TailMotion};

/// Hydrodynamic force on one link, world frame, applied at its center of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkForce {
    pub added_mass: Vector2<f64>,
    pub drag: Vector2<f64>,
    pub point: Vector2<f64>,
}

impl LinkForce {
    pub fn total(&self) -> Vector2<f64> {
        self.added_mass + self.drag
    }
}

/// Rotation taking link-frame vectors to the world frame.
pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn area_scale(link: usize, motion: &TailMotion) -> f64 {
    if link == 0 {
        motion.chord.ratio()
    } else {
        1.0
    }
}

/// Quadratic drag on `link` (0 or 1), world frame.
pub fn drag_force(link: usize, motion: &TailMotion, body: &TailBodyParams) -> Vector2<f64> {
    let p = &body.links[link];
    let scale = area_scale(link, motion);
    let rot = rotation(motion.angle[link]);
    let local = rot.transpose() * motion.vel[link];
    let half_rho = 0.5 * body.fluid_density;
    let f_local = Vector2::new(
        -half_rho * p.friction_coeff * p.area_x * scale * local.x * local.x.abs(),
        -half_rho * p.drag_coeff * p.area_y * scale * local.y * local.y.abs(),
    );
    rot * f_local
}

/// Added-mass reaction `-m_a * a` on `link`.
pub fn added_mass_force(link: usize, motion: &TailMotion, body: &TailBodyParams) -> Vector2<f64> {
    -body.links[link].added_mass() * motion.acc[link]
}

pub fn link_forces(motion: &TailMotion, body: &TailBodyParams) -> [LinkForce; 2] {
    std::array::from_fn(|i| LinkForce {
        added_mass: added_mass_force(i, motion, body),
        drag: drag_force(i, motion, body),
        point: motion.com[i],
    })
}

fn moment(r: Vector2<f64>, f: Vector2<f64>) -> f64 {
    r.perp(&f)
}

/// Moments of the link forces about the link-1 origin (first entry) and
/// about the fin joint (second entry).
pub fn generalized_hydro_torques(forces: &[LinkForce; 2], motion: &TailMotion) -> (f64, f64) {
    let tau1 = moment(forces[0].point, forces[0].total()) + moment(forces[1].point, forces[1].total());
    let tau2 = moment(forces[1].point - motion.joint2, forces[1].total());
    (tau1, tau2)
}

/// Component of the total fin force along the AES chord axis.
pub fn axial_fin_force(forces: &[LinkForce; 2], motion: &TailMotion) -> f64 {
    unit(motion.angle[0]).dot(&forces[1].total())
}

/// World-X component of the total hydrodynamic force on the tail. Negative
/// values push the fish forward.
pub fn thrust(forces: &[LinkForce; 2]) -> f64 {
    forces[0].total().x + forces[1].total().x
}

/// Rate of work done by drag on the tail (never positive).
pub fn drag_power(forces: &[LinkForce; 2], motion: &TailMotion) -> f64 {
    forces[0].drag.dot(&motion.vel[0]) + forces[1].drag.dot(&motion.vel[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::transmission::chord;

    fn body() -> TailBodyParams {
        Config::shipped().model.body
    }

    fn motion(q: [f64; 2], qd: [f64; 2], qdd: [f64; 2]) -> TailMotion {
        let b = body();
        let c = chord(2.0 * q[0], Config::shipped().model.aes.length);
        TailMotion::new(q.into(), qd.into(), qdd.into(), c, &b)
    }

    #[test]
    fn rest_has_no_force() {
        let b = body();
        let m = motion([0.1, 0.2], [0.0, 0.0], [0.0, 0.0]);
        let f = link_forces(&m, &b);
        for lf in &f {
            assert_eq!(lf.drag, Vector2::zeros());
            assert_eq!(lf.added_mass.norm(), 0.0);
        }
        assert_eq!(generalized_hydro_torques(&f, &m), (0.0, 0.0));
        assert_eq!(axial_fin_force(&f, &m), 0.0);
        assert_eq!(thrust(&f), 0.0);
    }

    #[test]
    fn axial_motion_gives_axial_drag() {
        let b = body();
        let mut m = motion([0.3, 0.0], [0.0, 0.0], [0.0, 0.0]);
        let v = 0.7;
        m.vel[1] = v * unit(m.angle[1]);
        let f = drag_force(1, &m, &b);
        let p = &b.links[1];
        let expected = 0.5 * b.fluid_density * p.friction_coeff * p.area_x * v * v;
        assert!((f.norm() - expected).abs() < 1e-12 * expected.max(1.0));
        assert!((f.normalize() + m.vel[1].normalize()).norm() < 1e-12);
    }

    #[test]
    fn force_across_chord_has_no_axial_component() {
        let m = motion([0.3, 0.1], [1.0, 2.0], [0.0, 0.0]);
        let lateral = crate::transmission::normal(m.angle[0]);
        let forces = [
            LinkForce { added_mass: Vector2::zeros(), drag: Vector2::zeros(), point: m.com[0] },
            LinkForce { added_mass: 2.5 * lateral, drag: Vector2::zeros(), point: m.com[1] },
        ];
        assert!(axial_fin_force(&forces, &m).abs() < 1e-15);
    }

    #[test]
    fn force_at_joint_has_no_fin_moment() {
        let m = motion([0.2, -0.3], [1.0, 2.0], [0.0, 0.0]);
        let forces = [
            LinkForce { added_mass: Vector2::zeros(), drag: Vector2::zeros(), point: m.com[0] },
            LinkForce { added_mass: Vector2::new(1.0, -2.0), drag: Vector2::new(0.3, 0.4), point: m.joint2 },
        ];
        assert_eq!(generalized_hydro_torques(&forces, &m).1, 0.0);
    }

    #[test]
    fn rotations_are_orthonormal() {
        for &a in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            let r = rotation(a);
            assert!((r.transpose() * r - Matrix2::identity()).norm() < 1e-12);
        }
    }
}
