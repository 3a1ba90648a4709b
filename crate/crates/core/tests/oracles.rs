//! Independent re-derivations checked against the library.
//!
//! Every oracle here starts from the planar position map of the two links
//! and uses finite differences in place of the library's closed forms.

mod common;

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wirefish_core::config::Config;
use wirefish_core::hydrodynamics::{drag_force, generalized_hydro_torques, link_forces};
use wirefish_core::optimizer::{lattice, optimize_run, OptMode, OptOptions};
use wirefish_core::drivetrain::power_series;
use wirefish_core::spectral::{mean, variance};
use wirefish_core::tail_dynamics::{eom_terms, run_tail};
use wirefish_core::transmission::{chord, TailMotion};

use common::lagrange::{random_state, Oracle};

fn motion(o: &Oracle, q: [f64; 2], qd: [f64; 2], qdd: [f64; 2]) -> TailMotion {
    TailMotion::new(q.into(), qd.into(), qdd.into(), chord(2.0 * q[0], o.arc), &o.body)
}

#[test]
fn equations_of_motion_match_lagrangian_oracle() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (q, qd, qdd) = random_state(&mut rng);
        let t = eom_terms(q.into(), qd.into(), chord(2.0 * q[0], o.arc), o.k2, &o.body).unwrap();
        let analytic = t.mass * Vector2::from(qdd) + t.bias + t.spring;
        let oracle = Vector2::from(o.generalized_force(q, qd, qdd));
        let err = (analytic - oracle).norm();
        assert!(
            err <= 1e-5 * analytic.norm(),
            "q={q:?} qd={qd:?} qdd={qdd:?}: analytic {analytic:?} oracle {oracle:?}"
        );
    }
}

#[test]
fn mass_matrix_is_symmetric_positive_definite() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (q, qd, _) = random_state(&mut rng);
        let m: Matrix2<f64> = eom_terms(q.into(), qd.into(), chord(2.0 * q[0], o.arc), o.k2, &o.body)
            .unwrap()
            .mass;
        assert!((m - m.transpose()).norm() <= 1e-15 * m.norm());
        assert!(m[(0, 0)] > 0.0 && m.determinant() > 0.0);
    }
}

#[test]
fn velocities_match_position_differences() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (q, qd, _) = random_state(&mut rng);
        let m = motion(&o, q, qd, [0.0; 2]);
        let v = o.velocities(q, qd);
        for i in 0..2 {
            let fd = Vector2::from(v[i]);
            assert!(
                (m.jac[i] * Vector2::from(qd) - fd).norm() <= 1e-6 * fd.norm().max(1e-9),
                "link {i}"
            );
        }
    }
}

#[test]
fn accelerations_match_velocity_differences() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = 1e-6;
    for _ in 0..50 {
        let (q, qd, qdd) = random_state(&mut rng);
        let m = motion(&o, q, qd, qdd);
        let at = |sg: f64| {
            o.velocities(
                [q[0] + sg * qd[0], q[1] + sg * qd[1]],
                [qd[0] + sg * qdd[0], qd[1] + sg * qdd[1]],
            )
        };
        let (p, n) = (at(s), at(-s));
        for i in 0..2 {
            let fd = Vector2::new((p[i][0] - n[i][0]) / (2.0 * s), (p[i][1] - n[i][1]) / (2.0 * s));
            assert!((m.acc[i] - fd).norm() <= 1e-4 * fd.norm().max(1.0), "link {i}");
        }
    }
}

#[test]
fn drag_matches_step_by_step_oracle() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let (q, qd, _) = random_state(&mut rng);
        let m = motion(&o, q, qd, [0.0; 2]);
        let v = o.velocities(q, qd);
        let angles = [q[0], q[0] + q[1]];
        for i in 0..2 {
            let p = &o.body.links[i];
            let scale = if i == 0 { o.chord_length(q[0]) / o.arc } else { 1.0 };
            let (s, c) = angles[i].sin_cos();
            // link-frame velocity: R^T v
            let vx = c * v[i][0] + s * v[i][1];
            let vy = -s * v[i][0] + c * v[i][1];
            let k = 0.5 * o.body.fluid_density;
            let fx = -k * p.friction_coeff * p.area_x * scale * vx * vx.abs();
            let fy = -k * p.drag_coeff * p.area_y * scale * vy * vy.abs();
            let world = Vector2::new(c * fx - s * fy, s * fx + c * fy);
            let lib = drag_force(i, &m, &o.body);
            assert!((lib - world).norm() <= 1e-6 * world.norm().max(1e-9), "link {i}");
        }
    }
}

#[test]
fn hydro_torques_match_planar_moments() {
    let o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let (q, qd, qdd) = random_state(&mut rng);
        let m = motion(&o, q, qd, qdd);
        let forces = link_forces(&m, &o.body);
        let (p1, p2, joint) = o.positions(q);
        let f1 = forces[0].total();
        let f2 = forces[1].total();
        let cross = |r: [f64; 2], f: Vector2<f64>| r[0] * f.y - r[1] * f.x;
        let tau1 = cross(p1, f1) + cross(p2, f2);
        let tau2 = cross([p2[0] - joint[0], p2[1] - joint[1]], f2);
        let (a, b) = generalized_hydro_torques(&forces, &m);
        let scale = f1.norm() + f2.norm();
        assert!((a - tau1).abs() <= 1e-9 * scale.max(1e-9));
        assert!((b - tau2).abs() <= 1e-9 * scale.max(1e-9));
    }
}

#[test]
fn optimum_matches_closed_form_quadratic() {
    // Motor power is affine in the AES stiffness, so its variance is a
    // parabola whose vertex is -cov(P0, P1) / var(P1).
    let cfg = Config::shipped();
    let model = cfg.model.with_pes_stiffness(10.51);
    let sim = cfg.sim.with_frequency(6.0);
    let run = run_tail(&model, &sim).unwrap();
    let p0 = power_series(&run, 0.0, &model.drive);
    let p1: Vec<f64> = power_series(&run, 1.0, &model.drive)
        .iter()
        .zip(&p0)
        .map(|(a, b)| a - b)
        .collect();
    let (m0, m1) = (mean(&p0), mean(&p1));
    let cov = p0.iter().zip(&p1).map(|(a, b)| (a - m0) * (b - m1)).sum::<f64>() / p0.len() as f64;
    let vertex = -cov / variance(&p1);

    let cont = optimize_run(&run, &model, &OptOptions { mode: OptMode::Continuous, variance_cap: None }).unwrap();
    let expected = vertex.clamp(cont.bounds.k1_min, cont.bounds.k1_max);
    assert!((cont.k1_opt - expected).abs() <= 1e-6 * expected, "{} vs {expected}", cont.k1_opt);

    let quad = |k: f64| variance(&p0.iter().zip(&p1).map(|(a, b)| a + k * b).collect::<Vec<_>>());
    let grid = optimize_run(&run, &model, &OptOptions { mode: OptMode::Grid, variance_cap: None }).unwrap();
    let best = lattice(&model.aes, &grid.bounds)
        .into_iter()
        .min_by(|a, b| quad(a.1).total_cmp(&quad(b.1)))
        .unwrap();
    assert_eq!(grid.k1_opt, best.1);
    assert_eq!(grid.thickness, best.0);
}
