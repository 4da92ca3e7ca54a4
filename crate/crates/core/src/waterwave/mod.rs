//! Conformal-coordinate capillary-gravity water-wave system.
//!
//! Unknowns are `Z_{,α'}` and `Z_t` on the fixed conformal grid, with the
//! interface `Z − α'` carried alongside. The material derivative
//! `D_t = ∂_t + b∂_{α'}` is expanded with the transport term computed spectrally.

mod checkpoint;
mod derived;
mod state;
mod stepper;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use derived::{
    capillary_term, compute_derived, curvature_field, taylor_coefficient, taylor_coefficient_alt,
    transport_velocity, DerivedFields,
};
pub use state::{
    angle_field, geometric_curvature, validate_state, zp_power, StateRates, Validation, WaveState,
};
pub use stepper::{
    advance_lagrangian_map, advance_lagrangian_map_frozen, condition_state, rhs_eulerian, rhs_with,
    stability_limit, stable_dt, step_rk4, step_rk4_detailed, RhsEval, StageVelocities, StepReport,
    StepperConfig,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::MonotoneMap;
    use crate::exec::Exec;
    use crate::spectral::{antideriv, make_grid, Field, ONE};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn smooth_state(n: usize, sigma: f64) -> WaveState {
        let g = make_grid(n, 2.0 * PI).unwrap();
        let zp = Field::from_fn(&g, |x| {
            (Complex64::new(0.05, 0.02) * Complex64::from_polar(1.0, -x)).exp()
        });
        let zt = Field::from_fn(&g, |x| {
            Complex64::new(0.03, -0.01) * Complex64::from_polar(1.0, 2.0 * x)
        });
        WaveState::new(antideriv(&(&zp - ONE)), zp, zt, sigma, 0.0).unwrap()
    }

    #[test]
    fn flat_state_is_steady() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let cfg = StepperConfig::default();
        for sigma in [0.0, 0.1] {
            let mut s = WaveState::flat(&g, sigma);
            let dt = stable_dt(&s, &cfg);
            for _ in 0..1000 {
                s = step_rk4(&s, dt, &cfg).unwrap();
            }
            assert!(s.zp.max_diff(&Field::constant(&g, ONE)) < 1e-13);
            assert!(s.zt.max_abs() < 1e-13);
            assert!(s.zdev.max_abs() < 1e-13);
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let s = smooth_state(32, 0.0);
        let cfg = StepperConfig::default();
        let dt = 3.0 * stable_dt(&s, &cfg);
        assert!(matches!(
            step_rk4(&s, dt, &cfg),
            Err(crate::Error::Cfl { .. })
        ));
    }

    #[test]
    fn fourth_order_convergence() {
        let cfg = StepperConfig::default();
        let s0 = smooth_state(64, 0.01);
        let t_end = 0.2;
        let run = |m: usize| {
            let dt = t_end / m as f64;
            let mut s = s0.clone();
            for _ in 0..m {
                s = step_rk4(&s, dt, &cfg).unwrap();
            }
            s
        };
        let m = (t_end / stable_dt(&s0, &cfg)).ceil() as usize;
        let a = run(m);
        let b = run(2 * m);
        let c = run(4 * m);
        let ratio = a.zp.max_diff(&b.zp) / b.zp.max_diff(&c.zp);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
        assert!(c.zp.max_diff(&(&deriv_plus_one(&c.zdev))) < 1e-10);
    }

    fn deriv_plus_one(f: &Field) -> Field {
        &crate::spectral::deriv(f) + ONE
    }

    #[test]
    fn map_advance_trivial_flows() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let map = MonotoneMap::identity(&g);
        let zero = Field::zeros(&g);
        assert!(
            advance_lagrangian_map_frozen(&map, &zero, 0.1, Exec::Sequential)
                .unwrap()
                .is_identity()
        );
        let c = Field::constant(&g, Complex64::new(0.3, 0.0));
        let moved = advance_lagrangian_map_frozen(&map, &c, 0.1, Exec::Sequential).unwrap();
        for d in moved.deviation_real() {
            assert!((d - 0.03).abs() < 1e-14);
        }
    }

    #[test]
    fn map_advance_follows_characteristics() {
        // dh/dt = sin(h) has h(t) = 2 atan(tan(h0/2) e^t)
        let g = make_grid(64, 2.0 * PI).unwrap();
        let b = Field::from_fn(&g, |x| Complex64::new(0.2 * x.sin(), 0.0));
        let mut map = MonotoneMap::identity(&g);
        let dt = 0.01;
        for _ in 0..100 {
            map = advance_lagrangian_map_frozen(&map, &b, dt, Exec::Parallel).unwrap();
        }
        let t: f64 = 1.0;
        for (j, h) in map.values().iter().enumerate() {
            let h0 = g.node(j);
            let exact = if (h0 - PI).abs() < 1e-12 {
                PI
            } else {
                let e = 2.0 * ((h0 / 2.0).tan() * (0.2 * t).exp()).atan();
                if h0 > PI {
                    e + 2.0 * PI
                } else {
                    e
                }
            };
            assert!((h - exact).abs() < 1e-9, "{h} vs {exact}");
        }
        assert!(map.min_jacobian() > 0.0);
    }

    #[test]
    fn checkpoint_resume_is_bit_exact() {
        let cfg = StepperConfig::default();
        let mut s = smooth_state(32, 0.0);
        let dt = stable_dt(&s, &cfg);
        for _ in 0..5 {
            s = step_rk4(&s, dt, &cfg).unwrap();
        }
        let mut bytes = Vec::new();
        write_checkpoint(&s, &mut bytes).unwrap();
        let r = read_checkpoint(bytes.as_slice()).unwrap();
        let a = step_rk4(&s, dt, &cfg).unwrap();
        let b = step_rk4(&r, dt, &cfg).unwrap();
        assert_eq!(a.zp.values(), b.zp.values());
        assert_eq!(a.zt.values(), b.zt.values());
    }
}
