use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use crestwave::bracket::{compose_map_apply, invert_map, MonotoneMap};
use crestwave::energies::{energy_aux, energy_high, energy_sigma};
use crestwave::initial_data::{smooth_data, SmoothSpec};
use crestwave::spectral::{hilbert, poisson_smooth, project_holomorphic, Side};
use crestwave::{make_grid, Exec, Field};

const N: usize = 64;

fn coeffs(max_mode: i64) -> impl Strategy<Value = Vec<(i64, Complex64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * max_mode + 1) as usize).prop_map(
        move |v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (re, im))| (i as i64 - max_mode, Complex64::new(re, im)))
                .collect()
        },
    )
}

fn holo_modes(max_mode: i64, amp: f64) -> impl Strategy<Value = Vec<(i64, Complex64)>> {
    prop::collection::vec((-amp..amp, -amp..amp), max_mode as usize).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (re, im))| (-(i as i64) - 1, Complex64::new(re, im) / (i + 1) as f64))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hilbert_is_an_involution_off_the_mean(modes in coeffs(20)) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let f = Field::from_modes(&g, &modes);
        let f = &f - f.mean();
        prop_assert!(hilbert(&hilbert(&f)).max_diff(&f) < 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn projections_partition_the_field(modes in coeffs(20)) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let f = Field::from_modes(&g, &modes);
        let sum = &project_holomorphic(&f, Side::Holomorphic) + &project_holomorphic(&f, Side::Antiholomorphic);
        prop_assert!(sum.max_diff(&f) < 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn poisson_smoothing_is_a_semigroup(modes in coeffs(20), a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let f = Field::from_modes(&g, &modes);
        let two = poisson_smooth(&poisson_smooth(&f, a).unwrap(), b).unwrap();
        let one = poisson_smooth(&f, a + b).unwrap();
        prop_assert!(two.max_diff(&one) < 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn inverse_map_round_trips(amp in 0.0f64..0.45, phase in 0.0f64..(2.0 * PI), k in 1i64..4) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let kf = k as f64;
        let map = MonotoneMap::from_fn(&g, |x| x + amp / kf * (kf * x + phase).sin()).unwrap();
        let inv = invert_map(&map, Exec::Sequential).unwrap();
        let back = map.eval(&inv.values(), Exec::Sequential);
        for (j, v) in back.iter().enumerate() {
            prop_assert!((v - g.node(j)).abs() < 1e-10);
        }
    }

    #[test]
    fn execution_policies_agree_bitwise(modes in coeffs(12), amp in 0.0f64..0.3) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let f = Field::from_modes(&g, &modes);
        let map = MonotoneMap::from_fn(&g, |x| x + amp * x.sin()).unwrap();
        let seq = compose_map_apply(&f, &map, Exec::Sequential).unwrap();
        let par = compose_map_apply(&f, &map, Exec::Parallel).unwrap();
        prop_assert_eq!(seq.values(), par.values());
    }

    #[test]
    fn energy_components_are_finite_and_nonnegative(
        log_zp in holo_modes(4, 0.2),
        zt_bar in holo_modes(4, 0.2),
        sigma in 0.0f64..0.1,
    ) {
        let g = make_grid(N, 2.0 * PI).unwrap();
        let s = smooth_data(&SmoothSpec { log_zp, zt_bar }, &g, sigma).unwrap();
        for report in [energy_sigma(&s), energy_high(&s), energy_aux(&s)] {
            let report = report.unwrap();
            prop_assert!(report.is_finite());
            prop_assert!(report.values().iter().all(|&v| v >= 0.0));
        }
    }
}
