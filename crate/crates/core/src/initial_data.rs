//! Model initial data: angled crests, Poisson mollification, smooth
//! holomorphic profiles, and the depth-ladder estimate of the data norm `M`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    antideriv, check_holomorphic, deriv, deriv_n, drop_positive_modes, extend_to_depth,
    poisson_smooth, Field, SpectralGrid, ONE,
};
use crate::waterwave::WaveState;

/// Model angled crest of interior angle `νπ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrestSpec {
    pub nu: f64,
    /// Distance of the branch point below the surface; 0 gives the sharp crest.
    pub delta: f64,
    pub velocity_amplitude: Complex64,
    /// Mode of `Z̄_t`, strictly negative.
    pub velocity_mode: i64,
}

impl Default for CrestSpec {
    fn default() -> Self {
        CrestSpec {
            nu: 0.35,
            delta: 0.0,
            velocity_amplitude: Complex64::new(0.0, 0.0),
            velocity_mode: -1,
        }
    }
}

impl CrestSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "nu must lie in (0, 1/2), got {}",
                self.nu
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if self.velocity_mode >= 0 {
            return Err(Error::InvalidArgument(format!(
                "velocity mode must be negative, got {}",
                self.velocity_mode
            )));
        }
        if !(self.velocity_amplitude.re.is_finite() && self.velocity_amplitude.im.is_finite()) {
            return Err(Error::NonFinite("velocity amplitude"));
        }
        Ok(())
    }
}

/// Crest location: mid-domain, moved half a cell off the grid when the crest is sharp.
pub fn crest_location(grid: &SpectralGrid, delta: f64) -> f64 {
    let mid = 0.5 * grid.length();
    if delta == 0.0 {
        mid + 0.5 * grid.spacing()
    } else {
        mid
    }
}

/// `Z_{,α'} = (1 − e^{−δ} e^{−2πi(α' − α_c)/L})^{ν−1}`, built from its binomial
/// series truncated to the modes the grid resolves without aliasing. The
/// series has mean 1 and only non-positive modes.
pub fn crest_zp(grid: &Arc<SpectralGrid>, nu: f64, delta: f64) -> Field {
    crest_zp_with_exponent(grid, nu - 1.0, delta)
}

fn crest_zp_with_exponent(grid: &Arc<SpectralGrid>, exponent: f64, delta: f64) -> Field {
    let n = grid.n_points();
    let ac = crest_location(grid, delta);
    let w = 2.0 * PI / grid.length();
    let mut modes = Vec::with_capacity(n / 2);
    let mut a = 1.0;
    for m in 0..n / 2 {
        if m > 0 {
            a *= (m as f64 - 1.0 - exponent) / m as f64;
        }
        let c = Complex64::from_polar(a * (-delta * m as f64).exp(), w * m as f64 * ac);
        modes.push((-(m as i64), c));
    }
    Field::from_modes(grid, &modes)
}

/// `Z̄_t = amplitude · e^{2πi·mode·α'/L}`; the mean vanishes for a nonzero mode.
pub fn velocity_profile(grid: &Arc<SpectralGrid>, amplitude: Complex64, mode: i64) -> Field {
    Field::from_modes(grid, &[(mode, amplitude)])
}

pub fn crest_data(spec: &CrestSpec, grid: &Arc<SpectralGrid>, sigma: f64) -> Result<WaveState> {
    spec.validate()?;
    let zp = crest_zp(grid, spec.nu, spec.delta);
    let min = zp.min_abs();
    if !(min > 0.0) {
        return Err(Error::Degenerate(min));
    }
    let zt = velocity_profile(grid, spec.velocity_amplitude, spec.velocity_mode).conj();
    WaveState::new(antideriv(&(&zp - ONE)), zp, zt, sigma, 0.0)
}

/// Poisson mollification `(Z ∗ P_ε, Z_t ∗ P_ε)`, with `Z_{,α'}` recomputed from `Z`.
pub fn mollify_data(state: &WaveState, eps: f64) -> Result<WaveState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mollification scale must be positive, got {eps}"
        )));
    }
    let zdev = poisson_smooth(&state.zdev, eps)?;
    let zt = poisson_smooth(&state.zt, eps)?;
    let zp = &deriv(&zdev) + ONE;
    WaveState::new(zdev, zp, zt, state.sigma, state.time)
}

/// Smooth data from finitely many modes: `Z_{,α'} = exp(Σ c_k e^{iκ_k α'})`
/// and `Z̄_t = Σ d_k e^{iκ_k α'}`, all modes strictly negative.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub log_zp: Vec<(i64, Complex64)>,
    pub zt_bar: Vec<(i64, Complex64)>,
}

pub fn smooth_data(spec: &SmoothSpec, grid: &Arc<SpectralGrid>, sigma: f64) -> Result<WaveState> {
    let nyq = grid.n_points() as i64 / 2;
    for &(k, _) in spec.log_zp.iter().chain(&spec.zt_bar) {
        if !(k < 0 && k > -nyq) {
            return Err(Error::InvalidArgument(format!(
                "smooth data modes must lie in (-{nyq}, 0), got {k}"
            )));
        }
    }
    let log = Field::from_modes(grid, &spec.log_zp);
    // exp of a k<0 series has k<0 support; the projection only removes aliasing noise
    let zp = &drop_positive_modes(&(&log.map(|z| z.exp()) - ONE)) + ONE;
    let zt = Field::from_modes(grid, &spec.zt_bar).conj();
    WaveState::new(antideriv(&(&zp - ONE)), zp, zt, sigma, 0.0)
}

/// Depths `−2^{−1}, …, −2^{−levels}`.
pub fn default_depth_ladder(levels: u32) -> Vec<f64> {
    (1..=levels).map(|j| -(0.5f64).powi(j as i32)).collect()
}

pub const M_COMPONENT_NAMES: [&str; 9] = [
    "psi34_d_inv_psi_l8_7",
    "psi12_d_inv_psi_l4_3",
    "d_inv_psi_l2",
    "inv_psi_d_inv_psi_linf",
    "inv_psi_d2_inv_psi_l1",
    "inv_psi2_d2_inv_psi_l2",
    "inv_psi3_d3_inv_psi_l1",
    "inv_psi_minus_one_l2",
    "velocity_h35",
];

/// Ladder approximation of `M` (a lower bound for the sup over depths).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MEstimate {
    pub ladder: Vec<f64>,
    pub components: Vec<(&'static str, f64)>,
}

impl MEstimate {
    pub fn total(&self) -> f64 {
        self.components.iter().map(|(_, v)| v).sum()
    }
}

fn m_terms_at(zp: &Field, ztb: &Field, y: f64) -> Result<[f64; 9]> {
    let psi = extend_to_depth(zp, y)?;
    let min = psi.min_abs();
    if !(min > 0.0) {
        return Err(Error::Degenerate(min));
    }
    let abs = psi.abs();
    let inv = psi.recip();
    let d1 = deriv(&inv);
    let d2 = deriv_n(&inv, 2);
    let d3 = deriv_n(&inv, 3);
    let pw = |p: f64| abs.map(|a| Complex64::new(a.re.powf(p), 0.0));
    let u = extend_to_depth(ztb, y)?;
    Ok([
        (&pw(0.75) * &d1).lp(8.0 / 7.0),
        (&pw(0.5) * &d1).lp(4.0 / 3.0),
        d1.l2(),
        (&inv * &d1).linf(),
        (&inv * &d2).lp(1.0),
        (&(&inv * &inv) * &d2).l2(),
        (&(&(&inv * &inv) * &inv) * &d3).lp(1.0),
        (&inv - ONE).l2(),
        u.hs(3.5),
    ])
}

pub fn estimate_m(state: &WaveState, ladder: &[f64], holo_tol: f64) -> Result<MEstimate> {
    if ladder.is_empty() || ladder.iter().any(|&y| !(y < 0.0)) {
        return Err(Error::InvalidArgument(
            "depth ladder must be a non-empty list of negative depths".into(),
        ));
    }
    check_holomorphic(&(&state.zp - ONE), holo_tol)?;
    let ztb = state.zt_bar();
    check_holomorphic(&ztb, holo_tol)?;
    let mut best = [0.0f64; 9];
    for &y in ladder {
        let t = m_terms_at(&state.zp, &ztb, y)?;
        for (b, v) in best.iter_mut().zip(t) {
            *b = b.max(v);
        }
    }
    Ok(MEstimate {
        ladder: ladder.to_vec(),
        components: M_COMPONENT_NAMES.iter().copied().zip(best).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn grid(n: usize) -> Arc<SpectralGrid> {
        make_grid(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn sharp_crest_power_law() {
        let g = grid(4096);
        let spec = CrestSpec::default();
        let s = crest_data(&spec, &g, 0.0).unwrap();
        let ac = crest_location(&g, 0.0);
        // fit between 8 cells and 0.05 of the period
        let pts: Vec<(f64, f64)> = (0..g.n_points())
            .filter_map(|j| {
                let r = (g.node(j) - ac).abs();
                (r > 8.0 * g.spacing() && r < 0.05 * g.length())
                    .then(|| (r.ln(), s.zp.values()[j].norm().ln()))
            })
            .collect();
        let slope = fit_slope(&pts);
        assert!(
            (slope - (spec.nu - 1.0)).abs() < 0.03 * (1.0 - spec.nu),
            "slope {slope}"
        );
    }

    fn fit_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn crest_is_holomorphic_with_unit_mean() {
        let g = grid(256);
        for delta in [0.0, 0.05] {
            let s = crest_data(
                &CrestSpec {
                    delta,
                    ..CrestSpec::default()
                },
                &g,
                0.0,
            )
            .unwrap();
            assert!((&s.zp - ONE).positive_mode_mass() < 1e-10);
            assert!((s.zp.mean() - ONE).norm() < 1e-12);
            assert!(s.zp.min_abs() > 0.0);
        }
    }

    #[test]
    fn exponent_zero_is_flat() {
        let g = grid(64);
        let zp = crest_zp_with_exponent(&g, 0.0, 0.0);
        assert!(zp.max_diff(&Field::constant(&g, ONE)) < 1e-15);
    }

    #[test]
    fn mollified_crest_is_a_shifted_crest() {
        let g = grid(512);
        let spec = CrestSpec {
            delta: 0.02,
            ..CrestSpec::default()
        };
        let s = crest_data(&spec, &g, 0.0).unwrap();
        let m = mollify_data(&s, 0.1).unwrap();
        let direct = crest_zp(&g, spec.nu, 0.12);
        assert!(m.zp.max_diff(&direct) < 1e-12);
    }

    #[test]
    fn mollification_semigroup() {
        let g = grid(256);
        let spec = CrestSpec {
            delta: 0.05,
            velocity_amplitude: Complex64::new(0.1, 0.05),
            velocity_mode: -3,
            ..CrestSpec::default()
        };
        let s = crest_data(&spec, &g, 0.0).unwrap();
        let two = mollify_data(&mollify_data(&s, 0.03).unwrap(), 0.07).unwrap();
        let one = mollify_data(&s, 0.1).unwrap();
        assert!(two.zp.max_diff(&one.zp) < 1e-12);
        assert!(two.zt.max_diff(&one.zt) < 1e-12);
        assert!(two.zdev.max_diff(&one.zdev) < 1e-12);
    }

    #[test]
    fn tiny_mollification_is_nearly_identity() {
        let g = grid(64);
        let spec = SmoothSpec {
            log_zp: vec![(-1, Complex64::new(0.1, 0.05))],
            zt_bar: vec![(-2, Complex64::new(0.02, 0.0))],
        };
        let s = smooth_data(&spec, &g, 0.0).unwrap();
        let m = mollify_data(&s, 1e-12).unwrap();
        assert!(m.zp.max_diff(&s.zp) < 1e-10);
        assert!(m.zt.max_diff(&s.zt) < 1e-10);
    }

    #[test]
    fn flat_data_has_zero_m() {
        let g = grid(64);
        let m = estimate_m(&WaveState::flat(&g, 0.0), &default_depth_ladder(8), 1e-10).unwrap();
        assert_eq!(m.total(), 0.0);
    }

    #[test]
    fn single_velocity_mode_m_decay() {
        let g = grid(64);
        let k: f64 = 3.0;
        let amp: f64 = 0.2;
        let s = WaveState::new(
            Field::zeros(&g),
            Field::constant(&g, ONE),
            velocity_profile(&g, Complex64::new(amp, 0.0), -3).conj(),
            0.0,
            0.0,
        )
        .unwrap();
        let m = estimate_m(&s, &[-0.5], 1e-10).unwrap();
        let expect = amp * (-0.5 * k).exp() * (2.0 * PI * (1.0 + k * k).powf(3.5)).sqrt();
        let got = m.components[8].1;
        assert!((got - expect).abs() < 1e-12 * expect);
        assert!(m.components[..8].iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn m_is_monotone_in_the_ladder() {
        let g = grid(512);
        let s = crest_data(
            &CrestSpec {
                delta: 0.05,
                ..CrestSpec::default()
            },
            &g,
            0.0,
        )
        .unwrap();
        let coarse = estimate_m(&s, &default_depth_ladder(3), 1e-10).unwrap();
        let fine = estimate_m(&s, &default_depth_ladder(6), 1e-10).unwrap();
        for ((_, a), (_, b)) in coarse.components.iter().zip(&fine.components) {
            assert!(a <= b);
        }
        assert!(fine.total().is_finite());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let g = grid(32);
        for spec in [
            CrestSpec {
                nu: 0.5,
                ..CrestSpec::default()
            },
            CrestSpec {
                delta: -1.0,
                ..CrestSpec::default()
            },
            CrestSpec {
                velocity_mode: 2,
                ..CrestSpec::default()
            },
        ] {
            assert!(crest_data(&spec, &g, 0.0).is_err());
        }
        let bad = SmoothSpec {
            log_zp: vec![(1, ONE)],
            zt_bar: vec![],
        };
        assert!(smooth_data(&bad, &g, 0.0).is_err());
    }
}
