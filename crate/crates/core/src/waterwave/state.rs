use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{deriv, Field, SpectralGrid, ONE};

/// Conformal-frame state: `Z − α'`, `Z_{,α'}`, `Z_t`, surface tension and time.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub zdev: Field,
    pub zp: Field,
    pub zt: Field,
    pub sigma: f64,
    pub time: f64,
}

impl WaveState {
    pub fn new(zdev: Field, zp: Field, zt: Field, sigma: f64, time: f64) -> Result<WaveState> {
        if !(zdev.same_grid(&zp) && zp.same_grid(&zt)) {
            return Err(Error::GridMismatch);
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "surface tension must be non-negative, got {sigma}"
            )));
        }
        if !(zdev.is_finite() && zp.is_finite() && zt.is_finite()) {
            return Err(Error::NonFinite("wave state"));
        }
        Ok(WaveState {
            zdev,
            zp,
            zt,
            sigma,
            time,
        })
    }

    /// Flat interface at rest.
    pub fn flat(grid: &Arc<SpectralGrid>, sigma: f64) -> WaveState {
        WaveState {
            zdev: Field::zeros(grid),
            zp: Field::constant(grid, ONE),
            zt: Field::zeros(grid),
            sigma,
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.zp.grid()
    }

    /// `Z̄_t`.
    pub fn zt_bar(&self) -> Field {
        self.zt.conj()
    }

    /// Interface positions `Z(α'_j)`.
    pub fn positions(&self) -> Vec<Complex64> {
        let grid = self.grid().clone();
        self.zdev
            .values()
            .iter()
            .enumerate()
            .map(|(j, d)| d + grid.node(j))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.zdev.is_finite() && self.zp.is_finite() && self.zt.is_finite()
    }

    pub(crate) fn axpy(&self, dt: f64, rate: &StateRates) -> WaveState {
        WaveState {
            zdev: &self.zdev + &rate.zdev.scale(dt),
            zp: &self.zp + &rate.zp.scale(dt),
            zt: &self.zt + &rate.zt.scale(dt),
            sigma: self.sigma,
            time: self.time + dt,
        }
    }
}

/// Time derivatives of the three state fields.
#[derive(Clone, Debug)]
pub struct StateRates {
    pub zdev: Field,
    pub zp: Field,
    pub zt: Field,
}

/// Unwrapped angle `g = Im log Z_{,α'}`.
///
/// The argument is unwrapped along the grid and the `2π` branch is chosen so
/// the grid mean of `g` is closest to zero, since `log Z_{,α'}` is holomorphic
/// with vanishing mean.
pub fn angle_field(zp: &Field) -> Result<Field> {
    let vals = zp.values();
    let mut out = Vec::with_capacity(vals.len());
    let mut prev = vals[0].arg();
    out.push(prev);
    for z in &vals[1..] {
        let mut d = z.arg() - prev.rem_euclid(2.0 * PI);
        d = (d + PI).rem_euclid(2.0 * PI) - PI;
        prev += d;
        out.push(prev);
    }
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    let shift = -2.0 * PI * (mean / (2.0 * PI)).round();
    Field::from_real(
        zp.grid(),
        &out.iter().map(|g| g + shift).collect::<Vec<_>>(),
    )
}

/// `Z_{,α'}^p = exp(p (ln|Z_{,α'}| + i g))` on the branch of [`angle_field`].
pub fn zp_power(zp: &Field, p: f64) -> Result<Field> {
    let g = angle_field(zp)?;
    Ok(zp.zip_map(&g, |z, g| {
        Complex64::from_polar(1.0, p * g.re) * z.norm().powf(p)
    }))
}

/// Diagnostic record for a state.
#[derive(Clone, Debug, Serialize)]
pub struct Validation {
    pub min_abs_zp: f64,
    /// Positive-mode mass of `Z_{,α'} − 1`.
    pub holo_residual_zp: f64,
    /// Positive-mode mass of `Z̄_t`.
    pub holo_residual_zt_bar: f64,
    /// `‖∂(Z − α') − (Z_{,α'} − 1)‖_∞`.
    pub consistency: f64,
    pub min_a1: f64,
    pub finite: bool,
}

impl Validation {
    pub fn max_holo_residual(&self) -> f64 {
        self.holo_residual_zp.max(self.holo_residual_zt_bar)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.finite
            && self.min_abs_zp > 0.0
            && self.max_holo_residual() <= tol
            && self.consistency <= tol.max(1e-8)
            && self.min_a1 >= 1.0 - tol.max(1e-8)
    }
}

pub fn validate_state(state: &WaveState) -> Validation {
    let finite = state.is_finite();
    let zp1 = &state.zp - ONE;
    let consistency = deriv(&state.zdev).max_diff(&zp1);
    let min_a1 = if finite && state.zp.min_abs() > 0.0 {
        super::derived::taylor_coefficient(state)
            .real_parts()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    Validation {
        min_abs_zp: state.zp.min_abs(),
        holo_residual_zp: zp1.positive_mode_mass(),
        holo_residual_zt_bar: state.zt_bar().positive_mode_mass(),
        consistency,
        min_a1,
        finite,
    }
}

/// Signed curvature of the curve `α' ↦ Z(α')`, `Im(Z̄_{,α'} ∂Z_{,α'}) / |Z_{,α'}|³`.
pub fn geometric_curvature(state: &WaveState) -> Field {
    let dzp = deriv(&state.zp);
    state.zp.zip_map(&dzp, |z, dz| {
        Complex64::new((z.conj() * dz).im / z.norm().powi(3), 0.0)
    })
}
