use serde::{Deserialize, Serialize};

use super::derived::{capillary_term, taylor_coefficient, transport_velocity};
use super::state::{StateRates, WaveState};
use crate::bracket::MonotoneMap;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral::{dealias_filter, deriv, drop_positive_modes, Field, I};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub dt_safety: f64,
    pub filter_on: bool,
    pub project_each_step: bool,
    pub holo_tolerance: f64,
    /// Smallest admissible `|Z_{,α'}|`.
    pub degeneracy_floor: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt_safety: 0.5,
            filter_on: true,
            project_each_step: true,
            holo_tolerance: 1e-8,
            degeneracy_floor: 1e-8,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt_safety must lie in (0, 1], got {}",
                self.dt_safety
            )));
        }
        if !(self.holo_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "holo_tolerance must be positive".into(),
            ));
        }
        if !(self.degeneracy_floor > 0.0) {
            return Err(Error::InvalidArgument(
                "degeneracy_floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Right-hand side together with the transport velocity it used.
#[derive(Clone, Debug)]
pub struct RhsEval {
    pub rates: StateRates,
    pub b: Field,
    /// Positive-mode mass of the raw rates before projection.
    pub raw_holo_residual: f64,
}

/// Time derivatives of `(Z − α', Z_{,α'}, Z_t)` on the fixed conformal grid.
///
/// With `filter_on` the rates are dealiased; with `project` their strictly
/// positive modes (which vanish in the continuum) are removed.
pub fn rhs_eulerian(state: &WaveState, cfg: &StepperConfig) -> Result<RhsEval> {
    rhs_with(
        state,
        cfg.degeneracy_floor,
        cfg.filter_on,
        cfg.project_each_step,
    )
}

pub fn rhs_with(
    state: &WaveState,
    degeneracy_floor: f64,
    filter: bool,
    project: bool,
) -> Result<RhsEval> {
    let min = state.zp.min_abs();
    if !(min > degeneracy_floor) {
        return Err(Error::Degenerate(min));
    }
    let zp = &state.zp;
    let zt = &state.zt;
    let ztb = state.zt_bar();
    let b = transport_velocity(state);
    let b_ap = deriv(&b);
    let a1 = taylor_coefficient(state);

    let zp_rate = deriv(zt) - &b * &deriv(zp) - &b_ap * zp;
    let mut ztb_rate = &(&b * &deriv(&ztb)).scale(-1.0) + &(&a1 / zp).scale(-I).map(|z| z + I);
    if state.sigma != 0.0 {
        ztb_rate = &ztb_rate + &capillary_term(zp).scale(state.sigma);
    }
    let zdev_rate = zt - &(&b * zp);

    let raw_holo_residual = zp_rate
        .positive_mode_mass()
        .max(ztb_rate.positive_mode_mass())
        .max(zdev_rate.positive_mode_mass());

    let finish = |f: Field| {
        let f = if filter { dealias_filter(&f) } else { f };
        if project {
            drop_positive_modes(&f)
        } else {
            f
        }
    };
    let rates = StateRates {
        zdev: finish(zdev_rate),
        zp: finish(zp_rate),
        zt: finish(ztb_rate).conj(),
    };
    if !(rates.zdev.is_finite() && rates.zp.is_finite() && rates.zt.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    Ok(RhsEval {
        rates,
        b,
        raw_holo_residual,
    })
}

/// Largest admissible step: `min(Δα'/max|b|, (k + σk³)^{−1/2})` at the
/// largest resolved wavenumber `k`.
pub fn stability_limit(state: &WaveState, filter_on: bool) -> f64 {
    let grid = state.grid();
    let k = grid.max_wavenumber(filter_on);
    let disp = 1.0 / (k + state.sigma * k * k * k).sqrt();
    let bmax = transport_velocity(state).max_abs();
    if bmax > 0.0 {
        disp.min(grid.spacing() / bmax)
    } else {
        disp
    }
}

/// Step size `dt_safety · stability_limit`.
pub fn stable_dt(state: &WaveState, cfg: &StepperConfig) -> f64 {
    cfg.dt_safety * stability_limit(state, cfg.filter_on)
}

/// Per-step diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub dt: f64,
    pub limit: f64,
    /// Largest raw positive-mode mass over the four stages.
    pub raw_holo_residual: f64,
    /// Positive-mode mass of the accepted state.
    pub holo_residual: f64,
    pub min_abs_zp: f64,
}

/// Transport velocities at the four classical RK4 stages.
#[derive(Clone, Debug)]
pub struct StageVelocities {
    pub b: [Field; 4],
}

/// Applies the dealiasing filter and holomorphic projection to a state as
/// configured. Idempotent, so it is a no-op on states produced by [`step_rk4`].
pub fn condition_state(state: &WaveState, cfg: &StepperConfig) -> WaveState {
    let clean = |f: &Field, conj: bool| {
        let mut f = if conj { f.conj() } else { f.clone() };
        if cfg.filter_on {
            f = dealias_filter(&f);
        }
        if cfg.project_each_step {
            f = drop_positive_modes(&f);
        }
        if conj {
            f.conj()
        } else {
            f
        }
    };
    WaveState {
        zdev: clean(&state.zdev, false),
        zp: clean(&state.zp, false),
        zt: clean(&state.zt, true),
        sigma: state.sigma,
        time: state.time,
    }
}

/// One classical RK4 step of size `dt` (negative `dt` integrates backwards).
pub fn step_rk4(state: &WaveState, dt: f64, cfg: &StepperConfig) -> Result<WaveState> {
    Ok(step_rk4_detailed(state, dt, cfg)?.0)
}

pub fn step_rk4_detailed(
    state: &WaveState,
    dt: f64,
    cfg: &StepperConfig,
) -> Result<(WaveState, StepReport, StageVelocities)> {
    cfg.validate()?;
    if !dt.is_finite() {
        return Err(Error::NonFinite("time step"));
    }
    let limit = stability_limit(state, cfg.filter_on);
    if dt.abs() > cfg.dt_safety * limit * (1.0 + 1e-9) {
        return Err(Error::Cfl {
            dt: dt.abs(),
            limit: cfg.dt_safety * limit,
        });
    }
    let s0 = condition_state(state, cfg);
    let r1 = rhs_eulerian(&s0, cfg)?;
    let s1 = s0.axpy(0.5 * dt, &r1.rates);
    let r2 = rhs_eulerian(&s1, cfg)?;
    let s2 = s0.axpy(0.5 * dt, &r2.rates);
    let r3 = rhs_eulerian(&s2, cfg)?;
    let s3 = s0.axpy(dt, &r3.rates);
    let r4 = rhs_eulerian(&s3, cfg)?;
    let combine = |a: &Field, b: &Field, c: &Field, d: &Field| {
        a.zip_map(b, |x, y| x + 2.0 * y)
            .zip_map(c, |x, y| x + 2.0 * y)
            .zip_map(d, |x, y| x + y)
            .scale(dt / 6.0)
    };
    let next = WaveState {
        zdev: &s0.zdev
            + &combine(
                &r1.rates.zdev,
                &r2.rates.zdev,
                &r3.rates.zdev,
                &r4.rates.zdev,
            ),
        zp: &s0.zp + &combine(&r1.rates.zp, &r2.rates.zp, &r3.rates.zp, &r4.rates.zp),
        zt: &s0.zt + &combine(&r1.rates.zt, &r2.rates.zt, &r3.rates.zt, &r4.rates.zt),
        sigma: s0.sigma,
        time: s0.time + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("wave state"));
    }
    let min_abs_zp = next.zp.min_abs();
    if !(min_abs_zp > cfg.degeneracy_floor) {
        return Err(Error::Degenerate(min_abs_zp));
    }
    let holo_residual = (&next.zp - 1.0)
        .positive_mode_mass()
        .max(next.zt_bar().positive_mode_mass());
    if holo_residual > cfg.holo_tolerance {
        return Err(Error::NotHolomorphic {
            mass: holo_residual,
            tol: cfg.holo_tolerance,
        });
    }
    let raw_holo_residual = [&r1, &r2, &r3, &r4]
        .iter()
        .map(|r| r.raw_holo_residual)
        .fold(0.0, f64::max);
    let report = StepReport {
        dt,
        limit,
        raw_holo_residual,
        holo_residual,
        min_abs_zp,
    };
    let stages = StageVelocities {
        b: [r1.b, r2.b, r3.b, r4.b],
    };
    Ok((next, report, stages))
}

/// Advances `h` by one RK4 step of `dh/dt = b(h, t)` with the transport
/// velocities of the four stages of the accompanying state step.
pub fn advance_lagrangian_map(
    map: &MonotoneMap,
    stages: &StageVelocities,
    dt: f64,
    exec: Exec,
) -> Result<MonotoneMap> {
    let [b1, b2, b3, b4] = &stages.b;
    if [b1, b2, b3, b4].iter().all(|b| b.max_abs() == 0.0) {
        return Ok(map.clone());
    }
    let h0 = map.values();
    let vel = |b: &Field, pts: &[f64]| -> Vec<f64> {
        b.eval_real_at(pts, exec).iter().map(|v| v.0).collect()
    };
    let shifted =
        |k: &[f64], c: f64| -> Vec<f64> { h0.iter().zip(k).map(|(h, k)| h + c * k).collect() };
    let k1 = vel(b1, &h0);
    let k2 = vel(b2, &shifted(&k1, 0.5 * dt));
    let k3 = vel(b3, &shifted(&k2, 0.5 * dt));
    let k4 = vel(b4, &shifted(&k3, dt));
    let dev: Vec<f64> = map
        .deviation_real()
        .iter()
        .enumerate()
        .map(|(j, d)| d + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    map.with_deviation(dev)
}

/// [`advance_lagrangian_map`] with a velocity frozen over the step.
pub fn advance_lagrangian_map_frozen(
    map: &MonotoneMap,
    b: &Field,
    dt: f64,
    exec: Exec,
) -> Result<MonotoneMap> {
    let stages = StageVelocities {
        b: [b.clone(), b.clone(), b.clone(), b.clone()],
    };
    advance_lagrangian_map(map, &stages, dt, exec)
}
