//! Co-evolution of a solution with surface tension (`a`) and one without
//! (`b`) from comparable data, with Lagrangian maps, the relative map
//! `h̃ = h_b ∘ h_a⁻¹` and difference quantities `Δf = f_a − f_b ∘ h̃`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bracket::{compose_map_apply, compose_maps, invert_map, MonotoneMap};
use crate::energies::{energy_delta, f_delta_norm, EnergyReport, Pieces};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral::Field;
use crate::waterwave::{
    advance_lagrangian_map, compute_derived, stable_dt, step_rk4_detailed, taylor_coefficient,
    StepReport, StepperConfig, WaveState,
};

#[derive(Clone, Debug)]
pub struct PairState {
    pub state_a: WaveState,
    pub state_b: WaveState,
    pub map_a: MonotoneMap,
    pub map_b: MonotoneMap,
    pub map_a_inv: MonotoneMap,
    pub map_tilde: MonotoneMap,
}

/// Starts both Lagrangian maps at the identity.
pub fn init_pair(data_a: WaveState, data_b: WaveState) -> Result<PairState> {
    if data_a.grid() != data_b.grid() {
        return Err(Error::GridMismatch);
    }
    if data_b.sigma != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "solution b carries zero surface tension, got {}",
            data_b.sigma
        )));
    }
    if data_a.time != data_b.time {
        return Err(Error::InvalidArgument(
            "both solutions must start at the same time".into(),
        ));
    }
    let grid = data_a.grid().clone();
    let id = MonotoneMap::identity(&grid);
    Ok(PairState {
        state_a: data_a,
        state_b: data_b,
        map_a: id.clone(),
        map_b: id.clone(),
        map_a_inv: id.clone(),
        map_tilde: id,
    })
}

impl PairState {
    pub fn time(&self) -> f64 {
        self.state_a.time
    }

    /// `Ũ f = f ∘ h̃`.
    pub fn transfer(&self, f_b: &Field, exec: Exec) -> Result<Field> {
        compose_map_apply(f_b, &self.map_tilde, exec)
    }

    /// `f_a − Ũ f_b`.
    pub fn delta(&self, f_a: &Field, f_b: &Field, exec: Exec) -> Result<Field> {
        Ok(f_a - &self.transfer(f_b, exec)?)
    }

    /// `Δ(h_α ∘ h⁻¹) = ((h_a)_α − (h_b)_α) ∘ h_a⁻¹`.
    pub fn delta_lagrangian_jacobian(&self, exec: Exec) -> Result<Field> {
        let diff = &self.map_a.jacobian() - &self.map_b.jacobian();
        compose_map_apply(&diff, &self.map_a_inv, exec)
    }

    pub fn delta_field(&self, quantity: Quantity, exec: Exec) -> Result<Field> {
        let fa = quantity
            .eval(&self.state_a)
            .map_err(|e| e.in_solution('a'))?;
        let fb = quantity
            .eval(&self.state_b)
            .map_err(|e| e.in_solution('b'))?;
        self.delta(&fa, &fb, exec)
    }

    /// Bounds `(min, max)` of `h̃_α`.
    pub fn tilde_jacobian_bounds(&self) -> (f64, f64) {
        self.map_tilde
            .jacobian()
            .real_parts()
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Fields that have a difference `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    Zt,
    ZtAp,
    ZtBarAp,
    InvZp,
    DInvZp,
    InvZpDInvZp,
    Zpm2DZtBarAp,
    Omega,
    A1,
    B,
    BAp,
    DApZt,
    Theta,
    Ztt,
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::Zt,
        Quantity::ZtAp,
        Quantity::ZtBarAp,
        Quantity::InvZp,
        Quantity::DInvZp,
        Quantity::InvZpDInvZp,
        Quantity::Zpm2DZtBarAp,
        Quantity::Omega,
        Quantity::A1,
        Quantity::B,
        Quantity::BAp,
        Quantity::DApZt,
        Quantity::Theta,
        Quantity::Ztt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Zt => "zt",
            Quantity::ZtAp => "zt_ap",
            Quantity::ZtBarAp => "zt_bar_ap",
            Quantity::InvZp => "inv_zp",
            Quantity::DInvZp => "d_inv_zp",
            Quantity::InvZpDInvZp => "inv_zp_d_inv_zp",
            Quantity::Zpm2DZtBarAp => "zpm2_d_zt_bar_ap",
            Quantity::Omega => "omega",
            Quantity::A1 => "a1",
            Quantity::B => "b",
            Quantity::BAp => "b_ap",
            Quantity::DApZt => "dap_zt",
            Quantity::Theta => "theta",
            Quantity::Ztt => "ztt",
        }
    }

    pub fn eval(self, state: &WaveState) -> Result<Field> {
        let pieces = || Pieces::new(state);
        let derived = || compute_derived(state, crate::energies::WEIGHT_FLOOR);
        Ok(match self {
            Quantity::Zt => state.zt.clone(),
            Quantity::ZtAp => derived()?.ztap,
            Quantity::ZtBarAp => pieces()?.ztb_ap,
            Quantity::InvZp => pieces()?.inv,
            Quantity::DInvZp => pieces()?.d1,
            Quantity::InvZpDInvZp => pieces()?.inv_d1(),
            Quantity::Zpm2DZtBarAp => pieces()?.zpm2_d_ztb_ap(),
            Quantity::Omega => derived()?.omega,
            Quantity::A1 => derived()?.a1,
            Quantity::B => derived()?.b,
            Quantity::BAp => derived()?.b_ap,
            Quantity::DApZt => derived()?.d_ap_zt(),
            Quantity::Theta => derived()?.theta,
            Quantity::Ztt => derived()?.ztt,
        })
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Quantity> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown difference quantity `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairStepReport {
    pub a: StepReport,
    pub b: StepReport,
    pub min_a1_a: f64,
    pub min_a1_b: f64,
}

/// Largest step admissible for both solutions.
pub fn pair_stable_dt(pair: &PairState, cfg: &StepperConfig) -> f64 {
    stable_dt(&pair.state_a, cfg).min(stable_dt(&pair.state_b, cfg))
}

fn min_real(f: &Field) -> f64 {
    f.real_parts().into_iter().fold(f64::INFINITY, f64::min)
}

/// Steps both solutions by `dt`, advances each map with its own transport
/// velocities and recomputes `h̃`.
pub fn co_step(
    pair: &PairState,
    dt: f64,
    cfg: &StepperConfig,
    exec: Exec,
) -> Result<(PairState, PairStepReport)> {
    let (mut next, report) = advance_pair(pair, dt, cfg, exec)?;
    refresh_relative_map(&mut next, exec)?;
    Ok((next, report))
}

/// Recomputes `h_a⁻¹` and `h̃` from the current maps.
fn refresh_relative_map(pair: &mut PairState, exec: Exec) -> Result<()> {
    let inv = invert_map(&pair.map_a, exec)?;
    pair.map_tilde = if pair.map_a.deviation().values() == pair.map_b.deviation().values() {
        MonotoneMap::identity(pair.map_a.grid())
    } else {
        compose_maps(&pair.map_b, &inv, exec)?
    };
    pair.map_a_inv = inv;
    Ok(())
}

/// Steps states and maps, leaving `map_a_inv` and `map_tilde` stale. Both
/// maps are monotonicity-checked here, so `h̃` stays increasing.
fn advance_pair(
    pair: &PairState,
    dt: f64,
    cfg: &StepperConfig,
    exec: Exec,
) -> Result<(PairState, PairStepReport)> {
    let advance = |state: &WaveState, map: &MonotoneMap, tag: char| {
        let (next, report, stages) =
            step_rk4_detailed(state, dt, cfg).map_err(|e| e.in_solution(tag))?;
        let map = advance_lagrangian_map(map, &stages, dt, exec).map_err(|e| e.in_solution(tag))?;
        let a1 = min_real(&taylor_coefficient(&next));
        Ok::<_, Error>((next, map, report, a1))
    };
    let (ra, rb) = exec.join(
        || advance(&pair.state_a, &pair.map_a, 'a'),
        || advance(&pair.state_b, &pair.map_b, 'b'),
    );
    let (state_a, map_a, report_a, min_a1_a) = ra?;
    let (state_b, map_b, report_b, min_a1_b) = rb?;
    let next = PairState {
        state_a,
        state_b,
        map_a,
        map_b,
        map_a_inv: pair.map_a_inv.clone(),
        map_tilde: pair.map_tilde.clone(),
    };
    Ok((
        next,
        PairStepReport {
            a: report_a,
            b: report_b,
            min_a1_a,
            min_a1_b,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairRunConfig {
    pub t_end: f64,
    /// Record energies every this many steps (the final time is always recorded).
    pub record_every: usize,
    pub stepper: StepperConfig,
    pub max_steps: usize,
}

impl Default for PairRunConfig {
    fn default() -> Self {
        PairRunConfig {
            t_end: 0.1,
            record_every: 10,
            stepper: StepperConfig::default(),
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairRecord {
    pub step: usize,
    pub time: f64,
    pub e_delta: EnergyReport,
    pub f_delta: EnergyReport,
    pub min_a1_a: f64,
    pub min_a1_b: f64,
    pub tilde_jacobian_min: f64,
    pub tilde_jacobian_max: f64,
}

#[derive(Debug)]
pub struct PairRunOutput {
    pub records: Vec<PairRecord>,
    pub steps: usize,
    /// Smallest `A₁` seen over all accepted steps of both solutions.
    pub min_a1: f64,
    pub error: Option<Error>,
    pub final_pair: PairState,
}

impl PairRunOutput {
    pub fn e_delta_initial(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.e_delta.total())
    }

    pub fn sup_e_delta(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.e_delta.total())
            .fold(f64::NAN, f64::max)
    }

    pub fn sup_f_delta(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.f_delta.total())
            .fold(f64::NAN, f64::max)
    }

    pub fn growth_ratio(&self) -> f64 {
        self.sup_e_delta() / self.e_delta_initial()
    }
}

fn record(pair: &PairState, step: usize, min_a1: (f64, f64), exec: Exec) -> Result<PairRecord> {
    let (lo, hi) = pair.tilde_jacobian_bounds();
    Ok(PairRecord {
        step,
        time: pair.time(),
        e_delta: energy_delta(pair, exec)?,
        f_delta: f_delta_norm(pair, exec)?,
        min_a1_a: min_a1.0,
        min_a1_b: min_a1.1,
        tilde_jacobian_min: lo,
        tilde_jacobian_max: hi,
    })
}

/// Runs a pair to `t_end` with the shared step `min(dt_a, dt_b)`, the last
/// step shortened to land on `t_end`. A failure stops the run and is kept
/// alongside the records gathered so far.
pub fn run_pair(pair: PairState, cfg: &PairRunConfig, exec: Exec) -> PairRunOutput {
    let a1_of = |s: &WaveState| min_real(&taylor_coefficient(s));
    let mut min_a1 = (a1_of(&pair.state_a), a1_of(&pair.state_b));
    let mut out = PairRunOutput {
        records: Vec::new(),
        steps: 0,
        min_a1: min_a1.0.min(min_a1.1),
        error: None,
        final_pair: pair,
    };
    let every = cfg.record_every.max(1);
    match record(&out.final_pair, 0, min_a1, exec) {
        Ok(r) => out.records.push(r),
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    }
    let t0 = out.final_pair.time();
    while out.final_pair.time() < cfg.t_end && out.steps < cfg.max_steps {
        let remaining = cfg.t_end - out.final_pair.time();
        let dt = pair_stable_dt(&out.final_pair, &cfg.stepper);
        let (dt, last) = if remaining <= dt * (1.0 + 1e-12) {
            (remaining, true)
        } else {
            (dt, false)
        };
        // guard against a zero-length tail from rounding
        if dt <= 1e-14 * (cfg.t_end - t0).abs().max(1.0) {
            break;
        }
        // h̃ is only needed for records, so it is refreshed there
        match advance_pair(&out.final_pair, dt, &cfg.stepper, exec) {
            Ok((mut next, rep)) => {
                if last {
                    next.state_a.time = cfg.t_end;
                    next.state_b.time = cfg.t_end;
                }
                out.final_pair = next;
                out.steps += 1;
                min_a1 = (rep.min_a1_a, rep.min_a1_b);
                out.min_a1 = out.min_a1.min(min_a1.0).min(min_a1.1);
            }
            Err(e) => {
                out.error = Some(e);
                let _ = refresh_relative_map(&mut out.final_pair, exec);
                return out;
            }
        }
        if out.steps % every == 0 || last {
            if let Err(e) = refresh_relative_map(&mut out.final_pair, exec) {
                out.error = Some(e);
                return out;
            }
            match record(&out.final_pair, out.steps, min_a1, exec) {
                Ok(r) => out.records.push(r),
                Err(e) => {
                    out.error = Some(e);
                    return out;
                }
            }
        }
        if last {
            break;
        }
    }
    if out.steps % every != 0 {
        if let Err(e) = refresh_relative_map(&mut out.final_pair, exec) {
            out.error = Some(e);
        }
    }
    out
}

/// One point of a study: surface tension of `a` and the mollification scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub sigma: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub sigma: f64,
    pub epsilon: f64,
    pub e_delta_0: f64,
    pub sup_e_delta: f64,
    pub sup_f_delta: f64,
    pub growth_ratio: f64,
    pub steps: usize,
    pub min_a1: f64,
    pub status: String,
}

/// Log-log fits over the successful runs of a study; `NaN` when fewer than
/// two usable points exist.
#[derive(Clone, Debug, Serialize)]
pub struct StudySlopes {
    /// `log 𝓔_Δ(0)` against `log(σ/ε^{3/2})`.
    pub e_delta_0_vs_scaled_sigma: f64,
    /// `log 𝓔_Δ(0)` against `log σ`.
    pub e_delta_0_vs_sigma: f64,
    /// `log sup_t F_Δ` against `log σ`.
    pub sup_f_delta_vs_sigma: f64,
}

pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    /// Aligned with `rows`; `None` where the run could not be set up.
    pub outputs: Vec<Option<PairRunOutput>>,
    pub slopes: StudySlopes,
}

impl StudyResult {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status == "ok")
    }
}

/// Least-squares slope of `y` against `x`, skipping non-finite points.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<_> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `ln y` against `ln x` over positive pairs.
pub fn fit_loglog(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<_> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    fit_slope(&logs)
}

/// Runs every study point as an independent pair. `make_data(ε)` returns
/// the common initial data (its σ is overwritten). Rows come back sorted by
/// `(σ, ε)` regardless of execution order.
pub fn run_convergence_study<F>(
    points: &[StudyPoint],
    make_data: F,
    cfg: &PairRunConfig,
    exec: Exec,
) -> StudyResult
where
    F: Fn(f64) -> Result<WaveState> + Sync,
{
    let mut sorted = points.to_vec();
    sorted.sort_by(|x, y| {
        x.sigma
            .total_cmp(&y.sigma)
            .then(x.epsilon.total_cmp(&y.epsilon))
    });
    let results: Vec<(StudyPoint, std::result::Result<PairRunOutput, Error>)> =
        exec.map_slice(&sorted, |p| {
            let run = || -> Result<PairRunOutput> {
                let base = make_data(p.epsilon)?;
                let mut a = base.clone();
                a.sigma = p.sigma;
                let mut b = base;
                b.sigma = 0.0;
                Ok(run_pair(init_pair(a, b)?, cfg, exec))
            };
            (*p, run())
        });
    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for (p, res) in results {
        match res {
            Ok(o) => {
                rows.push(StudyRow {
                    sigma: p.sigma,
                    epsilon: p.epsilon,
                    e_delta_0: o.e_delta_initial(),
                    sup_e_delta: o.sup_e_delta(),
                    sup_f_delta: o.sup_f_delta(),
                    growth_ratio: o.growth_ratio(),
                    steps: o.steps,
                    min_a1: o.min_a1,
                    status: o
                        .error
                        .as_ref()
                        .map_or_else(|| "ok".to_string(), |e| e.to_string()),
                });
                outputs.push(Some(o));
            }
            Err(e) => {
                outputs.push(None);
                rows.push(StudyRow {
                    sigma: p.sigma,
                    epsilon: p.epsilon,
                    e_delta_0: f64::NAN,
                    sup_e_delta: f64::NAN,
                    sup_f_delta: f64::NAN,
                    growth_ratio: f64::NAN,
                    steps: 0,
                    min_a1: f64::NAN,
                    status: e.to_string(),
                })
            }
        }
    }
    let ok: Vec<&StudyRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let slopes = StudySlopes {
        e_delta_0_vs_scaled_sigma: fit_loglog(
            &ok.iter()
                .map(|r| (r.sigma / r.epsilon.powf(1.5), r.e_delta_0))
                .collect::<Vec<_>>(),
        ),
        e_delta_0_vs_sigma: fit_loglog(
            &ok.iter()
                .map(|r| (r.sigma, r.e_delta_0))
                .collect::<Vec<_>>(),
        ),
        sup_f_delta_vs_sigma: fit_loglog(
            &ok.iter()
                .map(|r| (r.sigma, r.sup_f_delta))
                .collect::<Vec<_>>(),
        ),
    };
    StudyResult {
        rows,
        outputs,
        slopes,
    }
}
