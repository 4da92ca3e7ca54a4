use std::fs::{self, File};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crestwave::energies::{energy_single, Family};
use crestwave::initial_data::{
    crest_data, default_depth_ladder, estimate_m, mollify_data, smooth_data, SmoothSpec,
};
use crestwave::pair::{
    fit_loglog, init_pair, run_convergence_study, run_pair as run_pair_core, PairRecord,
    PairRunConfig, StudyPoint, StudyResult,
};
use crestwave::waterwave::{
    compute_derived, read_checkpoint, stable_dt, step_rk4_detailed, taylor_coefficient,
    write_checkpoint, WaveState,
};
use crestwave::{make_grid, Exec};

use crate::config::{DataKind, RunConfig};
use crate::output::{num, write_json, CsvTable};
use crate::CliError;

/// Run-wide settings that come from the command line rather than the file.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub exec: Exec,
}

fn io<T>(r: std::io::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Io)
}

/// Initial data as configured, before any mollification.
pub fn initial_state(cfg: &RunConfig, sigma: f64, seed: u64) -> Result<WaveState, CliError> {
    let d = &cfg.data;
    if d.kind == DataKind::Checkpoint {
        // σ and time come from the checkpoint itself
        let path = d.checkpoint.as_ref().expect("validated");
        let file = io(File::open(path))?;
        return Ok(read_checkpoint(std::io::BufReader::new(file))?);
    }
    let grid = make_grid(cfg.grid.n_points, cfg.grid.length)?;
    let modes = |v: &[[f64; 3]]| -> Vec<(i64, Complex64)> {
        v.iter()
            .map(|[k, re, im]| (*k as i64, Complex64::new(*re, *im)))
            .collect()
    };
    Ok(match d.kind {
        DataKind::Flat => WaveState::flat(&grid, sigma),
        DataKind::Crest => crest_data(&d.crest_spec(), &grid, sigma)?,
        DataKind::Smooth => smooth_data(
            &SmoothSpec {
                log_zp: modes(&d.log_zp),
                zt_bar: modes(&d.zt_bar),
            },
            &grid,
            sigma,
        )?,
        DataKind::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || -> Vec<(i64, Complex64)> {
                (1..=d.random_modes)
                    .map(|k| {
                        let r = d.random_amplitude * rng.gen::<f64>() / k as f64;
                        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                        (-k, Complex64::from_polar(r, phase))
                    })
                    .collect()
            };
            let log_zp = draw();
            let zt_bar = draw();
            smooth_data(&SmoothSpec { log_zp, zt_bar }, &grid, sigma)?
        }
        DataKind::Checkpoint => unreachable!(),
    })
}

fn mollified(base: &WaveState, eps: f64) -> crestwave::Result<WaveState> {
    if eps > 0.0 {
        mollify_data(base, eps)
    } else {
        Ok(base.clone())
    }
}

fn families(cfg: &RunConfig, sigma: f64) -> Vec<Family> {
    if cfg.output.families.is_empty() {
        if sigma == 0.0 {
            vec![Family::Sigma, Family::High, Family::Aux]
        } else {
            vec![Family::Sigma]
        }
    } else {
        cfg.output
            .families
            .iter()
            .map(|f| Family::parse(f).expect("validated"))
            .collect()
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    steps: usize,
    time: f64,
    sigma: f64,
    min_a1: f64,
    status: String,
    final_checkpoint: Option<PathBuf>,
}

fn save_checkpoint(state: &WaveState, path: &Path) -> Result<(), CliError> {
    let file = io(File::create(path))?;
    write_checkpoint(state, std::io::BufWriter::new(file))?;
    Ok(())
}

/// Single-solution run with energy and diagnostic logs.
pub fn simulate(cfg: &RunConfig, inv: &Invocation) -> Result<(), CliError> {
    let dir = &inv.out_dir;
    io(fs::create_dir_all(dir.join("checkpoints")))?;
    let base = initial_state(cfg, cfg.physics.sigma, inv.seed)?;
    let mut state = if cfg.data.kind == DataKind::Checkpoint {
        base
    } else {
        mollified(&base, cfg.data.epsilon)?
    };
    let fams = families(cfg, state.sigma);
    let mut energies = io(CsvTable::create(
        &dir.join("energies.csv"),
        "energies",
        &["step", "time", "family", "component", "value"],
    ))?;
    let mut diag = io(CsvTable::create(
        &dir.join("diagnostics.csv"),
        "diagnostics",
        &[
            "step",
            "time",
            "dt",
            "min_abs_zp",
            "min_a1",
            "holo_residual",
        ],
    ))?;
    let mut record = |step: usize, s: &WaveState| -> Result<(), CliError> {
        for fam in &fams {
            let rep = energy_single(s, *fam)?;
            for (name, v) in &rep.components {
                io(energies.row([
                    step.to_string(),
                    num(s.time),
                    fam.as_str().to_string(),
                    name.to_string(),
                    num(*v),
                ]))?;
            }
        }
        Ok(())
    };
    let min_of = |s: &WaveState| {
        taylor_coefficient(s)
            .real_parts()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };

    let t_end = cfg.physics.t_final;
    let mut min_a1 = min_of(&state);
    let mut steps = 0usize;
    let mut outcome: Result<(), CliError> = record(0, &state);
    while outcome.is_ok() && state.time < t_end && steps < cfg.physics.max_steps {
        let dt = if cfg.output.fixed_dt > 0.0 {
            cfg.output.fixed_dt
        } else {
            stable_dt(&state, &cfg.stepper)
        };
        let remaining = t_end - state.time;
        let (dt, last) = if remaining <= dt * (1.0 + 1e-12) {
            (remaining, true)
        } else {
            (dt, false)
        };
        let (mut next, rep, _) = match step_rk4_detailed(&state, dt, &cfg.stepper) {
            Ok(r) => r,
            Err(e) => {
                outcome = Err(e.into());
                break;
            }
        };
        if last {
            next.time = t_end;
        }
        state = next;
        steps += 1;
        let a1 = min_of(&state);
        min_a1 = min_a1.min(a1);
        outcome = io(diag.row([
            steps.to_string(),
            num(state.time),
            num(dt),
            num(rep.min_abs_zp),
            num(a1),
            num(rep.holo_residual),
        ]));
        if outcome.is_ok() && (steps % cfg.output.record_interval == 0 || last) {
            outcome = record(steps, &state);
        }
        let every = cfg.output.checkpoint_interval;
        if outcome.is_ok() && every > 0 && steps % every == 0 {
            outcome = save_checkpoint(
                &state,
                &dir.join(format!("checkpoints/step_{steps:08}.ckpt")),
            );
        }
    }
    io(energies.finish())?;
    io(diag.finish())?;
    let final_path = dir.join("final.ckpt");
    save_checkpoint(&state, &final_path)?;
    let summary = SimulateSummary {
        steps,
        time: state.time,
        sigma: state.sigma,
        min_a1,
        status: outcome
            .as_ref()
            .err()
            .map_or_else(|| "ok".into(), |e| e.to_string()),
        final_checkpoint: Some(final_path),
    };
    io(write_json(&dir.join("summary.json"), &summary))?;
    outcome
}

fn pair_config(cfg: &RunConfig) -> PairRunConfig {
    PairRunConfig {
        t_end: cfg.physics.t_final,
        record_every: cfg.output.record_interval,
        stepper: cfg.stepper,
        max_steps: cfg.physics.max_steps,
    }
}

const PAIR_COLUMNS: [&str; 10] = [
    "sigma",
    "epsilon",
    "step",
    "time",
    "family",
    "component",
    "value",
    "min_a1",
    "tilde_jacobian_min",
    "tilde_jacobian_max",
];

fn write_pair_records(
    table: &mut CsvTable,
    sigma: f64,
    eps: f64,
    records: &[PairRecord],
) -> Result<(), CliError> {
    for r in records {
        for rep in [&r.e_delta, &r.f_delta] {
            for (name, v) in rep
                .components
                .iter()
                .map(|(n, v)| (n.to_string(), *v))
                .chain([("total".into(), rep.total())])
            {
                io(table.row([
                    num(sigma),
                    num(eps),
                    r.step.to_string(),
                    num(r.time),
                    rep.family.as_str().to_string(),
                    name,
                    num(v),
                    num(r.min_a1_a.min(r.min_a1_b)),
                    num(r.tilde_jacobian_min),
                    num(r.tilde_jacobian_max),
                ]))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PairSummary {
    sigma: f64,
    epsilon: f64,
    steps: usize,
    time: f64,
    min_a1: f64,
    e_delta_initial: f64,
    sup_e_delta: f64,
    sup_f_delta: f64,
    growth_ratio: f64,
    status: String,
}

/// Solution `a` with `physics.sigma` against solution `b` with σ = 0, from identical data.
pub fn pair(cfg: &RunConfig, inv: &Invocation) -> Result<(), CliError> {
    let dir = &inv.out_dir;
    io(fs::create_dir_all(dir))?;
    let base = initial_state(cfg, 0.0, inv.seed)?;
    let data = mollified(&base, cfg.data.epsilon)?;
    let mut a = data.clone();
    a.sigma = cfg.physics.sigma;
    let mut b = data;
    b.sigma = 0.0;
    let out = run_pair_core(init_pair(a, b)?, &pair_config(cfg), inv.exec);
    let mut table = io(CsvTable::create(
        &dir.join("pair_energies.csv"),
        "pair-energies",
        &PAIR_COLUMNS,
    ))?;
    write_pair_records(
        &mut table,
        cfg.physics.sigma,
        cfg.data.epsilon,
        &out.records,
    )?;
    io(table.finish())?;
    let summary = PairSummary {
        sigma: cfg.physics.sigma,
        epsilon: cfg.data.epsilon,
        steps: out.steps,
        time: out.final_pair.time(),
        min_a1: out.min_a1,
        e_delta_initial: out.e_delta_initial(),
        sup_e_delta: out.sup_e_delta(),
        sup_f_delta: out.sup_f_delta(),
        growth_ratio: out.growth_ratio(),
        status: out
            .error
            .as_ref()
            .map_or_else(|| "ok".into(), |e| e.to_string()),
    };
    io(write_json(&dir.join("summary.json"), &summary))?;
    match out.error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn study_points(cfg: &RunConfig) -> Vec<StudyPoint> {
    let s = &cfg.study;
    match s.sigma_ratio {
        Some(r) => s
            .epsilon_list
            .iter()
            .map(|&epsilon| StudyPoint {
                sigma: r * epsilon.powf(1.5),
                epsilon,
            })
            .collect(),
        None => s
            .sigma_list
            .iter()
            .flat_map(|&sigma| {
                s.epsilon_list
                    .iter()
                    .map(move |&epsilon| StudyPoint { sigma, epsilon })
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct StudySummary<'a> {
    all_ok: bool,
    slopes: &'a crestwave::pair::StudySlopes,
    /// max/min of `𝓔_Δ(0)` over successful runs.
    e_delta_0_spread: f64,
    /// max/min of the growth ratio over successful runs.
    growth_spread: f64,
    rows: &'a [crestwave::pair::StudyRow],
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.filter(|x| x.is_finite() && *x > 0.0).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Pair runs over the study grid; reports partial completion instead of stopping.
pub fn sweep(cfg: &RunConfig, inv: &Invocation) -> Result<(), CliError> {
    let dir = &inv.out_dir;
    io(fs::create_dir_all(dir.join("runs")))?;
    let base = initial_state(cfg, 0.0, inv.seed)?;
    let points = study_points(cfg);
    let study: StudyResult = run_convergence_study(
        &points,
        |eps| mollified(&base, eps),
        &pair_config(cfg),
        inv.exec,
    );

    let mut long = io(CsvTable::create(
        &dir.join("study_long.csv"),
        "study-long",
        &PAIR_COLUMNS,
    ))?;
    for (i, (row, out)) in study.rows.iter().zip(&study.outputs).enumerate() {
        let Some(out) = out else { continue };
        let mut table = io(CsvTable::create(
            &dir.join(format!("runs/run_{i:03}.csv")),
            "pair-energies",
            &PAIR_COLUMNS,
        ))?;
        write_pair_records(&mut table, row.sigma, row.epsilon, &out.records)?;
        io(table.finish())?;
        write_pair_records(&mut long, row.sigma, row.epsilon, &out.records)?;
    }
    io(long.finish())?;

    let mut summary = io(CsvTable::create(
        &dir.join("study_summary.csv"),
        "study-summary",
        &[
            "run",
            "sigma",
            "epsilon",
            "e_delta_0",
            "sup_e_delta",
            "sup_f_delta",
            "growth_ratio",
            "steps",
            "min_a1",
            "status",
        ],
    ))?;
    for (i, r) in study.rows.iter().enumerate() {
        io(summary.row([
            format!("{i:03}"),
            num(r.sigma),
            num(r.epsilon),
            num(r.e_delta_0),
            num(r.sup_e_delta),
            num(r.sup_f_delta),
            num(r.growth_ratio),
            r.steps.to_string(),
            num(r.min_a1),
            r.status.clone(),
        ]))?;
    }
    io(summary.finish())?;

    let ok = study.rows.iter().filter(|r| r.status == "ok");
    let report = StudySummary {
        all_ok: study.all_ok(),
        slopes: &study.slopes,
        e_delta_0_spread: spread(ok.clone().map(|r| r.e_delta_0)),
        growth_spread: spread(ok.map(|r| r.growth_ratio)),
        rows: &study.rows,
    };
    io(write_json(&dir.join("study.json"), &report))?;
    if study.all_ok() {
        Ok(())
    } else {
        let failed = study.rows.iter().filter(|r| r.status != "ok").count();
        Err(CliError::Partial(format!(
            "{failed} of {} runs failed",
            study.rows.len()
        )))
    }
}

#[derive(Serialize)]
struct ScalingSummary {
    nu: f64,
    curvature_slope: f64,
    expected_slope: f64,
    rows: Vec<ScalingRow>,
}

#[derive(Serialize)]
struct ScalingRow {
    epsilon: f64,
    curvature_sup: f64,
    energy_sigma: f64,
    m_estimate: f64,
}

/// Curvature, 𝓔_σ and the M estimate of mollified crests over `study.epsilon_list`.
pub fn crest_scaling(cfg: &RunConfig, inv: &Invocation) -> Result<(), CliError> {
    let dir = &inv.out_dir;
    io(fs::create_dir_all(dir))?;
    let spec = cfg.data.crest_spec();
    spec.validate()?;
    let grid = make_grid(cfg.grid.n_points, cfg.grid.length)?;
    let base = crest_data(&spec, &grid, cfg.physics.sigma)?;
    let ladder = default_depth_ladder(6);
    let rows = cfg
        .study
        .epsilon_list
        .iter()
        .map(|&eps| -> Result<ScalingRow, CliError> {
            let s = mollify_data(&base, eps)?;
            let derived = compute_derived(&s, cfg.stepper.degeneracy_floor)?;
            Ok(ScalingRow {
                epsilon: eps,
                curvature_sup: derived.curvature().sup_interp(),
                energy_sigma: energy_single(&s, Family::Sigma)?.total(),
                m_estimate: estimate_m(&s, &ladder, cfg.stepper.holo_tolerance)?.total(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = io(CsvTable::create(
        &dir.join("crest_scaling.csv"),
        "crest-scaling",
        &["epsilon", "curvature_sup", "energy_sigma", "m_estimate"],
    ))?;
    for r in &rows {
        io(table.row([
            num(r.epsilon),
            num(r.curvature_sup),
            num(r.energy_sigma),
            num(r.m_estimate),
        ]))?;
    }
    io(table.finish())?;
    let summary = ScalingSummary {
        nu: spec.nu,
        curvature_slope: fit_loglog(
            &rows
                .iter()
                .map(|r| (r.epsilon, r.curvature_sup))
                .collect::<Vec<_>>(),
        ),
        expected_slope: -spec.nu,
        rows,
    };
    io(write_json(&dir.join("crest_scaling.json"), &summary))?;
    Ok(())
}
