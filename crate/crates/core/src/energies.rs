//! Weighted norms and the energy functionals used to measure single
//! solutions and the difference of two solutions.
//!
//! All `Ḣ^{1/2}` norms use `‖f‖²_{Ḣ^{1/2}} = L Σ |κ_k| |c_k|²`.

use std::fmt;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pair::PairState;
use crate::spectral::{deriv, deriv_n, Field, ONE};
use crate::waterwave::{angle_field, compute_derived, DerivedFields, WaveState};

/// Floor on `|Z_{,α'}|` below which weights are treated as degenerate.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Sigma,
    High,
    Aux,
    Delta,
    FDelta,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Sigma,
        Family::High,
        Family::Aux,
        Family::Delta,
        Family::FDelta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Sigma => "sigma",
            Family::High => "high",
            Family::Aux => "aux",
            Family::Delta => "delta",
            Family::FDelta => "f_delta",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.as_str() == s)
    }

    /// Component names in report order.
    pub fn component_names(self) -> &'static [&'static str] {
        match self {
            Family::Sigma => &SIGMA_NAMES,
            Family::High => &HIGH_NAMES,
            Family::Aux => &AUX_NAMES,
            Family::Delta => &DELTA_NAMES,
            Family::FDelta => &F_DELTA_NAMES,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const SIGMA_NAMES: [&str; 13] = [
    "d_inv_zp_l2_sq",
    "inv_zp_d_inv_zp_hhalf_sq",
    "sigma_d_theta_hhalf_sq",
    "sigma16_zp12_d_inv_zp_l2_pow6",
    "sigma12_zp12_d_inv_zp_linf_sq",
    "sigma12_zpm12_d2_inv_zp_l2_sq",
    "sigma12_zpm32_d2_inv_zp_hhalf_sq",
    "sigma_zpm1_d3_inv_zp_l2_sq",
    "sigma_zpm2_d3_inv_zp_hhalf_sq",
    "zt_bar_ap_l2_sq",
    "zpm2_d_zt_bar_ap_l2_sq",
    "sigma12_zpm12_d_zt_bar_ap_l2_sq",
    "sigma12_zpm52_d2_zt_bar_ap_l2_sq",
];

const HIGH_NAMES: [&str; 5] = [
    "d_inv_zp_l2_sq",
    "zpm2_d2_inv_zp_l2_sq",
    "zt_bar_ap_l2_sq",
    "zpm2_d_zt_bar_ap_l2_sq",
    "zpm3_d_zt_bar_ap_hhalf_sq",
];

const AUX_NAMES: [&str; 6] = [
    "zp12_d_inv_zp_linf_sq",
    "zpm12_d2_inv_zp_l2_sq",
    "zpm52_d3_inv_zp_l2_sq",
    "zpm12_d_zt_bar_ap_l2_sq",
    "zpm52_d2_zt_bar_ap_l2_sq",
    "zpm72_d2_zt_bar_ap_hhalf_sq",
];

const DELTA_NAMES: [&str; 18] = [
    "delta_omega_linf_sq",
    "map_jac_minus_one_linf_hhalf_sq",
    "abs_dap_map_jac_l2_sq",
    "abs_zp_ratio_minus_one_linf_sq",
    "delta_d_inv_zp_l2_sq",
    "delta_inv_zp_d_inv_zp_hhalf_sq",
    "a_sigma16_zp12_d_inv_zp_l2_pow6",
    "a_sigma12_zp12_d_inv_zp_linf_sq",
    "a_sigma12_zpm12_d2_inv_zp_l2_sq",
    "a_sigma12_zpm32_d2_inv_zp_hhalf_sq",
    "a_sigma_d_theta_hhalf_sq",
    "a_sigma_zpm1_d3_inv_zp_l2_sq",
    "a_sigma_zpm2_d3_inv_zp_hhalf_sq",
    "delta_zt_bar_ap_l2_sq",
    "delta_zpm2_d_zt_bar_ap_l2_sq",
    "a_sigma12_zpm12_d_zt_bar_ap_l2_sq",
    "a_sigma12_zpm52_d2_zt_bar_ap_l2_sq",
    "sigma_times_aux_b",
];

const F_DELTA_NAMES: [&str; 7] = [
    "delta_zt_hhalf",
    "delta_ztt_hhalf",
    "delta_inv_zp_hhalf",
    "delta_jacobian_l2",
    "delta_dap_zt_l2",
    "delta_a1_l2",
    "delta_b_ap_l2",
];

/// Named, ordered energy components.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub family: Family,
    pub time: f64,
    pub components: Vec<(&'static str, f64)>,
}

impl EnergyReport {
    fn new(family: Family, time: f64, values: Vec<f64>) -> EnergyReport {
        let names = family.component_names();
        debug_assert_eq!(names.len(), values.len());
        EnergyReport {
            family,
            time,
            components: names.iter().copied().zip(values).collect(),
        }
    }

    pub fn total(&self) -> f64 {
        self.components.iter().map(|(_, v)| v).sum()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.components.iter().map(|(_, v)| *v).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|(_, v)| v.is_finite())
    }
}

struct Components<'a>(&'a [(&'static str, f64)]);

impl Serialize for Components<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for EnergyReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EnergyReport", 4)?;
        st.serialize_field("family", self.family.as_str())?;
        st.serialize_field("time", &self.time)?;
        st.serialize_field("total", &self.total())?;
        st.serialize_field("components", &Components(&self.components))?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Hhalf,
    Linf,
    /// `‖w‖_∞ + ‖|D_{α'}| w‖₂`.
    W,
    /// `‖f‖_{Ḣ^{1/2}} + (1 + ‖∂(1/|Z_{,α'}|)‖₂) ‖f |Z_{,α'}|‖₂`.
    C,
}

pub fn weighted_norm(f: &Field, kind: NormKind, state: &WaveState) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(f.l2()),
        NormKind::Hhalf => Ok(f.hhalf()),
        NormKind::Linf => Ok(f.sup_interp()),
        NormKind::W => {
            let abs = abs_zp(state)?;
            Ok(f.sup_interp() + (&deriv(f) / &abs).l2())
        }
        NormKind::C => {
            let abs = abs_zp(state)?;
            let w = deriv(&abs.recip()).l2();
            Ok(f.hhalf() + (1.0 + w) * (f * &abs).l2())
        }
    }
}

fn abs_zp(state: &WaveState) -> Result<Field> {
    let min = state.zp.min_abs();
    if !(min > WEIGHT_FLOOR) {
        return Err(Error::Degenerate(min));
    }
    Ok(state.zp.abs())
}

/// Spatial building blocks shared by the energies of one state.
pub struct Pieces {
    pub inv: Field,
    pub d1: Field,
    pub d2: Field,
    pub d3: Field,
    pub ztb_ap: Field,
    pub d_ztb_ap: Field,
    pub d2_ztb_ap: Field,
    log_zp: Field,
}

impl Pieces {
    pub fn new(state: &WaveState) -> Result<Pieces> {
        let min = state.zp.min_abs();
        if !(min > WEIGHT_FLOOR) {
            return Err(Error::Degenerate(min));
        }
        let inv = state.zp.recip();
        let g = angle_field(&state.zp)?;
        let log_zp = state
            .zp
            .zip_map(&g, |z, g| Complex64::new(z.norm().ln(), g.re));
        let ztb_ap = deriv(&state.zt_bar());
        Ok(Pieces {
            d1: deriv(&inv),
            d2: deriv_n(&inv, 2),
            d3: deriv_n(&inv, 3),
            inv,
            d_ztb_ap: deriv(&ztb_ap),
            d2_ztb_ap: deriv_n(&ztb_ap, 2),
            ztb_ap,
            log_zp,
        })
    }

    /// `Z_{,α'}^p` on the continuous branch.
    pub fn pow(&self, p: f64) -> Field {
        self.log_zp.map(|l| (l * p).exp())
    }

    /// `(1/Z_{,α'}) ∂(1/Z_{,α'})`.
    pub fn inv_d1(&self) -> Field {
        &self.inv * &self.d1
    }

    /// `(1/Z_{,α'}²) ∂Z̄_{t,α'}`.
    pub fn zpm2_d_ztb_ap(&self) -> Field {
        &(&self.inv * &self.inv) * &self.d_ztb_ap
    }
}

/// The σ-weighted terms evaluated on one state, in the order they appear
/// inside the difference energy.
fn sigma_terms_first(sigma: f64, p: &Pieces, theta: &Field) -> [f64; 7] {
    if sigma == 0.0 {
        return [0.0; 7];
    }
    let zp12_d1 = &p.pow(0.5) * &p.d1;
    [
        sigma * zp12_d1.l2().powi(6),
        sigma * zp12_d1.sup_interp().powi(2),
        sigma * (&p.pow(-0.5) * &p.d2).l2().powi(2),
        sigma * (&p.pow(-1.5) * &p.d2).hhalf_sq(),
        sigma * sigma * deriv(theta).hhalf_sq(),
        sigma * sigma * (&p.inv * &p.d3).l2().powi(2),
        sigma * sigma * (&(&p.inv * &p.inv) * &p.d3).hhalf_sq(),
    ]
}

fn sigma_terms_second(sigma: f64, p: &Pieces) -> [f64; 2] {
    if sigma == 0.0 {
        return [0.0; 2];
    }
    [
        sigma * (&p.pow(-0.5) * &p.d_ztb_ap).l2().powi(2),
        sigma * (&p.pow(-2.5) * &p.d2_ztb_ap).l2().powi(2),
    ]
}

fn derived_for_energy(state: &WaveState) -> Result<DerivedFields> {
    compute_derived(state, WEIGHT_FLOOR)
}

pub fn energy_sigma(state: &WaveState) -> Result<EnergyReport> {
    let p = Pieces::new(state)?;
    let sigma = state.sigma;
    let theta = if sigma == 0.0 {
        Field::zeros(state.grid())
    } else {
        derived_for_energy(state)?.theta
    };
    let s1 = sigma_terms_first(sigma, &p, &theta);
    let s2 = sigma_terms_second(sigma, &p);
    let values = vec![
        p.d1.l2().powi(2),
        p.inv_d1().hhalf_sq(),
        s1[4],
        s1[0],
        s1[1],
        s1[2],
        s1[3],
        s1[5],
        s1[6],
        p.ztb_ap.l2().powi(2),
        p.zpm2_d_ztb_ap().l2().powi(2),
        s2[0],
        s2[1],
    ];
    Ok(EnergyReport::new(Family::Sigma, state.time, values))
}

pub fn energy_high(state: &WaveState) -> Result<EnergyReport> {
    let p = Pieces::new(state)?;
    let inv2 = &p.inv * &p.inv;
    let values = vec![
        p.d1.l2().powi(2),
        (&inv2 * &p.d2).l2().powi(2),
        p.ztb_ap.l2().powi(2),
        (&inv2 * &p.d_ztb_ap).l2().powi(2),
        (&(&inv2 * &p.inv) * &p.d_ztb_ap).hhalf_sq(),
    ];
    Ok(EnergyReport::new(Family::High, state.time, values))
}

pub fn energy_aux(state: &WaveState) -> Result<EnergyReport> {
    let p = Pieces::new(state)?;
    let zpm52 = p.pow(-2.5);
    let values = vec![
        (&p.pow(0.5) * &p.d1).sup_interp().powi(2),
        (&p.pow(-0.5) * &p.d2).l2().powi(2),
        (&zpm52 * &p.d3).l2().powi(2),
        (&p.pow(-0.5) * &p.d_ztb_ap).l2().powi(2),
        (&zpm52 * &p.d2_ztb_ap).l2().powi(2),
        (&p.pow(-3.5) * &p.d2_ztb_ap).hhalf_sq(),
    ];
    Ok(EnergyReport::new(Family::Aux, state.time, values))
}

/// Difference energy of a pair, solution `a` carrying σ and `b` σ = 0.
pub fn energy_delta(pair: &PairState, exec: Exec) -> Result<EnergyReport> {
    let a = &pair.state_a;
    let b = &pair.state_b;
    let pa = Pieces::new(a).map_err(|e| e.in_solution('a'))?;
    let pb = Pieces::new(b).map_err(|e| e.in_solution('b'))?;
    let sigma = a.sigma;
    let delta = |fa: &Field, fb: &Field| pair.delta(fa, fb, exec);

    let omega_a = a.zp.map(|z| z / z.norm());
    let omega_b = b.zp.map(|z| z / z.norm());
    let jac = pair.map_tilde.jacobian();
    let jac1 = &jac - ONE;
    let abs_a = a.zp.abs();
    let ratio = &abs_a / &pair.transfer(&b.zp.abs(), exec)?;

    let theta_a = if sigma == 0.0 {
        Field::zeros(a.grid())
    } else {
        derived_for_energy(a).map_err(|e| e.in_solution('a'))?.theta
    };
    let s1 = sigma_terms_first(sigma, &pa, &theta_a);
    let s2 = sigma_terms_second(sigma, &pa);
    let coupling = if sigma == 0.0 {
        0.0
    } else {
        sigma * energy_aux(b).map_err(|e| e.in_solution('b'))?.total()
    };

    let values = vec![
        delta(&omega_a, &omega_b)?.sup_interp().powi(2),
        (jac1.sup_interp() + jac1.hhalf()).powi(2),
        (&deriv(&jac1) / &abs_a).l2().powi(2),
        (&ratio - ONE).sup_interp().powi(2),
        delta(&pa.d1, &pb.d1)?.l2().powi(2),
        delta(&pa.inv_d1(), &pb.inv_d1())?.hhalf_sq(),
        s1[0],
        s1[1],
        s1[2],
        s1[3],
        s1[4],
        s1[5],
        s1[6],
        delta(&pa.ztb_ap, &pb.ztb_ap)?.l2().powi(2),
        delta(&pa.zpm2_d_ztb_ap(), &pb.zpm2_d_ztb_ap())?
            .l2()
            .powi(2),
        s2[0],
        s2[1],
        coupling,
    ];
    Ok(EnergyReport::new(Family::Delta, pair.time(), values))
}

/// Uniqueness-grade difference norm, written in the conformal frame of `a`.
pub fn f_delta_norm(pair: &PairState, exec: Exec) -> Result<EnergyReport> {
    let a = &pair.state_a;
    let b = &pair.state_b;
    let da = derived_for_energy(a).map_err(|e| e.in_solution('a'))?;
    let db = derived_for_energy(b).map_err(|e| e.in_solution('b'))?;
    let delta = |fa: &Field, fb: &Field| pair.delta(fa, fb, exec);
    let values = vec![
        delta(&a.zt, &b.zt)?.hhalf(),
        delta(&da.ztt, &db.ztt)?.hhalf(),
        delta(&da.inv_zp, &db.inv_zp)?.hhalf(),
        pair.delta_lagrangian_jacobian(exec)?.l2(),
        delta(&da.d_ap_zt(), &db.d_ap_zt())?.l2(),
        delta(&da.a1, &db.a1)?.l2(),
        delta(&da.b_ap, &db.b_ap)?.l2(),
    ];
    Ok(EnergyReport::new(Family::FDelta, pair.time(), values))
}

/// Single-solution energy by family.
pub fn energy_single(state: &WaveState, family: Family) -> Result<EnergyReport> {
    match family {
        Family::Sigma => energy_sigma(state),
        Family::High => energy_high(state),
        Family::Aux => energy_aux(state),
        Family::Delta | Family::FDelta => Err(Error::InvalidArgument(format!(
            "energy family {family} needs a pair of solutions"
        ))),
    }
}
