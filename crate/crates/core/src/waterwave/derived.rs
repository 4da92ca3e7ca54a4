use num_complex::Complex64;

use super::state::{angle_field, WaveState};
use crate::error::{Error, Result};
use crate::spectral::{deriv, id_minus_hilbert, id_plus_hilbert, Field, I, ONE};

/// Per-state auxiliary quantities of the conformal system.
#[derive(Clone, Debug)]
pub struct DerivedFields {
    /// `b = Re(𝕀 − ℍ)(Z_t / Z_{,α'})`.
    pub b: Field,
    /// `b_{α'}` by spectral differentiation of `b`.
    pub b_ap: Field,
    /// `b_{α'}` through the holomorphic-splitting formula.
    pub b_ap_alt: Field,
    /// `A₁ = 1 − Im [Z_t, ℍ] Z̄_{t,α'}`.
    pub a1: Field,
    /// `A₁ = 1 + i Z_t Z̄_{t,α'} − i(𝕀 + ℍ) Re(Z_t Z̄_{t,α'})`.
    pub a1_alt: Field,
    /// `ω = Z_{,α'} / |Z_{,α'}|`.
    pub omega: Field,
    /// `g = Im log Z_{,α'}`.
    pub g: Field,
    /// `Θ = −i(𝕀 + ℍ) D_{α'} ω`.
    pub theta: Field,
    /// `Θ = iω∂(1/Z_{,α'}) − i Re(𝕀 − ℍ)(ω∂(1/Z_{,α'}))`.
    pub theta_alt: Field,
    /// `Z_tt` with the capillary term written as `∂(𝕀+ℍ) Im(D_{α'} ω)`.
    pub ztt: Field,
    /// `Z_tt` with the capillary term written as `σ D_{α'} Θ`.
    pub ztt_alt: Field,
    /// `Z_{t,α'}`.
    pub ztap: Field,
    /// `1 / Z_{,α'}`.
    pub inv_zp: Field,
}

pub(crate) fn real_part(f: &Field) -> Field {
    f.re()
}

/// `b = Re(𝕀 − ℍ)(Z_t/Z_{,α'})`.
pub fn transport_velocity(state: &WaveState) -> Field {
    real_part(&id_minus_hilbert(&(&state.zt / &state.zp)))
}

/// `A₁` via the commutator form.
pub fn taylor_coefficient(state: &WaveState) -> Field {
    let ztb_ap = deriv(&state.zt_bar());
    let comm = crate::spectral::commutator_hilbert(&state.zt, &ztb_ap);
    comm.map(|z| Complex64::new(1.0 - z.im, 0.0))
}

/// `A₁` via `1 + i Z_t Z̄_{t,α'} − i(𝕀+ℍ) Re(Z_t Z̄_{t,α'})`.
pub fn taylor_coefficient_alt(state: &WaveState) -> Field {
    let prod = &state.zt * &deriv(&state.zt_bar());
    let corr = id_plus_hilbert(&prod.re());
    (&prod - &corr).scale(I).map(|z| z + ONE)
}

/// `D_{α'} ω = (1/Z_{,α'}) ∂ω`, purely imaginary in the continuum.
fn d_ap_omega(zp: &Field, omega: &Field) -> Field {
    &deriv(omega) / zp
}

/// Capillary forcing `(1/Z_{,α'}) ∂(𝕀+ℍ) Im(D_{α'} ω)` (without the factor σ).
pub fn capillary_term(zp: &Field) -> Field {
    let omega = zp.map(|z| z / z.norm());
    let im = d_ap_omega(zp, &omega).im();
    &deriv(&id_plus_hilbert(&im)) / zp
}

pub fn compute_derived(state: &WaveState, degeneracy_floor: f64) -> Result<DerivedFields> {
    let min = state.zp.min_abs();
    if !(min > degeneracy_floor) {
        return Err(Error::Degenerate(min));
    }
    let zp = &state.zp;
    let zt = &state.zt;
    let inv_zp = zp.recip();
    let omega = zp.map(|z| z / z.norm());
    let g = angle_field(zp)?;
    let ztap = deriv(zt);

    let b = transport_velocity(state);
    let b_ap = deriv(&b);
    let q_im = (zt * &inv_zp).im();
    let b_ap_alt =
        (&(&ztap * &inv_zp) + &(zt * &deriv(&inv_zp))) - deriv(&id_plus_hilbert(&q_im)).scale(I);
    let b_ap_alt = b_ap_alt.re();

    let a1 = taylor_coefficient(state);
    let a1_alt = taylor_coefficient_alt(state).re();

    let dw = d_ap_omega(zp, &omega);
    let theta = id_plus_hilbert(&dw).scale(-I);
    let w_dinv = &omega * &deriv(&inv_zp);
    let theta_alt = w_dinv.scale(I) - real_part(&id_minus_hilbert(&w_dinv)).scale(I);

    let sigma = state.sigma;
    let gravity = (&a1 / zp).scale(-I).map(|z| z + I);
    let cap = &deriv(&id_plus_hilbert(&dw.im())) / zp;
    let ztt_bar = &gravity + &cap.scale(sigma);
    let ztt_bar_alt = &gravity + &(&deriv(&theta) / zp).scale(sigma);

    Ok(DerivedFields {
        b,
        b_ap,
        b_ap_alt,
        a1,
        a1_alt,
        omega,
        g,
        theta,
        theta_alt,
        ztt: ztt_bar.conj(),
        ztt_alt: ztt_bar_alt.conj(),
        ztap,
        inv_zp,
    })
}

impl DerivedFields {
    /// `Re Θ`, the curvature in conformal coordinates.
    pub fn curvature(&self) -> Field {
        self.theta.re()
    }

    /// `D_{α'} Z_t`.
    pub fn d_ap_zt(&self) -> Field {
        &self.ztap * &self.inv_zp
    }

    pub fn min_a1(&self) -> f64 {
        self.a1
            .real_parts()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `Re Θ` of a state.
pub fn curvature_field(derived: &DerivedFields) -> Field {
    derived.curvature()
}
