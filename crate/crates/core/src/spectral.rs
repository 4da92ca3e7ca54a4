//! Periodic collocation grid and Fourier-multiplier operators.
//!
//! Fields are sampled at `α_j = j·L/n`. The discrete Fourier pair is
//! `f_j = Σ_k c_k e^{iκ_k α_j}` with `κ_k = 2πk/L` and integer modes
//! `k ∈ {−n/2+1, …, n/2}` stored in FFT order. Holomorphic in the lower
//! half-plane means Fourier support on `k ≤ 0`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Exec;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub struct SpectralGrid {
    n: usize,
    length: f64,
    dealias_cutoff: f64,
    modes: Vec<i64>,
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("dealias_cutoff", &self.dealias_cutoff)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.length == other.length
            && self.dealias_cutoff == other.dealias_cutoff
    }
}

/// Builds a uniform periodic grid with the default 2/3 dealiasing cutoff.
pub fn make_grid(n_points: usize, length: f64) -> Result<Arc<SpectralGrid>> {
    SpectralGrid::new(n_points, length, 2.0 / 3.0)
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64, dealias_cutoff: f64) -> Result<Arc<Self>> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        if !(dealias_cutoff > 0.0 && dealias_cutoff <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias cutoff must lie in (0, 1], got {dealias_cutoff}"
            )));
        }
        let modes: Vec<i64> = (0..n)
            .map(|j| {
                if j <= n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                }
            })
            .collect();
        let wavenumbers = modes
            .iter()
            .map(|&k| 2.0 * PI * k as f64 / length)
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(Arc::new(SpectralGrid {
            n,
            length,
            dealias_cutoff,
            modes,
            wavenumbers,
            fft,
            ifft,
        }))
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_cutoff
    }

    /// Integer mode numbers in FFT order.
    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    /// Physical wavenumbers `2πk/L` in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Largest integer mode kept by the dealiasing filter.
    pub fn dealias_mode(&self) -> i64 {
        (self.dealias_cutoff * (self.n / 2) as f64).floor() as i64
    }

    /// Physical wavenumber bound used by stability estimates.
    pub fn max_wavenumber(&self, filtered: bool) -> f64 {
        let k = if filtered {
            self.dealias_mode()
        } else {
            (self.n / 2) as i64
        };
        2.0 * PI * k as f64 / self.length
    }

    /// Normalized Fourier coefficients `c_k` (FFT order).
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fft.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Samples from normalized coefficients.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.ifft.process(&mut buf);
        buf
    }

    /// Evaluates the trigonometric interpolant with coefficients `coeffs`
    /// at arbitrary real points.
    ///
    /// The Nyquist term is evaluated as `c·cos(κ x)` so real samples give a
    /// real interpolant.
    pub fn eval_coeffs_at(
        &self,
        coeffs: &[Complex64],
        points: &[f64],
        exec: Exec,
    ) -> Vec<Complex64> {
        let n = self.n;
        let half = n / 2;
        let base = 2.0 * PI / self.length;
        exec.map_slice(points, |&x| {
            let theta = base * x;
            let step = Complex64::from_polar(1.0, theta);
            let mut acc = coeffs[0];
            let mut w = ONE;
            for k in 1..half {
                // re-seed periodically to keep the recurrence at rounding level
                if k % 32 == 0 {
                    w = Complex64::from_polar(1.0, theta * k as f64);
                } else {
                    w *= step;
                }
                acc += coeffs[k] * w + coeffs[n - k] * w.conj();
            }
            acc + coeffs[half] * (theta * half as f64).cos()
        })
    }

    /// [`Self::eval_coeffs_at`] for the coefficients of a real field, which
    /// halves the work through `c_{−k} = c̄_k`. Returns the interpolant and
    /// its derivative (Nyquist term excluded from the derivative, as in
    /// [`deriv`]).
    pub fn eval_real_coeffs_at(
        &self,
        coeffs: &[Complex64],
        points: &[f64],
        exec: Exec,
    ) -> Vec<(f64, f64)> {
        let half = self.n / 2;
        let base = 2.0 * PI / self.length;
        exec.map_slice(points, |&x| {
            let theta = base * x;
            let step = Complex64::from_polar(1.0, theta);
            let mut val = 0.0;
            let mut der = 0.0;
            let mut w = ONE;
            for k in 1..half {
                if k % 32 == 0 {
                    w = Complex64::from_polar(1.0, theta * k as f64);
                } else {
                    w *= step;
                }
                let t = coeffs[k] * w;
                val += t.re;
                der -= base * k as f64 * t.im;
            }
            (
                coeffs[0].re + 2.0 * val + coeffs[half].re * (theta * half as f64).cos(),
                2.0 * der,
            )
        })
    }
}

/// Complex samples on a [`SpectralGrid`].
#[derive(Clone)]
pub struct Field {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.values.len())
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn new(grid: &Arc<SpectralGrid>, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    /// Internal constructor for values known to be the right length.
    pub(crate) fn raw(grid: &Arc<SpectralGrid>, values: Vec<Complex64>) -> Field {
        debug_assert_eq!(values.len(), grid.n);
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Field {
        Field::constant(grid, ZERO)
    }

    pub fn constant(grid: &Arc<SpectralGrid>, c: Complex64) -> Field {
        Field::raw(grid, vec![c; grid.n])
    }

    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Field {
        Field::raw(grid, (0..grid.n).map(|j| f(grid.node(j))).collect())
    }

    pub fn from_real(grid: &Arc<SpectralGrid>, values: &[f64]) -> Result<Field> {
        Field::new(
            grid,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Builds a field from Fourier coefficients given as `(mode, coefficient)` pairs.
    pub fn from_modes(grid: &Arc<SpectralGrid>, modes: &[(i64, Complex64)]) -> Field {
        let mut coeffs = vec![ZERO; grid.n];
        for &(k, c) in modes {
            coeffs[mode_index(grid.n, k)] += c;
        }
        Field::from_coeffs(grid, &coeffs)
    }

    pub fn from_coeffs(grid: &Arc<SpectralGrid>, coeffs: &[Complex64]) -> Field {
        Field::raw(grid, grid.inverse(coeffs))
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn coeffs(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    /// Coefficient of integer mode `k`.
    pub fn mode(&self, k: i64) -> Complex64 {
        self.coeffs()[mode_index(self.grid.n, k)]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::raw(&self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Field::raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn conj(&self) -> Field {
        self.map(|z| z.conj())
    }

    pub fn re(&self) -> Field {
        self.map(|z| Complex64::new(z.re, 0.0))
    }

    pub fn im(&self) -> Field {
        self.map(|z| Complex64::new(z.im, 0.0))
    }

    pub fn abs(&self) -> Field {
        self.map(|z| Complex64::new(z.norm(), 0.0))
    }

    pub fn recip(&self) -> Field {
        self.map(|z| z.inv())
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Field {
        let c = c.into();
        self.map(|z| z * c)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(f64::INFINITY, |m, z| m.min(z.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Grid mean, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Discrete `L²` norm with quadrature weight `L/n`.
    pub fn l2(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete `L^p` norm; `p = ∞` gives the grid maximum.
    pub fn lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.grid.spacing() * self.values.iter().map(|z| z.norm().powf(p)).sum::<f64>())
            .powf(1.0 / p)
    }

    pub fn linf(&self) -> f64 {
        self.max_abs()
    }

    /// Supremum of `|f|` over the trigonometric interpolant rather than the
    /// nodes. The largest sampled local maxima are refined by golden-section
    /// search within one cell on either side, which makes the value
    /// spectrally accurate instead of first-order in the grid spacing.
    pub fn sup_interp(&self) -> f64 {
        let n = self.values.len();
        let abs: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        let top = abs.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let mut cands: Vec<usize> = (0..n)
            .filter(|&j| {
                abs[j] >= abs[(j + n - 1) % n] && abs[j] >= abs[(j + 1) % n] && abs[j] >= 0.5 * top
            })
            .collect();
        cands.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]));
        cands.truncate(8);
        let coeffs = self.coeffs();
        let h = self.grid.spacing();
        let f = |x: f64| self.grid.eval_coeffs_at(&coeffs, &[x], Exec::Sequential)[0].norm();
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut best = top;
        for j in cands {
            let (mut a, mut b) = (self.grid.node(j) - h, self.grid.node(j) + h);
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..60 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = f(d);
                }
            }
            best = best.max(fc).max(fd);
        }
        best
    }

    /// `‖f‖²_{Ḣ^{1/2}} = L Σ |κ_k| |c_k|²`, the periodic analog of `∫|ξ||f̂|²dξ`.
    pub fn hhalf_sq(&self) -> f64 {
        let c = self.coeffs();
        self.grid.length
            * c.iter()
                .zip(&self.grid.wavenumbers)
                .map(|(c, k)| k.abs() * c.norm_sqr())
                .sum::<f64>()
    }

    pub fn hhalf(&self) -> f64 {
        self.hhalf_sq().sqrt()
    }

    /// Parseval-side `L²` norm, `(L Σ|c_k|²)^{1/2}`.
    pub fn l2_fourier(&self) -> f64 {
        (self.grid.length * self.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Sobolev `H^s` norm `(L Σ (1+κ²)^s |c_k|²)^{1/2}`.
    pub fn hs(&self, s: f64) -> f64 {
        let c = self.coeffs();
        (self.grid.length
            * c.iter()
                .zip(&self.grid.wavenumbers)
                .map(|(c, k)| (1.0 + k * k).powf(s) * c.norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    /// Fourier mass `Σ|c_k|²` on strictly positive modes, Nyquist included.
    pub fn positive_mode_mass(&self) -> f64 {
        self.coeffs()
            .iter()
            .zip(&self.grid.modes)
            .filter(|(_, &k)| k > 0)
            .map(|(c, _)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Evaluates the trigonometric interpolant at arbitrary points.
    pub fn eval_at(&self, points: &[f64], exec: Exec) -> Vec<Complex64> {
        self.grid.eval_coeffs_at(&self.coeffs(), points, exec)
    }

    /// Interpolant of the real part and its derivative at arbitrary points.
    pub fn eval_real_at(&self, points: &[f64], exec: Exec) -> Vec<(f64, f64)> {
        self.grid
            .eval_real_coeffs_at(&self.re().coeffs(), points, exec)
    }
}

pub(crate) fn mode_index(n: usize, k: i64) -> usize {
    let n_i = n as i64;
    assert!(k > -n_i / 2 && k <= n_i / 2, "mode {k} outside the grid");
    if k >= 0 {
        k as usize
    } else {
        (n_i + k) as usize
    }
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $trait<Field> for Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Field> for Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                (&self).$method(rhs)
            }
        }
        impl $trait<Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                self.$method(&rhs)
            }
        }
        impl $trait<Complex64> for &Field {
            type Output = Field;
            fn $method(self, rhs: Complex64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
        impl $trait<Complex64> for Field {
            type Output = Field;
            fn $method(self, rhs: Complex64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
        impl $trait<f64> for &Field {
            type Output = Field;
            fn $method(self, rhs: f64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
        impl $trait<f64> for Field {
            type Output = Field;
            fn $method(self, rhs: f64) -> Field {
                self.map(|a| a $op rhs)
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);
field_binop!(Mul, mul, *);

impl std::ops::Div<&Field> for &Field {
    type Output = Field;
    fn div(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a / b)
    }
}

impl std::ops::Div<Field> for Field {
    type Output = Field;
    fn div(self, rhs: Field) -> Field {
        (&self).div(&rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|a| -a)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|a| -a)
    }
}

/// Applies the Fourier multiplier `symbol(k, κ)` where `k` is the integer mode
/// and `κ = 2πk/L`.
pub fn apply_multiplier(f: &Field, symbol: impl Fn(i64, f64) -> Complex64) -> Result<Field> {
    let grid = f.grid();
    let mut c = f.coeffs();
    for ((c, &k), &kap) in c.iter_mut().zip(&grid.modes).zip(&grid.wavenumbers) {
        let s = symbol(k, kap);
        if !s.is_finite() {
            return Err(Error::NonFinite("multiplier symbol"));
        }
        *c *= s;
    }
    Ok(Field::from_coeffs(grid, &c))
}

/// Multiplier with a symbol known to be finite.
fn multiply(f: &Field, symbol: impl Fn(i64, f64) -> Complex64) -> Field {
    let grid = f.grid();
    let mut c = f.coeffs();
    for ((c, &k), &kap) in c.iter_mut().zip(&grid.modes).zip(&grid.wavenumbers) {
        *c *= symbol(k, kap);
    }
    Field::from_coeffs(grid, &c)
}

/// Spectral derivative `∂_{α'}`; the Nyquist mode is dropped.
pub fn deriv(f: &Field) -> Field {
    let nyq = (f.grid.n / 2) as i64;
    multiply(f, |k, kap| {
        if k == nyq {
            ZERO
        } else {
            Complex64::new(0.0, kap)
        }
    })
}

/// `∂^m` by repeated spectral differentiation.
pub fn deriv_n(f: &Field, m: usize) -> Field {
    let nyq = (f.grid.n / 2) as i64;
    multiply(f, |k, kap| {
        if k == nyq && m > 0 {
            ZERO
        } else {
            Complex64::new(0.0, kap).powu(m as u32)
        }
    })
}

/// Mean-free antiderivative: inverse of `∂` on modes `k ≠ 0`, zero mean.
pub fn antideriv(f: &Field) -> Field {
    let nyq = (f.grid.n / 2) as i64;
    multiply(f, |k, kap| {
        if k == 0 || k == nyq {
            ZERO
        } else {
            Complex64::new(0.0, -1.0 / kap)
        }
    })
}

/// Hilbert transform, symbol `−sgn(k)` with `sgn(0) = 0`; Nyquist dropped.
pub fn hilbert(f: &Field) -> Field {
    let nyq = (f.grid.n / 2) as i64;
    multiply(f, |k, _| {
        if k == 0 || k == nyq {
            ZERO
        } else if k > 0 {
            -ONE
        } else {
            ONE
        }
    })
}

/// `(𝕀 + ℍ) f`.
pub fn id_plus_hilbert(f: &Field) -> Field {
    f + &hilbert(f)
}

/// `(𝕀 − ℍ) f`.
pub fn id_minus_hilbert(f: &Field) -> Field {
    f - &hilbert(f)
}

/// `[f, ℍ] g = f ℍg − ℍ(f g)`.
pub fn commutator_hilbert(f: &Field, g: &Field) -> Field {
    f * &hilbert(g) - hilbert(&(f * g))
}

/// `|∂|^s`, symbol `|κ|^s` (zero at `k = 0` for `s > 0`).
pub fn abs_deriv_pow(f: &Field, s: f64) -> Field {
    multiply(f, |k, kap| {
        if k == 0 && s > 0.0 {
            ZERO
        } else {
            Complex64::new(kap.abs().powf(s), 0.0)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `ℙ_H`: holomorphic in the lower half-plane, modes `k < 0`.
    Holomorphic,
    /// `ℙ_A`: the complement.
    Antiholomorphic,
}

/// `ℙ_H` keeps `k < 0`, halves `k = 0` and removes `k > 0` (Nyquist included);
/// `ℙ_A = 𝕀 − ℙ_H`.
pub fn project_holomorphic(f: &Field, side: Side) -> Field {
    let p_h = |k: i64| {
        if k < 0 {
            1.0
        } else if k == 0 {
            0.5
        } else {
            0.0
        }
    };
    match side {
        Side::Holomorphic => multiply(f, |k, _| Complex64::new(p_h(k), 0.0)),
        Side::Antiholomorphic => multiply(f, |k, _| Complex64::new(1.0 - p_h(k), 0.0)),
    }
}

/// Removes every strictly positive mode (Nyquist included), keeping the mean.
pub fn drop_positive_modes(f: &Field) -> Field {
    multiply(f, |k, _| if k > 0 { ZERO } else { ONE })
}

/// Convolution with the Poisson kernel, multiplier `e^{−ε|κ|}`.
pub fn poisson_smooth(f: &Field, eps: f64) -> Result<Field> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Poisson smoothing scale must be non-negative, got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok(f.clone());
    }
    Ok(multiply(f, |_, kap| {
        Complex64::new((-eps * kap.abs()).exp(), 0.0)
    }))
}

/// 2/3-rule style filter: zeroes modes with `|k| > cutoff · n/2`.
pub fn dealias_filter(f: &Field) -> Field {
    let kmax = f.grid.dealias_mode();
    multiply(f, |k, _| if k.abs() > kmax { ZERO } else { ONE })
}

/// `L^p` norms of the harmonic extension `f(· + iy)` at each depth `y < 0`.
///
/// `f` must be the boundary value of a function holomorphic in the lower
/// half-plane: its positive-mode mass relative to `‖f‖₂` must stay below
/// `holo_tol`.
pub fn harmonic_extension_norms(
    f: &Field,
    depths: &[f64],
    p: f64,
    holo_tol: f64,
) -> Result<Vec<f64>> {
    check_holomorphic(f, holo_tol)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "norm exponent must be ≥ 1, got {p}"
        )));
    }
    depths
        .iter()
        .map(|&y| Ok(extend_to_depth(f, y)?.lp(p)))
        .collect()
}

/// The extension `f(· + iy)` for `y < 0` via the multiplier `e^{−|κ||y|}`.
pub fn extend_to_depth(f: &Field, y: f64) -> Result<Field> {
    if !(y < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "depth must be negative, got {y}"
        )));
    }
    poisson_smooth(f, -y)
}

pub fn check_holomorphic(f: &Field, tol: f64) -> Result<()> {
    let mass = f.positive_mode_mass();
    let scale = f.l2_fourier() / f.grid.length.sqrt();
    if mass > tol * scale.max(1.0) {
        return Err(Error::NotHolomorphic { mass, tol });
    }
    Ok(())
}
