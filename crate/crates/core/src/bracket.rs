//! Commutators, triple brackets, monotone maps and the composed Hilbert
//! operators `𝓗 = Ũ ℍ Ũ⁻¹` and `𝓗̃ f = 𝓗(f / h̃_α)`.
//!
//! On the periodic domain the line kernels `1/(α−β)` and `1/(α−β)²` become
//! `(π/L)·cot(π(α−β)/L)` and `(π/L)²/sin²(π(α−β)/L)`, which are exactly the
//! sums over periodic images.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral::{self, deriv, hilbert, make_grid, Field, SpectralGrid, ZERO};

/// Minimum admissible map Jacobian.
pub const MIN_JACOBIAN: f64 = 1e-6;

/// `[f, ℍ] ∂g = f ℍ(∂g) − ℍ(f ∂g)`.
pub fn commutator_bracket(f: &Field, g: &Field) -> Field {
    spectral::commutator_hilbert(f, &deriv(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityRule {
    /// Keep every node; the removable diagonal gets its limit value.
    DiagonalLimit,
    /// Skip the diagonal and use nodes of opposite parity with double weight.
    AlternatePoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketKernelConfig {
    pub singularity_rule: SingularityRule,
    pub quadrature_tolerance: f64,
}

impl Default for BracketKernelConfig {
    fn default() -> Self {
        BracketKernelConfig {
            singularity_rule: SingularityRule::DiagonalLimit,
            quadrature_tolerance: 1e-8,
        }
    }
}

impl BracketKernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quadrature_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerance must be positive, got {}",
                self.quadrature_tolerance
            )));
        }
        Ok(())
    }
}

/// Periodic triple bracket
/// `[f₁,f₂;f₃](α) = (1/iπ) ∫ Δf₁ Δf₂ f₃(β) (π/L)²/sin²(π(α−β)/L) dβ`.
pub fn triple_bracket_periodic(
    f1: &Field,
    f2: &Field,
    f3: &Field,
    cfg: &BracketKernelConfig,
    exec: Exec,
) -> Result<Field> {
    cfg.validate()?;
    let grid = f1.grid().clone();
    let n = grid.n_points();
    let h = grid.spacing();
    let c = PI / grid.length();
    let kern: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                c * c / (c * m as f64 * h).sin().powi(2)
            }
        })
        .collect();
    let (a, b, w) = (f1.values(), f2.values(), f3.values());
    let d1 = deriv(f1);
    let d2 = deriv(f2);
    let (da, db) = (d1.values(), d2.values());
    let rule = cfg.singularity_rule;
    let pref = Complex64::new(0.0, -1.0 / PI);
    let out = exec.map_range(n, |i| {
        let mut acc = ZERO;
        match rule {
            SingularityRule::DiagonalLimit => {
                for j in 0..n {
                    if j == i {
                        acc += da[i] * db[i] * w[i];
                    } else {
                        let m = (i + n - j) % n;
                        acc += (a[i] - a[j]) * (b[i] - b[j]) * w[j] * kern[m];
                    }
                }
                acc * h * pref
            }
            SingularityRule::AlternatePoint => {
                let mut j = (i + 1) % n;
                for _ in 0..n / 2 {
                    let m = (i + n - j) % n;
                    acc += (a[i] - a[j]) * (b[i] - b[j]) * w[j] * kern[m];
                    j = (j + 2) % n;
                }
                acc * (2.0 * h) * pref
            }
        }
    });
    Ok(Field::raw(&grid, out))
}

/// Double-sum form of `‖f‖²_{Ḣ^{1/2}}`:
/// `(1/2π) ∬ |f(α)−f(β)|² (π/L)²/sin²(π(α−β)/L) dα dβ`.
pub fn hhalf_double_sum(f: &Field, exec: Exec) -> f64 {
    let grid = f.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let c = PI / grid.length();
    let v = f.values();
    let d = deriv(f);
    let dv = d.values();
    let rows = exec.map_range(n, |i| {
        let mut acc = 0.0;
        for j in 0..n {
            if j == i {
                acc += dv[i].norm_sqr();
            } else {
                let s = (c * (i as f64 - j as f64) * h).sin();
                acc += (v[i] - v[j]).norm_sqr() * c * c / (s * s);
            }
        }
        acc
    });
    rows.iter().sum::<f64>() * h * h / (2.0 * PI)
}

/// Uniform window `[a, b)` on the real line for the line-quadrature oracle.
#[derive(Clone, Debug)]
pub struct LineWindow {
    start: f64,
    grid: Arc<SpectralGrid>,
}

impl LineWindow {
    pub fn new(start: f64, end: f64, resolution: usize) -> Result<LineWindow> {
        if resolution < 512 {
            return Err(Error::InvalidArgument(format!(
                "oracle resolution must be at least 512, got {resolution}"
            )));
        }
        if !(end > start) {
            return Err(Error::InvalidArgument("empty oracle window".into()));
        }
        Ok(LineWindow {
            start,
            grid: make_grid(resolution, end - start)?,
        })
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes().iter().map(|x| x + self.start).collect()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Samples `f` on the window, rejecting functions that do not vanish at the edges.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Result<Field> {
        let field = Field::from_fn(&self.grid, |x| f(x + self.start));
        let scale = field.max_abs().max(1.0);
        let end = self.start + self.grid.length();
        let edge = f(self.start).norm().max(f(end).norm());
        if edge > 1e-13 * scale {
            return Err(Error::InvalidArgument(format!(
                "support touches the oracle window edge (|f| = {edge:.3e} there)"
            )));
        }
        Ok(field)
    }
}

/// Line triple bracket by trapezoid quadrature with the removable diagonal.
pub fn triple_bracket_line_oracle(
    window: &LineWindow,
    f1: impl Fn(f64) -> Complex64,
    f2: impl Fn(f64) -> Complex64,
    f3: impl Fn(f64) -> Complex64,
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let a = window.sample(f1)?;
    let b = window.sample(f2)?;
    let w = window.sample(f3)?;
    let (da, db) = (deriv(&a), deriv(&b));
    let h = window.spacing();
    let n = a.len();
    let (av, bv, wv, dav, dbv) = (a.values(), b.values(), w.values(), da.values(), db.values());
    let pref = Complex64::new(0.0, -1.0 / PI);
    Ok(exec.map_range(n, |i| {
        let mut acc = ZERO;
        for j in 0..n {
            if j == i {
                acc += dav[i] * dbv[i] * wv[i];
            } else {
                let x = (i as f64 - j as f64) * h;
                acc += (av[i] - av[j]) * (bv[i] - bv[j]) * wv[j] / (x * x);
            }
        }
        acc * h * pref
    }))
}

/// Line commutator `[f, ℍ] g' (α) = (1/iπ) ∫ (f(α)−f(β))/(α−β) g'(β) dβ`,
/// with `g` supplied directly as the integrand `g'`.
pub fn commutator_line_oracle(
    window: &LineWindow,
    f: impl Fn(f64) -> Complex64,
    gp: impl Fn(f64) -> Complex64,
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let a = window.sample(f)?;
    let w = window.sample(gp)?;
    let da = deriv(&a);
    let h = window.spacing();
    let n = a.len();
    let (av, wv, dav) = (a.values(), w.values(), da.values());
    let pref = Complex64::new(0.0, -1.0 / PI);
    Ok(exec.map_range(n, |i| {
        let mut acc = ZERO;
        for j in 0..n {
            if j == i {
                acc += dav[i] * wv[i];
            } else {
                let x = (i as f64 - j as f64) * h;
                acc += (av[i] - av[j]) / x * wv[j];
            }
        }
        acc * h * pref
    }))
}

/// Derivative of the line commutator, `∂_α [f, ℍ] g'`, by direct quadrature
/// of the differentiated kernel.
pub fn commutator_derivative_line_oracle(
    window: &LineWindow,
    f: impl Fn(f64) -> Complex64,
    gp: impl Fn(f64) -> Complex64,
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let a = window.sample(f)?;
    let w = window.sample(gp)?;
    let da = deriv(&a);
    let dda = deriv(&da);
    let h = window.spacing();
    let n = a.len();
    let (av, wv, dav, ddav) = (a.values(), w.values(), da.values(), dda.values());
    let pref = Complex64::new(0.0, -1.0 / PI);
    Ok(exec.map_range(n, |i| {
        let mut acc = ZERO;
        for j in 0..n {
            if j == i {
                acc += ddav[i] * 0.5 * wv[i];
            } else {
                let x = (i as f64 - j as f64) * h;
                acc += (dav[i] * x - (av[i] - av[j])) / (x * x) * wv[j];
            }
        }
        acc * h * pref
    }))
}

/// Increasing map `h` with `h(α + L) = h(α) + L`, stored as the periodic
/// deviation `h(α) − α` at the grid nodes.
#[derive(Clone, Debug)]
pub struct MonotoneMap {
    deviation: Field,
    identity: bool,
}

impl MonotoneMap {
    pub fn identity(grid: &Arc<SpectralGrid>) -> MonotoneMap {
        MonotoneMap {
            deviation: Field::zeros(grid),
            identity: true,
        }
    }

    pub fn from_deviation(grid: &Arc<SpectralGrid>, deviation: &[f64]) -> Result<MonotoneMap> {
        let field = Field::from_real(grid, deviation)?;
        let map = MonotoneMap {
            identity: deviation.iter().all(|&d| d == 0.0),
            deviation: field,
        };
        map.check()?;
        Ok(map)
    }

    /// Samples `h` at the grid nodes.
    pub fn from_fn(grid: &Arc<SpectralGrid>, h: impl Fn(f64) -> f64) -> Result<MonotoneMap> {
        let dev: Vec<f64> = grid.nodes().iter().map(|&x| h(x) - x).collect();
        MonotoneMap::from_deviation(grid, &dev)
    }

    fn check(&self) -> Result<()> {
        let min_slope = self
            .jacobian_real()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if !(min_slope >= MIN_JACOBIAN) {
            return Err(Error::NonMonotone { min_slope });
        }
        let grid = self.grid();
        let vals = self.values();
        let n = vals.len();
        for j in 0..n {
            let next = if j + 1 < n {
                vals[j + 1]
            } else {
                vals[0] + grid.length()
            };
            if !(next > vals[j]) {
                return Err(Error::NonMonotone {
                    min_slope: (next - vals[j]) / grid.spacing(),
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.deviation.grid()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn deviation(&self) -> &Field {
        &self.deviation
    }

    pub fn deviation_real(&self) -> Vec<f64> {
        self.deviation.real_parts()
    }

    /// `h(α_j)`.
    pub fn values(&self) -> Vec<f64> {
        let grid = self.grid().clone();
        self.deviation
            .values()
            .iter()
            .enumerate()
            .map(|(j, d)| grid.node(j) + d.re)
            .collect()
    }

    /// `h_α` as a real field.
    pub fn jacobian(&self) -> Field {
        deriv(&self.deviation.re()).map(|z| Complex64::new(1.0 + z.re, 0.0))
    }

    fn jacobian_real(&self) -> Vec<f64> {
        self.jacobian().real_parts()
    }

    pub fn min_jacobian(&self) -> f64 {
        self.jacobian_real()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `h(x)` at arbitrary points via the interpolated deviation.
    pub fn eval(&self, points: &[f64], exec: Exec) -> Vec<f64> {
        if self.identity {
            return points.to_vec();
        }
        self.deviation
            .eval_real_at(points, exec)
            .iter()
            .zip(points)
            .map(|(d, x)| x + d.0)
            .collect()
    }

    /// Replaces the deviation, re-checking monotonicity.
    pub fn with_deviation(&self, deviation: Vec<f64>) -> Result<MonotoneMap> {
        MonotoneMap::from_deviation(self.grid(), &deviation)
    }
}

/// `U_h f = f ∘ h` by trigonometric interpolation at the map points.
pub fn compose_map_apply(f: &Field, map: &MonotoneMap, exec: Exec) -> Result<Field> {
    if map.grid().n_points() != f.len() {
        return Err(Error::GridMismatch);
    }
    if map.is_identity() {
        return Ok(f.clone());
    }
    let pts = map.values();
    Ok(Field::raw(f.grid(), f.eval_at(&pts, exec)))
}

/// Inverse map by safeguarded Newton iteration on the interpolated deviation.
///
/// Value and slope come from one pass over the coefficients. The bracket
/// `target ± bound` is only consulted when a Newton step misbehaves; should it
/// turn out not to contain the root, it is widened by checked evaluations.
pub fn invert_map(map: &MonotoneMap, exec: Exec) -> Result<MonotoneMap> {
    if map.is_identity() {
        return Ok(map.clone());
    }
    let grid = map.grid().clone();
    let coeffs = map.deviation().re().coeffs();
    let bound = map.deviation().max_abs() * 1.5 + 1e-12;
    let length = grid.length();
    let tol = 4.0 * f64::EPSILON * length;
    let eval = |x: f64| grid.eval_real_coeffs_at(&coeffs, &[x], Exec::Sequential)[0];
    let roots = exec.map_range(grid.n_points(), |j| {
        let target = grid.node(j);
        let mut lo = target - bound;
        let mut hi = target + bound;
        let mut checked = false;
        let mut x = target - eval(target).0;
        for _ in 0..200 {
            let (d, dd) = eval(x);
            let r = x + d - target;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
            let mut next = x - r / (1.0 + dd);
            if !(next > lo && next < hi) {
                if !checked {
                    while lo + eval(lo).0 - target > 0.0 {
                        lo -= bound.max(1e-3);
                    }
                    while hi + eval(hi).0 - target < 0.0 {
                        hi += bound.max(1e-3);
                    }
                    checked = true;
                }
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= tol || hi - lo <= tol {
                break;
            }
        }
        x - target
    });
    MonotoneMap::from_deviation(&grid, &roots)
}

/// `h̃ = h_b ∘ h_a⁻¹`. Bitwise-equal maps give the exact identity.
pub fn compose_maps(h_b: &MonotoneMap, h_a_inv: &MonotoneMap, exec: Exec) -> Result<MonotoneMap> {
    let grid = h_b.grid().clone();
    if h_a_inv.is_identity() {
        return Ok(h_b.clone());
    }
    let y: Vec<f64> = h_a_inv.values();
    let hb_y = h_b.eval(&y, exec);
    let dev: Vec<f64> = hb_y
        .iter()
        .enumerate()
        .map(|(j, v)| v - grid.node(j))
        .collect();
    MonotoneMap::from_deviation(&grid, &dev)
}

/// `h̃ = h_b ∘ h_a⁻¹`, with the identity returned whenever both maps coincide bitwise.
pub fn relative_map(h_a: &MonotoneMap, h_b: &MonotoneMap, exec: Exec) -> Result<MonotoneMap> {
    if h_a.deviation().values() == h_b.deviation().values() {
        return Ok(MonotoneMap::identity(h_a.grid()));
    }
    let inv = invert_map(h_a, exec)?;
    compose_maps(h_b, &inv, exec)
}

/// `𝓗 f = Ũ ℍ Ũ⁻¹ f` for `Ũ = U_{h̃}`.
pub fn hcal_apply(f: &Field, map: &MonotoneMap, exec: Exec) -> Result<Field> {
    if map.is_identity() {
        return Ok(hilbert(f));
    }
    let inv = invert_map(map, exec)?;
    hcal_apply_with_inverse(f, map, &inv, exec)
}

/// [`hcal_apply`] with a precomputed inverse map.
pub fn hcal_apply_with_inverse(
    f: &Field,
    map: &MonotoneMap,
    inverse: &MonotoneMap,
    exec: Exec,
) -> Result<Field> {
    if map.is_identity() {
        return Ok(hilbert(f));
    }
    let pulled = compose_map_apply(f, inverse, exec)?;
    compose_map_apply(&hilbert(&pulled), map, exec)
}

/// `𝓗̃ f = 𝓗(f / h̃_α)`, i.e. the kernel `1/(h̃(α) − h̃(β))` without the Jacobian.
pub fn htilcal_apply(f: &Field, map: &MonotoneMap, exec: Exec) -> Result<Field> {
    let jac = map.jacobian();
    let min = map.min_jacobian();
    if min < MIN_JACOBIAN {
        return Err(Error::NonMonotone { min_slope: min });
    }
    hcal_apply(&(f / &jac), map, exec)
}

/// Direct periodic quadrature of
/// `(1/iL) p.v.∫ h̃_β f(β) cot(π(h̃(α) − h̃(β))/L) dβ` with alternate-point nodes.
pub fn hcal_quadrature(f: &Field, map: &MonotoneMap, exec: Exec) -> Field {
    let grid = f.grid().clone();
    let n = grid.n_points();
    let h = grid.spacing();
    let c = PI / grid.length();
    let hv = map.values();
    let jac = map.jacobian();
    let g: Vec<Complex64> = f
        .values()
        .iter()
        .zip(jac.values())
        .map(|(a, b)| a * b.re)
        .collect();
    let pref = Complex64::new(0.0, -2.0 * h / grid.length());
    let out = exec.map_range(n, |i| {
        let mut acc = ZERO;
        let mut j = (i + 1) % n;
        for _ in 0..n / 2 {
            acc += g[j] / (c * (hv[i] - hv[j])).tan();
            j = (j + 2) % n;
        }
        acc * pref
    });
    Field::raw(&grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, I, ONE};

    fn grid(n: usize) -> Arc<SpectralGrid> {
        make_grid(n, 2.0 * PI).unwrap()
    }

    fn wavy(grid: &Arc<SpectralGrid>, amp: f64) -> MonotoneMap {
        MonotoneMap::from_fn(grid, |x| x + amp * (x.sin() + 0.3 * (2.0 * x + 0.4).cos())).unwrap()
    }

    #[test]
    fn commutator_examples() {
        let g = grid(64);
        let f = Field::from_fn(&g, |x| Complex64::from_polar(1.0, x));
        let h = Field::from_fn(&g, |x| Complex64::from_polar(1.0, -x));
        let c = commutator_bracket(&f, &h);
        assert!(c.max_diff(&Field::constant(&g, -I)) < 1e-13);
        let k = Field::constant(&g, Complex64::new(2.5, -1.0));
        assert!(commutator_bracket(&k, &h).max_abs() < 1e-13);
        let p = Field::from_modes(&g, &[(-1, ONE), (-3, Complex64::new(0.2, 0.1))]);
        let q = Field::from_modes(&g, &[(-2, ONE), (-5, Complex64::new(0.0, 0.7))]);
        assert!(commutator_bracket(&p, &q).max_abs() < 1e-12);
    }

    #[test]
    fn triple_bracket_trivial_cases() {
        let g = grid(64);
        let cfg = BracketKernelConfig::default();
        let f = Field::from_fn(&g, |x| Complex64::new(x.sin(), x.cos() * 0.2));
        let c = Field::constant(&g, ONE);
        let z = Field::zeros(&g);
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert!(
                triple_bracket_periodic(&c, &f, &f, &cfg, exec)
                    .unwrap()
                    .max_abs()
                    < 1e-14
            );
            assert!(
                triple_bracket_periodic(&f, &f, &z, &cfg, exec)
                    .unwrap()
                    .max_abs()
                    == 0.0
            );
        }
        let bad = BracketKernelConfig {
            quadrature_tolerance: 0.0,
            ..cfg
        };
        assert!(triple_bracket_periodic(&f, &f, &f, &bad, Exec::Sequential).is_err());
    }

    #[test]
    fn triple_bracket_rules_agree() {
        let g = grid(128);
        let f1 = Field::from_fn(&g, |x| Complex64::new((x.sin()).exp(), 0.0));
        let f2 = Field::from_fn(&g, |x| Complex64::new(x.cos(), (2.0 * x).sin()));
        let f3 = Field::from_fn(&g, |x| Complex64::new(1.0 / (2.0 + x.cos()), 0.0));
        let diag = triple_bracket_periodic(
            &f1,
            &f2,
            &f3,
            &BracketKernelConfig::default(),
            Exec::Parallel,
        )
        .unwrap();
        let alt = triple_bracket_periodic(
            &f1,
            &f2,
            &f3,
            &BracketKernelConfig {
                singularity_rule: SingularityRule::AlternatePoint,
                quadrature_tolerance: 1e-8,
            },
            Exec::Parallel,
        )
        .unwrap();
        assert!(diag.max_diff(&alt) < 1e-10, "{}", diag.max_diff(&alt));
    }

    #[test]
    fn triple_bracket_single_modes() {
        // [e^{iα}, e^{iα}; 1]: (e^{iα}−e^{iβ})² / sin² kernel, integrate by modes
        // (e^{ia}-e^{ib})^2 / (4 sin^2((a-b)/2)) = -e^{i(a+b)}, so the bracket is
        // (1/iπ)·∫ −e^{i(α+β)} dβ = 0 for the mean of e^{iβ}.
        let g = grid(64);
        let e = Field::from_fn(&g, |x| Complex64::from_polar(1.0, x));
        let one = Field::constant(&g, ONE);
        let r = triple_bracket_periodic(
            &e,
            &e,
            &one,
            &BracketKernelConfig::default(),
            Exec::Sequential,
        )
        .unwrap();
        assert!(r.max_abs() < 1e-12);
        // with f3 = e^{-iβ}: (1/iπ)·(−e^{iα})·2π = 2i e^{iα}
        let em = e.conj();
        let r = triple_bracket_periodic(
            &e,
            &e,
            &em,
            &BracketKernelConfig::default(),
            Exec::Sequential,
        )
        .unwrap();
        assert!(r.max_diff(&e.scale(Complex64::new(0.0, 2.0))) < 1e-12);
    }

    #[test]
    fn hhalf_double_sum_matches_fourier() {
        let g = grid(128);
        let f = Field::from_fn(&g, |x| Complex64::new((x.sin()).exp(), (3.0 * x).cos()));
        let a = hhalf_double_sum(&f, Exec::Parallel);
        let b = f.hhalf_sq();
        assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    }

    #[test]
    fn map_identity_and_shift() {
        let g = grid(64);
        let f = Field::from_fn(&g, |x| Complex64::new(x.sin(), (2.0 * x).cos()));
        let id = MonotoneMap::identity(&g);
        assert!(
            compose_map_apply(&f, &id, Exec::Sequential)
                .unwrap()
                .max_diff(&f)
                == 0.0
        );
        let s = 0.37;
        let shift = MonotoneMap::from_fn(&g, |x| x + s).unwrap();
        let e3 = Field::from_fn(&g, |x| Complex64::from_polar(1.0, 3.0 * x));
        let got = compose_map_apply(&e3, &shift, Exec::Parallel).unwrap();
        assert!(got.max_diff(&e3.scale(Complex64::from_polar(1.0, 3.0 * s))) < 1e-12);
    }

    #[test]
    fn rejects_folding_maps() {
        let g = grid(64);
        assert!(MonotoneMap::from_fn(&g, |x| x + 1.5 * x.sin()).is_err());
    }

    #[test]
    fn chain_rule_for_composition() {
        let g = grid(128);
        let map = wavy(&g, 0.25);
        let f = Field::from_fn(&g, |x| Complex64::new((x.cos()).exp(), (x + 0.3).sin()));
        let lhs = deriv(&compose_map_apply(&f, &map, Exec::Parallel).unwrap());
        let rhs = &map.jacobian() * &compose_map_apply(&deriv(&f), &map, Exec::Parallel).unwrap();
        assert!(lhs.max_diff(&rhs) < 1e-10);
    }

    #[test]
    fn inversion_round_trip() {
        let g = grid(128);
        let map = wavy(&g, 0.3);
        let inv = invert_map(&map, Exec::Parallel).unwrap();
        let back = map.eval(&inv.values(), Exec::Sequential);
        for (j, v) in back.iter().enumerate() {
            assert!((v - g.node(j)).abs() < 1e-10);
        }
        let inv2 = invert_map(&inv, Exec::Parallel).unwrap();
        assert!(inv2.deviation().max_diff(map.deviation()) < 1e-10);
        let id = MonotoneMap::identity(&g);
        assert!(invert_map(&id, Exec::Sequential).unwrap().is_identity());
    }

    #[test]
    fn hcal_matches_quadrature() {
        let g = grid(256);
        let map = wavy(&g, 0.2);
        let f = Field::from_fn(&g, |x| {
            Complex64::new((x.sin()).exp(), 0.5 * (2.0 * x).cos())
        });
        let f = &f - &Field::constant(&g, f.mean());
        let a = hcal_apply(&f, &map, Exec::Parallel).unwrap();
        let b = hcal_quadrature(&f, &map, Exec::Parallel);
        assert!(a.max_diff(&b) < 1e-9, "{}", a.max_diff(&b));
        let id = MonotoneMap::identity(&g);
        assert!(
            hcal_apply(&f, &id, Exec::Sequential)
                .unwrap()
                .max_diff(&hilbert(&f))
                == 0.0
        );
    }

    #[test]
    fn htilcal_undoes_jacobian() {
        let g = grid(128);
        let map = wavy(&g, 0.2);
        let f = Field::from_fn(&g, |x| Complex64::new(x.sin(), x.cos()));
        let lhs = htilcal_apply(&(&map.jacobian() * &f), &map, Exec::Parallel).unwrap();
        let rhs = hcal_apply(&f, &map, Exec::Parallel).unwrap();
        assert!(lhs.max_diff(&rhs) < 1e-10);
    }

    #[test]
    fn relative_map_of_equal_maps_is_identity() {
        let g = grid(64);
        let a = wavy(&g, 0.1);
        let r = relative_map(&a, &a.clone(), Exec::Sequential).unwrap();
        assert!(r.is_identity());
    }

    #[test]
    fn line_oracle_rejects_wide_support() {
        let w = LineWindow::new(-4.0, 4.0, 512).unwrap();
        let wide = |x: f64| Complex64::new((-x * x / 4.0).exp(), 0.0);
        let narrow = |x: f64| Complex64::new((-x * x * 4.0).exp(), 0.0);
        assert!(triple_bracket_line_oracle(&w, wide, narrow, narrow, Exec::Sequential).is_err());
        assert!(LineWindow::new(-4.0, 4.0, 256).is_err());
        let zero = |_: f64| ZERO;
        let r = triple_bracket_line_oracle(&w, zero, zero, zero, Exec::Sequential).unwrap();
        assert!(r.iter().all(|z| *z == ZERO));
    }
}
